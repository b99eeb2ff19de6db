use super::model::{Convexity, HamiltonianModel};
use crate::error::{Error, Result};

/// L(t,q,v) = sup_p (p v − H) for convex models (inf for concave ones), with its
/// optimizer. Solves ∂H/∂p = v by bracketing and bisection.
pub fn legendre_transform(h: &HamiltonianModel, t: f64, q: f64, v: f64) -> Result<(f64, f64)> {
    let sign = match h.convexity() {
        Convexity::Convex(_) => 1.0,
        Convexity::Concave(_) => -1.0,
        Convexity::None => {
            return Err(Error::Incompatible(format!("{} is neither convex nor concave in p", h.name())));
        }
    };
    // g is increasing in p for both cases after the sign flip.
    let g = |p: f64| sign * (h.eval(t, q, p).dp - v);
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut expand = 0;
    while g(lo) > 0.0 {
        lo *= 2.0;
        expand += 1;
        if expand > 200 {
            return Err(Error::NoConvergence(format!("Legendre bracket for v={v} (wrong convexity flag?)")));
        }
    }
    while g(hi) < 0.0 {
        hi *= 2.0;
        expand += 1;
        if expand > 200 {
            return Err(Error::NoConvergence(format!("Legendre bracket for v={v} (wrong convexity flag?)")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    if g(lo) > 0.0 || g(hi) < 0.0 {
        return Err(Error::NoConvergence(format!("Legendre solve for v={v}")));
    }
    Ok((p * v - h.value(t, q, p), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::registry;
    use rand::{Rng, SeedableRng};

    #[test]
    fn self_dual_quadratic() {
        let (l, p) = legendre_transform(&registry::quadratic(), 0.0, 0.0, 3.0).unwrap();
        assert!((l - 4.5).abs() < 1e-12 && (p - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pendulum_at_rest() {
        let (l, p) = legendre_transform(&registry::pendulum(), 0.0, 0.0, 0.0).unwrap();
        assert!((l + 1.0).abs() < 1e-12 && p.abs() < 1e-12);
    }

    #[test]
    fn concave_uses_infimum() {
        let (l, p) = legendre_transform(&registry::concave_quadratic(), 0.0, 0.0, 2.0).unwrap();
        // inf_p (2p + p²/2) = −2 at p = −2
        assert!((l + 2.0).abs() < 1e-12 && (p + 2.0).abs() < 1e-12);
    }

    #[test]
    fn legendre_inequality() {
        let h = registry::pendulum();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let q = rng.gen_range(-3.0..3.0);
            let v = rng.gen_range(-5.0..5.0);
            let p = rng.gen_range(-5.0..5.0);
            let (l, pstar) = legendre_transform(&h, 0.0, q, v).unwrap();
            assert!(l + h.value(0.0, q, p) >= p * v - 1e-12);
            assert!((l + h.value(0.0, q, pstar) - pstar * v).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonconvex() {
        assert!(legendre_transform(&registry::nonconvex_bump(2.0), 0.0, 0.0, 1.0).is_err());
    }
}
