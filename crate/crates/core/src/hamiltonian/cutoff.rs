use serde::{Deserialize, Serialize};

use super::model::{HamEval, HamiltonianModel};
use crate::error::{Error, Result};

// Slope factor of the log-radius profile, relative to eps/12.
const SLOPE: f64 = 1.5;
const START_RAMP: f64 = 2.0;
const END_RAMP: f64 = 4.0;

/// Radial profile φ: [0, ∞) → [0, 1], equal to 1 on [0, R'] with R' = max(1, R)
/// and compactly supported.
///
/// φ is built in the variable s = ln(1+r): ψ(s) = φ(r) has a piecewise-polynomial
/// C² derivative ψ' = -(SLOPE·eps/12)·ramp(s), where `ramp` rises by a smoothstep,
/// stays at 1, then falls by a smoothstep. This gives |φ'| ≤ eps/(6(1+r)) and
/// |φ''| ≤ eps/(6(1+r)²) everywhere, and |φ'|/r ≤ eps/(6(1+r)²) since φ' vanishes
/// on [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub radius: f64,
    pub eps: f64,
    /// s-coordinates (ln(1+r)) of the four knots: start, end of rise, start of fall, end.
    pub knots: [f64; 4],
}

fn smoothstep(y: f64) -> f64 {
    y * y * (3.0 - 2.0 * y)
}

fn smoothstep_prime(y: f64) -> f64 {
    6.0 * y * (1.0 - y)
}

// Antiderivative of the smoothstep, vanishing at 0.
fn smoothstep_int(y: f64) -> f64 {
    y * y * y * (1.0 - 0.5 * y)
}

impl CutoffProfile {
    pub fn new(radius: f64, eps: f64) -> Result<Self> {
        if !(radius > 0.0) || !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidArgument(format!("cutoff needs R > 0 and 0 < eps <= 1 (R={radius}, eps={eps})")));
        }
        let s0 = (1.0 + radius.max(1.0)).ln();
        let plateau = 12.0 / (SLOPE * eps) - (0.5 * START_RAMP + 0.5 * END_RAMP);
        let k1 = s0 + START_RAMP;
        let k2 = k1 + plateau;
        Ok(Self { radius, eps, knots: [s0, k1, k2, k2 + END_RAMP] })
    }

    /// Radius beyond which φ vanishes.
    pub fn outer_radius(&self) -> f64 {
        self.knots[3].exp() - 1.0
    }

    fn rate(&self) -> f64 {
        SLOPE * self.eps / 12.0
    }

    // (ψ, ψ', ψ'') at s.
    fn psi(&self, s: f64) -> (f64, f64, f64) {
        let [s0, k1, k2, k3] = self.knots;
        let a = self.rate();
        if s <= s0 {
            (1.0, 0.0, 0.0)
        } else if s < k1 {
            let y = (s - s0) / START_RAMP;
            let drop = a * START_RAMP * smoothstep_int(y);
            (1.0 - drop, -a * smoothstep(y), -a * smoothstep_prime(y) / START_RAMP)
        } else if s < k2 {
            let drop = a * (0.5 * START_RAMP + (s - k1));
            (1.0 - drop, -a, 0.0)
        } else if s < k3 {
            let x = s - k2;
            let y = x / END_RAMP;
            let drop = a * (0.5 * START_RAMP + (k2 - k1) + x - END_RAMP * smoothstep_int(y));
            ((1.0 - drop).clamp(0.0, 1.0), -a * (1.0 - smoothstep(y)), a * smoothstep_prime(y) / END_RAMP)
        } else {
            (0.0, 0.0, 0.0)
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.psi(r.ln_1p()).0
    }

    /// (φ(r), φ'(r), φ''(r)).
    pub fn derivatives(&self, r: f64) -> (f64, f64, f64) {
        let (v, d1, d2) = self.psi(r.ln_1p());
        let w = 1.0 + r;
        (v, d1 / w, (d2 - d1) / (w * w))
    }
}

/// Multiplies H by φ(|p|), producing a model that equals H for |p| ≤ R and
/// vanishes for |p| beyond the profile's outer radius. The constant becomes C(1+eps).
pub fn cutoff_compact_support(h: &HamiltonianModel, radius: f64, eps: f64) -> Result<HamiltonianModel> {
    let profile = CutoffProfile::new(radius, eps)?;
    let inner = h.shared();
    let func = move |t: f64, q: f64, p: f64| {
        let e = inner.eval(t, q, p);
        let (phi, dphi, _) = profile.derivatives(p.abs());
        if phi == 1.0 && dphi == 0.0 {
            return e;
        }
        HamEval::new(phi * e.value, phi * e.dq, phi * e.dp + dphi * p.signum() * e.value)
    };
    Ok(HamiltonianModel::new(format!("{}|cut({radius})", h.name()), func, h.constant_c() * (1.0 + eps))?
        .integrable(h.is_integrable())
        .with_support(Some(profile.outer_radius()), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::registry;

    #[test]
    fn profile_bounds_on_log_grid() {
        for &(r0, eps) in &[(0.3, 1.0), (2.0, 0.5), (10.0, 1.0), (1.0, 0.25)] {
            let prof = CutoffProfile::new(r0, eps).unwrap();
            let outer = prof.outer_radius();
            assert!(outer <= (1.0 + f64::max(1.0, r0)) * (12.0 / eps).exp() - 1.0);
            let n = 20000;
            let lmax = outer.ln_1p() + 1.0;
            for i in 0..=n {
                let r = (lmax * i as f64 / n as f64).exp() - 1.0;
                let (v, d1, d2) = prof.derivatives(r);
                let w = 1.0 + r;
                assert!((0.0..=1.0).contains(&v));
                assert!(d1.abs() <= eps / (6.0 * w) + 1e-15);
                assert!(d2.abs() <= eps / (6.0 * w * w) + 1e-15);
                if r > 0.0 {
                    assert!(d1.abs() / r <= eps / (6.0 * w * w) + 1e-15);
                }
                if r <= r0.max(1.0) {
                    assert_eq!(v, 1.0);
                }
            }
            assert_eq!(prof.phi(outer * 1.0000001), 0.0);
            assert!(prof.phi(outer * 0.999) > 0.0);
        }
    }

    #[test]
    fn profile_is_continuous_at_knots() {
        let prof = CutoffProfile::new(1.5, 0.7).unwrap();
        for &k in &prof.knots {
            let r = k.exp() - 1.0;
            let a = prof.derivatives(r * (1.0 - 1e-12));
            let b = prof.derivatives(r * (1.0 + 1e-12));
            assert!((a.0 - b.0).abs() < 1e-9);
            assert!((a.1 - b.1).abs() < 1e-9);
        }
    }

    #[test]
    fn cutoff_model_matches_inside_and_vanishes_outside() {
        let h = registry::pendulum();
        let cut = cutoff_compact_support(&h, 3.0, 1.0).unwrap();
        assert_eq!(cut.value(0.0, 0.4, 1.5), h.value(0.0, 0.4, 1.5));
        let far = (1.0 + 3.0f64) * 12f64.exp() - 1.0;
        assert_eq!(cut.value(0.0, 0.4, far), 0.0);
        assert_eq!(cut.value(0.0, 0.4, -far), 0.0);
        assert!((cut.constant_c() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cutoff_gradient_growth_by_finite_differences() {
        use rand::{Rng, SeedableRng};
        let h = registry::nonconvex_bump(0.5);
        let cut = cutoff_compact_support(&h, 1.0, 1.0).unwrap();
        let c = cut.constant_c();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let e = 1e-5;
        for _ in 0..2000 {
            let q = rng.gen_range(-5.0..5.0);
            let p: f64 = rng.gen_range(-1.0f64..12.0).exp() * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let fdq = (cut.value(0.0, q + e, p) - cut.value(0.0, q - e, p)) / (2.0 * e);
            let fdp = (cut.value(0.0, q, p + e * (1.0 + p.abs())) - cut.value(0.0, q, p - e * (1.0 + p.abs())))
                / (2.0 * e * (1.0 + p.abs()));
            let g = fdq.hypot(fdp);
            assert!(g <= c * (1.0 + p.abs()) * (1.0 + 1e-4), "p={p} g={g}");
            let ex = cut.eval(0.0, q, p);
            assert!((ex.dp - fdp).abs() <= 1e-4 * (1.0 + p.abs()), "p={p} {} vs {fdp}", ex.dp);
        }
    }
}
