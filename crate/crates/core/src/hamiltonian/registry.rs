//! Built-in Hamiltonians, addressable by name.

use super::model::{Convexity, HamEval, HamiltonianModel};
use crate::error::{Error, Result};

pub const NAMES: &[&str] = &["zero", "quadratic", "pendulum", "nonconvex_bump", "concave_quadratic", "constant"];

/// H ≡ 0.
pub fn zero() -> HamiltonianModel {
    HamiltonianModel::new("zero", |_t, _q, _p| HamEval::new(0.0, 0.0, 0.0), 1.0).unwrap().integrable(true)
}

/// H = p²/2.
pub fn quadratic() -> HamiltonianModel {
    HamiltonianModel::new("quadratic", |_t, _q, p: f64| HamEval::new(0.5 * p * p, 0.0, p), 1.0)
        .unwrap()
        .integrable(true)
        .with_convexity(Convexity::Convex(1.0))
}

/// H = −p²/2.
pub fn concave_quadratic() -> HamiltonianModel {
    HamiltonianModel::new("concave_quadratic", |_t, _q, p: f64| HamEval::new(-0.5 * p * p, 0.0, -p), 1.0)
        .unwrap()
        .integrable(true)
        .with_convexity(Convexity::Concave(1.0))
}

/// H = p²/2 + cos q.
pub fn pendulum() -> HamiltonianModel {
    HamiltonianModel::new("pendulum", |_t, q: f64, p: f64| HamEval::new(0.5 * p * p + q.cos(), -q.sin(), p), 1.0)
        .unwrap()
        .with_convexity(Convexity::Convex(1.0))
}

/// H = p²/2 − a·exp(−p²). Second derivative ranges over [1 − 0.893a, 1 + 2a],
/// so C = 1 + 2a and the model is non-convex for a above roughly 1.12.
pub fn nonconvex_bump(a: f64) -> HamiltonianModel {
    let func = move |_t, _q, p: f64| {
        let g = (-p * p).exp();
        HamEval::new(0.5 * p * p - a * g, 0.0, p + 2.0 * a * p * g)
    };
    let min_curv = 1.0 + 2.0 * a * (-1.5f64).exp() * -2.0;
    let convexity = if a >= 0.0 && min_curv > 0.0 { Convexity::Convex(min_curv) } else { Convexity::None };
    HamiltonianModel::new(format!("nonconvex_bump(a={a})"), func, 1.0 + 2.0 * a.abs())
        .unwrap()
        .integrable(true)
        .with_convexity(convexity)
}

/// H ≡ c.
pub fn constant(c: f64) -> HamiltonianModel {
    HamiltonianModel::new(format!("constant({c})"), move |_t, _q, _p| HamEval::new(c, 0.0, 0.0), c.abs().max(1.0))
        .unwrap()
        .integrable(true)
}

/// Looks a model up by name; `param` feeds `a` for the bump and `c` for the constant.
pub fn by_name(name: &str, param: Option<f64>) -> Result<HamiltonianModel> {
    match name {
        "zero" => Ok(zero()),
        "quadratic" => Ok(quadratic()),
        "pendulum" => Ok(pendulum()),
        "nonconvex_bump" => Ok(nonconvex_bump(param.unwrap_or(2.0))),
        "concave_quadratic" => Ok(concave_quadratic()),
        "constant" => Ok(constant(param.unwrap_or(1.0))),
        other => Err(Error::Config(format!("unknown hamiltonian '{other}'; available: {}", NAMES.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_pass_their_own_audit() {
        for m in [zero(), quadratic(), concave_quadratic(), pendulum(), nonconvex_bump(0.5), nonconvex_bump(2.0), constant(-0.7)] {
            m.audit(3000, 10.0, 20.0, 11).unwrap_or_else(|e| panic!("{}: {e}", m.name()));
        }
    }

    #[test]
    fn bump_convexity_threshold() {
        assert!(matches!(nonconvex_bump(1.0).convexity(), Convexity::Convex(_)));
        assert_eq!(nonconvex_bump(2.0).convexity(), Convexity::None);
        assert!(nonconvex_bump(2.0).d2p(0.0, 0.0, 1.2247) < 0.0);
    }

    #[test]
    fn exact_derivatives_match_differences() {
        let e = 1e-6;
        for m in [pendulum(), nonconvex_bump(2.0)] {
            for &(q, p) in &[(0.3, -1.1), (2.0, 0.4), (-1.0, 2.5)] {
                let ev = m.eval(0.0, q, p);
                let fq = (m.value(0.0, q + e, p) - m.value(0.0, q - e, p)) / (2.0 * e);
                let fp = (m.value(0.0, q, p + e) - m.value(0.0, q, p - e)) / (2.0 * e);
                assert!((ev.dq - fq).abs() < 1e-7 && (ev.dp - fp).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn unknown_name_lists_registry() {
        let msg = by_name("duffing", None).unwrap_err().to_string();
        assert!(msg.contains("pendulum") && msg.contains("nonconvex_bump"));
    }
}
