use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value of a Hamiltonian and its first derivatives at one phase point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamEval {
    pub value: f64,
    /// ∂H/∂q
    pub dq: f64,
    /// ∂H/∂p
    pub dp: f64,
}

impl HamEval {
    pub fn new(value: f64, dq: f64, dp: f64) -> Self {
        Self { value, dq, dp }
    }
}

/// Anything that can evaluate H(t, q, p) together with its exact first derivatives.
pub trait Hamiltonian: Send + Sync {
    fn eval(&self, t: f64, q: f64, p: f64) -> HamEval;
}

impl<F> Hamiltonian for F
where
    F: Fn(f64, f64, f64) -> HamEval + Send + Sync,
{
    fn eval(&self, t: f64, q: f64, p: f64) -> HamEval {
        self(t, q, p)
    }
}

/// Convexity in the momentum variable, with a lower bound on |∂²H/∂p²|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "m")]
pub enum Convexity {
    None,
    Convex(f64),
    Concave(f64),
}

/// A Hamiltonian together with the growth constant C satisfying
/// `|∂²H| ≤ C`, `|∂H| ≤ C(1+|p|)`, `|H| ≤ C(1+|p|)²`, and structural flags.
#[derive(Clone)]
pub struct HamiltonianModel {
    name: String,
    func: Arc<dyn Hamiltonian>,
    constant_c: f64,
    integrable: bool,
    convexity: Convexity,
    support_radius: Option<f64>,
    tail_z: f64,
}

impl fmt::Debug for HamiltonianModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianModel")
            .field("name", &self.name)
            .field("constant_c", &self.constant_c)
            .field("integrable", &self.integrable)
            .field("convexity", &self.convexity)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

impl HamiltonianModel {
    /// Wraps an evaluator. `constant_c` must be positive.
    pub fn new(name: impl Into<String>, func: impl Hamiltonian + 'static, constant_c: f64) -> Result<Self> {
        if !(constant_c > 0.0 && constant_c.is_finite()) {
            return Err(Error::InvalidArgument(format!("constant C must be positive, got {constant_c}")));
        }
        Ok(Self {
            name: name.into(),
            func: Arc::new(func),
            constant_c,
            integrable: false,
            convexity: Convexity::None,
            support_radius: None,
            tail_z: 0.0,
        })
    }

    /// Marks the model as depending on p only.
    pub fn integrable(mut self, yes: bool) -> Self {
        self.integrable = yes;
        self
    }

    pub fn with_convexity(mut self, c: Convexity) -> Self {
        self.convexity = c;
        self
    }

    pub(crate) fn with_support(mut self, radius: Option<f64>, z: f64) -> Self {
        self.support_radius = radius;
        self.tail_z = z;
        self
    }

    pub(crate) fn shared(&self) -> Arc<dyn Hamiltonian> {
        Arc::clone(&self.func)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constant_c(&self) -> f64 {
        self.constant_c
    }

    pub fn is_integrable(&self) -> bool {
        self.integrable
    }

    pub fn convexity(&self) -> Convexity {
        self.convexity
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    pub fn tail_z(&self) -> f64 {
        self.tail_z
    }

    #[inline]
    pub fn eval(&self, t: f64, q: f64, p: f64) -> HamEval {
        self.func.eval(t, q, p)
    }

    #[inline]
    pub fn value(&self, t: f64, q: f64, p: f64) -> f64 {
        self.func.eval(t, q, p).value
    }

    /// Spectral norm of the spatial Hessian, by central differences of the exact gradient.
    pub fn hessian_norm(&self, t: f64, q: f64, p: f64) -> f64 {
        let e = 1e-5;
        let a = self.eval(t, q + e, p);
        let b = self.eval(t, q - e, p);
        let c = self.eval(t, q, p + e);
        let d = self.eval(t, q, p - e);
        let hqq = (a.dq - b.dq) / (2.0 * e);
        let hpp = (c.dp - d.dp) / (2.0 * e);
        let hqp = 0.5 * ((a.dp - b.dp) + (c.dq - d.dq)) / (2.0 * e);
        let mean = 0.5 * (hqq + hpp);
        let rad = (0.25 * (hqq - hpp).powi(2) + hqp * hqp).sqrt();
        (mean.abs() + rad).max((mean - rad).abs())
    }

    /// Second momentum derivative by central differences of ∂H/∂p.
    pub fn d2p(&self, t: f64, q: f64, p: f64) -> f64 {
        let e = 1e-5;
        (self.eval(t, q, p + e).dp - self.eval(t, q, p - e).dp) / (2.0 * e)
    }

    /// Spot-checks the growth bounds and flags on `samples` random points
    /// drawn from `|t| ≤ 1`, `|q| ≤ q_range`, `|p| ≤ p_range`.
    pub fn audit(&self, samples: usize, q_range: f64, p_range: f64, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = self.constant_c;
        let slack = 1e-6;
        for _ in 0..samples {
            let t = rng.gen_range(0.0..1.0);
            let q = rng.gen_range(-q_range..=q_range);
            let p = rng.gen_range(-p_range..=p_range);
            let e = self.eval(t, q, p);
            let w = 1.0 + p.abs();
            if !(e.value.is_finite() && e.dq.is_finite() && e.dp.is_finite()) {
                return Err(Error::Config(format!("{}: non-finite value at (t={t}, q={q}, p={p})", self.name)));
            }
            let h2 = self.hessian_norm(t, q, p);
            if h2 > c * (1.0 + slack) + slack {
                return Err(Error::Config(format!(
                    "{}: growth hypothesis violated: |d2H| = {h2:.6} exceeds declared C = {c} at (t={t:.4}, q={q:.4}, p={p:.4})",
                    self.name
                )));
            }
            let g = e.dq.hypot(e.dp);
            if g > c * w * (1.0 + slack) + slack {
                return Err(Error::Config(format!(
                    "{}: growth hypothesis violated: |dH| = {g:.6} exceeds C(1+|p|) = {:.6} at (q={q:.4}, p={p:.4})",
                    self.name,
                    c * w
                )));
            }
            if e.value.abs() > c * w * w * (1.0 + slack) + slack {
                return Err(Error::Config(format!(
                    "{}: growth hypothesis violated: |H| = {:.6} exceeds C(1+|p|)^2 = {:.6} at (q={q:.4}, p={p:.4})",
                    self.name,
                    e.value.abs(),
                    c * w * w
                )));
            }
            match self.convexity {
                Convexity::Convex(m) if self.d2p(t, q, p) < m * (1.0 - slack) - slack => {
                    return Err(Error::Config(format!("{}: d2H/dp2 below declared convexity modulus {m} at p={p:.4}", self.name)));
                }
                Convexity::Concave(m) if -self.d2p(t, q, p) < m * (1.0 - slack) - slack => {
                    return Err(Error::Config(format!("{}: -d2H/dp2 below declared concavity modulus {m} at p={p:.4}", self.name)));
                }
                _ => {}
            }
            if self.integrable {
                let other = self.eval(t * 0.5 + 0.1, q + 0.731, p);
                if (other.value - e.value).abs() > 1e-12 * (1.0 + e.value.abs()) || e.dq != 0.0 {
                    return Err(Error::Config(format!("{}: declared integrable but depends on (t, q)", self.name)));
                }
            }
        }
        Ok(())
    }
}
