//! Lipschitz grid functions and smooth (C¹) function interfaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A C¹ function of one variable.
pub trait C1Function: Sync {
    fn value(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;
}

/// A C¹ function given by closures for the value and the derivative.
pub struct Analytic<F, G> {
    pub f: F,
    pub df: G,
}

impl<F, G> Analytic<F, G>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    pub fn new(f: F, df: G) -> Self {
        Self { f, df }
    }
}

impl<F, G> C1Function for Analytic<F, G>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn deriv(&self, x: f64) -> f64 {
        (self.df)(x)
    }
}

/// Values on a uniform grid `origin + i·step`, with a certified Lipschitz
/// constant. Evaluation interpolates linearly; outside the grid the function
/// continues linearly with the boundary slope clamped to `[-lip, lip]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    origin: f64,
    step: f64,
    values: Vec<f64>,
    lip: f64,
}

impl GridFunction {
    /// Checks `|v[i+1] − v[i]| ≤ lip·step` up to rounding.
    pub fn new(origin: f64, step: f64, values: Vec<f64>, lip: f64) -> Result<Self> {
        if !(step > 0.0) || values.len() < 2 || !(lip >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid function needs step > 0, >= 2 values, lip >= 0 (step={step}, n={}, lip={lip})",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite grid value {v}")));
        }
        let g = Self { origin, step, values, lip };
        let m = g.measured_lip();
        if m > lip * (1.0 + 1e-9) + 1e-9 {
            return Err(Error::LipschitzViolation { measured: m, bound: lip });
        }
        Ok(g)
    }

    /// Samples `f` on the nodes of `[a, b]` (b rounded to the grid).
    pub fn from_fn(a: f64, b: f64, step: f64, lip: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidArgument(format!("empty domain [{a}, {b}]")));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize + 1;
        let values = (0..n).map(|i| f(a + step * i as f64)).collect();
        Self::new(a, step, values, lip)
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + self.step * i as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| self.node(i))
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.origin, self.node(self.values.len() - 1))
    }

    /// Largest slope between neighbouring nodes.
    pub fn measured_lip(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs() / self.step).fold(0.0, f64::max)
    }

    fn end_slopes(&self) -> (f64, f64) {
        let n = self.values.len();
        let l = (self.values[1] - self.values[0]) / self.step;
        let r = (self.values[n - 1] - self.values[n - 2]) / self.step;
        (l.clamp(-self.lip, self.lip), r.clamp(-self.lip, self.lip))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let y = (x - self.origin) / self.step;
        if y <= 0.0 {
            return self.values[0] + self.end_slopes().0 * (x - self.origin);
        }
        let last = (n - 1) as f64;
        if y >= last {
            return self.values[n - 1] + self.end_slopes().1 * (x - self.node(n - 1));
        }
        // nodes reproduce their stored values despite rounding in (x − origin)/step
        let r = y.round();
        if (y - r).abs() <= 1e-9 {
            return self.values[r as usize];
        }
        let i = (y.floor() as usize).min(n - 2);
        let w = y - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Index of the node closest to `x`, if `x` lies within the grid (up to rounding).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let y = (x - self.origin) / self.step;
        let k = y.round();
        if (y - k).abs() < 1e-6 && k >= 0.0 && (k as usize) < self.values.len() {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Nodes with `lo ≤ x ≤ hi` (with a relative rounding guard), same step.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        let guard = 1e-9 * self.step;
        let first = ((lo - self.origin - guard) / self.step).ceil().max(0.0) as usize;
        let last_f = ((hi - self.origin + guard) / self.step).floor();
        if last_f < 0.0 {
            return Err(Error::EmptyOverlap(lo, hi));
        }
        let last = (last_f as usize).min(self.values.len() - 1);
        if last < first + 1 {
            return Err(Error::EmptyOverlap(lo, hi));
        }
        Ok(Self { origin: self.node(first), step: self.step, values: self.values[first..=last].to_vec(), lip: self.lip })
    }

    /// Same grid with values shifted by `c`.
    pub fn add_constant(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v + c).collect(), ..self.clone() }
    }

    pub fn map_values(&self, lip: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self.nodes().zip(&self.values).map(|(x, &v)| f(x, v)).collect();
        Self::new(self.origin, self.step, values, lip)
    }

    /// Gaussian mollification with standard deviation `width·step`, evaluated with the
    /// linear extension beyond the domain; the result is a C¹ Hermite interpolant.
    pub fn mollified(&self, width: f64) -> SmoothGrid {
        let n = self.values.len();
        let (mut values, mut slopes) = (self.values.clone(), vec![0.0; n]);
        if width > 0.0 {
            let sigma = width;
            let half = (4.0 * sigma).ceil() as isize;
            let kernel: Vec<f64> = (-half..=half).map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp()).collect();
            let norm: f64 = kernel.iter().sum();
            values = (0..n as isize)
                .map(|i| {
                    let mut acc = 0.0;
                    for (j, w) in kernel.iter().enumerate() {
                        let k = i + j as isize - half;
                        let v = if k >= 0 && (k as usize) < n { self.values[k as usize] } else { self.eval(self.origin + self.step * k as f64) };
                        acc += w * v;
                    }
                    acc / norm
                })
                .collect();
        }
        for i in 0..n {
            slopes[i] = if i == 0 {
                (values[1] - values[0]) / self.step
            } else if i == n - 1 {
                (values[n - 1] - values[n - 2]) / self.step
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * self.step)
            };
        }
        SmoothGrid { origin: self.origin, step: self.step, values, slopes }
    }
}

/// Cubic Hermite interpolant through grid values with central-difference slopes;
/// extended linearly with the end slopes.
#[derive(Clone, Debug)]
pub struct SmoothGrid {
    origin: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl SmoothGrid {
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let y = (x - self.origin) / self.step;
        let n = self.values.len();
        if y < 0.0 || y > (n - 1) as f64 {
            return None;
        }
        let i = (y.floor() as usize).min(n - 2);
        Some((i, y - i as f64))
    }
}

impl C1Function for SmoothGrid {
    fn value(&self, x: f64) -> f64 {
        let n = self.values.len();
        match self.locate(x) {
            Some((i, w)) => {
                let (h00, h10, h01, h11) = (
                    (1.0 + 2.0 * w) * (1.0 - w).powi(2),
                    w * (1.0 - w).powi(2),
                    w * w * (3.0 - 2.0 * w),
                    w * w * (w - 1.0),
                );
                h00 * self.values[i] + h10 * self.step * self.slopes[i] + h01 * self.values[i + 1] + h11 * self.step * self.slopes[i + 1]
            }
            None if x < self.origin => self.values[0] + self.slopes[0] * (x - self.origin),
            None => self.values[n - 1] + self.slopes[n - 1] * (x - self.origin - self.step * (n - 1) as f64),
        }
    }

    fn deriv(&self, x: f64) -> f64 {
        let n = self.values.len();
        match self.locate(x) {
            Some((i, w)) => {
                let d00 = 6.0 * w * w - 6.0 * w;
                let d10 = 3.0 * w * w - 4.0 * w + 1.0;
                let d01 = -d00;
                let d11 = 3.0 * w * w - 2.0 * w;
                (d00 * self.values[i] + d01 * self.values[i + 1]) / self.step + d10 * self.slopes[i] + d11 * self.slopes[i + 1]
            }
            None if x < self.origin => self.slopes[0],
            None => self.slopes[n - 1],
        }
    }
}

/// Named initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum InitialCondition {
    /// |q|
    Abs,
    /// −|q|
    NegAbs,
    /// cos q
    Cos,
    /// a·q
    Linear { a: f64 },
    /// c
    Constant { c: f64 },
}

impl InitialCondition {
    pub fn eval(&self, q: f64) -> f64 {
        match *self {
            Self::Abs => q.abs(),
            Self::NegAbs => -q.abs(),
            Self::Cos => q.cos(),
            Self::Linear { a } => a * q,
            Self::Constant { c } => c,
        }
    }

    /// Derivative, taking the 0 one-sided average at kinks.
    pub fn deriv(&self, q: f64) -> f64 {
        match *self {
            Self::Abs => q.signum() * (q != 0.0) as i32 as f64,
            Self::NegAbs => -q.signum() * (q != 0.0) as i32 as f64,
            Self::Cos => -q.sin(),
            Self::Linear { a } => a,
            Self::Constant { .. } => 0.0,
        }
    }

    pub fn lip(&self) -> f64 {
        match *self {
            Self::Abs | Self::NegAbs | Self::Cos => 1.0,
            Self::Linear { a } => a.abs(),
            Self::Constant { .. } => 0.0,
        }
    }

    /// Whether the function is C¹ (no mollification needed for characteristics).
    pub fn is_smooth(&self) -> bool {
        !matches!(self, Self::Abs | Self::NegAbs)
    }

    /// Samples on `[a, b]`; beyond the grid the stored function continues linearly
    /// with clamped slope, which is how kinked data like |q| is "clamped".
    pub fn to_grid(&self, a: f64, b: f64, h: f64) -> Result<GridFunction> {
        GridFunction::from_fn(a, b, h, self.lip(), |q| self.eval(q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_extension_clamps_slope() {
        let g = GridFunction::new(0.0, 1.0, vec![0.0, 1.0, 1.5], 1.0).unwrap();
        assert_eq!(g.eval(-2.0), -2.0);
        assert_eq!(g.eval(4.0), 2.5);
        assert_eq!(g.eval(0.5), 0.5);
        let g = GridFunction::new(0.0, 1.0, vec![0.0, 1.0, 1.5], 2.0).unwrap();
        assert_eq!(g.eval(-1.0), -1.0);
    }

    #[test]
    fn rejects_lipschitz_violation() {
        assert!(matches!(GridFunction::new(0.0, 0.5, vec![0.0, 1.0], 1.0), Err(Error::LipschitzViolation { .. })));
    }

    #[test]
    fn restrict_keeps_nodes() {
        let g = InitialCondition::Abs.to_grid(-1.0, 1.0, 0.25).unwrap();
        let r = g.restrict(-0.3, 0.6).unwrap();
        assert_eq!(r.origin(), -0.25);
        assert_eq!(r.len(), 4);
        assert_eq!(r.values(), &[0.25, 0.0, 0.25, 0.5]);
    }

    #[test]
    fn mollified_kink_is_close_and_c1() {
        let h = 0.01;
        let g = InitialCondition::NegAbs.to_grid(-1.0, 1.0, h).unwrap();
        let s = g.mollified(2.0);
        // sup error of a Gaussian-smoothed kink is σ·sqrt(2/π)
        let bound = 2.0 * h * (2.0 / std::f64::consts::PI).sqrt() + 1e-12;
        for i in 0..=2000 {
            let x = -1.0 + 1e-3 * i as f64;
            assert!((s.value(x) + x.abs()).abs() <= bound * 1.01);
        }
        let e = 1e-7;
        for &x in &[-0.5, -0.003, 0.0, 0.0042, 0.77] {
            let fd = (s.value(x + e) - s.value(x - e)) / (2.0 * e);
            assert!((fd - s.deriv(x)).abs() < 1e-5);
        }
        assert!((s.deriv(0.5) + 1.0).abs() < 1e-9);
    }

    #[test]
    fn smooth_grid_reproduces_smooth_data() {
        let g = InitialCondition::Cos.to_grid(-2.0, 2.0, 1e-3).unwrap();
        let s = g.mollified(0.0);
        for &x in &[-1.3, 0.0, 0.4567, 1.9] {
            assert!((s.value(x) - x.cos()).abs() < 1e-9);
            assert!((s.deriv(x) + x.sin()).abs() < 1e-6);
        }
    }
}
