use super::{SelectorMethod, SelectorResult, Witness};
use crate::error::{Error, Result};

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a <= 1e-12 * (1.0 + a.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// σ of a coercive one-variable function is its minimum: dense scan with `n`
/// samples, then golden-section refinement around the best sample.
pub fn sigma_coercive(f: &dyn Fn(f64) -> f64, window: (f64, f64), n: usize) -> Result<SelectorResult> {
    let (lo, hi) = window;
    if !(hi > lo) || n < 3 {
        return Err(Error::InvalidArgument("coercive selection needs a nonempty window and n >= 3".into()));
    }
    let dx = (hi - lo) / (n - 1) as f64;
    let (mut k, mut best) = (0, f64::INFINITY);
    for i in 0..n {
        let v = f(lo + dx * i as f64);
        if v < best {
            best = v;
            k = i;
        }
    }
    if k == 0 || k == n - 1 {
        return Err(Error::MinimumOnBoundary(lo + dx * k as f64));
    }
    let (x, v) = golden_min(f, lo + dx * (k - 1) as f64, lo + dx * (k + 1) as f64);
    let (x, v) = if v < best { (x, v) } else { (lo + dx * k as f64, best) };
    Ok(SelectorResult { value: v, witness: Witness::Point(x), method: SelectorMethod::Min, pass_cell: None })
}

/// σ of an anti-coercive function is its maximum, computed as −σ(−f).
pub fn sigma_anticoercive(f: &dyn Fn(f64) -> f64, window: (f64, f64), n: usize) -> Result<SelectorResult> {
    let neg = |x: f64| -f(x);
    let r = sigma_coercive(&neg, window, n)?;
    Ok(SelectorResult { value: -r.value, method: SelectorMethod::MaxOfNegated, ..r })
}

/// g(x) = min_y f(x, y) for f uniformly convex in y on `y_window`.
pub struct ConvexFiber<'a> {
    f: &'a (dyn Fn(f64, f64) -> f64 + Sync),
    modulus: f64,
    y_window: (f64, f64),
}

pub fn reduce_convex_fiber<'a>(f: &'a (dyn Fn(f64, f64) -> f64 + Sync), modulus: f64, y_window: (f64, f64)) -> Result<ConvexFiber<'a>> {
    if !(modulus > 0.0) || !(y_window.1 > y_window.0) {
        return Err(Error::InvalidArgument("convex fiber needs modulus > 0 and a nonempty window".into()));
    }
    Ok(ConvexFiber { f, modulus, y_window })
}

impl ConvexFiber<'_> {
    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    /// (g(x), argmin y).
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let fy = |y: f64| (self.f)(x, y);
        let r = sigma_coercive(&fy, self.y_window, 65)?;
        let Witness::Point(y) = r.witness else { unreachable!() };
        Ok((r.value, y))
    }
}
