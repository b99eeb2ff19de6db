use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples of f(q, p) on a tensor grid (axes may be non-uniform), with two
/// labelled sets of boundary cells: the ends of the negative cone of −(q−q₀)(p−p₀).
///
/// End A holds the boundary cells with q > q₀, p > p₀; end B those with q < q₀, p < p₀.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleLandscape {
    q_axis: Vec<f64>,
    p_axis: Vec<f64>,
    /// Row-major in q: index `iq * n_p + ip`.
    values: Vec<f64>,
    center: (f64, f64),
    end_a: Vec<usize>,
    end_b: Vec<usize>,
}

fn check_axis(a: &[f64], name: &str) -> Result<()> {
    if a.len() < 3 || a.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::BadLandscape(format!("{name} axis needs >= 3 strictly increasing nodes")));
    }
    Ok(())
}

pub fn uniform_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

impl SaddleLandscape {
    pub fn from_values(q_axis: Vec<f64>, p_axis: Vec<f64>, values: Vec<f64>, center: (f64, f64)) -> Result<Self> {
        check_axis(&q_axis, "q")?;
        check_axis(&p_axis, "p")?;
        if values.len() != q_axis.len() * p_axis.len() {
            return Err(Error::BadLandscape("value count does not match axes".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadLandscape("non-finite sample".into()));
        }
        let (nq, np) = (q_axis.len(), p_axis.len());
        let mut end_a = Vec::new();
        let mut end_b = Vec::new();
        for (iq, &q) in q_axis.iter().enumerate() {
            for (ip, &p) in p_axis.iter().enumerate() {
                if iq != 0 && iq != nq - 1 && ip != 0 && ip != np - 1 {
                    continue;
                }
                if q > center.0 && p > center.1 {
                    end_a.push(iq * np + ip);
                } else if q < center.0 && p < center.1 {
                    end_b.push(iq * np + ip);
                }
            }
        }
        if end_a.is_empty() || end_b.is_empty() {
            return Err(Error::BadLandscape("center must lie strictly inside the window".into()));
        }
        Ok(Self { q_axis, p_axis, values, center, end_a, end_b })
    }

    pub fn from_fn(q_axis: Vec<f64>, p_axis: Vec<f64>, center: (f64, f64), f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(q_axis.len() * p_axis.len());
        for &q in &q_axis {
            for &p in &p_axis {
                values.push(f(q, p));
            }
        }
        Self::from_values(q_axis, p_axis, values, center)
    }

    /// Uniform n_q × n_p grid on [q−, q+] × [p−, p+].
    pub fn uniform(
        q_range: (f64, f64),
        p_range: (f64, f64),
        n_q: usize,
        n_p: usize,
        center: (f64, f64),
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        Self::from_fn(uniform_axis(q_range.0, q_range.1, n_q), uniform_axis(p_range.0, p_range.1, n_p), center, f)
    }

    pub fn q_axis(&self) -> &[f64] {
        &self.q_axis
    }

    pub fn p_axis(&self) -> &[f64] {
        &self.p_axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn end_a(&self) -> &[usize] {
        &self.end_a
    }

    pub fn end_b(&self) -> &[usize] {
        &self.end_b
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.q_axis.len(), self.p_axis.len())
    }

    #[inline]
    pub fn at(&self, iq: usize, ip: usize) -> f64 {
        self.values[iq * self.p_axis.len() + ip]
    }

    pub fn cell(&self, idx: usize) -> (usize, usize) {
        (idx / self.p_axis.len(), idx % self.p_axis.len())
    }

    pub fn point(&self, idx: usize) -> (f64, f64) {
        let (iq, ip) = self.cell(idx);
        (self.q_axis[iq], self.p_axis[ip])
    }

    /// Largest spacing on either axis.
    pub fn grid_step(&self) -> f64 {
        let m = |a: &[f64]| a.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        m(&self.q_axis).max(m(&self.p_axis))
    }

    /// Largest value jump between 8-neighbours.
    pub fn cell_gap(&self) -> f64 {
        let (nq, np) = self.shape();
        let mut g: f64 = 0.0;
        for iq in 0..nq {
            for ip in 0..np {
                let v = self.at(iq, ip);
                for (dq, dp) in [(1, 0), (0, 1), (1, 1), (1, -1)] {
                    let (jq, jp) = (iq as isize + dq, ip as isize + dp);
                    if jq < nq as isize && jp >= 0 && jp < np as isize {
                        g = g.max((self.at(jq as usize, jp as usize) - v).abs());
                    }
                }
            }
        }
        g
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// −f with the ends of the negated quadratic: A = {q > q₀, p < p₀}, B = {q < q₀, p > p₀}.
    /// Implemented by negating and mirroring p about the center, which maps those
    /// quadrants onto the standard ones.
    pub fn opposite(&self) -> Self {
        let (nq, np) = self.shape();
        let pc = self.center.1;
        let p_axis: Vec<f64> = self.p_axis.iter().rev().map(|&p| 2.0 * pc - p).collect();
        let mut values = vec![0.0; self.values.len()];
        for iq in 0..nq {
            for ip in 0..np {
                values[iq * np + ip] = -self.at(iq, np - 1 - ip);
            }
        }
        Self::from_values(self.q_axis.clone(), p_axis, values, self.center).expect("mirrored landscape is valid")
    }

    /// Upper bound for the mountain-pass value valid when the top and bottom edges
    /// are monotone towards the ends (true for S = u(q) + F(p) + p(Q − q) once the
    /// p-window exceeds Lip(u)): any column joins both ends below its maximum.
    pub fn column_bound(&self) -> f64 {
        let (nq, np) = self.shape();
        (0..nq).map(|iq| (0..np).map(|ip| self.at(iq, ip)).fold(f64::NEG_INFINITY, f64::max)).fold(f64::INFINITY, f64::min)
    }
}
