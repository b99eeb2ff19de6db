//! Critical value selection on planar "saddle plus Lipschitz" landscapes.

mod audit;
mod coercive;
mod landscape;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use audit::{axiom_audit, AuditEntry, AuditGrid, AuditReport};
pub use coercive::{reduce_convex_fiber, sigma_anticoercive, sigma_coercive, ConvexFiber};
pub use landscape::{uniform_axis, SaddleLandscape};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorMethod {
    Min,
    MaxOfNegated,
    MountainPass,
    Opposite,
    ConvexReduction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    /// Grid cells (iq, ip) of a path from end A to end B.
    Path(Vec<(usize, usize)>),
    /// The optimizing abscissa of a one-variable selection.
    Point(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectorResult {
    pub value: f64,
    pub witness: Witness,
    pub method: SelectorMethod,
    /// Cell at which the two ends first connect.
    pub pass_cell: Option<(usize, usize)>,
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    flags: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect(), size: vec![1; n], flags: vec![0; n] }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] { (ra, rb) } else { (rb, ra) };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        self.flags[big as usize] |= self.flags[small as usize];
        big
    }
}

// Monotone map from f64 (total order) to u64.
#[inline]
fn order_key(v: f64) -> u64 {
    let b = v.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

const NEIGHBOURS: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// Least a such that ends A and B meet in one 8-connected component of {f ≤ a}.
pub fn sigma_mountain_pass(land: &SaddleLandscape) -> Result<SelectorResult> {
    sigma_mountain_pass_bounded(land, None)
}

/// As [`sigma_mountain_pass`], inserting only cells with value ≤ `ceiling` when given.
/// Falls back to the full grid if the ends do not meet below the ceiling.
pub fn sigma_mountain_pass_bounded(land: &SaddleLandscape, ceiling: Option<f64>) -> Result<SelectorResult> {
    if let Some(c) = ceiling {
        if let Some(r) = run_pass(land, Some(c)) {
            return Ok(r);
        }
    }
    run_pass(land, None).ok_or(Error::EndsNotConnected)
}

fn run_pass(land: &SaddleLandscape, ceiling: Option<f64>) -> Option<SelectorResult> {
    let (nq, np) = land.shape();
    let n = nq * np;
    let vals = land.values();
    let mut keyed: Vec<(u64, u32)> = (0..n as u32)
        .filter(|&i| ceiling.is_none_or(|c| vals[i as usize] <= c))
        .map(|i| (order_key(vals[i as usize]), i))
        .collect();
    keyed.sort_unstable();
    let order: Vec<u32> = keyed.into_iter().map(|(_, i)| i).collect();
    let mut uf = UnionFind::new(n);
    for &i in land.end_a() {
        uf.flags[i] |= 1;
    }
    for &i in land.end_b() {
        uf.flags[i] |= 2;
    }
    let mut active = vec![false; n];
    for &idx in &order {
        let i = idx as usize;
        active[i] = true;
        let (iq, ip) = (i / np, i % np);
        let mut root = uf.find(idx);
        for (dq, dp) in NEIGHBOURS {
            let (jq, jp) = (iq as isize + dq, ip as isize + dp);
            if jq < 0 || jp < 0 || jq >= nq as isize || jp >= np as isize {
                continue;
            }
            let j = jq as usize * np + jp as usize;
            if active[j] {
                root = uf.union(root, j as u32);
            }
        }
        if uf.flags[root as usize] == 3 {
            let path = witness_path(land, &active);
            return Some(SelectorResult {
                value: vals[i],
                witness: Witness::Path(path),
                method: SelectorMethod::MountainPass,
                pass_cell: Some((iq, ip)),
            });
        }
    }
    None
}

fn witness_path(land: &SaddleLandscape, active: &[bool]) -> Vec<(usize, usize)> {
    let (nq, np) = land.shape();
    let mut prev = vec![u32::MAX; nq * np];
    let mut is_b = vec![false; nq * np];
    for &b in land.end_b() {
        is_b[b] = true;
    }
    let mut queue = VecDeque::new();
    for &a in land.end_a() {
        if active[a] {
            prev[a] = a as u32;
            queue.push_back(a);
        }
    }
    while let Some(i) = queue.pop_front() {
        if is_b[i] {
            let mut path = vec![(i / np, i % np)];
            let mut k = i;
            while prev[k] as usize != k {
                k = prev[k] as usize;
                path.push((k / np, k % np));
            }
            path.reverse();
            return path;
        }
        let (iq, ip) = (i / np, i % np);
        for (dq, dp) in NEIGHBOURS {
            let (jq, jp) = (iq as isize + dq, ip as isize + dp);
            if jq < 0 || jp < 0 || jq >= nq as isize || jp >= np as isize {
                continue;
            }
            let j = jq as usize * np + jp as usize;
            if active[j] && prev[j] == u32::MAX {
                prev[j] = i as u32;
                queue.push_back(j);
            }
        }
    }
    unreachable!("ends are connected through active cells")
}

/// σ(f) computed as −σ(−f) with the ends of the negated quadratic.
pub fn sigma_opposite(land: &SaddleLandscape) -> Result<SelectorResult> {
    let neg = land.opposite();
    let r = sigma_mountain_pass(&neg)?;
    let np = land.shape().1;
    let unmirror = |(iq, ip): (usize, usize)| (iq, np - 1 - ip);
    Ok(SelectorResult {
        value: -r.value,
        witness: match r.witness {
            Witness::Path(p) => Witness::Path(p.into_iter().map(unmirror).collect()),
            w => w,
        },
        method: SelectorMethod::Opposite,
        pass_cell: r.pass_cell.map(unmirror),
    })
}

/// Reference minimax-path value by Bellman relaxation:
/// b(x) = max(f(x), min over neighbours b(y)), seeded with b = f on end A.
/// Independent of the union-find implementation; O(n · passes).
pub fn minimax_path_oracle(land: &SaddleLandscape) -> f64 {
    let (nq, np) = land.shape();
    let vals = land.values();
    let mut b = vec![f64::INFINITY; nq * np];
    for &a in land.end_a() {
        b[a] = vals[a];
    }
    loop {
        let mut changed = false;
        for i in 0..nq * np {
            let (iq, ip) = (i / np, i % np);
            let mut best = b[i];
            for (dq, dp) in NEIGHBOURS {
                let (jq, jp) = (iq as isize + dq, ip as isize + dp);
                if jq < 0 || jp < 0 || jq >= nq as isize || jp >= np as isize {
                    continue;
                }
                let cand = b[jq as usize * np + jp as usize].max(vals[i]);
                if cand < best {
                    best = cand;
                }
            }
            if best < b[i] {
                b[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    land.end_b().iter().map(|&i| b[i]).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn saddle(c: f64, extra: impl Fn(f64, f64) -> f64, n: usize) -> SaddleLandscape {
        SaddleLandscape::uniform((-2.0, 2.0), (-2.0, 2.0), n, n, (0.0, 0.0), |q, p| -q * p + c + extra(q, p)).unwrap()
    }

    #[test]
    fn pure_saddle() {
        let r = sigma_mountain_pass(&saddle(0.0, |_, _| 0.0, 41)).unwrap();
        assert_eq!(r.value, 0.0);
        let r = sigma_mountain_pass(&saddle(1.75, |_, _| 0.0, 41)).unwrap();
        assert_eq!(r.value, 1.75);
    }

    #[test]
    fn witness_max_equals_value() {
        let land = saddle(0.0, |q, _| 0.3 * (2.0 * q).sin(), 60);
        let r = sigma_mountain_pass(&land).unwrap();
        let Witness::Path(path) = &r.witness else { panic!() };
        let m = path.iter().map(|&(i, j)| land.at(i, j)).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(m, r.value);
        let first = path[0].0 * 60 + path[0].1;
        let last = path.last().unwrap().0 * 60 + path.last().unwrap().1;
        assert!(land.end_a().contains(&first) && land.end_b().contains(&last));
        for w in path.windows(2) {
            assert!(w[0].0.abs_diff(w[1].0) <= 1 && w[0].1.abs_diff(w[1].1) <= 1);
        }
    }

    #[test]
    fn matches_dp_oracle() {
        let land = saddle(0.0, |q, _| 0.3 * (2.0 * q).sin(), 60);
        assert_eq!(sigma_mountain_pass(&land).unwrap().value, minimax_path_oracle(&land));
    }

    #[test]
    fn opposite_agrees() {
        for c in [0.0, -0.4] {
            let land = saddle(c, |q, _| 0.3 * (2.0 * q).sin(), 121);
            let a = sigma_mountain_pass(&land).unwrap().value;
            let b = sigma_opposite(&land).unwrap().value;
            assert!((a - b).abs() <= land.cell_gap(), "{a} vs {b}");
        }
        let land = saddle(0.0, |_, _| 0.0, 41);
        assert_eq!(sigma_opposite(&land).unwrap().value, 0.0);
    }

    #[test]
    fn bounded_search_agrees() {
        let land = saddle(0.2, |q, p| 0.3 * (2.0 * q).sin() + 0.2 * (p * q).cos(), 80);
        let full = sigma_mountain_pass(&land).unwrap();
        let fast = sigma_mountain_pass_bounded(&land, Some(land.column_bound())).unwrap();
        assert_eq!(full.value, fast.value);
        // A wrong (too low) ceiling still gives the right answer via the fallback.
        let low = sigma_mountain_pass_bounded(&land, Some(land.min())).unwrap();
        assert_eq!(full.value, low.value);
    }

    #[test]
    fn value_between_min_and_max() {
        let land = saddle(0.0, |q, p| 0.4 * (3.0 * q + p).sin(), 50);
        let v = sigma_mountain_pass(&land).unwrap().value;
        assert!(land.min() <= v && v <= land.max());
    }
}
