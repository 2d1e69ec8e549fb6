//! Composite midpoint rule on `(0, 1]²` and cumulative box sums over its nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_CELLS: usize = 20;
pub const REFINEMENT_FACTOR: usize = 2;

/// Midpoint grid with `cells` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub cells: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { cells: 200 }
    }
}

impl QuadSpec {
    pub fn new(cells: usize) -> Result<Self> {
        if cells < MIN_CELLS {
            return Err(Error::Config(format!(
                "quadrature grid {cells} below the minimum of {MIN_CELLS}"
            )));
        }
        Ok(Self { cells })
    }

    pub fn refined(&self) -> Self {
        Self {
            cells: self.cells * REFINEMENT_FACTOR,
        }
    }

    /// Cell count actually used: the smallest multiple of `k` that is at least
    /// `cells`, so that no cell straddles a `1/k` lattice line. For `k > cells`
    /// this is `k` itself.
    pub fn aligned_cells(&self, k: Option<usize>) -> usize {
        match k {
            Some(k) if k > 0 => self.cells.div_ceil(k) * k,
            _ => self.cells,
        }
    }

    /// Node coordinates `(i − ½)/m`, `i = 1..=m`.
    pub fn nodes(&self, k: Option<usize>) -> Vec<f64> {
        let m = self.aligned_cells(k);
        (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect()
    }
}

/// Weights `(x∨y)^(−β) / m²` in row-major order (`x = nodes[i]`, `y = nodes[j]`).
pub fn node_weights(nodes: &[f64], beta: f64) -> Vec<f64> {
    let m = nodes.len();
    let area = 1.0 / (m * m) as f64;
    let mut w = Vec::with_capacity(m * m);
    for &x in nodes {
        for &y in nodes {
            w.push((-beta * x.max(y).ln()).exp() * area);
        }
    }
    w
}

/// Σ (a − b)²·w over the node grid, accumulated row by row in fixed order.
pub fn weighted_squared_difference(weights: &[f64], a: &[f64], b: &[f64], m: usize) -> f64 {
    debug_assert!(weights.len() == m * m && a.len() == m * m && b.len() == m * m);
    let mut total = 0.0;
    for i in 0..m {
        let row = i * m..(i + 1) * m;
        let mut acc = 0.0;
        for ((w, x), y) in weights[row.clone()].iter().zip(&a[row.clone()]).zip(&b[row]) {
            let d = x - y;
            acc += d * d * w;
        }
        total += acc;
    }
    total
}

/// Σ a²·w over the node grid, in the same order as [`weighted_squared_difference`].
pub fn weighted_square_sum(weights: &[f64], a: &[f64], m: usize) -> f64 {
    debug_assert!(weights.len() == m * m && a.len() == m * m);
    let mut total = 0.0;
    for i in 0..m {
        let row = i * m..(i + 1) * m;
        let mut acc = 0.0;
        for (w, x) in weights[row.clone()].iter().zip(&a[row]) {
            acc += x * x * w;
        }
        total += acc;
    }
    total
}

/// First node index at which an atom with lattice key `key` is counted,
/// given nondecreasing per-node cutoffs (counted iff `key <= cutoff`).
pub fn node_bin(cutoffs: &[f64], key: f64) -> usize {
    cutoffs.partition_point(|&c| c < key)
}

/// Fills `out[i*m + j]` with the sum of entries whose bins satisfy
/// `bx <= i` and `by <= j`. Entries with a bin `>= m` are dropped.
pub fn cumulative_boxes(m: usize, entries: impl Iterator<Item = (usize, usize, f64)>, out: &mut [f64]) {
    debug_assert_eq!(out.len(), m * m);
    out.fill(0.0);
    for (bx, by, w) in entries {
        if bx < m && by < m {
            out[bx * m + by] += w;
        }
    }
    for i in 0..m {
        let mut run = 0.0;
        for j in 0..m {
            run += out[i * m + j];
            out[i * m + j] = run;
        }
        if i > 0 {
            let (prev, cur) = out.split_at_mut(i * m);
            for (c, p) in cur[..m].iter_mut().zip(&prev[(i - 1) * m..]) {
                *c += *p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alignment_rounds_up_to_multiple_of_k() {
        let q = QuadSpec::new(200).unwrap();
        assert_eq!(q.aligned_cells(Some(100)), 200);
        assert_eq!(q.aligned_cells(Some(150)), 300);
        assert_eq!(q.aligned_cells(Some(500)), 500);
        assert_eq!(q.aligned_cells(None), 200);
        assert!(QuadSpec::new(10).is_err());
    }

    #[test]
    fn nodes_avoid_the_axes() {
        let nodes = QuadSpec::new(20).unwrap().nodes(None);
        assert_eq!(nodes[0], 0.025);
        assert!(nodes.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn unit_weights_integrate_to_one() {
        let nodes = QuadSpec::new(40).unwrap().nodes(None);
        let w = node_weights(&nodes, 0.0);
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cumulative_boxes_match_brute_force() {
        let m = 5;
        let entries = [(0, 0, 1.0), (2, 1, 2.0), (4, 4, 3.0), (1, 3, 4.0), (7, 0, 100.0)];
        let mut out = vec![0.0; m * m];
        cumulative_boxes(m, entries.iter().copied(), &mut out);
        for i in 0..m {
            for j in 0..m {
                let brute: f64 = entries.iter().filter(|e| e.0 <= i && e.1 <= j).map(|e| e.2).sum();
                assert_eq!(out[i * m + j], brute, "({i}, {j})");
            }
        }
    }
}
