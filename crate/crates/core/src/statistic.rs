//! The weighted discrepancy statistic `k·Lₙ` and its scan over `k`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::estimators::spectral_cdf;
use crate::lattice::strict_count;
use crate::quadrature::{cumulative_boxes, node_bin, node_weights, weighted_squared_difference, QuadSpec};
use crate::sample::{check_beta, compute_ranks, BivariateSample, RankData};

/// Values of `l̂₁` and `l̂₂` on the aligned midpoint grid, row-major.
#[derive(Debug, Clone)]
pub struct EstimatorGrid {
    pub nodes: Vec<f64>,
    pub spectral: Vec<f64>,
    pub rank: Vec<f64>,
}

/// Evaluates both estimators at every node of the grid aligned to `k`.
pub fn estimator_grid(ranks: &RankData, k: usize, quad: &QuadSpec) -> Result<EstimatorGrid> {
    let phi = spectral_cdf(ranks, k)?;
    let nodes = quad.nodes(Some(k));
    let m = nodes.len();
    let n = ranks.n();

    let mut spectral = Vec::with_capacity(m * m);
    for &x in &nodes {
        for &y in &nodes {
            spectral.push(phi.stdf_unchecked(x, y));
        }
    }

    // k·l̂₂ = #{p < kx} + #{q < ky} − #{p < kx, q < ky}
    let counts: Vec<usize> = nodes.iter().map(|&x| strict_count(k, n, x)).collect();
    let cutoffs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mut joint = vec![0.0; m * m];
    cumulative_boxes(
        m,
        ranks
            .tail_points()
            .map(|(p, q)| (node_bin(&cutoffs, p as f64), node_bin(&cutoffs, q as f64), 1.0)),
        &mut joint,
    );
    let kf = k as f64;
    let mut rank = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            rank.push(((counts[i] + counts[j]) as f64 - joint[i * m + j]) / kf);
        }
    }
    Ok(EstimatorGrid { nodes, spectral, rank })
}

/// `∬ (a − b)² (x∨y)^(−β)` by the midpoint rule, for node values on `nodes`.
pub fn discrepancy_integral(nodes: &[f64], beta: f64, a: &[f64], b: &[f64]) -> Result<f64> {
    check_beta(beta)?;
    let m = nodes.len();
    if a.len() != m * m || b.len() != m * m {
        return Err(Error::InvalidArgument("node value arrays do not match the grid".into()));
    }
    Ok(weighted_squared_difference(&node_weights(nodes, beta), a, b, m))
}

/// `k·Lₙ = k ∬_{(0,1]²} (l̂₁ − l̂₂)² (x∨y)^(−β) dx dy`.
pub fn test_statistic(ranks: &RankData, k: usize, beta: f64, quad: &QuadSpec) -> Result<f64> {
    check_beta(beta)?;
    let grid = estimator_grid(ranks, k, quad)?;
    Ok(k as f64 * discrepancy_integral(&grid.nodes, beta, &grid.spectral, &grid.rank)?)
}

/// Statistic on the given grid and on its refinement.
pub fn refinement_pair(ranks: &RankData, k: usize, beta: f64, quad: &QuadSpec) -> Result<(f64, f64)> {
    Ok((
        test_statistic(ranks, k, beta, quad)?,
        test_statistic(ranks, k, beta, &quad.refined())?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanEntry {
    pub k: usize,
    pub statistic: f64,
    pub quantile: Option<f64>,
}

/// `k·Lₙ` (and optionally a critical value) as a function of `k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanCurve {
    pub entries: Vec<ScanEntry>,
}

pub const SCAN_CSV_HEADER: &str = "k,kLn,q95";

impl ScanCurve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SCAN_CSV_HEADER}")?;
        for e in &self.entries {
            match e.quantile {
                Some(q) => writeln!(out, "{},{},{}", e.k, e.statistic, q)?,
                None => writeln!(out, "{},{},", e.k, e.statistic)?,
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(source: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            if idx == 0 || line.trim().is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse {
                line: idx + 1,
                msg: msg.to_string(),
            };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(bad("expected 3 columns"));
            }
            let k = cols[0].parse().map_err(|_| bad("bad k"))?;
            let statistic = cols[1].parse().map_err(|_| bad("bad statistic"))?;
            let quantile = match cols[2].trim() {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("bad quantile"))?),
            };
            entries.push(ScanEntry { k, statistic, quantile });
        }
        Ok(Self { entries })
    }
}

/// Supplies a critical value for given ranks and `k`.
pub type QuantileHook<'a> = &'a mut dyn FnMut(&RankData, usize) -> Result<f64>;

/// Computes the statistic for each `k`; ranks are computed once. When a
/// quantile provider is given, it is called with the ranks and each `k`.
pub fn k_scan(
    sample: &BivariateSample,
    k_values: &[usize],
    beta: f64,
    quad: &QuadSpec,
    mut quantile_hook: Option<QuantileHook<'_>>,
) -> Result<ScanCurve> {
    if k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("k values must be strictly increasing".into()));
    }
    let (ranks, _) = compute_ranks(sample);
    let mut entries = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let statistic = test_statistic(&ranks, k, beta, quad)?;
        let quantile = match quantile_hook.as_mut() {
            Some(hook) => Some(hook(&ranks, k)?),
            None => None,
        };
        entries.push(ScanEntry { k, statistic, quantile });
    }
    Ok(ScanCurve { entries })
}
