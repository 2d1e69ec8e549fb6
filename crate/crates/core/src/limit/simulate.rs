use std::f64::consts::FRAC_PI_2;
use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    discretize_analytic, AnalyticParameters, ControlMeasure, GaussianFieldDraw, MeshSpec, ReplicateStreams,
    SmoothedFunctionals, TailParameters, ThetaCache, ThetaGrid, WindowRule, ZTerm, SIMULATION_DOMAIN,
};
use crate::error::{invalid, Error, Result};
use crate::estimators::exponent_measure;
use crate::lattice::ceil_scaled;
use crate::models::AnalyticMeasure;
use crate::quadrature::{node_bin, node_weights, weighted_square_sum, QuadSpec};
use crate::sample::{check_beta, RankData, TestConfig};

/// Probabilities reported by the quantile tables.
pub const TABLE_PROBS: [f64; 8] = [0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.975, 0.99];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationMode {
    /// Parameters estimated from data through the empirical exponent measure.
    Estimated,
    /// A closed-form measure on a cell mesh.
    Analytic,
}

/// Numerical settings shared by all replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSettings {
    pub quad: QuadSpec,
    pub theta_cells: usize,
    pub mesh: MeshSpec,
    /// Boundary rule of the estimated-mode windows.
    pub window: WindowRule,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            quad: QuadSpec::default(),
            theta_cells: TestConfig::DEFAULT_THETA_CELLS,
            mesh: MeshSpec::default(),
            window: WindowRule::default(),
            workers: None,
        }
    }
}

/// Everything about a replicate that does not depend on the draw.
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    mode: SimulationMode,
    k: Option<usize>,
    measure: ControlMeasure,
    settings: SimulationSettings,
    nodes: Vec<f64>,
    betas: Vec<f64>,
    weights: Vec<Vec<f64>>,
    r1: Vec<f64>,
    r2: Vec<f64>,
    marg1_idx: Vec<usize>,
    marg2_idx: Vec<usize>,
    // (atom, first node row, first node column) for atoms inside the unit box
    box_entries: Vec<(u32, u32, u32)>,
    grid: ThetaGrid,
    z_terms: Vec<ZTerm>,
    z_end: ZTerm,
    geometry: Vec<(u32, f64)>,
}

/// Per-worker buffers reused across replicates.
struct Scratch<'a> {
    draw: GaussianFieldDraw<'a>,
    cache: ThetaCache,
    boxes: Vec<f64>,
    values: Vec<f64>,
}

impl SimulationPlan {
    /// Plan with the empirical exponent measure and window estimates of `R₁`, `R₂`, `λ`.
    pub fn estimated(ranks: &RankData, k: usize, betas: &[f64], settings: &SimulationSettings) -> Result<Self> {
        let atoms = exponent_measure(ranks, k)?;
        let measure = ControlMeasure::from_exponent_measure(&atoms);
        let params = SmoothedFunctionals::new(&atoms, settings.window);
        Self::from_parts(measure, &params, SimulationMode::Estimated, Some(k), betas, settings)
    }

    /// Plan with a discretised closed-form measure.
    pub fn analytic(analytic: &dyn AnalyticMeasure, betas: &[f64], settings: &SimulationSettings) -> Result<Self> {
        let measure = discretize_analytic(analytic, &settings.mesh)?;
        let params = AnalyticParameters(analytic);
        Self::from_parts(measure, &params, SimulationMode::Analytic, None, betas, settings)
    }

    pub fn from_parts(
        measure: ControlMeasure,
        params: &dyn TailParameters,
        mode: SimulationMode,
        k: Option<usize>,
        betas: &[f64],
        settings: &SimulationSettings,
    ) -> Result<Self> {
        if betas.is_empty() {
            return Err(invalid("at least one beta is required"));
        }
        for &b in betas {
            check_beta(b)?;
        }
        let quad = QuadSpec::new(settings.quad.cells)?;
        let grid = ThetaGrid::new(settings.theta_cells)?;
        if settings.workers == Some(0) {
            return Err(Error::Config("worker count must be positive".into()));
        }
        let nodes = quad.nodes(k);
        let m = nodes.len();
        let weights = betas.iter().map(|&b| node_weights(&nodes, b)).collect();

        let mut r1 = Vec::with_capacity(m * m);
        let mut r2 = Vec::with_capacity(m * m);
        let mut geometry = Vec::with_capacity(m * m);
        for &x in &nodes {
            for &y in &nodes {
                let (a, b) = params.partials(x, y);
                r1.push(a);
                r2.push(b);
                let (cell, partial) = grid.geometry(x, y);
                geometry.push((cell as u32, partial));
            }
        }
        let marg1_idx = nodes.iter().map(|&x| measure.count_u(x)).collect();
        let marg2_idx = nodes.iter().map(|&y| measure.count_v(y)).collect();
        let cutoffs: Vec<f64> = nodes.iter().map(|&x| measure.cutoff(x)).collect();
        let box_entries = (0..measure.len())
            .filter_map(|i| {
                let (ku, kv) = measure.key(i);
                let (bx, by) = (node_bin(&cutoffs, ku), node_bin(&cutoffs, kv));
                (bx < m && by < m).then_some((i as u32, bx as u32, by as u32))
            })
            .collect();
        let z_terms = grid
            .midpoints()
            .iter()
            .map(|&t| ZTerm::new(params, t))
            .collect::<Result<Vec<_>>>()?;
        let z_end = ZTerm::new(params, FRAC_PI_2)?;
        Ok(Self {
            mode,
            k,
            measure,
            settings: SimulationSettings { quad, ..*settings },
            nodes,
            betas: betas.to_vec(),
            weights,
            r1,
            r2,
            marg1_idx,
            marg2_idx,
            box_entries,
            grid,
            z_terms,
            z_end,
            geometry,
        })
    }

    pub fn mode(&self) -> SimulationMode {
        self.mode
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn measure(&self) -> &ControlMeasure {
        &self.measure
    }

    pub fn settings(&self) -> &SimulationSettings {
        &self.settings
    }

    /// Quadrature cells per axis after alignment.
    pub fn grid_cells(&self) -> usize {
        self.nodes.len()
    }

    fn scratch(&self) -> Scratch<'_> {
        let n = self.measure.len();
        let m = self.nodes.len();
        Scratch {
            draw: GaussianFieldDraw::from_normals(&self.measure, vec![0.0; n]).expect("plan measure is non-empty"),
            cache: ThetaCache::default(),
            boxes: vec![0.0; m * m],
            values: vec![0.0; m * m],
        }
    }

    /// Fills `scratch.values` with `A + B` on the node grid for the current draw.
    fn fill_values(&self, s: &mut Scratch<'_>) {
        let m = self.nodes.len();
        s.cache.refill(&s.draw, &self.grid, &self.z_terms, &self.z_end);
        let weighted = s.draw.weighted();
        crate::quadrature::cumulative_boxes(
            m,
            self.box_entries
                .iter()
                .map(|&(a, bx, by)| (bx as usize, by as usize, weighted[a as usize])),
            &mut s.boxes,
        );
        let half = self.grid.cells() / 2;
        let marg1: Vec<f64> = self.marg1_idx.iter().map(|&c| s.draw.cum_u_at(c)).collect();
        let marg2: Vec<f64> = self.marg2_idx.iter().map(|&c| s.draw.cum_v_at(c)).collect();
        for (i, &x) in self.nodes.iter().enumerate() {
            for (j, &y) in self.nodes.iter().enumerate() {
                let idx = i * m + j;
                let (cell, partial) = self.geometry[idx];
                let a = s.cache.a_at(half, x, y, cell as usize, partial);
                let b = s.boxes[idx] - self.r1[idx] * marg1[i] - self.r2[idx] * marg2[j];
                s.values[idx] = a + b;
            }
        }
    }

    fn integrals(&self, s: &Scratch<'_>) -> Vec<f64> {
        let m = self.nodes.len();
        self.weights
            .iter()
            .map(|w| weighted_square_sum(w, &s.values, m))
            .collect()
    }

    /// Replicate values for given normals (one per atom, in measure order).
    pub fn replicate_from_normals(&self, xi: Vec<f64>) -> Result<Vec<f64>> {
        let mut s = self.scratch();
        s.draw = GaussianFieldDraw::from_normals(&self.measure, xi)?;
        self.fill_values(&mut s);
        Ok(self.integrals(&s))
    }

    /// `A + B` on the node grid for given normals, row-major with `x` outer.
    pub fn process_grid(&self, xi: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut s = self.scratch();
        s.draw = GaussianFieldDraw::from_normals(&self.measure, xi)?;
        self.fill_values(&mut s);
        Ok((self.nodes.clone(), s.values))
    }

    fn replicate_with<R: Rng + ?Sized>(&self, rng: &mut R, s: &mut Scratch<'_>) -> Vec<f64> {
        s.draw.redraw(rng);
        self.fill_values(s);
        self.integrals(s)
    }

    /// `reps` replicate values per beta (outer index beta), in replicate order.
    pub fn simulate(&self, reps: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let streams = ReplicateStreams::new(seed, SIMULATION_DOMAIN);
        let run = || -> Vec<Vec<f64>> {
            (0..reps as u64)
                .into_par_iter()
                .map_init(
                    || self.scratch(),
                    |s, i| {
                        let mut rng = streams.stream(i);
                        self.replicate_with(&mut rng, s)
                    },
                )
                .collect()
        };
        let per_rep = match self.settings.workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
                .install(run),
            None => run(),
        };
        let mut per_beta = vec![Vec::with_capacity(reps); self.betas.len()];
        for values in per_rep {
            for (dst, v) in per_beta.iter_mut().zip(values) {
                dst.push(v);
            }
        }
        Ok(per_beta)
    }

    fn config(&self, beta: f64, reps: usize, seed: u64) -> QuantileConfig {
        QuantileConfig {
            mode: self.mode,
            k: self.k,
            beta,
            reps,
            quad_cells: self.nodes.len(),
            theta_cells: self.grid.cells(),
            seed,
            mesh: (self.mode == SimulationMode::Analytic).then_some(self.settings.mesh),
            window: (self.mode == SimulationMode::Estimated).then_some(self.settings.window),
        }
    }
}

/// One replicate of `∬ (A + B)² (x∨y)^(−β)`, one value per plan beta.
pub fn limit_replicate<R: Rng + ?Sized>(plan: &SimulationPlan, rng: &mut R) -> Vec<f64> {
    let mut s = plan.scratch();
    plan.replicate_with(rng, &mut s)
}

/// Order statistic at rank `⌈B·p⌉` of sorted values.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(invalid("no values"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("probability {p} not in (0, 1)")));
    }
    let rank = ceil_scaled(sorted.len(), p).clamp(1, sorted.len() as i64) as usize;
    Ok(sorted[rank - 1])
}

fn check_request(reps: usize, probs: &[f64]) -> Result<()> {
    if reps < TestConfig::MIN_REPS {
        return Err(Error::Config(format!(
            "reps = {reps} below the minimum of {}",
            TestConfig::MIN_REPS
        )));
    }
    if probs.is_empty() || probs.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::Config("probabilities must lie in (0, 1)".into()));
    }
    if probs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("probabilities must be strictly increasing".into()));
    }
    Ok(())
}

/// Quantile tables for every beta of the plan; replicates share their draws.
pub fn limit_quantiles_multi(
    plan: &SimulationPlan,
    reps: usize,
    probs: &[f64],
    seed: u64,
) -> Result<Vec<QuantileTable>> {
    check_request(reps, probs)?;
    let per_beta = plan.simulate(reps, seed)?;
    per_beta
        .into_iter()
        .zip(plan.betas())
        .map(|(mut values, &beta)| {
            if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite replicate {bad}")));
            }
            values.sort_by(f64::total_cmp);
            let rows = probs
                .iter()
                .map(|&p| Ok((p, empirical_quantile(&values, p)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(QuantileTable {
                rows,
                config: plan.config(beta, reps, seed),
            })
        })
        .collect()
}

/// Quantile table for a single-beta plan.
pub fn limit_quantiles(plan: &SimulationPlan, reps: usize, probs: &[f64], seed: u64) -> Result<QuantileTable> {
    if plan.betas().len() != 1 {
        return Err(invalid("limit_quantiles needs a plan with exactly one beta"));
    }
    Ok(limit_quantiles_multi(plan, reps, probs, seed)?.remove(0))
}

/// Parameters echoed with a quantile table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileConfig {
    pub mode: SimulationMode,
    pub k: Option<usize>,
    pub beta: f64,
    pub reps: usize,
    pub quad_cells: usize,
    pub theta_cells: usize,
    pub seed: u64,
    pub mesh: Option<MeshSpec>,
    pub window: Option<WindowRule>,
}

/// Monte-Carlo quantiles of the limiting functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub rows: Vec<(f64, f64)>,
    pub config: QuantileConfig,
}

impl QuantileTable {
    pub fn quantile(&self, p: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.0 == p).map(|r| r.1)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "p,q")?;
        for (p, q) in &self.rows {
            writeln!(out, "{p},{q}")?;
        }
        Ok(())
    }

    /// Reads the `p,q` rows written by [`QuantileTable::write_csv`].
    pub fn read_csv_rows<R: BufRead>(source: R) -> Result<Vec<(f64, f64)>> {
        let mut rows = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            if idx == 0 || line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Parse {
                line: idx + 1,
                msg: format!("expected `p,q`, got {line:?}"),
            };
            let (p, q) = line.split_once(',').ok_or_else(bad)?;
            rows.push((
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ));
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::cauchy_analytic;

    fn small_settings() -> SimulationSettings {
        SimulationSettings {
            quad: QuadSpec::new(20).unwrap(),
            theta_cells: 20,
            mesh: MeshSpec {
                cells_per_unit: 50,
                far_extent: 20.0,
                growth: 1.3,
                ..MeshSpec::default()
            },
            window: WindowRule::default(),
            workers: None,
        }
    }

    #[test]
    fn quantile_is_order_statistic() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.95).unwrap(), 95.0);
        assert_eq!(empirical_quantile(&v, 0.951).unwrap(), 96.0);
        assert_eq!(empirical_quantile(&v, 0.001).unwrap(), 1.0);
        assert!(empirical_quantile(&v, 1.0).is_err());
        assert!(empirical_quantile(&[], 0.5).is_err());
    }

    #[test]
    fn zero_draw_gives_zero() {
        let plan = SimulationPlan::analytic(&cauchy_analytic(), &[0.0, 2.0], &small_settings()).unwrap();
        let v = plan.replicate_from_normals(vec![0.0; plan.measure().len()]).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn scaling_draw_scales_value_quadratically() {
        let plan = SimulationPlan::analytic(&cauchy_analytic(), &[1.0], &small_settings()).unwrap();
        let n = plan.measure().len();
        let xi: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let a = plan.replicate_from_normals(xi.clone()).unwrap()[0];
        let b = plan
            .replicate_from_normals(xi.iter().map(|x| 2.0 * x).collect())
            .unwrap()[0];
        assert!((b - 4.0 * a).abs() <= 1e-12 * b);
    }

    #[test]
    fn quantiles_are_reproducible_and_monotone() {
        let plan = SimulationPlan::analytic(&cauchy_analytic(), &[2.0], &small_settings()).unwrap();
        let a = limit_quantiles(&plan, 100, &TABLE_PROBS, 3).unwrap();
        let b = limit_quantiles(&plan, 100, &TABLE_PROBS, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.rows.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(limit_quantiles(&plan, 99, &TABLE_PROBS, 3).is_err());
        assert!(limit_quantiles(&plan, 100, &[0.5, 1.0], 3).is_err());
    }

    #[test]
    fn csv_rows_round_trip() {
        let plan = SimulationPlan::analytic(&cauchy_analytic(), &[2.0], &small_settings()).unwrap();
        let t = limit_quantiles(&plan, 100, &[0.5, 0.95], 1).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(QuantileTable::read_csv_rows(&buf[..]).unwrap(), t.rows);
    }
}
