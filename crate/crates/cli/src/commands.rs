use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::time::Instant;

use evcond::limit::{empirical_quantile, ReplicateStreams, SimulationSettings, WindowRule, DATA_DOMAIN, TABLE_PROBS};
use evcond::{
    cauchy_analytic, compute_ranks, k_scan, limit_quantiles, limit_quantiles_multi, load_sample, sample_alternative,
    sample_cauchy, sample_gumbel, test_statistic, BivariateSample, Error, MeshSpec, QuadSpec, QuantileHook,
    QuantileTable, RankData, Result, ScanCurve, SimulationPlan, TestConfig, TextFormat,
};
use serde::Serialize;

use crate::args::{
    Cli, Command, Format, GenArgs, Mode, Model, QuantilesArgs, RunArgs, ScanArgs, SimArgs, Table1Args, Table2Args,
};
use crate::report::{
    write_quantile_grid, write_type_one, QuantileReport, ScanReport, TestReport, Timing, TypeOneReport, TypeOneRow,
    SCHEMA_VERSION,
};
use crate::svg::render_scan;

/// Process exit status of a successful command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Also used by commands that do not test anything.
    NotRejected,
    Rejected,
}

impl Verdict {
    pub fn code(self) -> u8 {
        match self {
            Verdict::NotRejected => 0,
            Verdict::Rejected => 1,
        }
    }
}

/// Worker count from the flag, capped by the environment.
pub fn effective_workers(flag: Option<usize>, cap: Option<usize>) -> Result<Option<usize>> {
    let w = match (flag, cap) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    if w == Some(0) {
        return Err(Error::Config("worker count must be at least 1".into()));
    }
    Ok(w)
}

pub fn read_sample(path: &Path, skip_header: bool) -> Result<BivariateSample> {
    let file = File::open(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    let format = TextFormat {
        skip_header,
        ..TextFormat::default()
    };
    load_sample(BufReader::new(file), &format)
}

fn settings(
    grid: usize,
    theta_grid: usize,
    mesh_cells: usize,
    window: WindowRule,
    workers: Option<usize>,
) -> Result<SimulationSettings> {
    let mesh = MeshSpec {
        cells_per_unit: mesh_cells,
        ..MeshSpec::default()
    };
    mesh.validate()?;
    Ok(SimulationSettings {
        quad: QuadSpec::new(grid)?,
        theta_cells: theta_grid,
        mesh,
        window,
        workers,
    })
}

fn sim_settings(
    sim: &SimArgs,
    mesh_cells: usize,
    window: WindowRule,
    cap: Option<usize>,
) -> Result<SimulationSettings> {
    settings(
        sim.grid,
        sim.theta_grid,
        mesh_cells,
        window,
        effective_workers(sim.workers, cap)?,
    )
}

fn upper_prob(alpha: f64) -> f64 {
    1.0 - alpha
}

/// Statistic, estimated critical value and verdict for one sample.
pub fn run_test(
    sample: &BivariateSample,
    config: &TestConfig,
    settings: &SimulationSettings,
    timing: bool,
) -> Result<TestReport> {
    config.validate_params()?;
    config.validate(sample.len())?;
    let (ranks, ties) = compute_ranks(sample);
    let start = Instant::now();
    let statistic = test_statistic(&ranks, config.k, config.beta, &settings.quad)?;
    let statistic_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    let quantile = estimated_quantile(&ranks, config, settings)?;
    let simulation_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(TestReport {
        schema_version: SCHEMA_VERSION,
        n: sample.len(),
        k: config.k,
        beta: config.beta,
        alpha: config.alpha,
        statistic,
        quantile,
        reject: statistic >= quantile,
        reps: config.reps,
        seed: config.seed,
        grid: settings.quad.cells,
        theta_grid: settings.theta_cells,
        window: settings.window,
        ties: ties.total(),
        timing: timing.then_some(Timing {
            statistic_ms,
            simulation_ms,
        }),
    })
}

fn estimated_quantile(ranks: &RankData, config: &TestConfig, settings: &SimulationSettings) -> Result<f64> {
    let plan = SimulationPlan::estimated(ranks, config.k, &[config.beta], settings)?;
    let p = upper_prob(config.alpha);
    let table = limit_quantiles(&plan, config.reps, &[p], config.seed)?;
    Ok(table.rows[0].1)
}

/// `50, 100, …, 500`, keeping `k < n/2`.
pub fn default_k_list(n: usize) -> Vec<usize> {
    (1..=10).map(|i| 50 * i).filter(|&k| 2 * k < n).collect()
}

/// Statistic, and unless `statistic_only`, the estimated critical value, for each `k`.
pub fn scan_sample(
    sample: &BivariateSample,
    ks: &[usize],
    config: &TestConfig,
    settings: &SimulationSettings,
    statistic_only: bool,
) -> Result<ScanCurve> {
    config.validate_params()?;
    if ks.is_empty() {
        return Err(Error::Config(format!("no k values below n/2 = {}", sample.len() / 2)));
    }
    let mut hook = |ranks: &RankData, k: usize| estimated_quantile(ranks, &TestConfig { k, ..*config }, settings);
    let hook: Option<QuantileHook<'_>> = if statistic_only { None } else { Some(&mut hook) };
    k_scan(sample, ks, config.beta, &settings.quad, hook)
}

/// Quantile tables under the closed-form Cauchy measure, one per beta, sharing draws.
pub fn analytic_tables(
    betas: &[f64],
    reps: usize,
    probs: &[f64],
    seed: u64,
    settings: &SimulationSettings,
) -> Result<Vec<QuantileTable>> {
    if betas.is_empty() {
        return Err(Error::Config("no beta values".into()));
    }
    let plan = SimulationPlan::analytic(&cauchy_analytic(), betas, settings)?;
    limit_quantiles_multi(&plan, reps, probs, seed)
}

/// The `index`-th synthetic Cauchy sample of a seed, as used by `table2`.
pub fn null_sample(n: usize, seed: u64, index: u64) -> Result<BivariateSample> {
    sample_cauchy(n, &mut ReplicateStreams::new(seed, DATA_DOMAIN).stream(index))
}

/// Behaviour of the statistic over `reps` simulated Cauchy samples; each
/// sample is tested at every `k` against the fixed `critical` value.
pub fn type_one_rows(
    n: usize,
    ks: &[usize],
    beta: f64,
    reps: usize,
    seed: u64,
    quad: &QuadSpec,
    critical: f64,
) -> Result<Vec<TypeOneRow>> {
    if reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    if ks.is_empty() {
        return Err(Error::Config("no k values".into()));
    }
    if !critical.is_finite() {
        return Err(Error::Config(format!("critical value {critical} is not finite")));
    }
    let mut stats = vec![Vec::with_capacity(reps); ks.len()];
    for i in 0..reps {
        let (ranks, _) = compute_ranks(&null_sample(n, seed, i as u64)?);
        for (dst, &k) in stats.iter_mut().zip(ks) {
            dst.push(test_statistic(&ranks, k, beta, quad)?);
        }
    }
    stats
        .into_iter()
        .zip(ks)
        .map(|(mut values, &k)| {
            let rejected = values.iter().filter(|&&v| v >= critical).count();
            values.sort_by(f64::total_cmp);
            Ok(TypeOneRow {
                k,
                alpha_hat: rejected as f64 / reps as f64,
                q50: empirical_quantile(&values, 0.5)?,
                q95: empirical_quantile(&values, 0.95)?,
                critical,
                samples: reps,
            })
        })
        .collect()
}

pub fn generate(model: Model, n: usize, theta: f64, seed: u64) -> Result<BivariateSample> {
    let mut rng = ReplicateStreams::new(seed, DATA_DOMAIN).stream(0);
    match model {
        Model::Cauchy => sample_cauchy(n, &mut rng),
        Model::Gumbel => sample_gumbel(n, theta, &mut rng),
        Model::Alternative => sample_alternative(n, &mut rng),
    }
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::other)?;
    writeln!(out)?;
    Ok(())
}

/// Runs a parsed command line, writing its main output to `out`.
pub fn execute(cli: Cli, thread_cap: Option<usize>, out: &mut dyn Write) -> Result<Verdict> {
    match cli.command {
        Command::Run(a) => cmd_run(a, thread_cap, out),
        Command::Scan(a) => cmd_scan(a, thread_cap, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Table1(a) => cmd_table1(a, thread_cap, out),
        Command::Table2(a) => cmd_table2(a, thread_cap, out),
        Command::Quantiles(a) => cmd_quantiles(a, thread_cap, out),
    }
}

fn test_config(k: usize, beta: f64, alpha: f64, sim: &SimArgs) -> TestConfig {
    TestConfig {
        k,
        beta,
        alpha,
        reps: sim.reps,
        quad_cells: sim.grid,
        theta_cells: sim.theta_grid,
        seed: sim.seed,
    }
}

fn warn_ties(sample: &BivariateSample) {
    let (_, ties) = compute_ranks(sample);
    if ties.total() > 0 {
        eprintln!(
            "warning: {} tied values ({} in x, {} in y) broken by input order",
            ties.total(),
            ties.x,
            ties.y
        );
    }
}

fn cmd_run(a: RunArgs, cap: Option<usize>, out: &mut dyn Write) -> Result<Verdict> {
    let config = test_config(a.k, a.beta, a.alpha, &a.sim);
    config.validate_params()?;
    let settings = sim_settings(&a.sim, MeshSpec::default().cells_per_unit, a.window.into(), cap)?;
    let sample = read_sample(&a.input.sample, a.input.skip_header)?;
    warn_ties(&sample);
    let report = run_test(&sample, &config, &settings, a.timing)?;
    match a.format {
        Format::Json => write_json(&report, out)?,
        Format::Csv => report.write_csv(&mut *out)?,
    }
    Ok(if report.reject {
        Verdict::Rejected
    } else {
        Verdict::NotRejected
    })
}

fn cmd_scan(a: ScanArgs, cap: Option<usize>, out: &mut dyn Write) -> Result<Verdict> {
    let config = test_config(2, a.beta, a.alpha, &a.sim);
    config.validate_params()?;
    let settings = sim_settings(&a.sim, MeshSpec::default().cells_per_unit, a.window.into(), cap)?;
    let sample = read_sample(&a.input.sample, a.input.skip_header)?;
    warn_ties(&sample);
    let ks = a.k_list.unwrap_or_else(|| default_k_list(sample.len()));
    let curve = scan_sample(&sample, &ks, &config, &settings, a.no_quantile)?;
    match a.format {
        Format::Csv => curve.write_csv(&mut *out)?,
        Format::Json => write_json(&ScanReport::new(sample.len(), a.beta, a.alpha, a.sim.seed, &curve), out)?,
    }
    if let Some(path) = &a.svg {
        std::fs::write(path, render_scan(&curve))
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    }
    Ok(Verdict::NotRejected)
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<Verdict> {
    let sample = generate(a.model, a.n, a.theta, a.seed)?;
    let model = match a.model {
        Model::Cauchy => "cauchy",
        Model::Gumbel => "gumbel",
        Model::Alternative => "alternative",
    };
    let mut text = Vec::new();
    writeln!(text, "# model={model} n={} seed={}", a.n, a.seed)?;
    if a.model == Model::Gumbel {
        writeln!(text, "# theta={}", a.theta)?;
    }
    sample.write_text(&mut text)?;
    match &a.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?
        }
        None => out.write_all(&text)?,
    }
    Ok(Verdict::NotRejected)
}

fn write_tables(tables: Vec<QuantileTable>, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => write_quantile_grid(&tables, &mut *out)?,
        Format::Json => write_json(
            &QuantileReport {
                schema_version: SCHEMA_VERSION,
                tables,
            },
            out,
        )?,
    }
    Ok(())
}

fn cmd_table1(a: Table1Args, cap: Option<usize>, out: &mut dyn Write) -> Result<Verdict> {
    let settings = sim_settings(&a.sim, a.mesh_cells, WindowRule::default(), cap)?;
    let tables = analytic_tables(&a.betas, a.sim.reps, &TABLE_PROBS, a.sim.seed, &settings)?;
    write_tables(tables, a.format, out)?;
    Ok(Verdict::NotRejected)
}

fn cmd_table2(a: Table2Args, cap: Option<usize>, out: &mut dyn Write) -> Result<Verdict> {
    if a.reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    let config = TestConfig {
        k: 2,
        beta: a.beta,
        alpha: a.alpha,
        reps: a.limit_reps,
        quad_cells: a.grid,
        theta_cells: a.theta_grid,
        seed: a.seed,
    };
    config.validate_params()?;
    let settings = settings(
        a.grid,
        a.theta_grid,
        a.mesh_cells,
        WindowRule::default(),
        effective_workers(a.workers, cap)?,
    )?;
    let critical = match a.critical {
        Some(c) => c,
        None => analytic_tables(&[a.beta], a.limit_reps, &[upper_prob(a.alpha)], a.seed, &settings)?[0].rows[0].1,
    };
    let rows = type_one_rows(a.n, &a.k_list, a.beta, a.reps, a.seed, &settings.quad, critical)?;
    match a.format {
        Format::Csv => write_type_one(&rows, &mut *out)?,
        Format::Json => write_json(
            &TypeOneReport {
                schema_version: SCHEMA_VERSION,
                n: a.n,
                beta: a.beta,
                seed: a.seed,
                rows,
            },
            out,
        )?,
    }
    Ok(Verdict::NotRejected)
}

fn cmd_quantiles(a: QuantilesArgs, cap: Option<usize>, out: &mut dyn Write) -> Result<Verdict> {
    let settings = sim_settings(&a.sim, a.mesh_cells, a.window.into(), cap)?;
    let probs = a.probs.unwrap_or_else(|| TABLE_PROBS.to_vec());
    let tables = match a.mode {
        Mode::Analytic => analytic_tables(&[a.beta], a.sim.reps, &probs, a.sim.seed, &settings)?,
        Mode::Estimated => {
            let (Some(path), Some(k)) = (&a.sample, a.k) else {
                return Err(Error::Config("estimated mode needs --sample and --k".into()));
            };
            let sample = read_sample(path, a.skip_header)?;
            warn_ties(&sample);
            let (ranks, _) = compute_ranks(&sample);
            let plan = SimulationPlan::estimated(&ranks, k, &[a.beta], &settings)?;
            vec![limit_quantiles(&plan, a.sim.reps, &probs, a.sim.seed)?]
        }
    };
    write_tables(tables, a.format, out)?;
    Ok(Verdict::NotRejected)
}
