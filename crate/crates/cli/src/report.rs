//! Machine-readable reports emitted by the subcommands.

use std::io::{BufRead, Write};

use evcond::limit::WindowRule;
use evcond::{Error, QuantileTable, Result, ScanCurve};
use serde::{Deserialize, Serialize};

/// Bumped whenever a JSON field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// Wall-clock breakdown, only emitted on request so that outputs stay reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub statistic_ms: f64,
    pub simulation_ms: f64,
}

/// Outcome of one test run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub alpha: f64,
    /// `k·Lₙ`.
    pub statistic: f64,
    /// Simulated `Q(1 − alpha)` of the limiting functional.
    pub quantile: f64,
    /// `statistic >= quantile`.
    pub reject: bool,
    pub reps: usize,
    pub seed: u64,
    pub grid: usize,
    pub theta_grid: usize,
    pub window: WindowRule,
    /// Number of tied values over both margins.
    pub ties: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

const REPORT_COLUMNS: &str = "n,k,beta,alpha,statistic,quantile,reject,reps,seed,grid,theta_grid,window,ties";

fn window_name(w: WindowRule) -> &'static str {
    match w {
        WindowRule::Renormalized => "renormalized",
        WindowRule::Clamped => "clamped",
    }
}

impl TestReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{REPORT_COLUMNS}")?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.k,
            self.beta,
            self.alpha,
            self.statistic,
            self.quantile,
            self.reject,
            self.reps,
            self.seed,
            self.grid,
            self.theta_grid,
            window_name(self.window),
            self.ties
        )
    }

    /// Parses the output of [`TestReport::write_csv`]; timing is not part of the CSV form.
    pub fn read_csv<R: BufRead>(source: R) -> Result<Self> {
        let mut lines = source.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim() != REPORT_COLUMNS {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unexpected header {header:?}"),
            });
        }
        let row = lines.next().transpose()?.unwrap_or_default();
        let bad = |msg: &str| Error::Parse {
            line: 2,
            msg: msg.to_string(),
        };
        let c: Vec<&str> = row.trim().split(',').collect();
        if c.len() != 13 {
            return Err(bad("expected 13 columns"));
        }
        fn num<T: std::str::FromStr>(s: &str, name: &str) -> Result<T> {
            s.parse().map_err(|_| Error::Parse {
                line: 2,
                msg: format!("bad {name}: {s:?}"),
            })
        }
        let window = match c[11] {
            "renormalized" => WindowRule::Renormalized,
            "clamped" => WindowRule::Clamped,
            other => return Err(bad(&format!("unknown window {other:?}"))),
        };
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            n: num(c[0], "n")?,
            k: num(c[1], "k")?,
            beta: num(c[2], "beta")?,
            alpha: num(c[3], "alpha")?,
            statistic: num(c[4], "statistic")?,
            quantile: num(c[5], "quantile")?,
            reject: num(c[6], "reject")?,
            reps: num(c[7], "reps")?,
            seed: num(c[8], "seed")?,
            grid: num(c[9], "grid")?,
            theta_grid: num(c[10], "theta_grid")?,
            window,
            ties: num(c[12], "ties")?,
            timing: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntryReport {
    pub k: usize,
    pub statistic: f64,
    pub quantile: Option<f64>,
}

/// JSON form of a k-scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub n: usize,
    pub beta: f64,
    pub alpha: f64,
    pub seed: u64,
    pub entries: Vec<ScanEntryReport>,
}

impl ScanReport {
    pub fn new(n: usize, beta: f64, alpha: f64, seed: u64, curve: &ScanCurve) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n,
            beta,
            alpha,
            seed,
            entries: curve
                .entries
                .iter()
                .map(|e| ScanEntryReport {
                    k: e.k,
                    statistic: e.statistic,
                    quantile: e.quantile,
                })
                .collect(),
        }
    }
}

/// Quantile tables of the limiting functional, one per beta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileReport {
    pub schema_version: u32,
    pub tables: Vec<QuantileTable>,
}

/// Writes one row per table: `beta,q(p₁),q(p₂),…` under a header of probabilities.
pub fn write_quantile_grid<W: Write>(tables: &[QuantileTable], mut out: W) -> std::io::Result<()> {
    let Some(first) = tables.first() else {
        return Ok(());
    };
    write!(out, "beta")?;
    for (p, _) in &first.rows {
        write!(out, ",{p}")?;
    }
    writeln!(out)?;
    for t in tables {
        write!(out, "{}", t.config.beta)?;
        for (_, q) in &t.rows {
            write!(out, ",{q}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Rows of `(beta, quantiles)`.
pub type GridRows = Vec<(f64, Vec<f64>)>;

/// Parses the output of [`write_quantile_grid`] into `(probs, rows)`.
pub fn read_quantile_grid<R: BufRead>(source: R) -> Result<(Vec<f64>, GridRows)> {
    let mut probs = Vec::new();
    let mut rows = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Parse {
            line: idx + 1,
            msg: format!("bad quantile row {line:?}"),
        };
        let mut cols = line.trim().split(',');
        let head = cols.next().ok_or_else(bad)?;
        let values = cols
            .map(|c| c.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        if idx == 0 {
            if head != "beta" {
                return Err(bad());
            }
            probs = values;
        } else {
            if values.len() != probs.len() {
                return Err(bad());
            }
            rows.push((head.parse().map_err(|_| bad())?, values));
        }
    }
    Ok((probs, rows))
}

/// Empirical behaviour of the statistic over simulated null samples, for one `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeOneRow {
    pub k: usize,
    /// Share of samples with `statistic >= critical`.
    pub alpha_hat: f64,
    pub q50: f64,
    pub q95: f64,
    pub critical: f64,
    pub samples: usize,
}

pub const TYPE_ONE_HEADER: &str = "k,alpha_hat,q50,q95,critical,samples";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeOneReport {
    pub schema_version: u32,
    pub n: usize,
    pub beta: f64,
    pub seed: u64,
    pub rows: Vec<TypeOneRow>,
}

pub fn write_type_one<W: Write>(rows: &[TypeOneRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TYPE_ONE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k, r.alpha_hat, r.q50, r.q95, r.critical, r.samples
        )?;
    }
    Ok(())
}

pub fn read_type_one<R: BufRead>(source: R) -> Result<Vec<TypeOneRow>> {
    let mut rows = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Parse {
            line: idx + 1,
            msg: format!("bad row {line:?}"),
        };
        let c: Vec<&str> = line.trim().split(',').collect();
        if c.len() != 6 {
            return Err(bad());
        }
        let f = |i: usize| c[i].parse::<f64>().map_err(|_| bad());
        rows.push(TypeOneRow {
            k: c[0].parse().map_err(|_| bad())?,
            alpha_hat: f(1)?,
            q50: f(2)?,
            q95: f(3)?,
            critical: f(4)?,
            samples: c[5].parse().map_err(|_| bad())?,
        });
    }
    Ok(rows)
}
