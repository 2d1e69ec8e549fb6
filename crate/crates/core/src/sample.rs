//! Bivariate samples, marginal ranks and run configuration.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Minimum number of rows accepted by [`load_sample`] and the estimators.
pub const MIN_ROWS: usize = 4;

/// Observed pairs `(x, y)` in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSample {
    pairs: Vec<(f64, f64)>,
}

impl BivariateSample {
    /// Builds a sample, rejecting non-finite coordinates.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(i) = pairs.iter().position(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::NonFinite { line: i + 1 });
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Writes one `x y` line per pair with 17 significant digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (x, y) in &self.pairs {
            writeln!(out, "{x:.16e} {y:.16e}")?;
        }
        Ok(())
    }
}

/// Column separator accepted by [`load_sample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    /// Comma if the line contains one, whitespace otherwise.
    #[default]
    Auto,
    Whitespace,
    Comma,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TextFormat {
    pub delimiter: Delimiter,
    /// Skip the first non-comment, non-blank line.
    pub skip_header: bool,
}

/// Parses two-column text. `#` starts a comment; blank lines are ignored.
pub fn load_sample<R: BufRead>(source: R, format: &TextFormat) -> Result<BivariateSample> {
    let mut pairs = Vec::new();
    let mut header_pending = format.skip_header;
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let body = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let fields: Vec<&str> = match format.delimiter {
            Delimiter::Comma => body.split(',').map(str::trim).collect(),
            Delimiter::Whitespace => body.split_whitespace().collect(),
            Delimiter::Auto if body.contains(',') => body.split(',').map(str::trim).collect(),
            Delimiter::Auto => body.split_whitespace().collect(),
        };
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("{s:?}: {e}"),
            })
        };
        let (x, y) = (parse(fields[0])?, parse(fields[1])?);
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite { line: line_no });
        }
        pairs.push((x, y));
    }
    if pairs.len() < MIN_ROWS {
        return Err(Error::TooFewRows(pairs.len()));
    }
    Ok(BivariateSample { pairs })
}

/// Marginal ranks; `rx` and `ry` are permutations of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankData {
    rx: Vec<u32>,
    ry: Vec<u32>,
}

impl RankData {
    /// Builds rank data from explicit permutations (1-based).
    pub fn from_ranks(rx: Vec<u32>, ry: Vec<u32>) -> Result<Self> {
        if rx.len() != ry.len() {
            return Err(invalid("rank vectors differ in length"));
        }
        for r in [&rx, &ry] {
            let mut seen = vec![false; r.len()];
            for &v in r.iter() {
                let i = (v as usize).wrapping_sub(1);
                if i >= r.len() || std::mem::replace(&mut seen[i], true) {
                    return Err(invalid("ranks are not a permutation of 1..=n"));
                }
            }
        }
        Ok(Self { rx, ry })
    }

    pub fn n(&self) -> usize {
        self.rx.len()
    }

    pub fn rx(&self) -> &[u32] {
        &self.rx
    }

    pub fn ry(&self) -> &[u32] {
        &self.ry
    }

    /// Checks `2 <= k < n`.
    pub fn check_k(&self, k: usize) -> Result<()> {
        if k < 2 || k >= self.n() {
            return Err(Error::KOutOfRange { k, n: self.n() });
        }
        Ok(())
    }

    /// Lattice coordinates `(n+1−Rˣ, n+1−Rʸ)` per observation.
    pub fn tail_points(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let top = self.n() as u32 + 1;
        self.rx.iter().zip(&self.ry).map(move |(&a, &b)| (top - a, top - b))
    }
}

/// Number of tied neighbours met while ranking each margin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieCounts {
    pub x: usize,
    pub y: usize,
}

impl TieCounts {
    pub fn total(&self) -> usize {
        self.x + self.y
    }
}

fn rank_margin(values: impl Iterator<Item = f64>) -> (Vec<u32>, usize) {
    let values: Vec<f64> = values.collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable: ties keep input order
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u32; values.len()];
    let mut ties = 0;
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos as u32 + 1;
        if pos > 0 && values[order[pos - 1]] == values[i] {
            ties += 1;
        }
    }
    (ranks, ties)
}

/// Ranks each margin; ties are broken by original index.
pub fn compute_ranks(sample: &BivariateSample) -> (RankData, TieCounts) {
    let (rx, tx) = rank_margin(sample.pairs.iter().map(|p| p.0));
    let (ry, ty) = rank_margin(sample.pairs.iter().map(|p| p.1));
    (RankData { rx, ry }, TieCounts { x: tx, y: ty })
}

/// Validated run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub k: usize,
    pub beta: f64,
    pub alpha: f64,
    pub reps: usize,
    pub quad_cells: usize,
    pub theta_cells: usize,
    pub seed: u64,
}

impl TestConfig {
    pub const DEFAULT_BETA: f64 = 2.0;
    pub const DEFAULT_ALPHA: f64 = 0.05;
    pub const DEFAULT_REPS: usize = 10_000;
    pub const DEFAULT_QUAD_CELLS: usize = 200;
    pub const DEFAULT_THETA_CELLS: usize = 200;
    pub const MIN_REPS: usize = 100;

    pub fn new(k: usize) -> Self {
        Self {
            k,
            beta: Self::DEFAULT_BETA,
            alpha: Self::DEFAULT_ALPHA,
            reps: Self::DEFAULT_REPS,
            quad_cells: Self::DEFAULT_QUAD_CELLS,
            theta_cells: Self::DEFAULT_THETA_CELLS,
            seed: 0,
        }
    }

    /// Checks every field except `k`.
    pub fn validate_params(&self) -> Result<()> {
        check_beta(self.beta)?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha = {} not in (0, 1)", self.alpha)));
        }
        if self.reps < Self::MIN_REPS {
            return Err(Error::Config(format!(
                "reps = {} below the minimum of {}",
                self.reps,
                Self::MIN_REPS
            )));
        }
        if self.quad_cells < crate::quadrature::MIN_CELLS {
            return Err(Error::Config(format!(
                "quadrature grid {} below the minimum of {}",
                self.quad_cells,
                crate::quadrature::MIN_CELLS
            )));
        }
        crate::limit::ThetaGrid::new(self.theta_cells)?;
        Ok(())
    }

    /// Full validation against a sample size.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 || self.k >= n {
            return Err(Error::KOutOfRange { k: self.k, n });
        }
        self.validate_params()
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..3.0).contains(&beta) {
        return Err(Error::Config(format!("beta = {beta} not in [0, 3)")));
    }
    Ok(())
}
