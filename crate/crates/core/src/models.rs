//! Reference distributions: samplers and the closed-form Cauchy tail measure.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, StandardNormal};

use crate::error::{invalid, Result};
use crate::sample::BivariateSample;

/// A tail measure `Λ` with a density, given through closed forms.
pub trait AnalyticMeasure: Send + Sync {
    /// `R(x, y) = Λ([0, x] × [0, y])`; either argument may be `+∞`.
    fn tail_copula(&self, x: f64, y: f64) -> f64;

    /// `λ(x, y)`; undefined at the origin.
    fn density(&self, x: f64, y: f64) -> Result<f64>;

    /// `l(x, y) = x + y − R(x, y)`.
    fn stdf(&self, x: f64, y: f64) -> f64 {
        x + y - self.tail_copula(x, y)
    }

    /// `∂R/∂x` and `∂R/∂y`.
    fn partials(&self, x: f64, y: f64) -> (f64, f64);

    /// `∫_c^∞ λ(x, 1) dx`.
    fn tail_integral_x(&self, c: f64) -> f64;

    /// `∫_c^∞ λ(1, y) dy`.
    fn tail_integral_y(&self, c: f64) -> f64;
}

/// Tail measure of the bivariate Cauchy law on the first quadrant:
/// `R(x, y) = x + y − √(x² + y²)`, `λ(x, y) = xy / (x² + y²)^{3/2}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CauchyMeasure;

pub fn cauchy_analytic() -> CauchyMeasure {
    CauchyMeasure
}

impl AnalyticMeasure for CauchyMeasure {
    fn tail_copula(&self, x: f64, y: f64) -> f64 {
        match (x.is_infinite(), y.is_infinite()) {
            (true, true) => f64::INFINITY,
            (true, false) => y,
            (false, true) => x,
            // 2xy / (x + y + r) avoids cancellation when one argument dominates
            _ if x == 0.0 || y == 0.0 => 0.0,
            _ => 2.0 * x * y / (x + y + x.hypot(y)),
        }
    }

    fn density(&self, x: f64, y: f64) -> Result<f64> {
        if x == 0.0 && y == 0.0 {
            return Err(invalid("density is undefined at the origin"));
        }
        let r = x.hypot(y);
        Ok(x * y / (r * r * r))
    }

    fn stdf(&self, x: f64, y: f64) -> f64 {
        x.hypot(y)
    }

    fn partials(&self, x: f64, y: f64) -> (f64, f64) {
        let r = x.hypot(y);
        (1.0 - x / r, 1.0 - y / r)
    }

    fn tail_integral_x(&self, c: f64) -> f64 {
        if c.is_infinite() {
            return 0.0;
        }
        1.0 / c.mul_add(c, 1.0).sqrt()
    }

    fn tail_integral_y(&self, c: f64) -> f64 {
        self.tail_integral_x(c)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 1 {
        return Err(invalid("sample size must be at least 1"));
    }
    Ok(())
}

/// Bivariate Cauchy folded onto the first quadrant: `(|N₁/N₃|, |N₂/N₃|)`.
pub fn sample_cauchy<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<BivariateSample> {
    check_n(n)?;
    let mut pairs = Vec::with_capacity(n);
    while pairs.len() < n {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        let c: f64 = StandardNormal.sample(rng);
        let (x, y) = ((a / c).abs(), (b / c).abs());
        if x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0 {
            pairs.push((x, y));
        }
    }
    BivariateSample::new(pairs)
}

/// Positive stable variate with Laplace transform `exp(−t^α)`, `0 < α <= 1`
/// (Kanter's representation of the Chambers–Mallows–Stuck construction).
pub fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let open: f64 = Open01.sample(rng);
    let u = PI * open;
    let e: f64 = Exp1.sample(rng);
    let head = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let tail = (((1.0 - alpha) * u).sin() / e).powf((1.0 - alpha) / alpha);
    head * tail
}

/// Pairs `(U, 1 − V)` where `(U, V)` follows the Gumbel copula
/// `exp(−[(−log u)^θ + (−log v)^θ]^{1/θ})`.
pub fn sample_gumbel<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> Result<BivariateSample> {
    check_n(n)?;
    if !(theta >= 1.0) || !theta.is_finite() {
        return Err(invalid(format!("Gumbel parameter must be >= 1, got {theta}")));
    }
    let alpha = 1.0 / theta;
    let mut pairs = Vec::with_capacity(n);
    while pairs.len() < n {
        let s = positive_stable(alpha, rng);
        let e1: f64 = Exp1.sample(rng);
        let e2: f64 = Exp1.sample(rng);
        let u = (-(e1 / s).powf(alpha)).exp();
        let v = (-(e2 / s).powf(alpha)).exp();
        let w = 1.0 - v;
        if u > 0.0 && u < 1.0 && w > 0.0 && w < 1.0 {
            pairs.push((u, w));
        }
    }
    BivariateSample::new(pairs)
}

/// Largest block index drawn by the alternative sampler.
pub const ALTERNATIVE_MAX_INDEX: u32 = 52;

/// Geometric index with `P(j) = ¾·4^{−j}`, truncated at [`ALTERNATIVE_MAX_INDEX`].
fn block_index<R: Rng + ?Sized>(rng: &mut R) -> u32 {
    let mut j = 0;
    while j < ALTERNATIVE_MAX_INDEX && rng.random::<f64>() < 0.25 {
        j += 1;
    }
    j
}

/// One draw of the self-similar copula that violates the extreme-value
/// condition near `(0, 0)`: density 3/2 on the blocks
/// `[2^{−(2m+1)}, 2^{−2m}] × [2^{−(2r+1)}, 2^{−2r}]` (mass 2/3) and uniform mass
/// `2^{−(2m+2)}` on the diagonal segments from `2^{−(2m+2)}` to `2^{−(2m+1)}`.
pub fn alternative_point<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let pow2 = |e: u32| 0.5f64.powi(e as i32);
    if rng.random::<f64>() < 2.0 / 3.0 {
        let m = block_index(rng);
        let r = block_index(rng);
        let x = uniform_between(rng, pow2(2 * m + 1), pow2(2 * m));
        let y = uniform_between(rng, pow2(2 * r + 1), pow2(2 * r));
        (x, y)
    } else {
        let m = block_index(rng);
        let s = uniform_between(rng, pow2(2 * m + 2), pow2(2 * m + 1));
        (s, s)
    }
}

fn uniform_between<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let t: f64 = Open01.sample(rng);
    lo + t * (hi - lo)
}

/// Sample from the alternative copula, reflected as `(1 − X, 1 − Y)` so that
/// its non-extreme-value structure sits in the upper tail examined by the test.
pub fn sample_alternative<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<BivariateSample> {
    check_n(n)?;
    let pairs = (0..n)
        .map(|_| {
            let (x, y) = alternative_point(rng);
            (1.0 - x, 1.0 - y)
        })
        .collect();
    BivariateSample::new(pairs)
}
