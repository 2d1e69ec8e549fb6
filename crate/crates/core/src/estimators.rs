//! Rank-based estimators of the spectral measure, the stable tail dependence
//! function and the exponent measure.
//!
//! All estimators live on the integer lattice `(p, q) = (n+1−Rˣ, n+1−Rʸ)`;
//! every returned value is an integer count divided by `k`.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use crate::error::{invalid, Result};
use crate::lattice::{ceil_scaled, floor_scaled, strict_count};
use crate::sample::RankData;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralAtom {
    pub p: u32,
    pub q: u32,
    /// `atan2(q, p)`.
    pub angle: f64,
}

/// Estimated spectral c.d.f.: angle atoms of mass `1/k` for all observations
/// with `min(p, q) <= k`.
#[derive(Debug, Clone)]
pub struct SpectralCdf {
    atoms: Vec<SpectralAtom>,
    // prefix sums of min(1, cot θ) and suffix sums of min(1, tan θ)
    prefix_cot: Vec<f64>,
    suffix_tan: Vec<f64>,
    k: usize,
    n: usize,
}

fn cmp_slope(a: &SpectralAtom, b: &SpectralAtom) -> Ordering {
    // q_a / p_a vs q_b / p_b, exact in integers
    (a.q as u64 * b.p as u64).cmp(&(b.q as u64 * a.p as u64))
}

pub fn spectral_cdf(ranks: &RankData, k: usize) -> Result<SpectralCdf> {
    ranks.check_k(k)?;
    let mut atoms: Vec<SpectralAtom> = ranks
        .tail_points()
        .filter(|&(p, q)| p.min(q) as usize <= k)
        .map(|(p, q)| SpectralAtom {
            p,
            q,
            angle: (q as f64).atan2(p as f64),
        })
        .collect();
    atoms.sort_by(cmp_slope);

    let mut prefix_cot = Vec::with_capacity(atoms.len() + 1);
    prefix_cot.push(0.0);
    let mut acc = 0.0;
    for a in &atoms {
        acc += if a.p >= a.q { 1.0 } else { a.p as f64 / a.q as f64 };
        prefix_cot.push(acc);
    }
    let mut suffix_tan = vec![0.0; atoms.len() + 1];
    for i in (0..atoms.len()).rev() {
        let a = &atoms[i];
        let t = if a.q >= a.p { 1.0 } else { a.q as f64 / a.p as f64 };
        suffix_tan[i] = suffix_tan[i + 1] + t;
    }
    Ok(SpectralCdf {
        atoms,
        prefix_cot,
        suffix_tan,
        k,
        n: ranks.n(),
    })
}

impl SpectralCdf {
    /// Atoms in ascending angle order.
    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of atoms with angle `<= theta`.
    pub fn count(&self, theta: f64) -> usize {
        self.atoms.partition_point(|a| a.angle <= theta)
    }

    /// `Φ̂(θ)`, right-continuous.
    pub fn eval(&self, theta: f64) -> f64 {
        self.count(theta) as f64 / self.k as f64
    }

    /// `Φ̂(π/2)`, always in `[1, 2]`.
    pub fn total(&self) -> f64 {
        self.atoms.len() as f64 / self.k as f64
    }

    fn split(&self, x: f64, y: f64) -> usize {
        // atoms with tan θ <= y/x take the y-branch of the integrand
        self.atoms.partition_point(|a| a.q as f64 * x <= a.p as f64 * y)
    }

    /// `l̂₁(x, y)` without argument checks.
    pub(crate) fn stdf_unchecked(&self, x: f64, y: f64) -> f64 {
        let s = self.split(x, y);
        (y * self.prefix_cot[s] + x * self.suffix_tan[s]) / self.k as f64
    }
}

/// `l̂₁(x, y) = ∫ (x(1∧tanθ)) ∨ (y(1∧cotθ)) dΦ̂(θ)`, summed exactly over atoms.
pub fn stdf_spectral(phi: &SpectralCdf, x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return Err(invalid(format!("stdf arguments must be >= 0, got ({x}, {y})")));
    }
    Ok(phi.stdf_unchecked(x, y))
}

/// `k · l̂₂(x, y)`: number of observations with `p < kx` or `q < ky`.
pub fn stdf_rank_count(ranks: &RankData, k: usize, x: f64, y: f64) -> Result<usize> {
    ranks.check_k(k)?;
    if !(x > 0.0 && y > 0.0) {
        return Err(invalid(format!("stdf arguments must be > 0, got ({x}, {y})")));
    }
    let n = ranks.n();
    let (px, qy) = (strict_count(k, n, x), strict_count(k, n, y));
    let joint = ranks
        .tail_points()
        .filter(|&(p, q)| p as usize <= px && q as usize <= qy)
        .count();
    Ok(px + qy - joint)
}

/// `l̂₂(x, y) = (1/k) #{i : Rᵢˣ > n+1−kx or Rᵢʸ > n+1−ky}`.
pub fn stdf_rank(ranks: &RankData, k: usize, x: f64, y: f64) -> Result<f64> {
    Ok(stdf_rank_count(ranks, k, x, y)? as f64 / k as f64)
}

/// Empirical exponent measure: `n` atoms at `(p, q) / k`, each of mass `1/k`.
#[derive(Debug, Clone)]
pub struct AtomMeasure {
    // q of the atom whose first coordinate is p, stored at index p - 1
    q_by_p: Vec<u32>,
    k: usize,
}

pub fn exponent_measure(ranks: &RankData, k: usize) -> Result<AtomMeasure> {
    ranks.check_k(k)?;
    let mut q_by_p = vec![0u32; ranks.n()];
    for (p, q) in ranks.tail_points() {
        q_by_p[p as usize - 1] = q;
    }
    Ok(AtomMeasure { q_by_p, k })
}

impl AtomMeasure {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.q_by_p.len()
    }

    pub fn atom_mass(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.n() as f64 / self.k as f64
    }

    /// Lattice atoms `(p, q)` in increasing `p`.
    pub fn lattice_atoms(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.q_by_p.iter().enumerate().map(|(i, &q)| (i as u32 + 1, q))
    }

    /// Second lattice coordinate of the atom at first coordinate `p` (1-based).
    pub fn q_at(&self, p: u32) -> u32 {
        self.q_by_p[p as usize - 1]
    }

    /// Atoms with `p <= ⌈kx⌉−1` and `q <= ⌈ky⌉−1`.
    pub fn box_count(&self, x: f64, y: f64) -> Result<usize> {
        if !(x > 0.0 && y > 0.0) {
            return Err(invalid(format!("box corner must be > 0, got ({x}, {y})")));
        }
        let (px, qy) = (strict_count(self.k, self.n(), x), strict_count(self.k, self.n(), y));
        Ok(self.q_by_p[..px].iter().filter(|&&q| q as usize <= qy).count())
    }

    /// `Λₙ([0, x] × [0, y])`.
    pub fn box_mass(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.box_count(x, y)? as f64 / self.k as f64)
    }

    /// Lattice index range `[lo, hi]` covered by the closed interval `[a, b]`
    /// (negative `a` clamped to 0). Empty ranges have `lo > hi`.
    pub(crate) fn closed_range(&self, a: f64, b: f64) -> (i64, i64) {
        let lo = if a <= 0.0 { 1 } else { ceil_scaled(self.k, a).max(1) };
        let hi = if b.is_infinite() {
            self.n() as i64
        } else {
            floor_scaled(self.k, b).min(self.n() as i64)
        };
        (lo, hi)
    }

    /// Atoms inside the closed rectangle `[x_lo, x_hi] × [y_lo, y_hi]`.
    pub fn strip_count(&self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<usize> {
        if !(x_lo <= x_hi && y_lo <= y_hi) {
            return Err(invalid(format!(
                "inverted rectangle [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}]"
            )));
        }
        let (plo, phi) = self.closed_range(x_lo, x_hi);
        let (qlo, qhi) = self.closed_range(y_lo, y_hi);
        if plo > phi || qlo > qhi {
            return Ok(0);
        }
        Ok(self.q_by_p[(plo - 1) as usize..phi as usize]
            .iter()
            .filter(|&&q| (q as i64) >= qlo && (q as i64) <= qhi)
            .count())
    }

    /// `Λₙ` of a closed rectangle; infinite upper bounds are allowed.
    pub fn strip_mass(&self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<f64> {
        Ok(self.strip_count(x_lo, x_hi, y_lo, y_hi)? as f64 / self.k as f64)
    }

    /// Debug dump: one `p q mass` line per atom.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# k = {}, n = {}", self.k, self.n())?;
        let mass = self.atom_mass();
        for (p, q) in self.lattice_atoms() {
            writeln!(out, "{p} {q} {mass:e}")?;
        }
        Ok(())
    }
}

/// Upper end of the angle range on which `Φ̂` is defined.
pub const MAX_ANGLE: f64 = FRAC_PI_2;
