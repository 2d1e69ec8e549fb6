use serde::{Deserialize, Serialize};

use super::TailParameters;
use crate::error::{invalid, Result};
use crate::estimators::AtomMeasure;

/// Which argument of `λ` varies: `X` is `x ↦ λ(x, 1)`, `Y` is `y ↦ λ(1, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Normalisation of windows that reach below 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowRule {
    /// Divide by the length of the window inside `[0, ∞)`.
    #[default]
    Renormalized,
    /// Divide by the full window length `2h`; mass below 0 counts as 0.
    Clamped,
}

/// Window estimates of `R₁`, `R₂` and `λ` from the empirical exponent measure.
#[derive(Debug, Clone)]
pub struct SmoothedFunctionals {
    measure: AtomMeasure,
    rule: WindowRule,
    /// Half-width for the partials, `k^(−1/5)`.
    pub h1: f64,
    /// Half-width for the density, `k^(−1/6)`.
    pub h2: f64,
    // sorted first coordinates of atoms with |v − 1| <= h2, and vice versa
    band_x1: Vec<f64>,
    band_1y: Vec<f64>,
}

impl SmoothedFunctionals {
    pub fn new(measure: &AtomMeasure, rule: WindowRule) -> Self {
        let k = measure.k();
        let kf = k as f64;
        let h1 = kf.powf(-0.2);
        let h2 = kf.powf(-1.0 / 6.0);
        let (lo, hi) = measure.closed_range(1.0 - h2, 1.0 + h2);
        let mut band_x1 = Vec::new();
        let mut band_1y = Vec::new();
        for (p, q) in measure.lattice_atoms() {
            if (q as i64) >= lo && (q as i64) <= hi {
                band_x1.push(p as f64 / kf);
            }
            if (p as i64) >= lo && (p as i64) <= hi {
                band_1y.push(q as f64 / kf);
            }
        }
        band_x1.sort_by(f64::total_cmp);
        band_1y.sort_by(f64::total_cmp);
        Self {
            measure: measure.clone(),
            rule,
            h1,
            h2,
            band_x1,
            band_1y,
        }
    }

    pub fn measure(&self) -> &AtomMeasure {
        &self.measure
    }

    pub fn rule(&self) -> WindowRule {
        self.rule
    }

    /// Length by which a window of half-width `h` centred at `t` is divided.
    fn window_length(&self, t: f64, h: f64) -> f64 {
        match self.rule {
            WindowRule::Clamped => 2.0 * h,
            WindowRule::Renormalized => t + h - (t - h).max(0.0),
        }
    }

    /// `(R₁ₙ(x, y), R₂ₙ(x, y))` without argument checks.
    pub(crate) fn partials_unchecked(&self, x: f64, y: f64) -> (f64, f64) {
        let h = self.h1;
        let m = &self.measure;
        let r1 = m.strip_mass(x - h, x + h, 0.0, y).unwrap_or(0.0);
        let r2 = m.strip_mass(0.0, x, y - h, y + h).unwrap_or(0.0);
        (r1 / self.window_length(x, h), r2 / self.window_length(y, h))
    }

    fn density_unchecked(&self, axis: Axis, t: f64) -> f64 {
        let h = self.h2;
        let m = &self.measure;
        let mass = match axis {
            Axis::X => m.strip_mass(t - h, t + h, 1.0 - h, 1.0 + h),
            Axis::Y => m.strip_mass(1.0 - h, 1.0 + h, t - h, t + h),
        }
        .unwrap_or(0.0);
        mass / (self.window_length(t, h) * self.window_length(1.0, h))
    }

    /// `∫_lo^hi λₙ` along `axis`: each band atom contributes the integral of
    /// `1/window_length` over its window inside `[lo, hi] ∩ [0, ∞)`.
    fn integral_unchecked(&self, axis: Axis, lo: f64, hi: f64) -> f64 {
        let band = match axis {
            Axis::X => &self.band_x1,
            Axis::Y => &self.band_1y,
        };
        let h = self.h2;
        let lo = lo.max(0.0);
        if !(hi > lo) {
            return 0.0;
        }
        let start = band.partition_point(|&u| u + h <= lo);
        let mut total = 0.0;
        for &u in &band[start..] {
            if u - h >= hi {
                break;
            }
            let (a, b) = ((u - h).max(lo), (u + h).min(hi));
            total += match self.rule {
                WindowRule::Clamped => (b - a) / (2.0 * h),
                // the window length is t + h below h and 2h above
                WindowRule::Renormalized => {
                    let mid = h.clamp(a, b);
                    ((mid + h) / (a + h)).ln() + (b - mid) / (2.0 * h)
                }
            };
        }
        total / self.window_length(1.0, h) / self.measure.k() as f64
    }
}

impl TailParameters for SmoothedFunctionals {
    fn density_x1(&self, x: f64) -> f64 {
        self.density_unchecked(Axis::X, x)
    }

    fn density_1y(&self, y: f64) -> f64 {
        self.density_unchecked(Axis::Y, y)
    }

    fn integral_x1(&self, lo: f64, hi: f64) -> f64 {
        self.integral_unchecked(Axis::X, lo, hi)
    }

    fn integral_1y(&self, lo: f64, hi: f64) -> f64 {
        self.integral_unchecked(Axis::Y, lo, hi)
    }

    fn partials(&self, x: f64, y: f64) -> (f64, f64) {
        self.partials_unchecked(x, y)
    }
}

/// `(R₁ₙ(x, y), R₂ₙ(x, y))` with window half-width `k^(−1/5)`.
pub fn smoothed_partials(smoothed: &SmoothedFunctionals, x: f64, y: f64) -> Result<(f64, f64)> {
    if !(x > 0.0 && y > 0.0) {
        return Err(invalid(format!("partials need x, y > 0, got ({x}, {y})")));
    }
    Ok(smoothed.partials_unchecked(x, y))
}

/// `λₙ(t, 1)` for [`Axis::X`], `λₙ(1, t)` for [`Axis::Y`].
pub fn smoothed_density(smoothed: &SmoothedFunctionals, axis: Axis, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("density coordinate must be > 0, got {t}")));
    }
    Ok(smoothed.density_unchecked(axis, t))
}

/// `∫_c^∞ λₙ` along `axis`.
pub fn density_tail_integral(smoothed: &SmoothedFunctionals, axis: Axis, c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(invalid(format!("lower limit must be >= 0, got {c}")));
    }
    Ok(smoothed.integral_unchecked(axis, c, f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::exponent_measure;
    use crate::sample::RankData;

    fn sample_measure() -> AtomMeasure {
        let rx = vec![3, 7, 1, 9, 4, 2, 10, 6, 5, 8, 12, 11, 16, 13, 15, 14];
        let ry = vec![5, 9, 2, 8, 1, 3, 10, 4, 7, 6, 14, 16, 11, 15, 12, 13];
        exponent_measure(&RankData::from_ranks(rx, ry).unwrap(), 4).unwrap()
    }

    #[test]
    fn tail_integral_matches_fine_riemann_sum() {
        let s = SmoothedFunctionals::new(&sample_measure(), WindowRule::Clamped);
        for axis in [Axis::X, Axis::Y] {
            let c = 0.3;
            let step = 1e-4;
            let riemann: f64 = (0..100_000)
                .map(|i| c + (i as f64 + 0.5) * step)
                .map(|t| smoothed_density(&s, axis, t).unwrap() * step)
                .sum();
            let exact = density_tail_integral(&s, axis, c).unwrap();
            assert!(exact > 0.0);
            assert!((riemann - exact).abs() < 1e-3 * exact.max(1.0), "{riemann} vs {exact}");
        }
    }

    #[test]
    fn integral_is_additive() {
        let s = SmoothedFunctionals::new(&sample_measure(), WindowRule::Clamped);
        let whole = s.integral_x1(0.2, f64::INFINITY);
        let parts = s.integral_x1(0.2, 1.7) + s.integral_x1(1.7, f64::INFINITY);
        assert!((whole - parts).abs() <= 4.0 * f64::EPSILON * whole);
        assert_eq!(density_tail_integral(&s, Axis::X, 100.0).unwrap(), 0.0);
    }

    #[test]
    fn renormalized_tail_integral_matches_riemann_sum() {
        let s = SmoothedFunctionals::new(&sample_measure(), WindowRule::Renormalized);
        let step = 1e-4;
        let riemann: f64 = (0..100_000)
            .map(|i| (i as f64 + 0.5) * step)
            .map(|t| smoothed_density(&s, Axis::Y, t).unwrap() * step)
            .sum();
        let exact = density_tail_integral(&s, Axis::Y, 0.0).unwrap();
        assert!((riemann - exact).abs() < 1e-3 * exact, "{riemann} vs {exact}");
    }

    #[test]
    fn rules_agree_away_from_the_axes() {
        let m = sample_measure();
        let a = SmoothedFunctionals::new(&m, WindowRule::Clamped);
        let b = SmoothedFunctionals::new(&m, WindowRule::Renormalized);
        assert_eq!(a.partials(1.5, 1.2), b.partials(1.5, 1.2));
        let (ra, _) = a.partials(0.1, 1.0);
        let (rb, _) = b.partials(0.1, 1.0);
        assert!((rb - ra * 2.0 * a.h1 / (0.1 + a.h1)).abs() < 1e-15);
    }

    #[test]
    fn windows_are_clamped_and_checked() {
        let s = SmoothedFunctionals::new(&sample_measure(), WindowRule::Clamped);
        let (r1, _) = smoothed_partials(&s, 0.1, 1.0).unwrap();
        let direct = s.measure().strip_mass(0.0, 0.1 + s.h1, 0.0, 1.0).unwrap() * 0.5 / s.h1;
        assert_eq!(r1, direct);
        assert!(smoothed_partials(&s, 0.0, 1.0).is_err());
        assert!(smoothed_density(&s, Axis::Y, -1.0).is_err());
        assert!(density_tail_integral(&s, Axis::Y, -1.0).is_err());
    }
}
