//! Monte-Carlo simulation of the limiting functional `∬ (A + B)² (x∨y)^(−β)`.
//!
//! The set-indexed Wiener process is realised exactly on an atomic control
//! measure: `W(C) = Σ_{atoms ∈ C} √mass · ξ` with independent standard normal
//! `ξ`. The control measure is either the empirical exponent measure of the
//! data or a cell discretisation of a closed-form measure; the functionals
//! entering `Z`, `A` and `B` come from a [`TailParameters`] implementation.

mod field;
mod measure;
mod processes;
mod simulate;
mod smoothing;
mod stream;

pub use field::{draw_field, FieldSet, GaussianFieldDraw};
pub use measure::{discretize_analytic, ControlAtom, ControlMeasure, MeshSpec, Provenance, MIN_CELLS_PER_UNIT};
pub use processes::{a_process, b_process, z_process, ThetaCache, ThetaGrid, ZTerm, MIN_THETA_CELLS};
pub use simulate::{
    empirical_quantile, limit_quantiles, limit_quantiles_multi, limit_replicate, QuantileConfig, QuantileTable,
    SimulationMode, SimulationPlan, SimulationSettings, TABLE_PROBS,
};
pub use smoothing::{
    density_tail_integral, smoothed_density, smoothed_partials, Axis, SmoothedFunctionals, WindowRule,
};
pub use stream::{ReplicateStreams, DATA_DOMAIN, SIMULATION_DOMAIN};

use crate::models::AnalyticMeasure;

/// Functionals of `Λ` that parametrise the processes `Z` and `B`.
pub trait TailParameters: Sync {
    /// `λ(x, 1)`.
    fn density_x1(&self, x: f64) -> f64;
    /// `λ(1, y)`.
    fn density_1y(&self, y: f64) -> f64;
    /// `∫_lo^hi λ(x, 1) dx`; `hi` may be `+∞`.
    fn integral_x1(&self, lo: f64, hi: f64) -> f64;
    /// `∫_lo^hi λ(1, y) dy`; `hi` may be `+∞`.
    fn integral_1y(&self, lo: f64, hi: f64) -> f64;
    /// `(R₁(x, y), R₂(x, y))`.
    fn partials(&self, x: f64, y: f64) -> (f64, f64);
}

/// Closed-form parameters of an analytic measure.
pub struct AnalyticParameters<'a>(pub &'a dyn AnalyticMeasure);

impl TailParameters for AnalyticParameters<'_> {
    fn density_x1(&self, x: f64) -> f64 {
        self.0.density(x, 1.0).unwrap_or(0.0)
    }

    fn density_1y(&self, y: f64) -> f64 {
        self.0.density(1.0, y).unwrap_or(0.0)
    }

    fn integral_x1(&self, lo: f64, hi: f64) -> f64 {
        self.0.tail_integral_x(lo) - self.0.tail_integral_x(hi)
    }

    fn integral_1y(&self, lo: f64, hi: f64) -> f64 {
        self.0.tail_integral_y(lo) - self.0.tail_integral_y(hi)
    }

    fn partials(&self, x: f64, y: f64) -> (f64, f64) {
        self.0.partials(x, y)
    }
}
