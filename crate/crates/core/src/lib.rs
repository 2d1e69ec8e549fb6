//! Rank-based test of the bivariate extreme-value dependence condition.
//!
//! The statistic `k·Lₙ` compares two estimators of the stable tail dependence
//! function: one through the estimated spectral measure and one through
//! marginal rank counts. Critical values come from Monte-Carlo simulation of
//! the limiting Gaussian functional, either with a closed-form exponent
//! measure or with the empirical one estimated from the data.
//!
//! ```
//! use evcond::{compute_ranks, test_statistic, BivariateSample, QuadSpec};
//!
//! let pairs = (1..=40).map(|i| (i as f64, ((i * 17) % 41) as f64)).collect();
//! let sample = BivariateSample::new(pairs).unwrap();
//! let (ranks, _) = compute_ranks(&sample);
//! let stat = test_statistic(&ranks, 10, 2.0, &QuadSpec::default()).unwrap();
//! assert!(stat >= 0.0);
//! ```

// `!(x >= 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod estimators;
pub mod lattice;
pub mod limit;
pub mod models;
pub mod quadrature;
pub mod sample;
pub mod statistic;

pub use error::{Error, Result};
pub use estimators::{
    exponent_measure, spectral_cdf, stdf_rank, stdf_rank_count, stdf_spectral, AtomMeasure, SpectralAtom, SpectralCdf,
};
pub use limit::{
    discretize_analytic, draw_field, limit_quantiles, limit_quantiles_multi, ControlMeasure, GaussianFieldDraw,
    MeshSpec, QuantileTable, SimulationPlan, SimulationSettings, SmoothedFunctionals,
};
pub use models::{cauchy_analytic, sample_alternative, sample_cauchy, sample_gumbel, AnalyticMeasure, CauchyMeasure};
pub use quadrature::QuadSpec;
pub use sample::{compute_ranks, load_sample, BivariateSample, Delimiter, RankData, TestConfig, TextFormat, TieCounts};
pub use statistic::{k_scan, refinement_pair, test_statistic, QuantileHook, ScanCurve, ScanEntry};
