use std::f64::consts::FRAC_PI_4;

use evcond::limit::{
    a_process, density_tail_integral, smoothed_density, smoothed_partials, z_process, AnalyticParameters, Axis,
    MeshSpec, SimulationSettings, ThetaCache, ThetaGrid, WindowRule, TABLE_PROBS,
};
use evcond::{
    cauchy_analytic, compute_ranks, discretize_analytic, draw_field, exponent_measure, limit_quantiles_multi,
    sample_cauchy, AnalyticMeasure, QuadSpec, SimulationPlan, SmoothedFunctionals,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coarse_settings(workers: Option<usize>) -> SimulationSettings {
    SimulationSettings {
        quad: QuadSpec::new(40).unwrap(),
        theta_cells: 40,
        mesh: MeshSpec {
            cells_per_unit: 50,
            fine_extent: 2.0,
            far_extent: 20.0,
            growth: 1.3,
        },
        workers,
        ..SimulationSettings::default()
    }
}

#[test]
fn smoothed_functionals_track_cauchy_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let s = sample_cauchy(5000, &mut rng).unwrap();
    let (r, _) = compute_ranks(&s);
    let sm = SmoothedFunctionals::new(&exponent_measure(&r, 500).unwrap(), WindowRule::Renormalized);
    let c = cauchy_analytic();
    // the windows estimate the average slope of R over [x − h, x + h] ∩ [0, ∞)
    let h = sm.h1;
    let slope = |f: &dyn Fn(f64) -> f64, t: f64| {
        let lo = (t - h).max(0.0);
        (f(t + h) - f(lo)) / (t + h - lo)
    };
    for (x, y) in [(1.0, 1.0), (0.5, 1.0), (1.0, 0.3), (0.1, 1.0)] {
        let (r1, r2) = smoothed_partials(&sm, x, y).unwrap();
        let e1 = slope(&|t| c.tail_copula(t, y), x);
        let e2 = slope(&|t| c.tail_copula(x, t), y);
        assert!(
            (r1 - e1).abs() < 0.05 && (r2 - e2).abs() < 0.05,
            "({x}, {y}): ({r1}, {r2}) vs ({e1}, {e2})"
        );
    }
    for t in [0.5, 1.0, 2.0] {
        let d = smoothed_density(&sm, Axis::X, t).unwrap();
        let e = c.density(t, 1.0).unwrap();
        assert!((d - e).abs() < 0.1, "λ({t}, 1): {d} vs {e}");
    }
    let total = density_tail_integral(&sm, Axis::Y, 0.0).unwrap();
    assert!((total - 1.0).abs() < 0.1, "{total}");
}

#[test]
fn z_and_a_are_continuous_across_the_diagonal() {
    let c = cauchy_analytic();
    let params = AnalyticParameters(&c);
    let measure = discretize_analytic(&c, &coarse_settings(None).mesh).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let draw = draw_field(&measure, &mut rng).unwrap();
    let eps = 1e-10;
    let below = z_process(&draw, &params, FRAC_PI_4 - eps).unwrap();
    let above = z_process(&draw, &params, FRAC_PI_4 + eps).unwrap();
    let scale = below.abs().max(1.0);
    assert!((below - above).abs() <= 1e-6 * scale, "{below} vs {above}");

    let grid = ThetaGrid::new(40).unwrap();
    let cache = ThetaCache::new(&draw, &grid, &params).unwrap();
    for x in [0.1, 0.5, 0.9] {
        let lo = a_process(&cache, &grid, x, x - eps).unwrap();
        let on = a_process(&cache, &grid, x, x).unwrap();
        let hi = a_process(&cache, &grid, x, x + eps).unwrap();
        let scale = on.abs().max(1.0);
        assert!(
            (lo - on).abs() <= 1e-6 * scale && (hi - on).abs() <= 1e-6 * scale,
            "{lo} {on} {hi}"
        );
    }
}

#[test]
fn quantiles_do_not_depend_on_worker_count() {
    let c = cauchy_analytic();
    let tables: Vec<_> = [Some(1), Some(2), Some(8)]
        .into_iter()
        .map(|w| {
            let plan = SimulationPlan::analytic(&c, &[0.0, 2.0], &coarse_settings(w)).unwrap();
            limit_quantiles_multi(&plan, 200, &TABLE_PROBS, 9).unwrap()
        })
        .collect();
    assert_eq!(tables[0], tables[1]);
    assert_eq!(tables[0], tables[2]);
    for t in &tables[0] {
        assert!(t.rows.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(t.rows[0].1 > 0.0);
    }
}

#[test]
fn estimated_plan_runs_on_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = sample_cauchy(400, &mut rng).unwrap();
    let (r, _) = compute_ranks(&s);
    let plan = SimulationPlan::estimated(&r, 40, &[2.0], &coarse_settings(None)).unwrap();
    assert_eq!(plan.k(), Some(40));
    let values = plan.simulate(150, 1).unwrap();
    assert_eq!(values[0].len(), 150);
    assert!(values[0].iter().all(|v| v.is_finite() && *v >= 0.0));
    assert!(SimulationPlan::estimated(&r, 400, &[2.0], &coarse_settings(None)).is_err());
}
