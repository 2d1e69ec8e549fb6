//! Second moments of the simulated Wiener field against the control measure.

use std::f64::consts::FRAC_PI_4;

use evcond::limit::FieldSet;
use evcond::{compute_ranks, draw_field, exponent_measure, sample_cauchy, ControlMeasure, RankData};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const K: usize = 50;

/// Brute-force `Λₙ(a ∩ b)` straight from the ranks.
fn lattice_mass(ranks: &RankData, a: &FieldSet, b: &FieldSet) -> f64 {
    let n = ranks.n() as u32;
    let k = K as f64;
    let inside = |p: f64, q: f64, set: &FieldSet| match *set {
        FieldSet::Box(x, y) => p < k * x && q < k * y,
        FieldSet::Marg1(x) => p < k * x,
        FieldSet::Marg2(y) => q < k * y,
        // lattice atoms with p = q sit exactly on the π/4 ray; tan rounds it below 1
        FieldSet::CTheta(t) => p.min(q) <= k && q <= p * if t == FRAC_PI_4 { 1.0 } else { t.tan() },
    };
    ranks
        .rx()
        .iter()
        .zip(ranks.ry())
        .map(|(&rx, &ry)| ((n + 1 - rx) as f64, (n + 1 - ry) as f64))
        .filter(|&(p, q)| inside(p, q, a) && inside(p, q, b))
        .count() as f64
        / k
}

#[test]
fn covariance_panel_matches_measure() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sample = sample_cauchy(500, &mut rng).unwrap();
    let (ranks, _) = compute_ranks(&sample);
    let measure = ControlMeasure::from_exponent_measure(&exponent_measure(&ranks, K).unwrap());
    let sets = [
        FieldSet::Box(1.0, 1.0),
        FieldSet::Box(0.45, 2.3),
        FieldSet::CTheta(FRAC_PI_4),
        FieldSet::CTheta(1.2),
    ];
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|i| (i..4).map(move |j| (i, j))).collect();
    assert_eq!(pairs.len(), 10);

    let draws = 50_000;
    let mut sums = vec![0.0; pairs.len()];
    let mut draw = draw_field(&measure, &mut rng).unwrap();
    let mut values = [0.0; 4];
    for _ in 0..draws {
        draw.redraw(&mut rng);
        for (v, s) in values.iter_mut().zip(&sets) {
            *v = draw.eval(s).unwrap();
        }
        for (acc, &(i, j)) in sums.iter_mut().zip(&pairs) {
            *acc += values[i] * values[j];
        }
    }

    let mut within = 0;
    for (acc, &(i, j)) in sums.iter().zip(&pairs) {
        let expected = lattice_mass(&ranks, &sets[i], &sets[j]);
        assert!((expected - measure.mass_of_intersection(&sets[i], &sets[j])).abs() < 1e-12);
        let (vi, vj) = (
            lattice_mass(&ranks, &sets[i], &sets[i]),
            lattice_mass(&ranks, &sets[j], &sets[j]),
        );
        let se = ((vi * vj + expected * expected) / draws as f64).sqrt();
        let observed = acc / draws as f64;
        if (observed - expected).abs() <= 3.0 * se {
            within += 1;
        }
    }
    assert!(within >= 9, "{within} of 10 panel entries within 3 standard errors");
}
