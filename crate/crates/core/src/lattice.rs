//! Scaled-integer helpers for queries on the `1/k` rank lattice.
//!
//! Products such as `k * x` are snapped to the nearest integer when they are
//! within rounding distance of it, so that `x = j / k` behaves as the exact
//! lattice point `j` regardless of how `x` was computed.

const SNAP_REL: f64 = 1e-10;

fn snapped(t: f64) -> Option<f64> {
    let r = t.round();
    ((t - r).abs() <= SNAP_REL * r.abs().max(1.0)).then_some(r)
}

/// `⌈k·x⌉` with lattice snapping.
pub fn ceil_scaled(k: usize, x: f64) -> i64 {
    let t = k as f64 * x;
    snapped(t).unwrap_or_else(|| t.ceil()) as i64
}

/// `⌊k·x⌋` with lattice snapping.
pub fn floor_scaled(k: usize, x: f64) -> i64 {
    let t = k as f64 * x;
    snapped(t).unwrap_or_else(|| t.floor()) as i64
}

/// Number of lattice indices `p ∈ 1..=n` with `p < k·x`, i.e. `min(⌈kx⌉ − 1, n)`.
pub fn strict_count(k: usize, n: usize, x: f64) -> usize {
    if x.is_infinite() {
        return n;
    }
    (ceil_scaled(k, x) - 1).clamp(0, n as i64) as usize
}
