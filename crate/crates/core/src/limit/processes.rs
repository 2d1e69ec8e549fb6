use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::{GaussianFieldDraw, TailParameters};
use crate::error::{invalid, Error, Result};

pub const MIN_THETA_CELLS: usize = 20;

/// Uniform grid of `[0, π/2]` with an even number of cells, so `π/4` is an edge.
#[derive(Debug, Clone)]
pub struct ThetaGrid {
    cells: usize,
    edges: Vec<f64>,
    mids: Vec<f64>,
    tan_edges: Vec<f64>,
    cot_edges: Vec<f64>,
}

impl ThetaGrid {
    pub fn new(cells: usize) -> Result<Self> {
        if cells < MIN_THETA_CELLS || !cells.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "theta grid must have an even number of cells >= {MIN_THETA_CELLS}, got {cells}"
            )));
        }
        let step = FRAC_PI_2 / cells as f64;
        let half = cells / 2;
        let mut edges: Vec<f64> = (0..=cells).map(|i| i as f64 * step).collect();
        edges[half] = FRAC_PI_4;
        edges[cells] = FRAC_PI_2;
        let mids = (0..cells).map(|i| (i as f64 + 0.5) * step).collect();
        let mut tan_edges: Vec<f64> = edges.iter().map(|t| t.tan()).collect();
        let mut cot_edges: Vec<f64> = edges.iter().map(|t| 1.0 / t.tan()).collect();
        tan_edges[half] = 1.0;
        cot_edges[half] = 1.0;
        cot_edges[cells] = 0.0;
        Ok(Self {
            cells,
            edges,
            mids,
            tan_edges,
            cot_edges,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.mids
    }

    fn half(&self) -> usize {
        self.cells / 2
    }

    /// Cell holding `atan2(y, x)`, forced into the half matching `y >= x`.
    pub(super) fn cell_of(&self, x: f64, y: f64) -> usize {
        let phi = y.atan2(x);
        let raw = (phi / (FRAC_PI_2 / self.cells as f64)).floor() as i64;
        let raw = raw.clamp(0, self.cells as i64 - 1) as usize;
        if y >= x {
            raw.max(self.half())
        } else {
            raw.min(self.half() - 1)
        }
    }

    /// Cell and partial weight for `A(x, y)`: `cot a − x/y` above the diagonal,
    /// `tan b − y/x` below.
    pub(super) fn geometry(&self, x: f64, y: f64) -> (usize, f64) {
        let j = self.cell_of(x, y);
        if y >= x {
            (j, self.cot_edges[j] - x / y)
        } else {
            (j, self.tan_edges[j + 1] - y / x)
        }
    }
}

/// `Z(θ)` as a linear functional of the field:
/// `w_i1·∫₀^{c1} W₁/x + w_i2·∫₀^{c2} W₂/y + w_m1·W₁(1) + w_m2·W₂(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZTerm {
    pub w_i1: f64,
    pub c1: f64,
    pub w_i2: f64,
    pub c2: f64,
    pub w_m1: f64,
    pub w_m2: f64,
}

impl ZTerm {
    pub fn new(params: &dyn TailParameters, theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(invalid(format!("angle {theta} outside [0, π/2]")));
        }
        let inf = f64::INFINITY;
        if theta == FRAC_PI_2 {
            return Ok(Self {
                w_m1: -params.integral_1y(1.0, inf),
                w_m2: -params.integral_x1(1.0, inf),
                ..Self::default()
            });
        }
        let t = theta.tan();
        if t == 0.0 {
            return Ok(Self::default());
        }
        if theta <= FRAC_PI_4 {
            let lam = params.density_1y(t);
            Ok(Self {
                w_i1: lam * t,
                c1: 1.0 / t,
                w_i2: -lam,
                c2: 1.0,
                w_m1: 0.0,
                w_m2: -params.integral_x1(1.0 / t, inf),
            })
        } else {
            let lam = params.density_x1(1.0 / t);
            Ok(Self {
                w_i1: lam,
                c1: 1.0,
                w_i2: -lam / t,
                c2: t,
                w_m1: -params.integral_1y(1.0, t),
                w_m2: -params.integral_x1(1.0, inf),
            })
        }
    }

    pub fn eval(&self, draw: &GaussianFieldDraw<'_>) -> f64 {
        let mut z = 0.0;
        if self.w_i1 != 0.0 {
            z += self.w_i1 * draw.log_integral_u(self.c1);
        }
        if self.w_i2 != 0.0 {
            z += self.w_i2 * draw.log_integral_v(self.c2);
        }
        if self.w_m1 != 0.0 {
            z += self.w_m1 * draw.marg1_unchecked(1.0);
        }
        if self.w_m2 != 0.0 {
            z += self.w_m2 * draw.marg2_unchecked(1.0);
        }
        z
    }
}

/// `Z(θ)` for one draw.
pub fn z_process(draw: &GaussianFieldDraw<'_>, params: &dyn TailParameters, theta: f64) -> Result<f64> {
    Ok(ZTerm::new(params, theta)?.eval(draw))
}

/// `W(C_θ) + Z(θ)` at the θ-cell midpoints and at `π/2`, with the cumulative
/// integrals against `1/sin²` (upper half) and `1/cos²` (lower half).
#[derive(Debug, Clone, Default)]
pub struct ThetaCache {
    f: Vec<f64>,
    f_end: f64,
    upper_cum: Vec<f64>,
    lower_cum: Vec<f64>,
}

impl ThetaCache {
    pub fn new(draw: &GaussianFieldDraw<'_>, grid: &ThetaGrid, params: &dyn TailParameters) -> Result<Self> {
        let terms = grid
            .midpoints()
            .iter()
            .map(|&t| ZTerm::new(params, t))
            .collect::<Result<Vec<_>>>()?;
        let end = ZTerm::new(params, FRAC_PI_2)?;
        let mut cache = Self::default();
        cache.refill(draw, grid, &terms, &end);
        Ok(cache)
    }

    /// Recomputes the cache for a new draw with precomputed `Z` terms.
    pub fn refill(&mut self, draw: &GaussianFieldDraw<'_>, grid: &ThetaGrid, terms: &[ZTerm], end: &ZTerm) {
        debug_assert_eq!(terms.len(), grid.cells());
        self.f.clear();
        self.f.extend(
            grid.midpoints()
                .iter()
                .zip(terms)
                .map(|(&t, z)| draw.cset_unchecked(t) + z.eval(draw)),
        );
        self.f_end = draw.cset_unchecked(FRAC_PI_2) + end.eval(draw);

        let half = grid.half();
        self.upper_cum.clear();
        self.upper_cum.push(0.0);
        let mut acc = 0.0;
        for j in half..grid.cells() {
            acc += self.f[j] * (grid.cot_edges[j] - grid.cot_edges[j + 1]);
            self.upper_cum.push(acc);
        }
        self.lower_cum.clear();
        self.lower_cum.resize(half + 1, 0.0);
        let mut acc = 0.0;
        for j in (0..half).rev() {
            acc += self.f[j] * (grid.tan_edges[j + 1] - grid.tan_edges[j]);
            self.lower_cum[j] = acc;
        }
    }

    /// `W(C_θ) + Z(θ)` at the midpoint of cell `j`.
    pub fn cell_value(&self, j: usize) -> f64 {
        self.f[j]
    }

    /// `W(C_{π/2}) + Z(π/2)`.
    pub fn end_value(&self) -> f64 {
        self.f_end
    }

    /// `A(x, y)` from a precomputed cell and partial weight.
    pub(super) fn a_at(&self, half: usize, x: f64, y: f64, cell: usize, partial: f64) -> f64 {
        if y >= x {
            x * self.f_end + y * (self.upper_cum[cell - half] + self.f[cell] * partial)
        } else {
            x * self.f_end - x * (self.lower_cum[cell + 1] + self.f[cell] * partial)
        }
    }
}

/// `A(x, y)`, integrating the cached θ-function cell by cell with exact
/// trigonometric weights and a partial last cell.
pub fn a_process(cache: &ThetaCache, grid: &ThetaGrid, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0 && y > 0.0 && y <= 1.0) {
        return Err(invalid(format!("A is defined on (0, 1]², got ({x}, {y})")));
    }
    let (cell, partial) = grid.geometry(x, y);
    Ok(cache.a_at(grid.half(), x, y, cell, partial))
}

/// `B(x, y) = W_R(x, y) − R₁(x, y)·W₁(x) − R₂(x, y)·W₂(y)`.
pub fn b_process(draw: &GaussianFieldDraw<'_>, params: &dyn TailParameters, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0 && y > 0.0 && y <= 1.0) {
        return Err(invalid(format!("B is defined on (0, 1]², got ({x}, {y})")));
    }
    let (r1, r2) = params.partials(x, y);
    Ok(draw.field_box(x, y)? - r1 * draw.marg1_unchecked(x) - r2 * draw.marg2_unchecked(y))
}
