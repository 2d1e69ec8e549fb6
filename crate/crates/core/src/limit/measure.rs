use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::AtomMeasure;
use crate::lattice::strict_count;
use crate::models::AnalyticMeasure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlAtom {
    pub u: f64,
    pub v: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    EstimatedFromData,
    DiscretizedAnalytic,
}

#[derive(Debug, Clone, Copy)]
enum Lattice {
    /// Integer keys `(p, q)` at coordinates `(p, q)/k`; boxes use `p < kx`.
    Integer { k: usize, n: usize },
    /// Keys equal coordinates; boxes are closed.
    Continuous,
}

/// Atomic control measure of the Wiener field, with the sort orders needed
/// for marginal, box and `C_θ` queries.
#[derive(Debug, Clone)]
pub struct ControlMeasure {
    atoms: Vec<ControlAtom>,
    keys: Vec<(f64, f64)>,
    lattice: Lattice,
    provenance: Provenance,
    in_strip: Vec<bool>,
    angle: Vec<f64>,
    pub(super) order_u: Vec<u32>,
    pub(super) key_u_sorted: Vec<f64>,
    pub(super) u_sorted: Vec<f64>,
    pub(super) log_u_sorted: Vec<f64>,
    pub(super) order_v: Vec<u32>,
    pub(super) key_v_sorted: Vec<f64>,
    pub(super) v_sorted: Vec<f64>,
    pub(super) log_v_sorted: Vec<f64>,
    pub(super) strip_order: Vec<u32>,
    pub(super) strip_angles: Vec<f64>,
}

fn sorted_order(values: &[f64]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..values.len() as u32).collect();
    order.sort_by(|&a, &b| values[a as usize].total_cmp(&values[b as usize]));
    order
}

impl ControlMeasure {
    fn build(atoms: Vec<ControlAtom>, keys: Vec<(f64, f64)>, lattice: Lattice, provenance: Provenance) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("control measure has no atoms".into()));
        }
        if let Some(a) = atoms.iter().find(|a| {
            !(a.mass > 0.0 && a.mass.is_finite() && a.u >= 0.0 && a.v >= 0.0 && a.u.is_finite() && a.v.is_finite())
        }) {
            return Err(Error::InvalidArgument(format!("invalid atom {a:?}")));
        }
        let in_strip: Vec<bool> = match lattice {
            Lattice::Integer { k, .. } => keys.iter().map(|&(p, q)| p.min(q) <= k as f64).collect(),
            Lattice::Continuous => atoms.iter().map(|a| a.u.min(a.v) <= 1.0).collect(),
        };
        let angle: Vec<f64> = keys.iter().map(|&(p, q)| q.atan2(p)).collect();

        let key_u: Vec<f64> = keys.iter().map(|k| k.0).collect();
        let key_v: Vec<f64> = keys.iter().map(|k| k.1).collect();
        let order_u = sorted_order(&key_u);
        let order_v = sorted_order(&key_v);
        let gather =
            |order: &[u32], f: &dyn Fn(usize) -> f64| -> Vec<f64> { order.iter().map(|&i| f(i as usize)).collect() };
        let key_u_sorted = gather(&order_u, &|i| keys[i].0);
        let u_sorted = gather(&order_u, &|i| atoms[i].u);
        let log_u_sorted = u_sorted.iter().map(|u| u.ln()).collect();
        let key_v_sorted = gather(&order_v, &|i| keys[i].1);
        let v_sorted = gather(&order_v, &|i| atoms[i].v);
        let log_v_sorted = v_sorted.iter().map(|v| v.ln()).collect();

        let mut strip_order: Vec<u32> = (0..atoms.len() as u32).filter(|&i| in_strip[i as usize]).collect();
        strip_order.sort_by(|&a, &b| angle[a as usize].total_cmp(&angle[b as usize]));
        let strip_angles = strip_order.iter().map(|&i| angle[i as usize]).collect();

        Ok(Self {
            atoms,
            keys,
            lattice,
            provenance,
            in_strip,
            angle,
            order_u,
            key_u_sorted,
            u_sorted,
            log_u_sorted,
            order_v,
            key_v_sorted,
            v_sorted,
            log_v_sorted,
            strip_order,
            strip_angles,
        })
    }

    /// The empirical exponent measure as a control measure.
    pub fn from_exponent_measure(measure: &AtomMeasure) -> Self {
        let k = measure.k();
        let mass = measure.atom_mass();
        let kf = k as f64;
        let (atoms, keys) = measure
            .lattice_atoms()
            .map(|(p, q)| {
                let (p, q) = (p as f64, q as f64);
                (
                    ControlAtom {
                        u: p / kf,
                        v: q / kf,
                        mass,
                    },
                    (p, q),
                )
            })
            .unzip();
        Self::build(
            atoms,
            keys,
            Lattice::Integer { k, n: measure.n() },
            Provenance::EstimatedFromData,
        )
        .expect("exponent measure atoms are valid")
    }

    /// Arbitrary atoms with closed box boundaries.
    pub fn from_atoms(atoms: Vec<ControlAtom>, provenance: Provenance) -> Result<Self> {
        let keys = atoms.iter().map(|a| (a.u, a.v)).collect();
        Self::build(atoms, keys, Lattice::Continuous, provenance)
    }

    pub fn atoms(&self) -> &[ControlAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Scale of the rank lattice for estimated measures.
    pub fn lattice_k(&self) -> Option<usize> {
        match self.lattice {
            Lattice::Integer { k, .. } => Some(k),
            Lattice::Continuous => None,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Largest key counted in `[0, x]` along either axis.
    pub fn cutoff(&self, x: f64) -> f64 {
        match self.lattice {
            Lattice::Integer { k, n } => strict_count(k, n, x) as f64,
            Lattice::Continuous => x,
        }
    }

    /// Whether atom `i` lies in `set`.
    pub fn contains(&self, i: usize, set: &super::FieldSet) -> bool {
        use super::FieldSet::*;
        let (ku, kv) = self.keys[i];
        match *set {
            Box(x, y) => ku <= self.cutoff(x) && kv <= self.cutoff(y),
            Marg1(x) => ku <= self.cutoff(x),
            Marg2(y) => kv <= self.cutoff(y),
            CTheta(theta) => self.in_strip[i] && self.angle[i] <= theta,
        }
    }

    /// `Λ(set)` under this measure.
    pub fn mass_of(&self, set: &super::FieldSet) -> f64 {
        self.mass_of_intersection(set, set)
    }

    /// `Λ(a ∩ b)`, the covariance of `W(a)` and `W(b)`.
    pub fn mass_of_intersection(&self, a: &super::FieldSet, b: &super::FieldSet) -> f64 {
        (0..self.len())
            .filter(|&i| self.contains(i, a) && self.contains(i, b))
            .map(|i| self.atoms[i].mass)
            .sum()
    }

    /// Number of atoms counted by a marginal query on the first axis.
    pub(super) fn count_u(&self, x: f64) -> usize {
        let c = self.cutoff(x);
        self.key_u_sorted.partition_point(|&k| k <= c)
    }

    pub(super) fn count_v(&self, y: f64) -> usize {
        let c = self.cutoff(y);
        self.key_v_sorted.partition_point(|&k| k <= c)
    }

    pub(super) fn key(&self, i: usize) -> (f64, f64) {
        self.keys[i]
    }
}

/// Cell mesh for discretising a closed-form measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    /// Uniform cells per unit length on `[0, fine_extent]`.
    pub cells_per_unit: usize,
    pub fine_extent: f64,
    /// End of the geometrically growing cells; beyond it one tail cell per row/column.
    pub far_extent: f64,
    pub growth: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self {
            cells_per_unit: 100,
            fine_extent: 2.0,
            far_extent: 100.0,
            growth: 1.1,
        }
    }
}

pub const MIN_CELLS_PER_UNIT: usize = 50;

impl MeshSpec {
    pub fn validate(&self) -> Result<()> {
        if self.cells_per_unit < MIN_CELLS_PER_UNIT {
            return Err(Error::Config(format!(
                "mesh has {} cells per unit, at least {MIN_CELLS_PER_UNIT} are required",
                self.cells_per_unit
            )));
        }
        let fine_cells = self.fine_extent * self.cells_per_unit as f64;
        if self.fine_extent < 1.0 || (fine_cells - fine_cells.round()).abs() > 1e-9 {
            return Err(Error::Config(
                "fine extent must be >= 1 and a whole number of cells".into(),
            ));
        }
        if !(self.far_extent > self.fine_extent && self.far_extent.is_finite()) || !(self.growth >= 1.0) {
            return Err(Error::Config(
                "far extent must exceed the fine extent; growth must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Finite cell edges along one axis, starting at 0 and ending at `far_extent`.
    pub fn edges(&self) -> Vec<f64> {
        let c = self.cells_per_unit as f64;
        let fine = (self.fine_extent * c).round() as usize;
        let mut edges: Vec<f64> = (0..=fine).map(|i| i as f64 / c).collect();
        let mut size = 1.0 / c;
        loop {
            size *= self.growth;
            let last = *edges.last().expect("non-empty");
            if last + 1.5 * size >= self.far_extent {
                edges.push(self.far_extent);
                break;
            }
            edges.push(last + size);
        }
        edges
    }
}

/// One atom per mesh cell carrying the cell's `Λ`-mass (inclusion–exclusion of
/// `R`), placed at the cell centre. Cells beyond the far extent form a tail
/// row and column whose atoms sit at twice the far extent; the doubly
/// infinite corner is excluded.
pub fn discretize_analytic(analytic: &dyn AnalyticMeasure, mesh: &MeshSpec) -> Result<ControlMeasure> {
    mesh.validate()?;
    let mut edges = mesh.edges();
    edges.push(f64::INFINITY);
    let cells = edges.len() - 1;
    let centre = |i: usize| {
        if edges[i + 1].is_infinite() {
            2.0 * mesh.far_extent
        } else {
            0.5 * (edges[i] + edges[i + 1])
        }
    };
    // R on the edge lattice, with R(∞, ∞) never used
    let r = |i: usize, j: usize| {
        if edges[i].is_infinite() && edges[j].is_infinite() {
            f64::NAN
        } else {
            analytic.tail_copula(edges[i], edges[j])
        }
    };
    let mut atoms = Vec::with_capacity(cells * cells);
    for i in 0..cells {
        for j in 0..cells {
            if i + 1 == cells && j + 1 == cells {
                continue;
            }
            let mass = r(i + 1, j + 1) - r(i, j + 1) - r(i + 1, j) + r(i, j);
            if mass > 0.0 {
                atoms.push(ControlAtom {
                    u: centre(i),
                    v: centre(j),
                    mass,
                });
            }
        }
    }
    ControlMeasure::from_atoms(atoms, Provenance::DiscretizedAnalytic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::FieldSet;
    use crate::models::cauchy_analytic;

    #[test]
    fn mesh_edges_cover_the_far_extent() {
        let edges = MeshSpec::default().edges();
        assert_eq!(edges[100], 1.0);
        assert_eq!(edges[200], 2.0);
        assert_eq!(*edges.last().unwrap(), 100.0);
        assert!(edges.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn coarse_mesh_rejected() {
        let mesh = MeshSpec {
            cells_per_unit: 40,
            ..MeshSpec::default()
        };
        assert!(discretize_analytic(&cauchy_analytic(), &mesh).is_err());
    }

    #[test]
    fn cauchy_cell_masses() {
        let c = cauchy_analytic();
        let mesh = MeshSpec::default();
        let m = discretize_analytic(&c, &mesh).unwrap();
        let unit: f64 = m
            .atoms()
            .iter()
            .filter(|a| a.u < 1.0 && a.v < 1.0)
            .map(|a| a.mass)
            .sum();
        assert!((unit - (2.0 - 2f64.sqrt())).abs() < 1e-9, "{unit}");

        // everything except the corner beyond the far extent: l(T, T)
        let t = mesh.far_extent;
        assert!((m.total_mass() - c.stdf(t, t)).abs() < 1e-9);

        // strip beyond T below height 1: √(T² + 1) − T ≈ 1/(2T)
        let tail: f64 = m.atoms().iter().filter(|a| a.u > t && a.v < 1.0).map(|a| a.mass).sum();
        let expected = (t * t + 1.0).sqrt() - t;
        assert!((tail - expected).abs() < 1e-9);
        assert!((tail - 0.005).abs() < 1e-4);

        assert!(m.atoms().iter().all(|a| a.mass > 0.0));
        // unit marginal strip has mass 1
        assert!((m.mass_of(&FieldSet::Marg1(1.0)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn estimated_measure_uses_strict_boxes() {
        let r = crate::sample::RankData::from_ranks(vec![1, 2, 3, 4], vec![1, 2, 3, 4]).unwrap();
        let am = crate::estimators::exponent_measure(&r, 2).unwrap();
        let m = ControlMeasure::from_exponent_measure(&am);
        // atom at (1, 1) is not inside [0, 1]² under the p < kx rule
        assert_eq!(m.mass_of(&FieldSet::Box(1.0, 1.0)), am.box_mass(1.0, 1.0).unwrap());
        assert_eq!(m.mass_of(&FieldSet::Marg1(1.0)), 0.5);
        // C_{π/2} keeps atoms with min(p, q) <= k
        assert_eq!(m.mass_of(&FieldSet::CTheta(std::f64::consts::FRAC_PI_2)), 1.0);
    }
}
