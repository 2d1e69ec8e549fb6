use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ControlMeasure;
use crate::error::{invalid, Result};

/// Sets on which the Wiener field is queried.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSet {
    /// `[0, x] × [0, y]`.
    Box(f64, f64),
    /// `[0, x] × [0, ∞]`.
    Marg1(f64),
    /// `[0, ∞] × [0, y]`.
    Marg2(f64),
    /// `C_θ = {x∧y <= 1, y <= x tan θ}`.
    CTheta(f64),
}

/// One realisation of the Wiener field over a control measure.
#[derive(Debug, Clone)]
pub struct GaussianFieldDraw<'a> {
    measure: &'a ControlMeasure,
    xi: Vec<f64>,
    weighted: Vec<f64>,
    cum_u: Vec<f64>,
    cum_u_log: Vec<f64>,
    cum_v: Vec<f64>,
    cum_v_log: Vec<f64>,
    cum_strip: Vec<f64>,
}

fn prefix_sums(out: &mut Vec<f64>, values: impl Iterator<Item = f64>) {
    out.clear();
    out.push(0.0);
    let mut acc = 0.0;
    for v in values {
        acc += v;
        out.push(acc);
    }
}

/// Draws one standard normal per atom from `rng`.
pub fn draw_field<'a, R: Rng + ?Sized>(measure: &'a ControlMeasure, rng: &mut R) -> Result<GaussianFieldDraw<'a>> {
    let mut draw = GaussianFieldDraw::empty(measure)?;
    draw.redraw(rng);
    Ok(draw)
}

fn check_coord(v: f64) -> Result<()> {
    if !(v >= 0.0) {
        return Err(invalid(format!("field query coordinate must be >= 0, got {v}")));
    }
    Ok(())
}

impl<'a> GaussianFieldDraw<'a> {
    fn empty(measure: &'a ControlMeasure) -> Result<Self> {
        if measure.is_empty() {
            return Err(invalid("control measure has no atoms"));
        }
        let n = measure.len();
        Ok(Self {
            measure,
            xi: vec![0.0; n],
            weighted: vec![0.0; n],
            cum_u: Vec::with_capacity(n + 1),
            cum_u_log: Vec::with_capacity(n + 1),
            cum_v: Vec::with_capacity(n + 1),
            cum_v_log: Vec::with_capacity(n + 1),
            cum_strip: Vec::new(),
        })
    }

    /// A draw with prescribed normals, one per atom in measure order.
    pub fn from_normals(measure: &'a ControlMeasure, xi: Vec<f64>) -> Result<Self> {
        let mut draw = Self::empty(measure)?;
        if xi.len() != measure.len() {
            return Err(invalid(format!("expected {} normals, got {}", measure.len(), xi.len())));
        }
        draw.xi = xi;
        draw.refresh();
        Ok(draw)
    }

    /// Replaces the normals with fresh ones from `rng`, reusing buffers.
    pub fn redraw<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for x in &mut self.xi {
            *x = StandardNormal.sample(rng);
        }
        self.refresh();
    }

    fn refresh(&mut self) {
        let m = self.measure;
        for ((w, a), x) in self.weighted.iter_mut().zip(m.atoms()).zip(&self.xi) {
            *w = a.mass.sqrt() * x;
        }
        let w = &self.weighted;
        prefix_sums(&mut self.cum_u, m.order_u.iter().map(|&i| w[i as usize]));
        prefix_sums(
            &mut self.cum_u_log,
            m.order_u.iter().zip(&m.log_u_sorted).map(|(&i, l)| w[i as usize] * l),
        );
        prefix_sums(&mut self.cum_v, m.order_v.iter().map(|&i| w[i as usize]));
        prefix_sums(
            &mut self.cum_v_log,
            m.order_v.iter().zip(&m.log_v_sorted).map(|(&i, l)| w[i as usize] * l),
        );
        prefix_sums(&mut self.cum_strip, m.strip_order.iter().map(|&i| w[i as usize]));
    }

    pub fn measure(&self) -> &'a ControlMeasure {
        self.measure
    }

    pub fn normals(&self) -> &[f64] {
        &self.xi
    }

    /// `√mass · ξ` per atom, in measure order.
    pub fn weighted(&self) -> &[f64] {
        &self.weighted
    }

    pub(super) fn cum_u_at(&self, count: usize) -> f64 {
        self.cum_u[count]
    }

    pub(super) fn cum_v_at(&self, count: usize) -> f64 {
        self.cum_v[count]
    }

    pub(super) fn marg1_unchecked(&self, x: f64) -> f64 {
        self.cum_u[self.measure.count_u(x)]
    }

    pub(super) fn marg2_unchecked(&self, y: f64) -> f64 {
        self.cum_v[self.measure.count_v(y)]
    }

    /// `W₁(x) = W([0, x] × [0, ∞])`.
    pub fn field_marg1(&self, x: f64) -> Result<f64> {
        check_coord(x)?;
        Ok(self.marg1_unchecked(x))
    }

    /// `W₂(y) = W([0, ∞] × [0, y])`.
    pub fn field_marg2(&self, y: f64) -> Result<f64> {
        check_coord(y)?;
        Ok(self.marg2_unchecked(y))
    }

    /// `W_R(x, y) = W([0, x] × [0, y])`.
    pub fn field_box(&self, x: f64, y: f64) -> Result<f64> {
        check_coord(x)?;
        check_coord(y)?;
        let m = self.measure;
        let cy = m.cutoff(y);
        let count = m.count_u(x);
        Ok(m.order_u[..count]
            .iter()
            .map(|&i| i as usize)
            .filter(|&i| m.key(i).1 <= cy)
            .map(|i| self.weighted[i])
            .sum())
    }

    pub(super) fn cset_unchecked(&self, theta: f64) -> f64 {
        let count = self.measure.strip_angles.partition_point(|&a| a <= theta);
        self.cum_strip[count]
    }

    /// `W(C_θ)`.
    pub fn field_cset(&self, theta: f64) -> Result<f64> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(invalid(format!("angle {theta} outside [0, π/2]")));
        }
        Ok(self.cset_unchecked(theta))
    }

    /// `∫₀^c W₁(x)/x dx`, exact for the step function `W₁`.
    pub fn log_integral_u(&self, c: f64) -> f64 {
        let m = self.measure;
        let j = m.u_sorted.partition_point(|&u| u < c);
        if j == 0 {
            return 0.0;
        }
        self.cum_u[j] * c.ln() - self.cum_u_log[j]
    }

    /// `∫₀^c W₂(y)/y dy`.
    pub fn log_integral_v(&self, c: f64) -> f64 {
        let m = self.measure;
        let j = m.v_sorted.partition_point(|&v| v < c);
        if j == 0 {
            return 0.0;
        }
        self.cum_v[j] * c.ln() - self.cum_v_log[j]
    }

    pub fn eval(&self, set: &FieldSet) -> Result<f64> {
        match *set {
            FieldSet::Box(x, y) => self.field_box(x, y),
            FieldSet::Marg1(x) => self.field_marg1(x),
            FieldSet::Marg2(y) => self.field_marg2(y),
            FieldSet::CTheta(theta) => self.field_cset(theta),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::{ControlAtom, Provenance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn three_atoms() -> ControlMeasure {
        ControlMeasure::from_atoms(
            vec![
                ControlAtom {
                    u: 0.5,
                    v: 2.0,
                    mass: 0.25,
                },
                ControlAtom {
                    u: 1.5,
                    v: 0.5,
                    mass: 1.0,
                },
                ControlAtom {
                    u: 3.0,
                    v: 3.0,
                    mass: 4.0,
                },
            ],
            Provenance::DiscretizedAnalytic,
        )
        .unwrap()
    }

    #[test]
    fn queries_sum_selected_atoms() {
        let m = three_atoms();
        let d = GaussianFieldDraw::from_normals(&m, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(d.weighted(), &[0.5, 2.0, 6.0]);
        assert_eq!(d.field_box(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(d.field_box(2.0, 2.0).unwrap(), 2.5);
        assert_eq!(d.field_box(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(d.field_marg1(3.0).unwrap(), 8.5);
        assert_eq!(d.field_marg2(0.5).unwrap(), 2.0);
        // C_{π/2}: atoms with u∧v <= 1
        assert_eq!(d.field_cset(std::f64::consts::FRAC_PI_2).unwrap(), 2.5);
        assert_eq!(d.field_cset(0.0).unwrap(), 0.0);
        assert!(d.field_cset(2.0).is_err());
        assert!(d.field_box(-1.0, 1.0).is_err());
    }

    #[test]
    fn log_integral_matches_direct_sum() {
        let m = three_atoms();
        let d = GaussianFieldDraw::from_normals(&m, vec![1.0, -2.0, 3.0]).unwrap();
        // W₁ = 0.5 on [0.5, 1.5), −1.5 on [1.5, 3), 4.5 beyond
        let c = 4.0f64;
        let direct = 0.5 * (1.5f64 / 0.5).ln() - 1.5 * 2f64.ln() + 4.5 * (c / 3.0).ln();
        assert!((d.log_integral_u(c) - direct).abs() < 1e-14);
        assert_eq!(d.log_integral_u(0.5), 0.0);
    }

    #[test]
    fn linear_in_normals() {
        let m = three_atoms();
        let a = GaussianFieldDraw::from_normals(&m, vec![1.0, -2.0, 3.0]).unwrap();
        let b = GaussianFieldDraw::from_normals(&m, vec![2.0, -4.0, 6.0]).unwrap();
        for set in [FieldSet::Box(2.0, 3.0), FieldSet::Marg1(1.6), FieldSet::CTheta(1.0)] {
            assert_eq!(2.0 * a.eval(&set).unwrap(), b.eval(&set).unwrap());
        }
        assert_eq!(2.0 * a.log_integral_v(2.5), b.log_integral_v(2.5));
    }

    #[test]
    fn single_atom_variance() {
        let m = ControlMeasure::from_atoms(
            vec![ControlAtom {
                u: 0.5,
                v: 0.5,
                mass: 1.0,
            }],
            Provenance::DiscretizedAnalytic,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut d = draw_field(&m, &mut rng).unwrap();
        let n = 50_000;
        let mut s2 = 0.0;
        for _ in 0..n {
            d.redraw(&mut rng);
            s2 += d.field_box(1.0, 1.0).unwrap().powi(2);
        }
        let var = s2 / n as f64;
        assert!((0.97..=1.03).contains(&var), "{var}");
    }
}
