//! Scaled test functions, pairings and negative-order regularity estimators.
//!
//! Test functions are tensor products of cubic B-spline profiles: a
//! nonnegative "father" bump of unit mass and an odd "mother" made of two
//! shifted bumps, which has zero mean. The family `{FF, MF, FM, MM}` fits
//! inside the unit parabolic ball.
//!
//! `S^delta_z psi (t, x) = delta^-3 psi((t - z_t) / delta^2, (x - z_x) / delta)`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::invalid;
use crate::parabolic::{dyadic_axes, GriddedField, Point, Region};
use crate::spectral_field::SpectralField;
use crate::stats::{linear_fit, LineFit};
use crate::{Error, Result};

/// Centered cubic B-spline on `[-2, 2]` with unit integral.
pub fn bspline(u: f64) -> f64 {
    let a = u.abs();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        (2.0 - a).powi(3) / 6.0
    } else {
        2.0 / 3.0 - a * a + 0.5 * a * a * a
    }
}

fn bspline_hat(w: f64) -> f64 {
    if w.abs() < 1e-8 {
        return 1.0 - w * w / 6.0;
    }
    let s = (0.5 * w).sin() / (0.5 * w);
    s * s * s * s
}

/// One-dimensional profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    /// `h^-1 B(u / h)`: unit mass, support `[-2h, 2h]`.
    Father { h: f64 },
    /// `h^-1 (B((u - c) / h) - B((u + c) / h))`: zero mass.
    Mother { c: f64, h: f64 },
}

impl Profile {
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            Profile::Father { h } => bspline(u / h) / h,
            Profile::Mother { c, h } => (bspline((u - c) / h) - bspline((u + c) / h)) / h,
        }
    }

    /// `int f(u) e^{-i u w} du`.
    pub fn fourier(&self, w: f64) -> Complex64 {
        match *self {
            Profile::Father { h } => Complex64::new(bspline_hat(h * w), 0.0),
            Profile::Mother { c, h } => Complex64::new(0.0, -2.0 * (c * w).sin() * bspline_hat(h * w)),
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            Profile::Father { .. } => 1.0,
            Profile::Mother { .. } => 0.0,
        }
    }

    /// Half-width of the support.
    pub fn reach(&self) -> f64 {
        match *self {
            Profile::Father { h } => 2.0 * h,
            Profile::Mother { c, h } => c + 2.0 * h,
        }
    }

    pub fn sup(&self) -> f64 {
        match *self {
            Profile::Father { h } => 2.0 / (3.0 * h),
            Profile::Mother { c, h } => {
                if c >= 2.0 * h {
                    2.0 / (3.0 * h)
                } else {
                    (0..=400)
                        .map(|k| self.value(-self.reach() + k as f64 * self.reach() / 200.0).abs())
                        .fold(0.0, f64::max)
                }
            }
        }
    }
}

pub const TIME_FATHER: Profile = Profile::Father { h: 0.25 };
pub const SPACE_FATHER: Profile = Profile::Father { h: 0.175 };
pub const TIME_MOTHER: Profile = Profile::Mother { c: 0.25, h: 0.125 };
pub const SPACE_MOTHER: Profile = Profile::Mother { c: 0.35, h: 0.0875 };

/// Unscaled tensor test function `psi(t, x) = f(t) g(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestShape {
    pub time: Profile,
    pub space: Profile,
}

impl TestShape {
    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.time.value(t) * self.space.value(x)
    }

    pub fn mass(&self) -> f64 {
        self.time.mass() * self.space.mass()
    }

    pub fn is_mean_zero(&self) -> bool {
        self.mass() == 0.0
    }

    /// Parabolic radius of the support box corner.
    pub fn radius(&self) -> f64 {
        (self.time.reach() + self.space.reach().powi(2)).sqrt()
    }
}

/// The four tensor products of father and mother profiles.
pub fn standard_family() -> Vec<TestShape> {
    let mut out = Vec::with_capacity(4);
    for time in [TIME_FATHER, TIME_MOTHER] {
        for space in [SPACE_FATHER, SPACE_MOTHER] {
            out.push(TestShape { time, space });
        }
    }
    out
}

/// A test shape placed at scale `delta` around `center`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunction {
    pub shape: TestShape,
    pub delta: f64,
    pub center: Point,
}

/// `S^delta_center psi`.
pub fn scale_test(shape: TestShape, delta: f64, center: Point) -> Result<TestFunction> {
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid(format!("scale must lie in (0, 1], got {delta}"));
    }
    Ok(TestFunction { shape, delta, center })
}

impl TestFunction {
    pub fn value(&self, t: f64, x: f64) -> f64 {
        let d = self.delta;
        self.shape.value((t - self.center[0]) / (d * d), (x - self.center[1]) / d) / (d * d * d)
    }

    pub fn mass(&self) -> f64 {
        self.shape.mass()
    }

    pub fn sup(&self) -> f64 {
        self.shape.time.sup() * self.shape.space.sup() / self.delta.powi(3)
    }
}

/// Fields that can be paired with scaled test functions on tensor sets of
/// centers.
pub trait Pairing {
    /// `<F, S^delta_{(s, y)} psi>` for every `s` in `ts` and `y` in `xs`.
    fn pair_grid(&self, psi: &TestShape, delta: f64, ts: &[f64], xs: &[f64]) -> Result<Array2<f64>>;

    fn pair(&self, psi: &TestFunction) -> Result<f64> {
        Ok(self.pair_grid(&psi.shape, psi.delta, &[psi.center[0]], &[psi.center[1]])?[[0, 0]])
    }
}

impl Pairing for SpectralField {
    fn pair_grid(&self, psi: &TestShape, delta: f64, ts: &[f64], xs: &[f64]) -> Result<Array2<f64>> {
        Ok(SpectralField::pair_grid(self, psi, delta, ts, xs))
    }
}

/// Trapezoid weights times the scaled profile, one row per center.
fn profile_matrix(
    p: &Profile,
    scale: f64,
    centers: &[f64],
    start: f64,
    step: f64,
    len: usize,
) -> Array2<f64> {
    Array2::from_shape_fn((centers.len(), len), |(a, i)| {
        let w = if i == 0 || i + 1 == len { 0.5 } else { 1.0 };
        w * step * p.value((start + i as f64 * step - centers[a]) / scale) / scale
    })
}

impl Pairing for GriddedField {
    /// Trapezoidal quadrature on the field's nodes. Requires at least four
    /// nodes per scaled unit and the whole support inside the grid.
    fn pair_grid(&self, psi: &TestShape, delta: f64, ts: &[f64], xs: &[f64]) -> Result<Array2<f64>> {
        let (st, sx) = (delta * delta, delta);
        if self.t.step > st / 4.0 * (1.0 + 1e-12) {
            return Err(Error::UnderResolved { what: "time step for pairing", required: st / 4.0, actual: self.t.step });
        }
        if self.x.step > sx / 4.0 * (1.0 + 1e-12) {
            return Err(Error::UnderResolved { what: "space step for pairing", required: sx / 4.0, actual: self.x.step });
        }
        let (rt, rx) = (psi.time.reach() * st, psi.space.reach() * sx);
        let tol = 1e-9;
        for &s in ts {
            if s - rt < self.t.start - tol || s + rt > self.t.end() + tol {
                return Err(Error::OutOfDomain(format!("test support around t = {s} leaves the grid")));
            }
        }
        for &y in xs {
            if y - rx < self.x.start - tol || y + rx > self.x.end() + tol {
                return Err(Error::OutOfDomain(format!("test support around x = {y} leaves the grid")));
            }
        }
        let mt = profile_matrix(&psi.time, st, ts, self.t.start, self.t.step, self.t.len);
        let mx = profile_matrix(&psi.space, sx, xs, self.x.start, self.x.step, self.x.len);
        Ok(mt.dot(&self.values).dot(&mx.t()))
    }
}

/// `sup_{psi, l <= max_level, z in lattice(l) within region} 2^{l alpha} |<F, S^{2^-l}_z psi>|`.
pub fn besov_estimate(
    field: &dyn Pairing,
    family: &[TestShape],
    alpha: f64,
    region: &Region,
    max_level: u32,
) -> Result<f64> {
    if family.is_empty() {
        return invalid("test family is empty");
    }
    if alpha >= 0.0 {
        return invalid(format!("Besov estimate needs a negative exponent, got {alpha}"));
    }
    let mut best = 0.0f64;
    for l in 0..=max_level {
        let (ts, xs) = dyadic_axes(l, region);
        if ts.is_empty() || xs.is_empty() {
            continue;
        }
        let delta = 2f64.powi(-(l as i32));
        let w = 2f64.powf(l as f64 * alpha);
        for psi in family {
            let p = field.pair_grid(psi, delta, &ts, &xs)?;
            best = best.max(w * p.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }
    Ok(best)
}

/// Every `ceil(len / max)`-th entry, keeping at most `max`.
pub fn thin(v: &[f64], max: usize) -> Vec<f64> {
    if max == 0 || v.len() <= max {
        return v.to_vec();
    }
    let stride = v.len().div_ceil(max);
    v.iter().step_by(stride).copied().collect()
}

/// Root-mean-square pairing per level and the fitted exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityFit {
    pub levels: Vec<u32>,
    pub rms: Vec<f64>,
    /// Fitted exponent: `rms ~ 2^{-l alpha}`.
    pub alpha: f64,
    pub fit: LineFit,
}

/// Fit `log2 RMS_l = -alpha l + c` over `levels`.
///
/// The RMS at each level runs over the mean-zero members of `family` and
/// the dyadic lattice in `region`, thinned to at most `max_per_axis` centers
/// per axis. Mean-zero members are used so that positive exponents are
/// visible; a member with mass would see the local value of the field.
pub fn regularity_slope(
    field: &dyn Pairing,
    family: &[TestShape],
    region: &Region,
    levels: &[u32],
    max_per_axis: usize,
) -> Result<RegularityFit> {
    if levels.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 levels, got {}", levels.len())));
    }
    let members: Vec<&TestShape> = family.iter().filter(|p| p.is_mean_zero()).collect();
    if members.is_empty() {
        return invalid("family has no mean-zero member");
    }
    let mut rms = Vec::with_capacity(levels.len());
    for &l in levels {
        let (ts, xs) = dyadic_axes(l, region);
        let (ts, xs) = (thin(&ts, max_per_axis), thin(&xs, max_per_axis));
        if ts.is_empty() || xs.is_empty() {
            return Err(Error::OutOfDomain(format!("region holds no lattice point at level {l}")));
        }
        let delta = 2f64.powi(-(l as i32));
        let mut acc = 0.0;
        let mut count = 0usize;
        for psi in &members {
            let p = field.pair_grid(psi, delta, &ts, &xs)?;
            acc += p.iter().map(|v| v * v).sum::<f64>();
            count += p.len();
        }
        rms.push((acc / count as f64).sqrt());
    }
    if rms.iter().any(|&r| r <= 0.0 || !r.is_finite()) {
        return Err(Error::DegenerateFit("a level has zero pairing variance".into()));
    }
    let x: Vec<f64> = levels.iter().map(|&l| l as f64).collect();
    let y: Vec<f64> = rms.iter().map(|r| r.log2()).collect();
    let fit = linear_fit(&x, &y)?;
    Ok(RegularityFit { levels: levels.to_vec(), rms, alpha: -fit.slope, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parabolic::Axis;
    use crate::quadrature::Rule;
    use proptest::prelude::*;

    fn integrate_profile(p: &Profile, f: impl Fn(f64) -> f64) -> f64 {
        let mut r = Rule::default();
        let a = p.reach();
        r.push_panels(-a, a, 1024, 8, 0.0);
        r.integrate(|u| p.value(u) * f(u))
    }

    #[test]
    fn profiles_have_declared_mass_and_transform() {
        for p in [TIME_FATHER, SPACE_FATHER, TIME_MOTHER, SPACE_MOTHER] {
            assert!((integrate_profile(&p, |_| 1.0) - p.mass()).abs() < 1e-12);
            for w in [0.0, 1.3, 7.0, 25.0] {
                let re = integrate_profile(&p, |u| (u * w).cos());
                let im = -integrate_profile(&p, |u| (u * w).sin());
                let f = p.fourier(w);
                assert!((f.re - re).abs() < 1e-10 && (f.im - im).abs() < 1e-10, "{p:?} {w}");
            }
        }
    }

    #[test]
    fn family_fits_in_unit_ball() {
        let fam = standard_family();
        assert_eq!(fam.len(), 4);
        assert!(fam.iter().all(|p| p.radius() < 1.0));
        assert!(fam.iter().any(|p| p.is_mean_zero()) && fam.iter().any(|p| !p.is_mean_zero()));
    }

    #[test]
    fn scaling_preserves_mass_and_scales_sup() {
        let f = scale_test(standard_family()[0], 0.25, [0.3, -0.2]).unwrap();
        assert!((f.sup() - standard_family()[0].time.sup() * standard_family()[0].space.sup() * 64.0).abs() < 1e-9);
        let t = Axis::spanning(0.2, 0.4, 401).unwrap();
        let x = Axis::spanning(-0.4, 0.0, 401).unwrap();
        let g = GriddedField::from_fn(t, x, |_, _| 1.0);
        assert!((g.pair(&f).unwrap() - 1.0).abs() < 1e-6);
        assert!(scale_test(standard_family()[0], 1.5, [0.0, 0.0]).is_err());
    }

    #[test]
    fn pairing_checks_resolution_and_support() {
        let t = Axis::spanning(0.0, 1.0, 11).unwrap();
        let x = Axis::spanning(0.0, 1.0, 11).unwrap();
        let g = GriddedField::from_fn(t, x, |_, _| 1.0);
        let psi = standard_family()[0];
        assert!(matches!(g.pair_grid(&psi, 0.25, &[0.5], &[0.5]), Err(Error::UnderResolved { .. })));
        let t = Axis::spanning(0.0, 1.0, 401).unwrap();
        let g = GriddedField::from_fn(t, x, |_, _| 1.0);
        assert!(matches!(g.pair_grid(&psi, 1.0, &[0.1], &[0.5]), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn constant_field_estimate() {
        let t = Axis::spanning(-1.0, 2.0, 769).unwrap();
        let x = Axis::spanning(-1.0, 2.0, 97).unwrap();
        let g = GriddedField::from_fn(t, x, |_, _| 2.0);
        let r = Region::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let e = besov_estimate(&g, &standard_family(), -0.5, &r, 2).unwrap();
        assert!((e - 2.0).abs() < 1e-4, "{e}");
    }

    #[test]
    fn smooth_bump_saturates() {
        let t = Axis::spanning(-1.0, 2.0, 3073).unwrap();
        let x = Axis::spanning(-2.0, 2.0, 513).unwrap();
        let g = GriddedField::from_fn(t, x, |a, b| (-(a - 0.5).powi(2) - b * b).exp());
        let r = Region::new(0.0, 1.0, -1.0, 1.0).unwrap();
        let fit = regularity_slope(&g, &standard_family(), &r, &[1, 2, 3, 4], 16).unwrap();
        assert!(fit.alpha >= 0.95, "{fit:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn estimate_is_homogeneous_and_monotone(c in -3.0f64..3.0, k in 1.0f64..5.0) {
            let t = Axis::spanning(-1.0, 2.0, 769).unwrap();
            let x = Axis::spanning(-1.0, 2.0, 97).unwrap();
            let f = GriddedField::from_fn(t, x, |a, b| (k * a).sin() * (2.0 * b).cos());
            let g = GriddedField::new(t, x, f.values.mapv(|v| c * v)).unwrap();
            let r = Region::new(0.0, 1.0, 0.0, 1.0).unwrap();
            let fam = standard_family();
            let a = besov_estimate(&f, &fam, -0.5, &r, 2).unwrap();
            let b = besov_estimate(&g, &fam, -0.5, &r, 2).unwrap();
            prop_assert!((b - c.abs() * a).abs() <= 1e-12 * (1.0 + b));
            let lower = besov_estimate(&f, &fam, -1.0, &r, 2).unwrap();
            prop_assert!(a >= lower);
        }
    }
}
