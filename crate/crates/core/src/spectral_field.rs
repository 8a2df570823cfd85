//! Spectral simulation of the truncated fractional sheet and its noise density.
//!
//! The sheet is a finite sum over a frequency lattice covering the truncation
//! box `[-2^2n, 2^2n] x [-2^n, 2^n]`:
//!
//! ```text
//! X^n(t, x) = c * sum Z (e^{it xi} - 1)|xi|^{-H1-1/2} (e^{ix eta} - 1)|eta|^{-H2-1/2} sqrt(w v)
//! ```
//!
//! with Hermitian coefficients so the field is real. The noise density is the
//! mixed derivative, which multiplies each mode by `(i xi)(i eta)`.
//!
//! The lattice is a midpoint mesh per axis: geometric octaves toward the
//! origin, a uniform band near it, then octaves split into equal cells out to
//! the cutoff. Every cell edge at a power of two is shared by all truncation
//! levels, so a coarser level is a prefix of a finer one. Coefficients are
//! drawn from one stream per time-frequency cell, in a fixed space-frequency
//! order, which makes realizations at different `n` coupled.

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

use crate::besov::TestShape;
use crate::error::invalid;
use crate::linalg;
use crate::parabolic::Point;
use crate::quadrature::Rule;
use crate::{Error, Result};

/// Largest truncation level accepted.
pub const MAX_LEVEL: u32 = 14;

/// Shape of the per-axis frequency mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeConfig {
    /// Cell width of the uniform band next to the origin.
    pub band_width: f64,
    /// Upper edge of the uniform band; octave cells start here.
    pub band_edge: f64,
    /// Equal cells per octave above the band.
    pub cells_per_octave: usize,
    /// Equal cells per octave in the geometric refinement below the band.
    pub inner_cells_per_octave: usize,
    /// Bound on `int_0^eps |xi|^(1-2H)` for the omitted piece at the origin.
    pub origin_mass: f64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            band_width: 0.25,
            band_edge: 8.0,
            cells_per_octave: 16,
            inner_cells_per_octave: 4,
            origin_mass: 1e-6,
        }
    }
}

fn is_power_of_two(v: f64) -> bool {
    v > 0.0 && v.log2().fract() == 0.0
}

impl LatticeConfig {
    pub fn validate(&self) -> Result<()> {
        if !is_power_of_two(self.band_width) || !is_power_of_two(self.band_edge) {
            return invalid("band width and band edge must be powers of two");
        }
        if self.band_edge < self.band_width.max(1.0) {
            return invalid("band edge must be at least max(1, band width)");
        }
        if self.band_width > 1.0 {
            return invalid("band width must not exceed 1");
        }
        if self.cells_per_octave == 0 || self.inner_cells_per_octave == 0 {
            return invalid("cells per octave must be positive");
        }
        if !(self.origin_mass > 0.0 && self.origin_mass < 1.0) {
            return invalid("origin mass must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Positive half of one axis: cell midpoints and widths, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisLattice {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Upper cell edges; `count_below(c)` uses them for restriction.
    pub edges: Vec<f64>,
}

impl AxisLattice {
    pub fn build(h: f64, cutoff: f64, cfg: &LatticeConfig) -> Result<Self> {
        cfg.validate()?;
        if !(h > 0.0 && h < 1.0) {
            return invalid(format!("Hurst index must lie in (0, 1), got {h}"));
        }
        if !is_power_of_two(cutoff) || cutoff < 1.0 {
            return invalid(format!("cutoff must be a power of two >= 1, got {cutoff}"));
        }
        let mut lat = Self { nodes: vec![], weights: vec![], edges: vec![] };
        let push_cells = |lo: f64, hi: f64, m: usize, lat: &mut Self| {
            let w = (hi - lo) / m as f64;
            for k in 0..m {
                let a = lo + k as f64 * w;
                lat.nodes.push(a + 0.5 * w);
                lat.weights.push(w);
                lat.edges.push(if k + 1 == m { hi } else { a + w });
            }
        };
        let bw = cfg.band_width;
        let p = 2.0 - 2.0 * h;
        let eps = (cfg.origin_mass * p).powf(1.0 / p);
        let j_min = ((bw / eps).log2().ceil().max(1.0)) as i32;
        for j in (1..=j_min).rev() {
            let lo = bw * 2f64.powi(-j);
            push_cells(lo, 2.0 * lo, cfg.inner_cells_per_octave, &mut lat);
        }
        let band_top = cfg.band_edge.min(cutoff);
        let nband = (band_top / bw).round() as usize;
        for k in 1..nband {
            push_cells(k as f64 * bw, (k + 1) as f64 * bw, 1, &mut lat);
        }
        let mut lo = cfg.band_edge;
        while lo < cutoff {
            push_cells(lo, 2.0 * lo, cfg.cells_per_octave, &mut lat);
            lo *= 2.0;
        }
        Ok(lat)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of cells lying inside `[0, cutoff]`.
    pub fn count_below(&self, cutoff: f64) -> usize {
        self.edges.partition_point(|&e| e <= cutoff * (1.0 + 1e-12))
    }

    pub fn prefix(&self, k: usize) -> Self {
        Self {
            nodes: self.nodes[..k].to_vec(),
            weights: self.weights[..k].to_vec(),
            edges: self.edges[..k].to_vec(),
        }
    }
}

/// Parameters of one truncated sheet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SheetSpec {
    pub h1: f64,
    pub h2: f64,
    pub n: u32,
    pub lattice: LatticeConfig,
    /// `c_{H1} c_{H2}`, fixed at construction.
    c: f64,
}

impl SheetSpec {
    pub fn new(h1: f64, h2: f64, n: u32) -> Result<Self> {
        Self::with_lattice(h1, h2, n, LatticeConfig::default())
    }

    pub fn with_lattice(h1: f64, h2: f64, n: u32, lattice: LatticeConfig) -> Result<Self> {
        for (name, h) in [("H1", h1), ("H2", h2)] {
            if !(h > 0.0 && h < 1.0) {
                return invalid(format!("{name} must lie in (0, 1), got {h}"));
            }
        }
        if n > MAX_LEVEL {
            return invalid(format!("truncation level {n} exceeds {MAX_LEVEL}"));
        }
        lattice.validate()?;
        let c = normalization_constant(h1)? * normalization_constant(h2)?;
        Ok(Self { h1, h2, n, lattice, c })
    }

    pub fn at_level(&self, n: u32) -> Result<Self> {
        if n > MAX_LEVEL {
            return invalid(format!("truncation level {n} exceeds {MAX_LEVEL}"));
        }
        Ok(Self { n, ..*self })
    }

    pub fn time_cutoff(&self) -> f64 {
        4f64.powi(self.n as i32)
    }

    pub fn space_cutoff(&self) -> f64 {
        2f64.powi(self.n as i32)
    }

    pub fn time_axis(&self) -> Result<AxisLattice> {
        AxisLattice::build(self.h1, self.time_cutoff(), &self.lattice)
    }

    pub fn space_axis(&self) -> Result<AxisLattice> {
        AxisLattice::build(self.h2, self.space_cutoff(), &self.lattice)
    }

    /// `c_{H1} c_{H2}`.
    pub fn constant(&self) -> Result<f64> {
        Ok(self.c)
    }
}

/// `c_H` with `c_H^2 int |e^{i xi} - 1|^2 |xi|^{-2H-1} d xi = 1`.
///
/// Computed by quadrature: power substitution on `[0, 1]`, Gauss-Legendre
/// panels per half period up to `A = 2 pi N`, and an asymptotic tail. The
/// result is accepted once doubling `N` changes it by less than `1e-10`.
pub fn normalization_constant(h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return invalid(format!("Hurst index must lie in (0, 1), got {h}"));
    }
    let integral = |periods: usize| -> f64 {
        // 4 int_0^inf (1 - cos u) u^(-1-2H) du
        let smooth = |u: f64| {
            let s = (0.5 * u).sin();
            2.0 * s * s
        };
        let mut near = Rule::default();
        near.push_origin(1.0, 24, 1.0 - 2.0 * h);
        let a = near.integrate(|u| if u == 0.0 { 0.5 } else { smooth(u) / (u * u) });
        let big = 2.0 * PI * periods as f64;
        let mut mid = Rule::default();
        mid.push_panels(1.0, big, 2 * periods, 16, -1.0 - 2.0 * h);
        let b = mid.integrate(smooth);
        // int_A^inf u^-beta (1 - cos u) with sin A = 0, cos A = 1.
        let beta = 1.0 + 2.0 * h;
        let tail = big.powf(-2.0 * h) / (2.0 * h) - beta * big.powf(-beta - 1.0)
            + beta * (beta + 1.0) * (beta + 2.0) * big.powf(-beta - 3.0);
        4.0 * (a + b + tail)
    };
    let coarse = integral(200);
    let fine = integral(400);
    if ((fine - coarse) / fine).abs() > 1e-10 {
        return Err(Error::Quadrature(format!(
            "normalisation for H = {h} changed by {:.2e} on refinement",
            ((fine - coarse) / fine).abs()
        )));
    }
    Ok(fine.powf(-0.5))
}

/// SplitMix64 step, used to derive per-draw seeds from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One draw of the Hermitian coefficients on a truncated lattice.
///
/// Rows index positive time frequencies; column `2q` holds `+eta_q` and
/// column `2q + 1` holds `-eta_q`. The mirror half `(-xi, -eta)` is implied
/// by conjugation.
#[derive(Clone, Debug)]
pub struct NoiseRealization {
    pub spec: SheetSpec,
    pub seed: u64,
    pub time: AxisLattice,
    pub space: AxisLattice,
    pub coeffs: Array2<Complex64>,
}

/// Draw the coefficients of `X^n` for `spec.n`.
pub fn sample_noise(spec: &SheetSpec, seed: u64) -> Result<NoiseRealization> {
    let time = spec.time_axis()?;
    let space = spec.space_axis()?;
    let (nj, nq) = (time.len(), space.len());
    let mut coeffs = Array2::<Complex64>::zeros((nj, 2 * nq));
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..nj {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        let mut row = coeffs.row_mut(j);
        for c in 0..2 * nq {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            row[c] = Complex64::new(re * scale, im * scale);
        }
    }
    Ok(NoiseRealization { spec: *spec, seed, time, space, coeffs })
}

impl NoiseRealization {
    /// The same draw truncated at a coarser level `m <= n`.
    pub fn restrict(&self, m: u32) -> Result<Self> {
        if m > self.spec.n {
            return invalid(format!("cannot restrict level {} to finer level {m}", self.spec.n));
        }
        let spec = self.spec.at_level(m)?;
        let nj = self.time.count_below(spec.time_cutoff());
        let nq = self.space.count_below(spec.space_cutoff());
        Ok(Self {
            spec,
            seed: self.seed,
            time: self.time.prefix(nj),
            space: self.space.prefix(nq),
            coeffs: self.coeffs.slice(ndarray::s![..nj, ..2 * nq]).to_owned(),
        })
    }

    /// Signed space frequencies in column order.
    pub fn signed_space(&self) -> Vec<f64> {
        self.space.nodes.iter().flat_map(|&e| [e, -e]).collect()
    }

    fn signed_space_weights(&self) -> Vec<f64> {
        self.space.weights.iter().flat_map(|&w| [w, w]).collect()
    }

    fn amplitudes(&self, time_power: f64, space_power: f64) -> (Vec<f64>, Vec<f64>) {
        let a = self
            .time
            .nodes
            .iter()
            .zip(&self.time.weights)
            .map(|(&xi, &w)| xi.powf(time_power) * w.sqrt())
            .collect();
        let b = self
            .signed_space()
            .iter()
            .zip(self.signed_space_weights())
            .map(|(&e, w)| e.abs().powf(space_power) * w.sqrt())
            .collect();
        (a, b)
    }

    /// The sheet `X^n` as a spectral field.
    pub fn sheet(&self) -> Result<SpectralField> {
        let c = self.spec.constant()?;
        let (a, b) = self.amplitudes(-self.spec.h1 - 0.5, -self.spec.h2 - 0.5);
        let coeffs = Array2::from_shape_fn(self.coeffs.dim(), |(j, l)| self.coeffs[[j, l]] * (c * a[j] * b[l]));
        Ok(SpectralField {
            xi: self.time.nodes.clone(),
            eta: self.signed_space(),
            coeffs,
            modes: Modes::Increment,
        })
    }

    /// The noise density `xi^n = d_t d_x X^n` as a spectral field.
    pub fn noise(&self) -> Result<SpectralField> {
        let c = self.spec.constant()?;
        let (a, b) = self.amplitudes(-self.spec.h1 - 0.5, -self.spec.h2 - 0.5);
        let eta = self.signed_space();
        let xi = &self.time.nodes;
        // (i xi)(i eta) = -xi eta
        let coeffs = Array2::from_shape_fn(self.coeffs.dim(), |(j, l)| {
            self.coeffs[[j, l]] * (-c * xi[j] * eta[l] * a[j] * b[l])
        });
        Ok(SpectralField { xi: xi.clone(), eta, coeffs, modes: Modes::Exponential })
    }
}

/// How a lattice mode depends on the point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Modes {
    /// `e^{i(t xi + x eta)}`
    Exponential,
    /// `(e^{it xi} - 1)(e^{ix eta} - 1)`
    Increment,
}

/// A real field `2 Re sum_{j,l} C_jl T_j(t) S_l(x)` over a half lattice.
#[derive(Clone, Debug)]
pub struct SpectralField {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub coeffs: Array2<Complex64>,
    pub modes: Modes,
}

impl SpectralField {
    /// Multiply every coefficient by a Fourier multiplier sampled on the lattice.
    pub fn with_multiplier(&self, m: &Array2<Complex64>) -> Result<Self> {
        if m.dim() != self.coeffs.dim() {
            return invalid(format!(
                "multiplier shape {:?} does not match lattice {:?}",
                m.dim(),
                self.coeffs.dim()
            ));
        }
        Ok(Self { coeffs: &self.coeffs * m, ..self.clone() })
    }

    /// `2 Re (T C S)` for mode matrices `T` (points x J) and `S` (L x points).
    pub fn apply(&self, tm: &Array2<Complex64>, sm: &Array2<Complex64>) -> Array2<f64> {
        let y = linalg::cmatmul(&self.coeffs, sm);
        linalg::re_cmatmul(tm, &y) * 2.0
    }

    fn time_modes(&self, ts: &[f64]) -> Array2<Complex64> {
        let shift = if self.modes == Modes::Increment { 1.0 } else { 0.0 };
        Array2::from_shape_fn((ts.len(), self.xi.len()), |(a, j)| {
            Complex64::from_polar(1.0, ts[a] * self.xi[j]) - shift
        })
    }

    fn space_modes(&self, xs: &[f64]) -> Array2<Complex64> {
        let shift = if self.modes == Modes::Increment { 1.0 } else { 0.0 };
        Array2::from_shape_fn((self.eta.len(), xs.len()), |(l, b)| {
            Complex64::from_polar(1.0, xs[b] * self.eta[l]) - shift
        })
    }

    /// Values on the tensor grid `ts x xs`.
    pub fn eval_grid(&self, ts: &[f64], xs: &[f64]) -> Array2<f64> {
        self.apply(&self.time_modes(ts), &self.space_modes(xs))
    }

    /// `C S(xs)`, shared by every time slice on the same spatial nodes.
    pub fn reduce_space(&self, xs: &[f64]) -> Array2<Complex64> {
        linalg::cmatmul(&self.coeffs, &self.space_modes(xs))
    }

    /// Rows `ts` of a grid whose spatial part came from [`Self::reduce_space`].
    pub fn eval_reduced(&self, reduced: &Array2<Complex64>, ts: &[f64]) -> Array2<f64> {
        linalg::re_cmatmul(&self.time_modes(ts), reduced) * 2.0
    }

    /// Value at one point by direct summation.
    pub fn eval_point(&self, z: Point) -> f64 {
        let shift = if self.modes == Modes::Increment { 1.0 } else { 0.0 };
        let s: Vec<Complex64> = self
            .eta
            .iter()
            .map(|&e| Complex64::from_polar(1.0, z[1] * e) - shift)
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &xi) in self.xi.iter().enumerate() {
            let row = self.coeffs.row(j);
            let inner: Complex64 = row.iter().zip(&s).map(|(c, s)| c * s).sum();
            acc += (Complex64::from_polar(1.0, z[0] * xi) - shift) * inner;
        }
        2.0 * acc.re
    }

    /// Pairings `<F, S^delta_{(s,y)} psi>` for `s` in `ts` and `y` in `xs`.
    pub fn pair_grid(&self, psi: &TestShape, delta: f64, ts: &[f64], xs: &[f64]) -> Array2<f64> {
        let inc = self.modes == Modes::Increment;
        let f0 = psi.time.fourier(0.0);
        let g0 = psi.space.fourier(0.0);
        let fh: Vec<Complex64> = self.xi.iter().map(|&xi| psi.time.fourier(-delta * delta * xi)).collect();
        let gh: Vec<Complex64> = self.eta.iter().map(|&e| psi.space.fourier(-delta * e)).collect();
        let tm = Array2::from_shape_fn((ts.len(), self.xi.len()), |(a, j)| {
            let v = Complex64::from_polar(1.0, ts[a] * self.xi[j]) * fh[j];
            if inc { v - f0 } else { v }
        });
        let sm = Array2::from_shape_fn((self.eta.len(), xs.len()), |(l, b)| {
            let v = Complex64::from_polar(1.0, xs[b] * self.eta[l]) * gh[l];
            if inc { v - g0 } else { v }
        });
        self.apply(&tm, &sm)
    }
}

/// `X^n` at scattered points.
pub fn eval_sheet(real: &NoiseRealization, points: &[Point]) -> Result<Vec<f64>> {
    let f = real.sheet()?;
    Ok(points.iter().map(|&p| f.eval_point(p)).collect())
}

/// `xi^n` at scattered points.
pub fn eval_noise_density(real: &NoiseRealization, points: &[Point]) -> Result<Vec<f64>> {
    let f = real.noise()?;
    Ok(points.iter().map(|&p| f.eval_point(p)).collect())
}

/// Full-axis sum `sum w |xi|^{-2H-1} (e^{is xi} - 1)(e^{-it xi} - 1)`.
fn axis_covariance(lat: &AxisLattice, h: f64, s: f64, t: f64) -> f64 {
    let mut acc = 0.0;
    for (&xi, &w) in lat.nodes.iter().zip(&lat.weights) {
        let a = Complex64::from_polar(1.0, s * xi) - 1.0;
        let b = Complex64::from_polar(1.0, -t * xi) - 1.0;
        acc += w * xi.powf(-2.0 * h - 1.0) * (a * b).re;
    }
    2.0 * acc
}

/// `E[X^n(p) X^n(q)]` on the lattice, by separable quadrature.
pub fn exact_second_moment(spec: &SheetSpec, p: Point, q: Point) -> Result<f64> {
    let c = spec.constant()?;
    let it = axis_covariance(&spec.time_axis()?, spec.h1, p[0], q[0]);
    let ix = axis_covariance(&spec.space_axis()?, spec.h2, p[1], q[1]);
    Ok(c * c * it * ix)
}

/// `E |rectangular increment of X^n over a t x y box|^2`.
pub fn exact_increment_moment(spec: &SheetSpec, t: f64, y: f64) -> Result<f64> {
    exact_second_moment(spec, [t, y], [t, y])
}

/// `E |<xi^n, S^{2^-level} psi>|^2`, optionally after a Fourier multiplier
/// given on the half lattice (for example the transform of a kernel).
pub fn exact_test_moment(
    spec: &SheetSpec,
    psi: &TestShape,
    level: u32,
    multiplier: Option<&Array2<Complex64>>,
) -> Result<f64> {
    let c = spec.constant()?;
    let delta = 2f64.powi(-(level as i32));
    let time = spec.time_axis()?;
    let space = spec.space_axis()?;
    let ft: Vec<f64> = time
        .nodes
        .iter()
        .zip(&time.weights)
        .map(|(&xi, &w)| w * xi.powf(1.0 - 2.0 * spec.h1) * psi.time.fourier(delta * delta * xi).norm_sqr())
        .collect();
    let gs: Vec<f64> = space
        .nodes
        .iter()
        .zip(&space.weights)
        .flat_map(|(&e, &v)| {
            let g = v * e.powf(1.0 - 2.0 * spec.h2);
            [g * psi.space.fourier(delta * e).norm_sqr(), g * psi.space.fourier(-delta * e).norm_sqr()]
        })
        .collect();
    let total = match multiplier {
        None => 2.0 * ft.iter().sum::<f64>() * gs.iter().sum::<f64>(),
        Some(m) => {
            if m.dim() != (ft.len(), gs.len()) {
                return invalid("multiplier shape does not match lattice");
            }
            let mut acc = 0.0;
            for (j, &a) in ft.iter().enumerate() {
                for (l, &b) in gs.iter().enumerate() {
                    acc += a * b * m[[j, l]].norm_sqr();
                }
            }
            2.0 * acc
        }
    };
    Ok(c * c * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::function::gamma::gamma;

    /// Closed form of `int |e^{i xi} - 1|^2 |xi|^{-2H-1}`.
    fn closed_form(h: f64) -> f64 {
        2.0 * PI / (gamma(2.0 * h + 1.0) * (PI * h).sin())
    }

    #[test]
    fn normalization_matches_closed_form() {
        for h in [0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95] {
            let c = normalization_constant(h).unwrap();
            let want = closed_form(h).powf(-0.5);
            assert!((c - want).abs() / want < 1e-9, "H={h}: {c} vs {want}");
        }
        let c = normalization_constant(0.5).unwrap();
        assert!((c - (2.0 * PI).powf(-0.5)).abs() < 1e-10);
    }

    #[test]
    fn lattice_is_prefix_stable() {
        let cfg = LatticeConfig::default();
        let fine = AxisLattice::build(0.7, 4f64.powi(6), &cfg).unwrap();
        let coarse = AxisLattice::build(0.7, 4f64.powi(3), &cfg).unwrap();
        let k = fine.count_below(4f64.powi(3));
        assert_eq!(k, coarse.len());
        assert_eq!(fine.prefix(k), coarse);
        let tot: f64 = fine.weights.iter().sum();
        assert!((tot - 4096.0).abs() < 1e-6);
    }

    #[test]
    fn restriction_is_coupled() {
        let spec = SheetSpec::new(0.6, 0.7, 4).unwrap();
        let fine = sample_noise(&spec, 11).unwrap();
        let direct = sample_noise(&spec.at_level(2).unwrap(), 11).unwrap();
        let restricted = fine.restrict(2).unwrap();
        assert_eq!(restricted.coeffs, direct.coeffs);
        assert_eq!(restricted.time, direct.time);
        assert!(fine.restrict(5).is_err());
    }

    #[test]
    fn grid_and_point_evaluation_agree() {
        let spec = SheetSpec::new(0.6, 0.8, 3).unwrap();
        let real = sample_noise(&spec, 5).unwrap();
        for f in [real.sheet().unwrap(), real.noise().unwrap()] {
            let ts = [0.1, 0.37];
            let xs = [-0.2, 0.0, 0.9];
            let g = f.eval_grid(&ts, &xs);
            for (a, &t) in ts.iter().enumerate() {
                for (b, &x) in xs.iter().enumerate() {
                    let p = f.eval_point([t, x]);
                    assert!((g[[a, b]] - p).abs() <= 1e-10 * (1.0 + p.abs()));
                }
            }
        }
    }

    #[test]
    fn sheet_vanishes_on_axes() {
        let spec = SheetSpec::new(0.5, 0.5, 3).unwrap();
        let real = sample_noise(&spec, 1).unwrap();
        let v = eval_sheet(&real, &[[0.0, 0.7], [0.4, 0.0]]).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn brownian_sheet_covariance_on_lattice() {
        // H = 1/2 gives min(s,t) min(x,y) in the limit; n = 8 is close.
        let spec = SheetSpec::new(0.5, 0.5, 8).unwrap();
        for (p, q) in [([0.5, 0.5], [1.0, 1.0]), ([1.0, 0.5], [0.5, 1.0]), ([1.0, 1.0], [1.0, 1.0])] {
            let got = exact_second_moment(&spec, p, q).unwrap();
            let want = p[0].min(q[0]) * p[1].min(q[1]);
            assert!((got - want).abs() / want < 0.02, "{p:?} {q:?}: {got} vs {want}");
        }
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(SheetSpec::new(1.0, 0.5, 3).is_err());
        assert!(SheetSpec::new(0.5, 0.0, 3).is_err());
        assert!(SheetSpec::new(0.5, 0.5, MAX_LEVEL + 1).is_err());
        assert!(normalization_constant(1.2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn field_is_real_and_seed_deterministic(seed in 0u64..1_000_000, t in 0.0f64..1.0, x in -1.0f64..1.0) {
            let spec = SheetSpec::new(0.7, 0.6, 2).unwrap();
            let a = sample_noise(&spec, seed).unwrap();
            let b = sample_noise(&spec, seed).unwrap();
            prop_assert_eq!(&a.coeffs, &b.coeffs);
            let va = eval_noise_density(&a, &[[t, x]]).unwrap()[0];
            prop_assert!(va.is_finite());
        }

        #[test]
        fn second_moment_is_symmetric(s in 0.0f64..2.0, t in 0.0f64..2.0, x in 0.0f64..2.0, y in 0.0f64..2.0) {
            let spec = SheetSpec::new(0.7, 0.4, 3).unwrap();
            let a = exact_second_moment(&spec, [s, x], [t, y]).unwrap();
            let b = exact_second_moment(&spec, [t, y], [s, x]).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
