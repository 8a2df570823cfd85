//! Renormalisation constants and kernel-driven Levy areas of the truncated
//! noise.
//!
//! The constant is
//!
//! ```text
//! C^n = c^2 int_{D_n} Re K^(xi, eta) |xi|^{1-2H1} |eta|^{1-2H2} d xi d eta.
//! ```
//!
//! Writing `K^ = sum_k 4^-k K_0^(4^-k xi, 2^-k eta)` and rescaling each term
//! gives `C^n = c^2 sum_{k >= 0} 2^{k g} J(n - k)` with `g = 4 - 4H1 - 2H2`
//! and `J(m) = int_{D_m} Re K_0^(u, v) |u|^a |v|^b`. Since `K_0` is even in
//! `x`, `J(m) = int int K_0(t, x) A_m(t) B_m(x) dt dx` with
//! `A_m(t) = int_{|u| <= 4^m} |u|^a cos(tu) du` and `B_m` the analogue in
//! space. Everything is a product of one-dimensional Gauss-Legendre sums, so
//! the constant is real by construction.

use ndarray::{s, Array2};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::besov::TestShape;
use crate::error::invalid;
use crate::heat_kernel::{K0Transform, KernelDecomposition};
use crate::parabolic::{Axis, GriddedField, Point};
use crate::quadrature::Rule;
use crate::spectral_field::{derive_seed, normalization_constant, sample_noise, NoiseRealization, SheetSpec, SpectralField};
use crate::stats::mean_se;
use crate::{Error, Result};

/// Resolution of the constant's quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenormSettings {
    /// Largest time frequency of `K_0^` kept.
    pub u_cap: f64,
    /// Largest space frequency of `K_0^` kept.
    pub v_cap: f64,
    /// Gauss-Legendre panel width in frequency.
    pub panel_width: f64,
    pub order: usize,
    /// `J(m)` is treated as zero below this level.
    pub m_lo: i32,
}

impl Default for RenormSettings {
    fn default() -> Self {
        Self { u_cap: 4096.0, v_cap: 256.0, panel_width: 4.0, order: 12, m_lo: -30 }
    }
}

impl RenormSettings {
    /// A finer mesh used to estimate the quadrature error.
    pub fn refined(&self) -> Self {
        Self {
            u_cap: self.u_cap * 1.5,
            v_cap: self.v_cap * 1.5,
            panel_width: self.panel_width * 0.75,
            order: self.order + 2,
            m_lo: self.m_lo - 4,
        }
    }
}

/// `C^n` with quadrature metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct RenormConstant {
    pub n: u32,
    pub h1: f64,
    pub h2: f64,
    pub value: f64,
    /// Relative change against the refined mesh.
    pub rel_error: f64,
    pub settings: RenormSettings,
}

/// Checks `5/3 < 2 H1 + H2 <= 2`.
pub fn check_renorm_regime(h1: f64, h2: f64) -> Result<()> {
    for h in [h1, h2] {
        if !(h > 0.0 && h < 1.0) {
            return invalid(format!("Hurst index must lie in (0, 1), got {h}"));
        }
    }
    let s = 2.0 * h1 + h2;
    if !(s > 5.0 / 3.0 && s <= 2.0 + 1e-12) {
        return invalid(format!("renormalisation needs 5/3 < 2 H1 + H2 <= 2, got {s}"));
    }
    Ok(())
}

/// Rows `m - m_lo` of `int_{|u| <= min(base^m, cap)} |u|^p cos(node u) du`.
fn cumulative_cos_moments(nodes: &[f64], power: f64, base: f64, m_lo: i32, m_hi: i32, cap: f64, st: &RenormSettings) -> Array2<f64> {
    let rows = (m_hi - m_lo + 1) as usize;
    let mut out = Array2::<f64>::zeros((rows, nodes.len()));
    let mut acc = vec![0.0; nodes.len()];
    let add_rule = |r: &Rule, acc: &mut Vec<f64>| {
        for (a, &t) in acc.iter_mut().zip(nodes) {
            *a += 2.0 * r.nodes.iter().zip(&r.weights).map(|(&u, &w)| w * (t * u).cos()).sum::<f64>();
        }
    };
    let mut origin = Rule::default();
    origin.push_origin(base.powi(m_lo).min(cap), st.order, power);
    add_rule(&origin, &mut acc);
    out.row_mut(0).assign(&ndarray::ArrayView1::from(&acc[..]));
    for m in m_lo + 1..=m_hi {
        let lo = base.powi(m - 1);
        let hi = base.powi(m).min(cap);
        if hi > lo {
            let mut r = Rule::default();
            let panels = ((hi - lo) / st.panel_width).ceil().max(1.0) as usize;
            r.push_panels(lo, hi, panels, st.order, power);
            add_rule(&r, &mut acc);
        }
        out.row_mut((m - m_lo) as usize).assign(&ndarray::ArrayView1::from(&acc[..]));
    }
    out
}

/// `J(m)` for `m_lo <= m <= m_hi` at one mesh.
#[derive(Clone, Debug)]
pub struct RenormTable {
    pub h1: f64,
    pub h2: f64,
    pub settings: RenormSettings,
    m_hi: i32,
    j: Vec<f64>,
    c2: f64,
}

impl RenormTable {
    pub fn new(h1: f64, h2: f64, n_max: u32, settings: RenormSettings) -> Result<Self> {
        check_renorm_regime(h1, h2)?;
        let tr = K0Transform::new(settings.u_cap, settings.v_cap);
        let (tn, xn, w) = tr.tables();
        let (a, b) = (1.0 - 2.0 * h1, 1.0 - 2.0 * h2);
        let m_hi = n_max as i32;
        let am = cumulative_cos_moments(tn, a, 4.0, settings.m_lo, m_hi, settings.u_cap, &settings);
        let bm = cumulative_cos_moments(xn, b, 2.0, settings.m_lo, m_hi, settings.v_cap, &settings);
        let wb = w.dot(&bm.t());
        let j = (0..am.nrows())
            .map(|r| am.row(r).iter().zip(wb.column(r)).map(|(x, y)| x * y).sum())
            .collect();
        let c = normalization_constant(h1)? * normalization_constant(h2)?;
        Ok(Self { h1, h2, settings, m_hi, j, c2: c * c })
    }

    pub fn j(&self, m: i32) -> f64 {
        if m < self.settings.m_lo {
            0.0
        } else {
            self.j[(m.min(self.m_hi) - self.settings.m_lo) as usize]
        }
    }

    pub fn value(&self, n: u32) -> Result<f64> {
        if n as i32 > self.m_hi {
            return invalid(format!("table built up to n = {}, asked for {n}", self.m_hi));
        }
        let g = 4.0 - 4.0 * self.h1 - 2.0 * self.h2;
        let mut acc = 0.0;
        for k in 0..=(n as i32 - self.settings.m_lo) {
            acc += 2f64.powf(k as f64 * g) * self.j(n as i32 - k);
        }
        Ok(self.c2 * acc)
    }
}

/// `C^n` for `n` in `ns`, each with a refinement error estimate.
pub fn renorm_constants(ns: &[u32], h1: f64, h2: f64, settings: RenormSettings) -> Result<Vec<RenormConstant>> {
    let n_max = ns.iter().copied().max().unwrap_or(0);
    let base = RenormTable::new(h1, h2, n_max, settings)?;
    let fine = RenormTable::new(h1, h2, n_max, settings.refined())?;
    ns.iter()
        .map(|&n| {
            let value = base.value(n)?;
            let rel_error = ((fine.value(n)? - value) / value).abs();
            if !(value > 0.0) {
                return Err(Error::Quadrature(format!("C^{n} = {value} is not positive")));
            }
            if rel_error > 1e-4 {
                return Err(Error::Quadrature(format!("C^{n} = {value} has relative error {rel_error:.2e}")));
            }
            Ok(RenormConstant { n, h1, h2, value, rel_error, settings })
        })
        .collect()
}

/// `C^n_{H1, H2}`.
pub fn renorm_constant(n: u32, h1: f64, h2: f64) -> Result<RenormConstant> {
    Ok(renorm_constants(&[n], h1, h2, RenormSettings::default())?.remove(0))
}

/// `int_0^S s^a / (1 + s^2) ds` for `-1 < a < 1`.
fn power_arctan(a: f64, big_s: f64) -> f64 {
    let full = PI / (2.0 * (PI * a / 2.0).cos());
    if big_s > 2.0 {
        // Tail int_S^inf s^{a-2} / (1 + s^-2) as an alternating series.
        let mut tail = 0.0;
        for j in 0..60 {
            let e = a - 1.0 - 2.0 * j as f64;
            let term = big_s.powf(e) / (-e);
            tail += if j % 2 == 0 { term } else { -term };
        }
        return full - tail;
    }
    let mut r = Rule::default();
    r.push_origin(big_s.min(1.0), 20, a);
    let mut v = r.integrate(|s| 1.0 / (1.0 + s * s));
    if big_s > 1.0 {
        let mut r = Rule::default();
        r.push_panels(1.0, big_s, 4, 20, 0.0);
        v += r.integrate(|s| s.powf(a) / (1.0 + s * s));
    }
    v
}

/// `lim C^n 2^{-2n(2 - 2H1 - H2)} = c^2 int_{[-1,1]^2} Re G^ |xi|^a |eta|^b`
/// with `Re G^ = eta^2 / (eta^4 + xi^2)`. The inner integral reduces to
/// `eta^{2a-2} F(eta^-2)` with `F(S) = int_0^S s^a / (1 + s^2)`.
pub fn renorm_limit(h1: f64, h2: f64) -> Result<f64> {
    check_renorm_regime(h1, h2)?;
    if 2.0 * h1 + h2 >= 2.0 - 1e-12 {
        return invalid("the explicit limit needs 2 H1 + H2 < 2");
    }
    let (a, b) = (1.0 - 2.0 * h1, 1.0 - 2.0 * h2);
    let c = normalization_constant(h1)? * normalization_constant(h2)?;
    let mut r = Rule::default();
    r.push_origin(1.0, 24, 2.0 * a + b);
    let v = r.integrate(|eta| power_arctan(a, 1.0 / (eta * eta)));
    Ok(4.0 * c * c * v)
}

/// `(C^n 2^{-2n(2 - 2H1 - H2)}, limit)`.
pub fn renorm_limit_check(h1: f64, h2: f64, n: u32) -> Result<(f64, f64)> {
    let limit = renorm_limit(h1, h2)?;
    let c = renorm_constant(n, h1, h2)?;
    Ok((c.value * 2f64.powf(-2.0 * n as f64 * (2.0 - 2.0 * h1 - h2)), limit))
}

/// `K^` on a realization's half lattice, in coefficient order.
pub fn kernel_multiplier(real: &NoiseRealization, kd: &KernelDecomposition) -> Array2<Complex64> {
    kd.fourier_k_tensor(&real.time.nodes, &real.signed_space())
}

/// `E[(K * xi^n)(z) xi^n(z)]` for the lattice itself:
/// `c^2 sum w v |xi|^a |eta|^b Re K^` over the full lattice.
pub fn lattice_constant(spec: &SheetSpec, multiplier: &Array2<Complex64>) -> Result<f64> {
    let c = spec.constant()?;
    let time = spec.time_axis()?;
    let space = spec.space_axis()?;
    if multiplier.dim() != (time.len(), 2 * space.len()) {
        return invalid("multiplier does not match the lattice");
    }
    let mut acc = 0.0;
    for (j, (&xi, &w)) in time.nodes.iter().zip(&time.weights).enumerate() {
        let a = w * xi.powf(1.0 - 2.0 * spec.h1);
        for (q, (&eta, &v)) in space.nodes.iter().zip(&space.weights).enumerate() {
            let b = v * eta.powf(1.0 - 2.0 * spec.h2);
            acc += a * b * (multiplier[[j, 2 * q]].re + multiplier[[j, 2 * q + 1]].re);
        }
    }
    Ok(2.0 * c * c * acc)
}

/// The pair `(xi^n, K * xi^n)` of one realization.
#[derive(Clone, Debug)]
pub struct RoughInput {
    pub xi: SpectralField,
    pub theta: SpectralField,
}

impl RoughInput {
    pub fn new(real: &NoiseRealization, multiplier: &Array2<Complex64>) -> Result<Self> {
        let xi = real.noise()?;
        let (nj, nl) = xi.coeffs.dim();
        if multiplier.nrows() < nj || multiplier.ncols() < nl {
            return invalid("multiplier is smaller than the lattice");
        }
        let theta = xi.with_multiplier(&multiplier.slice(s![..nj, ..nl]).to_owned())?;
        Ok(Self { xi, theta })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AreaVariant {
    Canonical,
    /// Subtracts the given constant.
    Renormalized(f64),
}

impl AreaVariant {
    pub fn constant(&self) -> f64 {
        match *self {
            AreaVariant::Canonical => 0.0,
            AreaVariant::Renormalized(c) => c,
        }
    }
}

/// `A_x(z) = [theta(z) - theta(x)] xi(z) - C` on a window.
#[derive(Clone, Debug)]
pub struct LevyAreaSlice {
    pub base: Point,
    pub variant: AreaVariant,
    pub values: GriddedField,
}

pub fn levy_area(input: &RoughInput, base: Point, t: Axis, x: Axis, variant: AreaVariant) -> Result<LevyAreaSlice> {
    let values = area_grid(input, base, &t.values(), &x.values(), variant.constant());
    Ok(LevyAreaSlice { base, variant, values: GriddedField::new(t, x, values)? })
}

/// `[theta(z) - theta(base)] xi(z) - c` on the tensor grid `ts x xs`, with
/// `theta(base)` taken from the same grid evaluation path.
fn area_grid(input: &RoughInput, base: Point, ts: &[f64], xs: &[f64], c: f64) -> Array2<f64> {
    let th = input.theta.eval_grid(ts, xs);
    let xi = input.xi.eval_grid(ts, xs);
    let th0 = input.theta.eval_grid(&[base[0]], &[base[1]])[[0, 0]];
    Array2::from_shape_fn(th.dim(), |(i, j)| (th[[i, j]] - th0) * xi[[i, j]] - c)
}

/// Largest violation of `A_x - A_y = [theta(y) - theta(x)] xi` over `probes`,
/// divided by the window's magnitude scale: the largest
/// `(|theta(z)| + |theta(x)| + |theta(y)|) |xi(z)| + |C|` over the probes.
///
/// The left side goes through the grid evaluation behind [`levy_area`], on the
/// tensor grid of the probe coordinates; the right side through pointwise
/// summation.
pub fn chen_defect(input: &RoughInput, x: Point, y: Point, probes: &[Point], variant: AreaVariant) -> Result<f64> {
    if probes.is_empty() {
        return Ok(0.0);
    }
    let (tx, ty) = (input.theta.eval_point(x), input.theta.eval_point(y));
    let ts: Vec<f64> = probes.iter().map(|p| p[0]).collect();
    let xs: Vec<f64> = probes.iter().map(|p| p[1]).collect();
    let c = variant.constant();
    let (ax, ay) = (area_grid(input, x, &ts, &xs, c), area_grid(input, y, &ts, &xs, c));
    let (mut worst, mut scale) = (0.0f64, c.abs());
    for (k, &z) in probes.iter().enumerate() {
        let xi = input.xi.eval_point(z);
        let rhs = (ty - tx) * xi;
        worst = worst.max(((ax[[k, k]] - ay[[k, k]]) - rhs).abs());
        let tz = input.theta.eval_point(z);
        scale = scale.max((tz.abs() + tx.abs() + ty.abs()) * xi.abs() + c.abs());
    }
    Ok(if worst == 0.0 { 0.0 } else { worst / scale })
}

/// Settings of the Monte Carlo area scan.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaScanConfig {
    pub h1: f64,
    pub h2: f64,
    /// Coarse levels compared against the fine one.
    pub coarse: Vec<u32>,
    pub fine: u32,
    pub psi: TestShape,
    pub levels: Vec<u32>,
    pub base: Point,
    pub samples: usize,
    pub seed: u64,
}

/// One row of the scan: `E |<A^n - A^m, S^{2^-l} psi>|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaScanRow {
    pub n: u32,
    pub level: u32,
    pub mean: f64,
    pub se: f64,
}

/// Precomputed state of the scan; samples are independent and can be
/// evaluated in any order.
#[derive(Clone, Debug)]
pub struct AreaScan {
    pub config: AreaScanConfig,
    fine_spec: SheetSpec,
    multiplier: Array2<Complex64>,
    /// Lattice constants for each coarse level, then the fine one.
    constants: Vec<f64>,
    grids: Vec<(Vec<f64>, Vec<f64>, Array2<f64>)>,
}

impl AreaScan {
    pub fn new(config: AreaScanConfig, kd: &KernelDecomposition) -> Result<Self> {
        check_renorm_regime(config.h1, config.h2)?;
        if config.coarse.iter().any(|&n| n > config.fine) {
            return invalid("coarse levels must not exceed the fine level");
        }
        if config.levels.is_empty() || config.coarse.is_empty() {
            return invalid("scan needs levels and coarse truncations");
        }
        let fine_spec = SheetSpec::new(config.h1, config.h2, config.fine)?;
        let probe = sample_noise(&fine_spec, 0)?;
        let multiplier = kernel_multiplier(&probe, kd);
        let mut constants = Vec::new();
        for &n in config.coarse.iter().chain(std::iter::once(&config.fine)) {
            let r = probe.restrict(n)?;
            let (nj, nl) = r.coeffs.dim();
            constants.push(lattice_constant(&r.spec, &multiplier.slice(s![..nj, ..nl]).to_owned())?);
        }
        let m = config.fine as i32;
        let mut grids = Vec::new();
        for &l in &config.levels {
            let d = 2f64.powi(-(l as i32));
            let (rt, rx) = (config.psi.time.reach() * d * d, config.psi.space.reach() * d);
            let nt = ((2.0 * rt) / (PI / (4.0 * 4f64.powi(m))).min(d * d / 32.0)).ceil() as usize + 1;
            let nx = ((2.0 * rx) / (PI / (4.0 * 2f64.powi(m))).min(d / 32.0)).ceil() as usize + 1;
            let t = Axis::spanning(config.base[0] - rt, config.base[0] + rt, nt)?;
            let x = Axis::spanning(config.base[1] - rx, config.base[1] + rx, nx)?;
            let f = crate::besov::scale_test(config.psi, d, config.base)?;
            let w = Array2::from_shape_fn((nt, nx), |(i, j)| {
                let wt = if i == 0 || i + 1 == nt { 0.5 } else { 1.0 };
                let wx = if j == 0 || j + 1 == nx { 0.5 } else { 1.0 };
                wt * wx * t.step * x.step * f.value(t.at(i), x.at(j))
            });
            grids.push((t.values(), x.values(), w));
        }
        Ok(Self { config, fine_spec, multiplier, constants, grids })
    }

    /// Squared pairings for sample `index`, ordered by coarse level then scale.
    pub fn sample(&self, index: usize) -> Result<Vec<f64>> {
        let real = sample_noise(&self.fine_spec, derive_seed(self.config.seed, index as u64))?;
        let fine = RoughInput::new(&real, &self.multiplier)?;
        let c_fine = *self.constants.last().expect("fine constant");
        let base = self.config.base;
        let fine_areas: Vec<Array2<f64>> = self.grids.iter().map(|(ts, xs, _)| area_grid(&fine, base, ts, xs, c_fine)).collect();
        let mut out = Vec::with_capacity(self.config.coarse.len() * self.grids.len());
        for (k, &n) in self.config.coarse.iter().enumerate() {
            let coarse = RoughInput::new(&real.restrict(n)?, &self.multiplier)?;
            for ((ts, xs, w), fa) in self.grids.iter().zip(&fine_areas) {
                let ca = area_grid(&coarse, base, ts, xs, self.constants[k]);
                let p: f64 = ndarray::Zip::from(&ca).and(fa).and(w).fold(0.0, |acc, &a, &b, &ww| acc + (a - b) * ww);
                out.push(p * p);
            }
        }
        Ok(out)
    }

    pub fn reduce(&self, samples: &[Vec<f64>]) -> Vec<AreaScanRow> {
        let mut rows = Vec::new();
        let nl = self.config.levels.len();
        for (k, &n) in self.config.coarse.iter().enumerate() {
            for (li, &level) in self.config.levels.iter().enumerate() {
                let v: Vec<f64> = samples.iter().map(|s| s[k * nl + li]).collect();
                let (mean, se) = mean_se(&v);
                rows.push(AreaScanRow { n, level, mean, se });
            }
        }
        rows
    }

    /// Lattice constants `C^n_lat` of the coarse levels and the fine one.
    pub fn constants(&self) -> &[f64] {
        &self.constants
    }
}

/// Sequential scan over all samples.
pub fn area_moment_scan(config: AreaScanConfig, kd: &KernelDecomposition) -> Result<Vec<AreaScanRow>> {
    if config.samples < 2 {
        return invalid("scan needs at least two samples");
    }
    let scan = AreaScan::new(config, kd)?;
    let samples = (0..scan.config.samples).map(|i| scan.sample(i)).collect::<Result<Vec<_>>>()?;
    Ok(scan.reduce(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;

    #[test]
    fn regime_guard() {
        assert!(check_renorm_regime(0.5, 0.8).is_ok());
        assert!(check_renorm_regime(0.6, 0.8).is_ok());
        assert!(check_renorm_regime(0.3, 0.8).is_err());
        assert!(check_renorm_regime(0.9, 0.9).is_err());
        assert!(renorm_limit(0.6, 0.8).is_err());
    }

    #[test]
    fn power_arctan_matches_quadrature() {
        for a in [-0.4, 0.0, 0.3] {
            for s in [0.5, 1.0, 1.7, 2.5, 40.0] {
                let f = |u: f64| if u == 0.0 { 0.0 } else { u.powf(a) / (1.0 + u * u) };
                let mut r = Rule::default();
                r.push_origin(0.5, 20, a);
                let want = r.integrate(|u| 1.0 / (1.0 + u * u)) + adaptive(&f, 0.5, s, 1e-13, 40).unwrap();
                let got = power_arctan(a, s);
                assert!((got - want).abs() < 1e-11, "a={a} S={s}: {got} vs {want}");
            }
        }
        assert!((power_arctan(0.0, 1e8) - (1e8f64).atan()).abs() < 1e-12);
    }

    #[test]
    fn limit_for_white_time_noise() {
        // a = 0 turns F into arctan; reference value from an independent
        // adaptive quadrature of 4 c^2 int_0^1 eta^-0.6 arctan(eta^-2).
        let got = renorm_limit(0.5, 0.8).unwrap();
        assert!((got - 0.302_204_626_517_520_95).abs() < 1e-9, "{got}");
    }

    #[test]
    fn constant_is_positive_and_increasing() {
        let cs = renorm_constants(&[2, 3, 4], 0.5, 0.8, RenormSettings::default()).unwrap();
        assert!(cs.iter().all(|c| c.value > 0.0 && c.rel_error < 1e-4));
        assert!(cs.windows(2).all(|w| w[1].value > w[0].value));
        assert!((cs[2].value - 0.91611).abs() < 5e-4, "{}", cs[2].value);
    }

    #[test]
    fn chen_relation_and_variants() {
        let kd = KernelDecomposition::default();
        let spec = SheetSpec::new(0.5, 0.8, 3).unwrap();
        let real = sample_noise(&spec, 3).unwrap();
        let m = kernel_multiplier(&real, &kd);
        let input = RoughInput::new(&real, &m).unwrap();
        let probes = [[0.3, 0.1], [0.7, -0.4]];
        for v in [AreaVariant::Canonical, AreaVariant::Renormalized(1.7)] {
            assert!(chen_defect(&input, [0.1, 0.2], [0.5, -0.3], &probes, v).unwrap() < 1e-12);
            assert_eq!(chen_defect(&input, [0.1, 0.2], [0.1, 0.2], &probes, v).unwrap(), 0.0);
        }
        let t = Axis::new(0.2, 0.1, 4).unwrap();
        let x = Axis::new(-0.2, 0.1, 5).unwrap();
        let a = levy_area(&input, [0.3, 0.0], t, x, AreaVariant::Canonical).unwrap();
        let b = levy_area(&input, [0.3, 0.0], t, x, AreaVariant::Renormalized(0.25)).unwrap();
        assert!(a.values.values.iter().zip(b.values.values.iter()).all(|(p, q)| p - q == 0.25 || (p - q - 0.25).abs() < 1e-15));
        assert!(a.values.values[[1, 2]].abs() < 1e-12);
    }

    #[test]
    fn lattice_constant_tracks_quadrature() {
        let kd = KernelDecomposition::default();
        let spec = SheetSpec::new(0.5, 0.8, 4).unwrap();
        let real = sample_noise(&spec, 0).unwrap();
        let lat = lattice_constant(&spec, &kernel_multiplier(&real, &kd)).unwrap();
        let quad = renorm_constant(4, 0.5, 0.8).unwrap().value;
        assert!((lat - quad).abs() / quad < 0.02, "{lat} vs {quad}");
    }
}
