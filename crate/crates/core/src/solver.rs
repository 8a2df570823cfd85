//! Mild-form time steppers on a periodic interval `[-L, L)`.
//!
//! All three equations share one exponential Euler loop
//! `Y_{k+1} = e^{dt d_x^2} (Y_k + increment_k)`; they differ only in the
//! increment. Paths are stored every `save_every` steps.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::invalid;
use crate::parabolic::{holder_norm, Axis, GriddedField, Region};
use crate::rough_model::{renorm_constants, RenormConstant, RenormSettings};
use crate::spectral_field::{normalization_constant, sample_noise, AxisLattice, NoiseRealization, SheetSpec, SpectralField};
use crate::{Error, Result};

/// Solutions whose sup norm passes this are reported as diverged.
pub const DIVERGENCE_BOUND: f64 = 1e6;
const NOISE_CHUNK: usize = 256;

/// `exp(1 - 1/(1 - r^2))` on `|r| < 1`, zero outside. Peaks at 1.
pub fn bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

fn bump_deriv(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - r * r;
        -2.0 * r / (q * q) * bump(r)
    }
}

/// Nonlinearities `F(x, y)` supported in `|x| <= a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VectorField {
    Zero,
    /// `A bump(x/a)`, independent of the solution.
    Bump { a: f64, amplitude: f64 },
    /// `A bump(x/a) y`
    BumpLinear { a: f64, amplitude: f64 },
    /// `A bump(x/a) sin(y)`
    BumpSin { a: f64, amplitude: f64 },
}

impl VectorField {
    pub fn support(&self) -> f64 {
        match *self {
            VectorField::Zero => 0.0,
            VectorField::Bump { a, .. } | VectorField::BumpLinear { a, .. } | VectorField::BumpSin { a, .. } => a,
        }
    }

    fn parts(&self) -> (f64, f64) {
        match *self {
            VectorField::Zero => (1.0, 0.0),
            VectorField::Bump { a, amplitude } | VectorField::BumpLinear { a, amplitude } | VectorField::BumpSin { a, amplitude } => (a, amplitude),
        }
    }

    /// `y`-profile and its derivative.
    fn profile(&self, y: f64) -> (f64, f64) {
        match self {
            VectorField::Zero => (0.0, 0.0),
            VectorField::Bump { .. } => (1.0, 0.0),
            VectorField::BumpLinear { .. } => (y, 1.0),
            VectorField::BumpSin { .. } => (y.sin(), y.cos()),
        }
    }

    pub fn f(&self, x: f64, y: f64) -> f64 {
        let (a, amp) = self.parts();
        amp * bump(x / a) * self.profile(y).0
    }

    pub fn d1(&self, x: f64, y: f64) -> f64 {
        let (a, amp) = self.parts();
        amp * bump_deriv(x / a) / a * self.profile(y).0
    }

    pub fn d2(&self, x: f64, y: f64) -> f64 {
        let (a, amp) = self.parts();
        amp * bump(x / a) * self.profile(y).1
    }

    pub fn validate(&self) -> Result<()> {
        let (a, amp) = self.parts();
        if !(a > 0.0) || !amp.is_finite() {
            return invalid(format!("vector field needs a > 0 and finite amplitude, got a={a}"));
        }
        Ok(())
    }

    /// Largest relative mismatch between the derivatives and central
    /// differences at `points`.
    pub fn derivative_mismatch(&self, points: &[(f64, f64)]) -> f64 {
        let h = 1e-5;
        let mut worst = 0.0f64;
        for &(x, y) in points {
            let d1 = (self.f(x + h, y) - self.f(x - h, y)) / (2.0 * h);
            let d2 = (self.f(x, y + h) - self.f(x, y - h)) / (2.0 * h);
            let scale = self.f(x, y).abs().max(self.d1(x, y).abs()).max(self.d2(x, y).abs()).max(1e-3);
            worst = worst.max((d1 - self.d1(x, y)).abs() / scale).max((d2 - self.d2(x, y)).abs() / scale);
        }
        worst
    }
}

/// Initial conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialCondition {
    Zero,
    /// `height * bump(x/a)`
    Bump { a: f64, height: f64 },
    /// `height * exp(-x^2 / (2 variance))`
    Gaussian { variance: f64, height: f64 },
}

impl InitialCondition {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            InitialCondition::Zero => 0.0,
            InitialCondition::Bump { a, height } => height * bump(x / a),
            InitialCondition::Gaussian { variance, height } => height * (-x * x / (2.0 * variance)).exp(),
        }
    }

    /// Closed-form heat flow of the Gaussian, on the whole line.
    pub fn gaussian_flow(variance: f64, height: f64, t: f64, x: f64) -> f64 {
        let v = variance + 2.0 * t;
        height * (variance / v).sqrt() * (-x * x / (2.0 * v)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Half width `L` of the periodic domain.
    pub half_width: f64,
    pub nx: usize,
    pub horizon: f64,
    pub nt: usize,
    pub initial: InitialCondition,
    /// Store one time row in this many.
    pub save_every: usize,
}

impl SolverConfig {
    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn space_axis(&self) -> Axis {
        Axis { start: -self.half_width, step: self.dx(), len: self.nx }
    }

    pub fn saved_time_axis(&self) -> Axis {
        Axis { start: 0.0, step: self.dt() * self.save_every as f64, len: self.nt / self.save_every + 1 }
    }

    pub fn validate(&self, field: &VectorField) -> Result<()> {
        if !(self.half_width > 0.0 && self.horizon > 0.0) || self.nx < 2 || self.nt < 1 {
            return invalid("solver needs L > 0, T > 0, nx >= 2, nt >= 1");
        }
        if self.save_every == 0 || self.nt % self.save_every != 0 {
            return invalid(format!("save_every = {} must divide nt = {}", self.save_every, self.nt));
        }
        let need = 2.0 * field.support() + 4.0 * self.horizon.sqrt();
        if self.half_width < need {
            return invalid(format!("L = {} is below 2a + 4 sqrt(T) = {need}", self.half_width));
        }
        Ok(())
    }

    /// Warnings when the grid does not resolve the level-`n` noise.
    pub fn resolution_warnings(&self, n: u32) -> Vec<String> {
        let mut w = Vec::new();
        let (dt_max, dx_max) = (2f64.powi(-2 * n as i32 - 2), 2f64.powi(-(n as i32) - 2));
        if self.dt() > dt_max {
            w.push(format!("dt = {:.3e} exceeds {dt_max:.3e} for n = {n}", self.dt()));
        }
        if self.dx() > dx_max {
            w.push(format!("dx = {:.3e} exceeds {dx_max:.3e} for n = {n}", self.dx()));
        }
        w
    }

    /// `dt (pi nx / 2L)^2`, the stiffness of the top mode.
    pub fn stiffness(&self) -> f64 {
        self.dt() * (PI * self.nx as f64 / (2.0 * self.half_width)).powi(2)
    }
}

/// A computed path with where it came from.
#[derive(Clone, Debug)]
pub struct SolutionPath {
    pub field: GriddedField,
    pub provenance: String,
    pub warnings: Vec<String>,
}

impl SolutionPath {
    /// The final time row.
    pub fn terminal(&self) -> Array1<f64> {
        self.field.values.row(self.field.values.nrows() - 1).to_owned()
    }

    /// Terminal value at the node nearest to `x`.
    pub fn terminal_at(&self, x: f64) -> f64 {
        let ax = self.field.x;
        let j = ((x - ax.start) / ax.step).round().clamp(0.0, (ax.len - 1) as f64) as usize;
        self.field.values[[self.field.values.nrows() - 1, j]]
    }
}

/// Cached exact heat semigroup on a periodic grid.
pub struct HeatPropagator {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    factors: Vec<f64>,
    buf: Vec<Complex64>,
}

impl HeatPropagator {
    pub fn new(nx: usize, dt: f64, half_width: f64) -> Self {
        let mut planner = FftPlanner::new();
        let factors = (0..nx)
            .map(|i| {
                let k = if i <= nx / 2 { i as f64 } else { i as f64 - nx as f64 };
                (-dt * (PI * k / half_width).powi(2)).exp() / nx as f64
            })
            .collect();
        Self {
            forward: planner.plan_fft_forward(nx),
            inverse: planner.plan_fft_inverse(nx),
            factors,
            buf: vec![Complex64::new(0.0, 0.0); nx],
        }
    }

    pub fn apply(&mut self, state: &mut [f64]) {
        for (b, &v) in self.buf.iter_mut().zip(state.iter()) {
            *b = Complex64::new(v, 0.0);
        }
        self.forward.process(&mut self.buf);
        for (b, &f) in self.buf.iter_mut().zip(&self.factors) {
            *b *= f;
        }
        self.inverse.process(&mut self.buf);
        for (v, b) in state.iter_mut().zip(&self.buf) {
            *v = b.re;
        }
    }
}

/// `e^{dt d_x^2}` on `[-L, L)`: mode `k` is multiplied by
/// `exp(-dt (pi k / L)^2)`.
pub fn heat_step(state: &[f64], dt: f64, half_width: f64) -> Vec<f64> {
    let mut out = state.to_vec();
    HeatPropagator::new(state.len(), dt, half_width).apply(&mut out);
    out
}

fn run(cfg: &SolverConfig, mut increment: impl FnMut(usize, &[f64], &mut [f64]) -> Result<()>) -> Result<GriddedField> {
    let xs = cfg.space_axis().values();
    let mut y: Vec<f64> = xs.iter().map(|&x| cfg.initial.value(x)).collect();
    let taxis = cfg.saved_time_axis();
    let mut out = Array2::<f64>::zeros((taxis.len, cfg.nx));
    out.row_mut(0).assign(&Array1::from(y.clone()));
    let mut heat = HeatPropagator::new(cfg.nx, cfg.dt(), cfg.half_width);
    let mut inc = vec![0.0; cfg.nx];
    for k in 0..cfg.nt {
        increment(k, &y, &mut inc)?;
        for (v, d) in y.iter_mut().zip(&inc) {
            *v += d;
        }
        heat.apply(&mut y);
        let sup = y.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
        if sup > DIVERGENCE_BOUND {
            return Err(Error::Diverged { t: (k + 1) as f64 * cfg.dt(), sup });
        }
        if (k + 1) % cfg.save_every == 0 {
            out.row_mut((k + 1) / cfg.save_every).assign(&Array1::from(y.clone()));
        }
    }
    GriddedField::new(taxis, cfg.space_axis(), out)
}

/// `xi^n` on the solver grid, produced a chunk of time rows at a time.
struct NoiseRows {
    field: SpectralField,
    reduced: Array2<Complex64>,
    dt: f64,
    start: usize,
    rows: Array2<f64>,
}

impl NoiseRows {
    fn new(real: &NoiseRealization, cfg: &SolverConfig) -> Result<Self> {
        let field = real.noise()?;
        let reduced = field.reduce_space(&cfg.space_axis().values());
        Ok(Self { field, reduced, dt: cfg.dt(), start: 0, rows: Array2::zeros((0, cfg.nx)) })
    }

    fn row(&mut self, k: usize) -> ndarray::ArrayView1<'_, f64> {
        if k < self.start || k >= self.start + self.rows.nrows() {
            let ts: Vec<f64> = (k..k + NOISE_CHUNK).map(|i| i as f64 * self.dt).collect();
            self.rows = self.field.eval_reduced(&self.reduced, &ts);
            self.start = k;
        }
        self.rows.row(k - self.start)
    }
}

fn solve_driven(real: &NoiseRealization, constant: f64, field: &VectorField, cfg: &SolverConfig, label: String) -> Result<SolutionPath> {
    field.validate()?;
    cfg.validate(field)?;
    let mut warnings = cfg.resolution_warnings(real.spec.n);
    let xs = cfg.space_axis().values();
    let dt = cfg.dt();
    let mut noise = NoiseRows::new(real, cfg)?;
    let grid = run(cfg, |k, y, inc| {
        let xi = noise.row(k);
        for j in 0..y.len() {
            let f = field.f(xs[j], y[j]);
            let mut v = f * xi[j];
            if constant != 0.0 {
                v -= constant * f * field.d2(xs[j], y[j]);
            }
            inc[j] = dt * v;
        }
        Ok(())
    })?;
    warnings.retain(|w| !w.is_empty());
    Ok(SolutionPath { field: grid, provenance: label, warnings })
}

fn label(kind: &str, real: &NoiseRealization, extra: &str) -> String {
    format!("{kind} H1={} H2={} n={} seed={}{extra}", real.spec.h1, real.spec.h2, real.spec.n, real.seed)
}

/// `d_t Y = d_x^2 Y + F(x, Y) xi^n` driven by one realization.
pub fn solve_young(real: &NoiseRealization, field: &VectorField, cfg: &SolverConfig) -> Result<SolutionPath> {
    let mut p = solve_driven(real, 0.0, field, cfg, label("young", real, ""))?;
    if 2.0 * real.spec.h1 + real.spec.h2 <= 2.0 {
        p.warnings.push("2 H1 + H2 <= 2: the unrenormalised limit is not expected to exist".into());
    }
    Ok(p)
}

/// As [`solve_young`] with the extra drift `-C F d_2F`.
pub fn solve_renormalized(real: &NoiseRealization, constant: &RenormConstant, field: &VectorField, cfg: &SolverConfig) -> Result<SolutionPath> {
    solve_renormalized_with(real, constant.value, field, cfg)
}

/// [`solve_renormalized`] with a bare constant.
pub fn solve_renormalized_with(real: &NoiseRealization, constant: f64, field: &VectorField, cfg: &SolverConfig) -> Result<SolutionPath> {
    solve_driven(real, constant, field, cfg, label("renormalized", real, &format!(" C={constant:.17e}")))
}

/// Coefficient `kappa` in `E[W(x) W(y)] = kappa |x - y|^{2H - 2}` per unit
/// time for the spatial spectral density `c_H^2 |eta|^{1 - 2H}`.
pub fn ito_covariance_constant(h2: f64) -> Result<f64> {
    if !(h2 > 0.5 && h2 < 1.0) {
        return invalid(format!("spatial covariance needs 1/2 < H2 < 1, got {h2}"));
    }
    let c = normalization_constant(h2)?;
    Ok(-2.0 * c * c * statrs::function::gamma::gamma(2.0 - 2.0 * h2) * (PI * h2).cos())
}

/// Time-white, space-fractional Gaussian increments on the level-`n` space
/// lattice.
pub struct ItoIncrements {
    eta: Vec<f64>,
    amps: Vec<f64>,
    phases: Array2<Complex64>,
    rng: ChaCha8Rng,
    scale: f64,
}

impl ItoIncrements {
    /// Uses the space lattice of the level-`n` sheet.
    pub fn new(h2: f64, n: u32, xs: &[f64], dt: f64, seed: u64) -> Result<Self> {
        let space = SheetSpec::new(0.5, h2, n)?.space_axis()?;
        Self::with_lattice(h2, &space, xs, dt, seed)
    }

    pub fn with_lattice(h2: f64, space: &AxisLattice, xs: &[f64], dt: f64, seed: u64) -> Result<Self> {
        let amps = space.nodes.iter().zip(&space.weights).map(|(&e, &v)| (v * e.powf(1.0 - 2.0 * h2)).sqrt()).collect();
        let phases = Array2::from_shape_fn((xs.len(), space.len()), |(j, q)| Complex64::from_polar(1.0, xs[j] * space.nodes[q]));
        let scale = 2.0 * dt.sqrt() * normalization_constant(h2)?;
        Ok(Self { eta: space.nodes.clone(), amps, phases, rng: ChaCha8Rng::seed_from_u64(seed), scale })
    }

    /// Exact `E[dW(x) dW(x + r)]` of the lattice increments.
    pub fn covariance(&self, r: f64) -> f64 {
        0.5 * self.scale * self.scale * self.eta.iter().zip(&self.amps).map(|(&e, &a)| a * a * (e * r).cos()).sum::<f64>()
    }

    /// The next increment `Delta W_k` on the grid.
    pub fn next(&mut self) -> Array1<f64> {
        let z: Array1<Complex64> = self
            .amps
            .iter()
            .map(|&a| {
                let re: f64 = StandardNormal.sample(&mut self.rng);
                let im: f64 = StandardNormal.sample(&mut self.rng);
                Complex64::new(re, im) * (a / 2f64.sqrt())
            })
            .collect();
        self.phases.dot(&z).mapv(|w| self.scale * w.re)
    }
}

/// Euler-Maruyama for `dY = d_x^2 Y dt + F(x, Y) dW` with `W` white in time
/// and fractional in space, truncated at space frequency `2^n`.
pub fn solve_ito_reference(h2: f64, n: u32, field: &VectorField, cfg: &SolverConfig, seed: u64) -> Result<SolutionPath> {
    field.validate().or_else(|e| if matches!(field, VectorField::Zero) { Ok(()) } else { Err(e) })?;
    cfg.validate(field)?;
    let xs = cfg.space_axis().values();
    let mut dw = ItoIncrements::new(h2, n, &xs, cfg.dt(), seed)?;
    let grid = run(cfg, |_, y, inc| {
        let w = dw.next();
        for j in 0..y.len() {
            inc[j] = field.f(xs[j], y[j]) * w[j];
        }
        Ok(())
    })?;
    Ok(SolutionPath {
        field: grid,
        provenance: format!("ito H2={h2} n={n} seed={seed}"),
        warnings: cfg.resolution_warnings(n).into_iter().filter(|w| w.starts_with("dx")).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equation {
    Young,
    Renormalized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceConfig {
    pub h1: f64,
    pub h2: f64,
    pub levels: Vec<u32>,
    pub equation: Equation,
    pub field: VectorField,
    pub solver: SolverConfig,
    pub gamma: f64,
    /// Window of the Holder norm.
    pub holder_region: Region,
    /// The Holder window is thinned to at most this many nodes per axis.
    pub holder_nodes: usize,
    pub master_seed: u64,
}

/// Per-level output.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRow {
    pub n: u32,
    /// `C^n`, zero for the Young equation.
    pub constant: f64,
    pub sup: f64,
    /// `sup |Y_control - Y|` for the `C = 0` control run.
    pub control_drift: Option<f64>,
}

/// Norms of `Y^{n+1} - Y^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffRow {
    pub n: u32,
    pub sup_diff: f64,
    pub holder_diff: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    pub levels: Vec<LevelRow>,
    pub diffs: Vec<DiffRow>,
    pub warnings: Vec<String>,
}

fn thin_holder(f: &GriddedField, region: &Region, nodes: usize, gamma: f64) -> Result<f64> {
    let r = f.restrict(region)?;
    let st = r.t.len.div_ceil(nodes).max(1);
    let sx = r.x.len.div_ceil(nodes).max(1);
    holder_norm(&r.subsample(st, sx)?, gamma)
}

/// Solves every level on one coupled realization and compares neighbours.
pub fn convergence_study(cfg: &ConvergenceConfig) -> Result<ConvergenceStudy> {
    if cfg.levels.len() < 2 || cfg.levels.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("convergence study needs at least two increasing levels");
    }
    let top = *cfg.levels.last().expect("levels");
    let master = sample_noise(&SheetSpec::new(cfg.h1, cfg.h2, top)?, cfg.master_seed)?;
    let constants: Vec<f64> = match cfg.equation {
        Equation::Young => vec![0.0; cfg.levels.len()],
        Equation::Renormalized => renorm_constants(&cfg.levels, cfg.h1, cfg.h2, RenormSettings::default())?.into_iter().map(|c| c.value).collect(),
    };
    let mut paths = Vec::new();
    let mut levels = Vec::new();
    let mut warnings = Vec::new();
    for (&n, &c) in cfg.levels.iter().zip(&constants) {
        let real = master.restrict(n)?;
        let p = match cfg.equation {
            Equation::Young => solve_young(&real, &cfg.field, &cfg.solver)?,
            Equation::Renormalized => solve_renormalized_with(&real, c, &cfg.field, &cfg.solver)?,
        };
        let control_drift = match cfg.equation {
            Equation::Young => None,
            Equation::Renormalized => {
                let ctl = solve_young(&real, &cfg.field, &cfg.solver)?;
                Some((&ctl.field.values - &p.field.values).fold(0.0f64, |m, v| m.max(v.abs())))
            }
        };
        warnings.extend(p.warnings.iter().map(|w| format!("n={n}: {w}")));
        levels.push(LevelRow { n, constant: c, sup: p.field.sup_norm(), control_drift });
        paths.push(p.field);
    }
    let mut diffs = Vec::new();
    for (k, w) in paths.windows(2).enumerate() {
        let d = GriddedField::new(w[0].t, w[0].x, &w[1].values - &w[0].values)?;
        diffs.push(DiffRow {
            n: cfg.levels[k],
            sup_diff: d.sup_norm(),
            holder_diff: thin_holder(&d, &cfg.holder_region, cfg.holder_nodes, cfg.gamma)?,
        });
    }
    Ok(ConvergenceStudy { levels, diffs, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(l: f64, nx: usize, t: f64, nt: usize, initial: InitialCondition) -> SolverConfig {
        SolverConfig { half_width: l, nx, horizon: t, nt, initial, save_every: 1 }
    }

    #[test]
    fn heat_step_modes() {
        let l = 2.0;
        let nx = 64;
        let xs: Vec<f64> = (0..nx).map(|j| -l + j as f64 * 2.0 * l / nx as f64).collect();
        let c = heat_step(&vec![3.0; nx], 0.3, l);
        assert!(c.iter().all(|v| (v - 3.0).abs() < 1e-13));
        let k = 5.0;
        let u: Vec<f64> = xs.iter().map(|x| (PI * k * x / l).cos()).collect();
        let v = heat_step(&u, 0.01, l);
        let f = (-0.01 * (PI * k / l).powi(2)).exp();
        assert!(u.iter().zip(&v).all(|(a, b)| (a * f - b).abs() < 1e-13));
        let half = heat_step(&heat_step(&u, 0.005, l), 0.005, l);
        assert!(half.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn linear_case_is_heat_flow() {
        let c = cfg(8.0, 256, 0.5, 10, InitialCondition::Gaussian { variance: 0.1, height: 1.0 });
        let p = solve_ito_reference(0.8, 3, &VectorField::Zero, &c, 1).unwrap();
        let last = p.field.values.row(10);
        for (j, v) in last.iter().enumerate() {
            let x = c.space_axis().at(j);
            assert!((v - InitialCondition::gaussian_flow(0.1, 1.0, 0.5, x)).abs() < 1e-6);
        }
        assert_eq!(p.field.values.row(0)[128], 1.0);
    }

    #[test]
    fn vector_field_derivatives() {
        let f = VectorField::BumpSin { a: 0.7, amplitude: 1.3 };
        let pts: Vec<(f64, f64)> = (0..40).map(|i| (-0.6 + 0.03 * i as f64, -2.0 + 0.1 * i as f64)).collect();
        assert!(f.derivative_mismatch(&pts) < 1e-6);
        assert_eq!(f.f(0.7, 1.0), 0.0);
        assert_eq!(f.f(-0.9, 1.0), 0.0);
    }

    #[test]
    fn renormalized_reductions() {
        let real = sample_noise(&SheetSpec::new(0.5, 0.8, 2).unwrap(), 4).unwrap();
        let c = cfg(4.0, 128, 0.25, 256, InitialCondition::Bump { a: 1.0, height: 1.0 });
        let field = VectorField::BumpSin { a: 1.0, amplitude: 1.0 };
        let y = solve_young(&real, &field, &c).unwrap();
        let r0 = solve_renormalized_with(&real, 0.0, &field, &c).unwrap();
        assert_eq!(y.field.values, r0.field.values);
        let flat = VectorField::Bump { a: 1.0, amplitude: 1.0 };
        let a = solve_young(&real, &flat, &c).unwrap();
        let b = solve_renormalized_with(&real, 2.5, &flat, &c).unwrap();
        assert_eq!(a.field.values, b.field.values);
        let zero = cfg(4.0, 128, 0.25, 256, InitialCondition::Zero);
        let z = solve_young(&real, &VectorField::BumpSin { a: 1.0, amplitude: 1.0 }, &zero).unwrap();
        assert!(z.field.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn guards() {
        let real = sample_noise(&SheetSpec::new(0.5, 0.8, 2).unwrap(), 4).unwrap();
        let field = VectorField::BumpLinear { a: 1.0, amplitude: 1.0 };
        let narrow = cfg(2.0, 64, 0.25, 64, InitialCondition::Zero);
        assert!(solve_young(&real, &field, &narrow).is_err());
        let c = cfg(4.0, 64, 0.25, 64, InitialCondition::Bump { a: 1.0, height: 1.0 });
        let p = solve_young(&real, &field, &c).unwrap();
        assert!(!p.warnings.is_empty());
        let e = solve_renormalized_with(&real, -1e3, &field, &c).unwrap_err();
        assert!(matches!(e, Error::Diverged { .. }));
    }

    #[test]
    fn ito_covariance() {
        let h2 = 0.8;
        let xs = [0.0, 0.25, 0.5, 1.0];
        let dt = 0.01;
        let mut inc = ItoIncrements::new(h2, 6, &xs, dt, 7).unwrap();
        let m = 20000;
        let draws: Vec<Array1<f64>> = (0..m).map(|_| inc.next()).collect();
        for j in 0..4 {
            let v: Vec<f64> = draws.iter().map(|w| w[0] * w[j]).collect();
            let (mean, se) = crate::stats::mean_se(&v);
            let want = inc.covariance(xs[j]);
            assert!((mean - want).abs() < 3.0 * se, "lag {}: {mean} vs {want} (se {se})", xs[j]);
        }
        // A fine uniform lattice reproduces the power law.
        let lat = crate::spectral_field::LatticeConfig { band_width: 1.0 / 16.0, band_edge: 2048.0, ..Default::default() };
        let space = AxisLattice::build(h2, 2048.0, &lat).unwrap();
        let fine = ItoIncrements::with_lattice(h2, &space, &xs, dt, 0).unwrap();
        let kappa = ito_covariance_constant(h2).unwrap();
        for r in [0.25f64, 0.5, 1.0] {
            let want = kappa * dt * r.powf(2.0 * h2 - 2.0);
            assert!((fine.covariance(r) - want).abs() < 0.02 * want, "lag {r}: {} vs {want}", fine.covariance(r));
        }
    }
}
