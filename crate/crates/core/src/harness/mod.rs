//! Reproducible experiments behind the `fracheat` command.
//!
//! A run validates its configuration, computes, then writes CSV tables,
//! optional grid files and a `manifest.txt` echoing the resolved
//! configuration. Replicas are spread over the rayon pool and collected in
//! index order, so outputs do not depend on the thread count.

mod config;
mod grid;

pub use config::*;
pub use grid::{grid_roundtrip, GridAxis, GridFile, MAGIC};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::besov::{regularity_slope, standard_family};
use crate::heat_kernel::{heat_kernel, KernelDecomposition, Deriv};
use crate::parabolic::{scaled_norm, Axis, GriddedField};
use crate::quadrature::adaptive;
use crate::rough_model::{
    chen_defect, kernel_multiplier, renorm_constant, renorm_constants, renorm_limit_check, AreaScan, AreaScanConfig, AreaScanRow,
    AreaVariant, RenormConstant, RenormSettings, RoughInput,
};
use crate::solver::{convergence_study, solve_ito_reference, solve_renormalized, solve_young, ConvergenceConfig, ConvergenceStudy, Equation};
use crate::spectral_field::{derive_seed, exact_increment_moment, exact_second_moment, exact_test_moment, sample_noise, SheetSpec};
use crate::stats::{correlation, linear_fit, mean_se, LineFit};
use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Covariance of the sheet at one pair of points.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceRow {
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub monte_carlo: f64,
    pub se: f64,
    pub exact: f64,
    /// Covariance of the untruncated sheet.
    pub continuum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentFit {
    pub h1: f64,
    pub h2: f64,
    pub time: LineFit,
    pub space: LineFit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelChecks {
    /// Largest relative gap between `sum K_n` and `K` on the resolved annulus.
    pub partition: f64,
    /// Largest relative gap between the rescaled and direct `K_n`.
    pub self_similarity: f64,
    /// Fit of `log int |d_x G(t, .)|` against `log t`.
    pub gradient_fit: LineFit,
    /// Largest relative spread of `sqrt(t) int |d_x G(t, .)|`.
    pub gradient_spread: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenormOutcome {
    pub constants: Vec<RenormConstant>,
    /// `(h1, h2, slope of log2 C^n)` per case.
    pub slopes: Vec<(f64, f64, f64)>,
    /// `(rescaled C^n, limit)`.
    pub limit: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BesovOutcome {
    pub target: BesovTarget,
    /// Slope of `log2 E<xi^n, S psi>^2` against the level.
    pub curve_slope: Option<f64>,
    /// Fitted exponents per realization: noise, then convolved noise.
    pub noise_alpha: Vec<f64>,
    pub smoothed_alpha: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChenRow {
    pub realization: usize,
    pub variant: &'static str,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOutcome {
    pub rows: Vec<AreaScanRow>,
    pub level_fit: LineFit,
    /// Minus the mean slope of `log2` moments against the coarse level.
    pub n_decay: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathStats {
    pub label: String,
    pub mean: f64,
    pub mean_se: f64,
    pub second: f64,
    pub second_se: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub main: PathStats,
    pub reference: Option<PathStats>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergeOutcome {
    pub studies: Vec<ConvergenceStudy>,
    /// `(n, mean sup diff, mean holder diff)` over replicas.
    pub mean_diffs: Vec<(u32, f64, f64)>,
    /// `(n, C^n, mean control drift)`; empty for the Young equation.
    pub drift: Vec<(u32, f64, f64)>,
    pub drift_correlation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Sample(Vec<CovarianceRow>),
    Moments(Vec<MomentFit>),
    Kernel(KernelChecks),
    Renorm(RenormOutcome),
    Besov(BesovOutcome),
    Chen(Vec<ChenRow>),
    Scan(ScanOutcome),
    Solve(SolveOutcome),
    Converge(ConvergeOutcome),
}

#[derive(Clone, Debug)]
pub struct Report {
    pub outcome: Outcome,
    pub files: Vec<PathBuf>,
}

/// A CSV table with a leading `#` comment line.
struct Table {
    comment: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn num(v: f64) -> String {
    format!("{v:.17e}")
}

impl Table {
    fn new(comment: impl Into<String>, header: &[&'static str]) -> Self {
        Self { comment: comment.into(), header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut s = format!("# {}\n{}\n", self.comment, self.header.join(","));
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        let p = self.dir.join(name);
        std::fs::write(&p, t.render())?;
        self.files.push(p);
        Ok(())
    }

    fn grid(&mut self, name: &str, f: &GriddedField) -> Result<()> {
        let p = self.dir.join(name);
        GridFile::from_field(f).write(&p)?;
        self.files.push(p);
        Ok(())
    }
}

/// Runs `f(0..n)` on the rayon pool, keeping index order.
fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(f).collect()
}

/// Executes `cfg` and writes its outputs into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Report> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let mut o = Output { dir: out.to_path_buf(), files: Vec::new() };
    let outcome = match cfg.kind {
        Kind::Sample => run_sample(cfg.seed, cfg.sample.as_ref().expect("validated"), &mut o)?,
        Kind::Moments => run_moments(cfg.moments.as_ref().expect("validated"), &mut o)?,
        Kind::Kernel => run_kernel(cfg.seed, cfg.kernel.as_ref().expect("validated"), &mut o)?,
        Kind::Renorm => run_renorm(cfg.renorm.as_ref().expect("validated"), &mut o)?,
        Kind::Besov => run_besov(cfg.seed, cfg.besov.as_ref().expect("validated"), &mut o)?,
        Kind::Levy => run_levy(cfg.seed, cfg.levy.as_ref().expect("validated"), &mut o)?,
        Kind::Solve => run_solve(cfg.seed, cfg.solve.as_ref().expect("validated"), &mut o)?,
        Kind::Converge => run_converge(cfg.seed, cfg.converge.as_ref().expect("validated"), &mut o)?,
    };
    write_manifest(cfg, &mut o)?;
    Ok(Report { outcome, files: o.files })
}

fn write_manifest(cfg: &ExperimentConfig, o: &mut Output) -> Result<()> {
    let mut s = format!("fracheat {VERSION}\n# resolved configuration\n{}\n# outputs\n", cfg.to_toml());
    for f in &o.files {
        let len = std::fs::metadata(f)?.len();
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(s, "{name} {len}");
    }
    let p = o.dir.join("manifest.txt");
    std::fs::write(&p, s)?;
    o.files.push(p);
    Ok(())
}

fn fbm_cov(h: f64, s: f64, t: f64) -> f64 {
    0.5 * (s.abs().powf(2.0 * h) + t.abs().powf(2.0 * h) - (t - s).abs().powf(2.0 * h))
}

fn run_sample(seed: u64, c: &SampleConfig, o: &mut Output) -> Result<Outcome> {
    let spec = SheetSpec::new(c.h1, c.h2, c.n)?;
    let mut ts: Vec<f64> = c.pairs.iter().flat_map(|p| [p[0][0], p[1][0]]).collect();
    let mut xs: Vec<f64> = c.pairs.iter().flat_map(|p| [p[0][1], p[1][1]]).collect();
    for v in [&mut ts, &mut xs] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let at = |v: &[f64], a: f64| v.iter().position(|&b| b == a).expect("node present");
    let idx: Vec<[(usize, usize); 2]> = c
        .pairs
        .iter()
        .map(|p| [(at(&ts, p[0][0]), at(&xs, p[0][1])), (at(&ts, p[1][0]), at(&xs, p[1][1]))])
        .collect();
    let products = par_map(c.draws, |i| {
        let g = sample_noise(&spec, derive_seed(seed, i as u64))?.sheet()?.eval_grid(&ts, &xs);
        Ok(idx.iter().map(|[a, b]| g[*a] * g[*b]).collect::<Vec<f64>>())
    })?;
    let mut table = Table::new(
        format!("sheet covariance; H1={} H2={} n={} draws={} seed={seed}; columns: points, Monte Carlo mean and standard error, lattice exact, continuum", c.h1, c.h2, c.n, c.draws),
        &["t", "x", "s", "y", "monte_carlo", "se", "exact", "continuum"],
    );
    let mut rows = Vec::new();
    for (k, p) in c.pairs.iter().enumerate() {
        let v: Vec<f64> = products.iter().map(|r| r[k]).collect();
        let (m, se) = mean_se(&v);
        let exact = exact_second_moment(&spec, p[0], p[1])?;
        let continuum = fbm_cov(c.h1, p[0][0], p[1][0]) * fbm_cov(c.h2, p[0][1], p[1][1]);
        table.push(vec![num(p[0][0]), num(p[0][1]), num(p[1][0]), num(p[1][1]), num(m), num(se), num(exact), num(continuum)]);
        rows.push(CovarianceRow { p: p[0], q: p[1], monte_carlo: m, se, exact, continuum });
    }
    o.table("covariance.csv", &table)?;
    if let Some([nt, nx]) = c.grid {
        let real = sample_noise(&spec, derive_seed(seed, 0))?;
        let (t, x) = (Axis::spanning(0.0, 1.0, nt)?, Axis::spanning(0.0, 1.0, nx)?);
        let values = real.sheet()?.eval_grid(&t.values(), &x.values());
        o.grid("sheet.fhg", &GriddedField::new(t, x, values)?)?;
    }
    Ok(Outcome::Sample(rows))
}

fn run_moments(c: &MomentsConfig, o: &mut Output) -> Result<Outcome> {
    let mut table = Table::new(format!("exact increment moments E X(t, y)^2 at n={}", c.n), &["h1", "h2", "axis", "offset", "moment"]);
    let mut fits_t = Table::new("log2 moment against log2 offset", &["h1", "h2", "axis", "slope", "intercept", "max_residual"]);
    let mut fits = Vec::new();
    for h in &c.hurst {
        let spec = SheetSpec::new(h[0], h[1], c.n)?;
        let offsets: Vec<f64> = c.offset_exponents.iter().map(|&k| 2f64.powi(-k)).collect();
        let mut fit_axis = |axis: &str| -> Result<LineFit> {
            let mut lx = Vec::new();
            let mut ly = Vec::new();
            for &d in &offsets {
                let m = if axis == "time" { exact_increment_moment(&spec, d, c.fixed_offset)? } else { exact_increment_moment(&spec, c.fixed_offset, d)? };
                table.push(vec![num(h[0]), num(h[1]), axis.into(), num(d), num(m)]);
                lx.push(d.log2());
                ly.push(m.log2());
            }
            let f = linear_fit(&lx, &ly)?;
            fits_t.push(vec![num(h[0]), num(h[1]), axis.into(), num(f.slope), num(f.intercept), num(f.max_residual)]);
            Ok(f)
        };
        let time = fit_axis("time")?;
        let space = fit_axis("space")?;
        fits.push(MomentFit { h1: h[0], h2: h[1], time, space });
    }
    o.table("moments.csv", &table)?;
    o.table("fits.csv", &fits_t)?;
    Ok(Outcome::Moments(fits))
}

fn run_kernel(seed: u64, c: &KernelConfig, o: &mut Output) -> Result<Outcome> {
    let kd = KernelDecomposition::new(c.n_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(format!("kernel split checks, levels 0..={}", c.n_max), &["t", "x", "k", "sum_levels", "rel_partition", "rel_self_similarity"]);
    let (mut partition, mut similarity) = (0.0f64, 0.0f64);
    let r_lo = 2f64.powi(-(c.n_max as i32) - 1);
    for _ in 0..c.probes {
        // Log-uniform parabolic radius in the resolved annulus, random direction.
        let r = r_lo * (1.0 / r_lo).powf(rng.random::<f64>());
        let theta: f64 = rng.random_range(0.05..1.0);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (t, x) = (r * r * theta, sign * r * (1.0 - theta).sqrt());
        let pieces = kd.kernel_pieces(t, x);
        let sum: f64 = pieces.levels.iter().sum();
        let rel = (sum - pieces.k).abs() / pieces.k.abs().max(f64::MIN_POSITIVE);
        let n = rng.random_range(0..=c.n_max);
        let a = kd.level(n, Deriv::None, t, x);
        let b = kd.level_direct(n, t, x);
        let sim = if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
        partition = partition.max(rel);
        similarity = similarity.max(sim);
        debug_assert!(scaled_norm([t, x]) >= r_lo * 0.999);
        table.push(vec![num(t), num(x), num(pieces.k), num(sum), num(rel), num(sim)]);
    }
    o.table("split.csv", &table)?;
    let mut grad = Table::new("int |d_x G(t, x)| dx by adaptive quadrature", &["t", "integral", "sqrt_t_times_integral"]);
    let (mut lx, mut ly, mut scaled) = (Vec::new(), Vec::new(), Vec::new());
    for &t in &c.gradient_times {
        let f = |x: f64| x / (2.0 * t) * heat_kernel(t, x);
        let v = 2.0 * adaptive(&f, 0.0, 40.0 * t.sqrt(), 1e-13, 50)?;
        grad.push(vec![num(t), num(v), num(v * t.sqrt())]);
        lx.push(t.ln());
        ly.push(v.ln());
        scaled.push(v * t.sqrt());
    }
    o.table("gradient.csv", &grad)?;
    let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
    let gradient_spread = scaled.iter().map(|s| (s - mean).abs() / mean).fold(0.0, f64::max);
    Ok(Outcome::Kernel(KernelChecks { partition, self_similarity: similarity, gradient_fit: linear_fit(&lx, &ly)?, gradient_spread }))
}

fn run_renorm(c: &RenormConfig, o: &mut Output) -> Result<Outcome> {
    let mut table = Table::new("renormalisation constants C^n by physical-space quadrature", &["h1", "h2", "n", "constant", "rel_error", "constant_over_n"]);
    let mut fits = Table::new("slope of log2 C^n against n", &["h1", "h2", "slope", "intercept", "max_residual"]);
    let mut constants = Vec::new();
    let mut slopes = Vec::new();
    for case in &c.cases {
        let cs = renorm_constants(&case.levels, case.h1, case.h2, RenormSettings::default())?;
        for k in &cs {
            table.push(vec![num(k.h1), num(k.h2), k.n.to_string(), num(k.value), num(k.rel_error), num(k.value / k.n as f64)]);
        }
        if cs.len() >= 2 {
            let x: Vec<f64> = cs.iter().map(|k| k.n as f64).collect();
            let y: Vec<f64> = cs.iter().map(|k| k.value.log2()).collect();
            let f = linear_fit(&x, &y)?;
            fits.push(vec![num(case.h1), num(case.h2), num(f.slope), num(f.intercept), num(f.max_residual)]);
            slopes.push((case.h1, case.h2, f.slope));
        }
        constants.extend(cs);
    }
    if !c.cases.is_empty() {
        o.table("constants.csv", &table)?;
        o.table("fits.csv", &fits)?;
    }
    let limit = match &c.limit {
        Some(l) => {
            let (scaled, lim) = renorm_limit_check(l.h1, l.h2, l.n)?;
            let mut t = Table::new("rescaled C^n against the explicit limit", &["h1", "h2", "n", "rescaled", "limit", "rel_gap"]);
            t.push(vec![num(l.h1), num(l.h2), l.n.to_string(), num(scaled), num(lim), num((scaled - lim).abs() / lim)]);
            o.table("limit.csv", &t)?;
            Some((scaled, lim))
        }
        None => None,
    };
    Ok(Outcome::Renorm(RenormOutcome { constants, slopes, limit }))
}

fn run_besov(seed: u64, c: &BesovConfig, o: &mut Output) -> Result<Outcome> {
    let spec = SheetSpec::new(c.h1, c.h2, c.n)?;
    let family = standard_family();
    let region = region(c.region)?;
    let kd = KernelDecomposition::default();
    let mut curve = Table::new("exact E<xi^n, S^{2^-l} psi>^2 for the father-father shape", &["level", "moment"]);
    let curve_slope = if c.target == BesovTarget::NoiseExponent {
        let (mut lx, mut ly) = (Vec::new(), Vec::new());
        for &l in &c.levels {
            let m = exact_test_moment(&spec, &family[0], l, None)?;
            curve.push(vec![l.to_string(), num(m)]);
            lx.push(l as f64);
            ly.push(m.log2());
        }
        o.table("level_curve.csv", &curve)?;
        Some(linear_fit(&lx, &ly)?.slope)
    } else {
        None
    };
    let fits = par_map(c.realizations, |i| {
        let real = sample_noise(&spec, derive_seed(seed, i as u64))?;
        let xi = real.noise()?;
        let a = regularity_slope(&xi, &family, &region, &c.levels, c.max_per_axis)?;
        let b = match c.target {
            BesovTarget::ConvolutionGain => {
                let theta = xi.with_multiplier(&kernel_multiplier(&real, &kd))?;
                Some(regularity_slope(&theta, &family, &region, &c.levels, c.max_per_axis)?)
            }
            BesovTarget::NoiseExponent => None,
        };
        Ok((a, b))
    })?;
    let mut table = Table::new("fitted exponents: rms pairing ~ 2^{-l alpha}", &["realization", "field", "alpha", "max_residual"]);
    let mut noise_alpha = Vec::new();
    let mut smoothed_alpha = Vec::new();
    for (i, (a, b)) in fits.iter().enumerate() {
        table.push(vec![i.to_string(), "noise".into(), num(a.alpha), num(a.fit.max_residual)]);
        noise_alpha.push(a.alpha);
        if let Some(b) = b {
            table.push(vec![i.to_string(), "kernel_convolved".into(), num(b.alpha), num(b.fit.max_residual)]);
            smoothed_alpha.push(b.alpha);
        }
    }
    o.table("fits.csv", &table)?;
    Ok(Outcome::Besov(BesovOutcome { target: c.target, curve_slope, noise_alpha, smoothed_alpha }))
}

fn run_levy(seed: u64, c: &LevyConfig, o: &mut Output) -> Result<Outcome> {
    let kd = KernelDecomposition::default();
    if let Some(ch) = &c.chen {
        let spec = SheetSpec::new(c.h1, c.h2, ch.n)?;
        let constant = renorm_constant(ch.n, c.h1, c.h2)?.value;
        // The multiplier depends on the lattice only.
        let multiplier = kernel_multiplier(&sample_noise(&spec, 0)?, &kd);
        let rows = par_map(ch.realizations, |r| {
            let real = sample_noise(&spec, derive_seed(seed, r as u64))?;
            let input = RoughInput::new(&real, &multiplier)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(!seed, r as u64));
            let mut pt = || [rng.random::<f64>(), rng.random::<f64>()];
            let mut worst = [0.0f64; 2];
            for _ in 0..ch.pairs {
                let (x, y) = (pt(), pt());
                let probes: Vec<[f64; 2]> = (0..ch.probes).map(|_| pt()).collect();
                for (k, v) in [AreaVariant::Canonical, AreaVariant::Renormalized(constant)].into_iter().enumerate() {
                    worst[k] = worst[k].max(chen_defect(&input, x, y, &probes, v)?);
                }
            }
            Ok(worst)
        })?;
        let mut table = Table::new(format!("largest relative Chen defect; n={} pairs={} probes={}", ch.n, ch.pairs, ch.probes), &["realization", "variant", "defect"]);
        let mut out = Vec::new();
        for (r, w) in rows.iter().enumerate() {
            for (k, name) in ["canonical", "renormalized"].into_iter().enumerate() {
                table.push(vec![r.to_string(), name.into(), num(w[k])]);
                out.push(ChenRow { realization: r, variant: name, defect: w[k] });
            }
        }
        o.table("chen.csv", &table)?;
        return Ok(Outcome::Chen(out));
    }
    let sc = c.scan.as_ref().expect("validated");
    let scan = AreaScan::new(
        AreaScanConfig {
            h1: c.h1,
            h2: c.h2,
            coarse: sc.coarse.clone(),
            fine: sc.fine,
            psi: standard_family()[0],
            levels: sc.levels.clone(),
            base: sc.base,
            samples: sc.samples,
            seed,
        },
        &kd,
    )?;
    let samples = par_map(sc.samples, |i| scan.sample(i))?;
    let rows = scan.reduce(&samples);
    let mut table = Table::new(format!("E|<A^n - A^m, S^(2^-l) psi>|^2, m={} samples={}", sc.fine, sc.samples), &["n", "level", "mean", "se"]);
    for r in &rows {
        table.push(vec![r.n.to_string(), r.level.to_string(), num(r.mean), num(r.se)]);
    }
    o.table("scan.csv", &table)?;
    let pick = |n: u32| rows.iter().filter(|r| r.n == n).collect::<Vec<_>>();
    let at_n = pick(sc.slope_n);
    let level_fit = linear_fit(&at_n.iter().map(|r| r.level as f64).collect::<Vec<_>>(), &at_n.iter().map(|r| r.mean.log2()).collect::<Vec<_>>())?;
    let mut decay = 0.0;
    for &l in &sc.levels {
        let col: Vec<&AreaScanRow> = rows.iter().filter(|r| r.level == l).collect();
        let f = linear_fit(&col.iter().map(|r| r.n as f64).collect::<Vec<_>>(), &col.iter().map(|r| r.mean.log2()).collect::<Vec<_>>())?;
        decay -= f.slope / sc.levels.len() as f64;
    }
    let mut fits = Table::new("level slope at slope_n and mean decay in n", &["quantity", "value"]);
    fits.push(vec!["level_slope".into(), num(level_fit.slope)]);
    fits.push(vec!["n_decay".into(), num(decay)]);
    o.table("fits.csv", &fits)?;
    Ok(Outcome::Scan(ScanOutcome { rows, level_fit, n_decay: decay }))
}

fn stats(label: &str, v: &[f64]) -> PathStats {
    let (mean, mse) = mean_se(v);
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    let (second, sse) = mean_se(&sq);
    PathStats { label: label.into(), mean, mean_se: mse, second, second_se: sse }
}

fn run_solve(seed: u64, c: &SolveConfig, o: &mut Output) -> Result<Outcome> {
    let field = c.field.build();
    let cfg = c.grid.build();
    let spec = SheetSpec::new(c.h1, c.h2, c.n)?;
    let constant = match c.equation {
        EquationName::Renormalized => Some(renorm_constant(c.n, c.h1, c.h2)?),
        _ => None,
    };
    let one = |i: usize| -> Result<(f64, Option<GriddedField>, Vec<String>)> {
        let s = derive_seed(seed, 2 * i as u64);
        let path = match c.equation {
            EquationName::Young => solve_young(&sample_noise(&spec, s)?, &field, &cfg)?,
            EquationName::Renormalized => solve_renormalized(&sample_noise(&spec, s)?, constant.as_ref().expect("set"), &field, &cfg)?,
            EquationName::Ito => solve_ito_reference(c.h2, c.n, &field, &cfg, s)?,
        };
        let keep = (i == 0 && c.write_grid).then(|| path.field.clone());
        Ok((path.terminal_at(c.probe_x), keep, path.warnings))
    };
    let main = par_map(c.paths, one)?;
    let reference = par_map(c.reference_paths, |i| Ok(solve_ito_reference(c.h2, c.n, &field, &cfg, derive_seed(seed, 2 * i as u64 + 1))?.terminal_at(c.probe_x)))?;
    let name = match c.equation {
        EquationName::Young => "young",
        EquationName::Renormalized => "renormalized",
        EquationName::Ito => "ito",
    };
    let values: Vec<f64> = main.iter().map(|m| m.0).collect();
    let main_stats = stats(name, &values);
    let ref_stats = (!reference.is_empty()).then(|| stats("ito_reference", &reference));
    let mut table = Table::new(
        format!("Y(T, {}) over paths; n={} T={} C={}", c.probe_x, c.n, cfg.horizon, constant.as_ref().map_or(0.0, |k| k.value)),
        &["equation", "paths", "mean", "mean_se", "second_moment", "second_moment_se"],
    );
    for (s, n) in [(Some(&main_stats), c.paths), (ref_stats.as_ref(), c.reference_paths)] {
        if let Some(s) = s {
            table.push(vec![s.label.clone(), n.to_string(), num(s.mean), num(s.mean_se), num(s.second), num(s.second_se)]);
        }
    }
    o.table("terminal.csv", &table)?;
    if let Some(Some(f)) = main.first().map(|m| &m.1) {
        o.grid("path0.fhg", f)?;
    }
    let warnings = main.first().map(|m| m.2.clone()).unwrap_or_default();
    Ok(Outcome::Solve(SolveOutcome { main: main_stats, reference: ref_stats, warnings }))
}

fn run_converge(seed: u64, c: &ConvergeConfig, o: &mut Output) -> Result<Outcome> {
    let t = c.grid.horizon;
    let base = ConvergenceConfig {
        h1: c.h1,
        h2: c.h2,
        levels: c.levels.clone(),
        equation: if c.equation == EquationName::Young { Equation::Young } else { Equation::Renormalized },
        field: c.field.build(),
        solver: c.grid.build(),
        gamma: c.gamma,
        holder_region: region(c.holder_region)?,
        holder_nodes: c.holder_nodes,
        master_seed: 0,
    };
    let studies = par_map(c.replicas, |r| convergence_study(&ConvergenceConfig { master_seed: derive_seed(seed, r as u64), ..base.clone() }))?;
    let mut levels = Table::new(format!("per-level solutions, T={t}"), &["replica", "n", "constant", "sup", "control_drift"]);
    let mut diffs = Table::new(format!("norms of Y^(n+1) - Y^n; holder gamma={}", c.gamma), &["replica", "n", "sup_diff", "holder_diff"]);
    for (r, s) in studies.iter().enumerate() {
        for l in &s.levels {
            levels.push(vec![r.to_string(), l.n.to_string(), num(l.constant), num(l.sup), l.control_drift.map_or("nan".into(), num)]);
        }
        for d in &s.diffs {
            diffs.push(vec![r.to_string(), d.n.to_string(), num(d.sup_diff), num(d.holder_diff)]);
        }
    }
    o.table("levels.csv", &levels)?;
    o.table("diffs.csv", &diffs)?;
    let k = studies.len() as f64;
    let mean_diffs: Vec<(u32, f64, f64)> = (0..studies[0].diffs.len())
        .map(|i| {
            let n = studies[0].diffs[i].n;
            (n, studies.iter().map(|s| s.diffs[i].sup_diff).sum::<f64>() / k, studies.iter().map(|s| s.diffs[i].holder_diff).sum::<f64>() / k)
        })
        .collect();
    let mut mean = Table::new("replica means of the neighbour differences", &["n", "sup_diff", "holder_diff"]);
    for &(n, a, b) in &mean_diffs {
        mean.push(vec![n.to_string(), num(a), num(b)]);
    }
    o.table("mean_diffs.csv", &mean)?;
    let mut drift = Vec::new();
    let mut drift_correlation = None;
    if base.equation == Equation::Renormalized {
        for i in 0..studies[0].levels.len() {
            let l = &studies[0].levels[i];
            let d = studies.iter().map(|s| s.levels[i].control_drift.unwrap_or(0.0)).sum::<f64>() / k;
            drift.push((l.n, l.constant, d));
        }
        let x: Vec<f64> = drift.iter().map(|d| d.1.ln()).collect();
        let y: Vec<f64> = drift.iter().map(|d| d.2.ln()).collect();
        let r = correlation(&x, &y)?;
        let mut t = Table::new("mean sup |control - renormalized| against C^n", &["n", "constant", "control_drift"]);
        for &(n, c, d) in &drift {
            t.push(vec![n.to_string(), num(c), num(d)]);
        }
        t.comment.push_str(&format!("; log-log correlation {r:.6}"));
        o.table("drift.csv", &t)?;
        drift_correlation = Some(r);
    }
    Ok(Outcome::Converge(ConvergeOutcome { studies, mean_diffs, drift, drift_correlation }))
}

/// Machine-readable one-line error record.
pub fn error_record(e: &Error) -> String {
    format!("{{\"error\":\"{}\",\"message\":{:?}}}", e.code(), e.to_string())
}
