//! The forward heat kernel and its split into a compactly supported singular
//! part and a smooth remainder.
//!
//! `G(t, x) = (4 pi t)^(-1/2) exp(-x^2 / 4t)` for `t > 0`. With `r` the
//! parabolic radius and `chi` a smooth step from 1 on `r <= 1/2` to 0 on
//! `r >= 1`, the annulus profile `phi(r) = chi(r) - chi(2r)` lives on
//! `[1/4, 1]` and sums to one over dyadic dilations below `r = 1/2`. Then
//!
//! ```text
//! K_n(z) = phi(2^n r) G(z),   K = sum_n K_n = chi(r) G,   G# = G - K.
//! ```
//!
//! Because `G(4^n t, 2^n x) = 2^-n G(t, x)`, every piece is an exact rescaling
//! `K_n(t, x) = 2^n K_0(4^n t, 2^n x)`.
//!
//! Fourier transforms use `f^(xi, eta) = int f(t, x) e^{-i(t xi + x eta)}`,
//! so `G^(xi, eta) = 1 / (eta^2 + i xi)`.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::invalid;
use crate::parabolic::{scaled_norm, Axis, GriddedField, Point};
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// `G(t, x)`, zero for `t <= 0`.
pub fn heat_kernel(t: f64, x: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

fn logistic_pair(m: f64) -> (f64, f64) {
    // (1/(1+e^-m), 1/(1+e^m)) without overflow
    let e = (-m.abs()).exp();
    let small = e / (1.0 + e);
    let big = 1.0 / (1.0 + e);
    if m >= 0.0 {
        (big, small)
    } else {
        (small, big)
    }
}

/// Smooth step on `[0, 1]` and its first two derivatives.
fn smooth_step(u: f64) -> [f64; 3] {
    if u <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    if u >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let (a, b) = (1.0 / u, 1.0 / (1.0 - u));
    let m = b - a;
    if m.abs() > 700.0 {
        return if m > 0.0 { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 0.0] };
    }
    let (p, q) = logistic_pair(m);
    let d1 = p * q;
    let d2 = d1 * (q - p);
    let m1 = b * b + a * a;
    let m2 = 2.0 * b * b * b - 2.0 * a * a * a;
    [p, d1 * m1, d2 * m1 * m1 + d1 * m2]
}

/// `chi(r)`: 1 on `[0, 1/2]`, 0 on `[1, inf)`, with derivatives.
pub fn cutoff(r: f64) -> [f64; 3] {
    let [s0, s1, s2] = smooth_step(2.0 * r - 1.0);
    [1.0 - s0, -2.0 * s1, -4.0 * s2]
}

/// `phi(r) = chi(r) - chi(2r)`, supported on `[1/4, 1]`, with derivatives.
pub fn annulus(r: f64) -> [f64; 3] {
    let a = cutoff(r);
    let b = cutoff(2.0 * r);
    [a[0] - b[0], a[1] - 2.0 * b[1], a[2] - 4.0 * b[2]]
}

/// A space-time derivative applied to a kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Deriv {
    None,
    T,
    X,
    XX,
}

impl Deriv {
    /// Parabolic order: time counts twice.
    pub fn scaled_degree(self) -> u32 {
        match self {
            Deriv::None => 0,
            Deriv::X => 1,
            Deriv::T | Deriv::XX => 2,
        }
    }
}

/// `D(rho(r) G)` at `(t, x)` for a radial profile `rho` with two derivatives.
fn radial_times_heat(rho: impl Fn(f64) -> [f64; 3], d: Deriv, t: f64, x: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let r = scaled_norm([t, x]);
    let [p0, p1, p2] = rho(r);
    if p0 == 0.0 && p1 == 0.0 && p2 == 0.0 {
        return 0.0;
    }
    let g = heat_kernel(t, x);
    match d {
        Deriv::None => p0 * g,
        Deriv::T => {
            let gt = g * (x * x / (4.0 * t * t) - 0.5 / t);
            p1 * g / (2.0 * r) + p0 * gt
        }
        Deriv::X => {
            let gx = -x / (2.0 * t) * g;
            p1 * (x / r) * g + p0 * gx
        }
        Deriv::XX => {
            let gx = -x / (2.0 * t) * g;
            let gxx = g * (x * x / (4.0 * t * t) - 0.5 / t);
            let rx = x / r;
            let rxx = t / (r * r * r);
            p2 * rx * rx * g + p1 * rxx * g + 2.0 * p1 * rx * gx + p0 * gxx
        }
    }
}

/// Which kernel a convolution or evaluation refers to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    Heat,
    K,
    GSharp,
    Level(u32),
    LevelDeriv(u32, Deriv),
}

/// Values of the split at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Pieces {
    pub k: f64,
    pub g_sharp: f64,
    pub levels: Vec<f64>,
}

/// The split `G = K + G#` and its dyadic pieces.
#[derive(Debug)]
pub struct KernelDecomposition {
    /// Deepest level tabulated in [`kernel_pieces`](Self::kernel_pieces).
    pub n_max: u32,
    transform: OnceLock<K0Transform>,
}

impl Clone for KernelDecomposition {
    fn clone(&self) -> Self {
        Self { n_max: self.n_max, transform: self.transform.clone() }
    }
}

impl Default for KernelDecomposition {
    fn default() -> Self {
        Self::new(12).expect("default level is valid")
    }
}

impl KernelDecomposition {
    pub fn new(n_max: u32) -> Result<Self> {
        if n_max > 30 {
            return invalid(format!("n_max = {n_max} is beyond double precision scales"));
        }
        Ok(Self { n_max, transform: OnceLock::new() })
    }

    /// `K = chi(r) G`.
    pub fn k(&self, t: f64, x: f64) -> f64 {
        radial_times_heat(cutoff, Deriv::None, t, x)
    }

    pub fn g_sharp(&self, t: f64, x: f64) -> f64 {
        radial_times_heat(|r| {
            let c = cutoff(r);
            [1.0 - c[0], -c[1], -c[2]]
        }, Deriv::None, t, x)
    }

    /// `K_0 = phi(r) G` and its derivatives.
    pub fn k0(&self, d: Deriv, t: f64, x: f64) -> f64 {
        radial_times_heat(annulus, d, t, x)
    }

    /// `D K_n(t, x) = 2^{n(1 + |D|_s)} (D K_0)(4^n t, 2^n x)`.
    pub fn level(&self, n: u32, d: Deriv, t: f64, x: f64) -> f64 {
        let s = 2f64.powi(n as i32);
        s.powi(1 + d.scaled_degree() as i32) * self.k0(d, s * s * t, s * x)
    }

    /// `K_n` straight from its definition `phi(2^n r) G`.
    pub fn level_direct(&self, n: u32, t: f64, x: f64) -> f64 {
        let s = 2f64.powi(n as i32);
        radial_times_heat(|r| {
            let a = annulus(s * r);
            [a[0], s * a[1], s * s * a[2]]
        }, Deriv::None, t, x)
    }

    pub fn kernel_pieces(&self, t: f64, x: f64) -> Pieces {
        let levels = (0..=self.n_max).map(|n| self.level(n, Deriv::None, t, x)).collect();
        Pieces { k: self.k(t, x), g_sharp: self.g_sharp(t, x), levels }
    }

    pub fn eval(&self, which: Kernel, t: f64, x: f64) -> f64 {
        match which {
            Kernel::Heat => heat_kernel(t, x),
            Kernel::K => self.k(t, x),
            Kernel::GSharp => self.g_sharp(t, x),
            Kernel::Level(n) => self.level(n, Deriv::None, t, x),
            Kernel::LevelDeriv(n, d) => self.level(n, d, t, x),
        }
    }

    /// Quadrature tables for `K_0^`, built on first use.
    pub fn transform(&self) -> &K0Transform {
        self.transform.get_or_init(K0Transform::default)
    }

    /// `K^` at scattered frequencies.
    pub fn fourier_k(&self, freqs: &[(f64, f64)]) -> Vec<Complex64> {
        freqs
            .iter()
            .map(|&(xi, eta)| self.fourier_k_tensor(&[xi], &[eta])[[0, 0]])
            .collect()
    }

    /// `K^(xi_j, eta_l)` on a tensor grid.
    ///
    /// Frequencies with `|xi| < 1` and `|eta| < 1` use the convergent sum
    /// `sum_{k >= 0} 4^-k K_0^(4^-k xi, 2^-k eta)`; elsewhere the identity
    /// `K^ = G^ - sum_{k >= 1} 4^k K_0^(4^k xi, 2^k eta)` is used, dropping
    /// terms whose argument is beyond the transform table's range.
    pub fn fourier_k_tensor(&self, xi: &[f64], eta: &[f64]) -> Array2<Complex64> {
        let tr = self.transform();
        let mut out = Array2::from_shape_fn((xi.len(), eta.len()), |(j, l)| {
            1.0 / Complex64::new(eta[l] * eta[l], xi[j])
        });
        for k in 1..64 {
            let sc = 2f64.powi(k);
            let rows: Vec<usize> = (0..xi.len())
                .filter(|&j| sc * sc * xi[j].abs() <= tr.u_cap)
                .collect();
            let cols: Vec<usize> = (0..eta.len())
                .filter(|&l| sc * eta[l].abs() <= tr.v_cap)
                .collect();
            if rows.is_empty() || cols.is_empty() {
                break;
            }
            let us: Vec<f64> = rows.iter().map(|&j| sc * sc * xi[j]).collect();
            let vs: Vec<f64> = cols.iter().map(|&l| sc * eta[l]).collect();
            let block = tr.eval_tensor(&us, &vs);
            for (a, &j) in rows.iter().enumerate() {
                for (b, &l) in cols.iter().enumerate() {
                    out[[j, l]] -= block[[a, b]] * (sc * sc);
                }
            }
        }
        let rows: Vec<usize> = (0..xi.len()).filter(|&j| xi[j].abs() < 1.0).collect();
        let cols: Vec<usize> = (0..eta.len()).filter(|&l| eta[l].abs() < 1.0).collect();
        if !rows.is_empty() && !cols.is_empty() {
            let mut acc = Array2::<Complex64>::zeros((rows.len(), cols.len()));
            for k in 0..DIRECT_TERMS {
                let sc = 2f64.powi(-k);
                let us: Vec<f64> = rows.iter().map(|&j| sc * sc * xi[j]).collect();
                let vs: Vec<f64> = cols.iter().map(|&l| sc * eta[l]).collect();
                acc = acc + tr.eval_tensor(&us, &vs) * (sc * sc);
            }
            for (a, &j) in rows.iter().enumerate() {
                for (b, &l) in cols.iter().enumerate() {
                    out[[j, l]] = acc[[a, b]] + tr.low_frequency_tail(xi[j], eta[l], DIRECT_TERMS);
                }
            }
        }
        out
    }
}

/// Terms of the low-frequency sum evaluated by quadrature; the rest use the
/// moment expansion of `K_0^` near the origin.
const DIRECT_TERMS: i32 = 10;

/// Gauss-Legendre tables for `K_0^(u, v)` with `|u| <= u_cap`, `|v| <= v_cap`.
///
/// `K_0` is smooth, even in `x` and supported in `(0, 1] x [-1, 1]`, so
/// `K_0^(u, v) = sum_i sum_l e^{-i t_i u} cos(x_l v) W_il` with `W` the
/// tabulated kernel times weights. Panels are short enough that the
/// oscillation at the caps is integrated to near machine precision.
#[derive(Clone, Debug)]
pub struct K0Transform {
    pub u_cap: f64,
    pub v_cap: f64,
    t_nodes: Vec<f64>,
    x_nodes: Vec<f64>,
    table: Array2<f64>,
    /// `int t^a x^b K_0` for `(a, b)` in `MOMENTS`.
    moments: [f64; 6],
}

const MOMENTS: [(i32, i32); 6] = [(0, 0), (1, 0), (2, 0), (0, 2), (1, 2), (0, 4)];

impl Default for K0Transform {
    fn default() -> Self {
        Self::new(4096.0, 256.0)
    }
}

/// Gauss-Legendre nodes on `[a, b]` with panels of phase span at most 11
/// radians at frequency `cap`.
pub(crate) fn oscillatory_rule(a: f64, b: f64, cap: f64, min_panels: usize) -> (Vec<f64>, Vec<f64>) {
    let order = 16;
    let panels = min_panels.max(((b - a) * cap / 11.0).ceil() as usize);
    let (gx, gw) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (&x, &w) in gx.iter().zip(&gw) {
            nodes.push(lo + 0.5 * h * (x + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

impl K0Transform {
    pub fn new(u_cap: f64, v_cap: f64) -> Self {
        let (t_nodes, tw) = oscillatory_rule(0.0, 1.0, u_cap, 16);
        let (x_nodes, xw) = oscillatory_rule(0.0, 1.0, v_cap, 8);
        let table = Array2::from_shape_fn((t_nodes.len(), x_nodes.len()), |(i, l)| {
            2.0 * tw[i] * xw[l] * radial_times_heat(annulus, Deriv::None, t_nodes[i], x_nodes[l])
        });
        let mut moments = [0.0; 6];
        for (m, &(a, b)) in moments.iter_mut().zip(&MOMENTS) {
            for ((i, l), &w) in table.indexed_iter() {
                *m += w * t_nodes[i].powi(a) * x_nodes[l].powi(b);
            }
        }
        Self { u_cap, v_cap, t_nodes, x_nodes, table, moments }
    }

    /// `sum_{k >= k0} 4^-k K_0^(4^-k xi, 2^-k eta)` from the expansion
    /// `K_0^(u, v) = sum m_ab (-iu)^a / a! (-1)^{b/2} v^b / b!` truncated at
    /// parabolic order 4. Accurate when `4^-k0 |xi|` and `2^-k0 |eta|` are small.
    pub fn low_frequency_tail(&self, xi: f64, eta: f64, k0: i32) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&m, &(a, b)) in self.moments.iter().zip(&MOMENTS) {
            let fact = |n: i32| (1..=n).product::<i32>() as f64;
            let coef = Complex64::new(0.0, -xi).powi(a) * (eta.powi(b) * if b % 4 == 2 { -1.0 } else { 1.0 })
                / (fact(a) * fact(b));
            let r = 2f64.powi(-(2 + 2 * a + b));
            acc += coef * m * (r.powi(k0) / (1.0 - r));
        }
        acc
    }

    /// `K_0^(u_a, v_b)` on a tensor grid.
    pub fn eval_tensor(&self, us: &[f64], vs: &[f64]) -> Array2<Complex64> {
        let cv = Array2::from_shape_fn((self.x_nodes.len(), vs.len()), |(l, b)| (self.x_nodes[l] * vs[b]).cos());
        let inner = self.table.dot(&cv);
        let (er, ei) = (
            Array2::from_shape_fn((us.len(), self.t_nodes.len()), |(a, i)| (self.t_nodes[i] * us[a]).cos()),
            Array2::from_shape_fn((us.len(), self.t_nodes.len()), |(a, i)| -(self.t_nodes[i] * us[a]).sin()),
        );
        crate::linalg::join(er.dot(&inner), ei.dot(&inner))
    }

    pub fn at(&self, u: f64, v: f64) -> Complex64 {
        self.eval_tensor(&[u], &[v])[[0, 0]]
    }

    /// `int K_0` straight from the table.
    pub fn mass(&self) -> f64 {
        self.table.sum()
    }

    pub(crate) fn tables(&self) -> (&[f64], &[f64], &Array2<f64>) {
        (&self.t_nodes, &self.x_nodes, &self.table)
    }
}

/// Product-integration weights of a kernel against bilinear hat functions.
///
/// `w[p][q + q_half] = int int k(s, y) L_p(s) L_q(y)` where `L` are hats on
/// the nodes `p dt`, `q dx`. Rows run over `p = 0..=p_len - 1`.
#[derive(Clone, Debug)]
pub struct ConvolutionWeights {
    pub dt: f64,
    pub dx: f64,
    pub q_half: usize,
    pub w: Array2<f64>,
}

impl ConvolutionWeights {
    /// Tabulate `k` on `[0, s_max] x [-y_max, y_max]`.
    ///
    /// With `singular` set, cells where the heat-kernel width `sqrt(s)` is
    /// below four space steps are integrated with a square-root substitution
    /// in time and panels of width `sqrt(s)/2` in space.
    pub fn build(k: impl Fn(f64, f64) -> f64, dt: f64, dx: f64, s_max: f64, y_max: f64, singular: bool) -> Self {
        let p_cells = (s_max / dt).ceil().max(1.0) as usize;
        let q_half = (y_max / dx).ceil().max(1.0) as usize;
        let mut w = Array2::<f64>::zeros((p_cells + 1, 2 * q_half + 1));
        let (g4, w4) = gauss_legendre(4);
        let (g16, w16) = gauss_legendre(16);
        let (g8, w8) = gauss_legendre(8);
        for p in 0..p_cells {
            let s0 = p as f64 * dt;
            let near = singular && s0 < 16.0 * dx * dx;
            for qc in 0..2 * q_half {
                let q = qc as i64 - q_half as i64;
                let y0 = q as f64 * dx;
                let mut acc = [0.0f64; 4]; // (p,q) (p+1,q) (p,q+1) (p+1,q+1)
                let mut add = |s: f64, y: f64, weight: f64| {
                    let v = k(s, y) * weight;
                    if v == 0.0 {
                        return;
                    }
                    let a = (s - s0) / dt;
                    let b = (y - y0) / dx;
                    acc[0] += v * (1.0 - a) * (1.0 - b);
                    acc[1] += v * a * (1.0 - b);
                    acc[2] += v * (1.0 - a) * b;
                    acc[3] += v * a * b;
                };
                if near {
                    let (r0, r1) = (s0.sqrt(), (s0 + dt).sqrt());
                    let ynear = y0.abs().min((y0 + dx).abs());
                    let ynear = if y0 <= 0.0 && y0 + dx >= 0.0 { 0.0 } else { ynear };
                    if ynear > 12.2 * r1 {
                        continue;
                    }
                    for (&gs, &ws) in g16.iter().zip(&w16) {
                        let sig = r0 + 0.5 * (r1 - r0) * (gs + 1.0);
                        let s = sig * sig;
                        let wsig = 0.5 * (r1 - r0) * ws * 2.0 * sig;
                        let half = 12.2 * sig;
                        let (ya, yb) = (y0.max(-half), (y0 + dx).min(half));
                        if yb <= ya {
                            continue;
                        }
                        let panels = (((yb - ya) / (0.5 * sig)).ceil() as usize).clamp(1, 400);
                        let h = (yb - ya) / panels as f64;
                        for m in 0..panels {
                            let lo = ya + m as f64 * h;
                            for (&gy, &wy) in g8.iter().zip(&w8) {
                                add(s, lo + 0.5 * h * (gy + 1.0), wsig * 0.5 * h * wy);
                            }
                        }
                    }
                } else {
                    for (&gs, &ws) in g4.iter().zip(&w4) {
                        let s = s0 + 0.5 * dt * (gs + 1.0);
                        for (&gy, &wy) in g4.iter().zip(&w4) {
                            add(s, y0 + 0.5 * dx * (gy + 1.0), 0.25 * dt * dx * ws * wy);
                        }
                    }
                }
                w[[p, qc]] += acc[0];
                w[[p + 1, qc]] += acc[1];
                w[[p, qc + 1]] += acc[2];
                w[[p + 1, qc + 1]] += acc[3];
            }
        }
        Self { dt, dx, q_half, w }
    }

    /// Sum of all weights, the discrete `int k`.
    pub fn mass(&self) -> f64 {
        self.w.sum()
    }
}

fn fft2(buf: &mut [Complex64], rows: usize, cols: usize, inverse: bool, planner: &mut FftPlanner<f64>) {
    let row_fft = if inverse { planner.plan_fft_inverse(cols) } else { planner.plan_fft_forward(cols) };
    row_fft.process(buf);
    let mut tr = vec![Complex64::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            tr[c * rows + r] = buf[r * cols + c];
        }
    }
    let col_fft = if inverse { planner.plan_fft_inverse(rows) } else { planner.plan_fft_forward(rows) };
    col_fft.process(&mut tr);
    for r in 0..rows {
        for c in 0..cols {
            buf[r * cols + c] = tr[c * rows + r];
        }
    }
}

/// `out(i, j) = sum_{p, q} w_pq f(i - p, j - q)` with `f` zero off the grid.
pub fn convolve_fft(weights: &ConvolutionWeights, f: &Array2<f64>) -> Array2<f64> {
    let (nt, nx) = f.dim();
    let (np, nq) = weights.w.dim();
    let rows = nt + np - 1;
    let cols = nx + nq - 1;
    let mut a = vec![Complex64::new(0.0, 0.0); rows * cols];
    let mut b = a.clone();
    for ((i, j), &v) in f.indexed_iter() {
        a[i * cols + j] = Complex64::new(v, 0.0);
    }
    for ((i, j), &v) in weights.w.indexed_iter() {
        b[i * cols + j] = Complex64::new(v, 0.0);
    }
    let mut planner = FftPlanner::new();
    fft2(&mut a, rows, cols, false, &mut planner);
    fft2(&mut b, rows, cols, false, &mut planner);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft2(&mut a, rows, cols, true, &mut planner);
    let norm = 1.0 / (rows * cols) as f64;
    let q0 = weights.q_half;
    Array2::from_shape_fn((nt, nx), |(i, j)| a[i * cols + j + q0].re * norm)
}

/// Reference summation for [`convolve_fft`].
pub fn convolve_direct(weights: &ConvolutionWeights, f: &Array2<f64>) -> Array2<f64> {
    let (nt, nx) = f.dim();
    let (np, nq) = weights.w.dim();
    let q0 = weights.q_half as i64;
    Array2::from_shape_fn((nt, nx), |(i, j)| {
        let mut acc = 0.0;
        for p in 0..np.min(i + 1) {
            for qc in 0..nq {
                let jj = j as i64 - (qc as i64 - q0);
                if jj >= 0 && (jj as usize) < nx {
                    acc += weights.w[[p, qc]] * f[[i - p, jj as usize]];
                }
            }
        }
        acc
    })
}

impl KernelDecomposition {
    /// Grid steps needed to resolve `which`.
    pub fn required_steps(&self, which: Kernel) -> (f64, f64) {
        match which {
            Kernel::Level(n) | Kernel::LevelDeriv(n, _) => (4f64.powi(-(n as i32)), 2f64.powi(-(n as i32))),
            _ => (1.0, 1.0),
        }
    }

    /// Product-integration weights of `which` for steps `(dt, dx)`; `reach`
    /// bounds the support used for kernels without compact support.
    pub fn weights(&self, which: Kernel, dt: f64, dx: f64, reach: (f64, f64)) -> ConvolutionWeights {
        let (s_max, y_max, singular) = match which {
            Kernel::K => (1.0, 1.0, true),
            Kernel::Heat => (reach.0, reach.1, true),
            Kernel::GSharp => (reach.0, reach.1, false),
            Kernel::Level(n) | Kernel::LevelDeriv(n, _) => {
                let d = 2f64.powi(-(n as i32));
                (d * d, d, false)
            }
        };
        ConvolutionWeights::build(|s, y| self.eval(which, s, y), dt, dx, s_max, y_max, singular)
    }

    /// Space-time convolution `which * f` on `f`'s grid, with `f` extended
    /// by zero outside the grid.
    pub fn convolve(&self, which: Kernel, f: &GriddedField) -> Result<GriddedField> {
        let (dt, dx) = (f.t.step, f.x.step);
        let (need_t, need_x) = self.required_steps(which);
        if dt > need_t * (1.0 + 1e-12) {
            return Err(Error::UnderResolved { what: "time step", required: need_t, actual: dt });
        }
        if dx > need_x * (1.0 + 1e-12) {
            return Err(Error::UnderResolved { what: "space step", required: need_x, actual: dx });
        }
        let reach = (f.t.end() - f.t.start, f.x.end() - f.x.start);
        let w = self.weights(which, dt, dx, reach);
        let values = convolve_fft(&w, &f.values);
        GriddedField::new(f.t, f.x, values)
    }

    /// `2^{(|D|_s - 2) n} <f, S^{2^-n}_z D K_0(-.)>` by trapezoidal quadrature
    /// on `f`'s grid. Equals `(D K_n * f)(z)` up to quadrature error.
    pub fn rescaled_pairing(&self, n: u32, d: Deriv, f: &GriddedField, z: Point) -> f64 {
        let s = 2f64.powi(n as i32);
        let (dt, dx) = (f.t.step, f.x.step);
        let mut acc = 0.0;
        for i in 0..f.t.len {
            let u = s * s * (z[0] - f.t.at(i));
            if u <= 0.0 || u > 1.0 {
                continue;
            }
            let wt = if i == 0 || i + 1 == f.t.len { 0.5 } else { 1.0 };
            for j in 0..f.x.len {
                let v = s * (z[1] - f.x.at(j));
                if v.abs() > 1.0 {
                    continue;
                }
                let wx = if j == 0 || j + 1 == f.x.len { 0.5 } else { 1.0 };
                acc += wt * wx * f.values[[i, j]] * s.powi(3) * self.k0(d, u, v);
            }
        }
        2f64.powi((d.scaled_degree() as i32 - 2) * n as i32) * acc * dt * dx
    }
}

/// Axis helper used by callers that build grids for convolution.
pub fn grid_axis(start: f64, end: f64, step: f64) -> Result<Axis> {
    let len = ((end - start) / step).round() as usize + 1;
    Axis::new(start, step, len)
}
