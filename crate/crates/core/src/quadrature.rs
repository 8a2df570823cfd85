//! Gauss-Legendre rules and composite rules for weighted integrals.

use crate::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A list of nodes and weights approximating some (possibly weighted) integral.
#[derive(Clone, Debug, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Append `panels` equal Gauss-Legendre panels on [a, b] with weight `u^power`.
    pub fn push_panels(&mut self, a: f64, b: f64, panels: usize, order: usize, power: f64) {
        if b <= a || panels == 0 {
            return;
        }
        let (gx, gw) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (&x, &w) in gx.iter().zip(&gw) {
                let u = lo + 0.5 * h * (x + 1.0);
                self.nodes.push(u);
                self.weights.push(0.5 * h * w * weight(u, power));
            }
        }
    }

    /// Append a rule for `int_0^eps u^power f(u) du` using `u = eps s^p` with
    /// `p = 1/(1+power)`, which turns the weight into a constant. The `s`
    /// range is split geometrically toward 0, where `f(eps s^p)` is not smooth.
    pub fn push_origin(&mut self, eps: f64, order: usize, power: f64) {
        assert!(power > -1.0);
        let (gx, gw) = gauss_legendre(order);
        let p = 1.0 / (1.0 + power);
        let scale = eps.powf(1.0 + power) * p;
        let mut hi = 1.0f64;
        for k in 0..12 {
            let lo = if k == 11 { 0.0 } else { hi * 0.25 };
            for (&x, &w) in gx.iter().zip(&gw) {
                let s = lo + 0.5 * (hi - lo) * (x + 1.0);
                self.nodes.push(eps * s.powf(p));
                self.weights.push(0.5 * (hi - lo) * w * scale);
            }
            hi = lo;
        }
    }
}

fn weight(u: f64, power: f64) -> f64 {
    if power == 0.0 {
        1.0
    } else {
        u.abs().powf(power)
    }
}

/// Adaptive Gauss-Kronrod style integration by panel halving.
///
/// Each panel is integrated with two Gauss-Legendre orders; panels whose
/// estimates disagree are split. Fails if `max_depth` is exhausted.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, max_depth: u32) -> Result<f64> {
    let lo = gauss_legendre(10);
    let hi = gauss_legendre(20);
    let eval = |rule: &(Vec<f64>, Vec<f64>), l: f64, r: f64| -> f64 {
        let h = 0.5 * (r - l);
        rule.0
            .iter()
            .zip(&rule.1)
            .map(|(&x, &w)| w * f(l + h * (x + 1.0)))
            .sum::<f64>()
            * h
    };
    let total_guess = eval(&hi, a, b).abs().max(1e-300);
    let mut stack = vec![(a, b, 0u32)];
    let mut sum = 0.0;
    while let Some((l, r, d)) = stack.pop() {
        let c = eval(&lo, l, r);
        let fine = eval(&hi, l, r);
        let tol = rel_tol * total_guess * (r - l) / (b - a);
        if (fine - c).abs() <= tol.max(1e-300) || (fine - c).abs() <= 1e-15 * fine.abs() {
            sum += fine;
        } else if d >= max_depth {
            return Err(Error::Quadrature(format!(
                "panel [{l:.3e}, {r:.3e}] not resolved after {d} halvings"
            )));
        } else {
            let m = 0.5 * (l + r);
            stack.push((l, m, d + 1));
            stack.push((m, r, d + 1));
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn origin_rule_matches_power_integral() {
        let mut r = Rule::default();
        r.push_origin(0.5, 12, -0.6);
        // int_0^0.5 u^-0.6 (1 + u) du
        let exact = 0.5f64.powf(0.4) / 0.4 + 0.5f64.powf(1.4) / 1.4;
        let got = r.integrate(|u| 1.0 + u);
        assert!((got - exact).abs() < 1e-10, "{got} vs {exact}");
    }

    #[test]
    fn adaptive_handles_peaks() {
        let v = adaptive(&|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10, 40).unwrap();
        let exact = 2.0 * (1.0 / 1e-4f64.sqrt()) * (1.0 / 1e-4f64.sqrt()).atan();
        assert!((v - exact).abs() / exact < 1e-9);
    }
}
