//! Parabolic geometry of space-time: scaled norms, dyadic lattices, grids
//! and Holder norms measured in the parabolic metric.

use ndarray::Array2;

use crate::error::invalid;
use crate::{Error, Result};

/// A space-time point `(t, x)`.
pub type Point = [f64; 2];

/// `||(t, x)||_s = (|t| + x^2)^(1/2)`.
pub fn scaled_norm(z: Point) -> f64 {
    (z[0].abs() + z[1] * z[1]).sqrt()
}

pub fn scaled_dist(a: Point, b: Point) -> f64 {
    scaled_norm([a[0] - b[0], a[1] - b[1]])
}

/// `|k|_s = 2 k_t + k_x`.
pub fn scaled_degree(k: [u32; 2]) -> u32 {
    2 * k[0] + k[1]
}

/// Rectangular increment `f(s+t, x+y) - f(s, x+y) - f(s+t, x) + f(s, x)`.
pub fn rect_increment(f: impl Fn(f64, f64) -> f64, s: f64, x: f64, t: f64, y: f64) -> f64 {
    f(s + t, x + y) - f(s, x + y) - f(s + t, x) + f(s, x)
}

/// Closed rectangle `[t0, t1] x [x0, x1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

impl Region {
    pub fn new(t0: f64, t1: f64, x0: f64, x1: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && x0.is_finite() && x1.is_finite()) {
            return invalid("region bounds must be finite");
        }
        if t1 < t0 || x1 < x0 {
            return invalid(format!("empty region [{t0}, {t1}] x [{x0}, {x1}]"));
        }
        Ok(Self { t0, t1, x0, x1 })
    }

    pub fn contains(&self, z: Point) -> bool {
        z[0] >= self.t0 && z[0] <= self.t1 && z[1] >= self.x0 && z[1] <= self.x1
    }
}

fn index_range(lo: f64, hi: f64, step: f64) -> (i64, i64) {
    // Tolerate round-off so that region edges on the lattice are included.
    let eps = 1e-9;
    ((lo / step - eps).ceil() as i64, (hi / step + eps).floor() as i64)
}

/// Per-axis coordinates of the level-`n` dyadic lattice inside `region`.
pub fn dyadic_axes(n: u32, region: &Region) -> (Vec<f64>, Vec<f64>) {
    let dt = 4f64.powi(-(n as i32));
    let dx = 2f64.powi(-(n as i32));
    let (a, b) = index_range(region.t0, region.t1, dt);
    let (c, d) = index_range(region.x0, region.x1, dx);
    let ts = (a..=b).map(|k| k as f64 * dt).collect();
    let xs = (c..=d).map(|k| k as f64 * dx).collect();
    (ts, xs)
}

/// Points `(2^-2n k1, 2^-n k2)` in `region`, time-major.
pub fn dyadic_lattice(n: u32, region: &Region) -> Vec<Point> {
    let (ts, xs) = dyadic_axes(n, region);
    let mut out = Vec::with_capacity(ts.len() * xs.len());
    for &t in &ts {
        for &x in &xs {
            out.push([t, x]);
        }
    }
    out
}

/// A uniform axis `start + i * step`, `i < len`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() || len == 0 {
            return invalid(format!("bad axis start={start} step={step} len={len}"));
        }
        Ok(Self { start, step, len })
    }

    /// `len` nodes spanning `[a, b]` inclusive.
    pub fn spanning(a: f64, b: f64, len: usize) -> Result<Self> {
        if len < 2 || !(b > a) {
            return invalid(format!("cannot span [{a}, {b}] with {len} nodes"));
        }
        Self::new(a, (b - a) / (len - 1) as f64, len)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.at(i)).collect()
    }
}

/// Values on a tensor grid; rows are time, columns are space.
#[derive(Clone, Debug, PartialEq)]
pub struct GriddedField {
    pub t: Axis,
    pub x: Axis,
    pub values: Array2<f64>,
}

impl GriddedField {
    pub fn new(t: Axis, x: Axis, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (t.len, x.len) {
            return invalid(format!(
                "values {:?} do not match axes ({}, {})",
                values.dim(),
                t.len,
                x.len
            ));
        }
        Ok(Self { t, x, values })
    }

    pub fn from_fn(t: Axis, x: Axis, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((t.len, x.len), |(i, j)| f(t.at(i), x.at(j)));
        Self { t, x, values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Nodes inside `region`, as index ranges.
    pub fn window(&self, region: &Region) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let pick = |ax: &Axis, lo: f64, hi: f64| {
            let a = ((lo - ax.start) / ax.step - 1e-9).ceil().max(0.0) as usize;
            let b = (((hi - ax.start) / ax.step + 1e-9).floor() + 1.0).max(0.0) as usize;
            a.min(ax.len)..b.min(ax.len)
        };
        (pick(&self.t, region.t0, region.t1), pick(&self.x, region.x0, region.x1))
    }

    /// Restriction to the nodes inside `region`.
    pub fn restrict(&self, region: &Region) -> Result<Self> {
        let (ri, rj) = self.window(region);
        if ri.is_empty() || rj.is_empty() {
            return Err(Error::OutOfDomain("region contains no grid nodes".into()));
        }
        let t = Axis::new(self.t.at(ri.start), self.t.step, ri.len())?;
        let x = Axis::new(self.x.at(rj.start), self.x.step, rj.len())?;
        let values = self.values.slice(ndarray::s![ri, rj]).to_owned();
        Ok(Self { t, x, values })
    }

    fn node(&self, ax: &Axis, v: f64, what: &str) -> Result<usize> {
        let k = (v - ax.start) / ax.step;
        let r = k.round();
        if (k - r).abs() > 1e-9 || r < 0.0 || r as usize >= ax.len {
            return Err(Error::OutOfDomain(format!(
                "{what} = {v} is not a grid node (index {k:.6} of {})",
                ax.len
            )));
        }
        Ok(r as usize)
    }

    /// Rectangular increment over grid nodes; every corner must be a node.
    pub fn rect_increment(&self, base: Point, offset: Point) -> Result<f64> {
        let i0 = self.node(&self.t, base[0], "t")?;
        let i1 = self.node(&self.t, base[0] + offset[0], "t + dt")?;
        let j0 = self.node(&self.x, base[1], "x")?;
        let j1 = self.node(&self.x, base[1] + offset[1], "x + dx")?;
        let v = &self.values;
        Ok(v[[i1, j1]] - v[[i0, j1]] - v[[i1, j0]] + v[[i0, j0]])
    }

    /// Every `st`-th time node and `sx`-th space node.
    pub fn subsample(&self, st: usize, sx: usize) -> Result<Self> {
        if st == 0 || sx == 0 {
            return invalid("subsample strides must be positive");
        }
        let values = self
            .values
            .slice(ndarray::s![..;st, ..;sx])
            .to_owned();
        let (nt, nx) = values.dim();
        Ok(Self {
            t: Axis::new(self.t.start, self.t.step * st as f64, nt)?,
            x: Axis::new(self.x.start, self.x.step * sx as f64, nx)?,
            values,
        })
    }
}

/// `sup |f| + sup |f(p) - f(q)| / ||p - q||_s^gamma` over grid-node pairs
/// with `0 < ||p - q||_s <= 1`.
///
/// The scan is over all node offsets inside the unit parabolic ball, so the
/// cost is (nodes) x (offsets); subsample large grids first.
pub fn holder_norm(field: &GriddedField, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return invalid(format!("Holder exponent must lie in (0, 1), got {gamma}"));
    }
    let (nt, nx) = field.values.dim();
    let (dt, dx) = (field.t.step, field.x.step);
    let v = &field.values;
    let mut best = 0.0f64;
    let pmax = ((1.0 / dt).floor() as usize).min(nt.saturating_sub(1));
    for p in 0..=pmax {
        let tt = p as f64 * dt;
        let room = 1.0 - tt;
        if room < 0.0 {
            break;
        }
        let qmax = ((room.sqrt() / dx).floor() as usize).min(nx.saturating_sub(1));
        // For p == 0 only positive space offsets are needed; for p > 0 both signs.
        let qs: Box<dyn Iterator<Item = i64>> = if p == 0 {
            Box::new(1..=qmax as i64)
        } else {
            Box::new(-(qmax as i64)..=qmax as i64)
        };
        for q in qs {
            let d = (tt + (q as f64 * dx).powi(2)).sqrt();
            if d == 0.0 || d > 1.0 {
                continue;
            }
            let inv = d.powf(-gamma);
            for i in 0..nt - p {
                let row_a = v.row(i);
                let row_b = v.row(i + p);
                let (j0, j1) = if q >= 0 {
                    (0usize, nx - q as usize)
                } else {
                    ((-q) as usize, nx)
                };
                for j in j0..j1 {
                    let jb = (j as i64 + q) as usize;
                    let diff = (row_a[j] - row_b[jb]).abs();
                    if diff * inv > best {
                        best = diff * inv;
                    }
                }
            }
        }
    }
    Ok(field.sup_norm() + best)
}

/// Holder norm of the restriction of `field` to `region`.
pub fn holder_norm_on(field: &GriddedField, region: &Region, gamma: f64) -> Result<f64> {
    holder_norm(&field.restrict(region)?, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lattice_counts_on_unit_square() {
        let r = Region::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(dyadic_lattice(1, &r).len(), 15);
        assert_eq!(dyadic_lattice(2, &r).len(), 85);
        let pts = dyadic_lattice(1, &r);
        assert_eq!(pts[0], [0.0, 0.0]);
        assert_eq!(pts[1], [0.0, 0.5]);
        assert_eq!(pts[3], [0.25, 0.0]);
    }

    #[test]
    fn norm_examples() {
        assert_eq!(scaled_norm([0.25, 0.5]), 0.5f64.sqrt());
        assert_eq!(scaled_degree([1, 1]), 3);
        assert!(Region::new(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn holder_of_constant_is_sup() {
        let t = Axis::spanning(0.0, 1.0, 9).unwrap();
        let x = Axis::spanning(-1.0, 1.0, 9).unwrap();
        let f = GriddedField::from_fn(t, x, |_, _| -3.0);
        assert_eq!(holder_norm(&f, 0.5).unwrap(), 3.0);
        assert!(holder_norm(&f, 1.0).is_err());
    }

    #[test]
    fn holder_of_linear_in_space() {
        // f = x on a fine grid: the quotient is |dx|^(1-gamma), maximal at distance 1.
        let t = Axis::spanning(0.0, 0.5, 5).unwrap();
        let x = Axis::spanning(0.0, 2.0, 65).unwrap();
        let f = GriddedField::from_fn(t, x, |_, x| x);
        let h = holder_norm(&f, 0.5).unwrap();
        assert!((h - 3.0).abs() < 1e-12, "{h}");
    }

    #[test]
    fn grid_rect_increment() {
        let t = Axis::spanning(0.0, 1.0, 5).unwrap();
        let x = Axis::spanning(0.0, 1.0, 5).unwrap();
        let f = GriddedField::from_fn(t, x, |a, b| a * b);
        let v = f.rect_increment([0.25, 0.25], [0.5, 0.75]).unwrap();
        assert!((v - 0.375).abs() < 1e-15);
        assert!(f.rect_increment([0.1, 0.0], [0.25, 0.25]).is_err());
        assert!(f.rect_increment([0.5, 0.5], [0.75, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in prop::array::uniform2(-5.0f64..5.0),
                               b in prop::array::uniform2(-5.0f64..5.0),
                               c in prop::array::uniform2(-5.0f64..5.0)) {
            prop_assert!(scaled_dist(a, c) <= scaled_dist(a, b) + scaled_dist(b, c) + 1e-12);
        }

        #[test]
        fn parabolic_homogeneity(t in -5.0f64..5.0, x in -5.0f64..5.0, l in 0.01f64..10.0) {
            let lhs = scaled_norm([l * l * t, l * x]);
            prop_assert!((lhs - l * scaled_norm([t, x])).abs() <= 1e-12 * (1.0 + lhs));
        }

        #[test]
        fn rect_increment_kills_sums(s in -2.0f64..2.0, x in -2.0f64..2.0,
                                     t in -2.0f64..2.0, y in -2.0f64..2.0) {
            let f = |a: f64, b: f64| a.sin() * 3.0 + b * b;
            prop_assert!(rect_increment(f, s, x, t, y).abs() < 1e-12);
        }

        #[test]
        fn holder_bounds_sup(seed in 0u64..1000) {
            let t = Axis::spanning(0.0, 1.0, 6).unwrap();
            let x = Axis::spanning(0.0, 1.0, 6).unwrap();
            let f = GriddedField::from_fn(t, x, |a, b| ((seed as f64) * a + 3.0 * b).sin());
            prop_assert!(holder_norm(&f, 0.3).unwrap() >= f.sup_norm());
        }
    }
}
