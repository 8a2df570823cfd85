//! Browser bindings for a handful of cheap fracheat operations.
//!
//! Every function returns flat `Float64Array`s; the page in `www/` reshapes
//! them. Errors surface as JavaScript exceptions carrying the core message.

use fracheat::heat_kernel::{heat_kernel, KernelDecomposition};
use fracheat::rough_model::{check_renorm_regime, renorm_limit, RenormSettings, RenormTable};
use fracheat::spectral_field::{sample_noise, SheetSpec};
use wasm_bindgen::prelude::*;

fn js(e: fracheat::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = if count > 1 { (hi - lo) / (count - 1) as f64 } else { 0.0 };
    (0..count).map(|i| lo + step * i as f64).collect()
}

/// One draw of the truncated sheet `X^n` on `[0, 1] x [-1, 1]`, row-major in time.
#[wasm_bindgen]
pub fn sample_sheet(h1: f64, h2: f64, n: u32, seed: u64, nt: usize, nx: usize) -> Result<Vec<f64>, JsError> {
    if nt < 2 || nx < 2 || nt * nx > 1 << 18 {
        return Err(JsError::new("grid must have at least 2 nodes per axis and at most 262144 in total"));
    }
    let spec = SheetSpec::new(h1, h2, n).map_err(js)?;
    let sheet = sample_noise(&spec, seed).map_err(js)?.sheet().map_err(js)?;
    let values = sheet.eval_grid(&linspace(0.0, 1.0, nt), &linspace(-1.0, 1.0, nx));
    Ok(values.iter().copied().collect())
}

/// `G`, `K` and `G#` at time `t` on `count` points of `[-x_max, x_max]`, interleaved per point.
#[wasm_bindgen]
pub fn kernel_split(t: f64, x_max: f64, count: usize) -> Result<Vec<f64>, JsError> {
    if !(t > 0.0) || !(x_max > 0.0) || count < 2 {
        return Err(JsError::new("need t > 0, x_max > 0 and at least 2 points"));
    }
    let kd = KernelDecomposition::new(0).map_err(js)?;
    let mut out = Vec::with_capacity(3 * count);
    for x in linspace(-x_max, x_max, count) {
        out.extend([heat_kernel(t, x), kd.k(t, x), kd.g_sharp(t, x)]);
    }
    Ok(out)
}

/// `C^1 .. C^n_max` followed by the rescaled limit (NaN where none exists).
#[wasm_bindgen]
pub fn renorm_table(h1: f64, h2: f64, n_max: u32) -> Result<Vec<f64>, JsError> {
    check_renorm_regime(h1, h2).map_err(js)?;
    if !(1..=12).contains(&n_max) {
        return Err(JsError::new("n_max must lie in 1..=12"));
    }
    let table = RenormTable::new(h1, h2, n_max, RenormSettings::default()).map_err(js)?;
    let mut out = (1..=n_max).map(|n| table.value(n)).collect::<fracheat::Result<Vec<f64>>>().map_err(js)?;
    out.push(renorm_limit(h1, h2).unwrap_or(f64::NAN));
    Ok(out)
}
