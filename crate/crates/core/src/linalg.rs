//! Complex matrix products via real GEMM.

use ndarray::Array2;
use num_complex::Complex64;

pub(crate) fn split(a: &Array2<Complex64>) -> (Array2<f64>, Array2<f64>) {
    (a.mapv(|z| z.re), a.mapv(|z| z.im))
}

pub(crate) fn join(re: Array2<f64>, im: Array2<f64>) -> Array2<Complex64> {
    let mut out = Array2::<Complex64>::zeros(re.dim());
    ndarray::Zip::from(&mut out)
        .and(&re)
        .and(&im)
        .for_each(|o, &r, &i| *o = Complex64::new(r, i));
    out
}

/// Full complex product.
pub(crate) fn cmatmul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    cmatmul_split(&ar, &ai, &br, &bi)
}

pub(crate) fn cmatmul_split(
    ar: &Array2<f64>,
    ai: &Array2<f64>,
    br: &Array2<f64>,
    bi: &Array2<f64>,
) -> Array2<Complex64> {
    let re = ar.dot(br) - ai.dot(bi);
    let im = ar.dot(bi) + ai.dot(br);
    join(re, im)
}

/// Real part of a complex product.
pub(crate) fn re_cmatmul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<f64> {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    ar.dot(&br) - ai.dot(&bi)
}
