use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::entropy_bits;

/// Search interval margin for [`minimize_entropy_ratio`].
pub const RATIO_SEARCH_EPS: f64 = 1e-9;

/// `H([v^2, 2v(1-v), (1-v)^2]) / (2v(1-v))`: the conditional entropy, given
/// the side, of the self-similar partition that puts its largest cell at
/// `(v, v)`.
pub fn entropy_ratio(v: f64) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!("entropy ratio needs v in (0, 1), got {v}")));
    }
    let w = 1.0 - v;
    Ok(entropy_bits(&[v * v, 2.0 * v * w, w * w]) / (2.0 * v * w))
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`,
/// stopping once the bracket is shorter than `tol`.
pub fn golden_section_minimize(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioMinimum {
    pub v_star: f64,
    pub ratio_min: f64,
    pub tolerance: f64,
    /// The ratio is strictly larger at `v_star -+ 10 tolerance`.
    pub unique: bool,
    /// `|ratio(v_star) - ratio(1 - v_star)|`.
    pub symmetry_gap: f64,
}

/// Minimises [`entropy_ratio`] over `(eps, 1 - eps)` by golden section.
pub fn minimize_entropy_ratio(tolerance: f64) -> Result<RatioMinimum> {
    if !(tolerance > 0.0 && tolerance <= 1e-3) {
        return Err(Error::Domain(format!("tolerance must be in (0, 1e-3], got {tolerance}")));
    }
    let f = |v: f64| entropy_ratio(v).expect("search stays inside (0, 1)");
    let (v_star, ratio_min) = golden_section_minimize(f, RATIO_SEARCH_EPS, 1.0 - RATIO_SEARCH_EPS, tolerance);
    let step = 10.0 * tolerance;
    let unique = f(v_star - step) > ratio_min && f(v_star + step) > ratio_min;
    Ok(RatioMinimum {
        v_star,
        ratio_min,
        tolerance,
        unique,
        symmetry_gap: (ratio_min - f(1.0 - v_star)).abs(),
    })
}
