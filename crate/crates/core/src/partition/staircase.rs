//! Staircase covers of cells below the diagonal.
//!
//! Take `m` cells of a zero-error partition of `{x2 <= x1}` and push each step
//! of the staircase over them up to the diagonal. With corners `(x_i, x_i)`,
//! `x_1 <= ... <= x_m`, the cover has area
//!
//! ```text
//! x_1 (1 - x_1) + sum_{i >= 2} (x_i - x_{i-1}) (1 - x_i)
//! ```
//!
//! which is concave and peaks at `x_i = i / (m + 1)` with value
//! `m / (2 (m + 1))`. Any `m` cells of the partition therefore carry at most
//! that much probability, and the same holds for `q` cells by symmetry.

use serde::Serialize;

use super::{Label, LabeledPartition};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

const BOUND_TOL: f64 = 1e-12;
/// Largest cell count for which every subset is enumerated.
const EXHAUSTIVE_LIMIT: usize = 20;

/// Corner abscissae of a staircase cover, nondecreasing in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaircaseProfile {
    corners: Vec<f64>,
}

impl StaircaseProfile {
    pub fn new(corners: Vec<f64>) -> Result<Self> {
        if corners.is_empty() {
            return Err(Error::Domain("a staircase needs at least one corner".into()));
        }
        if corners.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::Domain("staircase corners must lie in (0, 1)".into()));
        }
        if corners.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("staircase corners must be nondecreasing".into()));
        }
        Ok(StaircaseProfile { corners })
    }

    pub fn corners(&self) -> &[f64] {
        &self.corners
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    /// Area under the pushed-up staircase.
    pub fn area(&self) -> f64 {
        area_of(&self.corners)
    }
}

fn area_of(x: &[f64]) -> f64 {
    let mut prev = 0.0;
    let mut total = 0.0;
    for &xi in x {
        total += (xi - prev) * (1.0 - xi);
        prev = xi;
    }
    total
}

/// `m / (2 (m + 1))`.
pub fn staircase_bound(m: usize) -> f64 {
    m as f64 / (2.0 * (m as f64 + 1.0))
}

/// Closed-form maximizer `x_i = i / (m + 1)` and its area.
pub fn staircase_max(m: usize) -> Result<(StaircaseProfile, f64)> {
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let corners: Vec<f64> = (1..=m).map(|i| i as f64 / (m as f64 + 1.0)).collect();
    Ok((StaircaseProfile::new(corners)?, staircase_bound(m)))
}

/// Maximizes the staircase area by cyclic coordinate ascent, each coordinate
/// set to the vertex of the parabola through three evaluations of the area.
/// Returns the corners, the area and the number of sweeps.
pub fn maximize_staircase_numerically(m: usize) -> Result<(Vec<f64>, f64, usize)> {
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    const STEP: f64 = 0.25;
    const MAX_SWEEPS: usize = 200_000;
    let mut x = vec![0.5; m];
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut largest_move = 0.0_f64;
        for i in 0..m {
            let t0 = x[i];
            let mut eval = |t: f64| {
                x[i] = t;
                area_of(&x)
            };
            let (fm, f0, fp) = (eval(t0 - STEP), eval(t0), eval(t0 + STEP));
            let curvature = fp - 2.0 * f0 + fm;
            let next = if curvature < 0.0 {
                t0 - STEP * (fp - fm) / (2.0 * curvature)
            } else {
                t0
            };
            x[i] = next;
            largest_move = largest_move.max((next - t0).abs());
        }
        if largest_move < 1e-15 {
            break;
        }
    }
    let area = area_of(&x);
    Ok((x, area, sweeps))
}

/// Outcome of testing a partition against the staircase bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaircaseCheck {
    pub holds: bool,
    /// Whether every subset was tested (otherwise the `m` largest cells for
    /// each `m`, which is the binding choice).
    pub exhaustive: bool,
    pub p_cells: usize,
    pub q_cells: usize,
    /// Mass of `{x2 <= x1}` accounted for by `p` cells plus the lower part of
    /// residual cells; must equal 1/2.
    pub p_total: f64,
    pub q_total: f64,
    /// Smallest `bound(m) - sum` over the tested subsets.
    pub p_min_slack: f64,
    pub q_min_slack: f64,
}

/// Tests `sum_{j<=m} p_{i_j} <= m / (2 (m + 1))` over subsets of the `p`
/// cells, likewise for `q`, and that each side carries total mass 1/2. For
/// truncated partitions the residual cells contribute their exact area on each
/// side of the diagonal to the totals.
pub fn check_staircase_bounds(part: &LabeledPartition) -> StaircaseCheck {
    let p = part.label_probabilities(Label::P);
    let q = part.label_probabilities(Label::Q);
    let residual_below = compensated_sum(part.residual().map(|c| c.rect.mass_below_diagonal()));
    let residual_above = compensated_sum(part.residual().map(|c| c.rect.probability() - c.rect.mass_below_diagonal()));
    let p_total = compensated_sum(p.iter().copied()) + residual_below;
    let q_total = compensated_sum(q.iter().copied()) + residual_above;
    let exhaustive = p.len() <= EXHAUSTIVE_LIMIT && q.len() <= EXHAUSTIVE_LIMIT;
    let (p_min_slack, q_min_slack) = if exhaustive {
        (subset_min_slack(&p), subset_min_slack(&q))
    } else {
        (largest_min_slack(&p), largest_min_slack(&q))
    };
    let holds = p_min_slack >= -BOUND_TOL
        && q_min_slack >= -BOUND_TOL
        && (p_total - 0.5).abs() <= BOUND_TOL
        && (q_total - 0.5).abs() <= BOUND_TOL;
    StaircaseCheck {
        holds,
        exhaustive,
        p_cells: p.len(),
        q_cells: q.len(),
        p_total,
        q_total,
        p_min_slack,
        q_min_slack,
    }
}

fn subset_min_slack(probs: &[f64]) -> f64 {
    let n = probs.len();
    let mut sums = vec![0.0_f64; 1 << n];
    let mut worst = f64::INFINITY;
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + probs[low];
        let m = mask.count_ones() as usize;
        worst = worst.min(staircase_bound(m) - sums[mask]);
    }
    worst
}

fn largest_min_slack(probs: &[f64]) -> f64 {
    let mut sorted = probs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut sum = 0.0;
    let mut worst = f64::INFINITY;
    for (k, p) in sorted.iter().enumerate() {
        sum += p;
        worst = worst.min(staircase_bound(k + 1) - sum);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{LabeledCell, Rect};
    use proptest::prelude::*;

    fn profile(v: &[f64]) -> StaircaseProfile {
        StaircaseProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn area_examples() {
        assert_eq!(profile(&[0.5]).area(), 0.25);
        assert!((profile(&[1.0 / 3.0, 2.0 / 3.0]).area() - 1.0 / 3.0).abs() < 1e-15);
        assert!((profile(&[0.2, 0.2]).area() - 0.16).abs() < 1e-15);
    }

    #[test]
    fn profile_validation() {
        assert!(StaircaseProfile::new(vec![]).is_err());
        assert!(StaircaseProfile::new(vec![0.6, 0.4]).is_err());
        assert!(StaircaseProfile::new(vec![0.0, 0.4]).is_err());
        assert!(StaircaseProfile::new(vec![0.4, 1.0]).is_err());
    }

    #[test]
    fn closed_form_maxima() {
        let (s, a) = staircase_max(1).unwrap();
        assert_eq!(s.corners(), &[0.5]);
        assert_eq!(a, 0.25);
        let (s, a) = staircase_max(3).unwrap();
        assert_eq!(s.corners(), &[0.25, 0.5, 0.75]);
        assert_eq!(a, 0.375);
        let (s, a) = staircase_max(10).unwrap();
        assert!((a - 5.0 / 11.0).abs() < 1e-15);
        assert!((s.area() - a).abs() < 1e-15);
        assert!(staircase_max(0).is_err());
    }

    #[test]
    fn numerical_maximizer_agrees_with_closed_form() {
        for m in 1..=10 {
            let (x, area, _) = maximize_staircase_numerically(m).unwrap();
            assert!((area - staircase_bound(m)).abs() < 1e-9, "m = {m}");
            for (i, xi) in x.iter().enumerate() {
                assert!((xi - (i + 1) as f64 / (m + 1) as f64).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn perturbing_the_maximizer_lowers_the_area() {
        for m in 1..=10 {
            let (s, best) = staircase_max(m).unwrap();
            for i in 0..m {
                for d in [-1e-3, 1e-3] {
                    let mut x = s.corners().to_vec();
                    x[i] += d;
                    assert!(area_of(&x) < best, "m = {m}, i = {i}, d = {d}");
                }
            }
        }
    }

    /// Tridiagonal Toeplitz matrix with -2 on the diagonal and 1 beside it.
    fn quadratic_form(x: &[f64]) -> f64 {
        let m = x.len();
        let mut total = 0.0;
        for i in 0..m {
            let mut hx = -2.0 * x[i];
            if i > 0 {
                hx += x[i - 1];
            }
            if i + 1 < m {
                hx += x[i + 1];
            }
            total += x[i] * hx;
        }
        total
    }

    proptest! {
        #[test]
        fn area_is_concave(
            pair in (1usize..12).prop_flat_map(|m| (
                proptest::collection::vec(0.001f64..0.999, m),
                proptest::collection::vec(0.001f64..0.999, m),
            )),
            lambda in 0.0f64..1.0,
        ) {
            let (mut s, mut t) = pair;
            s.sort_by(f64::total_cmp);
            t.sort_by(f64::total_cmp);
            let mix: Vec<f64> = s.iter().zip(&t).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
            let lhs = profile(&mix).area();
            let rhs = lambda * profile(&s).area() + (1.0 - lambda) * profile(&t).area();
            prop_assert!(lhs >= rhs - 1e-12);
        }

        #[test]
        fn quadratic_form_is_a_sum_of_squares(x in proptest::collection::vec(-10.0f64..10.0, 1..16)) {
            let m = x.len();
            let mut squares = x[0] * x[0] + x[m - 1] * x[m - 1];
            for i in 1..m {
                squares += (x[i - 1] - x[i]) * (x[i - 1] - x[i]);
            }
            let scale = x.iter().map(|v| v * v).sum::<f64>().max(1.0);
            prop_assert!((quadratic_form(&x) + squares).abs() <= 1e-12 * scale);
        }
    }

    fn cell(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, label: Label) -> LabeledCell {
        LabeledCell::new(Rect::new(x_lo, x_hi, y_lo, y_hi).unwrap(), label)
    }

    #[test]
    fn oversized_cell_fails() {
        // A 0.3-mass p cell cannot exist: any single cell carries at most 1/4.
        let part = LabeledPartition::new(vec![
            cell(0.4, 1.0, 0.0, 0.5, Label::P),
            cell(0.0, 0.4, 0.0, 1.0, Label::Undecided),
            cell(0.4, 1.0, 0.5, 1.0, Label::Undecided),
        ])
        .unwrap();
        let check = check_staircase_bounds(&part);
        assert!(!check.holds);
        assert!((check.p_min_slack - (0.25 - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn extremal_square_meets_the_single_cell_bound() {
        let part = LabeledPartition::new(vec![
            cell(0.5, 1.0, 0.0, 0.5, Label::P),
            cell(0.0, 0.5, 0.5, 1.0, Label::Q),
            cell(0.0, 0.5, 0.0, 0.5, Label::Undecided),
            cell(0.5, 1.0, 0.5, 1.0, Label::Undecided),
        ])
        .unwrap();
        let check = check_staircase_bounds(&part);
        assert!(check.holds && check.exhaustive);
        assert_eq!(check.p_min_slack, 0.0);
        assert_eq!(check.q_min_slack, 0.0);
        assert_eq!(check.p_total, 0.5);
    }

    #[test]
    fn exhaustive_and_largest_m_agree() {
        for seed in 0..40 {
            let part = crate::partition::sample::random_zero_error_partition(seed, 4);
            let p = part.label_probabilities(Label::P);
            if p.is_empty() || p.len() > 12 {
                continue;
            }
            assert!((subset_min_slack(&p) - largest_min_slack(&p)).abs() < 1e-15);
        }
    }
}
