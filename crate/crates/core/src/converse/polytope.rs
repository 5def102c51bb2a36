use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, entropy_bits};
use crate::partition::staircase_bound;

const FEASIBLE_TOL: f64 = 1e-12;

/// Upper bound on the sum of any `m` probabilities on one side.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetBound {
    /// `table[m - 1]` for `m <= table.len()`, the last entry beyond.
    Table(Vec<f64>),
    /// `m / (2 (m + 1))`.
    Staircase,
}

impl SubsetBound {
    pub fn bound(&self, m: usize) -> f64 {
        match self {
            SubsetBound::Table(t) => t[(m.max(1) - 1).min(t.len() - 1)],
            SubsetBound::Staircase => staircase_bound(m),
        }
    }
}

/// Necessary conditions on the cell probabilities `(p, q)` of a zero-error
/// partition: subset-sum bounds on each side and fixed side totals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintPolytope {
    pub p_bounds: SubsetBound,
    pub q_bounds: SubsetBound,
    pub p_total: f64,
    pub q_total: f64,
}

impl ConstraintPolytope {
    /// For `f = 1` iff both inputs exceed 1/2: the `p` side is the top-right
    /// quarter, the `q` side an L-shape in which one cell holds at most 1/2
    /// and any two at most 3/4.
    pub fn quadrant() -> Self {
        ConstraintPolytope {
            p_bounds: SubsetBound::Table(vec![0.25]),
            q_bounds: SubsetBound::Table(vec![0.5, 0.75]),
            p_total: 0.25,
            q_total: 0.75,
        }
    }

    /// For the comparison `x1 >= x2`: staircase bounds on both triangles.
    pub fn staircase() -> Self {
        ConstraintPolytope {
            p_bounds: SubsetBound::Staircase,
            q_bounds: SubsetBound::Staircase,
            p_total: 0.5,
            q_total: 0.5,
        }
    }

    /// Sorting makes the `m` largest entries the binding subset for each `m`.
    pub fn feasible(&self, p: &[f64], q: &[f64]) -> bool {
        side_ok(p, &self.p_bounds, self.p_total) && side_ok(q, &self.q_bounds, self.q_total)
    }
}

fn side_ok(v: &[f64], bounds: &SubsetBound, total: f64) -> bool {
    if v.iter().any(|&x| !(x >= 0.0)) {
        return false;
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    for (k, x) in sorted.iter().enumerate() {
        prefix += x;
        if prefix > bounds.bound(k + 1) + FEASIBLE_TOL {
            return false;
        }
    }
    (compensated_sum(v.iter().copied()) - total).abs() <= FEASIBLE_TOL
}

/// Entropy of the joint vector `(p, q)`.
pub fn joint_entropy(p: &[f64], q: &[f64]) -> f64 {
    let all: Vec<f64> = p.iter().chain(q).copied().collect();
    entropy_bits(&all)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexMinimum {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub entropy: f64,
    pub vertices_checked: usize,
}

/// Minimum entropy over the vertices of the quadrant polytope: every
/// arrangement of `p* = (1/4)` and `q* = (1/2, 1/4)` padded with zeros to
/// `width` coordinates per side.
pub fn example1_min_entropy(width: usize) -> Result<VertexMinimum> {
    if width < 2 {
        return Err(Error::Domain("vertices need at least two coordinates per side".into()));
    }
    let poly = ConstraintPolytope::quadrant();
    let mut best: Option<VertexMinimum> = None;
    let mut checked = 0;
    for i in 0..width {
        let mut p = vec![0.0; width];
        p[i] = 0.25;
        for j in 0..width {
            for k in (0..width).filter(|&k| k != j) {
                let mut q = vec![0.0; width];
                q[j] = 0.5;
                q[k] = 0.25;
                if !poly.feasible(&p, &q) {
                    return Err(Error::Domain(format!("vertex {p:?}, {q:?} violates the constraints")));
                }
                checked += 1;
                let h = joint_entropy(&p, &q);
                if best.as_ref().is_none_or(|b| h < b.entropy) {
                    best = Some(VertexMinimum {
                        p: p.clone(),
                        q: q.clone(),
                        entropy: h,
                        vertices_checked: 0,
                    });
                }
            }
        }
    }
    let mut best = best.expect("at least one vertex");
    best.vertices_checked = checked;
    best.p.retain(|&x| x > 0.0);
    best.q.retain(|&x| x > 0.0);
    best.q.sort_by(|a, b| b.total_cmp(a));
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearch {
    pub units: u32,
    pub max_support: usize,
    pub feasible_points: u64,
    pub min_entropy: f64,
    pub argmin_p: Vec<f64>,
    pub argmin_q: Vec<f64>,
}

/// Exhaustive search over feasible `(p, q)` of the quadrant polytope whose
/// entries are multiples of `1 / units`, with at most `max_support` nonzero
/// entries per side. The objective is a sum of per-entry terms and the
/// constraints do not couple the sides, so each side is minimised on its own.
pub fn example1_grid_search(units: u32, max_support: usize) -> Result<GridSearch> {
    if units == 0 || units % 4 != 0 || max_support == 0 {
        return Err(Error::Domain("units must be a positive multiple of 4 and support at least 1".into()));
    }
    let poly = ConstraintPolytope::quadrant();
    let scale = f64::from(units);
    let side = |total: u32, bounds: &SubsetBound| -> (u64, f64, Vec<f64>) {
        let firsts: Vec<u32> = (1..=total).collect();
        firsts
            .par_iter()
            .map(|&first| {
                let mut acc = (0u64, f64::INFINITY, Vec::new());
                let mut parts = vec![first];
                each_partition(total - first, first, max_support - 1, &mut parts, &mut |parts| {
                    let v: Vec<f64> = parts.iter().map(|&u| f64::from(u) / scale).collect();
                    if side_ok(&v, bounds, f64::from(total) / scale) {
                        acc.0 += 1;
                        let h = v.iter().map(|&x| crate::numeric::plogp(x)).sum::<f64>();
                        if h < acc.1 {
                            acc.1 = h;
                            acc.2 = v;
                        }
                    }
                });
                acc
            })
            .reduce(
                || (0, f64::INFINITY, Vec::new()),
                |a, b| {
                    let count = a.0 + b.0;
                    if b.1 < a.1 || (b.1 == a.1 && b.2 > a.2) {
                        (count, b.1, b.2)
                    } else {
                        (count, a.1, a.2)
                    }
                },
            )
    };
    let (np, hp, p) = side(units / 4, &poly.p_bounds);
    let (nq, hq, q) = side(3 * units / 4, &poly.q_bounds);
    Ok(GridSearch {
        units,
        max_support,
        feasible_points: np * nq,
        min_entropy: hp + hq,
        argmin_p: p,
        argmin_q: q,
    })
}

/// Calls `visit` on each nonincreasing sequence that extends `parts`, sums to
/// the original total and has at most `slots` further entries, each at most
/// `cap`.
fn each_partition(rest: u32, cap: u32, slots: usize, parts: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
    if rest == 0 {
        visit(parts);
        return;
    }
    if slots == 0 {
        return;
    }
    for next in (1..=cap.min(rest)).rev() {
        parts.push(next);
        each_partition(rest - next, next, slots - 1, parts, visit);
        parts.pop();
    }
}
