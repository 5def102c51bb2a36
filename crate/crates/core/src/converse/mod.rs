//! Lower bounds on the cost of comparing two uniform reals.
//!
//! Any zero-error protocol induces a rectangular partition whose entropy is
//! the sum rate. This module evaluates the constraint sets those partitions
//! must satisfy, the entropy of the best self-similar partition, and the
//! assembled result: four bits, matched by bit exchange.

mod polytope;
mod ratio;
mod self_similar;

use serde::Serialize;

use crate::error::Result;
use crate::numeric::entropy_bits;
use crate::partition::{check_staircase_bounds, maximize_staircase_numerically, staircase_bound};
use crate::protocol::{induced_partition, sum_rate, BitExchange};

pub use polytope::{
    example1_grid_search, example1_min_entropy, joint_entropy, ConstraintPolytope, GridSearch, SubsetBound,
    VertexMinimum,
};
pub use ratio::{entropy_ratio, golden_section_minimize, minimize_entropy_ratio, RatioMinimum, RATIO_SEARCH_EPS};
pub use self_similar::{
    conditional_entropy_sequence, lower_entropy_within, self_similar_partition, SelfSimilarDecomposition,
    SideEntropies, MAX_SELF_SIMILAR_DEPTH,
};

/// Depth used to compare the closed form against bit exchange.
pub const CROSS_CHECK_DEPTH: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourBits {
    /// Entropy of the side `x1 >= x2`.
    pub h_side: f64,
    /// Conditional entropy on each side at the optimal `v = 1/2`.
    pub given_side: f64,
    pub total_bits: f64,
    pub bit_exchange_rate: f64,
    pub bit_exchange_gap: f64,
    pub holds: bool,
}

/// `H(side) + P(p) * ratio(1/2) + P(q) * ratio(1/2) = 1 + 3/2 + 3/2`, checked
/// against the depth-30 bit-exchange sum rate.
pub fn assemble_four_bits() -> Result<FourBits> {
    let h_side = entropy_bits(&[0.5, 0.5]);
    let given_side = entropy_ratio(0.5)?;
    let total_bits = h_side + 0.5 * given_side + 0.5 * given_side;
    let bit_exchange_rate = sum_rate(&BitExchange::new(CROSS_CHECK_DEPTH)?)?;
    let bit_exchange_gap = total_bits - bit_exchange_rate;
    Ok(FourBits {
        h_side,
        given_side,
        total_bits,
        bit_exchange_rate,
        bit_exchange_gap,
        holds: total_bits == 4.0 && bit_exchange_gap.abs() < 1e-7,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example1Report {
    pub vertex_p: Vec<f64>,
    pub vertex_q: Vec<f64>,
    pub min_entropy: f64,
    pub vertices_checked: usize,
    /// Entropy at the feasible non-vertex point `(1/4), (1/4, 1/4, 1/4)`.
    pub interior_entropy: f64,
    pub rejects_oversized_q: bool,
    pub grid: Option<GridSearch>,
    pub passed: bool,
}

pub fn example1_report(grid_units: Option<u32>) -> Result<Example1Report> {
    let v = example1_min_entropy(4)?;
    let poly = ConstraintPolytope::quadrant();
    let interior_entropy = joint_entropy(&[0.25], &[0.25, 0.25, 0.25]);
    let rejects_oversized_q = !poly.feasible(&[0.25], &[0.6, 0.15]);
    let grid = grid_units.map(|u| example1_grid_search(u, 4)).transpose()?;
    let grid_ok = grid.as_ref().is_none_or(|g| g.min_entropy >= 1.5 - 1e-9);
    Ok(Example1Report {
        passed: v.entropy == 1.5 && interior_entropy > 1.5 && rejects_oversized_q && grid_ok,
        vertex_p: v.p,
        vertex_q: v.q,
        min_entropy: v.entropy,
        vertices_checked: v.vertices_checked,
        interior_entropy,
        rejects_oversized_q,
        grid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaircaseMaximum {
    pub m: usize,
    pub bound: f64,
    pub numeric_area: f64,
    pub max_corner_error: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaircaseReport {
    pub maxima: Vec<StaircaseMaximum>,
    /// Bit-exchange partitions of depth `1..=12` meet every bound.
    pub bit_exchange_partitions: bool,
    /// Self-similar partitions with `v = 1/2`, depth `1..=12`.
    pub self_similar_partitions: bool,
    pub passed: bool,
}

pub fn staircase_report() -> Result<StaircaseReport> {
    let maxima = (1..=10)
        .map(|m| {
            let (x, area, sweeps) = maximize_staircase_numerically(m)?;
            let max_corner_error = x
                .iter()
                .enumerate()
                .map(|(i, xi)| (xi - (i + 1) as f64 / (m + 1) as f64).abs())
                .fold(0.0, f64::max);
            Ok(StaircaseMaximum {
                m,
                bound: staircase_bound(m),
                numeric_area: area,
                max_corner_error,
                sweeps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut bit_exchange_partitions = true;
    let mut self_similar_partitions = true;
    for d in 1..=12 {
        bit_exchange_partitions &= check_staircase_bounds(&induced_partition(&BitExchange::new(d)?)?).holds;
        self_similar_partitions &= check_staircase_bounds(&self_similar_partition(0.5, d)?).holds;
    }
    let maxima_ok = maxima
        .iter()
        .all(|s| (s.numeric_area - s.bound).abs() <= 1e-9 && s.max_corner_error <= 1e-6);
    Ok(StaircaseReport {
        passed: maxima_ok && bit_exchange_partitions && self_similar_partitions,
        maxima,
        bit_exchange_partitions,
        self_similar_partitions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointCheck {
    pub v: f64,
    pub contraction: f64,
    pub limit: f64,
    pub depth: u32,
    pub truncated: f64,
    /// Largest deviation from `H_d = H(S) + r H_{d-1}` over the depths.
    pub recursion_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourBitReport {
    pub v_star: f64,
    pub ratio_min: f64,
    pub ratio_unique: bool,
    pub total_bits: f64,
    pub bit_exchange_rate: f64,
    pub fixed_points: Vec<FixedPointCheck>,
    pub passed: bool,
}

pub fn four_bit_report() -> Result<FourBitReport> {
    let min = minimize_entropy_ratio(1e-6)?;
    let four = assemble_four_bits()?;
    let depth = 14;
    let fixed_points = [0.3, 0.5, 0.7]
        .iter()
        .map(|&v| {
            let dec = SelfSimilarDecomposition::new(v, depth)?;
            let r = dec.contraction();
            let seq = conditional_entropy_sequence(v, depth)?;
            let mut prev = 0.0;
            let mut recursion_error: f64 = 0.0;
            for &h in &seq {
                recursion_error = recursion_error.max((h - (dec.split_entropy() + r * prev)).abs());
                prev = h;
            }
            Ok(FixedPointCheck {
                v,
                contraction: r,
                limit: entropy_ratio(v)?,
                depth,
                truncated: prev,
                recursion_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fixed_ok = fixed_points.iter().all(|c| {
        let gap = c.limit - c.truncated;
        c.recursion_error <= 1e-12 && (gap - c.contraction.powi(c.depth as i32) * c.limit).abs() <= 1e-12
    });
    Ok(FourBitReport {
        passed: (min.v_star - 0.5).abs() <= 1e-6
            && (min.ratio_min - 3.0).abs() <= 1e-9
            && min.unique
            && four.holds
            && fixed_ok,
        v_star: min.v_star,
        ratio_min: min.ratio_min,
        ratio_unique: min.unique,
        total_bits: four.total_bits,
        bit_exchange_rate: four.bit_exchange_rate,
        fixed_points,
    })
}

/// Every converse check. Keys follow the wire format of `verify converse`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseReport {
    pub example1: Example1Report,
    pub thm3: StaircaseReport,
    pub thm5: FourBitReport,
    pub passed: bool,
}

/// Runs every check; `grid_units` enables the exhaustive grid oracle for the
/// quadrant polytope.
pub fn verify_converse(grid_units: Option<u32>) -> Result<ConverseReport> {
    let example1 = example1_report(grid_units)?;
    let thm3 = staircase_report()?;
    let thm5 = four_bit_report()?;
    Ok(ConverseReport {
        passed: example1.passed && thm3.passed && thm5.passed,
        example1,
        thm3,
        thm5,
    })
}
