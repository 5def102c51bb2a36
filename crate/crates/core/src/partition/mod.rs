//! Rectangular partitions of the unit square under the uniform measure.
//!
//! A [`LabeledPartition`] is a list of axis-aligned cells, each labelled
//! `p` (the cell lies in `{f = 1}`), `q` (it lies in `{f = 0}`) or undecided.
//! Undecided cells are the residue left by a truncated protocol; they let
//! finite objects stand in for the infinite zero-error partitions of the
//! comparison problem.

mod majorization;
pub mod sample;
mod staircase;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, entropy_bits};

pub use majorization::{readjust_max_rectangle, readjustment_keeps_order, ProbVector};
pub use staircase::{
    check_staircase_bounds, maximize_staircase_numerically, staircase_bound, staircase_max, StaircaseCheck,
    StaircaseProfile,
};

const AREA_TOL: f64 = 1e-12;

/// Cell of the unit square with nonempty interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Rect {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        let ordered = x_lo < x_hi && y_lo < y_hi;
        let inside = x_lo >= 0.0 && y_lo >= 0.0 && x_hi <= 1.0 && y_hi <= 1.0;
        if !(ordered && inside) {
            return Err(Error::InvalidRect { x_lo, x_hi, y_lo, y_hi });
        }
        Ok(Rect { x_lo, x_hi, y_lo, y_hi })
    }

    pub fn unit() -> Self {
        Rect {
            x_lo: 0.0,
            x_hi: 1.0,
            y_lo: 0.0,
            y_hi: 1.0,
        }
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }
    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }
    pub fn y_lo(&self) -> f64 {
        self.y_lo
    }
    pub fn y_hi(&self) -> f64 {
        self.y_hi
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    /// Probability under the uniform law on the unit square.
    pub fn probability(&self) -> f64 {
        self.width() * self.height()
    }

    /// True when the open interiors intersect.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x_lo < other.x_hi && other.x_lo < self.x_hi && self.y_lo < other.y_hi && other.y_lo < self.y_hi
    }

    /// Mass of the cell inside `{x2 <= x1}`.
    pub fn mass_below_diagonal(&self) -> f64 {
        // Integrate clamp(x - y_lo, 0, height) over [x_lo, x_hi].
        let (c, h) = (self.y_lo, self.height());
        let g = |x: f64| {
            if x <= c {
                0.0
            } else if x <= c + h {
                0.5 * (x - c) * (x - c)
            } else {
                0.5 * h * h + h * (x - c - h)
            }
        };
        g(self.x_hi) - g(self.x_lo)
    }
}

impl TryFrom<[f64; 4]> for Rect {
    type Error = Error;
    fn try_from(a: [f64; 4]) -> Result<Self> {
        Rect::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> [f64; 4] {
        [r.x_lo, r.x_hi, r.y_lo, r.y_hi]
    }
}

/// Target function whose level sets a zero-error partition must respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetFunction {
    /// `f(x) = 1` iff `x1 >= x2`.
    MinIndicator,
    /// `f(x) = 1` iff `x1 > 1/2` and `x2 > 1/2`.
    Quadrant,
}

impl TargetFunction {
    pub fn eval(&self, x1: f64, x2: f64) -> bool {
        match self {
            TargetFunction::MinIndicator => x1 >= x2,
            TargetFunction::Quadrant => x1 > 0.5 && x2 > 0.5,
        }
    }

    /// Whether the open interior of `r` lies in `{f = 1}`.
    pub fn interior_in_one(&self, r: &Rect) -> bool {
        match self {
            TargetFunction::MinIndicator => r.y_hi <= r.x_lo,
            TargetFunction::Quadrant => r.x_lo >= 0.5 && r.y_lo >= 0.5,
        }
    }

    /// Whether the open interior of `r` lies in `{f = 0}`.
    pub fn interior_in_zero(&self, r: &Rect) -> bool {
        match self {
            TargetFunction::MinIndicator => r.x_hi <= r.y_lo,
            TargetFunction::Quadrant => r.x_hi <= 0.5 || r.y_hi <= 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "p")]
    P,
    #[serde(rename = "q")]
    Q,
    #[serde(rename = "u")]
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledCell {
    pub rect: Rect,
    pub label: Label,
}

impl LabeledCell {
    pub fn new(rect: Rect, label: Label) -> Self {
        LabeledCell { rect, label }
    }
}

/// A partition of the unit square into labelled rectangles.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPartition {
    cells: Vec<LabeledCell>,
}

impl LabeledPartition {
    /// Checks that the cells have disjoint interiors and cover the square.
    pub fn new(cells: Vec<LabeledCell>) -> Result<Self> {
        let part = LabeledPartition { cells };
        let total = part.total_probability();
        if (total - 1.0).abs() > AREA_TOL {
            return Err(Error::InvalidPartition(format!("cells cover area {total}, expected 1")));
        }
        if let Some((i, j)) = part.first_overlap() {
            return Err(Error::InvalidPartition(format!(
                "cells {i} and {j} overlap: {:?} and {:?}",
                part.cells[i].rect, part.cells[j].rect
            )));
        }
        Ok(part)
    }

    /// For generators whose output tiles the square by construction.
    pub(crate) fn from_tiling(cells: Vec<LabeledCell>) -> Self {
        debug_assert!((compensated_sum(cells.iter().map(|c| c.rect.probability())) - 1.0).abs() <= 1e-9);
        LabeledPartition { cells }
    }

    fn first_overlap(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.cells.len()).collect();
        order.sort_by(|&a, &b| self.cells[a].rect.x_lo.total_cmp(&self.cells[b].rect.x_lo));
        for (k, &i) in order.iter().enumerate() {
            let ri = &self.cells[i].rect;
            for &j in &order[k + 1..] {
                let rj = &self.cells[j].rect;
                if rj.x_lo >= ri.x_hi {
                    break;
                }
                if ri.overlaps(rj) {
                    return Some((i.min(j), i.max(j)));
                }
            }
        }
        None
    }

    pub fn cells(&self) -> &[LabeledCell] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<LabeledCell> {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn with_label(&self, label: Label) -> impl Iterator<Item = &LabeledCell> + '_ {
        self.cells.iter().filter(move |c| c.label == label)
    }

    pub fn residual(&self) -> impl Iterator<Item = &LabeledCell> + '_ {
        self.with_label(Label::Undecided)
    }

    pub fn has_residual(&self) -> bool {
        self.residual().next().is_some()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.rect.probability()).collect()
    }

    pub fn label_probabilities(&self, label: Label) -> Vec<f64> {
        self.with_label(label).map(|c| c.rect.probability()).collect()
    }

    pub fn total_probability(&self) -> f64 {
        compensated_sum(self.cells.iter().map(|c| c.rect.probability()))
    }

    /// Entropy in bits of the cell probabilities, residual cells included.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.probabilities())
    }

    /// Decided cells respect `f`; residual cells are ignored.
    pub fn decided_cells_respect(&self, f: TargetFunction) -> bool {
        self.cells.iter().all(|c| match c.label {
            Label::P => f.interior_in_one(&c.rect),
            Label::Q => f.interior_in_zero(&c.rect),
            Label::Undecided => true,
        })
    }

    /// Zero-error: no residual and every decided cell respects `f`.
    pub fn is_zero_error(&self, f: TargetFunction) -> bool {
        !self.has_residual() && self.decided_cells_respect(f)
    }

    pub fn to_schema(&self) -> PartitionJson {
        PartitionJson {
            cells: self
                .cells
                .iter()
                .map(|c| PartitionCellJson {
                    rect: c.rect,
                    label: c.label,
                    prob: c.rect.probability(),
                })
                .collect(),
        }
    }

    /// Validates the cells; the `prob` fields must agree with the areas.
    pub fn from_schema(schema: &PartitionJson) -> Result<Self> {
        for (i, c) in schema.cells.iter().enumerate() {
            if (c.prob - c.rect.probability()).abs() > AREA_TOL {
                return Err(Error::InvalidPartition(format!(
                    "cell {i}: prob {} disagrees with area {}",
                    c.prob,
                    c.rect.probability()
                )));
            }
        }
        LabeledPartition::new(schema.cells.iter().map(|c| LabeledCell::new(c.rect, c.label)).collect())
    }
}

/// Wire form: `{"cells": [{"rect": [x_lo,x_hi,y_lo,y_hi], "label": "p"|"q"|"u", "prob": f}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionJson {
    pub cells: Vec<PartitionCellJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCellJson {
    pub rect: Rect,
    pub label: Label,
    pub prob: f64,
}
