//! Refinement of the Babai cell into error-free and crossed rectangles.
//!
//! Layout: three vertical strips. The outer strips are as wide as the x-extent
//! of the Voronoi facets that cut into the Babai cell on that side; the middle
//! strip lies wholly inside the Voronoi cell. Each outer strip is cut into
//! three rows: the bottom and top rows are the bounding bands of the two
//! facets in that strip, the middle row is error-free. Node 1 announces its
//! strip, node 2 announces its row, and only the four crossed cells need a
//! further comparison across a straight facet.

use serde::{Deserialize, Serialize};

use super::{AxisRect, ConvexPolygon, HalfPlane, Lattice2D, LatticePoint, Point2};
use crate::error::{Error, Result};
use crate::numeric::entropy_bits;

/// Crossing segments shorter than this are treated as touching the boundary.
const MIN_CROSSING: f64 = 1e-12;
const GEOM_TOL: f64 = 1e-12;

/// A Voronoi facet restricted to the Babai cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingSegment {
    pub start: Point2,
    pub end: Point2,
    /// The lattice point on the far side of the facet.
    pub neighbor: LatticePoint,
}

impl CrossingSegment {
    pub fn half_plane(&self) -> HalfPlane {
        HalfPlane::bisector(self.neighbor.point)
    }

    /// True when `p` is at least as close to the origin as to the neighbour.
    pub fn on_origin_side(&self, p: Point2) -> bool {
        self.half_plane().eval(p) <= 0.0
    }

    fn x_range(&self) -> (f64, f64) {
        (self.start.x1.min(self.end.x1), self.start.x1.max(self.end.x1))
    }

    fn y_range(&self) -> (f64, f64) {
        (self.start.x2.min(self.end.x2), self.start.x2.max(self.end.x2))
    }

    fn mid(&self) -> Point2 {
        (self.start + self.end) * 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellKind {
    ErrorFree,
    Crossed(CrossingSegment),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubCell {
    pub rect: AxisRect,
    pub column: usize,
    pub row: usize,
    pub kind: CellKind,
}

impl SubCell {
    pub fn is_error_free(&self) -> bool {
        matches!(self.kind, CellKind::ErrorFree)
    }

    pub fn crossing(&self) -> Option<&CrossingSegment> {
        match &self.kind {
            CellKind::Crossed(seg) => Some(seg),
            CellKind::ErrorFree => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BabaiSubdivision {
    babai_cell: AxisRect,
    column_edges: Vec<f64>,
    row_edges: Vec<Vec<f64>>,
    cells: Vec<SubCell>,
}

impl BabaiSubdivision {
    pub(super) fn build(lat: &Lattice2D) -> Result<Self> {
        let bc = lat.babai_cell();
        let voronoi = lat.voronoi_cell();

        let crossings: Vec<CrossingSegment> = lat
            .voronoi_facets()
            .into_iter()
            .filter_map(|(s, e, neighbor)| {
                let ((start, edge0), (end, edge1)) = clip_segment(s, e, &bc)?;
                let snap = |p: Point2, edge: Option<Edge>| edge.map_or(p, |ed| bisector_on_edge(neighbor.point, ed, p));
                let seg = CrossingSegment {
                    start: snap(start, edge0),
                    end: snap(end, edge1),
                    neighbor,
                };
                let m = seg.mid();
                let interior = m.x1 > bc.x_lo + GEOM_TOL
                    && m.x1 < bc.x_hi - GEOM_TOL
                    && m.x2 > bc.y_lo + GEOM_TOL
                    && m.x2 < bc.y_hi - GEOM_TOL;
                ((end - start).norm_sq().sqrt() > MIN_CROSSING && interior).then_some(seg)
            })
            .collect();

        if crossings.is_empty() {
            return Ok(BabaiSubdivision {
                babai_cell: bc,
                column_edges: vec![bc.x_lo, bc.x_hi],
                row_edges: vec![vec![bc.y_lo, bc.y_hi]],
                cells: vec![SubCell {
                    rect: bc,
                    column: 0,
                    row: 0,
                    kind: CellKind::ErrorFree,
                }],
            });
        }

        let (mut left, mut right): (Vec<_>, Vec<_>) = crossings.into_iter().partition(|s| s.mid().x1 < 0.0);
        if left.len() != 2 || right.len() != 2 {
            return Err(Error::UnsupportedGeometry(format!(
                "expected two Voronoi facets crossing each side of the Babai cell, found {} left and {} right",
                left.len(),
                right.len()
            )));
        }
        let x_left = left.iter().map(|s| s.x_range().1).fold(f64::MIN, f64::max);
        let x_right = right.iter().map(|s| s.x_range().0).fold(f64::MAX, f64::min);
        if !(x_left > bc.x_lo && x_left < x_right && x_right < bc.x_hi) {
            return Err(Error::UnsupportedGeometry(format!(
                "outer strips overlap: left strip ends at {x_left}, right strip starts at {x_right}"
            )));
        }
        let column_edges = vec![bc.x_lo, x_left, x_right, bc.x_hi];

        let mut row_edges = Vec::with_capacity(3);
        let mut cells = Vec::with_capacity(7);
        for (column, segs) in [(0usize, &mut left), (2usize, &mut right)] {
            segs.sort_by(|a, b| a.mid().x2.total_cmp(&b.mid().x2));
            let (lower, upper) = (segs[0], segs[1]);
            let y_mid_lo = lower.y_range().1;
            let y_mid_hi = upper.y_range().0;
            if y_mid_lo >= y_mid_hi - GEOM_TOL {
                return Err(Error::UnsupportedGeometry(format!(
                    "facets in strip {column} overlap vertically ({y_mid_lo} >= {y_mid_hi})"
                )));
            }
            let edges = vec![bc.y_lo, y_mid_lo, y_mid_hi, bc.y_hi];
            let (x_lo, x_hi) = (column_edges[column], column_edges[column + 1]);
            for (row, kind) in [
                (0, CellKind::Crossed(lower)),
                (1, CellKind::ErrorFree),
                (2, CellKind::Crossed(upper)),
            ] {
                let rect = AxisRect::new(x_lo, x_hi, edges[row], edges[row + 1])?;
                cells.push(SubCell { rect, column, row, kind });
            }
            row_edges.push(edges);
        }
        let middle = AxisRect::new(x_left, x_right, bc.y_lo, bc.y_hi)?;
        cells.push(SubCell {
            rect: middle,
            column: 1,
            row: 0,
            kind: CellKind::ErrorFree,
        });
        row_edges.insert(1, vec![bc.y_lo, bc.y_hi]);
        cells.sort_by_key(|c| (c.column, c.row));

        let sub = BabaiSubdivision {
            babai_cell: bc,
            column_edges,
            row_edges,
            cells,
        };
        sub.validate(&voronoi)?;
        Ok(sub)
    }

    fn validate(&self, voronoi: &ConvexPolygon) -> Result<()> {
        let unsupported = |msg: String| Err(Error::UnsupportedGeometry(msg));
        for cell in &self.cells {
            match &cell.kind {
                CellKind::ErrorFree => {
                    if !cell.rect.corners().iter().all(|&c| voronoi.contains(c, GEOM_TOL)) {
                        return unsupported(format!("cell {:?} is not inside the Voronoi cell", cell.rect));
                    }
                }
                CellKind::Crossed(seg) => {
                    for p in [seg.start, seg.end] {
                        if !on_boundary(&cell.rect, p) {
                            return unsupported(format!(
                                "facet endpoint {p:?} is not on the boundary of {:?}",
                                cell.rect
                            ));
                        }
                    }
                    let cell_poly = ConvexPolygon::from_rect(&cell.rect);
                    let inside = voronoi.clip_to_rect(&cell.rect).area();
                    let half = cell_poly.clip(&seg.half_plane()).area();
                    let hp = seg.half_plane();
                    let signs = cell.rect.corners().map(|c| hp.eval(c));
                    let both_sides = signs.iter().any(|&e| e > 0.0) && signs.iter().any(|&e| e < 0.0);
                    if (inside - half).abs() > GEOM_TOL || !both_sides {
                        return unsupported(format!("cell {:?} is not split by a single facet", cell.rect));
                    }
                }
            }
        }
        let area: f64 = self.cells.iter().map(|c| c.rect.area()).sum();
        if (area - self.babai_cell.area()).abs() > GEOM_TOL {
            return unsupported(format!("cells cover area {area}, Babai cell has {}", self.babai_cell.area()));
        }
        Ok(())
    }

    pub fn babai_cell(&self) -> &AxisRect {
        &self.babai_cell
    }

    pub fn cells(&self) -> &[SubCell] {
        &self.cells
    }

    /// True when the Voronoi cell coincides with the Babai cell.
    pub fn is_degenerate(&self) -> bool {
        self.cells.len() == 1
    }

    /// Strip boundaries along `x1`, left to right.
    pub fn column_edges(&self) -> &[f64] {
        &self.column_edges
    }

    /// Row boundaries along `x2` for strip `column`, bottom to top.
    pub fn row_edges(&self, column: usize) -> &[f64] {
        &self.row_edges[column]
    }

    pub fn cell_at(&self, column: usize, row: usize) -> Option<&SubCell> {
        self.cells.iter().find(|c| c.column == column && c.row == row)
    }

    /// Probability of `rect` under the uniform law on the Babai cell.
    pub fn probability(&self, rect: &AxisRect) -> f64 {
        rect.area() / self.babai_cell.area()
    }

    /// Exact probability mass of the crossed cells.
    pub fn crossed_mass(&self) -> f64 {
        self.cells
            .iter()
            .filter(|c| !c.is_error_free())
            .map(|c| self.probability(&c.rect))
            .sum()
    }

    /// Strip and row distributions with the resulting average bits and rounds.
    ///
    /// `Q` is over the three strips and `Q0` is the middle strip. `P` is the
    /// row distribution inside an outer strip, rows listed bottom to top for
    /// the right strip; the left strip is its point reflection through the
    /// origin, so its rows are listed top to bottom. The two agree for every
    /// supported lattice and `P` is their width-weighted average. `P0` is the
    /// middle (error-free) row.
    pub fn round_rates(&self) -> RoundRates {
        let width = self.babai_cell.width();
        let q: Vec<f64> = self.column_edges.windows(2).map(|w| (w[1] - w[0]) / width).collect();
        if self.is_degenerate() {
            return RoundRates::from_distributions(q, 0, vec![1.0], 0);
        }
        let height = self.babai_cell.height();
        let rows = |column: usize| -> Vec<f64> {
            self.row_edges[column].windows(2).map(|w| (w[1] - w[0]) / height).collect()
        };
        let mut left = rows(0);
        left.reverse();
        let right = rows(2);
        let (wl, wr) = (q[0], q[2]);
        let p = left
            .iter()
            .zip(&right)
            .map(|(l, r)| (wl * l + wr * r) / (wl + wr))
            .collect();
        RoundRates::from_distributions(q, 1, p, 1)
    }

    pub fn to_schema(&self) -> SubdivisionJson {
        SubdivisionJson {
            babai_cell: self.babai_cell.to_array(),
            cells: self
                .cells
                .iter()
                .map(|c| SubdivisionCellJson {
                    rect: c.rect.to_array(),
                    error_free: c.is_error_free(),
                    prob: self.probability(&c.rect),
                })
                .collect(),
        }
    }
}

fn on_boundary(r: &AxisRect, p: Point2) -> bool {
    let near = |a: f64, b: f64| (a - b).abs() <= GEOM_TOL;
    let inside = p.x1 >= r.x_lo - GEOM_TOL
        && p.x1 <= r.x_hi + GEOM_TOL
        && p.x2 >= r.y_lo - GEOM_TOL
        && p.x2 <= r.y_hi + GEOM_TOL;
    inside && (near(p.x1, r.x_lo) || near(p.x1, r.x_hi) || near(p.x2, r.y_lo) || near(p.x2, r.y_hi))
}

/// Liang-Barsky clip of the segment `s -> e` to a closed rectangle.
/// Edge of an axis-aligned rectangle: `(horizontal, coordinate)`.
type Edge = (bool, f64);

/// Liang-Barsky clipping of `[s, e]` to `r`. Each returned endpoint carries
/// the rectangle edge it was clipped to, if any.
fn clip_segment(s: Point2, e: Point2, r: &AxisRect) -> Option<((Point2, Option<Edge>), (Point2, Option<Edge>))> {
    let d = e - s;
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    let (mut edge0, mut edge1) = (None, None);
    for (p, q, edge) in [
        (-d.x1, s.x1 - r.x_lo, (false, r.x_lo)),
        (d.x1, r.x_hi - s.x1, (false, r.x_hi)),
        (-d.x2, s.x2 - r.y_lo, (true, r.y_lo)),
        (d.x2, r.y_hi - s.x2, (true, r.y_hi)),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 && t > t0 {
                t0 = t;
                edge0 = Some(edge);
            } else if p > 0.0 && t < t1 {
                t1 = t;
                edge1 = Some(edge);
            }
        }
    }
    (t0 < t1).then(|| ((s + d * t0, edge0), (s + d * t1, edge1)))
}

/// Where the bisector of the origin and `lambda` meets `edge`. Solving
/// `<y, lambda> = |lambda|^2 / 2` directly avoids interpolating along nearly
/// parallel facets, where the crossing is badly conditioned.
fn bisector_on_edge(lambda: Point2, edge: Edge, fallback: Point2) -> Point2 {
    let (a, b) = (lambda.x1, lambda.x2);
    let (horizontal, c) = edge;
    if horizontal && a != 0.0 {
        Point2::new((a * a + b * (b - 2.0 * c)) / (2.0 * a), c)
    } else if !horizontal && b != 0.0 {
        Point2::new(c, (b * b + a * (a - 2.0 * c)) / (2.0 * b))
    } else {
        fallback
    }
}

/// Strip/row distributions of a subdivision and the average cost of
/// refining a Babai cell into the Voronoi partition.
///
/// `r_bar = H(Q) + (1 - Q0) H(P) + 4 (1 - P0)(1 - Q0)` bits and
/// `n_bar = 1 + 2 (1 - P0)(1 - Q0)` rounds: one round for the strip/row
/// exchange plus an average of two bit-exchange rounds in each crossed cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRates {
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    #[serde(rename = "Q0")]
    pub q0: f64,
    #[serde(rename = "P0")]
    pub p0: f64,
    #[serde(rename = "R_bar")]
    pub r_bar: f64,
    #[serde(rename = "N_bar")]
    pub n_bar: f64,
}

impl RoundRates {
    /// `q0_index`/`p0_index` select the error-free symbol of each message.
    pub fn from_distributions(q: Vec<f64>, q0_index: usize, p: Vec<f64>, p0_index: usize) -> Self {
        let q0 = q[q0_index];
        let p0 = p[p0_index];
        let crossed = (1.0 - p0) * (1.0 - q0);
        let r_bar = entropy_bits(&q) + (1.0 - q0) * entropy_bits(&p) + 4.0 * crossed;
        let n_bar = 1.0 + 2.0 * crossed;
        RoundRates { q, p, q0, p0, r_bar, n_bar }
    }
}

/// Exported form: `{"babai_cell": [x_lo,x_hi,y_lo,y_hi], "cells": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionJson {
    pub babai_cell: [f64; 4],
    pub cells: Vec<SubdivisionCellJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionCellJson {
    pub rect: [f64; 4],
    pub error_free: bool,
    pub prob: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn square_lattice_is_degenerate() {
        let sub = Lattice2D::square().babai_subdivision().unwrap();
        assert!(sub.is_degenerate());
        assert!(sub.cells()[0].is_error_free());
        let rates = sub.round_rates();
        assert_eq!(rates.q0, 1.0);
        assert_eq!(rates.r_bar, 0.0);
        assert_eq!(rates.n_bar, 1.0);
    }

    #[test]
    fn rectangular_lattice_is_degenerate() {
        let sub = Lattice2D::new(2.0, FRAC_PI_2).unwrap().babai_subdivision().unwrap();
        assert!(sub.is_degenerate());
    }

    #[test]
    fn hexagonal_lattice_has_seven_cells() {
        let sub = Lattice2D::hexagonal().babai_subdivision().unwrap();
        assert_eq!(sub.cells().len(), 7);
        assert_eq!(sub.cells().iter().filter(|c| c.is_error_free()).count(), 3);
        // Each crossing is a diagonal of its cell for the hexagonal lattice.
        for c in sub.cells().iter().filter(|c| !c.is_error_free()) {
            let seg = c.crossing().unwrap();
            assert!((seg.x_range().1 - seg.x_range().0 - c.rect.width()).abs() < 1e-12);
            assert!((seg.y_range().1 - seg.y_range().0 - c.rect.height()).abs() < 1e-12);
        }
        let edges = sub.column_edges();
        assert!((edges[1] + 0.25).abs() < 1e-12 && (edges[2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn crossed_cells_thin_out_towards_a_right_angle() {
        let mut last = f64::INFINITY;
        for t in [0.4, 0.45, 0.48, 0.49, 0.499] {
            let sub = Lattice2D::new(1.0, t * PI).unwrap().babai_subdivision().unwrap();
            assert_eq!(sub.cells().len(), 7);
            assert_eq!(sub.cells().iter().filter(|c| c.is_error_free()).count(), 3);
            let r = sub.round_rates();
            assert!((sub.crossed_mass() - (1.0 - r.q0) * (1.0 - r.p0)).abs() < 1e-12);
            assert!(sub.crossed_mass() < last);
            last = sub.crossed_mass();
        }
        assert!(last < 0.005);
    }

    #[test]
    fn middle_strip_width_is_the_shear() {
        for theta in [1.3, 1.5707963, 1.570796326, 1.57079632679] {
            let lat = Lattice2D::new(1.0, theta).unwrap();
            let sub = lat.babai_subdivision().unwrap();
            let q0 = sub.round_rates().q0;
            assert!((q0 - theta.cos()).abs() <= 1e-15 * theta.cos().max(1e-3), "{theta}: {q0}");
            for c in sub.cells() {
                if let Some(seg) = c.crossing() {
                    let hp = seg.half_plane();
                    assert!(hp.eval(seg.start).abs() < 1e-15 && hp.eval(seg.end).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn hexagonal_round_rates() {
        let sub = Lattice2D::hexagonal().babai_subdivision().unwrap();
        let r = sub.round_rates();
        assert!((r.q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((r.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((r.q0 - 0.5).abs() < 1e-12);
        // Corner bands: h/2 - 1/(2 sqrt 3) out of h = sqrt(3)/2 gives 1/6 each.
        assert!((r.p[0] - 1.0 / 6.0).abs() < 1e-12 && (r.p[2] - 1.0 / 6.0).abs() < 1e-12);
        assert!(((1.0 - r.p0) * (1.0 - r.q0) - sub.crossed_mass()).abs() < 1e-12);
        assert!((r.n_bar - (1.0 + 2.0 * sub.crossed_mass())).abs() < 1e-12);
        let expected = 1.5 + 0.5 * entropy_bits(&[1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) + 4.0 / 6.0;
        assert!((r.r_bar - expected).abs() < 1e-12);
    }

    #[test]
    fn left_and_right_strips_are_point_reflections() {
        for (rho, theta) in [(1.0, FRAC_PI_3), (1.0, 1.3), (1.4, 1.2), (1.1, 1.45)] {
            let sub = Lattice2D::new(rho, theta).unwrap().babai_subdivision().unwrap();
            let l = sub.row_edges(0);
            let r = sub.row_edges(2);
            for i in 0..4 {
                assert!((l[i] + r[3 - i]).abs() < 1e-12, "rho {rho} theta {theta}");
            }
        }
    }

    #[test]
    fn schema_round_trips() {
        let sub = Lattice2D::hexagonal().babai_subdivision().unwrap();
        let json = crate::format::to_json(&sub.to_schema());
        let back: SubdivisionJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sub.to_schema());
        let total: f64 = back.cells.iter().map(|c| c.prob).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_basis_vector_is_unsupported() {
        // rho sin(theta) far below the unit spacing: facets cross the top and
        // bottom edges instead of cutting off corners.
        let err = Lattice2D::new(0.3, 1.2).unwrap().babai_subdivision().unwrap_err();
        assert!(matches!(err, Error::UnsupportedGeometry(_)));
    }
}
