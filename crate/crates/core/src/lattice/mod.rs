//! Two-dimensional lattice geometry.
//!
//! A lattice is described by `(rho, theta)` through the upper-triangular
//! generator
//!
//! ```text
//!     | 1   rho cos(theta) |
//! V = |                    |
//!     | 0   rho sin(theta) |
//! ```
//!
//! whose columns are the basis vectors. Nearest-plane rounding against this
//! basis tiles the plane with axis-aligned rectangles (Babai cells); the exact
//! closest-point map tiles it with Voronoi cells. [`subdivision`] refines the
//! Babai cell of the origin into rectangles that either lie inside the Voronoi
//! cell or are cut by a single Voronoi facet.

mod polygon;
mod subdivision;

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use polygon::{ConvexPolygon, HalfPlane};
pub use subdivision::{
    BabaiSubdivision, CellKind, CrossingSegment, RoundRates, SubCell, SubdivisionCellJson,
    SubdivisionJson,
};

/// Coefficient radius used when collecting Voronoi-relevant candidates.
pub const VORONOI_CANDIDATE_RADIUS: i64 = 2;

/// `cos(theta)` values below this are treated as exactly zero, so that
/// `theta = pi/2` yields a rectangular lattice despite rounding in `cos`.
const COS_SNAP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    #[inline]
    pub fn dot(self, other: Point2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    #[inline]
    pub fn cross(self, other: Point2) -> f64 {
        self.x1 * other.x2 - self.x2 * other.x1
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x1 * s, self.x2 * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x1, -self.x2)
    }
}

/// Axis-aligned rectangle `[x_lo, x_hi] x [y_lo, y_hi]` in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl AxisRect {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        if !(x_lo < x_hi && y_lo < y_hi) || ![x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidRect { x_lo, x_hi, y_lo, y_hi });
        }
        Ok(AxisRect { x_lo, x_hi, y_lo, y_hi })
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            Point2::new(self.x_lo, self.y_lo),
            Point2::new(self.x_hi, self.y_lo),
            Point2::new(self.x_hi, self.y_hi),
            Point2::new(self.x_lo, self.y_hi),
        ]
    }

    /// Closed containment.
    pub fn contains(&self, p: Point2) -> bool {
        p.x1 >= self.x_lo && p.x1 <= self.x_hi && p.x2 >= self.y_lo && p.x2 <= self.y_hi
    }

    /// `[x_lo, x_hi, y_lo, y_hi]`, the order used by every exported schema.
    pub fn to_array(&self) -> [f64; 4] {
        [self.x_lo, self.x_hi, self.y_lo, self.y_hi]
    }
}

/// A lattice point together with its integer coordinates in the basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub coeffs: [i64; 2],
    pub point: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice2D {
    rho: f64,
    theta: f64,
}

impl Lattice2D {
    /// Requires `rho > 0` and `0 < theta <= pi/2` (a tiny overshoot of
    /// `pi/2` from decimal input is tolerated).
    pub fn new(rho: f64, theta: f64) -> Result<Self> {
        let ok = rho.is_finite()
            && theta.is_finite()
            && rho > 0.0
            && theta > 0.0
            && theta <= FRAC_PI_2 + 1e-12
            && theta.sin() > 0.0;
        if !ok {
            return Err(Error::DegenerateLattice { rho, theta });
        }
        Ok(Lattice2D { rho, theta })
    }

    /// The integer lattice `Z^2`.
    pub fn square() -> Self {
        Lattice2D {
            rho: 1.0,
            theta: FRAC_PI_2,
        }
    }

    /// The hexagonal lattice (`rho = 1`, `theta = pi/3`).
    pub fn hexagonal() -> Self {
        Lattice2D {
            rho: 1.0,
            theta: std::f64::consts::FRAC_PI_3,
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Horizontal offset `rho cos(theta)` of the second basis vector.
    pub fn shear(&self) -> f64 {
        let c = self.theta.cos();
        if c.abs() < COS_SNAP {
            0.0
        } else {
            self.rho * c
        }
    }

    /// Height `rho sin(theta)` of the second basis vector; also `det V`.
    pub fn height(&self) -> f64 {
        self.rho * self.theta.sin()
    }

    pub fn generator_matrix(&self) -> [[f64; 2]; 2] {
        [[1.0, self.shear()], [0.0, self.height()]]
    }

    pub fn determinant(&self) -> f64 {
        self.height()
    }

    pub fn basis(&self) -> [Point2; 2] {
        [Point2::new(1.0, 0.0), Point2::new(self.shear(), self.height())]
    }

    pub fn point(&self, coeffs: [i64; 2]) -> Point2 {
        let (c1, c2) = (coeffs[0] as f64, coeffs[1] as f64);
        Point2::new(c1 + c2 * self.shear(), c2 * self.height())
    }

    fn lattice_point(&self, coeffs: [i64; 2]) -> LatticePoint {
        LatticePoint {
            coeffs,
            point: self.point(coeffs),
        }
    }

    /// The Babai cell of the origin, `[-1/2, 1/2] x [-h/2, h/2]`.
    pub fn babai_cell(&self) -> AxisRect {
        let h = self.height();
        AxisRect {
            x_lo: -0.5,
            x_hi: 0.5,
            y_lo: -0.5 * h,
            y_hi: 0.5 * h,
        }
    }

    /// Nearest-plane rounding: first `x2` against the row spacing, then `x1`
    /// within the chosen row. Ties go to the even integer.
    pub fn nearest_plane_point(&self, x: Point2) -> LatticePoint {
        let b2 = (x.x2 / self.height()).round_ties_even();
        let b1 = (x.x1 - b2 * self.shear()).round_ties_even();
        self.lattice_point([b1 as i64, b2 as i64])
    }

    /// Exact closest lattice point. Starts from the nearest-plane point and
    /// scans every row of lattice points that could beat it; within a row the
    /// points are unit-spaced, so the rounded position and its two neighbours
    /// cover all ties. Equal distances resolve to the lexicographically
    /// smallest coefficient pair.
    pub fn nearest_lattice_point(&self, x: Point2) -> LatticePoint {
        let babai = self.nearest_plane_point(x);
        let mut best = babai;
        let mut best_d = (x - babai.point).norm_sq();
        let radius = best_d.sqrt();
        let h = self.height();
        let a = self.shear();
        let row_lo = ((x.x2 - radius) / h).floor() as i64 - 1;
        let row_hi = ((x.x2 + radius) / h).ceil() as i64 + 1;
        for c2 in row_lo..=row_hi {
            let centre = (x.x1 - c2 as f64 * a).round() as i64;
            for c1 in centre - 1..=centre + 1 {
                let cand = self.lattice_point([c1, c2]);
                let d = (x - cand.point).norm_sq();
                if d < best_d || (d == best_d && cand.coeffs < best.coeffs) {
                    best = cand;
                    best_d = d;
                }
            }
        }
        best
    }

    /// Voronoi cell of the origin: the intersection of the half-planes
    /// `{y : <y, l> <= |l|^2 / 2}` over short nonzero lattice vectors.
    pub fn voronoi_cell(&self) -> ConvexPolygon {
        let reach = 2.0 * (1.0 + self.rho);
        let mut cell = ConvexPolygon::from_rect(&AxisRect {
            x_lo: -reach,
            x_hi: reach,
            y_lo: -reach,
            y_hi: reach,
        });
        for lp in self.candidates() {
            cell = cell.clip(&HalfPlane::bisector(lp.point));
        }
        cell
    }

    /// Nonzero lattice points whose coefficients in a Lagrange-reduced basis
    /// lie in `[-r, r]^2`, which covers every Voronoi-relevant vector.
    fn candidates(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        let r = VORONOI_CANDIDATE_RADIUS;
        let [u, w] = self.reduced_basis();
        (-r..=r)
            .flat_map(move |a| (-r..=r).map(move |b| [a * u[0] + b * w[0], a * u[1] + b * w[1]]))
            .filter(|c| *c != [0, 0])
            .map(|c| self.lattice_point(c))
    }

    /// Coefficients, in the generator basis, of a Lagrange-reduced basis.
    pub fn reduced_basis(&self) -> [[i64; 2]; 2] {
        let (mut u, mut w) = ([1i64, 0], [0i64, 1]);
        loop {
            let (pu, pw) = (self.point(u), self.point(w));
            if pu.norm_sq() > pw.norm_sq() * (1.0 + 1e-12) {
                std::mem::swap(&mut u, &mut w);
                continue;
            }
            if 2.0 * pu.dot(pw).abs() <= pu.norm_sq() * (1.0 + 1e-12) {
                return [u, w];
            }
            let m = (pu.dot(pw) / pu.norm_sq()).round() as i64;
            w = [w[0] - m * u[0], w[1] - m * u[1]];
        }
    }

    /// Edges of the Voronoi cell, each tagged with the lattice point on the
    /// other side of it.
    pub fn voronoi_facets(&self) -> Vec<(Point2, Point2, LatticePoint)> {
        let cell = self.voronoi_cell();
        cell.edges()
            .filter_map(|(s, e)| {
                // The bisector that passes closest to both endpoints; short
                // edges lie within any fixed tolerance of several lines.
                let misfit = |lp: &LatticePoint| {
                    let hp = HalfPlane::bisector(lp.point);
                    let norm = hp.normal.norm_sq().sqrt();
                    hp.eval(s).abs().max(hp.eval(e).abs()) / norm
                };
                self.candidates()
                    .map(|lp| (misfit(&lp), lp))
                    .filter(|(d, _)| *d <= 1e-9)
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.point.norm_sq().total_cmp(&b.1.point.norm_sq())))
                    .map(|(_, lp)| (s, e, lp))
            })
            .collect()
    }

    pub fn babai_subdivision(&self) -> Result<BabaiSubdivision> {
        BabaiSubdivision::build(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, PI};

    fn brute_nearest(lat: &Lattice2D, x: Point2, r: i64) -> LatticePoint {
        let mut best: Option<(f64, LatticePoint)> = None;
        for c1 in -r..=r {
            for c2 in -r..=r {
                let lp = lat.lattice_point([c1, c2]);
                let d = (x - lp.point).norm_sq();
                match best {
                    Some((bd, b)) if d > bd || (d == bd && lp.coeffs > b.coeffs) => {}
                    _ => best = Some((d, lp)),
                }
            }
        }
        best.unwrap().1
    }

    #[test]
    fn generator_matrix_examples() {
        assert_eq!(Lattice2D::square().generator_matrix(), [[1.0, 0.0], [0.0, 1.0]]);
        let hex = Lattice2D::new(1.0, FRAC_PI_3).unwrap().generator_matrix();
        assert!((hex[0][1] - 0.5).abs() < 1e-15);
        assert!((hex[1][1] - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(hex[0][0], 1.0);
        assert_eq!(hex[1][0], 0.0);
        let rect = Lattice2D::new(2.0, FRAC_PI_2).unwrap();
        assert_eq!(rect.generator_matrix(), [[1.0, 0.0], [0.0, 2.0]]);
        assert!(rect.determinant() > 0.0);
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        assert!(matches!(Lattice2D::new(1.0, 0.0), Err(Error::DegenerateLattice { .. })));
        assert!(Lattice2D::new(0.0, 1.0).is_err());
        assert!(Lattice2D::new(-1.0, 1.0).is_err());
        assert!(Lattice2D::new(1.0, PI).is_err());
        assert!(Lattice2D::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn nearest_plane_examples() {
        let z2 = Lattice2D::square();
        let b = z2.nearest_plane_point(Point2::new(0.6, 0.2));
        assert_eq!(b.coeffs, [1, 0]);
        assert_eq!(b.point, Point2::new(1.0, 0.0));

        let hex = Lattice2D::hexagonal();
        let b = hex.nearest_plane_point(Point2::new(0.9, 0.9));
        assert_eq!(b.coeffs, [0, 1]);
        assert!((b.point.x1 - 0.5).abs() < 1e-15);
        assert!((b.point.x2 - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(b, brute_nearest(&hex, Point2::new(0.9, 0.9), 3));

        for lat in [z2, hex, Lattice2D::new(1.7, 1.1).unwrap()] {
            assert_eq!(lat.nearest_plane_point(Point2::ORIGIN).coeffs, [0, 0]);
        }
    }

    #[test]
    fn nearest_plane_ties_round_to_even() {
        let z2 = Lattice2D::square();
        assert_eq!(z2.nearest_plane_point(Point2::new(0.5, 0.0)).coeffs, [0, 0]);
        assert_eq!(z2.nearest_plane_point(Point2::new(1.5, 0.0)).coeffs, [2, 0]);
        assert_eq!(z2.nearest_plane_point(Point2::new(0.0, -0.5)).coeffs, [0, 0]);
    }

    #[test]
    fn nearest_lattice_point_examples() {
        let z2 = Lattice2D::square();
        assert_eq!(z2.nearest_lattice_point(Point2::new(0.6, 0.2)).coeffs, [1, 0]);
        let hex = Lattice2D::hexagonal();
        let x = Point2::new(0.9, 0.9);
        assert_eq!(hex.nearest_lattice_point(x), brute_nearest(&hex, x, 3));
        for c in [[0, 0], [3, -2], [-1, 4]] {
            for lat in [z2, hex, Lattice2D::new(0.8, 1.2).unwrap()] {
                let lp = lat.point(c);
                assert_eq!(lat.nearest_lattice_point(lp).coeffs, c);
            }
        }
    }

    #[test]
    fn nearest_lattice_point_breaks_ties_lexicographically() {
        let z2 = Lattice2D::square();
        assert_eq!(z2.nearest_lattice_point(Point2::new(0.5, 0.0)).coeffs, [0, 0]);
        assert_eq!(z2.nearest_lattice_point(Point2::new(0.5, 0.5)).coeffs, [0, 0]);
        assert_eq!(z2.nearest_lattice_point(Point2::new(-0.5, 0.5)).coeffs, [-1, 0]);
    }

    #[test]
    fn nearest_lattice_point_matches_brute_force_on_skewed_lattices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let lat = Lattice2D::new(rng.random_range(0.3..3.0), rng.random_range(0.2..FRAC_PI_2)).unwrap();
            for _ in 0..50 {
                let x = Point2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let fast = lat.nearest_lattice_point(x);
                let slow = brute_nearest(&lat, x, 30);
                let df = (x - fast.point).norm_sq();
                let ds = (x - slow.point).norm_sq();
                assert!(df <= ds + 1e-12, "lat {lat:?} x {x:?}: {fast:?} vs {slow:?}");
            }
        }
    }

    #[test]
    fn voronoi_cell_examples() {
        let sq = Lattice2D::square().voronoi_cell();
        assert_eq!(sq.vertices().len(), 4);
        for v in sq.vertices() {
            assert!((v.x1.abs() - 0.5).abs() < 1e-12 && (v.x2.abs() - 0.5).abs() < 1e-12);
        }

        let hex = Lattice2D::hexagonal().voronoi_cell();
        assert_eq!(hex.vertices().len(), 6);
        assert!((hex.area() - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(hex.is_centrally_symmetric(1e-12));

        let rect = Lattice2D::new(2.0, FRAC_PI_2).unwrap().voronoi_cell();
        assert_eq!(rect.vertices().len(), 4);
        for v in rect.vertices() {
            assert!((v.x1.abs() - 0.5).abs() < 1e-12 && (v.x2.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn voronoi_facets_name_their_neighbours() {
        let hex = Lattice2D::hexagonal();
        let facets = hex.voronoi_facets();
        assert_eq!(facets.len(), 6);
        for (s, e, lp) in facets {
            let mid = (s + e) * 0.5;
            assert!(((mid - lp.point).norm_sq() - mid.norm_sq()).abs() < 1e-12);
            assert!((lp.point.norm_sq() - 1.0).abs() < 1e-12);
        }
    }
}
