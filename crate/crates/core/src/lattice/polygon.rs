use super::{AxisRect, Point2};

/// Closed half-plane `{y : <normal, y> <= offset}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: Point2,
    pub offset: f64,
}

impl HalfPlane {
    /// Points at least as close to the origin as to `lambda`.
    pub fn bisector(lambda: Point2) -> Self {
        HalfPlane {
            normal: lambda,
            offset: 0.5 * lambda.norm_sq(),
        }
    }

    /// Signed slack; nonpositive inside.
    #[inline]
    pub fn eval(&self, p: Point2) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Convex polygon with counterclockwise vertices. May be empty after clipping.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

const VERTEX_EPS: f64 = 1e-12;

impl ConvexPolygon {
    pub fn from_rect(r: &AxisRect) -> Self {
        ConvexPolygon {
            vertices: r.corners().to_vec(),
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    /// Closed containment with slack `tol` measured along each edge normal.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        !self.is_empty()
            && self.edges().all(|(a, b)| {
                let e = b - a;
                let len = e.norm_sq().sqrt();
                e.cross(p - a) >= -tol * len
            })
    }

    pub fn is_centrally_symmetric(&self, tol: f64) -> bool {
        self.vertices
            .iter()
            .all(|v| self.vertices.iter().any(|w| (*v + *w).norm_sq().sqrt() <= tol))
    }

    /// Sutherland-Hodgman step against one half-plane.
    pub fn clip(&self, hp: &HalfPlane) -> ConvexPolygon {
        if self.is_empty() {
            return self.clone();
        }
        let scale = hp.normal.norm_sq().sqrt().max(1.0) * 1e-14;
        let slack = |p: Point2| {
            let s = hp.eval(p);
            if s.abs() <= scale {
                0.0
            } else {
                s
            }
        };
        let mut out = Vec::with_capacity(self.vertices.len() + 1);
        for (cur, next) in self.edges() {
            let (dc, dn) = (slack(cur), slack(next));
            if dc <= 0.0 {
                out.push(cur);
            }
            if (dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0) {
                let t = dc / (dc - dn);
                out.push(cur + (next - cur) * t);
            }
        }
        ConvexPolygon { vertices: out }.cleaned()
    }

    /// Intersection with an axis-aligned rectangle.
    pub fn clip_to_rect(&self, r: &AxisRect) -> ConvexPolygon {
        let planes = [
            HalfPlane { normal: Point2::new(-1.0, 0.0), offset: -r.x_lo },
            HalfPlane { normal: Point2::new(1.0, 0.0), offset: r.x_hi },
            HalfPlane { normal: Point2::new(0.0, -1.0), offset: -r.y_lo },
            HalfPlane { normal: Point2::new(0.0, 1.0), offset: r.y_hi },
        ];
        planes.iter().fold(self.clone(), |poly, hp| poly.clip(hp))
    }

    /// Drops repeated and collinear vertices.
    fn cleaned(mut self) -> Self {
        self.vertices.dedup_by(|a, b| (*a - *b).norm_sq() <= VERTEX_EPS * VERTEX_EPS);
        while self.vertices.len() > 1
            && (self.vertices[0] - *self.vertices.last().unwrap()).norm_sq() <= VERTEX_EPS * VERTEX_EPS
        {
            self.vertices.pop();
        }
        let mut changed = true;
        while changed && self.vertices.len() >= 3 {
            changed = false;
            let n = self.vertices.len();
            for i in 0..n {
                let prev = self.vertices[(i + n - 1) % n];
                let cur = self.vertices[i];
                let next = self.vertices[(i + 1) % n];
                let d1 = cur - prev;
                let d2 = next - cur;
                let len = (d1.norm_sq() * d2.norm_sq()).sqrt();
                if d1.cross(d2).abs() <= 1e-14 * len.max(1e-300) && d1.dot(d2) >= 0.0 {
                    self.vertices.remove(i);
                    changed = true;
                    break;
                }
            }
        }
        if self.vertices.len() < 3 {
            self.vertices.clear();
        }
        self
    }
}
