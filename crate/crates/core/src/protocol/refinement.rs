use super::{Action, Context, Interval, Outcome, Protocol, Transcript};
use crate::error::{Error, Result};
use crate::lattice::{BabaiSubdivision, Lattice2D, LatticePoint, Point2, SubCell};

/// Refines the Babai cell of a lattice into its Voronoi cell.
///
/// Inputs are the two coordinates of a point in the Babai cell centred at the
/// origin. Node 1 names its strip; in an outer strip node 2 names its row; in
/// a crossed cell the nodes run bit exchange on the bounding box of the
/// Voronoi facet, where the facet is a diagonal. When the facet leaves part
/// of the cell uncut, each node's first message in the cell also says
/// whether its coordinate lies outside the box, which settles the outcome. The outcome indexes
/// [`VoronoiRefinement::points`]: `0` is the origin, `k` the neighbour beyond
/// the facet of crossed cell `k - 1`.
#[derive(Debug, Clone)]
pub struct VoronoiRefinement {
    lattice: Lattice2D,
    sub: BabaiSubdivision,
    max_depth: u32,
    crossed: Vec<SubCell>,
    boxes: Vec<FacetBox>,
    points: Vec<LatticePoint>,
}

const ORIGIN: u32 = 0;

/// Bounding box of the facet inside a crossed cell, where the facet is a
/// diagonal. The box spans the cell except possibly at one end of each axis.
#[derive(Debug, Clone, Copy)]
struct FacetBox {
    lo: [f64; 2],
    hi: [f64; 2],
    /// The cell extends below / above the box along each axis.
    below: [bool; 2],
    above: [bool; 2],
    anti: bool,
}

impl FacetBox {
    fn new(cell: &SubCell) -> Self {
        let seg = cell.crossing().expect("crossed cell");
        let r = cell.rect;
        let (c_lo, c_hi) = ([r.x_lo, r.y_lo], [r.x_hi, r.y_hi]);
        let ends = [[seg.start.x1, seg.end.x1], [seg.start.x2, seg.end.x2]];
        let mut b = FacetBox {
            lo: [0.0; 2],
            hi: [0.0; 2],
            below: [false; 2],
            above: [false; 2],
            anti: (seg.end.x1 - seg.start.x1) * (seg.end.x2 - seg.start.x2) < 0.0,
        };
        for a in 0..2 {
            let snap = 1e-12 * (c_hi[a] - c_lo[a]);
            let lo = ends[a][0].min(ends[a][1]).max(c_lo[a]);
            let hi = ends[a][0].max(ends[a][1]).min(c_hi[a]);
            b.below[a] = lo - c_lo[a] > snap;
            b.above[a] = c_hi[a] - hi > snap;
            b.lo[a] = if b.below[a] { lo } else { c_lo[a] };
            b.hi[a] = if b.above[a] { hi } else { c_hi[a] };
        }
        b
    }

    /// Cuts of the first message on `axis`: the box edges that lie inside
    /// the cell and the box midpoint.
    fn first_cuts(&self, axis: usize) -> Vec<f64> {
        let mut cuts = Vec::with_capacity(3);
        if self.below[axis] {
            cuts.push(self.lo[axis]);
        }
        cuts.push(0.5 * (self.lo[axis] + self.hi[axis]));
        if self.above[axis] {
            cuts.push(self.hi[axis]);
        }
        cuts
    }

    /// Bit of message `index` within the cell stage, or `None` when the
    /// symbol places the coordinate outside the box.
    fn bit(&self, index: usize, symbol: u32) -> Option<u32> {
        if index >= 2 {
            return Some(symbol);
        }
        let s = symbol as i64 - i64::from(self.below[index]);
        (0..2).contains(&s).then_some(s as u32)
    }
}

impl VoronoiRefinement {
    pub fn new(lattice: Lattice2D, max_depth: u32) -> Result<Self> {
        if max_depth == 0 {
            return Err(Error::Domain("max_depth must be at least 1".into()));
        }
        let sub = lattice.babai_subdivision()?;
        let crossed: Vec<SubCell> = sub.cells().iter().filter(|c| !c.is_error_free()).copied().collect();
        let boxes = crossed.iter().map(FacetBox::new).collect();
        let mut points = vec![LatticePoint {
            coeffs: [0, 0],
            point: Point2::ORIGIN,
        }];
        points.extend(crossed.iter().map(|c| c.crossing().expect("crossed cell").neighbor));
        Ok(VoronoiRefinement {
            lattice,
            sub,
            max_depth,
            crossed,
            boxes,
            points,
        })
    }

    pub fn lattice(&self) -> &Lattice2D {
        &self.lattice
    }

    pub fn subdivision(&self) -> &BabaiSubdivision {
        &self.sub
    }

    /// Lattice points named by decided outcomes.
    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn decode(&self, outcome: Outcome) -> Option<LatticePoint> {
        match outcome {
            Outcome::Decided(i) => self.points.get(i as usize).copied(),
            Outcome::Undecided => None,
        }
    }

    /// Nearest lattice point to `x`: local nearest-plane rounding followed by
    /// the refinement protocol on the offset from the Babai point.
    pub fn nearest_point(&self, x: Point2) -> Result<(LatticePoint, Transcript)> {
        let babai = self.lattice.nearest_plane_point(x);
        let r = x - babai.point;
        let t = super::run_protocol(self, r.x1, r.x2)?;
        let offset = self
            .decode(t.outcome)
            .ok_or_else(|| Error::Domain(format!("undecided after {} messages", t.stopping_time())))?;
        let coeffs = [babai.coeffs[0] + offset.coeffs[0], babai.coeffs[1] + offset.coeffs[1]];
        Ok((
            LatticePoint {
                coeffs,
                point: self.lattice.point(coeffs),
            },
            t,
        ))
    }

    fn crossed_index(&self, cell: &SubCell) -> usize {
        self.crossed
            .iter()
            .position(|c| c.column == cell.column && c.row == cell.row)
            .expect("crossed cell")
    }
}

impl Protocol for VoronoiRefinement {
    fn domain(&self) -> [Interval; 2] {
        let b = self.sub.babai_cell();
        [Interval { lo: b.x_lo, hi: b.x_hi }, Interval { lo: b.y_lo, hi: b.y_hi }]
    }

    fn next_action(&self, ctx: &Context<'_>) -> Action {
        let t = ctx.transcript;
        if self.sub.is_degenerate() {
            return Action::Stop(Outcome::Decided(ORIGIN));
        }
        let inner = |edges: &[f64]| edges[1..edges.len() - 1].to_vec();
        let Some(&column) = t.first() else {
            return Action::Send {
                cuts: inner(self.sub.column_edges()),
            };
        };
        let column = column as usize;
        if column == 1 {
            return Action::Stop(Outcome::Decided(ORIGIN));
        }
        let Some(&row) = t.get(1) else {
            return Action::Send {
                cuts: inner(self.sub.row_edges(column)),
            };
        };
        let cell = self.sub.cell_at(column, row as usize).expect("cell for every strip and row");
        let Some(seg) = cell.crossing() else {
            return Action::Stop(Outcome::Decided(ORIGIN));
        };
        let k = self.crossed_index(cell);
        let bx = &self.boxes[k];
        let decide = || {
            let [i1, i2] = ctx.intervals;
            let centre = Point2::new(i1.mid(), i2.mid());
            Action::Stop(Outcome::Decided(if seg.on_origin_side(centre) { ORIGIN } else { k as u32 + 1 }))
        };
        let bits = &t[2..];
        let n = bits.len();
        if n >= 1 && bx.bit(n - 1, bits[n - 1]).is_none() {
            return decide();
        }
        if n >= 2 && n % 2 == 0 {
            let b1 = bx.bit(n - 2, bits[n - 2]);
            let b2 = bx.bit(n - 1, bits[n - 1]).map(|b| if bx.anti { 1 - b } else { b });
            if b1 != b2 {
                return decide();
            }
            if n as u32 >= 2 * self.max_depth {
                return Action::Stop(Outcome::Undecided);
            }
        }
        let cuts = if n < 2 {
            bx.first_cuts(n)
        } else {
            vec![ctx.speaker_interval().mid()]
        };
        Action::Send { cuts }
    }

    fn state_key(&self, ctx: &Context<'_>) -> Option<u64> {
        let t = ctx.transcript;
        (t.len() >= 2).then(|| ((t[0] as u64 * 8 + t[1] as u64) << 32) | t.len() as u64)
    }
}
