use super::{Label, LabeledCell, LabeledPartition, Rect, TargetFunction};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, entropy_bits};

const TOTAL_TOL: f64 = 1e-12;

/// Finite list of nonnegative masses.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Domain("probabilities must be finite and nonnegative".into()));
        }
        let total = compensated_sum(probs.iter().copied());
        if !(total > 0.0 && total <= 1.0 + TOTAL_TOL) {
            return Err(Error::Domain(format!("total mass {total} not in (0, 1]")));
        }
        Ok(ProbVector(probs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.0.iter().copied())
    }

    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.0)
    }

    /// `self` majorizes `other`: after sorting both nonincreasingly (and
    /// padding the shorter with zeros) every prefix sum of `self` is at least
    /// the matching prefix sum of `other`.
    pub fn majorizes(&self, other: &ProbVector) -> Result<bool> {
        let (ta, tb) = (self.total(), other.total());
        if (ta - tb).abs() > TOTAL_TOL {
            return Err(Error::MismatchedTotals(ta, tb));
        }
        let (a, b) = (self.sorted_desc(), other.sorted_desc());
        let n = a.len().max(b.len());
        let (mut sa, mut sb) = (0.0, 0.0);
        for k in 0..n {
            sa += a.get(k).copied().unwrap_or(0.0);
            sb += b.get(k).copied().unwrap_or(0.0);
            if sa < sb - TOTAL_TOL {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Index of the most probable `p` cell and the diagonal corner `v` of the
/// rectangle it grows into.
fn plan(part: &LabeledPartition, f: TargetFunction) -> Result<(usize, f64)> {
    if f != TargetFunction::MinIndicator {
        return Err(Error::Domain("readjustment is defined for the min indicator only".into()));
    }
    if !part.decided_cells_respect(f) {
        return Err(Error::InvalidPartition("decided cells must respect the min indicator".into()));
    }
    let (max_idx, max_cell) = part
        .cells()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.label == Label::P)
        .max_by(|(_, a), (_, b)| {
            a.rect
                .probability()
                .total_cmp(&b.rect.probability())
                .then(b.rect.x_lo().total_cmp(&a.rect.x_lo()))
                .then(b.rect.y_lo().total_cmp(&a.rect.y_lo()))
        })
        .ok_or_else(|| Error::InvalidPartition("partition has no p cell".into()))?;

    let r = max_cell.rect;
    let blocked = |v: f64| {
        part.residual()
            .any(|u| u.rect.x_lo() < v && v < u.rect.x_hi() && u.rect.y_lo() < v && v < u.rect.y_hi())
    };
    let mut candidates: Vec<f64> = std::iter::once(r.y_hi())
        .chain(part.residual().flat_map(|u| {
            [u.rect.x_lo(), u.rect.x_hi(), u.rect.y_lo(), u.rect.y_hi()]
        }))
        .chain(std::iter::once(r.x_lo()))
        .filter(|&v| v >= r.y_hi() && v <= r.x_lo())
        .collect();
    candidates.sort_by(f64::total_cmp);
    let v = candidates
        .into_iter()
        .find(|&v| !blocked(v))
        .ok_or_else(|| Error::InvalidPartition("no admissible corner on the diagonal".into()))?;
    Ok((max_idx, v))
}

fn touches_corner_block(c: &Rect, v: f64) -> bool {
    c.x_hi() > v && c.y_lo() < v
}

/// Grows the most probable `p` cell into the largest rectangle of the form
/// `[v, 1] x [0, v]` that contains it, clipping every other cell to its part
/// outside the grown rectangle. Cells swallowed whole are dropped; no cell is
/// split, so probability only moves into the grown cell.
///
/// `v` starts at the top edge of the chosen cell. Residual cells that straddle
/// the diagonal would become L-shaped if `(v, v)` fell strictly inside one of
/// them, so `v` moves right along the diagonal to the first point that is not
/// interior to any residual cell (one always exists before the cell's left
/// edge).
///
/// The sorted output majorizes the input whenever
/// [`readjustment_keeps_order`] holds.
pub fn readjust_max_rectangle(part: &LabeledPartition, f: TargetFunction) -> Result<LabeledPartition> {
    let (max_idx, v) = plan(part, f)?;
    let grown = Rect::new(v, 1.0, 0.0, v)?;
    let mut cells = vec![LabeledCell::new(grown, Label::P)];
    for (i, c) in part.cells().iter().enumerate() {
        if i == max_idx {
            continue;
        }
        if let Some(rect) = outside_corner_block(&c.rect, v)? {
            cells.push(LabeledCell::new(rect, c.label));
        }
    }
    Ok(LabeledPartition::from_tiling(cells))
}

/// Whether the cell that [`readjust_max_rectangle`] grows is at least as
/// probable as every cell the move clips or absorbs. Each clipped cell then
/// gives up mass to a cell that already ranked above it, so every prefix sum
/// of the sorted vector can only grow.
pub fn readjustment_keeps_order(part: &LabeledPartition, f: TargetFunction) -> Result<bool> {
    let (max_idx, v) = plan(part, f)?;
    let top = part.cells()[max_idx].rect.probability();
    Ok(part
        .cells()
        .iter()
        .filter(|c| touches_corner_block(&c.rect, v))
        .all(|c| c.rect.probability() <= top))
}

/// `c \ ([v, 1] x [0, v])`, which is a rectangle (or empty) unless `(v, v)`
/// lies strictly inside `c`.
fn outside_corner_block(c: &Rect, v: f64) -> Result<Option<Rect>> {
    let ix_lo = c.x_lo().max(v);
    let iy_hi = c.y_hi().min(v);
    if ix_lo >= c.x_hi() || c.y_lo() >= iy_hi {
        return Ok(Some(*c));
    }
    let cut_left = c.x_lo() < v;
    let cut_top = c.y_hi() > v;
    match (cut_left, cut_top) {
        (false, false) => Ok(None),
        (true, false) => Rect::new(c.x_lo(), v, c.y_lo(), c.y_hi()).map(Some),
        (false, true) => Rect::new(c.x_lo(), c.x_hi(), v, c.y_hi()).map(Some),
        (true, true) => Err(Error::InvalidPartition(format!(
            "grown rectangle would leave an L-shaped remainder of {c:?}"
        ))),
    }
}
