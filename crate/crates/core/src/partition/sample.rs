//! Seeded random guillotine partitions, used by property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Label, LabeledCell, LabeledPartition, Rect, TargetFunction};

/// Random guillotine partition of the unit square for the min indicator.
///
/// Cells on one side of the diagonal are labelled and sometimes split further;
/// cells that straddle it are split until `max_depth`, where they stay as
/// residual. Half of the straddling splits cut exactly where the diagonal
/// enters or leaves the cell, which peels off decided blocks.
pub fn random_zero_error_partition(seed: u64, max_depth: u32) -> LabeledPartition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = Vec::new();
    grow(Rect::unit(), 0, max_depth, &mut rng, &mut cells);
    LabeledPartition::from_tiling(cells)
}

fn grow(rect: Rect, depth: u32, max_depth: u32, rng: &mut ChaCha8Rng, out: &mut Vec<LabeledCell>) {
    let f = TargetFunction::MinIndicator;
    let label = if f.interior_in_one(&rect) {
        Some(Label::P)
    } else if f.interior_in_zero(&rect) {
        Some(Label::Q)
    } else {
        None
    };
    let split = match label {
        Some(_) => depth < max_depth && rng.random_bool(0.35),
        None => depth < max_depth,
    };
    if !split {
        out.push(LabeledCell::new(rect, label.unwrap_or(Label::Undecided)));
        return;
    }

    let (x_lo, x_hi, y_lo, y_hi) = (rect.x_lo(), rect.x_hi(), rect.y_lo(), rect.y_hi());
    let mut cuts: Vec<(bool, f64)> = Vec::new();
    if label.is_none() && rng.random_bool(0.5) {
        for (vertical, at) in [(true, y_hi), (true, y_lo), (false, x_hi), (false, x_lo)] {
            let (lo, hi) = if vertical { (x_lo, x_hi) } else { (y_lo, y_hi) };
            if at > lo && at < hi {
                cuts.push((vertical, at));
            }
        }
    }
    let (vertical, at) = if cuts.is_empty() {
        let vertical = rng.random_bool(0.5);
        let (lo, hi) = if vertical { (x_lo, x_hi) } else { (y_lo, y_hi) };
        (vertical, lo + (hi - lo) * rng.random_range(0.2..0.8))
    } else {
        cuts[rng.random_range(0..cuts.len())]
    };
    let (a, b) = if vertical {
        (Rect::new(x_lo, at, y_lo, y_hi), Rect::new(at, x_hi, y_lo, y_hi))
    } else {
        (Rect::new(x_lo, x_hi, y_lo, at), Rect::new(x_lo, x_hi, at, y_hi))
    };
    match (a, b) {
        (Ok(a), Ok(b)) => {
            grow(a, depth + 1, max_depth, rng, out);
            grow(b, depth + 1, max_depth, rng, out);
        }
        _ => out.push(LabeledCell::new(rect, label.unwrap_or(Label::Undecided))),
    }
}
