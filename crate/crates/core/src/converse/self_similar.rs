use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, entropy_bits};
use crate::partition::{Label, LabeledCell, LabeledPartition, Rect};

/// Deepest supported recursion; the partition has `3 * 2^depth - 2` cells.
pub const MAX_SELF_SIMILAR_DEPTH: u32 = 22;

/// One level of the self-similar partition of a diagonal square.
///
/// In the unit square, `r_star = [v,1] x [0,v]` is the largest cell below the
/// diagonal. What remains of the lower triangle is the lower half of the
/// diagonal squares `a = [0,v]^2` and `b = [v,1]^2`, each similar to the
/// whole. Given the side `x1 >= x2`, the three regions have probabilities
/// `2v(1-v)`, `v^2` and `(1-v)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfSimilarDecomposition {
    pub v: f64,
    pub r_star: Rect,
    pub a: Rect,
    pub b: Rect,
    pub depth: u32,
}

impl SelfSimilarDecomposition {
    pub fn new(v: f64, depth: u32) -> Result<Self> {
        check_v(v)?;
        Ok(SelfSimilarDecomposition {
            v,
            r_star: Rect::new(v, 1.0, 0.0, v)?,
            a: Rect::new(0.0, v, 0.0, v)?,
            b: Rect::new(v, 1.0, v, 1.0)?,
            depth,
        })
    }

    /// Probabilities of `r_star`, `a` and `b` given `x1 >= x2`.
    pub fn split_probabilities(&self) -> [f64; 3] {
        let (v, w) = (self.v, 1.0 - self.v);
        [2.0 * v * w, v * v, w * w]
    }

    /// Entropy of the region indicator given `x1 >= x2`.
    pub fn split_entropy(&self) -> f64 {
        entropy_bits(&self.split_probabilities())
    }

    /// `v^2 + (1-v)^2`, the rate at which truncated conditional entropies
    /// approach their limit.
    pub fn contraction(&self) -> f64 {
        let [_, a, b] = self.split_probabilities();
        a + b
    }
}

fn check_v(v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!("v must be in (0, 1), got {v}")));
    }
    Ok(())
}

/// Self-similar zero-error partition for `x1 >= x2`, truncated at `depth`.
///
/// Each diagonal square `[lo, hi]^2` split at `m = lo + v (hi - lo)` gets the
/// `p` cell `[m, hi] x [lo, m]`, its mirror `[lo, m] x [m, hi]` as a `q` cell,
/// and recurses into `[lo, m]^2` and `[m, hi]^2`. Squares at the final depth
/// stay undecided. For `v = 1/2` this is the bit-exchange partition.
pub fn self_similar_partition(v: f64, depth: u32) -> Result<LabeledPartition> {
    check_v(v)?;
    if !(1..=MAX_SELF_SIMILAR_DEPTH).contains(&depth) {
        return Err(Error::Domain(format!(
            "depth must be in 1..={MAX_SELF_SIMILAR_DEPTH}, got {depth}"
        )));
    }
    let mut cells = Vec::with_capacity(3 << depth);
    let mut stack = vec![(0.0_f64, 1.0_f64, 0_u32)];
    while let Some((lo, hi, level)) = stack.pop() {
        if level == depth {
            cells.push(LabeledCell::new(Rect::new(lo, hi, lo, hi)?, Label::Undecided));
            continue;
        }
        let m = lo + v * (hi - lo);
        if !(m > lo && m < hi) {
            return Err(Error::Domain(format!("square [{lo}, {hi}] too small to split at depth {level}")));
        }
        cells.push(LabeledCell::new(Rect::new(m, hi, lo, m)?, Label::P));
        cells.push(LabeledCell::new(Rect::new(lo, m, m, hi)?, Label::Q));
        stack.push((m, hi, level + 1));
        stack.push((lo, m, level + 1));
    }
    Ok(LabeledPartition::from_tiling(cells))
}

/// Entropy of a partition split by the side of the diagonal.
///
/// Residual cells contribute their part below the diagonal to the `p` side
/// and the rest to the `q` side, so each side is a partition of its triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideEntropies {
    /// Entropy of the side indicator.
    pub h_side: f64,
    pub p_mass: f64,
    pub q_mass: f64,
    pub h_given_p: f64,
    pub h_given_q: f64,
    /// Entropy of the side given the cell; nonzero only for residual cells.
    pub residual_split: f64,
}

impl SideEntropies {
    pub fn new(part: &LabeledPartition) -> Self {
        let (p, q) = side_atoms(part.cells().iter());
        let (p_mass, q_mass) = (compensated_sum(p.iter().copied()), compensated_sum(q.iter().copied()));
        let residual_split = compensated_sum(part.residual().map(|c| {
            let total = c.rect.probability();
            let below = c.rect.mass_below_diagonal();
            total * entropy_bits(&[below / total, 1.0 - below / total])
        }));
        SideEntropies {
            h_side: entropy_bits(&[p_mass, q_mass]),
            p_mass,
            q_mass,
            h_given_p: conditional(&p, p_mass),
            h_given_q: conditional(&q, q_mass),
            residual_split,
        }
    }

    /// `H(side) + P(p) H(.|p) + P(q) H(.|q)`, which equals the entropy of the
    /// partition plus [`residual_split`](Self::residual_split).
    pub fn chain_total(&self) -> f64 {
        self.h_side + self.p_mass * self.h_given_p + self.q_mass * self.h_given_q
    }
}

fn side_atoms<'a>(cells: impl Iterator<Item = &'a LabeledCell>) -> (Vec<f64>, Vec<f64>) {
    let (mut p, mut q) = (Vec::new(), Vec::new());
    for c in cells {
        let total = c.rect.probability();
        match c.label {
            Label::P => p.push(total),
            Label::Q => q.push(total),
            Label::Undecided => {
                let below = c.rect.mass_below_diagonal();
                p.push(below);
                q.push(total - below);
            }
        }
    }
    (p, q)
}

fn conditional(atoms: &[f64], mass: f64) -> f64 {
    if mass <= 0.0 {
        return 0.0;
    }
    let normalized: Vec<f64> = atoms.iter().map(|a| a / mass).collect();
    entropy_bits(&normalized)
}

/// Entropy, given `x1 >= x2` and `x` in the diagonal square `[lo, hi]^2`, of
/// the cells inside that square.
pub fn lower_entropy_within(part: &LabeledPartition, lo: f64, hi: f64) -> f64 {
    let inside = part
        .cells()
        .iter()
        .filter(|c| c.rect.x_lo() >= lo && c.rect.x_hi() <= hi && c.rect.y_lo() >= lo && c.rect.y_hi() <= hi);
    let (p, _) = side_atoms(inside);
    conditional(&p, compensated_sum(p.iter().copied()))
}

/// Conditional entropies given `x1 >= x2` of the truncations at depths
/// `1..=max_depth`.
pub fn conditional_entropy_sequence(v: f64, max_depth: u32) -> Result<Vec<f64>> {
    (1..=max_depth)
        .map(|d| Ok(SideEntropies::new(&self_similar_partition(v, d)?).h_given_p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::converse::entropy_ratio;
    use crate::partition::{check_staircase_bounds, TargetFunction};
    use crate::protocol::{induced_partition, BitExchange};

    fn sorted(part: &LabeledPartition) -> Vec<([f64; 4], Label)> {
        let mut v: Vec<_> = part.cells().iter().map(|c| (<[f64; 4]>::from(c.rect), c.label)).collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        v
    }

    #[test]
    fn depth_one_half() {
        let part = self_similar_partition(0.5, 1).unwrap();
        assert_eq!(part.len(), 4);
        assert!(part.probabilities().iter().all(|&p| p == 0.25));
        assert_eq!(part.entropy(), 2.0);
    }

    #[test]
    fn one_half_is_bit_exchange() {
        for d in 1..=8 {
            let a = self_similar_partition(0.5, d).unwrap();
            let b = induced_partition(&BitExchange::new(d).unwrap()).unwrap();
            assert_eq!(sorted(&a), sorted(&b), "depth {d}");
            assert_eq!(a.entropy(), BitExchange::closed_form_rate(d));
        }
    }

    #[test]
    fn valid_zero_error_partitions() {
        for v in [0.2, 0.3, 0.5, 0.7, 0.9] {
            for d in [1, 4, 9] {
                let part = self_similar_partition(v, d).unwrap();
                assert_eq!(part.len(), 3 * (1 << d) - 2);
                assert!(part.decided_cells_respect(TargetFunction::MinIndicator));
                LabeledPartition::new(part.clone().into_cells()).unwrap();
                if (v - 0.5f64).abs() < 1e-12 {
                    assert!(check_staircase_bounds(&part).holds);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(self_similar_partition(0.0, 3).is_err());
        assert!(self_similar_partition(1.0, 3).is_err());
        assert!(self_similar_partition(0.5, 0).is_err());
        assert!(self_similar_partition(0.5, MAX_SELF_SIMILAR_DEPTH + 1).is_err());
    }

    #[test]
    fn decomposition_regions() {
        let d = SelfSimilarDecomposition::new(0.3, 5).unwrap();
        let [r, a, b] = d.split_probabilities();
        assert!((r + a + b - 1.0).abs() < 1e-15);
        // Lower-triangle areas v^2/2, v(1-v), (1-v)^2/2 over 1/2.
        assert!((d.r_star.probability() / 0.5 - r).abs() < 1e-15);
        assert!((d.a.mass_below_diagonal() / 0.5 - a).abs() < 1e-15);
        assert!((d.b.mass_below_diagonal() / 0.5 - b).abs() < 1e-15);
        assert!((d.contraction() - 0.58).abs() < 1e-15);
    }

    #[test]
    fn side_decomposition_identity() {
        for v in [0.3, 0.5, 0.7] {
            for depth in 1..=10 {
                let part = self_similar_partition(v, depth).unwrap();
                let s = SideEntropies::new(&part);
                assert!((s.h_side - 1.0).abs() < 1e-12);
                assert!((s.chain_total() - (part.entropy() + s.residual_split)).abs() < 1e-12);
                assert!((s.h_given_p - s.h_given_q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn split_identity_at_every_level() {
        for v in [0.3, 0.5, 0.7] {
            let dec = SelfSimilarDecomposition::new(v, 8).unwrap();
            let [_, pa, pb] = dec.split_probabilities();
            let part = self_similar_partition(v, 8).unwrap();
            // Walk the leftmost chain of squares; each is a scaled copy.
            let (lo, mut hi) = (0.0, 1.0);
            for _ in 0..7 {
                let m = lo + v * (hi - lo);
                let whole = lower_entropy_within(&part, lo, hi);
                let a = lower_entropy_within(&part, lo, m);
                let b = lower_entropy_within(&part, m, hi);
                let rhs = dec.split_entropy() + pa * a + pb * b;
                assert!((whole - rhs).abs() < 1e-12, "v = {v}: {whole} vs {rhs}");
                hi = m;
            }
        }
    }

    #[test]
    fn truncations_converge_linearly_to_the_ratio() {
        for v in [0.3, 0.5, 0.7] {
            let dec = SelfSimilarDecomposition::new(v, 14).unwrap();
            let r = dec.contraction();
            let limit = entropy_ratio(v).unwrap();
            let h = conditional_entropy_sequence(v, 14).unwrap();
            let mut prev = 0.0;
            for (i, &hd) in h.iter().enumerate() {
                assert!((hd - (dec.split_entropy() + r * prev)).abs() < 1e-12);
                let d = i as i32 + 1;
                assert!((limit - hd - r.powi(d) * limit).abs() < 1e-12);
                prev = hd;
            }
            let n = h.len();
            let rate = (h[n - 1] - h[n - 2]) / (h[n - 2] - h[n - 3]);
            assert!((rate - r).abs() < 1e-6, "v = {v}: {rate} vs {r}");
            // Aitken extrapolation recovers the limit.
            let aitken = h[n - 1] - (h[n - 1] - h[n - 2]).powi(2) / ((h[n - 1] - h[n - 2]) - (h[n - 2] - h[n - 3]));
            assert!((aitken - limit).abs() < 1e-9);
        }
    }

    #[test]
    fn largest_cells_meet_the_staircase_bound() {
        let part = self_similar_partition(0.5, 6).unwrap();
        let mut p: Vec<_> = part.with_label(Label::P).map(|c| c.rect).collect();
        p.sort_by(|a, b| b.probability().total_cmp(&a.probability()));
        for k in 1..=6 {
            let m = (1usize << k) - 1;
            let sum: f64 = p[..m].iter().map(|r| r.probability()).sum();
            assert_eq!(sum, crate::partition::staircase_bound(m));
            let mut corners: Vec<f64> = p[..m].iter().map(|r| r.x_lo()).collect();
            corners.sort_by(f64::total_cmp);
            for (i, c) in corners.iter().enumerate() {
                assert_eq!(*c, (i + 1) as f64 / (m + 1) as f64);
            }
            assert!(p[..m].iter().all(|r| r.x_lo() == r.y_hi()));
        }
    }
}
