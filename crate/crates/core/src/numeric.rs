//! Small numeric helpers: compensated summation and Shannon entropy in bits.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `-p log2 p`, with `0 log 0 = 0`.
#[inline]
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits of a list of masses. The masses are used as given
/// (no renormalisation), so a sub-probability vector yields `-sum p log2 p`.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    compensated_sum(probs.iter().map(|&p| plogp(p)))
}
