use super::{Action, Context, Interval, Outcome, Protocol, ProtocolTree};
use crate::error::{Error, Result};

/// Deepest supported round. Midpoints of dyadic intervals stay exact in
/// `f64` far beyond this.
const MAX_DEPTH: u32 = 1000;

/// Compares `x1` and `x2` by exchanging binary-expansion bits.
///
/// In round `k` node 1 sends bit `k` of `x1` and node 2 replies with bit `k`
/// of `x2`. The first differing pair settles the order: outcome `1` when
/// `x1 > x2`, `0` otherwise. After `max_depth` equal pairs the run stops
/// undecided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitExchange {
    max_depth: u32,
}

impl BitExchange {
    pub fn new(max_depth: u32) -> Result<Self> {
        if !(1..=MAX_DEPTH).contains(&max_depth) {
            return Err(Error::Domain(format!("max_depth must be in 1..={MAX_DEPTH}, got {max_depth}")));
        }
        Ok(BitExchange { max_depth })
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Truncated sum rate `sum_{k<=d} 2^{-k} 2k + 2^{-d} 2d = 4 - 2^{2-d}`.
    pub fn closed_form_rate(depth: u32) -> f64 {
        4.0 - (2.0 - f64::from(depth)).exp2()
    }
}

impl Protocol for BitExchange {
    fn domain(&self) -> [Interval; 2] {
        [Interval::UNIT, Interval::UNIT]
    }

    fn next_action(&self, ctx: &Context<'_>) -> Action {
        let t = ctx.transcript;
        let n = t.len();
        if n >= 2 && n % 2 == 0 {
            let (b1, b2) = (t[n - 2], t[n - 1]);
            if b1 != b2 {
                return Action::Stop(Outcome::Decided(u32::from(b1 > b2)));
            }
            if n as u32 >= 2 * self.max_depth {
                return Action::Stop(Outcome::Undecided);
            }
        }
        Action::Send {
            cuts: vec![ctx.speaker_interval().mid()],
        }
    }

    fn state_key(&self, ctx: &Context<'_>) -> Option<u64> {
        Some(ctx.transcript.len() as u64)
    }
}

/// Bit exchange unrolled into an explicit tree.
pub fn bit_exchange_protocol(max_depth: u32) -> Result<ProtocolTree> {
    ProtocolTree::unroll(&BitExchange::new(max_depth)?)
}

/// First `n` bits of the terminating binary expansion of `x` in `[0, 1)`,
/// by repeated doubling. Doubling and subtracting one are exact in `f64`.
pub fn binary_expansion(x: f64, n: usize) -> Result<Vec<u8>> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("binary expansion needs x in [0, 1), got {x}")));
    }
    let mut rest = x;
    Ok((0..n)
        .map(|_| {
            rest *= 2.0;
            if rest >= 1.0 {
                rest -= 1.0;
                1
            } else {
                0
            }
        })
        .collect())
}
