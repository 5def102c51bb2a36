//! Deterministic two-party protocols on real inputs.
//!
//! Node 1 holds `x1`, node 2 holds `x2`. Messages alternate, node 1 first.
//! Each message is the index of the sub-interval containing the speaker's
//! input, out of a finite partition of the speaker's current admissible
//! interval. A [`Protocol`] chooses that partition, or stops, by looking only
//! at the transcript so far, so every message depends on the speaker's input
//! and the public prefix alone and both nodes always agree on when to stop.
//!
//! Sub-intervals are half-open, `[c_i, c_{i+1})`. For binary cuts at dyadic
//! midpoints this reproduces the terminating binary expansion.

mod bit_exchange;
mod monte_carlo;
mod refinement;
mod tree;

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{entropy_bits, plogp};
use crate::partition::{Label, LabeledCell, LabeledPartition, Rect};

pub use bit_exchange::{binary_expansion, bit_exchange_protocol, BitExchange};
pub use monte_carlo::{monte_carlo, sample_transcripts, RunStats};
pub use refinement::VoronoiRefinement;
pub use tree::{ProtocolTree, TreeNode};

/// Longest transcript any run may produce before it is treated as a
/// non-terminating protocol.
pub const MAX_MESSAGES: usize = 4096;
/// Most leaves [`leaves`] will enumerate.
pub const MAX_LEAVES: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Node1,
    Node2,
}

impl Speaker {
    /// Speaker of the message at 0-based position `step`.
    pub fn at(step: usize) -> Self {
        if step % 2 == 0 {
            Speaker::Node1
        } else {
            Speaker::Node2
        }
    }

    pub fn index(self) -> usize {
        match self {
            Speaker::Node1 => 0,
            Speaker::Node2 => 1,
        }
    }
}

/// Half-open interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("empty interval [{lo}, {hi})")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains_open(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// Pieces of the interval cut at `cuts`.
    fn pieces<'a>(&'a self, cuts: &'a [f64]) -> impl Iterator<Item = Interval> + 'a {
        (0..=cuts.len()).map(move |j| Interval {
            lo: if j == 0 { self.lo } else { cuts[j - 1] },
            hi: if j == cuts.len() { self.hi } else { cuts[j] },
        })
    }
}

/// What both nodes know when a protocol stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// The function value, or a protocol-specific symbol such as a lattice
    /// point index.
    Decided(u32),
    /// Truncated before the value was settled.
    Undecided,
}

impl Outcome {
    /// Label of a binary outcome in a partition of the unit square.
    pub fn label(self) -> Label {
        match self {
            Outcome::Decided(0) => Label::Q,
            Outcome::Decided(_) => Label::P,
            Outcome::Undecided => Label::Undecided,
        }
    }
}

/// Public state after a transcript prefix.
#[derive(Debug, Clone, Copy)]
pub struct Context<'a> {
    pub transcript: &'a [u32],
    /// Admissible intervals of `x1` and `x2` given the transcript.
    pub intervals: [Interval; 2],
}

impl Context<'_> {
    pub fn speaker(&self) -> Speaker {
        Speaker::at(self.transcript.len())
    }

    pub fn speaker_interval(&self) -> Interval {
        self.intervals[self.speaker().index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// The next speaker reports which piece of its admissible interval, cut at
    /// these strictly increasing interior points, contains its input.
    Send { cuts: Vec<f64> },
    Stop(Outcome),
}

pub trait Protocol: Sync {
    /// Input ranges of node 1 and node 2.
    fn domain(&self) -> [Interval; 2];

    fn next_action(&self, ctx: &Context<'_>) -> Action;

    /// States whose continuations are affinely equivalent may share a key,
    /// which lets [`sum_rate`] reuse their conditional entropies. Only
    /// consulted for states that send.
    fn state_key(&self, _ctx: &Context<'_>) -> Option<u64> {
        None
    }
}

fn check_cuts(cuts: &[f64], within: Interval) -> Result<()> {
    if cuts.is_empty() {
        return Err(Error::InvalidProtocol("a message needs at least one cut".into()));
    }
    let inside = cuts.iter().all(|&c| c > within.lo && c < within.hi);
    let increasing = cuts.windows(2).all(|w| w[0] < w[1]);
    if !(inside && increasing) {
        return Err(Error::InvalidProtocol(format!(
            "cuts {cuts:?} do not partition [{}, {})",
            within.lo, within.hi
        )));
    }
    Ok(())
}

/// Record of one execution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub messages: Vec<u32>,
    pub alphabet_sizes: Vec<u32>,
    pub outcome: Outcome,
    /// Admissible intervals at the stopping time; their product is the
    /// partition cell containing the input.
    pub intervals: [Interval; 2],
}

impl Transcript {
    pub fn stopping_time(&self) -> usize {
        self.messages.len()
    }

    /// Bits spent with a fixed-length code per message.
    pub fn bits(&self) -> u64 {
        self.alphabet_sizes.iter().map(|&k| u64::from(k.next_power_of_two().trailing_zeros())).sum()
    }

    /// Rounds of two messages, the last possibly incomplete.
    pub fn rounds(&self) -> u64 {
        self.messages.len().div_ceil(2) as u64
    }

    /// Symbols joined by commas.
    pub fn to_line(&self) -> String {
        self.messages.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Runs `protocol` on `(x1, x2)`, which must lie in the open domain.
pub fn run_protocol<P: Protocol + ?Sized>(protocol: &P, x1: f64, x2: f64) -> Result<Transcript> {
    let domain = protocol.domain();
    if !(domain[0].contains_open(x1) && domain[1].contains_open(x2)) {
        return Err(Error::InputOutOfDomain { x1, x2 });
    }
    let x = [x1, x2];
    let mut messages = Vec::new();
    let mut alphabet_sizes = Vec::new();
    let mut intervals = domain;
    loop {
        let ctx = Context {
            transcript: &messages,
            intervals,
        };
        match protocol.next_action(&ctx) {
            Action::Stop(outcome) => {
                return Ok(Transcript {
                    messages,
                    alphabet_sizes,
                    outcome,
                    intervals,
                })
            }
            Action::Send { cuts } => {
                if messages.len() >= MAX_MESSAGES {
                    return Err(Error::InvalidProtocol(format!("no stop after {MAX_MESSAGES} messages")));
                }
                let who = ctx.speaker().index();
                check_cuts(&cuts, intervals[who])?;
                let symbol = cuts.partition_point(|&c| c <= x[who]);
                let piece = intervals[who].pieces(&cuts).nth(symbol).expect("symbol within alphabet");
                intervals[who] = piece;
                messages.push(symbol as u32);
                alphabet_sizes.push(cuts.len() as u32 + 1);
            }
        }
    }
}

/// A leaf of the protocol tree: the product cell and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub intervals: [Interval; 2],
    pub outcome: Outcome,
    /// Probability under the uniform law on the domain.
    pub probability: f64,
    pub depth: usize,
}

/// Every leaf, in depth-first order.
pub fn leaves<P: Protocol + ?Sized>(protocol: &P) -> Result<Vec<Leaf>> {
    let domain = protocol.domain();
    let mut out = Vec::new();
    let mut transcript = Vec::new();
    collect_leaves(protocol, &domain, domain, &mut transcript, &mut out)?;
    Ok(out)
}

fn collect_leaves<P: Protocol + ?Sized>(
    protocol: &P,
    domain: &[Interval; 2],
    intervals: [Interval; 2],
    transcript: &mut Vec<u32>,
    out: &mut Vec<Leaf>,
) -> Result<()> {
    let ctx = Context {
        transcript,
        intervals,
    };
    match protocol.next_action(&ctx) {
        Action::Stop(outcome) => {
            if out.len() >= MAX_LEAVES {
                return Err(Error::InvalidProtocol(format!("more than {MAX_LEAVES} leaves")));
            }
            out.push(Leaf {
                intervals,
                outcome,
                probability: intervals[0].len() / domain[0].len() * (intervals[1].len() / domain[1].len()),
                depth: transcript.len(),
            });
            Ok(())
        }
        Action::Send { cuts } => {
            if transcript.len() >= MAX_MESSAGES {
                return Err(Error::InvalidProtocol(format!("no stop after {MAX_MESSAGES} messages")));
            }
            let who = ctx.speaker().index();
            check_cuts(&cuts, intervals[who])?;
            for (j, piece) in intervals[who].pieces(&cuts).enumerate() {
                let mut child = intervals;
                child[who] = piece;
                transcript.push(j as u32);
                collect_leaves(protocol, domain, child, transcript, out)?;
                transcript.pop();
            }
            Ok(())
        }
    }
}

/// The rectangles cut out by the protocol, one per leaf, labelled by binary
/// outcome. The protocol's domain must be the unit square.
pub fn induced_partition<P: Protocol + ?Sized>(protocol: &P) -> Result<LabeledPartition> {
    if protocol.domain() != [Interval::UNIT, Interval::UNIT] {
        return Err(Error::InvalidProtocol("induced partitions need the unit square as domain".into()));
    }
    let cells = leaves(protocol)?
        .into_iter()
        .map(|leaf| {
            let [a, b] = leaf.intervals;
            Ok(LabeledCell::new(Rect::new(a.lo, a.hi, b.lo, b.hi)?, leaf.outcome.label()))
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledPartition::new(cells)
}

/// Entropy of the leaf distribution.
pub fn leaf_entropy<P: Protocol + ?Sized>(protocol: &P) -> Result<f64> {
    let probs: Vec<f64> = leaves(protocol)?.iter().map(|l| l.probability).collect();
    Ok(entropy_bits(&probs))
}

/// Entropy of the transcript and stopping time under uniform inputs, summed
/// message by message: `sum_i E[H(U_i | U^{i-1})]`.
pub fn sum_rate<P: Protocol + ?Sized>(protocol: &P) -> Result<f64> {
    let domain = protocol.domain();
    let mut memo = HashMap::new();
    let mut transcript = Vec::new();
    conditional_rate(protocol, domain, &mut transcript, &mut memo)
}

fn conditional_rate<P: Protocol + ?Sized>(
    protocol: &P,
    intervals: [Interval; 2],
    transcript: &mut Vec<u32>,
    memo: &mut HashMap<u64, f64>,
) -> Result<f64> {
    let ctx = Context {
        transcript,
        intervals,
    };
    let cuts = match protocol.next_action(&ctx) {
        Action::Stop(_) => return Ok(0.0),
        Action::Send { cuts } => cuts,
    };
    let key = protocol.state_key(&ctx);
    if let Some(&h) = key.as_ref().and_then(|k| memo.get(k)) {
        return Ok(h);
    }
    if transcript.len() >= MAX_MESSAGES {
        return Err(Error::InvalidProtocol(format!("no stop after {MAX_MESSAGES} messages")));
    }
    let who = ctx.speaker().index();
    let current = intervals[who];
    check_cuts(&cuts, current)?;
    let mut h = 0.0;
    for (j, piece) in current.pieces(&cuts).enumerate() {
        let p = piece.len() / current.len();
        let mut child = intervals;
        child[who] = piece;
        transcript.push(j as u32);
        let rest = conditional_rate(protocol, child, transcript, memo)?;
        transcript.pop();
        h += p * rest + plogp(p);
    }
    if let Some(k) = key {
        memo.insert(k, h);
    }
    Ok(h)
}

/// Sum rate and induced-partition entropy, computed independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCheck {
    pub sum_rate: f64,
    pub partition_entropy: f64,
    pub holds: bool,
}

/// Checks that the transcript entropy equals the entropy of the induced
/// partition within `1e-12`.
pub fn sum_rate_matches_partition_entropy<P: Protocol + ?Sized>(protocol: &P) -> Result<RateCheck> {
    let sum_rate = sum_rate(protocol)?;
    let partition_entropy = induced_partition(protocol)?.entropy();
    Ok(RateCheck {
        sum_rate,
        partition_entropy,
        holds: (sum_rate - partition_entropy).abs() <= 1e-12,
    })
}
