use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{run_protocol, Interval, Outcome, Protocol, Transcript};
use crate::error::{Error, Result};

/// Samples per independent random stream.
const BATCH: u64 = 4096;

/// Averages over seeded uniform inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunStats {
    #[serde(rename = "samples")]
    pub sample_count: u64,
    pub mean_bits: f64,
    pub mean_rounds: f64,
    pub seed: u64,
    #[serde(skip)]
    pub undecided: u64,
}

#[derive(Default, Clone, Copy)]
struct Totals {
    bits: u64,
    rounds: u64,
    undecided: u64,
}

impl Totals {
    fn add(self, o: Totals) -> Totals {
        Totals {
            bits: self.bits + o.bits,
            rounds: self.rounds + o.rounds,
            undecided: self.undecided + o.undecided,
        }
    }
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

fn uniform_in(iv: Interval, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let x = iv.lo + iv.len() * rng.random::<f64>();
        if iv.contains_open(x) {
            return x;
        }
    }
}

fn batch_len(samples: u64, batch: u64) -> u64 {
    BATCH.min(samples - batch * BATCH)
}

fn run_batch<P: Protocol + ?Sized>(protocol: &P, samples: u64, seed: u64, batch: u64) -> Result<Totals> {
    let [d1, d2] = protocol.domain();
    let mut rng = batch_rng(seed, batch);
    let mut t = Totals::default();
    for _ in 0..batch_len(samples, batch) {
        let (x1, x2) = (uniform_in(d1, &mut rng), uniform_in(d2, &mut rng));
        let tr = run_protocol(protocol, x1, x2)?;
        t.bits += tr.bits();
        t.rounds += tr.rounds();
        t.undecided += u64::from(tr.outcome == Outcome::Undecided);
    }
    Ok(t)
}

/// Runs `protocol` on `samples` uniform inputs from its domain.
///
/// Sample `i` comes from stream `i / 4096` of a ChaCha8 generator seeded with
/// `seed`, and totals are integers, so the result does not depend on the
/// number of worker threads. `threads` caps the pool size; `None` uses the
/// global pool.
pub fn monte_carlo<P: Protocol + ?Sized>(
    protocol: &P,
    samples: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<RunStats> {
    if samples == 0 {
        return Err(Error::Domain("samples must be at least 1".into()));
    }
    let batches = samples.div_ceil(BATCH);
    let work = || -> Result<Totals> {
        (0..batches)
            .into_par_iter()
            .map(|b| run_batch(protocol, samples, seed, b))
            .try_reduce(Totals::default, |a, b| Ok(a.add(b)))
    };
    let totals = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(RunStats {
        sample_count: samples,
        mean_bits: totals.bits as f64 / samples as f64,
        mean_rounds: totals.rounds as f64 / samples as f64,
        seed,
        undecided: totals.undecided,
    })
}

/// Inputs and transcripts of the first `samples` runs of [`monte_carlo`]
/// with the same seed.
pub fn sample_transcripts<P: Protocol + ?Sized>(
    protocol: &P,
    samples: u64,
    seed: u64,
) -> Result<Vec<((f64, f64), Transcript)>> {
    let [d1, d2] = protocol.domain();
    let mut out = Vec::with_capacity(samples as usize);
    for b in 0..samples.div_ceil(BATCH) {
        let mut rng = batch_rng(seed, b);
        for _ in 0..batch_len(samples, b) {
            let (x1, x2) = (uniform_in(d1, &mut rng), uniform_in(d2, &mut rng));
            out.push(((x1, x2), run_protocol(protocol, x1, x2)?));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::BitExchange;

    #[test]
    fn deterministic_across_thread_counts() {
        let p = BitExchange::new(30).unwrap();
        let a = monte_carlo(&p, 20_000, 7, Some(1)).unwrap();
        let b = monte_carlo(&p, 20_000, 7, Some(3)).unwrap();
        let c = monte_carlo(&p, 20_000, 7, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_ne!(a, monte_carlo(&p, 20_000, 8, Some(1)).unwrap());
    }

    #[test]
    fn single_sample_is_reproducible() {
        let p = BitExchange::new(30).unwrap();
        let a = sample_transcripts(&p, 1, 0x5EED).unwrap();
        let b = sample_transcripts(&p, 1, 0x5EED).unwrap();
        assert_eq!(a, b);
        let stats = monte_carlo(&p, 1, 0x5EED, None).unwrap();
        assert_eq!(stats.mean_bits, a[0].1.bits() as f64);
        assert_eq!(stats.mean_rounds, a[0].1.rounds() as f64);
    }

    #[test]
    fn transcripts_match_stats() {
        let p = BitExchange::new(30).unwrap();
        let runs = sample_transcripts(&p, 5000, 3).unwrap();
        let bits: u64 = runs.iter().map(|(_, t)| t.bits()).sum();
        assert_eq!(monte_carlo(&p, 5000, 3, None).unwrap().mean_bits, bits as f64 / 5000.0);
    }

    #[test]
    fn averages_near_four_bits_and_two_rounds() {
        let s = monte_carlo(&BitExchange::new(30).unwrap(), 200_000, 0x5EED, None).unwrap();
        assert!((s.mean_bits - 4.0).abs() < 0.03, "{s:?}");
        assert!((s.mean_rounds - 2.0).abs() < 0.015, "{s:?}");
        assert_eq!(s.undecided, 0);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(monte_carlo(&BitExchange::new(3).unwrap(), 0, 1, None).is_err());
    }

    #[test]
    fn json_fields() {
        let s = monte_carlo(&BitExchange::new(30).unwrap(), 10, 1, None).unwrap();
        let json = crate::format::to_json(&s);
        assert!(json.starts_with(r#"{"mean_bits":"#));
        assert!(json.contains(r#""samples":10"#) && json.contains(r#""seed":1"#));
        assert!(!json.contains("undecided"));
    }
}
