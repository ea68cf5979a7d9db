//! Recursive sampling of delivery time and Werner parameter.
//!
//! Sample `i` of a batch draws from a ChaCha8 stream keyed by the batch
//! seed with stream number `i`, so a batch is reproducible regardless of
//! how samples are distributed over threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{distill_step, ChainError, ChainParams, Protocol, Step};
use crate::export::csv_string;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRecord {
    pub t: u64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub n_samples: u64,
    pub mean_t: f64,
    pub stderr_t: Option<f64>,
    pub mean_w: f64,
    pub stderr_w: Option<f64>,
    /// `(t, count)` for every observed delivery time, ascending.
    pub histogram: Vec<(u64, u64)>,
    pub seed: u64,
}

impl BatchSummary {
    pub fn from_samples(samples: &[SampleRecord], seed: u64) -> Self {
        let n = samples.len() as f64;
        let (mean_t, stderr_t) = mean_stderr(samples.iter().map(|s| s.t as f64), n);
        let (mean_w, stderr_w) = mean_stderr(samples.iter().map(|s| s.w), n);
        let mut ts: Vec<u64> = samples.iter().map(|s| s.t).collect();
        ts.sort_unstable();
        let mut histogram: Vec<(u64, u64)> = Vec::new();
        for t in ts {
            match histogram.last_mut() {
                Some((last, count)) if *last == t => *count += 1,
                _ => histogram.push((t, 1)),
            }
        }
        Self {
            n_samples: samples.len() as u64,
            mean_t,
            stderr_t,
            mean_w,
            stderr_w,
            histogram,
            seed,
        }
    }

    /// Empirical PMF on `0..=t_max`; later samples are dropped.
    pub fn empirical_pmf(&self, t_max: usize) -> Vec<f64> {
        let mut pmf = vec![0.0; t_max + 1];
        for &(t, c) in &self.histogram {
            if (t as usize) <= t_max {
                pmf[t as usize] = c as f64 / self.n_samples as f64;
            }
        }
        pmf
    }

    /// CSV with columns `t,count,pmf`.
    pub fn histogram_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .histogram
            .iter()
            .map(|&(t, c)| vec![t.to_string(), c.to_string(), (c as f64 / self.n_samples as f64).to_string()])
            .collect();
        csv_string(&["t", "count", "pmf"], &rows)
    }
}

fn mean_stderr(xs: impl Iterator<Item = f64> + Clone, n: f64) -> (f64, Option<f64>) {
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, None);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

/// Random stream for sample `index` of a batch seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Number of attempts up to and including the first success.
pub fn geometric<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    // 1 - U lies in (0, 1], so the logarithm is finite.
    let u: f64 = 1.0 - rng.gen::<f64>();
    let t = (u.ln() / (-p).ln_1p()).floor() + 1.0;
    t.max(1.0) as u64
}

struct Sampler<'a> {
    params: &'a ChainParams,
    steps: &'a [Step],
    lambda: f64,
}

impl Sampler<'_> {
    /// Duration and Werner parameter of a link produced by the first
    /// `stage` steps, starting from nothing.
    fn link<R: Rng + ?Sized>(&self, stage: usize, rng: &mut R) -> (u64, f64) {
        if stage == 0 {
            return (geometric(self.params.p_g, rng), self.params.w0);
        }
        let mut elapsed = 0;
        loop {
            let (mut a, mut wa) = self.link(stage - 1, rng);
            let (mut b, mut wb) = self.link(stage - 1, rng);
            if let Some(tau) = self.params.tau {
                // The earlier link is dropped once it has waited tau
                // attempts; its side starts over from that moment.
                while a.abs_diff(b) > tau {
                    if a < b {
                        let (d, w) = self.link(stage - 1, rng);
                        a += tau + d;
                        wa = w;
                    } else {
                        let (d, w) = self.link(stage - 1, rng);
                        b += tau + d;
                        wb = w;
                    }
                }
                assert!(a.abs_diff(b) <= tau, "stored link older than cut-off");
            }
            let t = a.max(b);
            let decay = self.lambda.powf(a.abs_diff(b) as f64);
            if a < b {
                wa *= decay;
            } else {
                wb *= decay;
            }
            elapsed += t;
            let (success, w) = match self.steps[stage - 1] {
                Step::Swap => (rng.gen::<f64>() < self.params.p_s, wa * wb),
                Step::Distill => {
                    let (p, w) = distill_step(wa, wb).expect("Werner parameters stay in range");
                    (rng.gen::<f64>() < p, w)
                }
            };
            if success {
                return (elapsed, w);
            }
        }
    }
}

/// One delivery of the full protocol.
pub fn sample_chain<R: Rng + ?Sized>(params: &ChainParams, protocol: &Protocol, rng: &mut R) -> SampleRecord {
    let s = Sampler {
        params,
        steps: &protocol.steps,
        lambda: params.decay(),
    };
    let (t, w) = s.link(protocol.steps.len(), rng);
    SampleRecord { t, w }
}

/// Raw samples of a batch, in sample-index order.
pub fn run_samples(
    params: &ChainParams,
    protocol: &Protocol,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<SampleRecord>, ChainError> {
    protocol.check(params)?;
    if n_samples == 0 {
        return Err(ChainError::Domain("n_samples must be at least 1".into()));
    }
    Ok((0..n_samples)
        .into_par_iter()
        .map(|i| sample_chain(params, protocol, &mut substream(seed, i)))
        .collect())
}

pub fn run_batch(params: &ChainParams, protocol: &Protocol, n_samples: u64, seed: u64) -> Result<BatchSummary, ChainError> {
    let samples = run_samples(params, protocol, n_samples, seed)?;
    Ok(BatchSummary::from_samples(&samples, seed))
}

/// Two-sample Kolmogorov–Smirnov statistic of integer samples.
pub fn ks_statistic(a: &[u64], b: &[u64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable();
    y.sort_unstable();
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::t_coh_for_decay;

    #[test]
    fn perfect_components() {
        let p = ChainParams::new(1, 1.0, 1.0).with_w0(0.9);
        let mut rng = substream(1, 0);
        for _ in 0..100 {
            let s = sample_chain(&p, &Protocol::swap_only(1), &mut rng);
            assert_eq!(s.t, 1);
            assert!((s.w - 0.81).abs() < 1e-15);
        }
    }

    #[test]
    fn geometric_draws() {
        let mut rng = substream(7, 3);
        let n = 200_000;
        let mean = (0..n).map(|_| geometric(0.2, &mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - 5.0).abs() < 0.05);
        let ones = (0..1000).filter(|_| geometric(1.0, &mut rng) == 1).count();
        assert_eq!(ones, 1000);
    }

    #[test]
    fn single_repeater_mean() {
        let p = ChainParams::new(1, 0.5, 0.5);
        let b = run_batch(&p, &Protocol::swap_only(1), 100_000, 11).unwrap();
        assert!((b.mean_t - 16.0 / 3.0).abs() < 4.0 * b.stderr_t.unwrap());
        assert_eq!(b.histogram.iter().map(|x| x.1).sum::<u64>(), 100_000);
    }

    #[test]
    fn decay_factor_mean() {
        let p = ChainParams::new(1, 0.5, 1.0).with_t_coh(t_coh_for_decay(0.5));
        let b = run_batch(&p, &Protocol::swap_only(1), 100_000, 5).unwrap();
        assert!((b.mean_w - 5.0 / 9.0).abs() < 4.0 * b.stderr_w.unwrap());
    }

    #[test]
    fn determinism_and_single_sample() {
        let p = ChainParams::new(2, 0.4, 0.6).with_t_coh(20.0).with_tau(Some(5));
        let proto = Protocol::swap_only(2);
        assert_eq!(run_batch(&p, &proto, 500, 9).unwrap(), run_batch(&p, &proto, 500, 9).unwrap());
        let one = run_batch(&p, &proto, 1, 9).unwrap();
        let s = sample_chain(&p, &proto, &mut substream(9, 0));
        assert_eq!((one.mean_t, one.mean_w), (s.t as f64, s.w));
        assert_eq!((one.stderr_t, one.stderr_w), (None, None));
    }

    #[test]
    fn werner_nonincreasing() {
        let p = ChainParams::new(2, 0.3, 0.7).with_t_coh(10.0).with_w0(0.97);
        let mut rng = substream(3, 1);
        for _ in 0..1000 {
            let s = sample_chain(&p, &Protocol::swap_only(2), &mut rng);
            assert!(s.w <= 0.97f64.powi(4) + 1e-15 && s.w >= 0.0);
        }
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[1, 2, 3], &[1, 2, 3]), 0.0);
        assert_eq!(ks_statistic(&[1, 1], &[2, 2]), 1.0);
        assert!((ks_statistic(&[1, 2], &[2, 2]) - 0.5).abs() < 1e-15);
    }
}
