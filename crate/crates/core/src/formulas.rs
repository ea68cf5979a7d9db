//! Closed-form and iterated expressions for repeater-chain waiting times.

use serde::Serialize;
use thiserror::Error;

use crate::chain::{ChainError, ChainParams};

/// Largest segment count accepted by the binomial-sum formulas.
pub const MAX_SEGMENTS: u64 = 10_000;
/// Up to this many segments the alternating binomial sum is evaluated
/// directly; above it the equivalent survival-function series is used.
const ALTERNATING_MAX: u64 = 16;

#[derive(Debug, Error, PartialEq)]
pub enum FormulaError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("N = {0} exceeds the supported maximum of {MAX_SEGMENTS}")]
    TooLarge(u64),
    #[error("invalid argument: {0}")]
    Domain(String),
}

fn check_prob(name: &str, p: f64) -> Result<(), FormulaError> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(FormulaError::Domain(format!("{name} must lie in (0, 1], got {p}")))
    }
}

fn check_segments(n: u64) -> Result<(), FormulaError> {
    match n {
        0 => Err(FormulaError::Domain("N must be at least 1".into())),
        n if n > MAX_SEGMENTS => Err(FormulaError::TooLarge(n)),
        _ => Ok(()),
    }
}

/// Product of the expected number of attempts per level.
pub fn mean_only(params: &ChainParams) -> Result<f64, FormulaError> {
    params.validate()?;
    Ok(1.0 / (params.p_s.powi(params.n as i32) * params.p_g))
}

pub fn three_over_two(params: &ChainParams) -> Result<f64, FormulaError> {
    params.validate()?;
    Ok(1.5f64.powi(params.n as i32) / (params.p_s.powi(params.n as i32) * params.p_g))
}

/// Treats every level as geometric with the mean of the level below.
pub fn geometric_level_mean(params: &ChainParams) -> Result<f64, FormulaError> {
    params.validate()?;
    let mut mean = 1.0 / params.p_g;
    for _ in 0..params.n {
        mean = mean_two_then_swap(1.0 / mean, params.p_s);
    }
    Ok(mean)
}

fn mean_two(p: f64) -> f64 {
    (3.0 - 2.0 * p) / ((2.0 - p) * p)
}

fn mean_two_then_swap(p: f64, p_s: f64) -> f64 {
    mean_two(p) / p_s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleRepeater {
    /// Mean time until both elementary links exist.
    pub mean_m0: f64,
    /// Mean time until the end-to-end link exists.
    pub mean_t1: f64,
    /// Mean decay factor `E[e^{-|ΔT|/t_coh}]` of the earlier link.
    pub gamma: f64,
    #[serde(skip)]
    p_g: f64,
}

impl SingleRepeater {
    /// Probability that the two links arrive `j` attempts apart, one-sided:
    /// the `j ≥ 1` entries count one ordering only, so the total is
    /// `storage_pmf(0) + 2 Σ_{j≥1} storage_pmf(j) = 1`.
    pub fn storage_pmf(&self, j: u64) -> f64 {
        let p = self.p_g;
        if j == 0 {
            p / (2.0 - p)
        } else {
            p * (1.0 - p).powf(j as f64) / (2.0 - p)
        }
    }
}

pub fn single_repeater(params: &ChainParams) -> Result<SingleRepeater, FormulaError> {
    params.validate()?;
    if params.n != 1 {
        return Err(FormulaError::Domain(format!("single repeater needs n = 1, got {}", params.n)));
    }
    let p = params.p_g;
    let q = 1.0 - p;
    let m0 = mean_two(p);
    let gamma = p / (2.0 - p) * (2.0 / (1.0 - q * params.decay()) - 1.0);
    Ok(SingleRepeater {
        mean_m0: m0,
        mean_t1: m0 / params.p_s,
        gamma,
        p_g: p,
    })
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Lanczos approximation (g = 7, n = 9).
fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Neumaier-compensated sum.
fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `(1 - q^j)^n` computed through logarithms.
fn cdf_pow(q: f64, j: f64, n: f64) -> f64 {
    (n * (-q.powf(j)).ln_1p()).exp()
}

/// `1 - (1 - q^j)^n` without cancellation.
fn one_minus_cdf_pow(q: f64, j: f64, n: f64) -> f64 {
    -(n * (-q.powf(j)).ln_1p()).exp_m1()
}

/// Mean of the maximum of `n` independent geometric waits (swaps are
/// deterministic and instantaneous).
pub fn det_swap_mean(n: u64, p_g: f64) -> Result<f64, FormulaError> {
    check_segments(n)?;
    check_prob("p_g", p_g)?;
    if p_g == 1.0 {
        return Ok(1.0);
    }
    let q = 1.0 - p_g;
    if n <= ALTERNATING_MAX {
        let terms = (1..=n).map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * ln_choose(n, k).exp().round() / -(k as f64 * (-p_g).ln_1p()).exp_m1()
        });
        return Ok(compensated_sum(terms));
    }
    // E[max] = Σ_{t≥0} P(max > t).
    Ok(survival_series(|t| one_minus_cdf_pow(q, t, n as f64)))
}

/// Sums a nonincreasing nonnegative series until terms become negligible.
fn survival_series(term: impl Fn(f64) -> f64) -> f64 {
    let mut terms = Vec::new();
    let mut t = 0.0;
    loop {
        let x = term(t);
        terms.push(x);
        t += 1.0;
        if x < 1e-18 || x == 0.0 {
            break;
        }
    }
    compensated_sum(terms)
}

/// `H(N) / p_g`, the small-`p_g` approximation of [`det_swap_mean`].
pub fn det_swap_mean_harmonic(n: u64, p_g: f64) -> Result<f64, FormulaError> {
    check_segments(n)?;
    check_prob("p_g", p_g)?;
    let h = compensated_sum((1..=n).map(|k| 1.0 / k as f64));
    Ok(h / p_g)
}

/// Mean waiting time of `n` parallel links when a stored link is discarded
/// once it has waited more than `tau` attempts for the last one.
pub fn det_swap_mean_cutoff(n: u64, p_g: f64, tau: u64) -> Result<f64, FormulaError> {
    check_segments(n)?;
    check_prob("p_g", p_g)?;
    if tau == 0 {
        return Err(FormulaError::Domain("tau must be at least 1".into()));
    }
    if p_g == 1.0 {
        return Ok(1.0);
    }
    let q = 1.0 - p_g;
    let nf = n as f64;
    let tf = tau as f64;
    let qn = q.powf(nf);
    // τ − Σ_{j=1}^{τ−1} (1 − q^j)^N, rewritten as a sum of positive terms.
    let window = 1.0 + compensated_sum((1..tau).map(|j| one_minus_cdf_pow(q, j as f64, nf)));
    let num = one_minus_cdf_pow(q, tf, nf) + (1.0 - qn) * window;
    let den = cdf_pow(q, tf + 1.0, nf) - qn * cdf_pow(q, tf, nf);
    Ok(num / den)
}

/// Probability that a Binomial(n, p) variable is below `k`.
fn binomial_cdf_below(n: u64, k: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return if k > 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k > n { 1.0 } else { 0.0 };
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let terms = (0..k.min(n + 1)).map(|j| (ln_choose(n, j) + j as f64 * lp + (n - j) as f64 * lq).exp());
    compensated_sum(terms).min(1.0)
}

/// Mean time until at least `k` of `n` parallel links have been generated.
pub fn partial_links_mean(n: u64, k: u64, p_g: f64) -> Result<f64, FormulaError> {
    check_segments(n)?;
    check_prob("p_g", p_g)?;
    if k == 0 || k > n {
        return Err(FormulaError::Domain(format!("k must lie in 1..={n}, got {k}")));
    }
    if p_g == 1.0 {
        return Ok(1.0);
    }
    if k == n {
        return det_swap_mean(n, p_g);
    }
    let q = 1.0 - p_g;
    let mut terms = Vec::new();
    let mut t = 0u64;
    loop {
        // P(T > t) = P(fewer than k links by t).
        let x = binomial_cdf_below(n, k, 1.0 - q.powf(t as f64));
        terms.push(x);
        t += 1;
        // Tail is dominated by n q^t / p_g once the term starts to decay.
        if x == 0.0 || (x < 1e-12 && nq_tail(n, q, t) < 1e-12) {
            break;
        }
    }
    Ok(compensated_sum(terms))
}

fn nq_tail(n: u64, q: f64, t: u64) -> f64 {
    n as f64 * q.powf(t as f64) / (1.0 - q)
}

/// Success probability of a chain whose end-to-end attempt succeeds only if
/// every step does; the waiting time is geometric with this parameter.
pub fn second_gen_distribution(step_success_probs: &[f64]) -> Result<f64, FormulaError> {
    if step_success_probs.is_empty() {
        return Err(FormulaError::Domain("at least one step is required".into()));
    }
    for &p in step_success_probs {
        check_prob("step probability", p)?;
    }
    Ok(step_success_probs.iter().product())
}
