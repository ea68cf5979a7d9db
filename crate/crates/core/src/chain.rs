//! Repeater-chain parameters, protocol plans and Werner-state algebra shared
//! by every chain engine.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Duration of one generation attempt. All times are in these units.
pub const ATTEMPT_DURATION: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("invalid parameter: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("captured mass {captured} below floor {floor} at t_trunc = {t_trunc}")]
    Horizon { captured: f64, floor: f64, t_trunc: usize },
    #[error("state limit exceeded: more than {limit} states")]
    StateLimit { limit: usize },
    #[error("singular system: {0}")]
    Singular(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    /// Nesting levels; the chain has `2^n` segments.
    pub n: u32,
    pub p_g: f64,
    pub p_s: f64,
    /// Memory coherence time in attempt units; `f64::INFINITY` for none.
    pub t_coh: f64,
    /// Cut-off on the storage time of the earlier link of a pair.
    pub tau: Option<u64>,
    /// Werner parameter of a fresh elementary link.
    pub w0: f64,
}

impl ChainParams {
    pub fn new(n: u32, p_g: f64, p_s: f64) -> Self {
        Self {
            n,
            p_g,
            p_s,
            t_coh: f64::INFINITY,
            tau: None,
            w0: 1.0,
        }
    }

    pub fn with_t_coh(mut self, t_coh: f64) -> Self {
        self.t_coh = t_coh;
        self
    }

    pub fn with_tau(mut self, tau: Option<u64>) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_w0(mut self, w0: f64) -> Self {
        self.w0 = w0;
        self
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        let prob = |name: &str, p: f64| {
            if p > 0.0 && p <= 1.0 {
                Ok(())
            } else {
                Err(ChainError::Domain(format!("{name} must lie in (0, 1], got {p}")))
            }
        };
        prob("p_g", self.p_g)?;
        prob("p_s", self.p_s)?;
        if !(self.t_coh > 0.0) {
            return Err(ChainError::Domain(format!("t_coh must be positive, got {}", self.t_coh)));
        }
        if self.tau == Some(0) {
            return Err(ChainError::Domain("tau must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.w0) {
            return Err(ChainError::Domain(format!("w0 must lie in [0, 1], got {}", self.w0)));
        }
        if self.n > 30 {
            return Err(ChainError::Domain(format!("n = {} is too large", self.n)));
        }
        Ok(())
    }

    pub fn segments(&self) -> u64 {
        1u64 << self.n
    }

    /// Per-attempt decay factor `e^{-1/t_coh}` applied to stored Werner
    /// parameters.
    pub fn decay(&self) -> f64 {
        decay_factor(self.t_coh)
    }
}

pub fn decay_factor(t_coh: f64) -> f64 {
    if t_coh.is_infinite() {
        1.0
    } else {
        (-1.0 / t_coh).exp()
    }
}

/// Coherence time giving a per-attempt decay factor `lambda`.
pub fn t_coh_for_decay(lambda: f64) -> f64 {
    if lambda >= 1.0 {
        f64::INFINITY
    } else {
        -1.0 / lambda.ln()
    }
}

/// One stage of a nested protocol. Each stage takes two independent links
/// produced by the previous stage, waits for both (subject to the cut-off),
/// and applies the operation; on failure both inputs are lost and the stage
/// starts over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Swap,
    Distill,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protocol {
    pub steps: Vec<Step>,
}

impl Protocol {
    pub fn swap_only(n: u32) -> Self {
        Self {
            steps: vec![Step::Swap; n as usize],
        }
    }

    /// `rounds[i]` distillation rounds on links of level `i`, followed by a
    /// swap for every level below `n`. Missing entries mean no distillation.
    pub fn with_distillation(n: u32, rounds: &[u32]) -> Self {
        let mut steps = Vec::new();
        for level in 0..=n as usize {
            let r = rounds.get(level).copied().unwrap_or(0);
            steps.extend(std::iter::repeat(Step::Distill).take(r as usize));
            if level < n as usize {
                steps.push(Step::Swap);
            }
        }
        Self { steps }
    }

    pub fn swap_levels(&self) -> u32 {
        self.steps.iter().filter(|s| **s == Step::Swap).count() as u32
    }

    pub fn has_distillation(&self) -> bool {
        self.steps.contains(&Step::Distill)
    }

    /// Number of elementary links the protocol tree consumes per attempt.
    pub fn leaves(&self) -> u64 {
        1u64 << self.steps.len()
    }

    pub fn check(&self, params: &ChainParams) -> Result<(), ChainError> {
        params.validate()?;
        if self.swap_levels() != params.n {
            return Err(ChainError::Domain(format!(
                "protocol has {} swap levels but n = {}",
                self.swap_levels(),
                params.n
            )));
        }
        if self.steps.len() > 30 {
            return Err(ChainError::Domain("protocol has too many steps".into()));
        }
        Ok(())
    }
}

pub fn fidelity(w: f64) -> f64 {
    (1.0 + 3.0 * w) / 4.0
}

pub fn werner_from_fidelity(f: f64) -> f64 {
    (4.0 * f - 1.0) / 3.0
}

fn check_werner(w: f64) -> Result<(), ChainError> {
    if (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(ChainError::Domain(format!("Werner parameter {w} outside [0, 1]")))
    }
}

/// Werner parameter after swapping two Werner links.
pub fn swap_quality(w1: f64, w2: f64) -> Result<f64, ChainError> {
    check_werner(w1)?;
    check_werner(w2)?;
    Ok(w1 * w2)
}

/// One BBPSSW round on two Werner pairs, twirled back to Werner form.
/// Returns the success probability and the output Werner parameter.
pub fn distill_step(w1: f64, w2: f64) -> Result<(f64, f64), ChainError> {
    check_werner(w1)?;
    check_werner(w2)?;
    let (p, num) = bbpssw(w1, w2);
    Ok((p, werner_from_fidelity(num / p)))
}

/// Success probability and unnormalized output fidelity.
fn bbpssw(w1: f64, w2: f64) -> (f64, f64) {
    let (f1, f2) = (fidelity(w1), fidelity(w2));
    let (x1, x2) = (1.0 - f1, 1.0 - f2);
    let p = f1 * f2 + f1 * x2 / 3.0 + f2 * x1 / 3.0 + 5.0 * x1 * x2 / 9.0;
    (p, f1 * f2 + x1 * x2 / 9.0)
}

/// Symmetric bilinear form `a + b (w1 + w2) + c w1 w2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bilinear {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Bilinear {
    fn from_corners(f: impl Fn(f64, f64) -> f64) -> Self {
        let a = f(0.0, 0.0);
        let b = f(1.0, 0.0) - a;
        let c = f(1.0, 1.0) - a - 2.0 * b;
        Self { a, b, c }
    }

    pub fn eval(&self, w1: f64, w2: f64) -> f64 {
        self.a + self.b * (w1 + w2) + self.c * w1 * w2
    }

    /// Expectation given the mass, `E[w1 + w2]` mass and `E[w1 w2]` mass.
    pub fn expect(&self, mass: f64, w_sum: f64, w_prod: f64) -> f64 {
        self.a * mass + self.b * w_sum + self.c * w_prod
    }
}

/// Distillation success probability and `p · w_out` as bilinear forms in
/// the input Werner parameters.
pub fn distill_bilinear() -> (Bilinear, Bilinear) {
    let success = Bilinear::from_corners(|w1, w2| bbpssw(w1, w2).0);
    let w_mass = Bilinear::from_corners(|w1, w2| {
        let (p, num) = bbpssw(w1, w2);
        (4.0 * num - p) / 3.0
    });
    (success, w_mass)
}
