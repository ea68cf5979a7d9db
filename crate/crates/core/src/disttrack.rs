//! Exact waiting-time distributions of nested repeater protocols.
//!
//! A link of a given protocol stage is described by its delivery-time PMF
//! on `t = 1..=t_trunc` together with the Werner-parameter mass
//! `Σ P(T = t) E[w | T = t]`. Every operation (storage decay, swap,
//! distillation) is bilinear in the Werner parameters of two independent
//! inputs, so tracking means per delivery time is exact.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;

use crate::chain::{decay_factor, distill_bilinear, fidelity, ChainError, ChainParams, Protocol, Step};
use crate::export::csv_string;
use crate::formulas;

/// Default lower limit on the captured probability mass.
pub const DEFAULT_FLOOR: f64 = 1.0 - 1e-6;
/// Largest horizon supported when a cut-off is configured.
pub const MAX_CUTOFF_TRUNC: usize = 2048;
/// Largest horizon the automatic horizon search will try.
pub const MAX_AUTO_TRUNC: usize = 1 << 21;
/// Restart states less likely than this are not expanded.
const PRUNE: f64 = 1e-30;
/// Horizons above this use FFT-based compounding.
const DIRECT_COMPOUND_MAX: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedDistribution {
    /// `pmf[t]` for `t = 1..=t_trunc`; `pmf[0]` is always zero.
    pub pmf: Vec<f64>,
    /// Mean Werner parameter conditioned on delivery at `t`, where tracked.
    pub mean_w: Option<Vec<f64>>,
    pub captured_mass: f64,
    pub t_trunc: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistSummary {
    pub mean: f64,
    pub stddev: f64,
    pub captured_mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_w: Option<f64>,
}

impl TruncatedDistribution {
    pub fn from_pmf(pmf: Vec<f64>, mean_w: Option<Vec<f64>>) -> Self {
        let t_trunc = pmf.len().saturating_sub(1);
        let captured_mass = pmf.iter().sum();
        Self {
            pmf,
            mean_w,
            captured_mass,
            t_trunc,
        }
    }

    fn from_link(link: &Link) -> Self {
        let mean_w = link
            .m
            .iter()
            .zip(&link.w)
            .map(|(&m, &w)| if m > 0.0 { (w / m).clamp(0.0, 1.0) } else { 0.0 })
            .collect();
        Self::from_pmf(link.m.clone(), Some(mean_w))
    }

    fn to_link(&self) -> Link {
        let w = match &self.mean_w {
            Some(mw) => self.pmf.iter().zip(mw).map(|(m, w)| m * w).collect(),
            None => self.pmf.clone(),
        };
        Link { m: self.pmf.clone(), w }
    }

    pub fn pmf_at(&self, t: usize) -> f64 {
        self.pmf.get(t).copied().unwrap_or(0.0)
    }

    pub fn cdf(&self) -> Vec<f64> {
        self.pmf
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    /// Mean conditioned on delivery within the horizon.
    pub fn mean(&self) -> f64 {
        self.moment(1) / self.captured_mass
    }

    pub fn stddev(&self) -> f64 {
        let m = self.mean();
        (self.moment(2) / self.captured_mass - m * m).max(0.0).sqrt()
    }

    fn moment(&self, k: i32) -> f64 {
        self.pmf.iter().enumerate().map(|(t, p)| (t as f64).powi(k) * p).sum()
    }

    /// Mean delivered Werner parameter over all delivery times.
    pub fn overall_mean_w(&self) -> Option<f64> {
        let mw = self.mean_w.as_ref()?;
        Some(self.pmf.iter().zip(mw).map(|(p, w)| p * w).sum::<f64>() / self.captured_mass)
    }

    pub fn summary(&self) -> DistSummary {
        DistSummary {
            mean: self.mean(),
            stddev: self.stddev(),
            captured_mass: self.captured_mass,
            mean_w: self.overall_mean_w(),
        }
    }

    /// CSV with columns `t,pmf,cdf,mean_w,mean_F`.
    pub fn to_csv(&self) -> String {
        let cdf = self.cdf();
        let rows: Vec<Vec<String>> = (1..=self.t_trunc)
            .map(|t| {
                let (w, f) = match &self.mean_w {
                    Some(mw) => (mw[t].to_string(), fidelity(mw[t]).to_string()),
                    None => (String::new(), String::new()),
                };
                vec![t.to_string(), self.pmf[t].to_string(), cdf[t].to_string(), w, f]
            })
            .collect();
        csv_string(&["t", "pmf", "cdf", "mean_w", "mean_F"], &rows)
    }
}

/// Delivery-time mass and Werner mass, indexed by `t`.
#[derive(Debug, Clone, PartialEq)]
struct Link {
    m: Vec<f64>,
    w: Vec<f64>,
}

/// Two inputs that are both present: mass, `E[w1 w2]` mass and
/// `E[w1 + w2]` mass per completion time, after storage decay.
#[derive(Debug, Clone, PartialEq)]
struct Pair {
    mass: Vec<f64>,
    w_prod: Vec<f64>,
    w_sum: Vec<f64>,
}

fn geometric_link(p: f64, t_trunc: usize, w0: f64) -> Link {
    let mut m = vec![0.0; t_trunc + 1];
    let q = 1.0 - p;
    let mut pq = p;
    for slot in m.iter_mut().skip(1) {
        *slot = pq;
        pq *= q;
    }
    let w = m.iter().map(|x| x * w0).collect();
    Link { m, w }
}

fn check_trunc(t_trunc: usize) -> Result<(), ChainError> {
    if t_trunc == 0 {
        Err(ChainError::Domain("t_trunc must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `P(T = t) = p (1-p)^{t-1}` with constant Werner parameter `w0`.
pub fn geometric_pmf(p: f64, t_trunc: usize, w0: f64) -> Result<TruncatedDistribution, ChainError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(ChainError::Domain(format!("p must lie in (0, 1], got {p}")));
    }
    if !(0.0..=1.0).contains(&w0) {
        return Err(ChainError::Domain(format!("w0 must lie in [0, 1], got {w0}")));
    }
    check_trunc(t_trunc)?;
    Ok(TruncatedDistribution::from_link(&geometric_link(p, t_trunc, w0)))
}

fn combine(a: &Link, b: &Link, lambda: f64, tau: Option<u64>) -> Result<Pair, ChainError> {
    match tau {
        // Within the horizon no pair is ever more than t_trunc - 1 apart.
        Some(tau) if (tau as usize) + 2 < a.m.len() => combine_cutoff(a, b, lambda, tau as usize),
        _ => Ok(combine_plain(a, b, lambda)),
    }
}

/// Both inputs started at time zero; completion at the later arrival.
fn combine_plain(a: &Link, b: &Link, lambda: f64) -> Pair {
    let len = a.m.len();
    let mut out = Pair {
        mass: vec![0.0; len],
        w_prod: vec![0.0; len],
        w_sum: vec![0.0; len],
    };
    // Cumulative mass before t, and decayed Werner mass Σ_{u<t} w(u) λ^{t-u}.
    let (mut ca, mut cb, mut ea, mut eb) = (0.0, 0.0, 0.0, 0.0);
    for t in 1..len {
        ea = lambda * (ea + a.w[t - 1]);
        eb = lambda * (eb + b.w[t - 1]);
        let (ma, mb, wa, wb) = (a.m[t], b.m[t], a.w[t], b.w[t]);
        out.mass[t] = ma * cb + mb * ca + ma * mb;
        out.w_prod[t] = wa * eb + wb * ea + wa * wb;
        out.w_sum[t] = wa * cb + ma * eb + wb * ca + mb * ea + wa * mb + ma * wb;
        ca += a.m[t];
        cb += b.m[t];
    }
    out
}

/// Sliding sum `Σ_{u=lo(t)}^{t} h(u) λ^{t-u}` over the window `t - tau..=t`
/// restricted to `u > start`.
struct Window {
    lambda: f64,
    drop: f64,
    value: f64,
}

impl Window {
    fn new(lambda: f64, tau: usize) -> Self {
        Self {
            lambda,
            drop: lambda.powi(tau as i32 + 1),
            value: 0.0,
        }
    }

    fn advance(&mut self, entering: f64, leaving: f64) -> f64 {
        self.value = (self.lambda * self.value + entering - self.drop * leaving).max(0.0);
        self.value
    }
}

/// Combination with a cut-off. When the later input would arrive more than
/// `tau` attempts after the earlier one, the earlier link is discarded at
/// its arrival plus `tau` and its side starts over; the other side keeps
/// running. States record which side restarted when (`c`) and when the
/// other side started (`s`).
fn combine_cutoff(a: &Link, b: &Link, lambda: f64, tau: usize) -> Result<Pair, ChainError> {
    let len = a.m.len();
    let t_max = len - 1;
    if t_max > MAX_CUTOFF_TRUNC {
        return Err(ChainError::Unsupported(format!(
            "cut-off tracking supports t_trunc up to {MAX_CUTOFF_TRUNC}, got {t_max}"
        )));
    }
    let survival = |l: &Link| {
        let mut s = vec![0.0; len];
        let mut acc = 1.0;
        for t in 0..len {
            acc -= l.m[t];
            s[t] = acc.max(0.0);
        }
        s
    };
    let sides = [a, b];
    let surv = [survival(a), survival(b)];
    let mut out = Pair {
        mass: vec![0.0; len],
        w_prod: vec![0.0; len],
        w_sum: vec![0.0; len],
    };
    // states[x][c][s]: side x restarted at c, the other side started at s.
    let mut states: [Vec<Vec<f64>>; 2] = [
        (0..len).map(|c| vec![0.0; c + 1]).collect(),
        (0..len).map(|c| vec![0.0; c + 1]).collect(),
    ];
    states[0][0][0] = 1.0;
    for c in 0..len {
        for x in 0..2 {
            let y = 1 - x;
            for s in 0..=c {
                let omega = states[x][c][s];
                // Negligible restart paths are dropped; their mass simply
                // goes uncaptured.
                if omega < PRUNE {
                    continue;
                }
                let sy = surv[y][c - s];
                if sy <= 0.0 {
                    continue;
                }
                let k = omega / sy;
                let (fx, fy) = (sides[x], sides[y]);
                // Arrival mass and Werner mass at absolute time u.
                let gx = |u: usize| if u > c { fx.m[u - c] } else { 0.0 };
                let hx = |u: usize| if u > c { fx.w[u - c] } else { 0.0 };
                let gy = |u: usize| if u > c { fy.m[u - s] } else { 0.0 };
                let hy = |u: usize| if u > c { fy.w[u - s] } else { 0.0 };
                let back = |u: usize| if u >= tau + 1 { u - tau - 1 } else { 0 };
                let (mut cy, mut cx) = (0.0, 0.0);
                let mut ey = Window::new(lambda, tau);
                let mut ex = Window::new(lambda, tau);
                for t in c + 1..len {
                    let old = back(t);
                    cy += gy(t) - gy(old);
                    cx += gx(t) - gx(old);
                    let eyt = ey.advance(hy(t), hy(old));
                    let ext = ex.advance(hx(t), hx(old));
                    // x arrives at t with y in [t - tau, t]; y arrives at t
                    // with x in [t - tau, t - 1].
                    let (xt, yt, wxt, wyt) = (gx(t), gy(t), hx(t), hy(t));
                    let cx_before = cx - xt;
                    let ex_before = ext - wxt;
                    out.mass[t] += k * (xt * cy + yt * cx_before);
                    out.w_prod[t] += k * (wxt * eyt + wyt * ex_before);
                    out.w_sum[t] += k * (wxt * cy + xt * eyt + wyt * cx_before + yt * ex_before);
                    // x arrives at t and expires before y shows up.
                    let e = t + tau;
                    if e < len {
                        states[x][e][s] += omega * xt * surv[y][e - s] / sy;
                        // y arrives at t and expires before x shows up.
                        states[y][e][c] += k * yt * surv[x][e - c];
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Swap(f64),
    Distill,
}

fn apply(pair: &Pair, op: Op) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    match op {
        Op::Swap(p_s) => (
            pair.mass.iter().map(|m| p_s * m).collect(),
            pair.w_prod.iter().map(|w| p_s * w).collect(),
            pair.mass.iter().map(|m| (1.0 - p_s) * m).collect(),
        ),
        Op::Distill => {
            let (succ, wmass) = distill_bilinear();
            let len = pair.mass.len();
            let mut s = vec![0.0; len];
            let mut sw = vec![0.0; len];
            let mut f = vec![0.0; len];
            for t in 0..len {
                let (m, ws, wp) = (pair.mass[t], pair.w_sum[t], pair.w_prod[t]);
                s[t] = succ.expect(m, ws, wp).clamp(0.0, m);
                sw[t] = wmass.expect(m, ws, wp).max(0.0);
                f[t] = (m - s[t]).max(0.0);
            }
            (s, sw, f)
        }
    }
}

/// Solves `P = S + F * P` and `W = SW + F * W` on the horizon.
fn compound(s: &[f64], sw: &[f64], f: &[f64]) -> Link {
    let len = s.len();
    if f.iter().all(|&x| x == 0.0) {
        return Link { m: s.to_vec(), w: sw.to_vec() };
    }
    if len - 1 <= DIRECT_COMPOUND_MAX {
        compound_direct(s, sw, f)
    } else {
        compound_fft(s, sw, f)
    }
}

fn compound_direct(s: &[f64], sw: &[f64], f: &[f64]) -> Link {
    let len = s.len();
    let support: Vec<usize> = (1..len).filter(|&u| f[u] != 0.0).collect();
    let mut m = vec![0.0; len];
    let mut w = vec![0.0; len];
    for t in 1..len {
        let (mut pm, mut pw) = (s[t], sw[t]);
        for &u in &support {
            if u >= t {
                break;
            }
            pm += f[u] * m[t - u];
            pw += f[u] * w[t - u];
        }
        m[t] = pm;
        w[t] = pw;
    }
    Link { m, w }
}

struct Convolver {
    size: usize,
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl Convolver {
    fn new(len: usize) -> Self {
        let size = (2 * len).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
        }
    }

    fn spectrum(&self, x: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        buf.resize(self.size, Complex::new(0.0, 0.0));
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse transform of a product of spectra, truncated to `len`.
    fn product(&self, a: &[Complex<f64>], b: &[Complex<f64>], len: usize) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        self.inv.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        buf[..len].iter().map(|c| (c.re * scale).max(0.0)).collect()
    }
}

/// `R = Σ_k F^{*k}` by repeated squaring, then `P = S * R`, `W = SW * R`.
fn compound_fft(s: &[f64], sw: &[f64], f: &[f64]) -> Link {
    let len = s.len();
    let conv = Convolver::new(len);
    let mut r = vec![0.0; len];
    r[0] = 1.0;
    let mut h = f.to_vec();
    loop {
        let fh = conv.spectrum(&h);
        let fr = conv.spectrum(&r);
        let rh = conv.product(&fr, &fh, len);
        r.iter_mut().zip(&rh).for_each(|(x, y)| *x += y);
        h = conv.product(&fh, &fh, len);
        h[0] = 0.0;
        if h.iter().sum::<f64>() < 1e-22 {
            break;
        }
    }
    let fr = conv.spectrum(&r);
    let mut m = conv.product(&conv.spectrum(s), &fr, len);
    let mut w = conv.product(&conv.spectrum(sw), &fr, len);
    m[0] = 0.0;
    w[0] = 0.0;
    Link { m, w }
}

/// Distribution of the later of two independent arrivals. The earlier link
/// decays by `e^{-ΔT/t_coh}`; `mean_w` is the expected product of the two
/// Werner parameters at that time. With `tau`, pairs further apart than
/// `tau` restart the earlier side.
pub fn max_combine(
    d1: &TruncatedDistribution,
    d2: &TruncatedDistribution,
    t_coh: f64,
    tau: Option<u64>,
) -> Result<TruncatedDistribution, ChainError> {
    if d1.t_trunc != d2.t_trunc {
        return Err(ChainError::Domain("inputs must share t_trunc".into()));
    }
    if tau == Some(0) {
        return Err(ChainError::Domain("tau must be at least 1".into()));
    }
    let pair = combine(&d1.to_link(), &d2.to_link(), decay_factor(t_coh), tau)?;
    Ok(TruncatedDistribution::from_link(&Link {
        m: pair.mass,
        w: pair.w_prod,
    }))
}

/// Sum of `K` independent copies of `d` with `K ~ Geometric(p_s)`; the
/// delivered Werner parameter is that of the final copy.
pub fn compound_geometric(d: &TruncatedDistribution, p_s: f64) -> Result<TruncatedDistribution, ChainError> {
    if !(p_s > 0.0 && p_s <= 1.0) {
        return Err(ChainError::Domain(format!("p_s must lie in (0, 1], got {p_s}")));
    }
    let l = d.to_link();
    let s: Vec<f64> = l.m.iter().map(|m| p_s * m).collect();
    let sw: Vec<f64> = l.w.iter().map(|w| p_s * w).collect();
    let f: Vec<f64> = l.m.iter().map(|m| (1.0 - p_s) * m).collect();
    Ok(TruncatedDistribution::from_link(&compound(&s, &sw, &f)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackConfig {
    /// Fixed horizon; `None` picks one from the expected mean and widens it
    /// until the floor is met.
    pub t_trunc: Option<usize>,
    pub floor: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            t_trunc: None,
            floor: DEFAULT_FLOOR,
        }
    }
}

impl TrackConfig {
    pub fn with_trunc(t_trunc: usize) -> Self {
        Self {
            t_trunc: Some(t_trunc),
            ..Self::default()
        }
    }
}

/// Rough mean of the protocol, used only to size the horizon.
fn estimated_mean(params: &ChainParams, steps: &[Step]) -> f64 {
    let mut mean = 1.0 / params.p_g;
    let p_d = crate::chain::distill_step(params.w0, params.w0).map(|r| r.0).unwrap_or(0.5).max(0.1);
    for step in steps {
        let p = (1.0 / mean).min(1.0);
        let mut two = (3.0 - 2.0 * p) / ((2.0 - p) * p);
        if let Some(tau) = params.tau {
            // Rounds lost to the cut-off: the second input must follow the
            // first within tau attempts.
            let within = -(tau as f64 * (-p).ln_1p()).exp_m1();
            two /= within.max(1.0 / 64.0);
        }
        mean = match step {
            Step::Swap => two / params.p_s,
            Step::Distill => two / p_d,
        };
    }
    mean
}

fn default_trunc(params: &ChainParams, mean: f64) -> usize {
    // Cut-off horizons grow by doubling from a tighter start.
    let factor = if params.tau.is_some() { 16.0 } else { 40.0 };
    ((factor * mean).ceil() as usize).max(64)
}

/// Intermediate stages are tabulated only up to a multiple of their own
/// expected mean; their tails beyond it are far below the captured-mass
/// floor and only cost time. Cut-off stages cost cubic time in the horizon
/// and use a tighter multiple.
const STAGE_HORIZON_FACTOR: f64 = 60.0;
const CUTOFF_STAGE_HORIZON_FACTOR: f64 = 24.0;

fn stage_horizon(params: &ChainParams, steps: &[Step], t_trunc: usize) -> usize {
    let factor = if params.tau.is_some() {
        CUTOFF_STAGE_HORIZON_FACTOR
    } else {
        STAGE_HORIZON_FACTOR
    };
    let h = factor * estimated_mean(params, steps);
    (h.ceil() as usize).max(64).min(t_trunc)
}

fn run_steps(params: &ChainParams, steps: &[Step], t_trunc: usize) -> Result<Link, ChainError> {
    let lambda = params.decay();
    let mut link = geometric_link(params.p_g, t_trunc, params.w0);
    for (i, step) in steps.iter().enumerate() {
        let horizon = if i + 1 == steps.len() {
            t_trunc
        } else {
            stage_horizon(params, &steps[..=i], t_trunc)
        };
        // Outputs up to the horizon only depend on inputs up to it.
        link.m.truncate(horizon + 1);
        link.w.truncate(horizon + 1);
        let pair = combine(&link, &link, lambda, params.tau)?;
        let op = match step {
            Step::Swap => Op::Swap(params.p_s),
            Step::Distill => Op::Distill,
        };
        let (s, sw, f) = apply(&pair, op);
        link = compound(&s, &sw, &f);
        link.m.resize(t_trunc + 1, 0.0);
        link.w.resize(t_trunc + 1, 0.0);
    }
    Ok(link)
}

/// Runs `attempt` on growing horizons until the captured mass reaches the
/// floor. A fixed horizon is tried once.
fn with_horizon<T>(
    config: &TrackConfig,
    initial: usize,
    cap: usize,
    attempt: impl Fn(usize) -> Result<(T, f64), ChainError>,
) -> Result<T, ChainError> {
    let mut t_trunc = config.t_trunc.unwrap_or(initial.min(cap));
    check_trunc(t_trunc)?;
    loop {
        let (value, captured) = attempt(t_trunc)?;
        if captured >= config.floor {
            return Ok(value);
        }
        if config.t_trunc.is_some() || t_trunc >= cap {
            return Err(ChainError::Horizon {
                captured,
                floor: config.floor,
                t_trunc,
            });
        }
        t_trunc = (2 * t_trunc).min(cap);
    }
}

fn horizon_cap(params: &ChainParams) -> usize {
    if params.tau.is_some() {
        MAX_CUTOFF_TRUNC
    } else {
        MAX_AUTO_TRUNC
    }
}

/// Full delivery-time PMF and mean Werner parameter of the protocol.
pub fn chain_distribution(
    params: &ChainParams,
    protocol: &Protocol,
    config: &TrackConfig,
) -> Result<TruncatedDistribution, ChainError> {
    protocol.check(params)?;
    let initial = default_trunc(params, estimated_mean(params, &protocol.steps));
    with_horizon(config, initial, horizon_cap(params), |t| {
        let d = TruncatedDistribution::from_link(&run_steps(params, &protocol.steps, t)?);
        let captured = d.captured_mass;
        Ok((d, captured))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub captured_mass: f64,
    pub t_trunc: usize,
}

/// Mean delivery time. When the last step is a swap its success does not
/// depend on the inputs, so the mean is the mean duration of one round
/// divided by `p_s` and the final stage never needs to be tabulated.
pub fn chain_mean(params: &ChainParams, protocol: &Protocol, config: &TrackConfig) -> Result<MeanEstimate, ChainError> {
    protocol.check(params)?;
    match protocol.steps.split_last() {
        Some((Step::Swap, inner)) => {
            let initial = default_trunc(params, estimated_mean(params, inner));
            with_horizon(config, initial, horizon_cap(params), |t| {
                let link = run_steps(params, inner, t)?;
                let pair = combine(&link, &link, 1.0, params.tau)?;
                let round = TruncatedDistribution::from_pmf(pair.mass, None);
                let est = MeanEstimate {
                    mean: round.mean() / params.p_s,
                    captured_mass: round.captured_mass,
                    t_trunc: t,
                };
                Ok((est, round.captured_mass))
            })
        }
        _ => {
            let d = chain_distribution(params, protocol, config)?;
            Ok(MeanEstimate {
                mean: d.mean(),
                captured_mass: d.captured_mass,
                t_trunc: d.t_trunc,
            })
        }
    }
}

/// Geometric distribution with the same mean as `d`, on the same horizon.
pub fn moment_matched_geometric(d: &TruncatedDistribution) -> Result<TruncatedDistribution, ChainError> {
    let mut g = geometric_pmf((1.0 / d.mean()).min(1.0), d.t_trunc, 1.0)?;
    g.mean_w = None;
    Ok(g)
}

/// Mean decay factor of the earlier link when two independent elementary
/// links are combined; the tracked counterpart of the closed-form `Γ`.
pub fn pre_swap_decay(p_g: f64, t_coh: f64, t_trunc: usize) -> Result<f64, ChainError> {
    let g = geometric_pmf(p_g, t_trunc, 1.0)?;
    let d = max_combine(&g, &g, t_coh, None)?;
    d.overall_mean_w()
        .ok_or_else(|| ChainError::Domain("no Werner data".into()))
}

/// Default horizon for a swap-only chain.
pub fn default_trunc_for(params: &ChainParams) -> usize {
    let mean = formulas::geometric_level_mean(params).unwrap_or(1.0 / params.p_g);
    default_trunc(params, mean)
}
