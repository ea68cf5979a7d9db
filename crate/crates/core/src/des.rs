//! A small sequential discrete-event kernel and a repeater-chain model
//! running on it.
//!
//! The kernel repeatedly takes the earliest event, advances the clock to
//! its time and hands it to the model, which may schedule further events.
//! Events are ordered by time, then priority class, then scheduling order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chain::{distill_step, ChainError, ChainParams, Protocol, Step};
use crate::montecarlo::{substream, BatchSummary, SampleRecord};

#[derive(Debug, Error, PartialEq)]
pub enum DesError {
    #[error("event at t = {time} scheduled in the past (clock = {clock})")]
    PastEvent { time: u64, clock: u64 },
    #[error("event queue ran empty before the stop condition at t = {clock}")]
    EmptyQueue { clock: u64 },
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Event payloads declare a priority class; lower classes run first among
/// events with equal time.
pub trait EventKind {
    fn priority(&self) -> u8 {
        1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event<K> {
    pub time: u64,
    pub priority: u8,
    pub sequence: u64,
    pub kind: K,
}

impl<K: PartialEq> Eq for Event<K> {}

impl<K: PartialEq> Ord for Event<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap.
        (other.time, other.priority, other.sequence).cmp(&(self.time, self.priority, self.sequence))
    }
}

impl<K: PartialEq> PartialOrd for Event<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub clock: u64,
    pub events: u64,
}

#[derive(Debug)]
pub struct Kernel<K> {
    clock: u64,
    next_sequence: u64,
    processed: u64,
    queue: BinaryHeap<Event<K>>,
}

impl<K: EventKind + PartialEq> Default for Kernel<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: EventKind + PartialEq> Kernel<K> {
    pub fn new() -> Self {
        Self {
            clock: 0,
            next_sequence: 0,
            processed: 0,
            queue: BinaryHeap::new(),
        }
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn schedule(&mut self, time: u64, kind: K) -> Result<u64, DesError> {
        if time < self.clock {
            return Err(DesError::PastEvent { time, clock: self.clock });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.queue.push(Event {
            time,
            priority: kind.priority(),
            sequence,
            kind,
        });
        Ok(sequence)
    }

    /// Removes the earliest event and advances the clock to its time.
    pub fn pop_next(&mut self) -> Option<Event<K>> {
        let e = self.queue.pop()?;
        debug_assert!(e.time >= self.clock);
        self.clock = e.time;
        self.processed += 1;
        Some(e)
    }

    /// Processes events until `perform` returns [`Control::Stop`].
    pub fn run_until<F>(&mut self, mut perform: F) -> Result<RunReport, DesError>
    where
        F: FnMut(&mut Self, Event<K>) -> Result<Control, DesError>,
    {
        loop {
            let e = self.pop_next().ok_or(DesError::EmptyQueue { clock: self.clock })?;
            if perform(self, e)? == Control::Stop {
                return Ok(RunReport {
                    clock: self.clock,
                    events: self.processed,
                });
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainEvent {
    GenAttempt { leaf: u64 },
    SwapResolve { level: usize, position: u64 },
    DistillResolve { level: usize, position: u64 },
    CutoffExpire { link: u64 },
    End,
}

impl EventKind for ChainEvent {
    fn priority(&self) -> u8 {
        match self {
            ChainEvent::CutoffExpire { .. } => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for ChainEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainEvent::GenAttempt { leaf } => write!(f, "gen leaf={leaf}"),
            ChainEvent::SwapResolve { level, position } => write!(f, "swap level={level} pos={position}"),
            ChainEvent::DistillResolve { level, position } => write!(f, "distill level={level} pos={position}"),
            ChainEvent::CutoffExpire { link } => write!(f, "expire link={link}"),
            ChainEvent::End => write!(f, "end"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DesConfig {
    /// Classical-communication delay of every swap, in attempts.
    pub delay: u64,
    pub record_trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub record: SampleRecord,
    pub events: u64,
    /// SHA-256 of the event trace, hex encoded.
    pub trace_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy)]
struct LinkRec {
    id: u64,
    birth: u64,
    w: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Slot {
    link: Option<LinkRec>,
    /// The link is held for a pending swap or distillation.
    reserved: bool,
}

struct ChainModel<'a> {
    params: &'a ChainParams,
    steps: &'a [Step],
    lambda: f64,
    delay: u64,
    /// `slots[k][pos]`: link produced by the first `k` steps.
    slots: Vec<Vec<Slot>>,
    next_link: u64,
    rng: ChaCha8Rng,
    hasher: Sha256,
    trace: Option<Vec<String>>,
    result: Option<SampleRecord>,
}

type ChainKernel = Kernel<ChainEvent>;

impl ChainModel<'_> {
    fn top(&self) -> usize {
        self.steps.len()
    }

    fn restart(&self, k: &mut ChainKernel, level: usize, pos: u64, at: u64) -> Result<(), DesError> {
        let width = 1u64 << level;
        for leaf in pos * width..(pos + 1) * width {
            k.schedule(at, ChainEvent::GenAttempt { leaf })?;
        }
        Ok(())
    }

    fn place(&mut self, k: &mut ChainKernel, level: usize, pos: u64, w: f64) -> Result<(), DesError> {
        let now = k.clock();
        let slot = &mut self.slots[level][pos as usize];
        assert!(slot.link.is_none(), "two links in one slot");
        let id = self.next_link;
        self.next_link += 1;
        *slot = Slot {
            link: Some(LinkRec { id, birth: now, w }),
            reserved: false,
        };
        if level == self.top() {
            self.result = Some(SampleRecord { t: now, w });
            k.schedule(now, ChainEvent::End)?;
            return Ok(());
        }
        let sibling = self.slots[level][(pos ^ 1) as usize];
        if sibling.link.is_some() {
            self.slots[level][pos as usize].reserved = true;
            self.slots[level][(pos ^ 1) as usize].reserved = true;
            let parent = pos / 2;
            let (event, delay) = match self.steps[level] {
                Step::Swap => (ChainEvent::SwapResolve { level: level + 1, position: parent }, self.delay),
                Step::Distill => (ChainEvent::DistillResolve { level: level + 1, position: parent }, 0),
            };
            k.schedule(now + delay, event)?;
        } else if let Some(tau) = self.params.tau {
            k.schedule(now + tau + 1, ChainEvent::CutoffExpire { link: id })?;
        }
        Ok(())
    }

    fn resolve(&mut self, k: &mut ChainKernel, level: usize, pos: u64) -> Result<(), DesError> {
        let now = k.clock();
        let (l, r) = ((2 * pos) as usize, (2 * pos + 1) as usize);
        let a = self.slots[level - 1][l].link.take().expect("left input present");
        let b = self.slots[level - 1][r].link.take().expect("right input present");
        self.slots[level - 1][l].reserved = false;
        self.slots[level - 1][r].reserved = false;
        let gap = a.birth.abs_diff(b.birth);
        if let Some(tau) = self.params.tau {
            assert!(gap <= tau, "stored link older than cut-off");
        }
        let paired = a.birth.max(b.birth);
        // Storage until the later link arrived, then both wait for the
        // classical messages.
        let hold = self.lambda.powf((now - paired) as f64);
        let decay = self.lambda.powf(gap as f64);
        let (mut wa, mut wb) = (a.w * hold, b.w * hold);
        if a.birth < b.birth {
            wa *= decay;
        } else {
            wb *= decay;
        }
        let (p, w) = match self.steps[level - 1] {
            Step::Swap => (self.params.p_s, wa * wb),
            Step::Distill => distill_step(wa, wb)?,
        };
        if self.rng.gen::<f64>() < p {
            self.place(k, level, pos, w)
        } else {
            self.restart(k, level, pos, now + 1)
        }
    }

    fn perform(&mut self, k: &mut ChainKernel, e: Event<ChainEvent>) -> Result<Control, DesError> {
        let line = format!("{} {} {}", e.time, e.sequence, e.kind);
        self.hasher.update(line.as_bytes());
        self.hasher.update(b"\n");
        if let Some(t) = self.trace.as_mut() {
            t.push(line);
        }
        match e.kind {
            ChainEvent::GenAttempt { leaf } => {
                if self.rng.gen::<f64>() < self.params.p_g {
                    self.place(k, 0, leaf, self.params.w0)?;
                } else {
                    k.schedule(e.time + 1, e.kind)?;
                }
            }
            ChainEvent::SwapResolve { level, position } | ChainEvent::DistillResolve { level, position } => {
                self.resolve(k, level, position)?;
            }
            ChainEvent::CutoffExpire { link } => {
                let found = self.slots.iter().enumerate().find_map(|(level, row)| {
                    row.iter()
                        .position(|s| s.link.is_some_and(|l| l.id == link) && !s.reserved)
                        .map(|pos| (level, pos))
                });
                if let Some((level, pos)) = found {
                    self.slots[level][pos].link = None;
                    self.restart(k, level, pos as u64, e.time)?;
                }
            }
            ChainEvent::End => return Ok(Control::Stop),
        }
        Ok(Control::Continue)
    }
}

/// One delivery simulated event by event.
pub fn simulate_chain(
    params: &ChainParams,
    protocol: &Protocol,
    config: &DesConfig,
    rng: ChaCha8Rng,
) -> Result<SimOutcome, DesError> {
    protocol.check(params)?;
    let top = protocol.steps.len();
    let mut model = ChainModel {
        params,
        steps: &protocol.steps,
        lambda: params.decay(),
        delay: config.delay,
        slots: (0..=top).map(|k| vec![Slot::default(); 1 << (top - k)]).collect(),
        next_link: 0,
        rng,
        hasher: Sha256::new(),
        trace: config.record_trace.then(Vec::new),
        result: None,
    };
    let mut kernel = ChainKernel::new();
    model.restart(&mut kernel, top, 0, 1)?;
    let report = kernel.run_until(|k, e| model.perform(k, e))?;
    let digest = model.hasher.finalize();
    Ok(SimOutcome {
        record: model.result.expect("run stops only after delivery"),
        events: report.events,
        trace_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
        trace: model.trace,
    })
}

/// Raw delivery records of a batch, in run-index order; run `i` uses the
/// same random substream as Monte Carlo sample `i`.
pub fn simulate_samples(
    params: &ChainParams,
    protocol: &Protocol,
    config: &DesConfig,
    n_runs: u64,
    seed: u64,
) -> Result<Vec<SampleRecord>, DesError> {
    if n_runs == 0 {
        return Err(ChainError::Domain("n_runs must be at least 1".into()).into());
    }
    let quiet = DesConfig {
        record_trace: false,
        ..*config
    };
    (0..n_runs)
        .into_par_iter()
        .map(|i| simulate_chain(params, protocol, &quiet, substream(seed, i)).map(|o| o.record))
        .collect()
}

pub fn simulate_batch(
    params: &ChainParams,
    protocol: &Protocol,
    config: &DesConfig,
    n_runs: u64,
    seed: u64,
) -> Result<BatchSummary, DesError> {
    let samples = simulate_samples(params, protocol, config, n_runs, seed)?;
    Ok(BatchSummary::from_samples(&samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::t_coh_for_decay;
    use crate::montecarlo::{ks_statistic, run_samples};

    #[derive(Debug, Clone, Copy, PartialEq)]
    enum Toy {
        Tick(u32),
        Urgent,
        End,
    }

    impl EventKind for Toy {
        fn priority(&self) -> u8 {
            if *self == Toy::Urgent {
                0
            } else {
                1
            }
        }
    }

    #[test]
    fn ordering() {
        let mut k = Kernel::new();
        k.schedule(5, Toy::Tick(0)).unwrap();
        k.schedule(3, Toy::Tick(1)).unwrap();
        assert_eq!(k.pop_next().unwrap().time, 3);
        assert_eq!(k.clock(), 3);

        let mut k = Kernel::new();
        k.schedule(3, Toy::Tick(1)).unwrap();
        k.schedule(3, Toy::Tick(2)).unwrap();
        k.schedule(3, Toy::Urgent).unwrap();
        assert_eq!(k.pop_next().unwrap().kind, Toy::Urgent);
        assert_eq!(k.pop_next().unwrap().kind, Toy::Tick(1));
        assert_eq!(k.pop_next().unwrap().kind, Toy::Tick(2));
        assert!(k.pop_next().is_none());
        assert_eq!(k.schedule(1, Toy::End), Err(DesError::PastEvent { time: 1, clock: 3 }));
    }

    #[test]
    fn run_until_end() {
        let mut k = Kernel::new();
        k.schedule(0, Toy::End).unwrap();
        let r = k.run_until(|_, e| Ok(if e.kind == Toy::End { Control::Stop } else { Control::Continue }));
        assert_eq!(r.unwrap(), RunReport { clock: 0, events: 1 });

        let mut k: Kernel<Toy> = Kernel::new();
        k.schedule(2, Toy::Tick(0)).unwrap();
        let r = k.run_until(|_, _| Ok(Control::Continue));
        assert_eq!(r, Err(DesError::EmptyQueue { clock: 2 }));
    }

    #[test]
    fn perfect_components() {
        let p = ChainParams::new(1, 1.0, 1.0).with_w0(0.9);
        for i in 0..20 {
            let o = simulate_chain(&p, &Protocol::swap_only(1), &DesConfig::default(), substream(4, i)).unwrap();
            assert_eq!(o.record.t, 1);
            assert!((o.record.w - 0.81).abs() < 1e-15);
        }
    }

    #[test]
    fn single_repeater_mean() {
        let p = ChainParams::new(1, 0.5, 0.5);
        let b = simulate_batch(&p, &Protocol::swap_only(1), &DesConfig::default(), 100_000, 21).unwrap();
        assert!((b.mean_t - 16.0 / 3.0).abs() < 4.0 * b.stderr_t.unwrap());
    }

    #[test]
    fn delay_shifts_mean() {
        let p = ChainParams::new(1, 0.5, 1.0);
        let cfg = DesConfig { delay: 3, record_trace: false };
        let b = simulate_batch(&p, &Protocol::swap_only(1), &cfg, 100_000, 2).unwrap();
        let expected = 8.0 / 3.0 + 3.0;
        assert!((b.mean_t - expected).abs() < 4.0 * b.stderr_t.unwrap());
    }

    #[test]
    fn traces_are_seed_stable() {
        let p = ChainParams::new(2, 0.4, 0.7).with_tau(Some(3)).with_t_coh(10.0);
        let proto = Protocol::swap_only(2);
        let cfg = DesConfig { delay: 0, record_trace: true };
        let a = simulate_chain(&p, &proto, &cfg, substream(8, 0)).unwrap();
        let b = simulate_chain(&p, &proto, &cfg, substream(8, 0)).unwrap();
        assert_eq!(a, b);
        let c = simulate_chain(&p, &proto, &cfg, substream(8, 1)).unwrap();
        assert_ne!(a.trace_hash, c.trace_hash);
        let trace = a.trace.unwrap();
        assert_eq!(trace.len() as u64, a.events);
        assert!(trace.last().unwrap().ends_with("end"));
    }

    #[test]
    fn matches_montecarlo_distribution() {
        let cases = [
            ChainParams::new(1, 0.5, 0.5),
            ChainParams::new(2, 0.3, 0.8).with_tau(Some(4)).with_t_coh(t_coh_for_decay(0.9)),
        ];
        let crit = 1.628 * (2.0f64 / 10_000.0).sqrt();
        for p in cases {
            let proto = Protocol::swap_only(p.n);
            let des = simulate_samples(&p, &proto, &DesConfig::default(), 10_000, 100).unwrap();
            let mc = run_samples(&p, &proto, 10_000, 200).unwrap();
            let ts = |v: &[SampleRecord]| v.iter().map(|s| s.t).collect::<Vec<_>>();
            assert!(ks_statistic(&ts(&des), &ts(&mc)) < crit);
        }
    }

    #[test]
    fn distillation_runs() {
        let p = ChainParams::new(1, 0.5, 0.8).with_w0(0.9).with_t_coh(50.0);
        let proto = Protocol::with_distillation(1, &[1]);
        let b = simulate_batch(&p, &proto, &DesConfig::default(), 2000, 1).unwrap();
        assert!(b.mean_w > 0.0 && b.mean_w < 1.0);
    }
}
