//! Discrete Markov chain of a swap-only repeater chain.
//!
//! A state records which links exist. Links always span an aligned block
//! of the nesting tree, so a state is a bitmask over heap-indexed tree
//! nodes (root = 1, children of `i` are `2i` and `2i + 1`, segments are
//! the leaves).

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chain::{ChainError, ChainParams};
use crate::disttrack::TruncatedDistribution;

pub const DEFAULT_STATE_LIMIT: usize = 1 << 20;
/// Transient-state count up to which the hitting-time systems are solved
/// densely.
pub const DENSE_SOLVE_MAX: usize = 1 << 12;
const MAX_MARKOV_LEVELS: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SwapTime {
    /// Swaps take no time; cascades resolve within the generating tick.
    #[default]
    ZeroStep,
    /// Every round of swaps takes one tick.
    OneStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub swap_time: SwapTime,
    /// Identify states that differ by mirroring sub-blocks.
    pub merge_symmetric: bool,
    pub state_limit: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            swap_time: SwapTime::ZeroStep,
            merge_symmetric: false,
            state_limit: DEFAULT_STATE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeaterMarkovChain {
    pub n: u32,
    pub swap_time: SwapTime,
    /// Link bitmask of every state; index 0 is the start state.
    pub states: Vec<u64>,
    /// Sparse rows `(target, probability)`, sorted by target.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub absorbing: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbsorptionStats {
    pub mean: f64,
    pub variance: f64,
}

struct Builder {
    n: u32,
    p_g: f64,
    p_s: f64,
    mode: SwapTime,
    merge: bool,
}

fn has(state: u64, node: u64) -> bool {
    state >> node & 1 == 1
}

fn depth_of(node: u64) -> u32 {
    63 - node.leading_zeros()
}

impl Builder {
    /// Outcome distribution of one tick for the block rooted at `node`.
    fn step(&self, state: u64, node: u64) -> Vec<(u64, f64)> {
        let bit = 1u64 << node;
        if has(state, node) {
            return vec![(bit, 1.0)];
        }
        if depth_of(node) == self.n {
            return vec![(bit, self.p_g), (0, 1.0 - self.p_g)];
        }
        let (l, r) = (2 * node, 2 * node + 1);
        if self.mode == SwapTime::OneStep && has(state, l) && has(state, r) {
            return vec![(bit, self.p_s), (0, 1.0 - self.p_s)];
        }
        let left = self.step(state, l);
        let right = self.step(state, r);
        let mut out: BTreeMap<u64, f64> = BTreeMap::new();
        for &(a, pa) in &left {
            for &(b, pb) in &right {
                let p = pa * pb;
                if self.mode == SwapTime::ZeroStep && has(a, l) && has(b, r) {
                    *out.entry(bit).or_default() += p * self.p_s;
                    *out.entry(0).or_default() += p * (1.0 - self.p_s);
                } else {
                    *out.entry(a | b).or_default() += p;
                }
            }
        }
        out.into_iter().filter(|&(_, p)| p > 0.0).collect()
    }

    fn canonical(&self, state: u64) -> u64 {
        if self.merge {
            canonical(state, 1, self.n)
        } else {
            state
        }
    }
}

/// Moves a subtree encoded relative to local root 1 under `root`.
fn embed(local: u64, root: u64) -> u64 {
    let mut out = 0;
    let mut bits = local;
    while bits != 0 {
        let i = bits.trailing_zeros() as u64;
        bits &= bits - 1;
        let d = depth_of(i);
        out |= 1u64 << ((root << d) + (i - (1 << d)));
    }
    out
}

/// Subtree of `state` at `node`, re-encoded relative to local root 1.
fn extract(state: u64, node: u64, levels: u32) -> u64 {
    let mut out = 0;
    for d in 0..=levels {
        for k in 0..(1u64 << d) {
            if has(state, (node << d) + k) {
                out |= 1u64 << ((1u64 << d) + k);
            }
        }
    }
    out
}

/// Representative with the smaller child code on the left at every node.
fn canonical(state: u64, node: u64, levels: u32) -> u64 {
    fn local(state: u64, levels: u32) -> u64 {
        if has(state, 1) || levels == 0 {
            return state & 0b10;
        }
        let l = local(extract(state, 2, levels - 1), levels - 1);
        let r = local(extract(state, 3, levels - 1), levels - 1);
        let (a, b) = if l <= r { (l, r) } else { (r, l) };
        embed(a, 2) | embed(b, 3)
    }
    let height = levels - depth_of(node);
    embed(local(extract(state, node, height), height), node)
}

impl RepeaterMarkovChain {
    pub fn build(params: &ChainParams, options: BuildOptions) -> Result<Self, ChainError> {
        params.validate()?;
        if params.tau.is_some() {
            return Err(ChainError::Unsupported("markov engine does not model cut-offs".into()));
        }
        if params.n > MAX_MARKOV_LEVELS {
            return Err(ChainError::StateLimit {
                limit: options.state_limit,
            });
        }
        let b = Builder {
            n: params.n,
            p_g: params.p_g,
            p_s: params.p_s,
            mode: options.swap_time,
            merge: options.merge_symmetric,
        };
        let target = 1u64 << 1;
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut states = vec![0u64];
        index.insert(0, 0);
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let s = states[i];
            let outcomes = if s == target { vec![(target, 1.0)] } else { b.step(s, 1) };
            let mut row: BTreeMap<usize, f64> = BTreeMap::new();
            for (next, p) in outcomes {
                let next = b.canonical(next);
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if states.len() >= options.state_limit {
                            return Err(ChainError::StateLimit {
                                limit: options.state_limit,
                            });
                        }
                        states.push(next);
                        index.insert(next, states.len() - 1);
                        queue.push_back(states.len() - 1);
                        states.len() - 1
                    }
                };
                *row.entry(j).or_default() += p;
            }
            if rows.len() <= i {
                rows.resize(i + 1, Vec::new());
            }
            rows[i] = row.into_iter().collect();
        }
        rows.resize(states.len(), Vec::new());
        let absorbing = *index
            .get(&target)
            .ok_or_else(|| ChainError::Singular("end-to-end link unreachable".into()))?;
        let chain = Self {
            n: params.n,
            swap_time: options.swap_time,
            states,
            rows,
            absorbing,
        };
        for (i, row) in chain.rows.iter().enumerate() {
            let total: f64 = row.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12, "row {i} sums to {total}");
        }
        Ok(chain)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn transient(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| i != self.absorbing).collect()
    }

    /// Mean and variance of the number of ticks until the end-to-end link
    /// exists, from the empty start state.
    pub fn absorption_stats(&self) -> Result<AbsorptionStats, ChainError> {
        let transient = self.transient();
        if transient.is_empty() {
            return Ok(AbsorptionStats { mean: 0.0, variance: 0.0 });
        }
        let mut pos = vec![usize::MAX; self.len()];
        for (k, &i) in transient.iter().enumerate() {
            pos[i] = k;
        }
        let q: Vec<Vec<(usize, f64)>> = transient
            .iter()
            .map(|&i| {
                self.rows[i]
                    .iter()
                    .filter(|(j, _)| *j != self.absorbing)
                    .map(|&(j, p)| (pos[j], p))
                    .collect()
            })
            .collect();
        let ones = vec![1.0; q.len()];
        let m = solve_hitting(&q, &ones)?;
        let qm = mul(&q, &m);
        let rhs: Vec<f64> = qm.iter().map(|x| 1.0 + 2.0 * x).collect();
        let s = solve_hitting(&q, &rhs)?;
        let start = pos[0];
        Ok(AbsorptionStats {
            mean: m[start],
            variance: (s[start] - m[start] * m[start]).max(0.0),
        })
    }

    /// `pmf[t]` = probability that the end-to-end link first exists after
    /// tick `t`.
    pub fn waiting_pmf(&self, t_max: usize) -> TruncatedDistribution {
        let mut pmf = vec![0.0; t_max + 1];
        let mut v = vec![0.0; self.len()];
        v[0] = 1.0;
        if self.absorbing == 0 {
            return TruncatedDistribution::from_pmf(pmf, None);
        }
        for slot in pmf.iter_mut().skip(1) {
            let mut next = vec![0.0; self.len()];
            for (i, &x) in v.iter().enumerate() {
                if x == 0.0 || i == self.absorbing {
                    continue;
                }
                for &(j, p) in &self.rows[i] {
                    next[j] += x * p;
                }
            }
            *slot = next[self.absorbing];
            next[self.absorbing] = 0.0;
            v = next;
        }
        TruncatedDistribution::from_pmf(pmf, None)
    }

    /// Human-readable label: one character per segment, `0` for no link,
    /// `1` for an elementary link and overlined `1`s for longer links
    /// (bracketed when the chain has more than two segments).
    pub fn label(&self, state: u64) -> String {
        let mut out = String::new();
        self.label_node(state, 1, &mut out);
        out
    }

    fn label_node(&self, state: u64, node: u64, out: &mut String) {
        let depth = depth_of(node);
        let height = self.n - depth;
        if has(state, node) {
            if height == 0 {
                out.push('1');
            } else {
                let body = "1\u{305}".repeat(1 << height);
                if self.n > 1 {
                    let _ = write!(out, "[{body}]");
                } else {
                    out.push_str(&body);
                }
            }
        } else if height == 0 {
            out.push('0');
        } else {
            self.label_node(state, 2 * node, out);
            self.label_node(state, 2 * node + 1, out);
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph repeater {\n  rankdir=LR;\n");
        for (i, &s) in self.states.iter().enumerate() {
            let shape = if i == self.absorbing { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  s{i} [label=\"{}\", shape={shape}];", self.label(s));
        }
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                let _ = writeln!(out, "  s{i} -> s{j} [label=\"{p}\"];");
            }
        }
        out.push_str("}\n");
        out
    }
}

fn mul(q: &[Vec<(usize, f64)>], x: &[f64]) -> Vec<f64> {
    q.iter().map(|row| row.iter().map(|&(j, p)| p * x[j]).sum()).collect()
}

/// Solves `(I - Q) x = b`.
fn solve_hitting(q: &[Vec<(usize, f64)>], b: &[f64]) -> Result<Vec<f64>, ChainError> {
    let n = q.len();
    if n <= DENSE_SOLVE_MAX {
        let mut a = DMatrix::<f64>::identity(n, n);
        for (i, row) in q.iter().enumerate() {
            for &(j, p) in row {
                a[(i, j)] -= p;
            }
        }
        let x = a
            .lu()
            .solve(&DVector::from_column_slice(b))
            .ok_or_else(|| ChainError::Singular("absorption unreachable from some state".into()))?;
        let x: Vec<f64> = x.iter().copied().collect();
        if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ChainError::Singular("absorption unreachable from some state".into()));
        }
        Ok(x)
    } else {
        gauss_seidel(q, b)
    }
}

fn gauss_seidel(q: &[Vec<(usize, f64)>], b: &[f64]) -> Result<Vec<f64>, ChainError> {
    let n = q.len();
    let mut x = vec![0.0; n];
    for _ in 0..1_000_000 {
        let mut delta: f64 = 0.0;
        for i in (0..n).rev() {
            let mut diag = 1.0;
            let mut acc = b[i];
            for &(j, p) in &q[i] {
                if j == i {
                    diag -= p;
                } else {
                    acc += p * x[j];
                }
            }
            if diag <= 0.0 {
                return Err(ChainError::Singular("absorption unreachable from some state".into()));
            }
            let v = acc / diag;
            delta = delta.max((v - x[i]).abs() / (1.0 + v.abs()));
            x[i] = v;
        }
        if delta < 1e-14 {
            return Ok(x);
        }
    }
    Err(ChainError::Singular("iterative solve did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(n: u32, pg: f64, ps: f64, mode: SwapTime) -> RepeaterMarkovChain {
        RepeaterMarkovChain::build(
            &ChainParams::new(n, pg, ps),
            BuildOptions {
                swap_time: mode,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn one_step_single_repeater_is_five_state_chain() {
        let (pg, ps) = (0.3, 0.6);
        let c = build(1, pg, ps, SwapTime::OneStep);
        assert_eq!(c.len(), 5);
        let labels: Vec<String> = c.states.iter().map(|&s| c.label(s)).collect();
        let idx = |l: &str| labels.iter().position(|x| x == l).unwrap();
        let p = |from: &str, to: &str| {
            c.rows[idx(from)]
                .iter()
                .find(|(j, _)| *j == idx(to))
                .map(|x| x.1)
                .unwrap_or(0.0)
        };
        let q = 1.0 - pg;
        assert!((p("00", "00") - q * q).abs() < 1e-15);
        assert!((p("00", "01") - pg * q).abs() < 1e-15);
        assert!((p("00", "10") - pg * q).abs() < 1e-15);
        assert!((p("00", "11") - pg * pg).abs() < 1e-15);
        assert!((p("01", "01") - q).abs() < 1e-15);
        assert!((p("01", "11") - pg).abs() < 1e-15);
        assert!((p("11", "1\u{305}1\u{305}") - ps).abs() < 1e-15);
        assert!((p("11", "00") - (1.0 - ps)).abs() < 1e-15);
        assert_eq!(p("1\u{305}1\u{305}", "1\u{305}1\u{305}"), 1.0);
        assert!(c.to_dot().contains("doublecircle"));
    }

    #[test]
    fn zero_step_single_repeater() {
        let c = build(1, 0.5, 0.5, SwapTime::ZeroStep);
        assert_eq!(c.len(), 4);
        let s = c.absorption_stats().unwrap();
        assert!((s.mean - 16.0 / 3.0).abs() < 1e-12);
        let one = build(1, 0.5, 0.5, SwapTime::OneStep).absorption_stats().unwrap();
        assert!((one.mean - (16.0 / 3.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn perfect_components() {
        let c = build(1, 1.0, 1.0, SwapTime::ZeroStep);
        let s = c.absorption_stats().unwrap();
        assert!((s.mean - 1.0).abs() < 1e-15 && s.variance.abs() < 1e-12);
        let d = c.waiting_pmf(5);
        assert_eq!(d.pmf, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn state_counts() {
        // Block configurations: a link, or a pair of sub-block
        // configurations; zero-step swaps never leave two sibling links.
        let (mut zero, mut one) = (2usize, 2usize);
        for n in 1..=3 {
            zero *= zero;
            one = 1 + one * one;
            assert_eq!(build(n, 0.5, 0.5, SwapTime::ZeroStep).len(), zero, "n = {n}");
            assert_eq!(build(n, 0.5, 0.5, SwapTime::OneStep).len(), one, "n = {n}");
        }
    }

    #[test]
    fn one_step_adds_swap_rounds_at_level_one() {
        for (pg, ps) in [(0.2, 0.9), (0.7, 0.3)] {
            let z = build(1, pg, ps, SwapTime::ZeroStep).absorption_stats().unwrap();
            let o = build(1, pg, ps, SwapTime::OneStep).absorption_stats().unwrap();
            assert!((o.mean - z.mean - 1.0 / ps).abs() < 1e-10);
        }
    }

    #[test]
    fn variance_matches_pmf() {
        let c = build(2, 0.4, 0.7, SwapTime::ZeroStep);
        let s = c.absorption_stats().unwrap();
        let d = c.waiting_pmf(3000);
        assert!((d.captured_mass - 1.0).abs() < 1e-12);
        assert!((d.mean() - s.mean).abs() < 1e-9);
        assert!((d.stddev().powi(2) - s.variance).abs() < 1e-7);
    }

    #[test]
    fn merging_preserves_statistics() {
        for n in 1..=3 {
            for mode in [SwapTime::ZeroStep, SwapTime::OneStep] {
                let p = ChainParams::new(n, 0.6, 0.8);
                let full = RepeaterMarkovChain::build(&p, BuildOptions { swap_time: mode, ..Default::default() })
                    .unwrap();
                let merged = RepeaterMarkovChain::build(
                    &p,
                    BuildOptions {
                        swap_time: mode,
                        merge_symmetric: true,
                        ..Default::default()
                    },
                )
                .unwrap();
                assert!(merged.len() < full.len());
                let (a, b) = (full.absorption_stats().unwrap(), merged.absorption_stats().unwrap());
                assert!((a.mean - b.mean).abs() < 1e-9 * a.mean);
                assert!((a.variance - b.variance).abs() < 1e-8 * a.variance.max(1.0));
                let (da, db) = (full.waiting_pmf(100), merged.waiting_pmf(100));
                for t in 0..=100 {
                    assert!((da.pmf[t] - db.pmf[t]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn failed_swap_keeps_unrelated_links() {
        // n = 2, leaves are nodes 4..=7. Links on segments 0, 1 and 2: the
        // swap of segments 0 and 1 fails with probability 1 - p_s and the
        // link on segment 2 survives it.
        let (pg, ps) = (0.5, 0.25);
        let b = Builder {
            n: 2,
            p_g: pg,
            p_s: ps,
            mode: SwapTime::ZeroStep,
            merge: false,
        };
        let state = (1u64 << 4) | (1 << 5) | (1 << 6);
        let out = b.step(state, 1);
        let kept = out.iter().find(|(s, _)| *s == 1 << 6).map(|x| x.1).unwrap();
        assert!((kept - (1.0 - ps) * (1.0 - pg)).abs() < 1e-15);
    }

    #[test]
    fn limits() {
        let p = ChainParams::new(3, 0.5, 0.5);
        let err = RepeaterMarkovChain::build(&p, BuildOptions { state_limit: 10, ..Default::default() }).unwrap_err();
        assert_eq!(err, ChainError::StateLimit { limit: 10 });
        assert!(RepeaterMarkovChain::build(&p.with_tau(Some(3)), BuildOptions::default()).is_err());
    }

    #[test]
    fn iterative_solver_agrees_with_dense() {
        let c = build(2, 0.3, 0.6, SwapTime::OneStep);
        let transient = c.transient();
        let mut pos = vec![usize::MAX; c.len()];
        for (k, &i) in transient.iter().enumerate() {
            pos[i] = k;
        }
        let q: Vec<Vec<(usize, f64)>> = transient
            .iter()
            .map(|&i| c.rows[i].iter().filter(|(j, _)| *j != c.absorbing).map(|&(j, p)| (pos[j], p)).collect())
            .collect();
        let b = vec![1.0; q.len()];
        let dense = solve_hitting(&q, &b).unwrap();
        let iter = gauss_seidel(&q, &b).unwrap();
        for (x, y) in dense.iter().zip(&iter) {
            assert!((x - y).abs() < 1e-9 * x);
        }
    }
}
