//! Flow and cut computations on undirected weighted graphs.
//!
//! Flows are computed as linear programs over per-direction edge flows.
//! The brute-force cut routines enumerate subsets and exist to check the flow
//! programs on small graphs.

use thiserror::Error;

use crate::lp::{self, LpError, LpStatus};
use crate::netmodel::WeightedUGraph;

/// Vertex limit for [`min_cut_bruteforce`].
pub const MAX_CUT_VERTICES: usize = 24;
/// Edge limit for [`min_multicut_bruteforce`].
pub const MAX_MULTICUT_EDGES: usize = 22;
/// Vertex limit for [`min_cut_ratio_bruteforce`].
pub const MAX_RATIO_VERTICES: usize = 20;
/// Edge limit for [`steiner_packing_bruteforce`].
pub const MAX_STEINER_EDGES: usize = 12;

/// Tolerance used when re-checking flow assignments.
pub const FLOW_CHECK_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(usize),
    #[error("source and target coincide at vertex {0}")]
    SameTerminals(usize),
    #[error("{what}: size {actual} exceeds limit {limit}")]
    SizeLimit {
        what: &'static str,
        limit: usize,
        actual: usize,
    },
    #[error("at least {0} terminals are required")]
    TooFewTerminals(usize),
    #[error("no vertex subset separates any commodity pair")]
    NoSeparatingCut,
    #[error("flow program is infeasible")]
    Infeasible,
    #[error("invalid multigraph: {0}")]
    Multigraph(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Commodity {
    pub source: usize,
    pub target: usize,
}

impl Commodity {
    pub fn new(source: usize, target: usize) -> Self {
        Self { source, target }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Maximize the sum of commodity flows.
    Total,
    /// Maximize the smallest commodity flow.
    Worst,
}

/// Per-commodity, per-edge flows in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowAssignment {
    /// Edge endpoints, aligned with the graph's edge list.
    pub edges: Vec<(usize, usize)>,
    /// `flows[i][j] = (f_uv, f_vu)` for commodity `i` on edge `j = {u,v}`.
    pub flows: Vec<Vec<(f64, f64)>>,
    /// Net flow out of each commodity's source.
    pub values: Vec<f64>,
}

impl FlowAssignment {
    fn net_out(&self, commodity: usize, vertex: usize) -> f64 {
        let mut net = 0.0;
        for (&(u, v), &(fuv, fvu)) in self.edges.iter().zip(&self.flows[commodity]) {
            if u == vertex {
                net += fuv - fvu;
            } else if v == vertex {
                net += fvu - fuv;
            }
        }
        net
    }

    /// Re-checks nonnegativity, capacity and conservation directly from the
    /// edge flows. With `shared` capacities the commodities compete for every
    /// edge; otherwise each commodity has the full capacity to itself.
    pub fn verify(
        &self,
        n_vertices: usize,
        capacities: &[f64],
        commodities: &[Commodity],
        shared: bool,
    ) -> Result<(), String> {
        let tol = FLOW_CHECK_TOL;
        for (i, per_edge) in self.flows.iter().enumerate() {
            for (j, &(a, b)) in per_edge.iter().enumerate() {
                if a < -tol || b < -tol {
                    return Err(format!("negative flow on edge {j} for commodity {i}"));
                }
            }
        }
        for (j, &cap) in capacities.iter().enumerate() {
            let limit = cap + tol * (1.0 + cap.abs());
            if shared {
                let used: f64 = self.flows.iter().map(|f| f[j].0 + f[j].1).sum();
                if used > limit {
                    return Err(format!("edge {j} carries {used} > capacity {cap}"));
                }
            } else {
                for (i, f) in self.flows.iter().enumerate() {
                    if f[j].0 + f[j].1 > limit {
                        return Err(format!("commodity {i} exceeds capacity {cap} on edge {j}"));
                    }
                }
            }
        }
        for (i, c) in commodities.iter().enumerate() {
            for w in 0..n_vertices {
                if w == c.source || w == c.target {
                    continue;
                }
                let net = self.net_out(i, w);
                if net.abs() > tol {
                    return Err(format!("commodity {i} not conserved at vertex {w}: {net}"));
                }
            }
            let out = self.net_out(i, c.source);
            if (out - self.values[i]).abs() > tol * (1.0 + out.abs()) {
                return Err(format!("commodity {i} reported value {} but carries {out}", self.values[i]));
            }
            let into = -self.net_out(i, c.target);
            if (out - into).abs() > tol * (1.0 + out.abs()) {
                return Err(format!("commodity {i} leaves {out} but arrives {into}"));
            }
        }
        Ok(())
    }
}

/// Where edge capacities come from in a flow program.
#[derive(Debug, Clone)]
pub(crate) enum CapacitySource {
    /// The graph's own weights.
    Weights,
    /// Capacity of edge `j` is `Σ coeff · q[k]` over `terms[j]`, with the usage
    /// frequencies `q` optimized jointly subject to `Σ q = 1`.
    Usage { terms: Vec<Vec<(usize, f64)>>, n_usage: usize },
}

/// A general multi-commodity flow program.
#[derive(Debug, Clone)]
pub(crate) struct FlowProgram<'g> {
    pub graph: &'g WeightedUGraph,
    pub commodities: Vec<Commodity>,
    pub objective: Objective,
    /// Whether commodities share edge capacity.
    pub shared: bool,
    pub capacity: CapacitySource,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowSolution {
    pub value: f64,
    pub assignment: FlowAssignment,
    pub usage: Vec<f64>,
    /// Effective capacity per edge (after usage optimization).
    pub capacities: Vec<f64>,
}

impl FlowProgram<'_> {
    pub fn solve(&self) -> Result<FlowSolution, FlowError> {
        let g = self.graph;
        let n = g.vertex_count();
        for c in &self.commodities {
            check_terminals(g, c.source, c.target)?;
        }
        if self.commodities.is_empty() {
            return Err(FlowError::TooFewTerminals(1));
        }
        let k = self.commodities.len();
        let m = g.edges.len();
        let flow_vars = 2 * k * m;
        let worst_var = matches!(self.objective, Objective::Worst).then_some(flow_vars);
        let usage_base = flow_vars + usize::from(worst_var.is_some());
        let n_usage = match &self.capacity {
            CapacitySource::Usage { n_usage, .. } => *n_usage,
            CapacitySource::Weights => 0,
        };
        let nvars = usage_base + n_usage;
        let fvar = |i: usize, j: usize, dir: usize| 2 * (i * m + j) + dir;

        let mut objective = vec![0.0; nvars];
        let mut a_ineq = Vec::new();
        let mut b_ineq = Vec::new();
        let mut a_eq = Vec::new();
        let mut b_eq = Vec::new();

        // Net flow out of the source of commodity i, as a coefficient row.
        let net_row = |i: usize| {
            let s = self.commodities[i].source;
            let mut row = vec![0.0; nvars];
            for (j, e) in g.edges.iter().enumerate() {
                if e.u == s {
                    row[fvar(i, j, 0)] += 1.0;
                    row[fvar(i, j, 1)] -= 1.0;
                } else if e.v == s {
                    row[fvar(i, j, 1)] += 1.0;
                    row[fvar(i, j, 0)] -= 1.0;
                }
            }
            row
        };

        // Capacity rows. Infinite capacities leave the edge unconstrained.
        let groups: Vec<Vec<usize>> = if self.shared {
            vec![(0..k).collect()]
        } else {
            (0..k).map(|i| vec![i]).collect()
        };
        for (j, e) in g.edges.iter().enumerate() {
            let (usage_terms, cap) = match &self.capacity {
                CapacitySource::Weights => (Vec::new(), e.weight),
                CapacitySource::Usage { terms, .. } => (terms[j].clone(), 0.0),
            };
            if cap.is_infinite() || usage_terms.iter().any(|(_, c)| c.is_infinite()) {
                continue;
            }
            for group in &groups {
                let mut row = vec![0.0; nvars];
                for &i in group {
                    row[fvar(i, j, 0)] = 1.0;
                    row[fvar(i, j, 1)] = 1.0;
                }
                for &(q, coeff) in &usage_terms {
                    row[usage_base + q] -= coeff;
                }
                a_ineq.push(row);
                b_ineq.push(cap);
            }
        }

        for (i, c) in self.commodities.iter().enumerate() {
            for w in 0..n {
                if w == c.source || w == c.target {
                    continue;
                }
                let mut row = vec![0.0; nvars];
                let mut touched = false;
                for (j, e) in g.edges.iter().enumerate() {
                    if e.u == w {
                        row[fvar(i, j, 0)] += 1.0;
                        row[fvar(i, j, 1)] -= 1.0;
                        touched = true;
                    } else if e.v == w {
                        row[fvar(i, j, 1)] += 1.0;
                        row[fvar(i, j, 0)] -= 1.0;
                        touched = true;
                    }
                }
                if touched {
                    a_eq.push(row);
                    b_eq.push(0.0);
                }
            }
        }

        match worst_var {
            Some(wv) => {
                objective[wv] = 1.0;
                for i in 0..k {
                    let mut row: Vec<f64> = net_row(i).into_iter().map(|v| -v).collect();
                    row[wv] = 1.0;
                    a_ineq.push(row);
                    b_ineq.push(0.0);
                }
            }
            None => {
                for i in 0..k {
                    for (o, r) in objective.iter_mut().zip(net_row(i)) {
                        *o += r;
                    }
                }
            }
        }

        if n_usage > 0 {
            let mut row = vec![0.0; nvars];
            for q in 0..n_usage {
                row[usage_base + q] = 1.0;
            }
            a_eq.push(row);
            b_eq.push(1.0);
        }

        let (std_lp, _) = lp::from_inequalities(&objective, &a_ineq, &b_ineq, &a_eq, &b_eq)?;
        let res = lp::solve(&std_lp)?;
        match res.status {
            LpStatus::Infeasible => return Err(FlowError::Infeasible),
            LpStatus::Unbounded => {
                return Ok(FlowSolution {
                    value: f64::INFINITY,
                    assignment: FlowAssignment {
                        edges: g.edges.iter().map(|e| (e.u, e.v)).collect(),
                        flows: vec![vec![(0.0, 0.0); m]; k],
                        values: vec![f64::INFINITY; k],
                    },
                    usage: vec![f64::NAN; n_usage],
                    capacities: vec![f64::INFINITY; m],
                })
            }
            LpStatus::Optimal => {}
        }
        let x = &res.solution;
        let flows: Vec<Vec<(f64, f64)>> = (0..k)
            .map(|i| (0..m).map(|j| (x[fvar(i, j, 0)], x[fvar(i, j, 1)])).collect())
            .collect();
        let values = (0..k)
            .map(|i| net_row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum())
            .collect();
        let usage: Vec<f64> = x[usage_base..usage_base + n_usage].to_vec();
        let capacities = match &self.capacity {
            CapacitySource::Weights => g.edges.iter().map(|e| e.weight).collect(),
            CapacitySource::Usage { terms, .. } => terms
                .iter()
                .map(|t| t.iter().map(|&(q, c)| if usage[q] == 0.0 { 0.0 } else { c * usage[q] }).sum())
                .collect(),
        };
        Ok(FlowSolution {
            value: res.value,
            assignment: FlowAssignment {
                edges: g.edges.iter().map(|e| (e.u, e.v)).collect(),
                flows,
                values,
            },
            usage,
            capacities,
        })
    }
}

fn check_vertex(g: &WeightedUGraph, v: usize) -> Result<(), FlowError> {
    if v >= g.vertex_count() {
        Err(FlowError::UnknownVertex(v))
    } else {
        Ok(())
    }
}

fn check_terminals(g: &WeightedUGraph, s: usize, t: usize) -> Result<(), FlowError> {
    check_vertex(g, s)?;
    check_vertex(g, t)?;
    if s == t {
        return Err(FlowError::SameTerminals(s));
    }
    Ok(())
}

/// Maximum `s → t` flow.
pub fn max_flow(g: &WeightedUGraph, s: usize, t: usize) -> Result<(f64, FlowAssignment), FlowError> {
    multicommodity_flow(g, &[Commodity::new(s, t)], Objective::Total)
}

/// Maximum total or worst-case concurrent flow over `commodities`, which
/// share edge capacity.
pub fn multicommodity_flow(
    g: &WeightedUGraph,
    commodities: &[Commodity],
    objective: Objective,
) -> Result<(f64, FlowAssignment), FlowError> {
    let sol = FlowProgram {
        graph: g,
        commodities: commodities.to_vec(),
        objective,
        shared: true,
        capacity: CapacitySource::Weights,
    }
    .solve()?;
    Ok((sol.value, sol.assignment))
}

/// A vertex subset `W` and the edges leaving it.
#[derive(Debug, Clone, PartialEq)]
pub struct CutResult {
    /// Sorted vertex indices of `W`.
    pub partition: Vec<usize>,
    /// Indices into the graph's edge list.
    pub cut_edges: Vec<usize>,
    pub weight: f64,
}

fn boundary(g: &WeightedUGraph, in_w: &[bool]) -> (Vec<usize>, f64) {
    let mut edges = Vec::new();
    let mut weight = 0.0;
    for (j, e) in g.edges.iter().enumerate() {
        if in_w[e.u] != in_w[e.v] {
            edges.push(j);
            weight += e.weight;
        }
    }
    (edges, weight)
}

fn better(weight: f64, set: &[usize], best: &Option<(f64, Vec<usize>)>) -> bool {
    match best {
        None => true,
        Some((bw, bset)) => {
            let scale = 1e-12 * (1.0 + bw.abs().min(1e300));
            if weight < bw - scale {
                true
            } else if (weight - bw).abs() <= scale || weight == *bw {
                set < bset.as_slice()
            } else {
                false
            }
        }
    }
}

/// Minimum-weight `st`-cut by enumerating every `W` with `s ∈ W`, `t ∉ W`.
/// Ties go to the lexicographically smallest sorted vertex list.
pub fn min_cut_bruteforce(g: &WeightedUGraph, s: usize, t: usize) -> Result<CutResult, FlowError> {
    check_terminals(g, s, t)?;
    let n = g.vertex_count();
    if n > MAX_CUT_VERTICES {
        return Err(FlowError::SizeLimit {
            what: "min-cut enumeration vertices",
            limit: MAX_CUT_VERTICES,
            actual: n,
        });
    }
    let others: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut in_w = vec![false; n];
    for mask in 0u64..(1u64 << others.len()) {
        in_w.iter_mut().for_each(|b| *b = false);
        in_w[s] = true;
        for (bit, &v) in others.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                in_w[v] = true;
            }
        }
        let (_, weight) = boundary(g, &in_w);
        let set: Vec<usize> = (0..n).filter(|&v| in_w[v]).collect();
        if better(weight, &set, &best) {
            best = Some((weight, set));
        }
    }
    let (weight, partition) = best.expect("at least one cut exists");
    let mut in_w = vec![false; n];
    partition.iter().for_each(|&v| in_w[v] = true);
    let (cut_edges, _) = boundary(g, &in_w);
    Ok(CutResult {
        partition,
        cut_edges,
        weight,
    })
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Minimum-weight edge set whose removal disconnects every commodity pair.
/// Returns the weight and the sorted edge indices.
pub fn min_multicut_bruteforce(
    g: &WeightedUGraph,
    commodities: &[Commodity],
) -> Result<(f64, Vec<usize>), FlowError> {
    for c in commodities {
        check_terminals(g, c.source, c.target)?;
    }
    let m = g.edges.len();
    if m > MAX_MULTICUT_EDGES {
        return Err(FlowError::SizeLimit {
            what: "multicut enumeration edges",
            limit: MAX_MULTICUT_EDGES,
            actual: m,
        });
    }
    let n = g.vertex_count();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for removed in 0u64..(1u64 << m) {
        let mut uf = UnionFind::new(n);
        for (j, e) in g.edges.iter().enumerate() {
            if removed >> j & 1 == 0 {
                uf.union(e.u, e.v);
            }
        }
        if commodities.iter().any(|c| uf.find(c.source) == uf.find(c.target)) {
            continue;
        }
        let set: Vec<usize> = (0..m).filter(|&j| removed >> j & 1 == 1).collect();
        let weight = set.iter().map(|&j| g.edges[j].weight).sum();
        if better(weight, &set, &best) {
            best = Some((weight, set));
        }
    }
    Ok(best.expect("removing every edge is a multicut"))
}

/// Minimum over vertex subsets `W` of cut weight divided by the number of
/// commodity pairs the cut separates.
pub fn min_cut_ratio_bruteforce(
    g: &WeightedUGraph,
    commodities: &[Commodity],
) -> Result<(f64, Vec<usize>), FlowError> {
    for c in commodities {
        check_terminals(g, c.source, c.target)?;
    }
    let n = g.vertex_count();
    if n > MAX_RATIO_VERTICES {
        return Err(FlowError::SizeLimit {
            what: "cut-ratio enumeration vertices",
            limit: MAX_RATIO_VERTICES,
            actual: n,
        });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut in_w = vec![false; n];
    for mask in 1u64..(1u64 << n) - 1 {
        for (v, b) in in_w.iter_mut().enumerate() {
            *b = mask >> v & 1 == 1;
        }
        let separated = commodities
            .iter()
            .filter(|c| in_w[c.source] != in_w[c.target])
            .count();
        if separated == 0 {
            continue;
        }
        let (_, weight) = boundary(g, &in_w);
        let ratio = weight / separated as f64;
        let set: Vec<usize> = (0..n).filter(|&v| in_w[v]).collect();
        if better(ratio, &set, &best) {
            best = Some((ratio, set));
        }
    }
    best.ok_or(FlowError::NoSeparatingCut)
}

/// Minimum pairwise max-flow over the vertices of `terminals`.
pub fn s_connectivity(g: &WeightedUGraph, terminals: &[usize]) -> Result<f64, FlowError> {
    if terminals.len() < 2 {
        return Err(FlowError::TooFewTerminals(2));
    }
    let mut best = f64::INFINITY;
    for (a, &s) in terminals.iter().enumerate() {
        for &t in &terminals[a + 1..] {
            let (f, _) = max_flow(g, s, t)?;
            best = best.min(f);
        }
    }
    Ok(best)
}

/// Unit-capacity multigraph: every listed edge is one parallel copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitMultigraph {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl UnitMultigraph {
    /// Expands integer weights into parallel unit edges.
    pub fn from_integer_weights(g: &WeightedUGraph) -> Result<Self, FlowError> {
        let mut edges = Vec::new();
        for e in &g.edges {
            if e.weight.fract() != 0.0 || !e.weight.is_finite() {
                return Err(FlowError::Multigraph(format!("non-integer weight {}", e.weight)));
            }
            for _ in 0..e.weight as usize {
                edges.push((e.u, e.v));
            }
        }
        Ok(Self {
            n_vertices: g.vertex_count(),
            edges,
        })
    }

    /// Collapses parallel edges into integer weights.
    pub fn to_weighted(&self) -> Result<WeightedUGraph, FlowError> {
        let triples: Vec<(usize, usize, f64)> = self.edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        WeightedUGraph::from_indexed(self.n_vertices, &triples)
            .map_err(|e| FlowError::Multigraph(e.to_string()))
    }
}

fn connects(mg: &UnitMultigraph, mask: u32, terminals: &[usize]) -> bool {
    let mut uf = UnionFind::new(mg.n_vertices);
    for (j, &(u, v)) in mg.edges.iter().enumerate() {
        if mask >> j & 1 == 1 {
            uf.union(u, v);
        }
    }
    let root = uf.find(terminals[0]);
    terminals.iter().all(|&t| uf.find(t) == root)
}

/// Maximum number of edge-disjoint trees spanning `terminals`, by exhaustive
/// search over edge subsets.
pub fn steiner_packing_bruteforce(mg: &UnitMultigraph, terminals: &[usize]) -> Result<usize, FlowError> {
    if terminals.len() < 2 {
        return Err(FlowError::TooFewTerminals(2));
    }
    if let Some(&v) = terminals.iter().find(|&&v| v >= mg.n_vertices) {
        return Err(FlowError::UnknownVertex(v));
    }
    let m = mg.edges.len();
    if m > MAX_STEINER_EDGES {
        return Err(FlowError::SizeLimit {
            what: "Steiner packing edges",
            limit: MAX_STEINER_EDGES,
            actual: m,
        });
    }
    if let Some(&(u, v)) = mg.edges.iter().find(|&&(u, v)| u >= mg.n_vertices || v >= mg.n_vertices || u == v) {
        return Err(FlowError::Multigraph(format!("bad edge ({u},{v})")));
    }
    // Minimal terminal-connecting edge sets; every S-tree packing can be
    // shrunk to a packing of these.
    let mut minimal: Vec<u32> = Vec::new();
    for mask in 1u32..(1u32 << m) {
        if !connects(mg, mask, terminals) {
            continue;
        }
        let is_minimal = (0..m)
            .filter(|&j| mask >> j & 1 == 1)
            .all(|j| !connects(mg, mask & !(1 << j), terminals));
        if is_minimal {
            minimal.push(mask);
        }
    }
    fn pack(sets: &[u32], used: u32, start: usize) -> usize {
        let mut best = 0;
        for i in start..sets.len() {
            if sets[i] & used == 0 {
                best = best.max(1 + pack(sets, used | sets[i], i + 1));
            }
        }
        best
    }
    Ok(pack(&minimal, 0, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, edges: &[(usize, usize, f64)]) -> WeightedUGraph {
        WeightedUGraph::from_indexed(n, edges).unwrap()
    }

    #[test]
    fn path_bottleneck() {
        let p = g(3, &[(0, 1, 2.0), (1, 2, 3.0)]);
        let (f, a) = max_flow(&p, 0, 2).unwrap();
        assert!((f - 2.0).abs() < 1e-9);
        a.verify(3, &[2.0, 3.0], &[Commodity::new(0, 2)], true).unwrap();
        let cut = min_cut_bruteforce(&p, 0, 2).unwrap();
        assert_eq!(cut.weight, 2.0);
        assert_eq!(cut.partition, vec![0]);
        assert_eq!(cut.cut_edges, vec![0]);
    }

    #[test]
    fn disjoint_paths_and_isolated_source() {
        let two = g(4, &[(0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)]);
        assert!((max_flow(&two, 0, 3).unwrap().0 - 2.0).abs() < 1e-9);
        let iso = g(3, &[(1, 2, 5.0)]);
        assert_eq!(max_flow(&iso, 0, 2).unwrap().0, 0.0);
        let cut = min_cut_bruteforce(&iso, 0, 2).unwrap();
        assert_eq!(cut.weight, 0.0);
        assert!(cut.cut_edges.is_empty());
    }

    #[test]
    fn triangle_cut() {
        let k3 = g(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        for (s, t) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(min_cut_bruteforce(&k3, s, t).unwrap().weight, 2.0);
        }
    }

    #[test]
    fn terminal_errors() {
        let p = g(2, &[(0, 1, 1.0)]);
        assert_eq!(max_flow(&p, 0, 0).unwrap_err(), FlowError::SameTerminals(0));
        assert_eq!(max_flow(&p, 0, 7).unwrap_err(), FlowError::UnknownVertex(7));
        let big = WeightedUGraph::from_indexed(25, &[]).unwrap();
        assert!(matches!(min_cut_bruteforce(&big, 0, 1), Err(FlowError::SizeLimit { .. })));
    }

    #[test]
    fn infinite_edge_is_unbounded() {
        let p = g(2, &[(0, 1, f64::INFINITY)]);
        assert_eq!(max_flow(&p, 0, 1).unwrap().0, f64::INFINITY);
        let q = g(3, &[(0, 1, f64::INFINITY), (1, 2, 2.0)]);
        assert!((max_flow(&q, 0, 2).unwrap().0 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn multicommodity_examples() {
        let p = g(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let disjoint = [Commodity::new(0, 1), Commodity::new(1, 2)];
        let (total, a) = multicommodity_flow(&p, &disjoint, Objective::Total).unwrap();
        assert!((total - 2.0).abs() < 1e-9);
        a.verify(3, &[1.0, 1.0], &disjoint, true).unwrap();

        let sharing = [Commodity::new(0, 2), Commodity::new(0, 1)];
        let (worst, a) = multicommodity_flow(&p, &sharing, Objective::Worst).unwrap();
        assert!((worst - 0.5).abs() < 1e-9);
        a.verify(3, &[1.0, 1.0], &sharing, true).unwrap();

        let single = [Commodity::new(0, 2)];
        let (one, _) = multicommodity_flow(&p, &single, Objective::Worst).unwrap();
        assert_eq!(one, max_flow(&p, 0, 2).unwrap().0);
    }

    #[test]
    fn multicut_examples() {
        let p = g(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let (w, set) = min_multicut_bruteforce(&p, &[Commodity::new(0, 1), Commodity::new(1, 2)]).unwrap();
        assert_eq!((w, set), (2.0, vec![0, 1]));
        let (w, _) = min_multicut_bruteforce(&p, &[Commodity::new(0, 2)]).unwrap();
        assert_eq!(w, min_cut_bruteforce(&p, 0, 2).unwrap().weight);
        let split = g(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let (w, set) = min_multicut_bruteforce(&split, &[Commodity::new(0, 2)]).unwrap();
        assert_eq!(w, 0.0);
        assert!(set.is_empty());
    }

    #[test]
    fn cut_ratio_examples() {
        let p = g(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(min_cut_ratio_bruteforce(&p, &[Commodity::new(0, 2)]).unwrap().0, 1.0);
        // Star: X=0, A=1, B=2.
        let star = g(3, &[(0, 1, 1.0), (0, 2, 1.0)]);
        let (r, _) = min_cut_ratio_bruteforce(&star, &[Commodity::new(1, 0), Commodity::new(2, 0)]).unwrap();
        assert_eq!(r, 1.0);
        let split = g(2, &[]);
        assert_eq!(min_cut_ratio_bruteforce(&split, &[Commodity::new(0, 1)]).unwrap().0, 0.0);
        assert_eq!(min_cut_ratio_bruteforce(&split, &[]).unwrap_err(), FlowError::NoSeparatingCut);
    }

    #[test]
    fn s_connectivity_examples() {
        let k3 = g(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        assert!((s_connectivity(&k3, &[0, 1, 2]).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(s_connectivity(&k3, &[0, 1]).unwrap(), max_flow(&k3, 0, 1).unwrap().0);
        let star = g(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]);
        assert!((s_connectivity(&star, &[1, 2, 3]).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(s_connectivity(&star, &[1]).unwrap_err(), FlowError::TooFewTerminals(2));
    }

    #[test]
    fn steiner_examples() {
        let parallel = UnitMultigraph { n_vertices: 2, edges: vec![(0, 1), (0, 1)] };
        assert_eq!(steiner_packing_bruteforce(&parallel, &[0, 1]).unwrap(), 2);
        let tri = UnitMultigraph { n_vertices: 3, edges: vec![(0, 1), (1, 2), (0, 2)] };
        assert_eq!(steiner_packing_bruteforce(&tri, &[0, 1, 2]).unwrap(), 1);
        let path = UnitMultigraph { n_vertices: 3, edges: vec![(0, 1), (1, 2)] };
        assert_eq!(steiner_packing_bruteforce(&path, &[0, 2]).unwrap(), 1);
        let big = UnitMultigraph { n_vertices: 2, edges: vec![(0, 1); 13] };
        assert!(matches!(steiner_packing_bruteforce(&big, &[0, 1]), Err(FlowError::SizeLimit { .. })));
    }
}
