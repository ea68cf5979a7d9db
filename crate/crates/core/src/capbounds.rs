//! Lower and upper bounds on network capacities for bipartite, multi-pair
//! and multipartite entanglement distribution.
//!
//! Lower bounds are flows weighted by achievable channel capacities, upper
//! bounds are flows weighted by channel entanglement values. Usage
//! frequencies are either taken from the network, set to one, or optimized
//! jointly with the flow in a single linear program.

use serde::Serialize;
use thiserror::Error;

use crate::flows::{CapacitySource, Commodity, FlowError, FlowProgram, Objective};
use crate::netmodel::{self, Measure, NetError, NetworkSpec, WeightedUGraph};

#[derive(Debug, Error)]
pub enum BoundError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("invalid request: {0}")]
    Invalid(String),
}

/// How channel usage frequencies are accounted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unit {
    /// Optimize `q` with `Σ q = 1`; rates are per channel use.
    PerChannelUse,
    /// Every channel used once per network use (`q = 1`).
    PerNetworkUse,
    /// Use the network's `q` values unchanged.
    FixedQ,
}

/// Constant relating Steiner-tree packing to terminal connectivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TreePacking {
    /// Factor 1/2 (Kriesell's conjectured constant).
    #[default]
    Kriesell,
    /// Factor 1/26 (Lau).
    Lau,
    /// Factor |V∖A|/2 (Petingi et al.), capped at 1.
    Petingi,
}

impl TreePacking {
    pub fn factor(self, n_vertices: usize, n_users: usize) -> f64 {
        match self {
            TreePacking::Kriesell => 0.5,
            TreePacking::Lau => 1.0 / 26.0,
            // Trees never outnumber edge-disjoint paths, so a factor above one
            // carries no information.
            TreePacking::Petingi => (n_vertices.saturating_sub(n_users) as f64 / 2.0).min(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    /// Numeric stand-in for the `O(log k)` flow-cut gap on multi-pair upper
    /// bounds.
    pub slack_factor: f64,
    pub tree_packing: TreePacking,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            slack_factor: 1.0,
            tree_packing: TreePacking::Kriesell,
        }
    }
}

/// Optimized usage frequencies, one entry per directed channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UsageFrequencies {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub task: String,
    #[serde(serialize_with = "crate::export::ser_rate")]
    pub lower: f64,
    #[serde(serialize_with = "crate::export::ser_rate")]
    pub upper: f64,
    /// `upper` multiplied by the configured slack factor.
    #[serde(serialize_with = "crate::export::ser_rate")]
    pub upper_with_slack: f64,
    pub unit: Unit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_opt: Option<UsageFrequencies>,
    pub slack_note: String,
}

struct Prepared {
    graph: WeightedUGraph,
    capacity: CapacitySource,
}

fn prepare(net: &NetworkSpec, measure: Measure, unit: Unit) -> Result<Prepared, BoundError> {
    net.validate()?;
    match unit {
        Unit::FixedQ => Ok(Prepared {
            graph: netmodel::undirect(net, measure)?,
            capacity: CapacitySource::Weights,
        }),
        Unit::PerNetworkUse => {
            let mut unit_net = net.clone();
            unit_net.edges.iter_mut().for_each(|e| e.q = 1.0);
            Ok(Prepared {
                graph: netmodel::undirect(&unit_net, measure)?,
                capacity: CapacitySource::Weights,
            })
        }
        Unit::PerChannelUse => {
            let graph = netmodel::undirect(net, measure)?;
            let mut terms = vec![Vec::new(); graph.edges.len()];
            for (k, (u, v, val)) in netmodel::channel_terms(net, measure)?.into_iter().enumerate() {
                let (a, b) = (u.min(v), u.max(v));
                let j = graph
                    .edges
                    .iter()
                    .position(|e| e.u == a && e.v == b)
                    .expect("every channel has an undirected edge");
                terms[j].push((k, val));
            }
            Ok(Prepared {
                graph,
                capacity: CapacitySource::Usage {
                    terms,
                    n_usage: net.edges.len(),
                },
            })
        }
    }
}

struct Side {
    value: f64,
    usage: Vec<f64>,
}

fn solve_side(
    net: &NetworkSpec,
    measure: Measure,
    unit: Unit,
    commodities: &[Commodity],
    objective: Objective,
    shared: bool,
) -> Result<Side, BoundError> {
    if unit == Unit::PerChannelUse && net.edges.is_empty() {
        return Ok(Side {
            value: 0.0,
            usage: Vec::new(),
        });
    }
    let prep = prepare(net, measure, unit)?;
    let shared_caps = shared;
    let sol = FlowProgram {
        graph: &prep.graph,
        commodities: commodities.to_vec(),
        objective,
        shared: shared_caps,
        capacity: prep.capacity,
    }
    .solve()?;
    if sol.value.is_finite() {
        sol.assignment
            .verify(prep.graph.vertex_count(), &sol.capacities, commodities, shared_caps)
            .map_err(|e| BoundError::Invalid(format!("flow re-check failed: {e}")))?;
    }
    Ok(Side {
        value: sol.value.max(0.0),
        usage: sol.usage,
    })
}

fn commodity(net: &NetworkSpec, a: &str, b: &str) -> Result<Commodity, BoundError> {
    let s = net.node_index(a)?;
    let t = net.node_index(b)?;
    if s == t {
        return Err(BoundError::Invalid(format!("endpoints coincide: {a}")));
    }
    Ok(Commodity::new(s, t))
}

fn report(
    task: String,
    lower: Side,
    upper: Side,
    unit: Unit,
    slack_factor: f64,
    slack_note: String,
    lower_factor: f64,
) -> BoundReport {
    let q_opt = (unit == Unit::PerChannelUse).then(|| UsageFrequencies {
        lower: lower.usage,
        upper: upper.usage,
    });
    BoundReport {
        task,
        lower: lower.value * lower_factor,
        upper: upper.value,
        upper_with_slack: upper.value * slack_factor,
        unit,
        q_opt,
        slack_note,
    }
}

/// Bounds on the rate of Bell pairs (or private bits) between `a` and `b`.
pub fn bipartite_bounds(net: &NetworkSpec, a: &str, b: &str, unit: Unit) -> Result<BoundReport, BoundError> {
    let c = [commodity(net, a, b)?];
    let lower = solve_side(net, Measure::LowerCapacity, unit, &c, Objective::Total, true)?;
    let upper = solve_side(net, Measure::UpperEntanglement, unit, &c, Objective::Total, true)?;
    Ok(report(
        format!("bipartite {a}-{b}"),
        lower,
        upper,
        unit,
        1.0,
        "exact cut bound (max-flow min-cut)".into(),
        1.0,
    ))
}

/// Bounds on concurrent multi-pair distribution. The upper bound is the
/// entanglement-weighted flow; the true cut bound lies within an `O(log k)`
/// factor of it, which `options.slack_factor` can stand in for. Pairs may
/// share endpoints.
pub fn multipair_bounds(
    net: &NetworkSpec,
    pairs: &[(String, String)],
    objective: Objective,
    unit: Unit,
    options: BoundOptions,
) -> Result<BoundReport, BoundError> {
    if pairs.is_empty() {
        return Err(BoundError::Invalid("at least one pair is required".into()));
    }
    let commodities = pairs
        .iter()
        .map(|(a, b)| commodity(net, a, b))
        .collect::<Result<Vec<_>, _>>()?;
    let lower = solve_side(net, Measure::LowerCapacity, unit, &commodities, objective, true)?;
    let upper = solve_side(net, Measure::UpperEntanglement, unit, &commodities, objective, true)?;
    let k = pairs.len();
    let (name, gap) = match objective {
        Objective::Total => ("total", "g1"),
        Objective::Worst => ("worst", "g2"),
    };
    let note = if k == 1 {
        "single pair: exact cut bound (max-flow min-cut)".to_string()
    } else {
        format!(
            "upper bound valid up to factor {gap}(k) = O(log k) with k = {k}; slack factor applied: {}",
            options.slack_factor
        )
    };
    Ok(report(
        format!("multipair-{name} k={k}"),
        lower,
        upper,
        unit,
        if k == 1 { 1.0 } else { options.slack_factor },
        note,
        1.0,
    ))
}

/// Bounds on GHZ-type distribution among `users`: the largest achievable
/// minimum pairwise flow, with every pair routed independently. The lower
/// bound is scaled by the tree-packing constant.
pub fn multipartite_bounds(
    net: &NetworkSpec,
    users: &[String],
    unit: Unit,
    options: BoundOptions,
) -> Result<BoundReport, BoundError> {
    if users.len() < 2 {
        return Err(BoundError::Invalid("at least two users are required".into()));
    }
    let idx = users
        .iter()
        .map(|u| net.node_index(u))
        .collect::<Result<Vec<_>, _>>()?;
    let mut distinct = idx.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != idx.len() {
        return Err(BoundError::Invalid("duplicate user".into()));
    }
    let mut pairs = Vec::new();
    for (a, &s) in idx.iter().enumerate() {
        for &t in &idx[a + 1..] {
            pairs.push(Commodity::new(s, t));
        }
    }
    let lower = solve_side(net, Measure::LowerCapacity, unit, &pairs, Objective::Worst, false)?;
    let upper = solve_side(net, Measure::UpperEntanglement, unit, &pairs, Objective::Worst, false)?;
    let factor = options.tree_packing.factor(net.nodes.len(), users.len());
    Ok(report(
        format!("multipartite |A|={}", users.len()),
        lower,
        upper,
        unit,
        1.0,
        format!("lower bound scaled by tree-packing factor g3 = {factor} ({:?}), g4 = 0", options.tree_packing),
        factor,
    ))
}
