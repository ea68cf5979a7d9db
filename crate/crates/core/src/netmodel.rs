//! Quantum networks as directed multigraphs of channels with scalar
//! entanglement/capacity values, and their undirected weighted reductions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

/// Which per-channel scalar feeds the flow programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// An entanglement measure upper-bounding the channel's two-way capacity.
    UpperEntanglement,
    /// An achievable (lower-bound) two-way quantum capacity.
    LowerCapacity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelModel {
    /// Pure-loss bosonic channel with transmittance `eta`.
    Lossy { eta: f64 },
    /// Channel described only by its bound values, in ebits per use.
    Explicit {
        #[serde(rename = "E")]
        e_upper: f64,
        #[serde(rename = "Q")]
        q_lower: f64,
    },
}

impl ChannelModel {
    pub fn validate(&self) -> Result<(), NetError> {
        match *self {
            ChannelModel::Lossy { eta } => {
                if !(0.0..=1.0).contains(&eta) {
                    return Err(NetError::Validation(format!("eta out of range: {eta}")));
                }
            }
            ChannelModel::Explicit { e_upper, q_lower } => {
                if !(e_upper >= 0.0) || !(q_lower >= 0.0) {
                    return Err(NetError::Validation(format!(
                        "negative channel value: E={e_upper}, Q={q_lower}"
                    )));
                }
                if q_lower > e_upper {
                    return Err(NetError::Validation(format!(
                        "lower capacity Q={q_lower} exceeds upper bound E={e_upper}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Repeater-less capacity `−log₂(1−η)` of a pure-loss channel.
///
/// Returns `f64::INFINITY` at `η = 1`.
pub fn plob(eta: f64) -> Result<f64, NetError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(NetError::Domain(format!("eta out of range: {eta}")));
    }
    if eta == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-(-eta).ln_1p() / std::f64::consts::LN_2)
}

/// Per-use value of `ch` under `measure`. For pure-loss channels both measures
/// coincide.
pub fn channel_value(ch: &ChannelModel, measure: Measure) -> Result<f64, NetError> {
    match *ch {
        ChannelModel::Lossy { eta } => plob(eta),
        ChannelModel::Explicit { e_upper, q_lower } => {
            ch.validate()?;
            Ok(match measure {
                Measure::UpperEntanglement => e_upper,
                Measure::LowerCapacity => q_lower,
            })
        }
    }
}

/// Squashed-entanglement bound `log₂((1+η)/(1−η))` for a pure-loss channel.
///
/// At `η = 1` the bound diverges; `allow_infinite` selects between the
/// infinity sentinel and a domain error.
pub fn esq_lossy_bound(eta: f64, allow_infinite: bool) -> Result<f64, NetError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(NetError::Domain(format!("eta out of range: {eta}")));
    }
    if eta == 1.0 {
        return if allow_infinite {
            Ok(f64::INFINITY)
        } else {
            Err(NetError::Domain("squashed-entanglement bound diverges at eta = 1".into()))
        };
    }
    Ok(((1.0 + eta) / (1.0 - eta)).log2())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channel {
    pub from: String,
    pub to: String,
    pub channel: ChannelModel,
    #[serde(default = "default_usage")]
    pub q: f64,
}

fn default_usage() -> f64 {
    1.0
}

/// A network: nodes, directed channels, commodity pairs and an optional user
/// group for multipartite tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<Channel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub commodities: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub users: Option<Vec<String>>,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<(), NetError> {
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(n.as_str()) {
                return Err(NetError::Validation(format!("duplicate node `{n}`")));
            }
        }
        let known = |n: &str, what: &str| {
            if seen.contains(n) {
                Ok(())
            } else {
                Err(NetError::Validation(format!("{what} `{n}` is not a declared node")))
            }
        };
        for (i, e) in self.edges.iter().enumerate() {
            known(&e.from, "edge endpoint")?;
            known(&e.to, "edge endpoint")?;
            if e.from == e.to {
                return Err(NetError::Validation(format!("edge {i} is a self-loop on `{}`", e.from)));
            }
            if !(e.q >= 0.0) || !e.q.is_finite() {
                return Err(NetError::Validation(format!("edge {i} has invalid usage q={}", e.q)));
            }
            e.channel
                .validate()
                .map_err(|err| NetError::Validation(format!("edge {i}: {err}")))?;
        }
        for (a, b) in &self.commodities {
            known(a, "commodity endpoint")?;
            known(b, "commodity endpoint")?;
            if a == b {
                return Err(NetError::Validation(format!("commodity ({a},{b}) has equal endpoints")));
            }
        }
        if let Some(users) = &self.users {
            for u in users {
                known(u, "user")?;
            }
        }
        Ok(())
    }

    pub fn node_index(&self, name: &str) -> Result<usize, NetError> {
        self.nodes
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| NetError::UnknownNode(name.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }
}

/// Parses and validates a network document.
pub fn parse_network(text: &str) -> Result<NetworkSpec, NetError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let net: NetworkSpec = serde_path_to_error::deserialize(de).map_err(|err| {
        let inner = err.inner();
        NetError::Parse {
            path: format!("line {} column {} ({})", inner.line(), inner.column(), err.path()),
            message: inner.to_string(),
        }
    })?;
    net.validate()?;
    Ok(net)
}

/// An undirected edge `{u, v}` with `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct UEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Undirected graph with at most one edge per vertex pair and nonnegative
/// weights (`f64::INFINITY` marks an uncapacitated edge).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedUGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<UEdge>,
}

impl WeightedUGraph {
    /// Builds a graph from `(u, v, weight)` triples, merging repeated pairs by
    /// summing their weights.
    pub fn new(vertices: Vec<String>, edges: &[(usize, usize, f64)]) -> Result<Self, NetError> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(a, b, w) in edges {
            if a >= vertices.len() || b >= vertices.len() {
                return Err(NetError::Validation(format!("edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(NetError::Validation(format!("self-loop on vertex {a}")));
            }
            if !(w >= 0.0) {
                return Err(NetError::Validation(format!("negative weight {w}")));
            }
            *merged.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
        }
        Ok(Self {
            vertices,
            edges: merged
                .into_iter()
                .map(|((u, v), weight)| UEdge { u, v, weight })
                .collect(),
        })
    }

    /// Graph on vertices named `v0, v1, …`.
    pub fn from_indexed(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, NetError> {
        Self::new((0..n).map(|i| format!("v{i}")).collect(), edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, NetError> {
        self.vertices
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| NetError::UnknownNode(name.to_string()))
    }

    pub fn weight_between(&self, a: usize, b: usize) -> Option<f64> {
        let (u, v) = (a.min(b), a.max(b));
        self.edges.iter().find(|e| e.u == u && e.v == v).map(|e| e.weight)
    }
}

/// Edge weight per directed channel, `q · value`, before merging.
pub(crate) fn channel_terms(net: &NetworkSpec, measure: Measure) -> Result<Vec<(usize, usize, f64)>, NetError> {
    net.edges
        .iter()
        .map(|e| {
            let u = net.node_index(&e.from)?;
            let v = net.node_index(&e.to)?;
            Ok((u, v, channel_value(&e.channel, measure)?))
        })
        .collect()
}

/// Reduces `net` to an undirected graph weighted by `q · value` summed over
/// both directions of every node pair.
pub fn undirect(net: &NetworkSpec, measure: Measure) -> Result<WeightedUGraph, NetError> {
    net.validate()?;
    let terms: Vec<(usize, usize, f64)> = channel_terms(net, measure)?
        .into_iter()
        .zip(&net.edges)
        .map(|((u, v, val), e)| {
            // 0 · ∞ is an unused channel, not an infinite one.
            let w = if e.q == 0.0 { 0.0 } else { e.q * val };
            (u, v, w)
        })
        .collect();
    WeightedUGraph::new(net.nodes.clone(), &terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit(e: f64, q: f64) -> ChannelModel {
        ChannelModel::Explicit { e_upper: e, q_lower: q }
    }

    #[test]
    fn lossy_values() {
        let half = ChannelModel::Lossy { eta: 0.5 };
        assert!((channel_value(&half, Measure::UpperEntanglement).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(channel_value(&ChannelModel::Lossy { eta: 0.0 }, Measure::LowerCapacity).unwrap(), 0.0);
        assert_eq!(
            channel_value(&ChannelModel::Lossy { eta: 1.0 }, Measure::LowerCapacity).unwrap(),
            f64::INFINITY
        );
        assert!(channel_value(&ChannelModel::Lossy { eta: 1.2 }, Measure::LowerCapacity).is_err());
        assert_eq!(channel_value(&explicit(2.5, 1.0), Measure::LowerCapacity).unwrap(), 1.0);
        assert_eq!(channel_value(&explicit(2.5, 1.0), Measure::UpperEntanglement).unwrap(), 2.5);
    }

    #[test]
    fn squashed_bound() {
        assert_eq!(esq_lossy_bound(0.0, false).unwrap(), 0.0);
        assert!((esq_lossy_bound(0.5, false).unwrap() - 3f64.log2()).abs() < 1e-15);
        assert!((esq_lossy_bound(0.6, false).unwrap() - 2.0).abs() < 1e-14);
        assert!(esq_lossy_bound(1.0, false).is_err());
        assert_eq!(esq_lossy_bound(1.0, true).unwrap(), f64::INFINITY);
    }

    fn net(nodes: &[&str], edges: Vec<(&str, &str, ChannelModel, f64)>) -> NetworkSpec {
        NetworkSpec {
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            edges: edges
                .into_iter()
                .map(|(f, t, c, q)| Channel { from: f.into(), to: t.into(), channel: c, q })
                .collect(),
            commodities: vec![],
            users: None,
        }
    }

    #[test]
    fn undirect_single_direction() {
        let n = net(&["A", "B"], vec![("A", "B", ChannelModel::Lossy { eta: 0.5 }, 1.0)]);
        let g = undirect(&n, Measure::UpperEntanglement).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert!((g.edges[0].weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn undirect_merges_antiparallel() {
        let n = net(
            &["A", "B", "C", "D"],
            vec![("A", "B", explicit(2.0, 1.0), 0.5), ("B", "A", explicit(4.0, 3.0), 0.5)],
        );
        let g = undirect(&n, Measure::UpperEntanglement).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].weight, 3.0);
        assert_eq!(g.weight_between(2, 3), None);
        let lower = undirect(&n, Measure::LowerCapacity).unwrap();
        assert_eq!(lower.edges[0].weight, 2.0);
    }

    #[test]
    fn parse_minimal_and_errors() {
        let ok = r#"{"nodes":["A","B"],"edges":[{"from":"A","to":"B","channel":{"type":"lossy","eta":0.5}}]}"#;
        let n = parse_network(ok).unwrap();
        assert_eq!((n.nodes.len(), n.edges.len()), (2, 1));
        assert_eq!(n.edges[0].q, 1.0);

        let bad_eta = r#"{"nodes":["A","B"],"edges":[{"from":"A","to":"B","channel":{"type":"lossy","eta":1.3}}]}"#;
        let err = parse_network(bad_eta).unwrap_err().to_string();
        assert!(err.contains("eta out of range"), "{err}");

        let bad_commodity = r#"{"nodes":["A","B"],"edges":[],"commodities":[["A","Z"]]}"#;
        assert!(matches!(parse_network(bad_commodity), Err(NetError::Validation(_))));

        let unknown = r#"{"nodes":["A"],"edges":[],"extra":1}"#;
        assert!(matches!(parse_network(unknown), Err(NetError::Parse { .. })));

        let unknown_nested = r#"{"nodes":["A","B"],"edges":[{"from":"A","to":"B","channel":{"type":"lossy","eta":0.5,"x":2}}]}"#;
        assert!(matches!(parse_network(unknown_nested), Err(NetError::Parse { .. })));

        let inverted = r#"{"nodes":["A","B"],"edges":[{"from":"A","to":"B","channel":{"type":"explicit","E":1,"Q":2}}]}"#;
        assert!(matches!(parse_network(inverted), Err(NetError::Validation(_))));
    }

    #[test]
    fn parse_error_reports_path() {
        let text = "{\"nodes\":[\"A\",\"B\"],\n\"edges\":[{\"from\":\"A\",\"to\":\"B\",\"channel\":{\"type\":\"lossy\",\"eta\":\"x\"}}]}";
        match parse_network(text) {
            Err(NetError::Parse { path, .. }) => {
                assert!(path.contains("line 2"), "{path}");
                assert!(path.contains("edges[0].channel"), "{path}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn channel() -> impl Strategy<Value = ChannelModel> {
            prop_oneof![
                (0.0..1.0f64).prop_map(|eta| ChannelModel::Lossy { eta }),
                (0.0..5.0f64, 0.0..1.0f64)
                    .prop_map(|(e, f)| ChannelModel::Explicit { e_upper: e, q_lower: e * f }),
            ]
        }

        fn network() -> impl Strategy<Value = NetworkSpec> {
            (2usize..6)
                .prop_flat_map(|n| {
                    let edges = prop::collection::vec(
                        (0..n, 1..n, channel(), 0.0..2.0f64),
                        0..8,
                    );
                    (Just(n), edges, prop::option::of(prop::collection::btree_set(0..n, 1..n)))
                })
                .prop_map(|(n, edges, users)| NetworkSpec {
                    nodes: (0..n).map(|i| format!("n{i}")).collect(),
                    edges: edges
                        .into_iter()
                        .map(|(a, off, channel, q)| Channel {
                            from: format!("n{a}"),
                            to: format!("n{}", (a + off) % n),
                            channel,
                            q,
                        })
                        .collect(),
                    commodities: if n > 2 { vec![("n0".into(), "n1".into())] } else { vec![] },
                    users: users.map(|s| s.into_iter().map(|i| format!("n{i}")).collect()),
                })
        }

        proptest! {
            #[test]
            fn json_roundtrip(net in network()) {
                let back = parse_network(&net.to_json()).unwrap();
                prop_assert_eq!(back, net);
            }

            #[test]
            fn lossy_value_monotone(a in 0.0..1.0f64, b in 0.0..1.0f64) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(plob(lo).unwrap() <= plob(hi).unwrap());
            }

            #[test]
            fn undirected_weight_is_sum_of_directions(net in network()) {
                let g = undirect(&net, Measure::UpperEntanglement).unwrap();
                for e in &g.edges {
                    let mut expect = 0.0;
                    for c in &net.edges {
                        let (u, v) = (net.node_index(&c.from).unwrap(), net.node_index(&c.to).unwrap());
                        if (u.min(v), u.max(v)) == (e.u, e.v) {
                            expect += c.q * channel_value(&c.channel, Measure::UpperEntanglement).unwrap();
                        }
                    }
                    prop_assert!((e.weight - expect).abs() <= 1e-12 * (1.0 + expect));
                }
            }
        }
    }
}
