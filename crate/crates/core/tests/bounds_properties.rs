mod support;

use qnetkit::capbounds::{bipartite_bounds, multipair_bounds, multipartite_bounds, BoundOptions, Unit};
use qnetkit::flows::Objective;
use qnetkit::netmodel::parse_network;
use support::{random_network, random_pairs, rng};

const CHAIN3: &str = r#"{
  "nodes": ["A", "R1", "R2", "B"],
  "edges": [
    {"from": "A", "to": "R1", "channel": {"type": "lossy", "eta": 0.5}},
    {"from": "R1", "to": "R2", "channel": {"type": "lossy", "eta": 0.5}},
    {"from": "R2", "to": "B", "channel": {"type": "lossy", "eta": 0.5}}
  ]
}"#;

#[test]
fn pure_loss_chain_is_tight() {
    let net = parse_network(CHAIN3).unwrap();
    let per_net = bipartite_bounds(&net, "A", "B", Unit::PerNetworkUse).unwrap();
    assert!((per_net.lower - 1.0).abs() < 1e-9 && (per_net.upper - 1.0).abs() < 1e-9);
    let per_ch = bipartite_bounds(&net, "A", "B", Unit::PerChannelUse).unwrap();
    assert!((per_ch.lower - 1.0 / 3.0).abs() < 1e-9 && (per_ch.upper - 1.0 / 3.0).abs() < 1e-9);
    let q = per_ch.q_opt.unwrap();
    for v in q.lower.iter().chain(&q.upper) {
        assert!((v - 1.0 / 3.0).abs() < 1e-9);
    }
}

#[test]
fn lower_never_exceeds_upper() {
    let mut r = rng(404);
    for _ in 0..60 {
        let net = random_network(&mut r);
        let pairs: Vec<(String, String)> = random_pairs(&mut r, net.nodes.len(), 2)
            .into_iter()
            .map(|(a, b)| (net.nodes[a].clone(), net.nodes[b].clone()))
            .collect();
        for unit in [Unit::PerChannelUse, Unit::PerNetworkUse] {
            let b = bipartite_bounds(&net, &pairs[0].0, &pairs[0].1, unit).unwrap();
            assert!(b.lower <= b.upper + 1e-9, "{b:?}");
            for obj in [Objective::Total, Objective::Worst] {
                let m = multipair_bounds(&net, &pairs, obj, unit, BoundOptions::default()).unwrap();
                assert!(m.lower <= m.upper + 1e-9, "{m:?}");
            }
        }
        let users: Vec<String> = net.nodes.iter().take(3).cloned().collect();
        let g = multipartite_bounds(&net, &users, Unit::PerNetworkUse, BoundOptions::default()).unwrap();
        assert!(g.lower <= g.upper + 1e-9, "{g:?}");
    }
}

#[test]
fn fixed_usage_scales_linearly() {
    let mut net = parse_network(CHAIN3).unwrap();
    net.edges.iter_mut().for_each(|e| e.q = 0.5);
    let half = bipartite_bounds(&net, "A", "B", Unit::FixedQ).unwrap();
    assert!((half.lower - 0.5).abs() < 1e-9);
    assert!((half.upper - 0.5).abs() < 1e-9);
}
