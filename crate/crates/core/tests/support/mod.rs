//! Shared generators and independent oracles for integration tests.
#![allow(dead_code)]

use qnetkit::netmodel::{Channel, ChannelModel, NetworkSpec, WeightedUGraph};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random simple graph on `3..=max_n` vertices with integer weights in
/// `1..=max_w`; every vertex pair is an edge with probability 1/2.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize, max_w: u32) -> WeightedUGraph {
    let n = rng.gen_range(3..=max_n);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((u, v, f64::from(rng.gen_range(1..=max_w))));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1, 1.0));
    }
    WeightedUGraph::from_indexed(n, &edges).unwrap()
}

/// `k` distinct unordered terminal pairs (fewer if the graph is small).
pub fn random_pairs(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    all.shuffle(rng);
    all.truncate(k);
    all
}

/// Random connected network mixing pure-loss and explicit channels with
/// `Q < E`.
pub fn random_network(rng: &mut ChaCha8Rng) -> NetworkSpec {
    let n = rng.gen_range(3..=6);
    let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let channel = |rng: &mut ChaCha8Rng, u: usize, v: usize| {
        let model = if rng.gen_bool(0.4) {
            ChannelModel::Lossy {
                eta: rng.gen_range(0.05..0.95),
            }
        } else {
            let e: f64 = rng.gen_range(0.1..3.0);
            ChannelModel::Explicit {
                e_upper: e,
                q_lower: e * rng.gen_range(0.0..0.99),
            }
        };
        Channel {
            from: nodes[u].clone(),
            to: nodes[v].clone(),
            channel: model,
            q: 1.0,
        }
    };
    let mut edges = Vec::new();
    // A spanning path keeps the network connected.
    for v in 1..n {
        edges.push(channel(rng, v - 1, v));
    }
    for u in 0..n {
        for v in u + 2..n {
            if rng.gen_bool(0.35) {
                edges.push(channel(rng, u, v));
            }
        }
    }
    NetworkSpec {
        nodes,
        edges,
        commodities: Vec::new(),
        users: None,
    }
}

type Mat16 = [[f64; 16]; 16];

fn werner_fidelity_state(f: f64) -> [[f64; 4]; 4] {
    // F |Φ+><Φ+| + (1 - F)/3 (1 - |Φ+><Φ+|), basis |00>,|01>,|10>,|11>.
    let other = (1.0 - f) / 3.0;
    let mut rho = [[0.0; 4]; 4];
    for (i, row) in rho.iter_mut().enumerate() {
        row[i] = other;
    }
    for &i in &[0usize, 3] {
        for &j in &[0usize, 3] {
            rho[i][j] += (f - other) / 2.0;
        }
    }
    rho
}

/// Recurrence distillation on two Werner pairs by explicit density
/// matrices: bilateral CNOTs from pair 1 onto pair 2, measure pair 2 in the
/// computational basis and keep pair 1 when the outcomes agree. Returns the
/// success probability and the fidelity of the kept pair.
pub fn distill_density_matrix(f1: f64, f2: f64) -> (f64, f64) {
    let r1 = werner_fidelity_state(f1);
    let r2 = werner_fidelity_state(f2);
    // Qubit order a1 b1 a2 b2, index a1*8 + b1*4 + a2*2 + b2.
    let mut rho: Mat16 = [[0.0; 16]; 16];
    for i in 0..16 {
        for j in 0..16 {
            rho[i][j] = r1[i >> 2][j >> 2] * r2[i & 3][j & 3];
        }
    }
    let cnots = |i: usize| {
        let (a1, b1, a2, b2) = (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1);
        a1 << 3 | b1 << 2 | (a2 ^ a1) << 1 | (b2 ^ b1)
    };
    let mut after: Mat16 = [[0.0; 16]; 16];
    for i in 0..16 {
        for j in 0..16 {
            after[cnots(i)][cnots(j)] = rho[i][j];
        }
    }
    let mut kept = [[0.0; 4]; 4];
    for (i, row) in kept.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = [0usize, 3].iter().map(|&m| after[i * 4 + m][j * 4 + m]).sum();
        }
    }
    let p: f64 = (0..4).map(|i| kept[i][i]).sum();
    let overlap = (kept[0][0] + kept[0][3] + kept[3][0] + kept[3][3]) / 2.0;
    (p, overlap / p)
}

/// Total-variation distance between two PMFs on a common index range.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..n).map(|i| (at(a, i) - at(b, i)).abs()).sum::<f64>()
}
