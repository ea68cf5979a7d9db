mod support;

use qnetkit::chain::{distill_step, fidelity, t_coh_for_decay, werner_from_fidelity, ChainParams, Protocol};
use qnetkit::des::{simulate_chain, simulate_samples, DesConfig};
use qnetkit::disttrack::{chain_distribution, moment_matched_geometric, pre_swap_decay, TrackConfig};
use qnetkit::markov::{BuildOptions, RepeaterMarkovChain};
use qnetkit::montecarlo::{run_samples, substream, SampleRecord};
use support::distill_density_matrix;

#[test]
fn markov_pmf_matches_tracked_pmf() {
    for &(n, p_g, p_s) in &[(1, 0.5, 0.5), (1, 0.2, 0.9), (2, 0.5, 0.5), (2, 0.7, 0.3)] {
        let params = ChainParams::new(n, p_g, p_s);
        let exact = chain_distribution(&params, &Protocol::swap_only(n), &TrackConfig::with_trunc(400)).unwrap();
        let mc = RepeaterMarkovChain::build(&params, BuildOptions::default()).unwrap();
        let pmf = mc.waiting_pmf(400);
        for t in 0..=400 {
            let d = (pmf.pmf_at(t) - exact.pmf_at(t)).abs();
            assert!(d < 1e-9, "n={n} p_g={p_g} p_s={p_s} t={t}: {d}");
        }
    }
}

#[test]
fn distillation_matches_density_matrices() {
    for i in 0..10 {
        for j in 0..10 {
            let f1 = 0.5 + 0.5 * i as f64 / 9.0;
            let f2 = 0.5 + 0.5 * j as f64 / 9.0;
            let (p, w) = distill_step(werner_from_fidelity(f1), werner_from_fidelity(f2)).unwrap();
            let (p_ref, f_ref) = distill_density_matrix(f1, f2);
            assert!((p - p_ref).abs() < 1e-12, "p at ({f1}, {f2})");
            assert!((fidelity(w) - f_ref).abs() < 1e-12, "F at ({f1}, {f2})");
        }
    }
}

#[test]
fn geometric_fit_deviates_at_short_times() {
    for &(p_g, p_s) in &[(0.1, 0.5), (0.5, 0.5), (0.3, 0.9)] {
        let exact = chain_distribution(&ChainParams::new(2, p_g, p_s), &Protocol::swap_only(2), &TrackConfig::default())
            .unwrap();
        let geo = moment_matched_geometric(&exact).unwrap();
        let worst = (1..=exact.t_trunc)
            .max_by(|&a, &b| {
                let da = (exact.pmf_at(a) - geo.pmf_at(a)).abs();
                let db = (exact.pmf_at(b) - geo.pmf_at(b)).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        assert!((worst as f64) < exact.mean(), "p_g={p_g} p_s={p_s}: t*={worst}");
    }
}

#[test]
fn tracked_decay_matches_closed_form() {
    let g = pre_swap_decay(0.5, t_coh_for_decay(0.5), 400).unwrap();
    assert!((g - 5.0 / 9.0).abs() < 1e-9);
}

/// One-sample Kolmogorov-Smirnov distance of delivery times against an
/// exact CDF.
fn ks_against(samples: &[SampleRecord], cdf: &[f64]) -> f64 {
    let mut ts: Vec<u64> = samples.iter().map(|s| s.t).collect();
    ts.sort_unstable();
    let n = ts.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    for (t, &f) in cdf.iter().enumerate() {
        while i < ts.len() && ts[i] as usize <= t {
            i += 1;
        }
        d = d.max((i as f64 / n - f).abs());
    }
    d
}

#[test]
fn samplers_follow_exact_distribution() {
    let params = ChainParams::new(2, 0.5, 0.6).with_t_coh(20.0).with_tau(Some(6));
    let proto = Protocol::swap_only(2);
    let exact = chain_distribution(&params, &proto, &TrackConfig::default()).unwrap();
    let cdf = exact.cdf();
    let n = 50_000;
    // 1% critical value of the one-sample statistic.
    let crit = 1.63 / (n as f64).sqrt();
    let mc = run_samples(&params, &proto, n, 17).unwrap();
    let des = simulate_samples(&params, &proto, &DesConfig::default(), n, 17).unwrap();
    let exact_w = exact.overall_mean_w().unwrap();
    for (name, s) in [("mc", &mc), ("des", &des)] {
        assert!(ks_against(s, &cdf) < crit, "{name}");
        let mean_w = s.iter().map(|r| r.w).sum::<f64>() / n as f64;
        let var = s.iter().map(|r| (r.w - mean_w).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean_w - exact_w).abs() < 4.0 * (var / n as f64).sqrt(), "{name} w");
    }
}

#[test]
fn trace_hashes_are_seed_stable() {
    let params = ChainParams::new(2, 0.3, 0.7).with_t_coh(15.0).with_tau(Some(4));
    let proto = Protocol::with_distillation(2, &[1, 0]);
    let config = DesConfig {
        delay: 2,
        record_trace: true,
    };
    let a = simulate_chain(&params, &proto, &config, substream(5, 3)).unwrap();
    let b = simulate_chain(&params, &proto, &config, substream(5, 3)).unwrap();
    let c = simulate_chain(&params, &proto, &config, substream(6, 3)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.trace_hash, c.trace_hash);
    assert_eq!(a.trace.as_ref().unwrap().len() as u64, a.events);
}
