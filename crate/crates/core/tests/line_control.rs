use lineqkd::line_control::{min_detectable_leakage, simulate_loss_probe, splice_detected, ProbeChain};
use lineqkd::{Domain, StreamFactory};

/// Fraction of probes flagging a splice of `r_e` on a line with intrinsic loss `r0`.
fn flag_rate(r_e: f64, r0: f64, n_t: f64, chain: &ProbeChain, seed: u64) -> f64 {
    let sigma = chain.count_std_dev(n_t * (1.0 - r0)).unwrap() / n_t;
    let rt = 1.0 - (1.0 - r0) * (1.0 - r_e);
    let streams = StreamFactory::with_domain(seed, Domain::Probes);
    let trials = 10_000;
    let flagged = (0..trials)
        .filter(|&i| {
            let estimate = simulate_loss_probe(rt, n_t, chain, &mut streams.stream(i)).unwrap();
            splice_detected(estimate, r0, sigma)
        })
        .count();
    flagged as f64 / trials as f64
}

#[test]
fn splices_well_above_the_sensitivity_are_flagged() {
    let (n_t, t, m) = (1e14, 0.1, 400);
    let chain = ProbeChain::new(t, m).unwrap();
    let leak = min_detectable_leakage(n_t, t, m).unwrap();
    for r0 in [0.0, 0.05] {
        let strong = flag_rate(10.0 * leak, r0, n_t, &chain, 1);
        let weak = flag_rate(0.1 * leak, r0, n_t, &chain, 2);
        assert!(strong >= 0.99, "r0 {r0}: {strong}");
        assert!(weak <= 0.5, "r0 {r0}: {weak}");
    }
}

#[test]
fn noise_free_probe_returns_the_true_loss() {
    let chain = ProbeChain::new(0.1, 400).unwrap();
    let mut rng = StreamFactory::with_domain(3, Domain::Probes).stream(0);
    assert_eq!(simulate_loss_probe(0.0123, f64::INFINITY, &chain, &mut rng).unwrap(), 0.0123);
}

#[test]
fn sensitivity_improves_with_pulse_energy() {
    let weak = min_detectable_leakage(1e10, 0.1, 400).unwrap();
    let strong = min_detectable_leakage(1e14, 0.1, 400).unwrap();
    assert!(strong < weak);
    // Shot-noise dominated regime: scales as n^-1/2.
    assert!((weak / strong / 100.0 - 1.0).abs() < 0.01);
}
