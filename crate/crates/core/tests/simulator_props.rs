//! Sampler cross-checks: the direct ideal sampler against the Markov chain,
//! ergodicity of the single-agent record, and agreement with exact
//! enumeration on small systems.

use agenttemp::domain::{SystemParams, Topology};
use agenttemp::estimator::census_surplus;
use agenttemp::oracle::enumerate_exact;
use agenttemp::simulator::{sample_ideal_stream, sample_mcmc, single_agent_series, SimulationConfig};

fn ideal_config(n: usize, t: f64, seed: u64) -> SimulationConfig<f64> {
    let params = SystemParams::new(n, n - 1, 1.0, 0.0, 1.0, 1.0).unwrap();
    SimulationConfig::new(params, Topology::FullyConnected, t, seed)
}

#[test]
fn direct_and_markov_samplers_agree_when_uncoupled() {
    // Same uncoupled system, two independent sampling routes. Compare the
    // mean surplus over many draws within 4 combined standard errors.
    let n = 1000usize;
    let t = 2.0f64;
    let draws = 200usize;

    let mut direct_sum = 0.0f64;
    for replica in 0..draws {
        let cfg = ideal_config(n, t, 11);
        let config = sample_ideal_stream(&cfg, replica as u64).unwrap();
        let est: agenttemp::SurplusEstimate = census_surplus(&config);
        direct_sum += est.m_hat;
    }
    let direct_mean = direct_sum / draws as f64;

    let mut cfg = ideal_config(n, t, 12);
    cfg.burn_in_sweeps = 200;
    cfg.sample_interval_sweeps = 5;
    cfg.n_samples = draws;
    let mut markov_sum = 0.0f64;
    for config in sample_mcmc(&cfg).unwrap() {
        let est: agenttemp::SurplusEstimate = census_surplus(&config);
        markov_sum += est.m_hat;
    }
    let markov_mean = markov_sum / draws as f64;

    let m = (1.0f64 / t).tanh();
    let se = ((1.0 - m * m) / (n * draws) as f64).sqrt();
    let tol = 4.0 * (2.0f64).sqrt() * se;
    assert!(
        (direct_mean - markov_mean).abs() < tol,
        "direct {direct_mean} vs markov {markov_mean}, tol {tol}"
    );
    assert!((direct_mean - m).abs() < 4.0 * se + 1e-9);
}

#[test]
fn markov_chain_matches_exact_enumeration() {
    // Small interacting lattice: the chain's long-run mean surplus must sit
    // on the exactly enumerated value.
    let params = SystemParams::new(16, 4, 1.0, 1.0, 1.0, 0.5).unwrap();
    let t = 3.0;
    let exact = enumerate_exact(&params, Topology::SquarePeriodic, t)
        .unwrap()
        .mean_surplus;

    let mut cfg = SimulationConfig::new(params, Topology::SquarePeriodic, t, 5);
    cfg.burn_in_sweeps = 2000;
    cfg.sample_interval_sweeps = 10;
    cfg.n_samples = 4000;
    let samples = sample_mcmc(&cfg).unwrap();
    let mean: f64 = samples
        .iter()
        .map(|c| {
            let est: agenttemp::SurplusEstimate = census_surplus(c);
            est.m_hat
        })
        .sum::<f64>()
        / cfg.n_samples as f64;
    // Correlated-sample tolerance: generous 4-sigma band assuming a short
    // integrated autocorrelation time at this temperature.
    assert!(
        (mean - exact).abs() < 0.02,
        "chain mean {mean} vs exact {exact}"
    );
}

#[test]
fn time_average_matches_ensemble_average() {
    // Ergodicity of the uncoupled system: one agent followed through time
    // agrees with a census of many agents at one instant.
    let t = 2.709f64;
    let samples = 100_000usize;

    let mut series_cfg = ideal_config(100, t, 21);
    series_cfg.n_samples = samples;
    let series = single_agent_series(&series_cfg, 0).unwrap();
    let time_est: agenttemp::SurplusEstimate = series.surplus_estimate();

    let census_cfg = ideal_config(samples, t, 22);
    let snapshot = sample_ideal_stream(&census_cfg, 0).unwrap();
    let census_est: agenttemp::SurplusEstimate = census_surplus(&snapshot);

    let m = (1.0f64 / t).tanh();
    let se = ((1.0 - m * m) / samples as f64).sqrt();
    let tol = 4.0 * (2.0f64).sqrt() * se;
    assert!(
        (time_est.m_hat - census_est.m_hat).abs() < tol,
        "time average {} vs census {}, tol {tol}",
        time_est.m_hat,
        census_est.m_hat
    );
}

#[test]
fn distinct_streams_give_distinct_replicas() {
    let cfg = ideal_config(1000, 2.0, 31);
    let a = sample_ideal_stream(&cfg, 0).unwrap();
    let b = sample_ideal_stream(&cfg, 1).unwrap();
    let again = sample_ideal_stream(&cfg, 0).unwrap();
    assert_ne!(a.states(), b.states());
    assert_eq!(a.states(), again.states());
}

#[test]
fn markov_sampler_is_deterministic_per_seed() {
    let params = SystemParams::new(16, 4, 1.0, 1.0, 1.0, 0.5).unwrap();
    let mut cfg = SimulationConfig::new(params, Topology::SquarePeriodic, 3.0, 77);
    cfg.burn_in_sweeps = 50;
    cfg.n_samples = 3;
    let a = sample_mcmc(&cfg).unwrap();
    let b = sample_mcmc(&cfg).unwrap();
    assert_eq!(a, b);
}
