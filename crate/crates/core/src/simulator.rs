//! Equilibrium configuration sampling at a prescribed temperature.
//!
//! The model fixes only the equilibrium distribution (Boltzmann weights of
//! the utility function under E = -U); the dynamics here is single-flip
//! heat-bath, whose stationary distribution is exactly that ensemble and
//! whose per-site rule matches the two-state logistic occupation
//! probabilities.
//!
//! Runs are deterministic per seed. A single chain is inherently serial;
//! independent replicas use separate ChaCha streams and may run in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{
    EstimateMethod, SpinConfiguration, SurplusEstimate, SystemParams, Topology,
};
use crate::estimator::surplus_std_error;
use crate::{Error, Real, Result};

/// Control block for one simulation run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationConfig<F> {
    pub params: SystemParams<F>,
    pub topology: Topology,
    /// Simulation temperature T > 0.
    pub temperature: F,
    pub seed: u64,
    pub burn_in_sweeps: usize,
    pub sample_interval_sweeps: usize,
    pub n_samples: usize,
}

impl<F: Real> SimulationConfig<F> {
    /// Defaults: 1000 burn-in sweeps, 10 sweeps between samples, 1 sample.
    pub fn new(params: SystemParams<F>, topology: Topology, temperature: F, seed: u64) -> Self {
        SimulationConfig {
            params,
            topology,
            temperature,
            seed,
            burn_in_sweeps: 1000,
            sample_interval_sweeps: 10,
            n_samples: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.temperature > F::zero()) {
            return Err(Error::Domain(format!(
                "simulation temperature must be positive, got {}",
                self.temperature
            )));
        }
        if self.sample_interval_sweeps < 1 {
            return Err(Error::Domain("sample interval must be at least 1 sweep".into()));
        }
        if self.n_samples < 1 {
            return Err(Error::Domain("at least one sample is required".into()));
        }
        self.topology.check_size(self.params.n_agents)?;
        let implied = self.topology.implied_z(self.params.n_agents)?;
        if implied != self.params.z {
            return Err(Error::Domain(format!(
                "topology implies z = {implied} but params carry z = {}",
                self.params.z
            )));
        }
        Ok(())
    }
}

/// One agent's recorded decision sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub agent_index: usize,
    pub states: Vec<i8>,
}

impl TimeSeries {
    /// Time-average surplus of the series.
    pub fn surplus_estimate<F: Real>(&self) -> SurplusEstimate<F> {
        let plus = self.states.iter().filter(|s| **s == 1).count();
        let n = self.states.len();
        let m_hat = (F::of_usize(plus) - F::of_usize(n - plus)) / F::of_usize(n);
        SurplusEstimate {
            m_hat,
            n_observed: n,
            std_error: surplus_std_error(m_hat, n),
            method: EstimateMethod::TimeSeries,
        }
    }
}

/// Utility of a configuration: U = mu B sum_i s_i + J sum_<ij> s_i s_j,
/// each interacting pair counted once.
pub fn utility<F: Real>(p: &SystemParams<F>, config: &SpinConfiguration) -> Result<F> {
    p.validate()?;
    let states = config.states();
    let mut spin_sum = 0i64;
    for s in states {
        spin_sum += *s as i64;
    }
    let mut pair_sum = 0i64;
    for (a, b) in config.topology().edges(states.len())? {
        pair_sum += (states[a] * states[b]) as i64;
    }
    Ok(p.mu * p.b * F::from_i64(spin_sum).expect("spin sum representable")
        + p.j * F::from_i64(pair_sum).expect("pair sum representable"))
}

/// Heat-bath acceptance probability 1 / (1 + e^{-x}) for a flip whose
/// utility change is x = dU / (kT). Satisfies a(x)/a(-x) = e^x.
pub fn heat_bath_acceptance<F: Real>(delta_u_over_kt: F) -> F {
    F::one() / (F::one() + (-delta_u_over_kt).exp())
}

fn probability_plus<F: Real>(config: &SimulationConfig<F>) -> F {
    // Occupation probability of the +1 state with no ambient surplus.
    let x = config.params.mu * config.params.b / (config.params.k * config.temperature);
    F::one() / (F::one() + (-F::two() * x).exp())
}

/// Draws one configuration of the ideal system (J = 0): every agent state is
/// an independent Bernoulli draw with P+ from the occupation probabilities.
pub fn sample_ideal<F: Real>(config: &SimulationConfig<F>) -> Result<SpinConfiguration> {
    sample_ideal_stream(config, 0)
}

/// Like [`sample_ideal`], on a dedicated RNG stream so replicas under the
/// same seed stay independent.
pub fn sample_ideal_stream<F: Real>(
    config: &SimulationConfig<F>,
    stream: u64,
) -> Result<SpinConfiguration> {
    config.validate()?;
    if config.params.j != F::zero() {
        return Err(Error::Misuse(
            "the ideal sampler requires J = 0; use sample_mcmc for interacting systems".into(),
        ));
    }
    let p_plus = probability_plus(config).as_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let states = (0..config.params.n_agents)
        .map(|_| if rng.gen::<f64>() < p_plus { 1i8 } else { -1i8 })
        .collect();
    SpinConfiguration::new(states, config.topology)
}

/// Runs single-flip heat-bath dynamics and returns `n_samples` equilibrium
/// configurations spaced `sample_interval_sweeps` apart, after discarding
/// `burn_in_sweeps`. One sweep is N attempted flips at uniformly random
/// sites followed by one Metropolis attempt to flip the whole population at
/// once; the global move leaves the pair term invariant and lets the chain
/// cross between the aligned and inverted wells, which single-site moves
/// cannot do in feasible time once the coupling is strong. The chain starts
/// aligned with the news environment.
pub fn sample_mcmc<F: Real>(config: &SimulationConfig<F>) -> Result<Vec<SpinConfiguration>> {
    config.validate()?;
    let n = config.params.n_agents;
    let adjacency = config.topology.adjacency(n)?;
    let kt = (config.params.k * config.temperature).as_f64();
    let mu_b = (config.params.mu * config.params.b).as_f64();
    let j = config.params.j.as_f64();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // B > 0 by validation, so the aligned start is all +1.
    let mut states = vec![1i8; n];

    let sweep = |states: &mut Vec<i8>, rng: &mut ChaCha8Rng| {
        for _ in 0..n {
            let site = rng.gen_range(0..n);
            let mut neighbor_sum = 0i64;
            for &nb in &adjacency[site] {
                neighbor_sum += states[nb] as i64;
            }
            let local = mu_b + j * neighbor_sum as f64;
            let delta_u = -2.0 * states[site] as f64 * local;
            let accept = heat_bath_acceptance(delta_u / kt);
            if rng.gen::<f64>() < accept {
                states[site] = -states[site];
            }
        }
        // Global inversion: s -> -s changes only the field term, by
        // -2 mu B sum_i s_i. Metropolis acceptance keeps detailed balance.
        let spin_sum: i64 = states.iter().map(|s| *s as i64).sum();
        let delta_u = -2.0 * mu_b * spin_sum as f64;
        if rng.gen::<f64>() < (delta_u / kt).exp().min(1.0) {
            for s in states.iter_mut() {
                *s = -*s;
            }
        }
    };

    for _ in 0..config.burn_in_sweeps {
        sweep(&mut states, &mut rng);
    }
    let mut samples = Vec::with_capacity(config.n_samples);
    for _ in 0..config.n_samples {
        for _ in 0..config.sample_interval_sweeps {
            sweep(&mut states, &mut rng);
        }
        samples.push(SpinConfiguration::new(states.clone(), config.topology)?);
    }
    Ok(samples)
}

/// Records one representative agent of the ideal system over
/// `n_samples` successive decisions. Valid only for J = 0, where the
/// decision sequence is a Bernoulli process and therefore ergodic.
pub fn single_agent_series<F: Real>(
    config: &SimulationConfig<F>,
    agent_index: usize,
) -> Result<TimeSeries> {
    config.validate()?;
    if config.params.j != F::zero() {
        return Err(Error::Misuse(
            "single-agent time series are defined for the ideal system only (J = 0)".into(),
        ));
    }
    if agent_index >= config.params.n_agents {
        return Err(Error::Domain(format!(
            "agent index {agent_index} out of range for N = {}",
            config.params.n_agents
        )));
    }
    let p_plus = probability_plus(config).as_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // Stream per agent: identical copies of the representative agent get
    // independent histories under one seed.
    rng.set_stream(1 + agent_index as u64);
    let states = (0..config.n_samples)
        .map(|_| if rng.gen::<f64>() < p_plus { 1i8 } else { -1i8 })
        .collect();
    Ok(TimeSeries {
        agent_index,
        states,
    })
}
