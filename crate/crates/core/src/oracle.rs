//! Exact brute-force references for small systems.
//!
//! `enumerate_exact` sums the canonical ensemble over all 2^N configurations
//! with Boltzmann weight e^{U/(kT)} (utility enters with a plus sign since
//! E = -U), stabilized by log-sum-exp. `microcanonical_temperature_ideal`
//! exercises the definitional temperature T = -dU/dS on the ideal system,
//! where the density of states has the closed binomial form.

use rayon::prelude::*;

use crate::domain::{SystemParams, Topology};
use crate::{Error, Real, Result};

/// Largest population accepted for exhaustive 2^N enumeration.
pub const MAX_ENUM_AGENTS: usize = 24;

/// Exact canonical averages of a small system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactEnsemble<F> {
    pub params: SystemParams<F>,
    pub topology: Topology,
    pub temperature: F,
    /// Partition function Z (may overflow to infinity; see `log_partition`).
    pub partition_value: F,
    pub log_partition: F,
    pub mean_surplus: F,
    pub mean_utility: F,
}

/// Per-configuration utility, specialized over the topology. Fully
/// connected systems use sum_<ij> s_i s_j = (S^2 - N)/2 with S the total
/// spin; lattices walk the deduplicated edge list.
enum UtilityKernel {
    FullyConnected,
    EdgeList(Vec<(u32, u32)>),
}

impl UtilityKernel {
    fn pair_sum(&self, mask: u32, n: usize, spin_sum: i64) -> i64 {
        match self {
            UtilityKernel::FullyConnected => {
                let _ = n;
                (spin_sum * spin_sum - n as i64) / 2
            }
            UtilityKernel::EdgeList(edges) => {
                let mut acc = 0i64;
                for &(a, b) in edges {
                    let same = ((mask >> a) ^ (mask >> b)) & 1 == 0;
                    acc += if same { 1 } else { -1 };
                }
                acc
            }
        }
    }
}

fn spin_sum(mask: u32, n: usize) -> i64 {
    2 * mask.count_ones() as i64 - n as i64
}

/// Exhaustive canonical enumeration: Z = sum_config e^{U(config)/(kT)} and
/// the weighted averages of M and U. Exact up to floating point.
///
/// Parallelized over configuration-index ranges with a fixed reduction
/// order, so results are reproducible.
pub fn enumerate_exact<F: Real>(
    p: &SystemParams<F>,
    topology: Topology,
    t: F,
) -> Result<ExactEnsemble<F>> {
    p.validate()?;
    let n = p.n_agents;
    if n > MAX_ENUM_AGENTS {
        return Err(Error::TooLarge {
            n,
            max: MAX_ENUM_AGENTS,
        });
    }
    if !(t > F::zero()) {
        return Err(Error::Domain(format!("enumeration requires T > 0, got {t}")));
    }
    topology.check_size(n)?;

    let kernel = match topology {
        Topology::FullyConnected => UtilityKernel::FullyConnected,
        _ => UtilityKernel::EdgeList(
            topology
                .edges(n)?
                .into_iter()
                .map(|(a, b)| (a as u32, b as u32))
                .collect(),
        ),
    };

    let mu_b = p.mu * p.b;
    let inv_kt = (p.k * t).recip();
    let total: u64 = 1u64 << n;
    let chunk: u64 = 1 << 14;
    let ranges: Vec<(u64, u64)> = (0..total)
        .step_by(chunk as usize)
        .map(|s| (s, (s + chunk).min(total)))
        .collect();

    let exponent = |mask: u32| -> (F, F, F) {
        let s = spin_sum(mask, n);
        let pair = kernel.pair_sum(mask, n, s);
        let u = mu_b * F::from_i64(s).unwrap() + p.j * F::from_i64(pair).unwrap();
        let m = F::from_i64(s).unwrap() / F::of_usize(n);
        (u * inv_kt, m, u)
    };

    // Pass 1: the largest Boltzmann exponent, for stabilization.
    let x_max = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let mut local = F::neg_infinity();
            for mask in lo..hi {
                local = local.max(exponent(mask as u32).0);
            }
            local
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(F::neg_infinity(), F::max);

    // Pass 2: stabilized sums, reduced in range order.
    let partials: Vec<(F, F, F)> = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let mut w_sum = F::zero();
            let mut wm_sum = F::zero();
            let mut wu_sum = F::zero();
            for mask in lo..hi {
                let (x, m, u) = exponent(mask as u32);
                let w = (x - x_max).exp();
                w_sum = w_sum + w;
                wm_sum = wm_sum + w * m;
                wu_sum = wu_sum + w * u;
            }
            (w_sum, wm_sum, wu_sum)
        })
        .collect();
    let (w_sum, wm_sum, wu_sum) = partials.into_iter().fold(
        (F::zero(), F::zero(), F::zero()),
        |(a, b, c), (x, y, z)| (a + x, b + y, c + z),
    );

    let log_partition = x_max + w_sum.ln();
    Ok(ExactEnsemble {
        params: *p,
        topology,
        temperature: t,
        partition_value: log_partition.exp(),
        log_partition,
        mean_surplus: wm_sum / w_sum,
        mean_utility: wu_sum / w_sum,
    })
}

fn ln_choose(n: usize, k: usize) -> f64 {
    use statrs::function::gamma::ln_gamma;
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Definitional temperature of the ideal system by a centered finite
/// difference on the microcanonical entropy: with U(n+) = mu B (2 n+ - N)
/// and S(n+) = k ln C(N, n+), returns T = -dU/dS between n+ - 1 and n+ + 1.
pub fn microcanonical_temperature_ideal<F: Real>(
    p: &SystemParams<F>,
    n_plus: usize,
) -> Result<F> {
    p.validate()?;
    if p.j != F::zero() {
        return Err(Error::Misuse(
            "the microcanonical entropy has closed form only for the ideal system (J = 0)".into(),
        ));
    }
    let n = p.n_agents;
    if n_plus < 1 || n_plus > n - 1 {
        return Err(Error::Domain(format!(
            "n_plus must lie in [1, N-1]; the entropy difference is undefined at the \
             boundary (n_plus = {n_plus}, N = {n})"
        )));
    }
    // At the maximum-entropy point the centered entropy difference vanishes.
    if 2 * n_plus == n {
        return Err(Error::UnboundedTemperature);
    }
    let delta_u = F::of(4.0) * p.mu * p.b;
    let delta_s = p.k * F::of(ln_choose(n, n_plus + 1) - ln_choose(n, n_plus - 1));
    Ok(-delta_u / delta_s)
}
