//! Core value types, parameter validation, and unit conventions.
//!
//! All types here are immutable after construction and safe to share across
//! threads. Monetary parameters (`mu`, `j`, `k`) are carried in their raw
//! currency; only the ratios `mu*b/k` and `j*z/k` ever enter a computation,
//! so any single currency works unchanged.

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Model constants of the agent system; the single source of truth for
/// every formula in the toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<F> {
    /// Number of agents N.
    pub n_agents: usize,
    /// Average number of adjoining agents z.
    pub z: usize,
    /// Per-agent conformity utility, mu > 0 (monetary units).
    pub mu: F,
    /// Pairwise utility J >= 0 (monetary units).
    pub j: F,
    /// Information cost k > 0 (monetary units).
    pub k: F,
    /// News-environment strength, 0 < B <= 1 (unitless).
    pub b: F,
}

impl<F: Real> SystemParams<F> {
    pub fn new(n_agents: usize, z: usize, mu: F, j: F, k: F, b: F) -> Result<Self> {
        validate_params(SystemParams {
            n_agents,
            z,
            mu,
            j,
            k,
            b,
        })
    }

    pub fn validate(&self) -> Result<()> {
        validate_params(*self).map(|_| ())
    }

    /// Temperature scale T0 = mu * B / k.
    pub fn t0(&self) -> F {
        self.mu * self.b / self.k
    }

    pub fn mu_b_over_k(&self) -> F {
        self.mu * self.b / self.k
    }

    pub fn jz_over_k(&self) -> F {
        self.j * F::of_usize(self.z) / self.k
    }

    /// Copy of the parameters with the pairwise utility replaced.
    pub fn with_j(&self, j: F) -> Result<Self> {
        validate_params(SystemParams { j, ..*self })
    }
}

/// Validates every parameter invariant, returning the parameters unchanged
/// when all hold. Idempotent.
pub fn validate_params<F: Real>(p: SystemParams<F>) -> Result<SystemParams<F>> {
    fn fail<T>(field: &'static str, message: &str) -> Result<T> {
        Err(Error::InvalidParam {
            field,
            message: message.to_string(),
        })
    }

    if p.n_agents < 1 {
        return fail("n_agents", "N must be at least 1");
    }
    if p.z < 1 {
        return fail("z", "z must be at least 1");
    }
    if !p.mu.is_finite() || p.mu <= F::zero() {
        return fail("mu", "mu must be a positive finite cost");
    }
    if !p.j.is_finite() || p.j < F::zero() {
        return fail("j", "J must be finite and >= 0");
    }
    if !p.k.is_finite() || p.k <= F::zero() {
        return fail("k", "k must be a positive finite cost");
    }
    if !p.b.is_finite() || p.b <= F::zero() || p.b > F::one() {
        return fail("b", "B must lie in (0,1]");
    }
    Ok(p)
}

/// Neighborhood structure of the agent system.
///
/// `Ring` is the one-dimensional periodic chain (z = 2), `SquarePeriodic`
/// the two-dimensional periodic lattice (z = 4, N = L^2), `Hypercubic` the
/// d-dimensional periodic lattice (z = 2d, N = L^d), and `FullyConnected`
/// couples every pair (z = N - 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Ring,
    SquarePeriodic,
    Hypercubic { dim: usize },
    FullyConnected,
}

impl Topology {
    /// Checks that a population of `n` agents fits this topology
    /// (perfect square / d-th power for the lattices).
    pub fn check_size(&self, n: usize) -> Result<()> {
        if n < 1 {
            return Err(Error::Domain("topology requires at least one agent".into()));
        }
        match self {
            Topology::Ring | Topology::FullyConnected => Ok(()),
            Topology::SquarePeriodic => {
                let l = int_root(n, 2);
                if l * l == n && l >= 2 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "square lattice requires N = L^2 with L >= 2, got N = {n}"
                    )))
                }
            }
            Topology::Hypercubic { dim } => {
                if *dim < 1 {
                    return Err(Error::Domain("hypercubic dimension must be >= 1".into()));
                }
                let l = int_root(n, *dim as u32);
                if l.pow(*dim as u32) == n && l >= 2 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "hypercubic-{dim} lattice requires N = L^{dim} with L >= 2, got N = {n}"
                    )))
                }
            }
        }
    }

    /// Unique interaction pairs (i, j) with i < j. Degenerate small lattices
    /// (e.g. a ring of two agents) collapse to a single pair counted once.
    pub fn edges(&self, n: usize) -> Result<Vec<(usize, usize)>> {
        self.check_size(n)?;
        let mut set = std::collections::BTreeSet::new();
        let mut push = |a: usize, b: usize| {
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        };
        match self {
            Topology::Ring => {
                for i in 0..n {
                    push(i, (i + 1) % n);
                }
            }
            Topology::SquarePeriodic => {
                let l = int_root(n, 2);
                for i in 0..n {
                    let (x, y) = (i % l, i / l);
                    push(i, (x + 1) % l + y * l);
                    push(i, x + ((y + 1) % l) * l);
                }
            }
            Topology::Hypercubic { dim } => {
                let l = int_root(n, *dim as u32);
                for i in 0..n {
                    let mut stride = 1;
                    for _ in 0..*dim {
                        let coord = (i / stride) % l;
                        let up = i - coord * stride + ((coord + 1) % l) * stride;
                        push(i, up);
                        stride *= l;
                    }
                }
            }
            Topology::FullyConnected => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        push(i, j);
                    }
                }
            }
        }
        Ok(set.into_iter().collect())
    }

    /// Neighbor lists consistent with [`Topology::edges`].
    pub fn adjacency(&self, n: usize) -> Result<Vec<Vec<usize>>> {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in self.edges(n)? {
            adj[a].push(b);
            adj[b].push(a);
        }
        Ok(adj)
    }

    /// Coordination number implied by the deduplicated edge set
    /// (2 * |edges| / N), computed without materializing the edges.
    pub fn implied_z(&self, n: usize) -> Result<usize> {
        self.check_size(n)?;
        Ok(match self {
            Topology::Ring => {
                if n == 1 {
                    0
                } else if n == 2 {
                    1
                } else {
                    2
                }
            }
            Topology::SquarePeriodic => {
                if int_root(n, 2) == 2 {
                    2
                } else {
                    4
                }
            }
            Topology::Hypercubic { dim } => {
                if int_root(n, *dim as u32) == 2 {
                    *dim
                } else {
                    2 * dim
                }
            }
            Topology::FullyConnected => n - 1,
        })
    }
}

fn int_root(n: usize, p: u32) -> usize {
    let mut l = (n as f64).powf(1.0 / p as f64).round() as usize;
    while l.pow(p) > n {
        l -= 1;
    }
    while (l + 1).pow(p) <= n {
        l += 1;
    }
    l
}

/// One assignment of states s in {-1, +1} to N agents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinConfiguration {
    states: Vec<i8>,
    topology: Topology,
}

impl SpinConfiguration {
    pub fn new(states: Vec<i8>, topology: Topology) -> Result<Self> {
        if let Some(pos) = states.iter().position(|s| *s != 1 && *s != -1) {
            return Err(Error::Domain(format!(
                "agent state at index {pos} must be -1 or +1, got {}",
                states[pos]
            )));
        }
        topology.check_size(states.len())?;
        Ok(SpinConfiguration { states, topology })
    }

    pub fn states(&self) -> &[i8] {
        &self.states
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// (N_plus, N_minus) occupation counts.
    pub fn counts(&self) -> (usize, usize) {
        let plus = self.states.iter().filter(|s| **s == 1).count();
        (plus, self.states.len() - plus)
    }
}

/// Provenance of a surplus estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Census,
    Subsample,
    TimeSeries,
}

/// Estimated average decision surplus M with its sampling uncertainty.
///
/// `std_error` is zero exactly for a census of the full population; a
/// single-observation subsample also reports zero by the variance formula
/// and is a documented degenerate case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurplusEstimate<F> {
    pub m_hat: F,
    pub n_observed: usize,
    pub std_error: F,
    pub method: EstimateMethod,
}

/// Which form of the measurement equation produced a reading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementVariant {
    /// The full measurement equation.
    Exact,
    /// First-order expansion around M = 0+.
    Taylor,
    /// Ideal agent system (J = 0), the Curie form.
    Ideal,
}

/// A temperature reading with uncertainty.
///
/// `inverted` is set exactly when the input surplus was negative while
/// B > 0; the reading is then negative (inverted state).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureReading<F> {
    pub t: F,
    pub t_std_error: F,
    pub inverted: bool,
    pub variant: MeasurementVariant,
}

/// An ingested count row: label, occupation counts, and the parameters
/// under which they were observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord<F> {
    pub label: String,
    pub n_plus: u64,
    pub n_minus: u64,
    pub params: SystemParams<F>,
}

impl<F: Real> CountRecord<F> {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_plus + self.n_minus < 1 {
            return Err(Error::Domain(
                "count record must contain at least one decision".into(),
            ));
        }
        Ok(())
    }
}
