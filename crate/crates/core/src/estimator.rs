//! The measurement procedure: turn censuses, subsamples, or count records
//! into surplus estimates and propagate their uncertainty through the
//! measurement equation.
//!
//! Subsampling is simple random sampling without replacement, seeded and
//! deterministic per seed. Uncertainty propagation is first order
//! (delta method): sigma_T = |dT/dM| * sigma_M.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{
    CountRecord, EstimateMethod, MeasurementVariant, SpinConfiguration, SurplusEstimate,
    SystemParams, TemperatureReading,
};
use crate::meanfield::{self, Surplus};
use crate::{Error, Real, Result};

/// Surplus from a complete count of all N decisions. Zero standard error.
pub fn census_surplus<F: Real>(config: &SpinConfiguration) -> SurplusEstimate<F> {
    let (plus, minus) = config.counts();
    let n = config.len();
    SurplusEstimate {
        m_hat: (F::of_usize(plus) - F::of_usize(minus)) / F::of_usize(n),
        n_observed: n,
        std_error: F::zero(),
        method: EstimateMethod::Census,
    }
}

/// Standard error of a surplus estimate from `n` independent observations:
/// sqrt((1 - m^2) / n).
pub fn surplus_std_error<F: Real>(m_hat: F, n: usize) -> F {
    ((F::one() - m_hat * m_hat) / F::of_usize(n)).max(F::zero()).sqrt()
}

/// Surplus from a simple random sample of `n` agents drawn without
/// replacement (the "thermometer" subsample). The finite-population
/// correction is applied when the sampling fraction exceeds 5%.
pub fn subsample_surplus<F: Real>(
    config: &SpinConfiguration,
    n: usize,
    seed: u64,
) -> Result<SurplusEstimate<F>> {
    let total = config.len();
    if n < 1 || n > total {
        return Err(Error::Domain(format!(
            "subsample size must satisfy 1 <= n <= N, got n = {n} with N = {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = config.states();
    let mut plus = 0usize;
    for idx in rand::seq::index::sample(&mut rng, total, n) {
        if states[idx] == 1 {
            plus += 1;
        }
    }
    let m_hat = (F::of_usize(plus) - F::of_usize(n - plus)) / F::of_usize(n);
    let mut std_error = surplus_std_error(m_hat, n);
    if total > 1 && n as f64 / total as f64 > 0.05 {
        let fpc = (F::of_usize(total - n) / F::of_usize(total - 1)).sqrt();
        std_error = std_error * fpc;
    }
    Ok(SurplusEstimate {
        m_hat,
        n_observed: n,
        std_error,
        method: EstimateMethod::Subsample,
    })
}

/// Surplus from recorded occupation counts, treated as an exhaustive census
/// of the recorded population.
pub fn surplus_from_counts<F: Real>(rec: &CountRecord<F>) -> Result<SurplusEstimate<F>> {
    rec.validate()?;
    let total = rec.n_plus + rec.n_minus;
    let plus = F::from_u64(rec.n_plus).expect("count representable");
    let minus = F::from_u64(rec.n_minus).expect("count representable");
    Ok(SurplusEstimate {
        m_hat: (plus - minus) / (plus + minus),
        n_observed: total as usize,
        std_error: F::zero(),
        method: EstimateMethod::Census,
    })
}

/// dT/dM of the chosen measurement-equation variant.
pub fn temperature_derivative<F: Real>(
    p: &SystemParams<F>,
    m: F,
    variant: MeasurementVariant,
) -> Result<F> {
    p.validate()?;
    match variant {
        MeasurementVariant::Exact => {
            let s = Surplus::new(m);
            if !(s.gap() > F::zero()) {
                return Err(Error::Domain(format!("|M| must be < 1, got {m}")));
            }
            let l = s.log_odds();
            let a = F::two() * p.mu_b_over_k() + p.jz_over_k() * m;
            Ok(p.jz_over_k() / l - a * (F::two() / (F::one() - m * m)) / (l * l))
        }
        MeasurementVariant::Taylor | MeasurementVariant::Ideal => {
            if m <= F::zero() || m >= F::one() {
                return Err(Error::Domain(format!("M must lie in (0, 1), got {m}")));
            }
            Ok(-p.mu_b_over_k() / (m * m))
        }
    }
}

/// Temperature from a surplus estimate via the full measurement equation,
/// with first-order uncertainty propagation.
pub fn temperature_with_uncertainty<F: Real>(
    p: &SystemParams<F>,
    est: &SurplusEstimate<F>,
) -> Result<TemperatureReading<F>> {
    temperature_with_uncertainty_variant(p, est, MeasurementVariant::Exact)
}

/// Same as [`temperature_with_uncertainty`] for an explicit variant choice.
pub fn temperature_with_uncertainty_variant<F: Real>(
    p: &SystemParams<F>,
    est: &SurplusEstimate<F>,
    variant: MeasurementVariant,
) -> Result<TemperatureReading<F>> {
    let mut reading = match variant {
        MeasurementVariant::Exact => meanfield::measure_temperature(p, est.m_hat)?,
        MeasurementVariant::Taylor => meanfield::measure_temperature_taylor(p, est.m_hat)?,
        MeasurementVariant::Ideal => meanfield::measure_temperature_ideal(p, est.m_hat)?,
    };
    if est.std_error > F::zero() {
        let slope = temperature_derivative(p, est.m_hat, variant)?;
        reading.t_std_error = slope.abs() * est.std_error;
    }
    Ok(reading)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Topology;
    use approx::assert_relative_eq;

    fn config(plus: usize, minus: usize) -> SpinConfiguration {
        let mut states = vec![1i8; plus];
        states.resize(plus + minus, -1i8);
        SpinConfiguration::new(states, Topology::Ring).unwrap()
    }

    fn ideal_params(n: usize, b: f64) -> SystemParams<f64> {
        SystemParams::new(n, 1, 1.0, 0.0, 1.0, b).unwrap()
    }

    #[test]
    fn census_examples() {
        assert_relative_eq!(census_surplus::<f64>(&config(8, 0)).m_hat, 1.0);
        assert_relative_eq!(census_surplus::<f64>(&config(4, 4)).m_hat, 0.0);
        let est = census_surplus::<f64>(&config(5869, 2805));
        assert!((est.m_hat - 0.35324).abs() < 1e-5);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.method, EstimateMethod::Census);
    }

    #[test]
    fn counts_examples() {
        let rec = CountRecord {
            label: "choice 1".into(),
            n_plus: 5869,
            n_minus: 2805,
            params: ideal_params(8674, 1.0),
        };
        let est = surplus_from_counts::<f64>(&rec).unwrap();
        assert!((est.m_hat - 0.35324).abs() < 1e-5);

        let rec2 = CountRecord {
            n_plus: 6042,
            n_minus: 3137,
            ..rec.clone()
        };
        assert!((surplus_from_counts::<f64>(&rec2).unwrap().m_hat - 0.31648).abs() < 1e-5);

        let balanced = CountRecord {
            n_plus: 7,
            n_minus: 7,
            ..rec.clone()
        };
        assert_relative_eq!(surplus_from_counts::<f64>(&balanced).unwrap().m_hat, 0.0);

        let empty = CountRecord {
            n_plus: 0,
            n_minus: 0,
            ..rec
        };
        assert!(surplus_from_counts::<f64>(&empty).is_err());
    }

    #[test]
    fn counts_agree_with_census() {
        let c = config(130, 70);
        let (n_plus, n_minus) = c.counts();
        let rec = CountRecord {
            label: "c".into(),
            n_plus: n_plus as u64,
            n_minus: n_minus as u64,
            params: ideal_params(200, 1.0),
        };
        assert_eq!(
            census_surplus::<f64>(&c).m_hat,
            surplus_from_counts::<f64>(&rec).unwrap().m_hat
        );
    }

    #[test]
    fn exhaustive_subsample_equals_census() {
        let c = config(130, 70);
        let est = subsample_surplus::<f64>(&c, 200, 7).unwrap();
        assert_eq!(est.m_hat, census_surplus::<f64>(&c).m_hat);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.method, EstimateMethod::Subsample);
    }

    #[test]
    fn single_observation_subsample_is_degenerate() {
        let c = config(130, 70);
        let est = subsample_surplus::<f64>(&c, 1, 3).unwrap();
        assert!(est.m_hat == 1.0 || est.m_hat == -1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn subsample_rejects_oversized_request() {
        assert!(subsample_surplus::<f64>(&config(3, 3), 7, 0).is_err());
        assert!(subsample_surplus::<f64>(&config(3, 3), 0, 0).is_err());
    }

    #[test]
    fn subsample_is_deterministic_per_seed() {
        let c = config(500, 300);
        let a = subsample_surplus::<f64>(&c, 50, 42).unwrap();
        let b = subsample_surplus::<f64>(&c, 50, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn propagation_examples() {
        let p = ideal_params(8674, 1.0);
        let est = SurplusEstimate {
            m_hat: (5869.0 - 2805.0) / 8674.0,
            n_observed: 8674,
            std_error: 0.0,
            method: EstimateMethod::Census,
        };
        let r = temperature_with_uncertainty(&p, &est).unwrap();
        assert!((r.t - 2.709).abs() < 0.001);
        assert_eq!(r.t_std_error, 0.0);

        let noisy = SurplusEstimate {
            std_error: 0.01,
            method: EstimateMethod::Subsample,
            ..est
        };
        let rn = temperature_with_uncertainty(&p, &noisy).unwrap();
        let slope = temperature_derivative(&p, noisy.m_hat, MeasurementVariant::Exact).unwrap();
        assert_relative_eq!(rn.t_std_error, slope.abs() * 0.01);
        assert!(rn.t_std_error > 0.0);
    }

    #[test]
    fn saturated_estimate_stays_finite() {
        let p = ideal_params(1000, 1.0);
        let est = SurplusEstimate {
            m_hat: 0.999,
            n_observed: 1000,
            std_error: 0.001,
            method: EstimateMethod::Subsample,
        };
        let r = temperature_with_uncertainty(&p, &est).unwrap();
        assert!(r.t.is_finite());
        assert!(r.t < 0.3);
        assert!(r.t_std_error.is_finite());
    }
}
