//! Coupled-subsystem analysis: an ideal subsystem (J = 0) and an
//! interacting one sharing the same news environment and held at equal
//! temperature. Maps the ideal subsystem's surplus M1 to the interacting
//! one's M2 and quantifies the influence channel of raising mu.
//!
//! Pure functions, thread-safe.

use crate::domain::SystemParams;
use crate::{Error, Real, Result};

/// Upper edge of the small-surplus regime in which the equilibrium algebra
/// is derived; larger inputs are answered with a regime flag, not refused.
pub const SMALL_M_LIMIT: f64 = 0.05;

/// Surplus of the interacting subsystem, with a validity flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledSurplus<F> {
    pub m2: F,
    /// True when the input was inside the small-surplus regime the
    /// approximation assumes.
    pub within_small_m_regime: bool,
}

fn coupling_ratio<F: Real>(p: &SystemParams<F>) -> F {
    F::half() * (p.j / p.mu) * F::of_usize(p.z) / p.b
}

fn check_m1<F: Real>(m1: F) -> Result<()> {
    if !m1.is_finite() || m1 <= F::zero() {
        return Err(Error::Domain(format!(
            "the coupled-subsystem map requires M1 > 0, got {m1}"
        )));
    }
    Ok(())
}

/// Equal-temperature map M2 = M1 / (1 - (1/2)(J/mu)(z/B) M1).
pub fn coupled_surplus_exact<F: Real>(p: &SystemParams<F>, m1: F) -> Result<CoupledSurplus<F>> {
    p.validate()?;
    check_m1(m1)?;
    let denom = F::one() - coupling_ratio(p) * m1;
    if denom <= F::zero() {
        return Err(Error::Domain(
            "equilibrium approximation breaks down: (1/2)(J/mu)(z/B) M1 >= 1".into(),
        ));
    }
    Ok(CoupledSurplus {
        m2: m1 / denom,
        within_small_m_regime: m1 <= F::of(SMALL_M_LIMIT),
    })
}

/// First-order form M2 = M1 + (1/2)(J/mu)(z/B) M1^2.
pub fn coupled_surplus_linear<F: Real>(p: &SystemParams<F>, m1: F) -> Result<F> {
    p.validate()?;
    check_m1(m1)?;
    Ok(m1 + coupling_ratio(p) * m1 * m1)
}

/// Sensitivity of the first-order map to the conformity utility:
/// dM2/dmu = -(1/2)(J/mu^2)(z/B) M1^2, negative whenever J > 0. Raising mu
/// therefore lowers the competing subsystem's surplus.
pub fn influence_sensitivity<F: Real>(p: &SystemParams<F>, m1: F) -> Result<F> {
    p.validate()?;
    check_m1(m1)?;
    Ok(-F::half() * (p.j / (p.mu * p.mu)) * F::of_usize(p.z) / p.b * m1 * m1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(j: f64) -> SystemParams<f64> {
        SystemParams::new(100, 12, 1.0, j, 1.0, 1.0).unwrap()
    }

    #[test]
    fn exact_map_examples() {
        assert_relative_eq!(coupled_surplus_exact(&params(0.0), 0.3).unwrap().m2, 0.3);

        let c = coupled_surplus_exact(&params(1.0), 0.01).unwrap();
        assert_relative_eq!(c.m2, 0.01 / 0.94, epsilon = 1e-7);
        assert!((c.m2 - 0.0106383).abs() < 1e-7);
        assert!(c.within_small_m_regime);

        let wide = coupled_surplus_exact(&params(1.0), 0.1).unwrap();
        assert_relative_eq!(wide.m2, 0.25);
        assert!(!wide.within_small_m_regime);
    }

    #[test]
    fn exact_map_breakdown() {
        // (1/2)(J/mu)(z/B) M1 = 6 * 0.2 > 1.
        assert!(coupled_surplus_exact(&params(2.0), 0.2).is_err());
        assert!(coupled_surplus_exact(&params(1.0), 0.0).is_err());
        assert!(coupled_surplus_exact(&params(1.0), -0.1).is_err());
    }

    #[test]
    fn linear_map_examples() {
        assert_relative_eq!(coupled_surplus_linear(&params(1.0), 0.01).unwrap(), 0.0106);
        assert_relative_eq!(coupled_surplus_linear(&params(0.0), 0.02).unwrap(), 0.02);
    }

    #[test]
    fn influence_examples() {
        assert_relative_eq!(influence_sensitivity(&params(0.0), 0.01).unwrap(), 0.0);
        assert_relative_eq!(influence_sensitivity(&params(1.0), 0.01).unwrap(), -6e-4);

        // mu -> infinity: the influence channel closes and M2 -> M1.
        let rich = SystemParams::new(100, 12, 1e9, 1.0, 1.0, 1.0).unwrap();
        assert!(influence_sensitivity(&rich, 0.01f64).unwrap().abs() < 1e-20);
        assert_relative_eq!(
            coupled_surplus_linear(&rich, 0.01).unwrap(),
            0.01,
            max_relative = 1e-9
        );
    }

    #[test]
    fn ordering_for_positive_coupling() {
        for m1 in [1e-4, 1e-3, 0.01, 0.05] {
            let exact = coupled_surplus_exact(&params(1.0), m1).unwrap().m2;
            let linear = coupled_surplus_linear(&params(1.0), m1).unwrap();
            assert!(exact > linear && linear > m1, "m1 = {m1}");
        }
    }

    #[test]
    fn linear_map_decreases_with_mu() {
        let mut last = f64::INFINITY;
        for mu in [0.5, 1.0, 2.0, 4.0] {
            let p = SystemParams::new(100, 12, mu, 1.0, 1.0, 1.0).unwrap();
            let m2 = coupled_surplus_linear(&p, 0.01).unwrap();
            assert!(m2 < last);
            last = m2;
        }
    }
}
