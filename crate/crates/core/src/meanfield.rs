//! Mean-field theory: effective field, occupation probabilities,
//! self-consistency, and the three temperature-measurement formulas.
//!
//! The exact measurement equation is
//!
//! ```text
//! T = (2 mu B / k + (J z / k) M) / ln((1 + M) / (1 - M))
//! ```
//!
//! with the first-order form `T = (mu B / k) / M + (J z) / (2 k)` and the
//! ideal-system (J = 0) Curie form `T = (mu B / k) / M`.
//!
//! The factor 1/2 in the effective field follows the convention that each
//! interacting pair is counted once.
//!
//! All operations are pure functions and safe to call from any thread.

use serde::{Deserialize, Serialize};

use crate::domain::{MeasurementVariant, SystemParams, TemperatureReading};
use crate::{Error, Real, Result};

/// Surpluses below this magnitude are treated as indistinguishable from
/// zero; the measured temperature would be unbounded.
pub const SURPLUS_EPS: f64 = 1e-12;

/// A surplus value that stays meaningful arbitrarily close to saturation.
///
/// Near |M| = 1 the floating-point value of M alone cannot resolve the
/// distance to saturation, which is exactly what `ln((1+M)/(1-M))` depends
/// on. The type therefore carries `1 - |M|` separately; the self-consistency
/// solver fills it in to full relative precision, while the plain
/// [`From`] conversion derives it by subtraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Surplus<F> {
    m: F,
    /// 1 - |m|, kept to full relative precision.
    gap: F,
}

impl<F: Real> Surplus<F> {
    pub fn new(m: F) -> Self {
        Surplus {
            m,
            gap: F::one() - m.abs(),
        }
    }

    pub(crate) fn from_parts(m: F, gap: F) -> Self {
        Surplus { m, gap }
    }

    /// The surplus M itself (rounds to +-1.0 when deeply saturated).
    pub fn value(&self) -> F {
        self.m
    }

    /// Distance to saturation, 1 - |M|.
    pub fn gap(&self) -> F {
        self.gap
    }

    /// ln((1 + M) / (1 - M)) = 2 artanh(M), stable both near zero and near
    /// saturation.
    pub fn log_odds(&self) -> F {
        let mag = self.m.abs();
        let l = if mag < F::half() {
            mag.ln_1p() - (-mag).ln_1p()
        } else {
            (F::one() + mag).ln() - self.gap.ln()
        };
        if self.m < F::zero() {
            -l
        } else {
            l
        }
    }
}

impl<F: Real> From<F> for Surplus<F> {
    fn from(m: F) -> Self {
        Surplus::new(m)
    }
}

/// Boltzmann-Gibbs probabilities of the two agent states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupationProbabilities<F> {
    pub p_minus: F,
    pub p_plus: F,
}

/// One point of a characteristic measurement curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint<F> {
    #[serde(rename = "J")]
    pub j: F,
    #[serde(rename = "M")]
    pub m: F,
    #[serde(rename = "T_over_T0")]
    pub t_over_t0: F,
}

/// Effective news environment B_eff = B + (1/2)(J/mu) z M.
pub fn effective_field<F: Real>(p: &SystemParams<F>, m: F) -> Result<F> {
    p.validate()?;
    if !(m.abs() < F::one()) {
        return Err(Error::Domain(format!("surplus must satisfy |M| < 1, got {m}")));
    }
    Ok(p.b + F::half() * (p.j / p.mu) * F::of_usize(p.z) * m)
}

/// Occupation probabilities at temperature `t` given the ambient surplus `m`,
/// with x = mu B_eff / (k T): P- = 1/(1+e^{2x}), P+ = 1/(1+e^{-2x}).
pub fn occupation_probabilities<F: Real>(
    p: &SystemParams<F>,
    t: F,
    m: F,
) -> Result<OccupationProbabilities<F>> {
    if !(t > F::zero()) {
        return Err(Error::Domain(format!(
            "forward probabilities require T > 0, got {t}"
        )));
    }
    let x = p.mu * effective_field(p, m)? / (p.k * t);
    Ok(OccupationProbabilities {
        p_minus: F::one() / (F::one() + (F::two() * x).exp()),
        p_plus: F::one() / (F::one() + (-F::two() * x).exp()),
    })
}

/// Solves the self-consistency equation m = tanh((mu B + J z m / 2) / (k T))
/// for the branch with the sign of B, i.e. m in (0, 1).
///
/// Damped fixed-point iteration with a bisection fallback, then a Newton
/// polish; near saturation the gap 1 - m is re-solved in its own variable so
/// the result stays accurate when m itself rounds to 1.
pub fn self_consistent_surplus<F: Real>(p: &SystemParams<F>, t: F) -> Result<Surplus<F>> {
    p.validate()?;
    if !(t > F::zero()) {
        return Err(Error::Domain(format!(
            "self-consistency requires T > 0, got {t}"
        )));
    }
    let a = p.mu * p.b / (p.k * t);
    let c = F::half() * p.j * F::of_usize(p.z) / (p.k * t);
    let g = |m: F| (a + c * m).tanh();

    const MAX_EVALS: usize = 1_000_000;
    let mut evals = 0usize;

    // Damped fixed point. For B > 0 the map is increasing and concave on
    // [0, 1), so the iteration is monotone from m = 0.
    let damping = F::of(0.8);
    let tol = F::of(1e-12);
    let mut m = g(F::zero());
    evals += 1;
    let mut converged = false;
    for _ in 0..10_000 {
        let next = m + damping * (g(m) - m);
        evals += 1;
        let delta = (next - m).abs();
        m = next;
        if delta < tol {
            converged = true;
            break;
        }
    }

    if !converged {
        // Bisection fallback on [0, 1 - 1e-15]; h(lo) > 0 and h(hi) < 0 or
        // saturated to zero width.
        let mut lo = F::zero();
        let mut hi = F::one() - F::of(1e-15);
        while hi - lo > tol {
            if evals >= MAX_EVALS {
                return Err(Error::NonConvergence {
                    evaluations: evals,
                    lo: lo.as_f64(),
                    hi: hi.as_f64(),
                });
            }
            let mid = F::half() * (lo + hi);
            let h = g(mid) - mid;
            evals += 1;
            if h > F::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        m = F::half() * (lo + hi);
    }

    // Newton polish on h(m) = g(m) - m down to machine precision.
    for _ in 0..8 {
        let gm = g(m);
        let slope = c * (F::one() - gm * gm) - F::one();
        let step = (gm - m) / slope;
        let next = m - step;
        if !next.is_finite() || next < F::zero() || next >= F::one() {
            break;
        }
        if next == m {
            m = next;
            break;
        }
        m = next;
    }
    m = m.min(F::one()).max(F::zero());

    // 1 - m is exact by subtraction for m >= 1/2; deep in saturation it
    // underflows the spacing of F near one, so re-solve the gap directly:
    // gap = 2 e^{-2x} / (1 + e^{-2x}) with x = a + c (1 - gap).
    let mut gap = F::one() - m;
    if gap < F::of(1e-6) {
        let mut d = gap;
        if d <= F::zero() {
            let e = (-F::two() * (a + c)).exp();
            d = F::two() * e / (F::one() + e);
        }
        for _ in 0..64 {
            let x = a + c * (F::one() - d);
            let e = (-F::two() * x).exp();
            let next = F::two() * e / (F::one() + e);
            let done = (next - d).abs() <= F::of(1e-16) * next;
            d = next;
            if done {
                break;
            }
        }
        gap = d;
        m = F::one() - d;
    }

    Ok(Surplus::from_parts(m, gap))
}

/// The full measurement equation: T = (2 mu B / k + (J z / k) M) / ln((1+M)/(1-M)).
///
/// A negative surplus yields a negative temperature with the `inverted` flag
/// set (the inverted state of a system leaning against its news environment).
pub fn measure_temperature<F: Real>(
    p: &SystemParams<F>,
    m: impl Into<Surplus<F>>,
) -> Result<TemperatureReading<F>> {
    p.validate()?;
    let s: Surplus<F> = m.into();
    check_measurable(&s)?;
    let t = (F::two() * p.mu_b_over_k() + p.jz_over_k() * s.value()) / s.log_odds();
    Ok(TemperatureReading {
        t,
        t_std_error: F::zero(),
        inverted: s.value() < F::zero(),
        variant: MeasurementVariant::Exact,
    })
}

/// First-order form T = (mu B / k) / M + (J z) / (2 k), valid for M near 0+.
pub fn measure_temperature_taylor<F: Real>(
    p: &SystemParams<F>,
    m: F,
) -> Result<TemperatureReading<F>> {
    p.validate()?;
    check_positive_branch(m)?;
    Ok(TemperatureReading {
        t: p.mu_b_over_k() / m + F::half() * p.jz_over_k(),
        t_std_error: F::zero(),
        inverted: false,
        variant: MeasurementVariant::Taylor,
    })
}

/// Ideal-system (Curie) form T = (mu B / k) / M.
pub fn measure_temperature_ideal<F: Real>(
    p: &SystemParams<F>,
    m: F,
) -> Result<TemperatureReading<F>> {
    p.validate()?;
    check_positive_branch(m)?;
    Ok(TemperatureReading {
        t: p.mu_b_over_k() / m,
        t_std_error: F::zero(),
        inverted: false,
        variant: MeasurementVariant::Ideal,
    })
}

fn check_measurable<F: Real>(s: &Surplus<F>) -> Result<()> {
    if !(s.gap() > F::zero()) || !s.value().is_finite() {
        return Err(Error::Domain(format!(
            "surplus must satisfy |M| < 1, got {}",
            s.value()
        )));
    }
    if s.value().abs() < F::of(SURPLUS_EPS) {
        return Err(Error::UnboundedTemperature);
    }
    Ok(())
}

fn check_positive_branch<F: Real>(m: F) -> Result<()> {
    if !m.is_finite() || m <= F::zero() || m >= F::one() {
        return Err(Error::Domain(format!(
            "expansion is anchored at M = 0+, so M must lie in (0, 1), got {m}"
        )));
    }
    if m < F::of(SURPLUS_EPS) {
        return Err(Error::UnboundedTemperature);
    }
    Ok(())
}

/// Characteristic curves T/T0 over a surplus grid, one curve per J value.
///
/// The grid must be strictly increasing with every point in (0, 1). With a
/// positive B the J = 0 curve is the pointwise minimum.
pub fn characteristic_curve<F: Real>(
    p: &SystemParams<F>,
    j_values: &[F],
    m_grid: &[F],
) -> Result<Vec<CurvePoint<F>>> {
    if m_grid.is_empty() {
        return Err(Error::Domain("surplus grid is empty".into()));
    }
    for w in m_grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Domain(format!(
                "surplus grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
    }
    if !(m_grid[0] > F::zero() && *m_grid.last().unwrap() < F::one()) {
        return Err(Error::Domain("surplus grid must lie inside (0, 1)".into()));
    }
    let t0 = p.t0();
    let mut points = Vec::with_capacity(j_values.len() * m_grid.len());
    for &j in j_values {
        let pj = p.with_j(j)?;
        for &m in m_grid {
            let reading = measure_temperature(&pj, m)?;
            points.push(CurvePoint {
                j,
                m,
                t_over_t0: reading.t / t0,
            });
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(j: f64, z: usize) -> SystemParams<f64> {
        SystemParams::new(100, z, 1.0, j, 1.0, 1.0).unwrap()
    }

    #[test]
    fn effective_field_examples() {
        assert_relative_eq!(effective_field(&params(0.0, 12), 0.5).unwrap(), 1.0);
        assert_relative_eq!(effective_field(&params(1.0, 12), 0.1).unwrap(), 1.6);
        assert_relative_eq!(effective_field(&params(1.0, 12), 0.0).unwrap(), 1.0);
        assert!(effective_field(&params(1.0, 12), 1.0).is_err());
    }

    #[test]
    fn occupation_probability_examples() {
        let p = params(0.0, 12);
        let high_t = occupation_probabilities(&p, 1e12, 0.0).unwrap();
        assert_relative_eq!(high_t.p_minus, 0.5, epsilon = 1e-10);
        assert_relative_eq!(high_t.p_plus, 0.5, epsilon = 1e-10);

        let probs = occupation_probabilities(&p, 2.709, 0.0).unwrap();
        assert_relative_eq!(
            probs.p_plus - probs.p_minus,
            (1.0f64 / 2.709).tanh(),
            epsilon = 1e-12
        );
        assert!((probs.p_plus - probs.p_minus - 0.3532).abs() < 0.0005);

        let cold = occupation_probabilities(&p, 1.0, 0.0).unwrap();
        assert_relative_eq!(cold.p_minus, 1.0 / (1.0 + 2.0f64.exp()), epsilon = 1e-12);
        assert_relative_eq!(cold.p_minus, 0.1192, epsilon = 1e-4);
        assert_relative_eq!(cold.p_plus, 0.8808, epsilon = 1e-4);

        assert!(occupation_probabilities(&p, 0.0, 0.0).is_err());
        assert!(occupation_probabilities(&p, -1.0, 0.0).is_err());
    }

    #[test]
    fn self_consistency_closed_form_at_j0() {
        let p = params(0.0, 12);
        for t in [0.5, 1.0, 2.709, 10.0, 100.0] {
            let m = self_consistent_surplus(&p, t).unwrap();
            assert_relative_eq!(m.value(), (1.0f64 / t).tanh(), epsilon = 1e-13);
        }
        let m = self_consistent_surplus(&p, 2.709).unwrap();
        assert!((m.value() - 0.3532).abs() < 1e-4);
    }

    #[test]
    fn measurement_equation_examples() {
        // Counts 5869 / 2805 at B = 1.
        let m = (5869.0 - 2805.0) / (5869.0 + 2805.0);
        let r = measure_temperature(&params(0.0, 12), m).unwrap();
        assert!((r.t - 2.709).abs() < 0.001, "T = {}", r.t);
        assert!(!r.inverted);

        // Counts 6042 / 3137 at B = 0.9.
        let p2 = SystemParams::new(9179, 1, 1.0, 0.0, 1.0, 0.9).unwrap();
        let m2 = (6042.0 - 3137.0) / (6042.0 + 3137.0);
        let r2 = measure_temperature(&p2, m2).unwrap();
        let r2t: f64 = r2.t;
        assert!((r2t - 2.746).abs() < 0.001, "T = {}", r2t);

        // Interacting example: T = (2 + 6) / ln 3.
        let r3 = measure_temperature(&params(1.0, 12), 0.5).unwrap();
        assert_relative_eq!(r3.t, 8.0 / 3.0f64.ln(), epsilon = 1e-10);
        assert!((r3.t - 7.2820).abs() < 1e-4);
    }

    #[test]
    fn measurement_equation_error_paths() {
        let p = params(0.0, 12);
        assert!(matches!(
            measure_temperature(&p, 0.0),
            Err(Error::UnboundedTemperature)
        ));
        assert!(measure_temperature(&p, 1.0).is_err());
        assert!(measure_temperature(&p, -1.5).is_err());
    }

    #[test]
    fn negative_surplus_reads_negative_inverted() {
        let r = measure_temperature(&params(0.0, 12), -0.353).unwrap();
        assert!(r.t < 0.0);
        assert!(r.inverted);
    }

    #[test]
    fn taylor_examples() {
        let r = measure_temperature_taylor(&params(0.0, 12), 0.01).unwrap();
        assert_relative_eq!(r.t, 100.0);
        let r2 = measure_temperature_taylor(&params(1.0, 12), 0.01).unwrap();
        assert_relative_eq!(r2.t, 106.0);
        // Validity range: ~4.6% off the exact form at M = 0.353.
        let exact = measure_temperature(&params(0.0, 12), 0.353).unwrap().t;
        let taylor = measure_temperature_taylor(&params(0.0, 12), 0.353).unwrap().t;
        assert!((taylor - 2.833).abs() < 1e-3, "taylor = {taylor}");
        let rel = (taylor - exact) / exact;
        assert!((rel - 0.046).abs() < 0.002, "rel = {rel}");
        assert!(measure_temperature_taylor(&params(0.0, 12), -0.1).is_err());
        assert!(measure_temperature_taylor(&params(0.0, 12), 0.0).is_err());
    }

    #[test]
    fn ideal_examples() {
        let r = measure_temperature_ideal(&params(0.0, 12), 0.5).unwrap();
        assert_relative_eq!(r.t, 2.0);
        let p = SystemParams::new(100, 12, 1.0, 0.0, 1.0, 0.9).unwrap();
        assert_relative_eq!(measure_temperature_ideal(&p, 0.9).unwrap().t, 1.0);
        // Curie form: the product T * M is the constant mu B / k.
        for m in [0.01, 0.02, 0.04] {
            let t = measure_temperature_ideal(&params(0.0, 12), m).unwrap().t;
            assert_relative_eq!(t * m, 1.0, epsilon = 1e-12);
        }
        // Ideal form coincides with the Taylor form at J = 0.
        for m in [0.01, 0.1, 0.5] {
            let a = measure_temperature_ideal(&params(0.0, 12), m).unwrap().t;
            let b = measure_temperature_taylor(&params(0.0, 12), m).unwrap().t;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn characteristic_curve_examples() {
        let p = params(0.0, 12);
        let pts = characteristic_curve(&p, &[0.0], &[0.5]).unwrap();
        assert_relative_eq!(pts[0].t_over_t0, 2.0 / 3.0f64.ln(), epsilon = 1e-12);
        assert!((pts[0].t_over_t0 - 1.8205).abs() < 1e-4);

        let steep = characteristic_curve(&p, &[0.0], &[1e-6]).unwrap();
        assert!((steep[0].t_over_t0 - 1e6).abs() / 1e6 < 1e-6);

        assert!(characteristic_curve(&p, &[0.0], &[0.5, 0.4]).is_err());
        assert!(characteristic_curve(&p, &[0.0], &[]).is_err());
        assert!(characteristic_curve(&p, &[0.0], &[0.0, 0.5]).is_err());
    }

    #[test]
    fn log_odds_matches_naive_formula() {
        for m in [-0.9f64, -0.3, -1e-8, 1e-8, 0.1, 0.49, 0.51, 0.9, 0.999] {
            let s = Surplus::new(m);
            let naive = ((1.0 + m) / (1.0 - m)).ln();
            assert_relative_eq!(s.log_odds(), naive, max_relative = 1e-12);
        }
    }

    #[test]
    fn solver_reports_saturation_gap() {
        // T low and J large: m rounds to 1.0 but the gap stays meaningful.
        let p = params(3.0, 12);
        let s = self_consistent_surplus(&p, 0.5).unwrap();
        assert!(s.gap() > 0.0);
        assert!(s.gap() < 1e-30);
        let r = measure_temperature(&p, s).unwrap();
        assert_relative_eq!(r.t, 0.5, max_relative = 1e-12);
    }
}
