//! The log-periodic power-law price model.
//!
//! The model is stored in its linearised form
//!
//! ```text
//! p(t) = A + B (tc - t)^m + C1 (tc - t)^m cos(w ln(tc - t)) + C2 (tc - t)^m sin(w ln(tc - t))
//! ```
//!
//! which is identical to `A + B (tc - t)^m + C (tc - t)^m cos(w ln(tc - t) - phi)` with
//! `C1 = C cos(phi)` and `C2 = C sin(phi)`. Time is a 0-based trading-day index.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LpplError, Result};

/// Full LPPL parameter set: three nonlinear parameters `(tc, m, omega)` and four linear
/// amplitudes `(a, b, c1, c2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpplParams {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub m: f64,
    pub omega: f64,
    pub tc: f64,
}

impl LpplParams {
    /// Builds parameters from the amplitude/phase form `C cos(w ln(tc - t) - phi)`.
    pub fn from_amplitude_phase(
        a: f64,
        b: f64,
        amplitude: f64,
        phase: f64,
        m: f64,
        omega: f64,
        tc: f64,
    ) -> Self {
        Self {
            a,
            b,
            c1: amplitude * phase.cos(),
            c2: amplitude * phase.sin(),
            m,
            omega,
            tc,
        }
    }

    /// Oscillation amplitude `C = sqrt(C1^2 + C2^2)`.
    pub fn amplitude(&self) -> f64 {
        self.c1.hypot(self.c2)
    }

    /// Oscillation phase `phi = atan2(C2, C1)`, in `(-pi, pi]`.
    pub fn phase(&self) -> f64 {
        self.c2.atan2(self.c1)
    }

    /// Preferred scaling factor `lambda = exp(2 pi / omega)`.
    pub fn lambda(&self) -> f64 {
        (TAU / self.omega).exp()
    }

    /// Model price at trading-day index `t`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        evaluate_lppl(self, t)
    }

    /// Model price from the amplitude/phase form. Agrees with [`evaluate`](Self::evaluate)
    /// up to rounding.
    pub fn evaluate_amplitude_phase(&self, t: f64) -> Result<f64> {
        let dt = time_to_critical(self.tc, t)?;
        let power = dt.powf(self.m);
        Ok(self.a
            + self.b * power
            + self.amplitude() * power * (self.omega * dt.ln() - self.phase()).cos())
    }
}

fn time_to_critical(tc: f64, t: f64) -> Result<f64> {
    let dt = tc - t;
    if dt > 0.0 && dt.is_finite() {
        Ok(dt)
    } else {
        Err(LpplError::Domain(format!(
            "model is undefined at t = {t} for critical time {tc}"
        )))
    }
}

/// Evaluates the model at trading-day index `t`; requires `t < tc`.
pub fn evaluate_lppl(params: &LpplParams, t: f64) -> Result<f64> {
    let dt = time_to_critical(params.tc, t)?;
    let log_dt = dt.ln();
    let power = (params.m * log_dt).exp();
    let (sin, cos) = (params.omega * log_dt).sin_cos();
    Ok(params.a + power * (params.b + params.c1 * cos + params.c2 * sin))
}

/// `lambda = exp(2 pi / omega)`.
pub fn lambda_from_omega(omega: f64) -> Result<f64> {
    if omega > 0.0 && omega.is_finite() {
        Ok((TAU / omega).exp())
    } else {
        Err(LpplError::Domain(format!(
            "log-frequency must be positive, got {omega}"
        )))
    }
}

/// `omega = 2 pi / ln(lambda)`.
pub fn omega_from_lambda(lambda: f64) -> Result<f64> {
    if lambda > 1.0 && lambda.is_finite() {
        Ok(TAU / lambda.ln())
    } else {
        Err(LpplError::Domain(format!(
            "scaling factor must exceed 1, got {lambda}"
        )))
    }
}

/// Feasibility rules applied to a fitted parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    /// Exclusive lower bound on `m`.
    pub m_min: f64,
    /// Exclusive upper bound on `m`.
    pub m_max: f64,
    /// Inclusive lower bound on `omega`.
    pub omega_min: f64,
    /// Inclusive upper bound on `omega`.
    pub omega_max: f64,
    pub require_b_negative: bool,
    /// Exclusive bound on `C = sqrt(C1^2 + C2^2)`; only meaningful on standardized data.
    pub amplitude_cap: Option<f64>,
    /// Require the critical time to lie strictly after the last observation.
    pub require_tc_after_window: bool,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self {
            m_min: 0.0,
            m_max: 1.0,
            omega_min: 6.0,
            omega_max: 13.0,
            require_b_negative: true,
            amplitude_cap: Some(1.0),
            require_tc_after_window: true,
        }
    }
}

impl ConstraintSet {
    /// Default bounds with the amplitude cap removed, for series quoted in price units.
    pub fn raw_prices() -> Self {
        Self {
            amplitude_cap: None,
            ..Self::default()
        }
    }

    /// Narrows the `omega` bounds to `[8.5, 9.7]`, i.e. `lambda` close to 2.
    pub fn strict_lambda(self) -> Self {
        Self {
            omega_min: 8.5,
            omega_max: 9.7,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ordered(self.m_min, self.m_max) {
            return Err(LpplError::Config(format!(
                "m bounds must satisfy m_min < m_max, got [{}, {}]",
                self.m_min, self.m_max
            )));
        }
        if !ordered(self.omega_min, self.omega_max) || self.omega_min <= 0.0 {
            return Err(LpplError::Config(format!(
                "omega bounds must satisfy 0 < omega_min < omega_max, got [{}, {}]",
                self.omega_min, self.omega_max
            )));
        }
        if let Some(cap) = self.amplitude_cap {
            if !(cap > 0.0) {
                return Err(LpplError::Config(format!(
                    "amplitude cap must be positive, got {cap}"
                )));
            }
        }
        Ok(())
    }

    /// Bounds on the nonlinear parameters only; the linear amplitudes are not consulted.
    pub(crate) fn admits_nonlinear(&self, tc: f64, m: f64, omega: f64, window_end: f64) -> bool {
        m > self.m_min
            && m < self.m_max
            && omega >= self.omega_min
            && omega <= self.omega_max
            && tc.is_finite()
            && (!self.require_tc_after_window || tc > window_end)
    }

    pub(crate) fn admits_linear(&self, b: f64, amplitude: f64) -> bool {
        (!self.require_b_negative || b < 0.0)
            && self.amplitude_cap.map_or(amplitude.is_finite(), |cap| amplitude < cap)
    }
}

/// A single violated feasibility rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    MBound,
    OmegaBound,
    BSign,
    AmplitudeCap,
    TcBeforeWindowEnd,
}

impl Violation {
    pub fn name(self) -> &'static str {
        match self {
            Violation::MBound => "m_bound",
            Violation::OmegaBound => "omega_bound",
            Violation::BSign => "b_sign",
            Violation::AmplitudeCap => "amplitude_cap",
            Violation::TcBeforeWindowEnd => "tc_before_window_end",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lists every rule `params` violates; an empty list means feasible.
///
/// `window_end` is the index of the last observation. The critical time must lie
/// strictly after it because the model is undefined at `t = tc`.
pub fn check_constraints(
    params: &LpplParams,
    constraints: &ConstraintSet,
    window_end: f64,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    if !(params.m > constraints.m_min && params.m < constraints.m_max) {
        violations.push(Violation::MBound);
    }
    if !(params.omega >= constraints.omega_min && params.omega <= constraints.omega_max) {
        violations.push(Violation::OmegaBound);
    }
    if constraints.require_b_negative && !(params.b < 0.0) {
        violations.push(Violation::BSign);
    }
    if let Some(cap) = constraints.amplitude_cap {
        if !(params.amplitude() < cap) {
            violations.push(Violation::AmplitudeCap);
        }
    }
    if constraints.require_tc_after_window && !(params.tc > window_end) {
        violations.push(Violation::TcBeforeWindowEnd);
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{LN_2, PI};

    fn params(a: f64, b: f64, c1: f64, c2: f64, m: f64, omega: f64, tc: f64) -> LpplParams {
        LpplParams {
            a,
            b,
            c1,
            c2,
            m,
            omega,
            tc,
        }
    }

    #[test]
    fn constant_model() {
        let p = params(5.0, 0.0, 0.0, 0.0, 0.3, 7.0, 50.0);
        assert_eq!(evaluate_lppl(&p, 0.0).unwrap(), 5.0);
    }

    #[test]
    fn pure_power_law() {
        let p = params(0.0, 1.0, 0.0, 0.0, 0.5, 9.0, 100.0);
        assert!((evaluate_lppl(&p, 96.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn oscillation_vanishes_one_day_before_tc() {
        let p = params(1.0, -1.0, 0.1, 0.0, 0.5, TAU / LN_2, 10.0);
        assert!((evaluate_lppl(&p, 9.0).unwrap() - 0.1).abs() < 1e-14);
    }

    #[test]
    fn evaluation_at_or_after_tc_is_a_domain_error() {
        let p = params(1.0, -1.0, 0.1, 0.0, 0.5, 9.0, 10.0);
        assert!(matches!(evaluate_lppl(&p, 10.0), Err(LpplError::Domain(_))));
        assert!(matches!(evaluate_lppl(&p, 12.5), Err(LpplError::Domain(_))));
    }

    #[test]
    fn lambda_omega_identity() {
        assert!((lambda_from_omega(TAU / LN_2).unwrap() - 2.0).abs() < 1e-14);
        assert!((lambda_from_omega(8.9256).unwrap() - 2.022).abs() < 1e-3);
        assert!((lambda_from_omega(8.9817).unwrap() - 2.013).abs() < 1e-3);
        assert!((omega_from_lambda(2.0).unwrap() - 9.0647).abs() < 1e-4);
        assert!((omega_from_lambda(2.022).unwrap() - 8.926).abs() < 1e-2);
        let unit = omega_from_lambda(TAU.exp()).unwrap();
        assert!((unit - 1.0).abs() <= f64::EPSILON, "{unit}");
    }

    #[test]
    fn lambda_omega_domain_errors() {
        assert!(lambda_from_omega(0.0).is_err());
        assert!(lambda_from_omega(-3.0).is_err());
        assert!(omega_from_lambda(1.0).is_err());
        assert!(omega_from_lambda(0.5).is_err());
    }

    #[test]
    fn phase_convention_matches_expansion() {
        let p = LpplParams::from_amplitude_phase(0.0, 0.0, 0.5, 2.0, 0.5, 9.0, 10.0);
        assert!((p.amplitude() - 0.5).abs() < 1e-15);
        assert!((p.phase() - 2.0).abs() < 1e-15);
        let q = params(0.0, 0.0, -1.0, 0.0, 0.5, 9.0, 10.0);
        assert_eq!(q.phase(), PI);
    }

    fn with_amplitude(c: f64, m: f64, omega: f64, b: f64, tc: f64) -> LpplParams {
        LpplParams::from_amplitude_phase(0.0, b, c, 0.3, m, omega, tc)
    }

    #[test]
    fn interior_point_is_feasible() {
        let p = with_amplitude(0.5, 0.5, 9.0, -1.0, 110.0);
        assert!(check_constraints(&p, &ConstraintSet::default(), 100.0).is_empty());
    }

    #[test]
    fn single_m_violation() {
        let p = with_amplitude(0.5, 1.2, 9.0, -1.0, 110.0);
        assert_eq!(
            check_constraints(&p, &ConstraintSet::default(), 100.0),
            vec![Violation::MBound]
        );
    }

    #[test]
    fn four_violations() {
        let p = with_amplitude(2.0, 0.5, 5.0, 1.0, 99.0);
        assert_eq!(
            check_constraints(&p, &ConstraintSet::default(), 100.0),
            vec![
                Violation::OmegaBound,
                Violation::BSign,
                Violation::AmplitudeCap,
                Violation::TcBeforeWindowEnd
            ]
        );
    }

    #[test]
    fn raw_price_constraints_skip_the_amplitude_cap() {
        let p = with_amplitude(25.0, 0.5, 9.0, -1.0, 110.0);
        assert!(check_constraints(&p, &ConstraintSet::raw_prices(), 100.0).is_empty());
        assert!(ConstraintSet::default().strict_lambda().validate().is_ok());
        let bad = ConstraintSet {
            m_min: 0.9,
            m_max: 0.1,
            ..ConstraintSet::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn linear_and_amplitude_phase_forms_agree(
            a in -10.0..10.0f64, b in -5.0..-0.01f64, c in 0.0..1.0f64, phi in -3.1..3.1f64,
            m in 0.05..0.95f64, omega in 6.0..13.0f64, tc_gap in 0.5..50.0f64, t in 0.0..400.0f64,
        ) {
            let p = LpplParams::from_amplitude_phase(a, b, c, phi, m, omega, t + tc_gap);
            let lhs = p.evaluate(t).unwrap();
            let rhs = p.evaluate_amplitude_phase(t).unwrap();
            let scale = a.abs() + (b.abs() + c) * tc_gap.powf(m);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
        }

        #[test]
        fn reparametrization_preserving_amplitude_and_phase_keeps_the_curve(
            c1 in -1.0..1.0f64, c2 in -1.0..1.0f64, m in 0.1..0.9f64, omega in 6.0..13.0f64,
            t in 0.0..100.0f64,
        ) {
            let p = LpplParams { a: 1.0, b: -1.0, c1, c2, m, omega, tc: 120.0 };
            let q = LpplParams::from_amplitude_phase(1.0, -1.0, p.amplitude(), p.phase(), m, omega, 120.0);
            let (x, y) = (p.evaluate(t).unwrap(), q.evaluate(t).unwrap());
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }

        #[test]
        fn lambda_omega_round_trip(lambda in 1.0001..1000.0f64, omega in 0.01..100.0f64) {
            let back = lambda_from_omega(omega_from_lambda(lambda).unwrap()).unwrap();
            prop_assert!((back - lambda).abs() <= 1e-12 * lambda);
            let forth = omega_from_lambda(lambda_from_omega(omega).unwrap()).unwrap();
            prop_assert!((forth - omega).abs() <= 1e-12 * omega);
        }

        #[test]
        fn default_box_accepts_interior_and_rejects_single_exits(
            m in 0.01..0.99f64, omega in 6.0..=13.0f64, b in -10.0..-1e-6f64,
            c in 0.0..0.99f64, gap in 0.01..100.0f64, which in 0usize..5, push in 0.01..5.0f64,
        ) {
            let set = ConstraintSet::default();
            let end = 200.0;
            let inside = LpplParams::from_amplitude_phase(0.0, b, c, 0.7, m, omega, end + gap);
            prop_assert!(check_constraints(&inside, &set, end).is_empty());
            let mut outside = inside;
            let expected = match which {
                0 => { outside.m = if push > 2.5 { 1.0 + push } else { -push }; Violation::MBound }
                1 => { outside.omega = if push > 2.5 { 13.0 + push } else { 6.0 - push }; Violation::OmegaBound }
                2 => { outside.b = push; Violation::BSign }
                3 => {
                    outside = LpplParams::from_amplitude_phase(0.0, b, 1.0 + push, 0.7, m, omega, end + gap);
                    Violation::AmplitudeCap
                }
                _ => { outside.tc = end - push; Violation::TcBeforeWindowEnd }
            };
            prop_assert_eq!(check_constraints(&outside, &set, end), vec![expected]);
        }
    }
}
