//! Analytic outage probability of destination 1.
//!
//! With `γ0 = P1 |h_s1|^2` exponential with mean `μ = P1 Ω_s1` and the
//! relayed SNR `Z = a X Y / (b X + c)`, outage is `Pr[γ0 + Z < R0]`:
//!
//! ```text
//! P_out = ∫_0^R0 F_Z(R0 - τ) (1/μ) e^(-τ/μ) dτ
//! F_Z(z) = 1 - e^(-z b / (a Ω_sr)) · u K1(u),   u = sqrt(4 z c / (a Ω_sr Ω_r1))
//! ```
//!
//! [`outage_quadrature`] integrates this directly and is the reference.
//! [`outage_closed_form`] expands `u K1(u)` in its ascending series and
//! integrates term by term. With `κ = a Ω_sr Ω_r1 / c`, `β = b / (a Ω_sr)` and
//! `δ = 1/μ - β`, substituting `s = R0 - τ` gives
//!
//! ```text
//! P_out = Q1 + Q4 + Σ_{l≥0} T_l
//! Q1  = 1 - e^(-R0/μ)
//! Q4  = -(1/μ) e^(-R0/μ) ∫_0^R0 e^(δ s) ds
//!     = -(a Ω_sr / (a Ω_sr - b P1 Ω_s1)) (e^(-β R0) - e^(-R0/μ))
//! T_l = -(1/μ) e^(-R0/μ) / (κ^(l+1) l! (l+1)!)
//!       · ∫_0^R0 e^(δ s) s^(l+1) [ln s - ln κ + 2C - H_l - H_(l+1)] ds
//! ```
//!
//! The power integrals are `(-δ)^-(l+2) γ(l+2, -δ R0)` and the logarithmic
//! ones are the `H_l` integrals with decay rate `-δ`. Everything is evaluated
//! on the unit interval (`s = R0 t`) in log space, because `e^(-R0/μ)` and
//! `γ(l+2, -δ R0)` separately under- and overflow once `R0` is large.

use std::cell::OnceCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{EstimateMethod, OutageEstimate};
use crate::network::ChannelGains;
use crate::protocols::OutageCoefficients;
use crate::specfun::{
    bessel_k1_scaled, harmonic, integrate, ln_factorial, ln_normalized_lower_gamma,
    quad_log_endpoint, x_k1_minus_one, QuadratureSpec, EULER_GAMMA,
};

/// Below this `|δ|` the closed form switches to the `δ = 0` limit.
pub const DEGENERATE_DECAY: f64 = 1e-9;

/// Arguments of `exp` below this underflow to zero in f64.
const LN_UNDERFLOW: f64 = -745.0;

/// Truncation policy for the closed-form series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPolicy {
    pub max_terms: usize,
    pub term_rel_tol: f64,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        SeriesPolicy {
            max_terms: 60,
            term_rel_tol: 1e-12,
        }
    }
}

impl SeriesPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 1 {
            return Err(Error::invalid("max_terms", "must be >= 1"));
        }
        if !(self.term_rel_tol > 0.0) {
            return Err(Error::invalid("term_rel_tol", "must be > 0"));
        }
        Ok(())
    }
}

/// Outage without any relay contribution, `1 - exp(-R0 / (P1 Ω_s1))`.
fn direct_only(r0: f64, mean_direct: f64) -> f64 {
    -(-r0 / mean_direct).exp_m1()
}

fn check_direct_link(p1: f64, omega_s1: f64) -> Result<f64> {
    let mu = p1 * omega_s1;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!(
            "direct link needs P1 Ω_s1 > 0, got {mu}"
        )));
    }
    Ok(mu)
}

/// CDF of the relayed-path SNR `Z = a X Y / (b X + c)` with
/// `X ~ Exp(Ω_r1)`, `Y ~ Exp(Ω_sr)`.
pub fn cdf_z(z: f64, coeffs: &OutageCoefficients, omega_sr: f64, omega_r1: f64) -> Result<f64> {
    if !(coeffs.a > 0.0) {
        return Err(Error::Domain(format!(
            "CDF of Z needs a > 0, got {}",
            coeffs.a
        )));
    }
    if z <= 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    let a_sr = coeffs.a * omega_sr;
    let decay = z * coeffs.b / a_sr;
    let u = (4.0 * z * coeffs.c / (a_sr * omega_r1)).sqrt();
    if u <= 2.0 {
        // 1 - e^-d (1 + S) = -expm1(-d) - e^-d S, with S = u K1(u) - 1 <= 0
        let s = x_k1_minus_one(u)?;
        Ok((-(-decay).exp_m1() - (-decay).exp() * s).clamp(0.0, 1.0))
    } else {
        let tail = (-decay - u).exp() * u * bessel_k1_scaled(u)?;
        Ok((1.0 - tail).clamp(0.0, 1.0))
    }
}

/// Outage probability by adaptive quadrature of the convolution integral.
///
/// This is the reference against which the series form is checked.
pub fn outage_quadrature(
    coeffs: &OutageCoefficients,
    gains: &ChannelGains,
    p1: f64,
    spec: &QuadratureSpec,
) -> Result<OutageEstimate> {
    let mu = check_direct_link(p1, gains.omega_s1)?;
    let r0 = coeffs.r0;
    if !(r0 > 0.0) {
        return Ok(OutageEstimate::analytic(0.0, EstimateMethod::Quadrature));
    }
    if r0.is_infinite() {
        return Ok(OutageEstimate::analytic(1.0, EstimateMethod::Quadrature));
    }
    if !coeffs.relay_active() {
        return Ok(OutageEstimate::analytic(
            direct_only(r0, mu),
            EstimateMethod::Quadrature,
        ));
    }
    // the direct-link density is below e^-745 past 745 μ
    let upper = r0.min(-LN_UNDERFLOW * mu);
    let failure = OnceCell::new();
    let integrand = |tau: f64| match cdf_z(r0 - tau, coeffs, gains.omega_sr, gains.omega_r1) {
        Ok(f) => f * (-tau / mu).exp() / mu,
        Err(e) => {
            let _ = failure.set(e);
            f64::NAN
        }
    };
    let result = integrate(integrand, 0.0, upper, spec);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let p = result?.clamp(0.0, 1.0);
    Ok(OutageEstimate::analytic(p, EstimateMethod::Quadrature))
}

/// Per-evaluation constants of the series expansion.
struct SeriesSetup {
    /// R0 / μ
    scaled_threshold: f64,
    /// δ R0, zeroed on the degenerate locus
    decay: f64,
    /// ln(R0 / κ)
    ln_ratio: f64,
    ln_r0: f64,
    ln_kappa: f64,
    /// ln of the largest value of the weight e^(-(R0/μ)(1-t) - β R0 t) on [0, 1]
    ln_weight_max: f64,
}

/// `∫_0^1 exp(ln_scale + decay t) t^(n-1) ln t dt`, the `H_l` integral of the
/// series mapped to the unit interval.
fn unit_log_moment(n: u32, decay: f64, ln_scale: f64, spec: &QuadratureSpec) -> Result<f64> {
    let power = n as i32 - 1;
    quad_log_endpoint(
        |t| (ln_scale + decay * t).exp() * t.powi(power) * t.ln(),
        0.0,
        1.0,
        spec,
    )
}

/// Outage probability from the term-by-term integrated series.
pub fn outage_closed_form(
    coeffs: &OutageCoefficients,
    gains: &ChannelGains,
    p1: f64,
    policy: &SeriesPolicy,
    spec: &QuadratureSpec,
) -> Result<OutageEstimate> {
    policy.validate()?;
    spec.validate()?;
    let mu = check_direct_link(p1, gains.omega_s1)?;
    let r0 = coeffs.r0;
    if !(r0 > 0.0) {
        return Ok(OutageEstimate::analytic(0.0, EstimateMethod::ClosedForm));
    }
    if r0.is_infinite() {
        return Ok(OutageEstimate::analytic(1.0, EstimateMethod::ClosedForm));
    }
    let q1 = direct_only(r0, mu);
    if !coeffs.relay_active() {
        return Ok(OutageEstimate::analytic(q1, EstimateMethod::ClosedForm));
    }

    let a_sr = coeffs.a * gains.omega_sr;
    let beta = coeffs.b / a_sr;
    let mut delta = 1.0 / mu - beta;
    if delta.abs() < DEGENERATE_DECAY {
        delta = 0.0;
    }
    let kappa = a_sr * gains.omega_r1 / coeffs.c;
    let setup = SeriesSetup {
        scaled_threshold: r0 / mu,
        decay: delta * r0,
        ln_ratio: (r0 / kappa).ln(),
        ln_r0: r0.ln(),
        ln_kappa: kappa.ln(),
        ln_weight_max: -(r0 / mu).min(beta * r0),
    };

    let q4 = constant_term(&setup, beta * r0);
    let (series, _) = series_terms(&setup, policy, spec, q1 + q4)?;
    let p = (q1 + q4 + series).clamp(0.0, 1.0);
    Ok(OutageEstimate::analytic(p, EstimateMethod::ClosedForm))
}

/// `Q4 = -(R0/μ) ∫_0^1 e^(-(R0/μ) + δ R0 t) dt`.
fn constant_term(setup: &SeriesSetup, beta_r0: f64) -> f64 {
    let x = setup.scaled_threshold;
    let y = setup.decay;
    if y == 0.0 {
        return -x * (-x).exp();
    }
    if y.abs() < 1e-3 {
        // e^-x (e^y - 1)/y without cancellation
        return -x * (-x).exp() * y.exp_m1() / y;
    }
    -x * ((-beta_r0).exp() - (-x).exp()) / y
}

/// `ln` of the `l`-th series weight `(R0/μ) (R0/κ)^(l+1) / (l! (l+1)!)`.
fn ln_series_weight(setup: &SeriesSetup, l: u32) -> f64 {
    setup.scaled_threshold.ln() + (l + 1) as f64 * setup.ln_ratio
        - ln_factorial(l)
        - ln_factorial(l + 1)
}

fn log_coefficient(setup: &SeriesSetup, l: u32) -> f64 {
    -setup.ln_kappa + 2.0 * EULER_GAMMA - harmonic(l) - harmonic(l + 1) + setup.ln_r0
}

/// Upper bound on `|T_l|`: the exponential weight is at most its endpoint
/// maximum, `∫ t^(n-1) = 1/n` and `∫ t^(n-1) |ln t| = 1/n^2`.
fn term_bound(setup: &SeriesSetup, l: u32) -> f64 {
    let n = (l + 2) as f64;
    (ln_series_weight(setup, l) + setup.ln_weight_max).exp()
        * (log_coefficient(setup, l).abs() + 1.0 / n)
        / n
}

/// Sums `Σ_l T_l`, returning the sum and the number of terms used.
///
/// Stops once a geometric bound on the remaining tail falls below
/// `term_rel_tol` times the running total `base + sum`.
fn series_terms(
    setup: &SeriesSetup,
    policy: &SeriesPolicy,
    spec: &QuadratureSpec,
    base: f64,
) -> Result<(f64, usize)> {
    let ln_e0 = -setup.scaled_threshold; // ln e^(-R0/μ)
    let ratio_scale = setup.ln_ratio.exp();
    // the weighted terms cancel heavily when R0/κ is large; keep each one
    // accurate relative to its own size
    let log_spec = QuadratureSpec {
        rel_tol: spec.rel_tol.min(1e-13),
        ..*spec
    };
    let mut sum = 0.0;
    let mut tail_bound = f64::INFINITY;

    for l in 0..policy.max_terms as u32 {
        let n = l + 2;
        let ln_weight = ln_series_weight(setup, l);
        if ln_weight + setup.ln_weight_max >= LN_UNDERFLOW {
            let ln_power = ln_e0 + ln_normalized_lower_gamma(n, -setup.decay)?;
            let power = (ln_weight + ln_power).exp();
            let log_moment = unit_log_moment(n, setup.decay, ln_e0 + ln_weight, &log_spec)?;
            sum -= power * log_coefficient(setup, l) + log_moment;
        }

        // |T_(k+1)| <= 4 (R0/κ) / ((k+2)(k+3)) |T_k| bound-wise for k > l
        let ratio = 4.0 * ratio_scale / ((l + 3) as f64 * (l + 4) as f64);
        if ratio < 1.0 {
            tail_bound = term_bound(setup, l + 1) / (1.0 - ratio);
            let scale = (base + sum).abs().max(f64::MIN_POSITIVE);
            if tail_bound <= policy.term_rel_tol * scale {
                return Ok((sum, l as usize + 1));
            }
        }
    }
    Err(Error::SeriesConvergence {
        terms: policy.max_terms,
        partial_sum: base + sum,
        tail_bound,
    })
}

/// Outage of the two-slot direct-transmission baseline,
/// `1 - exp(-(2^(2 Rt) - 1) / (P1 Ω_s1))`.
pub fn outage_noncooperative(p1: f64, omega_s1: f64, rt: f64) -> Result<OutageEstimate> {
    let mu = check_direct_link(p1, omega_s1)?;
    let threshold = (2.0 * rt).exp2() - 1.0;
    Ok(OutageEstimate::analytic(
        direct_only(threshold, mu),
        EstimateMethod::ClosedForm,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(a: f64, b: f64, r0: f64) -> OutageCoefficients {
        OutageCoefficients {
            a,
            b,
            c: 1.0,
            r0,
            rate_prefactor: 1.0 / 3.0,
        }
    }

    fn gains(omega_sr: f64, omega_r1: f64, omega_s1: f64) -> ChannelGains {
        ChannelGains {
            omega_sr,
            omega_s1,
            omega_s2: omega_s1,
            omega_r1,
            omega_r2: omega_r1,
        }
    }

    #[test]
    fn cdf_limits() {
        let c = coeffs(1.5, 3.0, 7.0);
        assert_eq!(cdf_z(0.0, &c, 16.0, 6.787).unwrap(), 0.0);
        assert!(cdf_z(1e-12, &c, 16.0, 6.787).unwrap() < 1e-10);
        assert!((cdf_z(1e4, &c, 16.0, 6.787).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cdf_z(f64::INFINITY, &c, 16.0, 6.787).unwrap(), 1.0);
        assert!(cdf_z(1.0, &coeffs(0.0, 0.0, 7.0), 16.0, 6.787).is_err());
    }

    #[test]
    fn cdf_continuous_across_series_switch() {
        let c = coeffs(1.0, 0.5, 1.0);
        // u = 2 at z = a Ω_sr Ω_r1 / c
        let z = 1.0 * 2.0 * 3.0;
        let below = cdf_z(z * (1.0 - 1e-12), &c, 2.0, 3.0).unwrap();
        let above = cdf_z(z * (1.0 + 1e-12), &c, 2.0, 3.0).unwrap();
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn no_relay_reductions() {
        let c = coeffs(0.0, 0.0, 7.0);
        let g = gains(16.0, 6.787, 1.0);
        let spec = QuadratureSpec::default();
        let want = 1.0 - (-7.0f64).exp();
        let q = outage_quadrature(&c, &g, 1.0, &spec).unwrap();
        assert!((q.p - want).abs() < 1e-15);
        assert_eq!(q.method, EstimateMethod::Quadrature);
        let cf = outage_closed_form(&c, &g, 1.0, &SeriesPolicy::default(), &spec).unwrap();
        assert!((cf.p - want).abs() < 1e-15);
        assert_eq!(cf.stderr, 0.0);
    }

    #[test]
    fn empty_threshold() {
        let c = coeffs(1.5, 3.0, 0.0);
        let g = gains(16.0, 6.787, 1.0);
        let spec = QuadratureSpec::default();
        assert_eq!(outage_quadrature(&c, &g, 1.0, &spec).unwrap().p, 0.0);
        let cf = outage_closed_form(&c, &g, 1.0, &SeriesPolicy::default(), &spec).unwrap();
        assert_eq!(cf.p, 0.0);
    }

    #[test]
    fn closed_form_matches_quadrature_reference_points() {
        // values independently confirmed with an arbitrary-precision prototype
        let spec = QuadratureSpec::default();
        let policy = SeriesPolicy::default();
        let cases = [
            (
                coeffs(1.5, 3.0, 7.0),
                gains(16.0, 6.787, 1.0),
                1.0,
                0.579_154_518_179_996_4,
            ),
            (
                coeffs(0.5, 2.0, 2f64.powf(1.5) - 1.0),
                gains(16.0, 6.787, 1.0),
                1.0,
                0.256_932_087_301_618_8,
            ),
            (
                coeffs(5.0, 1.0, 3.0),
                gains(2.44, 15.5, 1.0),
                10.0,
                0.039_066_032_115_654,
            ),
        ];
        for (c, g, p1, want) in cases {
            let q = outage_quadrature(&c, &g, p1, &spec).unwrap().p;
            let cf = outage_closed_form(&c, &g, p1, &policy, &spec).unwrap().p;
            assert!(((q - want) / want).abs() < 1e-9, "quadrature {q} vs {want}");
            assert!(
                ((cf - want) / want).abs() < 1e-9,
                "closed form {cf} vs {want}"
            );
        }
    }

    #[test]
    fn degenerate_decay_is_finite_and_continuous() {
        // δ = 1/μ - b/(a Ω_sr) = 0 when b = a Ω_sr / μ
        let spec = QuadratureSpec::default();
        let policy = SeriesPolicy::default();
        let g = gains(2.0, 3.0, 1.0);
        let a = 1.2;
        let b_exact = a * 2.0;
        let at = outage_closed_form(&coeffs(a, b_exact, 4.0), &g, 1.0, &policy, &spec)
            .unwrap()
            .p;
        let near = outage_closed_form(
            &coeffs(a, b_exact * (1.0 + 1e-6), 4.0),
            &g,
            1.0,
            &policy,
            &spec,
        )
        .unwrap()
        .p;
        let q = outage_quadrature(&coeffs(a, b_exact, 4.0), &g, 1.0, &spec)
            .unwrap()
            .p;
        assert!(((at - q) / q).abs() < 1e-8, "{at} vs {q}");
        assert!((at - near).abs() < 1e-5);
    }

    #[test]
    fn huge_threshold_saturates_without_nan() {
        let spec = QuadratureSpec::default();
        let policy = SeriesPolicy::default();
        // ρ = 0.9 at P = 1: R0 = 2^15 - 1
        let c = coeffs(13.5, 54.0, 32767.0);
        let g = gains(0.3f64.powi(-4), 0.755f64.powi(-4), 1.0);
        let q = outage_quadrature(&c, &g, 1.0, &spec).unwrap().p;
        let cf = outage_closed_form(&c, &g, 1.0, &policy, &spec).unwrap().p;
        assert!(q.is_finite() && cf.is_finite());
        assert!((q - 1.0).abs() < 1e-12);
        assert!((cf - q).abs() < 1e-10);
        let inf = coeffs(13.5, 54.0, f64::INFINITY);
        assert_eq!(outage_quadrature(&inf, &g, 1.0, &spec).unwrap().p, 1.0);
    }

    #[test]
    fn tiny_term_budget_reports_partial_sum() {
        let spec = QuadratureSpec::default();
        let policy = SeriesPolicy {
            max_terms: 2,
            term_rel_tol: 1e-12,
        };
        let err = outage_closed_form(
            &coeffs(1.5, 3.0, 7.0),
            &gains(16.0, 6.787, 1.0),
            1.0,
            &policy,
            &spec,
        )
        .unwrap_err();
        match err {
            Error::SeriesConvergence {
                terms, partial_sum, ..
            } => {
                assert_eq!(terms, 2);
                assert!(partial_sum.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn baseline_examples() {
        let b = outage_noncooperative(1.0, 1.0, 1.0).unwrap();
        assert!((b.p - (1.0 - (-3.0f64).exp())).abs() < 1e-15);
        assert!(outage_noncooperative(1e12, 1.0, 1.0).unwrap().p < 1e-11);
        assert!(outage_noncooperative(1.0, 1.0, 1e-12).unwrap().p < 1e-11);
        assert!(outage_noncooperative(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn log_moment_matches_h_l_integral() {
        // R0^(n) [ln R0 G + L] with the unit-interval pieces equals H_l directly
        use crate::specfun::h_l_integral;
        let spec = QuadratureSpec::default();
        let (l, rate, r0) = (1u32, -0.4, 3.0);
        let n = l + 2;
        let decay = -rate * r0;
        let g = ln_normalized_lower_gamma(n, -decay).unwrap().exp();
        let lm = unit_log_moment(n, decay, 0.0, &spec).unwrap();
        let mapped = r0.powi(n as i32) * (r0.ln() * g + lm);
        let direct = h_l_integral(l, rate, r0, &spec).unwrap();
        assert!(
            ((mapped - direct) / direct).abs() < 1e-10,
            "{mapped} vs {direct}"
        );
    }
}
