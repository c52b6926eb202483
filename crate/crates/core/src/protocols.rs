//! Time-switching and power-splitting cooperative transmission models.
//!
//! Both protocols reduce the relayed-path SNR at destination 1 to the same
//! rational form `γ1 = a X Y / (b X + c)` with `X = |h_r1|^2`,
//! `Y = |h_sr|^2` and `c = 1`; they differ only in the constants and in the
//! rate prefactor applied to `log2(1 + γ0 + γ1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::SystemConfig;

/// Time-switching parameter: fraction `rho` of the block spent harvesting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsParams {
    pub rho: f64,
}

impl TsParams {
    pub fn new(rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::invalid("rho", "0 ≤ ρ < 1"));
        }
        Ok(TsParams { rho })
    }
}

/// Power-splitting parameters: fraction of received power sent to the
/// harvester in each of the two source phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsParams {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl PsParams {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha1) {
            return Err(Error::invalid("alpha1", "0 ≤ α1 < 1"));
        }
        if !(0.0..1.0).contains(&alpha2) {
            return Err(Error::invalid("alpha2", "0 ≤ α2 < 1"));
        }
        Ok(PsParams { alpha1, alpha2 })
    }

    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Ts,
    Ps,
}

impl ProtocolKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::Ts => "ts",
            ProtocolKind::Ps => "ps",
        }
    }

    /// Protocol with its single tuning parameter set: `rho` for TS, or
    /// `alpha1 = alpha2 = value` for PS.
    pub fn with_parameter(&self, value: f64) -> Result<Protocol> {
        match self {
            ProtocolKind::Ts => Ok(Protocol::TimeSwitching(TsParams::new(value)?)),
            ProtocolKind::Ps => Ok(Protocol::PowerSplitting(PsParams::symmetric(value)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Protocol {
    TimeSwitching(TsParams),
    PowerSplitting(PsParams),
}

impl Protocol {
    pub fn kind(&self) -> ProtocolKind {
        match self {
            Protocol::TimeSwitching(_) => ProtocolKind::Ts,
            Protocol::PowerSplitting(_) => ProtocolKind::Ps,
        }
    }

    pub fn coefficients(&self, cfg: &SystemConfig) -> OutageCoefficients {
        match self {
            Protocol::TimeSwitching(p) => ts_coefficients(cfg, p),
            Protocol::PowerSplitting(p) => ps_coefficients(cfg, p),
        }
    }

    /// The protocol as seen by destination 2 (PS splitting factors swap).
    pub fn swapped_users(&self) -> Self {
        match *self {
            Protocol::TimeSwitching(p) => Protocol::TimeSwitching(p),
            Protocol::PowerSplitting(p) => Protocol::PowerSplitting(PsParams {
                alpha1: p.alpha2,
                alpha2: p.alpha1,
            }),
        }
    }

    /// Effective source powers on the S-R link (reduced by power splitting).
    fn relay_info_powers(&self, cfg: &SystemConfig) -> (f64, f64) {
        match self {
            Protocol::TimeSwitching(_) => (cfg.p1, cfg.p2),
            Protocol::PowerSplitting(p) => (cfg.p1 * (1.0 - p.alpha1), cfg.p2 * (1.0 - p.alpha2)),
        }
    }

    /// Relay power per unit `|h_sr|^2`.
    fn harvest_gain(&self, cfg: &SystemConfig) -> f64 {
        match self {
            Protocol::TimeSwitching(p) => 1.5 * p.rho / (1.0 - p.rho) * cfg.eta * (cfg.p1 + cfg.p2),
            Protocol::PowerSplitting(p) => cfg.eta * (p.alpha1 * cfg.p1 + p.alpha2 * cfg.p2),
        }
    }
}

/// Constants `{a, b, c, R0}` of the rational SNR form plus the rate
/// prefactor of the mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// SNR threshold equivalent to the target rate.
    pub r0: f64,
    pub rate_prefactor: f64,
}

impl OutageCoefficients {
    /// Whether the relayed path contributes any SNR at all.
    pub fn relay_active(&self) -> bool {
        self.a > 0.0 && self.b.is_finite()
    }
}

/// Threshold `2^(rt / prefactor) - 1`.
fn snr_threshold(rt: f64, rate_prefactor: f64) -> f64 {
    (rt / rate_prefactor).exp2() - 1.0
}

pub fn ts_coefficients(cfg: &SystemConfig, params: &TsParams) -> OutageCoefficients {
    let rho = params.rho;
    let theta1 = cfg.theta1;
    let theta2 = cfg.theta2();
    let rate_prefactor = 2.0 * (1.0 - rho) / 3.0;
    let a = 1.5 * rho / (1.0 - rho) * cfg.eta * (cfg.p1 + cfg.p2) * theta1;
    let b = if a == 0.0 {
        0.0
    } else {
        a / cfg.p2 + a * theta1 / (cfg.p1 * theta2)
    };
    OutageCoefficients {
        a,
        b,
        c: 1.0,
        r0: snr_threshold(cfg.rt, rate_prefactor),
        rate_prefactor,
    }
}

pub fn ps_coefficients(cfg: &SystemConfig, params: &PsParams) -> OutageCoefficients {
    let theta1 = cfg.theta1;
    let theta2 = cfg.theta2();
    let rate_prefactor = 2.0 / 3.0;
    let a = cfg.eta * (params.alpha1 * cfg.p1 + params.alpha2 * cfg.p2) * theta1;
    let b = if a == 0.0 {
        0.0
    } else {
        a / (cfg.p2 * (1.0 - params.alpha2))
            + a * theta1 / (theta2 * cfg.p1 * (1.0 - params.alpha1))
    };
    OutageCoefficients {
        a,
        b,
        c: 1.0,
        r0: snr_threshold(cfg.rt, rate_prefactor),
        rate_prefactor,
    }
}

/// Relayed-path SNR `a x_sr x_r1 / (b x_r1 + c)`.
pub fn instantaneous_relay_snr(coeffs: &OutageCoefficients, x_sr: f64, x_r1: f64) -> f64 {
    if coeffs.a == 0.0 {
        return 0.0;
    }
    coeffs.a * x_sr * x_r1 / (coeffs.b * x_r1 + coeffs.c)
}

/// Relayed-path SNR with the exact combining weights
/// `ξ_i = sqrt(θ_i / (P_i |h_sr|^2 + 1))` instead of the high-SNR
/// approximation the coefficient sets are built on.
pub fn instantaneous_relay_snr_exact(
    cfg: &SystemConfig,
    protocol: &Protocol,
    x_sr: f64,
    x_r1: f64,
) -> f64 {
    let gain = protocol.harvest_gain(cfg);
    if gain == 0.0 || x_sr == 0.0 {
        return 0.0;
    }
    let (q1, q2) = protocol.relay_info_powers(cfg);
    let w1 = cfg.theta1 / (q1 * x_sr + 1.0);
    let w2 = cfg.theta2() / (q2 * x_sr + 1.0);
    let relay_power = gain * x_sr;
    let signal = relay_power * x_r1 * w1 * q1 * x_sr;
    let noise = relay_power * x_r1 * (w1 + w2) + 1.0;
    signal / noise
}

/// `rate_prefactor * log2(1 + γ0 + γ1)`.
pub fn mutual_information(coeffs: &OutageCoefficients, gamma0: f64, gamma1: f64) -> f64 {
    coeffs.rate_prefactor * (gamma0 + gamma1).ln_1p() / std::f64::consts::LN_2
}

/// Relay transmit power for a given `|h_sr|^2`.
pub fn relay_transmit_power(cfg: &SystemConfig, protocol: &Protocol, x_sr: f64) -> f64 {
    protocol.harvest_gain(cfg) * x_sr
}

/// Relay combining weight `ξ_i`, exact (`sqrt(θ/(P x + 1))`) or approximate
/// (`sqrt(θ/(P x))`).
pub fn combining_weight(theta_i: f64, p_i: f64, x_sr: f64, exact: bool) -> Result<f64> {
    if !(theta_i > 0.0 && theta_i < 1.0) {
        return Err(Error::Domain(format!(
            "θ must lie in (0, 1), got {theta_i}"
        )));
    }
    if !(p_i > 0.0) {
        return Err(Error::Domain(format!("power must be > 0, got {p_i}")));
    }
    if exact {
        if x_sr < 0.0 {
            return Err(Error::Domain("channel power must be >= 0".into()));
        }
        Ok((theta_i / (p_i * x_sr + 1.0)).sqrt())
    } else {
        if !(x_sr > 0.0) {
            return Err(Error::Domain(
                "approximate combining weight needs |h_sr|^2 > 0".into(),
            ));
        }
        Ok((theta_i / (p_i * x_sr)).sqrt())
    }
}
