//! System configuration, node geometry and mean channel gains.
//!
//! Every link is Rayleigh faded: the channel power `|h|^2` is exponential with
//! mean `Ω = d^(-m)`. Noise variances are 1 and the block duration is 1, so
//! source powers double as transmit SNRs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Powers, efficiency, target rate, combining weight and path-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Source power for `x1` (linear, noise-normalized).
    pub p1: f64,
    /// Source power for `x2`.
    pub p2: f64,
    /// Energy conversion efficiency, `0 < eta <= 1`.
    pub eta: f64,
    /// Path-loss exponent, `m >= 2`.
    pub m: f64,
    /// Target rate in bit/s/Hz.
    pub rt: f64,
    /// Relay combining weight for user 1; user 2 gets `1 - theta1`.
    pub theta1: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            p1: 1.0,
            p2: 1.0,
            eta: 1.0,
            m: 4.0,
            rt: 1.0,
            theta1: 0.5,
        }
    }
}

impl SystemConfig {
    /// Default configuration with `P1 = P2 = 10^(ps_db/10)`.
    pub fn with_ps_db(ps_db: f64) -> Self {
        let ps = db_to_linear(ps_db);
        SystemConfig {
            p1: ps,
            p2: ps,
            ..Default::default()
        }
    }

    pub fn theta2(&self) -> f64 {
        1.0 - self.theta1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p1 >= 0.0 && self.p1.is_finite()) {
            return Err(Error::invalid("p1", "must be finite and >= 0"));
        }
        if !(self.p2 >= 0.0 && self.p2.is_finite()) {
            return Err(Error::invalid("p2", "must be finite and >= 0"));
        }
        if self.p1 == 0.0 && self.p2 == 0.0 {
            return Err(Error::invalid("p1", "p1 and p2 must not both be zero"));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::invalid("eta", "0 < η ≤ 1"));
        }
        if !(self.m >= 2.0 && self.m.is_finite()) {
            return Err(Error::invalid("m", "path-loss exponent must satisfy m ≥ 2"));
        }
        if !(self.rt > 0.0 && self.rt.is_finite()) {
            return Err(Error::invalid("rt", "target rate must be > 0"));
        }
        if !(self.theta1 > 0.0 && self.theta1 < 1.0) {
            return Err(Error::invalid("theta1", "0 < θ1 < 1"));
        }
        Ok(())
    }

    /// The same network seen from destination 2: powers and weights swap.
    pub fn swapped_users(&self) -> Self {
        SystemConfig {
            p1: self.p2,
            p2: self.p1,
            theta1: self.theta2(),
            ..*self
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Node distances (normalized units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub d_s1: f64,
    pub d_s2: f64,
    /// Separation of the two destinations.
    pub d_12: f64,
    pub d_sr: f64,
    pub d_r1: f64,
    pub d_r2: f64,
}

impl Topology {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("d_s1", self.d_s1),
            ("d_s2", self.d_s2),
            ("d_12", self.d_12),
            ("d_sr", self.d_sr),
            ("d_r1", self.d_r1),
            ("d_r2", self.d_r2),
        ];
        for (name, d) in fields {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::invalid(name, "distances must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// Length of the altitude from S onto the destination baseline of the
/// isosceles triangle S-D1-D2.
pub fn triangle_height(d_s1: f64, d_12: f64) -> f64 {
    (d_s1 * d_s1 - 0.25 * d_12 * d_12).sqrt()
}

/// Places the relay on the altitude from S to the midpoint of D1-D2, at
/// distance `d_sr` from the source.
///
/// Requires an isosceles triangle (`d_s1 == d_s2`). The relay may sit past the
/// baseline, up to `d_s1 + height` from the source.
pub fn place_relay_on_height(d_sr: f64, d_s1: f64, d_s2: f64, d_12: f64) -> Result<Topology> {
    for (name, d) in [
        ("d_sr", d_sr),
        ("d_s1", d_s1),
        ("d_s2", d_s2),
        ("d_12", d_12),
    ] {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Geometry(format!(
                "{name} must be finite and > 0, got {d}"
            )));
        }
    }
    if (d_s1 - d_s2).abs() > 1e-12 * d_s1.max(d_s2) {
        return Err(Error::UnsupportedGeometry(format!(
            "relay placement needs d_s1 == d_s2, got {d_s1} and {d_s2}"
        )));
    }
    if d_12 >= 2.0 * d_s1 {
        return Err(Error::Geometry(format!(
            "degenerate triangle: d_12 = {d_12} >= 2 d_s1 = {}",
            2.0 * d_s1
        )));
    }
    let height = triangle_height(d_s1, d_12);
    if d_sr >= d_s1 + height {
        return Err(Error::Geometry(format!(
            "d_sr = {d_sr} must be below d_s1 + height = {}",
            d_s1 + height
        )));
    }
    let along = height - d_sr;
    let d_r = (along * along + 0.25 * d_12 * d_12).sqrt();
    Ok(Topology {
        d_s1,
        d_s2,
        d_12,
        d_sr,
        d_r1: d_r,
        d_r2: d_r,
    })
}

/// The source and destination triangle the relay is placed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub d_s1: f64,
    pub d_s2: f64,
    pub d_12: f64,
}

impl Default for Triangle {
    fn default() -> Self {
        Triangle {
            d_s1: 1.0,
            d_s2: 1.0,
            d_12: 1.0,
        }
    }
}

impl Triangle {
    pub fn height(&self) -> f64 {
        triangle_height(self.d_s1, self.d_12)
    }

    pub fn place_relay(&self, d_sr: f64) -> Result<Topology> {
        place_relay_on_height(d_sr, self.d_s1, self.d_s2, self.d_12)
    }
}

/// Mean-square channel coefficients `Ω = d^(-m)` of every link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains {
    pub omega_sr: f64,
    pub omega_s1: f64,
    pub omega_s2: f64,
    pub omega_r1: f64,
    pub omega_r2: f64,
}

impl ChannelGains {
    /// Gains seen from destination 2.
    pub fn swapped_users(&self) -> Self {
        ChannelGains {
            omega_s1: self.omega_s2,
            omega_s2: self.omega_s1,
            omega_r1: self.omega_r2,
            omega_r2: self.omega_r1,
            ..*self
        }
    }
}

pub fn mean_channel_gains(topology: &Topology, m: f64) -> ChannelGains {
    let gain = |d: f64| d.powf(-m);
    ChannelGains {
        omega_sr: gain(topology.d_sr),
        omega_s1: gain(topology.d_s1),
        omega_s2: gain(topology.d_s2),
        omega_r1: gain(topology.d_r1),
        omega_r2: gain(topology.d_r2),
    }
}
