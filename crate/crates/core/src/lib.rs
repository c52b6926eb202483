//! Outage analysis of a two-destination network helped by an
//! energy-harvesting amplify-and-forward relay.
//!
//! The relay harvests energy from the source either by time switching (TS) or
//! by power splitting (PS), then forwards a weighted combination of the two
//! users' signals. Destination outage is computed three ways:
//!
//! * [`analytics::outage_closed_form`]: series expansion integrated term by term,
//! * [`analytics::outage_quadrature`]: direct quadrature of the outage integral,
//! * [`montecarlo::estimate_outage`]: Rayleigh-fading simulation.
//!
//! [`optimizer`] searches the protocol parameter (ρ or α) that minimizes
//! outage and runs the power and relay-distance sweeps.

// `!(x > 0.0)` also rejects NaN; tabulated constants keep their published digits
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analytics;
pub mod error;
pub mod montecarlo;
pub mod network;
pub mod optimizer;
pub mod protocols;
pub mod specfun;

pub use analytics::{
    cdf_z, outage_closed_form, outage_noncooperative, outage_quadrature, SeriesPolicy,
};
pub use error::{Error, Result};
pub use montecarlo::{estimate_outage, EstimateMethod, McRunSpec, OutageEstimate};
pub use network::{
    mean_channel_gains, place_relay_on_height, ChannelGains, SystemConfig, Topology, Triangle,
};
pub use optimizer::{OptimizerSettings, Optimum, SearchMethod, SweepResult};
pub use protocols::{OutageCoefficients, Protocol, ProtocolKind, PsParams, TsParams};
pub use specfun::QuadratureSpec;
