//! Run configuration: a flat JSON object whose fields may be overridden by
//! command-line flags. Every field is optional and falls back to the default
//! operating point (`Rt = 1`, `η = 1`, `m = 4`, unit isosceles triangle with
//! the relay at `d_sr = 0.5`, `P1 = P2 = 1`).

use std::fs;
use std::path::{Path, PathBuf};

use ehrelay_core::montecarlo::McRunSpec;
use ehrelay_core::network::{db_to_linear, SystemConfig, Topology, Triangle};
use ehrelay_core::optimizer::{
    OptimizerSettings, SearchMethod, DEFAULT_GOLDEN_TOL, DEFAULT_GRID_POINTS,
};
use ehrelay_core::protocols::ProtocolKind;
use ehrelay_core::{QuadratureSpec, SeriesPolicy};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolChoice {
    Ts,
    Ps,
    Both,
}

impl ProtocolChoice {
    pub fn kinds(&self) -> Vec<ProtocolKind> {
        match self {
            ProtocolChoice::Ts => vec![ProtocolKind::Ts],
            ProtocolChoice::Ps => vec![ProtocolKind::Ps],
            ProtocolChoice::Both => vec![ProtocolKind::Ts, ProtocolKind::Ps],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Power,
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Grid,
    Golden,
}

/// The configuration file as written; `None` means "use the default".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    /// Sets `P1 = P2 = 10^(ps_db/10)`.
    pub ps_db: Option<f64>,
    pub eta: Option<f64>,
    pub m: Option<f64>,
    pub rt: Option<f64>,
    pub theta1: Option<f64>,

    pub d_s1: Option<f64>,
    pub d_s2: Option<f64>,
    pub d_12: Option<f64>,
    pub d_sr: Option<f64>,
    /// Explicit relay-destination distances; when both are absent the relay
    /// is placed on the triangle altitude at `d_sr`.
    pub d_r1: Option<f64>,
    pub d_r2: Option<f64>,

    pub protocol: Option<ProtocolChoice>,

    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
    pub n_streams: Option<usize>,

    pub max_terms: Option<usize>,
    pub term_rel_tol: Option<f64>,

    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,

    pub method: Option<MethodChoice>,
    pub grid_points: Option<usize>,
    pub golden_tol: Option<f64>,

    pub axis: Option<Axis>,
    /// `start:stop:step`, inclusive of `stop`.
    pub grid: Option<String>,

    pub output_path: Option<PathBuf>,
    pub output_format: Option<Format>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub axis: Option<Axis>,
    pub grid: Option<String>,
    pub protocol: Option<ProtocolChoice>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.axis.is_some() {
            self.axis = o.axis;
        }
        if o.grid.is_some() {
            self.grid.clone_from(&o.grid);
        }
        if o.protocol.is_some() {
            self.protocol = o.protocol;
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.samples.is_some() {
            self.n_samples = o.samples;
        }
        if o.out.is_some() {
            self.output_path.clone_from(&o.out);
        }
        if o.format.is_some() {
            self.output_format = o.format;
        }
    }

    pub fn resolve(&self) -> CliResult<Resolved> {
        let defaults = SystemConfig::default();
        if self.ps_db.is_some() && (self.p1.is_some() || self.p2.is_some()) {
            return Err(invalid("ps_db", "give either ps_db or p1/p2, not both"));
        }
        let (p1, p2) = match self.ps_db {
            Some(db) if db.is_finite() => (db_to_linear(db), db_to_linear(db)),
            Some(_) => return Err(invalid("ps_db", "must be finite")),
            None => (
                self.p1.unwrap_or(defaults.p1),
                self.p2.unwrap_or(defaults.p2),
            ),
        };
        let system = SystemConfig {
            p1,
            p2,
            eta: self.eta.unwrap_or(defaults.eta),
            m: self.m.unwrap_or(defaults.m),
            rt: self.rt.unwrap_or(defaults.rt),
            theta1: self.theta1.unwrap_or(defaults.theta1),
        };
        system.validate()?;

        let tri = Triangle::default();
        let triangle = Triangle {
            d_s1: self.d_s1.unwrap_or(tri.d_s1),
            d_s2: self.d_s2.unwrap_or(tri.d_s2),
            d_12: self.d_12.unwrap_or(tri.d_12),
        };
        let d_sr = self.d_sr.unwrap_or(0.5);
        let placement = match (self.d_r1, self.d_r2) {
            (None, None) => Placement::OnAltitude { triangle, d_sr },
            (Some(d_r1), Some(d_r2)) => {
                let t = Topology {
                    d_s1: triangle.d_s1,
                    d_s2: triangle.d_s2,
                    d_12: triangle.d_12,
                    d_sr,
                    d_r1,
                    d_r2,
                };
                t.validate()?;
                Placement::Explicit(t)
            }
            _ => return Err(invalid("d_r1", "d_r1 and d_r2 must be given together")),
        };

        let mc = McRunSpec {
            n_samples: self.n_samples.unwrap_or(McRunSpec::default().n_samples),
            seed: self.seed.unwrap_or(McRunSpec::default().seed),
            n_streams: self.n_streams.unwrap_or(McRunSpec::default().n_streams),
        };
        mc.validate()?;

        let q = QuadratureSpec::default();
        let quadrature = QuadratureSpec {
            abs_tol: self.abs_tol.unwrap_or(q.abs_tol),
            rel_tol: self.rel_tol.unwrap_or(q.rel_tol),
            max_subdivisions: self.max_subdivisions.unwrap_or(q.max_subdivisions),
        };
        let s = SeriesPolicy::default();
        let series = SeriesPolicy {
            max_terms: self.max_terms.unwrap_or(s.max_terms),
            term_rel_tol: self.term_rel_tol.unwrap_or(s.term_rel_tol),
        };
        let method = match self.method.unwrap_or(MethodChoice::Grid) {
            MethodChoice::Grid => SearchMethod::Grid {
                points: self.grid_points.unwrap_or(DEFAULT_GRID_POINTS),
            },
            MethodChoice::Golden => SearchMethod::Golden {
                tol: self.golden_tol.unwrap_or(DEFAULT_GOLDEN_TOL),
            },
        };
        let settings = OptimizerSettings {
            method,
            quadrature,
            series,
        };
        settings.validate()?;

        let grid = self.grid.as_deref().map(parse_grid).transpose()?;

        Ok(Resolved {
            system,
            placement,
            protocol: self.protocol.unwrap_or(ProtocolChoice::Both),
            mc,
            settings,
            axis: self.axis,
            grid,
            output_path: self.output_path.clone(),
            format: self.output_format.unwrap_or_default(),
        })
    }
}

fn invalid(field: &str, message: &str) -> CliError {
    CliError::Validation(format!("invalid parameter `{field}`: {message}"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    OnAltitude { triangle: Triangle, d_sr: f64 },
    Explicit(Topology),
}

impl Placement {
    pub fn topology(&self) -> CliResult<Topology> {
        match self {
            Placement::OnAltitude { triangle, d_sr } => Ok(triangle.place_relay(*d_sr)?),
            Placement::Explicit(t) => Ok(*t),
        }
    }
}

/// A fully defaulted and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub system: SystemConfig,
    pub placement: Placement,
    pub protocol: ProtocolChoice,
    pub mc: McRunSpec,
    pub settings: OptimizerSettings,
    pub axis: Option<Axis>,
    pub grid: Option<Vec<f64>>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

const MAX_GRID_POINTS: usize = 100_000;

/// Parses `start:stop:step` into the inclusive arithmetic progression.
/// Points are rounded to 12 significant digits so `0.1 * 3` prints as `0.3`.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(invalid("grid", "expected start:stop:step"));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| invalid("grid", &format!("`{s}` is not a finite number")))
    };
    let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if step.is_nan() || step <= 0.0 {
        return Err(invalid("grid", "step must be > 0"));
    }
    if stop < start {
        return Err(invalid("grid", "stop must be >= start"));
    }
    let span = (stop - start) / step;
    if span >= MAX_GRID_POINTS as f64 {
        return Err(invalid("grid", "too many points"));
    }
    let count = (span + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| crate::output::round_sig(start + step * i as f64))
        .collect())
}
