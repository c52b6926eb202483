//! Offline search for the outage-minimizing protocol parameter and the
//! power and relay-distance sweeps built on it.
//!
//! The objective is the quadrature outage (smooth, no truncation effects).
//! The optimum found is re-evaluated with the series form as a cross-check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    outage_closed_form, outage_noncooperative, outage_quadrature, SeriesPolicy,
};
use crate::error::{Error, Result};
use crate::network::{
    db_to_linear, mean_channel_gains, ChannelGains, SystemConfig, Topology, Triangle,
};
use crate::protocols::ProtocolKind;
use crate::specfun::QuadratureSpec;

/// Search interval for ρ and α.
pub const PARAM_LO: f64 = 0.001;
pub const PARAM_HI: f64 = 0.999;

pub const DEFAULT_GRID_POINTS: usize = 256;
pub const DEFAULT_GOLDEN_TOL: f64 = 1e-4;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    /// Exhaustive evaluation on an evenly spaced grid.
    Grid { points: usize },
    /// Golden-section search; assumes the objective is unimodal.
    Golden { tol: f64 },
}

impl Default for SearchMethod {
    fn default() -> Self {
        SearchMethod::Grid {
            points: DEFAULT_GRID_POINTS,
        }
    }
}

impl SearchMethod {
    pub fn golden() -> Self {
        SearchMethod::Golden {
            tol: DEFAULT_GOLDEN_TOL,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SearchMethod::Grid { .. } => "grid",
            SearchMethod::Golden { .. } => "golden",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SearchMethod::Grid { points } if points < 32 => Err(Error::invalid(
                "resolution",
                "grid search needs at least 32 points",
            )),
            SearchMethod::Golden { tol } if !(tol > 0.0 && tol <= 1e-4) => Err(Error::invalid(
                "resolution",
                "golden-section tolerance must lie in (0, 1e-4]",
            )),
            _ => Ok(()),
        }
    }
}

/// Numerical settings shared by optimization and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub method: SearchMethod,
    pub quadrature: QuadratureSpec,
    pub series: SeriesPolicy,
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        self.method.validate()?;
        self.quadrature.validate()?;
        self.series.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub protocol: ProtocolKind,
    /// Minimizing ρ (TS) or α (PS).
    pub param: f64,
    /// Quadrature outage at `param`.
    pub p_star: f64,
    /// Series-form outage at `param`; `None` when the series does not
    /// converge within the policy's term budget.
    pub p_closed_form: Option<f64>,
    /// Every `(parameter, outage)` pair the search evaluated, in order.
    pub samples: Vec<(f64, f64)>,
}

/// Quadrature outage of one protocol at a given parameter value.
pub fn objective(
    kind: ProtocolKind,
    cfg: &SystemConfig,
    gains: &ChannelGains,
    param: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let coeffs = kind.with_parameter(param)?.coefficients(cfg);
    Ok(outage_quadrature(&coeffs, gains, cfg.p1, spec)?.p)
}

fn grid_search<F>(f: F, points: usize) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    let step = (PARAM_HI - PARAM_LO) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let x = if i == points - 1 {
                PARAM_HI
            } else {
                PARAM_LO + step * i as f64
            };
            f(x).map(|v| (x, v))
        })
        .collect()
}

fn golden_search<F>(f: F, tol: f64) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut samples = Vec::new();
    let mut eval = |x: f64| -> Result<f64> {
        let v = f(x)?;
        samples.push((x, v));
        Ok(v)
    };
    let (mut lo, mut hi) = (PARAM_LO, PARAM_HI);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = eval(x2)?;
        }
    }
    eval(0.5 * (lo + hi))?;
    Ok(samples)
}

/// Smallest objective among the samples; ties go to the smaller parameter.
fn best_sample(samples: &[(f64, f64)]) -> (f64, f64) {
    samples
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, s| {
            if s.1 < best.1 || (s.1 == best.1 && s.0 < best.0) {
                s
            } else {
                best
            }
        })
}

/// Minimizes the outage of `kind` over its parameter on `[0.001, 0.999]`.
pub fn optimize(
    kind: ProtocolKind,
    cfg: &SystemConfig,
    gains: &ChannelGains,
    settings: &OptimizerSettings,
) -> Result<Optimum> {
    settings.validate()?;
    cfg.validate()?;
    let f = |x: f64| objective(kind, cfg, gains, x, &settings.quadrature);
    let samples = match settings.method {
        SearchMethod::Grid { points } => grid_search(f, points)?,
        SearchMethod::Golden { tol } => golden_search(f, tol)?,
    };
    let (param, p_star) = best_sample(&samples);
    let coeffs = kind.with_parameter(param)?.coefficients(cfg);
    let p_closed_form = match outage_closed_form(
        &coeffs,
        gains,
        cfg.p1,
        &settings.series,
        &settings.quadrature,
    ) {
        Ok(est) => Some(est.p),
        Err(Error::SeriesConvergence { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(Optimum {
        protocol: kind,
        param,
        p_star,
        p_closed_form,
        samples,
    })
}

pub fn optimize_ts(
    cfg: &SystemConfig,
    gains: &ChannelGains,
    settings: &OptimizerSettings,
) -> Result<Optimum> {
    optimize(ProtocolKind::Ts, cfg, gains, settings)
}

pub fn optimize_ps(
    cfg: &SystemConfig,
    gains: &ChannelGains,
    settings: &OptimizerSettings,
) -> Result<Optimum> {
    optimize(ProtocolKind::Ps, cfg, gains, settings)
}

/// Optimal outages and parameters along one swept axis. A `None` entry marks
/// a cell that could not be evaluated (for example an unrealizable relay
/// position).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis_values: Vec<f64>,
    pub outage_ts_opt: Vec<Option<f64>>,
    pub outage_ps_opt: Vec<Option<f64>>,
    pub outage_baseline: Vec<Option<f64>>,
    pub rho_opt: Vec<Option<f64>>,
    pub alpha_opt: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, Default)]
struct SweepCell {
    outage_ts: Option<f64>,
    outage_ps: Option<f64>,
    baseline: Option<f64>,
    rho: Option<f64>,
    alpha: Option<f64>,
}

impl SweepResult {
    fn assemble(axis_name: &str, axis_values: &[f64], cells: Vec<SweepCell>) -> Self {
        SweepResult {
            axis_name: axis_name.to_string(),
            axis_values: axis_values.to_vec(),
            outage_ts_opt: cells.iter().map(|c| c.outage_ts).collect(),
            outage_ps_opt: cells.iter().map(|c| c.outage_ps).collect(),
            outage_baseline: cells.iter().map(|c| c.baseline).collect(),
            rho_opt: cells.iter().map(|c| c.rho).collect(),
            alpha_opt: cells.iter().map(|c| c.alpha).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.axis_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis_values.is_empty()
    }
}

fn evaluate_cell(
    cfg: &SystemConfig,
    topology: &Topology,
    settings: &OptimizerSettings,
) -> Result<SweepCell> {
    topology.validate()?;
    let gains = mean_channel_gains(topology, cfg.m);
    let ts = optimize_ts(cfg, &gains, settings)?;
    let ps = optimize_ps(cfg, &gains, settings)?;
    let baseline = outage_noncooperative(cfg.p1, gains.omega_s1, cfg.rt)?;
    Ok(SweepCell {
        outage_ts: Some(ts.p_star),
        outage_ps: Some(ps.p_star),
        baseline: Some(baseline.p),
        rho: Some(ts.param),
        alpha: Some(ps.param),
    })
}

/// Optimal outage against source power, `P1 = P2 = 10^(dB/10)`.
pub fn sweep_power(
    cfg_template: &SystemConfig,
    topology: &Topology,
    ps_grid_db: &[f64],
    settings: &OptimizerSettings,
) -> Result<SweepResult> {
    settings.validate()?;
    let cells = ps_grid_db
        .par_iter()
        .map(|&db| {
            let ps = db_to_linear(db);
            let cfg = SystemConfig {
                p1: ps,
                p2: ps,
                ..*cfg_template
            };
            evaluate_cell(&cfg, topology, settings)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::assemble("ps_db", ps_grid_db, cells))
}

/// Optimal outage against the source-relay distance, the relay moving along
/// the altitude of `triangle`. Unrealizable positions yield empty cells.
pub fn sweep_distance(
    cfg: &SystemConfig,
    triangle: &Triangle,
    d_sr_grid: &[f64],
    settings: &OptimizerSettings,
) -> Result<SweepResult> {
    settings.validate()?;
    cfg.validate()?;
    let cells = d_sr_grid
        .par_iter()
        .map(|&d_sr| match triangle.place_relay(d_sr) {
            Ok(topology) => evaluate_cell(cfg, &topology, settings),
            Err(Error::Geometry(_)) | Err(Error::UnsupportedGeometry(_)) => {
                Ok(SweepCell::default())
            }
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::assemble("d_sr", d_sr_grid, cells))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_gains(d_sr: f64) -> ChannelGains {
        let t = Triangle::default().place_relay(d_sr).unwrap();
        mean_channel_gains(&t, 4.0)
    }

    #[test]
    fn best_sample_breaks_ties_low() {
        let s = [(0.3, 0.2), (0.1, 0.2), (0.5, 0.4)];
        assert_eq!(best_sample(&s), (0.1, 0.2));
    }

    #[test]
    fn grid_covers_interval() {
        let s = grid_search(Ok, 32).unwrap();
        assert_eq!(s.len(), 32);
        assert_eq!(s[0].0, PARAM_LO);
        assert_eq!(s[31].0, PARAM_HI);
    }

    #[test]
    fn golden_finds_quadratic_minimum() {
        let s = golden_search(|x| Ok((x - 0.37) * (x - 0.37)), 1e-6).unwrap();
        let (x, _) = best_sample(&s);
        assert!((x - 0.37).abs() < 1e-6);
    }

    #[test]
    fn resolution_limits() {
        assert!(SearchMethod::Grid { points: 16 }.validate().is_err());
        assert!(SearchMethod::Golden { tol: 1e-3 }.validate().is_err());
        assert!(SearchMethod::golden().validate().is_ok());
    }

    #[test]
    fn vanishing_power_saturates_outage() {
        let cfg = SystemConfig {
            p1: 1e-6,
            p2: 1e-6,
            ..Default::default()
        };
        let settings = OptimizerSettings {
            method: SearchMethod::Grid { points: 32 },
            ..Default::default()
        };
        let opt = optimize_ts(&cfg, &default_gains(0.5), &settings).unwrap();
        assert!(opt.p_star > 0.999);
    }

    #[test]
    fn optimum_dominates_samples() {
        let cfg = SystemConfig::default();
        let settings = OptimizerSettings {
            method: SearchMethod::Grid { points: 64 },
            ..Default::default()
        };
        let opt = optimize_ps(&cfg, &default_gains(0.5), &settings).unwrap();
        assert!(opt.samples.iter().all(|s| opt.p_star <= s.1));
        let cf = opt.p_closed_form.unwrap();
        assert!(((cf - opt.p_star) / opt.p_star).abs() < 1e-5);
    }

    #[test]
    fn distance_sweep_marks_unrealizable_cells() {
        let settings = OptimizerSettings {
            method: SearchMethod::Grid { points: 32 },
            ..Default::default()
        };
        let r = sweep_distance(
            &SystemConfig::default(),
            &Triangle::default(),
            &[0.5, 5.0],
            &settings,
        )
        .unwrap();
        assert!(r.outage_ts_opt[0].is_some());
        assert!(r.outage_ts_opt[1].is_none());
        assert!(r.alpha_opt[1].is_none());
        assert_eq!(r.len(), 2);
    }
}
