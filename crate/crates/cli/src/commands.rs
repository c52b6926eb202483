use ehrelay_core::montecarlo::estimate_outage;
use ehrelay_core::network::mean_channel_gains;
use ehrelay_core::optimizer::{optimize, sweep_distance, sweep_power};
use ehrelay_core::{outage_closed_form, outage_quadrature, ChannelGains};

use crate::config::{parse_grid, Axis, Placement, ProtocolChoice, Resolved};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};

/// Largest accepted `|closed_form - quadrature| / quadrature`.
pub const CLOSED_FORM_REL_TOL: f64 = 1e-5;
/// Monte Carlo must land within this many standard errors of quadrature.
pub const MC_SIGMAS: f64 = 4.0;

pub const VERIFY_COLUMNS: [&str; 7] = [
    "protocol",
    "parameter",
    "closed_form",
    "quadrature",
    "monte_carlo",
    "mc_stderr",
    "agree",
];
pub const SWEEP_COLUMNS: [&str; 6] = [
    "axis",
    "pout_ts",
    "pout_ps",
    "pout_baseline",
    "rho_opt",
    "alpha_opt",
];
pub const OPTIMIZE_COLUMNS: [&str; 5] = [
    "protocol",
    "param_star",
    "pout_star",
    "pout_closed_form",
    "method",
];

/// A rendered table plus the number of rows that failed their check.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub failures: usize,
}

fn gains(r: &Resolved) -> CliResult<ChannelGains> {
    Ok(mean_channel_gains(&r.placement.topology()?, r.system.m))
}

/// Closed form, quadrature and Monte Carlo outage over a grid of the
/// protocol parameter, with a pass/fail flag per point.
pub fn cmd_verify(r: &Resolved) -> CliResult<Report> {
    let grid = match &r.grid {
        Some(g) => g.clone(),
        None => parse_grid("0.1:0.9:0.1")?,
    };
    let g = gains(r)?;
    let mut table = Table::new(VERIFY_COLUMNS.to_vec());
    let mut failures = 0;
    for kind in r.protocol.kinds() {
        for &x in &grid {
            let coeffs = kind.with_parameter(x)?.coefficients(&r.system);
            let cf = outage_closed_form(
                &coeffs,
                &g,
                r.system.p1,
                &r.settings.series,
                &r.settings.quadrature,
            )
            .ok()
            .map(|e| e.p);
            let q = outage_quadrature(&coeffs, &g, r.system.p1, &r.settings.quadrature)
                .ok()
                .map(|e| e.p);
            let mc = estimate_outage(&r.system, &g, &coeffs, &r.mc)?;
            let agree = match (cf, q) {
                (Some(cf), Some(q)) => {
                    (cf - q).abs() <= CLOSED_FORM_REL_TOL * q && mc.agrees_with(q, MC_SIGMAS)
                }
                _ => false,
            };
            if !agree {
                failures += 1;
            }
            table.push(vec![
                Cell::Text(kind.name().into()),
                Cell::Num(Some(x)),
                Cell::Num(cf),
                Cell::Num(q),
                Cell::Num(Some(mc.p)),
                Cell::Num(Some(mc.stderr)),
                Cell::Bool(agree),
            ]);
        }
    }
    Ok(Report { table, failures })
}

/// Optimal outage of both protocols and the baseline along the power (dB)
/// or relay-distance axis. Columns of an unselected protocol are left empty.
pub fn cmd_sweep(r: &Resolved) -> CliResult<Report> {
    let axis = r
        .axis
        .ok_or_else(|| CliError::Validation("sweep needs --axis power|distance".into()))?;
    let grid = match (&r.grid, axis) {
        (Some(g), _) => g.clone(),
        (None, Axis::Power) => parse_grid("0:30:5")?,
        (None, Axis::Distance) => parse_grid("0.3:0.8:0.1")?,
    };
    let result = match axis {
        Axis::Power => sweep_power(&r.system, &r.placement.topology()?, &grid, &r.settings)?,
        Axis::Distance => match r.placement {
            Placement::OnAltitude { triangle, .. } => {
                sweep_distance(&r.system, &triangle, &grid, &r.settings)?
            }
            Placement::Explicit(_) => {
                return Err(CliError::Validation(
                    "distance sweep places the relay itself; drop d_r1/d_r2".into(),
                ))
            }
        },
    };
    let ts = r.protocol != ProtocolChoice::Ps;
    let ps = r.protocol != ProtocolChoice::Ts;
    let keep = |on: bool, v: Option<f64>| Cell::Num(v.filter(|_| on));
    let mut table = Table::new(SWEEP_COLUMNS.to_vec());
    for i in 0..result.len() {
        table.push(vec![
            Cell::Num(Some(result.axis_values[i])),
            keep(ts, result.outage_ts_opt[i]),
            keep(ps, result.outage_ps_opt[i]),
            Cell::Num(result.outage_baseline[i]),
            keep(ts, result.rho_opt[i]),
            keep(ps, result.alpha_opt[i]),
        ]);
    }
    Ok(Report { table, failures: 0 })
}

/// Optimal parameter and outage of the selected protocols at the configured
/// operating point.
pub fn cmd_optimize(r: &Resolved) -> CliResult<Report> {
    let g = gains(r)?;
    let mut table = Table::new(OPTIMIZE_COLUMNS.to_vec());
    for kind in r.protocol.kinds() {
        let opt = optimize(kind, &r.system, &g, &r.settings)?;
        table.push(vec![
            Cell::Text(kind.name().into()),
            Cell::Num(Some(opt.param)),
            Cell::Num(Some(opt.p_star)),
            Cell::Num(opt.p_closed_form),
            Cell::Text(r.settings.method.name().into()),
        ]);
    }
    Ok(Report { table, failures: 0 })
}
