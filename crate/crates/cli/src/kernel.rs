use serde::Serialize;
use spinning_zeta::expansion::{kernel_diagonal, ExpansionConfig};
use spinning_zeta::kernel_terms::Momentum2;

use crate::config::{Format, RunConfig};
use crate::output::{csv_number, Header, GRID_COLUMNS, GRID_SCHEMA};
use crate::{CliError, Outcome, Status};

/// One grid node. Orders the config does not include are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelRow {
    pub p1: f64,
    pub p2: f64,
    pub t: f64,
    pub order0: f64,
    pub order2: Option<f64>,
    pub order3_value: Option<f64>,
    pub order3_error: Option<f64>,
    pub converged: bool,
}

pub fn expansion_config(cfg: &RunConfig) -> ExpansionConfig {
    ExpansionConfig {
        order: cfg.order,
        mass: cfg.mass,
        mass_sign: cfg.mass_sign,
        lambda: cfg.lambda,
        t_max: cfg.t_max,
        rel_tol: cfg.tol_rel.unwrap_or(1e-9),
        abs_tol: cfg.tol_abs.unwrap_or(1e-14),
        order3_tol: cfg.order3_tol,
        seed: cfg.seed,
    }
}

/// Nodes in p1-major, then p2, then t order.
pub fn grid(cfg: &RunConfig) -> Result<Vec<KernelRow>, CliError> {
    let ecfg = expansion_config(cfg);
    let mut rows = Vec::new();
    for &p1 in &cfg.p1.0 {
        for &p2 in &cfg.p2.0 {
            for &t in &cfg.t.0 {
                let k = kernel_diagonal(Momentum2::new(p1, p2), t, &ecfg)?;
                let v: Vec<f64> = k.order_values.iter().map(|x| x + 0.0).collect();
                rows.push(KernelRow {
                    p1,
                    p2,
                    t,
                    order0: v[0],
                    order2: v.get(2).copied(),
                    order3_value: v.get(3).copied(),
                    order3_error: (v.len() > 3).then_some(k.order3_error),
                    converged: k.converged,
                });
            }
        }
    }
    Ok(rows)
}

fn csv(rows: &[KernelRow]) -> String {
    let mut out = Header::new(GRID_SCHEMA).csv_line();
    out.push('\n');
    out.push_str(&GRID_COLUMNS.join(","));
    out.push('\n');
    let opt = |v: Option<f64>| v.map(csv_number).unwrap_or_default();
    for r in rows {
        let fields = [
            csv_number(r.p1),
            csv_number(r.p2),
            csv_number(r.t),
            csv_number(r.order0),
            opt(r.order2),
            opt(r.order3_value),
            opt(r.order3_error),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn jsonl(rows: &[KernelRow]) -> String {
    let mut out = Header::new(GRID_SCHEMA).json_line();
    out.push('\n');
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("rows serialize"));
        out.push('\n');
    }
    out
}

/// Non-converged nodes are reported on stderr and the run continues; with
/// `strict` they set exit status 3.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rows = grid(cfg)?;
    let notes: Vec<String> = rows
        .iter()
        .filter(|r| !r.converged)
        .map(|r| format!("node p1={} p2={} t={} did not converge", r.p1, r.p2, r.t))
        .collect();
    let status = if cfg.strict && !notes.is_empty() { Status::NonConverged } else { Status::Pass };
    let body = match cfg.format {
        Format::Csv => csv(&rows),
        Format::Json => jsonl(&rows),
    };
    Ok(Outcome { body, status, notes })
}
