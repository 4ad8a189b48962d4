use serde::Serialize;
use spinning_zeta::expansion::{zeta_density, MassSign};

use crate::config::{Format, RunConfig};
use crate::kernel::expansion_config;
use crate::output::{csv_number, Header, ZETA_SCHEMA};
use crate::{CliError, Outcome, Status};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZetaRecord {
    pub s: f64,
    pub m: f64,
    pub lambda: f64,
    pub order: u8,
    pub value: f64,
    pub error: Option<f64>,
    pub mass_sign: MassSign,
    pub per_order_breakdown: Vec<f64>,
    pub t_max: f64,
    pub converged: bool,
}

pub fn records(cfg: &RunConfig) -> Result<Vec<ZetaRecord>, CliError> {
    let ecfg = expansion_config(cfg);
    cfg.s
        .0
        .iter()
        .map(|&s| {
            let z = zeta_density(s, &ecfg)?;
            Ok(ZetaRecord {
                s,
                m: cfg.mass,
                lambda: cfg.lambda,
                order: cfg.order,
                value: z.value,
                error: z.error.is_finite().then_some(z.error),
                mass_sign: cfg.mass_sign,
                per_order_breakdown: z.per_order,
                t_max: z.t_max,
                converged: z.converged,
            })
        })
        .collect()
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let recs = records(cfg)?;
    let body = match cfg.format {
        Format::Json => {
            let mut out = Header::new(ZETA_SCHEMA).json_line() + "\n";
            for r in &recs {
                out += &(serde_json::to_string(r).expect("records serialize") + "\n");
            }
            out
        }
        Format::Csv => {
            let mut out = Header::new(ZETA_SCHEMA).csv_line()
                + "\ns,m,lambda,order,value,error,mass_sign,per_order_breakdown,t_max,converged\n";
            for r in &recs {
                let parts: Vec<String> = r.per_order_breakdown.iter().map(|v| csv_number(*v)).collect();
                out += &format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    csv_number(r.s),
                    csv_number(r.m),
                    csv_number(r.lambda),
                    r.order,
                    csv_number(r.value),
                    r.error.map(csv_number).unwrap_or_default(),
                    r.mass_sign,
                    parts.join(";"),
                    csv_number(r.t_max),
                    r.converged
                );
            }
            out
        }
    };
    let notes: Vec<String> = recs
        .iter()
        .filter(|r| !r.converged)
        .map(|r| format!("s={}: Mellin integral not converged (error {:?})", r.s, r.error))
        .collect();
    let status = if notes.is_empty() { Status::Pass } else { Status::NonConverged };
    Ok(Outcome { body, status, notes })
}
