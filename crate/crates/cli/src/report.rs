use std::fs;

use serde::Serialize;
use spinning_zeta::kernel_terms::TermReport;

use crate::config::{Format, RunConfig};
use crate::output::{ledger_csv, parse_ledger, Header, SUMMARY_SCHEMA};
use crate::verify::{ledger_notes, ledger_status};
use crate::{CliError, Outcome, Status};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerSummary {
    #[serde(flatten)]
    pub header: Header,
    pub rows: usize,
    pub asserted: usize,
    pub passed: usize,
    pub failed: Vec<String>,
    pub not_converged: Vec<String>,
    pub informational_flagged: Vec<String>,
    pub status: i32,
}

pub fn summarize(rows: &[TermReport]) -> LedgerSummary {
    let label = |r: &TermReport| {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}[{}]", r.term_id, params.join(","))
    };
    let asserted: Vec<&TermReport> = rows.iter().filter(|r| r.is_asserted()).collect();
    LedgerSummary {
        header: Header::new(SUMMARY_SCHEMA),
        rows: rows.len(),
        asserted: asserted.len(),
        passed: asserted.iter().filter(|r| r.converged && r.passes()).count(),
        failed: asserted.iter().filter(|r| !r.passes()).map(|r| label(r)).collect(),
        not_converged: asserted.iter().filter(|r| !r.converged).map(|r| label(r)).collect(),
        informational_flagged: rows
            .iter()
            .filter(|r| !r.is_asserted() && !r.converged)
            .map(label)
            .collect(),
        status: ledger_status(rows).code(),
    }
}

/// Reads a JSON-lines ledger; JSON output summarizes it, CSV output
/// re-emits it as a table.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let path = cfg.input.as_ref().expect("validated");
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(Status::Invalid, format!("cannot read {}: {e}", path.display())))?;
    let rows = parse_ledger(&text).map_err(|e| CliError::new(Status::Invalid, e))?;
    let body = match cfg.format {
        Format::Json => serde_json::to_string(&summarize(&rows)).expect("summary serializes") + "\n",
        Format::Csv => ledger_csv(&rows),
    };
    Ok(Outcome { body, status: ledger_status(&rows), notes: ledger_notes(&rows) })
}
