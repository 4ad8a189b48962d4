//! Serialized artifacts. Every file starts with a schema header line and no
//! body carries a timestamp, so equal configs give byte-equal output.

use serde::{Deserialize, Serialize};
use spinning_zeta::kernel_terms::TermReport;

pub const SCHEMA_VERSION: u32 = 1;
pub const LEDGER_SCHEMA: &str = "spinning-zeta/term-report";
pub const GRID_SCHEMA: &str = "spinning-zeta/kernel-grid";
pub const ZETA_SCHEMA: &str = "spinning-zeta/zeta";
pub const GEOMETRY_SCHEMA: &str = "spinning-zeta/geometry";
pub const SUMMARY_SCHEMA: &str = "spinning-zeta/ledger-summary";

pub const LEDGER_COLUMNS: [&str; 8] =
    ["term_id", "closed_value", "oracle_value", "oracle_error", "abs_dev", "rel_dev", "converged", "params"];
pub const GRID_COLUMNS: [&str; 7] = ["p1", "p2", "t", "order0", "order2", "order3_value", "order3_error"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub schema: String,
    pub version: u32,
}

impl Header {
    pub fn new(schema: &str) -> Self {
        Self { schema: schema.to_string(), version: SCHEMA_VERSION }
    }

    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("header serializes")
    }

    pub fn csv_line(&self) -> String {
        format!("# schema: {} v{}", self.schema, self.version)
    }
}

/// Shortest round-trip decimal with −0 printed as 0; non-finite values
/// become empty fields.
pub fn csv_number(v: f64) -> String {
    if v.is_finite() {
        format!("{}", v + 0.0)
    } else {
        String::new()
    }
}

pub fn ledger_jsonl(rows: &[TermReport]) -> String {
    let mut out = Header::new(LEDGER_SCHEMA).json_line();
    out.push('\n');
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("rows serialize"));
        out.push('\n');
    }
    out
}

pub fn ledger_csv(rows: &[TermReport]) -> String {
    let mut out = Header::new(LEDGER_SCHEMA).csv_line();
    out.push('\n');
    out.push_str(&LEDGER_COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={}", csv_number(*v))).collect();
        let fields = [
            r.term_id.clone(),
            csv_number(r.closed_value),
            csv_number(r.oracle_value),
            csv_number(r.oracle_error),
            csv_number(r.abs_dev),
            csv_number(r.rel_dev),
            r.converged.to_string(),
            params.join(";"),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Parses a JSON-lines ledger, checking its header.
pub fn parse_ledger(text: &str) -> Result<Vec<TermReport>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or("empty ledger")?;
    let header: Header = serde_json::from_str(first).map_err(|e| format!("bad ledger header: {e}"))?;
    if header != Header::new(LEDGER_SCHEMA) {
        return Err(format!("unsupported ledger schema {} v{}", header.schema, header.version));
    }
    lines
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("ledger row {}: {e}", i + 1)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_round_trip() {
        let rows = vec![
            TermReport::new("K1", &[("t", 1.0)], 1.5, -0.25, 1e-9, true).with_threshold(1e-3),
            TermReport::new("I2", &[], f64::NAN, 3.0, f64::INFINITY, false),
        ];
        let text = ledger_jsonl(&rows);
        assert!(text.starts_with("{\"schema\":\"spinning-zeta/term-report\",\"version\":1}\n"));
        let back = parse_ledger(&text).unwrap();
        assert_eq!(back[0], rows[0]);
        assert!(back[1].closed_value.is_nan() && back[1].oracle_error.is_nan());
        assert!(parse_ledger("{\"schema\":\"other\",\"version\":1}\n").is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = vec![TermReport::new("J_sum", &[("z", 0.5), ("p1", 1.0)], 0.1, 0.1, 0.0, true)];
        let text = ledger_csv(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema: spinning-zeta/term-report v1");
        assert_eq!(lines[1], LEDGER_COLUMNS.join(","));
        assert_eq!(lines[2], "J_sum,0.1,0.1,0,0,0,true,p1=1;z=0.5");
        assert_eq!(csv_number(f64::NAN), "");
    }
}
