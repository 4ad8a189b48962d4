use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const REL_FLOOR: f64 = 1e-300;

/// |a − b| / max(|a|, |b|, 1e-300)
pub fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

/// One row of the discrepancy ledger comparing a closed or reduced form with
/// its oracle. Non-finite numbers serialize as JSON `null`.
///
/// Rows that gate a run carry `threshold` (relative, or `threshold_abs`) in
/// `params`; rows without one are informational.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub term_id: String,
    #[serde(serialize_with = "ser_map", deserialize_with = "de_map")]
    pub params: BTreeMap<String, f64>,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub closed_value: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub oracle_value: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub oracle_error: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub abs_dev: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub rel_dev: f64,
    pub converged: bool,
}

impl TermReport {
    pub fn new(
        term_id: impl Into<String>,
        params: &[(&str, f64)],
        closed_value: f64,
        oracle_value: f64,
        oracle_error: f64,
        converged: bool,
    ) -> Self {
        Self {
            term_id: term_id.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            closed_value,
            oracle_value,
            oracle_error,
            abs_dev: (closed_value - oracle_value).abs(),
            rel_dev: rel_dev(closed_value, oracle_value),
            converged,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_threshold(self, rel: f64) -> Self {
        self.with_param("threshold", rel)
    }

    pub fn with_abs_threshold(self, abs: f64) -> Self {
        self.with_param("threshold_abs", abs)
    }

    pub fn is_asserted(&self) -> bool {
        self.params.contains_key("threshold") || self.params.contains_key("threshold_abs")
    }

    /// Whether the row meets its thresholds; informational rows always pass.
    pub fn passes(&self) -> bool {
        let rel_ok = self.params.get("threshold").is_none_or(|t| self.rel_dev <= *t);
        let abs_ok = self.params.get("threshold_abs").is_none_or(|t| self.abs_dev <= *t);
        rel_ok && abs_ok
    }
}

fn ser_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn de_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

fn ser_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
    let opt: BTreeMap<&String, Option<f64>> =
        m.iter().map(|(k, v)| (k, v.is_finite().then_some(*v))).collect();
    opt.serialize(s)
}

fn de_map<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
    let m = BTreeMap::<String, Option<f64>>::deserialize(d)?;
    Ok(m.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect())
}
