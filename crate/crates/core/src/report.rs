//! Structured results of inequality checks and their JSON/CSV forms.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so identical
//! runs produce byte-identical files.

use std::collections::BTreeMap;

use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

/// Relative tolerance below which a negative gap counts as noise.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    /// Negative gap within `tol · scale`.
    Warn,
    Fail,
}

impl Status {
    pub fn is_ok(self) -> bool {
        self != Status::Fail
    }

    pub fn worst(self, other: Status) -> Status {
        self.max(other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Warn => "WARN",
            Status::Fail => "FAIL",
        }
    }
}

/// One inequality evaluation: `gap = lhs - rhs`, expected nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct DeficitReport {
    pub kind: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub rel_gap: f64,
    pub quad_error: f64,
    pub params: BTreeMap<String, f64>,
    pub status: Status,
    pub note: Option<String>,
}

impl DeficitReport {
    /// Report classified with [`DEFAULT_TOL`] against `max(|lhs|, |rhs|)`.
    pub fn new(kind: impl Into<String>, lhs: f64, rhs: f64, quad_error: f64) -> Self {
        let gap = lhs - rhs;
        let denom = lhs.abs().max(rhs.abs()).max(f64::EPSILON);
        let mut r = Self {
            kind: kind.into(),
            lhs,
            rhs,
            gap,
            rel_gap: gap / denom,
            quad_error,
            params: BTreeMap::new(),
            status: Status::Pass,
            note: None,
        };
        r.classify(DEFAULT_TOL, lhs.abs().max(rhs.abs()));
        r
    }

    /// Re-derive the status: PASS if `gap ≥ 0`, WARN if `gap ≥ -tol·scale`,
    /// FAIL otherwise (including NaN).
    pub fn classify(&mut self, tol: f64, scale: f64) -> &mut Self {
        self.status = if self.gap >= 0.0 {
            Status::Pass
        } else if self.gap >= -tol * scale {
            Status::Warn
        } else {
            Status::Fail
        };
        self
    }

    pub fn with_tol(mut self, tol: f64, scale: f64) -> Self {
        self.classify(tol, scale);
        self
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Force FAIL, used when an auxiliary contract inside a check is violated.
    pub fn fail(mut self, note: impl Into<String>) -> Self {
        self.status = Status::Fail;
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status.is_ok()
    }
}

/// A float as a JSON number with 17 significant digits; non-finite values become `null`.
pub fn fixed(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { format!("{x:.16e}") } else { "null".to_string() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

pub fn fixed_map(m: &BTreeMap<String, f64>) -> BTreeMap<&str, Box<RawValue>> {
    m.iter().map(|(k, v)| (k.as_str(), fixed(*v))).collect()
}

impl Serialize for DeficitReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DeficitReport", 9)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("lhs", &fixed(self.lhs))?;
        st.serialize_field("rhs", &fixed(self.rhs))?;
        st.serialize_field("gap", &fixed(self.gap))?;
        st.serialize_field("rel_gap", &fixed(self.rel_gap))?;
        st.serialize_field("quad_error", &fixed(self.quad_error))?;
        st.serialize_field("params", &fixed_map(&self.params))?;
        st.serialize_field("status", &self.status)?;
        st.serialize_field("note", &self.note)?;
        st.end()
    }
}

/// JSON array of reports.
pub fn reports_to_json(reports: &[DeficitReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports always serialize")
}

/// Flat CSV: `kind, n, <other params sorted>, lhs, rhs, gap, rel_gap, status`.
pub fn reports_to_csv(reports: &[DeficitReport]) -> std::result::Result<String, csv::Error> {
    let mut keys: Vec<&str> = reports
        .iter()
        .flat_map(|r| r.params.keys().map(String::as_str))
        .filter(|k| *k != "n")
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["kind", "n"];
    header.extend(&keys);
    header.extend(["lhs", "rhs", "gap", "rel_gap", "status"]);
    w.write_record(&header)?;
    let num = |x: Option<&f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for r in reports {
        let mut row = vec![r.kind.clone(), r.params.get("n").map(|n| format!("{n}")).unwrap_or_default()];
        row.extend(keys.iter().map(|k| num(r.params.get(*k))));
        row.extend([num(Some(&r.lhs)), num(Some(&r.rhs)), num(Some(&r.gap)), num(Some(&r.rel_gap))]);
        row.push(r.status.as_str().to_string());
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
