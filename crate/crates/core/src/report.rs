//! Machine-readable verification reports.

use std::collections::BTreeMap;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Informational comparison that never fails a run.
    ReportedOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Quadrature,
    EmpiricalEstimate,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: String,
    pub tolerance: Option<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub suite: String,
    pub inputs: BTreeMap<String, String>,
    pub quantities: Vec<Quantity>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub caveats: Vec<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<VerificationReport>,
    pub wall_time: f64,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            suite: suite.into(),
            inputs: BTreeMap::new(),
            quantities: Vec::new(),
            checks: Vec::new(),
            caveats: Vec::new(),
            status: Status::ReportedOnly,
            children: Vec::new(),
            wall_time: 0.0,
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.insert(key.into(), value.to_string());
        self
    }

    pub fn quantity(&mut self, name: &str, value: f64, tolerance: Option<f64>, provenance: Provenance) -> &mut Self {
        self.quantities.push(Quantity {
            name: name.into(),
            value: format_value(value),
            tolerance: tolerance.map(format_value),
            provenance,
        });
        self
    }

    pub fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) -> &mut Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.checks.push(Check { name: name.into(), status, detail: detail.into() });
        self.refresh_status();
        self
    }

    /// `|a - b| <= rel_tol * max(|a|, |b|)`.
    pub fn check_relative(&mut self, name: &str, a: f64, b: f64, rel_tol: f64) -> &mut Self {
        let disc = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        let ok = disc <= rel_tol || a == b;
        self.check(name, ok, format!("relative discrepancy {} (tolerance {})", format_value(disc), format_value(rel_tol)))
    }

    pub fn check_absolute(&mut self, name: &str, a: f64, b: f64, abs_tol: f64) -> &mut Self {
        let disc = (a - b).abs();
        self.check(name, disc <= abs_tol, format!("absolute discrepancy {} (tolerance {})", format_value(disc), format_value(abs_tol)))
    }

    pub fn reported(&mut self, name: &str, detail: impl Into<String>) -> &mut Self {
        self.checks.push(Check { name: name.into(), status: Status::ReportedOnly, detail: detail.into() });
        self.refresh_status();
        self
    }

    pub fn caveat(&mut self, text: impl Into<String>) -> &mut Self {
        self.caveats.push(text.into());
        self
    }

    pub fn child(&mut self, report: VerificationReport) -> &mut Self {
        self.children.push(report);
        self.refresh_status();
        self
    }

    fn refresh_status(&mut self) {
        let statuses = self.checks.iter().map(|c| c.status).chain(self.children.iter().map(|c| c.status));
        let mut any_pass = false;
        for s in statuses {
            match s {
                Status::Fail => {
                    self.status = Status::Fail;
                    return;
                }
                Status::Pass => any_pass = true,
                Status::ReportedOnly => {}
            }
        }
        self.status = if any_pass { Status::Pass } else { Status::ReportedOnly };
    }

    /// Parsed value of a named quantity.
    pub fn value_of(&self, name: &str) -> Option<f64> {
        self.quantities.iter().find(|q| q.name == name).and_then(|q| q.value.parse().ok())
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip() {
        for v in [std::f64::consts::PI, 1e-300, -124.02510672119926, 0.1 + 0.2] {
            assert_eq!(format_value(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn status_aggregation() {
        let mut r = VerificationReport::new("t");
        assert_eq!(r.status, Status::ReportedOnly);
        r.reported("info", "x");
        assert_eq!(r.status, Status::ReportedOnly);
        r.check_relative("close", 1.0, 1.0 + 1e-6, 1e-3);
        assert_eq!(r.status, Status::Pass);
        let mut bad = VerificationReport::new("c");
        bad.check_absolute("far", 0.0, 1.0, 1e-3);
        r.child(bad);
        assert!(r.failed());
    }
}
