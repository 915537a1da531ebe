//! Machine-readable verification report.

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// What a measured value was judged against.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tolerance {
    Interval {
        lo: f64,
        hi: f64,
    },
    Below {
        threshold: f64,
    },
    Nonincreasing {
        inversions_allowed: u32,
        max_inversion: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl Check {
    pub fn interval(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: Tolerance::Interval { lo, hi },
            pass: value >= lo && value <= hi,
        }
    }

    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: Tolerance::Below { threshold },
            pass: value < threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Refused,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
}

impl SuiteReport {
    pub fn judged(suite: &str, checks: Vec<Check>, details: serde_json::Value) -> Self {
        let status = if checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            suite: suite.into(),
            status,
            message: None,
            checks,
            details,
        }
    }

    pub fn refused(suite: &str, message: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            status: Status::Refused,
            message: Some(message.into()),
            checks: Vec::new(),
            details: serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub suite: String,
    pub config_hash: String,
    pub master_seed: u64,
    /// `"simulated"` or `"ingested"`.
    pub records_source: String,
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    pub fn new(
        suite: &str,
        config_hash: String,
        master_seed: u64,
        records_source: &str,
        suites: Vec<SuiteReport>,
    ) -> Self {
        let pass = suites.iter().all(|s| s.status != Status::Fail)
            && suites.iter().any(|s| s.status == Status::Pass);
        Self {
            schema_version: SCHEMA_VERSION,
            suite: suite.into(),
            config_hash,
            master_seed,
            records_source: records_source.into(),
            pass,
            suites,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_cite_their_tolerance() {
        let c = Check::interval("slope", 1.7, 1.6, 1.9);
        assert!(c.pass);
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["tolerance"]["kind"], "interval");
        assert_eq!(json["tolerance"]["lo"], 1.6);
        assert!(!Check::below("ks", 0.2, 0.1).pass);
    }

    #[test]
    fn overall_verdict() {
        let pass = SuiteReport::judged(
            "a",
            vec![Check::below("x", 0.0, 1.0)],
            serde_json::Value::Null,
        );
        let fail = SuiteReport::judged(
            "b",
            vec![Check::below("x", 2.0, 1.0)],
            serde_json::Value::Null,
        );
        let refused = SuiteReport::refused("c", "no");
        assert!(
            Report::new(
                "all",
                "h".into(),
                1,
                "simulated",
                vec![pass.clone(), refused.clone()]
            )
            .pass
        );
        assert!(!Report::new("all", "h".into(), 1, "simulated", vec![pass, fail]).pass);
        assert!(!Report::new("c", "h".into(), 1, "simulated", vec![refused]).pass);
    }
}
