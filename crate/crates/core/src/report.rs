//! Machine-readable verdict rows shared by the exact checks and experiments.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check_name: String,
    pub n: usize,
    pub beta: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative when the check passes with no slack.
    pub margin: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
}

impl Verdict {
    /// `lhs <= rhs + slack`.
    pub fn upper(name: impl Into<String>, n: usize, beta: f64, lhs: f64, rhs: f64, slack: f64) -> Self {
        Verdict {
            check_name: name.into(),
            n,
            beta,
            lhs,
            rhs,
            margin: rhs - lhs,
            pass: lhs <= rhs + slack,
            se: None,
        }
    }

    /// `lhs >= rhs - slack`.
    pub fn lower(name: impl Into<String>, n: usize, beta: f64, lhs: f64, rhs: f64, slack: f64) -> Self {
        Verdict {
            check_name: name.into(),
            n,
            beta,
            lhs,
            rhs,
            margin: lhs - rhs,
            pass: lhs >= rhs - slack,
            se: None,
        }
    }

    /// `lo <= value <= hi`, recorded with `lhs = value` and `rhs = hi`.
    pub fn window(name: impl Into<String>, n: usize, beta: f64, value: f64, lo: f64, hi: f64) -> Self {
        Verdict {
            check_name: name.into(),
            n,
            beta,
            lhs: value,
            rhs: hi,
            margin: (value - lo).min(hi - value),
            pass: value >= lo && value <= hi,
            se: None,
        }
    }

    pub fn with_se(mut self, se: f64) -> Self {
        self.se = Some(se);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdict serializes")
    }
}

pub fn all_pass(verdicts: &[Verdict]) -> bool {
    verdicts.iter().all(|v| v.pass)
}
