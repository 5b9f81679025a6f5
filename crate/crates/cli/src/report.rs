//! Report schema shared by every subcommand: machine-readable JSON on
//! stdout, a short human summary on stderr, and an exit code derived from
//! the check statuses.
//!
//! Reports are byte-identical across runs with equal parameters and seed,
//! except for `elapsed_ms`.

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Verified,
    Counterexample,
    Unknown,
}

/// One named verification step.  A counterexample always carries enough
/// data to replay it (the offending parameters, structure, or seed).
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample_data: Option<serde_json::Value>,
}

impl Check {
    pub fn verified(name: &'static str, detail: String) -> Check {
        Check {
            name,
            status: CheckStatus::Verified,
            detail,
            counterexample_data: None,
        }
    }

    pub fn counterexample(name: &'static str, detail: String, data: serde_json::Value) -> Check {
        Check {
            name,
            status: CheckStatus::Counterexample,
            detail,
            counterexample_data: Some(data),
        }
    }

    pub fn unknown(name: &'static str, detail: String) -> Check {
        Check {
            name,
            status: CheckStatus::Unknown,
            detail,
            counterexample_data: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub params: serde_json::Value,
    pub group_order: Option<u64>,
    pub checks: Vec<Check>,
    pub elapsed_ms: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Report {
    /// 0 if every check verified, 1 on any counterexample, 3 if the best
    /// result on some check is `unknown`.
    pub fn exit_code(&self) -> u8 {
        if self
            .checks
            .iter()
            .any(|c| c.status == CheckStatus::Counterexample)
        {
            1
        } else if self.checks.iter().any(|c| c.status == CheckStatus::Unknown) {
            3
        } else {
            0
        }
    }

    /// JSON to stdout, human summary to stderr.
    pub fn emit(&self) {
        println!(
            "{}",
            serde_json::to_string_pretty(self).expect("report serializes")
        );
        for c in &self.checks {
            let mark = match c.status {
                CheckStatus::Verified => "ok  ",
                CheckStatus::Counterexample => "FAIL",
                CheckStatus::Unknown => "??  ",
            };
            eprintln!("{mark} {}: {}", c.name, c.detail);
        }
        let verdict = match self.exit_code() {
            0 => "verified",
            1 => "counterexample found",
            _ => "inconclusive",
        };
        eprintln!("{}: {verdict}", self.command);
    }
}
