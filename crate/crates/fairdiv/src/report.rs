//! Machine-readable reports for the command-line tool.
//!
//! A [`Report`] is a deterministic JSON document: the command line that
//! produced it, a digest of the input file (when one was read), the
//! results, and a pass/fail status that doubles as the process exit code.
//! Reproduction reports additionally carry a table of rows that
//! [`emit_csv`] can render.

use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::{FactorTwoCheck, StageMapping};
use crate::fairness::FairnessReport;
use crate::incentives::{Misreport, Ratio, Witness};
use crate::instances::{ChainWitness, HardInstance, Replay};
use crate::io::{format_rational, valuation_json, IoError};
use crate::model::{Bundle, Rational, Value};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("this report has no tabular section to render as csv")]
    NonTabularReport,
}

/// Overall verdict; also determines the process exit code (0 or 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(pass: bool) -> Status {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }
}

/// One reproduction: an instance replayed through its mechanism, with the
/// achieved and expected incentive ratios.
#[derive(Clone, Debug)]
pub struct ReproRow {
    pub instance: String,
    pub mechanism: String,
    pub truthful_utility: Value,
    pub manipulated_utility: Value,
    pub ratio: Ratio,
    pub expected: Rational,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct Report {
    /// The command line that produced the report.
    pub command: String,
    /// SHA-256 of the instance file, when the command read one.
    pub input_digest: Option<String>,
    pub seed: u64,
    pub results: Json,
    pub status: Status,
    /// Tabular section, present only for reproduction reports.
    pub rows: Option<Vec<ReproRow>>,
}

impl Report {
    pub fn to_json(&self) -> Json {
        let mut doc = json!({
            "command": self.command,
            "seed": self.seed,
            "results": self.results,
            "status": self.status.as_str(),
        });
        if let Some(digest) = &self.input_digest {
            doc["input_digest"] = json!(digest);
        }
        doc
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report serializes")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Renders a reproduction report as CSV: a fixed header plus one row per
/// reproduction.
pub fn emit_csv(report: &Report) -> Result<String, ReportError> {
    let rows = report.rows.as_ref().ok_or(ReportError::NonTabularReport)?;
    let mut out = String::from(
        "instance,mechanism,truthful utility,manipulated utility,ratio,expected,pass\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.instance,
            row.mechanism,
            row.truthful_utility,
            row.manipulated_utility,
            row.ratio,
            format_rational(&row.expected),
            if row.pass { "pass" } else { "fail" },
        ));
    }
    Ok(out)
}

pub fn rational_json(r: &Rational) -> Json {
    json!(format_rational(r))
}

/// Exact values render as `"p/q"`; lifted (real) values with 12
/// significant digits.
pub fn value_json(v: &Value) -> Json {
    json!(v.to_string())
}

pub fn ratio_json(r: &Ratio) -> Json {
    json!(r.to_string())
}

pub fn bundle_json(b: &Bundle) -> Json {
    json!(b.iter().collect::<Vec<_>>())
}

pub fn fairness_report_json(report: &FairnessReport) -> Json {
    json!({
        "alpha": rational_json(&report.alpha),
        "satisfied": report.satisfied,
        "pairs": report
            .pairs
            .iter()
            .map(|p| {
                json!({
                    "envious": p.envious,
                    "envied": p.envied,
                    "satisfied": p.satisfied,
                    "certificate": p.certificate,
                    "own_value": value_json(&p.own_value),
                    "best_remaining": p.best_remaining.as_ref().map(value_json),
                })
            })
            .collect::<Vec<_>>(),
    })
}

pub fn misreport_json(misreport: &Misreport) -> Result<Json, IoError> {
    Ok(match misreport {
        Misreport::Order(order) => json!({ "order": order }),
        Misreport::Valuation(v) => json!({ "valuation": valuation_json(v)? }),
    })
}

pub fn witness_json(witness: &Witness) -> Result<Json, IoError> {
    Ok(json!({
        "agent": witness.agent,
        "misreport": misreport_json(&witness.misreport)?,
        "truthful_utility": value_json(&witness.truthful_utility),
        "manipulated_utility": value_json(&witness.manipulated_utility),
        "ratio": ratio_json(&witness.ratio),
        "truthful_bundle": bundle_json(&witness.truthful_bundle),
        "manipulated_bundle": bundle_json(&witness.manipulated_bundle),
        "profitable": witness.profitable(),
    }))
}

pub fn chain_witness_json(witness: &ChainWitness) -> Json {
    json!({
        "from": witness.from,
        "to": witness.to,
        "agent": witness.agent,
        "ratio": ratio_json(&witness.ratio),
        "claimed_ratio": rational_json(&witness.claimed_ratio),
        "agents_swapped": witness.agents_swapped,
    })
}

pub fn replay_json(instance: &HardInstance, replay: &Replay) -> Result<Json, IoError> {
    Ok(json!({
        "instance": crate::io::instance_json(&instance.profile)?,
        "mechanism": instance.mechanism.to_string(),
        "manipulator": instance.manipulator,
        "misreport": valuation_json(&instance.misreport)?,
        "truthful_utility": value_json(&replay.truthful_utility),
        "manipulated_utility": value_json(&replay.manipulated_utility),
        "ratio": ratio_json(&replay.ratio),
        "expected_ratio": rational_json(&instance.expected_ratio),
        "truthful_allocation": crate::io::allocation_json(&replay.truthful_allocation),
        "manipulated_allocation": crate::io::allocation_json(&replay.manipulated_allocation),
        "matches_expected": replay.matches_expected,
    }))
}

/// A replayed hard instance as one reproduction row; `pass` records the
/// exact-rational match against the expected ratio.
pub fn replay_row(instance: &HardInstance, replay: &Replay) -> ReproRow {
    ReproRow {
        instance: instance.name.clone(),
        mechanism: instance.mechanism.to_string(),
        truthful_utility: replay.truthful_utility.clone(),
        manipulated_utility: replay.manipulated_utility.clone(),
        ratio: replay.ratio.clone(),
        expected: instance.expected_ratio.clone(),
        pass: replay.matches_expected,
    }
}

pub fn stage_mapping_json(mapping: &StageMapping) -> Json {
    json!({
        "stage": mapping.stage,
        "truthful_bundle": bundle_json(&mapping.truthful_bundle),
        "mapping": mapping
            .mapping
            .iter()
            .map(|(from, to)| json!({ "from": from, "to": to }))
            .collect::<Vec<_>>(),
    })
}

pub fn factor_two_json(check: &FactorTwoCheck) -> Json {
    json!({
        "r1": bundle_json(&check.r1),
        "r2": bundle_json(&check.r2),
        "halves_bounded": check.halves_bounded,
        "split_covers": check.split_covers,
        "bound_holds": check.bound_holds,
        "truthful_utility": value_json(&check.truthful_utility),
        "manipulated_utility": value_json(&check.manipulated_utility),
    })
}
