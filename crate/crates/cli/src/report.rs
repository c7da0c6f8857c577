//! Machine-readable run reports. Every field is a deterministic function of
//! the command line, the input bytes and the seed; wall-clock times are
//! written only when asked for.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use robustcut::{GramFactor, OracleResult, RoundConfig, SandwichReport, Worst};
use robustcut::rounding::RoundOutcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NotConverged,
    FailedChecks,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub sha256: String,
    pub kind: String,
}

impl InputDigest {
    pub fn new(bytes: &[u8], kind: impl Into<String>) -> Self {
        InputDigest {
            sha256: hex::encode(Sha256::digest(bytes)),
            kind: kind.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSection {
    pub method: String,
    pub value: f64,
    pub upper_bound: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rank: usize,
    pub worst: Worst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingSection {
    pub config: RoundConfig,
    pub outcome: RoundOutcome,
    /// `min_{W ∈ 𝒲}` value of the best rounded assignment.
    pub worst_case_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsSection {
    pub gamma: f64,
    pub large_cut_ratio: f64,
    pub large_cut_ratio_in_range: bool,
    /// Total negative weight at the solver worst case; zero for
    /// nonnegative instances.
    pub negative_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationSection {
    pub oracle: OracleResult,
    pub sandwich: SandwichReport,
    pub bounds: BoundsSection,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub solve_seconds: f64,
    pub round_seconds: f64,
    pub verify_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Subcommand and the options that influence the numbers.
    pub command: serde_json::Value,
    pub instance: InputDigest,
    pub spec: Option<InputDigest>,
    pub seed: u64,
    pub status: Status,
    pub solver: Option<SolverSection>,
    pub rounding: Option<RoundingSection>,
    pub certification: Option<CertificationSection>,
    pub factor: Option<GramFactor>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<Timings>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
