//! Run reports in the two output formats.
//!
//! Text output is for people; machine output is one `key=value` pair per
//! line. Both are deterministic unless wall time is requested.

use std::fmt::Write;
use std::time::Duration;

use llp_match_core::csmp::TraceRecord;
use llp_match_core::sim::Counters;
use llp_match_core::{Matching, PreferenceProfile, ProposalVector};
use sha2::{Digest, Sha256};

use crate::format::{write_instance, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RenderOptions {
    pub format: OutputFormat,
    pub trace: bool,
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Matched { matching: Matching, ranks: ProposalVector },
    /// No matching of the requested kind; the text says why.
    Nonexistent(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    /// SHA-256 of the canonical serialization, in hex.
    pub digest: String,
    pub solver: &'static str,
    pub seed: Option<u64>,
    pub outcome: Outcome,
    /// Solver advancement steps, or deliveries for a simulation.
    pub steps: usize,
    pub trace: Vec<TraceRecord>,
    /// Delivery log of a simulation.
    pub log: Vec<String>,
    pub counters: Option<Counters>,
    pub wall: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("report is inconsistent: {0}")]
pub struct ReportError(String);

pub fn instance_digest(instance: &Instance) -> String {
    hex::encode(Sha256::digest(write_instance(instance).as_bytes()))
}

fn men(set: &[usize]) -> String {
    set.iter().map(|m| format!("P{}", m + 1)).collect::<Vec<_>>().join(",")
}

fn csv(values: &[usize]) -> String {
    values.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn trace_line(record: &TraceRecord) -> String {
    let advanced: Vec<String> = record
        .advanced
        .iter()
        .map(|&(m, reason)| format!("P{}:{}", m + 1, reason.as_str()))
        .collect();
    format!(
        "step={} forbidden={} advanced={} g={}",
        record.step,
        men(&record.forbidden_set),
        advanced.join(","),
        csv(&record.g_after)
    )
}

impl RunReport {
    pub fn is_matched(&self) -> bool {
        matches!(self.outcome, Outcome::Matched { .. })
    }

    /// Checks that the matching is a total matching whose rank vector is the
    /// reported one.
    pub fn validate(&self, profile: &PreferenceProfile) -> Result<(), ReportError> {
        if let Outcome::Matched { matching, ranks } = &self.outcome {
            if matching.len() != profile.n() || !matching.is_total() {
                return Err(ReportError(format!("matching {matching} is not perfect")));
            }
            let actual = matching.rank_vector(profile);
            if actual != *ranks {
                return Err(ReportError(format!("ranks {ranks} but the matching gives {actual}")));
            }
        }
        Ok(())
    }

    /// Renders the report after validating it against `profile`. The final
    /// line is the matching or the nonexistence verdict.
    pub fn render(&self, profile: &PreferenceProfile, options: RenderOptions) -> Result<String, ReportError> {
        self.validate(profile)?;
        let mut out = String::new();
        let machine = options.format == OutputFormat::Machine;
        let mut field = |key: &str, value: &dyn std::fmt::Display| {
            let _ = if machine {
                writeln!(out, "{key}={value}")
            } else {
                writeln!(out, "{key} {value}")
            };
        };
        field("instance", &self.digest);
        field("solver", &self.solver);
        if let Some(seed) = self.seed {
            field("seed", &seed);
        }
        if options.trace {
            for record in &self.trace {
                field("trace", &trace_line(record));
            }
            for line in &self.log {
                field("log", line);
            }
        }
        field("steps", &self.steps);
        if let Some(counters) = &self.counters {
            for line in counters.summary().lines() {
                let (key, value) = line.split_once('=').expect("key=value");
                field(key, &value);
            }
        }
        if options.timing {
            field("wall_ms", &format!("{:.3}", self.wall.as_secs_f64() * 1e3));
        }
        match &self.outcome {
            Outcome::Matched { matching, ranks } => {
                field("outcome", &"matched");
                field("ranks", &csv(ranks));
                if machine {
                    field("matching", matching);
                } else {
                    let _ = writeln!(out, "{matching}");
                }
            }
            Outcome::Nonexistent(reason) => {
                field("outcome", &"none");
                if machine {
                    field("reason", reason);
                } else {
                    let _ = writeln!(out, "{reason}");
                }
            }
        }
        Ok(out)
    }
}
