//! Tokens-per-forward and tokens-per-second metrics and the run report.

use serde::{Deserialize, Serialize};

use crate::config::GenerationConfig;
use crate::engine::{GenerationResult, StalenessSummary};
use crate::error::{EngineError, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Tokens generated before the first EOS divided by forward count.
pub fn tpf(result: &GenerationResult) -> Result<f64> {
    if result.forwards == 0 {
        return Err(EngineError::InvalidConfig(
            "tpf undefined for a run with zero forwards".into(),
        ));
    }
    Ok(result.tokens_before_eos as f64 / result.forwards as f64)
}

/// Tokens generated before the first EOS divided by wall seconds.
pub fn tps(result: &GenerationResult) -> Result<f64> {
    if result.wall_seconds <= 0.0 {
        return Err(EngineError::InvalidConfig(
            "tps undefined for a run with zero wall time".into(),
        ));
    }
    Ok(result.tokens_before_eos as f64 / result.wall_seconds)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SequenceReport {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    pub tokens_before_eos: usize,
    pub forwards: usize,
    pub seconds: f64,
    pub tpf: f64,
    pub tps: f64,
    pub early_terminated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub staleness: Option<StalenessSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Aggregate {
    pub mean_tpf: f64,
    pub mean_tps: f64,
    /// Present when any sequence recorded staleness samples: the mean of
    /// per-sequence stale fractions and the worst age/deviation seen.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub staleness: Option<StalenessSummary>,
}

/// Per-sequence rows plus aggregate means over the suite.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub version: u32,
    pub config: GenerationConfig,
    pub n: usize,
    pub failed: usize,
    pub sequences: Vec<SequenceReport>,
    pub aggregate: Aggregate,
}

impl SequenceReport {
    pub fn from_result(
        id: impl Into<String>,
        reference: Option<String>,
        result: &GenerationResult,
    ) -> Result<Self> {
        Ok(Self {
            id: id.into(),
            reference,
            tokens_before_eos: result.tokens_before_eos,
            forwards: result.forwards,
            seconds: result.wall_seconds,
            tpf: tpf(result)?,
            tps: tps(result)?,
            early_terminated: result.early_terminated,
            staleness: result.staleness,
            error: None,
        })
    }

    pub fn from_error(id: impl Into<String>, reference: Option<String>, err: &EngineError) -> Self {
        Self {
            id: id.into(),
            reference,
            tokens_before_eos: 0,
            forwards: 0,
            seconds: 0.0,
            tpf: 0.0,
            tps: 0.0,
            early_terminated: false,
            staleness: None,
            error: Some(err.to_string()),
        }
    }
}

impl RunReport {
    /// Aggregates are arithmetic means over the successful sequences.
    pub fn assemble(config: GenerationConfig, sequences: Vec<SequenceReport>) -> Self {
        let ok: Vec<&SequenceReport> = sequences.iter().filter(|s| s.error.is_none()).collect();
        let count = ok.len().max(1) as f64;
        let with_staleness: Vec<&StalenessSummary> =
            ok.iter().filter_map(|s| s.staleness.as_ref()).collect();
        let staleness = (!with_staleness.is_empty()).then(|| StalenessSummary {
            mean_stale_fraction: with_staleness.iter().map(|s| s.mean_stale_fraction).sum::<f64>()
                / with_staleness.len() as f64,
            max_age: with_staleness.iter().map(|s| s.max_age).max().unwrap_or(0),
            max_abs_deviation: with_staleness
                .iter()
                .filter_map(|s| s.max_abs_deviation)
                .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d)))),
        });
        let aggregate = Aggregate {
            mean_tpf: ok.iter().map(|s| s.tpf).sum::<f64>() / count,
            mean_tps: ok.iter().map(|s| s.tps).sum::<f64>() / count,
            staleness,
        };
        Self {
            version: REPORT_SCHEMA_VERSION,
            config,
            n: sequences.len(),
            failed: sequences.len() - ok.len(),
            sequences,
            aggregate,
        }
    }

    /// Zeroes wall-clock fields so reports can be compared across runs.
    pub fn strip_timing(&mut self) {
        for s in &mut self.sequences {
            s.seconds = 0.0;
            s.tps = 0.0;
        }
        self.aggregate.mean_tps = 0.0;
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(tokens: usize, forwards: usize, seconds: f64) -> GenerationResult {
        GenerationResult {
            final_ids: vec![],
            prompt_len: 0,
            tokens_before_eos: tokens,
            forwards,
            wall_seconds: seconds,
            per_step_commits: vec![],
            early_terminated: false,
            staleness: None,
        }
    }

    #[test]
    fn tpf_examples() {
        assert_eq!(tpf(&result(8, 2, 1.0)).unwrap(), 4.0);
        // one token per forward is the autoregressive floor
        assert_eq!(tpf(&result(16, 16, 1.0)).unwrap(), 1.0);
        assert!(tpf(&result(8, 0, 1.0)).is_err());
    }

    #[test]
    fn tps_examples() {
        assert_eq!(tps(&result(100, 4, 0.5)).unwrap(), 200.0);
        let base = tps(&result(100, 4, 0.5)).unwrap();
        let doubled = tps(&result(100, 4, 1.0)).unwrap();
        assert!((doubled - base / 2.0).abs() < 1e-12);
        assert!(tps(&result(100, 4, 0.0)).is_err());
    }

    #[test]
    fn aggregate_is_the_arithmetic_mean() {
        let rows = vec![
            SequenceReport::from_result("a", None, &result(100, 10, 1.0)).unwrap(),
            SequenceReport::from_result("b", None, &result(300, 10, 1.0)).unwrap(),
        ];
        let report = RunReport::assemble(GenerationConfig::default(), rows);
        assert!((report.aggregate.mean_tps - 200.0).abs() < 1e-9);
        let mean_tpf: f64 = report.sequences.iter().map(|s| s.tpf).sum::<f64>() / 2.0;
        assert!((report.aggregate.mean_tpf - mean_tpf).abs() < 1e-9);
    }

    #[test]
    fn failed_rows_are_recorded_but_excluded_from_means() {
        let rows = vec![
            SequenceReport::from_result("ok", None, &result(100, 10, 1.0)).unwrap(),
            SequenceReport::from_error("bad", None, &EngineError::EmptyUndecided),
        ];
        let report = RunReport::assemble(GenerationConfig::default(), rows);
        assert_eq!(report.n, 2);
        assert_eq!(report.failed, 1);
        assert!((report.aggregate.mean_tpf - 10.0).abs() < 1e-12);
    }

    #[test]
    fn strip_timing_only_touches_clock_fields() {
        let rows = vec![SequenceReport::from_result("a", None, &result(100, 10, 0.25)).unwrap()];
        let mut report = RunReport::assemble(GenerationConfig::default(), rows);
        let tpf_before = report.aggregate.mean_tpf;
        report.strip_timing();
        assert_eq!(report.sequences[0].seconds, 0.0);
        assert_eq!(report.sequences[0].tps, 0.0);
        assert_eq!(report.aggregate.mean_tps, 0.0);
        assert_eq!(report.aggregate.mean_tpf, tpf_before);
        assert_eq!(report.sequences[0].forwards, 10);
    }
}
