//! Generation configuration: block size, decoder choice, cache policy,
//! schedules, thresholds, seed.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Threshold,
    Hierarchical,
    Credit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CachePolicy {
    /// No cache; every forward recomputes the full sequence.
    None,
    /// Prefix cache: only block positions are recomputed and attention is
    /// truncated at the block end (the masked suffix is not attended).
    Block,
    /// Prefix and suffix cached; only block positions are recomputed.
    Dual,
    /// Block plus a neighbor window recomputed each forward, with full
    /// refreshes during the warmup steps of each block.
    Vicinity,
}

impl std::fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DecoderKind::Threshold => "threshold",
            DecoderKind::Hierarchical => "hierarchical",
            DecoderKind::Credit => "credit",
        };
        f.write_str(s)
    }
}

impl std::fmt::Display for CachePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CachePolicy::None => "none",
            CachePolicy::Block => "block",
            CachePolicy::Dual => "dual",
            CachePolicy::Vicinity => "vicinity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct GenerationConfig {
    pub gen_len: usize,
    pub block_size: usize,
    pub decoder: DecoderKind,
    pub cache: CachePolicy,
    /// Static confidence threshold tau for the threshold rule.
    pub threshold: f64,
    /// Hierarchical decoding: commit bar for rule (a).
    pub hier_hi: f64,
    /// Hierarchical decoding: lower bound for per-span commits.
    pub hier_lo: f64,
    /// Credit fusion weight alpha; 0 disables fusion.
    pub credit_alpha: f64,
    /// Credit decay beta, in (0, 1).
    pub credit_beta: f64,
    /// Credit concavity gamma, in (0, 1).
    pub credit_gamma: f64,
    /// Enables expected-embedding injection between iterations.
    pub smooth: bool,
    pub alpha_init: f64,
    pub alpha_growth: f64,
    pub alpha_preset: f64,
    /// Decode-threshold schedule target; the effective tau decays from 1.0
    /// to this value over `sched_decay_steps` forwards of each block.
    pub sched_target: f64,
    /// 0 pins the effective tau to `sched_target` from the first step.
    pub sched_decay_steps: u32,
    pub prefix_look: usize,
    pub after_look: usize,
    pub warmup_times: u32,
    /// Stop as soon as an EOS token is committed and fill the rest.
    pub early_stop: bool,
    /// Record per-forward cache staleness and logit deviation versus a
    /// dense no-cache recompute (toy model only; slow).
    pub measure_staleness: bool,
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            gen_len: 128,
            block_size: 64,
            decoder: DecoderKind::Threshold,
            cache: CachePolicy::Vicinity,
            threshold: 0.8,
            hier_hi: 0.92,
            hier_lo: 0.62,
            credit_alpha: 1.0,
            credit_beta: 0.9,
            credit_gamma: 0.5,
            smooth: true,
            alpha_init: 0.1,
            alpha_growth: 0.05,
            alpha_preset: 0.3,
            sched_target: 0.8,
            sched_decay_steps: 4,
            prefix_look: 16,
            after_look: 16,
            warmup_times: 4,
            early_stop: true,
            measure_staleness: false,
            seed: 0,
        }
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(EngineError::InvalidConfig(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 || v >= 1.0 {
        return Err(EngineError::InvalidConfig(format!(
            "{name} must lie in (0, 1), got {v}"
        )));
    }
    Ok(())
}

fn check_non_negative(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(EngineError::InvalidConfig(format!(
            "{name} must be non-negative, got {v}"
        )));
    }
    Ok(())
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 {
            return Err(EngineError::InvalidConfig("block_size must be >= 1".into()));
        }
        if self.gen_len == 0 {
            return Err(EngineError::InvalidConfig("gen_len must be positive".into()));
        }
        if !self.gen_len.is_multiple_of(self.block_size) {
            return Err(EngineError::InvalidConfig(format!(
                "gen_len {} must be a multiple of block_size {}",
                self.gen_len, self.block_size
            )));
        }
        check_unit("threshold", self.threshold)?;
        check_unit("hier_hi", self.hier_hi)?;
        check_unit("hier_lo", self.hier_lo)?;
        if self.hier_lo > self.hier_hi {
            return Err(EngineError::InvalidConfig(format!(
                "hier_lo {} must not exceed hier_hi {}",
                self.hier_lo, self.hier_hi
            )));
        }
        check_unit("sched-target", self.sched_target)?;
        check_non_negative("credit-alpha", self.credit_alpha)?;
        check_open_unit("credit-beta", self.credit_beta)?;
        check_open_unit("credit-gamma", self.credit_gamma)?;
        check_non_negative("alpha-init", self.alpha_init)?;
        check_non_negative("alpha-growth", self.alpha_growth)?;
        check_non_negative("alpha-preset", self.alpha_preset)?;
        Ok(())
    }
}
