//! Diffusion iteration management: blockwise scheduling, the mixing-weight
//! and decode-threshold schedules, and expected-embedding smoothing.
//!
//! Smoothing reuses the otherwise-discarded distribution at positions that
//! stay masked: the softmax over a position's logits is contracted against
//! the input embedding matrix and the result, scaled by a step-dependent
//! weight, is added onto the mask embedding for the next forward.

use crate::buffer::BlockRange;
use crate::error::{EngineError, Result};
use crate::logits::LogitsMatrix;
use crate::math;
use crate::model::{EmbeddingOverride, EmbeddingTable};

/// Emits contiguous, non-overlapping spans of width `block_size` covering
/// the generation region left to right.
#[derive(Debug, Clone)]
pub struct BlockIterator {
    prompt_len: usize,
    gen_len: usize,
    block_size: usize,
    next_start: usize,
}

impl BlockIterator {
    pub fn new(prompt_len: usize, gen_len: usize, block_size: usize) -> Result<Self> {
        if block_size == 0 || gen_len == 0 || !gen_len.is_multiple_of(block_size) {
            return Err(EngineError::InvalidConfig(format!(
                "gen_len {gen_len} must be a positive multiple of block_size {block_size}"
            )));
        }
        Ok(Self { prompt_len, gen_len, block_size, next_start: prompt_len })
    }

    pub fn has_next(&self) -> bool {
        self.next_start < self.prompt_len + self.gen_len
    }

    pub fn next_block(&mut self) -> Result<BlockRange> {
        if !self.has_next() {
            return Err(EngineError::BlocksExhausted);
        }
        let start = self.next_start;
        self.next_start += self.block_size;
        Ok(BlockRange::new(start, start + self.block_size))
    }
}

/// Mixing weight at step `t`: grows linearly from `init` and saturates at
/// `preset`. A preset of zero disables the injected delta entirely.
pub fn alpha_schedule(init: f64, growth: f64, preset: f64, t: u32) -> f64 {
    (init + growth * f64::from(t)).min(preset)
}

/// Effective decode threshold at step `t`: decays linearly from 1.0 to
/// `target` over `decay_steps` forwards, constant afterwards. With
/// `decay_steps == 0` the threshold is pinned at `target` from the start.
pub fn threshold_schedule(target: f64, decay_steps: u32, t: u32) -> f64 {
    if decay_steps == 0 || t >= decay_steps {
        return target;
    }
    1.0 + (target - 1.0) * f64::from(t) / f64::from(decay_steps)
}

/// Expected-embedding overrides for the given masked positions.
///
/// For each position `i`: `p = softmax(z[i])`, `delta = p * W_emb`, and the
/// override is `e_mask + alpha * delta`.
pub fn smooth_embeddings(
    logits: &LogitsMatrix,
    masked_positions: &[usize],
    emb: &EmbeddingTable,
    e_mask: &[f64],
    alpha: f64,
) -> Result<EmbeddingOverride> {
    let vocab = emb.vocab();
    let dim = emb.dim();
    if logits.vocab() != vocab {
        return Err(EngineError::InvalidConfig(format!(
            "logits vocab {} does not match embedding vocab {vocab}",
            logits.vocab()
        )));
    }
    let mut overrides = EmbeddingOverride::new();
    for &pos in masked_positions {
        let row = logits.row_required(pos)?;
        let mut p = row.to_vec();
        math::softmax_in_place(&mut p);
        let mut vec = e_mask.to_vec();
        for (v, &weight) in p.iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            let emb_row = emb.row(v as u32);
            for t in 0..dim {
                vec[t] += alpha * weight * emb_row[t];
            }
        }
        overrides.insert(pos, vec);
    }
    Ok(overrides)
}

/// Per-block smoothing state: the step counter driving both schedules and
/// the expected embeddings captured from the previous iteration.
#[derive(Debug, Clone)]
pub struct SmoothState {
    pub alpha_init: f64,
    pub alpha_growth: f64,
    pub alpha_preset: f64,
    pub sched_target: f64,
    pub sched_decay_steps: u32,
    step: u32,
    overrides: EmbeddingOverride,
}

impl SmoothState {
    pub fn new(
        alpha_init: f64,
        alpha_growth: f64,
        alpha_preset: f64,
        sched_target: f64,
        sched_decay_steps: u32,
    ) -> Self {
        Self {
            alpha_init,
            alpha_growth,
            alpha_preset,
            sched_target,
            sched_decay_steps,
            step: 0,
            overrides: EmbeddingOverride::new(),
        }
    }

    /// Called at each block boundary; counters reset and captured
    /// embeddings are discarded.
    pub fn reset(&mut self) {
        self.step = 0;
        self.overrides.clear();
    }

    pub fn step_in_block(&self) -> u32 {
        self.step
    }

    pub fn advance(&mut self) {
        self.step += 1;
    }

    pub fn alpha(&self) -> f64 {
        alpha_schedule(self.alpha_init, self.alpha_growth, self.alpha_preset, self.step)
    }

    pub fn decode_threshold(&self) -> f64 {
        threshold_schedule(self.sched_target, self.sched_decay_steps, self.step)
    }

    pub fn overrides(&self) -> &EmbeddingOverride {
        &self.overrides
    }

    /// Captures expected embeddings from this step's raw logits for the
    /// positions that stay masked, replacing the previous capture.
    pub fn capture(
        &mut self,
        logits: &LogitsMatrix,
        still_masked: &[usize],
        emb: &EmbeddingTable,
        mask_id: u32,
    ) -> Result<()> {
        let e_mask = emb.row(mask_id);
        self.overrides = smooth_embeddings(logits, still_masked, emb, e_mask, self.alpha())?;
        Ok(())
    }

    pub fn clear_overrides(&mut self) {
        self.overrides.clear();
    }
}
