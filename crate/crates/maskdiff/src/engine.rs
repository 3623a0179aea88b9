//! End-to-end blockwise generation: cache policy hooks, region-restricted
//! forwards, decoding, iteration smoothing, and EOS early termination.
//!
//! Within a block each step runs in a fixed order: cache update (policy
//! permitting), forward over the refresh region, credit update and fusion
//! (credit decoder only), the commit rule, token commits, then
//! smoothing-state capture for the next iteration.

use std::time::Instant;

use crate::buffer::{BlockRange, TokenBuffer};
use crate::config::{DecoderKind, GenerationConfig};
use crate::decode::{self, CommitSet, CreditTable};
use crate::error::{EngineError, Result};
use crate::iteration::{BlockIterator, SmoothState};
use crate::kvcache::{KVCache, RefreshPolicy};
use crate::logits::LogitsMatrix;
use crate::math;
use crate::model::DiffusionModel;

/// Everything observable about one forward+decode cycle.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// Forward index within the whole run, 0-based.
    pub step: usize,
    pub block: BlockRange,
    pub step_in_block: u32,
    /// Effective confidence threshold used by the commit rule this step
    /// (threshold and credit decoders).
    pub threshold: f64,
    pub committed: CommitSet,
    /// FNV-1a over the step's raw region logits.
    pub logits_hash: u64,
    pub staleness: Option<StalenessSample>,
}

#[derive(Debug, Clone, Copy)]
pub struct StalenessSample {
    /// Fraction of cache entries computed before the latest token change.
    pub stale_fraction: f64,
    /// Oldest entry age in steps at forward time.
    pub max_age: usize,
    /// Max absolute logit deviation against the dense no-cache recompute,
    /// when the model supports the oracle.
    pub max_abs_deviation: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct StalenessSummary {
    pub mean_stale_fraction: f64,
    pub max_age: usize,
    pub max_abs_deviation: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GenerationResult {
    pub final_ids: Vec<u32>,
    pub prompt_len: usize,
    /// Generated tokens strictly before the first EOS.
    pub tokens_before_eos: usize,
    /// Model forward calls.
    pub forwards: usize,
    pub wall_seconds: f64,
    /// Decoder commits per step: (step index, committed positions).
    /// EOS autofill positions are not commits and are not listed.
    pub per_step_commits: Vec<(usize, Vec<usize>)>,
    pub early_terminated: bool,
    pub staleness: Option<StalenessSummary>,
}

/// One in-flight generation. Owns the sequence state, cache, credits, and
/// schedules; borrows the model.
pub struct EngineSession<'m> {
    model: &'m mut dyn DiffusionModel,
    config: GenerationConfig,
    policy: RefreshPolicy,
    buffer: TokenBuffer,
    cache: Option<KVCache>,
    credits: Option<CreditTable>,
    smooth: SmoothState,
    blocks: BlockIterator,
    current_block: Option<BlockRange>,
    forwards: usize,
    records: Vec<StepRecord>,
    terminated: bool,
    last_token_change: usize,
    started: Instant,
}

impl<'m> EngineSession<'m> {
    pub fn new(
        model: &'m mut dyn DiffusionModel,
        prompt: &[u32],
        mask_id: u32,
        eos_id: u32,
        config: GenerationConfig,
    ) -> Result<Self> {
        config.validate()?;
        let vocab = model.vocab();
        for (i, &t) in prompt.iter().enumerate() {
            if t as usize >= vocab {
                return Err(EngineError::InvalidPrompt(format!(
                    "token id {t} at position {i} outside vocab {vocab}"
                )));
            }
        }
        if mask_id as usize >= vocab || eos_id as usize >= vocab {
            return Err(EngineError::InvalidConfig(format!(
                "mask_id {mask_id} and eos_id {eos_id} must lie inside vocab {vocab}"
            )));
        }
        let buffer = TokenBuffer::new_generation_state(prompt, config.gen_len, mask_id, eos_id)?;
        let len = buffer.len();
        if len > model.max_len() {
            return Err(EngineError::SequenceTooLong { len, max: model.max_len() });
        }

        let policy = RefreshPolicy::new(
            config.cache,
            config.prefix_look,
            config.after_look,
            config.warmup_times,
        );
        let cache = if policy.uses_cache() {
            match model.cache_spec() {
                Some(spec) => Some(KVCache::create(len, &spec)?),
                // Models without K/V (scripted) run the policy's schedule
                // with nothing to cache.
                None => None,
            }
        } else {
            None
        };
        let credits = (config.decoder == DecoderKind::Credit).then(|| {
            CreditTable::new(
                BlockRange::new(buffer.prompt_len(), buffer.prompt_len() + config.block_size),
                vocab,
                config.credit_beta,
                config.credit_gamma,
            )
        });
        let smooth = SmoothState::new(
            config.alpha_init,
            config.alpha_growth,
            config.alpha_preset,
            config.sched_target,
            config.sched_decay_steps,
        );
        let blocks = BlockIterator::new(buffer.prompt_len(), config.gen_len, config.block_size)?;

        Ok(Self {
            model,
            config,
            policy,
            buffer,
            cache,
            credits,
            smooth,
            blocks,
            current_block: None,
            forwards: 0,
            records: Vec::new(),
            terminated: false,
            last_token_change: 0,
            started: Instant::now(),
        })
    }

    pub fn buffer(&self) -> &TokenBuffer {
        &self.buffer
    }

    pub fn forwards(&self) -> usize {
        self.forwards
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn is_done(&self) -> bool {
        self.terminated || (self.current_block.is_none() && !self.blocks_remaining())
    }

    fn blocks_remaining(&self) -> bool {
        self.blocks.has_next()
    }

    /// Full-sequence K/V rebuild from the current tokens.
    fn full_cache_update(&mut self) -> Result<()> {
        if let Some(cache) = self.cache.as_mut() {
            self.model
                .compute_kv_full(&self.buffer, self.smooth.overrides(), cache)?;
            cache.mark_all_fresh(self.forwards);
        }
        Ok(())
    }

    /// Moves to the next block if the current one is finished. Returns the
    /// active block, or an error when generation is complete.
    fn ensure_active_block(&mut self) -> Result<BlockRange> {
        if self.terminated {
            return Err(EngineError::NoActiveBlock);
        }
        if let Some(block) = self.current_block {
            // step_once closes finished blocks eagerly, so an active block
            // always has undecided positions.
            debug_assert!(self.buffer.has_undecided_in(block));
            return Ok(block);
        }
        if !self.blocks.has_next() {
            return Err(EngineError::NoActiveBlock);
        }
        let block = self.blocks.next_block()?;
        self.current_block = Some(block);
        self.smooth.reset();
        if let Some(credits) = self.credits.as_mut() {
            credits.reset(block);
        }
        Ok(block)
    }

    fn finalize_block(&mut self) -> Result<()> {
        self.smooth.clear_overrides();
        self.full_cache_update()
    }

    /// One forward+decode cycle on the active block.
    pub fn step_once(&mut self) -> Result<StepRecord> {
        let block = self.ensure_active_block()?;
        let step_in_block = self.smooth.step_in_block();
        let len = self.buffer.len();

        if self.cache.is_some() && self.policy.should_update(step_in_block) {
            self.full_cache_update()?;
        }

        let region = self.policy.refresh_region(block, step_in_block, len);
        let attend_len = self.policy.attend_len(block, len);

        let staleness_before = self.cache.as_ref().map(|c| {
            (c.stale_fraction(self.last_token_change), c.max_age(self.forwards))
        });

        let logits = self.model.forward(
            &self.buffer,
            self.smooth.overrides(),
            self.cache.as_mut(),
            &region,
            attend_len,
        )?;
        if let Some(cache) = self.cache.as_mut() {
            cache.mark_fresh(&region, self.forwards);
        }
        let step_index = self.forwards;
        self.forwards += 1;

        let staleness = if self.config.measure_staleness {
            match staleness_before {
                Some((stale_fraction, max_age)) => {
                    let max_abs_deviation = self
                        .model
                        .reference_logits(&self.buffer, self.smooth.overrides(), &region)?
                        .map(|oracle| {
                            logits
                                .raw_scores()
                                .iter()
                                .zip(oracle.raw_scores())
                                .map(|(a, b)| (a - b).abs())
                                .fold(0.0f64, f64::max)
                        });
                    Some(StalenessSample { stale_fraction, max_age, max_abs_deviation })
                }
                None => None,
            }
        } else {
            None
        };

        // Decoders see only the block's undecided rows, with the mask
        // token's score suppressed so it can never be re-committed.
        let undecided = self.buffer.undecided_positions(block);
        debug_assert!(!undecided.is_empty());
        let block_logits = logits.restrict(&undecided)?;
        let suppressed = block_logits.suppress_token(self.buffer.mask_id());

        let tau = self.smooth.decode_threshold();
        let commits = self.decode_step(&suppressed, &undecided, block, tau)?;

        for &(pos, token) in &commits {
            self.buffer.commit(pos, token)?;
        }
        self.last_token_change = self.forwards;

        // Capture expected embeddings from this step's raw distribution for
        // positions that stay masked; they feed the next forward's inputs.
        if self.config.smooth {
            if let Some(emb) = self.model.embedding_table() {
                let still_masked = self.buffer.undecided_positions(block);
                self.smooth
                    .capture(&block_logits, &still_masked, emb, self.buffer.mask_id())?;
            }
        }
        self.smooth.advance();

        let record = StepRecord {
            step: step_index,
            block,
            step_in_block,
            threshold: tau,
            committed: commits.clone(),
            logits_hash: math::fnv1a64(logits.raw_scores().iter().copied()),
            staleness,
        };
        self.records.push(record.clone());

        if self.config.early_stop && commits.iter().any(|&(_, t)| t == self.buffer.eos_id()) {
            self.buffer.fill_remaining_with_eos();
            self.terminated = true;
            self.current_block = None;
        } else if !self.buffer.has_undecided_in(block) {
            // Eagerly close out the block so post-run state is consistent
            // even when the caller stops stepping here.
            self.finalize_block()?;
            self.current_block = None;
        }

        Ok(record)
    }

    fn decode_step(
        &mut self,
        logits: &LogitsMatrix,
        undecided: &[usize],
        block: BlockRange,
        tau: f64,
    ) -> Result<CommitSet> {
        match self.config.decoder {
            DecoderKind::Threshold => decode::threshold_decode(logits, undecided, tau),
            DecoderKind::Hierarchical => decode::hierarchical_decode(
                logits,
                undecided,
                block,
                self.config.hier_hi,
                self.config.hier_lo,
            ),
            DecoderKind::Credit => {
                let credits = self
                    .credits
                    .as_mut()
                    .expect("credit decoder always owns a table");
                credits.update(logits, undecided)?;
                let fused = credits.fuse(logits, self.config.credit_alpha)?;
                decode::threshold_decode(&fused, undecided, tau)
            }
        }
    }

    /// Runs the block loop to completion and assembles the result.
    pub fn run_to_completion(mut self) -> Result<GenerationResult> {
        while !self.is_done() {
            self.step_once()?;
        }
        self.finish()
    }

    pub fn finish(self) -> Result<GenerationResult> {
        debug_assert!(!self.buffer.any_masked() || !self.is_done());
        let wall_seconds = self.started.elapsed().as_secs_f64();
        let staleness = summarize_staleness(&self.records);
        let per_step_commits = self
            .records
            .iter()
            .map(|r| (r.step, r.committed.iter().map(|&(p, _)| p).collect()))
            .collect();
        Ok(GenerationResult {
            tokens_before_eos: self.buffer.tokens_before_eos(),
            prompt_len: self.buffer.prompt_len(),
            final_ids: self.buffer.ids().to_vec(),
            forwards: self.forwards,
            wall_seconds,
            per_step_commits,
            early_terminated: self.terminated,
            staleness,
        })
    }
}

fn summarize_staleness(records: &[StepRecord]) -> Option<StalenessSummary> {
    let samples: Vec<&StalenessSample> =
        records.iter().filter_map(|r| r.staleness.as_ref()).collect();
    if samples.is_empty() {
        return None;
    }
    let mean_stale_fraction =
        samples.iter().map(|s| s.stale_fraction).sum::<f64>() / samples.len() as f64;
    let max_age = samples.iter().map(|s| s.max_age).max().unwrap_or(0);
    let max_abs_deviation = samples
        .iter()
        .filter_map(|s| s.max_abs_deviation)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
    Some(StalenessSummary { mean_stale_fraction, max_age, max_abs_deviation })
}

/// Convenience wrapper: runs a whole generation under `config`.
pub fn generate(
    model: &mut dyn DiffusionModel,
    prompt: &[u32],
    mask_id: u32,
    eos_id: u32,
    config: &GenerationConfig,
) -> Result<GenerationResult> {
    EngineSession::new(model, prompt, mask_id, eos_id, config.clone())?.run_to_completion()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CachePolicy;
    use crate::logits::SUPPRESSED_SCORE;
    use crate::model::{ScriptedModel, ToyModel, ToyModelParams};

    const MASK: u32 = 0;
    const EOS: u32 = 1;

    fn static_config(gen_len: usize, block_size: usize, decoder: DecoderKind) -> GenerationConfig {
        GenerationConfig {
            gen_len,
            block_size,
            decoder,
            cache: CachePolicy::None,
            smooth: false,
            sched_target: 0.8,
            sched_decay_steps: 0,
            threshold: 0.8,
            early_stop: true,
            ..Default::default()
        }
    }

    /// Script whose step `s` gives probability ~0.95 to `token` at each
    /// position in `hot[s]`, and a flat low distribution elsewhere.
    fn script(seq_len: usize, vocab: usize, hot: Vec<Vec<(usize, u32)>>) -> ScriptedModel {
        let steps: Vec<Vec<f64>> = hot
            .into_iter()
            .map(|positions| {
                let mut m = vec![0.0; seq_len * vocab];
                for (pos, token) in positions {
                    // p ~ 0.95 against vocab-1 zero logits
                    let x = (0.95 * (vocab as f64 - 1.0) / 0.05).ln();
                    m[pos * vocab + token as usize] = x;
                }
                m
            })
            .collect();
        ScriptedModel::new(seq_len, vocab, MASK, EOS, steps).unwrap()
    }

    #[test]
    fn saturated_confidence_finishes_in_one_forward() {
        // One step where every generated position is confident: the whole
        // block commits in a single forward.
        let hot: Vec<(usize, u32)> = (2..10).map(|p| (p, 3u32)).collect();
        let mut model = script(10, 8, vec![hot]);
        let cfg = static_config(8, 8, DecoderKind::Threshold);
        let result = generate(&mut model, &[2, 3], MASK, EOS, &cfg).unwrap();
        assert_eq!(result.forwards, 1);
        assert_eq!(result.tokens_before_eos, 8);
        assert!(result.final_ids[2..].iter().all(|&t| t == 3));
    }

    #[test]
    fn one_confident_position_per_step_degenerates_to_sequential() {
        let hot: Vec<Vec<(usize, u32)>> = (2..10).map(|p| vec![(p, 4u32)]).collect();
        let mut model = script(10, 8, hot);
        let cfg = static_config(8, 8, DecoderKind::Threshold);
        let result = generate(&mut model, &[2, 3], MASK, EOS, &cfg).unwrap();
        assert_eq!(result.forwards, 8);
        assert!(result.per_step_commits.iter().all(|(_, c)| c.len() == 1));
    }

    #[test]
    fn early_termination_fills_and_stops() {
        // Left-to-right commits; EOS surfaces at position 4 (step 2).
        let hot = vec![
            vec![(2usize, 5u32)],
            vec![(3, 6)],
            vec![(4, EOS)],
            vec![(5, 7)],
            vec![(6, 7)],
            vec![(7, 7)],
            vec![(8, 7)],
            vec![(9, 7)],
        ];
        let mut model = script(10, 8, hot);
        let cfg = static_config(8, 4, DecoderKind::Threshold);
        let result = generate(&mut model, &[2, 3], MASK, EOS, &cfg).unwrap();
        assert!(result.early_terminated);
        assert_eq!(result.forwards, 3);
        assert_eq!(result.tokens_before_eos, 2);
        assert!(result.final_ids[4..].iter().all(|&t| t == EOS));
        assert_eq!(&result.final_ids[..4], &[2, 3, 5, 6]);
    }

    #[test]
    fn eos_in_prompt_is_ignored() {
        let hot: Vec<Vec<(usize, u32)>> = (2..6).map(|p| vec![(p, 4u32)]).collect();
        let mut model = script(6, 8, hot);
        let cfg = static_config(4, 4, DecoderKind::Threshold);
        // EOS appears in the prompt; generation still runs all positions.
        let result = generate(&mut model, &[2, EOS], MASK, EOS, &cfg).unwrap();
        assert_eq!(result.forwards, 4);
        assert!(!result.early_terminated);
        assert_eq!(result.tokens_before_eos, 4);
    }

    #[test]
    fn disabled_early_stop_runs_every_block() {
        let mut hot = vec![vec![(2usize, EOS)]];
        hot.extend((3..10).map(|p| vec![(p, 4u32)]));
        let make = || script(10, 8, hot.clone());

        let mut on = make();
        let mut cfg = static_config(8, 4, DecoderKind::Threshold);
        let with_stop = generate(&mut on, &[2, 3], MASK, EOS, &cfg).unwrap();

        let mut off = make();
        cfg.early_stop = false;
        let without = generate(&mut off, &[2, 3], MASK, EOS, &cfg).unwrap();

        assert!(with_stop.forwards < without.forwards);
        assert_eq!(without.forwards, 8);
        // Both runs agree at and before the EOS position.
        assert_eq!(with_stop.final_ids[2], without.final_ids[2]);
        assert_eq!(with_stop.tokens_before_eos, without.tokens_before_eos);
    }

    #[test]
    fn step_once_matches_generate() {
        let hot: Vec<Vec<(usize, u32)>> = (2..10).map(|p| vec![(p, 4u32)]).collect();
        let cfg = static_config(8, 4, DecoderKind::Threshold);

        let mut a = script(10, 8, hot.clone());
        let whole = generate(&mut a, &[2, 3], MASK, EOS, &cfg).unwrap();

        let mut b = script(10, 8, hot);
        let mut session = EngineSession::new(&mut b, &[2, 3], MASK, EOS, cfg).unwrap();
        let mut steps = 0;
        while !session.is_done() {
            let record = session.step_once().unwrap();
            assert!(!record.committed.is_empty());
            steps += 1;
        }
        let stepped = session.finish().unwrap();
        assert_eq!(steps, whole.forwards);
        assert_eq!(stepped.final_ids, whole.final_ids);
        assert_eq!(stepped.per_step_commits, whole.per_step_commits);

        // Exhausted session refuses further steps.
        let mut c = script(10, 8, vec![vec![(2, 4)]]);
        let mut done = EngineSession::new(
            &mut c,
            &[2, 3],
            MASK,
            EOS,
            static_config(1, 1, DecoderKind::Threshold),
        )
        .unwrap();
        done.step_once().unwrap();
        assert!(done.is_done());
        assert!(matches!(done.step_once(), Err(EngineError::NoActiveBlock)));
    }

    #[test]
    fn mask_token_never_wins_decoding() {
        // The script's top-scoring token is the mask everywhere; suppression
        // must force the decoder onto the runner-up.
        let vocab = 8;
        let seq_len = 4;
        let mut steps = Vec::new();
        for _ in 0..2 {
            let mut m = vec![0.0; seq_len * vocab];
            for pos in 0..seq_len {
                m[pos * vocab + MASK as usize] = 9.0;
                m[pos * vocab + 5] = 3.0;
            }
            steps.push(m);
        }
        let mut model = ScriptedModel::new(seq_len, vocab, MASK, EOS, steps).unwrap();
        let cfg = static_config(2, 2, DecoderKind::Threshold);
        let result = generate(&mut model, &[2, 3], MASK, EOS, &cfg).unwrap();
        assert!(result.final_ids[2..].iter().all(|&t| t == 5));
    }

    #[test]
    fn toy_model_runs_deterministically_across_policies() {
        let params = ToyModelParams { max_len: 32, ..Default::default() };
        for cache in [CachePolicy::None, CachePolicy::Block, CachePolicy::Dual, CachePolicy::Vicinity] {
            let cfg = GenerationConfig {
                gen_len: 8,
                block_size: 4,
                decoder: DecoderKind::Threshold,
                cache,
                threshold: 0.1,
                sched_decay_steps: 0,
                sched_target: 0.1,
                smooth: true,
                prefix_look: 2,
                after_look: 2,
                warmup_times: 1,
                ..Default::default()
            };
            let mut m1 = ToyModel::new(params).unwrap();
            let mut m2 = ToyModel::new(params).unwrap();
            let a = generate(&mut m1, &[2, 3, 4], MASK, EOS, &cfg).unwrap();
            let b = generate(&mut m2, &[2, 3, 4], MASK, EOS, &cfg).unwrap();
            assert_eq!(a.final_ids, b.final_ids, "cache={cache}");
            assert_eq!(a.per_step_commits, b.per_step_commits, "cache={cache}");
            assert!(!a.final_ids.contains(&MASK));
        }
    }

    #[test]
    fn staleness_is_recorded_when_requested() {
        let params = ToyModelParams { max_len: 32, ..Default::default() };
        let mut model = ToyModel::new(params).unwrap();
        let cfg = GenerationConfig {
            gen_len: 8,
            block_size: 4,
            cache: CachePolicy::Block,
            threshold: 0.2,
            sched_target: 0.2,
            sched_decay_steps: 0,
            measure_staleness: true,
            smooth: false,
            ..Default::default()
        };
        let mut session = EngineSession::new(&mut model, &[2, 3], MASK, EOS, cfg).unwrap();
        while !session.is_done() {
            session.step_once().unwrap();
        }
        // Block entry rebuilds the cache, so the first forward of each
        // block sees nothing stale; later forwards in the block do.
        let samples: Vec<_> = session
            .records()
            .iter()
            .map(|r| (r.step_in_block, r.staleness.unwrap()))
            .collect();
        assert!(samples
            .iter()
            .filter(|(s, _)| *s == 0)
            .all(|(_, st)| st.stale_fraction == 0.0));
        assert!(samples
            .iter()
            .any(|(s, st)| *s > 0 && st.stale_fraction > 0.0));
        let result = session.finish().unwrap();
        let summary = result.staleness.expect("staleness summary present");
        assert!(summary.max_abs_deviation.is_some());
        assert!(summary.mean_stale_fraction >= 0.0);
    }

    #[test]
    fn vicinity_defaults_record_finite_deviation() {
        let params = ToyModelParams { max_len: 64, ..Default::default() };
        let mut model = ToyModel::new(params).unwrap();
        let prompt: Vec<u32> = (2..10).collect();
        let cfg = GenerationConfig {
            gen_len: 32,
            block_size: 16,
            cache: CachePolicy::Vicinity,
            threshold: 0.2,
            sched_target: 0.2,
            sched_decay_steps: 0,
            measure_staleness: true,
            smooth: true,
            ..Default::default()
        };
        let result = generate(&mut model, &prompt, MASK, EOS, &cfg).unwrap();
        let dev = result
            .staleness
            .and_then(|s| s.max_abs_deviation)
            .expect("deviation recorded");
        assert!(dev.is_finite());
    }

    #[test]
    fn threshold_schedule_gates_early_commits() {
        // Two positions at ~0.95; with a decaying schedule the first step
        // demands tau=1.0, so only the fallback argmax commits.
        let hot = vec![
            vec![(2usize, 4u32), (3, 5)],
            vec![(2, 4), (3, 5)],
            vec![(2, 4), (3, 5)],
        ];
        let mut model = script(4, 8, hot);
        let mut cfg = static_config(2, 2, DecoderKind::Threshold);
        cfg.sched_decay_steps = 4;
        cfg.sched_target = 0.8;
        let result = generate(&mut model, &[2, 3], MASK, EOS, &cfg).unwrap();
        assert_eq!(result.per_step_commits[0].1.len(), 1);
        assert_eq!(result.forwards, 2);
    }

    #[test]
    fn rejects_mismatched_config_and_prompt() {
        let mut model = script(8, 8, vec![]);
        let cfg = static_config(5, 2, DecoderKind::Threshold);
        assert!(generate(&mut model, &[2], MASK, EOS, &cfg).is_err());

        let cfg = static_config(2, 2, DecoderKind::Threshold);
        assert!(generate(&mut model, &[2, 99], MASK, EOS, &cfg).is_err());
        assert!(generate(&mut model, &[], MASK, EOS, &cfg).is_err());
    }

    #[test]
    fn suppressed_score_keeps_rows_finite() {
        assert!(SUPPRESSED_SCORE.is_finite());
    }
}
