//! KV-cache storage and refresh policies.
//!
//! The cache holds per-layer, per-position key/value vectors plus a
//! `fresh_at` stamp per position recording the engine step at which the
//! entry was last recomputed. Policies decide which positions a forward
//! recomputes (the refresh region doubles as the query region) and when a
//! full rebuild happens.

use crate::buffer::BlockRange;
use crate::config::CachePolicy;
use crate::error::{EngineError, Result};

/// Model-side dimensions needed to allocate a cache.
#[derive(Debug, Clone, Copy)]
pub struct CacheSpec {
    pub n_layers: usize,
    pub d_model: usize,
    pub max_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KVCache {
    len: usize,
    d_model: usize,
    /// Per layer, `len * d_model` row-major keys and values.
    k: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    fresh_at: Vec<usize>,
    populated: bool,
}

impl KVCache {
    /// Allocates an unpopulated cache; the first use must be a full update.
    pub fn create(len: usize, spec: &CacheSpec) -> Result<Self> {
        if len > spec.max_len {
            return Err(EngineError::SequenceTooLong { len, max: spec.max_len });
        }
        Ok(Self {
            len,
            d_model: spec.d_model,
            k: vec![vec![0.0; len * spec.d_model]; spec.n_layers],
            v: vec![vec![0.0; len * spec.d_model]; spec.n_layers],
            fresh_at: vec![0; len],
            populated: false,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn d_model(&self) -> usize {
        self.d_model
    }

    pub fn n_layers(&self) -> usize {
        self.k.len()
    }

    pub fn is_populated(&self) -> bool {
        self.populated
    }

    pub fn mark_populated(&mut self) {
        self.populated = true;
    }

    pub fn k_row(&self, layer: usize, pos: usize) -> &[f64] {
        &self.k[layer][pos * self.d_model..(pos + 1) * self.d_model]
    }

    pub fn v_row(&self, layer: usize, pos: usize) -> &[f64] {
        &self.v[layer][pos * self.d_model..(pos + 1) * self.d_model]
    }

    pub fn store(&mut self, layer: usize, pos: usize, k: &[f64], v: &[f64]) {
        let d = self.d_model;
        self.k[layer][pos * d..(pos + 1) * d].copy_from_slice(k);
        self.v[layer][pos * d..(pos + 1) * d].copy_from_slice(v);
    }

    pub fn fresh_at(&self, pos: usize) -> usize {
        self.fresh_at[pos]
    }

    pub fn mark_fresh(&mut self, positions: &[usize], step: usize) {
        for &p in positions {
            self.fresh_at[p] = step;
        }
    }

    pub fn mark_all_fresh(&mut self, step: usize) {
        self.fresh_at.fill(step);
        self.populated = true;
    }

    /// Fraction of positions whose entry predates `changed_at`, i.e. was
    /// computed before the most recent token change.
    pub fn stale_fraction(&self, changed_at: usize) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        let stale = self.fresh_at.iter().filter(|&&s| s < changed_at).count();
        stale as f64 / self.len as f64
    }

    pub fn max_age(&self, now: usize) -> usize {
        self.fresh_at
            .iter()
            .map(|&s| now.saturating_sub(s))
            .max()
            .unwrap_or(0)
    }
}

/// Which positions each forward recomputes, and when full rebuilds happen.
#[derive(Debug, Clone, Copy)]
pub struct RefreshPolicy {
    pub kind: CachePolicy,
    pub prefix_look: usize,
    pub after_look: usize,
    pub warmup_times: u32,
}

impl RefreshPolicy {
    pub fn new(kind: CachePolicy, prefix_look: usize, after_look: usize, warmup_times: u32) -> Self {
        Self { kind, prefix_look, after_look, warmup_times }
    }

    /// The positions whose K/V the next forward recomputes. This is also
    /// the forward's query region.
    pub fn refresh_region(&self, block: BlockRange, step_in_block: u32, len: usize) -> Vec<usize> {
        match self.kind {
            CachePolicy::None => (0..len).collect(),
            CachePolicy::Block | CachePolicy::Dual => block.positions().collect(),
            CachePolicy::Vicinity => {
                if step_in_block < self.warmup_times {
                    (0..len).collect()
                } else {
                    let start = block.start.saturating_sub(self.prefix_look);
                    let end = (block.end + self.after_look).min(len);
                    (start..end).collect()
                }
            }
        }
    }

    /// True when a full cache rebuild should precede the next forward.
    /// Caching policies rebuild at block entry; `None` nominally always
    /// "updates" because every forward is a full recompute.
    pub fn should_update(&self, step_in_block: u32) -> bool {
        match self.kind {
            CachePolicy::None => true,
            CachePolicy::Block | CachePolicy::Dual | CachePolicy::Vicinity => step_in_block == 0,
        }
    }

    /// How far attention reaches. The prefix-only block cache does not
    /// attend the masked suffix; every other policy attends the full
    /// sequence.
    pub fn attend_len(&self, block: BlockRange, len: usize) -> usize {
        match self.kind {
            CachePolicy::Block => block.end,
            _ => len,
        }
    }

    pub fn uses_cache(&self) -> bool {
        self.kind != CachePolicy::None
    }
}
