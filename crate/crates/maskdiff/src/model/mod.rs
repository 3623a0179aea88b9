//! The diffusion model interface and its two implementations: a seeded
//! bidirectional toy transformer and a deterministic scripted-logits model.

use std::collections::BTreeMap;

use crate::buffer::TokenBuffer;
use crate::error::{EngineError, Result};
use crate::kvcache::{CacheSpec, KVCache};
use crate::logits::LogitsMatrix;

pub mod scripted;
pub mod toy;

pub use scripted::ScriptedModel;
pub use toy::{ToyModel, ToyModelParams};

/// Input embedding matrix, `vocab x dim` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    data: Vec<f64>,
    vocab: usize,
    dim: usize,
}

impl EmbeddingTable {
    pub fn new(data: Vec<f64>, vocab: usize, dim: usize) -> Self {
        assert_eq!(data.len(), vocab * dim);
        Self { data, vocab, dim }
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, token: u32) -> &[f64] {
        let i = token as usize;
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Per-position replacement vectors injected at the embedding layer in
/// place of the mask-token embedding. Only mask positions may carry one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingOverride {
    entries: BTreeMap<usize, Vec<f64>>,
}

impl EmbeddingOverride {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pos: usize, vector: Vec<f64>) {
        self.entries.insert(pos, vector);
    }

    pub fn get(&self, pos: usize) -> Option<&[f64]> {
        self.entries.get(&pos).map(Vec::as_slice)
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }
}

/// A masked-diffusion model the engine can drive.
///
/// `forward` computes queries only for `region` positions and attends over
/// `[0, attend_len)`, reading cached K/V for out-of-region positions and
/// writing fresh K/V for region positions back into the cache.
pub trait DiffusionModel {
    fn vocab(&self) -> usize;

    fn max_len(&self) -> usize;

    fn forward(
        &mut self,
        tokens: &TokenBuffer,
        overrides: &EmbeddingOverride,
        cache: Option<&mut KVCache>,
        region: &[usize],
        attend_len: usize,
    ) -> Result<LogitsMatrix>;

    /// Recomputes and stores K/V for every layer and position from the
    /// current token buffer.
    fn compute_kv_full(
        &mut self,
        tokens: &TokenBuffer,
        overrides: &EmbeddingOverride,
        cache: &mut KVCache,
    ) -> Result<()>;

    /// Input embedding matrix, when the model has one (used by iteration
    /// smoothing). Scripted models return `None`.
    fn embedding_table(&self) -> Option<&EmbeddingTable> {
        None
    }

    /// Cache dimensions, when the model supports K/V caching.
    fn cache_spec(&self) -> Option<CacheSpec> {
        None
    }

    /// Dense no-cache recompute of the region logits, used as the staleness
    /// oracle. `None` when the model cannot provide one cheaply.
    fn reference_logits(
        &self,
        _tokens: &TokenBuffer,
        _overrides: &EmbeddingOverride,
        _region: &[usize],
    ) -> Result<Option<LogitsMatrix>> {
        Ok(None)
    }
}

pub(crate) fn validate_region(region: &[usize], len: usize, attend_len: usize) -> Result<()> {
    if region.is_empty() {
        return Err(EngineError::InvalidRegion("region is empty".into()));
    }
    if attend_len == 0 || attend_len > len {
        return Err(EngineError::InvalidRegion(format!(
            "attend_len {attend_len} out of range for length {len}"
        )));
    }
    let mut seen = vec![false; len];
    for &pos in region {
        if pos >= len {
            return Err(EngineError::OutOfRange { pos, len });
        }
        if pos >= attend_len {
            return Err(EngineError::InvalidRegion(format!(
                "region position {pos} outside attention span {attend_len}"
            )));
        }
        if seen[pos] {
            return Err(EngineError::InvalidRegion(format!(
                "duplicate region position {pos}"
            )));
        }
        seen[pos] = true;
    }
    Ok(())
}
