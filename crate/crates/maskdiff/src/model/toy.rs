//! A small seeded bidirectional transformer for desk-scale experiments.
//!
//! Weights are standard-normal pseudo-random scaled by 1/sqrt(d_model),
//! drawn from a ChaCha stream so every run with the same seed sees the
//! same model. Attention is full softmax over the attended span with no
//! causal mask. The output projection is a separate matrix from the input
//! embedding (not weight-tied). Accumulation is f64 throughout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::buffer::TokenBuffer;
use crate::error::{EngineError, Result};
use crate::kvcache::{CacheSpec, KVCache};
use crate::logits::LogitsMatrix;
use crate::math;

use super::{validate_region, DiffusionModel, EmbeddingOverride, EmbeddingTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyModelParams {
    pub vocab: usize,
    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for ToyModelParams {
    fn default() -> Self {
        Self {
            vocab: 64,
            d_model: 32,
            n_layers: 2,
            n_heads: 4,
            max_len: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
struct LayerWeights {
    wq: Vec<f64>,
    wk: Vec<f64>,
    wv: Vec<f64>,
    wo: Vec<f64>,
    /// Feed-forward expansion, `d_model x 4*d_model`.
    w1: Vec<f64>,
    /// Feed-forward contraction, `4*d_model x d_model`.
    w2: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ToyModel {
    params: ToyModelParams,
    emb: EmbeddingTable,
    /// Learned-style positional table, `max_len x d_model`.
    pos: Vec<f64>,
    layers: Vec<LayerWeights>,
    w_out: Vec<f64>,
}

fn sample_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Vec<f64> {
    (0..rows * cols)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z * scale
        })
        .collect()
}

impl ToyModel {
    pub fn new(params: ToyModelParams) -> Result<Self> {
        if params.d_model == 0 || params.n_heads == 0 || !params.d_model.is_multiple_of(params.n_heads) {
            return Err(EngineError::InvalidConfig(format!(
                "d_model {} must be a positive multiple of n_heads {}",
                params.d_model, params.n_heads
            )));
        }
        if params.vocab < 2 {
            return Err(EngineError::InvalidConfig("vocab must be at least 2".into()));
        }
        let d = params.d_model;
        let scale = 1.0 / (d as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        // Draw order is part of the model's identity: emb, pos, per-layer
        // q/k/v/o/ff1/ff2, output projection.
        let emb = EmbeddingTable::new(sample_matrix(&mut rng, params.vocab, d, scale), params.vocab, d);
        let pos = sample_matrix(&mut rng, params.max_len, d, scale);
        let layers = (0..params.n_layers)
            .map(|_| LayerWeights {
                wq: sample_matrix(&mut rng, d, d, scale),
                wk: sample_matrix(&mut rng, d, d, scale),
                wv: sample_matrix(&mut rng, d, d, scale),
                wo: sample_matrix(&mut rng, d, d, scale),
                w1: sample_matrix(&mut rng, d, 4 * d, scale),
                w2: sample_matrix(&mut rng, 4 * d, d, scale),
            })
            .collect();
        let w_out = sample_matrix(&mut rng, d, params.vocab, scale);
        Ok(Self { params, emb, pos, layers, w_out })
    }

    pub fn params(&self) -> &ToyModelParams {
        &self.params
    }

    pub fn output_projection(&self) -> &[f64] {
        &self.w_out
    }

    fn embed_row(&self, tokens: &TokenBuffer, overrides: &EmbeddingOverride, pos: usize) -> Result<Vec<f64>> {
        let d = self.params.d_model;
        let mut row = match overrides.get(pos) {
            Some(v) => {
                if !tokens.is_masked(pos) {
                    return Err(EngineError::OverrideAtDecodedPosition { pos });
                }
                if v.len() != d {
                    return Err(EngineError::InvalidConfig(format!(
                        "override at position {pos} has dimension {}, expected {d}",
                        v.len()
                    )));
                }
                v.to_vec()
            }
            None => {
                let token = tokens.id_at(pos)?;
                if token as usize >= self.params.vocab {
                    return Err(EngineError::InvalidPrompt(format!(
                        "token id {token} at position {pos} outside vocab {}",
                        self.params.vocab
                    )));
                }
                self.emb.row(token).to_vec()
            }
        };
        for (x, p) in row.iter_mut().zip(&self.pos[pos * d..(pos + 1) * d]) {
            *x += p;
        }
        Ok(row)
    }

    /// Embedding matrix for the full sequence (override vectors replace the
    /// mask embedding before the positional term is added).
    pub fn embed(&self, tokens: &TokenBuffer, overrides: &EmbeddingOverride) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(tokens.len() * self.params.d_model);
        for pos in 0..tokens.len() {
            out.extend_from_slice(&self.embed_row(tokens, overrides, pos)?);
        }
        Ok(out)
    }

    /// Shared layer stack. Queries are computed for `region` rows only;
    /// keys/values for out-of-region positions come from the cache. Fresh
    /// region K/V is written back when a cache is present. Returns the
    /// final hidden states for the region (`region.len() x d_model`).
    fn run_layers(
        &self,
        tokens: &TokenBuffer,
        overrides: &EmbeddingOverride,
        mut cache: Option<&mut KVCache>,
        region: &[usize],
        attend_len: usize,
    ) -> Result<Vec<f64>> {
        let d = self.params.d_model;
        let heads = self.params.n_heads;
        let dh = d / heads;
        let inv_sqrt_dh = 1.0 / (dh as f64).sqrt();
        let len = tokens.len();
        let r = region.len();

        if let Some(c) = cache.as_deref() {
            if c.len() != len {
                return Err(EngineError::CacheLengthMismatch { cache_len: c.len(), seq_len: len });
            }
            if !c.is_populated() && region.len() < len {
                return Err(EngineError::CacheNotReady);
            }
        } else {
            // Without a cache every attended position must be in the region.
            let mut covered = vec![false; attend_len];
            for &p in region {
                if p < attend_len {
                    covered[p] = true;
                }
            }
            if let Some(pos) = covered.iter().position(|&c| !c) {
                return Err(EngineError::MissingCacheEntry { pos });
            }
        }

        let mut region_of = vec![usize::MAX; len];
        for (i, &p) in region.iter().enumerate() {
            region_of[p] = i;
        }

        let mut hidden = Vec::with_capacity(r * d);
        for &p in region {
            hidden.extend_from_slice(&self.embed_row(tokens, overrides, p)?);
        }

        let mut q = vec![0.0; r * d];
        let mut k_fresh = vec![0.0; r * d];
        let mut v_fresh = vec![0.0; r * d];
        let mut k_tab = vec![0.0; attend_len * d];
        let mut v_tab = vec![0.0; attend_len * d];
        let mut attn = vec![0.0; r * d];
        let mut proj = vec![0.0; r * d];
        let mut ff_hidden = vec![0.0; r * 4 * d];
        let mut ff_out = vec![0.0; r * d];

        for (layer_idx, layer) in self.layers.iter().enumerate() {
            math::matmul_into(&mut q, &hidden, &layer.wq, r, d, d);
            math::matmul_into(&mut k_fresh, &hidden, &layer.wk, r, d, d);
            math::matmul_into(&mut v_fresh, &hidden, &layer.wv, r, d, d);

            // Assemble the attended K/V table: fresh rows for the region,
            // cached rows elsewhere.
            for j in 0..attend_len {
                let (k_src, v_src): (&[f64], &[f64]) = match region_of[j] {
                    usize::MAX => {
                        let c = cache
                            .as_deref()
                            .ok_or(EngineError::MissingCacheEntry { pos: j })?;
                        (c.k_row(layer_idx, j), c.v_row(layer_idx, j))
                    }
                    ri => (&k_fresh[ri * d..(ri + 1) * d], &v_fresh[ri * d..(ri + 1) * d]),
                };
                k_tab[j * d..(j + 1) * d].copy_from_slice(k_src);
                v_tab[j * d..(j + 1) * d].copy_from_slice(v_src);
            }

            if let Some(c) = cache.as_deref_mut() {
                for (ri, &p) in region.iter().enumerate() {
                    c.store(layer_idx, p, &k_fresh[ri * d..(ri + 1) * d], &v_fresh[ri * d..(ri + 1) * d]);
                }
            }

            // Bidirectional attention: each region query attends every
            // position in [0, attend_len).
            let q_ref = &q;
            let k_ref = &k_tab;
            let v_ref = &v_tab;
            math::for_each_row(&mut attn, d, |ri, out_row| {
                let q_row = &q_ref[ri * d..(ri + 1) * d];
                let mut scores = vec![0.0; attend_len];
                for h in 0..heads {
                    let h0 = h * dh;
                    for (j, s) in scores.iter_mut().enumerate() {
                        let k_row = &k_ref[j * d..(j + 1) * d];
                        let mut dot = 0.0;
                        for t in 0..dh {
                            dot += q_row[h0 + t] * k_row[h0 + t];
                        }
                        *s = dot * inv_sqrt_dh;
                    }
                    math::softmax_in_place(&mut scores);
                    for (j, &w) in scores.iter().enumerate() {
                        let v_row = &v_ref[j * d..(j + 1) * d];
                        for t in 0..dh {
                            out_row[h0 + t] += w * v_row[h0 + t];
                        }
                    }
                }
            });

            math::matmul_into(&mut proj, &attn, &layer.wo, r, d, d);
            for (h, p) in hidden.iter_mut().zip(&proj) {
                *h += p;
            }
            attn.fill(0.0);

            math::matmul_into(&mut ff_hidden, &hidden, &layer.w1, r, d, 4 * d);
            math::relu_in_place(&mut ff_hidden);
            math::matmul_into(&mut ff_out, &ff_hidden, &layer.w2, r, 4 * d, d);
            for (h, f) in hidden.iter_mut().zip(&ff_out) {
                *h += f;
            }
        }

        Ok(hidden)
    }

    fn project_logits(&self, hidden: &[f64], region: &[usize]) -> Result<LogitsMatrix> {
        let d = self.params.d_model;
        let v = self.params.vocab;
        let r = region.len();
        let mut scores = vec![0.0; r * v];
        math::matmul_into(&mut scores, hidden, &self.w_out, r, d, v);
        LogitsMatrix::new(region.to_vec(), v, scores)
    }

    fn forward_impl(
        &self,
        tokens: &TokenBuffer,
        overrides: &EmbeddingOverride,
        cache: Option<&mut KVCache>,
        region: &[usize],
        attend_len: usize,
    ) -> Result<LogitsMatrix> {
        let len = tokens.len();
        if len > self.params.max_len {
            return Err(EngineError::SequenceTooLong { len, max: self.params.max_len });
        }
        validate_region(region, len, attend_len)?;
        let hidden = self.run_layers(tokens, overrides, cache, region, attend_len)?;
        self.project_logits(&hidden, region)
    }
}

impl DiffusionModel for ToyModel {
    fn vocab(&self) -> usize {
        self.params.vocab
    }

    fn max_len(&self) -> usize {
        self.params.max_len
    }

    fn forward(
        &mut self,
        tokens: &TokenBuffer,
        overrides: &EmbeddingOverride,
        cache: Option<&mut KVCache>,
        region: &[usize],
        attend_len: usize,
    ) -> Result<LogitsMatrix> {
        self.forward_impl(tokens, overrides, cache, region, attend_len)
    }

    fn compute_kv_full(
        &mut self,
        tokens: &TokenBuffer,
        overrides: &EmbeddingOverride,
        cache: &mut KVCache,
    ) -> Result<()> {
        let len = tokens.len();
        if cache.len() != len {
            return Err(EngineError::CacheLengthMismatch { cache_len: cache.len(), seq_len: len });
        }
        let region: Vec<usize> = (0..len).collect();
        self.run_layers(tokens, overrides, Some(cache), &region, len)?;
        cache.mark_populated();
        Ok(())
    }

    fn embedding_table(&self) -> Option<&EmbeddingTable> {
        Some(&self.emb)
    }

    fn cache_spec(&self) -> Option<CacheSpec> {
        Some(CacheSpec {
            n_layers: self.params.n_layers,
            d_model: self.params.d_model,
            max_len: self.params.max_len,
        })
    }

    fn reference_logits(
        &self,
        tokens: &TokenBuffer,
        overrides: &EmbeddingOverride,
        region: &[usize],
    ) -> Result<Option<LogitsMatrix>> {
        let all: Vec<usize> = (0..tokens.len()).collect();
        let full = self.forward_impl(tokens, overrides, None, &all, tokens.len())?;
        Ok(Some(full.restrict(region)?))
    }
}
