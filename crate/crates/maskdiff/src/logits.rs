//! Per-position, per-vocabulary score matrices for a queried region.

use crate::error::{EngineError, Result};

/// Score used to rule a token out of the softmax without resorting to
/// infinities (rows must stay finite). exp(-1e9 - x) underflows to zero for
/// any realistic logit, so a suppressed token gets exactly zero probability.
pub const SUPPRESSED_SCORE: f64 = -1e9;

/// Unnormalized scores for a set of positions. Row `i` belongs to
/// `positions[i]`; each row has `vocab` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitsMatrix {
    positions: Vec<usize>,
    vocab: usize,
    scores: Vec<f64>,
}

impl LogitsMatrix {
    pub fn new(positions: Vec<usize>, vocab: usize, scores: Vec<f64>) -> Result<Self> {
        if positions.len() * vocab != scores.len() {
            return Err(EngineError::InvalidRegion(format!(
                "{} rows of {} scores but got {} values",
                positions.len(),
                vocab,
                scores.len()
            )));
        }
        for (i, &s) in scores.iter().enumerate() {
            if !s.is_finite() {
                return Err(EngineError::NonFiniteScore {
                    pos: positions[i / vocab],
                    token: (i % vocab) as u32,
                });
            }
        }
        Ok(Self { positions, vocab, scores })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn num_rows(&self) -> usize {
        self.positions.len()
    }

    fn row_index(&self, pos: usize) -> Option<usize> {
        // Regions are small; positions are usually sorted but a scan keeps
        // no ordering assumption.
        self.positions.iter().position(|&p| p == pos)
    }

    pub fn row(&self, pos: usize) -> Option<&[f64]> {
        self.row_index(pos)
            .map(|i| &self.scores[i * self.vocab..(i + 1) * self.vocab])
    }

    pub fn row_required(&self, pos: usize) -> Result<&[f64]> {
        self.row(pos).ok_or(EngineError::MissingLogitsRow { pos })
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.positions
            .iter()
            .copied()
            .zip(self.scores.chunks_exact(self.vocab))
    }

    pub fn raw_scores(&self) -> &[f64] {
        &self.scores
    }

    /// New matrix containing only the requested positions, in the given
    /// order. Errors if a position has no row.
    pub fn restrict(&self, positions: &[usize]) -> Result<Self> {
        let mut scores = Vec::with_capacity(positions.len() * self.vocab);
        for &pos in positions {
            scores.extend_from_slice(self.row_required(pos)?);
        }
        Ok(Self {
            positions: positions.to_vec(),
            vocab: self.vocab,
            scores,
        })
    }

    /// Forces `token`'s score to [`SUPPRESSED_SCORE`] in every row.
    pub fn suppress_token(&self, token: u32) -> Self {
        let mut out = self.clone();
        let idx = token as usize;
        if idx < self.vocab {
            for row in out.scores.chunks_exact_mut(self.vocab) {
                row[idx] = SUPPRESSED_SCORE;
            }
        }
        out
    }
}
