//! Parallel decoding strategies: threshold, hierarchical, and credit.
//!
//! Each decoder is a pure function from (logits, undecided positions,
//! parameters) to a commit set. Commit decisions are element-wise
//! comparisons plus reductions over the region; the progress fallback is
//! itself a reduction, so no step depends on data-driven control flow or
//! external state. Every call with a nonempty undecided set commits at
//! least one token, so a block of S masked tokens finishes in at most S
//! forwards.

use crate::buffer::BlockRange;
use crate::error::{EngineError, Result};
use crate::logits::LogitsMatrix;
use crate::math;

/// Tokens to commit this step: `(position, token)` pairs, ascending by
/// position, positions pairwise distinct and currently masked.
pub type CommitSet = Vec<(usize, u32)>;

/// Top candidate at one masked position: the argmax token of the
/// (possibly credit-fused) distribution and its probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confidence {
    pub pos: usize,
    pub token: u32,
    pub prob: f64,
}

/// Softmax argmax per undecided position. Ties in the argmax go to the
/// lowest token id.
pub fn confidences(logits: &LogitsMatrix, undecided: &[usize]) -> Result<Vec<Confidence>> {
    if undecided.is_empty() {
        return Err(EngineError::EmptyUndecided);
    }
    let mut out = Vec::with_capacity(undecided.len());
    for &pos in undecided {
        let row = logits.row_required(pos)?;
        let mut p = row.to_vec();
        math::softmax_in_place(&mut p);
        let token = math::argmax(&p);
        out.push(Confidence { pos, token: token as u32, prob: p[token] });
    }
    Ok(out)
}

fn best_by_prob(conf: &[Confidence]) -> Confidence {
    // Strict > keeps the earliest position on ties.
    let mut best = conf[0];
    for &c in &conf[1..] {
        if c.prob > best.prob {
            best = c;
        }
    }
    best
}

/// Commits every undecided position whose top probability clears `tau`
/// (inclusive). When none do, commits the single highest-probability
/// position so the block always makes progress.
pub fn threshold_decode(logits: &LogitsMatrix, undecided: &[usize], tau: f64) -> Result<CommitSet> {
    let conf = confidences(logits, undecided)?;
    let mut commits: CommitSet = conf
        .iter()
        .filter(|c| c.prob >= tau)
        .map(|c| (c.pos, c.token))
        .collect();
    if commits.is_empty() {
        let best = best_by_prob(&conf);
        commits.push((best.pos, best.token));
    }
    Ok(commits)
}

/// Divide-and-conquer commit strategy over the undecided span.
///
/// (a) every position with `p* >= theta_hi` commits; (b) the undecided
/// list is split recursively at its midpoint, and a sub-span containing no
/// rule-(a) commit contributes its best remaining candidate when that
/// candidate clears `theta_lo`, preferring positions near the sub-span
/// center (distance ties to the lower index); (c) if nothing commits, the
/// globally best candidate does.
pub fn hierarchical_decode(
    logits: &LogitsMatrix,
    undecided: &[usize],
    span: BlockRange,
    theta_hi: f64,
    theta_lo: f64,
) -> Result<CommitSet> {
    let conf = confidences(logits, undecided)?;
    if let Some(c) = conf.iter().find(|c| !span.contains(c.pos)) {
        return Err(EngineError::InvalidRegion(format!(
            "undecided position {} outside the active block [{}, {})",
            c.pos, span.start, span.end
        )));
    }

    let mut committed: Vec<bool> = conf.iter().map(|c| c.prob >= theta_hi).collect();
    let from_rule_a = committed.clone();

    fn recurse(
        conf: &[Confidence],
        lo: usize,
        hi: usize,
        from_rule_a: &[bool],
        committed: &mut [bool],
        theta_lo: f64,
    ) {
        if lo >= hi {
            return;
        }
        let has_rule_a = from_rule_a[lo..hi].iter().any(|&a| a);
        if !has_rule_a {
            let center = (conf[lo].pos as f64 + conf[hi - 1].pos as f64) / 2.0;
            let mut best: Option<usize> = None;
            for i in lo..hi {
                if committed[i] {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => {
                        let (pb, pi) = (conf[b].prob, conf[i].prob);
                        if pi != pb {
                            pi > pb
                        } else {
                            // Prob tie: prefer the center-proximal position,
                            // then the lower index.
                            let (db, di) = (
                                (conf[b].pos as f64 - center).abs(),
                                (conf[i].pos as f64 - center).abs(),
                            );
                            di < db
                        }
                    }
                };
                if better {
                    best = Some(i);
                }
            }
            if let Some(i) = best {
                if conf[i].prob >= theta_lo {
                    committed[i] = true;
                }
            }
        }
        if hi - lo == 1 {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        recurse(conf, lo, mid, from_rule_a, committed, theta_lo);
        recurse(conf, mid, hi, from_rule_a, committed, theta_lo);
    }

    recurse(&conf, 0, conf.len(), &from_rule_a, &mut committed, theta_lo);

    let mut commits: CommitSet = conf
        .iter()
        .zip(&committed)
        .filter(|(_, &c)| c)
        .map(|(c, _)| (c.pos, c.token))
        .collect();
    if commits.is_empty() {
        let best = best_by_prob(&conf);
        commits.push((best.pos, best.token));
    }
    Ok(commits)
}

/// Block-scoped accumulated confidence, one row per block position.
///
/// Each step, every undecided row decays by `beta` and the current top
/// candidate gains `p*^gamma`. Rows of decided positions are untouched
/// from the step they were committed.
#[derive(Debug, Clone, PartialEq)]
pub struct CreditTable {
    start: usize,
    width: usize,
    vocab: usize,
    beta: f64,
    gamma: f64,
    data: Vec<f64>,
}

impl CreditTable {
    pub fn new(block: BlockRange, vocab: usize, beta: f64, gamma: f64) -> Self {
        Self {
            start: block.start,
            width: block.width(),
            vocab,
            beta,
            gamma,
            data: vec![0.0; block.width() * vocab],
        }
    }

    pub fn block(&self) -> BlockRange {
        BlockRange::new(self.start, self.start + self.width)
    }

    /// Zeroes every entry and moves the scope to `block`.
    pub fn reset(&mut self, block: BlockRange) {
        self.start = block.start;
        self.width = block.width();
        self.data.clear();
        self.data.resize(self.width * self.vocab, 0.0);
    }

    fn row_index(&self, pos: usize) -> Result<usize> {
        if pos < self.start || pos >= self.start + self.width {
            return Err(EngineError::InvalidRegion(format!(
                "position {pos} outside credit scope [{}, {})",
                self.start,
                self.start + self.width
            )));
        }
        Ok(pos - self.start)
    }

    pub fn get(&self, pos: usize, token: u32) -> Result<f64> {
        let row = self.row_index(pos)?;
        Ok(self.data[row * self.vocab + token as usize])
    }

    /// Decays undecided rows and boosts each row's current top candidate.
    /// `logits` must be the model's raw distribution for the undecided
    /// positions (fusion happens afterwards).
    pub fn update(&mut self, logits: &LogitsMatrix, undecided: &[usize]) -> Result<()> {
        let conf = confidences(logits, undecided)?;
        for c in conf {
            let row = self.row_index(c.pos)?;
            let slice = &mut self.data[row * self.vocab..(row + 1) * self.vocab];
            for entry in slice.iter_mut() {
                *entry *= self.beta;
            }
            slice[c.token as usize] += c.prob.powf(self.gamma);
        }
        Ok(())
    }

    /// Log-domain prior fusion: `f~[i][v] = f[i][v] + alpha * ln(1 + C[i][v])`.
    /// With `alpha == 0` the logits pass through unchanged.
    pub fn fuse(&self, logits: &LogitsMatrix, alpha: f64) -> Result<LogitsMatrix> {
        if alpha == 0.0 {
            return Ok(logits.clone());
        }
        let vocab = logits.vocab();
        let mut positions = Vec::with_capacity(logits.num_rows());
        let mut scores = Vec::with_capacity(logits.num_rows() * vocab);
        for (pos, row) in logits.rows() {
            let idx = self.row_index(pos)?;
            let credits = &self.data[idx * self.vocab..(idx + 1) * self.vocab];
            for (v, (&f, &c)) in row.iter().zip(credits).enumerate() {
                if c < 0.0 {
                    return Err(EngineError::NegativeCredit { pos, token: v as u32 });
                }
                scores.push(f + alpha * c.ln_1p());
            }
            positions.push(pos);
        }
        LogitsMatrix::new(positions, vocab, scores)
    }
}
