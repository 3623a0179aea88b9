//! Shared builders for scripted traces and straight-line oracles.

use maskdiff::logits::SUPPRESSED_SCORE;
use maskdiff::model::ScriptedModel;
use maskdiff::{CachePolicy, DecoderKind, GenerationConfig};

pub const MASK: u32 = 0;
pub const EOS: u32 = 1;

/// Logit that yields top probability `c` after mask suppression when every
/// other non-mask token scores zero: p = e^x / (e^x + vocab - 2).
pub fn confidence_logit(vocab: usize, c: f64) -> f64 {
    (c * (vocab as f64 - 2.0) / (1.0 - c)).ln()
}

/// Step-by-step scripted trace builder. Rows default to zero scores with
/// the mask column pre-suppressed; `hot` entries place a confidence-`c`
/// token at a position.
pub struct TraceBuilder {
    seq_len: usize,
    vocab: usize,
    steps: Vec<Vec<f64>>,
}

impl TraceBuilder {
    pub fn new(seq_len: usize, vocab: usize) -> Self {
        Self { seq_len, vocab, steps: Vec::new() }
    }

    pub fn push_step(&mut self, hot: &[(usize, u32, f64)]) {
        let mut matrix = vec![0.0; self.seq_len * self.vocab];
        for pos in 0..self.seq_len {
            matrix[pos * self.vocab + MASK as usize] = SUPPRESSED_SCORE;
        }
        for &(pos, token, c) in hot {
            matrix[pos * self.vocab + token as usize] = confidence_logit(self.vocab, c);
        }
        self.steps.push(matrix);
    }

    pub fn build(self) -> ScriptedModel {
        ScriptedModel::new(self.seq_len, self.vocab, MASK, EOS, self.steps).unwrap()
    }
}

/// Static-threshold configuration for scripted runs: no schedule decay, no
/// smoothing, no cache.
pub fn scripted_config(gen_len: usize, block_size: usize, decoder: DecoderKind, tau: f64) -> GenerationConfig {
    GenerationConfig {
        gen_len,
        block_size,
        decoder,
        cache: CachePolicy::None,
        threshold: tau,
        sched_target: tau,
        sched_decay_steps: 0,
        smooth: false,
        early_stop: true,
        ..Default::default()
    }
}

/// The confidence-growth workload: stable argmax tokens whose confidence
/// rises linearly per step. Position `i` carries token `2 + i` at
/// confidence `min(base[i] + growth * t, cap)`.
pub struct GrowthTrace {
    pub vocab: usize,
    pub prompt: Vec<u32>,
    pub base: Vec<f64>,
    pub growth: f64,
    pub cap: f64,
    pub steps: usize,
}

impl GrowthTrace {
    pub fn standard() -> Self {
        Self {
            vocab: 16,
            prompt: vec![2, 3],
            base: vec![0.85, 0.85, 0.60, 0.55, 0.50, 0.65, 0.70, 0.45],
            growth: 0.01,
            cap: 0.97,
            steps: 16,
        }
    }

    pub fn gen_len(&self) -> usize {
        self.base.len()
    }

    fn confidence(&self, i: usize, t: usize) -> f64 {
        (self.base[i] + self.growth * t as f64).min(self.cap)
    }

    fn token(&self, i: usize) -> u32 {
        2 + i as u32
    }

    pub fn build(&self) -> ScriptedModel {
        let seq_len = self.prompt.len() + self.gen_len();
        let mut builder = TraceBuilder::new(seq_len, self.vocab);
        for t in 0..self.steps {
            let hot: Vec<(usize, u32, f64)> = (0..self.gen_len())
                .map(|i| (self.prompt.len() + i, self.token(i), self.confidence(i, t)))
                .collect();
            builder.push_step(&hot);
        }
        builder.build()
    }

    /// Probability of the stable token under mask suppression, evaluated
    /// straight from the construction formula.
    fn prob(&self, i: usize, t: usize) -> f64 {
        let x = confidence_logit(self.vocab, self.confidence(i, t));
        let others = self.vocab as f64 - 2.0;
        1.0 / (1.0 + others * (-x).exp())
    }

    /// Straight-line replay of threshold decoding: commit everything at or
    /// above tau, else the single best position. Returns positions
    /// committed per forward (relative to the generation region).
    pub fn oracle_threshold(&self, tau: f64) -> Vec<Vec<usize>> {
        let n = self.gen_len();
        let mut undecided: Vec<usize> = (0..n).collect();
        let mut log = Vec::new();
        let mut t = 0;
        while !undecided.is_empty() {
            let probs: Vec<f64> = undecided.iter().map(|&i| self.prob(i, t)).collect();
            let mut commits: Vec<usize> = undecided
                .iter()
                .zip(&probs)
                .filter(|(_, &p)| p >= tau)
                .map(|(&i, _)| i)
                .collect();
            if commits.is_empty() {
                let mut best = 0;
                for (k, &p) in probs.iter().enumerate() {
                    if p > probs[best] {
                        best = k;
                    }
                }
                commits.push(undecided[best]);
            }
            undecided.retain(|i| !commits.contains(i));
            log.push(commits);
            t += 1;
        }
        log
    }

    /// Straight-line replay of credit decoding with the threshold rule on
    /// the fused distribution. Credits live on the stable token only (no
    /// other token ever tops the raw distribution in this workload).
    pub fn oracle_credit(&self, tau: f64, alpha: f64, beta: f64, gamma: f64) -> Vec<Vec<usize>> {
        let n = self.gen_len();
        let mut undecided: Vec<usize> = (0..n).collect();
        let mut credits = vec![0.0f64; n];
        let mut log = Vec::new();
        let mut t = 0;
        while !undecided.is_empty() {
            let mut fused = Vec::with_capacity(undecided.len());
            for &i in &undecided {
                let p = self.prob(i, t);
                credits[i] = beta * credits[i] + p.powf(gamma);
                let x = confidence_logit(self.vocab, self.confidence(i, t));
                let boost = alpha * credits[i].ln_1p();
                let others = self.vocab as f64 - 2.0;
                let p_fused = 1.0 / (1.0 + others * (-(x + boost)).exp());
                fused.push(p_fused);
            }
            let mut commits: Vec<usize> = undecided
                .iter()
                .zip(&fused)
                .filter(|(_, &p)| p >= tau)
                .map(|(&i, _)| i)
                .collect();
            if commits.is_empty() {
                let mut best = 0;
                for (k, &p) in fused.iter().enumerate() {
                    if p > fused[best] {
                        best = k;
                    }
                }
                commits.push(undecided[best]);
            }
            undecided.retain(|i| !commits.contains(i));
            log.push(commits);
            t += 1;
        }
        log
    }
}

/// Contiguous undecided runs and their midpoints: the recurrence behind
/// the ideal divide-and-conquer depth bound. Returns the hot positions to
/// script per forward until the span empties.
pub fn midpoint_schedule(start: usize, end: usize) -> Vec<Vec<usize>> {
    let mut runs = vec![(start, end)];
    let mut schedule = Vec::new();
    while !runs.is_empty() {
        let mut hot = Vec::new();
        let mut next = Vec::new();
        for (lo, hi) in runs {
            let mid = lo + (hi - lo) / 2;
            hot.push(mid);
            if mid > lo {
                next.push((lo, mid));
            }
            if mid + 1 < hi {
                next.push((mid + 1, hi));
            }
        }
        schedule.push(hot);
        runs = next;
    }
    schedule
}
