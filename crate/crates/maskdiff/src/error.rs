//! Error type shared across the engine.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid prompt: {0}")]
    InvalidPrompt(String),

    #[error("position {pos} out of range for sequence length {len}")]
    OutOfRange { pos: usize, len: usize },

    #[error("cannot rewrite prompt position {pos}")]
    PromptImmutable { pos: usize },

    #[error("position {pos} is already decided")]
    AlreadyDecided { pos: usize },

    #[error("cannot commit the mask token at position {pos}")]
    CommitMask { pos: usize },

    #[error("sequence length {len} exceeds model capacity {max}")]
    SequenceTooLong { len: usize, max: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("no cached K/V for position {pos}")]
    MissingCacheEntry { pos: usize },

    #[error("cache must be fully populated before a region-restricted forward")]
    CacheNotReady,

    #[error("cache length {cache_len} does not match sequence length {seq_len}")]
    CacheLengthMismatch { cache_len: usize, seq_len: usize },

    #[error("embedding override at non-mask position {pos}")]
    OverrideAtDecodedPosition { pos: usize },

    #[error("no logits row for position {pos}")]
    MissingLogitsRow { pos: usize },

    #[error("non-finite score at position {pos}, token {token}")]
    NonFiniteScore { pos: usize, token: u32 },

    #[error("decode called with an empty undecided set")]
    EmptyUndecided,

    #[error("negative credit entry at position {pos}, token {token}")]
    NegativeCredit { pos: usize, token: u32 },

    #[error("block iterator exhausted")]
    BlocksExhausted,

    #[error("scripted model exhausted after {steps} steps")]
    ScriptExhausted { steps: usize },

    #[error("no active block; generation is complete")]
    NoActiveBlock,

    #[error("benchmark suite contains no prompts")]
    EmptySuite,

    #[error("schema error in {path}: {detail}")]
    Schema { path: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EngineError>;
