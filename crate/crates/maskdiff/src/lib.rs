//! A desk-scale, modular inference engine for masked-diffusion language
//! models.
//!
//! Generation proceeds blockwise over a sequence of mask tokens. Each
//! iteration runs a region-restricted bidirectional forward against a
//! KV cache, a parallel decoding strategy commits some of the masked
//! positions, and iteration smoothing feeds distribution-level context
//! into the next step. Components are modular:
//!
//! - [`model`]: the model interface, a seeded toy transformer, and a
//!   scripted-logits model for controlled experiments.
//! - [`iteration`]: blockwise scheduling plus the mixing-weight and
//!   decode-threshold schedules behind iteration smoothing.
//! - [`decode`]: threshold, hierarchical, and credit decoding.
//! - [`kvcache`]: none/block/dual/vicinity refresh policies.
//! - [`engine`]: the block loop with EOS early termination.
//! - [`metrics`], [`suite`], [`trace`]: TPF/TPS reporting, benchmark
//!   suites, and trace capture/replay.

pub mod buffer;
pub mod config;
pub mod decode;
pub mod engine;
pub mod error;
pub mod iteration;
pub mod kvcache;
pub mod logits;
pub mod math;
pub mod metrics;
pub mod model;
pub mod suite;
pub mod trace;

pub use buffer::{BlockRange, TokenBuffer};
pub use config::{CachePolicy, DecoderKind, GenerationConfig};
pub use decode::{hierarchical_decode, threshold_decode, CommitSet, Confidence, CreditTable};
pub use engine::{generate, EngineSession, GenerationResult, StepRecord};
pub use error::{EngineError, Result};
pub use iteration::{alpha_schedule, smooth_embeddings, threshold_schedule, BlockIterator, SmoothState};
pub use kvcache::{CacheSpec, KVCache, RefreshPolicy};
pub use logits::LogitsMatrix;
pub use metrics::{tpf, tps, RunReport};
pub use model::{DiffusionModel, EmbeddingOverride, ScriptedModel, ToyModel, ToyModelParams};
pub use suite::{run_benchmark, PromptRecord, Suite};
pub use trace::{replay_trace, TraceRecorder};
