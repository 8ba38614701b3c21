//! Uniform access to text generation and sentence embedding.
//!
//! [`TextGenerator`] and [`Embedder`] are implemented by remote HTTP
//! providers ([`RemoteGenerator`], [`RemoteEmbedder`]) and by deterministic
//! offline providers ([`ScriptedGenerator`], [`ToyEmbedder`]). Stop-sequence
//! truncation happens in [`TextGenerator::generate`] so every provider honors
//! it the same way.

mod embed;
mod error;
mod remote;
mod request;
mod scripted;

pub use embed::{cosine, fnv1a, tokens, Embedder, EmbeddingVector, ToyEmbedder, TOY_DIMENSION};
pub use error::{GatewayError, Result};
pub use remote::{ChatStyle, RemoteConfig, RemoteEmbedder, RemoteGenerator};
pub use request::{truncate_at_stops, GenerationRequest, TextGenerator};
pub use scripted::{step_index, FnGenerator, ScriptedGenerator, ASSISTANT_HEADER};
