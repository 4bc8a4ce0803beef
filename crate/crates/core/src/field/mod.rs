//! The scene representation: positional encoding, the density network, the
//! color network conditioned on an appearance embedding, and the flat
//! parameter vector that holds all of it.

mod encoding;
mod eval;
mod params;

pub use encoding::{encoded_len, positional_encode};
pub use eval::{check_unit_direction, embedding_lookup, eval_field, Evaluator, FieldOutput, RayContext, Scratch};
pub use params::{init_params, DenseSpan, EmbeddingMode, FieldConfig, FieldParams, ParamLayout, Span};
