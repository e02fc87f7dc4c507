//! Seeded instance corpus and the on-disk document format.

pub mod format;
pub mod generate;
pub mod rng;

pub use format::{parse, read_document, serialize, to_canonical_json, write_document, Document};
pub use generate::{generate, operator_from_spec, Generated, InstanceKind, InstanceSpec, WeightLaw};
pub use rng::CorpusRng;
