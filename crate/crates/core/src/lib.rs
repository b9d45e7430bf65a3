//! Knowledge-graph-guided synthetic clinical note generation and evaluation.
//!
//! The pipeline: build a disease/drug/symptom knowledge graph ([`kg`]),
//! weight ICD-10 categories and assemble a generation task ([`taskgen`]),
//! render prompts and instruction samples ([`prompting`]), drive a
//! text-generation backend over HTTP with retries and checkpointing
//! ([`gateway`]), ingest the output into a labeled corpus ([`corpus`]),
//! and measure downstream value with a TF-IDF + logistic-regression
//! classification harness ([`eval`]).

pub mod corpus;
pub mod eval;
pub mod gateway;
pub mod icd;
pub mod kg;
pub mod prompting;
pub mod seed;
pub mod taskgen;
pub mod text;

#[cfg(feature = "testutil")]
pub mod test_oracle;

pub use icd::IcdCategory;
pub use kg::KnowledgeGraph;
