//! Labeled corpus, oracle interpreter and detection-rate harness.

pub mod corpus;
pub mod harness;
pub mod oracle;

pub use corpus::{generate, write_corpus, CorpusCase, Expected, ExpectedSite, Extent, Variant};
pub use harness::{render_table, run_cases, run_corpus, write_results, BenchResult, Counts, LoadedCase};
pub use oracle::{oracle_interpret, ExecutionFacts, OracleConfig, Universe};
