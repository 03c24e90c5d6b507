//! Session files, cached runs, corpus generation and corpus-wide verification.

pub mod cache;
pub mod corpus;
pub mod run;
pub mod session;
pub mod verify;

pub use cache::{Cache, CacheStats, Lookup};
pub use corpus::{generate_corpus, Corpus, CorpusSpec};
pub use run::{run_parsed, run_session, ReportBundle, RunOptions};
pub use session::{parse_session, resolve, Session};
pub use verify::{default_conditions, verify_theorems, verify_theorems_timed, TheoremReport};
