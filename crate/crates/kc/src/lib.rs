//! Std companion crate for the knowledge-capture toolkit: corpus and
//! dataset management, model clients (endpoint, replay, oracle), the
//! capture pipeline, the persistent store, evaluation and sweep
//! orchestration, and the `kc` command-line interface.
//!
//! The dependency-light core algorithms (parsing, validation,
//! materialization, scoring) live in `kc-core`; this crate adds IO, file
//! formats, HTTP, and process-level concerns.

pub mod capture;
pub mod cli;
pub mod client;
pub mod config;
pub mod corpus;
pub mod dataset;
pub mod eval;
pub mod manifest;
pub mod store;
pub mod svg;

pub use capture::{capture, capture_response, CaptureResult, CaptureStatus};
pub use client::{
    api_key_from_env, batch_complete, write_replay_file, ClientError, CompletionRecord,
    EndpointClient, EndpointConfig, ModelClient, OracleClient, OracleNoise, ReplayClient,
    ReplayEntry, RetryConfig, API_KEY_VAR,
};
pub use corpus::{
    bundled_corpus, bundled_manifest, load_corpus, write_corpus, Corpus, CorpusError,
    CorpusManifest, Sample, SampleKind,
};
pub use dataset::{
    bundled_test_split, chat_record, corpus_stats, export_chat_jsonl, select_k_per_concept,
    split, ConceptHistogram, DatasetError, SplitSpec, Splits, SWEPT_CONCEPTS,
};
pub use eval::{run_eval, run_sweep, write_csv, EvalError, FailMode, SweepManifest, SweepOutcome};
pub use manifest::{
    AdapterHyperparameters, ManifestError, TrainingManifest, DEFAULT_MODEL_NAME,
    DEFAULT_SYSTEM_PROMPT,
};
pub use store::{MergePolicy, MergeReport, ProvenanceEntry, Store, StoreError};
pub use svg::render_svg;
