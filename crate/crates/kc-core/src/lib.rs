//! Core data model and algorithms for prompt-time symbolic knowledge capture.
//!
//! This crate carries everything that does not touch the file system or the
//! network: the RDF term model, a Turtle-subset parser and canonical
//! serializer, name-keyed canonicalization, graph diffing and blank-node
//! isomorphism search, the family ontology schema with validation and
//! rule materialization, and triple-level precision/recall/F1 scoring.
//!
//! The crate is `no_std` (with `alloc`); IO, the CLI, HTTP clients, and file
//! formats live in the companion `kc` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod canon;
pub mod concept;
pub mod graph;
pub mod hash;
pub mod iso;
pub mod materialize;
pub mod schema;
pub mod score;
pub mod term;
pub mod turtle;
pub mod validate;
pub mod vocab;

pub use canon::{canonicalize, CanonError, CanonMode};
pub use concept::{concept_of, CONCEPT_NONE};
pub use graph::{graph_diff, Graph, GraphDiff, PrefixMap};
pub use iso::{apply_mapping, best_blank_alignment, iso_match, BlankMapping, IsoError, BLANK_NODE_LIMIT};
pub use materialize::{materialize, MaterializeError};
pub use schema::{
    load_schema, on_object, on_subject, DataPropertyDef, ImplicationRule, ObjectPropertyDef,
    OntologySchema, RulePosition, SchemaError, SchemaOptions,
};
pub use score::{
    aggregate, macro_metrics, score_sample, CompareMode, EvalReport, Metrics, SampleScore,
    ScoreError, TripleCounts,
};
pub use term::{BlankNode, Iri, Literal, Subject, Term, TermError, Triple};
pub use turtle::{parse_turtle, serialize_turtle, TurtleError};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};
