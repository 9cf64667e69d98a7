//! The capture pipeline: raw model response -> parsed graph -> canonical
//! names -> validation -> materialized closure. Arbitrary response text is
//! always classified, never a crash: every input ends captured, empty, or
//! rejected.

use kc_core::vocab::default_prefixes;
use kc_core::{
    canonicalize, materialize, parse_turtle, validate, CanonMode, Graph, OntologySchema,
    ValidationReport,
};

use crate::client::{ClientError, ModelClient};

/// Terminal classification of one response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaptureStatus {
    /// Valid, non-empty knowledge was extracted and materialized.
    Captured,
    /// The response states no facts (empty graph) — the correct answer
    /// for out-of-context prompts.
    Empty,
    /// The response could not be accepted: unparseable, invalid against
    /// the ontology, ambiguous, or self-contradictory once materialized.
    Rejected,
}

impl CaptureStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaptureStatus::Captured => "captured",
            CaptureStatus::Empty => "empty",
            CaptureStatus::Rejected => "rejected",
        }
    }
}

impl std::fmt::Display for CaptureStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything the pipeline learned about one response, kept even on
/// rejection so callers can explain what went wrong.
#[derive(Debug, Clone)]
pub struct CaptureResult {
    pub raw_response: String,
    /// The canonicalized graph, or the parse/canonicalization error text.
    pub parsed: Result<Graph, String>,
    /// Validation findings for the furthest graph the pipeline reached.
    pub validation: ValidationReport,
    /// The materialized closure; present unless the response was rejected.
    pub materialized: Option<Graph>,
    pub status: CaptureStatus,
}

impl CaptureResult {
    /// The graph a store should merge, when there is one.
    pub fn captured_graph(&self) -> Option<&Graph> {
        self.materialized.as_ref()
    }

    fn rejected(raw: &str, parsed: Result<Graph, String>, validation: ValidationReport) -> Self {
        CaptureResult {
            raw_response: raw.to_string(),
            parsed,
            validation,
            materialized: None,
            status: CaptureStatus::Rejected,
        }
    }
}

/// Classifies one raw response against the schema. Total over arbitrary
/// input: nothing panics, nothing is silently accepted.
pub fn capture_response(raw: &str, schema: &OntologySchema) -> CaptureResult {
    let graph = match parse_turtle(raw, &default_prefixes()) {
        Ok(graph) => graph,
        Err(e) => {
            return CaptureResult::rejected(
                raw,
                Err(e.to_string()),
                ValidationReport { violations: Vec::new() },
            );
        }
    };

    let canonical = match canonicalize(&graph, schema, CanonMode::NameKeyed) {
        Ok(canonical) => canonical,
        Err(e) => {
            // Validation of the raw graph explains the ambiguity.
            let validation = validate(&graph, schema);
            return CaptureResult::rejected(raw, Err(e.to_string()), validation);
        }
    };

    let validation = validate(&canonical, schema);
    if !validation.is_clean() {
        return CaptureResult::rejected(raw, Ok(canonical), validation);
    }

    if canonical.is_empty() {
        return CaptureResult {
            raw_response: raw.to_string(),
            parsed: Ok(canonical.clone()),
            validation,
            materialized: Some(canonical),
            status: CaptureStatus::Empty,
        };
    }

    let materialized = materialize(&canonical, schema).expect("validated graph materializes");
    let derived_validation = validate(&materialized, schema);
    if !derived_validation.is_clean() {
        // The stated facts are individually fine but imply a contradiction
        // (for instance a person who must be both male and female).
        return CaptureResult::rejected(raw, Ok(canonical), derived_validation);
    }

    CaptureResult {
        raw_response: raw.to_string(),
        parsed: Ok(canonical),
        validation: derived_validation,
        materialized: Some(materialized),
        status: CaptureStatus::Captured,
    }
}

/// Asks the client for a completion and runs it through the pipeline.
/// Only transport-level failures surface as errors; every answered prompt
/// yields a classified [`CaptureResult`].
pub fn capture(
    sample_id: &str,
    prompt: &str,
    client: &dyn ModelClient,
    schema: &OntologySchema,
) -> Result<CaptureResult, ClientError> {
    let raw = client.complete(sample_id, prompt)?;
    Ok(capture_response(&raw, schema))
}
