//! Prompt/ground-truth corpus: line-delimited JSON records carrying a user
//! prompt and its expected Turtle capture, loaded with full validation
//! against the ontology schema.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use kc_core::vocab::default_prefixes;
use kc_core::{concept_of, parse_turtle, serialize_turtle, validate, Graph, OntologySchema, CONCEPT_NONE};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The corpus bundled with the toolkit: a desk-scale set of handcrafted
/// prompts covering every modeled concept, plus generic out-of-context
/// prompts whose correct capture is the empty graph.
pub const BUNDLED_CORPUS: &str = include_str!("../assets/corpus.jsonl");

/// Frozen per-concept counts for the bundled corpus, recomputed by an
/// independent scan and kept as a cross-check for `corpus_stats`.
pub const BUNDLED_MANIFEST: &str = include_str!("../assets/corpus_manifest.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    /// The prompt states personal facts; the expected graph is non-empty.
    Ontology,
    /// Out-of-context prompt; the expected capture is the empty graph.
    Generic,
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleKind::Ontology => "ontology",
            SampleKind::Generic => "generic",
        })
    }
}

/// One corpus entry: a prompt with its expected capture graph and the
/// concept tags derived from that graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub prompt: String,
    pub expected: Graph,
    pub concepts: BTreeSet<String>,
    pub kind: SampleKind,
}

impl Sample {
    pub fn is_generic(&self) -> bool {
        self.kind == SampleKind::Generic
    }
}

/// On-disk record shape: one JSON object per line.
#[derive(Debug, Serialize, Deserialize)]
struct RawSample {
    id: String,
    prompt: String,
    expected_turtle: String,
    kind: SampleKind,
}

/// An ordered, id-unique collection of samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    samples: Vec<Sample>,
}

/// One rejected record with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleIssue {
    /// Sample id, or `line N` when the record had no readable id.
    pub id: String,
    pub message: String,
}

impl fmt::Display for SampleIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sample {}: {}", self.id, self.message)
    }
}

fn format_issues(issues: &[SampleIssue]) -> String {
    let lines: Vec<String> = issues.iter().map(|i| format!("  - {i}")).collect();
    format!("corpus rejected with {} problem(s):\n{}", issues.len(), lines.join("\n"))
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", format_issues(.0))]
    Invalid(Vec<SampleIssue>),
}

impl Corpus {
    /// Builds a corpus, enforcing unique ids and unique prompts.
    pub fn from_samples(samples: Vec<Sample>) -> Result<Corpus, CorpusError> {
        let mut issues = Vec::new();
        let mut ids = BTreeSet::new();
        let mut prompts = BTreeSet::new();
        for sample in &samples {
            if !ids.insert(sample.id.clone()) {
                issues.push(SampleIssue {
                    id: sample.id.clone(),
                    message: "duplicate sample id".into(),
                });
            }
            if !prompts.insert(sample.prompt.clone()) {
                issues.push(SampleIssue {
                    id: sample.id.clone(),
                    message: "duplicate prompt text".into(),
                });
            }
        }
        if issues.is_empty() {
            Ok(Corpus { samples })
        } else {
            Err(CorpusError::Invalid(issues))
        }
    }

    /// Internal constructor for subsets of an already-validated corpus.
    pub(crate) fn from_validated(samples: Vec<Sample>) -> Corpus {
        Corpus { samples }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.id == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter()
    }

    pub fn ids(&self) -> BTreeSet<&str> {
        self.samples.iter().map(|s| s.id.as_str()).collect()
    }
}

/// Derives the concept tags of a sample from its expected graph; generic
/// (empty) graphs map to the `none` tag.
fn derive_concepts(expected: &Graph, schema: &OntologySchema) -> BTreeSet<String> {
    if expected.is_empty() {
        return BTreeSet::from([CONCEPT_NONE.to_string()]);
    }
    expected.iter().map(|t| concept_of(t, schema)).collect()
}

fn check_sample(raw: RawSample, schema: &OntologySchema, issues: &mut Vec<SampleIssue>) -> Sample {
    let mut local = Vec::new();
    let mut parse_failed = false;
    let expected = match parse_turtle(&raw.expected_turtle, &default_prefixes()) {
        Ok(graph) => graph,
        Err(err) => {
            local.push(format!("expected graph does not parse: {err}"));
            parse_failed = true;
            Graph::new()
        }
    };
    let report = validate(&expected, schema);
    for violation in &report.violations {
        local.push(format!("expected graph fails validation: {violation}"));
    }
    match raw.kind {
        SampleKind::Generic if !expected.is_empty() => {
            local.push("generic sample must have an empty expected graph".into());
        }
        SampleKind::Ontology if expected.is_empty() && !parse_failed => {
            local.push("ontology sample must have a non-empty expected graph".into());
        }
        _ => {}
    }
    issues.extend(
        local.into_iter().map(|message| SampleIssue { id: raw.id.clone(), message }),
    );
    let concepts = derive_concepts(&expected, schema);
    Sample { id: raw.id, prompt: raw.prompt, expected, concepts, kind: raw.kind }
}

/// Loads a corpus from line-delimited JSON text, aggregating every
/// malformed or invalid record into one error.
pub fn load_corpus_str(text: &str, schema: &OntologySchema) -> Result<Corpus, CorpusError> {
    let mut issues = Vec::new();
    let mut samples = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RawSample>(line) {
            Ok(raw) => samples.push(check_sample(raw, schema, &mut issues)),
            Err(err) => issues.push(SampleIssue {
                id: format!("line {}", index + 1),
                message: format!("malformed record: {err}"),
            }),
        }
    }
    let mut ids = BTreeSet::new();
    let mut prompts = BTreeSet::new();
    for sample in &samples {
        if !ids.insert(sample.id.clone()) {
            issues.push(SampleIssue { id: sample.id.clone(), message: "duplicate sample id".into() });
        }
        if !prompts.insert(sample.prompt.clone()) {
            issues.push(SampleIssue { id: sample.id.clone(), message: "duplicate prompt text".into() });
        }
    }
    if issues.is_empty() {
        Ok(Corpus { samples })
    } else {
        Err(CorpusError::Invalid(issues))
    }
}

/// Loads and validates a corpus file.
pub fn load_corpus(path: &Path, schema: &OntologySchema) -> Result<Corpus, CorpusError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    load_corpus_str(&text, schema)
}

/// Writes a corpus back to the line-delimited JSON format, serializing
/// each expected graph canonically. Returns the number of records.
pub fn write_corpus(corpus: &Corpus, path: &Path) -> std::io::Result<usize> {
    let mut out = String::new();
    for sample in corpus.iter() {
        let raw = RawSample {
            id: sample.id.clone(),
            prompt: sample.prompt.clone(),
            expected_turtle: serialize_turtle(&sample.expected, &default_prefixes()),
            kind: sample.kind,
        };
        out.push_str(&serde_json::to_string(&raw).expect("record serializes"));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(corpus.len())
}

/// The bundled corpus, validated against the bundled family ontology it was
/// authored for. Panics only if the compiled-in asset is inconsistent, which
/// the crate's own tests rule out.
pub fn bundled_corpus() -> Corpus {
    load_corpus_str(BUNDLED_CORPUS, &OntologySchema::bundled()).expect("bundled corpus is valid")
}

/// Frozen summary of the bundled corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub samples: u64,
    pub ontology: u64,
    pub generic: u64,
    pub concepts: BTreeMap<String, u64>,
}

pub fn bundled_manifest() -> CorpusManifest {
    serde_json::from_str(BUNDLED_MANIFEST).expect("bundled manifest parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> OntologySchema {
        OntologySchema::bundled()
    }

    #[test]
    fn loads_well_formed_records() {
        let text = concat!(
            r#"{"id":"a","prompt":"My father is Ted.","expected_turtle":"_:me know:father _:f . _:f know:name \"Ted\" .","kind":"ontology"}"#,
            "\n",
            r#"{"id":"b","prompt":"Nice weather.","expected_turtle":"","kind":"generic"}"#,
            "\n",
        );
        let corpus = load_corpus_str(text, &schema()).unwrap();
        assert_eq!(corpus.len(), 2);
        let a = corpus.get("a").unwrap();
        assert_eq!(a.expected.len(), 2);
        assert_eq!(
            a.concepts,
            BTreeSet::from(["father".to_string(), "name".to_string()])
        );
        let b = corpus.get("b").unwrap();
        assert!(b.is_generic());
        assert_eq!(b.concepts, BTreeSet::from([CONCEPT_NONE.to_string()]));
    }

    #[test]
    fn rejects_invalid_expected_graphs() {
        // know:name expects a literal; an IRI object is a range violation.
        let text = r#"{"id":"bad","prompt":"x","expected_turtle":"_:me know:name <urn:kc:person:y> .","kind":"ontology"}"#;
        let err = load_corpus_str(text, &schema()).unwrap_err();
        let CorpusError::Invalid(issues) = err else { panic!("expected Invalid") };
        assert!(issues[0].message.contains("validation"), "{}", issues[0]);
        assert_eq!(issues[0].id, "bad");
    }

    #[test]
    fn rejects_duplicate_ids_and_prompts() {
        let text = concat!(
            r#"{"id":"a","prompt":"p1","expected_turtle":"","kind":"generic"}"#,
            "\n",
            r#"{"id":"a","prompt":"p2","expected_turtle":"","kind":"generic"}"#,
            "\n",
            r#"{"id":"c","prompt":"p1","expected_turtle":"","kind":"generic"}"#,
            "\n",
        );
        let err = load_corpus_str(text, &schema()).unwrap_err();
        let CorpusError::Invalid(issues) = err else { panic!("expected Invalid") };
        let messages: Vec<&str> = issues.iter().map(|i| i.message.as_str()).collect();
        assert!(messages.contains(&"duplicate sample id"));
        assert!(messages.contains(&"duplicate prompt text"));
    }

    #[test]
    fn rejects_malformed_json_with_line_numbers() {
        let text = "{\"id\": \"a\"\n";
        let err = load_corpus_str(text, &schema()).unwrap_err();
        let CorpusError::Invalid(issues) = err else { panic!("expected Invalid") };
        assert_eq!(issues[0].id, "line 1");
    }

    #[test]
    fn kind_and_graph_emptiness_must_agree() {
        let generic_with_triples = r#"{"id":"g","prompt":"x","expected_turtle":"_:me know:name \"A\" .","kind":"generic"}"#;
        assert!(load_corpus_str(generic_with_triples, &schema()).is_err());
        let ontology_empty = r#"{"id":"o","prompt":"y","expected_turtle":"","kind":"ontology"}"#;
        assert!(load_corpus_str(ontology_empty, &schema()).is_err());
    }

    #[test]
    fn bundled_corpus_loads_cleanly() {
        let corpus = bundled_corpus();
        assert!(!corpus.is_empty());
        let manifest = bundled_manifest();
        assert_eq!(corpus.len() as u64, manifest.samples);
        let generic = corpus.iter().filter(|s| s.is_generic()).count() as u64;
        assert_eq!(generic, manifest.generic);
        assert_eq!(corpus.len() as u64 - generic, manifest.ontology);
    }

    #[test]
    fn write_then_load_round_trips() {
        let schema = schema();
        let corpus = bundled_corpus();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("copy.jsonl");
        let written = write_corpus(&corpus, &path).unwrap();
        assert_eq!(written, corpus.len());
        let back = load_corpus(&path, &schema).unwrap();
        assert_eq!(back.len(), corpus.len());
        for (a, b) in corpus.iter().zip(back.iter()) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.expected, b.expected);
            assert_eq!(a.concepts, b.concepts);
        }
    }
}
