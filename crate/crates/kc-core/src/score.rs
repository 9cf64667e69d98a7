//! Triple-level scoring of captured graphs against ground truth:
//! per-sample true/false positive and miss counts, precision/recall/F1
//! with explicit empty-set conventions, and micro-averaged aggregation.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::canon::{canonicalize, CanonMode};
use crate::concept::concept_of;
use crate::graph::{graph_diff, Graph};
use crate::iso::{apply_mapping, best_blank_alignment, BlankMapping};
use crate::schema::OntologySchema;
use crate::term::{Literal, Term, Triple};
use crate::turtle::parse_turtle;
use crate::vocab::default_prefixes;

/// How predicted entities are lined up with gold entities before triples
/// are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum CompareMode {
    /// Entities are keyed by their declared name; graphs are rewritten to
    /// canonical name IRIs and compared exactly.
    NameKeyed,
    /// Blank nodes are aligned by searching for the bijection that
    /// maximizes matched triples.
    Isomorphism,
}

impl CompareMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CompareMode::NameKeyed => "name-keyed",
            CompareMode::Isomorphism => "isomorphism",
        }
    }
}

impl core::fmt::Display for CompareMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for CompareMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "name-keyed" => Ok(CompareMode::NameKeyed),
            "iso" | "isomorphism" => Ok(CompareMode::Isomorphism),
            other => Err(alloc::format!(
                "unknown comparison mode {other:?} (expected name-keyed or iso)"
            )),
        }
    }
}

/// Raw match counts for one sample or one aggregation bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TripleCounts {
    pub tp: u64,
    pub fp: u64,
    #[cfg_attr(feature = "serde", serde(rename = "fn"))]
    pub fn_: u64,
}

impl TripleCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        TripleCounts { tp, fp, fn_ }
    }

    pub fn add(&mut self, other: &TripleCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn is_zero(&self) -> bool {
        self.tp == 0 && self.fp == 0 && self.fn_ == 0
    }
}

/// Precision, recall, and F1 in `[0, 1]`.
///
/// Conventions: precision is `tp/(tp+fp)`, taken as 1.0 when nothing was
/// predicted and nothing was missed (perfect abstention) and 0.0 when
/// nothing was predicted but something was missed; recall symmetric; F1 is
/// the harmonic mean, 0.0 when precision + recall is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn from_counts(counts: &TripleCounts) -> Self {
        let tp = counts.tp as f64;
        let precision = if counts.tp + counts.fp == 0 {
            if counts.fn_ == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            tp / (counts.tp + counts.fp) as f64
        };
        let recall = if counts.tp + counts.fn_ == 0 {
            if counts.fp == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            tp / (counts.tp + counts.fn_) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics { precision, recall, f1 }
    }
}

/// Score of one response against one gold graph.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleScore {
    pub sample_id: String,
    pub counts: TripleCounts,
    /// Counts bucketed by concept tag (`"none"` collects triples outside
    /// the schema's vocabulary).
    pub per_concept: BTreeMap<String, TripleCounts>,
    /// True when the response was not scoreable as Turtle (or could not be
    /// canonicalized); such samples count every gold triple as missed.
    pub parse_failed: bool,
}

impl SampleScore {
    /// Total-miss score for a sample with no response at all (for
    /// instance a failed request): every gold triple becomes a false
    /// negative, exactly as an unparseable response would score under
    /// `mode`.
    pub fn total_miss(
        sample_id: &str,
        gold: &Graph,
        schema: &OntologySchema,
        mode: CompareMode,
    ) -> SampleScore {
        let gold_trimmed = trim_literals(gold);
        let gold_compared = match mode {
            CompareMode::Isomorphism => gold_trimmed,
            CompareMode::NameKeyed => {
                canonicalize(&gold_trimmed, schema, CanonMode::NameKeyed)
                    .unwrap_or(gold_trimmed)
            }
        };
        missed_sample(sample_id, &gold_compared, schema)
    }
}

/// Scoring failure; scoring individual samples never fails, only empty
/// aggregation does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScoreError {
    EmptyInput,
}

impl core::fmt::Display for ScoreError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ScoreError::EmptyInput => f.write_str("cannot aggregate an empty list of scores"),
        }
    }
}

impl core::error::Error for ScoreError {}

/// Aggregated evaluation across samples: micro-averaged metrics, derived
/// from summed counts, plus a per-concept breakdown.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub label: String,
    pub mode: CompareMode,
    /// Hex fingerprint of the schema the run was scored under.
    pub schema_fingerprint: String,
    pub micro_counts: TripleCounts,
    pub micro: Metrics,
    pub per_concept_counts: BTreeMap<String, TripleCounts>,
    pub per_concept: BTreeMap<String, Metrics>,
    pub samples: Vec<SampleScore>,
}

/// Trims surrounding whitespace off every literal's lexical form; literal
/// comparison is exact on the result, with no Unicode normalization.
fn trim_literals(graph: &Graph) -> Graph {
    let mut out = Graph::with_prefixes(graph.prefixes().clone());
    for t in graph.iter() {
        let object = match &t.object {
            Term::Literal(lit) => {
                let trimmed = lit.lexical().trim();
                if trimmed == lit.lexical() {
                    t.object.clone()
                } else {
                    let replacement = if let Some(lang) = lit.language() {
                        Literal::with_language(trimmed, lang).unwrap_or_else(|_| lit.clone())
                    } else if let Some(dt) = lit.datatype() {
                        Literal::typed(trimmed, dt.clone())
                    } else {
                        Literal::plain(trimmed)
                    };
                    Term::Literal(replacement)
                }
            }
            other => other.clone(),
        };
        out.insert(Triple {
            subject: t.subject.clone(),
            predicate: t.predicate.clone(),
            object,
        });
    }
    out
}

fn bucket<'a>(
    per_concept: &'a mut BTreeMap<String, TripleCounts>,
    triple: &Triple,
    schema: &OntologySchema,
) -> &'a mut TripleCounts {
    per_concept.entry(concept_of(triple, schema)).or_default()
}

/// Total-miss score used for unparseable or uncanonicalizable responses.
fn missed_sample(sample_id: &str, gold: &Graph, schema: &OntologySchema) -> SampleScore {
    let mut per_concept = BTreeMap::new();
    for t in gold.iter() {
        bucket(&mut per_concept, t, schema).fn_ += 1;
    }
    SampleScore {
        sample_id: sample_id.to_string(),
        counts: TripleCounts::new(0, 0, gold.len() as u64),
        per_concept,
        parse_failed: true,
    }
}

fn diff_score(
    sample_id: &str,
    prediction: &Graph,
    gold: &Graph,
    schema: &OntologySchema,
) -> SampleScore {
    let diff = graph_diff(prediction, gold);
    let mut per_concept = BTreeMap::new();
    for t in &diff.common {
        bucket(&mut per_concept, t, schema).tp += 1;
    }
    for t in &diff.only_left {
        bucket(&mut per_concept, t, schema).fp += 1;
    }
    for t in &diff.only_right {
        bucket(&mut per_concept, t, schema).fn_ += 1;
    }
    SampleScore {
        sample_id: sample_id.to_string(),
        counts: TripleCounts::new(
            diff.common.len() as u64,
            diff.only_left.len() as u64,
            diff.only_right.len() as u64,
        ),
        per_concept,
        parse_failed: false,
    }
}

/// Scores one response text against a gold graph. Never fails: responses
/// that do not parse (or cannot be canonicalized in name-keyed mode) are
/// counted as missing every gold triple.
///
/// In isomorphism mode the prediction's blank nodes are aligned with the
/// gold's by the match-maximizing bijection; a graph over the blank-node
/// guard degrades to ground-triple matching only.
pub fn score_sample(
    sample_id: &str,
    response_text: &str,
    gold: &Graph,
    schema: &OntologySchema,
    mode: CompareMode,
) -> SampleScore {
    let gold_trimmed = trim_literals(gold);
    let gold_compared = match mode {
        CompareMode::Isomorphism => Some(gold_trimmed.clone()),
        CompareMode::NameKeyed => {
            canonicalize(&gold_trimmed, schema, CanonMode::NameKeyed).ok()
        }
    };
    let Some(gold_compared) = gold_compared else {
        return missed_sample(sample_id, &gold_trimmed, schema);
    };

    let Ok(parsed) = parse_turtle(response_text, &default_prefixes()) else {
        return missed_sample(sample_id, &gold_compared, schema);
    };
    let prediction = trim_literals(&parsed);

    match mode {
        CompareMode::NameKeyed => {
            let Ok(prediction) = canonicalize(&prediction, schema, CanonMode::NameKeyed) else {
                return missed_sample(sample_id, &gold_compared, schema);
            };
            diff_score(sample_id, &prediction, &gold_compared, schema)
        }
        CompareMode::Isomorphism => {
            let mapping = best_blank_alignment(&prediction, &gold_compared)
                .map(|(mapping, _)| mapping)
                .unwrap_or_else(|_| BlankMapping::new());
            let aligned = apply_mapping(&prediction, &mapping, &gold_compared.blank_labels());
            diff_score(sample_id, &aligned, &gold_compared, schema)
        }
    }
}

/// Micro-averages a batch of sample scores: counts are summed across
/// samples (overall and per concept), then the metric formulas are applied
/// once to the sums.
pub fn aggregate(
    samples: Vec<SampleScore>,
    label: &str,
    mode: CompareMode,
    schema_fingerprint: &str,
) -> Result<EvalReport, ScoreError> {
    if samples.is_empty() {
        return Err(ScoreError::EmptyInput);
    }
    let mut micro_counts = TripleCounts::default();
    let mut per_concept_counts: BTreeMap<String, TripleCounts> = BTreeMap::new();
    for sample in &samples {
        micro_counts.add(&sample.counts);
        for (tag, counts) in &sample.per_concept {
            per_concept_counts.entry(tag.clone()).or_default().add(counts);
        }
    }
    let micro = Metrics::from_counts(&micro_counts);
    let per_concept = per_concept_counts
        .iter()
        .map(|(tag, counts)| (tag.clone(), Metrics::from_counts(counts)))
        .collect();
    Ok(EvalReport {
        label: label.to_string(),
        mode,
        schema_fingerprint: schema_fingerprint.to_string(),
        micro_counts,
        micro,
        per_concept_counts,
        per_concept,
        samples,
    })
}

/// Macro average: per-sample metrics computed first, then averaged with
/// equal weight per sample. `None` for an empty batch.
pub fn macro_metrics(samples: &[SampleScore]) -> Option<Metrics> {
    if samples.is_empty() {
        return None;
    }
    let n = samples.len() as f64;
    let mut sum = Metrics { precision: 0.0, recall: 0.0, f1: 0.0 };
    for sample in samples {
        let m = Metrics::from_counts(&sample.counts);
        sum.precision += m.precision;
        sum.recall += m.recall;
        sum.f1 += m.f1;
    }
    Some(Metrics { precision: sum.precision / n, recall: sum.recall / n, f1: sum.f1 / n })
}
