//! Dataset management: concept histograms, seeded splits, per-concept
//! subset selection for ablation sweeps, and chat-format JSONL export.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use kc_core::serialize_turtle;

use crate::corpus::{Corpus, Sample};
use crate::manifest::TrainingManifest;

/// The relationship concepts swept in ablation studies, in sweep order.
pub const SWEPT_CONCEPTS: [&str; 9] = [
    "child", "father", "mother", "sibling", "sister", "brother", "spouse", "partner", "knows",
];

/// How to carve a corpus into train/validation/test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    pub test_count: usize,
    pub validation_count: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { seed: 0, test_count: 41, validation_count: 0 }
    }
}

/// The three disjoint subsets produced by [`split`]; each preserves the
/// sample order of the source corpus.
#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Corpus,
    pub validation: Corpus,
    pub test: Corpus,
}

/// Concept tag -> number of samples carrying that tag.
pub type ConceptHistogram = BTreeMap<String, u64>;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(
        "infeasible split: test {test} + validation {validation} must leave at least one of the {corpus} samples for training"
    )]
    InfeasibleSplit { test: usize, validation: usize, corpus: usize },
    #[error("insufficient samples tagged {concept:?}: have {have}, need {need}")]
    InsufficientSamples { concept: String, have: usize, need: usize },
    #[error("refusing to overwrite existing file {0} (pass force to allow)")]
    OutputExists(PathBuf),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Counts, for every concept tag, how many samples carry it. Each sample
/// contributes at most one count per tag.
pub fn corpus_stats(corpus: &Corpus) -> ConceptHistogram {
    let mut histogram = ConceptHistogram::new();
    for sample in corpus.iter() {
        for concept in &sample.concepts {
            *histogram.entry(concept.clone()).or_insert(0) += 1;
        }
    }
    histogram
}

fn subset(corpus: &Corpus, keep: &BTreeSet<usize>) -> Corpus {
    let samples: Vec<Sample> = corpus
        .iter()
        .enumerate()
        .filter(|(i, _)| keep.contains(i))
        .map(|(_, s)| s.clone())
        .collect();
    Corpus::from_validated(samples)
}

/// Splits a corpus into disjoint test/validation/train subsets by seeded
/// shuffle. The same seed over the same corpus always yields the same
/// split, and every subset keeps the original corpus ordering.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<Splits, DatasetError> {
    let reserved = spec.test_count + spec.validation_count;
    if reserved >= corpus.len() {
        return Err(DatasetError::InfeasibleSplit {
            test: spec.test_count,
            validation: spec.validation_count,
            corpus: corpus.len(),
        });
    }
    let mut indices: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    indices.shuffle(&mut rng);
    let test: BTreeSet<usize> = indices[..spec.test_count].iter().copied().collect();
    let validation: BTreeSet<usize> = indices[spec.test_count..reserved].iter().copied().collect();
    let train: BTreeSet<usize> = indices[reserved..].iter().copied().collect();
    Ok(Splits {
        train: subset(corpus, &train),
        validation: subset(corpus, &validation),
        test: subset(corpus, &test),
    })
}

/// The fixed holdout split of the bundled corpus (seed 0, one quarter of
/// the samples, no validation slice): the test set used by end-to-end
/// checks and available as a default for `eval`.
pub fn bundled_test_split() -> Corpus {
    let corpus = crate::corpus::bundled_corpus();
    let spec = SplitSpec { seed: 0, test_count: corpus.len() / 4, validation_count: 0 };
    split(&corpus, &spec).expect("bundled corpus splits").test
}

/// Greedily selects a subset holding at least `k` samples per requested
/// concept (counting co-occurrence: one sample may satisfy several
/// quotas). Generic samples ride along unless `include_generic` is false.
/// Selection is seed-deterministic.
pub fn select_k_per_concept(
    corpus: &Corpus,
    k: usize,
    concepts: &[String],
    seed: u64,
    include_generic: bool,
) -> Result<Corpus, DatasetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected: BTreeSet<usize> = BTreeSet::new();
    for concept in concepts {
        loop {
            let have = selected
                .iter()
                .filter(|&&i| corpus.samples()[i].concepts.contains(concept))
                .count();
            if have >= k {
                break;
            }
            let pool: Vec<usize> = (0..corpus.len())
                .filter(|i| {
                    !selected.contains(i) && corpus.samples()[*i].concepts.contains(concept)
                })
                .collect();
            if pool.is_empty() {
                return Err(DatasetError::InsufficientSamples {
                    concept: concept.clone(),
                    have,
                    need: k,
                });
            }
            let pick = pool[rng.gen_range(0..pool.len())];
            selected.insert(pick);
        }
    }
    if include_generic {
        for (i, sample) in corpus.iter().enumerate() {
            if sample.is_generic() {
                selected.insert(i);
            }
        }
    }
    Ok(subset(corpus, &selected))
}

/// One line of a chat-format fine-tuning file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatRecord {
    pub messages: Vec<ChatMessage>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// Renders one sample as a system/user/assistant chat record. Generic
/// samples get an empty assistant message; ontology samples get the
/// canonical serialization of their expected graph.
pub fn chat_record(sample: &Sample, system_prompt: &str) -> ChatRecord {
    let assistant = if sample.expected.is_empty() {
        String::new()
    } else {
        serialize_turtle(&sample.expected, sample.expected.prefixes())
    };
    ChatRecord {
        messages: vec![
            ChatMessage { role: "system".into(), content: system_prompt.to_string() },
            ChatMessage { role: "user".into(), content: sample.prompt.clone() },
            ChatMessage { role: "assistant".into(), content: assistant },
        ],
    }
}

fn io_err(path: &Path, source: std::io::Error) -> DatasetError {
    DatasetError::Io { path: path.display().to_string(), source }
}

/// Writes the corpus as chat-format JSONL plus a `<out>.manifest.json`
/// sidecar recording the training configuration. Refuses to overwrite
/// existing files unless `force` is set. Returns the number of records.
pub fn export_chat_jsonl(
    corpus: &Corpus,
    manifest: &TrainingManifest,
    out: &Path,
    force: bool,
) -> Result<usize, DatasetError> {
    let sidecar = PathBuf::from(format!("{}.manifest.json", out.display()));
    if !force {
        for path in [out, sidecar.as_path()] {
            if path.exists() {
                return Err(DatasetError::OutputExists(path.to_path_buf()));
            }
        }
    }
    let mut body = Vec::new();
    for sample in corpus.iter() {
        let record = chat_record(sample, &manifest.system_prompt);
        let line = serde_json::to_string(&record).expect("chat records serialize");
        body.extend_from_slice(line.as_bytes());
        body.push(b'\n');
    }
    let mut file = std::fs::File::create(out).map_err(|e| io_err(out, e))?;
    file.write_all(&body).map_err(|e| io_err(out, e))?;
    let manifest_json =
        serde_json::to_string_pretty(manifest).expect("training manifests serialize");
    std::fs::write(&sidecar, manifest_json.as_bytes()).map_err(|e| io_err(&sidecar, e))?;
    Ok(corpus.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::bundled_corpus;
    use std::collections::BTreeSet;

    fn corpus() -> Corpus {
        bundled_corpus()
    }

    #[test]
    fn histogram_matches_a_manual_recount() {
        let c = corpus();
        let histogram = corpus_stats(&c);
        for (concept, count) in &histogram {
            let manual =
                c.iter().filter(|s| s.concepts.contains(concept.as_str())).count() as u64;
            assert_eq!(*count, manual, "histogram mismatch for {concept}");
        }
        let total: u64 = histogram.values().sum();
        let manual_total: u64 = c.iter().map(|s| s.concepts.len() as u64).sum();
        assert_eq!(total, manual_total);
    }

    #[test]
    fn split_is_disjoint_exhaustive_and_order_preserving() {
        let c = corpus();
        for seed in [0u64, 1, 99] {
            let spec = SplitSpec { seed, test_count: 7, validation_count: 5 };
            let splits = split(&c, &spec).unwrap();
            assert_eq!(splits.test.len(), 7);
            assert_eq!(splits.validation.len(), 5);
            assert_eq!(splits.train.len(), c.len() - 12);
            let mut seen: BTreeSet<&str> = BTreeSet::new();
            for part in [&splits.train, &splits.validation, &splits.test] {
                for sample in part.iter() {
                    assert!(seen.insert(&sample.id), "duplicate id across splits");
                }
                // Each part preserves original corpus order.
                let positions: Vec<usize> = part
                    .iter()
                    .map(|s| c.iter().position(|o| o.id == s.id).unwrap())
                    .collect();
                let mut sorted = positions.clone();
                sorted.sort_unstable();
                assert_eq!(positions, sorted);
            }
            assert_eq!(seen.len(), c.len());
        }
    }

    #[test]
    fn split_is_seed_deterministic_and_seed_sensitive() {
        let c = corpus();
        let spec = SplitSpec { seed: 42, test_count: 10, validation_count: 0 };
        let a = split(&c, &spec).unwrap();
        let b = split(&c, &spec).unwrap();
        assert_eq!(a.test.ids(), b.test.ids());
        assert_eq!(a.train.ids(), b.train.ids());
        let other = split(&c, &SplitSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a.test.ids(), other.test.ids(), "different seeds should differ");
    }

    #[test]
    fn infeasible_split_is_rejected() {
        let c = corpus();
        let spec = SplitSpec { seed: 0, test_count: c.len(), validation_count: 0 };
        assert!(matches!(split(&c, &spec), Err(DatasetError::InfeasibleSplit { .. })));
    }

    #[test]
    fn selection_meets_every_quota() {
        let c = corpus();
        let concepts: Vec<String> = SWEPT_CONCEPTS.iter().map(|s| s.to_string()).collect();
        for k in [2usize, 4, 8] {
            let picked = select_k_per_concept(&c, k, &concepts, 7, true).unwrap();
            for concept in &concepts {
                let have =
                    picked.iter().filter(|s| s.concepts.contains(concept.as_str())).count();
                assert!(have >= k, "k={k}: concept {concept} has {have}");
            }
            // All generic samples ride along.
            let generics_in = c.iter().filter(|s| s.is_generic()).count();
            let generics_out = picked.iter().filter(|s| s.is_generic()).count();
            assert_eq!(generics_in, generics_out);
        }
    }

    #[test]
    fn selection_is_deterministic_and_can_exclude_generics() {
        let c = corpus();
        let concepts: Vec<String> = SWEPT_CONCEPTS.iter().map(|s| s.to_string()).collect();
        let a = select_k_per_concept(&c, 4, &concepts, 11, false).unwrap();
        let b = select_k_per_concept(&c, 4, &concepts, 11, false).unwrap();
        assert_eq!(a.ids(), b.ids());
        assert!(a.iter().all(|s| !s.is_generic()));
    }

    #[test]
    fn zero_k_selects_only_generics() {
        let c = corpus();
        let concepts: Vec<String> = SWEPT_CONCEPTS.iter().map(|s| s.to_string()).collect();
        let picked = select_k_per_concept(&c, 0, &concepts, 3, true).unwrap();
        assert!(picked.iter().all(|s| s.is_generic()));
        assert_eq!(picked.len(), c.iter().filter(|s| s.is_generic()).count());
    }

    #[test]
    fn impossible_quota_reports_the_shortfall() {
        let c = corpus();
        let concepts = vec!["father".to_string()];
        let available = c.iter().filter(|s| s.concepts.contains("father")).count();
        let err = select_k_per_concept(&c, available + 1, &concepts, 0, false).unwrap_err();
        match err {
            DatasetError::InsufficientSamples { concept, have, need } => {
                assert_eq!(concept, "father");
                assert_eq!(have, available);
                assert_eq!(need, available + 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn export_writes_parseable_chat_records_and_a_manifest() {
        let c = corpus();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("train.jsonl");
        let manifest = TrainingManifest::default();
        let n = export_chat_jsonl(&c, &manifest, &out, false).unwrap();
        assert_eq!(n, c.len());

        let text = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), c.len());
        for (line, sample) in lines.iter().zip(c.iter()) {
            let record: ChatRecord = serde_json::from_str(line).unwrap();
            assert_eq!(record.messages.len(), 3);
            assert_eq!(record.messages[0].role, "system");
            assert_eq!(record.messages[0].content, manifest.system_prompt);
            assert_eq!(record.messages[1].role, "user");
            assert_eq!(record.messages[1].content, sample.prompt);
            assert_eq!(record.messages[2].role, "assistant");
            if sample.is_generic() {
                assert!(record.messages[2].content.is_empty());
            } else {
                // The assistant turn parses back to the expected graph.
                let parsed = kc_core::parse_turtle(
                    &record.messages[2].content,
                    &kc_core::vocab::default_prefixes(),
                )
                .unwrap();
                assert_eq!(parsed.triples(), sample.expected.triples());
            }
        }

        let sidecar = dir.path().join("train.jsonl.manifest.json");
        let back: TrainingManifest =
            serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
        assert_eq!(back, manifest);
    }

    #[test]
    fn export_refuses_to_clobber_without_force() {
        let c = corpus();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("train.jsonl");
        std::fs::write(&out, b"keep me").unwrap();
        let err = export_chat_jsonl(&c, &TrainingManifest::default(), &out, false).unwrap_err();
        assert!(matches!(err, DatasetError::OutputExists(_)));
        assert_eq!(std::fs::read_to_string(&out).unwrap(), "keep me");
        // With force, the overwrite succeeds.
        export_chat_jsonl(&c, &TrainingManifest::default(), &out, true).unwrap();
        assert_ne!(std::fs::read_to_string(&out).unwrap(), "keep me");
    }
}
