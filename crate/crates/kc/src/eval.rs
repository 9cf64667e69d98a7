//! Evaluation runs: drive a backend over a test corpus, score every
//! response against ground truth, aggregate micro metrics, and orchestrate
//! multi-label sweeps with CSV/SVG reporting.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use kc_core::{aggregate, score_sample, CompareMode, EvalReport, OntologySchema, SampleScore};

use crate::client::{batch_complete, ClientError, ModelClient, OracleClient, OracleNoise, ReplayClient};
use crate::corpus::{load_corpus, Corpus, CorpusError};

/// What to do when a request fails mid-run (timeouts, HTTP errors).
/// Missing replay recordings always abort: they mean the recording and
/// the corpus disagree, which no scoring convention should paper over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailMode {
    /// Score the sample as a total miss and continue.
    ScoreZero,
    /// Stop the run and surface the failure.
    Abort,
}

impl FromStr for FailMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "score-zero" => Ok(FailMode::ScoreZero),
            "abort" => Ok(FailMode::Abort),
            other => Err(format!("unknown fail mode {other:?} (expected score-zero or abort)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no recorded response for sample {0:?}; the recording does not cover the test corpus")]
    MissingRecording(String),
    #[error("request for sample {sample_id:?} failed: {message}")]
    RequestFailed { sample_id: String, message: String },
    #[error("test corpus is empty")]
    EmptyCorpus,
    #[error("sweep labels must be unique; {0:?} appears twice")]
    DuplicateLabel(String),
    #[error("sweep label {label:?} must set exactly one of `responses` or `oracle`")]
    AmbiguousSource { label: String },
    #[error("cannot load test corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("client setup failed: {0}")]
    Client(#[from] ClientError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Scores every sample of `test` through `client` and aggregates. The
/// report is deterministic for replay and oracle backends.
pub fn run_eval(
    test: &Corpus,
    client: &dyn ModelClient,
    schema: &OntologySchema,
    mode: CompareMode,
    label: &str,
    fail_mode: FailMode,
    max_parallel: usize,
) -> Result<EvalReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let inputs: Vec<(String, String)> =
        test.iter().map(|s| (s.id.clone(), s.prompt.clone())).collect();
    let records = batch_complete(client, &inputs, max_parallel);

    let mut scores = Vec::with_capacity(records.len());
    for (record, sample) in records.iter().zip(test.iter()) {
        let score = match &record.result {
            Ok(text) => score_sample(&record.sample_id, text, &sample.expected, schema, mode),
            Err(ClientError::MissingRecording(id)) => {
                return Err(EvalError::MissingRecording(id.clone()));
            }
            Err(other) => match fail_mode {
                FailMode::ScoreZero => {
                    SampleScore::total_miss(&record.sample_id, &sample.expected, schema, mode)
                }
                FailMode::Abort => {
                    return Err(EvalError::RequestFailed {
                        sample_id: record.sample_id.clone(),
                        message: other.to_string(),
                    });
                }
            },
        };
        scores.push(score);
    }

    let fingerprint = format!("{:016x}", schema.fingerprint());
    aggregate(scores, label, mode, &fingerprint).map_err(|_| EvalError::EmptyCorpus)
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Oracle noise settings as they appear in sweep manifests.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleSpec {
    pub drop_rate: f64,
    pub spurious_rate: f64,
    pub seed: u64,
}

impl From<OracleSpec> for OracleNoise {
    fn from(spec: OracleSpec) -> OracleNoise {
        OracleNoise {
            drop_rate: spec.drop_rate,
            spurious_rate: spec.spurious_rate,
            seed: spec.seed,
        }
    }
}

/// One sweep entry: a label plus exactly one response source.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepLabel {
    pub label: String,
    /// Replay recording to score.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub responses: Option<PathBuf>,
    /// Oracle backend with calibrated noise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
}

fn default_mode() -> CompareMode {
    CompareMode::NameKeyed
}

fn default_parallel() -> usize {
    4
}

fn default_fail_mode() -> FailMode {
    FailMode::ScoreZero
}

/// A declarative sweep: a test corpus, a comparison mode, and one entry
/// per run label. Labels must be unique.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepManifest {
    /// Path to the test corpus; the bundled held-out split when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_corpus: Option<PathBuf>,
    #[serde(default = "default_mode")]
    pub mode: CompareMode,
    #[serde(default = "default_parallel")]
    pub max_parallel: usize,
    #[serde(default = "default_fail_mode")]
    pub fail_mode: FailMode,
    pub labels: Vec<SweepLabel>,
}

/// Everything a sweep produced: reports in manifest order for the labels
/// that ran, and `(label, error)` pairs for those that failed. A label
/// failure never stops the remaining labels.
#[derive(Debug)]
pub struct SweepOutcome {
    pub reports: Vec<EvalReport>,
    pub failures: Vec<(String, String)>,
}

/// Runs the sweep sequentially in manifest order. Relative paths in the
/// manifest resolve against `base_dir`.
pub fn run_sweep(
    manifest: &SweepManifest,
    schema: &OntologySchema,
    base_dir: &Path,
) -> Result<SweepOutcome, EvalError> {
    let mut seen = std::collections::BTreeSet::new();
    for entry in &manifest.labels {
        if !seen.insert(entry.label.as_str()) {
            return Err(EvalError::DuplicateLabel(entry.label.clone()));
        }
        if entry.responses.is_some() == entry.oracle.is_some() {
            return Err(EvalError::AmbiguousSource { label: entry.label.clone() });
        }
    }

    let test = match &manifest.test_corpus {
        Some(path) => load_corpus(&resolve(base_dir, path), schema)?,
        None => crate::dataset::bundled_test_split(),
    };

    let mut outcome = SweepOutcome { reports: Vec::new(), failures: Vec::new() };
    for entry in &manifest.labels {
        let run = || -> Result<EvalReport, EvalError> {
            let client: Box<dyn ModelClient> = match (&entry.responses, &entry.oracle) {
                (Some(path), None) => {
                    Box::new(ReplayClient::load(&resolve(base_dir, path))?)
                }
                (None, Some(spec)) => {
                    Box::new(OracleClient::new(&test, schema, (*spec).into())?)
                }
                _ => unreachable!("validated above"),
            };
            run_eval(
                &test,
                client.as_ref(),
                schema,
                manifest.mode,
                &entry.label,
                manifest.fail_mode,
                manifest.max_parallel,
            )
        };
        match run() {
            Ok(report) => outcome.reports.push(report),
            Err(e) => outcome.failures.push((entry.label.clone(), e.to_string())),
        }
    }
    Ok(outcome)
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Writes the sweep reports as RFC-4180 CSV with a header row.
pub fn write_csv(reports: &[EvalReport], path: &Path) -> Result<(), EvalError> {
    let io = |e: std::io::Error| EvalError::Io { path: path.display().to_string(), source: e };
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(e) => io(e),
        other => io(std::io::Error::other(format!("{other:?}"))),
    })?;
    writer
        .write_record(["label", "precision", "recall", "f1", "tp", "fp", "fn"])
        .and_then(|_| {
            for report in reports {
                writer.write_record([
                    report.label.clone(),
                    report.micro.precision.to_string(),
                    report.micro.recall.to_string(),
                    report.micro.f1.to_string(),
                    report.micro_counts.tp.to_string(),
                    report.micro_counts.fp.to_string(),
                    report.micro_counts.fn_.to_string(),
                ])?;
            }
            writer.flush()?;
            Ok(())
        })
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(e) => io(e),
            other => io(std::io::Error::other(format!("{other:?}"))),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::ReplayEntry;
    use crate::corpus::bundled_corpus;
    use kc_core::serialize_turtle;

    fn schema() -> OntologySchema {
        OntologySchema::bundled()
    }

    fn small_test_corpus() -> Corpus {
        // A slice of the bundled corpus keeps the tests quick.
        let bundled = bundled_corpus();
        let samples: Vec<crate::corpus::Sample> =
            bundled.iter().take(10).cloned().collect();
        Corpus::from_validated(samples)
    }

    #[test]
    fn zero_noise_oracle_scores_perfectly() {
        let test = small_test_corpus();
        let schema = schema();
        let oracle = OracleClient::new(&test, &schema, OracleNoise::default()).unwrap();
        let report = run_eval(
            &test,
            &oracle,
            &schema,
            CompareMode::NameKeyed,
            "identity",
            FailMode::Abort,
            4,
        )
        .unwrap();
        assert_eq!(report.micro.precision, 1.0);
        assert_eq!(report.micro.recall, 1.0);
        assert_eq!(report.micro.f1, 1.0);
        assert_eq!(report.micro_counts.fp, 0);
        assert_eq!(report.micro_counts.fn_, 0);
        assert_eq!(report.samples.len(), test.len());
        assert_eq!(report.label, "identity");
        assert_eq!(report.schema_fingerprint, format!("{:016x}", schema.fingerprint()));
    }

    #[test]
    fn missing_recordings_abort_under_both_fail_modes() {
        let test = small_test_corpus();
        let schema = schema();
        let replay = ReplayClient::from_entries([]);
        for fail_mode in [FailMode::ScoreZero, FailMode::Abort] {
            let err = run_eval(
                &test,
                &replay,
                &schema,
                CompareMode::NameKeyed,
                "x",
                fail_mode,
                2,
            )
            .unwrap_err();
            assert!(matches!(err, EvalError::MissingRecording(_)), "{fail_mode:?}");
        }
    }

    struct FlakyClient;

    impl ModelClient for FlakyClient {
        fn complete(&self, sample_id: &str, _prompt: &str) -> Result<String, ClientError> {
            if sample_id.ends_with('3') {
                Err(ClientError::Timeout)
            } else {
                Ok(String::new())
            }
        }

        fn backend_tag(&self) -> &'static str {
            "flaky"
        }
    }

    #[test]
    fn transport_failures_follow_the_fail_mode() {
        let test = small_test_corpus();
        let schema = schema();
        let failing_id = test.iter().find(|s| s.id.ends_with('3')).map(|s| s.id.clone());
        assert!(failing_id.is_some(), "fixture needs an id ending in 3");

        let err = run_eval(
            &test,
            &FlakyClient,
            &schema,
            CompareMode::NameKeyed,
            "x",
            FailMode::Abort,
            2,
        )
        .unwrap_err();
        assert!(matches!(err, EvalError::RequestFailed { .. }));

        let report = run_eval(
            &test,
            &FlakyClient,
            &schema,
            CompareMode::NameKeyed,
            "x",
            FailMode::ScoreZero,
            2,
        )
        .unwrap();
        let flagged: Vec<&SampleScore> =
            report.samples.iter().filter(|s| s.parse_failed).collect();
        assert_eq!(flagged.len(), 1);
        assert_eq!(Some(&flagged[0].sample_id), failing_id.as_ref());
    }

    #[test]
    fn replay_evaluation_matches_recorded_content() {
        let test = small_test_corpus();
        let schema = schema();
        // Record perfect responses for every sample, then perturb one to
        // be empty; recall must drop below 1 while precision stays 1.
        let entries: Vec<ReplayEntry> = test
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let text = if i == 0 && !s.expected.is_empty() {
                    String::new()
                } else {
                    serialize_turtle(&s.expected, s.expected.prefixes())
                };
                ReplayEntry { sample_id: s.id.clone(), response_text: text }
            })
            .collect();
        let replay = ReplayClient::from_entries(entries);
        let report = run_eval(
            &test,
            &replay,
            &schema,
            CompareMode::NameKeyed,
            "replay",
            FailMode::Abort,
            1,
        )
        .unwrap();
        assert_eq!(report.micro.precision, 1.0);
        assert!(report.micro.recall < 1.0);
        assert!(report.micro_counts.fn_ > 0);
    }

    #[test]
    fn sweep_runs_labels_in_order_and_survives_failures() {
        let schema = schema();
        let dir = tempfile::tempdir().unwrap();
        let manifest = SweepManifest {
            test_corpus: None,
            mode: CompareMode::NameKeyed,
            max_parallel: 4,
            fail_mode: FailMode::ScoreZero,
            labels: vec![
                SweepLabel {
                    label: "noisy".into(),
                    responses: None,
                    oracle: Some(OracleSpec { drop_rate: 0.5, spurious_rate: 0.5, seed: 3 }),
                },
                SweepLabel {
                    label: "broken".into(),
                    responses: Some(PathBuf::from("does-not-exist.jsonl")),
                    oracle: None,
                },
                SweepLabel {
                    label: "clean".into(),
                    responses: None,
                    oracle: Some(OracleSpec::default()),
                },
            ],
        };
        let outcome = run_sweep(&manifest, &schema, dir.path()).unwrap();
        assert_eq!(outcome.reports.len(), 2);
        assert_eq!(outcome.reports[0].label, "noisy");
        assert_eq!(outcome.reports[1].label, "clean");
        assert_eq!(outcome.failures.len(), 1);
        assert_eq!(outcome.failures[0].0, "broken");
        assert!(outcome.reports[0].micro.f1 < outcome.reports[1].micro.f1);
        assert_eq!(outcome.reports[1].micro.f1, 1.0);
    }

    #[test]
    fn sweep_rejects_duplicate_labels_and_ambiguous_sources() {
        let schema = schema();
        let dir = tempfile::tempdir().unwrap();
        let twice = SweepManifest {
            test_corpus: None,
            mode: CompareMode::NameKeyed,
            max_parallel: 1,
            fail_mode: FailMode::ScoreZero,
            labels: vec![
                SweepLabel {
                    label: "a".into(),
                    responses: None,
                    oracle: Some(OracleSpec::default()),
                },
                SweepLabel {
                    label: "a".into(),
                    responses: None,
                    oracle: Some(OracleSpec::default()),
                },
            ],
        };
        assert!(matches!(
            run_sweep(&twice, &schema, dir.path()),
            Err(EvalError::DuplicateLabel(_))
        ));

        let neither = SweepManifest {
            labels: vec![SweepLabel { label: "a".into(), responses: None, oracle: None }],
            ..twice
        };
        assert!(matches!(
            run_sweep(&neither, &schema, dir.path()),
            Err(EvalError::AmbiguousSource { .. })
        ));
    }

    #[test]
    fn csv_output_has_the_documented_columns() {
        let schema = schema();
        let dir = tempfile::tempdir().unwrap();
        let manifest = SweepManifest {
            test_corpus: None,
            mode: CompareMode::NameKeyed,
            max_parallel: 4,
            fail_mode: FailMode::ScoreZero,
            labels: vec![SweepLabel {
                label: "only".into(),
                responses: None,
                oracle: Some(OracleSpec::default()),
            }],
        };
        let outcome = run_sweep(&manifest, &schema, dir.path()).unwrap();
        let csv_path = dir.path().join("out.csv");
        write_csv(&outcome.reports, &csv_path).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "label,precision,recall,f1,tp,fp,fn");
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields[0], "only");
        assert_eq!(fields[1], "1");
        assert_eq!(fields[2], "1");
        assert_eq!(fields[3], "1");
        assert_eq!(fields[5], "0", "fp");
        assert_eq!(fields[6], "0", "fn");
    }

    #[test]
    fn sweep_manifest_parses_from_json() {
        let json = r#"{
            "mode": "isomorphism",
            "labels": [
                {"label": "k=2", "responses": "runs/k2.jsonl"},
                {"label": "k=8", "oracle": {"drop_rate": 0.1, "seed": 5}}
            ]
        }"#;
        let manifest: SweepManifest = serde_json::from_str(json).unwrap();
        assert_eq!(manifest.mode, CompareMode::Isomorphism);
        assert_eq!(manifest.max_parallel, 4);
        assert_eq!(manifest.labels.len(), 2);
        assert!(manifest.labels[0].responses.is_some());
        let spec = manifest.labels[1].oracle.unwrap();
        assert_eq!(spec.drop_rate, 0.1);
        assert_eq!(spec.spurious_rate, 0.0);
        assert_eq!(spec.seed, 5);
    }
}
