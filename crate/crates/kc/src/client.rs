//! Model clients: the endpoint backend speaks a chat-completions wire
//! protocol over HTTP, the replay backend serves recorded responses from a
//! JSONL file, and the oracle backend synthesizes responses from ground
//! truth with calibrated noise for harness testing.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use kc_core::hash::fnv1a64;
use kc_core::vocab::{default_prefixes, KNOW_NS};
use kc_core::{canonicalize, serialize_turtle, CanonMode, Graph, Iri, OntologySchema, Triple};

use crate::corpus::Corpus;
use crate::manifest::{DEFAULT_MODEL_NAME, DEFAULT_SYSTEM_PROMPT};

/// Environment variable holding the bearer token for endpoint requests.
pub const API_KEY_VAR: &str = "KC_API_KEY";

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request timed out")]
    Timeout,
    #[error("endpoint returned HTTP status {0}")]
    HttpStatus(u16),
    #[error("no recorded response for sample {0:?}")]
    MissingRecording(String),
    #[error("malformed endpoint response: {0}")]
    MalformedEndpointResponse(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("client configuration error: {0}")]
    Config(String),
}

/// A completion backend. Implementations must be shareable across the
/// worker threads used by [`batch_complete`].
pub trait ModelClient: Sync {
    /// Produces the raw response text for one prompt.
    fn complete(&self, sample_id: &str, prompt: &str) -> Result<String, ClientError>;
    /// Short stable tag naming the backend (`"endpoint"`, `"replay"`, `"oracle"`).
    fn backend_tag(&self) -> &'static str;
}

/// Outcome of one prompt in a batch, in input order.
#[derive(Debug)]
pub struct CompletionRecord {
    pub sample_id: String,
    pub prompt: String,
    pub result: Result<String, ClientError>,
    pub latency: Duration,
    pub backend: &'static str,
}

/// Runs every prompt through the client with at most `max_parallel`
/// requests in flight, preserving input order in the returned records.
/// Individual failures are captured per record, never propagated.
pub fn batch_complete(
    client: &dyn ModelClient,
    inputs: &[(String, String)],
    max_parallel: usize,
) -> Vec<CompletionRecord> {
    let workers = max_parallel.max(1).min(inputs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<CompletionRecord>>> =
        inputs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= inputs.len() {
                    break;
                }
                let (sample_id, prompt) = &inputs[i];
                let start = Instant::now();
                let result = client.complete(sample_id, prompt);
                let record = CompletionRecord {
                    sample_id: sample_id.clone(),
                    prompt: prompt.clone(),
                    result,
                    latency: start.elapsed(),
                    backend: client.backend_tag(),
                };
                *slots[i].lock().expect("result slot") = Some(record);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("result slot").expect("worker filled slot"))
        .collect()
}

// ---------------------------------------------------------------------------
// Endpoint backend
// ---------------------------------------------------------------------------

/// Retry policy for transport-level failures. HTTP status errors are never
/// retried: a well-formed refusal is an answer, not a glitch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryConfig {
    pub max_attempts: u32,
    pub backoff_ms: u64,
}

impl Default for RetryConfig {
    fn default() -> Self {
        RetryConfig { max_attempts: 3, backoff_ms: 250 }
    }
}

/// Configuration for the HTTP endpoint backend.
#[derive(Debug, Clone)]
pub struct EndpointConfig {
    /// Base URL; requests go to `<url>/chat/completions`.
    pub url: String,
    pub model_name: String,
    pub temperature: f64,
    pub timeout: Duration,
    pub retry: RetryConfig,
    pub system_prompt: String,
    /// Bearer token; `None` sends no Authorization header.
    pub api_key: Option<String>,
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        EndpointConfig {
            url: url.into(),
            model_name: DEFAULT_MODEL_NAME.to_string(),
            temperature: 0.0,
            timeout: Duration::from_secs(30),
            retry: RetryConfig::default(),
            system_prompt: DEFAULT_SYSTEM_PROMPT.to_string(),
            api_key: api_key_from_env(),
        }
    }
}

/// Reads the bearer token from the environment, if set.
pub fn api_key_from_env() -> Option<String> {
    std::env::var(API_KEY_VAR).ok().filter(|k| !k.is_empty())
}

/// Chat-completions HTTP backend.
pub struct EndpointClient {
    config: EndpointConfig,
    http: reqwest::blocking::Client,
}

impl EndpointClient {
    pub fn new(config: EndpointConfig) -> Result<Self, ClientError> {
        if config.url.trim().is_empty() {
            return Err(ClientError::Config("endpoint URL must not be empty".into()));
        }
        if !(config.temperature >= 0.0 && config.temperature.is_finite()) {
            return Err(ClientError::Config("temperature must be finite and non-negative".into()));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ClientError::Config(e.to_string()))?;
        Ok(EndpointClient { config, http })
    }

    fn request_url(&self) -> String {
        format!("{}/chat/completions", self.config.url.trim_end_matches('/'))
    }

    fn attempt(&self, prompt: &str) -> Result<String, ClientError> {
        let body = serde_json::json!({
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": self.config.system_prompt},
                {"role": "user", "content": prompt},
            ],
        });
        let mut request = self.http.post(self.request_url()).json(&body);
        if let Some(key) = &self.config.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(transport_error)?;
        let status = response.status();
        if !status.is_success() {
            return Err(ClientError::HttpStatus(status.as_u16()));
        }
        let value: serde_json::Value = response
            .json()
            .map_err(|e| ClientError::MalformedEndpointResponse(e.to_string()))?;
        value
            .pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .map(|s| s.to_string())
            .ok_or_else(|| {
                ClientError::MalformedEndpointResponse(
                    "missing choices[0].message.content".into(),
                )
            })
    }
}

fn transport_error(err: reqwest::Error) -> ClientError {
    if err.is_timeout() {
        ClientError::Timeout
    } else {
        ClientError::Transport(err.to_string())
    }
}

impl ModelClient for EndpointClient {
    fn complete(&self, _sample_id: &str, prompt: &str) -> Result<String, ClientError> {
        let attempts = self.config.retry.max_attempts.max(1);
        let mut last = None;
        for attempt in 1..=attempts {
            match self.attempt(prompt) {
                Ok(text) => return Ok(text),
                // Only transport-level failures are worth retrying.
                err @ Err(ClientError::Timeout) | err @ Err(ClientError::Transport(_)) => {
                    last = Some(err);
                    if attempt < attempts {
                        let backoff = self.config.retry.backoff_ms << (attempt - 1);
                        std::thread::sleep(Duration::from_millis(backoff));
                    }
                }
                err => return err,
            }
        }
        last.expect("at least one attempt ran")
    }

    fn backend_tag(&self) -> &'static str {
        "endpoint"
    }
}

// ---------------------------------------------------------------------------
// Replay backend
// ---------------------------------------------------------------------------

/// One line of a replay recording file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub sample_id: String,
    pub response_text: String,
}

/// Serves responses from a recording; unknown sample ids are an error.
#[derive(Debug)]
pub struct ReplayClient {
    responses: BTreeMap<String, String>,
}

impl ReplayClient {
    pub fn from_entries(entries: impl IntoIterator<Item = ReplayEntry>) -> Self {
        let mut responses = BTreeMap::new();
        for entry in entries {
            // Later entries win, so re-recorded responses override.
            responses.insert(entry.sample_id, entry.response_text);
        }
        ReplayClient { responses }
    }

    pub fn load(path: &Path) -> Result<Self, ClientError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ClientError::Config(format!("cannot read recording {}: {e}", path.display()))
        })?;
        let mut entries = Vec::new();
        for (index, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ReplayEntry = serde_json::from_str(line).map_err(|e| {
                ClientError::Config(format!(
                    "malformed recording line {} in {}: {e}",
                    index + 1,
                    path.display()
                ))
            })?;
            entries.push(entry);
        }
        Ok(ReplayClient::from_entries(entries))
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl ModelClient for ReplayClient {
    fn complete(&self, sample_id: &str, _prompt: &str) -> Result<String, ClientError> {
        self.responses
            .get(sample_id)
            .cloned()
            .ok_or_else(|| ClientError::MissingRecording(sample_id.to_string()))
    }

    fn backend_tag(&self) -> &'static str {
        "replay"
    }
}

/// Writes successful completions as a replay recording, one JSON object
/// per line, usable later via `ReplayClient::load`.
pub fn write_replay_file(records: &[CompletionRecord], path: &Path) -> Result<usize, ClientError> {
    let mut body = Vec::new();
    let mut written = 0;
    for record in records {
        if let Ok(text) = &record.result {
            let entry = ReplayEntry {
                sample_id: record.sample_id.clone(),
                response_text: text.clone(),
            };
            let line = serde_json::to_string(&entry).expect("replay entries serialize");
            body.extend_from_slice(line.as_bytes());
            body.push(b'\n');
            written += 1;
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| {
        ClientError::Config(format!("cannot write recording {}: {e}", path.display()))
    })?;
    file.write_all(&body).map_err(|e| {
        ClientError::Config(format!("cannot write recording {}: {e}", path.display()))
    })?;
    Ok(written)
}

// ---------------------------------------------------------------------------
// Oracle backend
// ---------------------------------------------------------------------------

/// Noise model for the oracle backend. With both rates zero the oracle
/// returns the canonical serialization of the ground truth verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleNoise {
    /// Probability of dropping each ground-truth triple.
    pub drop_rate: f64,
    /// Probability, per surviving triple, of adding one spurious triple
    /// about fresh entities. Expected precision is `1 / (1 + rate)`.
    pub spurious_rate: f64,
    pub seed: u64,
}

impl Default for OracleNoise {
    fn default() -> Self {
        OracleNoise { drop_rate: 0.0, spurious_rate: 0.0, seed: 0 }
    }
}

impl OracleNoise {
    pub fn check(&self) -> Result<(), ClientError> {
        for (name, rate) in [("drop_rate", self.drop_rate), ("spurious_rate", self.spurious_rate)]
        {
            if !(0.0..=1.0).contains(&rate) || !rate.is_finite() {
                return Err(ClientError::Config(format!(
                    "{name} must lie in [0, 1], got {rate}"
                )));
            }
        }
        Ok(())
    }
}

/// Relationship predicates used for spurious noise triples. All are
/// non-functional, so noise never manufactures cardinality conflicts.
const NOISE_PREDICATES: [&str; 6] = ["child", "parent", "sibling", "spouse", "partner", "knows"];

/// Synthesizes responses from ground truth: each sample's expected graph
/// is canonicalized name-keyed, then triples are dropped and spurious
/// triples about fresh `urn:kc:noise:` entities are injected at the
/// configured rates. Output is deterministic per (seed, sample id).
pub struct OracleClient {
    gold: BTreeMap<String, Graph>,
    noise: OracleNoise,
}

impl OracleClient {
    pub fn new(
        corpus: &Corpus,
        schema: &OntologySchema,
        noise: OracleNoise,
    ) -> Result<Self, ClientError> {
        noise.check()?;
        let mut gold = BTreeMap::new();
        for sample in corpus.iter() {
            let canonical = canonicalize(&sample.expected, schema, CanonMode::NameKeyed)
                .map_err(|e| {
                    ClientError::Config(format!(
                        "sample {:?} has no canonical form: {e}",
                        sample.id
                    ))
                })?;
            gold.insert(sample.id.clone(), canonical);
        }
        Ok(OracleClient { gold, noise })
    }

    fn spurious_triple(&self, rng: &mut ChaCha8Rng, counter: usize) -> Triple {
        let predicate = NOISE_PREDICATES[rng.gen_range(0..NOISE_PREDICATES.len())];
        let subject = Iri::new(format!("urn:kc:noise:s{counter}")).expect("valid noise IRI");
        let object = Iri::new(format!("urn:kc:noise:o{counter}")).expect("valid noise IRI");
        Triple::new(
            subject,
            Iri::new(format!("{KNOW_NS}{predicate}")).expect("valid predicate IRI"),
            object,
        )
    }
}

impl ModelClient for OracleClient {
    fn complete(&self, sample_id: &str, _prompt: &str) -> Result<String, ClientError> {
        let gold = self
            .gold
            .get(sample_id)
            .ok_or_else(|| ClientError::MissingRecording(sample_id.to_string()))?;
        let mut rng =
            ChaCha8Rng::seed_from_u64(self.noise.seed ^ fnv1a64(sample_id.as_bytes()));
        let mut out = Graph::with_prefixes(default_prefixes());
        let mut counter = 0usize;
        for triple in gold.iter() {
            if rng.gen::<f64>() < self.noise.drop_rate {
                continue;
            }
            out.insert(triple.clone());
            if rng.gen::<f64>() < self.noise.spurious_rate {
                let spurious = self.spurious_triple(&mut rng, counter);
                counter += 1;
                out.insert(spurious);
            }
        }
        Ok(serialize_turtle(&out, out.prefixes()))
    }

    fn backend_tag(&self) -> &'static str {
        "oracle"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kc_core::concept_of;
    use kc_core::parse_turtle;
    use std::io::Read as _;
    use std::sync::atomic::AtomicIsize;

    fn schema() -> OntologySchema {
        OntologySchema::bundled()
    }

    fn sample(id: &str, prompt: &str, turtle: &str) -> crate::corpus::Sample {
        let expected = parse_turtle(turtle, &default_prefixes()).unwrap();
        let s = schema();
        let mut concepts = std::collections::BTreeSet::new();
        for t in expected.iter() {
            concepts.insert(concept_of(t, &s).to_string());
        }
        if expected.is_empty() {
            concepts.insert(kc_core::CONCEPT_NONE.to_string());
        }
        let kind = if expected.is_empty() {
            crate::corpus::SampleKind::Generic
        } else {
            crate::corpus::SampleKind::Ontology
        };
        crate::corpus::Sample { id: id.into(), prompt: prompt.into(), expected, concepts, kind }
    }

    fn tiny_corpus() -> Corpus {
        Corpus::from_samples(vec![
            sample(
                "s1",
                "My daughter Ada sings.",
                "_:me know:child _:a . _:a know:name \"Ada\" . _:a a know:Person .",
            ),
            sample(
                "s2",
                "I know Bo and Cy.",
                "_:me know:knows _:b . _:b know:name \"Bo\" . _:me know:knows _:c . _:c know:name \"Cy\" .",
            ),
            sample("s3", "The sky is blue today.", ""),
        ])
        .unwrap()
    }

    // ---- oracle ----

    #[test]
    fn zero_noise_oracle_reproduces_canonical_gold() {
        let corpus = tiny_corpus();
        let schema = schema();
        let oracle = OracleClient::new(&corpus, &schema, OracleNoise::default()).unwrap();
        for s in corpus.iter() {
            let text = oracle.complete(&s.id, &s.prompt).unwrap();
            let parsed = parse_turtle(&text, &default_prefixes()).unwrap();
            let canonical = canonicalize(&s.expected, &schema, CanonMode::NameKeyed).unwrap();
            assert_eq!(parsed.triples(), canonical.triples(), "sample {}", s.id);
        }
    }

    #[test]
    fn full_drop_oracle_answers_with_the_empty_graph() {
        let corpus = tiny_corpus();
        let noise = OracleNoise { drop_rate: 1.0, spurious_rate: 0.0, seed: 9 };
        let oracle = OracleClient::new(&corpus, &schema(), noise).unwrap();
        let text = oracle.complete("s1", "").unwrap();
        assert!(parse_turtle(&text, &default_prefixes()).unwrap().is_empty());
    }

    #[test]
    fn oracle_is_deterministic_per_seed_and_sample() {
        let corpus = tiny_corpus();
        let noise = OracleNoise { drop_rate: 0.5, spurious_rate: 0.5, seed: 7 };
        let oracle = OracleClient::new(&corpus, &schema(), noise).unwrap();
        let a = oracle.complete("s2", "").unwrap();
        let b = oracle.complete("s2", "").unwrap();
        assert_eq!(a, b);
        let other_seed = OracleNoise { seed: 8, ..noise };
        let oracle2 = OracleClient::new(&corpus, &schema(), other_seed).unwrap();
        // Different seeds should eventually disagree; check both samples.
        let differs = ["s1", "s2"]
            .iter()
            .any(|id| oracle.complete(id, "").unwrap() != oracle2.complete(id, "").unwrap());
        assert!(differs, "seed change never altered any output");
    }

    #[test]
    fn oracle_noise_rates_hit_their_statistics() {
        // One large synthetic sample: 400 knows-edges between named people.
        let mut turtle = String::new();
        for i in 0..400 {
            turtle.push_str(&format!(
                "<urn:kc:person:a{i}> know:knows <urn:kc:person:b{i}> . "
            ));
        }
        let corpus = Corpus::from_samples(vec![sample("big", "big prompt", &turtle)]).unwrap();
        let schema = schema();
        let noise = OracleNoise { drop_rate: 0.2, spurious_rate: 0.1, seed: 13 };
        let oracle = OracleClient::new(&corpus, &schema, noise).unwrap();
        let text = oracle.complete("big", "").unwrap();
        let parsed = parse_turtle(&text, &default_prefixes()).unwrap();
        let gold = canonicalize(
            corpus.get("big").map(|s| &s.expected).unwrap(),
            &schema,
            CanonMode::NameKeyed,
        )
        .unwrap();
        let kept = parsed.iter().filter(|t| gold.contains(t)).count();
        let spurious = parsed.len() - kept;
        // 3-sigma bands around Binomial(400, 0.8) and Binomial(kept, 0.1).
        let kept_f = kept as f64;
        assert!((kept_f - 320.0).abs() < 3.0 * (400.0f64 * 0.8 * 0.2).sqrt(), "kept {kept}");
        let spur_sigma = (kept_f * 0.1 * 0.9).sqrt();
        assert!(
            (spurious as f64 - kept_f * 0.1).abs() < 3.0 * spur_sigma,
            "spurious {spurious} for kept {kept}"
        );
    }

    #[test]
    fn oracle_rejects_out_of_range_rates_and_unknown_samples() {
        let corpus = tiny_corpus();
        let bad = OracleNoise { drop_rate: 1.5, spurious_rate: 0.0, seed: 0 };
        assert!(matches!(
            OracleClient::new(&corpus, &schema(), bad),
            Err(ClientError::Config(_))
        ));
        let oracle = OracleClient::new(&corpus, &schema(), OracleNoise::default()).unwrap();
        assert!(matches!(
            oracle.complete("nope", ""),
            Err(ClientError::MissingRecording(id)) if id == "nope"
        ));
    }

    // ---- replay ----

    #[test]
    fn replay_round_trips_through_a_recording_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.jsonl");
        let records = vec![
            CompletionRecord {
                sample_id: "a".into(),
                prompt: "p1".into(),
                result: Ok("_:me a know:Person .".into()),
                latency: Duration::from_millis(1),
                backend: "oracle",
            },
            CompletionRecord {
                sample_id: "b".into(),
                prompt: "p2".into(),
                result: Err(ClientError::Timeout),
                latency: Duration::from_millis(1),
                backend: "oracle",
            },
        ];
        let written = write_replay_file(&records, &path).unwrap();
        assert_eq!(written, 1, "failed completions are not recorded");
        let replay = ReplayClient::load(&path).unwrap();
        assert_eq!(replay.len(), 1);
        assert_eq!(replay.complete("a", "ignored").unwrap(), "_:me a know:Person .");
        assert!(matches!(
            replay.complete("b", ""),
            Err(ClientError::MissingRecording(_))
        ));
    }

    #[test]
    fn replay_later_entries_override_earlier_ones() {
        let replay = ReplayClient::from_entries([
            ReplayEntry { sample_id: "a".into(), response_text: "old".into() },
            ReplayEntry { sample_id: "a".into(), response_text: "new".into() },
        ]);
        assert_eq!(replay.complete("a", "").unwrap(), "new");
    }

    #[test]
    fn replay_load_reports_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"sample_id\":\"a\",\"response_text\":\"x\"}\nnot json\n").unwrap();
        let err = ReplayClient::load(&path).unwrap_err();
        assert!(matches!(err, ClientError::Config(msg) if msg.contains("line 2")));
    }

    // ---- batch ----

    struct ProbeClient {
        in_flight: AtomicIsize,
        high_water: AtomicIsize,
    }

    impl ModelClient for ProbeClient {
        fn complete(&self, sample_id: &str, prompt: &str) -> Result<String, ClientError> {
            let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
            self.high_water.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(15));
            self.in_flight.fetch_sub(1, Ordering::SeqCst);
            if sample_id.ends_with('!') {
                Err(ClientError::Transport("boom".into()))
            } else {
                Ok(format!("echo {prompt}"))
            }
        }

        fn backend_tag(&self) -> &'static str {
            "probe"
        }
    }

    #[test]
    fn batch_preserves_order_captures_errors_and_bounds_parallelism() {
        let client =
            ProbeClient { in_flight: AtomicIsize::new(0), high_water: AtomicIsize::new(0) };
        let inputs: Vec<(String, String)> = (0..12)
            .map(|i| {
                let id = if i == 5 { "s5!".to_string() } else { format!("s{i}") };
                (id, format!("prompt {i}"))
            })
            .collect();
        let records = batch_complete(&client, &inputs, 3);
        assert_eq!(records.len(), 12);
        for (i, record) in records.iter().enumerate() {
            assert_eq!(record.sample_id, inputs[i].0, "order preserved");
            assert_eq!(record.backend, "probe");
            if i == 5 {
                assert!(matches!(record.result, Err(ClientError::Transport(_))));
            } else {
                assert_eq!(record.result.as_deref().unwrap(), &format!("echo prompt {i}"));
            }
        }
        let high = client.high_water.load(Ordering::SeqCst);
        assert!(high <= 3, "parallelism exceeded bound: {high}");
        assert!(high >= 2, "workers never overlapped: {high}");
    }

    #[test]
    fn batch_handles_empty_input() {
        let client =
            ProbeClient { in_flight: AtomicIsize::new(0), high_water: AtomicIsize::new(0) };
        assert!(batch_complete(&client, &[], 4).is_empty());
    }

    // ---- endpoint, against a local canned HTTP server ----

    fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
        haystack.windows(needle.len()).position(|w| w == needle)
    }

    /// Accepts exactly one connection, answers with the given body and
    /// status, and hands back the raw request for assertions.
    fn serve_once(
        status_line: &'static str,
        body: String,
    ) -> (String, std::thread::JoinHandle<String>) {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = Vec::new();
            let mut tmp = [0u8; 4096];
            let header_end = loop {
                let n = stream.read(&mut tmp).unwrap();
                assert!(n > 0, "client closed before sending a full request");
                buf.extend_from_slice(&tmp[..n]);
                if let Some(pos) = find_subslice(&buf, b"\r\n\r\n") {
                    break pos + 4;
                }
            };
            let headers = String::from_utf8_lossy(&buf[..header_end]).to_string();
            let content_length = headers
                .lines()
                .find_map(|l| {
                    l.to_ascii_lowercase()
                        .strip_prefix("content-length:")
                        .map(|v| v.trim().parse::<usize>().unwrap())
                })
                .unwrap_or(0);
            while buf.len() < header_end + content_length {
                let n = stream.read(&mut tmp).unwrap();
                assert!(n > 0, "client closed mid-body");
                buf.extend_from_slice(&tmp[..n]);
            }
            let reply = format!(
                "{status_line}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
            format!("{}{}", headers, String::from_utf8_lossy(&buf[header_end..]))
        });
        (format!("http://{addr}"), handle)
    }

    fn quick_config(url: String) -> EndpointConfig {
        EndpointConfig {
            api_key: Some("test-key".into()),
            retry: RetryConfig { max_attempts: 2, backoff_ms: 1 },
            timeout: Duration::from_secs(5),
            ..EndpointConfig::new(url)
        }
    }

    #[test]
    fn endpoint_round_trip_sends_the_wire_shape() {
        let canned = serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": "_:me a know:Person ."}}]
        });
        let (url, handle) = serve_once("HTTP/1.1 200 OK", canned.to_string());
        let client = EndpointClient::new(quick_config(url)).unwrap();
        let text = client.complete("s1", "I exist.").unwrap();
        assert_eq!(text, "_:me a know:Person .");
        let transcript = handle.join().unwrap();
        assert!(transcript.starts_with("POST /chat/completions HTTP/1.1\r\n"));
        assert!(transcript.contains("authorization: Bearer test-key"));
        let body_start = transcript.find("\r\n\r\n").unwrap() + 4;
        let body: serde_json::Value = serde_json::from_str(&transcript[body_start..]).unwrap();
        assert_eq!(body["model"], DEFAULT_MODEL_NAME);
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["role"], "user");
        assert_eq!(body["messages"][1]["content"], "I exist.");
    }

    #[test]
    fn endpoint_maps_http_errors_without_retrying() {
        let (url, handle) = serve_once("HTTP/1.1 503 Service Unavailable", "{}".into());
        let client = EndpointClient::new(quick_config(url)).unwrap();
        // A retry would hit a closed listener and surface as Transport;
        // seeing HttpStatus proves the failure was returned immediately.
        assert!(matches!(client.complete("s", "p"), Err(ClientError::HttpStatus(503))));
        handle.join().unwrap();
    }

    #[test]
    fn endpoint_flags_malformed_payloads() {
        let (url, handle) = serve_once("HTTP/1.1 200 OK", r#"{"unexpected": true}"#.into());
        let client = EndpointClient::new(quick_config(url)).unwrap();
        assert!(matches!(
            client.complete("s", "p"),
            Err(ClientError::MalformedEndpointResponse(_))
        ));
        handle.join().unwrap();
    }

    #[test]
    fn endpoint_reports_transport_failure_after_retries() {
        // Bind then immediately drop to get a port with nothing listening.
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let client = EndpointClient::new(quick_config(format!("http://{addr}"))).unwrap();
        assert!(matches!(client.complete("s", "p"), Err(ClientError::Transport(_))));
    }

    #[test]
    fn endpoint_retries_transport_failures_and_recovers() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let canned = serde_json::json!({
            "choices": [{"message": {"content": "ok"}}]
        })
        .to_string();
        let handle = std::thread::spawn(move || {
            // First connection: slam the door -> transport error.
            let (stream, _) = listener.accept().unwrap();
            drop(stream);
            // Second connection: answer properly.
            let (mut stream, _) = listener.accept().unwrap();
            let mut tmp = [0u8; 4096];
            let mut buf = Vec::new();
            loop {
                let n = stream.read(&mut tmp).unwrap();
                assert!(n > 0);
                buf.extend_from_slice(&tmp[..n]);
                if let Some(pos) = find_subslice(&buf, b"\r\n\r\n") {
                    let headers = String::from_utf8_lossy(&buf[..pos]).to_string();
                    let need: usize = headers
                        .lines()
                        .find_map(|l| {
                            l.to_ascii_lowercase()
                                .strip_prefix("content-length:")
                                .map(|v| v.trim().parse().unwrap())
                        })
                        .unwrap_or(0);
                    if buf.len() >= pos + 4 + need {
                        break;
                    }
                }
            }
            let reply = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{canned}",
                canned.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        });
        let client = EndpointClient::new(quick_config(format!("http://{addr}"))).unwrap();
        assert_eq!(client.complete("s", "p").unwrap(), "ok");
        handle.join().unwrap();
    }

    #[test]
    fn endpoint_omits_authorization_without_a_key() {
        let canned = serde_json::json!({"choices": [{"message": {"content": "x"}}]});
        let (url, handle) = serve_once("HTTP/1.1 200 OK", canned.to_string());
        let mut config = quick_config(url);
        config.api_key = None;
        let client = EndpointClient::new(config).unwrap();
        client.complete("s", "p").unwrap();
        let transcript = handle.join().unwrap().to_ascii_lowercase();
        assert!(!transcript.contains("authorization:"));
    }

    #[test]
    fn endpoint_config_rejects_nonsense() {
        assert!(matches!(
            EndpointClient::new(EndpointConfig::new("")),
            Err(ClientError::Config(_))
        ));
        let mut config = EndpointConfig::new("http://localhost:1");
        config.temperature = -1.0;
        assert!(matches!(EndpointClient::new(config), Err(ClientError::Config(_))));
    }
}
