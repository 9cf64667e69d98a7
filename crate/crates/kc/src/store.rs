//! Persistent knowledge store: a validated, fully materialized graph with
//! per-triple provenance, set-union merge under a conflict policy, and
//! atomic persistence (canonical Turtle plus a provenance sidecar).
//!
//! Invariant: between public calls the store's graph validates cleanly and
//! equals its own materialization. A merge that would break that — even
//! through derived triples — fails without touching the store.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use kc_core::vocab::default_prefixes;
use kc_core::{
    materialize, parse_turtle, serialize_turtle, validate, Graph, OntologySchema, Triple,
    ValidationReport,
};

/// What to do when a merge would introduce validation conflicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MergePolicy {
    /// Fail the merge and leave the store untouched.
    RejectConflicts,
    /// Drop the conflicting incoming triples, keep the store's.
    KeepExisting,
    /// Remove the store triples the incoming ones conflict with.
    KeepNew,
}

impl MergePolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            MergePolicy::RejectConflicts => "reject-conflicts",
            MergePolicy::KeepExisting => "keep-existing",
            MergePolicy::KeepNew => "keep-new",
        }
    }
}

impl std::fmt::Display for MergePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MergePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reject-conflicts" => Ok(MergePolicy::RejectConflicts),
            "keep-existing" => Ok(MergePolicy::KeepExisting),
            "keep-new" => Ok(MergePolicy::KeepNew),
            other => Err(format!(
                "unknown merge policy {other:?} (expected reject-conflicts, keep-existing, or keep-new)"
            )),
        }
    }
}

/// Where and when a triple entered the store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub origin: String,
    pub unix_time: u64,
}

/// Accounting for one merge. The incoming triple set partitions exactly
/// into `added + duplicates + dropped`; `derived` and `removed` describe
/// what re-materialization and the keep-new policy did to the store side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MergeReport {
    /// Incoming triples inserted into the store.
    pub added: usize,
    /// Incoming triples the store already contained.
    pub duplicates: usize,
    /// Incoming triples discarded by the keep-existing policy.
    pub dropped: usize,
    /// Store triples removed by the keep-new policy.
    pub removed: usize,
    /// New triples introduced by re-materialization.
    pub derived: usize,
    /// Validation violations found in the tentative union.
    pub conflicts: usize,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("store file {path} does not parse: {message}")]
    Parse { path: String, message: String },
    #[error("store file {path} fails validation: {report}")]
    InvalidStore { path: String, report: ValidationReport },
    #[error("incoming graph fails validation on its own: {0}")]
    InvalidIncoming(ValidationReport),
    #[error("merge rejected, the union has {} violation(s): {report}", report.violations.len())]
    MergeConflicts { report: ValidationReport },
    #[error("merge would derive contradictory facts: {0}")]
    DerivedConflict(ValidationReport),
    #[error("provenance sidecar {path} is malformed at line {line}: {message}")]
    BadSidecar { path: String, line: usize, message: String },
}

/// One line of the provenance sidecar file.
#[derive(Debug, Serialize, Deserialize)]
struct SidecarLine {
    triple: String,
    origin: String,
    unix_time: u64,
}

/// The store proper. Provenance is keyed by the triple's canonical
/// N-Triples-style rendering.
#[derive(Debug, Clone, Default)]
pub struct Store {
    graph: Graph,
    provenance: BTreeMap<String, Vec<ProvenanceEntry>>,
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl Store {
    pub fn new() -> Store {
        Store { graph: Graph::with_prefixes(default_prefixes()), provenance: BTreeMap::new() }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn provenance_of(&self, triple: &Triple) -> &[ProvenanceEntry] {
        self.provenance.get(&triple.to_string()).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Merges `incoming` into the store by set union, applying `policy` to
    /// any validation conflicts the union (or its materialization) would
    /// introduce. On error the store is untouched.
    pub fn merge(
        &mut self,
        incoming: &Graph,
        schema: &OntologySchema,
        policy: MergePolicy,
        origin: &str,
    ) -> Result<MergeReport, StoreError> {
        let incoming_report = validate(incoming, schema);
        if !incoming_report.violations.is_empty() {
            return Err(StoreError::InvalidIncoming(incoming_report));
        }

        let mut report = MergeReport::default();
        let incoming_set: BTreeSet<Triple> = incoming.iter().cloned().collect();
        report.duplicates = incoming_set.iter().filter(|t| self.graph.contains(t)).count();

        let mut union = self.graph.clone();
        for t in incoming.iter() {
            union.insert(t.clone());
        }

        let union_report = validate(&union, schema);
        report.conflicts = union_report.violations.len();
        let mut dropped: BTreeSet<Triple> = BTreeSet::new();
        let mut removed: BTreeSet<Triple> = BTreeSet::new();
        if !union_report.violations.is_empty() {
            match policy {
                MergePolicy::RejectConflicts => {
                    return Err(StoreError::MergeConflicts { report: union_report });
                }
                MergePolicy::KeepExisting => {
                    // Removing triples can never create a violation, so one
                    // pass over the recorded violations suffices.
                    for violation in &union_report.violations {
                        for t in &violation.triples {
                            if incoming_set.contains(t) && !self.graph.contains(t) {
                                dropped.insert(t.clone());
                            }
                        }
                    }
                    for t in &dropped {
                        union.remove(t);
                    }
                }
                MergePolicy::KeepNew => {
                    for violation in &union_report.violations {
                        for t in &violation.triples {
                            if self.graph.contains(t) && !incoming_set.contains(t) {
                                removed.insert(t.clone());
                            }
                        }
                    }
                    for t in &removed {
                        union.remove(t);
                    }
                }
            }
            let after = validate(&union, schema);
            if !after.violations.is_empty() {
                // The conflict was not between old and new: it is internal
                // to what would remain. No policy can resolve that here.
                return Err(StoreError::MergeConflicts { report: after });
            }
        }

        let materialized = materialize(&union, schema)
            .expect("validated union materializes");
        let derived_report = validate(&materialized, schema);
        if !derived_report.violations.is_empty() {
            // Closure rules surfaced a contradiction (for instance two
            // different sexes implied for one person). Resolving that
            // automatically would mean guessing which premise is wrong.
            return Err(StoreError::DerivedConflict(derived_report));
        }

        report.dropped = dropped.len();
        report.removed = removed.len();
        report.added = incoming_set
            .iter()
            .filter(|t| !self.graph.contains(t) && !dropped.contains(*t))
            .count();
        let before_len = self.graph.len();
        report.derived =
            materialized.len() - (before_len - removed.len()) - report.added;

        // Commit.
        let stamp = now_unix();
        for t in materialized.iter() {
            if !self.graph.contains(t) {
                self.provenance
                    .entry(t.to_string())
                    .or_default()
                    .push(ProvenanceEntry { origin: origin.to_string(), unix_time: stamp });
            }
        }
        for t in &removed {
            self.provenance.remove(&t.to_string());
        }
        self.graph = materialized;
        Ok(report)
    }

    /// Writes the store as canonical Turtle plus a `<path>.prov.jsonl`
    /// provenance sidecar, atomically (temp file + rename).
    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let turtle = serialize_turtle(&self.graph, self.graph.prefixes());
        write_atomic(path, turtle.as_bytes())?;
        let mut body = Vec::new();
        for (triple, entries) in &self.provenance {
            for entry in entries {
                let line = SidecarLine {
                    triple: triple.clone(),
                    origin: entry.origin.clone(),
                    unix_time: entry.unix_time,
                };
                body.extend_from_slice(
                    serde_json::to_string(&line).expect("sidecar lines serialize").as_bytes(),
                );
                body.push(b'\n');
            }
        }
        write_atomic(&sidecar_path(path), &body)
    }

    /// Loads a store file, validating it and completing its closure. A
    /// file whose contents fail validation is refused; a file missing
    /// derived triples is healed by re-materialization. The provenance
    /// sidecar is optional.
    pub fn load(path: &Path, schema: &OntologySchema) -> Result<Store, StoreError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StoreError::Io { path: path.display().to_string(), source: e })?;
        let graph = parse_turtle(&text, &default_prefixes()).map_err(|e| StoreError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let report = validate(&graph, schema);
        if !report.violations.is_empty() {
            return Err(StoreError::InvalidStore {
                path: path.display().to_string(),
                report,
            });
        }
        let materialized = materialize(&graph, schema).expect("validated graph materializes");
        let healed_report = validate(&materialized, schema);
        if !healed_report.violations.is_empty() {
            return Err(StoreError::InvalidStore {
                path: path.display().to_string(),
                report: healed_report,
            });
        }

        let mut provenance: BTreeMap<String, Vec<ProvenanceEntry>> = BTreeMap::new();
        let sidecar = sidecar_path(path);
        if sidecar.exists() {
            let text = std::fs::read_to_string(&sidecar)
                .map_err(|e| StoreError::Io { path: sidecar.display().to_string(), source: e })?;
            for (index, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: SidecarLine =
                    serde_json::from_str(line).map_err(|e| StoreError::BadSidecar {
                        path: sidecar.display().to_string(),
                        line: index + 1,
                        message: e.to_string(),
                    })?;
                provenance.entry(parsed.triple).or_default().push(ProvenanceEntry {
                    origin: parsed.origin,
                    unix_time: parsed.unix_time,
                });
            }
        }
        Ok(Store { graph: materialized, provenance })
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    PathBuf::from(format!("{}.prov.jsonl", path.display()))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let io = |e: std::io::Error| StoreError::Io { path: path.display().to_string(), source: e };
    let directory = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut temp = tempfile::NamedTempFile::new_in(directory).map_err(io)?;
    temp.write_all(bytes).map_err(io)?;
    temp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
