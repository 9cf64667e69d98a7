//! Triple-set graphs with prefix metadata, and exact set diffing.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::term::{Iri, Subject, Term, Triple};

/// Namespace prefix bindings (`know` -> `https://know.dev/`).
///
/// Stored sorted so that iteration, serialization, and equality are
/// deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixMap(BTreeMap<String, String>);

impl PrefixMap {
    pub fn new() -> Self {
        PrefixMap(BTreeMap::new())
    }

    pub fn insert(&mut self, label: impl Into<String>, namespace: impl Into<String>) {
        self.0.insert(label.into(), namespace.into());
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.0.get(label).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Union with `other`; bindings already present in `self` win.
    pub fn merged_over(&self, other: &PrefixMap) -> PrefixMap {
        let mut out = other.0.clone();
        for (k, v) in &self.0 {
            out.insert(k.clone(), v.clone());
        }
        PrefixMap(out)
    }

    /// The shortest prefixed form of `iri`, if any binding abbreviates it.
    ///
    /// Picks the longest matching namespace; ties go to the
    /// lexicographically smallest label. The local part must be a valid
    /// local name so that the abbreviation re-parses to the same IRI.
    pub fn abbreviate(&self, iri: &Iri) -> Option<(String, String)> {
        let mut best: Option<(&str, &str)> = None;
        for (label, ns) in &self.0 {
            if !valid_prefix_label(label) {
                continue;
            }
            if let Some(local) = iri.as_str().strip_prefix(ns.as_str()) {
                if !valid_local_name(local) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((best_label, best_ns)) => {
                        ns.len() > best_ns.len()
                            || (ns.len() == best_ns.len() && label.as_str() < best_label)
                    }
                };
                if better {
                    best = Some((label, ns));
                }
            }
        }
        best.map(|(label, ns)| (label.to_string(), iri.as_str()[ns.len()..].to_string()))
    }
}

/// True when `local` can appear as the local part of a prefixed name in the
/// supported grammar subset (empty is allowed: `know:`).
pub(crate) fn valid_local_name(local: &str) -> bool {
    if local.is_empty() {
        return true;
    }
    crate::term::valid_blank_label(local)
}

/// True when `label` can appear before the colon of a prefixed name
/// (empty is allowed: the default `:` prefix).
pub(crate) fn valid_prefix_label(label: &str) -> bool {
    let mut chars = label.chars();
    let Some(first) = chars.next() else {
        return true;
    };
    (first.is_ascii_alphabetic() || first == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-'))
}

/// An RDF graph: a set of triples plus prefix metadata.
///
/// Triple storage has set semantics and deterministic (sorted) iteration
/// order. Prefixes are carried for serialization convenience only; two
/// graphs with equal triple sets are equal regardless of prefixes.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    prefixes: PrefixMap,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn with_prefixes(prefixes: PrefixMap) -> Self {
        Graph { triples: BTreeSet::new(), prefixes }
    }

    /// Inserts a triple, returning `true` if it was not already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.remove(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn prefixes(&self) -> &PrefixMap {
        &self.prefixes
    }

    pub fn prefixes_mut(&mut self) -> &mut PrefixMap {
        &mut self.prefixes
    }

    pub fn triples_with_predicate<'a>(
        &'a self,
        predicate: &'a Iri,
    ) -> impl Iterator<Item = &'a Triple> {
        self.triples.iter().filter(move |t| &t.predicate == predicate)
    }

    /// Objects of `(subject, predicate, ?)` triples.
    pub fn objects(&self, subject: &Subject, predicate: &Iri) -> Vec<&Term> {
        self.triples
            .iter()
            .filter(|t| &t.subject == subject && &t.predicate == predicate)
            .map(|t| &t.object)
            .collect()
    }

    /// All distinct subject/object nodes (IRIs and blank nodes; literals
    /// are not nodes).
    pub fn nodes(&self) -> BTreeSet<Subject> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            out.insert(t.subject.clone());
            if let Some(s) = Subject::from_term(&t.object) {
                out.insert(s);
            }
        }
        out
    }

    /// Distinct blank node labels appearing anywhere in the graph.
    pub fn blank_labels(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            if let Subject::Blank(b) = &t.subject {
                out.insert(b.label().to_string());
            }
            if let Term::Blank(b) = &t.object {
                out.insert(b.label().to_string());
            }
        }
        out
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for Graph {}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph { triples: iter.into_iter().collect(), prefixes: PrefixMap::new() }
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter);
    }
}

/// Exact partition of two triple sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDiff {
    pub common: BTreeSet<Triple>,
    pub only_left: BTreeSet<Triple>,
    pub only_right: BTreeSet<Triple>,
}

/// Splits `left` and `right` into shared and one-sided triples.
///
/// Both graphs are expected to be canonicalized under the same mode before
/// diffing; the diff itself is plain set algebra.
pub fn graph_diff(left: &Graph, right: &Graph) -> GraphDiff {
    let common = left.triples.intersection(&right.triples).cloned().collect();
    let only_left = left.triples.difference(&right.triples).cloned().collect();
    let only_right = right.triples.difference(&left.triples).cloned().collect();
    GraphDiff { common, only_left, only_right }
}
