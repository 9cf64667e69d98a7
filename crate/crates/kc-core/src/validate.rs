//! Schema validation of instance graphs: a total check producing a
//! structured report, never a failure.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::schema::OntologySchema;
use crate::term::{Iri, Literal, Subject, Term, Triple};
use crate::vocab;

/// Categories of schema violations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    UnknownPredicate,
    UnknownClass,
    DomainViolation,
    RangeViolation,
    LiteralWhereIriExpected,
    FunctionalViolation,
    AmbiguousName,
}

impl ViolationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationKind::UnknownPredicate => "unknown-predicate",
            ViolationKind::UnknownClass => "unknown-class",
            ViolationKind::DomainViolation => "domain-violation",
            ViolationKind::RangeViolation => "range-violation",
            ViolationKind::LiteralWhereIriExpected => "literal-where-iri-expected",
            ViolationKind::FunctionalViolation => "functional-violation",
            ViolationKind::AmbiguousName => "ambiguous-name",
        }
    }
}

impl core::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One schema violation, with the triple(s) that exhibit it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub triples: Vec<Triple>,
    pub message: String,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "[{}] {}", self.kind, self.message)
    }
}

/// Outcome of validating a graph. Empty violations ⇔ conformant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn kinds(&self) -> BTreeSet<ViolationKind> {
        self.violations.iter().map(|v| v.kind).collect()
    }
}

impl core::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.is_clean() {
            return write!(f, "valid: no violations");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

/// Validates `graph` against `schema`.
///
/// Works on raw or canonicalized graphs. Types are taken from asserted
/// `rdf:type` triples, named-individual declarations, and the subclass
/// closure; property usage does not infer types, so an untyped node is
/// never a domain/range violation (open world). Functional violations
/// compare object terms exactly — canonicalize first if distinct labels
/// may alias one entity.
pub fn validate(graph: &Graph, schema: &OntologySchema) -> ValidationReport {
    let mut violations = Vec::new();
    let rdf_type = vocab::rdf_type();
    let types = known_types(graph, schema, &rdf_type);

    for t in graph.iter() {
        if t.predicate == rdf_type {
            check_type_assertion(t, schema, &mut violations);
        } else if let Some(def) = schema.object_property(&t.predicate) {
            check_object_property(t, schema, &types, &def.domain, &def.range, &mut violations);
        } else if let Some(def) = schema.data_property(&t.predicate) {
            check_data_property(t, schema, &types, &def.domain, &def.datatype, &mut violations);
        } else {
            violations.push(Violation {
                kind: ViolationKind::UnknownPredicate,
                triples: alloc::vec![t.clone()],
                message: format!("predicate {} is not in the schema", t.predicate),
            });
        }
    }

    check_functional(graph, schema, &mut violations);
    check_ambiguous_names(graph, schema, &mut violations);
    ValidationReport { violations }
}

/// Closure of known types per node: asserted rdf:type objects plus
/// individual classes, closed under superclasses.
fn known_types(
    graph: &Graph,
    schema: &OntologySchema,
    rdf_type: &Iri,
) -> BTreeMap<Subject, BTreeSet<Iri>> {
    let mut types: BTreeMap<Subject, BTreeSet<Iri>> = BTreeMap::new();
    for t in graph.iter() {
        if &t.predicate == rdf_type {
            if let Term::Iri(class) = &t.object {
                if schema.is_class(class) {
                    types
                        .entry(t.subject.clone())
                        .or_default()
                        .extend(schema.superclass_closure(class));
                }
            }
        }
    }
    for node in graph.nodes() {
        if let Subject::Iri(iri) = &node {
            if let Some(class) = schema.individual_class(iri) {
                types.entry(node.clone()).or_default().extend(schema.superclass_closure(class));
            }
        }
    }
    types
}

fn check_type_assertion(t: &Triple, schema: &OntologySchema, out: &mut Vec<Violation>) {
    match &t.object {
        Term::Literal(_) => out.push(Violation {
            kind: ViolationKind::LiteralWhereIriExpected,
            triples: alloc::vec![t.clone()],
            message: format!("rdf:type of {} expects a class IRI, found a literal", t.subject),
        }),
        Term::Blank(b) => out.push(Violation {
            kind: ViolationKind::UnknownClass,
            triples: alloc::vec![t.clone()],
            message: format!("rdf:type object _:{} is not a declared class", b.label()),
        }),
        Term::Iri(class) => {
            if !schema.is_class(class) {
                out.push(Violation {
                    kind: ViolationKind::UnknownClass,
                    triples: alloc::vec![t.clone()],
                    message: format!("{class} is not a declared class"),
                });
            }
        }
    }
}

fn node_conforms(
    node: &Subject,
    required: &Iri,
    types: &BTreeMap<Subject, BTreeSet<Iri>>,
) -> bool {
    match types.get(node) {
        // Open world: a node with no known type can be anything.
        None => true,
        Some(closure) => closure.contains(required),
    }
}

fn check_object_property(
    t: &Triple,
    _schema: &OntologySchema,
    types: &BTreeMap<Subject, BTreeSet<Iri>>,
    domain: &Iri,
    range: &Iri,
    out: &mut Vec<Violation>,
) {
    if let Term::Literal(lit) = &t.object {
        out.push(Violation {
            kind: ViolationKind::LiteralWhereIriExpected,
            triples: alloc::vec![t.clone()],
            message: format!(
                "object property {} expects an IRI object, found literal \"{}\"",
                t.predicate,
                lit.lexical()
            ),
        });
        return;
    }
    if !node_conforms(&t.subject, domain, types) {
        out.push(Violation {
            kind: ViolationKind::DomainViolation,
            triples: alloc::vec![t.clone()],
            message: format!("subject {} of {} is not a {domain}", t.subject, t.predicate),
        });
    }
    if let Some(object_node) = Subject::from_term(&t.object) {
        if !node_conforms(&object_node, range, types) {
            out.push(Violation {
                kind: ViolationKind::RangeViolation,
                triples: alloc::vec![t.clone()],
                message: format!("object {} of {} is not a {range}", object_node, t.predicate),
            });
        }
    }
}

fn check_data_property(
    t: &Triple,
    _schema: &OntologySchema,
    types: &BTreeMap<Subject, BTreeSet<Iri>>,
    domain: &Iri,
    datatype: &Iri,
    out: &mut Vec<Violation>,
) {
    let Term::Literal(lit) = &t.object else {
        out.push(Violation {
            kind: ViolationKind::RangeViolation,
            triples: alloc::vec![t.clone()],
            message: format!(
                "data property {} expects a literal, found {}",
                t.predicate, t.object
            ),
        });
        return;
    };
    if !literal_matches_datatype(lit, datatype) {
        out.push(Violation {
            kind: ViolationKind::RangeViolation,
            triples: alloc::vec![t.clone()],
            message: format!(
                "literal \"{}\" does not match the declared datatype {datatype} of {}",
                lit.lexical(),
                t.predicate
            ),
        });
    }
    if !node_conforms(&t.subject, domain, types) {
        out.push(Violation {
            kind: ViolationKind::DomainViolation,
            triples: alloc::vec![t.clone()],
            message: format!("subject {} of {} is not a {domain}", t.subject, t.predicate),
        });
    }
}

/// Plain and language-tagged literals count as strings; otherwise the
/// explicit datatype must match the declared one exactly.
fn literal_matches_datatype(lit: &Literal, declared: &Iri) -> bool {
    match lit.datatype() {
        Some(dt) => dt == declared,
        None => declared.as_str() == vocab::XSD_STRING,
    }
}

fn check_functional(graph: &Graph, schema: &OntologySchema, out: &mut Vec<Violation>) {
    let functional: BTreeSet<&Iri> = schema
        .object_properties()
        .values()
        .filter(|d| d.functional)
        .map(|d| &d.iri)
        .chain(schema.data_properties().values().filter(|d| d.functional).map(|d| &d.iri))
        .collect();

    // (predicate, subject) -> triples, kept sorted for determinism.
    let mut groups: BTreeMap<(&Iri, &Subject), Vec<&Triple>> = BTreeMap::new();
    for t in graph.iter() {
        if functional.contains(&t.predicate) {
            groups.entry((&t.predicate, &t.subject)).or_default().push(t);
        }
    }
    for ((predicate, subject), triples) in groups {
        let distinct: BTreeSet<&Term> = triples.iter().map(|t| &t.object).collect();
        if distinct.len() > 1 {
            out.push(Violation {
                kind: ViolationKind::FunctionalViolation,
                triples: triples.into_iter().cloned().collect(),
                message: format!(
                    "{subject} has {} distinct values for functional property {predicate}",
                    distinct.len()
                ),
            });
        }
    }
}

/// Two distinct nodes carrying the same name literal cannot be told apart
/// by the name key; flagged so canonicalization refuses the graph.
fn check_ambiguous_names(graph: &Graph, schema: &OntologySchema, out: &mut Vec<Violation>) {
    let name_property = schema.name_property();
    let mut by_name: BTreeMap<&str, (BTreeSet<&Subject>, Vec<&Triple>)> = BTreeMap::new();
    for t in graph.iter() {
        if &t.predicate == name_property {
            if let Term::Literal(lit) = &t.object {
                let entry = by_name.entry(lit.lexical()).or_default();
                entry.0.insert(&t.subject);
                entry.1.push(t);
            }
        }
    }
    for (name, (subjects, triples)) in by_name {
        if subjects.len() > 1 {
            out.push(Violation {
                kind: ViolationKind::AmbiguousName,
                triples: triples.into_iter().cloned().collect(),
                message: format!("{} distinct nodes share the name \"{name}\"", subjects.len()),
            });
        }
    }
}
