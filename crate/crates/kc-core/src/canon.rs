//! Name-keyed canonicalization: aligning entities across graphs by their
//! name literals, so triple-by-triple comparison and merging are
//! well-defined regardless of blank-node labeling.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::schema::OntologySchema;
use crate::term::{Iri, Subject, Term, Triple};
use crate::vocab;

/// Entity-alignment mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonMode {
    /// Rewrite every node carrying a name literal `"N"` to the
    /// deterministic IRI `urn:kc:person:<slug(N)>`.
    NameKeyed,
    /// Identity: keep labels exactly as written.
    Strict,
}

/// Canonicalization failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CanonError {
    /// Two distinct nodes carry the same name literal (or names whose
    /// slugs collide), so the name key cannot distinguish them.
    AmbiguousName(String),
}

impl core::fmt::Display for CanonError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CanonError::AmbiguousName(name) => {
                write!(f, "ambiguous name \"{name}\": carried by more than one distinct node")
            }
        }
    }
}

impl core::error::Error for CanonError {}

/// Deterministic IRI-safe slug of a name: lowercased, spaces to `-`,
/// everything outside `[a-z0-9-]` stripped.
pub fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_whitespace() {
            out.push('-');
        } else {
            for lower in c.to_lowercase() {
                if lower.is_ascii_lowercase() || lower.is_ascii_digit() || lower == '-' {
                    out.push(lower);
                }
            }
        }
    }
    out
}

/// Canonicalizes `graph` under `mode`.
///
/// In name-keyed mode every node (blank or IRI) that carries a name
/// literal under the schema's name property is rewritten to
/// `urn:kc:person:<slug>`; a node with several names uses the
/// lexicographically smallest. A blank node *without* a name whose label
/// is a self-referent (`me`, `self`, or `i`, case-insensitive) is
/// rewritten to the fixed first-person IRI `urn:kc:person:me`. Nodes
/// whose names slug to the empty string keep their labels. The operation
/// is idempotent. Strict mode is the identity.
pub fn canonicalize(
    graph: &Graph,
    schema: &OntologySchema,
    mode: CanonMode,
) -> Result<Graph, CanonError> {
    if mode == CanonMode::Strict {
        return Ok(graph.clone());
    }

    let name_property = schema.name_property();
    let mut names: BTreeMap<Subject, BTreeSet<String>> = BTreeMap::new();
    for t in graph.iter() {
        if &t.predicate == name_property {
            if let Term::Literal(lit) = &t.object {
                names.entry(t.subject.clone()).or_default().insert(lit.lexical().to_string());
            }
        }
    }

    // Any single name carried by two distinct nodes is ambiguous.
    let mut carriers: BTreeMap<&str, &Subject> = BTreeMap::new();
    for (node, node_names) in &names {
        for name in node_names {
            if let Some(previous) = carriers.insert(name, node) {
                if previous != node {
                    return Err(CanonError::AmbiguousName(name.clone()));
                }
            }
        }
    }

    let mut rewrites: BTreeMap<Subject, Iri> = BTreeMap::new();
    let mut target_owners: BTreeMap<Iri, (&Subject, &str)> = BTreeMap::new();
    for (node, node_names) in &names {
        let name = node_names.iter().next().expect("non-empty name set");
        let slug = slug(name);
        if slug.is_empty() {
            continue;
        }
        let target = Iri::new(format!("{}{}", vocab::PERSON_NS, slug)).expect("slug IRI");
        if let Some((owner, _)) = target_owners.get(&target) {
            if *owner != node {
                // Distinct names collapsing to one slug are as ambiguous as
                // a shared name.
                return Err(CanonError::AmbiguousName(name.clone()));
            }
        }
        target_owners.insert(target.clone(), (node, name));
        rewrites.insert(node.clone(), target);
    }

    // Self-referent blank nodes without a name become the first person.
    for node in graph.nodes() {
        if let Subject::Blank(b) = &node {
            if !rewrites.contains_key(&node)
                && !names.contains_key(&node)
                && is_self_referent(b.label())
            {
                rewrites
                    .insert(node.clone(), Iri::new(vocab::PERSON_ME).expect("constant IRI"));
            }
        }
    }

    let mut out = Graph::with_prefixes(graph.prefixes().clone());
    if !rewrites.is_empty() {
        out.prefixes_mut().insert("person", vocab::PERSON_NS);
    }
    for t in graph.iter() {
        let subject = match rewrites.get(&t.subject) {
            Some(iri) => Subject::Iri(iri.clone()),
            None => t.subject.clone(),
        };
        let object = match Subject::from_term(&t.object).as_ref().and_then(|s| rewrites.get(s)) {
            Some(iri) => Term::Iri(iri.clone()),
            None => t.object.clone(),
        };
        out.insert(Triple { subject, predicate: t.predicate.clone(), object });
    }
    Ok(out)
}

fn is_self_referent(label: &str) -> bool {
    let mut lowered = String::with_capacity(label.len());
    for c in label.chars() {
        lowered.extend(c.to_lowercase());
    }
    matches!(lowered.as_str(), "me" | "self" | "i")
}

/// The distinct name literals in `graph`, in sorted order — used by
/// corpus tooling to check cross-sample name reuse.
pub fn names_in(graph: &Graph, schema: &OntologySchema) -> Vec<String> {
    let name_property = schema.name_property();
    let mut out = BTreeSet::new();
    for t in graph.iter() {
        if &t.predicate == name_property {
            if let Term::Literal(lit) = &t.object {
                out.insert(lit.lexical().to_string());
            }
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Literal;
    use crate::turtle::parse_turtle;
    use crate::vocab::default_prefixes;

    fn schema() -> OntologySchema {
        OntologySchema::bundled()
    }

    fn canon(ttl: &str) -> Result<Graph, CanonError> {
        let g = parse_turtle(ttl, &default_prefixes()).unwrap();
        canonicalize(&g, &schema(), CanonMode::NameKeyed)
    }

    fn know(local: &str) -> Iri {
        Iri::new(format!("{}{}", vocab::KNOW_NS, local)).unwrap()
    }

    fn person(slug: &str) -> Subject {
        Subject::Iri(Iri::new(format!("{}{}", vocab::PERSON_NS, slug)).unwrap())
    }

    #[test]
    fn named_blank_node_becomes_a_person_iri() {
        let g = canon("_:p know:name \"Alice\" .").unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.contains(&Triple::new(
            person("alice"),
            know("name"),
            Literal::plain("Alice"),
        )));
    }

    #[test]
    fn graph_without_names_is_unchanged() {
        let input = parse_turtle("_:x know:knows _:y .", &default_prefixes()).unwrap();
        let g = canonicalize(&input, &schema(), CanonMode::NameKeyed).unwrap();
        assert_eq!(g, input);
    }

    #[test]
    fn two_nodes_named_bob_are_ambiguous() {
        let err = canon("_:a know:name \"Bob\" . _:b know:name \"Bob\" .").unwrap_err();
        assert_eq!(err, CanonError::AmbiguousName("Bob".into()));
    }

    #[test]
    fn slug_collisions_are_ambiguous_too() {
        let err = canon("_:a know:name \"Bob\" . _:b know:name \"bob!\" .").unwrap_err();
        assert!(matches!(err, CanonError::AmbiguousName(_)));
    }

    #[test]
    fn slug_rules() {
        assert_eq!(slug("Alice"), "alice");
        assert_eq!(slug("Mary Jane O'Brien"), "mary-jane-obrien");
        assert_eq!(slug("Q3-bot 7"), "q3-bot-7");
        assert_eq!(slug("!!!"), "");
        assert_eq!(slug("ÉLAN"), "lan");
    }

    #[test]
    fn unsluggable_names_leave_the_node_alone() {
        let g = canon("_:p know:name \"!!!\" .").unwrap();
        assert!(g.contains(&Triple::new(
            Subject::Blank(crate::term::BlankNode::new("p").unwrap()),
            know("name"),
            Literal::plain("!!!"),
        )));
    }

    #[test]
    fn smallest_of_several_names_picks_the_slug() {
        let g = canon("_:p know:name \"Bob\" , \"Al\" .").unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.contains(&Triple::new(person("al"), know("name"), Literal::plain("Al"))));
        assert!(g.contains(&Triple::new(person("al"), know("name"), Literal::plain("Bob"))));
    }

    #[test]
    fn objects_are_rewritten_alongside_subjects() {
        let g = canon("_:p know:name \"Ada\" . _:q know:knows _:p ; know:name \"Hal\" .").unwrap();
        assert!(g.contains(&Triple::new(person("hal"), know("knows"), person("ada").as_term())));
    }

    #[test]
    fn iri_nodes_with_names_are_rewritten() {
        let g = canon("<urn:x:1> know:name \"Ada\" ; know:knows <urn:x:2> .").unwrap();
        assert!(g.contains(&Triple::new(person("ada"), know("name"), Literal::plain("Ada"))));
        assert!(g.contains(&Triple::new(
            person("ada"),
            know("knows"),
            Term::Iri(Iri::new("urn:x:2").unwrap()),
        )));
    }

    #[test]
    fn self_referent_blanks_become_the_first_person() {
        for label in ["me", "Me", "self", "i", "I"] {
            let g = canon(&format!("_:{label} know:father _:f .")).unwrap();
            assert!(
                g.contains(&Triple::new(
                    person("me"),
                    know("father"),
                    Subject::Blank(crate::term::BlankNode::new("f").unwrap()).as_term(),
                )),
                "label {label}"
            );
        }
    }

    #[test]
    fn a_named_self_referent_uses_its_name() {
        let g = canon("_:me know:name \"Ada\" .").unwrap();
        assert!(g.contains(&Triple::new(person("ada"), know("name"), Literal::plain("Ada"))));
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let once = canon(
            "_:me know:father _:f . _:f know:name \"Hal Senior\" ; know:spouse _:m .
             _:m know:name \"Eva\" .",
        )
        .unwrap();
        let twice = canonicalize(&once, &schema(), CanonMode::NameKeyed).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn strict_mode_is_the_identity() {
        let input =
            parse_turtle("_:me know:name \"Ada\" .", &default_prefixes()).unwrap();
        let g = canonicalize(&input, &schema(), CanonMode::Strict).unwrap();
        assert_eq!(g, input);
        assert!(g.contains(&Triple::new(
            Subject::Blank(crate::term::BlankNode::new("me").unwrap()),
            know("name"),
            Literal::plain("Ada"),
        )));
    }
}
