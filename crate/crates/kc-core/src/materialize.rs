//! Rule materialization: the least fixpoint of the schema's closure rules
//! over a validated graph.

use alloc::vec::Vec;

use crate::graph::Graph;
use crate::schema::{OntologySchema, RulePosition};
use crate::term::{Subject, Triple};
use crate::validate::{validate, ValidationReport};

/// Materialization failure: the input graph did not validate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaterializeError {
    InvalidInput(ValidationReport),
}

impl core::fmt::Display for MaterializeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MaterializeError::InvalidInput(report) => {
                write!(f, "cannot materialize an invalid graph: {report}")
            }
        }
    }
}

impl core::error::Error for MaterializeError {}

/// Computes the least fixpoint of symmetric, inverse, subproperty, and
/// implication-rule closure over `graph`.
///
/// The input must validate cleanly ([`MaterializeError::InvalidInput`]
/// otherwise). The input triples are a subset of the output, and the
/// operation is idempotent and monotone. Every closure rule derives its
/// conclusion from a single triple, so the union of materialized graphs
/// is itself closed — merges can re-materialize cheaply.
pub fn materialize(graph: &Graph, schema: &OntologySchema) -> Result<Graph, MaterializeError> {
    let report = validate(graph, schema);
    if !report.is_clean() {
        return Err(MaterializeError::InvalidInput(report));
    }

    let mut out = graph.clone();
    let mut queue: Vec<Triple> = out.iter().cloned().collect();
    while let Some(triple) = queue.pop() {
        for implied in implied_by(&triple, schema) {
            if out.insert(implied.clone()) {
                queue.push(implied);
            }
        }
    }
    Ok(out)
}

/// Direct one-step consequences of a single triple under the schema.
pub(crate) fn implied_by(triple: &Triple, schema: &OntologySchema) -> Vec<Triple> {
    let mut out = Vec::new();
    let object_as_subject = Subject::from_term(&triple.object);

    if let Some(def) = schema.object_property(&triple.predicate) {
        if def.symmetric {
            if let Some(object) = &object_as_subject {
                out.push(Triple::new(
                    object.clone(),
                    triple.predicate.clone(),
                    triple.subject.as_term(),
                ));
            }
        }
        if let Some(inverse) = &def.inverse_of {
            if let Some(object) = &object_as_subject {
                out.push(Triple::new(object.clone(), inverse.clone(), triple.subject.as_term()));
            }
        }
        if let Some(parent) = &def.subproperty_of {
            out.push(Triple::new(
                triple.subject.clone(),
                parent.clone(),
                triple.object.clone(),
            ));
        }
    }

    for rule in schema.rules() {
        if rule.on_predicate != triple.predicate {
            continue;
        }
        let node = match rule.position {
            RulePosition::Subject => Some(triple.subject.clone()),
            RulePosition::Object => object_as_subject.clone(),
        };
        let Some(node) = node else { continue };
        let object = match &rule.fixed_object {
            Some(fixed) => fixed.clone(),
            None => match rule.position {
                // The implied object is the other end of the matched triple.
                RulePosition::Subject => triple.object.clone(),
                RulePosition::Object => triple.subject.as_term(),
            },
        };
        out.push(Triple::new(node, rule.implies.clone(), object));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{on_subject, SchemaOptions};
    use crate::term::{Iri, Term};
    use crate::turtle::parse_turtle;
    use crate::validate::ViolationKind;
    use crate::vocab::{self, default_prefixes};

    fn know(local: &str) -> Iri {
        Iri::new(format!("{}{}", vocab::KNOW_NS, local)).unwrap()
    }

    fn graph(ttl: &str) -> Graph {
        parse_turtle(ttl, &default_prefixes()).unwrap()
    }

    fn materialized(ttl: &str) -> Graph {
        materialize(&graph(ttl), &OntologySchema::bundled()).unwrap()
    }

    fn blank(label: &str) -> Subject {
        Subject::Blank(crate::term::BlankNode::new(label).unwrap())
    }

    #[test]
    fn father_implies_child_parent_and_male_sex() {
        let g = materialized("_:x know:father _:y .");
        let (x, y) = (blank("x"), blank("y"));
        assert!(g.contains(&Triple::new(y.clone(), know("child"), x.as_term())));
        assert!(g.contains(&Triple::new(x.clone(), know("parent"), y.as_term())));
        assert!(g.contains(&Triple::new(y.clone(), know("sex"), Term::Iri(know("Male")))));
        // parent's inverse closure also adds (y, child, x) — already there —
        // and child's inverse adds (x, parent, y): the fixpoint is stable.
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn spouse_is_symmetric() {
        let g = materialized("_:x know:spouse _:y .");
        assert!(g.contains(&Triple::new(blank("y"), know("spouse"), blank("x").as_term())));
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn sister_implies_sibling_both_ways_and_female_sex() {
        let g = materialized("_:x know:sister _:y .");
        let (x, y) = (blank("x"), blank("y"));
        assert!(g.contains(&Triple::new(x.clone(), know("sibling"), y.as_term())));
        assert!(g.contains(&Triple::new(y.clone(), know("sibling"), x.as_term())));
        assert!(g.contains(&Triple::new(y.clone(), know("sex"), Term::Iri(know("Female")))));
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn knows_adds_nothing() {
        let g = materialized("_:x know:knows _:y .");
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn input_is_subset_of_output_and_idempotent() {
        let schema = OntologySchema::bundled();
        let input = graph(
            "_:a know:mother _:b . _:b know:spouse _:c . _:a know:brother _:d .
             _:d know:name \"Max\" .",
        );
        let once = materialize(&input, &schema).unwrap();
        for t in input.iter() {
            assert!(once.contains(t));
        }
        let twice = materialize(&once, &schema).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn invalid_input_is_refused_with_the_report() {
        let schema = OntologySchema::bundled();
        let err = materialize(&graph("_:x know:knows \"lit\" ."), &schema).unwrap_err();
        let MaterializeError::InvalidInput(report) = err;
        assert_eq!(
            report.kinds(),
            alloc::collections::BTreeSet::from([ViolationKind::LiteralWhereIriExpected])
        );
    }

    #[test]
    fn subject_position_rule_without_fixed_object_copies_the_other_end() {
        // Synthetic schema: p's rule copies (x, p, y) to (x, q, y).
        let ttl = "
            know:Thing a owl:Class .
            know:name a owl:DatatypeProperty ; rdfs:domain know:Thing .
            know:p a owl:ObjectProperty ; rdfs:domain know:Thing ; rdfs:range know:Thing .
            know:q a owl:ObjectProperty ; rdfs:domain know:Thing ; rdfs:range know:Thing .
            [ a kcs:Rule ; kcs:onPredicate know:p ; kcs:atPosition kcs:subject ;
              kcs:implies know:q ] .
        ";
        let (schema, _) =
            OntologySchema::load(&graph(ttl), &SchemaOptions::default()).unwrap();
        assert_eq!(schema.rules(), &[on_subject(know("p"), know("q"), None)]);

        let g = materialize(&graph("_:x know:p _:y ."), &schema).unwrap();
        assert!(g.contains(&Triple::new(blank("x"), know("q"), blank("y").as_term())));
        assert_eq!(g.len(), 2);
    }
}
