//! Mapping triples to ontology concept tags, the unit of dataset quotas
//! and per-concept evaluation breakdowns.

use alloc::string::{String, ToString};

use crate::schema::OntologySchema;
use crate::term::{Term, Triple};
use crate::vocab;

/// Tag for triples outside the schema's concept vocabulary.
pub const CONCEPT_NONE: &str = "none";

/// The concept tag of a triple under `schema`.
///
/// - `rdf:type` with the name property's domain class as object (the
///   "person" class) → that class's lowercased local name;
/// - the name data property → its local name (`name`);
/// - any schema property → its local name (`father`, `knows`, …);
/// - everything else → [`CONCEPT_NONE`].
pub fn concept_of(triple: &Triple, schema: &OntologySchema) -> String {
    if triple.predicate == vocab::rdf_type() {
        if let Term::Iri(class) = &triple.object {
            let person_class = schema
                .data_property(schema.name_property())
                .map(|def| &def.domain);
            if person_class == Some(class) {
                return class.local_name().to_lowercase();
            }
        }
        return CONCEPT_NONE.to_string();
    }
    if schema.is_property(&triple.predicate) {
        return triple.predicate.local_name().to_string();
    }
    CONCEPT_NONE.to_string()
}
