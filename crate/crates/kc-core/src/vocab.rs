//! Well-known namespaces, vocabulary IRIs, and the bundled default schema.

use crate::graph::PrefixMap;
use crate::term::Iri;

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL_NS: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";

/// Default namespace for the personal-knowledge ontology.
pub const KNOW_NS: &str = "https://know.dev/";
/// Namespace for schema-configuration vocabulary (implication rules etc.).
pub const KCS_NS: &str = "urn:kc:schema:";
/// Namespace for canonical (name-keyed) person IRIs.
pub const PERSON_NS: &str = "urn:kc:person:";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
pub const RDFS_SUBPROPERTY_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";

pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
pub const OWL_SYMMETRIC_PROPERTY: &str = "http://www.w3.org/2002/07/owl#SymmetricProperty";
pub const OWL_FUNCTIONAL_PROPERTY: &str = "http://www.w3.org/2002/07/owl#FunctionalProperty";
pub const OWL_NAMED_INDIVIDUAL: &str = "http://www.w3.org/2002/07/owl#NamedIndividual";
pub const OWL_INVERSE_OF: &str = "http://www.w3.org/2002/07/owl#inverseOf";

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_DATE: &str = "http://www.w3.org/2001/XMLSchema#date";
pub const XSD_DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
pub const XSD_ANY_URI: &str = "http://www.w3.org/2001/XMLSchema#anyURI";

/// Datatypes accepted for data properties.
pub const RECOGNIZED_DATATYPES: &[&str] = &[
    XSD_STRING,
    XSD_INTEGER,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_DATE,
    XSD_DATE_TIME,
    XSD_ANY_URI,
];

// Schema-configuration vocabulary (rule triples and the name-property pin).
pub const KCS_RULE: &str = "urn:kc:schema:Rule";
pub const KCS_ON_PREDICATE: &str = "urn:kc:schema:onPredicate";
pub const KCS_AT_POSITION: &str = "urn:kc:schema:atPosition";
pub const KCS_POSITION_SUBJECT: &str = "urn:kc:schema:subject";
pub const KCS_POSITION_OBJECT: &str = "urn:kc:schema:object";
pub const KCS_IMPLIES: &str = "urn:kc:schema:implies";
pub const KCS_WITH_OBJECT: &str = "urn:kc:schema:withObject";
pub const KCS_NAME_PROPERTY: &str = "urn:kc:schema:nameProperty";

/// Canonical IRI for the first-person subject of a prompt.
pub const PERSON_ME: &str = "urn:kc:person:me";

/// The bundled default schema: the core family subset with 4 classes,
/// 11 object properties, and 1 data property.
pub const DEFAULT_SCHEMA_TTL: &str = include_str!("../assets/know-family.ttl");

/// Prefix bindings assumed when parsing model responses, corpus ground
/// truth, and schema files that do not declare their own.
pub fn default_prefixes() -> PrefixMap {
    let mut map = PrefixMap::new();
    map.insert("rdf", RDF_NS);
    map.insert("rdfs", RDFS_NS);
    map.insert("owl", OWL_NS);
    map.insert("xsd", XSD_NS);
    map.insert("know", KNOW_NS);
    map.insert("kcs", KCS_NS);
    map.insert("person", PERSON_NS);
    map
}

pub fn rdf_type() -> Iri {
    Iri::new(RDF_TYPE).expect("constant IRI")
}

pub(crate) fn iri(s: &str) -> Iri {
    Iri::new(s).expect("constant IRI")
}
