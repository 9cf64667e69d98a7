//! Ontology schema loading: the OWL-lite axiom subset plus implication
//! rules, parsed from a schema graph into an immutable [`OntologySchema`].
//!
//! The schema is data, not code: the bundled family ontology ships as a
//! Turtle file and alternative schemas can be loaded from disk without any
//! code change. Loading is total over the axiom vocabulary — every triple
//! of the input either affects the schema or is returned in the ignored
//! list, so nothing is dropped silently.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::hash::fnv1a64;
use crate::term::{Iri, Subject, Term, Triple};
use crate::turtle::serialize_turtle;
use crate::vocab;

/// Definition of an object property (IRI-valued).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectPropertyDef {
    pub iri: Iri,
    pub domain: Iri,
    pub range: Iri,
    pub symmetric: bool,
    pub functional: bool,
    pub inverse_of: Option<Iri>,
    pub subproperty_of: Option<Iri>,
}

/// Definition of a data property (literal-valued).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPropertyDef {
    pub iri: Iri,
    pub domain: Iri,
    pub datatype: Iri,
    pub functional: bool,
}

/// Which end of a matched triple receives the implied triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RulePosition {
    Subject,
    Object,
}

/// `(x, on_predicate, y)` implies `(node, implies, object)`, where `node`
/// is `x` or `y` according to [`RulePosition`] and `object` is the fixed
/// term if given, otherwise the other end of the matched triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicationRule {
    pub on_predicate: Iri,
    pub position: RulePosition,
    pub implies: Iri,
    pub fixed_object: Option<Term>,
}

/// Rule matching on the subject end: `(x, p, y) ⇒ (x, implies, o)`.
pub fn on_subject(on_predicate: Iri, implies: Iri, fixed_object: Option<Term>) -> ImplicationRule {
    ImplicationRule { on_predicate, position: RulePosition::Subject, implies, fixed_object }
}

/// Rule matching on the object end: `(x, p, y) ⇒ (y, implies, o)`.
pub fn on_object(on_predicate: Iri, implies: Iri, fixed_object: Option<Term>) -> ImplicationRule {
    ImplicationRule { on_predicate, position: RulePosition::Object, implies, fixed_object }
}

/// Loader configuration knobs.
#[derive(Debug, Clone)]
pub struct SchemaOptions {
    /// Permit a property to be both functional and symmetric. Off by
    /// default: the combination forces `x = y` for every `(x, p, y)` and
    /// almost always indicates a schema mistake.
    pub allow_symmetric_functional: bool,
}

impl Default for SchemaOptions {
    fn default() -> Self {
        SchemaOptions { allow_symmetric_functional: false }
    }
}

/// Schema rejection reasons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaError {
    /// A domain/range/subclass reference points at an IRI that is not a
    /// declared class: (property-or-class, referenced-iri).
    NotAClass(Iri, Iri),
    SubpropertyCycle(Iri),
    SubclassCycle(Iri),
    /// p declares inverse q, but q declares a different inverse r.
    InconsistentInverse { property: Iri, declared: Iri, conflicting: Iri },
    MissingDomain(Iri),
    MissingRange(Iri),
    /// More than one value for a single-valued axiom: (subject, axiom name).
    ConflictingAxiom(Iri, &'static str),
    SymmetricFunctional(Iri),
    /// A subPropertyOf / inverseOf reference to an undeclared or
    /// wrong-kind property: (property, referenced-iri).
    NotAProperty(Iri, Iri),
    UnrecognizedDatatype { property: Iri, datatype: Iri },
    /// An implication rule references a predicate missing from the schema.
    RulePredicateUnknown(Iri),
    MalformedRule(String),
    /// A named individual with no resolvable class.
    IndividualWithoutClass(Iri),
    /// No data property to serve as the name key.
    MissingNameProperty,
    /// Multiple data properties and no explicit `nameProperty` pin.
    AmbiguousNameProperty,
    /// An axiom triple with an unusable term (e.g. literal domain).
    MalformedAxiom(String),
}

impl core::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SchemaError::NotAClass(owner, iri) => {
                write!(f, "{owner} references {iri}, which is not a declared class")
            }
            SchemaError::SubpropertyCycle(p) => {
                write!(f, "subPropertyOf cycle through {p}")
            }
            SchemaError::SubclassCycle(c) => write!(f, "subClassOf cycle through {c}"),
            SchemaError::InconsistentInverse { property, declared, conflicting } => write!(
                f,
                "inconsistent inverses: {property} declares inverse {declared}, \
                 but {declared} declares inverse {conflicting}"
            ),
            SchemaError::MissingDomain(p) => write!(f, "property {p} has no rdfs:domain"),
            SchemaError::MissingRange(p) => write!(f, "property {p} has no rdfs:range"),
            SchemaError::ConflictingAxiom(s, axiom) => {
                write!(f, "{s} has more than one {axiom}")
            }
            SchemaError::SymmetricFunctional(p) => write!(
                f,
                "{p} is both functional and symmetric; this forces x = y for every (x, {p}, y)"
            ),
            SchemaError::NotAProperty(owner, iri) => {
                write!(f, "{owner} references {iri}, which is not a declared property of the same kind")
            }
            SchemaError::UnrecognizedDatatype { property, datatype } => {
                write!(f, "data property {property} has unrecognized datatype {datatype}")
            }
            SchemaError::RulePredicateUnknown(p) => {
                write!(f, "implication rule references unknown predicate {p}")
            }
            SchemaError::MalformedRule(msg) => write!(f, "malformed implication rule: {msg}"),
            SchemaError::IndividualWithoutClass(i) => {
                write!(f, "named individual {i} has no resolvable class")
            }
            SchemaError::MissingNameProperty => {
                write!(f, "schema declares no data property usable as the name key")
            }
            SchemaError::AmbiguousNameProperty => write!(
                f,
                "multiple data properties but no explicit nameProperty configuration"
            ),
            SchemaError::MalformedAxiom(msg) => write!(f, "malformed axiom: {msg}"),
        }
    }
}

impl core::error::Error for SchemaError {}

/// An immutable, validated ontology schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologySchema {
    classes: BTreeSet<Iri>,
    subclass_of: BTreeMap<Iri, BTreeSet<Iri>>,
    object_properties: BTreeMap<Iri, ObjectPropertyDef>,
    data_properties: BTreeMap<Iri, DataPropertyDef>,
    individuals: BTreeMap<Iri, Iri>,
    rules: Vec<ImplicationRule>,
    name_property: Iri,
    fingerprint: u64,
}

impl OntologySchema {
    /// Loads and validates a schema with explicit options. Returns the
    /// schema together with the input triples that did not contribute to
    /// it (comments, labels, unrelated vocabulary).
    pub fn load(
        graph: &Graph,
        options: &SchemaOptions,
    ) -> Result<(OntologySchema, Vec<Triple>), SchemaError> {
        Loader::new(graph, options).run()
    }

    /// The bundled default family schema.
    pub fn bundled() -> OntologySchema {
        let graph = crate::turtle::parse_turtle(vocab::DEFAULT_SCHEMA_TTL, &vocab::default_prefixes())
            .expect("bundled schema parses");
        let (schema, _) = load_schema(&graph).expect("bundled schema loads");
        schema
    }

    pub fn classes(&self) -> &BTreeSet<Iri> {
        &self.classes
    }

    pub fn is_class(&self, iri: &Iri) -> bool {
        self.classes.contains(iri)
    }

    pub fn object_properties(&self) -> &BTreeMap<Iri, ObjectPropertyDef> {
        &self.object_properties
    }

    pub fn object_property(&self, iri: &Iri) -> Option<&ObjectPropertyDef> {
        self.object_properties.get(iri)
    }

    pub fn data_properties(&self) -> &BTreeMap<Iri, DataPropertyDef> {
        &self.data_properties
    }

    pub fn data_property(&self, iri: &Iri) -> Option<&DataPropertyDef> {
        self.data_properties.get(iri)
    }

    pub fn is_property(&self, iri: &Iri) -> bool {
        self.object_properties.contains_key(iri) || self.data_properties.contains_key(iri)
    }

    pub fn individuals(&self) -> &BTreeMap<Iri, Iri> {
        &self.individuals
    }

    /// The class of a named individual, if `iri` is one.
    pub fn individual_class(&self, iri: &Iri) -> Option<&Iri> {
        self.individuals.get(iri)
    }

    pub fn rules(&self) -> &[ImplicationRule] {
        &self.rules
    }

    /// The data property whose literal is an entity's name key.
    pub fn name_property(&self) -> &Iri {
        &self.name_property
    }

    /// FNV-1a 64 hash of the canonical serialization of the schema graph,
    /// echoed into evaluation reports so runs pin the schema they used.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// `class` and all its (transitive) superclasses.
    pub fn superclass_closure(&self, class: &Iri) -> BTreeSet<Iri> {
        let mut out = BTreeSet::new();
        let mut stack = alloc::vec![class.clone()];
        while let Some(c) = stack.pop() {
            if !out.insert(c.clone()) {
                continue;
            }
            if let Some(parents) = self.subclass_of.get(&c) {
                stack.extend(parents.iter().cloned());
            }
        }
        out
    }

    /// Reflexive-transitive subclass test.
    pub fn is_subclass_of(&self, class: &Iri, ancestor: &Iri) -> bool {
        self.superclass_closure(class).contains(ancestor)
    }
}

/// Loads a schema graph with default options.
pub fn load_schema(graph: &Graph) -> Result<(OntologySchema, Vec<Triple>), SchemaError> {
    OntologySchema::load(graph, &SchemaOptions::default())
}

struct Loader<'a> {
    graph: &'a Graph,
    options: &'a SchemaOptions,
    consumed: BTreeSet<Triple>,
    // Declarations discovered in the type pass.
    classes: BTreeSet<Iri>,
    object_props: BTreeSet<Iri>,
    data_props: BTreeSet<Iri>,
    symmetric: BTreeSet<Iri>,
    functional: BTreeSet<Iri>,
    individual_nodes: BTreeSet<Iri>,
    rule_nodes: BTreeSet<Subject>,
    // Non-meta rdf:type assertions (subject, class) for individuals.
    class_assertions: BTreeMap<Iri, BTreeSet<Iri>>,
}

impl<'a> Loader<'a> {
    fn new(graph: &'a Graph, options: &'a SchemaOptions) -> Self {
        Loader {
            graph,
            options,
            consumed: BTreeSet::new(),
            classes: BTreeSet::new(),
            object_props: BTreeSet::new(),
            data_props: BTreeSet::new(),
            symmetric: BTreeSet::new(),
            functional: BTreeSet::new(),
            individual_nodes: BTreeSet::new(),
            rule_nodes: BTreeSet::new(),
            class_assertions: BTreeMap::new(),
        }
    }

    fn run(mut self) -> Result<(OntologySchema, Vec<Triple>), SchemaError> {
        self.collect_declarations();
        let (subclass_of, class_assertion_triples) = self.collect_class_axioms()?;
        check_acyclic(&subclass_of, SchemaError::SubclassCycle)?;

        let mut object_properties = self.collect_object_properties(&subclass_of)?;
        self.complete_inverses(&mut object_properties)?;
        let data_properties = self.collect_data_properties()?;
        let individuals = self.resolve_individuals(&class_assertion_triples)?;
        let rules = self.collect_rules(&object_properties, &data_properties)?;
        let name_property = self.resolve_name_property(&data_properties)?;

        let subprop_edges: BTreeMap<Iri, BTreeSet<Iri>> = object_properties
            .values()
            .filter_map(|d| {
                d.subproperty_of
                    .as_ref()
                    .map(|p| (d.iri.clone(), BTreeSet::from([p.clone()])))
            })
            .collect();
        check_acyclic(&subprop_edges, SchemaError::SubpropertyCycle)?;

        if !self.options.allow_symmetric_functional {
            for def in object_properties.values() {
                if def.symmetric && def.functional {
                    return Err(SchemaError::SymmetricFunctional(def.iri.clone()));
                }
            }
        }

        let fingerprint = fnv1a64(serialize_turtle(self.graph, self.graph.prefixes()).as_bytes());
        let schema = OntologySchema {
            classes: self.classes.clone(),
            subclass_of,
            object_properties,
            data_properties,
            individuals,
            rules,
            name_property,
            fingerprint,
        };
        let ignored =
            self.graph.iter().filter(|t| !self.consumed.contains(t)).cloned().collect();
        Ok((schema, ignored))
    }

    fn collect_declarations(&mut self) {
        let rdf_type = vocab::rdf_type();
        for t in self.graph.iter() {
            if t.predicate != rdf_type {
                continue;
            }
            let Term::Iri(type_iri) = &t.object else { continue };
            match (&t.subject, type_iri.as_str()) {
                (Subject::Iri(s), vocab::OWL_CLASS) => {
                    self.classes.insert(s.clone());
                    self.consume(t);
                }
                (Subject::Iri(s), vocab::OWL_OBJECT_PROPERTY) => {
                    self.object_props.insert(s.clone());
                    self.consume(t);
                }
                (Subject::Iri(s), vocab::OWL_DATATYPE_PROPERTY) => {
                    self.data_props.insert(s.clone());
                    self.consume(t);
                }
                (Subject::Iri(s), vocab::OWL_SYMMETRIC_PROPERTY) => {
                    self.symmetric.insert(s.clone());
                    self.consume(t);
                }
                (Subject::Iri(s), vocab::OWL_FUNCTIONAL_PROPERTY) => {
                    self.functional.insert(s.clone());
                    self.consume(t);
                }
                (Subject::Iri(s), vocab::OWL_NAMED_INDIVIDUAL) => {
                    self.individual_nodes.insert(s.clone());
                    self.consume(t);
                }
                (subject, vocab::KCS_RULE) => {
                    self.rule_nodes.insert(subject.clone());
                    self.consume(t);
                }
                (Subject::Iri(s), _) => {
                    self.class_assertions
                        .entry(s.clone())
                        .or_default()
                        .insert(type_iri.clone());
                    // Consumed only if it ends up classifying an individual;
                    // decided in resolve_individuals.
                }
                (Subject::Blank(_), _) => {}
            }
        }
    }

    fn consume(&mut self, t: &Triple) {
        self.consumed.insert(t.clone());
    }

    /// Gathers rdfs:subClassOf edges; returns (edges, class-assertion
    /// triples by subject) for later consumption decisions.
    fn collect_class_axioms(
        &mut self,
    ) -> Result<(BTreeMap<Iri, BTreeSet<Iri>>, BTreeMap<Iri, Vec<Triple>>), SchemaError> {
        let mut subclass_of: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
        let subclass = vocab::iri(vocab::RDFS_SUBCLASS_OF);
        let mut to_consume = Vec::new();
        for t in self.graph.iter() {
            if t.predicate != subclass {
                continue;
            }
            let Subject::Iri(child) = &t.subject else { continue };
            if !self.classes.contains(child) {
                continue;
            }
            let Term::Iri(parent) = &t.object else {
                return Err(SchemaError::MalformedAxiom(format!(
                    "subClassOf object of {child} must be an IRI"
                )));
            };
            if !self.classes.contains(parent) {
                return Err(SchemaError::NotAClass(child.clone(), parent.clone()));
            }
            subclass_of.entry(child.clone()).or_default().insert(parent.clone());
            to_consume.push(t.clone());
        }
        for t in to_consume {
            self.consumed.insert(t);
        }

        let rdf_type = vocab::rdf_type();
        let mut assertions: BTreeMap<Iri, Vec<Triple>> = BTreeMap::new();
        for t in self.graph.iter() {
            if t.predicate != rdf_type {
                continue;
            }
            let Subject::Iri(s) = &t.subject else { continue };
            let Term::Iri(o) = &t.object else { continue };
            if self.classes.contains(o) {
                assertions.entry(s.clone()).or_default().push(t.clone());
            }
        }
        Ok((subclass_of, assertions))
    }

    fn single_iri_axiom(
        &mut self,
        subject: &Iri,
        predicate: &Iri,
        axiom: &'static str,
    ) -> Result<Option<Iri>, SchemaError> {
        let mut found: Option<Iri> = None;
        let mut to_consume = Vec::new();
        for t in self.graph.iter() {
            if &t.predicate != predicate {
                continue;
            }
            let Subject::Iri(s) = &t.subject else { continue };
            if s != subject {
                continue;
            }
            let Term::Iri(o) = &t.object else {
                return Err(SchemaError::MalformedAxiom(format!(
                    "{axiom} of {subject} must be an IRI"
                )));
            };
            match &found {
                Some(prev) if prev != o => {
                    return Err(SchemaError::ConflictingAxiom(subject.clone(), axiom))
                }
                _ => found = Some(o.clone()),
            }
            to_consume.push(t.clone());
        }
        for t in to_consume {
            self.consumed.insert(t);
        }
        Ok(found)
    }

    fn collect_object_properties(
        &mut self,
        _subclass_of: &BTreeMap<Iri, BTreeSet<Iri>>,
    ) -> Result<BTreeMap<Iri, ObjectPropertyDef>, SchemaError> {
        let domain_p = vocab::iri(vocab::RDFS_DOMAIN);
        let range_p = vocab::iri(vocab::RDFS_RANGE);
        let subprop_p = vocab::iri(vocab::RDFS_SUBPROPERTY_OF);
        let inverse_p = vocab::iri(vocab::OWL_INVERSE_OF);

        let props: Vec<Iri> = self.object_props.iter().cloned().collect();
        let mut out = BTreeMap::new();
        for p in props {
            let domain = self
                .single_iri_axiom(&p, &domain_p, "rdfs:domain")?
                .ok_or_else(|| SchemaError::MissingDomain(p.clone()))?;
            let range = self
                .single_iri_axiom(&p, &range_p, "rdfs:range")?
                .ok_or_else(|| SchemaError::MissingRange(p.clone()))?;
            if !self.classes.contains(&domain) {
                return Err(SchemaError::NotAClass(p.clone(), domain));
            }
            if !self.classes.contains(&range) {
                return Err(SchemaError::NotAClass(p.clone(), range));
            }
            let subproperty_of = self.single_iri_axiom(&p, &subprop_p, "rdfs:subPropertyOf")?;
            if let Some(parent) = &subproperty_of {
                if !self.object_props.contains(parent) {
                    return Err(SchemaError::NotAProperty(p.clone(), parent.clone()));
                }
            }
            let inverse_of = self.single_iri_axiom(&p, &inverse_p, "owl:inverseOf")?;
            if let Some(inv) = &inverse_of {
                if !self.object_props.contains(inv) {
                    return Err(SchemaError::NotAProperty(p.clone(), inv.clone()));
                }
            }
            out.insert(
                p.clone(),
                ObjectPropertyDef {
                    iri: p.clone(),
                    domain,
                    range,
                    symmetric: self.symmetric.contains(&p),
                    functional: self.functional.contains(&p),
                    inverse_of,
                    subproperty_of,
                },
            );
        }
        Ok(out)
    }

    /// Fills in undeclared inverse directions and rejects inconsistent
    /// declarations, so `inverse(inverse(p)) == p` always holds.
    fn complete_inverses(
        &mut self,
        props: &mut BTreeMap<Iri, ObjectPropertyDef>,
    ) -> Result<(), SchemaError> {
        let declared: Vec<(Iri, Iri)> = props
            .values()
            .filter_map(|d| d.inverse_of.as_ref().map(|q| (d.iri.clone(), q.clone())))
            .collect();
        for (p, q) in declared {
            let q_inverse = props.get(&q).and_then(|d| d.inverse_of.clone());
            match q_inverse {
                None => {
                    props.get_mut(&q).expect("declared property").inverse_of = Some(p.clone());
                }
                Some(r) if r == p => {}
                Some(r) => {
                    return Err(SchemaError::InconsistentInverse {
                        property: p,
                        declared: q,
                        conflicting: r,
                    })
                }
            }
        }
        Ok(())
    }

    fn collect_data_properties(&mut self) -> Result<BTreeMap<Iri, DataPropertyDef>, SchemaError> {
        let domain_p = vocab::iri(vocab::RDFS_DOMAIN);
        let range_p = vocab::iri(vocab::RDFS_RANGE);
        let props: Vec<Iri> = self.data_props.iter().cloned().collect();
        let mut out = BTreeMap::new();
        for p in props {
            let domain = self
                .single_iri_axiom(&p, &domain_p, "rdfs:domain")?
                .ok_or_else(|| SchemaError::MissingDomain(p.clone()))?;
            if !self.classes.contains(&domain) {
                return Err(SchemaError::NotAClass(p.clone(), domain));
            }
            let datatype = self
                .single_iri_axiom(&p, &range_p, "rdfs:range")?
                .unwrap_or_else(|| vocab::iri(vocab::XSD_STRING));
            if !vocab::RECOGNIZED_DATATYPES.contains(&datatype.as_str()) {
                return Err(SchemaError::UnrecognizedDatatype { property: p, datatype });
            }
            out.insert(
                p.clone(),
                DataPropertyDef {
                    iri: p.clone(),
                    domain,
                    datatype,
                    functional: self.functional.contains(&p),
                },
            );
        }
        Ok(out)
    }

    /// Assigns each named individual its class: the smallest asserted
    /// class if any, otherwise the individual itself when it is also
    /// declared as a class (punning, used for Male/Female).
    fn resolve_individuals(
        &mut self,
        class_assertions: &BTreeMap<Iri, Vec<Triple>>,
    ) -> Result<BTreeMap<Iri, Iri>, SchemaError> {
        let mut out = BTreeMap::new();
        for node in self.individual_nodes.clone() {
            if let Some(asserted) = self.class_assertions.get(&node) {
                let class = asserted.iter().find(|c| self.classes.contains(c)).cloned();
                if let Some(class) = class {
                    if let Some(triples) = class_assertions.get(&node) {
                        for t in triples {
                            self.consumed.insert(t.clone());
                        }
                    }
                    out.insert(node, class);
                    continue;
                }
            }
            if self.classes.contains(&node) {
                out.insert(node.clone(), node);
                continue;
            }
            return Err(SchemaError::IndividualWithoutClass(node));
        }
        Ok(out)
    }

    fn collect_rules(
        &mut self,
        object_properties: &BTreeMap<Iri, ObjectPropertyDef>,
        data_properties: &BTreeMap<Iri, DataPropertyDef>,
    ) -> Result<Vec<ImplicationRule>, SchemaError> {
        let on_predicate_p = vocab::iri(vocab::KCS_ON_PREDICATE);
        let at_position_p = vocab::iri(vocab::KCS_AT_POSITION);
        let implies_p = vocab::iri(vocab::KCS_IMPLIES);
        let with_object_p = vocab::iri(vocab::KCS_WITH_OBJECT);

        let known = |iri: &Iri| {
            object_properties.contains_key(iri) || data_properties.contains_key(iri)
        };

        let mut rules = Vec::new();
        for node in self.rule_nodes.clone() {
            let mut on_predicate = None;
            let mut position = None;
            let mut implies = None;
            let mut fixed_object = None;
            let mut to_consume = Vec::new();
            for t in self.graph.iter() {
                if t.subject != node {
                    continue;
                }
                if t.predicate == on_predicate_p {
                    let Term::Iri(o) = &t.object else {
                        return Err(SchemaError::MalformedRule("onPredicate must be an IRI".into()));
                    };
                    on_predicate = Some(o.clone());
                } else if t.predicate == at_position_p {
                    let Term::Iri(o) = &t.object else {
                        return Err(SchemaError::MalformedRule("atPosition must be an IRI".into()));
                    };
                    position = Some(match o.as_str() {
                        vocab::KCS_POSITION_SUBJECT => RulePosition::Subject,
                        vocab::KCS_POSITION_OBJECT => RulePosition::Object,
                        other => {
                            return Err(SchemaError::MalformedRule(format!(
                                "atPosition must be kcs:subject or kcs:object, found {other}"
                            )))
                        }
                    });
                } else if t.predicate == implies_p {
                    let Term::Iri(o) = &t.object else {
                        return Err(SchemaError::MalformedRule("implies must be an IRI".into()));
                    };
                    implies = Some(o.clone());
                } else if t.predicate == with_object_p {
                    if matches!(t.object, Term::Blank(_)) {
                        return Err(SchemaError::MalformedRule(
                            "withObject must be an IRI or literal".into(),
                        ));
                    }
                    fixed_object = Some(t.object.clone());
                } else {
                    continue;
                }
                to_consume.push(t.clone());
            }
            for t in to_consume {
                self.consumed.insert(t);
            }

            let on_predicate = on_predicate
                .ok_or_else(|| SchemaError::MalformedRule("rule missing onPredicate".into()))?;
            let position = position
                .ok_or_else(|| SchemaError::MalformedRule("rule missing atPosition".into()))?;
            let implies =
                implies.ok_or_else(|| SchemaError::MalformedRule("rule missing implies".into()))?;
            if !known(&on_predicate) {
                return Err(SchemaError::RulePredicateUnknown(on_predicate));
            }
            if !known(&implies) {
                return Err(SchemaError::RulePredicateUnknown(implies));
            }
            rules.push(ImplicationRule { on_predicate, position, implies, fixed_object });
        }
        Ok(rules)
    }

    fn resolve_name_property(
        &mut self,
        data_properties: &BTreeMap<Iri, DataPropertyDef>,
    ) -> Result<Iri, SchemaError> {
        let name_property_p = vocab::iri(vocab::KCS_NAME_PROPERTY);
        let mut explicit: Option<Iri> = None;
        let mut to_consume = Vec::new();
        for t in self.graph.iter() {
            if t.predicate != name_property_p {
                continue;
            }
            let Term::Iri(o) = &t.object else {
                return Err(SchemaError::MalformedAxiom("nameProperty must be an IRI".into()));
            };
            match &explicit {
                Some(prev) if prev != o => {
                    return Err(SchemaError::AmbiguousNameProperty);
                }
                _ => explicit = Some(o.clone()),
            }
            to_consume.push(t.clone());
        }
        for t in to_consume {
            self.consumed.insert(t);
        }
        if let Some(p) = explicit {
            if !data_properties.contains_key(&p) {
                return Err(SchemaError::NotAProperty(p.clone(), p));
            }
            return Ok(p);
        }
        let mut iter = data_properties.keys();
        match (iter.next(), iter.next()) {
            (Some(only), None) => Ok(only.clone()),
            (None, _) => Err(SchemaError::MissingNameProperty),
            (Some(_), Some(_)) => Err(SchemaError::AmbiguousNameProperty),
        }
    }
}

/// Rejects cycles in a parent-edge relation, reporting a node on the cycle.
fn check_acyclic(
    edges: &BTreeMap<Iri, BTreeSet<Iri>>,
    make_error: impl Fn(Iri) -> SchemaError,
) -> Result<(), SchemaError> {
    for start in edges.keys() {
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![start.clone()];
        while let Some(node) = stack.pop() {
            if node == *start && !seen.is_empty() {
                return Err(make_error(start.clone()));
            }
            if !seen.insert(node.clone()) {
                continue;
            }
            if let Some(parents) = edges.get(&node) {
                stack.extend(parents.iter().cloned());
            }
        }
    }
    Ok(())
}
