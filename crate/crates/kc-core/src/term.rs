//! RDF terms: IRIs, blank nodes, literals, and triples.

use alloc::string::String;
use core::fmt;

use crate::vocab;

/// Error raised when constructing a term from an invalid lexical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermError {
    /// IRI was empty or contained whitespace/control characters.
    InvalidIri(String),
    /// Blank node label does not match `[A-Za-z0-9_][A-Za-z0-9_.-]*` (no trailing dot).
    InvalidBlankLabel(String),
    /// Language tag does not match `[A-Za-z]+(-[A-Za-z0-9]+)*`.
    InvalidLanguageTag(String),
}

impl fmt::Display for TermError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermError::InvalidIri(s) => write!(f, "invalid IRI: {s:?}"),
            TermError::InvalidBlankLabel(s) => write!(f, "invalid blank node label: {s:?}"),
            TermError::InvalidLanguageTag(s) => write!(f, "invalid language tag: {s:?}"),
        }
    }
}

impl core::error::Error for TermError {}

/// An absolute IRI. Guaranteed non-empty and free of whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(iri: impl Into<String>) -> Result<Self, TermError> {
        let iri = iri.into();
        // The excluded characters are the ones that cannot appear inside a
        // `<...>` reference, so every accepted IRI serializes losslessly.
        if iri.is_empty()
            || iri
                .chars()
                .any(|c| c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '\\'))
        {
            return Err(TermError::InvalidIri(iri));
        }
        Ok(Iri(iri))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Text after the last `/`, `#`, or `:`, used as the human-facing name
    /// of a property or class (`https://know.dev/sister` -> `sister`).
    pub fn local_name(&self) -> &str {
        match self.0.rfind(['/', '#', ':']) {
            Some(i) => &self.0[i + 1..],
            None => &self.0,
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// A blank node identified by its label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        if !valid_blank_label(&label) {
            return Err(TermError::InvalidBlankLabel(label));
        }
        Ok(BlankNode(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }

    /// Parser-internal constructor for placeholder labels that are renamed
    /// to valid `bN` labels before a graph is returned. Must never be used
    /// with a label that could escape the parser.
    pub(crate) fn new_unchecked(label: String) -> Self {
        BlankNode(label)
    }
}

impl fmt::Display for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:{}", self.0)
    }
}

pub(crate) fn valid_blank_label(label: &str) -> bool {
    let mut chars = label.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !(first.is_ascii_alphanumeric() || first == '_') {
        return false;
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')) {
        return false;
    }
    // A trailing dot would be eaten by the statement terminator on re-parse.
    !label.ends_with('.')
}

/// A literal: lexical form plus at most one of a language tag or a datatype.
///
/// An explicit `xsd:string` datatype is normalized away at construction, so
/// `"x"` and `"x"^^xsd:string` compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    language: Option<String>,
    datatype: Option<Iri>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), language: None, datatype: None }
    }

    pub fn with_language(
        lexical: impl Into<String>,
        tag: impl Into<String>,
    ) -> Result<Self, TermError> {
        let tag = tag.into();
        if !valid_language_tag(&tag) {
            return Err(TermError::InvalidLanguageTag(tag));
        }
        Ok(Literal { lexical: lexical.into(), language: Some(tag), datatype: None })
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        let datatype =
            if datatype.as_str() == vocab::XSD_STRING { None } else { Some(datatype) };
        Literal { lexical: lexical.into(), language: None, datatype }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    /// Explicit datatype, if any. Plain literals report `None` and are
    /// understood as `xsd:string`.
    pub fn datatype(&self) -> Option<&Iri> {
        self.datatype.as_ref()
    }
}

fn valid_language_tag(tag: &str) -> bool {
    !tag.is_empty()
        && tag.split('-').enumerate().all(|(i, part)| {
            !part.is_empty()
                && part.chars().all(|c| {
                    if i == 0 {
                        c.is_ascii_alphabetic()
                    } else {
                        c.is_ascii_alphanumeric()
                    }
                })
        })
}

/// Any RDF term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Blank(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Result<Self, TermError> {
        Ok(Term::Iri(Iri::new(iri)?))
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        Ok(Term::Blank(BlankNode::new(label)?))
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::plain(lexical))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<BlankNode> for Term {
    fn from(node: BlankNode) -> Self {
        Term::Blank(node)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

/// A term allowed in subject position: an IRI or a blank node, never a literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Iri(Iri),
    Blank(BlankNode),
}

impl Subject {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Subject::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_term(&self) -> Term {
        match self {
            Subject::Iri(iri) => Term::Iri(iri.clone()),
            Subject::Blank(b) => Term::Blank(b.clone()),
        }
    }

    /// Converts an object term into a subject, refusing literals.
    pub fn from_term(term: &Term) -> Option<Subject> {
        match term {
            Term::Iri(iri) => Some(Subject::Iri(iri.clone())),
            Term::Blank(b) => Some(Subject::Blank(b.clone())),
            Term::Literal(_) => None,
        }
    }
}

impl From<Iri> for Subject {
    fn from(iri: Iri) -> Self {
        Subject::Iri(iri)
    }
}

impl From<BlankNode> for Subject {
    fn from(node: BlankNode) -> Self {
        Subject::Blank(node)
    }
}

/// One subject-predicate-object statement. The predicate is always an IRI
/// and the subject is never a literal; both invariants are structural.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Subject,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Subject>, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple { subject: subject.into(), predicate, object: object.into() }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// Escapes a lexical form for a double-quoted Turtle string.
pub(crate) fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if c.is_control() => {
                use fmt::Write;
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", escape_literal(&self.lexical))?;
        if let Some(tag) = self.language() {
            write!(f, "@{tag}")?;
        } else if let Some(dt) = self.datatype() {
            write!(f, "^^{dt}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => iri.fmt(f),
            Term::Blank(b) => b.fmt(f),
            Term::Literal(lit) => lit.fmt(f),
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Iri(iri) => iri.fmt(f),
            Subject::Blank(b) => b.fmt(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_rejects_whitespace_and_empty() {
        assert!(Iri::new("").is_err());
        assert!(Iri::new("http://a b").is_err());
        assert!(Iri::new("urn:with\ttab").is_err());
        assert!(Iri::new("https://know.dev/name").is_ok());
    }

    #[test]
    fn blank_label_rules() {
        assert!(BlankNode::new("b0").is_ok());
        assert!(BlankNode::new("p.q-r_2").is_ok());
        assert!(BlankNode::new("").is_err());
        assert!(BlankNode::new("-x").is_err());
        assert!(BlankNode::new("x.").is_err());
        assert!(BlankNode::new("x y").is_err());
    }

    #[test]
    fn xsd_string_datatype_normalizes_to_plain() {
        let dt = Iri::new(vocab::XSD_STRING).unwrap();
        assert_eq!(Literal::typed("hi", dt), Literal::plain("hi"));
        let int = Iri::new(vocab::XSD_INTEGER).unwrap();
        assert_ne!(Literal::typed("1", int), Literal::plain("1"));
    }

    #[test]
    fn language_tag_validation() {
        assert!(Literal::with_language("hej", "sv").is_ok());
        assert!(Literal::with_language("hi", "en-GB").is_ok());
        assert!(Literal::with_language("x", "").is_err());
        assert!(Literal::with_language("x", "9en").is_err());
    }

    #[test]
    fn local_name_extraction() {
        assert_eq!(Iri::new("https://know.dev/sister").unwrap().local_name(), "sister");
        assert_eq!(
            Iri::new("http://www.w3.org/1999/02/22-rdf-syntax-ns#type").unwrap().local_name(),
            "type"
        );
        assert_eq!(Iri::new("urn:kc:person:alice").unwrap().local_name(), "alice");
    }

    #[test]
    fn subject_refuses_literal() {
        assert!(Subject::from_term(&Term::literal("x")).is_none());
        assert!(Subject::from_term(&Term::iri("urn:a").unwrap()).is_some());
    }
}
