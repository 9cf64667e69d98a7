//! Turtle-subset parser and deterministic canonical serializer.
//!
//! Supported grammar: `@prefix` directives, `<absolute-iris>`, prefixed
//! names, the `a` keyword, blank node labels `_:x`, anonymous blank node
//! property lists `[ p o ]`, predicate lists with `;`, object lists with
//! `,`, string literals with optional `@lang` or `^^datatype`, and `#`
//! comments. Out-of-subset constructs (collections, numeric/boolean
//! shorthand, `"""` literals, `@base`) fail loudly with a positioned
//! error instead of being silently dropped.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::graph::{valid_prefix_label, Graph, PrefixMap};
use crate::term::{escape_literal, BlankNode, Iri, Literal, Subject, Term, Triple};
use crate::vocab;

/// Parse or prefix-resolution failure, with source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TurtleError {
    Syntax { line: usize, column: usize, message: String },
    UnknownPrefix { prefix: String, line: usize },
}

impl core::fmt::Display for TurtleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TurtleError::Syntax { line, column, message } => {
                write!(f, "syntax error at line {line}, column {column}: {message}")
            }
            TurtleError::UnknownPrefix { prefix, line } => {
                write!(f, "unknown prefix '{prefix}:' at line {line}")
            }
        }
    }
}

impl core::error::Error for TurtleError {}

/// Parses a document in the supported Turtle subset.
///
/// Prefixes visible to the document are `base_prefixes` overridden by any
/// `@prefix` directives in the text; the returned graph carries that
/// effective map. Whitespace-only or comment-only input yields an empty
/// graph.
pub fn parse_turtle(text: &str, base_prefixes: &PrefixMap) -> Result<Graph, TurtleError> {
    Parser::new(text, base_prefixes).parse()
}

/// Marker prefix for parser-generated anonymous nodes; `\u{1}` can never
/// appear in a user-written label, so markers cannot collide with input.
const ANON_MARK: char = '\u{1}';

struct Parser {
    src: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    prefixes: PrefixMap,
    triples: Vec<Triple>,
    anon_count: usize,
}

impl Parser {
    fn new(text: &str, base_prefixes: &PrefixMap) -> Self {
        Parser {
            src: text.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            prefixes: base_prefixes.clone(),
            triples: Vec::new(),
            anon_count: 0,
        }
    }

    fn parse(mut self) -> Result<Graph, TurtleError> {
        loop {
            self.skip_trivia();
            match self.peek() {
                None => break,
                Some('@') => self.parse_directive()?,
                Some(_) => self.parse_triples_statement()?,
            }
        }
        Ok(self.finish())
    }

    /// Renames anonymous markers to `b0, b1, …` in creation order, skipping
    /// numbers already taken by explicit labels in the document.
    fn finish(self) -> Graph {
        let explicit: BTreeSet<&str> = self
            .triples
            .iter()
            .flat_map(|t| {
                let s = match &t.subject {
                    Subject::Blank(b) => Some(b.label()),
                    Subject::Iri(_) => None,
                };
                let o = match &t.object {
                    Term::Blank(b) => Some(b.label()),
                    _ => None,
                };
                [s, o].into_iter().flatten()
            })
            .filter(|l| !l.starts_with(ANON_MARK))
            .collect();

        let mut rename: BTreeMap<String, BlankNode> = BTreeMap::new();
        let mut next = 0usize;
        for n in 0..self.anon_count {
            let fresh = loop {
                let candidate = format!("b{next}");
                next += 1;
                if !explicit.contains(candidate.as_str()) {
                    break candidate;
                }
            };
            rename.insert(format!("{ANON_MARK}{n}"), BlankNode::new(fresh).expect("bN label"));
        }

        let mut graph = Graph::with_prefixes(self.prefixes);
        for mut t in self.triples {
            if let Subject::Blank(b) = &t.subject {
                if let Some(r) = rename.get(b.label()) {
                    t.subject = Subject::Blank(r.clone());
                }
            }
            if let Term::Blank(b) = &t.object {
                if let Some(r) = rename.get(b.label()) {
                    t.object = Term::Blank(r.clone());
                }
            }
            graph.insert(t);
        }
        graph
    }

    // ---- character machinery ----

    fn peek(&self) -> Option<char> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.src.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, TurtleError> {
        Err(TurtleError::Syntax { line: self.line, column: self.column, message: message.into() })
    }

    fn expect_char(&mut self, want: char, context: &str) -> Result<(), TurtleError> {
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => self.err(format!("expected '{want}' {context}, found '{c}'")),
            None => self.err(format!("expected '{want}' {context}, found end of input")),
        }
    }

    // ---- directives ----

    fn parse_directive(&mut self) -> Result<(), TurtleError> {
        self.expect_char('@', "before directive")?;
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphabetic() {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        match word.as_str() {
            "prefix" => {
                self.skip_trivia();
                let label = self.read_prefix_label()?;
                self.expect_char(':', "after prefix label")?;
                self.skip_trivia();
                if self.peek() != Some('<') {
                    return self.err("expected '<namespace-iri>' in @prefix directive");
                }
                let namespace = self.read_iriref()?;
                self.skip_trivia();
                self.expect_char('.', "after @prefix directive")?;
                self.prefixes.insert(label, namespace.as_str());
                Ok(())
            }
            "base" => self.err("'@base' is not supported; use absolute IRIs"),
            other => self.err(format!("unknown directive '@{other}'")),
        }
    }

    fn read_prefix_label(&mut self) -> Result<String, TurtleError> {
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || matches!(c, '_' | '-') {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if !valid_prefix_label(&label) {
            return self.err(format!("invalid prefix label '{label}'"));
        }
        Ok(label)
    }

    // ---- statements ----

    fn parse_triples_statement(&mut self) -> Result<(), TurtleError> {
        let subject = match self.peek() {
            Some('[') => {
                let subject = self.parse_anon_list()?;
                self.skip_trivia();
                // `[ p o ] .` is a complete statement by itself.
                if self.peek() == Some('.') {
                    self.bump();
                    return Ok(());
                }
                subject
            }
            Some('"') | Some('\'') => return self.err("a literal cannot be the subject of a triple"),
            Some('(') => return self.err("collections '( )' are not supported"),
            Some(_) => self.parse_subject_node()?,
            None => return self.err("expected subject, found end of input"),
        };
        self.parse_predicate_object_list(&subject)?;
        self.skip_trivia();
        self.expect_char('.', "at end of statement")
    }

    fn parse_subject_node(&mut self) -> Result<Subject, TurtleError> {
        match self.peek() {
            Some('<') => Ok(Subject::Iri(self.read_iriref()?)),
            Some('_') => Ok(Subject::Blank(self.read_blank_label()?)),
            Some(c) if c.is_ascii_alphanumeric() || c == ':' => {
                Ok(Subject::Iri(self.read_prefixed_name()?))
            }
            Some(c) => self.err(format!("expected subject, found '{c}'")),
            None => self.err("expected subject, found end of input"),
        }
    }

    fn parse_predicate_object_list(&mut self, subject: &Subject) -> Result<(), TurtleError> {
        loop {
            self.skip_trivia();
            let predicate = self.parse_verb()?;
            self.parse_object_list(subject, &predicate)?;
            self.skip_trivia();
            if self.peek() != Some(';') {
                return Ok(());
            }
            while self.peek() == Some(';') {
                self.bump();
                self.skip_trivia();
            }
            // A trailing ';' before the statement or list terminator is
            // allowed by the grammar.
            if matches!(self.peek(), Some('.') | Some(']') | None) {
                return Ok(());
            }
        }
    }

    fn parse_verb(&mut self) -> Result<Iri, TurtleError> {
        match self.peek() {
            Some('<') => self.read_iriref(),
            Some('a') if !self.is_name_continuation(1) => {
                self.bump();
                Ok(vocab::rdf_type())
            }
            Some(c) if c.is_ascii_alphanumeric() || c == ':' => self.read_prefixed_name(),
            Some('_') => self.err("a blank node cannot be a predicate"),
            Some(c) => self.err(format!("expected predicate, found '{c}'")),
            None => self.err("expected predicate, found end of input"),
        }
    }

    /// True when the character `ahead` positions from here keeps a bare
    /// word going (so `a` is a prefixed-name start, not the keyword).
    fn is_name_continuation(&self, ahead: usize) -> bool {
        matches!(
            self.peek_at(ahead),
            Some(c) if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | ':')
        )
    }

    fn parse_object_list(&mut self, subject: &Subject, predicate: &Iri) -> Result<(), TurtleError> {
        loop {
            self.skip_trivia();
            let object = self.parse_object()?;
            self.triples.push(Triple::new(subject.clone(), predicate.clone(), object));
            self.skip_trivia();
            if self.peek() == Some(',') {
                self.bump();
            } else {
                return Ok(());
            }
        }
    }

    fn parse_object(&mut self) -> Result<Term, TurtleError> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.read_iriref()?)),
            Some('_') => Ok(Term::Blank(self.read_blank_label()?)),
            Some('[') => Ok(self.parse_anon_list()?.as_term()),
            Some('"') => Ok(Term::Literal(self.read_string_literal()?)),
            Some('\'') => self.err("single-quoted literals are not supported; use double quotes"),
            Some('(') => self.err("collections '( )' are not supported"),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => self.err(
                "numeric literal shorthand is not supported; write a quoted literal with a datatype",
            ),
            Some('.') if matches!(self.peek_at(1), Some(d) if d.is_ascii_digit()) => self.err(
                "numeric literal shorthand is not supported; write a quoted literal with a datatype",
            ),
            Some(c) if c.is_ascii_alphabetic() || c == ':' => {
                if self.at_bare_boolean() {
                    return self.err(
                        "boolean literal shorthand is not supported; \
                         write a quoted literal with a datatype",
                    );
                }
                Ok(Term::Iri(self.read_prefixed_name()?))
            }
            Some(c) => self.err(format!("expected object, found '{c}'")),
            None => self.err("expected object, found end of input"),
        }
    }

    /// Looks ahead for a bare `true` / `false` keyword (no following `:`).
    fn at_bare_boolean(&self) -> bool {
        for word in ["true", "false"] {
            let n = word.len();
            let matches_word =
                (0..n).all(|i| self.peek_at(i) == word.chars().nth(i)) && !self.is_name_continuation(n);
            if matches_word {
                return true;
            }
        }
        false
    }

    fn parse_anon_list(&mut self) -> Result<Subject, TurtleError> {
        self.expect_char('[', "before property list")?;
        let node = Subject::Blank(BlankNode::new_unchecked(format!("{ANON_MARK}{}", self.anon_count)));
        self.anon_count += 1;
        self.skip_trivia();
        if self.peek() == Some(']') {
            self.bump();
            return Ok(node);
        }
        self.parse_predicate_object_list(&node)?;
        self.skip_trivia();
        self.expect_char(']', "at end of property list")?;
        Ok(node)
    }

    // ---- terminals ----

    fn read_iriref(&mut self) -> Result<Iri, TurtleError> {
        self.expect_char('<', "before IRI")?;
        let mut iri = String::new();
        loop {
            match self.peek() {
                Some('>') => {
                    self.bump();
                    break;
                }
                Some('\\') => return self.err("backslash escapes are not supported inside IRIs"),
                Some(c) if c.is_whitespace() || c.is_control() || c == '<' || c == '"' => {
                    return self.err(format!("invalid character {c:?} inside IRI"))
                }
                Some(c) => {
                    iri.push(c);
                    self.bump();
                }
                None => return self.err("unterminated IRI, expected '>'"),
            }
        }
        match Iri::new(iri) {
            Ok(iri) => Ok(iri),
            Err(e) => self.err(e.to_string()),
        }
    }

    fn read_blank_label(&mut self) -> Result<BlankNode, TurtleError> {
        self.expect_char('_', "before blank node label")?;
        self.expect_char(':', "after '_' in blank node label")?;
        let label = self.read_dotted_name()?;
        match BlankNode::new(label) {
            Ok(b) => Ok(b),
            Err(e) => self.err(e.to_string()),
        }
    }

    fn read_prefixed_name(&mut self) -> Result<Iri, TurtleError> {
        let start_line = self.line;
        let label = self.read_prefix_label()?;
        if self.peek() != Some(':') {
            return self.err(format!("expected ':' after prefix label '{label}'"));
        }
        self.bump();
        let local = self.read_dotted_name_allow_empty()?;
        let Some(namespace) = self.prefixes.get(&label) else {
            return Err(TurtleError::UnknownPrefix { prefix: label, line: start_line });
        };
        match Iri::new(format!("{namespace}{local}")) {
            Ok(iri) => Ok(iri),
            Err(e) => self.err(e.to_string()),
        }
    }

    /// Reads a name in `[A-Za-z0-9_][A-Za-z0-9_.-]*`; a `.` is only taken
    /// when another name character follows, so statement-terminating dots
    /// stay in the stream (`know:x.` parses as `know:x` then `.`).
    fn read_dotted_name(&mut self) -> Result<String, TurtleError> {
        let name = self.read_dotted_name_allow_empty()?;
        if name.is_empty() {
            return self.err("expected a name character");
        }
        Ok(name)
    }

    fn read_dotted_name_allow_empty(&mut self) -> Result<String, TurtleError> {
        let mut name = String::new();
        while let Some(c) = self.peek() {
            let take = match c {
                c if c.is_ascii_alphanumeric() || c == '_' || c == '-' => true,
                '.' => self.is_name_continuation(1) || self.peek_at(1) == Some('.'),
                _ => false,
            };
            if !take {
                break;
            }
            name.push(c);
            self.bump();
        }
        Ok(name)
    }

    fn read_string_literal(&mut self) -> Result<Literal, TurtleError> {
        self.expect_char('"', "before string literal")?;
        if self.peek() == Some('"') && self.peek_at(1) == Some('"') {
            return self.err("multi-line '\"\"\"' literals are not supported");
        }
        let mut lexical = String::new();
        loop {
            match self.peek() {
                Some('"') => {
                    self.bump();
                    break;
                }
                Some('\\') => {
                    self.bump();
                    lexical.push(self.read_escape()?);
                }
                Some('\n') | Some('\r') => {
                    return self.err("unterminated string literal (raw newline)")
                }
                Some(c) => {
                    lexical.push(c);
                    self.bump();
                }
                None => return self.err("unterminated string literal"),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let tag = self.read_language_tag()?;
                match Literal::with_language(lexical, tag) {
                    Ok(lit) => Ok(lit),
                    Err(e) => self.err(e.to_string()),
                }
            }
            Some('^') => {
                self.bump();
                self.expect_char('^', "in '^^' datatype marker")?;
                let datatype = match self.peek() {
                    Some('<') => self.read_iriref()?,
                    Some(c) if c.is_ascii_alphanumeric() || c == ':' => self.read_prefixed_name()?,
                    _ => return self.err("expected datatype IRI after '^^'"),
                };
                Ok(Literal::typed(lexical, datatype))
            }
            _ => Ok(Literal::plain(lexical)),
        }
    }

    fn read_escape(&mut self) -> Result<char, TurtleError> {
        let Some(c) = self.bump() else {
            return self.err("unterminated escape sequence");
        };
        match c {
            't' => Ok('\t'),
            'b' => Ok('\u{8}'),
            'n' => Ok('\n'),
            'r' => Ok('\r'),
            'f' => Ok('\u{c}'),
            '"' => Ok('"'),
            '\'' => Ok('\''),
            '\\' => Ok('\\'),
            'u' => self.read_hex_escape(4),
            'U' => self.read_hex_escape(8),
            other => self.err(format!("invalid escape sequence '\\{other}'")),
        }
    }

    fn read_hex_escape(&mut self, digits: usize) -> Result<char, TurtleError> {
        let mut value: u32 = 0;
        for _ in 0..digits {
            let Some(c) = self.peek() else {
                return self.err("unterminated unicode escape");
            };
            let Some(d) = c.to_digit(16) else {
                return self.err(format!("invalid hex digit '{c}' in unicode escape"));
            };
            value = value * 16 + d;
            self.bump();
        }
        match char::from_u32(value) {
            Some(c) => Ok(c),
            None => self.err(format!("U+{value:04X} is not a valid character")),
        }
    }

    fn read_language_tag(&mut self) -> Result<String, TurtleError> {
        let mut tag = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphabetic() || (c == '-' && !tag.is_empty()) || (c.is_ascii_digit() && tag.contains('-')) {
                tag.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if tag.is_empty() {
            return self.err("expected language tag after '@'");
        }
        Ok(tag)
    }
}

// ---- serialization ----

/// Serializes a graph to the deterministic canonical form.
///
/// Subjects are sorted lexicographically by serialized form, predicates are
/// grouped with `;` (also sorted), objects grouped with `,` (sorted);
/// `rdf:type` renders as `a`. One `@prefix` line is emitted per *used*
/// prefix, in label order. The empty graph serializes to the empty string.
/// Equal graphs serialized with equal prefix maps yield byte-identical
/// output, and `parse_turtle(serialize_turtle(g, m), _) == g`.
pub fn serialize_turtle(graph: &Graph, prefix_map: &PrefixMap) -> String {
    if graph.is_empty() {
        return String::new();
    }

    let mut used: BTreeSet<String> = BTreeSet::new();
    // subject-rendered -> predicate-rendered -> object-rendered
    let mut blocks: BTreeMap<String, BTreeMap<String, BTreeSet<String>>> = BTreeMap::new();
    for t in graph.iter() {
        let s = render_subject(&t.subject, prefix_map, &mut used);
        let p = if t.predicate == vocab::rdf_type() {
            "a".to_string()
        } else {
            render_iri(&t.predicate, prefix_map, &mut used)
        };
        let o = render_term(&t.object, prefix_map, &mut used);
        blocks.entry(s).or_default().entry(p).or_default().insert(o);
    }

    let mut out = String::new();
    for label in &used {
        let namespace = prefix_map.get(label).expect("used prefix is bound");
        out.push_str("@prefix ");
        out.push_str(label);
        out.push_str(": <");
        out.push_str(namespace);
        out.push_str("> .\n");
    }
    if !used.is_empty() {
        out.push('\n');
    }

    for (subject, predicates) in &blocks {
        out.push_str(subject);
        let mut first_predicate = true;
        for (predicate, objects) in predicates {
            if first_predicate {
                out.push(' ');
                first_predicate = false;
            } else {
                out.push_str(" ;\n    ");
            }
            out.push_str(predicate);
            out.push(' ');
            let mut first_object = true;
            for object in objects {
                if first_object {
                    first_object = false;
                } else {
                    out.push_str(" ,\n        ");
                }
                out.push_str(object);
            }
        }
        out.push_str(" .\n");
    }
    out
}

fn render_iri(iri: &Iri, prefix_map: &PrefixMap, used: &mut BTreeSet<String>) -> String {
    match prefix_map.abbreviate(iri) {
        Some((label, local)) => {
            used.insert(label.clone());
            format!("{label}:{local}")
        }
        None => format!("<{}>", iri.as_str()),
    }
}

fn render_subject(subject: &Subject, prefix_map: &PrefixMap, used: &mut BTreeSet<String>) -> String {
    match subject {
        Subject::Iri(iri) => render_iri(iri, prefix_map, used),
        Subject::Blank(b) => format!("_:{}", b.label()),
    }
}

fn render_term(term: &Term, prefix_map: &PrefixMap, used: &mut BTreeSet<String>) -> String {
    match term {
        Term::Iri(iri) => render_iri(iri, prefix_map, used),
        Term::Blank(b) => format!("_:{}", b.label()),
        Term::Literal(lit) => {
            let mut s = String::with_capacity(lit.lexical().len() + 2);
            s.push('"');
            s.push_str(&escape_literal(lit.lexical()));
            s.push('"');
            if let Some(tag) = lit.language() {
                s.push('@');
                s.push_str(tag);
            } else if let Some(dt) = lit.datatype() {
                s.push_str("^^");
                s.push_str(&render_iri(dt, prefix_map, used));
            }
            s
        }
    }
}
