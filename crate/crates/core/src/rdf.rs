//! N-Triples ingestion: a streaming line parser, instance discovery, and
//! per-triple classification against a discovered instance set.
//!
//! Ingestion is two-pass by design: pass one scans the stream for `rdf:type`
//! subjects (the instance set), pass two classifies every triple relative to
//! that set. Classification is a total function, so the two passes can be
//! sharded and merged freely once the instance set is fixed.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

/// The `rdf:type` predicate IRI. Triples with this predicate link an
/// instance to its class and never contribute graph edges.
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// A literal value: lexical form plus optional datatype IRI or language tag.
///
/// Literal identity (for deduplication) is exact equality on all three
/// fields; no datatype-aware value comparison is attempted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<String>,
    pub lang: Option<String>,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            lang: None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        for ch in self.lexical.chars() {
            match ch {
                '"' => f.write_str("\\\"")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                '\r' => f.write_str("\\r")?,
                '\t' => f.write_str("\\t")?,
                c if (c as u32) < 0x20 => write!(f, "\\u{:04X}", c as u32)?,
                c => f.write_char(c)?,
            }
        }
        f.write_str("\"")?;
        if let Some(dt) = &self.datatype {
            write!(f, "^^<{dt}>")?;
        } else if let Some(lang) = &self.lang {
            write!(f, "@{lang}")?;
        }
        Ok(())
    }
}

/// An RDF term: an IRI or a literal.
///
/// Blank nodes are kept as IRI-kind terms whose lexical text is the full
/// `_:label` token, so they stay distinct from ordinary IRIs and
/// round-trip through serialization unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(String),
    Literal(Literal),
}

impl Term {
    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            Term::Literal(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(s) => write_iri(f, s),
            Term::Literal(l) => l.fmt(f),
        }
    }
}

fn write_iri(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if s.starts_with("_:") {
        f.write_str(s)
    } else {
        write!(f, "<{s}>")
    }
}

/// One RDF statement. Subject and predicate are IRI strings by
/// construction, so the "subject and predicate are IRI-kind" invariant
/// cannot be violated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<String>, predicate: impl Into<String>, object: Term) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object,
        }
    }

    pub fn is_type_link(&self) -> bool {
        self.predicate == RDF_TYPE
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_iri(f, &self.subject)?;
        f.write_str(" ")?;
        write_iri(f, &self.predicate)?;
        f.write_str(" ")?;
        self.object.fmt(f)?;
        f.write_str(" .")
    }
}

/// Classification of a triple relative to an [`InstanceSet`].
///
/// Every triple maps to exactly one kind:
/// - [`TypeLink`](TripleKind::TypeLink): predicate is `rdf:type`;
/// - [`DatatypeStatement`](TripleKind::DatatypeStatement): literal object,
///   predicate is not `rdf:type`;
/// - [`ObjectEdge`](TripleKind::ObjectEdge): IRI object, both endpoints
///   are instances;
/// - [`DanglingObjectEdge`](TripleKind::DanglingObjectEdge): IRI object,
///   at least one endpoint is not an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TripleKind {
    TypeLink,
    ObjectEdge,
    DatatypeStatement,
    DanglingObjectEdge,
}

/// How the parser reacts to malformed lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// First malformed line aborts the stream with its line number.
    #[default]
    Strict,
    /// Malformed lines are counted and reported, never yielded.
    SkipMalformed,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A malformed line recorded in skip mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

/// Streaming N-Triples parser yielding `(line_number, Triple)` in input
/// order. Line numbers are 1-based. Blank lines and `#` comment lines are
/// skipped silently in both modes.
pub struct NtriplesParser<R> {
    reader: R,
    strictness: Strictness,
    line: usize,
    byte_offset: u64,
    buf: Vec<u8>,
    skipped: Vec<SkippedLine>,
    fused: bool,
}

impl NtriplesParser<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>, strictness: Strictness) -> io::Result<Self> {
        Ok(NtriplesParser::new(
            BufReader::new(File::open(path)?),
            strictness,
        ))
    }
}

/// Parser over an in-memory string.
pub fn parse_ntriples_str(input: &str, strictness: Strictness) -> NtriplesParser<&[u8]> {
    NtriplesParser::new(input.as_bytes(), strictness)
}

impl<R: BufRead> NtriplesParser<R> {
    pub fn new(reader: R, strictness: Strictness) -> Self {
        NtriplesParser {
            reader,
            strictness,
            line: 0,
            byte_offset: 0,
            buf: Vec::new(),
            skipped: Vec::new(),
            fused: false,
        }
    }

    /// Malformed lines seen so far (skip mode only).
    pub fn skipped(&self) -> &[SkippedLine] {
        &self.skipped
    }

    fn reject(&mut self, reason: String) -> Option<Result<(usize, Triple), ParseError>> {
        match self.strictness {
            Strictness::Strict => {
                self.fused = true;
                Some(Err(ParseError::Malformed {
                    line: self.line,
                    reason,
                }))
            }
            Strictness::SkipMalformed => {
                self.skipped.push(SkippedLine {
                    line: self.line,
                    reason,
                });
                None
            }
        }
    }
}

impl<R: BufRead> Iterator for NtriplesParser<R> {
    type Item = Result<(usize, Triple), ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.fused {
            self.buf.clear();
            let line_start = self.byte_offset;
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(n) => self.byte_offset += n as u64,
                Err(e) => {
                    self.fused = true;
                    return Some(Err(ParseError::Io(e)));
                }
            }
            self.line += 1;
            let mut end = self.buf.len();
            while end > 0 && (self.buf[end - 1] == b'\n' || self.buf[end - 1] == b'\r') {
                end -= 1;
            }
            let text = match std::str::from_utf8(&self.buf[..end]) {
                Ok(t) => t,
                Err(e) => {
                    let offset = line_start + e.valid_up_to() as u64;
                    match self.strictness {
                        Strictness::Strict => {
                            self.fused = true;
                            return Some(Err(ParseError::InvalidUtf8 { offset }));
                        }
                        Strictness::SkipMalformed => {
                            self.skipped.push(SkippedLine {
                                line: self.line,
                                reason: "invalid UTF-8".to_owned(),
                            });
                            continue;
                        }
                    }
                }
            };
            match parse_line(text) {
                Ok(Some(triple)) => return Some(Ok((self.line, triple))),
                Ok(None) => continue,
                Err(reason) => match self.reject(reason) {
                    Some(err) => return Some(err),
                    None => continue,
                },
            }
        }
        None
    }
}

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn peek_byte(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn next_char(&mut self) -> Option<char> {
        let ch = self.text[self.pos..].chars().next()?;
        self.pos += ch.len_utf8();
        Some(ch)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek_byte(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, b: u8, what: &str) -> Result<(), String> {
        if self.peek_byte() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected {what}"))
        }
    }

    fn read_hex_char(&mut self, digits: usize) -> Result<char, String> {
        let mut value: u32 = 0;
        for _ in 0..digits {
            let d = self
                .next_char()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| format!("expected {digits} hex digits in unicode escape"))?;
            value = value * 16 + d;
        }
        char::from_u32(value).ok_or_else(|| format!("invalid unicode code point U+{value:X}"))
    }

    fn take_iri(&mut self) -> Result<String, String> {
        self.expect(b'<', "'<'")?;
        let mut out = String::new();
        loop {
            match self.next_char() {
                None => return Err("unterminated IRI".to_owned()),
                Some('>') => break,
                Some('\\') => match self.next_char() {
                    Some('u') => out.push(self.read_hex_char(4)?),
                    Some('U') => out.push(self.read_hex_char(8)?),
                    _ => return Err("invalid escape in IRI (only \\u/\\U allowed)".to_owned()),
                },
                Some(c)
                    if (c as u32) <= 0x20
                        || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') =>
                {
                    return Err(format!("illegal character {c:?} in IRI"));
                }
                Some(c) => out.push(c),
            }
        }
        if out.is_empty() {
            return Err("empty IRI".to_owned());
        }
        Ok(out)
    }

    fn take_blank(&mut self) -> Result<String, String> {
        self.expect(b'_', "'_'")?;
        self.expect(b':', "':' after '_'")?;
        let start = self.pos;
        while let Some(ch) = self.text[self.pos..].chars().next() {
            if ch.is_alphanumeric() || matches!(ch, '_' | '-' | '.') {
                self.pos += ch.len_utf8();
            } else {
                break;
            }
        }
        let mut label = &self.text[start..self.pos];
        // A trailing '.' belongs to the statement terminator, not the label.
        while label.ends_with('.') {
            label = &label[..label.len() - 1];
            self.pos -= 1;
        }
        if label.is_empty() {
            return Err("empty blank node label".to_owned());
        }
        Ok(format!("_:{label}"))
    }

    fn take_literal(&mut self) -> Result<Literal, String> {
        self.expect(b'"', "'\"'")?;
        let mut lexical = String::new();
        loop {
            match self.next_char() {
                None => return Err("unterminated string literal".to_owned()),
                Some('"') => break,
                Some('\\') => match self.next_char() {
                    Some('t') => lexical.push('\t'),
                    Some('b') => lexical.push('\u{8}'),
                    Some('n') => lexical.push('\n'),
                    Some('r') => lexical.push('\r'),
                    Some('f') => lexical.push('\u{C}'),
                    Some('"') => lexical.push('"'),
                    Some('\'') => lexical.push('\''),
                    Some('\\') => lexical.push('\\'),
                    Some('u') => lexical.push(self.read_hex_char(4)?),
                    Some('U') => lexical.push(self.read_hex_char(8)?),
                    other => return Err(format!("invalid string escape {other:?}")),
                },
                Some(c) => lexical.push(c),
            }
        }
        let mut literal = Literal::simple(lexical);
        match self.peek_byte() {
            Some(b'@') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek_byte(), Some(c) if c.is_ascii_alphanumeric() || c == b'-')
                {
                    self.pos += 1;
                }
                let tag = &self.text[start..self.pos];
                if tag.is_empty() || !tag.as_bytes()[0].is_ascii_alphabetic() || tag.ends_with('-')
                {
                    return Err("invalid language tag".to_owned());
                }
                literal.lang = Some(tag.to_owned());
            }
            Some(b'^') => {
                self.pos += 1;
                self.expect(b'^', "'^^' before datatype IRI")?;
                literal.datatype = Some(self.take_iri()?);
            }
            _ => {}
        }
        Ok(literal)
    }
}

/// Parses one physical line. `Ok(None)` means blank or comment.
fn parse_line(text: &str) -> Result<Option<Triple>, String> {
    let mut sc = Scanner { text, pos: 0 };
    sc.skip_ws();
    match sc.peek_byte() {
        None | Some(b'#') => return Ok(None),
        _ => {}
    }
    let subject = match sc.peek_byte() {
        Some(b'<') => sc.take_iri()?,
        Some(b'_') => sc.take_blank()?,
        _ => return Err("expected '<' or '_:' at subject".to_owned()),
    };
    sc.skip_ws();
    if sc.peek_byte() != Some(b'<') {
        return Err("expected '<' at predicate".to_owned());
    }
    let predicate = sc.take_iri()?;
    sc.skip_ws();
    let object = match sc.peek_byte() {
        Some(b'<') => Term::Iri(sc.take_iri()?),
        Some(b'_') => Term::Iri(sc.take_blank()?),
        Some(b'"') => Term::Literal(sc.take_literal()?),
        _ => return Err("expected '<', '_:' or '\"' at object".to_owned()),
    };
    sc.skip_ws();
    sc.expect(b'.', "'.' terminating the statement")?;
    sc.skip_ws();
    match sc.peek_byte() {
        None | Some(b'#') => Ok(Some(Triple {
            subject,
            predicate,
            object,
        })),
        _ => Err("unexpected content after '.'".to_owned()),
    }
}

/// The set of instance IRIs: exactly the subjects of `rdf:type` triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceSet {
    members: HashSet<String>,
}

impl InstanceSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the subject if the triple is a type link. Idempotent.
    pub fn observe(&mut self, triple: &Triple) {
        if triple.is_type_link() && !self.members.contains(&triple.subject) {
            self.members.insert(triple.subject.clone());
        }
    }

    pub fn contains(&self, iri: &str) -> bool {
        self.members.contains(iri)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(String::as_str)
    }
}

/// Collects the instance set from a triple stream. Order-independent;
/// duplicate type triples are harmless.
pub fn scan_instances<'a, I>(triples: I) -> InstanceSet
where
    I: IntoIterator<Item = &'a Triple>,
{
    let mut set = InstanceSet::new();
    for t in triples {
        set.observe(t);
    }
    set
}

/// Classifies a triple relative to the instance set. Total: every triple
/// maps to exactly one [`TripleKind`].
pub fn classify_triple(triple: &Triple, instances: &InstanceSet) -> TripleKind {
    if triple.is_type_link() {
        return TripleKind::TypeLink;
    }
    match &triple.object {
        Term::Literal(_) => TripleKind::DatatypeStatement,
        Term::Iri(object) => {
            if instances.contains(&triple.subject) && instances.contains(object) {
                TripleKind::ObjectEdge
            } else {
                TripleKind::DanglingObjectEdge
            }
        }
    }
}
