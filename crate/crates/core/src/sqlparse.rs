//! Restricted star-join SQL: parsing, indexable-attribute extraction, and the
//! binary query-attribute matrix.
//!
//! Grammar: `SELECT <list> FROM <table [alias], ...> [WHERE <conjunction>]
//! [GROUP BY <attrs>]`. Predicates are `A.x = B.y` (join), `A.x <op> literal`,
//! and `A.x IN (v1, ..., vk)`. The select list is opaque; only Where and
//! Group-by feed extraction. Everything outside the grammar is an unknown
//! construct: a hard error normally, a recorded skip in lenient mode.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::Bits;
use crate::catalog::{JoinEdge, SchemaCatalog, TableStats};

/// `Table.attribute` with the table resolved from any alias.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct QualifiedAttribute {
    pub table: String,
    pub attribute: String,
}

impl fmt::Display for QualifiedAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.table, self.attribute)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RestrictionOp {
    Eq,
    In,
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
}

impl fmt::Display for RestrictionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RestrictionOp::Eq => "=",
            RestrictionOp::In => "IN",
            RestrictionOp::Lt => "<",
            RestrictionOp::Le => "<=",
            RestrictionOp::Gt => ">",
            RestrictionOp::Ge => ">=",
            RestrictionOp::Ne => "<>",
        };
        f.write_str(s)
    }
}

/// Restriction literal. Numbers keep their source text so emission is exact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Literal {
    Number(String),
    Str(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(n) => f.write_str(n),
            Literal::Str(s) => write!(f, "'{}'", s.replace('\'', "''")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    /// Equi-join between two qualified attributes.
    Join {
        left: QualifiedAttribute,
        right: QualifiedAttribute,
    },
    /// Attribute versus literal(s); `values` has one entry unless op is IN.
    Restriction {
        attribute: QualifiedAttribute,
        op: RestrictionOp,
        values: Vec<Literal>,
    },
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Join { left, right } => write!(f, "{left} = {right}"),
            Predicate::Restriction {
                attribute,
                op: RestrictionOp::In,
                values,
            } => {
                write!(f, "{attribute} IN (")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            Predicate::Restriction {
                attribute,
                op,
                values,
            } => write!(f, "{attribute} {op} {}", &values[0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub id: u32,
    pub tables: BTreeSet<String>,
    pub predicates: Vec<Predicate>,
    pub group_by: Vec<QualifiedAttribute>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    /// Malformed statement; never recoverable.
    Syntax {
        statement: usize,
        offset: usize,
        message: String,
    },
    /// Well-formed SQL outside the restricted grammar; skippable in lenient mode.
    UnknownConstruct {
        statement: usize,
        offset: usize,
        construct: String,
    },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax {
                statement,
                offset,
                message,
            } => write!(f, "statement {statement}, offset {offset}: {message}"),
            ParseError::UnknownConstruct {
                statement,
                offset,
                construct,
            } => write!(
                f,
                "statement {statement}, offset {offset}: unsupported construct: {construct}"
            ),
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedStatement {
    pub statement: usize,
    pub offset: usize,
    pub construct: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LenientParse {
    pub queries: Vec<Query>,
    pub skipped: Vec<SkippedStatement>,
}

/// Parses a workload; any statement outside the grammar is an error.
pub fn parse_workload(text: &str) -> Result<Vec<Query>, ParseError> {
    parse_inner(text, false).map(|l| l.queries)
}

/// Parses a workload, skipping statements with unsupported constructs.
/// Syntax errors (malformed statements) still fail.
pub fn parse_workload_lenient(text: &str) -> Result<LenientParse, ParseError> {
    parse_inner(text, true)
}

fn parse_inner(text: &str, lenient: bool) -> Result<LenientParse, ParseError> {
    let mut queries = Vec::new();
    let mut skipped = Vec::new();
    for (stmt_no, stmt_text) in split_statements(text) {
        match parse_statement(stmt_no, &stmt_text) {
            Ok(parts) => {
                queries.push(Query {
                    id: queries.len() as u32 + 1,
                    tables: parts.tables,
                    predicates: parts.predicates,
                    group_by: parts.group_by,
                    text: stmt_text.trim().to_string(),
                });
            }
            Err(err @ ParseError::Syntax { .. }) => return Err(err),
            Err(ParseError::UnknownConstruct {
                statement,
                offset,
                construct,
            }) => {
                if lenient {
                    skipped.push(SkippedStatement {
                        statement,
                        offset,
                        construct,
                    });
                } else {
                    return Err(ParseError::UnknownConstruct {
                        statement,
                        offset,
                        construct,
                    });
                }
            }
        }
    }
    Ok(LenientParse { queries, skipped })
}

/// Renders a query back into the restricted grammar. Tables are emitted in
/// set order and the select list as `*`; predicates and group-by survive
/// verbatim, so parsing the emission reproduces the query's structure.
pub fn emit_sql(q: &Query) -> String {
    let mut out = String::from("SELECT * FROM ");
    for (i, t) in q.tables.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(t);
    }
    if !q.predicates.is_empty() {
        out.push_str(" WHERE ");
        for (i, p) in q.predicates.iter().enumerate() {
            if i > 0 {
                out.push_str(" AND ");
            }
            out.push_str(&format!("{p}"));
        }
    }
    if !q.group_by.is_empty() {
        out.push_str(" GROUP BY ");
        for (i, a) in q.group_by.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!("{a}"));
        }
    }
    out.push(';');
    out
}

// ---------------------------------------------------------------------------
// Statement splitting and lexing
// ---------------------------------------------------------------------------

/// Splits on top-level semicolons, blanking `--` comments character-for-
/// character so token offsets stay aligned with the statement text.
fn split_statements(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut chars = text.chars().peekable();
    let mut in_string = false;
    while let Some(c) = chars.next() {
        if in_string {
            buf.push(c);
            if c == '\'' {
                if chars.peek() == Some(&'\'') {
                    buf.push(chars.next().unwrap());
                } else {
                    in_string = false;
                }
            }
            continue;
        }
        match c {
            '\'' => {
                in_string = true;
                buf.push(c);
            }
            '-' if chars.peek() == Some(&'-') => {
                buf.push(' ');
                for c in chars.by_ref() {
                    if c == '\n' {
                        buf.push('\n');
                        break;
                    }
                    buf.push(' ');
                }
            }
            ';' => {
                if !buf.trim().is_empty() {
                    out.push((out.len() + 1, core::mem::take(&mut buf)));
                } else {
                    buf.clear();
                }
            }
            _ => buf.push(c),
        }
    }
    if !buf.trim().is_empty() {
        out.push((out.len() + 1, buf));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Punct(char),
    Op(&'static str),
    Other(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(stmt: &str, stmt_no: usize) -> Result<Vec<Token>, ParseError> {
    let bytes = stmt.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            toks.push(Token {
                tok: Tok::Ident(stmt[start..i].to_string()),
                offset: start,
            });
        } else if c.is_ascii_digit()
            || (c == '-' && i + 1 < bytes.len() && (bytes[i + 1] as char).is_ascii_digit())
        {
            i += 1;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            toks.push(Token {
                tok: Tok::Number(stmt[start..i].to_string()),
                offset: start,
            });
        } else if c == '\'' {
            i += 1;
            let mut content = String::new();
            loop {
                if i >= bytes.len() {
                    return Err(ParseError::Syntax {
                        statement: stmt_no,
                        offset: start,
                        message: String::from("unterminated string literal"),
                    });
                }
                if bytes[i] == b'\'' {
                    if i + 1 < bytes.len() && bytes[i + 1] == b'\'' {
                        content.push('\'');
                        i += 2;
                    } else {
                        i += 1;
                        break;
                    }
                } else {
                    let ch_start = i;
                    i += 1;
                    while i < bytes.len() && (bytes[i] & 0xC0) == 0x80 {
                        i += 1;
                    }
                    content.push_str(&stmt[ch_start..i]);
                }
            }
            toks.push(Token {
                tok: Tok::Str(content),
                offset: start,
            });
        } else {
            i += 1;
            let tok = match c {
                ',' | '(' | ')' | '.' => Tok::Punct(c),
                '=' => Tok::Op("="),
                '<' => {
                    if i < bytes.len() && bytes[i] == b'=' {
                        i += 1;
                        Tok::Op("<=")
                    } else if i < bytes.len() && bytes[i] == b'>' {
                        i += 1;
                        Tok::Op("<>")
                    } else {
                        Tok::Op("<")
                    }
                }
                '>' => {
                    if i < bytes.len() && bytes[i] == b'=' {
                        i += 1;
                        Tok::Op(">=")
                    } else {
                        Tok::Op(">")
                    }
                }
                '!' => {
                    if i < bytes.len() && bytes[i] == b'=' {
                        i += 1;
                        Tok::Op("<>")
                    } else {
                        Tok::Other('!')
                    }
                }
                other => Tok::Other(other),
            };
            toks.push(Token { tok, offset: start });
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

const RESERVED: &[&str] = &[
    "select", "from", "where", "and", "or", "not", "group", "by", "in", "as", "between", "like",
    "is", "having", "order", "join", "inner", "left", "right", "full", "outer", "cross", "on",
    "union", "exists", "null", "distinct",
];

fn is_reserved(ident: &str) -> bool {
    RESERVED.iter().any(|k| ident.eq_ignore_ascii_case(k))
}

fn kw_eq(ident: &str, kw: &str) -> bool {
    ident.eq_ignore_ascii_case(kw)
}

struct ParsedStatement {
    tables: BTreeSet<String>,
    predicates: Vec<Predicate>,
    group_by: Vec<QualifiedAttribute>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    stmt_no: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) => Some(s),
            _ => None,
        }
    }

    fn offset(&self) -> usize {
        self.peek().map(|t| t.offset).unwrap_or(self.end)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, offset: usize, message: &str) -> ParseError {
        ParseError::Syntax {
            statement: self.stmt_no,
            offset,
            message: message.to_string(),
        }
    }

    fn unknown(&self, offset: usize, construct: &str) -> ParseError {
        ParseError::UnknownConstruct {
            statement: self.stmt_no,
            offset,
            construct: construct.to_string(),
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if *p == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek_ident(), Some(s) if kw_eq(s, kw)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// A name-position identifier: reserved words are not names.
    fn expect_name(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let offset = self.offset();
        match self.advance() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) if !is_reserved(&s) => Ok((s, offset)),
            _ => Err(self.syntax(offset, &format!("expected {what}"))),
        }
    }

    fn parse_colref(
        &mut self,
        aliases: &BTreeMap<String, String>,
    ) -> Result<QualifiedAttribute, ParseError> {
        let (qualifier, q_off) = self.expect_name("column reference")?;
        if !self.eat_punct('.') {
            return Err(self.unknown(q_off, "unqualified column reference"));
        }
        let (attribute, _) = self.expect_name("attribute name")?;
        let table = aliases
            .get(&qualifier)
            .ok_or_else(|| self.syntax(q_off, &format!("unknown table or alias '{qualifier}'")))?;
        Ok(QualifiedAttribute {
            table: table.clone(),
            attribute,
        })
    }

    fn parse_literal(&mut self) -> Result<Literal, ParseError> {
        let offset = self.offset();
        match self.advance() {
            Some(Token {
                tok: Tok::Number(n),
                ..
            }) => Ok(Literal::Number(n)),
            Some(Token { tok: Tok::Str(s), .. }) => Ok(Literal::Str(s)),
            _ => Err(self.syntax(offset, "expected literal value")),
        }
    }

    fn parse_predicate(
        &mut self,
        aliases: &BTreeMap<String, String>,
    ) -> Result<Predicate, ParseError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Punct('('),
                offset,
                ..
            }) => return Err(self.unknown(*offset, "parenthesized predicate")),
            Some(Token {
                tok: Tok::Ident(s),
                offset,
            }) if kw_eq(s, "not") => return Err(self.unknown(*offset, "NOT")),
            Some(Token {
                tok: Tok::Ident(s),
                offset,
            }) if kw_eq(s, "exists") => return Err(self.unknown(*offset, "EXISTS")),
            _ => {}
        }
        let attribute = self.parse_colref(aliases)?;
        let op_offset = self.offset();
        match self.advance() {
            Some(Token { tok: Tok::Op("="), .. }) => match self.peek() {
                Some(Token {
                    tok: Tok::Ident(_), ..
                }) => {
                    let right = self.parse_colref(aliases)?;
                    Ok(Predicate::Join {
                        left: attribute,
                        right,
                    })
                }
                Some(Token {
                    tok: Tok::Number(_) | Tok::Str(_),
                    ..
                }) => Ok(Predicate::Restriction {
                    attribute,
                    op: RestrictionOp::Eq,
                    values: vec![self.parse_literal()?],
                }),
                Some(Token {
                    tok: Tok::Punct('('),
                    offset,
                }) => Err(self.unknown(*offset, "expression on predicate right-hand side")),
                _ => Err(self.syntax(self.offset(), "expected column reference or literal")),
            },
            Some(Token { tok: Tok::Op(op), .. }) => {
                let op = match op {
                    "<" => RestrictionOp::Lt,
                    "<=" => RestrictionOp::Le,
                    ">" => RestrictionOp::Gt,
                    ">=" => RestrictionOp::Ge,
                    "<>" => RestrictionOp::Ne,
                    _ => return Err(self.syntax(op_offset, "unexpected operator")),
                };
                match self.peek() {
                    Some(Token {
                        tok: Tok::Ident(_),
                        offset,
                    }) => Err(self.unknown(*offset, "non-equi join predicate")),
                    _ => Ok(Predicate::Restriction {
                        attribute,
                        op,
                        values: vec![self.parse_literal()?],
                    }),
                }
            }
            Some(Token {
                tok: Tok::Ident(s),
                offset,
            }) if kw_eq(&s, "in") => {
                if !self.eat_punct('(') {
                    return Err(self.syntax(self.offset(), "expected '(' after IN"));
                }
                if matches!(self.peek_ident(), Some(id) if kw_eq(id, "select")) {
                    return Err(self.unknown(self.offset(), "subquery"));
                }
                let mut values = vec![self.parse_literal()?];
                while self.eat_punct(',') {
                    values.push(self.parse_literal()?);
                }
                if !self.eat_punct(')') {
                    return Err(self.syntax(self.offset(), "expected ')' closing IN list"));
                }
                let _ = offset;
                Ok(Predicate::Restriction {
                    attribute,
                    op: RestrictionOp::In,
                    values,
                })
            }
            Some(Token {
                tok: Tok::Ident(s),
                offset,
            }) if kw_eq(&s, "between") => Err(self.unknown(offset, "BETWEEN")),
            Some(Token {
                tok: Tok::Ident(s),
                offset,
            }) if kw_eq(&s, "like") => Err(self.unknown(offset, "LIKE")),
            Some(Token {
                tok: Tok::Ident(s),
                offset,
            }) if kw_eq(&s, "is") => Err(self.unknown(offset, "IS")),
            _ => Err(self.syntax(op_offset, "expected predicate operator")),
        }
    }
}

fn parse_statement(stmt_no: usize, text: &str) -> Result<ParsedStatement, ParseError> {
    let toks = lex(text, stmt_no)?;
    let mut p = Parser {
        toks,
        pos: 0,
        stmt_no,
        end: text.len(),
    };

    if !p.eat_kw("select") {
        return Err(p.syntax(p.offset(), "expected SELECT"));
    }

    // The select list is opaque: skip to the top-level FROM.
    let select_start = p.pos;
    let mut depth = 0usize;
    loop {
        match p.peek() {
            None => return Err(p.syntax(p.end, "missing FROM clause")),
            Some(Token {
                tok: Tok::Punct('('),
                ..
            }) => depth += 1,
            Some(Token {
                tok: Tok::Punct(')'),
                ..
            }) => depth = depth.saturating_sub(1),
            Some(Token {
                tok: Tok::Ident(s), ..
            }) if depth == 0 && kw_eq(s, "from") => break,
            _ => {}
        }
        p.pos += 1;
    }
    if p.pos == select_start {
        return Err(p.syntax(p.offset(), "empty select list"));
    }
    p.pos += 1; // consume FROM

    // Table references with optional aliases.
    let mut aliases: BTreeMap<String, String> = BTreeMap::new();
    let mut tables: BTreeSet<String> = BTreeSet::new();
    loop {
        if matches!(p.peek(), Some(Token { tok: Tok::Punct('('), .. })) {
            return Err(p.unknown(p.offset(), "subquery in FROM"));
        }
        match p.peek_ident() {
            Some(s) if is_join_keyword(s) => {
                return Err(p.unknown(p.offset(), "explicit JOIN syntax"))
            }
            _ => {}
        }
        let (table, t_off) = p.expect_name("table name")?;
        let mut alias: Option<String> = None;
        if p.eat_kw("as") {
            alias = Some(p.expect_name("alias")?.0);
        } else if matches!(p.peek_ident(), Some(s) if !is_reserved(s)) {
            alias = Some(p.advance().map(|t| match t.tok {
                Tok::Ident(s) => s,
                _ => unreachable!(),
            }).unwrap());
        } else if matches!(p.peek_ident(), Some(s) if is_join_keyword(s)) {
            return Err(p.unknown(p.offset(), "explicit JOIN syntax"));
        }
        if let Some(a) = alias {
            if aliases.insert(a.clone(), table.clone()).is_some() {
                return Err(p.syntax(t_off, &format!("duplicate table alias '{a}'")));
            }
        }
        match aliases.get(&table).cloned() {
            Some(existing) if existing != table => {
                return Err(p.syntax(t_off, &format!("alias '{table}' conflicts with table name")))
            }
            Some(_) => {}
            None => {
                aliases.insert(table.clone(), table.clone());
            }
        }
        tables.insert(table);
        if !p.eat_punct(',') {
            break;
        }
    }

    // WHERE: a conjunction of predicates.
    let mut predicates = Vec::new();
    if p.eat_kw("where") {
        predicates.push(p.parse_predicate(&aliases)?);
        loop {
            if p.eat_kw("and") {
                predicates.push(p.parse_predicate(&aliases)?);
            } else if matches!(p.peek_ident(), Some(s) if kw_eq(s, "or")) {
                return Err(p.unknown(p.offset(), "OR"));
            } else {
                break;
            }
        }
    }

    // GROUP BY.
    let mut group_by = Vec::new();
    if p.eat_kw("group") {
        if !p.eat_kw("by") {
            return Err(p.syntax(p.offset(), "expected BY after GROUP"));
        }
        group_by.push(p.parse_colref(&aliases)?);
        while p.eat_punct(',') {
            group_by.push(p.parse_colref(&aliases)?);
        }
    }

    match p.peek() {
        None => {}
        Some(Token {
            tok: Tok::Ident(s),
            offset,
        }) if kw_eq(s, "having") => return Err(p.unknown(*offset, "HAVING")),
        Some(Token {
            tok: Tok::Ident(s),
            offset,
        }) if kw_eq(s, "order") => return Err(p.unknown(*offset, "ORDER BY")),
        Some(Token {
            tok: Tok::Ident(s),
            offset,
        }) if kw_eq(s, "union") => return Err(p.unknown(*offset, "UNION")),
        Some(t) => {
            let off = t.offset;
            return Err(p.syntax(off, "unexpected trailing tokens"));
        }
    }

    Ok(ParsedStatement {
        tables,
        predicates,
        group_by,
    })
}

fn is_join_keyword(s: &str) -> bool {
    ["join", "inner", "left", "right", "full", "outer", "cross"]
        .iter()
        .any(|k| kw_eq(s, k))
}

// ---------------------------------------------------------------------------
// Analysis: validated view of a query against the catalog
// ---------------------------------------------------------------------------

/// How a query restricts one attribute; drives the bitmap-count estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestrictionKind {
    Equality,
    /// IN-list with this many values.
    Membership(usize),
    /// One-sided comparison (<, <=, >, >=).
    Range,
    /// Not-equal.
    Exclusion,
}

impl RestrictionKind {
    /// Lower ranks are more selective; merging keeps the lowest.
    fn rank(self) -> u8 {
        match self {
            RestrictionKind::Equality => 0,
            RestrictionKind::Membership(_) => 1,
            RestrictionKind::Range => 2,
            RestrictionKind::Exclusion => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyzeOptions {
    /// Include both sides of each star join in the indexable set. The
    /// alternative reading (keys supplied by metadata at candidate time)
    /// is selected by turning this off.
    pub include_join_keys: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            include_join_keys: true,
        }
    }
}

/// A query validated against the catalog: its star joins, restriction kinds,
/// group-by attributes, and the extracted indexable set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryProfile {
    pub id: u32,
    pub joins: BTreeSet<JoinEdge>,
    pub restrictions: BTreeMap<QualifiedAttribute, RestrictionKind>,
    pub group_by: BTreeSet<QualifiedAttribute>,
    pub indexable: BTreeSet<QualifiedAttribute>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnalyzeError {
    /// Known table, unknown attribute: a workload/catalog mismatch.
    UnknownAttribute {
        query: u32,
        attribute: QualifiedAttribute,
    },
    /// Equi-join that is not fact-foreign-key = dimension-primary-key.
    UnsupportedJoin {
        query: u32,
        left: QualifiedAttribute,
        right: QualifiedAttribute,
    },
}

impl fmt::Display for AnalyzeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyzeError::UnknownAttribute { query, attribute } => write!(
                f,
                "query {query}: attribute '{attribute}' not found in its table"
            ),
            AnalyzeError::UnsupportedJoin { query, left, right } => write!(
                f,
                "query {query}: join {left} = {right} does not relate a fact foreign key to a dimension primary key"
            ),
        }
    }
}

impl core::error::Error for AnalyzeError {}

fn check_attribute(
    query: u32,
    table: &TableStats,
    attr: &QualifiedAttribute,
) -> Result<(), AnalyzeError> {
    if table.attribute(&attr.attribute).is_none() {
        return Err(AnalyzeError::UnknownAttribute {
            query,
            attribute: attr.clone(),
        });
    }
    Ok(())
}

/// Validates one query against the catalog. References to tables the catalog
/// does not know are excluded; attributes missing from known tables and
/// non-star joins are errors (the latter skippable by lenient callers).
pub fn analyze_query(
    q: &Query,
    cat: &SchemaCatalog,
    opts: &AnalyzeOptions,
) -> Result<QueryProfile, AnalyzeError> {
    let mut joins = BTreeSet::new();
    let mut restrictions: BTreeMap<QualifiedAttribute, RestrictionKind> = BTreeMap::new();
    let mut group_by = BTreeSet::new();

    for pred in &q.predicates {
        match pred {
            Predicate::Join { left, right } => {
                let (lt, rt) = (cat.table(&left.table), cat.table(&right.table));
                if let Some(t) = lt {
                    check_attribute(q.id, t, left)?;
                }
                if let Some(t) = rt {
                    check_attribute(q.id, t, right)?;
                }
                if lt.is_none() || rt.is_none() {
                    continue;
                }
                let edge = star_edge(cat, left, right).ok_or_else(|| {
                    AnalyzeError::UnsupportedJoin {
                        query: q.id,
                        left: left.clone(),
                        right: right.clone(),
                    }
                })?;
                joins.insert(edge);
            }
            Predicate::Restriction {
                attribute,
                op,
                values,
            } => {
                let table = match cat.table(&attribute.table) {
                    Some(t) => t,
                    None => continue,
                };
                check_attribute(q.id, table, attribute)?;
                let kind = match op {
                    RestrictionOp::Eq => RestrictionKind::Equality,
                    RestrictionOp::In => RestrictionKind::Membership(values.len()),
                    RestrictionOp::Ne => RestrictionKind::Exclusion,
                    _ => RestrictionKind::Range,
                };
                merge_restriction(&mut restrictions, attribute.clone(), kind);
            }
        }
    }

    for attr in &q.group_by {
        let table = match cat.table(&attr.table) {
            Some(t) => t,
            None => continue,
        };
        check_attribute(q.id, table, attr)?;
        group_by.insert(attr.clone());
    }

    let mut indexable: BTreeSet<QualifiedAttribute> = BTreeSet::new();
    indexable.extend(restrictions.keys().cloned());
    indexable.extend(group_by.iter().cloned());
    if opts.include_join_keys {
        for edge in &joins {
            indexable.insert(QualifiedAttribute {
                table: cat.fact.name.clone(),
                attribute: edge.fact_attribute.clone(),
            });
            indexable.insert(QualifiedAttribute {
                table: edge.dimension.clone(),
                attribute: edge.dimension_attribute.clone(),
            });
        }
    }

    Ok(QueryProfile {
        id: q.id,
        joins,
        restrictions,
        group_by,
        indexable,
    })
}

fn star_edge(
    cat: &SchemaCatalog,
    left: &QualifiedAttribute,
    right: &QualifiedAttribute,
) -> Option<JoinEdge> {
    let oriented = |fact_side: &QualifiedAttribute, dim_side: &QualifiedAttribute| {
        if fact_side.table != cat.fact.name {
            return None;
        }
        let (dim, key) = cat.foreign_keys.get(&fact_side.attribute)?;
        if dim == &dim_side.table && key == &dim_side.attribute {
            Some(JoinEdge {
                fact_attribute: fact_side.attribute.clone(),
                dimension: dim.clone(),
                dimension_attribute: key.clone(),
            })
        } else {
            None
        }
    };
    oriented(left, right).or_else(|| oriented(right, left))
}

fn merge_restriction(
    map: &mut BTreeMap<QualifiedAttribute, RestrictionKind>,
    attr: QualifiedAttribute,
    kind: RestrictionKind,
) {
    match map.get(&attr) {
        None => {
            map.insert(attr, kind);
        }
        Some(existing) => {
            let replace = match (existing, &kind) {
                (RestrictionKind::Membership(a), RestrictionKind::Membership(b)) => b < a,
                (e, k) => k.rank() < e.rank(),
            };
            if replace {
                map.insert(attr, kind);
            }
        }
    }
}

/// Validates every query; first error aborts.
pub fn analyze_workload(
    queries: &[Query],
    cat: &SchemaCatalog,
    opts: &AnalyzeOptions,
) -> Result<Vec<QueryProfile>, AnalyzeError> {
    queries.iter().map(|q| analyze_query(q, cat, opts)).collect()
}

/// The indexable attributes of one query: restriction attributes, both sides
/// of each star join, and group-by attributes, resolved to Table.attribute.
pub fn extract_indexable_attributes(
    q: &Query,
    cat: &SchemaCatalog,
) -> Result<BTreeSet<QualifiedAttribute>, AnalyzeError> {
    analyze_query(q, cat, &AnalyzeOptions::default()).map(|p| p.indexable)
}

// ---------------------------------------------------------------------------
// Query-attribute matrix
// ---------------------------------------------------------------------------

/// Binary matrix: one row per query, one column per indexable attribute
/// (lexicographically sorted). Built from extraction, every column has at
/// least one set bit; the test constructor does not enforce that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryAttributeMatrix {
    query_ids: Vec<u32>,
    columns: Vec<QualifiedAttribute>,
    rows: Vec<Bits>,
}

impl QueryAttributeMatrix {
    pub fn from_profiles(profiles: &[QueryProfile]) -> Self {
        let column_set: BTreeSet<&QualifiedAttribute> =
            profiles.iter().flat_map(|p| p.indexable.iter()).collect();
        let columns: Vec<QualifiedAttribute> = column_set.into_iter().cloned().collect();
        let index: BTreeMap<&QualifiedAttribute, usize> =
            columns.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let mut rows = Vec::with_capacity(profiles.len());
        let mut query_ids = Vec::with_capacity(profiles.len());
        for p in profiles {
            let mut bits = Bits::new(columns.len());
            for attr in &p.indexable {
                bits.set(index[attr]);
            }
            rows.push(bits);
            query_ids.push(p.id);
        }
        QueryAttributeMatrix {
            query_ids,
            columns,
            rows,
        }
    }

    /// Direct constructor for tests and synthetic matrices. Panics if a cell
    /// row's width differs from the column count.
    pub fn from_cells(
        query_ids: Vec<u32>,
        columns: Vec<QualifiedAttribute>,
        cells: &[Vec<bool>],
    ) -> Self {
        assert_eq!(query_ids.len(), cells.len());
        let rows = cells
            .iter()
            .map(|row| {
                assert_eq!(row.len(), columns.len());
                let mut bits = Bits::new(columns.len());
                for (i, &b) in row.iter().enumerate() {
                    if b {
                        bits.set(i);
                    }
                }
                bits
            })
            .collect();
        QueryAttributeMatrix {
            query_ids,
            columns,
            rows,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn query_ids(&self) -> &[u32] {
        &self.query_ids
    }

    pub fn columns(&self) -> &[QualifiedAttribute] {
        &self.columns
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.rows[row].get(col)
    }

    /// Column indices set in one row, ascending.
    pub fn row_items(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[row].iter_ones()
    }
}

/// Parses nothing: queries must already be parsed. Validates them, extracts,
/// and assembles the matrix with lexicographically sorted columns.
pub fn build_matrix(
    queries: &[Query],
    cat: &SchemaCatalog,
) -> Result<QueryAttributeMatrix, AnalyzeError> {
    let profiles = analyze_workload(queries, cat, &AnalyzeOptions::default())?;
    Ok(QueryAttributeMatrix::from_profiles(&profiles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfix::{docs_catalog, docs_columns, docs_rows, docs_workload_sql, qa};

    #[test]
    fn parses_the_single_join_statement() {
        let qs = parse_workload(
            "SELECT * FROM Sales S, Customers C WHERE S.cust_id=C.cust_id AND C.city='Lyon';",
        )
        .unwrap();
        assert_eq!(qs.len(), 1);
        let q = &qs[0];
        assert_eq!(q.id, 1);
        assert_eq!(
            q.tables.iter().cloned().collect::<Vec<_>>(),
            ["Customers", "Sales"]
        );
        assert_eq!(
            q.predicates,
            [
                Predicate::Join {
                    left: qa("Sales", "cust_id"),
                    right: qa("Customers", "cust_id"),
                },
                Predicate::Restriction {
                    attribute: qa("Customers", "city"),
                    op: RestrictionOp::Eq,
                    values: vec![Literal::Str(String::from("Lyon"))],
                },
            ]
        );
        assert!(q.group_by.is_empty());
    }

    #[test]
    fn parses_group_by_and_in_lists() {
        let qs = parse_workload(docs_workload_sql()).unwrap();
        assert_eq!(qs.len(), 3);
        assert_eq!(qs[2].group_by, [qa("Times", "month")]);
        match &qs[1].predicates[1] {
            Predicate::Restriction { op, values, .. } => {
                assert_eq!(*op, RestrictionOp::In);
                assert_eq!(values.len(), 3);
            }
            other => panic!("expected IN restriction, got {other:?}"),
        }
        assert_eq!(qs.iter().map(|q| q.id).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn empty_input_gives_empty_workload() {
        assert_eq!(parse_workload("").unwrap(), []);
        assert_eq!(parse_workload("  \n -- only a comment\n ;;").unwrap(), []);
    }

    #[test]
    fn comments_and_string_semicolons_do_not_split() {
        let qs = parse_workload(
            "SELECT * FROM Sales S -- trailing; comment\nWHERE S.amount = 'a;b';",
        )
        .unwrap();
        assert_eq!(qs.len(), 1);
        match &qs[0].predicates[0] {
            Predicate::Restriction { values, .. } => {
                assert_eq!(values[0], Literal::Str(String::from("a;b")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alias_forms_resolve() {
        let qs = parse_workload(
            "SELECT C.city FROM Customers AS C WHERE C.city = 'x';\
             SELECT * FROM Times T1, Times T2 WHERE T1.month = 1;",
        )
        .unwrap();
        assert_eq!(qs[0].predicates.len(), 1);
        match &qs[0].predicates[0] {
            Predicate::Restriction { attribute, .. } => {
                assert_eq!(attribute, &qa("Customers", "city"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(qs[1].tables.len(), 1);
    }

    #[test]
    fn syntax_errors_carry_statement_and_offset() {
        let err = parse_workload("SELECT * FROM Sales WHERE Sales.a = ;").unwrap_err();
        match err {
            ParseError::Syntax { statement, offset, .. } => {
                assert_eq!(statement, 1);
                assert!(offset >= 36);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
        let err =
            parse_workload("SELECT * FROM Sales;\nSELECT * FROM Sales WHERE X.a = 1;").unwrap_err();
        match err {
            ParseError::Syntax { statement, message, .. } => {
                assert_eq!(statement, 2);
                assert!(message.contains("unknown table or alias 'X'"));
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_constructs_error_strictly_and_skip_leniently() {
        let text = "SELECT * FROM Sales S WHERE S.a = 1 OR S.b = 2;\
                    SELECT * FROM Sales S WHERE S.amount = 1;";
        assert!(matches!(
            parse_workload(text),
            Err(ParseError::UnknownConstruct { statement: 1, .. })
        ));
        let lenient = parse_workload_lenient(text).unwrap();
        assert_eq!(lenient.queries.len(), 1);
        assert_eq!(lenient.queries[0].id, 1);
        assert_eq!(lenient.skipped.len(), 1);
        assert_eq!(lenient.skipped[0].construct, "OR");

        for bad in [
            "SELECT * FROM Sales JOIN Customers ON Sales.c = Customers.c;",
            "SELECT * FROM Sales S WHERE S.a BETWEEN 1 AND 2;",
            "SELECT * FROM Sales S WHERE S.a IN (SELECT x FROM t);",
            "SELECT * FROM Sales S WHERE NOT S.a = 1;",
            "SELECT * FROM Sales S WHERE S.a = 1 ORDER BY S.a;",
            "SELECT * FROM Sales S WHERE a = 1;",
            "SELECT * FROM Sales S WHERE S.a < S.b;",
        ] {
            assert!(
                matches!(parse_workload(bad), Err(ParseError::UnknownConstruct { .. })),
                "expected unknown construct for {bad}"
            );
            assert!(parse_workload_lenient(bad).unwrap().queries.is_empty());
        }

        // Malformed statements stay fatal even in lenient mode.
        assert!(parse_workload_lenient("SELECT * FROM Sales WHERE 'open;").is_err());
    }

    #[test]
    fn emit_parse_round_trip() {
        let qs = parse_workload(docs_workload_sql()).unwrap();
        for q in &qs {
            let emitted = emit_sql(q);
            let reparsed = parse_workload(&emitted).unwrap();
            assert_eq!(reparsed.len(), 1);
            assert_eq!(reparsed[0].tables, q.tables);
            assert_eq!(reparsed[0].predicates, q.predicates);
            assert_eq!(reparsed[0].group_by, q.group_by);
        }
    }

    #[test]
    fn extraction_follows_the_three_sources() {
        let cat = docs_catalog();
        let qs = parse_workload(docs_workload_sql()).unwrap();
        let got = extract_indexable_attributes(&qs[0], &cat).unwrap();
        let want: BTreeSet<_> = [
            qa("Customers", "city"),
            qa("Customers", "cust_id"),
            qa("Sales", "cust_id"),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, want);

        let got = extract_indexable_attributes(&qs[1], &cat).unwrap();
        let want: BTreeSet<_> = [
            qa("Sales", "time_id"),
            qa("Times", "month"),
            qa("Times", "time_id"),
            qa("Times", "year"),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn no_where_no_group_by_extracts_nothing() {
        let cat = docs_catalog();
        let qs = parse_workload("SELECT * FROM Sales;").unwrap();
        assert!(extract_indexable_attributes(&qs[0], &cat)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unknown_tables_are_excluded_not_errors() {
        let cat = docs_catalog();
        let qs = parse_workload(
            "SELECT * FROM Sales S, Ledger L WHERE L.entry = 5 AND S.amount = 1 GROUP BY L.kind;",
        )
        .unwrap();
        let got = extract_indexable_attributes(&qs[0], &cat).unwrap();
        let want: BTreeSet<_> = [qa("Sales", "amount")].into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn unknown_attribute_in_known_table_is_an_error() {
        let cat = docs_catalog();
        let qs = parse_workload("SELECT * FROM Sales S WHERE S.bogus = 1;").unwrap();
        assert!(matches!(
            extract_indexable_attributes(&qs[0], &cat),
            Err(AnalyzeError::UnknownAttribute { .. })
        ));
    }

    #[test]
    fn non_star_join_is_unsupported() {
        let cat = docs_catalog();
        let qs = parse_workload(
            "SELECT * FROM Customers C, Times T WHERE C.cust_id = T.time_id;",
        )
        .unwrap();
        assert!(matches!(
            analyze_query(&qs[0], &cat, &AnalyzeOptions::default()),
            Err(AnalyzeError::UnsupportedJoin { .. })
        ));
    }

    #[test]
    fn restriction_kinds_merge_toward_selectivity() {
        let cat = docs_catalog();
        let qs = parse_workload(
            "SELECT * FROM Times T WHERE T.month > 2 AND T.month IN (3, 4) AND T.month <> 7;",
        )
        .unwrap();
        let p = analyze_query(&qs[0], &cat, &AnalyzeOptions::default()).unwrap();
        assert_eq!(
            p.restrictions[&qa("Times", "month")],
            RestrictionKind::Membership(2)
        );
    }

    #[test]
    fn keys_can_be_left_to_metadata() {
        let cat = docs_catalog();
        let qs = parse_workload(docs_workload_sql()).unwrap();
        let p = analyze_query(
            &qs[0],
            &cat,
            &AnalyzeOptions {
                include_join_keys: false,
            },
        )
        .unwrap();
        let want: BTreeSet<_> = [qa("Customers", "city")].into_iter().collect();
        assert_eq!(p.indexable, want);
        assert_eq!(p.joins.len(), 1);
    }

    #[test]
    fn docs_fixture_matrix_is_3_by_7() {
        let cat = docs_catalog();
        let qs = parse_workload(docs_workload_sql()).unwrap();
        let m = build_matrix(&qs, &cat).unwrap();
        assert_eq!(m.n_rows(), 3);
        assert_eq!(m.n_cols(), 7);
        assert_eq!(m.columns(), docs_columns().as_slice());
        assert_eq!(m.query_ids(), [1, 2, 3]);
        for (r, want) in docs_rows().iter().enumerate() {
            assert_eq!(&m.row_items(r).collect::<Vec<_>>(), want, "row {r}");
        }
    }

    #[test]
    fn identical_queries_make_identical_rows() {
        let cat = docs_catalog();
        let one = "SELECT * FROM Sales S, Customers C WHERE S.cust_id = C.cust_id AND C.city = 'Lyon';";
        let text = format!("{one}{one}");
        let qs = parse_workload(&text).unwrap();
        let m = build_matrix(&qs, &cat).unwrap();
        assert_eq!(m.n_rows(), 2);
        assert_eq!(
            m.row_items(0).collect::<Vec<_>>(),
            m.row_items(1).collect::<Vec<_>>()
        );
    }

    #[test]
    fn empty_workload_makes_empty_matrix() {
        let cat = docs_catalog();
        let m = build_matrix(&[], &cat).unwrap();
        assert_eq!(m.n_rows(), 0);
        assert_eq!(m.n_cols(), 0);
    }
}
