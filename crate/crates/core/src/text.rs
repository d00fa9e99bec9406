//! The `.mcc` model file format.
//!
//! ```text
//! language Arithmetic;
//! abstract element Expression @start;
//! element ExpressionGroup : Expression @prefix("\\(") @suffix("\\)") {
//!     e : Expression;
//! }
//! basic element Literal : Expression @pattern("[0-9]+") @value(number);
//! ```
//!
//! String literals take the escapes `\\`, `\"`, `\n`, `\r` and `\t`.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{
    Associativity, BuildError, Composition, ElementConstraint, ElementKind, MemberConstraint,
    MemberSpec, MemberType, Model, ModelBuilder, Multiplicity, ReferenceKind, ValidationReport,
    ValueType,
};

/// 1-based line and column range inside a model file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

#[derive(Debug, Clone)]
pub struct ModelDocument {
    pub source: String,
    pub model: Model,
    /// One span per element, parallel to `model.elements`.
    pub spans: Vec<SourceSpan>,
}

impl ModelDocument {
    pub fn span_of(&self, element: &str) -> Option<SourceSpan> {
        let i = self.model.elements.iter().rposition(|e| e.name == element)?;
        self.spans.get(i).copied()
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReadError {
    #[error("{line}:{col}: error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("invalid model:\n{report}")]
    Invalid {
        report: ValidationReport,
        /// Position of the element each issue names, in report order.
        positions: Vec<Option<(usize, usize)>>,
    },
}

impl ReadError {
    /// Renders the error as `file:line:col: severity: message` lines.
    pub fn diagnostics(&self, file: &str) -> String {
        match self {
            ReadError::Syntax { line, col, message } => format!("{file}:{line}:{col}: error: {message}"),
            ReadError::Invalid { report, positions } => {
                let mut out = String::new();
                for (issue, pos) in report.issues.iter().zip(positions) {
                    let (l, c) = pos.unwrap_or((1, 1));
                    if !out.is_empty() {
                        out.push('\n');
                    }
                    let _ = write!(out, "{file}:{l}:{c}: error: {issue}");
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Punct(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Int(n) => write!(f, "number {n}"),
            Tok::Punct(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of file"),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> ReadError {
    ReadError::Syntax { line, col, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Lexed>, ReadError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    let advance = |c: char, line: &mut usize, col: &mut usize| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        if c.is_whitespace() {
            chars.next();
            advance(c, &mut line, &mut col);
        } else if c == '/' {
            chars.next();
            advance(c, &mut line, &mut col);
            if chars.peek() != Some(&'/') {
                return Err(syntax(l0, c0, "unexpected `/`"));
            }
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                advance(c, &mut line, &mut col);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !(c.is_ascii_alphanumeric() || c == '_') {
                    break;
                }
                s.push(c);
                chars.next();
                advance(c, &mut line, &mut col);
            }
            out.push(Lexed { tok: Tok::Ident(s), line: l0, col: c0 });
        } else if c.is_ascii_digit() || c == '-' {
            let mut s = String::new();
            s.push(c);
            chars.next();
            advance(c, &mut line, &mut col);
            while let Some(&c) = chars.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                s.push(c);
                chars.next();
                advance(c, &mut line, &mut col);
            }
            let n = s
                .parse::<i64>()
                .map_err(|_| syntax(l0, c0, format!("malformed integer `{s}`")))?;
            out.push(Lexed { tok: Tok::Int(n), line: l0, col: c0 });
        } else if c == '"' {
            chars.next();
            advance(c, &mut line, &mut col);
            let mut s = String::new();
            loop {
                let Some(c) = chars.next() else {
                    return Err(syntax(l0, c0, "unterminated string"));
                };
                advance(c, &mut line, &mut col);
                match c {
                    '"' => break,
                    '\\' => {
                        let Some(e) = chars.next() else {
                            return Err(syntax(l0, c0, "unterminated string"));
                        };
                        advance(e, &mut line, &mut col);
                        s.push(match e {
                            '\\' => '\\',
                            '"' => '"',
                            'n' => '\n',
                            'r' => '\r',
                            't' => '\t',
                            other => {
                                return Err(syntax(line, col - 1, format!("unknown escape `\\{other}`")))
                            }
                        });
                    }
                    c => s.push(c),
                }
            }
            out.push(Lexed { tok: Tok::Str(s), line: l0, col: c0 });
        } else if ":;{}(),@*".contains(c) {
            chars.next();
            advance(c, &mut line, &mut col);
            out.push(Lexed { tok: Tok::Punct(c), line: l0, col: c0 });
        } else {
            return Err(syntax(l0, c0, format!("unexpected character `{c}`")));
        }
    }
    out.push(Lexed { tok: Tok::Eof, line, col });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Arg {
    Str(String),
    Int(i64),
    Ident(String),
    Star,
}

struct Annotation {
    name: String,
    args: Vec<Arg>,
    line: usize,
    col: usize,
}

struct Reader {
    toks: Vec<Lexed>,
    pos: usize,
}

impl Reader {
    fn peek(&self) -> &Lexed {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> &Lexed {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> ReadError {
        let t = self.peek();
        syntax(t.line, t.col, format!("expected {expected}, found {}", t.tok))
    }

    fn punct(&mut self, c: char) -> Result<(), ReadError> {
        if self.peek().tok == Tok::Punct(c) {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(&format!("`{c}`")))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Punct(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ReadError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.error_here(what)),
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn annotations(&mut self) -> Result<Vec<Annotation>, ReadError> {
        let mut out = Vec::new();
        while self.peek().tok == Tok::Punct('@') {
            let (line, col) = (self.peek().line, self.peek().col);
            self.next();
            let name = self.ident("annotation name")?;
            let mut args = Vec::new();
            if self.eat('(') {
                loop {
                    let arg = match &self.peek().tok {
                        Tok::Str(s) => Arg::Str(s.clone()),
                        Tok::Int(n) => Arg::Int(*n),
                        Tok::Ident(s) => Arg::Ident(s.clone()),
                        Tok::Punct('*') => Arg::Star,
                        _ => return Err(self.error_here("annotation argument")),
                    };
                    self.next();
                    args.push(arg);
                    if !self.eat(',') {
                        break;
                    }
                }
                self.punct(')')?;
            }
            out.push(Annotation { name, args, line, col });
        }
        Ok(out)
    }
}

impl Annotation {
    fn error(&self, message: impl Into<String>) -> ReadError {
        syntax(self.line, self.col, message)
    }

    fn no_args(&self) -> Result<(), ReadError> {
        if self.args.is_empty() {
            Ok(())
        } else {
            Err(self.error(format!("@{} takes no arguments", self.name)))
        }
    }

    fn strings(&self) -> Result<Vec<String>, ReadError> {
        if self.args.is_empty() {
            return Err(self.error(format!("@{} needs at least one string", self.name)));
        }
        self.args
            .iter()
            .map(|a| match a {
                Arg::Str(s) => Ok(s.clone()),
                _ => Err(self.error(format!("@{} takes string arguments", self.name))),
            })
            .collect()
    }

    fn single_string(&self) -> Result<String, ReadError> {
        let mut s = self.strings()?;
        if s.len() != 1 {
            return Err(self.error(format!("@{} takes one string", self.name)));
        }
        Ok(s.remove(0))
    }

    fn single_ident(&self) -> Result<&str, ReadError> {
        match self.args.as_slice() {
            [Arg::Ident(s)] => Ok(s),
            _ => Err(self.error(format!("@{} takes one keyword", self.name))),
        }
    }

    fn single_int(&self) -> Result<i64, ReadError> {
        match self.args.as_slice() {
            [Arg::Int(n)] => Ok(*n),
            _ => Err(self.error(format!("@{} takes one integer", self.name))),
        }
    }

    fn element_constraint(&self) -> Result<ElementConstraint, ReadError> {
        Ok(match self.name.as_str() {
            "pattern" => ElementConstraint::Pattern(self.single_string()?),
            "value" => ElementConstraint::Value(match self.single_ident()? {
                "text" => ValueType::Text,
                "number" => ValueType::Number,
                "boolean" => ValueType::Boolean,
                other => return Err(self.error(format!("unknown value type `{other}`"))),
            }),
            "prefix" => ElementConstraint::Prefix(self.strings()?),
            "suffix" => ElementConstraint::Suffix(self.strings()?),
            "associativity" => ElementConstraint::Associativity(match self.single_ident()? {
                "ltr" => Associativity::LeftToRight,
                "rtl" => Associativity::RightToLeft,
                "non" => Associativity::NonAssociative,
                other => return Err(self.error(format!("unknown associativity `{other}`"))),
            }),
            "priority" => ElementConstraint::Priority(self.single_int()?),
            "composition" => ElementConstraint::Composition(match self.single_ident()? {
                "eager" => Composition::Eager,
                "lazy" => Composition::Lazy,
                other => return Err(self.error(format!("unknown composition `{other}`"))),
            }),
            "freeorder" => {
                self.no_args()?;
                ElementConstraint::FreeOrder
            }
            "constraint" => ElementConstraint::Constraint(self.single_string()?),
            "start" => {
                self.no_args()?;
                ElementConstraint::Start
            }
            other => return Err(self.error(format!("unknown element annotation `@{other}`"))),
        })
    }

    fn member_constraint(&self) -> Result<MemberConstraint, ReadError> {
        Ok(match self.name.as_str() {
            "optional" => {
                self.no_args()?;
                MemberConstraint::Optional
            }
            "multiplicity" => {
                let bound = |n: i64| {
                    u32::try_from(n).map_err(|_| self.error(format!("multiplicity bound {n} out of range")))
                };
                let (min, max) = match self.args.as_slice() {
                    [Arg::Int(min), Arg::Int(max)] => (bound(*min)?, Some(bound(*max)?)),
                    [Arg::Int(min), Arg::Star] => (bound(*min)?, None),
                    _ => return Err(self.error("@multiplicity takes (min,max) or (min,*)")),
                };
                MemberConstraint::Multiplicity(Multiplicity { min, max })
            }
            "separator" => MemberConstraint::Separator(self.strings()?),
            "position" => {
                let n = self.single_int()?;
                MemberConstraint::Position(
                    u32::try_from(n).map_err(|_| self.error(format!("position {n} out of range")))?,
                )
            }
            "id" => {
                self.no_args()?;
                MemberConstraint::Id
            }
            "reference" => {
                self.no_args()?;
                MemberConstraint::Reference
            }
            other => return Err(self.error(format!("unknown member annotation `@{other}`"))),
        })
    }
}

fn build_error(a: &Annotation, e: BuildError) -> ReadError {
    a.error(e.to_string())
}

/// Parses a model file and validates the result.
pub fn read_model(text: &str) -> Result<ModelDocument, ReadError> {
    let (model, spans) = read_unvalidated(text)?;
    let report = crate::model::validate_model(&model);
    if !report.is_ok() {
        let positions = report
            .issues
            .iter()
            .map(|i| {
                let name = i.element.as_deref()?;
                let idx = model.elements.iter().position(|e| e.name == name)?;
                spans.get(idx).map(|s| (s.line, s.col))
            })
            .collect();
        return Err(ReadError::Invalid { report, positions });
    }
    Ok(ModelDocument { source: text.to_string(), model, spans })
}

/// Parses a model file without running validation.
pub fn read_unvalidated(text: &str) -> Result<(Model, Vec<SourceSpan>), ReadError> {
    let mut r = Reader { toks: lex(text)?, pos: 0 };
    if !r.keyword("language") {
        let t = r.peek();
        return Err(syntax(t.line, t.col, "expected 'language' header"));
    }
    r.next();
    let name = r.ident("language name")?;
    let mut b = ModelBuilder::new(name);
    for a in r.annotations()? {
        match a.name.as_str() {
            "skip" => {
                let s = a.single_string()?;
                b.set_skip(s).map_err(|e| build_error(&a, e))?;
            }
            other => return Err(a.error(format!("unknown language annotation `@{other}`"))),
        }
    }
    r.punct(';')?;

    let mut spans = Vec::new();
    while r.peek().tok != Tok::Eof {
        let (line, col) = (r.peek().line, r.peek().col);
        let kind = if r.keyword("abstract") {
            r.next();
            ElementKind::Selection
        } else if r.keyword("basic") {
            r.next();
            ElementKind::Basic
        } else {
            ElementKind::Composite
        };
        if !r.keyword("element") {
            return Err(r.error_here("`element`"));
        }
        r.next();
        let name = r.ident("element name")?;
        let supertype = if r.eat(':') { Some(r.ident("supertype name")?) } else { None };
        b.add_element(name.clone(), kind, supertype.as_deref());
        for a in r.annotations()? {
            let c = a.element_constraint()?;
            b.set_constraint(&name, c).map_err(|e| build_error(&a, e))?;
        }
        if kind == ElementKind::Composite {
            r.punct('{')?;
            while !r.eat('}') {
                let field = r.ident("member name or `}`")?;
                r.punct(':')?;
                let member = match &r.peek().tok {
                    Tok::Ident(t) => MemberSpec::element(field.clone(), t.clone()),
                    Tok::Str(s) => MemberSpec::token(field.clone(), s.clone()),
                    _ => return Err(r.error_here("member type or token string")),
                };
                r.next();
                b.add_member(&name, member).map_err(|e| syntax(line, col, e.to_string()))?;
                for a in r.annotations()? {
                    let c = a.member_constraint()?;
                    b.set_member_constraint(&name, &field, c)
                        .map_err(|e| build_error(&a, e))?;
                }
                r.punct(';')?;
            }
        } else {
            r.punct(';')?;
        }
        let end = &r.toks[r.pos.saturating_sub(1)];
        spans.push(SourceSpan { line, col, end_line: end.line, end_col: end.col + 1 });
    }
    Ok((b.finish(), spans))
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn quote_list(items: &[String]) -> String {
    items.iter().map(|s| quote(s)).collect::<Vec<_>>().join(", ")
}

/// Canonical text for `model`. Deterministic; the start element always
/// carries `@start`.
pub fn write_model(model: &Model) -> String {
    let mut out = String::new();
    let _ = write!(out, "language {}", model.name);
    if let Some(skip) = &model.skip {
        let _ = write!(out, " @skip({})", quote(skip));
    }
    out.push_str(";\n");
    for e in &model.elements {
        out.push('\n');
        match e.kind {
            ElementKind::Selection => out.push_str("abstract "),
            ElementKind::Basic => out.push_str("basic "),
            ElementKind::Composite => {}
        }
        let _ = write!(out, "element {}", e.name);
        if let Some(s) = &e.supertype {
            let _ = write!(out, " : {s}");
        }
        if let Some(p) = &e.pattern {
            if !p.regex.is_empty() {
                let _ = write!(out, " @pattern({})", quote(&p.regex));
            }
            if p.value_type != ValueType::None {
                let _ = write!(out, " @value({})", p.value_type.keyword());
            }
        }
        if !e.delimiters.prefixes.is_empty() {
            let _ = write!(out, " @prefix({})", quote_list(&e.delimiters.prefixes));
        }
        if !e.delimiters.suffixes.is_empty() {
            let _ = write!(out, " @suffix({})", quote_list(&e.delimiters.suffixes));
        }
        let ev = &e.evaluation;
        match ev.associativity {
            Associativity::LeftToRight => out.push_str(" @associativity(ltr)"),
            Associativity::RightToLeft => out.push_str(" @associativity(rtl)"),
            Associativity::NonAssociative => out.push_str(" @associativity(non)"),
            Associativity::Unspecified => {}
        }
        if let Some(p) = ev.priority {
            let _ = write!(out, " @priority({p})");
        }
        match ev.composition {
            Composition::Eager => out.push_str(" @composition(eager)"),
            Composition::Lazy => out.push_str(" @composition(lazy)"),
            Composition::Unspecified => {}
        }
        if ev.free_order {
            out.push_str(" @freeorder");
        }
        if let Some(h) = &e.constraint {
            let _ = write!(out, " @constraint({})", quote(h));
        }
        if e.name == model.start {
            out.push_str(" @start");
        }
        if e.kind != ElementKind::Composite {
            out.push_str(";\n");
            continue;
        }
        out.push_str(" {\n");
        for m in &e.members {
            let _ = write!(out, "    {} : ", m.field);
            match &m.target {
                MemberType::Element(t) => out.push_str(t),
                MemberType::Token(r) => out.push_str(&quote(r)),
            }
            if m.optional {
                out.push_str(" @optional");
            }
            if let Some(mult) = m.multiplicity {
                match mult.max {
                    Some(max) => {
                        let _ = write!(out, " @multiplicity({}, {max})", mult.min);
                    }
                    None => {
                        let _ = write!(out, " @multiplicity({}, *)", mult.min);
                    }
                }
            }
            if !m.separator.is_empty() {
                let _ = write!(out, " @separator({})", quote_list(&m.separator));
            }
            if let Some(p) = m.position {
                let _ = write!(out, " @position({p})");
            }
            match m.reference {
                ReferenceKind::Id => out.push_str(" @id"),
                ReferenceKind::Reference => out.push_str(" @reference"),
                ReferenceKind::None => {}
            }
            out.push_str(";\n");
        }
        out.push_str("}\n");
    }
    out
}
