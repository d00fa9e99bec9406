//! Example languages shipped with the crate, each with a small corpus.

// 3.1415927 is the documented constant, not an approximation of PI
#![allow(clippy::approx_constant)]

use std::fmt;

use crate::binder::{apply_semantics, EvalError, InstanceData, Semantics};
use crate::error::{Error, ErrorKind};
use crate::language::Language;
use crate::text::read_model;

/// Where a corpus expectation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// A value the published example states.
    Documented,
    /// Worked out by hand or by an independent oracle.
    Derived,
    /// Follows directly from the definitions.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expect {
    /// Result of the entry's `eval` semantics.
    Value(f64),
    /// [`crate::binder::Asg::outline`] of the graph.
    Outline(&'static str),
    Fails(ErrorKind),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusItem {
    pub input: &'static str,
    /// Constants registered before parsing.
    pub defines: &'static [(&'static str, f64)],
    pub expect: Expect,
    pub basis: Basis,
}

#[derive(Debug, Clone, Copy)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub source: &'static str,
    pub summary: &'static str,
    /// Whether the arithmetic `eval` semantics apply.
    pub evaluates: bool,
    pub corpus: &'static [CorpusItem],
}

const fn item(input: &'static str, expect: Expect, basis: Basis) -> CorpusItem {
    CorpusItem { input, defines: &[], expect, basis }
}

const PI: &[(&str, f64)] = &[("pi", 3.1415927)];

use Basis::*;
use Expect::*;

pub const ENTRIES: &[GalleryEntry] = &[
    GalleryEntry {
        name: "arith",
        source: include_str!("../gallery/arith.mcc"),
        summary: "arithmetic expressions with priorities and left associativity",
        evaluates: true,
        corpus: &[
            item("10/(2+3)*0.5+1", Value(2.0), Documented),
            item("1+2*3", Value(7.0), Derived),
            item("1-2-3", Value(-4.0), Derived),
            item("8/4/2", Value(1.0), Derived),
            item("2*(3+4)", Value(14.0), Derived),
            item("5", Value(5.0), Trivial),
            item("0.5", Value(0.5), Trivial),
            item("1+2", Outline("BinaryExpression{e1=Literal(1), op=AdditionOperator, e2=Literal(2)}"), Trivial),
            item("1+", Fails(ErrorKind::Syntax), Trivial),
            item("1 $ 2", Fails(ErrorKind::Lexical), Trivial),
        ],
    },
    GalleryEntry {
        name: "constants",
        source: include_str!("../gallery/constants.mcc"),
        summary: "arithmetic over predefined named constants",
        evaluates: true,
        corpus: &[
            CorpusItem { input: "pi", defines: PI, expect: Value(3.1415927), basis: Documented },
            CorpusItem { input: "2*pi", defines: PI, expect: Value(6.2831854), basis: Documented },
            CorpusItem { input: "pi*(1+1)", defines: PI, expect: Value(6.2831854), basis: Derived },
            item("pi", Fails(ErrorKind::Unresolved), Documented),
            item("3+4*2", Value(11.0), Derived),
        ],
    },
    GalleryEntry {
        name: "json",
        source: include_str!("../gallery/json.mcc"),
        summary: "JSON documents",
        evaluates: false,
        corpus: &[
            item("{}", Outline("JSONDocument{value=JSONObject{pairs=[]}}"), Trivial),
            item(
                r#"{"a": [1, true, null]}"#,
                Outline(r#"JSONDocument{value=JSONObject{pairs=[JSONPair{name=JSONString("\"a\""), value=JSONArray{elements=[JSONNumber(1), JSONBoolean(true), JSONNull]}}]}}"#),
                Derived,
            ),
            item("[]", Outline("JSONDocument{value=JSONArray{elements=[]}}"), Trivial),
            item("[1,]", Fails(ErrorKind::Syntax), Trivial),
            item(r#"{"a" 1}"#, Fails(ErrorKind::Syntax), Trivial),
        ],
    },
    GalleryEntry {
        name: "ifelse",
        source: include_str!("../gallery/ifelse.mcc"),
        summary: "conditionals where an else binds to the nearest if",
        evaluates: false,
        corpus: &[
            item(
                "if a then if b then x else y",
                Outline(r#"IfStatement{condition=Name("a"), body=IfStatement{condition=Name("b"), body=Call("x"), otherwise=ElseClause{body=Call("y")}}, otherwise=_}"#),
                Documented,
            ),
            item("if a then x", Outline(r#"IfStatement{condition=Name("a"), body=Call("x"), otherwise=_}"#), Trivial),
            item("x", Outline(r#"Call("x")"#), Trivial),
            item("if a then", Fails(ErrorKind::Syntax), Trivial),
        ],
    },
    GalleryEntry {
        name: "awk",
        source: include_str!("../gallery/awk.mcc"),
        summary: "pattern-action rules; a pattern takes the action right after it",
        evaluates: false,
        corpus: &[
            item(
                "/x/ { print } /y/",
                Outline(r#"Program{items=[PatternRule{pattern=Pattern("/x/"), action=Action{statements=[Statement("print")]}}, PatternRule{pattern=Pattern("/y/"), action=_}]}"#),
                Documented,
            ),
            item(
                "{ a; b }",
                Outline(r#"Program{items=[ActionRule{action=Action{statements=[Statement("a"), Statement("b")]}}]}"#),
                Trivial,
            ),
            item("", Outline("Program{items=[]}"), Trivial),
        ],
    },
    GalleryEntry {
        name: "sexpr",
        source: include_str!("../gallery/sexpr.mcc"),
        summary: "LISP S-expressions",
        evaluates: false,
        corpus: &[
            item(
                "(a (b c) d)",
                Outline(r#"SList{items=[Symbol("a"), SList{items=[Symbol("b"), Symbol("c")]}, Symbol("d")]}"#),
                Derived,
            ),
            item("()", Outline("SList{items=[]}"), Trivial),
            item("(+ 1 -2)", Outline(r#"SList{items=[Symbol("+"), Number(1), Number(-2)]}"#), Trivial),
            item("(a", Fails(ErrorKind::Syntax), Trivial),
        ],
    },
    GalleryEntry {
        name: "graph",
        source: include_str!("../gallery/graph.mcc"),
        summary: "nodes and edges with forward and backward references",
        evaluates: false,
        corpus: &[
            item(
                "node a -> b; node b -> a;",
                Outline(r#"Network{nodes=[Node{name=Identifier("a"), edges=[Edge{target=&b}]}, Node{name=Identifier("b"), edges=[Edge{target=&a}]}]}"#),
                Derived,
            ),
            item("node a -> a;", Outline(r#"Network{nodes=[Node{name=Identifier("a"), edges=[Edge{target=&a}]}]}"#), Trivial),
            item("node a -> c;", Fails(ErrorKind::Unresolved), Trivial),
            item("node a; node a;", Fails(ErrorKind::DuplicateId), Trivial),
        ],
    },
    GalleryEntry {
        name: "prolog",
        source: include_str!("../gallery/prolog.mcc"),
        summary: "facts and rules over terms (no operators)",
        evaluates: false,
        corpus: &[
            item(
                "parent(X, Y) :- father(X, Y). father(tom, bob).",
                Outline(r#"Program{clauses=[Rule{head=Compound{functor=Atom("parent"), arguments=[Variable("X"), Variable("Y")]}, body=[Compound{functor=Atom("father"), arguments=[Variable("X"), Variable("Y")]}]}, Fact{head=Compound{functor=Atom("father"), arguments=[Atom("tom"), Atom("bob")]}}]}"#),
                Derived,
            ),
            item("halt.", Outline(r#"Program{clauses=[Fact{head=Atom("halt")}]}"#), Trivial),
            item("f(.", Fails(ErrorKind::Syntax), Trivial),
        ],
    },
];

pub fn entry(name: &str) -> Option<&'static GalleryEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    ENTRIES.iter().map(|e| e.name)
}

impl GalleryEntry {
    pub fn language(&self) -> Result<Language, Error> {
        Language::new(read_model(self.source)?.model)
    }
}

/// Arithmetic evaluation for the arith and constants models.
pub fn eval_semantics() -> Semantics<f64> {
    Semantics::new()
        .on("Literal", |ev, n| ev.number(n))
        .on("ExpressionGroup", |ev, n| ev.eval_field(n, "e"))
        .on("ConstantReference", |ev, n| ev.eval_field(n, "constant"))
        .on("Constant", |ev, n| ev.eval_field(n, "value"))
        .on("BinaryExpression", |ev, n| {
            let a = ev.eval_field(n, "e1")?;
            let b = ev.eval_field(n, "e2")?;
            match ev.type_name(ev.child(n, "op")?) {
                "AdditionOperator" => Ok(a + b),
                "SubtractionOperator" => Ok(a - b),
                "MultiplicationOperator" => Ok(a * b),
                "DivisionOperator" => Ok(a / b),
                other => Err(EvalError::Other(format!("unknown operator `{other}`"))),
            }
        })
}

/// A `Constant` with the given name and value.
pub fn constant(name: &str, value: f64) -> InstanceData {
    InstanceData::new("Constant").with("name", name).with("value", value)
}

#[derive(Debug, Clone)]
pub struct ItemResult {
    pub input: &'static str,
    pub basis: Basis,
    pub passed: bool,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone)]
pub struct GalleryReport {
    pub name: &'static str,
    pub items: Vec<ItemResult>,
}

impl GalleryReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

impl fmt::Display for GalleryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.items {
            let status = if i.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{status} {} {:?}", self.name, i.input)?;
            if !i.passed {
                writeln!(f, "  expected: {}", i.expected)?;
                writeln!(f, "  actual:   {}", i.actual)?;
            }
        }
        Ok(())
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

/// Runs every corpus item of `entry` through the whole pipeline.
pub fn run_gallery(entry: &GalleryEntry) -> GalleryReport {
    let language = match entry.language() {
        Ok(l) => l,
        Err(e) => {
            return GalleryReport {
                name: entry.name,
                items: vec![ItemResult {
                    input: "",
                    basis: Trivial,
                    passed: false,
                    expected: "a valid model".into(),
                    actual: e.to_string(),
                }],
            }
        }
    };
    let semantics = eval_semantics();
    let items = entry
        .corpus
        .iter()
        .map(|item| {
            let outcome = (|| {
                let mut table = language.symbol_table();
                for (name, value) in item.defines {
                    table.register(constant(name, *value))?;
                }
                language.parse(item.input, &table)
            })();
            let (passed, expected, actual) = match (&item.expect, outcome) {
                (Value(v), Ok(asg)) => match apply_semantics(&asg, &semantics) {
                    Ok(x) => (close(x, *v), v.to_string(), x.to_string()),
                    Err(e) => (false, v.to_string(), e.to_string()),
                },
                (Outline(o), Ok(asg)) => {
                    let got = asg.outline();
                    (got == *o, o.to_string(), got)
                }
                (Fails(kind), Ok(asg)) => (false, format!("{kind:?} error"), asg.outline()),
                (Fails(kind), Err(e)) => (e.kind() == *kind, format!("{kind:?} error"), format!("{:?} error: {e}", e.kind())),
                (expect, Err(e)) => (false, format!("{expect:?}"), e.to_string()),
            };
            ItemResult { input: item.input, basis: item.basis, passed, expected, actual }
        })
        .collect();
    GalleryReport { name: entry.name, items }
}
