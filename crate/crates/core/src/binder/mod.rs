//! From a parse tree to an abstract syntax graph: instances, values and
//! resolved references.

mod instantiate;
mod semantics;
mod table;

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::model::{ElementId, Model};

pub use instantiate::instantiate;
pub use semantics::{apply_semantics, EvalError, Evaluator, SemanticFn, Semantics};
pub use table::{resolve_references, DataValue, InstanceData, SymbolTable};

/// Index into [`Asg::nodes`].
pub type InstanceId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Span {
    Source(usize, usize),
    Predefined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub target: ElementId,
    pub key: String,
    pub site: (usize, usize),
    pub resolved: Option<InstanceId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValue {
    Text(String),
    Number(f64),
    Boolean(bool),
    Instance(InstanceId),
    Reference(Reference),
    List(Vec<FieldValue>),
    Absent,
}

impl FieldValue {
    /// The instance this value points at, through a resolved reference.
    pub fn target(&self) -> Option<InstanceId> {
        match self {
            FieldValue::Instance(i) => Some(*i),
            FieldValue::Reference(r) => r.resolved,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub element: ElementId,
    pub span: Span,
    /// Declaration order; basic instances hold a single `value` field.
    pub fields: Vec<(String, FieldValue)>,
    /// Source text of basic instances; reference keys compare against it.
    pub text: Option<String>,
}

impl Instance {
    pub fn field(&self, name: &str) -> Option<&FieldValue> {
        self.fields.iter().find(|(f, _)| f == name).map(|(_, v)| v)
    }
}

/// Instances with the root first and contained instances in pre-order;
/// predefined instances pulled in by references come last.
#[derive(Debug, Clone)]
pub struct Asg {
    pub model: Arc<Model>,
    pub root: InstanceId,
    pub nodes: Vec<Instance>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BindError {
    #[error("cannot convert {text:?} to {kind} for `{element}` at [{}, {})", span.0, span.1)]
    Conversion { element: String, text: String, kind: &'static str, span: (usize, usize) },
    #[error("unresolved reference {key:?} to `{expected}` at [{}, {})", span.0, span.1)]
    Unresolved { key: String, expected: String, span: (usize, usize) },
    #[error("reference {key:?} to `{expected}` at [{}, {}) matches {count} instances", span.0, span.1)]
    AmbiguousReference { key: String, expected: String, span: (usize, usize), count: usize },
    #[error("duplicate id {key:?} for `{element}`")]
    DuplicateId { element: String, key: String },
    #[error("invalid instance data: {0}")]
    InvalidData(String),
}

impl Asg {
    pub fn instance(&self, id: InstanceId) -> &Instance {
        &self.nodes[id]
    }

    pub fn type_name(&self, id: InstanceId) -> &str {
        &self.model.elements[self.nodes[id].element].name
    }

    /// Key of an instance owning an `@id` member.
    pub fn key_of(&self, id: InstanceId) -> Option<&str> {
        let inst = &self.nodes[id];
        let member = self.model.elements[inst.element].id_member()?;
        let target = inst.field(&member.field)?.target()?;
        self.nodes[target].text.as_deref()
    }

    /// Every reference site with its resolution.
    pub fn references(&self) -> Vec<(InstanceId, &Reference)> {
        let mut out = Vec::new();
        for (i, inst) in self.nodes.iter().enumerate() {
            let mut stack: Vec<&FieldValue> = inst.fields.iter().rev().map(|(_, v)| v).collect();
            while let Some(v) = stack.pop() {
                match v {
                    FieldValue::Reference(r) => out.push((i, r)),
                    FieldValue::List(items) => stack.extend(items.iter().rev()),
                    _ => {}
                }
            }
        }
        out
    }

    /// `{"root": "n0", "nodes": {"n0": {"type", "span", "fields"}}}`.
    pub fn to_json(&self) -> Value {
        let mut nodes = Map::new();
        for (i, inst) in self.nodes.iter().enumerate() {
            let span = match inst.span {
                Span::Source(s, e) => json!([s, e]),
                Span::Predefined => json!("predefined"),
            };
            let fields: Map<String, Value> = inst.fields.iter().map(|(f, v)| (f.clone(), value_json(v))).collect();
            nodes.insert(node_name(i), json!({"type": self.type_name(i), "span": span, "fields": fields}));
        }
        json!({"root": node_name(self.root), "nodes": nodes})
    }
}

fn node_name(i: InstanceId) -> String {
    format!("n{i}")
}

/// Integral values print without a fraction, everything else as the
/// shortest decimal that reads back to the same double.
pub fn number_json(n: f64) -> Value {
    if n.fract() == 0.0 && n.abs() < 9.007_199_254_740_992e15 && !(n == 0.0 && n.is_sign_negative()) {
        Value::from(n as i64)
    } else {
        serde_json::Number::from_f64(n).map_or(Value::Null, Value::Number)
    }
}

fn value_json(v: &FieldValue) -> Value {
    match v {
        FieldValue::Text(s) => Value::String(s.clone()),
        FieldValue::Number(n) => number_json(*n),
        FieldValue::Boolean(b) => Value::Bool(*b),
        FieldValue::Instance(i) => json!({"ref": node_name(*i)}),
        FieldValue::Reference(r) => match r.resolved {
            Some(i) => json!({"ref": node_name(i)}),
            None => json!({"unresolved": r.key}),
        },
        FieldValue::List(items) => Value::Array(items.iter().map(value_json).collect()),
        FieldValue::Absent => Value::Null,
    }
}

impl fmt::Display for Asg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = serde_json::to_string_pretty(&self.to_json()).map_err(|_| fmt::Error)?;
        f.write_str(&text)
    }
}

impl Asg {
    /// Compact nested rendering for tests and reports:
    /// `Type{field=..., ...}`, basic instances as `Type(value)`, lists in
    /// brackets, references as `&key`, absent values as `_`.
    pub fn outline(&self) -> String {
        let mut out = String::new();
        self.outline_into(self.root, &mut out);
        out
    }

    fn outline_into(&self, id: InstanceId, out: &mut String) {
        let inst = &self.nodes[id];
        out.push_str(self.type_name(id));
        if inst.text.is_some() {
            if let Some(v) = inst.field("value") {
                out.push('(');
                self.outline_value(v, out);
                out.push(')');
            }
            return;
        }
        out.push('{');
        for (k, (f, v)) in inst.fields.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            out.push_str(f);
            out.push('=');
            self.outline_value(v, out);
        }
        out.push('}');
    }

    fn outline_value(&self, v: &FieldValue, out: &mut String) {
        match v {
            FieldValue::Text(s) => out.push_str(&format!("{s:?}")),
            FieldValue::Number(n) => out.push_str(&n.to_string()),
            FieldValue::Boolean(b) => out.push_str(&b.to_string()),
            FieldValue::Instance(i) => self.outline_into(*i, out),
            FieldValue::Reference(r) => {
                out.push('&');
                out.push_str(&r.key);
            }
            FieldValue::List(items) => {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    self.outline_value(item, out);
                }
                out.push(']');
            }
            FieldValue::Absent => out.push('_'),
        }
    }
}
