use std::collections::HashMap;
use std::sync::Arc;

use super::{Asg, BindError, FieldValue, Instance, InstanceId, Span};
use crate::model::{ElementId, ElementKind, Model, ValueType};

/// Field value of an instance supplied before parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum DataValue {
    Text(String),
    Number(f64),
    Boolean(bool),
    Instance(InstanceData),
    List(Vec<DataValue>),
    Absent,
}

impl From<f64> for DataValue {
    fn from(n: f64) -> Self {
        DataValue::Number(n)
    }
}

impl From<&str> for DataValue {
    fn from(s: &str) -> Self {
        DataValue::Text(s.to_string())
    }
}

impl From<bool> for DataValue {
    fn from(b: bool) -> Self {
        DataValue::Boolean(b)
    }
}

impl From<InstanceData> for DataValue {
    fn from(d: InstanceData) -> Self {
        DataValue::Instance(d)
    }
}

/// An instance described by element name and field values. Scalars given
/// for element-typed members are wrapped into basic instances.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceData {
    pub element: String,
    pub fields: Vec<(String, DataValue)>,
}

impl InstanceData {
    pub fn new(element: impl Into<String>) -> Self {
        InstanceData { element: element.into(), fields: Vec::new() }
    }

    pub fn with(mut self, field: impl Into<String>, value: impl Into<DataValue>) -> Self {
        self.fields.push((field.into(), value.into()));
        self
    }
}

/// A normalized predefined instance.
#[derive(Debug, Clone)]
enum Node {
    Basic { element: ElementId, value: Option<FieldValue>, text: String },
    Composite { element: ElementId, fields: Vec<(String, Slot)> },
}

#[derive(Debug, Clone)]
enum Slot {
    One(Node),
    Many(Vec<Node>),
    Absent,
}

#[derive(Debug, Clone)]
struct Entry {
    element: ElementId,
    key: String,
    node: Node,
    data: InstanceData,
}

/// Instances registered ahead of parsing, looked up by element type and id
/// text.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    model: Arc<Model>,
    entries: Vec<Entry>,
}

fn invalid(msg: String) -> BindError {
    BindError::InvalidData(msg)
}

impl SymbolTable {
    pub fn new(model: Arc<Model>) -> Self {
        SymbolTable { model, entries: Vec::new() }
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds an instance whose type owns an `@id` member.
    pub fn register(&mut self, data: InstanceData) -> Result<(), BindError> {
        let node = self.normalize(&data)?;
        let Node::Composite { element, fields } = &node else {
            return Err(invalid(format!("`{}` has no @id member", data.element)));
        };
        let e = &self.model.elements[*element];
        let id = e.id_member().ok_or_else(|| invalid(format!("`{}` has no @id member", e.name)))?;
        let key = match fields.iter().find(|(f, _)| *f == id.field).map(|(_, s)| s) {
            Some(Slot::One(Node::Basic { text, .. })) => text.clone(),
            _ => return Err(invalid(format!("`{}` needs a scalar value for its id `{}`", e.name, id.field))),
        };
        if self.entries.iter().any(|x| x.element == *element && x.key == key) {
            return Err(BindError::DuplicateId { element: e.name.clone(), key });
        }
        let element = *element;
        self.entries.push(Entry { element, key, node, data });
        Ok(())
    }

    /// Registered instances of `element` or a subtype with this key.
    pub fn lookup(&self, element: &str, key: &str) -> Vec<&InstanceData> {
        self.candidates(self.model.id_of(element), key).into_iter().map(|i| &self.entries[i].data).collect()
    }

    fn candidates(&self, target: Option<ElementId>, key: &str) -> Vec<usize> {
        let Some(target) = target else { return Vec::new() };
        let names = &self.model.elements;
        (0..self.entries.len())
            .filter(|&i| {
                self.entries[i].key == key && self.model.is_subtype_of(&names[self.entries[i].element].name, &names[target].name)
            })
            .collect()
    }

    fn normalize(&self, data: &InstanceData) -> Result<Node, BindError> {
        let model = &self.model;
        let id = model.id_of(&data.element).ok_or_else(|| invalid(format!("unknown element `{}`", data.element)))?;
        let e = &model.elements[id];
        match e.kind {
            ElementKind::Selection => Err(invalid(format!("`{}` is abstract", e.name))),
            ElementKind::Basic => {
                let value = match data.fields.as_slice() {
                    [] => None,
                    [(f, v)] if f == "value" => Some(v),
                    _ => return Err(invalid(format!("basic `{}` takes a single `value` field", e.name))),
                };
                self.basic(id, value)
            }
            ElementKind::Composite => {
                for (f, _) in &data.fields {
                    if e.member(f).is_none_or(|m| m.is_token()) {
                        return Err(invalid(format!("`{}` has no member `{f}`", e.name)));
                    }
                }
                let mut fields = Vec::new();
                for m in e.members.iter().filter(|m| !m.is_token()) {
                    let target = m.element_name().expect("element member");
                    let given = data.fields.iter().find(|(f, _)| *f == m.field).map(|(_, v)| v);
                    let slot = match given {
                        None | Some(DataValue::Absent) if m.bounds().min == 0 => {
                            if m.is_repeated() { Slot::Many(Vec::new()) } else { Slot::Absent }
                        }
                        None | Some(DataValue::Absent) => {
                            return Err(invalid(format!("`{}` needs a value for `{}`", e.name, m.field)))
                        }
                        Some(DataValue::List(items)) if m.is_repeated() => {
                            Slot::Many(items.iter().map(|v| self.value_for(target, v)).collect::<Result<_, _>>()?)
                        }
                        Some(v) if !m.is_repeated() => Slot::One(self.value_for(target, v)?),
                        Some(_) => return Err(invalid(format!("`{}.{}` takes a list", e.name, m.field))),
                    };
                    fields.push((m.field.clone(), slot));
                }
                Ok(Node::Composite { element: id, fields })
            }
        }
    }

    /// A value for a member typed `target`.
    fn value_for(&self, target: &str, v: &DataValue) -> Result<Node, BindError> {
        let model = &self.model;
        match v {
            DataValue::Instance(d) => {
                if !model.is_subtype_of(&d.element, target) {
                    return Err(invalid(format!("`{}` is not a `{target}`", d.element)));
                }
                self.normalize(d)
            }
            DataValue::List(_) | DataValue::Absent => Err(invalid(format!("expected a `{target}` value"))),
            scalar => {
                let wanted = match scalar {
                    DataValue::Text(_) => ValueType::Text,
                    DataValue::Number(_) => ValueType::Number,
                    _ => ValueType::Boolean,
                };
                let basics: Vec<_> = model
                    .concrete_descendants(target)
                    .into_iter()
                    .filter(|d| d.kind == ElementKind::Basic && d.value_type() == wanted)
                    .collect();
                match basics.as_slice() {
                    [b] => self.basic(model.id_of(&b.name).expect("declared"), Some(scalar)),
                    [] => Err(invalid(format!("no basic `{target}` holds a {} value", wanted.keyword()))),
                    _ => Err(invalid(format!("scalar for `{target}` is ambiguous; give an instance"))),
                }
            }
        }
    }

    fn basic(&self, element: ElementId, value: Option<&DataValue>) -> Result<Node, BindError> {
        let e = &self.model.elements[element];
        let want = e.value_type();
        let value = match (value, want) {
            (None, _) => None,
            (Some(DataValue::Text(s)), ValueType::Text) => Some(FieldValue::Text(s.clone())),
            (Some(DataValue::Number(n)), ValueType::Number) if n.is_finite() => Some(FieldValue::Number(*n)),
            (Some(DataValue::Boolean(b)), ValueType::Boolean) => Some(FieldValue::Boolean(*b)),
            _ => return Err(invalid(format!("`{}` holds a {} value", e.name, want.keyword()))),
        };
        let text = value.as_ref().and_then(|v| match v {
            FieldValue::Text(s) => Some(s.clone()),
            FieldValue::Number(n) => Some(n.to_string()),
            FieldValue::Boolean(b) => Some(b.to_string()),
            _ => None,
        });
        Ok(Node::Basic { element, value, text: text.unwrap_or_default() })
    }
}

fn materialize(node: &Node, nodes: &mut Vec<Instance>) -> InstanceId {
    match node {
        Node::Basic { element, value, text } => {
            nodes.push(Instance {
                element: *element,
                span: Span::Predefined,
                fields: value.clone().map(|v| vec![("value".to_string(), v)]).unwrap_or_default(),
                text: Some(text.clone()),
            });
            nodes.len() - 1
        }
        Node::Composite { element, fields } => {
            let id = nodes.len();
            nodes.push(Instance { element: *element, span: Span::Predefined, fields: Vec::new(), text: None });
            let mut out = Vec::with_capacity(fields.len());
            for (f, slot) in fields {
                let v = match slot {
                    Slot::One(n) => FieldValue::Instance(materialize(n, nodes)),
                    Slot::Many(items) => FieldValue::List(items.iter().map(|n| FieldValue::Instance(materialize(n, nodes))).collect()),
                    Slot::Absent => FieldValue::Absent,
                };
                out.push((f.clone(), v));
            }
            nodes[id].fields = out;
            id
        }
    }
}

/// Binds every reference of `asg` by target type and id text, subtypes
/// included. Parsed instances and table entries share one key space; a
/// duplicate key for the same element is an error. Predefined instances
/// that are referenced are appended to the graph.
pub fn resolve_references(mut asg: Asg, table: &SymbolTable) -> Result<Asg, BindError> {
    let model = asg.model.clone();
    let names = &model.elements;

    // pass 1: every instance owning an id
    let mut parsed: Vec<(ElementId, String, InstanceId)> = Vec::new();
    let mut seen: HashMap<(ElementId, &str), ()> = HashMap::new();
    for e in &table.entries {
        seen.insert((e.element, e.key.as_str()), ());
    }
    for i in 0..asg.nodes.len() {
        if let Some(key) = asg.key_of(i) {
            let element = asg.nodes[i].element;
            if seen.contains_key(&(element, key)) || parsed.iter().any(|(e, k, _)| *e == element && k == key) {
                return Err(BindError::DuplicateId { element: names[element].name.clone(), key: key.to_string() });
            }
            parsed.push((element, key.to_string(), i));
        }
    }

    // pass 2: bind
    let mut pulled: HashMap<usize, InstanceId> = HashMap::new();
    let mut sites: Vec<(InstanceId, Vec<usize>)> = Vec::new();
    for (i, inst) in asg.nodes.iter().enumerate() {
        for (f, (_, v)) in inst.fields.iter().enumerate() {
            collect_paths(v, &mut vec![f], i, &mut sites);
        }
    }
    for (i, path) in sites {
        let (target, key, site) = match value_at(&asg.nodes[i], &path) {
            FieldValue::Reference(r) => (r.target, r.key.clone(), r.site),
            _ => unreachable!("collected reference path"),
        };
        let local: Vec<InstanceId> = parsed
            .iter()
            .filter(|(e, k, _)| *k == key && model.is_subtype_of(&names[*e].name, &names[target].name))
            .map(|(_, _, id)| *id)
            .collect();
        let remote = table.candidates(Some(target), &key);
        let resolved = match (local.as_slice(), remote.as_slice()) {
            ([id], []) => *id,
            ([], [t]) => *pulled.entry(*t).or_insert_with(|| materialize(&table.entries[*t].node, &mut asg.nodes)),
            ([], []) => {
                return Err(BindError::Unresolved { key, expected: names[target].name.clone(), span: site });
            }
            (a, b) => {
                return Err(BindError::AmbiguousReference {
                    key,
                    expected: names[target].name.clone(),
                    span: site,
                    count: a.len() + b.len(),
                })
            }
        };
        if let FieldValue::Reference(r) = value_at_mut(&mut asg.nodes[i], &path) {
            r.resolved = Some(resolved);
        }
    }
    Ok(asg)
}

fn collect_paths(v: &FieldValue, path: &mut Vec<usize>, owner: InstanceId, out: &mut Vec<(InstanceId, Vec<usize>)>) {
    match v {
        FieldValue::Reference(_) => out.push((owner, path.clone())),
        FieldValue::List(items) => {
            for (k, item) in items.iter().enumerate() {
                path.push(k);
                collect_paths(item, path, owner, out);
                path.pop();
            }
        }
        _ => {}
    }
}

fn value_at<'a>(inst: &'a Instance, path: &[usize]) -> &'a FieldValue {
    let mut v = &inst.fields[path[0]].1;
    for &k in &path[1..] {
        let FieldValue::List(items) = v else { unreachable!() };
        v = &items[k];
    }
    v
}

fn value_at_mut<'a>(inst: &'a mut Instance, path: &[usize]) -> &'a mut FieldValue {
    let mut v = &mut inst.fields[path[0]].1;
    for &k in &path[1..] {
        let FieldValue::List(items) = v else { unreachable!() };
        v = &mut items[k];
    }
    v
}
