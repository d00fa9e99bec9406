use std::collections::VecDeque;
use std::sync::Arc;

use super::{Asg, BindError, FieldValue, Instance, InstanceId, Reference, Span};
use crate::grammar::{Binding, Grammar, ItemKind, NonterminalKind, Origin};
use crate::lexer::{Token, TokenGraph};
use crate::model::{ElementId, ElementKind, Model, ReferenceKind, ValueType};
use crate::parser::{ParseTree, TreeNode};

#[derive(Default)]
enum Val {
    #[default]
    None,
    Inst(InstanceId),
    List(VecDeque<FieldValue>),
}

impl Val {
    fn into_field(self) -> FieldValue {
        match self {
            Val::None => FieldValue::Absent,
            Val::Inst(i) => FieldValue::Instance(i),
            Val::List(items) => FieldValue::List(items.into()),
        }
    }
}

struct Builder<'a> {
    model: &'a Model,
    grammar: &'a Grammar,
    tokens: &'a TokenGraph,
    instances: Vec<Instance>,
}

impl Builder<'_> {
    fn basic(&mut self, token: &Token) -> Result<Option<InstanceId>, BindError> {
        let Some(e) = self.grammar.terminals[token.class].element else { return Ok(None) };
        let element = &self.model.elements[e];
        if element.kind != ElementKind::Basic {
            return Ok(None);
        }
        let text = self.tokens.text(token);
        let span = (token.start, token.end);
        let fail = |kind| BindError::Conversion { element: element.name.clone(), text: text.to_string(), kind, span };
        let value = match element.value_type() {
            ValueType::Text => Some(FieldValue::Text(text.to_string())),
            ValueType::Number => match text.parse::<f64>() {
                Ok(n) if n.is_finite() => Some(FieldValue::Number(n)),
                _ => return Err(fail("number")),
            },
            ValueType::Boolean => match text {
                "true" => Some(FieldValue::Boolean(true)),
                "false" => Some(FieldValue::Boolean(false)),
                _ => return Err(fail("boolean")),
            },
            ValueType::None => None,
        };
        self.instances.push(Instance {
            element: e,
            span: Span::Source(token.start, token.end),
            fields: value.map(|v| vec![("value".to_string(), v)]).unwrap_or_default(),
            text: Some(text.to_string()),
        });
        Ok(Some(self.instances.len() - 1))
    }

    fn reference(&self, token: &Token, target: ElementId) -> FieldValue {
        FieldValue::Reference(Reference {
            target,
            key: self.tokens.text(token).to_string(),
            site: (token.start, token.end),
            resolved: None,
        })
    }

    /// Value of a leaf standing for an element occurrence.
    fn leaf(&mut self, token: usize) -> Result<Val, BindError> {
        let token = self.tokens.tokens[token];
        Ok(self.basic(&token)?.map_or(Val::None, Val::Inst))
    }
}

/// Builds the instance graph of a parse tree. References are left
/// unresolved; see [`super::resolve_references`].
pub fn instantiate(
    tree: &ParseTree,
    grammar: &Grammar,
    tokens: &TokenGraph,
    model: &Arc<Model>,
) -> Result<Asg, BindError> {
    let mut b = Builder { model, grammar, tokens, instances: Vec::new() };
    let n = tree.nodes.len();
    let mut vals: Vec<Val> = (0..n).map(|_| Val::None).collect();
    let mut text_end = vec![0usize; n];

    for i in (0..n).rev() {
        let TreeNode::Inner { symbol, production, start, children, .. } = &tree.nodes[i] else { continue };
        let p = grammar.production(*production);
        text_end[i] = children
            .iter()
            .rev()
            .find_map(|&c| match &tree.nodes[c] {
                TreeNode::Leaf { token } => Some(tokens.tokens[*token].end),
                TreeNode::Inner { start, end, .. } => (start < end).then_some(text_end[c]),
            })
            .unwrap_or(*start);

        vals[i] = match &p.origin {
            Origin::Composite { element, .. } => {
                let e = &model.elements[*element];
                let mut present: Vec<(&str, FieldValue)> = Vec::new();
                for (&c, binding) in children.iter().zip(&p.bindings) {
                    let Binding::Field(f) = binding else { continue };
                    let m = e.member(f).expect("bound member is declared");
                    let value = match &tree.nodes[c] {
                        TreeNode::Leaf { token } if m.reference == ReferenceKind::Reference => {
                            let target = model.id_of(m.element_name().expect("reference to element")).expect("declared");
                            b.reference(&tokens.tokens[*token], target)
                        }
                        TreeNode::Leaf { token } => b.leaf(*token)?.into_field(),
                        TreeNode::Inner { .. } => std::mem::take(&mut vals[c]).into_field(),
                    };
                    present.push((f.as_str(), value));
                }
                let mut fields = Vec::with_capacity(e.members.len());
                for m in e.members.iter().filter(|m| !m.is_token()) {
                    let value = match present.iter().position(|(f, _)| *f == m.field) {
                        Some(k) => std::mem::replace(&mut present[k].1, FieldValue::Absent),
                        None if m.is_repeated() => FieldValue::List(Vec::new()),
                        None => FieldValue::Absent,
                    };
                    fields.push((m.field.clone(), value));
                }
                b.instances.push(Instance { element: *element, span: Span::Source(*start, text_end[i]), fields, text: None });
                Val::Inst(b.instances.len() - 1)
            }
            Origin::Selection { .. } => {
                let k = p.bindings.iter().position(|x| *x == Binding::Sub).expect("selection has an alternative");
                match &tree.nodes[children[k]] {
                    TreeNode::Leaf { token } => b.leaf(*token)?,
                    TreeNode::Inner { .. } => std::mem::take(&mut vals[children[k]]),
                }
            }
            Origin::ListRecursive { .. } | Origin::ListBase { .. } => {
                let NonterminalKind::List { item, .. } = grammar.nonterminals[*symbol].kind else {
                    unreachable!("list production on a list nonterminal")
                };
                let mut items = VecDeque::new();
                let mut rest = None;
                for (&c, binding) in children.iter().zip(&p.bindings) {
                    match binding {
                        Binding::Item => {
                            let v = match (&tree.nodes[c], item) {
                                (TreeNode::Leaf { .. }, ItemKind::Token) => continue,
                                (TreeNode::Leaf { token }, ItemKind::Reference(t)) => b.reference(&tokens.tokens[*token], t),
                                (TreeNode::Leaf { token }, _) => b.leaf(*token)?.into_field(),
                                (TreeNode::Inner { .. }, _) => std::mem::take(&mut vals[c]).into_field(),
                            };
                            items.push_back(v);
                        }
                        Binding::Rest => rest = Some(c),
                        _ => {}
                    }
                }
                if let Some(r) = rest {
                    if let Val::List(tail) = std::mem::take(&mut vals[r]) {
                        items.extend(tail);
                    }
                }
                Val::List(items)
            }
        };
    }

    let Val::Inst(root) = std::mem::take(&mut vals[0]) else {
        unreachable!("the start element is composite or abstract")
    };
    Ok(renumber(model.clone(), b.instances, root))
}

/// Pre-order numbering from the root following containment.
fn renumber(model: Arc<Model>, instances: Vec<Instance>, root: InstanceId) -> Asg {
    let mut order = Vec::with_capacity(instances.len());
    let mut stack = vec![root];
    while let Some(i) = stack.pop() {
        order.push(i);
        let mut contained = Vec::new();
        let mut values: Vec<&FieldValue> = instances[i].fields.iter().map(|(_, v)| v).collect();
        values.reverse();
        while let Some(v) = values.pop() {
            match v {
                FieldValue::Instance(k) => contained.push(*k),
                FieldValue::List(items) => values.extend(items.iter().rev()),
                _ => {}
            }
        }
        stack.extend(contained.into_iter().rev());
    }
    let mut new_id = vec![usize::MAX; instances.len()];
    for (n, &old) in order.iter().enumerate() {
        new_id[old] = n;
    }
    let mut slots: Vec<Option<Instance>> = instances.into_iter().map(Some).collect();
    let nodes = order
        .iter()
        .map(|&old| {
            let mut inst = slots[old].take().expect("each instance is contained once");
            for (_, v) in &mut inst.fields {
                remap(v, &new_id);
            }
            inst
        })
        .collect();
    Asg { model, root: 0, nodes }
}

fn remap(v: &mut FieldValue, new_id: &[usize]) {
    let mut stack = vec![v];
    while let Some(v) = stack.pop() {
        match v {
            FieldValue::Instance(k) => *k = new_id[*k],
            FieldValue::List(items) => stack.extend(items.iter_mut()),
            _ => {}
        }
    }
}
