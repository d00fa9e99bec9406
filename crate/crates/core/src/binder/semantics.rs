use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use super::{Asg, FieldValue, InstanceId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no semantic hook for `{0}` or any of its supertypes")]
    MissingHook(String),
    #[error("cyclic evaluation through `{element}` (n{node})")]
    Cycle { element: String, node: InstanceId },
    #[error("`{element}` (n{node}) has no usable field `{field}`")]
    Field { element: String, node: InstanceId, field: String },
    #[error("{0}")]
    Other(String),
}

pub type SemanticFn<T> = Arc<dyn Fn(&Evaluator<'_, T>, InstanceId) -> Result<T, EvalError> + Send + Sync>;

/// Fold functions keyed by element type name. An element without its own
/// hook uses its nearest supertype's.
pub struct Semantics<T> {
    hooks: BTreeMap<String, SemanticFn<T>>,
}

impl<T> Clone for Semantics<T> {
    fn clone(&self) -> Self {
        Semantics { hooks: self.hooks.clone() }
    }
}

impl<T> Default for Semantics<T> {
    fn default() -> Self {
        Semantics { hooks: BTreeMap::new() }
    }
}

impl<T> std::fmt::Debug for Semantics<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.hooks.keys()).finish()
    }
}

impl<T> Semantics<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn on(
        mut self,
        element: impl Into<String>,
        hook: impl Fn(&Evaluator<'_, T>, InstanceId) -> Result<T, EvalError> + Send + Sync + 'static,
    ) -> Self {
        self.hooks.insert(element.into(), Arc::new(hook));
        self
    }
}

/// Memoizing bottom-up evaluation over an abstract syntax graph.
pub struct Evaluator<'a, T> {
    asg: &'a Asg,
    semantics: &'a Semantics<T>,
    memo: RefCell<HashMap<InstanceId, T>>,
    active: RefCell<HashSet<InstanceId>>,
}

impl<'a, T: Clone> Evaluator<'a, T> {
    pub fn new(asg: &'a Asg, semantics: &'a Semantics<T>) -> Self {
        Evaluator { asg, semantics, memo: RefCell::default(), active: RefCell::default() }
    }

    pub fn asg(&self) -> &'a Asg {
        self.asg
    }

    pub fn type_name(&self, node: InstanceId) -> &'a str {
        self.asg.type_name(node)
    }

    pub fn eval(&self, node: InstanceId) -> Result<T, EvalError> {
        if let Some(v) = self.memo.borrow().get(&node) {
            return Ok(v.clone());
        }
        let hook = self.hook(node)?;
        if !self.active.borrow_mut().insert(node) {
            return Err(EvalError::Cycle { element: self.type_name(node).to_string(), node });
        }
        let result = hook(self, node);
        self.active.borrow_mut().remove(&node);
        let v = result?;
        self.memo.borrow_mut().insert(node, v.clone());
        Ok(v)
    }

    fn hook(&self, node: InstanceId) -> Result<SemanticFn<T>, EvalError> {
        let model = &self.asg.model;
        let name = self.type_name(node);
        std::iter::once(name)
            .chain(model.ancestors(name).iter().map(|a| a.name.as_str()))
            .find_map(|n| self.semantics.hooks.get(n).cloned())
            .ok_or_else(|| EvalError::MissingHook(name.to_string()))
    }

    fn missing(&self, node: InstanceId, field: &str) -> EvalError {
        EvalError::Field { element: self.type_name(node).to_string(), node, field: field.to_string() }
    }

    pub fn field(&self, node: InstanceId, field: &str) -> Result<&'a FieldValue, EvalError> {
        self.asg.nodes[node].field(field).ok_or_else(|| self.missing(node, field))
    }

    /// Instance held by a field, following references.
    pub fn child(&self, node: InstanceId, field: &str) -> Result<InstanceId, EvalError> {
        self.field(node, field)?.target().ok_or_else(|| self.missing(node, field))
    }

    /// Evaluates the instance held by a field.
    pub fn eval_field(&self, node: InstanceId, field: &str) -> Result<T, EvalError> {
        self.eval(self.child(node, field)?)
    }

    /// The `value` of a basic instance holding a number.
    pub fn number(&self, node: InstanceId) -> Result<f64, EvalError> {
        match self.field(node, "value")? {
            FieldValue::Number(n) => Ok(*n),
            _ => Err(self.missing(node, "value")),
        }
    }
}

/// Evaluates the root of `asg`. Instances are visited children first
/// (highest id first) so that deep graphs fold without deep recursion;
/// failures along the way only count if the root needs that instance.
pub fn apply_semantics<T: Clone>(asg: &Asg, semantics: &Semantics<T>) -> Result<T, EvalError> {
    let ev = Evaluator::new(asg, semantics);
    for id in (0..asg.nodes.len()).rev() {
        if id != asg.root {
            let _ = ev.eval(id);
        }
    }
    ev.eval(asg.root)
}
