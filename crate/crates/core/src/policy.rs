//! Behavioral policies: per-node distributions over actions.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::tree::{ActionId, GameTree, NodeId, Owner};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicyError {
    NegativeProbability { node: NodeId },
    NotNormalized { node: NodeId },
    Empty { node: NodeId },
    UnknownAction { node: NodeId },
    WrongOwner { node: NodeId },
    UnknownNode { node: NodeId },
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::NegativeProbability { node } => write!(f, "negative probability at {node}"),
            PolicyError::NotNormalized { node } => write!(f, "probabilities at {node} do not sum to 1"),
            PolicyError::Empty { node } => write!(f, "empty distribution at {node}"),
            PolicyError::UnknownAction { node } => write!(f, "distribution at {node} names an action the node lacks"),
            PolicyError::WrongOwner { node } => write!(f, "policy entry at {node}, which the player does not own"),
            PolicyError::UnknownNode { node } => write!(f, "policy entry for missing node {node}"),
        }
    }
}

/// Probabilities over a node's actions, sorted by action, zero weights dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Distribution(Vec<(ActionId, Value)>);

impl Distribution {
    pub fn pure(a: ActionId) -> Self {
        Distribution(vec![(a, Value::one())])
    }

    /// Fails unless every weight is nonnegative and they sum to exactly one.
    pub fn new(mut weights: Vec<(ActionId, Value)>) -> Result<Self, PolicyError> {
        let node = NodeId(u32::MAX);
        if weights.iter().any(|(_, p)| *p < Value::zero()) {
            return Err(PolicyError::NegativeProbability { node });
        }
        weights.retain(|(_, p)| !p.is_zero());
        weights.sort_by_key(|(a, _)| *a);
        let mut merged: Vec<(ActionId, Value)> = Vec::with_capacity(weights.len());
        for (a, p) in weights {
            match merged.last_mut() {
                Some((b, q)) if *b == a => *q += p,
                _ => merged.push((a, p)),
            }
        }
        if merged.is_empty() {
            return Err(PolicyError::Empty { node });
        }
        let total: Value = merged.iter().map(|(_, p)| p).sum();
        if !total.is_one() {
            return Err(PolicyError::NotNormalized { node });
        }
        Ok(Distribution(merged))
    }

    pub fn weights(&self) -> &[(ActionId, Value)] {
        &self.0
    }

    pub fn prob(&self, a: ActionId) -> Value {
        self.0
            .iter()
            .find(|(b, _)| *b == a)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Value::zero)
    }

    pub fn is_pure(&self) -> bool {
        self.0.len() == 1
    }

    /// The action whose cumulative weight first exceeds `u`, for `u` in [0, 1).
    pub fn pick(&self, u: Value) -> ActionId {
        let mut acc = Value::zero();
        for (a, p) in &self.0 {
            acc += p;
            if u < acc {
                return *a;
            }
        }
        self.0[self.0.len() - 1].0
    }
}

/// Map from owned node to distribution. Used for both players.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Policy {
    entries: BTreeMap<NodeId, Distribution>,
}

impl Policy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, n: NodeId, d: Distribution) {
        self.entries.insert(n, d);
    }

    pub fn get(&self, n: NodeId) -> Option<&Distribution> {
        self.entries.get(&n)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &Distribution)> + '_ {
        self.entries.iter().map(|(n, d)| (*n, d))
    }

    pub fn is_pure(&self) -> bool {
        self.entries.values().all(Distribution::is_pure)
    }

    /// Checks that every entry sits on a node of `owner` and names real actions.
    pub fn check(&self, tree: &GameTree, owner: Owner) -> Result<(), PolicyError> {
        for (&node, d) in &self.entries {
            if !tree.contains(node) {
                return Err(PolicyError::UnknownNode { node });
            }
            if tree.owner(node) != owner {
                return Err(PolicyError::WrongOwner { node });
            }
            if d.0.iter().any(|(a, _)| tree.child(node, *a).is_none()) {
                return Err(PolicyError::UnknownAction { node });
            }
        }
        Ok(())
    }
}

impl FromIterator<(NodeId, Distribution)> for Policy {
    fn from_iter<I: IntoIterator<Item = (NodeId, Distribution)>>(iter: I) -> Self {
        Policy {
            entries: iter.into_iter().collect(),
        }
    }
}

impl core::error::Error for PolicyError {}
