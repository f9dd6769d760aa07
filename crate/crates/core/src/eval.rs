//! Backward induction: policy evaluation, follower best response, threat values.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::policy::{Distribution, Policy};
use crate::tree::{ActionId, GameTree, NodeId, Owner};
use crate::value::{cents, Cents, Value, ValuePair};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    MissingEntry { node: NodeId },
    UnknownNode { node: NodeId },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::MissingEntry { node } => write!(f, "no policy entry at reachable node {node}"),
            EvalError::UnknownNode { node } => write!(f, "node {node} does not exist"),
        }
    }
}

/// Follower preference: higher own value, then higher leader value; on a full
/// tie the earlier label wins, which callers get by scanning in label order
/// and only replacing on `Greater`.
pub(crate) fn follower_prefers(a: &ValuePair, b: &ValuePair) -> Ordering {
    a.follower.cmp(&b.follower).then(a.leader.cmp(&b.leader))
}

fn support(policy: &Policy, n: NodeId) -> Result<&Distribution, EvalError> {
    policy.get(n).ok_or(EvalError::MissingEntry { node: n })
}

/// Nodes reachable when the owner of each node may only take actions in its
/// support; `None` for a player means all of that player's actions count.
fn reachable(tree: &GameTree, leader: &Policy, follower: Option<&Policy>) -> Result<Vec<NodeId>, EvalError> {
    let mut order = Vec::new();
    let mut stack = vec![tree.root()];
    while let Some(n) = stack.pop() {
        order.push(n);
        match tree.owner(n) {
            Owner::Leaf => {}
            Owner::Leader => {
                for (a, _) in support(leader, n)?.weights() {
                    stack.push(tree.child(n, *a).ok_or(EvalError::MissingEntry { node: n })?);
                }
            }
            Owner::Follower => match follower {
                Some(fp) => {
                    for (a, _) in support(fp, n)?.weights() {
                        stack.push(tree.child(n, *a).ok_or(EvalError::MissingEntry { node: n })?);
                    }
                }
                None => stack.extend(tree.children(n).iter().map(|e| e.child)),
            },
        }
    }
    Ok(order)
}

fn mix(tree: &GameTree, n: NodeId, d: &Distribution, vals: &BTreeMap<NodeId, ValuePair>) -> ValuePair {
    d.weights().iter().fold(ValuePair::zero(), |acc, (a, p)| {
        let c = tree.child(n, *a).expect("support checked during traversal");
        acc.add(&vals[&c].scale(p))
    })
}

/// Expected (leader, follower) value at the root under both policies.
pub fn evaluate_policy(tree: &GameTree, leader: &Policy, follower: &Policy) -> Result<ValuePair, EvalError> {
    let order = reachable(tree, leader, Some(follower))?;
    let mut vals: BTreeMap<NodeId, ValuePair> = BTreeMap::new();
    for &n in order.iter().rev() {
        let v = match tree.owner(n) {
            Owner::Leaf => ValuePair::from(tree.reward(n).expect("leaf reward")),
            Owner::Leader => mix(tree, n, support(leader, n)?, &vals),
            Owner::Follower => mix(tree, n, support(follower, n)?, &vals),
        };
        vals.insert(n, v);
    }
    Ok(vals[&tree.root()].clone())
}

/// Pure follower best response to `leader`, with the root value it yields.
///
/// The follower maximizes its own value; ties go to the larger leader value
/// and then to the lexicographically first label. Follower nodes that cannot
/// be reached under the leader's support get no entry.
pub fn best_response(tree: &GameTree, leader: &Policy) -> Result<(Policy, ValuePair), EvalError> {
    let order = reachable(tree, leader, None)?;
    let mut vals: BTreeMap<NodeId, ValuePair> = BTreeMap::new();
    let mut reply = Policy::new();
    for &n in order.iter().rev() {
        let v = match tree.owner(n) {
            Owner::Leaf => ValuePair::from(tree.reward(n).expect("leaf reward")),
            Owner::Leader => mix(tree, n, support(leader, n)?, &vals),
            Owner::Follower => {
                let mut best: Option<(ActionId, ValuePair)> = None;
                for e in tree.children(n) {
                    let v = vals[&e.child].clone();
                    match &best {
                        Some((_, b)) if follower_prefers(&v, b) != Ordering::Greater => {}
                        _ => best = Some((e.action, v)),
                    }
                }
                let (a, v) = best.expect("validated internal node has children");
                reply.set(n, Distribution::pure(a));
                v
            }
        };
        vals.insert(n, v);
    }
    Ok((reply, vals[&tree.root()].clone()))
}

/// The lowest follower value the leader can force in the subtree at `node`.
pub fn minimax_follower_value(tree: &GameTree, node: NodeId) -> Result<Value, EvalError> {
    if !tree.contains(node) {
        return Err(EvalError::UnknownNode { node });
    }
    let order = tree.post_order_from(node);
    let mut vals: BTreeMap<NodeId, Cents> = BTreeMap::new();
    for &n in &order {
        let v = match tree.owner(n) {
            Owner::Leaf => tree.reward(n).expect("leaf reward").follower,
            Owner::Leader => tree.children(n).iter().map(|e| vals[&e.child]).min().expect("children"),
            Owner::Follower => tree.children(n).iter().map(|e| vals[&e.child]).max().expect("children"),
        };
        vals.insert(n, v);
    }
    Ok(cents(vals[&node]))
}

/// Per-node outcome of the leader's threat policy, for every node of the tree.
///
/// At leader nodes the threat minimizes the follower's value; among equally
/// harsh actions it keeps the best leader value, then prefers a move that does
/// not end the game (so a threat in live play keeps holding), then label order.
/// Follower nodes reply as in `best_response`. Values are integral because the
/// threat is pure.
#[derive(Clone, Debug)]
pub struct Threats {
    pub(crate) value: Vec<(Cents, Cents)>,
    pub(crate) action: Vec<Option<ActionId>>,
}

impl Threats {
    pub fn compute(tree: &GameTree, order: &[NodeId]) -> Threats {
        let mut value = vec![(0, 0); tree.len()];
        let mut action = vec![None; tree.len()];
        for &n in order {
            let i = n.index();
            match tree.owner(n) {
                Owner::Leaf => {
                    let r = tree.reward(n).expect("leaf reward");
                    value[i] = (r.follower, r.leader);
                }
                owner => {
                    let mut best: Option<(ActionId, (Cents, Cents), bool)> = None;
                    for e in tree.children(n) {
                        let v = value[e.child.index()];
                        let live = !tree.is_leaf(e.child);
                        let better = match &best {
                            None => true,
                            Some((_, b, b_live)) => match owner {
                                Owner::Leader => {
                                    v.0 < b.0 || (v.0 == b.0 && (v.1 > b.1 || (v.1 == b.1 && live && !b_live)))
                                }
                                _ => v.0 > b.0 || (v.0 == b.0 && v.1 > b.1),
                            },
                        };
                        if better {
                            best = Some((e.action, v, live));
                        }
                    }
                    let (a, v, _) = best.expect("validated internal node has children");
                    value[i] = v;
                    action[i] = Some(a);
                }
            }
        }
        Threats { value, action }
    }

    pub fn follower_value(&self, n: NodeId) -> Cents {
        self.value[n.index()].0
    }

    pub fn leader_value(&self, n: NodeId) -> Cents {
        self.value[n.index()].1
    }

    pub fn action(&self, n: NodeId) -> Option<ActionId> {
        self.action[n.index()]
    }
}

impl core::error::Error for EvalError {}
