//! Brute-force ground truth for small trees.
//!
//! `enumerate_pure_leader` tries every deterministic leader policy.
//! `grid_search_leader` allows every leader distribution whose probabilities
//! are multiples of a fixed step. Neither shares code with the frontier solver
//! beyond `best_response`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::eval::{best_response, EvalError};
use crate::policy::{Distribution, Policy};
use crate::solve::TargetPoint;
use crate::tree::{ActionId, GameTree, NodeId, Owner};
use crate::value::{Cap, Value, ValuePair};

/// Largest number of leader nodes `enumerate_pure_leader` accepts.
pub const PURE_LEADER_LIMIT: usize = 12;
/// Largest number of leader nodes `grid_search_leader` accepts.
pub const GRID_LEADER_LIMIT: usize = 6;
/// Largest branching factor `grid_search_leader` accepts.
pub const GRID_BRANCHING_LIMIT: usize = 3;
/// Most (distribution, child outcome) combinations examined at one node.
pub const GRID_WORK_LIMIT: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMethod {
    PureEnumeration,
    Grid,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub best_leader_value: Value,
    pub follower_value: Value,
    pub witness: Policy,
    pub method: OracleMethod,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    TooManyLeaderNodes {
        found: usize,
        limit: usize,
    },
    BranchingTooWide {
        found: usize,
        limit: usize,
    },
    UnsupportedStep,
    WorkBudget {
        node: NodeId,
    },
    /// No policy in the searched family keeps the follower within the cap.
    NoFeasiblePolicy,
    Eval(EvalError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooManyLeaderNodes { found, limit } => {
                write!(f, "{found} leader nodes exceeds the oracle limit of {limit}")
            }
            OracleError::BranchingTooWide { found, limit } => {
                write!(f, "branching {found} exceeds the grid limit of {limit}")
            }
            OracleError::UnsupportedStep => f.write_str("grid step must be 1/10 or 1/20"),
            OracleError::WorkBudget { node } => write!(f, "grid search work budget exceeded at {node}"),
            OracleError::NoFeasiblePolicy => f.write_str("no searched policy meets the cap"),
            OracleError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl From<EvalError> for OracleError {
    fn from(e: EvalError) -> Self {
        OracleError::Eval(e)
    }
}

fn better(a: &ValuePair, b: &ValuePair) -> bool {
    a.leader > b.leader || (a.leader == b.leader && a.follower > b.follower)
}

/// Best deterministic leader policy subject to the cap.
pub fn enumerate_pure_leader(tree: &GameTree, cap: Cap) -> Result<OracleResult, OracleError> {
    let leaders = tree.nodes_owned_by(Owner::Leader);
    if leaders.len() > PURE_LEADER_LIMIT {
        return Err(OracleError::TooManyLeaderNodes {
            found: leaders.len(),
            limit: PURE_LEADER_LIMIT,
        });
    }
    let arity: Vec<usize> = leaders.iter().map(|&n| tree.children(n).len()).collect();
    let mut digits = vec![0usize; leaders.len()];
    let mut best: Option<(ValuePair, Policy)> = None;
    loop {
        let policy: Policy = leaders
            .iter()
            .zip(&digits)
            .map(|(&n, &d)| (n, Distribution::pure(tree.children(n)[d].action)))
            .collect();
        let (_, v) = best_response(tree, &policy)?;
        if cap.admits(&v.follower) && best.as_ref().map_or(true, |(b, _)| better(&v, b)) {
            best = Some((v, policy));
        }
        // Odometer increment; done once every digit has wrapped.
        let mut i = 0;
        loop {
            if i == digits.len() {
                return best
                    .map(|(v, witness)| OracleResult {
                        best_leader_value: v.leader,
                        follower_value: v.follower,
                        witness,
                        method: OracleMethod::PureEnumeration,
                    })
                    .ok_or(OracleError::NoFeasiblePolicy);
            }
            digits[i] += 1;
            if digits[i] < arity[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// A grid outcome as integers over the search's scale. Every grid mix over at
/// most `GRID_LEADER_LIMIT` leader nodes has a denominator dividing
/// `grains^GRID_LEADER_LIMIT`, so this is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Scaled {
    leader: i128,
    follower: i128,
}

impl Scaled {
    fn better(&self, other: &Scaled) -> bool {
        (self.leader, self.follower) > (other.leader, other.follower)
    }

    /// Follower's view: lower follower value, then lower leader value.
    fn less_attractive(&self, other: &Scaled) -> bool {
        (self.follower, self.leader) < (other.follower, other.leader)
    }
}

/// How an outcome at a node is produced.
#[derive(Clone, Copy, Debug)]
enum Recipe {
    Leaf,
    /// Support as a bit mask over the children, the grains given to each
    /// supported child in order, and the child outcome each one aims for.
    Mix {
        mask: u8,
        grains: [u8; GRID_BRANCHING_LIMIT],
        picks: [u32; GRID_BRANCHING_LIMIT],
    },
    /// Follower goes to this child, aiming for this outcome; siblings get their threats.
    Go(ActionId, u32),
}

#[derive(Clone, Copy, Debug)]
struct Outcome {
    value: Scaled,
    recipe: Recipe,
}

/// Pruned outcomes of one node (the best leader value at each follower
/// value), plus the outcome least attractive to the follower.
struct NodeTable {
    outcomes: Vec<Outcome>,
    worst: Scaled,
    worst_action: Option<ActionId>,
}

/// All ways of writing `total` as an ordered sum of `parts` positive integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn improves(map: &BTreeMap<i128, Outcome>, v: &Scaled) -> bool {
    map.get(&v.follower).map_or(true, |cur| v.leader > cur.value.leader)
}

/// Outcome tables for every node of a tree under one grid step. Building them
/// is the expensive part and does not depend on the cap, so one search can
/// answer several caps.
pub struct GridSearch<'t> {
    tree: &'t GameTree,
    grains: usize,
    scale: i128,
    tables: BTreeMap<NodeId, NodeTable>,
}

impl<'t> GridSearch<'t> {
    pub fn new(tree: &'t GameTree, step: Value) -> Result<GridSearch<'t>, OracleError> {
        let grains = if step == Value::new(1, 10) {
            10
        } else if step == Value::new(1, 20) {
            20
        } else {
            return Err(OracleError::UnsupportedStep);
        };
        let leaders = tree.nodes_owned_by(Owner::Leader).len();
        if leaders > GRID_LEADER_LIMIT {
            return Err(OracleError::TooManyLeaderNodes {
                found: leaders,
                limit: GRID_LEADER_LIMIT,
            });
        }
        let widest = tree.node_ids().map(|n| tree.children(n).len()).max().unwrap_or(0);
        if widest > GRID_BRANCHING_LIMIT {
            return Err(OracleError::BranchingTooWide {
                found: widest,
                limit: GRID_BRANCHING_LIMIT,
            });
        }
        let scale = (grains as i128).pow(GRID_LEADER_LIMIT as u32);
        let mut tables: BTreeMap<NodeId, NodeTable> = BTreeMap::new();
        for n in tree.post_order() {
            let table = match tree.owner(n) {
                Owner::Leaf => {
                    let r = tree.reward(n).expect("leaf reward");
                    let v = Scaled {
                        leader: r.leader as i128 * scale,
                        follower: r.follower as i128 * scale,
                    };
                    NodeTable {
                        outcomes: vec![Outcome {
                            value: v,
                            recipe: Recipe::Leaf,
                        }],
                        worst: v,
                        worst_action: None,
                    }
                }
                Owner::Leader => leader_table(tree, n, grains, &tables)?,
                Owner::Follower => follower_table(tree, n, &tables),
            };
            tables.insert(n, table);
        }
        Ok(GridSearch {
            tree,
            grains,
            scale,
            tables,
        })
    }

    /// Best leader value over the grid subject to the cap.
    pub fn best(&self, cap: Cap) -> Result<OracleResult, OracleError> {
        let root = &self.tables[&self.tree.root()];
        let pick = root
            .outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| cap.admits(&self.value(o.value.follower)))
            .fold(None::<(usize, Scaled)>, |acc, (i, o)| match acc {
                Some((_, b)) if !o.value.better(&b) => acc,
                _ => Some((i, o.value)),
            });
        let (i, v) = pick.ok_or(OracleError::NoFeasiblePolicy)?;
        let mut witness = Policy::new();
        self.witness(self.tree.root(), Some(i), &mut witness);
        Ok(OracleResult {
            best_leader_value: self.value(v.leader),
            follower_value: self.value(v.follower),
            witness,
            method: OracleMethod::Grid,
        })
    }

    fn value(&self, scaled: i128) -> Value {
        Value::new(scaled, self.scale)
    }

    /// Writes the leader entries realizing outcome `pick` at `n`, or the
    /// node's worst outcome when `pick` is `None`.
    fn witness(&self, n: NodeId, pick: Option<usize>, out: &mut Policy) {
        let tree = self.tree;
        let t = &self.tables[&n];
        match (tree.owner(n), pick) {
            (Owner::Leaf, _) => {}
            (Owner::Leader, None) => {
                let a = t.worst_action.expect("leader node");
                out.set(n, Distribution::pure(a));
                self.witness(tree.child(n, a).expect("child"), None, out);
            }
            (Owner::Follower, None) => {
                for e in tree.children(n) {
                    self.witness(e.child, None, out);
                }
            }
            (_, Some(i)) => match t.outcomes[i].recipe {
                Recipe::Leaf => {}
                Recipe::Mix { mask, grains, picks } => {
                    let kids = tree.children(n);
                    let support: Vec<usize> = (0..kids.len()).filter(|i| mask & (1 << i) != 0).collect();
                    let weights = support
                        .iter()
                        .enumerate()
                        .map(|(k, &c)| (kids[c].action, Value::new(grains[k] as i128, self.grains as i128)))
                        .collect();
                    out.set(n, Distribution::new(weights).expect("grid weights sum to one"));
                    for (k, &c) in support.iter().enumerate() {
                        self.witness(kids[c].child, Some(picks[k] as usize), out);
                    }
                }
                Recipe::Go(a, j) => {
                    for e in tree.children(n) {
                        let sub = if e.action == a { Some(j as usize) } else { None };
                        self.witness(e.child, sub, out);
                    }
                }
            },
        }
    }
}

/// Best leader value over leader policies whose probabilities are multiples
/// of `step`, against a best-responding follower, subject to the cap. A lower
/// bound on the true optimum.
pub fn grid_search_leader(tree: &GameTree, step: Value, cap: Cap) -> Result<OracleResult, OracleError> {
    GridSearch::new(tree, step)?.best(cap)
}

fn leader_table(
    tree: &GameTree,
    n: NodeId,
    grains: usize,
    tables: &BTreeMap<NodeId, NodeTable>,
) -> Result<NodeTable, OracleError> {
    let kids = tree.children(n);
    let g = grains as i128;
    let mut map: BTreeMap<i128, Outcome> = BTreeMap::new();
    let mut work = 0usize;
    // Each non-empty support, then each positive split of the grains over it.
    for mask in 1u8..(1 << kids.len()) {
        let support: Vec<usize> = (0..kids.len()).filter(|i| mask & (1 << i) != 0).collect();
        let tabs: Vec<&[Outcome]> = support
            .iter()
            .map(|&i| tables[&kids[i].child].outcomes.as_slice())
            .collect();
        let combos: usize = tabs.iter().map(|t| t.len()).product();
        for split in compositions(grains, support.len()) {
            work += combos;
            if work > GRID_WORK_LIMIT {
                return Err(OracleError::WorkBudget { node: n });
            }
            let mut shares = [0u8; GRID_BRANCHING_LIMIT];
            for (k, &s) in split.iter().enumerate() {
                shares[k] = s as u8;
            }
            let mut idx = [0u32; GRID_BRANCHING_LIMIT];
            loop {
                let (mut l, mut f) = (0i128, 0i128);
                for (k, t) in tabs.iter().enumerate() {
                    let v = t[idx[k] as usize].value;
                    l += split[k] as i128 * v.leader;
                    f += split[k] as i128 * v.follower;
                }
                debug_assert!(l % g == 0 && f % g == 0, "grid value left the scale");
                let value = Scaled {
                    leader: l / g,
                    follower: f / g,
                };
                if improves(&map, &value) {
                    let recipe = Recipe::Mix {
                        mask,
                        grains: shares,
                        picks: idx,
                    };
                    map.insert(value.follower, Outcome { value, recipe });
                }
                let mut k = 0;
                while k < tabs.len() {
                    idx[k] += 1;
                    if (idx[k] as usize) < tabs[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == tabs.len() {
                    break;
                }
            }
        }
    }
    let mut worst: Option<(ActionId, Scaled)> = None;
    for e in kids {
        let w = tables[&e.child].worst;
        if worst.map_or(true, |(_, b)| w.less_attractive(&b)) {
            worst = Some((e.action, w));
        }
    }
    let (a, w) = worst.expect("internal node has children");
    Ok(NodeTable {
        outcomes: map.into_values().collect(),
        worst: w,
        worst_action: Some(a),
    })
}

fn follower_table(tree: &GameTree, n: NodeId, tables: &BTreeMap<NodeId, NodeTable>) -> NodeTable {
    let kids = tree.children(n);
    let mut map: BTreeMap<i128, Outcome> = BTreeMap::new();
    for (i, e) in kids.iter().enumerate() {
        for (j, o) in tables[&e.child].outcomes.iter().enumerate() {
            // The follower must strictly prefer this outcome to every sibling's
            // worst, or tie it fully and come earlier in label order.
            let chosen = kids.iter().enumerate().filter(|(k, _)| *k != i).all(|(k, s)| {
                let t = tables[&s.child].worst;
                t.less_attractive(&o.value) || (t == o.value && i < k)
            });
            if chosen && improves(&map, &o.value) {
                map.insert(
                    o.value.follower,
                    Outcome {
                        value: o.value,
                        recipe: Recipe::Go(e.action, j as u32),
                    },
                );
            }
        }
    }
    // With every child at its worst, the follower takes the most attractive.
    let mut worst: Option<Scaled> = None;
    for e in kids {
        let w = tables[&e.child].worst;
        if worst.map_or(true, |b| b.less_attractive(&w)) {
            worst = Some(w);
        }
    }
    NodeTable {
        outcomes: map.into_values().collect(),
        worst: worst.expect("internal node has children"),
        worst_action: None,
    }
}

/// True iff the follower's best response to `policy` lands exactly on `expected`.
pub fn verify_point(tree: &GameTree, policy: &Policy, expected: &TargetPoint) -> bool {
    match best_response(tree, policy) {
        Ok((_, v)) => v == expected.value,
        Err(_) => false,
    }
}

impl OracleResult {
    /// Re-evaluates the witness and checks it reproduces the recorded values.
    pub fn witness_holds(&self, tree: &GameTree) -> bool {
        match best_response(tree, &self.witness) {
            Ok((_, v)) => v.leader == self.best_leader_value && v.follower == self.follower_value,
            Err(_) => false,
        }
    }
}

impl core::error::Error for OracleError {}
