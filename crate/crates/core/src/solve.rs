//! Bottom-up frontier solve, target extraction, and policy unrolling.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::One;

use crate::eval::Threats;
use crate::frontier::{leaf_frontier, merge_follower, merge_leader, Frontier, Origin, SigmaThresholds};
use crate::policy::{Distribution, Policy};
use crate::tree::{ActionId, GameTree, NodeId, Owner};
use crate::value::{cents, Cap, Cents, PayoffPair, Value, ValuePair};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveError {
    InvalidTree(Vec<String>),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::InvalidTree(errs) => {
                write!(f, "invalid tree: ")?;
                for (i, e) in errs.iter().take(5).enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    f.write_str(e)?;
                }
                if errs.len() > 5 {
                    write!(f, "; and {} more", errs.len() - 5)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtractError {
    EmptyFrontier,
    /// Every element lies above the cap; `min_follower` is the lowest reachable value.
    InfeasibleCap {
        min_follower: Value,
    },
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractError::EmptyFrontier => f.write_str("frontier is empty"),
            ExtractError::InfeasibleCap { min_follower } => {
                write!(
                    f,
                    "cap is infeasible: the follower can always secure at least {min_follower}"
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnrollError {
    NotOnFrontier,
    /// A target could not be located one level down; the frontier map does not
    /// belong to this tree.
    Inconsistent {
        node: NodeId,
    },
}

impl fmt::Display for UnrollError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnrollError::NotOnFrontier => f.write_str("target is not an element of the root frontier"),
            UnrollError::Inconsistent { node } => write!(f, "no frontier element realizes the target at {node}"),
        }
    }
}

/// Which root element a target came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Support {
    Point(usize),
    /// Interior of a segment; `lambda` is the weight on its higher-follower end.
    Segment {
        index: usize,
        lambda: Value,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetPoint {
    pub value: ValuePair,
    pub support: Support,
}

impl TargetPoint {
    pub fn leader(&self) -> Value {
        self.value.leader.clone()
    }

    pub fn follower(&self) -> Value {
        self.value.follower.clone()
    }
}

/// Frontiers for every node. Structurally identical subtrees share one frontier.
#[derive(Clone, Debug)]
pub struct FrontierMap {
    root: NodeId,
    ids: Vec<u32>,
    pool: Vec<Frontier>,
    threats: Threats,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Leaf(PayoffPair),
    Leader(Vec<(ActionId, u32)>),
    Follower(Vec<(ActionId, u32, Cents)>),
}

impl FrontierMap {
    pub fn frontier(&self, n: NodeId) -> &Frontier {
        &self.pool[self.ids[n.index()] as usize]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn root_frontier(&self) -> &Frontier {
        self.frontier(self.root)
    }

    /// Number of distinct frontiers actually computed.
    pub fn distinct(&self) -> usize {
        self.pool.len()
    }

    pub fn max_segments(&self) -> usize {
        self.pool.iter().map(|f| f.segments().len()).max().unwrap_or(0)
    }

    pub fn max_points(&self) -> usize {
        self.pool.iter().map(|f| f.points().len()).max().unwrap_or(0)
    }

    /// The threat value: the lowest follower value the leader can force below `n`.
    pub fn minimax(&self, n: NodeId) -> Value {
        cents(self.threats.follower_value(n))
    }

    pub fn threats(&self) -> &Threats {
        &self.threats
    }
}

pub fn solve_frontier(tree: &GameTree) -> Result<FrontierMap, SolveError> {
    let rep = tree.validate();
    if !rep.is_valid() {
        return Err(SolveError::InvalidTree(rep.errors));
    }
    let order = tree.post_order();
    let threats = Threats::compute(tree, &order);
    let mut ids = vec![u32::MAX; tree.len()];
    let mut pool: Vec<Frontier> = Vec::new();
    let mut memo: BTreeMap<Key, u32> = BTreeMap::new();

    for &n in &order {
        let key = match tree.owner(n) {
            Owner::Leaf => Key::Leaf(tree.reward(n).expect("leaf reward")),
            Owner::Leader => Key::Leader(
                tree.children(n)
                    .iter()
                    .map(|e| (e.action, ids[e.child.index()]))
                    .collect(),
            ),
            Owner::Follower => Key::Follower(
                tree.children(n)
                    .iter()
                    .map(|e| (e.action, ids[e.child.index()], threats.follower_value(e.child)))
                    .collect(),
            ),
        };
        let id = match memo.get(&key) {
            Some(&id) => id,
            None => {
                let f = match &key {
                    Key::Leaf(r) => leaf_frontier(*r),
                    Key::Leader(kids) => {
                        let refs: Vec<(ActionId, &Frontier)> =
                            kids.iter().map(|(a, id)| (*a, &pool[*id as usize])).collect();
                        merge_leader(&refs)
                    }
                    Key::Follower(kids) => {
                        let refs: Vec<(ActionId, &Frontier)> =
                            kids.iter().map(|(a, id, _)| (*a, &pool[*id as usize])).collect();
                        let t: Vec<(ActionId, Value)> = kids.iter().map(|(a, _, m)| (*a, cents(*m))).collect();
                        merge_follower(&refs, &SigmaThresholds::from_threats(&t))
                    }
                };
                let id = pool.len() as u32;
                pool.push(f);
                memo.insert(key, id);
                id
            }
        };
        ids[n.index()] = id;
    }
    Ok(FrontierMap {
        root: tree.root(),
        ids,
        pool,
        threats,
    })
}

fn better(a: &ValuePair, b: &ValuePair) -> bool {
    a.leader > b.leader || (a.leader == b.leader && a.follower > b.follower)
}

/// The element with the largest leader value; ties go to the larger follower
/// value, then to the earlier point.
pub fn extract_equilibrium(root: &Frontier) -> Result<TargetPoint, ExtractError> {
    let mut best: Option<(usize, ValuePair)> = None;
    for (i, p) in root.points().iter().enumerate() {
        if best.as_ref().map_or(true, |(_, b)| better(&p.value, b)) {
            best = Some((i, p.value.clone()));
        }
    }
    best.map(|(i, v)| TargetPoint {
        value: v,
        support: Support::Point(i),
    })
    .ok_or(ExtractError::EmptyFrontier)
}

/// Best leader value with the follower held to at most the cap. Segments that
/// straddle the cap contribute their point at the cap. Ties as in
/// `extract_equilibrium`, points ahead of segment interiors.
pub fn extract_punishment(root: &Frontier, cap: Cap) -> Result<TargetPoint, ExtractError> {
    let theta = match cap {
        Cap::Unbounded => return extract_equilibrium(root),
        Cap::At(t) => t,
    };
    if root.is_empty() {
        return Err(ExtractError::EmptyFrontier);
    }
    let mut best: Option<TargetPoint> = None;
    let mut offer = |cand: TargetPoint| {
        if best.as_ref().map_or(true, |b| better(&cand.value, &b.value)) {
            best = Some(cand);
        }
    };
    for (i, p) in root.points().iter().enumerate() {
        if p.value.follower <= theta {
            offer(TargetPoint {
                value: p.value.clone(),
                support: Support::Point(i),
            });
        }
    }
    for (i, s) in root.segments().iter().enumerate() {
        let (lo, hi) = root.segment_ends(s);
        if lo.follower < theta && theta < hi.follower {
            let lambda = (&theta - &lo.follower) / (&hi.follower - &lo.follower);
            offer(TargetPoint {
                value: lo.lerp(hi, &lambda),
                support: Support::Segment { index: i, lambda },
            });
        }
    }
    best.ok_or(ExtractError::InfeasibleCap {
        min_follower: root.min_follower().expect("non-empty"),
    })
}

/// Element of `f` realizing exactly `v`, as the origin to follow.
fn locate(f: &Frontier, v: &ValuePair) -> Option<Origin> {
    if let Ok(i) = f
        .points()
        .binary_search_by(|p| p.value.follower.cmp(&v.follower).then(p.value.leader.cmp(&v.leader)))
    {
        return Some(f.points()[i].origin.clone());
    }
    f.segments().iter().find_map(|s| {
        let (lo, hi) = f.segment_ends(s);
        if lo.follower < v.follower && v.follower < hi.follower {
            let t = (&v.follower - &lo.follower) / (&hi.follower - &lo.follower);
            (lo.lerp(hi, &t) == *v).then(|| s.origin.clone())
        } else {
            None
        }
    })
}

fn target_on_root(root: &Frontier, t: &TargetPoint) -> bool {
    match &t.support {
        Support::Point(i) => root.points().get(*i).is_some_and(|p| p.value == t.value),
        Support::Segment { index, lambda } => root.segments().get(*index).is_some_and(|s| {
            let (lo, hi) = root.segment_ends(s);
            lo.lerp(hi, lambda) == t.value
        }),
    }
}

/// Leader policy whose best-response outcome is exactly `target`.
///
/// Along the path to the target, leader nodes follow the element's origin
/// (randomizing across two children for a mixed segment) and follower nodes
/// descend into the origin child. Every other child of those follower nodes
/// gets the threat policy, which holds the follower to the threat value.
pub fn unroll_policy(tree: &GameTree, map: &FrontierMap, target: &TargetPoint) -> Result<Policy, UnrollError> {
    if !target_on_root(map.root_frontier(), target) {
        return Err(UnrollError::NotOnFrontier);
    }
    enum Job {
        Aim(NodeId, ValuePair),
        Threat(NodeId),
    }
    let mut policy = Policy::new();
    let mut jobs = vec![Job::Aim(tree.root(), target.value.clone())];
    while let Some(job) = jobs.pop() {
        match job {
            Job::Threat(n) => match tree.owner(n) {
                Owner::Leaf => {}
                Owner::Leader => {
                    let a = map.threats.action(n).expect("internal node");
                    policy.set(n, Distribution::pure(a));
                    jobs.push(Job::Threat(tree.child(n, a).expect("threat action exists")));
                }
                Owner::Follower => jobs.extend(tree.children(n).iter().map(|e| Job::Threat(e.child))),
            },
            Job::Aim(n, v) => {
                let owner = tree.owner(n);
                if owner == Owner::Leaf {
                    if ValuePair::from(tree.reward(n).expect("leaf reward")) != v {
                        return Err(UnrollError::Inconsistent { node: n });
                    }
                    continue;
                }
                let origin = locate(map.frontier(n), &v).ok_or(UnrollError::Inconsistent { node: n })?;
                let child = |a: ActionId| tree.child(n, a).ok_or(UnrollError::Inconsistent { node: n });
                match (owner, origin) {
                    (Owner::Leader, Origin::Child(a)) => {
                        policy.set(n, Distribution::pure(a));
                        jobs.push(Job::Aim(child(a)?, v));
                    }
                    (Owner::Leader, Origin::Mix { lo, hi }) => {
                        let lambda = (&v.follower - &lo.1.follower) / (&hi.1.follower - &lo.1.follower);
                        let d = Distribution::new(vec![(lo.0, Value::one() - &lambda), (hi.0, lambda)])
                            .map_err(|_| UnrollError::Inconsistent { node: n })?;
                        policy.set(n, d);
                        jobs.push(Job::Aim(child(lo.0)?, lo.1));
                        jobs.push(Job::Aim(child(hi.0)?, hi.1));
                    }
                    (Owner::Follower, Origin::Child(a)) => {
                        for e in tree.children(n) {
                            if e.action == a {
                                jobs.push(Job::Aim(e.child, v.clone()));
                            } else {
                                jobs.push(Job::Threat(e.child));
                            }
                        }
                    }
                    _ => return Err(UnrollError::Inconsistent { node: n }),
                }
            }
        }
    }
    Ok(policy)
}

impl core::error::Error for SolveError {}

impl core::error::Error for ExtractError {}

impl core::error::Error for UnrollError {}
