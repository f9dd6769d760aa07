#![allow(dead_code)]

use std::collections::BTreeMap;

use stackel_core::{
    ActionId, Distribution, GameTree, NodeId, Owner, PayoffPair, Policy, TreeBuilder, Value, ValuePair,
};

pub fn v(n: i128, d: i128) -> Value {
    Value::new(n, d)
}

pub fn vp(l: i128, f: i128) -> ValuePair {
    ValuePair::new(Value::from_integer(l), Value::from_integer(f))
}

/// Leader root: a -> (200, 300), b -> (0, 0).
pub fn t1() -> GameTree {
    let mut b = TreeBuilder::new();
    let a = b.leaf(PayoffPair::new(200, 300));
    let z = b.leaf(PayoffPair::new(0, 0));
    let r = b.leader(&[("a", a), ("b", z)]);
    b.finish(r)
}

/// Follower root: a -> (500, 100), b -> (0, 200).
pub fn t2() -> GameTree {
    let mut b = TreeBuilder::new();
    let a = b.leaf(PayoffPair::new(500, 100));
    let z = b.leaf(PayoffPair::new(0, 200));
    let r = b.follower(&[("a", a), ("b", z)]);
    b.finish(r)
}

/// Leader root: a -> follower {a1 -> (300, 100), a2 -> (100, 400)}, b -> (0, 0).
pub fn t3() -> GameTree {
    let mut b = TreeBuilder::new();
    let x = b.leaf(PayoffPair::new(300, 100));
    let y = b.leaf(PayoffPair::new(100, 400));
    let f = b.follower(&[("a1", x), ("a2", y)]);
    let z = b.leaf(PayoffPair::new(0, 0));
    let r = b.leader(&[("a", f), ("b", z)]);
    b.finish(r)
}

/// Follower root: a -> (300, 100), b -> leader {c -> (0, 0), d -> (500, 500)}.
pub fn t4() -> GameTree {
    let mut b = TreeBuilder::new();
    let a = b.leaf(PayoffPair::new(300, 100));
    let c = b.leaf(PayoffPair::new(0, 0));
    let d = b.leaf(PayoffPair::new(500, 500));
    let l = b.leader(&[("c", c), ("d", d)]);
    let r = b.follower(&[("a", a), ("b", l)]);
    b.finish(r)
}

pub fn act(tree: &GameTree, label: &str) -> ActionId {
    tree.action(label).expect("label exists")
}

pub fn child(tree: &GameTree, n: NodeId, label: &str) -> NodeId {
    tree.child(n, act(tree, label)).expect("child exists")
}

pub fn pure_at(tree: &GameTree, entries: &[(NodeId, &str)]) -> Policy {
    entries
        .iter()
        .map(|(n, l)| (*n, Distribution::pure(act(tree, l))))
        .collect()
}

/// Every pure policy for `owner`, as one chosen child index per owned node.
pub fn pure_policies(tree: &GameTree, owner: Owner) -> Vec<Policy> {
    let nodes = tree.nodes_owned_by(owner);
    let mut out = Vec::new();
    let mut digits = vec![0usize; nodes.len()];
    loop {
        out.push(
            nodes
                .iter()
                .zip(&digits)
                .map(|(n, &i)| (*n, Distribution::pure(tree.children(*n)[i].action)))
                .collect(),
        );
        let mut k = 0;
        loop {
            if k == nodes.len() {
                return out;
            }
            digits[k] += 1;
            if digits[k] < tree.children(nodes[k]).len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Expected payoff by listing every root-to-leaf path with its probability.
pub fn path_sum(tree: &GameTree, leader: &Policy, follower: &Policy) -> ValuePair {
    let mut total = ValuePair::zero();
    let mut stack = vec![(tree.root(), Value::from_integer(1))];
    while let Some((n, p)) = stack.pop() {
        if let Some(r) = tree.reward(n) {
            total = total.add(&ValuePair::from(r).scale(&p));
            continue;
        }
        let pol = if tree.owner(n) == Owner::Leader {
            leader
        } else {
            follower
        };
        let d = pol.get(n).expect("policy covers node");
        for (a, w) in d.weights() {
            stack.push((tree.child(n, *a).unwrap(), &p * w));
        }
    }
    total
}

/// Follower-optimal pure reply by exhaustive enumeration, with the same tie
/// order as the library: follower value, then leader value, first found.
pub fn brute_best_follower(tree: &GameTree, leader: &Policy) -> ValuePair {
    let mut best: Option<ValuePair> = None;
    for f in pure_policies(tree, Owner::Follower) {
        let val = path_sum(tree, leader, &f);
        if best
            .as_ref()
            .map_or(true, |b| (&val.follower, &val.leader) > (&b.follower, &b.leader))
        {
            best = Some(val);
        }
    }
    best.unwrap()
}

/// Random leader policy with weights from a small grid.
pub fn random_leader_policy(tree: &GameTree, seed: u64) -> Policy {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 33) as i128
    };
    tree.nodes_owned_by(Owner::Leader)
        .into_iter()
        .map(|n| {
            let kids = tree.children(n);
            let raw: Vec<i128> = kids.iter().map(|_| next() % 4).collect();
            let sum: i128 = raw.iter().sum();
            let d = if sum == 0 {
                Distribution::pure(kids[0].action)
            } else {
                let w = kids.iter().zip(&raw).map(|(e, r)| (e.action, v(*r, sum))).collect();
                Distribution::new(w).unwrap()
            };
            (n, d)
        })
        .collect()
}

pub fn count_by_owner(tree: &GameTree) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for n in tree.node_ids() {
        *m.entry(tree.owner(n).tag()).or_insert(0) += 1;
    }
    m
}
