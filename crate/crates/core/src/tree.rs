//! Explicit game trees.
//!
//! Nodes live in one arena and their outgoing edges in another, so a tree of a
//! few million nodes stays compact. Action labels are interned per tree and
//! numbered in lexicographic order, which makes `ActionId` order the same as
//! label order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::value::PayoffPair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Index into a tree's sorted label table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub u16);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Owner {
    Leader,
    Follower,
    Leaf,
}

impl Owner {
    pub fn tag(self) -> &'static str {
        match self {
            Owner::Leader => "leader",
            Owner::Follower => "follower",
            Owner::Leaf => "leaf",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Owner> {
        match tag {
            "leader" => Some(Owner::Leader),
            "follower" => Some(Owner::Follower),
            "leaf" => Some(Owner::Leaf),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub action: ActionId,
    pub child: NodeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct NodeRec {
    owner: Owner,
    first: u32,
    count: u32,
    reward: Option<PayoffPair>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameTree {
    root: NodeId,
    nodes: Vec<NodeRec>,
    edges: Vec<Edge>,
    labels: Vec<String>,
    names: Option<Vec<String>>,
}

/// Counts plus every structural violation found.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub internal_count: usize,
    pub leaf_count: usize,
    pub max_depth: usize,
    pub max_branching: usize,
    pub errors: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

impl GameTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.index() < self.nodes.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn owner(&self, n: NodeId) -> Owner {
        self.nodes[n.index()].owner
    }

    pub fn reward(&self, n: NodeId) -> Option<PayoffPair> {
        self.nodes[n.index()].reward
    }

    pub fn children(&self, n: NodeId) -> &[Edge] {
        let r = &self.nodes[n.index()];
        &self.edges[r.first as usize..(r.first + r.count) as usize]
    }

    pub fn child(&self, n: NodeId, a: ActionId) -> Option<NodeId> {
        self.children(n).iter().find(|e| e.action == a).map(|e| e.child)
    }

    pub fn is_leaf(&self, n: NodeId) -> bool {
        self.owner(n) == Owner::Leaf
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, a: ActionId) -> &str {
        &self.labels[a.0 as usize]
    }

    pub fn action(&self, label: &str) -> Option<ActionId> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(label))
            .ok()
            .map(|i| ActionId(i as u16))
    }

    /// The node's external name, if the tree was built with names.
    pub fn name(&self, n: NodeId) -> Option<&str> {
        self.names.as_ref().map(|v| v[n.index()].as_str())
    }

    pub fn has_names(&self) -> bool {
        self.names.is_some()
    }

    /// Name if present, otherwise the arena index.
    pub fn display_name(&self, n: NodeId) -> String {
        match self.name(n) {
            Some(s) => s.to_string(),
            None => n.0.to_string(),
        }
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        match &self.names {
            Some(v) => v.iter().position(|s| s == name).map(|i| NodeId(i as u32)),
            None => name.parse::<u32>().ok().map(NodeId).filter(|n| self.contains(*n)),
        }
    }

    pub fn nodes_owned_by(&self, owner: Owner) -> Vec<NodeId> {
        self.node_ids().filter(|n| self.owner(*n) == owner).collect()
    }

    /// Children before parents, starting from the root. Assumes a valid tree.
    pub fn post_order(&self) -> Vec<NodeId> {
        self.post_order_from(self.root)
    }

    pub fn post_order_from(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<(NodeId, bool)> = vec![(start, false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                out.push(n);
                continue;
            }
            stack.push((n, true));
            for e in self.children(n).iter().rev() {
                stack.push((e.child, false));
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let n = self.nodes.len();
        let name = |i: usize| -> String {
            match &self.names {
                Some(v) => format!("'{}'", v[i]),
                None => format!("#{i}"),
            }
        };
        if n == 0 {
            rep.errors.push("tree has no nodes".to_string());
            return rep;
        }
        let root_ok = self.root.index() < n;
        if !root_ok {
            rep.errors.push(format!("root id {} does not exist", self.root.0));
        }

        let mut parents = vec![0u32; n];
        for (i, r) in self.nodes.iter().enumerate() {
            match r.owner {
                Owner::Leaf => rep.leaf_count += 1,
                _ => rep.internal_count += 1,
            }
            rep.max_branching = rep.max_branching.max(r.count as usize);
            let kids = &self.edges[r.first as usize..(r.first + r.count) as usize];
            match (r.owner, kids.is_empty(), r.reward.is_some()) {
                (Owner::Leaf, false, _) => rep.errors.push(format!("leaf {} has children", name(i))),
                (Owner::Leaf, true, false) => rep.errors.push(format!("leaf {} has no reward", name(i))),
                (Owner::Leaf, true, true) => {}
                (_, true, _) => rep.errors.push(format!("internal node {} has no children", name(i))),
                (_, false, true) => rep.errors.push(format!("internal node {} carries a reward", name(i))),
                (_, false, false) => {}
            }
            for w in kids.windows(2) {
                if w[0].action == w[1].action {
                    rep.errors.push(format!(
                        "node {} repeats action label '{}'",
                        name(i),
                        self.labels[w[0].action.0 as usize]
                    ));
                }
            }
            for e in kids {
                if e.child.index() >= n {
                    rep.errors
                        .push(format!("node {} references missing node {}", name(i), e.child.0));
                } else {
                    parents[e.child.index()] += 1;
                }
            }
        }
        for (i, &p) in parents.iter().enumerate() {
            if root_ok && i == self.root.index() {
                if p > 0 {
                    rep.errors.push(format!("root {} has a parent (cycle)", name(i)));
                }
            } else if p > 1 {
                rep.errors.push(format!("node {} has {} parents", name(i), p));
            }
        }

        if root_ok {
            let mut depth = vec![usize::MAX; n];
            depth[self.root.index()] = 0;
            let mut stack = vec![self.root];
            while let Some(u) = stack.pop() {
                let d = depth[u.index()];
                rep.max_depth = rep.max_depth.max(d);
                for e in self.children(u) {
                    let c = e.child.index();
                    if c < n && depth[c] == usize::MAX {
                        depth[c] = d + 1;
                        stack.push(e.child);
                    }
                }
            }
            for (i, d) in depth.iter().enumerate() {
                if *d == usize::MAX {
                    rep.errors
                        .push(format!("node {} is unreachable from the root", name(i)));
                }
            }
        }
        rep
    }
}

/// Incremental tree construction.
///
/// Child references may point at nodes that are created later, or at nodes
/// that never exist; `GameTree::validate` reports the latter.
#[derive(Default)]
pub struct TreeBuilder {
    nodes: Vec<NodeRec>,
    edges: Vec<Edge>,
    labels: Vec<String>,
    label_ix: BTreeMap<String, u16>,
    names: Vec<Option<String>>,
    named: bool,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize, edges: usize) -> Self {
        TreeBuilder {
            nodes: Vec::with_capacity(nodes),
            edges: Vec::with_capacity(edges),
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Builder-local action id; renumbered into label order by `finish`.
    pub fn intern(&mut self, label: &str) -> ActionId {
        if let Some(&i) = self.label_ix.get(label) {
            return ActionId(i);
        }
        let i = self.labels.len() as u16;
        self.labels.push(label.to_string());
        self.label_ix.insert(label.to_string(), i);
        ActionId(i)
    }

    pub fn push(&mut self, owner: Owner, children: &[(ActionId, NodeId)], reward: Option<PayoffPair>) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        let first = self.edges.len() as u32;
        self.edges
            .extend(children.iter().map(|&(action, child)| Edge { action, child }));
        self.nodes.push(NodeRec {
            owner,
            first,
            count: children.len() as u32,
            reward,
        });
        if self.named {
            self.names.push(None);
        }
        id
    }

    pub fn leaf(&mut self, reward: PayoffPair) -> NodeId {
        self.push(Owner::Leaf, &[], Some(reward))
    }

    pub fn node(&mut self, owner: Owner, children: &[(&str, NodeId)], reward: Option<PayoffPair>) -> NodeId {
        let kids: Vec<(ActionId, NodeId)> = children.iter().map(|(l, c)| (self.intern(l), *c)).collect();
        self.push(owner, &kids, reward)
    }

    pub fn leader(&mut self, children: &[(&str, NodeId)]) -> NodeId {
        self.node(Owner::Leader, children, None)
    }

    pub fn follower(&mut self, children: &[(&str, NodeId)]) -> NodeId {
        self.node(Owner::Follower, children, None)
    }

    pub fn set_name(&mut self, n: NodeId, name: &str) {
        if !self.named {
            self.named = true;
            self.names = vec![None; self.nodes.len()];
        }
        self.names[n.index()] = Some(name.to_string());
    }

    pub fn finish(self, root: NodeId) -> GameTree {
        let TreeBuilder {
            mut nodes,
            mut edges,
            labels,
            names,
            named,
            ..
        } = self;
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
        let mut remap = vec![0u16; labels.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new as u16;
        }
        let sorted: Vec<String> = order.iter().map(|&i| labels[i].clone()).collect();
        for e in edges.iter_mut() {
            e.action = ActionId(remap[e.action.0 as usize]);
        }
        for r in nodes.iter_mut() {
            edges[r.first as usize..(r.first + r.count) as usize].sort_by_key(|e| e.action);
        }
        let names = named.then(|| {
            names
                .into_iter()
                .enumerate()
                .map(|(i, s)| s.unwrap_or_else(|| i.to_string()))
                .collect()
        });
        GameTree {
            root,
            nodes,
            edges,
            labels: sorted,
            names,
        }
    }
}

pub fn validate_tree(tree: &GameTree) -> ValidationReport {
    tree.validate()
}
