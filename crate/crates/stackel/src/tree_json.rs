//! Game trees as JSON.
//!
//! ```json
//! {"root": "r", "nodes": [
//!   {"id": "r", "owner": "leader", "children": {"a": "x"}},
//!   {"id": "x", "owner": "leaf", "reward": [300, 100]}
//! ]}
//! ```
//!
//! Rewards are integer cents, leader first. Export lists nodes in pre-order
//! from the root with children in label order, so exporting an imported
//! export reproduces it byte for byte.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use stackel_core::{GameTree, NodeId, Owner, PayoffPair, TreeBuilder};

#[derive(Debug, thiserror::Error)]
pub enum TreeFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("tree JSON line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("node '{node}': unknown owner tag '{tag}' (expected leader, follower or leaf)")]
    UnknownOwner { node: String, tag: String },
    #[error("node '{node}': {message}")]
    BadNode { node: String, message: String },
    #[error("duplicate node id '{0}'")]
    DuplicateId(String),
    #[error("root '{0}' is not a node")]
    MissingRoot(String),
    #[error("node '{node}' points to unknown node '{to}'")]
    UnknownChild { node: String, to: String },
    #[error("node '{0}' is reached more than once")]
    SharedNode(String),
    #[error("node '{0}' is not reachable from the root")]
    Unreachable(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTree {
    root: String,
    nodes: Vec<FileNode>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileNode {
    id: String,
    owner: String,
    #[serde(default, skip_serializing_if = "Edges::is_empty")]
    children: Edges,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reward: Option<Vec<serde_json::Number>>,
}

/// `{action: child id}` in file order. Kept as pairs so a repeated label
/// is reported instead of silently overwritten.
#[derive(Default)]
struct Edges(Vec<(String, String)>);

impl Edges {
    fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Serialize for Edges {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (action, to) in &self.0 {
            m.serialize_entry(action, to)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for Edges {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct EdgeVisitor;
        impl<'de> Visitor<'de> for EdgeVisitor {
            type Value = Edges;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an object mapping action labels to node ids")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Edges, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = map.next_entry::<String, String>()? {
                    out.push(entry);
                }
                Ok(Edges(out))
            }
        }
        d.deserialize_map(EdgeVisitor)
    }
}

pub fn parse_tree(text: &str) -> Result<GameTree, TreeFileError> {
    let file: FileTree = serde_json::from_str(text).map_err(|e| TreeFileError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut by_id: HashMap<&str, usize> = HashMap::new();
    let mut owners = Vec::with_capacity(file.nodes.len());
    let mut rewards = Vec::with_capacity(file.nodes.len());
    for (i, n) in file.nodes.iter().enumerate() {
        if by_id.insert(n.id.as_str(), i).is_some() {
            return Err(TreeFileError::DuplicateId(n.id.clone()));
        }
        let owner = Owner::from_tag(&n.owner).ok_or_else(|| TreeFileError::UnknownOwner {
            node: n.id.clone(),
            tag: n.owner.clone(),
        })?;
        let bad = |message: &str| TreeFileError::BadNode {
            node: n.id.clone(),
            message: message.to_string(),
        };
        let reward = match (owner, &n.reward) {
            (Owner::Leaf, Some(r)) => {
                let cents: Vec<i64> = r.iter().filter_map(|x| x.as_i64()).collect();
                if r.len() != 2 || cents.len() != 2 {
                    return Err(bad("reward must be two integer cent amounts [leader, follower]"));
                }
                Some(PayoffPair::new(cents[0], cents[1]))
            }
            (Owner::Leaf, None) => return Err(bad("leaf has no reward")),
            (_, Some(_)) => return Err(bad("only leaves carry a reward")),
            (_, None) => None,
        };
        match (owner, n.children.is_empty()) {
            (Owner::Leaf, false) => return Err(bad("leaf has children")),
            (Owner::Leader | Owner::Follower, true) => return Err(bad("decision node has no children")),
            _ => {}
        }
        let mut labels: Vec<&str> = n.children.0.iter().map(|(action, _)| action.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad("repeated action label"));
        }
        owners.push(owner);
        rewards.push(reward);
    }
    let root = *by_id
        .get(file.root.as_str())
        .ok_or_else(|| TreeFileError::MissingRoot(file.root.clone()))?;

    // Depth-first from the root: checks reachability and sharing, then
    // pushes children before parents.
    let mut seen = vec![false; file.nodes.len()];
    let mut order = Vec::with_capacity(file.nodes.len());
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(i) = stack.pop() {
        order.push(i);
        for (_, to) in &file.nodes[i].children.0 {
            let j = *by_id.get(to.as_str()).ok_or_else(|| TreeFileError::UnknownChild {
                node: file.nodes[i].id.clone(),
                to: to.clone(),
            })?;
            if seen[j] {
                return Err(TreeFileError::SharedNode(to.clone()));
            }
            seen[j] = true;
            stack.push(j);
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(TreeFileError::Unreachable(file.nodes[i].id.clone()));
    }

    let mut b = TreeBuilder::with_capacity(file.nodes.len(), file.nodes.len());
    let mut built: Vec<Option<NodeId>> = vec![None; file.nodes.len()];
    for &i in order.iter().rev() {
        let n = &file.nodes[i];
        let kids: Vec<_> = n
            .children
            .0
            .iter()
            .map(|(action, to)| (b.intern(action), built[by_id[to.as_str()]].expect("children first")))
            .collect();
        let id = b.push(owners[i], &kids, rewards[i]);
        b.set_name(id, &n.id);
        built[i] = Some(id);
    }
    Ok(b.finish(built[root].expect("root built")))
}

pub fn read_tree(path: &Path) -> Result<GameTree, TreeFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| TreeFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_tree(&text)
}

/// Canonical JSON text for a tree, newline-terminated.
pub fn tree_to_json(tree: &GameTree) -> String {
    let mut nodes = Vec::with_capacity(tree.len());
    let mut stack = vec![tree.root()];
    while let Some(n) = stack.pop() {
        let owner = tree.owner(n);
        nodes.push(FileNode {
            id: tree.display_name(n),
            owner: owner.tag().to_string(),
            children: Edges(
                tree.children(n)
                    .iter()
                    .map(|e| (tree.label(e.action).to_string(), tree.display_name(e.child)))
                    .collect(),
            ),
            reward: tree
                .reward(n)
                .filter(|_| owner == Owner::Leaf)
                .map(|r| vec![r.leader.into(), r.follower.into()]),
        });
        stack.extend(tree.children(n).iter().rev().map(|e| e.child));
    }
    let file = FileTree {
        root: tree.display_name(tree.root()),
        nodes,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("tree serializes");
    s.push('\n');
    s
}

pub fn write_tree(tree: &GameTree, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, tree_to_json(tree))
}

/// Whether two trees have the same shape, owners, labels, rewards and names,
/// compared from the roots.
pub fn same_tree(a: &GameTree, b: &GameTree) -> bool {
    let mut stack = vec![(a.root(), b.root())];
    while let Some((x, y)) = stack.pop() {
        if a.owner(x) != b.owner(y) || a.display_name(x) != b.display_name(y) {
            return false;
        }
        if a.owner(x) == Owner::Leaf && a.reward(x) != b.reward(y) {
            return false;
        }
        let (kx, ky) = (a.children(x), b.children(y));
        if kx.len() != ky.len() {
            return false;
        }
        let by_label: BTreeMap<&str, NodeId> = ky.iter().map(|e| (b.label(e.action), e.child)).collect();
        for e in kx {
            match by_label.get(a.label(e.action)) {
                Some(&c) => stack.push((e.child, c)),
                None => return false,
            }
        }
    }
    true
}
