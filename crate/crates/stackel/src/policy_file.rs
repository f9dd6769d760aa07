//! Solved leader policies as JSON, with exact `n/d` probabilities.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stackel_core::{Cap, Distribution, GameTree, Owner, Policy, Value, ValuePair};

use crate::money::{parse_rational, rational_text};

#[derive(Debug, thiserror::Error)]
pub enum PolicyFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("policy JSON line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("policy entry {index}: {message}")]
    Entry { index: usize, message: String },
    #[error("field '{field}': '{text}' is not a rational")]
    BadValue { field: &'static str, text: String },
}

/// What `solve` writes: the cap, the value reached, and the policy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvedPolicy {
    pub cap: Cap,
    pub value: ValuePair,
    pub policy: Policy,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilePolicy {
    /// Cents, or "inf".
    theta: String,
    leader_value: String,
    follower_value: String,
    nodes: Vec<FileEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEntry {
    node: String,
    actions: BTreeMap<String, String>,
}

/// `"inf"` or the cap in exact cents.
pub fn cap_text(cap: &Cap) -> String {
    match cap {
        Cap::Unbounded => "inf".to_string(),
        Cap::At(v) => rational_text(v),
    }
}

pub fn parse_cap(s: &str) -> Option<Cap> {
    match s.trim() {
        "inf" | "+inf" | "∞" => Some(Cap::Unbounded),
        t => parse_rational(t).map(Cap::At),
    }
}

/// Entries follow the tree's pre-order, so output is deterministic.
pub fn policy_to_json(tree: &GameTree, solved: &SolvedPolicy) -> String {
    let mut nodes = Vec::new();
    let mut stack = vec![tree.root()];
    while let Some(n) = stack.pop() {
        if let Some(d) = solved.policy.get(n) {
            nodes.push(FileEntry {
                node: tree.display_name(n),
                actions: d
                    .weights()
                    .iter()
                    .map(|(a, p)| (tree.label(*a).to_string(), rational_text(p)))
                    .collect(),
            });
        }
        stack.extend(tree.children(n).iter().rev().map(|e| e.child));
    }
    let file = FilePolicy {
        theta: cap_text(&solved.cap),
        leader_value: rational_text(&solved.value.leader),
        follower_value: rational_text(&solved.value.follower),
        nodes,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("policy serializes");
    s.push('\n');
    s
}

pub fn parse_policy(tree: &GameTree, text: &str) -> Result<SolvedPolicy, PolicyFileError> {
    let file: FilePolicy = serde_json::from_str(text).map_err(|e| PolicyFileError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let value = |field: &'static str, text: &str| -> Result<Value, PolicyFileError> {
        parse_rational(text).ok_or_else(|| PolicyFileError::BadValue {
            field,
            text: text.to_string(),
        })
    };
    let cap = parse_cap(&file.theta).ok_or_else(|| PolicyFileError::BadValue {
        field: "theta",
        text: file.theta.clone(),
    })?;
    let mut policy = Policy::new();
    for (index, e) in file.nodes.iter().enumerate() {
        let entry = |message: String| PolicyFileError::Entry { index, message };
        let n = tree
            .node_by_name(&e.node)
            .ok_or_else(|| entry(format!("unknown node '{}'", e.node)))?;
        if tree.owner(n) != Owner::Leader {
            return Err(entry(format!("node '{}' is not a leader node", e.node)));
        }
        let mut weights = Vec::new();
        for (label, p) in &e.actions {
            let a = tree
                .action(label)
                .filter(|a| tree.child(n, *a).is_some())
                .ok_or_else(|| entry(format!("node '{}' has no action '{label}'", e.node)))?;
            weights.push((a, value("actions", p)?));
        }
        let d =
            Distribution::new(weights).map_err(|_| entry(format!("weights at '{}' are not a distribution", e.node)))?;
        policy.set(n, d);
    }
    Ok(SolvedPolicy {
        cap,
        value: ValuePair::new(
            value("leader_value", &file.leader_value)?,
            value("follower_value", &file.follower_value)?,
        ),
        policy,
    })
}

pub fn write_policy(tree: &GameTree, solved: &SolvedPolicy, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, policy_to_json(tree, solved))
}

pub fn read_policy(tree: &GameTree, path: &Path) -> Result<SolvedPolicy, PolicyFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| PolicyFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_policy(tree, &text)
}
