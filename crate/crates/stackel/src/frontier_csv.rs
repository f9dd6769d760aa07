//! Frontier export: one CSV row per point and per segment.
//!
//! Columns are `kind,node_id,leader_lo,follower_lo,leader_hi,follower_hi` in
//! dollars. A point repeats its value in the `hi` columns; a segment runs from
//! its lower-follower end to its higher one.

use std::io::Write;

use stackel_core::{Frontier, FrontierMap, GameTree, NodeId};

use crate::money::dollars;

pub const HEADER: [&str; 6] = [
    "kind",
    "node_id",
    "leader_lo",
    "follower_lo",
    "leader_hi",
    "follower_hi",
];

fn write_node<W: Write>(out: &mut csv::Writer<W>, name: &str, f: &Frontier) -> csv::Result<()> {
    for p in f.points() {
        let (l, fo) = (dollars(&p.value.leader), dollars(&p.value.follower));
        out.write_record(["point", name, &l, &fo, &l, &fo])?;
    }
    for s in f.segments() {
        let (lo, hi) = f.segment_ends(s);
        out.write_record([
            "segment",
            name,
            &dollars(&lo.leader),
            &dollars(&lo.follower),
            &dollars(&hi.leader),
            &dollars(&hi.follower),
        ])?;
    }
    Ok(())
}

/// Writes the frontiers of `nodes`, or of every node in pre-order when `nodes` is `None`.
pub fn write_frontier_csv<W: Write>(
    w: W,
    tree: &GameTree,
    map: &FrontierMap,
    nodes: Option<&[NodeId]>,
) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    let order: Vec<NodeId> = match nodes {
        Some(ns) => ns.to_vec(),
        None => {
            let mut order = Vec::with_capacity(tree.len());
            let mut stack = vec![tree.root()];
            while let Some(n) = stack.pop() {
                order.push(n);
                stack.extend(tree.children(n).iter().rev().map(|e| e.child));
            }
            order
        }
    };
    for n in order {
        write_node(&mut out, &tree.display_name(n), map.frontier(n))?;
    }
    out.flush()?;
    Ok(())
}
