//! Seeded random trees for tests and oracle runs.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tree::{ActionId, GameTree, NodeId, Owner, TreeBuilder};
use crate::value::{Cents, PayoffPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomTreeParams {
    pub max_depth: u32,
    pub branching: u32,
    pub reward_bound: Cents,
    /// Stop creating internal nodes once this many exist.
    pub max_internal: Option<usize>,
}

const LABELS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// `random_tree_with` without an internal-node cap.
pub fn random_tree(seed: u64, max_depth: u32, branching: u32, reward_bound: Cents) -> GameTree {
    random_tree_with(
        seed,
        RandomTreeParams {
            max_depth,
            branching,
            reward_bound,
            max_internal: None,
        },
    )
}

/// Breadth-first random tree. A node at depth `d` is internal with
/// probability `(max_depth - d) / max_depth`, owners are sampled, each
/// internal node gets 1..=branching children, and leaf rewards are uniform
/// in `[0, reward_bound]`.
pub fn random_tree_with(seed: u64, p: RandomTreeParams) -> GameTree {
    assert!(
        p.max_depth >= 1 && p.branching >= 1,
        "max_depth and branching must be positive"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (p.branching as usize).max(1);
    let labels: Vec<String> = (0..width)
        .map(|i| match LABELS.get(i) {
            Some(l) => l.to_string(),
            None => format!("x{i}"),
        })
        .collect();

    // Shape first (breadth-first so the internal cap trims the deep end),
    // then emit children before parents.
    struct Draft {
        owner: Owner,
        kids: Vec<usize>,
        reward: Option<PayoffPair>,
    }
    let mut drafts: Vec<Draft> = Vec::new();
    let mut queue: VecDeque<(usize, u32)> = VecDeque::new();
    drafts.push(Draft {
        owner: Owner::Leaf,
        kids: Vec::new(),
        reward: None,
    });
    queue.push_back((0, 0));
    let mut internal = 0usize;
    while let Some((i, depth)) = queue.pop_front() {
        let room = p.max_internal.map_or(true, |m| internal < m);
        let go_deeper = depth < p.max_depth && room && rng.gen_range(0..p.max_depth) < p.max_depth - depth;
        if go_deeper {
            internal += 1;
            drafts[i].owner = if rng.gen_bool(0.5) {
                Owner::Leader
            } else {
                Owner::Follower
            };
            let k = rng.gen_range(1..=p.branching) as usize;
            for _ in 0..k {
                let j = drafts.len();
                drafts.push(Draft {
                    owner: Owner::Leaf,
                    kids: Vec::new(),
                    reward: None,
                });
                drafts[i].kids.push(j);
                queue.push_back((j, depth + 1));
            }
        } else {
            let l = rng.gen_range(0..=p.reward_bound);
            let f = rng.gen_range(0..=p.reward_bound);
            drafts[i].reward = Some(PayoffPair::new(l, f));
        }
    }

    let mut b = TreeBuilder::with_capacity(drafts.len(), drafts.len());
    let ids: Vec<ActionId> = labels.iter().map(|l| b.intern(l)).collect();
    let mut made: Vec<Option<NodeId>> = alloc::vec![None; drafts.len()];
    // Drafts were appended breadth-first, so children always follow parents.
    for i in (0..drafts.len()).rev() {
        let d = &drafts[i];
        let id = match d.owner {
            Owner::Leaf => b.leaf(d.reward.expect("leaf draft has a reward")),
            owner => {
                let kids: Vec<(ActionId, NodeId)> = d
                    .kids
                    .iter()
                    .enumerate()
                    .map(|(k, &j)| (ids[k], made[j].expect("child emitted first")))
                    .collect();
                b.push(owner, &kids, None)
            }
        };
        made[i] = Some(id);
    }
    b.finish(made[0].expect("root emitted"))
}
