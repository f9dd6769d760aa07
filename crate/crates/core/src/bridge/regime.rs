//! Solving the bridge tree and naming what the resulting SDC policy does.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::eval::best_response;
use crate::policy::Policy;
use crate::solve::{
    extract_equilibrium, extract_punishment, solve_frontier, unroll_policy, ExtractError, FrontierMap, Support,
    TargetPoint,
};
use crate::tree::Owner;
use crate::value::{Cap, Value, ValuePair};

use super::config::BridgeConfig;
use super::game::{BridgeGame, Cursor, Mover, Transition};

/// What one on-path play of the SDC policy looks like.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Behavior {
    /// SDC crosses first, as fast as it can.
    Bully,
    /// SDC crosses first after `steps` moves, more than the fastest crossing needs.
    Block { steps: u32 },
    /// The human crosses first.
    Yield,
    /// Nobody finishes: the clock runs out or the cars meet head-on.
    Stalemate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegimeLabel {
    Block,
    Bully,
    Yield,
    Mixture,
}

impl RegimeLabel {
    pub fn label(self) -> &'static str {
        match self {
            RegimeLabel::Block => "block",
            RegimeLabel::Bully => "bully",
            RegimeLabel::Yield => "yield",
            RegimeLabel::Mixture => "mixture",
        }
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The bridge tree with its frontiers.
#[derive(Clone, Debug)]
pub struct SolvedBridge {
    pub game: BridgeGame,
    pub map: FrontierMap,
}

impl SolvedBridge {
    pub fn solve(cfg: &BridgeConfig) -> SolvedBridge {
        let game = BridgeGame::build(cfg);
        let map = solve_frontier(&game.tree).expect("bridge tree is valid by construction");
        SolvedBridge { game, map }
    }

    /// Capped punishment target and the leader policy realizing it.
    pub fn punishment(&self, cap: Cap) -> Result<(TargetPoint, Policy), ExtractError> {
        let target = extract_punishment(self.map.root_frontier(), cap)?;
        let policy = unroll_policy(&self.game.tree, &self.map, &target).expect("target comes from the root frontier");
        Ok((target, policy))
    }

    /// The root vertex with the largest follower value not above the cap
    /// (best leader value among equals); the equilibrium when unbounded.
    pub fn region_vertex(&self, cap: Cap) -> Result<TargetPoint, ExtractError> {
        let root = self.map.root_frontier();
        let theta = match cap {
            Cap::Unbounded => return extract_equilibrium(root),
            Cap::At(t) => t,
        };
        let mut best: Option<(usize, ValuePair)> = None;
        for (i, p) in root.points().iter().enumerate() {
            if p.value.follower > theta {
                continue;
            }
            let wins = match &best {
                None => true,
                Some((_, b)) => (&p.value.follower, &p.value.leader) > (&b.follower, &b.leader),
            };
            if wins {
                best = Some((i, p.value.clone()));
            }
        }
        match best {
            Some((i, value)) => Ok(TargetPoint {
                value,
                support: Support::Point(i),
            }),
            None => match root.min_follower() {
                Some(min_follower) => Err(ExtractError::InfeasibleCap { min_follower }),
                None => Err(ExtractError::EmptyFrontier),
            },
        }
    }

    /// Probability-weighted on-path behaviors of a leader policy against the
    /// human's best response.
    pub fn behaviors(&self, policy: &Policy) -> Vec<(Value, Behavior)> {
        let tree = &self.game.tree;
        let (reply, _) = best_response(tree, policy).expect("unrolled policies cover every reachable leader node");
        let mut out: Vec<(Value, Behavior)> = Vec::new();
        let fastest = self.game.root_arrangement.sdc_pos.remaining() as u32 - 1;
        let mut stack: Vec<(Cursor, Value)> = vec![(self.game.cursor(), Value::one())];
        while let Some((c, p)) = stack.pop() {
            let at = match c.at {
                Some(at) => at,
                None => continue,
            };
            let dist = match tree.owner(c.node) {
                Owner::Leader => policy.get(c.node),
                Owner::Follower => reply.get(c.node),
                Owner::Leaf => None,
            }
            .expect("reachable decision node has an entry");
            for (a, w) in dist.weights() {
                let m = self.game.move_of(*a);
                let q = &p * w;
                let next = self.game.advance(&c, m).expect("policy moves are legal");
                let behavior = match at.apply(m).expect("legal") {
                    Transition::Continue(_) => {
                        if next.at.is_some() {
                            stack.push((next, q));
                            continue;
                        }
                        Behavior::Stalemate
                    }
                    Transition::Finished(Mover::Sdc) if at.sdc_steps <= fastest => Behavior::Bully,
                    Transition::Finished(Mover::Sdc) => Behavior::Block { steps: at.sdc_steps },
                    Transition::Finished(Mover::Human) => Behavior::Yield,
                    Transition::Crash => Behavior::Stalemate,
                };
                match out.iter_mut().find(|(_, b)| *b == behavior) {
                    Some((acc, _)) => *acc += q,
                    None => out.push((q, behavior)),
                }
            }
        }
        out.sort_by_key(|x| x.1);
        out
    }

    pub fn classify(&self, cap: Cap) -> Result<RegimeReport, ExtractError> {
        let vertex = self.region_vertex(cap.clone())?;
        let vertex_policy = unroll_policy(&self.game.tree, &self.map, &vertex).expect("root vertex");
        let region_paths = self.behaviors(&vertex_policy);
        let (capped, capped_policy) = self.punishment(cap.clone())?;
        let capped_paths = self.behaviors(&capped_policy);
        Ok(RegimeReport {
            cap,
            label: label_of(&region_paths),
            block_steps: block_steps(&region_paths),
            vertex: vertex.value,
            capped_label: label_of(&capped_paths),
            capped_block_steps: block_steps(&capped_paths),
            capped_target: capped,
            capped_paths,
        })
    }
}

/// Regime at a cap, read two ways.
///
/// `label` names the pure behavior governing the cap's band of the root
/// frontier: the vertex at or just below the cap. `capped_label` names the
/// policy that the capped optimization actually returns, which can sit on a
/// segment and mix two behaviors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegimeReport {
    pub cap: Cap,
    pub label: RegimeLabel,
    pub block_steps: Option<u32>,
    pub vertex: ValuePair,
    pub capped_label: RegimeLabel,
    pub capped_block_steps: Option<u32>,
    pub capped_target: TargetPoint,
    pub capped_paths: Vec<(Value, Behavior)>,
}

fn label_of(paths: &[(Value, Behavior)]) -> RegimeLabel {
    let live: Vec<Behavior> = paths.iter().filter(|(p, _)| !p.is_zero()).map(|(_, b)| *b).collect();
    if live.iter().all(|b| *b == Behavior::Bully) {
        RegimeLabel::Bully
    } else if live.iter().all(|b| *b == Behavior::Yield) {
        RegimeLabel::Yield
    } else if live
        .iter()
        .all(|b| matches!(b, Behavior::Block { .. } | Behavior::Stalemate))
    {
        RegimeLabel::Block
    } else {
        RegimeLabel::Mixture
    }
}

fn block_steps(paths: &[(Value, Behavior)]) -> Option<u32> {
    paths
        .iter()
        .filter_map(|(_, b)| match b {
            Behavior::Block { steps } => Some(*steps),
            _ => None,
        })
        .max()
}

/// Names the regime at `cap` on a solved bridge tree.
pub fn classify_regime(solved: &SolvedBridge, cap: Cap) -> Result<RegimeReport, ExtractError> {
    solved.classify(cap)
}
