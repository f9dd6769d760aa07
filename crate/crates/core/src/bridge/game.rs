//! The abstract bridge game: four positions per car, alternating moves.
//!
//! Both cars start before the bridge. The human moves first in every round.
//! A car off the bridge can go forward or stay; a car on the bridge can also
//! back off. Driving forward off the bridge finishes, unless the other car is
//! also on the bridge, which is a head-on crash. The game ends at the first
//! finish, at a crash, or when the horizon runs out.

use alloc::vec::Vec;
use core::fmt;

use crate::tree::{ActionId, GameTree, NodeId, Owner, TreeBuilder};
use crate::value::{Cents, PayoffPair};

use super::config::BridgeConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Position {
    Start,
    BeforeBridge,
    OnBridge,
    Finish,
}

impl Position {
    /// Forward moves still needed to finish.
    pub fn remaining(self) -> Cents {
        match self {
            Position::Start => 3,
            Position::BeforeBridge => 2,
            Position::OnBridge => 1,
            Position::Finish => 0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Position::Start => "start",
            Position::BeforeBridge => "before-bridge",
            Position::OnBridge => "on-bridge",
            Position::Finish => "finish",
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mover {
    Sdc,
    Human,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AbstractMove {
    Backward,
    Forward,
    Stay,
}

impl AbstractMove {
    pub const ALL: [AbstractMove; 3] = [AbstractMove::Backward, AbstractMove::Forward, AbstractMove::Stay];

    pub fn label(self) -> &'static str {
        match self {
            AbstractMove::Backward => "backward",
            AbstractMove::Forward => "forward",
            AbstractMove::Stay => "stay",
        }
    }

    pub fn from_label(s: &str) -> Option<AbstractMove> {
        AbstractMove::ALL.into_iter().find(|m| m.label() == s)
    }

    /// Action label in the tree. Ties between equally good moves go to the
    /// lowest label, so retreating sorts last.
    pub fn tree_label(self) -> &'static str {
        match self {
            AbstractMove::Backward => "withdraw",
            m => m.label(),
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for AbstractMove {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for AbstractMove {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <alloc::string::String as serde::Deserialize>::deserialize(d)?;
        AbstractMove::from_label(&s).ok_or_else(|| serde::de::Error::custom("unknown move"))
    }
}

/// Positions plus whose turn it is and how many moves each car has made.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AbstractArrangement {
    pub sdc_pos: Position,
    pub human_pos: Position,
    pub to_move: Mover,
    pub sdc_steps: u32,
    pub human_steps: u32,
}

/// What a move leads to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transition {
    Continue(AbstractArrangement),
    Finished(Mover),
    Crash,
}

impl AbstractArrangement {
    pub fn initial(cfg: &BridgeConfig) -> Self {
        AbstractArrangement {
            sdc_pos: cfg.sdc_abstract_start,
            human_pos: cfg.human_abstract_start,
            to_move: Mover::Human,
            sdc_steps: 0,
            human_steps: 0,
        }
    }

    /// Round of the next move, counted from 1.
    pub fn round(&self) -> u32 {
        match self.to_move {
            Mover::Sdc => self.sdc_steps + 1,
            Mover::Human => self.human_steps + 1,
        }
    }

    pub fn plies(&self) -> u32 {
        self.sdc_steps + self.human_steps
    }

    fn mover_pos(&self) -> Position {
        match self.to_move {
            Mover::Sdc => self.sdc_pos,
            Mover::Human => self.human_pos,
        }
    }

    fn other_pos(&self) -> Position {
        match self.to_move {
            Mover::Sdc => self.human_pos,
            Mover::Human => self.sdc_pos,
        }
    }

    /// Legal moves for the car whose turn it is, in label order.
    pub fn moves(&self) -> &'static [AbstractMove] {
        match self.mover_pos() {
            Position::Start | Position::BeforeBridge => &[AbstractMove::Forward, AbstractMove::Stay],
            Position::OnBridge => &AbstractMove::ALL,
            Position::Finish => &[],
        }
    }

    pub fn apply(&self, m: AbstractMove) -> Option<Transition> {
        if !self.moves().contains(&m) {
            return None;
        }
        let here = self.mover_pos();
        let to = match (here, m) {
            (p, AbstractMove::Stay) => p,
            (Position::Start, AbstractMove::Forward) => Position::BeforeBridge,
            (Position::BeforeBridge, AbstractMove::Forward) => Position::OnBridge,
            (Position::OnBridge, AbstractMove::Forward) => {
                if self.other_pos() == Position::OnBridge {
                    return Some(Transition::Crash);
                }
                return Some(Transition::Finished(self.to_move));
            }
            (Position::OnBridge, AbstractMove::Backward) => Position::BeforeBridge,
            _ => return None,
        };
        let mut next = *self;
        match self.to_move {
            Mover::Sdc => {
                next.sdc_pos = to;
                next.sdc_steps += 1;
                next.to_move = Mover::Human;
            }
            Mover::Human => {
                next.human_pos = to;
                next.human_steps += 1;
                next.to_move = Mover::Sdc;
            }
        }
        Some(Transition::Continue(next))
    }

    /// Payoff when `self` is followed by a terminal transition.
    ///
    /// A finisher in round `r` earns the base reward less one step cost per
    /// earlier round. The other car is charged as if it drove straight on
    /// afterwards: the human still moves first next round, while the car still
    /// waiting after a human finish gets to move in the same round.
    pub fn terminal_payoff(&self, t: Transition, cfg: &BridgeConfig) -> PayoffPair {
        let pay = |rounds: Cents| (cfg.base_reward - cfg.per_step_cost * rounds).max(0);
        let r = self.round() as Cents;
        match t {
            Transition::Finished(Mover::Sdc) => PayoffPair::new(pay(r - 1), pay(r + self.human_pos.remaining() - 1)),
            Transition::Finished(Mover::Human) => PayoffPair::new(pay(r + self.sdc_pos.remaining() - 2), pay(r - 1)),
            Transition::Crash | Transition::Continue(_) => PayoffPair::new(0, 0),
        }
    }
}

/// The abstract tree plus what is needed to walk it alongside arrangements.
#[derive(Clone, Debug)]
pub struct BridgeGame {
    pub tree: GameTree,
    pub config: BridgeConfig,
    pub root_arrangement: AbstractArrangement,
    actions: [ActionId; 3],
}

impl BridgeGame {
    pub fn build(cfg: &BridgeConfig) -> BridgeGame {
        let mut b = TreeBuilder::new();
        for m in AbstractMove::ALL {
            b.intern(m.tree_label());
        }
        let start = AbstractArrangement::initial(cfg);
        let root = grow(&mut b, cfg, &start);
        let tree = b.finish(root);
        let actions = AbstractMove::ALL.map(|m| tree.action(m.tree_label()).expect("interned"));
        BridgeGame {
            tree,
            config: *cfg,
            root_arrangement: start,
            actions,
        }
    }

    pub fn action_id(&self, m: AbstractMove) -> ActionId {
        self.actions[m as usize]
    }

    pub fn move_of(&self, a: ActionId) -> AbstractMove {
        AbstractMove::ALL[self.actions.iter().position(|x| *x == a).expect("bridge action")]
    }

    pub fn cursor(&self) -> Cursor {
        Cursor {
            node: self.tree.root(),
            at: Some(self.root_arrangement),
        }
    }

    /// Follows `m` from `c`; `None` if the move is illegal there.
    pub fn advance(&self, c: &Cursor, m: AbstractMove) -> Option<Cursor> {
        let at = c.at?;
        let t = at.apply(m)?;
        let node = self.tree.child(c.node, self.action_id(m))?;
        Some(Cursor {
            node,
            at: match t {
                Transition::Continue(next) if !self.tree.is_leaf(node) => Some(next),
                _ => None,
            },
        })
    }
}

/// A node of the abstract tree with its arrangement; `at` is `None` at leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cursor {
    pub node: NodeId,
    pub at: Option<AbstractArrangement>,
}

fn grow(b: &mut TreeBuilder, cfg: &BridgeConfig, at: &AbstractArrangement) -> NodeId {
    let horizon = 2 * cfg.horizon_rounds;
    let mut kids: Vec<(ActionId, NodeId)> = Vec::with_capacity(3);
    for &m in at.moves() {
        let t = at.apply(m).expect("listed move is legal");
        let child = match t {
            Transition::Continue(next) if next.plies() < horizon => grow(b, cfg, &next),
            Transition::Continue(_) => b.leaf(PayoffPair::new(0, 0)),
            terminal => b.leaf(at.terminal_payoff(terminal, cfg)),
        };
        kids.push((b.intern(m.tree_label()), child));
    }
    let owner = match at.to_move {
        Mover::Sdc => Owner::Leader,
        Mover::Human => Owner::Follower,
    };
    b.push(owner, &kids, None)
}

/// The abstract game tree for `cfg`.
pub fn build_bridge_tree(cfg: &BridgeConfig) -> GameTree {
    BridgeGame::build(cfg).tree
}
