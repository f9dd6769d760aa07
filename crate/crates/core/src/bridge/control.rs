//! The punishing SDC: the solved capped policy driven through live play.
//!
//! The controller keeps a cursor into the abstract tree. At the first tick of
//! every abstract step it reads the human's abstract move from the live
//! position, steps the cursor, and, at an SDC node, samples the solved policy.
//! Between step boundaries it drives toward the position that move asks for.

use core::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::policy::Policy;
use crate::solve::TargetPoint;
use crate::tree::Owner;
use crate::value::{Cap, Value};

use super::config::BridgeConfig;
use super::game::{AbstractMove, BridgeGame, Cursor, Position};
use super::live::{LiveAction, LiveState, Track};
use super::regime::SolvedBridge;

/// The capped policy the punishing controller plays, with the tree it lives on.
#[derive(Clone, Debug)]
pub struct PunishmentPlan {
    pub game: BridgeGame,
    pub target: TargetPoint,
    pub policy: Policy,
}

impl PunishmentPlan {
    pub fn new(
        solved: &SolvedBridge,
        theta: crate::value::Cents,
    ) -> Result<PunishmentPlan, crate::solve::ExtractError> {
        let (target, policy) = solved.punishment(Cap::cents(theta))?;
        Ok(PunishmentPlan {
            game: solved.game.clone(),
            target,
            policy,
        })
    }

    pub fn config(&self) -> &BridgeConfig {
        &self.game.config
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ControlError {
    /// The human's live motion has no abstract counterpart.
    Unmapped { tick: u32, from: Position, to: Position },
    /// The solved policy has no entry where the cursor landed.
    NoPolicyEntry { tick: u32 },
}

impl fmt::Display for ControlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlError::Unmapped { tick, from, to } => {
                write!(
                    f,
                    "tick {tick}: human went from {from} to {to}, which no abstract move covers"
                )
            }
            ControlError::NoPolicyEntry { tick } => {
                write!(f, "tick {tick}: solved policy has no entry at the current node")
            }
        }
    }
}

/// One draw from a stochastic policy node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolicySample {
    pub tick: u32,
    pub node: u32,
    /// Uniform draw as a fraction of 2^32.
    pub draw: u32,
    pub action: AbstractMove,
}

/// What the SDC is doing this abstract step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Intent {
    Enter,
    Hold,
    Retreat,
    Wait,
    /// The abstract game is over; head for the finish.
    Drive,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PunishingController {
    cursor: Option<Cursor>,
    intent: Intent,
}

impl PunishingController {
    pub fn new(plan: &PunishmentPlan) -> Self {
        PunishingController {
            cursor: Some(plan.game.cursor()),
            intent: Intent::Wait,
        }
    }

    /// Cursor node and current intent; the node fixes the arrangement.
    pub(crate) fn key(&self) -> (Option<u32>, u8) {
        (self.node(), self.intent as u8)
    }

    /// Tree node the controller is at, if the abstract game is still running.
    pub fn node(&self) -> Option<u32> {
        self.cursor.map(|c| c.node.0)
    }

    pub fn act(
        &mut self,
        plan: &PunishmentPlan,
        track: &Track,
        state: &LiveState,
        rng: &mut ChaCha8Rng,
        samples: &mut alloc::vec::Vec<PolicySample>,
    ) -> Result<LiveAction, ControlError> {
        let cfg = plan.config();
        let boundary = state.tick % cfg.ticks_per_step() == 0;
        if boundary {
            self.on_boundary(plan, track, state, rng, samples)?;
        }
        let p = state.sdc_cell;
        let action = match self.intent {
            Intent::Drive => LiveAction::Forward,
            Intent::Enter if !track.on_bridge(p) => LiveAction::Forward,
            Intent::Enter => LiveAction::Stay,
            // Catch up if still short of the bridge; otherwise creep one cell
            // per step toward the far end.
            Intent::Hold if !track.on_bridge(p) => LiveAction::Forward,
            Intent::Hold if boundary && track.on_bridge(p + 1) => LiveAction::Forward,
            Intent::Hold => LiveAction::Stay,
            Intent::Retreat if track.on_bridge(p) => LiveAction::Backward,
            Intent::Retreat | Intent::Wait => LiveAction::Stay,
        };
        Ok(action)
    }

    fn on_boundary(
        &mut self,
        plan: &PunishmentPlan,
        track: &Track,
        state: &LiveState,
        rng: &mut ChaCha8Rng,
        samples: &mut alloc::vec::Vec<PolicySample>,
    ) -> Result<(), ControlError> {
        let game = &plan.game;
        let Some(c) = self.cursor else {
            self.intent = Intent::Drive;
            return Ok(());
        };
        let at = c.at.expect("cursor is dropped at leaves");
        let seen = track.position(state.human_cell);
        let human_move = match (at.human_pos, seen) {
            (a, b) if a == b => AbstractMove::Stay,
            (Position::BeforeBridge, Position::OnBridge) | (Position::OnBridge, Position::Finish) => {
                AbstractMove::Forward
            }
            (Position::OnBridge, Position::BeforeBridge) => AbstractMove::Backward,
            (from, to) => {
                return Err(ControlError::Unmapped {
                    tick: state.tick,
                    from,
                    to,
                })
            }
        };
        let Some(c) = game.advance(&c, human_move) else {
            return Err(ControlError::Unmapped {
                tick: state.tick,
                from: at.human_pos,
                to: seen,
            });
        };
        if c.at.is_none() {
            self.cursor = None;
            self.intent = Intent::Drive;
            return Ok(());
        }
        debug_assert_eq!(game.tree.owner(c.node), Owner::Leader);
        let dist = plan
            .policy
            .get(c.node)
            .ok_or(ControlError::NoPolicyEntry { tick: state.tick })?;
        let a = if dist.is_pure() {
            dist.weights()[0].0
        } else {
            let draw: u32 = rng.gen();
            let a = dist.pick(Value::new(draw as i128, 1i128 << 32));
            samples.push(PolicySample {
                tick: state.tick,
                node: c.node.0,
                draw,
                action: game.move_of(a),
            });
            a
        };
        let m = game.move_of(a);
        let from = c.at.expect("decision node").sdc_pos;
        let next = game.advance(&c, m).expect("policy actions are legal");
        self.intent = match (next.at, from, m) {
            (None, _, _) => Intent::Drive,
            (Some(_), Position::OnBridge, AbstractMove::Forward) => Intent::Drive,
            (Some(_), _, AbstractMove::Forward) => Intent::Enter,
            (Some(_), Position::OnBridge, AbstractMove::Stay) => Intent::Hold,
            (Some(_), _, AbstractMove::Backward) => Intent::Retreat,
            (Some(_), _, AbstractMove::Stay) => Intent::Wait,
        };
        self.cursor = next.at.map(|_| next);
        Ok(())
    }
}

impl core::error::Error for ControlError {}
