//! One live episode: tick loop, horn, scoring, bully verdict.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::value::Cents;

use super::config::BridgeConfig;
use super::control::{ControlError, PolicySample, PunishingController, PunishmentPlan};
use super::live::{cautious_policy, LiveAction, LiveState, Mode, Side, StartAssignment, Track};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BullyCondition {
    /// The SDC had the right of way, was pushed back off the bridge, and the
    /// human finished first.
    ForcedBackoffFinishFirst,
    /// The SDC did not finish within the round time limit.
    BlockedTimeout,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BullyVerdict {
    pub bullied: bool,
    pub condition: Option<BullyCondition>,
}

impl BullyVerdict {
    pub fn clean() -> Self {
        BullyVerdict::default()
    }

    pub fn bullied(condition: BullyCondition) -> Self {
        BullyVerdict {
            bullied: true,
            condition: Some(condition),
        }
    }
}

/// State at the start of a tick and what each car chose.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TickRecord {
    pub tick: u32,
    pub sdc_cell: u32,
    pub human_cell: u32,
    pub human_action: LiveAction,
    pub sdc_action: LiveAction,
    pub horn: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpisodeRecord {
    pub episode_index: u32,
    pub start_assignment: StartAssignment,
    pub mode: Mode,
    pub rng_seed: u64,
    pub ticks: Vec<TickRecord>,
    pub final_sdc_cell: u32,
    pub final_human_cell: u32,
    pub sdc_finish_ms: Option<u64>,
    pub human_finish_ms: Option<u64>,
    pub sdc_payoff_cents: Cents,
    pub human_payoff_cents: Cents,
    pub verdict: BullyVerdict,
    #[cfg_attr(feature = "serde", serde(default))]
    pub samples: Vec<PolicySample>,
}

impl EpisodeRecord {
    /// Cell pairs before and after each tick.
    pub fn transitions(&self) -> impl Iterator<Item = (&TickRecord, (u32, u32))> + '_ {
        self.ticks.iter().enumerate().map(move |(i, t)| {
            let after = match self.ticks.get(i + 1) {
                Some(n) => (n.sdc_cell, n.human_cell),
                None => (self.final_sdc_cell, self.final_human_cell),
            };
            (t, after)
        })
    }
}

/// `base - floor(t / step)` for a finish at `t`, never negative; 0 if the car never finished.
pub fn episode_reward(finish_ms: Option<u64>, cfg: &BridgeConfig) -> Cents {
    match finish_ms {
        None => 0,
        Some(ms) => (cfg.base_reward - cfg.per_step_cost * (ms / cfg.step_ms()) as Cents).max(0),
    }
}

/// Tit-for-tat: punish the round after a bullied one, cooperate otherwise.
pub fn next_mode(_prev: Mode, verdict: &BullyVerdict) -> Mode {
    if verdict.bullied {
        Mode::Punishing
    } else {
        Mode::Cooperative
    }
}

/// Punishing mode honks all round; cooperative mode only while being bullied.
pub fn horn_signal(mode: Mode, _live: &LiveState, being_bullied_now: bool) -> bool {
    mode == Mode::Punishing || being_bullied_now
}

/// Applies both bully conditions to a finished episode.
pub fn detect_bully(ep: &EpisodeRecord, cfg: &BridgeConfig) -> BullyVerdict {
    let track = Track::new(cfg);
    let forced_off = ep.transitions().any(|(t, (p2, _))| {
        t.sdc_action == LiveAction::Backward
            && track.on_bridge(t.sdc_cell)
            && !track.on_bridge(p2)
            && track.on_bridge(t.human_cell)
    });
    let human_first = match (ep.human_finish_ms, ep.sdc_finish_ms) {
        (Some(h), Some(s)) => h < s,
        (Some(_), None) => true,
        _ => false,
    };
    let limit_ms = cfg.round_limit_s as u64 * 1000;
    if ep.start_assignment.right_of_way() == Side::Sdc && forced_off && human_first {
        BullyVerdict::bullied(BullyCondition::ForcedBackoffFinishFirst)
    } else if ep.sdc_finish_ms.map_or(true, |ms| ms > limit_ms) {
        BullyVerdict::bullied(BullyCondition::BlockedTimeout)
    } else {
        BullyVerdict::clean()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EpisodeError {
    /// Punishing mode needs a solved plan.
    MissingPlan,
    Control(ControlError),
}

impl fmt::Display for EpisodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpisodeError::MissingPlan => f.write_str("punishing mode requires a solved punishment plan"),
            EpisodeError::Control(e) => write!(f, "{e}"),
        }
    }
}

impl From<ControlError> for EpisodeError {
    fn from(e: ControlError) -> Self {
        EpisodeError::Control(e)
    }
}

/// Identifies an episode state for memoized look-ahead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SearchKey {
    cells: (u32, u32, u32),
    finishes: (Option<u64>, Option<u64>),
    forced_off: bool,
    controller: Option<(Option<u32>, u8)>,
    draws: u128,
}

#[derive(Clone, Debug)]
enum Controller {
    Cautious,
    Punishing(Arc<PunishmentPlan>, PunishingController),
}

/// A running episode. Cloning gives an independent copy, which is how the
/// best-response human searches ahead.
#[derive(Clone, Debug)]
pub struct Episode {
    cfg: BridgeConfig,
    track: Track,
    index: u32,
    start: StartAssignment,
    seed: u64,
    state: LiveState,
    controller: Controller,
    rng: ChaCha8Rng,
    ticks: Vec<TickRecord>,
    samples: Vec<PolicySample>,
    sdc_finish_ms: Option<u64>,
    human_finish_ms: Option<u64>,
    forced_off: bool,
}

impl Episode {
    pub fn new(
        cfg: &BridgeConfig,
        index: u32,
        start: StartAssignment,
        mode: Mode,
        plan: Option<Arc<PunishmentPlan>>,
        seed: u64,
    ) -> Result<Episode, EpisodeError> {
        let controller = match (mode, plan) {
            (Mode::Cooperative, _) => Controller::Cautious,
            (Mode::Punishing, Some(plan)) => {
                let c = PunishingController::new(&plan);
                Controller::Punishing(plan, c)
            }
            (Mode::Punishing, None) => return Err(EpisodeError::MissingPlan),
        };
        let (sdc_cell, human_cell) = start.cells(cfg);
        let mut ep = Episode {
            cfg: *cfg,
            track: Track::new(cfg),
            index,
            start,
            seed,
            state: LiveState {
                sdc_cell,
                human_cell,
                tick: 0,
                horn: false,
                mode,
                elapsed_ms: 0,
            },
            controller,
            rng: ChaCha8Rng::seed_from_u64(seed),
            ticks: Vec::new(),
            samples: Vec::new(),
            sdc_finish_ms: None,
            human_finish_ms: None,
            forced_off: false,
        };
        ep.state.horn = ep.horn_now();
        Ok(ep)
    }

    pub fn state(&self) -> &LiveState {
        &self.state
    }

    pub fn track(&self) -> &Track {
        &self.track
    }

    pub fn config(&self) -> &BridgeConfig {
        &self.cfg
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn start(&self) -> StartAssignment {
        self.start
    }

    pub fn mode(&self) -> Mode {
        self.state.mode
    }

    pub fn human_finish_ms(&self) -> Option<u64> {
        self.human_finish_ms
    }

    pub fn sdc_finish_ms(&self) -> Option<u64> {
        self.sdc_finish_ms
    }

    pub fn is_over(&self) -> bool {
        let both = self.track.finished(self.state.sdc_cell) && self.track.finished(self.state.human_cell);
        both || self.state.tick >= self.cfg.round_limit_ticks()
    }

    fn being_bullied_now(&self) -> bool {
        self.state.mode == Mode::Cooperative
            && self.start.right_of_way() == Side::Sdc
            && self.track.on_bridge(self.state.sdc_cell)
            && self.track.on_bridge(self.state.human_cell)
    }

    fn horn_now(&self) -> bool {
        horn_signal(self.state.mode, &self.state, self.being_bullied_now())
    }

    /// Everything that determines how the rest of the episode can unfold.
    pub fn search_key(&self) -> SearchKey {
        let s = &self.state;
        SearchKey {
            cells: (s.sdc_cell, s.human_cell, s.tick),
            finishes: (self.sdc_finish_ms, self.human_finish_ms),
            forced_off: self.forced_off,
            controller: match &self.controller {
                Controller::Cautious => None,
                Controller::Punishing(_, c) => Some(c.key()),
            },
            draws: self.rng.get_word_pos(),
        }
    }

    /// The SDC's move at the current tick, without advancing anything.
    pub fn peek_sdc_action(&self) -> Result<LiveAction, EpisodeError> {
        self.clone().sdc_action()
    }

    fn sdc_action(&mut self) -> Result<LiveAction, EpisodeError> {
        Ok(match &mut self.controller {
            Controller::Cautious => cautious_policy(&self.track, &self.state, self.start.right_of_way()),
            Controller::Punishing(plan, c) => {
                c.act(plan, &self.track, &self.state, &mut self.rng, &mut self.samples)?
            }
        })
    }

    /// Advances one tick with the human's action. Does nothing once over.
    pub fn step(&mut self, human: LiveAction) -> Result<(), EpisodeError> {
        if self.is_over() {
            return Ok(());
        }
        let sdc = self.sdc_action()?;
        let before = self.state;
        self.ticks.push(TickRecord {
            tick: before.tick,
            sdc_cell: before.sdc_cell,
            human_cell: before.human_cell,
            human_action: human,
            sdc_action: sdc,
            horn: before.horn,
        });
        let r = self.track.resolve((before.sdc_cell, before.human_cell), sdc, human);
        if sdc == LiveAction::Backward
            && self.track.on_bridge(before.sdc_cell)
            && !self.track.on_bridge(r.sdc_cell)
            && self.track.on_bridge(before.human_cell)
        {
            self.forced_off = true;
        }
        self.state.sdc_cell = r.sdc_cell;
        self.state.human_cell = r.human_cell;
        self.state.tick += 1;
        self.state.elapsed_ms += self.cfg.tick_ms as u64;
        if self.sdc_finish_ms.is_none() && self.track.finished(r.sdc_cell) {
            self.sdc_finish_ms = Some(self.state.elapsed_ms);
        }
        if self.human_finish_ms.is_none() && self.track.finished(r.human_cell) {
            self.human_finish_ms = Some(self.state.elapsed_ms);
        }
        self.state.horn = self.horn_now();
        Ok(())
    }

    /// Human payoff if the episode ended now.
    pub fn human_payoff(&self) -> Cents {
        episode_reward(self.human_finish_ms, &self.cfg)
    }

    /// Whether the record would already show a forced backoff.
    pub fn forced_off(&self) -> bool {
        self.forced_off
    }

    pub fn finish(self) -> EpisodeRecord {
        let mut rec = EpisodeRecord {
            episode_index: self.index,
            start_assignment: self.start,
            mode: self.state.mode,
            rng_seed: self.seed,
            ticks: self.ticks,
            final_sdc_cell: self.state.sdc_cell,
            final_human_cell: self.state.human_cell,
            sdc_finish_ms: self.sdc_finish_ms,
            human_finish_ms: self.human_finish_ms,
            sdc_payoff_cents: episode_reward(self.sdc_finish_ms, &self.cfg),
            human_payoff_cents: episode_reward(self.human_finish_ms, &self.cfg),
            verdict: BullyVerdict::clean(),
            samples: self.samples,
        };
        rec.verdict = detect_bully(&rec, &self.cfg);
        rec
    }
}

impl core::error::Error for EpisodeError {}
