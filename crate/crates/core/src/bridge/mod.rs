//! The one-lane bridge: the abstract game the solver works on, and the live
//! tick-based game people play against the SDC.

mod config;
mod control;
mod episode;
mod game;
mod human;
mod live;
mod regime;

pub use config::{BridgeConfig, ConfigError};
pub use control::{ControlError, PolicySample, PunishingController, PunishmentPlan};
pub use episode::{
    detect_bully, episode_reward, horn_signal, next_mode, BullyCondition, BullyVerdict, Episode, EpisodeError,
    EpisodeRecord, SearchKey, TickRecord,
};
pub use game::{build_bridge_tree, AbstractArrangement, AbstractMove, BridgeGame, Cursor, Mover, Position, Transition};
pub use human::{fair_action, HumanModel, ParseModelError};
pub use live::{
    cautious_policy, cautious_safety_check, LiveAction, LiveState, Mode, Resolution, SafetyReport, Side,
    StartAssignment, Track,
};
pub use regime::{classify_regime, Behavior, RegimeLabel, RegimeReport, SolvedBridge};
