//! Bridge game parameters.

use core::fmt;

use crate::value::Cents;

use super::game::Position;

/// Every knob of the bridge game, abstract and live.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct BridgeConfig {
    /// Decision rounds per player in the abstract tree (depth is twice this).
    pub horizon_rounds: u32,
    pub base_reward: Cents,
    pub per_step_cost: Cents,
    /// Cap on the human's value used by the punishing controller.
    pub theta: Cents,
    /// Cells on each approach road, bridge entrance included.
    pub approach_cells: u32,
    pub bridge_cells: u32,
    /// Starting cell of the car that starts close to the bridge.
    pub close_start: u32,
    pub far_start: u32,
    pub tick_ms: u32,
    pub seconds_per_step: u32,
    pub round_limit_s: u32,
    /// Where each car starts in the abstract game.
    pub sdc_abstract_start: Position,
    pub human_abstract_start: Position,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        BridgeConfig {
            horizon_rounds: 10,
            base_reward: 13,
            per_step_cost: 1,
            theta: 2,
            approach_cells: 3,
            bridge_cells: 4,
            close_start: 2,
            far_start: 0,
            tick_ms: 1000,
            seconds_per_step: 2,
            round_limit_s: 26,
            sdc_abstract_start: Position::BeforeBridge,
            human_abstract_start: Position::BeforeBridge,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigError {
    NotPositive(&'static str),
    ThetaTooLarge { theta: Cents, base_reward: Cents },
    StartOutsideApproach(&'static str),
    FarStartAhead,
    UnevenTicks,
    FinishedAtStart,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::NotPositive(field) => write!(f, "{field} must be positive"),
            ConfigError::ThetaTooLarge { theta, base_reward } => {
                write!(f, "theta ({theta}) must be below base_reward ({base_reward})")
            }
            ConfigError::StartOutsideApproach(field) => write!(f, "{field} must lie on the approach road"),
            ConfigError::FarStartAhead => f.write_str("far_start must not be ahead of close_start"),
            ConfigError::UnevenTicks => {
                f.write_str("seconds_per_step and round_limit_s must be whole numbers of ticks")
            }
            ConfigError::FinishedAtStart => f.write_str("an abstract start position cannot be finish"),
        }
    }
}

impl BridgeConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("horizon_rounds", self.horizon_rounds as i64),
            ("base_reward", self.base_reward),
            ("per_step_cost", self.per_step_cost),
            ("theta", self.theta),
            ("approach_cells", self.approach_cells as i64),
            ("bridge_cells", self.bridge_cells as i64),
            ("tick_ms", self.tick_ms as i64),
            ("seconds_per_step", self.seconds_per_step as i64),
            ("round_limit_s", self.round_limit_s as i64),
        ];
        if let Some((field, _)) = positive.iter().find(|(_, v)| *v <= 0) {
            return Err(ConfigError::NotPositive(field));
        }
        if self.theta >= self.base_reward {
            return Err(ConfigError::ThetaTooLarge {
                theta: self.theta,
                base_reward: self.base_reward,
            });
        }
        if self.close_start >= self.approach_cells {
            return Err(ConfigError::StartOutsideApproach("close_start"));
        }
        if self.far_start > self.close_start {
            return Err(ConfigError::FarStartAhead);
        }
        let step_ms = self.seconds_per_step as u64 * 1000;
        let limit_ms = self.round_limit_s as u64 * 1000;
        if step_ms % self.tick_ms as u64 != 0 || limit_ms % self.tick_ms as u64 != 0 {
            return Err(ConfigError::UnevenTicks);
        }
        if self.sdc_abstract_start == Position::Finish || self.human_abstract_start == Position::Finish {
            return Err(ConfigError::FinishedAtStart);
        }
        Ok(())
    }

    /// Live ticks per abstract step.
    pub fn ticks_per_step(&self) -> u32 {
        self.seconds_per_step * 1000 / self.tick_ms
    }

    pub fn round_limit_ticks(&self) -> u32 {
        self.round_limit_s * 1000 / self.tick_ms
    }

    pub fn step_ms(&self) -> u64 {
        self.seconds_per_step as u64 * 1000
    }
}

impl core::error::Error for ConfigError {}
