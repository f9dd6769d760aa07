//! Headless sessions: scripted humans against the control or the
//! tit-for-tat SDC, and the on-disk session layout.
//!
//! A log directory holds `sessions/{id}/session.json` (who played, under
//! which group, seed and config) and `sessions/{id}/episodes.jsonl`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use stackel_core::bridge::{
    next_mode, BridgeConfig, Episode, EpisodeError, EpisodeRecord, HumanModel, Mode, PunishmentPlan, SolvedBridge,
    StartAssignment,
};
use stackel_core::{Cents, ExtractError};

use crate::episodes::{read_episodes, write_episodes, EpisodeLogError};

/// Episodes per session.
pub const SESSION_EPISODES: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    /// Always the cautious SDC.
    Control,
    /// Tit-for-tat between cautious and punishing.
    Experimental,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::Control => "control",
            Group::Experimental => "experimental",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "control" => Ok(Group::Control),
            "experimental" => Ok(Group::Experimental),
            _ => Err(format!("unknown group '{s}' (expected control or experimental)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("episode {index}: {error}")]
    Episode { index: u32, error: EpisodeError },
    #[error("punishment cap is infeasible: {0}")]
    Infeasible(ExtractError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error(transparent)]
    Log(#[from] EpisodeLogError),
}

/// Solves the bridge tree for `cfg` and extracts the punishing policy at `cfg.theta`.
pub fn solve_plan(cfg: &BridgeConfig) -> Result<Arc<PunishmentPlan>, HarnessError> {
    let solved = SolvedBridge::solve(cfg);
    PunishmentPlan::new(&solved, cfg.theta)
        .map(Arc::new)
        .map_err(HarnessError::Infeasible)
}

/// Seed of episode `index` within a session.
pub fn episode_seed(session_seed: u64, index: u32) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(session_seed);
    rng.set_stream(index as u64 + 1);
    rng.next_u64()
}

/// Seed of the `n`th session drawn from a base seed.
pub fn session_seed(base: u64, n: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(u64::MAX - n);
    rng.next_u64()
}

/// Plays one episode of `human` against the SDC in `mode`.
pub fn run_episode(
    human: &mut HumanModel,
    mode: Mode,
    cfg: &BridgeConfig,
    plan: Option<Arc<PunishmentPlan>>,
    index: u32,
    seed: u64,
) -> Result<EpisodeRecord, HarnessError> {
    let err = |error| HarnessError::Episode { index, error };
    let ep = Episode::new(cfg, index, StartAssignment::for_episode(index), mode, plan, seed).map_err(err)?;
    Ok(human.play(ep).map_err(err)?.finish())
}

/// Sequences the episodes of one session: start alternation, episode seeds
/// and, in the experimental group, tit-for-tat mode switching. The harness
/// and the server both drive sessions through this.
#[derive(Clone, Debug)]
pub struct SessionDriver {
    cfg: BridgeConfig,
    group: Group,
    plan: Option<Arc<PunishmentPlan>>,
    seed: u64,
    episodes: u32,
    mode: Mode,
    records: Vec<EpisodeRecord>,
}

impl SessionDriver {
    /// The experimental group needs a plan; the control group ignores it.
    pub fn new(cfg: &BridgeConfig, group: Group, plan: Option<Arc<PunishmentPlan>>, seed: u64, episodes: u32) -> Self {
        SessionDriver {
            cfg: *cfg,
            group,
            plan: if group == Group::Experimental { plan } else { None },
            seed,
            episodes,
            mode: Mode::Cooperative,
            records: Vec::new(),
        }
    }

    /// Picks up after `records`, as if they had just been played.
    pub fn resume(mut self, records: Vec<EpisodeRecord>) -> Self {
        for r in &records {
            self.advance_mode(r);
        }
        self.records = records;
        self
    }

    fn advance_mode(&mut self, rec: &EpisodeRecord) {
        if self.group == Group::Experimental {
            self.mode = next_mode(self.mode, &rec.verdict);
        }
    }

    pub fn config(&self) -> &BridgeConfig {
        &self.cfg
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn episodes(&self) -> u32 {
        self.episodes
    }

    /// Index of the next episode to play.
    pub fn next_index(&self) -> u32 {
        self.records.len() as u32
    }

    pub fn is_done(&self) -> bool {
        self.next_index() >= self.episodes
    }

    pub fn records(&self) -> &[EpisodeRecord] {
        &self.records
    }

    pub fn cumulative_cents(&self) -> Cents {
        self.records.iter().map(|r| r.human_payoff_cents).sum()
    }

    /// The next episode, ready to step; `None` once the session is complete.
    pub fn start_episode(&self) -> Result<Option<Episode>, HarnessError> {
        if self.is_done() {
            return Ok(None);
        }
        let index = self.next_index();
        let ep = Episode::new(
            &self.cfg,
            index,
            StartAssignment::for_episode(index),
            self.mode,
            self.plan.clone(),
            episode_seed(self.seed, index),
        )
        .map_err(|error| HarnessError::Episode { index, error })?;
        Ok(Some(ep))
    }

    /// Records a finished episode and sets the next episode's mode.
    pub fn complete(&mut self, ep: Episode) -> &EpisodeRecord {
        let rec = ep.finish();
        self.advance_mode(&rec);
        self.records.push(rec);
        self.records.last().expect("just pushed")
    }
}

/// A finished (or partial) session with who played it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionRecord {
    pub info: SessionInfo,
    pub episodes: Vec<EpisodeRecord>,
}

/// Contents of `session.json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionInfo {
    pub session_id: String,
    pub group: Group,
    /// Human model name, or `live` for a person at the server.
    pub human: String,
    pub seed: u64,
    pub episodes: u32,
    pub config: BridgeConfig,
}

impl SessionRecord {
    pub fn group(&self) -> Group {
        self.info.group
    }

    pub fn bully_events(&self) -> u32 {
        self.episodes.iter().filter(|e| e.verdict.bullied).count() as u32
    }

    pub fn payoffs(&self) -> Vec<Cents> {
        self.episodes.iter().map(|e| e.human_payoff_cents).collect()
    }

    pub fn total_cents(&self) -> Cents {
        self.episodes.iter().map(|e| e.human_payoff_cents).sum()
    }
}

/// Plays a whole session of `human` in `group`.
pub fn run_session(
    session_id: &str,
    mut human: HumanModel,
    group: Group,
    episodes: u32,
    cfg: &BridgeConfig,
    plan: Option<Arc<PunishmentPlan>>,
    seed: u64,
) -> Result<SessionRecord, HarnessError> {
    let info = SessionInfo {
        session_id: session_id.to_string(),
        group,
        human: human.to_string(),
        seed,
        episodes,
        config: *cfg,
    };
    let mut driver = SessionDriver::new(cfg, group, plan, seed, episodes);
    while let Some(ep) = driver.start_episode()? {
        let index = ep.index();
        let ep = human.play(ep).map_err(|error| HarnessError::Episode { index, error })?;
        driver.complete(ep);
    }
    Ok(SessionRecord {
        info,
        episodes: driver.records,
    })
}

pub fn session_dir(root: &Path, session_id: &str) -> PathBuf {
    root.join("sessions").join(session_id)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn session_info_json(info: &SessionInfo) -> String {
    let mut s = serde_json::to_string_pretty(info).expect("session info serializes");
    s.push('\n');
    s
}

/// Creates the session directory and writes `session.json`.
pub fn write_session_info(root: &Path, info: &SessionInfo) -> Result<PathBuf, HarnessError> {
    let dir = session_dir(root, &info.session_id);
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let path = dir.join("session.json");
    std::fs::write(&path, session_info_json(info)).map_err(io_err(&path))?;
    Ok(dir)
}

pub fn write_session(root: &Path, s: &SessionRecord) -> Result<(), HarnessError> {
    let dir = write_session_info(root, &s.info)?;
    let path = dir.join("episodes.jsonl");
    write_episodes(&s.episodes, &path).map_err(io_err(&path))
}

pub fn read_session(dir: &Path) -> Result<SessionRecord, HarnessError> {
    let path = dir.join("session.json");
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let info: SessionInfo = serde_json::from_str(&text).map_err(|e| HarnessError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let log = dir.join("episodes.jsonl");
    let episodes = if log.exists() { read_episodes(&log)? } else { Vec::new() };
    Ok(SessionRecord { info, episodes })
}

/// Every session under `root/sessions`, sorted by id.
pub fn read_sessions(root: &Path) -> Result<Vec<SessionRecord>, HarnessError> {
    let base = root.join("sessions");
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(&base)
        .map_err(io_err(&base))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("session.json").is_file())
        .collect();
    dirs.sort();
    dirs.iter().map(|d| read_session(d)).collect()
}
