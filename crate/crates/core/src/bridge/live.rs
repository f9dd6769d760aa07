//! Live, tick-based bridge play.
//!
//! Each car has its own progress counter: cells `0..approach` are its
//! approach road (two lanes), the next `bridge` cells are the shared one-lane
//! bridge, and `approach + bridge` is its finish. On a common axis running
//! from the SDC's road to the human's road, SDC progress `p` sits at `p` and
//! human progress `q` at `2 * approach + bridge - 1 - q`.
//!
//! Both cars move every tick. A pair of moves conflicts if it would leave both
//! cars on the bridge facing each other or past each other, or if the cars
//! would swap order with one of them ending on the bridge. Conflicts are
//! settled by cancelling moves onto the bridge first, then every forward move.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use super::config::BridgeConfig;
use super::game::Position;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LiveAction {
    Forward,
    Stay,
    Backward,
}

impl LiveAction {
    pub const ALL: [LiveAction; 3] = [LiveAction::Stay, LiveAction::Forward, LiveAction::Backward];

    pub fn label(self) -> &'static str {
        match self {
            LiveAction::Forward => "forward",
            LiveAction::Stay => "stay",
            LiveAction::Backward => "backward",
        }
    }

    pub fn from_label(s: &str) -> Option<LiveAction> {
        LiveAction::ALL.into_iter().find(|a| a.label() == s)
    }
}

impl fmt::Display for LiveAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Sdc,
    Human,
}

/// Which car starts close to the bridge. That car has the right of way.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StartAssignment {
    SdcClose,
    HumanClose,
}

impl StartAssignment {
    /// Episodes alternate, beginning with the SDC close.
    pub fn for_episode(index: u32) -> StartAssignment {
        if index % 2 == 0 {
            StartAssignment::SdcClose
        } else {
            StartAssignment::HumanClose
        }
    }

    pub fn right_of_way(self) -> Side {
        match self {
            StartAssignment::SdcClose => Side::Sdc,
            StartAssignment::HumanClose => Side::Human,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StartAssignment::SdcClose => "sdc-close",
            StartAssignment::HumanClose => "human-close",
        }
    }

    /// Starting cells (SDC, human).
    pub fn cells(self, cfg: &BridgeConfig) -> (u32, u32) {
        match self {
            StartAssignment::SdcClose => (cfg.close_start, cfg.far_start),
            StartAssignment::HumanClose => (cfg.far_start, cfg.close_start),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Mode {
    #[default]
    Cooperative,
    Punishing,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Cooperative => "cooperative",
            Mode::Punishing => "punishing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Track {
    pub approach: u32,
    pub bridge: u32,
}

impl Track {
    pub fn new(cfg: &BridgeConfig) -> Track {
        Track {
            approach: cfg.approach_cells,
            bridge: cfg.bridge_cells,
        }
    }

    pub fn finish(&self) -> u32 {
        self.approach + self.bridge
    }

    pub fn on_bridge(&self, progress: u32) -> bool {
        progress >= self.approach && progress < self.finish()
    }

    pub fn finished(&self, progress: u32) -> bool {
        progress >= self.finish()
    }

    /// Abstract position of a live progress value. Everything short of the
    /// bridge counts as before it.
    pub fn position(&self, progress: u32) -> Position {
        if self.finished(progress) {
            Position::Finish
        } else if self.on_bridge(progress) {
            Position::OnBridge
        } else {
            Position::BeforeBridge
        }
    }

    fn sdc_axis(&self, p: u32) -> i64 {
        p as i64
    }

    fn human_axis(&self, q: u32) -> i64 {
        (2 * self.approach + self.bridge) as i64 - 1 - q as i64
    }

    fn moved(&self, progress: u32, a: LiveAction) -> u32 {
        if self.finished(progress) {
            return progress;
        }
        match a {
            LiveAction::Forward => progress + 1,
            LiveAction::Stay => progress,
            LiveAction::Backward => progress.saturating_sub(1),
        }
    }

    /// Whether going from cells `(p, q)` to `(p2, q2)` runs the cars into each other.
    pub fn conflict(&self, (p, q): (u32, u32), (p2, q2): (u32, u32)) -> bool {
        let (x, y) = (self.sdc_axis(p), self.human_axis(q));
        let (x2, y2) = (self.sdc_axis(p2), self.human_axis(q2));
        let (on_s, on_h) = (self.on_bridge(p2), self.on_bridge(q2));
        let facing = on_s && on_h && x2 >= y2;
        let swapped = x < y && x2 >= y2 && (on_s || on_h);
        facing || swapped
    }

    /// Applies both moves, cancelling moves as needed to avoid a conflict.
    pub fn resolve(&self, (p, q): (u32, u32), sdc: LiveAction, human: LiveAction) -> Resolution {
        let enters = |from: u32, to: u32| !self.on_bridge(from) && self.on_bridge(to);
        let mut s = self.moved(p, sdc);
        let mut h = self.moved(q, human);
        let mut out = Resolution {
            sdc_cell: s,
            human_cell: h,
            sdc_cancelled: false,
            human_cancelled: false,
        };
        if !self.conflict((p, q), (s, h)) {
            return out;
        }
        if enters(p, s) {
            s = p;
            out.sdc_cancelled = true;
        }
        if enters(q, h) {
            h = q;
            out.human_cancelled = true;
        }
        if self.conflict((p, q), (s, h)) {
            if s > p {
                s = p;
                out.sdc_cancelled = true;
            }
            if h > q {
                h = q;
                out.human_cancelled = true;
            }
        }
        if self.conflict((p, q), (s, h)) {
            s = p;
            h = q;
            out.sdc_cancelled |= sdc != LiveAction::Stay;
            out.human_cancelled |= human != LiveAction::Stay;
        }
        out.sdc_cell = s;
        out.human_cell = h;
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub sdc_cell: u32,
    pub human_cell: u32,
    pub sdc_cancelled: bool,
    pub human_cancelled: bool,
}

/// What the server and the engine know at a tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LiveState {
    pub sdc_cell: u32,
    pub human_cell: u32,
    pub tick: u32,
    pub horn: bool,
    pub mode: Mode,
    pub elapsed_ms: u64,
}

impl LiveState {
    pub fn elapsed_s(&self) -> f64 {
        self.elapsed_ms as f64 / 1000.0
    }
}

/// The control group's SDC.
///
/// Starting far, it waits until the human has finished. Starting close, it
/// drives on, but backs off the bridge while the human is on it and holds at
/// the entrance until the bridge is clear.
pub fn cautious_policy(track: &Track, state: &LiveState, right_of_way: Side) -> LiveAction {
    let human_done = track.finished(state.human_cell);
    match right_of_way {
        Side::Human if !human_done => LiveAction::Stay,
        Side::Human => LiveAction::Forward,
        Side::Sdc => {
            if track.on_bridge(state.human_cell) {
                if track.on_bridge(state.sdc_cell) {
                    LiveAction::Backward
                } else {
                    LiveAction::Stay
                }
            } else {
                LiveAction::Forward
            }
        }
    }
}

/// Outcome of the exhaustive adversarial search against `cautious_policy`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafetyReport {
    pub states: usize,
    /// (start, tick, sdc cell, human cell) where the SDC's move had to be cancelled.
    pub cancelled: Vec<(StartAssignment, u32, u32, u32)>,
    /// (start, tick, sdc cell, human cell) where both cars stood on one bridge cell.
    pub collisions: Vec<(StartAssignment, u32, u32, u32)>,
}

impl SafetyReport {
    pub fn is_safe(&self) -> bool {
        self.cancelled.is_empty() && self.collisions.is_empty()
    }
}

/// Explores every human action sequence up to `ticks` long from both starts.
/// The cautious SDC is safe if its chosen move never needs cancelling and the
/// cars never share a bridge cell.
pub fn cautious_safety_check(cfg: &BridgeConfig, ticks: u32) -> SafetyReport {
    let track = Track::new(cfg);
    let mut report = SafetyReport {
        states: 0,
        cancelled: Vec::new(),
        collisions: Vec::new(),
    };
    for start in [StartAssignment::SdcClose, StartAssignment::HumanClose] {
        let (p0, q0) = start.cells(cfg);
        let mut frontier: BTreeSet<(u32, u32)> = BTreeSet::new();
        frontier.insert((p0, q0));
        for tick in 0..ticks {
            let mut next = BTreeSet::new();
            for &(p, q) in &frontier {
                report.states += 1;
                let state = LiveState {
                    sdc_cell: p,
                    human_cell: q,
                    tick,
                    horn: false,
                    mode: Mode::Cooperative,
                    elapsed_ms: 0,
                };
                let sdc = cautious_policy(&track, &state, start.right_of_way());
                for human in LiveAction::ALL {
                    let r = track.resolve((p, q), sdc, human);
                    if r.sdc_cancelled {
                        report.cancelled.push((start, tick, p, q));
                    }
                    let shared = track.on_bridge(r.sdc_cell)
                        && track.on_bridge(r.human_cell)
                        && track.sdc_axis(r.sdc_cell) == track.human_axis(r.human_cell);
                    if shared {
                        report.collisions.push((start, tick + 1, r.sdc_cell, r.human_cell));
                    }
                    next.insert((r.sdc_cell, r.human_cell));
                }
            }
            frontier = next;
        }
        report.states += frontier.len();
    }
    report.cancelled.sort_by_key(|c| (c.1, c.2, c.3));
    report.cancelled.dedup();
    report.collisions.sort_by_key(|c| (c.1, c.2, c.3));
    report.collisions.dedup();
    report
}
