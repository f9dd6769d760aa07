//! Scripted stand-ins for human drivers.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::value::Cents;

use super::episode::{Episode, EpisodeError, SearchKey};
use super::live::{LiveAction, Side, Track};

/// A human driver model. `Adaptive` counts punishing rounds it has seen, so
/// models carry state across the episodes of a session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HumanModel {
    /// Drives forward every tick.
    AlwaysBully,
    /// Respects the right of way.
    AlwaysFair,
    /// Bullies until it has sat through `threshold` punishing rounds, then
    /// behaves. A round that starts with the horn on counts as punishing,
    /// and the model complies during it.
    Adaptive { threshold: u32, punished: u32 },
    /// Replays the actions, then stays put.
    Scripted(Vec<LiveAction>),
    /// Searches every action sequence for the best payoff.
    BestResponse,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseModelError(pub String);

impl fmt::Display for ParseModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown human model '{}' (expected always-bully, always-fair, adaptive:N, best-response or scripted:ACTION,...)",
            self.0
        )
    }
}

impl core::str::FromStr for HumanModel {
    type Err = ParseModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseModelError(s.to_string());
        match s {
            "always-bully" => return Ok(HumanModel::AlwaysBully),
            "always-fair" => return Ok(HumanModel::AlwaysFair),
            "best-response" => return Ok(HumanModel::BestResponse),
            _ => {}
        }
        if let Some(n) = s.strip_prefix("adaptive:") {
            let threshold = n.parse().map_err(|_| err())?;
            return Ok(HumanModel::adaptive(threshold));
        }
        if let Some(list) = s.strip_prefix("scripted:") {
            let actions = list
                .split(',')
                .filter(|a| !a.is_empty())
                .map(|a| LiveAction::from_label(a.trim()).ok_or_else(err))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(HumanModel::Scripted(actions));
        }
        Err(err())
    }
}

impl fmt::Display for HumanModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HumanModel::AlwaysBully => f.write_str("always-bully"),
            HumanModel::AlwaysFair => f.write_str("always-fair"),
            HumanModel::Adaptive { threshold, .. } => write!(f, "adaptive:{threshold}"),
            HumanModel::BestResponse => f.write_str("best-response"),
            HumanModel::Scripted(actions) => {
                f.write_str("scripted:")?;
                for (i, a) in actions.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(a.label())?;
                }
                Ok(())
            }
        }
    }
}

impl HumanModel {
    pub fn adaptive(threshold: u32) -> Self {
        HumanModel::Adaptive { threshold, punished: 0 }
    }

    /// Drives one episode to the end and returns it ready to `finish`.
    pub fn play(&mut self, mut ep: Episode) -> Result<Episode, EpisodeError> {
        let complying = match self {
            HumanModel::Adaptive { threshold, punished } => {
                if ep.state().horn {
                    *punished += 1;
                    true
                } else {
                    *punished >= *threshold
                }
            }
            _ => false,
        };
        let mut memo = BTreeMap::new();
        let mut script = match self {
            HumanModel::Scripted(actions) => actions.clone().into_iter(),
            _ => Vec::new().into_iter(),
        };
        while !ep.is_over() {
            let a = match self {
                HumanModel::AlwaysBully => LiveAction::Forward,
                HumanModel::AlwaysFair => fair_action(&ep),
                HumanModel::Adaptive { .. } if complying => fair_action(&ep),
                HumanModel::Adaptive { .. } => LiveAction::Forward,
                HumanModel::Scripted(_) => script.next().unwrap_or(LiveAction::Stay),
                HumanModel::BestResponse => best_action(&ep, &mut memo)?.1,
            };
            ep.step(a)?;
        }
        Ok(ep)
    }
}

/// Goes when it has the right of way or the SDC is done; otherwise waits at
/// the entrance. Never drives onto a bridge the SDC occupies and backs off
/// when the two meet on it.
pub fn fair_action(ep: &Episode) -> LiveAction {
    let t: &Track = ep.track();
    let s = ep.state();
    let sdc_on = t.on_bridge(s.sdc_cell);
    let sdc_done = t.finished(s.sdc_cell);
    let me_on = t.on_bridge(s.human_cell);
    if me_on && sdc_on {
        return LiveAction::Backward;
    }
    let next_on = t.on_bridge(s.human_cell + 1);
    if !me_on && next_on && sdc_on {
        return LiveAction::Stay;
    }
    let mine = ep.start().right_of_way() == Side::Human;
    if mine || sdc_done || me_on || !next_on {
        LiveAction::Forward
    } else {
        LiveAction::Stay
    }
}

/// Best (payoff, stay-clean) pair reachable from `ep` and the first action
/// achieving it. Ties go to not being judged a bully, then to the order
/// stay, forward, backward.
fn best_action(
    ep: &Episode,
    memo: &mut BTreeMap<SearchKey, (Cents, bool)>,
) -> Result<((Cents, bool), LiveAction), EpisodeError> {
    let mut best: Option<((Cents, bool), LiveAction)> = None;
    for a in LiveAction::ALL {
        let mut next = ep.clone();
        next.step(a)?;
        let v = value_of(&next, memo)?;
        if best.map_or(true, |(b, _)| v > b) {
            best = Some((v, a));
        }
    }
    Ok(best.expect("three actions"))
}

fn value_of(ep: &Episode, memo: &mut BTreeMap<SearchKey, (Cents, bool)>) -> Result<(Cents, bool), EpisodeError> {
    if ep.is_over() {
        let rec = ep.clone().finish();
        return Ok((rec.human_payoff_cents, !rec.verdict.bullied));
    }
    let key = ep.search_key();
    if let Some(v) = memo.get(&key) {
        return Ok(*v);
    }
    let (v, _) = best_action(ep, memo)?;
    memo.insert(key, v);
    Ok(v)
}

impl core::error::Error for ParseModelError {}
