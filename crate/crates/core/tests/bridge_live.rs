use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use stackel_core::bridge::*;

fn cfg() -> BridgeConfig {
    BridgeConfig::default()
}

fn plan() -> Arc<PunishmentPlan> {
    static P: OnceLock<Arc<PunishmentPlan>> = OnceLock::new();
    P.get_or_init(|| {
        let s = SolvedBridge::solve(&cfg());
        Arc::new(PunishmentPlan::new(&s, cfg().theta).unwrap())
    })
    .clone()
}

fn run(model: &str, start: StartAssignment, mode: Mode, seed: u64) -> EpisodeRecord {
    let mut h: HumanModel = model.parse().unwrap();
    let ep = Episode::new(&cfg(), 0, start, mode, Some(plan()), seed).unwrap();
    h.play(ep).unwrap().finish()
}

fn live(sdc: u32, human: u32) -> LiveState {
    LiveState {
        sdc_cell: sdc,
        human_cell: human,
        tick: 0,
        horn: false,
        mode: Mode::Cooperative,
        elapsed_ms: 0,
    }
}

#[test]
fn cautious_examples() {
    let t = Track::new(&cfg());
    assert_eq!(cautious_policy(&t, &live(0, 4), Side::Human), LiveAction::Stay);
    assert_eq!(cautious_policy(&t, &live(4, 3), Side::Sdc), LiveAction::Backward);
    assert_eq!(cautious_policy(&t, &live(2, 0), Side::Sdc), LiveAction::Forward);
}

#[test]
fn cautious_controller_never_collides() {
    let rep = cautious_safety_check(&cfg(), cfg().round_limit_ticks());
    assert!(rep.is_safe(), "{rep:?}");
    assert!(rep.states > 100);
}

#[test]
fn reward_examples() {
    let c = cfg();
    assert_eq!(episode_reward(Some(2000), &c), 12);
    assert_eq!(episode_reward(Some(0), &c), 13);
    assert_eq!(episode_reward(Some(3999), &c), 12);
    assert_eq!(episode_reward(Some(60_000), &c), 0);
    assert_eq!(episode_reward(None, &c), 0);
}

#[test]
fn mode_and_horn_rules() {
    let bullied = BullyVerdict::bullied(BullyCondition::BlockedTimeout);
    assert_eq!(next_mode(Mode::Cooperative, &bullied), Mode::Punishing);
    assert_eq!(next_mode(Mode::Punishing, &BullyVerdict::clean()), Mode::Cooperative);
    assert_eq!(Mode::default(), Mode::Cooperative);
    let s = live(0, 0);
    assert!(horn_signal(Mode::Punishing, &s, false));
    assert!(horn_signal(Mode::Cooperative, &s, true));
    assert!(!horn_signal(Mode::Cooperative, &s, false));
}

#[test]
fn starts_alternate() {
    assert_eq!(StartAssignment::for_episode(0), StartAssignment::SdcClose);
    assert_eq!(StartAssignment::for_episode(1), StartAssignment::HumanClose);
    let close = (0..20)
        .filter(|i| StartAssignment::for_episode(*i) == StartAssignment::SdcClose)
        .count();
    assert_eq!(close, 10);
}

#[test]
fn far_bully_forcing_a_backoff_is_condition_one() {
    let r = run("always-bully", StartAssignment::SdcClose, Mode::Cooperative, 1);
    assert_eq!(
        r.verdict,
        BullyVerdict::bullied(BullyCondition::ForcedBackoffFinishFirst)
    );
    assert!(r.human_finish_ms < r.sdc_finish_ms);
    assert!(r.ticks.iter().any(|t| t.horn));
}

#[test]
fn parking_on_the_bridge_is_condition_two() {
    let r = run("scripted:forward", StartAssignment::HumanClose, Mode::Cooperative, 1);
    assert_eq!(r.sdc_finish_ms, None);
    assert_eq!(r.ticks.len() as u32, cfg().round_limit_ticks());
    assert_eq!(r.verdict, BullyVerdict::bullied(BullyCondition::BlockedTimeout));
}

#[test]
fn waiting_for_the_sdc_is_clean() {
    let r = run("always-fair", StartAssignment::SdcClose, Mode::Cooperative, 1);
    assert_eq!(r.verdict, BullyVerdict::clean());
    assert!(r.sdc_finish_ms < r.human_finish_ms);
    assert!(r.ticks.iter().all(|t| !t.horn));
}

#[test]
fn fair_human_with_right_of_way_crosses_first() {
    let r = run("always-fair", StartAssignment::HumanClose, Mode::Cooperative, 1);
    assert_eq!(r.verdict, BullyVerdict::clean());
    assert!(r.human_finish_ms < r.sdc_finish_ms);
}

#[test]
fn punishing_sdc_enters_holds_then_finishes() {
    for start in [StartAssignment::SdcClose, StartAssignment::HumanClose] {
        let r = run("scripted:stay", start, Mode::Punishing, 3);
        let t = Track::new(&cfg());
        assert!(r.ticks.iter().all(|k| k.horn));
        assert!(r.ticks.iter().all(|k| k.sdc_action != LiveAction::Backward));
        let entered = r.ticks.iter().position(|k| t.on_bridge(k.sdc_cell)).unwrap();
        assert!(entered <= 4, "{start:?} entered at {entered}");
        let finish = r.sdc_finish_ms.unwrap();
        assert!((18_000..=20_000).contains(&finish), "{start:?} finished at {finish}");
        for k in &r.ticks[entered..] {
            assert!(
                t.on_bridge(k.sdc_cell) || k.tick as u64 * 1000 >= 18_000,
                "{start:?} {k:?}"
            );
        }
        assert_eq!(r.sdc_payoff_cents, 4);
    }
}

#[test]
fn punished_humans_stay_under_the_cap() {
    for model in [
        "always-bully",
        "always-fair",
        "best-response",
        "scripted:forward,forward,forward,forward,forward",
    ] {
        for start in [StartAssignment::SdcClose, StartAssignment::HumanClose] {
            let r = run(model, start, Mode::Punishing, 9);
            assert!(
                r.human_payoff_cents <= cfg().theta,
                "{model} {start:?}: {}",
                r.human_payoff_cents
            );
        }
    }
}

#[test]
fn best_response_exploits_the_cautious_sdc() {
    let r = run("best-response", StartAssignment::SdcClose, Mode::Cooperative, 1);
    let fair = run("always-fair", StartAssignment::SdcClose, Mode::Cooperative, 1);
    assert!(r.human_payoff_cents > fair.human_payoff_cents);
}

#[test]
fn model_names_round_trip() {
    for s in [
        "always-bully",
        "always-fair",
        "adaptive:3",
        "best-response",
        "scripted:forward,stay,backward",
    ] {
        let m: HumanModel = s.parse().unwrap();
        assert_eq!(m.to_string(), s);
    }
    assert!("sometimes".parse::<HumanModel>().is_err());
    assert!("scripted:left".parse::<HumanModel>().is_err());
}

#[test]
fn punishing_without_a_plan_fails() {
    let e = Episode::new(&cfg(), 0, StartAssignment::SdcClose, Mode::Punishing, None, 0).unwrap_err();
    assert_eq!(e, EpisodeError::MissingPlan);
}

#[test]
fn default_config_is_valid() {
    assert!(cfg().validate().is_ok());
    assert!(BridgeConfig { theta: 13, ..cfg() }.validate().is_err());
    assert!(BridgeConfig { tick_ms: 0, ..cfg() }.validate().is_err());
}

fn action() -> impl Strategy<Value = LiveAction> {
    prop_oneof![
        Just(LiveAction::Forward),
        Just(LiveAction::Stay),
        Just(LiveAction::Backward)
    ]
}

fn start() -> impl Strategy<Value = StartAssignment> {
    prop_oneof![Just(StartAssignment::SdcClose), Just(StartAssignment::HumanClose)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn records_are_consistent(
        script in prop::collection::vec(action(), 0..30),
        start in start(),
        punishing in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let c = cfg();
        let mode = if punishing { Mode::Punishing } else { Mode::Cooperative };
        let mut h = HumanModel::Scripted(script);
        let ep = Episode::new(&c, 0, start, mode, Some(plan()), seed).unwrap();
        let r = h.play(ep).unwrap().finish();
        let t = Track::new(&c);
        for (i, k) in r.ticks.iter().enumerate() {
            prop_assert_eq!(k.tick as usize, i);
        }
        for (k, (p, q)) in r.transitions() {
            let shared = t.on_bridge(p) && t.on_bridge(q) && p + q == 2 * c.approach_cells + c.bridge_cells - 1;
            prop_assert!(!shared, "shared bridge cell after tick {}", k.tick);
        }
        prop_assert_eq!(r.human_payoff_cents, episode_reward(r.human_finish_ms, &c));
        prop_assert_eq!(r.sdc_payoff_cents, episode_reward(r.sdc_finish_ms, &c));
        prop_assert_eq!(r.verdict, detect_bully(&r, &c));
        prop_assert_eq!(r.verdict.bullied, r.verdict.condition.is_some());
        if punishing {
            prop_assert!(r.human_payoff_cents <= c.theta);
        }
        if !punishing && start == StartAssignment::SdcClose {
            for k in &r.ticks {
                if k.horn {
                    prop_assert!(r.verdict.bullied || t.on_bridge(k.human_cell));
                }
            }
        }
    }

    #[test]
    fn episodes_replay_identically(script in prop::collection::vec(action(), 0..30), start in start(), seed in any::<u64>()) {
        let c = cfg();
        let play = || {
            let ep = Episode::new(&c, 0, start, Mode::Punishing, Some(plan()), seed).unwrap();
            HumanModel::Scripted(script.clone()).play(ep).unwrap().finish()
        };
        prop_assert_eq!(play(), play());
    }

    #[test]
    fn resolution_keeps_cars_apart(p in 0u32..8, q in 0u32..8, a in action(), b in action()) {
        let t = Track::new(&cfg());
        prop_assume!(!t.conflict((p, q), (p, q)));
        let r = t.resolve((p, q), a, b);
        prop_assert!(!t.conflict((p, q), (r.sdc_cell, r.human_cell)));
    }
}
