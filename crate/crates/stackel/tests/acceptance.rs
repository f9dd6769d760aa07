//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Run with `cargo test --test acceptance`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use stackel::harness::{run_session, session_seed, Group, SessionRecord, SESSION_EPISODES};
use stackel::stats::{fisher_exact, group_persistence, ContingencyTable, PersistenceCurve};
use stackel_core::bridge::{
    cautious_safety_check, BridgeConfig, HumanModel, Mode, PunishmentPlan, RegimeLabel, SolvedBridge, StartAssignment,
};
use stackel_core::{
    best_response, enumerate_pure_leader, extract_equilibrium, extract_punishment, random_tree_with, solve_frontier,
    unroll_policy, Cap, GameTree, GridSearch, OracleError, Owner, RandomTreeParams, Value,
};

const ORACLE_TREES: usize = 1_000;
const ORACLE_LIMIT: Duration = Duration::from_secs(5 * 60);
const SOLVE_LIMIT: Duration = Duration::from_secs(10 * 60);
const MEMORY_LIMIT_KB: u64 = 8 * 1024 * 1024;
const MAX_SEGMENTS: usize = 11;
const EXPECTED_NODES: usize = 2_621_437;
const EXPECTED_LEAVES: usize = 1_572_862;
const FISHER_BAND: (f64, f64) = (0.0013, 0.0019);
const PUNISHED_ROUND_CAP_CENTS: i64 = 2;
const SAFETY_TICKS: u32 = 26;
const SESSIONS_PER_MODEL: u64 = 10;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, ok: bool, name: &str, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn oracle_tree(seed: u64) -> GameTree {
    random_tree_with(
        seed,
        RandomTreeParams {
            max_depth: 5,
            branching: 3,
            reward_bound: 500,
            max_internal: Some(6),
        },
    )
}

#[derive(Default)]
struct OracleTally {
    trees: usize,
    grid_checked: usize,
    grid_skipped: usize,
    sandwich_failures: Vec<String>,
    targets: usize,
    round_trips: usize,
    round_trip_failures: Vec<String>,
    identity_failures: Vec<u64>,
    pure_equalities: usize,
}

fn check_tree(seed: u64, tally: &mut OracleTally) {
    let t = oracle_tree(seed);
    let map = solve_frontier(&t).expect("random trees are valid");
    let root = map.root_frontier();
    let equilibrium = extract_equilibrium(root).expect("an unbounded cap is always feasible");
    if extract_punishment(root, Cap::Unbounded).as_ref() != Ok(&equilibrium) {
        tally.identity_failures.push(seed);
    }

    let grid = match GridSearch::new(&t, Value::new(1, 20)) {
        Ok(g) => Some(g),
        Err(OracleError::WorkBudget { .. }) => None,
        Err(e) => panic!("seed {seed}: grid search rejected the tree: {e:?}"),
    };
    let caps = [
        Cap::cents(0),
        Cap::cents(50),
        Cap::cents(100),
        Cap::cents(200),
        Cap::Unbounded,
    ];
    for cap in caps {
        let solved = extract_punishment(root, cap.clone());
        let pure = enumerate_pure_leader(&t, cap.clone());
        let grid_best = grid.as_ref().map(|g| g.best(cap.clone()));
        let target = match solved {
            Ok(target) => target,
            Err(_) => {
                let pure_agrees = matches!(pure, Err(OracleError::NoFeasiblePolicy));
                let grid_agrees = matches!(grid_best, None | Some(Err(OracleError::NoFeasiblePolicy)));
                if !(pure_agrees && grid_agrees) {
                    tally
                        .sandwich_failures
                        .push(format!("seed {seed} {cap:?}: solver infeasible, oracles disagree"));
                }
                continue;
            }
        };
        let pure = match pure {
            Ok(p) if p.witness_holds(&t) => p,
            other => {
                tally
                    .sandwich_failures
                    .push(format!("seed {seed} {cap:?}: pure oracle {other:?}"));
                continue;
            }
        };
        let mut ok = pure.best_leader_value <= target.leader();
        if let Some(g) = grid_best {
            match g {
                Ok(g) => {
                    ok &= g.witness_holds(&t);
                    ok &= pure.best_leader_value <= g.best_leader_value;
                    ok &= g.best_leader_value <= target.leader();
                }
                Err(e) => {
                    ok = false;
                    tally.sandwich_failures.push(format!("seed {seed} {cap:?}: grid {e:?}"));
                }
            }
        }

        tally.targets += 1;
        match unroll_policy(&t, &map, &target) {
            Ok(policy) => {
                if policy.is_pure() {
                    ok &= pure.best_leader_value == target.leader();
                    tally.pure_equalities += 1;
                }
                match best_response(&t, &policy) {
                    Ok((_, v)) if v == target.value => tally.round_trips += 1,
                    other => tally
                        .round_trip_failures
                        .push(format!("seed {seed} {cap:?}: {other:?}")),
                }
            }
            Err(e) => tally
                .round_trip_failures
                .push(format!("seed {seed} {cap:?}: unroll {e:?}")),
        }
        if !ok {
            tally
                .sandwich_failures
                .push(format!("seed {seed} {cap:?}: values out of order"));
        }
    }
    tally.trees += 1;
    if grid.is_some() {
        tally.grid_checked += 1;
    } else {
        tally.grid_skipped += 1;
    }
}

fn oracle_criteria(r: &mut Report) {
    let start = Instant::now();
    let mut tally = OracleTally::default();
    let mut seed = 0u64;
    while tally.grid_checked < ORACLE_TREES {
        check_tree(seed, &mut tally);
        seed += 1;
    }
    let elapsed = start.elapsed();
    r.line(
        tally.sandwich_failures.is_empty() && elapsed < ORACLE_LIMIT,
        "solver-vs-oracle sandwich",
        format!(
            "{} trees with the full grid check ({} more over the grid work budget, checked against the pure oracle only), \
             {} exact pure-support equalities, {} violations, {:.1} s (limit {} s){}",
            tally.grid_checked,
            tally.grid_skipped,
            tally.pure_equalities,
            tally.sandwich_failures.len(),
            elapsed.as_secs_f64(),
            ORACLE_LIMIT.as_secs(),
            first(&tally.sandwich_failures)
        ),
    );
    r.line(
        tally.round_trip_failures.is_empty() && tally.round_trips == tally.targets,
        "round-trip achievability",
        format!(
            "{}/{} targets reproduced exactly{}",
            tally.round_trips,
            tally.targets,
            first(&tally.round_trip_failures)
        ),
    );
    r.line(
        tally.identity_failures.is_empty(),
        "unbounded cap identity",
        format!("{} trees, {} mismatches", tally.trees, tally.identity_failures.len()),
    );
}

fn first(errors: &[String]) -> String {
    errors.first().map_or(String::new(), |e| format!("; first: {e}"))
}

fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn bridge_criteria(r: &mut Report) -> SolvedBridge {
    let cfg = BridgeConfig::default();
    let start = Instant::now();
    let solved = SolvedBridge::solve(&cfg);
    let elapsed = start.elapsed();

    let mut labels = Vec::new();
    let mut mismatched = Vec::new();
    for theta in 1..=13 {
        let expected = match theta {
            ..=9 => RegimeLabel::Block,
            10 | 11 => RegimeLabel::Bully,
            _ => RegimeLabel::Yield,
        };
        match solved.classify(Cap::cents(theta)) {
            Ok(rep) => {
                labels.push(format!("{theta}:{}", rep.label.label()));
                if rep.label != expected {
                    mismatched.push(theta);
                }
            }
            Err(e) => {
                labels.push(format!("{theta}:error {e}"));
                mismatched.push(theta);
            }
        }
    }
    let block = solved.classify(Cap::cents(2)).ok().and_then(|rep| rep.block_steps);
    let block_text = block.map_or("no block".to_string(), |s| {
        format!("{s} steps ({} s)", s * cfg.seconds_per_step)
    });
    r.line(
        mismatched.is_empty() && block == Some(9),
        "bridge regimes",
        format!(
            "block below 10, bully at 10-11, yield from 12 ({}); mismatches at {:?}; block at 2 cents: {block_text}, expected 9 steps (18 s)",
            labels.join(" "),
            mismatched
        ),
    );

    let max_segments = solved.map.max_segments();
    let rss = peak_rss_kb();
    let memory_ok = rss.map_or(true, |kb| kb < MEMORY_LIMIT_KB);
    r.line(
        max_segments <= MAX_SEGMENTS && elapsed < SOLVE_LIMIT && memory_ok,
        "frontier compactness",
        format!(
            "max segments per node {max_segments} (limit {MAX_SEGMENTS}); solve {:.2} s (limit {} s); peak RSS {} (limit 8 GB)",
            elapsed.as_secs_f64(),
            SOLVE_LIMIT.as_secs(),
            rss.map_or("unavailable".to_string(), |kb| format!("{:.0} MB", kb as f64 / 1024.0)),
        ),
    );

    let tree = &solved.game.tree;
    let nodes = tree.len();
    let leaves = tree.nodes_owned_by(Owner::Leaf).len();
    r.line(
        nodes == EXPECTED_NODES && leaves == EXPECTED_LEAVES,
        "tree-size calibration",
        format!(
            "{nodes} nodes / {leaves} leaves against {EXPECTED_NODES} / {EXPECTED_LEAVES} (deltas {} / {})",
            nodes as i64 - EXPECTED_NODES as i64,
            leaves as i64 - EXPECTED_LEAVES as i64
        ),
    );
    solved
}

fn statistics_criterion(r: &mut Report) {
    let reported = fisher_exact(&ContingencyTable::new([[0, 14], [16, 17]]));
    let balanced = fisher_exact(&ContingencyTable::new([[5, 5], [5, 5]]));
    let in_band = matches!(reported, Ok(p) if (FISHER_BAND.0..=FISHER_BAND.1).contains(&p));
    r.line(
        in_band && balanced == Ok(1.0),
        "fisher exact",
        format!("[[0,14],[16,17]] -> {reported:?} (band {FISHER_BAND:?}), [[5,5],[5,5]] -> {balanced:?}"),
    );
}

fn sessions(human: &HumanModel, group: Group, plan: &Arc<PunishmentPlan>, cfg: &BridgeConfig) -> Vec<SessionRecord> {
    (0..SESSIONS_PER_MODEL)
        .map(|i| {
            run_session(
                &format!("{group}-{human}-{i}"),
                human.clone(),
                group,
                SESSION_EPISODES,
                cfg,
                Some(plan.clone()),
                session_seed(2024, i),
            )
            .expect("scripted sessions run")
        })
        .collect()
}

fn monotone(c: &PersistenceCurve) -> bool {
    c.counts.windows(2).all(|w| w[0].1 >= w[1].1)
}

fn behavioral_criterion(r: &mut Report, solved: &SolvedBridge) {
    let cfg = BridgeConfig::default();
    let plan = Arc::new(PunishmentPlan::new(solved, cfg.theta).expect("the default cap is feasible"));

    // Persistent bullying under the control controller: every round where the
    // SDC has the right of way is taken, through the last one.
    let bully_control = sessions(&HumanModel::AlwaysBully, Group::Control, &plan, &cfg);
    let exploitable = (0..SESSION_EPISODES)
        .filter(|&i| StartAssignment::for_episode(i) == StartAssignment::SdcClose)
        .count();
    let persistent = bully_control.iter().all(|s| {
        let last = s
            .episodes
            .iter()
            .rev()
            .find(|e| e.start_assignment == StartAssignment::SdcClose);
        s.bully_events() as usize == exploitable && last.is_some_and(|e| e.verdict.bullied)
    });

    // Bounded earnings on punished rounds.
    let bully_exp = sessions(&HumanModel::AlwaysBully, Group::Experimental, &plan, &cfg);
    let punished: Vec<i64> = bully_exp
        .iter()
        .flat_map(|s| {
            s.episodes
                .iter()
                .filter(|e| e.mode == Mode::Punishing)
                .map(|e| e.human_payoff_cents)
        })
        .collect();
    let worst_punished = punished.iter().copied().max();
    let bounded = !punished.is_empty() && worst_punished.is_some_and(|p| p <= PUNISHED_ROUND_CAP_CENTS);

    let adaptive_one = sessions(&HumanModel::adaptive(1), Group::Experimental, &plan, &cfg);
    let exactly_one = adaptive_one.iter().all(|s| s.bully_events() == 1);

    // Persistence curves over a population of adaptive humans in both groups.
    let mut population = Vec::new();
    for t in 1..=3 {
        for group in [Group::Control, Group::Experimental] {
            population.extend(sessions(&HumanModel::adaptive(t), group, &plan, &cfg));
        }
    }
    let control = group_persistence(&population, Group::Control).expect("control sessions bully");
    let experimental = group_persistence(&population, Group::Experimental).expect("experimental sessions bully");
    let max_k = control.max_k().max(experimental.max_k());
    let below = (2..=max_k).all(|k| {
        let (c, e) = (control.fraction(k), experimental.fraction(k));
        e <= c && (c == 0.0 || e < c)
    });
    let shape_ok = monotone(&control) && monotone(&experimental) && below;

    r.line(
        persistent && bounded && exactly_one && shape_ok,
        "behavioral reproduction",
        format!(
            "always-bully control: {} events per session over {SESSIONS_PER_MODEL} sessions (exploitable rounds {exploitable}); \
             always-bully experimental: {} punished rounds, worst payoff {} cents (limit {PUNISHED_ROUND_CAP_CENTS}); \
             adaptive(1) experimental events {:?}; persistence k=2: control {:.3}, experimental {:.3}, monotone {}, experimental below control for k >= 2: {below}",
            bully_control.iter().map(|s| s.bully_events().to_string()).collect::<Vec<_>>().join("/"),
            punished.len(),
            worst_punished.map_or("n/a".to_string(), |p| p.to_string()),
            adaptive_one.iter().map(|s| s.bully_events()).collect::<Vec<_>>(),
            control.fraction(2),
            experimental.fraction(2),
            monotone(&control) && monotone(&experimental),
        ),
    );
}

fn safety_criterion(r: &mut Report) {
    let rep = cautious_safety_check(&BridgeConfig::default(), SAFETY_TICKS);
    r.line(
        rep.is_safe(),
        "cautious policy safety",
        format!(
            "{} states over {SAFETY_TICKS} ticks from both starts; {} collisions, {} cancelled moves",
            rep.states,
            rep.collisions.len(),
            rep.cancelled.len()
        ),
    );
}

fn main() {
    let mut r = Report { failed: 0 };
    oracle_criteria(&mut r);
    let solved = bridge_criteria(&mut r);
    statistics_criterion(&mut r);
    behavioral_criterion(&mut r, &solved);
    safety_criterion(&mut r);
    println!("acceptance: {} failed", r.failed);
    if r.failed > 0 {
        std::process::exit(1);
    }
}
