use proptest::prelude::*;
use stackel::config::{config_to_toml, parse_config, ConfigFileError};
use stackel::episodes::{episodes_to_jsonl, parse_episodes, EpisodeLogError};
use stackel::frontier_csv::write_frontier_csv;
use stackel::harness::{run_session, Group};
use stackel::policy_file::{parse_policy, policy_to_json, SolvedPolicy};
use stackel::tree_json::{parse_tree, same_tree, tree_to_json, TreeFileError};
use stackel_core::bridge::{BridgeConfig, HumanModel, Position, SolvedBridge};
use stackel_core::{
    extract_punishment, random_tree, solve_frontier, unroll_policy, Cap, GameTree, Owner, PayoffPair, TreeBuilder,
    Value,
};

const T4_JSON: &str = r#"{"root": "top", "nodes": [
  {"id": "top", "owner": "follower", "children": {"a": "safe", "b": "threat"}},
  {"id": "safe", "owner": "leaf", "reward": [300, 100]},
  {"id": "threat", "owner": "leader", "children": {"c": "zero", "d": "both"}},
  {"id": "zero", "owner": "leaf", "reward": [0, 0]},
  {"id": "both", "owner": "leaf", "reward": [500, 500]}
]}"#;

fn t1() -> GameTree {
    let mut b = TreeBuilder::new();
    let a = b.leaf(PayoffPair::new(200, 300));
    let z = b.leaf(PayoffPair::new(0, 0));
    let r = b.leader(&[("a", a), ("b", z)]);
    b.finish(r)
}

#[test]
fn t4_parses_to_the_expected_tree() {
    let t = parse_tree(T4_JSON).unwrap();
    assert_eq!(t.len(), 5);
    assert_eq!(t.owner(t.root()), Owner::Follower);
    let threat = t.node_by_name("threat").unwrap();
    assert_eq!(t.owner(threat), Owner::Leader);
    let both = t.child(threat, t.action("d").unwrap()).unwrap();
    assert_eq!(t.reward(both), Some(PayoffPair::new(500, 500)));
    assert_eq!(t.display_name(both), "both");
}

#[test]
fn t4_export_import_is_identical() {
    let t = parse_tree(T4_JSON).unwrap();
    let text = tree_to_json(&t);
    let back = parse_tree(&text).unwrap();
    assert!(same_tree(&t, &back));
    assert_eq!(tree_to_json(&back), text);
    // Pre-order, children in label order.
    let order: Vec<&str> = text.lines().filter_map(|l| l.trim().strip_prefix("\"id\": ")).collect();
    assert_eq!(
        order,
        ["\"top\",", "\"safe\",", "\"threat\",", "\"zero\",", "\"both\","]
    );
}

#[test]
fn unnamed_trees_export_arena_indices() {
    let t = t1();
    let back = parse_tree(&tree_to_json(&t)).unwrap();
    assert!(same_tree(&t, &back));
}

#[test]
fn unknown_owner_names_the_node() {
    let bad = T4_JSON.replace(
        r#""id": "threat", "owner": "leader""#,
        r#""id": "threat", "owner": "boss""#,
    );
    match parse_tree(&bad) {
        Err(TreeFileError::UnknownOwner { node, tag }) => {
            assert_eq!(node, "threat");
            assert_eq!(tag, "boss");
        }
        other => panic!("expected unknown owner, got {other:?}"),
    }
}

#[test]
fn structural_errors_name_the_node() {
    let cases = [
        (T4_JSON.replace("[300, 100]", "[300.5, 100]"), "safe"),
        (T4_JSON.replace("[300, 100]", "[300]"), "safe"),
        (T4_JSON.replace(r#""c": "zero""#, r#""c": "nowhere""#), "nowhere"),
        (T4_JSON.replace(r#""c": "zero""#, r#""c": "safe""#), "safe"),
        (T4_JSON.replace(r#""d": "both""#, r#""c": "both""#), "threat"),
    ];
    for (text, name) in cases {
        let e = parse_tree(&text).unwrap_err().to_string();
        assert!(e.contains(name), "{e} should mention {name}");
    }
    let orphan = T4_JSON.replace(r#""c": "zero", "d": "both""#, r#""c": "zero""#);
    assert!(matches!(parse_tree(&orphan), Err(TreeFileError::Unreachable(n)) if n == "both"));
    let dup = T4_JSON.replace(r#""id": "both""#, r#""id": "zero""#);
    assert!(matches!(parse_tree(&dup), Err(TreeFileError::DuplicateId(n)) if n == "zero"));
}

#[test]
fn syntax_errors_carry_a_line() {
    let broken = T4_JSON.replace(
        r#""owner": "leaf", "reward": [0, 0]"#,
        r#""owner": "leaf" "reward": [0, 0]"#,
    );
    match parse_tree(&broken) {
        Err(TreeFileError::Syntax { line, .. }) => assert_eq!(line, 5),
        other => panic!("expected syntax error, got {other:?}"),
    }
}

#[test]
fn policy_file_round_trips_exactly() {
    let t = t1();
    let map = solve_frontier(&t).unwrap();
    let target = extract_punishment(map.root_frontier(), Cap::cents(100)).unwrap();
    let policy = unroll_policy(&t, &map, &target).unwrap();
    let solved = SolvedPolicy {
        cap: Cap::cents(100),
        value: target.value,
        policy,
    };
    let text = policy_to_json(&t, &solved);
    assert!(text.contains(r#""a": "1/3""#), "{text}");
    assert!(text.contains(r#""leader_value": "200/3""#), "{text}");
    assert_eq!(parse_policy(&t, &text).unwrap(), solved);
}

#[test]
fn policy_file_rejects_foreign_entries() {
    let t = t1();
    let text = r#"{"theta": "inf", "leader_value": "0", "follower_value": "0",
        "nodes": [{"node": "2", "actions": {"a": "1/2", "zz": "1/2"}}]}"#;
    let e = parse_policy(&t, text).unwrap_err().to_string();
    assert!(e.contains("zz"), "{e}");
    let text = r#"{"theta": "inf", "leader_value": "0", "follower_value": "0",
        "nodes": [{"node": "2", "actions": {"a": "1/2", "b": "1/3"}}]}"#;
    assert!(parse_policy(&t, text).is_err());
    let text = r#"{"theta": "inf", "leader_value": "0", "follower_value": "0",
        "nodes": [{"node": "0", "actions": {"a": "1"}}]}"#;
    assert!(parse_policy(&t, text).unwrap_err().to_string().contains("not a leader"));
}

#[test]
fn t1_frontier_csv() {
    let t = t1();
    let map = solve_frontier(&t).unwrap();
    let mut out = Vec::new();
    write_frontier_csv(&mut out, &t, &map, Some(&[t.root()])).unwrap();
    let text = String::from_utf8(out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "kind,node_id,leader_lo,follower_lo,leader_hi,follower_hi");
    assert_eq!(rows.len(), 1 + 2 + 1);
    assert!(rows.contains(&"point,2,2.000000,3.000000,2.000000,3.000000"));
    assert!(rows.contains(&"segment,2,0.000000,0.000000,2.000000,3.000000"));
}

#[test]
fn bridge_root_frontier_rows_match_the_solver() {
    let solved = SolvedBridge::solve(&BridgeConfig::default());
    let root = solved.map.root_frontier();
    let mut out = Vec::new();
    let tree = &solved.game.tree;
    write_frontier_csv(&mut out, tree, &solved.map, Some(&[tree.root()])).unwrap();
    let rows = String::from_utf8(out).unwrap().lines().count() - 1;
    assert_eq!(rows, root.points().len() + root.segments().len());
    // Block line, yield point and the stalemate point.
    assert_eq!(root.points().len(), 11);
    assert_eq!(root.segments().len(), 10);
}

#[test]
fn episode_log_round_trips() {
    let cfg = BridgeConfig::default();
    let s = run_session("io", HumanModel::AlwaysBully, Group::Control, 4, &cfg, None, 3).unwrap();
    let text = episodes_to_jsonl(&s.episodes);
    assert_eq!(text.lines().count(), 4);
    assert_eq!(parse_episodes(&text, "log").unwrap(), s.episodes);
}

#[test]
fn episode_log_errors_give_the_line() {
    let cfg = BridgeConfig::default();
    let s = run_session("io", HumanModel::AlwaysFair, Group::Control, 3, &cfg, None, 3).unwrap();
    let mut lines: Vec<String> = episodes_to_jsonl(&s.episodes).lines().map(String::from).collect();
    lines[1] = lines[1].replace("\"mode\":\"cooperative\"", "\"mode\":\"sulking\"");
    match parse_episodes(&lines.join("\n"), "x.jsonl") {
        Err(EpisodeLogError::Parse { line, path, .. }) => {
            assert_eq!(line, 2);
            assert_eq!(path, "x.jsonl");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn config_files() {
    let cfg = parse_config("theta = 5\ntick_ms = 500\nsdc_abstract_start = \"start\"\n").unwrap();
    assert_eq!(cfg.theta, 5);
    assert_eq!(cfg.tick_ms, 500);
    assert_eq!(cfg.sdc_abstract_start, Position::Start);
    assert_eq!(cfg.base_reward, 13);
    assert_eq!(parse_config(&config_to_toml(&cfg)).unwrap(), cfg);
    assert!(matches!(parse_config("thta = 5\n"), Err(ConfigFileError::Syntax(_))));
    assert!(matches!(parse_config("theta = 13\n"), Err(ConfigFileError::Invalid(_))));
    assert!(matches!(
        parse_config("tick_ms = 700\n"),
        Err(ConfigFileError::Invalid(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_export_is_byte_stable(seed in any::<u64>()) {
        let t = random_tree(seed, 4, 3, 500);
        let text = tree_to_json(&t);
        let back = parse_tree(&text).unwrap();
        prop_assert!(same_tree(&t, &back));
        prop_assert_eq!(tree_to_json(&back), text);
    }

    #[test]
    fn policy_export_is_exact(seed in any::<u64>(), theta in 0i64..=500) {
        let t = random_tree(seed, 4, 3, 500);
        let map = solve_frontier(&t).unwrap();
        if let Ok(target) = extract_punishment(map.root_frontier(), Cap::cents(theta)) {
            let policy = unroll_policy(&t, &map, &target).unwrap();
            let solved = SolvedPolicy { cap: Cap::At(Value::from_integer(theta as i128)), value: target.value, policy };
            prop_assert_eq!(parse_policy(&t, &policy_to_json(&t, &solved)).unwrap(), solved);
        }
    }
}
