mod common;

use common::*;
use proptest::prelude::*;
use stackel_core::{
    best_response, evaluate_policy, minimax_follower_value, random_tree, validate_tree, Distribution, EvalError,
    NodeId, Owner, PayoffPair, Policy, TreeBuilder, Value,
};

#[test]
fn single_leaf_validates() {
    let mut b = TreeBuilder::new();
    let r = b.leaf(PayoffPair::new(13, 13));
    let rep = validate_tree(&b.finish(r));
    assert_eq!((rep.internal_count, rep.leaf_count), (0, 1));
    assert!(rep.errors.is_empty());
}

#[test]
fn leader_root_with_two_leaves_validates() {
    let rep = validate_tree(&t1());
    assert_eq!((rep.internal_count, rep.leaf_count), (1, 2));
    assert!(rep.is_valid());
}

#[test]
fn missing_child_is_reported() {
    let mut b = TreeBuilder::new();
    let a = b.leaf(PayoffPair::new(1, 1));
    let r = b.leader(&[("a", a), ("b", NodeId(99))]);
    let rep = validate_tree(&b.finish(r));
    assert_eq!(rep.internal_count, 1);
    assert!(
        rep.errors.iter().any(|e| e.contains("missing node 99")),
        "{:?}",
        rep.errors
    );
}

#[test]
fn evaluate_policy_examples() {
    let t = t1();
    let r = t.root();
    let empty = Policy::new();
    assert_eq!(
        evaluate_policy(&t, &pure_at(&t, &[(r, "a")]), &empty).unwrap(),
        vp(200, 300)
    );
    let half = Distribution::new(vec![(act(&t, "a"), v(1, 2)), (act(&t, "b"), v(1, 2))]).unwrap();
    let mixed: Policy = [(r, half)].into_iter().collect();
    assert_eq!(evaluate_policy(&t, &mixed, &empty).unwrap(), vp(100, 150));

    let t = t3();
    let r = t.root();
    let f = child(&t, r, "a");
    let leader = pure_at(&t, &[(r, "a")]);
    let follower = pure_at(&t, &[(f, "a2")]);
    assert_eq!(evaluate_policy(&t, &leader, &follower).unwrap(), vp(100, 400));
}

#[test]
fn evaluate_policy_needs_reachable_entries() {
    let t = t1();
    let err = evaluate_policy(&t, &Policy::new(), &Policy::new()).unwrap_err();
    assert!(matches!(err, EvalError::MissingEntry { .. }), "{err:?}");
}

#[test]
fn best_response_examples() {
    let t = t2();
    let (reply, val) = best_response(&t, &Policy::new()).unwrap();
    assert_eq!(val, vp(0, 200));
    assert_eq!(reply.get(t.root()), Some(&Distribution::pure(act(&t, "b"))));

    let t = t4();
    let l = child(&t, t.root(), "b");
    let (_, val) = best_response(&t, &pure_at(&t, &[(l, "c")])).unwrap();
    assert_eq!(val, vp(300, 100));

    let mut b = TreeBuilder::new();
    let x = b.leaf(PayoffPair::new(500, 100));
    let y = b.leaf(PayoffPair::new(0, 100));
    let r = b.follower(&[("a", x), ("b", y)]);
    let t = b.finish(r);
    let (reply, val) = best_response(&t, &Policy::new()).unwrap();
    assert_eq!(val, vp(500, 100));
    assert_eq!(reply.get(t.root()), Some(&Distribution::pure(act(&t, "a"))));
}

#[test]
fn minimax_examples() {
    let mut b = TreeBuilder::new();
    let leaf = b.leaf(PayoffPair::new(300, 100));
    let t = b.finish(leaf);
    assert_eq!(minimax_follower_value(&t, t.root()).unwrap(), Value::from_integer(100));

    let t = t4();
    let l = child(&t, t.root(), "b");
    assert_eq!(minimax_follower_value(&t, l).unwrap(), Value::from_integer(0));

    let t = t2();
    assert_eq!(minimax_follower_value(&t, t.root()).unwrap(), Value::from_integer(200));
    assert!(minimax_follower_value(&t, NodeId(42)).is_err());
}

#[test]
fn random_tree_examples() {
    let t = random_tree(1, 1, 2, 500);
    assert!(validate_tree(&t).is_valid());
    assert!(validate_tree(&t).max_depth <= 1);
    assert_eq!(random_tree(1, 4, 3, 500), random_tree(1, 4, 3, 500));
    let rep = validate_tree(&random_tree(7, 6, 3, 500));
    assert!(rep.is_valid(), "{:?}", rep.errors);
    assert!(rep.max_depth <= 6 && rep.max_branching <= 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluation_matches_path_sum(seed in any::<u64>(), pseed in any::<u64>()) {
        let t = random_tree(seed, 4, 3, 500);
        prop_assume!(validate_tree(&t).leaf_count <= 100);
        let leader = random_leader_policy(&t, pseed);
        for follower in pure_policies(&t, Owner::Follower).into_iter().take(16) {
            prop_assert_eq!(evaluate_policy(&t, &leader, &follower).unwrap(), path_sum(&t, &leader, &follower));
        }
    }

    #[test]
    fn best_response_beats_every_pure_reply(seed in any::<u64>(), pseed in any::<u64>()) {
        let t = random_tree(seed, 5, 3, 500);
        prop_assume!(t.nodes_owned_by(Owner::Follower).len() <= 10);
        let leader = random_leader_policy(&t, pseed);
        let (reply, val) = best_response(&t, &leader).unwrap();
        prop_assert!(reply.is_pure());
        prop_assert_eq!(&val, &brute_best_follower(&t, &leader));
        prop_assert_eq!(&evaluate_policy(&t, &leader, &reply).unwrap(), &val);
        prop_assert_eq!(best_response(&t, &leader).unwrap(), (reply, val));
    }

    #[test]
    fn minimax_is_the_worst_pure_leader_threat(seed in any::<u64>()) {
        let t = random_tree(seed, 4, 3, 500);
        prop_assume!(pure_count(&t) <= 4096);
        let worst = pure_policies(&t, Owner::Leader)
            .iter()
            .map(|p| best_response(&t, p).unwrap().1.follower)
            .min()
            .unwrap();
        prop_assert_eq!(minimax_follower_value(&t, t.root()).unwrap(), worst);
    }

    #[test]
    fn random_trees_validate(seed in any::<u64>(), depth in 1u32..7, branching in 1u32..4) {
        let rep = validate_tree(&random_tree(seed, depth, branching, 500));
        prop_assert!(rep.is_valid(), "{:?}", rep.errors);
        prop_assert!(rep.max_depth <= depth as usize);
    }
}

fn pure_count(t: &stackel_core::GameTree) -> usize {
    t.nodes_owned_by(Owner::Leader)
        .iter()
        .map(|n| t.children(*n).len())
        .try_fold(1usize, |acc, k| acc.checked_mul(k))
        .unwrap_or(usize::MAX)
}
