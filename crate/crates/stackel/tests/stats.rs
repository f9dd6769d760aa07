use proptest::prelude::*;
use stackel::harness::{run_session, Group};
use stackel::stats::{
    bully_persistence, fisher_exact, group_persistence, write_persistence_csv, ContingencyTable, StatsError,
};
use stackel_core::bridge::{BridgeConfig, HumanModel};

/// Hypergeometric probabilities from log-factorials in doubles, summed over
/// tables no likelier than the observed one (with a relative slack of 1e-7).
fn fisher_by_doubles(t: [[u64; 2]; 2]) -> f64 {
    let [[a, b], [c, d]] = t;
    let (r1, r2, c1) = (a + b, c + d, a + c);
    let n = r1 + r2;
    let ln_fact = |k: u64| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let ln_choose = |n: u64, k: u64| ln_fact(n) - ln_fact(k) - ln_fact(n - k);
    let p = |x: u64| (ln_choose(r1, x) + ln_choose(r2, c1 - x) - ln_choose(n, c1)).exp();
    let observed = p(a);
    let lo = c1.saturating_sub(r2);
    let hi = c1.min(r1);
    (lo..=hi)
        .map(p)
        .filter(|&q| q <= observed * (1.0 + 1e-7))
        .sum::<f64>()
        .min(1.0)
}

#[test]
fn fisher_on_the_reported_counts() {
    let p = fisher_exact(&ContingencyTable::new([[0, 14], [16, 17]])).unwrap();
    assert!((0.0013..=0.0019).contains(&p), "p = {p}");
    assert!((p - fisher_by_doubles([[0, 14], [16, 17]])).abs() < 1e-9);
}

#[test]
fn fisher_balanced_table_is_one() {
    assert_eq!(fisher_exact(&ContingencyTable::new([[5, 5], [5, 5]])).unwrap(), 1.0);
}

#[test]
fn fisher_extreme_table() {
    let p = fisher_exact(&ContingencyTable::new([[10, 0], [0, 10]])).unwrap();
    // Only the two diagonal tables: 2 / C(20, 10).
    assert!((p - 2.0 / 184_756.0).abs() < 1e-15);
    assert!((p - fisher_by_doubles([[10, 0], [0, 10]])).abs() / p < 1e-9);
}

#[test]
fn fisher_rejects_degenerate_margins() {
    for t in [[[0, 0], [3, 4]], [[3, 4], [0, 0]], [[0, 3], [0, 4]], [[3, 0], [4, 0]]] {
        assert_eq!(
            fisher_exact(&ContingencyTable::new(t)),
            Err(StatsError::DegenerateMargins)
        );
    }
}

#[test]
fn persistence_examples() {
    let c = bully_persistence(&[3]).unwrap();
    assert_eq!(c.fraction(1), 1.0);
    assert_eq!(c.fraction(2), 1.0);
    assert_eq!(c.fraction(3), 0.0);
    assert_eq!(c.max_k(), 3);

    let c = bully_persistence(&[0, 1, 2, 4, 0]).unwrap();
    assert_eq!(c.sessions, 3);
    assert_eq!(c.counts, vec![(1, 2), (2, 1), (3, 1), (4, 0)]);

    assert_eq!(bully_persistence(&[0, 0]), Err(StatsError::NoBullies));
    assert_eq!(bully_persistence(&[]), Err(StatsError::NoBullies));
}

#[test]
fn contingency_from_sessions() {
    let cfg = BridgeConfig::default();
    let s = |human: HumanModel, group| run_session("s", human, group, 20, &cfg, None, 1).unwrap();
    let sessions = [
        s(HumanModel::AlwaysBully, Group::Control),
        s(HumanModel::AlwaysFair, Group::Control),
        s(HumanModel::AlwaysFair, Group::Experimental),
    ];
    let t = ContingencyTable::from_sessions(&sessions);
    assert_eq!(t.counts, [[0, 0], [1, 0]]);
    let curve = group_persistence(&sessions, Group::Control).unwrap();
    assert_eq!(curve.sessions, 1);
    assert_eq!(
        group_persistence(&sessions, Group::Experimental),
        Err(StatsError::NoBullies)
    );

    let mut out = Vec::new();
    write_persistence_csv(&mut out, Some(&curve), None).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("k,control,experimental\n1,1.000000,\n"), "{text}");
}

proptest! {
    #[test]
    fn fisher_matches_the_double_oracle(a in 0u64..15, b in 0u64..15, c in 0u64..15, d in 0u64..15) {
        let t = [[a, b], [c, d]];
        match fisher_exact(&ContingencyTable::new(t)) {
            Ok(p) => {
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert!((p - fisher_by_doubles(t)).abs() < 1e-9);
            }
            Err(_) => prop_assert!(a + b == 0 || c + d == 0 || a + c == 0 || b + d == 0),
        }
    }

    #[test]
    fn fisher_is_symmetric(a in 0u64..30, b in 0u64..30, c in 0u64..30, d in 0u64..30) {
        let p = fisher_exact(&ContingencyTable::new([[a, b], [c, d]]));
        let rows = fisher_exact(&ContingencyTable::new([[c, d], [a, b]]));
        let cols = fisher_exact(&ContingencyTable::new([[b, a], [d, c]]));
        let trans = fisher_exact(&ContingencyTable::new([[a, c], [b, d]]));
        prop_assert_eq!(&p, &rows);
        prop_assert_eq!(&p, &cols);
        prop_assert_eq!(&p, &trans);
    }

    #[test]
    fn persistence_is_non_increasing(counts in prop::collection::vec(0u32..25, 1..40)) {
        match bully_persistence(&counts) {
            Ok(c) => {
                prop_assert!(c.counts.windows(2).all(|w| w[0].1 >= w[1].1));
                prop_assert_eq!(c.counts.last().unwrap().1, 0);
            }
            Err(e) => {
                prop_assert_eq!(e, StatsError::NoBullies);
                prop_assert!(counts.iter().all(|&n| n == 0));
            }
        }
    }
}
