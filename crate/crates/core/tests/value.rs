use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};
use proptest::prelude::*;
use stackel_core::Value;

type Big = Ratio<BigInt>;

fn as_big(v: &Value) -> Big {
    Ratio::new(v.numer(), v.denom())
}

fn hash_of(v: &Value) -> u64 {
    let mut h = DefaultHasher::new();
    v.hash(&mut h);
    h.finish()
}

fn component() -> impl Strategy<Value = i128> {
    prop_oneof![
        -1000i128..1000,
        any::<i128>(),
        (i128::MAX - 1000)..=i128::MAX,
        i128::MIN..(i128::MIN + 1000),
    ]
}

fn value() -> impl Strategy<Value = Value> {
    (component(), component().prop_filter("nonzero", |d| *d != 0))
        .prop_map(|(n, d)| Value::from_big(BigInt::from(n), BigInt::from(d)))
}

#[test]
fn overflow_moves_to_big_and_back() {
    let m = Value::from_integer(i128::MAX);
    let sq = &m * &m;
    assert_eq!(sq.numer(), BigInt::from(i128::MAX) * BigInt::from(i128::MAX));
    let back = &sq / &m;
    assert_eq!(back, m);
    assert_eq!(hash_of(&back), hash_of(&m));
    assert_eq!(Value::from_integer(i128::MIN).numer(), BigInt::from(i128::MIN));
    assert_eq!(
        -Value::from_integer(i128::MIN),
        &Value::from_integer(i128::MAX) + &Value::one()
    );
    assert_eq!(Value::new(3, -6), Value::new(-1, 2));
    assert_eq!(Value::new(1, 3).to_string(), "1/3");
    assert!(Value::from_integer(0).is_zero());
}

proptest! {
    #[test]
    fn arithmetic_matches_big_rationals(a in value(), b in value()) {
        let (x, y) = (as_big(&a), as_big(&b));
        prop_assert_eq!(as_big(&(&a + &b)), &x + &y);
        prop_assert_eq!(as_big(&(&a - &b)), &x - &y);
        prop_assert_eq!(as_big(&(&a * &b)), &x * &y);
        if !y.is_zero() {
            prop_assert_eq!(as_big(&(&a / &b)), &x / &y);
        }
        prop_assert_eq!(as_big(&-&a), -&x);
        prop_assert_eq!(a.cmp(&b), x.cmp(&y));
    }

    #[test]
    fn equal_values_hash_alike(a in value(), b in value()) {
        // The same number reached by different routes must be one value.
        let round = &(&a + &b) - &b;
        prop_assert_eq!(&round, &a);
        prop_assert_eq!(hash_of(&round), hash_of(&a));
        let mut acc = a.clone();
        acc *= &b;
        if !b.is_zero() {
            acc /= &b;
            prop_assert_eq!(hash_of(&acc), hash_of(&a));
        }
    }
}
