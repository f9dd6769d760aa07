//! Money and exact values.

use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};

/// Money in integer cents.
pub type Cents = i64;

/// An exact rational amount of cents.
///
/// Unbounded precision: frontier crossings nest, and their denominators
/// outgrow any fixed-width integer on moderately deep trees. Values that fit
/// in `i128` stay there, and only overflowing results move to big integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Value(Repr);

/// Canonical: `Big` only holds values that do not fit `Small`.
#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(Ratio<i128>),
    Big(Ratio<BigInt>),
}

fn big(r: &Ratio<i128>) -> Ratio<BigInt> {
    Ratio::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

impl Value {
    /// `numer / denom`. Panics if `denom` is zero.
    pub fn new(numer: i128, denom: i128) -> Value {
        match (numer.checked_neg(), denom.checked_neg()) {
            (Some(_), Some(_)) => Value(Repr::Small(Ratio::new(numer, denom))),
            _ => Value::from_big(numer.into(), denom.into()),
        }
    }

    pub fn from_integer(n: i128) -> Value {
        Value::new(n, 1)
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Value {
        Value::from_ratio(Ratio::new(numer, denom))
    }

    fn from_ratio(r: Ratio<BigInt>) -> Value {
        use num_traits::ToPrimitive;
        match (r.numer().to_i128(), r.denom().to_i128()) {
            // i128::MIN has no negation, which reduction and comparison need.
            (Some(n), Some(d)) if n != i128::MIN && d != i128::MIN => Value(Repr::Small(Ratio::new_raw(n, d))),
            _ => Value(Repr::Big(r)),
        }
    }

    fn to_big(&self) -> Ratio<BigInt> {
        match &self.0 {
            Repr::Small(r) => big(r),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.numer()),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    /// Always positive.
    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.denom()),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_integer(),
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn abs(&self) -> Value {
        match &self.0 {
            Repr::Small(r) => Value(Repr::Small(r.abs())),
            Repr::Big(r) => Value::from_ratio(r.abs()),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_negative(),
            Repr::Big(r) => r.is_negative(),
        }
    }
}

impl Default for Value {
    fn default() -> Self {
        Value::zero()
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(r) => fmt::Display::fmt(r, f),
            Repr::Big(r) => fmt::Display::fmt(r, f),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Zero for Value {
    fn zero() -> Self {
        Value(Repr::Small(Ratio::zero()))
    }

    fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Small(r) if r.is_zero())
    }
}

impl One for Value {
    fn one() -> Self {
        Value(Repr::Small(Ratio::one()))
    }
}

impl Neg for &Value {
    type Output = Value;
    fn neg(self) -> Value {
        match &self.0 {
            Repr::Small(r) => Value(Repr::Small(-r)),
            Repr::Big(r) => Value::from_ratio(-r),
        }
    }
}

impl Neg for Value {
    type Output = Value;
    fn neg(self) -> Value {
        -&self
    }
}

fn small_op(
    a: &Value,
    b: &Value,
    checked: fn(&Ratio<i128>, &Ratio<i128>) -> Option<Ratio<i128>>,
    exact: fn(Ratio<BigInt>, Ratio<BigInt>) -> Ratio<BigInt>,
) -> Value {
    if let (Repr::Small(x), Repr::Small(y)) = (&a.0, &b.0) {
        if let Some(r) = checked(x, y) {
            if *r.numer() != i128::MIN && *r.denom() != i128::MIN {
                return Value(Repr::Small(r));
            }
        }
    }
    Value::from_ratio(exact(a.to_big(), b.to_big()))
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $checked:path) => {
        impl $tr<&Value> for &Value {
            type Output = Value;
            fn $m(self, rhs: &Value) -> Value {
                small_op(self, rhs, |x, y| $checked(x, y), |x, y| x.$m(y))
            }
        }
        impl $tr<Value> for Value {
            type Output = Value;
            fn $m(self, rhs: Value) -> Value {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Value> for Value {
            type Output = Value;
            fn $m(self, rhs: &Value) -> Value {
                (&self).$m(rhs)
            }
        }
        impl $tr<Value> for &Value {
            type Output = Value;
            fn $m(self, rhs: Value) -> Value {
                self.$m(&rhs)
            }
        }
        impl $atr<Value> for Value {
            fn $am(&mut self, rhs: Value) {
                *self = (&*self).$m(&rhs);
            }
        }
        impl $atr<&Value> for Value {
            fn $am(&mut self, rhs: &Value) {
                *self = (&*self).$m(rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, CheckedAdd::checked_add);
binop!(Sub, sub, SubAssign, sub_assign, CheckedSub::checked_sub);
binop!(Mul, mul, MulAssign, mul_assign, CheckedMul::checked_mul);
binop!(Div, div, DivAssign, div_assign, CheckedDiv::checked_div);

impl Sum for Value {
    fn sum<I: Iterator<Item = Value>>(iter: I) -> Value {
        iter.fold(Value::zero(), |acc, v| acc + v)
    }
}

impl<'a> Sum<&'a Value> for Value {
    fn sum<I: Iterator<Item = &'a Value>>(iter: I) -> Value {
        iter.fold(Value::zero(), |acc, v| acc + v)
    }
}

pub fn cents(c: Cents) -> Value {
    Value::from_integer(c as i128)
}

/// Leaf reward: what each player is paid when play ends at a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PayoffPair {
    pub leader: Cents,
    pub follower: Cents,
}

impl PayoffPair {
    pub const fn new(leader: Cents, follower: Cents) -> Self {
        PayoffPair { leader, follower }
    }
}

/// A (leader, follower) pair of expected values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValuePair {
    pub leader: Value,
    pub follower: Value,
}

impl ValuePair {
    pub fn new(leader: Value, follower: Value) -> Self {
        ValuePair { leader, follower }
    }

    pub fn from_cents(leader: Cents, follower: Cents) -> Self {
        ValuePair::new(cents(leader), cents(follower))
    }

    pub fn zero() -> Self {
        ValuePair::new(Value::zero(), Value::zero())
    }

    /// `self` moved a fraction `t` of the way toward `other`.
    pub fn lerp(&self, other: &ValuePair, t: &Value) -> ValuePair {
        let s = Value::one() - t;
        ValuePair::new(
            &self.leader * &s + &other.leader * t,
            &self.follower * &s + &other.follower * t,
        )
    }

    pub fn scale(&self, p: &Value) -> ValuePair {
        ValuePair::new(&self.leader * p, &self.follower * p)
    }

    pub fn add(&self, other: &ValuePair) -> ValuePair {
        ValuePair::new(&self.leader + &other.leader, &self.follower + &other.follower)
    }
}

impl From<PayoffPair> for ValuePair {
    fn from(p: PayoffPair) -> Self {
        ValuePair::from_cents(p.leader, p.follower)
    }
}

impl fmt::Display for ValuePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.leader, self.follower)
    }
}

/// Upper limit on the follower's value; `Unbounded` asks for the plain equilibrium.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cap {
    At(Value),
    Unbounded,
}

impl Cap {
    pub fn cents(c: Cents) -> Cap {
        Cap::At(cents(c))
    }

    pub fn admits(&self, follower: &Value) -> bool {
        match self {
            Cap::At(t) => follower <= t,
            Cap::Unbounded => true,
        }
    }
}

impl fmt::Display for Cap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cap::At(t) => write!(f, "{t}"),
            Cap::Unbounded => f.write_str("inf"),
        }
    }
}
