//! Money and rational formatting for human-facing output.

use num_bigint::BigInt;
use num_traits::Signed;
use stackel_core::{Cents, Value};

/// A cent amount as dollars with six decimals, rounded half away from zero.
pub fn dollars(cents: &Value) -> String {
    // One cent is 10^4 micro-dollars.
    let num: BigInt = cents.numer() * BigInt::from(10_000);
    let den = cents.denom();
    let (q, r): (BigInt, BigInt) = (&num / &den, &num % &den);
    let micros = if r.abs() * 2 >= den { q + num.signum() } else { q };
    let sign = if micros.is_negative() { "-" } else { "" };
    let m = micros.abs();
    let million = BigInt::from(1_000_000);
    format!("{sign}{}.{:06}", &m / &million, &m % &million)
}

/// Whole cents as a `$d.cc` string.
pub fn dollars_from_cents(c: Cents) -> String {
    let sign = if c < 0 { "-" } else { "" };
    format!("{sign}${}.{:02}", c.abs() / 100, c.abs() % 100)
}

/// Exact `n/d` text, or just `n` for integers.
pub fn rational_text(v: &Value) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Parses `n`, `n/d` or `-n/d`. The denominator must be positive.
pub fn parse_rational(s: &str) -> Option<Value> {
    let s = s.trim();
    match s.split_once('/') {
        None => s.parse::<BigInt>().ok().map(|n| Value::from_big(n, 1.into())),
        Some((n, d)) => {
            let n = n.trim().parse::<BigInt>().ok()?;
            let d = d.trim().parse::<BigInt>().ok()?;
            d.is_positive().then(|| Value::from_big(n, d))
        }
    }
}
