//! Session statistics: bully persistence and the Fisher exact test.

use std::io::Write;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::harness::{Group, SessionRecord};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("a row or column of the table sums to zero")]
    DegenerateMargins,
    #[error("no session has a bully event")]
    NoBullies,
}

/// Sessions that bullied at least once, split by how often, per group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ContingencyTable {
    /// Rows: bullied once, bullied more than once. Columns: control, experimental.
    pub counts: [[u64; 2]; 2],
}

impl ContingencyTable {
    pub fn new(counts: [[u64; 2]; 2]) -> Self {
        ContingencyTable { counts }
    }

    pub fn from_sessions(sessions: &[SessionRecord]) -> Self {
        let mut t = ContingencyTable::default();
        for s in sessions {
            let col = match s.group() {
                Group::Control => 0,
                Group::Experimental => 1,
            };
            match s.bully_events() {
                0 => {}
                1 => t.counts[0][col] += 1,
                _ => t.counts[1][col] += 1,
            }
        }
        t
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `num / den` to the nearest double, from one exact division.
fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    // Shift so the quotient carries at least 64 significant bits, and fold
    // any remainder into the lowest bit so the one rounding below sees it.
    let shift = 65 + den.bits() as i64 - num.bits() as i64;
    let (n, d) = if shift >= 0 {
        (num << shift as u64, den.clone())
    } else {
        (num.clone(), den << (-shift) as u64)
    };
    let mut q = &n / &d;
    if !(&n % &d).is_zero() {
        q |= BigUint::one();
    }
    q.to_f64().expect("finite") * 2f64.powi(-shift as i32)
}

/// Two-tailed Fisher exact test: the total probability, under fixed margins,
/// of every table no more likely than the observed one.
pub fn fisher_exact(t: &ContingencyTable) -> Result<f64, StatsError> {
    let [[a, b], [c, d]] = t.counts;
    let (r1, r2, c1) = (a + b, c + d, a + c);
    if r1 == 0 || r2 == 0 || c1 == 0 || b + d == 0 {
        return Err(StatsError::DegenerateMargins);
    }
    // With margins fixed, the table is determined by its top-left cell x, and
    // its probability is C(r1, x) C(r2, c1 - x) / C(n, c1).
    let weight = |x: u64| binomial(r1, x) * binomial(r2, c1 - x);
    let observed = weight(a);
    let lo = c1.saturating_sub(r2);
    let hi = c1.min(r1);
    let tail: BigUint = (lo..=hi).map(weight).filter(|w| *w <= observed).sum();
    let p = ratio_to_f64(&tail, &binomial(r1 + r2, c1));
    Ok(p.min(1.0))
}

/// Fraction of sessions with more than `k` bully events, for `k = 1..=max`,
/// among sessions with at least one.
#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceCurve {
    pub sessions: usize,
    /// `(k, sessions with more than k events)`.
    pub counts: Vec<(u32, usize)>,
}

impl PersistenceCurve {
    pub fn fraction(&self, k: u32) -> f64 {
        let above = self.counts.iter().find(|(j, _)| *j == k).map_or(0, |(_, n)| *n);
        above as f64 / self.sessions as f64
    }

    pub fn max_k(&self) -> u32 {
        self.counts.last().map_or(0, |(k, _)| *k)
    }
}

/// Builds the curve from per-session bully counts.
pub fn bully_persistence(bully_counts: &[u32]) -> Result<PersistenceCurve, StatsError> {
    let kept: Vec<u32> = bully_counts.iter().copied().filter(|&n| n > 0).collect();
    let max = *kept.iter().max().ok_or(StatsError::NoBullies)?;
    Ok(PersistenceCurve {
        sessions: kept.len(),
        counts: (1..=max)
            .map(|k| (k, kept.iter().filter(|&&n| n > k).count()))
            .collect(),
    })
}

pub fn group_persistence(sessions: &[SessionRecord], group: Group) -> Result<PersistenceCurve, StatsError> {
    let counts: Vec<u32> = sessions
        .iter()
        .filter(|s| s.group() == group)
        .map(|s| s.bully_events())
        .collect();
    bully_persistence(&counts)
}

/// Writes `k,control,experimental` rows up to the longer curve; a missing
/// group gets an empty column.
pub fn write_persistence_csv<W: Write>(
    w: W,
    control: Option<&PersistenceCurve>,
    experimental: Option<&PersistenceCurve>,
) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["k", "control", "experimental"])?;
    let max = control
        .map_or(0, |c| c.max_k())
        .max(experimental.map_or(0, |c| c.max_k()));
    let cell = |c: Option<&PersistenceCurve>, k: u32| c.map_or(String::new(), |c| format!("{:.6}", c.fraction(k)));
    for k in 1..=max {
        out.write_record([k.to_string(), cell(control, k), cell(experimental, k)])?;
    }
    out.flush()?;
    Ok(())
}
