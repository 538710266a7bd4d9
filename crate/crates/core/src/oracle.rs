//! Brute-force ground truth: every value of `Q` on `ν + N` up to a bound.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::enumerate::{CosetEnumerator, EnumerationError, ValueTable};
use crate::lattice::Coset;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error("work budget exhausted after {visited} candidates; the table is partial")]
    BudgetExceeded { visited: u64, partial: Box<RepresentedSet> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationStats {
    pub visited: u64,
    #[serde(with = "millis")]
    pub elapsed: Duration,
}

mod millis {
    use serde::Serializer;
    pub fn serialize<S: Serializer>(d: &std::time::Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }
}

/// Values of a coset up to `bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentedSet {
    table: ValueTable,
    pub fingerprint: String,
    pub stats: EnumerationStats,
}

impl RepresentedSet {
    pub fn bound(&self) -> u64 {
        self.table.bound
    }

    pub fn contains(&self, v: u64) -> bool {
        self.table.contains(v)
    }

    pub fn authoritative(&self) -> bool {
        self.table.complete
    }

    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        self.table.values()
    }

    /// Indices `n >= 0` with `start + step n <= bound` and `start + step n`
    /// not a value, in increasing order.
    pub fn gaps(&self, start: u64, step: u64) -> Vec<u64> {
        if start > self.bound() {
            return Vec::new();
        }
        (0..=(self.bound() - start) / step).filter(|&n| !self.contains(start + step * n)).collect()
    }

    /// Whether no progression value in `[(1 - w) B, B]` is missed.
    pub fn stabilization(&self, start: u64, step: u64, window: f64) -> Stabilization {
        let b = self.bound();
        let lo = ((1.0 - window) * b as f64).ceil() as u64;
        let late = self.gaps(start, step).into_iter().map(|n| start + step * n).filter(|&v| v >= lo).count();
        if late == 0 {
            Stabilization::Stable
        } else {
            Stabilization::Unstable { late_gaps: late }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Stabilization {
    Stable,
    Unstable { late_gaps: usize },
}

/// Short description of the coset, stable across runs.
pub fn fingerprint(coset: &Coset<i128>) -> String {
    let u = coset.gram.upper();
    let n = coset.shift.numerators();
    format!(
        "[{},{},{},{},{},{}]+({},{},{})/{}",
        u[0], u[1], u[2], u[3], u[4], u[5], n[0], n[1], n[2], coset.shift.denominator()
    )
}

/// Exhaustive enumeration of the values `<= bound`.
pub fn enumerate(coset: &Coset<i128>, bound: u64, budget: Option<u64>) -> Result<RepresentedSet, OracleError> {
    let started = Instant::now();
    let table = CosetEnumerator::new(coset).value_table(bound, budget)?;
    let stats = EnumerationStats { visited: table.visited, elapsed: started.elapsed() };
    let set = RepresentedSet { fingerprint: fingerprint(coset), stats, table };
    if !set.authoritative() {
        return Err(OracleError::BudgetExceeded { visited: set.stats.visited, partial: Box::new(set) });
    }
    Ok(set)
}

/// Lexicographically least `x` with `Q(ν + x) = v`.
pub fn witness(coset: &Coset<i128>, v: u64) -> Result<Option<[i128; 3]>, OracleError> {
    Ok(CosetEnumerator::new(coset).find(v)?)
}
