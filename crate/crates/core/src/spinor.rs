//! The quadratic field `E = Q(sqrt(-p))` for `p ≡ 7 (mod 8)`, its local norm
//! groups, and the spinor norm group of `M_p` in the shape
//! `<ε, p^i β, p^j γ>`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::lattice::{superlattice, Instance, LatticeError};
use crate::local::{hilbert, jordan_split, LocalError, Place, SquareClass};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SpinorError {
    #[error("{0} is not a prime congruent to 7 mod 8")]
    NotSevenModEight(u128),
    #[error("Jordan shape <e, p^i b, p^j c> needs 1 <= i <= j and unit coefficients")]
    ShapeViolation,
    #[error("t = {0} is not coprime to p")]
    NotCoprime(u128),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

/// `E = Q(sqrt(-p))` with `p ≡ 7 (mod 8)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinorField {
    p: u128,
}

impl SpinorField {
    pub fn new(p: u128) -> Result<Self, SpinorError> {
        if p % 8 != 7 || !arith::is_prime(p) {
            return Err(SpinorError::NotSevenModEight(p));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> u128 {
        self.p
    }

    pub fn discriminant(&self) -> i128 {
        -(self.p as i128)
    }

    pub fn splits(&self, q: u128) -> Splitting {
        if q == self.p {
            Splitting::Ramified
        } else if q == 2 || arith::legendre(self.discriminant(), q) == 1 {
            Splitting::Split
        } else {
            Splitting::Inert
        }
    }

    /// Whether `num / den` is a local norm from `E` at `q`.
    pub fn norm_group_contains(&self, q: u128, num: i128, den: i128) -> Result<bool, SpinorError> {
        let s = SquareClass::of(num.checked_mul(den).ok_or(LocalError::DegenerateForm)?, q)?;
        Ok(match self.splits(q) {
            Splitting::Split => true,
            Splitting::Inert => s.representative % q != 0,
            Splitting::Ramified => s.representative == 1 || s.representative == q,
        })
    }

    /// Same membership through the norm-residue symbol `(s, -p)_q`.
    pub fn norm_residue(&self, q: u128, s: i128) -> Result<bool, SpinorError> {
        Ok(hilbert(s, self.discriminant(), Place::Finite(q))? == 1)
    }
}

/// Spinor norm group of `M_p`, as square classes at `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaGroup {
    pub p: u128,
    pub classes: BTreeSet<SquareClass>,
}

impl ThetaGroup {
    /// Whether every class lies in `{1, p} Q_p^×2`.
    pub fn inside_norms(&self) -> bool {
        self.classes.iter().all(|c| c.representative == 1 || c.representative == self.p)
    }

    pub fn contains(&self, c: &SquareClass) -> bool {
        self.classes.contains(c)
    }
}

/// `{1, εβ p^i, εγ p^j, βγ p^{i+j}}` modulo squares.
pub fn theta_mp(epsilon: i128, beta: i128, i: u32, gamma: i128, j: u32, p: u128) -> Result<ThetaGroup, SpinorError> {
    let pi = p as i128;
    if i < 1 || i > j || [epsilon, beta, gamma].iter().any(|&u| u % pi == 0) {
        return Err(SpinorError::ShapeViolation);
    }
    let class = |unit: i128, e: u32| -> Result<SquareClass, SpinorError> {
        let unit = arith::reduce(unit, p) as i128;
        let r = SquareClass::of(unit, p)?.representative;
        Ok(SquareClass { prime: p, representative: r * if e % 2 == 1 { p } else { 1 } })
    };
    let classes = [class(1, 0)?, class(epsilon * beta, i)?, class(epsilon * gamma, j)?, class(beta * gamma, i + j)?];
    Ok(ThetaGroup { p, classes: classes.into_iter().collect() })
}

/// The Jordan data `(ε, β, i, γ, j)` of `M_p` for a valid instance.
pub fn mp_shape(instance: &Instance<i128>) -> Result<(i128, i128, u32, i128, u32), SpinorError> {
    let m = superlattice(instance)?;
    let p = *instance.p() as u128;
    let precision = arith::valuation(m.discriminant, p).map_err(|_| SpinorError::ShapeViolation)? + 3;
    let js = jordan_split(m.gram.entries(), p, precision)?;
    let diag = js.diagonal();
    if diag.len() != 3 || diag[0].0 != 0 || diag[1].0 < 1 {
        return Err(SpinorError::ShapeViolation);
    }
    Ok((diag[0].1 as i128, diag[1].1 as i128, diag[1].0, diag[2].1 as i128, diag[2].0))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Obstruction {
    /// `ord_p(dN)` is even.
    ExcludedByA,
    /// An odd prime `q != p` with odd exponent in `dN` is inert in `E`.
    ExcludedByB { q: u128 },
    /// `ε` is not a square mod `p`.
    ExcludedByC,
    Possible,
}

/// Which of the containment obstructions rules out `t` as a primitive spinor
/// exception of the genus of `M`.
pub fn spinor_exception_obstruction(instance: &Instance<i128>, t: u128) -> Result<Obstruction, SpinorError> {
    let p = *instance.p() as u128;
    let field = SpinorField::new(p)?;
    if t.is_multiple_of(p) {
        return Err(SpinorError::NotCoprime(t));
    }
    let d = instance.discriminant() as u128;
    if arith::valuation(d as i128, p).expect("positive").is_multiple_of(2) {
        return Ok(Obstruction::ExcludedByA);
    }
    for (q, e) in arith::factorize(d) {
        if e % 2 == 1 && q != 2 && q != p && field.splits(q) == Splitting::Inert {
            return Ok(Obstruction::ExcludedByB { q });
        }
    }
    if arith::legendre(*instance.epsilon(), p) == -1 {
        return Ok(Obstruction::ExcludedByC);
    }
    Ok(Obstruction::Possible)
}
