//! Local theory at a prime `q`: square classes, Hilbert symbols, isotropy,
//! Jordan splittings and `Z_q`-universality.
//!
//! Everything here works on plain symmetric integer matrices ([`Sym3`]) so
//! that indefinite forms such as `<1, -1, -2>` can be handled alongside the
//! positive definite Gram matrices of the lattice layer.

mod jordan;
mod universal;
mod values;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;

pub use jordan::{jordan_split, BlockKind, ImproperBlock, JordanComponent, JordanSplitting};
pub use universal::{
    two_adic_prediction, local_universal, local_universal_with, primitive_rep_z2, TwoAdicPrediction, LocalMethod,
    LocalReport, PrimitiveRepresentation,
};
pub use values::{primitive_values, value_set_exhaustive, value_set_mod, PrimitiveValues};

/// A symmetric 3×3 integer matrix, not necessarily definite.
pub type Sym3 = [[i128; 3]; 3];

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LocalError {
    #[error("{0} is not a prime")]
    NotPrime(u128),
    #[error("the form is degenerate")]
    DegenerateForm,
    #[error("precision q^{precision} is too low to certify the splitting")]
    PrecisionTooLow { precision: u32 },
    #[error("the form is not universal over Z_2")]
    NotUniversalAt2,
    #[error("search at q = {q} exceeded its work limit")]
    SearchTooLarge { q: u128 },
}

/// A completion of `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Place {
    Finite(u128),
    Infinity,
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Finite(q) => write!(f, "{q}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

/// Coset of `Q_q^×` modulo squares, named by a small positive integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SquareClass {
    pub prime: u128,
    pub representative: u128,
}

impl SquareClass {
    /// Canonical representatives in reporting order: `1, u, q, qu` for odd
    /// `q` (`u` the least nonresidue) and `1, 3, 5, 7, 2, 6, 10, 14` at 2.
    pub fn representatives(q: u128) -> Vec<SquareClass> {
        let reps = if q == 2 {
            vec![1, 3, 5, 7, 2, 6, 10, 14]
        } else {
            let u = arith::least_nonresidue(q);
            vec![1, u, q, q * u]
        };
        reps.into_iter().map(|representative| SquareClass { prime: q, representative }).collect()
    }

    /// Square class of a nonzero integer.
    pub fn of(n: i128, q: u128) -> Result<SquareClass, LocalError> {
        Self::of_big(&BigInt::from(n), q)
    }

    /// Square class of a nonzero rational.
    pub fn of_rational(r: &BigRational, q: u128) -> Result<SquareClass, LocalError> {
        Self::of_big(&(r.numer() * r.denom()), q)
    }

    fn of_big(n: &BigInt, q: u128) -> Result<SquareClass, LocalError> {
        let (ord, unit) = split_big(n, q).ok_or(LocalError::DegenerateForm)?;
        let odd = if ord % 2 == 1 { q } else { 1 };
        let representative = if q == 2 {
            odd * residue(&unit, 8)
        } else {
            let sq = arith::legendre(residue(&unit, q) as i128, q) == 1;
            odd * if sq { 1 } else { arith::least_nonresidue(q) }
        };
        Ok(SquareClass { prime: q, representative })
    }
}

impl std::fmt::Display for SquareClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.representative)
    }
}

/// `(ord_q n, n / q^ord)` for a nonzero big integer.
pub(crate) fn split_big(n: &BigInt, q: u128) -> Option<(u32, BigInt)> {
    if n.is_zero() {
        return None;
    }
    let qb = BigInt::from(q);
    let mut n = n.clone();
    let mut e = 0;
    loop {
        let (d, r) = n.div_rem(&qb);
        if !r.is_zero() {
            return Some((e, n));
        }
        n = d;
        e += 1;
    }
}

/// Least nonnegative residue of a big integer.
pub(crate) fn residue(n: &BigInt, m: u128) -> u128 {
    n.mod_floor(&BigInt::from(m)).to_u128().expect("residue fits")
}

/// `q`-adic valuation of a nonzero rational.
pub(crate) fn rational_valuation(r: &BigRational, q: u128) -> Option<i64> {
    let (a, _) = split_big(r.numer(), q)?;
    let (b, _) = split_big(r.denom(), q)?;
    Some(a as i64 - b as i64)
}

/// Residue of a `q`-integral rational modulo `m = q^k`.
pub(crate) fn rational_residue(r: &BigRational, m: u128) -> Option<u128> {
    let num = residue(r.numer(), m);
    let den = residue(r.denom(), m);
    let inv = arith::mod_inverse(den as i128, m)?;
    Some(arith::mul_mod(num, inv, m))
}

/// Local Hilbert symbol `(a, b)_v` of nonzero integers.
pub fn hilbert(a: i128, b: i128, place: Place) -> Result<i8, LocalError> {
    hilbert_big(&BigInt::from(a), &BigInt::from(b), place)
}

/// Local Hilbert symbol of nonzero rationals.
pub fn hilbert_rational(a: &BigRational, b: &BigRational, place: Place) -> Result<i8, LocalError> {
    hilbert_big(&(a.numer() * a.denom()), &(b.numer() * b.denom()), place)
}

fn hilbert_big(a: &BigInt, b: &BigInt, place: Place) -> Result<i8, LocalError> {
    if a.is_zero() || b.is_zero() {
        return Err(LocalError::DegenerateForm);
    }
    let q = match place {
        Place::Infinity => return Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 }),
        Place::Finite(q) => q,
    };
    if !arith::is_prime(q) {
        return Err(LocalError::NotPrime(q));
    }
    let (alpha, u) = split_big(a, q).expect("nonzero");
    let (beta, v) = split_big(b, q).expect("nonzero");
    let (alpha, beta) = ((alpha % 2) as u128, (beta % 2) as u128);
    if q == 2 {
        let (u, v) = (residue(&u, 8), residue(&v, 8));
        let eps = |x: u128| ((x - 1) / 2) % 2;
        let omega = |x: u128| ((x * x - 1) / 8) % 2;
        let e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u);
        return Ok(if e % 2 == 0 { 1 } else { -1 });
    }
    let mut s: i8 = if (alpha * beta * ((q - 1) / 2)) % 2 == 1 { -1 } else { 1 };
    if beta == 1 {
        s *= arith::legendre(residue(&u, q) as i128, q);
    }
    if alpha == 1 {
        s *= arith::legendre(residue(&v, q) as i128, q);
    }
    Ok(s)
}

/// Whether the diagonal ternary space `[a, b, c]` over `Q_v` has no
/// nontrivial zero.
pub fn is_anisotropic(coeffs: &[BigRational; 3], place: Place) -> Result<bool, LocalError> {
    if coeffs.iter().any(|c| c.is_zero()) {
        return Err(LocalError::DegenerateForm);
    }
    let [a, b, c] = coeffs;
    if place == Place::Infinity {
        let pos = coeffs.iter().filter(|c| c.is_positive()).count();
        return Ok(pos == 0 || pos == 3);
    }
    Ok(hilbert_rational(&-(a * c), &-(b * c), place)? == -1)
}

/// Integer convenience wrapper for [`is_anisotropic`].
pub fn is_anisotropic_int(coeffs: [i128; 3], place: Place) -> Result<bool, LocalError> {
    let c = coeffs.map(|v| BigRational::from_integer(BigInt::from(v)));
    is_anisotropic(&c, place)
}

/// Diagonalizes a nondegenerate symmetric matrix over `Q`.
pub fn rational_diagonal(g: &Sym3) -> Result<[BigRational; 3], LocalError> {
    let mut a: Vec<Vec<BigRational>> =
        g.iter().map(|row| row.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect()).collect();
    let mut out: Vec<BigRational> = Vec::with_capacity(3);
    let mut live: Vec<usize> = vec![0, 1, 2];
    while !live.is_empty() {
        let pivot = match live.iter().copied().find(|&i| !a[i][i].is_zero()) {
            Some(i) => i,
            None => {
                let (i, j) = live
                    .iter()
                    .flat_map(|&i| live.iter().map(move |&j| (i, j)))
                    .find(|&(i, j)| i != j && !a[i][j].is_zero())
                    .ok_or(LocalError::DegenerateForm)?;
                add_basis_vector(&mut a, i, j);
                i
            }
        };
        live.retain(|&k| k != pivot);
        for &k in &live {
            let f = &a[pivot][k] / &a[pivot][pivot];
            eliminate(&mut a, pivot, k, &f);
        }
        out.push(a[pivot][pivot].clone());
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

/// Replaces basis vector `i` by `e_i + e_j` in a symmetric matrix.
pub(crate) fn add_basis_vector(a: &mut [Vec<BigRational>], i: usize, j: usize) {
    let n = a.len();
    for k in 0..n {
        let v = &a[i][k] + &a[j][k];
        a[i][k] = v;
    }
    for k in 0..n {
        let v = &a[k][i] + &a[k][j];
        a[k][i] = v;
    }
}

/// Replaces basis vector `k` by `e_k - f e_pivot`.
pub(crate) fn eliminate(a: &mut [Vec<BigRational>], pivot: usize, k: usize, f: &BigRational) {
    let n = a.len();
    for m in 0..n {
        let v = &a[k][m] - f * &a[pivot][m];
        a[k][m] = v;
    }
    for m in 0..n {
        let v = &a[m][k] - f * &a[m][pivot];
        a[m][k] = v;
    }
}

/// Determinant of a symmetric integer matrix, if it fits in `i128`.
pub fn det_of(g: &Sym3) -> Option<i128> {
    det(g)
}

pub(crate) fn det(g: &Sym3) -> Option<i128> {
    let m = |a: i128, b: i128| a.checked_mul(b);
    let c0 = m(g[1][1], g[2][2])?.checked_sub(m(g[1][2], g[2][1])?)?;
    let c1 = m(g[1][0], g[2][2])?.checked_sub(m(g[1][2], g[2][0])?)?;
    let c2 = m(g[1][0], g[2][1])?.checked_sub(m(g[1][1], g[2][0])?)?;
    m(g[0][0], c0)?.checked_sub(m(g[0][1], c1)?)?.checked_add(m(g[0][2], c2)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_values() {
        assert_eq!(hilbert(-1, -1, Place::Finite(2)).unwrap(), -1);
        assert_eq!(hilbert(-1, -1, Place::Infinity).unwrap(), -1);
        assert_eq!(hilbert(-1, -1, Place::Finite(3)).unwrap(), 1);
        assert_eq!(hilbert(1, 7, Place::Finite(7)).unwrap(), 1);
        assert_eq!(hilbert(3, 7, Place::Finite(7)).unwrap(), -1);
        assert_eq!(hilbert(2, 3, Place::Finite(3)).unwrap(), -1);
        assert_eq!(hilbert(2, 3, Place::Finite(2)).unwrap(), -1);
        assert_eq!(hilbert(5, 5, Place::Finite(5)).unwrap(), 1);
        assert!(hilbert(0, 3, Place::Finite(3)).is_err());
        assert!(hilbert(2, 3, Place::Finite(9)).is_err());
    }

    #[test]
    fn anisotropy() {
        assert!(!is_anisotropic_int([1, -1, 5], Place::Finite(3)).unwrap());
        assert!(is_anisotropic_int([1, 1, 1], Place::Finite(2)).unwrap());
        assert!(!is_anisotropic_int([1, 1, 1], Place::Finite(3)).unwrap());
        assert!(is_anisotropic_int([1, 1, 1], Place::Infinity).unwrap());
        assert!(is_anisotropic_int([1, 1, 7], Place::Finite(7)).unwrap());
        assert!(matches!(is_anisotropic_int([1, 0, 1], Place::Finite(3)), Err(LocalError::DegenerateForm)));
    }

    #[test]
    fn square_classes() {
        assert_eq!(SquareClass::of(12, 3).unwrap().representative, 3);
        assert_eq!(SquareClass::of(-1, 7).unwrap().representative, 3);
        assert_eq!(SquareClass::of(28, 2).unwrap().representative, 7);
        assert_eq!(SquareClass::of(-2, 2).unwrap().representative, 14);
        let reps: Vec<u128> = SquareClass::representatives(7).iter().map(|c| c.representative).collect();
        assert_eq!(reps, vec![1, 3, 7, 21]);
    }

    #[test]
    fn rational_diagonalization() {
        let d = rational_diagonal(&[[0, 1, 0], [1, 0, 0], [0, 0, 3]]).unwrap();
        let prod: BigRational = d.iter().product();
        assert_eq!(prod, BigRational::from_integer((-3).into()));
        let d = rational_diagonal(&[[2, 1, 0], [1, 2, 0], [0, 0, 7]]).unwrap();
        assert_eq!(d.iter().product::<BigRational>(), BigRational::from_integer(21.into()));
        assert!(rational_diagonal(&[[1, 1, 0], [1, 1, 0], [0, 0, 1]]).is_err());
    }
}
