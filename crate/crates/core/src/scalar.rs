//! The integer scalar abstraction the lattice layer is written against.
//!
//! Every exact computation on Gram data goes through [`Scalar`], which is
//! implemented for `i64`, `i128` and [`num_bigint::BigInt`]. Machine-width
//! instantiations use checked arithmetic; an overflow surfaces as
//! [`Overflow`] instead of wrapping.

use std::fmt::{Debug, Display};

use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, Signed, ToPrimitive};

/// Exact signed integer usable as a Gram-matrix entry.
pub trait Scalar:
    Integer
    + Signed
    + Clone
    + Debug
    + Display
    + FromPrimitive
    + ToPrimitive
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + Send
    + Sync
    + 'static
{
    fn from_i128_exact(v: i128) -> Option<Self> {
        Self::from_i128(v)
    }
}

impl<T> Scalar for T where
    T: Integer
        + Signed
        + Clone
        + Debug
        + Display
        + FromPrimitive
        + ToPrimitive
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + Send
        + Sync
        + 'static
{
}

/// Arithmetic left the representable range of the scalar type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("integer overflow in exact arithmetic")]
pub struct Overflow;

pub(crate) fn add<T: Scalar>(a: &T, b: &T) -> Result<T, Overflow> {
    a.checked_add(b).ok_or(Overflow)
}

pub(crate) fn sub<T: Scalar>(a: &T, b: &T) -> Result<T, Overflow> {
    a.checked_sub(b).ok_or(Overflow)
}

pub(crate) fn mul<T: Scalar>(a: &T, b: &T) -> Result<T, Overflow> {
    a.checked_mul(b).ok_or(Overflow)
}

pub(crate) fn small<T: Scalar>(v: i64) -> T {
    T::from_i64(v).expect("small constants fit every scalar type")
}

/// Largest `e` with `q^e | n`, or `None` for `n = 0`.
pub fn valuation<T: Scalar>(n: &T, q: &T) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let mut n = n.clone();
    let mut e = 0;
    loop {
        let (quot, rem) = n.div_rem(q);
        if !rem.is_zero() {
            return Some(e);
        }
        n = quot;
        e += 1;
    }
}

/// `q^e`, checked.
pub fn pow<T: Scalar>(q: &T, e: u32) -> Result<T, Overflow> {
    let mut acc = T::one();
    for _ in 0..e {
        acc = mul(&acc, q)?;
    }
    Ok(acc)
}

pub fn to_i128<T: Scalar>(v: &T) -> Result<i128, Overflow> {
    v.to_i128().ok_or(Overflow)
}

pub fn to_u128<T: Scalar>(v: &T) -> Result<u128, Overflow> {
    v.to_u128().ok_or(Overflow)
}

pub fn from_i128<T: Scalar>(v: i128) -> Result<T, Overflow> {
    T::from_i128_exact(v).ok_or(Overflow)
}

pub fn from_u128<T: Scalar>(v: u128) -> Result<T, Overflow> {
    T::from_u128(v).ok_or(Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn valuation_generic() {
        assert_eq!(valuation(&4802i64, &7), Some(4));
        assert_eq!(valuation(&BigInt::from(50), &BigInt::from(5)), Some(2));
        assert_eq!(valuation(&-8i128, &2), Some(3));
        assert_eq!(valuation(&0i128, &2), None);
    }

    #[test]
    fn checked_ops_report_overflow() {
        assert_eq!(mul(&i64::MAX, &2), Err(Overflow));
        assert_eq!(pow(&3i64, 50), Err(Overflow));
        assert!(pow(&BigInt::from(3), 50).is_ok());
    }
}
