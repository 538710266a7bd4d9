//! Decision procedure for almost universality of ternary inhomogeneous
//! quadratic polynomials `Q(x) + 2B(ν, x)` whose conductor is a power of an
//! odd prime.
//!
//! The lattice layer ([`lattice`]) is generic over [`Scalar`]; the local,
//! enumeration and decision layers work on `i128`.

pub mod arith;
pub mod engine;
pub mod enumerate;
pub mod io;
pub mod lattice;
pub mod local;
pub mod oracle;
pub mod scalar;
pub mod spinor;

pub use engine::{analyze, decide, Analysis, Branch, Decision, Verdict};
pub use lattice::{validate_instance, Coset, GramMatrix3, Instance, LatticeError, Rejection, ShiftVector, SuperlatticeM};
pub use scalar::{Overflow, Scalar};

pub type Gram = GramMatrix3<i128>;
pub type Shift = ShiftVector<i128>;
pub type Inst = Instance<i128>;
pub type BigGram = GramMatrix3<num_bigint::BigInt>;
pub type BigShift = ShiftVector<num_bigint::BigInt>;
pub type BigInst = Instance<num_bigint::BigInt>;
