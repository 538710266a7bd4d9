//! Exact Gram-matrix data for a ternary lattice `N`, a rational shift `ν`,
//! and the coset `ν + N`.
//!
//! A polynomial `f(x) = Q(x) + 2B(ν, x)` represents `n` exactly when
//! `Q(ν) + n` is a value of `Q` on the coset `ν + N`, so everything here is
//! phrased in terms of the pair `(N, ν)`. Types are generic over the integer
//! [`Scalar`]; see the crate-root aliases for the common instantiations.

use thiserror::Error;

use crate::arith;
use crate::scalar::{self, Overflow, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("Gram matrix is not positive definite (leading minor {index} is {minor})")]
    NotPositiveDefinite { index: usize, minor: String },
    #[error("shift has a zero denominator")]
    ZeroDenominator,
    #[error("the coset takes non-integral values ({0})")]
    NonIntegralValues(String),
    #[error("superlattice basis construction failed: {0}")]
    InternalBasisFailure(String),
    #[error("translation vector does not give an integral index shift")]
    NonIntegralTranslation,
    #[error("change of basis is not unimodular")]
    NotUnimodular,
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

/// Symmetric positive definite integral 3×3 Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GramMatrix3<T: Scalar> {
    entries: [[T; 3]; 3],
}

fn det3<T: Scalar>(m: &[[T; 3]; 3]) -> Result<T, Overflow> {
    use scalar::{add, mul, sub};
    let c0 = sub(&mul(&m[1][1], &m[2][2])?, &mul(&m[1][2], &m[2][1])?)?;
    let c1 = sub(&mul(&m[1][0], &m[2][2])?, &mul(&m[1][2], &m[2][0])?)?;
    let c2 = sub(&mul(&m[1][0], &m[2][1])?, &mul(&m[1][1], &m[2][0])?)?;
    add(&sub(&mul(&m[0][0], &c0)?, &mul(&m[0][1], &c1)?)?, &mul(&m[0][2], &c2)?)
}

/// Leading principal minors of a 3×3 matrix.
fn leading_minors<T: Scalar>(m: &[[T; 3]; 3]) -> Result<[T; 3], Overflow> {
    use scalar::{mul, sub};
    let m1 = m[0][0].clone();
    let m2 = sub(&mul(&m[0][0], &m[1][1])?, &mul(&m[0][1], &m[1][0])?)?;
    Ok([m1, m2, det3(m)?])
}

/// Determinant of a symmetric matrix, rejecting anything that is not
/// positive definite.
pub fn discriminant<T: Scalar>(entries: &[[T; 3]; 3]) -> Result<T, LatticeError> {
    Ok(GramMatrix3::new(entries.clone())?.discriminant().clone())
}

impl<T: Scalar> GramMatrix3<T> {
    pub fn new(entries: [[T; 3]; 3]) -> Result<Self, LatticeError> {
        for i in 0..3 {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(LatticeError::NotSymmetric);
                }
            }
        }
        let minors = leading_minors(&entries)?;
        for (index, minor) in minors.iter().enumerate() {
            if !minor.is_positive() {
                return Err(LatticeError::NotPositiveDefinite { index: index + 1, minor: minor.to_string() });
            }
        }
        Ok(Self { entries })
    }

    /// Builds the matrix from its upper triangle `(g11, g12, g13, g22, g23, g33)`.
    pub fn from_upper(upper: [T; 6]) -> Result<Self, LatticeError> {
        let [g11, g12, g13, g22, g23, g33] = upper;
        Self::new([
            [g11, g12.clone(), g13.clone()],
            [g12, g22, g23.clone()],
            [g13, g23, g33],
        ])
    }

    pub fn diagonal(a: T, b: T, c: T) -> Result<Self, LatticeError> {
        let z = T::zero;
        Self::from_upper([a, z(), z(), b, z(), c])
    }

    pub fn entries(&self) -> &[[T; 3]; 3] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &T {
        &self.entries[i][j]
    }

    pub fn upper(&self) -> [T; 6] {
        let e = &self.entries;
        [e[0][0].clone(), e[0][1].clone(), e[0][2].clone(), e[1][1].clone(), e[1][2].clone(), e[2][2].clone()]
    }

    pub fn discriminant(&self) -> T {
        det3(&self.entries).expect("determinant was computable at construction")
    }

    pub fn is_diagonal(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| i == j || self.entries[i][j].is_zero()))
    }

    /// `G x`.
    pub fn apply(&self, x: &[T; 3]) -> Result<[T; 3], Overflow> {
        let mut out: [T; 3] = std::array::from_fn(|_| T::zero());
        for (i, o) in out.iter_mut().enumerate() {
            for (j, xj) in x.iter().enumerate() {
                *o = scalar::add(o, &scalar::mul(&self.entries[i][j], xj)?)?;
            }
        }
        Ok(out)
    }

    /// `B(x, y) = x^T G y` for integer coordinate vectors.
    pub fn bilinear(&self, x: &[T; 3], y: &[T; 3]) -> Result<T, Overflow> {
        let gy = self.apply(y)?;
        let mut acc = T::zero();
        for i in 0..3 {
            acc = scalar::add(&acc, &scalar::mul(&x[i], &gy[i])?)?;
        }
        Ok(acc)
    }

    /// `Q(x)`.
    pub fn value(&self, x: &[T; 3]) -> Result<T, Overflow> {
        self.bilinear(x, x)
    }

    /// `U^T G U`.
    pub fn change_basis(&self, u: &[[T; 3]; 3]) -> Result<Self, LatticeError> {
        let mut out: [[T; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| T::zero()));
        let cols: [[T; 3]; 3] = std::array::from_fn(|j| std::array::from_fn(|i| u[i][j].clone()));
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.bilinear(&cols[i], &cols[j])?;
            }
        }
        Self::new(out)
    }

    /// Divides every entry by `f`, if that keeps the matrix integral.
    pub fn divided_by(&self, f: &T) -> Option<Self> {
        let mut out = self.entries.clone();
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                let (q, r) = v.div_rem(f);
                if !r.is_zero() {
                    return None;
                }
                *v = q;
            }
        }
        Self::new(out).ok()
    }

    /// Converts to another scalar type, going through `i128`.
    pub fn convert<U: Scalar>(&self) -> Result<GramMatrix3<U>, LatticeError> {
        let mut out: [[U; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| U::zero()));
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = scalar::from_i128(scalar::to_i128(&self.entries[i][j])?)?;
            }
        }
        GramMatrix3::new(out)
    }
}

/// Rational vector `ν = (a e1 + b e2 + c e3) / d` in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShiftVector<T: Scalar> {
    numerators: [T; 3],
    denominator: T,
}

impl<T: Scalar> ShiftVector<T> {
    /// Reduces `num / den` to canonical form (`den > 0`, `gcd(a, b, c, d) = 1`).
    pub fn new(numerators: [T; 3], denominator: T) -> Result<Self, LatticeError> {
        if denominator.is_zero() {
            return Err(LatticeError::ZeroDenominator);
        }
        let mut g = denominator.abs();
        for n in &numerators {
            g = g.gcd(n);
        }
        if denominator.is_negative() {
            g = -g;
        }
        Ok(Self { numerators: numerators.map(|n| n / g.clone()), denominator: denominator / g })
    }

    pub fn integral(v: [T; 3]) -> Self {
        Self { numerators: v, denominator: T::one() }
    }

    pub fn zero() -> Self {
        Self::integral(std::array::from_fn(|_| T::zero()))
    }

    /// Builds the shift from three independent fractions `n_i / d_i`.
    pub fn from_fractions(coords: [(T, T); 3]) -> Result<Self, LatticeError> {
        let mut den = T::one();
        for (_, d) in &coords {
            if d.is_zero() {
                return Err(LatticeError::ZeroDenominator);
            }
            den = den.lcm(d);
        }
        let mut nums: [T; 3] = std::array::from_fn(|_| T::zero());
        for (slot, (n, d)) in nums.iter_mut().zip(coords.iter()) {
            *slot = scalar::mul(n, &(den.clone() / d.clone()))?;
        }
        Self::new(nums, den)
    }

    pub fn numerators(&self) -> &[T; 3] {
        &self.numerators
    }

    pub fn denominator(&self) -> &T {
        &self.denominator
    }

    /// The least `m >= 1` with `m ν ∈ N`.
    pub fn conductor(&self) -> &T {
        &self.denominator
    }

    /// `ν + x0` for an integral vector `x0`.
    pub fn translate(&self, x0: &[T; 3]) -> Result<Self, LatticeError> {
        let mut nums = self.numerators.clone();
        for (n, x) in nums.iter_mut().zip(x0.iter()) {
            *n = scalar::add(n, &scalar::mul(x, &self.denominator)?)?;
        }
        Self::new(nums, self.denominator.clone())
    }

    /// Representative of `ν + N` with every numerator in `[0, d)`, together
    /// with the translation that produced it.
    pub fn canonical(&self) -> (Self, [T; 3]) {
        let d = &self.denominator;
        let x0: [T; 3] = std::array::from_fn(|i| -self.numerators[i].div_floor(d));
        let nums: [T; 3] = std::array::from_fn(|i| self.numerators[i].mod_floor(d));
        (Self { numerators: nums, denominator: d.clone() }, x0)
    }

    /// Coordinates of the same vector after the change of basis whose columns
    /// are given by `u` (new coordinates are `u^{-1} ν`).
    pub fn transform(&self, u: &[[T; 3]; 3]) -> Result<Self, LatticeError> {
        let inv = unimodular_inverse(u)?;
        let mut nums: [T; 3] = std::array::from_fn(|_| T::zero());
        for (i, slot) in nums.iter_mut().enumerate() {
            for j in 0..3 {
                *slot = scalar::add(slot, &scalar::mul(&inv[i][j], &self.numerators[j])?)?;
            }
        }
        Self::new(nums, self.denominator.clone())
    }

    pub fn convert<U: Scalar>(&self) -> Result<ShiftVector<U>, LatticeError> {
        let mut nums: [U; 3] = std::array::from_fn(|_| U::zero());
        for (slot, n) in nums.iter_mut().zip(self.numerators.iter()) {
            *slot = scalar::from_i128(scalar::to_i128(n)?)?;
        }
        ShiftVector::new(nums, scalar::from_i128(scalar::to_i128(&self.denominator)?)?)
    }
}

impl<T: Scalar> std::fmt::Display for ShiftVector<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [a, b, c] = &self.numerators;
        write!(f, "({a}, {b}, {c})/{}", self.denominator)
    }
}

/// Inverse of an integer matrix with determinant ±1.
pub fn unimodular_inverse<T: Scalar>(u: &[[T; 3]; 3]) -> Result<[[T; 3]; 3], LatticeError> {
    use scalar::{mul, sub};
    let det = det3(u)?;
    if !det.abs().is_one() {
        return Err(LatticeError::NotUnimodular);
    }
    let mut inv: [[T; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| T::zero()));
    for i in 0..3 {
        for j in 0..3 {
            // cofactor of (j, i)
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            let cof = sub(&mul(&u[r0][c0], &u[r1][c1])?, &mul(&u[r0][c1], &u[r1][c0])?)?;
            inv[i][j] = mul(&cof, &det)?;
        }
    }
    Ok(inv)
}

/// The pair `(N, ν)`: a Gram matrix and a rational shift.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coset<T: Scalar> {
    pub gram: GramMatrix3<T>,
    pub shift: ShiftVector<T>,
}

impl<T: Scalar> Coset<T> {
    pub fn new(gram: GramMatrix3<T>, shift: ShiftVector<T>) -> Self {
        Self { gram, shift }
    }

    /// `G n` where `ν = n / d`.
    fn gram_times_numerators(&self) -> Result<[T; 3], Overflow> {
        self.gram.apply(self.shift.numerators())
    }

    /// `Q(ν)` as an exact fraction `(numerator, d^2)`.
    pub fn shift_value_fraction(&self) -> Result<(T, T), Overflow> {
        let d = self.shift.denominator();
        Ok((self.gram.value(self.shift.numerators())?, scalar::mul(d, d)?))
    }

    /// `Q(ν)`, if it is an integer.
    pub fn shift_value(&self) -> Result<T, LatticeError> {
        let (num, den) = self.shift_value_fraction()?;
        let (q, r) = num.div_rem(&den);
        if !r.is_zero() {
            return Err(LatticeError::NonIntegralValues(format!("Q(nu) = {num}/{den}")));
        }
        Ok(q)
    }

    /// `B(ν, x)` for integral `x`, if it is an integer.
    pub fn shift_pairing(&self, x: &[T; 3]) -> Result<Option<T>, Overflow> {
        let gn = self.gram_times_numerators()?;
        let mut acc = T::zero();
        for i in 0..3 {
            acc = scalar::add(&acc, &scalar::mul(&gn[i], &x[i])?)?;
        }
        let (q, r) = acc.div_rem(self.shift.denominator());
        Ok(r.is_zero().then_some(q))
    }

    /// `Q(ν + x)` for integral `x`.
    pub fn value_at(&self, x: &[T; 3]) -> Result<T, LatticeError> {
        let shifted = self.shift.translate(x)?;
        Coset::new(self.gram.clone(), shifted).shift_value()
    }

    /// Generator `g` of the ideal spanned by `Q(x) + 2B(ν, x)`, `x ∈ N`.
    ///
    /// Uses the finite generating set `{Q(e_i) + 2B(ν, e_i)} ∪ {2Q(e_i)} ∪
    /// {2B(e_i, e_j)}`, which suffices because `f(x + y) = f(x) + f(y) +
    /// 2B(x, y)` and `k^2 - k` is even.
    pub fn norm_ideal(&self) -> Result<T, LatticeError> {
        self.shift_value()?;
        let gn = self.gram_times_numerators()?;
        let d = self.shift.denominator();
        let two: T = scalar::small(2);
        let g = self.gram.entries();
        let mut acc = T::zero();
        for i in 0..3 {
            let twice = scalar::mul(&two, &gn[i])?;
            let (pairing, r) = twice.div_rem(d);
            if !r.is_zero() {
                return Err(LatticeError::NonIntegralValues(format!("2B(nu, e{}) = {twice}/{d}", i + 1)));
            }
            acc = acc.gcd(&scalar::add(&g[i][i], &pairing)?);
            acc = acc.gcd(&scalar::mul(&two, &g[i][i])?);
            for j in (i + 1)..3 {
                acc = acc.gcd(&scalar::mul(&two, &g[i][j])?);
            }
        }
        Ok(acc)
    }
}

/// Least `m` with `m ν ∈ N` for a shift given as three fractions, together
/// with the canonical shift.
pub fn conductor<T: Scalar>(coords: [(T, T); 3]) -> Result<(T, ShiftVector<T>), LatticeError> {
    let shift = ShiftVector::from_fractions(coords)?;
    Ok((shift.conductor().clone(), shift))
}

/// Why a pair `(N, ν)` does not satisfy the hypotheses of the decision
/// procedure.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("norm ideal {generator}Z is generated by a power of 2")]
    EvenPrime { generator: String },
    #[error("norm ideal {generator}Z is not generated by a positive power of an odd prime")]
    CompositeNormIdeal { generator: String },
    #[error("conductor {conductor} is not p^alpha = {expected}")]
    ConductorMismatch { conductor: String, expected: String },
    #[error("ord_p(Q(nu)) = {ord} >= alpha = {alpha}; the polynomial is not almost universal")]
    ShortCircuitNotAlmostUniversal { p: String, alpha: u32, ord: u32 },
    #[error("Gram matrix does not stay integral after dividing by p^{power}")]
    NonIntegralAfterScaling { power: u32 },
    #[error("B(nu, N) or Q(N) is not contained in p^alpha Z")]
    Malformed,
}

impl From<Overflow> for Rejection {
    fn from(e: Overflow) -> Self {
        Rejection::Lattice(e.into())
    }
}

/// A pair `(N, ν)` satisfying the standing hypotheses: norm ideal `p^α Z`
/// with `p` odd and `α >= 1`, conductor `p^α`, and `ε = Q(ν)` a `p`-adic
/// unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance<T: Scalar> {
    coset: Coset<T>,
    p: T,
    alpha: u32,
    epsilon: T,
    scale_applied: u32,
}

impl<T: Scalar> Instance<T> {
    pub fn coset(&self) -> &Coset<T> {
        &self.coset
    }
    pub fn gram(&self) -> &GramMatrix3<T> {
        &self.coset.gram
    }
    pub fn shift(&self) -> &ShiftVector<T> {
        &self.coset.shift
    }
    pub fn p(&self) -> &T {
        &self.p
    }
    pub fn alpha(&self) -> u32 {
        self.alpha
    }
    pub fn epsilon(&self) -> &T {
        &self.epsilon
    }
    pub fn scale_applied(&self) -> u32 {
        self.scale_applied
    }
    /// `p^α`, which is both the norm-ideal generator and the conductor.
    pub fn modulus(&self) -> T {
        self.coset.shift.denominator().clone()
    }
    pub fn discriminant(&self) -> T {
        self.coset.gram.discriminant()
    }
}

/// Checks the hypotheses and normalizes `(N, ν)` into an [`Instance`].
///
/// The shift is reduced to its canonical coset representative (numerators in
/// `[0, p^α)`); when `0 < ord_p(Q(ν)) < α` the quadratic map is divided by
/// `p^{ord_p(Q(ν))}` first.
pub fn validate_instance<T: Scalar>(gram: &GramMatrix3<T>, shift: &ShiftVector<T>) -> Result<Instance<T>, Rejection> {
    let coset = Coset::new(gram.clone(), shift.clone());
    let g = coset.norm_ideal()?;
    let (p, alpha) = prime_power(&g)?;
    let conductor = shift.conductor().clone();
    let gamma = match scalar::valuation(&conductor, &p) {
        Some(gamma) if scalar::pow(&p, gamma)? == conductor => gamma,
        _ => {
            return Err(Rejection::ConductorMismatch {
                conductor: conductor.to_string(),
                expected: scalar::pow(&p, alpha)?.to_string(),
            })
        }
    };
    let q_nu = coset.shift_value()?;
    let ord = scalar::valuation(&q_nu, &p).unwrap_or(u32::MAX);
    if ord >= alpha {
        return Err(Rejection::ShortCircuitNotAlmostUniversal { p: p.to_string(), alpha, ord });
    }
    let (coset, alpha, scale_applied) = if ord > 0 {
        let f = scalar::pow(&p, ord)?;
        let scaled = gram.divided_by(&f).ok_or(Rejection::NonIntegralAfterScaling { power: ord })?;
        let coset = Coset::new(scaled, shift.clone());
        let g = coset.norm_ideal()?;
        let (p2, alpha2) = prime_power(&g)?;
        if p2 != p {
            return Err(Rejection::CompositeNormIdeal { generator: g.to_string() });
        }
        (coset, alpha2, ord)
    } else {
        (coset, alpha, 0)
    };
    if gamma != alpha {
        return Err(Rejection::ConductorMismatch {
            conductor: conductor.to_string(),
            expected: scalar::pow(&p, alpha)?.to_string(),
        });
    }
    let (canonical, _) = coset.shift.canonical();
    let coset = Coset::new(coset.gram, canonical);
    let modulus = scalar::pow(&p, alpha)?;
    // For odd p the hypotheses force Q(N) and B(ν, N) into p^α Z.
    for i in 0..3 {
        for j in 0..3 {
            if !coset.gram.entry(i, j).is_multiple_of(&modulus) {
                return Err(Rejection::Malformed);
            }
        }
        let e: [T; 3] = std::array::from_fn(|k| if k == i { T::one() } else { T::zero() });
        match coset.shift_pairing(&e)? {
            Some(b) if b.is_multiple_of(&modulus) => {}
            _ => return Err(Rejection::Malformed),
        }
    }
    let epsilon = coset.shift_value()?;
    Ok(Instance { coset, p, alpha, epsilon, scale_applied })
}

/// Splits `g` as `p^α` with `p` an odd prime and `α >= 1`.
fn prime_power<T: Scalar>(g: &T) -> Result<(T, u32), Rejection> {
    let gu = scalar::to_u128(g)?;
    let factors = arith::factorize(gu);
    match factors.as_slice() {
        [(2, _)] => Err(Rejection::EvenPrime { generator: g.to_string() }),
        [(p, alpha)] => Ok((scalar::from_u128(*p)?, *alpha)),
        _ => Err(Rejection::CompositeNormIdeal { generator: g.to_string() }),
    }
}

/// Gram matrix of `M = Z ν + N` in the basis `{ν', e_s, e_t}`, where `ν'` is
/// the multiple of `ν` (mod `N`) whose `r`-th coordinate is `1/p^α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperlatticeM<T: Scalar> {
    pub gram: GramMatrix3<T>,
    pub index: T,
    pub discriminant: T,
    /// The first basis vector `ν'`, in the coordinates of `N`.
    pub generator: ShiftVector<T>,
    /// Coordinates of `N` kept as the other two basis vectors.
    pub kept: [usize; 2],
}

pub fn superlattice<T: Scalar>(instance: &Instance<T>) -> Result<SuperlatticeM<T>, LatticeError> {
    let coset = instance.coset();
    let d = coset.shift.denominator().clone();
    let n = coset.shift.numerators();
    let p = instance.p();
    let r = (0..3)
        .find(|&i| !n[i].is_multiple_of(p))
        .ok_or_else(|| LatticeError::InternalBasisFailure("no unit coordinate".into()))?;
    let d128 = scalar::to_u128(&d)?;
    let inv = arith::mod_inverse(scalar::to_i128(&n[r])?, d128)
        .ok_or_else(|| LatticeError::InternalBasisFailure("coordinate not invertible".into()))?;
    let inv: T = scalar::from_u128(inv)?;
    let mut nums: [T; 3] = std::array::from_fn(|_| T::zero());
    for (slot, ni) in nums.iter_mut().zip(n.iter()) {
        *slot = scalar::mul(&inv, ni)?.mod_floor(&d);
    }
    let generator = ShiftVector::new(nums, d.clone())?;
    if !generator.numerators()[r].is_one() || generator.denominator() != &d {
        return Err(LatticeError::InternalBasisFailure("normalized generator".into()));
    }
    let kept: [usize; 2] = match r {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    let gen_coset = Coset::new(coset.gram.clone(), generator.clone());
    let mut m: [[T; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| T::zero()));
    m[0][0] = gen_coset.shift_value()?;
    for (slot, &s) in kept.iter().enumerate() {
        let e: [T; 3] = std::array::from_fn(|k| if k == s { T::one() } else { T::zero() });
        let b = gen_coset
            .shift_pairing(&e)?
            .ok_or_else(|| LatticeError::InternalBasisFailure("non-integral pairing".into()))?;
        m[0][slot + 1] = b.clone();
        m[slot + 1][0] = b;
        for (slot2, &t) in kept.iter().enumerate() {
            m[slot + 1][slot2 + 1] = coset.gram.entry(s, t).clone();
        }
    }
    let gram = GramMatrix3::new(m)?;
    let dm = gram.discriminant();
    if scalar::mul(&dm, &scalar::mul(&d, &d)?)? != coset.gram.discriminant() {
        return Err(LatticeError::InternalBasisFailure("dM * [M:N]^2 != dN".into()));
    }
    Ok(SuperlatticeM { gram, index: d, discriminant: dm, generator, kept })
}

/// Replaces `ν` by `ν + x0`; the norm ideal and the coset are unchanged.
pub fn shift_translate<T: Scalar>(instance: &Instance<T>, x0: &[T; 3]) -> Result<Instance<T>, LatticeError> {
    let shift = instance.shift().translate(x0)?;
    let coset = Coset::new(instance.gram().clone(), shift);
    let epsilon = coset.shift_value()?;
    Ok(Instance { coset, epsilon, ..instance.clone() })
}

/// The index shift `m` with `p^α m = Q(x0) + 2B(ν, x0)`, so that
/// `Q(ν + x0) + p^α (n - m) = Q(ν) + p^α n`.
pub fn translation_index<T: Scalar>(instance: &Instance<T>, x0: &[T; 3]) -> Result<T, LatticeError> {
    let moved = instance.coset().value_at(x0)?;
    let diff = scalar::sub(&moved, instance.epsilon())?;
    let (m, r) = diff.div_rem(&instance.modulus());
    if !r.is_zero() {
        return Err(LatticeError::NonIntegralTranslation);
    }
    Ok(m)
}

/// Rewrites `(N, ν)` in the basis given by the columns of the unimodular
/// matrix `u`.
pub fn change_basis<T: Scalar>(coset: &Coset<T>, u: &[[T; 3]; 3]) -> Result<Coset<T>, LatticeError> {
    Ok(Coset::new(coset.gram.change_basis(u)?, coset.shift.transform(u)?))
}
