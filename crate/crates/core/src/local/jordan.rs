//! Jordan splittings over `Z_q`, computed by exact rational pivoting.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{add_basis_vector, det, eliminate, rational_residue, rational_valuation, LocalError, Sym3};
use crate::arith;

/// Type of a 2×2 improper block `2^k [[2a, b], [b, 2c]]` with `b` odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    /// Hyperbolic plane `A(0, 0)`.
    Hyperbolic,
    /// Anisotropic plane `A(2, 2)`.
    A22,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImproperBlock {
    pub kind: BlockKind,
    /// `(a, b, c)` of the unscaled block, reduced mod `2^K`.
    pub entries: [u128; 3],
}

/// The `q^exponent`-modular part of a splitting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JordanComponent {
    pub exponent: u32,
    /// Units `u` of the one-dimensional pieces `<q^exponent u>`, reduced mod
    /// `q^K`.
    pub units: Vec<u128>,
    pub blocks: Vec<ImproperBlock>,
}

impl JordanComponent {
    pub fn rank(&self) -> usize {
        self.units.len() + 2 * self.blocks.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JordanSplitting {
    pub prime: u128,
    pub precision: u32,
    /// Components in increasing order of exponent.
    pub components: Vec<JordanComponent>,
    /// Columns are the new basis in the old coordinates, reduced mod `q^K`.
    pub transform: [[u128; 3]; 3],
}

impl JordanSplitting {
    pub fn modulus(&self) -> u128 {
        self.prime.pow(self.precision)
    }

    /// The split form as a matrix mod `q^K`, in the order of `transform`.
    pub fn form(&self) -> Sym3 {
        let m = self.modulus();
        let mut out = [[0i128; 3]; 3];
        let mut i = 0;
        for comp in &self.components {
            let scale = self.prime.pow(comp.exponent) % m;
            for &u in &comp.units {
                out[i][i] = arith::mul_mod(scale, u, m) as i128;
                i += 1;
            }
            for block in &comp.blocks {
                let [a, b, c] = block.entries.map(|v| arith::mul_mod(scale, v, m) as i128);
                out[i][i] = a;
                out[i][i + 1] = b;
                out[i + 1][i] = b;
                out[i + 1][i + 1] = c;
                i += 2;
            }
        }
        out
    }

    /// `(exponent, unit)` for every one-dimensional piece.
    pub fn diagonal(&self) -> Vec<(u32, u128)> {
        self.components.iter().flat_map(|c| c.units.iter().map(move |&u| (c.exponent, u))).collect()
    }

    pub fn exponents(&self) -> Vec<u32> {
        self.components.iter().flat_map(|c| std::iter::repeat_n(c.exponent, c.rank())).collect()
    }

    /// Checks `T^T G T ≡ D (mod q^K)`.
    pub fn verify(&self, g: &Sym3) -> bool {
        let m = self.modulus();
        let d = self.form();
        let t = &self.transform;
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0u128;
                for a in 0..3 {
                    for b in 0..3 {
                        let term = arith::mul_mod(arith::mul_mod(t[a][i], arith::reduce(g[a][b], m), m), t[b][j], m);
                        acc = (acc + term) % m;
                    }
                }
                if acc != arith::reduce(d[i][j], m) {
                    return false;
                }
            }
        }
        true
    }
}

enum Piece {
    Unit(u32, u128),
    Block(u32, ImproperBlock),
}

/// Jordan splitting of a nondegenerate form at `q`, with units reported
/// modulo `q^K`.
pub fn jordan_split(g: &Sym3, q: u128, precision: u32) -> Result<JordanSplitting, LocalError> {
    if !arith::is_prime(q) {
        return Err(LocalError::NotPrime(q));
    }
    let d = det(g).ok_or(LocalError::SearchTooLarge { q })?;
    if d == 0 {
        return Err(LocalError::DegenerateForm);
    }
    let modulus = arith::checked_pow(q, precision).ok_or(LocalError::PrecisionTooLow { precision })?;
    let big = |v: i128| BigRational::from_integer(BigInt::from(v));
    let mut a: Vec<Vec<BigRational>> = g.iter().map(|row| row.iter().map(|&v| big(v)).collect()).collect();
    let mut basis: Vec<Vec<BigRational>> =
        (0..3).map(|i| (0..3).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()).collect();
    let mut order: Vec<usize> = Vec::new();
    let mut pieces: Vec<Piece> = Vec::new();
    let mut live: Vec<usize> = vec![0, 1, 2];
    let val = |r: &BigRational| rational_valuation(r, q).unwrap_or(i64::MAX);

    while !live.is_empty() {
        let min_diag = live.iter().map(|&i| (val(&a[i][i]), i)).min().expect("nonempty");
        let min_off = live
            .iter()
            .flat_map(|&i| live.iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| i < j)
            .map(|(i, j)| (val(&a[i][j]), i, j))
            .min();
        let use_block = q == 2 && min_off.is_some_and(|(v, _, _)| v < min_diag.0);
        if !use_block {
            let pivot = match min_off {
                Some((v, i, j)) if v < min_diag.0 => {
                    add_basis_vector(&mut a, i, j);
                    add_rows(&mut basis, i, j);
                    i
                }
                _ => min_diag.1,
            };
            let e = val(&a[pivot][pivot]);
            if e == i64::MAX {
                return Err(LocalError::DegenerateForm);
            }
            live.retain(|&k| k != pivot);
            for &k in &live {
                let f = &a[pivot][k] / &a[pivot][pivot];
                eliminate(&mut a, pivot, k, &f);
                sub_rows(&mut basis, k, pivot, &f);
            }
            let unit = &a[pivot][pivot] / pow_rational(q, e);
            let u = rational_residue(&unit, modulus).ok_or(LocalError::PrecisionTooLow { precision })?;
            check_exponent(e, precision)?;
            pieces.push(Piece::Unit(e as u32, u));
            order.push(pivot);
        } else {
            let (e, i, j) = min_off.expect("block pivot");
            live.retain(|&k| k != i && k != j);
            let det2 = &a[i][i] * &a[j][j] - &a[i][j] * &a[i][j];
            for &k in &live {
                // Solve P (f_i, f_j) = (a_ik, a_jk) for the 2×2 pivot block P.
                let fi = (&a[j][j] * &a[i][k] - &a[i][j] * &a[j][k]) / &det2;
                let fj = (&a[i][i] * &a[j][k] - &a[i][j] * &a[i][k]) / &det2;
                eliminate_pair(&mut a, (i, j), k, (&fi, &fj));
                sub_rows(&mut basis, k, i, &fi);
                sub_rows(&mut basis, k, j, &fj);
            }
            let scale = pow_rational(2, e);
            let entries = [&a[i][i] / &scale, &a[i][j] / &scale, &a[j][j] / &scale];
            let res: Vec<u128> = entries
                .iter()
                .map(|r| rational_residue(r, modulus).ok_or(LocalError::PrecisionTooLow { precision }))
                .collect::<Result<_, _>>()?;
            let r8: Vec<u128> = entries.iter().map(|r| rational_residue(r, 8).expect("2-integral")).collect();
            let kind = if (r8[0] * r8[2]).is_multiple_of(8) { BlockKind::Hyperbolic } else { BlockKind::A22 };
            check_exponent(e, precision)?;
            pieces.push(Piece::Block(e as u32, ImproperBlock { kind, entries: [res[0], res[1], res[2]] }));
            order.push(i);
            order.push(j);
        }
    }

    // Sort by exponent with units ahead of blocks, matching `form`.
    let mut cursor = 0;
    let mut keyed: Vec<(u32, bool, usize, Vec<usize>, Piece)> = Vec::new();
    for (seq, piece) in pieces.into_iter().enumerate() {
        let (e, width) = match &piece {
            Piece::Unit(e, _) => (*e, 1),
            Piece::Block(e, _) => (*e, 2),
        };
        keyed.push((e, width == 2, seq, order[cursor..cursor + width].to_vec(), piece));
        cursor += width;
    }
    keyed.sort_by_key(|(e, block, seq, _, _)| (*e, *block, *seq));
    let mut components: Vec<JordanComponent> = Vec::new();
    let mut final_cols: Vec<usize> = Vec::new();
    for (e, _, _, cols, piece) in keyed {
        if components.last().is_none_or(|c| c.exponent != e) {
            components.push(JordanComponent { exponent: e, units: Vec::new(), blocks: Vec::new() });
        }
        let comp = components.last_mut().expect("pushed");
        match piece {
            Piece::Unit(_, u) => comp.units.push(u),
            Piece::Block(_, b) => comp.blocks.push(b),
        }
        final_cols.extend(cols);
    }
    let mut transform = [[0u128; 3]; 3];
    for (new_col, &old) in final_cols.iter().enumerate() {
        for row in 0..3 {
            transform[row][new_col] =
                rational_residue(&basis[old][row], modulus).ok_or(LocalError::PrecisionTooLow { precision })?;
        }
    }
    Ok(JordanSplitting { prime: q, precision, components, transform })
}

fn check_exponent(e: i64, precision: u32) -> Result<(), LocalError> {
    if e < 0 || e >= precision as i64 {
        return Err(LocalError::PrecisionTooLow { precision });
    }
    Ok(())
}

fn pow_rational(q: u128, e: i64) -> BigRational {
    let b = BigRational::from_integer(BigInt::from(q));
    if e >= 0 {
        num_traits::pow(b, e as usize)
    } else {
        num_traits::pow(b, (-e) as usize).recip()
    }
}

/// Basis rows: `basis[i]` holds the coordinates of the `i`-th working vector.
fn add_rows(basis: &mut [Vec<BigRational>], i: usize, j: usize) {
    let add: Vec<BigRational> = basis[j].clone();
    for (x, y) in basis[i].iter_mut().zip(add) {
        *x += y;
    }
}

fn sub_rows(basis: &mut [Vec<BigRational>], k: usize, pivot: usize, f: &BigRational) {
    let sub: Vec<BigRational> = basis[pivot].iter().map(|v| v * f).collect();
    for (x, y) in basis[k].iter_mut().zip(sub) {
        *x -= y;
    }
}

fn eliminate_pair(a: &mut [Vec<BigRational>], (i, j): (usize, usize), k: usize, (fi, fj): (&BigRational, &BigRational)) {
    let n = a.len();
    for m in 0..n {
        let v = &a[k][m] - fi * &a[i][m] - fj * &a[j][m];
        a[k][m] = v;
    }
    for m in 0..n {
        let v = &a[m][k] - fi * &a[m][i] - fj * &a[m][j];
        a[m][k] = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_at_seven() {
        let g = [[49, 0, 0], [0, 7, 0], [0, 0, 14]];
        let js = jordan_split(&g, 7, 7).unwrap();
        assert_eq!(js.exponents(), vec![1, 1, 2]);
        assert_eq!(js.diagonal(), vec![(1, 1), (1, 2), (2, 1)]);
        assert!(js.verify(&g));
    }

    #[test]
    fn identity_is_unimodular() {
        let g = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        for q in [2, 3, 5] {
            let js = jordan_split(&g, q, 3).unwrap();
            assert_eq!(js.components.len(), 1);
            assert_eq!(js.components[0].exponent, 0);
        }
    }

    #[test]
    fn binary_block_at_seven() {
        let g = [[2, 1, 0], [1, 2, 0], [0, 0, 7]];
        let js = jordan_split(&g, 7, 3).unwrap();
        assert_eq!(js.exponents(), vec![0, 0, 1]);
        let units: Vec<u128> = js.components[0].units.clone();
        let m = 343;
        let prod = arith::mul_mod(units[0], units[1], m);
        assert_eq!(arith::legendre(prod as i128, 7), arith::legendre(3, 7));
        assert!(js.verify(&g));
    }

    #[test]
    fn improper_blocks_at_two() {
        let g = [[2, 1, 0], [1, 2, 0], [0, 0, 1]];
        let js = jordan_split(&g, 2, 5).unwrap();
        assert_eq!(js.components[0].blocks.len(), 1);
        assert_eq!(js.components[0].blocks[0].kind, BlockKind::A22);
        assert!(js.verify(&g));
        let h = [[0, 2, 0], [2, 0, 0], [0, 0, 3]];
        let js = jordan_split(&h, 2, 5).unwrap();
        assert_eq!(js.exponents(), vec![0, 1, 1]);
        assert_eq!(js.components[1].blocks[0].kind, BlockKind::Hyperbolic);
        assert!(js.verify(&h));
    }

    #[test]
    fn off_diagonal_pivot_at_odd_prime() {
        let g = [[3, 1, 0], [1, 3, 0], [0, 0, 5]];
        let js = jordan_split(&g, 3, 4).unwrap();
        assert!(js.verify(&g));
        assert_eq!(js.exponents(), vec![0, 0, 0]);
        let g = [[9, 2, 0], [2, 9, 0], [0, 0, 1]];
        let js = jordan_split(&g, 3, 4).unwrap();
        assert!(js.verify(&g));
    }

    #[test]
    fn low_precision_is_reported() {
        let g = [[1, 0, 0], [0, 1, 0], [0, 0, 27]];
        assert!(matches!(jordan_split(&g, 3, 2), Err(LocalError::PrecisionTooLow { .. })));
    }
}
