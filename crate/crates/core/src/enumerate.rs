//! Exact enumeration of `{ y ∈ ν + N : Q(y) <= B }`.
//!
//! Points are handled as integer vectors `z = n + d x` (with `ν = n / d`),
//! so `Q(ν + x) = Q(z) / d^2`. Coordinates are bounded from the outermost
//! inwards: the outer coordinate by `z_o^2 det <= R adj_oo`, the middle one
//! by the Schur complement of the inner coordinate, and the inner one by
//! solving its quadratic exactly. No floating point is involved.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith;
use crate::lattice::Coset;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("bound too large for exact 128-bit enumeration")]
    Overflow,
    #[error("coset value {0} is not an integer")]
    NonIntegral(String),
    #[error("bound {0} exceeds the dense table limit")]
    BoundTooLarge(u64),
}

/// Largest bound accepted for dense membership tables.
pub const MAX_DENSE_BOUND: u64 = 100_000_000;

/// Precomputed data for enumerating one coset.
#[derive(Clone, Debug)]
pub struct CosetEnumerator {
    g: [[i128; 3]; 3],
    n: [i128; 3],
    d: i128,
    det: i128,
    /// Coordinate order: outer, middle, inner.
    order: [usize; 3],
}

/// Result of a bounded enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueTable {
    pub bound: u64,
    /// Bit `v` is set iff `v` is a value of the coset.
    pub words: Vec<u64>,
    pub visited: u64,
    /// False when the work budget ran out before the search finished.
    pub complete: bool,
}

impl ValueTable {
    pub fn contains(&self, v: u64) -> bool {
        v <= self.bound && self.words[(v / 64) as usize] >> (v % 64) & 1 == 1
    }

    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        (0..=self.bound).filter(|&v| self.contains(v))
    }
}

/// Integer interval containing every real root-interval point of
/// `a t^2 + 2 b t + c <= 0` (`a > 0`), or `None` when it is empty.
fn quadratic_range(a: i128, b: i128, c: i128) -> Option<(i128, i128)> {
    let disc = b * b - a * c;
    if disc < 0 {
        return None;
    }
    let s = arith::isqrt(disc as u128) as i128;
    Some((Integer::div_floor(&(-b - s - 1), &a), Integer::div_ceil(&(-b + s + 1), &a)))
}

/// First integer `>= lo` that is `≡ r (mod d)`.
fn first_congruent(lo: i128, r: i128, d: i128) -> i128 {
    lo + (r - lo).mod_floor(&d)
}

impl CosetEnumerator {
    pub fn new(coset: &Coset<i128>) -> Self {
        let g = *coset.gram.entries();
        let mut order = [0usize, 1, 2];
        order.sort_by_key(|&i| (std::cmp::Reverse(g[i][i]), i));
        Self {
            g,
            n: *coset.shift.numerators(),
            d: *coset.shift.denominator(),
            det: coset.gram.discriminant(),
            order,
        }
    }

    /// Outer coordinates to visit. Also checks once that every intermediate
    /// of the slice arithmetic fits comfortably in `i128`.
    fn outer_range(&self, r: i128) -> Result<Vec<i128>, EnumerationError> {
        let [o, m, i] = self.order;
        let g = &self.g;
        let big = |v: i128| num_bigint::BigInt::from(v);
        let coord_bound = |k: usize| {
            let (a, b) = ((k + 1) % 3, (k + 2) % 3);
            let adj = big(g[a][a]) * big(g[b][b]) - big(g[a][b]) * big(g[a][b]);
            (big(r) * adj / big(self.det)).sqrt() + big(self.d)
        };
        let zb = (0..3).map(coord_bound).max().expect("three coordinates");
        let mg = big(g.iter().flatten().map(|v| v.abs()).max().expect("entries").max(1));
        let worst = big(64) * mg.pow(4u32) * (&zb * &zb + big(r));
        if worst.bits() > 124 {
            return Err(EnumerationError::Overflow);
        }
        let adj = g[m][m] * g[i][i] - g[m][i] * g[m][i];
        let zmax = arith::isqrt((r * adj / self.det) as u128) as i128;
        let start = first_congruent(-zmax, self.n[o], self.d);
        Ok((0..).map(|k| start + k * self.d).take_while(|&z| z <= zmax).collect())
    }

    /// Calls `visit(z_inner, F)` for every inner candidate of the slice at
    /// fixed outer coordinate `zo`, where `F = Q(z) <= r`.
    fn slice<Fv>(&self, zo: i128, r: i128, mut visit: Fv) -> Result<u64, EnumerationError>
    where
        Fv: FnMut([i128; 3], i128) -> bool,
    {
        let [o, m, i] = self.order;
        let g = &self.g;
        let d = self.d;
        let a_in = g[i][i];
        let a = a_in * g[m][m] - g[i][m] * g[i][m];
        let b = zo * (a_in * g[m][o] - g[i][m] * g[i][o]);
        let c = zo * zo * (a_in * g[o][o] - g[i][o] * g[i][o]) - a_in * r;
        let Some((lo_m, hi_m)) = quadratic_range(a, b, c) else {
            return Ok(0);
        };
        let mut visited = 0u64;
        let mut zm = first_congruent(lo_m, self.n[m], d);
        let c_oo = zo * zo * g[o][o];
        while zm <= hi_m {
            let lin = g[i][m] * zm + g[i][o] * zo;
            let cm = g[m][m] * zm * zm + 2 * g[m][o] * zm * zo + c_oo;
            if let Some((lo_i, hi_i)) = quadratic_range(a_in, lin, cm - r) {
                let mut zi = first_congruent(lo_i, self.n[i], d);
                while zi <= hi_i {
                    let f = a_in * zi * zi + 2 * lin * zi + cm;
                    visited += 1;
                    if f <= r {
                        let mut z = [0i128; 3];
                        z[o] = zo;
                        z[m] = zm;
                        z[i] = zi;
                        if !visit(z, f) {
                            return Ok(visited);
                        }
                    }
                    zi += d;
                }
            }
            zm += d;
        }
        Ok(visited)
    }

    /// All values `<= bound` of `Q` on the coset. With a budget, the search
    /// stops early once that many candidates have been visited.
    pub fn value_table(&self, bound: u64, budget: Option<u64>) -> Result<ValueTable, EnumerationError> {
        if bound > MAX_DENSE_BOUND {
            return Err(EnumerationError::BoundTooLarge(bound));
        }
        let d2 = self.d * self.d;
        let r = (bound as i128) * d2;
        let words: Vec<AtomicU64> = (0..bound / 64 + 1).map(|_| AtomicU64::new(0)).collect();
        let visited = AtomicU64::new(0);
        let exhausted = AtomicBool::new(false);
        let bad = std::sync::Mutex::new(None::<EnumerationError>);
        self.outer_range(r)?.par_iter().for_each(|&zo| {
            if exhausted.load(Ordering::Relaxed) {
                return;
            }
            let out = self.slice(zo, r, |_, f| {
                if f % d2 != 0 {
                    *bad.lock().unwrap() = Some(EnumerationError::NonIntegral(format!("{f}/{d2}")));
                    return false;
                }
                let v = (f / d2) as u64;
                words[(v / 64) as usize].fetch_or(1 << (v % 64), Ordering::Relaxed);
                true
            });
            match out {
                Ok(n) => {
                    let total = visited.fetch_add(n, Ordering::Relaxed) + n;
                    if budget.is_some_and(|b| total > b) {
                        exhausted.store(true, Ordering::Relaxed);
                    }
                }
                Err(e) => *bad.lock().unwrap() = Some(e),
            }
        });
        if let Some(e) = bad.into_inner().unwrap() {
            return Err(e);
        }
        Ok(ValueTable {
            bound,
            words: words.into_iter().map(AtomicU64::into_inner).collect(),
            visited: visited.into_inner(),
            complete: !exhausted.into_inner(),
        })
    }

    /// The lexicographically least `x` with `Q(ν + x) = t`.
    pub fn find(&self, t: u64) -> Result<Option<[i128; 3]>, EnumerationError> {
        let d = self.d;
        let r = (t as i128).checked_mul(d * d).ok_or(EnumerationError::Overflow)?;
        let [o, m, i] = self.order;
        let g = &self.g;
        let found: Result<Vec<Option<[i128; 3]>>, EnumerationError> = self
            .outer_range(r)?
            .par_iter()
            .map(|&zo| {
                let mut best: Option<[i128; 3]> = None;
                let mut zms: Vec<i128> = Vec::new();
                self.slice_middle(zo, r, &mut zms);
                for zm in zms {
                    let lin = g[i][m] * zm + g[i][o] * zo;
                    let cm = g[m][m] * zm * zm + 2 * g[m][o] * zm * zo + g[o][o] * zo * zo - r;
                    let disc = lin * lin - g[i][i] * cm;
                    if disc < 0 {
                        continue;
                    }
                    let s = arith::isqrt(disc as u128) as i128;
                    if s * s != disc {
                        continue;
                    }
                    for num in [-lin - s, -lin + s] {
                        if num % g[i][i] != 0 {
                            continue;
                        }
                        let zi = num / g[i][i];
                        if (zi - self.n[i]).mod_floor(&d) != 0 {
                            continue;
                        }
                        let mut z = [0i128; 3];
                        z[o] = zo;
                        z[m] = zm;
                        z[i] = zi;
                        let x: [i128; 3] = std::array::from_fn(|k| (z[k] - self.n[k]) / d);
                        if best.is_none_or(|b| x < b) {
                            best = Some(x);
                        }
                    }
                }
                Ok(best)
            })
            .collect();
        Ok(found?.into_iter().flatten().min())
    }

    fn slice_middle(&self, zo: i128, r: i128, out: &mut Vec<i128>) {
        let [o, m, i] = self.order;
        let g = &self.g;
        let a_in = g[i][i];
        let a = a_in * g[m][m] - g[i][m] * g[i][m];
        let b = zo * (a_in * g[m][o] - g[i][m] * g[i][o]);
        let c = zo * zo * (a_in * g[o][o] - g[i][o] * g[i][o]) - a_in * r;
        if let Some((lo, hi)) = quadratic_range(a, b, c) {
            let mut zm = first_congruent(lo, self.n[m], self.d);
            while zm <= hi {
                out.push(zm);
                zm += self.d;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{GramMatrix3, ShiftVector};

    fn coset(g: [i128; 6], n: [i128; 3], d: i128) -> Coset<i128> {
        Coset::new(GramMatrix3::from_upper(g).unwrap(), ShiftVector::new(n, d).unwrap())
    }

    fn brute(c: &Coset<i128>, bound: u64, box_: i128) -> Vec<u64> {
        let mut out = std::collections::BTreeSet::new();
        for a in -box_..=box_ {
            for b in -box_..=box_ {
                for e in -box_..=box_ {
                    let v = c.value_at(&[a, b, e]).unwrap();
                    if v >= 0 && v as u64 <= bound {
                        out.insert(v as u64);
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    #[test]
    fn matches_box_search() {
        let cases = [
            coset([25, 0, 0, 1, 0, 1], [1, 0, 0], 5),
            coset([49, 0, 0, 7, 0, 14], [1, 0, 0], 7),
            coset([10, 3, -2, 7, 1, 9], [0, 0, 0], 1),
            coset([98, 7, 0, 21, 0, 49], [1, 0, 0], 7),
            coset([4, 2, 0, 4, 0, 4], [1, 1, 0], 2),
        ];
        for c in &cases {
            let e = CosetEnumerator::new(c);
            let t = e.value_table(400, None).unwrap();
            assert!(t.complete);
            assert_eq!(t.values().collect::<Vec<_>>(), brute(c, 400, 25), "{c:?}");
        }
    }

    #[test]
    fn witnesses() {
        let c = coset([2450, 0, 0, 791, 0, 49], [1, 0, 0], 7);
        let e = CosetEnumerator::new(&c);
        assert_eq!(e.find(50).unwrap(), Some([0, 0, 0]));
        assert_eq!(e.find(226).unwrap(), None);
        let c = coset([25, 0, 0, 1, 0, 1], [1, 0, 0], 5);
        let e = CosetEnumerator::new(&c);
        let x = e.find(6).unwrap().unwrap();
        assert_eq!(c.value_at(&x).unwrap(), 6);
        assert_eq!(x, [0, -2, -1]);
    }

    #[test]
    fn budget_marks_partial() {
        let c = coset([1, 0, 0, 1, 0, 1], [0, 0, 0], 1);
        let t = CosetEnumerator::new(&c).value_table(100_000, Some(10)).unwrap();
        assert!(!t.complete);
    }
}
