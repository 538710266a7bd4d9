//! Exact `q`-adic value sets of a ternary form.
//!
//! A primitive vector `x` known modulo `q^s` with `v = ord_q(Gx) < s` and
//! `s > v + ord_q(2)` pins down `Q` modulo `q^{s+v+ord_q 2}`, and every
//! residue in that class is attained by a lift of `x` (Hensel). Since
//! `ord_q(Gx) <= ord_q(det G)` for primitive `x`, a depth-first refinement
//! of residue vectors terminates and describes the primitive values as a
//! finite union of residue classes.

use std::collections::{BTreeMap, BTreeSet};

use super::{det, LocalError, Sym3};
use crate::arith;

const NODE_LIMIT: u64 = 200_000_000;

/// Values taken by a form on primitive vectors of `Z_q^3`, as residue
/// classes `r mod q^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveValues {
    q: u128,
    cap: Option<u32>,
    classes: BTreeMap<u32, BTreeSet<u128>>,
    nodes: u64,
}

impl PrimitiveValues {
    pub fn prime(&self) -> u128 {
        self.q
    }

    /// Residue classes grouped by the exponent of their modulus.
    pub fn classes(&self) -> &BTreeMap<u32, BTreeSet<u128>> {
        &self.classes
    }

    pub fn nodes_visited(&self) -> u64 {
        self.nodes
    }

    /// Largest modulus exponent among the classes.
    pub fn depth(&self) -> u32 {
        self.classes.keys().next_back().copied().unwrap_or(0)
    }

    /// Whether `c` is a value of a primitive vector. With a cap `K`, `c` is
    /// read modulo `q^K`.
    pub fn contains_primitive(&self, c: i128) -> bool {
        self.classes.iter().any(|(&m, set)| {
            let modulus = self.q.pow(m);
            set.contains(&arith::reduce(c, modulus))
        })
    }

    /// Whether `c` is represented at all, i.e. `c / q^{2k}` is primitively
    /// represented for some `k`. Only meaningful without a cap.
    pub fn represents(&self, c: i128) -> bool {
        if c == 0 {
            return true;
        }
        let q = self.q as i128;
        let mut c = c;
        loop {
            if self.contains_primitive(c) {
                return true;
            }
            if c % (q * q) != 0 {
                return false;
            }
            c /= q * q;
        }
    }
}

/// Primitive value classes of `g` over `Z_q`, or modulo `q^K` when `cap` is
/// given.
pub fn primitive_values(g: &Sym3, q: u128, cap: Option<u32>) -> Result<PrimitiveValues, LocalError> {
    if !arith::is_prime(q) {
        return Err(LocalError::NotPrime(q));
    }
    let d = det(g).ok_or(LocalError::SearchTooLarge { q })?;
    if d == 0 && cap.is_none() {
        return Err(LocalError::DegenerateForm);
    }
    let o2 = u32::from(q == 2);
    let max_level = match cap {
        Some(k) => k.max(1),
        None => arith::valuation(d, q).expect("nonzero") + o2 + 1,
    };
    // Values are needed modulo q^{2 * max_level} at most.
    let top = 2 * max_level;
    let big = arith::checked_pow(q, top).filter(|&m| m < (1u128 << 62)).ok_or(LocalError::SearchTooLarge { q })?;
    let gm: [[u128; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| arith::reduce(g[i][j], big)));
    let pw: Vec<u128> = (0..=top).map(|e| q.pow(e)).collect();

    let mut classes: BTreeMap<u32, BTreeSet<u128>> = BTreeMap::new();
    let mut nodes = 0u64;
    let mut stack: Vec<([u128; 3], u32)> = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                if a != 0 || b != 0 || c != 0 {
                    stack.push(([a, b, c], 1));
                }
            }
        }
    }
    while let Some((x, s)) = stack.pop() {
        nodes += 1;
        if nodes > NODE_LIMIT {
            return Err(LocalError::SearchTooLarge { q });
        }
        let ms = pw[s as usize];
        let gx: [u128; 3] = std::array::from_fn(|i| (0..3).map(|j| gm[i][j] % ms * x[j] % ms).sum::<u128>() % ms);
        let v = gx.iter().filter(|&&y| y != 0).map(|&y| arith::valuation(y as i128, q).unwrap()).min().unwrap_or(s);
        let settled = v < s && s > v + o2;
        let at_cap = cap.is_some_and(|k| s >= k);
        if settled || at_cap {
            let mut m = if settled { s + v + o2 } else { s };
            if let Some(k) = cap {
                m = m.min(k);
            }
            let mm = pw[m as usize];
            let qx = quad_mod(&gm, &x, mm);
            classes.entry(m).or_default().insert(qx);
            continue;
        }
        if s >= max_level {
            return Err(LocalError::DegenerateForm);
        }
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    stack.push(([x[0] + ms * a, x[1] + ms * b, x[2] + ms * c], s + 1));
                }
            }
        }
    }
    Ok(PrimitiveValues { q, cap, classes, nodes })
}

fn quad_mod(g: &[[u128; 3]; 3], x: &[u128; 3], m: u128) -> u128 {
    let xr = x.map(|v| v % m);
    let mut acc = 0u128;
    for i in 0..3 {
        for j in 0..3 {
            acc = (acc + g[i][j] % m * xr[i] % m * xr[j]) % m;
        }
    }
    acc
}

/// Residues modulo `q^K` attained by `g` on `(Z/q^K)^3`, as a membership
/// table of length `q^K`.
pub fn value_set_mod(g: &Sym3, q: u128, k: u32) -> Result<Vec<bool>, LocalError> {
    let size = arith::checked_pow(q, k).filter(|&n| n <= 1 << 32).ok_or(LocalError::SearchTooLarge { q })? as usize;
    let mut out = vec![false; size];
    out[0] = true;
    if k == 0 {
        return Ok(out);
    }
    let prim = primitive_values(g, q, Some(k))?;
    for (&m, set) in prim.classes() {
        let step = q.pow(m) as usize;
        for &r in set {
            let mut v = r as usize;
            while v < size {
                out[v] = true;
                v += step;
            }
        }
    }
    if k > 2 {
        let inner = value_set_mod(g, q, k - 2)?;
        let q2 = (q * q) as usize;
        for (w, &hit) in inner.iter().enumerate() {
            if hit {
                out[w * q2] = true;
            }
        }
    }
    Ok(out)
}

/// Same table as [`value_set_mod`], by running over every vector of
/// `(Z/q^K)^3`.
pub fn value_set_exhaustive(g: &Sym3, q: u128, k: u32) -> Result<Vec<bool>, LocalError> {
    let m = arith::checked_pow(q, k).filter(|&n| n <= 4096).ok_or(LocalError::SearchTooLarge { q })?;
    let gm: [[u128; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| arith::reduce(g[i][j], m)));
    let mut out = vec![false; m as usize];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                out[quad_mod(&gm, &[a, b, c], m) as usize] = true;
            }
        }
    }
    Ok(out)
}
