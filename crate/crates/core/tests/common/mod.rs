#![allow(dead_code)]

use quadpoly::lattice::{validate_instance, GramMatrix3, Instance, ShiftVector};
use quadpoly::local::Sym3;
use quadpoly::{Gram, Shift};
use rand::Rng;

/// `⟨p² e, p b, p² c⟩` with the shift `e_k / p`.
pub fn shaped(p: i128, e: i128, b: i128, c: i128, k: usize) -> Option<(Gram, Shift)> {
    let g = GramMatrix3::diagonal(p * p * e, p * b, p * p * c).ok()?;
    let mut n = [0; 3];
    n[k] = 1;
    Some((g, ShiftVector::new(n, p).ok()?))
}

/// Every instance of the shaped family with diagonal entries at most `limit`
/// that passes the hypothesis gate.
pub fn sweep(p: i128, emax: i128, bmax: i128, cmax: i128, limit: i128) -> Vec<Instance<i128>> {
    let mut out = Vec::new();
    for e in 1..=emax {
        for b in 1..=bmax {
            for c in 1..=cmax {
                if p * p * e.max(c) > limit || p * b > limit {
                    continue;
                }
                for k in 0..3 {
                    let Some((g, s)) = shaped(p, e, b, c, k) else { continue };
                    if let Ok(inst) = validate_instance(&g, &s) {
                        out.push(inst);
                    }
                }
            }
        }
    }
    out
}

/// A valid instance from the shaped family for a random odd prime.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance<i128> {
    loop {
        let p = [3i128, 5, 7, 11][rng.gen_range(0..4)];
        let (e, b, c) = (rng.gen_range(1..=6), rng.gen_range(1..=12), rng.gen_range(1..=6));
        let Some((g, s)) = shaped(p, e, b, c, rng.gen_range(0..3)) else { continue };
        if let Ok(inst) = validate_instance(&g, &s) {
            return inst;
        }
    }
}

/// Product of a few random elementary matrices.
pub fn random_unimodular<R: Rng>(rng: &mut R, steps: usize) -> [[i128; 3]; 3] {
    let mut u = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    for _ in 0..steps {
        let i = rng.gen_range(0..3);
        let j = (i + rng.gen_range(1..3)) % 3;
        let f = rng.gen_range(-2..=2);
        for row in u.iter_mut() {
            row[j] += f * row[i];
        }
    }
    u
}

/// Positive definite Gram matrix with entries of absolute value at most `max`.
pub fn random_positive_definite<R: Rng>(rng: &mut R, max: i128) -> Sym3 {
    loop {
        let d: [i128; 3] = std::array::from_fn(|_| rng.gen_range(1..=max));
        let mut off = || rng.gen_range(-max..=max);
        let (a, b, c) = (off(), off(), off());
        let g = [[d[0], a, b], [a, d[1], c], [b, c, d[2]]];
        if GramMatrix3::new(g).is_ok() {
            return g;
        }
    }
}
