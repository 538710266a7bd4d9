mod common;

use std::time::{Duration, Instant};

use quadpoly::engine::{analyze, decide, local_scan, Branch, Decision};
use quadpoly::lattice::{superlattice, validate_instance, Coset, GramMatrix3, Instance, ShiftVector};
use quadpoly::local::{
    hilbert, is_anisotropic, jordan_split, two_adic_prediction, local_universal_with, primitive_values, rational_diagonal,
    value_set_mod, LocalMethod, Place, Sym3,
};
use quadpoly::oracle::{self, Stabilization};
use quadpoly::{arith, Gram, Shift};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn run(n: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let started = Instant::now();
    let mut out = f();
    let elapsed = started.elapsed();
    if let Some(limit) = limit.filter(|&l| elapsed > l) {
        out.pass = false;
        out.detail.push_str(&format!("; over the {limit:?} limit"));
    }
    let status = if out.pass { "PASS" } else { "FAIL" };
    println!("criterion {n} {status} {name}: {} [{elapsed:.2?}]", out.detail);
    out.pass
}

fn diag(a: i128, b: i128, c: i128) -> Gram {
    GramMatrix3::diagonal(a, b, c).unwrap()
}

fn shift(n: [i128; 3], d: i128) -> Shift {
    ShiftVector::new(n, d).unwrap()
}

fn three_squares_shape() -> Outcome {
    let (g, s) = (diag(25, 1, 1), shift([1, 0, 0], 5));
    let a = analyze(&g, &s).unwrap();
    let two_fails = a.locals.iter().any(|r| r.prime == 2 && !r.universal);
    let service = a.decision == Decision::HypothesisRejected && a.service_assessment == Some(Decision::NotAlmostUniversal);
    let bound = 100_000u64;
    let set = oracle::enumerate(&Coset::new(g, s), bound, None).unwrap();
    let (start, step) = a.progression.unwrap();
    let gaps = set.gaps(start as u64, step as u64);

    // Values of (5x+1)^2 + y^2 + z^2 by a plain triple loop.
    let mut hit = vec![false; bound as usize + 1];
    let r = (bound as f64).sqrt() as i64 + 1;
    for x in -r / 5 - 1..=r / 5 + 1 {
        let a = (5 * x + 1).pow(2);
        for y in 0..=r {
            for z in 0..=r {
                let v = a + y * y + z * z;
                if v <= bound as i64 {
                    hit[v as usize] = true;
                }
            }
        }
    }
    let mismatches = (0..=bound).filter(|&v| hit[v as usize] != set.contains(v)).count();
    let gap_violations = gaps.iter().filter(|&&n| hit[(n + 1) as usize]).count();
    let pass = two_fails && service && gaps.len() >= 100 && mismatches == 0 && gap_violations == 0;
    Outcome::new(
        pass,
        format!(
            "q=2 failure {two_fails}, service verdict {service}, {} gaps up to {bound}, {mismatches} table mismatches, {gap_violations} represented gaps",
            gaps.len()
        ),
    )
}

fn hilbert_reciprocity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    let trials = 10_000;
    for _ in 0..trials {
        let mut pick = || loop {
            let v: i128 = rng.gen_range(-1000..=1000);
            if v != 0 {
                break v;
            }
        };
        let (a, b) = (pick(), pick());
        let mut primes: Vec<u128> = vec![2];
        for v in [a, b] {
            primes.extend(arith::factorize(v.unsigned_abs()).into_iter().map(|(q, _)| q));
        }
        primes.sort_unstable();
        primes.dedup();
        let mut product = hilbert(a, b, Place::Infinity).unwrap();
        for q in primes {
            product *= hilbert(a, b, Place::Finite(q)).unwrap();
        }
        if product != 1 {
            failures += 1;
        }
    }
    Outcome::new(failures == 0, format!("{failures} failures in {trials} pairs"))
}

fn two_adic_classification() -> Outcome {
    let units = [1i128, 3, 5, 7];
    let (mut total, mut disagreements) = (0, 0);
    for a in 0..=3u32 {
        for b in a..=3 {
            for c in b..=3 {
                for &u in &units {
                    for &v in &units {
                        for &w in &units {
                            let g: Sym3 = [[(1 << a) * u, 0, 0], [0, (1 << b) * v, 0], [0, 0, (1 << c) * w]];
                            total += 1;
                            let pred = two_adic_prediction(&g).unwrap();
                            let brute = local_universal_with(&g, 2, LocalMethod::PrimitiveSearch).unwrap();
                            let mut agree = pred.universal == brute.universal;
                            if agree && brute.universal {
                                let pv = primitive_values(&g, 2, None).unwrap();
                                for c in [4i128, 12, 20, 28] {
                                    if pv.contains_primitive(c) == pred.misses_four_units {
                                        agree = false;
                                    }
                                }
                                for c in [1i128, 3, 5, 7, 2, 6, 10, 14] {
                                    agree &= pv.contains_primitive(c);
                                }
                            }
                            if !agree {
                                disagreements += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Outcome::new(disagreements == 0, format!("{disagreements} disagreements in {total} diagonal forms"))
}

/// Residues of the form over all of `(Z/m)^3`.
fn residues(g: &Sym3, m: i64) -> Vec<bool> {
    let r: [[i64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| (g[i][j] as i64).rem_euclid(m)));
    let mut hit = vec![false; m as usize];
    for x in 0..m {
        let a = r[0][0] * x % m * x % m;
        for y in 0..m {
            let b = (a + r[1][1] * y % m * y + 2 * r[0][1] * x % m * y) % m;
            let (lin, sq) = ((2 * r[0][2] * x + 2 * r[1][2] * y) % m, r[2][2]);
            for z in 0..m {
                hit[((b + (lin + sq * z) % m * z) % m) as usize] = true;
            }
        }
    }
    hit
}

fn jordan_residues() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut checked, mut failures, mut exhaustive) = (0, 0, 0);
    for _ in 0..500 {
        let g = common::random_positive_definite(&mut rng, 50);
        let d = quadpoly::local::det_of(&g).unwrap();
        for q in [3u128, 5, 7] {
            let k = arith::valuation(d, q).unwrap() + 3;
            let split = jordan_split(&g, q, k).unwrap();
            let form = split.form();
            let mut ok = split.verify(&g) && value_set_mod(&g, q, k).unwrap() == value_set_mod(&form, q, k).unwrap();
            if q.pow(k) <= 125 {
                exhaustive += 1;
                let m = q.pow(k) as i64;
                ok &= residues(&g, m) == residues(&form, m);
            }
            checked += 1;
            if !ok {
                failures += 1;
            }
        }
    }
    Outcome::new(
        failures == 0,
        format!("{failures} mismatches in {checked} splittings ({exhaustive} also by full residue enumeration)"),
    )
}

fn corpus() -> Outcome {
    struct Case {
        gram: Gram,
        shift: Shift,
        branch: Branch,
    }
    let cases = [
        Case { gram: diag(9, 3, 3), shift: shift([1, 0, 0], 3), branch: Branch::One },
        Case { gram: diag(49, 7, 14), shift: shift([1, 0, 0], 7), branch: Branch::TwoA },
        Case { gram: diag(35, 49, 49), shift: shift([0, 2, 3], 7), branch: Branch::TwoB },
        Case { gram: diag(49, 7, 49), shift: shift([1, 0, 0], 7), branch: Branch::TwoDHolds },
        Case { gram: diag(2450, 791, 49), shift: shift([1, 0, 0], 7), branch: Branch::TwoDFails },
    ];
    let mut notes = Vec::new();
    let mut pass = true;
    for case in &cases {
        let label = format!("{}+{}", case.gram.upper().map(|v| v.to_string()).join(","), case.shift);
        let Ok(inst) = validate_instance(&case.gram, &case.shift) else {
            pass = false;
            notes.push(format!("{label} rejected by the gate"));
            continue;
        };
        let locals = local_scan(inst.gram().entries(), Some(*inst.p() as u128)).unwrap();
        if locals.iter().any(|r| !r.universal) {
            pass = false;
            notes.push(format!("{label} fails a local scan"));
            continue;
        }
        let verdict = decide(&inst).unwrap();
        if verdict.branch != case.branch {
            pass = false;
            notes.push(format!("{label} lands in {} instead of {}", verdict.branch, case.branch));
            continue;
        }
        let (start, step) = (*inst.epsilon() as u64, inst.modulus() as u64);
        if verdict.decision == Decision::AlmostUniversal {
            let bound = 100_000;
            let set = oracle::enumerate(inst.coset(), bound, None).unwrap();
            let stab = set.stabilization(start, step, 0.5);
            pass &= stab == Stabilization::Stable;
            notes.push(format!("{} {stab:?}", case.branch));
        } else {
            let bound = 130_000;
            let family = verdict.exceptional_family.as_ref().unwrap();
            let due: Vec<u64> = quadpoly::engine::predict_exceptions(family, 8)
                .into_iter()
                .map(|p| p.value as u64)
                .filter(|&v| v <= bound)
                .collect();
            let set = oracle::enumerate(inst.coset(), bound, None).unwrap();
            let represented = due.iter().filter(|&&v| set.contains(v)).count();
            pass &= !due.is_empty() && represented == 0;
            notes.push(format!("{} predicted {due:?}, {represented} represented", case.branch));
        }
    }
    Outcome::new(pass, notes.join("; "))
}

fn translation_covariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let bound = 20_000u64;
    let mut failures = 0;
    for _ in 0..100 {
        let inst = common::random_instance(&mut rng);
        let x0: [i128; 3] = std::array::from_fn(|_| rng.gen_range(-3..=3));
        let moved = quadpoly::lattice::shift_translate(&inst, &x0).unwrap();
        let m = quadpoly::lattice::translation_index(&inst, &x0).unwrap();
        let same_ideal = inst.coset().norm_ideal().unwrap() == moved.coset().norm_ideal().unwrap();
        let step = inst.modulus() as u64;
        let (e0, e1) = (*inst.epsilon(), *moved.epsilon());
        let g0 = oracle::enumerate(inst.coset(), bound, None).unwrap().gaps(e0 as u64, step);
        let g1 = oracle::enumerate(moved.coset(), bound, None).unwrap().gaps(e1 as u64, step);
        // Index n on the moved progression is index n + m on the original.
        let lo = m.max(0);
        let expected: Vec<i128> = g0.iter().map(|&n| n as i128).filter(|&n| n >= lo).map(|n| n - m).collect();
        let got: Vec<i128> = g1.iter().map(|&n| n as i128).filter(|&n| n >= lo - m).collect();
        if !same_ideal || expected != got {
            failures += 1;
        }
    }
    Outcome::new(failures == 0, format!("{failures} failures in 100 translated instances"))
}

struct Swept {
    instance: Instance<i128>,
    branch: Branch,
}

fn swept() -> &'static [Swept] {
    static CELL: std::sync::OnceLock<Vec<Swept>> = std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        let mut out = Vec::new();
        for (p, e, b, c) in [(3, 6, 30, 6), (7, 6, 60, 6), (23, 4, 60, 4)] {
            for instance in common::sweep(p, e, b, c, 5000) {
                let branch = decide(&instance).unwrap().branch;
                out.push(Swept { instance, branch });
            }
        }
        out
    })
}

fn branch_coverage() -> Outcome {
    let all = swept();
    let count = |b: Branch| all.iter().filter(|s| s.branch == b).count();
    let required = [Branch::One, Branch::TwoA, Branch::TwoB, Branch::TwoDHolds, Branch::TwoDFails];
    let counts: Vec<String> = required.iter().map(|&b| format!("{b}={}", count(b))).collect();
    let local = all.iter().filter(|s| matches!(s.branch, Branch::LocalFailure { .. })).count();
    let pass = required.iter().all(|&b| count(b) > 0);
    Outcome::new(
        pass,
        format!("{} instances: {}, 2c={}, local failures={local}", all.len(), counts.join(" "), count(Branch::TwoC)),
    )
}

fn superlattice_anisotropy() -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    for s in swept().iter().filter(|s| !matches!(s.branch, Branch::LocalFailure { .. })) {
        checked += 1;
        let m = superlattice(&s.instance).unwrap();
        let coeffs = rational_diagonal(m.gram.entries()).unwrap();
        if !is_anisotropic(&coeffs, Place::Finite(*s.instance.p() as u128)).unwrap() {
            violations += 1;
        }
    }
    Outcome::new(violations == 0, format!("{violations} isotropic superlattices among {checked} locally universal instances"))
}

fn main() {
    let results = [
        run(1, "three-squares shape", Some(Duration::from_secs(30)), three_squares_shape),
        run(2, "Hilbert reciprocity", Some(Duration::from_secs(10)), hilbert_reciprocity),
        run(3, "2-adic universality classification", None, two_adic_classification),
        run(4, "Jordan splitting residues", None, jordan_residues),
        run(5, "verdicts against the oracle", Some(Duration::from_secs(300)), corpus),
        run(6, "translation covariance", None, translation_covariance),
        run(7, "branch coverage", None, branch_coverage),
        run(8, "superlattice anisotropy", None, superlattice_anisotropy),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
