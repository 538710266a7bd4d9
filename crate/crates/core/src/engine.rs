//! The decision tree for almost universality and the family of exceptions
//! attached to a negative verdict.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith;
use crate::enumerate::EnumerationError;
use crate::lattice::{validate_instance, Coset, GramMatrix3, Instance, LatticeError, Rejection, ShiftVector};
use crate::local::{local_universal, LocalError, LocalReport, Sym3};
use crate::oracle::{self, OracleError, Stabilization};
use crate::spinor::{spinor_exception_obstruction, Obstruction, SpinorError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Spinor(#[from] SpinorError),
    #[error("eps * mu = {0} is not a square mod p^alpha")]
    InternalParity(u128),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Decision {
    AlmostUniversal,
    NotAlmostUniversal,
    HypothesisRejected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    LocalFailure { q: u128 },
    One,
    TwoA,
    TwoB,
    TwoC,
    TwoDHolds,
    TwoDFails,
    ShortCircuit,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::LocalFailure { q } => write!(f, "local_failure({q})"),
            Branch::One => write!(f, "1"),
            Branch::TwoA => write!(f, "2a"),
            Branch::TwoB => write!(f, "2b"),
            Branch::TwoC => write!(f, "2c"),
            Branch::TwoDHolds => write!(f, "2d-holds"),
            Branch::TwoDFails => write!(f, "2d-fails"),
            Branch::ShortCircuit => write!(f, "short_circuit"),
        }
    }
}

impl Serialize for Branch {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub condition: &'static str,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExceptionFamily {
    pub t: u128,
    pub mu: u128,
    pub rho: u128,
    pub modulus: u128,
    pub p: u128,
    pub epsilon: i128,
    pub split_condition: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub q: u128,
    pub value: u128,
    /// Index `n` with `ε + p^α n = value`.
    pub n: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub decision: Decision,
    pub branch: Branch,
    pub trace: Vec<TraceEntry>,
    pub locals: Vec<LocalReport>,
    pub witness: Option<[i128; 3]>,
    pub exceptional_family: Option<ExceptionFamily>,
}

/// Local universality at 2 and at every odd prime dividing `dN`, except `p`.
pub fn local_scan(gram: &Sym3, p: Option<u128>) -> Result<Vec<LocalReport>, EngineError> {
    let d = crate::local::det_of(gram).ok_or(EnumerationError::Overflow)?;
    let mut primes: Vec<u128> = vec![2];
    primes.extend(arith::factorize(d.unsigned_abs()).into_iter().map(|(q, _)| q).filter(|&q| q != 2));
    primes.retain(|&q| Some(q) != p);
    primes.into_iter().map(|q| Ok(local_universal(gram, q)?)).collect()
}

/// Whether `t` is a value of `Q` on `ν + N`, with the least witness.
pub fn represents_coset(instance: &Instance<i128>, t: u64) -> Result<Option<[i128; 3]>, EngineError> {
    match oracle::witness(instance.coset(), t) {
        Ok(w) => Ok(w),
        Err(OracleError::Enumeration(e)) => Err(e.into()),
        Err(OracleError::BudgetExceeded { .. }) => unreachable!("witness search has no budget"),
    }
}

/// `(dN, rad(dN), rad(dN)')`.
pub fn discriminant_data(instance: &Instance<i128>) -> (u128, u128, u128) {
    let d = instance.discriminant() as u128;
    let p = *instance.p() as u128;
    (d, arith::squarefree_kernel(d), arith::squarefree_kernel_without(d, p))
}

/// Runs the decision tree on a validated instance.
pub fn decide(instance: &Instance<i128>) -> Result<Verdict, EngineError> {
    let p = *instance.p() as u128;
    let eps = *instance.epsilon();
    let (d, rad, t) = discriminant_data(instance);
    let locals = local_scan(instance.gram().entries(), Some(p))?;
    let mut trace = Vec::new();
    let verdict = |decision, branch, trace, locals, witness, family| Verdict {
        decision,
        branch,
        trace,
        locals,
        witness,
        exceptional_family: family,
    };

    let failed = locals.iter().find(|r| !r.universal).map(|r| r.prime);
    trace.push(TraceEntry {
        condition: "local",
        holds: failed.is_none(),
        detail: match failed {
            Some(q) => format!("not universal at q = {q}"),
            None => format!("universal at q in {:?}", locals.iter().map(|r| r.prime).collect::<Vec<_>>()),
        },
    });
    if let Some(q) = failed {
        return Ok(verdict(Decision::NotAlmostUniversal, Branch::LocalFailure { q }, trace, locals, None, None));
    }

    let c1 = p % 8 != 7;
    trace.push(TraceEntry { condition: "1", holds: c1, detail: format!("p = {p}, p mod 8 = {}", p % 8) });
    if c1 {
        return Ok(verdict(Decision::AlmostUniversal, Branch::One, trace, locals, None, None));
    }

    let ord = arith::valuation(d as i128, p).expect("positive discriminant");
    trace.push(TraceEntry { condition: "2a", holds: ord.is_multiple_of(2), detail: format!("ord_p(dN) = {ord}") });
    if ord.is_multiple_of(2) {
        return Ok(verdict(Decision::AlmostUniversal, Branch::TwoA, trace, locals, None, None));
    }

    let inert = arith::factorize(rad)
        .into_iter()
        .map(|(q, _)| q)
        .find(|&q| q != 2 && q != p && arith::legendre(-(p as i128), q) == -1);
    trace.push(TraceEntry {
        condition: "2b",
        holds: inert.is_some(),
        detail: match inert {
            Some(q) => format!("q = {q} divides rad(dN) = {rad} with (-p/q) = -1"),
            None => format!("no odd q != p dividing rad(dN) = {rad} has (-p/q) = -1"),
        },
    });
    if inert.is_some() {
        return Ok(verdict(Decision::AlmostUniversal, Branch::TwoB, trace, locals, None, None));
    }

    let leg = arith::legendre(eps, p);
    trace.push(TraceEntry { condition: "2c", holds: leg == -1, detail: format!("(epsilon/p) = ({eps}/{p}) = {leg}") });
    if leg == -1 {
        return Ok(verdict(Decision::AlmostUniversal, Branch::TwoC, trace, locals, None, None));
    }

    if spinor_exception_obstruction(instance, t)? != Obstruction::Possible {
        return Err(EngineError::Inconsistent("spinor obstruction disagrees with conditions (a)-(c)".into()));
    }
    let t64 = u64::try_from(t).map_err(|_| EnumerationError::Overflow)?;
    let witness = represents_coset(instance, t64)?;
    trace.push(TraceEntry {
        condition: "2d",
        holds: witness.is_some(),
        detail: match witness {
            Some(x) => format!("rad(dN)' = {t} = Q(nu + {x:?})"),
            None => format!("rad(dN)' = {t} is not a value of nu + N"),
        },
    });
    match witness {
        Some(_) => Ok(verdict(Decision::AlmostUniversal, Branch::TwoDHolds, trace, locals, witness, None)),
        None => {
            let family = exception_family(instance)?;
            Ok(verdict(Decision::NotAlmostUniversal, Branch::TwoDFails, trace, locals, None, Some(family)))
        }
    }
}

/// `t = rad(dN)'`, `μ = t^{-1} mod p^α`, and `ρ` in `[1, p^α / 2]` with
/// `ρ^2 ≡ ε μ (mod p^α)`.
pub fn exception_family(instance: &Instance<i128>) -> Result<ExceptionFamily, EngineError> {
    let p = *instance.p() as u128;
    let modulus = instance.modulus() as u128;
    let (_, _, t) = discriminant_data(instance);
    let eps = *instance.epsilon();
    let mu = arith::mod_inverse(t as i128, modulus).ok_or(SpinorError::NotCoprime(t))?;
    let target = arith::mul_mod(arith::reduce(eps, modulus), mu, modulus);
    let rho = arith::sqrt_mod_prime_power(target as i128, p, instance.alpha()).ok_or(EngineError::InternalParity(target))?;
    if arith::mul_mod(rho, rho, modulus) != target {
        return Err(EngineError::InternalParity(target));
    }
    Ok(ExceptionFamily { t, mu, rho, modulus, p, epsilon: eps, split_condition: format!("(-{p}/q) = 1") })
}

/// The first `k` primes `q ≡ ±ρ (mod p^α)` that split in `Q(sqrt(-p))`,
/// with their values `q^2 t`.
pub fn predict_exceptions(family: &ExceptionFamily, k: usize) -> Vec<Prediction> {
    let m = family.modulus;
    let mut out = Vec::with_capacity(k);
    let mut q = 3u128;
    while out.len() < k {
        let r = q % m;
        if (r == family.rho % m || r == (m - family.rho % m) % m)
            && q != family.p
            && arith::is_prime(q)
            && arith::legendre(-(family.p as i128), q) == 1
        {
            let value = q * q * family.t;
            let eps = arith::reduce(family.epsilon, m);
            assert_eq!(value % m, eps, "q^2 t must lie in the progression");
            out.push(Prediction { q, value, n: (value - family.epsilon as u128) / m });
        }
        q += 2;
    }
    out
}

/// Full pipeline on raw input, including service mode for inputs that fail
/// the hypothesis gate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub decision: Decision,
    pub branch: Option<Branch>,
    pub rejection: Option<String>,
    /// For rejected inputs: a local failure at a prime not dividing the
    /// conductor or the norm ideal, which rules out almost universality.
    pub service_assessment: Option<Decision>,
    pub p: Option<u128>,
    pub alpha: Option<u32>,
    pub epsilon: Option<i128>,
    pub dn: i128,
    pub rad: u128,
    pub rad_prime: Option<u128>,
    pub trace: Vec<TraceEntry>,
    pub locals: Vec<LocalReport>,
    pub witness: Option<[i128; 3]>,
    pub family: Option<ExceptionFamily>,
    pub predictions: Vec<Prediction>,
    /// Progression `start + step n` whose members are the targets.
    pub progression: Option<(i128, i128)>,
    #[serde(skip)]
    pub coset: Coset<i128>,
    #[serde(skip)]
    pub instance: Option<Instance<i128>>,
}

/// Number of predicted exceptions attached to a negative verdict.
pub const DEFAULT_PREDICTIONS: usize = 8;

pub fn analyze(gram: &GramMatrix3<i128>, shift: &ShiftVector<i128>) -> Result<Analysis, EngineError> {
    let coset = Coset::new(gram.clone(), shift.clone());
    let dn = gram.discriminant();
    match validate_instance(gram, shift) {
        Ok(instance) => {
            let verdict = decide(&instance)?;
            let (_, rad, t) = discriminant_data(&instance);
            let predictions = match &verdict.exceptional_family {
                Some(f) => predict_exceptions(f, DEFAULT_PREDICTIONS),
                None => Vec::new(),
            };
            Ok(Analysis {
                decision: verdict.decision,
                branch: Some(verdict.branch),
                rejection: None,
                service_assessment: None,
                p: Some(*instance.p() as u128),
                alpha: Some(instance.alpha()),
                epsilon: Some(*instance.epsilon()),
                dn: instance.discriminant(),
                rad,
                rad_prime: Some(t),
                trace: verdict.trace,
                locals: verdict.locals,
                witness: verdict.witness,
                family: verdict.exceptional_family,
                predictions,
                progression: Some((*instance.epsilon(), instance.modulus())),
                coset: instance.coset().clone(),
                instance: Some(instance),
            })
        }
        Err(Rejection::Lattice(e)) => Err(e.into()),
        Err(rejection) => {
            let g = coset.norm_ideal().ok();
            let p = g.and_then(|g| match arith::factorize(g as u128).as_slice() {
                [(q, _)] if *q != 2 => Some(*q),
                _ => None,
            });
            let locals = local_scan(gram.entries(), p)?;
            let short = matches!(rejection, Rejection::ShortCircuitNotAlmostUniversal { .. });
            let conductor = *shift.denominator() as u128;
            let guard = conductor * g.map(|g| g as u128).unwrap_or(1);
            let service = locals.iter().any(|r| !r.universal && !guard.is_multiple_of(r.prime));
            let (decision, branch) = if short {
                (Decision::NotAlmostUniversal, Some(Branch::ShortCircuit))
            } else {
                (Decision::HypothesisRejected, None)
            };
            let start = coset.shift_value().ok();
            Ok(Analysis {
                decision,
                branch,
                rejection: Some(rejection.to_string()),
                service_assessment: service.then_some(Decision::NotAlmostUniversal),
                p,
                alpha: p.and_then(|p| g.and_then(|g| arith::valuation(g, p).ok())),
                epsilon: start,
                dn,
                rad: arith::squarefree_kernel(dn as u128),
                rad_prime: p.map(|p| arith::squarefree_kernel_without(dn as u128, p)),
                trace: Vec::new(),
                locals,
                witness: None,
                family: None,
                predictions: Vec::new(),
                progression: start.zip(g),
                coset,
                instance: None,
            })
        }
    }
}

/// Outcome of checking a verdict against the brute-force oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "agreement", rename_all = "snake_case")]
pub enum Agreement {
    Consistent { detail: String },
    Inconsistent { detail: String },
    Skipped { detail: String },
}

impl Agreement {
    pub fn label(&self) -> &'static str {
        match self {
            Agreement::Consistent { .. } => "consistent",
            Agreement::Inconsistent { .. } => "inconsistent",
            Agreement::Skipped { .. } => "skipped",
        }
    }

    pub fn detail(&self) -> &str {
        match self {
            Agreement::Consistent { detail } | Agreement::Inconsistent { detail } | Agreement::Skipped { detail } => {
                detail
            }
        }
    }
}

/// Default oracle bound: `max(10^5, 2 v)` for the first predicted
/// exception `v`.
pub fn default_bound(analysis: &Analysis) -> u64 {
    let first = analysis.predictions.first().map(|p| 2 * p.value as u64).unwrap_or(0);
    first.max(100_000)
}

/// Compares a verdict with oracle evidence up to `bound`: positive verdicts
/// need no gaps in `[B/2, B]`, negative ones need late gaps or, for the
/// exception family, every predicted value up to `B` missing.
pub fn cross_check(analysis: &Analysis, bound: u64, budget: Option<u64>) -> Result<Agreement, EngineError> {
    let Some((start, step)) = analysis.progression else {
        return Ok(Agreement::Skipped { detail: "no integral progression".into() });
    };
    if start < 0 || step <= 0 || start as u64 > bound {
        return Ok(Agreement::Skipped { detail: "progression starts beyond the bound".into() });
    }
    let verdict = match (analysis.decision, analysis.service_assessment) {
        (Decision::HypothesisRejected, None) => {
            return Ok(Agreement::Skipped { detail: "hypotheses not met".into() });
        }
        (Decision::HypothesisRejected, Some(d)) => d,
        (d, _) => d,
    };
    let set = match oracle::enumerate(&analysis.coset, bound, budget) {
        Ok(s) => s,
        Err(OracleError::BudgetExceeded { visited, .. }) => {
            return Ok(Agreement::Skipped { detail: format!("budget exhausted after {visited} candidates") });
        }
        Err(OracleError::Enumeration(e)) => return Err(e.into()),
    };
    let (start, step) = (start as u64, step as u64);
    let stab = set.stabilization(start, step, 0.5);
    Ok(match verdict {
        Decision::AlmostUniversal => match stab {
            Stabilization::Stable => Agreement::Consistent { detail: format!("no gaps in [{}, {bound}]", bound / 2) },
            Stabilization::Unstable { late_gaps } => {
                Agreement::Inconsistent { detail: format!("{late_gaps} gaps in [{}, {bound}]", bound / 2) }
            }
        },
        _ if analysis.branch == Some(Branch::TwoDFails) => {
            let due: Vec<&Prediction> = analysis.predictions.iter().filter(|p| p.value as u64 <= bound).collect();
            if due.is_empty() {
                Agreement::Skipped { detail: "no predicted exception below the bound".into() }
            } else if let Some(hit) = due.iter().find(|p| set.contains(p.value as u64)) {
                Agreement::Inconsistent { detail: format!("predicted exception {} is represented", hit.value) }
            } else {
                Agreement::Consistent { detail: format!("{} predicted exceptions unrepresented", due.len()) }
            }
        }
        _ => match stab {
            Stabilization::Unstable { late_gaps } => {
                Agreement::Consistent { detail: format!("{late_gaps} gaps in [{}, {bound}]", bound / 2) }
            }
            Stabilization::Stable => Agreement::Inconsistent { detail: format!("no gaps in [{}, {bound}]", bound / 2) },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(a: i128, b: i128, c: i128, d: i128) -> Instance<i128> {
        validate_instance(&GramMatrix3::diagonal(a, b, c).unwrap(), &ShiftVector::new([1, 0, 0], d).unwrap()).unwrap()
    }

    #[test]
    fn branches() {
        assert_eq!(decide(&inst(9, 3, 3, 3)).unwrap().branch, Branch::One);
        assert_eq!(decide(&inst(49, 7, 14, 7)).unwrap().branch, Branch::TwoA);
        let v = decide(&inst(2450, 791, 49, 7)).unwrap();
        assert_eq!(v.branch, Branch::TwoDFails);
        assert_eq!(v.decision, Decision::NotAlmostUniversal);
        assert_eq!(v.trace.iter().map(|e| e.condition).collect::<Vec<_>>(), vec!["local", "1", "2a", "2b", "2c", "2d"]);
        let v = decide(&inst(49, 7, 49, 7)).unwrap();
        assert_eq!(v.branch, Branch::TwoDHolds);
        assert_eq!(v.witness, Some([0, 0, 0]));
    }

    #[test]
    fn local_scans() {
        let primes = |g: Sym3, p| local_scan(&g, p).unwrap().iter().map(|r| (r.prime, r.universal)).collect::<Vec<_>>();
        assert_eq!(primes([[25, 0, 0], [0, 1, 0], [0, 0, 1]], Some(5)), vec![(2, false)]);
        assert_eq!(primes([[1, 0, 0], [0, 1, 0], [0, 0, 1]], Some(7)), vec![(2, false)]);
        assert_eq!(primes([[2450, 0, 0], [0, 791, 0], [0, 0, 49]], Some(7)), vec![(2, true), (5, true), (113, true)]);
    }

    #[test]
    fn family_and_predictions() {
        let f = exception_family(&inst(2450, 791, 49, 7)).unwrap();
        assert_eq!((f.t, f.mu, f.rho), (226, 4, 2));
        let preds = predict_exceptions(&f, 3);
        assert_eq!(preds[0].q, 23);
        assert_eq!(preds[0].value, 119_554);
        assert!(predict_exceptions(&f, 0).is_empty());
    }

    #[test]
    fn coset_representation() {
        assert_eq!(represents_coset(&inst(2450, 791, 49, 7), 226).unwrap(), None);
        assert_eq!(represents_coset(&inst(2450, 791, 49, 7), 50).unwrap(), Some([0, 0, 0]));
    }

    #[test]
    fn service_mode() {
        let a = analyze(&GramMatrix3::diagonal(25, 1, 1).unwrap(), &ShiftVector::new([1, 0, 0], 5).unwrap()).unwrap();
        assert_eq!(a.decision, Decision::HypothesisRejected);
        assert_eq!(a.service_assessment, Some(Decision::NotAlmostUniversal));
        assert!(!a.locals[0].universal);
        assert_eq!(a.progression, Some((1, 1)));
    }
}
