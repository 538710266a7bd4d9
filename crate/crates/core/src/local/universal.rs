//! Deciding whether a form represents every `q`-adic integer.

use serde::{Deserialize, Serialize};

use super::{det, is_anisotropic, jordan_split, primitive_values, rational_diagonal, LocalError, Place, SquareClass, Sym3};
use crate::arith;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalMethod {
    /// Odd `q` not dividing the determinant.
    Unimodular,
    /// Exact primitive value classes by residue refinement.
    PrimitiveSearch,
    /// Odd `q`: recursion on the Jordan splitting.
    JordanRecursion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalReport {
    pub prime: u128,
    pub universal: bool,
    /// First square class, in reporting order, that is not represented.
    pub missed_class: Option<SquareClass>,
    /// Largest modulus exponent the decision relied on.
    pub precision_used: u32,
    pub method: LocalMethod,
}

/// Decides `Z_q`-universality, choosing the method by size.
pub fn local_universal(g: &Sym3, q: u128) -> Result<LocalReport, LocalError> {
    let d = det(g).ok_or(LocalError::SearchTooLarge { q })?;
    if d == 0 {
        return Err(LocalError::DegenerateForm);
    }
    let ord = arith::valuation(d, q).expect("nonzero");
    let method = if q != 2 && ord == 0 {
        LocalMethod::Unimodular
    } else if q == 2 || (q <= 7 && ord <= 2) {
        LocalMethod::PrimitiveSearch
    } else {
        LocalMethod::JordanRecursion
    };
    local_universal_with(g, q, method)
}

/// Decides `Z_q`-universality with a fixed method.
pub fn local_universal_with(g: &Sym3, q: u128, method: LocalMethod) -> Result<LocalReport, LocalError> {
    if !arith::is_prime(q) {
        return Err(LocalError::NotPrime(q));
    }
    let d = det(g).ok_or(LocalError::SearchTooLarge { q })?;
    if d == 0 {
        return Err(LocalError::DegenerateForm);
    }
    let reps = SquareClass::representatives(q);
    let (missed, precision_used) = match method {
        LocalMethod::Unimodular => {
            if q == 2 || d % q as i128 == 0 {
                return local_universal_with(g, q, LocalMethod::JordanRecursion);
            }
            (None, 1)
        }
        LocalMethod::PrimitiveSearch => {
            let pv = primitive_values(g, q, None)?;
            (reps.iter().copied().find(|r| !pv.represents(r.representative as i128)), pv.depth())
        }
        LocalMethod::JordanRecursion => {
            if q == 2 {
                return local_universal_with(g, q, LocalMethod::PrimitiveSearch);
            }
            let precision = arith::valuation(d, q).expect("nonzero") + 3;
            let js = jordan_split(g, q, precision)?;
            let comps: Vec<(u32, i8)> =
                js.diagonal().into_iter().map(|(e, u)| (e, arith::legendre(u as i128, q))).collect();
            let missed = reps.iter().copied().find(|r| {
                let ord = u32::from(r.representative % q == 0);
                let unit = (r.representative / if ord == 1 { q } else { 1 }) as i128;
                !represents_odd(&comps, ord, arith::legendre(unit, q), q)
            });
            (missed, precision)
        }
    };
    Ok(LocalReport { prime: q, universal: missed.is_none(), missed_class: missed, precision_used, method })
}

/// Whether `<q^k_i u_i>` represents a number of valuation `ord` whose unit
/// part has Legendre symbol `class`.
fn represents_odd(comps: &[(u32, i8)], ord: u32, class: i8, q: u128) -> bool {
    let l0: Vec<i8> = comps.iter().filter(|(k, _)| *k == 0).map(|(_, s)| *s).collect();
    if ord == 0 {
        return match l0.len() {
            0 => false,
            1 => l0[0] == class,
            _ => true,
        };
    }
    let minus_one = arith::legendre(-1, q);
    let isotropic = l0.len() >= 3 || (l0.len() == 2 && minus_one * l0[0] * l0[1] == 1);
    if isotropic {
        return true;
    }
    // Anisotropic mod q: the unimodular part of any solution is divisible by q.
    let next: Vec<(u32, i8)> = comps.iter().map(|&(k, s)| (if k == 0 { 1 } else { k - 1 }, s)).collect();
    represents_odd(&next, ord - 1, class, q)
}

/// The 2-adic classification of universal ternary forms: universal iff
/// isotropic with `ord_2(det) < 2`, and then every element is represented
/// primitively except `4 Z_2^×` when `ord_2(det) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoAdicPrediction {
    pub ord2: u32,
    pub isotropic: bool,
    pub universal: bool,
    pub misses_four_units: bool,
}

pub fn two_adic_prediction(g: &Sym3) -> Result<TwoAdicPrediction, LocalError> {
    let d = det(g).ok_or(LocalError::SearchTooLarge { q: 2 })?;
    if d == 0 {
        return Err(LocalError::DegenerateForm);
    }
    let ord2 = arith::valuation(d, 2).expect("nonzero");
    let isotropic = !is_anisotropic(&rational_diagonal(g)?, Place::Finite(2))?;
    let universal = isotropic && ord2 < 2;
    Ok(TwoAdicPrediction { ord2, isotropic, universal, misses_four_units: universal && ord2 == 1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveRepresentation {
    Primitive,
    ImprimitiveOnly,
}

/// How a `Z_2`-universal form represents `c`, read off the classification.
pub fn primitive_rep_z2(g: &Sym3, c: i128) -> Result<PrimitiveRepresentation, LocalError> {
    let pred = two_adic_prediction(g)?;
    if !pred.universal {
        return Err(LocalError::NotUniversalAt2);
    }
    if c == 0 {
        return Err(LocalError::DegenerateForm);
    }
    if pred.misses_four_units && arith::valuation(c, 2).expect("nonzero") == 2 {
        Ok(PrimitiveRepresentation::ImprimitiveOnly)
    } else {
        Ok(PrimitiveRepresentation::Primitive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::primitive_values;

    fn diag(a: i128, b: i128, c: i128) -> Sym3 {
        [[a, 0, 0], [0, b, 0], [0, 0, c]]
    }

    #[test]
    fn three_squares_shape_misses_seven() {
        let r = local_universal(&diag(25, 1, 1), 2).unwrap();
        assert!(!r.universal);
        assert_eq!(r.missed_class.unwrap().representative, 7);
    }

    #[test]
    fn hyperbolic_form_is_universal_at_two() {
        let g = diag(1, -1, 1);
        assert!(local_universal(&g, 2).unwrap().universal);
        let pv = primitive_values(&g, 2, None).unwrap();
        assert!((1..100).all(|c| pv.contains_primitive(c)));
    }

    #[test]
    fn x2_y2_7z2_misses_class_21() {
        for method in [LocalMethod::PrimitiveSearch, LocalMethod::JordanRecursion] {
            let r = local_universal_with(&diag(1, 1, 7), 7, method).unwrap();
            assert_eq!(r.missed_class.map(|c| c.representative), Some(21));
        }
    }

    #[test]
    fn two_adic_examples() {
        let g = diag(1, -1, -2);
        assert_eq!(primitive_rep_z2(&g, 4).unwrap(), PrimitiveRepresentation::ImprimitiveOnly);
        assert_eq!(primitive_rep_z2(&g, 3).unwrap(), PrimitiveRepresentation::Primitive);
        assert_eq!(primitive_rep_z2(&diag(1, -1, -1), 4).unwrap(), PrimitiveRepresentation::Primitive);
        assert!(matches!(primitive_rep_z2(&diag(1, 1, 1), 1), Err(LocalError::NotUniversalAt2)));
    }

    #[test]
    fn methods_agree_on_small_diagonals() {
        for q in [3u128, 5, 7] {
            for a in 0..3 {
                for b in a..3 {
                    for u in [1, 2, 3] {
                        let g = diag(1, q.pow(a) as i128 * u, q.pow(b) as i128 * (u + 1));
                        let x = local_universal_with(&g, q, LocalMethod::PrimitiveSearch).unwrap();
                        let y = local_universal_with(&g, q, LocalMethod::JordanRecursion).unwrap();
                        assert_eq!(x.missed_class, y.missed_class, "{g:?} at {q}");
                    }
                }
            }
        }
    }
}
