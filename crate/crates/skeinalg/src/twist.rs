//! Recursive tangles and twist families.
//!
//! A recursive tangle is a diagonal element `R = Σ_s α_s G_{s,s}`; its
//! powers pair against any element by the closed sum
//! `<R^n, T> = Σ_u α_u^n β_{u,u} Δ_{ω(u)}`. Products of JM elements are
//! recursive with unit-monomial coefficients, which turns consecutive
//! twisting into polynomial families evaluable at any twist count without
//! diagram arithmetic.

use std::collections::BTreeMap;

use num::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::cell::{all_sequences, AdmissibleSequence, CellElement};
use crate::error::{Result, SkeinError};
use crate::jm::jm_eigenvalue;
use crate::ring::{delta_closed, LaurentPoly, Rational, RationalFn};

/// Diagonal element `R = Σ_s α_s G_{s,s}` of `TL_(k,i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursiveTangle {
    k: usize,
    i: usize,
    alpha: BTreeMap<AdmissibleSequence, RationalFn>,
}

#[derive(Serialize, Deserialize)]
struct RecursiveTangleRepr {
    k: usize,
    i: usize,
    alpha: Vec<(Vec<usize>, RationalFn)>,
}

impl Serialize for RecursiveTangle {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let repr = RecursiveTangleRepr {
            k: self.k,
            i: self.i,
            alpha: self
                .alpha
                .iter()
                .map(|(s, a)| (s.entries().to_vec(), a.clone()))
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for RecursiveTangle {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = RecursiveTangleRepr::deserialize(deserializer)?;
        let mut alpha = BTreeMap::new();
        for (entries, a) in repr.alpha {
            let s = AdmissibleSequence::new(repr.i, entries).map_err(D::Error::custom)?;
            alpha.insert(s, a);
        }
        RecursiveTangle::new(repr.k, repr.i, alpha).map_err(D::Error::custom)
    }
}

impl RecursiveTangle {
    pub fn new(k: usize, i: usize, alpha: BTreeMap<AdmissibleSequence, RationalFn>) -> Result<Self> {
        for s in alpha.keys() {
            if s.len() != k || s.color() != i {
                return Err(SkeinError::ShapeMismatch {
                    expected_k: k,
                    expected_i: i,
                    found_k: s.len(),
                    found_i: s.color(),
                });
            }
        }
        let alpha = alpha.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        Ok(RecursiveTangle { k, i, alpha })
    }

    /// The identity tangle (`α_s = 1` for every sequence).
    pub fn identity(k: usize, i: usize) -> Self {
        let alpha = all_sequences(k, i)
            .into_iter()
            .map(|s| (s, RationalFn::one()))
            .collect();
        RecursiveTangle { k, i, alpha }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.k, self.i)
    }

    pub fn alpha(&self, s: &AdmissibleSequence) -> RationalFn {
        self.alpha.get(s).cloned().unwrap_or_else(RationalFn::zero)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&AdmissibleSequence, &RationalFn)> {
        self.alpha.iter()
    }

    /// True when every `α_s` is `± A^e`.
    pub fn is_monomial(&self) -> bool {
        self.alpha.values().all(|a| {
            a.monomial_parts()
                .map_or(false, |(_, c)| c.abs().is_one())
        })
    }

    /// The element `Σ α_s G_{s,s}` in cell coordinates.
    pub fn to_cell(&self) -> Result<CellElement> {
        let mut out = CellElement::zero(self.k, self.i);
        for (s, a) in &self.alpha {
            out.set_coeff(s.clone(), s.clone(), a.clone())?;
        }
        Ok(out)
    }

    /// `R^n` as a cell element, by raising the diagonal entries.
    pub fn power_cell(&self, n: u32) -> Result<CellElement> {
        if n == 0 {
            return Ok(CellElement::identity(self.k, self.i));
        }
        let mut out = CellElement::zero(self.k, self.i);
        for (s, a) in &self.alpha {
            out.set_coeff(s.clone(), s.clone(), a.pow(n))?;
        }
        Ok(out)
    }
}

/// Closed form for `<R^n, T>`: `Σ_u α_u^n β_{u,u} Δ_{ω(u)}`. For `n = 0`
/// this is the pairing of the identity against `T`, summing over every
/// diagonal entry of `T` regardless of the support of `R`.
pub fn pair_power(r: &RecursiveTangle, t: &CellElement, n: u32) -> Result<RationalFn> {
    let (k, i) = r.shape();
    if t.shape() != (k, i) {
        return Err(SkeinError::ShapeMismatch {
            expected_k: k,
            expected_i: i,
            found_k: t.shape().0,
            found_i: t.shape().1,
        });
    }
    let mut acc = RationalFn::zero();
    for ((s, u), beta) in t.terms() {
        if s != u {
            continue;
        }
        let weight_factor = RationalFn::from_poly(delta_closed(s.weight()));
        let term = if n == 0 {
            beta * &weight_factor
        } else {
            let a = r.alpha(s);
            if a.is_zero() {
                continue;
            }
            &a.pow(n) * &(beta * &weight_factor)
        };
        acc = &acc + &term;
    }
    Ok(acc)
}

/// The full twist on `k` colored strands as the JM product `L_2 ... L_k`:
/// `α_s = Π_{j=2}^k c_s(j)`, a unit monomial for every `s`.
pub fn full_twist(k: usize, i: usize) -> Result<RecursiveTangle> {
    if k < 2 {
        return Err(SkeinError::InvalidInput(
            "full twist needs at least 2 strands".into(),
        ));
    }
    jm_product(&vec![1; k - 1], k, i)
}

/// `L_2^{p_2} L_3^{p_3} ... L_k^{p_k}` as a recursive tangle; `powers`
/// lists `p_2..p_k`.
pub fn jm_product(powers: &[u32], k: usize, i: usize) -> Result<RecursiveTangle> {
    if powers.len() != k.saturating_sub(1) {
        return Err(SkeinError::InvalidInput(format!(
            "expected {} exponents, got {}",
            k.saturating_sub(1),
            powers.len()
        )));
    }
    let mut alpha = BTreeMap::new();
    for s in all_sequences(k, i) {
        let mut a = RationalFn::one();
        for (idx, &p) in powers.iter().enumerate() {
            let j = idx + 2;
            a = &a * &jm_eigenvalue(&s, j)?.pow(p);
        }
        alpha.insert(s, a);
    }
    RecursiveTangle::new(k, i, alpha)
}

/// Writhe bookkeeping for a twisted closure: `w(L_m) = base + m * per_twist`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WritheModel {
    pub base: i64,
    /// `k(k-1)` for a full twist on `k` coherently oriented strands.
    pub per_twist: i64,
}

impl WritheModel {
    pub fn full_twist_default(k: usize, base: i64) -> Self {
        WritheModel {
            base,
            per_twist: (k * (k - 1)) as i64,
        }
    }

    pub fn at(&self, m: u32) -> i64 {
        self.base + self.per_twist * m as i64
    }
}

/// One exponent group of a twist family: the recursive sum collected by
/// the common value `α = sign * A^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistTerm {
    pub sign: i8,
    pub exponent: i64,
    pub q: RationalFn,
}

/// The family `p_m = Σ_u (ε_u A^{e_u})^m q_u(A)` together with its writhe
/// model. Evaluation at any `m` reproduces `<R^m, T>` exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistFamily {
    pub terms: Vec<TwistTerm>,
    pub writhe: WritheModel,
    pub color: usize,
}

/// Groups the closed-form pairing of a monomial recursive tangle by twist
/// exponent. Errors when some `α_s` is not `± A^e`.
pub fn twist_family(
    r: &RecursiveTangle,
    t: &CellElement,
    writhe: WritheModel,
) -> Result<TwistFamily> {
    let (k, i) = r.shape();
    if t.shape() != (k, i) {
        return Err(SkeinError::ShapeMismatch {
            expected_k: k,
            expected_i: i,
            found_k: t.shape().0,
            found_i: t.shape().1,
        });
    }
    let mut groups: BTreeMap<(i8, i64), RationalFn> = BTreeMap::new();
    for ((s, u), beta) in t.terms() {
        if s != u {
            continue;
        }
        let a = r.alpha(s);
        if a.is_zero() {
            continue;
        }
        let (exp, coeff) = a
            .monomial_parts()
            .ok_or_else(|| SkeinError::NonMonomialAlpha(format!("{s:?}")))?;
        if !coeff.abs().is_one() {
            return Err(SkeinError::NonMonomialAlpha(format!("{s:?}")));
        }
        let sign: i8 = if coeff.is_negative() { -1 } else { 1 };
        let contrib = beta * &RationalFn::from_poly(delta_closed(s.weight()));
        let entry = groups.entry((sign, exp)).or_insert_with(RationalFn::zero);
        *entry = &*entry + &contrib;
    }
    let terms = groups
        .into_iter()
        .filter(|(_, q)| !q.is_zero())
        .map(|((sign, exponent), q)| TwistTerm { sign, exponent, q })
        .collect();
    Ok(TwistFamily {
        terms,
        writhe,
        color: i,
    })
}

impl TwistFamily {
    /// `p_m` as an exact rational function.
    pub fn eval_exact(&self, m: u32) -> RationalFn {
        let mut acc = RationalFn::zero();
        for term in &self.terms {
            let sign = if term.sign < 0 && m % 2 == 1 {
                -Rational::one()
            } else {
                Rational::one()
            };
            let mono = LaurentPoly::monomial(term.exponent * m as i64, sign);
            acc = &acc + &(&RationalFn::from_poly(mono) * &term.q);
        }
        acc
    }

    /// Common denominator `D` and numerator groups `(sign, e_u, q̃_u)`
    /// with `p_m = (Σ ε_u^m A^{m e_u} q̃_u) / D`; `D` does not depend on
    /// the twist count.
    pub fn cleared(&self) -> (LaurentPoly, Vec<(i8, i64, LaurentPoly)>) {
        let mut den = LaurentPoly::one();
        for term in &self.terms {
            let g = LaurentPoly::gcd(&den, term.q.den());
            den = &den * &term.q.den().div_exact(&g).unwrap_or_else(LaurentPoly::one);
        }
        let numerators = self
            .terms
            .iter()
            .map(|term| {
                let cof = den.div_exact(term.q.den()).expect("den is a common multiple");
                (term.sign, term.exponent, term.q.num() * &cof)
            })
            .collect();
        (den, numerators)
    }

    /// `p_m` as a Laurent polynomial; errors when the denominator does
    /// not clear (which signals a pairing that is not an honest link).
    pub fn eval_poly(&self, m: u32) -> Result<LaurentPoly> {
        let v = self.eval_exact(m);
        match v.as_poly() {
            Some(p) => Ok(p.clone()),
            None => Err(SkeinError::ResidualDenominator(format!(
                "denominator {} at m = {m}",
                v.den()
            ))),
        }
    }

    /// Number of exponent groups (independent of the twist count).
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// How the closure pairs a braid-word tangle when computing a colored
/// Jones value.
#[derive(Clone, Debug)]
pub struct JonesOptions {
    pub writhe: WritheModel,
    /// Divide by `Δ_i` so the unknot evaluates to 1; default is the raw
    /// bracket convention where the unknot gives `Δ_i`.
    pub normalize_unknot: bool,
}

/// The `i`-colored Jones polynomial of the closure of `T` with `m` full
/// twists inserted: `A^{-(i^2+2i) w(L_m)}` times the twist-family bracket.
pub fn colored_jones_twist(
    t: &CellElement,
    m: u32,
    opts: &JonesOptions,
) -> Result<LaurentPoly> {
    let (k, i) = t.shape();
    let bracket = if k < 2 {
        // Degenerate single-strand guard: no twisting possible.
        t.bracket_closure()?
    } else {
        let ft = full_twist(k, i)?;
        pair_power(&ft, t, m)?
    };
    let framing_exp = -((i * i + 2 * i) as i64) * opts.writhe.at(m);
    let framed = &bracket * &RationalFn::from_poly(LaurentPoly::monomial(framing_exp, Rational::one()));
    let framed = if opts.normalize_unknot {
        framed.div(&RationalFn::from_poly(delta_closed(i)))?
    } else {
        framed
    };
    match framed.as_poly() {
        Some(p) => Ok(p.clone()),
        None => Err(SkeinError::ResidualDenominator(format!(
            "denominator {} in Jones value",
            framed.den()
        ))),
    }
}
