//! Jucys-Murphy elements of `TL_(k,i)` and their idempotent calculus.
//!
//! `L_j` acts diagonally on the graph basis with eigenvalue
//! `c_s(j) = (λ_{s_j}^{s_{j-1}, i})^2`, a pure power of `A`. The
//! eigenvalue vectors separate the sequences, which drives the
//! interpolation formula producing every `G_{t,t}` as a polynomial in the
//! `L_j`.

use serde::Serialize;

use crate::cell::{all_sequences, sequences, weights, AdmissibleSequence, CellElement};
use crate::error::{Result, SkeinError};
use crate::recoupling::lambda_closed;
use crate::ring::RationalFn;

/// `c_s(j)`: 1 for `j = 1`, otherwise the squared twist coefficient of
/// the `j`-th vertex of `s`.
pub fn jm_eigenvalue(s: &AdmissibleSequence, j: usize) -> Result<RationalFn> {
    if j < 1 || j > s.len() {
        return Err(SkeinError::IndexOutOfRange {
            index: j,
            strands: s.len(),
        });
    }
    if j == 1 {
        return Ok(RationalFn::one());
    }
    let lam = lambda_closed(s.entry(j), s.entry(j - 1), s.color())?;
    Ok(&lam * &lam)
}

/// The JM element `L_j = Σ_s c_s(j) G_{s,s}` (so `L_1` is the identity).
pub fn jm_element(j: usize, k: usize, i: usize) -> Result<CellElement> {
    if j < 1 || j > k {
        return Err(SkeinError::IndexOutOfRange { index: j, strands: k });
    }
    let mut out = CellElement::zero(k, i);
    for s in all_sequences(k, i) {
        let c = jm_eigenvalue(&s, j)?;
        out.set_coeff(s.clone(), s, c)?;
    }
    Ok(out)
}

/// The deduplicated eigenvalue set `𝒞(j)` of `L_j` on `TL_(k,i)`.
pub fn eigenvalue_set(j: usize, k: usize, i: usize) -> Result<Vec<RationalFn>> {
    let mut vals: Vec<RationalFn> = Vec::new();
    for s in all_sequences(k, i) {
        let c = jm_eigenvalue(&s, j)?;
        if !vals.contains(&c) {
            vals.push(c);
        }
    }
    Ok(vals)
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparatingReport {
    pub k: usize,
    pub i: usize,
    pub commuting: bool,
    pub self_adjoint: bool,
    pub separating: bool,
}

impl SeparatingReport {
    pub fn all_pass(&self) -> bool {
        self.commuting && self.self_adjoint && self.separating
    }

    pub fn lines(&self) -> Vec<String> {
        let fmt = |name: &str, pass: bool| {
            format!(
                "({},{}) {} {}",
                self.k,
                self.i,
                name,
                if pass { "PASS" } else { "FAIL" }
            )
        };
        vec![
            fmt("jm-commute", self.commuting),
            fmt("jm-self-adjoint", self.self_adjoint),
            fmt("jm-separating", self.separating),
        ]
    }
}

/// Exhaustively verifies that the `L_j` commute, are `*`-fixed, and that
/// the joint eigenvalue vector `s -> (c_s(1), ..., c_s(k))` is injective.
pub fn check_separating(k: usize, i: usize) -> Result<SeparatingReport> {
    let ls: Vec<CellElement> = (1..=k)
        .map(|j| jm_element(j, k, i))
        .collect::<Result<Vec<_>>>()?;
    let mut commuting = true;
    'comm: for a in 0..ls.len() {
        for b in a + 1..ls.len() {
            if ls[a].mul(&ls[b])? != ls[b].mul(&ls[a])? {
                commuting = false;
                break 'comm;
            }
        }
    }
    let self_adjoint = ls.iter().all(|l| l.star() == *l);
    let seqs = all_sequences(k, i);
    let mut separating = true;
    'sep: for (x, s) in seqs.iter().enumerate() {
        for t in seqs.iter().skip(x + 1) {
            let mut distinguished = false;
            for j in 1..=k {
                if jm_eigenvalue(s, j)? != jm_eigenvalue(t, j)? {
                    distinguished = true;
                    break;
                }
            }
            if !distinguished {
                separating = false;
                break 'sep;
            }
        }
    }
    Ok(SeparatingReport {
        k,
        i,
        commuting,
        self_adjoint,
        separating,
    })
}

/// The interpolated idempotent
/// `F_t = Π_j Π_{c in 𝒞(j), c != c_t(j)} (L_j - c)/(c_t(j) - c)`,
/// which collapses to `G_{t,t}` exactly.
pub fn ft_interpolation(t: &AdmissibleSequence) -> Result<CellElement> {
    let (k, i) = (t.len(), t.color());
    let mut acc = CellElement::identity(k, i);
    for j in 1..=k {
        let ct = jm_eigenvalue(t, j)?;
        let lj = jm_element(j, k, i)?;
        for c in eigenvalue_set(j, k, i)? {
            if c == ct {
                continue;
            }
            let denom = &ct - &c;
            if denom.is_zero() {
                return Err(SkeinError::DivisionByZero);
            }
            let shifted = lj.sub(&CellElement::identity(k, i).scale(&c))?;
            acc = acc.mul(&shifted.scale(&denom.inv()?))?;
        }
    }
    Ok(acc)
}

/// The primitive central idempotent `z_λ = Σ_{t in T(λ)} G_{t,t}`.
pub fn central_idempotent(lambda: usize, k: usize, i: usize) -> Result<CellElement> {
    if !weights(k, i).contains(&lambda) {
        return Err(SkeinError::InvalidInput(format!(
            "weight {lambda} not in Lambda_({k},{i})"
        )));
    }
    let mut out = CellElement::zero(k, i);
    for t in sequences(k, i, lambda)? {
        out.set_coeff(t.clone(), t, RationalFn::one())?;
    }
    Ok(out)
}

/// Basis `{G_{s,t} : ω(t) = ω(s)}` of the right ideal
/// `G_{s,s} TL_(k,i)`; one irreducible module per weight.
pub fn irreducible_module(s: &AdmissibleSequence) -> Result<Vec<CellElement>> {
    let (k, i) = (s.len(), s.color());
    sequences(k, i, s.weight())?
        .into_iter()
        .map(|t| CellElement::basis(s.clone(), t))
        .collect()
}

/// Matrix of the right action of `x` on the module spanned by `basis`
/// (rows = images of basis vectors in basis coordinates). The basis must
/// consist of `G_{s,t}` with a common `s`, as produced by
/// [`irreducible_module`].
pub fn module_action(x: &CellElement, basis: &[CellElement]) -> Result<Vec<Vec<RationalFn>>> {
    let labels: Vec<AdmissibleSequence> = basis
        .iter()
        .map(|g| {
            let ((_, t), _) = g.terms().next().expect("basis element");
            t.clone()
        })
        .collect();
    let mut rows = Vec::with_capacity(basis.len());
    for g in basis {
        let image = g.mul(x)?;
        let ((s, _), _) = g.terms().next().expect("basis element");
        let row: Vec<RationalFn> = labels.iter().map(|t| image.coeff(s, t)).collect();
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::CellElement;
    use crate::recoupling::lambda_oracle;
    use crate::ring::LaurentPoly;

    fn seq(i: usize, entries: &[usize]) -> AdmissibleSequence {
        AdmissibleSequence::new(i, entries.to_vec()).unwrap()
    }

    #[test]
    fn l1_is_identity() {
        for (k, i) in [(2usize, 1usize), (3, 1), (2, 2)] {
            assert_eq!(jm_element(1, k, i).unwrap(), CellElement::identity(k, i));
        }
        assert!(jm_element(3, 2, 1).is_err());
    }

    #[test]
    fn eigenvalues_are_monomials() {
        for (k, i) in [(2usize, 1usize), (3, 1), (2, 2), (3, 2), (2, 3)] {
            for s in all_sequences(k, i) {
                for j in 1..=k {
                    let c = jm_eigenvalue(&s, j).unwrap();
                    assert!(c.is_monomial(), "c_{s:?}({j}) not a monomial: {c}");
                }
            }
        }
    }

    #[test]
    fn eigenvalue_matches_oracle_square() {
        // i = 1, s = (1,2): c_s(2) = λ_2^{1,1} squared.
        let s = seq(1, &[1, 2]);
        let lam = lambda_oracle(2, 1, 1).unwrap();
        assert_eq!(jm_eigenvalue(&s, 2).unwrap(), &lam * &lam);
        // and c_s(1) = 1 always.
        assert!(jm_eigenvalue(&s, 1).unwrap().is_one());
    }

    #[test]
    fn two_strand_eigenvalues() {
        // The locked convention: c_(1,2)(2) = A^2, c_(1,0)(2) = A^{-6}.
        let high = seq(1, &[1, 2]);
        let low = seq(1, &[1, 0]);
        assert_eq!(
            jm_eigenvalue(&high, 2).unwrap(),
            RationalFn::from_poly(LaurentPoly::monomial(2, num::BigRational::from_integer(1.into())))
        );
        assert_eq!(
            jm_eigenvalue(&low, 2).unwrap(),
            RationalFn::from_poly(LaurentPoly::monomial(-6, num::BigRational::from_integer(1.into())))
        );
    }

    #[test]
    fn jm_acts_diagonally() {
        let (k, i) = (3, 2);
        for j in 1..=k {
            let l = jm_element(j, k, i).unwrap();
            for s in all_sequences(k, i) {
                for t in sequences(k, i, s.weight()).unwrap() {
                    let g = CellElement::basis(s.clone(), t).unwrap();
                    let prod = l.mul(&g).unwrap();
                    let expected = g.scale(&jm_eigenvalue(&s, j).unwrap());
                    assert_eq!(prod, expected);
                }
            }
        }
    }

    #[test]
    fn separating_reports() {
        for (k, i) in [(2usize, 1usize), (3, 2), (1, 4)] {
            let rep = check_separating(k, i).unwrap();
            assert!(rep.all_pass(), "JM checks fail for ({k},{i})");
        }
    }

    #[test]
    fn interpolation_collapses() {
        for (k, i) in [(2usize, 1usize), (2, 2), (3, 1)] {
            for t in all_sequences(k, i) {
                let ft = ft_interpolation(&t).unwrap();
                let gtt = CellElement::basis(t.clone(), t.clone()).unwrap();
                assert_eq!(ft, gtt, "F_t != G_tt at ({k},{i}), t = {t:?}");
            }
        }
        // k = 1: empty products give the identity.
        let t = seq(3, &[3]);
        assert_eq!(ft_interpolation(&t).unwrap(), CellElement::identity(1, 3));
    }

    #[test]
    fn ft_kills_other_columns() {
        let (k, i) = (2, 2);
        for t in all_sequences(k, i) {
            let ft = ft_interpolation(&t).unwrap();
            for u in all_sequences(k, i) {
                for v in sequences(k, i, u.weight()).unwrap() {
                    let g = CellElement::basis(u.clone(), v).unwrap();
                    let prod = ft.mul(&g).unwrap();
                    if u == t {
                        assert_eq!(prod, g);
                    } else {
                        assert!(prod.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn central_idempotents_complete() {
        let (k, i) = (3, 2);
        let mut total = CellElement::zero(k, i);
        let lambdas = weights(k, i);
        for &l in &lambdas {
            let z = central_idempotent(l, k, i).unwrap();
            assert_eq!(z.mul(&z).unwrap(), z, "z_λ not idempotent");
            total = total.add(&z).unwrap();
            for &m in &lambdas {
                if m != l {
                    let zm = central_idempotent(m, k, i).unwrap();
                    assert!(z.mul(&zm).unwrap().is_zero());
                }
            }
            // Centrality on a spanning set.
            for s in all_sequences(k, i) {
                for t in sequences(k, i, s.weight()).unwrap() {
                    let g = CellElement::basis(s.clone(), t).unwrap();
                    assert_eq!(z.mul(&g).unwrap(), g.mul(&z).unwrap());
                }
            }
        }
        assert_eq!(total, CellElement::identity(k, i));
        assert!(central_idempotent(1, 3, 2).is_err());
    }

    #[test]
    fn module_dimensions_and_action() {
        // Dimensions for (3,1): squares sum to Catalan(3) = 5.
        let dims: Vec<usize> = weights(3, 1)
            .iter()
            .map(|&l| sequences(3, 1, l).unwrap().len())
            .collect();
        let total: usize = dims.iter().map(|d| d * d).sum();
        assert_eq!(total, 5);
        // Maximal weight module is one-dimensional.
        let top = seq(3, &[3, 6, 9]);
        assert_eq!(irreducible_module(&top).unwrap().len(), 1);
        // Left multiplication by L_j is the scalar c_s(j) on the whole
        // module; the right action is diagonal with entries c_t(j).
        let s = seq(1, &[1, 2, 1]);
        let basis = irreducible_module(&s).unwrap();
        let l2 = jm_element(2, 3, 1).unwrap();
        let c = jm_eigenvalue(&s, 2).unwrap();
        for g in &basis {
            assert_eq!(l2.mul(g).unwrap(), g.scale(&c));
        }
        let m = module_action(&l2, &basis).unwrap();
        let labels: Vec<AdmissibleSequence> = basis
            .iter()
            .map(|g| g.terms().next().unwrap().0 .1.clone())
            .collect();
        for (r, row) in m.iter().enumerate() {
            for (cidx, entry) in row.iter().enumerate() {
                if r == cidx {
                    assert_eq!(*entry, jm_eigenvalue(&labels[r], 2).unwrap());
                } else {
                    assert!(entry.is_zero());
                }
            }
        }
    }
}
