//! Jones-Wenzl projectors and colored networks over the skein engine.
//!
//! Network values (`Δ_n`, `θ(a,b,c)`, the twist coefficient `λ_a^{b,c}`,
//! fusion coefficients) come in two routes: a pure diagrammatic evaluation
//! (`*_oracle`) and a closed form (`*_closed`). The closed forms are the
//! ones used at scale; the oracles exist to pin the conventions and are
//! budget-limited because Catalan growth makes exact arithmetic on wide
//! diagrams infeasible.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num::One;

use crate::error::{Result, SkeinError};
use crate::ring::{delta_closed, qfact, LaurentPoly, Rational, RationalFn};
use crate::skein::{
    cable_crossing_word, crossing_element, PlanarDiagram, Point, SkeinElement,
};

/// Widest diagram the exact oracles will touch.
pub const STRAND_BUDGET: usize = 12;

fn budget_check(strands: usize) -> Result<()> {
    if strands > STRAND_BUDGET {
        return Err(SkeinError::BudgetExceeded {
            strands,
            limit: STRAND_BUDGET,
        });
    }
    Ok(())
}

/// Colors meeting at a trivalent vertex.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ColoredVertexSpec {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl ColoredVertexSpec {
    pub fn new(a: usize, b: usize, c: usize) -> Self {
        ColoredVertexSpec { a, b, c }
    }

    pub fn is_admissible(&self) -> bool {
        is_admissible_triple(self.a, self.b, self.c)
    }
}

/// Even sum plus the three triangle inequalities.
pub fn is_admissible_triple(x: usize, y: usize, z: usize) -> bool {
    (x + y + z) % 2 == 0 && x <= y + z && y <= x + z && z <= x + y
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VertexOrientation {
    /// Legs `a`, `b` on the bottom edge fusing into `c` on top.
    FuseUp,
    /// The reflection: `c` on the bottom splitting into `a`, `b`.
    SplitDown,
}

fn jw_memo() -> &'static Mutex<HashMap<usize, Arc<SkeinElement>>> {
    static MEMO: OnceLock<Mutex<HashMap<usize, Arc<SkeinElement>>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The Jones-Wenzl projector `f_n`: the unique idempotent of `TL_n` with
/// identity coefficient 1 that kills every `e_i`. Computed by the
/// two-term recursion `f_n = f_{n-1} - (Δ_{n-2}/Δ_{n-1}) f_{n-1} e_{n-1} f_{n-1}`
/// (validated by the idempotent and annihilation tests) and memoized.
pub fn jones_wenzl(n: usize) -> Result<Arc<SkeinElement>> {
    if n < 1 {
        return Err(SkeinError::InvalidInput(
            "Jones-Wenzl projector needs n >= 1".into(),
        ));
    }
    budget_check(n)?;
    if let Some(f) = jw_memo().lock().unwrap().get(&n) {
        return Ok(Arc::clone(f));
    }
    let mut have: usize = 1;
    {
        let memo = jw_memo().lock().unwrap();
        for m in (1..=n).rev() {
            if memo.contains_key(&m) {
                have = m;
                break;
            }
        }
    }
    let mut f: Arc<SkeinElement> = match jw_memo().lock().unwrap().get(&have) {
        Some(f) => Arc::clone(f),
        None => Arc::new(SkeinElement::identity(1)),
    };
    jw_memo()
        .lock()
        .unwrap()
        .entry(1)
        .or_insert_with(|| Arc::new(SkeinElement::identity(1)));
    for m in have + 1..=n {
        let prev = f.tensor(&SkeinElement::identity(1));
        let e = SkeinElement::generator_e(m - 1, m)?;
        let ratio = RationalFn::new(delta_closed(m - 2), delta_closed(m - 1))?;
        let fe = prev.compose(&e)?;
        let fef = fe.compose(&prev)?;
        let next = prev.sub(&fef.scale(&ratio))?;
        f = Arc::new(next);
        jw_memo().lock().unwrap().insert(m, Arc::clone(&f));
    }
    Ok(f)
}

/// Inserts a precomputed projector into the memo table (for disk caches).
/// The element must be a square `n`-strand element whose identity-diagram
/// coefficient is 1.
pub fn seed_jones_wenzl(n: usize, elem: SkeinElement) -> Result<()> {
    if n < 1 || elem.bot() != n || elem.top() != n {
        return Err(SkeinError::InvalidInput("wrong shape for projector".into()));
    }
    let id_coeff = elem.coeff(&PlanarDiagram::identity(n));
    if !id_coeff.is_one() {
        return Err(SkeinError::InvalidInput(
            "projector must have identity coefficient 1".into(),
        ));
    }
    jw_memo().lock().unwrap().insert(n, Arc::new(elem));
    Ok(())
}

/// Projector orders currently memoized.
pub fn cached_projector_orders() -> Vec<usize> {
    let mut v: Vec<usize> = jw_memo().lock().unwrap().keys().copied().collect();
    v.sort_unstable();
    v
}

/// Tensor power `f_i ⊗ f_i ⊗ ... ⊗ f_i` (`k` factors).
pub fn projector_wall(k: usize, i: usize) -> Result<SkeinElement> {
    budget_check(k * i)?;
    let f = jones_wenzl(i)?;
    let mut wall = (*f).clone();
    for _ in 1..k {
        wall = wall.tensor(&f);
    }
    Ok(wall)
}

/// The coloring map `C_i` on `TL_{ki}`: sandwiches each group of `i`
/// strands, top and bottom, with `f_i`. An algebra homomorphism on its
/// image since the projectors are idempotent.
pub fn color_embed(x: &SkeinElement, k: usize, i: usize) -> Result<SkeinElement> {
    if x.bot() != k * i || x.top() != k * i {
        return Err(SkeinError::StrandMismatch {
            expected: k * i,
            found: x.bot(),
        });
    }
    budget_check(k * i)?;
    if i == 1 {
        return Ok(x.clone());
    }
    let wall = projector_wall(k, i)?;
    wall.compose(x)?.compose(&wall)
}

/// Bare fusion tangle `Hom(a + b, c)`: the innermost `(a+b-c)/2` points of
/// the two bottom groups turn back into nested arcs, the rest pass
/// through.
fn bare_vertex_tangle(a: usize, b: usize, c: usize) -> Result<PlanarDiagram> {
    if !is_admissible_triple(a, b, c) {
        return Err(SkeinError::InadmissibleTriple(a, b, c));
    }
    let x = (a + b - c) / 2; // turnbacks between the two bottom groups
    let mut pairs: Vec<(Point, Point)> = Vec::with_capacity((a + b + c) / 2);
    for j in 1..=x {
        pairs.push((Point::Bot((a - j + 1) as u16), Point::Bot((a + j) as u16)));
    }
    for j in 1..=a - x {
        pairs.push((Point::Bot(j as u16), Point::Top(j as u16)));
    }
    for j in 1..=b - x {
        pairs.push((
            Point::Bot((a + x + j) as u16),
            Point::Top((a - x + j) as u16),
        ));
    }
    PlanarDiagram::from_point_pairs((a + b) as u16, c as u16, &pairs)
}

/// Colored trivalent vertex for the admissible triple `(a, b, c)`:
/// projectors `f_a ⊗ f_b` on the bottom legs, `f_c` on the top leg,
/// joined by the bare fusion tangle.
pub fn trivalent_vertex(
    spec: ColoredVertexSpec,
    orientation: VertexOrientation,
) -> Result<SkeinElement> {
    let v = vertex_fuse(spec.a, spec.b, spec.c)?;
    Ok(match orientation {
        VertexOrientation::FuseUp => v,
        VertexOrientation::SplitDown => v.reflect(),
    })
}

/// `Hom(a + b, c)` vertex with all three projectors attached.
pub fn vertex_fuse(a: usize, b: usize, c: usize) -> Result<SkeinElement> {
    if !is_admissible_triple(a, b, c) {
        return Err(SkeinError::InadmissibleTriple(a, b, c));
    }
    budget_check(a + b)?;
    budget_check(c)?;
    let bare = SkeinElement::from_diagram(bare_vertex_tangle(a, b, c)?);
    let composed = if a == 0 && b == 0 {
        bare
    } else if a == 0 {
        jones_wenzl(b)?.compose(&bare)?
    } else if b == 0 {
        jones_wenzl(a)?.compose(&bare)?
    } else {
        let fa = jones_wenzl(a)?;
        let fb = jones_wenzl(b)?;
        fa.tensor(&fb).compose(&bare)?
    };
    if c == 0 {
        Ok(composed)
    } else {
        let fc = jones_wenzl(c)?;
        composed.compose(&fc)
    }
}

/// Diagrammatic loop value: trace closure of `f_n`.
pub fn delta_oracle(n: usize) -> Result<RationalFn> {
    if n == 0 {
        return Ok(RationalFn::one());
    }
    budget_check(n)?;
    jones_wenzl(n)?.trace_closure_value()
}

/// Diagrammatic theta network: a fusion vertex paired against itself.
pub fn theta_oracle(a: usize, b: usize, c: usize) -> Result<RationalFn> {
    if !is_admissible_triple(a, b, c) {
        return Err(SkeinError::InadmissibleTriple(a, b, c));
    }
    // Budget by the widest edge of the network rectangle.
    budget_check(b + c)?;
    budget_check(a)?;
    let v = vertex_fuse(b, c, a)?;
    v.inner_product(&v)
}

/// Diagrammatic twist coefficient: the vertex `(b, c -> a)` with its two
/// lower legs exchanged by a positive cable crossing is proportional to
/// the vertex with swapped legs; this evaluates the ratio.
pub fn lambda_oracle(a: usize, b: usize, c: usize) -> Result<RationalFn> {
    if !is_admissible_triple(a, b, c) {
        return Err(SkeinError::InadmissibleTriple(a, b, c));
    }
    budget_check(b + c)?;
    budget_check(a)?;
    let v = vertex_fuse(b, c, a)?;
    // Apply the crossing from below, one resolved generator at a time, so
    // the state stays inside the small Hom space.
    let word = cable_crossing_word(c, b, 0, false);
    let mut state = v;
    for g in word.iter().rev() {
        state = crossing_element(*g, b + c)?.compose(&state)?;
    }
    let v_swapped = vertex_fuse(c, b, a)?;
    let theta = v_swapped.inner_product(&v_swapped)?;
    state.inner_product(&v_swapped)?.div(&theta)
}

/// Closed form for the theta network, as a product of quantum factorials.
/// Correctness is pinned by exhaustive equality with [`theta_oracle`].
pub fn theta_closed(a: usize, b: usize, c: usize) -> Result<RationalFn> {
    if !is_admissible_triple(a, b, c) {
        return Err(SkeinError::InadmissibleTriple(a, b, c));
    }
    let m = (a + b - c) / 2;
    let n = (b + c - a) / 2;
    let p = (c + a - b) / 2;
    let num = &qfact(m + n + p + 1) * &(&qfact(m) * &(&qfact(n) * &qfact(p)));
    let den = &qfact(m + n) * &(&qfact(n + p) * &qfact(p + m));
    let signed = if (m + n + p) % 2 == 0 { num } else { -num };
    RationalFn::new(signed, den)
}

/// Closed form for the twist coefficient
/// `λ_a^{b,c} = (-1)^{(b+c-a)/2} A^{(a(a+2) - b(b+2) - c(c+2))/2}`,
/// matching the positive-crossing convention of [`lambda_oracle`].
pub fn lambda_closed(a: usize, b: usize, c: usize) -> Result<RationalFn> {
    if !is_admissible_triple(a, b, c) {
        return Err(SkeinError::InadmissibleTriple(a, b, c));
    }
    let exp =
        (a as i64 * (a as i64 + 2) - b as i64 * (b as i64 + 2) - c as i64 * (c as i64 + 2)) / 2;
    let coeff = if (b + c - a) / 2 % 2 == 0 {
        Rational::one()
    } else {
        -Rational::one()
    };
    Ok(RationalFn::from_poly(LaurentPoly::monomial(exp, coeff)))
}

/// Fusion coefficient `Δ_k / θ(i, j, k)` from the standard fusion
/// expansion of `f_i ⊗ f_j` over admissible middle colors.
pub fn fusion_coeff(i: usize, j: usize, k: usize) -> Result<RationalFn> {
    if !is_admissible_triple(i, j, k) {
        return Err(SkeinError::InadmissibleTriple(i, j, k));
    }
    RationalFn::from_poly(delta_closed(k)).div(&theta_closed(i, j, k)?)
}

/// Middle colors admissible with `(i, j, ·)`.
pub fn fusion_range(i: usize, j: usize) -> Vec<usize> {
    (i.abs_diff(j)..=i + j)
        .filter(|&k| is_admissible_triple(i, j, k))
        .collect()
}

/// Left-comb fusion tree `Hom(len*i, s_last)`: group `j` of `i` strands
/// enters at level `j`, the spine carries the colors of `seq`.
pub fn fusion_comb(seq: &[usize], i: usize) -> Result<SkeinElement> {
    if seq.is_empty() || seq[0] != i {
        return Err(SkeinError::InvalidSequence(format!(
            "comb spine must start at the leg color {i}, got {seq:?}"
        )));
    }
    budget_check(seq.len() * i)?;
    let mut v = if i == 0 {
        SkeinElement::from_diagram(PlanarDiagram::identity(0))
    } else {
        (*jones_wenzl(i)?).clone()
    };
    for j in 1..seq.len() {
        if !is_admissible_triple(seq[j - 1], i, seq[j]) {
            return Err(SkeinError::InadmissibleTriple(seq[j - 1], i, seq[j]));
        }
        let widened = if i == 0 {
            v.clone()
        } else {
            let fi = jones_wenzl(i)?;
            v.tensor(&fi)
        };
        v = widened.compose(&vertex_fuse(seq[j - 1], i, seq[j])?)?;
    }
    Ok(v)
}

/// The caterpillar basis element `D^i_{a_1, ..., a_{2n-1}}` of `TL_(n,i)`:
/// the fusion comb of the first half composed with the reflected comb of
/// the reversed second half.
pub fn build_d(seq: &[usize], i: usize) -> Result<SkeinElement> {
    if seq.len() % 2 == 0 || seq.is_empty() {
        return Err(SkeinError::InvalidSequence(format!(
            "index sequence must have odd length, got {}",
            seq.len()
        )));
    }
    let n = (seq.len() + 1) / 2;
    if seq[0] != i || seq[seq.len() - 1] != i {
        return Err(SkeinError::InvalidSequence(
            "index sequence must start and end at the boundary color".into(),
        ));
    }
    for k in 1..seq.len() {
        if !is_admissible_triple(seq[k], seq[k - 1], i) {
            return Err(SkeinError::InadmissibleTriple(seq[k], seq[k - 1], i));
        }
    }
    budget_check(n * i)?;
    let s_half = &seq[..n];
    let t_half: Vec<usize> = seq[n - 1..].iter().rev().copied().collect();
    let up = fusion_comb(s_half, i)?;
    let down = fusion_comb(&t_half, i)?;
    up.compose(&down.reflect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::delta_loop;

    #[test]
    fn jones_wenzl_base_cases() {
        let f1 = jones_wenzl(1).unwrap();
        assert_eq!(*f1, SkeinElement::identity(1));
        // f_2 = 1 - (1/δ) e_1
        let f2 = jones_wenzl(2).unwrap();
        let inv_delta = RationalFn::new(LaurentPoly::one(), delta_loop()).unwrap();
        let expected = SkeinElement::identity(2)
            .sub(&SkeinElement::generator_e(1, 2).unwrap().scale(&inv_delta))
            .unwrap();
        assert_eq!(*f2, expected);
        assert!(jones_wenzl(0).is_err());
    }

    #[test]
    fn jones_wenzl_annihilation_small() {
        for n in 2..=5usize {
            let f = jones_wenzl(n).unwrap();
            for idx in 1..n {
                let e = SkeinElement::generator_e(idx, n).unwrap();
                assert!(e.compose(&f).unwrap().is_zero(), "e_{idx} f_{n} != 0");
                assert!(f.compose(&e).unwrap().is_zero(), "f_{n} e_{idx} != 0");
            }
            assert_eq!(f.compose(&f).unwrap(), *f, "f_{n} not idempotent");
        }
    }

    #[test]
    fn delta_oracle_matches_closed_form_small() {
        for n in 0..=5usize {
            assert_eq!(
                delta_oracle(n).unwrap(),
                RationalFn::from_poly(delta_closed(n)),
                "Δ mismatch at n = {n}"
            );
        }
    }

    #[test]
    fn theta_degenerate_cases() {
        for a in 0..=4usize {
            assert_eq!(
                theta_oracle(a, a, 0).unwrap(),
                RationalFn::from_poly(delta_closed(a))
            );
            assert_eq!(
                theta_closed(a, a, 0).unwrap(),
                RationalFn::from_poly(delta_closed(a))
            );
        }
        assert_eq!(
            theta_oracle(1, 1, 2).unwrap(),
            RationalFn::from_poly(delta_closed(2))
        );
        assert!(theta_closed(0, 1, 3).is_err());
    }

    #[test]
    fn theta_closed_matches_oracle_small() {
        for a in 0..=3usize {
            for b in 0..=3usize {
                for c in 0..=3usize {
                    if !is_admissible_triple(a, b, c) {
                        continue;
                    }
                    assert_eq!(
                        theta_closed(a, b, c).unwrap(),
                        theta_oracle(a, b, c).unwrap(),
                        "theta mismatch at ({a},{b},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn lambda_values() {
        // f_2 ∘ σ_1 picks up a single factor of A.
        assert_eq!(
            lambda_oracle(2, 1, 1).unwrap(),
            RationalFn::from_poly(LaurentPoly::var())
        );
        assert_eq!(
            lambda_closed(2, 1, 1).unwrap(),
            RationalFn::from_poly(LaurentPoly::var())
        );
        // The capped crossing is the negative kink: -A^{-3}.
        let neg_kink = RationalFn::from_poly(LaurentPoly::monomial(-3, -Rational::one()));
        assert_eq!(lambda_oracle(0, 1, 1).unwrap(), neg_kink);
        assert_eq!(lambda_closed(0, 1, 1).unwrap(), neg_kink);
    }

    #[test]
    fn lambda_closed_matches_oracle_small() {
        for a in 0..=4usize {
            for b in 0..=2usize {
                for c in 0..=2usize {
                    if !is_admissible_triple(a, b, c) {
                        continue;
                    }
                    assert_eq!(
                        lambda_closed(a, b, c).unwrap(),
                        lambda_oracle(a, b, c).unwrap(),
                        "lambda mismatch at ({a},{b},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn color_embed_homomorphism() {
        // C_1 is the identity map.
        let x = SkeinElement::generator_e(1, 3).unwrap();
        assert_eq!(color_embed(&x, 3, 1).unwrap(), x);
        // C_2(1) is f_2-walled and idempotent.
        let id4 = SkeinElement::identity(4);
        let c = color_embed(&id4, 2, 2).unwrap();
        assert_eq!(c.compose(&c).unwrap(), c);
        // x = identity, k = 1: C_2(1) = f_2.
        let id2 = SkeinElement::identity(2);
        assert_eq!(color_embed(&id2, 1, 2).unwrap(), *jones_wenzl(2).unwrap());
    }

    #[test]
    fn fusion_identity_small() {
        // f_i ⊗ f_j expands as Σ_k (Δ_k/θ) vertex-pair networks.
        for (i, j) in [(1usize, 1usize), (1, 2), (2, 2)] {
            let lhs = jones_wenzl(i).unwrap().tensor(&jones_wenzl(j).unwrap());
            let mut rhs = SkeinElement::zero(i + j, i + j);
            for k in fusion_range(i, j) {
                let v = vertex_fuse(i, j, k).unwrap();
                let pair = v.compose(&v.reflect()).unwrap();
                rhs = rhs
                    .add(&pair.scale(&fusion_coeff(i, j, k).unwrap()))
                    .unwrap();
            }
            assert_eq!(lhs, rhs, "fusion fails for ({i},{j})");
        }
    }

    #[test]
    fn vertex_examples() {
        // (1,1,2) is f_2 with split legs.
        let v =
            trivalent_vertex(ColoredVertexSpec::new(1, 1, 2), VertexOrientation::FuseUp).unwrap();
        assert_eq!(v, *jones_wenzl(2).unwrap());
        // Zero color on one leg degenerates to a projector.
        let v = vertex_fuse(2, 0, 2).unwrap();
        assert_eq!(v, *jones_wenzl(2).unwrap());
        // Inadmissible triples are rejected.
        assert!(vertex_fuse(1, 1, 1).is_err());
        assert!(
            trivalent_vertex(ColoredVertexSpec::new(0, 1, 3), VertexOrientation::FuseUp).is_err()
        );
    }

    #[test]
    fn build_d_basics() {
        // D^1_{1} is the identity of TL_1.
        let d = build_d(&[1], 1).unwrap();
        assert_eq!(d, SkeinElement::identity(1));
        // D^1_{1,0,1} is e_1.
        let d = build_d(&[1, 0, 1], 1).unwrap();
        assert_eq!(d, SkeinElement::generator_e(1, 2).unwrap());
        // D^1_{1,2,1} is f_2.
        let d = build_d(&[1, 2, 1], 1).unwrap();
        assert_eq!(d, *jones_wenzl(2).unwrap());
        assert!(build_d(&[1, 2], 1).is_err());
        assert!(build_d(&[1, 3, 1], 1).is_err());
    }

    #[test]
    fn budget_guard() {
        assert!(matches!(
            jones_wenzl(13),
            Err(SkeinError::BudgetExceeded { .. })
        ));
        assert!(matches!(
            theta_oracle(8, 7, 7),
            Err(SkeinError::BudgetExceeded { .. })
        ));
    }
}
