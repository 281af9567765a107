//! Numeric Mahler measures and twist-convergence experiments.
//!
//! One-variable measures go through Jensen's formula
//! `M(f) = |lead| Π max(1, |root|)` with an Aberth-Ehrlich simultaneous
//! root finder; a midpoint trapezoid quadrature of `log|f|` on the unit
//! circle serves as the independent cross-check. Two-variable measures
//! integrate slice-wise: the inner integral is exact (Jensen on the
//! slice), the outer one is a periodic trapezoid. Twist families are
//! evaluated through their sparse exponent-group form so the cost does
//! not grow with the cleared degree.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num::complex::Complex64;
use num::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SkeinError};
use crate::ring::{powi_complex, LaurentPoly, Rational};
use crate::twist::TwistFamily;

/// How a Mahler value was computed.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum MahlerMethod {
    Jensen,
    Quadrature,
}

#[derive(Clone, Debug, Serialize)]
pub struct MahlerResult {
    pub value: f64,
    pub method: MahlerMethod,
    /// Heuristic estimate (Richardson-style comparison), not a certified
    /// bound.
    pub error_estimate: f64,
    /// Roots used (Jensen) or grid size (quadrature).
    pub samples: usize,
}

const ABERTH_MAX_ITER: u32 = 1000;
const ABERTH_EPS: f64 = 1e-14;
const RESIDUAL_TOL: f64 = 1e-8;

/// All complex roots (with multiplicity) of the polynomial
/// `c[0] + c[1] z + ... + c[d] z^d` by Aberth-Ehrlich simultaneous
/// iteration with random-perturbation restarts. Zero roots are deflated
/// first. Each returned root satisfies
/// `|f(root)| <= 1e-8 * scale(root)` where the scale is the coefficient
/// magnitude sum at that radius.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while let Some(last) = c.last() {
        if last.norm() == 0.0 && c.len() > 1 {
            c.pop();
        } else {
            break;
        }
    }
    if c.len() <= 1 || c.iter().all(|x| x.norm() == 0.0) {
        return Err(SkeinError::InvalidInput(
            "root finding needs degree >= 1".into(),
        ));
    }
    // Deflate roots at the origin.
    let zeros = c.iter().take_while(|x| x.norm() == 0.0).count();
    let mut roots = vec![Complex64::zero(); zeros];
    let c = &c[zeros..];
    let d = c.len() - 1;
    if d == 0 {
        return Ok(roots);
    }
    let max_mag = c.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
    let cs: Vec<Complex64> = c.iter().map(|x| x / max_mag).collect();
    let deriv: Vec<Complex64> = cs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, x)| x * k as f64)
        .collect();

    // Initial guesses on a circle of the geometric-mean radius with an
    // irrational angular offset.
    let lead = cs[d].norm();
    let tail = cs[0].norm().max(1e-300);
    let radius = (tail / lead).powf(1.0 / d as f64).clamp(1e-6, 1e6);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / d as f64 + 0.41;
            Complex64::from_polar(radius * (1.0 + 0.05 * ((k % 7) as f64) / 7.0), angle)
        })
        .collect();

    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::zero();
        for k in (0..cs.len()).rev() {
            p = p * z + cs[k];
        }
        let mut dp = Complex64::zero();
        for k in (0..deriv.len()).rev() {
            dp = dp * z + deriv[k];
        }
        (p, dp)
    };

    let mut rng_state: u64 = 0x9e3779b97f4a7c15;
    let mut rand_unit = move || {
        // xorshift; deterministic restarts.
        rng_state ^= rng_state << 13;
        rng_state ^= rng_state >> 7;
        rng_state ^= rng_state << 17;
        (rng_state as f64 / u64::MAX as f64) - 0.5
    };

    let mut converged = false;
    let mut iterations = 0;
    'outer: for attempt in 0..4 {
        if attempt > 0 {
            // Stagnation: random perturbation restart.
            for zi in z.iter_mut() {
                if !zi.is_finite() || zi.norm() > 1e8 {
                    *zi = Complex64::from_polar(radius, 2.0 * PI * rand_unit() + 1.0);
                } else {
                    *zi *= Complex64::new(1.0 + 0.05 * rand_unit(), 0.05 * rand_unit());
                }
            }
        }
        for _ in 0..ABERTH_MAX_ITER / 4 {
            iterations += 1;
            let mut max_step = 0.0f64;
            let snapshot = z.clone();
            for i in 0..d {
                let (p, dp) = eval(snapshot[i]);
                if !p.is_finite() || !dp.is_finite() {
                    // Too far out for the evaluation: pull radially back.
                    let dir = snapshot[i] / snapshot[i].norm().max(1.0);
                    z[i] = dir * (1.0 + 0.1 * rand_unit());
                    max_step = 1.0;
                    continue;
                }
                let newton = if dp.norm() > 0.0 { p / dp } else { p };
                let mut repulse = Complex64::zero();
                for j in 0..d {
                    if j != i {
                        let diff = snapshot[i] - snapshot[j];
                        if diff.norm_sqr() > 1e-300 {
                            repulse += diff.inv();
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - newton * repulse;
                let mut step = if denom.norm() > 1e-12 {
                    newton / denom
                } else {
                    newton
                };
                // Trust region: a single step never moves a root by more
                // than its current scale, which prevents overflow spirals.
                let cap = 0.5 * (1.0 + snapshot[i].norm());
                if !step.is_finite() {
                    step = Complex64::new(cap, 0.0);
                }
                if step.norm() > cap {
                    step *= cap / step.norm();
                }
                z[i] = snapshot[i] - step;
                let rel = step.norm() / (1.0 + z[i].norm());
                max_step = max_step.max(rel);
            }
            if max_step < ABERTH_EPS {
                converged = true;
                break 'outer;
            }
        }
    }

    // Residual acceptance check, relative to the coefficient scale.
    let mut worst: f64 = 0.0;
    for &zi in &z {
        let (p, _) = eval(zi);
        let scale: f64 = cs
            .iter()
            .enumerate()
            .map(|(k, x)| x.norm() * zi.norm().powi(k as i32))
            .sum::<f64>()
            .max(1e-300);
        worst = worst.max(p.norm() / scale);
    }
    if !converged && worst > RESIDUAL_TOL {
        return Err(SkeinError::RootFinding {
            iterations,
            residual: worst,
        });
    }
    if worst > RESIDUAL_TOL {
        return Err(SkeinError::RootFinding {
            iterations,
            residual: worst,
        });
    }
    roots.extend(z);
    Ok(roots)
}

/// Groups roots into clusters of the given radius and replaces each
/// cluster by its centroid with a multiplicity. When the polynomial
/// coefficients are supplied, the centroid is polished by a few
/// multiplicity-aware Newton steps `z -> z - mult * p(z)/p'(z)`, which
/// restores quadratic convergence at defective roots.
pub fn cluster_roots(
    roots: &[Complex64],
    radius: f64,
    coeffs: Option<&[Complex64]>,
) -> Vec<(Complex64, usize)> {
    let mut remaining: Vec<Complex64> = roots.to_vec();
    let mut out = Vec::new();
    while let Some(seed) = remaining.pop() {
        let mut cluster = vec![seed];
        let mut idx = 0;
        while idx < remaining.len() {
            if cluster.iter().any(|c| (remaining[idx] - c).norm() <= radius) {
                cluster.push(remaining.swap_remove(idx));
                idx = 0;
            } else {
                idx += 1;
            }
        }
        let mut centroid = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
        if let Some(cs) = coeffs {
            for _ in 0..20 {
                let mut p = Complex64::zero();
                for k in (0..cs.len()).rev() {
                    p = p * centroid + cs[k];
                }
                let mut dp = Complex64::zero();
                for k in (1..cs.len()).rev() {
                    dp = dp * centroid + cs[k] * k as f64;
                }
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp * cluster.len() as f64;
                centroid -= step;
                if step.norm() <= 1e-15 * (1.0 + centroid.norm()) {
                    break;
                }
            }
        }
        out.push((centroid, cluster.len()));
    }
    out.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

fn laurent_to_complex_coeffs(f: &LaurentPoly) -> (Vec<Complex64>, i64) {
    if f.is_zero() {
        return (Vec::new(), 0);
    }
    let min = f.min_exp().unwrap();
    let max = f.max_exp().unwrap();
    let mut coeffs = vec![Complex64::zero(); (max - min + 1) as usize];
    for (e, c) in f.terms() {
        coeffs[(e - min) as usize] = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
    }
    (coeffs, min)
}

/// Mahler measure of a complex-coefficient polynomial via Jensen's
/// formula (monomial factors stripped first).
fn mahler_complex_poly(coeffs: &[Complex64]) -> Result<f64> {
    let mut c = coeffs.to_vec();
    while c.last().map_or(false, |x| x.norm() == 0.0) {
        c.pop();
    }
    if c.is_empty() {
        return Err(SkeinError::InvalidInput("zero polynomial".into()));
    }
    let zeros = c.iter().take_while(|x| x.norm() == 0.0).count();
    let mut c = c[zeros..].to_vec();
    if c.len() == 1 {
        return Ok(c[0].norm());
    }
    // The measure is invariant under coefficient reversal (roots invert,
    // the leading factor compensates); reversing when the constant term
    // dominates keeps every root inside a moderate disk.
    if c.last().unwrap().norm() < c[0].norm() {
        c.reverse();
        while c.last().map_or(false, |x| x.norm() == 0.0) {
            c.pop();
        }
    }
    let roots = poly_roots(&c)?;
    let lead = c.last().unwrap().norm();
    let mut m = lead;
    for r in roots {
        let n = r.norm();
        if n > 1.0 {
            m *= n;
        }
    }
    Ok(m)
}

/// One-variable Mahler measure by Jensen's formula.
pub fn mahler_1var(f: &LaurentPoly) -> Result<MahlerResult> {
    if f.is_zero() {
        return Err(SkeinError::InvalidInput("zero polynomial".into()));
    }
    let (coeffs, _) = laurent_to_complex_coeffs(f);
    let degree = coeffs.len() - 1;
    let value = mahler_complex_poly(&coeffs)?;
    Ok(MahlerResult {
        value,
        method: MahlerMethod::Jensen,
        // Root residuals are at the 1e-8 scale relative to coefficients;
        // the product over `degree` factors inflates accordingly.
        error_estimate: 1e-12 * (degree.max(1) as f64) * value.max(1.0),
        samples: degree,
    })
}

/// Independent route: midpoint trapezoid of `log|f|` on the unit circle.
/// The midpoint offset dodges roots at rational angles.
pub fn mahler_1var_quadrature(f: &LaurentPoly, grid: usize) -> Result<MahlerResult> {
    if f.is_zero() {
        return Err(SkeinError::InvalidInput("zero polynomial".into()));
    }
    let terms = f.f64_terms();
    let avg = |n: usize| -> f64 {
        let indices: Vec<usize> = (0..n).collect();
        // Fixed chunking plus an ordered serial combine keeps the float
        // reduction order independent of the thread schedule.
        let partials: Vec<f64> = indices
            .par_chunks(4096)
            .map(|chunk| {
                let mut acc = 0.0f64;
                for &j in chunk {
                    let theta = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                    let z = Complex64::from_polar(1.0, theta);
                    let mut v = Complex64::zero();
                    for &(e, c) in &terms {
                        v += powi_complex(z, e) * c;
                    }
                    let norm = v.norm();
                    acc += if norm > 0.0 {
                        norm.ln()
                    } else {
                        // A grid point exactly on a root contributes
                        // nothing (measure zero); floor it harmlessly.
                        -700.0
                    };
                }
                acc
            })
            .collect();
        partials.iter().sum::<f64>() / n as f64
    };
    let coarse = avg(grid / 2);
    let fine = avg(grid);
    Ok(MahlerResult {
        value: fine.exp(),
        method: MahlerMethod::Quadrature,
        error_estimate: (fine.exp() - coarse.exp()).abs(),
        samples: grid,
    })
}

/// Bivariate Laurent polynomial in `(A, z)` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BivariatePoly {
    coeffs: BTreeMap<(i64, i64), Rational>,
}

impl BivariatePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = ((i64, i64), Rational)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for ((ea, ez), c) in terms {
            p.add_term(ea, ez, c);
        }
        p
    }

    /// Builds `Σ z^{e_u} q_u(A)` from exponent-grouped Laurent parts.
    pub fn from_z_groups(groups: &[(i64, LaurentPoly)]) -> Self {
        let mut p = Self::zero();
        for (ez, q) in groups {
            for (ea, c) in q.terms() {
                p.add_term(ea, *ez, c.clone());
            }
        }
        p
    }

    pub fn add_term(&mut self, ea: i64, ez: i64, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry((ea, ez)) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i64, i64), &Rational)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    /// Substitutes `A -> z^1, z -> z^d` (the two-variable specialization
    /// of the Lawton limit).
    pub fn substitute_power(&self, d: i64) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        for ((ea, ez), c) in self.terms() {
            p.add_term(ea + d * ez, c.clone());
        }
        p
    }

    /// The slice `f(a, ·)` as complex `z`-coefficients (low exponent
    /// returned separately).
    fn z_slice(&self, a: Complex64) -> (Vec<Complex64>, i64) {
        if self.is_zero() {
            return (Vec::new(), 0);
        }
        let min_z = self.coeffs.keys().map(|&(_, ez)| ez).min().unwrap();
        let max_z = self.coeffs.keys().map(|&(_, ez)| ez).max().unwrap();
        let mut out = vec![Complex64::zero(); (max_z - min_z + 1) as usize];
        for ((ea, ez), c) in self.terms() {
            let v = powi_complex(a, ea) * c.to_f64().unwrap_or(f64::NAN);
            out[(ez - min_z) as usize] += v;
        }
        (out, min_z)
    }

    pub fn eval(&self, a: Complex64, z: Complex64) -> Complex64 {
        let mut acc = Complex64::zero();
        for ((ea, ez), c) in self.terms() {
            acc += powi_complex(a, ea) * powi_complex(z, ez) * c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }
}

/// Two-variable Mahler measure: for each grid angle in the first
/// variable, the inner integral over the second is exact by Jensen on the
/// slice; the outer integral is a midpoint trapezoid. Degenerate (zero)
/// slices are skipped and counted.
pub fn mahler_2var(f: &BivariatePoly, grid: usize) -> Result<MahlerResult> {
    if f.is_zero() {
        return Err(SkeinError::InvalidInput("zero polynomial".into()));
    }
    let run = |n: usize| -> Result<(f64, usize)> {
        let logs: Vec<Option<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let theta = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                let a = Complex64::from_polar(1.0, theta);
                let (coeffs, _) = f.z_slice(a);
                let scale: f64 = coeffs.iter().map(|c| c.norm()).sum();
                if scale <= 1e-13 {
                    return None;
                }
                let mut c = coeffs;
                let tol = 1e-13 * scale;
                while c.last().map_or(false, |x| x.norm() < tol) {
                    c.pop();
                }
                let zeros = c.iter().take_while(|x| x.norm() < tol).count();
                let c = &c[zeros..];
                if c.is_empty() {
                    return None;
                }
                mahler_complex_poly(c).ok().map(|m| m.max(1e-300).ln())
            })
            .collect();
        let skipped = logs.iter().filter(|l| l.is_none()).count();
        let used: Vec<f64> = logs.into_iter().flatten().collect();
        if used.is_empty() {
            return Err(SkeinError::InvalidInput(
                "all slices degenerate".into(),
            ));
        }
        Ok((used.iter().sum::<f64>() / used.len() as f64, skipped))
    };
    let (coarse, _) = run(grid / 2)?;
    let (fine, skipped) = run(grid)?;
    Ok(MahlerResult {
        value: fine.exp(),
        method: MahlerMethod::Jensen,
        error_estimate: (fine.exp() - coarse.exp()).abs() + skipped as f64 * 1e-6,
        samples: grid,
    })
}

/// Cross-check route: raw double midpoint quadrature of `log|f|` over the
/// torus.
pub fn mahler_2var_quadrature(f: &BivariatePoly, grid: usize) -> Result<MahlerResult> {
    if f.is_zero() {
        return Err(SkeinError::InvalidInput("zero polynomial".into()));
    }
    let run = |n: usize| -> f64 {
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|j| {
                let ta = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                let a = Complex64::from_polar(1.0, ta);
                let (slice, _) = f.z_slice(a);
                let mut acc = 0.0;
                for l in 0..n {
                    let tz = 2.0 * PI * (l as f64 + 0.5) / n as f64;
                    let z = Complex64::from_polar(1.0, tz);
                    // Horner over the slice coefficients.
                    let mut v = Complex64::zero();
                    for c in slice.iter().rev() {
                        v = v * z + c;
                    }
                    let norm = v.norm();
                    acc += if norm > 0.0 { norm.ln() } else { -700.0 };
                }
                acc / n as f64
            })
            .collect();
        rows.iter().sum::<f64>() / n as f64
    };
    let coarse = run(grid / 2);
    let fine = run(grid);
    Ok(MahlerResult {
        value: fine.exp(),
        method: MahlerMethod::Quadrature,
        error_estimate: (fine.exp() - coarse.exp()).abs(),
        samples: grid,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LawtonReport {
    pub rows: Vec<(u32, f64)>,
    pub two_var_value: f64,
    /// Sup deviation from the two-variable value over the tail
    /// `d in [d_max/2, d_max]`.
    pub tail_deviation: f64,
}

/// The one-variable specializations `M(f(z, z^d))` for `d = 1..d_max`,
/// with their deviation from the two-variable measure over the tail.
pub fn lawton_sequence(f: &BivariatePoly, d_max: u32, grid: usize) -> Result<LawtonReport> {
    if f.is_zero() {
        return Err(SkeinError::InvalidInput("zero polynomial".into()));
    }
    let rows: Vec<(u32, f64)> = (1..=d_max)
        .into_par_iter()
        .map(|d| {
            let g = f.substitute_power(d as i64);
            let m = mahler_1var(&g).map(|r| r.value)?;
            Ok((d, m))
        })
        .collect::<Result<Vec<_>>>()?;
    let two_var = mahler_2var(f, grid)?.value;
    let tail_start = d_max / 2;
    let tail_deviation = rows
        .iter()
        .filter(|(d, _)| *d >= tail_start)
        .map(|(_, v)| (v - two_var).abs())
        .fold(0.0f64, f64::max);
    Ok(LawtonReport {
        rows,
        two_var_value: two_var,
        tail_deviation,
    })
}

/// Evaluates `|Σ_u ε_u^m w^{m e_u + shift_u} q̃_u(w)|` on a midpoint grid
/// and averages the logs. Table-driven: every monomial is one lookup into
/// a precomputed `cis` table, so the cost is independent of the cleared
/// degree.
fn sparse_log_average(
    groups: &[(i8, i64, Vec<(i64, f64)>)],
    m: u32,
    n: usize,
) -> f64 {
    let two_n = 2 * n as i64;
    let table: Vec<Complex64> = (0..two_n)
        .map(|t| Complex64::from_polar(1.0, PI * t as f64 / n as f64))
        .collect();
    let modn = |e: i64| -> i64 { ((e % two_n) + two_n) % two_n };
    // Monomial exponents folded once; each sample point indexes by
    // (2j+1)*e mod 2N.
    let folded: Vec<(f64, Vec<(i64, f64)>)> = groups
        .iter()
        .map(|(sign, e_u, q_terms)| {
            let s = if *sign < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
            let base = modn(*e_u as i64 * m as i64);
            let terms: Vec<(i64, f64)> = q_terms
                .iter()
                .map(|&(ea, c)| (modn(base + ea), c))
                .collect();
            (s, terms)
        })
        .collect();
    let indices: Vec<i64> = (0..n as i64).collect();
    let partials: Vec<f64> = indices
        .par_chunks(8192)
        .map(|chunk| {
            let mut acc = 0.0f64;
            for &j in chunk {
                let mult = 2 * j + 1;
                let mut v = Complex64::zero();
                for (s, terms) in &folded {
                    let mut group = Complex64::zero();
                    for &(e, c) in terms {
                        let idx = modn(e * mult) as usize;
                        group += table[idx] * c;
                    }
                    v += group * *s;
                }
                let norm = v.norm();
                acc += if norm > 0.0 { norm.ln() } else { -700.0 };
            }
            acc
        })
        .collect();
    partials.iter().sum::<f64>() / n as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistConvergenceReport {
    /// `(m, M(J_m), |M(J_m) - M(J_{m-1})|)` rows.
    pub rows: Vec<(u32, f64, f64)>,
    /// Mahler measure of the two-variable limit polynomial, when all
    /// exponent-group signs are positive.
    pub limit_value: Option<f64>,
    /// `|M(J_m) - limit|` for the last 10 twist counts.
    pub last_deviations: Vec<(u32, f64)>,
    /// Max successive difference over the last tenth of the range.
    pub tail_max_delta: f64,
}

/// Degree cutoff under which the per-twist Mahler value goes through the
/// root finder; beyond it the sparse circle quadrature takes over (the
/// cleared degree grows linearly in the twist count, which the exponent
/// group form evaluates at constant cost).
const JENSEN_DEGREE_CUTOFF: i64 = 400;

/// Mahler measure of one member of the family, framing monomial dropped.
pub fn family_mahler(fam: &TwistFamily, m: u32) -> Result<f64> {
    let (den, groups) = fam.cleared();
    let den_m = mahler_1var(&den)?.value;
    // Span of the cleared numerator exponents at this twist count.
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for (_, e_u, q) in &groups {
        if q.is_zero() {
            continue;
        }
        lo = lo.min(e_u * m as i64 + q.min_exp().unwrap());
        hi = hi.max(e_u * m as i64 + q.max_exp().unwrap());
    }
    if lo > hi {
        return Err(SkeinError::InvalidInput("zero family".into()));
    }
    let span = hi - lo;
    if span <= JENSEN_DEGREE_CUTOFF {
        let mut num = LaurentPoly::zero();
        for (sign, e_u, q) in &groups {
            let s = if *sign < 0 && m % 2 == 1 {
                -Rational::one()
            } else {
                Rational::one()
            };
            let shifted = q.shifted(e_u * m as i64).scaled(&s);
            num += &shifted;
        }
        if num.is_zero() {
            return Err(SkeinError::InvalidInput("zero family member".into()));
        }
        Ok(mahler_1var(&num)?.value / den_m)
    } else {
        let f64_groups: Vec<(i8, i64, Vec<(i64, f64)>)> = groups
            .iter()
            .map(|(s, e, q)| (*s, *e, q.f64_terms()))
            .collect();
        let n = (256 * span as usize).next_power_of_two().clamp(1 << 19, 1 << 22);
        let log_avg = sparse_log_average(&f64_groups, m, n);
        Ok(log_avg.exp() / den_m)
    }
}

/// Runs the convergence study `M(J_m)` for `m = 1..m_max` and compares the
/// tail against the Mahler measure of the limit polynomial
/// `P(A, z) = Σ_u z^{e_u} q̃_u(A)` (divided by the common denominator).
pub fn twist_convergence(fam: &TwistFamily, m_max: u32, grid: usize) -> Result<TwistConvergenceReport> {
    if fam.is_empty() {
        return Err(SkeinError::InvalidInput("empty twist family".into()));
    }
    let values: Vec<(u32, f64)> = (1..=m_max)
        .map(|m| family_mahler(fam, m).map(|v| (m, v)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(values.len());
    let mut prev: Option<f64> = None;
    for (m, v) in &values {
        let delta = prev.map_or(f64::NAN, |p| (v - p).abs());
        rows.push((*m, *v, delta));
        prev = Some(*v);
    }
    let (den, groups) = fam.cleared();
    let all_positive = groups.iter().all(|(s, _, _)| *s > 0);
    let limit_value = if all_positive {
        let p = BivariatePoly::from_z_groups(
            &groups
                .iter()
                .map(|(_, e, q)| (*e, q.clone()))
                .collect::<Vec<_>>(),
        );
        let m2 = mahler_2var(&p, grid)?.value;
        let den_m = mahler_1var(&den)?.value;
        Some(m2 / den_m)
    } else {
        None
    };
    let last_deviations = match limit_value {
        Some(lim) => values
            .iter()
            .rev()
            .take(10)
            .rev()
            .map(|(m, v)| (*m, (v - lim).abs()))
            .collect(),
        None => Vec::new(),
    };
    let tail_start = m_max.saturating_sub(m_max / 10).max(2);
    let tail_max_delta = rows
        .iter()
        .filter(|(m, _, _)| *m >= tail_start)
        .map(|(_, _, d)| *d)
        .fold(0.0f64, f64::max);
    Ok(TwistConvergenceReport {
        rows,
        limit_value,
        last_deviations,
        tail_max_delta,
    })
}
