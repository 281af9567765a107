//! Exact arithmetic in `Q[A, A^-1]` and its fraction field `Q(A)`.
//!
//! [`LaurentPoly`] stores a sparse map from integer exponents to
//! arbitrary-precision rational coefficients; exponents are machine
//! integers since twisting grows them linearly, while coefficients can
//! grow without bound and stay exact. [`RationalFn`] is a quotient of two
//! Laurent polynomials kept in a canonical form so that equality and
//! serialized output are stable.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num::complex::Complex64;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SkeinError};

pub type Rational = BigRational;

/// Sparse Laurent polynomial over `Q` in the single variable `A`.
///
/// Invariant: no stored coefficient is zero.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Rational>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, Rational::one())
    }

    /// The variable `A` itself.
    pub fn var() -> Self {
        Self::monomial(1, Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, c)
    }

    pub fn from_int(n: i64) -> Self {
        Self::monomial(0, Rational::from_integer(BigInt::from(n)))
    }

    pub fn monomial(exp: i64, coeff: Rational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !coeff.is_zero() {
            coeffs.insert(exp, coeff);
        }
        LaurentPoly { coeffs }
    }

    /// Builds from `(exponent, coefficient)` pairs, merging duplicates.
    pub fn from_terms<I: IntoIterator<Item = (i64, Rational)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exp: i64, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(exp) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0).map_or(false, |c| c.is_one())
    }

    /// True when the polynomial is `c * A^k` for some nonzero `c`.
    pub fn is_monomial(&self) -> bool {
        self.coeffs.len() == 1
    }

    /// `(exponent, coefficient)` when this is a single term.
    pub fn monomial_parts(&self) -> Option<(i64, &Rational)> {
        if self.coeffs.len() == 1 {
            self.coeffs.iter().next().map(|(e, c)| (*e, c))
        } else {
            None
        }
    }

    pub fn coeff(&self, exp: i64) -> Rational {
        self.coeffs.get(&exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    /// Multiplies by `A^k`.
    pub fn shifted(&self, k: i64) -> Self {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// Substitutes `A -> A^d` (exponent dilation), `d != 0`.
    pub fn dilated(&self, d: i64) -> Self {
        assert!(d != 0, "dilation by zero");
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(e, c)| (e * d, c.clone())).collect(),
        }
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(e, k)| (*e, k * c)).collect(),
        }
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Splits off the rational content: returns `(c, p)` with `self = c*p`,
    /// `p` having integer coefficients with gcd 1 and positive lowest term.
    /// The zero polynomial returns `(1, 0)`.
    pub fn content_and_primitive(&self) -> (Rational, LaurentPoly) {
        if self.is_zero() {
            return (Rational::one(), Self::zero());
        }
        let mut denom_lcm = BigInt::one();
        for c in self.coeffs.values() {
            denom_lcm = denom_lcm.lcm(c.denom());
        }
        let mut numer_gcd = BigInt::zero();
        for c in self.coeffs.values() {
            numer_gcd = numer_gcd.gcd(&(c.numer() * &denom_lcm / c.denom()));
        }
        let mut content = Rational::new(numer_gcd, denom_lcm);
        let lowest = self.coeffs.values().next().unwrap();
        if lowest.is_negative() {
            content = -content;
        }
        let inv = content.recip();
        (content.clone(), self.scaled(&inv))
    }

    /// Exact division; `None` when the divisor does not divide exactly.
    pub fn div_exact(&self, div: &LaurentPoly) -> Option<LaurentPoly> {
        if div.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LaurentPoly::zero());
        }
        if let Some((e, c)) = div.monomial_parts() {
            let inv = c.recip();
            return Some(self.shifted(-e).scaled(&inv));
        }
        // Work with exponents shifted to start at zero.
        let a_min = self.min_exp().unwrap();
        let d_min = div.min_exp().unwrap();
        let mut rem: BTreeMap<i64, Rational> = self.shifted(-a_min).coeffs;
        let dvs = div.shifted(-d_min);
        let d_deg = dvs.max_exp().unwrap();
        let d_lead = dvs.coeff(d_deg);
        let mut quot = LaurentPoly::zero();
        while let Some((&r_deg, _)) = rem.iter().next_back() {
            if r_deg < d_deg {
                return None;
            }
            let r_lead = rem.get(&r_deg).unwrap().clone();
            let q = &r_lead / &d_lead;
            let q_exp = r_deg - d_deg;
            quot.add_term(q_exp, q.clone());
            for (e, c) in dvs.terms() {
                let key = e + q_exp;
                let delta = c * &q;
                use std::collections::btree_map::Entry;
                match rem.entry(key) {
                    Entry::Vacant(v) => {
                        v.insert(-delta);
                    }
                    Entry::Occupied(mut o) => {
                        *o.get_mut() -= delta;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                }
            }
            if rem.is_empty() {
                return Some(quot.shifted(a_min - d_min));
            }
        }
        None
    }

    /// Canonical gcd: integer-primitive, lowest exponent 0, positive
    /// lowest coefficient. `gcd(0, b)` is the normal form of `b`.
    pub fn gcd(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
        fn normal(p: &LaurentPoly) -> LaurentPoly {
            if p.is_zero() {
                return LaurentPoly::zero();
            }
            let shifted = p.shifted(-p.min_exp().unwrap());
            shifted.content_and_primitive().1
        }
        let mut x = normal(a);
        let mut y = normal(b);
        if x.is_zero() {
            return y;
        }
        if y.is_zero() {
            return x;
        }
        // Euclidean algorithm on ordinary polynomials, keeping remainders
        // primitive to control coefficient growth.
        while !y.is_zero() {
            let r = poly_rem(&x, &y);
            x = y;
            y = normal(&r);
        }
        normal(&x)
    }

    /// Numerically stable evaluation: factors out the lowest power and
    /// evaluates the remaining ordinary polynomial by Horner's rule.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if self.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let min = self.min_exp().unwrap();
        if z.norm_sqr() == 0.0 && min < 0 {
            return Err(SkeinError::EvalAtZero);
        }
        let max = self.max_exp().unwrap();
        let mut acc = Complex64::new(0.0, 0.0);
        // Horner from the top exponent down to `min`.
        let mut e = max;
        loop {
            acc *= z;
            if let Some(c) = self.coeffs.get(&e) {
                acc += Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            }
            if e == min {
                break;
            }
            e -= 1;
        }
        Ok(acc * powi_complex(z, min))
    }

    /// Coefficients converted to `f64`, exponent-ascending.
    pub fn f64_terms(&self) -> Vec<(i64, f64)> {
        self.terms()
            .map(|(e, c)| (e, c.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// Serialized form: `(exponent, numerator, denominator)` triples in
    /// exponent-ascending order, integers as decimal strings.
    pub fn to_triples(&self) -> Vec<(i64, String, String)> {
        self.terms()
            .map(|(e, c)| (e, c.numer().to_string(), c.denom().to_string()))
            .collect()
    }

    pub fn from_triples(triples: &[(i64, String, String)]) -> Result<Self> {
        let mut p = LaurentPoly::zero();
        for (e, n, d) in triples {
            let numer: BigInt = n
                .parse()
                .map_err(|_| SkeinError::InvalidInput(format!("bad integer {n:?}")))?;
            let denom: BigInt = d
                .parse()
                .map_err(|_| SkeinError::InvalidInput(format!("bad integer {d:?}")))?;
            if denom.is_zero() {
                return Err(SkeinError::DivisionByZero);
            }
            p.add_term(*e, Rational::new(numer, denom));
        }
        Ok(p)
    }
}

pub fn powi_complex(z: Complex64, n: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut base = if n < 0 { z.inv() } else { z };
    let mut k = n.unsigned_abs();
    let mut acc = Complex64::new(1.0, 0.0);
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        k >>= 1;
        if k > 0 {
            base *= base;
        }
    }
    acc
}

/// Remainder of ordinary polynomial division (inputs must have
/// non-negative exponents).
fn poly_rem(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    debug_assert!(a.min_exp().map_or(true, |m| m >= 0));
    debug_assert!(b.min_exp().map_or(true, |m| m >= 0));
    let d_deg = b.max_exp().expect("division by zero polynomial");
    let d_lead = b.coeff(d_deg);
    let mut rem = a.clone();
    while let Some(r_deg) = rem.max_exp() {
        if r_deg < d_deg {
            break;
        }
        let q = &rem.coeff(r_deg) / &d_lead;
        let q_exp = r_deg - d_deg;
        for (e, c) in b.terms() {
            rem.add_term(e + q_exp, -(c * &q));
        }
    }
    rem
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, -c.clone());
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        // Iterate the smaller factor on the outside.
        let (small, large) = if self.num_terms() <= rhs.num_terms() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = LaurentPoly::zero();
        for (e1, c1) in small.terms() {
            for (e2, c2) in large.terms() {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($t:ty, $trait:ident, $f:ident) => {
        impl $trait for $t {
            type Output = $t;
            fn $f(self, rhs: $t) -> $t {
                (&self).$f(&rhs)
            }
        }
        impl $trait<&$t> for $t {
            type Output = $t;
            fn $f(self, rhs: &$t) -> $t {
                (&self).$f(rhs)
            }
        }
        impl $trait<$t> for &$t {
            type Output = $t;
            fn $f(self, rhs: $t) -> $t {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned_binop!(LaurentPoly, Add, add);
forward_owned_binop!(LaurentPoly, Sub, sub);
forward_owned_binop!(LaurentPoly, Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in rhs.terms() {
            self.add_term(e, c.clone());
        }
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_is_one = mag.is_one();
            if e == 0 {
                write!(f, "{mag}")?;
            } else {
                if !coeff_is_one {
                    write!(f, "{mag}*")?;
                }
                if e == 1 {
                    write!(f, "A")?;
                } else {
                    write!(f, "A^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_triples().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let triples = Vec::<(i64, String, String)>::deserialize(deserializer)?;
        LaurentPoly::from_triples(&triples).map_err(D::Error::custom)
    }
}

/// Quotient of Laurent polynomials in canonical form: `gcd(num, den)` is a
/// unit, the denominator has integer coefficients with gcd 1, lowest
/// exponent 0 and positive lowest coefficient. A monomial denominator is
/// therefore always absorbed and becomes 1, so representations are unique
/// and equality is plain field-by-field comparison.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalFn {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl RationalFn {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(SkeinError::DivisionByZero);
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(mut num: LaurentPoly, mut den: LaurentPoly) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RationalFn {
                num: LaurentPoly::zero(),
                den: LaurentPoly::one(),
            };
        }
        if let Some((e, c)) = den.monomial_parts() {
            let inv = c.recip();
            return RationalFn {
                num: num.shifted(-e).scaled(&inv),
                den: LaurentPoly::one(),
            };
        }
        let g = LaurentPoly::gcd(&num, &den);
        if !g.is_one() {
            num = num.div_exact(&g).expect("gcd divides numerator");
            den = den.div_exact(&g).expect("gcd divides denominator");
        }
        if let Some((e, c)) = den.monomial_parts() {
            let inv = c.recip();
            return RationalFn {
                num: num.shifted(-e).scaled(&inv),
                den: LaurentPoly::one(),
            };
        }
        let shift = den.min_exp().unwrap();
        den = den.shifted(-shift);
        num = num.shifted(-shift);
        let (content, den_prim) = den.content_and_primitive();
        let inv = content.recip();
        RationalFn {
            num: num.scaled(&inv),
            den: den_prim,
        }
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        RationalFn {
            num: p,
            den: LaurentPoly::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_poly(LaurentPoly::from_int(n))
    }

    pub fn zero() -> Self {
        Self::from_poly(LaurentPoly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(LaurentPoly::one())
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// The underlying polynomial when the denominator is 1.
    pub fn as_poly(&self) -> Option<&LaurentPoly> {
        if self.den.is_one() {
            Some(&self.num)
        } else {
            None
        }
    }

    /// True when the value is `c * A^k`.
    pub fn is_monomial(&self) -> bool {
        self.den.is_one() && self.num.is_monomial()
    }

    pub fn monomial_parts(&self) -> Option<(i64, &Rational)> {
        if self.den.is_one() {
            self.num.monomial_parts()
        } else {
            None
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(SkeinError::DivisionByZero);
        }
        Ok(Self::canonical(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(SkeinError::DivisionByZero);
        }
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, n: u32) -> Self {
        // Canonical inputs stay canonical under powers.
        RationalFn {
            num: self.num.pow(n),
            den: self.den.pow(n),
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let den = self.den.eval(z)?;
        let scale: f64 = self
            .den
            .terms()
            .map(|(_, c)| c.to_f64().unwrap_or(0.0).abs())
            .sum::<f64>()
            .max(1.0);
        if den.norm() <= 1e-14 * scale {
            return Err(SkeinError::Pole { abs: den.norm() });
        }
        Ok(self.num.eval(z)? / den)
    }
}

impl Add for &RationalFn {
    type Output = RationalFn;
    fn add(self, rhs: &RationalFn) -> RationalFn {
        if self.den.is_one() && rhs.den.is_one() {
            return RationalFn {
                num: &self.num + &rhs.num,
                den: LaurentPoly::one(),
            };
        }
        if self.den == rhs.den {
            return RationalFn::canonical(&self.num + &rhs.num, self.den.clone());
        }
        let g = LaurentPoly::gcd(&self.den, &rhs.den);
        if g.is_one() {
            RationalFn::canonical(
                &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
                &self.den * &rhs.den,
            )
        } else {
            let db = self.den.div_exact(&g).unwrap();
            let dd = rhs.den.div_exact(&g).unwrap();
            RationalFn::canonical(&(&self.num * &dd) + &(&rhs.num * &db), &self.den * &dd)
        }
    }
}

impl Sub for &RationalFn {
    type Output = RationalFn;
    fn sub(self, rhs: &RationalFn) -> RationalFn {
        self + &(-rhs)
    }
}

impl Mul for &RationalFn {
    type Output = RationalFn;
    fn mul(self, rhs: &RationalFn) -> RationalFn {
        if self.is_zero() || rhs.is_zero() {
            return RationalFn::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RationalFn {
                num: &self.num * &rhs.num,
                den: LaurentPoly::one(),
            };
        }
        // Cross-reduce before multiplying; inputs are canonical so the
        // only common factors are across the pair.
        let g1 = LaurentPoly::gcd(&self.num, &rhs.den);
        let g2 = LaurentPoly::gcd(&rhs.num, &self.den);
        let n1 = if g1.is_one() {
            self.num.clone()
        } else {
            self.num.div_exact(&g1).unwrap()
        };
        let d2 = if g1.is_one() {
            rhs.den.clone()
        } else {
            rhs.den.div_exact(&g1).unwrap()
        };
        let n2 = if g2.is_one() {
            rhs.num.clone()
        } else {
            rhs.num.div_exact(&g2).unwrap()
        };
        let d1 = if g2.is_one() {
            self.den.clone()
        } else {
            self.den.div_exact(&g2).unwrap()
        };
        RationalFn::canonical(&n1 * &n2, &d1 * &d2)
    }
}

impl Neg for &RationalFn {
    type Output = RationalFn;
    fn neg(self) -> RationalFn {
        RationalFn {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

forward_owned_binop!(RationalFn, Add, add);
forward_owned_binop!(RationalFn, Sub, sub);
forward_owned_binop!(RationalFn, Mul, mul);

impl Neg for RationalFn {
    type Output = RationalFn;
    fn neg(self) -> RationalFn {
        -&self
    }
}

impl fmt::Debug for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

/// Quantum integer `[n] = A^{2(n-1)} + A^{2(n-3)} + ... + A^{-2(n-1)}`.
pub fn qint(n: usize) -> LaurentPoly {
    let mut p = LaurentPoly::zero();
    for j in 0..n {
        p.add_term(2 * (n as i64 - 1 - 2 * j as i64), Rational::one());
    }
    p
}

/// Quantum factorial `[n]! = [1][2]...[n]`.
pub fn qfact(n: usize) -> LaurentPoly {
    let mut p = LaurentPoly::one();
    for m in 1..=n {
        p = &p * &qint(m);
    }
    p
}

/// Loop value of a strand colored `n`: `Δ_n = (-1)^n [n+1]`. Satisfies
/// `Δ_0 = 1`, `Δ_1 = δ = -A^2 - A^{-2}` and the two-term recursion
/// `Δ_{n+1} = δ Δ_n - Δ_{n-1}`.
pub fn delta_closed(n: usize) -> LaurentPoly {
    let q = qint(n + 1);
    if n % 2 == 0 {
        q
    } else {
        -q
    }
}

/// The loop scalar `δ = -A^2 - A^{-2}`.
pub fn delta_loop() -> LaurentPoly {
    delta_closed(1)
}
