//! Brute-force diagrammatic Temperley-Lieb engine.
//!
//! Diagrams are non-crossing perfect matchings of boundary points of a
//! rectangle, `bot` points on the bottom edge and `top` on the top edge.
//! Square diagrams (`bot == top`) are the usual algebra elements; the
//! rectangular case carries the trivalent-vertex and fusion-tree pieces
//! used by the recoupling layer. Stacking erases each closed loop at the
//! cost of one factor of `δ = -A^2 - A^{-2}`.
//!
//! A [`SkeinElement`] is a formal `Q(A)`-combination of diagrams kept over
//! a single common denominator, so that bulk composition stays inside
//! polynomial arithmetic; per-diagram coefficients come out as
//! [`RationalFn`] values on demand.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SkeinError};
use crate::ring::{delta_loop, LaurentPoly, Rational, RationalFn};

/// Boundary points in circle coordinates: bottom points `1..=bot` occupy
/// positions `0..bot` left to right, top points `1..=top` occupy positions
/// `bot..bot+top` right to left, so the whole boundary is a convex cycle
/// and planarity is the usual non-interleaving condition on chords.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlanarDiagram {
    bot: u16,
    top: u16,
    pairs: Vec<(u16, u16)>,
}

/// A boundary point addressed by side and 1-based index.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Point {
    Bot(u16),
    Top(u16),
}

impl PlanarDiagram {
    fn from_pairs(bot: u16, top: u16, mut pairs: Vec<(u16, u16)>) -> Self {
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        let d = PlanarDiagram { bot, top, pairs };
        debug_assert!(d.is_valid(), "invalid diagram {d:?}");
        d
    }

    /// Builds from `(Point, Point)` pairs; every boundary point must be
    /// used exactly once and no two chords may cross.
    pub fn from_point_pairs(bot: u16, top: u16, pairs: &[(Point, Point)]) -> Result<Self> {
        let raw: Vec<(u16, u16)> = pairs
            .iter()
            .map(|(a, b)| (circle_pos(bot, top, *a), circle_pos(bot, top, *b)))
            .collect();
        let mut sorted: Vec<(u16, u16)> = raw
            .into_iter()
            .map(|(a, b)| if a > b { (b, a) } else { (a, b) })
            .collect();
        sorted.sort_unstable();
        let d = PlanarDiagram {
            bot,
            top,
            pairs: sorted,
        };
        if d.is_valid() {
            Ok(d)
        } else {
            Err(SkeinError::InvalidInput(
                "not a planar perfect matching".into(),
            ))
        }
    }

    pub fn bot(&self) -> usize {
        self.bot as usize
    }

    pub fn top(&self) -> usize {
        self.top as usize
    }

    /// Strand count of a square diagram.
    pub fn strands(&self) -> usize {
        debug_assert_eq!(self.bot, self.top);
        self.bot as usize
    }

    pub fn pairs(&self) -> &[(u16, u16)] {
        &self.pairs
    }

    fn total(&self) -> u16 {
        self.bot + self.top
    }

    /// Perfect matching plus the standard nesting (non-interleaving) check.
    pub fn is_valid(&self) -> bool {
        let total = self.total() as usize;
        if total % 2 != 0 || self.pairs.len() * 2 != total {
            return false;
        }
        let mut seen = vec![false; total];
        for &(a, b) in &self.pairs {
            if a == b || a as usize >= total || b as usize >= total {
                return false;
            }
            if seen[a as usize] || seen[b as usize] {
                return false;
            }
            seen[a as usize] = true;
            seen[b as usize] = true;
        }
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            for &(c, d) in &self.pairs[i + 1..] {
                let c_inside = a < c && c < b;
                let d_inside = a < d && d < b;
                if c_inside != d_inside {
                    return false;
                }
            }
        }
        true
    }

    /// Identity on `n` strands.
    pub fn identity(n: usize) -> Self {
        let n = n as u16;
        let pairs = (0..n).map(|p| (p, 2 * n - 1 - p)).collect();
        Self::from_pairs(n, n, pairs)
    }

    /// The cup-cap generator joining bottom `i, i+1` and top `i, i+1`.
    pub fn e_gen(i: usize, n: usize) -> Result<Self> {
        if i < 1 || i >= n {
            return Err(SkeinError::IndexOutOfRange { index: i, strands: n });
        }
        let n16 = n as u16;
        let i16 = i as u16;
        let mut pairs = vec![(i16 - 1, i16), (2 * n16 - 1 - i16, 2 * n16 - i16)];
        for p in 0..n16 {
            if p != i16 - 1 && p != i16 {
                pairs.push((p, 2 * n16 - 1 - p));
            }
        }
        Ok(Self::from_pairs(n16, n16, pairs))
    }

    pub fn point_at(&self, pos: u16) -> Point {
        if pos < self.bot {
            Point::Bot(pos + 1)
        } else {
            Point::Top(self.bot + self.top - pos)
        }
    }

    /// Reflection in a horizontal line, exchanging the two edges.
    pub fn reflect(&self) -> Self {
        let total = self.total();
        let pairs = self
            .pairs
            .iter()
            .map(|&(a, b)| (total - 1 - a, total - 1 - b))
            .collect();
        Self::from_pairs(self.top, self.bot, pairs)
    }

    /// Horizontal juxtaposition: `self` to the left of `other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let bot = self.bot + other.bot;
        let top = self.top + other.top;
        let map_self = |p: u16| -> u16 {
            match self.point_at(p) {
                Point::Bot(i) => i - 1,
                Point::Top(j) => bot + top - j,
            }
        };
        let map_other = |p: u16| -> u16 {
            match other.point_at(p) {
                Point::Bot(i) => self.bot + i - 1,
                Point::Top(j) => bot + top - (self.top + j),
            }
        };
        let mut pairs: Vec<(u16, u16)> = self
            .pairs
            .iter()
            .map(|&(a, b)| (map_self(a), map_self(b)))
            .collect();
        pairs.extend(other.pairs.iter().map(|&(a, b)| (map_other(a), map_other(b))));
        Self::from_pairs(bot, top, pairs)
    }

    /// Stacks `self` under `other` (gluing `self`'s top edge to `other`'s
    /// bottom edge); returns the composite and the number of closed loops.
    pub fn glue(&self, other: &Self) -> Result<(Self, usize)> {
        if self.top != other.bot {
            return Err(SkeinError::StrandMismatch {
                expected: self.top as usize,
                found: other.bot as usize,
            });
        }
        let a = self.bot as usize;
        let b = self.top as usize;
        let c = other.top as usize;
        // Node ids: 0..a are the final bottom, a..a+b the glued middle,
        // a+b..a+b+c the final top. Boundary points carry one strand end,
        // middle points one from each layer; walk the ends to pair the
        // boundary and count the closed cycles left over.
        let mut lower = vec![usize::MAX; a + b + c];
        let mut upper = vec![usize::MAX; a + b + c];
        let self_node = |p: u16| -> usize {
            match self.point_at(p) {
                Point::Bot(i) => i as usize - 1,
                Point::Top(j) => a + j as usize - 1,
            }
        };
        let other_node = |p: u16| -> usize {
            match other.point_at(p) {
                Point::Bot(i) => a + i as usize - 1,
                Point::Top(j) => a + b + j as usize - 1,
            }
        };
        for &(x, y) in &self.pairs {
            let (nx, ny) = (self_node(x), self_node(y));
            lower[nx] = ny;
            lower[ny] = nx;
        }
        for &(x, y) in &other.pairs {
            let (nx, ny) = (other_node(x), other_node(y));
            upper[nx] = ny;
            upper[ny] = nx;
        }
        let boundary = |n: usize| n < a || n >= a + b;
        let mut visited = vec![false; a + b + c];
        let mut out_pairs: Vec<(usize, usize)> = Vec::with_capacity((a + c) / 2);
        for start in (0..a).chain(a + b..a + b + c) {
            if visited[start] {
                continue;
            }
            visited[start] = true;
            let mut use_lower = start < a;
            let mut cur = start;
            loop {
                let next = if use_lower { lower[cur] } else { upper[cur] };
                debug_assert_ne!(next, usize::MAX);
                visited[next] = true;
                if boundary(next) {
                    out_pairs.push((start, next));
                    break;
                }
                // Middle nodes alternate between the two layers.
                use_lower = !use_lower;
                cur = next;
            }
        }
        let mut loops = 0;
        for start in a..a + b {
            if visited[start] {
                continue;
            }
            loops += 1;
            let mut use_lower = true;
            let mut cur = start;
            loop {
                visited[cur] = true;
                let next = if use_lower { lower[cur] } else { upper[cur] };
                visited[next] = true;
                use_lower = !use_lower;
                cur = next;
                if cur == start && use_lower {
                    break;
                }
            }
        }
        let to_circle = |n: usize| -> u16 {
            if n < a {
                n as u16
            } else {
                let j = (n - a - b + 1) as u16; // top index
                (a + c) as u16 - j
            }
        };
        let pairs = out_pairs
            .into_iter()
            .map(|(x, y)| (to_circle(x), to_circle(y)))
            .collect();
        Ok((Self::from_pairs(self.bot, other.top, pairs), loops))
    }

    /// Loop count of the trace closure joining top `j` to bottom `j`.
    pub fn closure_loops(&self) -> usize {
        debug_assert_eq!(self.bot, self.top);
        let n = self.bot as usize;
        if n == 0 {
            return 0;
        }
        let mut partner = vec![usize::MAX; 2 * n];
        for &(x, y) in &self.pairs {
            let node = |p: u16| match self.point_at(p) {
                Point::Bot(i) => i as usize - 1,
                Point::Top(j) => n + j as usize - 1,
            };
            let (nx, ny) = (node(x), node(y));
            partner[nx] = ny;
            partner[ny] = nx;
        }
        let closure = |v: usize| if v < n { v + n } else { v - n };
        let mut visited = vec![false; 2 * n];
        let mut loops = 0;
        for start in 0..2 * n {
            if visited[start] {
                continue;
            }
            loops += 1;
            let mut cur = start;
            loop {
                visited[cur] = true;
                let step = partner[cur];
                visited[step] = true;
                cur = closure(step);
                if cur == start {
                    break;
                }
            }
        }
        loops
    }
}

impl fmt::Debug for PlanarDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D[{}x{};", self.bot, self.top)?;
        for &(a, b) in &self.pairs {
            write!(f, " {a}-{b}")?;
        }
        write!(f, "]")
    }
}

fn circle_pos(bot: u16, top: u16, p: Point) -> u16 {
    match p {
        Point::Bot(i) => i - 1,
        Point::Top(j) => bot + top - j,
    }
}

/// All non-crossing perfect matchings of a `bot x top` rectangle.
pub fn enumerate_diagrams(bot: usize, top: usize) -> Vec<PlanarDiagram> {
    let total = bot + top;
    if total % 2 != 0 {
        return Vec::new();
    }
    fn rec(points: &[u16]) -> Vec<Vec<(u16, u16)>> {
        if points.is_empty() {
            return vec![Vec::new()];
        }
        let first = points[0];
        let mut out = Vec::new();
        // Pairing the first point at an odd offset splits the circle into
        // two independent arcs.
        for k in (1..points.len()).step_by(2) {
            let inner = rec(&points[1..k]);
            let outer = rec(&points[k + 1..]);
            for a in &inner {
                for b in &outer {
                    let mut pairs = vec![(first, points[k])];
                    pairs.extend_from_slice(a);
                    pairs.extend_from_slice(b);
                    out.push(pairs);
                }
            }
        }
        out
    }
    let points: Vec<u16> = (0..total as u16).collect();
    let mut out: Vec<PlanarDiagram> = rec(&points)
        .into_iter()
        .map(|pairs| PlanarDiagram::from_pairs(bot as u16, top as u16, pairs))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Formal `Q(A)`-linear combination of diagrams of a common shape, stored
/// as polynomial numerators over one shared denominator. Serializes as a
/// record list so the format stays JSON-friendly.
#[derive(Clone)]
pub struct SkeinElement {
    bot: u16,
    top: u16,
    den: LaurentPoly,
    terms: BTreeMap<PlanarDiagram, LaurentPoly>,
}

#[derive(Serialize, Deserialize)]
struct SkeinElementRepr {
    bot: u16,
    top: u16,
    den: LaurentPoly,
    terms: Vec<(PlanarDiagram, LaurentPoly)>,
}

impl Serialize for SkeinElement {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let repr = SkeinElementRepr {
            bot: self.bot,
            top: self.top,
            den: self.den.clone(),
            terms: self
                .terms
                .iter()
                .map(|(d, n)| (d.clone(), n.clone()))
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for SkeinElement {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SkeinElementRepr::deserialize(deserializer)?;
        let mut terms = BTreeMap::new();
        for (d, n) in repr.terms {
            if d.bot != repr.bot || d.top != repr.top || !d.is_valid() {
                return Err(D::Error::custom("diagram does not match element shape"));
            }
            if terms.insert(d, n).is_some() {
                return Err(D::Error::custom("duplicate diagram key"));
            }
        }
        if repr.den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(SkeinElement {
            bot: repr.bot,
            top: repr.top,
            den: repr.den,
            terms,
        })
    }
}

impl SkeinElement {
    pub fn zero(bot: usize, top: usize) -> Self {
        SkeinElement {
            bot: bot as u16,
            top: top as u16,
            den: LaurentPoly::one(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_diagram(d: PlanarDiagram) -> Self {
        let mut terms = BTreeMap::new();
        let (bot, top) = (d.bot, d.top);
        terms.insert(d, LaurentPoly::one());
        SkeinElement {
            bot,
            top,
            den: LaurentPoly::one(),
            terms,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagram(PlanarDiagram::identity(n))
    }

    /// The generator `e_i` of `TL_n`.
    pub fn generator_e(i: usize, n: usize) -> Result<Self> {
        Ok(Self::from_diagram(PlanarDiagram::e_gen(i, n)?))
    }

    pub fn bot(&self) -> usize {
        self.bot as usize
    }

    pub fn top(&self) -> usize {
        self.top as usize
    }

    pub fn strands(&self) -> Result<usize> {
        if self.bot != self.top {
            return Err(SkeinError::StrandMismatch {
                expected: self.bot as usize,
                found: self.top as usize,
            });
        }
        Ok(self.bot as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn diagrams(&self) -> impl Iterator<Item = &PlanarDiagram> {
        self.terms.keys()
    }

    pub fn denominator(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn numerators(&self) -> impl Iterator<Item = (&PlanarDiagram, &LaurentPoly)> {
        self.terms.iter()
    }

    /// Coefficient of one diagram as a normalized rational function.
    pub fn coeff(&self, d: &PlanarDiagram) -> RationalFn {
        match self.terms.get(d) {
            Some(num) => RationalFn::new(num.clone(), self.den.clone()).expect("nonzero den"),
            None => RationalFn::zero(),
        }
    }

    fn shape_check(&self, other: &Self) -> Result<()> {
        if self.bot != other.bot || self.top != other.top {
            return Err(SkeinError::StrandMismatch {
                expected: (self.bot + self.top) as usize,
                found: (other.bot + other.top) as usize,
            });
        }
        Ok(())
    }

    /// Removes zero terms, absorbs monomial denominators, and strips any
    /// common polynomial factor between the denominator and all
    /// numerators. The denominator stays integer-primitive with positive
    /// lowest coefficient so serialized forms are stable.
    pub fn normalize(&mut self) {
        self.terms.retain(|_, num| !num.is_zero());
        if self.terms.is_empty() {
            self.den = LaurentPoly::one();
            return;
        }
        if !self.den.is_monomial() {
            let mut g = self.den.clone();
            for num in self.terms.values() {
                g = LaurentPoly::gcd(&g, num);
                if g.is_one() {
                    break;
                }
            }
            if !g.is_one() {
                self.den = self.den.div_exact(&g).expect("gcd divides");
                for num in self.terms.values_mut() {
                    *num = num.div_exact(&g).expect("gcd divides");
                }
            }
        }
        if let Some((e, c)) = self.den.monomial_parts() {
            let inv = c.recip();
            let shift = e;
            for num in self.terms.values_mut() {
                *num = num.shifted(-shift).scaled(&inv);
            }
            self.den = LaurentPoly::one();
            return;
        }
        let shift = self.den.min_exp().unwrap();
        let (content, prim) = self.den.shifted(-shift).content_and_primitive();
        self.den = prim;
        let inv = content.recip();
        for num in self.terms.values_mut() {
            *num = num.shifted(-shift).scaled(&inv);
        }
    }

    /// Stacks `self` under `other`, erasing each closed loop against a
    /// factor of `δ`, bilinearly over all diagram pairs.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.top != other.bot {
            return Err(SkeinError::StrandMismatch {
                expected: self.top as usize,
                found: other.bot as usize,
            });
        }
        if let Some(out) = self.compose_small(other) {
            return Ok(out);
        }
        let delta_pows = delta_powers(self.top as usize);
        let work = self.terms.len() * other.terms.len();
        let mut terms: BTreeMap<PlanarDiagram, LaurentPoly> = if work >= 4096 {
            // Exact rational accumulation is order-independent, so the
            // parallel merge is deterministic.
            let lhs: Vec<(&PlanarDiagram, &LaurentPoly)> = self.terms.iter().collect();
            lhs.par_iter()
                .map(|(dx, nx)| {
                    let mut local: BTreeMap<PlanarDiagram, LaurentPoly> = BTreeMap::new();
                    for (dy, ny) in &other.terms {
                        let (d, loops) = dx.glue(dy).expect("shapes checked");
                        let contrib = &(*nx * ny) * &delta_pows[loops];
                        merge_term(&mut local, d, contrib);
                    }
                    local
                })
                .reduce(BTreeMap::new, |mut acc, local| {
                    for (d, num) in local {
                        merge_term(&mut acc, d, num);
                    }
                    acc
                })
        } else {
            let mut acc = BTreeMap::new();
            for (dx, nx) in &self.terms {
                for (dy, ny) in &other.terms {
                    let (d, loops) = dx.glue(dy)?;
                    let contrib = &(nx * ny) * &delta_pows[loops];
                    merge_term(&mut acc, d, contrib);
                }
            }
            acc
        };
        terms.retain(|_, num| !num.is_zero());
        let mut out = SkeinElement {
            bot: self.bot,
            top: other.top,
            den: &self.den * &other.den,
            terms,
        };
        out.normalize();
        Ok(out)
    }

    /// Checked-integer fast lane for bulk composition: numerators scaled
    /// to `i128` windows, convolved and accumulated with overflow checks.
    /// `None` means the inputs do not fit (or an intermediate overflowed)
    /// and the exact rational path must run instead; both paths produce
    /// identical normalized elements.
    fn compose_small(&self, other: &Self) -> Option<SkeinElement> {
        let (lx, xs) = small_terms(&self.terms)?;
        let (ly, ys) = small_terms(&other.terms)?;
        let delta_small = small_delta_powers(self.top as usize)?;
        let mut acc: BTreeMap<PlanarDiagram, SmallPoly> = BTreeMap::new();
        for (dx, nx) in &xs {
            for (dy, ny) in &ys {
                let (d, loops) = dx.glue(dy).expect("shapes checked");
                let prod = small_mul(nx, ny)?;
                let prod = small_mul(&prod, &delta_small[loops])?;
                small_merge(&mut acc, d, prod)?;
            }
        }
        let scale = Rational::from_integer(BigInt::from(lx) * BigInt::from(ly));
        let den = (&self.den * &other.den).scaled(&scale);
        let mut out = SkeinElement {
            bot: self.bot,
            top: other.top,
            den,
            terms: acc
                .into_iter()
                .filter(|(_, p)| !p.is_zero())
                .map(|(d, p)| (d, p.to_laurent()))
                .collect(),
        };
        out.normalize();
        Some(out)
    }

    /// Horizontal juxtaposition.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (dx, nx) in &self.terms {
            for (dy, ny) in &other.terms {
                merge_term(&mut terms, dx.tensor(dy), nx * ny);
            }
        }
        let mut out = SkeinElement {
            bot: self.bot + other.bot,
            top: self.top + other.top,
            den: &self.den * &other.den,
            terms,
        };
        out.normalize();
        out
    }

    /// The `*` anti-involution: reflect every diagram in a horizontal line.
    pub fn reflect(&self) -> Self {
        SkeinElement {
            bot: self.top,
            top: self.bot,
            den: self.den.clone(),
            terms: self
                .terms
                .iter()
                .map(|(d, num)| (d.reflect(), num.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.shape_check(other)?;
        let mut out = if self.den == other.den {
            let mut terms = self.terms.clone();
            for (d, num) in &other.terms {
                merge_term(&mut terms, d.clone(), num.clone());
            }
            SkeinElement {
                bot: self.bot,
                top: self.top,
                den: self.den.clone(),
                terms,
            }
        } else {
            let mut terms: BTreeMap<PlanarDiagram, LaurentPoly> = self
                .terms
                .iter()
                .map(|(d, num)| (d.clone(), num * &other.den))
                .collect();
            for (d, num) in &other.terms {
                merge_term(&mut terms, d.clone(), num * &self.den);
            }
            SkeinElement {
                bot: self.bot,
                top: self.top,
                den: &self.den * &other.den,
                terms,
            }
        };
        out.normalize();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        SkeinElement {
            bot: self.bot,
            top: self.top,
            den: self.den.clone(),
            terms: self.terms.iter().map(|(d, num)| (d.clone(), -num)).collect(),
        }
    }

    pub fn scale(&self, c: &RationalFn) -> Self {
        if c.is_zero() {
            return SkeinElement::zero(self.bot as usize, self.top as usize);
        }
        let mut out = SkeinElement {
            bot: self.bot,
            top: self.top,
            den: &self.den * c.den(),
            terms: self
                .terms
                .iter()
                .map(|(d, num)| (d.clone(), num * c.num()))
                .collect(),
        };
        out.normalize();
        out
    }

    pub fn scale_poly(&self, p: &LaurentPoly) -> Self {
        if p.is_zero() {
            return SkeinElement::zero(self.bot as usize, self.top as usize);
        }
        let mut out = SkeinElement {
            bot: self.bot,
            top: self.top,
            den: self.den.clone(),
            terms: self
                .terms
                .iter()
                .map(|(d, num)| (d.clone(), num * p))
                .collect(),
        };
        out.normalize();
        out
    }

    /// Exact equality via cross-multiplication of the denominators.
    pub fn eq_exact(&self, other: &Self) -> bool {
        if self.bot != other.bot || self.top != other.top {
            return false;
        }
        if self.den == other.den {
            return self.terms == other.terms;
        }
        if self.terms.len() != other.terms.len() {
            return false;
        }
        self.terms
            .iter()
            .zip(other.terms.iter())
            .all(|((d1, n1), (d2, n2))| d1 == d2 && (n1 * &other.den) == (n2 * &self.den))
    }

    /// Trace closure: joins top `j` to bottom `j` and evaluates every
    /// diagram to `δ^{#loops}`.
    pub fn trace_closure_value(&self) -> Result<RationalFn> {
        self.strands()?;
        let delta = delta_loop();
        let mut acc = LaurentPoly::zero();
        for (d, num) in &self.terms {
            acc += &(num * &delta.pow(d.closure_loops() as u32));
        }
        RationalFn::new(acc, self.den.clone())
    }

    /// The bilinear form: trace closure of `self` stacked under the
    /// reflection of `other`.
    pub fn inner_product(&self, other: &Self) -> Result<RationalFn> {
        self.shape_check(other)?;
        if let Some(v) = self.inner_product_small(other) {
            return Ok(v);
        }
        let delta_pows = delta_powers((self.top + self.bot) as usize);
        let pair_value = |dx: &PlanarDiagram, nx: &LaurentPoly| -> LaurentPoly {
            let mut acc = LaurentPoly::zero();
            for (dy, ny) in &other.terms {
                let (d, glue_loops) = dx.glue(&dy.reflect()).expect("shapes checked");
                let loops = glue_loops + d.closure_loops();
                acc += &(&(nx * ny) * &delta_pows[loops]);
            }
            acc
        };
        let work = self.terms.len() * other.terms.len();
        let total: LaurentPoly = if work >= 4096 {
            let lhs: Vec<(&PlanarDiagram, &LaurentPoly)> = self.terms.iter().collect();
            lhs.par_iter()
                .map(|(dx, nx)| pair_value(dx, nx))
                .reduce(LaurentPoly::zero, |a, b| &a + &b)
        } else {
            let mut acc = LaurentPoly::zero();
            for (dx, nx) in &self.terms {
                acc += &pair_value(dx, nx);
            }
            acc
        };
        RationalFn::new(total, &self.den * &other.den)
    }

    fn inner_product_small(&self, other: &Self) -> Option<RationalFn> {
        let (lx, xs) = small_terms(&self.terms)?;
        let (ly, ys) = small_terms(&other.terms)?;
        let ys_reflected: Vec<(PlanarDiagram, SmallPoly)> = ys
            .iter()
            .map(|(d, p)| (d.reflect(), p.clone()))
            .collect();
        let delta_small = small_delta_powers((self.top + self.bot) as usize)?;
        let mut total = SmallPoly::zero();
        for (dx, nx) in &xs {
            for (dy, ny) in &ys_reflected {
                let (d, glue_loops) = dx.glue(dy).expect("shapes checked");
                let loops = glue_loops + d.closure_loops();
                let prod = small_mul(nx, ny)?;
                let prod = small_mul(&prod, &delta_small[loops])?;
                total = small_add(&total, &prod)?;
            }
        }
        let scale = Rational::from_integer(BigInt::from(lx) * BigInt::from(ly));
        let den = (&self.den * &other.den).scaled(&scale);
        RationalFn::new(total.to_laurent(), den).ok()
    }
}

/// Dense integer window used by the checked fast lane.
#[derive(Clone)]
struct SmallPoly {
    base: i64,
    coeffs: Vec<i128>,
}

impl SmallPoly {
    fn zero() -> Self {
        SmallPoly {
            base: 0,
            coeffs: Vec::new(),
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn to_laurent(&self) -> LaurentPoly {
        LaurentPoly::from_terms(self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(
            |(idx, &c)| {
                (
                    self.base + idx as i64,
                    Rational::from_integer(BigInt::from(c)),
                )
            },
        ))
    }
}

/// Largest scaled coefficient magnitude accepted by the fast lane; keeps
/// convolutions and long accumulations far from `i128` overflow.
const SMALL_COEFF_CAP: i128 = 1 << 44;
const SMALL_SCALE_CAP: i128 = 1 << 32;
const SMALL_SPAN_CAP: i64 = 4096;

/// Converts every numerator to an integer window over a common scalar
/// `L` (the lcm of all coefficient denominators), so the element equals
/// `(integer windows) / (L * den)`.
fn small_terms(
    terms: &BTreeMap<PlanarDiagram, LaurentPoly>,
) -> Option<(i128, Vec<(PlanarDiagram, SmallPoly)>)> {
    use num::Integer;
    let mut lcm: i128 = 1;
    for num in terms.values() {
        for (_, c) in num.terms() {
            let d: i128 = c.denom().to_i128()?;
            lcm = lcm / lcm.gcd(&d) * d;
            if lcm > SMALL_SCALE_CAP {
                return None;
            }
        }
    }
    let mut out = Vec::with_capacity(terms.len());
    for (d, num) in terms {
        if num.is_zero() {
            out.push((d.clone(), SmallPoly::zero()));
            continue;
        }
        let base = num.min_exp().unwrap();
        let span = num.max_exp().unwrap() - base;
        if span > SMALL_SPAN_CAP {
            return None;
        }
        let mut coeffs = vec![0i128; span as usize + 1];
        for (e, c) in num.terms() {
            let numer: i128 = c.numer().to_i128()?;
            let denom: i128 = c.denom().to_i128()?;
            let scaled = numer.checked_mul(lcm / denom)?;
            if scaled.abs() > SMALL_COEFF_CAP {
                return None;
            }
            coeffs[(e - base) as usize] = scaled;
        }
        out.push((d.clone(), SmallPoly { base, coeffs }));
    }
    Some((lcm, out))
}

fn small_delta_powers(max: usize) -> Option<Vec<SmallPoly>> {
    delta_powers(max)
        .iter()
        .map(|p| {
            let base = p.min_exp().unwrap_or(0);
            let span = p.max_exp().unwrap_or(0) - base;
            let mut coeffs = vec![0i128; span as usize + 1];
            for (e, c) in p.terms() {
                coeffs[(e - base) as usize] = c.numer().to_i128()?;
            }
            Some(SmallPoly { base, coeffs })
        })
        .collect()
}

fn small_mul(a: &SmallPoly, b: &SmallPoly) -> Option<SmallPoly> {
    if a.coeffs.is_empty() || b.coeffs.is_empty() {
        return Some(SmallPoly::zero());
    }
    let mut coeffs = vec![0i128; a.coeffs.len() + b.coeffs.len() - 1];
    for (i, &ca) in a.coeffs.iter().enumerate() {
        if ca == 0 {
            continue;
        }
        for (j, &cb) in b.coeffs.iter().enumerate() {
            if cb == 0 {
                continue;
            }
            let slot = &mut coeffs[i + j];
            *slot = slot.checked_add(ca.checked_mul(cb)?)?;
        }
    }
    Some(SmallPoly {
        base: a.base + b.base,
        coeffs,
    })
}

fn small_add(a: &SmallPoly, b: &SmallPoly) -> Option<SmallPoly> {
    if a.coeffs.is_empty() {
        return Some(b.clone());
    }
    if b.coeffs.is_empty() {
        return Some(a.clone());
    }
    let base = a.base.min(b.base);
    let end = (a.base + a.coeffs.len() as i64).max(b.base + b.coeffs.len() as i64);
    let mut coeffs = vec![0i128; (end - base) as usize];
    for (i, &c) in a.coeffs.iter().enumerate() {
        coeffs[(a.base - base) as usize + i] = c;
    }
    for (i, &c) in b.coeffs.iter().enumerate() {
        let slot = &mut coeffs[(b.base - base) as usize + i];
        *slot = slot.checked_add(c)?;
    }
    Some(SmallPoly { base, coeffs })
}

fn small_merge(
    map: &mut BTreeMap<PlanarDiagram, SmallPoly>,
    d: PlanarDiagram,
    p: SmallPoly,
) -> Option<()> {
    use std::collections::btree_map::Entry;
    match map.entry(d) {
        Entry::Vacant(v) => {
            v.insert(p);
        }
        Entry::Occupied(mut o) => {
            let merged = small_add(o.get(), &p)?;
            *o.get_mut() = merged;
        }
    }
    Some(())
}

fn delta_powers(max: usize) -> Vec<LaurentPoly> {
    let delta = delta_loop();
    let mut pows = Vec::with_capacity(max + 1);
    pows.push(LaurentPoly::one());
    for k in 1..=max {
        let next = &pows[k - 1] * &delta;
        pows.push(next);
    }
    pows
}

fn merge_term(map: &mut BTreeMap<PlanarDiagram, LaurentPoly>, d: PlanarDiagram, num: LaurentPoly) {
    if num.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match map.entry(d) {
        Entry::Vacant(v) => {
            v.insert(num);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += &num;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

impl PartialEq for SkeinElement {
    fn eq(&self, other: &Self) -> bool {
        self.eq_exact(other)
    }
}

impl fmt::Debug for SkeinElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SkeinElement[{}x{}, {} terms, den = {}]",
            self.bot,
            self.top,
            self.terms.len(),
            self.den
        )
    }
}

/// One letter of a braid word: the generator `σ_index`, possibly inverted.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BraidGen {
    pub index: usize,
    pub inverse: bool,
}

pub type BraidWord = Vec<BraidGen>;

/// Exponent sum of the word (the writhe of its closure under the
/// blackboard framing).
pub fn writhe(word: &[BraidGen]) -> i64 {
    word.iter().map(|g| if g.inverse { -1 } else { 1 }).sum()
}

/// Kauffman resolution of a single crossing:
/// `σ_j -> A·1 + A^{-1}·e_j`, mirrored for the inverse.
pub fn crossing_element(g: BraidGen, n: usize) -> Result<SkeinElement> {
    let id = SkeinElement::identity(n);
    let e = SkeinElement::generator_e(g.index, n)?;
    let (pa, pb) = if g.inverse { (-1, 1) } else { (1, -1) };
    let a = LaurentPoly::monomial(pa, <num::BigRational as One>::one());
    let b = LaurentPoly::monomial(pb, <num::BigRational as One>::one());
    id.scale_poly(&a).add(&e.scale_poly(&b))
}

/// Resolves a braid word crossing by crossing, collecting into the diagram
/// basis after each step so memory stays bounded by the algebra dimension.
pub fn braid_to_skein(word: &[BraidGen], n: usize) -> Result<SkeinElement> {
    for g in word {
        if g.index < 1 || g.index >= n {
            return Err(SkeinError::IndexOutOfRange {
                index: g.index,
                strands: n,
            });
        }
    }
    let mut state = SkeinElement::identity(n);
    for g in word {
        state = state.compose(&crossing_element(*g, n)?)?;
    }
    Ok(state)
}

/// Positive crossing of a `b`-strand cable over an adjacent `c`-strand
/// cable, as a braid word on `b + c` strands starting after `offset`.
pub fn cable_crossing_word(b: usize, c: usize, offset: usize, inverse: bool) -> BraidWord {
    let mut word = Vec::with_capacity(b * c);
    for t in 0..b {
        for u in 0..c {
            word.push(BraidGen {
                index: offset + b - t + u,
                inverse,
            });
        }
    }
    if inverse {
        word.reverse();
    }
    word
}

/// Replaces each crossing of a `k`-strand word by the corresponding cable
/// crossing on `k*i` strands (blackboard framing, no internal twists).
pub fn cable_braid_word(word: &[BraidGen], i: usize) -> BraidWord {
    let mut out = Vec::with_capacity(word.len() * i * i);
    for g in word {
        out.extend(cable_crossing_word(i, i, (g.index - 1) * i, g.inverse));
    }
    out
}

/// `(σ_1 σ_2 ... σ_{n-1})^n`, the full twist on `n` strands.
pub fn full_twist_word(n: usize) -> BraidWord {
    let mut word = Vec::with_capacity(n * (n - 1));
    for _ in 0..n {
        for j in 1..n {
            word.push(BraidGen {
                index: j,
                inverse: false,
            });
        }
    }
    word
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, n: usize) -> SkeinElement {
        SkeinElement::generator_e(i, n).unwrap()
    }

    fn catalan(n: usize) -> usize {
        let mut c: u128 = 1;
        for k in 0..n as u128 {
            c = c * 2 * (2 * k + 1) / (k + 2);
        }
        c as usize
    }

    #[test]
    fn diagram_counts_are_catalan() {
        for n in 0..=10 {
            assert_eq!(enumerate_diagrams(n, n).len(), catalan(n), "n = {n}");
        }
    }

    #[test]
    fn e_gen_examples() {
        let e12 = PlanarDiagram::e_gen(1, 2).unwrap();
        // cup-cap on both strands: bottom 1-2, top 1-2
        assert_eq!(e12.pairs(), &[(0, 1), (2, 3)]);
        let e13 = PlanarDiagram::e_gen(1, 3).unwrap();
        assert!(e13.is_valid());
        assert_eq!(e13.pairs().len(), 3);
        assert!(PlanarDiagram::e_gen(3, 3).is_err());
        assert!(PlanarDiagram::e_gen(0, 3).is_err());
    }

    #[test]
    fn tl_relations() {
        let delta = delta_loop();
        for n in 2..=5usize {
            for i in 1..n {
                let ei = e(i, n);
                let sq = ei.compose(&ei).unwrap();
                assert_eq!(sq, ei.scale_poly(&delta), "e_i^2 = delta e_i at ({i},{n})");
                if i + 1 < n {
                    let ej = e(i + 1, n);
                    let p = ei.compose(&ej).unwrap().compose(&ei).unwrap();
                    assert_eq!(p, ei, "e_i e_(i+1) e_i = e_i at ({i},{n})");
                    let q = ej.compose(&ei).unwrap().compose(&ej).unwrap();
                    assert_eq!(q, ej);
                }
                for j in i + 2..n {
                    let ej = e(j, n);
                    assert_eq!(
                        ei.compose(&ej).unwrap(),
                        ej.compose(&ei).unwrap(),
                        "far generators commute at ({i},{j},{n})"
                    );
                }
            }
        }
    }

    #[test]
    fn identity_is_neutral() {
        let id = SkeinElement::identity(3);
        let x = e(1, 3).compose(&e(2, 3)).unwrap();
        assert_eq!(id.compose(&x).unwrap(), x);
        assert_eq!(x.compose(&id).unwrap(), x);
    }

    #[test]
    fn reflect_is_anti_homomorphism() {
        let x = e(1, 3);
        let y = e(2, 3);
        let xy = x.compose(&y).unwrap();
        assert_eq!(xy.reflect(), y.reflect().compose(&x.reflect()).unwrap());
        assert_eq!(xy.reflect().reflect(), xy);
        assert_eq!(x.reflect(), x, "e_i is symmetric");
        let id = SkeinElement::identity(4);
        assert_eq!(id.reflect(), id);
    }

    #[test]
    fn trace_closure_values() {
        let delta = delta_loop();
        let id3 = SkeinElement::identity(3);
        assert_eq!(
            id3.trace_closure_value().unwrap(),
            RationalFn::from_poly(delta.pow(3))
        );
        assert_eq!(
            e(1, 2).trace_closure_value().unwrap(),
            RationalFn::from_poly(delta.clone())
        );
    }

    #[test]
    fn inner_product_values() {
        let delta = delta_loop();
        let id1 = SkeinElement::identity(1);
        assert_eq!(
            id1.inner_product(&id1).unwrap(),
            RationalFn::from_poly(delta.clone())
        );
        let e1 = e(1, 2);
        assert_eq!(
            e1.inner_product(&e1).unwrap(),
            RationalFn::from_poly(delta.pow(2))
        );
        let id2 = SkeinElement::identity(2);
        assert_eq!(
            id2.inner_product(&e1).unwrap(),
            RationalFn::from_poly(delta.clone())
        );
        assert_eq!(
            id2.inner_product(&e1).unwrap(),
            e1.inner_product(&id2).unwrap()
        );
    }

    #[test]
    fn braid_single_crossing() {
        let word = vec![BraidGen {
            index: 1,
            inverse: false,
        }];
        let x = braid_to_skein(&word, 2).unwrap();
        let expected = SkeinElement::identity(2)
            .scale_poly(&LaurentPoly::var())
            .add(&e(1, 2).scale_poly(&LaurentPoly::monomial(-1, <num::BigRational as One>::one())))
            .unwrap();
        assert_eq!(x, expected);
        assert!(braid_to_skein(&[], 2).unwrap() == SkeinElement::identity(2));
        // malformed word
        let bad = vec![BraidGen {
            index: 2,
            inverse: false,
        }];
        assert!(braid_to_skein(&bad, 2).is_err());
    }

    #[test]
    fn trefoil_bracket_matches_full_state_sum() {
        // σ_1^3 in TL_2, trace closed: compare the incremental resolution
        // with the explicit 2^3-term state sum.
        let word: BraidWord = (0..3)
            .map(|_| BraidGen {
                index: 1,
                inverse: false,
            })
            .collect();
        let incremental = braid_to_skein(&word, 2)
            .unwrap()
            .trace_closure_value()
            .unwrap();
        let a = LaurentPoly::var();
        let a_inv = LaurentPoly::monomial(-1, <num::BigRational as One>::one());
        let mut total = RationalFn::zero();
        for mask in 0u32..8 {
            let mut elem = SkeinElement::identity(2);
            let mut weight = LaurentPoly::one();
            for bit in 0..3 {
                if mask >> bit & 1 == 0 {
                    weight = &weight * &a;
                } else {
                    weight = &weight * &a_inv;
                    elem = elem.compose(&e(1, 2)).unwrap();
                }
            }
            let val = elem.trace_closure_value().unwrap();
            total = &total + &(&RationalFn::from_poly(weight) * &val);
        }
        assert_eq!(incremental, total);
    }

    #[test]
    fn gram_matrix_nonsingular_small() {
        // Exact determinant of the diagram Gram matrix for n <= 4.
        for n in 1..=4usize {
            let diagrams = enumerate_diagrams(n, n);
            let elems: Vec<SkeinElement> = diagrams
                .iter()
                .map(|d| SkeinElement::from_diagram(d.clone()))
                .collect();
            let dim = elems.len();
            let mut m: Vec<Vec<RationalFn>> = vec![vec![RationalFn::zero(); dim]; dim];
            for i in 0..dim {
                for j in 0..dim {
                    m[i][j] = elems[i].inner_product(&elems[j]).unwrap();
                }
            }
            let mut det = RationalFn::one();
            for col in 0..dim {
                let pivot = (col..dim).find(|&r| !m[r][col].is_zero());
                let pivot = match pivot {
                    Some(p) => p,
                    None => {
                        det = RationalFn::zero();
                        break;
                    }
                };
                if pivot != col {
                    m.swap(pivot, col);
                    det = -det;
                }
                let inv = m[col][col].inv().unwrap();
                det = &det * &m[col][col];
                for r in col + 1..dim {
                    let factor = &m[r][col] * &inv;
                    for c in col..dim {
                        let delta = &factor * &m[col][c];
                        m[r][c] = &m[r][c] - &delta;
                    }
                }
            }
            assert!(!det.is_zero(), "Gram determinant vanishes for n = {n}");
        }
    }

    #[test]
    fn cable_crossing_words() {
        let w = cable_crossing_word(1, 1, 0, false);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].index, 1);
        let w = cable_crossing_word(2, 2, 0, false);
        assert_eq!(
            w.iter().map(|g| g.index).collect::<Vec<_>>(),
            vec![2, 3, 1, 2]
        );
        // Inverse word composes back to the identity.
        let pos = cable_crossing_word(2, 2, 0, false);
        let neg = cable_crossing_word(2, 2, 0, true);
        let mut word = pos;
        word.extend(neg);
        let x = braid_to_skein(&word, 4).unwrap();
        assert_eq!(x, SkeinElement::identity(4));
    }

    #[test]
    fn compose_associative_randomized() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for _ in 0..200 {
            let n = rng.gen_range(2..=6usize);
            let diagrams = enumerate_diagrams(n, n);
            let pick = |rng: &mut StdRng| {
                let mut x = SkeinElement::zero(n, n);
                for _ in 0..2 {
                    let d = diagrams[rng.gen_range(0..diagrams.len())].clone();
                    let c = LaurentPoly::monomial(
                        rng.gen_range(-3..=3),
                        num::BigRational::from_integer(num::BigInt::from(
                            rng.gen_range(-2..=2i64),
                        )),
                    );
                    x = x
                        .add(&SkeinElement::from_diagram(d).scale_poly(&c))
                        .unwrap();
                }
                x
            };
            let (x, y, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let left = x.compose(&y).unwrap().compose(&z).unwrap();
            let right = x.compose(&y.compose(&z).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn inner_product_symmetric_randomized() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(0xabcd);
        for _ in 0..60 {
            let n = rng.gen_range(1..=5usize);
            let diagrams = enumerate_diagrams(n, n);
            let pick = |rng: &mut StdRng| {
                let d = diagrams[rng.gen_range(0..diagrams.len())].clone();
                let c = LaurentPoly::monomial(rng.gen_range(-2..=2), <num::BigRational as One>::one());
                SkeinElement::from_diagram(d).scale_poly(&c)
            };
            let x = pick(&mut rng);
            let y = pick(&mut rng);
            assert_eq!(x.inner_product(&y).unwrap(), y.inner_product(&x).unwrap());
        }
    }

    #[test]
    fn rectangular_glue_and_reflect() {
        // A cap Hom(2, 0) composed with a cup Hom(0, 2) in both orders.
        let cap = PlanarDiagram::from_point_pairs(2, 0, &[(Point::Bot(1), Point::Bot(2))]).unwrap();
        let cup = cap.reflect();
        assert_eq!(cup.bot(), 0);
        assert_eq!(cup.top(), 2);
        let (d, loops) = cap.glue(&cup).unwrap();
        assert_eq!(loops, 0);
        assert_eq!(d, PlanarDiagram::e_gen(1, 2).unwrap());
        let (d0, loops) = cup.glue(&cap).unwrap();
        assert_eq!(loops, 1);
        assert_eq!(d0.bot(), 0);
        assert_eq!(d0.top(), 0);
    }

    #[test]
    fn tensor_of_identities() {
        let id2 = PlanarDiagram::identity(2);
        let id3 = PlanarDiagram::identity(3);
        assert_eq!(id2.tensor(&id3), PlanarDiagram::identity(5));
        let e1 = PlanarDiagram::e_gen(1, 2).unwrap();
        let t = e1.tensor(&id2);
        assert_eq!(t, PlanarDiagram::e_gen(1, 4).unwrap());
        let t2 = id2.tensor(&e1);
        assert_eq!(t2, PlanarDiagram::e_gen(3, 4).unwrap());
    }
}
