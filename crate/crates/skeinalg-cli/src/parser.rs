//! Text grammars: tangle expressions and Laurent/bivariate polynomials.
//!
//! Tangle grammar (whitespace separates terms, juxtaposition composes):
//!
//! ```text
//! expr := term (term)*
//! term := 's' INT ('^-1')? | 'e(' INT ')' | 'jw(' INT ')'
//!       | 'twist(' INT ')' | '(' expr ')'
//! ```
//!
//! Polynomial grammar for the numeric commands: sums of terms over the
//! variables `A` and `z`, e.g. `A^2 - A - 1` or `1 + A + z`.

use std::fmt;

use num::{BigInt, BigRational};
use skeinalg::mahler::BivariatePoly;
use skeinalg::ring::LaurentPoly;
use skeinalg::skein::{full_twist_word, BraidGen, BraidWord, SkeinElement};
use skeinalg::Result as SkeinResult;

/// Position of a parse error, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for ParseError {}

/// One parsed term of a tangle expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TangleTerm {
    Braid(BraidGen),
    CupCap(usize),
    JonesWenzl(usize),
    /// `twist(m)`: `m` full twists on all strands.
    Twist(usize),
    Group(Vec<TangleTerm>),
}

/// Parsed tangle expression.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TangleExpr {
    pub terms: Vec<TangleTerm>,
}

struct Cursor<'a> {
    src: &'a str,
    bytes: &'a [u8],
    idx: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor {
            src,
            bytes: src.as_bytes(),
            idx: 0,
        }
    }

    fn pos(&self) -> Pos {
        let mut line = 1;
        let mut col = 1;
        for b in self.src[..self.idx].bytes() {
            if b == b'\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        Pos { line, col }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.idx).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.idx += 1;
        Some(b)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.idx += 1;
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == b => {
                self.idx += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected '{}'", b as char))),
        }
    }

    fn integer(&mut self) -> Result<usize, ParseError> {
        let start = self.idx;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.idx += 1;
        }
        if start == self.idx {
            return Err(self.error("expected an integer"));
        }
        self.src[start..self.idx]
            .parse()
            .map_err(|_| self.error("integer out of range"))
    }
}

pub fn parse_tangle(text: &str) -> Result<TangleExpr, ParseError> {
    let mut cur = Cursor::new(text);
    let terms = parse_terms(&mut cur, false)?;
    cur.skip_ws();
    if cur.peek().is_some() {
        return Err(cur.error("unexpected trailing input"));
    }
    Ok(TangleExpr { terms })
}

fn parse_terms(cur: &mut Cursor, in_group: bool) -> Result<Vec<TangleTerm>, ParseError> {
    let mut terms = Vec::new();
    loop {
        cur.skip_ws();
        match cur.peek() {
            None => break,
            Some(b')') if in_group => break,
            Some(b')') => return Err(cur.error("unmatched ')'")),
            Some(_) => terms.push(parse_term(cur)?),
        }
    }
    Ok(terms)
}

fn parse_term(cur: &mut Cursor) -> Result<TangleTerm, ParseError> {
    match cur.peek() {
        Some(b'(') => {
            cur.bump();
            let inner = parse_terms(cur, true)?;
            cur.skip_ws();
            cur.expect(b')')?;
            Ok(TangleTerm::Group(inner))
        }
        Some(b's') => {
            cur.bump();
            let index = cur.integer()?;
            // An optional '^-1' must be attached to the generator.
            if cur.peek() == Some(b'^') {
                cur.bump();
                cur.expect(b'-')?;
                let pos = cur.pos();
                let one = cur.integer()?;
                if one != 1 {
                    return Err(ParseError {
                        pos,
                        message: "only '^-1' is supported on braid generators".into(),
                    });
                }
                Ok(TangleTerm::Braid(BraidGen {
                    index,
                    inverse: true,
                }))
            } else {
                Ok(TangleTerm::Braid(BraidGen {
                    index,
                    inverse: false,
                }))
            }
        }
        Some(b'e') => {
            cur.bump();
            cur.expect(b'(')?;
            cur.skip_ws();
            let index = cur.integer()?;
            cur.skip_ws();
            cur.expect(b')')?;
            Ok(TangleTerm::CupCap(index))
        }
        Some(b'j') => {
            cur.bump();
            cur.expect(b'w')?;
            cur.expect(b'(')?;
            cur.skip_ws();
            let n = cur.integer()?;
            cur.skip_ws();
            cur.expect(b')')?;
            Ok(TangleTerm::JonesWenzl(n))
        }
        Some(b't') => {
            for b in *b"twist(" {
                cur.expect(b)?;
            }
            cur.skip_ws();
            let m = cur.integer()?;
            cur.skip_ws();
            cur.expect(b')')?;
            Ok(TangleTerm::Twist(m))
        }
        Some(c) => Err(cur.error(format!("unexpected character '{}'", c as char))),
        None => Err(cur.error("unexpected end of input")),
    }
}

/// Flattens an expression to a braid word when it contains only braid
/// generators and twists.
pub fn to_braid_word(expr: &TangleExpr, strands: usize) -> Option<BraidWord> {
    fn walk(terms: &[TangleTerm], strands: usize, out: &mut BraidWord) -> bool {
        for t in terms {
            match t {
                TangleTerm::Braid(g) => out.push(*g),
                TangleTerm::Twist(m) => {
                    for _ in 0..*m {
                        out.extend(full_twist_word(strands));
                    }
                }
                TangleTerm::Group(inner) => {
                    if !walk(inner, strands, out) {
                        return false;
                    }
                }
                _ => return false,
            }
        }
        true
    }
    let mut out = Vec::new();
    walk(&expr.terms, strands, &mut out).then_some(out)
}

/// Evaluates an expression to a skein element on `n` strands.
pub fn eval_tangle(expr: &TangleExpr, n: usize) -> SkeinResult<SkeinElement> {
    fn eval_terms(terms: &[TangleTerm], n: usize, state: SkeinElement) -> SkeinResult<SkeinElement> {
        let mut acc = state;
        for t in terms {
            let piece = match t {
                TangleTerm::Braid(g) => skeinalg::skein::crossing_element(*g, n)?,
                TangleTerm::CupCap(j) => SkeinElement::generator_e(*j, n)?,
                TangleTerm::JonesWenzl(j) => {
                    let f = skeinalg::recoupling::jones_wenzl(*j)?;
                    if *j == n {
                        (*f).clone()
                    } else if *j < n {
                        f.tensor(&SkeinElement::identity(n - j))
                    } else {
                        return Err(skeinalg::SkeinError::IndexOutOfRange {
                            index: *j,
                            strands: n,
                        });
                    }
                }
                TangleTerm::Twist(m) => {
                    let mut word = Vec::new();
                    for _ in 0..*m {
                        word.extend(full_twist_word(n));
                    }
                    skeinalg::skein::braid_to_skein(&word, n)?
                }
                TangleTerm::Group(inner) => {
                    eval_terms(inner, n, SkeinElement::identity(n))?
                }
            };
            acc = acc.compose(&piece)?;
        }
        Ok(acc)
    }
    eval_terms(&expr.terms, n, SkeinElement::identity(n))
}

/// Exponent sum of all crossings in the expression (full twists on `n`
/// strands contribute `n(n-1)` each).
pub fn expr_writhe(expr: &TangleExpr, strands: usize) -> i64 {
    fn walk(terms: &[TangleTerm], strands: usize) -> i64 {
        terms
            .iter()
            .map(|t| match t {
                TangleTerm::Braid(g) => {
                    if g.inverse {
                        -1
                    } else {
                        1
                    }
                }
                TangleTerm::Twist(m) => (*m * strands * (strands - 1)) as i64,
                TangleTerm::Group(inner) => walk(inner, strands),
                _ => 0,
            })
            .sum()
    }
    walk(&expr.terms, strands)
}

// ---- polynomial parser ----

#[derive(Debug, Clone, PartialEq)]
enum PolyTok {
    Int(BigInt),
    VarA,
    VarZ,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Slash,
}

fn lex_poly(text: &str) -> Result<Vec<(PolyTok, usize)>, ParseError> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                toks.push((PolyTok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((PolyTok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((PolyTok::Star, i));
                i += 1;
            }
            b'^' => {
                toks.push((PolyTok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((PolyTok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((PolyTok::RParen, i));
                i += 1;
            }
            b'/' => {
                toks.push((PolyTok::Slash, i));
                i += 1;
            }
            b'A' | b'a' => {
                toks.push((PolyTok::VarA, i));
                i += 1;
            }
            b'z' | b'Z' => {
                toks.push((PolyTok::VarZ, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().unwrap();
                toks.push((PolyTok::Int(n), start));
            }
            _ => {
                return Err(ParseError {
                    pos: Pos { line: 1, col: i + 1 },
                    message: format!("unexpected character '{}'", c as char),
                })
            }
        }
    }
    Ok(toks)
}

/// Parses an expression in `A` (and optionally `z`) into a bivariate
/// polynomial with integer exponents.
pub fn parse_poly(text: &str) -> Result<BivariatePoly, ParseError> {
    let toks = lex_poly(text)?;
    let mut p = PolyParser { toks, idx: 0 };
    let poly = p.expr()?;
    if p.idx != p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(poly)
}

/// True when the text mentions the second variable `z`.
pub fn poly_uses_z(text: &str) -> bool {
    text.bytes().any(|b| b == b'z' || b == b'Z')
}

/// Restriction to one variable; fails when `z` occurs.
pub fn parse_laurent(text: &str) -> Result<LaurentPoly, ParseError> {
    let p = parse_poly(text)?;
    let mut out = LaurentPoly::zero();
    for ((ea, ez), c) in p.terms() {
        if ez != 0 {
            return Err(ParseError {
                pos: Pos { line: 1, col: 1 },
                message: "expected a one-variable polynomial in A".into(),
            });
        }
        out.add_term(ea, c.clone());
    }
    Ok(out)
}

struct PolyParser {
    toks: Vec<(PolyTok, usize)>,
    idx: usize,
}

impl PolyParser {
    fn error(&self, message: impl Into<String>) -> ParseError {
        let col = self
            .toks
            .get(self.idx)
            .map(|(_, c)| c + 1)
            .unwrap_or_else(|| self.toks.last().map(|(_, c)| c + 2).unwrap_or(1));
        ParseError {
            pos: Pos { line: 1, col },
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&PolyTok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<PolyTok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<BivariatePoly, ParseError> {
        let mut negate = false;
        match self.peek() {
            Some(PolyTok::Minus) => {
                self.bump();
                negate = true;
            }
            Some(PolyTok::Plus) => {
                self.bump();
            }
            _ => {}
        }
        let mut acc = self.product()?;
        if negate {
            acc = scale(&acc, &-BigRational::from_integer(BigInt::from(1)));
        }
        loop {
            match self.peek() {
                Some(PolyTok::Plus) => {
                    self.bump();
                    let t = self.product()?;
                    acc = add(&acc, &t);
                }
                Some(PolyTok::Minus) => {
                    self.bump();
                    let t = self.product()?;
                    acc = add(&acc, &scale(&t, &-BigRational::from_integer(BigInt::from(1))));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<BivariatePoly, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(PolyTok::Star) => {
                    self.bump();
                    let f = self.factor()?;
                    acc = mul(&acc, &f);
                }
                // Division by a single-term factor (rational constants
                // and monomials are units in the Laurent ring).
                Some(PolyTok::Slash) => {
                    self.bump();
                    let f = self.factor()?;
                    let mut terms = f.terms();
                    let Some(((ea, ez), c)) = terms.next() else {
                        return Err(self.error("division by zero"));
                    };
                    if terms.next().is_some() {
                        return Err(self.error("divisor must be a single term"));
                    }
                    let inv = BivariatePoly::from_terms([((-ea, -ez), c.recip())]);
                    acc = mul(&acc, &inv);
                }
                // Implicit multiplication: `3A^2 z`.
                Some(PolyTok::Int(_) | PolyTok::VarA | PolyTok::VarZ | PolyTok::LParen) => {
                    let f = self.factor()?;
                    acc = mul(&acc, &f);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<BivariatePoly, ParseError> {
        match self.bump() {
            Some(PolyTok::Int(n)) => Ok(constant(BigRational::from_integer(n))),
            Some(PolyTok::VarA) => {
                let e = self.optional_exponent()?;
                Ok(BivariatePoly::from_terms([(
                    (e, 0),
                    BigRational::from_integer(BigInt::from(1)),
                )]))
            }
            Some(PolyTok::VarZ) => {
                let e = self.optional_exponent()?;
                Ok(BivariatePoly::from_terms([(
                    (0, e),
                    BigRational::from_integer(BigInt::from(1)),
                )]))
            }
            Some(PolyTok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(PolyTok::RParen) => Ok(inner),
                    _ => Err(self.error("expected ')'")),
                }
            }
            _ => Err(self.error("expected a term")),
        }
    }

    fn optional_exponent(&mut self) -> Result<i64, ParseError> {
        if self.peek() != Some(&PolyTok::Caret) {
            return Ok(1);
        }
        self.bump();
        let mut neg = false;
        if self.peek() == Some(&PolyTok::Minus) {
            self.bump();
            neg = true;
        }
        match self.bump() {
            Some(PolyTok::Int(n)) => {
                let e: i64 = n
                    .to_string()
                    .parse()
                    .map_err(|_| self.error("exponent out of range"))?;
                Ok(if neg { -e } else { e })
            }
            _ => Err(self.error("expected an exponent")),
        }
    }
}

fn constant(c: BigRational) -> BivariatePoly {
    BivariatePoly::from_terms([((0, 0), c)])
}

fn add(a: &BivariatePoly, b: &BivariatePoly) -> BivariatePoly {
    let mut out = a.clone();
    for ((ea, ez), c) in b.terms() {
        out.add_term(ea, ez, c.clone());
    }
    out
}

fn scale(a: &BivariatePoly, c: &BigRational) -> BivariatePoly {
    let mut out = BivariatePoly::zero();
    for ((ea, ez), v) in a.terms() {
        out.add_term(ea, ez, v * c);
    }
    out
}

fn mul(a: &BivariatePoly, b: &BivariatePoly) -> BivariatePoly {
    let mut out = BivariatePoly::zero();
    for ((ea1, ez1), c1) in a.terms() {
        for ((ea2, ez2), c2) in b.terms() {
            out.add_term(ea1 + ea2, ez1 + ez2, c1 * c2);
        }
    }
    out
}
