//! Continued fractions, approximants and Bruno sums.
//!
//! Digits follow the convention `[a0; a1, a2, ...] = a0 + 1/(a1 + 1/(a2 + ...))`.
//! Denominators are seeded with `q_{-1} = 0`, `q_{-2} = 1`, so `q_0 = 1` always
//! and `q_n` never depends on `a0`.
//!
//! Fibonacci numbers use the shifted indexing `F_0 = 1`, `F_1 = 2`, which is the
//! natural lower bound `q_n >= F_n` for rotation numbers in `(0, 1/2)`.
//!
//! The Bruno sum includes the `n = 0` term `log q_1 / q_0`. Some authors start
//! at `n = 1`; the two conventions differ by `log a1`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mp;

const MAX_SURD_STEPS: usize = 1 << 20;

/// A small reduced fraction `p/q` with `q > 0` and `gcd(p, q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    p: i64,
    q: u32,
}

impl Fraction {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q <= 0 || q > u32::MAX as i64 {
            return Err(Error::InvalidParameter(format!("denominator {q} must be positive")));
        }
        if gcd_i64(p, q) != 1 {
            return Err(Error::NotCoprime { p, q });
        }
        Ok(Fraction { p, q: q as u32 })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from((self.p, self.q))
    }

    pub fn to_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self.p) / self.q
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Fraction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once('/').ok_or_else(|| Error::Parse(format!("expected p/q, got {s:?}")))?;
        let p = a.trim().parse::<i64>().map_err(|e| Error::Parse(e.to_string()))?;
        let q = b.trim().parse::<i64>().map_err(|e| Error::Parse(e.to_string()))?;
        Fraction::new(p, q)
    }
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

/// Why an expansion stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// The number is rational and the Euclidean algorithm terminated.
    Exact,
    /// The requested number of digits was produced; more exist.
    MaxTerms,
    /// Further digits would not be determined by the working precision.
    PrecisionHorizon,
}

/// A finite run of continued-fraction digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub a0: Integer,
    /// `a1..aK`, all positive.
    pub digits: Vec<Integer>,
    pub termination: Termination,
}

impl ContinuedFraction {
    pub fn exact(&self) -> bool {
        self.termination == Termination::Exact
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `a_n`, with `a_0` at index 0.
    pub fn digit(&self, n: usize) -> Option<&Integer> {
        if n == 0 {
            Some(&self.a0)
        } else {
            self.digits.get(n - 1)
        }
    }

    /// Value of the finite expansion.
    pub fn to_rational(&self) -> Rational {
        let mut acc: Option<Rational> = None;
        for d in self.digits.iter().rev() {
            let mut r = Rational::from(d);
            if let Some(a) = acc {
                r += a.recip();
            }
            acc = Some(r);
        }
        let mut x = Rational::from(&self.a0);
        if let Some(a) = acc {
            x += a.recip();
        }
        x
    }

    /// Rewrite a trailing digit 1 so exact expansions end in a digit >= 2.
    fn canonicalize(&mut self) {
        if self.termination != Termination::Exact {
            return;
        }
        if let Some(last) = self.digits.last() {
            if *last == 1 {
                self.digits.pop();
                match self.digits.last_mut() {
                    Some(prev) => *prev += 1,
                    None => self.a0 += 1,
                }
            }
        }
    }
}

/// Text form `[a0; a1,a2,...]` with an optional trailing repetend `(r1,...,rk)`,
/// e.g. `[0; 2,(1)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfLiteral {
    pub a0: Integer,
    pub preperiod: Vec<Integer>,
    pub period: Vec<Integer>,
}

impl CfLiteral {
    pub fn finite(a0: Integer, digits: Vec<Integer>) -> Self {
        CfLiteral { a0, preperiod: digits, period: Vec::new() }
    }

    pub fn is_periodic(&self) -> bool {
        !self.period.is_empty()
    }

    /// `a_n` for `n >= 1`; `None` past the end of a finite literal.
    pub fn digit(&self, n: usize) -> Option<&Integer> {
        if n == 0 {
            return Some(&self.a0);
        }
        let i = n - 1;
        if i < self.preperiod.len() {
            Some(&self.preperiod[i])
        } else if self.period.is_empty() {
            None
        } else {
            Some(&self.period[(i - self.preperiod.len()) % self.period.len()])
        }
    }

    /// Largest digit that can appear at index `> n`.
    pub fn max_digit_after(&self, n: usize) -> Option<Integer> {
        let mut m: Option<Integer> = None;
        let mut consider = |d: &Integer| {
            if m.as_ref().is_none_or(|x| d > x) {
                m = Some(d.clone());
            }
        };
        for (i, d) in self.preperiod.iter().enumerate() {
            if i + 1 > n {
                consider(d);
            }
        }
        for d in &self.period {
            consider(d);
        }
        m
    }

    pub fn expand(&self, max_terms: usize) -> ContinuedFraction {
        let mut digits = Vec::new();
        let mut n = 1;
        while digits.len() < max_terms {
            match self.digit(n) {
                Some(d) => digits.push(d.clone()),
                None => break,
            }
            n += 1;
        }
        let termination = if self.digit(n).is_none() { Termination::Exact } else { Termination::MaxTerms };
        let mut cf = ContinuedFraction { a0: self.a0.clone(), digits, termination };
        cf.canonicalize();
        cf
    }

    /// Value at `prec` bits. Periodic literals are unrolled until the
    /// convergent error `1/q_n^2` is below `2^-(prec+16)`.
    pub fn value(&self, prec: u32) -> Float {
        if !self.is_periodic() {
            return Float::with_val(prec, &self.expand(self.preperiod.len()).to_rational());
        }
        let target = Integer::from(1) << (prec / 2 + 8);
        let (mut p1, mut p2) = (Integer::from(1), Integer::new());
        let (mut q1, mut q2) = (Integer::new(), Integer::from(1));
        let mut n = 0;
        loop {
            let a = self.digit(n).expect("periodic literal has every digit");
            let p = Integer::from(a * &p1) + &p2;
            let q = Integer::from(a * &q1) + &q2;
            p2 = std::mem::replace(&mut p1, p);
            q2 = std::mem::replace(&mut q1, q);
            if q1 > target && n > 0 {
                break;
            }
            n += 1;
        }
        Float::with_val(prec, &Rational::from((p1, q1)))
    }
}

impl fmt::Display for CfLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.a0)?;
        if self.preperiod.is_empty() && self.period.is_empty() {
            return write!(f, "]");
        }
        write!(f, "; ")?;
        let mut first = true;
        for d in &self.preperiod {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
            first = false;
        }
        if !self.period.is_empty() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "(")?;
            for (i, d) in self.period.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{d}")?;
            }
            write!(f, ")")?;
        }
        write!(f, "]")
    }
}

impl FromStr for CfLiteral {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("continued fraction {s:?}: {why}"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let body = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(|| bad("expected [a0; a1,...]"))?;
        let (head, tail) = match body.split_once(';') {
            Some((h, t)) => (h, Some(t)),
            None => (body, None),
        };
        let a0 = Integer::from_str(head).map_err(|_| bad("a0 is not an integer"))?;
        let mut lit = CfLiteral { a0, preperiod: Vec::new(), period: Vec::new() };
        let Some(tail) = tail else { return Ok(lit) };
        if tail.is_empty() {
            return Err(bad("empty digit list after ';'"));
        }
        let (pre, rep) = match tail.find('(') {
            Some(i) => {
                let rep = tail[i..]
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| bad("repetend must be a final (...) group"))?;
                (tail[..i].strip_suffix(',').unwrap_or(&tail[..i]), Some(rep))
            }
            None => (tail, None),
        };
        let parse_digits = |list: &str| -> Result<Vec<Integer>> {
            if list.is_empty() {
                return Ok(Vec::new());
            }
            list.split(',')
                .map(|d| {
                    let v = Integer::from_str(d).map_err(|_| bad("digit is not an integer"))?;
                    if v < 1 {
                        return Err(bad("digits after a0 must be positive"));
                    }
                    Ok(v)
                })
                .collect()
        };
        lit.preperiod = parse_digits(pre)?;
        if let Some(rep) = rep {
            lit.period = parse_digits(rep)?;
            if lit.period.is_empty() {
                return Err(bad("empty repetend"));
            }
        }
        Ok(lit)
    }
}

/// Quadratic irrational `(a + b sqrt(d)) / c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSurd {
    pub a: Integer,
    pub b: Integer,
    pub d: Integer,
    pub c: Integer,
}

impl QuadraticSurd {
    pub fn new(a: Integer, b: Integer, d: Integer, c: Integer) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        if d <= 0 || d.is_perfect_square() || b == 0 {
            return Err(Error::InvalidParameter(format!("sqrt({d}) with coefficient {b} is not irrational")));
        }
        Ok(QuadraticSurd { a, b, d, c })
    }

    pub fn value(&self, prec: u32) -> Float {
        let guard = prec + 32;
        let root = Float::with_val(guard, &self.d).sqrt();
        let num = Float::with_val(guard, &self.a) + root * &self.b;
        Float::with_val(prec, num / &self.c)
    }

    /// Exact periodic expansion, found by tracking the reduced state `(P, Q)`
    /// of `(P + sqrt(D)) / Q` until it repeats.
    pub fn to_cf_literal(&self) -> Result<CfLiteral> {
        let sign = if self.b < 0 { -1 } else { 1 };
        let mut p = Integer::from(&self.a * sign);
        let mut q = Integer::from(&self.c * sign);
        let mut d = Integer::from(self.b.square_ref()) * &self.d;
        if !(&d - Integer::from(p.square_ref())).is_divisible(&q) {
            let qa = Integer::from(q.abs_ref());
            p *= &qa;
            d *= Integer::from(q.square_ref());
            q *= qa;
        }
        let s = Integer::from(d.sqrt_ref());
        let mut seen: HashMap<(Integer, Integer), usize> = HashMap::new();
        let mut digits: Vec<Integer> = Vec::new();
        for step in 0..MAX_SURD_STEPS {
            if let Some(&start) = seen.get(&(p.clone(), q.clone())) {
                return Ok(split_period(digits, start));
            }
            seen.insert((p.clone(), q.clone()), step);
            let num = if q > 0 { Integer::from(&p + &s) } else { Integer::from(&p + &s) + 1 };
            let (a, _) = num.div_rem_floor(q.clone());
            let p_next = Integer::from(&a * &q) - &p;
            let q_next = &d - Integer::from(p_next.square_ref());
            let (q_next, rem) = q_next.div_rem(q.clone());
            debug_assert!(rem == 0);
            digits.push(a);
            p = p_next;
            q = q_next;
        }
        Err(Error::Precision("quadratic surd period not found within step budget".into()))
    }
}

fn split_period(mut seq: Vec<Integer>, start: usize) -> CfLiteral {
    if start == 0 {
        // purely periodic from a0: rotate so the repetend starts at a1
        let a0 = seq[0].clone();
        let mut period: Vec<Integer> = seq.drain(1..).collect();
        period.push(a0.clone());
        return CfLiteral { a0, preperiod: Vec::new(), period };
    }
    let a0 = seq[0].clone();
    let period = seq.split_off(start);
    let preperiod = seq.split_off(1);
    CfLiteral { a0, preperiod, period }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.b < 0 { '-' } else { '+' };
        write!(f, "({}{}{}*sqrt({}))/{}", self.a, sign, Integer::from(self.b.abs_ref()), self.d, self.c)
    }
}

impl FromStr for QuadraticSurd {
    type Err = Error;

    /// Accepts `(a+b*sqrt(d))/c`, `(a-sqrt(d))/c`, `(a-√d)/c`, `(sqrt(d)-a)/c` and
    /// forms without the denominator or the rational part.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("quadratic surd {s:?}: {why}"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let t = t.replace('√', "sqrt");
        let (num, den) = match t.rfind(")/") {
            Some(i) if t.starts_with('(') => (&t[1..i], &t[i + 2..]),
            _ => match t.rsplit_once('/') {
                Some((n, d)) if !n.ends_with(')') || n.starts_with("sqrt") => (n, d),
                _ => (t.as_str(), "1"),
            },
        };
        let c = Integer::from_str(den).map_err(|_| bad("denominator is not an integer"))?;
        let at = num.find("sqrt").ok_or_else(|| bad("missing sqrt"))?;
        let radic = num[at + 4..]
            .strip_prefix('(')
            .and_then(|r| r.split_once(')'))
            .map(|(inside, rest)| (inside.to_string(), rest.to_string()))
            .or_else(|| {
                let rest = &num[at + 4..];
                let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
                Some((rest[..end].to_string(), rest[end..].to_string()))
            })
            .ok_or_else(|| bad("bad radicand"))?;
        let trailing = match radic.1.as_str() {
            "" => None,
            r if r.starts_with(['+', '-']) => {
                let r = r.strip_prefix('+').unwrap_or(r);
                Some(Integer::from_str(r).map_err(|_| bad("unexpected text after the radical"))?)
            }
            _ => return Err(bad("unexpected text after the radical")),
        };
        let d = Integer::from_str(&radic.0).map_err(|_| bad("radicand is not an integer"))?;
        let left = &num[..at];
        let left = left.strip_suffix('*').unwrap_or(left);
        // split `left` into rational part and the signed coefficient of the radical
        let split = left.rfind(['+', '-']).filter(|&i| i > 0 || left.len() == 1);
        let (a_str, coef_str) = match split {
            Some(i) => (&left[..i], &left[i..]),
            None => ("", left),
        };
        let a = match (a_str.is_empty(), trailing) {
            (true, None) => Integer::new(),
            (true, Some(t)) => t,
            (false, None) => Integer::from_str(a_str).map_err(|_| bad("rational part is not an integer"))?,
            (false, Some(_)) => return Err(bad("two rational parts")),
        };
        let b = match coef_str {
            "" | "+" => Integer::from(1),
            "-" => Integer::from(-1),
            other => Integer::from_str(other).map_err(|_| bad("radical coefficient is not an integer"))?,
        };
        QuadraticSurd::new(a, b, d, c)
    }
}

/// A rotation number as supplied by a user or a test.
#[derive(Debug, Clone, PartialEq)]
pub enum Alpha {
    /// Exact rational, e.g. from a decimal literal such as `0.25`.
    Rational(Rational),
    Literal(CfLiteral),
    Surd(QuadraticSurd),
    /// A real known only to its working precision.
    Real(Float),
}

impl Alpha {
    /// Parse a CF literal, a quadratic surd, a fraction `p/q` or a decimal.
    /// Decimals are exact rationals: `0.3` means `3/10`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with('[') {
            return Ok(Alpha::Literal(t.parse()?));
        }
        if t.contains("sqrt") || t.contains('√') {
            return Ok(Alpha::Surd(t.parse()?));
        }
        parse_decimal(t).map(Alpha::Rational)
    }

    pub fn is_rational(&self) -> bool {
        match self {
            Alpha::Rational(_) => true,
            Alpha::Literal(l) => !l.is_periodic(),
            Alpha::Surd(_) => false,
            Alpha::Real(_) => false,
        }
    }

    pub fn value(&self, prec: u32) -> Float {
        match self {
            Alpha::Rational(r) => Float::with_val(prec, r),
            Alpha::Literal(l) => l.value(prec),
            Alpha::Surd(s) => s.value(prec),
            Alpha::Real(x) => Float::with_val(prec, x),
        }
    }

    /// Exact digit pattern when one is known.
    pub fn literal(&self) -> Result<Option<CfLiteral>> {
        Ok(match self {
            Alpha::Rational(r) => {
                let cf = cf_expand_rational(r, usize::MAX);
                Some(CfLiteral::finite(cf.a0, cf.digits))
            }
            Alpha::Literal(l) => Some(l.clone()),
            Alpha::Surd(s) => Some(s.to_cf_literal()?),
            Alpha::Real(_) => None,
        })
    }

    pub fn continued_fraction(&self, max_terms: usize, prec: u32) -> Result<ContinuedFraction> {
        Ok(match self.literal()? {
            Some(l) => l.expand(max_terms),
            None => cf_expand(&self.value(prec), max_terms),
        })
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Rational(r) => write!(f, "{r}"),
            Alpha::Literal(l) => write!(f, "{l}"),
            Alpha::Surd(s) => write!(f, "{s}"),
            Alpha::Real(x) => write!(f, "{}", x.to_string_radix(10, Some(30))),
        }
    }
}

fn parse_decimal(t: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a number: {t:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n = Integer::from_str(n.trim()).map_err(|_| bad())?;
        let d = Integer::from_str(d.trim()).map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::from((n, d)));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, fracd) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && fracd.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(fracd.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{fracd}");
    let mut r = Rational::from(Integer::from_str(&digits).map_err(|_| bad())?);
    let shift = exp - fracd.len() as i32;
    let ten = Integer::from(10);
    if shift >= 0 {
        r *= ten.pow(shift as u32);
    } else {
        r /= ten.pow((-shift) as u32);
    }
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Exact Euclidean expansion of a rational.
pub fn cf_expand_rational(x: &Rational, max_terms: usize) -> ContinuedFraction {
    let mut frac = Rational::new();
    let mut a0 = Integer::new();
    (&mut frac, &mut a0).assign(x.fract_floor_ref());
    let mut digits = Vec::new();
    let mut termination = Termination::Exact;
    while frac != 0 {
        if digits.len() >= max_terms {
            termination = Termination::MaxTerms;
            break;
        }
        let y = Rational::from(frac.recip_ref());
        let mut a = Integer::new();
        (&mut frac, &mut a).assign(y.fract_floor_ref());
        digits.push(a);
    }
    let mut cf = ContinuedFraction { a0, digits, termination };
    cf.canonicalize();
    cf
}

/// Expansion of a real known to `x.prec()` bits.
///
/// The Euclidean algorithm runs exactly on the binary value of `x`; it stops as
/// soon as the current convergent is within `2^(-prec/2)` of `x`, since later
/// digits would describe rounding noise rather than the number.
pub fn cf_expand(x: &Float, max_terms: usize) -> ContinuedFraction {
    let prec = x.prec();
    let exact = x.to_rational().expect("finite input");
    let horizon = Rational::from(1) >> (prec / 2);
    let mut frac = Rational::new();
    let mut a0 = Integer::new();
    (&mut frac, &mut a0).assign(exact.fract_floor_ref());
    let (mut p1, mut p2) = (a0.clone(), Integer::from(1));
    let (mut q1, mut q2) = (Integer::from(1), Integer::new());
    let mut digits = Vec::new();
    let mut termination = Termination::Exact;
    while frac != 0 {
        let err = (&exact - Rational::from((p1.clone(), q1.clone()))).abs();
        if err < horizon {
            termination = Termination::PrecisionHorizon;
            break;
        }
        if digits.len() >= max_terms {
            termination = Termination::MaxTerms;
            break;
        }
        let y = Rational::from(frac.recip_ref());
        let mut a = Integer::new();
        (&mut frac, &mut a).assign(y.fract_floor_ref());
        let p = Integer::from(&a * &p1) + &p2;
        let q = Integer::from(&a * &q1) + &q2;
        p2 = std::mem::replace(&mut p1, p);
        q2 = std::mem::replace(&mut q1, q);
        digits.push(a);
    }
    let mut cf = ContinuedFraction { a0, digits, termination };
    cf.canonicalize();
    cf
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Approximant {
    pub n: usize,
    pub a: Integer,
    pub p: Integer,
    pub q: Integer,
}

impl Approximant {
    pub fn to_rational(&self) -> Rational {
        Rational::from((self.p.clone(), self.q.clone()))
    }
}

/// Rows `0..=N` of convergents `p_n / q_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproximantTable {
    pub rows: Vec<Approximant>,
}

impl ApproximantTable {
    pub fn depth(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn q(&self, n: usize) -> Result<&Integer> {
        self.row(n).map(|r| &r.q)
    }

    pub fn row(&self, n: usize) -> Result<&Approximant> {
        self.rows.get(n).ok_or(Error::Range { index: n, available: self.rows.len() })
    }

    pub fn denominators(&self) -> Vec<Integer> {
        self.rows.iter().map(|r| r.q.clone()).collect()
    }

    /// Checks the recurrence, coprimality and monotonicity invariants.
    pub fn check_invariants(&self) -> bool {
        let (mut q1, mut q2) = (Integer::new(), Integer::from(1));
        for (i, r) in self.rows.iter().enumerate() {
            let expect = Integer::from(&r.a * &q1) + &q2;
            if r.q != expect || r.q <= 0 || Integer::from(r.p.gcd_ref(&r.q)) != 1 {
                return false;
            }
            if i >= 2 && r.q <= q1 {
                return false;
            }
            q2 = std::mem::replace(&mut q1, r.q.clone());
        }
        self.rows.first().is_none_or(|r| r.q == 1)
    }
}

/// Convergents `p_n/q_n` for `n = 0..=depth`.
pub fn approximants(cf: &ContinuedFraction, depth: usize) -> Result<ApproximantTable> {
    if depth > cf.digits.len() {
        return Err(Error::Range { index: depth, available: cf.digits.len() });
    }
    let (mut p1, mut p2) = (Integer::from(1), Integer::new());
    let (mut q1, mut q2) = (Integer::new(), Integer::from(1));
    let mut rows = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let a = cf.digit(n).expect("bounds checked").clone();
        let p = Integer::from(&a * &p1) + &p2;
        let q = Integer::from(&a * &q1) + &q2;
        p2 = std::mem::replace(&mut p1, p.clone());
        q2 = std::mem::replace(&mut q1, q.clone());
        rows.push(Approximant { n, a, p, q });
    }
    Ok(ApproximantTable { rows })
}

/// The classical sandwich `1/(2 q_n q_{n+1}) < |alpha - p_n/q_n| < 1/(q_n q_{n+1})`.
#[derive(Debug, Clone)]
pub struct GapBounds {
    pub lower: Rational,
    pub upper: Rational,
    pub distance: Float,
}

impl GapBounds {
    pub fn holds(&self) -> bool {
        self.distance > self.lower && self.distance < self.upper
    }
}

pub fn gap_bounds(alpha: &Float, table: &ApproximantTable, n: usize) -> Result<GapBounds> {
    let row = table.row(n)?;
    let next = table.row(n + 1)?;
    let qq = Integer::from(&row.q * &next.q);
    let upper = Rational::from((Integer::from(1), qq.clone()));
    let lower = Rational::from((Integer::from(1), qq * 2u32));
    let distance = Float::with_val(alpha.prec(), alpha - &row.to_rational()).abs();
    Ok(GapBounds { lower, upper, distance })
}

#[derive(Debug, Clone)]
pub struct BrunoEvaluation {
    /// `log q_{n+1} / q_n` for `n = 0..=depth`.
    pub terms: Vec<Float>,
    pub partial: Float,
    pub depth: usize,
}

/// `B_N = sum_{n=0}^{N} log q_{n+1} / q_n`.
pub fn bruno_partial(table: &ApproximantTable, depth: usize, prec: u32) -> Result<BrunoEvaluation> {
    table.row(depth + 1)?;
    let mut terms = Vec::with_capacity(depth + 1);
    let mut partial = Float::new(prec);
    for n in 0..=depth {
        let t = mp::ln_integer(prec, &table.rows[n + 1].q) / &table.rows[n].q;
        partial += &t;
        terms.push(t);
    }
    Ok(BrunoEvaluation { terms, partial, depth })
}

/// `F_0 = 1, F_1 = 2, F_{n+1} = F_n + F_{n-1}`.
#[derive(Debug, Clone)]
pub struct FibonacciSequence {
    cur: Integer,
    next: Integer,
}

impl Default for FibonacciSequence {
    fn default() -> Self {
        FibonacciSequence { cur: Integer::from(1), next: Integer::from(2) }
    }
}

impl Iterator for FibonacciSequence {
    type Item = Integer;
    fn next(&mut self) -> Option<Integer> {
        let nn = Integer::from(&self.cur + &self.next);
        let out = std::mem::replace(&mut self.cur, std::mem::replace(&mut self.next, nn));
        Some(out)
    }
}

pub fn fibonacci(n: usize) -> Integer {
    FibonacciSequence::default().nth(n).expect("infinite sequence")
}

/// Partial sums `s1 = sum log F_n / F_n`, `s2 = sum 1/F_n` over `1..=n_max`, with
/// upper bounds for the omitted tails derived from `F_n >= phi^(n-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixConstants {
    pub n_max: usize,
    pub s1: f64,
    pub s2: f64,
    pub tail1: f64,
    pub tail2: f64,
}

/// Upper bounds for `sum_{n > m} 1/F_n` and `sum_{n > m} log F_n / F_n`.
///
/// Needs `m >= 3` so that `phi^(n-1) >= e` on the whole tail, where `log x / x`
/// is decreasing.
pub(crate) fn fibonacci_tail_bounds(m: usize, prec: u32) -> (Float, Float) {
    assert!(m >= 3);
    let phi = (Float::with_val(prec, 5).sqrt() + 1u32) / 2u32;
    let x = Float::with_val(prec, phi.recip_ref());
    let one_minus = Float::with_val(prec, 1u32 - &x);
    let xm = Float::with_val(prec, (&x).pow(m as u32));
    let recip_tail = Float::with_val(prec, &xm / &one_minus);
    let weighted = Float::with_val(prec, &one_minus * m as u32) + &x;
    let log_tail = phi.ln() * xm * weighted / Float::with_val(prec, one_minus.square_ref());
    (recip_tail, log_tail)
}

pub fn appendix_constants(n_max: usize) -> Result<AppendixConstants> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let prec = mp::DEFAULT_PRECISION;
    let mut s1 = Float::new(prec);
    let mut s2 = Float::new(prec);
    // exact terms up to at least index 3 before switching to the geometric bound
    let cut = n_max.max(3);
    let mut extra1 = Float::new(prec);
    let mut extra2 = Float::new(prec);
    for (n, f) in FibonacciSequence::default().enumerate().take(cut + 1).skip(1) {
        let l = mp::ln_integer(prec, &f) / &f;
        let r = Float::with_val(prec, 1) / &f;
        if n <= n_max {
            s1 += l;
            s2 += r;
        } else {
            extra1 += l;
            extra2 += r;
        }
    }
    let (t2, t1) = fibonacci_tail_bounds(cut, prec);
    Ok(AppendixConstants {
        n_max,
        s1: s1.to_f64(),
        s2: s2.to_f64(),
        tail1: (t1 + extra1).to_f64_round(rug::float::Round::Up),
        tail2: (t2 + extra2).to_f64_round(rug::float::Round::Up),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DullLemmaReport {
    pub lambda: f64,
    pub n_max: usize,
    pub decreasing: bool,
    /// First `n` with `log(lambda n^2)/n <= log(lambda (n+1)^2)/(n+1)`.
    pub first_violation: Option<usize>,
}

/// Scans `log(lambda n^2)/n` for `n = 2..=n_max`; it is decreasing exactly when
/// `lambda > 81/64`, the binding comparison being `n = 2` against `n = 3`.
pub fn dull_lemma_check(lambda: f64, n_max: usize) -> DullLemmaReport {
    let term = |n: usize| (lambda * (n as f64) * (n as f64)).ln() / n as f64;
    let first_violation = (2..n_max).find(|&n| term(n + 1) >= term(n));
    DullLemmaReport { lambda, n_max, decreasing: first_violation.is_none(), first_violation }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[u64]) -> Vec<Integer> {
        v.iter().map(|&d| Integer::from(d)).collect()
    }

    fn golden() -> QuadraticSurd {
        "(3-sqrt(5))/2".parse().unwrap()
    }

    #[test]
    fn literal_round_trip_is_exact() {
        for s in ["[0; 2,(1)]", "[0; 2,1000000,(1)]", "[3]", "[-2; 1,5]", "[0; (1,2)]"] {
            let l: CfLiteral = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
        }
        let l: CfLiteral = "[0;2,(1)]".parse().unwrap();
        assert_eq!(l.to_string(), "[0; 2,(1)]");
    }

    #[test]
    fn literal_rejects_garbage() {
        for s in ["0;2", "[0; 0]", "[0; 2,(]", "[x]", "[0; (1),2]", "[0; ()]", "[0;]"] {
            assert!(s.parse::<CfLiteral>().is_err(), "{s}");
        }
    }

    #[test]
    fn surd_expansion_of_golden_mean() {
        let lit = golden().to_cf_literal().unwrap();
        assert_eq!(lit.to_string(), "[0; 2,(1)]");
        let phi: QuadraticSurd = "(1+sqrt(5))/2".parse().unwrap();
        assert_eq!(phi.to_cf_literal().unwrap().to_string(), "[1; (1)]");
        let r2: QuadraticSurd = "sqrt(2)".parse().unwrap();
        assert_eq!(r2.to_cf_literal().unwrap().to_string(), "[1; (2)]");
        let r7: QuadraticSurd = "(0+1*sqrt(7))/1".parse().unwrap();
        assert_eq!(r7.to_cf_literal().unwrap().to_string(), "[2; (1,1,1,4)]");
        let s: QuadraticSurd = "(3-√5)/2".parse().unwrap();
        assert_eq!(s, golden());
        let g: QuadraticSurd = "(sqrt(5)-1)/2".parse().unwrap();
        assert_eq!(g.to_cf_literal().unwrap().to_string(), "[0; (1)]");
        assert!("(1+sqrt(5)-1)/2".parse::<QuadraticSurd>().is_err());
        assert!("sqrt(5)x".parse::<QuadraticSurd>().is_err());
    }

    #[test]
    fn golden_from_binary_real() {
        // x = (3 - sqrt 5)/2 solves x = 1/(3 - x), i.e. 1/(2 + 1/phi)
        let prec = 256;
        let x = golden().value(prec);
        let rhs = Float::with_val(prec, 1) / (Float::with_val(prec, 3) - &x);
        assert!(Float::with_val(prec, &x - &rhs).abs() < 1e-70);
        let cf = cf_expand(&x, 10);
        assert_eq!(cf.a0, 0);
        assert_eq!(cf.digits, ints(&[2, 1, 1, 1, 1, 1, 1, 1, 1, 1]));
        assert_eq!(cf.termination, Termination::MaxTerms);
    }

    #[test]
    fn expansion_never_passes_precision_horizon() {
        let x = golden().value(128);
        let cf = cf_expand(&x, 10_000);
        assert_eq!(cf.termination, Termination::PrecisionHorizon);
        // every emitted digit agrees with the exact pattern
        assert!(cf.digits[1..].iter().all(|d| *d == 1));
        let t = approximants(&cf, cf.len()).unwrap();
        let q = &t.rows.last().unwrap().q;
        assert!(q.significant_bits() <= 64 + 2);
    }

    #[test]
    fn rational_expansions() {
        let cf = cf_expand_rational(&Rational::from((3, 10)), 100);
        assert_eq!((cf.a0.clone(), cf.digits.clone(), cf.exact()), (Integer::new(), ints(&[3, 3]), true));
        let cf = cf_expand_rational(&Rational::from((1, 2)), 100);
        assert_eq!(cf.digits, ints(&[2]));
        assert!(cf.exact());
        let cf = cf_expand(&Float::with_val(64, 0.5), 100);
        assert!(cf.exact());
        assert_eq!(cf.digits, ints(&[2]));
    }

    #[test]
    fn canonical_form_drops_trailing_one() {
        let l: CfLiteral = "[0; 3,1]".parse().unwrap();
        let cf = l.expand(10);
        assert_eq!(cf.digits, ints(&[4]));
        let l: CfLiteral = "[0; 1]".parse().unwrap();
        let cf = l.expand(10);
        assert_eq!((cf.a0, cf.digits.len()), (Integer::from(1), 0));
    }

    #[test]
    fn approximant_examples() {
        let l: CfLiteral = "[0; 2,(1)]".parse().unwrap();
        let cf = l.expand(5);
        assert_eq!(cf.digits, ints(&[2, 1, 1, 1, 1]));
        let t = approximants(&cf, 5).unwrap();
        assert_eq!(t.denominators(), ints(&[1, 2, 3, 5, 8, 13]));
        assert!(t.check_invariants());
        let l: CfLiteral = "[0; 7]".parse().unwrap();
        let t = approximants(&l.expand(1), 1).unwrap();
        assert_eq!((t.rows[1].p.clone(), t.rows[1].q.clone()), (Integer::from(1), Integer::from(7)));
        assert!(matches!(approximants(&l.expand(1), 2), Err(Error::Range { .. })));
    }

    #[test]
    fn gap_bound_examples() {
        let prec = 256;
        let x = golden().value(prec);
        let t = approximants(&golden().to_cf_literal().unwrap().expand(20), 20).unwrap();
        let g = gap_bounds(&x, &t, 1).unwrap();
        assert_eq!((g.lower.clone(), g.upper.clone()), (Rational::from((1, 12)), Rational::from((1, 6))));
        assert!((g.distance.to_f64() - 0.1180339887).abs() < 1e-9);
        assert!(g.holds());
        let g = gap_bounds(&x, &t, 2).unwrap();
        assert_eq!((g.lower.clone(), g.upper.clone()), (Rational::from((1, 30)), Rational::from((1, 15))));
        assert!(matches!(gap_bounds(&x, &t, 20), Err(Error::Range { .. })));
    }

    #[test]
    fn bruno_examples() {
        let l: CfLiteral = "[0; 2]".parse().unwrap();
        let t = approximants(&l.expand(1), 1).unwrap();
        let b = bruno_partial(&t, 0, 128).unwrap();
        assert!((b.partial.to_f64() - 2f64.ln()).abs() < 1e-15);
        let l: CfLiteral = "[0; 2,100,(1)]".parse().unwrap();
        let t = approximants(&l.expand(10), 10).unwrap();
        let b = bruno_partial(&t, 3, 128).unwrap();
        assert!((b.terms[1].to_f64() - (201f64).ln() / 2.0).abs() < 1e-15);
        assert!(bruno_partial(&t, 10, 128).is_err());
    }

    #[test]
    fn fibonacci_indexing() {
        assert_eq!(fibonacci(0), 1);
        assert_eq!(fibonacci(1), 2);
        assert_eq!(fibonacci(5), 13);
    }

    #[test]
    fn appendix_constant_examples() {
        let c = appendix_constants(1).unwrap();
        assert!((c.s1 - 2f64.ln() / 2.0).abs() < 1e-15);
        assert_eq!(c.s2, 0.5);
        let c = appendix_constants(80).unwrap();
        assert!(c.s1 >= 1.96 && c.s1 + c.tail1 < 1.97);
        assert!(c.s2 >= 1.35 && c.s2 + c.tail2 < 1.36);
        assert!(c.tail1 > 0.0 && c.tail1 < 1e-12);
    }

    #[test]
    fn tail_bound_dominates_actual_tail() {
        let prec = 128;
        for m in [3usize, 5, 10, 20] {
            let (t_recip, t_log) = fibonacci_tail_bounds(m, prec);
            let mut a_recip = 0.0;
            let mut a_log = 0.0;
            for f in FibonacciSequence::default().skip(m + 1).take(400) {
                let v = f.to_f64();
                a_recip += 1.0 / v;
                a_log += v.ln() / v;
            }
            assert!(a_recip < t_recip.to_f64(), "m={m}");
            assert!(a_log < t_log.to_f64(), "m={m}");
        }
    }

    #[test]
    fn dull_lemma_examples() {
        assert!(dull_lemma_check(24.0, 10_000).decreasing);
        assert!(dull_lemma_check(2.0, 10_000).decreasing);
        let r = dull_lemma_check(1.0, 10);
        assert_eq!(r.first_violation, Some(2));
        assert!(dull_lemma_check(81.0 / 64.0 + 1e-9, 1000).decreasing);
        assert!(!dull_lemma_check(81.0 / 64.0 - 1e-9, 1000).decreasing);
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_decimal("0.3").unwrap(), Rational::from((3, 10)));
        assert_eq!(parse_decimal("-1.25e-1").unwrap(), Rational::from((-1, 8)));
        assert_eq!(parse_decimal("7/21").unwrap(), Rational::from((1, 3)));
        assert!(parse_decimal("xyz").is_err());
        assert!(parse_decimal(".").is_err());
        assert!(Alpha::parse("0.5").unwrap().is_rational());
        assert!(!Alpha::parse("[0;2,(1)]").unwrap().is_rational());
    }

    #[test]
    fn fraction_validation() {
        assert!(Fraction::new(2, 4).is_err());
        assert!(Fraction::new(1, 0).is_err());
        assert_eq!("1/3".parse::<Fraction>().unwrap().q(), 3);
        assert!(Fraction::new(0, 1).is_ok());
    }
}
