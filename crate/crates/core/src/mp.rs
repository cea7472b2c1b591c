//! Multiprecision helpers: constants and a small complex type over [`rug::Float`].
//!
//! Every value carries its own precision. Binary operations produce a result
//! at the precision of the left operand.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};

/// Default working precision in mantissa bits.
pub const DEFAULT_PRECISION: u32 = 256;

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn two_pi(prec: u32) -> Float {
    pi(prec) * 2u32
}

pub fn log2(prec: u32) -> Float {
    Float::with_val(prec, Constant::Log2)
}

/// `2^(-bits)` at the given precision.
pub fn pow2_neg(prec: u32, bits: u32) -> Float {
    let one = Float::with_val(prec, 1);
    one >> bits
}

pub fn ln_integer(prec: u32, n: &Integer) -> Float {
    Float::with_val(prec, n).ln()
}

pub fn rational_to_float(prec: u32, r: &Rational) -> Float {
    Float::with_val(prec, r)
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Float) -> Float {
    let fl = Float::with_val(x.prec(), x.floor_ref());
    let mut f = Float::with_val(x.prec(), x - &fl);
    if f < 0 {
        f += 1u32;
    }
    f
}

/// Complex number with multiprecision parts.
#[derive(Clone, PartialEq)]
pub struct Cx {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e} + {:e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = (self.re.to_f64(), self.im.to_f64());
        if im < 0.0 {
            write!(f, "{re}-{}i", -im)
        } else {
            write!(f, "{re}+{im}i")
        }
    }
}

impl Cx {
    pub fn new(re: Float, im: Float) -> Self {
        Cx { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Cx::new(Float::new(prec), Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        Cx::new(Float::with_val(prec, 1), Float::new(prec))
    }

    pub fn i(prec: u32) -> Self {
        Cx::new(Float::new(prec), Float::with_val(prec, 1))
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Cx::new(Float::with_val(prec, re), Float::with_val(prec, im))
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Cx::new(re, Float::new(prec))
    }

    pub fn from_c64(prec: u32, z: Complex64) -> Self {
        Cx::from_f64(prec, z.re, z.im)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Cx::new(Float::with_val(prec, &self.re), Float::with_val(prec, &self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// `e^{i theta}`.
    pub fn cis(theta: &Float) -> Self {
        let prec = theta.prec();
        let mut s = Float::new(prec);
        let mut c = Float::new(prec);
        (&mut s, &mut c).assign(theta.sin_cos_ref());
        Cx::new(c, s)
    }

    /// `e^{2 i pi t}`, with `t` reduced modulo 1 before the trigonometric call.
    pub fn exp_2pi_i(t: &Float) -> Self {
        let prec = t.prec();
        let theta = frac(t) * two_pi(prec);
        Cx::cis(&theta)
    }

    /// `e^{2 i pi t} - 1` without cancellation: `2i sin(pi t) e^{i pi t}`.
    pub fn exp_2pi_i_minus_one(t: &Float) -> Self {
        let prec = t.prec();
        let mut f = frac(t);
        if f > 0.5 {
            f -= 1u32;
        }
        let half_turn = f * pi(prec);
        let e = Cx::cis(&half_turn);
        let s = Float::with_val(prec, half_turn.sin_ref()) * 2u32;
        // 2i s e = 2s(-e.im + i e.re)
        Cx::new(-(e.im * &s), e.re * s)
    }

    /// Complex exponential.
    pub fn exp(&self) -> Self {
        let m = Float::with_val(self.prec(), self.re.exp_ref());
        let c = Cx::cis(&self.im);
        c.scale(&m)
    }

    pub fn norm_sqr(&self) -> Float {
        let mut n = Float::with_val(self.prec(), self.re.square_ref());
        n += Float::with_val(self.prec(), self.im.square_ref());
        n
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    /// Principal argument in `(-pi, pi]`.
    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn conj(&self) -> Self {
        Cx::new(self.re.clone(), -self.im.clone())
    }

    pub fn scale(&self, s: &Float) -> Self {
        Cx::new(Float::with_val(self.prec(), &self.re * s), Float::with_val(self.prec(), &self.im * s))
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        self.scale(&Float::with_val(self.prec(), s))
    }

    pub fn square(&self) -> Self {
        let prec = self.prec();
        let re = Float::with_val(prec, self.re.square_ref()) - Float::with_val(prec, self.im.square_ref());
        let im = Float::with_val(prec, &self.re * &self.im) * 2u32;
        Cx::new(re, im)
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        Cx::new(Float::with_val(self.prec(), &self.re / &n), -Float::with_val(self.prec(), &self.im / &n))
    }

    pub fn powu(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Cx::one(self.prec());
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = base.square();
            n >>= 1;
        }
        acc
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        Cx::new(self.abs().ln(), self.arg())
    }

    /// All `q` distinct `q`-th roots, ordered by ascending principal argument in `(-pi, pi]`.
    pub fn roots(&self, q: u32) -> Vec<Cx> {
        let prec = self.prec();
        let m = Float::with_val(prec, self.abs().pow(Float::with_val(prec, 1) / q));
        let base = self.arg() / q;
        let step = two_pi(prec) / q;
        let pi = pi(prec);
        let mut out: Vec<(Float, Cx)> = (0..q)
            .map(|k| {
                let mut th = Float::with_val(prec, &base + Float::with_val(prec, &step * k));
                // fold into (-pi, pi]
                while th > pi {
                    th -= two_pi(prec);
                }
                let z = Cx::cis(&th).scale(&m);
                (z.arg(), z)
            })
            .collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        out.into_iter().map(|(_, z)| z).collect()
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// In-place `self += a * b`, using `t` as scratch.
    pub fn add_mul_assign(&mut self, a: &Cx, b: &Cx, t: &mut Float) {
        t.assign(&a.re * &b.re);
        self.re += &*t;
        t.assign(&a.im * &b.im);
        self.re -= &*t;
        t.assign(&a.re * &b.im);
        self.im += &*t;
        t.assign(&a.im * &b.re);
        self.im += &*t;
    }

    pub fn dist(&self, other: &Cx) -> Float {
        (self - other).abs()
    }
}

impl<'a> Add<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn add(self, rhs: &'a Cx) -> Cx {
        let prec = self.prec();
        Cx::new(Float::with_val(prec, &self.re + &rhs.re), Float::with_val(prec, &self.im + &rhs.im))
    }
}

impl<'a> Sub<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn sub(self, rhs: &'a Cx) -> Cx {
        let prec = self.prec();
        Cx::new(Float::with_val(prec, &self.re - &rhs.re), Float::with_val(prec, &self.im - &rhs.im))
    }
}

impl<'a> Mul<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn mul(self, rhs: &'a Cx) -> Cx {
        let prec = self.prec();
        let mut re = Float::with_val(prec, &self.re * &rhs.re);
        re -= Float::with_val(prec, &self.im * &rhs.im);
        let mut im = Float::with_val(prec, &self.re * &rhs.im);
        im += Float::with_val(prec, &self.im * &rhs.re);
        Cx::new(re, im)
    }
}

impl<'a> Div<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn div(self, rhs: &'a Cx) -> Cx {
        self * &rhs.recip()
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx::new(-self.re, -self.im)
    }
}

impl Add for Cx {
    type Output = Cx;
    fn add(self, rhs: Cx) -> Cx {
        &self + &rhs
    }
}

impl Sub for Cx {
    type Output = Cx;
    fn sub(self, rhs: Cx) -> Cx {
        &self - &rhs
    }
}

impl Mul for Cx {
    type Output = Cx;
    fn mul(self, rhs: Cx) -> Cx {
        &self * &rhs
    }
}

impl Div for Cx {
    type Output = Cx;
    fn div(self, rhs: Cx) -> Cx {
        &self / &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_are_sorted_and_exact() {
        let prec = 256;
        let w = Cx::new(Float::with_val(prec, 0), two_pi(prec));
        let r = w.roots(2);
        assert_eq!(r.len(), 2);
        assert!(r[0].arg() < r[1].arg());
        for z in &r {
            let back = z.powu(2);
            assert!(back.dist(&w) < 1e-70);
        }
        // principal root lies at angle pi/4
        let a = r[1].arg().to_f64();
        assert!((a - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn exp_minus_one_matches_direct() {
        let prec = 256;
        for t in [0.1, 0.37, 0.5, 0.999] {
            let t = Float::with_val(prec, t);
            let a = Cx::exp_2pi_i_minus_one(&t);
            let b = &Cx::exp_2pi_i(&t) - &Cx::one(prec);
            assert!(a.dist(&b) < 1e-70);
        }
    }

    #[test]
    fn ln_inverts_exp() {
        let prec = 192;
        let z = Cx::from_f64(prec, -0.3, 1.7);
        let w = z.ln().exp();
        assert!(w.dist(&z) < 1e-50);
    }
}
