//! Siegel radius from the linearizer of `P_alpha(z) = lambda z + z^2`.
//!
//! The linearizer `h(w) = w + h_2 w^2 + ...` solves `h(lambda w) = P_alpha(h(w))`,
//! i.e. `h_n (lambda^n - lambda) = sum_{i+j=n} h_i h_j`. Its radius of convergence is
//! the conformal radius `r(alpha)` of the Siegel disk (a classical identity, taken
//! here as an assumption, not re-derived).

use std::fmt::Write as _;

use rayon::prelude::*;
use rug::float::Round;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::contfrac::{self, Alpha};
use crate::error::{Error, Result};
use crate::mp::{self, Cx};

/// Convolutions longer than this are split across threads.
const PARALLEL_CONVOLUTION: usize = 384;

#[derive(Debug, Clone)]
pub struct Linearizer {
    pub lambda: Cx,
    /// `h_1..h_N`; `coefficients[0] = 1`.
    pub coefficients: Vec<Cx>,
    pub precision: u32,
}

fn half_convolution(h: &[Cx], n: usize, prec: u32) -> Cx {
    // sum over 1 <= i < n - i of h_i h_{n-i}
    let m = (n - 1) / 2;
    let term = |acc: &mut (Cx, Float), i: usize| {
        let (c, t) = acc;
        c.add_mul_assign(&h[i - 1], &h[n - i - 1], t);
    };
    if m < PARALLEL_CONVOLUTION {
        let mut acc = (Cx::zero(prec), Float::new(prec));
        for i in 1..=m {
            term(&mut acc, i);
        }
        return acc.0;
    }
    (1..m + 1)
        .into_par_iter()
        .with_min_len(128)
        .fold(
            || (Cx::zero(prec), Float::new(prec)),
            |mut acc, i| {
                term(&mut acc, i);
                acc
            },
        )
        .map(|(c, _)| c)
        .reduce(|| Cx::zero(prec), |a, b| &a + &b)
}

/// Coefficients `h_1..h_N` of the linearizer at rotation number `alpha`.
///
/// The small divisor is evaluated as `lambda (e^{2 i pi (n-1) alpha} - 1)` with the
/// angle reduced mod 1 first, so it keeps full relative precision however small it is.
/// A divisor below `2^(-prec/2)` aborts with [`Error::DivisorUnderflow`].
pub fn linearizer_coeffs(alpha: &Float, n_max: usize, prec: u32) -> Result<Linearizer> {
    if n_max < 2 {
        return Err(Error::InvalidParameter("series length must be at least 2".into()));
    }
    let alpha = Float::with_val(prec, alpha);
    let lambda = Cx::exp_2pi_i(&alpha);
    let floor = mp::pow2_neg(prec, prec / 2);
    let mut h: Vec<Cx> = Vec::with_capacity(n_max);
    h.push(Cx::one(prec));
    for n in 2..=n_max {
        let turn = Float::with_val(prec, &alpha * (n - 1) as u32);
        let divisor = &lambda * &Cx::exp_2pi_i_minus_one(&turn);
        if divisor.abs() < floor {
            return Err(Error::DivisorUnderflow { n });
        }
        let mut s = half_convolution(&h, n, prec).scale_f64(2.0);
        if n % 2 == 0 {
            let mid = &h[n / 2 - 1];
            s = &s + &mid.square();
        }
        h.push(&s / &divisor);
    }
    Ok(Linearizer { lambda, coefficients: h, precision: prec })
}

impl Linearizer {
    /// Wraps given coefficients, e.g. synthetic test vectors.
    pub fn from_coefficients(lambda: Cx, coefficients: Vec<Cx>) -> Self {
        let precision = lambda.prec();
        Linearizer { lambda, coefficients, precision }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `log |h_n|`, or `-inf` for a zero coefficient.
    pub fn log_abs(&self, n: usize) -> f64 {
        let c = &self.coefficients[n - 1];
        if c.is_zero() {
            return f64::NEG_INFINITY;
        }
        c.abs().ln().to_f64()
    }

    pub fn eval(&self, w: &Cx) -> Cx {
        let mut acc = Cx::zero(w.prec());
        for c in self.coefficients.iter().rev() {
            acc = &acc + c;
            acc = &acc * w;
        }
        acc
    }

    /// `|h(lambda w) - lambda h(w) - h(w)^2|`.
    pub fn functional_residual(&self, w: &Cx) -> Float {
        let hw = self.eval(w);
        let lhs = self.eval(&(&self.lambda * w));
        let rhs = &(&self.lambda * &hw) + &hw.square();
        lhs.dist(&rhs)
    }

    /// Rows `n,log_abs_h` for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,log_abs_h\n");
        for n in 1..=self.len() {
            let _ = writeln!(out, "{n},{:e}", self.log_abs(n));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusMethod {
    Hadamard,
    TailFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    /// The reported radius (the Hadamard estimate).
    pub r: f64,
    pub method: RadiusMethod,
    pub hadamard: f64,
    pub tail_fit: f64,
    /// Inclusive index range `[start, end]` of the tail window.
    pub window: (usize, usize),
    /// `|hadamard - tail_fit| / hadamard`.
    pub spread: f64,
    /// Set when the spread exceeds 10%.
    pub unconverged: bool,
}

/// Minimum number of indices in the tail window.
pub const MIN_WINDOW: usize = 100;

/// Radius of convergence from the last quartile of coefficients: the Hadamard
/// estimate `1/max |h_n|^{1/n}` and `exp(-slope)` of a least-squares line through
/// `log |h_n|`.
pub fn radius_estimate(lin: &Linearizer) -> Result<RadiusEstimate> {
    let n = lin.len();
    let width = (n / 4).max(MIN_WINDOW);
    if n < width + 1 || n < MIN_WINDOW + 1 {
        return Err(Error::InvalidParameter(format!("{n} coefficients leave no tail window of {MIN_WINDOW} points")));
    }
    let start = n - width + 1;
    let logs: Vec<(f64, f64)> =
        (start..=n).map(|k| (k as f64, lin.log_abs(k))).filter(|(_, l)| l.is_finite()).collect();
    if logs.len() < 2 {
        return Err(Error::Precision("tail window has no nonzero coefficients".into()));
    }
    let root_max = logs.iter().map(|(k, l)| l / k).fold(f64::NEG_INFINITY, f64::max);
    let hadamard = (-root_max).exp();
    let m = logs.len() as f64;
    let (sx, sy) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    let tail_fit = (-(sxy / sxx)).exp();
    let spread = (hadamard - tail_fit).abs() / hadamard;
    Ok(RadiusEstimate {
        r: hadamard,
        method: RadiusMethod::Hadamard,
        hadamard,
        tail_fit,
        window: (start, n),
        spread,
        unconverged: spread > 0.10,
    })
}

pub fn siegel_radius(alpha: &Float, n_max: usize, prec: u32) -> Result<(Linearizer, RadiusEstimate)> {
    let lin = linearizer_coeffs(alpha, n_max, prec)?;
    let est = radius_estimate(&lin)?;
    Ok((lin, est))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub alpha: String,
    pub depth: usize,
    #[serde(rename = "B_partial")]
    pub b_partial: f64,
    /// Rigorous upper bound for the omitted Bruno terms, when the expansion is
    /// known to be eventually periodic.
    pub tail_bound: Option<f64>,
    pub tail_note: String,
    pub log_r: f64,
    /// `B_partial + log_r`.
    pub total: f64,
    /// `16 - total - tail_bound`.
    pub margin_vs_16: f64,
    pub radius: RadiusEstimate,
    pub residual: f64,
}

/// Upper bound on `sum_{n > depth} log q_{n+1}/q_n` given `Q = q_{depth+1}` and a
/// bound `A` on every later digit.
///
/// Uses `q_{n+1} <= (A + 1) q_n`, `q_{depth+1+k} >= Q phi^{k-1}` and that
/// `(log x + c)/x` decreases for `x >= e^{1-c}`.
pub fn bruno_tail_bound(q_next: &Integer, max_digit: &Integer, prec: u32) -> Result<f64> {
    let qf = Float::with_val(prec, q_next);
    let phi = (Float::with_val(prec, 5).sqrt() + 1u32) / 2u32;
    let x = Float::with_val(prec, phi.recip_ref());
    let c = Float::with_val(prec, Integer::from(max_digit + 1u32)).ln();
    let y0 = Float::with_val(prec, &qf / &phi);
    let knee = Float::with_val(prec, 1u32 - Float::with_val(prec, &c)).exp();
    if y0 < knee {
        return Err(Error::InvalidParameter("tail bound needs a larger depth".into()));
    }
    let log_phi = Float::with_val(prec, phi.ln_ref());
    let big_l = Float::with_val(prec, qf.ln_ref()) - &log_phi + &c;
    let one_minus = Float::with_val(prec, 1u32 - &x);
    let sum = Float::with_val(prec, &big_l / &one_minus)
        + Float::with_val(prec, &log_phi * &x) / Float::with_val(prec, one_minus.square_ref());
    let bound = sum * &phi / &qf;
    // outward rounding margin
    Ok(bound.to_f64_round(Round::Up) * (1.0 + 1e-12))
}

/// `B_partial + log r` with the Bruno partial sum to `depth` and the radius from
/// `series_n` linearizer coefficients.
pub fn theorem_check(alpha: &Alpha, depth: usize, series_n: usize, prec: u32) -> Result<TheoremReport> {
    theorem_check_with_series(alpha, depth, series_n, prec).map(|(report, _)| report)
}

/// [`theorem_check`], also returning the linearizer it was computed from.
pub fn theorem_check_with_series(
    alpha: &Alpha,
    depth: usize,
    series_n: usize,
    prec: u32,
) -> Result<(TheoremReport, Linearizer)> {
    if alpha.is_rational() {
        return Err(Error::RationalInput(alpha.to_string()));
    }
    let literal = alpha.literal()?;
    let cf = alpha.continued_fraction(depth + 1, prec)?;
    let d = cf.len().min(depth + 1);
    if d < 1 {
        return Err(Error::Precision("no continued-fraction digits at this precision".into()));
    }
    let used = d - 1;
    let table = contfrac::approximants(&cf, d)?;
    let bruno = contfrac::bruno_partial(&table, used, prec)?;
    let (tail_bound, tail_note) = match &literal {
        Some(l) if l.is_periodic() => {
            let a = l.max_digit_after(used + 1).expect("periodic tail");
            let b = bruno_tail_bound(table.q(used + 1)?, &a, prec)?;
            (Some(b), format!("rigorous tail bound for n > {used} from the periodic expansion"))
        }
        _ => (None, format!("truncated after n = {used}; no rigorous tail bound for this input")),
    };
    let value = alpha.value(prec);
    let (lin, radius) = siegel_radius(&value, series_n, prec)?;
    let w = Cx::from_f64(prec, radius.r / 2.0, 0.0);
    let residual = lin.functional_residual(&w).to_f64();
    let b_partial = bruno.partial.to_f64();
    let log_r = radius.r.ln();
    let total = b_partial + log_r;
    let report = TheoremReport {
        alpha: alpha.to_string(),
        depth: used,
        b_partial,
        tail_bound,
        tail_note,
        log_r,
        total,
        margin_vs_16: 16.0 - total - tail_bound.unwrap_or(0.0),
        radius,
        residual,
    };
    Ok((report, lin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn second_coefficient_is_inverse_divisor() {
        let prec = 128;
        let alpha = Float::with_val(prec, 0.123456);
        let lin = linearizer_coeffs(&alpha, 4, prec).unwrap();
        let l = &lin.lambda;
        let expect = (&l.square() - l).recip();
        assert!(lin.coefficients[1].dist(&expect) < 1e-35);
    }

    #[test]
    fn quarter_turn_underflows_at_fifth_coefficient() {
        let prec = 128;
        let alpha = Float::with_val(prec, 0.25);
        let lin = linearizer_coeffs(&alpha, 4, prec).unwrap();
        let h2 = Cx::from_f64(prec, -0.5, 0.5);
        assert!(lin.coefficients[1].dist(&h2) < 1e-35);
        // lambda^5 = lambda is the first collision for lambda = i
        assert_eq!(linearizer_coeffs(&alpha, 10, prec).unwrap_err(), Error::DivisorUnderflow { n: 5 });
    }

    #[test]
    fn geometric_vector_has_known_radius() {
        let prec = 64;
        let coeffs: Vec<Cx> = (1..=400).map(|n| Cx::from_real(Float::with_val(prec, 3).pow(n as u32))).collect();
        let lin = Linearizer::from_coefficients(Cx::one(prec), coeffs);
        let est = radius_estimate(&lin).unwrap();
        assert!((est.hadamard - 1.0 / 3.0).abs() < 1e-6);
        assert!((est.tail_fit - 1.0 / 3.0).abs() < 1e-6);
        assert!(est.spread < 1e-6);
        assert_eq!(est.window, (301, 400));
    }

    #[test]
    fn short_series_has_no_window() {
        let prec = 64;
        let lin = Linearizer::from_coefficients(Cx::one(prec), vec![Cx::one(prec); 50]);
        assert!(radius_estimate(&lin).is_err());
    }

    #[test]
    fn near_half_underflows_at_low_precision() {
        let a = contfrac::Alpha::parse("0.50000000000000000001").unwrap();
        let x = a.value(64);
        assert!(matches!(linearizer_coeffs(&x, 100, 64), Err(Error::DivisorUnderflow { .. })));
    }

    #[test]
    fn tail_bound_dominates_golden_tail() {
        // golden mean: q_n are the shifted Fibonacci numbers, every digit after a1 is 1
        let prec = 128;
        let depth = 10;
        let q_next = contfrac::fibonacci(depth + 1);
        let bound = bruno_tail_bound(&q_next, &Integer::from(1), prec).unwrap();
        let actual: f64 = (depth + 1..depth + 200)
            .map(|n| {
                let a = contfrac::fibonacci(n).to_f64();
                let b = contfrac::fibonacci(n + 1).to_f64();
                b.ln() / a
            })
            .sum();
        assert!(actual < bound, "{actual} vs {bound}");
        assert!(bound < 10.0 * actual);
    }

    #[test]
    fn rational_alpha_is_rejected() {
        let a = Alpha::parse("1/4").unwrap();
        assert!(matches!(theorem_check(&a, 10, 200, 128), Err(Error::RationalInput(_))));
    }
}
