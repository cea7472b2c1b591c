//! Exact univariate polynomials over the rationals, and a multiprecision
//! complex root finder based on shifted QR iteration of the companion matrix.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::mp::Cx;

/// Polynomial with rational coefficients, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_integers(c: &[Integer]) -> Self {
        QPoly::new(c.iter().map(Rational::from).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lc(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn derivative(&self) -> Self {
        QPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| Rational::from(c * i as u32)).collect())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn monic(&self) -> Self {
        match self.lc() {
            None => self.clone(),
            Some(l) => {
                let inv = Rational::from(l.recip_ref());
                QPoly::new(self.coeffs.iter().map(|c| Rational::from(c * &inv)).collect())
            }
        }
    }

    /// Quotient and remainder of Euclidean division.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let Some(n) = self.degree() else { return (QPoly::default(), QPoly::default()) };
        if n < dd {
            return (QPoly::default(), self.clone());
        }
        let inv = Rational::from(d.lc().unwrap().recip_ref());
        let mut r = self.coeffs.clone();
        let mut q = vec![Rational::new(); n - dd + 1];
        for k in (0..=n - dd).rev() {
            let t = Rational::from(&r[k + dd] * &inv);
            if t != 0 {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] -= Rational::from(&t * dc);
                }
            }
            q[k] = t;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`, monic: the same roots, each simple.
    pub fn square_free_part(&self) -> QPoly {
        let g = self.gcd(&self.derivative());
        let (q, r) = self.div_rem(&g);
        debug_assert!(r.is_zero());
        q.monic()
    }

    /// Coefficients as integers, if they all are.
    pub fn to_integers(&self) -> Option<Vec<Integer>> {
        self.coeffs.iter().map(|c| (*c.denom() == 1).then(|| c.numer().clone())).collect()
    }

    pub fn eval_cx(&self, z: &Cx) -> Cx {
        let prec = z.prec();
        let mut acc = Cx::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = &acc * z;
            acc.re += c;
        }
        acc
    }
}

/// `Res(f, g)` by the Euclidean algorithm over Q.
pub fn resultant(f: &QPoly, g: &QPoly) -> Rational {
    if f.is_zero() || g.is_zero() {
        return Rational::new();
    }
    let (mut a, mut b) = (f.clone(), g.clone());
    let mut acc = Rational::from(1);
    loop {
        let m = a.degree().unwrap();
        let n = b.degree().unwrap();
        if n == 0 {
            return acc * Rational::from(b.lc().unwrap().pow(m as i32));
        }
        let (_, r) = a.div_rem(&b);
        let Some(k) = r.degree() else { return Rational::new() };
        if (m * n) % 2 == 1 {
            acc = -acc;
        }
        acc *= Rational::from(b.lc().unwrap().pow((m - k) as i32));
        a = b;
        b = r;
    }
}

/// Polynomial through `(x0 + j, values[j])`, using Newton's forward form.
///
/// Every forward difference above `degree_bound` must vanish; the extra sample
/// points therefore certify the bound rather than assume it.
pub fn interpolate_uniform(x0: &Integer, values: &[Integer], degree_bound: usize) -> Result<QPoly> {
    if values.len() <= degree_bound {
        return Err(Error::InvalidParameter(format!(
            "{} samples cannot determine degree {degree_bound}",
            values.len()
        )));
    }
    let mut diffs = Vec::with_capacity(values.len());
    let mut row: Vec<Integer> = values.to_vec();
    while !row.is_empty() {
        diffs.push(row[0].clone());
        row = row.windows(2).map(|w| Integer::from(&w[1] - &w[0])).collect();
    }
    if let Some(k) = diffs.iter().skip(degree_bound + 1).position(|d| *d != 0) {
        return Err(Error::ResultantDegenerate(format!(
            "forward difference of order {} is nonzero; degree exceeds {degree_bound}",
            k + degree_bound + 1
        )));
    }
    // basis_k(u) = binom(u - x0, k)
    let mut result = vec![Rational::new(); degree_bound + 1];
    let mut basis = vec![Rational::from(1)];
    for (k, d) in diffs.iter().take(degree_bound + 1).enumerate() {
        if *d != 0 {
            for (i, b) in basis.iter().enumerate() {
                result[i] += Rational::from(b * d);
            }
        }
        // basis *= (u - x0 - k) / (k + 1)
        let shift = Rational::from(Integer::from(x0 + k as u32));
        let mut next = vec![Rational::new(); basis.len() + 1];
        for (i, b) in basis.iter().enumerate() {
            next[i + 1] += b;
            next[i] -= Rational::from(b * &shift);
        }
        for c in &mut next {
            *c /= (k + 1) as u32;
        }
        basis = next;
    }
    Ok(QPoly::new(result))
}

fn givens(a: &Cx, b: &Cx) -> (Cx, Cx) {
    let r = Float::with_val(a.prec(), a.norm_sqr() + b.norm_sqr()).sqrt();
    if r.is_zero() {
        return (Cx::one(a.prec()), Cx::zero(a.prec()));
    }
    let inv = r.recip();
    (a.scale(&inv), b.scale(&inv))
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: &Cx, b: &Cx, c: &Cx, d: &Cx) -> Cx {
    let half = (a - d).scale_f64(0.5);
    let disc = &half.square() + &(b * c);
    let root = sqrt_cx(&disc);
    let mean = (a + d).scale_f64(0.5);
    let e1 = &mean + &root;
    let e2 = &mean - &root;
    if e1.dist(d) < e2.dist(d) {
        e1
    } else {
        e2
    }
}

fn sqrt_cx(z: &Cx) -> Cx {
    if z.is_zero() {
        return z.clone();
    }
    let m = z.abs().sqrt();
    let half_arg = z.arg() / 2u32;
    Cx::cis(&half_arg).scale(&m)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift QR with deflation.
fn hessenberg_eigenvalues(mut h: Vec<Vec<Cx>>, prec: u32) -> Result<Vec<Cx>> {
    let n = h.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let eps = Float::with_val(prec, 1) >> (prec - 8);
    let mut hi = n - 1;
    let mut iters = 0usize;
    let budget = 60 * n;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            out.push(h[0][0].clone());
            break;
        }
        // search for a negligible subdiagonal entry
        let mut l = hi;
        while l > 0 {
            let scale = Float::with_val(prec, h[l - 1][l - 1].abs() + h[l][l].abs());
            if h[l][l - 1].abs() <= Float::with_val(prec, &scale * &eps) {
                h[l][l - 1] = Cx::zero(prec);
                break;
            }
            l -= 1;
        }
        if l == hi {
            out.push(h[hi][hi].clone());
            hi -= 1;
            iters = 0;
            continue;
        }
        iters += 1;
        total += 1;
        if total > budget {
            return Err(Error::RootFinder(format!("QR iteration did not converge ({} of {n} roots found)", out.len())));
        }
        let mu = if iters.is_multiple_of(11) {
            // exceptional shift to break cycles
            let bump = h[hi][hi - 1].abs() * 0.75f64;
            &h[hi][hi] + &Cx::from_real(bump)
        } else {
            wilkinson_shift(&h[hi - 1][hi - 1], &h[hi - 1][hi], &h[hi][hi - 1], &h[hi][hi])
        };
        for k in l..=hi {
            h[k][k] = &h[k][k] - &mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(&h[k][k], &h[k + 1][k]);
            let (cc, sc) = (c.conj(), s.conj());
            for j in k..=hi {
                let x = h[k][j].clone();
                let y = h[k + 1][j].clone();
                h[k][j] = &(&cc * &x) + &(&sc * &y);
                h[k + 1][j] = &(&c * &y) - &(&s * &x);
            }
            rots.push((c, s));
        }
        for (off, (c, s)) in rots.iter().enumerate() {
            let k = l + off;
            let sc = s.conj();
            let cc = c.conj();
            for i in l..=(k + 1).min(hi) {
                let x = h[i][k].clone();
                let y = h[i][k + 1].clone();
                h[i][k] = &(&x * c) + &(&y * s);
                h[i][k + 1] = &(&y * &cc) - &(&x * &sc);
            }
        }
        for k in l..=hi {
            h[k][k] = &h[k][k] + &mu;
        }
    }
    Ok(out)
}

/// All complex roots of a square-free polynomial of positive degree.
///
/// Eigenvalues of the companion matrix are computed at `prec` bits and then
/// polished by Newton's method at the same precision; each polished root must
/// bring `|p(u)|` down to a tiny multiple of the coefficient scale.
pub fn complex_roots(p: &QPoly, prec: u32) -> Result<Vec<Cx>> {
    let n = p.degree().ok_or_else(|| Error::RootFinder("zero polynomial".into()))?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = p.monic();
    let c: Vec<Float> = m.coeffs().iter().map(|x| Float::with_val(prec, x)).collect();
    let mut h = vec![vec![Cx::zero(prec); n]; n];
    for i in 1..n {
        h[i][i - 1] = Cx::one(prec);
    }
    for i in 0..n {
        h[i][n - 1] = Cx::from_real(-c[i].clone());
    }
    let approx = hessenberg_eigenvalues(h, prec)?;
    let dp = m.derivative();
    let tiny = Float::with_val(prec, 1) >> (prec - 16);
    let mut roots = Vec::with_capacity(n);
    for mut z in approx {
        for _ in 0..100 {
            let f = m.eval_cx(&z);
            let d = dp.eval_cx(&z);
            if d.is_zero() {
                return Err(Error::RootFinder("derivative vanished during polishing".into()));
            }
            let step = &f / &d;
            z = &z - &step;
            let size = Float::with_val(prec, z.abs() + 1u32);
            if step.abs() <= Float::with_val(prec, &size * &tiny) {
                break;
            }
        }
        roots.push(z);
    }
    // distinct roots must stay distinct after polishing
    for i in 0..roots.len() {
        for j in 0..i {
            let size = Float::with_val(prec, roots[i].abs() + 1u32);
            if roots[i].dist(&roots[j]) <= size * &tiny {
                return Err(Error::RootFinder("two eigenvalues polished to the same root".into()));
            }
        }
    }
    Ok(roots)
}
