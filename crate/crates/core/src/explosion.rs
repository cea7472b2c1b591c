//! Parabolic explosion of the fixed point 0 of `P_alpha(z) = u z + z^2`,
//! `u = e^{2 i pi alpha}`, as `alpha` leaves a rational `p/q`.
//!
//! Writing `alpha = p/q + delta^q`, the `q` fixed points of `P_alpha^q` that leave 0
//! are `chi(delta), chi(zeta delta), ...` with `chi(delta) ~ s delta` for a slope `s`
//! solving `s^q = -2 i pi q / A`, where `A` is the coefficient of `z^{q+1}` in
//! `P_{p/q}^q`.

use std::fmt::Write as _;

use rayon::prelude::*;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::contfrac::{gcd_i64, Fraction};
use crate::error::{Error, Result};
use crate::mp::{self, Cx};
use crate::poly::{self, QPoly};

/// `P_alpha(z) = u z + z^2`, affinely conjugate to `z^2 + c`.
#[derive(Debug, Clone)]
pub struct QuadraticMap {
    pub alpha: Cx,
    pub u: Cx,
    pub c: Cx,
    pub omega0: Cx,
}

impl QuadraticMap {
    pub fn new(alpha: &Cx) -> Self {
        let prec = alpha.prec();
        let turn = Cx::new(
            -Float::with_val(prec, &alpha.im * mp::two_pi(prec)),
            Float::with_val(prec, &alpha.re * mp::two_pi(prec)),
        );
        let u = turn.exp();
        QuadraticMap::from_multiplier(alpha.clone(), u)
    }

    /// Map at `alpha = p/q + delta^q`, computing `u = zeta e^{2 i pi delta^q}` so the
    /// rational part is reduced exactly.
    pub fn exploded(pq: Fraction, delta: &Cx) -> Self {
        let prec = delta.prec();
        let eps = delta.powu(pq.q());
        let zeta = zeta(pq, prec);
        let tp = mp::two_pi(prec);
        let turn = Cx::new(-Float::with_val(prec, &eps.im * &tp), Float::with_val(prec, &eps.re * &tp));
        let u = &zeta * &turn.exp();
        let mut alpha = eps;
        alpha.re += pq.to_float(prec);
        QuadraticMap::from_multiplier(alpha, u)
    }

    fn from_multiplier(alpha: Cx, u: Cx) -> Self {
        let u2 = u.square();
        let c = &u.scale_f64(0.5) - &u2.scale_f64(0.25);
        let omega0 = -u.scale_f64(0.5);
        QuadraticMap { alpha, u, c, omega0 }
    }

    pub fn eval(&self, z: &Cx) -> Cx {
        &(&self.u * z) + &z.square()
    }

    /// `(P^n(z), (P^n)'(z))`.
    pub fn iterate(&self, z: &Cx, n: u32) -> (Cx, Cx) {
        let mut w = z.clone();
        let mut dw = Cx::one(z.prec());
        for _ in 0..n {
            let d = &self.u + &w.scale_f64(2.0);
            dw = &dw * &d;
            w = self.eval(&w);
        }
        (w, dw)
    }
}

/// `e^{2 i pi p/q}`.
pub fn zeta(pq: Fraction, prec: u32) -> Cx {
    let r = Rational::from((pq.p().rem_euclid(pq.q() as i64), pq.q()));
    Cx::exp_2pi_i(&Float::with_val(prec, &r))
}

/// Power series `c_1 z + ... + c_M z^M`.
#[derive(Debug, Clone)]
pub struct TruncatedSeries {
    /// `coefficients[k]` multiplies `z^{k+1}`.
    pub coefficients: Vec<Cx>,
    pub order: usize,
}

impl TruncatedSeries {
    pub fn coeff(&self, k: usize) -> Option<&Cx> {
        k.checked_sub(1).and_then(|i| self.coefficients.get(i))
    }

    pub fn eval(&self, z: &Cx) -> Cx {
        let mut acc = Cx::zero(z.prec());
        for c in self.coefficients.iter().rev() {
            acc = &acc + c;
            acc = &acc * z;
        }
        acc
    }
}

fn series_step(u: &Cx, s: &[Cx], order: usize, prec: u32) -> Vec<Cx> {
    // s has s[k] = coefficient of z^{k+1}; square has z^{i+j+2}
    let mut out: Vec<Cx> = s.iter().map(|c| u * c).collect();
    out.resize(order, Cx::zero(prec));
    let mut t = Float::new(prec);
    for n in 2..=order {
        let mut acc = Cx::zero(prec);
        for i in 1..n {
            let j = n - i;
            if i > s.len() || j > s.len() {
                continue;
            }
            acc.add_mul_assign(&s[i - 1], &s[j - 1], &mut t);
        }
        out[n - 1] = &out[n - 1] + &acc;
    }
    out
}

/// Series of `P_{p/q}^q` about 0, truncated after `z^order`.
pub fn iterate_series(pq: Fraction, order: usize, prec: u32) -> Result<TruncatedSeries> {
    let q = pq.q() as usize;
    if order < q + 1 {
        return Err(Error::InvalidParameter(format!("order {order} must exceed q = {q}")));
    }
    let u = zeta(pq, prec);
    let mut s = vec![Cx::one(prec)];
    for _ in 0..q {
        s = series_step(&u, &s, order, prec);
    }
    let tol = mp::pow2_neg(prec, prec / 2);
    let drift = (&s[0] - &Cx::one(prec)).abs();
    if drift > tol {
        return Err(Error::Precision(format!("linear coefficient drifted by {}", drift.to_f64())));
    }
    for (k, c) in s.iter().enumerate().take(q).skip(1) {
        let m = c.abs();
        if m > tol {
            return Err(Error::Precision(format!("coefficient of z^{} should vanish but is {}", k + 1, m.to_f64())));
        }
    }
    Ok(TruncatedSeries { coefficients: s, order })
}

/// Coefficient of `z^{q+1}` in `P_{p/q}^q`.
pub fn leading_a(pq: Fraction, prec: u32) -> Result<Cx> {
    let s = iterate_series(pq, pq.q() as usize + 1, prec)?;
    let a = s.coefficients[pq.q() as usize].clone();
    if a.abs() < mp::pow2_neg(prec, prec / 2) {
        return Err(Error::Precision("leading coefficient A vanishes to working precision".into()));
    }
    Ok(a)
}

#[derive(Debug, Clone)]
pub struct ExplosionData {
    pub pq: Fraction,
    pub a: Cx,
    pub zeta: Cx,
    /// The `q` roots of `-2 i pi q / A`, by ascending argument.
    pub slopes: Vec<Cx>,
}

impl ExplosionData {
    pub fn new(pq: Fraction, prec: u32) -> Result<Self> {
        let a = leading_a(pq, prec)?;
        let slopes = slopes_from_a(pq, &a);
        Ok(ExplosionData { pq, a, zeta: zeta(pq, prec), slopes })
    }

    /// `-2 i pi q / A`.
    pub fn slope_power(&self) -> Cx {
        slope_power(self.pq, &self.a)
    }
}

fn slope_power(pq: Fraction, a: &Cx) -> Cx {
    let prec = a.prec();
    let w = Cx::new(Float::new(prec), -(mp::two_pi(prec) * pq.q()));
    &w / a
}

fn slopes_from_a(pq: Fraction, a: &Cx) -> Vec<Cx> {
    slope_power(pq, a).roots(pq.q())
}

pub fn explosion_slopes(pq: Fraction, prec: u32) -> Result<Vec<Cx>> {
    Ok(ExplosionData::new(pq, prec)?.slopes)
}

#[derive(Debug, Clone)]
pub struct ChiSample {
    pub delta: Cx,
    pub chi: Cx,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ChiBranch {
    pub pq: Fraction,
    pub slope_index: usize,
    pub samples: Vec<ChiSample>,
}

impl ChiBranch {
    pub fn last(&self) -> Option<&ChiSample> {
        self.samples.last()
    }

    /// Columns `delta_re,delta_im,chi_re,chi_im,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta_re,delta_im,chi_re,chi_im,residual\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e}",
                s.delta.re.to_f64(),
                s.delta.im.to_f64(),
                s.chi.re.to_f64(),
                s.chi.im.to_f64(),
                s.residual
            );
        }
        out
    }
}

/// Continuation settings for [`track_chi`].
#[derive(Debug, Clone, Copy)]
pub struct TrackOptions {
    pub tol: f64,
    pub newton_iterations: usize,
    pub max_halvings: u32,
    /// Refuse any node with `|delta|^q >= radius`, typically the collision radius.
    pub radius_guard: Option<f64>,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions { tol: 1e-12, newton_iterations: 50, max_halvings: 12, radius_guard: None }
    }
}

/// Newton on `G(z) = (P^q(z) - z)/z`, which removes the trivial root at 0.
/// Returns the converged point and the residual `|P^q(z) - z|`.
fn newton_cycle_point(map: &QuadraticMap, q: u32, seed: &Cx, iterations: usize) -> Option<(Cx, Float)> {
    let prec = seed.prec();
    let tiny = mp::pow2_neg(prec, prec - 32);
    let coarse = mp::pow2_neg(prec, prec / 2);
    let mut z = seed.clone();
    let mut previous: Option<Float> = None;
    for _ in 0..iterations {
        let (w, dw) = map.iterate(&z, q);
        let f = &w - &z;
        let mut df = dw;
        df.re -= 1u32;
        // z - G/G' = z - f z / (f' z - f)
        let den = &(&df * &z) - &f;
        if den.is_zero() {
            return None;
        }
        let step = &(&f * &z) / &den;
        z = &z - &step;
        if !z.re.is_finite() || !z.im.is_finite() {
            return None;
        }
        let rel = Float::with_val(prec, step.abs() / z.abs());
        // converged outright, or stalled at the rounding floor of G'
        let stalled = rel <= coarse && previous.as_ref().is_some_and(|p| Float::with_val(prec, p * 0.5f64) <= rel);
        if rel <= tiny || stalled {
            let (w, _) = map.iterate(&z, q);
            return Some((z.clone(), (&w - &z).abs()));
        }
        previous = Some(rel);
    }
    None
}

/// Follows the branch of exploded cycle points with `chi(delta) ~ slopes[slope_index] * delta`
/// along `delta_path`, which should start at or near 0.
pub fn track_chi(
    data: &ExplosionData,
    slope_index: usize,
    delta_path: &[Cx],
    opts: &TrackOptions,
) -> Result<ChiBranch> {
    let q = data.pq.q();
    let slope =
        data.slopes.get(slope_index).ok_or(Error::Range { index: slope_index, available: data.slopes.len() })?;
    let mut branch = ChiBranch { pq: data.pq, slope_index, samples: Vec::with_capacity(delta_path.len()) };
    for (node, target) in delta_path.iter().enumerate() {
        if let Some(radius) = opts.radius_guard {
            let m = target.abs_f64().powi(q as i32);
            if m >= radius {
                return Err(Error::CollisionRadiusExceeded { modulus: m, radius });
            }
        }
        if target.is_zero() {
            branch.samples.push(ChiSample { delta: target.clone(), chi: Cx::zero(target.prec()), residual: 0.0 });
            continue;
        }
        let sample = advance(data, slope, &branch.samples, target, opts, node)?;
        branch.samples.push(sample);
    }
    Ok(branch)
}

fn predict(slope: &Cx, history: &[ChiSample], delta: &Cx) -> Cx {
    match history {
        [.., a, b] if !a.delta.is_zero() => {
            // secant extrapolation in delta
            let den = &b.delta - &a.delta;
            if den.is_zero() {
                b.chi.clone()
            } else {
                let t = &(delta - &b.delta) / &den;
                &b.chi + &(&t * &(&b.chi - &a.chi))
            }
        }
        [.., b] if !b.delta.is_zero() => &b.chi * &(delta / &b.delta),
        _ => slope * delta,
    }
}

fn advance(
    data: &ExplosionData,
    slope: &Cx,
    history: &[ChiSample],
    target: &Cx,
    opts: &TrackOptions,
    node: usize,
) -> Result<ChiSample> {
    let q = data.pq.q();
    let mut local: Vec<ChiSample> = history.iter().rev().take(2).rev().cloned().collect();
    let start = local.last().map(|s| s.delta.clone()).unwrap_or_else(|| Cx::zero(target.prec()));
    let mut pieces = 1u32;
    let mut done = 0u32;
    let mut halvings = 0u32;
    while done < pieces {
        let t = Float::with_val(target.prec(), done + 1) / pieces;
        let delta = &start + &(target - &start).scale(&t);
        let seed = predict(slope, &local, &delta);
        let map = QuadraticMap::exploded(data.pq, &delta);
        let accepted = newton_cycle_point(&map, q, &seed, opts.newton_iterations).filter(|(z, res)| {
            // stay on the branch: the corrector may not wander far from the predictor
            let moved = z.dist(&seed);
            let limit = Float::with_val(z.prec(), seed.abs() * 0.25f64);
            moved <= limit && res.to_f64() <= opts.tol
        });
        match accepted {
            Some((z, res)) => {
                if z.is_zero() || z.abs() <= Float::with_val(z.prec(), delta.abs() * 1e-6f64) {
                    return Err(Error::CollisionWithZero { node });
                }
                local.push(ChiSample { delta, chi: z, residual: res.to_f64() });
                if local.len() > 2 {
                    local.remove(0);
                }
                done += 1;
            }
            None => {
                if halvings >= opts.max_halvings {
                    return Err(Error::NewtonDivergence { node, delta: delta.to_string() });
                }
                halvings += 1;
                pieces *= 2;
                done *= 2;
            }
        }
    }
    Ok(local.pop().expect("at least one accepted step"))
}

/// Straight path `0, delta/steps, ..., delta`.
pub fn ray_path(delta: &Cx, steps: usize) -> Vec<Cx> {
    let steps = steps.max(1);
    (0..=steps).map(|k| delta.scale(&(Float::with_val(delta.prec(), k) / steps as u32))).collect()
}

/// Cycle relation `P_alpha(chi(delta)) = chi(zeta delta)` over the whole fan.
#[derive(Debug, Clone)]
pub struct CycleCheck {
    pub max_error: Float,
    /// `chi_j(delta)` for every slope index.
    pub points: Vec<Cx>,
    pub pairwise_distinct: bool,
}

pub fn verify_cycle_relation(
    data: &ExplosionData,
    delta: &Cx,
    steps: usize,
    opts: &TrackOptions,
) -> Result<CycleCheck> {
    let prec = delta.prec();
    if delta.is_zero() {
        return Ok(CycleCheck {
            max_error: Float::new(prec),
            points: vec![Cx::zero(prec); data.slopes.len()],
            pairwise_distinct: true,
        });
    }
    let rotated = &data.zeta.with_prec(prec) * delta;
    let map = QuadraticMap::exploded(data.pq, delta);
    let results: Vec<Result<(Cx, Float)>> = (0..data.slopes.len())
        .into_par_iter()
        .map(|j| {
            let here = track_chi(data, j, &ray_path(delta, steps), opts)?;
            let there = track_chi(data, j, &ray_path(&rotated, steps), opts)?;
            let a = here.last().expect("nonempty path").chi.clone();
            let b = &there.last().expect("nonempty path").chi;
            let err = map.eval(&a).dist(b);
            Ok((a, err))
        })
        .collect();
    let mut max_error = Float::new(prec);
    let mut points = Vec::with_capacity(results.len());
    for r in results {
        let (z, e) = r?;
        if e > max_error {
            max_error = e;
        }
        points.push(z);
    }
    let scale = Float::with_val(prec, delta.abs()) * 1e-8f64;
    let pairwise_distinct = (0..points.len()).all(|i| (0..i).all(|j| points[i].dist(&points[j]) > scale));
    Ok(CycleCheck { max_error, points, pairwise_distinct })
}

/// `Res_z(F, F')` with `F = P_u^q(z) - z`, for an integer `u`.
fn resultant_at(q: u32, u: &Integer) -> Integer {
    let mut s: Vec<Integer> = vec![Integer::new(), Integer::from(1)];
    for _ in 0..q {
        let mut next = vec![Integer::new(); 2 * s.len() - 1];
        for (i, c) in s.iter().enumerate() {
            next[i] += Integer::from(c * u);
            if *c == 0 {
                continue;
            }
            for (j, d) in s.iter().enumerate() {
                next[i + j] += Integer::from(c * d);
            }
        }
        s = next;
    }
    s[1] -= 1u32;
    let f = QPoly::from_integers(&s);
    let r = poly::resultant(&f, &f.derivative());
    debug_assert!(*r.denom() == 1);
    r.numer().clone()
}

/// Multipliers `u` for which `P_u^q` has a multiple fixed point, as the roots of
/// the square-free part of `Res_z(P_u^q(z) - z, d/dz)`. Depends only on `q`.
#[derive(Debug, Clone)]
pub struct CollisionOracle {
    pub q: u32,
    /// Square-free resultant polynomial in `u`, integer coefficients.
    pub polynomial: QPoly,
    pub roots: Vec<Cx>,
    pub prec: u32,
}

/// Number of evaluation points beyond the expected degree, used to certify it.
const DEGREE_WITNESS_POINTS: usize = 8;

impl CollisionOracle {
    pub fn new(q: u32, prec: u32) -> Result<Self> {
        if q == 0 || q > 6 {
            return Err(Error::InvalidParameter(format!("collision oracle supports 1 <= q <= 6, got {q}")));
        }
        let degree = q as usize * (1usize << q);
        let n = degree + 1 + DEGREE_WITNESS_POINTS;
        let x0 = -(n as i64 / 2);
        let values: Vec<Integer> =
            (0..n as i64).into_par_iter().map(|k| resultant_at(q, &Integer::from(x0 + k))).collect();
        let full = poly::interpolate_uniform(&Integer::from(x0), &values, degree)?;
        if full.is_zero() {
            return Err(Error::ResultantDegenerate("resultant vanishes identically".into()));
        }
        let polynomial = full.square_free_part();
        if polynomial.to_integers().is_none() {
            // the monic square-free part of a monic integer polynomial is integral
            return Err(Error::ResultantDegenerate("square-free part is not integral".into()));
        }
        let roots = poly::complex_roots(&polynomial, prec)?;
        Ok(CollisionOracle { q, polynomial, roots, prec })
    }

    /// Collision radius around `p/q` with witnesses, capped at `search_radius`.
    pub fn estimate(&self, pq: Fraction, search_radius: f64) -> Result<CollisionRadiusEstimate> {
        if pq.q() != self.q {
            return Err(Error::InvalidParameter(format!("oracle built for q = {}, asked about {pq}", self.q)));
        }
        let prec = self.prec;
        let z = zeta(pq, prec);
        let same = mp::pow2_neg(prec, prec / 2);
        let tp = mp::two_pi(prec);
        let mut witnesses: Vec<(f64, Cx)> = Vec::new();
        for u in &self.roots {
            if u.dist(&z) < same {
                continue;
            }
            // alpha - p/q = log(u/zeta)/(2 i pi), principal branch: Re in (-1/2, 1/2]
            let l = (u / &z).ln();
            let w = Cx::new(Float::with_val(prec, &l.im / &tp), -Float::with_val(prec, &l.re / &tp));
            let d = w.abs_f64();
            if d <= search_radius * (1.0 + 1e-12) {
                let mut alpha = w;
                alpha.re += pq.to_float(prec);
                witnesses.push((d, alpha));
            }
        }
        witnesses.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let (r, capped) = match witnesses.first() {
            Some((d, _)) if *d < search_radius => (*d, false),
            _ => (search_radius, true),
        };
        Ok(CollisionRadiusEstimate {
            pq,
            r,
            capped,
            witnesses: witnesses.into_iter().map(|(_, a)| a).collect(),
            method: "resultant-u",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CollisionRadiusEstimate {
    pub pq: Fraction,
    pub r: f64,
    /// True when no witness was found inside the search radius.
    pub capped: bool,
    /// Parameters `alpha` with a multiple fixed point, nearest first.
    pub witnesses: Vec<Cx>,
    pub method: &'static str,
}

impl CollisionRadiusEstimate {
    /// `r(p/q) = R^{1/q}`, the radius in the `delta` plane.
    pub fn delta_radius(&self) -> f64 {
        self.r.powf(1.0 / self.pq.q() as f64)
    }

    pub fn record(&self) -> CollisionRecord {
        let q = self.pq.q() as f64;
        let bound = 1.0 / (q * q * q);
        CollisionRecord {
            p: self.pq.p(),
            q: self.pq.q(),
            r: self.r,
            bound_1_over_q3: bound,
            margin: self.r - bound,
            witnesses: self.witnesses.iter().map(|w| [w.re.to_f64(), w.im.to_f64()]).collect(),
        }
    }
}

/// JSON row for one `p/q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionRecord {
    pub p: i64,
    pub q: u32,
    #[serde(rename = "R")]
    pub r: f64,
    pub bound_1_over_q3: f64,
    pub margin: f64,
    pub witnesses: Vec<[f64; 2]>,
}

pub fn estimate_r(pq: Fraction, search_radius: f64, prec: u32) -> Result<CollisionRadiusEstimate> {
    CollisionOracle::new(pq.q(), prec)?.estimate(pq, search_radius)
}

/// Distance from `p/q` to the Yoccoz disk at `p'/q'`: the disk of radius
/// `y = log 2/(2 pi q')` tangent to the real axis at `p'/q'`.
pub fn yoccoz_bound(pq: Fraction, pq_prime: Fraction) -> f64 {
    let num = (pq_prime.p() as i128 * pq.q() as i128 - pq.p() as i128 * pq_prime.q() as i128).unsigned_abs();
    let d = num as f64 / (pq.q() as f64 * pq_prime.q() as f64);
    yoccoz_distance(d, pq_prime.q())
}

/// `sqrt(d^2 + y^2) - y` written without cancellation.
fn yoccoz_distance(d: f64, q_prime: u32) -> f64 {
    let y = std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI * q_prime as f64);
    d * d / ((d * d + y * y).sqrt() + y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyCase {
    pub p: i64,
    pub q: u32,
    pub p_prime: i64,
    pub q_prime: u32,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyInequalityReport {
    pub q_max: u32,
    pub cases: usize,
    pub violations: Vec<KeyCase>,
    pub min_margin: Option<KeyCase>,
    /// Minimal margin of the elementary worst case `|p'/q' - p/q| = 1/(q q')`.
    pub elementary_min_margin: f64,
    /// `1/q > 1/q^3` for the parabolic-zero case.
    pub parabolic_case_holds: bool,
}

impl KeyInequalityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.parabolic_case_holds && self.elementary_min_margin > 0.0
    }
}

/// Scans `2 <= q <= q_max`, `p` coprime to `q` in `(0, q)`, `q' < q` and `p'` coprime
/// to `q'` in `[0, q']`, checking that the Yoccoz-disk distance exceeds `1/q^3`.
/// `allow_equal_denominator` admits `q' = q`, which is outside the valid range and
/// must produce violations.
pub fn key_inequality_audit(q_max: u32, allow_equal_denominator: bool) -> Result<KeyInequalityReport> {
    if q_max < 2 {
        return Err(Error::InvalidParameter("q_max must be at least 2".into()));
    }
    let per_q: Vec<(usize, Vec<KeyCase>, Option<KeyCase>, f64)> = (2..=q_max)
        .into_par_iter()
        .map(|q| {
            let target = 1.0 / (q as f64).powi(3);
            let top = if allow_equal_denominator { q } else { q - 1 };
            let mut count = 0;
            let mut bad = Vec::new();
            let mut best: Option<KeyCase> = None;
            let mut elementary = f64::INFINITY;
            for qp in 1..=top {
                let e = yoccoz_distance(1.0 / (q as f64 * qp as f64), qp) - target;
                elementary = elementary.min(e);
                for p in (1..q as i64).filter(|&p| gcd_i64(p, q as i64) == 1) {
                    for pp in (0..=qp as i64).filter(|&pp| gcd_i64(pp, qp as i64) == 1) {
                        let pq = Fraction::new(p, q as i64).expect("coprime");
                        let pqp = Fraction::new(pp, qp as i64).expect("coprime");
                        let bound = yoccoz_bound(pq, pqp);
                        let case = KeyCase { p, q, p_prime: pp, q_prime: qp, bound, margin: bound - target };
                        count += 1;
                        if case.margin <= 0.0 {
                            bad.push(case);
                        }
                        if best.is_none_or(|b| case.margin < b.margin) {
                            best = Some(case);
                        }
                    }
                }
            }
            (count, bad, best, elementary)
        })
        .collect();
    let mut report = KeyInequalityReport {
        q_max,
        cases: 0,
        violations: Vec::new(),
        min_margin: None,
        elementary_min_margin: f64::INFINITY,
        parabolic_case_holds: (2..=q_max).all(|q| 1.0 / q as f64 > 1.0 / (q as f64).powi(3)),
    };
    for (count, bad, best, elementary) in per_q {
        report.cases += count;
        report.violations.extend(bad);
        report.elementary_min_margin = report.elementary_min_margin.min(elementary);
        if let Some(b) = best {
            if report.min_margin.is_none_or(|m| b.margin < m.margin) {
                report.min_margin = Some(b);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fr(p: i64, q: i64) -> Fraction {
        Fraction::new(p, q).unwrap()
    }

    #[test]
    fn series_of_trivial_and_period_two() {
        let prec = 256;
        let s = iterate_series(fr(0, 1), 2, prec).unwrap();
        assert!(s.coefficients[0].dist(&Cx::one(prec)) < 1e-70);
        assert!(s.coefficients[1].dist(&Cx::one(prec)) < 1e-70);
        let s = iterate_series(fr(1, 2), 4, prec).unwrap();
        let expect = [1.0, 0.0, -2.0, 1.0];
        for (c, e) in s.coefficients.iter().zip(expect) {
            assert!(c.dist(&Cx::from_f64(prec, e, 0.0)) < 1e-70, "{c:?} vs {e}");
        }
        assert!(iterate_series(fr(1, 2), 2, prec).is_err());
    }

    #[test]
    fn slopes_for_small_denominators() {
        let prec = 256;
        let s = explosion_slopes(fr(0, 1), prec).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].dist(&Cx::new(Float::new(prec), -mp::two_pi(prec))) < 1e-60);
        let s = explosion_slopes(fr(1, 2), prec).unwrap();
        // roots of 2 i pi are +-sqrt(pi) (1 + i)
        let m = mp::pi(prec).sqrt();
        assert!(s[0].dist(&Cx::new(-m.clone(), -m.clone())) < 1e-60);
        assert!(s[1].dist(&Cx::new(m.clone(), m)) < 1e-60);
    }

    #[test]
    fn chi_at_origin_is_zero() {
        let prec = 128;
        let data = ExplosionData::new(fr(1, 2), prec).unwrap();
        let b = track_chi(&data, 0, &[Cx::zero(prec)], &TrackOptions::default()).unwrap();
        assert!(b.samples[0].chi.is_zero());
        let c = verify_cycle_relation(&data, &Cx::zero(prec), 8, &TrackOptions::default()).unwrap();
        assert!(c.max_error.is_zero());
    }

    #[test]
    fn chi_follows_first_order_seed() {
        let prec = 256;
        let data = ExplosionData::new(fr(1, 2), prec).unwrap();
        let opts = TrackOptions { tol: 1e-40, ..Default::default() };
        let delta = Cx::from_f64(prec, 0.25, 0.0);
        let b = track_chi(&data, 1, &ray_path(&delta, 16), &opts).unwrap();
        for s in b.samples.iter().skip(1) {
            assert!(s.residual < 1e-40);
            let lin = &data.slopes[1] * &s.delta;
            // chi - s delta = O(delta^2)
            assert!(s.chi.dist(&lin).to_f64() < 8.0 * s.delta.abs_f64().powi(2));
        }
    }

    #[test]
    fn radius_guard_stops_the_path() {
        let prec = 128;
        let data = ExplosionData::new(fr(1, 2), prec).unwrap();
        let opts = TrackOptions { radius_guard: Some(0.5), ..Default::default() };
        let far = Cx::from_f64(prec, 0.8, 0.0);
        let err = track_chi(&data, 0, &ray_path(&far, 8), &opts).unwrap_err();
        assert!(matches!(err, Error::CollisionRadiusExceeded { .. }));
    }

    #[test]
    fn csv_has_documented_columns() {
        let prec = 128;
        let data = ExplosionData::new(fr(1, 2), prec).unwrap();
        let b = track_chi(&data, 0, &ray_path(&Cx::from_f64(prec, 0.1, 0.0), 2), &TrackOptions::default()).unwrap();
        let csv = b.to_csv();
        assert!(csv.starts_with("delta_re,delta_im,chi_re,chi_im,residual\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn collision_radius_for_q_one_and_two() {
        let prec = 256;
        let e = estimate_r(fr(0, 1), 1.0, prec).unwrap();
        assert_eq!(e.r, 1.0);
        assert!(e.capped);
        let e = estimate_r(fr(1, 2), 1.0, prec).unwrap();
        assert!((e.r - 0.5).abs() < 1e-12);
        let expected = (0.25 + (3f64.ln() / (2.0 * std::f64::consts::PI)).powi(2)).sqrt();
        assert!(e
            .witnesses
            .iter()
            .any(|w| ((&w.with_prec(prec) - &Cx::from_f64(prec, 0.5, 0.0)).abs_f64() - expected).abs() < 1e-12));
    }

    #[test]
    fn oracle_polynomial_for_period_two() {
        // square-free part of (u-3)^3 (u-1)^2 (u+1)^3
        let o = CollisionOracle::new(2, 128).unwrap();
        let ints = o.polynomial.to_integers().unwrap();
        assert_eq!(ints, [3, -1, -3, 1].map(Integer::from).to_vec());
    }

    #[test]
    fn yoccoz_examples() {
        assert!((yoccoz_bound(fr(1, 2), fr(0, 1)) - 0.40171).abs() < 1e-5);
        assert!((yoccoz_bound(fr(1, 3), fr(1, 2)) - 0.120397).abs() < 1e-5);
        assert_eq!(yoccoz_bound(fr(1, 2), fr(1, 2)), 0.0);
    }

    #[test]
    fn key_inequality_small_scan() {
        let r = key_inequality_audit(2, false).unwrap();
        assert!(r.holds());
        let m = r.min_margin.unwrap();
        assert!((m.margin - (0.401707 - 0.125)).abs() < 1e-5);
        let bad = key_inequality_audit(2, true).unwrap();
        assert!(!bad.violations.is_empty());
    }
}
