//! Poincaré densities of model domains and the conformal-radius bounds built on them.
//!
//! Everything here is closed form and runs in `f64`. A density `rho_U` is the
//! coefficient of the complete curvature -1 metric, normalized so that the unit
//! disk has `rho = 2/(1 - |z|^2)`; then `rad(U) = 2/rho_U(0)`.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, LN_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityModel {
    UnitDisk,
    /// `D* = D \ {0}`.
    PuncturedUnitDisk,
    /// `{0 < |w| < eps}`.
    EpsPuncturedDisk(f64),
    /// `{|z| < rho}`.
    Ball(f64),
    /// `D \ {a}`, handled by pulling back `D*` along `z -> (z - a)/(1 - conj(a) z)`.
    DiskMinusPoint(Complex64),
}

impl DensityModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DensityModel::UnitDisk | DensityModel::PuncturedUnitDisk => true,
            DensityModel::EpsPuncturedDisk(e) => e > 0.0 && e < 1.0,
            DensityModel::Ball(r) => r > 0.0 && r.is_finite(),
            DensityModel::DiskMinusPoint(a) => a.norm() > 0.0 && a.norm() < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self:?}")))
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        match *self {
            DensityModel::UnitDisk => r < 1.0,
            DensityModel::PuncturedUnitDisk => r > 0.0 && r < 1.0,
            DensityModel::EpsPuncturedDisk(e) => r > 0.0 && r < e,
            DensityModel::Ball(rho) => r < rho,
            DensityModel::DiskMinusPoint(a) => r < 1.0 && z != a,
        }
    }
}

fn punctured(w: f64) -> f64 {
    1.0 / (w * (-w.ln()))
}

/// Poincaré density of `model` at `z`.
pub fn density(model: DensityModel, z: Complex64) -> Result<f64> {
    model.validate()?;
    if !model.contains(z) {
        return Err(Error::Domain(format!("z = {z} for {model:?}")));
    }
    let r = z.norm();
    Ok(match model {
        DensityModel::UnitDisk => 2.0 / (1.0 - r * r),
        DensityModel::PuncturedUnitDisk => punctured(r),
        DensityModel::EpsPuncturedDisk(e) => 1.0 / (r * (e / r).ln()),
        DensityModel::Ball(rho) => 2.0 * rho / (rho * rho - r * r),
        DensityModel::DiskMinusPoint(a) => {
            let den = Complex64::new(1.0, 0.0) - a.conj() * z;
            let t = (z - a) / den;
            let dt = (1.0 - a.norm_sqr()) / den.norm_sqr();
            punctured(t.norm()) * dt
        }
    })
}

pub fn rad_from_density(rho0: f64) -> Result<f64> {
    if rho0 > 0.0 && rho0.is_finite() {
        Ok(2.0 / rho0)
    } else {
        Err(Error::InvalidParameter(format!("density {rho0} must be positive")))
    }
}

/// Conformal radius at 0 of `D \ {a}`: `2 a log(1/a) / (1 - a^2)`.
pub fn disk_minus_point_radius(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("a = {a} must lie in (0, 1)")));
    }
    Ok(2.0 * a * (-a.ln()) / (1.0 - a * a))
}

/// Which inequality a logarithmic radius bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Koebe,
    Douady,
    MovingRange,
    ClosedForm,
    Inclusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusBound {
    pub log_value: f64,
    pub provenance: Provenance,
}

impl RadiusBound {
    fn new(log_value: f64, provenance: Provenance) -> Result<Self> {
        if log_value.is_finite() {
            Ok(RadiusBound { log_value, provenance })
        } else {
            Err(Error::Precision(format!("non-finite {provenance:?} bound")))
        }
    }
}

/// `z (4/(1 - z^q)^2)^{1/q}` with the principal `q`-th root.
///
/// Since `phi_q(z)^q = phi_1(z^q)` and `phi_1` is four times the Koebe function, the
/// image is the plane minus the `q` rays `{w : w^q <= -1}`. Those rays sit at angles
/// `(2k + 1) pi / q`, a rotation by `pi/q` of the rays through the `q`-th roots of
/// unity; neither the derivative at 0 nor the rotation symmetry depends on this.
pub fn phi_q(z: Complex64, q: u32) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let w = one - z.powu(q);
    let inner = 4.0 / (w * w);
    z * (inner.ln() / q as f64).exp()
}

/// `phi_q'(0)` as the mean of `phi_q(z)/z` over `|z| = radius`, by the trapezoid
/// rule with `n` nodes (spectrally accurate for this analytic integrand).
pub fn phi_q_derivative_at_zero(q: u32, n: usize, radius: f64) -> Complex64 {
    (0..n)
        .map(|k| {
            let z = Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64);
            phi_q(z, q) / z
        })
        .sum::<Complex64>()
        / n as f64
}

/// `(1 - tan(pi/4q)) / (1 + tan(pi/4q))`.
pub fn rho_q(q: u32) -> Result<f64> {
    if q == 0 {
        return Err(Error::InvalidParameter("q must be positive".into()));
    }
    let t = (FRAC_PI_4 / q as f64).tan();
    Ok((1.0 - t) / (1.0 + t))
}

/// `C = log 4 + 2 log(1 + sqrt 2)`.
pub fn douady_constant() -> f64 {
    2.0 * LN_2 + 2.0 * std::f64::consts::SQRT_2.ln_1p()
}

/// `log r + C/q`, an upper bound for `log rad(D \ r U_q)`.
pub fn douady_bound(q: u32, r: f64) -> Result<RadiusBound> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("q = {q} must be at least 2")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must lie in (0, 1)")));
    }
    RadiusBound::new(r.ln() + douady_constant() / q as f64, Provenance::Douady)
}

/// `log((1 + tan x)/(1 - tan x))`, convex on `[0, pi/8]`.
pub fn slit_f(x: f64) -> f64 {
    let t = x.tan();
    ((1.0 + t) / (1.0 - t)).ln()
}

/// The two steps behind the constant `C` at a given `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DouadyChain {
    pub q: u32,
    /// `log 4/q + f(pi/4q) = log(rad(Omega_q)/rho_q)`.
    pub exact: f64,
    /// `f(pi/4q) <= (2/q) f(pi/8)`.
    pub convexity_holds: bool,
    /// `exact <= C/q`.
    pub bound_holds: bool,
}

pub fn douady_chain(q: u32) -> Result<DouadyChain> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("q = {q} must be at least 2")));
    }
    let qf = q as f64;
    let fx = slit_f(FRAC_PI_4 / qf);
    let exact = 2.0 * LN_2 / qf + fx;
    let slack = 1e-15;
    Ok(DouadyChain {
        q,
        exact,
        convexity_holds: fx <= 2.0 / qf * slit_f(FRAC_PI_8) + slack,
        bound_holds: exact <= douady_constant() / qf + slack,
    })
}

/// `-log q1 + log(8 pi)` bounding `log rad(V_0)` for `alpha0 in (0, 1/2)`.
pub fn koebe_v0_bound(alpha0: f64, q1: u64) -> Result<RadiusBound> {
    if !(alpha0 > 0.0 && alpha0 < 0.5) {
        return Err(Error::InvalidParameter(format!("alpha0 = {alpha0} must lie in (0, 1/2)")));
    }
    if q1 != (1.0 / alpha0).floor() as u64 {
        return Err(Error::InvalidParameter(format!("q1 = {q1} is not floor(1/alpha0)")));
    }
    RadiusBound::new(-(q1 as f64).ln() + (8.0 * PI).ln(), Provenance::Koebe)
}

/// `log|1 - e^{2 i pi a}| < log(2 pi a) < -log q1 + log(2 pi)`.
pub fn koebe_chain_holds(alpha0: f64, q1: u64) -> bool {
    let chord = (2.0 * (PI * alpha0).sin()).ln();
    let arc = (2.0 * PI * alpha0).ln();
    chord < arc && arc < -(q1 as f64).ln() + (2.0 * PI).ln()
}

/// The curve `y = (1/2 pi) log cos(2 pi x)`, defined for `x` within 1/4 of an integer.
#[derive(Debug, Clone, Copy, Default)]
pub struct BCurve;

impl BCurve {
    pub fn f(&self, x: f64) -> Option<f64> {
        let y = x - x.round();
        if y.abs() >= 0.25 {
            return None;
        }
        // log cos(2 pi y) = log(1 - 2 sin^2(pi y)), accurate near y = 0
        let s = (PI * y).sin();
        Some((-2.0 * s * s).ln_1p() / (2.0 * PI))
    }

    /// `g(x) = x^2 + f(x - x^2)`, negative on `(0, 1/2)`.
    pub fn g(&self, x: f64) -> Option<f64> {
        self.f(x - x * x).map(|v| x * x + v)
    }

    /// Euclidean distance from the real point `c` to the curve, using the
    /// branches over the integers nearest `c`.
    pub fn distance_from(&self, c: f64) -> f64 {
        let k0 = c.floor() as i64;
        let mut best = f64::INFINITY;
        for k in [k0 - 1, k0, k0 + 1, k0 + 2] {
            let dist = |x: f64| {
                let y = self.f(x).unwrap_or(f64::NEG_INFINITY);
                (x - c).hypot(y)
            };
            let (lo, hi) = (k as f64 - 0.25, k as f64 + 0.25);
            let n = 4000;
            let mut arg = lo;
            let mut val = f64::INFINITY;
            for i in 1..n {
                let x = lo + (hi - lo) * i as f64 / n as f64;
                let d = dist(x);
                if d < val {
                    val = d;
                    arg = x;
                }
            }
            let h = (hi - lo) / n as f64;
            let (mut a, mut b) = ((arg - h).max(lo + 1e-15), (arg + h).min(hi - 1e-15));
            let ratio = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..100 {
                let x1 = b - ratio * (b - a);
                let x2 = a + ratio * (b - a);
                if dist(x1) < dist(x2) {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            best = best.min(val).min(dist(0.5 * (a + b)));
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityScan {
    pub violations: usize,
    /// Smallest `(rhs - lhs) / max(1, |rhs|)` over the grid.
    pub min_slack: f64,
}

impl InequalityScan {
    fn new() -> Self {
        InequalityScan { violations: 0, min_slack: f64::INFINITY }
    }

    /// Record `lhs < rhs`; a violation is an excess beyond `tol` in relative terms.
    fn check(&mut self, lhs: f64, rhs: f64, tol: f64) {
        let scale = rhs.abs().max(1.0);
        let slack = (rhs - lhs) / scale;
        if !(slack >= -tol) {
            self.violations += 1;
        }
        self.min_slack = self.min_slack.min(slack);
    }

    fn merge(mut self, o: InequalityScan) -> Self {
        self.violations += o.violations;
        self.min_slack = self.min_slack.min(o.min_slack);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BCurveAudit {
    pub grid_size: usize,
    pub tolerance: f64,
    /// `g(x) < 0`.
    pub g_negative: InequalityScan,
    /// `tan(2 pi u^2) < 2u/(1 - 2u)`.
    pub tangent: InequalityScan,
    /// `sin(2 pi u^2) < 2 pi u^2`.
    pub sine: InequalityScan,
    /// `cos(2 pi u^2) > 1 - 4u^2`.
    pub cosine_chord: InequalityScan,
    /// `1 - 4u^2 > pi u (1 - 2u)`.
    pub cosine_linear: InequalityScan,
    pub conclusion: String,
}

impl BCurveAudit {
    pub fn holds(&self) -> bool {
        [self.g_negative, self.tangent, self.sine, self.cosine_chord, self.cosine_linear]
            .iter()
            .all(|s| s.violations == 0)
    }
}

/// Scans `grid_size` interior points of `(0, 1/2)`.
pub fn bcurve_audit(grid_size: usize, tol: f64) -> BCurveAudit {
    let curve = BCurve;
    let empty = || [InequalityScan::new(); 5];
    let scans = (1..=grid_size)
        .into_par_iter()
        .fold(empty, |mut acc, k| {
            let x = 0.5 * k as f64 / (grid_size + 1) as f64;
            let g = curve.g(x).expect("x - x^2 < 1/4 on (0, 1/2)");
            acc[0].check(g, 0.0, tol);
            let u = x;
            let t = 2.0 * PI * u * u;
            acc[1].check(t.tan(), 2.0 * u / (1.0 - 2.0 * u), tol);
            acc[2].check(t.sin(), t, tol);
            acc[3].check(1.0 - 4.0 * u * u, t.cos(), tol);
            acc[4].check(PI * u * (1.0 - 2.0 * u), 1.0 - 4.0 * u * u, tol);
            acc
        })
        .reduce(empty, |a, b| {
            let mut out = a;
            for i in 0..5 {
                out[i] = a[i].merge(b[i]);
            }
            out
        });
    let audit = BCurveAudit {
        grid_size,
        tolerance: tol,
        g_negative: scans[0],
        tangent: scans[1],
        sine: scans[2],
        cosine_chord: scans[3],
        cosine_linear: scans[4],
        conclusion: String::new(),
    };
    let conclusion = if audit.holds() {
        "R'(p/q) >= 1/q^2 for every q >= 2".to_string()
    } else {
        "inequality chain failed; no conclusion on R'(p/q)".to_string()
    };
    BCurveAudit { conclusion, ..audit }
}

/// `(x, g(x))` rows for plotting.
pub fn bcurve_csv(grid_size: usize) -> String {
    let curve = BCurve;
    let mut out = String::from("x,g\n");
    for k in 1..=grid_size {
        let x = 0.5 * k as f64 / (grid_size + 1) as f64;
        let _ = writeln!(out, "{x:e},{:e}", curve.g(x).unwrap_or(f64::NAN));
    }
    out
}

/// `(r, density)` rows along the positive real axis.
pub fn density_profile_csv(model: DensityModel, samples: usize) -> Result<String> {
    model.validate()?;
    let top = match model {
        DensityModel::EpsPuncturedDisk(e) => e,
        DensityModel::Ball(r) => r,
        _ => 1.0,
    };
    let mut out = String::from("r,density\n");
    for k in 1..=samples {
        let r = top * k as f64 / (samples + 1) as f64;
        if let Ok(d) = density(model, Complex64::new(r, 0.0)) {
            let _ = writeln!(out, "{r:e},{d:e}");
        }
    }
    Ok(out)
}

/// `log rho = 2 log 4 / (1 + 1/|lambda|)`.
pub fn moving_range(lambda_abs: f64) -> Result<RadiusBound> {
    if !(lambda_abs > 0.0 && lambda_abs < 1.0) {
        return Err(Error::InvalidParameter(format!("|lambda| = {lambda_abs} must lie in (0, 1)")));
    }
    RadiusBound::new(4.0 * LN_2 / (1.0 + 1.0 / lambda_abs), Provenance::MovingRange)
}

/// `log rho_2 = log 16 / (1 + q/1.5)`.
pub fn moving_range_q(q: u64) -> Result<RadiusBound> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("q = {q} must be at least 2")));
    }
    RadiusBound::new(4.0 * LN_2 / (1.0 + q as f64 / 1.5), Provenance::MovingRange)
}

/// Sample points for [`relative_schwarz_check`]: a polar grid in the unit disk.
#[derive(Debug, Clone, Copy)]
pub struct PolarGrid {
    pub radii: usize,
    pub angles: usize,
    pub r_max: f64,
}

impl Default for PolarGrid {
    fn default() -> Self {
        PolarGrid { radii: 200, angles: 200, r_max: 0.999 }
    }
}

impl PolarGrid {
    fn points(&self) -> impl ParallelIterator<Item = Complex64> + '_ {
        (0..self.radii * self.angles).into_par_iter().map(move |i| {
            let r = self.r_max * (i / self.angles + 1) as f64 / self.radii as f64;
            let t = 2.0 * PI * (i % self.angles) as f64 / self.angles as f64;
            Complex64::from_polar(r, t)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzReport {
    pub k: u32,
    /// Largest relative excess of any checked inequality; negative means slack.
    pub max_violation: f64,
    pub checked: usize,
    pub skipped: usize,
}

/// Relative Schwarz lemma for `f(z) = z^k` on the unit disk with
/// `Y' = D \ {puncture}` and `X' = f^{-1}(Y')`.
///
/// For `k = 1` the whole chain `f*rho_Y/rho_X <= f*rho_Y'/rho_X' <= 1` is closed form,
/// together with the inclusion comparison `rho_D <= rho_{D \ a}`. For `k >= 2` the
/// density of `X'` is not closed form; the outer inequality `f*rho_Y' <= rho_X'` is
/// checked against the lower bound `rho_X' >= max_j rho_{D \ w_j}`, `w_j` the
/// preimages of the puncture, which makes it a sufficient test.
pub fn relative_schwarz_check(k: u32, puncture: Complex64, grid: PolarGrid) -> Result<SchwarzReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    DensityModel::DiskMinusPoint(puncture).validate()?;
    let roots: Vec<Complex64> = (0..k)
        .map(|j| {
            Complex64::from_polar(
                puncture.norm().powf(1.0 / k as f64),
                (puncture.arg() + 2.0 * PI * j as f64) / k as f64,
            )
        })
        .collect();
    let near = |z: Complex64| roots.iter().any(|w| (z - w).norm() < 1e-9);
    let (worst, checked, skipped) = grid
        .points()
        .map(|z| {
            if near(z) || z.norm() == 0.0 {
                return (f64::NEG_INFINITY, 0usize, 1usize);
            }
            let fz = z.powu(k);
            let df = k as f64 * z.norm().powi(k as i32 - 1);
            let rho_y = density(DensityModel::UnitDisk, fz).expect("inside the disk");
            let rho_x = density(DensityModel::UnitDisk, z).expect("inside the disk");
            let rho_yp = density(DensityModel::DiskMinusPoint(puncture), fz).expect("off the puncture");
            let pull_y = rho_y * df;
            let pull_yp = rho_yp * df;
            let rel = |lhs: f64, rhs: f64| (lhs - rhs) / rhs.abs().max(f64::MIN_POSITIVE);
            let mut worst = rel(pull_y / rho_x, 1.0);
            if k == 1 {
                let rho_xp = rho_yp;
                worst = worst.max(rel(pull_y / rho_x, pull_yp / rho_xp));
                worst = worst.max(rel(pull_yp / rho_xp, 1.0));
                worst = worst.max(rel(rho_y, rho_yp));
            } else {
                let lower = roots
                    .iter()
                    .map(|w| density(DensityModel::DiskMinusPoint(*w), z).expect("off the preimages"))
                    .fold(0.0, f64::max);
                worst = worst.max(rel(pull_yp, lower));
            }
            (worst, 1, 0)
        })
        .reduce(|| (f64::NEG_INFINITY, 0, 0), |a, b| (a.0.max(b.0), a.1 + b.1, a.2 + b.2));
    Ok(SchwarzReport { k, max_violation: worst, checked, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(DensityModel::UnitDisk, c(0.0, 0.0)).unwrap(), 2.0);
        let e = std::f64::consts::E;
        let v = density(DensityModel::PuncturedUnitDisk, c(1.0 / e, 0.0)).unwrap();
        assert!((v - e).abs() < 1e-14);
        assert!((density(DensityModel::Ball(4.0), c(0.0, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!(density(DensityModel::PuncturedUnitDisk, c(0.0, 0.0)).is_err());
        assert!(density(DensityModel::UnitDisk, c(1.0, 0.0)).is_err());
        assert!(density(DensityModel::EpsPuncturedDisk(1.5), c(0.1, 0.0)).is_err());
    }

    #[test]
    fn radius_examples() {
        assert_eq!(rad_from_density(2.0).unwrap(), 1.0);
        let r = rad_from_density(density(DensityModel::Ball(4.0), c(0.0, 0.0)).unwrap()).unwrap();
        assert!((r - 4.0).abs() < 1e-14);
        let half = disk_minus_point_radius(0.5).unwrap();
        assert!((half - 0.924196).abs() < 1e-6);
        let via_density =
            rad_from_density(density(DensityModel::DiskMinusPoint(c(0.5, 0.0)), c(0.0, 0.0)).unwrap()).unwrap();
        assert!((half - via_density).abs() < 1e-14);
        assert!((disk_minus_point_radius(0.25).unwrap() - 0.739357).abs() < 1e-6);
        assert!((disk_minus_point_radius(0.9999).unwrap() - 1.0).abs() < 1e-3);
        assert!(disk_minus_point_radius(1.0).is_err());
    }

    #[test]
    fn slit_map_examples() {
        let z = c(0.3, -0.2);
        let koebe = 4.0 * z / ((c(1.0, 0.0) - z) * (c(1.0, 0.0) - z));
        assert!((phi_q(z, 1) - koebe).norm() < 1e-14);
        assert_eq!(phi_q(c(0.0, 0.0), 5), c(0.0, 0.0));
        for q in [1u32, 2, 7, 64] {
            let d = phi_q_derivative_at_zero(q, 256, 0.5);
            assert!((d - c(4f64.powf(1.0 / q as f64), 0.0)).norm() < 1e-12, "q = {q}");
        }
    }

    #[test]
    fn rho_q_examples() {
        assert!(rho_q(1).unwrap().abs() < 1e-16);
        assert!((rho_q(2).unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!(rho_q(64).unwrap() > 0.975);
    }

    #[test]
    fn douady_examples() {
        assert!((douady_constant() - 3.149_04).abs() < 1e-5);
        assert!(douady_constant() < 24f64.ln());
        let b = douady_bound(2, 0.125).unwrap();
        assert!((b.log_value - (-0.5049)).abs() < 1e-4);
        assert_eq!(b.provenance, Provenance::Douady);
        assert!(douady_bound(1, 0.5).is_err());
        assert!(douady_bound(2, 1.0).is_err());
        for q in 2..=64 {
            let chain = douady_chain(q).unwrap();
            assert!(chain.convexity_holds && chain.bound_holds, "q = {q}");
        }
    }

    #[test]
    fn koebe_examples() {
        let b = koebe_v0_bound(0.3, 3).unwrap();
        assert!((b.log_value - (8.0 * PI / 3.0).ln()).abs() < 1e-14);
        assert!((b.log_value - 2.125_559).abs() < 1e-6);
        let golden = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((koebe_v0_bound(golden, 2).unwrap().log_value - (4.0 * PI).ln()).abs() < 1e-14);
        assert!(koebe_v0_bound(0.3, 2).is_err());
        for k in 1..1000 {
            let a = 0.5 * k as f64 / 1000.0;
            assert!(2.0 * (PI * a).sin() < 2.0 * PI * a);
        }
        assert!(koebe_chain_holds(golden, 2));
    }

    #[test]
    fn bcurve_endpoint_and_audit() {
        let curve = BCurve;
        assert!(curve.g(1e-6).unwrap().abs() < 1e-8);
        assert!(curve.f(0.25).is_none());
        assert_eq!(curve.f(0.0), Some(0.0));
        let a = bcurve_audit(2000, 1e-12);
        assert!(a.holds(), "{a:?}");
        assert!(a.conclusion.contains("1/q^2"));
    }

    #[test]
    fn bcurve_distance_beats_inverse_square() {
        let curve = BCurve;
        for q in 2..=30i64 {
            for p in 1..q {
                let c = p as f64 / q as f64;
                assert!(curve.distance_from(c) >= 1.0 / (q * q) as f64, "{p}/{q}");
            }
        }
        assert!(curve.distance_from(0.0) < 1e-12);
    }

    #[test]
    fn moving_range_examples() {
        let b = moving_range_q(2).unwrap();
        assert!((b.log_value - 3.0 / 7.0 * 16f64.ln()).abs() < 1e-15);
        assert!((b.log_value.exp() - 3.281).abs() < 1e-3);
        for q in 2..50u64 {
            let a = moving_range(1.5 / q as f64).unwrap().log_value;
            assert!((a - moving_range_q(q).unwrap().log_value).abs() < 1e-14);
        }
        assert!(moving_range(1e-12).unwrap().log_value < 1e-10);
        assert!((moving_range(1.0 - 1e-12).unwrap().log_value.exp() - 4.0).abs() < 1e-9);
        assert!(moving_range(1.0).is_err());
    }

    #[test]
    fn schwarz_examples() {
        let grid = PolarGrid { radii: 60, angles: 60, r_max: 0.999 };
        assert!(relative_schwarz_check(1, c(0.5, 0.0), grid).unwrap().max_violation <= 1e-12);
        assert!(relative_schwarz_check(2, c(0.25, 0.0), grid).unwrap().max_violation <= 1e-12);
        assert!(relative_schwarz_check(3, c(0.3, 0.4), grid).unwrap().max_violation <= 1e-12);
        assert!(relative_schwarz_check(1, c(0.0, 0.0), grid).is_err());
        let small = disk_minus_point_radius(0.25).unwrap();
        let big = disk_minus_point_radius(0.5).unwrap();
        assert!(small <= big);
    }

    #[test]
    fn csv_emitters() {
        let g = bcurve_csv(10);
        assert!(g.starts_with("x,g\n"));
        assert_eq!(g.lines().count(), 11);
        let d = density_profile_csv(DensityModel::EpsPuncturedDisk(0.5), 5).unwrap();
        assert_eq!(d.lines().count(), 6);
    }
}
