//! Good approximants and the ladder of nested parameter disks around them, plus
//! the bookkeeping that turns per-level radius bounds into the global constant.

use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::conformal::{self, BCurve};
use crate::contfrac::{self, ApproximantTable, FibonacciSequence};
use crate::error::{Error, Result};
use crate::mp::{self, Cx};

/// Root sets are materialized only up to this denominator.
pub const MAX_ROOTS: u64 = 1 << 14;

/// Indices `n >= 1` with `q_{n+1} > 2 q_n^2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodIndexSet {
    /// Largest index examined.
    pub depth: usize,
    pub indices: Vec<usize>,
}

impl GoodIndexSet {
    pub fn contains(&self, n: usize) -> bool {
        self.indices.binary_search(&n).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn is_good(table: &ApproximantTable, n: usize) -> Result<bool> {
    let q = table.q(n)?;
    let next = table.q(n + 1)?;
    Ok(*next > Integer::from(q.square_ref()) * 2u32)
}

pub fn good_indices(table: &ApproximantTable, depth: usize) -> Result<GoodIndexSet> {
    table.row(depth + 1)?;
    let indices = (1..=depth).filter(|&n| is_good(table, n).expect("row checked")).collect();
    Ok(GoodIndexSet { depth, indices })
}

/// One rung: the disks `B`, `D`, `U` attached to a good approximant.
#[derive(Debug, Clone)]
pub struct Level {
    pub n: usize,
    pub p: Integer,
    pub q: Integer,
    /// `q_{n+1}`.
    pub q_next: Integer,
    /// `1/q^3`.
    pub radius_b: Rational,
    /// `1/q^2`.
    pub radius_d: Rational,
    /// `(1/q^3)^{1/q}`.
    pub radius_u: f64,
    /// `log |alpha0 - p/q|`.
    pub log_offset: f64,
    /// The `q` solutions of `p/q + delta^q = alpha0`, or `None` above [`MAX_ROOTS`].
    pub roots: Option<Vec<Cx>>,
}

impl Level {
    pub fn center(&self) -> Rational {
        Rational::from((self.p.clone(), self.q.clone()))
    }
}

#[derive(Debug, Clone)]
pub struct DiskLadder {
    pub alpha0: Float,
    pub levels: Vec<Level>,
}

/// Populates one level per good index.
pub fn build_ladder(alpha0: &Float, table: &ApproximantTable, good: &GoodIndexSet) -> Result<DiskLadder> {
    if !(*alpha0 > 0 && *alpha0 < 0.5) {
        return Err(Error::Domain(format!("alpha0 = {} must lie in (0, 1/2)", alpha0.to_f64())));
    }
    let prec = alpha0.prec();
    let mut levels = Vec::with_capacity(good.indices.len());
    for &n in &good.indices {
        let row = table.row(n)?;
        let q_next = table.q(n + 1)?.clone();
        let (p, q) = (row.p.clone(), row.q.clone());
        let qf = q.to_f64();
        let offset = Float::with_val(prec, alpha0 - &Rational::from((p.clone(), q.clone())));
        if offset.is_zero() {
            return Err(Error::RationalInput(format!("alpha0 equals {p}/{q}")));
        }
        let log_offset = Float::with_val(prec, offset.abs_ref()).ln().to_f64();
        let roots = match q.to_u64() {
            Some(qq) if qq <= MAX_ROOTS => Some(Cx::from_real(offset).roots(qq as u32)),
            _ => None,
        };
        let q3 = Integer::from(q.square_ref()) * &q;
        levels.push(Level {
            n,
            radius_b: Rational::from((Integer::from(1), q3)),
            radius_d: Rational::from((Integer::from(1), Integer::from(q.square_ref()))),
            radius_u: (-3.0 * qf.ln() / qf).exp(),
            log_offset,
            roots,
            p,
            q,
            q_next,
        });
    }
    Ok(DiskLadder { alpha0: alpha0.clone(), levels })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NestingKind {
    /// `alpha0 in B_i`.
    AlphaInB,
    /// `dist(p/q, curve) >= radius_D` for the first level.
    FirstDiskAvoidsCurve,
    /// `B_i` inside `D_i`.
    BInsideD,
    /// `D_{i+1}` inside `B_i`.
    DInsidePreviousB,
    /// The center of `B_i` lies outside `D_{i+1}`.
    PreviousCenterExcluded,
    /// `|alpha0 - c_{i+1}| < |alpha0 - c_i| / 2`.
    Halving,
    /// Every root has `|delta|^q = |alpha0 - p/q|` and lies in `U_i`.
    RootsInU,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NestingCheck {
    pub level: usize,
    pub kind: NestingKind,
    pub holds: bool,
    /// Amount by which the inequality holds; negative on violation.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestingReport {
    pub checks: Vec<NestingCheck>,
}

impl NestingReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &NestingCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

fn rational_check(level: usize, kind: NestingKind, slack: Rational) -> NestingCheck {
    NestingCheck { level, kind, holds: slack > 0, slack: slack.to_f64() }
}

fn abs_rational(r: Rational) -> Rational {
    if r < 0 {
        -r
    } else {
        r
    }
}

/// Inclusions are decided in exact rational arithmetic. Comparisons involving
/// `alpha0` use its working precision.
pub fn verify_nesting(ladder: &DiskLadder, alpha0: &Float) -> Result<NestingReport> {
    if ladder.levels.is_empty() {
        return Err(Error::InvalidParameter("ladder has no levels".into()));
    }
    let prec = alpha0.prec();
    let dist_alpha = |c: &Rational| Float::with_val(prec, alpha0 - c).abs();
    let mut checks = Vec::new();
    for (i, lv) in ladder.levels.iter().enumerate() {
        let c = lv.center();
        let d = dist_alpha(&c);
        let slack = Float::with_val(prec, &lv.radius_b - &d);
        checks.push(NestingCheck {
            level: i + 1,
            kind: NestingKind::AlphaInB,
            holds: slack > 0,
            slack: slack.to_f64(),
        });
        checks.push(rational_check(i + 1, NestingKind::BInsideD, Rational::from(&lv.radius_d - &lv.radius_b)));
        if let Some(roots) = &lv.roots {
            checks.push(roots_check(i + 1, lv, roots));
        }
        if i == 0 {
            let gap = BCurve.distance_from(c.to_f64()) - lv.radius_d.to_f64();
            checks.push(NestingCheck {
                level: 1,
                kind: NestingKind::FirstDiskAvoidsCurve,
                holds: gap > 0.0,
                slack: gap,
            });
        } else {
            let prev = &ladder.levels[i - 1];
            let pc = prev.center();
            let sep = abs_rational(Rational::from(&c - &pc));
            let inside = Rational::from(&prev.radius_b - &sep) - &lv.radius_d;
            checks.push(rational_check(i + 1, NestingKind::DInsidePreviousB, inside));
            checks.push(rational_check(
                i + 1,
                NestingKind::PreviousCenterExcluded,
                Rational::from(&sep - &lv.radius_d),
            ));
            let half = dist_alpha(&pc) / 2u32;
            let slack = half - d;
            checks.push(NestingCheck {
                level: i + 1,
                kind: NestingKind::Halving,
                holds: slack > 0,
                slack: slack.to_f64(),
            });
        }
    }
    Ok(NestingReport { checks })
}

fn roots_check(level: usize, lv: &Level, roots: &[Cx]) -> NestingCheck {
    let q = lv.q.to_f64();
    let log_u = lv.radius_u.ln();
    let mut worst = f64::INFINITY;
    let mut power_ok = roots.len() as f64 == q;
    for r in roots {
        let log_abs = r.abs().ln().to_f64();
        worst = worst.min(log_u - log_abs);
        power_ok &= (q * log_abs - lv.log_offset).abs() <= 1e-9 * lv.log_offset.abs().max(1.0);
    }
    NestingCheck { level, kind: NestingKind::RootsInU, holds: power_ok && worst > 0.0, slack: worst }
}

/// The bad-approximant bound on a partial Bruno sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumSplit {
    pub depth: usize,
    /// Sum of `log q_{n+1}/q_n` over good `n <= depth`.
    pub good_terms: f64,
    /// Sum of `log(2 F_n^2)/F_n` over the other `n` in `1..=depth`.
    pub bad_bound: f64,
    /// `sum_{n=1}^{depth} log q_{n+1}/q_n`.
    pub full_sum: f64,
    /// `good_terms + bad_bound - full_sum`.
    pub slack: f64,
    /// Every bad index satisfies `q_{n+1} <= 2 q_n^2` and `q_n >= F_n` exactly.
    pub termwise: bool,
    pub strict: bool,
}

impl SumSplit {
    /// Non-strict form; the equality case `q_{n+1} = 2 q_n^2` can make both sides
    /// agree on short expansions.
    pub fn holds(&self) -> bool {
        self.termwise && self.slack >= -1e-12 * self.full_sum.abs().max(1.0)
    }
}

pub fn split_sum(table: &ApproximantTable, depth: usize, good: &GoodIndexSet) -> Result<SumSplit> {
    if depth < 1 {
        return Err(Error::InvalidParameter("split needs depth >= 1".into()));
    }
    table.row(depth + 1)?;
    let prec = mp::DEFAULT_PRECISION;
    let (mut good_terms, mut bad_bound, mut full) = (Float::new(prec), Float::new(prec), Float::new(prec));
    let mut termwise = true;
    let fib = FibonacciSequence::default().skip(1);
    for (n, f) in (1..=depth).zip(fib) {
        let q = table.q(n)?;
        let next = table.q(n + 1)?;
        let term = mp::ln_integer(prec, next) / q;
        full += &term;
        if good.contains(n) {
            good_terms += term;
        } else {
            let two_f2 = Integer::from(f.square_ref()) * 2u32;
            bad_bound += mp::ln_integer(prec, &two_f2) / &f;
            termwise &= *next <= Integer::from(q.square_ref()) * 2u32 && *q >= f;
        }
    }
    let slack = Float::with_val(prec, &good_terms + &bad_bound) - &full;
    Ok(SumSplit {
        depth,
        good_terms: good_terms.to_f64(),
        bad_bound: bad_bound.to_f64(),
        full_sum: full.to_f64(),
        slack: slack.to_f64(),
        termwise,
        strict: termwise && slack > 0,
    })
}

/// The three addends bounding `log rad(V_i)/rad(V_{i-1})` at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainEstimate {
    pub n: usize,
    pub q: f64,
    pub q_next: f64,
    /// Fibonacci lower bound `F_n` for `q`.
    pub fib: f64,
    /// `-log q_{n+1}/q_n`.
    pub t1: f64,
    /// `log(24 F^2)/F`.
    pub t2: f64,
    /// `log 16/(1 + F/1.5)`.
    pub t3: f64,
    /// `t2` with `q` in place of `F`.
    pub t2_q: f64,
    /// `t3` with `q` in place of `F`, the moving-range bound.
    pub t3_q: f64,
    /// `(log|alpha0 - p/q| + 3 log q)/q + C/q`, the equidistributed-points estimate.
    pub points_bound: f64,
    /// `(-log q_{n+1} + 2 log q + C)/q`.
    pub decomposition: f64,
    /// `points_bound <= decomposition <= t1 + t2_q <= t1 + t2`.
    pub chain_holds: bool,
    /// `t2_q <= t2` and `t3_q <= t3`.
    pub substitution_holds: bool,
}

impl MainEstimate {
    pub fn total(&self) -> f64 {
        self.t1 + self.t2 + self.t3
    }
}

fn t2_of(x: f64) -> f64 {
    (24.0 * x * x).ln() / x
}

fn t3_of(x: f64) -> f64 {
    16f64.ln() / (1.0 + x / 1.5)
}

pub fn main_estimate_terms(level: &Level) -> Result<MainEstimate> {
    let q = level.q.to_f64();
    let q_next = level.q_next.to_f64();
    let fib = contfrac::fibonacci(level.n).to_f64();
    let c = conformal::douady_constant();
    let t1 = -q_next.ln() / q;
    let (t2, t3) = (t2_of(fib), t3_of(fib));
    let t2_q = t2_of(q);
    let t3_q = conformal::moving_range_q(level.q.to_u64().unwrap_or(u64::MAX))?.log_value;
    let points_bound = (level.log_offset + 3.0 * q.ln()) / q + c / q;
    let decomposition = (-q_next.ln() + 2.0 * q.ln() + c) / q;
    let eps = 1e-14;
    Ok(MainEstimate {
        n: level.n,
        q,
        q_next,
        fib,
        t1,
        t2,
        t3,
        t2_q,
        t3_q,
        points_bound,
        decomposition,
        chain_holds: points_bound <= decomposition + eps && decomposition <= t1 + t2_q + eps && t2_q <= t2 + eps,
        substitution_holds: t2_q <= t2 + eps && t3_q <= t3 + eps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailPolicy {
    /// Bound the omitted terms with `F_n >= phi^(n-1)` and a geometric series.
    Geometric,
    /// Report the partial sum only.
    Omit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantTerm {
    pub n: usize,
    #[serde(rename = "F")]
    pub fib: String,
    /// `log(24 F^2)/F`.
    pub points: f64,
    /// `log 16/(1 + F/1.5)`.
    pub moving: f64,
    pub partial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantAudit {
    pub terms: Vec<ConstantTerm>,
    pub tail: Option<f64>,
    #[serde(rename = "log8pi")]
    pub log_8pi: f64,
    /// Upper bound for the full constant when the tail is included.
    pub total: f64,
    pub target: f64,
}

impl ConstantAudit {
    pub fn holds(&self) -> bool {
        self.tail.is_some() && self.total < self.target
    }
}

pub const AUDIT_TARGET: f64 = 16.0;

/// `log(8 pi) + sum_{n >= 1} (log(24 F_n^2)/F_n + log 16/(1 + F_n/1.5))`.
pub fn constant_audit(n_max: usize, tail_policy: TailPolicy) -> Result<ConstantAudit> {
    if n_max < 10 {
        return Err(Error::InvalidParameter(format!("n_max = {n_max} must be at least 10")));
    }
    let prec = mp::DEFAULT_PRECISION;
    let ln16 = mp::ln_integer(prec, &Integer::from(16));
    let ln24 = mp::ln_integer(prec, &Integer::from(24));
    let log_8pi = Float::with_val(prec, mp::pi(prec) * 8u32).ln();
    let mut partial = log_8pi.clone();
    let mut terms = Vec::with_capacity(n_max);
    for (n, f) in (1..=n_max).zip(FibonacciSequence::default().skip(1)) {
        let ff = Float::with_val(prec, &f);
        let points = Float::with_val(prec, Integer::from(f.square_ref()) * 24u32).ln() / &ff;
        let moving = Float::with_val(prec, &ln16 * 3u32) / (Float::with_val(prec, &ff * 2u32) + 3u32);
        partial += &points;
        partial += &moving;
        terms.push(ConstantTerm {
            n,
            fib: f.to_string(),
            points: points.to_f64(),
            moving: moving.to_f64(),
            partial: partial.to_f64(),
        });
    }
    let tail = match tail_policy {
        TailPolicy::Omit => None,
        TailPolicy::Geometric => {
            // log(24 F^2)/F = log 24/F + 2 log F/F and log 16/(1 + F/1.5) < 1.5 log 16/F
            let (recip, log_tail) = contfrac::fibonacci_tail_bounds(n_max, prec);
            let coef = Float::with_val(prec, &ln24 + Float::with_val(prec, &ln16 * 1.5f64));
            Some(Float::with_val(prec, &coef * &recip) + log_tail * 2u32)
        }
    };
    let total = match &tail {
        Some(t) => Float::with_val(prec, &partial + t),
        None => partial,
    };
    Ok(ConstantAudit {
        terms,
        tail: tail.map(|t| t.to_f64_round(Round::Up)),
        log_8pi: log_8pi.to_f64(),
        total: total.to_f64_round(Round::Up),
        target: AUDIT_TARGET,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDump {
    pub n_i: usize,
    pub p: String,
    pub q: String,
    #[serde(rename = "rB")]
    pub r_b: f64,
    #[serde(rename = "rD")]
    pub r_d: f64,
    #[serde(rename = "rU")]
    pub r_u: f64,
    #[serde(rename = "S")]
    pub s: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderDump {
    pub levels: Vec<LevelDump>,
}

impl DiskLadder {
    pub fn dump(&self) -> LadderDump {
        let levels = self
            .levels
            .iter()
            .map(|lv| LevelDump {
                n_i: lv.n,
                p: lv.p.to_string(),
                q: lv.q.to_string(),
                r_b: lv.radius_b.to_f64(),
                r_d: lv.radius_d.to_f64(),
                r_u: lv.radius_u,
                s: lv.roots.as_ref().map(|rs| {
                    rs.iter()
                        .map(|r| {
                            let z = r.to_c64();
                            [z.re, z.im]
                        })
                        .collect()
                }),
            })
            .collect();
        LadderDump { levels }
    }
}
