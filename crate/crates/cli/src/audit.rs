use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use siegel_lab::conformal::{self, PolarGrid};
use siegel_lab::contfrac::{self, gcd_i64, Fraction};
use siegel_lab::explosion::{self, CollisionOracle};
use siegel_lab::ladder::{self, TailPolicy};

use crate::report::{status, CliError, Report};
use crate::{RunConfig, Which};

pub struct AuditOptions {
    pub which: Which,
    pub qmax: u32,
    pub grid: usize,
    pub oracle_qmax: u32,
    pub inject_fault: bool,
}

struct Line {
    tag: &'static str,
    ok: bool,
    detail: String,
    data: Value,
}

impl Line {
    fn new(tag: &'static str, ok: bool, detail: String, data: Value) -> Self {
        Line { tag, ok, detail, data }
    }
}

/// Number of partial-sum rows printed in the budget table.
const BUDGET_ROWS: usize = 8;

fn constants(text: &mut Vec<String>) -> Result<Vec<Line>, CliError> {
    let c = contfrac::appendix_constants(80)?;
    let s1 = c.s1 >= 1.96 && c.s1 + c.tail1 < 1.97;
    let s2 = c.s2 >= 1.35 && c.s2 + c.tail2 < 1.36;
    let audit = ladder::constant_audit(80, TailPolicy::Geometric)?;
    text.push(format!("budget: log(8pi) = {:.6}", audit.log_8pi));
    for t in audit.terms.iter().take(BUDGET_ROWS) {
        text.push(format!(
            "budget: n={} F={} points={:.6} moving={:.6} partial={:.6}",
            t.n, t.fib, t.points, t.moving, t.partial
        ));
    }
    text.push(format!("budget: ... tail <= {:.3e}", audit.tail.unwrap_or(f64::NAN)));
    let dull: Vec<_> = [2.0, 24.0].iter().map(|&l| contfrac::dull_lemma_check(l, 10_000)).collect();
    let below = contfrac::dull_lemma_check(81.0 / 64.0 - 1e-9, 10);
    Ok(vec![
        Line::new(
            "fibonacci-log-sum",
            s1,
            format!("sum log F/F = {:.12} + tail <= {:.3e} within [1.96, 1.97)", c.s1, c.tail1),
            serde_json::to_value(c)?,
        ),
        Line::new(
            "fibonacci-recip-sum",
            s2,
            format!("sum 1/F = {:.12} + tail <= {:.3e} within [1.35, 1.36)", c.s2, c.tail2),
            Value::Null,
        ),
        Line::new(
            "constant-budget",
            audit.holds(),
            format!("total={:.12} < {}", audit.total, audit.target),
            serde_json::to_value(&audit)?,
        ),
        Line::new(
            "dull-lemma",
            dull.iter().all(|d| d.decreasing) && !below.decreasing,
            "log(lambda n^2)/n decreasing for lambda = 2, 24 and not below 81/64".into(),
            serde_json::to_value(&dull)?,
        ),
    ])
}

fn key_inequality(opts: &AuditOptions, prec: u32) -> Result<Vec<Line>, CliError> {
    let scan = explosion::key_inequality_audit(opts.qmax, false)?;
    let margin = scan.min_margin.map_or(f64::NAN, |m| m.margin);
    let mut lines = vec![Line::new(
        "yoccoz-scan",
        scan.holds(),
        format!("q<={} cases={} violations={} min_margin={margin:.6e}", opts.qmax, scan.cases, scan.violations.len()),
        serde_json::to_value(&scan)?,
    )];
    let mut records = Vec::new();
    let mut ok = true;
    let mut worst = f64::INFINITY;
    // q = 1 is covered by the cap R <= 1 = 1/q^3 and carries no margin
    for q in 2..=opts.oracle_qmax.min(opts.qmax) {
        let oracle = CollisionOracle::new(q, prec)?;
        for p in (0..q as i64).filter(|&p| gcd_i64(p, q as i64) == 1) {
            let rec = oracle.estimate(Fraction::new(p, q as i64)?, 1.0)?.record();
            ok &= rec.margin >= 0.0;
            worst = worst.min(rec.margin);
            if (p, q) == (1, 2) {
                ok &= (rec.r - 0.5).abs() < 1e-9;
            }
            records.push(rec);
        }
    }
    lines.push(Line::new(
        "collision-radius",
        ok,
        format!("resultant oracle 2<=q<={} min(R - 1/q^3)={worst:.6e}", opts.oracle_qmax.min(opts.qmax)),
        serde_json::to_value(&records)?,
    ));
    Ok(lines)
}

fn bcurve(opts: &AuditOptions, tol: f64) -> Result<Vec<Line>, CliError> {
    let a = conformal::bcurve_audit(opts.grid, tol);
    let scans = [
        ("bcurve-g-negative", a.g_negative),
        ("bcurve-tangent", a.tangent),
        ("bcurve-sine", a.sine),
        ("bcurve-cosine-chord", a.cosine_chord),
        ("bcurve-cosine-linear", a.cosine_linear),
    ];
    Ok(scans
        .into_iter()
        .map(|(tag, s)| {
            Line::new(
                tag,
                s.violations == 0,
                format!("grid={} violations={} min_slack={:.6e}", opts.grid, s.violations, s.min_slack),
                json!(s),
            )
        })
        .collect())
}

fn slit(tol: f64) -> Result<Vec<Line>, CliError> {
    let mut worst: f64 = 0.0;
    for q in 1..=64u32 {
        let d = conformal::phi_q_derivative_at_zero(q, 256, 0.5);
        worst = worst.max((d - Complex64::new(4f64.powf(1.0 / q as f64), 0.0)).norm());
    }
    let rho2 = conformal::rho_q(2)?;
    let c = conformal::douady_constant();
    let chains: Vec<_> = (2..=64).map(conformal::douady_chain).collect::<Result<_, _>>()?;
    let chain_ok = chains.iter().all(|d| d.convexity_holds && d.bound_holds);
    Ok(vec![
        Line::new(
            "slit-derivative",
            worst < tol,
            format!("max |phi_q'(0) - 4^(1/q)| = {worst:.3e} for q <= 64"),
            json!(worst),
        ),
        Line::new("slit-rho2", (rho2 - (SQRT_2 - 1.0)).abs() < tol, format!("rho_2 = {rho2:.15}"), json!(rho2)),
        Line::new("douady-constant", c < 24f64.ln(), format!("C = {c:.12} < log 24 = {:.12}", 24f64.ln()), json!(c)),
        Line::new(
            "douady-chain",
            chain_ok,
            "convexity and C/q bound for q <= 64".into(),
            serde_json::to_value(&chains)?,
        ),
    ])
}

fn schwarz(opts: &AuditOptions, cfg: &RunConfig) -> Result<Vec<Line>, CliError> {
    let quarter = conformal::disk_minus_point_radius(0.25)?;
    let half = conformal::disk_minus_point_radius(0.5)?;
    let mut lines = vec![Line::new(
        "rad-decay",
        quarter <= half,
        format!("rad(D minus 1/4) = {quarter:.12} <= rad(D minus 1/2) = {half:.12}"),
        json!({"quarter": quarter, "half": half}),
    )];
    let side = ((opts.grid as f64).sqrt().round() as usize).max(8);
    let grid = PolarGrid { radii: side, angles: side, r_max: 0.999 };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut reports = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for k in 1..=3u32 {
        for _ in 0..3 {
            let a = Complex64::from_polar(rng.gen_range(0.05..0.9), rng.gen_range(-3.1..3.1));
            let r = conformal::relative_schwarz_check(k, a, grid)?;
            worst = worst.max(r.max_violation);
            reports.push(json!({"k": k, "puncture": [a.re, a.im], "report": r}));
        }
    }
    lines.push(Line::new(
        "relative-schwarz",
        worst <= cfg.tolerance,
        format!("k<=3 seed={} grid={side}x{side} max_violation={worst:.3e}", cfg.seed),
        json!(reports),
    ));
    Ok(lines)
}

pub fn run(cfg: &RunConfig, opts: &AuditOptions) -> Result<Report, CliError> {
    let all = opts.which == Which::All;
    let mut text = Vec::new();
    let mut lines = Vec::new();
    if all || opts.which == Which::Constants {
        lines.extend(constants(&mut text)?);
    }
    if all || opts.which == Which::KeyInequality {
        lines.extend(key_inequality(opts, cfg.precision)?);
    }
    if all || opts.which == Which::Bcurve {
        lines.extend(bcurve(opts, cfg.tolerance)?);
    }
    if all || opts.which == Which::Slit {
        lines.extend(slit(cfg.tolerance)?);
    }
    if all || opts.which == Which::Schwarz {
        lines.extend(schwarz(opts, cfg)?);
    }
    if opts.inject_fault {
        lines.push(Line::new("injected-fault", false, "test harness".into(), Value::Null));
    }
    let ok = lines.iter().all(|l| l.ok);
    let mut csv = String::from("tag,ok,detail\n");
    for l in &lines {
        text.push(format!("{}: {} {}", l.tag, status(l.ok), l.detail));
        csv.push_str(&format!("{},{},\"{}\"\n", l.tag, l.ok, l.detail.replace('"', "'")));
    }
    text.push(format!("audit: {}", status(ok)));
    let checks: Vec<Value> =
        lines.into_iter().map(|l| json!({"tag": l.tag, "ok": l.ok, "detail": l.detail, "data": l.data})).collect();
    Ok(Report { json: json!({"checks": checks, "all_hold": ok}), csv: Some(csv), text, ok })
}
