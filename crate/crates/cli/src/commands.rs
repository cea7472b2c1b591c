use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use siegel_lab::contfrac::{self, Alpha, ContinuedFraction, Fraction, Termination};
use siegel_lab::explosion::{self, ExplosionData, TrackOptions};
use siegel_lab::ladder;
use siegel_lab::mp::{self, Cx};
use siegel_lab::siegel;

use crate::report::{c64_pair, status, CliError, Report};
use crate::RunConfig;

fn parse_alpha(s: &str) -> Result<Alpha, CliError> {
    Ok(Alpha::parse(s)?)
}

/// The digits of `alpha` needed for `rows` convergents, and a note when fewer exist.
fn expansion(alpha: &Alpha, rows: usize, prec: u32) -> Result<(ContinuedFraction, Option<String>), CliError> {
    let cf = alpha.continued_fraction(rows, prec)?;
    let note = match cf.termination {
        Termination::Exact => {
            Some(format!("exact rational {}: the expansion terminates after {} digits", alpha, cf.len()))
        }
        Termination::PrecisionHorizon => {
            Some(format!("precision horizon reached after {} digits at {prec} bits", cf.len()))
        }
        Termination::MaxTerms => None,
    };
    Ok((cf, note))
}

pub fn cf(cfg: &RunConfig, alpha_text: &str, depth: usize) -> Result<Report, CliError> {
    let alpha = parse_alpha(alpha_text)?;
    let prec = cfg.precision;
    let (cf, note) = expansion(&alpha, depth + 2, prec)?;
    let rational = alpha.is_rational();
    let digits = cf.len();
    // the sandwich at n needs q_{n+1}, and for a rational value the last two rows
    // are degenerate (equality, then distance zero)
    let top = if rational { digits.min(depth) } else { digits.saturating_sub(1).min(depth) };
    let table = contfrac::approximants(&cf, (top + 1).min(digits))?;
    let value = alpha.value(prec);
    let good = match table.depth() {
        d if d >= 2 => Some(ladder::good_indices(&table, d - 1)?),
        _ => None,
    };
    let mut rows = Vec::new();
    let mut text = vec![format!("alpha: {alpha}")];
    if let Some(n) = &note {
        text.push(n.clone());
    }
    let mut csv = String::from("n,a,p,q,gap_holds,good\n");
    let mut ok = true;
    for n in 0..=top {
        let row = table.row(n)?;
        let gap = if n < table.depth() && (!rational || n + 2 <= digits) {
            Some(contfrac::gap_bounds(&value, &table, n)?.holds())
        } else {
            None
        };
        ok &= gap.unwrap_or(true);
        let is_good = good.as_ref().is_some_and(|g| g.contains(n));
        let gap_text = gap.map_or("n/a", status);
        text.push(format!(
            "approximant n={n} a={} p={} q={} gap-sandwich: {gap_text}{}",
            row.a,
            row.p,
            row.q,
            if is_good { " good" } else { "" }
        ));
        let _ = writeln!(
            csv,
            "{n},{},{},{},{},{}",
            row.a,
            row.p,
            row.q,
            gap.map_or(String::new(), |g| g.to_string()),
            is_good
        );
        rows.push(json!({
            "n": n,
            "a": row.a.to_string(),
            "p": row.p.to_string(),
            "q": row.q.to_string(),
            "gap_holds": gap,
            "good": is_good,
        }));
    }
    let good_list: Vec<usize> = good.map(|g| g.indices).unwrap_or_default();
    text.push(format!("good-indices: {good_list:?}"));
    Ok(Report {
        json: json!({
            "alpha": alpha.to_string(),
            "rational": rational,
            "note": note,
            "termination": cf.termination,
            "rows": rows,
            "good_indices": good_list,
        }),
        csv: Some(csv),
        text,
        ok,
    })
}

pub fn bruno(cfg: &RunConfig, alpha_text: &str, depth: usize) -> Result<Report, CliError> {
    let alpha = parse_alpha(alpha_text)?;
    let prec = cfg.precision;
    let (cf, note) = expansion(&alpha, depth + 1, prec)?;
    if cf.len() < depth + 1 {
        return Err(CliError::Usage(format!(
            "depth {depth} needs q_{} but only {} digits are available{}",
            depth + 1,
            cf.len(),
            note.map(|n| format!(" ({n})")).unwrap_or_default()
        )));
    }
    let table = contfrac::approximants(&cf, depth + 1)?;
    let eval = contfrac::bruno_partial(&table, depth, prec)?;
    let terms: Vec<f64> = eval.terms.iter().map(|t| t.to_f64()).collect();
    let partial = eval.partial.to_f64();
    let tail = match alpha.literal()? {
        Some(l) if l.is_periodic() => {
            let a = l.max_digit_after(depth + 1).expect("periodic");
            siegel::bruno_tail_bound(table.q(depth + 1)?, &a, prec).ok()
        }
        _ => None,
    };
    let mut text = vec![format!("alpha: {alpha}"), format!("bruno-partial: N={depth} B_N={partial:.17e}")];
    if let Some(t) = tail {
        text.push(format!("bruno-tail: bound={t:.6e} B<={:.17e}", partial + t));
    }
    let split = if depth >= 1 {
        let good = ladder::good_indices(&table, depth)?;
        let s = ladder::split_sum(&table, depth, &good)?;
        text.push(format!(
            "split-sum: {} slack={:.6e} strict={} good={:?}",
            status(s.holds()),
            s.slack,
            s.strict,
            good.indices
        ));
        Some(s)
    } else {
        None
    };
    let mut csv = String::from("n,q_n,term,partial\n");
    let mut running = 0.0;
    for (n, t) in terms.iter().enumerate() {
        running += t;
        let _ = writeln!(csv, "{n},{},{t:e},{running:e}", table.q(n)?);
    }
    let ok = split.is_none_or(|s| s.holds());
    Ok(Report {
        json: json!({
            "alpha": alpha.to_string(),
            "depth": depth,
            "terms": terms,
            "partial": partial,
            "tail_bound": tail,
            "split": split,
        }),
        csv: Some(csv),
        text,
        ok,
    })
}

enum DeltaPath {
    Default,
    BeyondR,
    Modulus(f64),
}

fn parse_delta_path(s: &str) -> Result<DeltaPath, CliError> {
    match s {
        "default" => Ok(DeltaPath::Default),
        "beyond-R" | "beyond-r" => Ok(DeltaPath::BeyondR),
        t => match t.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(DeltaPath::Modulus(v)),
            _ => Err(CliError::Usage(format!("--delta-path {t:?}: expected default, beyond-R or a positive number"))),
        },
    }
}

pub fn explode(
    cfg: &RunConfig,
    p: i64,
    q: i64,
    path: &str,
    steps: usize,
    emit: Option<&Path>,
) -> Result<Report, CliError> {
    let pq = Fraction::new(p, q)?;
    let path = parse_delta_path(path)?;
    let prec = cfg.precision;
    let qf = pq.q() as f64;
    let mut opts = TrackOptions { tol: mp::pow2_neg(prec, prec / 2).to_f64(), ..Default::default() };
    let mut collision = None;
    let modulus = match path {
        DeltaPath::Default => 1.0 / (2.0 * qf.powi(3)),
        DeltaPath::Modulus(t) => t,
        DeltaPath::BeyondR => {
            if pq.q() > 6 {
                return Err(CliError::Usage("beyond-R needs the collision oracle, available for q <= 6".into()));
            }
            let est = explosion::estimate_r(pq, 1.0, prec)?;
            opts.radius_guard = Some(est.r);
            collision = Some(est.record());
            2.0 * est.r
        }
    };
    let data = ExplosionData::new(pq, prec)?;
    let delta = Cx::from_f64(prec, modulus.powf(1.0 / qf), 0.0);
    let mut csv = String::from("branch,delta_re,delta_im,chi_re,chi_im,residual\n");
    for j in 0..data.slopes.len() {
        let branch = explosion::track_chi(&data, j, &explosion::ray_path(&delta, steps), &opts)?;
        for line in branch.to_csv().lines().skip(1) {
            let _ = writeln!(csv, "{j},{line}");
        }
    }
    if let Some(file) = emit {
        std::fs::write(file, &csv)?;
    }
    let check = explosion::verify_cycle_relation(&data, &delta, steps, &opts)?;
    let err = check.max_error.to_f64();
    let ok = err < cfg.tolerance && check.pairwise_distinct;
    let text = vec![
        format!("explosion: p/q={pq} |delta|^q={modulus:e} steps={steps}"),
        format!("leading-coefficient: A={:?}", c64_pair(&data.a)),
        format!("cycle-relation: {} max_error={err:e} distinct={}", status(ok), check.pairwise_distinct),
    ];
    Ok(Report {
        json: json!({
            "p": pq.p(),
            "q": pq.q(),
            "delta_modulus_q": modulus,
            "delta": c64_pair(&delta),
            "A": c64_pair(&data.a),
            "slopes": data.slopes.iter().map(c64_pair).collect::<Vec<_>>(),
            "points": check.points.iter().map(c64_pair).collect::<Vec<_>>(),
            "max_error": err,
            "pairwise_distinct": check.pairwise_distinct,
            "collision": collision,
        }),
        csv: Some(csv),
        text,
        ok,
    })
}

pub fn radius(cfg: &RunConfig, alpha_text: &str, depth: usize) -> Result<Report, CliError> {
    let alpha = parse_alpha(alpha_text)?;
    let (report, lin) = siegel::theorem_check_with_series(&alpha, depth, cfg.series_n as usize, cfg.precision)?;
    let ok = report.margin_vs_16 > 0.0;
    let est = &report.radius;
    let mut text = vec![
        format!("alpha: {}", report.alpha),
        format!(
            "siegel-radius: r={:.12} hadamard={:.12} tail-fit={:.12} spread={:.3e}{}",
            est.r,
            est.hadamard,
            est.tail_fit,
            est.spread,
            if est.unconverged { " UNCONVERGED" } else { "" }
        ),
        format!("functional-equation: residual={:.3e} at |w|=r/2", report.residual),
        format!("bruno-partial: N={} B_N={:.12}", report.depth, report.b_partial),
    ];
    match report.tail_bound {
        Some(t) => text.push(format!("bruno-tail: bound={t:.3e}")),
        None => text.push(format!("bruno-tail: {}", report.tail_note)),
    }
    text.push(format!(
        "theorem-margin: {} total={:.12} margin_vs_16={:.12}",
        status(ok),
        report.total,
        report.margin_vs_16
    ));
    let json: Value = serde_json::to_value(&report)?;
    Ok(Report { json, csv: Some(lin.to_csv()), text, ok })
}
