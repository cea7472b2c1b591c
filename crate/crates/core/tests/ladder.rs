use rug::{Float, Integer, Rational};
use siegel_lab::conformal::douady_constant;
use siegel_lab::contfrac::{approximants, ApproximantTable, CfLiteral};
use siegel_lab::ladder::*;

const PREC: u32 = 256;

fn setup(lit: &str, rows: usize) -> (Float, ApproximantTable) {
    let lit: CfLiteral = lit.parse().unwrap();
    let table = approximants(&lit.expand(rows), rows).unwrap();
    (lit.value(PREC), table)
}

/// `q_1 = 2, q_2 = 19, q_3 = 762, q_4 = 781`: good at 1 and 2 only.
const ENGINEERED: &str = "[0; 2,9,40,(1)]";

#[test]
fn engineered_expansion_has_two_good_indices() {
    let (_, t) = setup(ENGINEERED, 8);
    let qs: Vec<Integer> = (0..=4).map(|n| t.q(n).unwrap().clone()).collect();
    assert_eq!(qs, [1, 2, 19, 762, 781].map(Integer::from));
    let g = good_indices(&t, 7).unwrap();
    assert_eq!(g.indices, vec![1, 2]);
}

#[test]
fn engineered_ladder_nests() {
    let (a, t) = setup(ENGINEERED, 8);
    let g = good_indices(&t, 7).unwrap();
    let ladder = build_ladder(&a, &t, &g).unwrap();
    assert_eq!(ladder.levels.len(), 2);
    for lv in &ladder.levels {
        assert_eq!(Rational::from(&lv.radius_d / &lv.radius_b), Rational::from(lv.q.clone()));
        assert_eq!(lv.roots.as_ref().unwrap().len() as u32, lv.q.to_u32().unwrap());
    }
    let report = verify_nesting(&ladder, &a).unwrap();
    assert!(report.holds(), "{:?}", report.violations().collect::<Vec<_>>());
    for kind in [
        NestingKind::AlphaInB,
        NestingKind::FirstDiskAvoidsCurve,
        NestingKind::BInsideD,
        NestingKind::DInsidePreviousB,
        NestingKind::PreviousCenterExcluded,
        NestingKind::Halving,
        NestingKind::RootsInU,
    ] {
        assert!(report.checks.iter().any(|c| c.kind == kind), "{kind:?} not checked");
    }
}

#[test]
fn single_level_checks_only_the_first_disk() {
    let (a, t) = setup("[0; 2,9,(1)]", 12);
    let g = good_indices(&t, 10).unwrap();
    assert_eq!(g.indices, vec![1]);
    let report = verify_nesting(&build_ladder(&a, &t, &g).unwrap(), &a).unwrap();
    assert!(report.holds());
    assert!(report.checks.iter().all(|c| c.level == 1));
    assert!(!report.checks.iter().any(|c| c.kind == NestingKind::Halving));
}

#[test]
fn inflated_disks_are_caught() {
    let (a, t) = setup(ENGINEERED, 8);
    let g = good_indices(&t, 7).unwrap();
    let mut ladder = build_ladder(&a, &t, &g).unwrap();
    for lv in &mut ladder.levels {
        lv.radius_d *= 10u32;
    }
    let report = verify_nesting(&ladder, &a).unwrap();
    let bad: Vec<NestingKind> = report.violations().map(|c| c.kind).collect();
    assert!(bad.contains(&NestingKind::FirstDiskAvoidsCurve));
    assert!(bad.contains(&NestingKind::PreviousCenterExcluded));
}

#[test]
fn split_is_strict_for_engineered_and_golden() {
    let (_, t) = setup(ENGINEERED, 40);
    let g = good_indices(&t, 30).unwrap();
    for depth in 1..=30 {
        let s = split_sum(&t, depth, &g).unwrap();
        assert!(s.holds(), "depth {depth}: {s:?}");
        // with every index good both sides are the same sum
        assert_eq!(s.strict, depth >= 3, "depth {depth}: {s:?}");
    }
    let (_, t) = setup("[0; 2,(1)]", 22);
    let g = good_indices(&t, 20).unwrap();
    let s = split_sum(&t, 20, &g).unwrap();
    assert_eq!(s.good_terms, 0.0);
    assert!(s.full_sum < s.bad_bound);
}

#[test]
fn huge_digit_dominates_the_full_sum() {
    let (_, t) = setup("[0; 2,3,1000000,(1)]", 12);
    let g = good_indices(&t, 10).unwrap();
    assert_eq!(g.indices, vec![2]);
    let s = split_sum(&t, 10, &g).unwrap();
    assert!(s.strict);
    assert!(s.good_terms > 0.5 * s.full_sum, "{s:?}");
}

#[test]
fn short_expansions_at_the_boundary() {
    // q_2 = 2 a_2 + 1 is odd, so q_2 = 2 q_1^2 never happens and a bad index
    // always contributes strictly less than its bound
    let (_, t) = setup("[0; 2,4,(1)]", 6);
    assert!(good_indices(&t, 1).unwrap().contains(1));
    let (_, t) = setup("[0; 2,3,(1)]", 6);
    let g = good_indices(&t, 1).unwrap();
    assert!(g.is_empty());
    let s = split_sum(&t, 1, &g).unwrap();
    assert!(s.holds() && s.strict);
    let expect = Float::with_val(PREC, 7).ln() / 2u32;
    assert!((s.full_sum - expect.to_f64()).abs() < 1e-15);
}

#[test]
fn main_estimate_at_two_and_nineteen() {
    let (a, t) = setup(ENGINEERED, 8);
    let g = good_indices(&t, 7).unwrap();
    let ladder = build_ladder(&a, &t, &g).unwrap();
    let m = main_estimate_terms(&ladder.levels[0]).unwrap();
    assert_eq!((m.q, m.q_next, m.fib), (2.0, 19.0, 2.0));
    assert!((m.t1 + 19f64.ln() / 2.0).abs() < 1e-15);
    assert!((m.t2 - 96f64.ln() / 2.0).abs() < 1e-15);
    assert!((m.t3 - 3.0 / 7.0 * 16f64.ln()).abs() < 1e-15);
    assert!(m.chain_holds && m.substitution_holds);
    let m2 = main_estimate_terms(&ladder.levels[1]).unwrap();
    assert!(m2.chain_holds && m2.substitution_holds);
    // q = 19 > F_2 = 3: both substitutions are strict
    assert!(m2.t2_q < m2.t2 && m2.t3_q < m2.t3);
}

#[test]
fn douady_constant_fits_under_log_24() {
    let c = douady_constant();
    assert!((c - 3.1490).abs() < 1e-4);
    assert!(c < 24f64.ln());
    for q in 2..200u32 {
        let q = q as f64;
        assert!(2.0 * q.ln() / q + c / q <= (24.0 * q * q).ln() / q);
    }
}

#[test]
fn constant_audit_lands_below_sixteen() {
    let a = constant_audit(80, TailPolicy::Geometric).unwrap();
    assert!(a.holds(), "total {}", a.total);
    assert!(a.total > 15.0);
    let a40 = constant_audit(40, TailPolicy::Geometric).unwrap();
    assert!(a40.holds());
    // truncating earlier only loosens the rigorous bound
    assert!(a40.total >= a.total - 1e-12);
    for w in a.terms.windows(2).skip(1) {
        assert!(w[1].points < w[0].points && w[1].moving < w[0].moving);
    }
    assert!(a.terms.iter().all(|t| t.points > 0.0 && t.moving > 0.0));
}

#[test]
fn ladder_dump_round_trips() {
    let (a, t) = setup(ENGINEERED, 8);
    let g = good_indices(&t, 7).unwrap();
    let dump = build_ladder(&a, &t, &g).unwrap().dump();
    let text = serde_json::to_string(&dump).unwrap();
    assert!(text.contains("\"rB\"") && text.contains("\"S\""));
    let back: LadderDump = serde_json::from_str(&text).unwrap();
    assert_eq!(back, dump);
    assert_eq!(dump.levels[1].q, "19");
}
