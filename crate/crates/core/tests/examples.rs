use std::f64::consts::{E, LN_2};

use hardy_means::envelope::{concave_envelope, find_a, find_b, gamma, grid_envelope_oracle};
use hardy_means::generator::{Declared, DiniSide, GeneratorSpec};
use hardy_means::hardy::{
    hardy_concave, hardy_envelope, hardy_exists, hardy_factorial_bound, hardy_truncated,
    hardy_upper_bound_phi, ExistenceBranch, Route,
};
use hardy_means::harness::{hardy_ratio, sweep, SequenceKind, SequenceSpec, SweepConfig};
use hardy_means::mean::{check_mean_axioms, mean_generic, mean_truncated_detail, MeanRequest};
use hardy_means::presets::{g_dip, g_l};
use hardy_means::quadrature::{integral_f_inv, k_of_g};
use hardy_means::validate::{
    all_passed, check_lhqd, default_grid, first_failure, log_grid, validate_phi, validate_script_f,
    ConditionId,
};
use hardy_means::{Error, Piecewise};

mod common;
use common::scalar_oracle;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn t2_minus_1() -> GeneratorSpec {
    GeneratorSpec::piecewise(Piecewise::polynomial(vec![-1.0, 0.0, 1.0]).unwrap())
}

fn min_t1_1(t: f64) -> f64 {
    (t - 1.0).min(1.0)
}

#[test]
fn eval_examples() {
    assert_eq!(GeneratorSpec::log().eval(1.0).unwrap(), 0.0);
    assert_eq!(
        GeneratorSpec::truncated_linear(1.0)
            .unwrap()
            .eval(3.0)
            .unwrap(),
        1.0
    );
    assert_eq!(GeneratorSpec::power(0.5).unwrap().eval(4.0).unwrap(), 1.0);
    assert!(matches!(
        GeneratorSpec::log().eval(0.0),
        Err(Error::Domain(_))
    ));
}

#[test]
fn validate_phi_examples() {
    let grid = default_grid();
    assert!(all_passed(
        &validate_phi(&GeneratorSpec::log(), &grid).unwrap()
    ));
    assert!(all_passed(&validate_phi(&g_dip(), &grid).unwrap()));

    let reports = validate_phi(&t2_minus_1(), &log_grid(1e-2, 1e2, 400)).unwrap();
    let fail = first_failure(&reports).unwrap();
    assert_eq!(fail.condition_id, ConditionId::Phi2);
    let w = fail.witness.unwrap();
    assert!(w.t > 1.0 && w.lhs > w.rhs);
    assert!(close(w.lhs, w.t * w.t - 1.0, 1e-12) && close(w.rhs, w.t - 1.0, 1e-12));
}

#[test]
fn validate_script_f_examples() {
    let grid = default_grid();
    assert!(all_passed(
        &validate_script_f(&GeneratorSpec::log(), &grid).unwrap()
    ));
    let h = GeneratorSpec::truncated_linear(1.0).unwrap();
    assert!(all_passed(&validate_script_f(&h, &grid).unwrap()));
}

#[test]
fn check_lhqd_examples() {
    let grid = default_grid();
    assert!(
        check_lhqd(&GeneratorSpec::power(-1.0).unwrap(), 1.0, &grid)
            .unwrap()
            .passed
    );
    assert!(
        check_lhqd(&GeneratorSpec::log(), 0.0, &grid)
            .unwrap()
            .passed
    );
    let r = check_lhqd(&g_dip(), 0.0, &grid).unwrap();
    assert!(!r.passed);
    let w = r.witness.unwrap();
    assert!(w.t > 2.0 && w.t < 3.0, "{w:?}");
    assert!(g_dip().value(2.4) < g_dip().value(2.1));
}

#[test]
fn limit_estimator_examples() {
    let h2 = GeneratorSpec::truncated_linear(2.0).unwrap();
    assert_eq!(h2.limsup_at_zero().unwrap(), -1.0);
    assert_eq!(
        GeneratorSpec::log().limsup_at_zero().unwrap(),
        f64::NEG_INFINITY
    );
    let pw = Piecewise::new(vec![0.5], vec![vec![-1.0, 0.0, 1.0], vec![-1.25, 1.0]]).unwrap();
    let g = GeneratorSpec::piecewise(pw);
    assert!(close(g.limsup_at_zero().unwrap(), -1.0, 1e-9));

    assert_eq!(h2.limsup_slope_at_inf().unwrap(), 0.0);
    assert!(close(
        GeneratorSpec::power(1.0)
            .unwrap()
            .limsup_slope_at_inf()
            .unwrap(),
        1.0,
        1e-9
    ));
    assert!(
        GeneratorSpec::power(0.5)
            .unwrap()
            .limsup_slope_at_inf()
            .unwrap()
            .abs()
            < 1e-9
    );
}

#[test]
fn dini_examples() {
    let h = GeneratorSpec::truncated_linear(1.0).unwrap();
    assert_eq!(h.dini(2.0, DiniSide::LeftLower).unwrap(), 1.0);
    assert_eq!(h.dini(2.0, DiniSide::RightUpper).unwrap(), 0.0);
    for side in [DiniSide::LeftLower, DiniSide::RightUpper] {
        assert!(close(
            GeneratorSpec::log().dini(1.0, side).unwrap(),
            1.0,
            1e-8
        ));
    }
}

#[test]
fn contact_point_examples() {
    assert_eq!(find_a(&GeneratorSpec::log()).unwrap(), (0.0, 1.0));
    assert_eq!(
        find_a(&GeneratorSpec::truncated_linear(3.0).unwrap()).unwrap(),
        (0.0, 1.0)
    );
    let (a, p) = find_a(&g_l()).unwrap();
    assert!(close(a, 1.0, 1e-12) && close(p, 1.0, 1e-12), "{a} {p}");

    assert_eq!(
        find_b(&GeneratorSpec::power(0.5).unwrap()).unwrap(),
        (f64::INFINITY, 1.0)
    );
    assert_eq!(find_b(&GeneratorSpec::log()).unwrap(), (f64::INFINITY, 1.0));
    let (b, q) = find_b(&g_dip()).unwrap();
    assert!(close(b, 2.0, 1e-12) && q == 0.0, "{b} {q}");
}

#[test]
fn gamma_examples() {
    let log = GeneratorSpec::log();
    assert_eq!(gamma(&log, 0.0, f64::INFINITY, 0.3, 0.7).unwrap(), log);

    let grid = log_grid(1e-3, 1e3, 500);
    let gd = gamma(&g_dip(), 0.0, 2.0, 1.0, 0.0).unwrap();
    let gl = gamma(&g_l(), 1.0, f64::INFINITY, 1.0, 1.0).unwrap();
    for &t in &grid {
        assert!((gd.value(t) - min_t1_1(t)).abs() < 1e-12, "t = {t}");
        assert!((gl.value(t) - min_t1_1(t)).abs() < 1e-12, "t = {t}");
    }
    assert!(matches!(
        gamma(&g_dip(), 2.0, 2.0, 1.0, 0.0),
        Err(Error::Argument(_))
    ));
}

#[test]
fn concave_envelope_examples() {
    let h = GeneratorSpec::truncated_linear(1.0).unwrap();
    let e = concave_envelope(&h).unwrap();
    assert!(e.is_identity());
    let grid = log_grid(1e-3, 1e3, 500);
    for g in [g_dip(), g_l()] {
        let e = concave_envelope(&g).unwrap();
        for &t in &grid {
            assert!((e.envelope.value(t) - min_t1_1(t)).abs() < 1e-12, "t = {t}");
        }
    }
}

#[test]
fn hull_oracle_examples() {
    let grid = log_grid(1e-3, 1e3, 300);
    let log = GeneratorSpec::log();
    let hull = grid_envelope_oracle(&log, &grid).unwrap();
    for &t in &grid {
        assert!((hull.eval(t) - t.ln()).abs() < 1e-12);
    }

    let grid = log_grid(0.01, 10.0, 2000);
    let hull = grid_envelope_oracle(&g_dip(), &grid).unwrap();
    let d = grid
        .iter()
        .map(|&t| (hull.eval(t) - min_t1_1(t)).abs())
        .fold(0.0, f64::max);
    assert!(d <= 5e-3, "{d}");

    let hull = grid_envelope_oracle(&log, &[0.5, 2.0]).unwrap();
    let chord = |t: f64| 0.5f64.ln() + (t - 0.5) * (2f64.ln() - 0.5f64.ln()) / 1.5;
    assert!((hull.eval(1.0) - chord(1.0)).abs() < 1e-15);

    assert!(matches!(
        grid_envelope_oracle(&log, &[2.0, 1.0]),
        Err(Error::Argument(_))
    ));
}

#[test]
fn mean_examples() {
    let m = |g: GeneratorSpec, x: &[f64]| {
        mean_generic(&MeanRequest::new(g, x.to_vec()).unwrap()).unwrap()
    };
    assert!(close(
        m(GeneratorSpec::power(1.0).unwrap(), &[1.0, 2.0, 3.0]),
        2.0,
        1e-12
    ));
    assert!(close(m(GeneratorSpec::log(), &[1.0, 4.0]), 2.0, 1e-12));
    assert!(close(
        m(GeneratorSpec::truncated_linear(1.0).unwrap(), &[1.0, 3.0]),
        2.0,
        1e-12
    ));
    assert!(MeanRequest::new(GeneratorSpec::log(), vec![1.0, 0.0]).is_err());
}

#[test]
fn truncated_mean_examples() {
    let r = mean_truncated_detail(1.0, &[1.0, 3.0]).unwrap();
    assert_eq!((r.k, r.y), (2, 2.0));
    let r = mean_truncated_detail(1.0, &[1.0, 10.0]).unwrap();
    assert_eq!((r.k, r.y), (2, 5.5));
    assert!(10.0 <= r.y * 2.0);
    assert_eq!(mean_truncated_detail(2.0, &[5.0, 5.0, 5.0]).unwrap().y, 5.0);
}

#[test]
fn axiom_examples() {
    let req = MeanRequest::new(GeneratorSpec::log(), vec![1.0]).unwrap();
    let report = check_mean_axioms(&req, 100, 42).unwrap();
    assert!(report.passed && report.monotonicity_checked, "{report:?}");

    let h = GeneratorSpec::truncated_linear(1.0).unwrap();
    let scaled = mean_generic(&MeanRequest::new(h, vec![3.0, 9.0]).unwrap()).unwrap();
    assert!(close(scaled, 6.0, 1e-12));
    let single = MeanRequest::new(GeneratorSpec::power(0.5).unwrap(), vec![7.0]).unwrap();
    assert_eq!(mean_generic(&single).unwrap(), 7.0);
}

#[test]
fn integral_examples() {
    let r = integral_f_inv(&GeneratorSpec::log(), E).unwrap();
    assert!(r.value.abs() < 1e-10 && r.converged);
    let r = integral_f_inv(&GeneratorSpec::power(1.0).unwrap(), 1.0).unwrap();
    assert!(r.divergence_flag && !r.converged && r.value == f64::INFINITY);
    for m in [0.5, 1.0, 7.0] {
        let r = integral_f_inv(&GeneratorSpec::truncated_linear(m).unwrap(), 1.0).unwrap();
        assert!((r.value - (m + 1.0f64).ln()).abs() < 1e-10);
    }
}

#[test]
fn k_examples() {
    let k = k_of_g(&g_l(), 1.0, f64::INFINITY).unwrap();
    assert!((k.value - LN_2).abs() < 1e-10, "{}", k.value);
    let k = k_of_g(
        &GeneratorSpec::truncated_linear(1.0).unwrap(),
        1.0,
        f64::INFINITY,
    )
    .unwrap();
    assert!((k.value - LN_2).abs() < 1e-10, "{}", k.value);
}

#[test]
fn hardy_concave_examples() {
    let c = |g: GeneratorSpec| hardy_concave(&g).unwrap().constant;
    assert!(close(c(GeneratorSpec::log()), E, 1e-8));
    assert!(close(c(GeneratorSpec::power(0.5).unwrap()), 4.0, 1e-8));
    assert!(close(c(GeneratorSpec::power(-1.0).unwrap()), 2.0, 1e-8));
    assert!(matches!(
        hardy_concave(&g_dip()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn hardy_truncated_examples() {
    let r = hardy_truncated(1e-12).unwrap();
    assert!(r.constant > 1.0 && r.constant - 1.0 < 1e-5);
    let r = hardy_truncated(1.0).unwrap();
    assert!(close(r.constant, scalar_oracle(LN_2), 1e-10));
    assert!((r.constant - 2.67835).abs() < 1e-5);
    let r = hardy_truncated(E - 1.0).unwrap();
    assert!(close(r.constant, scalar_oracle(1.0), 1e-10));
    assert!((r.constant - 3.1462).abs() < 1e-4);
}

#[test]
fn factorial_bound_examples() {
    let b = |m: f64, n: u32| hardy_factorial_bound(m, n).unwrap();
    assert!(close(b(1.0, 2), (2.0 * LN_2).sqrt().exp(), 1e-14));
    assert!(close(b(1.0, 3), (6.0 * LN_2).cbrt().exp(), 1e-14));
    assert!(close(b(E - 1.0, 2), 2f64.sqrt().exp(), 1e-14));
    assert!(matches!(
        hardy_factorial_bound(1.0, 1),
        Err(Error::Argument(_))
    ));
}

#[test]
fn existence_examples() {
    let e = hardy_exists(&GeneratorSpec::log()).unwrap();
    assert!(e.exists && e.branch == ExistenceBranch::IntegralTest);
    assert!((e.value - 1.0).abs() < 1e-10);
    assert!(
        !hardy_exists(&GeneratorSpec::power(1.0).unwrap())
            .unwrap()
            .exists
    );
    let e = hardy_exists(&g_dip()).unwrap();
    assert!(e.exists && e.branch == ExistenceBranch::Boundedness && e.value == 1.0);
}

#[test]
fn hardy_envelope_examples() {
    let oracle = scalar_oracle(LN_2);
    let r = hardy_envelope(&GeneratorSpec::log()).unwrap();
    assert_eq!(r.route, Route::EnvelopeCaseI);
    assert!(close(r.constant, E, 1e-8));

    let r = hardy_envelope(&g_dip()).unwrap();
    assert_eq!(r.route, Route::EnvelopeCaseII);
    assert!(close(r.envelope.as_ref().unwrap().b, 2.0, 1e-12));
    assert!(close(r.constant, oracle, 1e-8));

    let r = hardy_envelope(&g_l()).unwrap();
    assert_eq!(r.route, Route::EnvelopeCaseIIIKpos);
    assert!((r.k_value.unwrap() - LN_2).abs() < 1e-10);
    assert!(close(r.constant, oracle, 1e-8));
    assert!(r.cross_check.unwrap().relative_difference <= 1e-6);

    let r = hardy_envelope(&GeneratorSpec::power(1.0).unwrap()).unwrap();
    assert_eq!(r.constant, f64::INFINITY);
    assert!(r.diagnosis.is_some());
}

#[test]
fn upper_bound_examples() {
    let oracle = scalar_oracle(LN_2);
    for g in [g_dip(), GeneratorSpec::truncated_linear(1.0).unwrap()] {
        let r = hardy_upper_bound_phi(&g).unwrap();
        assert!(close(r.constant, oracle, 1e-8));
        assert!(!r.alternatives.is_empty());
        for alt in &r.alternatives {
            assert!(close(alt.constant, oracle, 1e-6), "{alt:?}");
        }
    }
    let r = hardy_upper_bound_phi(&GeneratorSpec::log()).unwrap();
    assert!(close(r.constant, E, 1e-8));
    assert!(r
        .alternatives
        .iter()
        .all(|a| a.route != Route::BoundedTranscendental));
}

#[test]
fn ratio_examples() {
    let seq = SequenceSpec::new(SequenceKind::Constant, 100, 1.0).unwrap();
    let r = hardy_ratio(&GeneratorSpec::power(1.0).unwrap(), &seq).unwrap();
    assert!((r.final_ratio - 1.0).abs() < 1e-12);

    let seq = SequenceSpec::new(SequenceKind::Geometric { ratio: 0.5 }, 32, 1.0).unwrap();
    let r = hardy_ratio(&GeneratorSpec::log(), &seq).unwrap();
    assert!(r.final_ratio < E && r.dominated);

    let seq = SequenceSpec::new(SequenceKind::PowerDecay { exponent: 2.0 }, 10_000, 1.0).unwrap();
    let r = hardy_ratio(&GeneratorSpec::truncated_linear(1.0).unwrap(), &seq).unwrap();
    assert!(r.final_ratio <= 2.67835 && r.dominated);
}

#[test]
fn sweep_examples() {
    let cfg = SweepConfig::from_json(
        r#"{"generators": [
                {"id": "M=0.5", "generator": "truncated:0.5"},
                {"id": "M=1", "generator": "truncated:1"},
                {"id": "M=2", "generator": "truncated:2"}],
            "sequences": [
                {"id": "r=0.3", "sequence": "geometric:0.3"},
                {"id": "r=0.7", "sequence": {"kind": "geometric", "ratio": 0.7}}],
            "n": 4096}"#,
    )
    .unwrap();
    let rows = sweep(&cfg);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.dominated == Some(true)));

    let empty = SweepConfig::from_json(
        r#"{"generators": [], "sequences": [{"id": "c", "sequence": "constant"}], "n": 8}"#,
    )
    .unwrap();
    assert!(sweep(&empty).is_empty());

    let arith = SweepConfig::from_json(
        r#"{"generators": [{"id": "p=1", "generator": "power:1"}],
            "sequences": [{"id": "c", "sequence": "constant"}], "n": 16}"#,
    )
    .unwrap();
    let rows = sweep(&arith);
    assert_eq!(rows[0].theoretical_constant, Some(f64::INFINITY));
    assert_eq!(rows[0].dominated, Some(true));
}

#[test]
fn declared_limits_win() {
    let g = GeneratorSpec::piecewise(Piecewise::polynomial(vec![-1.0, 1.0]).unwrap())
        .with_g0plus(Declared::Value(-1.0))
        .unwrap();
    assert_eq!(g.limsup_at_zero().unwrap(), -1.0);
}
