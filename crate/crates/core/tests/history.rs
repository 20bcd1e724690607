use frachill::history::{
    parse_history, ForcingConfig, ForcingEvaluator, ForcingMethod, HistoryFunction, HistoryKind,
};
use frachill::specfun::{gamma, upper_incomplete_gamma};
use frachill::Error;
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

fn v1(x: f64) -> DVector<f64> {
    DVector::from_element(1, x)
}

fn ramp() -> HistoryFunction {
    HistoryFunction::new(HistoryKind::PiecewiseConstantRamp { far_value: v1(1.0), ramp_start: -1.0 }, 0.0).unwrap()
}

fn exp_growth() -> HistoryFunction {
    HistoryFunction::new(HistoryKind::ExpGrowth { rate: 1.0, coeff: v1(1.0) }, 0.0).unwrap()
}

fn sine(window: Option<f64>) -> HistoryFunction {
    HistoryFunction::new(
        HistoryKind::TruncatedSinusoid { amplitude: v1(1.0), frequency: 1.0, phase: 0.0, window },
        0.0,
    )
    .unwrap()
}

fn quadrature(h: HistoryFunction, alpha: f64) -> ForcingEvaluator {
    let cfg = ForcingConfig { method: ForcingMethod::Quadrature, ..ForcingConfig::default() };
    ForcingEvaluator::with_config(h, alpha, cfg).unwrap()
}

fn cusp_samples(alpha: f64) -> HistoryFunction {
    // |t|^α on (-1, 0], sampled finely
    let n = 2000;
    let times: Vec<f64> = (0..=n).map(|j| -1.0 + j as f64 / n as f64).collect();
    let values: Vec<DVector<f64>> = times.iter().map(|t| v1(t.abs().powf(alpha))).collect();
    HistoryFunction::new(HistoryKind::Sampled { times, values, tail: v1(1.0) }, 0.0).unwrap()
}

#[test]
fn history_evaluation_examples() {
    let c = HistoryFunction::constant(&[1.0], 0.0).unwrap();
    assert_eq!(c.eval(-7.0).unwrap()[0], 1.0);
    assert_eq!(c.derivative(-3.0).unwrap()[0], 0.0);
    assert!((exp_growth().eval(-1.0).unwrap()[0] - (-1.0f64).exp()).abs() < 1e-16);
    let f = HistoryFunction::floquet(
        Complex64::new(0.2, 0.0),
        1.0,
        vec![(0, DVector::from_element(1, Complex64::new(1.0, 0.0))), (1, DVector::from_element(1, Complex64::new(0.5, 0.0)))],
        0.0,
    )
    .unwrap();
    assert!((f.eval(0.0).unwrap()[0] - 1.5).abs() < 1e-15);
    assert_eq!(ramp().derivative(-0.5).unwrap()[0], -1.0);
    assert!((sine(None).derivative(0.0).unwrap()[0] - 1.0).abs() < 1e-15);
}

#[test]
fn ramp_forcing_value() {
    let fe = ForcingEvaluator::new(ramp(), 0.5).unwrap();
    let want = (1.0 - 2f64.sqrt()) / gamma(1.5).unwrap();
    assert!((fe.forcing(1.0).unwrap()[0] - want).abs() < 1e-14);
    assert!((want + 0.467_390).abs() < 1e-6);
}

#[test]
fn exp_growth_forcing_value() {
    let fe = ForcingEvaluator::new(exp_growth(), 0.5).unwrap();
    let want = 2f64.exp() * upper_incomplete_gamma(0.5, 2.0).unwrap() / gamma(0.5).unwrap();
    let got = fe.forcing(2.0).unwrap()[0];
    assert!((got - want).abs() < 1e-13, "{got} vs {want}");
}

#[test]
fn constant_history_has_zero_forcing() {
    let fe = ForcingEvaluator::new(HistoryFunction::constant(&[1.0, -2.0], 0.0).unwrap(), 0.4).unwrap();
    for t in [0.0, 0.3, 10.0] {
        assert_eq!(fe.forcing(t).unwrap().amax(), 0.0);
    }
    let q = quadrature(HistoryFunction::constant(&[1.0, -2.0], 0.0).unwrap(), 0.4);
    assert!(q.forcing(0.7).unwrap().amax() < 1e-12);
}

#[test]
fn sinusoid_forcing_matches_reference() {
    // tests/oracles/forcing.py
    let fe = ForcingEvaluator::new(sine(None), 0.5).unwrap();
    assert!((fe.forcing(1.0).unwrap()[0] - 0.131_004_477_175_322_76).abs() < 1e-11);
    let fe = ForcingEvaluator::new(sine(None), 0.3).unwrap();
    assert!((fe.forcing(5.0).unwrap()[0] - 0.026_102_923_971_489_842).abs() < 1e-11);
    let h = HistoryFunction::new(
        HistoryKind::TruncatedSinusoid { amplitude: v1(1.5), frequency: 1.0, phase: 0.3, window: Some(6.0) },
        0.0,
    )
    .unwrap();
    let fe = ForcingEvaluator::new(h.clone(), 0.5).unwrap();
    assert!((fe.forcing(2.5).unwrap()[0] - 0.051_973_918_562_890_5).abs() < 1e-11);
    assert!((quadrature(h, 0.5).forcing(2.5).unwrap()[0] - 0.051_973_918_562_890_5).abs() < 1e-10);
}

#[test]
fn floquet_forcing_matches_reference() {
    let h = HistoryFunction::floquet(
        Complex64::new(0.4, 0.0),
        1.0,
        vec![
            (0, DVector::from_element(1, Complex64::new(1.0, 0.0))),
            (1, DVector::from_element(1, Complex64::new(0.5, -0.25))),
        ],
        0.0,
    )
    .unwrap();
    let want = 0.313_987_291_701_674_53;
    assert!((ForcingEvaluator::new(h.clone(), 0.7).unwrap().forcing(1.0).unwrap()[0] - want).abs() < 1e-11);
    assert!((quadrature(h, 0.7).forcing(1.0).unwrap()[0] - want).abs() < 1e-10);
}

#[test]
fn quadrature_agrees_with_closed_forms() {
    for alpha in [0.3, 0.5, 0.8] {
        for h in [ramp(), exp_growth(), sine(Some(4.0))] {
            let exact = ForcingEvaluator::new(h.clone(), alpha).unwrap();
            let quad = quadrature(h, alpha);
            for i in 0..=40 {
                let t = 0.5 * i as f64;
                let a = exact.forcing(t).unwrap()[0];
                let b = quad.forcing(t).unwrap()[0];
                assert!((a - b).abs() < 1e-7, "alpha {alpha} t {t}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn sampled_forcing_is_exact_for_piecewise_linear() {
    let h = HistoryFunction::new(
        HistoryKind::Sampled {
            times: vec![-1.0, -0.5, 0.0],
            values: vec![v1(1.0), v1(0.5), v1(0.0)],
            tail: v1(1.0),
        },
        0.0,
    )
    .unwrap();
    let s = ForcingEvaluator::new(h.clone(), 0.5).unwrap();
    let r = ForcingEvaluator::new(ramp(), 0.5).unwrap();
    let q = quadrature(h, 0.5);
    for t in [0.0, 0.1, 1.0, 7.5] {
        let want = r.forcing(t).unwrap()[0];
        assert!((s.forcing(t).unwrap()[0] - want).abs() < 1e-13);
        assert!((q.forcing(t).unwrap()[0] - want).abs() < 1e-9);
    }
}

#[test]
fn oscillatory_tails_are_refused_by_quadrature() {
    assert!(matches!(quadrature(sine(None), 0.5).forcing(1.0), Err(Error::Quadrature(_))));
}

fn bound_histories() -> Vec<HistoryFunction> {
    vec![
        HistoryFunction::constant(&[1.0], 0.0).unwrap(),
        ramp(),
        exp_growth(),
        sine(None),
        sine(Some(2.0)),
        HistoryFunction::floquet(
            Complex64::new(0.1, 0.3),
            2.0,
            vec![(-1, DVector::from_element(1, Complex64::new(0.2, 0.1))), (0, DVector::from_element(1, Complex64::new(1.0, 0.0)))],
            0.0,
        )
        .unwrap(),
    ]
}

#[test]
fn decay_bounds_hold() {
    for alpha in [0.3, 0.5, 0.9] {
        for h in bound_histories() {
            let fe = ForcingEvaluator::new(h.clone(), alpha).unwrap();
            let (c, eta) = fe.bound_constant();
            let sup = h.sup_norm();
            let g = gamma(1.0 - alpha).unwrap();
            for i in 0..=500 {
                let s = 0.1 * i as f64;
                let f = fe.forcing(s).unwrap().norm();
                assert!(f <= c * (s + eta).powf(-alpha) + 1e-8, "{h:?}: t = {s}");
                if s > 0.0 {
                    assert!(f <= 2.0 * sup * s.powf(-alpha) / g + 1e-8);
                }
            }
        }
    }
}

#[test]
fn bound_constant_examples() {
    let fe = ForcingEvaluator::new(HistoryFunction::constant(&[1.0], 0.0).unwrap(), 0.5).unwrap();
    let (c, eta) = fe.bound_constant();
    assert_eq!(eta, 1.0);
    assert!((c - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
    let (c, _) = ForcingEvaluator::new(ramp(), 0.5).unwrap().bound_constant();
    assert!((c - 4.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
    let (c, _) = ForcingEvaluator::new(HistoryFunction::constant(&[0.0], 0.0).unwrap(), 0.5).unwrap().bound_constant();
    assert_eq!(c, 0.0);
}

#[test]
fn forcing_is_continuous() {
    for h in bound_histories() {
        let fe = ForcingEvaluator::new(h, 0.5).unwrap();
        for t in [0.0, 1.0] {
            let f0 = fe.forcing(t).unwrap();
            let diffs: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|h| (fe.forcing(t + h).unwrap() - &f0).norm()).collect();
            assert!(diffs[1] <= diffs[0] && diffs[2] <= diffs[1], "{diffs:?}");
        }
    }
}

#[test]
fn invalid_histories_are_rejected() {
    let decaying = HistoryFunction::new(HistoryKind::ExpGrowth { rate: -1.0, coeff: v1(1.0) }, 0.0);
    assert!(matches!(decaying, Err(Error::DivergentForcing(_))));
    for alpha in [0.3, 0.5, 0.7] {
        assert!(matches!(ForcingEvaluator::new(cusp_samples(alpha), alpha), Err(Error::SingularForcing(_))));
    }
    assert!(matches!(ForcingEvaluator::new(ramp(), 0.5).unwrap().forcing(-0.1), Err(Error::OutOfDomain { .. })));
}

#[test]
fn json_round_trip() {
    let h = parse_history(r#"{"kind": "constant", "value": [1.0], "t0": 0.0}"#).unwrap();
    assert_eq!(h, HistoryFunction::constant(&[1.0], 0.0).unwrap());
    let h = parse_history(
        r#"{"kind": "floquet", "lambda": {"re": 0.2, "im": 0.0}, "omega": 1.0,
            "coeffs": [{"k": 0, "re": [1.0], "im": [0.0]}, {"k": 1, "re": [0.5], "im": [0.0]}], "t0": 0.0}"#,
    )
    .unwrap();
    assert!((h.eval(0.0).unwrap()[0] - 1.5).abs() < 1e-15);
    let text = serde_json::to_string(&h.to_document()).unwrap();
    assert_eq!(parse_history(&text).unwrap(), h);
    assert!(matches!(parse_history(r#"{"kind": "exp_growth", "rate": -1.0, "coeff": [1.0]}"#), Err(Error::DivergentForcing(_))));
    assert!(matches!(parse_history(r#"{"kind": "constant", "value": [1.0], "bogus": 1}"#), Err(Error::Schema(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_ramps_respect_both_bounds(alpha in 0.1..0.95f64, far in -3.0..3.0f64, start in -5.0..-0.05f64, t in 0.0..50.0f64) {
        let h = HistoryFunction::new(HistoryKind::PiecewiseConstantRamp { far_value: v1(far), ramp_start: start }, 0.0).unwrap();
        let fe = ForcingEvaluator::new(h.clone(), alpha).unwrap();
        let (c, eta) = fe.bound_constant();
        let f = fe.forcing(t).unwrap().norm();
        prop_assert!(f <= c * (t + eta).powf(-alpha) + 1e-8);
        if t > 0.0 {
            prop_assert!(f <= 2.0 * h.sup_norm() * t.powf(-alpha) / gamma(1.0 - alpha).unwrap() + 1e-8);
        }
    }
}
