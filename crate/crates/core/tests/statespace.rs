//! Metrics, state order and distribution parsing.

use proptest::prelude::*;
use wim_core::rational::{parse_rational, rat, rat_int};
use wim_core::statespace::{metric_on_three, state_index, state_tuple};
use wim_core::{
    custom_metric, discrete_metric, l0_metric, l1_metric, Distribution, Error, Factor, FiniteMetric,
    MetricSpec, ProductShape, Rat,
};

fn check_axioms(m: &FiniteMetric) {
    let n = m.n();
    for i in 0..n {
        assert_eq!(m.get(i, i), &rat_int(0));
        for j in 0..n {
            assert_eq!(m.get(i, j), m.get(j, i));
            if i != j {
                assert!(m.get(i, j) > &rat_int(0));
            }
            for k in 0..n {
                assert!(m.get(i, j) <= &(m.get(i, k) + m.get(k, j)));
            }
        }
    }
}

#[test]
fn product_metrics_count_coordinates() {
    let sizes = [3, 2, 2];
    let l0 = l0_metric(&sizes).unwrap();
    let l1 = l1_metric(&sizes).unwrap();
    check_axioms(&l0);
    check_axioms(&l1);
    for a in 0..12 {
        for b in 0..12 {
            let (x, y) = (state_tuple(&sizes, a), state_tuple(&sizes, b));
            let hamming = x.iter().zip(&y).filter(|(p, q)| p != q).count() as i64;
            let manhattan: i64 = x.iter().zip(&y).map(|(p, q)| (*p as i64 - *q as i64).abs()).sum();
            assert_eq!(l0.get(a, b), &rat_int(hamming));
            assert_eq!(l1.get(a, b), &rat_int(manhattan));
        }
    }
}

#[test]
fn first_coordinate_varies_slowest() {
    assert_eq!(state_tuple(&[2, 3], 0), vec![0, 0]);
    assert_eq!(state_tuple(&[2, 3], 1), vec![0, 1]);
    assert_eq!(state_tuple(&[2, 3], 3), vec![1, 0]);
    for s in 0..24 {
        assert_eq!(state_index(&[2, 3, 4], &state_tuple(&[2, 3, 4], s)), s);
    }
}

#[test]
fn symmetric_factor_states() {
    let f = Factor::new(2, 3);
    assert_eq!(f.states(), 4);
    assert_eq!(f.exponents().len(), 4);
    for e in f.exponents() {
        assert_eq!(e.iter().sum::<usize>(), 3);
    }
    let shape = ProductShape::new(vec![Factor::new(2, 2), Factor::new(2, 1)]).unwrap();
    assert_eq!(shape.n(), 6);
    assert_eq!(shape.sizes(), vec![3, 2]);
}

#[test]
fn discrete_metric_is_all_ones() {
    let m = discrete_metric(5).unwrap();
    check_axioms(&m);
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(m.get(i, j), &rat_int(i64::from(i != j)));
        }
    }
}

#[test]
fn triangle_violation_is_rejected() {
    let err = metric_on_three(rat_int(1), rat_int(3), rat_int(1)).unwrap_err();
    assert!(matches!(err, Error::TriangleViolation { .. }), "{err:?}");
    let asym = vec![
        vec![rat_int(0), rat_int(1)],
        vec![rat_int(2), rat_int(0)],
    ];
    assert!(custom_metric(asym).is_err());
}

#[test]
fn metric_spec_round_trip() {
    for m in [
        discrete_metric(4).unwrap(),
        l0_metric(&[2, 3]).unwrap(),
        l1_metric(&[3, 3]).unwrap(),
        metric_on_three(rat_int(1), rat(9, 10), rat_int(1)).unwrap(),
    ] {
        let spec = MetricSpec::describe(&m);
        let text = serde_json::to_string(&spec).unwrap();
        let back: MetricSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build().unwrap().rows(), m.rows());
    }
}

#[test]
fn distributions_validate_their_entries() {
    assert!(Distribution::from_f64(vec![0.5, 0.6]).is_err());
    assert!(Distribution::from_f64(vec![1.5, -0.5]).is_err());
    assert!(Distribution::from_rationals(vec![rat(1, 3), rat(1, 3)]).is_err());
    let d = Distribution::from_weights(&[1, 2, 1]).unwrap();
    assert_eq!(d.exact().unwrap(), &[rat(1, 4), rat(1, 2), rat(1, 4)]);
}

proptest! {
    #[test]
    fn exact_distribution_json_round_trip(weights in prop::collection::vec(0i64..50, 2..9)) {
        prop_assume!(weights.iter().any(|&w| w > 0));
        let d = Distribution::from_weights(&weights).unwrap();
        let back = Distribution::from_json(&d.to_json()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn float_distribution_json_round_trip(raw in prop::collection::vec(0.01f64..1.0, 2..9)) {
        let total: f64 = raw.iter().sum();
        let d = Distribution::from_f64(raw.iter().map(|x| x / total).collect()).unwrap();
        let text = serde_json::to_string(&d.to_json()).unwrap();
        let back = Distribution::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back.to_f64(), d.to_f64());
    }

    #[test]
    fn rationals_print_and_parse(num in -1000i64..1000, den in 1i64..1000) {
        let r: Rat = rat(num, den);
        prop_assert_eq!(parse_rational(&wim_core::rational::format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn custom_metrics_on_three_points(a in 1i64..20, b in 1i64..20, c in 1i64..20) {
        let ok = a <= b + c && b <= a + c && c <= a + b;
        let built = metric_on_three(rat_int(a), rat_int(b), rat_int(c));
        prop_assert_eq!(built.is_ok(), ok);
        if let Ok(m) = built {
            check_axioms(&m);
        }
    }
}
