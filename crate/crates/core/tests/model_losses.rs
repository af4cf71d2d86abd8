//! Data-model and loss invariants: serialization round trips, the
//! disagreement/error identity, loss dominance, and exact-versus-sampled
//! suprema.

use proptest::prelude::*;
use robrel::losses::{fixed_loss, robust_loss_sup, robust_loss_sup_with, LossKind, SupMethod, SupOptions};
use robrel::model::{
    empirical_disagreement, empirical_error, predict, read_dataset_csv, write_dataset_csv, BaseFunction, Dataset,
    FiniteMap, Hypothesis, Label, LabeledSample, PerturbationModel, Point,
};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, any::<f64>().prop_filter("finite", |v| v.is_finite())]
}

fn point(d: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(finite(), d).prop_map(|v| Point::new(v).unwrap())
}

fn unit_normal(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, d).prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

fn base() -> impl Strategy<Value = BaseFunction> {
    prop_oneof![
        (-2.0f64..2.0).prop_map(|c| BaseFunction::Constant { d: 1, c }),
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| BaseFunction::Affine { a: vec![a], b }),
        (0.0f64..1.0, 0.5f64..3.0, -3.0f64..3.0, -1.0f64..1.0).prop_map(|(amplitude, frequency, phase, offset)| {
            BaseFunction::Sinusoid { d: 1, amplitude, frequency, phase, offset }
        }),
    ]
}

fn hypothesis2() -> impl Strategy<Value = Hypothesis> {
    prop_oneof![
        unit_normal(2).prop_map(|w| Hypothesis::linear(w).unwrap()),
        (base(), -1.0f64..1.0).prop_map(|(b, t)| Hypothesis::offset(b, t).unwrap()),
    ]
}

fn small_point2() -> impl Strategy<Value = Point> {
    prop::collection::vec(-3.0f64..3.0, 2).prop_map(|v| Point::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn point_round_trip_is_bit_exact(p in point(4)) {
        let back: Point = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert!(back.bit_eq(&p));
    }

    #[test]
    fn hypothesis_round_trip(h in hypothesis2(), t in finite()) {
        for h in [h, Hypothesis::threshold(t).unwrap()] {
            let back: Hypothesis = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
            prop_assert_eq!(back, h);
        }
    }

    #[test]
    fn dataset_json_and_csv_round_trip(pts in prop::collection::vec(point(3), 0..20), w in unit_normal(3)) {
        let h = Hypothesis::linear(w).unwrap();
        let ds = Dataset::labeled_by(&h, pts).unwrap();
        let back: Dataset = serde_json::from_str(&serde_json::to_string(&ds).unwrap()).unwrap();
        prop_assert_eq!(&back, &ds);
        let mut buf = Vec::new();
        write_dataset_csv(&ds, &mut buf).unwrap();
        let back = read_dataset_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn label_serializes_as_bit(positive in any::<bool>()) {
        let l = if positive { Label::Positive } else { Label::Negative };
        let s = serde_json::to_string(&l).unwrap();
        prop_assert_eq!(s, if positive { "1" } else { "0" });
        let back: Label = serde_json::from_str(&serde_json::to_string(&l).unwrap()).unwrap();
        prop_assert_eq!(back, l);
    }

    #[test]
    fn disagreement_is_error_against_relabeling(
        h1 in hypothesis2(), h2 in hypothesis2(), pts in prop::collection::vec(small_point2(), 1..30)
    ) {
        prop_assume!(h1.dim() == h2.dim());
        let s = Dataset::labeled_by(&h1, pts).unwrap();
        let d = empirical_disagreement(&h1, &h2, &s).unwrap();
        prop_assert_eq!(d, empirical_error(&h1, &s.relabeled(&h2).unwrap()).unwrap());
        prop_assert_eq!(d, empirical_disagreement(&h2, &h1, &s).unwrap());
    }

    #[test]
    fn predict_is_deterministic(h in hypothesis2(), x in small_point2()) {
        prop_assert_eq!(predict(&h, &x).unwrap(), predict(&h, &x).unwrap());
    }

    #[test]
    fn loss_dominance(
        w in unit_normal(2), ws in unit_normal(2), x in small_point2(), z in small_point2()
    ) {
        let h = Hypothesis::linear(w).unwrap();
        let hs = Hypothesis::linear(ws).unwrap();
        let ca = fixed_loss(LossKind::CA, &h, &hs, &x, &z).unwrap();
        let tl = fixed_loss(LossKind::TL, &h, &hs, &x, &z).unwrap();
        let st = fixed_loss(LossKind::ST, &h, &hs, &x, &z).unwrap();
        prop_assert!(ca <= tl);
        if ca == 1 {
            prop_assert_eq!(st, 1);
        }
    }

    #[test]
    fn identity_perturbation_collapses(w in unit_normal(2), ws in unit_normal(2), x in small_point2()) {
        let h = Hypothesis::linear(w).unwrap();
        let hs = Hypothesis::linear(ws).unwrap();
        let map = FiniteMap::new(vec![(x.clone(), vec![x.clone()])]).unwrap();
        let model = PerturbationModel::FiniteMap { map };
        let want = u8::from(predict(&h, &x).unwrap() != predict(&hs, &x).unwrap());
        for kind in LossKind::ALL {
            prop_assert_eq!(robust_loss_sup(kind, &h, &hs, &x, &model).unwrap().value, want);
            // A zero-radius ball is the same perturbation set.
            let ball = PerturbationModel::ball(0.0).unwrap();
            prop_assert_eq!(robust_loss_sup(kind, &h, &hs, &x, &ball).unwrap().value, want);
        }
    }

    #[test]
    fn sampled_never_exceeds_exact(
        w in unit_normal(2), ws in unit_normal(2), x in small_point2(), eta in 0.0f64..2.0, seed in any::<u64>()
    ) {
        let h = Hypothesis::linear(w).unwrap();
        let hs = Hypothesis::linear(ws).unwrap();
        let ball = PerturbationModel::ball(eta).unwrap();
        let opts = SupOptions { samples: Some(256), seed: Some(seed), force_sampling: true };
        for kind in LossKind::ALL {
            let exact = robust_loss_sup(kind, &h, &hs, &x, &ball).unwrap();
            prop_assert_eq!(exact.method, SupMethod::Exact);
            let sampled = robust_loss_sup_with(kind, &h, &hs, &x, &ball, &opts).unwrap();
            prop_assert!(sampled.value <= exact.value);
        }
    }
}

#[test]
fn ball_examples_from_boundary_distance() {
    let h = Hypothesis::linear(vec![0.0, 1.0]).unwrap();
    let x = Point::new(vec![0.0, 1.0]).unwrap();
    let st = |eta| robust_loss_sup(LossKind::ST, &h, &h, &x, &PerturbationModel::ball(eta).unwrap()).unwrap().value;
    assert_eq!(st(0.5), 0);
    assert_eq!(st(1.5), 1);
    for eta in [0.5, 1.5, 10.0] {
        let tl = robust_loss_sup(LossKind::TL, &h, &h, &x, &PerturbationModel::ball(eta).unwrap()).unwrap();
        assert_eq!(tl.value, 0);
    }
}

#[test]
fn csv_errors_name_the_row() {
    let err = read_dataset_csv("x1,label\n0.5,1\n0.7,2\n".as_bytes()).unwrap_err();
    assert!(err.to_string().contains('3'), "{err}");
    let empty = read_dataset_csv("x1,x2,label\n".as_bytes()).unwrap();
    assert_eq!((empty.len(), empty.dimension()), (0, 2));
    let three = read_dataset_csv("x1,label\n0.1,0\n0.2,1\n0.3,1\n".as_bytes()).unwrap();
    assert_eq!(three.len(), 3);
    assert_eq!(three.samples()[0], LabeledSample { point: Point::new(vec![0.1]).unwrap(), label: Label::Negative });
}
