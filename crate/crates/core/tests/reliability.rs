//! Certificate properties: the contract on every class, the agreement
//! characterization for CA and TL, the nested-ball reading of the
//! safely-reliable region, and soundness of the margin certifier.

use proptest::prelude::*;
use robrel::distributions::{sample, DistributionSpec};
use robrel::estimators::m_for_epsilon;
use robrel::losses::LossKind;
use robrel::model::{BaseFunction, ConceptClass, Dataset, Hypothesis, Point};
use robrel::reliability::{
    certify, certify_with, default_alpha, margin_certify, margin_certify_halving, safely_reliable_membership,
    verify_contract, CertifyOptions, ContractConfig, Strategy,
};
use robrel::version_space::{agree_membership, fit_version_space, Membership, SearchOptions};

fn contract(class: ConceptClass, hstar: Hypothesis, sampler: DistributionSpec, m: usize, kind: LossKind, strategy: Strategy) {
    let cfg = ContractConfig {
        class,
        hstar,
        sampler,
        m,
        trials: 400,
        budget: 0.5,
        kind,
        strategy,
        seed: 17,
        constancy_check: true,
    };
    let r = verify_contract(&cfg).unwrap();
    assert_eq!(r.violations, 0, "{:?} {:?}: {:?}", kind, strategy, r.witnesses.first());
    assert!(r.certified > 0, "{kind:?} {strategy:?} certified nothing");
}

#[test]
fn contract_holds_for_offset_boundaries() {
    let affine = BaseFunction::Affine { a: vec![0.5], b: 0.1 };
    let wavy = BaseFunction::Sinusoid { d: 1, amplitude: 0.1, frequency: 1.0, phase: 0.0, offset: 0.5 };
    let cube = DistributionSpec::UniformCube { d: 2, low: 0.0, high: 1.0 };
    for base in [affine, wavy] {
        for kind in LossKind::ALL {
            for strategy in [Strategy::BoundaryDirected, Strategy::RandomBall, Strategy::Grid] {
                let class = ConceptClass::Offset { base: base.clone() };
                let hstar = Hypothesis::offset(base.clone(), 0.0).unwrap();
                contract(class, hstar, cube.clone(), 100, kind, strategy);
            }
        }
    }
}

#[test]
fn contract_holds_with_grid_attacks_and_heavy_tails() {
    let hstar = Hypothesis::linear(vec![0.6, -0.8]).unwrap();
    for kind in LossKind::ALL {
        contract(
            ConceptClass::Linear,
            hstar.clone(),
            DistributionSpec::RadialHeavyTail { d: 2, s: -0.2 },
            100,
            kind,
            Strategy::Grid,
        );
    }
    let hstar = Hypothesis::linear(vec![1.0, 1.0, 1.0]).unwrap();
    contract(ConceptClass::Linear, hstar, DistributionSpec::UniformBall { d: 3 }, 60, LossKind::ST, Strategy::Grid);
}

#[test]
fn worker_count_does_not_change_reports() {
    let cfg = ContractConfig { trials: 300, ..Default::default() };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| verify_contract(&cfg).unwrap());
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| verify_contract(&cfg).unwrap());
    assert_eq!(one, four);
}

#[test]
fn ca_and_tl_accept_exactly_the_agreement_region() {
    let hstar = Hypothesis::threshold(0.1).unwrap();
    let s = Dataset::labeled_by(&hstar, sample(&DistributionSpec::Gaussian { d: 1 }, 4, 40).unwrap()).unwrap();
    let vs = fit_version_space(&s, &ConceptClass::Threshold, 0.0).unwrap();
    for i in 0..=20_000 {
        let z = Point::new(vec![-2.0 + 4.0 * i as f64 / 20_000.0]).unwrap();
        let agree = agree_membership(&vs, &z).unwrap().is_agree();
        for kind in [LossKind::CA, LossKind::TL] {
            let c = certify(&vs, &z, kind).unwrap();
            assert_eq!(!c.is_abstain(), agree);
            assert_eq!(c.radius, if agree { f64::INFINITY } else { -1.0 });
        }
    }
}

#[test]
fn safely_reliable_matches_nested_ball_definition() {
    let hstar = Hypothesis::threshold(-0.2).unwrap();
    let s = Dataset::labeled_by(&hstar, sample(&DistributionSpec::Gaussian { d: 1 }, 8, 30).unwrap()).unwrap();
    let vs = fit_version_space(&s, &ConceptClass::Threshold, 0.0).unwrap();
    let steps = 200;
    for (eta1, eta2) in [(0.05, 0.05), (0.1, 0.0), (0.0, 0.2), (0.2, 0.1)] {
        for i in 0..=400 {
            let x = Point::new(vec![-2.0 + i as f64 / 100.0]).unwrap();
            let direct = safely_reliable_membership(&vs, None, &x, eta1, eta2, LossKind::ST).unwrap();
            // Every attacked point in the closed η₁-ball must keep radius ≥ η₂.
            let nested = (0..=steps).all(|k| {
                let z = Point::new(vec![x.coords()[0] - eta1 + 2.0 * eta1 * k as f64 / steps as f64]).unwrap();
                let c = certify(&vs, &z, LossKind::ST).unwrap();
                !c.is_abstain() && c.radius >= eta2
            });
            if direct != nested {
                let d = robrel::version_space::dis_distance(&vs, &x).unwrap();
                assert!((d - eta1 - eta2).abs() < 1e-9, "x={x:?} η=({eta1},{eta2}) d={d}");
            }
        }
    }
}

#[test]
fn margin_certifier_never_certifies_an_abstention() {
    let (eps, d, delta) = (0.1, 2usize, 0.05);
    let m = m_for_epsilon(eps, d, delta);
    let alpha = default_alpha(d, eps);
    let mut positive = 0;
    for trial in 0..1000u64 {
        let hstar = Hypothesis::linear(vec![(trial as f64).cos(), (trial as f64).sin()]).unwrap();
        let pts = sample(&DistributionSpec::Gaussian { d }, trial, m + 1).unwrap();
        let (train, z) = pts.split_at(m);
        let s = Dataset::labeled_by(&hstar, train.to_vec()).unwrap();
        let vs = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap();
        let h = robrel::version_space::erm(&vs);
        let eta = margin_certify(&h, &z[0], alpha, 1.0, eps, d).unwrap();
        let halved = margin_certify_halving(&h, &z[0], alpha, 1.0, eps, d, 1e-12).unwrap();
        assert_eq!(eta > 0.0, halved > 0.0);
        if eta > 0.0 {
            positive += 1;
            assert!(certify(&vs, &z[0], LossKind::ST).unwrap().radius > 0.0);
        }
    }
    assert!(positive > 300);
}

#[test]
fn cone_certificates_pass_the_cross_check() {
    let hstar = Hypothesis::linear(vec![0.3, -0.5, 0.8, 0.1]).unwrap();
    let s = Dataset::labeled_by(&hstar, sample(&DistributionSpec::Gaussian { d: 4 }, 2, 80).unwrap()).unwrap();
    let vs = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap();
    let opts = CertifyOptions {
        constancy_samples: 64,
        cross_check: Some(SearchOptions { restarts: 8, samples: 2000, ..Default::default() }),
    };
    let mut agreed = 0;
    for z in sample(&DistributionSpec::Gaussian { d: 4 }, 3, 200).unwrap() {
        let c = certify_with(&vs, &z, LossKind::ST, &opts).unwrap();
        if agree_membership(&vs, &z).unwrap() != Membership::Disagree {
            agreed += 1;
            assert!(c.radius >= 0.0);
        }
    }
    assert!(agreed > 50);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certificate_invariants(seed in any::<u64>(), zs in prop::collection::vec(-3.0f64..3.0, 2)) {
        let hstar = Hypothesis::linear(vec![1.0, 0.3]).unwrap();
        let s = Dataset::labeled_by(&hstar, sample(&DistributionSpec::Gaussian { d: 2 }, seed, 30).unwrap()).unwrap();
        let vs = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap();
        let z = Point::new(zs).unwrap();
        for kind in LossKind::ALL {
            let c = certify(&vs, &z, kind).unwrap();
            prop_assert_eq!(c.prediction.is_none(), c.radius == -1.0);
            prop_assert!(c.radius == -1.0 || c.radius >= 0.0);
            if let Some(label) = c.prediction {
                let h = robrel::version_space::erm(&vs);
                prop_assert_eq!(robrel::model::predict(&h, &z).unwrap(), label);
            }
            let back: robrel::reliability::Certificate =
                serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
