//! Version-space checks against brute-force oracles: subset enumeration of
//! extreme rays, angle grids for arcs, and direct interval enumeration.

use proptest::prelude::*;
use rand::Rng;
use robrel::distributions::{sample, unit_direction, DistributionSpec};
use robrel::model::{dot, norm, BaseFunction, ConceptClass, Dataset, Hypothesis, Label, Point};
use robrel::rng::generator;
use robrel::version_space::{
    agree_membership, ca_distance, dis_distance, dis_distance_checked, erm, fit_version_space, fit_with,
    margin_admissibility_bound, margin_exclusion_delta, ConeSpace, Membership, Representation, SearchOptions,
    VersionSpace,
};

fn linear_dataset(seed: u64, d: usize, m: usize) -> (Hypothesis, Dataset) {
    let mut rng = generator(seed);
    let hstar = Hypothesis::linear(unit_direction(&mut rng, d)).unwrap();
    let pts = sample(&DistributionSpec::Gaussian { d }, seed ^ 0xabc, m).unwrap();
    (hstar.clone(), Dataset::labeled_by(&hstar, pts).unwrap())
}

/// Solves the `k × (k+1)` homogeneous system for its null direction.
fn null_direction(rows: &[&Vec<f64>], d: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let k = m.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..d {
        if row == k {
            break;
        }
        let piv = (row..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        if m[piv][col].abs() < 1e-10 {
            continue;
        }
        m.swap(row, piv);
        let p = m[row][col];
        for v in m[row].iter_mut() {
            *v /= p;
        }
        for r in 0..k {
            if r != row {
                let f = m[r][col];
                for c in 0..d {
                    m[r][c] -= f * m[row][c];
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() != d - 1 {
        return None;
    }
    let free = (0..d).find(|c| !pivots.contains(c)).unwrap();
    let mut v = vec![0.0; d];
    v[free] = 1.0;
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[r][free];
    }
    let n = norm(&v);
    Some(v.into_iter().map(|x| x / n).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for mut rest in subsets(n, k - 1).into_iter().filter(|r| r.iter().all(|&i| i > first)) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Extreme rays by checking every `(d−1)`-subset of tight constraints.
fn brute_rays(cone: &ConeSpace) -> Vec<Vec<f64>> {
    let d = cone.dimension();
    let a = cone.constraints();
    let mut rays: Vec<Vec<f64>> = Vec::new();
    for sub in subsets(a.len(), d - 1) {
        let rows: Vec<&Vec<f64>> = sub.iter().map(|&i| &a[i]).collect();
        let Some(v) = null_direction(&rows, d) else { continue };
        for s in [1.0, -1.0] {
            let r: Vec<f64> = v.iter().map(|x| s * x).collect();
            if a.iter().all(|c| dot(c, &r) >= -1e-9) && !rays.iter().any(|q| dist(q, &r) < 1e-7) {
                rays.push(r);
            }
        }
    }
    rays
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn cone_of(vs: &VersionSpace) -> &ConeSpace {
    match vs {
        VersionSpace::ConstraintCone { cone } => cone,
        other => panic!("expected cone, got {other:?}"),
    }
}

#[test]
fn extreme_rays_match_subset_enumeration() {
    for seed in 0..60u64 {
        let d = 2 + (seed % 4) as usize;
        let m = 3 + (seed % 9) as usize;
        let (_, s) = linear_dataset(seed, d, m);
        let vs = fit_with(&s, &ConceptClass::Linear, 0.0, Representation::Cone).unwrap();
        let cone = cone_of(&vs);
        let Some(rays) = cone.rays() else {
            continue;
        };
        let oracle = brute_rays(cone);
        assert_eq!(rays.len(), oracle.len(), "seed {seed}: {rays:?} vs {oracle:?}");
        for r in rays {
            assert!(oracle.iter().any(|q| dist(q, r) < 1e-7), "seed {seed}: ray {r:?} not in oracle");
        }
    }
}

#[test]
fn cone_membership_lp_matches_rays() {
    for seed in 0..40u64 {
        let d = 3 + (seed % 3) as usize;
        let (_, s) = linear_dataset(seed, d, 25);
        let vs = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap();
        let cone = cone_of(&vs);
        let zs = sample(&DistributionSpec::Gaussian { d }, seed + 1000, 200).unwrap();
        for z in &zs {
            let lp = agree_membership(&vs, z).unwrap();
            if let Some(by_rays) = cone.membership_by_rays(z.coords()) {
                assert_eq!(lp, by_rays, "seed {seed} z {z:?}");
            }
        }
    }
}

#[test]
fn cone_distance_is_min_over_sampled_cone_directions() {
    let mut rng = generator(7);
    for seed in 0..20u64 {
        let d = 3;
        let (_, s) = linear_dataset(seed, d, 12);
        let vs = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap();
        let cone = cone_of(&vs);
        let zs = sample(&DistributionSpec::Gaussian { d }, seed + 50, 50).unwrap();
        // Directions of K by rejection from the sphere.
        let mut members = Vec::new();
        while members.len() < 300 {
            let w = unit_direction(&mut rng, d);
            if cone.contains(&w, 0.0) {
                members.push(w);
            }
        }
        for z in &zs {
            let m = agree_membership(&vs, z).unwrap();
            let exact = dis_distance(&vs, z).unwrap();
            let sign = match m {
                Membership::AgreePlus => 1.0,
                Membership::AgreeMinus => -1.0,
                Membership::Disagree => {
                    assert_eq!(exact, 0.0);
                    continue;
                }
            };
            let sampled = members.iter().map(|w| sign * dot(w, z.coords())).fold(f64::INFINITY, f64::min);
            assert!(exact <= sampled + 1e-12, "exact {exact} exceeds sampled bound {sampled}");
            // The nearest disagreement point is within reach: moving by the
            // distance plus a little along −r crosses some consistent normal.
            let rep = dis_distance_checked(&vs, z, &SearchOptions { samples: 2000, restarts: 8, ..Default::default() })
                .unwrap();
            assert!(rep.gap >= -1e-7, "{rep:?}");
        }
    }
}

/// Angle-grid oracle for the arc: scans consistent angles at 10⁻⁴ rad.
fn grid_arc(s: &Dataset) -> Vec<f64> {
    let n = (std::f64::consts::TAU / 1e-4) as usize;
    (0..n)
        .map(|i| -std::f64::consts::PI + i as f64 * 1e-4)
        .filter(|phi| {
            let w = [phi.cos(), phi.sin()];
            s.samples().iter().all(|p| {
                let v = dot(&w, p.point.coords());
                (v >= 0.0) == (p.label == Label::Positive)
            })
        })
        .collect()
}

#[test]
fn arc_example_against_grid() {
    let s = Dataset::new(
        2,
        vec![
            robrel::model::LabeledSample { point: Point::new(vec![1.0, 0.5]).unwrap(), label: Label::Positive },
            robrel::model::LabeledSample { point: Point::new(vec![1.0, -0.5]).unwrap(), label: Label::Negative },
        ],
    )
    .unwrap();
    let angles = grid_arc(&s);
    let lo = angles.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = angles.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let VersionSpace::AngleArc { arc } = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap() else {
        panic!()
    };
    assert!((arc.phi_lo - lo).abs() < 2e-4 && (arc.phi_hi - hi).abs() < 2e-4);
    // Distance from (0,1): disagreement directions lie within 26.565° of the x-axis.
    let want = (90f64 - 26.565051177).to_radians().sin();
    let d = dis_distance(&VersionSpace::AngleArc { arc }, &Point::new(vec![0.0, 1.0]).unwrap()).unwrap();
    assert!((d - want).abs() < 1e-9);
}

#[test]
fn margin_exclusion_forces_disagreement() {
    let mut rng = generator(99);
    let (c, dnorm) = (0.5, 2.0);
    let mut checked = 0;
    for trial in 0..300u64 {
        let d = 2 + (trial % 4) as usize;
        let (hstar, s) = linear_dataset(trial + 5000, d, 20);
        let w = hstar.normal().unwrap().to_vec();
        let bound = margin_admissibility_bound(&s, &w).unwrap();
        // δ₁ must keep every rotation of w* within angle δ₁ consistent.
        let delta1 = 0.9 * bound.min(1.0).asin();
        if delta1 < 1e-4 {
            continue;
        }
        let delta = margin_exclusion_delta(delta1, c, dnorm).unwrap();
        let vs = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap();
        // x = a w* + b u with u ⟂ w*, ‖x‖ ∈ [c, dnorm], |a| < δ.
        let mut u = unit_direction(&mut rng, d);
        let proj = dot(&u, &w);
        u.iter_mut().zip(&w).for_each(|(ui, wi)| *ui -= proj * wi);
        let un = norm(&u);
        let a: f64 = rng.gen_range(-1.0..1.0) * delta;
        let r: f64 = rng.gen_range(c..dnorm);
        let b = (r * r - a * a).sqrt();
        let x: Vec<f64> = w.iter().zip(&u).map(|(wi, ui)| a * wi + b * ui / un).collect();
        assert_eq!(agree_membership(&vs, &Point::new(x).unwrap()).unwrap(), Membership::Disagree);
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn margin_exclusion_variant_without_c_squared_fails() {
    // The denominator without c² can exceed c·sin δ₁, the largest margin a
    // δ₁-rotation can flip, so it cannot be an exclusion radius.
    let (delta1, c, dnorm) = (0.1f64, 10.0f64, 10.0f64);
    let t = delta1.tan();
    let variant = c * c * t / ((dnorm + t * t).powi(2) + t * t).sqrt();
    assert!(variant > c * delta1.sin());
    let ok = margin_exclusion_delta(delta1, 9.999, dnorm).unwrap();
    assert!(ok <= 9.999 * delta1.sin());
}

#[test]
fn sinusoid_offsets_inside_min_residual_disagree() {
    let base = BaseFunction::Sinusoid { d: 1, amplitude: 0.2, frequency: 1.5, phase: 0.3, offset: 0.4 };
    let hstar = Hypothesis::offset(base.clone(), 0.0).unwrap();
    let class = ConceptClass::Offset { base: base.clone() };
    let pts = sample(&DistributionSpec::UniformCube { d: 2, low: 0.0, high: 1.0 }, 3, 100).unwrap();
    let s = Dataset::labeled_by(&hstar, pts).unwrap();
    let vs = fit_version_space(&s, &class, 0.0).unwrap();
    let min_res = s.samples().iter().map(|p| base.residual(p.point.coords()).abs()).fold(f64::INFINITY, f64::min);
    let zs = sample(&DistributionSpec::UniformCube { d: 2, low: 0.0, high: 1.0 }, 4, 5000).unwrap();
    for z in zs {
        if base.residual(z.coords()).abs() < min_res {
            assert_eq!(agree_membership(&vs, &z).unwrap(), Membership::Disagree);
        }
    }
}

#[test]
fn ca_distance_equals_dis_distance() {
    for seed in 0..10u64 {
        let (hstar, s) = linear_dataset(seed, 2, 30);
        let vs = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap();
        for z in sample(&DistributionSpec::Gaussian { d: 2 }, seed + 77, 100).unwrap() {
            assert_eq!(ca_distance(&vs, &hstar, &z).unwrap(), dis_distance(&vs, &z).unwrap());
        }
    }
    let hstar = Hypothesis::threshold(0.1).unwrap();
    let pts = sample(&DistributionSpec::Gaussian { d: 1 }, 1, 50).unwrap();
    let s = Dataset::labeled_by(&hstar, pts).unwrap();
    let vs = fit_version_space(&s, &ConceptClass::Threshold, 0.0).unwrap();
    for z in sample(&DistributionSpec::Gaussian { d: 1 }, 2, 500).unwrap() {
        assert_eq!(ca_distance(&vs, &hstar, &z).unwrap(), dis_distance(&vs, &z).unwrap());
    }
}

fn arb_linear_case() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 2usize..6, 1usize..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn target_is_in_fitted_space((seed, d, m) in arb_linear_case()) {
        let (hstar, s) = linear_dataset(seed, d, m);
        let vs = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap();
        prop_assert!(vs.contains(&hstar));
        let h = erm(&vs);
        prop_assert_eq!(robrel::model::empirical_error(&h, &s).unwrap(), 0.0);
    }

    #[test]
    fn agreement_grows_with_sample((seed, d, m) in arb_linear_case()) {
        let (_, s) = linear_dataset(seed, d, m + 10);
        let small = fit_version_space(&s.prefix(m), &ConceptClass::Linear, 0.0).unwrap();
        let large = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap();
        for z in sample(&DistributionSpec::Gaussian { d }, seed.wrapping_add(1), 30).unwrap() {
            let a = agree_membership(&small, &z).unwrap();
            if a.is_agree() {
                prop_assert_eq!(agree_membership(&large, &z).unwrap(), a);
            }
        }
    }

    #[test]
    fn zero_distance_iff_disagree_or_boundary((seed, d, m) in arb_linear_case()) {
        let (_, s) = linear_dataset(seed, d, m);
        let vs = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap();
        for z in sample(&DistributionSpec::Gaussian { d }, seed.wrapping_add(2), 30).unwrap() {
            let mem = agree_membership(&vs, &z).unwrap();
            let dd = dis_distance(&vs, &z).unwrap();
            if mem == Membership::Disagree {
                prop_assert_eq!(dd, 0.0);
            } else {
                prop_assert!(dd >= 0.0);
            }
        }
    }

    #[test]
    fn threshold_interval_matches_enumeration(xs in prop::collection::vec(-1.0f64..1.0, 0..30), t in -0.9f64..0.9) {
        let hstar = Hypothesis::threshold(t).unwrap();
        let pts: Vec<Point> = xs.iter().map(|&x| Point::new(vec![x]).unwrap()).collect();
        let s = Dataset::labeled_by(&hstar, pts).unwrap();
        let VersionSpace::Interval { space } = fit_version_space(&s, &ConceptClass::Threshold, 0.0).unwrap() else {
            panic!()
        };
        let lo = xs.iter().cloned().filter(|&x| x < t).fold(f64::NEG_INFINITY, f64::max);
        let hi = xs.iter().cloned().filter(|&x| x >= t).fold(f64::INFINITY, f64::min);
        prop_assert_eq!((space.lo, space.hi), (lo, hi));
    }

    #[test]
    fn version_space_serde_round_trip((seed, d, m) in arb_linear_case()) {
        let (_, s) = linear_dataset(seed, d, m);
        let vs = fit_version_space(&s, &ConceptClass::Linear, 0.0).unwrap();
        let back: VersionSpace = serde_json::from_str(&serde_json::to_string(&vs).unwrap()).unwrap();
        prop_assert_eq!(vs, back);
    }
}
