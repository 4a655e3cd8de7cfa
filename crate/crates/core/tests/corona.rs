use hrect::cloud::{cantor_vertical, christ_cubes, cloud_from_polyline, PointCloud};
use hrect::coeff::FitOptions;
use hrect::corona::*;
use hrect::curve::lift_from_origin;
use hrect::hgroup::{angle, HPoint, HorizontalPlane};
use hrect::Exec;

fn fast() -> FitOptions {
    FitOptions { max_opt_points: 128, ..FitOptions::default() }
}

fn segment(m: usize) -> PointCloud {
    let pts = (0..m).map(|i| HPoint::h1(i as f64 / m as f64, 0.0, 0.0)).collect();
    PointCloud::new(pts, vec![1.0 / m as f64; m], 1.0 / m as f64).unwrap()
}

fn two_segments(step: f64) -> PointCloud {
    let (s, c) = 0.5f64.sin_cos();
    let gamma = lift_from_origin(vec![[0.0, 0.0], [1.0, 0.0], [1.0 + c, s]]).unwrap();
    cloud_from_polyline(&gamma, step).unwrap()
}

#[test]
fn flat_segment_is_one_tree() {
    let cloud = segment(128);
    let tree = christ_cubes(&cloud, 0.5).unwrap();
    let params = CoronaParams::default();
    let good = good_cubes(&tree, &cloud, &params, &fast(), Exec::default()).unwrap();
    assert_eq!(good.count(), tree.len());
    assert!(good.failures.is_empty());
    let x_axis = HorizontalPlane::h1_line(0.0, 0.0, 0.0);
    for p in good.planes.iter().flatten() {
        assert!(angle(p, &x_axis).unwrap() < 1.0 + 1e-6);
    }

    let mut forest = build_forest(&tree, &good, &params);
    classify_trees(&mut forest, &tree, &cloud);
    assert_eq!(forest.trees.len(), 1);
    let s = &forest.trees[0];
    assert_eq!(s.cubes.len(), tree.len());
    assert!(s.m1.is_empty() && s.m2.is_empty());
    assert_eq!(s.labels, vec![Label::F2]);
    assert!(verify_forest(&forest, &tree, &good).all());

    let pc = verify_pc(&forest, &tree, &cloud, 2000, 7, Exec::default()).unwrap();
    assert!(pc.passed());
    assert!(pc.worst_ratio < 1.0 + 1e-6, "{}", pc.worst_ratio);

    let g = extract_graph(&forest, 0, &tree, &cloud).unwrap();
    assert!(g.intrinsic_constant < 1e-3, "{}", g.intrinsic_constant);
    assert!(g.within_envelope());
    assert!(g.approximates(params.eta), "{}", g.approximation);

    let pack = packing_report(&forest, &tree, 1, None).unwrap();
    assert_eq!(pack.max_bad, 0.0);
    assert!(pack.max_tops_f12 <= 1.0 && pack.max_tops_f3 <= 1.0);
}

#[test]
fn corner_splits_the_forest() {
    let cloud = two_segments(1.0 / 64.0);
    let tree = christ_cubes(&cloud, 0.5).unwrap();
    let params = CoronaParams::exploratory(0.05, 0.3, 2.0, 2.0).unwrap();
    let good = good_cubes(&tree, &cloud, &params, &fast(), Exec::default()).unwrap();
    let mut forest = build_forest(&tree, &good, &params);
    classify_trees(&mut forest, &tree, &cloud);
    assert!(forest.trees.len() >= 2, "{} trees", forest.trees.len());
    assert!(verify_forest(&forest, &tree, &good).all());
    for s in &forest.trees {
        assert!(s.m1_mass + s.m2_mass + s.unstopped_mass >= s.top_mass * (1.0 - 1e-12));
    }
    let pack = packing_report(&forest, &tree, 1, None).unwrap();
    assert!(pack.max_bad.is_finite() && pack.max_tops_f12.is_finite() && pack.max_tops_f3.is_finite());
    assert!(matches!(verify_pc(&forest, &tree, &cloud, 10, 0, Exec::default()), Err(hrect::Error::KConstraint { .. })));
}

#[test]
fn shrinking_epsilon_shrinks_good_set() {
    let cloud = two_segments(1.0 / 32.0);
    let tree = christ_cubes(&cloud, 0.5).unwrap();
    let p = CoronaParams::exploratory(0.1, 0.4, 2.0, 2.0).unwrap();
    let field = kq_field(&tree, &cloud, &p, &fast(), Exec::default()).unwrap();
    let mut prev: Option<Vec<bool>> = None;
    for eps in [0.4, 0.3, 0.2, 0.1, 0.05] {
        let q = CoronaParams { epsilon: eps, ..p };
        let good = classify_good(&tree, &cloud, &field, &q);
        if let Some(prev) = &prev {
            assert!(good.good.iter().zip(prev).all(|(now, before)| !now || *before));
        }
        prev = Some(good.good);
    }
}

#[test]
fn vertical_cantor_is_bad_at_coarse_scales() {
    let cloud = cantor_vertical(6).unwrap();
    let tree = christ_cubes(&cloud, 0.5).unwrap();
    let params = CoronaParams::exploratory(0.5, 0.1, 2.0, 2.0).unwrap();
    let good = good_cubes(&tree, &cloud, &params, &fast(), Exec::default()).unwrap();
    for c in &tree.cubes {
        if c.members.len() >= 4 {
            assert!(!good.good[c.id], "cube {} at generation {}", c.id, c.generation);
        }
    }
    // bad mass under each root against the weak geometric lemma count
    let forest = build_forest(&tree, &good, &params);
    let pack = packing_report(&forest, &tree, 1, None).unwrap();
    let wgl = hrect::carleson::wgl_count(&tree, &good.field, params.wgl_threshold(), tree.root()).unwrap();
    let bad_mass: f64 = forest.bad.iter().map(|&b| tree.cube(b).mass).sum();
    assert!(bad_mass / tree.cube(tree.root()).mass <= wgl * (1.0 + 1e-12));
    assert!(pack.max_bad.is_finite());
}

#[test]
fn curved_graph_needs_relaxed_parameters() {
    let amp = 0.02;
    let v: Vec<[f64; 2]> = (0..=200)
        .map(|i| {
            let s = i as f64 / 200.0;
            [s, amp * (2.0 * std::f64::consts::PI * s).sin()]
        })
        .collect();
    let cloud = cloud_from_polyline(&lift_from_origin(v).unwrap(), 1.0 / 200.0).unwrap();
    let tree = christ_cubes(&cloud, 0.5).unwrap();

    let strict = CoronaParams::default();
    let good = good_cubes(&tree, &cloud, &strict, &fast(), Exec::default()).unwrap();
    assert!(good.count() * 10 < tree.len(), "{} good of {}", good.count(), tree.len());

    let relaxed = CoronaParams::exploratory(0.1, 0.3, 2.0, 2.0).unwrap();
    let good = good_cubes(&tree, &cloud, &relaxed, &fast(), Exec::default()).unwrap();
    assert!(good.count() * 2 > tree.len(), "{} good of {}", good.count(), tree.len());
    let mut forest = build_forest(&tree, &good, &relaxed);
    classify_trees(&mut forest, &tree, &cloud);
    assert!(!forest.trees.is_empty());
    assert!(verify_forest(&forest, &tree, &good).all());
    for t in 0..forest.trees.len() {
        let g = extract_graph(&forest, t, &tree, &cloud).unwrap();
        assert!(g.within_envelope(), "tree {t}: {}", g.intrinsic_constant);
    }
}

/// Points `(s, 0, 0)·(0, y(s), t(s))` of an intrinsic graph over the x-axis.
fn graph_points(seed: u64, amp: f64, m: usize) -> Vec<HPoint> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64, f64)> = (1..=3)
        .map(|k| (k as f64, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    (0..m)
        .map(|i| {
            let s = (i as f64 + rng.random_range(0.0..0.5)) / m as f64;
            let (mut y, mut t) = (0.0, 0.0);
            for &(k, cy, ct, ph) in &modes {
                y += amp * cy * (k * s * std::f64::consts::PI + ph).sin() / k;
                t += amp * amp * ct * (k * s * std::f64::consts::PI + ph).cos() / k;
            }
            HPoint::h1(s, 0.0, 0.0).mul(&HPoint::h1(0.0, y, t))
        })
        .collect()
}

#[test]
fn intrinsic_constant_follows_metric_excess() {
    let x_axis = HorizontalPlane::h1_line(0.0, 0.0, 0.0);
    let mut tested = 0;
    for seed in 0..40u64 {
        let amp = 10f64.powf(-3.0 + 2.5 * (seed as f64 / 40.0));
        let pts = graph_points(seed, amp, 40);
        let eta = metric_excess(&pts, &x_axis);
        if !(1e-4..=1.0).contains(&eta) {
            continue;
        }
        let pairs: Vec<(HPoint, HPoint)> = pts.iter().map(|p| (x_axis.project(p), p.clone())).collect();
        let c = hrect::hgroup::intrinsic_lip_constant(&pairs, &x_axis).unwrap();
        assert!(c <= 6.0 * eta.powf(0.25), "seed {seed}: constant {c}, excess {eta}");
        tested += 1;
    }
    assert!(tested >= 20, "{tested}");
    let line = vec![HPoint::h1(0.0, 0.0, 0.0), HPoint::h1(1.0, 0.0, 0.0)];
    assert_eq!(metric_excess(&line, &x_axis), 0.0);
    let stacked = vec![HPoint::h1(0.0, 0.0, 0.0), HPoint::h1(0.0, 0.0, 1.0)];
    assert_eq!(metric_excess(&stacked, &x_axis), f64::INFINITY);
}
