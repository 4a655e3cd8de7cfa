use hrect::cloud::*;
use hrect::curve::{juillet, lift_from_origin, CurveConfig};
use hrect::hgroup::{HPoint, Rotation};
use hrect::Exec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_segment(step: f64) -> PointCloud {
    cloud_from_polyline(&lift_from_origin(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap(), step).unwrap()
}

fn random_cloud(seed: u64, m: usize) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..m).map(|_| HPoint::h1(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5))).collect();
    let w = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
    PointCloud::new(pts, w, 0.01).unwrap()
}

#[test]
fn unit_segment_sampling() {
    let c = unit_segment(0.1);
    assert_eq!(c.len(), 11);
    assert!((c.total_mass() - 1.0).abs() < 1e-12);
    assert!((c.weights()[0] - 0.05).abs() < 1e-12);
    for w in &c.weights()[1..10] {
        assert!((w - 0.1).abs() < 1e-12);
    }
    for (i, p) in c.points().iter().enumerate() {
        assert!((p.z[0] - 0.1 * i as f64).abs() < 1e-12 && p.z[1] == 0.0 && p.t == 0.0);
    }
    assert!(cloud_from_polyline(&lift_from_origin(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap(), 2.0).is_err());
}

#[test]
fn juillet_cloud_carries_its_length() {
    let cfg = CurveConfig::new(0.2, 6).unwrap();
    let gamma = juillet(&cfg, 6).unwrap();
    let c = cloud_from_polyline(&gamma, cfg.segment_length(6)).unwrap();
    assert_eq!(c.len(), gamma.vertices().len());
    assert!((c.total_mass() - cfg.total_length(6)).abs() < 1e-12);
    let finer = cloud_from_polyline(&gamma, cfg.segment_length(6) / 3.0).unwrap();
    assert_eq!(finer.len(), 3 * (c.len() - 1) + 1);
    assert!((finer.total_mass() - c.total_mass()).abs() < 1e-12);
}

#[test]
fn first_cantor_stage() {
    let c = cantor_vertical(1).unwrap();
    let ts: Vec<f64> = c.points().iter().map(|p| p.t).collect();
    assert_eq!(ts, vec![0.125, 0.875]);
    assert!(c.points().iter().all(|p| p.z == vec![0.0, 0.0]));
    assert!((c.total_mass() - 1.0).abs() < 1e-15);
    let deep = cantor_vertical(6).unwrap();
    assert_eq!(deep.len(), 64);
    assert!((deep.total_mass() - 1.0).abs() < 1e-12);
    assert!(cantor_vertical(0).is_err());
}

#[test]
fn segment_is_one_regular() {
    let c = unit_segment(1.0 / 2000.0);
    let p = regularity_profile(&c, 1, 300, 3).unwrap();
    assert!(!p.failure, "{p:?}");
    // A closed ball of radius r around a sample holds at most 2r/h + 1 samples of spacing h.
    let h = c.resolution();
    for s in &p.samples {
        assert!(s.ratio >= 0.5 && s.ratio <= 2.0 + h / s.radius + 1e-9, "{s:?}");
    }
    assert!((p.fitted_dimension - 1.0).abs() < 0.1);
    let wrong = regularity_profile(&c, 2, 300, 3).unwrap();
    assert!(wrong.failure);
    assert!(regularity_profile(&unit_segment(0.5), 1, 10, 0).is_err());
}

#[test]
fn segment_cubes_pass_every_check() {
    let c = unit_segment(1.0 / 1023.0);
    assert_eq!(c.len(), 1024);
    let tree = christ_cubes(&c, 0.5).unwrap();
    assert!(tree.verify(&c).all(), "{:?}", tree.verify(&c));
    assert_eq!(tree.cube(tree.root()).members.len(), 1024);
    assert!(tree.d_constant.is_finite() && tree.d_constant >= 1.0);
    assert!(0.5f64.powi(tree.j_max()) >= 2.0 * c.resolution() && 0.5f64.powi(tree.j_max() + 1) < 2.0 * c.resolution());
    let boundary = tree.boundary_report(&c, &[0.01, 0.1, 0.5]);
    assert!(boundary.constant.is_some(), "{boundary:?}");
    for j in tree.j0..=tree.j_max() {
        for &id in tree.generation(j) {
            for &m in &tree.cube(id).members {
                assert_eq!(tree.cube_containing(j, m), id);
            }
            assert!(tree.contains(tree.root(), id));
        }
    }
    assert!(christ_cubes(&c, 1.0).is_err());
}

#[test]
fn sequential_and_parallel_cubes_agree() {
    let c = random_cloud(9, 400);
    let a = christ_cubes_with(&c, 0.5, Exec::Parallel).unwrap();
    let b = christ_cubes_with(&c, 0.5, Exec::Sequential).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn single_point_cloud() {
    let c = PointCloud::new(vec![HPoint::h1(0.3, 0.1, 0.0)], vec![1.0], 0.1).unwrap();
    let tree = christ_cubes(&c, 0.5).unwrap();
    assert!(tree.verify(&c).all());
    assert_eq!(tree.cube(tree.root()).members, vec![0]);
    let net = dyadic_net(&c);
    assert!(net.verify(&c).all());
    assert_eq!(c.diameter().value, 0.0);
}

#[test]
fn enlargement_matches_brute_force() {
    let c = random_cloud(2, 300);
    let tree = christ_cubes(&c, 0.5).unwrap();
    assert!(tree.verify(&c).all());
    let pts = c.points();
    for (id, q) in tree.cubes.iter().enumerate().step_by(7) {
        let mut last = q.members.len();
        for lambda in [1.0, 1.5, 2.0, 4.0] {
            let got = enlarge(&tree, &c, id, lambda);
            let thr = (lambda - 1.0) * q.diam.value;
            let brute: Vec<usize> = (0..c.len())
                .filter(|&x| q.members.binary_search(&x).is_ok() || q.members.iter().any(|&m| pts[x].dist(&pts[m]) <= thr))
                .collect();
            assert_eq!(got, brute, "cube {id} λ={lambda}");
            assert!(got.len() >= last);
            last = got.len();
        }
    }
}

#[test]
fn nets_are_nested_separated_and_covering() {
    for c in [unit_segment(1.0 / 500.0), random_cloud(4, 500), cantor_vertical(5).unwrap()] {
        let net = dyadic_net(&c);
        assert!(net.verify(&c).all(), "{:?}", net.verify(&c));
        assert!(0.5f64.powi(net.j_max()) <= c.resolution());
        assert_eq!(net.level(net.j_min - 3), net.level(net.j_min));
        let balls = multires_family(&net, 5.0);
        assert_eq!(balls.len(), net.levels.iter().map(Vec::len).sum::<usize>());
    }
}

#[test]
fn text_round_trip() {
    let c = random_cloud(6, 50);
    let back = PointCloud::from_text(&c.to_text()).unwrap();
    assert_eq!(back, c);
    assert!(PointCloud::from_text("0 0 0\n1 0\n").is_err());
    let bare = PointCloud::from_text("0 0 0 1\n0.5 0 0 1\n").unwrap();
    assert!((bare.resolution() - 0.5).abs() < 1e-15);
}

#[test]
fn cloud_rejects_bad_weights() {
    assert!(PointCloud::new(vec![HPoint::h1(0.0, 0.0, 0.0)], vec![0.0], 1.0).is_err());
    assert!(PointCloud::new(vec![], vec![], 1.0).is_err());
    assert!(PointCloud::new(vec![HPoint::h1(f64::NAN, 0.0, 0.0)], vec![1.0], 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn isometries_keep_pairwise_distances(seed in any::<u64>(), x in -3.0..3.0f64, y in -3.0..3.0f64, t in -3.0..3.0f64) {
        let c = random_cloud(seed, 40);
        let g = HPoint::h1(x, y, t);
        let rot = Rotation::random(1, &mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        for moved in [c.translated(&g), c.rotated(&rot)] {
            prop_assert!((moved.total_mass() - c.total_mass()).abs() < 1e-12);
            for i in 0..c.len() {
                for j in 0..i {
                    let (a, b) = (c.points()[i].dist(&c.points()[j]), moved.points()[i].dist(&moved.points()[j]));
                    prop_assert!((a - b).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn dilation_scales_mass_and_distances(seed in any::<u64>(), r in 0.1..10.0f64) {
        let c = random_cloud(seed, 30);
        let d = c.dilated(r, 1);
        prop_assert!((d.total_mass() - r * c.total_mass()).abs() < 1e-9 * r);
        prop_assert!((d.diameter().value - r * c.diameter().value).abs() < 1e-7 * r);
    }

    #[test]
    fn random_cubes_pass_every_check(seed in any::<u64>(), rho in 0.2..0.8f64) {
        let c = random_cloud(seed, 120);
        let tree = christ_cubes(&c, rho).unwrap();
        prop_assert!(tree.verify(&c).all());
    }
}
