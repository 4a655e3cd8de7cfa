use hrect::curve::*;
use hrect::hgroup::HPoint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

#[test]
fn segment_lengths_follow_the_recurrence() {
    let cfg = CurveConfig::new(DEFAULT_C0, 8).unwrap();
    for n in 0..=8 {
        let g = build_planar_generation(&cfg, n).unwrap();
        assert_eq!(g.vertices.len(), (1 << (2 * n)) + 1);
        let l = cfg.segment_length(n);
        for s in g.segment_lengths() {
            assert!((s - l).abs() <= 1e-12, "generation {n}: {s} vs {l}");
        }
        if n >= 1 {
            let prev = cfg.segment_length(n - 1);
            assert!((l - prev / (4.0 * cfg.theta(n).cos())).abs() <= 1e-15);
        }
    }
}

#[test]
fn total_length_stays_bounded() {
    let cfg = CurveConfig::new(DEFAULT_C0, 12).unwrap();
    let mut last = 0.0;
    for n in 0..=12 {
        let l = cfg.segment_length(n);
        assert!(2.0 * 4f64.powi(-(n as i32)) <= l && l <= 2f64.powi(1 - n as i32), "generation {n}: {l}");
        let total = cfg.total_length(n);
        assert!(total >= last && total <= 2.2, "generation {n}: {total}");
        last = total;
    }
    let measured = build_planar_generation(&cfg, 6).unwrap().length();
    assert!((measured - cfg.total_length(6)).abs() < 1e-12);
}

#[test]
fn dyadic_vertices_persist_across_generations() {
    let cfg = CurveConfig::new(DEFAULT_C0, 7).unwrap();
    let fine = juillet(&cfg, 7).unwrap();
    for m in 0..=4 {
        let coarse = juillet(&cfg, m).unwrap();
        for sigma in 0..=(1 << (2 * m)) {
            let p = &coarse.vertices()[sigma];
            let q = &fine.vertices()[dyadic_index(7, m, sigma)];
            assert!((p.z[0] - q.z[0]).abs() < 1e-10 && (p.z[1] - q.z[1]).abs() < 1e-10, "m={m} σ={sigma}");
            assert!((p.t - q.t).abs() < 1e-10, "m={m} σ={sigma}: {} vs {}", p.t, q.t);
        }
    }
}

#[test]
fn pieces_look_like_lambda() {
    let cfg = CurveConfig::new(DEFAULT_C0, 6).unwrap();
    for n in 0..4 {
        for sigma in [0, (1 << (2 * n)) / 3, (1 << (2 * n)) - 1] {
            let piece = gamma_piece(&cfg, n, sigma).unwrap();
            let v = piece.vertices();
            let gens_below = cfg.max_generation - n;
            let step = 1 << (2 * (gens_below - 1));
            let lambda = lambda_theta(cfg.theta(n + 1));
            for (i, expected) in lambda.iter().enumerate() {
                let got = &v[i * step];
                let gap = got.z.iter().zip(&expected.z).map(|(a, b)| (a - b).abs()).fold((got.t - expected.t).abs(), f64::max);
                assert!(gap < 1e-10, "n={n} σ={sigma} i={i}: {got:?} vs {expected:?}");
            }
            assert!(piece.horizontality_defect() < 1e-12);
        }
    }
    assert!(gamma_piece(&cfg, 6, 0).is_err());
    assert!(gamma_piece(&cfg, 1, 4).is_err());
}

#[test]
fn lifts_are_horizontal_and_keep_length() {
    let cfg = CurveConfig::new(DEFAULT_C0, 6).unwrap();
    let g = juillet(&cfg, 6).unwrap();
    assert!(g.horizontality_defect() < 1e-14);
    let h_len: f64 = g.vertices().windows(2).map(|w| w[0].dist(&w[1])).sum();
    assert!((h_len - g.length()).abs() < 1e-9 * g.length());
    assert!((g.length() - cfg.total_length(6)).abs() < 1e-12);
    for i in [0, 17, 4095] {
        let mid = g.point_on_segment(i, 0.5);
        let (a, b) = (&g.vertices()[i], &g.vertices()[i + 1]);
        assert!((a.dist(&mid) + mid.dist(b) - a.dist(b)).abs() < 1e-9);
    }
    let shifted = lift_horizontal(&build_planar_generation(&cfg, 2).unwrap(), &HPoint::h1(-1.0, 0.0, 3.0)).unwrap();
    assert!((shifted.vertices()[16].t - 3.0 - juillet(&cfg, 2).unwrap().vertices()[16].t).abs() < 1e-14);
    assert!(lift_horizontal(&build_planar_generation(&cfg, 2).unwrap(), &HPoint::h1(0.0, 0.0, 0.0)).is_err());
}

#[test]
fn unit_square_closes_with_height_one() {
    let sq = lift_from_origin(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
    let b = area_distance_bound(&sq);
    assert!((b.area - 1.0).abs() < 1e-15);
    assert!((b.lhs - 2.0).abs() < 1e-15);
    assert!(b.lhs <= b.rhs + 1e-15);
}

#[test]
fn area_bound_holds_on_random_polylines() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let m = rng.random_range(2..40);
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        let v: Vec<[f64; 2]> = (0..m).map(|_| [scale * rng.random_range(-1.0..1.0), scale * rng.random_range(-1.0..1.0)]).collect();
        let Ok(gamma) = lift_from_origin(v) else { continue };
        let b = area_distance_bound(&gamma);
        assert!(b.lhs <= b.rhs * (1.0 + 1e-12) + 1e-15, "{b:?}");
    }
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    o1 * o2 <= 0.0 && o3 * o4 <= 0.0
}

/// Buckets segments on a grid and tests every pair sharing a cell.
fn first_self_intersection(v: &[[f64; 2]]) -> Option<(usize, usize)> {
    let h = 4.0 / v.len() as f64;
    let cell = |x: f64| (x / h).floor() as i64;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..v.len() - 1 {
        let (a, b) = (v[i], v[i + 1]);
        for cx in cell(a[0].min(b[0]))..=cell(a[0].max(b[0])) {
            for cy in cell(a[1].min(b[1]))..=cell(a[1].max(b[1])) {
                grid.entry((cx, cy)).or_default().push(i);
            }
        }
    }
    for segs in grid.values() {
        for (x, &i) in segs.iter().enumerate() {
            for &j in &segs[x + 1..] {
                if i.abs_diff(j) > 1 && segments_cross(v[i], v[i + 1], v[j], v[j + 1]) {
                    return Some((i, j));
                }
            }
        }
    }
    None
}

#[test]
fn planar_generations_are_simple() {
    let cfg = CurveConfig::new(DEFAULT_C0, 8).unwrap();
    for n in 1..=8 {
        let g = build_planar_generation(&cfg, n).unwrap();
        assert_eq!(first_self_intersection(&g.vertices), None, "generation {n}");
    }
    let bowtie = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
    assert!(first_self_intersection(&bowtie).is_some());
}

#[test]
fn curve_config_rejects_large_angles() {
    assert!(CurveConfig::new(0.0, 3).is_err());
    assert!(CurveConfig::new(MAX_C0 + 1e-9, 3).is_err());
    assert!(PlanarPolyline::new(vec![[0.0, 0.0]]).is_err());
}

proptest! {
    #[test]
    fn export_round_trips(n in 0usize..4) {
        let g = juillet(&CurveConfig::default(), n).unwrap();
        let text = g.export_text();
        let rows: Vec<Vec<f64>> = text.lines().map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect()).collect();
        prop_assert_eq!(rows.len(), g.vertices().len());
        for (r, p) in rows.iter().zip(g.vertices()) {
            prop_assert_eq!(r.clone(), vec![p.z[0], p.z[1], p.t]);
        }
    }

    #[test]
    fn any_admissible_angles_keep_segments_equal(thetas in prop::collection::vec(0.001..0.2f64, 1..5)) {
        let g = build_with_angles(&thetas);
        let lens = g.segment_lengths();
        let l = thetas.iter().fold(2.0, |l, t| l / (4.0 * t.cos()));
        for s in lens {
            prop_assert!((s - l).abs() <= 1e-12);
        }
    }
}
