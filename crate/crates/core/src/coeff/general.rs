//! Candidate-pool search in ℍⁿ for general `k`. Planes are parameterized by
//! `k` raw vectors (made isotropic by [`IsotropicFrame::from_raw`]), a base
//! offset taken perpendicular to the frame, and a base height.

use super::iota::frame_of;
use super::optim::{nelder_mead, weighted_median};
use super::{FitOptions, Objective, Pool, OBJECTIVES};
use crate::hgroup::{omega, HPoint, HorizontalPlane, IsotropicFrame};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub(crate) fn plane(x: &[f64], n: usize, k: usize) -> Option<HorizontalPlane> {
    let frame = frame_of(x, n, k)?;
    let d = 2 * n;
    let u = &x[d * k..d * k + d];
    let base = HPoint { z: frame.perp(u), t: x[d * k + d] };
    Some(HorizontalPlane { base, frame })
}

/// Parameters of `p·V₀`.
pub(crate) fn through_point(p: &HPoint, frame: &IsotropicFrame) -> Vec<f64> {
    let perp = frame.perp(&p.z);
    let par = frame.project(&p.z);
    let mut x = frame.vectors().concat();
    x.extend_from_slice(&perp);
    x.push(p.t - omega(&perp, &par));
    x
}

pub(crate) fn values(pts: &[HPoint], wts: &[f64], mass: f64, plane: &HorizontalPlane) -> [f64; OBJECTIVES] {
    let (mut sd, mut md, mut se, mut me) = (0.0, 0.0f64, 0.0, 0.0f64);
    for (p, w) in pts.iter().zip(wts) {
        let off = plane.offset(&p.z, p.t);
        sd += w * off.dist;
        se += w * off.eucl;
        md = md.max(off.dist);
        me = me.max(off.eucl);
    }
    let (b1, e1) = (sd / mass, se / mass);
    [b1, md, super::planar::hat(e1, b1), super::planar::hat(me, md), e1, me]
}

fn covariance(zs: &[&[f64]], wts: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let d = zs[0].len();
    let total: f64 = wts.iter().sum();
    let mut mean = vec![0.0; d];
    for (z, w) in zs.iter().zip(wts) {
        mean.iter_mut().zip(z.iter()).for_each(|(m, x)| *m += w * x / total);
    }
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for (z, w) in zs.iter().zip(wts) {
        for r in 0..d {
            for c in 0..d {
                cov[(r, c)] += w * (z[r] - mean[r]) * (z[c] - mean[c]);
            }
        }
    }
    (mean, cov)
}

/// Top-`k` eigenvectors, largest eigenvalue first.
fn top_vectors(cov: DMatrix<f64>, k: usize) -> Vec<Vec<f64>> {
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    order[..k].iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect()
}

/// Principal frame, coordinate frame and seeded random frames.
pub(crate) fn seed_frames(pts: &[HPoint], wts: &[f64], k: usize, extra: usize) -> Vec<IsotropicFrame> {
    let n = pts[0].n();
    let zs: Vec<&[f64]> = pts.iter().map(|p| p.z.as_slice()).collect();
    let (_, cov) = covariance(&zs, wts);
    let mut out = Vec::new();
    if let Ok(f) = IsotropicFrame::from_raw(&top_vectors(cov, k)) {
        out.push(f);
    }
    out.push(IsotropicFrame::standard(n, k).expect("validated dimensions"));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..extra {
        let raw: Vec<Vec<f64>> = (0..k).map(|_| (0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        if let Ok(f) = IsotropicFrame::from_raw(&raw) {
            out.push(f);
        }
    }
    out
}

pub(crate) fn search(
    pts: &[HPoint],
    wts: &[f64],
    mass: f64,
    k: usize,
    request: &[Objective],
    opts: &FitOptions,
    extra: &[Vec<f64>],
) -> Pool {
    let n = pts[0].n();
    let stride = pts.len().div_ceil(opts.max_opt_points.max(2));
    let idx: Vec<usize> = (0..pts.len()).step_by(stride).collect();
    let sub_pts: Vec<HPoint> = idx.iter().map(|&i| pts[i].clone()).collect();
    let sub_wts: Vec<f64> = idx.iter().map(|&i| wts[i]).collect();
    let sub_mass = mass * sub_wts.iter().sum::<f64>() / wts.iter().sum::<f64>();
    let cost = |x: &[f64], obj: Objective| match plane(x, n, k) {
        Some(v) => values(&sub_pts, &sub_wts, sub_mass, &v)[obj as usize],
        None => f64::INFINITY,
    };

    let total: f64 = wts.iter().sum();
    let mut mean = vec![0.0; 2 * n];
    for (p, w) in pts.iter().zip(wts) {
        mean.iter_mut().zip(&p.z).for_each(|(m, x)| *m += w * x / total);
    }
    let mut pool = Pool::default();
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for frame in seed_frames(pts, wts, k, opts.angle_seeds) {
        let perp = frame.perp(&mean);
        let mut heights: Vec<(f64, f64)> =
            sub_pts.iter().zip(&sub_wts).map(|(p, w)| (p.t - omega(&perp, &frame.project(&p.z)), *w)).collect();
        let mut x = frame.vectors().concat();
        x.extend_from_slice(&perp);
        x.push(weighted_median(&mut heights));
        pool.push(x.clone());
        seeds.push(x);
    }
    for &obj in request {
        let mut ranked: Vec<(f64, usize)> = seeds.iter().enumerate().map(|(i, x)| (cost(x, obj), i)).collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, si) in ranked.iter().take(opts.restarts.max(1)) {
            let x0 = &seeds[si];
            let m = nelder_mead(|x| cost(x, obj), x0, &vec![0.05; x0.len()], opts.max_iters * x0.len() as u64);
            pool.converged &= m.converged;
            pool.push(m.x);
        }
    }
    let origin = HPoint::identity(n);
    if let Some(f) = seed_frames(pts, wts, k, 0).into_iter().next() {
        pool.push(through_point(&origin, &f));
    }
    for x in extra {
        pool.push(x.clone());
    }
    pool.evaluate(|x| match plane(x, n, k) {
        Some(v) => values(pts, wts, mass, &v),
        None => [f64::INFINITY; OBJECTIVES],
    });
    pool
}

/// `[βπ₁, βπ∞]` of the principal and the reweighted L¹ affine `k`-planes.
pub(crate) fn affine_projection(pts: &[HPoint], wts: &[f64], mass: f64, k: usize) -> [f64; 2] {
    let zs: Vec<&[f64]> = pts.iter().map(|p| p.z.as_slice()).collect();
    let residual = |mean: &[f64], basis: &[Vec<f64>], z: &[f64]| {
        let v: Vec<f64> = z.iter().zip(mean).map(|(a, b)| a - b).collect();
        let par: f64 = basis.iter().map(|b| b.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>().powi(2)).sum();
        (v.iter().map(|x| x * x).sum::<f64>() - par).max(0.0).sqrt()
    };
    let mut best = [f64::INFINITY; 2];
    let mut omega_w = wts.to_vec();
    for _ in 0..30 {
        let (mean, cov) = covariance(&zs, &omega_w);
        let basis = top_vectors(cov, k);
        let res: Vec<f64> = zs.iter().map(|z| residual(&mean, &basis, z)).collect();
        let p1 = res.iter().zip(wts).map(|(r, w)| r * w).sum::<f64>() / mass;
        let pinf = res.iter().fold(0.0f64, |a, &b| a.max(b));
        best = [best[0].min(p1), best[1].min(pinf)];
        let floor = 1e-9 * res.iter().fold(0.0f64, |a, &b| a.max(b)).max(1e-300);
        omega_w.iter_mut().zip(&res).zip(wts).for_each(|((o, r), w)| *o = w / r.max(floor));
    }
    best
}
