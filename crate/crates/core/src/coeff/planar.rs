//! Candidate-pool search for `n = k = 1`, with planes parameterized as
//! `(φ, w, τ)` in the sense of [`HorizontalPlane::h1_line`].

use super::fit::{l1_line, principal_line, slab_line, Line2};
use super::optim::{golden, nelder_mead, weighted_median};
use super::{FitOptions, Objective, Pool, OBJECTIVES};
use crate::hgroup::{depressed_cubic_root, HPoint, HorizontalPlane};
use std::f64::consts::PI;

/// `(d(y, V), d_Eucl(π(y), π(V)))` for the line `(φ, w, τ)`, with
/// `(sin φ, cos φ)` precomputed. Same closed form as
/// [`HorizontalPlane::offset`], specialized to `ℍ¹`.
#[inline]
pub(crate) fn offset(sc: (f64, f64), w: f64, tau: f64, z: &[f64], t: f64) -> (f64, f64) {
    let (s, c) = sc;
    let (b0, b1) = (-w * s, w * c);
    let (w0, w1) = (z[0] - b0, z[1] - b1);
    let tau_loc = t - tau - 0.5 * (b0 * z[1] - b1 * z[0]);
    let a = c * w0 + s * w1;
    let p = -s * w0 + c * w1;
    let e = p * p;
    let cn = 0.5 * p.abs();
    let tau2 = tau_loc - 0.5 * p * a;
    let f = if cn < 1e-300 {
        e * e + 16.0 * tau2 * tau2
    } else {
        let alpha = depressed_cubic_root(e + 8.0 * cn * cn, -8.0 * cn * tau2);
        let r = alpha * alpha + e;
        let h = tau2 - cn * alpha;
        r * r + 16.0 * h * h
    };
    (f.sqrt().sqrt(), p.abs())
}

/// Parameters of the line with direction `phi` through `p`.
pub(crate) fn through_point(p: &HPoint, phi: f64) -> [f64; 3] {
    let (s, c) = phi.sin_cos();
    let w = -s * p.z[0] + c * p.z[1];
    let lam = c * p.z[0] + s * p.z[1];
    [phi, w, p.t + 0.5 * lam * w]
}

pub(crate) fn plane(x: &[f64]) -> HorizontalPlane {
    HorizontalPlane::h1_line(x[0], x[1], x[2])
}

/// Objective values of one plane: `[β₁, β∞, β̂₁, β̂∞, βπ₁, βπ∞]`.
pub(crate) fn values(pts: &[HPoint], wts: &[f64], mass: f64, x: &[f64]) -> [f64; OBJECTIVES] {
    let sc = x[0].sin_cos();
    let (mut sd, mut md, mut se, mut me) = (0.0, 0.0f64, 0.0, 0.0f64);
    for (p, w) in pts.iter().zip(wts) {
        let (d, e) = offset(sc, x[1], x[2], &p.z, p.t);
        sd += w * d;
        se += w * e;
        md = md.max(d);
        me = me.max(e);
    }
    let (b1, e1) = (sd / mass, se / mass);
    [b1, md, hat(e1, b1), hat(me, md), e1, me]
}

pub(crate) fn hat(e: f64, b: f64) -> f64 {
    (e * e + b.powi(4)).sqrt().sqrt()
}

struct Sample<'a> {
    pts: Vec<&'a HPoint>,
    wts: Vec<f64>,
    mass: f64,
}

impl Sample<'_> {
    fn eval(&self, x: &[f64], obj: Objective) -> f64 {
        let sc = x[0].sin_cos();
        let (mut sd, mut md, mut se, mut me) = (0.0, 0.0f64, 0.0, 0.0f64);
        for (p, w) in self.pts.iter().zip(&self.wts) {
            let (d, e) = offset(sc, x[1], x[2], &p.z, p.t);
            sd += w * d;
            se += w * e;
            md = md.max(d);
            me = me.max(e);
        }
        let (b1, e1) = (sd / self.mass, se / self.mass);
        match obj {
            Objective::Beta1 => b1,
            Objective::BetaInf => md,
            Objective::Hat1 => hat(e1, b1),
            Objective::HatInf => hat(me, md),
            Objective::Pi1 => e1,
            Objective::PiInf => me,
        }
    }
}

/// Searches the requested metric objectives and returns the full pool,
/// evaluated on every point. `extra` candidates join the pool unchanged.
pub(crate) fn search(pts: &[HPoint], wts: &[f64], mass: f64, request: &[Objective], opts: &FitOptions, extra: &[Vec<f64>]) -> Pool {
    let zs: Vec<[f64; 2]> = pts.iter().map(|p| [p.z[0], p.z[1]]).collect();
    let stride = pts.len().div_ceil(opts.max_opt_points.max(2));
    let idx: Vec<usize> = (0..pts.len()).step_by(stride).collect();
    let sub_w: f64 = idx.iter().map(|&i| wts[i]).sum();
    let all_w: f64 = wts.iter().sum();
    let sample =
        Sample { pts: idx.iter().map(|&i| &pts[i]).collect(), wts: idx.iter().map(|&i| wts[i]).collect(), mass: mass * sub_w / all_w };

    let mut lines: Vec<Line2> = vec![l1_line(&zs, wts, opts.exact_l1_cap).0, slab_line(&zs).0, principal_line(&zs, wts)];
    for i in 0..opts.angle_seeds {
        let phi = PI * i as f64 / opts.angle_seeds as f64;
        let (s, c) = phi.sin_cos();
        let mut offs: Vec<(f64, f64)> = idx.iter().map(|&i| (-s * zs[i][0] + c * zs[i][1], wts[i])).collect();
        lines.push(Line2 { phi, w: weighted_median(&mut offs) });
    }

    let mut pool = Pool::default();
    // per objective: (value, seed, params) of each seed's best height
    let mut ranked: Vec<Vec<(f64, usize, [f64; 3])>> = vec![Vec::new(); request.len()];
    for (si, line) in lines.iter().enumerate() {
        let (s, c) = line.phi.sin_cos();
        let mut heights: Vec<(f64, f64)> =
            sample.pts.iter().zip(&sample.wts).map(|(p, w)| (p.t + 0.5 * (c * p.z[0] + s * p.z[1]) * line.w, *w)).collect();
        let tau0 = weighted_median(&mut heights);
        pool.push(vec![line.phi, line.w, tau0]);
        for (oi, &obj) in request.iter().enumerate() {
            let f = |tau: f64| sample.eval(&[line.phi, line.w, tau], obj);
            let mut best = (f(tau0), tau0);
            for step in 0..=opts.tau_steps {
                let tau = tau0 - 0.5 + step as f64 / opts.tau_steps as f64;
                let v = f(tau);
                if v < best.0 {
                    best = (v, tau);
                }
            }
            let h = 1.0 / opts.tau_steps as f64;
            let (tau, v) = golden(f, best.1 - h, best.1 + h, 30);
            let best = if v < best.0 { (v, tau) } else { best };
            ranked[oi].push((best.0, si, [line.phi, line.w, best.1]));
            pool.push(vec![line.phi, line.w, best.1]);
        }
    }
    for (oi, &obj) in request.iter().enumerate() {
        ranked[oi].sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, _, x0) in ranked[oi].iter().take(opts.restarts) {
            let m = nelder_mead(|x| sample.eval(x, obj), &x0, &[0.1, 0.05, 0.05], opts.max_iters);
            pool.converged &= m.converged;
            pool.push(m.x);
        }
    }
    // plane through the anchor, so the p = 1 metric term never exceeds 1 on cubes
    let pca = lines[2].phi;
    pool.push(vec![pca, 0.0, 0.0]);
    for x in extra {
        pool.push(x.clone());
    }
    pool.evaluate(|x| values(pts, wts, mass, x));
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specialized_offset_matches_general() {
        let plane = HorizontalPlane::h1_line(0.7, -0.3, 0.2);
        for (x, y, t) in [(0.3, 0.1, -0.4), (1.0, 2.0, 3.0), (-0.5, 0.25, 0.0), (0.0, 0.0, 0.0)] {
            let p = HPoint::h1(x, y, t);
            let general = plane.offset(&p.z, p.t);
            let (d, e) = offset(0.7f64.sin_cos(), -0.3, 0.2, &p.z, p.t);
            assert!((general.dist - d).abs() < 1e-13, "{} vs {}", general.dist, d);
            assert!((general.eucl - e).abs() < 1e-13);
        }
    }

    #[test]
    fn through_point_contains_point() {
        let p = HPoint::h1(0.4, -1.2, 0.9);
        let x = through_point(&p, 1.1);
        // heights carry rounding of order 1e-16, which the metric turns into 1e-8
        assert!(plane(&x).dist(&p) < 1e-7);
        assert!(plane(&x).offset(&p.z, p.t).eucl < 1e-12);
    }
}
