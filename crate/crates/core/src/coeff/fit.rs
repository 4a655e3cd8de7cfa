//! Line fitting in ℝ²: exact weighted L¹ lines, minimal slabs, and the
//! exhaustive pair oracle.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// The line `{p : ⟨n_φ, p⟩ = w}` with direction `(cos φ, sin φ)` and
/// normal `n_φ = (−sin φ, cos φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line2 {
    pub phi: f64,
    pub w: f64,
}

impl Line2 {
    pub fn normal(&self) -> [f64; 2] {
        let (s, c) = self.phi.sin_cos();
        [-s, c]
    }

    pub fn dist(&self, p: [f64; 2]) -> f64 {
        let n = self.normal();
        (n[0] * p[0] + n[1] * p[1] - self.w).abs()
    }

    /// Line through `p` with direction angle `phi`.
    pub fn at(p: [f64; 2], phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { phi, w: -s * p[0] + c * p[1] }
    }

    pub fn through(p: [f64; 2], q: [f64; 2]) -> Option<Self> {
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        (dx != 0.0 || dy != 0.0).then(|| Self::at(p, dy.atan2(dx)))
    }
}

pub fn l1_cost(line: &Line2, pts: &[[f64; 2]], wts: &[f64]) -> f64 {
    pts.iter().zip(wts).map(|(p, w)| w * line.dist(*p)).sum()
}

pub fn sup_cost(line: &Line2, pts: &[[f64; 2]]) -> f64 {
    pts.iter().map(|p| line.dist(*p)).fold(0.0, f64::max)
}

/// Best line through `pts[pivot]`. The cost `Σ wᵢ rᵢ |sin(φ − αᵢ)|` is a
/// sinusoid between consecutive `αᵢ` and nonnegative, hence concave there,
/// so its minimum over `[0, π)` sits at some `αᵢ`.
fn best_through(pivot: usize, pts: &[[f64; 2]], wts: &[f64], scratch: &mut Vec<(f64, f64)>) -> Option<(Line2, f64)> {
    let p = pts[pivot];
    scratch.clear();
    for (i, (q, w)) in pts.iter().zip(wts).enumerate() {
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let r = dx.hypot(dy);
        if i == pivot || r == 0.0 {
            continue;
        }
        let mut a = dy.atan2(dx);
        if a < 0.0 {
            a += PI;
        }
        if a >= PI {
            a -= PI;
        }
        scratch.push((a, w * r));
    }
    if scratch.is_empty() {
        return None;
    }
    scratch.sort_by(|x, y| x.0.total_cmp(&y.0));
    // f(φ) = sin φ·Sc − cos φ·Ss with signed sums over terms left/right of φ
    let (mut sc, mut ss) = (0.0, 0.0);
    for &(a, c) in scratch.iter() {
        sc -= c * a.cos();
        ss -= c * a.sin();
    }
    let mut best = (f64::INFINITY, 0.0);
    for &(a, c) in scratch.iter() {
        sc += 2.0 * c * a.cos();
        ss += 2.0 * c * a.sin();
        let f = a.sin() * sc - a.cos() * ss;
        if f < best.0 {
            best = (f, a);
        }
    }
    let line = Line2::at(p, best.1);
    Some((line, l1_cost(&line, pts, wts)))
}

/// Weighted L¹ line. Exact (all pivots) up to `exact_cap` points, otherwise
/// pivot descent started from an iteratively reweighted principal axis.
pub fn l1_line(pts: &[[f64; 2]], wts: &[f64], exact_cap: usize) -> (Line2, f64) {
    let start = irls_line(pts, wts, 30);
    let mut best = (start, l1_cost(&start, pts, wts));
    let mut scratch = Vec::with_capacity(pts.len());
    if pts.len() <= exact_cap {
        for pivot in 0..pts.len() {
            if let Some(c) = best_through(pivot, pts, wts, &mut scratch) {
                if c.1 < best.1 {
                    best = c;
                }
            }
        }
        return best;
    }
    let mut pivot = nearest(&best.0, pts);
    for _ in 0..64 {
        let Some(c) = best_through(pivot, pts, wts, &mut scratch) else { break };
        if !(c.1 < best.1 * (1.0 - 1e-15)) {
            break;
        }
        best = c;
        // the new line passes through the pivot and one other point; pivot on that one
        pivot = (0..pts.len())
            .filter(|&i| pts[i] != pts[pivot])
            .min_by(|&a, &b| best.0.dist(pts[a]).total_cmp(&best.0.dist(pts[b])))
            .unwrap_or(pivot);
    }
    best
}

fn nearest(line: &Line2, pts: &[[f64; 2]]) -> usize {
    (0..pts.len()).min_by(|&a, &b| line.dist(pts[a]).total_cmp(&line.dist(pts[b]))).unwrap_or(0)
}

/// Principal axis of the weighted cloud, reweighted by inverse residuals.
pub fn irls_line(pts: &[[f64; 2]], wts: &[f64], iters: usize) -> Line2 {
    let mut line = principal_line(pts, wts);
    let mut omega = wts.to_vec();
    for _ in 0..iters {
        let scale = wts.iter().sum::<f64>().max(1e-300);
        for ((o, p), w) in omega.iter_mut().zip(pts).zip(wts) {
            *o = w / line.dist(*p).max(1e-9 * scale);
        }
        line = principal_line(pts, &omega);
    }
    line
}

pub fn principal_line(pts: &[[f64; 2]], wts: &[f64]) -> Line2 {
    let total: f64 = wts.iter().sum();
    let (mut mx, mut my) = (0.0, 0.0);
    for (p, w) in pts.iter().zip(wts) {
        mx += w * p[0];
        my += w * p[1];
    }
    mx /= total;
    my /= total;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (p, w) in pts.iter().zip(wts) {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += w * dx * dx;
        syy += w * dy * dy;
        sxy += w * dx * dy;
    }
    Line2::at([mx, my], 0.5 * (2.0 * sxy).atan2(sxx - syy))
}

/// Narrowest slab containing all points, as its mid-line and half-width.
/// The optimal slab is parallel to a convex-hull edge.
pub fn slab_line(pts: &[[f64; 2]]) -> (Line2, f64) {
    let hull = convex_hull(pts);
    if hull.len() <= 2 {
        let line = match hull.as_slice() {
            [p, q] => Line2::through(*p, *q).unwrap(),
            [p] => Line2::at(*p, 0.0),
            _ => Line2 { phi: 0.0, w: 0.0 },
        };
        return (line, sup_cost(&line, pts));
    }
    let mut best = (Line2 { phi: 0.0, w: 0.0 }, f64::INFINITY);
    for i in 0..hull.len() {
        let edge = Line2::through(hull[i], hull[(i + 1) % hull.len()]).unwrap();
        let n = edge.normal();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for q in &hull {
            let s = n[0] * q[0] + n[1] * q[1];
            lo = lo.min(s);
            hi = hi.max(s);
        }
        let half = 0.5 * (hi - lo);
        if half < best.1 {
            best = (Line2 { phi: edge.phi, w: 0.5 * (hi + lo) }, half);
        }
    }
    best
}

/// Andrew's monotone chain; collinear points dropped.
pub fn convex_hull(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p: Vec<[f64; 2]> = pts.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() <= 2 {
        return p;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Exhaustive weighted L¹ line search over all point-pair lines and the
/// axis-parallel lines through each point. Independent of [`l1_line`].
pub fn oracle_fit(pts: &[[f64; 2]], wts: &[f64]) -> Result<(Line2, f64)> {
    if pts.len() > 12 {
        return Err(Error::param("points", "oracle takes at most 12 points"));
    }
    if pts.len() != wts.len() || pts.is_empty() {
        return Err(Error::param("weights", "need one weight per point"));
    }
    let mut cands = Vec::new();
    for (i, &p) in pts.iter().enumerate() {
        cands.push(Line2::at(p, 0.0));
        cands.push(Line2::at(p, 0.5 * PI));
        for &q in &pts[..i] {
            cands.extend(Line2::through(p, q));
        }
    }
    let best = cands.into_iter().map(|l| (l, l1_cost(&l, pts, wts))).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    Ok(best)
}
