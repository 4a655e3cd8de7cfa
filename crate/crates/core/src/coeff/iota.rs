//! Distortion of pairwise distances under horizontal projections onto
//! subgroups. `P_{V₀}` is a homomorphism onto an abelian subgroup, so
//! `d(P_{V₀}x, P_{V₀}y) = |π_V(z_y − z_x)|` and no translation is needed.

use super::optim::{golden, nelder_mead};
use super::FitOptions;
use crate::hgroup::{HPoint, IsotropicFrame};
use std::f64::consts::PI;

pub(crate) struct IotaFit {
    /// `[ι₁, ι∞]`.
    pub value: [f64; 2],
    pub frames: [IsotropicFrame; 2],
    /// Per exponent, the point whose row of distortions is smallest under
    /// the optimal frame.
    pub anchors: [usize; 2],
    pub converged: bool,
}

struct Pairs {
    i: Vec<u32>,
    j: Vec<u32>,
    d: Vec<f64>,
    /// `z_j − z_i`, row-major.
    dz: Vec<f64>,
    ww: Vec<f64>,
    dim: usize,
}

impl Pairs {
    fn new(pts: &[HPoint], wts: &[f64]) -> Self {
        let m = pts.len();
        let dim = pts[0].z.len();
        let cap = m * (m - 1) / 2;
        let mut p = Pairs {
            i: Vec::with_capacity(cap),
            j: Vec::with_capacity(cap),
            d: Vec::with_capacity(cap),
            dz: Vec::with_capacity(cap * dim),
            ww: Vec::with_capacity(cap),
            dim,
        };
        for a in 0..m {
            for b in a + 1..m {
                p.i.push(a as u32);
                p.j.push(b as u32);
                p.d.push(pts[a].dist(&pts[b]));
                p.dz.extend(pts[b].z.iter().zip(&pts[a].z).map(|(x, y)| x - y));
                p.ww.push(wts[a] * wts[b]);
            }
        }
        p
    }

    #[inline]
    fn gap(&self, q: usize, frame: &[Vec<f64>]) -> f64 {
        let dz = &self.dz[q * self.dim..(q + 1) * self.dim];
        let proj: f64 = frame.iter().map(|v| v.iter().zip(dz).map(|(a, b)| a * b).sum::<f64>().powi(2)).sum();
        (self.d[q] - proj.sqrt()).abs()
    }

    /// `[ι₁, ι∞]` for a frame; ordered pairs, so each unordered one counts twice.
    fn eval(&self, frame: &[Vec<f64>], mass: f64) -> [f64; 2] {
        let (mut sum, mut max) = (0.0, 0.0f64);
        for q in 0..self.d.len() {
            let g = self.gap(q, frame);
            sum += self.ww[q] * g;
            max = max.max(g);
        }
        [2.0 * sum / (mass * mass), max]
    }

    fn eval_h1(&self, phi: f64, mass: f64) -> [f64; 2] {
        let (s, c) = phi.sin_cos();
        let (mut sum, mut max) = (0.0, 0.0f64);
        for q in 0..self.d.len() {
            let g = (self.d[q] - (c * self.dz[2 * q] + s * self.dz[2 * q + 1]).abs()).abs();
            sum += self.ww[q] * g;
            max = max.max(g);
        }
        [2.0 * sum / (mass * mass), max]
    }

    /// Index minimizing the weighted row mean (`p = 1`) or row max (`p = ∞`).
    fn anchors(&self, m: usize, wts: &[f64], frames: &[IsotropicFrame; 2]) -> [usize; 2] {
        let mut out = [0; 2];
        for (slot, frame) in frames.iter().enumerate() {
            let mut row = vec![0.0f64; m];
            for q in 0..self.d.len() {
                let g = self.gap(q, frame.vectors());
                let (a, b) = (self.i[q] as usize, self.j[q] as usize);
                if slot == 0 {
                    row[a] += wts[b] * g;
                    row[b] += wts[a] * g;
                } else {
                    row[a] = row[a].max(g);
                    row[b] = row[b].max(g);
                }
            }
            out[slot] = (0..m).min_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap_or(0);
        }
        out
    }
}

pub(crate) fn fit(pts: &[HPoint], wts: &[f64], mass: f64, k: usize, opts: &FitOptions) -> IotaFit {
    let pairs = Pairs::new(pts, wts);
    let n = pts[0].n();
    if n == 1 && k == 1 {
        let steps = opts.iota_angles.max(4);
        let grid: Vec<[f64; 2]> = (0..steps).map(|i| pairs.eval_h1(PI * i as f64 / steps as f64, mass)).collect();
        let h = PI / steps as f64;
        let mut value = [0.0; 2];
        let mut frames = [IsotropicFrame::planar(0.0), IsotropicFrame::planar(0.0)];
        for slot in 0..2 {
            let best = (0..steps).min_by(|&a, &b| grid[a][slot].total_cmp(&grid[b][slot])).unwrap();
            let phi0 = best as f64 * h;
            let (phi, v) = golden(|phi| pairs.eval_h1(phi, mass)[slot], phi0 - h, phi0 + h, 40);
            let (phi, v) = if v <= grid[best][slot] { (phi, v) } else { (phi0, grid[best][slot]) };
            value[slot] = v;
            frames[slot] = IsotropicFrame::planar(phi);
        }
        let anchors = pairs.anchors(pts.len(), wts, &frames);
        return IotaFit { value, frames, anchors, converged: true };
    }
    let seeds = super::general::seed_frames(pts, wts, k, opts.angle_seeds);
    let mut value = [f64::INFINITY; 2];
    let mut frames = [seeds[0].clone(), seeds[0].clone()];
    let mut converged = true;
    for slot in 0..2 {
        let mut ranked: Vec<(f64, usize)> = seeds.iter().enumerate().map(|(i, f)| (pairs.eval(f.vectors(), mass)[slot], i)).collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(v0, si) in ranked.iter().take(opts.restarts.max(1)) {
            if v0 < value[slot] {
                value[slot] = v0;
                frames[slot] = seeds[si].clone();
            }
            let x0: Vec<f64> = seeds[si].vectors().concat();
            let cost = |x: &[f64]| match frame_of(x, n, k) {
                Some(f) => pairs.eval(f.vectors(), mass)[slot],
                None => f64::INFINITY,
            };
            let m = nelder_mead(cost, &x0, &vec![0.1; x0.len()], opts.max_iters);
            converged &= m.converged;
            if let Some(f) = frame_of(&m.x, n, k) {
                let v = pairs.eval(f.vectors(), mass)[slot];
                if v < value[slot] {
                    value[slot] = v;
                    frames[slot] = f;
                }
            }
        }
    }
    let anchors = pairs.anchors(pts.len(), wts, &frames);
    IotaFit { value, frames, anchors, converged }
}

pub(crate) fn frame_of(x: &[f64], n: usize, k: usize) -> Option<IsotropicFrame> {
    let raw: Vec<Vec<f64>> = x[..2 * n * k].chunks(2 * n).map(|c| c.to_vec()).collect();
    IsotropicFrame::from_raw(&raw).ok()
}
