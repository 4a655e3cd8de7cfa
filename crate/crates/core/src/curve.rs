//! The Juillet curve: planar generations with angles `θₙ = C₀/n`, their
//! horizontal lifts, rescaled pieces `Γₙ`, the sets `Λ_θ`, and the
//! area bound for endpoint distances.

use crate::error::{Error, Result};
use crate::hgroup::{omega, HPoint, Rotation};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const DEFAULT_C0: f64 = 0.2;

/// Largest admissible angle constant.
pub const MAX_C0: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub c0: f64,
    pub max_generation: usize,
}

impl CurveConfig {
    pub fn new(c0: f64, max_generation: usize) -> Result<Self> {
        if !(c0 > 0.0 && c0 <= MAX_C0) {
            return Err(Error::param("curve.C0", format!("must lie in (0, {MAX_C0}], got {c0}")));
        }
        Ok(Self { c0, max_generation })
    }

    /// `θₙ = C₀/n` for `n ≥ 1`.
    pub fn theta(&self, n: usize) -> f64 {
        assert!(n >= 1, "angles are indexed from 1");
        self.c0 / n as f64
    }

    /// `l₀ = 2`, `lₙ₊₁ = lₙ / (4 cos θₙ₊₁)`.
    pub fn segment_length(&self, n: usize) -> f64 {
        (1..=n).fold(2.0, |l, m| l / (4.0 * self.theta(m).cos()))
    }

    /// Planar length `4ⁿ lₙ` of generation `n`.
    pub fn total_length(&self, n: usize) -> f64 {
        4f64.powi(n as i32) * self.segment_length(n)
    }

    fn check_generation(&self, n: usize) -> Result<()> {
        if n > self.max_generation {
            return Err(Error::param("generation", format!("{n} exceeds max_generation {}", self.max_generation)));
        }
        Ok(())
    }
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self { c0: DEFAULT_C0, max_generation: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarPolyline {
    pub vertices: Vec<[f64; 2]>,
    pub constant_speed: bool,
}

impl PlanarPolyline {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::param("polyline", "needs at least two vertices"));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("polyline", "consecutive vertices coincide"));
        }
        let lens: Vec<f64> = seg_lengths(&vertices).collect();
        let (lo, hi) = lens.iter().fold((f64::MAX, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
        Ok(Self { constant_speed: hi - lo <= 1e-12 * hi, vertices })
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        seg_lengths(&self.vertices).collect()
    }

    pub fn length(&self) -> f64 {
        seg_lengths(&self.vertices).sum()
    }
}

fn seg_lengths(v: &[[f64; 2]]) -> impl Iterator<Item = f64> + '_ {
    v.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
}

/// Replaces every segment `P → Q` by four segments through
/// `P + d/4 − (tan θ/4)d⊥`, `P + d/2`, `P + 3d/4 + (tan θ/4)d⊥`, where
/// `d = Q − P` and `d⊥` is `d` turned counterclockwise.
fn refine(vertices: &[[f64; 2]], theta: f64) -> Vec<[f64; 2]> {
    let h = 0.25 * theta.tan();
    let mut out = Vec::with_capacity(4 * (vertices.len() - 1) + 1);
    for w in vertices.windows(2) {
        let (p, q) = (w[0], w[1]);
        let d = [q[0] - p[0], q[1] - p[1]];
        let perp = [-d[1], d[0]];
        out.push(p);
        out.push([p[0] + 0.25 * d[0] - h * perp[0], p[1] + 0.25 * d[1] - h * perp[1]]);
        out.push([p[0] + 0.5 * d[0], p[1] + 0.5 * d[1]]);
        out.push([p[0] + 0.75 * d[0] + h * perp[0], p[1] + 0.75 * d[1] + h * perp[1]]);
    }
    out.push(*vertices.last().unwrap());
    out
}

/// Generation built from the base segment `[(−1,0), (1,0)]` with the given
/// angle sequence, one refinement per angle.
pub fn build_with_angles(thetas: &[f64]) -> PlanarPolyline {
    let mut v = vec![[-1.0, 0.0], [1.0, 0.0]];
    for &th in thetas {
        v = refine(&v, th);
    }
    PlanarPolyline { vertices: v, constant_speed: true }
}

/// Generation `n`: `4ⁿ` segments of length `lₙ`.
pub fn build_planar_generation(cfg: &CurveConfig, n: usize) -> Result<PlanarPolyline> {
    cfg.check_generation(n)?;
    let thetas: Vec<f64> = (1..=n).map(|m| cfg.theta(m)).collect();
    Ok(build_with_angles(&thetas))
}

/// Horizontal polyline in ℍ¹; `increments[i] = ω(zᵢ, zᵢ₊₁)` is the height
/// gained along segment `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizontalPolyline {
    vertices: Vec<HPoint>,
    increments: Vec<f64>,
}

impl HorizontalPolyline {
    pub fn vertices(&self) -> &[HPoint] {
        &self.vertices
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn planar(&self) -> Vec<[f64; 2]> {
        self.vertices.iter().map(|p| [p.z[0], p.z[1]]).collect()
    }

    /// Heisenberg length, equal to the Euclidean length of the projection.
    pub fn length(&self) -> f64 {
        seg_lengths(&self.planar()).sum()
    }

    /// Largest deviation of a segment from the lift rule.
    pub fn horizontality_defect(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1].t - w[0].t - omega(&w[0].z, &w[1].z)).abs()).fold(0.0, f64::max)
    }

    /// Point at fraction `s ∈ [0,1]` along segment `i`; the height is affine
    /// in `s` because `ω(z, z + sΔ) = s·ω(z, Δ)`.
    pub fn point_on_segment(&self, i: usize, s: f64) -> HPoint {
        let (p, q) = (&self.vertices[i], &self.vertices[i + 1]);
        let z = vec![p.z[0] + s * (q.z[0] - p.z[0]), p.z[1] + s * (q.z[1] - p.z[1])];
        HPoint { z, t: p.t + s * self.increments[i] }
    }

    /// Applies a map of ℍ¹ that sends horizontal segments to horizontal
    /// segments (left translations, dilations, rotations).
    fn map_similitude(&self, f: impl Fn(&HPoint) -> HPoint) -> Self {
        let vertices: Vec<HPoint> = self.vertices.iter().map(f).collect();
        let increments = vertices.windows(2).map(|w| omega(&w[0].z, &w[1].z)).collect();
        Self { vertices, increments }
    }

    /// Vertices written as `x y t`, 17 significant digits each.
    pub fn export_text(&self) -> String {
        let mut s = String::with_capacity(self.vertices.len() * 72);
        for p in &self.vertices {
            let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", p.z[0], p.z[1], p.t);
        }
        s
    }
}

/// Lifts `pl` to ℍ¹ starting at `start`.
pub fn lift_horizontal(pl: &PlanarPolyline, start: &HPoint) -> Result<HorizontalPolyline> {
    if start.z.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: start.z.len() });
    }
    let first = pl.vertices[0];
    if (start.z[0] - first[0]).abs() > 1e-12 || (start.z[1] - first[1]).abs() > 1e-12 {
        return Err(Error::param("start", "does not project onto the first vertex"));
    }
    let mut vertices = Vec::with_capacity(pl.vertices.len());
    let mut increments = Vec::with_capacity(pl.vertices.len() - 1);
    let mut t = start.t;
    vertices.push(HPoint::h1(first[0], first[1], t));
    for w in pl.vertices.windows(2) {
        let inc = omega(&w[0], &w[1]);
        t += inc;
        increments.push(inc);
        vertices.push(HPoint::h1(w[1][0], w[1][1], t));
    }
    Ok(HorizontalPolyline { vertices, increments })
}

/// Generation `n` of the lifted curve, starting at `(−1, 0, 0)`.
pub fn juillet(cfg: &CurveConfig, n: usize) -> Result<HorizontalPolyline> {
    lift_horizontal(&build_planar_generation(cfg, n)?, &HPoint::h1(-1.0, 0.0, 0.0))
}

/// Vertex index of parameter `σ/4^m` on a generation-`n` polyline.
pub fn dyadic_index(n: usize, m: usize, sigma: usize) -> usize {
    assert!(m <= n && sigma <= 1 << (2 * m), "parameter out of range");
    sigma << (2 * (n - m))
}

/// `Λ_θ = {(−1,0,0), (−½,−tanθ/2,tanθ/4), (0,0,tanθ/4), (½,tanθ/2,tanθ/4), (1,0,0)}`.
pub fn lambda_theta(theta: f64) -> [HPoint; 5] {
    let tn = theta.tan();
    [
        HPoint::h1(-1.0, 0.0, 0.0),
        HPoint::h1(-0.5, -0.5 * tn, 0.25 * tn),
        HPoint::h1(0.0, 0.0, 0.25 * tn),
        HPoint::h1(0.5, 0.5 * tn, 0.25 * tn),
        HPoint::h1(1.0, 0.0, 0.0),
    ]
}

/// The piece of generation `cfg.max_generation` over `[σ/4ⁿ, (σ+1)/4ⁿ]`,
/// moved by the similitude (translation, rotation, dilation by `2/lₙ`)
/// that sends its endpoints to `(−1,0,0)` and `(1,0,0)`.
pub fn gamma_piece(cfg: &CurveConfig, n: usize, sigma: usize) -> Result<HorizontalPolyline> {
    if n >= cfg.max_generation {
        return Err(Error::param("n", "needs max_generation > n to resolve the piece"));
    }
    if sigma >= 1 << (2 * n) {
        return Err(Error::param("sigma", format!("must be below 4^{n}")));
    }
    let full = juillet(cfg, cfg.max_generation)?;
    let lo = dyadic_index(cfg.max_generation, n, sigma);
    let hi = dyadic_index(cfg.max_generation, n, sigma + 1);
    let piece = HorizontalPolyline { vertices: full.vertices[lo..=hi].to_vec(), increments: full.increments[lo..hi].to_vec() };
    let start_inv = piece.vertices[0].inverse();
    let end = start_inv.mul(&piece.vertices[hi - lo]);
    let rot = Rotation::planar(-end.z[1].atan2(end.z[0]));
    let scale = 2.0 / end.z[0].hypot(end.z[1]);
    let left = HPoint::h1(-1.0, 0.0, 0.0);
    Ok(piece.map_similitude(|p| left.mul(&rot.rotate(&start_inv.mul(p)).dilate(scale))))
}

/// Endpoint distance and its area bound `|π(p₁) − π(p₂)| + 2√|A_γ|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AreaBound {
    pub lhs: f64,
    pub rhs: f64,
    /// Signed shoelace area of the projection closed by the chord.
    pub area: f64,
}

pub fn area_distance_bound(gamma: &HorizontalPolyline) -> AreaBound {
    let v = gamma.vertices();
    let (p1, p2) = (&v[0], &v[v.len() - 1]);
    let mut area: f64 = v.windows(2).map(|w| omega(&w[0].z, &w[1].z)).sum();
    area += omega(&p2.z, &p1.z);
    let chord = (p2.z[0] - p1.z[0]).hypot(p2.z[1] - p1.z[1]);
    AreaBound { lhs: p1.dist(p2), rhs: chord + 2.0 * area.abs().sqrt(), area }
}

/// A planar polyline lifted from the origin.
pub fn lift_from_origin(vertices: Vec<[f64; 2]>) -> Result<HorizontalPolyline> {
    let start = HPoint::h1(vertices.first().map_or(0.0, |v| v[0]), vertices.first().map_or(0.0, |v| v[1]), 0.0);
    lift_horizontal(&PlanarPolyline::new(vertices)?, &start)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_generation_length() {
        let cfg = CurveConfig::default();
        assert!((cfg.segment_length(1) - 0.5 / 0.2f64.cos()).abs() < 1e-15);
        let g0 = build_planar_generation(&cfg, 0).unwrap();
        assert_eq!(g0.vertices, vec![[-1.0, 0.0], [1.0, 0.0]]);
    }

    #[test]
    fn generation_out_of_range() {
        let cfg = CurveConfig::new(0.2, 3).unwrap();
        assert!(build_planar_generation(&cfg, 4).is_err());
        assert!(CurveConfig::new(0.25, 3).is_err());
    }

    #[test]
    fn unit_square_area() {
        let sq = lift_from_origin(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let last = sq.vertices().last().unwrap();
        assert!((last.t - 1.0).abs() < 1e-15);
        let b = area_distance_bound(&sq);
        assert!((b.lhs - 2.0).abs() < 1e-15 && (b.rhs - 2.0).abs() < 1e-15);
    }

    #[test]
    fn first_refinement_is_lambda() {
        let cfg = CurveConfig::default();
        let g1 = juillet(&cfg, 1).unwrap();
        for (p, q) in g1.vertices().iter().zip(lambda_theta(cfg.theta(1)).iter()) {
            assert!(p.dist(q) < 1e-12, "{p:?} vs {q:?}");
        }
    }
}
