//! The Heisenberg group ℍⁿ = ℝ^{2n} × ℝ with the Korányi metric, isotropic
//! frames, horizontal planes, projections, rotations and angles.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// Absolute tolerance for algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-10;

/// Below this the smallest singular value of a frame overlap counts as zero.
const SIGMA_FLOOR: f64 = 1e-12;

pub(crate) type Buf = SmallVec<[f64; 8]>;

/// `ω(z, z') = ½ Σ (zᵢ z'_{n+i} − z_{n+i} z'ᵢ)`.
#[inline]
pub fn omega(z: &[f64], w: &[f64]) -> f64 {
    debug_assert_eq!(z.len(), w.len());
    let n = z.len() / 2;
    let mut s = 0.0;
    for i in 0..n {
        s += z[i] * w[n + i] - z[n + i] * w[i];
    }
    0.5 * s
}

/// Korányi norm of `(z, t)`: `(|z|⁴ + 16t²)^{1/4}`.
#[inline]
pub fn koranyi(z: &[f64], t: f64) -> f64 {
    let r2: f64 = z.iter().map(|v| v * v).sum();
    (r2 * r2 + 16.0 * t * t).sqrt().sqrt()
}

/// `d(p, q) = ‖q⁻¹·p‖` without building the product.
#[inline]
pub fn dist_raw(zp: &[f64], tp: f64, zq: &[f64], tq: f64) -> f64 {
    assert_eq!(zp.len(), zq.len(), "dimension mismatch");
    let n = zp.len() / 2;
    let mut r2 = 0.0;
    for i in 0..zp.len() {
        let d = zp[i] - zq[i];
        r2 += d * d;
    }
    let mut om = 0.0;
    for i in 0..n {
        om += zq[i] * zp[n + i] - zq[n + i] * zp[i];
    }
    let dt = (tp - tq) - 0.5 * om;
    (r2 * r2 + 16.0 * dt * dt).sqrt().sqrt()
}

/// Applies `J` with `⟨z, Jw⟩ = 2ω(z, w)`.
fn apply_j(v: &[f64]) -> Buf {
    let n = v.len() / 2;
    let mut out: Buf = SmallVec::from_elem(0.0, v.len());
    for i in 0..n {
        out[i] = v[n + i];
        out[n + i] = -v[i];
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A point `(z, t)` of ℍⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub z: Vec<f64>,
    pub t: f64,
}

impl HPoint {
    pub fn new(z: Vec<f64>, t: f64) -> Result<Self> {
        if z.is_empty() || !z.len().is_multiple_of(2) {
            return Err(Error::param("z", format!("length must be 2n with n >= 1, got {}", z.len())));
        }
        if !t.is_finite() || z.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("z", "coordinates must be finite"));
        }
        Ok(Self { z, t })
    }

    /// Point of ℍ¹.
    pub fn h1(x: f64, y: f64, t: f64) -> Self {
        Self { z: vec![x, y], t }
    }

    pub fn identity(n: usize) -> Self {
        Self { z: vec![0.0; 2 * n], t: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.z.len() / 2
    }

    pub fn mul(&self, q: &HPoint) -> HPoint {
        assert_eq!(self.z.len(), q.z.len(), "dimension mismatch");
        let z = self.z.iter().zip(&q.z).map(|(a, b)| a + b).collect();
        HPoint { z, t: self.t + q.t + omega(&self.z, &q.z) }
    }

    pub fn inverse(&self) -> HPoint {
        HPoint { z: self.z.iter().map(|v| -v).collect(), t: -self.t }
    }

    pub fn norm(&self) -> f64 {
        koranyi(&self.z, self.t)
    }

    pub fn dist(&self, q: &HPoint) -> f64 {
        dist_raw(&self.z, self.t, &q.z, q.t)
    }

    /// `δ_r(z, t) = (rz, r²t)`.
    pub fn dilate(&self, r: f64) -> HPoint {
        assert!(r > 0.0, "dilation factor must be positive");
        HPoint { z: self.z.iter().map(|v| r * v).collect(), t: r * r * self.t }
    }

    /// `π(z, t) = z`.
    pub fn pi(&self) -> &[f64] {
        &self.z
    }

    /// `π_t(z, t) = t`.
    pub fn pi_t(&self) -> f64 {
        self.t
    }
}

pub fn dist(p: &HPoint, q: &HPoint) -> f64 {
    p.dist(q)
}

/// Ambient dimension `n` and plane dimension `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbientGroup {
    pub n: usize,
    pub k: usize,
}

impl AmbientGroup {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "must be >= 1"));
        }
        if k == 0 || k > n {
            return Err(Error::param("k", format!("must satisfy 1 ≤ k ≤ n (got k = {k}, n = {n})")));
        }
        Ok(Self { n, k })
    }
}

/// `k` orthonormal vectors of ℝ^{2n} spanning an isotropic subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropicFrame {
    vectors: Vec<Vec<f64>>,
}

impl IsotropicFrame {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let k = vectors.len();
        if k == 0 {
            return Err(Error::param("frame", "needs at least one vector"));
        }
        let dim = vectors[0].len();
        if dim == 0 || !dim.is_multiple_of(2) || k > dim / 2 {
            return Err(Error::param("frame", format!("{k} vectors cannot be isotropic in R^{dim}")));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            for (j, w) in vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(v, w) - target).abs() > ALGEBRAIC_TOL {
                    return Err(Error::param("frame", format!("vectors {i},{j} are not orthonormal")));
                }
                if omega(v, w).abs() > ALGEBRAIC_TOL {
                    return Err(Error::param("frame", format!("omega(v{i}, v{j}) != 0")));
                }
            }
        }
        Ok(Self { vectors })
    }

    /// Orthonormalizes `raw` against earlier vectors and their `J`-images,
    /// which lands on an isotropic frame for any generic input.
    pub fn from_raw(raw: &[Vec<f64>]) -> Result<Self> {
        let mut basis: Vec<Buf> = Vec::with_capacity(2 * raw.len());
        let mut out = Vec::with_capacity(raw.len());
        for r in raw {
            let mut v: Buf = r.iter().copied().collect();
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if !(norm > 1e-12) {
                return Err(Error::param("frame", "raw vectors are degenerate"));
            }
            v.iter_mut().for_each(|x| *x /= norm);
            let jv = apply_j(&v);
            out.push(v.to_vec());
            basis.push(v);
            basis.push(jv);
        }
        Self::new(out)
    }

    /// The line direction `(cos φ, sin φ)` in ℝ².
    pub fn planar(phi: f64) -> Self {
        Self { vectors: vec![vec![phi.cos(), phi.sin()]] }
    }

    /// `e₁, …, e_k` in ℝ^{2n}.
    pub fn standard(n: usize, k: usize) -> Result<Self> {
        AmbientGroup::new(n, k)?;
        let vectors = (0..k)
            .map(|i| {
                let mut v = vec![0.0; 2 * n];
                v[i] = 1.0;
                v
            })
            .collect();
        Ok(Self { vectors })
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn n(&self) -> usize {
        self.vectors[0].len() / 2
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Coordinates `Vᵀz`.
    pub fn coords(&self, z: &[f64]) -> Buf {
        self.vectors.iter().map(|v| dot(v, z)).collect()
    }

    /// `π_{V_I}(z)`.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        for v in &self.vectors {
            let c = dot(v, z);
            out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
        }
        out
    }

    /// `π_{V_I^⊥}(z)`.
    pub fn perp(&self, z: &[f64]) -> Vec<f64> {
        let p = self.project(z);
        z.iter().zip(p).map(|(a, b)| a - b).collect()
    }

    pub fn rotated(&self, r: &Rotation) -> IsotropicFrame {
        Self { vectors: self.vectors.iter().map(|v| r.apply_z(v)).collect() }
    }
}

/// `P_{V₀}` for the subgroup `V₀ = V_I × {0}`.
pub fn project_subgroup(p: &HPoint, frame: &IsotropicFrame) -> HPoint {
    HPoint { z: frame.project(&p.z), t: 0.0 }
}

/// `P_W(z, t) = (π_{V_I^⊥} z, t − ω(π_{V_I} z, π_{V_I^⊥} z))`, the
/// complementary projection with `P_{V₀}(p)·P_W(p) = p`.
pub fn project_complement(p: &HPoint, frame: &IsotropicFrame) -> HPoint {
    let par = frame.project(&p.z);
    let perp: Vec<f64> = p.z.iter().zip(&par).map(|(a, b)| a - b).collect();
    let t = p.t - omega(&par, &perp);
    HPoint { z: perp, t }
}

/// Distance from a point to a plane together with the Euclidean distance
/// of the projections.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneOffset {
    pub dist: f64,
    pub eucl: f64,
}

/// An affine horizontal plane `base · (V_I × {0})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizontalPlane {
    pub base: HPoint,
    pub frame: IsotropicFrame,
}

impl HorizontalPlane {
    pub fn new(base: HPoint, frame: IsotropicFrame) -> Result<Self> {
        if base.z.len() != 2 * frame.n() {
            return Err(Error::DimensionMismatch { expected: 2 * frame.n(), got: base.z.len() });
        }
        Ok(Self { base, frame })
    }

    pub fn subgroup(frame: IsotropicFrame) -> Self {
        let base = HPoint::identity(frame.n());
        Self { base, frame }
    }

    /// Horizontal line of ℍ¹ with direction angle `phi` through the point
    /// `(w·(−sin φ, cos φ), tau)`.
    pub fn h1_line(phi: f64, w: f64, tau: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { base: HPoint::h1(-w * s, w * c, tau), frame: IsotropicFrame::planar(phi) }
    }

    pub fn k(&self) -> usize {
        self.frame.k()
    }

    /// `base · (Σ sᵢvᵢ, 0)`.
    pub fn point_at(&self, s: &[f64]) -> HPoint {
        assert_eq!(s.len(), self.frame.k(), "dimension mismatch");
        let mut z = vec![0.0; self.base.z.len()];
        for (si, v) in s.iter().zip(self.frame.vectors()) {
            z.iter_mut().zip(v).for_each(|(o, x)| *o += si * x);
        }
        self.base.mul(&HPoint { z, t: 0.0 })
    }

    /// Same plane, based at the point with parameter `s`.
    pub fn rebase(&self, s: &[f64]) -> HorizontalPlane {
        Self { base: self.point_at(s), frame: self.frame.clone() }
    }

    /// `P_V(y) = base · P_{V₀}(base⁻¹·y)`.
    pub fn project(&self, y: &HPoint) -> HPoint {
        let local = self.base.inverse().mul(y);
        self.base.mul(&project_subgroup(&local, &self.frame))
    }

    pub fn dist(&self, y: &HPoint) -> f64 {
        self.offset(&y.z, y.t).dist
    }

    /// Parameter of the nearest point of the plane to `y`.
    pub fn foot(&self, y: &HPoint) -> Vec<f64> {
        self.solve(&y.z, y.t).2.to_vec()
    }

    pub fn offset(&self, z: &[f64], t: f64) -> PlaneOffset {
        let (dist, eucl, _) = self.solve(z, t);
        PlaneOffset { dist, eucl }
    }

    /// Minimizes `f(s) = (|w − Vs|²)² + 16(τ − c·s)²` over `s`, where
    /// `(w, τ) = base⁻¹·y` and `cᵢ = ω(vᵢ, w)`. `f` is strictly convex, only
    /// the component of `s − Vᵀw` along `c` matters, and the stationarity
    /// condition is a depressed cubic with a single real root.
    fn solve(&self, z: &[f64], t: f64) -> (f64, f64, Buf) {
        let bz = &self.base.z;
        assert_eq!(z.len(), bz.len(), "dimension mismatch");
        let w: Buf = z.iter().zip(bz).map(|(a, b)| a - b).collect();
        let tau = t - self.base.t - omega(bz, z);
        let a = self.frame.coords(&w);
        let c: Buf = self.frame.vectors().iter().map(|v| omega(v, &w)).collect();
        let mut perp = w.clone();
        for (ai, v) in a.iter().zip(self.frame.vectors()) {
            perp.iter_mut().zip(v).for_each(|(o, x)| *o -= ai * x);
        }
        let e = dot(&perp, &perp);
        let cn = dot(&c, &c).sqrt();
        let tau2 = tau - dot(&c, &a);
        let mut foot = a;
        let f = if cn < 1e-300 {
            e * e + 16.0 * tau2 * tau2
        } else {
            let alpha = depressed_cubic_root(e + 8.0 * cn * cn, -8.0 * cn * tau2);
            foot.iter_mut().zip(&c).for_each(|(s, ci)| *s += alpha * ci / cn);
            let r = alpha * alpha + e;
            let h = tau2 - cn * alpha;
            r * r + 16.0 * h * h
        };
        (f.sqrt().sqrt(), e.sqrt(), foot)
    }
}

/// Real root of `x³ + px + q` for `p > 0`, stable Cardano plus Newton polish.
pub(crate) fn depressed_cubic_root(p: f64, q: f64) -> f64 {
    let disc = (0.5 * q).powi(2) + (p / 3.0).powi(3);
    let a = (0.5 * q.abs() + disc.sqrt()).cbrt();
    let mut x = if a > 0.0 { -q.signum() * (a - p / (3.0 * a)) } else { 0.0 };
    for _ in 0..3 {
        let g = x * x * x + p * x + q;
        let dg = 3.0 * x * x + p;
        let step = g / dg;
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1e-300) {
            break;
        }
    }
    x
}

/// `inf_s d(y, base·(Σ sᵢvᵢ, 0))`, exact up to rounding.
pub fn dist_to_plane(y: &HPoint, plane: &HorizontalPlane, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    Ok(plane.dist(y))
}

/// An orthogonal map of ℝ^{2n} preserving ω, acting as `(z, t) ↦ (Az, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    n: usize,
    /// Row-major `2n × 2n`.
    a: Vec<f64>,
}

impl Rotation {
    pub fn from_matrix(n: usize, a: Vec<f64>) -> Result<Self> {
        let d = 2 * n;
        if n == 0 || a.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: a.len() });
        }
        let m = DMatrix::from_row_slice(d, d, &a);
        let ortho = m.transpose() * &m - DMatrix::<f64>::identity(d, d);
        if ortho.amax() > ALGEBRAIC_TOL {
            return Err(Error::param("rotation", "matrix is not orthogonal"));
        }
        let mut j = DMatrix::<f64>::zeros(d, d);
        for i in 0..n {
            j[(i, n + i)] = 1.0;
            j[(n + i, i)] = -1.0;
        }
        if (m.transpose() * &j * &m - &j).amax() > ALGEBRAIC_TOL {
            return Err(Error::param("rotation", "matrix does not preserve omega"));
        }
        Ok(Self { n, a })
    }

    pub fn identity(n: usize) -> Self {
        let d = 2 * n;
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            a[i * d + i] = 1.0;
        }
        Self { n, a }
    }

    /// Rotation of ℍ¹ by angle `psi`.
    pub fn planar(psi: f64) -> Self {
        let (s, c) = psi.sin_cos();
        Self { n: 1, a: vec![c, -s, s, c] }
    }

    /// A random element built from coordinate phases and a block-diagonal
    /// real orthogonal factor, which together generate U(n).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let d = 2 * n;
        let mut m = DMatrix::<f64>::identity(d, d);
        for _ in 0..2 {
            let mut phase = DMatrix::<f64>::zeros(d, d);
            for i in 0..n {
                let psi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let (s, c) = psi.sin_cos();
                phase[(i, i)] = c;
                phase[(i, n + i)] = -s;
                phase[(n + i, i)] = s;
                phase[(n + i, n + i)] = c;
            }
            let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
            let q = g.qr().q();
            let mut block = DMatrix::<f64>::zeros(d, d);
            for r in 0..n {
                for c in 0..n {
                    block[(r, c)] = q[(r, c)];
                    block[(n + r, n + c)] = q[(r, c)];
                }
            }
            m = phase * block * m;
        }
        let mut a = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                a.push(m[(r, c)]);
            }
        }
        Self { n, a }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn apply_z(&self, z: &[f64]) -> Vec<f64> {
        let d = 2 * self.n;
        assert_eq!(z.len(), d, "dimension mismatch");
        (0..d).map(|r| dot(&self.a[r * d..(r + 1) * d], z)).collect()
    }

    pub fn rotate(&self, p: &HPoint) -> HPoint {
        HPoint { z: self.apply_z(&p.z), t: p.t }
    }

    pub fn rotate_plane(&self, v: &HorizontalPlane) -> HorizontalPlane {
        HorizontalPlane { base: self.rotate(&v.base), frame: v.frame.rotated(self) }
    }
}

/// `∠(V₁, V₂) = 1/σ_min(V₂ᵀV₁)`.
pub fn angle(v1: &HorizontalPlane, v2: &HorizontalPlane) -> Result<f64> {
    frame_angle(&v1.frame, &v2.frame)
}

pub fn frame_angle(f1: &IsotropicFrame, f2: &IsotropicFrame) -> Result<f64> {
    let k = f1.k();
    if f2.k() != k {
        return Err(Error::DimensionMismatch { expected: k, got: f2.k() });
    }
    if f1.n() != f2.n() {
        return Err(Error::DimensionMismatch { expected: 2 * f1.n(), got: 2 * f2.n() });
    }
    let sigma_min = if k == 1 {
        dot(&f1.vectors()[0], &f2.vectors()[0]).abs()
    } else {
        let m = DMatrix::from_fn(k, k, |r, c| dot(&f2.vectors()[r], &f1.vectors()[c]));
        m.singular_values().min()
    };
    if sigma_min <= SIGMA_FLOOR {
        return Err(Error::InfiniteAngle { sigma_min });
    }
    Ok((1.0 / sigma_min).max(1.0))
}

/// Largest ratio `‖P_W(Φ(v')⁻¹Φ(v))‖ / ‖P_V(Φ(v')⁻¹Φ(v))‖` over sample pairs
/// `(v, Φ(v))`. Only the frame of `plane` matters.
pub fn intrinsic_lip_constant(samples: &[(HPoint, HPoint)], plane: &HorizontalPlane) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::param("samples", "need at least two graph pairs"));
    }
    let frame = &plane.frame;
    let scale = samples.iter().map(|(_, p)| p.norm()).fold(1.0, f64::max);
    let mut worst: f64 = 0.0;
    for i in 0..samples.len() {
        for j in 0..i {
            let delta = samples[j].1.inverse().mul(&samples[i].1);
            let pv = dot(&frame.coords(&delta.z), &frame.coords(&delta.z)).sqrt();
            let pw = project_complement(&delta, frame).norm();
            if pv <= 1e-14 * scale {
                if pw > ALGEBRAIC_TOL * scale {
                    return Err(Error::DegenerateRatio { i, j });
                }
                continue;
            }
            worst = worst.max(pw / pv);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_example() {
        let p = HPoint::h1(1.0, 0.0, 0.0).mul(&HPoint::h1(0.0, 1.0, 0.0));
        assert_eq!(p, HPoint::h1(1.0, 1.0, 0.5));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(HPoint::identity(3).norm(), 0.0);
        assert_eq!(HPoint::new(vec![0.0; 4], 1.0).unwrap().norm(), 2.0);
        assert!((HPoint::h1(3.0, 4.0, 0.0).norm() - 5.0).abs() < 1e-15);
        assert!((HPoint::h1(0.0, 0.0, 1.0).dilate(2.0).norm() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn ambient_rejects_k_above_n() {
        let err = AmbientGroup::new(1, 2).unwrap_err();
        assert!(err.to_string().contains("1 ≤ k ≤ n"));
    }

    #[test]
    fn projection_example() {
        let x_axis = IsotropicFrame::planar(0.0);
        let p = project_subgroup(&HPoint::h1(3.0, 4.0, 5.0), &x_axis);
        assert_eq!(p, HPoint::h1(3.0, 0.0, 0.0));
    }

    #[test]
    fn distance_to_x_axis() {
        let v = HorizontalPlane::subgroup(IsotropicFrame::planar(0.0));
        assert!((v.dist(&HPoint::h1(0.0, 0.0, 1.0)) - 2.0).abs() < 1e-14);
        assert!((v.dist(&HPoint::h1(0.0, 1.0, 0.0)) - 1.0).abs() < 1e-14);
        assert!(v.dist(&HPoint::h1(7.0, 0.0, 0.0)) < 1e-15);
    }

    #[test]
    fn cubic_root_is_root() {
        for &(p, q) in &[(1.0, 0.0), (1e-8, 3.0), (5.0, -2.0), (1e6, 1e-6), (0.3, 1e9)] {
            let x = depressed_cubic_root(p, q);
            let g = x * x * x + p * x + q;
            assert!(g.abs() <= 1e-9 * (q.abs() + p * x.abs()).max(1.0), "p={p} q={q} g={g}");
        }
    }

    #[test]
    fn from_raw_gives_isotropic_frames() {
        let raw = vec![vec![1.0, 0.3, 0.2, -0.5], vec![0.1, 1.0, 0.7, 0.4]];
        let f = IsotropicFrame::from_raw(&raw).unwrap();
        assert_eq!(f.k(), 2);
        assert!(omega(&f.vectors()[0], &f.vectors()[1]).abs() < 1e-14);
    }

    #[test]
    fn angle_of_lines() {
        let a = HorizontalPlane::subgroup(IsotropicFrame::planar(0.0));
        let b = HorizontalPlane::subgroup(IsotropicFrame::planar(0.1));
        let c = HorizontalPlane::subgroup(IsotropicFrame::planar(std::f64::consts::FRAC_PI_2));
        assert_eq!(angle(&a, &a).unwrap(), 1.0);
        assert!((angle(&a, &b).unwrap() - 1.0 / 0.1f64.cos()).abs() < 1e-14);
        assert!(matches!(angle(&a, &c), Err(Error::InfiniteAngle { .. })));
    }

    #[test]
    fn rotation_validation() {
        assert!(Rotation::from_matrix(1, Rotation::planar(0.4).matrix().to_vec()).is_ok());
        // a reflection is orthogonal but reverses omega
        assert!(Rotation::from_matrix(1, vec![1.0, 0.0, 0.0, -1.0]).is_err());
    }
}
