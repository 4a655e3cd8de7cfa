use crate::cloud::{diameter, enlarge, CubeId, CubeTree, PointCloud, StripIndex};
use crate::hgroup::{HPoint, HorizontalPlane, Rotation};

/// The sample set a coefficient is evaluated on, with the length scale and
/// mass used for normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    /// Ascending point indices.
    pub members: Vec<usize>,
    pub scale: f64,
    pub mass: f64,
}

impl Region {
    /// `λQ`, normalized by `diam(λQ)` and `μ(λQ)`.
    pub fn cube(tree: &CubeTree, cloud: &PointCloud, id: CubeId, lambda: f64) -> Self {
        let members = enlarge(tree, cloud, id, lambda);
        let scale = diameter(cloud.points(), &members).value;
        let mass = cloud.mass_of(&members);
        Self { members, scale, mass }
    }

    /// `B(center, r)`, normalized by `r` and `rᵏ`.
    pub fn ball(cloud: &PointCloud, index: &StripIndex, center: &HPoint, r: f64, k: usize) -> Self {
        let members = cloud.ball(index, center, r);
        Self { members, scale: r, mass: r.powi(k as i32) }
    }

    /// The whole cloud, as the enlarged top cube would see it.
    pub fn whole(cloud: &PointCloud) -> Self {
        let members: Vec<usize> = (0..cloud.len()).collect();
        Self { scale: cloud.diameter().value, mass: cloud.total_mass(), members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Region points mapped by `y ↦ δ_{1/s}(R(a⁻¹y))`. The anchor `a` is the
/// member whose `z` is closest to the weighted mean `z`; for `n = 1`, `R`
/// turns the principal axis onto the first coordinate with positive third
/// moment, so congruent regions normalize to the same points.
pub(crate) struct Normalized {
    pub pts: Vec<HPoint>,
    pub wts: Vec<f64>,
    pub mass: f64,
    anchor: HPoint,
    scale: f64,
    /// Maps normalized coordinates back (inverse of `R`).
    unrotate: Option<Rotation>,
}

impl Normalized {
    /// `None` when the region is too small or too concentrated to carry any
    /// flatness information.
    pub fn new(cloud: &PointCloud, region: &Region) -> Option<Self> {
        if region.len() < 2 || !(region.scale > 0.0) || !(region.mass > 0.0) {
            return None;
        }
        let pts = cloud.points();
        let wts: Vec<f64> = region.members.iter().map(|&i| cloud.weights()[i]).collect();
        let d = 2 * cloud.n();
        let total: f64 = wts.iter().sum();
        let mut mean = vec![0.0; d];
        for (&i, w) in region.members.iter().zip(&wts) {
            mean.iter_mut().zip(&pts[i].z).for_each(|(m, x)| *m += w * x);
        }
        mean.iter_mut().for_each(|m| *m /= total);
        let gap = |i: usize| pts[i].z.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        let anchor_idx = region.members.iter().copied().min_by(|&a, &b| gap(a).total_cmp(&gap(b))).unwrap();
        let anchor = pts[anchor_idx].clone();
        let inv = anchor.inverse();
        let s = region.scale;
        let mut local: Vec<HPoint> = region.members.iter().map(|&i| inv.mul(&pts[i]).dilate(1.0 / s)).collect();
        let mut unrotate = None;
        if cloud.n() == 1 {
            let psi = canonical_angle(&local, &wts);
            let r = Rotation::planar(-psi);
            local.iter_mut().for_each(|p| *p = r.rotate(p));
            unrotate = Some(Rotation::planar(psi));
        }
        Some(Self { pts: local, wts, mass: region.mass, anchor, scale: s, unrotate })
    }

    /// Maps a plane fitted in normalized coordinates back to the cloud.
    pub fn restore(&self, plane: &HorizontalPlane) -> HorizontalPlane {
        let mut v = plane.clone();
        if let Some(r) = &self.unrotate {
            v = r.rotate_plane(&v);
        }
        v.base = self.anchor.mul(&v.base.dilate(self.scale));
        v
    }
}

/// Principal axis angle of the weighted `z` cloud, flipped by `π` so the
/// third moment along it is nonnegative.
fn canonical_angle(pts: &[HPoint], wts: &[f64]) -> f64 {
    let total: f64 = wts.iter().sum();
    let (mut mx, mut my) = (0.0, 0.0);
    for (p, w) in pts.iter().zip(wts) {
        mx += w * p.z[0];
        my += w * p.z[1];
    }
    mx /= total;
    my /= total;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (p, w) in pts.iter().zip(wts) {
        let (dx, dy) = (p.z[0] - mx, p.z[1] - my);
        sxx += w * dx * dx;
        syy += w * dy * dy;
        sxy += w * dx * dy;
    }
    let psi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (s, c) = psi.sin_cos();
    let third: f64 = pts.iter().zip(wts).map(|(p, w)| w * (c * p.z[0] + s * p.z[1]).powi(3)).sum();
    if third < 0.0 {
        psi + std::f64::consts::PI
    } else {
        psi
    }
}
