//! Flatness coefficients of point clouds on cubes and balls.
//!
//! Every coefficient is an infimum over planes. All of them are evaluated
//! against one shared pool of candidate planes per region, so inequalities
//! that hold plane by plane also hold between the reported values. Values
//! are upper bounds on the true infima.

pub mod fit;
mod general;
mod iota;
mod optim;
mod planar;
mod region;

/// Flat configurations evaluate to at most this: height rounding of order
/// `1e-16` becomes a distance of order `1e-8`.
pub const OPTIMIZER_TOL: f64 = 1e-6;

pub use fit::{convex_hull, l1_cost, l1_line, oracle_fit, principal_line, slab_line, Line2};
pub use region::Region;

use crate::cloud::{CubeTree, PointCloud};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hgroup::{AmbientGroup, HorizontalPlane};
use region::Normalized;
use serde::{Deserialize, Serialize};
use std::fmt::{self, Write as _};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    BetaHorizontal,
    BetaStratified,
    BetaProjHorizontal,
    BetaProjAffine,
    Iota,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::BetaHorizontal, Family::BetaStratified, Family::BetaProjHorizontal, Family::BetaProjAffine, Family::Iota];

    pub fn name(self) -> &'static str {
        match self {
            Family::BetaHorizontal => "beta_horizontal",
            Family::BetaStratified => "beta_stratified",
            Family::BetaProjHorizontal => "beta_proj_horizontal",
            Family::BetaProjAffine => "beta_proj_affine",
            Family::Iota => "iota",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| Error::param("family", format!("unknown coefficient family `{s}`")))
    }
}

/// The exponent `p ∈ {1, ∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Exponent {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "inf")]
    Inf,
}

impl Exponent {
    fn slot(self) -> usize {
        match self {
            Exponent::One => 0,
            Exponent::Inf => 1,
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Exponent::One),
            "inf" | "∞" => Ok(Exponent::Inf),
            _ => Err(Error::param("p", format!("expected `1` or `inf`, got `{s}`"))),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exponent::One => "1",
            Exponent::Inf => "inf",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoeffKind {
    pub family: Family,
    pub p: Exponent,
}

impl CoeffKind {
    pub fn new(family: Family, p: Exponent) -> Self {
        Self { family, p }
    }

    /// All ten family/exponent combinations.
    pub fn all() -> Vec<CoeffKind> {
        Family::ALL.into_iter().flat_map(|f| [Exponent::One, Exponent::Inf].map(|p| CoeffKind::new(f, p))).collect()
    }
}

impl fmt::Display for CoeffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.family.name(), self.p)
    }
}

/// Search effort.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// Plane dimension `k`.
    pub k: usize,
    /// Local searches run on a stride subsample of at most this many points.
    pub max_opt_points: usize,
    /// Exact L¹ line fitting over all pivots up to this many points.
    pub exact_l1_cap: usize,
    /// Evenly spaced direction seeds (random frames when `n > 1`).
    pub angle_seeds: usize,
    pub tau_steps: usize,
    /// Local searches per objective, started from the best seeds.
    pub restarts: usize,
    pub max_iters: u64,
    /// ι is quadratic in the region size and refuses larger regions.
    pub iota_cap: usize,
    pub iota_angles: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            k: 1,
            max_opt_points: 2048,
            exact_l1_cap: 512,
            angle_seeds: 12,
            tau_steps: 40,
            restarts: 2,
            max_iters: 300,
            iota_cap: 2000,
            iota_angles: 180,
        }
    }
}

pub(crate) const OBJECTIVES: usize = 6;

/// Indices into the per-plane value array.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Objective {
    Beta1 = 0,
    BetaInf = 1,
    Hat1 = 2,
    HatInf = 3,
    Pi1 = 4,
    PiInf = 5,
}

#[derive(Default)]
pub(crate) struct Pool {
    cands: Vec<Vec<f64>>,
    vals: Vec<[f64; OBJECTIVES]>,
    converged: bool,
}

impl Pool {
    fn push(&mut self, x: Vec<f64>) {
        if self.cands.is_empty() && self.vals.is_empty() {
            self.converged = true;
        }
        self.cands.push(x);
    }

    fn evaluate(&mut self, f: impl Fn(&[f64]) -> [f64; OBJECTIVES]) {
        self.vals = self.cands.iter().map(|x| f(x)).collect();
    }

    /// Smallest value of an objective, first candidate on ties.
    fn best(&self, obj: Objective) -> (f64, &[f64]) {
        let i = (0..self.vals.len())
            .min_by(|&a, &b| self.vals[a][obj as usize].total_cmp(&self.vals[b][obj as usize]).then(a.cmp(&b)))
            .expect("pool is never empty");
        (self.vals[i][obj as usize], &self.cands[i])
    }
}

/// All coefficient values of one region, indexed `[p = 1, p = ∞]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coefficients {
    pub beta: [f64; 2],
    pub beta_hat: [f64; 2],
    pub beta_pi_horizontal: [f64; 2],
    pub beta_pi_affine: [f64; 2],
    pub iota: Option<[f64; 2]>,
    /// Minimizing planes of `beta` and `beta_hat` in cloud coordinates.
    pub beta_planes: [Option<HorizontalPlane>; 2],
    pub beta_hat_planes: [Option<HorizontalPlane>; 2],
    /// False when some local search hit its iteration limit; the values
    /// are then the best found.
    pub converged: bool,
}

impl Coefficients {
    fn zero(iota: bool) -> Self {
        Self {
            beta: [0.0; 2],
            beta_hat: [0.0; 2],
            beta_pi_horizontal: [0.0; 2],
            beta_pi_affine: [0.0; 2],
            iota: iota.then_some([0.0; 2]),
            beta_planes: [None, None],
            beta_hat_planes: [None, None],
            converged: true,
        }
    }

    pub fn get(&self, kind: CoeffKind) -> Option<f64> {
        let s = kind.p.slot();
        Some(match kind.family {
            Family::BetaHorizontal => self.beta[s],
            Family::BetaStratified => self.beta_hat[s],
            Family::BetaProjHorizontal => self.beta_pi_horizontal[s],
            Family::BetaProjAffine => self.beta_pi_affine[s],
            Family::Iota => self.iota?[s],
        })
    }

    pub fn plane(&self, kind: CoeffKind) -> Option<&HorizontalPlane> {
        match kind.family {
            Family::BetaHorizontal => self.beta_planes[kind.p.slot()].as_ref(),
            Family::BetaStratified => self.beta_hat_planes[kind.p.slot()].as_ref(),
            _ => None,
        }
    }
}

/// A value together with the plane that achieves it, where one exists.
#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub value: f64,
    pub plane: Option<HorizontalPlane>,
    pub converged: bool,
}

/// Evaluates the requested coefficients on `region`; the other fields of
/// the result come from the same candidate pool and are valid too, except
/// `iota`, which is only computed on request.
pub fn evaluate(cloud: &PointCloud, region: &Region, kinds: &[CoeffKind], opts: &FitOptions) -> Result<Coefficients> {
    let n = cloud.n();
    let k = opts.k;
    AmbientGroup::new(n, k)?;
    let want_iota = kinds.iter().any(|c| c.family == Family::Iota);
    if want_iota && region.len() > opts.iota_cap {
        return Err(Error::RegionTooLarge { size: region.len(), cap: opts.iota_cap });
    }
    let Some(norm) = Normalized::new(cloud, region) else {
        return Ok(Coefficients::zero(want_iota));
    };
    let planar = n == 1 && k == 1;
    let mut request = Vec::new();
    for kind in kinds {
        let obj = match (kind.family, kind.p) {
            (Family::BetaHorizontal, Exponent::One) => Objective::Beta1,
            (Family::BetaHorizontal, Exponent::Inf) => Objective::BetaInf,
            (Family::BetaStratified, Exponent::One) => Objective::Hat1,
            (Family::BetaStratified, Exponent::Inf) => Objective::HatInf,
            // exact seeds cover the projected terms when n = k = 1
            (Family::BetaProjHorizontal | Family::BetaProjAffine, _) if planar => continue,
            (Family::BetaProjHorizontal | Family::BetaProjAffine, Exponent::One) => Objective::Pi1,
            (Family::BetaProjHorizontal | Family::BetaProjAffine, Exponent::Inf) => Objective::PiInf,
            (Family::Iota, _) => continue,
        };
        if !request.contains(&obj) {
            request.push(obj);
        }
    }

    let (pts, wts, mass) = (&norm.pts, &norm.wts, norm.mass);
    let iota_fit = want_iota.then(|| iota::fit(pts, wts, mass, k, opts));
    let mut extra = Vec::new();
    if let Some(fit) = &iota_fit {
        for slot in 0..2 {
            let p = &pts[fit.anchors[slot]];
            let frame = &fit.frames[slot];
            extra.push(if planar {
                let v = &frame.vectors()[0];
                planar::through_point(p, v[1].atan2(v[0])).to_vec()
            } else {
                general::through_point(p, frame)
            });
        }
    }
    let pool = if planar {
        planar::search(pts, wts, mass, &request, opts, &extra)
    } else {
        general::search(pts, wts, mass, k, &request, opts, &extra)
    };
    let to_plane = |x: &[f64]| {
        let v = if planar { Some(planar::plane(x)) } else { general::plane(x, n, k) };
        v.map(|v| norm.restore(&v))
    };
    let pick = |obj: Objective| pool.best(obj);
    let (b1, x_b1) = pick(Objective::Beta1);
    let (binf, x_binf) = pick(Objective::BetaInf);
    let (h1, x_h1) = pick(Objective::Hat1);
    let (hinf, x_hinf) = pick(Objective::HatInf);
    let pi_h = [pick(Objective::Pi1).0, pick(Objective::PiInf).0];
    let pi_a = if planar {
        pi_h
    } else {
        let a = general::affine_projection(pts, wts, mass, k);
        [a[0].min(pi_h[0]), a[1].min(pi_h[1])]
    };
    Ok(Coefficients {
        beta: [b1, binf],
        beta_hat: [h1, hinf],
        beta_pi_horizontal: pi_h,
        beta_pi_affine: pi_a,
        iota: iota_fit.as_ref().map(|f| f.value),
        beta_planes: [to_plane(x_b1), to_plane(x_binf)],
        beta_hat_planes: [to_plane(x_h1), to_plane(x_hinf)],
        converged: pool.converged && iota_fit.is_none_or(|f| f.converged),
    })
}

fn single(cloud: &PointCloud, region: &Region, kind: CoeffKind, opts: &FitOptions) -> Result<Fit> {
    let c = evaluate(cloud, region, &[kind], opts)?;
    Ok(Fit { value: c.get(kind).unwrap_or(0.0), plane: c.plane(kind).cloned(), converged: c.converged })
}

/// `β_{p,𝒱ₖ}`: p-mean of `d(y, V)/scale` minimized over horizontal planes.
pub fn beta_horizontal(cloud: &PointCloud, region: &Region, p: Exponent, opts: &FitOptions) -> Result<Fit> {
    single(cloud, region, CoeffKind::new(Family::BetaHorizontal, p), opts)
}

/// `β̂_{p,𝒱ₖ}`: `(βπ(V)² + β(V)⁴)^{1/4}` minimized jointly over `V`.
pub fn beta_stratified(cloud: &PointCloud, region: &Region, p: Exponent, opts: &FitOptions) -> Result<Fit> {
    single(cloud, region, CoeffKind::new(Family::BetaStratified, p), opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionFamily {
    Horizontal,
    Affine,
}

/// Euclidean flatness of `π(region)` against isotropic or arbitrary affine
/// `k`-planes of ℝ^{2n}.
pub fn beta_projection(cloud: &PointCloud, region: &Region, p: Exponent, family: ProjectionFamily, opts: &FitOptions) -> Result<Fit> {
    let f = match family {
        ProjectionFamily::Horizontal => Family::BetaProjHorizontal,
        ProjectionFamily::Affine => Family::BetaProjAffine,
    };
    single(cloud, region, CoeffKind::new(f, p), opts)
}

/// `ι_{p,𝒱ₖ}`: distortion of pair distances under the best projection onto
/// a horizontal subgroup.
pub fn iota(cloud: &PointCloud, region: &Region, p: Exponent, opts: &FitOptions) -> Result<Fit> {
    single(cloud, region, CoeffKind::new(Family::Iota, p), opts)
}

/// `inf` over a dense `(φ, w, τ)` grid of lines in `ℍ¹`, in the same
/// normalized coordinates the optimizer uses: `φ ∈ [0, π)`, `w, τ ∈ [−span, span]`.
pub fn dense_line_oracle(cloud: &PointCloud, region: &Region, kind: CoeffKind, grid: [usize; 3], span: f64) -> Result<f64> {
    if cloud.n() != 1 {
        return Err(Error::param("cloud", "the line oracle works in the first Heisenberg group"));
    }
    let obj = match (kind.family, kind.p) {
        (Family::BetaHorizontal, Exponent::One) => Objective::Beta1,
        (Family::BetaHorizontal, Exponent::Inf) => Objective::BetaInf,
        (Family::BetaStratified, Exponent::One) => Objective::Hat1,
        (Family::BetaStratified, Exponent::Inf) => Objective::HatInf,
        _ => return Err(Error::param("kind", "the line oracle covers the metric families only")),
    };
    let Some(norm) = Normalized::new(cloud, region) else { return Ok(0.0) };
    let lin = |i: usize, m: usize| if m <= 1 { 0.0 } else { -span + 2.0 * span * i as f64 / (m - 1) as f64 };
    let mut best = f64::INFINITY;
    for a in 0..grid[0] {
        let phi = std::f64::consts::PI * a as f64 / grid[0] as f64;
        for b in 0..grid[1] {
            for c in 0..grid[2] {
                let x = [phi, lin(b, grid[1]), lin(c, grid[2])];
                best = best.min(planar::values(&norm.pts, &norm.wts, norm.mass, &x)[obj as usize]);
            }
        }
    }
    Ok(best)
}

/// Values of one coefficient on every cube of a tree, indexed by cube id.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoeffField {
    pub kind: CoeffKind,
    pub lambda: f64,
    pub values: Vec<f64>,
    #[serde(skip)]
    pub planes: Vec<Option<HorizontalPlane>>,
    pub converged: Vec<bool>,
}

impl CoeffField {
    /// A field with the same value on every cube.
    pub fn constant(kind: CoeffKind, lambda: f64, cubes: usize, value: f64) -> Self {
        Self { kind, lambda, values: vec![value; cubes], planes: vec![None; cubes], converged: vec![true; cubes] }
    }

    pub fn get(&self, id: usize) -> Option<f64> {
        self.values.get(id).copied()
    }
}

/// Evaluates `kinds` on `λQ` for every cube; one field per kind.
pub fn compute_field(
    tree: &CubeTree,
    cloud: &PointCloud,
    kinds: &[CoeffKind],
    lambda: f64,
    opts: &FitOptions,
    exec: Exec,
) -> Result<Vec<CoeffField>> {
    compute_field_on(tree, cloud, kinds, lambda, opts, exec, |_| true)
}

/// As [`compute_field`], restricted to cubes accepted by `keep`; the others
/// get value 0 and no plane.
pub fn compute_field_on(
    tree: &CubeTree,
    cloud: &PointCloud,
    kinds: &[CoeffKind],
    lambda: f64,
    opts: &FitOptions,
    exec: Exec,
    keep: impl Fn(usize) -> bool + Sync + Send,
) -> Result<Vec<CoeffField>> {
    if !(lambda >= 1.0) {
        return Err(Error::param("cubes.lambda", format!("must be at least 1, got {lambda}")));
    }
    let per_cube = exec.map_range(tree.len(), |id| {
        if !keep(id) {
            return Ok(None);
        }
        evaluate(cloud, &Region::cube(tree, cloud, id, lambda), kinds, opts).map(Some)
    });
    let per_cube: Vec<Option<Coefficients>> = per_cube.into_iter().collect::<Result<_>>()?;
    Ok(kinds
        .iter()
        .map(|&kind| CoeffField {
            kind,
            lambda,
            values: per_cube.iter().map(|c| c.as_ref().and_then(|c| c.get(kind)).unwrap_or(0.0)).collect(),
            planes: per_cube.iter().map(|c| c.as_ref().and_then(|c| c.plane(kind).cloned())).collect(),
            converged: per_cube.iter().map(|c| c.as_ref().is_none_or(|c| c.converged)).collect(),
        })
        .collect())
}

/// `cube_id,generation,coeff,value,` followed by the plane's base point and
/// frame vectors (empty for families without a plane).
pub fn fields_to_csv(tree: &CubeTree, fields: &[CoeffField], n: usize, k: usize) -> String {
    let mut s = String::from("cube_id,generation,coeff,value");
    for i in 0..2 * n {
        let _ = write!(s, ",base_z{}", i + 1);
    }
    s.push_str(",base_t");
    for a in 0..k {
        for i in 0..2 * n {
            let _ = write!(s, ",v{}_{}", a + 1, i + 1);
        }
    }
    s.push('\n');
    let width = 2 * n + 1 + 2 * n * k;
    for field in fields {
        for cube in &tree.cubes {
            let _ = write!(s, "{},{},{},{:.12e}", cube.id, cube.generation, field.kind, field.values[cube.id]);
            match &field.planes[cube.id] {
                Some(v) => {
                    for x in v.base.z.iter().chain([&v.base.t]).chain(v.frame.vectors().iter().flatten()) {
                        let _ = write!(s, ",{x:.12e}");
                    }
                }
                None => s.push_str(&",".repeat(width)),
            }
            s.push('\n');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgroup::HPoint;

    fn line_cloud() -> PointCloud {
        let v = HorizontalPlane::h1_line(0.4, 0.2, -0.1);
        let pts: Vec<HPoint> = (0..40).map(|i| v.point_at(&[i as f64 * 0.05 - 1.0])).collect();
        PointCloud::new(pts, vec![0.05; 40], 0.05).unwrap()
    }

    #[test]
    fn horizontal_line_is_flat() {
        let cloud = line_cloud();
        let c = evaluate(&cloud, &Region::whole(&cloud), &CoeffKind::all(), &FitOptions::default()).unwrap();
        for kind in CoeffKind::all() {
            assert!(c.get(kind).unwrap() < OPTIMIZER_TOL, "{kind}: {:?}", c.get(kind));
        }
    }

    #[test]
    fn singleton_is_zero() {
        let cloud = PointCloud::new(vec![HPoint::h1(1.0, 2.0, 3.0)], vec![1.0], 0.1).unwrap();
        let f = beta_horizontal(&cloud, &Region::whole(&cloud), Exponent::Inf, &FitOptions::default()).unwrap();
        assert_eq!(f.value, 0.0);
        assert!(f.plane.is_none());
    }

    #[test]
    fn iota_region_cap() {
        let cloud = line_cloud();
        let opts = FitOptions { iota_cap: 10, ..FitOptions::default() };
        let err = iota(&cloud, &Region::whole(&cloud), Exponent::One, &opts).unwrap_err();
        assert!(matches!(err, Error::RegionTooLarge { size: 40, cap: 10 }));
    }

    #[test]
    fn restored_plane_fits_original_cloud() {
        let cloud = line_cloud();
        let f = beta_horizontal(&cloud, &Region::whole(&cloud), Exponent::Inf, &FitOptions::default()).unwrap();
        let v = f.plane.unwrap();
        assert!(cloud.points().iter().all(|p| v.dist(p) < OPTIMIZER_TOL));
    }

    #[test]
    fn flat_plane_in_h2() {
        let v = HorizontalPlane::subgroup(crate::hgroup::IsotropicFrame::standard(2, 2).unwrap());
        let mut pts = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                pts.push(v.point_at(&[i as f64 * 0.2, j as f64 * 0.2]));
            }
        }
        let cloud = PointCloud::new(pts, vec![0.04; 36], 0.2).unwrap();
        let opts = FitOptions { k: 2, ..FitOptions::default() };
        let c = evaluate(&cloud, &Region::whole(&cloud), &CoeffKind::all(), &opts).unwrap();
        for kind in CoeffKind::all() {
            assert!(c.get(kind).unwrap() < OPTIMIZER_TOL, "{kind}: {:?}", c.get(kind));
        }
    }
}
