//! Weighted point clouds standing in for `ℋᵏ|_E`, regularity diagnostics,
//! dyadic cube systems and dyadic nets.

mod cubes;
mod index;
mod net;

pub use cubes::{christ_cubes, christ_cubes_with, enlarge, BoundaryReport, CubeCheck, CubeId, CubeTree, DyadicCube};
pub use index::StripIndex;
pub use net::{dyadic_net, multires_family, Ball, DyadicNet, NetCheck};

use crate::curve::HorizontalPolyline;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hgroup::{HPoint, Rotation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;

/// Regions up to this size get an exact O(m²) diameter.
pub const EXACT_DIAMETER_CAP: usize = 4000;

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<HPoint>,
    weights: Vec<f64>,
    resolution: f64,
}

impl PointCloud {
    pub fn new(points: Vec<HPoint>, weights: Vec<f64>, resolution: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("cloud", "must contain at least one point"));
        }
        if points.len() != weights.len() {
            return Err(Error::param("cloud.weights", "length differs from points"));
        }
        let dim = points[0].z.len();
        if let Some(p) = points.iter().find(|p| p.z.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: p.z.len() });
        }
        if points.iter().any(|p| !p.t.is_finite() || p.z.iter().any(|v| !v.is_finite())) {
            return Err(Error::param("cloud.points", "coordinates must be finite"));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::param("cloud.weights", "must be positive and finite"));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::param("cloud.resolution", "must be positive"));
        }
        Ok(Self { points, weights, resolution })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n(&self) -> usize {
        self.points[0].n()
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mass_of(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.weights[i]).sum()
    }

    /// Left translation by `g`.
    pub fn translated(&self, g: &HPoint) -> Self {
        Self { points: self.points.iter().map(|p| g.mul(p)).collect(), ..self.clone() }
    }

    pub fn rotated(&self, r: &Rotation) -> Self {
        Self { points: self.points.iter().map(|p| r.rotate(p)).collect(), ..self.clone() }
    }

    /// Dilation by `r`; weights scale as `rᵏ` so the cloud keeps modelling
    /// `ℋᵏ` of the dilated set.
    pub fn dilated(&self, r: f64, k: usize) -> Self {
        Self {
            points: self.points.iter().map(|p| p.dilate(r)).collect(),
            weights: self.weights.iter().map(|w| w * r.powi(k as i32)).collect(),
            resolution: self.resolution * r,
        }
    }

    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        Self::new(idx.iter().map(|&i| self.points[i].clone()).collect(), idx.iter().map(|&i| self.weights[i]).collect(), self.resolution)
    }

    pub fn diameter(&self) -> Diameter {
        let all: Vec<usize> = (0..self.len()).collect();
        diameter(&self.points, &all)
    }

    /// Indices within distance `r` of `center` (closed ball), ascending.
    pub fn ball(&self, index: &StripIndex, center: &HPoint, r: f64) -> Vec<usize> {
        let mut out: Vec<usize> =
            index.candidates(center.z[0], r).iter().map(|&i| i as usize).filter(|&i| self.points[i].dist(center) <= r).collect();
        out.sort_unstable();
        out
    }

    /// One line `z1 … z2n t w` per point with 17 significant digits,
    /// preceded by a `# resolution` header.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# resolution {:.16e}", self.resolution);
        for (p, w) in self.points.iter().zip(&self.weights) {
            for v in &p.z {
                let _ = write!(s, "{v:.16e} ");
            }
            let _ = writeln!(s, "{:.16e} {:.16e}", p.t, w);
        }
        s
    }

    /// Parses [`PointCloud::to_text`] output. Without a resolution header
    /// the smallest positive nearest-neighbour distance is used.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut resolution = None;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("resolution") {
                    resolution = Some(parse_num(v.trim(), lineno)?);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let vals = line.split_whitespace().map(|v| parse_num(v, lineno)).collect::<Result<Vec<_>>>()?;
            if vals.len() < 4 || (vals.len() - 2) % 2 != 0 {
                return Err(Error::param(format!("line {}", lineno + 1), "expected `z1 ... z2n t w`"));
            }
            let m = vals.len();
            points.push(HPoint::new(vals[..m - 2].to_vec(), vals[m - 2])?);
            weights.push(vals[m - 1]);
        }
        let resolution = match resolution {
            Some(r) => r,
            None => min_spacing(&points).unwrap_or(1.0),
        };
        Self::new(points, weights, resolution)
    }
}

fn parse_num(s: &str, lineno: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::param(format!("line {}", lineno + 1), format!("not a number: `{s}`")))
}

fn min_spacing(points: &[HPoint]) -> Option<f64> {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..i {
            let d = points[i].dist(&points[j]);
            if d > 0.0 {
                best = best.min(d);
            }
        }
    }
    best.is_finite().then_some(best)
}

/// Diameter of a point set: exact up to [`EXACT_DIAMETER_CAP`] points,
/// otherwise a farthest-point sweep whose value is at least half the truth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diameter {
    pub value: f64,
    /// A guaranteed upper bound (equal to `value` when exact).
    pub upper: f64,
    pub exact: bool,
}

pub fn diameter(points: &[HPoint], idx: &[usize]) -> Diameter {
    let m = idx.len();
    if m <= 1 {
        return Diameter { value: 0.0, upper: 0.0, exact: true };
    }
    if m <= EXACT_DIAMETER_CAP {
        let mut best: f64 = 0.0;
        for a in 0..m {
            let p = &points[idx[a]];
            for &b in &idx[..a] {
                best = best.max(p.dist(&points[b]));
            }
        }
        return Diameter { value: best, upper: best, exact: true };
    }
    let far = |from: usize| -> (usize, f64) {
        let p = &points[from];
        idx.iter().map(|&i| (i, p.dist(&points[i]))).fold((from, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
    };
    let mut value: f64 = 0.0;
    let mut upper = f64::INFINITY;
    for s in 0..4 {
        let start = idx[s * (m - 1) / 3];
        let (a, ra) = far(start);
        upper = upper.min(2.0 * ra);
        let (_, rb) = far(a);
        value = value.max(rb).max(ra);
    }
    Diameter { value, upper: upper.max(value), exact: false }
}

/// Samples the polyline at spacing at most `step`, every sample carrying
/// the arclength of its half-neighbourhoods (so endpoints carry half).
pub fn cloud_from_polyline(gamma: &HorizontalPolyline, step: f64) -> Result<PointCloud> {
    let lens: Vec<f64> = gamma.planar().windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).collect();
    let shortest = lens.iter().copied().fold(f64::INFINITY, f64::min);
    if !(shortest > 0.0) {
        return Err(Error::param("polyline", "degenerate segment"));
    }
    if !(step > 0.0) || step > shortest * (1.0 + 1e-9) {
        return Err(Error::param("step", format!("must lie in (0, {shortest}]")));
    }
    let mut points = vec![gamma.vertices()[0].clone()];
    let mut weights = vec![0.0];
    let mut finest: f64 = 0.0;
    for (i, &len) in lens.iter().enumerate() {
        let pieces = ((len / step) - 1e-9).ceil().max(1.0) as usize;
        let h = len / pieces as f64;
        finest = finest.max(h);
        for j in 1..=pieces {
            *weights.last_mut().unwrap() += 0.5 * h;
            let p = if j == pieces { gamma.vertices()[i + 1].clone() } else { gamma.point_on_segment(i, j as f64 / pieces as f64) };
            points.push(p);
            weights.push(0.5 * h);
        }
    }
    PointCloud::new(points, weights, finest)
}

/// Interval midpoints of the `levels`-th stage of the middle-half Cantor
/// set on the t-axis of ℍ¹, total mass 1.
pub fn cantor_vertical(levels: usize) -> Result<PointCloud> {
    if levels == 0 {
        return Err(Error::param("levels", "must be >= 1"));
    }
    let mut starts = vec![0.0f64];
    let mut len = 1.0f64;
    for _ in 0..levels {
        len *= 0.25;
        starts = starts.iter().flat_map(|&a| [a, a + 3.0 * len]).collect();
    }
    let points = starts.iter().map(|a| HPoint::h1(0.0, 0.0, a + 0.5 * len)).collect();
    let w = 0.5f64.powi(levels as i32);
    PointCloud::new(points, vec![w; 1 << levels], 2.0 * len.sqrt())
}

/// `μ(B(x, r))/rᵏ` over sampled `(x, r)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityProfile {
    pub k: usize,
    pub samples: Vec<RegularitySample>,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    /// `max(max ratio, 1/min ratio)`.
    pub c_e: f64,
    /// Least-squares slope of `log μ(B(x,r))` against `log r`.
    pub fitted_dimension: f64,
    /// Set when the fitted dimension is off by more than
    /// [`DIMENSION_SLACK`] or a sampled ball was empty.
    pub failure: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegularitySample {
    pub center: usize,
    pub radius: f64,
    pub ratio: f64,
}

pub const DIMENSION_SLACK: f64 = 0.25;

/// Samples centers uniformly from the cloud and radii log-uniformly in
/// `[10·resolution, diam]`.
pub fn regularity_profile(cloud: &PointCloud, k: usize, trials: usize, seed: u64) -> Result<RegularityProfile> {
    let diam = cloud.diameter().value;
    let r_min = 10.0 * cloud.resolution();
    if !(r_min < diam) {
        return Err(Error::param("cloud", "resolution too coarse for any legal radius"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let queries: Vec<(usize, f64)> = (0..trials)
        .map(|_| {
            let x = rng.random_range(0..cloud.len());
            let r = (r_min.ln() + rng.random::<f64>() * (diam / r_min).ln()).exp();
            (x, r)
        })
        .collect();
    regularity_at(cloud, k, &queries, Exec::default())
}

/// Ratios at explicit `(center index, radius)` pairs.
pub fn regularity_at(cloud: &PointCloud, k: usize, queries: &[(usize, f64)], exec: Exec) -> Result<RegularityProfile> {
    if queries.is_empty() {
        return Err(Error::param("trials", "must be >= 1"));
    }
    let index = StripIndex::new(cloud.points());
    let samples: Vec<RegularitySample> = exec.map(queries, |&(x, r)| {
        let mass = cloud.mass_of(&cloud.ball(&index, &cloud.points()[x], r));
        RegularitySample { center: x, radius: r, ratio: mass / r.powi(k as i32) }
    });
    let mut ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let (min, max) = (ratios[0], ratios[ratios.len() - 1]);
    let median = ratios[ratios.len() / 2];
    let xs: Vec<f64> = samples.iter().map(|s| s.radius.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| (s.ratio * s.radius.powi(k as i32)).ln()).collect();
    let fitted_dimension = slope(&xs, &ys);
    let failure = min <= 0.0 || !fitted_dimension.is_finite() || (fitted_dimension - k as f64).abs() > DIMENSION_SLACK;
    Ok(RegularityProfile { k, samples, min, max, median, c_e: max.max(1.0 / min), fitted_dimension, failure })
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
