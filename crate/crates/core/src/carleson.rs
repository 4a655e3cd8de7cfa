//! Packing sums of coefficient fields: geometric-lemma sums, weak
//! geometric lemma counts, multiresolution sums over dyadic nets, and the
//! divergence/convergence experiment on the Juillet curve.

use crate::cloud::{christ_cubes_with, cloud_from_polyline, dyadic_net, CubeId, CubeTree, DyadicNet, PointCloud, StripIndex};
use crate::coeff::{compute_field_on, evaluate, CoeffField, CoeffKind, Exponent, Family, FitOptions, Region};
use crate::curve::{juillet, CurveConfig};
use crate::error::{Error, Result};
use crate::exec::Exec;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// `hᵠ` with `h⁰ = 1` for every cube, including those where `h = 0`.
fn power(h: f64, q: f64) -> f64 {
    if q == 0.0 {
        1.0
    } else {
        h.powf(q)
    }
}

fn value(field: &CoeffField, id: CubeId) -> Result<f64> {
    field.get(id).ok_or(Error::MissingCube(id))
}

/// `Σ_{Q ⊆ root} h(λQ)ᵠ μ(Q) / μ(root)`.
pub fn glem_sum(tree: &CubeTree, field: &CoeffField, q: f64, root: CubeId) -> Result<f64> {
    let mut sum = 0.0;
    for id in tree.descendants(root) {
        sum += power(value(field, id)?, q) * tree.cube(id).mass;
    }
    Ok(sum / tree.cube(root).mass)
}

/// `Σ_{Q ⊆ root, h(λQ) > ε} μ(Q) / μ(root)`.
pub fn wgl_count(tree: &CubeTree, field: &CoeffField, eps: f64, root: CubeId) -> Result<f64> {
    let mut sum = 0.0;
    for id in tree.descendants(root) {
        if value(field, id)? > eps {
            sum += tree.cube(id).mass;
        }
    }
    Ok(sum / tree.cube(root).mass)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelIncrement {
    pub level: i32,
    pub increment: f64,
    pub partial_sum: f64,
}

fn accumulate(levels: impl IntoIterator<Item = (i32, f64)>) -> Vec<LevelIncrement> {
    let mut total = 0.0;
    levels
        .into_iter()
        .map(|(level, increment)| {
            total += increment;
            LevelIncrement { level, increment, partial_sum: total }
        })
        .collect()
}

/// Per-generation contributions to [`glem_sum`] under `root`, up to
/// `max_generation` when given.
pub fn glem_increments(
    tree: &CubeTree,
    field: &CoeffField,
    q: f64,
    root: CubeId,
    max_generation: Option<i32>,
) -> Result<Vec<LevelIncrement>> {
    let top = tree.cube(root).generation;
    let last = max_generation.map_or(tree.j_max(), |g| g.min(tree.j_max()));
    let mut per = vec![0.0; (last - top + 1).max(0) as usize];
    for id in tree.descendants(root) {
        let c = tree.cube(id);
        if c.generation <= last {
            per[(c.generation - top) as usize] += power(value(field, id)?, q) * c.mass;
        }
    }
    let m = tree.cube(root).mass;
    Ok(accumulate(per.into_iter().enumerate().map(|(g, s)| (top + g as i32, s / m))))
}

/// Normalized sums for every cube of one generation taken as a root.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CarlesonReport {
    pub coeff: CoeffKind,
    pub q: f64,
    pub lambda: f64,
    pub root_generation: i32,
    pub roots: Vec<CubeId>,
    pub sums: Vec<f64>,
    pub max_sum: f64,
    /// Per-generation increments under the top cube.
    pub increments: Vec<LevelIncrement>,
}

pub fn carleson_report(tree: &CubeTree, field: &CoeffField, q: f64, root_generation: i32, exec: Exec) -> Result<CarlesonReport> {
    let roots = tree.generation(root_generation).to_vec();
    let sums = exec.map(&roots, |&r| glem_sum(tree, field, q, r)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CarlesonReport {
        coeff: field.kind,
        q,
        lambda: field.lambda,
        root_generation,
        max_sum: sums.iter().copied().fold(0.0, f64::max),
        roots,
        sums,
        increments: glem_increments(tree, field, q, tree.root(), None)?,
    })
}

/// `Sⱼ = Σ_{j′ ≤ j} 2^{−j′} Σ_{x ∈ Δ_{j′}} β_{p,𝒱ₖ}(x, A·2^{−j′})²` for
/// `j ≤ max_level`.
pub fn multires_sum(
    cloud: &PointCloud,
    net: &DyadicNet,
    p: Exponent,
    a: f64,
    max_level: Option<i32>,
    opts: &FitOptions,
    exec: Exec,
) -> Result<Vec<LevelIncrement>> {
    if !(a > 1.0) {
        return Err(Error::param("A", format!("must exceed 1, got {a}")));
    }
    let index = StripIndex::new(cloud.points());
    let last = max_level.map_or(net.j_max(), |m| m.min(net.j_max()));
    let kind = [CoeffKind::new(Family::BetaHorizontal, p)];
    let mut levels = Vec::new();
    for j in net.j_min..=last {
        let r = a * 0.5f64.powi(j);
        let centers = net.level(j);
        let betas = exec.map(centers, |&x| {
            let region = Region::ball(cloud, &index, &cloud.points()[x], r, opts.k);
            evaluate(cloud, &region, &kind, opts).map(|c| c.beta[if p == Exponent::One { 0 } else { 1 }])
        });
        let mut inc = 0.0;
        for b in betas {
            inc += b?.powi(2);
        }
        levels.push((j, inc * 0.5f64.powi(j)));
    }
    Ok(accumulate(levels))
}

/// Riemann sum of `∫∫ h(B(x, r))ᵠ dμ(x) dr/r / μ(E)` over dyadic radii
/// `2^{−j}`, `j_min ≤ j ≤ j_max`, with `ln 2` per radius and at most
/// `max_centers` centers taken by stride (weights rescaled).
#[allow(clippy::too_many_arguments)]
pub fn ball_integral(
    cloud: &PointCloud,
    kind: CoeffKind,
    q: f64,
    j_min: i32,
    j_max: i32,
    max_centers: usize,
    opts: &FitOptions,
    exec: Exec,
) -> Result<f64> {
    let index = StripIndex::new(cloud.points());
    let stride = cloud.len().div_ceil(max_centers.max(1));
    let centers: Vec<usize> = (0..cloud.len()).step_by(stride).collect();
    let sample_mass: f64 = centers.iter().map(|&i| cloud.weights()[i]).sum();
    let mut total = 0.0;
    for j in j_min..=j_max {
        let r = 0.5f64.powi(j);
        let vals = exec.map(&centers, |&x| {
            let region = Region::ball(cloud, &index, &cloud.points()[x], r, opts.k);
            evaluate(cloud, &region, &[kind], opts).map(|c| c.get(kind).unwrap_or(0.0))
        });
        for (v, &x) in vals.into_iter().zip(&centers) {
            total += power(v?, q) * cloud.weights()[x];
        }
    }
    Ok(total * std::f64::consts::LN_2 / sample_mass)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DichotomyConfig {
    pub c0: f64,
    /// Finest level summed.
    pub generations: usize,
    /// Extra curve generations built beyond `generations`, so the finest
    /// summed level still sees the zigzag one generation down.
    pub lookahead: usize,
    /// Multiresolution ball constant.
    pub a: f64,
    /// Further values of `A` whose multiresolution sums are reported.
    pub a_sensitivity: Vec<f64>,
    pub lambda: f64,
    pub rho: f64,
    /// First level of the comparison window.
    pub first_level: i32,
    pub fit: FitOptions,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        Self {
            c0: crate::curve::DEFAULT_C0,
            generations: 7,
            lookahead: 1,
            a: 5.0,
            a_sensitivity: vec![8.0],
            lambda: 2.0,
            rho: 0.5,
            first_level: 3,
            fit: FitOptions { max_opt_points: 256, ..FitOptions::default() },
        }
    }
}

/// Least-squares fit `increment ≈ slope·x + intercept` with
/// `x = 1/(⌈j/2⌉ + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn harmonic_fit(incs: &[LevelIncrement]) -> HarmonicFit {
    let xs: Vec<f64> = incs.iter().map(|l| 1.0 / ((l.level as f64 / 2.0).ceil() + 1.0)).collect();
    let ys: Vec<f64> = incs.iter().map(|l| l.increment).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if sxx > 0.0 && syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
    HarmonicFit { slope, intercept: my - slope * mx, r_squared }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub a: f64,
    pub increments: Vec<LevelIncrement>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub config: DichotomyConfig,
    pub points: usize,
    pub cubes: usize,
    /// `β₁²` multiresolution sums over the dyadic net.
    pub beta_sq: Vec<LevelIncrement>,
    /// `β̂₁⁴` cube sums under the top cube.
    pub beta_hat_4: Vec<LevelIncrement>,
    pub harmonic: HarmonicFit,
    /// `β₁²` increment at the first level of the window.
    pub floor: f64,
    /// Smallest `β₁²` increment in the window over `floor`.
    pub floor_ratio: f64,
    /// Whether `β̂₁⁴` increments strictly decrease from the level after
    /// the first one of the window.
    pub hat_decreasing: bool,
    pub sensitivity: Vec<SensitivityRow>,
}

impl DichotomyReport {
    fn window(&self, incs: &[LevelIncrement]) -> Vec<LevelIncrement> {
        let last = self.config.generations as i32;
        incs.iter().filter(|l| l.level >= self.config.first_level && l.level <= last).copied().collect()
    }

    pub fn beta_sq_window(&self) -> Vec<LevelIncrement> {
        self.window(&self.beta_sq)
    }

    pub fn beta_hat_window(&self) -> Vec<LevelIncrement> {
        self.window(&self.beta_hat_4)
    }
}

pub fn dichotomy_experiment(cfg: &DichotomyConfig, exec: Exec) -> Result<DichotomyReport> {
    let j = cfg.generations;
    let curve_cfg = CurveConfig::new(cfg.c0, (j + cfg.lookahead).max(1))?;
    if j > 8 {
        return Err(Error::param("generations", format!("at most 8 at desk scale, got {j}")));
    }
    if cfg.a < 5.0 {
        return Err(Error::param("A", format!("the experiment needs A >= 5, got {}", cfg.a)));
    }
    let built = j + cfg.lookahead;
    let gamma = juillet(&curve_cfg, built)?;
    let cloud = cloud_from_polyline(&gamma, curve_cfg.segment_length(built))?;
    let last = j as i32;
    let net = dyadic_net(&cloud);
    let beta_sq = multires_sum(&cloud, &net, Exponent::One, cfg.a, Some(last), &cfg.fit, exec)?;
    let sensitivity = cfg
        .a_sensitivity
        .iter()
        .map(|&a| {
            multires_sum(&cloud, &net, Exponent::One, a, Some(last), &cfg.fit, exec).map(|increments| SensitivityRow { a, increments })
        })
        .collect::<Result<Vec<_>>>()?;

    let tree = christ_cubes_with(&cloud, cfg.rho, exec)?;
    let kind = CoeffKind::new(Family::BetaStratified, Exponent::One);
    let field = compute_field_on(&tree, &cloud, &[kind], cfg.lambda, &cfg.fit, exec, |id| tree.cube(id).generation <= last)?.remove(0);
    let beta_hat_4 = glem_increments(&tree, &field, 4.0, tree.root(), Some(last))?;

    let mut report = DichotomyReport {
        config: cfg.clone(),
        points: cloud.len(),
        cubes: tree.cubes.iter().filter(|c| c.generation <= last).count(),
        beta_sq,
        beta_hat_4,
        harmonic: HarmonicFit { slope: 0.0, intercept: 0.0, r_squared: 0.0 },
        floor: 0.0,
        floor_ratio: 0.0,
        hat_decreasing: false,
        sensitivity,
    };
    let win = report.beta_sq_window();
    report.harmonic = harmonic_fit(&win);
    report.floor = win.first().map_or(0.0, |l| l.increment);
    report.floor_ratio = win.iter().map(|l| l.increment / report.floor).fold(f64::INFINITY, f64::min);
    let hat: Vec<f64> = report.beta_hat_window().iter().skip(1).map(|l| l.increment).collect();
    report.hat_decreasing = hat.len() >= 2 && hat.windows(2).all(|w| w[1] < w[0]);
    Ok(report)
}

/// `level,increment,partial_sum` rows.
pub fn increments_csv(incs: &[LevelIncrement]) -> String {
    let mut s = String::from("level,increment,partial_sum\n");
    for l in incs {
        let _ = writeln!(s, "{},{:.12e},{:.12e}", l.level, l.increment, l.partial_sum);
    }
    s
}
