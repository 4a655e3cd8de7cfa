//! Stopping-time coronization of a cube tree: good cubes with reference
//! planes, coherent trees under the angle rule, the F₁/F₂/F₃ split,
//! packing sums, the projection check and intrinsic-graph extraction.

use crate::cloud::{enlarge, CubeId, CubeTree, PointCloud};
use crate::coeff::{compute_field, CoeffField, CoeffKind, Exponent, Family, FitOptions};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hgroup::{angle, intrinsic_lip_constant, HPoint, HorizontalPlane};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoronaParams {
    pub eta: f64,
    pub epsilon: f64,
    pub k: f64,
    pub k0: f64,
    /// Whether `K ≥ 2K₀(1 + η⁻¹) + 1` was enforced.
    pub strict: bool,
}

impl CoronaParams {
    /// Smallest admissible `K` for the given `K₀` and `η`.
    pub fn k_bound(k0: f64, eta: f64) -> f64 {
        2.0 * k0 * (1.0 + 1.0 / eta) + 1.0
    }

    pub fn new(eta: f64, epsilon: f64, k: f64, k0: f64) -> Result<Self> {
        let p = Self::exploratory(eta, epsilon, k, k0)?;
        let bound = Self::k_bound(k0, eta);
        if k < bound {
            return Err(Error::KConstraint { k, bound });
        }
        Ok(Self { strict: true, ..p })
    }

    /// Same ranges as [`CoronaParams::new`] without the constraint on `K`;
    /// the projection check refuses such parameters.
    pub fn exploratory(eta: f64, epsilon: f64, k: f64, k0: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::param("corona.eta", format!("must lie in (0, 1), got {eta}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param("corona.epsilon", format!("must lie in (0, 1), got {epsilon}")));
        }
        if !(k > 1.0) {
            return Err(Error::param("corona.K", format!("must exceed 1, got {k}")));
        }
        if !(k0 >= 2.0) {
            return Err(Error::param("corona.K0", format!("must be at least 2, got {k0}")));
        }
        Ok(Self { eta, epsilon, k, k0, strict: false })
    }

    /// `ε²/(2K)`: a cube outside 𝒢₁ has `β_{∞,𝒱ₖ}(KQ)` above this.
    pub fn wgl_threshold(&self) -> f64 {
        self.epsilon * self.epsilon / (2.0 * self.k)
    }
}

impl Default for CoronaParams {
    /// `K₀ = 4`, `η = 0.1`, `ε = min(0.05, η/4)`, `K = 2K₀(1 + η⁻¹) + 1`.
    fn default() -> Self {
        let (eta, k0) = (0.1, 4.0);
        Self { eta, epsilon: (0.05f64).min(eta / 4.0), k: Self::k_bound(k0, eta), k0, strict: true }
    }
}

/// Membership in 𝒢₁ with the reference planes `V_Q`.
#[derive(Clone, Debug, Serialize)]
pub struct GoodCubes {
    pub good: Vec<bool>,
    #[serde(skip)]
    pub planes: Vec<Option<HorizontalPlane>>,
    /// `β_{∞,𝒱ₖ}(KQ)` normalized by `diam(KQ)`.
    #[serde(skip)]
    pub field: CoeffField,
    /// Cubes marked bad because no plane could be evaluated.
    pub failures: Vec<CubeId>,
    /// Cubes whose local searches stopped at the iteration limit.
    pub unconverged: usize,
}

impl GoodCubes {
    pub fn count(&self) -> usize {
        self.good.iter().filter(|&&g| g).count()
    }
}

/// `β_{∞,𝒱ₖ}(KQ)` on every cube, with `KQ` normalized by its own diameter.
pub fn kq_field(tree: &CubeTree, cloud: &PointCloud, params: &CoronaParams, opts: &FitOptions, exec: Exec) -> Result<CoeffField> {
    let kind = CoeffKind::new(Family::BetaHorizontal, Exponent::Inf);
    Ok(compute_field(tree, cloud, &[kind], params.k, opts, exec)?.remove(0))
}

/// `Q ∈ 𝒢₁` iff `sup_{y ∈ KQ} d(y, V) ≤ ε²·diam(Q)` for the fitted `V`.
pub fn classify_good(tree: &CubeTree, cloud: &PointCloud, field: &CoeffField, params: &CoronaParams) -> GoodCubes {
    let eps2 = params.epsilon * params.epsilon;
    let mut failures = Vec::new();
    let mut good = vec![false; tree.len()];
    let mut planes = vec![None; tree.len()];
    for cube in &tree.cubes {
        let members = enlarge(tree, cloud, cube.id, params.k);
        let v = field.values[cube.id];
        let plane = &field.planes[cube.id];
        if !v.is_finite() || (plane.is_none() && members.len() > 1) {
            failures.push(cube.id);
            continue;
        }
        let sup = match plane {
            Some(p) => members.iter().map(|&i| p.dist(&cloud.points()[i])).fold(0.0, f64::max),
            None => 0.0,
        };
        good[cube.id] = sup <= eps2 * cube.diam.value;
        planes[cube.id] = plane.clone().or_else(|| Some(default_plane(cloud, cube.center, field)));
    }
    let unconverged = field.converged.iter().filter(|&&c| !c).count();
    GoodCubes { good, planes, field: field.clone(), failures, unconverged }
}

/// Singleton cubes carry no fitted plane; they inherit the coordinate
/// plane through their point.
fn default_plane(cloud: &PointCloud, center: usize, _field: &CoeffField) -> HorizontalPlane {
    let n = cloud.n();
    let frame = crate::hgroup::IsotropicFrame::standard(n, 1).expect("n >= 1");
    HorizontalPlane { base: cloud.points()[center].clone(), frame }
}

pub fn good_cubes(tree: &CubeTree, cloud: &PointCloud, params: &CoronaParams, opts: &FitOptions, exec: Exec) -> Result<GoodCubes> {
    let field = kq_field(tree, cloud, params, opts, exec)?;
    Ok(classify_good(tree, cloud, &field, params))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    F1,
    F2,
    F3,
}

#[derive(Clone, Debug, Serialize)]
pub struct StopTree {
    pub top: CubeId,
    /// Coarse to fine.
    pub cubes: Vec<CubeId>,
    pub plane: HorizontalPlane,
    /// Minimal cubes with a bad child.
    pub m1: Vec<CubeId>,
    /// Minimal cubes stopped only by the angle rule.
    pub m2: Vec<CubeId>,
    pub labels: Vec<Label>,
    pub top_mass: f64,
    pub m1_mass: f64,
    pub m2_mass: f64,
    pub unstopped_mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoronaForest {
    pub params: CoronaParams,
    pub bad: Vec<CubeId>,
    pub trees: Vec<StopTree>,
    /// Tree index of every good cube.
    pub tree_of: Vec<Option<usize>>,
}

fn within_angle(v: &HorizontalPlane, top: &HorizontalPlane, eta: f64) -> bool {
    angle(v, top).is_ok_and(|a| a <= 1.0 + eta)
}

/// Greedy top-down stopping: an unassigned good cube starts a tree, and a
/// tree cube adopts its children iff all of them are good and within angle
/// `1 + η` of the top's plane. Label masses are filled in by
/// [`classify_trees`].
pub fn build_forest(tree: &CubeTree, good: &GoodCubes, params: &CoronaParams) -> CoronaForest {
    let mut tree_of: Vec<Option<usize>> = vec![None; tree.len()];
    let mut trees = Vec::new();
    for gen in &tree.generations {
        for &id in gen {
            if !good.good[id] || tree_of[id].is_some() {
                continue;
            }
            let t = trees.len();
            let top_plane = good.planes[id].clone().expect("good cubes carry planes");
            let mut cubes = vec![id];
            tree_of[id] = Some(t);
            let (mut m1, mut m2) = (Vec::new(), Vec::new());
            let mut head = 0;
            while head < cubes.len() {
                let q = cubes[head];
                head += 1;
                let children = &tree.cube(q).children;
                if children.is_empty() {
                    continue;
                }
                let bad_child = children.iter().any(|&c| !good.good[c]);
                let steep =
                    children.iter().any(|&c| good.good[c] && !within_angle(good.planes[c].as_ref().unwrap(), &top_plane, params.eta));
                if bad_child {
                    m1.push(q);
                } else if steep {
                    m2.push(q);
                } else {
                    for &c in children {
                        tree_of[c] = Some(t);
                        cubes.push(c);
                    }
                }
            }
            trees.push(StopTree {
                top: id,
                cubes,
                plane: top_plane,
                m1,
                m2,
                labels: Vec::new(),
                top_mass: 0.0,
                m1_mass: 0.0,
                m2_mass: 0.0,
                unstopped_mass: 0.0,
            });
        }
    }
    let bad = (0..tree.len()).filter(|&id| !good.good[id]).collect();
    CoronaForest { params: *params, bad, trees, tree_of }
}

/// Recomputes label masses from the point weights and assigns F₁ (`m₁`
/// mass ≥ μ(top)/4), F₂ (unstopped mass ≥ μ(top)/4), F₃ (`m₂` mass ≥
/// μ(top)/2).
pub fn classify_trees(forest: &mut CoronaForest, tree: &CubeTree, cloud: &PointCloud) {
    let w = cloud.weights();
    for s in &mut forest.trees {
        let top = tree.cube(s.top);
        let gen = |id: CubeId| tree.cube(id).generation;
        let mut covered = vec![false; cloud.len()];
        let mut mass_of = |ids: &[CubeId]| {
            let mut m = 0.0;
            for &id in ids {
                for &x in &tree.cube(id).members {
                    covered[x] = true;
                    m += w[x];
                }
            }
            m
        };
        s.m1_mass = mass_of(&s.m1);
        s.m2_mass = mass_of(&s.m2);
        s.top_mass = top.members.iter().map(|&x| w[x]).sum();
        s.unstopped_mass = top.members.iter().filter(|&&x| !covered[x]).map(|&x| w[x]).sum();
        let _ = gen;
        s.labels.clear();
        if s.m1_mass >= s.top_mass / 4.0 {
            s.labels.push(Label::F1);
        }
        if s.unstopped_mass >= s.top_mass / 4.0 {
            s.labels.push(Label::F2);
        }
        if s.m2_mass >= s.top_mass / 2.0 {
            s.labels.push(Label::F3);
        }
    }
}

/// Structural re-check of a forest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ForestCheck {
    pub unique_top: bool,
    pub sandwich_closed: bool,
    pub children_all_or_none: bool,
    pub partition: bool,
    pub angle_rule: bool,
    pub labeled: bool,
}

impl ForestCheck {
    pub fn all(&self) -> bool {
        self.unique_top && self.sandwich_closed && self.children_all_or_none && self.partition && self.angle_rule && self.labeled
    }
}

pub fn verify_forest(forest: &CoronaForest, tree: &CubeTree, good: &GoodCubes) -> ForestCheck {
    let mut c = ForestCheck {
        unique_top: true,
        sandwich_closed: true,
        children_all_or_none: true,
        partition: true,
        angle_rule: true,
        labeled: true,
    };
    let mut seen = vec![0u32; tree.len()];
    for (t, s) in forest.trees.iter().enumerate() {
        c.labeled &= !s.labels.is_empty();
        for &q in &s.cubes {
            seen[q] += 1;
            c.partition &= good.good[q] && forest.tree_of[q] == Some(t);
            c.unique_top &= tree.contains(s.top, q);
            // every cube between q and the top belongs to the tree
            let mut up = q;
            while up != s.top {
                match tree.cube(up).parent {
                    Some(p) => {
                        c.sandwich_closed &= forest.tree_of[p] == Some(t);
                        up = p;
                    }
                    None => {
                        c.unique_top = false;
                        break;
                    }
                }
            }
            let kids = &tree.cube(q).children;
            let inside = kids.iter().filter(|&&k| forest.tree_of[k] == Some(t)).count();
            c.children_all_or_none &= inside == 0 || inside == kids.len();
            c.angle_rule &= good.planes[q].as_ref().is_some_and(|v| within_angle(v, &s.plane, forest.params.eta));
        }
    }
    c.partition &= seen.iter().zip(&good.good).all(|(&n, &g)| (n == 1) == g);
    c
}

/// Normalized packing sums under every cube `R`.
#[derive(Clone, Debug, Serialize)]
pub struct PackingReport {
    pub bad: Vec<f64>,
    pub tops_f12: Vec<f64>,
    pub tops_f3: Vec<f64>,
    pub max_bad: f64,
    pub max_tops_f12: f64,
    pub max_tops_f3: f64,
    /// `max_R` of the F₃-top sum over the `β_{1,π,A}(K₀Q)²` Carleson sum,
    /// when that field is supplied; the bound asks for `≤ ε^{−6k−1}`.
    pub f3_bound: Option<F3Bound>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct F3Bound {
    pub factor: f64,
    pub holds: bool,
    pub worst_ratio: f64,
}

/// Adds `value` to `id` and all of its ancestors.
fn spread(tree: &CubeTree, sums: &mut [f64], id: CubeId, value: f64) {
    let mut cur = Some(id);
    while let Some(c) = cur {
        sums[c] += value;
        cur = tree.cube(c).parent;
    }
}

pub fn packing_report(forest: &CoronaForest, tree: &CubeTree, k: usize, beta_pi: Option<&CoeffField>) -> Result<PackingReport> {
    let len = tree.len();
    let (mut bad, mut f12, mut f3) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    for &b in &forest.bad {
        spread(tree, &mut bad, b, tree.cube(b).mass);
    }
    for s in &forest.trees {
        let m = tree.cube(s.top).mass;
        if s.labels.iter().any(|l| matches!(l, Label::F1 | Label::F2)) {
            spread(tree, &mut f12, s.top, m);
        }
        if s.labels.contains(&Label::F3) {
            spread(tree, &mut f3, s.top, m);
        }
    }
    let f3_bound = match beta_pi {
        Some(field) => {
            let mut rhs = vec![0.0; len];
            for id in 0..len {
                let v = field.get(id).ok_or(Error::MissingCube(id))?;
                spread(tree, &mut rhs, id, v * v * tree.cube(id).mass);
            }
            let factor = forest.params.epsilon.powf(-(6.0 * k as f64 + 1.0));
            let mut holds = true;
            let mut worst = 0.0f64;
            for id in 0..len {
                holds &= f3[id] <= factor * rhs[id] * (1.0 + 1e-12);
                if f3[id] > 0.0 {
                    worst = worst.max(if rhs[id] > 0.0 { f3[id] / rhs[id] } else { f64::INFINITY });
                }
            }
            Some(F3Bound { factor, holds, worst_ratio: worst })
        }
        None => None,
    };
    let norm = |v: Vec<f64>| -> Vec<f64> { v.iter().zip(&tree.cubes).map(|(s, c)| s / c.mass).collect() };
    let (bad, tops_f12, tops_f3) = (norm(bad), norm(f12), norm(f3));
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(PackingReport { max_bad: max(&bad), max_tops_f12: max(&tops_f12), max_tops_f3: max(&tops_f3), bad, tops_f12, tops_f3, f3_bound })
}

/// `h_𝒮(x) = inf_{Q ∈ 𝒮} d(x, Q) + diam(Q)`, pruned with
/// `d(x, Q) ≥ d(x, x_Q) − radius(Q)`.
pub fn h_tree(s: &StopTree, tree: &CubeTree, cloud: &PointCloud, x: &HPoint) -> f64 {
    let pts = cloud.points();
    let mut best = f64::INFINITY;
    for &q in &s.cubes {
        let c = tree.cube(q);
        let lower = (x.dist(&pts[c.center]) - c.radius).max(0.0) + c.diam.value;
        if lower >= best {
            continue;
        }
        let d = c.members.iter().map(|&m| x.dist(&pts[m])).fold(f64::INFINITY, f64::min);
        best = best.min(d + c.diam.value);
    }
    best
}

/// `d(P_V x, P_V y)`, which only depends on the frame of `V`.
pub fn projected_dist(v: &HorizontalPlane, x: &HPoint, y: &HPoint) -> f64 {
    let dz: Vec<f64> = x.z.iter().zip(&y.z).map(|(a, b)| a - b).collect();
    v.frame.coords(&dz).iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct PairRecord {
    pub tree: usize,
    pub x: usize,
    pub y: usize,
    pub dist: f64,
    pub projected: f64,
    pub ratio: f64,
    /// Whether the pair passed the `η·min(h_𝒮)` gate and was asserted.
    pub checked: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PcReport {
    pub sampled: usize,
    pub checked: usize,
    pub worst_ratio: f64,
    pub bound: f64,
    pub violations: Vec<PairRecord>,
    #[serde(skip)]
    pub pairs: Vec<PairRecord>,
}

impl PcReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("tree,x,y,dist,projected,ratio,checked\n");
        for p in &self.pairs {
            let _ = writeln!(s, "{},{},{},{:.12e},{:.12e},{:.12e},{}", p.tree, p.x, p.y, p.dist, p.projected, p.ratio, p.checked);
        }
        s
    }
}

/// Samples `samples` pairs `x ≠ y` in `K₀Q(𝒮)` per tree and checks
/// `d(x, y) ≤ (1 + 2η)·d(P_{V_𝒮}x, P_{V_𝒮}y)` on the pairs with
/// `d(x, y) > η·min(h_𝒮(x), h_𝒮(y))`.
pub fn verify_pc(forest: &CoronaForest, tree: &CubeTree, cloud: &PointCloud, samples: usize, seed: u64, exec: Exec) -> Result<PcReport> {
    let params = &forest.params;
    if !params.strict {
        return Err(Error::KConstraint { k: params.k, bound: CoronaParams::k_bound(params.k0, params.eta) });
    }
    let bound = 1.0 + 2.0 * params.eta;
    let pts = cloud.points();
    let per_tree: Vec<Vec<PairRecord>> = exec.map_range(forest.trees.len(), |t| {
        let s = &forest.trees[t];
        let region = enlarge(tree, cloud, s.top, params.k0);
        if region.len() < 2 {
            return Vec::new();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut h = vec![f64::NAN; region.len()];
        let mut h_of = |slot: usize| {
            if h[slot].is_nan() {
                h[slot] = h_tree(s, tree, cloud, &pts[region[slot]]);
            }
            h[slot]
        };
        (0..samples)
            .map(|_| {
                let a = rng.random_range(0..region.len());
                let mut b = rng.random_range(0..region.len() - 1);
                if b >= a {
                    b += 1;
                }
                let (x, y) = (&pts[region[a]], &pts[region[b]]);
                let dist = x.dist(y);
                let projected = projected_dist(&s.plane, x, y);
                let checked = dist > params.eta * h_of(a).min(h_of(b));
                let ratio = if projected > 0.0 {
                    dist / projected
                } else if dist > 0.0 {
                    f64::INFINITY
                } else {
                    1.0
                };
                PairRecord { tree: t, x: region[a], y: region[b], dist, projected, ratio, checked }
            })
            .collect()
    });
    let pairs: Vec<PairRecord> = per_tree.into_iter().flatten().collect();
    let checked: Vec<&PairRecord> = pairs.iter().filter(|p| p.checked).collect();
    Ok(PcReport {
        sampled: pairs.len(),
        checked: checked.len(),
        worst_ratio: checked.iter().map(|p| p.ratio).fold(1.0, f64::max),
        bound,
        violations: checked.iter().filter(|p| p.ratio > bound).map(|p| (*p).clone()).collect(),
        pairs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphExtraction {
    pub tree: usize,
    pub theta: f64,
    /// Ascending point indices.
    pub net: Vec<usize>,
    /// `(P_{V_𝒮}(x), x)` over the net.
    #[serde(skip)]
    pub graph: Vec<(HPoint, HPoint)>,
    pub intrinsic_constant: f64,
    /// `6·(2η)^{1/4}`.
    pub envelope: f64,
    /// Largest `d(x, 𝒩)/diam(Q)` over `x ∈ K₀Q`, `Q ∈ 𝒮`; at most `η`
    /// when the approximation property holds.
    pub approximation: f64,
}

impl GraphExtraction {
    pub fn within_envelope(&self) -> bool {
        self.intrinsic_constant <= self.envelope
    }

    pub fn approximates(&self, eta: f64) -> bool {
        self.approximation <= eta
    }
}

/// Greedy net in `K₀Q(𝒮)` whose points are `θ·diam(Q_{x,y})`-separated,
/// `Q_{x,y}` the smallest cube of `𝒮` (ties by id) whose `K₀`-enlargement
/// holds both points, with `θ = ρ/(D²(1/(K₀−1) + 1/η))`; then the graph
/// over `V_𝒮` and its intrinsic Lipschitz constant.
pub fn extract_graph(forest: &CoronaForest, t: usize, tree: &CubeTree, cloud: &PointCloud) -> Result<GraphExtraction> {
    let params = &forest.params;
    let s = forest.trees.get(t).ok_or_else(|| Error::param("tree", format!("no tree {t}")))?;
    let pts = cloud.points();
    let d = tree.d_two_sided;
    let theta = tree.rho / (d * d * (1.0 / (params.k0 - 1.0) + 1.0 / params.eta));

    // smallest first, ties by id
    let mut order: Vec<CubeId> = s.cubes.clone();
    order.sort_by(|&a, &b| tree.cube(a).diam.value.total_cmp(&tree.cube(b).diam.value).then(a.cmp(&b)));
    let enlarged: Vec<Vec<usize>> = order.iter().map(|&q| enlarge(tree, cloud, q, params.k0)).collect();
    let mut holding: Vec<Vec<u32>> = vec![Vec::new(); cloud.len()];
    for (slot, members) in enlarged.iter().enumerate() {
        for &x in members {
            holding[x].push(slot as u32);
        }
    }
    let top_diam = tree.cube(s.top).diam.value;
    let region = enlarge(tree, cloud, s.top, params.k0);
    let mut net: Vec<usize> = Vec::new();
    for &x in &region {
        let ok = net.iter().all(|&y| {
            let dxy = pts[x].dist(&pts[y]);
            if dxy >= theta * top_diam {
                return true;
            }
            let q = holding[x].iter().find(|&&slot| enlarged[slot as usize].binary_search(&y).is_ok());
            let diam = q.map_or(top_diam, |&slot| tree.cube(order[slot as usize]).diam.value);
            dxy >= theta * diam
        });
        if ok {
            net.push(x);
        }
    }
    net.sort_unstable();

    let scale = tree.cube(s.top).diam.value.max(f64::MIN_POSITIVE);
    for (a, &x) in net.iter().enumerate() {
        for &y in &net[..a] {
            if projected_dist(&s.plane, &pts[x], &pts[y]) <= 1e-12 * scale {
                return Err(Error::ProjectionCollision { i: y, j: x });
            }
        }
    }
    let graph: Vec<(HPoint, HPoint)> = net.iter().map(|&x| (s.plane.project(&pts[x]), pts[x].clone())).collect();
    let intrinsic_constant = if graph.len() >= 2 { intrinsic_lip_constant(&graph, &s.plane)? } else { 0.0 };

    let mut approximation = 0.0f64;
    for (slot, members) in enlarged.iter().enumerate() {
        let diam = tree.cube(order[slot]).diam.value;
        for &x in members {
            let near = net.iter().map(|&y| pts[x].dist(&pts[y])).fold(f64::INFINITY, f64::min);
            let ratio = if diam > 0.0 {
                near / diam
            } else if near > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            approximation = approximation.max(ratio);
        }
    }
    Ok(GraphExtraction { tree: t, theta, net, graph, intrinsic_constant, envelope: 6.0 * (2.0 * params.eta).powf(0.25), approximation })
}

/// `max d(x, y)/d(P_V x, P_V y) − 1` over pairs of points; infinite when
/// two distinct points share a projection.
pub fn metric_excess(points: &[HPoint], plane: &HorizontalPlane) -> f64 {
    let mut worst = 1.0f64;
    for (a, x) in points.iter().enumerate() {
        for y in &points[..a] {
            let d = x.dist(y);
            let p = projected_dist(plane, x, y);
            if p > 0.0 {
                worst = worst.max(d / p);
            } else if d > 0.0 {
                return f64::INFINITY;
            }
        }
    }
    worst - 1.0
}

/// Mass fraction of the largest tree over all cubes of the given
/// generations.
pub fn largest_tree_share(forest: &CoronaForest, tree: &CubeTree, generations: std::ops::RangeInclusive<i32>) -> f64 {
    let mut total = 0.0;
    let mut per_tree = vec![0.0; forest.trees.len()];
    for c in &tree.cubes {
        if generations.contains(&c.generation) {
            total += c.mass;
            if let Some(t) = forest.tree_of[c.id] {
                per_tree[t] += c.mass;
            }
        }
    }
    per_tree.into_iter().fold(0.0, f64::max) / total
}

/// Everything the forest export carries.
#[derive(Clone, Debug, Serialize)]
pub struct ForestExport<'a> {
    pub forest: &'a CoronaForest,
    pub packing: &'a PackingReport,
    pub good: &'a GoodCubes,
}
