use super::{diameter, Diameter, PointCloud, StripIndex};
use crate::error::{Error, Result};
use crate::exec::Exec;
use serde::Serialize;

pub type CubeId = usize;

#[derive(Clone, Debug, Serialize)]
pub struct DyadicCube {
    pub id: CubeId,
    pub generation: i32,
    /// Ascending point indices.
    pub members: Vec<usize>,
    /// Index of `x_Q`.
    pub center: usize,
    pub parent: Option<CubeId>,
    pub children: Vec<CubeId>,
    #[serde(skip)]
    pub mass: f64,
    #[serde(skip)]
    pub diam: Diameter,
    /// `max d(x_Q, y)` over members.
    #[serde(skip)]
    pub radius: f64,
}

/// Nested partitions `𝒟_j`, `j = j0, …, j_max`, with a single top cube.
#[derive(Clone, Debug, Serialize)]
pub struct CubeTree {
    pub rho: f64,
    pub j0: i32,
    /// Smallest `D` for which `diam(Q) ≤ Dρʲ` and `B(x_Q, D⁻¹ρʲ) ∩ E ⊂ Q`
    /// hold on every cube.
    pub d_constant: f64,
    /// Smallest `D ≥ d_constant` that also gives `D⁻¹ρʲ ≤ diam(Q)` on every
    /// cube with at least two points.
    pub d_two_sided: f64,
    pub generations: Vec<Vec<CubeId>>,
    pub cubes: Vec<DyadicCube>,
    #[serde(skip)]
    cube_of: Vec<Vec<u32>>,
    #[serde(skip)]
    index: StripIndex,
}

/// Greedy top-down construction. Each child set is a maximal
/// `ρʲ`-separated net of the parent's members seeded with the parent's
/// center, and members join the nearest center (lowest index on ties), so
/// nesting holds by construction.
pub fn christ_cubes(cloud: &PointCloud, rho: f64) -> Result<CubeTree> {
    christ_cubes_with(cloud, rho, Exec::default())
}

pub fn christ_cubes_with(cloud: &PointCloud, rho: f64, exec: Exec) -> Result<CubeTree> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param("cubes.rho", format!("must lie in (0, 1), got {rho}")));
    }
    let pts = cloud.points();
    let diam = cloud.diameter().value;
    let j0 = top_generation(diam, rho);
    let mut j_max = j0;
    while rho.powi(j_max + 1) >= 2.0 * cloud.resolution() {
        j_max += 1;
    }

    struct Proto {
        members: Vec<usize>,
        center: usize,
        parent: Option<CubeId>,
    }
    let mut protos = vec![Proto { members: (0..pts.len()).collect(), center: 0, parent: None }];
    let mut generations = vec![vec![0]];
    for j in j0 + 1..=j_max {
        let sep = rho.powi(j);
        let parents = generations.last().unwrap().clone();
        let split: Vec<Vec<(usize, Vec<usize>)>> = exec.map(&parents, |&pid| {
            let parent = &protos[pid];
            let mut centers = vec![parent.center];
            for &m in &parent.members {
                if m != parent.center && centers.iter().all(|&c| pts[m].dist(&pts[c]) >= sep) {
                    centers.push(m);
                }
            }
            centers.sort_unstable();
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
            for &m in &parent.members {
                let mut best = (0, f64::INFINITY);
                for (ci, &c) in centers.iter().enumerate() {
                    let d = pts[m].dist(&pts[c]);
                    if d < best.1 {
                        best = (ci, d);
                    }
                }
                groups[best.0].push(m);
            }
            centers.into_iter().zip(groups).collect()
        });
        let mut gen = Vec::new();
        for (pid, kids) in parents.iter().zip(split) {
            for (center, members) in kids {
                gen.push(protos.len());
                protos.push(Proto { members, center, parent: Some(*pid) });
            }
        }
        generations.push(gen);
    }

    let mut cubes: Vec<DyadicCube> = Vec::with_capacity(protos.len());
    for (g, gen) in generations.iter().enumerate() {
        for &id in gen {
            let p = &protos[id];
            cubes.push(DyadicCube {
                id,
                generation: j0 + g as i32,
                members: p.members.clone(),
                center: p.center,
                parent: p.parent,
                children: Vec::new(),
                mass: 0.0,
                diam: Diameter { value: 0.0, upper: 0.0, exact: true },
                radius: 0.0,
            });
        }
    }
    cubes.sort_by_key(|c| c.id);
    for id in 0..cubes.len() {
        if let Some(p) = cubes[id].parent {
            cubes[p].children.push(id);
        }
    }
    let metrics: Vec<(f64, Diameter, f64)> = exec.map(&cubes, |c| {
        let center = &pts[c.center];
        let radius = c.members.iter().map(|&m| pts[m].dist(center)).fold(0.0, f64::max);
        (cloud.mass_of(&c.members), diameter(pts, &c.members), radius)
    });
    for (c, (mass, diam, radius)) in cubes.iter_mut().zip(metrics) {
        c.mass = mass;
        c.diam = diam;
        c.radius = radius;
    }

    let mut cube_of = vec![vec![0u32; pts.len()]; generations.len()];
    for (g, gen) in generations.iter().enumerate() {
        for &id in gen {
            for &m in &cubes[id].members {
                cube_of[g][m] = id as u32;
            }
        }
    }
    let index = StripIndex::new(pts);
    let mut tree = CubeTree { rho, j0, d_constant: 1.0, d_two_sided: 1.0, generations, cubes, cube_of, index };
    let bounds: Vec<(f64, f64)> = exec.map(&tree.cubes, |c| {
        let scale = rho.powi(c.generation);
        let g = (c.generation - j0) as usize;
        let mut d = c.diam.upper / scale;
        if let Some((_, out)) = tree.index.nearest_where(pts, &pts[c.center], |i| tree.cube_of[g][i] as usize != c.id) {
            d = d.max(scale / out * (1.0 + 1e-9));
        }
        let lower = if c.members.len() > 1 && c.diam.value > 0.0 { scale / c.diam.value } else { 0.0 };
        (d, lower)
    });
    tree.d_constant = bounds.iter().map(|b| b.0).fold(1.0, f64::max);
    tree.d_two_sided = bounds.iter().map(|b| b.1).fold(tree.d_constant, f64::max);
    Ok(tree)
}

/// `J₀` with `ρ^{J₀+1} ≤ diam < ρ^{J₀}`.
fn top_generation(diam: f64, rho: f64) -> i32 {
    if diam <= 0.0 {
        return 0;
    }
    let mut j = (diam.ln() / rho.ln()).ceil() as i32 - 1;
    while rho.powi(j) <= diam {
        j -= 1;
    }
    while rho.powi(j + 1) > diam {
        j += 1;
    }
    j
}

/// Outcome of [`CubeTree::verify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CubeCheck {
    pub partition: bool,
    pub nesting: bool,
    pub diameter: bool,
    pub inner_ball: bool,
    pub mass_conserved: bool,
}

impl CubeCheck {
    pub fn all(&self) -> bool {
        self.partition && self.nesting && self.diameter && self.inner_ball && self.mass_conserved
    }
}

/// Largest fraction of a cube's mass within `τρʲ` of its complement, per `τ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub taus: Vec<f64>,
    pub max_fraction: Vec<f64>,
    /// Smallest `C` in `[1, 100]` with `fraction ≤ C τ^{1/C}` at every `τ`.
    pub constant: Option<f64>,
}

impl CubeTree {
    pub fn j_max(&self) -> i32 {
        self.j0 + self.generations.len() as i32 - 1
    }

    pub fn root(&self) -> CubeId {
        self.generations[0][0]
    }

    pub fn cube(&self, id: CubeId) -> &DyadicCube {
        &self.cubes[id]
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn index(&self) -> &StripIndex {
        &self.index
    }

    /// Cube ids of generation `j` (empty outside `[j0, j_max]`).
    pub fn generation(&self, j: i32) -> &[CubeId] {
        if j < self.j0 || j > self.j_max() {
            return &[];
        }
        &self.generations[(j - self.j0) as usize]
    }

    /// The generation-`j` cube holding point `i`.
    pub fn cube_containing(&self, j: i32, i: usize) -> CubeId {
        self.cube_of[(j - self.j0) as usize][i] as usize
    }

    /// `id` and all its descendants, coarse to fine.
    pub fn descendants(&self, id: CubeId) -> Vec<CubeId> {
        let mut out = vec![id];
        let mut head = 0;
        while head < out.len() {
            let c = out[head];
            out.extend(&self.cubes[c].children);
            head += 1;
        }
        out
    }

    /// Whether `inner ⊆ outer` as cubes.
    pub fn contains(&self, outer: CubeId, inner: CubeId) -> bool {
        let g = self.cubes[outer].generation;
        let ci = &self.cubes[inner];
        ci.generation >= g && self.cube_containing(g, ci.center) == outer
    }

    /// Checks partition, nesting, the diameter bound, the inner ball and
    /// per-generation mass conservation on the sample.
    pub fn verify(&self, cloud: &PointCloud) -> CubeCheck {
        let n = cloud.len();
        let total = cloud.total_mass();
        let mut check = CubeCheck { partition: true, nesting: true, diameter: true, inner_ball: true, mass_conserved: true };
        for gen in &self.generations {
            let mut seen = vec![false; n];
            let mut mass = 0.0;
            for &id in gen {
                mass += self.cubes[id].mass;
                for &m in &self.cubes[id].members {
                    check.partition &= !std::mem::replace(&mut seen[m], true);
                }
            }
            check.partition &= seen.iter().all(|&s| s);
            check.mass_conserved &= (mass - total).abs() <= 1e-12 * total;
        }
        for c in &self.cubes {
            if let Some(p) = c.parent {
                let pm = &self.cubes[p].members;
                check.nesting &= c.members.iter().all(|m| pm.binary_search(m).is_ok());
                check.nesting &= self.cubes[p].generation + 1 == c.generation;
            }
            let scale = self.rho.powi(c.generation);
            check.diameter &= c.diam.upper <= self.d_constant * scale;
            let r = scale / self.d_constant;
            let center = &cloud.points()[c.center];
            check.inner_ball &= cloud.ball(&self.index, center, r).iter().all(|m| c.members.binary_search(m).is_ok());
        }
        check
    }

    /// Measures the small-boundary property at the given `τ` values over
    /// all cubes below the root.
    pub fn boundary_report(&self, cloud: &PointCloud, taus: &[f64]) -> BoundaryReport {
        let pts = cloud.points();
        let mut max_fraction = vec![0.0f64; taus.len()];
        for (g, gen) in self.generations.iter().enumerate().skip(1) {
            let scale = self.rho.powi(self.j0 + g as i32);
            let gap: Vec<f64> = Exec::default().map_range(pts.len(), |i| {
                let own = self.cube_of[g][i];
                self.index.nearest_where(pts, &pts[i], |o| self.cube_of[g][o] != own).map_or(f64::INFINITY, |v| v.1)
            });
            for &id in gen {
                let c = &self.cubes[id];
                for (ti, &tau) in taus.iter().enumerate() {
                    let near: f64 = c.members.iter().filter(|&&m| gap[m] <= tau * scale).map(|&m| cloud.weights()[m]).sum();
                    max_fraction[ti] = max_fraction[ti].max(near / c.mass);
                }
            }
        }
        let constant =
            (0..=990).map(|s| 1.0 + s as f64 * 0.1).find(|&c| taus.iter().zip(&max_fraction).all(|(&tau, &f)| f <= c * tau.powf(1.0 / c)));
        BoundaryReport { taus: taus.to_vec(), max_fraction, constant }
    }
}

/// `λQ = {x : d(x, Q) ≤ (λ − 1)·diam(Q)}`, ascending indices.
pub fn enlarge(tree: &CubeTree, cloud: &PointCloud, id: CubeId, lambda: f64) -> Vec<usize> {
    assert!(lambda >= 1.0, "enlargement factor must be >= 1");
    let q = &tree.cubes[id];
    if lambda == 1.0 {
        return q.members.clone();
    }
    let pts = cloud.points();
    let thr = (lambda - 1.0) * q.diam.value;
    let outer = thr + q.radius;
    let center = &pts[q.center];
    let g = (q.generation - tree.j0) as usize;
    let mut out: Vec<usize> = tree
        .index
        .candidates(center.z[0], outer)
        .iter()
        .map(|&i| i as usize)
        .filter(|&x| {
            if tree.cube_of[g][x] as usize == id {
                return true;
            }
            let dc = pts[x].dist(center);
            if dc > outer {
                return false;
            }
            dc <= thr || q.members.iter().any(|&m| pts[x].dist(&pts[m]) <= thr)
        })
        .collect();
    out.sort_unstable();
    out
}
