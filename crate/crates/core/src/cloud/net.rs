use super::PointCloud;
use crate::hgroup::HPoint;
use serde::Serialize;
use std::collections::HashMap;

/// Nested nets `Δ_j`, `j = j_min, …, j_max`, stored as ascending indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicNet {
    pub j_min: i32,
    pub levels: Vec<Vec<usize>>,
}

impl DyadicNet {
    pub fn j_max(&self) -> i32 {
        self.j_min + self.levels.len() as i32 - 1
    }

    /// `Δ_j`; levels coarser than `j_min` equal `Δ_{j_min}` and finer ones
    /// equal `Δ_{j_max}`.
    pub fn level(&self, j: i32) -> &[usize] {
        let g = (j - self.j_min).clamp(0, self.levels.len() as i32 - 1);
        &self.levels[g as usize]
    }

    /// Checks nesting, strict `2⁻ʲ`-separation and `2⁻ʲ`-covering.
    pub fn verify(&self, cloud: &PointCloud) -> NetCheck {
        let pts = cloud.points();
        let mut check = NetCheck { nested: true, separated: true, covering: true };
        for (g, level) in self.levels.iter().enumerate() {
            let r = 0.5f64.powi(self.j_min + g as i32);
            if g > 0 {
                check.nested &= self.levels[g - 1].iter().all(|i| level.binary_search(i).is_ok());
            }
            let grid = Grid::build(pts, level, r);
            for &i in level {
                check.separated &= grid.near(pts, &pts[i], r).all(|(j, d)| j == i || d > r);
            }
            for p in pts {
                check.covering &= grid.near(pts, p, r).any(|(_, d)| d <= r);
            }
        }
        check
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NetCheck {
    pub nested: bool,
    pub separated: bool,
    pub covering: bool,
}

impl NetCheck {
    pub fn all(&self) -> bool {
        self.nested && self.separated && self.covering
    }
}

/// Buckets points by `(z₁, z₂)` cells of side `r`; a Korányi ball of
/// radius `r` meets at most the 3×3 block around its center's cell.
struct Grid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    fn key(&self, z: &[f64]) -> (i64, i64) {
        ((z[0] / self.cell).floor() as i64, (z[1] / self.cell).floor() as i64)
    }

    fn build(pts: &[HPoint], idx: &[usize], cell: f64) -> Self {
        let mut g = Grid { cell, buckets: HashMap::new() };
        for &i in idx {
            g.insert(pts, i);
        }
        g
    }

    fn insert(&mut self, pts: &[HPoint], i: usize) {
        let k = self.key(&pts[i].z);
        self.buckets.entry(k).or_default().push(i);
    }

    fn near<'a>(&'a self, pts: &'a [HPoint], p: &'a HPoint, r: f64) -> impl Iterator<Item = (usize, f64)> + 'a {
        debug_assert!(r <= self.cell);
        let (cx, cy) = self.key(&p.z);
        (cx - 1..=cx + 1)
            .flat_map(move |x| (cy - 1..=cy + 1).map(move |y| (x, y)))
            .filter_map(move |k| self.buckets.get(&k))
            .flatten()
            .map(move |&j| (j, pts[j].dist(p)))
    }
}

/// Greedy nested nets: `Δ_{j+1}` starts from `Δ_j` and adds, in index
/// order, every point farther than `2^{-(j+1)}` from the current net.
/// Levels run from the coarsest `j` at which point 0 alone covers the
/// cloud down to the first `j` with `2⁻ʲ ≤ resolution`.
pub fn dyadic_net(cloud: &PointCloud) -> DyadicNet {
    let pts = cloud.points();
    let rad0 = pts.iter().map(|p| p.dist(&pts[0])).fold(0.0, f64::max);
    let j_max = (-cloud.resolution().log2()).ceil() as i32;
    let j_min = if rad0 > 0.0 { ((-rad0.log2()).floor() as i32).min(j_max) } else { j_max };
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut current = vec![0usize];
    for j in j_min..=j_max {
        let r = 0.5f64.powi(j);
        let mut grid = Grid::build(pts, &current, r);
        for i in 0..pts.len() {
            if grid.near(pts, &pts[i], r).all(|(_, d)| d > r) {
                grid.insert(pts, i);
                current.push(i);
            }
        }
        current.sort_unstable();
        levels.push(current.clone());
    }
    DyadicNet { j_min, levels }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ball {
    pub level: i32,
    pub center: usize,
    pub radius: f64,
}

/// Balls `B(x, A·2⁻ʲ)`, `x ∈ Δ_j`, coarse to fine.
pub fn multires_family(net: &DyadicNet, a: f64) -> Vec<Ball> {
    assert!(a > 1.0, "multiresolution constant must exceed 1");
    let mut out = Vec::new();
    for (g, level) in net.levels.iter().enumerate() {
        let j = net.j_min + g as i32;
        let radius = a * 0.5f64.powi(j);
        out.extend(level.iter().map(|&center| Ball { level: j, center, radius }));
    }
    out
}
