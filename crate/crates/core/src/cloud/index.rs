use crate::hgroup::HPoint;

/// Points sorted by their first horizontal coordinate. Since
/// `|x₁ − y₁| ≤ d(x, y)`, every ball query reduces to a contiguous strip.
#[derive(Clone, Debug)]
pub struct StripIndex {
    order: Vec<u32>,
    keys: Vec<f64>,
}

impl StripIndex {
    pub fn new(points: &[HPoint]) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        order.sort_by(|&a, &b| points[a as usize].z[0].total_cmp(&points[b as usize].z[0]).then(a.cmp(&b)));
        let keys = order.iter().map(|&i| points[i as usize].z[0]).collect();
        Self { order, keys }
    }

    /// Indices whose key lies in `[x − r, x + r]`, in key order.
    pub fn candidates(&self, x: f64, r: f64) -> &[u32] {
        let lo = self.keys.partition_point(|&k| k < x - r);
        let hi = self.keys.partition_point(|&k| k <= x + r);
        &self.order[lo..hi]
    }

    /// Smallest `d(center, p)` over points `p` with `accept(p)`, scanning
    /// outward from `x` and stopping once the strip exceeds the best hit.
    pub fn nearest_where(&self, points: &[HPoint], center: &HPoint, accept: impl Fn(usize) -> bool) -> Option<(usize, f64)> {
        let x = center.z[0];
        let mid = self.keys.partition_point(|&k| k < x);
        let mut best: Option<(usize, f64)> = None;
        let bound = |b: &Option<(usize, f64)>| b.map_or(f64::INFINITY, |v| v.1);
        let visit = |pos: usize, best: &mut Option<(usize, f64)>| -> bool {
            if (self.keys[pos] - x).abs() > bound(best) {
                return false;
            }
            let i = self.order[pos] as usize;
            if accept(i) {
                let d = points[i].dist(center);
                if d < bound(best) || (d == bound(best) && best.is_some_and(|b| i < b.0)) {
                    *best = Some((i, d));
                }
            }
            true
        };
        for pos in mid..self.keys.len() {
            if !visit(pos, &mut best) {
                break;
            }
        }
        for pos in (0..mid).rev() {
            if !visit(pos, &mut best) {
                break;
            }
        }
        best
    }
}
