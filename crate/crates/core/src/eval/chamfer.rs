use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::Vec3;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Plain-text XYZ: one `x y z` line per point with `precision` decimals.
    pub fn to_xyz(&self, precision: usize) -> String {
        let mut out = String::new();
        for p in &self.points {
            out.push_str(&format!("{:.*} {:.*} {:.*}\n", precision, p[0], precision, p[1], precision, p[2]));
        }
        out
    }

    pub fn save_xyz(&self, path: &Path, precision: usize) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_xyz(precision).as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn parse_xyz(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::invalid(format!("line {}: {e}", i + 1)))?;
            if vals.len() != 3 || vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("line {}: expected three finite coordinates", i + 1)));
            }
            points.push([vals[0], vals[1], vals[2]]);
        }
        Ok(Self { points })
    }

    pub fn load_xyz(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_xyz(&text).map_err(|e| Error::load(path, e.to_string()))
    }
}

#[inline]
fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    let (dx, dy, dz) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    dx * dx + dy * dy + dz * dz
}

/// Static 3-d tree for exact nearest-neighbor queries.
pub struct KdTree {
    points: Vec<Vec3>,
    /// Implicit balanced tree: node `[lo, hi)` splits at `(lo + hi) / 2`.
    axes: Vec<u8>,
}

impl KdTree {
    pub fn build(points: &[Vec3]) -> Self {
        let mut pts = points.to_vec();
        let mut axes = vec![0u8; pts.len()];
        Self::build_range(&mut pts, &mut axes, 0);
        Self { points: pts, axes }
    }

    fn build_range(pts: &mut [Vec3], axes: &mut [u8], depth: usize) {
        if pts.len() <= 1 {
            return;
        }
        // split on the axis of largest extent
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in pts.iter() {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let axis = (0..3).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap_or(depth % 3);
        let mid = pts.len() / 2;
        pts.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
        axes[mid] = axis as u8;
        let (left, right) = pts.split_at_mut(mid);
        let (al, ar) = axes.split_at_mut(mid);
        Self::build_range(left, al, depth + 1);
        Self::build_range(&mut right[1..], &mut ar[1..], depth + 1);
    }

    /// Smallest squared distance from `q` to the tree's points.
    pub fn nearest_dist2(&self, q: &Vec3) -> f64 {
        let mut best = f64::INFINITY;
        self.search(0, self.points.len(), q, &mut best);
        best
    }

    fn search(&self, lo: usize, hi: usize, q: &Vec3, best: &mut f64) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let p = &self.points[mid];
        let d = dist2(p, q);
        if d < *best {
            *best = d;
        }
        if hi - lo == 1 {
            return;
        }
        let axis = self.axes[mid] as usize;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(near.0, near.1, q, best);
        if diff * diff <= *best {
            self.search(far.0, far.1, q, best);
        }
    }
}

/// Mean over `p` of the Euclidean distance to the nearest point of `q`.
pub fn directed_mean_distance(p: &PointCloud, q: &PointCloud) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::invalid("Chamfer distance needs two nonempty point clouds"));
    }
    let tree = KdTree::build(&q.points);
    let dists: Vec<f64> = p.points.par_iter().map(|x| tree.nearest_dist2(x).sqrt()).collect();
    Ok(dists.iter().sum::<f64>() / p.len() as f64)
}

/// Sum (not average) of the two directed mean nearest-neighbor distances.
pub fn chamfer_sum(p: &PointCloud, q: &PointCloud) -> Result<f64> {
    Ok(directed_mean_distance(p, q)? + directed_mean_distance(q, p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_pair_sums_both_directions() {
        let p = PointCloud::new(vec![[0.0; 3]]);
        let q = PointCloud::new(vec![[1.0, 0.0, 0.0]]);
        assert_eq!(chamfer_sum(&p, &q).unwrap(), 2.0);
        assert_eq!(chamfer_sum(&p, &p).unwrap(), 0.0);
        assert!(chamfer_sum(&p, &PointCloud::default()).is_err());
    }

    fn brute(p: &[Vec3], q: &[Vec3]) -> f64 {
        let one = |a: &[Vec3], b: &[Vec3]| {
            let mut s = 0.0;
            for x in a {
                let mut best = f64::INFINITY;
                for y in b {
                    let d = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2);
                    best = best.min(d);
                }
                s += best.sqrt();
            }
            s / a.len() as f64
        };
        one(p, q) + one(q, p)
    }

    fn cloud() -> impl Strategy<Value = Vec<Vec3>> {
        prop::collection::vec(prop::array::uniform3(-5.0f64..5.0), 1..60)
    }

    proptest! {
        #[test]
        fn kd_tree_matches_brute_force(p in cloud(), q in cloud()) {
            let (a, b) = (PointCloud::new(p.clone()), PointCloud::new(q.clone()));
            prop_assert_eq!(chamfer_sum(&a, &b).unwrap(), brute(&p, &q));
            prop_assert_eq!(chamfer_sum(&a, &b).unwrap(), chamfer_sum(&b, &a).unwrap());
            prop_assert_eq!(chamfer_sum(&a, &a).unwrap(), 0.0);
        }
    }

    #[test]
    fn duplicate_and_collinear_points() {
        let p: Vec<Vec3> = (0..40).map(|i| [(i % 5) as f64, 0.0, 0.0]).collect();
        let q: Vec<Vec3> = (0..7).map(|i| [i as f64 * 0.7 + 0.1, 0.0, 0.0]).collect();
        assert_eq!(
            chamfer_sum(&PointCloud::new(p.clone()), &PointCloud::new(q.clone())).unwrap(),
            brute(&p, &q)
        );
    }

    #[test]
    fn xyz_round_trip() {
        let c = PointCloud::new(vec![[1.0, -2.5, 3.25], [0.0, 0.125, -7.0]]);
        assert_eq!(c.to_xyz(3), "1.000 -2.500 3.250\n0.000 0.125 -7.000\n");
        assert_eq!(PointCloud::parse_xyz(&c.to_xyz(3)).unwrap(), c);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b.xyz");
        c.save_xyz(&path, 6).unwrap();
        assert_eq!(PointCloud::load_xyz(&path).unwrap(), c);
        assert!(PointCloud::parse_xyz("1 2\n").is_err());
        assert!(PointCloud::parse_xyz("1 2 x\n").is_err());
    }
}
