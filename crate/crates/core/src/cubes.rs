//! Parent assignment between consecutive levels and the cube partition it induces.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::hierarchy::DyadicHierarchy;
use crate::metric::{MetricPointCloud, PointId};
use crate::report::CheckRow;
use crate::scale::Delta;
use crate::sets::PointSet;

/// Inner radii `r_k` for levels `k_min..=k_max`; outer radii are `R_k = 4 r_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusSchedule {
    delta: Delta,
    k_min: i32,
    inner: Vec<f64>,
    draws: Option<Vec<u32>>,
}

impl RadiusSchedule {
    /// Radii `(delta^k + a_k delta^(k+1)) / 4` from integer draws `a_k`.
    pub fn from_draws(delta: Delta, k_min: i32, draws: Vec<u32>) -> Result<Self> {
        if let Some((i, a)) = draws.iter().enumerate().find(|(_, &a)| a > delta.max_draw()) {
            return Err(Error::InvalidParameter(format!(
                "a_{} = {a} exceeds floor(1/delta) = {}",
                k_min + i as i32,
                delta.max_draw()
            )));
        }
        let inner = draws.iter().enumerate().map(|(i, &a)| delta.inner_radius(k_min + i as i32, a)).collect();
        Ok(RadiusSchedule { delta, k_min, inner, draws: Some(draws) })
    }

    /// Arbitrary radii, each required to lie in `[delta^k / 4, delta^k / 2]`.
    pub fn from_radii(delta: Delta, k_min: i32, inner: Vec<f64>) -> Result<Self> {
        for (i, &r) in inner.iter().enumerate() {
            let k = k_min + i as i32;
            if !(r >= delta.scaled_pow(k, 1, 4) && r <= delta.scaled_pow(k, 1, 2)) {
                return Err(Error::InvalidParameter(format!("r_{k} = {r} outside [delta^k/4, delta^k/2]")));
            }
        }
        Ok(RadiusSchedule { delta, k_min, inner, draws: None })
    }

    /// Same draw at every level of `h`.
    pub fn constant(h: &DyadicHierarchy, draw: u32) -> Result<Self> {
        Self::from_draws(h.delta(), h.k_min(), vec![draw; h.num_levels()])
    }

    pub fn delta(&self) -> Delta {
        self.delta
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_min + self.inner.len() as i32 - 1
    }

    pub fn inner(&self, k: i32) -> f64 {
        self.inner[(k - self.k_min) as usize]
    }

    pub fn outer(&self, k: i32) -> f64 {
        4.0 * self.inner(k)
    }

    /// The draws this schedule came from, if any.
    pub fn omega(&self) -> Option<&[u32]> {
        self.draws.as_deref()
    }

    pub fn covers(&self, h: &DyadicHierarchy) -> Result<()> {
        if self.delta != h.delta() || self.k_min > h.k_min() || self.k_max() < h.k_max() - 1 {
            return Err(Error::InvalidParameter(format!(
                "schedule for levels {}..={} (delta {}) does not fit the hierarchy {}..={} (delta {})",
                self.k_min,
                self.k_max(),
                self.delta,
                h.k_min(),
                h.k_max(),
                h.delta()
            )));
        }
        Ok(())
    }
}

/// Parent index at level `k` of the level-`(k+1)` center `point`.
///
/// The unique center whose inner ball holds the point wins; otherwise the
/// smallest index among centers whose outer ball holds it.
pub fn parent_index(cloud: &MetricPointCloud, h: &DyadicHierarchy, k: i32, point: usize, inner: f64) -> Result<usize> {
    let outer = 4.0 * inner;
    let mut first_outer = None;
    for (alpha, &z) in h.level(k).iter().enumerate() {
        let d = cloud.distance(point, z);
        if d < inner {
            return Ok(alpha);
        }
        if first_outer.is_none() && d < outer {
            first_outer = Some(alpha);
        }
    }
    first_outer.ok_or_else(|| {
        Error::Internal(format!("point {} lies in no outer ball of level {k}", cloud.id(point)))
    })
}

/// `parents[j][β]`: the parent at level `k_min + j` of `z_β^(k_min + j + 1)`.
pub fn assign_parents(cloud: &MetricPointCloud, h: &DyadicHierarchy, s: &RadiusSchedule) -> Result<Vec<Vec<u32>>> {
    s.covers(h)?;
    (h.k_min()..h.k_max())
        .map(|k| {
            h.level(k + 1)
                .par_iter()
                .map(|&p| parent_index(cloud, h, k, p, s.inner(k)).map(|a| a as u32))
                .collect::<Result<Vec<u32>>>()
        })
        .collect()
}

/// Cubes at every level, realised as ancestry classes of the leaves.
#[derive(Clone, Debug)]
pub struct CubeSystem<'h> {
    h: &'h DyadicHierarchy,
    parents: Vec<Vec<u32>>,
    labels: Vec<Vec<u32>>,
    members: Vec<Vec<Vec<usize>>>,
    omega: Option<Vec<u32>>,
}

impl<'h> CubeSystem<'h> {
    pub fn build(cloud: &MetricPointCloud, h: &'h DyadicHierarchy, s: &RadiusSchedule) -> Result<Self> {
        let parents = assign_parents(cloud, h, s)?;
        Self::from_parents(h, parents, s.omega().map(<[u32]>::to_vec))
    }

    /// Assembles cubes from a precomputed parent map.
    pub fn from_parents(h: &'h DyadicHierarchy, parents: Vec<Vec<u32>>, omega: Option<Vec<u32>>) -> Result<Self> {
        if parents.len() + 1 != h.num_levels() {
            return Err(Error::InvalidParameter("parent map does not match the hierarchy depth".into()));
        }
        let n = h.n_points();
        let finest = h.k_max();
        let mut labels = vec![Vec::new(); h.num_levels()];
        labels[h.num_levels() - 1] = (0..n)
            .map(|x| h.index_of(finest, x).map(|a| a as u32))
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| Error::Precondition("finest level must contain every point".into()))?;
        for j in (0..parents.len()).rev() {
            let below = &labels[j + 1];
            labels[j] = below.iter().map(|&b| parents[j][b as usize]).collect();
        }
        let members = labels
            .iter()
            .enumerate()
            .map(|(j, lab)| {
                let mut m = vec![Vec::new(); h.level(h.k_min() + j as i32).len()];
                for (x, &a) in lab.iter().enumerate() {
                    m[a as usize].push(x);
                }
                m
            })
            .collect();
        Ok(CubeSystem { h, parents, labels, members, omega })
    }

    pub fn hierarchy(&self) -> &'h DyadicHierarchy {
        self.h
    }

    pub fn omega(&self) -> Option<&[u32]> {
        self.omega.as_deref()
    }

    pub fn parents(&self) -> &[Vec<u32>] {
        &self.parents
    }

    /// Parent index at level `k` of the pair `(k + 1, β)`.
    pub fn parent(&self, k: i32, beta: usize) -> usize {
        self.parents[(k - self.h.k_min()) as usize][beta] as usize
    }

    /// `α` with `x ∈ Q_α^k`.
    pub fn cube_of_point(&self, x: usize, k: i32) -> usize {
        self.labels[(k - self.h.k_min()) as usize][x] as usize
    }

    /// Cube labels of all points at level `k`.
    pub fn labels(&self, k: i32) -> &[u32] {
        &self.labels[(k - self.h.k_min()) as usize]
    }

    /// Members of `Q_α^k` in ascending index order.
    pub fn cube(&self, k: i32, alpha: usize) -> &[usize] {
        &self.members[(k - self.h.k_min()) as usize][alpha]
    }

    pub fn cube_set(&self, k: i32, alpha: usize) -> PointSet {
        PointSet::from_indices(self.h.n_points(), self.cube(k, alpha).iter().copied())
    }

    pub fn cubes_at(&self, k: i32) -> &[Vec<usize>] {
        &self.members[(k - self.h.k_min()) as usize]
    }

    /// Children `β` at level `k + 1` of `(k, α)`.
    pub fn children(&self, k: i32, alpha: usize) -> Vec<usize> {
        if k >= self.h.k_max() {
            return Vec::new();
        }
        self.parents[(k - self.h.k_min()) as usize]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p as usize == alpha)
            .map(|(b, _)| b)
            .collect()
    }

    /// Ancestor at level `k` of `(l, β)`, following the parent map.
    pub fn ancestor(&self, l: i32, beta: usize, k: i32) -> usize {
        let mut b = beta;
        for j in (k..l).rev() {
            b = self.parent(j, b);
        }
        b
    }

    /// Diffs against another system over every level, for worker-count checks.
    pub fn same_partition(&self, other: &CubeSystem<'_>) -> bool {
        self.labels == other.labels
    }

    pub fn to_json(&self, cloud: &MetricPointCloud) -> CubeSystemJson {
        let mut parents = BTreeMap::new();
        let mut cubes = BTreeMap::new();
        for (j, ps) in self.parents.iter().enumerate() {
            let k = self.h.k_min() + j as i32;
            for (b, &a) in ps.iter().enumerate() {
                parents.insert(format!("{}:{b}", k + 1), format!("{k}:{a}"));
            }
        }
        for (j, level) in self.members.iter().enumerate() {
            let k = self.h.k_min() + j as i32;
            for (a, m) in level.iter().enumerate() {
                cubes.insert(format!("{k}:{a}"), m.iter().map(|&x| cloud.id(x)).collect());
            }
        }
        CubeSystemJson { omega: self.omega.clone().unwrap_or_default(), parents, cubes }
    }

    /// SVG of a 2D cloud with points colored by their level-`k` cube.
    pub fn render_svg(&self, cloud: &MetricPointCloud, k: i32) -> Result<String> {
        self.h.check_level(k)?;
        if cloud.dim() != 2 {
            return Err(Error::InvalidParameter("SVG rendering needs a 2D coordinate cloud".into()));
        }
        let pts: Vec<&[f64]> = (0..cloud.len()).map(|i| cloud.coordinates(i).unwrap()).collect();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &pts {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
        let (size, pad) = (640.0, 20.0);
        let scale = (size - 2.0 * pad) / span;
        let dot = (0.35 * scale * cloud.min_separation().min(span)).clamp(1.5, 8.0);
        let mut svg = String::new();
        writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#).unwrap();
        writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        for (x, p) in pts.iter().enumerate() {
            let alpha = self.cube_of_point(x, k);
            let hue = (alpha as f64 * 137.507_764) % 360.0;
            let cx = pad + (p[0] - lo[0]) * scale;
            let cy = size - pad - (p[1] - lo[1]) * scale;
            let is_center = self.h.center(k, alpha) == x;
            let (r, stroke) = if is_center { (dot * 1.8, r#" stroke="black" stroke-width="1.5""#) } else { (dot, "") };
            writeln!(svg, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="hsl({hue:.1},70%,50%)"{stroke}/>"#).unwrap();
        }
        svg.push_str("</svg>\n");
        Ok(svg)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeSystemJson {
    pub omega: Vec<u32>,
    pub parents: BTreeMap<String, String>,
    pub cubes: BTreeMap<String, Vec<PointId>>,
}

/// `ceil(M^3 delta^(-log2 M))`, the child-count bound.
pub fn child_bound(m: u64, delta: Delta) -> u64 {
    let m = m as f64;
    let x = m.powi(3) * (1.0 / delta.value()).powf(m.log2());
    (x * (1.0 - 1e-12)).ceil().max(1.0) as u64
}

/// Measured inclusion constants: the largest `c` with `B(z, c delta^k) ⊆ Q`
/// and the smallest `C` with `Q ⊆ B(z, C delta^k)` over all cubes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionConstants {
    pub inner: f64,
    pub outer: f64,
}

pub fn measure_inclusion(cloud: &MetricPointCloud, cs: &CubeSystem<'_>) -> InclusionConstants {
    let h = cs.hierarchy();
    let per_level: Vec<(f64, f64)> = (h.k_min()..=h.k_max())
        .into_par_iter()
        .map(|k| {
            let scale = h.delta().pow(k);
            let labels = cs.labels(k);
            let (mut inner, mut outer) = (f64::INFINITY, 0.0f64);
            for (alpha, &z) in h.level(k).iter().enumerate() {
                for x in 0..cloud.len() {
                    let d = cloud.distance(x, z) / scale;
                    if labels[x] as usize == alpha {
                        outer = outer.max(d);
                    } else {
                        inner = inner.min(d);
                    }
                }
            }
            (inner, outer)
        })
        .collect();
    InclusionConstants {
        inner: per_level.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        outer: per_level.iter().map(|p| p.1).fold(0.0, f64::max),
    }
}

/// Partition, nesting, parent-rule, child-count and inclusion checks.
pub fn verify_cubes(cloud: &MetricPointCloud, cs: &CubeSystem<'_>, s: &RadiusSchedule, m: u64) -> Vec<CheckRow> {
    let h = cs.hierarchy();
    let n = cloud.len();
    let params = json!({
        "delta": h.delta().to_string(),
        "omega": cs.omega(),
        "M": m,
    });

    let partition = (h.k_min()..=h.k_max()).find_map(|k| {
        let mut seen = vec![0u32; n];
        for cube in cs.cubes_at(k) {
            for &x in cube {
                seen[x] += 1;
            }
        }
        seen.iter().position(|&c| c != 1).map(|x| format!("x = {} lies in {} cubes of level {k}", cloud.id(x), seen[x]))
    });

    let nesting = (h.k_min()..=h.k_max())
        .into_par_iter()
        .map(|k| {
            for l in k..=h.k_max() {
                let mut unions = vec![PointSet::empty(n); h.level(k).len()];
                for (b, cube) in cs.cubes_at(l).iter().enumerate() {
                    let a = cs.ancestor(l, b, k);
                    for &x in cube {
                        unions[a].insert(x);
                    }
                }
                for (a, u) in unions.iter().enumerate() {
                    if *u != cs.cube_set(k, a) {
                        return Some(format!("Q_{a}^{k} differs from the union of its level-{l} descendants"));
                    }
                }
            }
            None
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next();

    let parent_rule = (h.k_min()..h.k_max()).find_map(|k| {
        h.level(k + 1).iter().enumerate().find_map(|(b, &p)| {
            let a = cs.parent(k, b);
            let d = cloud.distance(p, h.center(k, a));
            if d >= s.outer(k) {
                return Some(format!("(k+1, beta) = ({}, {b}) has a parent outside its outer ball", k + 1));
            }
            h.level(k).iter().enumerate().find_map(|(t, &z)| {
                (t != a && cloud.distance(p, z) < s.inner(k))
                    .then(|| format!("({}, {b}) lies in the inner ball of {t} but has parent {a}", k + 1))
            })
        })
    });

    let bound = child_bound(m, h.delta());
    let mut max_children = 0usize;
    let mut children_violation = None;
    for k in h.k_min()..h.k_max() {
        let mut counts = vec![0usize; h.level(k).len()];
        for b in 0..h.level(k + 1).len() {
            counts[cs.parent(k, b)] += 1;
        }
        max_children = max_children.max(counts.iter().copied().max().unwrap_or(0));
        if children_violation.is_none() {
            children_violation = counts
                .iter()
                .position(|&c| c == 0 || c as u64 > bound)
                .map(|a| format!("(k, alpha) = ({k}, {a}) has {} children, bound {bound}", counts[a]));
        }
    }

    let measured = measure_inclusion(cloud, cs);
    let inclusion = CheckRow::new("cubes.inclusion", params.clone()).measured(json!({
        "inner": measured.inner,
        "outer": measured.outer,
    }));
    let inclusion = if h.delta().satisfies_cube_hypothesis() {
        let failure = (measured.inner < 0.2)
            .then(|| format!("a point within {:.4} delta^k of a center lies outside its cube", measured.inner))
            .or_else(|| {
                (measured.outer >= 3.0).then(|| format!("a cube member lies {:.4} delta^k from its center", measured.outer))
            });
        inclusion.outcome(failure)
    } else {
        inclusion
    };

    vec![
        CheckRow::new("cubes.partition", params.clone()).outcome(partition),
        CheckRow::new("cubes.nesting", params.clone()).outcome(nesting),
        CheckRow::new("cubes.parent-rule", params.clone()).outcome(parent_rule),
        CheckRow::new("cubes.children", params.clone())
            .outcome(children_violation)
            .measured(json!({ "max": max_children, "bound": bound })),
        inclusion,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (MetricPointCloud, DyadicHierarchy) {
        let c = MetricPointCloud::line(10, 1.0).unwrap();
        let d = Delta::new(1, 4).unwrap();
        let h = DyadicHierarchy::from_levels(10, d, -1, vec![vec![0, 4, 8], (0..10).collect()]).unwrap();
        (c, h)
    }

    #[test]
    fn parent_rule_examples() {
        let (c, h) = setup();
        assert_eq!(parent_index(&c, &h, -1, 0, 1.0).unwrap(), 0);
        assert_eq!(parent_index(&c, &h, -1, 3, 1.0).unwrap(), 0);
        assert_eq!(parent_index(&c, &h, -1, 3, 1.5).unwrap(), 1);
        assert_eq!(parent_index(&c, &h, -1, 8, 1.5).unwrap(), 2);
    }

    #[test]
    fn cube_examples() {
        let (c, h) = setup();
        let s = RadiusSchedule::from_radii(h.delta(), -1, vec![1.5, 0.25]).unwrap();
        let cs = CubeSystem::build(&c, &h, &s).unwrap();
        assert_eq!(cs.cube(-1, 0), &[0, 1, 2]);
        assert_eq!(cs.cube(-1, 1), &[3, 4, 5, 6]);
        assert_eq!(cs.cube(-1, 2), &[7, 8, 9]);
        for x in 0..10 {
            assert_eq!(cs.cube(0, x), &[x]);
            assert_eq!(cs.cube_of_point(x, -1), cs.parent(-1, cs.cube_of_point(x, 0)));
        }
        for (a, &z) in h.level(-1).iter().enumerate() {
            assert_eq!(cs.cube_of_point(z, -1), a);
        }
        let rows = verify_cubes(&c, &cs, &s, 3);
        assert!(rows.iter().all(|r| !r.failed()), "{rows:?}");
        assert!(RadiusSchedule::from_radii(h.delta(), -1, vec![0.9, 0.25]).is_err());
    }

    #[test]
    fn built_hierarchy_root_is_whole_cloud() {
        let c = MetricPointCloud::grid(6, 6, 1.0).unwrap();
        let h = DyadicHierarchy::build_auto(&c, Delta::new(1, 10).unwrap()).unwrap();
        let s = RadiusSchedule::constant(&h, 3).unwrap();
        let cs = CubeSystem::build(&c, &h, &s).unwrap();
        assert_eq!(cs.cube(h.k_min(), 0).len(), 36);
        let json = cs.to_json(&c);
        assert_eq!(json.omega, vec![3; h.num_levels()]);
        assert!(cs.render_svg(&c, h.k_max() - 1).unwrap().starts_with("<svg"));
    }

    #[test]
    fn child_bound_values() {
        let d = Delta::new(1, 10).unwrap();
        assert_eq!(child_bound(1, d), 1);
        assert_eq!(child_bound(2, d), 80);
        assert_eq!(child_bound(4, d), 6400);
    }
}
