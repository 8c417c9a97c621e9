//! ε-boundaries, approximated cubes and the ball covers of their boundaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cubes::{CubeSystem, RadiusSchedule};
use crate::error::{Error, Result};
use crate::hierarchy::DyadicHierarchy;
use crate::metric::MetricPointCloud;
use crate::sets::PointSet;

/// `∂_ε A`: points of `A` within `ε` of the complement and points of the
/// complement within `ε` of `A`, with `d(x, ∅) = +∞`.
pub fn epsilon_boundary(cloud: &MetricPointCloud, a: &PointSet, eps: f64) -> PointSet {
    let mask = (0..cloud.len())
        .into_par_iter()
        .map(|x| {
            let inside = a.contains(x);
            (0..cloud.len()).any(|y| a.contains(y) != inside && cloud.distance(x, y) < eps)
        })
        .collect();
    PointSet::from_mask(mask)
}

/// The annulus `B(c, r + ε) \ B̄(c, r - ε)`, which contains `∂_ε B(c, r)`.
pub fn ball_boundary_superset(cloud: &MetricPointCloud, center: usize, r: f64, eps: f64) -> PointSet {
    PointSet::from_mask(
        (0..cloud.len())
            .map(|x| {
                let d = cloud.distance(center, x);
                d < r + eps && d > r - eps
            })
            .collect(),
    )
}

/// Labels `i` with `x ∈ ∂_ε P_i` for the partition `P_i = {y : labels[y] = i}`.
///
/// With `L` the labels found within `ε` of `x` (`x` included), `x` lies on
/// `∂_ε P_i` exactly when `i ∈ L` and `L` has at least two labels.
pub fn labeled_boundary_labels(cloud: &MetricPointCloud, labels: &[u32], x: usize, eps: f64) -> Vec<u32> {
    let mut found = vec![labels[x]];
    for y in 0..cloud.len() {
        if cloud.distance(x, y) < eps && !found.contains(&labels[y]) {
            found.push(labels[y]);
        }
    }
    if found.len() < 2 {
        return Vec::new();
    }
    found.sort_unstable();
    found
}

/// Whether `x` lies on the ε-boundary of some part of the labeled partition.
pub fn on_labeled_boundary(cloud: &MetricPointCloud, labels: &[u32], x: usize, eps: f64) -> bool {
    let own = labels[x];
    (0..cloud.len()).any(|y| labels[y] != own && cloud.distance(x, y) < eps)
}

/// `∪_i ∂_ε P_i` for the labeled partition.
pub fn labeled_boundary_union(cloud: &MetricPointCloud, labels: &[u32], eps: f64) -> PointSet {
    PointSet::from_mask((0..cloud.len()).into_par_iter().map(|x| on_labeled_boundary(cloud, labels, x, eps)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxCube {
    pub k: i32,
    pub alpha: usize,
    pub members: PointSet,
}

fn require_level(h: &DyadicHierarchy, s: &RadiusSchedule, k: i32) -> Result<()> {
    h.check_level(k)?;
    if k < s.k_min() || k > s.k_max() {
        return Err(Error::LevelOutOfRange { level: k, k_min: s.k_min(), k_max: s.k_max() });
    }
    Ok(())
}

/// `A_α^k = B(z_α, r_k) ∪ (B(z_α, R_k) \ (∪_{θ≠α} B(z_θ, r_k) ∪ ∪_{θ<α} B(z_θ, R_k)))`.
///
/// Only centers within `2 R_k` of `z_α` can hold a point of `B(z_α, R_k)`, so
/// the unions run over those.
pub fn approximated_cube(cloud: &MetricPointCloud, h: &DyadicHierarchy, s: &RadiusSchedule, k: i32, alpha: usize) -> Result<ApproxCube> {
    require_level(h, s, k)?;
    let (r, big_r) = (s.inner(k), s.outer(k));
    let centers = h.level(k);
    let za = centers[alpha];
    let near: Vec<(usize, usize)> = centers
        .iter()
        .enumerate()
        .filter(|&(t, &z)| t != alpha && cloud.distance(za, z) < 2.0 * big_r)
        .map(|(t, &z)| (t, z))
        .collect();
    let mask = (0..cloud.len())
        .map(|x| {
            let d = cloud.distance(x, za);
            if d < r {
                return true;
            }
            d < big_r
                && !near.iter().any(|&(t, z)| {
                    let dz = cloud.distance(x, z);
                    dz < r || (t < alpha && dz < big_r)
                })
        })
        .collect();
    Ok(ApproxCube { k, alpha, members: PointSet::from_mask(mask) })
}

/// Approximated-cube label of every point: the unique inner-ball center, or
/// else the smallest-index outer-ball center.
pub fn approx_labels(cloud: &MetricPointCloud, h: &DyadicHierarchy, s: &RadiusSchedule, k: i32) -> Result<Vec<u32>> {
    require_level(h, s, k)?;
    (0..cloud.len())
        .into_par_iter()
        .map(|x| crate::cubes::parent_index(cloud, h, k, x, s.inner(k)).map(|a| a as u32))
        .collect()
}

/// `p = floor(M ((R + ε) / r)^(log2 M))`.
pub fn membership_bound(m: u64, inner: f64, outer: f64, eps: f64) -> u64 {
    let m = m as f64;
    (m * ((outer + eps) / inner).powf(m.log2()) * (1.0 + 1e-12)).floor() as u64
}

/// Number of approximated cubes of level `k` whose ε-boundary holds `x`.
pub fn boundary_membership_count(cloud: &MetricPointCloud, h: &DyadicHierarchy, s: &RadiusSchedule, x: usize, k: i32, eps: f64) -> Result<usize> {
    let labels = approx_labels(cloud, h, s, k)?;
    Ok(labeled_boundary_labels(cloud, &labels, x, eps).len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallKind {
    Inner,
    Outer,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverBall {
    /// Level index `θ` of the center.
    pub center: usize,
    pub radius: f64,
    pub kind: BallKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCover {
    pub balls: Vec<CoverBall>,
    pub bound: u64,
    pub within_bound: bool,
    /// First boundary point missed by every annulus, as a point index.
    pub uncovered: Option<usize>,
}

impl BallCover {
    pub fn holds(&self) -> bool {
        self.within_bound && self.uncovered.is_none()
    }
}

/// The ball family covering `∂_ε A_α^k`: own inner and outer ball, inner balls
/// meeting `B(z_α, R_k)` and outer balls meeting it. Balls are tested by
/// center distance (`< R + r` and `< 2R`); a ball may appear in both roles.
pub fn approx_boundary_ball_cover(
    cloud: &MetricPointCloud,
    h: &DyadicHierarchy,
    s: &RadiusSchedule,
    k: i32,
    alpha: usize,
    eps: f64,
    m: u64,
) -> Result<BallCover> {
    let labels = approx_labels(cloud, h, s, k)?;
    Ok(ball_cover_with_labels(cloud, h, s, &labels, k, alpha, eps, m))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn ball_cover_with_labels(
    cloud: &MetricPointCloud,
    h: &DyadicHierarchy,
    s: &RadiusSchedule,
    labels: &[u32],
    k: i32,
    alpha: usize,
    eps: f64,
    m: u64,
) -> BallCover {
    let (r, big_r) = (s.inner(k), s.outer(k));
    let centers = h.level(k);
    let za = centers[alpha];
    let mut balls = vec![
        CoverBall { center: alpha, radius: r, kind: BallKind::Inner },
        CoverBall { center: alpha, radius: big_r, kind: BallKind::Outer },
    ];
    for (t, &z) in centers.iter().enumerate() {
        if t != alpha && cloud.distance(za, z) < big_r + r {
            balls.push(CoverBall { center: t, radius: r, kind: BallKind::Inner });
        }
    }
    for (t, &z) in centers.iter().enumerate() {
        if t != alpha && cloud.distance(za, z) < 2.0 * big_r {
            balls.push(CoverBall { center: t, radius: big_r, kind: BallKind::Outer });
        }
    }
    let bound = 2 + 2 * m.pow(4);
    let annuli: Vec<PointSet> =
        balls.iter().map(|b| ball_boundary_superset(cloud, centers[b.center], b.radius, eps)).collect();
    let me = alpha as u32;
    let uncovered = (0..cloud.len()).find(|&x| {
        cloud.distance(x, za) < big_r + eps
            && labeled_boundary_labels(cloud, labels, x, eps).contains(&me)
            && !annuli.iter().any(|a| a.contains(x))
    });
    BallCover { within_bound: balls.len() as u64 <= bound, balls, bound, uncovered }
}

/// Outcome of the two cube-boundary inclusions at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionOutcome {
    /// `∂_ε Q_α^k ⊆ ∂_{ε + 3δ^(k+1)} A_α^k`; first failing `(point, α)`.
    pub single: Option<(usize, usize)>,
    /// `∪_α ∂_ε Q_α^k ⊆ ∩_{i=0..=m} ∪_β ∂_{ε + 3δ^(k+1+i)} A_β^(k+i)`; first failing `(point, i)`.
    pub layered: Option<(usize, i32)>,
}

impl InclusionOutcome {
    pub fn holds(&self) -> bool {
        self.single.is_none() && self.layered.is_none()
    }
}

/// Checks both inclusions for every cube of level `k` and depth `m`.
pub fn cube_boundary_inclusions(
    cloud: &MetricPointCloud,
    cs: &CubeSystem<'_>,
    s: &RadiusSchedule,
    k: i32,
    eps: f64,
    m: i32,
) -> Result<InclusionOutcome> {
    let h = cs.hierarchy();
    if m < 0 || k + m > h.k_max() {
        return Err(Error::LevelOutOfRange { level: k + m, k_min: h.k_min(), k_max: h.k_max() });
    }
    let delta = h.delta();
    let approx: Vec<Vec<u32>> = (0..=m).map(|i| approx_labels(cloud, h, s, k + i)).collect::<Result<_>>()?;
    let cube_labels = cs.labels(k);
    let widened = |i: i32| eps + 3.0 * delta.pow(k + 1 + i);
    let per_point: Vec<(Option<usize>, Option<i32>)> = (0..cloud.len())
        .into_par_iter()
        .map(|x| {
            let on_q = labeled_boundary_labels(cloud, cube_labels, x, eps);
            if on_q.is_empty() {
                return (None, None);
            }
            let on_a = labeled_boundary_labels(cloud, &approx[0], x, widened(0));
            let single = on_q.iter().find(|a| !on_a.contains(a)).map(|&a| a as usize);
            let layered = (0..=m).find(|&i| !on_labeled_boundary(cloud, &approx[i as usize], x, widened(i)));
            (single, layered)
        })
        .collect();
    Ok(InclusionOutcome {
        single: per_point.iter().enumerate().find_map(|(x, p)| p.0.map(|a| (x, a))),
        layered: per_point.iter().enumerate().find_map(|(x, p)| p.1.map(|i| (x, i))),
    })
}

/// Single-cube form: both inclusions restricted to `(k, α)`.
pub fn check_cube_boundary_inclusions(
    cloud: &MetricPointCloud,
    cs: &CubeSystem<'_>,
    s: &RadiusSchedule,
    k: i32,
    alpha: usize,
    eps: f64,
    m: i32,
) -> Result<bool> {
    let h = cs.hierarchy();
    if m < 0 || k + m > h.k_max() {
        return Err(Error::LevelOutOfRange { level: k + m, k_min: h.k_min(), k_max: h.k_max() });
    }
    let delta = h.delta();
    let q = cs.cube_set(k, alpha);
    let a = approximated_cube(cloud, h, s, k, alpha)?.members;
    let single = epsilon_boundary(cloud, &q, eps).is_subset(&epsilon_boundary(cloud, &a, eps + 3.0 * delta.pow(k + 1)));
    let union_q = labeled_boundary_union(cloud, cs.labels(k), eps);
    let layered = (0..=m).all(|i| {
        let labels = approx_labels(cloud, h, s, k + i).expect("level checked");
        union_q.is_subset(&labeled_boundary_union(cloud, &labels, eps + 3.0 * delta.pow(k + 1 + i)))
    });
    Ok(single && layered)
}
