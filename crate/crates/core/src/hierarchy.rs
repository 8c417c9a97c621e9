//! Nested dyadic point sets `A_k` and the layered construction `C^n_k`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::metric::{first_separation_violation, maximal_separated_extension, maximality_violation, MetricPointCloud, PointId};
use crate::report::CheckRow;
use crate::scale::Delta;
use crate::sets::PointSet;

const ABSENT: u32 = u32::MAX;

/// Levels `k_min..=k_max` of nested nets. `levels[k - k_min][α]` is the point
/// index of `z_α^k`; inherited points keep the lower indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicHierarchy {
    delta: Delta,
    k_min: i32,
    levels: Vec<Vec<usize>>,
    slots: Vec<Vec<u32>>,
    n_points: usize,
}

/// Largest level `k` with `delta^k > diameter`, i.e. one that holds a single point.
pub fn coarsest_level(cloud: &MetricPointCloud, delta: Delta) -> i32 {
    let diam = cloud.diameter();
    if diam == 0.0 {
        return 0;
    }
    let mut k = 0;
    while delta.pow(k) <= diam {
        k -= 1;
    }
    while delta.pow(k + 1) > diam {
        k += 1;
    }
    k
}

impl DyadicHierarchy {
    /// Coarse-to-fine greedy construction starting from level `k_min`.
    pub fn build(cloud: &MetricPointCloud, delta: Delta, k_min: i32) -> Result<Self> {
        let diam = cloud.diameter();
        if delta.pow(k_min) <= diam {
            return Err(Error::Precondition(format!(
                "delta^{k_min} = {} does not exceed the diameter {diam}",
                delta.pow(k_min)
            )));
        }
        let n = cloud.len();
        let sep = cloud.min_separation();
        let mut k_max = k_min;
        while delta.pow(k_max) > sep {
            k_max += 1;
        }
        let all = PointSet::full(n);
        let mut levels = Vec::with_capacity((k_max - k_min + 1) as usize);
        levels.push(maximal_separated_extension(cloud, delta.pow(k_min), &[0], &all)?);
        for k in k_min + 1..=k_max {
            let next = maximal_separated_extension(cloud, delta.pow(k), levels.last().unwrap(), &all)?;
            levels.push(next);
        }
        if levels.last().map(Vec::len) != Some(n) {
            return Err(Error::Internal("finest level does not contain every point".into()));
        }
        Self::from_levels(n, delta, k_min, levels)
    }

    /// [`build`](Self::build) from the coarsest single-point level.
    pub fn build_auto(cloud: &MetricPointCloud, delta: Delta) -> Result<Self> {
        Self::build(cloud, delta, coarsest_level(cloud, delta))
    }

    /// Wraps explicit levels without checking the net axioms; see [`verify_hierarchy`].
    pub fn from_levels(n_points: usize, delta: Delta, k_min: i32, levels: Vec<Vec<usize>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter("hierarchy needs at least one level".into()));
        }
        let mut slots = Vec::with_capacity(levels.len());
        for (i, level) in levels.iter().enumerate() {
            let mut slot = vec![ABSENT; n_points];
            for (alpha, &p) in level.iter().enumerate() {
                if p >= n_points {
                    return Err(Error::InvalidParameter(format!("point index {p} outside the cloud")));
                }
                if slot[p] != ABSENT {
                    return Err(Error::InvalidParameter(format!("point {p} repeated at level {}", k_min + i as i32)));
                }
                slot[p] = alpha as u32;
            }
            if level.is_empty() {
                return Err(Error::InvalidParameter(format!("level {} is empty", k_min + i as i32)));
            }
            slots.push(slot);
        }
        Ok(DyadicHierarchy { delta, k_min, levels, slots, n_points })
    }

    pub fn delta(&self) -> Delta {
        self.delta
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_min + self.levels.len() as i32 - 1
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn contains_level(&self, k: i32) -> bool {
        k >= self.k_min && k <= self.k_max()
    }

    pub fn check_level(&self, k: i32) -> Result<()> {
        if self.contains_level(k) {
            Ok(())
        } else {
            Err(Error::LevelOutOfRange { level: k, k_min: self.k_min, k_max: self.k_max() })
        }
    }

    #[inline]
    fn slot(&self, k: i32) -> usize {
        (k - self.k_min) as usize
    }

    /// Centers of level `k` in index order. Panics outside the level range.
    pub fn level(&self, k: i32) -> &[usize] {
        &self.levels[self.slot(k)]
    }

    pub fn levels(&self) -> impl Iterator<Item = (i32, &[usize])> {
        self.levels.iter().enumerate().map(move |(i, l)| (self.k_min + i as i32, l.as_slice()))
    }

    /// Point index of `z_α^k`.
    pub fn center(&self, k: i32, alpha: usize) -> usize {
        self.levels[self.slot(k)][alpha]
    }

    /// `α` with `z_α^k = point`, if the point is a level-`k` center.
    pub fn index_of(&self, k: i32, point: usize) -> Option<usize> {
        let s = self.slots[self.slot(k)][point];
        (s != ABSENT).then_some(s as usize)
    }

    pub fn level_set(&self, k: i32) -> PointSet {
        PointSet::from_indices(self.n_points, self.level(k).iter().copied())
    }

    pub fn to_json(&self, cloud: &MetricPointCloud) -> HierarchyJson {
        HierarchyJson {
            delta: DeltaJson::Number(self.delta.value()),
            levels: self
                .levels()
                .map(|(k, l)| (k.to_string(), l.iter().map(|&p| cloud.id(p)).collect()))
                .collect(),
        }
    }

    pub fn from_json(cloud: &MetricPointCloud, doc: &HierarchyJson) -> Result<Self> {
        let delta = doc.delta.to_delta()?;
        let mut parsed: Vec<(i32, &Vec<PointId>)> = doc
            .levels
            .iter()
            .map(|(k, ids)| {
                k.trim()
                    .parse::<i32>()
                    .map(|k| (k, ids))
                    .map_err(|_| Error::InvalidParameter(format!("level key {k:?} is not an integer")))
            })
            .collect::<Result<_>>()?;
        parsed.sort_by_key(|(k, _)| *k);
        let k_min = parsed.first().ok_or_else(|| Error::InvalidParameter("no levels".into()))?.0;
        for (i, (k, _)) in parsed.iter().enumerate() {
            if *k != k_min + i as i32 {
                return Err(Error::InvalidParameter(format!("levels skip from {} to {k}", k - 1)));
            }
        }
        let levels = parsed
            .iter()
            .map(|(_, ids)| {
                ids.iter()
                    .map(|&id| cloud.index_of(id).ok_or_else(|| Error::InvalidParameter(format!("unknown point id {id}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_levels(cloud.len(), delta, k_min, levels)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaJson {
    Number(f64),
    Text(String),
}

impl DeltaJson {
    pub fn to_delta(&self) -> Result<Delta> {
        match self {
            DeltaJson::Number(x) => Delta::from_f64(*x),
            DeltaJson::Text(s) => Delta::parse(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyJson {
    pub delta: DeltaJson,
    pub levels: BTreeMap<String, Vec<PointId>>,
}

/// Exhaustive check of nesting, separation, strict covering, the finest level
/// and insertion-ordered indices.
pub fn verify_hierarchy(cloud: &MetricPointCloud, h: &DyadicHierarchy) -> Vec<CheckRow> {
    let params = json!({ "delta": h.delta().to_string(), "k_min": h.k_min(), "k_max": h.k_max(), "points": cloud.len() });
    let levels: Vec<(i32, &[usize])> = h.levels().collect();

    let per_level: Vec<(Option<String>, Option<String>, Option<String>)> = levels
        .par_iter()
        .map(|&(k, centers)| {
            let r = h.delta().pow(k);
            let nesting = (k < h.k_max()).then(|| {
                centers.iter().find(|&&p| h.index_of(k + 1, p).is_none()).map(|&p| {
                    format!("z = {} in A_{k} but not in A_{}", cloud.id(p), k + 1)
                })
            });
            let separation = first_separation_violation(cloud, centers, r).map(|(x, y)| {
                format!("A_{k}: d({}, {}) = {} < {r}", cloud.id(x), cloud.id(y), cloud.distance(x, y))
            });
            let covering = (0..cloud.len())
                .find(|&x| !centers.iter().any(|&z| cloud.distance(x, z) < r))
                .map(|x| {
                    let d = centers.iter().map(|&z| cloud.distance(x, z)).fold(f64::INFINITY, f64::min);
                    format!("x = {} at distance {d} >= {r} from A_{k}", cloud.id(x))
                });
            (nesting.flatten(), separation, covering)
        })
        .collect();

    let first = |pick: fn(&(Option<String>, Option<String>, Option<String>)) -> &Option<String>| {
        per_level.iter().find_map(|t| pick(t).clone())
    };
    let finest = (h.level(h.k_max()).len() != cloud.len())
        .then(|| format!("A_{} has {} of {} points", h.k_max(), h.level(h.k_max()).len(), cloud.len()));
    let stability = levels.windows(2).find_map(|w| {
        let ((k, coarse), (_, fine)) = (w[0], w[1]);
        coarse
            .iter()
            .enumerate()
            .find(|&(alpha, &p)| fine.get(alpha) != Some(&p))
            .map(|(alpha, _)| format!("index {alpha} changes between levels {k} and {}", k + 1))
    });
    vec![
        CheckRow::new("hierarchy.nesting", params.clone()).outcome(first(|t| &t.0)),
        CheckRow::new("hierarchy.separation", params.clone()).outcome(first(|t| &t.1)),
        CheckRow::new("hierarchy.covering", params.clone()).outcome(first(|t| &t.2)),
        CheckRow::new("hierarchy.finest-level", params.clone()).outcome(finest),
        CheckRow::new("hierarchy.index-order", params).outcome(stability),
    ]
}

/// Searches every subset of `finer` for a coarser net at radius `r`: an
/// `r`-separated subset whose open `r`-balls cover the cloud. `Ok(None)` means
/// no such subset exists.
pub fn coarser_level_search(cloud: &MetricPointCloud, finer: &[usize], r: f64) -> Result<Option<Vec<usize>>> {
    const LIMIT: usize = 24;
    if finer.len() > LIMIT {
        return Err(Error::BudgetExceeded { required: 1u128 << finer.len(), budget: 1u128 << LIMIT });
    }
    let found = (1u64..1u64 << finer.len()).into_par_iter().find_first(|&mask| {
        let subset: Vec<usize> = (0..finer.len()).filter(|b| mask >> b & 1 == 1).map(|b| finer[b]).collect();
        first_separation_violation(cloud, &subset, r).is_none()
            && (0..cloud.len()).all(|x| subset.iter().any(|&z| cloud.distance(x, z) < r))
    });
    Ok(found.map(|mask| (0..finer.len()).filter(|b| mask >> b & 1 == 1).map(|b| finer[b]).collect()))
}

/// Sets `C^n_k`, `0 <= k < n <= n_max`, built around `x0` with base `Delta > 2`.
#[derive(Clone, Debug)]
pub struct LayeredConstruction {
    big_delta: f64,
    x0: usize,
    n_max: u32,
    sets: BTreeMap<(u32, u32), Vec<usize>>,
    order: Vec<(u32, u32)>,
}

impl LayeredConstruction {
    pub fn build(cloud: &MetricPointCloud, x0: usize, big_delta: f64, n_max: u32) -> Result<Self> {
        if !(big_delta > 2.0) || !big_delta.is_finite() {
            return Err(Error::InvalidParameter(format!("Delta = {big_delta} must exceed 2")));
        }
        if n_max == 0 {
            return Err(Error::InvalidParameter("n_max must be at least 1".into()));
        }
        if x0 >= cloud.len() {
            return Err(Error::InvalidParameter(format!("base point index {x0} outside the cloud")));
        }
        let mut lc = LayeredConstruction { big_delta, x0, n_max, sets: BTreeMap::new(), order: Vec::new() };
        for m in 0..n_max {
            for j in (0..=m).rev() {
                let within = cloud.ball(x0, lc.radius(m + 1, j));
                let r = big_delta.powi(j as i32);
                let set = if j == m {
                    maximal_separated_extension(cloud, r, &[x0], &within)?
                } else {
                    let mut seed = lc.sets.get(&(m, j)).cloned().unwrap_or_default();
                    let present = PointSet::from_indices(cloud.len(), seed.iter().copied());
                    seed.extend(lc.sets[&(m + 1, j + 1)].iter().copied().filter(|&p| !present.contains(p)));
                    maximal_separated_extension(cloud, r, &seed, &within).map_err(|e| {
                        Error::Internal(format!("seed for C^{}_{j} is not separated: {e}", m + 1))
                    })?
                };
                lc.sets.insert((m + 1, j), set);
                lc.order.push((m + 1, j));
            }
        }
        Ok(lc)
    }

    pub fn big_delta(&self) -> f64 {
        self.big_delta
    }

    pub fn base_point(&self) -> usize {
        self.x0
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// `R^n_k = Delta^n - sum_{i=k}^{n-1} Delta^i`.
    pub fn radius(&self, n: u32, k: u32) -> f64 {
        let d = self.big_delta;
        d.powi(n as i32) - (k..n).map(|i| d.powi(i as i32)).sum::<f64>()
    }

    /// `C^n_k` in insertion order.
    pub fn set(&self, n: u32, k: u32) -> &[usize] {
        &self.sets[&(n, k)]
    }

    /// Construction order of the pairs `(n, k)`.
    pub fn order(&self) -> &[(u32, u32)] {
        &self.order
    }

    /// Exhaustive check of the five layered properties over all built indices.
    pub fn verify(&self, cloud: &MetricPointCloud) -> Vec<CheckRow> {
        let params = json!({ "Delta": self.big_delta, "n_max": self.n_max, "x0": cloud.id(self.x0) });
        let n_pts = cloud.len();
        let as_set = |n, k| PointSet::from_indices(n_pts, self.set(n, k).iter().copied());
        let pairs: Vec<(u32, u32)> = self.order.clone();

        let monotone = pairs.iter().find_map(|&(n, k)| {
            let here = as_set(n, k);
            if n < self.n_max {
                if let Some(p) = here.first_outside(&as_set(n + 1, k)) {
                    return Some(format!("{} in C^{n}_{k} but not C^{}_{k}", cloud.id(p), n + 1));
                }
            }
            if k + 1 < n {
                if let Some(p) = as_set(n, k + 1).first_outside(&here) {
                    return Some(format!("{} in C^{n}_{} but not C^{n}_{k}", cloud.id(p), k + 1));
                }
            }
            None
        });
        let separated = pairs.iter().find_map(|&(n, k)| {
            first_separation_violation(cloud, self.set(n, k), self.big_delta.powi(k as i32))
                .map(|(x, y)| format!("C^{n}_{k}: d({}, {}) < Delta^{k}", cloud.id(x), cloud.id(y)))
        });
        let maximal = pairs.iter().find_map(|&(n, k)| {
            let ball = cloud.ball(self.x0, self.radius(n, k));
            maximality_violation(cloud, self.set(n, k), self.big_delta.powi(k as i32), &ball)
                .map(|z| format!("{} could be added to C^{n}_{k}", cloud.id(z)))
        });
        let region = pairs.iter().find_map(|&(n, k)| {
            let mut allowed = cloud.ball(self.x0, self.radius(n, k));
            if k + 1 < n {
                allowed = allowed.union(&as_set(n, k + 1));
            }
            as_set(n, k).first_outside(&allowed).map(|p| format!("{} in C^{n}_{k} escapes its region", cloud.id(p)))
        });
        let triples: Vec<(u32, u32, u32)> = (1..self.n_max)
            .flat_map(|n| (0..=n).flat_map(move |k| (0..=k.min(n - 1)).map(move |i| (n, i, k))))
            .collect();
        let union_sep = triples.par_iter().find_map_first(|&(n, i, k)| {
            let mut union = self.set(n, i).to_vec();
            let present = PointSet::from_indices(n_pts, union.iter().copied());
            union.extend(self.set(n + 1, k).iter().copied().filter(|&p| !present.contains(p)));
            first_separation_violation(cloud, &union, self.big_delta.powi(i as i32)).map(|(x, y)| {
                format!("C^{n}_{i} u C^{}_{k}: d({}, {}) < Delta^{i}", n + 1, cloud.id(x), cloud.id(y))
            })
        });
        let contains_base = (!self.set(1, 0).contains(&self.x0)).then(|| "C^1_0 misses x0".to_string());
        vec![
            CheckRow::new("layered.contains-base", params.clone()).outcome(contains_base),
            CheckRow::new("layered.monotone", params.clone()).outcome(monotone),
            CheckRow::new("layered.separated", params.clone()).outcome(separated),
            CheckRow::new("layered.maximal", params.clone()).outcome(maximal),
            CheckRow::new("layered.region", params.clone()).outcome(region),
            CheckRow::new("layered.union-separated", params).outcome(union_sep),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter() -> Delta {
        Delta::new(1, 4).unwrap()
    }

    #[test]
    fn line_hierarchy_example() {
        let c = MetricPointCloud::line(10, 1.0).unwrap();
        let h = DyadicHierarchy::build(&c, quarter(), -2).unwrap();
        assert_eq!(h.k_max(), 0);
        assert_eq!(h.level(-2), &[0]);
        assert_eq!(h.level(-1), &[0, 4, 8]);
        assert_eq!(h.level(0), &[0, 4, 8, 1, 2, 3, 5, 6, 7, 9]);
        assert!(verify_hierarchy(&c, &h).iter().all(|r| r.pass == Some(true)));
        assert_eq!(coarsest_level(&c, quarter()), -2);
    }

    #[test]
    fn single_and_pair() {
        let one = MetricPointCloud::line(1, 1.0).unwrap();
        let h = DyadicHierarchy::build(&one, quarter(), 0).unwrap();
        assert_eq!(h.num_levels(), 1);
        assert_eq!(h.level(0), &[0]);
        let two = MetricPointCloud::line(2, 1.0).unwrap();
        let h = DyadicHierarchy::build(&two, quarter(), -1).unwrap();
        assert_eq!(h.level(-1).len(), 1);
        assert_eq!(h.level(0).len(), 2);
        assert!(DyadicHierarchy::build(&two, quarter(), 0).is_err());
    }

    #[test]
    fn verify_reports_corruption() {
        let c = MetricPointCloud::line(10, 1.0).unwrap();
        let bad = DyadicHierarchy::from_levels(10, quarter(), -1, vec![vec![0, 8], (0..10).collect()]).unwrap();
        let rows = verify_hierarchy(&c, &bad);
        let covering = rows.iter().find(|r| r.check == "hierarchy.covering").unwrap();
        assert_eq!(covering.pass, Some(false));
        assert!(covering.counterexample.as_ref().unwrap().starts_with("x = 4 "));

        let h = DyadicHierarchy::build(&c, quarter(), -2).unwrap();
        let mut levels: Vec<Vec<usize>> = h.levels().map(|(_, l)| l.to_vec()).collect();
        levels[2].retain(|&p| p != 4);
        let dropped = DyadicHierarchy::from_levels(10, quarter(), -2, levels).unwrap();
        let rows = verify_hierarchy(&c, &dropped);
        assert_eq!(rows.iter().find(|r| r.check == "hierarchy.nesting").unwrap().pass, Some(false));
    }

    #[test]
    fn json_round_trip() {
        let c = MetricPointCloud::grid(4, 4, 1.0).unwrap();
        let h = DyadicHierarchy::build_auto(&c, Delta::new(1, 10).unwrap()).unwrap();
        let text = serde_json::to_string(&h.to_json(&c)).unwrap();
        let back = DyadicHierarchy::from_json(&c, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn layered_examples() {
        let c = MetricPointCloud::line(41, 1.0).unwrap();
        let lc = LayeredConstruction::build(&c, 0, 3.0, 4).unwrap();
        assert_eq!(lc.radius(1, 0), 2.0);
        assert_eq!(lc.radius(2, 1), 6.0);
        assert_eq!(lc.set(1, 0), &[0, 1]);
        assert_eq!(lc.set(2, 1), &[0, 3]);
        assert_eq!(&lc.order()[..3], &[(1, 0), (2, 1), (2, 0)]);
        let rows = lc.verify(&c);
        assert!(rows.iter().all(|r| r.pass == Some(true)), "{rows:?}");
        assert!(LayeredConstruction::build(&c, 0, 2.0, 3).is_err());
    }

    #[test]
    fn remark_configuration_is_infeasible() {
        let ids: Vec<i64> = (-29..30).chain(51..110).collect();
        let cloud = MetricPointCloud::from_coordinates(
            (0..ids.len() as u64).collect(),
            ids.iter().map(|&i| vec![i as f64 / 10.0]).collect(),
        )
        .unwrap();
        let zero = ids.iter().position(|&i| i == 0).unwrap();
        let eight = ids.iter().position(|&i| i == 80).unwrap();
        let third = Delta::new(1, 3).unwrap();
        assert_eq!(coarser_level_search(&cloud, &[zero, eight], third.pow(-1)).unwrap().map(|s| s.len()), Some(2));
        assert_eq!(coarser_level_search(&cloud, &[zero, eight], third.pow(-2)).unwrap(), None);
    }
}
