//! Dyadic splines `s_α^k(x) = P(x ∈ Q_α^k)` for independently drawn radii,
//! computed exactly by enumerating the draws below level `k`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{enumeration_size, rational_to_f64};
use crate::hierarchy::DyadicHierarchy;
use crate::metric::MetricPointCloud;
use crate::random::{keyed_draw, ParentTables};
use crate::report::CheckRow;
use crate::Rational;

/// Distribution of the level-`k` cube containing `x`, indexed by `α`.
pub fn spline_distribution(h: &DyadicHierarchy, tables: &ParentTables, x: usize, k: i32, budget: u128) -> Result<Vec<Rational>> {
    let total = enumeration_size(h, k, budget)?;
    let leaf = h.index_of(h.k_max(), x).ok_or_else(|| Error::InvalidParameter(format!("no point index {x}")))?;
    let mut counts = vec![0u128; h.level(k).len()];
    fn walk(t: &ParentTables, k: i32, j: i32, b: usize, counts: &mut [u128]) {
        if j < k {
            counts[b] += 1;
            return;
        }
        for a in 0..t.support() {
            walk(t, k, j - 1, t.parent(j, b, a), counts);
        }
    }
    walk(tables, k, h.k_max() - 1, leaf, &mut counts);
    Ok(counts.into_iter().map(|c| Rational::new(c as i128, total as i128)).collect())
}

pub fn spline_exact(h: &DyadicHierarchy, tables: &ParentTables, k: i32, alpha: usize, x: usize, budget: u128) -> Result<Rational> {
    let dist = spline_distribution(h, tables, x, k, budget)?;
    dist.get(alpha).copied().ok_or_else(|| Error::InvalidParameter(format!("level {k} has no center {alpha}")))
}

/// All level-`k` splines on all points.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineTable {
    pub k: i32,
    /// `values[x][α]`
    pub values: Vec<Vec<Rational>>,
}

impl SplineTable {
    pub fn build(h: &DyadicHierarchy, tables: &ParentTables, k: i32, budget: u128) -> Result<Self> {
        let per_point = enumeration_size(h, k, budget)?;
        let n = h.n_points() as u128;
        if per_point.saturating_mul(n) > budget {
            return Err(Error::BudgetExceeded { required: per_point.saturating_mul(n), budget });
        }
        let values = (0..h.n_points())
            .into_par_iter()
            .map(|x| spline_distribution(h, tables, x, k, budget))
            .collect::<Result<_>>()?;
        Ok(SplineTable { k, values })
    }

    /// `s_α^k(x)`
    pub fn get(&self, alpha: usize, x: usize) -> Rational {
        self.values[x][alpha]
    }

    pub fn num_splines(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn to_json(&self, cloud: &MetricPointCloud, h: &DyadicHierarchy) -> SplineJson {
        let mut splines = BTreeMap::new();
        for alpha in 0..self.num_splines() {
            let row: BTreeMap<String, String> = (0..self.values.len())
                .filter(|&x| !self.get(alpha, x).is_zero())
                .map(|x| (cloud.id(x).to_string(), self.get(alpha, x).to_string()))
                .collect();
            splines.insert(format!("{}:{alpha}", self.k), row);
        }
        let centers = h.level(self.k).iter().map(|&z| cloud.id(z)).collect();
        SplineJson { k: self.k, centers, splines }
    }
}

/// Splines keyed by `"k:alpha"`, values as exact fractions keyed by point id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplineJson {
    pub k: i32,
    pub centers: Vec<crate::PointId>,
    pub splines: BTreeMap<String, BTreeMap<String, String>>,
}

/// Finest-level splines are the point indicators.
fn finest_table(h: &DyadicHierarchy) -> SplineTable {
    let k = h.k_max();
    let width = h.level(k).len();
    let values = (0..h.n_points())
        .map(|x| {
            let mut row = vec![Rational::zero(); width];
            row[h.index_of(k, x).expect("finest level holds every point")] = Rational::one();
            row
        })
        .collect();
    SplineTable { k, values }
}

/// `p[α][β] = P((k+1, β) has parent (k, α))`.
pub fn refinement_coefficients(h: &DyadicHierarchy, tables: &ParentTables, k: i32) -> Result<Vec<Vec<Rational>>> {
    h.check_level(k)?;
    if k >= h.k_max() {
        return Err(Error::LevelOutOfRange { level: k, k_min: h.k_min(), k_max: h.k_max() - 1 });
    }
    let s = tables.support() as i128;
    let coarse = h.level(k).len();
    let fine = h.level(k + 1).len();
    let mut p = vec![vec![Rational::zero(); fine]; coarse];
    for beta in 0..fine {
        for a in 0..tables.support() {
            p[tables.parent(k, beta, a)][beta] += Rational::new(1, s);
        }
    }
    Ok(p)
}

/// Monte Carlo counts of the level-`k` cube containing `x`.
pub fn spline_mc(h: &DyadicHierarchy, tables: &ParentTables, x: usize, k: i32, n: u64, seed: u64) -> Result<Vec<u64>> {
    h.check_level(k)?;
    let leaf = h.index_of(h.k_max(), x).ok_or_else(|| Error::InvalidParameter(format!("no point index {x}")))?;
    let width = h.level(k).len();
    let (k_min, k_max) = (h.k_min(), h.k_max());
    Ok((0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; width],
            |mut acc, i| {
                let mut draws = vec![0u32; h.num_levels()];
                for j in k..k_max {
                    draws[(j - k_min) as usize] = keyed_draw(seed, i, j as i64 as u64, tables.support());
                }
                acc[tables.cube_of_leaf(leaf, k, k_max, &draws)] += 1;
                acc
            },
        )
        .reduce(|| vec![0u64; width], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect()))
}

/// Spline axioms at level `k`: interpolation, partition of unity, the
/// refinement identity with coefficients summing to one, and the support
/// radii (asserted for `δ <= 1/60`, measured otherwise).
pub fn verify_splines(cloud: &MetricPointCloud, h: &DyadicHierarchy, tables: &ParentTables, k: i32, budget: u128) -> Result<Vec<CheckRow>> {
    let table = SplineTable::build(h, tables, k, budget)?;
    let mut rows = check_spline_table(cloud, h, &table);
    let params = json!({ "delta": h.delta().to_string(), "k": k });
    if k < h.k_max() {
        let p = refinement_coefficients(h, tables, k)?;
        let sums = (0..h.level(k + 1).len()).find_map(|beta| {
            let s: Rational = p.iter().map(|row| row[beta]).sum();
            (s != Rational::one()).then(|| format!("coefficients of beta = {beta} sum to {s}"))
        });
        rows.push(CheckRow::new("splines.coefficient-sum", params.clone()).outcome(sums));
        let finer = if k + 1 == h.k_max() { finest_table(h) } else { SplineTable::build(h, tables, k + 1, budget)? };
        rows.push(CheckRow::new("splines.refinement", params).outcome(refinement_violation(cloud, &table, &finer, &p)));
    }
    Ok(rows)
}

pub fn refinement_violation(cloud: &MetricPointCloud, coarse: &SplineTable, fine: &SplineTable, p: &[Vec<Rational>]) -> Option<String> {
    for x in 0..coarse.values.len() {
        for (alpha, row) in p.iter().enumerate() {
            let rhs: Rational = row.iter().enumerate().map(|(beta, &c)| c * fine.get(beta, x)).sum();
            if rhs != coarse.get(alpha, x) {
                return Some(format!("x = {}, alpha = {alpha}: {} != {rhs}", cloud.id(x), coarse.get(alpha, x)));
            }
        }
    }
    None
}

/// Checks that need only the table itself.
pub fn check_spline_table(cloud: &MetricPointCloud, h: &DyadicHierarchy, t: &SplineTable) -> Vec<CheckRow> {
    let k = t.k;
    let delta = h.delta();
    let params = json!({ "delta": delta.to_string(), "k": k });
    let centers = h.level(k);

    let interpolation = centers.iter().enumerate().find_map(|(beta, &z)| {
        (0..centers.len()).find_map(|alpha| {
            let want = if alpha == beta { Rational::one() } else { Rational::zero() };
            (t.get(alpha, z) != want).then(|| format!("s_{alpha}({}) = {}", cloud.id(z), t.get(alpha, z)))
        })
    });
    let partition = (0..t.values.len()).find_map(|x| {
        let s: Rational = t.values[x].iter().copied().sum();
        (s != Rational::one()).then(|| format!("x = {}: sum {s}", cloud.id(x)))
    });

    let side = delta.pow(k);
    let mut core_violation = None;
    let mut reach_violation = None;
    let mut max_reach = 0.0f64;
    let mut min_core = f64::INFINITY;
    for (alpha, &z) in centers.iter().enumerate() {
        for x in 0..t.values.len() {
            let d = cloud.distance(x, z) / side;
            let v = t.get(alpha, x);
            if v > Rational::zero() {
                max_reach = max_reach.max(d);
                if d >= 3.0 && reach_violation.is_none() {
                    reach_violation = Some(format!("s_{alpha}({}) = {v} at distance {d} delta^k", cloud.id(x)));
                }
            }
            if v < Rational::one() {
                min_core = min_core.min(d);
                if d < 0.2 && core_violation.is_none() {
                    core_violation = Some(format!("s_{alpha}({}) = {v} at distance {d} delta^k", cloud.id(x)));
                }
            }
        }
    }
    let support = CheckRow::new("splines.support", params.clone())
        .measured(json!({ "max_reach": max_reach, "min_core": if min_core.is_finite() { json!(min_core) } else { json!(null) } }));
    let support = if delta.satisfies_cube_hypothesis() { support.outcome(reach_violation.or(core_violation)) } else { support };

    vec![
        CheckRow::new("splines.interpolation", params.clone()).outcome(interpolation),
        CheckRow::new("splines.partition", params).outcome(partition),
        support,
    ]
}

/// `max |s_α(x) - s_α(y)| / (d(x, y)/δ^k)^η` over all `α` and pairs.
pub fn holder_quotient(cloud: &MetricPointCloud, h: &DyadicHierarchy, t: &SplineTable, eta: f64) -> f64 {
    let side = h.delta().pow(t.k);
    let n = t.values.len();
    let support: Vec<Vec<(usize, f64)>> = t
        .values
        .iter()
        .map(|row| row.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(a, &v)| (a, rational_to_f64(v))).collect())
        .collect();
    (0..n)
        .into_par_iter()
        .map(|x| {
            let mut best = 0.0f64;
            for y in x + 1..n {
                let scale = (cloud.distance(x, y) / side).powf(eta);
                let mut diff = 0.0f64;
                for &(a, v) in &support[x] {
                    diff = diff.max((v - rational_to_f64(t.get(a, y))).abs());
                }
                for &(a, v) in &support[y] {
                    diff = diff.max((v - rational_to_f64(t.get(a, x))).abs());
                }
                best = best.max(diff / scale);
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::DEFAULT_BUDGET;
    use crate::scale::Delta;

    fn setup(n: usize, s: f64) -> (MetricPointCloud, DyadicHierarchy, ParentTables) {
        let c = MetricPointCloud::line(n, s).unwrap();
        let h = DyadicHierarchy::build_auto(&c, Delta::new(1, 10).unwrap()).unwrap();
        let t = ParentTables::build(&c, &h).unwrap();
        (c, h, t)
    }

    #[test]
    fn spline_axioms_hold() {
        let (c, h, t) = setup(12, 0.3);
        for k in h.k_min()..=h.k_max() {
            let rows = verify_splines(&c, &h, &t, k, DEFAULT_BUDGET).unwrap();
            assert!(rows.iter().all(|r| !r.failed()), "{rows:?}");
        }
    }

    #[test]
    fn refinement_detects_corruption() {
        let (c, h, t) = setup(12, 0.3);
        let k = h.k_max() - 1;
        let coarse = SplineTable::build(&h, &t, k, DEFAULT_BUDGET).unwrap();
        let fine = finest_table(&h);
        let mut p = refinement_coefficients(&h, &t, k).unwrap();
        assert!(refinement_violation(&c, &coarse, &fine, &p).is_none());
        let (a, b) = (0..p.len()).flat_map(|a| (0..p[0].len()).map(move |b| (a, b))).find(|&(a, b)| p[a][b] > Rational::zero() && p[a][b] < Rational::one()).unwrap();
        p[a][b] -= Rational::new(1, 11);
        assert!(refinement_violation(&c, &coarse, &fine, &p).is_some());
    }

    #[test]
    fn mc_agrees_with_exact() {
        let (_, h, t) = setup(12, 0.3);
        let k = h.k_max() - 1;
        let exact = spline_distribution(&h, &t, 2, k, DEFAULT_BUDGET).unwrap();
        let counts = spline_mc(&h, &t, 2, k, 20_000, 3).unwrap();
        for (e, c) in exact.iter().zip(&counts) {
            assert!((rational_to_f64(*e) - *c as f64 / 20_000.0).abs() < 0.02);
        }
    }

    #[test]
    fn json_lists_nonzero_values() {
        let (c, h, t) = setup(6, 0.3);
        let table = SplineTable::build(&h, &t, h.k_max(), DEFAULT_BUDGET).unwrap();
        let j = table.to_json(&c, &h);
        assert_eq!(j.splines.len(), 6);
        let key = format!("{}:3", h.k_max());
        assert_eq!(j.splines[&key].len(), 1);
        assert_eq!(j.splines[&key][&j.centers[3].to_string()], "1");
    }
}
