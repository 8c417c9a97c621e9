//! Random radius draws, the uniform model on `{0, ..., floor(1/δ)}` and exact
//! annulus probabilities.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cubes::{parent_index, RadiusSchedule};
use crate::error::{Error, Result};
use crate::hierarchy::DyadicHierarchy;
use crate::metric::MetricPointCloud;
use crate::report::CheckRow;
use crate::scale::Delta;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignmentKind {
    /// One draw per level, independent across levels.
    Independent,
    /// One draw shared by every level.
    Adjacent,
}

/// Draws `a_k` for levels `k_min..=k_max`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusAssignment {
    pub kind: AssignmentKind,
    pub k_min: i32,
    pub values: Vec<u32>,
}

impl RadiusAssignment {
    pub fn new(delta: Delta, kind: AssignmentKind, k_min: i32, values: Vec<u32>) -> Result<Self> {
        if let Some(&a) = values.iter().find(|&&a| a > delta.max_draw()) {
            return Err(Error::InvalidParameter(format!("draw {a} exceeds floor(1/delta) = {}", delta.max_draw())));
        }
        if kind == AssignmentKind::Adjacent && values.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidParameter("adjacent assignments use one draw for every level".into()));
        }
        Ok(RadiusAssignment { kind, k_min, values })
    }

    pub fn adjacent(delta: Delta, k_min: i32, k_max: i32, draw: u32) -> Result<Self> {
        Self::new(delta, AssignmentKind::Adjacent, k_min, vec![draw; (k_max - k_min + 1) as usize])
    }

    pub fn k_max(&self) -> i32 {
        self.k_min + self.values.len() as i32 - 1
    }

    pub fn get(&self, k: i32) -> u32 {
        self.values[(k - self.k_min) as usize]
    }
}

/// The uniform law on `S = floor(1/δ) + 1` draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbabilityModel {
    pub delta: Delta,
}

impl ProbabilityModel {
    pub fn new(delta: Delta) -> Self {
        ProbabilityModel { delta }
    }

    pub fn support_size(&self) -> u32 {
        self.delta.support_size()
    }

    pub fn probability(&self, _value: u32) -> Rational {
        Rational::new(1, self.support_size() as i128)
    }

    pub fn total(&self) -> Rational {
        (0..self.support_size()).map(|a| self.probability(a)).sum()
    }
}

pub fn schedule_from_assignment(delta: Delta, a: &RadiusAssignment) -> Result<RadiusSchedule> {
    RadiusSchedule::from_draws(delta, a.k_min, a.values.clone())
}

const ADJACENT_STREAM: u64 = u64::MAX;

/// Counter-based draw keyed by `(seed, sample, stream)`; independent of call order.
pub fn keyed_draw(seed: u64, sample: u64, stream: u64, support: u32) -> u32 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&sample.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng.gen_range(0..support)
}

fn level_stream(k: i32) -> u64 {
    k as i64 as u64
}

/// Assignment number `sample` of the stream identified by `seed`.
pub fn sample_assignment_indexed(delta: Delta, kind: AssignmentKind, k_min: i32, k_max: i32, seed: u64, sample: u64) -> RadiusAssignment {
    let s = delta.support_size();
    let values = match kind {
        AssignmentKind::Independent => (k_min..=k_max).map(|k| keyed_draw(seed, sample, level_stream(k), s)).collect(),
        AssignmentKind::Adjacent => vec![keyed_draw(seed, sample, ADJACENT_STREAM, s); (k_max - k_min + 1) as usize],
    };
    RadiusAssignment { kind, k_min, values }
}

pub fn sample_assignment(delta: Delta, kind: AssignmentKind, k_min: i32, k_max: i32, seed: u64) -> RadiusAssignment {
    sample_assignment_indexed(delta, kind, k_min, k_max, seed, 0)
}

/// Exact probability that `dist` falls in the open annulus of half-width `ε`
/// around `m (δ^k + a δ^(k+1))`, with the closed-form bound beside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnnulusProbability {
    pub probability: Rational,
    pub bound: Rational,
    pub hits: u32,
    pub support: u32,
}

impl AnnulusProbability {
    pub fn within_bound(&self) -> bool {
        self.probability <= self.bound
    }
}

pub fn annulus_hit_probability(delta: Delta, k: i32, m: Rational, dist: Rational, eps: Rational) -> Result<AnnulusProbability> {
    if m <= Rational::zero() || eps <= Rational::zero() {
        return Err(Error::InvalidParameter("m and eps must be positive".into()));
    }
    let dk = delta.pow_exact(k);
    let dk1 = delta.pow_exact(k + 1);
    let support = delta.support_size();
    let hits = (0..support)
        .filter(|&a| {
            let radius = m * (dk + Rational::from_integer(a as i128) * dk1);
            radius - eps < dist && dist < radius + eps
        })
        .count() as u32;
    Ok(AnnulusProbability {
        probability: Rational::new(hits as i128, support as i128),
        bound: (Rational::from_integer(2) * eps + m * dk1) / (m * dk),
        hits,
        support,
    })
}

/// Summary of an exhaustive annulus sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub cases: usize,
    pub lemma_violations: usize,
    pub remark_violations: usize,
    pub max_probability: f64,
    /// The constant bound checked for `ε <= 4 δ^(k+1)`: `9δ` for `m = 1`, `33δ` for `m = 1/4`.
    pub remark_bound: Option<String>,
}

/// Distances `j 3δ^k / (points - 1)` for `j < points`.
pub fn distance_grid(delta: Delta, k: i32, points: usize) -> Vec<Rational> {
    let top = Rational::from_integer(3) * delta.pow_exact(k);
    (0..points).map(|j| top * Rational::new(j as i128, (points.max(2) - 1) as i128)).collect()
}

/// `{δ^(k+2), δ^(k+1), 4 δ^(k+1)}`.
pub fn default_eps_grid(delta: Delta, k: i32) -> Vec<Rational> {
    vec![delta.pow_exact(k + 2), delta.pow_exact(k + 1), Rational::from_integer(4) * delta.pow_exact(k + 1)]
}

fn remark_constant(delta: Delta, m: Rational) -> Option<(Rational, &'static str)> {
    if m == Rational::one() {
        Some((Rational::from_integer(9) * delta.as_rational(), "9 delta"))
    } else if m == Rational::new(1, 4) {
        Some((Rational::from_integer(33) * delta.as_rational(), "33 delta"))
    } else {
        None
    }
}

/// Every `(dist, ε)` on the grids: the closed-form bound and, for `ε <= 4δ^(k+1)`
/// and `m ∈ {1, 1/4}`, the remark constant.
pub fn annulus_sweep(delta: Delta, k: i32, m: Rational, dists: &[Rational], eps_grid: &[Rational]) -> Result<SweepSummary> {
    let limit = Rational::from_integer(4) * delta.pow_exact(k + 1);
    let constant = remark_constant(delta, m);
    let results: Vec<(bool, bool, f64)> = eps_grid
        .iter()
        .flat_map(|&e| dists.iter().map(move |&d| (d, e)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(d, e)| {
            let p = annulus_hit_probability(delta, k, m, d, e)?;
            let remark_ok = match constant {
                Some((c, _)) if e <= limit => p.probability <= c,
                _ => true,
            };
            let value = *p.probability.numer() as f64 / *p.probability.denom() as f64;
            Ok((p.within_bound(), remark_ok, value))
        })
        .collect::<Result<_>>()?;
    Ok(SweepSummary {
        cases: results.len(),
        lemma_violations: results.iter().filter(|r| !r.0).count(),
        remark_violations: results.iter().filter(|r| !r.1).count(),
        max_probability: results.iter().map(|r| r.2).fold(0.0, f64::max),
        remark_bound: constant.map(|c| c.1.to_string()),
    })
}

/// Remark sweep at levels `0` and `1` for `m ∈ {1, 1/4}`, with `ε` on
/// `{δ^(k+2), δ^(k+1), 2δ^(k+1), 4δ^(k+1)}` and 200 distances.
pub fn remark_constants_check(delta: Delta) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for k in [0, 1] {
        let d1 = delta.pow_exact(k + 1);
        let eps = vec![delta.pow_exact(k + 2), d1, Rational::from_integer(2) * d1, Rational::from_integer(4) * d1];
        for m in [Rational::one(), Rational::new(1, 4)] {
            let summary = annulus_sweep(delta, k, m, &distance_grid(delta, k, 200), &eps)?;
            let params = json!({ "delta": delta.to_string(), "k": k, "m": m.to_string() });
            let fail = (summary.remark_violations > 0)
                .then(|| format!("{} grid points exceed {}", summary.remark_violations, summary.remark_bound.clone().unwrap_or_default()));
            rows.push(
                CheckRow::new("random.remark-constants", params)
                    .outcome(fail)
                    .measured(json!({ "cases": summary.cases, "max_probability": summary.max_probability })),
            );
        }
    }
    Ok(rows)
}

/// `parent[j][β][a]`: parent at level `k_min + j` of `z_β^(k_min + j + 1)`
/// when the level draw is `a`. The parent depends on nothing else.
#[derive(Clone, Debug)]
pub struct ParentTables {
    delta: Delta,
    k_min: i32,
    support: u32,
    tables: Vec<Vec<Vec<u32>>>,
}

impl ParentTables {
    pub fn build(cloud: &MetricPointCloud, h: &DyadicHierarchy) -> Result<Self> {
        let delta = h.delta();
        let support = delta.support_size();
        let tables = (h.k_min()..h.k_max())
            .map(|k| {
                h.level(k + 1)
                    .par_iter()
                    .map(|&p| {
                        (0..support)
                            .map(|a| parent_index(cloud, h, k, p, delta.inner_radius(k, a)).map(|x| x as u32))
                            .collect::<Result<Vec<u32>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ParentTables { delta, k_min: h.k_min(), support, tables })
    }

    pub fn support(&self) -> u32 {
        self.support
    }

    pub fn delta(&self) -> Delta {
        self.delta
    }

    /// Parent at level `k` of `(k + 1, β)` under draw `a`.
    #[inline]
    pub fn parent(&self, k: i32, beta: usize, a: u32) -> usize {
        self.tables[(k - self.k_min) as usize][beta][a as usize] as usize
    }

    pub fn level_width(&self, k: i32) -> usize {
        self.tables[(k - self.k_min) as usize].len()
    }

    /// Parent maps for a full draw vector indexed from `k_min`.
    pub fn parents_for(&self, draws: &[u32]) -> Vec<Vec<u32>> {
        self.tables
            .iter()
            .enumerate()
            .map(|(j, level)| level.iter().map(|row| row[draws[j] as usize]).collect())
            .collect()
    }

    /// Level-`k` cube of the finest-level index `leaf`, reading draws
    /// `draws[j]` for level `k_min + j`.
    #[inline]
    pub fn cube_of_leaf(&self, leaf: usize, k: i32, k_max: i32, draws: &[u32]) -> usize {
        let mut b = leaf;
        for j in (k..k_max).rev() {
            b = self.parent(j, b, draws[(j - self.k_min) as usize]);
        }
        b
    }
}
