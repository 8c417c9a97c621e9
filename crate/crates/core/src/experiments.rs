//! Boundary-probability experiments for independent systems and the ball
//! search over adjacent systems.

use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::on_labeled_boundary;
use crate::cubes::{parent_index, CubeSystem};
use crate::error::{Error, Result};
use crate::hierarchy::DyadicHierarchy;
use crate::metric::MetricPointCloud;
use crate::random::{keyed_draw, ParentTables};
use crate::Rational;

/// Default number of enumerated outcomes an exact computation may visit.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub delta: f64,
    pub m: u64,
    /// `C = 84 M^8`
    pub c: f64,
    /// `C_δ = 1/δ`
    pub c_delta: f64,
    /// `η_δ = 1 - log C / log(1/δ)`
    pub eta: f64,
    /// `δ <= 1/60`
    pub cube_regime: bool,
    /// `δ < 1/C`
    pub boundary_regime: bool,
    /// `δ < 1/(2C)`
    pub adjacent_regime: bool,
}

pub fn theory_constants(delta: f64, m: u64) -> Result<TheoryConstants> {
    if !(delta > 0.0 && delta < 1.0) || m == 0 {
        return Err(Error::InvalidParameter(format!("need 0 < delta < 1 and M >= 1, got {delta}, {m}")));
    }
    let c = 84.0 * (m as f64).powi(8);
    Ok(TheoryConstants {
        delta,
        m,
        c,
        c_delta: 1.0 / delta,
        eta: 1.0 - c.ln() / (1.0 / delta).ln(),
        cube_regime: delta <= 1.0 / 60.0,
        boundary_regime: delta < 1.0 / c,
        adjacent_regime: delta < 1.0 / (2.0 * c),
    })
}

/// `δ = C^(-j)`: the boundary exponent is exactly `1 - 1/j`.
pub fn eta_at_power(j: u32) -> Result<Rational> {
    if j == 0 {
        return Err(Error::InvalidParameter("j must be positive".into()));
    }
    Ok(Rational::one() - Rational::new(1, j as i128))
}

/// `C_δ (ε/δ^k)^η`.
pub fn theorem_bound(t: &TheoryConstants, eps: f64, delta_k: f64) -> f64 {
    t.c_delta * (eps / delta_k).powf(t.eta)
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (n, p) = (n as f64, successes as f64 / n as f64);
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub eps: f64,
    pub hits: u64,
    pub n: u64,
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
}

impl McEstimate {
    fn new(eps: f64, hits: u64, n: u64) -> Self {
        let (lo, hi) = wilson_interval(hits, n);
        McEstimate { eps, hits, n, p: hits as f64 / n as f64, lo, hi }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }
}

fn leaf(h: &DyadicHierarchy, x: usize) -> usize {
    h.index_of(h.k_max(), x).expect("finest level holds every point")
}

/// Points `y != x` with `d(x, y) < eps`, nearest first.
fn near_points(cloud: &MetricPointCloud, x: usize, eps: f64) -> Vec<(f64, usize)> {
    let mut v: Vec<(f64, usize)> =
        (0..cloud.len()).filter(|&y| y != x).map(|y| (cloud.distance(x, y), y)).filter(|p| p.0 < eps).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    v
}

/// Monte Carlo estimates of `P(x ∈ ∪_α ∂_ε Q_α^k)` for every `ε` of the grid,
/// sharing the same `n` independent samples. Sample `i` uses the counter
/// stream `(seed, i)`, so the result does not depend on the worker count.
pub fn boundary_probability_mc_grid(
    h: &DyadicHierarchy,
    tables: &ParentTables,
    cloud: &MetricPointCloud,
    x: usize,
    k: i32,
    eps_grid: &[f64],
    n: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    h.check_level(k)?;
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let max_eps = eps_grid.iter().copied().fold(0.0, f64::max);
    let near = near_points(cloud, x, max_eps);
    let leaves: Vec<usize> = near.iter().map(|&(_, y)| leaf(h, y)).collect();
    let x_leaf = leaf(h, x);
    let (k_min, k_max, support) = (h.k_min(), h.k_max(), tables.support());
    let hits: Vec<u64> = (0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; eps_grid.len()],
            |mut acc, i| {
                let mut draws = vec![0u32; h.num_levels()];
                for j in k..k_max {
                    draws[(j - k_min) as usize] = keyed_draw(seed, i, j as i64 as u64, support);
                }
                let own = tables.cube_of_leaf(x_leaf, k, k_max, &draws);
                // Distance of the nearest point in another cube.
                let split = near
                    .iter()
                    .zip(&leaves)
                    .find(|(_, &l)| tables.cube_of_leaf(l, k, k_max, &draws) != own)
                    .map(|(p, _)| p.0);
                if let Some(d) = split {
                    for (e, slot) in eps_grid.iter().zip(acc.iter_mut()) {
                        if d < *e {
                            *slot += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(|| vec![0u64; eps_grid.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    Ok(eps_grid.iter().zip(hits).map(|(&e, c)| McEstimate::new(e, c, n)).collect())
}

pub fn boundary_probability_mc(
    h: &DyadicHierarchy,
    tables: &ParentTables,
    cloud: &MetricPointCloud,
    x: usize,
    k: i32,
    eps: f64,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    Ok(boundary_probability_mc_grid(h, tables, cloud, x, k, &[eps], n, seed)?[0])
}

/// Exact boundary probability together with the level-wise factorization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactBoundary {
    pub eps: f64,
    pub outcomes: u128,
    #[serde(with = "rational_text")]
    pub probability: Rational,
    /// `P(x ∈ ∪_β ∂_{ε + 3δ^(j+1)} A_β^j)` for `j = k, ..., k_max - 1`.
    #[serde(with = "rational_list")]
    pub level_events: Vec<Rational>,
    #[serde(with = "rational_text")]
    pub product: Rational,
    /// Joint probability of all level events, by enumeration.
    #[serde(with = "rational_text")]
    pub joint: Rational,
    /// Whether every outcome in the cube event lies in all level events.
    pub implication: bool,
}

impl ExactBoundary {
    pub fn factorizes(&self) -> bool {
        self.joint == self.product
    }

    pub fn product_bounds(&self) -> bool {
        self.probability <= self.product
    }

    pub fn value(&self) -> f64 {
        rational_to_f64(self.probability)
    }
}

pub fn rational_to_f64(q: Rational) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

/// Number of outcomes `S^(k_max - k)`, refusing anything above `budget`.
pub fn enumeration_size(h: &DyadicHierarchy, k: i32, budget: u128) -> Result<u128> {
    h.check_level(k)?;
    let s = h.delta().support_size() as u128;
    let mut total: u128 = 1;
    for _ in k..h.k_max() {
        total = total.saturating_mul(s);
    }
    if total > budget {
        return Err(Error::BudgetExceeded { required: total, budget });
    }
    Ok(total)
}

/// Enumerates `(a_k, ..., a_(k_max - 1))` exhaustively.
pub fn boundary_probability_exact(
    h: &DyadicHierarchy,
    tables: &ParentTables,
    cloud: &MetricPointCloud,
    x: usize,
    k: i32,
    eps: f64,
    budget: u128,
) -> Result<ExactBoundary> {
    let outcomes = enumeration_size(h, k, budget)?;
    let delta = h.delta();
    let support = delta.support_size();
    let k_max = h.k_max();

    // Level events depend on one draw each.
    let level_table: Vec<Vec<bool>> = (k..k_max)
        .map(|j| {
            let width = eps + 3.0 * delta.pow(j + 1);
            let near = near_points(cloud, x, width);
            (0..support)
                .map(|a| {
                    let r = delta.inner_radius(j, a);
                    let own = parent_index(cloud, h, j, x, r)?;
                    for &(_, y) in &near {
                        if parent_index(cloud, h, j, y, r)? != own {
                            return Ok(true);
                        }
                    }
                    Ok(false)
                })
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<_>>()?;

    let near = near_points(cloud, x, eps);
    let mut start = vec![leaf(h, x)];
    start.extend(near.iter().map(|&(_, y)| leaf(h, y)));
    dedup_labels(&mut start);

    #[derive(Default, Clone, Copy)]
    struct Tally {
        cube: u128,
        joint: u128,
        violations: u128,
    }
    fn walk(t: &ParentTables, level_table: &[Vec<bool>], k: i32, j: i32, labels: &[usize], all_events: bool, out: &mut Tally) {
        if j < k {
            let hit = labels.len() > 1;
            out.cube += hit as u128;
            out.joint += all_events as u128;
            out.violations += (hit && !all_events) as u128;
            return;
        }
        let mut next = Vec::with_capacity(labels.len());
        for a in 0..t.support() {
            next.clear();
            next.extend(labels.iter().map(|&b| t.parent(j, b, a)));
            dedup_labels(&mut next);
            let ev = level_table[(j - k) as usize][a as usize];
            walk(t, level_table, k, j - 1, &next, all_events && ev, out);
        }
    }
    // Labels keep x first; the event is "some neighbor has another label",
    // which after dedup is "more than one distinct label".
    let tally = if k == k_max {
        let mut t = Tally::default();
        walk(tables, &level_table, k, k - 1, &start, true, &mut t);
        t
    } else {
        let j = k_max - 1;
        (0..support)
            .into_par_iter()
            .map(|a| {
                let mut t = Tally::default();
                let mut next: Vec<usize> = start.iter().map(|&b| tables.parent(j, b, a)).collect();
                dedup_labels(&mut next);
                walk(tables, &level_table, k, j - 1, &next, level_table[(j - k) as usize][a as usize], &mut t);
                t
            })
            .reduce(Tally::default, |p, q| Tally {
                cube: p.cube + q.cube,
                joint: p.joint + q.joint,
                violations: p.violations + q.violations,
            })
    };

    let total = outcomes as i128;
    let level_events: Vec<Rational> = level_table
        .iter()
        .map(|row| Rational::new(row.iter().filter(|&&b| b).count() as i128, support as i128))
        .collect();
    let product = level_events.iter().fold(Rational::one(), |acc, &p| acc * p);
    Ok(ExactBoundary {
        eps,
        outcomes,
        probability: Rational::new(tally.cube as i128, total),
        level_events,
        product,
        joint: Rational::new(tally.joint as i128, total),
        implication: tally.violations == 0,
    })
}

fn dedup_labels(v: &mut Vec<usize>) {
    let mut seen = Vec::with_capacity(v.len());
    v.retain(|&b| {
        if seen.contains(&b) {
            false
        } else {
            seen.push(b);
            true
        }
    });
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub eps: f64,
    pub estimate: McEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactBoundary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryExperimentResult {
    pub x: crate::PointId,
    pub k: i32,
    pub n: u64,
    pub seed: u64,
    pub rows: Vec<BoundaryRow>,
    /// Fitted on exact values when present, estimates otherwise.
    pub eta_emp: Option<f64>,
}

impl BoundaryExperimentResult {
    pub fn monotone(&self) -> bool {
        let exact: Vec<Rational> = self.rows.iter().filter_map(|r| r.exact.as_ref().map(|e| e.probability)).collect();
        let est: Vec<u64> = self.rows.iter().map(|r| r.estimate.hits).collect();
        exact.windows(2).all(|w| w[0] <= w[1]) && est.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Monte Carlo over an ascending `ε` grid, with exact values when `budget`
/// is given and admits the enumeration.
#[allow(clippy::too_many_arguments)]
pub fn run_boundary_experiment(
    h: &DyadicHierarchy,
    tables: &ParentTables,
    cloud: &MetricPointCloud,
    x: usize,
    k: i32,
    eps_grid: &[f64],
    n: u64,
    seed: u64,
    budget: Option<u128>,
) -> Result<BoundaryExperimentResult> {
    let mut grid = eps_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let estimates = boundary_probability_mc_grid(h, tables, cloud, x, k, &grid, n, seed)?;
    let rows = grid
        .iter()
        .zip(estimates)
        .map(|(&eps, estimate)| {
            let exact = budget.map(|b| boundary_probability_exact(h, tables, cloud, x, k, eps, b)).transpose()?;
            Ok(BoundaryRow { eps, estimate, exact })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> =
        rows.iter().map(|r| (r.eps, r.exact.as_ref().map_or(r.estimate.p, ExactBoundary::value))).collect();
    let eta_emp = fit_boundary_exponent(&points).ok().map(|f| f.eta);
    Ok(BoundaryExperimentResult { x: cloud.id(x), k, n, seed, rows, eta_emp })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub eta: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    pub used: usize,
}

/// Least-squares slope of `ln P` against `ln ε` over points with `0 < P < 1`.
pub fn fit_boundary_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    let usable: Vec<(f64, f64)> =
        points.iter().filter(|&&(e, p)| e > 0.0 && p > 0.0 && p < 1.0).map(|&(e, p)| (e.ln(), p.ln())).collect();
    if usable.len() < 3 {
        return Err(Error::Degenerate(format!("{} usable grid points, need 3", usable.len())));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all usable points share one epsilon".into()));
    }
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let eta = sxy / sxx;
    let intercept = my - eta * mx;
    Ok(ExponentFit {
        eta,
        intercept,
        residuals: usable.iter().map(|p| p.1 - (intercept + eta * p.0)).collect(),
        used: usable.len(),
    })
}

/// The `S` adjacent systems, system `ω` using draw `ω` at every level.
pub struct AdjacentSystems<'h> {
    pub systems: Vec<CubeSystem<'h>>,
}

impl<'h> AdjacentSystems<'h> {
    pub fn build(h: &'h DyadicHierarchy, tables: &ParentTables) -> Result<Self> {
        let levels = h.num_levels();
        let systems = (0..tables.support())
            .map(|w| CubeSystem::from_parents(h, tables.parents_for(&vec![w; levels]), Some(vec![w; levels])))
            .collect::<Result<_>>()?;
        Ok(AdjacentSystems { systems })
    }

    pub fn hierarchy(&self) -> &'h DyadicHierarchy {
        self.systems[0].hierarchy()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacentChecks {
    /// `B(x, r) ⊆ Q`
    pub ball_in_cube: bool,
    /// `δ^k <= δ^(-2) r`
    pub side_length: bool,
    /// `B(x, δ^(-p) r) ⊆ Q^(p)`
    pub enlargement: bool,
}

impl AdjacentChecks {
    pub fn all(&self) -> bool {
        self.ball_in_cube && self.side_length && self.enlargement
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjacentOutcome {
    pub k: i32,
    pub omega: Option<u32>,
    pub cube: Option<(i32, usize)>,
    #[serde(with = "rational_text")]
    pub bad_fraction: Rational,
    pub checks: Option<AdjacentChecks>,
}

impl AdjacentOutcome {
    pub fn found(&self) -> bool {
        self.omega.is_some()
    }
}

/// Level `k` with `δ^(k+2) < r <= δ^(k+1)`.
pub fn ball_level(h: &DyadicHierarchy, r: f64) -> Option<i32> {
    let d = h.delta();
    (h.k_min() - 2..=h.k_max() + 2).find(|&k| d.pow(k + 2) < r && r <= d.pow(k + 1))
}

/// Searches the systems for one whose level-`k` and level-`(k-p)` boundaries
/// (widths `δ^(k+1)` and `δ^(k-p+1)`) avoid `x`, then checks the three
/// conclusions on the cube containing `x`.
pub fn find_adjacent_cover(
    cloud: &MetricPointCloud,
    systems: &AdjacentSystems<'_>,
    x: usize,
    r: f64,
    p: u32,
) -> Result<AdjacentOutcome> {
    let h = systems.hierarchy();
    let delta = h.delta();
    let k = ball_level(h, r);
    let k = match k {
        Some(k) if h.contains_level(k) && h.contains_level(k - p as i32) => k,
        _ => {
            let guess = k.unwrap_or(if r > delta.pow(h.k_min() + 1) { h.k_min() - 1 } else { h.k_max() + 1 });
            return Err(Error::LevelOutOfRange { level: guess - p as i32, k_min: h.k_min(), k_max: h.k_max() });
        }
    };
    let coarse = k - p as i32;
    let bad: Vec<bool> = systems
        .systems
        .iter()
        .map(|cs| {
            on_labeled_boundary(cloud, cs.labels(k), x, delta.pow(k + 1))
                || on_labeled_boundary(cloud, cs.labels(coarse), x, delta.pow(coarse + 1))
        })
        .collect();
    let bad_count = bad.iter().filter(|&&b| b).count();
    let bad_fraction = Rational::new(bad_count as i128, bad.len() as i128);
    let Some(w) = bad.iter().position(|&b| !b) else {
        return Ok(AdjacentOutcome { k, omega: None, cube: None, bad_fraction, checks: None });
    };
    let cs = &systems.systems[w];
    let alpha = cs.cube_of_point(x, k);
    let labels_k = cs.labels(k);
    let labels_c = cs.labels(coarse);
    let ancestor = labels_c[x];
    let big = delta.pow(-(p as i32)) * r;
    let checks = AdjacentChecks {
        ball_in_cube: (0..cloud.len()).all(|y| cloud.distance(x, y) >= r || labels_k[y] as usize == alpha),
        side_length: delta.pow(k) <= delta.pow(-2) * r,
        enlargement: (0..cloud.len()).all(|y| cloud.distance(x, y) >= big || labels_c[y] == ancestor),
    };
    Ok(AdjacentOutcome { k, omega: Some(w as u32), cube: Some((k, alpha)), bad_fraction, checks: Some(checks) })
}

pub(crate) mod rational_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::Rational;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        crate::scale::parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod rational_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Rational;

    pub fn serialize<S: Serializer>(q: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        q.iter().map(|v| v.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| crate::scale::parse_rational(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::Delta;
    use num_traits::Zero;

    #[test]
    fn theory_constant_examples() {
        let t = theory_constants(1e-6, 2).unwrap();
        assert_eq!(t.c, 21504.0);
        assert!((t.eta - 0.2779).abs() < 1e-3);
        assert!(t.boundary_regime && t.adjacent_regime && t.cube_regime);
        let c = 84.0f64;
        let t = theory_constants(c.powi(-2), 1).unwrap();
        assert!((t.eta - 0.5).abs() < 1e-12);
        assert_eq!(eta_at_power(4).unwrap(), Rational::new(3, 4));
        let off = theory_constants(0.1, 2).unwrap();
        assert!(!off.boundary_regime && !off.cube_regime && off.eta < 0.0);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert_eq!(wilson_interval(0, 10).0, 0.0);
        assert_eq!(wilson_interval(10, 10).1, 1.0);
    }

    #[test]
    fn exponent_fit_examples() {
        let pts: Vec<(f64, f64)> = (1..8).map(|i| (0.01 * i as f64, (0.01 * i as f64).powf(0.7))).collect();
        assert!((fit_boundary_exponent(&pts).unwrap().eta - 0.7).abs() < 1e-6);
        let flat: Vec<(f64, f64)> = (1..5).map(|i| (i as f64 * 0.1, 0.3)).collect();
        assert!(fit_boundary_exponent(&flat).unwrap().eta.abs() < 1e-12);
        assert!(matches!(fit_boundary_exponent(&[(0.1, 0.5), (0.2, 1.0)]), Err(Error::Degenerate(_))));
    }

    fn spaced_line() -> (MetricPointCloud, DyadicHierarchy, ParentTables) {
        let c = MetricPointCloud::line(10, 0.3).unwrap();
        let h = DyadicHierarchy::build_auto(&c, Delta::new(1, 10).unwrap()).unwrap();
        let t = ParentTables::build(&c, &h).unwrap();
        (c, h, t)
    }

    #[test]
    fn exact_matches_monte_carlo() {
        let (c, h, t) = spaced_line();
        let k = h.k_max() - 1;
        let x = 2;
        let e = boundary_probability_exact(&h, &t, &c, x, k, 0.35, DEFAULT_BUDGET).unwrap();
        assert!(e.factorizes() && e.product_bounds() && e.implication);
        assert!(e.probability > Rational::zero() && e.probability < Rational::one());
        let mc = boundary_probability_mc(&h, &t, &c, x, k, 0.35, 20_000, 5).unwrap();
        assert!(mc.contains(e.value()), "{mc:?} vs {}", e.value());
        assert_eq!(mc, boundary_probability_mc(&h, &t, &c, x, k, 0.35, 20_000, 5).unwrap());
        assert_eq!(boundary_probability_mc(&h, &t, &c, x, k, 0.0, 100, 5).unwrap().hits, 0);
    }

    #[test]
    fn exact_refuses_over_budget() {
        let (c, h, t) = spaced_line();
        assert!(matches!(
            boundary_probability_exact(&h, &t, &c, 0, h.k_min(), 0.1, 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn adjacent_search_checks() {
        let c = MetricPointCloud::line(10, 0.01).unwrap();
        let h = DyadicHierarchy::build_auto(&c, Delta::new(1, 10).unwrap()).unwrap();
        let t = ParentTables::build(&c, &h).unwrap();
        let sys = AdjacentSystems::build(&h, &t).unwrap();
        assert_eq!(sys.systems.len(), 11);
        for x in 0..10 {
            let out = find_adjacent_cover(&c, &sys, x, 0.0005, 1).unwrap();
            assert_eq!(out.found(), out.bad_fraction < Rational::one());
            if let Some(ch) = out.checks {
                assert!(ch.all());
            }
        }
        assert!(matches!(find_adjacent_cover(&c, &sys, 0, 50.0, 0), Err(Error::LevelOutOfRange { .. })));
    }
}
