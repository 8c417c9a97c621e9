//! The full invariant suite over one cloud, as a single report.

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::boundary::{approx_boundary_ball_cover, approx_labels, approximated_cube, cube_boundary_inclusions};
use crate::cubes::{verify_cubes, CubeSystem, RadiusSchedule};
use crate::error::{Error, Result};
use crate::experiments::{
    boundary_probability_exact, boundary_probability_mc_grid, enumeration_size, find_adjacent_cover, theorem_bound,
    theory_constants, AdjacentSystems, ExactBoundary, DEFAULT_BUDGET,
};
use crate::haar::{haar_basis, verify_wavelet_axioms};
use crate::hierarchy::{verify_hierarchy, DyadicHierarchy};
use crate::metric::{doubling_sample, estimate_doubling_constant, MetricPointCloud};
use crate::random::{
    annulus_sweep, default_eps_grid, distance_grid, remark_constants_check, sample_assignment_indexed,
    schedule_from_assignment, AssignmentKind, ParentTables,
};
use crate::report::{CheckRow, Report};
use crate::scale::Delta;
use crate::splines::{holder_quotient, verify_splines, SplineTable};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    /// Independent systems checked for the cube and boundary axioms.
    pub samples: u64,
    pub mc_samples: u64,
    pub budget: u128,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { samples: 10, mc_samples: 4000, budget: DEFAULT_BUDGET }
    }
}

/// Runs `f` on a dedicated pool of `workers` threads (`0` uses the global pool).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Greedy doubling estimate over the radii `2 diam 2^-i` down to the minimum separation.
pub fn estimated_doubling(cloud: &MetricPointCloud, _h: &DyadicHierarchy) -> Result<u64> {
    if cloud.len() < 2 {
        return Ok(1);
    }
    let (diam, sep) = (cloud.diameter(), cloud.min_separation());
    let radii: Vec<f64> = (0..64).map(|i| 2.0 * diam * 0.5f64.powi(i)).take_while(|&r| r >= sep).collect();
    Ok(estimate_doubling_constant(cloud, &doubling_sample(cloud, &radii, 64))?.m.max(1))
}

pub fn verify_suite(cloud: &MetricPointCloud, delta: Delta, seed: u64, opts: &VerifyOptions) -> Result<Report> {
    let h = DyadicHierarchy::build_auto(cloud, delta)?;
    let m = estimated_doubling(cloud, &h)?;
    let mut report = Report::new();

    let t = theory_constants(delta.value(), m)?;
    report.push(CheckRow::new("theory.constants", json!({ "delta": delta.to_string(), "M": m })).measured(json!(t)));
    report.extend(verify_hierarchy(cloud, &h));

    let schedules: Vec<RadiusSchedule> = (0..opts.samples)
        .map(|i| {
            let a = sample_assignment_indexed(delta, AssignmentKind::Independent, h.k_min(), h.k_max(), seed, i);
            schedule_from_assignment(delta, &a)
        })
        .collect::<Result<_>>()?;
    let systems: Vec<CubeSystem<'_>> = schedules.par_iter().map(|s| CubeSystem::build(cloud, &h, s)).collect::<Result<_>>()?;
    for (cs, s) in systems.iter().zip(&schedules) {
        report.extend(verify_cubes(cloud, cs, s, m));
    }
    for (cs, s) in systems.iter().zip(&schedules) {
        report.extend(boundary_rows(cloud, cs, s, m)?);
    }

    report.extend(randomization_rows(delta)?);
    let tables = ParentTables::build(cloud, &h)?;
    report.extend(probability_rows(cloud, &h, &tables, seed, opts, m)?);
    report.extend(adjacent_rows(cloud, &h, &tables)?);
    report.extend(spline_rows(cloud, &h, &tables, opts.budget)?);
    if let Some(cs) = systems.first() {
        report.extend(haar_rows(cloud, cs, seed)?);
    }
    Ok(report)
}

fn boundary_rows(cloud: &MetricPointCloud, cs: &CubeSystem<'_>, s: &RadiusSchedule, m: u64) -> Result<Vec<CheckRow>> {
    let h = cs.hierarchy();
    let delta = h.delta();
    let params = json!({ "delta": delta.to_string(), "omega": cs.omega() });
    let mut rows = Vec::new();

    let mut child_rule = None;
    let mut literal = None;
    for k in h.k_min()..h.k_max() {
        let labels = approx_labels(cloud, h, s, k)?;
        if child_rule.is_none() {
            child_rule = h.level(k + 1).iter().enumerate().find_map(|(b, &z)| {
                (labels[z] as usize != cs.parent(k, b)).then(|| format!("z_{b}^{} lies in A^{k}_{}, parent is {}", k + 1, labels[z], cs.parent(k, b)))
            });
        }
        if literal.is_none() {
            for alpha in 0..h.level(k).len() {
                let a = approximated_cube(cloud, h, s, k, alpha)?;
                if let Some(x) = (0..cloud.len()).find(|&x| a.members.contains(x) != (labels[x] as usize == alpha)) {
                    literal = Some(format!("x = {} at level {k}, alpha = {alpha}", cloud.id(x)));
                    break;
                }
            }
        }
    }
    rows.push(CheckRow::new("boundary.approx-partition", params.clone()).outcome(literal));
    rows.push(CheckRow::new("boundary.child-rule", params.clone()).outcome(child_rule));

    let mut inclusion = None;
    let mut cover = None;
    let mut max_balls = 0usize;
    for k in h.k_min()..h.k_max() {
        let eps = delta.pow(k + 1);
        let depth = (h.k_max() - 1 - k).min(2);
        let out = cube_boundary_inclusions(cloud, cs, s, k, eps, depth)?;
        if !out.holds() && inclusion.is_none() {
            inclusion = Some(format!("level {k}: {out:?}"));
        }
        for alpha in 0..h.level(k).len() {
            let c = approx_boundary_ball_cover(cloud, h, s, k, alpha, eps, m)?;
            max_balls = max_balls.max(c.balls.len());
            if !c.holds() && cover.is_none() {
                cover = Some(format!("level {k}, alpha = {alpha}: {} balls of {}, uncovered {:?}", c.balls.len(), c.bound, c.uncovered));
            }
        }
    }
    let inclusion_row = CheckRow::new("boundary.inclusions", params.clone());
    rows.push(if delta.as_rational() <= Rational::new(1, 3) { inclusion_row.outcome(inclusion) } else { inclusion_row.measured(json!(inclusion)) });
    rows.push(CheckRow::new("boundary.ball-cover", params).outcome(cover).measured(json!({ "max_balls": max_balls })));
    Ok(rows)
}

fn randomization_rows(delta: Delta) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for k in [0, 1] {
        for m in [Rational::one(), Rational::new(1, 4)] {
            let summary = annulus_sweep(delta, k, m, &distance_grid(delta, k, 200), &default_eps_grid(delta, k))?;
            rows.push(
                CheckRow::new("random.annulus-bound", json!({ "delta": delta.to_string(), "k": k, "m": m.to_string() }))
                    .outcome((summary.lemma_violations > 0).then(|| format!("{} grid points exceed the bound", summary.lemma_violations)))
                    .measured(json!({ "cases": summary.cases })),
            );
        }
    }
    rows.extend(remark_constants_check(delta)?);
    Ok(rows)
}

/// Finest level whose enumeration of the draws below it fits the budget.
fn exact_level(h: &DyadicHierarchy, budget: u128) -> i32 {
    let mut k = h.k_max();
    while k > h.k_min() && h.k_max() - k < 3 && enumeration_size(h, k - 1, budget).is_ok() {
        k -= 1;
    }
    k
}

fn probability_rows(
    cloud: &MetricPointCloud,
    h: &DyadicHierarchy,
    tables: &ParentTables,
    seed: u64,
    opts: &VerifyOptions,
    m: u64,
) -> Result<Vec<CheckRow>> {
    let delta = h.delta();
    let x = cloud.len() / 2;
    let k = exact_level(h, opts.budget);
    let side = delta.pow(k + 1);
    let grid: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|f| f * side).collect();
    let params = json!({ "delta": delta.to_string(), "x": cloud.id(x), "k": k });
    let exact: Vec<ExactBoundary> =
        grid.iter().map(|&e| boundary_probability_exact(h, tables, cloud, x, k, e, opts.budget)).collect::<Result<_>>()?;
    let mc = boundary_probability_mc_grid(h, tables, cloud, x, k, &grid, opts.mc_samples, seed)?;

    let factor = exact.iter().find(|e| !(e.factorizes() && e.implication && e.product_bounds())).map(|e| {
        format!("eps = {}: P = {}, joint = {}, product = {}, implication {}", e.eps, e.probability, e.joint, e.product, e.implication)
    });
    let monotone = exact.windows(2).find(|w| w[0].probability > w[1].probability).map(|w| format!("P drops after eps = {}", w[0].eps));
    let nearest = (0..cloud.len()).filter(|&y| y != x).map(|y| cloud.distance(x, y)).fold(f64::INFINITY, f64::min);
    let zero = if nearest.is_finite() {
        let e = boundary_probability_exact(h, tables, cloud, x, k, nearest, opts.budget)?;
        (e.probability != Rational::from_integer(0)).then(|| format!("P = {} at eps = {nearest}", e.probability))
    } else {
        None
    };
    let inside = exact.iter().zip(&mc).filter(|(e, c)| c.contains(e.value())).count();

    let t = theory_constants(delta.value(), m)?;
    let bound_violations: Vec<f64> = exact.iter().filter(|e| e.value() > theorem_bound(&t, e.eps, delta.pow(k))).map(|e| e.eps).collect();
    let bound = CheckRow::new("experiments.theorem-bound", params.clone()).measured(json!({ "violations": bound_violations }));
    let bound = if t.boundary_regime { bound.pass(bound_violations.is_empty()) } else { bound };

    Ok(vec![
        CheckRow::new("experiments.factorization", params.clone()).outcome(factor),
        CheckRow::new("experiments.monotone", params.clone()).outcome(monotone),
        CheckRow::new("experiments.zero-limit", params.clone()).outcome(zero),
        CheckRow::new("experiments.mc-consistency", params)
            .measured(json!({ "inside": inside, "grid": grid.len(), "samples": opts.mc_samples })),
        bound,
    ])
}

fn adjacent_rows(cloud: &MetricPointCloud, h: &DyadicHierarchy, tables: &ParentTables) -> Result<Vec<CheckRow>> {
    let delta = h.delta();
    let systems = AdjacentSystems::build(h, tables)?;
    let stride = cloud.len().div_ceil(32).max(1);
    let (mut balls, mut found, mut pigeonhole, mut conclusions) = (0usize, 0usize, None, None);
    for p in [0u32, 1] {
        for k in h.k_min() + p as i32..=h.k_max() {
            let r = 0.5 * delta.pow(k + 1);
            for x in (0..cloud.len()).step_by(stride) {
                let out = find_adjacent_cover(cloud, &systems, x, r, p)?;
                balls += 1;
                found += out.found() as usize;
                if out.found() != (out.bad_fraction < Rational::one()) && pigeonhole.is_none() {
                    pigeonhole = Some(format!("x = {}, r = {r}, p = {p}", cloud.id(x)));
                }
                if out.checks.is_some_and(|c| !c.all()) && conclusions.is_none() {
                    conclusions = Some(format!("x = {}, r = {r}, p = {p}: {:?}", cloud.id(x), out.checks));
                }
            }
        }
    }
    let params = json!({ "delta": delta.to_string(), "balls": balls });
    Ok(vec![
        CheckRow::new("adjacent.search", params.clone()).outcome(pigeonhole).measured(json!({ "found": found })),
        CheckRow::new("adjacent.conclusions", params).outcome(conclusions),
    ])
}

fn spline_rows(cloud: &MetricPointCloud, h: &DyadicHierarchy, tables: &ParentTables, budget: u128) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let fits = |k: i32| enumeration_size(h, k, budget).is_ok_and(|s| s.saturating_mul(cloud.len() as u128) <= budget);
    let mut k = h.k_max();
    while k >= h.k_min() && fits(k) && h.k_max() - k <= 3 {
        rows.extend(verify_splines(cloud, h, tables, k, budget)?);
        k -= 1;
    }
    if h.k_max() > h.k_min() && fits(h.k_max() - 1) {
        let table = SplineTable::build(h, tables, h.k_max() - 1, budget)?;
        let quotients: Vec<(f64, f64)> = [0.25, 0.5, 0.75, 0.9].iter().map(|&eta| (eta, holder_quotient(cloud, h, &table, eta))).collect();
        rows.push(
            CheckRow::new("splines.holder", json!({ "delta": h.delta().to_string(), "k": table.k })).measured(json!(quotients)),
        );
    }
    Ok(rows)
}

/// Mean-zero pseudo-random test function for Parseval checks.
pub fn random_mean_zero(mu: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let f: Vec<f64> = mu.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = f.iter().zip(mu).map(|(a, w)| a * w).sum::<f64>() / mu.iter().sum::<f64>();
    f.iter().map(|a| a - mean).collect()
}

fn haar_rows(cloud: &MetricPointCloud, cs: &CubeSystem<'_>, seed: u64) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for weighted in [false, true] {
        let mu: Vec<f64> = (0..cloud.len()).map(|i| if weighted { (i + 1) as f64 } else { 1.0 }).collect();
        let basis = haar_basis(cs, &mu)?;
        rows.extend(verify_wavelet_axioms(cloud, cs, &basis));
        let worst = (0..20).map(|_| basis.parseval_defect(&random_mean_zero(&mu, &mut rng))).fold(0.0, f64::max);
        rows.push(
            CheckRow::new("haar.parseval", json!({ "weighted": weighted }))
                .outcome((worst > 1e-9).then(|| format!("defect {worst:e}")))
                .measured(json!(worst)),
        );
    }
    Ok(rows)
}
