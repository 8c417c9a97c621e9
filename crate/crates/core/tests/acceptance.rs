//! One line per acceptance criterion; exits non-zero if any fails.

use std::time::Instant;

use dyadic_cubes::boundary::{
    approx_labels, approximated_cube, ball_boundary_superset, check_cube_boundary_inclusions, cube_boundary_inclusions,
    epsilon_boundary,
};
use dyadic_cubes::cubes::{verify_cubes, CubeSystem};
use dyadic_cubes::experiments::{
    boundary_probability_exact, boundary_probability_mc, eta_at_power, find_adjacent_cover, theory_constants,
    AdjacentSystems, DEFAULT_BUDGET,
};
use dyadic_cubes::haar::{haar_basis, verify_wavelet_axioms};
use dyadic_cubes::hierarchy::{coarser_level_search, verify_hierarchy, DyadicHierarchy, LayeredConstruction};
use dyadic_cubes::random::{
    annulus_hit_probability, annulus_sweep, default_eps_grid, distance_grid, remark_constants_check,
    sample_assignment_indexed, schedule_from_assignment, AssignmentKind, ParentTables,
};
use dyadic_cubes::scale::parse_rational;
use dyadic_cubes::splines::{holder_quotient, verify_splines, SplineTable};
use dyadic_cubes::verify::{estimated_doubling, random_mean_zero, verify_suite, with_workers, VerifyOptions};
use dyadic_cubes::{Delta, MetricPointCloud, PointSet, Rational};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn d(text: &str) -> Delta {
    Delta::parse(text).unwrap()
}

fn cloud(spec: &str) -> MetricPointCloud {
    MetricPointCloud::from_generator(spec).unwrap()
}

fn sampled_systems<'h>(c: &MetricPointCloud, h: &'h DyadicHierarchy, n: u64, seed: u64) -> Vec<(CubeSystem<'h>, dyadic_cubes::cubes::RadiusSchedule)> {
    (0..n)
        .map(|i| {
            let a = sample_assignment_indexed(h.delta(), AssignmentKind::Independent, h.k_min(), h.k_max(), seed, i);
            let s = schedule_from_assignment(h.delta(), &a).unwrap();
            (CubeSystem::build(c, h, &s).unwrap(), s)
        })
        .collect()
}

fn annulus_bound() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for delta in [d("0.1"), d("1/60")] {
        for k in [0, 1] {
            for m in [Rational::from_integer(1), Rational::new(1, 4)] {
                let s = annulus_sweep(delta, k, m, &distance_grid(delta, k, 200), &default_eps_grid(delta, k)).map_err(|e| e.to_string())?;
                ensure(s.lemma_violations == 0, || format!("delta {delta} k {k} m {m}: {} violations", s.lemma_violations))?;
                cases += s.cases;
            }
        }
    }
    let p = annulus_hit_probability(d("0.1"), 0, Rational::from_integer(1), parse_rational("1.53").unwrap(), parse_rational("0.04").unwrap())
        .map_err(|e| e.to_string())?;
    ensure(p.probability == Rational::new(1, 11), || format!("spot value {}", p.probability))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("took {secs:.2}s"))?;
    Ok(format!("{cases} cases, 0 violations, spot 1/11, {secs:.3}s"))
}

fn remark_constants() -> Outcome {
    let mut rows = 0;
    for delta in [d("0.1"), d("1/60")] {
        for row in remark_constants_check(delta).map_err(|e| e.to_string())? {
            ensure(!row.failed(), || format!("{:?}", row))?;
            rows += 1;
        }
    }
    Ok(format!("{rows} sweeps within 9 delta / 33 delta"))
}

fn hierarchy_axioms() -> Outcome {
    let mut checked = 0;
    for spec in ["line:100", "grid:32x32", "random-uniform:500:2:17"] {
        let c = cloud(spec);
        for delta in [d("0.1"), d("1/60")] {
            let h = DyadicHierarchy::build_auto(&c, delta).map_err(|e| e.to_string())?;
            for row in verify_hierarchy(&c, &h) {
                ensure(!row.failed(), || format!("{spec} delta {delta}: {:?}", row))?;
                checked += 1;
            }
        }
    }
    let line = cloud("line:41");
    let lc = LayeredConstruction::build(&line, 0, 3.0, 4).map_err(|e| e.to_string())?;
    for row in lc.verify(&line) {
        ensure(!row.failed(), || format!("layered: {:?}", row))?;
    }
    let ticks: Vec<i64> = (-29..30).chain(51..110).collect();
    let remark = MetricPointCloud::from_coordinates(
        (0..ticks.len() as u64).collect(),
        ticks.iter().map(|&i| vec![i as f64 / 10.0]).collect(),
    )
    .unwrap();
    let at = |t: i64| ticks.iter().position(|&i| i == t).unwrap();
    let finer = [at(0), at(80)];
    let loose = coarser_level_search(&remark, &finer, 3.0).map_err(|e| e.to_string())?;
    ensure(loose.is_some(), || "no coarser net at radius 3".into())?;
    let found = coarser_level_search(&remark, &finer, 9.0).map_err(|e| e.to_string())?;
    ensure(found.is_none(), || format!("coarser net at radius 9: {found:?}"))?;
    Ok(format!("{checked} hierarchy checks, layered (1)-(5) pass, remark configuration infeasible"))
}

fn cube_axioms() -> Outcome {
    let mut measured = Vec::new();
    for spec in ["line:100", "grid:32x32", "random-uniform:500:2:17"] {
        let c = cloud(spec);
        for delta in [d("0.1"), d("1/60")] {
            let h = DyadicHierarchy::build_auto(&c, delta).unwrap();
            let m = estimated_doubling(&c, &h).unwrap();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (cs, s) in sampled_systems(&c, &h, 50, 4) {
                for row in verify_cubes(&c, &cs, &s, m) {
                    ensure(!row.failed(), || format!("{spec} delta {delta}: {:?}", row))?;
                    if row.check == "cubes.inclusion" {
                        let v = row.measured.as_ref().unwrap();
                        lo = lo.min(v["inner"].as_f64().unwrap_or(f64::INFINITY));
                        hi = hi.max(v["outer"].as_f64().unwrap_or(0.0));
                        if delta == d("1/60") {
                            ensure(row.pass == Some(true), || format!("{spec}: inclusion not asserted"))?;
                        }
                    }
                }
            }
            if delta == d("0.1") {
                measured.push(format!("{spec} [{lo:.3}, {hi:.3}]"));
            }
        }
    }
    Ok(format!("300 systems pass; inclusion constants at 0.1: {}", measured.join(", ")))
}

fn boundary_calculus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = cloud("random-uniform:60:2:3");
    let n = c.len();
    for _ in 0..1000 {
        let family: Vec<PointSet> =
            (0..rng.gen_range(1..5)).map(|_| PointSet::from_mask((0..n).map(|_| rng.gen_bool(0.4)).collect())).collect();
        let eps = rng.gen_range(0.01..0.5);
        let a = &family[0];
        ensure(epsilon_boundary(&c, a, eps) == epsilon_boundary(&c, &a.complement(), eps), || "symmetry".into())?;
        let center = rng.gen_range(0..n);
        let r = rng.gen_range(0.05..1.0);
        ensure(epsilon_boundary(&c, &c.ball(center, r), eps).is_subset(&ball_boundary_superset(&c, center, r, eps)), || "annulus".into())?;
        let bounds: Vec<PointSet> = family.iter().map(|s| epsilon_boundary(&c, s, eps)).collect();
        let parts = PointSet::union_all(n, &bounds);
        let inter = family.iter().skip(1).fold(a.clone(), |acc, s| acc.intersection(s));
        ensure(epsilon_boundary(&c, &PointSet::union_all(n, &family), eps).is_subset(&parts), || "union".into())?;
        ensure(epsilon_boundary(&c, &inter, eps).is_subset(&parts), || "intersection".into())?;
    }

    let mut systems = 0;
    for spec in ["grid:8x8:0.3", "line:100:0.03"] {
        let c = cloud(spec);
        let h = DyadicHierarchy::build_auto(&c, d("0.1")).unwrap();
        for (cs, s) in sampled_systems(&c, &h, 50, 9) {
            systems += 1;
            for k in h.k_min()..h.k_max() {
                let labels = approx_labels(&c, &h, &s, k).unwrap();
                for alpha in 0..h.level(k).len() {
                    let a = approximated_cube(&c, &h, &s, k, alpha).unwrap();
                    ensure((0..c.len()).all(|x| a.members.contains(x) == (labels[x] as usize == alpha)), || format!("{spec}: partition at {k}"))?;
                }
                for (b, &z) in h.level(k + 1).iter().enumerate() {
                    ensure(labels[z] as usize == cs.parent(k, b), || format!("{spec}: child rule at {k}"))?;
                }
                let depth = h.k_max() - 1 - k;
                for eps in default_eps_grid(h.delta(), k) {
                    let eps = eps.to_f64().unwrap();
                    let out = cube_boundary_inclusions(&c, &cs, &s, k, eps, depth).unwrap();
                    ensure(out.holds(), || format!("{spec}: inclusions at {k}: {out:?}"))?;
                }
                if systems <= 2 {
                    for alpha in 0..h.level(k).len() {
                        let ok = check_cube_boundary_inclusions(&c, &cs, &s, k, alpha, h.delta().pow(k + 1), depth).unwrap();
                        ensure(ok, || format!("{spec}: literal inclusion at ({k}, {alpha})"))?;
                    }
                }
            }
        }
    }
    Ok(format!("1000 random families; partition, child rule and inclusions on {systems} systems"))
}

fn exact_oracle() -> Outcome {
    let (mut instances, mut inside, mut trials) = (0, 0, 0);
    for spec in ["line:10", "line:10:0.3"] {
        let c = cloud(spec);
        let h = DyadicHierarchy::build_auto(&c, d("0.1")).unwrap();
        let t = ParentTables::build(&c, &h).unwrap();
        for k in (h.k_max() - 3).max(h.k_min())..=h.k_max() {
            for x in 0..c.len() {
                let mut last = Rational::from_integer(0);
                for i in 1..=12 {
                    let e = boundary_probability_exact(&h, &t, &c, x, k, 0.1 * i as f64, DEFAULT_BUDGET).unwrap();
                    ensure(e.outcomes <= 1331, || format!("{} outcomes", e.outcomes))?;
                    ensure(e.probability >= last, || format!("{spec}: not monotone at x {x}, k {k}"))?;
                    ensure(e.factorizes() && e.implication && e.product_bounds(), || format!("{spec}: product chain at x {x}, k {k}"))?;
                    last = e.probability;
                    instances += 1;
                }
            }
        }
    }
    // Nontrivial probabilities on the 0.3-spaced line.
    let c = cloud("line:10:0.3");
    let h = DyadicHierarchy::build_auto(&c, d("0.1")).unwrap();
    let t = ParentTables::build(&c, &h).unwrap();
    let cases: Vec<(usize, i32, f64)> = vec![(2, h.k_max() - 1, 0.35), (3, h.k_max() - 1, 0.35), (6, h.k_max() - 1, 0.65), (2, h.k_min(), 0.35)];
    for seed in 0..100u64 {
        let (x, k, eps) = cases[seed as usize % cases.len()];
        let e = boundary_probability_exact(&h, &t, &c, x, k, eps, DEFAULT_BUDGET).unwrap();
        let mc = boundary_probability_mc(&h, &t, &c, x, k, eps, 10_000, seed).unwrap();
        trials += 1;
        inside += mc.contains(e.value()) as u32;
    }
    ensure(inside >= 93, || format!("{inside}/100 inside the interval"))?;
    Ok(format!("{instances} exact instances monotone and factorized; {inside}/{trials} Wilson intervals cover"))
}

fn theory() -> Outcome {
    for m in [1u64, 2, 3] {
        let c = 84.0 * (m as f64).powi(8);
        let mut last = 0.0;
        for j in 2..=6u32 {
            let want = eta_at_power(j).unwrap();
            ensure(want == Rational::new(j as i128 - 1, j as i128), || "closed form".into())?;
            let t = theory_constants(c.powi(-(j as i32)), m).unwrap();
            let w = want.to_f64().unwrap();
            ensure((t.eta - w).abs() < 1e-12, || format!("M {m} j {j}: {} vs {w}", t.eta))?;
            ensure(t.eta > last, || "not increasing".into())?;
            last = t.eta;
        }
        let at = |x: f64| theory_constants(x, m).unwrap();
        ensure(at(0.99 / c).boundary_regime && !at(1.01 / c).boundary_regime, || "1/C flag".into())?;
        ensure(at(0.99 / (2.0 * c)).adjacent_regime && !at(1.01 / (2.0 * c)).adjacent_regime, || "1/(2C) flag".into())?;
        ensure(at(1.01 / c).eta <= 0.0 && at(0.99 / c).eta > 0.0, || "eta sign".into())?;
    }
    ensure(theory_constants(1.0 / 60.0, 2).unwrap().cube_regime && !theory_constants(0.02, 2).unwrap().cube_regime, || "1/60 flag".into())?;
    Ok("eta = 1 - 1/j for j = 2..6 at M = 1, 2, 3; regime flags switch at 1/60, 1/C, 1/(2C)".into())
}

fn adjacent() -> Outcome {
    let (mut balls, mut found) = (0, 0);
    for spec in ["line:100:0.03", "grid:12x12:0.03"] {
        let c = cloud(spec);
        let h = DyadicHierarchy::build_auto(&c, d("0.1")).unwrap();
        let t = ParentTables::build(&c, &h).unwrap();
        let systems = AdjacentSystems::build(&h, &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for p in [0u32, 1] {
            let mut made = 0;
            while made < 25 {
                let k = rng.gen_range(h.k_min() + p as i32..=h.k_max());
                let r = h.delta().pow(k + 1) * rng.gen_range(0.11..1.0);
                let x = rng.gen_range(0..c.len());
                let out = find_adjacent_cover(&c, &systems, x, r, p).map_err(|e| e.to_string())?;
                made += 1;
                balls += 1;
                ensure(out.found() == (out.bad_fraction < Rational::from_integer(1)), || format!("{spec}: search vs fraction"))?;
                if let Some(ch) = out.checks {
                    ensure(ch.all(), || format!("{spec}: conclusions fail at x {x}, r {r}, p {p}: {ch:?}"))?;
                    found += 1;
                }
            }
        }
    }
    Ok(format!("{found}/{balls} balls covered, every success satisfies the three conclusions"))
}

fn splines() -> Outcome {
    let mut report = Vec::new();
    for spec in ["line:10", "grid:8x8", "line:10:0.3", "grid:8x8:0.3"] {
        let c = cloud(spec);
        let h = DyadicHierarchy::build_auto(&c, d("0.1")).unwrap();
        let t = ParentTables::build(&c, &h).unwrap();
        for k in h.k_min()..=h.k_max() {
            for row in verify_splines(&c, &h, &t, k, DEFAULT_BUDGET).map_err(|e| e.to_string())? {
                ensure(!row.failed(), || format!("{spec}: {:?}", row))?;
            }
        }
        if h.k_max() > h.k_min() {
            let table = SplineTable::build(&h, &t, h.k_max() - 1, DEFAULT_BUDGET).unwrap();
            let q: Vec<String> = [0.25, 0.5, 0.75, 0.9].iter().map(|&e| format!("{:.2}", holder_quotient(&c, &h, &table, e))).collect();
            report.push(format!("{spec} [{}]", q.join(" ")));
        }
    }
    Ok(format!("exact axioms hold; Holder quotients at eta 0.25/0.5/0.75/0.9: {}", report.join(", ")))
}

fn haar() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for spec in ["grid:8x8:0.3", "line:32", "random-uniform:200:2:4"] {
        let c = cloud(spec);
        let h = DyadicHierarchy::build_auto(&c, d("0.1")).unwrap();
        let (cs, _) = sampled_systems(&c, &h, 1, 3).pop().unwrap();
        for weighted in [false, true] {
            let mu: Vec<f64> = (0..c.len()).map(|i| if weighted { (i + 1) as f64 } else { 1.0 }).collect();
            let b = haar_basis(&cs, &mu).unwrap();
            ensure(b.len() + 1 == c.len(), || format!("{spec}: {} functions", b.len()))?;
            for row in verify_wavelet_axioms(&c, &cs, &b) {
                ensure(!row.failed(), || format!("{spec}: {:?}", row))?;
            }
            for _ in 0..20 {
                let f = random_mean_zero(&mu, &mut rng);
                let norm: f64 = f.iter().zip(&mu).map(|(a, w)| a * a * w).sum();
                let defect = b.parseval_defect(&f) / norm.max(1.0);
                worst = worst.max(defect);
                ensure(b.parseval_defect(&f) < 1e-9, || format!("{spec}: Parseval defect {defect:e}"))?;
            }
        }
    }
    Ok(format!("orthonormal, mean zero, |X| - 1 functions, Parseval worst {worst:.1e}, weighted reruns pass"))
}

fn reproducibility() -> Outcome {
    let start = Instant::now();
    let c = cloud("grid:8x8");
    let opts = VerifyOptions::default();
    let run = |w: usize| with_workers(w, || verify_suite(&c, d("0.1"), 7, &opts).map(|r| (r.all_pass(), r.to_json_pretty()))).unwrap().unwrap();
    let (pass, a) = run(0);
    let (_, b) = run(0);
    let (_, one) = run(1);
    let (_, eight) = run(8);
    ensure(pass, || "verify suite failed".into())?;
    ensure(a == b && a == one && a == eight, || "reports differ".into())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1}s"))?;
    Ok(format!("4 runs byte-identical ({} bytes), {secs:.2}s", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("annulus bound", annulus_bound),
        ("remark constants", remark_constants),
        ("hierarchy axioms", hierarchy_axioms),
        ("cube axioms", cube_axioms),
        ("boundary calculus", boundary_calculus),
        ("exact probability oracle", exact_oracle),
        ("theory constants", theory),
        ("adjacent systems", adjacent),
        ("splines", splines),
        ("haar", haar),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
