//! Boundary probability of one grid point over an epsilon grid. Monte Carlo
//! runs next to exact enumeration, with the level-wise product and a fitted exponent.
use dyadic_cubes::experiments::{run_boundary_experiment, theory_constants, DEFAULT_BUDGET};
use dyadic_cubes::hierarchy::DyadicHierarchy;
use dyadic_cubes::random::ParentTables;
use dyadic_cubes::{Delta, MetricPointCloud};

fn main() -> dyadic_cubes::Result<()> {
    let cloud = MetricPointCloud::grid(32, 32, 0.3)?;
    let delta = Delta::parse("0.1")?;
    let h = DyadicHierarchy::build_auto(&cloud, delta)?;
    let tables = ParentTables::build(&cloud, &h)?;
    let x = cloud.index_of(528).expect("grid point");
    let grid = [0.31, 0.45, 0.61, 0.9, 1.2, 1.8, 2.5];
    let r = run_boundary_experiment(&h, &tables, &cloud, x, -1, &grid, 10_000, 1, Some(DEFAULT_BUDGET))?;
    for row in &r.rows {
        let e = row.exact.as_ref().expect("enumerated");
        println!(
            "eps {:<5} mc {:.4} [{:.4}, {:.4}]  exact {:<6} product {:<8} factorizes {}",
            row.eps, row.estimate.p, row.estimate.lo, row.estimate.hi, e.probability.to_string(), e.product.to_string(), e.factorizes()
        );
    }
    println!("fitted exponent {:?}", r.eta_emp);

    let t = theory_constants(1e-6, 2)?;
    println!("M = 2, delta = 1e-6: C = {}, eta = {:.4}", t.c, t.eta);
    Ok(())
}
