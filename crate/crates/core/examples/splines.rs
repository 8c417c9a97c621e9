//! Exact spline values, refinement coefficients and Hölder quotients.
use dyadic_cubes::experiments::DEFAULT_BUDGET;
use dyadic_cubes::hierarchy::DyadicHierarchy;
use dyadic_cubes::random::ParentTables;
use dyadic_cubes::splines::{holder_quotient, refinement_coefficients, verify_splines, SplineTable};
use dyadic_cubes::{Delta, MetricPointCloud};

fn main() -> dyadic_cubes::Result<()> {
    let cloud = MetricPointCloud::line(10, 0.3)?;
    let h = DyadicHierarchy::build_auto(&cloud, Delta::parse("0.1")?)?;
    let tables = ParentTables::build(&cloud, &h)?;
    let k = h.k_max() - 1;
    let table = SplineTable::build(&h, &tables, k, DEFAULT_BUDGET)?;
    for (alpha, &z) in h.level(k).iter().enumerate() {
        let row: Vec<String> = (0..cloud.len()).map(|x| table.get(alpha, x).to_string()).collect();
        println!("s_{alpha} (center {}): {}", cloud.id(z), row.join(" "));
    }
    let p = refinement_coefficients(&h, &tables, k)?;
    println!("p[0] = {:?}", p[0].iter().map(|c| c.to_string()).collect::<Vec<_>>());
    for row in verify_splines(&cloud, &h, &tables, k, DEFAULT_BUDGET)? {
        println!("{:<24} {:?}", row.check, row.pass);
    }
    for eta in [0.25, 0.5, 0.75, 0.9] {
        println!("eta {eta}: quotient {:.4}", holder_quotient(&cloud, &h, &table, eta));
    }
    Ok(())
}
