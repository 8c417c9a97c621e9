//! Search the adjacent systems for a cube that holds a ball together with its
//! enlargement.
use dyadic_cubes::experiments::{find_adjacent_cover, AdjacentSystems};
use dyadic_cubes::hierarchy::DyadicHierarchy;
use dyadic_cubes::random::ParentTables;
use dyadic_cubes::{Delta, MetricPointCloud};

fn main() -> dyadic_cubes::Result<()> {
    let cloud = MetricPointCloud::line(10, 0.01)?;
    let h = DyadicHierarchy::build_auto(&cloud, Delta::parse("0.1")?)?;
    let tables = ParentTables::build(&cloud, &h)?;
    let systems = AdjacentSystems::build(&h, &tables)?;
    for x in 0..cloud.len() {
        let out = find_adjacent_cover(&cloud, &systems, x, 0.0005, 1)?;
        println!(
            "x = {x}: k = {}, omega {:?}, cube {:?}, bad fraction {}, conclusions {:?}",
            out.k,
            out.omega,
            out.cube,
            out.bad_fraction,
            out.checks.map(|c| c.all())
        );
    }
    Ok(())
}
