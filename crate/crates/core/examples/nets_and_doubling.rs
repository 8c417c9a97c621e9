//! Nested nets on a grid, their checks, and a doubling estimate.
use dyadic_cubes::hierarchy::{verify_hierarchy, DyadicHierarchy};
use dyadic_cubes::metric::{doubling_sample, estimate_doubling_constant, greedy_cover_count};
use dyadic_cubes::{Delta, MetricPointCloud};

fn main() -> dyadic_cubes::Result<()> {
    let cloud = MetricPointCloud::grid(16, 16, 1.0)?;
    let h = DyadicHierarchy::build_auto(&cloud, Delta::parse("1/4")?)?;
    for (k, centers) in h.levels() {
        println!("level {k:>2}: {:>3} centers", centers.len());
    }
    for row in verify_hierarchy(&cloud, &h) {
        println!("{:<24} {:?}", row.check, row.pass);
    }

    let radii = [2.0, 4.0, 8.0];
    let est = estimate_doubling_constant(&cloud, &doubling_sample(&cloud, &radii, 32))?;
    println!("doubling estimate M = {} over {} balls", est.m, est.sampled_balls);
    println!("B(0, 8) needs {} balls of radius 4", greedy_cover_count(&cloud, 0, 8.0)?);
    Ok(())
}
