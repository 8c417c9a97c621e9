//! Boundaries of cubes against boundaries of approximated cubes, and the ball
//! cover of an approximated-cube boundary.
use dyadic_cubes::boundary::{approx_boundary_ball_cover, cube_boundary_inclusions, epsilon_boundary, labeled_boundary_union};
use dyadic_cubes::cubes::{CubeSystem, RadiusSchedule};
use dyadic_cubes::hierarchy::DyadicHierarchy;
use dyadic_cubes::{Delta, MetricPointCloud};

fn main() -> dyadic_cubes::Result<()> {
    let cloud = MetricPointCloud::grid(12, 12, 0.3)?;
    let delta = Delta::parse("0.1")?;
    let h = DyadicHierarchy::build_auto(&cloud, delta)?;
    let s = RadiusSchedule::constant(&h, 6)?;
    let cs = CubeSystem::build(&cloud, &h, &s)?;
    let k = h.k_max() - 1;
    let eps = 0.4;

    let q = cs.cube_set(k, 0);
    println!("Q_0 has {} points, eps-boundary {}", q.len(), epsilon_boundary(&cloud, &q, eps).len());
    println!("union of level-{k} boundaries: {} points", labeled_boundary_union(&cloud, cs.labels(k), eps).len());

    let out = cube_boundary_inclusions(&cloud, &cs, &s, k, eps, 1)?;
    println!("inclusions hold: {}", out.holds());
    let cover = approx_boundary_ball_cover(&cloud, &h, &s, k, 0, eps, 9)?;
    println!("ball cover: {} balls (bound {}), complete {}", cover.balls.len(), cover.bound, cover.uncovered.is_none());
    Ok(())
}
