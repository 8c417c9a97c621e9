//! Sample an independent radius assignment, build its cubes and render one level.
use dyadic_cubes::cubes::{measure_inclusion, verify_cubes, CubeSystem};
use dyadic_cubes::hierarchy::DyadicHierarchy;
use dyadic_cubes::random::{sample_assignment, schedule_from_assignment, AssignmentKind};
use dyadic_cubes::{Delta, MetricPointCloud};

fn main() -> dyadic_cubes::Result<()> {
    let cloud = MetricPointCloud::random_uniform(400, 2, 11)?;
    let delta = Delta::parse("0.2")?;
    let h = DyadicHierarchy::build_auto(&cloud, delta)?;
    let a = sample_assignment(delta, AssignmentKind::Independent, h.k_min(), h.k_max(), 42);
    println!("draws {:?}", a.values);
    let s = schedule_from_assignment(delta, &a)?;
    let cs = CubeSystem::build(&cloud, &h, &s)?;
    for k in h.k_min()..=h.k_max() {
        let sizes: Vec<usize> = cs.cubes_at(k).iter().map(Vec::len).collect();
        println!("level {k}: {} cubes, largest {}", sizes.len(), sizes.iter().max().unwrap_or(&0));
    }
    let c = measure_inclusion(&cloud, &cs);
    println!("inner {:.3} outer {:.3} (in units of delta^k)", c.inner, c.outer);
    for row in verify_cubes(&cloud, &cs, &s, 9) {
        println!("{:<18} {:?}", row.check, row.pass);
    }
    let k = h.k_min() + 1;
    let path = std::env::temp_dir().join("random_cubes.svg");
    std::fs::write(&path, cs.render_svg(&cloud, k)?)?;
    println!("level {k} written to {}", path.display());
    Ok(())
}
