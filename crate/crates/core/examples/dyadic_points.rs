//! The layered construction around a base point, and a configuration where
//! no coarser net can contain a given finer one.
use dyadic_cubes::hierarchy::{coarser_level_search, LayeredConstruction};
use dyadic_cubes::MetricPointCloud;

fn main() -> dyadic_cubes::Result<()> {
    let cloud = MetricPointCloud::line(41, 1.0)?;
    let lc = LayeredConstruction::build(&cloud, 0, 3.0, 4)?;
    for &(n, k) in lc.order() {
        let ids: Vec<u64> = lc.set(n, k).iter().map(|&p| cloud.id(p)).collect();
        println!("C^{n}_{k} (radius {:.0}): {ids:?}", lc.radius(n, k));
    }
    for row in lc.verify(&cloud) {
        println!("{:<26} {:?}", row.check, row.pass);
    }

    // Two clusters of spacing 0.1; the finer net is {0, 8}.
    let ticks: Vec<i64> = (-29..30).chain(51..110).collect();
    let coords: Vec<Vec<f64>> = ticks.iter().map(|&i| vec![i as f64 / 10.0]).collect();
    let cloud = MetricPointCloud::from_coordinates((0..coords.len() as u64).collect(), coords)?;
    let at = |t: i64| ticks.iter().position(|&i| i == t).expect("tick present");
    let finer = [at(0), at(80)];
    for r in [3.0, 9.0] {
        match coarser_level_search(&cloud, &finer, r)? {
            Some(set) => println!("r = {r}: coarser net of {} points", set.len()),
            None => println!("r = {r}: infeasible"),
        }
    }
    Ok(())
}
