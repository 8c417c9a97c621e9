//! Haar basis of a cube system under a weighted measure.
use dyadic_cubes::cubes::{CubeSystem, RadiusSchedule};
use dyadic_cubes::haar::{haar_basis, verify_wavelet_axioms};
use dyadic_cubes::hierarchy::DyadicHierarchy;
use dyadic_cubes::{Delta, MetricPointCloud};

fn main() -> dyadic_cubes::Result<()> {
    let cloud = MetricPointCloud::grid(8, 8, 0.3)?;
    let h = DyadicHierarchy::build_auto(&cloud, Delta::parse("0.1")?)?;
    let cs = CubeSystem::build(&cloud, &h, &RadiusSchedule::constant(&h, 2)?)?;
    let mu: Vec<f64> = (1..=cloud.len()).map(|i| i as f64).collect();
    let basis = haar_basis(&cs, &mu)?;
    println!("{} functions on {} points", basis.len(), cloud.len());
    for row in verify_wavelet_axioms(&cloud, &cs, &basis) {
        println!("{:<18} {:?} {}", row.check, row.pass, row.measured.map(|m| m.to_string()).unwrap_or_default());
    }
    let f: Vec<f64> = (0..cloud.len()).map(|i| (i as f64 * 0.7).sin()).collect();
    let back = basis.reconstruct(&f);
    let err = f.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("reconstruction error {err:e}, Parseval defect {:e}", basis.parseval_defect(&f));
    Ok(())
}
