//! Haar bases adapted to a cube system and measure.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cubes::CubeSystem;
use crate::error::{Error, Result};
use crate::metric::MetricPointCloud;
use crate::report::CheckRow;

pub const TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarFunction {
    pub k: i32,
    pub alpha: usize,
    pub j: usize,
    /// Point index of the cube center.
    pub center: usize,
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

impl HaarFunction {
    pub fn value_at(&self, x: usize) -> f64 {
        self.support.binary_search(&x).map_or(0.0, |i| self.values[i])
    }

    pub fn inner(&self, f: &[f64], mu: &[f64]) -> f64 {
        self.support.iter().zip(&self.values).map(|(&x, &v)| f[x] * v * mu[x]).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarBasis {
    pub functions: Vec<HaarFunction>,
    pub mu: Vec<f64>,
}

/// Each cube `Q` with children `Q_1, ..., Q_m` (ascending index) contributes
/// `ψ_j = (μ(V) 1_U - μ(U) 1_V) / sqrt(μ(U) μ(V) (μ(U) + μ(V)))` with
/// `U = Q_j`, `V = Q_(j+1) ∪ ... ∪ Q_m` for `j = 1, ..., m - 1`.
pub fn haar_basis(cs: &CubeSystem<'_>, mu: &[f64]) -> Result<HaarBasis> {
    let h = cs.hierarchy();
    if mu.len() != h.n_points() {
        return Err(Error::InvalidParameter(format!("measure has {} weights for {} points", mu.len(), h.n_points())));
    }
    if let Some(w) = mu.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter(format!("weights must be positive, got {w}")));
    }
    let mass = |pts: &[usize]| pts.iter().map(|&x| mu[x]).sum::<f64>();
    let mut functions = Vec::new();
    for k in h.k_min()..h.k_max() {
        for alpha in 0..h.level(k).len() {
            let children = cs.children(k, alpha);
            let mut rest: Vec<usize> = children.iter().flat_map(|&c| cs.cube(k + 1, c).iter().copied()).collect();
            rest.sort_unstable();
            for (j, &c) in children.iter().enumerate().take(children.len().saturating_sub(1)) {
                let u = cs.cube(k + 1, c);
                rest.retain(|x| u.binary_search(x).is_err());
                let (mu_u, mu_v) = (mass(u), mass(&rest));
                let norm = (mu_u * mu_v * (mu_u + mu_v)).sqrt();
                let mut entries: Vec<(usize, f64)> = u.iter().map(|&x| (x, mu_v / norm)).collect();
                entries.extend(rest.iter().map(|&x| (x, -mu_u / norm)));
                entries.sort_unstable_by_key(|e| e.0);
                functions.push(HaarFunction {
                    k,
                    alpha,
                    j: j + 1,
                    center: h.center(k, alpha),
                    support: entries.iter().map(|e| e.0).collect(),
                    values: entries.iter().map(|e| e.1).collect(),
                });
            }
        }
    }
    Ok(HaarBasis { functions, mu: mu.to_vec() })
}

impl HaarBasis {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_defect(&self) -> f64 {
        let mut by_point: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.mu.len()];
        for (i, f) in self.functions.iter().enumerate() {
            for (&x, &v) in f.support.iter().zip(&f.values) {
                by_point[x].push((i, v));
            }
        }
        let mut gram: HashMap<(usize, usize), f64> = HashMap::new();
        for (x, list) in by_point.iter().enumerate() {
            for &(i, a) in list {
                for &(j, b) in list {
                    if i <= j {
                        *gram.entry((i, j)).or_default() += a * b * self.mu[x];
                    }
                }
            }
        }
        let mut worst = 0.0f64;
        for i in 0..self.functions.len() {
            worst = worst.max((gram.get(&(i, i)).copied().unwrap_or(0.0) - 1.0).abs());
        }
        for (&(i, j), &g) in &gram {
            if i != j {
                worst = worst.max(g.abs());
            }
        }
        worst
    }

    /// `|Σ⟨f, ψ⟩² + ⟨f, 1⟩²/μ(X) - ‖f‖²|`
    pub fn parseval_defect(&self, f: &[f64]) -> f64 {
        let total: f64 = self.mu.iter().sum();
        let mean: f64 = f.iter().zip(&self.mu).map(|(a, w)| a * w).sum();
        let norm: f64 = f.iter().zip(&self.mu).map(|(a, w)| a * a * w).sum();
        let coeffs: f64 = self.functions.iter().map(|p| p.inner(f, &self.mu).powi(2)).sum();
        (coeffs + mean * mean / total - norm).abs()
    }

    /// `f` from its coefficients.
    pub fn reconstruct(&self, f: &[f64]) -> Vec<f64> {
        let total: f64 = self.mu.iter().sum();
        let mean = f.iter().zip(&self.mu).map(|(a, w)| a * w).sum::<f64>() / total;
        let mut out = vec![mean; f.len()];
        for p in &self.functions {
            let c = p.inner(f, &self.mu);
            for (&x, &v) in p.support.iter().zip(&p.values) {
                out[x] += c * v;
            }
        }
        out
    }
}

/// Mean zero, orthonormality, completeness, support radius, and the
/// localization constant for `ρ = 1_[0,3]`. Support is asserted for
/// `δ <= 1/60` and measured otherwise.
pub fn verify_wavelet_axioms(cloud: &MetricPointCloud, cs: &CubeSystem<'_>, basis: &HaarBasis) -> Vec<CheckRow> {
    let h = cs.hierarchy();
    let delta = h.delta();
    let params = json!({ "delta": delta.to_string(), "omega": cs.omega(), "functions": basis.len() });
    let mu = &basis.mu;

    let mean = basis.functions.iter().find_map(|p| {
        let m: f64 = p.support.iter().zip(&p.values).map(|(&x, &v)| v * mu[x]).sum();
        (m.abs() > TOLERANCE).then(|| format!("psi(k = {}, alpha = {}, j = {}) has mean {m:e}", p.k, p.alpha, p.j))
    });
    let gram = basis.gram_defect();
    let count = basis.len() + 1 == cloud.len();

    let mut reach = 0.0f64;
    let mut localization = 0.0f64;
    for p in &basis.functions {
        let side = delta.pow(p.k);
        let ball: f64 = cloud.ball(p.center, side).iter().map(|y| mu[y]).sum();
        for (&x, &v) in p.support.iter().zip(&p.values) {
            let d = cloud.distance(x, p.center) / side;
            reach = reach.max(d);
            localization = localization.max(v.abs() * ball.sqrt());
        }
    }
    let support = CheckRow::new("haar.support", params.clone()).measured(json!({ "max_reach": reach }));
    let support = if delta.satisfies_cube_hypothesis() { support.pass(reach < 3.0) } else { support };
    let localization = if reach <= 3.0 { json!(localization) } else { json!("unbounded") };

    vec![
        CheckRow::new("haar.mean-zero", params.clone()).outcome(mean),
        CheckRow::new("haar.orthonormal", params.clone())
            .outcome((gram > TOLERANCE).then(|| format!("Gram matrix deviates by {gram:e}")))
            .measured(json!(gram)),
        CheckRow::new("haar.count", params.clone())
            .outcome((!count).then(|| format!("{} functions for {} points", basis.len(), cloud.len()))),
        support,
        CheckRow::new("haar.localization", params).measured(localization),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubes::RadiusSchedule;
    use crate::hierarchy::DyadicHierarchy;
    use crate::scale::Delta;

    fn system(c: &MetricPointCloud) -> DyadicHierarchy {
        DyadicHierarchy::build_auto(c, Delta::new(1, 10).unwrap()).unwrap()
    }

    #[test]
    fn orthonormal_and_complete() {
        let c = MetricPointCloud::grid(6, 6, 0.3).unwrap();
        let h = system(&c);
        let s = RadiusSchedule::constant(&h, 3).unwrap();
        let cs = CubeSystem::build(&c, &h, &s).unwrap();
        let mu: Vec<f64> = (0..c.len()).map(|i| 1.0 + (i % 5) as f64).collect();
        let b = haar_basis(&cs, &mu).unwrap();
        let rows = verify_wavelet_axioms(&c, &cs, &b);
        assert!(rows.iter().all(|r| !r.failed()), "{rows:?}");
        let f: Vec<f64> = (0..c.len()).map(|i| ((i * 7) % 11) as f64 - 3.0).collect();
        assert!(b.parseval_defect(&f) < 1e-9);
        let back = b.reconstruct(&f);
        assert!(back.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn perturbation_is_detected() {
        let c = MetricPointCloud::line(10, 0.3).unwrap();
        let h = system(&c);
        let cs = CubeSystem::build(&c, &h, &RadiusSchedule::constant(&h, 0).unwrap()).unwrap();
        let mut b = haar_basis(&cs, &vec![1.0; 10]).unwrap();
        b.functions[0].values[0] += 1e-3;
        let rows = verify_wavelet_axioms(&c, &cs, &b);
        assert!(rows.iter().any(|r| r.check == "haar.orthonormal" && r.failed()));
    }

    #[test]
    fn two_point_function() {
        let c = MetricPointCloud::line(2, 1.0).unwrap();
        let h = system(&c);
        let cs = CubeSystem::build(&c, &h, &RadiusSchedule::constant(&h, 0).unwrap()).unwrap();
        let b = haar_basis(&cs, &[1.0, 3.0]).unwrap();
        assert_eq!(b.len(), 1);
        let p = &b.functions[0];
        assert!((p.values[0] - 3.0 / 12f64.sqrt()).abs() < 1e-12);
        assert!((p.values[1] + 1.0 / 12f64.sqrt()).abs() < 1e-12);
    }
}
