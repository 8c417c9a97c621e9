//! Finite metric point clouds, covering counts and maximal separated sets.
//!
//! Points are stored in ascending id order, so a point's index doubles as its
//! rank in every "ascending id" tie-break used by the constructions.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::PointSet;

pub type PointId = u64;

/// Clouds at or below this size get a precomputed distance table.
pub const DEFAULT_TABLE_THRESHOLD: usize = 4096;

#[derive(Clone, Debug)]
pub struct MetricPointCloud {
    ids: Vec<PointId>,
    dim: usize,
    coords: Option<Vec<f64>>,
    table: Option<Vec<f64>>,
    generator: Option<String>,
    seed: Option<u64>,
}

impl MetricPointCloud {
    /// Euclidean cloud. Rows are reordered by ascending id.
    pub fn from_coordinates(ids: Vec<PointId>, coords: Vec<Vec<f64>>) -> Result<Self> {
        if ids.len() != coords.len() {
            return Err(Error::MalformedCloud(format!("{} ids but {} coordinate rows", ids.len(), coords.len())));
        }
        if ids.is_empty() {
            return Err(Error::MalformedCloud("cloud has no points".into()));
        }
        let dim = coords[0].len();
        if dim == 0 {
            return Err(Error::MalformedCloud("points need at least one coordinate".into()));
        }
        if let Some(row) = coords.iter().find(|c| c.len() != dim) {
            return Err(Error::MalformedCloud(format!("row of dimension {} in a {dim}-dimensional cloud", row.len())));
        }
        if coords.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::MalformedCloud("non-finite coordinate".into()));
        }
        let order = sorted_order(&ids)?;
        let ids_sorted: Vec<PointId> = order.iter().map(|&i| ids[i]).collect();
        let flat: Vec<f64> = order.iter().flat_map(|&i| coords[i].iter().copied()).collect();
        let mut cloud = MetricPointCloud { ids: ids_sorted, dim, coords: Some(flat), table: None, generator: None, seed: None };
        for i in 0..cloud.len() {
            for j in i + 1..cloud.len() {
                if cloud.euclidean(i, j) == 0.0 {
                    return Err(Error::MalformedCloud(format!(
                        "points {} and {} coincide",
                        cloud.ids[i], cloud.ids[j]
                    )));
                }
            }
        }
        cloud.build_table(DEFAULT_TABLE_THRESHOLD);
        Ok(cloud)
    }

    /// Cloud given by an explicit distance matrix. Symmetry, a zero diagonal,
    /// positive off-diagonal entries and the triangle inequality are checked
    /// (all triples up to 200 points, a seeded sample of triples above).
    pub fn from_distance_table(ids: Vec<PointId>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::MalformedCloud("cloud has no points".into()));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::MalformedCloud(format!("distance table must be {n}x{n}")));
        }
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return Err(Error::MalformedCloud(format!("d({0},{0}) = {1} != 0", ids[i], dist[i][i])));
            }
            for j in i + 1..n {
                let d = dist[i][j];
                if d != dist[j][i] {
                    return Err(Error::MalformedCloud(format!("asymmetric distance between {} and {}", ids[i], ids[j])));
                }
                if !(d > 0.0 && d.is_finite()) {
                    return Err(Error::MalformedCloud(format!("d({}, {}) = {d} must be positive and finite", ids[i], ids[j])));
                }
            }
        }
        let order = sorted_order(&ids)?;
        let ids_sorted: Vec<PointId> = order.iter().map(|&i| ids[i]).collect();
        let mut table = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for a in 0..n {
            for b in a + 1..n {
                table.push(dist[order[a]][order[b]]);
            }
        }
        let cloud = MetricPointCloud { ids: ids_sorted, dim: 0, coords: None, table: Some(table), generator: None, seed: None };
        if let Some((x, y, z)) = cloud.triangle_violation() {
            return Err(Error::MalformedCloud(format!(
                "triangle inequality fails on ({}, {}, {})",
                cloud.ids[x], cloud.ids[y], cloud.ids[z]
            )));
        }
        Ok(cloud)
    }

    /// Rebuilds (or drops) the distance table for a different size threshold.
    pub fn with_table_threshold(mut self, threshold: usize) -> Self {
        if self.coords.is_some() {
            self.table = None;
            self.build_table(threshold);
        }
        self
    }

    pub fn with_metadata(mut self, generator: impl Into<String>, seed: Option<u64>) -> Self {
        self.generator = Some(generator.into());
        self.seed = seed;
        self
    }

    fn build_table(&mut self, threshold: usize) {
        let n = self.len();
        if n > threshold {
            return;
        }
        let table: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let this = &*self;
                (i + 1..n).map(move |j| this.euclidean(i, j))
            })
            .collect();
        self.table = Some(table);
    }

    fn euclidean(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let c = self.coords.as_ref().expect("coordinate cloud");
        let (pa, pb) = (&c[a * self.dim..(a + 1) * self.dim], &c[b * self.dim..(b + 1) * self.dim]);
        pa.iter().zip(pb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    #[inline]
    fn condensed(&self, i: usize, j: usize) -> usize {
        let n = self.len();
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Distance between the points at indices `i` and `j`.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match &self.table {
            Some(t) => {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                t[self.condensed(a, b)]
            }
            None => self.euclidean(i, j),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> PointId {
        self.ids[index]
    }

    pub fn index_of(&self, id: PointId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    /// Coordinate dimension, 0 for table-only clouds.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coordinates(&self, index: usize) -> Option<&[f64]> {
        self.coords.as_ref().map(|c| &c[index * self.dim..(index + 1) * self.dim])
    }

    pub fn generator(&self) -> Option<&str> {
        self.generator.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn has_table(&self) -> bool {
        self.table.is_some()
    }

    pub fn diameter(&self) -> f64 {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| self.distance(i, j)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    /// Smallest distance between distinct points, `+inf` for a single point.
    pub fn min_separation(&self) -> f64 {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| self.distance(i, j)).fold(f64::INFINITY, f64::min))
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Open ball `{y : d(center, y) < r}`.
    pub fn ball(&self, center: usize, r: f64) -> PointSet {
        PointSet::from_mask((0..self.len()).map(|y| self.distance(center, y) < r).collect())
    }

    /// `d(x, set)`, `+inf` for an empty set.
    pub fn distance_to_set(&self, x: usize, set: &PointSet) -> f64 {
        set.iter().map(|y| self.distance(x, y)).fold(f64::INFINITY, f64::min)
    }

    /// Points within distance `< r` of `x`, excluding `x`, ascending by index.
    pub fn neighbors_within(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&y| y != x && self.distance(x, y) < r).collect()
    }

    fn triangle_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        let holds = |x: usize, y: usize, z: usize| {
            let (a, b, c) = (self.distance(x, z), self.distance(x, y), self.distance(y, z));
            a <= (b + c) * (1.0 + 1e-12)
        };
        if n <= 200 {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        if !holds(x, y, z) {
                            return Some((x, y, z));
                        }
                    }
                }
            }
            None
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7472_6961_6e67_6c65);
            (0..100_000).find_map(|_| {
                let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                (!holds(x, y, z)).then_some((x, y, z))
            })
        }
    }

    // Generators.

    /// `n` points `0, s, 2s, ...` on the real line, ids `0..n`.
    pub fn line(n: usize, spacing: f64) -> Result<Self> {
        if n == 0 || !(spacing > 0.0) {
            return Err(Error::InvalidParameter("line needs n >= 1 and a positive spacing".into()));
        }
        let coords = (0..n).map(|i| vec![i as f64 * spacing]).collect();
        let name = if spacing == 1.0 { format!("line {n}") } else { format!("line {n} {spacing}") };
        Ok(Self::from_coordinates((0..n as u64).collect(), coords)?.with_metadata(name, None))
    }

    /// Row-major `n x m` lattice with the given spacing; id `i * m + j` sits at `(i s, j s)`.
    pub fn grid(n: usize, m: usize, spacing: f64) -> Result<Self> {
        if n == 0 || m == 0 || !(spacing > 0.0) {
            return Err(Error::InvalidParameter("grid needs positive sides and spacing".into()));
        }
        let coords = (0..n).flat_map(|i| (0..m).map(move |j| vec![i as f64 * spacing, j as f64 * spacing])).collect();
        let name = if spacing == 1.0 { format!("grid {n} {m}") } else { format!("grid {n} {m} {spacing}") };
        Ok(Self::from_coordinates((0..(n * m) as u64).collect(), coords)?.with_metadata(name, None))
    }

    /// `n` points drawn uniformly from `[0, 1)^dim`.
    pub fn random_uniform(n: usize, dim: usize, seed: u64) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(Error::InvalidParameter("random-uniform needs n >= 1 and dim >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
        Ok(Self::from_coordinates((0..n as u64).collect(), coords)?
            .with_metadata(format!("random-uniform {n} {dim} {seed}"), Some(seed)))
    }

    /// Parses a generator spec: `line:N[:SPACING]`, `grid:NxM[:SPACING]`
    /// (or `grid:N:M[:SPACING]`), `random-uniform:N:DIM:SEED`.
    pub fn from_generator(spec: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognised cloud generator {spec:?}"));
        let parts: Vec<&str> = spec.split([':', ' ']).filter(|s| !s.is_empty()).collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            ["line", n] => Self::line(num(n)?, 1.0),
            ["line", n, s] => Self::line(num(n)?, real(s)?),
            ["grid", nm] | ["grid", nm, _] if nm.contains('x') => {
                let (n, m) = nm.split_once('x').ok_or_else(bad)?;
                let spacing = if parts.len() == 3 { real(parts[2])? } else { 1.0 };
                Self::grid(num(n)?, num(m)?, spacing)
            }
            ["grid", n, m] => Self::grid(num(n)?, num(m)?, 1.0),
            ["grid", n, m, s] => Self::grid(num(n)?, num(m)?, real(s)?),
            ["random-uniform", n, d, seed] => {
                Self::random_uniform(num(n)?, num(d)?, seed.parse().map_err(|_| bad())?)
            }
            _ => Err(bad()),
        }
    }

    /// Loads a `.csv` or `.json` file, or falls back to a generator spec.
    pub fn load(source: &str) -> Result<Self> {
        let path = Path::new(source);
        if path.exists() {
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            let file = std::fs::File::open(path)?;
            match ext {
                "json" => Self::read_json(file),
                _ => Self::read_csv(file),
            }
        } else {
            Self::from_generator(source)
        }
    }

    // I/O.

    /// CSV with header `id,x1,...,xn`.
    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.get(0) != Some("id") || header.len() < 2 {
            return Err(Error::MalformedCloud("CSV header must be id,x1,...,xn".into()));
        }
        let (mut ids, mut coords) = (Vec::new(), Vec::new());
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parse_err = |what: &str| Error::MalformedCloud(format!("row {}: bad {what}", line + 1));
            ids.push(record.get(0).unwrap_or("").parse::<PointId>().map_err(|_| parse_err("id"))?);
            let row: Vec<f64> = record
                .iter()
                .skip(1)
                .map(|v| v.parse::<f64>().map_err(|_| parse_err("coordinate")))
                .collect::<Result<_>>()?;
            if row.len() != header.len() - 1 {
                return Err(parse_err("column count"));
            }
            coords.push(row);
        }
        Self::from_coordinates(ids, coords)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        if self.coords.is_none() {
            return Err(Error::InvalidParameter("table-only clouds have no CSV form".into()));
        }
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string()];
        header.extend((1..=self.dim).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![self.ids[i].to_string()];
            row.extend(self.coordinates(i).unwrap().iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON `{"points": [ids], "dist": [[...]]}`.
    pub fn read_json(reader: impl Read) -> Result<Self> {
        let doc: DistanceTableJson = serde_json::from_reader(reader)?;
        Self::from_distance_table(doc.points, doc.dist)
    }

    pub fn to_json_table(&self) -> DistanceTableJson {
        let n = self.len();
        DistanceTableJson {
            points: self.ids.clone(),
            dist: (0..n).map(|i| (0..n).map(|j| self.distance(i, j)).collect()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceTableJson {
    pub points: Vec<PointId>,
    pub dist: Vec<Vec<f64>>,
}

fn sorted_order(ids: &[PointId]) -> Result<Vec<usize>> {
    let mut seen = HashSet::with_capacity(ids.len());
    if let Some(dup) = ids.iter().find(|id| !seen.insert(**id)) {
        return Err(Error::MalformedCloud(format!("duplicate point id {dup}")));
    }
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by_key(|&i| ids[i]);
    Ok(order)
}

/// Size of a greedy cover of `B(center, r)` by balls `B(c, r/2)`, `c` in the cloud.
///
/// Greedy set cover: repeatedly pick the center covering the most uncovered
/// ball points, breaking ties by the lowest id. Only centers within `3r/2`
/// of `center` can cover anything, so only those are scanned.
pub fn greedy_cover_count(cloud: &MetricPointCloud, center: usize, r: f64) -> Result<usize> {
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("cover radius {r} must be positive")));
    }
    let ball: Vec<usize> = (0..cloud.len()).filter(|&y| cloud.distance(center, y) < r).collect();
    if ball.is_empty() {
        return Ok(0);
    }
    let half = r / 2.0;
    let candidates: Vec<Vec<usize>> = (0..cloud.len())
        .filter(|&c| cloud.distance(center, c) < r + half)
        .map(|c| (0..ball.len()).filter(|&b| cloud.distance(c, ball[b]) < half).collect())
        .collect();
    let mut covered = vec![false; ball.len()];
    let mut remaining = ball.len();
    let mut count = 0;
    while remaining > 0 {
        let (best, gain) = candidates
            .iter()
            .enumerate()
            .map(|(i, list)| (i, list.iter().filter(|&&b| !covered[b]).count()))
            .fold((usize::MAX, 0), |acc, (i, g)| if g > acc.1 { (i, g) } else { acc });
        if gain == 0 {
            return Err(Error::Internal("greedy cover stalled".into()));
        }
        for &b in &candidates[best] {
            if !covered[b] {
                covered[b] = true;
                remaining -= 1;
            }
        }
        count += 1;
    }
    Ok(count)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverMethod {
    GreedyCover,
}

/// Empirical doubling constant: the largest greedy cover count over a sample of balls.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoublingEstimate {
    pub m: u64,
    pub method: CoverMethod,
    pub sampled_balls: usize,
}

pub fn estimate_doubling_constant(cloud: &MetricPointCloud, sample: &[(usize, f64)]) -> Result<DoublingEstimate> {
    if sample.is_empty() {
        return Err(Error::Precondition("doubling estimate needs at least one sampled ball".into()));
    }
    let counts: Vec<usize> = sample
        .par_iter()
        .map(|&(c, r)| greedy_cover_count(cloud, c, r))
        .collect::<Result<_>>()?;
    Ok(DoublingEstimate {
        m: counts.into_iter().max().unwrap_or(1).max(1) as u64,
        method: CoverMethod::GreedyCover,
        sampled_balls: sample.len(),
    })
}

/// Deterministic ball sample: every radius at up to `max_centers` evenly strided centers.
pub fn doubling_sample(cloud: &MetricPointCloud, radii: &[f64], max_centers: usize) -> Vec<(usize, f64)> {
    let n = cloud.len();
    let stride = n.div_ceil(max_centers.max(1)).max(1);
    (0..n).step_by(stride).flat_map(|c| radii.iter().map(move |&r| (c, r))).collect()
}

/// Whether every pair of distinct points in `set` is at distance `>= r`.
pub fn is_separated(cloud: &MetricPointCloud, set: &[usize], r: f64) -> bool {
    first_separation_violation(cloud, set, r).is_none()
}

pub fn first_separation_violation(cloud: &MetricPointCloud, set: &[usize], r: f64) -> Option<(usize, usize)> {
    for (a, &x) in set.iter().enumerate() {
        for &y in &set[a + 1..] {
            if x == y || cloud.distance(x, y) < r {
                return Some((x, y));
            }
        }
    }
    None
}

/// Maximal `r`-separated extension of `seed` within `within`.
///
/// Members of `within` are tried in ascending id order; the result lists the
/// seed first (in its given order) followed by the added points.
pub fn maximal_separated_extension(
    cloud: &MetricPointCloud,
    r: f64,
    seed: &[usize],
    within: &PointSet,
) -> Result<Vec<usize>> {
    if let Some((x, y)) = first_separation_violation(cloud, seed, r) {
        return Err(Error::Precondition(format!(
            "seed is not {r}-separated: d({}, {}) = {}",
            cloud.id(x),
            cloud.id(y),
            cloud.distance(x, y)
        )));
    }
    let mut chosen = PointSet::from_indices(cloud.len(), seed.iter().copied());
    let mut result = seed.to_vec();
    for z in within.iter() {
        if chosen.contains(z) {
            continue;
        }
        if result.iter().all(|&y| cloud.distance(z, y) >= r) {
            chosen.insert(z);
            result.push(z);
        }
    }
    Ok(result)
}

/// Whether `set` is maximal `r`-separated within `within`; returns the first
/// point that could still be added.
pub fn maximality_violation(cloud: &MetricPointCloud, set: &[usize], r: f64, within: &PointSet) -> Option<usize> {
    let members = PointSet::from_indices(cloud.len(), set.iter().copied());
    within.iter().find(|&z| !members.contains(z) && set.iter().all(|&y| cloud.distance(z, y) >= r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line10() -> MetricPointCloud {
        MetricPointCloud::line(10, 1.0).unwrap()
    }

    #[test]
    fn greedy_cover_examples() {
        let single = MetricPointCloud::line(1, 1.0).unwrap();
        assert_eq!(greedy_cover_count(&single, 0, 5.0).unwrap(), 1);
        let c = line10();
        assert_eq!(greedy_cover_count(&c, 0, 20.0).unwrap(), 1);
        assert_eq!(greedy_cover_count(&c, 4, 0.5).unwrap(), 1);
        assert!(greedy_cover_count(&c, 4, 0.0).is_err());
    }

    #[test]
    fn doubling_examples() {
        let single = MetricPointCloud::line(1, 1.0).unwrap();
        assert_eq!(estimate_doubling_constant(&single, &[(0, 1.0)]).unwrap().m, 1);
        let c = line10();
        let sample: Vec<_> = (0..10).flat_map(|x| [1.0, 2.0, 4.0, 8.0].map(|r| (x, r))).collect();
        assert!(estimate_doubling_constant(&c, &sample).unwrap().m <= 3);
        let g = MetricPointCloud::grid(8, 8, 1.0).unwrap();
        let sample: Vec<_> = (0..64).flat_map(|x| [1.0, 2.0, 4.0].map(|r| (x, r))).collect();
        assert!(estimate_doubling_constant(&g, &sample).unwrap().m <= 9);
        assert!(estimate_doubling_constant(&g, &[]).is_err());
    }

    #[test]
    fn extension_examples() {
        let c = line10();
        let all = PointSet::full(10);
        assert_eq!(maximal_separated_extension(&c, 4.0, &[0], &all).unwrap(), vec![0, 4, 8]);
        assert_eq!(maximal_separated_extension(&c, 20.0, &[0], &all).unwrap(), vec![0]);
        assert_eq!(maximal_separated_extension(&c, 1.0, &[], &all).unwrap(), (0..10).collect::<Vec<_>>());
        assert!(matches!(maximal_separated_extension(&c, 4.0, &[0, 1], &all), Err(Error::Precondition(_))));
    }

    #[test]
    fn ids_are_sorted_and_unique() {
        let c = MetricPointCloud::from_coordinates(vec![5, 2, 9], vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(c.ids(), &[2, 5, 9]);
        assert_eq!(c.distance(0, 1), 1.0);
        assert!(MetricPointCloud::from_coordinates(vec![1, 1], vec![vec![0.0], vec![1.0]]).is_err());
        assert!(MetricPointCloud::from_coordinates(vec![1, 2], vec![vec![0.0], vec![0.0]]).is_err());
    }

    #[test]
    fn table_and_on_demand_agree() {
        let c = MetricPointCloud::random_uniform(40, 3, 11).unwrap();
        let lazy = c.clone().with_table_threshold(0);
        assert!(c.has_table() && !lazy.has_table());
        for i in 0..40 {
            for j in 0..40 {
                assert_eq!(c.distance(i, j), lazy.distance(i, j));
                assert_eq!(c.distance(i, j), c.distance(j, i));
            }
        }
    }

    #[test]
    fn distance_table_validation() {
        let ok = MetricPointCloud::from_distance_table(vec![0, 1, 2], vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ]);
        assert!(ok.is_ok());
        let broken = MetricPointCloud::from_distance_table(vec![0, 1, 2], vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ]);
        assert!(matches!(broken, Err(Error::MalformedCloud(_))));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let g = MetricPointCloud::grid(3, 2, 0.5).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = MetricPointCloud::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.ids(), g.ids());
        let json = serde_json::to_vec(&g.to_json_table()).unwrap();
        let table = MetricPointCloud::read_json(json.as_slice()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(table.distance(i, j), g.distance(i, j));
            }
        }
        assert!(MetricPointCloud::read_csv("name,x\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn generator_specs() {
        assert_eq!(MetricPointCloud::from_generator("line:10").unwrap().len(), 10);
        assert_eq!(MetricPointCloud::from_generator("grid:8x8").unwrap().len(), 64);
        assert_eq!(MetricPointCloud::from_generator("grid 4 5").unwrap().len(), 20);
        assert_eq!(MetricPointCloud::from_generator("random-uniform:50:2:3").unwrap().dim(), 2);
        assert!(MetricPointCloud::from_generator("sphere:3").is_err());
    }
}
