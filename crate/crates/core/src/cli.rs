//! Command-line front end. Exit codes: 0 success, 1 a verification check
//! failed, 2 usage or input error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::cubes::{verify_cubes, CubeSystem, RadiusSchedule};
use crate::error::{Error, Result};
use crate::experiments::{find_adjacent_cover, run_boundary_experiment, AdjacentSystems};
use crate::haar::{haar_basis, verify_wavelet_axioms};
use crate::hierarchy::{verify_hierarchy, DyadicHierarchy, LayeredConstruction};
use crate::metric::MetricPointCloud;
use crate::random::{annulus_hit_probability, sample_assignment_indexed, schedule_from_assignment, AssignmentKind, ParentTables};
use crate::report::{CheckRow, Report};
use crate::scale::{parse_rational, Delta};
use crate::splines::{spline_mc, verify_splines, SplineTable};
use crate::verify::{estimated_doubling, verify_suite, with_workers, VerifyOptions};
use crate::Rational;

const BUDGET_ENV: &str = "DYADIC_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "dyadic", version, about = "Dyadic cube systems on finite metric point clouds")]
pub struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// JSON object whose keys mirror the long flags; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CloudArgs {
    /// Point file (.csv or .json) or generator: `line:N[:S]`, `grid:NxM[:S]`, `random-uniform:N:DIM:SEED`.
    #[arg(long)]
    pub cloud: String,
    /// Scale parameter in (0, 1/2), decimal or `p/q`.
    #[arg(long)]
    pub delta: String,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Independent,
    Adjacent,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build and check the nested nets.
    Net {
        #[command(flatten)]
        cloud: CloudArgs,
        #[arg(long, allow_hyphen_values = true)]
        k_min: Option<i32>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Layered construction around one base point.
    Layered {
        #[arg(long)]
        cloud: String,
        /// Id of the base point.
        #[arg(long)]
        x0: u64,
        #[arg(long, default_value_t = 3.0)]
        big_delta: f64,
        #[arg(long, default_value_t = 4)]
        n_max: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build one cube system.
    Cubes {
        #[command(flatten)]
        cloud: CloudArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Kind::Independent)]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        sample: u64,
        #[arg(long, allow_hyphen_values = true)]
        render_level: Option<i32>,
        /// SVG target for `--render-level`; defaults to `cubes.svg`.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact annulus probability against its bound.
    Prob {
        #[arg(long)]
        delta: String,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<i32>,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        /// JSON array of `{k, m, dist, eps}` objects.
        #[arg(long, conflicts_with_all = ["k", "m", "dist", "eps"])]
        batch: Option<PathBuf>,
    },
    /// Boundary probability over an epsilon grid.
    BoundaryExp {
        #[command(flatten)]
        cloud: CloudArgs,
        /// Point id.
        #[arg(long)]
        x: u64,
        #[arg(long, allow_hyphen_values = true)]
        k: i32,
        /// Comma-separated epsilon values.
        #[arg(long, value_delimiter = ',', required = true)]
        eps_grid: Vec<f64>,
        #[arg(long = "N", alias = "n", default_value_t = 10_000)]
        n: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        exact: bool,
        #[arg(long, env = BUDGET_ENV, default_value_t = crate::experiments::DEFAULT_BUDGET)]
        budget: u128,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Ball search over the adjacent systems.
    Adjacent {
        #[command(flatten)]
        cloud: CloudArgs,
        #[arg(long, default_value_t = 0)]
        p: u32,
        /// JSON array of `{x, r}` with `x` a point id.
        #[arg(long)]
        balls: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Spline table at one level.
    Splines {
        #[command(flatten)]
        cloud: CloudArgs,
        #[arg(long, allow_hyphen_values = true)]
        k: i32,
        /// Enumerate the draws (the default).
        #[arg(long, conflicts_with = "mc")]
        exact: bool,
        /// Monte Carlo sample count instead of enumeration.
        #[arg(long)]
        mc: Option<u64>,
        #[arg(long, requires = "mc")]
        seed: Option<u64>,
        #[arg(long, env = BUDGET_ENV, default_value_t = crate::experiments::DEFAULT_BUDGET)]
        budget: u128,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Haar basis of one sampled cube system.
    Haar {
        #[command(flatten)]
        cloud: CloudArgs,
        #[arg(long)]
        seed: u64,
        /// JSON array of weights in point order, or an object from id to weight.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Every invariant suite on one cloud.
    Verify {
        #[command(flatten)]
        cloud: CloudArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        samples: u64,
        #[arg(long, default_value_t = 4000)]
        mc_samples: u64,
        #[arg(long, env = BUDGET_ENV, default_value_t = crate::experiments::DEFAULT_BUDGET)]
        budget: u128,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Result of one invocation: the text to emit and whether every check passed.
pub struct Outcome {
    pub output: String,
    pub target: Option<PathBuf>,
    pub pass: bool,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match with_workers(cli.workers, || run(&cli.command)).and_then(|r| r) {
        Ok(outcome) => {
            let written = match &outcome.target {
                Some(p) => fs::write(p, &outcome.output).map_err(Error::from),
                None => match writeln!(std::io::stdout().lock(), "{}", outcome.output) {
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                    r => r.map_err(Error::from),
                },
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 2;
            }
            if outcome.pass {
                0
            } else {
                eprintln!("verification failed");
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Appends `--key value` pairs from the `--config` file for keys not already
/// present on the command line. A `"subcommand"` key supplies a missing
/// subcommand.
fn merge_config(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args.get(pos + 1).ok_or_else(|| Error::InvalidParameter("--config needs a path".into()))?.clone();
    let text = fs::read_to_string(Path::new(&path))?;
    let Value::Object(map) = serde_json::from_str::<Value>(&text)? else {
        return Err(Error::InvalidParameter("config must be a JSON object".into()));
    };
    args.drain(pos..pos + 2);
    let present: Vec<String> = args.iter().filter_map(|a| a.to_str()).filter_map(|a| a.strip_prefix("--")).map(str::to_string).collect();
    if let Some(sub) = map.get("subcommand").and_then(Value::as_str) {
        let known = ["net", "layered", "cubes", "prob", "boundary-exp", "adjacent", "splines", "haar", "verify"];
        if !args.iter().any(|a| a.to_str().is_some_and(|s| known.contains(&s))) {
            args.insert(1, sub.into());
        }
    }
    for (key, value) in map {
        let flag = key.replace('_', "-");
        if flag == "subcommand" || present.contains(&flag) {
            continue;
        }
        match value {
            Value::Bool(true) => args.push(format!("--{flag}").into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let joined: Vec<String> = items.iter().map(value_text).collect();
                args.push(format!("--{flag}").into());
                args.push(joined.join(",").into());
            }
            other => {
                args.push(format!("--{flag}").into());
                args.push(value_text(&other).into());
            }
        }
    }
    Ok(args)
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn load(cloud: &CloudArgs) -> Result<(MetricPointCloud, Delta)> {
    Ok((MetricPointCloud::load(&cloud.cloud)?, Delta::parse(&cloud.delta)?))
}

fn point(cloud: &MetricPointCloud, id: u64) -> Result<usize> {
    cloud.index_of(id).ok_or_else(|| Error::InvalidParameter(format!("no point with id {id}")))
}

fn emit(value: &impl serde::Serialize, out: &OutArgs, pass: bool) -> Result<Outcome> {
    Ok(Outcome { output: serde_json::to_string_pretty(value)?, target: out.out.clone(), pass })
}

fn independent_schedule(h: &DyadicHierarchy, kind: Kind, seed: u64, sample: u64) -> Result<RadiusSchedule> {
    let kind = match kind {
        Kind::Independent => AssignmentKind::Independent,
        Kind::Adjacent => AssignmentKind::Adjacent,
    };
    let a = sample_assignment_indexed(h.delta(), kind, h.k_min(), h.k_max(), seed, sample);
    schedule_from_assignment(h.delta(), &a)
}

fn all_pass(rows: &[CheckRow]) -> bool {
    rows.iter().all(|r| !r.failed())
}

pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Net { cloud, k_min, out } => {
            let (c, delta) = load(cloud)?;
            let h = match k_min {
                Some(k) => DyadicHierarchy::build(&c, delta, *k)?,
                None => DyadicHierarchy::build_auto(&c, delta)?,
            };
            let checks = verify_hierarchy(&c, &h);
            let doubling = estimated_doubling(&c, &h)?;
            emit(&json!({ "hierarchy": h.to_json(&c), "doubling": doubling, "checks": checks }), out, all_pass(&checks))
        }
        Command::Layered { cloud, x0, big_delta, n_max, out } => {
            let c = MetricPointCloud::load(cloud)?;
            let lc = LayeredConstruction::build(&c, point(&c, *x0)?, *big_delta, *n_max)?;
            let sets: BTreeMap<String, Vec<u64>> = lc
                .order()
                .iter()
                .map(|&(n, k)| (format!("{n}:{k}"), lc.set(n, k).iter().map(|&p| c.id(p)).collect()))
                .collect();
            let checks = lc.verify(&c);
            emit(&json!({ "sets": sets, "checks": checks }), out, all_pass(&checks))
        }
        Command::Cubes { cloud, seed, kind, sample, render_level, svg, out } => {
            let (c, delta) = load(cloud)?;
            let h = DyadicHierarchy::build_auto(&c, delta)?;
            let s = independent_schedule(&h, *kind, *seed, *sample)?;
            let cs = CubeSystem::build(&c, &h, &s)?;
            if let Some(k) = render_level {
                let path = svg.clone().unwrap_or_else(|| PathBuf::from("cubes.svg"));
                fs::write(path, cs.render_svg(&c, *k)?)?;
            }
            let checks = verify_cubes(&c, &cs, &s, estimated_doubling(&c, &h)?);
            emit(&json!({ "system": cs.to_json(&c), "checks": checks }), out, all_pass(&checks))
        }
        Command::Prob { delta, k, m, dist, eps, batch } => {
            let delta = Delta::parse(delta)?;
            if let Some(path) = batch {
                #[derive(Deserialize)]
                struct Query {
                    k: i32,
                    m: Value,
                    dist: Value,
                    eps: Value,
                }
                let queries: Vec<Query> = serde_json::from_str(&fs::read_to_string(path)?)?;
                let rows = queries
                    .iter()
                    .map(|q| {
                        let p = annulus_hit_probability(delta, q.k, rational(&q.m)?, rational(&q.dist)?, rational(&q.eps)?)?;
                        Ok(json!({
                            "k": q.k,
                            "m": value_text(&q.m),
                            "dist": value_text(&q.dist),
                            "eps": value_text(&q.eps),
                            "probability": p.probability.to_string(),
                            "bound": p.bound.to_string(),
                            "within_bound": p.within_bound(),
                        }))
                    })
                    .collect::<Result<Vec<_>>>()?;
                return Ok(Outcome { output: serde_json::to_string_pretty(&rows)?, target: None, pass: true });
            }
            let missing = |name: &str| Error::InvalidParameter(format!("prob needs --{name} or --batch"));
            let k = k.ok_or_else(|| missing("k"))?;
            let m = parse_rational(m.as_deref().ok_or_else(|| missing("m"))?)?;
            let d = parse_rational(dist.as_deref().ok_or_else(|| missing("dist"))?)?;
            let e = parse_rational(eps.as_deref().ok_or_else(|| missing("eps"))?)?;
            let p = annulus_hit_probability(delta, k, m, d, e)?;
            Ok(Outcome { output: format!("{} <= {}", p.probability, p.bound), target: None, pass: true })
        }
        Command::BoundaryExp { cloud, x, k, eps_grid, n, seed, exact, budget, out } => {
            let (c, delta) = load(cloud)?;
            let h = DyadicHierarchy::build_auto(&c, delta)?;
            let tables = ParentTables::build(&c, &h)?;
            let result =
                run_boundary_experiment(&h, &tables, &c, point(&c, *x)?, *k, eps_grid, *n, *seed, exact.then_some(*budget))?;
            emit(&result, out, true)
        }
        Command::Adjacent { cloud, p, balls, out } => {
            let (c, delta) = load(cloud)?;
            #[derive(Deserialize)]
            struct Ball {
                x: u64,
                r: f64,
            }
            let list: Vec<Ball> = serde_json::from_str(&fs::read_to_string(balls)?)?;
            let h = DyadicHierarchy::build_auto(&c, delta)?;
            let tables = ParentTables::build(&c, &h)?;
            let systems = AdjacentSystems::build(&h, &tables)?;
            let mut pass = true;
            let rows = list
                .iter()
                .map(|b| {
                    let x = point(&c, b.x)?;
                    Ok(match find_adjacent_cover(&c, &systems, x, b.r, *p) {
                        Ok(o) => {
                            pass &= o.checks.is_none_or(|ch| ch.all());
                            json!({
                                "x": b.x,
                                "r": b.r,
                                "found": o.found(),
                                "omega": o.omega,
                                "cube": o.cube.map(|(k, a)| json!({ "k": k, "alpha": a })),
                                "bad_fraction": o.bad_fraction.to_string(),
                                "checks": o.checks,
                            })
                        }
                        Err(e @ Error::LevelOutOfRange { .. }) => json!({ "x": b.x, "r": b.r, "error": e.to_string() }),
                        Err(e) => return Err(e),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            emit(&rows, out, pass)
        }
        Command::Splines { cloud, k, exact: _, mc, seed, budget, out } => {
            let (c, delta) = load(cloud)?;
            let h = DyadicHierarchy::build_auto(&c, delta)?;
            let tables = ParentTables::build(&c, &h)?;
            if let Some(n) = mc {
                let seed = seed.ok_or_else(|| Error::InvalidParameter("--mc needs --seed".into()))?;
                let mut splines: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
                for x in 0..c.len() {
                    for (alpha, count) in spline_mc(&h, &tables, x, *k, *n, seed)?.into_iter().enumerate() {
                        if count > 0 {
                            splines.entry(format!("{k}:{alpha}")).or_default().insert(c.id(x).to_string(), count as f64 / *n as f64);
                        }
                    }
                }
                return emit(&json!({ "k": k, "samples": n, "seed": seed, "splines": splines }), out, true);
            }
            let table = SplineTable::build(&h, &tables, *k, *budget)?;
            let checks = verify_splines(&c, &h, &tables, *k, *budget)?;
            emit(&json!({ "table": table.to_json(&c, &h), "checks": checks }), out, all_pass(&checks))
        }
        Command::Haar { cloud, seed, weights, out } => {
            let (c, delta) = load(cloud)?;
            let h = DyadicHierarchy::build_auto(&c, delta)?;
            let s = independent_schedule(&h, Kind::Independent, *seed, 0)?;
            let cs = CubeSystem::build(&c, &h, &s)?;
            let mu = match weights {
                Some(path) => read_weights(&c, path)?,
                None => vec![1.0; c.len()],
            };
            let basis = haar_basis(&cs, &mu)?;
            let checks = verify_wavelet_axioms(&c, &cs, &basis);
            let functions: Vec<Value> = basis
                .functions
                .iter()
                .map(|f| {
                    let values: BTreeMap<String, f64> = f.support.iter().zip(&f.values).map(|(&x, &v)| (c.id(x).to_string(), v)).collect();
                    json!({ "key": format!("{}:{}", f.k, f.alpha), "j": f.j, "center": c.id(f.center), "values": values })
                })
                .collect();
            emit(&json!({ "functions": functions, "checks": checks }), out, all_pass(&checks))
        }
        Command::Verify { cloud, seed, samples, mc_samples, budget, out } => {
            let (c, delta) = load(cloud)?;
            let opts = VerifyOptions { samples: *samples, mc_samples: *mc_samples, budget: *budget };
            let report: Report = verify_suite(&c, delta, *seed, &opts)?;
            Ok(Outcome { output: report.to_json_pretty(), target: out.out.clone(), pass: report.all_pass() })
        }
    }
}

fn rational(v: &Value) -> Result<Rational> {
    parse_rational(&value_text(v))
}

fn read_weights(cloud: &MetricPointCloud, path: &Path) -> Result<Vec<f64>> {
    match serde_json::from_str::<Value>(&fs::read_to_string(path)?)? {
        Value::Array(items) => items
            .iter()
            .map(|v| v.as_f64().ok_or_else(|| Error::InvalidParameter(format!("weight {v} is not a number"))))
            .collect::<Result<Vec<_>>>()
            .and_then(|w| {
                if w.len() == cloud.len() {
                    Ok(w)
                } else {
                    Err(Error::InvalidParameter(format!("{} weights for {} points", w.len(), cloud.len())))
                }
            }),
        Value::Object(map) => {
            let mut w = vec![1.0; cloud.len()];
            for (id, v) in map {
                let id: u64 = id.parse().map_err(|_| Error::InvalidParameter(format!("bad point id {id:?}")))?;
                w[point(cloud, id)?] = v.as_f64().ok_or_else(|| Error::InvalidParameter(format!("weight {v} is not a number")))?;
            }
            Ok(w)
        }
        _ => Err(Error::InvalidParameter("weights must be a JSON array or object".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prob_spot_value() {
        let cli = Cli::try_parse_from(["dyadic", "prob", "--delta", "0.1", "--k", "0", "--m", "1", "--dist", "1.53", "--eps", "0.04"]).unwrap();
        assert_eq!(run(&cli.command).unwrap().output, "1/11 <= 9/50");
    }

    #[test]
    fn missing_seed_is_usage_error() {
        let code = main_with_args(["dyadic", "boundary-exp", "--cloud", "line:10", "--delta", "0.1", "--x", "2", "--k", "0", "--eps-grid", "0.1"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn bad_cloud_is_usage_error() {
        assert_eq!(main_with_args(["dyadic", "net", "--cloud", "nowhere.csv", "--delta", "0.1"]), 2);
        assert_eq!(main_with_args(["dyadic", "net", "--cloud", "line:5", "--delta", "0.6"]), 2);
    }
}
