use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use causep::born::{sample_outcomes, measure_witness, Compilation, WitnessDecomposition};
use causep::catalog::{self, CatalogObject};
use causep::conic::SolverOptions;
use causep::robustness::{Engine, Restriction, Witness};
use causep::spaces::{MembershipTolerance, ProcessMatrix, Scenario};
use causep::tensor::OperatorJson;
use causep::Operator;

/// Process matrices and witnesses of causal nonseparability.
///
/// File arguments accept a path, `-` for stdin, or a catalog name (default parameters).
#[derive(Parser)]
#[command(name = "causep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Bi,
    Tri,
}

#[derive(Clone, Copy, ValueEnum)]
enum RestrictArg {
    Unitary,
    CharlieX,
}

impl RestrictArg {
    fn restriction(self) -> Restriction {
        match self {
            RestrictArg::Unitary => Restriction::unitary_ab(),
            RestrictArg::CharlieX => Restriction::charlie_x(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CompileArg {
    Stock,
    Unitary,
}

#[derive(Subcommand)]
enum Command {
    /// Check validity of a process matrix (exit 0 valid, 2 invalid).
    Validate {
        file: String,
        #[arg(long, value_enum)]
        scenario: Option<ScenarioArg>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Random robustness against white noise or a given noise process.
    Robustness {
        file: String,
        /// `white`, a catalog name or a file.
        #[arg(long, default_value = "white")]
        noise: String,
        /// Robustness of `v·W + (1-v)·noise` against white noise.
        #[arg(long)]
        v: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Optimal (optionally restricted) witness with its certificate.
    Witness {
        file: String,
        #[arg(long, value_enum)]
        restrict: Option<RestrictArg>,
        #[arg(long, default_value = "white")]
        noise: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Check that an operator is a witness (exit 0 valid, 2 invalid).
    VerifyWitness {
        file: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Print a catalog operator as JSON.
    Catalog {
        /// Entry name; `list` prints the available entries.
        name: String,
        /// Parameters as `key=value`.
        #[arg(long, num_args = 1..)]
        param: Vec<String>,
    },
    /// Witness value from instrument statistics, optionally sampled.
    Measure {
        #[arg(long)]
        witness: String,
        #[arg(long)]
        process: String,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "stock")]
        compile: CompileArg,
    },
    /// CSV over a 2-D affine slice through three processes.
    Scan {
        #[arg(long, num_args = 3, required = true)]
        anchor: Vec<String>,
        #[arg(long, default_value_t = 11)]
        res: usize,
        /// `xmin,xmax,ymin,ymax` (write `--bounds=-1,1,0,1` when xmin is negative).
        #[arg(long, default_value = "-1,1,0,1")]
        bounds: String,
        #[arg(long, value_enum)]
        restrict: Option<RestrictArg>,
    },
}

fn read_text(arg: &str) -> Result<String> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        return Ok(s);
    }
    std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
}

#[allow(clippy::large_enum_variant)]
enum Loaded {
    Operator(Operator),
    Witness(Witness),
}

/// Reads an operator, a witness object, or a report containing one.
fn load(arg: &str) -> Result<Loaded> {
    if arg != "-" && !Path::new(arg).exists() {
        if let Ok(entry) = catalog::lookup(arg, &BTreeMap::new()) {
            return Ok(match entry.object {
                CatalogObject::Process(p) => Loaded::Operator(p.into_op()),
                CatalogObject::Witness(w) => Loaded::Witness(w),
            });
        }
    }
    let text = read_text(arg)?;
    let mut v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))?;
    if let Some(w) = v.get("witness") {
        v = w.clone();
    }
    if v.get("operator").is_some() {
        return Ok(Loaded::Witness(Witness::from_json_str(&v.to_string())?));
    }
    let op: OperatorJson = serde_json::from_value(v).with_context(|| format!("{arg} is not an operator"))?;
    Ok(Loaded::Operator(op.to_operator()?))
}

fn load_process(arg: &str) -> Result<ProcessMatrix> {
    match load(arg)? {
        Loaded::Operator(op) => Ok(ProcessMatrix::from_operator(op)?),
        Loaded::Witness(_) => bail!("{arg} holds a witness, expected a process"),
    }
}

fn load_witness(arg: &str) -> Result<Witness> {
    match load(arg)? {
        Loaded::Witness(w) => Ok(w),
        Loaded::Operator(op) => Ok(Witness::new(Scenario::from_layout(op.layout())?, op, None)?),
    }
}

fn load_noise(arg: &str, scenario: &Scenario) -> Result<Option<ProcessMatrix>> {
    if arg == "white" {
        return Ok(None);
    }
    let n = load_process(arg)?;
    if n.scenario() != scenario {
        bail!("noise is {}, process is {scenario}", n.scenario());
    }
    Ok(Some(n))
}

fn engine(tol: f64) -> Engine {
    Engine::with_options(SolverOptions { tol, ..SolverOptions::default() })
}

fn print(v: &Value) {
    // a closed pipe downstream is not an error
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).expect("JSON value serialises"));
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>> {
    items
        .iter()
        .map(|kv| {
            let (k, v) = kv.split_once('=').with_context(|| format!("parameter `{kv}` is not key=value"))?;
            let x: f64 = v.trim().parse().with_context(|| format!("parameter `{k}` is not a number"))?;
            Ok((k.trim().to_string(), x))
        })
        .collect()
}

fn parse_bounds(s: &str) -> Result<[f64; 4]> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().context("bounds")?;
    match v[..] {
        [a, b, c, d] if a <= b && c <= d => Ok([a, b, c, d]),
        _ => bail!("bounds must be xmin,xmax,ymin,ymax"),
    }
}

/// `|r*| ≤ 1e-6` is reported as the boundary.
fn verdict(r_star: f64) -> &'static str {
    if r_star.abs() <= 1e-6 {
        "boundary"
    } else if r_star < 0.0 {
        "yes"
    } else {
        "no"
    }
}

/// `W(x, y) = m + x·(a2 - a3)/2 + y·(a1 - m)` with `m = (a2 + a3)/2`.
fn slice_point(a: &[ProcessMatrix; 3], x: f64, y: f64) -> Result<ProcessMatrix> {
    let m = a[1].op().combine(0.5, a[2].op(), 0.5)?;
    let op = m.combine(1.0 - y, a[0].op(), y)?.try_add(&a[1].op().combine(0.5 * x, a[2].op(), -0.5 * x)?)?;
    Ok(ProcessMatrix::new(a[0].scenario().clone(), op, true)?)
}

fn scan(anchors: &[String], res: usize, bounds: [f64; 4], restrict: Option<RestrictArg>) -> Result<()> {
    if res < 2 {
        bail!("resolution must be at least 2");
    }
    let a: Vec<ProcessMatrix> = anchors.iter().map(|f| load_process(f)).collect::<Result<_>>()?;
    if a.iter().any(|p| p.scenario() != a[0].scenario()) {
        bail!("anchors belong to different scenarios");
    }
    let a: [ProcessMatrix; 3] = a.try_into().expect("three anchors");
    let grid: Vec<(f64, f64)> = (0..res)
        .flat_map(|j| (0..res).map(move |i| (i, j)))
        .map(|(i, j)| {
            let t = |k: usize, lo: f64, hi: f64| lo + (hi - lo) * k as f64 / (res - 1) as f64;
            (t(i, bounds[0], bounds[1]), t(j, bounds[2], bounds[3]))
        })
        .collect();
    let eng = engine(1e-8);
    let rows: Vec<Result<[String; 6]>> = grid
        .par_iter()
        .map(|&(x, y)| {
            let w = slice_point(&a, x, y)?;
            let min_eig = w.op().min_eigenvalue();
            let mut row = [format!("{x:?}"), format!("{y:?}"), format!("{min_eig:?}"), "invalid".into(), String::new(), String::new()];
            if min_eig < -1e-9 {
                return Ok(row);
            }
            let r = eng.random_robustness(&w, None)?;
            row[3] = verdict(r.r_star).into();
            row[4] = format!("{:?}", r.r_star);
            if let Some(res) = restrict {
                row[5] = format!("{:?}", eng.construct_witness(&w, None, &res.restriction())?.value);
            }
            Ok(row)
        })
        .collect();
    let mut out = csv::Writer::from_writer(std::io::stdout());
    out.write_record(["x", "y", "min_eig", "separable", "r_star", "witness_value"])?;
    for r in rows {
        out.write_record(r?)?;
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let verdict_code = |valid: bool| if valid { ExitCode::SUCCESS } else { ExitCode::from(2) };
    match cli.command {
        Command::Validate { file, scenario, tol } => {
            let w = load_process(&file)?;
            let expected = match scenario {
                Some(ScenarioArg::Bi) => Some(Scenario::bipartite()),
                Some(ScenarioArg::Tri) => Some(Scenario::tripartite()),
                None => None,
            };
            if let Some(s) = expected {
                if &s != w.scenario() {
                    bail!("operator layout is {}, expected {s}", w.scenario());
                }
            }
            let report = w.validate(&MembershipTolerance::loose(tol))?;
            print(&serde_json::to_value(&report)?);
            Ok(verdict_code(report.valid))
        }
        Command::Robustness { file, noise, v, tol } => {
            let w = load_process(&file)?;
            let n = load_noise(&noise, w.scenario())?;
            let eng = engine(tol);
            let report = match v {
                Some(v) => {
                    let n = n.unwrap_or_else(|| catalog::white(w.scenario()));
                    eng.robustness_at_visibility(&w, &n, v)?
                }
                None => eng.random_robustness(&w, n.as_ref())?,
            };
            print(&report.to_json());
            Ok(ExitCode::SUCCESS)
        }
        Command::Witness { file, restrict, noise, tol } => {
            let w = load_process(&file)?;
            let n = load_noise(&noise, w.scenario())?;
            let restriction = restrict.map(RestrictArg::restriction).unwrap_or_else(Restriction::none);
            let report = engine(tol).construct_witness(&w, n.as_ref(), &restriction)?;
            print(&report.to_json());
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyWitness { file, tol } => {
            let s = load_witness(&file)?;
            let check = Engine::default().verify_witness(&s, tol)?;
            print(&check.to_json());
            Ok(verdict_code(check.valid))
        }
        Command::Catalog { name, param } => {
            if name == "list" {
                let list: Vec<Value> = catalog::NAMES.iter().map(|(n, p)| json!({"name": n, "params": p})).collect();
                print(&Value::Array(list));
                return Ok(ExitCode::SUCCESS);
            }
            let entry = catalog::lookup(&name, &parse_params(&param)?)?;
            let v = match &entry.object {
                CatalogObject::Process(p) => serde_json::to_value(OperatorJson::from_operator(p.op()))?,
                CatalogObject::Witness(w) => w.to_json(),
            };
            print(&v);
            Ok(ExitCode::SUCCESS)
        }
        Command::Measure { witness, process, shots, seed, compile } => {
            let s = load_witness(&witness)?;
            let w = load_process(&process)?;
            let how = match compile {
                CompileArg::Stock => Compilation::Stock,
                CompileArg::Unitary => Compilation::Unitary,
            };
            let d = WitnessDecomposition::compile(&s, how)?;
            let mut out = json!({
                "exact": s.value(&w)?,
                "born": measure_witness(&d, &w)?,
                "settings": d.n_settings(),
                "decomposition_residual": d.residual()?,
            });
            if let Some(shots) = shots {
                out["sample"] = sample_outcomes(&d, &w, shots, seed)?.to_json();
            }
            print(&out);
            Ok(ExitCode::SUCCESS)
        }
        Command::Scan { anchor, res, bounds, restrict } => {
            scan(&anchor, res, parse_bounds(&bounds)?, restrict)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
