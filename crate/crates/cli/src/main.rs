use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mopcd::error::Error;
use mopcd::kernel::build_kernel;
use mopcd::multi_index::{canonical_path, MultiIndex, Path, PathOrder};
use mopcd::rmt::{density_compare, Bins, SourceModel};
use mopcd::suite::{verify, PathChoice, SuiteOptions, Tolerances};
use mopcd::weights::{MeasureSpec, WeightSystem};

#[derive(Parser)]
#[command(
    name = "mopcd",
    version,
    about = "Multiple orthogonal polynomials and their Christoffel-Darboux kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write P_n, the type I polynomials A_n and the h-table as JSON.
    Compute(Common),
    /// Run every applicable identity; exit 1 if any fails.
    Verify(Common),
    /// Tabulate K_n on a grid as CSV.
    Kernel(Common),
    /// Monte Carlo eigenvalue histogram of H + A against K_n(x,x).
    RmtSim(Common),
}

#[derive(Args)]
struct Common {
    /// Weight-system JSON document.
    #[arg(long)]
    config: PathBuf,
    /// Multi-index, e.g. "2,2".
    #[arg(long)]
    index: String,
    /// block, roundrobin, or a JSON file listing the path.
    #[arg(long, default_value = "block")]
    path: String,
    /// One tolerance for every identity.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
    /// "lo:hi:steps" for a diagonal grid, "lo:hi:steps,lo:hi:steps" for a 2D grid;
    /// histogram bins for rmt-sim.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Output file (a directory for rmt-sim); standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    /// Verification ran but did not pass.
    Check,
    Usage(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(c) => compute(&c),
        Command::Verify(c) => verify_cmd(&c),
        Command::Kernel(c) => kernel(&c),
        Command::RmtSim(c) => rmt_sim(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            let payload = json!({"error": e.kind(), "message": e.to_string()});
            eprintln!("{payload}");
            ExitCode::from(2)
        }
    }
}

fn load(c: &Common) -> Result<(WeightSystem, MultiIndex), Error> {
    let text =
        fs::read_to_string(&c.config).map_err(|e| Error::Config(format!("cannot read {}: {e}", c.config.display())))?;
    let ws = WeightSystem::from_json(&text)?;
    let n: MultiIndex = c.index.parse()?;
    if n.len() != ws.m() {
        return Err(Error::Config(format!(
            "multi-index {n} has {} components, the weight system has {}",
            n.len(),
            ws.m()
        )));
    }
    Ok((ws, n))
}

fn path_choice(spec: &str, n: &MultiIndex) -> Result<PathChoice, Error> {
    match spec {
        "block" => Ok(PathChoice::Order(PathOrder::Block)),
        "roundrobin" => Ok(PathChoice::Order(PathOrder::RoundRobin)),
        file => {
            let text =
                fs::read_to_string(file).map_err(|e| Error::Config(format!("cannot read path file {file}: {e}")))?;
            let steps: Vec<Vec<usize>> =
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("path file {file}: {e}")))?;
            let path = Path::new(steps.into_iter().map(MultiIndex::new).collect())?;
            if path.end() != n {
                return Err(Error::Config(format!("path in {file} ends at {}, not {n}", path.end())));
            }
            Ok(PathChoice::Explicit(path))
        }
    }
}

fn resolve_path(choice: &PathChoice, n: &MultiIndex) -> Path {
    match choice {
        PathChoice::Order(o) => canonical_path(n, *o),
        PathChoice::Explicit(p) => p.clone(),
    }
}

fn emit(out: Option<&FsPath>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::Config(format!("stdout: {e}")))
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn compute(c: &Common) -> Outcome {
    let (ws, n) = load(c)?;
    let v = mopcd::export::compute(&ws, &n)?;
    emit(c.out.as_deref(), &pretty(&v))?;
    Ok(())
}

fn verify_cmd(c: &Common) -> Outcome {
    let (ws, n) = load(c)?;
    let opts = SuiteOptions {
        tol: c.tol.map_or_else(Tolerances::default, Tolerances::uniform),
        path: path_choice(&c.path, &n)?,
        seed: c.seed,
        ..SuiteOptions::default()
    };
    let report = verify(&ws, &n, &opts)?;
    emit(c.out.as_deref(), &pretty(&report))?;
    if report.pass {
        Ok(())
    } else {
        for f in report.failures() {
            eprintln!("FAIL {f}");
        }
        Err(Failure::Check)
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    steps: usize,
}

impl Axis {
    fn parse(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("bad grid axis {s:?}, expected lo:hi:steps"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts.as_slice() else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let steps: usize = steps.trim().parse().map_err(|_| bad())?;
        if steps == 0 || !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(bad());
        }
        Ok(Axis { lo, hi, steps })
    }

    fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + i as f64 * h
                }
            })
            .collect()
    }
}

fn kernel(c: &Common) -> Outcome {
    let (ws, n) = load(c)?;
    let path = resolve_path(&path_choice(&c.path, &n)?, &n);
    let grid = c
        .grid
        .as_deref()
        .ok_or_else(|| Error::Config("kernel needs --grid".into()))?;
    let axes = grid.split(',').map(Axis::parse).collect::<Result<Vec<_>, _>>()?;
    if !n.all_positive() {
        return Err(Error::DegenerateIndex { index: n }.into());
    }
    let k = build_kernel(&ws, &path)?;
    let mut out = String::new();
    match axes.as_slice() {
        [x] => {
            out.push_str("x,K\n");
            for x in x.points() {
                out.push_str(&format!("{x:?},{:?}\n", k.diagonal(x)?));
            }
        }
        [x, y] => {
            out.push_str("x,y,K\n");
            for x in x.points() {
                for y in y.points() {
                    out.push_str(&format!("{x:?},{y:?},{:?}\n", k.eval(x, y)?));
                }
            }
        }
        _ => return Err(Error::Config("grid must have one or two axes".into()).into()),
    }
    emit(c.out.as_deref(), &out)?;
    Ok(())
}

fn source_model(ws: &WeightSystem, n: &MultiIndex) -> Result<SourceModel, Error> {
    let mut alphas = Vec::with_capacity(ws.m());
    for m in ws.measures() {
        match m {
            MeasureSpec::GaussianDrift { drift, scale } if *scale == 1.0 => alphas.push(*drift),
            _ => {
                return Err(Error::UnsupportedMeasure(
                    "rmt-sim needs unit-scale Gaussian drift weights".into(),
                ))
            }
        }
    }
    SourceModel::new(alphas, n.components().to_vec())
}

fn rmt_sim(c: &Common) -> Outcome {
    let (ws, n) = load(c)?;
    let model = source_model(&ws, &n)?;
    if c.samples == 0 {
        return Err(Error::InsufficientSamples(0).into());
    }
    let bins = match c.grid.as_deref() {
        Some(g) => {
            let a = Axis::parse(g)?;
            Bins::new(a.lo, a.hi, a.steps)?
        }
        None => {
            let (lo, hi) = ws.sample_interval().unwrap_or((-4.5, 4.5));
            Bins::new(lo, hi, 40)?
        }
    };
    let cmp = density_compare(&model, c.samples, &bins, c.seed)?;
    let summary = pretty(&json!({
        "samples": cmp.summary.samples,
        "chi2": cmp.summary.chi2,
        "dof": cmp.summary.dof,
        "p_value": cmp.summary.p_value,
        "max_rel_dev": cmp.summary.max_rel_dev,
        "pass": cmp.summary.pass,
    }));
    match &c.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
            emit(Some(&dir.join("histogram.csv")), &cmp.histogram_csv())?;
            emit(Some(&dir.join("summary.json")), &summary)?;
            emit(None, &summary)?;
        }
        None => emit(None, &summary)?,
    }
    if cmp.summary.pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}
