use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fmtx::scenario::{load_scenario, resolve, ScenarioConfig};
use fmtx::sim::{run_condition, run_trial, SummaryStats};
use fmtx::trace::{write_summary, TraceWriter};
use fmtx::verify::default_suites;

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "FMTX_OUT";

#[derive(Parser, Debug)]
#[command(name = "fmtx", version, about = "Dynamic replanning among moving obstacles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a single trial and write its per-iteration trace.
    Plan(PlanArgs),
    /// Run every condition of a preset or scenario and write summary.csv.
    Bench(BenchArgs),
    /// Run the randomized property suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scenario file (JSON).
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Built-in preset or grid name.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Args, Debug)]
struct Overrides {
    /// Number of samples, overriding the scenario.
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    /// Radius multiplier C, overriding the scenario.
    #[arg(long = "c-mult", value_name = "F")]
    c_mult: Option<f64>,
    /// Base seed. Trial i uses seed + i.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory. Defaults to the scenario's output path, then $FMTX_OUT, then ".".
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Write zero in the replan_ms column so traces are reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    overrides: Overrides,
    /// Trials per condition, overriding the scenario.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Smaller case counts.
    #[arg(long)]
    quick: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(a) => plan(a),
        Command::Bench(a) => bench(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn conditions(source: &Source, ov: &Overrides) -> fmtx::Result<Vec<ScenarioConfig>> {
    let mut cfgs = match (&source.scenario, &source.preset) {
        (Some(path), _) => {
            let mut cfg = load_scenario(path)?;
            if let Some(seed) = ov.seed {
                cfg.seed = seed;
            }
            vec![cfg]
        }
        (None, Some(name)) => resolve(name, ov.seed.unwrap_or(0))?,
        (None, None) => unreachable!("clap requires a source"),
    };
    for cfg in &mut cfgs {
        if let Some(n) = ov.samples {
            cfg.n = n;
        }
        if let Some(c) = ov.c_mult {
            cfg.c_mult = c;
        }
        cfg.validate()?;
    }
    Ok(cfgs)
}

fn out_dir(ov: &Overrides, cfg: &ScenarioConfig) -> fmtx::Result<PathBuf> {
    let dir = ov
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn label(cfg: &ScenarioConfig, i: usize) -> String {
    cfg.name.clone().unwrap_or_else(|| format!("condition-{i}"))
}

fn plan(a: PlanArgs) -> fmtx::Result<ExitCode> {
    let cfgs = conditions(&a.source, &a.overrides)?;
    let [cfg] = cfgs.as_slice() else {
        return Err(fmtx::Error::config("preset", "plan needs a single condition, not a grid"));
    };
    let dir = out_dir(&a.overrides, cfg)?;
    let result = run_trial(cfg, cfg.seed)?;
    let path = dir.join("trace.csv");
    let mut w = TraceWriter::new(BufWriter::new(File::create(&path)?), !a.overrides.no_timing)?;
    w.write_trial(&result)?;
    w.finish()?;
    println!(
        "{}: {} after {} iterations, median replan {:.3} ms, {} safety violations",
        label(cfg, 0),
        result.outcome,
        result.records.len(),
        result.median_replan_s() * 1e3,
        result.violations.len()
    );
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn bench(a: BenchArgs) -> fmtx::Result<ExitCode> {
    let cfgs = conditions(&a.source, &a.overrides)?;
    let dir = out_dir(&a.overrides, &cfgs[0])?;
    let traces = dir.join("traces");
    fs::create_dir_all(&traces)?;
    let mut rows: Vec<SummaryStats> = Vec::with_capacity(cfgs.len());
    for (i, cfg) in cfgs.iter().enumerate() {
        let trials = a.trials.unwrap_or(cfg.trials);
        let name = label(cfg, i);
        eprintln!("[{}/{}] {name}: {trials} trials", i + 1, cfgs.len());
        let (summary, results) = run_condition(cfg, trials)?;
        let file = File::create(trace_path(&traces, &name))?;
        let mut w = TraceWriter::new(BufWriter::new(file), !a.overrides.no_timing)?;
        for r in &results {
            w.write_trial(r)?;
        }
        w.finish()?;
        println!(
            "{name}: median {:.3} ms, std {:.3} ms, success {:.2}",
            summary.median_ms, summary.std_ms, summary.success_rate
        );
        rows.push(summary);
    }
    let path = dir.join("summary.csv");
    write_summary(BufWriter::new(File::create(&path)?), &rows)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn trace_path(dir: &Path, name: &str) -> PathBuf {
    let safe: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect();
    dir.join(format!("{safe}.csv"))
}

fn verify(a: VerifyArgs) -> fmtx::Result<ExitCode> {
    let reports = default_suites(a.quick);
    let mut ok = true;
    for r in &reports {
        println!("{r}");
        ok &= r.passed();
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
