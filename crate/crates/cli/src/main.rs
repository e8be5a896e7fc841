use clap::{Args, Parser, Subcommand};
use iclab_cli::config::{build_plan, ExperimentConfig, Plan, SizeOverrides, Sizes};
use iclab_cli::emit::{self, Format};
use iclab_cli::registry::{self, module_of, suite_ids, suites_of};
use iclab_cli::runner::{self, num};
use iclab_cli::CliError;
use serde_json::Value;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "iclab", version, about = "Runs the iclab numerical checks and writes reports")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a suite, a config file, or individual checks.
    Run(RunArgs),
    /// List registered checks.
    ListChecks {
        #[arg(long)]
        suite: Option<String>,
    },
    /// Re-emit a saved report.json in other formats.
    Emit {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value = "json,csv,plot")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    suite: Option<String>,
    /// check id; repeatable
    #[arg(long = "check")]
    checks: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// overrides every Monte Carlo draw count
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value = "json,csv")]
    format: String,
    #[command(flatten)]
    params: ParamArgs,
}

/// Parameters for `--check`; each takes a comma-separated list.
#[derive(Args)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
}

impl ParamArgs {
    fn collect(&self) -> Result<BTreeMap<String, Value>, CliError> {
        let mut m = BTreeMap::new();
        let given = [
            ("p", &self.p),
            ("n", &self.n),
            ("x", &self.x),
            ("t", &self.t),
            ("c", &self.c),
            ("alpha", &self.alpha),
        ];
        for (k, v) in given {
            let Some(s) = v else { continue };
            let mut vals = Vec::new();
            for piece in s.split(',').map(str::trim) {
                let v = if let Ok(i) = piece.parse::<i64>() {
                    Value::from(i)
                } else if let Ok(f) = piece.parse::<f64>() {
                    num(f)
                } else {
                    return Err(CliError::Usage(format!("--{k}: '{piece}' is not a number")));
                };
                vals.push(v);
            }
            let v = if vals.len() == 1 { vals.pop().unwrap() } else { Value::Array(vals) };
            m.insert(k.to_string(), v);
        }
        Ok(m)
    }
}

fn plan_from_args(a: &RunArgs) -> Result<(Plan, Option<PathBuf>, Option<usize>), CliError> {
    let params = a.params.collect()?;
    if let Some(path) = &a.config {
        if a.suite.is_some() || !a.checks.is_empty() || !params.is_empty() {
            return Err(CliError::Usage("--config cannot be combined with --suite, --check or parameters".into()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg = ExperimentConfig::from_toml(&text)?;
        let plan = cfg.plan(a.samples, a.seed)?;
        return Ok((plan, cfg.output_dir.clone(), cfg.jobs));
    }
    let Some(seed) = a.seed else {
        return Err(CliError::Usage("--seed is required".into()));
    };
    if !params.is_empty() && a.checks.is_empty() {
        return Err(CliError::Usage("parameters need a --check".into()));
    }
    let sizes = Sizes::resolve(&SizeOverrides {
        samples: a.samples,
        ..Default::default()
    })?;
    let explicit: Vec<_> = a.checks.iter().map(|id| (None, id.clone(), params.clone())).collect();
    Ok((build_plan(a.suite.as_deref(), &explicit, seed, sizes)?, None, None))
}

fn out_dir(flag: Option<PathBuf>, config: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("ICLAB_OUT").map(PathBuf::from))
        .or(config)
        .unwrap_or_else(|| PathBuf::from("iclab-out"))
}

fn run(a: RunArgs) -> Result<i32, CliError> {
    let formats = Format::parse_list(&a.format)?;
    let (plan, cfg_out, cfg_jobs) = plan_from_args(&a)?;
    let dir = out_dir(a.out.clone(), cfg_out);
    let jobs = a.jobs.or(cfg_jobs).unwrap_or(1);
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let rep = runner::run_plan(&plan, jobs);
    let doc = rep.to_json();
    emit::emit(&doc, &formats, &dir)?;
    let timing = serde_json::json!({ "config_hash": rep.config_hash, "wall_time_s": rep.wall_time });
    let tp = dir.join("timing.json");
    std::fs::write(&tp, emit::json_bytes(&timing)).map_err(|e| CliError::io(&tp, e))?;
    for c in &rep.checks {
        println!(
            "{} {:<22} margin {:>12}",
            if c.pass { "pass" } else { "FAIL" },
            c.id,
            format!("{:.4e}", c.margin)
        );
    }
    for e in &rep.errors {
        println!("ERR  {:<22} {}: {}", e.id, e.kind, e.message);
    }
    let code = runner::exit_code(&rep);
    println!(
        "{} checks, {} errors, suite {}; report in {}",
        rep.checks.len(),
        rep.errors.len(),
        if rep.pass { "passed" } else { "failed" },
        dir.display()
    );
    Ok(code)
}

fn list_checks(suite: Option<String>) -> Result<i32, CliError> {
    let ids = match &suite {
        Some(s) => suite_ids(s).ok_or_else(|| {
            CliError::Usage(format!("unknown suite '{s}'; known: {}", registry::SUITES.join(", ")))
        })?,
        None => registry::all_ids(),
    };
    let mut out = std::io::stdout().lock();
    for id in ids {
        let m = module_of(id).map_or("?", |m| m.name());
        let crit = registry::criterion_of(id).map_or("-".to_string(), |c| c.to_string());
        let params = registry::accepted_params(id).join(",");
        let line = format!(
            "{id}\t{m}\tcriterion {crit}\tsuites {}\tparams {}",
            suites_of(id).join(","),
            if params.is_empty() { "-" } else { &params }
        );
        // a closed pipe (e.g. `| head`) is not an error
        if writeln!(out, "{line}").is_err() {
            break;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Run(a) => run(a),
        Cmd::ListChecks { suite } => list_checks(suite),
        Cmd::Emit { report, format, out } => (|| {
            let formats = Format::parse_list(&format)?;
            let doc = emit::read_report(&report)?;
            let dir = out_dir(out, report.parent().map(PathBuf::from));
            for p in emit::emit(&doc, &formats, &dir)? {
                println!("{}", p.display());
            }
            Ok(0)
        })(),
    };
    match r {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("iclab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
