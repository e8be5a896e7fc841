use iclab_cli::config::{build_plan, ExperimentConfig, SizeOverrides, Sizes};
use iclab_cli::emit::{csv_bytes, CSV_HEADER};
use iclab_cli::registry::{all_ids, module_of, suite_ids, PAPER_CORE, SUITES};
use iclab_cli::runner::{self, num};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::{Command, Output};

fn iclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iclab"))
        .args(args)
        .env_remove("ICLAB_OUT")
        .output()
        .unwrap()
}

fn run_config(dir: &Path, toml: &str) -> Output {
    let p = dir.join("exp.toml");
    std::fs::write(&p, toml).unwrap();
    iclab(&["run", "--config", p.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn ids_unique_and_resolvable() {
    let ids = all_ids();
    let set: BTreeSet<_> = ids.iter().collect();
    assert_eq!(set.len(), ids.len());
    for s in SUITES {
        for id in suite_ids(s).unwrap() {
            assert!(module_of(id).is_some(), "{s}: {id}");
        }
    }
    let crit: BTreeSet<u32> = PAPER_CORE.iter().map(|(_, c)| *c).collect();
    assert_eq!(crit, (1..=16).collect());
}

#[test]
fn list_checks_prints_every_id() {
    let o = iclab(&["list-checks"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), all_ids().len());
    assert!(out.contains("two_level_exp\tconc"));
    let o = iclab(&["list-checks", "--suite", "evidence"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 5);
    assert_eq!(iclab(&["list-checks", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn single_exact_check() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("o");
    let o = iclab(&["run", "--check", "two_level_exp", "--t", "1", "--x", "0", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&out.join("report.json"));
    assert_eq!(r["checks"].as_array().unwrap().len(), 1);
    let c = &r["checks"][0];
    assert_eq!(c["mode"], "exact");
    assert_eq!(c["pass"], true);
    assert_eq!(c["estimates"]["points"], 3.0);
    assert!(out.join("timing.json").exists());
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn csv_rows_match_checks_and_jobs_do_not_matter() {
    let d = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for jobs in ["1", "3"] {
        let out = d.path().join(jobs);
        let o = iclab(&[
            "run", "--check", "cramer_sandwich", "--check", "tbp_iv", "--check", "temp_gamma", "--check", "cheeger_1d",
            "--seed", "5", "--jobs", jobs, "--format", "json,csv,plot", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let mut rd = csv::Reader::from_path(out.join("report.csv")).unwrap();
        assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
        let ids: Vec<String> = rd.records().map(|r| r.unwrap()[0].to_string()).collect();
        assert_eq!(ids, ["cramer_sandwich", "tbp_iv", "temp_gamma", "cheeger_1d"]);
        let sandwich = std::fs::read_to_string(out.join("plot/lambda_star_sandwich.csv")).unwrap();
        assert!(sandwich.lines().nth(1).unwrap() == "x,lower,lambda_star,upper");
        assert!(out.join("plot/f_pn_brackets.csv").exists());
        bodies.push((
            std::fs::read(out.join("report.json")).unwrap(),
            std::fs::read(out.join("report.csv")).unwrap(),
        ));
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn empty_report_csv_is_header_only() {
    let rep = json!({ "tool": "iclab", "config_hash": "x", "checks": [], "errors": [] });
    let b = csv_bytes(&rep).unwrap();
    let s = String::from_utf8(b).unwrap();
    assert_eq!(s, format!("{}\n", CSV_HEADER.join(",")));
}

#[test]
fn csv_quotes_embedded_commas() {
    let rep = json!({ "tool": "iclab", "config_hash": "h", "errors": [],
        "checks": [{ "id": "a", "mode": "exact", "pass": true, "margin": 1.0, "params": {"x": [1, 2]}, "note": "say \"hi\", ok" }] });
    let s = String::from_utf8(csv_bytes(&rep).unwrap()).unwrap();
    let mut rd = csv::Reader::from_reader(s.as_bytes());
    let r = rd.records().next().unwrap().unwrap();
    assert_eq!(&r[7], "{\"x\":[1,2]}");
    assert_eq!(&r[10], "say \"hi\", ok");
}

#[test]
fn config_errors_name_the_key() {
    let d = tempfile::tempdir().unwrap();
    let cases = [
        ("suite = \"tau\"\nsede = 4\n", "sede"),
        ("suite = \"tau\"\n", "seed"),
        ("seed = \"x\"\nsuite = \"tau\"\n", "seed"),
        ("seed = 1\nsuite = \"nope\"\n", "nope"),
        ("seed = 1\n[[checks]]\nmodule = \"conc\"\noperation = \"bogus\"\n", "bogus"),
        ("seed = 1\n[[checks]]\nmodule = \"tau\"\noperation = \"magia\"\n", "tau"),
        ("seed = 1\n[[checks]]\nmodule = \"conc\"\noperation = \"magia\"\nparams = { q = 2 }\n", "q"),
        ("seed = 1\nsuite = \"tau\"\n[sizes]\nsamplez = 10\n", "samplez"),
        ("seed = 1\nsuite = \"tau\"\n[sizes]\nsamples = 1\n", "sizes.samples"),
        ("seed = 1\n", "nothing to run"),
    ];
    for (toml, key) in cases {
        let o = run_config(d.path(), toml);
        assert_eq!(o.status.code(), Some(2), "{toml}");
        assert!(stderr(&o).contains(key), "{toml}: {}", stderr(&o));
    }
    let o = iclab(&["run", "--suite", "tau"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"));
    let o = iclab(&["run", "--check", "tbp_ii", "--t", "1", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = iclab(&["run", "--config", "/nonexistent/exp.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/exp.toml"));
}

#[test]
fn config_file_run_and_emit() {
    let d = tempfile::tempdir().unwrap();
    let toml = r#"
seed = 11
jobs = 2

[sizes]
samples = 20000

[[checks]]
module = "conc"
operation = "magia"
params = { p = [1.0, 2.0], n = [2], x = [-1.0, 0.0], t = [0.5, 2.0] }

[[checks]]
module = "conc"
operation = "mala_norma"
params = { c = 0.2 }
"#;
    let o = run_config(d.path(), toml);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = d.path().join("out");
    let r = read_json(&out.join("report.json"));
    assert_eq!(r["seed"], 11);
    assert_eq!(r["checks"][0]["params"]["p"], json!([1.0, 2.0]));
    assert_eq!(r["checks"][1]["params"]["c"], 0.2);
    assert_eq!(r["checks"][1]["samples"], 20000);

    let again = d.path().join("again");
    let o = iclab(&["emit", "--report", out.join("report.json").to_str().unwrap(), "--format", "csv,json", "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(out.join("report.csv")).unwrap(), std::fs::read(again.join("report.csv")).unwrap());
    assert_eq!(std::fs::read(out.join("report.json")).unwrap(), std::fs::read(again.join("report.json")).unwrap());

    std::fs::write(d.path().join("junk.json"), "{\"a\": 1}").unwrap();
    let o = iclab(&["emit", "--report", d.path().join("junk.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("junk.json"));
}

#[test]
fn config_hash() {
    let cfg = |s: &str| ExperimentConfig::from_toml(s).unwrap().plan(None, None).unwrap().hash();
    let a = cfg("seed = 1\nsuite = \"bodies\"\n");
    assert_eq!(a, cfg("suite = \"bodies\"\nseed = 1\n"));
    assert_eq!(a, cfg("seed = 1\nsuite = \"bodies\"\noutput_dir = \"/tmp/x\"\njobs = 4\n"));
    assert_ne!(a, cfg("seed = 2\nsuite = \"bodies\"\n"));
    assert_ne!(a, cfg("seed = 1\nsuite = \"bodies\"\n[sizes]\nrandom_dirs = 8\n"));
    assert_eq!(a.len(), 64);
}

#[test]
fn seeds_depend_on_id_only() {
    let s = runner::check_seed(42, "exp_slab");
    assert_eq!(s, runner::check_seed(42, "exp_slab"));
    assert_ne!(s, runner::check_seed(42, "push_pop"));
    assert_ne!(s, runner::check_seed(43, "exp_slab"));
}

#[test]
fn exit_codes_and_non_finite_values() {
    let sizes = Sizes::resolve(&SizeOverrides::default()).unwrap();
    let mut p = BTreeMap::new();
    p.insert("c".to_string(), json!(-1.0));
    let plan = build_plan(None, &[(None, "mala_norma".into(), p)], 1, sizes).unwrap();
    let r = runner::run_plan(&plan, 1);
    assert_eq!(r.errors.len(), 1);
    assert_eq!(r.errors[0].kind, "hypothesis");
    assert_eq!(runner::exit_code(&r), 2);
    let mut nc = r.clone();
    nc.errors[0].kind = "non_convergence";
    assert_eq!(runner::exit_code(&nc), 3);

    let plan = build_plan(Some("evidence"), &[], 1, sizes).unwrap();
    assert!(plan.checks.iter().all(|c| !c.mandatory));
    let plan = build_plan(None, &[(None, "temp_gamma".into(), BTreeMap::new())], 1, sizes).unwrap();
    let mut r = runner::run_plan(&plan, 1);
    assert_eq!(runner::exit_code(&r), 0);
    r.checks[0].pass = false;
    r.pass = false;
    assert_eq!(runner::exit_code(&r), 1);

    assert_eq!(num(f64::INFINITY), json!("inf"));
    assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
    assert_eq!(num(f64::NAN), json!("nan"));
    assert_eq!(num(0.5), json!(0.5));
}
