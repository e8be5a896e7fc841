//! Executes a plan and assembles the suite report.

use crate::config::{Plan, PlannedCheck, Sizes};
use iclab::conc::{self, ExactLattice};
use iclab::report::CheckReport;
use iclab::{bodies, measures, rng, tau, transports, Error};
use serde::Serialize;
use serde_json::{Map, Value};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Seed of one check, derived from the master seed and the check id only.
pub fn check_seed(master: u64, id: &str) -> u64 {
    // FNV-1a of the id
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    rng::derive(master, h)
}

fn numbers(v: &Value, key: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::Domain(format!("parameter '{key}' must be a number or a list of numbers"));
    match v {
        Value::Number(n) => Ok(vec![n.as_f64().ok_or_else(bad)?]),
        Value::Array(a) => a.iter().map(|x| x.as_f64().ok_or_else(bad)).collect(),
        _ => Err(bad()),
    }
}

fn counts(v: &Value, key: &str) -> Result<Vec<usize>, Error> {
    numbers(v, key)?
        .into_iter()
        .map(|x| {
            if x >= 1.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(Error::Domain(format!("parameter '{key}' must hold positive integers")))
            }
        })
        .collect()
}

fn single(v: &Value, key: &str) -> Result<f64, Error> {
    match numbers(v, key)?.as_slice() {
        [x] => Ok(*x),
        _ => Err(Error::Domain(format!("parameter '{key}' takes one value"))),
    }
}

fn run_with_params(c: &PlannedCheck, seed: u64, sizes: &Sizes) -> Result<CheckReport, Error> {
    if let Some(mut lat) = conc::default_lattice(&c.id) {
        for (k, v) in &c.params {
            match k.as_str() {
                "p" => lat.p = numbers(v, k)?,
                "n" => lat.n = counts(v, k)?,
                "x" => lat.x = numbers(v, k)?,
                "t" => lat.t = numbers(v, k)?,
                _ => return Err(Error::Domain(format!("unknown parameter '{k}'"))),
            }
        }
        let lat: ExactLattice = lat;
        return conc::exact_lattice_check(&c.id, &lat);
    }
    if c.id == "mala_norma" {
        let (mut p, mut n, mut cc, mut alpha) = (1.0, 10usize, 0.1, 4.0 * std::f64::consts::E);
        for (k, v) in &c.params {
            match k.as_str() {
                "p" => p = single(v, k)?,
                "n" => n = counts(v, k)?.first().copied().unwrap_or(n),
                "c" => cc = single(v, k)?,
                "alpha" => alpha = single(v, k)?,
                _ => return Err(Error::Domain(format!("unknown parameter '{k}'"))),
            }
        }
        let ns: Vec<usize> = (5..=40).collect();
        let s = sizes.conc.samples;
        // same stream as the suite run, so default parameters reproduce it
        let seed = rng::derive(seed, 0xC0C);
        let m = conc::mala_norma(p, n, cc, alpha, &ns, s, seed)?;
        return Ok(m.to_check(&ns).with_samples(s as u64, seed));
    }
    Err(Error::Domain(format!("operation '{}' takes no parameters", c.id)))
}

/// Runs one planned check.
pub fn execute(c: &PlannedCheck, master: u64, sizes: &Sizes) -> Result<CheckReport, Error> {
    let seed = check_seed(master, &c.id);
    if !c.params.is_empty() {
        return run_with_params(c, seed, sizes);
    }
    match c.module.as_str() {
        "convex" | "measures" => measures::foundation_suite_check(&c.id, seed),
        "transports" => transports::transport_suite_check(&c.id, seed, &sizes.transports),
        "tau" => tau::tau_suite_check(&c.id, seed, &sizes.tau),
        "conc" => conc::conc_suite_check(&c.id, seed, &sizes.conc),
        "bodies" => bodies::body_suite_check(&c.id, seed, &sizes.bodies),
        m => Err(Error::UnknownId(format!("module '{m}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckError {
    pub id: String,
    pub kind: &'static str,
    pub message: String,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NonConvergence { .. } => "non_convergence",
        Error::Hypothesis(_) => "hypothesis",
        Error::Unsupported(_) => "unsupported",
        Error::UnknownId(_) => "unknown_id",
        Error::Io(_) => "io",
        _ => "domain",
    }
}

/// Report body; contains nothing that varies between identical runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub version: String,
    pub plan: Plan,
    pub config_hash: String,
    pub checks: Vec<CheckReport>,
    pub errors: Vec<CheckError>,
    pub pass: bool,
    /// seconds; written to `timing.json`, never to the report body
    pub wall_time: f64,
}

/// Process exit status of a finished run.
pub fn exit_code(r: &SuiteReport) -> i32 {
    if r.errors.iter().any(|e| e.kind != "non_convergence") {
        2
    } else if !r.errors.is_empty() {
        3
    } else if r.pass {
        0
    } else {
        1
    }
}

pub fn run_plan(plan: &Plan, jobs: usize) -> SuiteReport {
    let start = std::time::Instant::now();
    let n = plan.checks.len();
    let slots: Mutex<Vec<Option<Result<CheckReport, Error>>>> = Mutex::new(vec![None; n]);
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= n {
            break;
        }
        let r = execute(&plan.checks[i], plan.seed, &plan.sizes);
        slots.lock().unwrap()[i] = Some(r);
    };
    std::thread::scope(|s| {
        for _ in 1..jobs.max(1).min(n) {
            s.spawn(work);
        }
        work();
    });
    let mut checks = Vec::new();
    let mut errors = Vec::new();
    let mut pass = true;
    for (c, r) in plan.checks.iter().zip(slots.into_inner().unwrap()) {
        match r.expect("every slot is filled") {
            Ok(rep) => {
                if c.mandatory && !rep.pass {
                    pass = false;
                }
                checks.push(rep);
            }
            Err(e) => {
                if c.mandatory {
                    pass = false;
                }
                errors.push(CheckError {
                    id: c.id.clone(),
                    kind: error_kind(&e),
                    message: e.to_string(),
                });
            }
        }
    }
    SuiteReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: plan.hash(),
        plan: plan.clone(),
        checks,
        errors,
        pass,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// Finite numbers as JSON numbers; infinities and NaN as strings.
pub fn num(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None if x.is_nan() => Value::String("nan".into()),
        None if x > 0.0 => Value::String("inf".into()),
        None => Value::String("-inf".into()),
    }
}

fn num_map(m: &std::collections::BTreeMap<String, f64>) -> Value {
    Value::Object(m.iter().map(|(k, v)| (k.clone(), num(*v))).collect())
}

pub fn check_json(c: &CheckReport, mandatory: bool) -> Value {
    let mut o = Map::new();
    o.insert("id".into(), Value::String(c.id.clone()));
    o.insert("mode".into(), serde_json::to_value(c.mode).unwrap());
    o.insert("mandatory".into(), Value::Bool(mandatory));
    if let Some(k) = crate::registry::criterion_of(&c.id) {
        o.insert("criterion".into(), Value::from(k));
    }
    o.insert("params".into(), Value::Object(c.params.clone().into_iter().collect()));
    o.insert("estimates".into(), num_map(&c.estimates));
    o.insert("std_errors".into(), num_map(&c.std_errors));
    o.insert("margin".into(), num(c.margin));
    o.insert("pass".into(), Value::Bool(c.pass));
    o.insert("samples".into(), Value::from(c.samples));
    o.insert("seed".into(), c.seed.map_or(Value::Null, Value::from));
    o.insert("note".into(), Value::String(c.note.clone()));
    Value::Object(o)
}

impl SuiteReport {
    pub fn to_json(&self) -> Value {
        let mandatory = |id: &str| self.plan.checks.iter().any(|c| c.id == id && c.mandatory);
        let mut o = Map::new();
        o.insert("tool".into(), Value::String("iclab".into()));
        o.insert("version".into(), Value::String(self.version.clone()));
        o.insert("config_hash".into(), Value::String(self.config_hash.clone()));
        o.insert("suite".into(), self.plan.suite.clone().map_or(Value::Null, Value::String));
        o.insert("seed".into(), Value::from(self.plan.seed));
        o.insert("sizes".into(), serde_json::to_value(self.plan.sizes).unwrap());
        o.insert("pass".into(), Value::Bool(self.pass));
        o.insert(
            "checks".into(),
            Value::Array(self.checks.iter().map(|c| check_json(c, mandatory(&c.id))).collect()),
        );
        o.insert("errors".into(), serde_json::to_value(&self.errors).unwrap());
        Value::Object(o)
    }
}
