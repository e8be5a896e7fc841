//! Experiment configuration: TOML on disk, or assembled from flags.

use crate::registry::{accepted_params, module_of, suite_ids};
use crate::CliError;
use iclab::bodies::BodySizes;
use iclab::conc::ConcSizes;
use iclab::tau::TauSizes;
use iclab::transports::TransportSizes;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// One entry of `[[checks]]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckEntry {
    pub module: String,
    pub operation: String,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SizeOverrides {
    /// shorthand for every Monte Carlo draw count below
    pub samples: Option<usize>,
    pub conc_samples: Option<usize>,
    pub qmc_points: Option<usize>,
    pub moment_samples: Option<usize>,
    pub ks_samples: Option<usize>,
    pub pairs: Option<usize>,
    pub corpus: Option<usize>,
    pub separable: Option<usize>,
    pub joint: Option<usize>,
    pub random_dirs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Option<String>,
    pub seed: u64,
    #[serde(default)]
    pub checks: Vec<CheckEntry>,
    #[serde(default)]
    pub sizes: SizeOverrides,
    pub output_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            // type errors name only the type, so quote the offending line
            let at = e.span().map(|s| {
                let line = text[..s.start].matches('\n').count();
                let src = text.lines().nth(line).unwrap_or("").trim();
                format!(" (line {}: `{src}`)", line + 1)
            });
            CliError::Config(format!("{}{}", e.message(), at.unwrap_or_default()))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sizes {
    pub tau: TauSizes,
    pub transports: TransportSizes,
    pub conc: ConcSizes,
    pub bodies: BodySizes,
}

impl Sizes {
    pub fn resolve(o: &SizeOverrides) -> Result<Self, CliError> {
        let mut s = Sizes {
            tau: TauSizes::default(),
            transports: TransportSizes::default(),
            conc: ConcSizes::default(),
            bodies: BodySizes::default(),
        };
        let fields = [
            ("samples", o.samples),
            ("conc_samples", o.conc_samples),
            ("qmc_points", o.qmc_points),
            ("moment_samples", o.moment_samples),
            ("ks_samples", o.ks_samples),
            ("pairs", o.pairs),
            ("corpus", o.corpus),
            ("separable", o.separable),
            ("joint", o.joint),
            ("random_dirs", o.random_dirs),
        ];
        for (k, v) in fields {
            if v.is_some_and(|v| v < 2) {
                return Err(CliError::Config(format!("sizes.{k} must be at least 2")));
            }
        }
        if let Some(n) = o.samples {
            s.conc.samples = n;
            s.conc.moment_samples = n;
            s.transports.ks_samples = n;
            s.transports.pairs = n;
        }
        let set = |dst: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut s.conc.samples, o.conc_samples);
        set(&mut s.conc.qmc_points, o.qmc_points);
        set(&mut s.conc.moment_samples, o.moment_samples);
        set(&mut s.transports.ks_samples, o.ks_samples);
        set(&mut s.transports.pairs, o.pairs);
        set(&mut s.tau.corpus, o.corpus);
        set(&mut s.tau.separable, o.separable);
        set(&mut s.tau.joint, o.joint);
        set(&mut s.bodies.random_dirs, o.random_dirs);
        Ok(s)
    }
}

/// A check with its parameters, ready to run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlannedCheck {
    pub id: String,
    pub module: String,
    pub params: BTreeMap<String, Value>,
    pub mandatory: bool,
}

/// Everything that determines the report body; its hash is recorded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub suite: Option<String>,
    pub seed: u64,
    pub sizes: Sizes,
    pub checks: Vec<PlannedCheck>,
}

impl Plan {
    pub fn hash(&self) -> String {
        let body = serde_json::to_vec(self).expect("plan serializes");
        let d = Sha256::digest(&body);
        d.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn toml_to_json(v: &toml::Value) -> Value {
    match v {
        toml::Value::String(s) => Value::String(s.clone()),
        toml::Value::Integer(i) => Value::from(*i),
        toml::Value::Float(f) => serde_json::Number::from_f64(*f).map_or(Value::Null, Value::Number),
        toml::Value::Boolean(b) => Value::Bool(*b),
        toml::Value::Datetime(d) => Value::String(d.to_string()),
        toml::Value::Array(a) => Value::Array(a.iter().map(toml_to_json).collect()),
        toml::Value::Table(t) => Value::Object(t.iter().map(|(k, v)| (k.clone(), toml_to_json(v))).collect()),
    }
}

fn plan_check(id: &str, module: Option<&str>, params: BTreeMap<String, Value>, mandatory: bool) -> Result<PlannedCheck, CliError> {
    let Some(m) = module_of(id) else {
        return Err(CliError::Config(format!("unknown operation '{id}'")));
    };
    if let Some(given) = module {
        if given != m.name() {
            return Err(CliError::Config(format!(
                "operation '{id}' belongs to module '{}', not '{given}'",
                m.name()
            )));
        }
    }
    let ok = accepted_params(id);
    for k in params.keys() {
        if !ok.contains(&k.as_str()) {
            return Err(CliError::Config(if ok.is_empty() {
                format!("operation '{id}' takes no parameters, got '{k}'")
            } else {
                format!("operation '{id}' has no parameter '{k}'; accepted: {}", ok.join(", "))
            }));
        }
    }
    Ok(PlannedCheck {
        id: id.to_string(),
        module: m.name().to_string(),
        params,
        mandatory,
    })
}

/// Checks from a suite name, then explicit entries.
pub fn build_plan(
    suite: Option<&str>,
    explicit: &[(Option<String>, String, BTreeMap<String, Value>)],
    seed: u64,
    sizes: Sizes,
) -> Result<Plan, CliError> {
    let mut checks = Vec::new();
    if let Some(s) = suite {
        let Some(ids) = suite_ids(s) else {
            return Err(CliError::Config(format!(
                "unknown suite '{s}'; known: {}",
                crate::registry::SUITES.join(", ")
            )));
        };
        // evidence runs are reported but never decide the exit code
        let gating = s != "evidence";
        for id in ids {
            checks.push(plan_check(id, None, BTreeMap::new(), gating)?);
        }
    }
    for (module, id, params) in explicit {
        checks.push(plan_check(id, module.as_deref(), params.clone(), true)?);
    }
    if checks.is_empty() {
        return Err(CliError::Usage("nothing to run: give a suite or at least one check".into()));
    }
    Ok(Plan {
        suite: suite.map(str::to_string),
        seed,
        sizes,
        checks,
    })
}

impl ExperimentConfig {
    pub fn plan(&self, samples: Option<usize>, seed: Option<u64>) -> Result<Plan, CliError> {
        let mut o = self.sizes.clone();
        if samples.is_some() {
            o.samples = samples;
        }
        let sizes = Sizes::resolve(&o)?;
        let explicit: Vec<_> = self
            .checks
            .iter()
            .map(|c| {
                let p = c.params.iter().map(|(k, v)| (k.clone(), toml_to_json(v))).collect();
                (Some(c.module.clone()), c.operation.clone(), p)
            })
            .collect();
        build_plan(self.suite.as_deref(), &explicit, seed.unwrap_or(self.seed), sizes)
    }
}
