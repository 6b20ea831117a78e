use crate::error::{line_col, CliError, Result};
use crate::jobs::{self, Bundle, Status, VERIFY_IDS};
use crate::output::{self, Artifact};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use toml::Spanned;

pub const MIN_PRECISION: u32 = 64;
pub const MAX_PRECISION: u32 = 4096;
pub const MAX_N: usize = 5000;

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    out: Option<String>,
    precision: Option<u32>,
    n_max: Option<usize>,
    #[serde(default)]
    scenarios: Vec<ScenarioFile>,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum VerifyField {
    One(String),
    Many(Vec<String>),
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    id: Spanned<String>,
    density: Spanned<String>,
    factor: Option<Spanned<String>>,
    n_max: Option<usize>,
    precision: Option<u32>,
    verify: Option<VerifyField>,
    out: Option<String>,
    #[serde(default)]
    override_budget: bool,
}

/// A validated scenario; density strings are parsed when the scenario runs.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: String,
    pub density: String,
    pub factor: Option<String>,
    pub n_max: usize,
    pub precision_bits: u32,
    pub verify: Vec<String>,
    pub out: PathBuf,
    pub override_budget: bool,
    /// Byte offsets of the density and factor strings in the config source.
    density_at: usize,
    factor_at: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub precision: Option<u32>,
    pub n_max: Option<usize>,
    pub out: Option<PathBuf>,
}

pub struct Config {
    pub path: String,
    pub source: String,
    pub scenarios: Vec<Scenario>,
}

fn config_error(path: &str, src: &str, at: usize, msg: impl Into<String>) -> CliError {
    let (line, col) = line_col(src, at);
    CliError::Config { path: path.into(), line, col, msg: msg.into() }
}

pub fn load(path: &Path, ov: &Overrides) -> Result<Config> {
    let p = path.display().to_string();
    let source = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: p.clone(), source: e })?;
    parse(&p, &source, ov)
}

pub fn parse(path: &str, source: &str, ov: &Overrides) -> Result<Config> {
    let file: ConfigFile = toml::from_str(source).map_err(|e| {
        let at = e.span().map(|s| s.start).unwrap_or(0);
        config_error(path, source, at, e.message().to_string())
    })?;
    let base_out = ov.out.clone().or_else(|| file.out.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("reports"));
    let mut seen = BTreeSet::new();
    let mut scenarios = Vec::new();
    for s in file.scenarios {
        let at = s.id.span().start;
        let id = s.id.into_inner();
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(config_error(path, source, at, format!("scenario id '{id}' must be non-empty and use [A-Za-z0-9-_.]")));
        }
        if !seen.insert(id.clone()) {
            return Err(config_error(path, source, at, format!("duplicate scenario id '{id}'")));
        }
        let precision_bits = ov.precision.or(s.precision).or(file.precision).unwrap_or(256);
        if !(MIN_PRECISION..=MAX_PRECISION).contains(&precision_bits) {
            return Err(config_error(path, source, at, format!("scenario '{id}': precision {precision_bits} outside [{MIN_PRECISION}, {MAX_PRECISION}]")));
        }
        let n_max = ov.n_max.or(s.n_max).or(file.n_max).unwrap_or(100);
        if n_max == 0 || n_max > MAX_N {
            return Err(config_error(path, source, at, format!("scenario '{id}': n_max {n_max} outside [1, {MAX_N}]")));
        }
        let verify = match s.verify {
            None => vec![],
            Some(VerifyField::One(v)) if v == "none" => vec![],
            Some(VerifyField::One(v)) => vec![v],
            Some(VerifyField::Many(v)) => v.into_iter().filter(|x| x != "none").collect(),
        };
        for v in &verify {
            if !VERIFY_IDS.contains(&v.as_str()) {
                return Err(config_error(path, source, at, format!("scenario '{id}': unknown verification '{v}'")));
            }
        }
        let out = match (&ov.out, s.out) {
            (None, Some(o)) => PathBuf::from(o),
            _ => base_out.join(&id),
        };
        // span covers the quotes; offsets point at the first character
        let density_at = s.density.span().start + 1;
        let factor_at = s.factor.as_ref().map(|f| f.span().start + 1).unwrap_or(0);
        scenarios.push(Scenario {
            id,
            density: s.density.into_inner(),
            factor: s.factor.map(|f| f.into_inner()),
            n_max,
            precision_bits,
            verify,
            out,
            override_budget: s.override_budget,
            density_at,
            factor_at,
        });
    }
    scenarios.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(Config { path: path.into(), source: source.into(), scenarios })
}

#[derive(Serialize, Debug, Clone)]
pub struct ScenarioOutcome {
    pub id: String,
    pub status: String,
    pub code: i32,
    pub verify: Vec<String>,
    pub message: Option<String>,
    pub out: String,
}

/// Relocates a density parse error to its position in the config file.
fn spec_error(cfg: &Config, at: usize, e: CliError) -> CliError {
    match e {
        CliError::Core(predlab::Error::Parse { col, msg, .. }) => config_error(&cfg.path, &cfg.source, at + col - 1, msg),
        other => other,
    }
}

fn run_one(cfg: &Config, s: &Scenario) -> Result<Bundle> {
    let f = jobs::parse_density(&s.density).map_err(|e| spec_error(cfg, s.density_at, e))?;
    let g = match &s.factor {
        Some(src) => Some(jobs::parse_factor(src).map_err(|e| spec_error(cfg, s.factor_at, e))?),
        None => None,
    };
    let warnings = jobs::check_budget(&f, s.n_max, s.precision_bits, s.override_budget)?;
    let mut bundle = jobs::sigma(&f, s.n_max, s.precision_bits)?;
    bundle.lines.extend(warnings.into_iter().map(|w| format!("warning: {w}")));
    for v in &s.verify {
        let sub = jobs::verify(v, &f, g.as_ref(), s.n_max, s.precision_bits)?;
        bundle.lines.extend(sub.lines);
        bundle.artifacts.extend(sub.artifacts);
        if sub.status.code() > bundle.status.code() {
            bundle.status = sub.status;
        }
    }
    Ok(bundle)
}

fn summary_text(s: &Scenario, b: &Bundle) -> String {
    let mut t = format!(
        "scenario {}\ndensity {}\nn_max {}\nprecision {} bits\nverify {}\nstatus {}\n",
        s.id,
        s.density,
        s.n_max,
        s.precision_bits,
        if s.verify.is_empty() { "none".to_string() } else { s.verify.join(", ") },
        b.status.label()
    );
    if let Status::Fail(m) | Status::Degenerate(m) = &b.status {
        t.push_str(&format!("reason {m}\n"));
    }
    for l in &b.lines {
        t.push_str(l);
        t.push('\n');
    }
    t
}

/// Runs and writes one scenario.
pub fn run_scenario(cfg: &Config, s: &Scenario) -> ScenarioOutcome {
    let outcome = |code: i32, status: &str, message: Option<String>| ScenarioOutcome {
        id: s.id.clone(),
        status: status.into(),
        code,
        verify: s.verify.clone(),
        message,
        out: s.out.display().to_string(),
    };
    match run_one(cfg, s) {
        Ok(mut b) => {
            let text = summary_text(s, &b);
            b.artifacts.push(Artifact::new("summary.txt", text));
            if let Err(e) = output::write_all(&s.out, &b.artifacts) {
                return outcome(e.exit_code(), "error", Some(e.to_string()));
            }
            let msg = match &b.status {
                Status::Pass => None,
                Status::Fail(m) | Status::Degenerate(m) => Some(m.clone()),
            };
            outcome(b.status.code(), b.status.label(), msg)
        }
        Err(e) => outcome(e.exit_code(), "error", Some(e.to_string())),
    }
}

/// Runs every scenario on a bounded pool; outcomes come back sorted by id.
pub fn run_all(cfg: &Config, workers: usize) -> Vec<ScenarioOutcome> {
    let n = cfg.scenarios.len();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, ScenarioOutcome)>> = Mutex::new(Vec::with_capacity(n));
    std::thread::scope(|sc| {
        for _ in 0..workers.clamp(1, n.max(1)) {
            sc.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let o = run_scenario(cfg, &cfg.scenarios[i]);
                results.lock().unwrap().push((i, o));
            });
        }
    });
    let mut r = results.into_inner().unwrap();
    r.sort_by_key(|(i, _)| *i);
    r.into_iter().map(|(_, o)| o).collect()
}

/// Largest scenario code, 0 when all pass.
pub fn aggregate(outcomes: &[ScenarioOutcome]) -> i32 {
    outcomes.iter().map(|o| o.code).max().unwrap_or(0)
}

pub fn table(outcomes: &[ScenarioOutcome]) -> String {
    let w = outcomes.iter().map(|o| o.id.len()).max().unwrap_or(2).max(2);
    let mut t = format!("{:<w$}  {:<10}  {:<28}  {}\n", "id", "status", "verify", "detail");
    for o in outcomes {
        let v = if o.verify.is_empty() { "none".to_string() } else { o.verify.join(",") };
        t.push_str(&format!("{:<w$}  {:<10}  {:<28}  {}\n", o.id, o.status, v, o.message.as_deref().unwrap_or("")));
    }
    t
}
