//! Pipelines behind the subcommands. Each returns its artifacts and a status; nothing here
//! touches the filesystem.

use crate::error::{CliError, Result};
use crate::output::Artifact;
use predlab::arcs::{Angle, ArcSet};
use predlab::asymptotics::{self, DavissonShape, RateReport, Tolerance, Verdict};
use predlab::spectral::{Factor, Kind, SpectralDensity};
use predlab::trig::TrigPolynomial;
use predlab::{capacity, geomean, mp, toeplitz};
use serde::Serialize;
use std::fmt::Write;

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Pass,
    Fail(String),
    Degenerate(String),
}

impl Status {
    pub fn code(&self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail(_) => 1,
            Status::Degenerate(_) => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail(_) => "fail",
            Status::Degenerate(_) => "degenerate",
        }
    }

    fn worse(self, other: Status) -> Status {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug)]
pub struct Bundle {
    pub artifacts: Vec<Artifact>,
    pub status: Status,
    /// Human-readable summary lines.
    pub lines: Vec<String>,
}

impl Bundle {
    fn new() -> Self {
        Bundle { artifacts: vec![], status: Status::Pass, lines: vec![] }
    }

    fn set(&mut self, s: Status) {
        self.status = std::mem::replace(&mut self.status, Status::Pass).worse(s);
    }

    /// Artifact matching the requested stdout format, if any.
    pub fn primary(&self, json: bool) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.is_json() == json)
    }
}

pub const VERIFY_IDS: &[&str] = &["rosenblatt1", "rosenblatt2", "ratio", "davisson", "inoue", "table1", "hat-pollaczek", "eigen-rates"];

pub fn parse_density(src: &str) -> Result<SpectralDensity> {
    Ok(SpectralDensity::parse(src)?)
}

pub fn parse_factor(src: &str) -> Result<Factor> {
    Ok(Factor::parse(src)?)
}

/// Working bits the trace of `f` needs up to `n`; arc-supported densities decay like `tau^(2n)`.
pub fn budget_bits(f: &SpectralDensity, n: usize) -> u32 {
    if f.support().is_full() {
        return 64;
    }
    let t = capacity::tau_arcset(f.support());
    let tau = t.bracket.map(|(lo, _)| lo.min(t.value)).unwrap_or(t.value);
    toeplitz::required_bits(n, tau * tau)
}

pub fn check_budget(f: &SpectralDensity, n: usize, prec: u32, overridden: bool) -> Result<Vec<String>> {
    let need = budget_bits(f, n);
    if prec >= need {
        return Ok(vec![]);
    }
    if overridden {
        return Ok(vec![format!("precision {prec} below the budget of {need} bits; run anyway on request")]);
    }
    Err(CliError::Budget { spec: f.to_string(), n, required: need, given: prec })
}

#[derive(Serialize)]
struct TraceJson {
    density: String,
    summary: toeplitz::TraceSummary,
    sigma2_inf: Option<String>,
    sigma2: Vec<String>,
}

/// Levinson trace with the rate report of its excess errors.
pub fn sigma(f: &SpectralDensity, n: usize, prec: u32) -> Result<Bundle> {
    let mut b = Bundle::new();
    let r = asymptotics::pipeline_covariances(f, n, prec)?;
    let trace = toeplitz::levinson(&r, n)?;
    let s_inf = match asymptotics::sigma_inf_sq(f, prec) {
        Ok(s) => Some(s),
        Err(e) => {
            b.lines.push(format!("warning: limit not available: {e}"));
            None
        }
    };
    let mut rep = asymptotics::analyze(&trace, s_inf.as_ref());
    asymptotics::guard_classification(&mut rep, f);
    b.artifacts.push(Artifact::new("trace.csv", trace.to_csv()));
    b.artifacts.push(Artifact::json(
        "trace.json",
        &TraceJson {
            density: f.to_string(),
            summary: trace.summary(),
            sigma2_inf: s_inf.as_ref().map(mp::fmt_float),
            sigma2: trace.sigma2.iter().map(mp::fmt_float).collect(),
        },
    ));
    b.artifacts.push(Artifact::json("rates.json", &rep));
    b.artifacts.push(Artifact::new("rates.csv", rep.to_csv()));
    b.lines.push(format!("{f}: sigma2_{} = {}", trace.n_max(), mp::fmt_digits(&trace.sigma2[trace.n_max()], 12)));
    b.lines.push(format!("decay class {:?}", rep.classification));
    let mut seen = std::collections::BTreeSet::new();
    for w in trace.warnings.iter().chain(rep.warnings.iter()) {
        if seen.insert(w) {
            b.lines.push(format!("warning: {w}"));
        }
    }
    if let Some(k) = trace.degenerate_at {
        b.set(Status::Degenerate(format!("trace degenerate at n = {k}")));
    }
    Ok(b)
}

#[derive(Serialize)]
struct GeomeanJson {
    density: String,
    #[serde(flatten)]
    record: geomean::GeomeanRecord,
}

pub fn geomean(f: &SpectralDensity, prec: u32) -> Result<Bundle> {
    let mut b = Bundle::new();
    let szego = geomean::szego_condition(f);
    let g = geomean::geometric_mean(f, prec)?;
    let record = g.record(szego);
    let mut csv = String::from("value,method,log_integral,classification,error_bound\n");
    let _ = writeln!(
        csv,
        "{},{:?},{},{:?},{}",
        record.value,
        record.method,
        record.log_integral,
        record.classification,
        record.error_bound.map(|e| format!("{e:e}")).unwrap_or_default()
    );
    b.lines.push(format!("G({f}) = {} ({:?})", record.value, record.method));
    b.artifacts.push(Artifact::json("geomean.json", &GeomeanJson { density: f.to_string(), record }));
    b.artifacts.push(Artifact::new("geomean.csv", csv));
    Ok(b)
}

pub fn tau(arcs: &ArcSet) -> Result<Bundle> {
    let mut b = Bundle::new();
    let t = capacity::tau_arcset(arcs);
    #[derive(Serialize)]
    struct TauJson<'a> {
        arcs: String,
        #[serde(flatten)]
        result: &'a capacity::TauResult,
    }
    let mut csv = String::from("arcs,value,method,lo,hi,n_points\n");
    let (lo, hi) = t.bracket.map(|(l, h)| (l.to_string(), h.to_string())).unwrap_or_default();
    let method = serde_json::to_value(t.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let _ = writeln!(csv, "\"{arcs}\",{},{method},{lo},{hi},{}", t.value, t.n_points.map(|n| n.to_string()).unwrap_or_default());
    b.lines.push(match t.bracket {
        Some((l, h)) => format!("tau({arcs}) in [{l}, {h}], estimate {} ({method})", t.value),
        None => format!("tau({arcs}) = {} ({method})", t.value),
    });
    b.artifacts.push(Artifact::json("tau.json", &TauJson { arcs: arcs.to_string(), result: &t }));
    b.artifacts.push(Artifact::new("tau.csv", csv));
    Ok(b)
}

fn grid(n: usize, all: bool) -> Vec<usize> {
    if all || n <= 64 {
        return (1..=n).collect();
    }
    let mut v: Vec<usize> = (0..48).map(|i| (n as f64).powf(i as f64 / 47.0).round() as usize).collect();
    v.dedup();
    v
}

/// Minimal eigenvalues of `T_n` against `sigma2_n` on a grid of `n`.
pub fn eigen(f: &SpectralDensity, n: usize, prec: u32, all: bool) -> Result<Bundle> {
    let mut b = Bundle::new();
    let r = asymptotics::pipeline_covariances(f, n, prec)?;
    if !r.is_real() {
        return Err(CliError::Usage("eigenvalue bisection needs an even density".into()));
    }
    let trace = toeplitz::levinson(&r, n)?;
    let top = trace.degenerate_at.map(|k| k.saturating_sub(1)).unwrap_or(n);
    let mut rows = Vec::new();
    let mut csv = String::from("n,lambda_min,lo,hi,sigma2,method,lower_bound_only\n");
    for k in grid(top, all) {
        let tol = trace.sigma2[k].to_f64() * 1e-12;
        let e = toeplitz::min_eigenvalue(&r, k, prec, tol)?;
        let row = e.row();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{:?},{}",
            row.n,
            row.lambda_min,
            row.lo,
            row.hi,
            mp::fmt_float(&trace.sigma2[k]),
            row.method,
            row.lower_bound_only
        );
        rows.push(row);
    }
    if let Some(last) = rows.last() {
        b.lines.push(format!("{f}: lambda_min(T_{}) = {}", last.n, last.lambda_min));
    }
    b.artifacts.push(Artifact::json("eigen.json", &rows));
    b.artifacts.push(Artifact::new("eigen.csv", csv));
    if let Some(k) = trace.degenerate_at {
        b.set(Status::Degenerate(format!("trace degenerate at n = {k}; eigenvalues reported up to n = {top}")));
    }
    Ok(b)
}

/// Density a verification uses when none is given.
pub fn default_density(id: &str) -> Result<SpectralDensity> {
    Ok(match id {
        "rosenblatt1" | "davisson" => SpectralDensity::arc_indicator(ArcSet::single(Angle::pi_frac(1, 2), Angle::pi_frac(1, 2))?)?,
        "rosenblatt2" | "ratio" | "table1" | "hat-pollaczek" => SpectralDensity::pollaczek(1.0)?,
        "inoue" => SpectralDensity::arfima(0.25, vec![], vec![], 1.0)?,
        "eigen-rates" => SpectralDensity::ma1(1.0, 1.0)?,
        other => return Err(unknown(other)),
    })
}

pub fn default_factor() -> Result<Factor> {
    Ok(Factor::abs_trig_pow(TrigPolynomial::sin2(Angle::zero()), 1.0)?)
}

fn unknown(id: &str) -> CliError {
    CliError::Usage(format!("unknown verification '{id}'; expected one of {}", VERIFY_IDS.join(", ")))
}

fn pollaczek_a(id: &str, f: &SpectralDensity) -> Result<f64> {
    match f.kind() {
        Kind::Pollaczek { a } | Kind::HatPollaczek { a } => Ok(*a),
        _ => Err(CliError::Usage(format!("{id} needs a pollaczek density, got {f}"))),
    }
}

#[derive(Serialize)]
struct VerifyJson<'a, T: Serialize> {
    id: &'a str,
    density: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    factor: Option<String>,
    n_max: usize,
    precision_bits: u32,
    verdict: &'a str,
    report: T,
}

fn verdict_status(id: &str, rep: &RateReport) -> Status {
    match rep.verdict {
        Verdict::Pass => Status::Pass,
        v => {
            let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            Status::Fail(format!("{id}: {v:?}{}", if failed.is_empty() { String::new() } else { format!(" ({})", failed.join("; ")) }))
        }
    }
}

fn report_lines(b: &mut Bundle, rep: &RateReport) {
    for c in &rep.checks {
        b.lines.push(format!(
            "  {} {}: target {:e}, computed {:e}",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.target,
            c.computed
        ));
    }
    for w in &rep.warnings {
        b.lines.push(format!("  warning: {w}"));
    }
}

/// Runs verification `id` on `f` (and `g` for the ratio theorem).
pub fn verify(id: &str, f: &SpectralDensity, g: Option<&Factor>, n: usize, prec: u32) -> Result<Bundle> {
    let mut b = Bundle::new();
    let factor = g.map(|g| g.to_string());
    let push_rate = |b: &mut Bundle, rep: RateReport| {
        let status = verdict_status(id, &rep);
        b.lines.push(format!("{id}: verdict {:?}", rep.verdict));
        report_lines(b, &rep);
        b.artifacts.push(Artifact::new(format!("{id}.csv"), rep.to_csv()));
        b.artifacts.push(Artifact::json(
            format!("{id}.json"),
            &VerifyJson { id, density: f.to_string(), factor: factor.clone(), n_max: n, precision_bits: prec, verdict: status.label(), report: &rep },
        ));
        b.set(status);
    };
    match id {
        "rosenblatt1" => {
            let arcs = f.support().arcs();
            if f.support().is_full() || arcs.len() != 1 {
                return Err(CliError::Usage(format!("rosenblatt1 needs a density supported on one arc, got {f}")));
            }
            let rep = asymptotics::verify_rosenblatt1(&arcs[0].half, n, prec)?;
            push_rate(&mut b, rep);
        }
        "rosenblatt2" => push_rate(&mut b, asymptotics::verify_rosenblatt2(pollaczek_a(id, f)?, n, prec)?),
        "hat-pollaczek" => push_rate(&mut b, asymptotics::verify_hat_pollaczek(pollaczek_a(id, f)?, n, prec)?),
        "inoue" => {
            let d = match f.kind() {
                Kind::Arfima { d, ar, ma, .. } if ar.is_empty() && ma.is_empty() => *d,
                _ => return Err(CliError::Usage(format!("inoue needs an arfima density without ARMA part, got {f}"))),
            };
            push_rate(&mut b, asymptotics::verify_inoue(d, n, prec)?);
        }
        "ratio" => {
            let g = match g {
                Some(g) => g.clone(),
                None => default_factor()?,
            };
            push_rate(&mut b, asymptotics::verify_ratio_theorem(f, &g, n, prec, Tolerance::Rel(0.05))?);
        }
        "eigen-rates" => push_rate(&mut b, asymptotics::verify_eigen_rates(f, n, prec)?),
        "davisson" => {
            let shape = DavissonShape::from_support(f.support())?;
            let r = asymptotics::pipeline_covariances(f, n, prec)?;
            let trace = toeplitz::levinson(&r, n)?;
            let mut csv = String::from("n,sigma2,bound\n");
            for k in 1..=trace.n_max() {
                let bound = shape.bound(r.r0(), k, prec);
                let _ = writeln!(csv, "{k},{},{}", mp::fmt_float(&trace.sigma2[k]), mp::fmt_float(&bound));
            }
            b.artifacts.push(Artifact::new("davisson.csv", csv));
            let (rep, status) = match asymptotics::verify_davisson(&trace, &shape, r.r0()) {
                Ok(rep) => (Some(rep), Status::Pass),
                Err(predlab::Error::Violation(m)) => (None, Status::Fail(format!("davisson: {m}"))),
                Err(e) => return Err(e.into()),
            };
            #[derive(Serialize)]
            struct DavissonJson {
                shape: String,
                result: Option<asymptotics::DavissonReport>,
                failure: Option<String>,
            }
            let failure = match &status {
                Status::Fail(m) => Some(m.clone()),
                _ => None,
            };
            b.lines.push(format!("davisson: {shape:?}, {}", status.label()));
            b.artifacts.push(Artifact::json(
                "davisson.json",
                &VerifyJson {
                    id,
                    density: f.to_string(),
                    factor: None,
                    n_max: n,
                    precision_bits: prec,
                    verdict: status.label(),
                    report: DavissonJson { shape: format!("{shape:?}"), result: rep, failure },
                },
            ));
            b.set(status);
            if let Some(k) = trace.degenerate_at {
                b.set(Status::Degenerate(format!("trace degenerate at n = {k}")));
            }
        }
        "table1" => {
            let row = asymptotics::table1_constants(pollaczek_a(id, f)?)?;
            let csv = format!("a,analytic_factor,c_hat,c\n{},{},{},{}\n", row.a, row.analytic_factor, row.c_hat, row.c);
            b.lines.push(format!("table1: a = {}, analytic factor {}, C_hat {}, C {}", row.a, row.analytic_factor, row.c_hat, row.c));
            b.artifacts.push(Artifact::new("table1.csv", csv));
            b.artifacts.push(Artifact::json(
                "table1.json",
                &VerifyJson { id, density: f.to_string(), factor: None, n_max: n, precision_bits: prec, verdict: "pass", report: &row },
            ));
        }
        other => return Err(unknown(other)),
    }
    Ok(b)
}
