//! Run configuration, command dispatch and report emission.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::conditions::{
    attach_torsion, evaluate_sigma, first_condition_from_terms, improved_from_terms,
    l1_from_terms, second_condition_from_terms, sigma_samples, ConditionOptions,
};
use crate::domain::{Domain, DomainSpec};
use crate::error::{DfError, Result};
use crate::frame::holo_c1_seminorm;
use crate::program::{FieldProgram, PsiFamily};
use crate::psh::{
    certify_eta, estimate_index, IndexOptions, SamplePlan, Verdict, DEFAULT_DENOM_TOL,
    DEFAULT_PSD_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Certify,
    EstimateIndex,
    Conditions,
    WormSweep,
}

/// ψ given as a program, a named family (`"zero"` or `"default"`), or an
/// explicit basis with optional coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PsiConfig {
    Named(String),
    Family {
        family: Vec<FieldProgram>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeffs: Option<Vec<f64>>,
    },
    Program(FieldProgram),
}

impl Default for PsiConfig {
    fn default() -> Self {
        PsiConfig::Named("zero".into())
    }
}

impl PsiConfig {
    fn named_family(name: &str) -> Result<PsiFamily> {
        match name {
            "zero" => Ok(PsiFamily::zero()),
            "default" => Ok(PsiFamily::default_family()),
            other => Err(DfError::Config(format!("unknown psi family '{other}'"))),
        }
    }

    /// The single ψ used by certify and conditions. Families without
    /// coefficients resolve to their origin, ψ ≡ 0.
    pub fn program(&self) -> Result<FieldProgram> {
        match self {
            PsiConfig::Named(n) => {
                Self::named_family(n)?;
                Ok(FieldProgram::zero())
            }
            PsiConfig::Program(p) => {
                p.validate()?;
                Ok(p.clone())
            }
            PsiConfig::Family { family, coeffs } => {
                let fam = PsiFamily::new(family.clone());
                match coeffs {
                    Some(c) if c.len() != fam.dim() => Err(DfError::Config(
                        "psi coeffs must match the family size".into(),
                    )),
                    Some(c) => Ok(fam.program(c)),
                    None => Ok(FieldProgram::zero()),
                }
            }
        }
    }

    /// The family searched by estimate-index.
    pub fn family(&self) -> Result<PsiFamily> {
        match self {
            PsiConfig::Named(n) => Self::named_family(n),
            PsiConfig::Program(p) => {
                p.validate()?;
                Ok(PsiFamily::new(vec![p.clone()]))
            }
            PsiConfig::Family { family, .. } => {
                for f in family {
                    f.validate()?;
                }
                Ok(PsiFamily::new(family.clone()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub psd_tol: f64,
    pub denom_tol: f64,
    pub leviflat_tol: f64,
    pub bisect_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd_tol: DEFAULT_PSD_TOL,
            denom_tol: DEFAULT_DENOM_TOL,
            leviflat_tol: 1e-6,
            bisect_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdSteps {
    pub eps_b: f64,
    pub third_step: f64,
    pub delta_h: Option<f64>,
}

impl Default for FdSteps {
    fn default() -> Self {
        let o = ConditionOptions::default();
        Self {
            eps_b: o.eps_b,
            third_step: o.third_step,
            delta_h: o.delta_h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numeric {
    pub samples: usize,
    pub seed: u64,
    pub tols: Tolerances,
    pub tubular_width: f64,
    pub fd_steps: FdSteps,
    /// Number of Levi-flat samples for the condition reports.
    pub sigma_samples: usize,
    pub search_budget: usize,
    pub restarts: usize,
    /// Values of `n` for the improved second bound.
    pub improved_n: Vec<u32>,
}

impl Default for Numeric {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            tols: Tolerances::default(),
            tubular_width: 0.05,
            fd_steps: FdSteps::default(),
            sigma_samples: 1000,
            search_budget: 60,
            restarts: 2,
            improved_n: vec![1, 4, 16],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub path: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            path: PathBuf::from("out"),
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    #[serde(default)]
    pub psi: PsiConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Exponent for certify and the second condition.
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub numeric: Numeric,
    #[serde(default)]
    pub output: Output,
}

fn default_eta() -> f64 {
    0.5
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| DfError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain
            .validate()
            .map_err(|e| DfError::Config(e.to_string()))?;
        let n = &self.numeric;
        let t = &n.tols;
        for (name, v) in [
            ("psd_tol", t.psd_tol),
            ("denom_tol", t.denom_tol),
            ("leviflat_tol", t.leviflat_tol),
            ("bisect_tol", t.bisect_tol),
            ("tubular_width", n.tubular_width),
            ("eps_b", n.fd_steps.eps_b),
            ("third_step", n.fd_steps.third_step),
        ] {
            if !(v > 0.0) {
                return Err(DfError::Config(format!("{name} must be positive")));
            }
        }
        if let Some(h) = n.fd_steps.delta_h {
            if !(h > 0.0) {
                return Err(DfError::Config("delta_h must be positive".into()));
            }
        }
        if n.samples == 0 || n.sigma_samples == 0 {
            return Err(DfError::Config("sample counts must be at least 1".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(DfError::Config("eta must lie in (0, 1)".into()));
        }
        if n.improved_n.iter().any(|&k| k == 0) {
            return Err(DfError::Config("improved_n entries must be positive".into()));
        }
        self.psi.family()?;
        self.psi.program()?;
        Ok(())
    }

    pub fn plan(&self) -> SamplePlan {
        SamplePlan {
            samples: self.numeric.samples,
            seed: self.numeric.seed,
            tubular_width: self.numeric.tubular_width,
            ..SamplePlan::default()
        }
    }

    pub fn index_options(&self) -> IndexOptions {
        IndexOptions {
            bisect_tol: self.numeric.tols.bisect_tol,
            search_budget: self.numeric.search_budget,
            seed: self.numeric.seed,
            restarts: self.numeric.restarts,
            psd_tol: self.numeric.tols.psd_tol,
            ..IndexOptions::default()
        }
    }

    pub fn condition_options(&self) -> ConditionOptions {
        ConditionOptions {
            eps_b: self.numeric.fd_steps.eps_b,
            third_step: self.numeric.fd_steps.third_step,
            delta_h: self.numeric.fd_steps.delta_h,
            denom_tol: self.numeric.tols.denom_tol,
        }
    }

    fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| DfError::Io(format!("invalid output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "inf".into())
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| DfError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| DfError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| DfError::Io(e.to_string()))
}

fn write_json(cfg: &RunConfig, name: &str, value: &serde_json::Value) -> Result<PathBuf> {
    let path = cfg.output.path.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| DfError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// Outcome of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: serde_json::Value,
    pub files: Vec<PathBuf>,
}

fn envelope(cmd: Command, cfg: &RunConfig, result: serde_json::Value) -> serde_json::Value {
    json!({
        "command": cmd,
        "config": cfg,
        "result": result,
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| DfError::Io(e.to_string()))
}

/// Runs one command and writes its reports.
pub fn run(cmd: Command, cfg: &RunConfig, betas: &[f64]) -> Result<RunOutcome> {
    let mut cfg = cfg.clone();
    cfg.command = Some(cmd);
    cfg.validate()?;
    match cmd {
        Command::Certify => run_certify(&cfg),
        Command::EstimateIndex => run_estimate(&cfg),
        Command::Conditions => run_conditions(&cfg),
        Command::WormSweep => run_sweep(&cfg, betas),
    }
}

fn finish(cmd: Command, cfg: &RunConfig, result: serde_json::Value, mut files: Vec<PathBuf>) -> Result<RunOutcome> {
    let report = envelope(cmd, cfg, result);
    if cfg.wants(Format::Json) {
        files.push(write_json(cfg, "report.json", &report)?);
    }
    Ok(RunOutcome { report, files })
}

fn run_certify(cfg: &RunConfig) -> Result<RunOutcome> {
    let domain = Domain::new(cfg.domain.clone())?;
    let psi = cfg.psi.program()?;
    let rep = certify_eta(&domain, &psi, cfg.eta, &cfg.plan(), cfg.numeric.tols.psd_tol)?;
    finish(Command::Certify, cfg, to_value(&rep)?, Vec::new())
}

fn run_estimate(cfg: &RunConfig) -> Result<RunOutcome> {
    let domain = Domain::new(cfg.domain.clone())?;
    let family = cfg.psi.family()?;
    let est = estimate_index(&domain, &family, &cfg.plan(), &cfg.index_options())?;
    finish(Command::EstimateIndex, cfg, to_value(&est)?, Vec::new())
}

/// Condition reports for one domain and ψ, or `None` when the Levi-flat set
/// is empty.
fn conditions_value(
    cfg: &RunConfig,
    domain: &Domain,
    psi: &FieldProgram,
) -> Result<(serde_json::Value, Option<(Vec<Vec<String>>, Vec<Vec<String>>)>, Option<f64>)> {
    let n = &cfg.numeric;
    let mut sigma = sigma_samples(domain, n.sigma_samples, n.seed, n.tols.leviflat_tol)?;
    if sigma.is_empty() {
        let v = json!({
            "vacuous": true,
            "reason": DfError::EmptySigma.to_string(),
        });
        return Ok((v, None, None));
    }
    let opts = cfg.condition_options();
    let ev = evaluate_sigma(domain, psi, &sigma, &opts)?;
    attach_torsion(&mut sigma, &ev.terms, opts.denom_tol);
    let first = first_condition_from_terms(
        ev.constants,
        &ev.terms,
        &ev.l_psi_abs2,
        opts.denom_tol,
        ev.closedness.clone(),
    );
    let second = second_condition_from_terms(
        ev.constants,
        &ev.terms,
        cfg.eta,
        opts.denom_tol,
        ev.closedness.clone(),
    );
    let improved: Vec<_> = n
        .improved_n
        .iter()
        .map(|&k| {
            let rows = improved_from_terms(&ev.constants, &ev.terms, k);
            let violations = rows.iter().filter(|r| !r.holds).count();
            json!({ "n": k, "violations": violations, "per_point": rows })
        })
        .collect();
    let l1 = l1_from_terms(&ev.terms, &sigma);
    let (vals, lvals): (Vec<_>, Vec<_>) = ev
        .terms
        .iter()
        .filter(|t| t.denom.norm() >= opts.denom_tol)
        .filter_map(|t| Some((t.denom.inv(), t.l_torsion()?)))
        .unzip();
    let c1_norm = holo_c1_seminorm(&vals, &lvals).ok();
    let value = json!({
        "vacuous": false,
        "sigma_size": sigma.len(),
        "constants": ev.constants,
        "closedness": ev.closedness,
        "first_condition": first,
        "second_condition": second,
        "improved_second_bound": improved,
        "l1_torsion_integral": l1,
        "torsion_c1_seminorm": c1_norm,
    });
    let sigma_rows = sigma
        .iter()
        .map(|s| {
            let x = s.bp.p.to_real();
            let t = s.torsion.and_then(|t| t.value());
            vec![
                num(x[0]),
                num(x[1]),
                num(x[2]),
                num(x[3]),
                num(s.levi),
                opt_num(t.map(|t| t.re)),
                opt_num(t.map(|t| t.im)),
                num(s.weight),
            ]
        })
        .collect();
    let cond_rows = first
        .per_point
        .iter()
        .zip(&second.per_point)
        .map(|(f, s)| {
            vec![
                num(f.point[0]),
                num(f.point[1]),
                num(f.point[2]),
                num(f.point[3]),
                serde_json::to_value(f.branch).unwrap().as_str().unwrap_or("").to_string(),
                opt_num(f.lhs),
                s.rhs.map(num).unwrap_or_default(),
                s.holds.to_string(),
            ]
        })
        .collect();
    Ok((value, Some((sigma_rows, cond_rows)), first.summary.implied_index_bound))
}

fn run_conditions(cfg: &RunConfig) -> Result<RunOutcome> {
    let domain = Domain::new(cfg.domain.clone())?;
    let psi = cfg.psi.program()?;
    let (value, rows, _) = conditions_value(cfg, &domain, &psi)?;
    let mut files = Vec::new();
    if let (true, Some((sigma_rows, cond_rows))) = (cfg.wants(Format::Csv), rows) {
        let p = cfg.output.path.join("sigma.csv");
        write_atomic(
            &p,
            &csv_bytes(
                &["re_z", "im_z", "re_w", "im_w", "levi", "re_torsion", "im_torsion", "weight"],
                sigma_rows,
            )?,
        )?;
        files.push(p);
        let p = cfg.output.path.join("conditions.csv");
        write_atomic(
            &p,
            &csv_bytes(
                &["re_z", "im_z", "re_w", "im_w", "branch", "lhs", "rhs", "holds"],
                cond_rows,
            )?,
        )?;
        files.push(p);
    }
    finish(Command::Conditions, cfg, value, files)
}

/// `2π / (2β - π)`
pub fn worm_paper_bound(beta: f64) -> f64 {
    2.0 * std::f64::consts::PI / (2.0 * beta - std::f64::consts::PI)
}

/// Slack allowed between the certified lower estimate and the upper bound.
pub const SWEEP_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub certified_eta_lower: Option<f64>,
    pub implied_eta_upper_from_first_condition: Option<f64>,
    pub paper_bound: f64,
    pub vacuous: bool,
    pub consistent: Option<bool>,
    pub error: Option<String>,
}

fn sweep_row(cfg: &RunConfig, beta: f64) -> SweepRow {
    let paper_bound = worm_paper_bound(beta);
    let mut row = SweepRow {
        beta,
        certified_eta_lower: None,
        implied_eta_upper_from_first_condition: None,
        paper_bound,
        vacuous: paper_bound >= 1.0,
        consistent: None,
        error: None,
    };
    let a = match &cfg.domain {
        DomainSpec::Worm { beta: b0, a: Some(a0), .. } => Some(a0 - b0 + beta),
        _ => None,
    };
    let spec = DomainSpec::Worm { beta, a, bbox: None };
    let result = (|| -> Result<(f64, Option<f64>)> {
        let domain = Domain::new(spec)?;
        let family = cfg.psi.family()?;
        let est = estimate_index(&domain, &family, &cfg.plan(), &cfg.index_options())?;
        let psi = family.program(&est.best_psi);
        let (_, _, upper) = conditions_value(cfg, &domain, &psi)?;
        Ok((est.eta_star, upper))
    })();
    match result {
        Ok((lower, upper)) => {
            row.certified_eta_lower = Some(lower);
            row.implied_eta_upper_from_first_condition = upper;
            row.consistent = Some(lower <= paper_bound + SWEEP_SLACK);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn run_sweep(cfg: &RunConfig, betas: &[f64]) -> Result<RunOutcome> {
    if betas.is_empty() {
        return Err(DfError::Config("worm-sweep needs at least one beta".into()));
    }
    for &b in betas {
        if !(b.is_finite() && b > std::f64::consts::FRAC_PI_2) {
            return Err(DfError::Config(format!(
                "worm domain requires beta > pi/2 (strict), got beta = {b}"
            )));
        }
    }
    let rows: Vec<SweepRow> = betas.iter().map(|&b| sweep_row(cfg, b)).collect();
    let mut files = Vec::new();
    if cfg.wants(Format::Csv) {
        let csv_rows = rows
            .iter()
            .map(|r| {
                vec![
                    num(r.beta),
                    r.certified_eta_lower.map(num).unwrap_or_default(),
                    r.implied_eta_upper_from_first_condition.map(num).unwrap_or_default(),
                    num(r.paper_bound),
                    r.vacuous.to_string(),
                    r.consistent.map(|c| c.to_string()).unwrap_or_default(),
                    r.error.clone().unwrap_or_default(),
                ]
            })
            .collect();
        let p = cfg.output.path.join("sweep.csv");
        write_atomic(
            &p,
            &csv_bytes(
                &[
                    "beta",
                    "certified_eta_lower",
                    "implied_eta_upper_from_first_condition",
                    "paper_bound",
                    "vacuous",
                    "consistent",
                    "error",
                ],
                csv_rows,
            )?,
        )?;
        files.push(p);
    }
    let all_consistent = rows.iter().all(|r| r.consistent != Some(false));
    let value = json!({ "betas": betas, "rows": rows, "consistent": all_consistent });
    finish(Command::WormSweep, cfg, value, files)
}

/// Exit status for an error: 2 for configuration problems, 3 for numerical
/// failures, 1 otherwise.
pub fn exit_code(e: &DfError) -> i32 {
    match e {
        DfError::Config(_) | DfError::Spec(_) => 2,
        e if e.is_numerical() => 3,
        DfError::EmptySigma | DfError::EmptyInput => 3,
        _ => 1,
    }
}

/// Verdict string used in summaries.
pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Certified => "certified",
        Verdict::Refuted => "refuted",
        Verdict::Inconclusive => "inconclusive",
    }
}
