//! Batch front end: TOML run configuration, orchestration of the criteria,
//! index and spectrum stages, JSON reports and CSV tables.

use std::io::Write;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::criteria::{
    dyukarev_beta_route, evaluate_all, perturbation_alpha_conditions, perturbation_equivalence, CriteriaConfig,
    CriterionReport,
};
use crate::generators::{
    make_dyukarev, make_free, make_general, BlockSequence, FamilyKind, InteractionModel, PerturbationData,
    Strengths,
};
use crate::indices::{dirac_index_estimate, estimate_index, IndexConfig, IndexEstimate};
use crate::jacobi::BlockJacobiMatrix;
use crate::sequences::ScalarSequence;
use crate::spectra::{ritz_ladder, SpectrumSlice};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),
    #[error("missing field `{field}` (required by family {family})")]
    Missing { field: &'static str, family: String },
    #[error("field `{field}`: {msg}")]
    Invalid { field: &'static str, msg: String },
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    /// truncation sizes in blocks
    #[serde(default = "default_spectrum_schedule")]
    pub schedule: Vec<usize>,
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
}

fn default_spectrum_schedule() -> Vec<usize> {
    vec![16, 32, 64]
}

fn default_dense_cap() -> usize {
    4096
}

fn default_blocks() -> usize {
    8
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { schedule: default_spectrum_schedule(), dense_cap: default_dense_cap() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub report: Option<String>,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// generator name, e.g. `dirac-alpha`, `dyukarev`, `general`, `free`
    pub family: String,
    #[serde(default = "one_usize")]
    pub p: usize,
    pub p1: Option<usize>,
    #[serde(default = "one_f64")]
    pub c: f64,
    pub d: Option<ScalarSequence>,
    pub alpha: Option<BlockSequence>,
    pub beta: Option<BlockSequence>,
    pub perturbation: Option<PerturbationData>,
    /// diagonal and off-diagonal sequences of the `general` family
    pub diag: Option<BlockSequence>,
    pub offdiag: Option<BlockSequence>,
    /// number of blocks dumped by `build`
    #[serde(default = "default_blocks")]
    pub blocks: usize,
    #[serde(default)]
    pub criteria: CriteriaConfig,
    #[serde(default)]
    pub index: IndexConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one_usize() -> usize {
    1
}

fn one_f64() -> f64 {
    1.0
}

/// What a configuration builds.
pub enum Built {
    Matrix(BlockJacobiMatrix),
    Model { j: BlockJacobiMatrix, model: InteractionModel, kind: FamilyKind },
}

impl Built {
    pub fn matrix(&self) -> &BlockJacobiMatrix {
        match self {
            Built::Matrix(j) | Built::Model { j, .. } => j,
        }
    }

    pub fn model(&self) -> Option<&InteractionModel> {
        match self {
            Built::Model { model, .. } => Some(model),
            Built::Matrix(_) => None,
        }
    }
}

impl RunConfig {
    fn kind(&self) -> Result<Option<FamilyKind>, ConfigError> {
        if self.family == "free" {
            return Ok(None);
        }
        FamilyKind::ALL.iter().copied().find(|k| k.name() == self.family).map(Some).ok_or_else(|| {
            let names: Vec<&str> = FamilyKind::ALL.iter().map(|k| k.name()).collect();
            ConfigError::Invalid { field: "family", msg: format!("unknown family {:?}; expected free or one of {}", self.family, names.join(", ")) }
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let kind = self.kind()?;
        let missing = |field| ConfigError::Missing { field, family: self.family.clone() };
        let invalid = |field, msg: String| ConfigError::Invalid { field, msg };
        if self.p == 0 {
            return Err(invalid("p", "must be at least 1".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid("c", format!("must be positive, got {}", self.c)));
        }
        if self.criteria.n_max < 4 {
            return Err(invalid("criteria.n_max", "must be at least 4".into()));
        }
        if self.index.schedule.is_empty() || self.index.schedule.windows(2).any(|w| w[0] >= w[1]) || self.index.schedule[0] == 0 {
            return Err(invalid("index.schedule", "must be a nonempty increasing list of positive sizes".into()));
        }
        if self.index.z_points.iter().any(|z| z[1] == 0.0 || !z[0].is_finite() || !z[1].is_finite()) {
            return Err(invalid("index.z_points", "points must be finite and off the real axis".into()));
        }
        if !(self.index.tol > 0.0) {
            return Err(invalid("index.tol", "must be positive".into()));
        }
        if self.spectrum.schedule.is_empty() || self.spectrum.schedule.contains(&0) {
            return Err(invalid("spectrum.schedule", "must be a nonempty list of positive sizes".into()));
        }
        match kind {
            None => Ok(()),
            Some(FamilyKind::Dyukarev) => {
                let p1 = self.p1.ok_or_else(|| missing("p1"))?;
                if p1 > self.p {
                    return Err(invalid("p1", format!("must not exceed p = {}", self.p)));
                }
                Ok(())
            }
            Some(FamilyKind::General) => {
                let diag = self.diag.as_ref().ok_or_else(|| missing("diag"))?;
                let off = self.offdiag.as_ref().ok_or_else(|| missing("offdiag"))?;
                diag.validate(self.p).map_err(|e| invalid("diag", e.to_string()))?;
                off.validate(self.p).map_err(|e| invalid("offdiag", e.to_string()))
            }
            Some(k) => {
                let d = self.d.as_ref().ok_or_else(|| missing("d"))?;
                d.validate().map_err(|e| invalid("d", e.to_string()))?;
                if k.needs_alpha() {
                    if self.beta.is_some() {
                        return Err(invalid("beta", format!("family {} takes alpha, not beta", self.family)));
                    }
                    let a = self.alpha.as_ref().ok_or_else(|| missing("alpha"))?;
                    a.validate(self.p).map_err(|e| invalid("alpha", e.to_string()))?;
                }
                if k.needs_beta() {
                    if self.alpha.is_some() {
                        return Err(invalid("alpha", format!("family {} takes beta, not alpha", self.family)));
                    }
                    let b = self.beta.as_ref().ok_or_else(|| missing("beta"))?;
                    b.validate(self.p).map_err(|e| invalid("beta", e.to_string()))?;
                }
                if matches!(k, FamilyKind::PerturbedAlpha | FamilyKind::PerturbedBeta) {
                    let pert = self.perturbation.as_ref().ok_or_else(|| missing("perturbation"))?;
                    pert.a_prime.validate(self.p).map_err(|e| invalid("perturbation.a_prime", e.to_string()))?;
                    pert.b_prime.validate(self.p).map_err(|e| invalid("perturbation.b_prime", e.to_string()))?;
                }
                Ok(())
            }
        }
    }

    pub fn model(&self) -> Option<InteractionModel> {
        let d = self.d.clone()?;
        let strengths = match (&self.alpha, &self.beta) {
            (Some(a), None) => Strengths::Alpha(a.clone()),
            (None, Some(b)) => Strengths::Beta(b.clone()),
            _ => return None,
        };
        Some(InteractionModel { p: self.p, c: self.c, d, strengths })
    }

    pub fn build(&self) -> Result<Built, String> {
        let kind = self.kind().map_err(|e| e.to_string())?;
        match kind {
            None => Ok(Built::Matrix(make_free(self.p))),
            Some(FamilyKind::Dyukarev) => {
                make_dyukarev(self.p, self.p1.unwrap_or(0)).map(Built::Matrix).map_err(|e| e.to_string())
            }
            Some(FamilyKind::General) => {
                let (Some(a), Some(b)) = (self.diag.clone(), self.offdiag.clone()) else {
                    return Err("general family needs diag and offdiag".into());
                };
                make_general(self.p, a, b).map(Built::Matrix).map_err(|e| e.to_string())
            }
            Some(k) => {
                let model = self.model().ok_or("family needs d and exactly one of alpha/beta")?;
                let j = k.build_from_model(&model, self.perturbation.as_ref()).map_err(|e| e.to_string())?;
                Ok(Built::Model { j, model, kind: k })
            }
        }
    }
}

/// Parses and validates TOML configuration text. Syntax and schema errors
/// carry the line and column of the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &str) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.into(), msg: e.to_string() })?;
    parse_config(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Build,
    Criteria,
    Index,
    Spectrum,
    Report,
}

impl Command {
    fn runs(self, stage: Command) -> bool {
        self == stage || (self == Command::Report && stage != Command::Build)
    }
}

/// A matrix entry block in plain or log-scaled form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDump {
    pub log_scale: f64,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl BlockDump {
    fn from_scaled(b: &crate::ScaledBlock) -> Self {
        // small scales are folded into the entries
        let (log_scale, m) = if b.log_scale.abs() < 600.0 { (0.0, b.to_block()) } else { (b.log_scale, b.block.clone()) };
        let p = m.p();
        let re = (0..p).map(|i| (0..p).map(|j| m.get(i, j).re).collect()).collect();
        let im = (0..p).map(|i| (0..p).map(|j| m.get(i, j).im).collect()).collect();
        BlockDump { log_scale, re, im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub n: usize,
    pub diag: BlockDump,
    pub offdiag: BlockDump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub n_blocks: usize,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub lowest: Vec<f64>,
    /// largest drift of the lowest eigenvalues against the previous rung
    pub max_drift: Option<f64>,
}

impl SpectrumSummary {
    fn of(s: &SpectrumSlice) -> Self {
        let k = s.eigenvalues.len().min(8);
        SpectrumSummary {
            n_blocks: s.n_blocks,
            count: s.eigenvalues.len(),
            min: s.eigenvalues.first().copied().unwrap_or(f64::NAN),
            max: s.eigenvalues.last().copied().unwrap_or(f64::NAN),
            lowest: s.eigenvalues[..k].to_vec(),
            max_drift: s.ritz_stability[..k].iter().flatten().copied().reduce(f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub blocks: Vec<BlockRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub criteria: Vec<CriterionReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub index: Option<IndexEstimate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dirac_index: Option<IndexEstimate>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub spectrum: Vec<SpectrumSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub errors: Vec<String>,
    #[serde(skip)]
    pub slices: Vec<SpectrumSlice>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failed(&self) -> bool {
        !self.errors.is_empty()
    }
}

fn criteria_stage(built: &Built, cfg: &RunConfig) -> Result<Vec<CriterionReport>, String> {
    let j = built.matrix();
    let mut out = evaluate_all(j, built.model(), &cfg.criteria);
    if let Built::Model { model, kind, .. } = built {
        if matches!(kind, FamilyKind::PerturbedAlpha | FamilyKind::PerturbedBeta) {
            let base = match kind {
                FamilyKind::PerturbedAlpha => FamilyKind::DiracAlpha,
                _ => FamilyKind::DiracBeta,
            };
            let j0 = base.build_from_model(model, None).map_err(|e| e.to_string())?;
            out.push(perturbation_equivalence(&j0, j, &cfg.criteria));
            if let (FamilyKind::PerturbedAlpha, Some(p)) = (kind, &cfg.perturbation) {
                out.push(perturbation_alpha_conditions(model, p, &cfg.criteria));
            }
        }
    }
    if cfg.family == "dyukarev" {
        out.push(dyukarev_beta_route(cfg.p, cfg.p1.unwrap_or(0), &cfg.criteria));
    }
    Ok(out)
}

/// Runs the stages selected by `cmd`. Stage failures are collected in
/// `errors`; the stages that succeeded are still reported.
pub fn run(cfg: &RunConfig, cmd: Command) -> Report {
    let mut rep = Report {
        tool: "jacspec".into(),
        version: VERSION.into(),
        command: cmd,
        config: cfg.clone(),
        blocks: Vec::new(),
        criteria: Vec::new(),
        index: None,
        dirac_index: None,
        spectrum: Vec::new(),
        errors: Vec::new(),
        slices: Vec::new(),
    };
    let built = match cfg.build() {
        Ok(b) => b,
        Err(e) => {
            rep.errors.push(format!("build: {e}"));
            return rep;
        }
    };
    let j = built.matrix();
    if cmd == Command::Build {
        for n in 0..cfg.blocks {
            match (j.diag_scaled(n), j.offdiag_scaled(n)) {
                (Ok(a), Ok(b)) => rep.blocks.push(BlockRow { n, diag: BlockDump::from_scaled(&a), offdiag: BlockDump::from_scaled(&b) }),
                (Err(e), _) | (_, Err(e)) => {
                    rep.errors.push(format!("build: {e}"));
                    break;
                }
            }
        }
    }
    if cmd.runs(Command::Criteria) {
        match criteria_stage(&built, cfg) {
            Ok(c) => rep.criteria = c,
            Err(e) => rep.errors.push(format!("criteria: {e}")),
        }
    }
    if cmd.runs(Command::Index) {
        match estimate_index(j, &cfg.index) {
            Ok(e) => rep.index = Some(e),
            Err(e) => rep.errors.push(format!("index: {e}")),
        }
        if let Built::Model { model, kind: FamilyKind::DiracAlpha, .. } = &built {
            match dirac_index_estimate(model, &cfg.index) {
                Ok((e, _)) => rep.dirac_index = Some(e),
                Err(e) => rep.errors.push(format!("dirac index: {e}")),
            }
        }
    }
    if cmd.runs(Command::Spectrum) {
        match ritz_ladder(j, &cfg.spectrum.schedule, cfg.spectrum.dense_cap) {
            Ok(s) => {
                rep.spectrum = s.iter().map(SpectrumSummary::of).collect();
                rep.slices = s;
            }
            Err(e) => rep.errors.push(format!("spectrum: {e}")),
        }
    }
    rep
}

fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

pub fn write_criteria_csv<W: Write>(reports: &[CriterionReport], mut w: W) -> std::io::Result<()> {
    writeln!(w, "criterion_id,condition,verdict,implied_property")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{:?},\"{}\"",
            r.criterion_id,
            r.condition.as_deref().unwrap_or(""),
            r.verdict,
            r.implied_property.replace('"', "\"\"")
        )?;
    }
    Ok(())
}

pub fn write_ladder_csv<W: Write>(est: &IndexEstimate, mut w: W) -> std::io::Result<()> {
    writeln!(w, "z_re,z_im,N,k,log_eigenvalue")?;
    for l in &est.ladders {
        let (re, im) = match l.z.as_slice() {
            [re, im] => (csv_float(*re), csv_float(*im)),
            _ => (String::new(), String::new()),
        };
        for r in &l.rungs {
            for (k, h) in r.log_eigenvalues.iter().enumerate() {
                writeln!(w, "{re},{im},{},{k},{}", r.n_blocks, csv_float(*h))?;
            }
        }
    }
    Ok(())
}

/// The CSV table belonging to a report: spectra when present, otherwise the
/// index ladders, otherwise the criteria table.
pub fn write_csv<W: Write>(rep: &Report, w: W) -> std::io::Result<()> {
    if !rep.slices.is_empty() {
        return crate::spectra::write_csv(&rep.slices, w).map_err(std::io::Error::other);
    }
    if let Some(e) = &rep.index {
        return write_ladder_csv(e, w);
    }
    write_criteria_csv(&rep.criteria, w)
}

#[derive(Debug, Parser)]
#[command(name = "jacspec", version, about = "Selfadjointness and deficiency-index diagnostics for block Jacobi matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Dump the first blocks of the configured matrix
    Build(CommonArgs),
    /// Evaluate every applicable criterion
    Criteria(CommonArgs),
    /// Estimate the deficiency indices
    Index(CommonArgs),
    /// Truncation spectra
    Spectrum(CommonArgs),
    /// All of the above except the block dump
    Report(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: String,
    /// last index of every criterion scan
    #[arg(long)]
    pub n_max: Option<usize>,
    /// index rank threshold
    #[arg(long)]
    pub tol: Option<f64>,
    /// single truncation size for `spectrum`, or the number of dumped blocks for `build`
    #[arg(long = "blocks", visible_alias = "N")]
    pub blocks: Option<usize>,
    #[arg(long)]
    pub json: Option<String>,
    #[arg(long)]
    pub csv: Option<String>,
}

impl Sub {
    pub fn split(&self) -> (Command, &CommonArgs) {
        match self {
            Sub::Build(a) => (Command::Build, a),
            Sub::Criteria(a) => (Command::Criteria, a),
            Sub::Index(a) => (Command::Index, a),
            Sub::Spectrum(a) => (Command::Spectrum, a),
            Sub::Report(a) => (Command::Report, a),
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Applies command-line overrides on top of the file configuration.
pub fn apply_overrides(cfg: &mut RunConfig, cmd: Command, args: &CommonArgs) -> Result<(), ConfigError> {
    if let Some(n) = args.n_max {
        cfg.criteria.n_max = n;
    }
    if let Some(t) = args.tol {
        cfg.index.tol = t;
    }
    if let Some(k) = args.blocks {
        match cmd {
            Command::Build => cfg.blocks = k,
            _ => cfg.spectrum.schedule = vec![k],
        }
    }
    if args.json.is_some() {
        cfg.output.report = args.json.clone();
    }
    if args.csv.is_some() {
        cfg.output.csv = args.csv.clone();
    }
    cfg.validate()
}

fn write_file(path: &str, f: impl FnOnce(&mut std::fs::File) -> std::io::Result<()>) -> Result<(), String> {
    let mut file = std::fs::File::create(path).map_err(|e| format!("{path}: {e}"))?;
    f(&mut file).map_err(|e| format!("{path}: {e}"))
}

/// Entry point behind `main`; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let (cmd, args) = cli.command.split();
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = apply_overrides(&mut cfg, cmd, args) {
        eprintln!("config error: {e}");
        return EXIT_CONFIG;
    }
    if let Some(n) = std::env::var("JACSPEC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let rep = run(&cfg, cmd);
    let json = rep.to_json();
    let mut io_failed = false;
    match &cfg.output.report {
        Some(path) => {
            if let Err(e) = write_file(path, |f| writeln!(f, "{json}")) {
                eprintln!("write error: {e}");
                io_failed = true;
            }
        }
        None => println!("{json}"),
    }
    if let Some(path) = &cfg.output.csv {
        if let Err(e) = write_file(path, |f| write_csv(&rep, f)) {
            eprintln!("write error: {e}");
            io_failed = true;
        }
    }
    for e in &rep.errors {
        eprintln!("error: {e}");
    }
    if rep.failed() || io_failed {
        EXIT_NUMERIC
    } else {
        EXIT_OK
    }
}
