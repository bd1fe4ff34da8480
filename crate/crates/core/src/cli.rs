//! The `ibsat` command line. Exit codes: 0 success, 2 usage or
//! configuration error, 3 unsuccessful attack, 4 internal error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::attack::{generate_instances, iterated_attack, AttackError, AttackReport};
use crate::cnf::{write_dimacs, Lit};
use crate::config::{ConfigError, RunConfig, Source};
use crate::estimator::{
    derive_seed, required_outputs, sample_input, BackdoorSet, EstimateRecord, Estimator, EstimatorConfig,
    ResistanceEstimate, Timing,
};
use crate::sat::{calibrate_conflicts_per_second, verify_supbs_with, BudgetMode, Calibration, SolveBudget};
use crate::search::{tabu_minimize, ResistanceObjective, RunOptions, SearchOutcome, Termination};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ATTACK_FAILED: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ibsat", version, about = "Inverse backdoor sets for guess-and-determine attacks")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; they override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Cipher spec (TOML).
    #[arg(long, global = true)]
    pub cipher: Option<PathBuf>,
    /// Gate netlist.
    #[arg(long, global = true)]
    pub netlist: Option<PathBuf>,
    /// Annotated DIMACS.
    #[arg(long, global = true)]
    pub dimacs: Option<PathBuf>,
    /// Sets the sample, search and attack seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, conflicts_with = "budget_seconds")]
    pub budget_conflicts: Option<u64>,
    #[arg(long, global = true)]
    pub budget_seconds: Option<f64>,
    /// Sample size `N`.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub p_min: Option<f64>,
    #[arg(long, global = true)]
    pub journal: Option<PathBuf>,
    #[arg(long, global = true)]
    pub resume: bool,
    #[arg(long, global = true)]
    pub initial_chi: Option<String>,
    /// Output file of the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Skip the conflicts-per-second measurement.
    #[arg(long, global = true)]
    pub no_calibrate: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the CNF encoding as annotated DIMACS.
    Encode,
    /// Estimate `P_B(t)` and `G(B)` at one point.
    Estimate(ChiArgs),
    /// Tabu search for a low-resistance backdoor.
    Minimize(MinimizeArgs),
    /// Run an iterated guess-and-determine attack.
    Attack(AttackArgs),
    /// Check whether unit propagation alone decides every guess.
    SupbsCheck(SupbsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ChiArgs {
    /// `B` as a bit string, `0x` hex, `idx:i,j,..`, `ones` or `zeros`.
    #[arg(long)]
    pub chi: String,
}

#[derive(Debug, Clone, Args)]
pub struct MinimizeArgs {
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub max_evaluations: Option<u64>,
    #[arg(long)]
    pub radius: Option<usize>,
    /// Keep the readable prefix of a damaged journal on resume.
    #[arg(long)]
    pub salvage: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AttackArgs {
    #[arg(long)]
    pub chi: String,
    /// Number of outputs to attack.
    #[arg(long)]
    pub r: Option<usize>,
    /// Success probability used to derive `r`.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub guess_cap_bits: Option<u32>,
    /// Use this `P̂` instead of re-estimating it.
    #[arg(long)]
    pub p_hat: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SupbsArgs {
    #[arg(long)]
    pub chi: String,
    /// Guesses drawn when `|B|` is too large for exhaustive checking.
    #[arg(long, default_value_t = 1024)]
    pub supbs_samples: u64,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl std::fmt::Display) -> Self {
        CliError { code: EXIT_USAGE, message: message.to_string() }
    }

    fn internal(message: impl std::fmt::Display) -> Self {
        CliError { code: EXIT_INTERNAL, message: message.to_string() }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::usage(e)
    }
}

/// What a command prints and its exit code.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            let _ = std::io::stdout().flush();
            out.code
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let mut config = resolve_config(&cli.common)?;
    match &cli.command {
        Command::Encode => cmd_encode(&config),
        Command::Estimate(a) => cmd_estimate(&config, &a.chi),
        Command::Minimize(a) => {
            if let Some(t) = a.time_limit {
                config.search.time_limit_seconds = Some(t);
            }
            if let Some(m) = a.max_evaluations {
                config.search.max_evaluations = Some(m);
            }
            if let Some(r) = a.radius {
                config.search.radius = r;
            }
            let stop = Arc::new(AtomicBool::new(false));
            let flag = Arc::clone(&stop);
            // a second Ctrl-C falls through to the default handler's effect
            let _ = ctrlc::set_handler(move || {
                if flag.swap(true, Ordering::SeqCst) {
                    std::process::exit(130);
                }
            });
            cmd_minimize(&config, cli.common.resume, a.salvage, Some(stop))
        }
        Command::Attack(a) => {
            if let Some(r) = a.r {
                config.attack.r = Some(r);
            }
            if let Some(t) = a.target {
                config.attack.target = t;
            }
            if let Some(c) = a.guess_cap_bits {
                config.attack.guess_cap_bits = c;
            }
            if let Some(p) = a.p_hat {
                config.attack.p_hat = Some(p);
            }
            config.validate()?;
            cmd_attack(&config, &a.chi)
        }
        Command::SupbsCheck(a) => cmd_supbs_check(&config, &a.chi, a.supbs_samples),
    }
}

/// Config file (if any) with flags applied on top.
pub fn resolve_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut c = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let source_flags = [&args.cipher, &args.netlist, &args.dimacs].iter().filter(|s| s.is_some()).count();
    if source_flags > 0 {
        c.cipher = args.cipher.clone();
        c.netlist = args.netlist.clone();
        c.dimacs = args.dimacs.clone();
    }
    if let Some(s) = args.seed {
        c.seeds.sample = s;
        c.seeds.search = s;
        c.seeds.attack = s;
    }
    if let Some(b) = args.budget_conflicts {
        c.budget = SolveBudget::conflicts(b);
    }
    if let Some(b) = args.budget_seconds {
        c.budget = SolveBudget::seconds(b);
    }
    if let Some(n) = args.samples {
        c.samples = n;
    }
    if let Some(w) = args.workers {
        c.workers = w;
    }
    if let Some(p) = args.p_min {
        c.p_min = p;
    }
    if let Some(j) = &args.journal {
        c.output.journal = Some(j.clone());
    }
    if let Some(o) = &args.out {
        c.output.out = Some(o.clone());
    }
    if let Some(chi) = &args.initial_chi {
        c.search.initial_chi = Some(chi.clone());
    }
    if args.no_calibrate {
        c.calibrate = false;
    }
    c.validate()?;
    Ok(c)
}

fn parse_chi(text: &str, source: &Source) -> Result<BackdoorSet, CliError> {
    BackdoorSet::parse(text, source.num_inputs()).map_err(CliError::usage)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn append_line(path: &Path, line: &str) -> Result<(), CliError> {
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    writeln!(f, "{line}").map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// `<path>.config.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

fn calibration(config: &RunConfig) -> Option<Calibration> {
    (config.calibrate && config.budget.mode == BudgetMode::Conflicts).then(|| calibrate_conflicts_per_second(20_000))
}

fn format_g(g: f64, budget: &SolveBudget, cal: Option<&Calibration>) -> String {
    if g.is_infinite() {
        return "inf".into();
    }
    match (budget.mode, cal) {
        (BudgetMode::Conflicts, Some(c)) => {
            format!("{g:.6e} conflicts (~{:.6e} s at {:.0} conflicts/s)", c.to_seconds(g), c.conflicts_per_second)
        }
        _ => format!("{g:.6e} {}", budget.unit()),
    }
}

pub fn cmd_encode(config: &RunConfig) -> Result<Outcome, CliError> {
    let source = config.load_source()?;
    let f = &source.formula;
    let text = write_dimacs(f);
    let mut stdout = String::new();
    let summary = format!(
        "n = {}, m = {}, variables = {}, clauses = {}",
        f.roles().inputs.len(),
        f.roles().outputs.len(),
        f.num_vars(),
        f.num_clauses()
    );
    match &config.output.out {
        Some(p) => {
            write_file(p, &text)?;
            writeln!(stdout, "{summary}").unwrap();
            writeln!(stdout, "wrote {}", p.display()).unwrap();
        }
        None => {
            stdout.push_str(&text);
            eprintln!("{summary}");
        }
    }
    Ok(Outcome { code: EXIT_OK, stdout })
}

fn estimator_for<'a>(source: &'a Source, config: EstimatorConfig) -> Result<Estimator<'a>, CliError> {
    Estimator::new(&source.formula, config).map_err(CliError::usage)
}

pub fn cmd_estimate(config: &RunConfig, chi: &str) -> Result<Outcome, CliError> {
    let source = config.load_source()?;
    let b = parse_chi(chi, &source)?;
    let estimator = estimator_for(&source, config.estimator_config())?;
    let est = estimator.resistance(&b).map_err(CliError::internal)?;
    let cal = calibration(config);
    let mut out = String::new();
    write_estimate(&mut out, &est, cal.as_ref());
    if let Some(p) = &config.output.out {
        let digest = crate::config::hex_sha256(config.to_json().to_string().as_bytes());
        let record = EstimateRecord::from_estimate(&est).with_timing(Timing {
            wall_seconds: est.wall_seconds,
            timestamp: crate::search::now(),
            g_seconds: g_seconds(&est, cal.as_ref()),
            conflicts_per_second: cal.map(|c| c.conflicts_per_second),
        });
        let mut line = serde_json::to_value(&record).expect("record serializes");
        line["config_sha256"] = digest.into();
        append_line(p, &line.to_string())?;
        write_file(&sidecar_path(p), &pretty(&config.to_json()))?;
        writeln!(out, "appended record to {}", p.display()).unwrap();
    }
    Ok(Outcome { code: EXIT_OK, stdout: out })
}

fn g_seconds(est: &ResistanceEstimate, cal: Option<&Calibration>) -> Option<f64> {
    match est.budget.mode {
        BudgetMode::WallSeconds => Some(est.g_value),
        BudgetMode::Conflicts => cal.map(|c| c.to_seconds(est.g_value)),
    }
}

fn write_estimate(out: &mut String, est: &ResistanceEstimate, cal: Option<&Calibration>) {
    let b = &est.backdoor;
    writeln!(out, "chi      {} (s = {} of {})", b.to_bitstring(), b.size(), b.len()).unwrap();
    writeln!(out, "xi_bar   {} ({}/{} solved within {} {})", est.xi_bar, est.successes, est.sample_size, est.budget.limit, est.budget.unit()).unwrap();
    writeln!(out, "stderr   {:.6}", est.stderr).unwrap();
    let floor = if est.xi_bar > 0.0 && est.xi_bar < est.p_min { " (xi_bar below p_min)" } else { "" };
    writeln!(out, "G        {}{floor}", format_g(est.g_value, &est.budget, cal)).unwrap();
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct MinimizeResult<'a> {
    best_chi: String,
    best_chi_hex: String,
    s: usize,
    #[serde(with = "crate::estimator::g_serde")]
    g_best: f64,
    #[serde(with = "crate::estimator::g_serde")]
    g_start: f64,
    termination: Termination,
    evaluations: usize,
    sweeps: u64,
    config_sha256: String,
    config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<&'a Calibration>,
}

pub fn cmd_minimize(
    config: &RunConfig,
    resume: bool,
    salvage: bool,
    stop: Option<Arc<AtomicBool>>,
) -> Result<Outcome, CliError> {
    let source = config.load_source()?;
    let n = source.num_inputs();
    let search = config.search_config(n)?;
    let estimator = estimator_for(&source, config.estimator_config())?;
    let cal = calibration(config);
    let mut objective = ResistanceObjective::new(estimator);
    if let Some(c) = cal {
        objective = objective.with_calibration(c);
    }
    let fingerprint = config.search_fingerprint(&source);
    if resume && config.output.journal.is_none() {
        return Err(CliError::usage("--resume needs --journal"));
    }
    if let Some(j) = &config.output.journal {
        write_file(&sidecar_path(j), &pretty(&config.to_json()))?;
    }
    let options = RunOptions {
        journal: config.output.journal.as_deref(),
        resume,
        salvage,
        fingerprint: fingerprint.clone(),
        stop,
    };
    let outcome: SearchOutcome = tabu_minimize(&mut objective, n, &search, options).map_err(|e| match e {
        crate::search::SearchError::Objective(_) | crate::search::SearchError::Io(_) => CliError::internal(e),
        _ => CliError::usage(e),
    })?;

    let result = MinimizeResult {
        best_chi: outcome.best.to_bitstring(),
        best_chi_hex: outcome.best.to_hex(),
        s: outcome.best.size(),
        g_best: outcome.g_best,
        g_start: outcome.journal.first().map_or(f64::INFINITY, |r| r.g_value),
        termination: outcome.termination,
        evaluations: outcome.evaluations(),
        sweeps: outcome.sweeps,
        config_sha256: fingerprint,
        config: config.to_json(),
        calibration: cal.as_ref(),
    };
    let mut out = String::new();
    writeln!(out, "best chi {} (s = {} of {n})", result.best_chi, result.s).unwrap();
    writeln!(out, "G_best   {}", format_g(outcome.g_best, &config.budget, cal.as_ref())).unwrap();
    writeln!(out, "G(start) {}", format_g(result.g_start, &config.budget, cal.as_ref())).unwrap();
    writeln!(out, "stopped  {:?} after {} evaluations, {} sweeps", result.termination, result.evaluations, result.sweeps)
        .unwrap();
    if let Some(p) = &config.output.out {
        write_file(p, &pretty(&serde_json::to_value(&result).expect("result serializes")))?;
        writeln!(out, "wrote {}", p.display()).unwrap();
    }
    Ok(Outcome { code: EXIT_OK, stdout: out })
}

#[derive(Serialize)]
struct AttackDocument<'a> {
    config: serde_json::Value,
    /// Where `P̂` came from.
    p_hat_source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    revalidation: Option<EstimateRecord>,
    #[serde(flatten)]
    report: &'a AttackReport,
}

pub fn cmd_attack(config: &RunConfig, chi: &str) -> Result<Outcome, CliError> {
    let source = config.load_source()?;
    let Some(circuit) = &source.circuit else {
        return Err(CliError::usage("attacks need a cipher or netlist, not DIMACS"));
    };
    let b = parse_chi(chi, &source)?;
    if b.size() > config.attack.guess_cap_bits as usize {
        return Err(CliError::usage(AttackError::GuessCap { s: b.size(), cap_bits: config.attack.guess_cap_bits }));
    }

    let (p_hat, p_hat_source, revalidation) = match config.attack.p_hat {
        Some(p) => (p, "given", None),
        None => {
            let est_config = EstimatorConfig {
                sample_size: config.revalidation_samples,
                seed: derive_seed(config.seeds.attack, "revalidation"),
                p_min: 0.0,
                ..config.estimator_config()
            };
            let est = estimator_for(&source, est_config)?.resistance(&b).map_err(CliError::internal)?;
            (est.xi_bar, "estimated", Some(EstimateRecord::from_estimate(&est)))
        }
    };
    let r = match config.attack.r {
        Some(r) => r,
        None => required_outputs(p_hat, config.attack.target)
            .map_err(|e| CliError::usage(format!("{e}; pass --r explicitly")))?
            .exact as usize,
    };
    let instances = generate_instances(circuit, r, derive_seed(config.seeds.attack, "instances"));
    let report = iterated_attack(&source.formula, circuit, &b, &instances, &config.attack_config())
        .map_err(|e| match e {
            AttackError::GuessCap { .. } | AttackError::Mismatch(_) | AttackError::Budget(_) => CliError::usage(e),
            _ => CliError::internal(e),
        })?
        .with_prediction(p_hat);

    let mut out = String::new();
    let pred = report.prediction.as_ref().expect("prediction attached");
    writeln!(out, "chi        {} (s = {})", b.to_bitstring(), b.size()).unwrap();
    writeln!(out, "P_hat      {} ({p_hat_source})", pred.p_hat).unwrap();
    writeln!(out, "r          {r}").unwrap();
    writeln!(out, "predicted  {:.6}", pred.predicted_success).unwrap();
    if report.success {
        let last = report.instances.last().expect("a solved instance");
        let key: String = last.result.alpha.as_ref().expect("solved").iter().map(|&x| if x { '1' } else { '0' }).collect();
        writeln!(
            out,
            "outcome    success on output {} of {r} after {} guesses; key {key} verified",
            last.index + 1,
            report.total_guesses
        )
        .unwrap();
    } else {
        writeln!(out, "outcome    unsuccessful: {} failures, {} guesses", report.failures, report.total_guesses).unwrap();
    }
    let path = config.output.out.clone().unwrap_or_else(|| PathBuf::from("attack_report.json"));
    let doc = AttackDocument { config: config.to_json(), p_hat_source, revalidation, report: &report };
    write_file(&path, &pretty(&serde_json::to_value(&doc).expect("report serializes")))?;
    writeln!(out, "report     {}", path.display()).unwrap();
    Ok(Outcome { code: if report.success { EXIT_OK } else { EXIT_ATTACK_FAILED }, stdout: out })
}

pub fn cmd_supbs_check(config: &RunConfig, chi: &str, samples: u64) -> Result<Outcome, CliError> {
    let source = config.load_source()?;
    let b = parse_chi(chi, &source)?;
    let f = &source.formula;
    let estimator = estimator_for(&source, EstimatorConfig { sample_size: 1, ..config.estimator_config() })?;
    let alpha = sample_input(source.num_inputs(), config.seeds.sample, 0);
    let gamma = estimator.outputs_of(&alpha).map_err(CliError::usage)?;
    let outputs = f.roles().outputs.iter().zip(&gamma).map(|(&v, &x)| (v, x)).collect();
    let report = verify_supbs_with(f, &b, &outputs, samples, config.seeds.sample);
    let mode = match report.mode {
        crate::sat::SupbsMode::Exhaustive => "exhaustive".to_string(),
        crate::sat::SupbsMode::Sampled { samples, seed } => format!("sampled ({samples} guesses, seed {seed})"),
    };
    let mut out = String::new();
    writeln!(out, "chi      {} (s = {})", b.to_bitstring(), b.size()).unwrap();
    writeln!(out, "mode     {mode}, {} guesses checked", report.checked).unwrap();
    writeln!(out, "supbs    {}", report.holds).unwrap();
    if let Some(cex) = &report.counterexample {
        let lits: Vec<String> = b
            .variables(&f.roles().inputs)
            .iter()
            .zip(cex)
            .map(|(&v, &x)| Lit::new(v, x).to_string())
            .collect();
        let guess = if lits.is_empty() { "(no guessed variables)".to_string() } else { lits.join(" ") };
        writeln!(out, "undecided under guess {guess}").unwrap();
    }
    Ok(Outcome { code: EXIT_OK, stdout: out })
}
