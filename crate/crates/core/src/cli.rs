//! The `mpshrink` command line.
//!
//! Exit codes: 0 success (converged), 2 update budget exhausted or target
//! not reached, 3 invalid configuration or dimension mismatch, 4 I/O or
//! parse failure, 1 self-test failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::certify::{
    self, accuracy_params_mpcs, accuracy_params_mpvs, before_run_bounds, lambda_for_epsilon,
    staged_lambda, tune_mpvs_eta, Certificate, StagedOutcome,
};
use crate::data::{build_dataset, build_dataset_with_features, parse_dataset, Dataset, RawExample};
use crate::error::{Error, Result};
use crate::model::{evaluate_margin_threaded, Algorithm, Hyperparams, MarginReport, TrainState};
use crate::oracle::exact_gamma_d;
use crate::persist::ModelFile;
use crate::scheduler::{train, Order, RunResult};

/// Environment variable with the default thread count for margin evaluation.
pub const THREADS_ENV: &str = "MPSHRINK_EVAL_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "mpshrink", version, about = "Margin perceptrons with weight shrinking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model and print its certificate.
    Train(TrainArgs),
    /// Evaluate a stored model on a dataset.
    Eval(EvalArgs),
    /// Staged tuning until the certified margin fraction reaches a target.
    Autotune(AutotuneArgs),
    /// Exact maximum directional margin of a (small) dataset.
    Oracle(OracleArgs),
    /// Print the transformed dataset's summary.
    Summary(DataArgs),
    /// Run the built-in consistency checks.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Sparse text dataset (`label index:value ...`).
    pub data: PathBuf,
    /// Bias coordinate value.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Magnitude of the per-example extension coordinate (0 disables it).
    #[arg(long = "delta-ext", default_value_t = 0.0)]
    pub delta_ext: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoArg {
    Mpcs,
    Mpvs,
    Perceptron,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Mpcs => Algorithm::Mpcs,
            AlgoArg::Mpvs => Algorithm::Mpvs,
            AlgoArg::Perceptron => Algorithm::Perceptron,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderArg {
    Seq,
    Shuffle,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

/// `--b`: a positive number or `auto` (= R^2 of the transformed data).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BArg {
    Auto,
    Value(f64),
}

fn parse_b(s: &str) -> std::result::Result<BArg, String> {
    if s == "auto" {
        return Ok(BArg::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(BArg::Value(v)),
        _ => Err(format!("expected a positive number or `auto`, got {s:?}")),
    }
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = AlgoArg::Mpvs)]
    pub algo: AlgoArg,
    /// Learning rate.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Margin threshold, or `auto` for R^2.
    #[arg(long, value_parser = parse_b, default_value = "auto")]
    pub b: BArg,
    /// Shrinking parameter for mpcs.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Accuracy parameter: sets lambda for mpcs (needs --gamma-hat), or
    /// eta and n for mpvs.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Single accuracy parameter for mpcs; sets eta and lambda (needs --gamma-hat).
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Estimate of the maximum margin, for parameter conversion and bounds.
    #[arg(long = "gamma-hat")]
    pub gamma_hat: Option<f64>,
    /// Shrinking exponent for mpvs.
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    /// Multiplicity cap of a multiple update.
    #[arg(long, default_value_t = 1000)]
    pub lup: u64,
    /// Active-set selection slack.
    #[arg(long, default_value_t = 1.01)]
    pub cbar: f64,
    #[arg(long, default_value_t = 5)]
    pub nep1: usize,
    #[arg(long, default_value_t = 5)]
    pub nep2: usize,
    #[arg(long = "no-active-set")]
    pub no_active_set: bool,
    #[arg(long, value_enum, default_value_t = OrderArg::Seq)]
    pub order: OrderArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "max-updates", default_value_t = 100_000_000)]
    pub max_updates: u64,
    /// Reject configurations with eta R^2 / b > 2.
    #[arg(long = "strict-bounds")]
    pub strict_bounds: bool,
    /// Also compute the exact maximum margin (small datasets only).
    #[arg(long = "with-oracle")]
    pub with_oracle: bool,
    #[arg(long = "model-out")]
    pub model_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    #[arg(long = "model-in")]
    pub model_in: PathBuf,
    pub data: PathBuf,
    /// Threads for margin evaluation (default from the environment, else 1).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct AutotuneArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long = "target-f", default_value_t = 0.99)]
    pub target_f: f64,
    #[arg(long = "max-stages", default_value_t = 20)]
    pub max_stages: usize,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Print the optimal direction as `u <index> <value>` lines.
    #[arg(long)]
    pub witness: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SelftestArgs {
    /// Largest shrinking exponent in the exact power-sum checks.
    #[arg(long = "n-max", default_value_t = 10)]
    pub n_max: u32,
    /// Largest update count in the exact power-sum checks.
    #[arg(long = "t-max", default_value_t = 1000)]
    pub t_max: u64,
}

/// Parses arguments, runs the command, prints to stdout/stderr and returns
/// the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli.command) {
        Ok((code, out)) => {
            print!("{out}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Parse { .. } | Error::ModelFormat(_) | Error::EmptyDataset => EXIT_IO,
        Error::NonConvergence { .. } | Error::OracleStalled { .. } => EXIT_BUDGET,
        _ => EXIT_CONFIG,
    }
}

/// Runs a command and returns `(exit code, stdout text)`.
pub fn run(cmd: &Command) -> Result<(i32, String)> {
    match cmd {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Autotune(a) => cmd_autotune(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Summary(a) => {
            let ds = load_dataset(a)?;
            Ok((EXIT_OK, ds.summary()))
        }
        Command::Selftest(a) => Ok(selftest(a)),
    }
}

fn read_examples(path: &Path) -> Result<Vec<RawExample>> {
    parse_dataset(BufReader::new(File::open(path)?))
}

fn load_dataset(a: &DataArgs) -> Result<Dataset> {
    build_dataset(&read_examples(&a.data)?, a.rho, a.delta_ext)
}

/// Hyperparameters from the flags, resolved against the loaded data.
pub fn resolve_hyperparams(a: &TrainArgs, ds: &Dataset) -> Result<Hyperparams> {
    let algo = Algorithm::from(a.algo);
    let r = ds.radius();
    let b = match a.b {
        BArg::Auto => r * r,
        BArg::Value(v) => v,
    };
    let mut hp = Hyperparams {
        eta: a.eta,
        b,
        lambda: a.lambda.unwrap_or(0.0),
        n: a.n,
        lup: a.lup,
        cbar: a.cbar,
        nep1: a.nep1,
        nep2: a.nep2,
        max_updates: a.max_updates,
        rho: a.data.rho,
        delta: a.data.delta_ext,
    };
    let need_gamma = |what: &str| {
        a.gamma_hat.ok_or_else(|| {
            Error::InvalidParams(format!("{what} needs --gamma-hat (an estimate of the maximum margin)"))
        })
    };
    match algo {
        Algorithm::Mpcs => {
            if let Some(z) = a.zeta {
                let (eta, lambda) = accuracy_params_mpcs(z, r, b, need_gamma("--zeta")?)?;
                hp.eta = eta;
                hp.lambda = lambda;
            } else if let Some(e) = a.epsilon {
                hp.lambda = lambda_for_epsilon(e, b, need_gamma("--epsilon")?)?;
            } else if a.lambda.is_none() {
                return Err(Error::InvalidParams(
                    "mpcs needs --lambda, --epsilon or --zeta (or use autotune)".into(),
                ));
            }
        }
        Algorithm::Mpvs => {
            if let Some(e) = a.epsilon {
                let (eta, n) = accuracy_params_mpvs(e, r, b)?;
                hp.eta = eta;
                hp.n = n;
            }
        }
        Algorithm::Perceptron => hp.lambda = 0.0,
    }
    if !(hp.eta > 0.0 && hp.eta.is_finite()) {
        return Err(Error::InvalidParams(format!("eta must be > 0, got {}", hp.eta)));
    }
    if !(hp.lambda >= 0.0) {
        return Err(Error::InvalidParams(format!("lambda must be >= 0, got {}", hp.lambda)));
    }
    if !(hp.cbar >= 1.0) || hp.lup == 0 || hp.nep1 == 0 || hp.nep2 == 0 {
        return Err(Error::InvalidParams(
            "need cbar >= 1 and lup, nep1, nep2 >= 1".into(),
        ));
    }
    let delta_p = hp.eta * r * r / hp.b;
    if a.strict_bounds && delta_p > 2.0 {
        return Err(Error::InvalidParams(format!(
            "eta R^2 / b = {delta_p} exceeds 2 (--strict-bounds)"
        )));
    }
    hp.validate(algo, ds)?;
    Ok(hp)
}

fn order_of(a: &TrainArgs) -> Order {
    match a.order {
        OrderArg::Seq => Order::Sequential,
        OrderArg::Shuffle => Order::Shuffled(a.seed),
    }
}

fn model_file(run: &RunResult, ds: &Dataset, cert: Option<&Certificate>) -> ModelFile {
    let mut extras = Vec::new();
    if run.algo == Algorithm::Mpvs {
        extras.push(("powersum".to_string(), format!("{:.16e}", run.state.powersum)));
    }
    if let Some(c) = cert {
        for line in c.to_key_values().lines() {
            if let Some((k, v)) = line.split_once('=') {
                extras.push((k.to_string(), v.to_string()));
            }
        }
    }
    ModelFile {
        algo: run.algo,
        eta: run.hp.eta,
        b: run.hp.b,
        lambda: run.hp.effective_lambda(run.algo),
        n: run.hp.n,
        t: run.t_c,
        rho: ds.rho(),
        delta: ds.delta(),
        features: ds.features(),
        weights: run.state.weights(),
        extras,
    }
}

/// `(delta_p, epsilon_p)` as far as they are known.
fn accuracy_summary(run: &RunResult, ds: &Dataset, gamma: Option<f64>) -> (f64, Option<f64>) {
    let r = ds.radius();
    let delta_p = run.hp.eta * r * r / run.hp.b;
    let lambda = run.hp.effective_lambda(run.algo);
    let eps = match run.algo {
        Algorithm::Mpvs => Some(1.0 / (f64::from(run.hp.n) + 1.0)),
        _ if lambda == 0.0 => Some(1.0),
        _ => gamma.map(|g| 1.0 - lambda * run.hp.b / (g * g)),
    };
    (delta_p, eps)
}

struct TrainOutcome {
    run: RunResult,
    report: Option<MarginReport>,
    cert: Option<Certificate>,
    gamma_oracle: Option<f64>,
}

fn certify_outcome(run: RunResult, ds: &Dataset, gamma_hat: Option<f64>, with_oracle: bool) -> Result<TrainOutcome> {
    let gamma_oracle = if with_oracle {
        let o = exact_gamma_d(ds)?;
        o.separable.then_some(o.gamma_d)
    } else {
        None
    };
    let (report, cert) = if run.converged && !run.state.is_zero() {
        let (rep, mut cert) = certify::certify_run(&run, ds, gamma_oracle)?;
        if gamma_oracle.is_none() {
            if let Some(g) = gamma_hat.filter(|g| *g > 0.0) {
                let (up, lo, fb) = before_run_bounds(run.algo, &run.hp, ds.radius(), g);
                cert.t_bound_upper = up;
                cert.t_bound_lower = lo;
                cert.f_before = fb;
            }
        }
        (Some(rep), Some(cert))
    } else {
        (None, None)
    };
    Ok(TrainOutcome { run, report, cert, gamma_oracle })
}

const CSV_HEADER: &str = "algo,m,dim,R,eta,b,lambda,n,converged,t_c,gamma_prime,f_after,gamma_d_upper,full_passes,presentations,wall_time_s";

fn csv_row(o: &TrainOutcome, ds: &Dataset) -> String {
    let r = &o.run;
    let (gp, fa, gu) = o
        .report
        .as_ref()
        .map_or((f64::NAN, f64::NAN, f64::NAN), |m| (m.gamma_prime, m.f_after, m.gamma_d_upper));
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.algo,
        ds.len(),
        ds.dim(),
        ds.radius(),
        r.hp.eta,
        r.hp.b,
        r.hp.effective_lambda(r.algo),
        r.hp.n,
        r.converged,
        r.t_c,
        gp,
        fa,
        gu,
        r.full_passes,
        r.presentations,
        r.wall_time.as_secs_f64()
    )
}

fn text_report(o: &TrainOutcome, ds: &Dataset) -> String {
    let r = &o.run;
    let mut s = String::new();
    let _ = writeln!(s, "algo={}", r.algo);
    let _ = writeln!(s, "m={}", ds.len());
    let _ = writeln!(s, "dim={}", ds.dim());
    let _ = writeln!(s, "R={:.17e}", ds.radius());
    let _ = writeln!(s, "eta={:.17e}", r.hp.eta);
    let _ = writeln!(s, "b={:.17e}", r.hp.b);
    match r.algo {
        Algorithm::Mpvs => {
            let _ = writeln!(s, "n={}", r.hp.n);
        }
        algo => {
            let _ = writeln!(s, "lambda={:.17e}", r.hp.effective_lambda(algo));
        }
    }
    let (delta_p, eps) = accuracy_summary(r, ds, o.gamma_oracle);
    let _ = writeln!(s, "delta_p={delta_p:.17e}");
    if let Some(e) = eps {
        let _ = writeln!(s, "epsilon_p={e:.17e}");
    }
    let _ = writeln!(s, "converged={}", r.converged);
    let _ = writeln!(s, "t_c={}", r.t_c);
    if let Some(m) = &o.report {
        let _ = writeln!(s, "gamma_prime={:.17e}", m.gamma_prime);
        let _ = writeln!(s, "norm_w={:.17e}", m.norm_w);
        let _ = writeln!(s, "argmin_pattern={}", m.argmin_index + 1);
        let _ = writeln!(s, "f_after={:.17e}", m.f_after);
        let _ = writeln!(s, "gamma_d_upper={:.17e}", m.gamma_d_upper);
    }
    if let Some(g) = o.gamma_oracle {
        let _ = writeln!(s, "gamma_d_oracle={g:.17e}");
    }
    let _ = writeln!(s, "full_passes={}", r.full_passes);
    let _ = writeln!(s, "presentations={}", r.presentations);
    let _ = writeln!(s, "level1_epochs={}", r.active.level1_epochs);
    let _ = writeln!(s, "level2_epochs={}", r.active.level2_epochs);
    let _ = writeln!(s, "wall_time_s={:.6}", r.wall_time.as_secs_f64());
    if let Some(c) = &o.cert {
        s.push_str(&c.to_key_values());
    }
    s
}

fn render(o: &TrainOutcome, ds: &Dataset, fmt: ReportFormat) -> String {
    match fmt {
        ReportFormat::Text => text_report(o, ds),
        ReportFormat::Csv => format!("{CSV_HEADER}\n{}\n", csv_row(o, ds)),
    }
}

fn cmd_train(a: &TrainArgs) -> Result<(i32, String)> {
    let ds = load_dataset(&a.data)?;
    let hp = resolve_hyperparams(a, &ds)?;
    let algo = Algorithm::from(a.algo);
    let run = train(&ds, &hp, algo, order_of(a), !a.no_active_set)?;
    let outcome = certify_outcome(run, &ds, a.gamma_hat, a.with_oracle)?;
    if let Some(path) = &a.model_out {
        model_file(&outcome.run, &ds, outcome.cert.as_ref()).save(path)?;
    }
    let code = if outcome.run.converged { EXIT_OK } else { EXIT_BUDGET };
    Ok((code, render(&outcome, &ds, a.report)))
}

fn cmd_autotune(a: &AutotuneArgs) -> Result<(i32, String)> {
    let t = &a.train;
    let ds = load_dataset(&t.data)?;
    let algo = Algorithm::from(t.algo);
    if algo == Algorithm::Perceptron {
        return Err(Error::InvalidParams("autotune supports mpcs and mpvs".into()));
    }
    let mut base = t.clone();
    // lambda is driven by the procedure; bypass the "lambda required" rule
    base.lambda = Some(0.0);
    base.zeta = None;
    if algo == Algorithm::Mpcs {
        base.epsilon = None;
    }
    let hp = resolve_hyperparams(&base, &ds)?;
    let order = order_of(t);
    let staged: StagedOutcome = match algo {
        Algorithm::Mpvs => tune_mpvs_eta(&ds, &hp, a.target_f, a.max_stages, order, !t.no_active_set)?,
        _ => staged_lambda(&ds, &hp, a.target_f, a.max_stages, order, !t.no_active_set)?,
    };
    let mut s = String::new();
    for st in &staged.stages {
        let _ = writeln!(
            s,
            "stage={} lambda={:.6e} eta={:.6e} gamma_bar={:.6e} t_c={} gamma_prime={:.6e} f_after={:.6} gamma_d_upper={:.6e} full_passes={}",
            st.stage, st.lambda, st.eta, st.gamma_bar, st.t_c, st.gamma_prime, st.f_after, st.gamma_d_upper, st.full_passes
        );
    }
    let _ = writeln!(s, "reached={}", staged.reached);
    let outcome = certify_outcome(staged.run, &ds, t.gamma_hat, t.with_oracle)?;
    if let Some(path) = &t.model_out {
        model_file(&outcome.run, &ds, outcome.cert.as_ref()).save(path)?;
    }
    s.push_str(&render(&outcome, &ds, t.report));
    Ok((if staged.reached { EXIT_OK } else { EXIT_BUDGET }, s))
}

fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n >= 1)
        .unwrap_or(1)
}

fn cmd_eval(a: &EvalArgs) -> Result<(i32, String)> {
    let model = ModelFile::load(&a.model_in)?;
    let examples = read_examples(&a.data)?;
    if let Some(bad) = examples.iter().map(RawExample::max_index).find(|&i| i > model.features) {
        return Err(Error::DimensionMismatch { model: model.features, data: bad });
    }
    let ds = build_dataset_with_features(&examples, model.rho, model.delta, model.features)?;
    if ds.dim() != model.dim() {
        return Err(Error::DimensionMismatch { model: model.dim(), data: ds.dim() });
    }
    let threads = a.threads.unwrap_or_else(threads_from_env).max(1);
    let (gamma_prime, argmin) = evaluate_margin_threaded(&model.weights, &ds, threads)?;
    let state = TrainState::from_weights(model.weights.clone(), model.t, 0.0);
    let (mut err_pos, mut err_neg, mut pos, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (p, &l) in ds.patterns().iter().zip(ds.labels()) {
        let wrong = state.dot(p) <= 0.0;
        if l > 0 {
            pos += 1;
            err_pos += usize::from(wrong);
        } else {
            neg += 1;
            err_neg += usize::from(wrong);
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "algo={}", model.algo);
    let _ = writeln!(s, "m={}", ds.len());
    let _ = writeln!(s, "dim={}", ds.dim());
    let _ = writeln!(s, "gamma_prime={gamma_prime:.17e}");
    let _ = writeln!(s, "argmin_pattern={}", argmin + 1);
    let _ = writeln!(s, "positives={pos}");
    let _ = writeln!(s, "negatives={neg}");
    let _ = writeln!(s, "errors_positive={err_pos}");
    let _ = writeln!(s, "errors_negative={err_neg}");
    Ok((EXIT_OK, s))
}

fn cmd_oracle(a: &OracleArgs) -> Result<(i32, String)> {
    let ds = load_dataset(&a.data)?;
    let o = exact_gamma_d(&ds)?;
    let mut s = String::new();
    let _ = writeln!(s, "m={}", ds.len());
    let _ = writeln!(s, "dim={}", ds.dim());
    let _ = writeln!(s, "R={:.17e}", ds.radius());
    let _ = writeln!(s, "separable={}", o.separable);
    let _ = writeln!(s, "gamma_d={:.17e}", o.gamma_d);
    let _ = writeln!(s, "gamma_lower={:.17e}", o.gamma_lower);
    let _ = writeln!(s, "gap={:.3e}", o.gap);
    let _ = writeln!(s, "iterations={}", o.iterations);
    let _ = writeln!(s, "support={}", o.support.len());
    if a.witness {
        for (i, u) in o.witness.iter().enumerate() {
            if *u != 0.0 {
                let _ = writeln!(s, "u {} {u:.16e}", i + 1);
            }
        }
    }
    Ok((EXIT_OK, s))
}

fn selftest(a: &SelftestArgs) -> (i32, String) {
    let mut s = String::new();
    let mut all = true;
    let mut line = |name: &str, ok: bool| {
        all &= ok;
        let _ = writeln!(s, "{} {name}", if ok { "pass" } else { "FAIL" });
    };

    let lemmas = (0..=a.n_max).all(|n| certify::lemma_sweep(n, a.t_max).iter().all(|c| c.all_hold()));
    line(&format!("power-sum inequalities n<={} t<={}", a.n_max, a.t_max), lemmas);

    let toy = build_dataset(
        &[RawExample::new(1, vec![(1, 1.0)]), RawExample::new(-1, vec![(1, -1.0)])],
        1.0,
        0.0,
    );
    let toy_ok = toy.as_ref().ok().and_then(|ds| {
        let hp = Hyperparams { eta: 1.0, b: 0.5, n: 0, ..Default::default() };
        let run = train(ds, &hp, Algorithm::Mpvs, Order::Sequential, true).ok()?;
        let (_, cert) = certify::certify_run(&run, ds, None).ok()?;
        Some(run.t_c == 2 && run.state.weights() == vec![2.0, 0.0] && cert.f_after == 1.0)
    });
    line("toy variable-shrinking trace", toy_ok == Some(true));

    let oracle_ok = toy
        .as_ref()
        .ok()
        .and_then(|ds| exact_gamma_d(ds).ok())
        .is_some_and(|o| (o.gamma_d - 1.0).abs() < 1e-12);
    line("oracle on toy set", oracle_ok);

    (if all { EXIT_OK } else { EXIT_SELFTEST }, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_flag() {
        assert_eq!(parse_b("auto"), Ok(BArg::Auto));
        assert_eq!(parse_b("2.5"), Ok(BArg::Value(2.5)));
        assert!(parse_b("-1").is_err());
        assert!(parse_b("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::EmptyDataset), EXIT_IO);
        assert_eq!(exit_code(&Error::InvalidParams(String::new())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::DimensionMismatch { model: 1, data: 2 }), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::NonConvergence { stage: 0, max_updates: 1 }), EXIT_BUDGET);
    }

    #[test]
    fn usage_error_is_config() {
        assert_eq!(main_with_args(["mpshrink", "train"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["mpshrink", "--help"]), EXIT_OK);
    }

    #[test]
    fn selftest_passes() {
        let (code, out) = selftest(&SelftestArgs { n_max: 3, t_max: 50 });
        assert_eq!(code, EXIT_OK, "{out}");
    }
}
