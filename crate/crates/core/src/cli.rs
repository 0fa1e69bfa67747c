//! Command-line front end.
//!
//! Every option can also be given in a flat `key = value` file passed with
//! `--config`; keys are the long flag names. Precedence is flag, then the
//! `HARDTREE_OUT` environment variable (output directory only), then the
//! config file, then the built-in default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::coefficients::CoefficientField;
use crate::error::{invalid, Error, Result};
use crate::estimators::Rule;
use crate::io;
use crate::noise::{max_scale, observe_levels, tree_rule_m, NoiseConfig, Thresholds};
use crate::risk::{self, default_epsilons, harness_thresholds, replicate_rng};
use crate::spaces::{self, lambda_grid, HFunctionParams};
use crate::wavelet::{analyze, synthesize, WaveletBasis};

pub const OUT_ENV: &str = "HARDTREE_OUT";

const DEFAULT_EPSILON: f64 = 0.015625;
const DEFAULT_REPLICATES: usize = 200;

/// Config keys accepted by at least one command.
const KNOWN_KEYS: &[&str] = &[
    "out", "seed", "basis", "epsilon", "m", "eta", "lambda", "rule", "input", "truth", "stat", "s",
    "r", "u", "lambda-grid", "alpha", "alpha1", "alpha2", "levels", "epsilons", "replicates",
    "m-tree", "m-hard", "matched-m", "experiment", "eta1", "eta2",
];

#[derive(Debug, Parser)]
#[command(name = "hardtree", version, about = "Tree-structured hard thresholding of wavelet coefficients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Threshold a coefficient CSV or a raw sample file.
    Denoise(DenoiseArgs),
    /// Draw one noisy observation of a truth coefficient CSV.
    Simulate(SimulateArgs),
    /// Evaluate a sequence-space statistic of a coefficient CSV.
    Spaces(SpacesArgs),
    /// Write the coefficients of an h-function.
    Hfun(HfunArgs),
    /// Monte Carlo risk along a noise grid, with a log-log rate fit.
    RiskCurve(RiskCurveArgs),
    /// Paired comparison of the hard and hard tree rules.
    Compare(CompareArgs),
    /// Embedding separation experiments on the h-function witnesses.
    Embeddings(EmbeddingsArgs),
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// key = value file mirroring the long flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: .]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct NoiseArgs {
    /// Noise level [default: 0.015625]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Threshold constant [default: 4 sqrt(3 eta) for tree, 4 sqrt(2 eta) for hard]
    #[arg(long)]
    pub m: Option<f64>,
    /// Cutoff exponent [default: 1]
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Coefficient CSV or whitespace separated samples
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// hard or tree [default: tree]
    #[arg(long)]
    pub rule: Option<Rule>,
    /// haar or dbN, used for sample input [default: haar]
    #[arg(long)]
    pub basis: Option<WaveletBasis>,
    /// Threshold given directly instead of through epsilon and m
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Truth coefficient CSV; adds the squared L2 loss to the summary
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Truth coefficient CSV
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Rule whose default m sets the observed depth [default: tree]
    #[arg(long)]
    pub rule: Option<Rule>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SpacesArgs {
    /// Coefficient CSV
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// besov, weak, treeweak, hybrid or count [default: besov]
    #[arg(long)]
    pub stat: Option<String>,
    /// Smoothness for besov [default: 0.5]
    #[arg(long)]
    pub s: Option<f64>,
    /// Index for weak and treeweak [default: 2/(1+2s)]
    #[arg(long)]
    pub r: Option<f64>,
    /// Exponent for hybrid [default: s]
    #[arg(long)]
    pub u: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub eta: Option<f64>,
    /// lambda0,count for the grid lambda0 * 2^(-i/4) [default: 0.5,60]
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct HfunArgs {
    /// Count polynomial degree [default: 1]
    #[arg(long)]
    pub m: Option<u32>,
    /// [default: 0.25]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Even-level magnitude exponent [default: 1]
    #[arg(long)]
    pub alpha1: Option<f64>,
    /// Odd-level magnitude exponent [default: 0.25]
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Number of detail levels [default: 16]
    #[arg(long)]
    pub levels: Option<u32>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RiskCurveArgs {
    /// Truth coefficient CSV
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// [default: tree]
    #[arg(long)]
    pub rule: Option<Rule>,
    /// Comma separated noise levels [default: 2^-4,...,2^-9]
    #[arg(long)]
    pub epsilons: Option<String>,
    /// [default: 200]
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Threshold constant [default: rule default]
    #[arg(long)]
    pub m: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub eta: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Truth coefficient CSV
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Comma separated noise levels [default: 2^-4,...,2^-9]
    #[arg(long)]
    pub epsilons: Option<String>,
    /// [default: 200]
    #[arg(long)]
    pub replicates: Option<usize>,
    /// [default: 4 sqrt(3 eta)]
    #[arg(long)]
    pub m_tree: Option<f64>,
    /// [default: 4 sqrt(2 eta)]
    #[arg(long)]
    pub m_hard: Option<f64>,
    /// Use the tree constant for both rules
    #[arg(long)]
    pub matched_m: bool,
    /// [default: 1]
    #[arg(long)]
    pub eta: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EmbeddingsArgs {
    /// tree (weak vs tree-weak) or eta (Besov across eta) [default: tree]
    #[arg(long)]
    pub experiment: Option<String>,
    /// [default: 0.5]
    #[arg(long)]
    pub s: Option<f64>,
    /// For the tree experiment [default: 2]
    #[arg(long)]
    pub eta: Option<f64>,
    /// For the eta experiment [default: 1]
    #[arg(long)]
    pub eta1: Option<f64>,
    /// For the eta experiment [default: 2]
    #[arg(long)]
    pub eta2: Option<f64>,
    /// Comma separated truncation levels [default: 8,...,16]
    #[arg(long)]
    pub levels: Option<String>,
    /// lambda0,count [default: 0.5,60]
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

/// Files written and warnings raised by a command.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Resolved options for one command: flag, then config file, then default.
struct Settings {
    config: BTreeMap<String, String>,
    out: PathBuf,
    seed: u64,
}

impl Settings {
    fn load(common: &Common, env_out: Option<PathBuf>) -> Result<Self> {
        let config = match &common.config {
            Some(p) => io::parse_config(&read(p)?)?,
            None => BTreeMap::new(),
        };
        if let Some(k) = config.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return invalid(format!("unknown config key '{k}'"));
        }
        let mut s = Self {
            config,
            out: PathBuf::from("."),
            seed: 0,
        };
        s.out = match (&common.out, env_out) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => p,
            (None, None) => s.pick("out", None)?.unwrap_or_else(|| PathBuf::from(".")),
        };
        s.seed = s.pick("seed", common.seed)?.unwrap_or(0);
        Ok(s)
    }

    fn pick<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::Parse(format!("config key '{key}': {e}"))),
            None => Ok(None),
        }
    }

    fn or<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.pick(key, flag)?.unwrap_or(default))
    }

    fn path(&self, key: &str, flag: &Option<PathBuf>) -> Result<PathBuf> {
        self.pick(key, flag.clone())?
            .ok_or_else(|| Error::InvalidArgument(format!("--{key} is required")))
    }

    fn write(&self, outcome: &mut Outcome, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out.join(name);
        io::write_atomic(&path, bytes)?;
        outcome.written.push(path);
        Ok(())
    }

    fn write_json(&self, outcome: &mut Outcome, name: &str, value: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(outcome, name, &bytes)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn read_field(path: &Path) -> Result<CoefficientField> {
    io::coefficients_from_csv(&read(path)?)
}

fn parse_list<T>(text: &str, what: &str) -> Result<Vec<T>>
where
    T: FromStr,
{
    text.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad {what} entry '{t}'"))))
        .collect()
}

fn parse_lambda_grid(text: &str) -> Result<Vec<f64>> {
    let Some((l0, n)) = text.split_once(',') else {
        return invalid(format!("lambda grid '{text}' must be lambda0,count"));
    };
    let l0: f64 = l0.trim().parse().map_err(|_| Error::Parse(format!("bad lambda0 '{l0}'")))?;
    let n: usize = n.trim().parse().map_err(|_| Error::Parse(format!("bad grid count '{n}'")))?;
    if !(l0 > 0.0) || n == 0 {
        return invalid("lambda grid needs lambda0 > 0 and count >= 1");
    }
    Ok(lambda_grid(l0, n))
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn f(v: f64) -> String {
    io::fmt_f64(v)
}

fn opt(v: Option<f64>) -> String {
    v.map(f).unwrap_or_default()
}

/// Runs a parsed command. `env_out` is the value of the output-directory
/// environment variable, if set.
pub fn run(cli: Cli, env_out: Option<PathBuf>) -> Result<Outcome> {
    match cli.command {
        Command::Denoise(a) => denoise(a, env_out),
        Command::Simulate(a) => simulate(a, env_out),
        Command::Spaces(a) => spaces_cmd(a, env_out),
        Command::Hfun(a) => hfun(a, env_out),
        Command::RiskCurve(a) => risk_curve(a, env_out),
        Command::Compare(a) => compare(a, env_out),
        Command::Embeddings(a) => embeddings(a, env_out),
    }
}

fn noise_thresholds(s: &Settings, noise: &NoiseArgs, rule: Rule) -> Result<(NoiseConfig, Thresholds, Option<String>)> {
    let eta = s.or("eta", noise.eta, 1.0)?;
    let m = s.or("m", noise.m, rule.default_m(eta))?;
    let epsilon = s.or("epsilon", noise.epsilon, DEFAULT_EPSILON)?;
    let config = NoiseConfig::new(epsilon, m, eta)?;
    let (th, warning) = harness_thresholds(&config)?;
    Ok((config, th, warning))
}

fn denoise(a: DenoiseArgs, env_out: Option<PathBuf>) -> Result<Outcome> {
    let s = Settings::load(&a.common, env_out)?;
    let mut outcome = Outcome::default();
    let rule = s.or("rule", a.rule, Rule::Tree)?;
    let basis = s.or("basis", a.basis, WaveletBasis::haar())?;
    let input = s.path("input", &a.input)?;
    let text = read(&input)?;
    let samples = !io::looks_like_coefficients(&text);
    let y = if samples {
        analyze(&io::samples_from_text(&text)?, &basis)?
    } else {
        io::coefficients_from_csv(&text)?
    };

    let eta = s.or("eta", a.noise.eta, 1.0)?;
    let th = match s.pick("lambda", a.lambda)? {
        Some(lambda) if lambda >= 1.0 => {
            outcome
                .warnings
                .push(format!("lambda = {lambda} >= 1: estimating scaling coefficients only"));
            Thresholds::with_cutoff(lambda, 0)?
        }
        Some(lambda) => Thresholds::with_cutoff(lambda, max_scale(lambda, eta)?)?,
        None => {
            let (_, th, warning) = noise_thresholds(&s, &a.noise, rule)?;
            outcome.warnings.extend(warning);
            th
        }
    };
    let result = rule.apply(&y, &th)?;
    s.write(&mut outcome, "estimate.csv", &io::coefficients_to_csv(&result.estimate)?)?;
    s.write(&mut outcome, "mask.csv", &io::mask_to_csv(&result.mask)?)?;
    if samples {
        let padded = result.estimate.resized(y.max_level());
        s.write(&mut outcome, "estimate_samples.txt", &io::samples_to_text(&synthesize(&padded, &basis)))?;
    }
    let loss = match s.pick::<PathBuf>("truth", a.truth.clone())? {
        Some(p) => Some(risk::replicate_loss(&result.estimate, &read_field(&p)?)?),
        None => None,
    };
    let summary = json!({
        "rule": rule.to_string(),
        "lambda": th.lambda(),
        "j_lambda": th.cutoff(),
        "kept": result.mask.count(),
        "loss": loss,
    });
    s.write_json(&mut outcome, "denoise.json", &summary)?;
    Ok(outcome)
}

fn simulate(a: SimulateArgs, env_out: Option<PathBuf>) -> Result<Outcome> {
    let s = Settings::load(&a.common, env_out)?;
    let mut outcome = Outcome::default();
    let rule = s.or("rule", a.rule, Rule::Tree)?;
    let truth = read_field(&s.path("truth", &a.truth)?)?;
    let (config, th, warning) = noise_thresholds(&s, &a.noise, rule)?;
    outcome.warnings.extend(warning);
    let y = observe_levels(&truth, config.epsilon(), th.cutoff(), &mut replicate_rng(s.seed, 0))?;
    s.write(&mut outcome, "observations.csv", &io::coefficients_to_csv(&y)?)?;
    let summary = json!({
        "epsilon": config.epsilon(),
        "m": config.m(),
        "eta": config.eta(),
        "lambda": th.lambda(),
        "j_lambda": th.cutoff(),
        "seed": s.seed,
    });
    s.write_json(&mut outcome, "simulate.json", &summary)?;
    Ok(outcome)
}

fn spaces_cmd(a: SpacesArgs, env_out: Option<PathBuf>) -> Result<Outcome> {
    let st = Settings::load(&a.common, env_out)?;
    let mut outcome = Outcome::default();
    let field = read_field(&st.path("input", &a.input)?)?;
    let stat = st.or("stat", a.stat.clone(), "besov".to_string())?;
    let s = st.or("s", a.s, 0.5)?;
    let r = st.or("r", a.r, 2.0 / (1.0 + 2.0 * s))?;
    let u = st.or("u", a.u, s)?;
    let eta = st.or("eta", a.eta, 1.0)?;
    let grid = parse_lambda_grid(&st.or("lambda-grid", a.lambda_grid.clone(), "0.5,60".to_string())?)?;

    let result = match stat.as_str() {
        "besov" => spaces::besov_stat(&field, s)?,
        "hybrid" => spaces::hybrid_besov_stat(&field, u)?,
        "weak" => spaces::weak_besov_stat(&field, r, &grid)?,
        "treeweak" => spaces::tree_weak_besov_stat(&field, r, eta, &grid)?,
        "count" => {
            let values = grid
                .iter()
                .map(|&l| spaces::sparsity_count(&field, l, eta).map(|c| c as f64))
                .collect::<Result<Vec<f64>>>()?;
            let sup = values.iter().copied().fold(0.0, f64::max);
            spaces::SpaceStatistic { grid: grid.clone(), values, sup }
        }
        other => return invalid(format!("unknown statistic '{other}'")),
    };
    let rows = result.grid.iter().zip(&result.values).map(|(g, v)| vec![f(*g), f(*v)]).collect();
    st.write(&mut outcome, "spaces.csv", &csv_bytes(&["grid", "value"], rows)?)?;
    let summary = json!({ "stat": stat, "s": s, "r": r, "u": u, "eta": eta, "sup": result.sup });
    st.write_json(&mut outcome, "spaces.json", &summary)?;
    Ok(outcome)
}

fn hfun(a: HfunArgs, env_out: Option<PathBuf>) -> Result<Outcome> {
    let s = Settings::load(&a.common, env_out)?;
    let mut outcome = Outcome::default();
    let params = HFunctionParams {
        m: s.or("m", a.m, 1)?,
        alpha: s.or("alpha", a.alpha, 0.25)?,
        alpha1: s.or("alpha1", a.alpha1, 1.0)?,
        alpha2: s.or("alpha2", a.alpha2, 0.25)?,
        max_level: s.or("levels", a.levels, 16)?,
    };
    let field = spaces::make_h_function(&params)?;
    s.write(&mut outcome, "hfun.csv", &io::coefficients_to_csv(&field)?)?;
    Ok(outcome)
}

fn epsilon_grid(s: &Settings, flag: &Option<String>) -> Result<Vec<f64>> {
    match s.pick::<String>("epsilons", flag.clone())? {
        Some(text) => parse_list(&text, "epsilon"),
        None => Ok(default_epsilons()),
    }
}

fn risk_curve(a: RiskCurveArgs, env_out: Option<PathBuf>) -> Result<Outcome> {
    let s = Settings::load(&a.common, env_out)?;
    let mut outcome = Outcome::default();
    let truth = read_field(&s.path("truth", &a.truth)?)?;
    let rule = s.or("rule", a.rule, Rule::Tree)?;
    let eta = s.or("eta", a.eta, 1.0)?;
    let m = s.or("m", a.m, rule.default_m(eta))?;
    let epsilons = epsilon_grid(&s, &a.epsilons)?;
    let replicates = s.or("replicates", a.replicates, DEFAULT_REPLICATES)?;

    let curve = risk::risk_curve(&truth, rule, m, eta, &epsilons, replicates, s.seed)?;
    outcome.warnings.extend(curve.warnings.iter().cloned());
    let rows = (0..curve.epsilons.len())
        .map(|i| {
            vec![
                f(curve.epsilons[i]),
                f(curve.lambdas[i]),
                curve.j_lambdas[i].to_string(),
                f(curve.risks[i]),
                f(curve.stderrs[i]),
                f(curve.detail_risks[i]),
                f(curve.truncations[i]),
            ]
        })
        .collect();
    let header = ["epsilon", "lambda", "j_lambda", "risk", "stderr", "detail_risk", "truncation"];
    s.write(&mut outcome, "risk_curve.csv", &csv_bytes(&header, rows)?)?;

    let fit = risk::rate_fit(&curve);
    if let Ok(fit) = &fit {
        if !fit.excluded.is_empty() {
            outcome
                .warnings
                .push(format!("rate fit excluded {} non-positive risk points", fit.excluded.len()));
        }
    }
    let summary = json!({
        "curve": curve,
        "fit": fit.as_ref().ok(),
        "fit_error": fit.as_ref().err().map(|e| e.to_string()),
        "seed": s.seed,
    });
    s.write_json(&mut outcome, "risk_curve.json", &summary)?;
    Ok(outcome)
}

fn compare(a: CompareArgs, env_out: Option<PathBuf>) -> Result<Outcome> {
    let s = Settings::load(&a.common, env_out)?;
    let mut outcome = Outcome::default();
    let truth = read_field(&s.path("truth", &a.truth)?)?;
    let eta = s.or("eta", a.eta, 1.0)?;
    let matched = a.matched_m || s.or("matched-m", None, false)?;
    let m_tree = s.or("m-tree", a.m_tree, tree_rule_m(eta))?;
    let m_hard = if matched {
        m_tree
    } else {
        s.or("m-hard", a.m_hard, Rule::Hard.default_m(eta))?
    };
    let epsilons = epsilon_grid(&s, &a.epsilons)?;
    let replicates = s.or("replicates", a.replicates, DEFAULT_REPLICATES)?;

    let cmp = risk::compare_rules(&truth, &epsilons, eta, m_tree, m_hard, replicates, s.seed)?;
    outcome.warnings.extend(cmp.warnings.iter().cloned());
    let rows = cmp
        .rows
        .iter()
        .map(|r| {
            vec![
                f(r.epsilon),
                f(r.lambda_tree),
                f(r.lambda_hard),
                f(r.tree.mean),
                f(r.tree.stderr),
                f(r.hard.mean),
                f(r.hard.stderr),
                f(r.ratio),
                r.dominance_violations.map(|v| v.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    let header = [
        "epsilon", "lambda_tree", "lambda_hard", "risk_tree", "stderr_tree", "risk_hard", "stderr_hard",
        "ratio", "dominance_violations",
    ];
    s.write(&mut outcome, "compare.csv", &csv_bytes(&header, rows)?)?;

    let slope = |pick: fn(&risk::ComparisonRow) -> (f64, f64)| {
        let (l, r): (Vec<f64>, Vec<f64>) = cmp.rows.iter().map(pick).unzip();
        risk::fit_log_log(&l, &r).ok()
    };
    let summary = json!({
        "comparison": cmp,
        "fit_tree": slope(|r| (r.lambda_tree, r.tree.mean)),
        "fit_hard": slope(|r| (r.lambda_hard, r.hard.mean)),
        "seed": s.seed,
    });
    s.write_json(&mut outcome, "compare.json", &summary)?;
    Ok(outcome)
}

fn embeddings(a: EmbeddingsArgs, env_out: Option<PathBuf>) -> Result<Outcome> {
    let st = Settings::load(&a.common, env_out)?;
    let mut outcome = Outcome::default();
    let experiment = st.or("experiment", a.experiment.clone(), "tree".to_string())?;
    let s = st.or("s", a.s, 0.5)?;
    let levels: Vec<u32> = match st.pick::<String>("levels", a.levels.clone())? {
        Some(text) => parse_list(&text, "level")?,
        None => (8..=16).collect(),
    };
    let report = match experiment.as_str() {
        "tree" => {
            let eta = st.or("eta", a.eta, 2.0)?;
            let grid = parse_lambda_grid(&st.or("lambda-grid", a.lambda_grid.clone(), "0.5,60".to_string())?)?;
            risk::tree_embedding_experiment(s, eta, &levels, &grid)?
        }
        "eta" => {
            let eta1 = st.or("eta1", a.eta1, 1.0)?;
            let eta2 = st.or("eta2", a.eta2, 2.0)?;
            risk::eta_embedding_experiment(s, eta1, eta2, &levels)?
        }
        other => return invalid(format!("unknown experiment '{other}' (expected tree or eta)")),
    };
    let rows = report
        .rows
        .iter()
        .map(|r| vec![r.level.to_string(), f(r.growing), f(r.bounded), opt(r.growing_ratio), opt(r.bounded_ratio)])
        .collect();
    let header = ["level", "growing", "bounded", "growing_ratio", "bounded_ratio"];
    st.write(&mut outcome, "embeddings.csv", &csv_bytes(&header, rows)?)?;
    st.write_json(&mut outcome, "embeddings.json", &report)?;
    Ok(outcome)
}
