//! Monte Carlo risk estimation, convergence-rate fits, paired rule
//! comparisons and embedding-separation experiments.
//!
//! Replicate `r` of a run seeded with `seed` draws its noise from ChaCha8
//! stream `r` of that seed, so results do not depend on how replicates are
//! scheduled across threads. Per-replicate losses are reduced in replicate
//! order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::CoefficientField;
use crate::error::{invalid, Result};
use crate::estimators::Rule;
use crate::noise::{observe_levels, NoiseConfig, Thresholds};
use crate::spaces::{
    besov_stat, make_h_function, tree_weak_besov_stat, weak_besov_stat, HFunctionParams,
};

/// Generator for replicate `replicate` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Default noise grid `2^-4, ..., 2^-9`.
pub fn default_epsilons() -> Vec<f64> {
    (4..=9).map(|i| 2f64.powi(-i)).collect()
}

/// Threshold and cutoff used by the harness. When `lambda_eps >= 1` no detail
/// level survives; the estimator keeps only the scaling part and a warning is
/// returned instead of an error.
pub fn harness_thresholds(config: &NoiseConfig) -> Result<(Thresholds, Option<String>)> {
    let lambda = config.threshold_level();
    if lambda >= 1.0 {
        let warning = format!(
            "lambda = {lambda} >= 1 at epsilon = {}: estimating scaling coefficients only",
            config.epsilon()
        );
        return Ok((Thresholds::with_cutoff(lambda, 0)?, Some(warning)));
    }
    Ok((config.thresholds()?, None))
}

/// `sum (estimate - truth)^2` over the levels the estimate covers.
pub fn detail_loss(estimate: &CoefficientField, truth: &CoefficientField) -> Result<f64> {
    if truth.max_level() < estimate.max_level() {
        return invalid(format!(
            "truth has {} levels, estimate has {}",
            truth.max_level(),
            estimate.max_level()
        ));
    }
    estimate.squared_distance(&truth.resized(estimate.max_level()))
}

/// Squared L2 loss of an estimate padded with zeros above its cutoff:
/// detail loss plus the truth's energy beyond the cutoff.
pub fn replicate_loss(estimate: &CoefficientField, truth: &CoefficientField) -> Result<f64> {
    Ok(detail_loss(estimate, truth)? + truth.tail_energy(estimate.max_level() as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    /// `detail_mean + truncation`.
    pub mean: f64,
    pub stderr: f64,
    pub detail_mean: f64,
    pub truncation: f64,
    pub replicates: usize,
}

fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn summarize(losses: &[f64], truncation: f64) -> RiskEstimate {
    let (detail_mean, stderr) = mean_and_stderr(losses);
    RiskEstimate {
        mean: detail_mean + truncation,
        stderr,
        detail_mean,
        truncation,
        replicates: losses.len(),
    }
}

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates == 0 {
        return invalid("at least one replicate is required");
    }
    Ok(())
}

/// Monte Carlo estimate of `E ||f_hat - f||^2` for a fixed truth.
pub fn mc_risk(
    truth: &CoefficientField,
    rule: Rule,
    config: &NoiseConfig,
    replicates: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    check_replicates(replicates)?;
    let (thresholds, _) = harness_thresholds(config)?;
    mc_risk_at(truth, rule, config.epsilon(), &thresholds, replicates, seed)
}

fn mc_risk_at(
    truth: &CoefficientField,
    rule: Rule,
    epsilon: f64,
    thresholds: &Thresholds,
    replicates: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    let cutoff = thresholds.cutoff();
    let losses = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let y = observe_levels(truth, epsilon, cutoff, &mut replicate_rng(seed, r))?;
            detail_loss(&rule.apply(&y, thresholds)?.estimate, truth)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(&losses, truth.tail_energy(cutoff as i32)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskCurve {
    pub rule: String,
    pub m: f64,
    pub eta: f64,
    pub epsilons: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub j_lambdas: Vec<u32>,
    pub risks: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub detail_risks: Vec<f64>,
    pub truncations: Vec<f64>,
    pub replicates: usize,
    pub warnings: Vec<String>,
}

/// Risk of `rule` along a noise grid; every grid point reuses the replicate
/// streams of `seed`.
pub fn risk_curve(
    truth: &CoefficientField,
    rule: Rule,
    m: f64,
    eta: f64,
    epsilons: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<RiskCurve> {
    check_replicates(replicates)?;
    let mut curve = RiskCurve {
        rule: rule.to_string(),
        m,
        eta,
        epsilons: Vec::new(),
        lambdas: Vec::new(),
        j_lambdas: Vec::new(),
        risks: Vec::new(),
        stderrs: Vec::new(),
        detail_risks: Vec::new(),
        truncations: Vec::new(),
        replicates,
        warnings: Vec::new(),
    };
    for &eps in epsilons {
        let config = NoiseConfig::new(eps, m, eta)?;
        let (th, warning) = harness_thresholds(&config)?;
        curve.warnings.extend(warning);
        let est = mc_risk_at(truth, rule, eps, &th, replicates, seed)?;
        curve.epsilons.push(eps);
        curve.lambdas.push(th.lambda());
        curve.j_lambdas.push(th.cutoff());
        curve.risks.push(est.mean);
        curve.stderrs.push(est.stderr);
        curve.detail_risks.push(est.detail_mean);
        curve.truncations.push(est.truncation);
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Grid indices dropped for non-positive risk.
    pub excluded: Vec<usize>,
}

/// Least-squares fit of `log risk = intercept + slope * log lambda`.
pub fn rate_fit(curve: &RiskCurve) -> Result<RateFit> {
    fit_log_log(&curve.lambdas, &curve.risks)
}

pub fn fit_log_log(lambdas: &[f64], risks: &[f64]) -> Result<RateFit> {
    if lambdas.len() != risks.len() {
        return invalid("lambda and risk arrays differ in length");
    }
    let mut excluded = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, (&l, &r)) in lambdas.iter().zip(risks).enumerate() {
        if r > 0.0 && l > 0.0 {
            xs.push(l.ln());
            ys.push(r.ln());
        } else {
            excluded.push(i);
        }
    }
    if xs.len() < 4 {
        return invalid(format!("rate fit needs 4 positive points, got {}", xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("rate fit needs at least two distinct lambda values");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: xs.len(),
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub epsilon: f64,
    pub lambda_tree: f64,
    pub lambda_hard: f64,
    pub tree: RiskEstimate,
    pub hard: RiskEstimate,
    /// `tree.mean / hard.mean`.
    pub ratio: f64,
    /// Replicates whose tree kept set misses a hard-kept node. Only checked
    /// when both rules share the same threshold.
    pub dominance_violations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub m_tree: f64,
    pub m_hard: f64,
    pub eta: f64,
    pub replicates: usize,
    pub rows: Vec<ComparisonRow>,
    pub warnings: Vec<String>,
}

/// Paired comparison: in every replicate both rules see the same observations.
pub fn compare_rules(
    truth: &CoefficientField,
    epsilons: &[f64],
    eta: f64,
    m_tree: f64,
    m_hard: f64,
    replicates: usize,
    seed: u64,
) -> Result<Comparison> {
    check_replicates(replicates)?;
    let mut out = Comparison {
        m_tree,
        m_hard,
        eta,
        replicates,
        rows: Vec::new(),
        warnings: Vec::new(),
    };
    for &eps in epsilons {
        let (th_tree, w1) = harness_thresholds(&NoiseConfig::new(eps, m_tree, eta)?)?;
        let (th_hard, w2) = harness_thresholds(&NoiseConfig::new(eps, m_hard, eta)?)?;
        out.warnings.extend(w1);
        out.warnings.extend(w2.filter(|_| m_tree != m_hard));
        let matched = th_tree == th_hard;
        let depth = th_tree.cutoff().max(th_hard.cutoff());

        let per_rep = (0..replicates as u64)
            .into_par_iter()
            .map(|r| {
                let y = observe_levels(truth, eps, depth, &mut replicate_rng(seed, r))?;
                let tree = Rule::Tree.apply(&y, &th_tree)?;
                let hard = Rule::Hard.apply(&y, &th_hard)?;
                let dominated = !matched || tree.mask.contains(&hard.mask);
                Ok((
                    detail_loss(&tree.estimate, truth)?,
                    detail_loss(&hard.estimate, truth)?,
                    dominated,
                ))
            })
            .collect::<Result<Vec<(f64, f64, bool)>>>()?;

        let tree_losses: Vec<f64> = per_rep.iter().map(|p| p.0).collect();
        let hard_losses: Vec<f64> = per_rep.iter().map(|p| p.1).collect();
        let tree = summarize(&tree_losses, truth.tail_energy(th_tree.cutoff() as i32));
        let hard = summarize(&hard_losses, truth.tail_energy(th_hard.cutoff() as i32));
        out.rows.push(ComparisonRow {
            epsilon: eps,
            lambda_tree: th_tree.lambda(),
            lambda_hard: th_hard.lambda(),
            ratio: tree.mean / hard.mean,
            tree,
            hard,
            dominance_violations: matched.then(|| per_rep.iter().filter(|p| !p.2).count()),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingRow {
    pub level: u32,
    /// Statistic expected to grow without bound.
    pub growing: f64,
    /// Statistic expected to stay bounded.
    pub bounded: f64,
    /// Ratios to the previous truncation level (absent on the first row).
    pub growing_ratio: Option<f64>,
    pub bounded_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub experiment: String,
    pub growing_statistic: String,
    pub bounded_statistic: String,
    pub witness: [f64; 4],
    pub rows: Vec<EmbeddingRow>,
    pub strictly_increasing: bool,
    pub final_bounded_ratio: f64,
}

fn check_levels(levels: &[u32]) -> Result<()> {
    if levels.len() < 2 || levels.windows(2).any(|w| w[0] >= w[1]) || levels[0] < 1 {
        return invalid("truncation levels must be strictly increasing, at least two, all >= 1");
    }
    Ok(())
}

fn check_smoothness(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return invalid(format!("s must lie in (0, 1), got {s}"));
    }
    Ok(())
}

fn build_report(
    experiment: &str,
    names: (&str, &str),
    params: &HFunctionParams,
    levels: &[u32],
    stat: impl Fn(&CoefficientField) -> Result<(f64, f64)>,
) -> Result<EmbeddingReport> {
    let deepest = make_h_function(&HFunctionParams {
        max_level: *levels.last().unwrap(),
        ..*params
    })?;
    let mut rows: Vec<EmbeddingRow> = Vec::new();
    for &level in levels {
        let (growing, bounded) = stat(&deepest.resized(level))?;
        let prev = rows.last();
        rows.push(EmbeddingRow {
            level,
            growing,
            bounded,
            growing_ratio: prev.map(|p| growing / p.growing),
            bounded_ratio: prev.map(|p| bounded / p.bounded),
        });
    }
    Ok(EmbeddingReport {
        experiment: experiment.to_string(),
        growing_statistic: names.0.to_string(),
        bounded_statistic: names.1.to_string(),
        witness: [params.m as f64, params.alpha, params.alpha1, params.alpha2],
        strictly_increasing: rows.windows(2).all(|w| w[1].growing > w[0].growing),
        final_bounded_ratio: rows.last().and_then(|r| r.bounded_ratio).unwrap_or(f64::NAN),
        rows,
    })
}

/// Weak versus tree-weak separation on `h[1, 1/(eta(1+2s)), 1, 1/(2 eta)]`,
/// both spaces with index `r = 2/(1+2s)`.
pub fn tree_embedding_experiment(
    s: f64,
    eta: f64,
    levels: &[u32],
    lambda_grid: &[f64],
) -> Result<EmbeddingReport> {
    check_smoothness(s)?;
    if !(eta > 1.0) {
        return invalid(format!("eta must exceed 1 for this experiment, got {eta}"));
    }
    check_levels(levels)?;
    let r = 2.0 / (1.0 + 2.0 * s);
    let params = HFunctionParams::tree_separation_witness(s, eta, 1);
    build_report(
        "weak-vs-tree-weak",
        ("weak_besov", "tree_weak_besov"),
        &params,
        levels,
        |f| {
            Ok((
                weak_besov_stat(f, r, lambda_grid)?.sup,
                tree_weak_besov_stat(f, r, eta, lambda_grid)?.sup,
            ))
        },
    )
}

/// Besov smoothness separation across `eta1 < eta2` on
/// `h[0, 1/(eta2(1+2s)), 1/(2 eta2), 1/(2 eta2)]`.
pub fn eta_embedding_experiment(s: f64, eta1: f64, eta2: f64, levels: &[u32]) -> Result<EmbeddingReport> {
    check_smoothness(s)?;
    if !(eta1 >= 1.0 && eta1 < eta2) {
        return invalid(format!("need 1 <= eta1 < eta2, got {eta1}, {eta2}"));
    }
    check_levels(levels)?;
    let u1 = s / (eta1 * (1.0 + 2.0 * s));
    let u2 = s / (eta2 * (1.0 + 2.0 * s));
    let params = HFunctionParams::eta_separation_witness(s, eta2, 1);
    build_report(
        "besov-across-eta",
        ("besov_eta1", "besov_eta2"),
        &params,
        levels,
        |f| Ok((besov_stat(f, u1)?.sup, besov_stat(f, u2)?.sup)),
    )
}
