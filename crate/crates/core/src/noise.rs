//! Gaussian white-noise observation model and threshold bookkeeping.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::coefficients::CoefficientField;
use crate::error::{invalid, Result};

/// Smallest threshold constant allowed for the hard tree rule, `4 sqrt(3 eta)`.
pub fn tree_rule_m(eta: f64) -> f64 {
    4.0 * (3.0 * eta).sqrt()
}

/// Smallest threshold constant allowed for the hard thresholding rule, `4 sqrt(2 eta)`.
pub fn hard_rule_m(eta: f64) -> f64 {
    4.0 * (2.0 * eta).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    epsilon: f64,
    m: f64,
    eta: f64,
}

impl NoiseConfig {
    pub fn new(epsilon: f64, m: f64, eta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return invalid(format!("epsilon must lie in (0, 1/2), got {epsilon}"));
        }
        if !(m > 0.0 && m.is_finite()) {
            return invalid(format!("m must be positive, got {m}"));
        }
        if !(eta >= 1.0 && eta.is_finite()) {
            return invalid(format!("eta must be >= 1, got {eta}"));
        }
        Ok(Self { epsilon, m, eta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `lambda_eps = m * eps * sqrt(ln(1/eps))`.
    pub fn threshold_level(&self) -> f64 {
        self.m * self.epsilon * (1.0 / self.epsilon).ln().sqrt()
    }

    /// Threshold and cutoff scale for this configuration. Fails when
    /// `lambda_eps >= 1`, which leaves no detail level to estimate.
    pub fn thresholds(&self) -> Result<Thresholds> {
        Thresholds::new(self.threshold_level(), self.eta)
    }
}

/// Threshold `lambda` together with the cutoff scale `j_lambda` it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    lambda: f64,
    cutoff: u32,
}

impl Thresholds {
    pub fn new(lambda: f64, eta: f64) -> Result<Self> {
        Ok(Self {
            lambda,
            cutoff: max_scale(lambda, eta)?,
        })
    }

    /// Threshold with an explicitly chosen cutoff.
    pub fn with_cutoff(lambda: f64, cutoff: u32) -> Result<Self> {
        if !(lambda > 0.0) {
            return invalid(format!("lambda must be positive, got {lambda}"));
        }
        Ok(Self { lambda, cutoff })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `j_lambda`: detail levels `0..cutoff` are estimated.
    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }
}

/// The integer `j` with `2^-j <= lambda^(2 eta) < 2^(1-j)`, i.e. the smallest
/// `j` such that `2^j >= lambda^(-2 eta)`.
pub fn max_scale(lambda: f64, eta: f64) -> Result<u32> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return invalid(format!("lambda must lie in (0, 1), got {lambda}"));
    }
    if !(eta >= 1.0 && eta.is_finite()) {
        return invalid(format!("eta must be >= 1, got {eta}"));
    }
    let target = lambda.powf(2.0 * eta);
    if target <= f64::MIN_POSITIVE {
        return invalid(format!("lambda^(2 eta) underflows for lambda={lambda}, eta={eta}"));
    }
    let mut j = (-target.log2()).ceil().max(1.0) as i32;
    while pow2(-j) > target {
        j += 1;
    }
    while j > 1 && pow2(1 - j) <= target {
        j -= 1;
    }
    Ok(j as u32)
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Draws `y_jk = beta_jk + eps Z_jk` for every level below the cutoff of `config`.
///
/// Noise is drawn level by level, positions ascending, so a deeper draw from
/// the same generator state extends a shallower one.
pub fn observe<R: Rng + ?Sized>(
    truth: &CoefficientField,
    config: &NoiseConfig,
    rng: &mut R,
) -> Result<CoefficientField> {
    let cutoff = config.thresholds()?.cutoff();
    observe_levels(truth, config.epsilon(), cutoff, rng)
}

/// Noisy observation of levels `-1..levels` of `truth` with noise level `epsilon`.
pub fn observe_levels<R: Rng + ?Sized>(
    truth: &CoefficientField,
    epsilon: f64,
    levels: u32,
    rng: &mut R,
) -> Result<CoefficientField> {
    if truth.max_level() < levels {
        return invalid(format!(
            "truth resolves {} levels but the cutoff needs {levels}",
            truth.max_level()
        ));
    }
    let mut y = truth.resized(levels);
    for v in y.scaling_mut() {
        *v += epsilon * rng.sample::<f64, _>(StandardNormal);
    }
    for j in 0..levels {
        for v in y.level_mut(j) {
            *v += epsilon * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(y)
}
