//! Keep-or-kill estimators: hard thresholding and the hard tree rule.
//!
//! Both rules keep the scaling coefficients and a subset of the detail
//! coefficients below the cutoff `j_lambda`. The hard rule keeps exactly the
//! coefficients with `|y_jk| > lambda`. The hard tree rule additionally keeps
//! every ancestor of such a coefficient, which is the same as keeping `(j, k)`
//! whenever some member of its tree scope exceeds `lambda`.

use std::fmt;
use std::str::FromStr;

use crate::coefficients::CoefficientField;
use crate::error::{invalid, Error, Result};
use crate::noise::Thresholds;
use crate::tree::{subtree_maxima, DyadicNode, TreeScope};
use crate::wavelet::WaveletBasis;

/// Largest detail-slot count [`brute_force_argmin`] will enumerate.
pub const MAX_SEARCH_SLOTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Hard,
    Tree,
}

impl Rule {
    pub fn apply(self, y: &CoefficientField, thresholds: &Thresholds) -> Result<EstimateResult> {
        match self {
            Rule::Hard => hard_threshold(y, thresholds),
            Rule::Tree => hard_tree(y, thresholds),
        }
    }

    /// Default threshold constant for this rule.
    pub fn default_m(self, eta: f64) -> f64 {
        match self {
            Rule::Hard => crate::noise::hard_rule_m(eta),
            Rule::Tree => crate::noise::tree_rule_m(eta),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Hard => "hard",
            Rule::Tree => "tree",
        })
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(Rule::Hard),
            "tree" => Ok(Rule::Tree),
            _ => invalid(format!("unknown rule '{s}' (expected hard or tree)")),
        }
    }
}

/// Binary selection `gamma_jk` over detail levels `0..cutoff`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeepMask {
    gamma: Vec<Vec<bool>>,
}

impl KeepMask {
    pub fn none(cutoff: u32) -> Self {
        Self {
            gamma: (0..cutoff).map(|j| vec![false; 1usize << j]).collect(),
        }
    }

    pub fn all(cutoff: u32) -> Self {
        Self {
            gamma: (0..cutoff).map(|j| vec![true; 1usize << j]).collect(),
        }
    }

    pub fn cutoff(&self) -> u32 {
        self.gamma.len() as u32
    }

    /// Total number of detail slots.
    pub fn slots(&self) -> usize {
        (1usize << self.cutoff()) - 1
    }

    pub fn level(&self, j: u32) -> &[bool] {
        &self.gamma[j as usize]
    }

    pub fn is_kept(&self, node: DyadicNode) -> bool {
        self.gamma
            .get(node.level as usize)
            .and_then(|l| l.get(node.position))
            .copied()
            .unwrap_or(false)
    }

    pub fn set(&mut self, node: DyadicNode, keep: bool) {
        self.gamma[node.level as usize][node.position] = keep;
    }

    /// Kept nodes, levels ascending.
    pub fn kept(&self) -> impl Iterator<Item = DyadicNode> + '_ {
        self.gamma.iter().enumerate().flat_map(|(j, level)| {
            level
                .iter()
                .enumerate()
                .filter(|(_, &keep)| keep)
                .map(move |(k, _)| DyadicNode::new(j as u32, k))
        })
    }

    pub fn count(&self) -> usize {
        self.gamma.iter().flatten().filter(|&&b| b).count()
    }

    /// True when every node kept by `other` is kept here.
    pub fn contains(&self, other: &KeepMask) -> bool {
        other.kept().all(|n| self.is_kept(n))
    }

    /// Slots in level-major order, used to enumerate masks as bit patterns.
    fn from_bits(cutoff: u32, bits: u64) -> Self {
        let mut mask = Self::none(cutoff);
        let mut i = 0;
        for level in &mut mask.gamma {
            for g in level.iter_mut() {
                *g = bits >> i & 1 == 1;
                i += 1;
            }
        }
        mask
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub estimate: CoefficientField,
    pub mask: KeepMask,
    pub lambda: f64,
    pub j_lambda: u32,
}

fn check_depth(y: &CoefficientField, cutoff: u32) -> Result<()> {
    if y.max_level() < cutoff {
        return invalid(format!(
            "observations cover {} detail levels, the cutoff needs {cutoff}",
            y.max_level()
        ));
    }
    Ok(())
}

fn finish(y: &CoefficientField, mask: KeepMask, thresholds: &Thresholds) -> Result<EstimateResult> {
    Ok(EstimateResult {
        estimate: apply_mask(y, &mask)?,
        mask,
        lambda: thresholds.lambda(),
        j_lambda: thresholds.cutoff(),
    })
}

/// Keeps `y_jk` iff `|y_jk| > lambda` (strict).
pub fn hard_threshold(y: &CoefficientField, thresholds: &Thresholds) -> Result<EstimateResult> {
    let cutoff = thresholds.cutoff();
    check_depth(y, cutoff)?;
    let lambda = thresholds.lambda();
    let mut mask = KeepMask::none(cutoff);
    for (j, level) in mask.gamma.iter_mut().enumerate() {
        for (g, v) in level.iter_mut().zip(y.level(j as u32)) {
            *g = v.abs() > lambda;
        }
    }
    finish(y, mask, thresholds)
}

/// Hard tree rule: threshold, then complete the kept set with all ancestors.
pub fn hard_tree(y: &CoefficientField, thresholds: &Thresholds) -> Result<EstimateResult> {
    let cutoff = thresholds.cutoff();
    check_depth(y, cutoff)?;
    let lambda = thresholds.lambda();
    let mut mask = KeepMask::none(cutoff);
    // deepest first so that climbing stops at the first already-kept ancestor
    for j in (0..cutoff).rev() {
        for (k, v) in y.level(j).iter().enumerate() {
            if v.abs() <= lambda {
                continue;
            }
            for node in DyadicNode::new(j, k).chain() {
                if mask.is_kept(node) {
                    break;
                }
                mask.set(node, true);
            }
        }
    }
    finish(y, mask, thresholds)
}

/// Hard tree rule evaluated node by node: keep `(j, k)` iff the maximum of
/// `|y|` over its scope exceeds `lambda`. Exponentially slower than
/// [`hard_tree`]; kept as a reference implementation for cross-checks.
pub fn hard_tree_by_scopes(y: &CoefficientField, thresholds: &Thresholds) -> Result<EstimateResult> {
    let cutoff = thresholds.cutoff();
    check_depth(y, cutoff)?;
    let lambda = thresholds.lambda();
    let mut mask = KeepMask::none(cutoff);
    for j in 0..cutoff {
        for k in 0..1usize << j {
            let node = DyadicNode::new(j, k);
            let bar = TreeScope::new(node, cutoff)?.max_abs(y, Some(lambda))?;
            mask.set(node, bar > lambda);
        }
    }
    finish(y, mask, thresholds)
}

/// `gamma_jk * y_jk` on detail levels below the mask cutoff; scaling copied.
pub fn apply_mask(y: &CoefficientField, mask: &KeepMask) -> Result<CoefficientField> {
    check_depth(y, mask.cutoff())?;
    let mut out = y.resized(mask.cutoff());
    for j in 0..mask.cutoff() {
        for (v, &keep) in out.level_mut(j).iter_mut().zip(mask.level(j)) {
            if !keep {
                *v = 0.0;
            }
        }
    }
    Ok(out)
}

/// Per-slot costs `(kill, keep) = (ybar_jk^2, lambda^2)` in level-major order.
fn slot_costs(y: &CoefficientField, thresholds: &Thresholds) -> Result<Vec<(f64, f64)>> {
    check_depth(y, thresholds.cutoff())?;
    let lambda2 = thresholds.lambda() * thresholds.lambda();
    Ok(subtree_maxima(y, thresholds.cutoff())
        .into_iter()
        .flatten()
        .map(|bar| (bar * bar, lambda2))
        .collect())
}

/// `sum (gamma - 1)^2 ybar^2 + gamma^2 lambda^2` over detail slots below the cutoff.
pub fn penalized_cost(mask: &KeepMask, y: &CoefficientField, thresholds: &Thresholds) -> Result<f64> {
    if mask.cutoff() != thresholds.cutoff() {
        return invalid(format!(
            "mask cutoff {} does not match j_lambda {}",
            mask.cutoff(),
            thresholds.cutoff()
        ));
    }
    let costs = slot_costs(y, thresholds)?;
    let keeps = mask.gamma.iter().flatten();
    Ok(costs
        .iter()
        .zip(keeps)
        .map(|(&(kill, keep), &g)| if g { keep } else { kill })
        .sum())
}

/// Exhaustive minimizer of [`penalized_cost`] over all `2^D` masks.
///
/// Test oracle only: refuses instances with more than [`MAX_SEARCH_SLOTS`]
/// detail slots. Returns the first minimizer in enumeration order.
pub fn brute_force_argmin(y: &CoefficientField, thresholds: &Thresholds) -> Result<KeepMask> {
    let cutoff = thresholds.cutoff();
    let slots = (1usize << cutoff) - 1;
    if slots > MAX_SEARCH_SLOTS {
        return invalid(format!(
            "{slots} detail slots exceed the exhaustive-search limit of {MAX_SEARCH_SLOTS}"
        ));
    }
    let costs = slot_costs(y, thresholds)?;
    let mut best = (f64::INFINITY, 0u64);
    for bits in 0..1u64 << slots {
        let cost: f64 = costs
            .iter()
            .enumerate()
            .map(|(i, &(kill, keep))| if bits >> i & 1 == 1 { keep } else { kill })
            .sum();
        if cost < best.0 {
            best = (cost, bits);
        }
    }
    Ok(KeepMask::from_bits(cutoff, best.1))
}

/// Lepski-style reconstruction in the Haar basis on the grid `t_i = i 2^-j_lambda`.
///
/// For each grid point the partial-sum estimators `f_j(t)` are compared level by
/// level: `j` is admissible at `t` when `j = j_lambda` or every increment
/// `|f_{j'+1}(t') - f_{j'}(t')|`, `j <= j' < j_lambda`, `t'` in the dyadic
/// interval of length `2^-j` around `t`, is at most `2^(j'/2) lambda`. The value
/// returned is `f_{j_hat}(t)` for the smallest admissible `j_hat`.
pub fn lepski_haar(
    y: &CoefficientField,
    thresholds: &Thresholds,
    basis: &WaveletBasis,
) -> Result<Vec<f64>> {
    if !basis.is_haar() {
        return Err(Error::Unsupported(format!(
            "Lepski reconstruction needs the Haar basis, got {basis}"
        )));
    }
    let cutoff = thresholds.cutoff();
    check_depth(y, cutoff)?;
    let lambda = thresholds.lambda();
    let n = 1usize << cutoff;

    // Level-j term of the Haar expansion evaluated at grid point i.
    let increment = |j: u32, i: usize| -> f64 {
        let cell = n >> j;
        let k = i / cell;
        let sign = if i % cell < cell / 2 { 1.0 } else { -1.0 };
        2f64.powf(j as f64 / 2.0) * sign * y.level(j)[k]
    };
    let admissible = |j: u32, i: usize| -> bool {
        if j == cutoff {
            return true;
        }
        let cell = n >> j;
        let interval = (i / cell) * cell..(i / cell + 1) * cell;
        (j..cutoff).all(|jp| {
            let bound = 2f64.powf(jp as f64 / 2.0) * lambda;
            interval.clone().all(|ip| increment(jp, ip).abs() <= bound)
        })
    };

    Ok((0..n)
        .map(|i| {
            let j_hat = (0..=cutoff).find(|&j| admissible(j, i)).unwrap_or(cutoff);
            y.scaling()[0] + (0..j_hat).map(|j| increment(j, i)).sum::<f64>()
        })
        .collect())
}
