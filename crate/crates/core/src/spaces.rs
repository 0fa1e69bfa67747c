//! Sequence-space statistics on finite coefficient fields.
//!
//! Every statistic here is a supremum of a quadratic form over a grid of
//! thresholds `lambda` or truncation levels `J`. A finite field belongs to all
//! of these spaces; what carries information is how the supremum behaves
//! along a family of fields truncated at increasing depth.
//!
//! Levels missing from a field count as zero coefficients.

use crate::coefficients::CoefficientField;
use crate::error::{invalid, Error, Result};
use crate::noise::max_scale;
use crate::tree::subtree_maxima;

/// A statistic sampled on an ascending grid, with its supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceStatistic {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub sup: f64,
}

impl SpaceStatistic {
    fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let sup = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
        let (grid, values) = pairs.into_iter().unzip();
        Self { grid, values, sup }
    }

    /// Running maximum of `values` along the grid.
    pub fn running_sup(&self) -> Vec<f64> {
        self.values
            .iter()
            .scan(0.0f64, |acc, &v| {
                *acc = acc.max(v);
                Some(*acc)
            })
            .collect()
    }
}

/// Geometric threshold grid `lambda0 * 2^(-i/4)`, `i = 0..count`.
pub fn lambda_grid(lambda0: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lambda0 * 2f64.powf(-(i as f64) / 4.0))
        .collect()
}

/// Default grid: `lambda0 = 1/2`, 60 points.
pub fn default_lambda_grid() -> Vec<f64> {
    lambda_grid(0.5, 60)
}

fn check_grid(grid: &[f64], upper: Option<f64>) -> Result<()> {
    if grid.is_empty() {
        return invalid("empty lambda grid");
    }
    for &l in grid {
        if !(l > 0.0) || upper.is_some_and(|u| l >= u) {
            return invalid(format!("grid value {l} out of range"));
        }
    }
    Ok(())
}

/// `sup_{J >= 0} 2^(2Js) sum_{j >= J} sum_k beta_jk^2`, sampled at `J = 0..=max_level`.
pub fn besov_stat(field: &CoefficientField, s: f64) -> Result<SpaceStatistic> {
    if !(s > 0.0) {
        return invalid(format!("s must be positive, got {s}"));
    }
    let pairs = (0..=field.max_level() as i32)
        .map(|j| (j as f64, 2f64.powf(2.0 * j as f64 * s) * field.tail_energy(j)))
        .collect();
    Ok(SpaceStatistic::from_pairs(pairs))
}

/// `sup_{J >= 1} J^-1 2^(2Ju) sum_{j >= J} sum_k beta_jk^2`.
///
/// The `J^-1` weight is read as `max(J, 1)^-1` and the supremum starts at
/// `J = 1`, where the weight is well defined.
pub fn hybrid_besov_stat(field: &CoefficientField, u: f64) -> Result<SpaceStatistic> {
    if !(u > 0.0) {
        return invalid(format!("u must be positive, got {u}"));
    }
    let pairs = (1..=field.max_level().max(1) as i32)
        .map(|j| {
            let weight = 2f64.powf(2.0 * j as f64 * u) / j.max(1) as f64;
            (j as f64, weight * field.tail_energy(j))
        })
        .collect();
    Ok(SpaceStatistic::from_pairs(pairs))
}

/// `sum_{j < below_level} sum_k beta_jk^2 1{|beta_jk| <= threshold}` over detail levels.
pub fn weak_summand(field: &CoefficientField, threshold: f64, below_level: Option<u32>) -> f64 {
    let top = below_level.map_or(field.max_level(), |b| b.min(field.max_level()));
    let mut total = 0.0;
    for j in 0..top {
        for &v in field.level(j) {
            if v.abs() <= threshold {
                total += v * v;
            }
        }
    }
    total
}

/// `sup_lambda lambda^(r-2) sum_{j >= 0} sum_k beta_jk^2 1{|beta_jk| <= lambda}`.
pub fn weak_besov_stat(field: &CoefficientField, r: f64, lambda_grid: &[f64]) -> Result<SpaceStatistic> {
    if !(r > 0.0 && r < 2.0) {
        return invalid(format!("r must lie in (0, 2), got {r}"));
    }
    check_grid(lambda_grid, None)?;
    let pairs = lambda_grid
        .iter()
        .map(|&l| (l, l.powf(r - 2.0) * weak_summand(field, l, None)))
        .collect();
    Ok(SpaceStatistic::from_pairs(pairs))
}

/// Tree summand at `lambda`: `sum_{j < j_lambda} sum_k beta_jk^2` over nodes whose
/// whole scope satisfies `|beta| <= lambda / 2`.
pub fn tree_weak_summand(field: &CoefficientField, lambda: f64, eta: f64) -> Result<f64> {
    let cutoff = max_scale(lambda, eta)?.min(field.max_level());
    let maxima = subtree_maxima(field, cutoff);
    let mut total = 0.0;
    for j in 0..cutoff {
        for (&v, &bar) in field.level(j).iter().zip(&maxima[j as usize]) {
            if bar <= lambda / 2.0 {
                total += v * v;
            }
        }
    }
    Ok(total)
}

/// `sup_lambda lambda^(r-2)` times the tree summand.
pub fn tree_weak_besov_stat(
    field: &CoefficientField,
    r: f64,
    eta: f64,
    lambda_grid: &[f64],
) -> Result<SpaceStatistic> {
    if !(r > 0.0 && r < 2.0) {
        return invalid(format!("r must lie in (0, 2), got {r}"));
    }
    check_grid(lambda_grid, Some(1.0))?;
    let pairs = lambda_grid
        .iter()
        .map(|&l| Ok((l, l.powf(r - 2.0) * tree_weak_summand(field, l, eta)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpaceStatistic::from_pairs(pairs))
}

/// Number of nodes below `j_lambda` whose scope holds a coefficient with
/// `|beta| > lambda / 2`.
pub fn sparsity_count(field: &CoefficientField, lambda: f64, eta: f64) -> Result<u64> {
    let cutoff = max_scale(lambda, eta)?.min(field.max_level());
    Ok(subtree_maxima(field, cutoff)
        .iter()
        .flatten()
        .filter(|&&bar| bar > lambda / 2.0)
        .count() as u64)
}

/// Parameters of the `h[m, alpha, alpha1, alpha2]` coefficient family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HFunctionParams {
    pub m: u32,
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Detail levels `0..max_level` are populated.
    pub max_level: u32,
}

impl HFunctionParams {
    /// Witness separating the weak and tree-weak spaces:
    /// `h[1, 1/(eta(1+2s)), 1, 1/(2 eta)]`.
    pub fn tree_separation_witness(s: f64, eta: f64, max_level: u32) -> Self {
        Self {
            m: 1,
            alpha: 1.0 / (eta * (1.0 + 2.0 * s)),
            alpha1: 1.0,
            alpha2: 1.0 / (2.0 * eta),
            max_level,
        }
    }

    /// Witness separating Besov smoothness across `eta`:
    /// `h[0, 1/(eta2(1+2s)), 1/(2 eta2), 1/(2 eta2)]`.
    pub fn eta_separation_witness(s: f64, eta2: f64, max_level: u32) -> Self {
        let a = 1.0 / (2.0 * eta2);
        Self {
            m: 0,
            alpha: 1.0 / (eta2 * (1.0 + 2.0 * s)),
            alpha1: a,
            alpha2: a,
            max_level,
        }
    }

    /// `n_j = min(floor((m j + 1) 2^(j alpha)), 2^j)`.
    pub fn count(&self, j: u32) -> usize {
        let raw = ((self.m as f64 * j as f64 + 1.0) * 2f64.powf(j as f64 * self.alpha)).floor();
        let cap = (1usize << j) as f64;
        raw.min(cap) as usize
    }

    /// `2^(-alpha1 j)` on even levels, `2^(-alpha2 j)` on odd levels.
    pub fn magnitude(&self, j: u32) -> f64 {
        let a = if j % 2 == 0 { self.alpha1 } else { self.alpha2 };
        2f64.powf(-a * j as f64)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return invalid(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.alpha1 > 0.0 && self.alpha2 > 0.0) {
            return invalid("alpha1 and alpha2 must be positive");
        }
        if self.max_level < 1 {
            return invalid("max_level must be at least 1");
        }
        Ok(())
    }
}

/// Builds the `h` coefficient field with a deterministic, top-down placement.
///
/// Level 0 uses the leftmost `n_0` slots. At level `j+1` every nonzero parent
/// first gets its left child, then right children are added left to right,
/// then any remaining count goes to the leftmost free slots. Fails when
/// `n_{j+1} < n_j`, since not every nonzero parent could keep a nonzero child.
pub fn make_h_function(params: &HFunctionParams) -> Result<CoefficientField> {
    params.validate()?;
    let mut field = CoefficientField::zeros(params.max_level);
    let mut parents: Vec<usize> = (0..params.count(0)).collect();
    for j in 0..params.max_level {
        let n = params.count(j);
        let support = if j == 0 {
            parents.clone()
        } else {
            place_children(&parents, n, 1usize << j).map_err(|need| {
                Error::Construction(format!(
                    "level {j} holds {n} nonzeros but {need} nonzero parents each need a child"
                ))
            })?
        };
        let mag = params.magnitude(j);
        let level = field.level_mut(j);
        for &k in &support {
            level[k] = mag;
        }
        parents = support;
    }
    Ok(field)
}

fn place_children(parents: &[usize], n: usize, width: usize) -> std::result::Result<Vec<usize>, usize> {
    if n < parents.len() {
        return Err(parents.len());
    }
    let mut taken = vec![false; width];
    let mut out = Vec::with_capacity(n);
    let mut take = |k: usize, out: &mut Vec<usize>| {
        if out.len() < n && !taken[k] {
            taken[k] = true;
            out.push(k);
        }
    };
    for &p in parents {
        take(2 * p, &mut out);
    }
    for &p in parents {
        take(2 * p + 1, &mut out);
    }
    for k in 0..width {
        take(k, &mut out);
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{DyadicNode, TreeScope};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(levels: u32, scale: f64, rng: &mut ChaCha8Rng) -> CoefficientField {
        let mut f = CoefficientField::zeros(levels);
        f.scaling_mut()[0] = rng.gen_range(-1.0..1.0);
        for j in 0..levels {
            for v in f.level_mut(j) {
                *v = scale * rng.gen_range(-1.0..1.0);
            }
        }
        f
    }

    #[test]
    fn besov_examples() {
        assert_eq!(besov_stat(&CoefficientField::zeros(4), 0.5).unwrap().sup, 0.0);

        let mut single = CoefficientField::zeros(3);
        single.level_mut(0)[0] = 1.0;
        let st = besov_stat(&single, 0.5).unwrap();
        assert_eq!(st.sup, 1.0);
        assert_eq!(st.values[0], 1.0);

        let mut geo = CoefficientField::zeros(10);
        for j in 0..10 {
            geo.level_mut(j)[0] = 2f64.powi(-(j as i32));
        }
        let st = besov_stat(&geo, 0.5).unwrap();
        assert_eq!(st.grid.len(), 11);
        for (jj, v) in st.grid.iter().zip(&st.values) {
            let j = *jj as i32;
            let expected = 4.0 / 3.0 * 2f64.powi(-j) * (1.0 - 4f64.powi(j - 10));
            assert!((v - expected).abs() < 1e-14, "J={j}: {v} vs {expected}");
        }
        assert_eq!(st.sup, st.values[0]);
        assert!(besov_stat(&geo, 0.0).is_err());
    }

    #[test]
    fn weak_besov_examples() {
        let grid = [0.25, 0.5, 1.0, 2.0];
        assert_eq!(weak_besov_stat(&CoefficientField::zeros(3), 1.0, &grid).unwrap().sup, 0.0);

        let mut one = CoefficientField::zeros(2);
        one.level_mut(1)[0] = 1.0;
        assert_eq!(weak_besov_stat(&one, 1.0, &grid).unwrap().sup, 1.0);

        let mut two = CoefficientField::zeros(2);
        two.level_mut(0)[0] = 0.5;
        two.level_mut(1)[1] = 0.25;
        let st = weak_besov_stat(&two, 1.0, &[0.5]).unwrap();
        assert!((st.values[0] - 0.625).abs() < 1e-15);

        assert!(weak_besov_stat(&two, 2.0, &grid).is_err());
        assert!(weak_besov_stat(&two, 1.0, &[]).is_err());
        assert!(weak_besov_stat(&two, 1.0, &[-0.1]).is_err());
    }

    #[test]
    fn tree_weak_examples() {
        let grid = default_lambda_grid();
        assert_eq!(
            tree_weak_besov_stat(&CoefficientField::zeros(5), 1.0, 1.0, &grid).unwrap().sup,
            0.0
        );

        let mut f = CoefficientField::zeros(2);
        f.level_mut(0)[0] = 0.4;
        f.level_mut(1).copy_from_slice(&[0.05, 0.05]);
        let st = tree_weak_besov_stat(&f, 1.0, 1.0, &[0.5]).unwrap();
        assert!((st.values[0] - 0.01).abs() < 1e-15);
        assert!(tree_weak_besov_stat(&f, 1.0, 1.0, &[1.0]).is_err());
    }

    #[test]
    fn tree_summand_bounded_by_weak_summand() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let grid = default_lambda_grid();
        for _ in 0..50 {
            let f = random_field(9, 0.3, &mut rng);
            for &l in &grid {
                let cutoff = max_scale(l, 1.0).unwrap();
                let tree = tree_weak_summand(&f, l, 1.0).unwrap();
                assert!(tree <= weak_summand(&f, l / 2.0, Some(cutoff)));
                assert!(tree <= weak_summand(&f, l / 2.0, None));
            }
        }
    }

    #[test]
    fn hybrid_examples() {
        assert_eq!(hybrid_besov_stat(&CoefficientField::zeros(4), 0.5).unwrap().sup, 0.0);
        let mut f = CoefficientField::zeros(3);
        f.level_mut(1)[0] = 1.0;
        let st = hybrid_besov_stat(&f, 0.5).unwrap();
        assert_eq!(st.grid[0], 1.0);
        assert_eq!(st.values[0], 2.0);
    }

    #[test]
    fn sparsity_examples() {
        assert_eq!(sparsity_count(&CoefficientField::zeros(5), 0.3, 1.0).unwrap(), 0);
        let mut f = CoefficientField::zeros(5);
        f.level_mut(2)[3] = 1.0;
        assert_eq!(max_scale(0.3, 1.0).unwrap(), 4);
        assert_eq!(sparsity_count(&f, 0.3, 1.0).unwrap(), 3);
    }

    #[test]
    fn sparsity_count_matches_ancestor_union() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let f = random_field(7, 0.4, &mut rng);
            let lambda = rng.gen_range(0.1..0.9);
            let cutoff = max_scale(lambda, 1.0).unwrap().min(7);
            let mut union = std::collections::BTreeSet::new();
            for j in 0..cutoff {
                for (k, v) in f.level(j).iter().enumerate() {
                    if v.abs() > lambda / 2.0 {
                        union.extend(DyadicNode::new(j, k).chain());
                    }
                }
            }
            assert_eq!(sparsity_count(&f, lambda, 1.0).unwrap(), union.len() as u64);
        }
    }

    #[test]
    fn sparsity_non_increasing_at_fixed_cutoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        // lambda in [2^-1.5, 2^-1) keeps j_lambda = 3 for eta = 1
        let lambdas: Vec<f64> = (0..10).map(|i| 0.36 + 0.0135 * i as f64).collect();
        for _ in 0..100 {
            let f = random_field(6, 0.3, &mut rng);
            let counts: Vec<u64> = lambdas.iter().map(|&l| sparsity_count(&f, l, 1.0).unwrap()).collect();
            assert!(lambdas.iter().all(|&l| max_scale(l, 1.0).unwrap() == 3));
            assert!(counts.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn h_counts_with_tiny_alpha_give_a_chain() {
        let p = HFunctionParams { m: 0, alpha: 0.01, alpha1: 1.0, alpha2: 0.5, max_level: 6 };
        let h = make_h_function(&p).unwrap();
        for j in 0..6 {
            assert_eq!(p.count(j), 1);
            let nz: Vec<usize> = (0..1usize << j).filter(|&k| h.level(j)[k] != 0.0).collect();
            assert_eq!(nz, vec![0]);
            assert_eq!(h.level(j)[0], p.magnitude(j));
        }
        assert_eq!(p.magnitude(2), 0.25);
        assert_eq!(p.magnitude(3), 2f64.powf(-1.5));
    }

    #[test]
    fn witness_parameters() {
        let w = HFunctionParams::tree_separation_witness(0.5, 2.0, 10);
        assert_eq!((w.m, w.alpha, w.alpha1, w.alpha2), (1, 0.25, 1.0, 0.25));
        let v = HFunctionParams::eta_separation_witness(0.5, 2.0, 10);
        assert_eq!((v.m, v.alpha, v.alpha1, v.alpha2), (0, 0.25, 0.25, 0.25));
    }

    #[test]
    fn h_function_invalid_params() {
        let mut p = HFunctionParams::tree_separation_witness(0.5, 2.0, 0);
        assert!(make_h_function(&p).is_err());
        p.max_level = 4;
        p.alpha = 1.5;
        assert!(make_h_function(&p).is_err());
    }

    #[test]
    fn shrinking_counts_are_infeasible() {
        let parents = [0usize, 1, 2];
        assert_eq!(place_children(&parents, 2, 8), Err(3));
        assert_eq!(place_children(&parents, 4, 8).unwrap(), vec![0, 1, 2, 4]);
        assert_eq!(place_children(&parents, 8, 8).unwrap(), (0..8).collect::<Vec<_>>());
        assert_eq!(place_children(&[3], 3, 8).unwrap(), vec![0, 6, 7]);
    }

    #[test]
    fn h_function_structure() {
        for p in [
            HFunctionParams::tree_separation_witness(0.5, 2.0, 14),
            HFunctionParams::tree_separation_witness(0.3, 1.5, 12),
            HFunctionParams::eta_separation_witness(0.5, 2.0, 14),
            HFunctionParams { m: 0, alpha: 1.0, alpha1: 1.0, alpha2: 1.0, max_level: 10 },
        ] {
            let h = make_h_function(&p).unwrap();
            for j in 0..p.max_level {
                let nz: Vec<usize> = (0..1usize << j).filter(|&k| h.level(j)[k] != 0.0).collect();
                assert_eq!(nz.len(), p.count(j));
                assert!(nz.iter().all(|&k| h.level(j)[k] == p.magnitude(j)));
                if j + 1 < p.max_level {
                    let next = h.level(j + 1);
                    assert!(nz.iter().all(|&k| next[2 * k] != 0.0 || next[2 * k + 1] != 0.0));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn statistics_scale_quadratically(seed in any::<u64>(), c in 0.1f64..4.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_field(7, 0.3, &mut rng);
            let g = f.scaled(c);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1e-300);
            let b1 = besov_stat(&f, 0.7).unwrap();
            let b2 = besov_stat(&g, 0.7).unwrap();
            for (x, y) in b1.values.iter().zip(&b2.values) {
                prop_assert!(close(x * c * c, *y));
            }
            let h1 = hybrid_besov_stat(&f, 0.4).unwrap();
            let h2 = hybrid_besov_stat(&g, 0.4).unwrap();
            for (x, y) in h1.values.iter().zip(&h2.values) {
                prop_assert!(close(x * c * c, *y));
            }
            // lambda-indexed statistics: scale the grid with the field
            let grid: Vec<f64> = lambda_grid(0.2, 20);
            let scaled: Vec<f64> = grid.iter().map(|l| l * c).collect();
            let w1 = weak_besov_stat(&f, 1.0, &grid).unwrap();
            let w2 = weak_besov_stat(&g, 1.0, &scaled).unwrap();
            for (x, y) in w1.values.iter().zip(&w2.values) {
                prop_assert!((x * c - y).abs() <= 1e-12 * x.abs().max(1e-300));
            }
        }

        #[test]
        fn tree_indicator_matches_scope_quantifier(seed in any::<u64>(), lambda in 0.05f64..0.95) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_field(8, 0.4, &mut rng);
            let cutoff = max_scale(lambda, 1.0).unwrap().min(8);
            let mut explicit = 0.0;
            for j in 0..cutoff {
                for k in 0..1usize << j {
                    let s = TreeScope::new(DyadicNode::new(j, k), cutoff).unwrap();
                    if s.members().all(|n| f.level(n.level)[n.position].abs() <= lambda / 2.0) {
                        explicit += f.level(j)[k] * f.level(j)[k];
                    }
                }
            }
            prop_assert_eq!(tree_weak_summand(&f, lambda, 1.0).unwrap(), explicit);
        }
    }
}
