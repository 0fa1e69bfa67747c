//! Dyadic index trees and tree-maximum statistics.
//!
//! Node `(j, k)` has children `(j+1, 2k)` and `(j+1, 2k+1)` for every basis.
//! The scope rooted at `(j, k)` with cutoff `j_lambda` is the complete binary
//! subtree of levels `j..j_lambda`. Scopes grow like `2^(j_lambda - j)`, so
//! they are walked lazily and never materialized.

use std::ops::Range;

use crate::coefficients::CoefficientField;
use crate::error::{invalid, Result};
use crate::noise::max_scale;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicNode {
    pub level: u32,
    pub position: usize,
}

impl DyadicNode {
    pub fn new(level: u32, position: usize) -> Self {
        debug_assert!(position < 1usize << level);
        Self { level, position }
    }

    pub fn children(&self) -> [DyadicNode; 2] {
        [
            Self::new(self.level + 1, 2 * self.position),
            Self::new(self.level + 1, 2 * self.position + 1),
        ]
    }

    pub fn parent(&self) -> Option<DyadicNode> {
        (self.level > 0).then(|| Self::new(self.level - 1, self.position / 2))
    }

    /// The node itself followed by its parent chain up to level 0.
    pub fn chain(&self) -> impl Iterator<Item = DyadicNode> {
        std::iter::successors(Some(*self), DyadicNode::parent)
    }

    /// Positions covered by this node's subtree at `level >= self.level`.
    pub fn span_at(&self, level: u32) -> Range<usize> {
        let shift = level - self.level;
        (self.position << shift)..((self.position + 1) << shift)
    }

    pub fn is_ancestor_of(&self, other: &DyadicNode) -> bool {
        other.level >= self.level && other.position >> (other.level - self.level) == self.position
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeScope {
    root: DyadicNode,
    cutoff: u32,
}

impl TreeScope {
    pub fn new(root: DyadicNode, cutoff: u32) -> Result<Self> {
        if root.level >= cutoff {
            return invalid(format!(
                "root level {} is not below the cutoff {cutoff}",
                root.level
            ));
        }
        Ok(Self { root, cutoff })
    }

    pub fn root(&self) -> DyadicNode {
        self.root
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn levels(&self) -> Range<u32> {
        self.root.level..self.cutoff
    }

    /// Member positions at `level`, or an empty range outside the scope.
    pub fn positions_at(&self, level: u32) -> Range<usize> {
        if self.levels().contains(&level) {
            self.root.span_at(level)
        } else {
            0..0
        }
    }

    pub fn contains(&self, node: &DyadicNode) -> bool {
        node.level < self.cutoff && self.root.is_ancestor_of(node)
    }

    pub fn len(&self) -> usize {
        (1usize << (self.cutoff - self.root.level)) - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Members level by level, positions ascending.
    pub fn members(&self) -> impl Iterator<Item = DyadicNode> + '_ {
        self.levels().flat_map(move |level| {
            self.root
                .span_at(level)
                .map(move |position| DyadicNode::new(level, position))
        })
    }

    /// Largest `|value|` over the scope. With `stop_above = Some(b)` the walk
    /// returns as soon as a value exceeding `b` is seen.
    pub fn max_abs(&self, field: &CoefficientField, stop_above: Option<f64>) -> Result<f64> {
        if field.max_level() < self.cutoff {
            return invalid(format!(
                "field has {} levels, scope needs {}",
                field.max_level(),
                self.cutoff
            ));
        }
        let mut best = 0.0f64;
        for level in self.levels() {
            for &v in &field.level(level)[self.root.span_at(level)] {
                best = best.max(v.abs());
                if stop_above.is_some_and(|b| best > b) {
                    return Ok(best);
                }
            }
        }
        Ok(best)
    }
}

/// `T_jk(lambda)` for the cutoff `j_lambda = max_scale(lambda, eta)`.
pub fn scope(root: DyadicNode, lambda: f64, eta: f64) -> Result<TreeScope> {
    TreeScope::new(root, max_scale(lambda, eta)?)
}

/// Every `(j', k')` whose scope contains `node`: the parent chain up to level 0.
pub fn ancestors(node: DyadicNode, lambda: f64, eta: f64) -> Result<Vec<DyadicNode>> {
    let cutoff = max_scale(lambda, eta)?;
    if node.level >= cutoff {
        return invalid(format!("node level {} is not below the cutoff {cutoff}", node.level));
    }
    Ok(node.chain().collect())
}

/// `max |field_{j'k'}|` over the scope of `root`.
pub fn tree_max(field: &CoefficientField, root: DyadicNode, lambda: f64, eta: f64) -> Result<f64> {
    scope(root, lambda, eta)?.max_abs(field, None)
}

/// Tree maxima of every node below `cutoff`, computed bottom-up.
///
/// Entry `[j][k]` equals `max |field|` over the scope of `(j, k)`. Levels at or
/// beyond `field.max_level()` are treated as zero.
pub fn subtree_maxima(field: &CoefficientField, cutoff: u32) -> Vec<Vec<f64>> {
    let stored = cutoff.min(field.max_level());
    let mut maxima: Vec<Vec<f64>> = (0..cutoff)
        .map(|j| {
            if j < stored {
                field.level(j).iter().map(|v| v.abs()).collect()
            } else {
                vec![0.0; 1usize << j]
            }
        })
        .collect();
    for j in (1..stored as usize).rev() {
        let (upper, lower) = maxima.split_at_mut(j);
        let parents = &mut upper[j - 1];
        for (k, pair) in lower[0].chunks_exact(2).enumerate() {
            parents[k] = parents[k].max(pair[0]).max(pair[1]);
        }
    }
    maxima
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scope_examples() {
        let s = scope(DyadicNode::new(0, 0), 0.5, 1.0).unwrap();
        let members: Vec<_> = s.members().collect();
        assert_eq!(
            members,
            vec![DyadicNode::new(0, 0), DyadicNode::new(1, 0), DyadicNode::new(1, 1)]
        );
        assert_eq!(s.len(), 3);

        let leaf = scope(DyadicNode::new(1, 1), 0.5, 1.0).unwrap();
        assert_eq!(leaf.members().collect::<Vec<_>>(), vec![DyadicNode::new(1, 1)]);

        assert!(scope(DyadicNode::new(2, 0), 0.5, 1.0).is_err());
    }

    #[test]
    fn member_counts_and_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let lambda: f64 = rng.gen_range(0.01..0.99);
            let eta: f64 = rng.gen_range(1.0..2.5);
            let cutoff = max_scale(lambda, eta).unwrap();
            if cutoff > 14 {
                continue;
            }
            let level = rng.gen_range(0..cutoff);
            let root = DyadicNode::new(level, rng.gen_range(0..1usize << level));
            let s = scope(root, lambda, eta).unwrap();
            assert!(s.contains(&root));
            for l in s.levels() {
                let at: Vec<_> = s.members().filter(|m| m.level == l).collect();
                assert_eq!(at.len(), 1usize << (l - level));
                let r = s.positions_at(l);
                assert_eq!(r.start, root.position << (l - level));
                assert_eq!(r.end, (root.position + 1) << (l - level));
                assert!(at.iter().map(|m| m.position).eq(r));
            }
            assert_eq!(s.members().count(), s.len());
        }
    }

    #[test]
    fn ancestor_examples() {
        let a = ancestors(DyadicNode::new(2, 3), 0.3, 1.0).unwrap();
        assert_eq!(
            a,
            vec![DyadicNode::new(2, 3), DyadicNode::new(1, 1), DyadicNode::new(0, 0)]
        );
        assert_eq!(
            ancestors(DyadicNode::new(0, 0), 0.5, 1.0).unwrap(),
            vec![DyadicNode::new(0, 0)]
        );
        assert!(ancestors(DyadicNode::new(2, 0), 0.5, 1.0).is_err());
    }

    #[test]
    fn ancestors_scope_duality() {
        let (lambda, eta) = (0.3, 1.0); // cutoff 4
        let cutoff = max_scale(lambda, eta).unwrap();
        let nodes: Vec<DyadicNode> = (0..cutoff)
            .flat_map(|j| (0..1usize << j).map(move |k| DyadicNode::new(j, k)))
            .collect();
        for n in &nodes {
            let anc = ancestors(*n, lambda, eta).unwrap();
            for a in &nodes {
                let in_scope = scope(*a, lambda, eta).unwrap().contains(n);
                assert_eq!(in_scope, anc.contains(a), "a={a:?} n={n:?}");
            }
        }
    }

    #[test]
    fn tree_max_examples() {
        let root = DyadicNode::new(0, 0);
        assert_eq!(tree_max(&CoefficientField::zeros(3), root, 0.5, 1.0).unwrap(), 0.0);

        let mut single = CoefficientField::zeros(8);
        single.level_mut(0)[0] = -0.3;
        for lambda in [0.9, 0.5, 0.2, 0.1] {
            assert_eq!(tree_max(&single, root, lambda, 1.0).unwrap(), 0.3);
        }

        let mut f = CoefficientField::zeros(2);
        f.level_mut(0)[0] = 0.1;
        f.level_mut(1).copy_from_slice(&[0.8, 0.2]);
        assert_eq!(tree_max(&f, root, 0.5, 1.0).unwrap(), 0.8);

        // scope needs levels up to 3 but the field stops at 2
        assert!(tree_max(&f, root, 0.3, 1.0).is_err());
    }

    #[test]
    fn early_exit_reports_a_value_above_the_bound() {
        let mut f = CoefficientField::zeros(6);
        f.level_mut(2)[0] = 0.9;
        f.level_mut(5)[3] = 2.0;
        let s = TreeScope::new(DyadicNode::new(0, 0), 6).unwrap();
        assert_eq!(s.max_abs(&f, None).unwrap(), 2.0);
        let early = s.max_abs(&f, Some(0.5)).unwrap();
        assert!(early > 0.5);
        assert_eq!(s.max_abs(&f, Some(5.0)).unwrap(), 2.0);
    }

    fn random_field(levels: u32, rng: &mut ChaCha8Rng) -> CoefficientField {
        let mut f = CoefficientField::zeros(levels);
        for j in 0..levels {
            for v in f.level_mut(j) {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        f
    }

    #[test]
    fn subtree_maxima_match_scope_walks() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for cutoff in 1..8 {
            let f = random_field(cutoff, &mut rng);
            let maxima = subtree_maxima(&f, cutoff);
            for j in 0..cutoff {
                for k in 0..1usize << j {
                    let s = TreeScope::new(DyadicNode::new(j, k), cutoff).unwrap();
                    assert_eq!(maxima[j as usize][k], s.max_abs(&f, None).unwrap());
                }
            }
        }
    }

    proptest! {
        #[test]
        fn tree_max_decreases_in_lambda(seed in any::<u64>(), level in 0u32..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_field(10, &mut rng);
            let root = DyadicNode::new(level, rng.gen_range(0..1usize << level));
            let mut lambdas: Vec<f64> = (0..12).map(|_| rng.gen_range(0.2..0.99)).collect();
            lambdas.sort_by(f64::total_cmp);
            let vals: Vec<f64> = lambdas
                .iter()
                .filter(|&&l| max_scale(l, 1.0).unwrap() > level)
                .map(|&l| tree_max(&f, root, l, 1.0).unwrap())
                .collect();
            for w in vals.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
        }

        #[test]
        fn tree_max_indicator_matches_quantifier(seed in any::<u64>(), half_lambda in 0.05f64..0.45) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lambda = 2.0 * half_lambda;
            let cutoff = max_scale(lambda, 1.0).unwrap().min(9);
            let f = random_field(cutoff, &mut rng).scaled(0.6);
            for j in 0..cutoff {
                for k in 0..1usize << j {
                    let s = TreeScope::new(DyadicNode::new(j, k), cutoff).unwrap();
                    let bar = s.max_abs(&f, None).unwrap();
                    let all_small = s.members().all(|n| f.level(n.level)[n.position].abs() <= lambda / 2.0);
                    let any_big = s.members().any(|n| f.level(n.level)[n.position].abs() > lambda / 2.0);
                    prop_assert_eq!(bar <= lambda / 2.0, all_small);
                    prop_assert_eq!(bar > lambda / 2.0, any_big);
                }
            }
        }
    }
}
