//! Doubly-indexed wavelet coefficient arrays.
//!
//! A [`CoefficientField`] stores the scaling coefficients at level `-1` and
//! the detail coefficients at levels `0..max_level`. Under the periodized
//! convention level `j >= 0` carries exactly `2^j` coefficients and level
//! `-1` carries a single scaling coefficient.

use std::ops::Sub;

use crate::error::{invalid, Result};

/// Number of scaling coefficients at level -1.
pub const SCALING_SLOTS: usize = 1;

/// Number of coefficients stored at `level`.
pub fn slots(level: i32) -> usize {
    if level < 0 {
        SCALING_SLOTS
    } else {
        1usize << level
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoefIndex {
    pub level: i32,
    pub position: usize,
}

impl CoefIndex {
    pub fn new(level: i32, position: usize) -> Self {
        Self { level, position }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    scaling: Vec<f64>,
    details: Vec<Vec<f64>>,
}

impl CoefficientField {
    /// All-zero field with levels `-1..max_level`.
    pub fn zeros(max_level: u32) -> Self {
        Self {
            scaling: vec![0.0; SCALING_SLOTS],
            details: (0..max_level).map(|j| vec![0.0; 1usize << j]).collect(),
        }
    }

    /// Builds a field from explicit per-level arrays, checking the layout.
    pub fn from_levels(scaling: Vec<f64>, details: Vec<Vec<f64>>) -> Result<Self> {
        if scaling.len() != SCALING_SLOTS {
            return invalid(format!(
                "level -1 must hold {SCALING_SLOTS} coefficient(s), got {}",
                scaling.len()
            ));
        }
        for (j, level) in details.iter().enumerate() {
            if level.len() != 1usize << j {
                return invalid(format!(
                    "level {j} must hold {} coefficients, got {}",
                    1usize << j,
                    level.len()
                ));
            }
        }
        Ok(Self { scaling, details })
    }

    /// Number of detail levels; coefficients exist for levels `-1..max_level`.
    pub fn max_level(&self) -> u32 {
        self.details.len() as u32
    }

    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }

    pub fn scaling_mut(&mut self) -> &mut [f64] {
        &mut self.scaling
    }

    /// Detail coefficients at level `j`. Panics if the level is not stored.
    pub fn level(&self, j: u32) -> &[f64] {
        &self.details[j as usize]
    }

    pub fn level_mut(&mut self, j: u32) -> &mut [f64] {
        &mut self.details[j as usize]
    }

    pub fn details(&self) -> &[Vec<f64>] {
        &self.details
    }

    pub fn get(&self, index: CoefIndex) -> Option<f64> {
        if index.level < 0 {
            self.scaling.get(index.position).copied()
        } else {
            self.details
                .get(index.level as usize)
                .and_then(|l| l.get(index.position))
                .copied()
        }
    }

    pub fn set(&mut self, index: CoefIndex, value: f64) -> Result<()> {
        let slot = if index.level < 0 {
            self.scaling.get_mut(index.position)
        } else {
            self.details
                .get_mut(index.level as usize)
                .and_then(|l| l.get_mut(index.position))
        };
        match slot {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => invalid(format!(
                "index ({}, {}) outside a field with max_level {}",
                index.level,
                index.position,
                self.max_level()
            )),
        }
    }

    /// Iterates `(index, value)` with levels ascending, positions ascending.
    pub fn iter(&self) -> impl Iterator<Item = (CoefIndex, f64)> + '_ {
        let scaling = self
            .scaling
            .iter()
            .enumerate()
            .map(|(k, &v)| (CoefIndex::new(-1, k), v));
        let details = self.details.iter().enumerate().flat_map(|(j, level)| {
            level
                .iter()
                .enumerate()
                .map(move |(k, &v)| (CoefIndex::new(j as i32, k), v))
        });
        scaling.chain(details)
    }

    pub fn squared_norm(&self) -> f64 {
        self.tail_energy(-1)
    }

    /// `sum_{j >= from_level} sum_k beta_jk^2`.
    pub fn tail_energy(&self, from_level: i32) -> f64 {
        let mut total = 0.0;
        if from_level < 0 {
            total += self.scaling.iter().map(|v| v * v).sum::<f64>();
        }
        let start = from_level.max(0) as usize;
        for level in self.details.iter().skip(start) {
            total += level.iter().map(|v| v * v).sum::<f64>();
        }
        total
    }

    pub fn squared_distance(&self, other: &Self) -> Result<f64> {
        self.check_layout(other)?;
        Ok((self - other).squared_norm())
    }

    /// Copy restricted (or zero-padded) to levels `-1..max_level`.
    pub fn resized(&self, max_level: u32) -> Self {
        let mut out = Self::zeros(max_level);
        out.scaling.copy_from_slice(&self.scaling);
        for (dst, src) in out.details.iter_mut().zip(&self.details) {
            dst.copy_from_slice(src);
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            scaling: self.scaling.iter().map(|v| v * c).collect(),
            details: self
                .details
                .iter()
                .map(|l| l.iter().map(|v| v * c).collect())
                .collect(),
        }
    }

    pub fn check_layout(&self, other: &Self) -> Result<()> {
        if self.max_level() != other.max_level() {
            return invalid(format!(
                "layout mismatch: max_level {} vs {}",
                self.max_level(),
                other.max_level()
            ));
        }
        Ok(())
    }
}

impl Sub for &CoefficientField {
    type Output = CoefficientField;

    /// Entrywise difference; panics on layout mismatch.
    fn sub(self, rhs: Self) -> CoefficientField {
        assert_eq!(self.max_level(), rhs.max_level(), "layout mismatch");
        CoefficientField {
            scaling: self
                .scaling
                .iter()
                .zip(&rhs.scaling)
                .map(|(a, b)| a - b)
                .collect(),
            details: self
                .details
                .iter()
                .zip(&rhs.details)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect(),
        }
    }
}
