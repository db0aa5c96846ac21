//! Block partitions of `[1, N)` and short-interval grids.
//!
//! A block scheme is a strictly increasing boundary list `b_1 = 1 < b_2 < ...`
//! cutting the integers into blocks `[b_k, b_{k+1})`. Schemes come either
//! from a gap rule (`b_{k+1} = b_k + g(k)`) or from an explicit list, and one
//! constructor derives boundaries from a short-interval grid by marking a
//! residue class inside each doubled interval.

use super::StatsError;
use num::integer::Roots;
use std::ops::Range;

/// Gap rule `g(k)` for block `k`; every rule yields `g(k) >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum GapRule {
    /// `g(k) = floor(sqrt k)`.
    Sqrt,
    /// `g(k) = floor(sqrt k) + 1`.
    SqrtPlusOne,
    /// `g(k) = floor(ln(k)^2) + 1`.
    LogSquaredPlusOne,
    /// `g(k) = floor(k^theta)` with `0 < theta < 1`.
    Power(f64),
}

impl GapRule {
    pub fn validate(&self) -> Result<(), StatsError> {
        match self {
            GapRule::Power(theta) if !(*theta > 0.0 && *theta < 1.0) => {
                Err(StatsError::InvalidTheta(*theta))
            }
            _ => Ok(()),
        }
    }

    /// The gap after block `k >= 1`.
    pub fn gap(&self, k: u64) -> u64 {
        debug_assert!(k >= 1);
        match self {
            GapRule::Sqrt => k.sqrt(),
            GapRule::SqrtPlusOne => k.sqrt() + 1,
            GapRule::LogSquaredPlusOne => {
                let l = (k as f64).ln();
                (l * l).floor() as u64 + 1
            }
            GapRule::Power(theta) => ((k as f64).powf(*theta).floor() as u64).max(1),
        }
    }
}

/// Boundaries `b_1 = 1 < b_2 < ...`; block `k` is `[b_k, b_{k+1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockScheme {
    boundaries: Vec<u64>,
}

impl BlockScheme {
    /// Applies a gap rule until the limit is passed: the final boundary is
    /// the first to exceed `limit`, so every `n <= limit` lies in a block.
    pub fn from_rule(rule: &GapRule, limit: u64) -> Result<BlockScheme, StatsError> {
        rule.validate()?;
        let mut boundaries = vec![1u64];
        let mut k = 1u64;
        while *boundaries.last().unwrap() <= limit {
            let b = boundaries.last().unwrap() + rule.gap(k);
            boundaries.push(b);
            k += 1;
        }
        Ok(BlockScheme { boundaries })
    }

    pub fn from_boundaries(boundaries: Vec<u64>) -> Result<BlockScheme, StatsError> {
        if boundaries.len() < 2 {
            return Err(StatsError::EmptyScheme);
        }
        if boundaries[0] != 1 {
            return Err(StatsError::FirstBoundaryNotOne(boundaries[0]));
        }
        for i in 1..boundaries.len() {
            if boundaries[i] <= boundaries[i - 1] {
                return Err(StatsError::BoundariesNotIncreasing { index: i });
            }
        }
        Ok(BlockScheme { boundaries })
    }

    /// Number of blocks (one less than the number of boundaries).
    pub fn num_blocks(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// `b_k`, `k` running from 1 to `num_blocks() + 1`.
    #[inline]
    pub fn boundary(&self, k: usize) -> u64 {
        self.boundaries[k - 1]
    }

    pub fn boundaries(&self) -> &[u64] {
        &self.boundaries
    }

    /// The half-open block `[b_k, b_{k+1})`.
    pub fn block_range(&self, k: usize) -> Range<u64> {
        self.boundary(k)..self.boundary(k + 1)
    }

    /// The block containing `n`, if `n` is covered by the scheme.
    pub fn block_of(&self, n: u64) -> Option<usize> {
        if n < 1 || n >= *self.boundaries.last().unwrap() {
            return None;
        }
        // partition_point gives the count of boundaries <= n, which is the
        // 1-based index of the containing block.
        Some(self.boundaries.partition_point(|&b| b <= n))
    }

    /// Largest `K` with `b_{K+1} <= limit` (0 when even `b_2` exceeds it).
    pub fn max_blocks_within(&self, limit: u64) -> usize {
        self.boundaries.partition_point(|&b| b <= limit).saturating_sub(1)
    }

    /// Number of boundaries `b_k <= n`; the per-point switching cost of an
    /// orbit built over this scheme is twice this count.
    pub fn boundaries_upto(&self, n: u64) -> usize {
        self.boundaries.partition_point(|&b| b <= n)
    }
}

/// A short-interval grid `(M_l, H_l)`: window lengths grow, their relative
/// size `H_l / M_l` shrinks, and the doubled intervals `[M_l, 2 M_l + H_l)`
/// stay disjoint and ordered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortIntervalGrid {
    entries: Vec<(u64, u64)>,
}

impl ShortIntervalGrid {
    pub fn new(entries: Vec<(u64, u64)>) -> Result<ShortIntervalGrid, StatsError> {
        if entries.is_empty() {
            return Err(StatsError::EmptyScheme);
        }
        for (l, &(m, h)) in entries.iter().enumerate() {
            if h < 1 || h > m {
                return Err(StatsError::WindowInvalid { m, h });
            }
            if l > 0 {
                let (pm, ph) = entries[l - 1];
                if h <= ph {
                    return Err(StatsError::GridWindowsNotIncreasing { index: l });
                }
                // H_l / M_l < H_{l-1} / M_{l-1}, compared exactly in u128
                if (h as u128) * (pm as u128) >= (ph as u128) * (m as u128) {
                    return Err(StatsError::GridRatioNotDecreasing { index: l });
                }
                if m <= 2 * pm + ph {
                    return Err(StatsError::GridTooDense { index: l });
                }
            }
        }
        Ok(ShortIntervalGrid { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }
}

/// Boundaries from a grid: 1, then inside each doubled interval
/// `[M_l, 2 M_l + H_l)` every point congruent to `r_l` mod `H_l`. The grid's
/// separation condition makes the union strictly increasing.
pub fn hx_blocks(grid: &ShortIntervalGrid, residues: &[u64]) -> Result<BlockScheme, StatsError> {
    if residues.len() != grid.len() {
        return Err(StatsError::ResidueCount { expected: grid.len(), got: residues.len() });
    }
    let mut boundaries = vec![1u64];
    for (&(m, h), &r) in grid.entries().iter().zip(residues) {
        if r >= h {
            return Err(StatsError::ResidueTooLarge { residue: r, modulus: h });
        }
        // first point >= M congruent to r mod H
        let mut b = m + (r + h - m % h) % h;
        while b < 2 * m + h {
            boundaries.push(b);
            b += h;
        }
    }
    BlockScheme::from_boundaries(boundaries)
}
