//! Orbit-switching streams: sequences that follow one orbit per block.
//!
//! Over a block scheme `[b_k, b_{k+1})` and per-block seeds `x_k`, the
//! switched stream is `y_n = T^n(x_k)` for `n` in block `k` -- a sequence
//! that is orbit-like inside every block but re-anchors at each boundary.
//! [`aligned_seeds`] chooses the seeds so each block's weighted sum lands on
//! the positive real axis, which makes the global average as large as the sum
//! of block-sum moduli: the adversarial sequence for averaged statistics,
//! at the price of a per-point invariance defect of `2 #switches / N`.

use crate::arith::{ArithError, MultiplicativeSpec, NuCursor};
use crate::stats::{BlockScheme, PhaseSource, StatsError};
use crate::torus::{AffineSkewMap, BinomialRow, Frac64, TorusError, TorusPoint};
use num::complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("no seed for block {block}")]
    MissingSeed { block: usize },
    #[error("seed for block {block} has dimension {got}, map has {expected}")]
    SeedDimension { block: usize, expected: usize, got: usize },
    #[error("at least one seed is required")]
    NoSeeds,
    #[error("stream of length {count} exceeds covered range [1, {coverage_end})")]
    CoverageExceeded { count: u64, coverage_end: u64 },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A block scheme together with one seed per block: the data of a switched
/// orbit `y_n = T^n(x_k)`, `n` in block `k`.
#[derive(Debug, Clone)]
pub struct SwitchedOrbit {
    map: AffineSkewMap,
    scheme: BlockScheme,
    seeds: Vec<TorusPoint>,
}

impl SwitchedOrbit {
    /// Seeds are positional: `seeds[k-1]` anchors block `k`. Fewer seeds
    /// than blocks is allowed; the coverage just ends earlier.
    pub fn new(
        map: AffineSkewMap,
        scheme: BlockScheme,
        seeds: Vec<TorusPoint>,
    ) -> Result<SwitchedOrbit, ModelError> {
        if seeds.is_empty() {
            return Err(ModelError::NoSeeds);
        }
        for (i, s) in seeds.iter().enumerate() {
            if s.dim() != map.dim() {
                return Err(ModelError::SeedDimension {
                    block: i + 1,
                    expected: map.dim(),
                    got: s.dim(),
                });
            }
        }
        Ok(SwitchedOrbit { map, scheme, seeds })
    }

    pub fn map(&self) -> &AffineSkewMap {
        &self.map
    }

    pub fn scheme(&self) -> &BlockScheme {
        &self.scheme
    }

    pub fn seed(&self, block: usize) -> Result<&TorusPoint, ModelError> {
        if block < 1 || block > self.seeds.len() {
            return Err(ModelError::MissingSeed { block });
        }
        Ok(&self.seeds[block - 1])
    }

    /// Number of blocks that both the scheme and the seed list cover.
    pub fn covered_blocks(&self) -> usize {
        self.scheme.num_blocks().min(self.seeds.len())
    }

    /// One past the largest covered index: `y_n` exists for
    /// `1 <= n < coverage_end()`.
    pub fn coverage_end(&self) -> u64 {
        self.scheme.boundary(self.covered_blocks() + 1)
    }

    /// `y_n` by direct jump; `O(n d)` for the Pascal row, so use the streams
    /// for bulk access.
    pub fn value_at(&self, n: u64) -> Result<Frac64, ModelError> {
        let block = self
            .scheme
            .block_of(n)
            .ok_or(ModelError::CoverageExceeded { count: n, coverage_end: self.coverage_end() })?;
        let seed = self.seed(block)?;
        Ok(self.map.jump(seed, n)?.last())
    }

    /// The stream `y_1, y_2, ..., y_count`; the whole range must be covered.
    pub fn stream(&self, count: u64) -> Result<SwitchedStream<'_>, ModelError> {
        if count >= self.coverage_end() {
            return Err(ModelError::CoverageExceeded { count, coverage_end: self.coverage_end() });
        }
        Ok(SwitchedStream::start_at(self, 1, count + 1))
    }

    /// Phases `e(y_n)` for `n = 1..=count`.
    pub fn phases(&self, count: u64) -> Result<impl Iterator<Item = Complex64> + '_, ModelError> {
        Ok(self.stream(count)?.take(count as usize).map(Frac64::phase))
    }
}

/// Streaming iterator over a switched orbit: steps within a block, re-seeds
/// by an exact jump at each boundary. The Pascal row advances incrementally,
/// so a full pass costs `O(d)` per point plus `O(d^2)` per switch.
pub struct SwitchedStream<'a> {
    orbit: &'a SwitchedOrbit,
    row: BinomialRow,
    coords: Vec<Frac64>,
    n: u64,
    end: u64,
    block: usize,
}

impl<'a> SwitchedStream<'a> {
    fn start_at(orbit: &'a SwitchedOrbit, start: u64, end: u64) -> SwitchedStream<'a> {
        let block = orbit.scheme.block_of(start).unwrap_or(usize::MAX);
        let mut stream = SwitchedStream {
            orbit,
            row: BinomialRow::new(orbit.map.dim()),
            coords: Vec::new(),
            n: start,
            end: end.min(orbit.coverage_end()),
            block,
        };
        if stream.n < stream.end && block <= orbit.seeds.len() {
            stream.row.advance_to(start);
            stream.reseed();
        } else {
            stream.end = stream.n; // nothing to yield
        }
        stream
    }

    fn reseed(&mut self) {
        debug_assert_eq!(self.row.n(), self.n);
        let seed = &self.orbit.seeds[self.block - 1];
        self.coords = self
            .orbit
            .map
            .jump_with_row(seed, &self.row)
            .expect("seed dimensions validated at construction")
            .coords()
            .to_vec();
    }

    /// The index of the next value to be yielded.
    pub fn current_n(&self) -> u64 {
        self.n
    }
}

impl Iterator for SwitchedStream<'_> {
    type Item = Frac64;

    fn next(&mut self) -> Option<Frac64> {
        if self.n >= self.end {
            return None;
        }
        let out = *self.coords.last().unwrap();
        self.n += 1;
        self.row.advance();
        if self.n < self.end {
            if self.n == self.orbit.scheme.boundary(self.block + 1) {
                self.block += 1;
                self.reseed();
            } else {
                self.orbit.map.step_in_place(&mut self.coords);
            }
        }
        Some(out)
    }
}

impl PhaseSource for SwitchedOrbit {
    /// Phases of the switched orbit; the iterator simply ends at the edge of
    /// coverage, and the statistics layer reports the shortfall.
    fn phase_iter(&self, start: u64, stride: u64) -> Box<dyn Iterator<Item = Complex64> + '_> {
        if stride == 1 {
            let stream = SwitchedStream::start_at(self, start, self.coverage_end());
            Box::new(stream.map(Frac64::phase))
        } else {
            // strided access re-anchors every point: advance the shared
            // Pascal row by `stride` and jump from the block's seed.
            let mut row = BinomialRow::new(self.map.dim());
            let mut n = start;
            Box::new(std::iter::from_fn(move || {
                let block = self.scheme.block_of(n)?;
                let seed = self.seed(block).ok()?;
                row.advance_to(n);
                let y = self.map.jump_with_row(seed, &row).ok()?.last();
                n += stride;
                Some(y.phase())
            }))
        }
    }
}

/// Seeds that rotate each block's weighted sum onto the positive real axis.
///
/// For each of the first `k_count` blocks, the base orbit's weighted block
/// sum `B_k = sum_{n in block k} e(x_d(n)) nu(n)` is computed, and the seed
/// for block `k` is `base` with `t_k = -arg(B_k) / 2 pi` added to the last
/// coordinate. Since the last coordinate of `T^n` shifts by exactly `t_k`
/// for every `n`, the switched orbit's block sum becomes `|B_k| >= 0`.
pub fn aligned_seeds(
    map: &AffineSkewMap,
    base: &TorusPoint,
    scheme: &BlockScheme,
    nu: &MultiplicativeSpec,
    k_count: usize,
) -> Result<Vec<TorusPoint>, ModelError> {
    if k_count < 1 || k_count > scheme.num_blocks() {
        return Err(StatsError::SchemeTooShort {
            requested: k_count,
            available: scheme.num_blocks(),
        }
        .into());
    }
    let mut stream = crate::torus::OrbitStream::new(*map, base, scheme.boundary(1))?;
    let mut cursor = NuCursor::new(nu);
    let mut seeds = Vec::with_capacity(k_count);
    for k in 1..=k_count {
        let mut block_sum = Complex64::new(0.0, 0.0);
        for n in scheme.block_range(k) {
            block_sum += stream.next().unwrap().phase() * cursor.value(n)?;
        }
        let t = (-block_sum.arg() / std::f64::consts::TAU).rem_euclid(1.0);
        seeds.push(base.with_last_shifted(Frac64::from_f64(t)));
    }
    Ok(seeds)
}

/// The invariance defect of a switched orbit over the first `n` points:
/// `2 #{k : b_k <= n} / n`, an upper bound for how far the empirical
/// distribution of `(y, y o T)` sits from an invariant one (each switch
/// perturbs at most two adjacent pairs).
pub fn invariance_defect(scheme: &BlockScheme, n: u64) -> f64 {
    assert!(n >= 1);
    2.0 * scheme.boundaries_upto(n) as f64 / n as f64
}
