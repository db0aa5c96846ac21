//! Correlation and decay statistics over phase sequences.
//!
//! All estimators share one numeric discipline: terms are accumulated
//! sequentially in fixed 1024-term chunks, chunk sums combine pairwise, and
//! parallel workers own contiguous chunk runs (see [`crate::reduce`]). The
//! reported value is therefore byte-identical for every worker count.

mod blocks;

pub use blocks::{hx_blocks, BlockScheme, GapRule, ShortIntervalGrid};

use crate::arith::{ArithError, MultiplicativeSpec, NuCursor};
use crate::reduce;
use crate::torus::{poly_to_initial, AffineSkewMap, OrbitStream, PolySpec, TorusError, TorusPoint};
use num::complex::Complex64;
use num::integer::Roots;
use thiserror::Error;

/// Sliding-window refresh interval: short-interval windows are re-accumulated
/// from scratch every `2^16` slides (and that boundary is also the parallel
/// work unit), bounding float drift independently of the worker split.
pub const REFRESH_LEN: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("scheme needs at least one block")]
    EmptyScheme,
    #[error("first boundary must be 1, got {0}")]
    FirstBoundaryNotOne(u64),
    #[error("boundaries must increase strictly (violated at index {index})")]
    BoundariesNotIncreasing { index: usize },
    #[error("power-rule exponent {0} outside (0, 1)")]
    InvalidTheta(f64),
    #[error("requested {requested} blocks but the scheme has {available}")]
    SchemeTooShort { requested: usize, available: usize },
    #[error("correlation scales must differ, both are {0}")]
    EqualScales(u64),
    #[error("correlation scales must be at least 1")]
    InvalidScale,
    #[error("invalid window: H = {h} must satisfy 1 <= H <= M = {m}")]
    WindowInvalid { m: u64, h: u64 },
    #[error("phase stream ended before index {needed}")]
    StreamTooShort { needed: u64 },
    #[error("window lengths must increase strictly (violated at grid index {index})")]
    GridWindowsNotIncreasing { index: usize },
    #[error("window-to-interval ratio must decrease strictly (violated at grid index {index})")]
    GridRatioNotDecreasing { index: usize },
    #[error("grid intervals overlap: M_{index} must exceed 2 M + H of the previous level")]
    GridTooDense { index: usize },
    #[error("expected {expected} residues, got {got}")]
    ResidueCount { expected: usize, got: usize },
    #[error("residue {residue} not below modulus {modulus}")]
    ResidueTooLarge { residue: u64, modulus: u64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Torus(#[from] TorusError),
}

/// A (conceptually infinite) sequence of unimodular phases `a_n`, indexed
/// from any start with any stride, so correlation estimators can pull the
/// subsequences `a_{rn}` without materializing the whole sequence.
pub trait PhaseSource: Sync {
    /// `a_n` for `n = start, start + stride, start + 2 stride, ...`.
    fn phase_iter(&self, start: u64, stride: u64) -> Box<dyn Iterator<Item = Complex64> + '_>;
}

/// The canonical source: last-coordinate phases of a skew-product orbit.
#[derive(Debug, Clone)]
pub struct TorusPhases {
    map: AffineSkewMap,
    origin: TorusPoint,
}

impl TorusPhases {
    pub fn new(map: AffineSkewMap, origin: TorusPoint) -> Result<TorusPhases, StatsError> {
        if origin.dim() != map.dim() {
            return Err(TorusError::DimensionMismatch { expected: map.dim(), got: origin.dim() }.into());
        }
        Ok(TorusPhases { map, origin })
    }

    /// The source realizing `a_n = e(P(n))` for a polynomial `P`.
    pub fn from_poly(poly: &PolySpec) -> TorusPhases {
        let (map, origin) = poly_to_initial(poly);
        TorusPhases { map, origin }
    }

    pub fn map(&self) -> &AffineSkewMap {
        &self.map
    }

    pub fn origin(&self) -> &TorusPoint {
        &self.origin
    }
}

impl PhaseSource for TorusPhases {
    fn phase_iter(&self, start: u64, stride: u64) -> Box<dyn Iterator<Item = Complex64> + '_> {
        let stream = OrbitStream::with_stride(self.map, &self.origin, start, stride)
            .expect("dimensions validated at construction");
        Box::new(stream.map(crate::torus::Frac64::phase))
    }
}

fn nu_weight(
    cursor: &mut Option<NuCursor<'_>>,
    n: u64,
) -> Result<Complex64, StatsError> {
    match cursor {
        Some(c) => Ok(c.value(n)?),
        None => Ok(Complex64::new(1.0, 0.0)),
    }
}

/// `(1/N) sum_{n=1}^{N} a_n nu(n)` (or unweighted with `nu = None`).
pub fn basic_average<S: PhaseSource + ?Sized>(
    source: &S,
    nu: Option<&MultiplicativeSpec>,
    n: u64,
    workers: usize,
) -> Result<Complex64, StatsError> {
    let chunk_sums = reduce::run_chunked::<_, StatsError, _>(reduce::chunk_count(n), workers, |range| {
        let start_n = 1 + reduce::chunk_span(range.start, n).start;
        let mut phases = source.phase_iter(start_n, 1);
        let mut cursor = nu.map(NuCursor::new);
        let mut out = Vec::with_capacity(range.len());
        for c in range {
            let span = reduce::chunk_span(c, n);
            let mut acc = Complex64::new(0.0, 0.0);
            for off in span {
                let idx = 1 + off;
                let a = phases.next().ok_or(StatsError::StreamTooShort { needed: idx })?;
                acc += a * nu_weight(&mut cursor, idx)?;
            }
            out.push(acc);
        }
        Ok(out)
    })?;
    Ok(reduce::pairwise_sum_complex(&chunk_sums) / n as f64)
}

/// The two-scale correlation `(1/N) sum_{n=1}^{N} a_{rn} conj(a_{sn})` for
/// distinct positive scales `r != s`.
pub fn kbsz_correlation<S: PhaseSource + ?Sized>(
    source: &S,
    r: u64,
    s: u64,
    n: u64,
    workers: usize,
) -> Result<Complex64, StatsError> {
    if r < 1 || s < 1 {
        return Err(StatsError::InvalidScale);
    }
    if r == s {
        return Err(StatsError::EqualScales(r));
    }
    let chunk_sums = reduce::run_chunked::<_, StatsError, _>(reduce::chunk_count(n), workers, |range| {
        let first = 1 + reduce::chunk_span(range.start, n).start;
        let mut at_r = source.phase_iter(r * first, r);
        let mut at_s = source.phase_iter(s * first, s);
        let mut out = Vec::with_capacity(range.len());
        for c in range {
            let span = reduce::chunk_span(c, n);
            let mut acc = Complex64::new(0.0, 0.0);
            for off in span {
                let idx = 1 + off;
                let ar = at_r.next().ok_or(StatsError::StreamTooShort { needed: r * idx })?;
                let as_ = at_s.next().ok_or(StatsError::StreamTooShort { needed: s * idx })?;
                acc += ar * as_.conj();
            }
            out.push(acc);
        }
        Ok(out)
    })?;
    Ok(reduce::pairwise_sum_complex(&chunk_sums) / n as f64)
}

/// The weighted block statistic over the first `k_count` blocks of a scheme:
///
/// ```text
/// W = (1 / b_{K+1}) sum_{k=1}^{K} | sum_{b_k <= n < b_{k+1}} a_n nu(n) |
/// ```
pub fn weighted_block_stat<S: PhaseSource + ?Sized>(
    source: &S,
    nu: &MultiplicativeSpec,
    scheme: &BlockScheme,
    k_count: usize,
    workers: usize,
) -> Result<f64, StatsError> {
    if k_count < 1 || k_count > scheme.num_blocks() {
        return Err(StatsError::SchemeTooShort { requested: k_count, available: scheme.num_blocks() });
    }
    // chunks over block indices: chunk c covers blocks 1 + span(c)
    let k_total = k_count as u64;
    let chunk_sums = reduce::run_chunked::<_, StatsError, _>(reduce::chunk_count(k_total), workers, |range| {
        let first_block = 1 + reduce::chunk_span(range.start, k_total).start as usize;
        let mut phases = source.phase_iter(scheme.boundary(first_block), 1);
        let mut cursor = NuCursor::new(nu);
        let mut out = Vec::with_capacity(range.len());
        for c in range {
            let mut acc = 0.0f64;
            for off in reduce::chunk_span(c, k_total) {
                let k = 1 + off as usize;
                let mut block = Complex64::new(0.0, 0.0);
                for idx in scheme.block_range(k) {
                    let a = phases.next().ok_or(StatsError::StreamTooShort { needed: idx })?;
                    block += a * cursor.value(idx)?;
                }
                acc += block.norm();
            }
            out.push(acc);
        }
        Ok(out)
    })?;
    let total = reduce::pairwise_sum_f64(&chunk_sums);
    Ok(total / scheme.boundary(k_count + 1) as f64)
}

/// The short-interval decay statistic
///
/// ```text
/// S(M, H) = (1/M) sum_{M <= m < 2M} (1/H) | sum_{m <= n < m+H} e(P(n)) nu(n) |
/// ```
///
/// computed with a sliding window: one add and one subtract per slide, with
/// an exact re-accumulation at every [`REFRESH_LEN`] boundary (those
/// boundaries are also the parallel work units, so results do not depend on
/// the worker count).
pub fn short_interval_stat(
    poly: &PolySpec,
    nu: &MultiplicativeSpec,
    m: u64,
    h: u64,
    workers: usize,
) -> Result<f64, StatsError> {
    if h < 1 || h > m {
        return Err(StatsError::WindowInvalid { m, h });
    }
    let (map, origin) = poly_to_initial(poly);
    let num_units = m.div_ceil(REFRESH_LEN) as usize;
    let per_unit = reduce::run_chunked::<_, StatsError, _>(num_units, workers, |range| {
        let mut out = Vec::with_capacity(range.len());
        for unit in range {
            let start_m = m + unit as u64 * REFRESH_LEN;
            let end_m = (start_m + REFRESH_LEN).min(2 * m);
            let count = (end_m - start_m) as usize;
            // terms a_n nu(n) for n in [start_m, end_m - 1 + h]
            let mut terms = Vec::with_capacity(count + h as usize - 1);
            let mut stream = OrbitStream::new(map, &origin, start_m)?;
            let mut cursor = NuCursor::new(nu);
            for j in 0..count as u64 + h - 1 {
                let idx = start_m + j;
                terms.push(stream.next().unwrap().phase() * cursor.value(idx)?);
            }
            // slide the window over the unit, cutting mods into 1024-chunks
            let mut window: Complex64 = terms[..h as usize].iter().sum();
            let mut chunks = Vec::with_capacity(count.div_ceil(reduce::CHUNK_LEN));
            let mut acc = 0.0f64;
            for j in 0..count {
                if j > 0 {
                    window += terms[j + h as usize - 1] - terms[j - 1];
                }
                acc += window.norm();
                if (j + 1) % reduce::CHUNK_LEN == 0 || j + 1 == count {
                    chunks.push(acc);
                    acc = 0.0;
                }
            }
            out.push(chunks);
        }
        Ok(out)
    })?;
    let chunk_sums: Vec<f64> = per_unit.into_iter().flatten().collect();
    let total = reduce::pairwise_sum_f64(&chunk_sums);
    Ok(total / h as f64 / m as f64)
}

/// The window length used when none is specified: `floor(M^(1/3))`, the
/// canonical slowly-growing window for the decay experiments.
pub fn default_window(m: u64) -> u64 {
    m.cbrt().max(1)
}

/// Plain-loop reference for [`short_interval_stat`]: every window summed from
/// scratch. Quadratic in `H`; for tests and the self-check battery only.
pub fn naive_short_interval_stat(
    poly: &PolySpec,
    nu: &MultiplicativeSpec,
    m: u64,
    h: u64,
) -> Result<f64, StatsError> {
    if h < 1 || h > m {
        return Err(StatsError::WindowInvalid { m, h });
    }
    let (map, origin) = poly_to_initial(poly);
    let mut cursor = NuCursor::new(nu);
    // terms for n in [m, 2m + h - 1)
    let mut terms = Vec::with_capacity((m + h - 1) as usize);
    let mut stream = OrbitStream::new(map, &origin, m)?;
    for j in 0..m + h - 1 {
        terms.push(stream.next().unwrap().phase() * cursor.value(m + j)?);
    }
    let mut total = 0.0;
    for w in terms.windows(h as usize).take(m as usize) {
        total += w.iter().sum::<Complex64>().norm();
    }
    Ok(total / h as f64 / m as f64)
}

/// Plain-loop reference for [`weighted_block_stat`].
pub fn naive_weighted_block_stat<S: PhaseSource + ?Sized>(
    source: &S,
    nu: &MultiplicativeSpec,
    scheme: &BlockScheme,
    k_count: usize,
) -> Result<f64, StatsError> {
    if k_count < 1 || k_count > scheme.num_blocks() {
        return Err(StatsError::SchemeTooShort { requested: k_count, available: scheme.num_blocks() });
    }
    let mut cursor = NuCursor::new(nu);
    let mut phases = source.phase_iter(1, 1);
    let mut total = 0.0;
    for k in 1..=k_count {
        let mut block = Complex64::new(0.0, 0.0);
        for idx in scheme.block_range(k) {
            let a = phases.next().ok_or(StatsError::StreamTooShort { needed: idx })?;
            block += a * cursor.value(idx)?;
        }
        total += block.norm();
    }
    Ok(total / scheme.boundary(k_count + 1) as f64)
}
