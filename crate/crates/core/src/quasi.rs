//! Symbolic calculus of quasi-eigenfunctions.
//!
//! A quasi-eigenfunction is a character with an affine phase,
//! `f(x) = e(m . x + c)` with `e(t) = e^{2 pi i t}`, frequency `m` an integer
//! vector and constant `c` on the `2^-64` grid. The multiplicative coboundary
//! operator of a map `T` is `W_T(f) = (f o T) / f`; for the affine skew
//! products here it sends characters to characters:
//!
//! ```text
//! W_{T^r} e(m . x + c) = e(((A^r)^t - I) m . x  +  m . b_r)
//! ```
//!
//! where `b_r` is the translation part of `T^r`. The frequency arithmetic is
//! exact integer arithmetic (with overflow reported, not wrapped), and the
//! constant arithmetic is exact on the grid, so operator identities can be
//! checked for *equality*, not up to tolerance.

use crate::reduce;
use crate::torus::{AffineSkewMap, Frac64, OrbitStream, TorusError, TorusPoint};
use num::complex::Complex64;
use num::integer::gcd;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuasiError {
    #[error("dimension mismatch: map has {expected}, frequency has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("power must be at least 1")]
    InvalidPower,
    #[error("frequency arithmetic overflowed i64")]
    FrequencyOverflow,
    #[error("chain degree {degree} exceeds requested bound {kmax}")]
    DegreeExceedsLimit { degree: usize, kmax: usize },
    #[error(transparent)]
    Torus(#[from] TorusError),
}

/// `e(m . x + c)` on the `d`-torus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuasiEig {
    m: Vec<i64>,
    c: Frac64,
}

impl QuasiEig {
    pub fn new(m: Vec<i64>, c: Frac64) -> QuasiEig {
        assert!(!m.is_empty(), "frequency vector must be nonempty");
        QuasiEig { m, c }
    }

    /// The plain character `e(m . x)`.
    pub fn character(m: Vec<i64>) -> QuasiEig {
        QuasiEig::new(m, Frac64::ZERO)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m.len()
    }

    #[inline]
    pub fn frequency(&self) -> &[i64] {
        &self.m
    }

    #[inline]
    pub fn constant(&self) -> Frac64 {
        self.c
    }

    /// Whether the frequency vanishes, i.e. the function is the constant
    /// `e(c)`.
    pub fn is_constant(&self) -> bool {
        self.m.iter().all(|&mi| mi == 0)
    }

    /// The exponent `m . p + c`, exact on the grid.
    pub fn exponent_at(&self, p: &TorusPoint) -> Result<Frac64, QuasiError> {
        if p.dim() != self.dim() {
            return Err(QuasiError::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        let mut acc = self.c;
        for (x, &mi) in p.coords().iter().zip(&self.m) {
            acc += x.mul_i64(mi);
        }
        Ok(acc)
    }

    pub fn eval(&self, p: &TorusPoint) -> Result<Complex64, QuasiError> {
        Ok(self.exponent_at(p)?.phase())
    }

    /// `f^s = e(s m . x + s c)`; the frequency scaling must stay in `i64`,
    /// while the constant scaling is exact mod 1 for any `s`.
    pub fn pow(&self, s: u64) -> Result<QuasiEig, QuasiError> {
        let m = self
            .m
            .iter()
            .map(|&mi| {
                let wide = mi as i128 * s as i128;
                i64::try_from(wide).map_err(|_| QuasiError::FrequencyOverflow)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QuasiEig { m, c: self.c.mul_u64(s) })
    }
}

/// Pascal row `C(r, 0..=order)` as exact `i128` numbers (not reduced), for
/// the frequency side of the coboundary operator.
fn exact_binomials(r: u64, order: usize) -> Result<Vec<i128>, QuasiError> {
    let mut row = vec![0i128; order + 1];
    row[0] = 1;
    for _ in 0..r {
        for j in (1..=order).rev() {
            row[j] = row[j].checked_add(row[j - 1]).ok_or(QuasiError::FrequencyOverflow)?;
        }
    }
    Ok(row)
}

fn check_dims(map: &AffineSkewMap, f: &QuasiEig) -> Result<(), QuasiError> {
    if map.dim() != f.dim() {
        return Err(QuasiError::DimensionMismatch { expected: map.dim(), got: f.dim() });
    }
    Ok(())
}

/// `W_{T^r} f` for the `r`-th power of the skew product. The input constant
/// cancels between `f o T^r` and `f`, so the output constant is `m . b_r`
/// alone.
pub fn apply_w_power(map: &AffineSkewMap, r: u64, f: &QuasiEig) -> Result<QuasiEig, QuasiError> {
    if r < 1 {
        return Err(QuasiError::InvalidPower);
    }
    check_dims(map, f)?;
    let d = map.dim();
    let binoms = exact_binomials(r, d)?;
    // m'_i = sum_{k >= 1} C(r, k) m_{i+k}  (exact, checked)
    let mut m = vec![0i64; d];
    for i in 0..d {
        let mut acc: i128 = 0;
        for k in 1..=(d - 1 - i) {
            let term = binoms[k].checked_mul(f.m[i + k] as i128).ok_or(QuasiError::FrequencyOverflow)?;
            acc = acc.checked_add(term).ok_or(QuasiError::FrequencyOverflow)?;
        }
        m[i] = i64::try_from(acc).map_err(|_| QuasiError::FrequencyOverflow)?;
    }
    // c' = m . b_r = sum_i m_i C(r, i) alpha  (exact mod 1: binomials enter
    // only through their residue mod 2^64).
    let mut c = Frac64::ZERO;
    for (i, &mi) in f.m.iter().enumerate() {
        c += map.alpha().mul_u64(binoms[i + 1] as u64).mul_i64(mi);
    }
    Ok(QuasiEig { m, c })
}

/// The coboundary operator `W_T f = (f o T) / f`.
pub fn apply_wt(map: &AffineSkewMap, f: &QuasiEig) -> Result<QuasiEig, QuasiError> {
    apply_w_power(map, 1, f)
}

/// The chain degree of a frequency under `W_T`: the least `k` such that `k`
/// applications of the frequency map `(A^t - I)` annihilate `m`. This equals
/// the largest index carrying a nonzero entry (1-based), and is 0 exactly
/// for constants.
pub fn ek_degree(map: &AffineSkewMap, f: &QuasiEig) -> Result<usize, QuasiError> {
    check_dims(map, f)?;
    // (A^t - I) m just shifts indices down one; iterate rather than peek so
    // the definition and the implementation coincide.
    let mut m = f.m.clone();
    let mut k = 0;
    while m.iter().any(|&mi| mi != 0) {
        for i in 0..m.len() - 1 {
            m[i] = m[i + 1];
        }
        *m.last_mut().unwrap() = 0;
        k += 1;
    }
    Ok(k)
}

/// Verifies the iterate identity `W_{T^r}^k f = (W_T^k f)^{r^k}` at `k` equal
/// to the chain degree of `f`, by exact comparison of the resulting
/// quasi-eigenfunctions (frequencies as integers, constants on the grid).
pub fn check_tr_lemma(
    map: &AffineSkewMap,
    f: &QuasiEig,
    r: u64,
    kmax: usize,
) -> Result<bool, QuasiError> {
    if r < 1 {
        return Err(QuasiError::InvalidPower);
    }
    check_dims(map, f)?;
    let k = ek_degree(map, f)?;
    if k > kmax {
        return Err(QuasiError::DegreeExceedsLimit { degree: k, kmax });
    }
    let mut lhs = f.clone();
    for _ in 0..k {
        lhs = apply_w_power(map, r, &lhs)?;
    }
    let mut rhs = f.clone();
    for _ in 0..k {
        rhs = apply_wt(map, &rhs)?;
    }
    // r^k mod 2^64; only the residue matters because rhs is constant by now
    // (and if it were not, `pow` would check the exact product).
    let mut rk: u64 = 1;
    for _ in 0..k {
        rk = rk.wrapping_mul(r);
    }
    let rhs = rhs.pow(rk)?;
    Ok(lhs == rhs)
}

/// The Birkhoff average `(1/N) sum_{n=0}^{N-1} f(T^n p)`, accumulated in
/// fixed 1024-term chunks combined pairwise (the crate-wide deterministic
/// summation scheme).
pub fn birkhoff_average(
    map: &AffineSkewMap,
    f: &QuasiEig,
    origin: &TorusPoint,
    n: u64,
) -> Result<Complex64, QuasiError> {
    check_dims(map, f)?;
    if origin.dim() != map.dim() {
        return Err(QuasiError::DimensionMismatch { expected: map.dim(), got: origin.dim() });
    }
    let mut stream = OrbitStream::new(*map, origin, 0)?;
    let mut chunk_sums = Vec::with_capacity(reduce::chunk_count(n));
    let mut remaining = n;
    while remaining > 0 {
        let take = remaining.min(reduce::CHUNK_LEN as u64);
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..take {
            let mut expo = f.c;
            for (x, &mi) in stream.point_coords().iter().zip(&f.m) {
                expo += x.mul_i64(mi);
            }
            acc += expo.phase();
            stream.advance();
        }
        chunk_sums.push(acc);
        remaining -= take;
    }
    Ok(reduce::pairwise_sum_complex(&chunk_sums) / n as f64)
}

/// Searches for coprime pairs `(r, s)` with `1 <= r, s <= bound` such that
/// `|| r c1 - s c2 || <= tol` (distance to the nearest integer); with
/// `tol = 0` this demands exact equality on the grid. Pairs are returned in
/// lexicographic order.
pub fn key_lemma_search(c1: Frac64, c2: Frac64, bound: u64, tol: f64) -> Vec<(u64, u64)> {
    let mut hits = Vec::new();
    for r in 1..=bound {
        for s in 1..=bound {
            if gcd(r, s) != 1 {
                continue;
            }
            let diff = c1.mul_u64(r) - c2.mul_u64(s);
            if diff.norm() <= tol {
                hits.push((r, s));
            }
        }
    }
    hits
}
