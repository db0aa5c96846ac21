//! Affine unipotent skew products on the `d`-torus, simulated exactly.
//!
//! The map is `T(x_1, ..., x_d) = (x_1 + alpha, x_2 + x_1, ..., x_d + x_{d-1})`,
//! i.e. `x -> A x + b` with `A = I + N` for the lower shift `N`. Because
//! `N^d = 0`, powers of `T` have the closed form
//!
//! ```text
//! (T^n x)_i = C(n, i) alpha + sum_{j=1..i} C(n, i - j) x_j
//! ```
//!
//! with binomial coefficients reduced mod 2^64, since coordinates live on the
//! grid `2^-64 Z / Z` ([`Frac64`]). All orbit arithmetic is therefore exact:
//! stepping, jumping ahead, and running the map `r`-fold commute bit-for-bit.

mod binom;
mod frac64;

pub use binom::BinomialRow;
pub use frac64::Frac64;

use crate::real::{parse_real_token, RealTokenError};
use num::complex::Complex64;
use num::rational::BigRational;
use num::Zero;
use thiserror::Error;

/// Largest supported torus dimension. The Pascal rows and inner jump loops
/// are `O(d)` and `O(d^2)`; 16 keeps both trivial while covering every
/// experiment of interest.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TorusError {
    #[error("torus dimension {0} out of range 1..={MAX_DIM}")]
    BadDimension(usize),
    #[error("dimension mismatch: map has {expected}, point has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial degree {0} out of range 1..={MAX_DIM}")]
    BadDegree(usize),
    #[error("leading polynomial coefficient is zero")]
    ZeroLeadingCoefficient,
    #[error(transparent)]
    Token(#[from] RealTokenError),
}

/// A point of the `d`-torus with [`Frac64`] coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    coords: Vec<Frac64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<Frac64>) -> Result<TorusPoint, TorusError> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(TorusError::BadDimension(coords.len()));
        }
        Ok(TorusPoint { coords })
    }

    /// The origin of the `d`-torus.
    pub fn zero(dim: usize) -> TorusPoint {
        assert!((1..=MAX_DIM).contains(&dim));
        TorusPoint { coords: vec![Frac64::ZERO; dim] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coord(&self, i: usize) -> Frac64 {
        self.coords[i]
    }

    #[inline]
    pub fn coords(&self) -> &[Frac64] {
        &self.coords
    }

    /// The last coordinate, the one whose phase the experiments observe.
    #[inline]
    pub fn last(&self) -> Frac64 {
        *self.coords.last().unwrap()
    }

    /// A copy with `t` added to the last coordinate (a vertical rotation,
    /// which commutes with the skew product's observable phase shift).
    pub fn with_last_shifted(&self, t: Frac64) -> TorusPoint {
        let mut coords = self.coords.clone();
        *coords.last_mut().unwrap() += t;
        TorusPoint { coords }
    }
}

/// Writes `T^n(cur)` into `out`, given the Pascal row for `n` (mod 2^64).
/// `row` must hold `C(n, 0..=d)`.
#[inline]
fn jump_coords(alpha: Frac64, row: &[u64], cur: &[Frac64], out: &mut [Frac64]) {
    let d = cur.len();
    debug_assert!(row.len() > d && out.len() == d);
    for i in 0..d {
        let mut acc = alpha.mul_u64(row[i + 1]);
        for (j, x) in cur[..=i].iter().enumerate() {
            acc += x.mul_u64(row[i - j]);
        }
        out[i] = acc;
    }
}

/// The affine skew product `x -> (x_1 + alpha, x_2 + x_1, ..., x_d + x_{d-1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffineSkewMap {
    dim: usize,
    alpha: Frac64,
}

impl AffineSkewMap {
    pub fn new(dim: usize, alpha: Frac64) -> Result<AffineSkewMap, TorusError> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(TorusError::BadDimension(dim));
        }
        Ok(AffineSkewMap { dim, alpha })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn alpha(&self) -> Frac64 {
        self.alpha
    }

    fn check(&self, p: &TorusPoint) -> Result<(), TorusError> {
        if p.dim() != self.dim {
            return Err(TorusError::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        Ok(())
    }

    /// One application of `T`, in place. The additions run top-down so each
    /// coordinate picks up the *previous* value of its upper neighbour.
    #[inline]
    pub fn step_in_place(&self, coords: &mut [Frac64]) {
        debug_assert_eq!(coords.len(), self.dim);
        for i in (1..coords.len()).rev() {
            let prev = coords[i - 1];
            coords[i] += prev;
        }
        coords[0] += self.alpha;
    }

    pub fn step(&self, p: &TorusPoint) -> Result<TorusPoint, TorusError> {
        self.check(p)?;
        let mut coords = p.coords.clone();
        self.step_in_place(&mut coords);
        TorusPoint::new(coords)
    }

    /// One application of `T^{-1}`, in place.
    pub fn inverse_step_in_place(&self, coords: &mut [Frac64]) {
        debug_assert_eq!(coords.len(), self.dim);
        coords[0] -= self.alpha;
        for i in 1..coords.len() {
            let prev = coords[i - 1];
            coords[i] -= prev;
        }
    }

    pub fn inverse_step(&self, p: &TorusPoint) -> Result<TorusPoint, TorusError> {
        self.check(p)?;
        let mut coords = p.coords.clone();
        self.inverse_step_in_place(&mut coords);
        TorusPoint::new(coords)
    }

    /// `T^n(p)` by the closed binomial form; cost `O(n d + d^2)` for the
    /// Pascal row plus the evaluation, with no intermediate points.
    pub fn jump(&self, p: &TorusPoint, n: u64) -> Result<TorusPoint, TorusError> {
        self.check(p)?;
        let row = BinomialRow::at(n, self.dim);
        let mut out = vec![Frac64::ZERO; self.dim];
        jump_coords(self.alpha, row.coeffs(), p.coords(), &mut out);
        TorusPoint::new(out)
    }

    /// Same as [`AffineSkewMap::jump`] when the Pascal row for `n` is already
    /// at hand (streaming callers keep one and advance it incrementally).
    pub fn jump_with_row(&self, p: &TorusPoint, row: &BinomialRow) -> Result<TorusPoint, TorusError> {
        self.check(p)?;
        assert!(row.order() >= self.dim, "Pascal row too short for dimension {}", self.dim);
        let mut out = vec![Frac64::ZERO; self.dim];
        jump_coords(self.alpha, row.coeffs(), p.coords(), &mut out);
        TorusPoint::new(out)
    }

    /// The last coordinate of `T^n(p)`:
    /// `C(n,d) alpha + C(n,d-1) x_1 + ... + C(n,1) x_{d-1} + x_d` (mod 1).
    pub fn binomial_eval(&self, p: &TorusPoint, n: u64) -> Result<Frac64, TorusError> {
        Ok(self.jump(p, n)?.last())
    }

    /// The `r`-th power of the map as an affine map in its own right.
    pub fn power(&self, r: u64) -> PowerMap {
        PowerMap::new(*self, r)
    }
}

/// `T^r` in closed form: matrix `A^r = sum_k C(r, k) N^k` and translation
/// `(b_r)_i = C(r, i) alpha`, both read off one Pascal row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerMap {
    base: AffineSkewMap,
    r: u64,
    row: Vec<u64>,
}

impl PowerMap {
    fn new(base: AffineSkewMap, r: u64) -> PowerMap {
        let row = BinomialRow::at(r, base.dim);
        PowerMap { base, r, row: row.coeffs().to_vec() }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.base.dim
    }

    #[inline]
    pub fn r(&self) -> u64 {
        self.r
    }

    #[inline]
    pub fn base(&self) -> &AffineSkewMap {
        &self.base
    }

    /// `C(r, k) mod 2^64`, the matrix entry of `A^r` on the `k`-th
    /// subdiagonal, for `k <= d`.
    #[inline]
    pub fn binom(&self, k: usize) -> u64 {
        self.row[k]
    }

    /// The `i`-th coordinate (0-based) of the translation part,
    /// `C(r, i+1) alpha`.
    #[inline]
    pub fn translation(&self, i: usize) -> Frac64 {
        self.base.alpha.mul_u64(self.row[i + 1])
    }

    #[inline]
    pub fn apply_in_place(&self, cur: &[Frac64], out: &mut [Frac64]) {
        jump_coords(self.base.alpha, &self.row, cur, out);
    }

    pub fn apply(&self, p: &TorusPoint) -> Result<TorusPoint, TorusError> {
        self.base.check(p)?;
        let mut out = vec![Frac64::ZERO; self.dim()];
        self.apply_in_place(p.coords(), &mut out);
        TorusPoint::new(out)
    }
}

/// An orbit `n -> T^{n0 + k s}(p)` streamed coordinate-exactly.
///
/// `p` is the state at time 0; construction jumps to `n0` in closed form, and
/// each `next` yields the last coordinate before moving `s` steps forward
/// (single steps when `s = 1`, a precomputed [`PowerMap`] otherwise).
pub struct OrbitStream {
    map: AffineSkewMap,
    power: Option<PowerMap>,
    coords: Vec<Frac64>,
    scratch: Vec<Frac64>,
    n: u64,
}

impl OrbitStream {
    pub fn new(map: AffineSkewMap, origin: &TorusPoint, start: u64) -> Result<OrbitStream, TorusError> {
        Self::with_stride(map, origin, start, 1)
    }

    pub fn with_stride(
        map: AffineSkewMap,
        origin: &TorusPoint,
        start: u64,
        stride: u64,
    ) -> Result<OrbitStream, TorusError> {
        assert!(stride >= 1, "stride must be positive");
        let coords = map.jump(origin, start)?.coords;
        let power = (stride > 1).then(|| map.power(stride));
        let scratch = vec![Frac64::ZERO; map.dim];
        Ok(OrbitStream { map, power, coords, scratch, n: start })
    }

    /// The time index of the point currently exposed by `last_coord`.
    #[inline]
    pub fn current_n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn last_coord(&self) -> Frac64 {
        *self.coords.last().unwrap()
    }

    /// The coordinates of the current point, without copying.
    #[inline]
    pub fn point_coords(&self) -> &[Frac64] {
        &self.coords
    }

    pub fn point(&self) -> TorusPoint {
        TorusPoint { coords: self.coords.clone() }
    }

    /// Moves one stride forward.
    #[inline]
    pub fn advance(&mut self) {
        match &self.power {
            None => {
                self.map.step_in_place(&mut self.coords);
                self.n += 1;
            }
            Some(pm) => {
                pm.apply_in_place(&self.coords, &mut self.scratch);
                std::mem::swap(&mut self.coords, &mut self.scratch);
                self.n += pm.r();
            }
        }
    }
}

impl Iterator for OrbitStream {
    type Item = Frac64;

    #[inline]
    fn next(&mut self) -> Option<Frac64> {
        let out = self.last_coord();
        self.advance();
        Some(out)
    }
}

/// The phases `e^{2 pi i x_d(n)}` for `n = start, ..., start + count - 1`,
/// where `x(n) = T^n(origin)`.
pub fn phase_stream(
    map: AffineSkewMap,
    origin: &TorusPoint,
    start: u64,
    count: u64,
) -> Result<impl Iterator<Item = Complex64>, TorusError> {
    let stream = OrbitStream::new(map, origin, start)?;
    Ok(stream.take(count as usize).map(Frac64::phase))
}

/// A real polynomial `P(n) = c_0 + c_1 n + ... + c_d n^d` with exact rational
/// coefficients, `1 <= d <= 16` and `c_d != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySpec {
    coeffs: Vec<BigRational>, // ascending: coeffs[j] multiplies n^j
}

impl PolySpec {
    pub fn new(ascending: Vec<BigRational>) -> Result<PolySpec, TorusError> {
        let degree = ascending.len().saturating_sub(1);
        if ascending.len() < 2 || degree > MAX_DIM {
            return Err(TorusError::BadDegree(degree));
        }
        if ascending.last().unwrap().is_zero() {
            return Err(TorusError::ZeroLeadingCoefficient);
        }
        Ok(PolySpec { coeffs: ascending })
    }

    /// Parses comma-style token lists given *highest degree first*, the
    /// order used on the command line: `["sqrt2", "0", "0"]` is `sqrt2 n^2`.
    pub fn from_tokens<S: AsRef<str>>(highest_first: &[S]) -> Result<PolySpec, TorusError> {
        let mut coeffs = highest_first
            .iter()
            .map(|t| parse_real_token(t.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        coeffs.reverse();
        PolySpec::new(coeffs)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `n^j`.
    #[inline]
    pub fn coeff(&self, j: usize) -> &BigRational {
        &self.coeffs[j]
    }

    /// Exact evaluation by Horner's rule.
    pub fn eval(&self, n: u64) -> BigRational {
        let n = BigRational::from_integer(n.into());
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * &n + c;
        }
        acc
    }
}

/// Converts a polynomial into a skew product and starting point such that the
/// last coordinate of `T^n(p)` tracks `P(n) mod 1`.
///
/// With forward differences `D^k P(0)`, the exact identities are
/// `alpha = D^d P(0)` and `x_j = D^{d-j} P(0)` for `j = 1..d` (so
/// `x_d = P(0)`); each value is computed as an exact rational and rounded to
/// the grid once.
pub fn poly_to_initial(poly: &PolySpec) -> (AffineSkewMap, TorusPoint) {
    let d = poly.degree();
    // values P(0), P(1), ..., P(d); repeated differencing leaves D^k P(0)
    // at the front of the k-th row.
    let mut row: Vec<BigRational> = (0..=d as u64).map(|n| poly.eval(n)).collect();
    let mut diffs: Vec<BigRational> = Vec::with_capacity(d + 1);
    diffs.push(row[0].clone());
    for _ in 0..d {
        for i in 0..row.len() - 1 {
            row[i] = &row[i + 1] - &row[i];
        }
        row.pop();
        diffs.push(row[0].clone());
    }
    let alpha = Frac64::from_rational(&diffs[d]);
    let coords: Vec<Frac64> = (1..=d)
        .map(|j| Frac64::from_rational(&diffs[d - j]))
        .collect();
    let map = AffineSkewMap::new(d, alpha).expect("degree already validated");
    let point = TorusPoint::new(coords).expect("degree already validated");
    (map, point)
}
