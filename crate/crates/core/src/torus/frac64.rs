//! 64-bit fixed-point arithmetic on the unit circle.
//!
//! A [`Frac64`] stores `raw / 2^64` in `[0, 1)`. Addition is `u64` wrapping
//! addition, which is *exactly* addition mod 1 on this grid; likewise
//! multiplication by an integer. The only operations that round are the
//! constructors (`from_rational`, `from_f64`) and the conversion to `f64`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive};
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

/// A point of the circle `R/Z`, represented on the dyadic grid `2^-64 Z / Z`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Frac64(u64);

impl Frac64 {
    pub const ZERO: Frac64 = Frac64(0);
    pub const HALF: Frac64 = Frac64(1 << 63);

    /// Wraps an already-scaled numerator: the value is `raw / 2^64`.
    #[inline]
    pub const fn from_raw(raw: u64) -> Frac64 {
        Frac64(raw)
    }

    #[inline]
    pub const fn raw(self) -> u64 {
        self.0
    }

    /// Rounds a rational to the nearest grid point of its fractional part
    /// (ties away from zero), wrapping `2^64` back to `0`.
    pub fn from_rational(x: &BigRational) -> Frac64 {
        let frac = x - x.floor();
        let scaled = frac * BigRational::from_integer(BigInt::one() << 64u32);
        let rounded = scaled.round().to_integer();
        // `frac` is in [0, 1), so `rounded` is in [0, 2^64]; the top end wraps.
        let raw = (&rounded & &BigInt::from(u64::MAX)).to_u64().unwrap();
        Frac64(if rounded.bits() > 64 { 0 } else { raw })
    }

    /// Rounds the fractional part of an `f64` to the grid.
    pub fn from_f64(x: f64) -> Frac64 {
        let frac = x.rem_euclid(1.0);
        let scaled = (frac * 1.8446744073709552e19).round();
        if scaled >= 1.8446744073709552e19 {
            Frac64(0)
        } else {
            Frac64(scaled as u64)
        }
    }

    /// The representative in `[0, 1)`, rounded to `f64`.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 1.8446744073709552e19
    }

    /// Exact multiplication by an unsigned integer (mod 1).
    #[inline]
    pub fn mul_u64(self, k: u64) -> Frac64 {
        Frac64(self.0.wrapping_mul(k))
    }

    /// Exact multiplication by a signed integer (mod 1).
    #[inline]
    pub fn mul_i64(self, k: i64) -> Frac64 {
        Frac64(self.0.wrapping_mul(k as u64))
    }

    /// Distance to the nearest integer, `|| x ||`, as an `f64`.
    pub fn norm(self) -> f64 {
        let down = self.0;
        let up = self.0.wrapping_neg();
        down.min(up) as f64 / 1.8446744073709552e19
    }

    /// `e^{2 pi i x}` evaluated in double precision. The argument
    /// `2 pi * (raw / 2^64)` is formed once; no other float arithmetic
    /// touches the orbit computation.
    pub fn phase(self) -> num::complex::Complex64 {
        let theta = std::f64::consts::TAU * self.to_f64();
        num::complex::Complex64::new(theta.cos(), theta.sin())
    }
}

impl Add for Frac64 {
    type Output = Frac64;
    #[inline]
    fn add(self, rhs: Frac64) -> Frac64 {
        Frac64(self.0.wrapping_add(rhs.0))
    }
}

impl AddAssign for Frac64 {
    #[inline]
    fn add_assign(&mut self, rhs: Frac64) {
        self.0 = self.0.wrapping_add(rhs.0);
    }
}

impl Sub for Frac64 {
    type Output = Frac64;
    #[inline]
    fn sub(self, rhs: Frac64) -> Frac64 {
        Frac64(self.0.wrapping_sub(rhs.0))
    }
}

impl SubAssign for Frac64 {
    #[inline]
    fn sub_assign(&mut self, rhs: Frac64) {
        self.0 = self.0.wrapping_sub(rhs.0);
    }
}

impl Neg for Frac64 {
    type Output = Frac64;
    #[inline]
    fn neg(self) -> Frac64 {
        Frac64(self.0.wrapping_neg())
    }
}

impl fmt::Debug for Frac64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frac64({:#018x} ~ {:.6})", self.0, self.to_f64())
    }
}

impl fmt::Display for Frac64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}
