//! Binomial coefficients mod 2^64 via the Pascal recurrence.
//!
//! Orbit jump-ahead needs `C(n, 0..=d) mod 2^64` for `n` up to about 10^7 and
//! `d <= 16`. Factorial formulas lose the 2-adic information (the factorials
//! overflow and are even), so the row is maintained incrementally: one
//! [`BinomialRow::advance`] costs `d` wrapping additions, and streaming code
//! pays O(d) per step instead of recomputing a row from scratch.

/// The row `C(n, 0), C(n, 1), ..., C(n, order)` reduced mod 2^64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinomialRow {
    n: u64,
    coeffs: Vec<u64>,
}

impl BinomialRow {
    /// Starts at `n = 0`: the row `1, 0, 0, ...`.
    pub fn new(order: usize) -> BinomialRow {
        let mut coeffs = vec![0u64; order + 1];
        coeffs[0] = 1;
        BinomialRow { n: 0, coeffs }
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `C(n, j) mod 2^64` for `j <= order`.
    #[inline]
    pub fn coeff(&self, j: usize) -> u64 {
        self.coeffs[j]
    }

    #[inline]
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Pascal step `n -> n + 1`: `C(n+1, j) = C(n, j) + C(n, j-1)`, updated
    /// right-to-left so the row can be rewritten in place.
    #[inline]
    pub fn advance(&mut self) {
        for j in (1..self.coeffs.len()).rev() {
            self.coeffs[j] = self.coeffs[j].wrapping_add(self.coeffs[j - 1]);
        }
        self.n += 1;
    }

    /// Advances to row `n`; `n` must not lie behind the current row.
    pub fn advance_to(&mut self, n: u64) {
        assert!(n >= self.n, "binomial row cannot move backwards ({} -> {})", self.n, n);
        while self.n < n {
            self.advance();
        }
    }

    /// Convenience constructor for a single row.
    pub fn at(n: u64, order: usize) -> BinomialRow {
        let mut row = BinomialRow::new(order);
        row.advance_to(n);
        row
    }
}
