//! Prime fields `F_p` with odd `p < 2^31`.
//!
//! Scalars are plain `u32` values kept in `[0, p)`; the field value only
//! carries the modulus. All arithmetic widens to `u64`, which cannot overflow
//! for `p < 2^31`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primes used for exhaustive scans.
pub const ENUMERATION_PRIMES: [u32; 4] = [3, 5, 7, 11];
/// Primes used for sampling checks where tiny fields degenerate too often.
pub const GENERICITY_PRIMES: [u32; 3] = [101, 211, 65537];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeField {
    p: u32,
}

impl TryFrom<u32> for PrimeField {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u32 {
    fn from(f: PrimeField) -> u32 {
        f.p
    }
}

/// Deterministic trial division; `n < 2^31` keeps this under 47k steps.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if !(3..1 << 31).contains(&p) || !is_prime(p as u64) {
            return Err(Error::InvalidPrime(p as u64));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn p(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let p = self.p as u64;
        (if s >= p { s - p } else { s }) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// `a + b * c`
    #[inline]
    pub fn mul_add(self, a: u32, b: u32, c: u32) -> u32 {
        ((a as u64 + b as u64 * c as u64) % self.p as u64) as u32
    }

    pub fn pow(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1u32;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        // extended Euclid on i64
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Some(t0.rem_euclid(self.p as i64) as u32)
    }

    #[inline]
    pub fn from_i64(self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    /// Signed representative in `(-p/2, p/2]`, handy for display.
    pub fn to_signed(self, a: u32) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    pub fn dot(self, a: &[u32], b: &[u32]) -> u32 {
        debug_assert_eq!(a.len(), b.len());
        let p = self.p as u64;
        // at most 4 products of (p-1)^2 < 2^62 fit before reducing
        let mut acc = 0u64;
        for (chunk_a, chunk_b) in a.chunks(4).zip(b.chunks(4)) {
            let mut s = 0u64;
            for (&x, &y) in chunk_a.iter().zip(chunk_b) {
                s += x as u64 * y as u64;
            }
            acc = (acc + s % p) % p;
        }
        acc as u32
    }

    /// Number of points of `P^{n-1}(F_p)`.
    pub fn projective_count(self, n: usize) -> u64 {
        let p = self.p as u64;
        (0..n as u32).map(|i| p.pow(i)).sum()
    }
}
