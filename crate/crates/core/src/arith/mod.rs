//! Integer primitives shared by the rest of the crate.
//!
//! Two tiers live side by side here. The `*_u64` functions are the fixed-width
//! fast path used in hot loops (all intermediates fit in `u128`). The
//! [`Natural`]-based functions are exact and unbounded, and are used by the
//! unit reconstruction, certificate, and witness code.

mod bernoulli;
mod factor;
mod prime;
mod sieve;

pub use bernoulli::bernoulli_half_mod_p;
pub use factor::{factorize, factorize_u64, FactorEffort, FactoredNatural};
pub use prime::{is_probable_prime, is_probable_prime_u64};
pub use sieve::{
    is_squarefree, primes_up_to, segmented_primes, segmented_squarefree, SegmentBitmap,
    MAX_SEGMENT,
};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

/// Arbitrary-precision nonnegative integer.
pub type Natural = BigUint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not congruent to 1 mod 4")]
    NotOneModFour(u64),
    #[error("{0} is outside the supported range ({1})")]
    OutOfRange(u64, &'static str),
    #[error("power sum for p = {0} is not divisible by p")]
    PowerSumNotDivisible(u64),
}

/// A residue class `value mod modulus` with `0 <= value < modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Residue {
    value: Natural,
    modulus: Natural,
}

impl Residue {
    pub fn new(value: Natural, modulus: Natural) -> Result<Self, ArithError> {
        if modulus < BigUint::from(2u32) {
            return Err(ArithError::ModulusTooSmall(modulus.to_string()));
        }
        let value = value % &modulus;
        Ok(Residue { value, modulus })
    }

    pub fn value(&self) -> &Natural {
        &self.value
    }

    pub fn modulus(&self) -> &Natural {
        &self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }
}

/// Floor of the square root: the `r` with `r^2 <= n < (r+1)^2`.
pub fn isqrt(n: &Natural) -> Natural {
    n.sqrt()
}

pub fn isqrt_u64(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while (r as u128) * (r as u128) > n as u128 {
        r -= 1;
    }
    while ((r + 1) as u128) * ((r + 1) as u128) <= n as u128 {
        r += 1;
    }
    r
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut r = ((n as f64).sqrt() as u128).max(1);
    // One Newton step from any positive start lands at or above the root;
    // from there the iteration decreases monotonically.
    r = (r + n / r) / 2;
    loop {
        let next = (r + n / r) / 2;
        if next >= r {
            break;
        }
        r = next;
    }
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

pub fn is_square_u64(n: u64) -> bool {
    let r = isqrt_u64(n);
    r * r == n
}

/// `base^exp mod m` over naturals, by square-and-multiply.
pub fn modpow(base: &Natural, exp: &Natural, m: &Natural) -> Result<Residue, ArithError> {
    if *m < BigUint::from(2u32) {
        return Err(ArithError::ModulusTooSmall(m.to_string()));
    }
    let value = base.modpow(exp, m);
    Ok(Residue {
        value,
        modulus: m.clone(),
    })
}

#[inline]
pub fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod_u64(base: u64, mut exp: u64, m: u64) -> u64 {
    debug_assert!(m >= 1);
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mulmod_u64(result, b, m);
        }
        b = mulmod_u64(b, b, m);
        exp >>= 1;
    }
    result
}

pub fn gcd(a: &Natural, b: &Natural) -> Natural {
    a.gcd(b)
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(mut a: u128, mut n: u128) -> i8 {
    debug_assert!(n % 2 == 1);
    a %= n;
    let mut sign = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Kronecker symbol `(a/b)`, defined for every pair of integers.
pub fn kronecker(a: i64, b: i64) -> i8 {
    let a = a as i128;
    let mut b = b as i128;
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut sign = 1i8;
    if b < 0 {
        b = -b;
        if a < 0 {
            sign = -sign;
        }
    }
    let tz = b.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            sign = -sign;
        }
        b >>= tz;
    }
    let a_mod = a.rem_euclid(b) as u128;
    sign * jacobi(a_mod, b as u128)
}

/// `n` is powerful when every prime divisor occurs at least squared.
pub fn is_powerful(n: u64) -> bool {
    if n <= 1 {
        return true;
    }
    let mut m = n;
    let cube_root = icbrt_u64(n);
    for &p in primes_up_to(cube_root.max(2)).iter() {
        if p > cube_root {
            break;
        }
        if m.is_multiple_of(p) {
            m /= p;
            if !m.is_multiple_of(p) {
                return false;
            }
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
    }
    // Every remaining prime factor exceeds n^(1/3), so at most two remain.
    m == 1 || is_square_u64(m)
}

pub fn icbrt_u64(n: u64) -> u64 {
    let mut r = (n as f64).cbrt() as u64;
    while (r as u128).pow(3) > n as u128 {
        r -= 1;
    }
    while ((r + 1) as u128).pow(3) <= n as u128 {
        r += 1;
    }
    r
}

/// Number of decimal digits of `n` (with `0` having one digit).
pub fn decimal_digits(n: &Natural) -> u64 {
    if n.is_zero() {
        return 1;
    }
    let bits = n.bits();
    // 10^k <= n < 10^(k+1); the estimate is within one of k+1.
    let estimate = ((bits - 1) as f64 * std::f64::consts::LOG10_2).floor() as u64 + 1;
    let ten = BigUint::from(10u32);
    if *n >= ten.pow(estimate as u32) {
        estimate + 1
    } else {
        estimate
    }
}
