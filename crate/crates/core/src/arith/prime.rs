//! Baillie-PSW probable-prime screening: trial division by small primes, a
//! strong Fermat test to base 2, then a strong Lucas test with Selfridge's
//! parameters. Primes always pass. These are screens only; proofs of
//! primality come from the `certify` module.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{jacobi, mulmod_u64, powmod_u64};

const SMALL_PRIMES: [u64; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];

pub fn is_probable_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 53 * 53 {
        return true;
    }
    strong_fermat_base2_u64(n) && strong_lucas_u64(n)
}

fn strong_fermat_base2_u64(n: u64) -> bool {
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = powmod_u64(2, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mulmod_u64(x, x, n);
        if x == n - 1 {
            return true;
        }
        if x == 1 {
            return false;
        }
    }
    false
}

/// Selfridge method A: first D in 5, -7, 9, -11, ... with (D/n) = -1.
/// Returns `None` when n is detected composite along the way.
fn selfridge_d(n: u128) -> Option<i128> {
    let mut d: i128 = 5;
    loop {
        let a = d.rem_euclid(n as i128) as u128;
        match jacobi(a, n) {
            -1 => return Some(d),
            0 if d.unsigned_abs() != n => return None,
            _ => {}
        }
        d = if d > 0 { -(d + 2) } else { -d + 2 };
        if d.unsigned_abs() == 17 && super::isqrt_u128(n).pow(2) == n {
            // perfect squares never yield (D/n) = -1
            return None;
        }
    }
}

fn strong_lucas_u64(n: u64) -> bool {
    let d = match selfridge_d(n as u128) {
        Some(d) => d,
        None => return false,
    };
    let nn = n as u128;
    let m = |x: u128| x % nn;
    let d_mod = d.rem_euclid(nn as i128) as u128;
    // P = 1, Q = (1 - D) / 4
    let q = ((1 - d) / 4).rem_euclid(nn as i128) as u128;
    let half = |x: u128| if x.is_multiple_of(2) { x / 2 } else { (x + nn) / 2 };

    let k = nn + 1;
    let s = k.trailing_zeros();
    let odd = k >> s;

    let (mut u, mut v, mut qk) = (0u128, 2u128, 1u128);
    let bits = 128 - odd.leading_zeros();
    for i in (0..bits).rev() {
        // doubling: U_2k = U_k V_k, V_2k = V_k^2 - 2 Q^k
        u = m(u * v);
        v = m(m(v * v) + nn * 2 - m(2 * qk));
        qk = m(qk * qk);
        if (odd >> i) & 1 == 1 {
            // increment: U_{k+1} = (U + V)/2, V_{k+1} = (D U + V)/2
            let nu = half(m(u + v));
            let nv = half(m(m(d_mod * u) + v));
            u = nu;
            v = nv;
            qk = m(qk * q);
        }
    }
    if u == 0 || v == 0 {
        return true;
    }
    for _ in 1..s {
        v = m(m(v * v) + nn * 2 - m(2 * qk));
        if v == 0 {
            return true;
        }
        qk = m(qk * qk);
    }
    false
}

/// Probable-prime screen over naturals. Delegates to the `u64` path when it fits.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Ok(small) = u64::try_from(n) {
        return is_probable_prime_u64(small);
    }
    for &p in &SMALL_PRIMES {
        if (n % p).is_zero() {
            return false;
        }
    }
    strong_fermat_base2_big(n) && strong_lucas_big(n)
}

fn strong_fermat_base2_big(n: &BigUint) -> bool {
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let mut x = BigUint::from(2u32).modpow(&d, n);
    if x.is_one() || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

fn jacobi_big(a: &BigInt, n: &BigUint) -> i8 {
    let n_int = BigInt::from_biguint(Sign::Plus, n.clone());
    let mut a = a.mod_floor(&n_int).to_biguint().expect("nonnegative");
    let mut n = n.clone();
    let mut sign = 1i8;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        a >>= tz;
        let n8 = (&n % 8u32).to_u32_digits().first().copied().unwrap_or(0);
        if tz % 2 == 1 && (n8 == 3 || n8 == 5) {
            sign = -sign;
        }
        let a4 = (&a % 4u32).to_u32_digits().first().copied().unwrap_or(0);
        if a4 == 3 && n8 % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        a %= &n;
    }
    if n.is_one() {
        sign
    } else {
        0
    }
}

fn strong_lucas_big(n: &BigUint) -> bool {
    let root = n.sqrt();
    if &root * &root == *n {
        return false;
    }
    let n_int = BigInt::from_biguint(Sign::Plus, n.clone());
    let mut d = BigInt::from(5);
    loop {
        match jacobi_big(&d, n) {
            -1 => break,
            0 => return false,
            _ => {}
        }
        d = if d.sign() == Sign::Plus {
            -(d + 2u32)
        } else {
            -d + 2u32
        };
    }
    let reduce = |x: BigInt| x.mod_floor(&n_int);
    let half = |x: BigInt| {
        if x.is_even() {
            x >> 1
        } else {
            (x + &n_int) >> 1
        }
    };
    let q = reduce((BigInt::one() - &d) / 4);
    let d_mod = reduce(d);

    let k = n + 1u32;
    let s = k.trailing_zeros().unwrap_or(0);
    let odd = &k >> s;

    let mut u = BigInt::zero();
    let mut v = BigInt::from(2);
    let mut qk = BigInt::one();
    for i in (0..odd.bits()).rev() {
        u = reduce(&u * &v);
        v = reduce(&v * &v - (&qk << 1));
        qk = reduce(&qk * &qk);
        if odd.bit(i) {
            let nu = half(reduce(&u + &v));
            let nv = half(reduce(&d_mod * &u + &v));
            u = nu;
            v = nv;
            qk = reduce(&qk * &q);
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = reduce(&v * &v - (&qk << 1));
        if v.is_zero() {
            return true;
        }
        qk = reduce(&qk * &qk);
    }
    false
}
