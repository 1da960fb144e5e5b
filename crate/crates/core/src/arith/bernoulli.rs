use super::{is_probable_prime_u64, powmod_u64, ArithError};

/// Above this bound the power sum is computed with one exponentiation per
/// term instead of the multiplicative table.
const TABLE_LIMIT: u64 = 1 << 24;

/// `B_{(p-1)/2} mod p` for a prime `p ≡ 1 (mod 4)`, `p >= 13`.
///
/// With `n = (p-1)/2` even and `p - 1 ∤ n`, the power sum satisfies
/// `sum_{a=1}^{p-1} a^n ≡ p·B_n (mod p^2)`, so the residue is that sum
/// (taken mod `p^2`) divided by `p`.
pub fn bernoulli_half_mod_p(p: u64) -> Result<u64, ArithError> {
    if p < 13 {
        return Err(ArithError::OutOfRange(p, "p >= 13"));
    }
    if p >= 1 << 32 {
        return Err(ArithError::OutOfRange(p, "p < 2^32"));
    }
    if !is_probable_prime_u64(p) {
        return Err(ArithError::NotPrime(p));
    }
    if p % 4 != 1 {
        return Err(ArithError::NotOneModFour(p));
    }
    let n = (p - 1) / 2;
    let p2 = p * p;
    let sum = if p <= TABLE_LIMIT {
        power_sum_table(p, n, p2)
    } else {
        (1..p).fold(0u64, |acc, a| add_mod(acc, powmod_u64(a, n, p2), p2))
    };
    if sum % p != 0 {
        return Err(ArithError::PowerSumNotDivisible(p));
    }
    Ok(sum / p)
}

fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

/// `a -> a^n mod m` is completely multiplicative, so only prime bases need
/// an exponentiation; composites reuse their smallest-prime-factor split.
fn power_sum_table(p: u64, n: u64, m: u64) -> u64 {
    let len = p as usize;
    let mut spf = vec![0u32; len];
    let mut value = vec![0u64; len];
    let mut sum = 0u64;
    if len > 1 {
        value[1] = 1;
        sum = 1;
    }
    for a in 2..len {
        if spf[a] == 0 {
            spf[a] = a as u32;
            let mut j = a.saturating_mul(a);
            while j < len {
                if spf[j] == 0 {
                    spf[j] = a as u32;
                }
                j += a;
            }
            value[a] = powmod_u64(a as u64, n, m);
        } else {
            let q = spf[a] as usize;
            value[a] = super::mulmod_u64(value[q], value[a / q], m);
        }
        sum = add_mod(sum, value[a], m);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Signed, ToPrimitive, Zero};

    /// Exact Bernoulli numbers B_0..=B_max from sum_{j=0}^{n} C(n+1, j) B_j = 0.
    fn bernoulli_exact(max: usize) -> Vec<BigRational> {
        let mut row: Vec<BigInt> = vec![BigInt::one(), BigInt::one()];
        let mut b: Vec<BigRational> = vec![BigRational::one()];
        for n in 1..=max {
            // row becomes C(n+1, j) for j = 0..=n+1
            let mut next = vec![BigInt::one(); row.len() + 1];
            for j in 1..row.len() {
                next[j] = &row[j - 1] + &row[j];
            }
            row = next;
            let mut acc = BigRational::zero();
            for (j, bj) in b.iter().enumerate() {
                acc += BigRational::from_integer(row[j].clone()) * bj;
            }
            b.push(-acc / BigRational::from_integer(row[n].clone()));
        }
        b
    }

    fn reduce_mod(q: &BigRational, p: u64) -> u64 {
        let pm = BigInt::from(p);
        let num = ((q.numer() % &pm) + &pm) % &pm;
        let den = ((q.denom() % &pm) + &pm) % &pm;
        assert!(!den.is_zero(), "denominator divisible by p");
        let den_u = den.to_u64().unwrap();
        let inv = powmod_u64(den_u, p - 2, p);
        (num.abs().to_u64().unwrap() as u128 * inv as u128 % p as u128) as u64
    }

    #[test]
    fn oracle_sanity() {
        let b = bernoulli_exact(8);
        assert_eq!(b[1], BigRational::new((-1).into(), 2.into()));
        assert_eq!(b[2], BigRational::new(1.into(), 6.into()));
        assert_eq!(b[6], BigRational::new(1.into(), 42.into()));
        assert_eq!(b[8], BigRational::new((-1).into(), 30.into()));
    }

    #[test]
    fn small_examples() {
        assert_eq!(bernoulli_half_mod_p(13).unwrap(), 9);
        // B_8 = -1/30; -30^{-1} mod 17
        let b = bernoulli_exact(14);
        assert_eq!(bernoulli_half_mod_p(17).unwrap(), reduce_mod(&b[8], 17));
        assert_eq!(bernoulli_half_mod_p(29).unwrap(), reduce_mod(&b[14], 29));
        assert_ne!(bernoulli_half_mod_p(29).unwrap(), 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(bernoulli_half_mod_p(5), Err(ArithError::OutOfRange(5, "p >= 13")));
        assert_eq!(bernoulli_half_mod_p(19), Err(ArithError::NotOneModFour(19)));
        assert_eq!(bernoulli_half_mod_p(21), Err(ArithError::NotPrime(21)));
    }

    #[test]
    fn matches_recurrence_oracle_up_to_500() {
        let b = bernoulli_exact(250);
        for &p in primes_up_to(500).iter().filter(|&&p| p >= 13 && p % 4 == 1) {
            let n = ((p - 1) / 2) as usize;
            assert_eq!(bernoulli_half_mod_p(p).unwrap(), reduce_mod(&b[n], p), "p={p}");
        }
    }

    #[test]
    fn table_and_direct_paths_agree() {
        for p in [10009u64, 10037, 65537] {
            let n = (p - 1) / 2;
            let m = p * p;
            let direct = (1..p).fold(0u64, |acc, a| (acc + powmod_u64(a, n, m)) % m);
            assert_eq!(power_sum_table(p, n, m), direct, "p={p}");
        }
    }
}
