use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{gcd_u64, is_probable_prime, is_probable_prime_u64, mulmod_u64, primes_up_to};

/// Budget for [`factorize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorEffort {
    /// Trial division by every prime up to this bound.
    pub trial_bound: u64,
    /// Total rho iterations (polynomial evaluations) across all cofactors.
    pub rho_iterations: u64,
}

impl Default for FactorEffort {
    fn default() -> Self {
        FactorEffort {
            trial_bound: 1_000_000,
            rho_iterations: 50_000_000,
        }
    }
}

/// A (possibly partial) factorization. When `complete` is false,
/// `cofactor` holds the composite part that could not be split in budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredNatural {
    pub n: BigUint,
    pub factors: Vec<(BigUint, u32)>,
    pub cofactor: BigUint,
    pub complete: bool,
}

impl FactoredNatural {
    /// Number of distinct prime factors found (a lower bound when incomplete).
    pub fn distinct_primes(&self) -> usize {
        self.factors.len()
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }

    fn from_parts(n: BigUint, mut found: Vec<BigUint>, leftover: Vec<BigUint>) -> Self {
        found.sort();
        let mut factors: Vec<(BigUint, u32)> = Vec::new();
        for p in found {
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
        let cofactor = leftover.iter().fold(BigUint::one(), |acc, c| acc * c);
        FactoredNatural {
            n,
            factors,
            complete: cofactor.is_one(),
            cofactor,
        }
    }
}

/// Factor `n >= 2`: trial division, then Brent's variant of Pollard rho.
/// Running out of budget is reported through `complete`, never as an error.
pub fn factorize(n: &BigUint, effort: FactorEffort) -> FactoredNatural {
    assert!(*n >= BigUint::from(2u32), "factorize needs n >= 2");
    if let Some(small) = n.to_u64() {
        return factorize_u64(small, effort);
    }
    let mut found = Vec::new();
    let mut rest = n.clone();
    for &p in primes_up_to(effort.trial_bound).iter() {
        if (&rest % p).is_zero() {
            while (&rest % p).is_zero() {
                rest /= p;
                found.push(BigUint::from(p));
            }
            if rest.is_one() {
                break;
            }
        }
    }
    let mut budget = effort.rho_iterations;
    let mut leftover = Vec::new();
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if let Some(small) = m.to_u64() {
            let sub = factorize_u64_after_trial(small, &mut budget);
            for (p, e) in sub.factors {
                for _ in 0..e {
                    found.push(p.clone());
                }
            }
            if !sub.complete {
                leftover.push(sub.cofactor);
            }
            continue;
        }
        if is_probable_prime(&m) {
            found.push(m);
            continue;
        }
        match rho_big(&m, &mut budget) {
            Some(f) => {
                let g = &m / &f;
                stack.push(f);
                stack.push(g);
            }
            None => leftover.push(m),
        }
    }
    FactoredNatural::from_parts(n.clone(), found, leftover)
}

pub fn factorize_u64(n: u64, effort: FactorEffort) -> FactoredNatural {
    assert!(n >= 2, "factorize needs n >= 2");
    let mut found = Vec::new();
    let mut rest = n;
    for &p in primes_up_to(effort.trial_bound).iter() {
        if p * p > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            while rest.is_multiple_of(p) {
                rest /= p;
                found.push(BigUint::from(p));
            }
        }
    }
    let mut budget = effort.rho_iterations;
    let sub = factorize_u64_after_trial(rest, &mut budget);
    let mut leftover = Vec::new();
    for (p, e) in sub.factors {
        for _ in 0..e {
            found.push(p.clone());
        }
    }
    if !sub.complete {
        leftover.push(sub.cofactor);
    }
    FactoredNatural::from_parts(BigUint::from(n), found, leftover)
}

fn factorize_u64_after_trial(n: u64, budget: &mut u64) -> FactoredNatural {
    let mut found = Vec::new();
    let mut leftover = Vec::new();
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_probable_prime_u64(m) {
            found.push(BigUint::from(m));
            continue;
        }
        match rho_u64(m, budget) {
            Some(f) => {
                stack.push(f);
                stack.push(m / f);
            }
            None => leftover.push(BigUint::from(m)),
        }
    }
    FactoredNatural::from_parts(BigUint::from(n.max(2)), found, leftover)
}

fn spend(budget: &mut u64, amount: u64) -> bool {
    if *budget < amount {
        *budget = 0;
        false
    } else {
        *budget -= amount;
        true
    }
}

/// Brent's cycle-finding rho with batched gcds. `n` must be composite.
fn rho_u64(n: u64, budget: &mut u64) -> Option<u64> {
    if n.is_multiple_of(2) {
        return Some(2);
    }
    let root = super::isqrt_u64(n);
    if root * root == n {
        return Some(root);
    }
    const BATCH: u64 = 128;
    for c in 1..u64::MAX {
        let f = |x: u64| ((x as u128 * x as u128 + c as u128) % n as u128) as u64;
        let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
        let mut x = y;
        let mut ys = y;
        let mut g = 1u64;
        while g == 1 {
            x = y;
            if !spend(budget, r) {
                return None;
            }
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let steps = BATCH.min(r - k);
                for _ in 0..steps {
                    y = f(y);
                    q = mulmod_u64(q, x.abs_diff(y), n);
                }
                if !spend(budget, steps) {
                    return None;
                }
                g = gcd_u64(q, n);
                k += steps;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
    }
    None
}

fn rho_big(n: &BigUint, budget: &mut u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let root = num_integer::Roots::sqrt(n);
    if &root * &root == *n {
        return Some(root);
    }
    const BATCH: u64 = 128;
    for c in 1u32.. {
        let f = |x: &BigUint| (x * x + c) % n;
        let mut y = BigUint::from(2u32);
        let mut r = 1u64;
        let mut q = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut g = BigUint::one();
        let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
        while g.is_one() {
            x = y.clone();
            if !spend(budget, r) {
                return None;
            }
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                let steps = BATCH.min(r - k);
                for _ in 0..steps {
                    y = f(&y);
                    q = (q * diff(&x, &y)) % n;
                }
                if !spend(budget, steps) {
                    return None;
                }
                g = q.gcd(n);
                k += steps;
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys);
                g = diff(&x, &ys).gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if g != *n {
            return Some(g);
        }
        if c > 64 {
            return None;
        }
    }
    None
}
