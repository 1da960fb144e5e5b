//! Pocklington-style primality certificates with base 2.
//!
//! A certificate for `c` names a helper `a` with `a² > c > 1` and `a | c - 1`,
//! together with every distinct prime `p` dividing `a`. It holds when
//! `2^(c-1) ≡ 1 (mod c)` and `gcd(2^((c-1)/p) - 1, c) = 1` for each such `p`,
//! and every listed `p` is itself proven prime, either by trial division
//! (`p <= 10^6`) or by a nested certificate.

mod chain;

pub use chain::{
    chain_entries, read_certificate, read_chain, write_certificate, write_chain, ChainError,
};

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{factorize, is_probable_prime, primes_up_to, FactorEffort};

/// Largest prime accepted as a trial-division leaf.
pub const LEAF_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimalityCertificate {
    pub c: BigUint,
    pub a: BigUint,
    pub factors: Vec<FactorProof>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorProof {
    pub p: BigUint,
    pub justification: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    TrialDivision,
    Certificate(Box<PrimalityCertificate>),
}

/// A proof that a number is prime: either a trial-division leaf or a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Proof {
    Trial(BigUint),
    Certificate(PrimalityCertificate),
}

impl Proof {
    pub fn number(&self) -> &BigUint {
        match self {
            Proof::Trial(n) => n,
            Proof::Certificate(c) => &c.c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("c must exceed 1")]
    TrivialModulus,
    #[error("a^2 does not exceed c")]
    HelperTooSmall,
    #[error("a does not divide c - 1")]
    HelperNotDivisor,
    #[error("2^(c-1) is not 1 mod c")]
    FermatFailed,
    #[error("gcd(2^((c-1)/{0}) - 1, c) is not 1")]
    GcdCondition(BigUint),
    #[error("listed factor {0} is not a divisor of a greater than 1")]
    FactorNotDividing(BigUint),
    #[error("factor {0} is listed twice")]
    DuplicateFactor(BigUint),
    #[error("incomplete factor list: {0} of a is unaccounted for")]
    IncompleteFactors(BigUint),
    #[error("trial leaf {0} exceeds the leaf bound")]
    LeafTooLarge(BigUint),
    #[error("trial leaf {0} is not prime")]
    LeafComposite(BigUint),
    #[error("nested certificate proves {found}, expected {expected}")]
    WrongNumber { expected: BigUint, found: BigUint },
}

/// A failed verification: the violated condition and the chain of `c` values
/// leading from the root certificate to the one that failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    pub violation: Violation,
    pub path: Vec<BigUint>,
}

impl fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|c| c.to_string()).collect();
        write!(f, "{} (at {})", self.violation, path.join(" > "))
    }
}

impl std::error::Error for VerifyFailure {}

/// Whether `n` is a prime no larger than [`LEAF_BOUND`], by exhaustive division.
fn check_leaf(n: &BigUint) -> Result<(), Violation> {
    let small = match n.to_u64() {
        Some(v) if v <= LEAF_BOUND => v,
        _ => return Err(Violation::LeafTooLarge(n.clone())),
    };
    if small < 2 {
        return Err(Violation::LeafComposite(n.clone()));
    }
    for &q in primes_up_to(1000).iter() {
        if q * q > small {
            break;
        }
        if small % q == 0 {
            return Err(Violation::LeafComposite(n.clone()));
        }
    }
    Ok(())
}

pub fn verify_certificate(cert: &PrimalityCertificate) -> Result<(), VerifyFailure> {
    let mut path = Vec::new();
    verify_at(cert, &mut path)
}

pub fn verify_proof(proof: &Proof) -> Result<(), VerifyFailure> {
    match proof {
        Proof::Trial(n) => check_leaf(n).map_err(|violation| VerifyFailure {
            violation,
            path: vec![n.clone()],
        }),
        Proof::Certificate(cert) => verify_certificate(cert),
    }
}

fn verify_at(cert: &PrimalityCertificate, path: &mut Vec<BigUint>) -> Result<(), VerifyFailure> {
    path.push(cert.c.clone());
    let fail = |violation: Violation, path: &Vec<BigUint>| VerifyFailure {
        violation,
        path: path.clone(),
    };
    if let Err(v) = check_local(cert) {
        return Err(fail(v, path));
    }
    for f in &cert.factors {
        match &f.justification {
            Justification::TrialDivision => {
                if let Err(v) = check_leaf(&f.p) {
                    return Err(fail(v, path));
                }
            }
            Justification::Certificate(nested) => {
                if nested.c != f.p {
                    let v = Violation::WrongNumber {
                        expected: f.p.clone(),
                        found: nested.c.clone(),
                    };
                    return Err(fail(v, path));
                }
                verify_at(nested, path)?;
            }
        }
    }
    path.pop();
    Ok(())
}

/// The conditions on `(c, a, primes of a)` alone, without the primality of the listed primes.
fn check_local(cert: &PrimalityCertificate) -> Result<(), Violation> {
    let c = &cert.c;
    let a = &cert.a;
    if *c <= BigUint::one() {
        return Err(Violation::TrivialModulus);
    }
    if a * a <= *c {
        return Err(Violation::HelperTooSmall);
    }
    let c_minus_1 = c - 1u32;
    if !(&c_minus_1 % a).is_zero() {
        return Err(Violation::HelperNotDivisor);
    }

    let mut rest = a.clone();
    let mut seen: Vec<&BigUint> = Vec::with_capacity(cert.factors.len());
    for f in &cert.factors {
        let p = &f.p;
        if *p <= BigUint::one() || !(a % p).is_zero() {
            return Err(Violation::FactorNotDividing(p.clone()));
        }
        if seen.contains(&p) {
            return Err(Violation::DuplicateFactor(p.clone()));
        }
        seen.push(p);
        while (&rest % p).is_zero() {
            rest /= p;
        }
    }
    if !rest.is_one() {
        return Err(Violation::IncompleteFactors(rest));
    }

    let two = BigUint::from(2u32);
    if !two.modpow(&c_minus_1, c).is_one() {
        return Err(Violation::FermatFailed);
    }
    for f in &cert.factors {
        let w = two.modpow(&(&c_minus_1 / &f.p), c);
        // w = 0 is impossible once 2^(c-1) ≡ 1, so w - 1 does not underflow
        if !(w - 1u32).gcd(c).is_one() {
            return Err(Violation::GcdCondition(f.p.clone()));
        }
    }
    Ok(())
}

/// Knobs for [`build_certificate`].
#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub effort: FactorEffort,
    /// Primes at or below this are justified by trial division directly;
    /// larger primes (up to [`LEAF_BOUND`]) get a certificate when one exists.
    pub link_threshold: u64,
    /// Known prime factors of `n - 1` (or of the `p - 1` of nested links).
    pub hints: Vec<BigUint>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            effort: FactorEffort::default(),
            link_threshold: 1000,
            hints: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("{0} is not a probable prime")]
    NotProbablePrime(BigUint),
    #[error("could not reach a^2 > {n}: the largest usable helper is {reached}")]
    HelperOutOfReach { n: BigUint, reached: BigUint },
}

/// Builds a primality proof for `n`.
///
/// `n - 1` is factored (trial division, then rho within the effort budget,
/// after dividing out any hints). Prime powers are added to `a` from the
/// largest prime down, skipping primes that fail the gcd condition or cannot
/// themselves be proven, until `a² > n`.
pub fn build_certificate(n: &BigUint, opts: &BuildOptions) -> Result<Proof, BuildError> {
    if !is_probable_prime(n) {
        return Err(BuildError::NotProbablePrime(n.clone()));
    }
    let small = n.to_u64();
    if matches!(small, Some(v) if v <= opts.link_threshold) {
        return Ok(Proof::Trial(n.clone()));
    }
    match build_link(n, opts) {
        Ok(cert) => Ok(Proof::Certificate(cert)),
        Err(_) if matches!(small, Some(v) if v <= LEAF_BOUND) => Ok(Proof::Trial(n.clone())),
        Err(e) => Err(e),
    }
}

fn build_link(n: &BigUint, opts: &BuildOptions) -> Result<PrimalityCertificate, BuildError> {
    let n_minus_1 = n - 1u32;
    let two = BigUint::from(2u32);
    if !two.modpow(&n_minus_1, n).is_one() {
        return Err(BuildError::NotProbablePrime(n.clone()));
    }

    let mut primes = prime_powers(&n_minus_1, opts);
    primes.sort_by(|x, y| y.0.cmp(&x.0));

    let mut a = BigUint::one();
    let mut factors = Vec::new();
    for (p, e) in primes {
        if &a * &a > *n {
            break;
        }
        let w = two.modpow(&(&n_minus_1 / &p), n);
        if !(w - 1u32).gcd(n).is_one() {
            continue;
        }
        let justification = match build_certificate(&p, opts) {
            Ok(Proof::Trial(_)) => Justification::TrialDivision,
            Ok(Proof::Certificate(c)) => Justification::Certificate(Box::new(c)),
            Err(_) => continue,
        };
        a *= p.pow(e);
        factors.push(FactorProof { p, justification });
    }
    factors.sort_by(|x, y| x.p.cmp(&y.p));
    if &a * &a <= *n {
        return Err(BuildError::HelperOutOfReach {
            n: n.clone(),
            reached: a,
        });
    }
    Ok(PrimalityCertificate {
        c: n.clone(),
        a,
        factors,
    })
}

/// Prime powers `(p, e)` exactly dividing `m`, from hints and factorization.
/// An unfactored composite remainder is simply left out.
fn prime_powers(m: &BigUint, opts: &BuildOptions) -> Vec<(BigUint, u32)> {
    let mut rest = m.clone();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for h in &opts.hints {
        if *h <= BigUint::one() || !(&rest % h).is_zero() {
            continue;
        }
        let mut e = 0;
        while (&rest % h).is_zero() {
            rest /= h;
            e += 1;
        }
        out.push((h.clone(), e));
    }
    if rest > BigUint::one() {
        let f = factorize(&rest, opts.effort);
        out.extend(f.factors);
    }
    out
}
