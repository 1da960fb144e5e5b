//! Continued fractions of `ω`, where `ω = √d` for `d ≡ 2, 3 (mod 4)` and
//! `ω = (1 + √d)/2` for `d ≡ 1 (mod 4)`.
//!
//! A complete quotient is kept as `(P + √D)/Q` ([`SurdState`]). One step
//! emits the partial quotient `k = ⌊(⌊√D⌋ + P)/Q⌋` and moves to
//! `P' = kQ - P`, `Q' = (D - P'^2)/Q`. The last partial quotient of the period
//! is known in advance (`2⌊√d⌋` or `2a₀ - 1`), so the expansion stops the first
//! time that value is emitted. The convergent denominators `q_{ℓ-1}` and
//! numerators `p_{ℓ-1}` collected up to that point give the fundamental unit.
//!
//! Three entry points share the same step function:
//! [`y_mod`]/[`unit_mod`] track convergents modulo `m` in fixed width,
//! [`fundamental_unit`] rebuilds the exact unit with a balanced product tree,
//! and [`partial_quotients`] just lists the quotients.

mod tree;

pub use tree::{convergents_naive, convergents_tree, product_matrix, Mat2};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{isqrt_u64, mulmod_u64};

/// Default cap on continued-fraction steps per radicand.
pub const DEFAULT_STEP_BUDGET: u64 = 1 << 35;

/// Radicands must stay below this so that `P'^2`, `kQ` and the mod-`m`
/// products fit in fixed-width registers (`P, Q <= 2√d < 2^32`).
pub const MAX_RADICAND: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfError {
    #[error("{0} is a perfect square")]
    PerfectSquare(u64),
    #[error("radicand {0} is outside [2, 2^62)")]
    RadicandOutOfRange(u64),
    #[error("modulus must be at least 2")]
    ModulusTooSmall,
    #[error("modulus {0} is even")]
    EvenModulus(u64),
    #[error("corrupted surd state (Q={q}, P={p}, D={d})")]
    CorruptState { q: u64, p: u64, d: u64 },
    #[error("step budget of {budget} exhausted for d = {d}")]
    StepBudgetExceeded { d: u64, budget: u64 },
}

/// Sign of the norm of the fundamental unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Norm {
    #[serde(rename = "1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Norm {
    pub fn from_period(period: u64) -> Norm {
        if period.is_multiple_of(2) {
            Norm::Plus
        } else {
            Norm::Minus
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Norm::Plus => 1,
            Norm::Minus => -1,
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::Plus => "1",
            Norm::Minus => "-1",
        })
    }
}

/// Complete quotient `(p + √d)/q` with `root = ⌊√d⌋` cached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SurdState {
    pub q: u64,
    pub p: u64,
    pub d: u64,
    pub root: u64,
}

impl SurdState {
    /// One step of the expansion: returns the successor and the emitted partial quotient.
    #[inline]
    pub fn step(&self) -> Result<(SurdState, u64), CfError> {
        let SurdState { q, p, d, root } = *self;
        let corrupt = || CfError::CorruptState { q, p, d };
        if q == 0 {
            return Err(corrupt());
        }
        let k = (root + p) / q;
        let p_next = (k * q).checked_sub(p).ok_or_else(corrupt)?;
        let num = d.checked_sub(p_next * p_next).ok_or_else(corrupt)?;
        let q_next = num / q;
        if q_next * q != num || q_next == 0 {
            return Err(corrupt());
        }
        Ok((
            SurdState {
                q: q_next,
                p: p_next,
                d,
                root,
            },
            k,
        ))
    }

    /// `Q | D - P^2` and, after the first step, `0 < P <= root`, `0 < Q <= 2 root`.
    pub fn is_reduced(&self) -> bool {
        self.q > 0
            && self.p <= self.root
            && (self.d - self.p * self.p).is_multiple_of(self.q)
            && self.p > 0
            && self.q <= 2 * self.root
    }
}

pub fn cf_step(s: &SurdState) -> Result<(SurdState, u64), CfError> {
    s.step()
}

fn check_radicand(d: u64) -> Result<u64, CfError> {
    if !(2..MAX_RADICAND).contains(&d) {
        return Err(CfError::RadicandOutOfRange(d));
    }
    let root = isqrt_u64(d);
    if root * root == d {
        return Err(CfError::PerfectSquare(d));
    }
    Ok(root)
}

/// Starting state for `ω` and the terminal partial quotient `e` of its period.
pub fn initial_state(d: u64) -> Result<(SurdState, u64), CfError> {
    let root = check_radicand(d)?;
    if d % 4 == 1 {
        let e = 2 * root.div_ceil(2) - 1;
        Ok((SurdState { q: 2, p: 1, d, root }, e))
    } else {
        Ok((SurdState { q: 1, p: 0, d, root }, 2 * root))
    }
}

/// Runs the expansion of `ω` and calls `visit(k)` for `a₀, a₁, …, a_{ℓ-1}`.
/// Returns the period length `ℓ` (number of visited quotients).
fn walk_period(
    d: u64,
    budget: u64,
    mut visit: impl FnMut(u64),
) -> Result<u64, CfError> {
    let (mut state, e) = initial_state(d)?;
    let (next, mut k) = state.step()?;
    state = next;
    let mut steps = 0u64;
    while k != e {
        if steps == budget {
            return Err(CfError::StepBudgetExceeded { d, budget });
        }
        visit(k);
        steps += 1;
        let (next, k_next) = state.step()?;
        debug_assert!(next.is_reduced(), "{next:?}");
        state = next;
        k = k_next;
    }
    Ok(steps)
}

/// Partial quotients `a₀, …, a_{ℓ-1}` of `ω` (the terminal quotient is omitted).
pub fn partial_quotients(d: u64, budget: u64) -> Result<Vec<u32>, CfError> {
    if d == 5 {
        return Ok(vec![1]);
    }
    let mut out = Vec::new();
    walk_period(d, budget, |k| out.push(k as u32))?;
    Ok(out)
}

/// Convergent numerators and denominators modulo `m`, plus the parity of the denominators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentTracker {
    modulus: u64,
    /// (p_{j-1}, p_j) mod m
    num: (u64, u64),
    /// (q_{j-1}, q_j) mod m
    den: (u64, u64),
    den_parity: (u64, u64),
}

impl ConvergentTracker {
    pub fn new(modulus: u64) -> Self {
        ConvergentTracker {
            modulus,
            num: (0, 1 % modulus),
            den: (1 % modulus, 0),
            den_parity: (1, 0),
        }
    }

    #[inline]
    pub fn push(&mut self, k: u64) {
        let m = self.modulus;
        let k_red = k % m;
        let advance = |(prev, cur): (u64, u64)| {
            let next = ((mulmod_u64(cur, k_red, m) as u128 + prev as u128) % m as u128) as u64;
            (cur, next)
        };
        self.num = advance(self.num);
        self.den = advance(self.den);
        let (pp, pc) = self.den_parity;
        self.den_parity = (pc, ((k & 1) & pc) ^ pp);
    }

    pub fn numerator(&self) -> u64 {
        self.num.1
    }

    pub fn denominator(&self) -> u64 {
        self.den.1
    }

    pub fn denominator_parity(&self) -> u64 {
        self.den_parity.1
    }
}

/// `x mod m`, `y mod m`, parity of `y`, period and norm of `ε = x + yω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitResidue {
    pub d: u64,
    pub modulus: u64,
    pub x: u64,
    pub y: u64,
    pub y_parity: u64,
    pub period: u64,
    pub norm: Norm,
}

/// The fundamental unit of `ℤ[ω]` reduced modulo `m`, computed in fixed width.
pub fn unit_mod(d: u64, m: u64, budget: u64) -> Result<UnitResidue, CfError> {
    if m < 2 {
        return Err(CfError::ModulusTooSmall);
    }
    if d == 5 {
        check_radicand(d)?;
        // a₀ = e = 1 for d = 5, so the loop would exit before any update; ε = ω.
        return Ok(UnitResidue {
            d,
            modulus: m,
            x: 0,
            y: 1 % m,
            y_parity: 1,
            period: 1,
            norm: Norm::Minus,
        });
    }
    let mut tracker = ConvergentTracker::new(m);
    let period = walk_period(d, budget, |k| tracker.push(k))?;
    let y = tracker.denominator();
    let x = if d % 4 == 1 {
        (tracker.numerator() + m - y) % m
    } else {
        tracker.numerator()
    };
    Ok(UnitResidue {
        d,
        modulus: m,
        x,
        y,
        y_parity: tracker.denominator_parity(),
        period,
        norm: Norm::from_period(period),
    })
}

/// `(y mod m, ℓ, N(ε))`.
pub fn y_mod(d: u64, m: u64, budget: u64) -> Result<(u64, u64, Norm), CfError> {
    let r = unit_mod(d, m, budget)?;
    Ok((r.y, r.period, r.norm))
}

/// Exact fundamental unit `ε = x + yω > 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalUnit {
    pub d: u64,
    pub x: BigUint,
    pub y: BigUint,
    pub norm: Norm,
    pub period: u64,
}

impl FundamentalUnit {
    /// Exact norm `x^2 + xy - y^2 (d-1)/4` or `x^2 - d y^2`.
    pub fn norm_form(&self) -> BigInt {
        let x = BigInt::from(self.x.clone());
        let y = BigInt::from(self.y.clone());
        if self.d % 4 == 1 {
            &x * &x + &x * &y - &y * &y * BigInt::from((self.d - 1) / 4)
        } else {
            &x * &x - &y * &y * BigInt::from(self.d)
        }
    }

    pub fn norm_form_matches(&self) -> bool {
        self.norm_form() == BigInt::from(self.norm.as_i8())
    }

    /// `(X, Y)` with `ε' = X + Y√d` the least power of `ε` lying in `ℤ[√d]`.
    pub fn sqrt_d_power(&self) -> (BigUint, BigUint, u32) {
        if self.d % 4 != 1 {
            return (self.x.clone(), self.y.clone(), 1);
        }
        let two = BigUint::from(2u32);
        if (&self.y % &two).is_zero() {
            // x + y(1+√d)/2 = (x + y/2) + (y/2)√d
            let half = &self.y / &two;
            return (&self.x + &half, half, 1);
        }
        let c = BigUint::from((self.d - 1) / 4);
        let (x3, y3) = cube_exact(&self.x, &self.y, &c);
        // y3 is even whenever the cube lies in ℤ[√d]
        let half = &y3 / &two;
        (x3 + &half, half, 3)
    }

    /// Whether `d | Y`, computed from the exact unit.
    pub fn d_divides_big_y(&self) -> bool {
        let (_, big_y, _) = self.sqrt_d_power();
        (big_y % self.d).is_zero()
    }
}

fn cube_exact(x: &BigUint, y: &BigUint, c: &BigUint) -> (BigUint, BigUint) {
    // (a + bω)(e + fω) = (ae + c·bf) + (af + be + bf)ω with ω^2 = ω + c
    let mul = |a: &BigUint, b: &BigUint, e: &BigUint, f: &BigUint| {
        let bf = b * f;
        (a * e + c * &bf, a * f + b * e + bf)
    };
    let (x2, y2) = mul(x, y, x, y);
    mul(&x2, &y2, x, y)
}

/// Exact fundamental unit from the convergents `p_{ℓ-1}`, `q_{ℓ-1}`.
pub fn fundamental_unit(d: u64, budget: u64) -> Result<FundamentalUnit, CfError> {
    if d == 5 {
        check_radicand(d)?;
        return Ok(FundamentalUnit {
            d,
            x: BigUint::zero(),
            y: BigUint::one(),
            norm: Norm::Minus,
            period: 1,
        });
    }
    let quotients = partial_quotients(d, budget)?;
    let period = quotients.len() as u64;
    let (p, q) = convergents_tree(&quotients);
    let x = if d % 4 == 1 { p - &q } else { p };
    Ok(FundamentalUnit {
        d,
        x,
        y: q,
        norm: Norm::from_period(period),
        period,
    })
}

/// Coefficients of `ε^3 = x₃ + y₃ω` modulo an odd `m`.
pub fn unit_cube_mod(x: u64, y: u64, d: u64, m: u64) -> Result<(u64, u64), CfError> {
    if m < 2 {
        return Err(CfError::ModulusTooSmall);
    }
    if m.is_multiple_of(2) {
        return Err(CfError::EvenModulus(m));
    }
    let (x, y) = (x % m, y % m);
    let add = |a: u64, b: u64| ((a as u128 + b as u128) % m as u128) as u64;
    let mul = |a: u64, b: u64| mulmod_u64(a, b, m);
    let product = |(a, b): (u64, u64), (e, f): (u64, u64)| -> (u64, u64) {
        if d % 4 == 1 {
            let c = ((d - 1) / 4) % m;
            let bf = mul(b, f);
            (add(mul(a, e), mul(c, bf)), add(add(mul(a, f), mul(b, e)), bf))
        } else {
            (add(mul(a, e), mul(d % m, mul(b, f))), add(mul(a, f), mul(b, e)))
        }
    };
    let sq = product((x, y), (x, y));
    Ok(product(sq, (x, y)))
}

/// `d | Y` from `x, y mod d` and the parity of `y`.
///
/// For `d ≢ 1 (mod 4)`, `ε' = ε` and `Y = y`. For `d ≡ 1 (mod 4)`, `ε' = ε`
/// with `Y = y/2` when `y` is even, and `ε' = ε^3` with `Y = y₃/2` otherwise;
/// `d` is odd there, so halving does not affect divisibility.
pub fn d_divides_big_y(r: &UnitResidue) -> Result<bool, CfError> {
    debug_assert_eq!(r.modulus, r.d);
    if r.d % 4 != 1 || r.y_parity == 0 {
        return Ok(r.y.is_multiple_of(r.d));
    }
    let (_, y3) = unit_cube_mod(r.x, r.y, r.d, r.d)?;
    Ok(y3 == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const B: u64 = DEFAULT_STEP_BUDGET;

    #[test]
    fn initial_states() {
        let d = 331914313984493;
        assert_eq!(
            initial_state(d).unwrap(),
            (SurdState { q: 2, p: 1, d, root: 18218515 }, 18218515)
        );
        assert_eq!(
            initial_state(2).unwrap(),
            (SurdState { q: 1, p: 0, d: 2, root: 1 }, 2)
        );
        assert_eq!(
            initial_state(13).unwrap(),
            (SurdState { q: 2, p: 1, d: 13, root: 3 }, 3)
        );
        assert_eq!(initial_state(49), Err(CfError::PerfectSquare(49)));
        assert_eq!(initial_state(1), Err(CfError::RadicandOutOfRange(1)));
        assert_eq!(initial_state(1 << 62), Err(CfError::RadicandOutOfRange(1 << 62)));
    }

    #[test]
    fn step_examples() {
        let s = SurdState { q: 2, p: 1, d: 13, root: 3 };
        assert_eq!(s.step().unwrap(), (SurdState { q: 2, p: 3, d: 13, root: 3 }, 2));

        let d = 331914313984493;
        let s = SurdState { q: 2, p: 1, d, root: 18218515 };
        let (next, k) = s.step().unwrap();
        assert_eq!(k, 9109258);
        assert_eq!((next.q, next.p), (12589634, 18218515));
        assert_eq!(18218515u64 * 18218515, 331914288805225);

        let s = SurdState { q: 1, p: 0, d: 2, root: 1 };
        assert_eq!(s.step().unwrap(), (SurdState { q: 1, p: 1, d: 2, root: 1 }, 1));
    }

    #[test]
    fn step_rejects_corrupt_state() {
        // Q = 2 does not divide 13 - 2^2
        let s = SurdState { q: 2, p: 2, d: 13, root: 3 };
        assert!(matches!(s.step(), Err(CfError::CorruptState { .. })));
        let s = SurdState { q: 0, p: 1, d: 13, root: 3 };
        assert!(matches!(s.step(), Err(CfError::CorruptState { .. })));
    }

    #[test]
    fn y_mod_examples() {
        assert_eq!(y_mod(13, 13, B).unwrap(), (1, 1, Norm::Minus));
        assert_eq!(y_mod(46, 46, B).unwrap(), (0, 12, Norm::Plus));
        assert_eq!(y_mod(5, 5, B).unwrap(), (1, 1, Norm::Minus));
        assert_eq!(y_mod(2, 7, B).unwrap(), (1, 1, Norm::Minus));
    }

    #[test]
    fn budget_overflow_is_explicit() {
        assert_eq!(
            y_mod(46, 46, 5),
            Err(CfError::StepBudgetExceeded { d: 46, budget: 5 })
        );
        assert!(y_mod(46, 46, 12).is_ok());
        assert!(fundamental_unit(94, 3).is_err());
    }

    #[test]
    fn exact_unit_examples() {
        let u = fundamental_unit(2, B).unwrap();
        assert_eq!((u.x, u.y, u.norm, u.period), (1u32.into(), 1u32.into(), Norm::Minus, 1));

        let u = fundamental_unit(21, B).unwrap();
        assert_eq!((u.x.clone(), u.y.clone(), u.norm, u.period), (2u32.into(), 1u32.into(), Norm::Plus, 2));
        assert!(u.norm_form_matches());

        let u = fundamental_unit(46, B).unwrap();
        assert_eq!((u.x.clone(), u.y.clone(), u.norm), (24335u32.into(), 3588u32.into(), Norm::Plus));
        assert!(u.norm_form_matches());

        let u = fundamental_unit(13, B).unwrap();
        assert_eq!((u.x.clone(), u.y.clone()), (1u32.into(), 1u32.into()));

        let u = fundamental_unit(5, B).unwrap();
        assert_eq!((u.x.clone(), u.y.clone(), u.norm), (0u32.into(), 1u32.into(), Norm::Minus));
        assert!(u.norm_form_matches());
    }

    #[test]
    fn cube_examples() {
        assert_eq!(unit_cube_mod(1, 0, 13, 13).unwrap(), (1, 0));
        assert_eq!(unit_cube_mod(1, 0, 46, 97).unwrap(), (1, 0));
        // ((3+√13)/2)^3 = 18 + 5√13 = 13 + 10ω
        assert_eq!(unit_cube_mod(1, 1, 13, 13).unwrap(), (0, 10));
        assert_eq!(unit_cube_mod(1, 1, 13, 101).unwrap(), (13, 10));
        // ω^3 = 1 + 2ω for d = 5
        assert_eq!(unit_cube_mod(0, 1, 5, 7).unwrap(), (1, 2));
        assert_eq!(unit_cube_mod(0, 1, 5, 8), Err(CfError::EvenModulus(8)));
    }

    #[test]
    fn big_y_examples() {
        let r46 = unit_mod(46, 46, B).unwrap();
        assert!(d_divides_big_y(&r46).unwrap());
        assert!(fundamental_unit(46, B).unwrap().d_divides_big_y());

        let r13 = unit_mod(13, 13, B).unwrap();
        assert!(!d_divides_big_y(&r13).unwrap());
        let u13 = fundamental_unit(13, B).unwrap();
        assert_eq!(u13.sqrt_d_power(), (18u32.into(), 5u32.into(), 3));
        assert!(!u13.d_divides_big_y());
    }

    #[test]
    fn mod_and_exact_agree_on_x_and_parity() {
        for d in 2..3000u64 {
            if isqrt_u64(d).pow(2) == d {
                continue;
            }
            let u = fundamental_unit(d, B).unwrap();
            for m in [d, 97, 1 << 20] {
                let r = unit_mod(d, m, B).unwrap();
                assert_eq!(BigUint::from(r.x), &u.x % m, "d={d} m={m}");
                assert_eq!(BigUint::from(r.y), &u.y % m, "d={d} m={m}");
                assert_eq!(BigUint::from(r.y_parity), &u.y % 2u32, "d={d}");
            }
        }
    }
}
