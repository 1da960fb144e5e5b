//! Pell witnesses for `d | y`, the relative class number condition, the
//! per-`d` analysis row, the Bernoulli cross-check and the open-problem screen.
//!
//! A witness is `(u, v)` with `u² - d³v² = ±4`. Then `η = (u + vd√d)/2` is a
//! unit of the order `ℤ + dℤ[ω]`; if `d` is prime and `1 < η < ε^d`, the
//! fundamental unit itself lies in that order, which is `d | y`. The size
//! condition is checked through decimal digit counts.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    bernoulli_half_mod_p, decimal_digits, factorize_u64, is_probable_prime_u64, is_squarefree,
    kronecker, ArithError, FactorEffort, FactoredNatural,
};
use crate::certify::{verify_proof, Proof};
use crate::cfrac::{d_divides_big_y, unit_mod, CfError, FundamentalUnit, Norm, UnitResidue};

/// Smallest `d` for which `10^(d-1)·ω ≤ ω^d` holds with `ω = (1+√d)/2`.
pub const MIN_WITNESS_D: u64 = 361;

/// Default upper bound for [`mordell_bernoulli_check`].
pub const BERNOULLI_BOUND: u64 = 100_000;

#[derive(Debug, Error)]
pub enum PellError {
    #[error("d = {0} is not ≡ 1 (mod 4)")]
    NotOneModFour(u64),
    #[error("d = {0} does not divide y")]
    DoesNotDivideY(u64),
    #[error("d = {0} is not squarefree")]
    NotSquarefree(u64),
    #[error("p = {0} is outside [13, {1}]")]
    OutOfRange(u64, u64),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("witness file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PellWitness {
    pub d: BigUint,
    pub u: BigUint,
    pub v: BigUint,
    /// Right-hand side of `u² - d³v² = ±4`.
    pub sign: Norm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessVerdict {
    ProvesDDividesY,
    NotCertifiedPrime(String),
    EquationFailed,
    ParityFailed,
    BoundInconclusive(String),
}

impl fmt::Display for WitnessVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessVerdict::ProvesDDividesY => write!(f, "proves d | y"),
            WitnessVerdict::NotCertifiedPrime(why) => write!(f, "not certified prime: {why}"),
            WitnessVerdict::EquationFailed => write!(f, "equation u^2 - d^3 v^2 = ±4 fails"),
            WitnessVerdict::ParityFailed => write!(f, "u and v differ in parity"),
            WitnessVerdict::BoundInconclusive(why) => write!(f, "bound inconclusive: {why}"),
        }
    }
}

/// Checks the witness against a primality proof for `d`.
pub fn check_witness(w: &PellWitness, proof: &Proof) -> WitnessVerdict {
    if proof.number() != &w.d {
        return WitnessVerdict::NotCertifiedPrime(format!(
            "proof is for {}, not {}",
            proof.number(),
            w.d
        ));
    }
    if let Err(e) = verify_proof(proof) {
        return WitnessVerdict::NotCertifiedPrime(e.to_string());
    }
    if w.u.is_zero() || w.v.is_zero() {
        return WitnessVerdict::EquationFailed;
    }
    let lhs = BigInt::from(&w.u * &w.u) - BigInt::from(&w.d * &w.d * &w.d * &w.v * &w.v);
    if lhs != BigInt::from(4 * w.sign.as_i8()) {
        return WitnessVerdict::EquationFailed;
    }
    if w.u.bit(0) != w.v.bit(0) {
        return WitnessVerdict::ParityFailed;
    }
    if w.d < BigUint::from(MIN_WITNESS_D) {
        return WitnessVerdict::BoundInconclusive(format!("d < {MIN_WITNESS_D}"));
    }
    // The digit budget is d - 1; a d this large leaves every finite witness inside it.
    let budget = match w.d.to_u64() {
        Some(d) => d - 1,
        None => u64::MAX,
    };
    let (du, dv, dd) = (decimal_digits(&w.u), decimal_digits(&w.v), decimal_digits(&w.d));
    if du > budget {
        return WitnessVerdict::BoundInconclusive(format!("u has {du} digits, more than d - 1"));
    }
    if dv > budget.saturating_sub(15) {
        return WitnessVerdict::BoundInconclusive(format!("v has {dv} digits, more than d - 16"));
    }
    // vd < 10^(d-1) is what the size argument uses
    if dv + dd > budget {
        return WitnessVerdict::BoundInconclusive("vd may reach 10^(d-1)".into());
    }
    WitnessVerdict::ProvesDDividesY
}

/// `u = 2x + y`, `v = y/d` from a fundamental unit with `d ≡ 1 (mod 4)` and `d | y`.
pub fn make_witness(unit: &FundamentalUnit) -> Result<PellWitness, PellError> {
    if unit.d % 4 != 1 {
        return Err(PellError::NotOneModFour(unit.d));
    }
    if !(&unit.y % unit.d).is_zero() {
        return Err(PellError::DoesNotDivideY(unit.d));
    }
    Ok(PellWitness {
        d: BigUint::from(unit.d),
        u: &unit.x * 2u32 + &unit.y,
        v: &unit.y / unit.d,
        sign: unit.norm,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessWire {
    d: String,
    u: String,
    v: String,
    sign: String,
}

fn parse_field(name: &str, s: &str) -> Result<BigUint, PellError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(PellError::Format(format!("{name} is not a decimal integer")));
    }
    BigUint::from_str(s).map_err(|e| PellError::Format(format!("{name}: {e}")))
}

pub fn write_witness(w: &PellWitness, out: impl Write) -> Result<(), PellError> {
    let wire = WitnessWire {
        d: w.d.to_string(),
        u: w.u.to_string(),
        v: w.v.to_string(),
        sign: match w.sign {
            Norm::Plus => "4".into(),
            Norm::Minus => "-4".into(),
        },
    };
    serde_json::to_writer(out, &wire).map_err(|e| PellError::Format(e.to_string()))
}

pub fn read_witness(input: impl Read) -> Result<PellWitness, PellError> {
    let wire: WitnessWire =
        serde_json::from_reader(std::io::BufReader::new(input)).map_err(|e| PellError::Format(e.to_string()))?;
    let sign = match wire.sign.as_str() {
        "4" | "+4" => Norm::Plus,
        "-4" => Norm::Minus,
        other => return Err(PellError::Format(format!("sign must be 4 or -4, got {other:?}"))),
    };
    Ok(PellWitness {
        d: parse_field("d", &wire.d)?,
        u: parse_field("u", &wire.u)?,
        v: parse_field("v", &wire.v)?,
        sign,
    })
}

/// The relative class number condition from `(y mod d, parity of y, N(ε))`.
pub fn rc_satisfies(r: &UnitResidue) -> bool {
    debug_assert_eq!(r.modulus, r.d);
    r.norm == Norm::Plus && r.d % 8 != 1 && r.y_parity == 0 && r.y.is_multiple_of(r.d)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisRow {
    pub d: u64,
    pub d_divides_big_y: bool,
    pub d_divides_y: bool,
    pub rc: bool,
    pub alpha: u8,
    pub beta: u8,
    pub s: usize,
    /// Set when `d` was not fully factored, so `s` only counts the primes found.
    pub s_is_lower_bound: bool,
    pub norm: i8,
    pub h_external: Option<u64>,
}

pub fn analyze(d: u64, h_external: Option<u64>, budget: u64) -> Result<AnalysisRow, PellError> {
    if d < 2 || !is_squarefree(d) {
        return Err(PellError::NotSquarefree(d));
    }
    let r = unit_mod(d, d, budget)?;
    let f = factorize_u64(d, FactorEffort::default());
    Ok(AnalysisRow {
        d,
        d_divides_big_y: d_divides_big_y(&r)?,
        d_divides_y: r.y == 0,
        rc: rc_satisfies(&r),
        alpha: r.y_parity as u8,
        beta: (d % 8) as u8,
        s: f.distinct_primes(),
        s_is_lower_bound: !f.complete,
        norm: r.norm.as_i8(),
        h_external,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BernoulliCheck {
    pub p: u64,
    /// `B_{(p-1)/2} mod p`
    pub bernoulli: u64,
    pub y_mod_p: u64,
    pub consistent: bool,
}

impl BernoulliCheck {
    pub const JUSTIFICATION: &'static str =
        "p does not divide h(p) since h(p) < p, and p does not divide u since u^2 = ±4 mod p";
}

/// Checks `(p | y) ⟺ (p | B_{(p-1)/2})` for a prime `p ≡ 1 (mod 4)`.
pub fn mordell_bernoulli_check(p: u64, bound: u64, budget: u64) -> Result<BernoulliCheck, PellError> {
    if p < 13 || p > bound {
        return Err(PellError::OutOfRange(p, bound));
    }
    let b = bernoulli_half_mod_p(p)?;
    let r = unit_mod(p, p, budget)?;
    Ok(BernoulliCheck {
        p,
        bernoulli: b,
        y_mod_p: r.y,
        consistent: (r.y == 0) == (b == 0),
    })
}

/// Clauses of the open problem. Each also asks for `h(d) = 2`, which is not decided here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Clause {
    A,
    B,
    C,
    D,
    E,
}

/// What the screen needs to know about the unit of `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitFacts {
    pub d_divides_y: bool,
    pub y_odd: bool,
    pub norm: Norm,
}

impl From<&UnitResidue> for UnitFacts {
    fn from(r: &UnitResidue) -> Self {
        UnitFacts {
            d_divides_y: r.y.is_multiple_of(r.modulus),
            y_odd: r.y_parity == 1,
            norm: r.norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScreenResult {
    pub clauses: BTreeSet<Clause>,
    pub factorization_incomplete: bool,
}

impl ScreenResult {
    pub const PENDING: &'static str = "h(d) = 2 requires an external class number";
}

/// Every clause whose conditions other than `h(d) = 2` hold for `d`.
pub fn open_problem_screen(d: u64, facts: &UnitFacts, f: &FactoredNatural) -> ScreenResult {
    let mut clauses = BTreeSet::new();
    if !f.complete {
        return ScreenResult {
            clauses,
            factorization_incomplete: true,
        };
    }
    if !facts.d_divides_y {
        return ScreenResult {
            clauses,
            factorization_incomplete: false,
        };
    }
    let mut odd: Vec<u64> = Vec::new();
    let mut two = false;
    for (p, e) in &f.factors {
        let Some(p) = p.to_u64() else { continue };
        if *e != 1 {
            return ScreenResult {
                clauses,
                factorization_incomplete: false,
            };
        }
        if p == 2 {
            two = true;
        } else {
            odd.push(p);
        }
    }
    if odd.len() == 2 && odd.iter().all(|&p| is_probable_prime_u64(p)) {
        let (x, y) = (odd[0], odd[1]);
        for (p, q) in [(x, y), (y, x)] {
            if !two {
                if p % 8 == 5 && q % 4 == 3 && facts.y_odd {
                    clauses.insert(Clause::A);
                }
                if p % 4 == 1 && q % 4 == 1 && d % 8 == 5 && facts.norm == Norm::Minus {
                    clauses.insert(Clause::B);
                }
                if p % 8 == 1 && q % 4 == 3 && facts.y_odd {
                    clauses.insert(Clause::C);
                }
            } else {
                if p % 8 == 3 && q % 8 == 3 {
                    clauses.insert(Clause::D);
                }
                if p % 8 == 1 && q % 4 == 3 && kronecker(p as i64, q as i64) == -1 {
                    clauses.insert(Clause::E);
                }
            }
        }
    }
    ScreenResult {
        clauses,
        factorization_incomplete: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfrac::{fundamental_unit, DEFAULT_STEP_BUDGET as B};
    use num_traits::One;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn witness(d: u64, u: u64, v: u64, sign: Norm) -> PellWitness {
        PellWitness { d: big(d), u: big(u), v: big(v), sign }
    }

    #[test]
    fn small_witness_verdicts() {
        let five = Proof::Trial(big(5));
        assert_eq!(check_witness(&witness(5, 3, 1, Norm::Minus), &five), WitnessVerdict::EquationFailed);
        assert!(matches!(
            check_witness(&witness(5, 11, 1, Norm::Minus), &five),
            WitnessVerdict::BoundInconclusive(_)
        ));
        assert!(matches!(
            check_witness(&witness(5, 11, 1, Norm::Minus), &Proof::Trial(big(7))),
            WitnessVerdict::NotCertifiedPrime(_)
        ));
        assert!(matches!(
            check_witness(&witness(9, 1, 1, Norm::Minus), &Proof::Trial(big(9))),
            WitnessVerdict::NotCertifiedPrime(_)
        ));
        assert_eq!(check_witness(&witness(5, 11, 1, Norm::Plus), &five), WitnessVerdict::EquationFailed);
    }

    #[test]
    fn synthetic_witness_from_fifth_power() {
        // ε^5 = 3 + 5ω for d = 5
        let unit = FundamentalUnit {
            d: 5,
            x: big(3),
            y: big(5),
            norm: Norm::Minus,
            period: 5,
        };
        let w = make_witness(&unit).unwrap();
        assert_eq!((w.u.clone(), w.v.clone(), w.sign), (big(11), big(1), Norm::Minus));
        assert!(matches!(
            make_witness(&fundamental_unit(13, B).unwrap()),
            Err(PellError::DoesNotDivideY(13))
        ));
        assert!(matches!(
            make_witness(&fundamental_unit(46, B).unwrap()),
            Err(PellError::NotOneModFour(46))
        ));
    }

    #[test]
    fn parity_is_checked() {
        // 2^2 - 2^3 · 1^2 = -4 with u even and v odd
        let w = witness(2, 2, 1, Norm::Minus);
        assert_eq!(check_witness(&w, &Proof::Trial(big(2))), WitnessVerdict::ParityFailed);
    }

    #[test]
    fn witness_file_round_trip() {
        let w = witness(331914313984493, 123456789, 42, Norm::Minus);
        let mut buf = Vec::new();
        write_witness(&w, &mut buf).unwrap();
        assert_eq!(read_witness(&buf[..]).unwrap(), w);
        assert!(read_witness(&br#"{"d":"5","u":"1","v":"1","sign":"3"}"#[..]).is_err());
        assert!(read_witness(&br#"{"d":"5","u":"x","v":"1","sign":"4"}"#[..]).is_err());
    }

    #[test]
    fn analysis_rows() {
        let row = analyze(46, None, B).unwrap();
        assert_eq!(
            (row.d_divides_big_y, row.d_divides_y, row.rc, row.alpha, row.beta, row.s, row.norm),
            (true, true, true, 0, 6, 2, 1)
        );
        let row = analyze(13, None, B).unwrap();
        assert_eq!(
            (row.d_divides_big_y, row.d_divides_y, row.rc, row.alpha, row.beta, row.s, row.norm),
            (false, false, false, 1, 5, 1, -1)
        );
        assert!(matches!(analyze(12, None, B), Err(PellError::NotSquarefree(12))));
    }

    #[test]
    fn rc_examples() {
        assert!(rc_satisfies(&unit_mod(46, 46, B).unwrap()));
        assert!(!rc_satisfies(&unit_mod(13, 13, B).unwrap()));
    }

    #[test]
    fn bernoulli_examples() {
        let c = mordell_bernoulli_check(13, BERNOULLI_BOUND, B).unwrap();
        assert_eq!((c.bernoulli, c.y_mod_p, c.consistent), (9, 1, true));
        assert!(mordell_bernoulli_check(29, BERNOULLI_BOUND, B).unwrap().consistent);
        assert!(matches!(mordell_bernoulli_check(5, BERNOULLI_BOUND, B), Err(PellError::OutOfRange(..))));
        assert!(matches!(mordell_bernoulli_check(100_129, BERNOULLI_BOUND, B), Err(PellError::OutOfRange(..))));
    }

    fn factored(primes: &[u64]) -> FactoredNatural {
        let n: u64 = primes.iter().product();
        FactoredNatural {
            n: big(n),
            factors: primes.iter().map(|&p| (big(p), 1)).collect(),
            cofactor: BigUint::one(),
            complete: true,
        }
    }

    #[test]
    fn screen_clause_logic() {
        let yes = UnitFacts { d_divides_y: true, y_odd: false, norm: Norm::Plus };
        let no = UnitFacts { d_divides_y: false, ..yes };
        // 2 · 3 · 11: both ≡ 3 mod 8
        let f = factored(&[2, 3, 11]);
        assert_eq!(open_problem_screen(66, &yes, &f).clauses, BTreeSet::from([Clause::D]));
        assert!(open_problem_screen(66, &no, &f).clauses.is_empty());
        // 2 · 17 · 3: 17 ≡ 1 mod 8, 3 ≡ 3 mod 4, (17/3) = (2/3) = -1
        let f = factored(&[2, 3, 17]);
        assert_eq!(open_problem_screen(102, &yes, &f).clauses, BTreeSet::from([Clause::E]));
        // 5 · 13 = 65 ≡ 1 mod 8: clause B needs d ≡ 5 mod 8
        let neg = UnitFacts { d_divides_y: true, y_odd: true, norm: Norm::Minus };
        assert!(open_problem_screen(65, &neg, &factored(&[5, 13])).clauses.is_empty());
        // 5 · 17 = 85 ≡ 5 mod 8
        assert_eq!(open_problem_screen(85, &neg, &factored(&[5, 17])).clauses, BTreeSet::from([Clause::B]));
        // 5 · 3 = 15 with y odd: clause A
        assert_eq!(open_problem_screen(15, &neg, &factored(&[3, 5])).clauses, BTreeSet::from([Clause::A]));
        // 17 · 3 = 51 with y odd: clause C
        assert_eq!(open_problem_screen(51, &neg, &factored(&[3, 17])).clauses, BTreeSet::from([Clause::C]));
        let mut partial = factored(&[3, 17]);
        partial.complete = false;
        assert!(open_problem_screen(51, &neg, &partial).factorization_incomplete);
    }
}
