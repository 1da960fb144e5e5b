//! Exact arithmetic in `ℚ(t)`, `t = ∛d`, and checks on supplied units.
//!
//! Elements are `(a + b t + c t²)/den` with integer numerators and a positive
//! common denominator kept in lowest terms. Units from fixtures use the
//! thirds convention `(a + b t + c t²)/3`.
//!
//! [`fundamentality_check`] decides whether a unit `x > 1` could be a proper
//! power `μ^z` of a smaller unit. With `L` a lower bound for units above 1,
//! only primes `z ≤ log x / log L` matter. A unit `μ` with real embedding `n`
//! and norm 1 has trace `T` within `(11/4)n^(-1/2)` of `n` and second
//! symmetric function `S = Tn - n² + 1/n`, so the search runs over integer
//! `T` and tests whether `S` is an integer. Real quantities are enclosed in
//! intervals; a candidate `(T, S)` is then confirmed exactly by comparing the
//! characteristic polynomial of `C^z` with that of `x`, where `C` is the
//! companion matrix of `X³ - T X² + S X - 1`.

mod interval;

pub use interval::Interval;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::primes_up_to;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CubicError {
    #[error("radicands differ ({0} vs {1})")]
    MismatchedRadicand(u64, u64),
    #[error("radicand {0} must be cube-free and at least 2")]
    BadRadicand(u64),
    #[error("element has norm zero")]
    ZeroNorm,
    #[error("denominator must be positive")]
    BadDenominator,
    #[error("real embedding is not greater than 1")]
    NotAboveOne,
    #[error("fixture line {line}: {reason}")]
    Fixture { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicElement {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    den: BigInt,
    d: u64,
}

fn is_cube_free(d: u64) -> bool {
    let mut p = 2u64;
    while p * p * p <= d {
        if d.is_multiple_of(p * p * p) {
            return false;
        }
        p += 1;
    }
    true
}

impl CubicElement {
    /// `(a + b t + c t²)/den`.
    pub fn new(a: BigInt, b: BigInt, c: BigInt, den: BigInt, d: u64) -> Result<Self, CubicError> {
        if d < 2 || !is_cube_free(d) {
            return Err(CubicError::BadRadicand(d));
        }
        if !den.is_positive() {
            return Err(CubicError::BadDenominator);
        }
        Ok(Self::normalized(a, b, c, den, d))
    }

    pub fn integral(a: i64, b: i64, c: i64, d: u64) -> Result<Self, CubicError> {
        Self::new(a.into(), b.into(), c.into(), BigInt::one(), d)
    }

    /// `(a + b t + c t²)/3`, the fixture convention.
    pub fn from_thirds(a: BigInt, b: BigInt, c: BigInt, d: u64) -> Result<Self, CubicError> {
        Self::new(a, b, c, BigInt::from(3), d)
    }

    fn normalized(a: BigInt, b: BigInt, c: BigInt, den: BigInt, d: u64) -> Self {
        let g = a.gcd(&b).gcd(&c).gcd(&den);
        if g.is_zero() || g.is_one() {
            return CubicElement { a, b, c, den, d };
        }
        CubicElement { a: a / &g, b: b / &g, c: c / &g, den: den / &g, d }
    }

    pub fn one(d: u64) -> Result<Self, CubicError> {
        Self::integral(1, 0, 0, d)
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn coefficients(&self) -> [BigRational; 3] {
        [&self.a, &self.b, &self.c].map(|x| BigRational::new(x.clone(), self.den.clone()))
    }

    /// Numerators over a denominator of 3, if the element has that form.
    pub fn thirds(&self) -> Option<[BigInt; 3]> {
        let three = BigInt::from(3);
        if !(&three % &self.den).is_zero() {
            return None;
        }
        let k = &three / &self.den;
        Some([&self.a * &k, &self.b * &k, &self.c * &k])
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.den.is_one()
    }

    /// Encloses the real embedding `(a + b∛d + c∛d²)/den`.
    pub fn real_embedding(&self, prec: u32) -> Interval {
        let t = Interval::cbrt(self.d, prec);
        let t2 = t.mul(&t);
        let num = Interval::from_int(&self.a, prec)
            .add(&t.scale(&self.b))
            .add(&t2.scale(&self.c));
        let inv = Interval::from_ratio(&BigInt::one(), &self.den, prec);
        num.mul(&inv)
    }

    /// Matrix of multiplication by the numerator on the basis `1, t, t²`
    /// (columns are the images of the basis vectors).
    fn numerator_matrix(&self) -> [[BigInt; 3]; 3] {
        let d = BigInt::from(self.d);
        let (a, b, c) = (&self.a, &self.b, &self.c);
        [
            [a.clone(), c * &d, b * &d],
            [b.clone(), a.clone(), c * &d],
            [c.clone(), b.clone(), a.clone()],
        ]
    }

    /// `(trace, second symmetric function, norm)` of the element.
    pub fn char_poly(&self) -> [BigRational; 3] {
        let [t, s, n] = poly_of(&self.numerator_matrix());
        let den = BigRational::from_integer(self.den.clone());
        [
            BigRational::from_integer(t) / &den,
            BigRational::from_integer(s) / (&den * &den),
            BigRational::from_integer(n) / (&den * &den * &den),
        ]
    }
}

impl fmt::Display for CubicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "({}, {}, {})", self.a, self.b, self.c)
        } else {
            write!(f, "({}, {}, {})/{}", self.a, self.b, self.c, self.den)
        }
    }
}

/// Trace, sum of principal 2×2 minors, and determinant of a 3×3 matrix.
fn poly_of(m: &[[BigInt; 3]; 3]) -> [BigInt; 3] {
    let trace = &m[0][0] + &m[1][1] + &m[2][2];
    let minor = |i: usize, j: usize| &m[i][i] * &m[j][j] - &m[i][j] * &m[j][i];
    let s = minor(0, 1) + minor(0, 2) + minor(1, 2);
    let det = &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0]);
    [trace, s, det]
}

fn mat_mul(x: &[[BigInt; 3]; 3], y: &[[BigInt; 3]; 3]) -> [[BigInt; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..3).map(|k| &x[i][k] * &y[k][j]).sum())
    })
}

pub fn cubic_mul(x: &CubicElement, y: &CubicElement) -> Result<CubicElement, CubicError> {
    if x.d != y.d {
        return Err(CubicError::MismatchedRadicand(x.d, y.d));
    }
    let d = BigInt::from(x.d);
    let a = &x.a * &y.a + (&x.b * &y.c + &x.c * &y.b) * &d;
    let b = &x.a * &y.b + &x.b * &y.a + &x.c * &y.c * &d;
    let c = &x.a * &y.c + &x.b * &y.b + &x.c * &y.a;
    Ok(CubicElement::normalized(a, b, c, &x.den * &y.den, x.d))
}

/// `N = (a³ + b³d + c³d² - 3abcd)/den³`.
pub fn cubic_norm(x: &CubicElement) -> BigRational {
    let d = BigInt::from(x.d);
    let (a, b, c) = (&x.a, &x.b, &x.c);
    let n = a * a * a + b * b * b * &d + c * c * c * &d * &d - BigInt::from(3) * a * b * c * &d;
    BigRational::new(n, &x.den * &x.den * &x.den)
}

/// Inverse via the adjugate `(a² - bcd, c²d - ab, b² - ac)/N`.
pub fn cubic_inverse(x: &CubicElement) -> Result<CubicElement, CubicError> {
    let d = BigInt::from(x.d);
    let (a, b, c) = (&x.a, &x.b, &x.c);
    let n = a * a * a + b * b * b * &d + c * c * c * &d * &d - BigInt::from(3) * a * b * c * &d;
    if n.is_zero() {
        return Err(CubicError::ZeroNorm);
    }
    // x = A/den, so x^{-1} = den · adj(A) / N(A)
    let (mut na, mut nb, mut nc) = (a * a - b * c * &d, c * c * &d - a * b, b * b - a * c);
    na *= &x.den;
    nb *= &x.den;
    nc *= &x.den;
    let (num_sign, den) = if n.is_negative() { (-BigInt::one(), -n) } else { (BigInt::one(), n) };
    Ok(CubicElement::normalized(na * &num_sign, nb * &num_sign, nc * &num_sign, den, x.d))
}

/// Whether `x · x_inv = 1` holds component by component.
pub fn verify_unit_pair(x: &CubicElement, x_inv: &CubicElement) -> bool {
    match cubic_mul(x, x_inv) {
        Ok(p) => p.is_one(),
        Err(_) => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubicDivisibility {
    pub p_divides_b: bool,
    pub three_d_divides_b: bool,
}

/// Divisibility of the thirds numerator `b` of `η = (a + b t + c t²)/3`.
/// Returns `None` when `η` has no such form.
pub fn aac_cubic_divisibility(eta: &CubicElement, p: u64) -> Option<CubicDivisibility> {
    let [_, b, _] = eta.thirds()?;
    Some(CubicDivisibility {
        p_divides_b: (&b % p).is_zero(),
        three_d_divides_b: (&b % (3 * eta.d)).is_zero(),
    })
}

/// `L`, the lower bound for units above 1 used to cap the exponent.
pub fn unit_lower_bound(d: u64, prec: u32) -> Interval {
    let t = Interval::cbrt(d, prec);
    let s = Interval::from_int(&BigInt::one(), prec).add(&t).add(&t.mul(&t));
    if matches!(d % 9, 1 | 8) {
        s.mul(&Interval::from_ratio(&BigInt::one(), &BigInt::from(3), prec))
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fundamentality {
    Fundamental,
    /// `x = μ^z` for the unit `μ` with characteristic polynomial `X³ - T X² + S X - 1`.
    NotFundamental { z: u32, trace: BigInt, second: BigInt },
    NeedsMorePrecision,
}

impl fmt::Display for Fundamentality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fundamentality::Fundamental => write!(f, "fundamental"),
            Fundamentality::NotFundamental { z, trace, second } => {
                let term = |k: &BigInt, neg: bool, x: &str| {
                    let neg = neg != k.is_negative();
                    format!(" {} {}{x}", if neg { '-' } else { '+' }, k.abs())
                };
                write!(
                    f,
                    "not fundamental: z = {z}, root of X^3{}{} - 1",
                    term(trace, true, "X^2"),
                    term(second, false, "X")
                )
            }
            Fundamentality::NeedsMorePrecision => write!(f, "needs more precision"),
        }
    }
}

/// Exact test that `x` is the `z`-th power of a root of `X³ - T X² + S X - 1`.
fn confirms_power(x: &CubicElement, z: u32, t: &BigInt, s: &BigInt) -> bool {
    let (zero, one) = (BigInt::zero(), BigInt::one());
    let companion = [
        [zero.clone(), zero.clone(), one.clone()],
        [one.clone(), zero.clone(), -s.clone()],
        [zero.clone(), one.clone(), t.clone()],
    ];
    let mut acc = companion.clone();
    for _ in 1..z {
        acc = mat_mul(&acc, &companion);
    }
    let target = x.char_poly();
    poly_of(&acc)
        .into_iter()
        .zip(target.iter())
        .all(|(lhs, rhs)| BigRational::from_integer(lhs) == *rhs)
}

/// Runs the fundamentality test for a unit `x > 1` at the given precision.
pub fn fundamentality_check(x: &CubicElement, precision_bits: u32) -> Result<Fundamentality, CubicError> {
    let prec = precision_bits.max(8);
    let one = BigInt::one();
    let m = x.real_embedding(prec);
    if !m.above(&one, &one) {
        if m.below(&one, &one) || x.is_one() {
            return Err(CubicError::NotAboveOne);
        }
        return Ok(Fundamentality::NeedsMorePrecision);
    }

    // Overestimating q is harmless: every candidate is confirmed exactly.
    let l = unit_lower_bound(x.d, prec);
    let mut q = 0u32;
    let mut power = Interval::from_int(&one, prec);
    loop {
        power = power.mul(&l);
        if !power.lo_le(&m) {
            break;
        }
        q += 1;
        if q > 1 << 16 {
            return Ok(Fundamentality::NeedsMorePrecision);
        }
    }

    let quarter = BigInt::one() << prec.saturating_sub(2);
    let eleven_quarters = Interval::from_ratio(&BigInt::from(11), &BigInt::from(4), prec);
    for &z in primes_up_to(q as u64).iter() {
        let z = z as u32;
        let n = match m.root(z) {
            Some(n) => n,
            None => return Ok(Fundamentality::NeedsMorePrecision),
        };
        let inv_n = match n.recip() {
            Some(v) => v,
            None => return Ok(Fundamentality::NeedsMorePrecision),
        };
        let delta = eleven_quarters.mul(&inv_n.root(2).expect("positive"));
        let n2 = n.mul(&n);
        let first = n.sub(&delta).ceil_lo();
        let last = n.add(&delta).floor_hi();
        let mut t = first;
        while t <= last {
            let r = Interval::from_int(&t, prec).mul(&n).sub(&n2).add(&inv_n);
            if r.width_scaled() >= quarter {
                return Ok(Fundamentality::NeedsMorePrecision);
            }
            let mut s = r.ceil_lo();
            while s <= r.floor_hi() {
                if confirms_power(x, z, &t, &s) {
                    return Ok(Fundamentality::NotFundamental { z, trace: t, second: s });
                }
                s += 1;
            }
            t += 1;
        }
    }
    Ok(Fundamentality::Fundamental)
}

/// [`fundamentality_check`] starting at 128 bits and doubling up to `cap_bits`.
pub fn fundamentality_auto(x: &CubicElement, cap_bits: u32) -> Result<(Fundamentality, u32), CubicError> {
    let mut prec = 128u32;
    loop {
        let verdict = fundamentality_check(x, prec)?;
        if verdict != Fundamentality::NeedsMorePrecision || prec >= cap_bits {
            return Ok((verdict, prec));
        }
        prec = (prec * 2).min(cap_bits);
    }
}

/// One line of a unit fixture: a unit and its claimed inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitFixture {
    pub d: u64,
    pub unit: CubicElement,
    pub inverse: CubicElement,
}

/// Parses lines `d a b c a_inv b_inv c_inv` (thirds numerators). Commas and
/// braces are ignored; blank lines and lines starting with `#` are skipped.
pub fn parse_fixture(text: &str) -> Result<Vec<UnitFixture>, CubicError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| CubicError::Fixture { line: i + 1, reason };
        let cleaned: String = line
            .chars()
            .map(|ch| if matches!(ch, ',' | '{' | '}' | '[' | ']') { ' ' } else { ch })
            .collect();
        let fields: Vec<&str> = cleaned.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", fields.len())));
        }
        let d: u64 = fields[0].parse().map_err(|_| err(format!("bad radicand {:?}", fields[0])))?;
        let mut nums = Vec::with_capacity(6);
        for f in &fields[1..] {
            nums.push(BigInt::from_str(f).map_err(|_| err(format!("bad integer {f:?}")))?);
        }
        let mut it = nums.into_iter();
        let mut take = || it.next().expect("six numbers");
        let unit = CubicElement::from_thirds(take(), take(), take(), d).map_err(|e| err(e.to_string()))?;
        let inverse = CubicElement::from_thirds(take(), take(), take(), d).map_err(|e| err(e.to_string()))?;
        out.push(UnitFixture { d, unit, inverse });
    }
    Ok(out)
}

/// Rational as a decimal string `p/q` or `p`.
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Numerator in the thirds convention of each coefficient, if integral in thirds.
pub fn thirds_string(x: &CubicElement) -> Option<String> {
    let [a, b, c] = x.thirds()?;
    Some(format!("{a} {b} {c}"))
}
