//! Closed real intervals with fixed-point endpoints `lo/2^P`, `hi/2^P`.
//! Every operation rounds outward, so the true value is always enclosed.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

impl Interval {
    pub fn from_int(k: &BigInt, prec: u32) -> Self {
        let v = k << prec;
        Interval { lo: v.clone(), hi: v, prec }
    }

    /// Encloses `num / den` for `den > 0`.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        debug_assert!(den.is_positive());
        let scaled = num << prec;
        Interval {
            lo: scaled.div_floor(den),
            hi: Integer::div_ceil(&scaled, den),
            prec,
        }
    }

    /// Encloses `k^(1/3)` for `k >= 0`.
    pub fn cbrt(k: u64, prec: u32) -> Self {
        let scaled = BigInt::from(k) << (3 * prec);
        let lo = scaled.cbrt();
        let hi = if &lo * &lo * &lo == scaled { lo.clone() } else { &lo + 1 };
        Interval { lo, hi, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Width as a fixed-point integer (units of `2^-P`).
    pub fn width_scaled(&self) -> BigInt {
        &self.hi - &self.lo
    }

    /// True if every point is strictly below the rational `num/den`.
    pub fn below(&self, num: &BigInt, den: &BigInt) -> bool {
        (&self.hi * den) < (num << self.prec)
    }

    /// True if every point is strictly above the rational `num/den`.
    pub fn above(&self, num: &BigInt, den: &BigInt) -> bool {
        (&self.lo * den) > (num << self.prec)
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi, prec: self.prec }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo, prec: self.prec }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let products = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let min = products.iter().min().unwrap();
        let max = products.iter().max().unwrap();
        let unit = BigInt::one() << self.prec;
        Interval { lo: min.div_floor(&unit), hi: Integer::div_ceil(max, &unit), prec: self.prec }
    }

    pub fn scale(&self, k: &BigInt) -> Interval {
        let (a, b) = (&self.lo * k, &self.hi * k);
        if k.sign() == Sign::Minus {
            Interval { lo: b, hi: a, prec: self.prec }
        } else {
            Interval { lo: a, hi: b, prec: self.prec }
        }
    }

    pub fn pow(&self, k: u32) -> Interval {
        let mut acc = Interval::from_int(&BigInt::one(), self.prec);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Reciprocal of a strictly positive interval.
    pub fn recip(&self) -> Option<Interval> {
        if !self.lo.is_positive() {
            return None;
        }
        let num = BigInt::one() << (2 * self.prec);
        Some(Interval {
            lo: num.div_floor(&self.hi),
            hi: Integer::div_ceil(&num, &self.lo),
            prec: self.prec,
        })
    }

    /// `z`-th root of a nonnegative interval.
    pub fn root(&self, z: u32) -> Option<Interval> {
        if self.lo.is_negative() {
            return None;
        }
        let shift = self.prec as usize * (z as usize - 1);
        let lo = (&self.lo << shift).nth_root(z);
        let hi_scaled = &self.hi << shift;
        let r = hi_scaled.nth_root(z);
        let hi = if r.pow(z) == hi_scaled { r } else { r + 1 };
        Some(Interval { lo, hi, prec: self.prec })
    }

    /// Smallest integer not below the interval's lower end.
    pub fn ceil_lo(&self) -> BigInt {
        Integer::div_ceil(&self.lo, &(BigInt::one() << self.prec))
    }

    /// Largest integer not above the interval's upper end.
    pub fn floor_hi(&self) -> BigInt {
        self.hi.div_floor(&(BigInt::one() << self.prec))
    }

    pub fn is_exact_zero_width(&self) -> bool {
        self.hi == self.lo
    }

    pub fn lo_le(&self, o: &Interval) -> bool {
        self.lo <= o.hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(k: i64) -> BigInt {
        BigInt::from(k)
    }

    #[test]
    fn encloses_cube_roots() {
        for p in [16u32, 64, 200] {
            let t = Interval::cbrt(2, p);
            let t3 = t.pow(3);
            assert!(!t3.below(&i(2), &i(1)) && !t3.above(&i(2), &i(1)), "p={p}");
            assert!(t.above(&i(125), &i(100)) && t.below(&i(126), &i(100)));
        }
        assert!(Interval::cbrt(27, 32).is_exact_zero_width());
    }

    #[test]
    fn recip_and_roots_enclose() {
        let x = Interval::from_ratio(&i(22), &i(7), 100);
        let r = x.recip().unwrap();
        let one = x.mul(&r);
        assert!(!one.below(&i(1), &i(1)) && !one.above(&i(1), &i(1)));
        let s = x.root(5).unwrap().pow(5);
        assert!(!s.below(&i(22), &i(7)) && !s.above(&i(22), &i(7)));
        assert!(Interval::from_int(&i(-1), 8).recip().is_none());
    }

    #[test]
    fn signs_are_respected() {
        let a = Interval::from_ratio(&i(-3), &i(2), 10);
        let b = Interval::from_ratio(&i(5), &i(3), 10);
        let p = a.mul(&b);
        assert!(!p.below(&i(-5), &i(2)) && !p.above(&i(-5), &i(2)));
        assert_eq!(a.scale(&i(-2)).ceil_lo(), i(3));
        assert_eq!(a.ceil_lo(), i(-1));
        assert_eq!(a.floor_hi(), i(-2));
    }
}
