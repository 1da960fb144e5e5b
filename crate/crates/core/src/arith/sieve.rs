use std::sync::OnceLock;

/// Largest span `hi - lo + 1` accepted by the segmented sieves.
pub const MAX_SEGMENT: u64 = 1 << 26;

/// One bit per integer of `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentBitmap {
    lo: u64,
    bits: Vec<bool>,
}

impl SegmentBitmap {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.lo + self.bits.len() as u64 - 1
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.lo && n - self.lo < self.bits.len() as u64 && self.bits[(n - self.lo) as usize]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let lo = self.lo;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| lo + i as u64)
    }
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

const CACHED_LIMIT: u64 = 3_000_000;

fn cached_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| simple_sieve(CACHED_LIMIT))
}

/// All primes `<= limit`. Limits up to three million are served from a shared table.
pub fn primes_up_to(limit: u64) -> std::borrow::Cow<'static, [u64]> {
    if limit <= CACHED_LIMIT {
        let primes = cached_primes();
        let end = primes.partition_point(|&p| p <= limit);
        std::borrow::Cow::Borrowed(&primes[..end])
    } else {
        std::borrow::Cow::Owned(simple_sieve(limit))
    }
}

fn check_span(lo: u64, hi: u64) {
    assert!(lo >= 2, "segmented sieves start at 2 (got lo = {lo})");
    assert!(hi >= lo, "empty segment [{lo}, {hi}]");
    assert!(
        hi - lo < MAX_SEGMENT,
        "segment [{lo}, {hi}] exceeds MAX_SEGMENT"
    );
}

/// Exact primality bitmap for `[lo, hi]`.
pub fn segmented_primes(lo: u64, hi: u64) -> SegmentBitmap {
    check_span(lo, hi);
    let mut bits = vec![true; (hi - lo + 1) as usize];
    let root = super::isqrt_u64(hi);
    for &p in primes_up_to(root).iter() {
        let first = (lo.div_ceil(p) * p).max(p * p);
        let mut m = first;
        while m <= hi {
            bits[(m - lo) as usize] = false;
            m += p;
        }
    }
    SegmentBitmap { lo, bits }
}

/// Squarefree bitmap for `[lo, hi]`, sieving by squares of primes `<= sqrt(hi)`.
pub fn segmented_squarefree(lo: u64, hi: u64) -> SegmentBitmap {
    check_span(lo, hi);
    let mut bits = vec![true; (hi - lo + 1) as usize];
    let root = super::isqrt_u64(hi);
    for &p in primes_up_to(root).iter() {
        let sq = p * p;
        let mut m = lo.div_ceil(sq) * sq;
        while m <= hi {
            bits[(m - lo) as usize] = false;
            m += sq;
        }
    }
    SegmentBitmap { lo, bits }
}

pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squarefree_by_trial(n: u64) -> bool {
        let mut k = 2u64;
        while k * k <= n {
            if n.is_multiple_of(k * k) {
                return false;
            }
            k += 1;
        }
        true
    }

    #[test]
    fn squarefree_examples() {
        assert!(is_squarefree(46));
        assert!(!is_squarefree(12));
        assert!(is_squarefree(1));
        assert!(!is_squarefree(331914313984493 * 4));
        assert!(is_squarefree(331914313984493));
    }

    #[test]
    fn small_primes() {
        let bm = segmented_primes(2, 50);
        let got: Vec<u64> = bm.iter().collect();
        assert_eq!(
            got,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
        );
    }

    #[test]
    fn segmented_squarefree_matches_trial_division() {
        let bm = segmented_squarefree(2, 1_000_000);
        let mut count = 0;
        for n in 2..=1_000_000u64 {
            let expected = squarefree_by_trial(n);
            assert_eq!(bm.contains(n), expected, "n={n}");
            assert_eq!(is_squarefree(n), expected, "n={n}");
            count += expected as usize;
        }
        assert_eq!(bm.count(), count);
    }

    #[test]
    fn segments_agree_with_whole_range() {
        let whole = segmented_squarefree(2, 100_000);
        let whole_p = segmented_primes(2, 100_000);
        let mut lo = 2;
        while lo <= 100_000 {
            let hi = (lo + 4095).min(100_000);
            let part = segmented_squarefree(lo, hi);
            let part_p = segmented_primes(lo, hi);
            for n in lo..=hi {
                assert_eq!(part.contains(n), whole.contains(n));
                assert_eq!(part_p.contains(n), whole_p.contains(n));
            }
            lo = hi + 1;
        }
    }

    #[test]
    fn prime_segment_far_out() {
        let d = 331914313984493u64;
        let bm = segmented_primes(d - 3, d + 2);
        assert_eq!(bm.iter().collect::<Vec<_>>(), vec![d]);
    }
}
