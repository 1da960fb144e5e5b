//! Exact convergents from a list of partial quotients.
//!
//! The convergents satisfy
//! `[[a₀,1],[1,0]] · … · [[a_j,1],[1,0]] = [[p_j, p_{j-1}], [q_j, q_{j-1}]]`,
//! so `p_{ℓ-1}` and `q_{ℓ-1}` are the first column of the full product. A
//! balanced product tree keeps operand sizes matched, which is what makes the
//! large multiplications fast; the two halves of each node are independent
//! and run in parallel.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Below this many quotients a node is multiplied out sequentially.
const LEAF: usize = 64;
/// Above this many quotients the two halves of a node run on separate threads.
const PARALLEL: usize = 1 << 12;

/// Nonnegative 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat2 {
    pub a: BigUint,
    pub b: BigUint,
    pub c: BigUint,
    pub d: BigUint,
}

impl Mat2 {
    pub fn identity() -> Self {
        Mat2 {
            a: BigUint::one(),
            b: BigUint::zero(),
            c: BigUint::zero(),
            d: BigUint::one(),
        }
    }

    /// `self · [[k, 1], [1, 0]]`
    fn push_quotient(&mut self, k: u32) {
        let a = &self.a * k + &self.b;
        let c = &self.c * k + &self.d;
        self.b = std::mem::replace(&mut self.a, a);
        self.d = std::mem::replace(&mut self.c, c);
    }

    fn mul(&self, rhs: &Mat2, parallel: bool) -> Mat2 {
        let row = |x: &BigUint, y: &BigUint| (x * &rhs.a + y * &rhs.c, x * &rhs.b + y * &rhs.d);
        let ((a, b), (c, d)) = if parallel {
            rayon::join(|| row(&self.a, &self.b), || row(&self.c, &self.d))
        } else {
            (row(&self.a, &self.b), row(&self.c, &self.d))
        };
        Mat2 { a, b, c, d }
    }
}

fn product(quotients: &[u32]) -> Mat2 {
    if quotients.len() <= LEAF {
        let mut m = Mat2::identity();
        for &k in quotients {
            m.push_quotient(k);
        }
        return m;
    }
    let (left, right) = quotients.split_at(quotients.len() / 2);
    let parallel = quotients.len() >= PARALLEL;
    let (l, r) = if parallel {
        rayon::join(|| product(left), || product(right))
    } else {
        (product(left), product(right))
    };
    l.mul(&r, parallel)
}

/// `(p_{ℓ-1}, q_{ℓ-1})` via a balanced product tree.
pub fn convergents_tree(quotients: &[u32]) -> (BigUint, BigUint) {
    if quotients.len() <= LEAF {
        return convergents_naive(quotients);
    }
    let (left, right) = quotients.split_at(quotients.len() / 2);
    let (l, r) = rayon::join(|| product(left), || product(right));
    // only the first column of l · r is needed
    let (p, q) = rayon::join(
        || &l.a * &r.a + &l.b * &r.c,
        || &l.c * &r.a + &l.d * &r.c,
    );
    (p, q)
}

/// `(p_{ℓ-1}, q_{ℓ-1})` by the sequential recurrence `x_j = a_j x_{j-1} + x_{j-2}`.
pub fn convergents_naive(quotients: &[u32]) -> (BigUint, BigUint) {
    let (mut p_prev, mut p) = (BigUint::zero(), BigUint::one());
    let (mut q_prev, mut q) = (BigUint::one(), BigUint::zero());
    for &k in quotients {
        let p_next = &p * k + &p_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        let q_next = &q * k + &q_prev;
        q_prev = std::mem::replace(&mut q, q_next);
    }
    (p, q)
}

/// Full product matrix, exposed for determinant checks.
pub fn product_matrix(quotients: &[u32]) -> Mat2 {
    product(quotients)
}
