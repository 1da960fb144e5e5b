use num_bigint::BigUint;
use num_traits::Zero;
use unitscan_core::arith::is_squarefree;
use unitscan_core::cfrac::{
    convergents_naive, convergents_tree, fundamental_unit, initial_state, partial_quotients,
    unit_mod, y_mod, Norm, DEFAULT_STEP_BUDGET as B,
};

fn squarefree_upto(n: u64) -> impl Iterator<Item = u64> {
    (2..=n).filter(|&d| is_squarefree(d))
}

/// Period of `ω` by walking until the first post-`a₀` state recurs.
fn period_by_cycle(d: u64) -> u64 {
    let (s0, _) = initial_state(d).unwrap();
    let (first, _) = s0.step().unwrap();
    let mut s = first;
    let mut len = 0;
    loop {
        let (next, _) = s.step().unwrap();
        len += 1;
        if next == first {
            return len;
        }
        s = next;
    }
}

#[test]
fn y_mod_matches_exact_unit() {
    for d in squarefree_upto(10_000).filter(|&d| d != 5) {
        let u = fundamental_unit(d, B).unwrap();
        for m in [d, 97, (1u64 << 32) - 5] {
            let (y, period, norm) = y_mod(d, m, B).unwrap();
            assert_eq!(BigUint::from(y), &u.y % m, "d={d} m={m}");
            assert_eq!(period, u.period);
            assert_eq!(norm, u.norm);
        }
    }
}

#[test]
fn first_terminal_quotient_closes_the_cycle() {
    for d in squarefree_upto(10_000).filter(|&d| d != 5) {
        let period = partial_quotients(d, B).unwrap().len() as u64;
        assert_eq!(period, period_by_cycle(d), "d={d}");
    }
}

#[test]
fn norm_sign_matches_norm_form() {
    for d in squarefree_upto(10_000) {
        let u = fundamental_unit(d, B).unwrap();
        assert!(u.norm_form_matches(), "d={d}");
        assert_eq!(u.norm, Norm::from_period(u.period));
    }
}

#[test]
fn tree_matches_sequential_convergents() {
    for d in squarefree_upto(2000) {
        let qs = partial_quotients(d, B).unwrap();
        assert_eq!(convergents_tree(&qs), convergents_naive(&qs), "d={d}");
    }
}

#[test]
fn unit_exceeds_one_and_y_positive() {
    for d in squarefree_upto(3000) {
        let u = fundamental_unit(d, B).unwrap();
        assert!(!u.y.is_zero(), "d={d}");
        let r = unit_mod(d, d, B).unwrap();
        assert_eq!(r.y_parity, (&u.y % 2u32 == BigUint::from(1u32)) as u64);
    }
}

#[test]
fn long_period_tree_matches_naive() {
    let qs = partial_quotients(999_983, B).unwrap();
    assert!(qs.len() > 64);
    assert_eq!(convergents_tree(&qs), convergents_naive(&qs));
}
