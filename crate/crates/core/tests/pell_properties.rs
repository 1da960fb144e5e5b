use num_bigint::{BigInt, BigUint};
use unitscan_core::arith::{is_squarefree, primes_up_to};
use unitscan_core::certify::{build_certificate, BuildOptions};
use unitscan_core::cfrac::{fundamental_unit, unit_mod, FundamentalUnit, DEFAULT_STEP_BUDGET as B};
use unitscan_core::pell::{
    analyze, check_witness, make_witness, mordell_bernoulli_check, rc_satisfies, PellWitness,
    WitnessVerdict,
};

#[test]
fn pre_division_identity_is_four_times_the_norm() {
    for d in (5..=10_000u64).step_by(4).filter(|&d| is_squarefree(d)) {
        let u = fundamental_unit(d, B).unwrap();
        let s = BigInt::from(&u.x * 2u32 + &u.y);
        let y = BigInt::from(u.y.clone());
        assert_eq!(&s * &s - &y * &y * d, BigInt::from(4 * u.norm.as_i8()), "d={d}");
    }
}

#[test]
fn alpha_and_rc_agree_with_exact_units() {
    for d in (2..=10_000u64).filter(|&d| is_squarefree(d)) {
        let row = analyze(d, None, B).unwrap();
        let exact = fundamental_unit(d, B).unwrap();
        assert_eq!(row.alpha as u32, (&exact.y % 2u32).iter_u32_digits().next().unwrap_or(0), "d={d}");
        assert_eq!(row.d_divides_y, (&exact.y % d) == BigUint::from(0u32));
        assert_eq!(row.d_divides_big_y, exact.d_divides_big_y());
        let r = unit_mod(d, d, B).unwrap();
        assert_eq!(rc_satisfies(&r), row.rc);
        if row.rc {
            assert!(row.norm == 1 && row.beta != 1 && row.alpha == 0 && row.d_divides_y);
        }
    }
}

#[test]
fn bernoulli_congruence_up_to_twenty_thousand() {
    let mut checked = 0;
    for &p in primes_up_to(20_000).iter().filter(|&&p| p >= 13 && p % 4 == 1) {
        let c = mordell_bernoulli_check(p, 100_000, B).unwrap();
        assert!(c.consistent, "p={p}");
        assert_ne!(c.y_mod_p, 0, "p={p}");
        checked += 1;
    }
    assert!(checked > 1000);
}

/// `ε^k` for `d ≡ 1 (mod 4)` in the `ω` basis.
fn unit_power(u: &FundamentalUnit, k: u32) -> FundamentalUnit {
    let c = BigUint::from((u.d - 1) / 4);
    let (mut x, mut y) = (BigUint::from(1u32), BigUint::from(0u32));
    for _ in 0..k {
        let yy = &y * &u.y;
        let nx = &x * &u.x + &c * &yy;
        let ny = &x * &u.y + &y * &u.x + yy;
        x = nx;
        y = ny;
    }
    let norm = if k.is_multiple_of(2) { unitscan_core::cfrac::Norm::Plus } else { u.norm };
    FundamentalUnit { d: u.d, x, y, norm, period: u.period }
}

#[test]
fn full_power_witness_is_never_conclusive() {
    // ε^d always lies in the order of conductor d, but it is not below ε^d
    for d in [401u64, 409, 421, 433, 449] {
        let proof = build_certificate(&BigUint::from(d), &BuildOptions::default()).unwrap();
        let eps = fundamental_unit(d, B).unwrap();
        assert_ne!(&eps.y % d, BigUint::from(0u32));
        let w = make_witness(&unit_power(&eps, d as u32)).unwrap();
        assert!(
            matches!(check_witness(&w, &proof), WitnessVerdict::BoundInconclusive(_)),
            "d={d}"
        );
    }
}

#[test]
fn clause_logic_on_synthetic_large_witness() {
    // With a certified prime d ≥ 361 and a valid equation, only the size decides.
    let d = 401u64;
    let proof = build_certificate(&BigUint::from(d), &BuildOptions::default()).unwrap();
    let eps = fundamental_unit(d, B).unwrap();
    let w = make_witness(&unit_power(&eps, d as u32)).unwrap();
    let tampered = PellWitness { u: &w.u + 2u32, ..w.clone() };
    assert_eq!(check_witness(&tampered, &proof), WitnessVerdict::EquationFailed);
}
