use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use proptest::prelude::*;
use unitscan_core::cubic::{
    cubic_inverse, cubic_mul, cubic_norm, fundamentality_check, verify_unit_pair, CubicElement,
    Fundamentality,
};

const RADICANDS: [u64; 8] = [2, 3, 5, 6, 7, 10, 17, 19];

fn element() -> impl Strategy<Value = CubicElement> {
    (prop::sample::select(&RADICANDS[..]), -1000i64..1000, -1000i64..1000, -1000i64..1000)
        .prop_map(|(d, a, b, c)| CubicElement::integral(a, b, c, d).unwrap())
}

fn pair() -> impl Strategy<Value = (CubicElement, CubicElement)> {
    (prop::sample::select(&RADICANDS[..]), prop::array::uniform6(-1000i64..1000)).prop_map(|(d, v)| {
        (
            CubicElement::integral(v[0], v[1], v[2], d).unwrap(),
            CubicElement::integral(v[3], v[4], v[5], d).unwrap(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn norm_is_multiplicative((x, y) in pair()) {
        let xy = cubic_mul(&x, &y).unwrap();
        prop_assert_eq!(cubic_norm(&xy), cubic_norm(&x) * cubic_norm(&y));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn inverse_multiplies_to_one(x in element()) {
        prop_assume!(cubic_norm(&x) != BigRational::from_integer(0.into()));
        let inv = cubic_inverse(&x).unwrap();
        prop_assert!(cubic_mul(&x, &inv).unwrap().is_one());
        if x.is_integral() && cubic_norm(&x).abs().is_one() {
            prop_assert!(verify_unit_pair(&x, &inv));
        }
    }
}

/// Units `ε^k ε'^j`-style products built from known small units.
fn sample_units() -> Vec<CubicElement> {
    let e2 = CubicElement::integral(1, 1, 1, 2).unwrap();
    let e3 = CubicElement::integral(4, 3, 2, 3).unwrap();
    let mut out = Vec::new();
    for base in [e2, e3] {
        let mut acc = base.clone();
        for _ in 0..6 {
            out.push(acc.clone());
            acc = cubic_mul(&acc, &base).unwrap();
        }
    }
    out
}

#[test]
fn units_and_their_inverses_pair_up() {
    for u in sample_units() {
        assert!(cubic_norm(&u).is_one());
        assert!(verify_unit_pair(&u, &cubic_inverse(&u).unwrap()));
    }
}

#[test]
fn powers_are_detected_at_the_smallest_prime() {
    let e2 = CubicElement::integral(1, 1, 1, 2).unwrap();
    let mut acc = e2.clone();
    for k in 2..=7u32 {
        acc = cubic_mul(&acc, &e2).unwrap();
        let smallest = (2..=k).find(|p| k % p == 0).unwrap();
        match fundamentality_check(&acc, 256).unwrap() {
            Fundamentality::NotFundamental { z, .. } => assert_eq!(z, smallest, "k={k}"),
            other => panic!("k={k}: {other:?}"),
        }
    }
}

#[test]
fn verdicts_are_precision_monotone() {
    for u in sample_units() {
        let mut settled: Option<Fundamentality> = None;
        for prec in [16u32, 24, 32, 48, 64, 128, 256, 512] {
            let v = fundamentality_check(&u, prec).unwrap();
            if v == Fundamentality::NeedsMorePrecision {
                assert!(settled.is_none(), "{u}: lost verdict at {prec} bits");
                continue;
            }
            if let Some(s) = &settled {
                assert_eq!(&v, s, "{u} at {prec} bits");
            }
            settled = Some(v);
        }
        assert!(settled.is_some(), "{u}");
    }
}

#[test]
fn thirds_elements_multiply_exactly() {
    // (1 + t + t²)/3 with d = 10 (10 ≡ 1 mod 9)
    let x = CubicElement::from_thirds(1.into(), 1.into(), 1.into(), 10).unwrap();
    let y = cubic_mul(&x, &x).unwrap();
    let back = cubic_mul(&y, &cubic_inverse(&x).unwrap()).unwrap();
    assert_eq!(back, x);
    assert_eq!(x.thirds().unwrap(), [BigInt::one(), BigInt::one(), BigInt::one()]);
}
