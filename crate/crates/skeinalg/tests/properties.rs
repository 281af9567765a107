//! Randomized algebraic laws: ring and field axioms for the exact
//! scalars, and the evaluation homomorphism.

use num::complex::Complex64;
use num::{BigInt, BigRational};
use proptest::prelude::*;

use skeinalg::ring::{LaurentPoly, RationalFn};

fn arb_laurent(max_terms: usize, max_exp: i64) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec(
        ((-max_exp..=max_exp), (-20i64..=20), (1i64..=10)),
        0..=max_terms,
    )
    .prop_map(|terms| {
        LaurentPoly::from_terms(terms.into_iter().map(|(e, n, d)| {
            (e, BigRational::new(BigInt::from(n), BigInt::from(d)))
        }))
    })
}

fn arb_rational() -> impl Strategy<Value = RationalFn> {
    (arb_laurent(4, 6), arb_laurent(4, 6))
        .prop_filter("nonzero denominator", |(_, d)| !d.is_zero())
        .prop_map(|(n, d)| RationalFn::new(n, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn laurent_ring_axioms(a in arb_laurent(5, 8), b in arb_laurent(5, 8), c in arb_laurent(5, 8)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &LaurentPoly::zero(), a.clone());
        prop_assert_eq!(&a * &LaurentPoly::one(), a.clone());
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn rational_field_axioms(x in arb_rational(), y in arb_rational(), z in arb_rational()) {
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert!((&x + &(-&x)).is_zero());
        if !x.is_zero() {
            let inv = x.inv().unwrap();
            prop_assert!((&x * &inv).is_one());
            prop_assert_eq!(x.div(&x).unwrap(), RationalFn::one());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eval_is_multiplicative(
        a in arb_laurent(8, 25),
        b in arb_laurent(8, 25),
        theta in 0.0f64..1.0,
    ) {
        // Points on the unit circle, where Laurent evaluation is stable.
        let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * theta);
        let va = a.eval(z).unwrap();
        let vb = b.eval(z).unwrap();
        let vab = (&a * &b).eval(z).unwrap();
        let scale = va.norm() * vb.norm();
        prop_assert!(
            (vab - va * vb).norm() <= 1e-10 * scale.max(1.0),
            "eval not multiplicative: {} vs {}",
            vab,
            va * vb
        );
    }

    #[test]
    fn canonical_form_is_stable(x in arb_rational()) {
        // Rebuilding from the stored parts reproduces the same form.
        let y = RationalFn::new(x.num().clone(), x.den().clone()).unwrap();
        prop_assert_eq!(&x, &y);
        // Cross-multiplied equality agrees with representation equality.
        let num = x.num() * &LaurentPoly::from_int(3);
        let den = x.den() * &LaurentPoly::from_int(3);
        let z = RationalFn::new(num, den).unwrap();
        prop_assert_eq!(&x, &z);
    }
}
