use finite_part::gamma::beta_log_integral;
use finite_part::grassmann::MultiVector;
use finite_part::quadrature::{integrate, QuadratureSpec};
use finite_part::{LaurentSeries, ZetaExpr};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=6).prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

fn zeta_expr() -> impl Strategy<Value = ZetaExpr> {
    let monomial = (
        rational(),
        0u32..=2,
        0u32..=3,
        prop::collection::vec(prop::sample::select(vec![2u32, 3, 4, 5, 7]), 0..=2),
    )
        .prop_map(|(c, g, p, args)| ZetaExpr::monomial(c, g, p, args).unwrap());
    prop::collection::vec(monomial, 0..=3).prop_map(|ms| {
        ms.into_iter()
            .fold(ZetaExpr::from_integer(0), |acc, m| &acc + &m)
    })
}

fn series() -> impl Strategy<Value = LaurentSeries<ZetaExpr>> {
    (-3i32..=2, prop::collection::vec(rational(), 1..=6)).prop_map(|(min, cs)| {
        LaurentSeries::new(min, cs.into_iter().map(ZetaExpr::from_rational).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_axioms(a in zeta_expr(), b in zeta_expr(), c in zeta_expr()) {
        let zero = ZetaExpr::from_integer(0);
        let one = ZetaExpr::from_integer(1);
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &zero, a.clone());
        prop_assert_eq!(&a * &one, a.clone());
        prop_assert_eq!(&a - &a, zero.clone());
        prop_assert_eq!(&a * &zero, zero);
        let (x, y) = (a.eval(), b.eval());
        let prod = (&a * &b).eval();
        prop_assert!((prod - x * y).abs() <= 1e-9 * (1.0 + (x * y).abs()));
    }

    #[test]
    fn laurent_convolution(a in series(), b in series()) {
        let p = a.mul(&b).unwrap();
        let trunc = (a.trunc_order() + b.min_order()).min(b.trunc_order() + a.min_order());
        prop_assert_eq!(p.trunc_order(), trunc);
        for k in (a.min_order() + b.min_order())..=trunc {
            let mut expected = ZetaExpr::from_integer(0);
            for i in a.min_order()..=a.trunc_order() {
                let j = k - i;
                if j >= b.min_order() && j <= b.trunc_order() {
                    expected += &(&a.coeff(i).unwrap() * &b.coeff(j).unwrap());
                }
            }
            prop_assert_eq!(p.coeff(k).unwrap(), expected);
        }
        prop_assert!(p.coeff(trunc + 1).is_err());
    }

    #[test]
    fn grassmann_fuzz(
        n in 1usize..=4,
        seeds in prop::collection::vec(-2.0f64..2.0, 48),
    ) {
        let mut it = seeds.into_iter();
        let mut next = || Complex64::new(it.next().unwrap(), it.next().unwrap());
        let one_form = |next: &mut dyn FnMut() -> Complex64| {
            (1..=n).fold(MultiVector::zero(n), |acc, j| {
                acc.add(&MultiVector::dz(n, j).scale(next())).unwrap()
                    .add(&MultiVector::dzbar(n, j).scale(next())).unwrap()
            })
        };
        let a = one_form(&mut next);
        let b = one_form(&mut next);
        let c = one_form(&mut next);
        let tol = |v: &MultiVector| 1e-12 * (1.0 + v.max_abs());
        // anticommutativity of 1-forms and nilpotency
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        prop_assert!(ab.add(&ba).unwrap().max_abs() <= tol(&ab));
        prop_assert!(a.wedge(&a).unwrap().max_abs() <= tol(&a));
        // 2-forms commute with 1-forms
        let abc = ab.wedge(&c).unwrap();
        let cab = c.wedge(&ab).unwrap();
        prop_assert!(abc.add(&cab.scale(Complex64::new(-1.0, 0.0))).unwrap().max_abs() <= tol(&abc));
        // associativity
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert!(left.add(&right.scale(Complex64::new(-1.0, 0.0))).unwrap().max_abs() <= tol(&left));
        // bilinearity
        let lhs = a.add(&b).unwrap().wedge(&c).unwrap();
        let rhs = a.wedge(&c).unwrap().add(&b.wedge(&c).unwrap()).unwrap();
        prop_assert!(lhs.add(&rhs.scale(Complex64::new(-1.0, 0.0))).unwrap().max_abs() <= tol(&lhs));
    }
}

#[test]
fn beta_log_integrals_match_quadrature() {
    let spec = QuadratureSpec::for_dim(1);
    for a in 0..=3 {
        for b in 0..=3 {
            for k in 0..=4u32 {
                for m in 0..=(4 - k) {
                    let exact = beta_log_integral(a, b, k, m).unwrap().eval();
                    let numeric = integrate(
                        1,
                        |x, xc| {
                            x[0].powi(a as i32)
                                * xc[0].powi(b as i32)
                                * x[0].ln().powi(k as i32)
                                * xc[0].ln().powi(m as i32)
                        },
                        &spec,
                    )
                    .unwrap()
                    .value;
                    assert!(
                        (exact - numeric).abs() <= 1e-9 * exact.abs(),
                        "(a,b,k,m)=({a},{b},{k},{m}): {exact} vs {numeric}"
                    );
                }
            }
        }
    }
}
