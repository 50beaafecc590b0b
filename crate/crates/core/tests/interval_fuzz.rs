use dincl::interval::Interval;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn holds(iv: Interval, exact: &BigRational) -> bool {
    q(iv.lo()) <= *exact && *exact <= q(iv.hi())
}

fn magnitude() -> impl Strategy<Value = f64> {
    prop_oneof![-1.0..1.0f64, -1e3..1e3f64, -1e-8..1e-8f64, -1e12..1e12f64]
}

/// An interval and a point inside it.
fn interval_with_point() -> impl Strategy<Value = (Interval, f64)> {
    (magnitude(), magnitude(), 0.0..=1.0f64).prop_map(|(a, b, s)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = if s < 0.1 { lo } else if s > 0.9 { hi } else { (lo + s * (hi - lo)).clamp(lo, hi) };
        (Interval::new(lo, hi), x)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn arithmetic_contains_exact_results((a, x) in interval_with_point(), (b, y) in interval_with_point()) {
        let (qx, qy) = (q(x), q(y));
        prop_assert!(holds(a + b, &(&qx + &qy)));
        prop_assert!(holds(a - b, &(&qx - &qy)));
        prop_assert!(holds(a * b, &(&qx * &qy)));
        prop_assert!(holds(-a, &-qx.clone()));
        prop_assert!(holds(a.sqr(), &(&qx * &qx)));
        if !b.contains_zero() {
            prop_assert!(holds(a.checked_div(b).unwrap(), &(&qx / &qy)));
        }
    }

    #[test]
    fn powers_contain_exact_results((a, x) in interval_with_point(), n in 0i32..7) {
        let mut p = BigRational::one();
        for _ in 0..n {
            p *= q(x);
        }
        prop_assert!(holds(a.powi(n).unwrap(), &p));
    }

    #[test]
    fn elementary_functions_contain_point_values((a, x) in interval_with_point()) {
        if x.abs() < 700.0 {
            let e = a.exp();
            if a.hi() < 700.0 {
                prop_assert!(e.contains(x.exp()), "exp {a} at {x}: {e}");
            }
        }
        if a.width() < 1e6 {
            prop_assert!(a.sin().contains(x.sin()), "sin {a} at {x}");
            prop_assert!(a.cos().contains(x.cos()), "cos {a} at {x}");
        }
    }

    #[test]
    fn set_operations_are_consistent((a, x) in interval_with_point(), (b, _) in interval_with_point()) {
        let h = a.hull(&b);
        prop_assert!(a.is_subset(&h) && b.is_subset(&h));
        if let Some(i) = a.intersect(&b) {
            prop_assert!(i.is_subset(&a) && i.is_subset(&b));
        }
        prop_assert!(a.contains(x));
        prop_assert!(a.abs().contains(x.abs()));
        prop_assert!(a.mag() >= x.abs() && a.mig() <= x.abs());
    }
}
