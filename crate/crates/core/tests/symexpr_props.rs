use dincl::interval::Interval;
use dincl::symexpr::{parse, Expr};
use proptest::prelude::*;

const DIM: usize = 3;

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0..DIM).prop_map(Expr::var), (-3i32..=3).prop_map(|c| Expr::constant(c as f64 * 0.5))];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), 0i32..4).prop_map(|(a, n)| Expr::pow(a, n)),
            inner.clone().prop_map(Expr::neg),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.prop_map(|a| Expr::exp(Expr::mul(Expr::constant(0.25), Expr::sin(a)))),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5..1.5f64, DIM)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn derivatives_match_finite_differences(e in expr(), x in point(), j in 0..DIM) {
        let d = e.diff(j);
        let h = 1e-5;
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[j] += h;
        xm[j] -= h;
        let fd = (e.eval(&xp) - e.eval(&xm)) / (2.0 * h);
        let exact = d.eval(&x);
        prop_assume!(exact.is_finite() && fd.is_finite());
        let scale = 1.0 + exact.abs() + e.eval(&x).abs();
        prop_assert!((exact - fd).abs() <= 1e-5 * scale, "d/dx{} of {e} = {d}: {exact} vs {fd}", j + 1);
    }

    #[test]
    fn second_derivatives_are_symmetric(e in expr(), x in point(), i in 0..DIM, j in 0..DIM) {
        let a = e.diff(i).diff(j).eval(&x);
        let b = e.diff(j).diff(i).eval(&x);
        prop_assume!(a.is_finite() && b.is_finite());
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn interval_evaluation_encloses_points(e in expr(), x in point(), w in 0.0..0.5f64) {
        let b: Vec<Interval> = x.iter().map(|&c| Interval::new(c - w, c + w)).collect();
        if let Ok(r) = e.eval_interval(&b) {
            for corner in [-1.0, 0.0, 1.0] {
                let p: Vec<f64> = x.iter().map(|&c| c + corner * w).collect();
                let v = e.eval(&p);
                prop_assert!(r.inflate(1e-12 * (1.0 + v.abs())).contains(v), "{e} on {b:?}: {r} misses {v}");
            }
        }
    }

    #[test]
    fn display_round_trips(e in expr(), x in point()) {
        let back = parse(&e.to_string()).unwrap();
        let (a, b) = (e.eval(&x), back.eval(&x));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{e} reparsed as {back}");
    }
}
