use dincl::polymodel::{compose, ModelConfig, Monomial, PolynomialModel};
use dincl::symexpr::parse;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

const ARITY: usize = 3;

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn pow(x: &BigRational, k: u32) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * x)
}

fn poly_exact(p: &PolynomialModel, z: &[BigRational]) -> BigRational {
    p.terms().iter().fold(BigRational::zero(), |acc, (m, c)| {
        acc + m.powers().fold(q(*c), |t, (v, k)| t * pow(&z[v], k))
    })
}

/// A member of the model's function set: the polynomial shifted by `s * error`.
fn member(p: &PolynomialModel, s: f64, z: &[BigRational]) -> BigRational {
    poly_exact(p, z) + q(s) * q(p.error())
}

fn encloses(r: &PolynomialModel, z: &[BigRational], value: &BigRational) -> bool {
    (value - poly_exact(r, z)).abs() <= q(r.error())
}

fn model() -> impl Strategy<Value = PolynomialModel> {
    let term = (prop::collection::vec(0u32..3, ARITY), prop_oneof![-2.0..2.0f64, -1e-6..1e-6f64]);
    (prop::collection::vec(term, 0..8), prop_oneof![Just(0.0), 0.0..0.01f64]).prop_map(|(terms, e)| {
        let terms = terms
            .into_iter()
            .map(|(pw, c)| (Monomial::from_powers(&pw.iter().enumerate().map(|(v, &k)| (v, k)).collect::<Vec<_>>()), c))
            .collect();
        PolynomialModel::from_terms(ARITY, terms, e)
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(-1.0), Just(1.0), -1.0..=1.0f64], ARITY)
}

fn config() -> impl Strategy<Value = ModelConfig> {
    (2u32..7, prop_oneof![Just(1e-15), Just(1e-3)])
        .prop_map(|(max_degree, sweep_threshold)| ModelConfig { max_degree, sweep_threshold, ..ModelConfig::default() })
}

fn exact_point(z: &[f64]) -> Vec<BigRational> {
    z.iter().map(|&x| q(x)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn ring_operations_enclose(a in model(), b in model(), sa in -1.0..=1.0f64, sb in -1.0..=1.0f64,
                               c in -3.0..3.0f64, z in point(), cfg in config()) {
        let zq = exact_point(&z);
        let (fa, fb) = (member(&a, sa, &zq), member(&b, sb, &zq));
        prop_assert!(encloses(&a.add(&b).unwrap(), &zq, &(&fa + &fb)));
        prop_assert!(encloses(&a.sub(&b).unwrap(), &zq, &(&fa - &fb)));
        prop_assert!(encloses(&a.mul(&b, &cfg).unwrap(), &zq, &(&fa * &fb)));
        prop_assert!(encloses(&a.sqr(&cfg), &zq, &(&fa * &fa)));
        prop_assert!(encloses(&a.powi(3, &cfg), &zq, &pow(&fa, 3)));
        prop_assert!(encloses(&a.scale(c), &zq, &(&fa * q(c))));
        prop_assert!(encloses(&a.add_constant(c), &zq, &(&fa + q(c))));
        prop_assert!(encloses(&a.clone().cleanup(&cfg), &zq, &fa));
    }

    #[test]
    fn ranges_and_sweeps_enclose(a in model(), s in -1.0..=1.0f64, z in point(), v in 0..ARITY) {
        let zq = exact_point(&z);
        let f = member(&a, s, &zq);
        for r in [a.range(), a.range_refined()] {
            prop_assert!(q(r.lo()) <= f && f <= q(r.hi()));
        }
        prop_assert!(encloses(&a.sweep(&[v]), &zq, &f));
    }

    #[test]
    fn substitution_encloses(a in model(), s in -1.0..=1.0f64, z in point(), v in 0..ARITY,
                             upper in any::<bool>(), cfg in config()) {
        let shift = if upper { 0.5 } else { -0.5 };
        let r = a.substitute_affine(v, shift, 0.5, &cfg);
        let zq = exact_point(&z);
        let mut inner = zq.clone();
        inner[v] = q(shift) + q(0.5) * &zq[v];
        prop_assert!(encloses(&r, &zq, &member(&a, s, &inner)));
    }

    #[test]
    fn antiderivative_encloses(a in model(), s in -1.0..=1.0f64, z in point(), half in 1e-4..1.0f64, cfg in config()) {
        let t = 0;
        let r = a.antiderivative(t, half, &cfg);
        let zq = exact_point(&z);
        let tau = &zq[t];
        let minus_one = -BigRational::one();
        let mut integral = q(s) * q(a.error()) * (tau + BigRational::one());
        for (m, c) in a.terms() {
            let k = m.power_of(t);
            let rest = m.powers().filter(|&(v, _)| v != t).fold(q(*c), |acc, (v, p)| acc * pow(&zq[v], p));
            let diff = pow(tau, k + 1) - pow(&minus_one, k + 1);
            integral += rest * diff / BigRational::from_integer((k + 1).into());
        }
        integral *= q(half);
        prop_assert!(encloses(&r, &zq, &integral));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn elementary_composition_encloses(a in model(), s in -1.0..=1.0f64, z in point(), which in 0usize..4, cfg in config()) {
        let (text, f): (&str, fn(f64) -> f64) = match which {
            0 => ("exp(x1)", f64::exp),
            1 => ("sin(x1)", f64::sin),
            2 => ("cos(x1)", f64::cos),
            _ => ("1/(x1 + 20)", |x| 1.0 / (x + 20.0)),
        };
        let a = a.scale(0.5);
        let Ok(r) = compose(&parse(text).unwrap(), std::slice::from_ref(&a), &cfg) else {
            return Ok(());
        };
        let zq = exact_point(&z);
        let x = member(&a, s, &zq);
        let xf = x.to_f64().unwrap();
        let value = f(xf);
        let scale: f64 = 1.0 + a.terms().iter().map(|(_, c)| c.abs()).sum::<f64>();
        let slack = 1e-13 * scale * (1.0 + value.abs());
        let dist = (q(value) - poly_exact(&r, &zq)).abs();
        prop_assert!(dist <= q(r.error() + slack), "{text} of {a} at {z:?}: {value} vs model {r}");
    }
}
