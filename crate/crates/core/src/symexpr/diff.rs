use super::Expr;

pub(super) fn diff(e: &Expr, j: usize) -> Expr {
    match e {
        Expr::Var(i) => {
            if *i == j {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Const(_) => Expr::zero(),
        Expr::Neg(a) => Expr::neg(diff(a, j)),
        Expr::Add(a, b) => Expr::add(diff(a, j), diff(b, j)),
        Expr::Sub(a, b) => Expr::sub(diff(a, j), diff(b, j)),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(diff(a, j), (**b).clone()),
            Expr::mul((**a).clone(), diff(b, j)),
        ),
        Expr::Div(a, b) => {
            let (da, db) = (diff(a, j), diff(b, j));
            if db.is_zero() {
                return Expr::div(da, (**b).clone());
            }
            Expr::div(
                Expr::sub(Expr::mul(da, (**b).clone()), Expr::mul((**a).clone(), db)),
                Expr::pow((**b).clone(), 2),
            )
        }
        Expr::Pow(a, n) => {
            let da = diff(a, j);
            if da.is_zero() {
                return Expr::zero();
            }
            Expr::mul(Expr::mul(Expr::constant(*n as f64), Expr::pow((**a).clone(), n - 1)), da)
        }
        Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), diff(a, j)),
        Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin((**a).clone()), diff(a, j))),
        Expr::Exp(a) => Expr::mul(Expr::exp((**a).clone()), diff(a, j)),
    }
}
