//! Validated exp, sin and cos.
//!
//! Arguments are range-reduced with interval constants and the reduced value
//! is fed to a truncated Taylor series evaluated in interval arithmetic, plus
//! an explicit Lagrange remainder. Nothing depends on libm accuracy.

use super::Interval;

const SERIES_TERMS: usize = 24;

/// `sum_{k<=N} x^k/k!` plus remainder, for `|x| <= 0.75`.
fn exp_series(x: Interval) -> Interval {
    let mut term = Interval::ONE;
    let mut terms = Vec::with_capacity(SERIES_TERMS);
    for k in 1..=SERIES_TERMS {
        term = (term * x).checked_div(Interval::point(k as f64)).expect("nonzero");
        terms.push(term);
    }
    // Smallest terms first keeps the rounding slack at the scale of the tail.
    let sum = Interval::ONE + terms.into_iter().rev().sum::<Interval>();
    // |R| <= |x|^{N+1}/(N+1)! * e^{|x|}, and e^{0.75} < 3.
    let m = x.mag();
    let mut r = 3.0;
    for k in 1..=SERIES_TERMS + 1 {
        r = r * m / k as f64;
    }
    sum.inflate(r * 1.01 + f64::MIN_POSITIVE)
}

/// Enclosure of `e^x` for a single floating-point `x`.
pub(crate) fn exp_point(x: f64) -> Interval {
    if x.is_nan() {
        return Interval::ENTIRE;
    }
    if x == f64::NEG_INFINITY {
        return Interval::ZERO;
    }
    if x > 709.7 {
        return Interval { lo: if x.is_finite() { f64::MAX } else { f64::INFINITY }, hi: f64::INFINITY };
    }
    if x < -745.0 {
        return Interval { lo: 0.0, hi: f64::MIN_POSITIVE };
    }
    if x == 0.0 {
        return Interval::ONE;
    }
    let k = (x / std::f64::consts::LN_2).round();
    let r = Interval::point(x) - Interval::LN_2 * k;
    let body = exp_series(r);
    // 2^k split in two halves so that neither factor underflows.
    let k = k as i32;
    let k1 = k / 2;
    let k2 = k - k1;
    body * Interval::point(2f64.powi(k1)) * Interval::point(2f64.powi(k2))
}

fn sin_series(x: Interval) -> Interval {
    // x - x^3/3! + ...
    let x2 = x.sqr();
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    for i in 1..SERIES_TERMS / 2 {
        term = (term * x2).checked_div(Interval::point((k + 1.0) * (k + 2.0))).expect("nonzero");
        k += 2.0;
        sum = if i % 2 == 1 { sum - term } else { sum + term };
    }
    sum.inflate(remainder(x.mag(), k as usize + 2))
}

fn cos_series(x: Interval) -> Interval {
    let x2 = x.sqr();
    let mut term = Interval::ONE;
    let mut sum = Interval::ONE;
    let mut k = 0.0;
    for i in 1..SERIES_TERMS / 2 {
        term = (term * x2).checked_div(Interval::point((k + 1.0) * (k + 2.0))).expect("nonzero");
        k += 2.0;
        sum = if i % 2 == 1 { sum - term } else { sum + term };
    }
    sum.inflate(remainder(x.mag(), k as usize + 2))
}

/// `m^n / n!` rounded generously upward.
fn remainder(m: f64, n: usize) -> f64 {
    if m == 0.0 {
        return 0.0;
    }
    let mut r = 1.0;
    for k in 1..=n {
        r = r * m / k as f64;
    }
    r * 1.01 + f64::MIN_POSITIVE
}

/// Enclosure of `sin(x + quarter * pi/2)` for a floating-point `x`.
fn sin_shifted_point(x: f64, quarter: i64) -> Interval {
    if !x.is_finite() {
        return Interval::UNIT;
    }
    let q = (x / std::f64::consts::FRAC_PI_2).round();
    let r = Interval::point(x) - Interval::FRAC_PI_2 * q;
    if r.width() > 0.5 || q.abs() > 1e15 {
        return Interval::UNIT;
    }
    let quadrant = ((q as i64 + quarter) % 4 + 4) % 4;
    let v = match quadrant {
        0 => sin_series(r),
        1 => cos_series(r),
        2 => -sin_series(r),
        _ => -cos_series(r),
    };
    v.intersect(&Interval::UNIT).unwrap_or(Interval::UNIT)
}

/// Does `[lo, hi]` certainly avoid every point `offset + 2*pi*k`? Returns
/// `true` when such a point may lie inside.
fn may_contain_phase(x: Interval, offset: Interval) -> bool {
    let two_pi = Interval::PI * 2.0;
    let a = (Interval::point(x.lo()) - offset).checked_div(two_pi).expect("nonzero");
    let b = (Interval::point(x.hi()) - offset).checked_div(two_pi).expect("nonzero");
    a.lo().ceil() <= b.hi().floor()
}

fn sin_shifted_interval(x: Interval, quarter: i64) -> Interval {
    if !x.is_finite() || x.width() >= 6.3 {
        return Interval::UNIT;
    }
    let mut out = sin_shifted_point(x.lo(), quarter).hull(&sin_shifted_point(x.hi(), quarter));
    // sin(t + quarter*pi/2) peaks where t = pi/2 - quarter*pi/2 (mod 2pi) and
    // bottoms out where t = -pi/2 - quarter*pi/2 (mod 2pi).
    let shift = Interval::FRAC_PI_2 * (quarter as f64);
    if may_contain_phase(x, Interval::FRAC_PI_2 - shift) {
        out = out.hull_point(1.0);
    }
    if may_contain_phase(x, -Interval::FRAC_PI_2 - shift) {
        out = out.hull_point(-1.0);
    }
    out
}

pub(crate) fn sin_interval(x: Interval) -> Interval {
    sin_shifted_interval(x, 0)
}

pub(crate) fn cos_interval(x: Interval) -> Interval {
    sin_shifted_interval(x, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_zero_is_tight() {
        let e = exp_point(0.0);
        assert!(e.contains(1.0));
        assert!(e.width() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn exp_matches_known_values() {
        // e^0.027 = 1.0273678027634894..., high-precision series oracle.
        let e = exp_point(0.027);
        assert!(e.lo() <= 1.027_367_802_763_489_4 && 1.027_367_802_763_489_4 <= e.hi());
        assert!(e.width() <= 4.0 * f64::EPSILON);
        let one = Interval::new(-1.0, 1.0).exp();
        assert!(one.lo() <= 0.367_879_441_171_442_3 && one.hi() >= std::f64::consts::E);
        let big = exp_point(700.0);
        assert!(big.is_finite() && big.lo() > 1e304);
        let tiny = exp_point(-700.0);
        assert!(tiny.lo() > 0.0 && tiny.hi() < 1e-303);
    }

    #[test]
    fn sin_and_cos_extrema() {
        let s = Interval::new(0.0, 0.1).sin();
        assert!(s.lo() >= 0.0 && s.hi() <= 0.1);
        let s = Interval::new(1.0, 2.0).sin();
        assert_eq!(s.hi(), 1.0);
        let c = Interval::new(3.0, 3.3).cos();
        assert_eq!(c.lo(), -1.0);
        let c = Interval::new(-0.1, 0.1).cos();
        assert_eq!(c.hi(), 1.0);
        assert!(c.lo() <= 0.1f64.cos() && c.lo() > 0.99);
    }
}
