//! Directed rounding by error-free transformations.
//!
//! Each primitive computes the round-to-nearest result and the exact sign of
//! the rounding error (TwoSum for sums, FMA residuals for products and
//! quotients), stepping one ulp outward only when the result was inexact in
//! the wrong direction. No global floating-point state is touched.

use std::cmp::Ordering;

/// Sign of `(a + b) - fl(a + b)`.
#[inline]
fn sum_residual(a: f64, b: f64, s: f64) -> Ordering {
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    err.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
}

#[inline]
fn overflowed(s: f64, a: f64, b: f64) -> bool {
    s.is_infinite() && a.is_finite() && b.is_finite()
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        if overflowed(s, a, b) && s > 0.0 {
            return f64::MAX;
        }
        return s;
    }
    match sum_residual(a, b, s) {
        Ordering::Less => s.next_down(),
        _ => s,
    }
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        if overflowed(s, a, b) && s < 0.0 {
            return -f64::MAX;
        }
        return s;
    }
    match sum_residual(a, b, s) {
        Ordering::Greater => s.next_up(),
        _ => s,
    }
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// Sign of `a*b - fl(a*b)`, valid when the product neither overflows nor
/// lands in the subnormal range (where the FMA residual is not exact).
#[inline]
fn mul_residual(a: f64, b: f64, p: f64) -> Option<Ordering> {
    if p.abs() < 1e-290 || !p.is_finite() {
        return None;
    }
    let err = a.mul_add(b, -p);
    Some(err.partial_cmp(&0.0).unwrap_or(Ordering::Equal))
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() && a.is_finite() && b.is_finite() && p > 0.0 {
        return f64::MAX;
    }
    match mul_residual(a, b, p) {
        Some(Ordering::Less) | None if p.is_finite() => p.next_down(),
        _ => p,
    }
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() && a.is_finite() && b.is_finite() && p < 0.0 {
        return -f64::MAX;
    }
    match mul_residual(a, b, p) {
        Some(Ordering::Greater) | None if p.is_finite() => p.next_up(),
        _ => p,
    }
}

/// Sign of `a/b - fl(a/b)`. The remainder `a - q*b` is exact via FMA when the
/// quotient is normal.
#[inline]
fn div_residual(a: f64, b: f64, q: f64) -> Option<Ordering> {
    if q.abs() < 1e-290 || !q.is_finite() || !b.is_finite() {
        return None;
    }
    let r = (-q).mul_add(b, a);
    let s = r.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
    Some(if b < 0.0 { s.reverse() } else { s })
}

#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_infinite() && a.is_finite() && q > 0.0 {
        return f64::MAX;
    }
    match div_residual(a, b, q) {
        Some(Ordering::Less) | None if q.is_finite() => q.next_down(),
        _ => q,
    }
}

#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_infinite() && a.is_finite() && q < 0.0 {
        return -f64::MAX;
    }
    match div_residual(a, b, q) {
        Some(Ordering::Greater) | None if q.is_finite() => q.next_up(),
        _ => q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_operations_are_not_widened() {
        assert_eq!(add_down(1.0, 3.0), 4.0);
        assert_eq!(add_up(2.0, 4.0), 6.0);
        assert_eq!(mul_down(-1.0, 2.0), -2.0);
        assert_eq!(mul_up(0.5, 8.0), 4.0);
        assert_eq!(div_up(1.0, 4.0), 0.25);
        assert_eq!(div_down(1.0, 4.0), 0.25);
    }

    #[test]
    fn inexact_operations_bracket_the_true_value() {
        // 0.1 + 0.2 is not representable.
        let lo = add_down(0.1, 0.2);
        let hi = add_up(0.1, 0.2);
        assert!(lo < hi);
        assert_eq!(hi.next_down(), lo);
        let lo = div_down(1.0, 3.0);
        let hi = div_up(1.0, 3.0);
        assert_eq!(lo.next_up(), hi);
        assert!(3.0 * lo <= 1.0 && 1.0 <= 3.0 * hi);
        let lo = div_down(-1.0, 3.0);
        let hi = div_up(-1.0, 3.0);
        assert_eq!(lo.next_up(), hi);
    }

    #[test]
    fn overflow_saturates_in_the_safe_direction() {
        assert_eq!(add_down(f64::MAX, f64::MAX), f64::MAX);
        assert_eq!(add_up(f64::MAX, f64::MAX), f64::INFINITY);
        assert_eq!(mul_down(1e200, 1e200), f64::MAX);
        assert_eq!(mul_up(-1e200, 1e200), -f64::MAX);
    }
}
