//! Validated reachability analysis for input-affine differential inclusions
//!
//! ```text
//! x'(t) = f(x) + sum_i g_i(x) v_i(t),   |v_i(t)| <= V_i
//! ```
//!
//! Each time step flows a finitely parameterised surrogate system with
//! polynomial models and inflates the result by a uniform analytic bound on
//! the distance between surrogate and true solutions.

pub mod flow;
pub mod inputs;
pub mod interval;
pub mod localerr;
pub mod montecarlo;
pub mod polymodel;
pub mod report;
pub mod reach;
pub mod scenario;
pub mod symexpr;
pub mod tables;
