//! Integration-free values for the two-input quadratic system
//!
//! ```text
//! ż1 = (z2 − z1) ξ1,   ż2 = z2 (z2 − z1) ξ2,   z(0) = (0, 1),   y = z1
//! ```
//!
//! With `F(s, x) = ∫₀ˢ du / (x eᵘ − u)` and `G(·, x)` its inverse in `s`,
//! the output is `y(1) = ξ1 G(ξ1, ξ2/ξ1) / ξ2` on
//! `0 < ξ1 < e ξ2`, `0 < ξ2 < 1`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use core::f64::consts::E;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TtError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no bracket for w = {w}, x = {x}")]
    BracketFailure { w: f64, x: f64 },
    #[error("integrand denominator not positive at u = {u} for x = {x}")]
    IntegrandNotPositive { u: f64, x: f64 },
}

const MAX_DEPTH: u32 = 50;
const EXPANSIONS: u32 = 64;

/// `x eᵘ − u`, checked against its lower bound `1 + ln x`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn denominator(u: f64, x: f64) -> Result<f64, TtError> {
    let d = x * libm::exp(u) - u;
    if d < 1.0 + libm::log(x) - 1e-12 || !(d > 0.0) {
        return Err(TtError::IntegrandNotPositive { u, x });
    }
    Ok(d)
}

fn integrand(u: f64, x: f64) -> Result<f64, TtError> {
    Ok(1.0 / denominator(u, x)?)
}

fn check_x(x: f64) -> Result<(), TtError> {
    if x.is_finite() && x > 1.0 / E {
        Ok(())
    } else {
        Err(TtError::Domain(format!("x = {} must exceed 1/e", x)))
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    x: f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, TtError> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (integrand(lm, x)?, integrand(rm, x)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || libm::fabs(delta) <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_rec(x, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + simpson_rec(x, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}

/// `∫ₐᵇ du / (x eᵘ − u)` by adaptive Simpson with absolute tolerance `tol`.
fn simpson(a: f64, b: f64, x: f64, tol: f64) -> Result<f64, TtError> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb) = (integrand(a, x)?, integrand(b, x)?);
    let fm = integrand(0.5 * (a + b), x)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(x, a, b, fa, fm, fb, whole, tol, 0)
}

/// `F(s, x)` for `x > 1/e`.
pub fn tt_f(s: f64, x: f64, tol: f64) -> Result<f64, TtError> {
    check_x(x)?;
    if !s.is_finite() {
        return Err(TtError::Domain(format!("s = {} is not finite", s)));
    }
    simpson(0.0, s, x, tol)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`,
/// `n ≥ 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if libm::fabs(dx) < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// `F(s, x)` by composite Gauss–Legendre with `panels` panels of `order`
/// points. Independent of the adaptive rule, for cross-checks.
pub fn tt_f_gauss(s: f64, x: f64, panels: usize, order: usize) -> Result<f64, TtError> {
    check_x(x)?;
    let (nodes, weights) = gauss_legendre(order);
    let h = s / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (t, w) in nodes.iter().zip(&weights) {
            total += half * w * integrand(mid + half * t, x)?;
        }
    }
    Ok(total)
}

/// `s` with `F(s, x) = w`, for `0 < w < 1/x` and `x > 1/e`.
pub fn tt_g(w: f64, x: f64, tol: f64) -> Result<f64, TtError> {
    check_x(x)?;
    if !(w > 0.0 && w < 1.0 / x) {
        return Err(TtError::Domain(format!("w = {} must lie in (0, 1/x) for x = {}", w, x)));
    }
    let qtol = tol * 1e-2;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut f_hi = tt_f(hi, x, qtol)?;
    let mut n = 0;
    while f_hi < w {
        lo = hi;
        hi *= 2.0;
        n += 1;
        if n > EXPANSIONS {
            return Err(TtError::BracketFailure { w, x });
        }
        f_hi = tt_f(hi, x, qtol)?;
    }
    // Newton on the increasing F, kept inside the bracket.
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = tt_f(s, x, qtol)? - w;
        if libm::fabs(r) <= tol {
            return Ok(s);
        }
        if r > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let next = s - r * denominator(s, x)?;
        s = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * hi.max(1.0) {
            return Ok(s);
        }
    }
    Ok(s)
}

/// Whether `(ξ1, ξ2)` lies where the closed form holds.
pub fn in_domain(xi1: f64, xi2: f64) -> bool {
    xi2 > 0.0 && xi2 < 1.0 && xi1 > 0.0 && xi1 < E * xi2
}

/// `y(1; ξ1, ξ2) = ξ1 G(ξ1, ξ2/ξ1) / ξ2`.
pub fn tt_oracle(xi1: f64, xi2: f64, tol: f64) -> Result<f64, TtError> {
    if !in_domain(xi1, xi2) {
        return Err(TtError::Domain(format!(
            "({}, {}) needs 0 < ξ1 < e·ξ2 and 0 < ξ2 < 1",
            xi1, xi2
        )));
    }
    Ok(xi1 * tt_g(xi1, xi2 / xi1, tol)? / xi2)
}
