//! Shared helpers for the integration tests.
#![allow(dead_code)]

use orbitword_core::numerics::BallReal;
use rug::{Integer, Rational};

/// Parse a plain decimal string (`-?d+(.d+)?`) into an exact rational.
pub fn dec(s: &str) -> Rational {
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1, r),
        None => (1, s),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rest, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    let numer = Integer::from_str_radix(&digits, 10).expect("decimal digits");
    let denom = Integer::from(10).pow(frac_part.len() as u32);
    Rational::from((numer * sign, denom))
}

/// Assert that a ball's midpoint is within `10^-tol_digits` of the exact
/// decimal in `expect`, and that its radius is at least as tight.
pub fn assert_ball_near(ball: &BallReal, expect: &str, tol_digits: i32) {
    let want = dec(expect);
    let bits = ball.prec().max(256);
    let diff = ball
        .sub(&BallReal::from_rational(&want, bits))
        .abs_upper()
        .to_f64();
    let tol = 10f64.powi(-tol_digits);
    assert!(
        diff <= tol,
        "value {} differs from {} by {:.3e} > {:.3e}",
        ball.to_f64(),
        expect,
        diff,
        tol
    );
}

use rug::ops::Pow;
