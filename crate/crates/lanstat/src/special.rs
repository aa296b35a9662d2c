//! Gamma-family special functions used by the fractional spectral densities.
//!
//! `C(H) = Γ(2H+1) sin(πH)` and its first two H-derivatives are needed in
//! closed form; finite differences here would contaminate the Fisher
//! integrands downstream.

use statrs::function::gamma::{digamma, ln_gamma};

/// Trigamma function ψ₁(x) = d²/dx² ln Γ(x).
///
/// Recurrence ψ₁(x) = ψ₁(x+1) + 1/x² until x ≥ 10, then the asymptotic
/// series; accurate to ~1e-13 on x > 0, which is all the fBm constants need.
pub fn trigamma(mut x: f64) -> f64 {
    assert!(x > 0.0, "trigamma defined here only for x > 0");
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/x + 1/(2x^2) + 1/(6x^3) - 1/(30x^5) + 1/(42x^7) - 1/(30x^9)
    let series = inv
        + 0.5 * inv2
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)));
    acc + series
}

/// C(H) = Γ(2H+1) sin(πH), the fOU normalizing constant.
pub fn c_of_h(h: f64) -> f64 {
    (ln_gamma(2.0 * h + 1.0)).exp() * (std::f64::consts::PI * h).sin()
}

/// C'(H) = C(H) · [2ψ(2H+1) + π cot(πH)].
pub fn c_of_h_d1(h: f64) -> f64 {
    c_of_h(h) * log_c_d1(h)
}

/// C''(H) = C(H) · [g'(H)² + g''(H)] with g = ln C.
pub fn c_of_h_d2(h: f64) -> f64 {
    let g1 = log_c_d1(h);
    let pi = std::f64::consts::PI;
    let s = (pi * h).sin();
    let g2 = 4.0 * trigamma(2.0 * h + 1.0) - pi * pi / (s * s);
    c_of_h(h) * (g1 * g1 + g2)
}

fn log_c_d1(h: f64) -> f64 {
    let pi = std::f64::consts::PI;
    2.0 * digamma(2.0 * h + 1.0) + pi * (pi * h).cos() / (pi * h).sin()
}

/// C_H = Γ(2H+1) sin(πH) / π, the fBm-increment spectral constant.
pub fn fbm_constant(h: f64) -> f64 {
    c_of_h(h) / std::f64::consts::PI
}

/// d/dH C_H.
pub fn fbm_constant_d1(h: f64) -> f64 {
    c_of_h_d1(h) / std::f64::consts::PI
}

/// d²/dH² C_H.
pub fn fbm_constant_d2(h: f64) -> f64 {
    c_of_h_d2(h) / std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trigamma_known_values() {
        // psi_1(1) = pi^2/6, psi_1(1/2) = pi^2/2
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert_relative_eq!(trigamma(1.0), pi2 / 6.0, max_relative = 1e-12);
        assert_relative_eq!(trigamma(0.5), pi2 / 2.0, max_relative = 1e-12);
        assert_relative_eq!(trigamma(5.25), 0.209_957_146_2, max_relative = 1e-8);
    }

    #[test]
    fn c_h_at_half_is_one() {
        // Gamma(2) sin(pi/2) = 1
        assert_relative_eq!(c_of_h(0.5), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn c_h_derivatives_match_finite_differences() {
        let h_step = 1e-6;
        for &h in &[0.1, 0.25, 0.5, 0.7, 0.9] {
            let fd1 = (c_of_h(h + h_step) - c_of_h(h - h_step)) / (2.0 * h_step);
            assert_relative_eq!(c_of_h_d1(h), fd1, max_relative = 1e-7);
            let fd2 = (c_of_h(h + h_step) - 2.0 * c_of_h(h) + c_of_h(h - h_step))
                / (h_step * h_step);
            assert_relative_eq!(c_of_h_d2(h), fd2, max_relative = 1e-3);
        }
    }
}
