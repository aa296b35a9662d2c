//! Stationary fractional Ornstein–Uhlenbeck process sampled at mesh Δ_n
//! under joint infill/long-span asymptotics T_n = C·Δ_n^{−β}.
//!
//! θ = (κ, H, σ²) with κ > 0, H ∈ (0,1), σ² > 0 (the κ/H slot order follows
//! the gradient layout of the sampled density; see README). The sampled
//! spectral density is the fold sum
//!
//!   f_n^θ(λ) = (σ²/2π) C(H) Σ_{k∈Z} Δ^{2H} |λ+2πk|^{1−2H} / (κ²Δ² + (λ+2πk)²),
//!
//! with C(H) = Γ(2H+1) sin(πH). κ- and H-gradients are term-wise analytic;
//! the θ-Hessian is a finite difference of the gradient.

use nalgebra::{DMatrix, DVector};

use super::fbm::tail_sum;
use super::{ModelStage, SpectralModel, THETA_MARGIN};
use crate::error::{Error, Result};
use crate::quad::{integrate_vec, QuadSettings};
use crate::special::{c_of_h, c_of_h_d1};

const FOLD_CUTOFF: i64 = 256;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
pub struct FouModel {
    /// Span exponent: T_n = t_scale · Δ_n^{−β}.
    pub beta: f64,
    pub t_scale: f64,
}

impl FouModel {
    pub fn new(beta: f64, t_scale: f64) -> Result<Self> {
        if !(beta > 0.0) || !(t_scale > 0.0) {
            return Err(Error::Contract(format!(
                "span rule needs beta > 0 and scale > 0, got beta={beta}, scale={t_scale}"
            )));
        }
        Ok(FouModel { beta, t_scale })
    }

    pub fn mesh(&self, n: usize) -> f64 {
        (self.t_scale / n as f64).powf(1.0 / (1.0 + self.beta))
    }

    pub fn span(&self, n: usize) -> f64 {
        self.t_scale * self.mesh(n).powf(-self.beta)
    }

    /// Value of 1 + β/4 − 5H + 2H²; the LAN theory requires it positive.
    pub fn lan_condition(&self, h: f64) -> f64 {
        1.0 + 0.25 * self.beta - 5.0 * h + 2.0 * h * h
    }

    /// Fold sums S₀, S₁ (log-weighted) and S_κ (squared denominator) at
    /// mesh Δ: S_j = Σ_k u^{1−2H} lnʲu / (κ²Δ²+u²), S_κ = Σ_k u^{1−2H}/(κ²Δ²+u²)².
    fn sums(&self, kappa: f64, h: f64, mesh: f64, lambda: f64, with_logs: bool) -> (f64, f64, f64) {
        let lam = lambda.abs();
        let c2 = kappa * kappa * mesh * mesh;
        let e = 1.0 - 2.0 * h;
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut sk = 0.0;
        for k in -FOLD_CUTOFF..=FOLD_CUTOFF {
            let u = (TWO_PI * k as f64 + lam).abs();
            let num = u.powf(e);
            let den = c2 + u * u;
            let t = num / den;
            s0 += t;
            sk += t / den;
            if with_logs {
                s1 += t * u.ln();
            }
        }
        // tails: 1/(c²+u²) = u⁻²(1 − c²/u² + c⁴/u⁴ − …)
        let s = 1.0 + 2.0 * h;
        for b in [lam, -lam] {
            let t0 = tail_sum(s, 0, FOLD_CUTOFF, b);
            let t2 = tail_sum(s + 2.0, 0, FOLD_CUTOFF, b);
            let t4 = tail_sum(s + 4.0, 0, FOLD_CUTOFF, b);
            s0 += t0 - c2 * t2 + c2 * c2 * t4;
            sk += t2 - 2.0 * c2 * t4;
            if with_logs {
                let l0 = tail_sum(s, 1, FOLD_CUTOFF, b);
                let l2 = tail_sum(s + 2.0, 1, FOLD_CUTOFF, b);
                s1 += l0 - c2 * l2;
            }
        }
        (s0, s1, sk)
    }
}

impl SpectralModel for FouModel {
    fn id(&self) -> &'static str {
        "fou"
    }

    fn dimension(&self) -> usize {
        3
    }

    fn stage(&self, n: usize) -> ModelStage {
        ModelStage {
            n,
            mesh: Some(self.mesh(n)),
            span: Some(self.span(n)),
            drift_scale: None,
        }
    }

    fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == 3
            && theta[0] > THETA_MARGIN
            && theta[1] > THETA_MARGIN
            && theta[1] < 1.0 - THETA_MARGIN
            && theta[2] > THETA_MARGIN
    }

    fn density(&self, theta: &[f64], n: usize, lambda: f64) -> f64 {
        let (kappa, h, s2) = (theta[0], theta[1], theta[2]);
        let d = self.mesh(n);
        let (s0, _, _) = self.sums(kappa, h, d, lambda, false);
        s2 / TWO_PI * c_of_h(h) * d.powf(2.0 * h) * s0
    }

    fn gradient(&self, theta: &[f64], n: usize, lambda: f64) -> DVector<f64> {
        let (kappa, h, s2) = (theta[0], theta[1], theta[2]);
        let d = self.mesh(n);
        let (s0, s1, sk) = self.sums(kappa, h, d, lambda, true);
        let ch = c_of_h(h);
        let p = d.powf(2.0 * h);
        let f = s2 / TWO_PI * ch * p * s0;
        let d_kappa = s2 / TWO_PI * ch * p * (-2.0 * kappa * d * d) * sk;
        let d_h = s2 / TWO_PI * p * ((c_of_h_d1(h) + 2.0 * d.ln() * ch) * s0 - 2.0 * ch * s1);
        DVector::from_vec(vec![d_kappa, d_h, f / s2])
    }

    fn density_hessian(&self, theta: &[f64], n: usize, lambda: f64) -> DMatrix<f64> {
        super::fd_hessian_from_gradient(theta, |th| self.gradient(th, n, lambda))
    }

    fn rate_matrix(&self, theta: &[f64], n: usize) -> DMatrix<f64> {
        let d = self.mesh(n);
        let t = self.span(n);
        let s2 = theta[2];
        let rate = (t / d).powf(-0.5);
        let mut r = DMatrix::zeros(3, 3);
        r[(0, 0)] = t.powf(-0.5);
        r[(1, 1)] = rate;
        r[(2, 1)] = 2.0 * s2 * rate * (-d.ln());
        r[(2, 2)] = rate;
        r
    }

    fn limiting_fisher(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let (kappa, h, s2) = (theta[0], theta[1], theta[2]);
        let f_h = |lam: f64| fisher_weight(h, lam);
        let mut integrand = |lam: f64, out: &mut [f64]| {
            let f = f_h(lam);
            out[0] = f * f;
            out[1] = f / s2;
        };
        let (vals, _err) =
            integrate_vec(&mut integrand, 2, 0.0, &QuadSettings { tol: 1e-10, max_depth: 16 });
        let mut out = DMatrix::zeros(3, 3);
        out[(0, 0)] = 0.5 / kappa;
        let c = 1.0 / (4.0 * std::f64::consts::PI);
        out[(1, 1)] = c * vals[0];
        out[(1, 2)] = c * vals[1];
        out[(2, 1)] = c * vals[1];
        out[(2, 2)] = 0.5 / (s2 * s2);
        Ok(out)
    }

    fn alpha_hint(&self, theta: &[f64]) -> f64 {
        (2.0 * theta[1] - 1.0).max(0.0)
    }
}

/// F_H(λ) = C'(H)/C(H) + (2 log|λ|⁻¹ + 2|λ|^{2H+1} ∂_H G_H) / (1 + 2|λ|^{2H+1} G_H)
/// with G_H(λ) = Σ_{k≥1} (λ+2πk)^{−1−2H}.
pub fn fisher_weight(h: f64, lambda: f64) -> f64 {
    let lam = lambda.abs();
    let s = 1.0 + 2.0 * h;
    let mut g = 0.0;
    let mut dg = 0.0;
    for k in 1..=FOLD_CUTOFF {
        let u = TWO_PI * k as f64 + lam;
        let p = u.powf(-s);
        g += p;
        dg += -2.0 * p * u.ln();
    }
    g += tail_sum(s, 0, FOLD_CUTOFF, lam);
    dg += -2.0 * tail_sum(s, 1, FOLD_CUTOFF, lam);
    let w = 2.0 * lam.powf(2.0 * h + 1.0);
    c_of_h_d1(h) / c_of_h(h) + (2.0 * (1.0 / lam).ln() + w * dg) / (1.0 + w * g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const THETA: [f64; 3] = [1.0, 0.3, 1.0];

    fn model() -> FouModel {
        FouModel::new(0.5, 1.0).unwrap()
    }

    #[test]
    fn stage_span_rule() {
        let m = model();
        let st = m.stage(4096);
        assert_relative_eq!(st.mesh.unwrap(), 4096.0f64.powf(-2.0 / 3.0), max_relative = 1e-12);
        assert_relative_eq!(st.span.unwrap(), 16.0, max_relative = 1e-12);
    }

    #[test]
    fn half_hurst_matches_sampled_ou_closed_form() {
        // H = 1/2: sampled OU is AR(1) with phi = exp(-kappa Delta) and
        // gamma(0) = sigma^2/(2 kappa); spectral density
        // (sigma^2/(4 pi kappa)) sinh(kappa D)/(cosh(kappa D) - cos(lambda)).
        let m = model();
        let th = [0.8, 0.5, 1.3];
        let n = 128;
        let d = m.mesh(n);
        let kd = 0.8 * d;
        for &lam in &[0.05, 0.4, 1.0, 2.2, 3.0] {
            let f = m.density(&th, n, lam);
            let closed = 1.3 / (4.0 * std::f64::consts::PI * 0.8) * kd.sinh()
                / (kd.cosh() - lam.cos());
            assert_relative_eq!(f, closed, max_relative = 1e-10);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = model();
        let n = 64;
        let lam = 0.9;
        let g = m.gradient(&THETA, n, lam);
        for j in 0..3 {
            let h = 1e-6 * (1.0 + THETA[j].abs());
            let mut tp = THETA;
            tp[j] += h;
            let mut tm = THETA;
            tm[j] -= h;
            let fd = (m.density(&tp, n, lam) - m.density(&tm, n, lam)) / (2.0 * h);
            assert_relative_eq!(g[j], fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn limiting_fisher_block_structure() {
        let m = model();
        let i = m.limiting_fisher(&THETA).unwrap();
        assert_relative_eq!(i[(0, 0)], 0.5, max_relative = 1e-12); // 1/(2 kappa)
        assert_eq!(i[(0, 1)], 0.0);
        assert_eq!(i[(0, 2)], 0.0);
        assert_relative_eq!(i[(2, 2)], 0.5, max_relative = 1e-12);
        assert!(nalgebra::Cholesky::new(i).is_some());
    }

    #[test]
    fn lan_condition_values() {
        let m = model();
        assert!(m.lan_condition(0.2) > 0.0);
        // beta = 1/2 does not cover H = 0.3: 1 + 1/8 - 1.5 + 0.18 < 0
        assert!(m.lan_condition(0.3) < 0.0);
        assert!(FouModel::new(2.0, 1.0).unwrap().lan_condition(0.3) > 0.0);
    }
}
