//! Mildly integrated AR(1): X_t = (1 − c·a_n) X_{t−1} + σ ε_t with
//! a_n = a0·n^{−α}, bridging the stationary and local-to-unity regimes.
//!
//! θ = (c, σ²) ∈ (0,∞)². Spectral density, gradient, rate matrix and the
//! limiting Fisher matrix are closed-form; the density Hessian is a central
//! finite difference of the analytic gradient.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{AcovFn, MarkovLikelihood, ModelStage, SpectralModel, SymbolKind, THETA_MARGIN};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct MildAr1Model {
    /// a_n = a0 · n^{−alpha}
    pub alpha: f64,
    pub a0: f64,
}

impl MildAr1Model {
    pub fn new(alpha: f64, a0: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Contract(format!("alpha {alpha} outside [0,1)")));
        }
        if !(a0 > 0.0) {
            return Err(Error::Contract(format!("a0 {a0} must be positive")));
        }
        Ok(MildAr1Model { alpha, a0 })
    }

    pub fn drift_scale(&self, n: usize) -> f64 {
        self.a0 * (n as f64).powf(-self.alpha)
    }

    /// AR coefficient φ_n = 1 − c·a_n; errors when c·a_n ≥ 1 (nonstationary).
    pub fn phi(&self, theta: &[f64], n: usize) -> Result<f64> {
        let ca = theta[0] * self.drift_scale(n);
        if ca >= 1.0 {
            return Err(Error::Parameter(format!(
                "c*a_n = {ca} >= 1: AR(1) stage is nonstationary"
            )));
        }
        Ok(1.0 - ca)
    }

    fn phi_unchecked(&self, theta: &[f64], n: usize) -> f64 {
        1.0 - theta[0] * self.drift_scale(n)
    }
}

fn denom(phi: f64, lambda: f64) -> f64 {
    1.0 - 2.0 * phi * lambda.cos() + phi * phi
}

impl SpectralModel for MildAr1Model {
    fn id(&self) -> &'static str {
        "ar1_mild"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn stage(&self, n: usize) -> ModelStage {
        ModelStage { n, mesh: None, span: None, drift_scale: Some(self.drift_scale(n)) }
    }

    fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == 2 && theta[0] > THETA_MARGIN && theta[1] > THETA_MARGIN
    }

    fn density(&self, theta: &[f64], n: usize, lambda: f64) -> f64 {
        let phi = self.phi_unchecked(theta, n);
        theta[1] / (2.0 * std::f64::consts::PI) / denom(phi, lambda)
    }

    fn gradient(&self, theta: &[f64], n: usize, lambda: f64) -> DVector<f64> {
        let a = self.drift_scale(n);
        let phi = self.phi_unchecked(theta, n);
        let d = denom(phi, lambda);
        let two_pi = 2.0 * std::f64::consts::PI;
        DVector::from_vec(vec![
            theta[1] / two_pi * 2.0 * a * (phi - lambda.cos()) / (d * d),
            1.0 / (two_pi * d),
        ])
    }

    fn density_hessian(&self, theta: &[f64], n: usize, lambda: f64) -> DMatrix<f64> {
        super::fd_hessian_from_gradient(theta, |th| self.gradient(th, n, lambda))
    }

    fn rate_matrix(&self, _theta: &[f64], n: usize) -> DMatrix<f64> {
        let na = n as f64 * self.drift_scale(n);
        DMatrix::from_diagonal(&DVector::from_vec(vec![
            na.powf(-0.5),
            (n as f64).powf(-0.5),
        ]))
    }

    fn limiting_fisher(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let (c, s2) = (theta[0], theta[1]);
        Ok(DMatrix::from_diagonal(&DVector::from_vec(vec![
            0.5 / c,
            0.5 / (s2 * s2),
        ])))
    }

    fn alpha_hint(&self, _theta: &[f64]) -> f64 {
        0.0
    }

    fn acov_closed_form(&self, theta: &[f64], n: usize, kind: SymbolKind) -> Option<AcovFn> {
        let a = self.drift_scale(n);
        let phi = self.phi_unchecked(theta, n);
        let s2 = theta[1];
        match kind {
            SymbolKind::Density => {
                let g0 = s2 / (1.0 - phi * phi);
                Some(Arc::new(move |k| g0 * phi.powi(k as i32)))
            }
            SymbolKind::Gradient(0) => {
                // d_c gamma_k = -a * d_phi [s2 phi^k / (1-phi^2)]
                Some(Arc::new(move |k| {
                    let kf = k as f64;
                    let omp = 1.0 - phi * phi;
                    let dphi = s2 * phi.powi(k as i32 - 1)
                        * (kf * omp + 2.0 * phi * phi)
                        / (omp * omp);
                    // phi^{k-1} at k=0 handled via the explicit formula below
                    let dphi = if k == 0 { s2 * 2.0 * phi / (omp * omp) } else { dphi };
                    -a * dphi
                }))
            }
            SymbolKind::Gradient(1) => {
                let omp = 1.0 - phi * phi;
                Some(Arc::new(move |k| phi.powi(k as i32) / omp))
            }
            SymbolKind::Gradient(_) => None,
            SymbolKind::Hessian(j, k) => {
                // finite difference of the gradient closed forms, matching the
                // finite-difference density Hessian
                let model = *self;
                let th = theta.to_vec();
                let (j, k) = (j.min(k), j.max(k));
                let h = 1e-6 * (1.0 + th[k].abs());
                let mut tp = th.clone();
                tp[k] += h;
                let mut tm = th.clone();
                tm[k] -= h;
                let up = model.acov_closed_form(&tp, n, SymbolKind::Gradient(j))?;
                let dn = model.acov_closed_form(&tm, n, SymbolKind::Gradient(j))?;
                Some(Arc::new(move |lag| (up(lag) - dn(lag)) / (2.0 * h)))
            }
        }
    }

    fn markov(&self) -> Option<&dyn MarkovLikelihood> {
        Some(self)
    }
}

/// Sufficient statistics of the exact stationary AR(1) likelihood.
struct Ar1Stats {
    /// Σ_{t≥2} (x_t − φ x_{t−1}) x_{t−1}
    cross: f64,
    /// Σ_{t≥2} (x_t − φ x_{t−1})²
    rss: f64,
    /// Σ_{t≥2} x_{t−1}²
    s_prev: f64,
    x1_sq: f64,
}

fn ar1_stats(phi: f64, data: &[f64]) -> Ar1Stats {
    let mut cross = 0.0;
    let mut rss = 0.0;
    let mut s_prev = 0.0;
    for t in 1..data.len() {
        let e = data[t] - phi * data[t - 1];
        cross += e * data[t - 1];
        rss += e * e;
        s_prev += data[t - 1] * data[t - 1];
    }
    Ar1Stats { cross, rss, s_prev, x1_sq: data[0] * data[0] }
}

impl MarkovLikelihood for MildAr1Model {
    fn log_likelihood(&self, theta: &[f64], n: usize, data: &[f64]) -> f64 {
        let (phi, s2) = (self.phi_unchecked(theta, n), theta[1]);
        let st = ar1_stats(phi, data);
        let q = st.x1_sq * (1.0 - phi * phi) + st.rss;
        -0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * n as f64 * s2.ln()
            + 0.5 * (1.0 - phi * phi).ln()
            - 0.5 * q / s2
    }

    fn score(&self, theta: &[f64], n: usize, data: &[f64]) -> DVector<f64> {
        let a = self.drift_scale(n);
        let (phi, s2) = (self.phi_unchecked(theta, n), theta[1]);
        let st = ar1_stats(phi, data);
        let omp = 1.0 - phi * phi;
        let d_phi = -phi / omp + (phi * st.x1_sq + st.cross) / s2;
        let q = st.x1_sq * omp + st.rss;
        let d_s2 = -0.5 * n as f64 / s2 + 0.5 * q / (s2 * s2);
        DVector::from_vec(vec![-a * d_phi, d_s2])
    }

    fn hessian(&self, theta: &[f64], n: usize, data: &[f64]) -> DMatrix<f64> {
        let a = self.drift_scale(n);
        let (phi, s2) = (self.phi_unchecked(theta, n), theta[1]);
        let st = ar1_stats(phi, data);
        let omp = 1.0 - phi * phi;
        let d2_phi = -(1.0 + phi * phi) / (omp * omp) + (st.x1_sq - st.s_prev) / s2;
        let d_phi_s2 = -(phi * st.x1_sq + st.cross) / (s2 * s2);
        let q = st.x1_sq * omp + st.rss;
        let d2_s2 = 0.5 * n as f64 / (s2 * s2) - q / (s2 * s2 * s2);
        DMatrix::from_row_slice(
            2,
            2,
            &[a * a * d2_phi, -a * d_phi_s2, -a * d_phi_s2, d2_s2],
        )
    }

    fn fisher(&self, theta: &[f64], n: usize) -> DMatrix<f64> {
        let a = self.drift_scale(n);
        let (phi, s2) = (self.phi_unchecked(theta, n), theta[1]);
        let omp = 1.0 - phi * phi;
        let i_phi = (1.0 + phi * phi) / (omp * omp) + (n as f64 - 2.0) / omp;
        let i_phi_s2 = phi / (s2 * omp);
        let i_s2 = 0.5 * n as f64 / (s2 * s2);
        DMatrix::from_row_slice(
            2,
            2,
            &[a * a * i_phi, -a * i_phi_s2, -a * i_phi_s2, i_s2],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn limiting_fisher_matches_paper_values() {
        let m = MildAr1Model::new(0.15, 1.0).unwrap();
        let i = m.limiting_fisher(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(i[(0, 0)], 0.5);
        assert_relative_eq!(i[(1, 1)], 0.5);
        assert_relative_eq!(i[(0, 1)], 0.0);
    }

    #[test]
    fn rate_matrix_plugin() {
        let m = MildAr1Model::new(0.15, 1.0).unwrap();
        let r = m.rate_matrix(&[1.0, 1.0], 4096);
        assert_relative_eq!(r[(0, 0)], 4096.0f64.powf(-0.425), max_relative = 1e-14);
        assert_relative_eq!(r[(1, 1)], 4096.0f64.powf(-0.5), max_relative = 1e-14);
    }

    #[test]
    fn closed_form_autocovariance_is_geometric() {
        let m = MildAr1Model::new(0.0, 0.5).unwrap(); // fixed phi = 0.5 at c=1
        let acov = m.acov_closed_form(&[1.0, 1.0], 64, SymbolKind::Density).unwrap();
        for k in 0..10 {
            assert_relative_eq!(
                acov(k),
                (4.0 / 3.0) * 0.5f64.powi(k as i32),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn gradient_acov_matches_fd() {
        let m = MildAr1Model::new(0.15, 1.0).unwrap();
        let th = [1.2, 0.8];
        let n = 256;
        let h = 1e-6;
        for j in 0..2 {
            let g = m.acov_closed_form(&th, n, SymbolKind::Gradient(j)).unwrap();
            let mut tp = th;
            tp[j] += h;
            let mut tm = th;
            tm[j] -= h;
            let up = m.acov_closed_form(&tp, n, SymbolKind::Density).unwrap();
            let dn = m.acov_closed_form(&tm, n, SymbolKind::Density).unwrap();
            for k in [0usize, 1, 5, 20] {
                let fd = (up(k) - dn(k)) / (2.0 * h);
                assert_relative_eq!(g(k), fd, max_relative = 1e-5, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn nonstationary_theta_rejected() {
        let m = MildAr1Model::new(0.0, 0.9).unwrap();
        assert!(m.phi(&[2.0, 1.0], 100).is_err());
        assert!(m.phi(&[1.0, 1.0], 100).is_ok());
    }
}
