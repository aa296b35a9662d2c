//! Increments of a mixed fractional Brownian motion sampled on a fixed
//! interval: f_n^θ(λ) = σ₁² Δ^{2H₁} f_{H₁}(λ) + σ₂² Δ^{2H₂} f_{H₂}(λ) with
//! θ = (H₁, σ₁², H₂, σ₂²) and mesh Δ_n = T/n.
//!
//! The parameter space requires 0 < H₁ < H₂ < 1 and H₂ − H₁ < 1/4 (beyond
//! which the second component is not identifiable from infill data), and the
//! rate matrix mixes the (H, σ²) pairs through ±2σ²√Δ log Δ⁻¹ entries so
//! that the limiting Fisher matrix stays invertible.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::fbm::{
    fbm_increment_density, fbm_increment_density_dh, fgn_autocovariance,
    fgn_autocovariance_d2h, fgn_autocovariance_dh,
};
use super::{AcovFn, ModelStage, SpectralModel, SymbolKind, THETA_MARGIN};
use crate::error::{Error, Result};
use crate::quad::{integrate_vec, QuadSettings};

#[derive(Debug, Clone, Copy)]
pub struct MixedFbmModel {
    /// Fixed observation interval T; Δ_n = T/n.
    pub t_span: f64,
}

impl MixedFbmModel {
    pub fn new(t_span: f64) -> Result<Self> {
        if !(t_span > 0.0) {
            return Err(Error::Contract(format!("t_span {t_span} must be positive")));
        }
        Ok(MixedFbmModel { t_span })
    }

    fn mesh(&self, n: usize) -> f64 {
        self.t_span / n as f64
    }
}

impl SpectralModel for MixedFbmModel {
    fn id(&self) -> &'static str {
        "mixed_fbm"
    }

    fn dimension(&self) -> usize {
        4
    }

    fn stage(&self, n: usize) -> ModelStage {
        ModelStage { n, mesh: Some(self.mesh(n)), span: Some(self.t_span), drift_scale: None }
    }

    fn contains(&self, theta: &[f64]) -> bool {
        if theta.len() != 4 {
            return false;
        }
        let (h1, s1, h2, s2) = (theta[0], theta[1], theta[2], theta[3]);
        h1 > THETA_MARGIN
            && h2 < 1.0 - THETA_MARGIN
            && h2 - h1 > THETA_MARGIN
            && h2 - h1 < 0.25 - THETA_MARGIN
            && s1 > THETA_MARGIN
            && s2 > THETA_MARGIN
    }

    fn density(&self, theta: &[f64], n: usize, lambda: f64) -> f64 {
        let d = self.mesh(n);
        let (h1, s1, h2, s2) = (theta[0], theta[1], theta[2], theta[3]);
        s1 * d.powf(2.0 * h1) * fbm_increment_density(h1, lambda).expect("theta checked")
            + s2 * d.powf(2.0 * h2) * fbm_increment_density(h2, lambda).expect("theta checked")
    }

    fn gradient(&self, theta: &[f64], n: usize, lambda: f64) -> DVector<f64> {
        let d = self.mesh(n);
        let log_inv = -d.ln();
        let (h1, s1, h2, s2) = (theta[0], theta[1], theta[2], theta[3]);
        let f1 = fbm_increment_density(h1, lambda).expect("theta checked");
        let f2 = fbm_increment_density(h2, lambda).expect("theta checked");
        let df1 = fbm_increment_density_dh(h1, lambda, 1).expect("theta checked");
        let df2 = fbm_increment_density_dh(h2, lambda, 1).expect("theta checked");
        let p1 = d.powf(2.0 * h1);
        let p2 = d.powf(2.0 * h2);
        DVector::from_vec(vec![
            s1 * p1 * (df1 - 2.0 * log_inv * f1),
            p1 * f1,
            s2 * p2 * (df2 - 2.0 * log_inv * f2),
            p2 * f2,
        ])
    }

    fn density_hessian(&self, theta: &[f64], n: usize, lambda: f64) -> DMatrix<f64> {
        let d = self.mesh(n);
        let log_inv = -d.ln();
        let (h1, s1, h2, s2) = (theta[0], theta[1], theta[2], theta[3]);
        let mut out = DMatrix::zeros(4, 4);
        for (block, (h, s)) in [(0usize, (h1, s1)), (2usize, (h2, s2))] {
            let f = fbm_increment_density(h, lambda).expect("theta checked");
            let df = fbm_increment_density_dh(h, lambda, 1).expect("theta checked");
            let d2f = fbm_increment_density_dh(h, lambda, 2).expect("theta checked");
            let p = d.powf(2.0 * h);
            out[(block, block)] =
                s * p * (d2f - 4.0 * log_inv * df + 4.0 * log_inv * log_inv * f);
            let cross = p * (df - 2.0 * log_inv * f);
            out[(block, block + 1)] = cross;
            out[(block + 1, block)] = cross;
        }
        out
    }

    fn rate_matrix(&self, theta: &[f64], n: usize) -> DMatrix<f64> {
        let d = self.mesh(n);
        let log_inv = -d.ln();
        let sqrt_d = d.sqrt();
        let (h1, s1, h2, s2) = (theta[0], theta[1], theta[2], theta[3]);
        let scale2 = d.powf(-2.0 * (h2 - h1));
        let mut r = DMatrix::zeros(4, 4);
        r[(0, 0)] = sqrt_d;
        r[(1, 0)] = 2.0 * s1 * sqrt_d * log_inv;
        r[(1, 1)] = sqrt_d;
        r[(2, 2)] = sqrt_d * scale2;
        r[(3, 2)] = 2.0 * s2 * sqrt_d * log_inv * scale2;
        r[(3, 3)] = sqrt_d * scale2;
        r
    }

    fn limiting_fisher(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let (h1, s1, h2, s2) = (theta[0], theta[1], theta[2], theta[3]);
        // I(θ) = T/(4π σ₁⁴) ∫ v vᵀ f_{H₁}^{-2} dλ, v = (σ₁² ∂f_{H₁}, f_{H₁}, σ₂² ∂f_{H₂}, f_{H₂})
        let mut integrand = |lam: f64, out: &mut [f64]| {
            let f1 = fbm_increment_density(h1, lam).unwrap();
            let f2 = fbm_increment_density(h2, lam).unwrap();
            let df1 = fbm_increment_density_dh(h1, lam, 1).unwrap();
            let df2 = fbm_increment_density_dh(h2, lam, 1).unwrap();
            let v = [s1 * df1, f1, s2 * df2, f2];
            let w = 1.0 / (f1 * f1);
            let mut idx = 0;
            for i in 0..4 {
                for j in i..4 {
                    out[idx] = v[i] * v[j] * w;
                    idx += 1;
                }
            }
        };
        let alpha = 4.0 * (h2 - h1);
        let (vals, err) =
            integrate_vec(&mut integrand, 10, alpha, &QuadSettings { tol: 1e-9, max_depth: 16 });
        if !vals.iter().all(|v| v.is_finite()) {
            return Err(Error::Quadrature(format!(
                "mixed fBm Fisher integral diverged (err {err:.2e})"
            )));
        }
        let scale = self.t_span / (4.0 * std::f64::consts::PI * s1 * s1);
        let mut out = DMatrix::zeros(4, 4);
        let mut idx = 0;
        for i in 0..4 {
            for j in i..4 {
                out[(i, j)] = scale * vals[idx];
                out[(j, i)] = scale * vals[idx];
                idx += 1;
            }
        }
        Ok(out)
    }

    fn alpha_hint(&self, theta: &[f64]) -> f64 {
        (2.0 * theta[2] - 1.0).max(0.0)
    }

    fn acov_closed_form(&self, theta: &[f64], n: usize, kind: SymbolKind) -> Option<AcovFn> {
        let d = self.mesh(n);
        let log_d = d.ln();
        let (h1, s1, h2, s2) = (theta[0], theta[1], theta[2], theta[3]);
        let p1 = d.powf(2.0 * h1);
        let p2 = d.powf(2.0 * h2);
        // per-component pieces: value, d/dH, d²/dH² of σ² Δ^{2H} γ_H(k)
        let comp = move |h: f64, p: f64, k: usize| -> (f64, f64, f64) {
            let g = fgn_autocovariance(h, k);
            let dg = fgn_autocovariance_dh(h, k);
            let d2g = fgn_autocovariance_d2h(h, k);
            (
                p * g,
                p * (2.0 * log_d * g + dg),
                p * (4.0 * log_d * log_d * g + 4.0 * log_d * dg + d2g),
            )
        };
        match kind {
            SymbolKind::Density => Some(Arc::new(move |k| {
                s1 * comp(h1, p1, k).0 + s2 * comp(h2, p2, k).0
            })),
            SymbolKind::Gradient(0) => Some(Arc::new(move |k| s1 * comp(h1, p1, k).1)),
            SymbolKind::Gradient(1) => Some(Arc::new(move |k| comp(h1, p1, k).0)),
            SymbolKind::Gradient(2) => Some(Arc::new(move |k| s2 * comp(h2, p2, k).1)),
            SymbolKind::Gradient(3) => Some(Arc::new(move |k| comp(h2, p2, k).0)),
            SymbolKind::Gradient(_) => None,
            SymbolKind::Hessian(j, k) => {
                let (j, k) = (j.min(k), j.max(k));
                match (j, k) {
                    (0, 0) => Some(Arc::new(move |k| s1 * comp(h1, p1, k).2)),
                    (0, 1) => Some(Arc::new(move |k| comp(h1, p1, k).1)),
                    (2, 2) => Some(Arc::new(move |k| s2 * comp(h2, p2, k).2)),
                    (2, 3) => Some(Arc::new(move |k| comp(h2, p2, k).1)),
                    _ => Some(Arc::new(|_| 0.0)),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const THETA: [f64; 4] = [0.1, 1.0, 0.2, 1.0];

    fn model() -> MixedFbmModel {
        MixedFbmModel::new(1.0).unwrap()
    }

    #[test]
    fn theta_space_boundaries() {
        let m = model();
        assert!(m.contains(&THETA));
        assert!(!m.contains(&[0.2, 1.0, 0.1, 1.0])); // H1 >= H2
        assert!(!m.contains(&[0.1, 1.0, 0.4, 1.0])); // H2-H1 >= 1/4
        assert!(!m.contains(&[0.1, -1.0, 0.2, 1.0])); // variance
    }

    #[test]
    fn gradient_second_component_is_scaled_density() {
        // d_{sigma1^2} f = Delta^{2H1} f_{H1}
        let m = model();
        let n = 64;
        let lam = 0.7;
        let g = m.gradient(&THETA, n, lam);
        let d = m.mesh(n);
        let expected = d.powf(0.2) * fbm_increment_density(0.1, lam).unwrap();
        assert_relative_eq!(g[1], expected, max_relative = 1e-13);
    }

    #[test]
    fn hessian_zero_pattern() {
        let m = model();
        let h = m.density_hessian(&THETA, 32, 1.1);
        for (i, j) in [(0, 2), (1, 1), (3, 3), (0, 3), (1, 2), (1, 3)] {
            assert_eq!(h[(i, j)], 0.0, "entry ({i},{j})");
            assert_eq!(h[(j, i)], 0.0);
        }
        assert!(h[(0, 0)] != 0.0 && h[(0, 1)] != 0.0 && h[(2, 3)] != 0.0);
    }

    #[test]
    fn limiting_fisher_positive_definite() {
        let m = model();
        let i = m.limiting_fisher(&THETA).unwrap();
        let chol = nalgebra::Cholesky::new(i.clone());
        assert!(chol.is_some(), "I(theta) is not positive definite: {i}");
    }

    #[test]
    fn sigma2_to_zero_reduces_to_single_fbm() {
        let m = model();
        let th = [0.1, 1.0, 0.2, 1e-12];
        let n = 128;
        let d = m.mesh(n);
        for &lam in &[0.3, 1.5, 3.0] {
            let f = m.density(&th, n, lam);
            let single = d.powf(0.2) * fbm_increment_density(0.1, lam).unwrap();
            assert_relative_eq!(f, single, max_relative = 1e-10);
        }
    }

    #[test]
    fn closed_form_acov_matches_density_integral() {
        // spot-check against direct numerical integration of the density
        let m = model();
        let n = 16;
        let acov = m.acov_closed_form(&THETA, n, SymbolKind::Density).unwrap();
        for k in [0usize, 1, 3] {
            let mut quad = 0.0;
            let steps = 200_000;
            let h = std::f64::consts::PI / steps as f64;
            for i in 0..steps {
                let lam = (i as f64 + 0.5) * h;
                quad += (lam * k as f64).cos() * m.density(&THETA, n, lam);
            }
            quad *= 2.0 * h;
            assert_relative_eq!(acov(k), quad, max_relative = 1e-6);
        }
    }
}
