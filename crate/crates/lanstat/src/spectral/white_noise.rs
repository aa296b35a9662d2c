//! Baseline iid Gaussian model, f^θ(λ) = σ²/(2π).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{AcovFn, MarkovLikelihood, ModelStage, SpectralModel, SymbolKind, THETA_MARGIN};
use crate::error::Result;

#[derive(Debug, Clone, Copy, Default)]
pub struct WhiteNoiseModel;

impl SpectralModel for WhiteNoiseModel {
    fn id(&self) -> &'static str {
        "white_noise"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn stage(&self, n: usize) -> ModelStage {
        ModelStage { n, mesh: None, span: None, drift_scale: None }
    }

    fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == 1 && theta[0] > THETA_MARGIN
    }

    fn density(&self, theta: &[f64], _n: usize, _lambda: f64) -> f64 {
        theta[0] / (2.0 * std::f64::consts::PI)
    }

    fn gradient(&self, _theta: &[f64], _n: usize, _lambda: f64) -> DVector<f64> {
        DVector::from_element(1, 1.0 / (2.0 * std::f64::consts::PI))
    }

    fn density_hessian(&self, _theta: &[f64], _n: usize, _lambda: f64) -> DMatrix<f64> {
        DMatrix::zeros(1, 1)
    }

    fn rate_matrix(&self, _theta: &[f64], n: usize) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, (n as f64).powf(-0.5))
    }

    fn limiting_fisher(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let s2 = theta[0];
        Ok(DMatrix::from_element(1, 1, 1.0 / (2.0 * s2 * s2)))
    }

    fn alpha_hint(&self, _theta: &[f64]) -> f64 {
        0.0
    }

    fn acov_closed_form(&self, theta: &[f64], _n: usize, kind: SymbolKind) -> Option<AcovFn> {
        let at0: f64 = match kind {
            SymbolKind::Density => theta[0],
            SymbolKind::Gradient(0) => 1.0,
            SymbolKind::Gradient(_) => return None,
            SymbolKind::Hessian(_, _) => 0.0,
        };
        Some(Arc::new(move |k| if k == 0 { at0 } else { 0.0 }))
    }

    fn markov(&self) -> Option<&dyn MarkovLikelihood> {
        Some(self)
    }
}

impl MarkovLikelihood for WhiteNoiseModel {
    fn log_likelihood(&self, theta: &[f64], n: usize, data: &[f64]) -> f64 {
        let s2 = theta[0];
        let ss: f64 = data.iter().map(|x| x * x).sum();
        -0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * n as f64 * s2.ln()
            - 0.5 * ss / s2
    }

    fn score(&self, theta: &[f64], n: usize, data: &[f64]) -> DVector<f64> {
        let s2 = theta[0];
        let ss: f64 = data.iter().map(|x| x * x).sum();
        DVector::from_element(1, -0.5 * n as f64 / s2 + 0.5 * ss / (s2 * s2))
    }

    fn hessian(&self, theta: &[f64], n: usize, data: &[f64]) -> DMatrix<f64> {
        let s2 = theta[0];
        let ss: f64 = data.iter().map(|x| x * x).sum();
        DMatrix::from_element(1, 1, 0.5 * n as f64 / (s2 * s2) - ss / (s2 * s2 * s2))
    }

    fn fisher(&self, theta: &[f64], n: usize) -> DMatrix<f64> {
        let s2 = theta[0];
        DMatrix::from_element(1, 1, 0.5 * n as f64 / (s2 * s2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_gaussian_score() {
        // d_{sigma^2} l_1 = -1/(2 s2) + x^2/(2 s2^2)
        let m = WhiteNoiseModel;
        let x = [1.7];
        let s = m.score(&[2.0], 1, &x);
        let expected = -1.0 / 4.0 + 1.7f64 * 1.7 / 8.0;
        assert!((s[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn fisher_value() {
        let m = WhiteNoiseModel;
        assert!((m.limiting_fisher(&[2.0]).unwrap()[(0, 0)] - 0.125).abs() < 1e-15);
        assert!((m.fisher(&[1.0], 10)[(0, 0)] - 5.0).abs() < 1e-12);
    }
}
