//! Parametric spectral-density families and the model interface consumed by
//! the Toeplitz, likelihood, estimation and verification layers.

pub mod ar1;
pub mod envelope;
pub mod fbm;
pub mod fou;
pub mod mixed_fbm;
pub mod white_noise;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Strict-inequality margin for the open parameter spaces.
pub const THETA_MARGIN: f64 = 1e-10;

/// Stage-n discretization data of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelStage {
    pub n: usize,
    /// Sampling mesh Δ_n, where the model has one.
    pub mesh: Option<f64>,
    /// Observation span T_n, where the model has one.
    pub span: Option<f64>,
    /// Drift scale a_n of the mildly integrated autoregression.
    pub drift_scale: Option<f64>,
}

impl ModelStage {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Contract("stage requires n >= 1".into()));
        }
        if let Some(d) = self.mesh {
            if !(d > 0.0) {
                return Err(Error::Contract(format!("mesh {d} must be positive")));
            }
        }
        if let Some(a) = self.drift_scale {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Contract(format!("drift scale {a} outside (0,1)")));
            }
            if self.n as f64 * a <= 1.0 {
                return Err(Error::Contract(format!(
                    "mildly integrated stage needs n*a_n > 1, got {}",
                    self.n as f64 * a
                )));
            }
        }
        Ok(())
    }
}

/// A parameter vector validated against a model's space Θ.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn validated(model: &dyn SpectralModel, values: &[f64]) -> Result<Self> {
        model.check_theta(values)?;
        Ok(ParameterVector(values.to_vec()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Which symbol of the family a closed-form autocovariance is requested for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Density,
    Gradient(usize),
    Hessian(usize, usize),
}

pub type AcovFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Exact O(n) likelihood routines for models whose inverse covariance is
/// banded (white noise, stationary AR(1)). These evaluate the same exact
/// Gaussian quantities as the dense Cholesky path.
pub trait MarkovLikelihood: Send + Sync {
    fn log_likelihood(&self, theta: &[f64], n: usize, data: &[f64]) -> f64;
    fn score(&self, theta: &[f64], n: usize, data: &[f64]) -> DVector<f64>;
    fn hessian(&self, theta: &[f64], n: usize, data: &[f64]) -> DMatrix<f64>;
    /// Exact Fisher information E[−D² l_n] = Ĩ_n.
    fn fisher(&self, theta: &[f64], n: usize) -> DMatrix<f64>;
}

/// A parametric family (θ, n) ↦ f_n^θ with derivatives, rate matrix and
/// limiting Fisher matrix. Implementations are immutable and all evaluators
/// are pure, so models are freely shared across worker threads.
pub trait SpectralModel: Send + Sync {
    fn id(&self) -> &'static str;
    fn dimension(&self) -> usize;
    fn stage(&self, n: usize) -> ModelStage;

    /// Strict membership in the open parameter space (margin 1e-10).
    fn contains(&self, theta: &[f64]) -> bool;

    fn density(&self, theta: &[f64], n: usize, lambda: f64) -> f64;
    fn gradient(&self, theta: &[f64], n: usize, lambda: f64) -> DVector<f64>;
    fn density_hessian(&self, theta: &[f64], n: usize, lambda: f64) -> DMatrix<f64>;

    /// Rate matrix R_n (lower triangular in all families here).
    fn rate_matrix(&self, theta: &[f64], n: usize) -> DMatrix<f64>;

    /// Limiting Fisher information I(θ).
    fn limiting_fisher(&self, theta: &[f64]) -> Result<DMatrix<f64>>;

    /// Exponent of the |λ|^{-α} pole of f_n^θ at the origin (for quadrature).
    fn alpha_hint(&self, theta: &[f64]) -> f64;

    /// Exact autocovariance k ↦ γ_k of the requested symbol, when available.
    fn acov_closed_form(
        &self,
        _theta: &[f64],
        _n: usize,
        _kind: SymbolKind,
    ) -> Option<AcovFn> {
        None
    }

    /// O(n) exact likelihood routines, when the family admits them.
    fn markov(&self) -> Option<&dyn MarkovLikelihood> {
        None
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dimension() {
            return Err(Error::Contract(format!(
                "{} expects {} parameters, got {}",
                self.id(),
                self.dimension(),
                theta.len()
            )));
        }
        if !self.contains(theta) {
            return Err(Error::Parameter(format!(
                "theta {:?} outside the parameter space of {}",
                theta,
                self.id()
            )));
        }
        Ok(())
    }
}

/// A grid-evaluable even symbol, optionally with exact autocovariances.
#[derive(Clone)]
pub struct Symbol {
    pub label: String,
    pub alpha_hint: f64,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    acov: Option<AcovFn>,
}

impl Symbol {
    pub fn new(
        label: impl Into<String>,
        alpha_hint: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Symbol { label: label.into(), alpha_hint, eval: Arc::new(eval), acov: None }
    }

    pub fn with_acov(mut self, acov: AcovFn) -> Self {
        self.acov = Some(acov);
        self
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        (self.eval)(lambda)
    }

    pub fn acov(&self) -> Option<&AcovFn> {
        self.acov.as_ref()
    }
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("label", &self.label)
            .field("alpha_hint", &self.alpha_hint)
            .field("closed_form", &self.acov.is_some())
            .finish()
    }
}

/// f_n^θ as a [`Symbol`].
pub fn density_symbol(model: &Arc<dyn SpectralModel>, theta: &[f64], n: usize) -> Symbol {
    let m = Arc::clone(model);
    let th = theta.to_vec();
    let mut s = Symbol::new(
        format!("{}:f", model.id()),
        model.alpha_hint(theta),
        move |lam| m.density(&th, n, lam),
    );
    if let Some(a) = model.acov_closed_form(theta, n, SymbolKind::Density) {
        s = s.with_acov(a);
    }
    s
}

/// ∂_j f_n^θ as a [`Symbol`].
pub fn gradient_symbol(
    model: &Arc<dyn SpectralModel>,
    theta: &[f64],
    n: usize,
    j: usize,
) -> Symbol {
    let m = Arc::clone(model);
    let th = theta.to_vec();
    let mut s = Symbol::new(
        format!("{}:df{}", model.id(), j),
        model.alpha_hint(theta),
        move |lam| m.gradient(&th, n, lam)[j],
    );
    if let Some(a) = model.acov_closed_form(theta, n, SymbolKind::Gradient(j)) {
        s = s.with_acov(a);
    }
    s
}

/// ∂_{jk} f_n^θ as a [`Symbol`].
pub fn hessian_symbol(
    model: &Arc<dyn SpectralModel>,
    theta: &[f64],
    n: usize,
    j: usize,
    k: usize,
) -> Symbol {
    let m = Arc::clone(model);
    let th = theta.to_vec();
    let mut s = Symbol::new(
        format!("{}:d2f{}{}", model.id(), j, k),
        model.alpha_hint(theta),
        move |lam| m.density_hessian(&th, n, lam)[(j, k)],
    );
    if let Some(a) = model.acov_closed_form(theta, n, SymbolKind::Hessian(j, k)) {
        s = s.with_acov(a);
    }
    s
}

/// Symmetric central-difference Hessian of the density from an analytic
/// gradient closure (step 1e-6·(1+|θ_j|)).
pub(crate) fn fd_hessian_from_gradient(
    theta: &[f64],
    grad: impl Fn(&[f64]) -> DVector<f64>,
) -> DMatrix<f64> {
    let m = theta.len();
    let mut h = DMatrix::zeros(m, m);
    for j in 0..m {
        let step = 1e-6 * (1.0 + theta[j].abs());
        let mut tp = theta.to_vec();
        tp[j] += step;
        let mut tm = theta.to_vec();
        tm[j] -= step;
        let col = (grad(&tp) - grad(&tm)) / (2.0 * step);
        for k in 0..m {
            h[(k, j)] = col[k];
        }
    }
    // enforce symmetry of the mixed partials
    0.5 * (&h + h.transpose())
}

/// Stage-rule parameters for the model factory (exponents per the config
/// grammar: `alpha` for a_n = a0·n^{-α}, `beta` for T = Δ^{-β}).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_a0")]
    pub a0: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_t_span")]
    pub t_span: f64,
}

fn default_alpha() -> f64 {
    0.15
}
fn default_a0() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    0.5
}
fn default_t_span() -> f64 {
    1.0
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            alpha: default_alpha(),
            a0: default_a0(),
            beta: default_beta(),
            t_span: default_t_span(),
        }
    }
}

/// Build one of the named model families.
pub fn model_from_id(id: &str, params: &ModelParams) -> Result<Arc<dyn SpectralModel>> {
    match id {
        "mixed_fbm" => Ok(Arc::new(mixed_fbm::MixedFbmModel::new(params.t_span)?)),
        "fou" => Ok(Arc::new(fou::FouModel::new(params.beta, params.t_span)?)),
        "ar1_mild" => Ok(Arc::new(ar1::MildAr1Model::new(params.alpha, params.a0)?)),
        "white_noise" => Ok(Arc::new(white_noise::WhiteNoiseModel)),
        other => Err(Error::Unsupported(format!("unknown model id '{other}'"))),
    }
}
