//! Power-law envelope tables: the (m, q, α, ᾱ, c, c̄, d, index-map) data
//! describing how a spectral family and its derivatives are sandwiched by
//! |λ|-power bounds, as consumed by the trace-approximation rate formulas.
//!
//! Coefficients are functions of the stage n with θ frozen at construction.

use std::sync::Arc;

use super::ar1::MildAr1Model;
use super::fou::FouModel;
use super::mixed_fbm::MixedFbmModel;
use super::SpectralModel;
use crate::error::{Error, Result};
use crate::special::c_of_h;

pub type CoeffFn = Arc<dyn Fn(usize, usize, usize) -> f64 + Send + Sync>;
pub type SlowVarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How the g-symbol coefficients d_{i,k} relate to the density coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GScaling {
    /// g is f-like: d = c.
    Identity,
    /// g is a θ-derivative of f: d carries the published log factors.
    Derivative,
    /// g = ½ aᵀRₙᵀ∇f (the score form): d additionally carries the rate scale.
    ScoreForm,
}

#[derive(Clone)]
pub struct EnvelopeTable {
    pub model_id: String,
    pub m: usize,
    pub q: usize,
    /// α_{i,k}(θ): exponents of the f-family bounds (m × q).
    pub alpha: Vec<Vec<f64>>,
    /// ᾱ_{i,k}(θ): exponents of the 1/f bounds (m × q).
    pub alpha_bar: Vec<Vec<f64>>,
    /// β_{i,k}(θ): exponents of the g-family bounds (m × q).
    pub beta: Vec<Vec<f64>>,
    pub c: CoeffFn,
    pub c_bar: CoeffFn,
    pub d: CoeffFn,
    /// Index maps (0-based), each m × q.
    pub i_prime: Vec<Vec<usize>>,
    pub k_prime: Vec<Vec<usize>>,
    pub i_ast: Vec<Vec<usize>>,
    pub k_ast: Vec<Vec<usize>>,
    pub i_star: Vec<Vec<usize>>,
    pub k_star: Vec<Vec<usize>>,
    /// Slow-variation function L(ε).
    pub slow_variation: SlowVarFn,
    /// Interpolation parameter z when the table has an interpolated column.
    pub z_interp: Option<f64>,
}

impl std::fmt::Debug for EnvelopeTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnvelopeTable")
            .field("model_id", &self.model_id)
            .field("m", &self.m)
            .field("q", &self.q)
            .field("alpha", &self.alpha)
            .field("alpha_bar", &self.alpha_bar)
            .field("z_interp", &self.z_interp)
            .finish()
    }
}

impl EnvelopeTable {
    /// Structural invariants: map ranges and integrability of the f bounds.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.m {
            let min_alpha = self.alpha[i].iter().cloned().fold(f64::INFINITY, f64::min);
            if min_alpha >= 1.0 {
                return Err(Error::Contract(format!(
                    "row {i}: min_k alpha = {min_alpha} >= 1 (f not integrable)"
                )));
            }
        }
        for maps in [
            &self.i_prime,
            &self.i_ast,
            &self.i_star,
        ] {
            for row in maps.iter() {
                if row.iter().any(|&v| v >= self.m) {
                    return Err(Error::Contract("i-index map out of range".into()));
                }
            }
        }
        for maps in [&self.k_prime, &self.k_ast, &self.k_star] {
            for row in maps.iter() {
                if row.iter().any(|&v| v >= self.q) {
                    return Err(Error::Contract("k-index map out of range".into()));
                }
            }
        }
        Ok(())
    }

    /// Single power-law row (m = q = 1, identity maps), for plain symbols
    /// such as fGN densities in the trace experiments.
    pub fn single_power(label: &str, c: f64, alpha: f64, d: f64, beta: f64) -> Self {
        EnvelopeTable {
            model_id: label.to_string(),
            m: 1,
            q: 1,
            alpha: vec![vec![alpha]],
            alpha_bar: vec![vec![alpha]],
            beta: vec![vec![beta]],
            c: Arc::new(move |_, _, _| c),
            c_bar: Arc::new(move |_, _, _| c),
            d: Arc::new(move |_, _, _| d),
            i_prime: vec![vec![0]],
            k_prime: vec![vec![0]],
            i_ast: vec![vec![0]],
            k_ast: vec![vec![0]],
            i_star: vec![vec![0]],
            k_star: vec![vec![0]],
            slow_variation: Arc::new(|eps| 4.0 * (1.0 / (std::f64::consts::E * eps.powi(3))).max(1.0)),
            z_interp: None,
        }
    }
}

/// Tuning for the published tables: η drives the interpolation parameter z
/// ("arbitrarily close to its lower bound"), `k_const` is the envelope
/// constant K.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeParams {
    pub eta: f64,
    pub k_const: f64,
    pub g_scaling: GScaling,
}

impl Default for EnvelopeParams {
    fn default() -> Self {
        EnvelopeParams { eta: 0.05, k_const: 2.0, g_scaling: GScaling::Identity }
    }
}

/// The published coefficient tables for the three paper families plus the
/// trivial white-noise table.
pub fn envelope_table_for(
    model: &dyn SpectralModel,
    theta: &[f64],
    params: &EnvelopeParams,
) -> Result<EnvelopeTable> {
    model.check_theta(theta)?;
    match model.id() {
        "mixed_fbm" => {
            let m = MixedFbmModel { t_span: model.stage(1).span.unwrap_or(1.0) };
            Ok(mixed_fbm_table(&m, theta, params))
        }
        "fou" => {
            let st1 = model.stage(2);
            let st2 = model.stage(4);
            // recover (beta, scale) from two stages of the span rule
            let beta = (st2.span.unwrap() / st1.span.unwrap()).ln()
                / (st1.mesh.unwrap() / st2.mesh.unwrap()).ln();
            let scale = st1.span.unwrap() * st1.mesh.unwrap().powf(beta);
            Ok(fou_table(&FouModel { beta, t_scale: scale }, theta, params))
        }
        "ar1_mild" => {
            // recover (alpha, a0) from two stages
            let a2 = model.stage(2).drift_scale.unwrap();
            let a4 = model.stage(4).drift_scale.unwrap();
            let alpha = (a2 / a4).ln() / 2.0f64.ln();
            let a0 = a2 * 2.0f64.powf(alpha);
            Ok(ar1_table(&MildAr1Model { alpha, a0 }, theta, params))
        }
        "white_noise" => Ok(white_noise_table(theta, params)),
        other => Err(Error::Unsupported(format!(
            "no published envelope table for model '{other}'"
        ))),
    }
}

fn identity_maps(m: usize, q: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let imap = (0..m).map(|i| vec![i; q]).collect();
    let kmap = (0..m).map(|_| (0..q).collect()).collect();
    (imap, kmap)
}

fn mixed_fbm_table(model: &MixedFbmModel, theta: &[f64], params: &EnvelopeParams) -> EnvelopeTable {
    let k_const = params.k_const;
    let hs = [theta[0], theta[2]];
    let vars = [theta[1], theta[3]];
    let t_span = model.t_span;
    let alpha: Vec<Vec<f64>> = hs.iter().map(|&h| vec![2.0 * h - 1.0]).collect();
    let mesh = move |n: usize| t_span / n as f64;
    let g_scaling = params.g_scaling;
    let h1 = hs[0];
    let c = {
        let hs = hs;
        let vars = vars;
        Arc::new(move |n: usize, i: usize, _k: usize| {
            k_const * c_of_h(hs[i]) / std::f64::consts::PI * vars[i] * mesh(n).powf(2.0 * hs[i])
        })
    };
    let d: CoeffFn = {
        let hs = hs;
        let vars = vars;
        Arc::new(move |n: usize, i: usize, _k: usize| {
            let dn = mesh(n);
            let log_inv = -dn.ln();
            let base = k_const * c_of_h(hs[i]) / std::f64::consts::PI * vars[i].max(1.0);
            match g_scaling {
                GScaling::Identity => {
                    k_const * c_of_h(hs[i]) / std::f64::consts::PI * vars[i] * dn.powf(2.0 * hs[i])
                }
                GScaling::Derivative => base * dn.powf(2.0 * hs[i]) * log_inv,
                // rows of Rₙᵀ∇f all scale like Δ^{2H₁+1/2} (log Δ⁻¹)
                GScaling::ScoreForm => base * dn.powf(2.0 * h1 + 0.5) * log_inv,
            }
        })
    };
    let (imap, kmap) = identity_maps(2, 1);
    EnvelopeTable {
        model_id: "mixed_fbm".into(),
        m: 2,
        q: 1,
        alpha: alpha.clone(),
        alpha_bar: alpha.clone(),
        beta: alpha,
        c: c.clone(),
        c_bar: c,
        d,
        i_prime: imap.clone(),
        k_prime: kmap.clone(),
        i_ast: imap.clone(),
        k_ast: kmap.clone(),
        i_star: imap,
        k_star: kmap,
        slow_variation: slow_variation_loglike(k_const),
        z_interp: None,
    }
}

/// L(ε) = 2K⁴ (1/(e ε³) ∨ π^ε), absorbing (log λ⁻¹)³ factors.
fn slow_variation_loglike(k_const: f64) -> SlowVarFn {
    Arc::new(move |eps: f64| {
        2.0 * k_const.powi(4)
            * (1.0 / (std::f64::consts::E * eps.powi(3))).max(std::f64::consts::PI.powf(eps))
    })
}

/// Shared k-maps of the two m=1, q=3 interpolated tables:
/// k'(1..3) = (1,2,2), k*(1..3) = (1,3,3).
fn interpolated_k_maps() -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    (vec![vec![0, 1, 1]], vec![vec![0, 2, 2]])
}

fn ar1_table(model: &MildAr1Model, theta: &[f64], params: &EnvelopeParams) -> EnvelopeTable {
    let z = 0.5 + params.eta / 10.0;
    let (c0, s2) = (theta[0], theta[1]);
    let mdl = *model;
    let alpha = vec![vec![0.0, 2.0, 2.0 * (1.0 - z)]];
    let alpha_bar = vec![vec![0.0, 2.0, 2.0]];
    let c: CoeffFn = Arc::new(move |n, _i, k| {
        let ca = c0 * mdl.drift_scale(n);
        match k {
            0 => s2 * ca.powi(-2),
            1 => s2,
            _ => s2 * ca.powf(-2.0 * z),
        }
    });
    let c_bar: CoeffFn = Arc::new(move |n, _i, k| {
        let ca = c0 * mdl.drift_scale(n);
        if k == 0 {
            s2 * ca.powi(-2)
        } else {
            s2
        }
    });
    let g_scaling = params.g_scaling;
    let c_for_d = c.clone();
    let d: CoeffFn = Arc::new(move |n, i, k| {
        let scale = match g_scaling {
            GScaling::Identity => 1.0,
            GScaling::Derivative => (1.0 / c0).max(1.0 / s2),
            GScaling::ScoreForm => {
                (1.0 / c0).max(1.0 / s2) / (n as f64 * mdl.drift_scale(n)).sqrt()
            }
        };
        scale * c_for_d(n, i, k)
    });
    let (k_prime, k_ast) = interpolated_k_maps();
    let k_const = params.k_const;
    EnvelopeTable {
        model_id: "ar1_mild".into(),
        m: 1,
        q: 3,
        alpha: alpha.clone(),
        alpha_bar,
        beta: alpha,
        c,
        c_bar,
        d,
        i_prime: vec![vec![0, 0, 0]],
        k_prime: k_prime.clone(),
        i_ast: vec![vec![0, 0, 0]],
        k_ast: k_ast.clone(),
        i_star: vec![vec![0, 0, 0]],
        k_star: k_ast,
        slow_variation: Arc::new(move |_| 8.0 * k_const),
        z_interp: Some(z),
    }
}

fn fou_table(model: &FouModel, theta: &[f64], params: &EnvelopeParams) -> EnvelopeTable {
    let (kappa, h, s2) = (theta[0], theta[1], theta[2]);
    let z = h + params.eta / 10.0;
    let mdl = *model;
    let ch = c_of_h(h);
    let alpha = vec![vec![2.0 * h - 1.0, 2.0 * h + 1.0, 2.0 * h + 1.0 - 2.0 * z]];
    let alpha_bar = vec![vec![2.0 * h - 1.0, 2.0 * h + 1.0, 2.0 * h + 1.0]];
    let log3 = move |dn: f64| dn.ln().abs().powi(3);
    let c: CoeffFn = Arc::new(move |n, _i, k| {
        let dn = mdl.mesh(n);
        let l3 = log3(dn);
        match k {
            0 => s2 * ch / (kappa * kappa * dn.powf(2.0 - 2.0 * h)) * l3,
            1 => s2 * ch * dn.powf(2.0 * h) * l3,
            _ => s2 * ch / kappa.powf(2.0 * z) * dn.powf(1.0 - 3.0 * z + 2.0 * h * z) * l3,
        }
    });
    let c_bar: CoeffFn = Arc::new(move |n, _i, k| {
        let dn = mdl.mesh(n);
        if k == 0 {
            s2 * ch / (kappa * kappa * dn.powf(2.0 - 2.0 * h))
        } else {
            s2 * ch * dn.powf(2.0 * h)
        }
    });
    let g_scaling = params.g_scaling;
    let c_for_d = c.clone();
    let d: CoeffFn = Arc::new(move |n, i, k| {
        let scale = match g_scaling {
            GScaling::Identity | GScaling::Derivative => 1.0,
            GScaling::ScoreForm => (mdl.span(n) / mdl.mesh(n)).powf(-0.5),
        };
        scale * c_for_d(n, i, k)
    });
    let (k_prime, k_ast) = interpolated_k_maps();
    let k_const = params.k_const;
    EnvelopeTable {
        model_id: "fou".into(),
        m: 1,
        q: 3,
        alpha: alpha.clone(),
        alpha_bar,
        beta: alpha,
        c,
        c_bar,
        d,
        i_prime: vec![vec![0, 0, 0]],
        k_prime: k_prime.clone(),
        i_ast: vec![vec![0, 0, 0]],
        k_ast: k_ast.clone(),
        i_star: vec![vec![0, 0, 0]],
        k_star: k_ast,
        slow_variation: Arc::new(move |_| 8.0 * k_const),
        z_interp: Some(z),
    }
}

fn white_noise_table(theta: &[f64], params: &EnvelopeParams) -> EnvelopeTable {
    let s2 = theta[0];
    let v = s2 / (2.0 * std::f64::consts::PI);
    let mut t = EnvelopeTable::single_power("white_noise", v, 0.0, v, 0.0);
    let k_const = params.k_const;
    t.slow_variation = Arc::new(move |_| 2.0 * k_const);
    if params.g_scaling == GScaling::ScoreForm {
        t.d = Arc::new(move |n, _, _| v / s2 / (n as f64).sqrt());
    } else if params.g_scaling == GScaling::Derivative {
        t.d = Arc::new(move |_, _, _| v / s2);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ar1_table_published_values() {
        let m = MildAr1Model::new(0.15, 1.0).unwrap();
        let t = ar1_table(&m, &[1.0, 1.0], &EnvelopeParams::default());
        t.validate().unwrap();
        assert_eq!((t.m, t.q), (1, 3));
        let z = t.z_interp.unwrap();
        assert_relative_eq!(t.alpha[0][0], 0.0);
        assert_relative_eq!(t.alpha[0][1], 2.0);
        assert_relative_eq!(t.alpha[0][2], 2.0 * (1.0 - z));
        // c̄_{1,1} = σ²(c a_n)^{-2}
        let n = 1024;
        let a = m.drift_scale(n);
        assert_relative_eq!((t.c_bar)(n, 0, 0), a.powi(-2), max_relative = 1e-12);
        // k*(2) = 3, k'(2) = 2 (1-based)
        assert_eq!(t.k_ast[0][1], 2);
        assert_eq!(t.k_prime[0][1], 1);
    }

    #[test]
    fn mixed_fbm_table_published_values() {
        let m = MixedFbmModel::new(1.0).unwrap();
        let t = mixed_fbm_table(&m, &[0.1, 1.0, 0.2, 1.0], &EnvelopeParams::default());
        t.validate().unwrap();
        assert_eq!((t.m, t.q), (2, 1));
        assert_relative_eq!(t.alpha[0][0], -0.8);
        assert_relative_eq!(t.alpha[1][0], -0.6);
    }

    #[test]
    fn invalid_alpha_row_rejected() {
        let mut t = EnvelopeTable::single_power("bad", 1.0, 1.5, 1.0, 1.5);
        assert!(t.validate().is_err());
        t.alpha = vec![vec![0.5]];
        assert!(t.validate().is_ok());
    }
}
