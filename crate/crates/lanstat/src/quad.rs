//! Panel quadrature on (0, π] for spectral symbols with a power-law pole at
//! the origin.
//!
//! Two schemes share the same geometric panel skeleton (edges π·2⁻ʲ):
//!
//! * [`toeplitz_coefficients`] computes all Fourier coefficients
//!   γ_k = ∫ e^{ikλ} f(λ) dλ, k = 0..n-1, on a node set fixed by n alone, so
//!   every symbol of a model is integrated on the same grid. Subpanel widths
//!   resolve the cos(kλ) oscillation at the largest k.
//! * [`integrate_even`] / [`integrate_vec`] adaptively integrate smooth (but
//!   possibly pole-carrying) even integrands to a requested tolerance.
//!
//! Below the innermost panel edge (≈1e-12) the integrand is replaced by its
//! power-law profile c·λ^{-α} taken from `alpha_hint` and integrated in
//! closed form.

const GL8_NODES: [f64; 8] = [
    -9.60289856497536176e-01,
    -7.96666477413626728e-01,
    -5.25532409916328991e-01,
    -1.83434642495649780e-01,
    1.83434642495649780e-01,
    5.25532409916328991e-01,
    7.96666477413626728e-01,
    9.60289856497536176e-01,
];
const GL8_WEIGHTS: [f64; 8] = [
    1.01228536290376689e-01,
    2.22381034453374343e-01,
    3.13706645877887047e-01,
    3.62683783378361768e-01,
    3.62683783378361768e-01,
    3.13706645877887047e-01,
    2.22381034453374343e-01,
    1.01228536290376689e-01,
];
const GL16_NODES: [f64; 16] = [
    -9.89400934991649939e-01,
    -9.44575023073232600e-01,
    -8.65631202387831755e-01,
    -7.55404408355002999e-01,
    -6.17876244402643771e-01,
    -4.58016777657227370e-01,
    -2.81603550779258915e-01,
    -9.50125098376374544e-02,
    9.50125098376374544e-02,
    2.81603550779258915e-01,
    4.58016777657227370e-01,
    6.17876244402643771e-01,
    7.55404408355002999e-01,
    8.65631202387831755e-01,
    9.44575023073232600e-01,
    9.89400934991649939e-01,
];
const GL16_WEIGHTS: [f64; 16] = [
    2.71524594117540374e-02,
    6.22535239386477063e-02,
    9.51585116824925914e-02,
    1.24628971255534030e-01,
    1.49595988816576764e-01,
    1.69156519395002619e-01,
    1.82603415044923612e-01,
    1.89450610455068585e-01,
    1.89450610455068585e-01,
    1.82603415044923612e-01,
    1.69156519395002619e-01,
    1.49595988816576764e-01,
    1.24628971255534030e-01,
    9.51585116824925914e-02,
    6.22535239386477063e-02,
    2.71524594117540374e-02,
];

/// Number of geometric halvings; innermost edge π·2⁻⁴² ≈ 7.1e-13.
const GEOM_LEVELS: u32 = 42;

/// Tuning knobs for the quadrature schemes.
#[derive(Debug, Clone, Copy)]
pub struct QuadSettings {
    /// Target absolute tolerance.
    pub tol: f64,
    /// Recursion cap for the adaptive scheme.
    pub max_depth: u32,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings { tol: 1e-10, max_depth: 14 }
    }
}

fn geometric_edges() -> Vec<f64> {
    // pi, pi/2, ..., pi*2^-GEOM_LEVELS, descending
    (0..=GEOM_LEVELS).map(|j| std::f64::consts::PI * (0.5f64).powi(j as i32)).collect()
}

/// Closed-form power-law integral of the stub (0, eps]: the symbol is frozen
/// to f(eps)·(λ/eps)^{-α}. cos(kλ) ≈ 1 there for every k this crate uses.
fn stub_integral(f_eps: f64, eps: f64, alpha: f64) -> f64 {
    debug_assert!(alpha < 1.0);
    f_eps * eps / (1.0 - alpha)
}

/// All Fourier coefficients γ_k = ∫_{-π}^{π} e^{ikλ} f(λ) dλ for k < n_coeffs,
/// together with per-coefficient Richardson error estimates.
///
/// The node set depends only on `n_coeffs` and `settings`, never on the
/// symbol, so derivative symbols share the grid of the density itself.
pub fn toeplitz_coefficients(
    symbol: &dyn Fn(f64) -> f64,
    n_coeffs: usize,
    alpha_hint: f64,
    settings: &QuadSettings,
) -> (Vec<f64>, Vec<f64>) {
    let k_max = n_coeffs.max(1) as f64;
    // Extra uniform refinement when the caller tightens tol below the default.
    let refine = if settings.tol < 1e-10 {
        let extra = ((1e-10 / settings.tol).log2() / 8.0).ceil() as u32;
        1usize << extra.min(4)
    } else {
        1
    };

    // Subpanel list: (a, b) pairs covering (eps, pi].
    let edges = geometric_edges();
    let mut panels: Vec<(f64, f64)> = Vec::new();
    for w in edges.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        let width = hi - lo;
        // <= ~1.25 cosine periods of cos(k_max λ) per subpanel
        let m = ((width * k_max / (2.5 * std::f64::consts::PI)).ceil() as usize).max(1) * refine;
        let h = width / m as f64;
        for i in 0..m {
            panels.push((lo + i as f64 * h, lo + (i + 1) as f64 * h));
        }
    }
    let eps = *edges.last().unwrap();

    // Evaluate the symbol once per node.
    struct PanelNodes {
        x16: [f64; 16],
        f16: [f64; 16],
        w16: [f64; 16],
        x8: [f64; 8],
        f8: [f64; 8],
        w8: [f64; 8],
    }
    let evaluated: Vec<PanelNodes> = panels
        .iter()
        .map(|&(a, b)| {
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            let mut p = PanelNodes {
                x16: [0.0; 16],
                f16: [0.0; 16],
                w16: [0.0; 16],
                x8: [0.0; 8],
                f8: [0.0; 8],
                w8: [0.0; 8],
            };
            for i in 0..16 {
                p.x16[i] = c + h * GL16_NODES[i];
                p.w16[i] = h * GL16_WEIGHTS[i];
                p.f16[i] = symbol(p.x16[i]);
            }
            for i in 0..8 {
                p.x8[i] = c + h * GL8_NODES[i];
                p.w8[i] = h * GL8_WEIGHTS[i];
                p.f8[i] = symbol(p.x8[i]);
            }
            p
        })
        .collect();

    let f_eps = symbol(eps);
    let stub = stub_integral(f_eps, eps, alpha_hint.min(0.999));

    let mut gammas = Vec::with_capacity(n_coeffs);
    let mut errors = Vec::with_capacity(n_coeffs);
    for k in 0..n_coeffs {
        let kf = k as f64;
        let mut total = 0.0;
        let mut err = 0.0;
        for p in &evaluated {
            let mut i16v = 0.0;
            for i in 0..16 {
                i16v += p.w16[i] * (kf * p.x16[i]).cos() * p.f16[i];
            }
            let mut i8v = 0.0;
            for i in 0..8 {
                i8v += p.w8[i] * (kf * p.x8[i]).cos() * p.f8[i];
            }
            total += i16v;
            err += (i16v - i8v).abs();
        }
        // evenness doubling; cos(k eps) ~ 1 on the stub
        gammas.push(2.0 * (total + stub));
        errors.push(2.0 * err + stub.abs() * 1e-4);
    }
    (gammas, errors)
}

fn gl_pair(f: &mut dyn FnMut(f64, &mut [f64]), a: f64, b: f64, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut v16 = vec![0.0; dim];
    let mut v8 = vec![0.0; dim];
    let mut buf = vec![0.0; dim];
    for i in 0..16 {
        f(c + h * GL16_NODES[i], &mut buf);
        let w = h * GL16_WEIGHTS[i];
        for (acc, &x) in v16.iter_mut().zip(buf.iter()) {
            *acc += w * x;
        }
    }
    for i in 0..8 {
        f(c + h * GL8_NODES[i], &mut buf);
        let w = h * GL8_WEIGHTS[i];
        for (acc, &x) in v8.iter_mut().zip(buf.iter()) {
            *acc += w * x;
        }
    }
    (v16, v8)
}

fn adapt(
    f: &mut dyn FnMut(f64, &mut [f64]),
    a: f64,
    b: f64,
    dim: usize,
    tol: f64,
    depth: u32,
    max_depth: u32,
    out: &mut [f64],
) -> f64 {
    let (v16, v8) = gl_pair(f, a, b, dim);
    let err: f64 = v16.iter().zip(v8.iter()).map(|(x, y)| (x - y).abs()).sum();
    if err <= tol || depth >= max_depth {
        for (acc, &x) in out.iter_mut().zip(v16.iter()) {
            *acc += x;
        }
        return err;
    }
    let mid = 0.5 * (a + b);
    adapt(f, a, mid, dim, 0.5 * tol, depth + 1, max_depth, out)
        + adapt(f, mid, b, dim, 0.5 * tol, depth + 1, max_depth, out)
}

/// ∫_{-π}^{π} of a vector-valued even integrand with an |λ|^{-α} pole at 0.
/// Returns the integral values and an error estimate.
pub fn integrate_vec(
    f: &mut dyn FnMut(f64, &mut [f64]),
    dim: usize,
    alpha_hint: f64,
    settings: &QuadSettings,
) -> (Vec<f64>, f64) {
    let edges = geometric_edges();
    let mut out = vec![0.0; dim];
    let mut err = 0.0;
    let n_panels = edges.len() - 1;
    for w in edges.windows(2) {
        err += adapt(
            f,
            w[1],
            w[0],
            dim,
            0.5 * settings.tol / n_panels as f64,
            0,
            settings.max_depth,
            &mut out,
        );
    }
    // power-law stub per component
    let eps = *edges.last().unwrap();
    let mut f_eps = vec![0.0; dim];
    f(eps, &mut f_eps);
    let alpha = alpha_hint.min(0.999);
    for (acc, &fe) in out.iter_mut().zip(f_eps.iter()) {
        *acc += stub_integral(fe, eps, alpha);
    }
    for v in out.iter_mut() {
        *v *= 2.0;
    }
    (out, 2.0 * err)
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate_even(
    f: &dyn Fn(f64) -> f64,
    alpha_hint: f64,
    settings: &QuadSettings,
) -> (f64, f64) {
    let mut g = |x: f64, out: &mut [f64]| out[0] = f(x);
    let (v, e) = integrate_vec(&mut g, 1, alpha_hint, settings);
    (v[0], e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_symbol_coefficients() {
        let (g, e) = toeplitz_coefficients(&|_| 1.0 / (2.0 * std::f64::consts::PI), 4, 0.0, &QuadSettings::default());
        assert_relative_eq!(g[0], 1.0, epsilon = 1e-12);
        for k in 1..4 {
            assert!(g[k].abs() < 1e-12, "gamma[{k}] = {}", g[k]);
            assert!(e[k] < 1e-9);
        }
    }

    #[test]
    fn pole_integrand() {
        // int_{-pi}^{pi} |x|^{-1/2} dx = 4 sqrt(pi)
        let (v, e) = integrate_even(&|x| x.abs().powf(-0.5), 0.5, &QuadSettings::default());
        assert_relative_eq!(v, 4.0 * std::f64::consts::PI.sqrt(), max_relative = 1e-9);
        assert!(e < 1e-6);
    }

    #[test]
    fn oscillatory_coefficients_chebyshev_like() {
        // f(x) = (1/2pi)(1 + cos(60 x)) has gamma_60 = 1/2, others in {1, 0}
        let f = |x: f64| (1.0 + (60.0 * x).cos()) / (2.0 * std::f64::consts::PI);
        let (g, _) = toeplitz_coefficients(&f, 80, 0.0, &QuadSettings::default());
        assert_relative_eq!(g[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(g[60], 0.5, epsilon = 1e-10);
        assert!(g[59].abs() < 1e-10 && g[61].abs() < 1e-10 && g[30].abs() < 1e-10);
    }
}
