//! Small-α theory of the transformed Dirichlet model.
//!
//! Under the coalescing parameterization `γ_j = (b/α²)(1 + αc_j)`, `Σc_j = 0`,
//! the exact log-likelihood has the expansion
//!
//! ```text
//! ℓ = (nd/2) log(b/2π) − (b/2) Σ_i Σ_j (y_ij − ȳ_i − c_j)² + n C₀ + α Σ_i C₁,ᵢ + O(α²)
//! C₀   = −½ log D − D ȳ₊₊
//! C₁,ᵢ = −(b/6) (D κ̂₃,ᵢ − Σ_j c_j³)
//! ```
//!
//! where `y_ij = log x_ij`, `ȳ_i` is a row mean, `ȳ₊₊` the grand mean and
//! `κ̂₃,ᵢ` the third sample cumulant of row `i`. The α¹ coefficient follows
//! from the Stirling expansion of `log Γ(γ₊) − Σ log Γ(γ_j)`, whose cubic
//! term is `+(αb/6) Σ c_j³` (see [`normalizer_expansion`]).

use crate::alpha_fit;
use crate::dirichlet::{log_density_logs, DirichletParams};
use crate::error::{Error, Result};
use crate::exec;
use crate::simplex::{log_sum_exp, LogData};
use crate::special::{digamma_unchecked, ln_gamma};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn sum_tolerance(c: &[f64]) -> f64 {
    1e-10 * c.iter().map(|v| v.abs()).sum::<f64>().max(1.0)
}

/// `(α, b, c)` with `b > 0`, `Σc_j = 0` and every `1 + αc_j > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalescingParams {
    pub alpha: f64,
    pub b: f64,
    pub c: Vec<f64>,
}

impl CoalescingParams {
    pub fn new(alpha: f64, b: f64, c: Vec<f64>) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::domain(format!("α must be finite and nonzero, got {alpha}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::domain(format!("b must be positive, got {b}")));
        }
        if c.len() < 2 || c.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("c needs at least 2 finite entries"));
        }
        let sum: f64 = c.iter().sum();
        if sum.abs() > sum_tolerance(&c) {
            return Err(Error::domain(format!("c must sum to zero, sums to {sum:e}")));
        }
        if let Some(j) = c.iter().position(|cj| 1.0 + alpha * cj <= 0.0) {
            return Err(Error::domain(format!(
                "1 + αc_{j} = {} is not positive",
                1.0 + alpha * c[j]
            )));
        }
        Ok(CoalescingParams { alpha, b, c })
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
}

/// Dirichlet shapes `γ_j = (b/α²)(1 + αc_j)`.
pub fn coalescing_to_gamma(p: &CoalescingParams) -> Result<DirichletParams> {
    let scale = p.b / (p.alpha * p.alpha);
    DirichletParams::new(p.c.iter().map(|cj| scale * (1.0 + p.alpha * cj)).collect())
}

/// First three sample cumulants of one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSet {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

/// `κ̂₁ = mean(y)`, `κ̂₂` and `κ̂₃` the second and third central sample moments
/// (divisor D).
pub fn sample_cumulants(y: &[f64]) -> CumulantSet {
    let d = y.len() as f64;
    if y.iter().all(|v| *v == y[0]) {
        return CumulantSet {
            k1: y[0],
            k2: 0.0,
            k3: 0.0,
        };
    }
    let k1 = y.iter().sum::<f64>() / d;
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in y {
        let e = v - k1;
        m2 += e * e;
        m3 += e * e * e;
    }
    CumulantSet {
        k1,
        k2: m2 / d,
        k3: m3 / d,
    }
}

fn check_parts(data: &LogData, d_parts: usize) -> Result<()> {
    if data.n_parts() != d_parts {
        return Err(Error::domain(format!(
            "data have {} parts, parameters {d_parts}",
            data.n_parts()
        )));
    }
    Ok(())
}

/// The expanded log-likelihood through the α¹ term.
pub fn asymptotic_loglik(data: &LogData, p: &CoalescingParams) -> Result<f64> {
    check_parts(data, p.len())?;
    let d_parts = p.len() as f64;
    let d = d_parts - 1.0;
    let n = data.n_obs() as f64;
    let b = p.b;
    let sum_c3: f64 = p.c.iter().map(|v| v * v * v).sum();
    let per_row = exec::sum_indexed(data.n_obs(), |i| {
        let y = data.row(i);
        let cum = sample_cumulants(y);
        let quad: f64 = y
            .iter()
            .zip(&p.c)
            .map(|(v, cj)| {
                let r = v - cum.k1 - cj;
                r * r
            })
            .sum();
        let c0 = -0.5 * d_parts.ln() - d_parts * cum.k1;
        let c1 = -(b / 6.0) * (d_parts * cum.k3 - sum_c3);
        -0.5 * b * quad + c0 + p.alpha * c1
    });
    Ok(0.5 * n * d * (b.ln() - LN_2PI) + per_row)
}

/// `ĉ_j = ȳ₊ⱼ − ȳ₊₊`.
pub fn estimate_c_hat(data: &LogData) -> Vec<f64> {
    let col = data.column_means();
    let grand = col.iter().sum::<f64>() / col.len() as f64;
    col.iter().map(|m| m - grand).collect()
}

/// `b̂ = [(nd)⁻¹ Σ_i Σ_j (y_ij − ȳ₊ⱼ − ȳ_i + ȳ₊₊)²]⁻¹`.
pub fn estimate_b_hat(data: &LogData) -> Result<f64> {
    if data.n_obs() < 2 {
        return Err(Error::domain("b̂ needs at least 2 observations"));
    }
    let col = data.column_means();
    let grand = col.iter().sum::<f64>() / col.len() as f64;
    let ss = exec::sum_indexed(data.n_obs(), |i| {
        let y = data.row(i);
        let row_mean = y.iter().sum::<f64>() / y.len() as f64;
        y.iter()
            .zip(&col)
            .map(|(v, m)| {
                let r = v - m - row_mean + grand;
                r * r
            })
            .sum()
    });
    let cells = (data.n_obs() * (data.n_parts() - 1)) as f64;
    let mean_sq = ss / cells;
    let scale = data.as_flat().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if mean_sq <= (1e-12 * scale).powi(2) {
        return Err(Error::DegenerateData(
            "two-way residuals vanish (replicated compositions); b̂ is infinite".into(),
        ));
    }
    Ok(1.0 / mean_sq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticVariant {
    /// Closed-form `(ĉ, b̂)` under the coalescing model.
    Asymptotic1,
    /// Shapes `b_j/α²` fitted freely at fixed α.
    Asymptotic2,
}

#[derive(Debug, Clone)]
pub struct AsymptoticFit {
    pub alpha: f64,
    pub c_hat: Vec<f64>,
    pub b_hat: f64,
    pub implied_gamma: DirichletParams,
    pub variant: AsymptoticVariant,
    /// `α² γ̂` (Asymptotic2 only).
    pub b_vec: Option<Vec<f64>>,
}

/// Shapes implied by the closed-form estimators at the given α.
pub fn fit_asymptotic1(data: &LogData, alpha: f64) -> Result<AsymptoticFit> {
    let c_hat = estimate_c_hat(data);
    let b_hat = estimate_b_hat(data)?;
    let p = CoalescingParams::new(alpha, b_hat, c_hat)?;
    let implied_gamma = coalescing_to_gamma(&p)?;
    Ok(AsymptoticFit {
        alpha,
        c_hat: p.c,
        b_hat,
        implied_gamma,
        variant: AsymptoticVariant::Asymptotic1,
        b_vec: None,
    })
}

/// Free Dirichlet fit at fixed α written as `γ_j = b_j/α²`; `(b̂, ĉ)` are the
/// coalescing coordinates of the same shapes.
pub fn fit_asymptotic2(data: &LogData, alpha: f64) -> Result<AsymptoticFit> {
    let (_, gamma) = alpha_fit::profile_loglik(data, alpha)?;
    let a2 = alpha * alpha;
    let b_vec: Vec<f64> = gamma.shapes().iter().map(|g| a2 * g).collect();
    let b_hat = b_vec.iter().sum::<f64>() / b_vec.len() as f64;
    let c_hat = b_vec.iter().map(|bj| (bj / b_hat - 1.0) / alpha).collect();
    Ok(AsymptoticFit {
        alpha,
        c_hat,
        b_hat,
        implied_gamma: gamma,
        variant: AsymptoticVariant::Asymptotic2,
        b_vec: Some(b_vec),
    })
}

/// Recentre `c` keeping the shapes `(b/α²)(1 + αc_j)` fixed:
/// `b* = b(1 + αc̄)`, `c*_j = (c_j − c̄)/(1 + αc̄)`.
pub fn normalize_params(alpha: f64, b: f64, c: &[f64]) -> Result<(f64, Vec<f64>)> {
    if c.is_empty() {
        return Err(Error::domain("c is empty"));
    }
    let c_bar = c.iter().sum::<f64>() / c.len() as f64;
    let s = 1.0 + alpha * c_bar;
    if !(s > 0.0) {
        return Err(Error::domain(format!("1 + αc̄ = {s} is not positive")));
    }
    Ok((b * s, c.iter().map(|cj| (cj - c_bar) / s).collect()))
}

/// Moore–Penrose inverse of `σ²(I − J/D)`, which is `σ⁻²(I − J/D)`.
pub fn centered_covariance_pinv(d_parts: usize, sigma2: f64) -> Vec<Vec<f64>> {
    let inv_d = 1.0 / d_parts as f64;
    (0..d_parts)
        .map(|j| {
            (0..d_parts)
                .map(|k| ((if j == k { 1.0 } else { 0.0 }) - inv_d) / sigma2)
                .collect()
        })
        .collect()
}

/// `rᵀ Σ⁻ r` with `r_j = z_j − z̄ − μ_j`, using the explicit matrix.
pub fn centered_quadratic_form(z: &[f64], mu: &[f64], sigma2: f64) -> f64 {
    let pinv = centered_covariance_pinv(z.len(), sigma2);
    let r = centered_residual(z, mu);
    pinv.iter()
        .zip(&r)
        .map(|(row, rj)| rj * row.iter().zip(&r).map(|(s, rk)| s * rk).sum::<f64>())
        .sum()
}

/// `b Σ_j (z_j − z̄ − μ_j)²`, the reduced form valid when `Σμ_j = 0`.
pub fn centered_quadratic_reduced(z: &[f64], mu: &[f64], b: f64) -> f64 {
    b * centered_residual(z, mu).iter().map(|r| r * r).sum::<f64>()
}

fn centered_residual(z: &[f64], mu: &[f64]) -> Vec<f64> {
    let z_bar = z.iter().sum::<f64>() / z.len() as f64;
    z.iter().zip(mu).map(|(zj, m)| zj - z_bar - m).collect()
}

/// Log of the Gaussian limit of `α^d f_{γ/α²}(γ̄ + αv)` on `Σv_j = 0`.
pub fn gaussian_limit_logdensity(v: &[f64], gamma: &DirichletParams) -> Result<f64> {
    if v.len() != gamma.len() {
        return Err(Error::domain("v and γ differ in length"));
    }
    let sum: f64 = v.iter().sum();
    if sum.abs() > sum_tolerance(v) {
        return Err(Error::domain(format!("v must sum to zero, sums to {sum:e}")));
    }
    let gp = gamma.gamma_plus();
    let d = (v.len() - 1) as f64;
    let mut log_prod = 0.0;
    let mut quad = 0.0;
    for (vj, gj) in v.iter().zip(gamma.shapes()) {
        let bar = gj / gp;
        log_prod += bar.ln();
        quad += gp * vj * vj / bar;
    }
    Ok(-0.5 * d * LN_2PI + 0.5 * (d * gp.ln() - log_prod) - 0.5 * quad)
}

/// `d log α + log f_{γ/α²}(γ̄ + αv)`: the exact left side of the Gaussian
/// limit, for checking [`gaussian_limit_logdensity`].
pub fn scaled_dirichlet_logdensity(v: &[f64], gamma: &DirichletParams, alpha: f64) -> Result<f64> {
    let gp = gamma.gamma_plus();
    let a2 = alpha * alpha;
    let point: Vec<f64> = v
        .iter()
        .zip(gamma.shapes())
        .map(|(vj, gj)| gj / gp + alpha * vj)
        .collect();
    if point.iter().any(|p| *p <= 0.0) {
        return Err(Error::domain("γ̄ + αv leaves the simplex"));
    }
    let logs: Vec<f64> = point.iter().map(|p| p.ln()).collect();
    let scaled = DirichletParams::new(gamma.shapes().iter().map(|g| g / a2).collect())?;
    Ok((v.len() - 1) as f64 * alpha.abs().ln() + log_density_logs(&logs, &scaled))
}

/// `(D/α)(γ̄ − 1/D)`: leading mean of `y − ȳ1` when `u ~ Dirichlet(γ/α²)`.
pub fn linear_mean_shift(alpha: f64, gamma: &DirichletParams) -> Result<Vec<f64>> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::domain(format!("α must be finite and nonzero, got {alpha}")));
    }
    let d_parts = gamma.len() as f64;
    Ok(gamma
        .mean()
        .iter()
        .map(|m| d_parts / alpha * (m - 1.0 / d_parts))
        .collect())
}

/// Exact mean of `y − ȳ1` when `u ~ Dirichlet(γ/α²)`:
/// `α⁻¹ (ψ(γ_j/α²) − D⁻¹ Σ_k ψ(γ_k/α²))`, since `y − ȳ1 = clr(u)/α`.
///
/// [`linear_mean_shift`] is its linearization in `γ̄ − 1/D`.
pub fn clr_mean_exact(alpha: f64, gamma: &DirichletParams) -> Result<Vec<f64>> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::domain(format!("α must be finite and nonzero, got {alpha}")));
    }
    let a2 = alpha * alpha;
    let psi: Vec<f64> = gamma
        .shapes()
        .iter()
        .map(|g| digamma_unchecked(g / a2))
        .collect();
    let mean = psi.iter().sum::<f64>() / psi.len() as f64;
    Ok(psi.iter().map(|p| (p - mean) / alpha).collect())
}

/// `log Γ(Σγ_j) − Σ log Γ(γ_j)` at the coalescing shapes.
pub fn normalizer_exact(p: &CoalescingParams) -> Result<f64> {
    let g = coalescing_to_gamma(p)?;
    Ok(ln_gamma(g.gamma_plus()) - g.shapes().iter().map(|v| ln_gamma(*v)).sum::<f64>())
}

/// Stirling expansion of [`normalizer_exact`] through the α¹ term:
///
/// `bD log D/α² − d log|α| + (d/2) log b − ½ log D − (d/2) log 2π
///  − (b/2)Σc_j² + (αb/6)Σc_j³`.
pub fn normalizer_expansion(p: &CoalescingParams) -> f64 {
    let d_parts = p.len() as f64;
    let d = d_parts - 1.0;
    let (alpha, b) = (p.alpha, p.b);
    let c2: f64 = p.c.iter().map(|v| v * v).sum();
    let c3: f64 = p.c.iter().map(|v| v * v * v).sum();
    b * d_parts * d_parts.ln() / (alpha * alpha) - d * alpha.abs().ln() + 0.5 * d * b.ln()
        - 0.5 * d_parts.ln()
        - 0.5 * d * LN_2PI
        - 0.5 * b * c2
        + alpha * b * c3 / 6.0
}

/// `Σ_j γ_j · log Σ_k e^{αy_k}` at the coalescing shapes.
pub fn kernel_exact(p: &CoalescingParams, y: &[f64]) -> Result<f64> {
    if y.len() != p.len() {
        return Err(Error::domain("y and c differ in length"));
    }
    let g = coalescing_to_gamma(p)?;
    let scaled: Vec<f64> = y.iter().map(|v| p.alpha * v).collect();
    Ok(g.gamma_plus() * log_sum_exp(&scaled))
}

/// `bD log D/α² + bDκ̂₁/α + bDκ̂₂/2 + αbDκ̂₃/6`.
pub fn kernel_expansion(p: &CoalescingParams, y: &[f64]) -> f64 {
    let d_parts = p.len() as f64;
    let (alpha, b) = (p.alpha, p.b);
    let k = sample_cumulants(y);
    let bd = b * d_parts;
    bd * d_parts.ln() / (alpha * alpha) + bd * k.k1 / alpha + 0.5 * bd * k.k2 + alpha * bd * k.k3 / 6.0
}
