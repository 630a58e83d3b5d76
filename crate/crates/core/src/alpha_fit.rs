//! The transformed-Dirichlet likelihood and its maximization over α.
//!
//! If `u_α(x_i) ~ Dirichlet(γ)`, the log-likelihood of the raw compositions is
//!
//! ```text
//! ℓ(α, γ) = n log Γ(γ₊) − n Σ_j log Γ(γ_j) + n d log|α|
//!         + Σ_i Σ_j (αγ_j − 1) log x_ij − γ₊ Σ_i log Σ_j x_ij^α
//! ```
//!
//! with `d = D − 1`. For fixed α the maximizer in γ is the Dirichlet MLE of
//! the transformed sample; the Jacobian part does not depend on γ.

use crate::dirichlet::{self, DirichletParams, MleOptions, SuffStats};
use crate::error::{Error, Result};
use crate::exec;
use crate::simplex::{self, log_sum_exp, LogData};
use crate::special::ln_gamma;

/// Search domain `[min, −δ] ∪ [δ, max]` for α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBounds {
    pub min: f64,
    pub max: f64,
    /// Half-width of the excluded neighbourhood of 0.
    pub delta: f64,
}

impl Default for AlphaBounds {
    fn default() -> Self {
        AlphaBounds {
            min: -1.0,
            max: 1.0,
            delta: 1e-3,
        }
    }
}

impl AlphaBounds {
    pub fn new(min: f64, max: f64, delta: f64) -> Result<Self> {
        let b = AlphaBounds { min, max, delta };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        let AlphaBounds { min, max, delta } = *self;
        if !(min.is_finite() && max.is_finite() && delta.is_finite()) {
            return Err(Error::domain("α bounds must be finite"));
        }
        if !(delta > 0.0) {
            return Err(Error::domain(format!("δ must be positive, got {delta}")));
        }
        if !(min < max) {
            return Err(Error::domain(format!("empty α range [{min}, {max}]")));
        }
        if self.sides().is_empty() {
            return Err(Error::domain(format!(
                "[{min}, {max}] has no points with |α| ≥ {delta}"
            )));
        }
        Ok(())
    }

    /// The closed intervals making up the domain, negative side first.
    pub fn sides(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(2);
        if self.min <= -self.delta {
            out.push((self.min, self.max.min(-self.delta)));
        }
        if self.max >= self.delta {
            out.push((self.min.max(self.delta), self.max));
        }
        out.retain(|(a, b)| a < b);
        out
    }

    /// `grid_size` points in increasing order, split over the sides in
    /// proportion to their length, each side including its endpoints.
    pub fn grid(&self, grid_size: usize) -> Result<Vec<f64>> {
        self.validate()?;
        if grid_size < 5 {
            return Err(Error::domain(format!("grid_size must be at least 5, got {grid_size}")));
        }
        let sides = self.sides();
        let counts: Vec<usize> = if sides.len() == 2 {
            let len0 = sides[0].1 - sides[0].0;
            let len1 = sides[1].1 - sides[1].0;
            let first = ((grid_size as f64) * len0 / (len0 + len1)).round() as usize;
            let first = first.clamp(2, grid_size - 2);
            vec![first, grid_size - first]
        } else {
            vec![grid_size]
        };
        let mut out = Vec::with_capacity(grid_size);
        for ((lo, hi), m) in sides.into_iter().zip(counts) {
            let step = (hi - lo) / (m - 1) as f64;
            out.extend((0..m).map(|k| if k + 1 == m { hi } else { lo + step * k as f64 }));
        }
        Ok(out)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "the transformed likelihood needs a finite α ≠ 0, got {alpha}"
        )));
    }
    Ok(())
}

/// Exact log-likelihood of the data under `u_α(x) ~ Dirichlet(γ)`, in the
/// expanded form given in the module docs.
pub fn transformed_loglik(data: &LogData, alpha: f64, params: &DirichletParams) -> Result<f64> {
    check_alpha(alpha)?;
    let d_parts = data.n_parts();
    if params.len() != d_parts {
        return Err(Error::domain(format!(
            "data have {d_parts} parts, parameters {}",
            params.len()
        )));
    }
    let gamma = params.shapes();
    let gamma_plus = params.gamma_plus();
    let n = data.n_obs() as f64;
    let constant = n * ln_gamma(gamma_plus) - n * gamma.iter().map(|g| ln_gamma(*g)).sum::<f64>()
        + n * (d_parts - 1) as f64 * alpha.abs().ln();
    let weights: Vec<f64> = gamma.iter().map(|g| alpha * g - 1.0).collect();
    let per_row = exec::sum_indexed(data.n_obs(), |i| {
        let y = data.row(i);
        let scaled: Vec<f64> = y.iter().map(|v| alpha * v).collect();
        weights.iter().zip(y).map(|(w, v)| w * v).sum::<f64>() - gamma_plus * log_sum_exp(&scaled)
    });
    Ok(constant + per_row)
}

/// Logs of the transformed sample.
pub fn transform_logs(data: &LogData, alpha: f64) -> Result<LogData> {
    check_alpha(alpha)?;
    let d_parts = data.n_parts();
    let rows = exec::map_indexed(data.n_obs(), |i| {
        let mut out = vec![0.0; d_parts];
        simplex::transform_log_row(data.row(i), alpha, &mut out);
        out
    });
    Ok(LogData::from_flat(d_parts, rows.concat()))
}

/// One point of the profile.
#[derive(Debug, Clone)]
pub struct ProfilePoint {
    pub alpha: f64,
    pub value: f64,
    pub params: DirichletParams,
    pub iterations: usize,
}

/// Profile at α starting the inner Newton run from `init`.
pub fn profile_point(
    data: &LogData,
    alpha: f64,
    init: Option<&DirichletParams>,
) -> Result<ProfilePoint> {
    let u = transform_logs(data, alpha)?;
    let stats = SuffStats::from_logs(&u);
    let fit = dirichlet::mle_from_stats(&stats, init, MleOptions::default())
        .map_err(|e| e.with_context(format!("inner fit at α = {alpha}")))?;
    let value = transformed_loglik(data, alpha, &fit.params)?;
    Ok(ProfilePoint {
        alpha,
        value,
        params: fit.params,
        iterations: fit.iterations,
    })
}

/// `max_γ ℓ(α, γ)` and the maximizing γ̂(α).
pub fn profile_loglik(data: &LogData, alpha: f64) -> Result<(f64, DirichletParams)> {
    profile_point(data, alpha, None).map(|p| (p.value, p.params))
}

/// Profile log-likelihood on a grid; failed inner fits are left as gaps.
#[derive(Debug, Clone)]
pub struct ProfileCurve {
    pub alphas: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub params: Vec<Option<DirichletParams>>,
}

impl ProfileCurve {
    /// Index of the largest finite value.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, v) in self.values.iter().enumerate() {
            if let Some(v) = v {
                if best.is_none_or(|b| *v > self.values[b].unwrap()) {
                    best = Some(i);
                }
            }
        }
        best
    }
}

/// Grid points are fitted independently from the moment-matching start, in
/// parallel when enabled. Fails with the first point's error if every point
/// fails.
pub fn profile_curve(data: &LogData, bounds: AlphaBounds, grid_size: usize) -> Result<ProfileCurve> {
    let alphas = bounds.grid(grid_size)?;
    let mut points = exec::map_coarse(alphas.len(), |k| profile_point(data, alphas[k], None));
    if points.iter().all(|p| p.is_err()) {
        return Err(points.swap_remove(0).unwrap_err().with_context("every profile grid point failed"));
    }
    let (values, params) = points
        .into_iter()
        .map(|p| match p {
            Ok(p) if p.value.is_finite() => (Some(p.value), Some(p.params)),
            _ => (None, None),
        })
        .unzip();
    Ok(ProfileCurve {
        alphas,
        values,
        params,
    })
}

/// Outcome of [`fit_direct`].
#[derive(Debug, Clone)]
pub struct FitResult {
    pub alpha_hat: f64,
    pub gamma_hat: DirichletParams,
    /// `ℓ(α̂, γ̂)`.
    pub loglik: f64,
    /// Golden-section iterations.
    pub iterations: usize,
    /// Whether the refinement bracket shrank below [`BRACKET_TOL`].
    pub converged: bool,
    pub alpha_bounds: AlphaBounds,
    /// Set when α̂ sits at an end of a side of the domain, e.g. at ±δ.
    pub on_boundary: bool,
}

/// Final width of the golden-section bracket.
pub const BRACKET_TOL: f64 = 1e-4;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Joint maximum likelihood in (α, γ): grid scan of the profile followed by
/// golden-section refinement between the neighbours of the best grid point.
pub fn fit_direct(data: &LogData, bounds: AlphaBounds, grid_size: usize) -> Result<FitResult> {
    let curve = profile_curve(data, bounds, grid_size)?;
    let best = curve
        .argmax()
        .ok_or_else(|| Error::Fit("the inner fit failed at every grid point".into()))?;
    let sides = bounds.sides();
    let a_best = curve.alphas[best];
    let (side_lo, side_hi) = *sides
        .iter()
        .find(|(lo, hi)| *lo <= a_best && a_best <= *hi)
        .expect("grid points lie in a side");
    let same_side = |k: usize| {
        let a = curve.alphas[k];
        side_lo <= a && a <= side_hi
    };
    let lo = if best > 0 && same_side(best - 1) { curve.alphas[best - 1] } else { a_best };
    let hi = if best + 1 < curve.alphas.len() && same_side(best + 1) {
        curve.alphas[best + 1]
    } else {
        a_best
    };

    let mut incumbent = ProfilePoint {
        alpha: a_best,
        value: curve.values[best].unwrap(),
        params: curve.params[best].clone().unwrap(),
        iterations: 0,
    };
    let eval = |alpha: f64, warm: &DirichletParams, incumbent: &mut ProfilePoint| -> f64 {
        match profile_point(data, alpha, Some(warm)) {
            Ok(p) if p.value.is_finite() => {
                let v = p.value;
                if v > incumbent.value {
                    *incumbent = p;
                }
                v
            }
            _ => f64::NEG_INFINITY,
        }
    };

    let (mut a, mut b) = (lo, hi);
    let mut iterations = 0;
    if b - a > BRACKET_TOL {
        let warm = incumbent.params.clone();
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut f1 = eval(x1, &warm, &mut incumbent);
        let mut f2 = eval(x2, &warm, &mut incumbent);
        while b - a > BRACKET_TOL && iterations < 200 {
            iterations += 1;
            let warm = incumbent.params.clone();
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = eval(x1, &warm, &mut incumbent);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = eval(x2, &warm, &mut incumbent);
            }
        }
    }
    let converged = b - a <= BRACKET_TOL;
    let alpha_hat = incumbent.alpha;
    let on_boundary =
        (alpha_hat - side_lo).abs() <= BRACKET_TOL || (side_hi - alpha_hat).abs() <= BRACKET_TOL;
    let loglik = transformed_loglik(data, alpha_hat, &incumbent.params)?;
    Ok(FitResult {
        alpha_hat,
        gamma_hat: incumbent.params,
        loglik,
        iterations,
        converged,
        alpha_bounds: bounds,
        on_boundary,
    })
}
