//! Seeded experiment drivers: simulated α-transformed Dirichlet data, mean
//! log-ratio curves as α → 0, remainder-order studies and the three-way
//! estimator comparison.
//!
//! Every output is a pure function of the configuration. Each α gets its
//! own stream key derived from `(seed, α)`, so adding grid points leaves the
//! draws at existing points unchanged.

use crate::alpha_fit::{self, AlphaBounds, FitResult};
use crate::asymptotics::{self, CoalescingParams};
use crate::dirichlet::{self, DirichletParams};
use crate::error::{Error, Result};
use crate::exec;
use crate::rng;
use crate::simplex::{stable_inverse_log_of_logs, Composition, LogData};

/// Which family of shapes the data are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum SimMode {
    /// `γ_j = (b/α²)(1 + αc_j)` with `Σc_j = 0`.
    Coalescing { b: f64, c: Vec<f64> },
    /// `γ_j = b_j/α²`.
    General { b_vec: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mode: SimMode,
    pub alpha_grid: Vec<f64>,
    /// Observations per α.
    pub n: usize,
    pub seed: u64,
}

/// `points` values spaced evenly in log scale from 0.5 down to 1e-3.
pub fn default_alpha_grid(points: usize) -> Vec<f64> {
    let (hi, lo) = (0.5f64.ln(), 1e-3f64.ln());
    match points {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..points)
            .map(|k| {
                if k + 1 == points {
                    1e-3
                } else {
                    (hi + (lo - hi) * k as f64 / (points - 1) as f64).exp()
                }
            })
            .collect(),
    }
}

impl SimConfig {
    pub fn new(mode: SimMode, alpha_grid: Vec<f64>, n: usize, seed: u64) -> Result<Self> {
        let cfg = SimConfig {
            mode,
            alpha_grid,
            n,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        match &self.mode {
            SimMode::Coalescing { b, c } => {
                if !(*b > 0.0 && b.is_finite()) {
                    return Err(Error::Config(format!("b must be positive, got {b}")));
                }
                if c.len() < 2 {
                    return Err(Error::Config("c needs at least 2 entries".into()));
                }
                let sum: f64 = c.iter().sum();
                if sum.abs() > 1e-10 {
                    return Err(Error::Config(format!("c must sum to zero, sums to {sum:e}")));
                }
            }
            SimMode::General { b_vec } => {
                if b_vec.len() < 2 {
                    return Err(Error::Config("b_vec needs at least 2 entries".into()));
                }
                if b_vec.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(Error::Config("b_vec entries must be positive".into()));
                }
            }
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| **a == 0.0 || !a.is_finite()) {
            return Err(Error::Config(format!("α grid contains {a}")));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        Ok(())
    }

    pub fn n_parts(&self) -> usize {
        match &self.mode {
            SimMode::Coalescing { c, .. } => c.len(),
            SimMode::General { b_vec } => b_vec.len(),
        }
    }

    /// Dirichlet shapes of `u` at α.
    pub fn shapes(&self, alpha: f64) -> Result<DirichletParams> {
        let out = match &self.mode {
            SimMode::Coalescing { b, c } => CoalescingParams::new(alpha, *b, c.clone())
                .and_then(|p| asymptotics::coalescing_to_gamma(&p)),
            SimMode::General { b_vec } => {
                let a2 = alpha * alpha;
                DirichletParams::new(b_vec.iter().map(|v| v / a2).collect())
            }
        };
        out.map_err(|e| Error::Config(format!("shapes at α = {alpha}: {e}")))
    }
}

/// Draws `u ~ Dirichlet(shapes(α))` and returns `log x` with
/// `x = u_α⁻¹(u)`, recovered in log space.
pub fn simulate_log_dataset(cfg: &SimConfig, alpha: f64) -> Result<LogData> {
    cfg.validate()?;
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::Config(format!("cannot simulate at α = {alpha}")));
    }
    let shapes = cfg.shapes(alpha)?;
    let u = dirichlet::sample_log(&shapes, cfg.n, rng::for_alpha(cfg.seed, alpha));
    if alpha == 1.0 {
        return Ok(u);
    }
    let rows = exec::map_indexed(u.n_obs(), |i| stable_inverse_log_of_logs(u.row(i), alpha));
    Ok(LogData::from_flat(u.n_parts(), rows.concat()))
}

/// As [`simulate_log_dataset`], exponentiated. Fails with a range error if
/// a part underflows, which happens for small |α| in general mode.
pub fn simulate_dataset(cfg: &SimConfig, alpha: f64) -> Result<Vec<Composition>> {
    simulate_log_dataset(cfg, alpha)?.to_compositions()
}

/// Per-α Monte Carlo means of `y_j − ȳ` and their standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanCurve {
    pub alphas: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub std_errors: Vec<Vec<f64>>,
}

impl MeanCurve {
    pub fn norms(&self) -> Vec<f64> {
        self.means
            .iter()
            .map(|m| m.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }
}

fn centered_moments(data: &LogData) -> (Vec<f64>, Vec<f64>) {
    let d = data.n_parts();
    let n = data.n_obs() as f64;
    let mut sum = vec![0.0; d];
    let mut sum2 = vec![0.0; d];
    for y in data.rows() {
        let m = y.iter().sum::<f64>() / d as f64;
        for j in 0..d {
            let w = y[j] - m;
            sum[j] += w;
            sum2[j] += w * w;
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let se = sum2
        .iter()
        .zip(&mean)
        .map(|(s2, m)| ((s2 / n - m * m).max(0.0) / (n - 1.0)).sqrt())
        .collect();
    (mean, se)
}

pub fn mean_logratio_curve(cfg: &SimConfig) -> Result<MeanCurve> {
    cfg.validate()?;
    if cfg.n < 100 {
        return Err(Error::Config(format!("curves need n ≥ 100, got {}", cfg.n)));
    }
    if cfg.alpha_grid.is_empty() {
        return Err(Error::Config("α grid is empty".into()));
    }
    let points = exec::map_coarse(cfg.alpha_grid.len(), |k| {
        simulate_log_dataset(cfg, cfg.alpha_grid[k]).map(|d| centered_moments(&d))
    });
    let mut means = Vec::with_capacity(points.len());
    let mut std_errors = Vec::with_capacity(points.len());
    for p in points {
        let (m, s) = p?;
        means.push(m);
        std_errors.push(s);
    }
    Ok(MeanCurve {
        alphas: cfg.alpha_grid.clone(),
        means,
        std_errors,
    })
}

/// Input of [`order_study`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrderConfig {
    pub b: f64,
    pub c: Vec<f64>,
    pub alphas: Vec<f64>,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderRow {
    pub alpha: f64,
    pub exact: f64,
    pub asymptotic: f64,
    pub gap: f64,
}

/// Exact versus expanded log-likelihood at each α, on one dataset drawn
/// from the coalescing model at the smallest |α| in the list. Holding the
/// data fixed makes the gap a deterministic function of α, so successive
/// ratios expose the order of the remainder.
pub fn order_study(cfg: &OrderConfig) -> Result<Vec<OrderRow>> {
    let alpha0 = cfg
        .alphas
        .iter()
        .copied()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .ok_or_else(|| Error::Config("α list is empty".into()))?;
    let sim = SimConfig::new(
        SimMode::Coalescing {
            b: cfg.b,
            c: cfg.c.clone(),
        },
        vec![alpha0],
        cfg.n,
        cfg.seed,
    )?;
    let data = simulate_log_dataset(&sim, alpha0)?;
    cfg.alphas
        .iter()
        .map(|&alpha| {
            let p = CoalescingParams::new(alpha, cfg.b, cfg.c.clone())
                .map_err(|e| Error::Config(e.to_string()))?;
            let exact = alpha_fit::transformed_loglik(&data, alpha, &asymptotics::coalescing_to_gamma(&p)?)?;
            let asymptotic = asymptotics::asymptotic_loglik(&data, &p)?;
            Ok(OrderRow {
                alpha,
                exact,
                asymptotic,
                gap: (exact - asymptotic).abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    DirectMle,
    Asymptotic1,
    Asymptotic2,
}

impl Estimator {
    pub fn label(self) -> &'static str {
        match self {
            Estimator::DirectMle => "Direct MLE",
            Estimator::Asymptotic1 => "Asymptotic 1",
            Estimator::Asymptotic2 => "Asymptotic 2",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub estimator: Estimator,
    /// `None` when this estimator failed; see `error`.
    pub shapes: Option<Vec<f64>>,
    pub error: Option<String>,
}

/// Shapes from the three estimators at a common α.
#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub alpha_used: f64,
    pub component_labels: Vec<String>,
    pub rows: Vec<ComparisonRow>,
    /// The joint fit when α was estimated.
    pub direct_fit: Option<FitResult>,
}

fn row(estimator: Estimator, r: Result<DirichletParams>) -> ComparisonRow {
    match r {
        Ok(p) => ComparisonRow {
            estimator,
            shapes: Some(p.into_vec()),
            error: None,
        },
        Err(e) => ComparisonRow {
            estimator,
            shapes: None,
            error: Some(e.to_string()),
        },
    }
}

/// Direct MLE, Asymptotic 1 and Asymptotic 2 shapes at `alpha`, or at the
/// jointly fitted α̂ when `alpha` is `None`.
pub fn estimator_comparison(
    data: &LogData,
    component_labels: &[String],
    alpha: Option<f64>,
    bounds: AlphaBounds,
    grid_size: usize,
) -> Result<ComparisonTable> {
    if component_labels.len() != data.n_parts() {
        return Err(Error::domain(format!(
            "{} labels for {} parts",
            component_labels.len(),
            data.n_parts()
        )));
    }
    let (alpha_used, direct, direct_fit) = match alpha {
        Some(a) => (a, alpha_fit::profile_loglik(data, a).map(|(_, g)| g), None),
        None => {
            let fit = alpha_fit::fit_direct(data, bounds, grid_size)?;
            (fit.alpha_hat, Ok(fit.gamma_hat.clone()), Some(fit))
        }
    };
    let a1 = asymptotics::fit_asymptotic1(data, alpha_used).map(|f| f.implied_gamma);
    let a2 = asymptotics::fit_asymptotic2(data, alpha_used).map(|f| f.implied_gamma);
    Ok(ComparisonTable {
        alpha_used,
        component_labels: component_labels.to_vec(),
        rows: vec![
            row(Estimator::DirectMle, direct),
            row(Estimator::Asymptotic1, a1),
            row(Estimator::Asymptotic2, a2),
        ],
        direct_fit,
    })
}
