//! Dirichlet density, seeded sampling and maximum likelihood.

use rand::Rng;
use rand_distr::{Open01, StandardNormal};

use crate::error::{Error, Result};
use crate::exec;
use crate::rng;
use crate::simplex::{Composition, LogData};
use crate::special::{digamma_unchecked as psi, ln_gamma, trigamma_unchecked as psi1};

/// Positive Dirichlet shape vector with its cached sum.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    gamma: Vec<f64>,
    gamma_plus: f64,
}

impl DirichletParams {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.len() < 2 {
            return Err(Error::domain("a Dirichlet needs at least 2 shapes"));
        }
        if let Some(j) = gamma.iter().position(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::domain(format!(
                "shape {j} must be finite and positive, got {}",
                gamma[j]
            )));
        }
        let gamma_plus = gamma.iter().sum();
        Ok(Self { gamma, gamma_plus })
    }

    pub fn shapes(&self) -> &[f64] {
        &self.gamma
    }

    pub fn gamma_plus(&self) -> f64 {
        self.gamma_plus
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Normalized shapes `γ / γ₊` (the mean of the distribution).
    pub fn mean(&self) -> Vec<f64> {
        self.gamma.iter().map(|g| g / self.gamma_plus).collect()
    }

    /// `log Γ(γ₊) − Σ log Γ(γ_j)`.
    pub fn log_normalizer(&self) -> f64 {
        ln_gamma(self.gamma_plus) - self.gamma.iter().map(|g| ln_gamma(*g)).sum::<f64>()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.gamma
    }
}

/// Log density at a composition.
pub fn log_density(v: &Composition, params: &DirichletParams) -> Result<f64> {
    if v.len() != params.len() {
        return Err(Error::domain(format!(
            "composition has {} parts, parameters {}",
            v.len(),
            params.len()
        )));
    }
    Ok(log_density_logs(&v.logs(), params))
}

/// Log density given the natural logs of the parts.
pub fn log_density_logs(logv: &[f64], params: &DirichletParams) -> f64 {
    params.log_normalizer()
        + params
            .gamma
            .iter()
            .zip(logv)
            .map(|(g, l)| (g - 1.0) * l)
            .sum::<f64>()
}

/// Natural log of one Gamma(shape, 1) variate.
///
/// Marsaglia–Tsang squeeze/rejection for `shape ≥ 1`; smaller shapes use
/// `G(a) = G(a+1)·U^{1/a}`, done in log space so the variate never
/// underflows.
pub fn sample_log_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.sample(Open01);
        return sample_log_gamma(shape + 1.0, rng) + u.ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let cx = c * x;
        if cx <= -1.0 {
            continue;
        }
        let log_v = 3.0 * cx.ln_1p();
        let v = log_v.exp();
        let u: f64 = rng.sample(Open01);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + log_v) {
            return d.ln() + log_v;
        }
    }
}

/// `n` draws as log-compositions, seeded by `seed`.
///
/// Draws are produced in blocks of [`rng::BLOCK_LEN`] with one derived
/// stream per block, so output does not depend on thread count.
pub fn sample_log(params: &DirichletParams, n: usize, seed: u64) -> LogData {
    let d_parts = params.len();
    let n_blocks = n.div_ceil(rng::BLOCK_LEN);
    let blocks = exec::map_coarse(n_blocks, |b| {
        let mut stream = rng::stream(rng::derive(seed, b as u64));
        let rows = rng::BLOCK_LEN.min(n - b * rng::BLOCK_LEN);
        let mut out = Vec::with_capacity(rows * d_parts);
        let mut row = vec![0.0; d_parts];
        for _ in 0..rows {
            for (r, g) in row.iter_mut().zip(&params.gamma) {
                *r = sample_log_gamma(*g, &mut stream);
            }
            let lse = crate::simplex::log_sum_exp(&row);
            out.extend(row.iter().map(|v| v - lse));
        }
        out
    });
    LogData::from_flat(d_parts, blocks.concat())
}

/// `n` i.i.d. Dirichlet draws, reproducible from `seed`.
///
/// Parts that underflow the double range (only possible for shapes far
/// below 1) are floored at the smallest positive normal double.
pub fn sample(params: &DirichletParams, n: usize, seed: u64) -> Vec<Composition> {
    sample_log(params, n, seed)
        .rows()
        .map(|row| {
            let parts: Vec<f64> = row.iter().map(|v| v.exp().max(f64::MIN_POSITIVE)).collect();
            Composition::close(parts).expect("exp of finite logs is positive")
        })
        .collect()
}

/// Stopping rules for [`mle`].
#[derive(Debug, Clone, Copy)]
pub struct MleOptions {
    pub max_iter: usize,
    /// Bound on the per-observation score max-norm (the total score is `n` times this).
    pub grad_tol: f64,
    /// Bound on the largest Newton step in log-parameters.
    pub step_tol: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-8,
            step_tol: 1e-10,
        }
    }
}

/// Sufficient statistics of a Dirichlet sample plus the first two moments
/// used for initialization.
#[derive(Debug, Clone)]
pub struct SuffStats {
    pub n: usize,
    /// Per-component mean of `log v_ij`.
    pub mean_log: Vec<f64>,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    /// False when every row is identical; the likelihood then has no maximum.
    pub spread: bool,
}

impl SuffStats {
    pub fn from_logs(data: &LogData) -> Self {
        let d_parts = data.n_parts();
        let n = data.n_obs();
        let first = data.row(0);
        let shift: Vec<f64> = first.iter().map(|v| v.exp()).collect();
        let mut mean_log = vec![0.0; d_parts];
        let mut dev = vec![0.0; d_parts];
        let mut sq = vec![0.0; d_parts];
        let mut spread = false;
        for row in data.rows() {
            spread |= row != first;
            for j in 0..d_parts {
                mean_log[j] += row[j];
                let e = row[j].exp() - shift[j];
                dev[j] += e;
                sq[j] += e * e;
            }
        }
        let nf = n as f64;
        let var = (0..d_parts)
            .map(|j| {
                let m = dev[j] / nf;
                (sq[j] / nf - m * m).max(0.0)
            })
            .collect();
        mean_log.iter_mut().for_each(|v| *v /= nf);
        let mean = (0..d_parts).map(|j| shift[j] + dev[j] / nf).collect();
        Self {
            n,
            mean_log,
            mean,
            var,
            spread,
        }
    }

    /// Moment-matching start: `γ₊ = Σ m_j(1−m_j) / Σ var_j − 1`, `γ = m·γ₊`.
    pub fn moment_init(&self) -> DirichletParams {
        let d_parts = self.mean.len() as f64;
        let spread: f64 = self.mean.iter().map(|m| m * (1.0 - m)).sum();
        let var: f64 = self.var.iter().sum();
        let mut total = spread / var - 1.0;
        if !(total.is_finite() && total > 0.0) {
            total = d_parts;
        }
        let gamma = self
            .mean
            .iter()
            .map(|m| (m * total).max(1e-6))
            .collect();
        DirichletParams::new(gamma).expect("moment start is positive")
    }

    /// Mean log-likelihood per observation.
    pub fn mean_loglik(&self, params: &DirichletParams) -> f64 {
        log_density_logs(&self.mean_log, params)
    }
}

/// Result of a converged Newton run.
#[derive(Debug, Clone)]
pub struct MleFit {
    pub params: DirichletParams,
    /// Log-likelihood summed over observations.
    pub loglik: f64,
    pub iterations: usize,
    /// Per-observation score `ψ(γ₊) − ψ(γ_j) + mean log v_j` at the optimum.
    pub score: Vec<f64>,
}

fn score(mean_log: &[f64], gamma: &[f64], gamma_plus: f64) -> Vec<f64> {
    let pg = psi(gamma_plus);
    gamma
        .iter()
        .zip(mean_log)
        .map(|(g, s)| pg - psi(*g) + s)
        .collect()
}

fn mean_loglik(mean_log: &[f64], gamma: &[f64]) -> f64 {
    let gp: f64 = gamma.iter().sum();
    ln_gamma(gp)
        + gamma
            .iter()
            .zip(mean_log)
            .map(|(g, s)| (g - 1.0) * s - ln_gamma(*g))
            .sum::<f64>()
}

/// Size of rounding noise in [`mean_loglik`] at `gamma`.
fn loglik_noise(mean_log: &[f64], gamma: &[f64]) -> f64 {
    let gp: f64 = gamma.iter().sum();
    let scale = ln_gamma(gp).abs()
        + gamma
            .iter()
            .zip(mean_log)
            .map(|(g, s)| (g * s).abs() + ln_gamma(*g).abs())
            .sum::<f64>();
    64.0 * f64::EPSILON * scale
}

/// Newton direction in `θ = log γ`.
///
/// The θ-Hessian is `diag(a) + z·γγᵀ` with `a_j = γ_j g_j − γ_j² ψ'(γ_j)`
/// and `z = ψ'(γ₊)`, solved by Sherman–Morrison. When that matrix is not
/// negative definite the γ-space Newton step (always an ascent direction,
/// the log-likelihood being concave in γ) is used instead.
fn newton_direction(gamma: &[f64], gamma_plus: f64, g: &[f64]) -> (Vec<f64>, f64) {
    let z = psi1(gamma_plus);
    let h: Vec<f64> = gamma.iter().zip(g).map(|(gj, sj)| gj * sj).collect();
    let a: Vec<f64> = gamma
        .iter()
        .zip(g)
        .map(|(gj, sj)| gj * sj - gj * gj * psi1(*gj))
        .collect();
    if a.iter().all(|v| *v < 0.0) {
        let denom = 1.0 + z * gamma.iter().zip(&a).map(|(gj, aj)| gj * gj / aj).sum::<f64>();
        if denom > 0.0 {
            let ha: f64 = gamma.iter().zip(&h).zip(&a).map(|((gj, hj), aj)| gj * hj / aj).sum();
            let coef = z * ha / denom;
            // dθ = −A⁻¹h
            let dir: Vec<f64> = (0..gamma.len())
                .map(|j| -(h[j] - coef * gamma[j]) / a[j])
                .collect();
            let gain = 0.5 * dir.iter().zip(&h).map(|(d, hj)| d * hj).sum::<f64>();
            if gain >= 0.0 {
                return (dir, gain);
            }
        }
    }
    // γ-space Newton: H = −diag(q) + z11ᵀ with q_j = ψ'(γ_j).
    let q: Vec<f64> = gamma.iter().map(|gj| psi1(*gj)).collect();
    let b = g.iter().zip(&q).map(|(gj, qj)| gj / qj).sum::<f64>()
        / (-1.0 / z + q.iter().map(|qj| 1.0 / qj).sum::<f64>());
    let dir: Vec<f64> = (0..gamma.len())
        .map(|j| (g[j] - b) / q[j] / gamma[j])
        .collect();
    let gain = 0.5 * dir.iter().zip(&h).map(|(d, hj)| d * hj).sum::<f64>();
    (dir, gain.max(0.0))
}

/// Beyond this total shape the likelihood is flat to working precision.
const MAX_GAMMA_PLUS: f64 = 1e14;

/// Maximum likelihood from sufficient statistics.
pub fn mle_from_stats(
    stats: &SuffStats,
    init: Option<&DirichletParams>,
    opts: MleOptions,
) -> Result<MleFit> {
    let d_parts = stats.mean_log.len();
    if stats.n < 2 {
        return Err(Error::domain("maximum likelihood needs at least 2 observations"));
    }
    if let Some(p) = init {
        if p.len() != d_parts {
            return Err(Error::domain("initial parameters have the wrong length"));
        }
    }
    if !stats.spread {
        return Err(Error::Convergence {
            iterations: 0,
            grad_norm: f64::INFINITY,
            last_iterate: stats.moment_init().into_vec(),
            context: Some("all observations are identical; the shapes diverge".into()),
        });
    }
    let start = match init {
        Some(p) => p.clone(),
        None => stats.moment_init(),
    };
    let mut theta: Vec<f64> = start.gamma.iter().map(|g| g.ln()).collect();
    let mut gamma = start.gamma.clone();
    let mut ll = mean_loglik(&stats.mean_log, &gamma);
    let mut g = score(&stats.mean_log, &gamma, gamma.iter().sum());
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    for iter in 1..=opts.max_iter {
        let gamma_plus: f64 = gamma.iter().sum();
        if gamma_plus > MAX_GAMMA_PLUS {
            return Err(Error::Convergence {
                iterations: iter - 1,
                grad_norm: max_abs(&g) * stats.n as f64,
                last_iterate: gamma,
                context: Some("shape parameters diverge; the data have no spread".into()),
            });
        }
        let (mut dir, gain) = newton_direction(&gamma, gamma_plus, &g);
        let step = max_abs(&dir);
        // Noise floor of the predicted gain: score rounding scaled by γ.
        let h_noise = 64.0
            * f64::EPSILON
            * gamma
                .iter()
                .zip(&stats.mean_log)
                .map(|(gj, s)| gj * (psi(gamma_plus).abs() + psi(*gj).abs() + s.abs()))
                .fold(0.0f64, f64::max);
        let grad_ok = max_abs(&g) <= opts.grad_tol;
        if grad_ok && (step <= opts.step_tol || gain <= h_noise * h_noise) {
            return Ok(finish(stats, gamma, iter - 1, g));
        }
        if step > 3.0 {
            dir.iter_mut().for_each(|d| *d *= 3.0 / step);
        }
        let noise = loglik_noise(&stats.mean_log, &gamma);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand_theta: Vec<f64> = theta.iter().zip(&dir).map(|(th, d)| th + t * d).collect();
            let cand: Vec<f64> = cand_theta.iter().map(|v| v.exp()).collect();
            if cand.iter().all(|v| v.is_finite() && *v > 0.0) {
                let cand_ll = mean_loglik(&stats.mean_log, &cand);
                if cand_ll.is_finite() && cand_ll >= ll - noise {
                    accepted = Some((cand_theta, cand, cand_ll));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((th, ga, l)) => {
                theta = th;
                gamma = ga;
                ll = l;
                g = score(&stats.mean_log, &gamma, gamma.iter().sum());
            }
            None if grad_ok => return Ok(finish(stats, gamma, iter, g)),
            None => {
                return Err(Error::Convergence {
                    iterations: iter,
                    grad_norm: max_abs(&g) * stats.n as f64,
                    last_iterate: gamma,
                    context: Some("line search could not increase the likelihood".into()),
                })
            }
        }
    }
    let grad_norm = max_abs(&g);
    if grad_norm <= opts.grad_tol {
        return Ok(finish(stats, gamma, opts.max_iter, g));
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        grad_norm: grad_norm * stats.n as f64,
        last_iterate: gamma,
        context: None,
    })
}

fn finish(stats: &SuffStats, gamma: Vec<f64>, iterations: usize, score: Vec<f64>) -> MleFit {
    let loglik = stats.n as f64 * mean_loglik(&stats.mean_log, &gamma);
    MleFit {
        params: DirichletParams::new(gamma).expect("iterates stay positive"),
        loglik,
        iterations,
        score,
    }
}

/// Maximum-likelihood Dirichlet fit to a sample.
///
/// Newton–Raphson on `log γ` with step halving; moment-matching start when
/// `init` is `None`. Fails with [`Error::Convergence`] after 200 iterations.
pub fn mle(data: &LogData, init: Option<&DirichletParams>) -> Result<DirichletParams> {
    mle_with(data, init, MleOptions::default()).map(|f| f.params)
}

pub fn mle_with(
    data: &LogData,
    init: Option<&DirichletParams>,
    opts: MleOptions,
) -> Result<MleFit> {
    mle_from_stats(&SuffStats::from_logs(data), init, opts)
}
