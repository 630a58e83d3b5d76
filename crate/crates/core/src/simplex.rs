//! Compositions and the deterministic maps on the simplex interior.
//!
//! The α-transformation is the power-and-close map
//! `u_α(x)_j = x_j^α / Σ_k x_k^α`, with inverse `u_{1/α}`. Everything here is
//! evaluated in log space: `log u_α(x) = α·log x − logsumexp(α·log x)`, which
//! never overflows regardless of α.

use std::fmt;

use crate::error::{Error, Result};

/// Largest deviation of a row sum from 1 that construction silently absorbs.
pub const CLOSURE_TOLERANCE: f64 = 1e-8;

/// A point in the interior of the simplex: `D ≥ 2` strictly positive parts
/// summing to one.
#[derive(Clone, PartialEq)]
pub struct Composition {
    parts: Vec<f64>,
}

impl fmt::Debug for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Composition").field(&self.parts).finish()
    }
}

impl Composition {
    /// Validate `values` as a composition.
    ///
    /// Rows summing to `1 ± 1e-8` are renormalized; larger deviations,
    /// non-finite or non-positive parts and `D < 2` are domain errors.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_positive(&values)?;
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > CLOSURE_TOLERANCE {
            return Err(Error::domain(format!(
                "components sum to {sum}, not 1 (tolerance {CLOSURE_TOLERANCE:e})"
            )));
        }
        Ok(Self::closed(values, sum))
    }

    /// Closure operation: divide strictly positive `values` by their sum.
    pub fn close(values: Vec<f64>) -> Result<Self> {
        check_positive(&values)?;
        let sum: f64 = values.iter().sum();
        if !sum.is_finite() {
            return Err(Error::domain("component sum is not finite"));
        }
        Ok(Self::closed(values, sum))
    }

    /// Build from natural logs of (possibly unnormalized) parts.
    ///
    /// Fails with a range error if some part underflows to zero after
    /// normalization.
    pub fn from_logs(logs: &[f64]) -> Result<Self> {
        if logs.len() < 2 {
            return Err(Error::domain("a composition needs at least 2 parts"));
        }
        if let Some(j) = logs.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::NumericalRange {
                component: j,
                detail: format!("log-part is {}", logs[j]),
            });
        }
        let lse = log_sum_exp(logs);
        let values: Vec<f64> = logs.iter().map(|v| (v - lse).exp()).collect();
        if let Some(j) = values.iter().position(|v| *v <= 0.0) {
            return Err(Error::NumericalRange {
                component: j,
                detail: format!(
                    "exp({:.6e}) underflows; use the log-space representation",
                    logs[j] - lse
                ),
            });
        }
        let sum: f64 = values.iter().sum();
        Ok(Self::closed(values, sum))
    }

    fn closed(mut values: Vec<f64>, sum: f64) -> Self {
        if sum != 1.0 {
            for v in values.iter_mut() {
                *v /= sum;
            }
        }
        Self { parts: values }
    }

    /// Uniform composition with `d_parts` parts.
    pub fn uniform(d_parts: usize) -> Result<Self> {
        Self::new(vec![1.0 / d_parts as f64; d_parts])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.parts
    }

    /// Number of parts `D`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    /// Always false: compositions have at least two parts.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn logs(&self) -> Vec<f64> {
        self.parts.iter().map(|v| v.ln()).collect()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.parts
    }
}

fn check_positive(values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::domain("a composition needs at least 2 parts"));
    }
    for (j, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::domain(format!("component {j} is not finite ({v})")));
        }
        if *v <= 0.0 {
            return Err(Error::domain(format!(
                "component {j} is {v}; the α-transformation is defined on the simplex interior only"
            )));
        }
    }
    Ok(())
}

/// Centred log-ratio representation of one composition.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRatios {
    /// `y_j = log x_j`.
    pub y: Vec<f64>,
    /// `w_j = y_j − ȳ`; sums to zero.
    pub w: Vec<f64>,
    /// Mean of `y`.
    pub y_bar: f64,
}

/// A sample of compositions held by the natural logs of their parts.
///
/// Row `i` holds `y_ij = log x_ij`. Rows are normalized in the sense
/// `logsumexp(y_i) = 0` up to rounding, but individual parts may be far
/// below the smallest positive double, which is what makes very small |α|
/// workable.
#[derive(Debug, Clone, PartialEq)]
pub struct LogData {
    n_parts: usize,
    y: Vec<f64>,
}

impl LogData {
    pub fn new(data: &[Composition]) -> Result<Self> {
        let first = data
            .first()
            .ok_or_else(|| Error::domain("data set is empty"))?;
        let n_parts = first.len();
        let mut y = Vec::with_capacity(data.len() * n_parts);
        for (i, x) in data.iter().enumerate() {
            if x.len() != n_parts {
                return Err(Error::domain(format!(
                    "row {i} has {} parts, expected {n_parts}",
                    x.len()
                )));
            }
            y.extend(x.as_slice().iter().map(|v| v.ln()));
        }
        Ok(Self { n_parts, y })
    }

    /// Build from rows of log-parts. Each row is renormalized in log space.
    pub fn from_log_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::domain("data set is empty"))?;
        let n_parts = first.as_ref().len();
        if n_parts < 2 {
            return Err(Error::domain("a composition needs at least 2 parts"));
        }
        let mut y = Vec::with_capacity(rows.len() * n_parts);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_parts {
                return Err(Error::domain(format!(
                    "row {i} has {} parts, expected {n_parts}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NumericalRange {
                    component: j,
                    detail: format!("row {i}: log-part is {}", row[j]),
                });
            }
            let lse = log_sum_exp(row);
            y.extend(row.iter().map(|v| v - lse));
        }
        Ok(Self { n_parts, y })
    }

    pub(crate) fn from_flat(n_parts: usize, y: Vec<f64>) -> Self {
        debug_assert!(n_parts >= 2 && y.len() % n_parts == 0);
        Self { n_parts, y }
    }

    /// Number of observations `n`.
    pub fn n_obs(&self) -> usize {
        self.y.len() / self.n_parts
    }

    /// Number of parts `D`.
    pub fn n_parts(&self) -> usize {
        self.n_parts
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.y[i * self.n_parts..(i + 1) * self.n_parts]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.y.chunks_exact(self.n_parts)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.y
    }

    /// Column means `ȳ_{+j}`.
    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n_parts];
        for row in self.rows() {
            for (acc, v) in m.iter_mut().zip(row) {
                *acc += v;
            }
        }
        let n = self.n_obs() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Exponentiate back to compositions; fails if a part underflows.
    pub fn to_compositions(&self) -> Result<Vec<Composition>> {
        self.rows().map(Composition::from_logs).collect()
    }
}

/// `log Σ exp(v_j)` without overflow.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn nonzero_alpha(alpha: f64, what: &str) -> Result<()> {
    if alpha == 0.0 {
        return Err(Error::domain(format!(
            "{what} is undefined at α = 0; use clr() for the α → 0 limit"
        )));
    }
    if !alpha.is_finite() {
        return Err(Error::domain(format!("α must be finite, got {alpha}")));
    }
    Ok(())
}

/// Write `log u_α` of a log-row into `out`.
pub(crate) fn transform_log_row(y: &[f64], alpha: f64, out: &mut [f64]) {
    if alpha == 1.0 {
        out.copy_from_slice(y);
        return;
    }
    for (o, v) in out.iter_mut().zip(y) {
        *o = alpha * v;
    }
    let lse = log_sum_exp(out);
    out.iter_mut().for_each(|o| *o -= lse);
}

/// The α-transformation `u_α(x)`.
pub fn alpha_transform(x: &Composition, alpha: f64) -> Result<Composition> {
    nonzero_alpha(alpha, "the α-transformation")?;
    let y = x.logs();
    let mut logu = vec![0.0; y.len()];
    transform_log_row(&y, alpha, &mut logu);
    Composition::from_logs(&logu)
}

/// Inverse α-transformation `u_α⁻¹(u) = u_{1/α}(u)`, evaluated by
/// exponentiating [`stable_inverse_log`].
///
/// Fails with [`Error::NumericalRange`] when a recovered part is below the
/// double-precision range; [`stable_inverse_log`] still works there.
pub fn alpha_inverse(u: &Composition, alpha: f64) -> Result<Composition> {
    let y = stable_inverse_log(u, alpha)?;
    let values: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    if let Some(j) = values.iter().position(|v| *v <= 0.0) {
        return Err(Error::NumericalRange {
            component: j,
            detail: format!(
                "exp({:.6e}) underflows at α = {alpha}; use stable_inverse_log",
                y[j]
            ),
        });
    }
    let sum: f64 = values.iter().sum();
    Ok(Composition::closed(values, sum))
}

/// Centred log-ratio transform.
pub fn clr(x: &Composition) -> LogRatios {
    let y = x.logs();
    let y_bar = y.iter().sum::<f64>() / y.len() as f64;
    let w = y.iter().map(|v| v - y_bar).collect();
    LogRatios { y, w, y_bar }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// The α-metric `Δ_α(x, y) = (D/|α|)·‖u_α(x) − u_α(y)‖`.
///
/// At `α = 0` the closed-form limit `‖clr(x) − clr(y)‖` is returned.
pub fn alpha_metric(x: &Composition, y: &Composition, alpha: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if alpha == 0.0 {
        return Ok(euclidean(&clr(x).w, &clr(y).w));
    }
    let ux = alpha_transform(x, alpha)?;
    let uy = alpha_transform(y, alpha)?;
    Ok(x.len() as f64 / alpha.abs() * euclidean(ux.as_slice(), uy.as_slice()))
}

/// `log |J_α(x)|`, the log Jacobian determinant of `u_α` in `d = D − 1`
/// free coordinates.
pub fn log_jacobian(x: &Composition, alpha: f64) -> Result<f64> {
    nonzero_alpha(alpha, "the Jacobian")?;
    Ok(log_jacobian_logs(&x.logs(), alpha))
}

pub(crate) fn log_jacobian_logs(y: &[f64], alpha: f64) -> f64 {
    let d_parts = y.len() as f64;
    let scaled: Vec<f64> = y.iter().map(|v| alpha * v).collect();
    (d_parts - 1.0) * alpha.abs().ln() + (alpha - 1.0) * y.iter().sum::<f64>()
        - d_parts * log_sum_exp(&scaled)
}

/// Index used as reference part in the stable inverse: the largest
/// `log(u_j)/α`, lowest index on ties.
fn reference_index(logu: &[f64], alpha: f64) -> usize {
    let mut best = 0;
    for j in 1..logu.len() {
        if logu[j] / alpha > logu[best] / alpha {
            best = j;
        }
    }
    best
}

/// Natural logs of `u_α⁻¹(u)` computed without exponentiating by `1/α`:
///
/// `y_j = (1/α)·log(u_j/u_{j*}) − log(1 + Σ_{k≠j*} (u_k/u_{j*})^{1/α})`.
///
/// `j*` maximizes `log(u_j)/α`, so every power in the sum lies in `[0, 1]`.
pub fn stable_inverse_log(u: &Composition, alpha: f64) -> Result<Vec<f64>> {
    nonzero_alpha(alpha, "the inverse α-transformation")?;
    Ok(stable_inverse_log_of_logs(&u.logs(), alpha))
}

pub(crate) fn stable_inverse_log_of_logs(logu: &[f64], alpha: f64) -> Vec<f64> {
    let star = reference_index(logu, alpha);
    let inv = 1.0 / alpha;
    let rel: Vec<f64> = logu.iter().map(|v| inv * (v - logu[star])).collect();
    let tail: f64 = rel
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != star)
        .map(|(_, r)| r.exp())
        .sum();
    let norm = tail.ln_1p();
    rel.into_iter().map(|r| r - norm).collect()
}

/// Natural logs of `u_α⁻¹(u)` by the direct power formula
/// `log(u_j^{1/α} / Σ_k u_k^{1/α})`.
///
/// Overflows or underflows for small |α|; kept for comparison with
/// [`stable_inverse_log`].
pub fn naive_inverse_log(u: &Composition, alpha: f64) -> Result<Vec<f64>> {
    nonzero_alpha(alpha, "the inverse α-transformation")?;
    let p: Vec<f64> = u.as_slice().iter().map(|v| v.powf(1.0 / alpha)).collect();
    let s: f64 = p.iter().sum();
    Ok(p.iter().map(|v| (v / s).ln()).collect())
}

/// `α⁻¹(D·u_α(x) − 1_D)`, which tends to `clr(x)` as α → 0.
pub fn rescaled_transform_limit(x: &Composition, alpha: f64) -> Result<Vec<f64>> {
    nonzero_alpha(alpha, "the rescaled transform")?;
    let w = clr(x).w;
    // D·u_j − 1 = (D·m_j − Σ m_k) / Σ e^{αw_k} with m = expm1(αw), which
    // avoids the cancellation in D·u_j − 1 for small α.
    let m: Vec<f64> = w.iter().map(|v| (alpha * v).exp_m1()).collect();
    let d_parts = w.len() as f64;
    let sum_m: f64 = m.iter().sum();
    let denom = d_parts + sum_m;
    Ok(m.iter()
        .map(|mj| (d_parts * mj - sum_m) / denom / alpha)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn comp(v: &[f64]) -> Composition {
        Composition::new(v.to_vec()).unwrap()
    }

    fn close_rel(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn construction_rules() {
        assert!(Composition::new(vec![0.5, 0.5]).is_ok());
        let c = Composition::new(vec![0.5, 0.5 + 5e-9]).unwrap();
        assert!((c.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(Composition::new(vec![0.5, 0.51]).is_err());
        assert!(Composition::new(vec![1.0]).is_err());
        let zero = Composition::new(vec![0.0, 1.0]).unwrap_err();
        assert!(zero.to_string().contains("component 0"));
        assert!(Composition::new(vec![-0.1, 1.1]).is_err());
        assert!(Composition::new(vec![f64::NAN, 1.0]).is_err());
        let closed = Composition::close(vec![2.0, 6.0]).unwrap();
        assert_eq!(closed.as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn alpha_transform_examples() {
        let x = comp(&[0.2, 0.3, 0.5]);
        let u = alpha_transform(&x, 1.0).unwrap();
        for (a, b) in u.as_slice().iter().zip(x.as_slice()) {
            assert!(close_rel(*a, *b, 1e-15));
        }
        let third = 1.0 / 3.0;
        let u = alpha_transform(&comp(&[third; 3]), 7.3).unwrap();
        u.as_slice().iter().for_each(|v| assert!(close_rel(*v, third, 1e-15)));
        let u = alpha_transform(&comp(&[0.8, 0.2]), 2.0).unwrap();
        assert!(close_rel(u.as_slice()[0], 0.64 / 0.68, 1e-14));
        assert!(close_rel(u.as_slice()[1], 0.04 / 0.68, 1e-14));
        let err = alpha_transform(&x, 0.0).unwrap_err();
        assert!(err.to_string().contains("clr"));
    }

    #[test]
    fn alpha_inverse_examples() {
        let u = comp(&[0.2, 0.3, 0.5]);
        let x = alpha_inverse(&u, 1.0).unwrap();
        for (a, b) in x.as_slice().iter().zip(u.as_slice()) {
            assert!(close_rel(*a, *b, 1e-14));
        }
        let x = comp(&[0.1, 0.2, 0.7]);
        let back = alpha_inverse(&alpha_transform(&x, 0.5).unwrap(), 0.5).unwrap();
        for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
            assert!(close_rel(*a, *b, 1e-12));
        }
        let u = Composition::close(vec![0.64 / 0.68, 0.04 / 0.68]).unwrap();
        let x = alpha_inverse(&u, 2.0).unwrap();
        assert!(close_rel(x.as_slice()[0], 0.8, 1e-14));
        assert!(close_rel(x.as_slice()[1], 0.2, 1e-14));
        assert!(alpha_inverse(&u, 0.0).is_err());
    }

    #[test]
    fn alpha_inverse_reports_underflow() {
        let u = comp(&[0.5, 0.3, 0.2]);
        match alpha_inverse(&u, 1e-3) {
            Err(Error::NumericalRange { component, .. }) => assert_eq!(component, 2),
            other => panic!("expected range error, got {other:?}"),
        }
        let y = stable_inverse_log(&u, 1e-3).unwrap();
        assert!(y.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn clr_examples() {
        let third = 1.0 / 3.0;
        assert!(clr(&comp(&[third; 3])).w.iter().all(|v| v.abs() < 1e-15));
        let e = std::f64::consts::E;
        let c = 1.0 / (1.0 + e);
        let w = clr(&comp(&[e * c, c])).w;
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn metric_examples() {
        let x = comp(&[0.1, 0.3, 0.6]);
        for a in [-1.0, 0.0, 0.3, 1.0] {
            assert_eq!(alpha_metric(&x, &x, a).unwrap(), 0.0);
        }
        let d1 = alpha_metric(&comp(&[0.5, 0.5]), &comp(&[0.3, 0.7]), 1.0).unwrap();
        assert!(close_rel(d1, 2.0 * (0.08f64).sqrt(), 1e-14));
        let y = comp(&[0.25, 0.25, 0.5]);
        let d0 = alpha_metric(&x, &y, 0.0).unwrap();
        let direct = euclidean(&clr(&x).w, &clr(&y).w);
        assert_eq!(d0, direct);
        let small = alpha_metric(&x, &y, 1e-4).unwrap();
        assert!(close_rel(small, d0, 1e-3));
    }

    #[test]
    fn log_jacobian_examples() {
        let x = comp(&[0.2, 0.3, 0.5]);
        assert!(log_jacobian(&x, 1.0).unwrap().abs() < 1e-15);
        // D=3, uniform, α=2: 2·log 2 + (1)·3·log(1/3) − 3·log(3·(1/9)).
        let third: f64 = 1.0 / 3.0;
        let expect = 2.0 * 2f64.ln() + 3.0 * third.ln() - 3.0 * (3.0 * third * third).ln();
        let got = log_jacobian(&comp(&[third; 3]), 2.0).unwrap();
        assert!(close_rel(got, expect, 1e-14), "{got} vs {expect}");
        assert!(log_jacobian(&x, 0.0).is_err());
    }

    /// Central-difference Jacobian of the map restricted to the first d
    /// coordinates (x_D = 1 − Σ others), determinant via LU.
    fn fd_log_jacobian(x: &[f64], alpha: f64) -> f64 {
        let d = x.len() - 1;
        let map = |free: &[f64]| -> Vec<f64> {
            let mut full = free.to_vec();
            full.push(1.0 - free.iter().sum::<f64>());
            let pw: Vec<f64> = full.iter().map(|v| v.powf(alpha)).collect();
            let s: f64 = pw.iter().sum();
            pw[..d].iter().map(|v| v / s).collect()
        };
        let mut jac = nalgebra::DMatrix::<f64>::zeros(d, d);
        for k in 0..d {
            let h = 1e-6 * x[k];
            let mut plus = x[..d].to_vec();
            let mut minus = x[..d].to_vec();
            plus[k] += h;
            minus[k] -= h;
            let (fp, fm) = (map(&plus), map(&minus));
            for r in 0..d {
                jac[(r, k)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        jac.determinant().abs().ln()
    }

    #[test]
    fn log_jacobian_matches_finite_differences() {
        let cases: [(&[f64], f64); 5] = [
            (&[0.2, 0.3, 0.5], 0.5),
            (&[0.1, 0.6, 0.3], -0.7),
            (&[0.25, 0.25, 0.4, 0.1], 2.0),
            (&[0.05, 0.95], 0.25),
            (&[0.3, 0.1, 0.2, 0.15, 0.25], 1.6),
        ];
        for (x, a) in cases {
            let exact = log_jacobian(&comp(x), a).unwrap();
            let fd = fd_log_jacobian(x, a);
            assert!(
                (exact - fd).abs() <= 1e-5 * exact.abs().max(1.0),
                "x={x:?} α={a}: {exact} vs {fd}"
            );
        }
    }

    #[test]
    fn stable_inverse_log_examples() {
        for d in [2usize, 3, 7] {
            let u = Composition::uniform(d).unwrap();
            for a in [1e-4, -0.3, 2.0] {
                for v in stable_inverse_log(&u, a).unwrap() {
                    assert!((v + (d as f64).ln()).abs() < 1e-12);
                }
            }
        }
        let u = comp(&[0.5, 0.3, 0.2]);
        let stable = stable_inverse_log(&u, 0.05).unwrap();
        let naive = naive_inverse_log(&u, 0.05).unwrap();
        for (s, n) in stable.iter().zip(&naive) {
            assert!((s - n).abs() < 1e-9);
        }
        let u = comp(&[0.4, 0.35, 0.25]);
        for a in [1e-4, -1e-4] {
            assert!(stable_inverse_log(&u, a)
                .unwrap()
                .iter()
                .all(|v| v.is_finite()));
        }
    }

    #[test]
    fn rescaled_transform_examples() {
        let u = Composition::uniform(4).unwrap();
        for a in [1e-3, 0.5, -2.0] {
            assert!(rescaled_transform_limit(&u, a)
                .unwrap()
                .iter()
                .all(|v| v.abs() < 1e-12));
        }
        let x = comp(&[0.1, 0.3, 0.6]);
        let w = clr(&x).w;
        let err = |a: f64| euclidean(&rescaled_transform_limit(&x, a).unwrap(), &w);
        let norm_w = euclidean(&w, &[0.0; 3]);
        assert!(err(1e-3) <= 1e-2 * norm_w);
        for a in [1e-2, 1e-3] {
            let ratio = err(a) / err(a / 2.0);
            assert!((ratio - 2.0).abs() < 0.01, "ratio {ratio} at α={a}");
        }
    }

    #[test]
    fn log_data_roundtrip() {
        let rows = vec![comp(&[0.2, 0.3, 0.5]), comp(&[0.6, 0.1, 0.3])];
        let ld = LogData::new(&rows).unwrap();
        assert_eq!((ld.n_obs(), ld.n_parts()), (2, 3));
        let back = ld.to_compositions().unwrap();
        for (a, b) in back.iter().zip(&rows) {
            for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
                assert!(close_rel(*p, *q, 1e-15));
            }
        }
        assert!(LogData::new(&[comp(&[0.5, 0.5]), comp(&[0.2, 0.3, 0.5])]).is_err());
        let shifted = LogData::from_log_rows(&[vec![1.0, 1.0]]).unwrap();
        assert!((shifted.row(0)[0] - 0.5f64.ln()).abs() < 1e-15);
    }

    fn composition_strategy() -> impl Strategy<Value = Vec<f64>> {
        (2usize..7).prop_flat_map(|d| proptest::collection::vec(0.01f64..1.0, d))
    }

    proptest! {
        #[test]
        fn round_trip(raw in composition_strategy(), k in 0usize..8) {
            let alphas = [1.0, -1.0, 0.5, -0.5, 0.1, -0.1, 0.01, -0.01];
            let a = alphas[k];
            let x = Composition::close(raw).unwrap();
            let back = alpha_inverse(&alpha_transform(&x, a).unwrap(), a).unwrap();
            for (p, q) in back.as_slice().iter().zip(x.as_slice()) {
                prop_assert!(close_rel(*p, *q, 1e-9), "α={} {} vs {}", a, p, q);
            }
        }

        #[test]
        fn permutation_equivariance(raw in composition_strategy(), a in -2.0f64..2.0, seed in 0u64..1000) {
            prop_assume!(a.abs() > 1e-3);
            let x = Composition::close(raw).unwrap();
            let d = x.len();
            let perm: Vec<usize> = {
                let mut p: Vec<usize> = (0..d).collect();
                let s = seed as usize;
                p.rotate_left(s % d);
                if d > 2 { p.swap(0, s % (d - 1) + 1); }
                p
            };
            let px = Composition::new(perm.iter().map(|&j| x.as_slice()[j]).collect()).unwrap();
            let u = alpha_transform(&x, a).unwrap();
            let pu = alpha_transform(&px, a).unwrap();
            let w = clr(&x).w;
            let pw = clr(&px).w;
            let s = stable_inverse_log(&x, a).unwrap();
            let ps = stable_inverse_log(&px, a).unwrap();
            for (k, &j) in perm.iter().enumerate() {
                prop_assert!(close_rel(pu.as_slice()[k], u.as_slice()[j], 1e-12));
                prop_assert!((pw[k] - w[j]).abs() < 1e-12);
                prop_assert!((ps[k] - s[j]).abs() < 1e-9 * s[j].abs().max(1.0));
            }
        }

        #[test]
        fn metric_axioms(a in composition_strategy(), b in composition_strategy(), c in composition_strategy(), alpha in -2.0f64..2.0) {
            let d = a.len().min(b.len()).min(c.len());
            let x = Composition::close(a[..d].to_vec()).unwrap();
            let y = Composition::close(b[..d].to_vec()).unwrap();
            let z = Composition::close(c[..d].to_vec()).unwrap();
            let xy = alpha_metric(&x, &y, alpha).unwrap();
            let yx = alpha_metric(&y, &x, alpha).unwrap();
            let xz = alpha_metric(&x, &z, alpha).unwrap();
            let zy = alpha_metric(&z, &y, alpha).unwrap();
            prop_assert!(xy >= 0.0);
            prop_assert!((xy - yx).abs() <= 1e-12 * xy.max(1.0));
            prop_assert!(xy <= xz + zy + 1e-12 * (xz + zy).max(1.0));
            prop_assert_eq!(alpha_metric(&x, &x, alpha).unwrap(), 0.0);
        }

        #[test]
        fn jacobians_of_inverse_maps_cancel(raw in composition_strategy(), a in 0.05f64..3.0, neg in any::<bool>()) {
            let a = if neg { -a } else { a };
            let x = Composition::close(raw).unwrap();
            let u = alpha_transform(&x, a).unwrap();
            let total = log_jacobian(&x, a).unwrap() + log_jacobian(&u, 1.0 / a).unwrap();
            prop_assert!(total.abs() < 1e-9, "residual {}", total);
        }

        #[test]
        fn stable_log_reproduces_inverse(raw in composition_strategy(), a in 0.02f64..3.0, neg in any::<bool>()) {
            let a = if neg { -a } else { a };
            let u = Composition::close(raw).unwrap();
            if let Ok(x) = alpha_inverse(&u, a) {
                let y = stable_inverse_log(&u, a).unwrap();
                let z = Composition::from_logs(&y).unwrap();
                for (p, q) in z.as_slice().iter().zip(x.as_slice()) {
                    prop_assert!(close_rel(*p, *q, 1e-12));
                }
            }
        }
    }

    #[test]
    fn metric_is_first_order_continuous_at_zero() {
        let x = comp(&[0.1, 0.3, 0.6]);
        let y = comp(&[0.3, 0.45, 0.25]);
        let d0 = alpha_metric(&x, &y, 0.0).unwrap();
        let gap = |a: f64| (alpha_metric(&x, &y, a).unwrap() - d0).abs();
        for a in [1e-2, 5e-3] {
            let ratio = gap(a) / gap(a / 2.0);
            assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
        }
    }
}
