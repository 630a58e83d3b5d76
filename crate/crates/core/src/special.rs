//! Log-gamma, digamma and trigamma for positive real arguments.
//!
//! Large arguments use the Stirling-type asymptotic series; small ones are
//! shifted into that regime by the recurrences `Γ(x+1) = xΓ(x)`,
//! `ψ(x+1) = ψ(x) + 1/x`, `ψ'(x+1) = ψ'(x) − 1/x²`. Around the zeros of
//! `log Γ` at 1 and 2 a Taylor series in `ζ(k) − 1` keeps the error relative.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this the recurrences shift the argument up.
const ASYMPTOTIC_FROM: f64 = 10.0;

/// `ζ(k) − 1` for `k = 2..=31`.
const ZETA_MINUS_ONE: [f64; 30] = [
    0.644_934_066_848_226_4,
    0.202_056_903_159_594_3,
    0.082_323_233_711_138_19,
    0.036_927_755_143_369_93,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_827,
    0.004_077_356_197_944_339,
    0.002_008_392_826_082_214,
    0.000_994_575_127_818_085_3,
    0.000_494_188_604_119_464_6,
    0.000_246_086_553_308_048_3,
    0.000_122_713_347_578_489_1,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_762e-6,
    3.817_293_264_999_840e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_961e-7,
    4.769_329_867_878_065e-7,
    2.384_505_027_277_330e-7,
    1.192_199_259_653_111e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504e-8,
    7.450_711_789_835_429e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
    4.656_629_065_033_784e-10,
];

/// `log Γ(1 + z)` for `|z| ≤ 0.5`.
fn ln_gamma_1p(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zk = -z;
    for (i, c) in ZETA_MINUS_ONE.iter().enumerate() {
        zk *= -z;
        let k = (i + 2) as f64;
        sum += c * zk / k;
    }
    // Σ (−1)^k (ζ(k)−1) z^k / k, with the signs folded into zk.
    -z.ln_1p() + z * (1.0 - EULER_GAMMA) + sum
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        * (1.0 / 12.0
            + r2 * (-1.0 / 360.0
                + r2 * (1.0 / 1260.0
                    + r2 * (-1.0 / 1680.0
                        + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0 + r2 / 156.0))))));
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// `log Γ(x)` without argument checks; NaN for `x ≤ 0`.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        return ln_gamma_1p(x) - x.ln();
    }
    if x <= 1.5 {
        return ln_gamma_1p(x - 1.0);
    }
    if x <= 2.5 {
        return (x - 2.0).ln_1p() + ln_gamma_1p(x - 2.0);
    }
    if x < ASYMPTOTIC_FROM {
        // Recur down into [1.5, 2.5]: all added logs are positive.
        let mut prod = 1.0;
        let mut t = x;
        while t > 2.5 {
            t -= 1.0;
            prod *= t;
        }
        return prod.ln() + (t - 2.0).ln_1p() + ln_gamma_1p(t - 2.0);
    }
    ln_gamma_stirling(x)
}

/// `ψ(x)` without argument checks.
pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let mut shift = 0.0;
    let mut t = x;
    while t < ASYMPTOTIC_FROM {
        shift += 1.0 / t;
        t += 1.0;
    }
    let r = 1.0 / t;
    let r2 = r * r;
    let series = r2
        * (1.0 / 12.0
            + r2 * (-1.0 / 120.0
                + r2 * (1.0 / 252.0
                    + r2 * (-1.0 / 240.0
                        + r2 * (1.0 / 132.0 + r2 * (-691.0 / 32_760.0 + r2 / 12.0))))));
    t.ln() - 0.5 * r - series - shift
}

/// `ψ'(x)` without argument checks.
pub(crate) fn trigamma_unchecked(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let mut shift = 0.0;
    let mut t = x;
    while t < ASYMPTOTIC_FROM {
        shift += 1.0 / (t * t);
        t += 1.0;
    }
    let r = 1.0 / t;
    let r2 = r * r;
    let series = r
        + r2 * 0.5
        + r * r2
            * (1.0 / 6.0
                + r2 * (-1.0 / 30.0
                    + r2 * (1.0 / 42.0
                        + r2 * (-1.0 / 30.0
                            + r2 * (5.0 / 66.0 + r2 * (-691.0 / 2730.0 + r2 * 7.0 / 6.0))))));
    series + shift
}

fn check(x: f64, name: &str) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "{name} is implemented for x > 0, got {x}"
        )));
    }
    Ok(())
}

/// Natural log of the gamma function.
pub fn log_gamma(x: f64) -> Result<f64> {
    check(x, "log_gamma")?;
    Ok(ln_gamma(x))
}

/// Digamma `ψ = (log Γ)'`.
pub fn digamma(x: f64) -> Result<f64> {
    check(x, "digamma")?;
    Ok(digamma_unchecked(x))
}

/// Trigamma `ψ'`.
pub fn trigamma(x: f64) -> Result<f64> {
    check(x, "trigamma")?;
    Ok(trigamma_unchecked(x))
}
