//! Competitor goodness-of-fit statistics: the classical EDF trio (KS, CM,
//! AD) against the fitted CDF, two Laplace-transform statistics (HK1, HK2),
//! and the variance-ratio statistic (VG). All are scale invariant because
//! they depend on the data only through Y_j = X_j / mu-hat, phi-hat, or
//! fitted-CDF values at the order statistics.

use crate::error::{Error, Result};
use crate::estimators::{estimate_ml, sum_compensated, EstimatorKind, Sample, ScaledSample};
use crate::ig::{ig_cdf, IGParams};
use crate::special::erfce;
use crate::stein::triangle_sum;
use std::f64::consts::PI;

/// Statistic selector for the bootstrap and power engines. `Stein` is the
/// exp(-a t) weight, `SteinSq` the exp(-a t^2) weight. The Laplace and
/// variance-ratio statistics are pinned to ML estimation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StatKind {
    Stein { estimator: EstimatorKind, a: f64 },
    SteinSq { estimator: EstimatorKind, a: f64 },
    Ks { estimator: EstimatorKind },
    Cm { estimator: EstimatorKind },
    Ad { estimator: EstimatorKind },
    Hk1 { a: f64 },
    Hk2,
    Vg,
}

impl StatKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StatKind::Stein { a, .. } | StatKind::SteinSq { a, .. } => {
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::Usage(format!(
                        "the characterization statistics need a finite tuning parameter a > 0, got {a}"
                    )));
                }
            }
            StatKind::Hk1 { a } => {
                if !(a.is_finite() && a >= 0.0) {
                    return Err(Error::Usage(format!(
                        "hk1 needs a finite tuning parameter a >= 0, got {a}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Which estimator the statistic consumes. HK1/HK2/VG admit only ML.
    pub fn estimator(&self) -> EstimatorKind {
        match *self {
            StatKind::Stein { estimator, .. }
            | StatKind::SteinSq { estimator, .. }
            | StatKind::Ks { estimator }
            | StatKind::Cm { estimator }
            | StatKind::Ad { estimator } => estimator,
            StatKind::Hk1 { .. } | StatKind::Hk2 | StatKind::Vg => EstimatorKind::Ml,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StatKind::Stein { .. } => "stein",
            StatKind::SteinSq { .. } => "stein-sq",
            StatKind::Ks { .. } => "ks",
            StatKind::Cm { .. } => "cm",
            StatKind::Ad { .. } => "ad",
            StatKind::Hk1 { .. } => "hk1",
            StatKind::Hk2 => "hk2",
            StatKind::Vg => "vg",
        }
    }

    pub fn tuning(&self) -> Option<f64> {
        match *self {
            StatKind::Stein { a, .. } | StatKind::SteinSq { a, .. } | StatKind::Hk1 { a } => {
                Some(a)
            }
            _ => None,
        }
    }
}

/// Fitted-CDF values at the order statistics, the shared input of the three
/// EDF statistics.
fn fitted_cdf_sorted(s: &Sample, p: IGParams) -> Vec<f64> {
    let mut x = s.values().to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    x.into_iter().map(|v| ig_cdf(v, p)).collect()
}

/// Kolmogorov-Smirnov distance max(D+, D-) between the empirical CDF and
/// the fitted IG CDF.
pub fn ks_stat(s: &Sample, p: IGParams) -> f64 {
    let f = fitted_cdf_sorted(s, p);
    let n = f.len() as f64;
    let mut d = 0.0_f64;
    for (j, &fj) in f.iter().enumerate() {
        d = d.max((j + 1) as f64 / n - fj).max(fj - j as f64 / n);
    }
    d
}

/// Cramer-von Mises statistic 1/(12n) + sum (F(X_(j)) - (2j-1)/(2n))^2.
pub fn cm_stat(s: &Sample, p: IGParams) -> f64 {
    let f = fitted_cdf_sorted(s, p);
    let n = f.len() as f64;
    let sum = sum_compensated(f.iter().enumerate().map(|(j, &fj)| {
        let d = fj - (2.0 * (j + 1) as f64 - 1.0) / (2.0 * n);
        d * d
    }));
    1.0 / (12.0 * n) + sum
}

// Fitted-CDF values this close to 0 or 1 are clamped before taking logs;
// reachable only for extreme outliers under misspecification.
const AD_F_FLOOR: f64 = 1e-300;
const AD_F_CEIL: f64 = 1.0 - 1e-16;

/// Anderson-Darling statistic in its computational form.
pub fn ad_stat(s: &Sample, p: IGParams) -> f64 {
    let f = fitted_cdf_sorted(s, p);
    let n = f.len();
    let nf = n as f64;
    let sum = sum_compensated(f.iter().enumerate().map(|(j, &fj)| {
        let fj = fj.clamp(AD_F_FLOOR, AD_F_CEIL);
        let weight_lo = 2.0 * (j + 1) as f64 - 1.0;
        let weight_hi = 2.0 * (n - (j + 1)) as f64 + 1.0;
        weight_lo * fj.ln() + weight_hi * (-fj).ln_1p()
    }));
    -nf - sum / nf
}

/// First Laplace-transform statistic: the weighted L2 norm of the empirical
/// residual of the ODE the IG Laplace transform satisfies,
/// n * int (L_n(t) + sqrt(1 + 2t/phi) L_n'(t))^2 exp(-a t) dt,
/// in the closed form over pairs with Z_jk = phi (Y_j + Y_k + a).
pub fn hk1_stat(z: &ScaledSample, a: f64) -> Result<f64> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::Domain(format!(
            "hk1 tuning parameter must be finite and nonnegative, got {a}"
        )));
    }
    let phi = z.phi_hat();
    let y = z.y();
    let n = y.len();
    let pair = |j: usize, k: usize| -> f64 {
        let sum_y = y[j] + y[k];
        let zjk = phi * (sum_y + a);
        let inv = 1.0 / zjk;
        inv * (1.0 - sum_y * (1.0 + (PI / (2.0 * zjk)).sqrt() * erfce((zjk / 2.0).sqrt()))
            + (1.0 + 2.0 * inv) * y[j] * y[k])
    };
    let total = triangle_sum(n, |j| {
        let mut acc = pair(j, j);
        for k in j + 1..n {
            acc += 2.0 * pair(j, k);
        }
        acc
    });
    Ok(phi * total / n as f64)
}

/// Second Laplace-transform statistic: n times the squared L2 distance
/// between the empirical Laplace transform of the scaled sample and the
/// fitted IG(1, phi-hat) transform, in closed form.
pub fn hk2_stat(z: &ScaledSample) -> f64 {
    let phi = z.phi_hat();
    let y = z.y();
    let n = y.len();
    let nf = n as f64;
    let pair_part = triangle_sum(n, |j| {
        let mut acc = 1.0 / (y[j] + y[j]);
        for k in j + 1..n {
            acc += 2.0 / (y[j] + y[k]);
        }
        acc
    }) / nf;
    let cross = sum_compensated(y.iter().map(|&yj| {
        (1.0 - (PI * phi / (2.0 * yj)).sqrt() * erfce(phi.sqrt() * (yj + 1.0) / (2.0 * yj).sqrt()))
            / yj
    }));
    pair_part - 2.0 * cross + nf * (1.0 + 2.0 * phi) / (4.0 * phi)
}

/// Variance-ratio statistic sqrt(n lambda / (6 mu)) (lambda S^2 / mu^3 - 1)
/// with the ML lambda-hat and the unbiased sample variance. Signed; the
/// test rejects for large absolute values.
pub fn vg_stat(s: &Sample) -> Result<f64> {
    let p = estimate_ml(s)?;
    let n = s.n() as f64;
    let mu = p.mu();
    let lambda = p.lambda();
    let s2 =
        sum_compensated(s.values().iter().map(|&x| (x - mu) * (x - mu))) / (n - 1.0);
    Ok((n * lambda / (6.0 * mu)).sqrt() * (lambda * s2 / (mu * mu * mu) - 1.0))
}
