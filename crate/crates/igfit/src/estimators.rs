//! Parameter estimation and sample scaling.
//!
//! Both estimators share the sample mean for mu; they differ only in the
//! dispersion functional that produces lambda. Dividing the data by mu-hat
//! and carrying phi-hat = lambda-hat / mu-hat is what makes every statistic
//! downstream scale invariant.

use crate::error::{Error, Result};
use crate::ig::IGParams;

/// Raw positive observations. Construction validates positivity and
/// finiteness; emptiness is allowed (samplers may produce zero draws) but
/// estimation requires at least two observations.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "observation {i} is {v}; all observations must be finite and positive"
                )));
            }
        }
        Ok(Sample { values })
    }

    /// Bypasses validation for values a sampler already guarantees positive.
    pub(crate) fn from_positive(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite() && *v > 0.0));
        Sample { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        sum_compensated(self.values.iter().copied()) / self.values.len() as f64
    }
}

/// Which dispersion functional produced lambda-hat.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Ml,
    Mo,
}

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Ml => "ml",
            EstimatorKind::Mo => "mo",
        }
    }
}

/// Observations divided by mu-hat, together with the shape ratio estimate.
/// Every statistic consumes this form, which is why they are all invariant
/// under rescaling of the raw data.
#[derive(Clone, Debug)]
pub struct ScaledSample {
    y: Vec<f64>,
    phi_hat: f64,
    source_estimates: IGParams,
}

impl ScaledSample {
    /// Builds a scaled sample directly from already-scaled values and a
    /// shape ratio, bypassing estimation. The implied source fit is
    /// IG(1, phi_hat), which is what scaling any sample produces.
    pub fn from_parts(y: Vec<f64>, phi_hat: f64) -> Result<Self> {
        for (i, &v) in y.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "scaled observation {i} is {v}; all must be finite and positive"
                )));
            }
        }
        if !(phi_hat.is_finite() && phi_hat > 0.0) {
            return Err(Error::Domain(format!(
                "shape ratio must be finite and positive, got {phi_hat}"
            )));
        }
        let source_estimates = IGParams::new(1.0, phi_hat)?;
        Ok(ScaledSample { y, phi_hat, source_estimates })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn phi_hat(&self) -> f64 {
        self.phi_hat
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn source_estimates(&self) -> IGParams {
        self.source_estimates
    }
}

/// Neumaier-compensated summation: error-free to first order regardless of
/// the magnitude ordering of the terms.
pub fn sum_compensated<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut sum = 0.0_f64;
    let mut compensation = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

fn require_estimable(s: &Sample) -> Result<f64> {
    if s.n() < 2 {
        return Err(Error::DegenerateSample("estimation needs at least two observations"));
    }
    Ok(s.mean())
}

/// Maximum likelihood fit: mu-hat is the sample mean and
/// lambda-hat = ( (1/n) sum (1/x_j - 1/mean) )^-1. The harmonic-mean
/// identity makes the denominator zero exactly when the sample is constant.
pub fn estimate_ml(s: &Sample) -> Result<IGParams> {
    let mu = require_estimable(s)?;
    let n = s.n() as f64;
    let denom = sum_compensated(s.values().iter().map(|&x| 1.0 / x - 1.0 / mu)) / n;
    let lambda = 1.0 / denom;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::DegenerateSample("reciprocal spread is zero; sample is constant"));
    }
    IGParams::new(mu, lambda)
}

/// Bias-corrected variant (n - 1)/n times the ML lambda-hat. Not used by
/// any test in this crate; provided for callers that want unbiasedness.
pub fn estimate_ml_umvu(s: &Sample) -> Result<IGParams> {
    let p = estimate_ml(s)?;
    let n = s.n() as f64;
    IGParams::new(p.mu(), (n - 1.0) / n * p.lambda())
}

/// Moment fit: mu-hat is the sample mean and
/// lambda-hat = mean^3 / ((1/n) sum x_j^2 - mean^2). The denominator is the
/// uncorrected sample variance, computed in centered two-pass form.
pub fn estimate_mo(s: &Sample) -> Result<IGParams> {
    let mu = require_estimable(s)?;
    let n = s.n() as f64;
    let m2 = sum_compensated(s.values().iter().map(|&x| (x - mu) * (x - mu))) / n;
    if !(m2.is_finite() && m2 > 0.0) {
        return Err(Error::DegenerateSample("sample variance is zero; sample is constant"));
    }
    IGParams::new(mu, mu * mu * mu / m2)
}

pub fn estimate(s: &Sample, kind: EstimatorKind) -> Result<IGParams> {
    match kind {
        EstimatorKind::Ml => estimate_ml(s),
        EstimatorKind::Mo => estimate_mo(s),
    }
}

/// Divides the sample by mu-hat and records phi-hat = lambda-hat / mu-hat.
pub fn scale_sample(s: &Sample, kind: EstimatorKind) -> Result<ScaledSample> {
    let p = estimate(s, kind)?;
    let y = s.values().iter().map(|&x| x / p.mu()).collect();
    Ok(ScaledSample { y, phi_hat: p.lambda() / p.mu(), source_estimates: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ig::ig_sample;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(values: &[f64]) -> Sample {
        Sample::new(values.to_vec()).unwrap()
    }

    #[test]
    fn sample_rejects_nonpositive_and_nonfinite_values() {
        assert!(Sample::new(vec![1.0, 0.0]).is_err());
        assert!(Sample::new(vec![1.0, -2.0]).is_err());
        assert!(Sample::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(Sample::new(vec![f64::NAN]).is_err());
        assert_eq!(Sample::new(vec![]).unwrap().n(), 0);
    }

    #[test]
    fn ml_closed_form_on_a_two_point_sample() {
        let p = estimate_ml(&s(&[1.0, 2.0])).unwrap();
        assert_relative_eq!(p.mu(), 1.5, max_relative = 1e-15);
        assert_relative_eq!(p.lambda(), 12.0, max_relative = 1e-14);
    }

    #[test]
    fn mo_closed_form_on_a_two_point_sample() {
        let p = estimate_mo(&s(&[1.0, 2.0])).unwrap();
        assert_relative_eq!(p.mu(), 1.5, max_relative = 1e-15);
        assert_relative_eq!(p.lambda(), 13.5, max_relative = 1e-14);
    }

    #[test]
    fn constant_samples_are_degenerate_for_both_estimators() {
        let c = s(&[3.0, 3.0, 3.0]);
        assert!(matches!(estimate_ml(&c), Err(Error::DegenerateSample(_))));
        assert!(matches!(estimate_mo(&c), Err(Error::DegenerateSample(_))));
        assert!(estimate_ml(&s(&[5.0])).is_err());
    }

    #[test]
    fn umvu_applies_the_bias_factor() {
        let raw = s(&[1.0, 2.0, 4.0, 8.0]);
        let ml = estimate_ml(&raw).unwrap();
        let u = estimate_ml_umvu(&raw).unwrap();
        assert_eq!(u.mu(), ml.mu());
        assert_relative_eq!(u.lambda(), 0.75 * ml.lambda(), max_relative = 1e-15);
    }

    #[test]
    fn estimates_are_scale_equivariant() {
        let base = s(&[0.5, 1.0, 2.5, 4.0, 9.0]);
        let beta = 7.0;
        let scaled = s(&base.values().iter().map(|x| beta * x).collect::<Vec<_>>());
        for kind in [EstimatorKind::Ml, EstimatorKind::Mo] {
            let a = estimate(&base, kind).unwrap();
            let b = estimate(&scaled, kind).unwrap();
            assert_relative_eq!(b.mu(), beta * a.mu(), max_relative = 1e-14);
            assert_relative_eq!(b.lambda(), beta * a.lambda(), max_relative = 1e-14);
        }
    }

    #[test]
    fn equivariance_holds_at_large_n_with_compensated_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = ig_sample(crate::ig::IGParams::new(1.0, 2.0).unwrap(), 100_000, &mut rng);
        let beta = 0.013;
        let scaled = Sample::new(base.values().iter().map(|x| beta * x).collect()).unwrap();
        for kind in [EstimatorKind::Ml, EstimatorKind::Mo] {
            let a = estimate(&base, kind).unwrap();
            let b = estimate(&scaled, kind).unwrap();
            assert_relative_eq!(b.mu(), beta * a.mu(), max_relative = 1e-12);
            assert_relative_eq!(b.lambda(), beta * a.lambda(), max_relative = 1e-12);
        }
    }

    #[test]
    fn estimators_are_consistent_under_the_null() {
        for &phi in &[0.5, 5.0] {
            let params = crate::ig::IGParams::new(1.0, phi).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(19);
            let sample = ig_sample(params, 100_000, &mut rng);
            for kind in [EstimatorKind::Ml, EstimatorKind::Mo] {
                let z = scale_sample(&sample, kind).unwrap();
                assert!(
                    (z.phi_hat() - phi).abs() / phi < 0.05,
                    "{} phi-hat {} vs {phi}",
                    kind.label(),
                    z.phi_hat()
                );
            }
        }
    }

    #[test]
    fn scaling_divides_by_the_mean_and_reports_the_shape_ratio() {
        let raw = s(&[1.0, 2.0]);
        let ml = scale_sample(&raw, EstimatorKind::Ml).unwrap();
        assert_relative_eq!(ml.y()[0], 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(ml.y()[1], 4.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(ml.phi_hat(), 8.0, max_relative = 1e-14);
        let mo = scale_sample(&raw, EstimatorKind::Mo).unwrap();
        assert_relative_eq!(mo.phi_hat(), 9.0, max_relative = 1e-14);
        let mean_y = sum_compensated(mo.y().iter().copied()) / mo.n() as f64;
        assert_relative_eq!(mean_y, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn compensated_sum_beats_naive_on_adversarial_input() {
        // 1 + 2^-60 added 2^20 times: naive accumulation loses the tail.
        let tiny = (2.0_f64).powi(-60);
        let terms: Vec<f64> = std::iter::once(1.0).chain(std::iter::repeat(tiny).take(1 << 20)).collect();
        let exact = 1.0 + tiny * (1 << 20) as f64;
        assert_eq!(sum_compensated(terms.iter().copied()), exact);
    }
}
