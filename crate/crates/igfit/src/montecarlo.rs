//! Parametric-bootstrap inference and warp-speed power studies.
//!
//! Determinism contract: every replicate i derives its own ChaCha streams
//! from (seed, i), so results are independent of execution order and thread
//! count, and any subset of replicates can be reproduced in isolation.
//! Stream purposes: 0 = data, 1 = bootstrap for ML-based statistics,
//! 2 = bootstrap for MO-based statistics, 3 = reserved.

use crate::competing::{ad_stat, cm_stat, hk1_stat, hk2_stat, ks_stat, vg_stat, StatKind};
use crate::error::{Error, Result};
use crate::estimators::{estimate, scale_sample, EstimatorKind, Sample, ScaledSample};
use crate::ig::{ig_sample, IGParams};
use crate::stein::{statistic_t, statistic_t_tilde};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::atomic::{AtomicUsize, Ordering};

pub const PURPOSE_DATA: u64 = 0;
pub const PURPOSE_BOOT_ML: u64 = 1;
pub const PURPOSE_BOOT_MO: u64 = 2;

/// Independent substream for one (replicate, purpose) pair.
pub fn stream_rng(seed: u64, replicate: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate * 4 + purpose);
    rng
}

fn boot_purpose(kind: EstimatorKind) -> u64 {
    match kind {
        EstimatorKind::Ml => PURPOSE_BOOT_ML,
        EstimatorKind::Mo => PURPOSE_BOOT_MO,
    }
}

/// Evaluates one statistic on raw data, re-estimating parameters as the
/// statistic requires. VG is returned signed; see `decision_value`.
pub fn evaluate_statistic(s: &Sample, kind: &StatKind) -> Result<f64> {
    kind.validate()?;
    match *kind {
        StatKind::Stein { estimator, a } => statistic_t(&scale_sample(s, estimator)?, a),
        StatKind::SteinSq { estimator, a } => statistic_t_tilde(&scale_sample(s, estimator)?, a),
        StatKind::Ks { estimator } => Ok(ks_stat(s, estimate(s, estimator)?)),
        StatKind::Cm { estimator } => Ok(cm_stat(s, estimate(s, estimator)?)),
        StatKind::Ad { estimator } => Ok(ad_stat(s, estimate(s, estimator)?)),
        StatKind::Hk1 { a } => hk1_stat(&scale_sample(s, EstimatorKind::Ml)?, a),
        StatKind::Hk2 => Ok(hk2_stat(&scale_sample(s, EstimatorKind::Ml)?)),
        StatKind::Vg => vg_stat(s),
    }
}

/// Rejection is always for large values of this transform of the raw
/// statistic: the absolute value for the two-sided VG, identity otherwise.
pub fn decision_value(kind: &StatKind, raw: f64) -> f64 {
    match kind {
        StatKind::Vg => raw.abs(),
        _ => raw,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BootstrapConfig {
    b: usize,
    alpha: f64,
    seed: u64,
}

impl BootstrapConfig {
    pub fn new(b: usize, alpha: f64, seed: u64) -> Result<Self> {
        if b < 100 {
            return Err(Error::Usage(format!("bootstrap needs b >= 100 replicates, got {b}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Usage(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if (b as f64) * alpha < 1.0 {
            return Err(Error::Usage(format!(
                "b * alpha must be at least 1 for a valid quantile index, got {b} * {alpha}"
            )));
        }
        Ok(BootstrapConfig { b, alpha, seed })
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Result of one bootstrap test. `statistic` is the raw (signed, for VG)
/// value; `reject` compares the decision transform against the critical
/// value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// 1-based order-statistic index of the empirical (1 - alpha)-quantile used
/// by the bootstrap critical value: ceil(b (1 - alpha)).
pub(crate) fn bootstrap_crit_index(b: usize, alpha: f64) -> usize {
    (((b as f64) * (1.0 - alpha)).ceil() as usize).clamp(1, b)
}

/// 1-based index used by the warp-speed procedure: floor(mc (1 - alpha)),
/// no interpolation.
pub(crate) fn warp_crit_index(mc: usize, alpha: f64) -> usize {
    (((mc as f64) * (1.0 - alpha)).floor() as usize).clamp(1, mc)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Parametric bootstrap test: evaluates the statistic on `s`, then on `b`
/// IG(1, phi-hat) samples of size n (re-estimating on each), and compares
/// against the empirical (1 - alpha)-quantile. The p-value uses the add-one
/// convention (1 + #{T* >= T}) / (b + 1).
pub fn bootstrap_test(s: &Sample, kind: &StatKind, cfg: &BootstrapConfig) -> Result<TestOutcome> {
    kind.validate()?;
    let raw = evaluate_statistic(s, kind)?;
    let observed = decision_value(kind, raw);
    let est = estimate(s, kind.estimator())?;
    let null = IGParams::new(1.0, est.lambda() / est.mu())?;
    let n = s.n();
    let cap = 10 * cfg.b;
    let redraws = AtomicUsize::new(0);

    let stars: Vec<Result<f64>> = (0..cfg.b as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, k, PURPOSE_BOOT_ML);
            loop {
                let resample = ig_sample(null, n, &mut rng);
                match evaluate_statistic(&resample, kind) {
                    Ok(v) => return Ok(decision_value(kind, v)),
                    Err(Error::DegenerateSample(_)) => {
                        if redraws.fetch_add(1, Ordering::Relaxed) + 1 > cap {
                            return Err(Error::RedrawCap(cap));
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
        })
        .collect();
    let stars: Vec<f64> = stars.into_iter().collect::<Result<_>>()?;

    let exceed = stars.iter().filter(|&&v| v >= observed).count();
    let sorted_stars = sorted(stars);
    let critical_value = sorted_stars[bootstrap_crit_index(cfg.b, cfg.alpha) - 1];
    Ok(TestOutcome {
        statistic: raw,
        critical_value,
        p_value: (1.0 + exceed as f64) / (cfg.b as f64 + 1.0),
        reject: observed > critical_value,
        b: cfg.b,
        alpha: cfg.alpha,
        seed: cfg.seed,
    })
}

/// Alternative sampling families for the power study.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AltFamily {
    Weibull,
    Lognormal,
    Gamma,
    ChiSq,
    Dhillon,
    Ig,
}

impl AltFamily {
    pub fn label(&self) -> &'static str {
        match self {
            AltFamily::Weibull => "weibull",
            AltFamily::Lognormal => "lognormal",
            AltFamily::Gamma => "gamma",
            AltFamily::ChiSq => "chisq",
            AltFamily::Dhillon => "dhillon",
            AltFamily::Ig => "ig",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AltSpec {
    family: AltFamily,
    theta: f64,
}

impl AltSpec {
    pub fn new(family: AltFamily, theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::Usage(format!(
                "alternative shape parameter must be finite and positive, got {theta}"
            )));
        }
        Ok(AltSpec { family, theta })
    }

    pub fn family(&self) -> AltFamily {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

fn draw_positive<R: Rng + ?Sized>(rng: &mut R, mut draw: impl FnMut(&mut R) -> f64) -> f64 {
    loop {
        let x = draw(rng);
        if x.is_finite() && x > 0.0 {
            return x;
        }
    }
}

/// Draws n observations from the requested alternative at unit scale:
/// Weibull(shape theta), lognormal(log-variance theta), Gamma(shape theta),
/// chi-square(theta), Dhillon(shape theta) by CDF inversion, or IG(1, theta).
pub fn sample_alternative<R: Rng + ?Sized>(alt: &AltSpec, n: usize, rng: &mut R) -> Result<Sample> {
    let theta = alt.theta;
    let values = match alt.family {
        AltFamily::Weibull => {
            let d = rand_distr::Weibull::new(1.0, theta)
                .map_err(|e| Error::Domain(e.to_string()))?;
            (0..n).map(|_| draw_positive(rng, |r| r.sample(d))).collect()
        }
        AltFamily::Lognormal => {
            // theta parameterizes the log-variance, so the log-sd is its
            // square root.
            let d = rand_distr::LogNormal::new(0.0, theta.sqrt())
                .map_err(|e| Error::Domain(e.to_string()))?;
            (0..n).map(|_| draw_positive(rng, |r| r.sample(d))).collect()
        }
        AltFamily::Gamma => {
            let d = rand_distr::Gamma::new(theta, 1.0)
                .map_err(|e| Error::Domain(e.to_string()))?;
            (0..n).map(|_| draw_positive(rng, |r| r.sample(d))).collect()
        }
        AltFamily::ChiSq => {
            let d = rand_distr::ChiSquared::new(theta)
                .map_err(|e| Error::Domain(e.to_string()))?;
            (0..n).map(|_| draw_positive(rng, |r| r.sample(d))).collect()
        }
        AltFamily::Dhillon => (0..n)
            .map(|_| {
                draw_positive(rng, |r| {
                    let u: f64 = r.gen();
                    ((-(1.0 - u).ln()).powf(1.0 / (theta + 1.0))).exp() - 1.0
                })
            })
            .collect(),
        AltFamily::Ig => {
            let p = IGParams::new(1.0, theta)?;
            return Ok(ig_sample(p, n, rng));
        }
    };
    Ok(Sample::from_positive(values))
}

#[derive(Clone, Debug)]
pub struct PowerStudyConfig {
    pub alt: AltSpec,
    pub n: usize,
    pub mc: usize,
    pub alpha: f64,
    pub seed: u64,
    pub stats: Vec<StatKind>,
}

impl PowerStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Usage(format!("sample size must be at least 2, got {}", self.n)));
        }
        if self.mc == 0 {
            return Err(Error::Usage("the replicate count mc must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Usage(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if (self.mc as f64) * (1.0 - self.alpha) < 1.0 {
            return Err(Error::Usage(
                "mc * (1 - alpha) must be at least 1 for a valid quantile index".into(),
            ));
        }
        if self.stats.is_empty() {
            return Err(Error::Usage("at least one statistic is required".into()));
        }
        for k in &self.stats {
            k.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct StatPower {
    pub kind: StatKind,
    pub rejections: usize,
    pub power_pct: f64,
    /// Standard error of the rejection percentage (percent units).
    pub mc_se: f64,
}

#[derive(Clone, Debug)]
pub struct PowerResult {
    pub alt: AltSpec,
    pub n: usize,
    pub mc: usize,
    pub alpha: f64,
    pub seed: u64,
    pub per_stat: Vec<StatPower>,
}

struct ReplicateOut {
    vals: Vec<f64>,
    stars: Vec<f64>,
}

/// Warp-speed power study: per replicate, draw data from the alternative
/// and ONE parametric bootstrap sample per estimator kind; after all
/// replicates, reject replicate i for a statistic when its data value
/// exceeds the floor(mc (1 - alpha))-th order statistic of that statistic's
/// bootstrap values. All statistics share the data and, per estimator kind,
/// the bootstrap sample of each replicate.
pub fn warp_speed_power(cfg: &PowerStudyConfig) -> Result<PowerResult> {
    cfg.validate()?;
    let mut estimators: Vec<EstimatorKind> = Vec::new();
    for k in &cfg.stats {
        if !estimators.contains(&k.estimator()) {
            estimators.push(k.estimator());
        }
    }
    let cap = 10 * cfg.mc;
    let redraws = AtomicUsize::new(0);

    let outcomes: Vec<Result<ReplicateOut>> = (0..cfg.mc as u64)
        .into_par_iter()
        .map(|i| replicate(cfg, &estimators, i, &redraws, cap))
        .collect();
    let outcomes: Vec<ReplicateOut> = outcomes.into_iter().collect::<Result<_>>()?;

    let crit_idx = warp_crit_index(cfg.mc, cfg.alpha) - 1;
    let mcf = cfg.mc as f64;
    let per_stat = cfg
        .stats
        .iter()
        .enumerate()
        .map(|(s_idx, kind)| {
            let stars = sorted(outcomes.iter().map(|o| o.stars[s_idx]).collect());
            let crit = stars[crit_idx];
            let rejections = outcomes.iter().filter(|o| o.vals[s_idx] > crit).count();
            let p = rejections as f64 / mcf;
            StatPower {
                kind: *kind,
                rejections,
                power_pct: 100.0 * p,
                mc_se: 100.0 * (p * (1.0 - p) / mcf).sqrt(),
            }
        })
        .collect();

    Ok(PowerResult {
        alt: cfg.alt,
        n: cfg.n,
        mc: cfg.mc,
        alpha: cfg.alpha,
        seed: cfg.seed,
        per_stat,
    })
}

fn replicate(
    cfg: &PowerStudyConfig,
    estimators: &[EstimatorKind],
    i: u64,
    redraws: &AtomicUsize,
    cap: usize,
) -> Result<ReplicateOut> {
    let mut data_rng = stream_rng(cfg.seed, i, PURPOSE_DATA);
    'data: loop {
        let data = sample_alternative(&cfg.alt, cfg.n, &mut data_rng)?;
        // Fail the whole draw if any needed estimator degenerates, so every
        // statistic sees the same data.
        let mut scaled: Vec<(EstimatorKind, ScaledSample)> = Vec::new();
        for &est in estimators {
            match scale_sample(&data, est) {
                Ok(z) => scaled.push((est, z)),
                Err(Error::DegenerateSample(_)) => {
                    if redraws.fetch_add(1, Ordering::Relaxed) + 1 > cap {
                        return Err(Error::RedrawCap(cap));
                    }
                    continue 'data;
                }
                Err(e) => return Err(e),
            }
        }

        let mut vals = Vec::with_capacity(cfg.stats.len());
        for kind in &cfg.stats {
            vals.push(decision_value(kind, evaluate_statistic(&data, kind)?));
        }

        let mut stars = vec![0.0_f64; cfg.stats.len()];
        for &(est, ref z) in &scaled {
            let null = IGParams::new(1.0, z.phi_hat())?;
            let mut boot_rng = stream_rng(cfg.seed, i, boot_purpose(est));
            'boot: loop {
                let resample = ig_sample(null, cfg.n, &mut boot_rng);
                let mut group = Vec::with_capacity(cfg.stats.len());
                for (s_idx, kind) in cfg.stats.iter().enumerate() {
                    if kind.estimator() != est {
                        continue;
                    }
                    match evaluate_statistic(&resample, kind) {
                        Ok(v) => group.push((s_idx, decision_value(kind, v))),
                        Err(Error::DegenerateSample(_)) => {
                            if redraws.fetch_add(1, Ordering::Relaxed) + 1 > cap {
                                return Err(Error::RedrawCap(cap));
                            }
                            continue 'boot;
                        }
                        Err(e) => return Err(e),
                    }
                }
                for (s_idx, v) in group {
                    stars[s_idx] = v;
                }
                break;
            }
        }
        return Ok(ReplicateOut { vals, stars });
    }
}
