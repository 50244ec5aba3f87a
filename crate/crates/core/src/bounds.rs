//! Concentration bounds for the criterion means of a finite codec family.
//!
//! Every bound produces a half-width `ε_c` per criterion such that, with
//! probability at least `1 - δ`, all true means lie within `ε_c` of their
//! sample means simultaneously:
//!
//! | method | half-width |
//! |---|---|
//! | finite-sample EMD | `2 d + 3 √(ln(2 k / δ) / 2m)` |
//! | asymptotic EMD | `√2 d + σ (2 + 2√2) √(ln(t k / δ) / 2m)` |
//! | Hoeffding union | `√(ln(2 |H| k / δ) / 2m)` |
//! | Gaussian-Chernoff union | `2 σ̂ √(ln(2 |H| k / δ) / 2m)` |
//!
//! where `d` is the EMD of the criterion class, `k` is the number of criteria,
//! `t` is 2 or 3 for one- or two-tailed intervals, `σ²` is twice the largest
//! empirical variance and `σ̂` is the largest empirical standard deviation.
//! Finite-sample methods need values in `[0, 1]`; the asymptotic ones only
//! need finite variance and hold as `m` grows.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use libm::{log, sqrt};

use crate::error::{check_count, check_delta, Error, Result};
use crate::interval::Interval;
use crate::matrix::CriterionMatrix;
use crate::rectangle::ConfidenceRectangle;

const SQRT_2: f64 = core::f64::consts::SQRT_2;
/// `2 + 2√2`, the variance multiplier of the asymptotic EMD bound.
pub const ASYMPTOTIC_VARIANCE_FACTOR: f64 = 2.0 + 2.0 * SQRT_2;

/// How confidence intervals are constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundMethod {
    /// Symmetrisation plus McDiarmid: `2d + 3√(ln(2k/δ)/2m)`. Needs `[0,1]` values.
    FiniteSampleEmd,
    /// Variance-sensitive asymptotic EMD bound, two-tailed.
    AsymptoticEmd,
    /// Hoeffding per codec and criterion, union over all of them. Needs `[0,1]` values.
    HoeffdingUnion,
    /// Gaussian tail per codec and criterion, union over all of them.
    GaussianChernoffUnion,
}

impl BoundMethod {
    /// All methods, tightest-to-loosest in typical low-variance settings.
    pub const ALL: [BoundMethod; 4] = [
        BoundMethod::GaussianChernoffUnion,
        BoundMethod::AsymptoticEmd,
        BoundMethod::HoeffdingUnion,
        BoundMethod::FiniteSampleEmd,
    ];

    /// Whether the method is only valid for values in `[0, 1]`.
    pub fn requires_bounded(self) -> bool {
        matches!(self, BoundMethod::FiniteSampleEmd | BoundMethod::HoeffdingUnion)
    }

    /// Short command-line name.
    pub fn cli_name(self) -> &'static str {
        match self {
            BoundMethod::FiniteSampleEmd => "finite-emd",
            BoundMethod::AsymptoticEmd => "asymptotic-emd",
            BoundMethod::HoeffdingUnion => "hoeffding",
            BoundMethod::GaussianChernoffUnion => "gaussian-chernoff",
        }
    }

    /// Snake-case tag used in reports.
    pub fn tag(self) -> &'static str {
        match self {
            BoundMethod::FiniteSampleEmd => "finite_sample_emd",
            BoundMethod::AsymptoticEmd => "asymptotic_emd",
            BoundMethod::HoeffdingUnion => "hoeffding_union",
            BoundMethod::GaussianChernoffUnion => "gaussian_chernoff_union",
        }
    }
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for BoundMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundMethod::ALL
            .into_iter()
            .find(|m| m.cli_name() == s || m.tag() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown bound method `{s}` (expected finite-emd, asymptotic-emd, hoeffding or gaussian-chernoff)"
                ))
            })
    }
}

/// Number of tails of an asymptotic interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tails {
    /// Upper deviation only; uses `ln(2/δ)`.
    One,
    /// Absolute deviation; uses `ln(3/δ)`.
    Two,
}

/// Plugin variance bound for one criterion class.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceEstimate {
    /// `2 · max_h Var̂[h]`.
    pub sigma_sq: f64,
    /// Bessel-corrected sample variance per codec, in codec order.
    pub per_codec: Vec<f64>,
}

impl VarianceEstimate {
    /// Builds the estimate from per-codec variances.
    pub fn from_per_codec(per_codec: Vec<f64>) -> Self {
        let max = per_codec.iter().copied().fold(0.0, f64::max);
        VarianceEstimate {
            sigma_sq: 2.0 * max,
            per_codec,
        }
    }

    /// Largest per-codec standard deviation, the `σ̂` of the Gaussian-Chernoff bound.
    pub fn max_std(&self) -> f64 {
        sqrt(self.sigma_sq / 2.0)
    }
}

fn check_samples(m: usize, needed: usize) -> Result<()> {
    if m < needed {
        Err(Error::InsufficientSamples { needed, got: m })
    } else {
        Ok(())
    }
}

/// Signed alternating mean `(1/m') Σ_{j=1}^{m'} (-1)^j v_j`, with `m'` the
/// largest even count not exceeding the series length (an odd trailing sample
/// is dropped).
pub(crate) fn alternating_mean(series: &[f64]) -> f64 {
    let even = series.len() & !1;
    let sum: f64 = series[..even]
        .chunks_exact(2)
        .map(|pair| pair[1] - pair[0])
        .sum();
    sum / even as f64
}

pub(crate) fn emd_raw_over(
    matrix: &CriterionMatrix,
    criterion: usize,
    codecs: &[usize],
    samples: Range<usize>,
) -> f64 {
    codecs
        .iter()
        .map(|&h| alternating_mean(&matrix.series(h, criterion)[samples.clone()]))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Unclamped EMD over all codecs of `criterion`; may be negative.
pub fn emd_raw(matrix: &CriterionMatrix, criterion: usize) -> Result<f64> {
    check_samples(matrix.n_samples(), 2)?;
    let all: Vec<usize> = (0..matrix.n_codecs()).collect();
    Ok(emd_raw_over(matrix, criterion, &all, 0..matrix.n_samples()))
}

/// Empirical maximum discrepancy of the class `criterion ∘ H`, clamped at 0.
pub fn emd(matrix: &CriterionMatrix, criterion: usize) -> Result<f64> {
    emd_raw(matrix, criterion).map(|d| d.max(0.0))
}

fn check_common(m: usize, delta: f64) -> Result<()> {
    check_count("m", m)?;
    check_delta(delta)
}

fn check_emd(d: f64) -> Result<()> {
    if d.is_finite() && d >= 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "d",
            value: d,
            expected: "a finite nonnegative EMD",
        })
    }
}

/// `√(ln(multiplicity/δ) / 2m)`.
fn tail_term(multiplicity: f64, m: usize, delta: f64) -> f64 {
    sqrt(log(multiplicity / delta) / (2.0 * m as f64))
}

/// Finite-sample EMD half-width `2d + 3√(ln(2·n_criteria/δ) / 2m)`.
pub fn epsilon_finite_emd(d: f64, m: usize, n_criteria: usize, delta: f64) -> Result<f64> {
    check_common(m, delta)?;
    check_count("n_criteria", n_criteria)?;
    check_emd(d)?;
    Ok(2.0 * d + 3.0 * tail_term(2.0 * n_criteria as f64, m, delta))
}

/// Hoeffding union half-width `√(ln(2·n_codecs·n_criteria/δ) / 2m)`.
pub fn epsilon_hoeffding(m: usize, n_codecs: usize, n_criteria: usize, delta: f64) -> Result<f64> {
    check_common(m, delta)?;
    check_count("n_codecs", n_codecs)?;
    check_count("n_criteria", n_criteria)?;
    Ok(tail_term(2.0 * n_codecs as f64 * n_criteria as f64, m, delta))
}

/// Gaussian-Chernoff union half-width `2σ̂ · epsilon_hoeffding(..)`, where
/// `sigma_hat` is the largest empirical standard deviation in the class.
pub fn epsilon_gaussian_chernoff(
    sigma_hat: f64,
    m: usize,
    n_codecs: usize,
    n_criteria: usize,
    delta: f64,
) -> Result<f64> {
    if !(sigma_hat.is_finite() && sigma_hat >= 0.0) {
        return Err(Error::Parameter {
            name: "sigma_hat",
            value: sigma_hat,
            expected: "a finite nonnegative standard deviation",
        });
    }
    Ok(2.0 * sigma_hat * epsilon_hoeffding(m, n_codecs, n_criteria, delta)?)
}

/// Asymptotic EMD half-width `√2 d + σ (2+2√2) √(ln(t·n_criteria/δ) / 2m)`
/// with `σ = √sigma_sq` and `t = 2` (one tail) or `3` (two tails).
pub fn epsilon_asymptotic_emd(
    d: f64,
    sigma_sq: f64,
    m: usize,
    n_criteria: usize,
    delta: f64,
    tails: Tails,
) -> Result<f64> {
    check_samples(m, 2)?;
    check_delta(delta)?;
    check_count("n_criteria", n_criteria)?;
    check_emd(d)?;
    if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
        return Err(Error::Parameter {
            name: "sigma_sq",
            value: sigma_sq,
            expected: "a finite nonnegative variance bound",
        });
    }
    let t = match tails {
        Tails::One => 2.0,
        Tails::Two => 3.0,
    };
    Ok(SQRT_2 * d
        + sqrt(sigma_sq) * ASYMPTOTIC_VARIANCE_FACTOR * tail_term(t * n_criteria as f64, m, delta))
}

/// Mean of `v - series[0]`, so constant series are reproduced exactly.
fn shifted_mean(series: &[f64]) -> f64 {
    let pivot = series[0];
    series.iter().map(|v| v - pivot).sum::<f64>() / series.len() as f64
}

pub(crate) fn mean(series: &[f64]) -> f64 {
    series[0] + shifted_mean(series)
}

/// Bessel-corrected sample variance, two passes over pivot-shifted values.
pub(crate) fn sample_variance(series: &[f64]) -> f64 {
    let pivot = series[0];
    let mu = shifted_mean(series);
    let ss: f64 = series
        .iter()
        .map(|v| {
            let d = v - pivot - mu;
            d * d
        })
        .sum();
    ss / (series.len() - 1) as f64
}

pub(crate) fn variance_over(
    matrix: &CriterionMatrix,
    criterion: usize,
    codecs: &[usize],
    samples: Range<usize>,
) -> VarianceEstimate {
    VarianceEstimate::from_per_codec(
        codecs
            .iter()
            .map(|&h| sample_variance(&matrix.series(h, criterion)[samples.clone()]))
            .collect(),
    )
}

/// Per-codec sample variances of `criterion` and the plugin bound `σ² = 2 max`.
pub fn empirical_variance_estimate(
    matrix: &CriterionMatrix,
    criterion: usize,
) -> Result<VarianceEstimate> {
    check_samples(matrix.n_samples(), 2)?;
    let all: Vec<usize> = (0..matrix.n_codecs()).collect();
    Ok(variance_over(matrix, criterion, &all, 0..matrix.n_samples()))
}

/// Interval for `Var[c] = E[c²] - E[c]²` from intervals on `E[c²]` and `E[c]`.
/// The lower end is clamped at 0.
pub fn variance_interval(second_moment: Interval, mean: Interval) -> Result<Interval> {
    // min/max of E[c]^2 over the mean interval
    let (sq_min, sq_max) = if mean.lo <= 0.0 && 0.0 <= mean.hi {
        (0.0, (mean.lo * mean.lo).max(mean.hi * mean.hi))
    } else {
        let a = mean.lo * mean.lo;
        let b = mean.hi * mean.hi;
        (a.min(b), a.max(b))
    };
    let lo = second_moment.lo - sq_max;
    let hi = second_moment.hi - sq_min;
    if hi < 0.0 {
        return Err(Error::InconsistentIntervals { lo, hi });
    }
    Ok(Interval::new(lo.max(0.0), hi))
}

/// Which EMD bound to compare the Hoeffding union bound against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DominanceCase {
    /// Finite-sample EMD bound.
    FiniteSampleEmd,
    /// Asymptotic EMD bound with plugin `σ` (not `σ²`).
    AsymptoticEmd {
        /// Square root of the variance bound.
        sigma: f64,
    },
}

/// Whether the Hoeffding union width is guaranteed not to exceed the EMD bound's
/// deviation term, as a function of family size alone:
///
/// - finite: `|H| ≤ (2/δ)^8`
/// - asymptotic: `|H| ≤ (2/δ)^{σ²(2+2√2)²} · δ/3`
///
/// Evaluated in log space, so `n_codecs` may be astronomically large.
pub fn hoeffding_dominates(case: DominanceCase, n_codecs: f64, delta: f64) -> bool {
    let ln_h = log(n_codecs);
    let ln_2d = log(2.0 / delta);
    match case {
        DominanceCase::FiniteSampleEmd => ln_h <= 8.0 * ln_2d,
        DominanceCase::AsymptoticEmd { sigma } => {
            let k = sigma * sigma * ASYMPTOTIC_VARIANCE_FACTOR * ASYMPTOTIC_VARIANCE_FACTOR;
            ln_h <= k * ln_2d + log(delta / 3.0)
        }
    }
}

/// The asymptotic dominance condition re-solved from the two-tailed term
/// comparison `√ln(2|H|/δ) ≤ σ(2+2√2)√ln(3/δ)`, i.e.
/// `|H| ≤ (3/δ)^{σ²(2+2√2)²} · δ/2`. The finite case is unchanged.
pub fn hoeffding_dominates_rederived(case: DominanceCase, n_codecs: f64, delta: f64) -> bool {
    match case {
        DominanceCase::FiniteSampleEmd => hoeffding_dominates(case, n_codecs, delta),
        DominanceCase::AsymptoticEmd { sigma } => {
            let k = sigma * sigma * ASYMPTOTIC_VARIANCE_FACTOR * ASYMPTOTIC_VARIANCE_FACTOR;
            log(n_codecs) <= k * log(3.0 / delta) + log(delta / 2.0)
        }
    }
}

/// Intervals for the `codecs` subset computed on `samples` only.
pub(crate) struct BatchBounds {
    /// Sample means, `(active position, criterion)` order.
    pub estimates: Vec<f64>,
    /// Half-width per criterion.
    pub epsilons: Vec<f64>,
}

/// Computes means and per-criterion half-widths for a subset of codecs and a
/// contiguous batch of samples. `union_codecs` is the `|H|` used by the union
/// methods; `budget_slots` divides `δ` across repeated constructions.
pub(crate) fn batch_bounds(
    matrix: &CriterionMatrix,
    method: BoundMethod,
    delta: f64,
    budget_slots: usize,
    codecs: &[usize],
    samples: Range<usize>,
    union_codecs: usize,
) -> Result<BatchBounds> {
    check_delta(delta)?;
    check_count("budget_slots", budget_slots)?;
    let m = samples.len();
    check_samples(m, 2)?;
    let nc = matrix.n_criteria();
    let delta_eff = delta / budget_slots as f64;

    let mut estimates = Vec::with_capacity(codecs.len() * nc);
    for &h in codecs {
        for c in 0..nc {
            estimates.push(mean(&matrix.series(h, c)[samples.clone()]));
        }
    }

    let mut epsilons = Vec::with_capacity(nc);
    for c in 0..nc {
        let eps = match method {
            BoundMethod::FiniteSampleEmd => {
                let d = emd_raw_over(matrix, c, codecs, samples.clone()).max(0.0);
                epsilon_finite_emd(d, m, nc, delta_eff)?
            }
            BoundMethod::AsymptoticEmd => {
                let d = emd_raw_over(matrix, c, codecs, samples.clone()).max(0.0);
                let var = variance_over(matrix, c, codecs, samples.clone());
                epsilon_asymptotic_emd(d, var.sigma_sq, m, nc, delta_eff, Tails::Two)?
            }
            BoundMethod::HoeffdingUnion => epsilon_hoeffding(m, union_codecs, nc, delta_eff)?,
            BoundMethod::GaussianChernoffUnion => {
                let var = variance_over(matrix, c, codecs, samples.clone());
                epsilon_gaussian_chernoff(var.max_std(), m, union_codecs, nc, delta_eff)?
            }
        };
        epsilons.push(eps);
    }
    Ok(BatchBounds {
        estimates,
        epsilons,
    })
}

/// Builds `[ê − ε_c, ê + ε_c]` for every `(codec, criterion)`, clipped to
/// `[0, 1]` for bounded methods. `budget_slots` is the number of rectangles
/// that must hold simultaneously (1 for a single construction).
pub fn build_rectangle(
    matrix: &CriterionMatrix,
    method: BoundMethod,
    delta: f64,
    budget_slots: usize,
) -> Result<ConfidenceRectangle> {
    build_rectangle_with_estimates(matrix, method, delta, budget_slots).map(|(r, _)| r)
}

/// As [`build_rectangle`], also returning the sample means in `(codec, criterion)` order.
pub fn build_rectangle_with_estimates(
    matrix: &CriterionMatrix,
    method: BoundMethod,
    delta: f64,
    budget_slots: usize,
) -> Result<(ConfidenceRectangle, Vec<f64>)> {
    if method.requires_bounded() {
        matrix.check_unit_bounded()?;
    }
    let all: Vec<usize> = (0..matrix.n_codecs()).collect();
    let b = batch_bounds(
        matrix,
        method,
        delta,
        budget_slots,
        &all,
        0..matrix.n_samples(),
        matrix.n_codecs(),
    )?;
    let nc = matrix.n_criteria();
    let cells = b
        .estimates
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let iv = Interval::centered(e, b.epsilons[k % nc]);
            if method.requires_bounded() {
                iv.clip_unit()
            } else {
                iv
            }
        })
        .collect();
    let rect = ConfidenceRectangle::new(
        matrix.codecs().to_vec(),
        matrix.criteria().to_vec(),
        cells,
        delta,
        method,
        b.epsilons,
    )?;
    Ok((rect, b.estimates))
}
