//! Synthetic worlds with closed-form ground truth, and Monte-Carlo harnesses
//! that measure how often the selection guarantees fail.

use std::fmt;
use std::str::FromStr;

use codecsel_core::gs::{global_sampling, GsConfig};
use codecsel_core::psp::{psp, PspConfig};
use codecsel_core::{
    ConstraintSpace, CriterionMatrix, Error as CoreError, HalfSpace, Objective, SelectionReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution as _, Normal};
use rayon::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StdNormal};

use crate::error::CliError;

/// Distribution of one (codec, criterion) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellDistribution {
    /// Always `v`.
    Point(f64),
    /// Uniform on `[a, b]`.
    Uniform(f64, f64),
    /// Beta(α, β) on `[0, 1]`.
    Beta(f64, f64),
    /// Normal(μ, σ) conditioned on `[0, 1]`.
    TruncatedGaussian(f64, f64),
    /// Normal(μ, σ) on the real line.
    Gaussian(f64, f64),
}

fn std_normal() -> StdNormal {
    StdNormal::new(0.0, 1.0).expect("standard normal")
}

impl CellDistribution {
    fn validate(&self) -> Result<(), String> {
        let ok = match *self {
            CellDistribution::Point(v) => v.is_finite(),
            CellDistribution::Uniform(a, b) => a.is_finite() && b.is_finite() && a <= b,
            CellDistribution::Beta(a, b) => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
            CellDistribution::TruncatedGaussian(mu, s) => {
                mu.is_finite() && s > 0.0 && s.is_finite() && truncated_mass(mu, s) > 1e-12
            }
            CellDistribution::Gaussian(mu, s) => mu.is_finite() && s >= 0.0 && s.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("invalid distribution parameters in `{self}`"))
        }
    }

    /// Whether every draw lies in `[0, 1]`.
    pub fn is_unit_bounded(&self) -> bool {
        match *self {
            CellDistribution::Point(v) => (0.0..=1.0).contains(&v),
            CellDistribution::Uniform(a, b) => a >= 0.0 && b <= 1.0,
            CellDistribution::Beta(..) | CellDistribution::TruncatedGaussian(..) => true,
            CellDistribution::Gaussian(_, s) => s == 0.0,
        }
    }

    /// Exact mean.
    pub fn mean(&self) -> f64 {
        match *self {
            CellDistribution::Point(v) => v,
            CellDistribution::Uniform(a, b) => 0.5 * (a + b),
            CellDistribution::Beta(a, b) => a / (a + b),
            CellDistribution::TruncatedGaussian(mu, s) => {
                let (al, be, z) = truncation(mu, s);
                let n = std_normal();
                mu + s * (n.pdf(al) - n.pdf(be)) / z
            }
            CellDistribution::Gaussian(mu, _) => mu,
        }
    }

    /// Exact variance.
    pub fn variance(&self) -> f64 {
        match *self {
            CellDistribution::Point(_) => 0.0,
            CellDistribution::Uniform(a, b) => (b - a) * (b - a) / 12.0,
            CellDistribution::Beta(a, b) => a * b / ((a + b) * (a + b) * (a + b + 1.0)),
            CellDistribution::TruncatedGaussian(mu, s) => {
                let (al, be, z) = truncation(mu, s);
                let n = std_normal();
                let (pa, pb) = (n.pdf(al), n.pdf(be));
                let shift = (pa - pb) / z;
                s * s * (1.0 + (al * pa - be * pb) / z - shift * shift)
            }
            CellDistribution::Gaussian(_, s) => s * s,
        }
    }

    /// One draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            CellDistribution::Point(v) => v,
            CellDistribution::Uniform(a, b) => a + (b - a) * rng.random::<f64>(),
            CellDistribution::Beta(a, b) => Beta::new(a, b).expect("validated").sample(rng),
            CellDistribution::TruncatedGaussian(mu, s) => {
                let n = std_normal();
                let lo = n.cdf(-mu / s);
                let hi = n.cdf((1.0 - mu) / s);
                let u = lo + (hi - lo) * rng.random::<f64>();
                (mu + s * n.inverse_cdf(u)).clamp(0.0, 1.0)
            }
            CellDistribution::Gaussian(mu, s) => Normal::new(mu, s).expect("validated").sample(rng),
        }
    }
}

fn truncated_mass(mu: f64, s: f64) -> f64 {
    let n = std_normal();
    n.cdf((1.0 - mu) / s) - n.cdf(-mu / s)
}

fn truncation(mu: f64, s: f64) -> (f64, f64, f64) {
    (-mu / s, (1.0 - mu) / s, truncated_mass(mu, s))
}

impl fmt::Display for CellDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CellDistribution::Point(v) => write!(f, "point({v})"),
            CellDistribution::Uniform(a, b) => write!(f, "uniform({a},{b})"),
            CellDistribution::Beta(a, b) => write!(f, "beta({a},{b})"),
            CellDistribution::TruncatedGaussian(m, s) => write!(f, "truncated_gaussian({m},{s})"),
            CellDistribution::Gaussian(m, s) => write!(f, "gaussian({m},{s})"),
        }
    }
}

impl FromStr for CellDistribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| format!("expected `name(args)`, got `{s}`"))?;
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| format!("missing `)` in `{s}`"))?;
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|e| format!("bad number `{a}` in `{s}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        let arity = |k: usize| {
            if nums.len() == k {
                Ok(())
            } else {
                Err(format!("`{name}` takes {k} arguments, got {}", nums.len()))
            }
        };
        let d = match name.trim() {
            "point" => {
                arity(1)?;
                CellDistribution::Point(nums[0])
            }
            "uniform" => {
                arity(2)?;
                CellDistribution::Uniform(nums[0], nums[1])
            }
            "beta" => {
                arity(2)?;
                CellDistribution::Beta(nums[0], nums[1])
            }
            "truncated_gaussian" => {
                // the [0, 1] truncation bounds may be spelled out
                if nums.len() == 4 && nums[2] == 0.0 && nums[3] == 1.0 {
                    CellDistribution::TruncatedGaussian(nums[0], nums[1])
                } else {
                    arity(2)?;
                    CellDistribution::TruncatedGaussian(nums[0], nums[1])
                }
            }
            "gaussian" => {
                arity(2)?;
                CellDistribution::Gaussian(nums[0], nums[1])
            }
            other => return Err(format!("unknown distribution `{other}`")),
        };
        d.validate()?;
        Ok(d)
    }
}

/// A codec family whose criterion values are drawn from known distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticWorld {
    codecs: Vec<String>,
    criteria: Vec<String>,
    cells: Vec<CellDistribution>,
}

/// Ground-truth selection on exact means.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSelection {
    /// Codecs whose true mean vector satisfies every constraint (`H_W`).
    pub feasible: Vec<String>,
    /// Minimisers of the true objective over `feasible` (ties included).
    pub h_star: Vec<String>,
    /// Optimal true objective value, absent when `feasible` is empty.
    pub v_star: Option<f64>,
}

const TIE_TOLERANCE: f64 = 1e-12;

impl SyntheticWorld {
    /// Builds a world from per-(codec, criterion) distributions in codec-major order.
    pub fn new(
        codecs: Vec<String>,
        criteria: Vec<String>,
        cells: Vec<CellDistribution>,
    ) -> Result<Self, CliError> {
        if codecs.is_empty() || criteria.is_empty() || cells.len() != codecs.len() * criteria.len() {
            return Err(CliError::Config(format!(
                "world needs {} x {} cell distributions, got {}",
                codecs.len(),
                criteria.len(),
                cells.len()
            )));
        }
        for d in &cells {
            d.validate().map_err(CliError::Config)?;
        }
        Ok(SyntheticWorld {
            codecs,
            criteria,
            cells,
        })
    }

    /// Codec ids.
    pub fn codecs(&self) -> &[String] {
        &self.codecs
    }

    /// Criterion ids.
    pub fn criteria(&self) -> &[String] {
        &self.criteria
    }

    /// Distribution of one cell.
    pub fn cell(&self, codec: usize, criterion: usize) -> CellDistribution {
        self.cells[codec * self.criteria.len() + criterion]
    }

    /// Whether every cell is supported on `[0, 1]`.
    pub fn is_unit_bounded(&self) -> bool {
        self.cells.iter().all(CellDistribution::is_unit_bounded)
    }

    /// Exact means in `(codec, criterion)` order.
    pub fn true_means(&self) -> Vec<f64> {
        self.cells.iter().map(CellDistribution::mean).collect()
    }

    /// Exact variances in `(codec, criterion)` order.
    pub fn true_variances(&self) -> Vec<f64> {
        self.cells.iter().map(CellDistribution::variance).collect()
    }

    /// True mean vector of one codec.
    pub fn codec_means(&self, codec: usize) -> Vec<f64> {
        (0..self.criteria.len()).map(|c| self.cell(codec, c).mean()).collect()
    }

    /// Draws an `m`-sample matrix. Cell `(h, c, i)` uses its own random stream
    /// keyed by `(seed, i, h, c)`, so the result is reproducible and
    /// independent of evaluation order.
    pub fn sample_matrix(&self, m: usize, seed: u64) -> Result<CriterionMatrix, CoreError> {
        let samples = (0..m).map(|i| format!("s{i}")).collect();
        CriterionMatrix::from_fn(self.codecs.clone(), self.criteria.clone(), samples, |h, c, i| {
            let dist = self.cell(h, c);
            if let CellDistribution::Point(v) = dist {
                return v;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(seed, i as u64, h as u64, c as u64));
            dist.sample(&mut rng)
        })
    }

    /// Feasible set, optimal codecs and optimal value under the true means.
    pub fn oracle_select(
        &self,
        objective: &Objective,
        constraints: &ConstraintSpace,
    ) -> Result<OracleSelection, CoreError> {
        let mut feasible = Vec::new();
        let mut values = Vec::new();
        for h in 0..self.codecs.len() {
            let mu = self.codec_means(h);
            if constraints.contains(&self.criteria, &mu)? {
                feasible.push(h);
                values.push(objective.evaluate(&self.criteria, &mu)?);
            }
        }
        let v_star = values.iter().copied().reduce(f64::min);
        let h_star = match v_star {
            Some(v) => feasible
                .iter()
                .zip(&values)
                .filter(|(_, &x)| x <= v + TIE_TOLERANCE)
                .map(|(&h, _)| self.codecs[h].clone())
                .collect(),
            None => Vec::new(),
        };
        Ok(OracleSelection {
            feasible: feasible.iter().map(|&h| self.codecs[h].clone()).collect(),
            h_star,
            v_star,
        })
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cell_seed(seed: u64, sample: u64, codec: u64, criterion: u64) -> u64 {
    let mut s = splitmix64(seed);
    for part in [sample, codec, criterion] {
        s = splitmix64(s ^ part);
    }
    s
}

/// Seed of Monte-Carlo trial `trial` under master seed `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ trial.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Selection procedure for a coverage experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialConfig {
    /// Global sampling.
    Gs(GsConfig),
    /// Progressive sampling with pruning.
    Psp(PspConfig),
}

impl TrialConfig {
    fn objective(&self) -> &Objective {
        match self {
            TrialConfig::Gs(c) => &c.objective,
            TrialConfig::Psp(c) => &c.objective,
        }
    }

    fn constraints(&self) -> &ConstraintSpace {
        match self {
            TrialConfig::Gs(c) => &c.constraints,
            TrialConfig::Psp(c) => &c.constraints,
        }
    }

    /// Runs the procedure on one matrix.
    pub fn run(&self, matrix: &CriterionMatrix) -> Result<SelectionReport, CoreError> {
        match self {
            TrialConfig::Gs(c) => global_sampling(matrix, c),
            TrialConfig::Psp(c) => psp(matrix, c),
        }
    }
}

/// Which guarantee clauses failed in one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    /// Some true mean lies outside its interval.
    pub rectangle_miss: bool,
    /// Feasible codecs exist but the liberal set is empty.
    pub liberal_empty: bool,
    /// A conservative codec violates the constraints in truth.
    pub conservative_infeasible: bool,
    /// A true objective value escapes its error bound.
    pub objective_miss: bool,
    /// The true optimum lies outside the sandwich.
    pub sandwich_violated: bool,
    /// A true optimal codec was pruned (PSP only).
    pub optimum_pruned: bool,
}

impl TrialOutcome {
    /// Whether any clause failed.
    pub fn any(&self) -> bool {
        self.rectangle_miss
            || self.liberal_empty
            || self.conservative_infeasible
            || self.objective_miss
            || self.sandwich_violated
            || self.optimum_pruned
    }
}

const SLACK: f64 = 1e-9;

/// Checks a report's guarantees against the world's ground truth.
pub fn evaluate_report(
    world: &SyntheticWorld,
    report: &SelectionReport,
    objective: &Objective,
    oracle: &OracleSelection,
) -> Result<TrialOutcome, CoreError> {
    let nc = world.criteria.len();
    let means = world.true_means();
    let weights = objective.resolve(&world.criteria)?;
    let rect = &report.rectangle;
    let mut out = TrialOutcome::default();

    for h in 0..world.codecs.len() {
        for c in 0..nc {
            let iv = rect.interval(h, c);
            if !(iv.lo - SLACK <= means[h * nc + c] && means[h * nc + c] <= iv.hi + SLACK) {
                out.rectangle_miss = true;
            }
        }
        let v_true: f64 = (0..nc).map(|c| weights[c] * means[h * nc + c]).sum();
        let ok = match report.algorithm {
            codecsel_core::Algorithm::GlobalSampling => {
                let bound: f64 = (0..nc).map(|c| weights[c] * rect.epsilons[c]).sum();
                (v_true - report.objective_estimates[h]).abs() <= bound + SLACK
            }
            codecsel_core::Algorithm::ProgressiveSampling => {
                let iv = report.objective_intervals[h];
                iv.lo - SLACK <= v_true && v_true <= iv.hi + SLACK
            }
        };
        if !ok {
            out.objective_miss = true;
        }
    }

    out.liberal_empty = !oracle.feasible.is_empty() && report.liberal_set.is_empty();
    out.conservative_infeasible = report
        .conservative_set
        .iter()
        .any(|h| !oracle.feasible.contains(h));
    if let Some(v) = oracle.v_star {
        let s = report.sandwich;
        out.sandwich_violated = s.lower.is_some_and(|lo| lo > v + SLACK)
            || s.upper.is_some_and(|hi| v > hi + SLACK);
    }
    out.optimum_pruned = report.trace.iter().any(|t| {
        t.pruned_infeasible
            .iter()
            .chain(&t.pruned_suboptimal)
            .any(|&h| oracle.h_star.contains(&world.codecs[h]))
    });
    Ok(out)
}

/// Aggregated Monte-Carlo failure counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoverageStats {
    /// Trials requested.
    pub trials: usize,
    /// Trials rejected because the configuration does not fit the data
    /// (e.g. a bounded method on unbounded draws).
    pub rejected: usize,
    /// Trials with a true mean outside its interval.
    pub rectangle_miss: usize,
    /// Trials with an empty liberal set although feasible codecs exist.
    pub liberal_empty: usize,
    /// Trials with a truly infeasible conservative codec.
    pub conservative_infeasible: usize,
    /// Trials with an objective estimate outside its error bound.
    pub objective_miss: usize,
    /// Trials whose sandwich misses the true optimum.
    pub sandwich_violated: usize,
    /// Trials that pruned a true optimal codec (PSP).
    pub optimum_pruned: usize,
    /// Trials where any clause failed.
    pub simultaneous_failures: usize,
}

impl CoverageStats {
    /// Simultaneous failures over completed (non-rejected) trials.
    pub fn failure_fraction(&self) -> f64 {
        let done = self.trials - self.rejected;
        if done == 0 {
            0.0
        } else {
            self.simultaneous_failures as f64 / done as f64
        }
    }

    fn add(&mut self, o: &TrialOutcome) {
        self.rectangle_miss += o.rectangle_miss as usize;
        self.liberal_empty += o.liberal_empty as usize;
        self.conservative_infeasible += o.conservative_infeasible as usize;
        self.objective_miss += o.objective_miss as usize;
        self.sandwich_violated += o.sandwich_violated as usize;
        self.optimum_pruned += o.optimum_pruned as usize;
        self.simultaneous_failures += o.any() as usize;
    }
}

/// Runs `trials` independent draws of an `m`-sample matrix from `world`, applies
/// the configured procedure and counts guarantee failures. Trials run in
/// parallel; counts do not depend on scheduling.
pub fn coverage_trial(
    world: &SyntheticWorld,
    m: usize,
    cfg: &TrialConfig,
    trials: usize,
    seed: u64,
) -> Result<CoverageStats, CoreError> {
    let oracle = world.oracle_select(cfg.objective(), cfg.constraints())?;
    let outcomes: Vec<Result<Option<TrialOutcome>, CoreError>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let matrix = world.sample_matrix(m, trial_seed(seed, t as u64))?;
            match cfg.run(&matrix) {
                Ok(report) => evaluate_report(world, &report, cfg.objective(), &oracle).map(Some),
                Err(CoreError::Domain { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut stats = CoverageStats {
        trials,
        ..CoverageStats::default()
    };
    for o in outcomes {
        match o? {
            Some(outcome) => stats.add(&outcome),
            None => stats.rejected += 1,
        }
    }
    Ok(stats)
}

/// Draws a random world: each cell is a point, uniform, beta or truncated
/// Gaussian distribution with random parameters.
pub fn random_world<R: Rng + ?Sized>(n_codecs: usize, n_criteria: usize, rng: &mut R) -> SyntheticWorld {
    let cells = (0..n_codecs * n_criteria)
        .map(|_| match rng.random_range(0..4) {
            0 => CellDistribution::Point(rng.random::<f64>()),
            1 => {
                let a: f64 = rng.random();
                let b: f64 = rng.random();
                CellDistribution::Uniform(a.min(b), a.max(b))
            }
            2 => CellDistribution::Beta(rng.random_range(0.5..8.0), rng.random_range(0.5..8.0)),
            _ => CellDistribution::TruncatedGaussian(rng.random_range(0.1..0.9), rng.random_range(0.02..0.3)),
        })
        .collect();
    SyntheticWorld::new(
        (0..n_codecs).map(|k| format!("h{k}")).collect(),
        (0..n_criteria).map(|k| format!("c{k}")).collect(),
        cells,
    )
    .expect("random parameters are valid")
}

/// Random objective with positive weights summing to 1.
pub fn random_objective<R: Rng + ?Sized>(criteria: &[String], rng: &mut R) -> Objective {
    let raw: Vec<f64> = criteria.iter().map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Objective::new(criteria.iter().cloned().zip(raw.iter().map(|w| w / total)).collect())
        .expect("positive weights")
}

/// Random half-spaces `a · e <= b` with coefficients in `[-1, 1]` and the
/// bound placed at a random quantile of the world's codecs, so constraints
/// neither trivially hold nor trivially fail.
pub fn random_constraints<R: Rng + ?Sized>(
    world: &SyntheticWorld,
    count: usize,
    rng: &mut R,
) -> ConstraintSpace {
    let halfspaces = (0..count)
        .map(|_| {
            let coeffs: Vec<(String, f64)> = world
                .criteria
                .iter()
                .map(|c| (c.clone(), rng.random_range(-1.0..1.0)))
                .collect();
            let mut values: Vec<f64> = (0..world.codecs.len())
                .map(|h| {
                    let mu = world.codec_means(h);
                    coeffs.iter().zip(&mu).map(|((_, a), m)| a * m).sum()
                })
                .collect();
            values.sort_by(f64::total_cmp);
            let k = rng.random_range(0..values.len());
            let bound = values[k] + rng.random_range(-0.05..0.15);
            HalfSpace::new(coeffs.into_iter().collect(), bound).expect("finite")
        })
        .collect();
    ConstraintSpace::new(halfspaces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use codecsel_core::BoundMethod;

    fn world(cells: Vec<CellDistribution>, nh: usize, nc: usize) -> SyntheticWorld {
        SyntheticWorld::new(
            (0..nh).map(|k| format!("h{k}")).collect(),
            (0..nc).map(|k| format!("c{k}")).collect(),
            cells,
        )
        .unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["point(0.3)", "uniform(0,1)", "beta(2,5)", "truncated_gaussian(0.5,0.1)", "gaussian(0,1)"] {
            let d: CellDistribution = s.parse().unwrap();
            assert_eq!(d.to_string().parse::<CellDistribution>().unwrap(), d);
        }
        assert_eq!(
            "truncated_gaussian(0.4, 0.2, 0, 1)".parse::<CellDistribution>().unwrap(),
            CellDistribution::TruncatedGaussian(0.4, 0.2)
        );
        assert!("beta(0,1)".parse::<CellDistribution>().is_err());
        assert!("uniform(0.5,0.1)".parse::<CellDistribution>().is_err());
        assert!("cauchy(0,1)".parse::<CellDistribution>().is_err());
        assert!("beta(1".parse::<CellDistribution>().is_err());
    }

    #[test]
    fn closed_form_moments_match_quadrature() {
        // midpoint-rule integration of the truncated density
        let (mu, s) = (0.3, 0.25);
        let n = std_normal();
        let k = 200_000;
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for j in 0..k {
            let x = (j as f64 + 0.5) / k as f64;
            let p = n.pdf((x - mu) / s);
            z += p;
            m1 += p * x;
            m2 += p * x * x;
        }
        let mean = m1 / z;
        let var = m2 / z - mean * mean;
        let d = CellDistribution::TruncatedGaussian(mu, s);
        assert!((d.mean() - mean).abs() < 1e-8, "{} vs {mean}", d.mean());
        assert!((d.variance() - var).abs() < 1e-8);
        assert!((CellDistribution::Beta(2.0, 5.0).mean() - 2.0 / 7.0).abs() < 1e-15);
        assert!((CellDistribution::Uniform(0.0, 1.0).variance() - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn point_world_samples_exactly() {
        let w = world(vec![CellDistribution::Point(0.25), CellDistribution::Point(0.75)], 2, 1);
        let m = w.sample_matrix(10, 3).unwrap();
        assert!(m.series(0, 0).iter().all(|&v| v == 0.25));
        assert!(m.series(1, 0).iter().all(|&v| v == 0.75));
    }

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let w = world(vec![CellDistribution::Beta(2.0, 3.0); 4], 2, 2);
        let a = w.sample_matrix(50, 11).unwrap();
        let b = w.sample_matrix(50, 11).unwrap();
        let c = w.sample_matrix(50, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        // prefixes agree: cell streams do not depend on m
        let short = w.sample_matrix(20, 11).unwrap();
        assert_eq!(&a.series(1, 1)[..20], short.series(1, 1));
    }

    #[test]
    fn uniform_sample_means_concentrate() {
        let w = world(vec![CellDistribution::Uniform(0.0, 1.0); 2], 2, 1);
        let m = w.sample_matrix(100_000, 5).unwrap();
        for h in 0..2 {
            let mean: f64 = m.series(h, 0).iter().sum::<f64>() / 100_000.0;
            assert!((mean - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn truncated_samples_match_moments() {
        let d = CellDistribution::TruncatedGaussian(0.1, 0.3);
        let w = world(vec![d], 1, 1);
        let m = w.sample_matrix(200_000, 9).unwrap();
        let xs = m.series(0, 0);
        assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - d.mean()).abs() < 0.003, "{mean} vs {}", d.mean());
    }

    #[test]
    fn oracle_examples() {
        let w = world(vec![CellDistribution::Point(0.2), CellDistribution::Point(0.5)], 2, 1);
        let o = w.oracle_select(&Objective::single("c0"), &ConstraintSpace::default()).unwrap();
        assert_eq!(o.h_star, vec!["h0".to_string()]);
        assert_eq!(o.v_star, Some(0.2));

        let w = world(
            vec![
                CellDistribution::Point(0.4),
                CellDistribution::Point(0.1),
                CellDistribution::Point(0.2),
                CellDistribution::Point(0.9),
            ],
            2,
            2,
        );
        let cons = ConstraintSpace::new(vec![HalfSpace::upper("c0", 0.3)]);
        for obj in ["c0", "c1"] {
            let o = w.oracle_select(&Objective::single(obj), &cons).unwrap();
            assert_eq!(o.feasible, vec!["h1".to_string()]);
        }

        let w = world(vec![CellDistribution::Beta(2.0, 2.0); 2], 2, 1);
        let o = w.oracle_select(&Objective::single("c0"), &ConstraintSpace::default()).unwrap();
        assert_eq!(o.h_star.len(), 2);

        let cons = ConstraintSpace::new(vec![HalfSpace::upper("c0", 0.1)]);
        let o = w.oracle_select(&Objective::single("c0"), &cons).unwrap();
        assert!(o.feasible.is_empty() && o.h_star.is_empty() && o.v_star.is_none());
    }

    fn gs(method: BoundMethod, delta: f64, obj: &str) -> TrialConfig {
        TrialConfig::Gs(GsConfig::new(delta, method, Objective::single(obj), ConstraintSpace::default()))
    }

    #[test]
    fn point_world_never_fails() {
        let w = world(
            vec![CellDistribution::Point(0.3), CellDistribution::Point(0.6), CellDistribution::Point(0.5)],
            3,
            1,
        );
        for method in [BoundMethod::FiniteSampleEmd, BoundMethod::HoeffdingUnion] {
            let s = coverage_trial(&w, 40, &gs(method, 0.1, "c0"), 50, 1).unwrap();
            assert_eq!(s.simultaneous_failures, 0);
            assert_eq!(s.rejected, 0);
        }
    }

    #[test]
    fn unbounded_world_with_bounded_method_is_rejected() {
        let w = world(vec![CellDistribution::Gaussian(0.0, 1.0)], 1, 1);
        let s = coverage_trial(&w, 30, &gs(BoundMethod::FiniteSampleEmd, 0.1, "c0"), 20, 4).unwrap();
        assert_eq!(s.rejected, 20);
        assert_eq!(s.simultaneous_failures, 0);
        let s = coverage_trial(&w, 30, &gs(BoundMethod::AsymptoticEmd, 0.1, "c0"), 20, 4).unwrap();
        assert_eq!(s.rejected, 0);
    }

    #[test]
    fn uniform_world_hoeffding_coverage() {
        let w = world(vec![CellDistribution::Uniform(0.0, 1.0); 2], 2, 1);
        let s = coverage_trial(&w, 200, &gs(BoundMethod::HoeffdingUnion, 0.1, "c0"), 2000, 21).unwrap();
        let tol = 0.1 + 3.0 * (0.1f64 * 0.9 / 2000.0).sqrt();
        assert!(s.failure_fraction() <= tol, "{}", s.failure_fraction());
    }

    #[test]
    fn harness_detects_undercoverage() {
        // a Gaussian approximation at tiny m and δ near 1 misses often
        let w = world(vec![CellDistribution::Uniform(0.0, 1.0); 2], 2, 1);
        let s = coverage_trial(&w, 4, &gs(BoundMethod::GaussianChernoffUnion, 0.9, "c0"), 400, 8).unwrap();
        assert!(s.rectangle_miss > 40, "{s:?}");
        assert!(s.simultaneous_failures >= s.rectangle_miss);
    }

    #[test]
    fn coverage_is_schedule_independent() {
        let w = world(vec![CellDistribution::Beta(1.0, 3.0); 4], 2, 2);
        let cfg = gs(BoundMethod::GaussianChernoffUnion, 0.3, "c1");
        let a = coverage_trial(&w, 30, &cfg, 200, 77).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| coverage_trial(&w, 30, &cfg, 200, 77).unwrap());
        assert_eq!(a, b);
    }
}
