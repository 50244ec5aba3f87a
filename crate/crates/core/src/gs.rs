//! Global sampling: every codec is evaluated on the whole sample, a single
//! confidence rectangle is built, and the liberal and conservative candidate
//! sets are read off the rectangle.

use alloc::string::String;
use alloc::vec::Vec;

use crate::bounds::{build_rectangle_with_estimates, BoundMethod};
use crate::error::{check_delta, Result};
use crate::interval::Interval;
use crate::matrix::CriterionMatrix;
use crate::objective::{
    dot_skip_zero, objective_range, ConstraintSpace, DenseConstraints, Feasibility, Objective,
};
use crate::rectangle::ConfidenceRectangle;
use crate::report::{Algorithm, Certificate, Sandwich, SelectionReport, TerminationReason};

/// Parameters of a global sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct GsConfig {
    /// Failure probability in `(0, 1)`.
    pub delta: f64,
    /// Interval construction.
    pub method: BoundMethod,
    /// Objective to minimise.
    pub objective: Objective,
    /// Constraint space.
    pub constraints: ConstraintSpace,
    /// Number of rectangles the δ budget is shared with (1 for a standalone run).
    pub budget_slots: usize,
}

impl GsConfig {
    /// Standalone configuration (`budget_slots = 1`).
    pub fn new(
        delta: f64,
        method: BoundMethod,
        objective: Objective,
        constraints: ConstraintSpace,
    ) -> Self {
        GsConfig {
            delta,
            method,
            objective,
            constraints,
            budget_slots: 1,
        }
    }
}

/// Candidate sets derived from one rectangle over a set of active codecs.
#[derive(Debug, Clone)]
pub(crate) struct Selection {
    pub objective: Vec<Interval>,
    pub possibly_feasible: Vec<usize>,
    pub certainly_feasible: Vec<usize>,
    pub liberal: Vec<usize>,
    pub conservative: Vec<usize>,
}

/// Codecs in `pool` whose objective lower end is at most the smallest upper end in `pool`.
fn near_optimal(pool: &[usize], objective: &[Interval]) -> Vec<usize> {
    let threshold = pool
        .iter()
        .map(|&h| objective[h].hi)
        .fold(f64::INFINITY, f64::min);
    pool.iter()
        .copied()
        .filter(|&h| objective[h].lo <= threshold)
        .collect()
}

pub(crate) fn select(
    rect: &ConfidenceRectangle,
    active: &[usize],
    weights: &[f64],
    constraints: &DenseConstraints,
) -> Selection {
    let objective: Vec<Interval> = (0..rect.codecs().len())
        .map(|h| objective_range(weights, rect.codec_box(h)))
        .collect();
    let mut possibly_feasible = Vec::new();
    let mut certainly_feasible = Vec::new();
    for &h in active {
        match constraints.classify(rect.codec_box(h)) {
            Feasibility::CertainlyFeasible => {
                possibly_feasible.push(h);
                certainly_feasible.push(h);
            }
            Feasibility::PossiblyFeasible => possibly_feasible.push(h),
            Feasibility::CertainlyInfeasible => {}
        }
    }
    let liberal = near_optimal(&possibly_feasible, &objective);
    let conservative = near_optimal(&certainly_feasible, &objective);
    Selection {
        objective,
        possibly_feasible,
        certainly_feasible,
        liberal,
        conservative,
    }
}

pub(crate) fn sandwich(sel: &Selection) -> Sandwich {
    let min = |set: &[usize], f: fn(&Interval) -> f64| {
        set.iter()
            .map(|&h| f(&sel.objective[h]))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    };
    Sandwich {
        lower: min(&sel.liberal, |iv| iv.lo),
        upper: min(&sel.conservative, |iv| iv.hi),
    }
}

pub(crate) fn ids(all: &[String], idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&h| all[h].clone()).collect()
}

pub(crate) fn objective_estimates(weights: &[f64], estimates: &[f64]) -> Vec<f64> {
    estimates
        .chunks_exact(weights.len())
        .map(|e| dot_skip_zero(weights, e))
        .collect()
}

/// Runs global sampling on the full matrix.
///
/// An empty liberal set is not an error: the report carries empty sets and
/// the `NoFeasibleCodec` reason.
pub fn global_sampling(matrix: &CriterionMatrix, cfg: &GsConfig) -> Result<SelectionReport> {
    check_delta(cfg.delta)?;
    let weights = cfg.objective.resolve(matrix.criteria())?;
    let constraints = cfg.constraints.resolve(matrix.criteria())?;
    let (rect, estimates) =
        build_rectangle_with_estimates(matrix, cfg.method, cfg.delta, cfg.budget_slots)?;
    let active: Vec<usize> = (0..matrix.n_codecs()).collect();
    let sel = select(&rect, &active, &weights, &constraints);
    let sandwich = sandwich(&sel);
    let terminated_reason = if sel.possibly_feasible.is_empty() {
        TerminationReason::NoFeasibleCodec
    } else {
        TerminationReason::NotApplicable
    };
    let codecs = matrix.codecs();
    Ok(SelectionReport {
        algorithm: Algorithm::GlobalSampling,
        possibly_feasible: ids(codecs, &sel.possibly_feasible),
        certainly_feasible: ids(codecs, &sel.certainly_feasible),
        liberal_set: ids(codecs, &sel.liberal),
        conservative_set: ids(codecs, &sel.conservative),
        objective_estimates: objective_estimates(&weights, &estimates),
        estimates,
        objective_intervals: sel.objective,
        rectangle: rect,
        sandwich,
        trace: Vec::new(),
        terminated_reason,
        violations: Vec::new(),
        certificate: Certificate {
            method: cfg.method,
            delta: cfg.delta,
            epsilon: None,
            s0: None,
            budget_slots: cfg.budget_slots,
            samples_available: matrix.n_samples(),
            samples_used: matrix.n_samples(),
            evaluations: matrix.n_samples() * matrix.n_codecs(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::HalfSpace;
    use alloc::string::ToString;
    use alloc::vec;

    fn rect(cells: &[(f64, f64)]) -> ConfidenceRectangle {
        ConfidenceRectangle::new(
            (0..cells.len()).map(|k| alloc::format!("h{k}")).collect(),
            vec!["c".to_string()],
            cells.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect(),
            0.1,
            BoundMethod::HoeffdingUnion,
            vec![0.0],
        )
        .unwrap()
    }

    fn unconstrained() -> DenseConstraints {
        ConstraintSpace::unconstrained().resolve(&["c".to_string()]).unwrap()
    }

    #[test]
    fn separated_intervals_select_one() {
        let r = rect(&[(0.1, 0.2), (0.3, 0.4)]);
        let sel = select(&r, &[0, 1], &[1.0], &unconstrained());
        assert_eq!(sel.liberal, vec![0]);
        assert_eq!(sel.conservative, vec![0]);
        let s = sandwich(&sel);
        assert_eq!((s.lower, s.upper), (Some(0.1), Some(0.2)));
    }

    #[test]
    fn overlapping_intervals_keep_both() {
        let r = rect(&[(0.1, 0.3), (0.25, 0.45)]);
        let sel = select(&r, &[0, 1], &[1.0], &unconstrained());
        assert_eq!(sel.liberal, vec![0, 1]);
        assert_eq!(sel.conservative, vec![0, 1]);
    }

    #[test]
    fn tie_at_threshold_is_included() {
        let r = rect(&[(0.1, 0.3), (0.3, 0.5)]);
        let sel = select(&r, &[0, 1], &[1.0], &unconstrained());
        assert_eq!(sel.liberal, vec![0, 1]);
    }

    #[test]
    fn infeasible_point_estimate_gives_empty_report() {
        let m = CriterionMatrix::new(
            vec!["h".to_string()],
            vec!["c".to_string()],
            vec!["s0".to_string(), "s1".to_string()],
            vec![0.7, 0.7],
        )
        .unwrap();
        let cfg = GsConfig::new(
            0.1,
            BoundMethod::GaussianChernoffUnion,
            Objective::single("c"),
            ConstraintSpace::new(vec![HalfSpace::upper("c", 0.5)]),
        );
        let rep = global_sampling(&m, &cfg).unwrap();
        assert!(rep.liberal_set.is_empty() && rep.conservative_set.is_empty());
        assert_eq!(rep.terminated_reason, TerminationReason::NoFeasibleCodec);
        assert_eq!(rep.sandwich, Sandwich::default());
        assert!(!rep.is_certified());
    }

    #[test]
    fn invalid_delta_is_rejected() {
        let m = CriterionMatrix::new(
            vec!["h".to_string()],
            vec!["c".to_string()],
            vec!["s0".to_string(), "s1".to_string()],
            vec![0.7, 0.7],
        )
        .unwrap();
        let cfg = GsConfig::new(1.5, BoundMethod::HoeffdingUnion, Objective::single("c"), ConstraintSpace::default());
        assert!(matches!(
            global_sampling(&m, &cfg),
            Err(crate::Error::Parameter { name: "delta", .. })
        ));
    }
}
