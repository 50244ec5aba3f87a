//! Progressive sampling with pruning.
//!
//! The sample is consumed in disjoint batches of sizes `s0, 2 s0, 4 s0, …`.
//! Each batch yields fresh intervals computed on that batch alone (over the
//! codecs still active); they are intersected with the carried intervals, so
//! widths never grow. After each batch, codecs whose box is certainly
//! infeasible are dropped, and, once some codec is certainly feasible, so are
//! codecs whose objective lower end exceeds the best conservative upper end.
//!
//! The `δ` budget is split over all `n` scheduled batches up front, and the
//! union methods use the initial family size, so pruning never changes the
//! a-priori allocation.

use alloc::format;
use alloc::vec::Vec;

use crate::bounds::{batch_bounds, BoundMethod};
use crate::error::{check_delta, check_open_unit, Error, Result};
use crate::gs::{ids, objective_estimates, sandwich, select};
use crate::interval::Interval;
use crate::matrix::CriterionMatrix;
use crate::objective::{ConstraintSpace, Objective};
use crate::rectangle::ConfidenceRectangle;
use crate::report::{
    Algorithm, BoundViolation, Certificate, PspTraceEntry, SelectionReport, TerminationReason,
};

/// Parameters of a PSP run.
#[derive(Debug, Clone, PartialEq)]
pub struct PspConfig {
    /// First batch size, at least 2.
    pub s0: usize,
    /// Optimality tolerance in `(0, 1)`.
    pub epsilon: f64,
    /// Failure probability in `(0, 1)`.
    pub delta: f64,
    /// Interval construction.
    pub method: BoundMethod,
    /// Objective to minimise.
    pub objective: Objective,
    /// Constraint space.
    pub constraints: ConstraintSpace,
}

impl PspConfig {
    fn validate(&self) -> Result<()> {
        if self.s0 < 2 {
            return Err(Error::Parameter {
                name: "s0",
                value: self.s0 as f64,
                expected: "an initial batch size of at least 2",
            });
        }
        check_open_unit("epsilon", self.epsilon)?;
        check_delta(self.delta)
    }
}

/// Number of batches `n = ⌊log2(total/s0 + 1)⌋` and their sizes `s0·2^(i-1)`.
///
/// The sizes sum to `s0 (2^n − 1) ≤ total`.
pub fn batch_schedule(total_samples: usize, s0: usize) -> Result<(usize, Vec<usize>)> {
    if s0 < 2 {
        return Err(Error::Parameter {
            name: "s0",
            value: s0 as f64,
            expected: "an initial batch size of at least 2",
        });
    }
    if total_samples < s0 {
        return Err(Error::InsufficientSamples {
            needed: s0,
            got: total_samples,
        });
    }
    // largest n with s0 (2^n - 1) <= total, computed in integers
    let mut sizes = Vec::new();
    let mut used = 0usize;
    let mut size = s0;
    while used + size <= total_samples {
        used += size;
        sizes.push(size);
        size = match size.checked_mul(2) {
            Some(s) => s,
            None => break,
        };
    }
    Ok((sizes.len(), sizes))
}

/// Runs PSP over the matrix's samples in their stored order.
pub fn psp(matrix: &CriterionMatrix, cfg: &PspConfig) -> Result<SelectionReport> {
    cfg.validate()?;
    if cfg.method.requires_bounded() {
        matrix.check_unit_bounded()?;
    }
    let weights = cfg.objective.resolve(matrix.criteria())?;
    let constraints = cfg.constraints.resolve(matrix.criteria())?;
    let (n, sizes) = batch_schedule(matrix.n_samples(), cfg.s0)?;

    let nh = matrix.n_codecs();
    let nc = matrix.n_criteria();
    let start_interval = if cfg.method.requires_bounded() {
        Interval::UNIT
    } else {
        Interval::REAL
    };
    let mut rect = ConfidenceRectangle::new(
        matrix.codecs().to_vec(),
        matrix.criteria().to_vec(),
        alloc::vec![start_interval; nh * nc],
        cfg.delta,
        cfg.method,
        alloc::vec![f64::INFINITY; nc],
    )?;
    let mut estimates = alloc::vec![f64::NAN; nh * nc];
    let mut active: Vec<usize> = (0..nh).collect();
    let trivial_family = nh == 1;
    let mut trace = Vec::with_capacity(n);
    let mut violations = Vec::new();
    let mut start = 0usize;
    let mut evaluations = 0usize;

    for (k, &size) in sizes.iter().enumerate() {
        let iteration = k + 1;
        let batch = start..start + size;
        let bb = batch_bounds(matrix, cfg.method, cfg.delta, n, &active, batch.clone(), nh)?;
        evaluations += size * active.len();

        let mut iter_violations = Vec::new();
        for (p, &h) in active.iter().enumerate() {
            let cells = rect.codec_box_mut(h);
            for c in 0..nc {
                let est = bb.estimates[p * nc + c];
                estimates[h * nc + c] = est;
                let mut fresh = Interval::centered(est, bb.epsilons[c]);
                if cfg.method.requires_bounded() {
                    fresh = fresh.clip_unit();
                }
                let previous = cells[c];
                cells[c] = match previous.intersect(&fresh) {
                    Some(iv) => iv,
                    None => {
                        iter_violations.push(BoundViolation {
                            iteration,
                            codec: h,
                            criterion: c,
                            previous,
                            fresh,
                        });
                        fresh
                    }
                };
            }
        }
        rect.epsilons = bb.epsilons.clone();

        let sel = select(&rect, &active, &weights, &constraints);
        let mut next = sel.possibly_feasible.clone();
        if !sel.conservative.is_empty() {
            let threshold = sel
                .conservative
                .iter()
                .map(|&h| sel.objective[h].hi)
                .fold(f64::INFINITY, f64::min);
            next.retain(|&h| sel.objective[h].lo <= threshold);
        }
        let pruned_infeasible: Vec<usize> = active
            .iter()
            .copied()
            .filter(|h| !sel.possibly_feasible.contains(h))
            .collect();
        let pruned_suboptimal: Vec<usize> = sel
            .possibly_feasible
            .iter()
            .copied()
            .filter(|h| !next.contains(h))
            .collect();

        let best_upper = sel
            .conservative
            .iter()
            .map(|&h| sel.objective[h].hi)
            .fold(f64::INFINITY, f64::min);
        let best_lower = sel
            .liberal
            .iter()
            .map(|&h| sel.objective[h].lo)
            .fold(f64::INFINITY, f64::min);
        let singleton = next.len() == 1;
        let epsilon_optimal = !sel.conservative.is_empty()
            && !sel.liberal.is_empty()
            && best_upper <= best_lower + cfg.epsilon;
        let exhausted = iteration == n;

        let reason = if next.is_empty() {
            Some(TerminationReason::NoFeasibleCodec)
        } else if trivial_family && singleton {
            Some(TerminationReason::Singleton)
        } else if epsilon_optimal {
            Some(TerminationReason::EpsilonOptimal)
        } else if singleton {
            Some(TerminationReason::Singleton)
        } else if exhausted {
            Some(TerminationReason::SamplesExhausted)
        } else {
            None
        };

        violations.extend(iter_violations.iter().cloned());
        trace.push(PspTraceEntry {
            iteration,
            batch_size: size,
            batch_start: start,
            active: active.clone(),
            cells: rect.cells().to_vec(),
            epsilons: bb.epsilons,
            objective: sel.objective.clone(),
            liberal: sel.liberal.clone(),
            conservative: sel.conservative.clone(),
            next_active: next.clone(),
            pruned_infeasible,
            pruned_suboptimal,
            violations: iter_violations,
            singleton,
            epsilon_optimal,
            exhausted,
        });
        start += size;

        if let Some(terminated_reason) = reason {
            let codecs = matrix.codecs();
            return Ok(SelectionReport {
                algorithm: Algorithm::ProgressiveSampling,
                possibly_feasible: ids(codecs, &sel.possibly_feasible),
                certainly_feasible: ids(codecs, &sel.certainly_feasible),
                liberal_set: ids(codecs, &sel.liberal),
                conservative_set: ids(codecs, &sel.conservative),
                sandwich: sandwich(&sel),
                objective_estimates: objective_estimates(&weights, &estimates),
                estimates,
                objective_intervals: sel.objective,
                rectangle: rect,
                trace,
                terminated_reason,
                violations,
                certificate: Certificate {
                    method: cfg.method,
                    delta: cfg.delta,
                    epsilon: Some(cfg.epsilon),
                    s0: Some(cfg.s0),
                    budget_slots: n,
                    samples_available: matrix.n_samples(),
                    samples_used: start,
                    evaluations,
                },
            });
        }
        active = next;
    }
    // the last scheduled batch always terminates
    Err(Error::Config(format!("empty batch schedule for {} samples", matrix.n_samples())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::{String, ToString};
    use alloc::vec;

    #[test]
    fn schedule_examples() {
        let (n, sizes) = batch_schedule(16000, 25).unwrap();
        assert_eq!(n, 9);
        assert_eq!(sizes, vec![25, 50, 100, 200, 400, 800, 1600, 3200, 6400]);
        assert_eq!(sizes.iter().sum::<usize>(), 12775);
        assert_eq!(batch_schedule(30, 30).unwrap(), (1, vec![30]));
        assert_eq!(batch_schedule(70, 10).unwrap(), (3, vec![10, 20, 40]));
        assert_eq!(batch_schedule(69, 10).unwrap().0, 2);
        assert!(matches!(batch_schedule(9, 10), Err(Error::InsufficientSamples { .. })));
        assert!(batch_schedule(100, 1).is_err());
    }

    #[test]
    fn schedule_matches_log_formula() {
        for s0 in 2..12usize {
            for total in s0..400 {
                let n = libm::floor(libm::log2(total as f64 / s0 as f64 + 1.0)) as usize;
                assert_eq!(batch_schedule(total, s0).unwrap().0, n, "total={total} s0={s0}");
            }
        }
    }

    fn two_point_codecs() -> CriterionMatrix {
        let samples: Vec<String> = (0..100).map(|i| alloc::format!("s{i}")).collect();
        CriterionMatrix::from_fn(
            vec!["a".to_string(), "b".to_string()],
            vec!["c".to_string()],
            samples,
            |h, _, _| if h == 0 { 0.1 } else { 0.9 },
        )
        .unwrap()
    }

    #[test]
    fn zero_variance_separates_in_first_batch() {
        let cfg = PspConfig {
            s0: 10,
            epsilon: 0.05,
            delta: 0.05,
            method: BoundMethod::GaussianChernoffUnion,
            objective: Objective::single("c"),
            constraints: ConstraintSpace::unconstrained(),
        };
        let rep = psp(&two_point_codecs(), &cfg).unwrap();
        assert_eq!(rep.trace.len(), 1);
        assert_eq!(rep.liberal_set, vec!["a".to_string()]);
        assert_eq!(rep.conservative_set, vec!["a".to_string()]);
        assert_eq!(rep.terminated_reason, TerminationReason::EpsilonOptimal);
        assert_eq!(rep.rectangle.interval(0, 0), Interval::point(0.1));
        assert!(rep.is_certified());
    }

    #[test]
    fn single_codec_stops_as_singleton() {
        let samples: Vec<String> = (0..64).map(|i| alloc::format!("s{i}")).collect();
        let m = CriterionMatrix::from_fn(vec!["only".to_string()], vec!["c".to_string()], samples, |_, _, i| {
            (i % 2) as f64
        })
        .unwrap();
        for method in BoundMethod::ALL {
            let cfg = PspConfig {
                s0: 4,
                epsilon: 0.05,
                delta: 0.1,
                method,
                objective: Objective::single("c"),
                constraints: ConstraintSpace::unconstrained(),
            };
            let rep = psp(&m, &cfg).unwrap();
            assert_eq!(rep.trace.len(), 1);
            assert_eq!(rep.terminated_reason, TerminationReason::Singleton);
        }
    }

    #[test]
    fn parameter_validation() {
        let m = two_point_codecs();
        let base = PspConfig {
            s0: 10,
            epsilon: 0.05,
            delta: 0.05,
            method: BoundMethod::HoeffdingUnion,
            objective: Objective::single("c"),
            constraints: ConstraintSpace::unconstrained(),
        };
        for cfg in [
            PspConfig { s0: 1, ..base.clone() },
            PspConfig { epsilon: 1.0, ..base.clone() },
            PspConfig { delta: 0.0, ..base.clone() },
            PspConfig { s0: 101, ..base.clone() },
        ] {
            assert!(psp(&m, &cfg).is_err());
        }
    }

    #[test]
    fn empty_intersection_is_recorded_and_survivable() {
        // the second batch is constant, so its Gaussian-Chernoff intervals are
        // points lying outside the first batch's intervals
        let samples: Vec<String> = (0..30).map(|i| alloc::format!("s{i}")).collect();
        let m = CriterionMatrix::from_fn(
            vec!["a".to_string(), "b".to_string()],
            vec!["c".to_string()],
            samples,
            |h, _, i| if i < 10 { 0.4 + 0.2 * (i % 2) as f64 } else if h == 0 { 0.2 } else { 0.21 },
        )
        .unwrap();
        let cfg = PspConfig {
            s0: 10,
            epsilon: 0.001,
            delta: 0.05,
            method: BoundMethod::GaussianChernoffUnion,
            objective: Objective::single("c"),
            constraints: ConstraintSpace::unconstrained(),
        };
        let rep = psp(&m, &cfg).unwrap();
        assert!(!rep.violations.is_empty());
        assert_eq!(rep.violations[0].iteration, 2);
        assert_eq!(rep.rectangle.interval(0, 0), Interval::point(0.2));
        assert!(!rep.is_certified());
    }
}
