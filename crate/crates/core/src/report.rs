use alloc::string::String;
use alloc::vec::Vec;

use crate::bounds::BoundMethod;
use crate::interval::Interval;
use crate::rectangle::ConfidenceRectangle;

/// Which selection procedure produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// One pass over the full sample.
    GlobalSampling,
    /// Progressive sampling with pruning.
    ProgressiveSampling,
}

impl Algorithm {
    /// Snake-case tag.
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::GlobalSampling => "global_sampling",
            Algorithm::ProgressiveSampling => "progressive_sampling_with_pruning",
        }
    }
}

/// Why a selection run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    /// Exactly one codec remains under consideration.
    Singleton,
    /// The best conservative upper bound is within `ε` of the best liberal lower bound.
    EpsilonOptimal,
    /// All scheduled batches were consumed.
    SamplesExhausted,
    /// Every codec was shown to violate the constraints.
    NoFeasibleCodec,
    /// One-shot procedure; termination does not apply.
    NotApplicable,
}

impl TerminationReason {
    /// Snake-case tag.
    pub fn tag(self) -> &'static str {
        match self {
            TerminationReason::Singleton => "singleton",
            TerminationReason::EpsilonOptimal => "epsilon_optimal",
            TerminationReason::SamplesExhausted => "samples_exhausted",
            TerminationReason::NoFeasibleCodec => "no_feasible_codec",
            TerminationReason::NotApplicable => "not_applicable",
        }
    }
}

/// Bounds on the true constrained optimum `min_{h ∈ H_W} V(E[h])`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sandwich {
    /// `min` of objective lower ends over the liberal set, if nonempty.
    pub lower: Option<f64>,
    /// `min` of objective upper ends over the conservative set, if nonempty.
    pub upper: Option<f64>,
}

impl Sandwich {
    /// Whether `v` is consistent with both present ends.
    pub fn brackets(&self, v: f64) -> bool {
        self.lower.is_none_or(|lo| lo <= v) && self.upper.is_none_or(|hi| v <= hi)
    }
}

/// An empty intersection between a carried interval and a fresh batch interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolation {
    /// 1-based iteration.
    pub iteration: usize,
    /// Codec index.
    pub codec: usize,
    /// Criterion index.
    pub criterion: usize,
    /// Interval carried into the iteration.
    pub previous: Interval,
    /// Interval computed from the batch, which replaced it.
    pub fresh: Interval,
}

/// Parameters that make a report self-describing.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Bound method.
    pub method: BoundMethod,
    /// Failure probability.
    pub delta: f64,
    /// Optimality tolerance (PSP only).
    pub epsilon: Option<f64>,
    /// Initial batch size (PSP only).
    pub s0: Option<usize>,
    /// Number of simultaneous rectangle constructions the δ budget covers.
    pub budget_slots: usize,
    /// Samples available.
    pub samples_available: usize,
    /// Samples consumed.
    pub samples_used: usize,
    /// Codec-sample evaluations consumed (PSP skips pruned codecs).
    pub evaluations: usize,
}

/// One PSP iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PspTraceEntry {
    /// 1-based iteration number.
    pub iteration: usize,
    /// `s0 · 2^(iteration-1)`.
    pub batch_size: usize,
    /// First sample index of the batch.
    pub batch_start: usize,
    /// Codecs evaluated in this iteration (indices).
    pub active: Vec<usize>,
    /// Rectangle after intersection, all codecs (pruned ones frozen).
    pub cells: Vec<Interval>,
    /// Batch half-width per criterion.
    pub epsilons: Vec<f64>,
    /// Objective interval per codec.
    pub objective: Vec<Interval>,
    /// Liberal selection (indices).
    pub liberal: Vec<usize>,
    /// Conservative selection (indices).
    pub conservative: Vec<usize>,
    /// Codecs surviving into the next iteration (indices).
    pub next_active: Vec<usize>,
    /// Codecs removed because their box is certainly infeasible.
    pub pruned_infeasible: Vec<usize>,
    /// Codecs removed because their lower objective exceeds the conservative threshold.
    pub pruned_suboptimal: Vec<usize>,
    /// Empty intersections observed in this iteration.
    pub violations: Vec<BoundViolation>,
    /// One codec left after pruning.
    pub singleton: bool,
    /// `ε`-optimality reached.
    pub epsilon_optimal: bool,
    /// Last scheduled batch.
    pub exhausted: bool,
}

/// Output of a selection procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    /// Procedure.
    pub algorithm: Algorithm,
    /// Codecs that might satisfy the constraints (`Ĥ_L`), ids in codec order.
    pub possibly_feasible: Vec<String>,
    /// Codecs that satisfy the constraints with confidence (`Ĥ_C`).
    pub certainly_feasible: Vec<String>,
    /// Liberal near-optimal set `ĥ_L`.
    pub liberal_set: Vec<String>,
    /// Conservative near-optimal set `ĥ_C`.
    pub conservative_set: Vec<String>,
    /// Sample means `(codec, criterion)`; for PSP the latest batch each codec saw.
    pub estimates: Vec<f64>,
    /// Final confidence rectangle.
    pub rectangle: ConfidenceRectangle,
    /// Objective range over each codec's box.
    pub objective_intervals: Vec<Interval>,
    /// Objective at the point estimates.
    pub objective_estimates: Vec<f64>,
    /// Bounds on the true constrained optimum.
    pub sandwich: Sandwich,
    /// PSP iterations; empty for global sampling.
    pub trace: Vec<PspTraceEntry>,
    /// Stop reason.
    pub terminated_reason: TerminationReason,
    /// Empty intersections met during the run.
    pub violations: Vec<BoundViolation>,
    /// Run parameters.
    pub certificate: Certificate,
}

impl SelectionReport {
    /// Codec ids in axis order.
    pub fn codecs(&self) -> &[String] {
        self.rectangle.codecs()
    }

    /// Criterion ids in axis order.
    pub fn criteria(&self) -> &[String] {
        self.rectangle.criteria()
    }

    /// Point estimate for `(codec, criterion)` indices.
    pub fn estimate(&self, codec: usize, criterion: usize) -> f64 {
        self.estimates[codec * self.criteria().len() + criterion]
    }

    /// Whether the run ended with a usable guarantee: for global sampling a
    /// nonempty liberal set, for PSP a singleton or `ε`-optimal stop without
    /// bound violations.
    pub fn is_certified(&self) -> bool {
        match self.algorithm {
            Algorithm::GlobalSampling => !self.liberal_set.is_empty(),
            Algorithm::ProgressiveSampling => {
                self.violations.is_empty()
                    && matches!(
                        self.terminated_reason,
                        TerminationReason::Singleton | TerminationReason::EpsilonOptimal
                    )
            }
        }
    }
}
