use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Nonnegative linear objective `V(e) = w · e` over criterion means. Smaller is better.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    weights: BTreeMap<String, f64>,
}

impl Objective {
    /// Validates that every weight is finite and nonnegative and that at least one is positive.
    pub fn new(weights: BTreeMap<String, f64>) -> Result<Self> {
        for (id, &w) in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Config(format!(
                    "objective weight for `{id}` must be finite and nonnegative, got {w}"
                )));
            }
        }
        if !weights.values().any(|&w| w > 0.0) {
            return Err(Error::Config("objective needs at least one positive weight".into()));
        }
        Ok(Objective { weights })
    }

    /// The identity objective on one criterion.
    pub fn single(criterion: &str) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(String::from(criterion), 1.0);
        Objective { weights }
    }

    /// Weight map.
    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    /// Same objective with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.weights.iter().map(|(k, &w)| (k.clone(), w * factor)).collect())
    }

    /// Dense weight vector aligned with `criteria`. Unknown ids are rejected.
    pub fn resolve(&self, criteria: &[String]) -> Result<Vec<f64>> {
        let mut dense = alloc::vec![0.0; criteria.len()];
        for (id, &w) in &self.weights {
            let c = criteria
                .iter()
                .position(|k| k == id)
                .ok_or_else(|| Error::Config(format!("objective references unknown criterion `{id}`")))?;
            dense[c] = w;
        }
        Ok(dense)
    }

    /// `V(e)` for a dense criterion vector aligned with `criteria`.
    pub fn evaluate(&self, criteria: &[String], point: &[f64]) -> Result<f64> {
        let w = self.resolve(criteria)?;
        Ok(dot_skip_zero(&w, point))
    }
}

pub(crate) fn dot_skip_zero(w: &[f64], e: &[f64]) -> f64 {
    w.iter()
        .zip(e)
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, e)| w * e)
        .sum()
}

/// `Σ w_c · [lo_c, hi_c]` for nonnegative weights: the objective range over
/// an axis-aligned box is attained at its lower and upper corners.
pub(crate) fn objective_range(weights: &[f64], cells: &[Interval]) -> Interval {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (&w, iv) in weights.iter().zip(cells) {
        if w != 0.0 {
            lo += w * iv.lo;
            hi += w * iv.hi;
        }
    }
    Interval::new(lo, hi)
}

/// One linear constraint `coeffs · e <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    /// Coefficients keyed by criterion id; absent criteria have coefficient 0.
    pub coeffs: BTreeMap<String, f64>,
    /// Right-hand side.
    pub bound: f64,
}

impl HalfSpace {
    /// Builds a half-space, rejecting non-finite numbers.
    pub fn new(coeffs: BTreeMap<String, f64>, bound: f64) -> Result<Self> {
        if !bound.is_finite() || coeffs.values().any(|a| !a.is_finite()) {
            return Err(Error::Config("half-space coefficients must be finite".into()));
        }
        Ok(HalfSpace { coeffs, bound })
    }

    /// `e_criterion <= bound`.
    pub fn upper(criterion: &str, bound: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(String::from(criterion), 1.0);
        HalfSpace { coeffs, bound }
    }
}

/// Conjunction of half-spaces over criterion-mean vectors. Empty means unconstrained.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSpace {
    /// The half-spaces.
    pub halfspaces: Vec<HalfSpace>,
}

/// Outcome of testing a confidence box against a constraint space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Feasibility {
    /// The whole box lies inside the constraint space.
    CertainlyFeasible,
    /// Neither inclusion nor exclusion can be shown.
    PossiblyFeasible,
    /// Some half-space is violated at every point of the box.
    CertainlyInfeasible,
}

impl Feasibility {
    /// Snake-case tag.
    pub fn as_str(self) -> &'static str {
        match self {
            Feasibility::CertainlyFeasible => "certainly_feasible",
            Feasibility::PossiblyFeasible => "possibly_feasible",
            Feasibility::CertainlyInfeasible => "certainly_infeasible",
        }
    }
}

/// Constraint space with coefficients aligned to a criterion axis.
#[derive(Debug, Clone)]
pub(crate) struct DenseConstraints {
    rows: Vec<(Vec<f64>, f64)>,
}

impl ConstraintSpace {
    /// Unconstrained space.
    pub fn unconstrained() -> Self {
        Self::default()
    }

    /// From a list of half-spaces.
    pub fn new(halfspaces: Vec<HalfSpace>) -> Self {
        ConstraintSpace { halfspaces }
    }

    /// Whether there are no constraints.
    pub fn is_empty(&self) -> bool {
        self.halfspaces.is_empty()
    }

    /// Whether the point (aligned with `criteria`) satisfies every half-space.
    pub fn contains(&self, criteria: &[String], point: &[f64]) -> Result<bool> {
        let dense = self.resolve(criteria)?;
        Ok(dense.contains(point))
    }

    pub(crate) fn resolve(&self, criteria: &[String]) -> Result<DenseConstraints> {
        let mut rows = Vec::with_capacity(self.halfspaces.len());
        for hs in &self.halfspaces {
            let mut row = alloc::vec![0.0; criteria.len()];
            for (id, &a) in &hs.coeffs {
                let c = criteria.iter().position(|k| k == id).ok_or_else(|| {
                    Error::Config(format!("constraint references unknown criterion `{id}`"))
                })?;
                row[c] += a;
            }
            rows.push((row, hs.bound));
        }
        Ok(DenseConstraints { rows })
    }
}

impl DenseConstraints {
    pub(crate) fn contains(&self, point: &[f64]) -> bool {
        self.rows
            .iter()
            .all(|(a, b)| dot_skip_zero(a, point) <= *b)
    }

    /// Corner test: each half-space is checked at the box corner that
    /// maximises (worst) and minimises (best) `a · e`.
    pub(crate) fn classify(&self, cells: &[Interval]) -> Feasibility {
        let mut all_satisfied = true;
        for (a, b) in &self.rows {
            let mut worst = 0.0;
            let mut best = 0.0;
            for (&ac, iv) in a.iter().zip(cells) {
                if ac > 0.0 {
                    worst += ac * iv.hi;
                    best += ac * iv.lo;
                } else if ac < 0.0 {
                    worst += ac * iv.lo;
                    best += ac * iv.hi;
                }
            }
            if best > *b {
                return Feasibility::CertainlyInfeasible;
            }
            if worst > *b {
                all_satisfied = false;
            }
        }
        if all_satisfied {
            Feasibility::CertainlyFeasible
        } else {
            Feasibility::PossiblyFeasible
        }
    }
}
