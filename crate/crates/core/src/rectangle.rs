use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bounds::BoundMethod;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::objective::{objective_range, ConstraintSpace, Feasibility, Objective};

/// Per-(codec, criterion) confidence intervals for the true criterion means.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceRectangle {
    codecs: Vec<String>,
    criteria: Vec<String>,
    cells: Vec<Interval>,
    /// Failure probability the rectangle was built for.
    pub delta: f64,
    /// Interval construction used.
    pub method: BoundMethod,
    /// Half-width `ε_c` of the last construction step, per criterion.
    pub epsilons: Vec<f64>,
}

impl ConfidenceRectangle {
    /// Assembles a rectangle from dense `(codec, criterion)` cells.
    pub fn new(
        codecs: Vec<String>,
        criteria: Vec<String>,
        cells: Vec<Interval>,
        delta: f64,
        method: BoundMethod,
        epsilons: Vec<f64>,
    ) -> Result<Self> {
        if cells.len() != codecs.len() * criteria.len() || epsilons.len() != criteria.len() {
            return Err(Error::InvalidMatrix("rectangle dimensions do not match ids".into()));
        }
        if let Some(iv) = cells.iter().find(|iv| iv.lo.is_nan() || iv.hi.is_nan() || iv.lo > iv.hi) {
            return Err(Error::InconsistentIntervals { lo: iv.lo, hi: iv.hi });
        }
        Ok(ConfidenceRectangle {
            codecs,
            criteria,
            cells,
            delta,
            method,
            epsilons,
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

    /// Interval for `(codec, criterion)` by index.
    pub fn interval(&self, codec: usize, criterion: usize) -> Interval {
        self.cells[codec * self.criteria.len() + criterion]
    }

    /// Interval for `(codec, criterion)` by id.
    pub fn get(&self, codec: &str, criterion: &str) -> Option<Interval> {
        let h = self.codecs.iter().position(|k| k == codec)?;
        let c = self.criteria.iter().position(|k| k == criterion)?;
        Some(self.interval(h, c))
    }

    /// All intervals for one codec, in criterion order.
    pub fn codec_box(&self, codec: usize) -> &[Interval] {
        let nc = self.criteria.len();
        &self.cells[codec * nc..(codec + 1) * nc]
    }

    pub(crate) fn codec_box_mut(&mut self, codec: usize) -> &mut [Interval] {
        let nc = self.criteria.len();
        &mut self.cells[codec * nc..(codec + 1) * nc]
    }

    /// Dense cells in `(codec, criterion)` order.
    pub fn cells(&self) -> &[Interval] {
        &self.cells
    }

    /// Mean interval width over all cells.
    pub fn mean_width(&self) -> f64 {
        self.cells.iter().map(Interval::width).sum::<f64>() / self.cells.len() as f64
    }

    fn codec_position(&self, codec: &str) -> Result<usize> {
        self.codecs
            .iter()
            .position(|k| k == codec)
            .ok_or_else(|| Error::Config(format!("rectangle has no intervals for codec `{codec}`")))
    }
}

/// Range of `V` over codec `codec`'s box: `(Σ w·lo, Σ w·hi)`.
pub fn objective_interval(
    rect: &ConfidenceRectangle,
    obj: &Objective,
    codec: &str,
) -> Result<Interval> {
    let h = rect.codec_position(codec)?;
    let w = obj.resolve(rect.criteria())?;
    Ok(objective_range(&w, rect.codec_box(h)))
}

/// Classifies codec `codec`'s box against the constraint space.
pub fn rectangle_vs_constraints(
    rect: &ConfidenceRectangle,
    codec: &str,
    constraints: &ConstraintSpace,
) -> Result<Feasibility> {
    let h = rect.codec_position(codec)?;
    let dense = constraints.resolve(rect.criteria())?;
    Ok(dense.classify(rect.codec_box(h)))
}
