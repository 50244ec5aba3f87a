use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Dense table of criterion evaluations `v[codec][criterion][sample]`.
///
/// Cell `(h, c, i)` holds `c(x_i, h(x_i))`: the value of criterion `c` when
/// codec `h` encodes sample `x_i`. The sample axis is ordered, and the order
/// matters: the EMD statistic assigns alternating signs by position.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionMatrix {
    codecs: Vec<String>,
    criteria: Vec<String>,
    samples: Vec<String>,
    // (codec, criterion) rows, each contiguous over samples
    values: Vec<f64>,
}

fn check_ids(axis: &str, ids: &[String]) -> Result<()> {
    if ids.is_empty() {
        return Err(Error::InvalidMatrix(format!("{axis} axis is empty")));
    }
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::InvalidMatrix(format!("duplicate {axis} id `{id}`")));
        }
    }
    Ok(())
}

impl CriterionMatrix {
    /// Builds a matrix from a flat value buffer laid out as
    /// `((codec * n_criteria) + criterion) * n_samples + sample`.
    pub fn new(
        codecs: Vec<String>,
        criteria: Vec<String>,
        samples: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_ids("codec", &codecs)?;
        check_ids("criterion", &criteria)?;
        check_ids("sample", &samples)?;
        let expected = codecs.len() * criteria.len() * samples.len();
        if values.len() != expected {
            return Err(Error::InvalidMatrix(format!(
                "expected {expected} values, got {}",
                values.len()
            )));
        }
        let m = Self {
            codecs,
            criteria,
            samples,
            values,
        };
        if let Some((h, c, i)) = m.find_cell(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite value {} at codec `{}`, criterion `{}`, sample `{}`",
                m.value(h, c, i),
                m.codecs[h],
                m.criteria[c],
                m.samples[i]
            )));
        }
        Ok(m)
    }

    /// Builds a matrix by evaluating `f(codec, criterion, sample)` on every cell.
    pub fn from_fn(
        codecs: Vec<String>,
        criteria: Vec<String>,
        samples: Vec<String>,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let (nh, nc, m) = (codecs.len(), criteria.len(), samples.len());
        let mut values = Vec::with_capacity(nh * nc * m);
        for h in 0..nh {
            for c in 0..nc {
                for i in 0..m {
                    values.push(f(h, c, i));
                }
            }
        }
        Self::new(codecs, criteria, samples, values)
    }

    /// Codec identifiers, in axis order.
    pub fn codecs(&self) -> &[String] {
        &self.codecs
    }

    /// Criterion identifiers, in axis order.
    pub fn criteria(&self) -> &[String] {
        &self.criteria
    }

    /// Sample identifiers, in axis order.
    pub fn samples(&self) -> &[String] {
        &self.samples
    }

    /// Number of codecs.
    pub fn n_codecs(&self) -> usize {
        self.codecs.len()
    }

    /// Number of criteria.
    pub fn n_criteria(&self) -> usize {
        self.criteria.len()
    }

    /// Number of samples `m`.
    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    /// Index of a codec id.
    pub fn codec_index(&self, id: &str) -> Option<usize> {
        self.codecs.iter().position(|c| c == id)
    }

    /// Index of a criterion id.
    pub fn criterion_index(&self, id: &str) -> Option<usize> {
        self.criteria.iter().position(|c| c == id)
    }

    /// All sample values of one (codec, criterion) pair.
    pub fn series(&self, codec: usize, criterion: usize) -> &[f64] {
        let m = self.n_samples();
        let start = (codec * self.n_criteria() + criterion) * m;
        &self.values[start..start + m]
    }

    /// One cell.
    pub fn value(&self, codec: usize, criterion: usize, sample: usize) -> f64 {
        self.series(codec, criterion)[sample]
    }

    /// Raw value buffer in `(codec, criterion, sample)` order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn find_cell(&self, pred: impl Fn(f64) -> bool) -> Option<(usize, usize, usize)> {
        let m = self.n_samples();
        let nc = self.n_criteria();
        self.values.iter().position(|&v| pred(v)).map(|k| {
            let i = k % m;
            let row = k / m;
            (row / nc, row % nc, i)
        })
    }

    /// Checks that every cell lies in `[0, 1]`, naming the first offender.
    pub fn check_unit_bounded(&self) -> Result<()> {
        match self.find_cell(|v| !(0.0..=1.0).contains(&v)) {
            None => Ok(()),
            Some((h, c, i)) => Err(Error::Domain {
                codec: self.codecs[h].clone(),
                criterion: self.criteria[c].clone(),
                sample: i,
                value: self.value(h, c, i),
            }),
        }
    }

    /// Copy restricted to a contiguous range of samples.
    pub fn sample_range(&self, range: Range<usize>) -> Result<Self> {
        if range.end > self.n_samples() || range.is_empty() {
            return Err(Error::InvalidMatrix(format!(
                "sample range {}..{} invalid for {} samples",
                range.start,
                range.end,
                self.n_samples()
            )));
        }
        let samples = self.samples[range.clone()].to_vec();
        Self::from_fn(
            self.codecs.clone(),
            self.criteria.clone(),
            samples,
            |h, c, i| self.value(h, c, range.start + i),
        )
    }

    /// Copy with the sample axis reordered: new sample `k` is old sample `order[k]`.
    pub fn permute_samples(&self, order: &[usize]) -> Result<Self> {
        let m = self.n_samples();
        let mut seen = alloc::vec![false; m];
        if order.len() != m || order.iter().any(|&k| k >= m || core::mem::replace(&mut seen[k], true)) {
            return Err(Error::InvalidMatrix("sample order is not a permutation".into()));
        }
        let samples = order.iter().map(|&k| self.samples[k].clone()).collect();
        Self::from_fn(
            self.codecs.clone(),
            self.criteria.clone(),
            samples,
            |h, c, i| self.value(h, c, order[i]),
        )
    }

    /// Copy with an extra criterion `<id>^2` holding the squared values of
    /// `criterion`. Intervals on the pair give variance intervals through
    /// [`crate::bounds::variance_interval`].
    pub fn with_squared_criterion(&self, criterion: usize) -> Result<Self> {
        let name = format!("{}^2", self.criteria[criterion]);
        if self.criterion_index(&name).is_some() {
            return Err(Error::InvalidMatrix(format!("criterion `{name}` already present")));
        }
        let nc = self.n_criteria();
        let mut criteria = self.criteria.clone();
        criteria.push(name);
        Self::from_fn(self.codecs.clone(), criteria, self.samples.clone(), |h, c, i| {
            if c < nc {
                self.value(h, c, i)
            } else {
                let v = self.value(h, criterion, i);
                v * v
            }
        })
    }
}
