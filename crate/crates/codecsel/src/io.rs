//! Long-form matrix files.
//!
//! A matrix file is UTF-8 comma-separated text with the header
//! `sample_id,codec_id,criterion_id,value` and one cell per line. Codec,
//! criterion and sample axes are ordered by first appearance. Sample order is
//! part of the format: the EMD bounds pair consecutive samples, so reordering
//! the lines can change the intervals. Use [`shuffle_samples`] to apply a
//! seeded permutation instead of relying on file order.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use codecsel_core::CriterionMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

/// Required header fields, in order.
pub const MATRIX_HEADER: [&str; 4] = ["sample_id", "codec_id", "criterion_id", "value"];

const MAX_LISTED_MISSING: usize = 10;

struct Axis {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Axis {
    fn new() -> Self {
        Axis {
            ids: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn intern(&mut self, id: &str) -> usize {
        if let Some(&k) = self.index.get(id) {
            return k;
        }
        let k = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), k);
        k
    }
}

/// Reads a matrix from long-form text. `source` names the input in messages.
pub fn read_matrix<R: Read>(reader: R, source: &str) -> Result<CriterionMatrix, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("{source}: {e}")))?;
    if header.iter().ne(MATRIX_HEADER) {
        return Err(CliError::Input(format!(
            "{source}: header must be `{}`, found `{}`",
            MATRIX_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let (mut samples, mut codecs, mut criteria) = (Axis::new(), Axis::new(), Axis::new());
    let mut cells: HashMap<(usize, usize, usize), f64> = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Input(format!("{source}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        let value_text = &record[3];
        let value: f64 = value_text.parse().map_err(|_| {
            CliError::Input(format!("{source}:{line}: value `{value_text}` is not a number"))
        })?;
        if !value.is_finite() {
            return Err(CliError::Input(format!("{source}:{line}: value `{value_text}` is not finite")));
        }
        let key = (
            samples.intern(&record[0]),
            codecs.intern(&record[1]),
            criteria.intern(&record[2]),
        );
        if cells.insert(key, value).is_some() {
            return Err(CliError::Input(format!(
                "{source}:{line}: duplicate cell (sample `{}`, codec `{}`, criterion `{}`)",
                &record[0], &record[1], &record[2]
            )));
        }
    }
    if cells.is_empty() {
        return Err(CliError::Input(format!("{source}: no data rows")));
    }

    let (nh, nc, m) = (codecs.ids.len(), criteria.ids.len(), samples.ids.len());
    let expected = nh * nc * m;
    if cells.len() != expected {
        let mut missing = Vec::new();
        'scan: for i in 0..m {
            for h in 0..nh {
                for c in 0..nc {
                    if !cells.contains_key(&(i, h, c)) {
                        missing.push(format!(
                            "({}, {}, {})",
                            samples.ids[i], codecs.ids[h], criteria.ids[c]
                        ));
                        if missing.len() == MAX_LISTED_MISSING {
                            break 'scan;
                        }
                    }
                }
            }
        }
        return Err(CliError::Input(format!(
            "{source}: {} of {expected} (sample, codec, criterion) cells missing, e.g. {}",
            expected - cells.len(),
            missing.join(", ")
        )));
    }

    Ok(CriterionMatrix::from_fn(codecs.ids, criteria.ids, samples.ids, |h, c, i| {
        cells[&(i, h, c)]
    })?)
}

/// Reads a matrix file.
pub fn load_matrix(path: &Path) -> Result<CriterionMatrix, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_matrix(std::io::BufReader::new(file), &path.display().to_string())
}

/// Writes a matrix as long-form text, sample-major. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_matrix<W: Write>(matrix: &CriterionMatrix, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(MATRIX_HEADER)?;
    for (i, s) in matrix.samples().iter().enumerate() {
        for (h, codec) in matrix.codecs().iter().enumerate() {
            for (c, criterion) in matrix.criteria().iter().enumerate() {
                let v = matrix.value(h, c, i).to_string();
                w.write_record([s.as_str(), codec, criterion, &v])?;
            }
        }
    }
    w.flush()
}

/// Writes a matrix file.
pub fn save_matrix(matrix: &CriterionMatrix, path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_matrix(matrix, std::io::BufWriter::new(file)).map_err(|e| CliError::io(path, e))
}

/// Applies a seeded random permutation to the sample axis.
pub fn shuffle_samples(matrix: &CriterionMatrix, seed: u64) -> Result<CriterionMatrix, CliError> {
    let mut order: Vec<usize> = (0..matrix.n_samples()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(matrix.permute_samples(&order)?)
}
