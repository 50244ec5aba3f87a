//! Run configuration: flat `key = value` files, command-line overrides and
//! the objective, constraint and world-spec mini-languages.
//!
//! ```text
//! # comment
//! input.matrix = data/matrix.csv
//! bound.method = hoeffding
//! bound.delta = 0.05
//! objective.weights = size:0.5, distortion:0.5
//! constraints = distortion <= 0.3, 2*size - distortion <= 1
//! ```
//!
//! A world spec assigns a distribution to every (codec, criterion) pair with
//! keys `world.<codec>.<criterion>`; codec and criterion ids therefore cannot
//! contain `.`. Relative paths are resolved against the file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use codecsel_core::gs::GsConfig;
use codecsel_core::psp::PspConfig;
use codecsel_core::{BoundMethod, ConstraintSpace, CriterionMatrix, HalfSpace, Objective};

use crate::error::CliError;
use crate::io::{load_matrix, shuffle_samples};
use crate::synth::{CellDistribution, SyntheticWorld};

/// Initial PSP batch size used when none is configured.
pub const DEFAULT_S0: usize = 25;

const KNOWN_KEYS: &[&str] = &[
    "input.matrix",
    "input.world",
    "input.samples",
    "input.shuffle",
    "run.seed",
    "bound.method",
    "bound.delta",
    "psp.epsilon",
    "psp.s0",
    "objective.weights",
    "constraints",
    "output.dir",
    "coverage.trials",
    "coverage.algorithm",
];

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    /// Dotted key.
    pub key: String,
    /// Raw value, trimmed.
    pub value: String,
    /// 1-based line number.
    pub line: usize,
}

/// Parsed key-value file, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KvFile {
    /// Entries in file order.
    pub entries: Vec<Entry>,
    /// Directory relative paths are resolved against.
    pub base: PathBuf,
    /// Name used in messages.
    pub source: String,
}

impl KvFile {
    /// Parses `key = value` lines. Blank lines and lines starting with `#` are
    /// skipped; repeated keys are rejected.
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let mut entries: Vec<Entry> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{source}:{line}: expected `key = value`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::Config(format!("{source}:{line}: empty key")));
            }
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                return Err(CliError::Config(format!(
                    "{source}:{line}: key `{key}` already set on line {}",
                    prev.line
                )));
            }
            entries.push(Entry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        Ok(KvFile {
            entries,
            base: PathBuf::new(),
            source: source.to_string(),
        })
    }

    /// Reads and parses a file; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut kv = Self::parse(&text, &path.display().to_string())?;
        kv.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(kv)
    }

    /// Value of `key`, if present.
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|e| self.base.join(&e.value))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|e| {
                e.value.parse().map_err(|_| {
                    CliError::Config(format!(
                        "{}:{}: `{key}` must be {what}, got `{}`",
                        self.source, e.line, e.value
                    ))
                })
            })
            .transpose()
    }

    fn check_run_keys(&self) -> Result<(), CliError> {
        for e in &self.entries {
            if !KNOWN_KEYS.contains(&e.key.as_str()) && !e.key.starts_with("world.") {
                return Err(CliError::Config(format!(
                    "{}:{}: unknown key `{}`",
                    self.source, e.line, e.key
                )));
            }
        }
        Ok(())
    }

    fn has_world_keys(&self) -> bool {
        self.entries.iter().any(|e| e.key.starts_with("world."))
    }
}

/// Parses `criterion:weight[,criterion:weight…]`.
pub fn parse_objective(text: &str) -> Result<Objective, CliError> {
    let mut weights = BTreeMap::new();
    for part in text.split(',') {
        let (id, w) = part
            .split_once(':')
            .ok_or_else(|| CliError::Config(format!("objective term `{}` must be `criterion:weight`", part.trim())))?;
        let id = id.trim();
        let w: f64 = w
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("objective weight `{}` is not a number", w.trim())))?;
        if id.is_empty() {
            return Err(CliError::Config("objective term with empty criterion".into()));
        }
        *weights.entry(id.to_string()).or_insert(0.0) += w;
    }
    Ok(Objective::new(weights)?)
}

fn is_number_prefix(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|ch| ch.is_ascii_digit() || ch == '.')
}

/// Splits a linear expression into signed terms. A `+`/`-` starts a new term
/// unless it follows `*` or is an exponent sign inside a coefficient.
fn split_terms(expr: &str) -> Vec<(f64, String)> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut cur = String::new();
    for ch in expr.chars() {
        let exponent = cur.ends_with(['e', 'E']) && is_number_prefix(&cur[..cur.len() - 1]);
        if (ch == '+' || ch == '-') && !cur.ends_with('*') && !exponent {
            if !cur.is_empty() {
                terms.push((sign, std::mem::take(&mut cur)));
                sign = 1.0;
            }
            if ch == '-' {
                sign = -sign;
            }
        } else {
            cur.push(ch);
        }
    }
    terms.push((sign, cur));
    terms
}

/// Parses a constraint `a1*c1 + a2*c2 <= b` (or `>=`). Terms without a
/// coefficient have coefficient 1; repeated criteria are summed.
pub fn parse_constraint(text: &str) -> Result<HalfSpace, CliError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = |why: &str| CliError::Config(format!("constraint `{}`: {why}", text.trim()));
    let (lhs, rhs, flip) = if let Some((l, r)) = compact.split_once("<=") {
        (l, r, false)
    } else if let Some((l, r)) = compact.split_once(">=") {
        (l, r, true)
    } else {
        return Err(bad("expected `<=` or `>=`"));
    };
    let bound: f64 = rhs.parse().map_err(|_| bad("right-hand side must be a number"))?;
    if lhs.is_empty() {
        return Err(bad("empty left-hand side"));
    }
    let mut coeffs = BTreeMap::new();
    for (sign, term) in split_terms(lhs) {
        let (coeff, id) = match term.split_once('*') {
            Some((a, id)) => (a.parse::<f64>().map_err(|_| bad("bad coefficient"))?, id),
            None => (1.0, term.as_str()),
        };
        let valid_id = id
            .chars()
            .next()
            .is_some_and(|ch| ch.is_alphabetic() || ch == '_')
            && !id.contains(['*', '<', '>', '=']);
        if !valid_id {
            return Err(bad(&format!("`{term}` is not `coefficient*criterion`")));
        }
        *coeffs.entry(id.to_string()).or_insert(0.0) += sign * coeff;
    }
    let s = if flip { -1.0 } else { 1.0 };
    let coeffs = coeffs.into_iter().map(|(k, a)| (k, s * a)).collect();
    Ok(HalfSpace::new(coeffs, s * bound)?)
}

/// Parses a comma-separated list of constraints.
pub fn parse_constraints(text: &str) -> Result<Vec<HalfSpace>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_constraint)
        .collect()
}

/// Builds a world from `world.<codec>.<criterion> = distribution` entries.
/// Axes are ordered by first appearance; every pair must be present.
pub fn parse_world(kv: &KvFile) -> Result<SyntheticWorld, CliError> {
    let mut codecs: Vec<String> = Vec::new();
    let mut criteria: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(usize, usize), CellDistribution> = BTreeMap::new();
    for e in kv.entries.iter().filter(|e| e.key.starts_with("world.")) {
        let at = |msg: String| CliError::Config(format!("{}:{}: {msg}", kv.source, e.line));
        let parts: Vec<&str> = e.key.splitn(4, '.').collect();
        if parts.len() != 3 || parts[1].is_empty() || parts[2].is_empty() {
            return Err(at(format!("world key `{}` must be `world.<codec>.<criterion>`", e.key)));
        }
        let index = |axis: &mut Vec<String>, id: &str| {
            axis.iter().position(|x| x == id).unwrap_or_else(|| {
                axis.push(id.to_string());
                axis.len() - 1
            })
        };
        let h = index(&mut codecs, parts[1]);
        let c = index(&mut criteria, parts[2]);
        let d: CellDistribution = e.value.parse().map_err(at)?;
        cells.insert((h, c), d);
    }
    if codecs.is_empty() {
        return Err(CliError::Config(format!("{}: no `world.<codec>.<criterion>` entries", kv.source)));
    }
    let mut dense = Vec::with_capacity(codecs.len() * criteria.len());
    for (h, codec) in codecs.iter().enumerate() {
        for (c, criterion) in criteria.iter().enumerate() {
            match cells.get(&(h, c)) {
                Some(&d) => dense.push(d),
                None => {
                    return Err(CliError::Config(format!(
                        "{}: missing `world.{codec}.{criterion}`",
                        kv.source
                    )))
                }
            }
        }
    }
    SyntheticWorld::new(codecs, criteria, dense)
}

/// Writes a world in the form [`parse_world`] reads.
pub fn format_world(world: &SyntheticWorld) -> String {
    let mut out = String::new();
    for (h, codec) in world.codecs().iter().enumerate() {
        for (c, criterion) in world.criteria().iter().enumerate() {
            out.push_str(&format!("world.{codec}.{criterion} = {}\n", world.cell(h, c)));
        }
    }
    out
}

/// Loads a world file.
pub fn load_world(path: &Path) -> Result<SyntheticWorld, CliError> {
    parse_world(&KvFile::load(path)?)
}

/// Values given on the command line; each one present replaces the
/// corresponding file key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    /// Configuration file.
    pub config: Option<PathBuf>,
    /// `input.matrix`.
    pub matrix: Option<PathBuf>,
    /// `input.world`.
    pub world: Option<PathBuf>,
    /// `input.samples`.
    pub samples: Option<usize>,
    /// `input.shuffle` (set only, never cleared).
    pub shuffle: bool,
    /// `run.seed`.
    pub seed: Option<u64>,
    /// `bound.method`.
    pub method: Option<String>,
    /// `bound.delta`.
    pub delta: Option<f64>,
    /// `psp.epsilon`.
    pub epsilon: Option<f64>,
    /// `psp.s0`.
    pub s0: Option<usize>,
    /// `objective.weights`.
    pub objective: Option<String>,
    /// `constraints`; a nonempty list replaces the file's list.
    pub constraints: Vec<String>,
    /// `output.dir`.
    pub out: Option<PathBuf>,
    /// `coverage.trials`.
    pub trials: Option<usize>,
    /// `coverage.algorithm`.
    pub algorithm: Option<String>,
}

/// Where the criterion matrix comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    /// Long-form matrix file.
    Matrix(PathBuf),
    /// Synthetic world sampled with the run seed.
    World {
        /// World spec.
        world: SyntheticWorld,
        /// Samples to draw.
        samples: Option<usize>,
    },
}

/// Selection procedure for coverage runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmChoice {
    /// Global sampling.
    Gs,
    /// Progressive sampling with pruning.
    Psp,
}

/// Fully merged run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Data source, if any was given.
    pub input: Option<InputSpec>,
    /// Shuffle the sample axis before running.
    pub shuffle: bool,
    /// Seed for sampling and shuffling.
    pub seed: u64,
    /// Interval construction.
    pub method: Option<BoundMethod>,
    /// Failure probability.
    pub delta: Option<f64>,
    /// PSP tolerance.
    pub epsilon: Option<f64>,
    /// PSP initial batch size.
    pub s0: usize,
    /// Objective.
    pub objective: Option<Objective>,
    /// Constraint space.
    pub constraints: ConstraintSpace,
    /// Output directory.
    pub out: Option<PathBuf>,
    /// Coverage trials.
    pub trials: Option<usize>,
    /// Coverage procedure.
    pub algorithm: AlgorithmChoice,
}

fn missing(key: &str, flag: &str) -> CliError {
    CliError::Config(format!("`{key}` is required (config key or `--{flag}`)"))
}

impl RunConfig {
    /// Merges the optional config file with command-line overrides.
    pub fn resolve(o: &Overrides) -> Result<Self, CliError> {
        let kv = match &o.config {
            Some(p) => KvFile::load(p)?,
            None => KvFile::default(),
        };
        kv.check_run_keys()?;

        let matrix = o.matrix.clone().or_else(|| kv.path("input.matrix"));
        let world_path = o.world.clone().or_else(|| kv.path("input.world"));
        let inline_world = kv.has_world_keys() && o.world.is_none();
        let samples = match o.samples {
            Some(s) => Some(s),
            None => kv.parsed("input.samples", "a sample count")?,
        };
        let input = match (matrix, world_path, inline_world) {
            (Some(_), Some(_), _) | (Some(_), None, true) => {
                return Err(CliError::Config(
                    "give either a matrix or a world spec, not both".into(),
                ))
            }
            (Some(p), None, false) => Some(InputSpec::Matrix(p)),
            (None, Some(p), _) => Some(InputSpec::World {
                world: load_world(&p)?,
                samples,
            }),
            (None, None, true) => Some(InputSpec::World {
                world: parse_world(&kv)?,
                samples,
            }),
            (None, None, false) => None,
        };

        let method = match o.method.as_deref().or(kv.get("bound.method").map(|e| e.value.as_str())) {
            Some(s) => Some(s.parse::<BoundMethod>()?),
            None => None,
        };
        let objective = match o.objective.as_deref().or(kv.get("objective.weights").map(|e| e.value.as_str())) {
            Some(s) => Some(parse_objective(s)?),
            None => None,
        };
        let constraints = if !o.constraints.is_empty() {
            o.constraints
                .iter()
                .map(|c| parse_constraint(c))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            match kv.get("constraints") {
                Some(e) => parse_constraints(&e.value)?,
                None => Vec::new(),
            }
        };
        let shuffle = o.shuffle || kv.parsed::<bool>("input.shuffle", "true or false")?.unwrap_or(false);
        let algorithm = match o.algorithm.as_deref().or(kv.get("coverage.algorithm").map(|e| e.value.as_str())) {
            None | Some("gs") => AlgorithmChoice::Gs,
            Some("psp") => AlgorithmChoice::Psp,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "`coverage.algorithm` must be gs or psp, got `{other}`"
                )))
            }
        };

        Ok(RunConfig {
            input,
            shuffle,
            seed: match o.seed {
                Some(s) => s,
                None => kv.parsed("run.seed", "an unsigned integer")?.unwrap_or(0),
            },
            method,
            delta: match o.delta {
                Some(d) => Some(d),
                None => kv.parsed("bound.delta", "a number")?,
            },
            epsilon: match o.epsilon {
                Some(e) => Some(e),
                None => kv.parsed("psp.epsilon", "a number")?,
            },
            s0: match o.s0 {
                Some(s) => s,
                None => kv.parsed("psp.s0", "a batch size")?.unwrap_or(DEFAULT_S0),
            },
            objective,
            constraints: ConstraintSpace::new(constraints),
            out: o.out.clone().or_else(|| kv.path("output.dir")),
            trials: match o.trials {
                Some(t) => Some(t),
                None => kv.parsed("coverage.trials", "a trial count")?,
            },
            algorithm,
        })
    }

    fn method_or_err(&self) -> Result<BoundMethod, CliError> {
        self.method.ok_or_else(|| missing("bound.method", "method"))
    }

    fn objective_or_err(&self) -> Result<Objective, CliError> {
        self.objective.clone().ok_or_else(|| missing("objective.weights", "objective"))
    }

    /// Global sampling parameters.
    pub fn gs_config(&self) -> Result<GsConfig, CliError> {
        Ok(GsConfig::new(
            self.delta.ok_or_else(|| missing("bound.delta", "delta"))?,
            self.method_or_err()?,
            self.objective_or_err()?,
            self.constraints.clone(),
        ))
    }

    /// PSP parameters.
    pub fn psp_config(&self) -> Result<PspConfig, CliError> {
        Ok(PspConfig {
            s0: self.s0,
            epsilon: self.epsilon.ok_or_else(|| missing("psp.epsilon", "epsilon"))?,
            delta: self.delta.ok_or_else(|| missing("bound.delta", "delta"))?,
            method: self.method_or_err()?,
            objective: self.objective_or_err()?,
            constraints: self.constraints.clone(),
        })
    }

    /// The synthetic world and sample count, for commands that need one.
    pub fn world(&self) -> Result<(&SyntheticWorld, usize), CliError> {
        match &self.input {
            Some(InputSpec::World { world, samples }) => {
                Ok((world, samples.ok_or_else(|| missing("input.samples", "samples"))?))
            }
            _ => Err(CliError::Config("a world spec is required (`input.world` or `--world`)".into())),
        }
    }

    /// Loads or samples the criterion matrix, shuffled if requested.
    pub fn load_input(&self) -> Result<CriterionMatrix, CliError> {
        let matrix = match &self.input {
            Some(InputSpec::Matrix(p)) => load_matrix(p)?,
            Some(InputSpec::World { .. }) => {
                let (world, m) = self.world()?;
                world.sample_matrix(m, self.seed)?
            }
            None => {
                return Err(CliError::Config(
                    "no input: give `input.matrix` / `--matrix` or a world spec".into(),
                ))
            }
        };
        if self.shuffle {
            shuffle_samples(&matrix, self.seed)
        } else {
            Ok(matrix)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(h: &HalfSpace) -> Vec<(&str, f64)> {
        h.coeffs.iter().map(|(k, &v)| (k.as_str(), v)).collect()
    }

    #[test]
    fn kv_parsing() {
        let kv = KvFile::parse("# c\n\n a.b = 1 \nc = x, y\n", "f").unwrap();
        assert_eq!(kv.entries.len(), 2);
        assert_eq!(kv.get("a.b").unwrap().value, "1");
        assert_eq!(kv.get("c").unwrap().line, 4);
        assert!(KvFile::parse("a = 1\na = 2\n", "f").is_err());
        assert!(KvFile::parse("novalue\n", "f").is_err());
    }

    #[test]
    fn objective_parsing() {
        let o = parse_objective("c1:0.5, c2 : 2").unwrap();
        assert_eq!(o.weights().get("c1"), Some(&0.5));
        assert_eq!(o.weights().get("c2"), Some(&2.0));
        assert!(parse_objective("c1").is_err());
        assert!(parse_objective("c1:-1").is_err());
        assert!(parse_objective("c1:x").is_err());
    }

    #[test]
    fn constraint_parsing() {
        let h = parse_constraint("0.5*c1 + 2*c2 <= 0.3").unwrap();
        assert_eq!(coeffs(&h), vec![("c1", 0.5), ("c2", 2.0)]);
        assert_eq!(h.bound, 0.3);

        let h = parse_constraint("c1 - c2 - 1e-3*c3<=-0.5").unwrap();
        assert_eq!(coeffs(&h), vec![("c1", 1.0), ("c2", -1.0), ("c3", -1e-3)]);
        assert_eq!(h.bound, -0.5);

        let h = parse_constraint("2*c1 >= 0.4").unwrap();
        assert_eq!(coeffs(&h), vec![("c1", -2.0)]);
        assert_eq!(h.bound, -0.4);

        let h = parse_constraint("c1 + c1 + -2.5e+1*c2 <= 1").unwrap();
        assert_eq!(coeffs(&h), vec![("c1", 2.0), ("c2", -25.0)]);

        for bad in ["c1 < 0.3", "c1 <= x", "<= 1", "0.3 <= 1", "2*3 <= 1", "c1 * <= 1"] {
            assert!(parse_constraint(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn world_round_trip() {
        let text = "world.a.q = beta(2,5)\nworld.a.r = point(0.3)\nworld.b.q = uniform(0,1)\nworld.b.r = truncated_gaussian(0.4,0.1,0,1)\n";
        let w = parse_world(&KvFile::parse(text, "w").unwrap()).unwrap();
        assert_eq!(w.codecs(), ["a", "b"]);
        assert_eq!(w.criteria(), ["q", "r"]);
        let again = parse_world(&KvFile::parse(&format_world(&w), "w2").unwrap()).unwrap();
        assert_eq!(again, w);
    }

    #[test]
    fn incomplete_world_is_rejected() {
        let kv = KvFile::parse("world.a.q = point(0)\nworld.b.r = point(1)\n", "w").unwrap();
        assert!(parse_world(&kv).unwrap_err().to_string().contains("world.a.r"));
        let kv = KvFile::parse("world.a = point(0)\n", "w").unwrap();
        assert!(parse_world(&kv).is_err());
    }

    #[test]
    fn cli_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(
            &cfg,
            "input.matrix = m.csv\nbound.method = hoeffding\nbound.delta = 0.1\nobjective.weights = c:1\nconstraints = c <= 0.5, d <= 1\nrun.seed = 4\n",
        )
        .unwrap();
        let base = Overrides {
            config: Some(cfg.clone()),
            ..Overrides::default()
        };
        let rc = RunConfig::resolve(&base).unwrap();
        assert_eq!(rc.input, Some(InputSpec::Matrix(dir.path().join("m.csv"))));
        assert_eq!(rc.method, Some(BoundMethod::HoeffdingUnion));
        assert_eq!(rc.delta, Some(0.1));
        assert_eq!(rc.seed, 4);
        assert_eq!(rc.s0, DEFAULT_S0);
        assert_eq!(rc.constraints.halfspaces.len(), 2);

        let rc = RunConfig::resolve(&Overrides {
            delta: Some(0.2),
            method: Some("gaussian-chernoff".into()),
            constraints: vec!["c <= 0.9".into()],
            ..base.clone()
        })
        .unwrap();
        assert_eq!(rc.delta, Some(0.2));
        assert_eq!(rc.method, Some(BoundMethod::GaussianChernoffUnion));
        assert_eq!(rc.constraints.halfspaces.len(), 1);

        let err = RunConfig::resolve(&Overrides {
            world: Some(dir.path().join("w.cfg")),
            ..base
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::CONFIG);
    }

    #[test]
    fn unknown_key_and_bad_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        for text in ["bound.dleta = 0.1\n", "bound.delta = abc\n", "bound.method = fancy\n"] {
            let cfg = dir.path().join("x.cfg");
            std::fs::write(&cfg, text).unwrap();
            let err = RunConfig::resolve(&Overrides {
                config: Some(cfg),
                ..Overrides::default()
            })
            .unwrap_err();
            assert_eq!(err.exit_code(), crate::error::exit::CONFIG, "{text}");
        }
    }
}
