//! Turning raw experiment episodes into the inverse-map training set.
//!
//! An episode is one experiment's input/output record. Episodes are sliced
//! into regressor/target pairs with the fixed layout
//! `[y-history; u-history; y(t); y(t+1)] -> u(t)`, datasets from several
//! experiments are concatenated, and both episodes and datasets round-trip
//! through delimited text files.
//!
//! Time is 0-based here: an episode of length `N` holds samples
//! `t = 0..N-1`, and produces one pair for each `t` in `n-1..=N-2`.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use rand::SeedableRng;
use thiserror::Error;

use crate::gp::TrainingPair;
use crate::plant::{NormalFormPlant, PlantError, PlantState};

/// The seedable generator used for every sampled quantity in this crate.
/// Fixing the concrete type keeps sampled experiments reproducible across
/// machines; callers split streams by deriving one seed per episode.
pub type EpisodeRng = rand_chacha::ChaCha8Rng;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("episode {id}: inputs ({inputs}) and outputs ({outputs}) differ in length")]
    LengthMismatch {
        id: String,
        inputs: usize,
        outputs: usize,
    },
    #[error("episode too short: length {length} must exceed the plant dimension {n}")]
    EpisodeTooShort { length: usize, n: usize },
    #[error("window length mismatch for {window}: expected {expected}, got {actual}")]
    WindowLength {
        window: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("regressor length mismatch: expected {expected} (= 2n), got {actual}")]
    RegressorLength { expected: usize, actual: usize },
    #[error("cannot union datasets with different plant dimensions: {expected} vs {actual}")]
    MixedDimensions { expected: usize, actual: usize },
    #[error("episode collection failed at step {step}: {source}")]
    Collection {
        step: usize,
        #[source]
        source: PlantError,
    },
    #[error("dataset file: {0}")]
    FileFormat(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One experiment's raw record: `inputs[t] = u(t)` and `outputs[t] = y(t)`
/// for `t = 0..len-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub id: String,
    pub inputs: Vec<f64>,
    pub outputs: Vec<f64>,
}

impl Episode {
    pub fn new(
        id: impl Into<String>,
        inputs: Vec<f64>,
        outputs: Vec<f64>,
    ) -> Result<Self, DataError> {
        let id = id.into();
        if inputs.len() != outputs.len() {
            return Err(DataError::LengthMismatch {
                id,
                inputs: inputs.len(),
                outputs: outputs.len(),
            });
        }
        Ok(Self {
            id,
            inputs,
            outputs,
        })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

/// Training pairs for a plant of known dimension; every regressor has
/// length `2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    pairs: Vec<TrainingPair>,
}

impl Dataset {
    pub fn empty(n: usize) -> Self {
        Self { n, pairs: Vec::new() }
    }

    pub fn from_pairs(n: usize, pairs: Vec<TrainingPair>) -> Result<Self, DataError> {
        for p in &pairs {
            if p.regressor.len() != 2 * n {
                return Err(DataError::RegressorLength {
                    expected: 2 * n,
                    actual: p.regressor.len(),
                });
            }
        }
        Ok(Self { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn regressor_dim(&self) -> usize {
        2 * self.n
    }

    pub fn pairs(&self) -> &[TrainingPair] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<TrainingPair> {
        self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Stacks one regressor `[y(t-n+1..t-1); u(t-n+1..t-1); y(t); y(t+1)]`.
///
/// `y_window` holds `y(t-n+1)..=y(t+1)` oldest first (length `n+1`) and
/// `u_window` holds `u(t-n+1)..=u(t-1)` oldest first (length `n-1`); the
/// plant dimension is implied by the window lengths.
pub fn build_regressor(y_window: &[f64], u_window: &[f64]) -> Result<Vec<f64>, DataError> {
    let n = u_window.len() + 1;
    if y_window.len() != n + 1 {
        return Err(DataError::WindowLength {
            window: "y_window",
            expected: n + 1,
            actual: y_window.len(),
        });
    }
    let mut xi = Vec::with_capacity(2 * n);
    xi.extend_from_slice(&y_window[..n - 1]);
    xi.extend_from_slice(u_window);
    xi.push(y_window[n - 1]);
    xi.push(y_window[n]);
    Ok(xi)
}

/// Slices an episode into its `N - n` training pairs, in time order: the
/// pair at time `t` has regressor `[y(t-n+1..t-1); u(t-n+1..t-1); y(t);
/// y(t+1)]` and target `u(t)`, for `t = n-1..=N-2`.
pub fn episode_to_pairs(ep: &Episode, n: usize) -> Result<Vec<TrainingPair>, DataError> {
    if ep.len() <= n {
        return Err(DataError::EpisodeTooShort {
            length: ep.len(),
            n,
        });
    }
    let mut pairs = Vec::with_capacity(ep.len() - n);
    for t in (n - 1)..=(ep.len() - 2) {
        let start = t + 1 - n;
        let regressor = build_regressor(
            &ep.outputs[start..=t + 1],
            &ep.inputs[start..t],
        )?;
        pairs.push(TrainingPair::new(regressor, ep.inputs[t]));
    }
    Ok(pairs)
}

/// [`episode_to_pairs`] packaged as a dataset.
pub fn episode_to_dataset(ep: &Episode, n: usize) -> Result<Dataset, DataError> {
    Ok(Dataset {
        n,
        pairs: episode_to_pairs(ep, n)?,
    })
}

/// Concatenates datasets in order. The plant dimension is an explicit
/// argument so that an empty union is well defined; any dataset with a
/// different dimension is an error.
pub fn union(n: usize, datasets: impl IntoIterator<Item = Dataset>) -> Result<Dataset, DataError> {
    let mut pairs = Vec::new();
    for ds in datasets {
        if ds.n != n {
            return Err(DataError::MixedDimensions {
                expected: n,
                actual: ds.n,
            });
        }
        pairs.extend(ds.pairs);
    }
    Ok(Dataset { n, pairs })
}

/// Runs one open-loop experiment: the initial state comes from
/// `init_sampler`, every input from `input_sampler`, and the recorded
/// outputs are the plant's responses. Deterministic for a fixed seed; the
/// draw order is `init`, then `u(0), u(1), ...` interleaved with stepping.
/// The episode id is derived from the seed.
pub fn collect_episode(
    plant: &NormalFormPlant,
    mut input_sampler: impl FnMut(&mut EpisodeRng) -> f64,
    mut init_sampler: impl FnMut(&mut EpisodeRng) -> PlantState,
    length: usize,
    seed: u64,
) -> Result<Episode, DataError> {
    if length <= plant.dim() {
        return Err(DataError::EpisodeTooShort {
            length,
            n: plant.dim(),
        });
    }
    let mut rng = EpisodeRng::seed_from_u64(seed);
    let mut state = init_sampler(&mut rng);
    let mut inputs = Vec::with_capacity(length);
    let mut outputs = Vec::with_capacity(length);
    outputs.push(state.y);
    for step in 0..length - 1 {
        let u = input_sampler(&mut rng);
        state = plant
            .step(&state, u)
            .map_err(|source| DataError::Collection { step, source })?;
        if !state.is_finite() {
            return Err(DataError::Collection {
                step,
                source: PlantError::NonFinite {
                    component: "output",
                    step,
                },
            });
        }
        inputs.push(u);
        outputs.push(state.y);
    }
    // the final input is recorded for completeness but never applied
    inputs.push(input_sampler(&mut rng));
    Episode::new(format!("seed-{seed}"), inputs, outputs)
}

/// Uniform scalar sampler over `[lo, hi]`.
pub fn uniform_sampler(lo: f64, hi: f64) -> impl FnMut(&mut EpisodeRng) -> f64 {
    use rand::Rng;
    move |rng| rng.random_range(lo..=hi)
}

/// Uniform initial-condition sampler: `y` first, then each component of `z`.
pub fn uniform_state_sampler(lo: f64, hi: f64, n: usize) -> impl FnMut(&mut EpisodeRng) -> PlantState {
    use rand::Rng;
    move |rng| {
        let y = rng.random_range(lo..=hi);
        let z = (0..n - 1).map(|_| rng.random_range(lo..=hi)).collect();
        PlantState::new(y, z)
    }
}

/// Writes a dataset as delimited text: one comment line carrying `n`, a
/// header row naming the columns, then one row per pair at full precision.
pub fn write_dataset(ds: &Dataset, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "# mrgpr-dataset n={}", ds.n)?;
    let mut header = Vec::new();
    for i in 1..ds.n {
        header.push(format!("y_hist_{i}"));
    }
    for i in 1..ds.n {
        header.push(format!("u_hist_{i}"));
    }
    header.push("y_t".to_string());
    header.push("y_next".to_string());
    header.push("target".to_string());
    writeln!(w, "{}", header.join(","))?;
    for p in &ds.pairs {
        let mut row: Vec<String> = p.regressor.iter().map(|v| crate::gp::fmt_f64(*v)).collect();
        row.push(crate::gp::fmt_f64(p.target));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Parses a dataset written by [`write_dataset`].
pub fn read_dataset(r: impl BufRead) -> Result<Dataset, DataError> {
    let mut lines = r.lines();
    let meta = lines
        .next()
        .ok_or_else(|| DataError::FileFormat("empty file".to_string()))??;
    let n = parse_meta_n(&meta)?;
    let _header = lines
        .next()
        .ok_or_else(|| DataError::FileFormat("missing header row".to_string()))??;
    let mut pairs = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values = parse_csv_floats(&line, lineno + 3)?;
        if values.len() != 2 * n + 1 {
            return Err(DataError::FileFormat(format!(
                "line {}: expected {} columns, got {}",
                lineno + 3,
                2 * n + 1,
                values.len()
            )));
        }
        let target = values[2 * n];
        pairs.push(TrainingPair::new(values[..2 * n].to_vec(), target));
    }
    Ok(Dataset { n, pairs })
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut buf = Vec::new();
    write_dataset(ds, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let file = fs::File::open(path)?;
    read_dataset(io::BufReader::new(file))
}

/// Writes an episode with columns `(t, u, y)` in the dataset file style.
pub fn write_episode(ep: &Episode, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "# mrgpr-episode id={}", ep.id)?;
    writeln!(w, "t,u,y")?;
    for t in 0..ep.len() {
        writeln!(
            w,
            "{t},{},{}",
            crate::gp::fmt_f64(ep.inputs[t]),
            crate::gp::fmt_f64(ep.outputs[t])
        )?;
    }
    Ok(())
}

/// Parses an episode written by [`write_episode`].
pub fn read_episode(r: impl BufRead) -> Result<Episode, DataError> {
    let mut lines = r.lines();
    let meta = lines
        .next()
        .ok_or_else(|| DataError::FileFormat("empty file".to_string()))??;
    let id = meta
        .trim()
        .strip_prefix("# mrgpr-episode id=")
        .ok_or_else(|| DataError::FileFormat(format!("unexpected episode header {meta:?}")))?
        .to_string();
    let _header = lines
        .next()
        .ok_or_else(|| DataError::FileFormat("missing header row".to_string()))??;
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values = parse_csv_floats(&line, lineno + 3)?;
        if values.len() != 3 {
            return Err(DataError::FileFormat(format!(
                "line {}: expected 3 columns, got {}",
                lineno + 3,
                values.len()
            )));
        }
        inputs.push(values[1]);
        outputs.push(values[2]);
    }
    Episode::new(id, inputs, outputs)
}

pub fn save_episode(ep: &Episode, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut buf = Vec::new();
    write_episode(ep, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_episode(path: impl AsRef<Path>) -> Result<Episode, DataError> {
    let file = fs::File::open(path)?;
    read_episode(io::BufReader::new(file))
}

fn parse_meta_n(line: &str) -> Result<usize, DataError> {
    line.trim()
        .strip_prefix("# mrgpr-dataset n=")
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| DataError::FileFormat(format!("unexpected dataset header {line:?}")))
}

fn parse_csv_floats(line: &str, lineno: usize) -> Result<Vec<f64>, DataError> {
    line.split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|_| {
                DataError::FileFormat(format!("line {lineno}: cannot parse float {tok:?}"))
            })
        })
        .collect()
}
