//! Exact Gaussian process regression with a squared-exponential kernel.
//!
//! The regression target is the scalar inverse-plant map, so everything here
//! is single-output: a training set of (regressor, input) pairs, a Gram
//! matrix factorized once by Cholesky, and posterior mean/variance queries
//! against the stored factor. Hyperparameters are set by maximizing the log
//! marginal likelihood with a monotone gradient ascent in log-parameter
//! space.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use ndarray_linalg::cholesky::{FactorizeCInto, InverseC, SolveC, UPLO};
use ndarray_linalg::error::LinalgError;
use thiserror::Error;

/// Pairwise squared distance below which two regressors count as duplicates.
pub const DUPLICATE_DISTANCE: f64 = 1e-12;

/// Bounds for log-scale hyperparameters during optimization.
const LOG_PARAM_MIN: f64 = -6.0;
const LOG_PARAM_MAX: f64 = 6.0;

#[derive(Debug, Error)]
pub enum GpError {
    #[error("dimension mismatch in {context}: expected length {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),
    #[error("cannot fit a GP on an empty training set")]
    EmptyTrainingSet,
    #[error(
        "Gram matrix is not positive definite (Cholesky failed at pivot {pivot} of {size}); \
         increase the jitter (currently {jitter:e})"
    )]
    NotPositiveDefinite {
        pivot: usize,
        size: usize,
        jitter: f64,
    },
    #[error("linear algebra backend error: {0}")]
    Backend(String),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Squared-exponential kernel hyperparameters.
///
/// `signal_std` is the prior standard deviation of the target (so the prior
/// variance is `signal_std^2`), `lengthscales` holds one positive scale per
/// regressor dimension, and `jitter` is the diagonal regularizer added to
/// the Gram matrix in variance units.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    signal_std: f64,
    lengthscales: Vec<f64>,
    jitter: f64,
}

impl Hyperparameters {
    pub fn new(signal_std: f64, lengthscales: Vec<f64>, jitter: f64) -> Result<Self, GpError> {
        if !(signal_std > 0.0) || !signal_std.is_finite() {
            return Err(GpError::InvalidHyperparameters(format!(
               "signal_std must be positive and finite, got {signal_std}"
            )));
        }
        if lengthscales.is_empty() {
            return Err(GpError::InvalidHyperparameters(
                "lengthscales must not be empty".to_string(),
            ));
        }
        if let Some(bad) = lengthscales.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(GpError::InvalidHyperparameters(format!(
                "every lengthscale must be positive and finite, got {bad}"
            )));
        }
        if !(jitter >= 0.0) || !jitter.is_finite() {
            return Err(GpError::InvalidHyperparameters(format!(
                "jitter must be nonnegative and finite, got {jitter}"
            )));
        }
        Ok(Self {
            signal_std,
            lengthscales,
            jitter,
        })
    }

    /// Normalization heuristic: `signal_std` from the standard deviation of
    /// the targets and each lengthscale from the standard deviation of its
    /// regressor dimension (1 whenever a deviation vanishes). The jitter
    /// defaults to `1e-8 * signal_std^2`.
    pub fn init_from_data(pairs: &[TrainingPair]) -> Result<Self, GpError> {
        let dim = check_pairs(pairs)?;
        let sf = {
            let s = std_dev(pairs.iter().map(|p| p.target));
            if s > 0.0 {
                s
            } else {
                1.0
            }
        };
        let lengthscales = (0..dim)
            .map(|q| {
                let s = std_dev(pairs.iter().map(|p| p.regressor[q]));
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self::new(sf, lengthscales, 1e-8 * sf * sf)
    }

    /// Same scales, different diagonal regularizer.
    pub fn with_jitter(&self, jitter: f64) -> Result<Self, GpError> {
        Self::new(self.signal_std, self.lengthscales.clone(), jitter)
    }

    pub fn signal_std(&self) -> f64 {
        self.signal_std
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_std * self.signal_std
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }
}

/// One supervised example for the inverse map.
///
/// The regressor layout is fixed crate-wide:
/// `[y-history (n-1, oldest first); u-history (n-1, oldest first); y(t); y(t+1)]`,
/// which has length `2n`. The target is the input `u(t)` that produced the
/// transition.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub regressor: Vec<f64>,
    pub target: f64,
}

impl TrainingPair {
    pub fn new(regressor: Vec<f64>, target: f64) -> Self {
        Self { regressor, target }
    }
}

/// Evaluates the squared-exponential kernel
/// `signal_std^2 * exp(-1/2 * sum_i (x_i - y_i)^2 / l_i^2)`.
///
/// The accumulation order is the same for `(x, y)` and `(y, x)`, so the
/// result is bit-for-bit symmetric.
pub fn se_kernel(x: &[f64], y: &[f64], hp: &Hyperparameters) -> Result<f64, GpError> {
    if x.len() != hp.dim() {
        return Err(GpError::DimensionMismatch {
            context: "se_kernel first argument vs lengthscales",
            expected: hp.dim(),
            actual: x.len(),
        });
    }
    if y.len() != hp.dim() {
        return Err(GpError::DimensionMismatch {
            context: "se_kernel second argument vs lengthscales",
            expected: hp.dim(),
            actual: y.len(),
        });
    }
    Ok(se_kernel_unchecked(x, y, hp))
}

#[inline]
fn se_kernel_unchecked(x: &[f64], y: &[f64], hp: &Hyperparameters) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        let d = (x[i] - y[i]) / hp.lengthscales[i];
        s += d * d;
    }
    hp.signal_variance() * (-0.5 * s).exp()
}

/// A trained GP: the training pairs, the lower Cholesky factor of
/// `K + jitter*I`, and the precomputed weights `alpha = (K + jitter*I)^-1 u`.
#[derive(Debug, Clone)]
pub struct GpModel {
    pairs: Vec<TrainingPair>,
    hp: Hyperparameters,
    chol: Array2<f64>,
    alpha: Array1<f64>,
}

impl GpModel {
    /// Factorizes the Gram matrix and precomputes the weight vector.
    ///
    /// Fails if the regularized Gram matrix is not numerically positive
    /// definite, e.g. when `jitter == 0` and two regressors coincide.
    pub fn fit(pairs: Vec<TrainingPair>, hp: Hyperparameters) -> Result<Self, GpError> {
        let dim = check_pairs(&pairs)?;
        if dim != hp.dim() {
            return Err(GpError::DimensionMismatch {
                context: "training regressors vs lengthscales",
                expected: hp.dim(),
                actual: dim,
            });
        }
        let targets = Array1::from_iter(pairs.iter().map(|p| p.target));
        let (chol, alpha) = factorize(&pairs, &targets, &hp)?;
        Ok(Self {
            pairs,
            hp,
            chol,
            alpha,
        })
    }

    /// Posterior mean `k(xi)^T alpha` at a test regressor.
    pub fn posterior_mean(&self, xi: &[f64]) -> Result<f64, GpError> {
        self.check_query(xi)?;
        let mut acc = 0.0;
        for (pair, a) in self.pairs.iter().zip(self.alpha.iter()) {
            acc += se_kernel_unchecked(&pair.regressor, xi, &self.hp) * a;
        }
        Ok(acc)
    }

    /// Posterior variance `k(xi,xi) - k(xi)^T (K + jitter*I)^-1 k(xi)`,
    /// clamped to zero from below to absorb round-off.
    pub fn posterior_var(&self, xi: &[f64]) -> Result<f64, GpError> {
        self.check_query(xi)?;
        let k_star = Array1::from_iter(
            self.pairs
                .iter()
                .map(|p| se_kernel_unchecked(&p.regressor, xi, &self.hp)),
        );
        // v = L^-1 k(xi) by forward substitution against the stored factor.
        let v = forward_substitute(&self.chol, &k_star);
        let prior = se_kernel_unchecked(xi, xi, &self.hp);
        Ok((prior - v.dot(&v)).max(0.0))
    }

    /// Log marginal likelihood of the training targets under the fitted
    /// hyperparameters, reusing the stored factor.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let targets = Array1::from_iter(self.pairs.iter().map(|p| p.target));
        lml_from_parts(&targets, &self.chol, &self.alpha)
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hp
    }

    pub fn pairs(&self) -> &[TrainingPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.hp.dim()
    }

    /// Lower Cholesky factor of `K + jitter*I`.
    pub fn cholesky_factor(&self) -> &Array2<f64> {
        &self.chol
    }

    /// Precomputed weights `(K + jitter*I)^-1 u`.
    pub fn weights(&self) -> &[f64] {
        self.alpha.as_slice().expect("alpha is contiguous")
    }

    fn check_query(&self, xi: &[f64]) -> Result<(), GpError> {
        if xi.len() != self.dim() {
            return Err(GpError::DimensionMismatch {
                context: "query regressor vs model",
                expected: self.dim(),
                actual: xi.len(),
            });
        }
        Ok(())
    }

    /// Writes the model as structured text: hyperparameters, regressor
    /// dimension, and all training pairs at full double precision. The
    /// factor and weights are recomputed on load.
    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "mrgpr-model v1")?;
        writeln!(w, "dim {}", self.dim())?;
        writeln!(w, "signal_std {}", fmt_f64(self.hp.signal_std))?;
        let mut line = String::from("lengthscales");
        for l in &self.hp.lengthscales {
            write!(line, " {}", fmt_f64(*l)).expect("write to string");
        }
        writeln!(w, "{line}")?;
        writeln!(w, "jitter {}", fmt_f64(self.hp.jitter))?;
        writeln!(w, "pairs {}", self.pairs.len())?;
        for p in &self.pairs {
            let mut row = String::new();
            for v in &p.regressor {
                write!(row, "{} ", fmt_f64(*v)).expect("write to string");
            }
            write!(row, "{}", fmt_f64(p.target)).expect("write to string");
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    /// Parses a model written by [`GpModel::write_to`] and refits it.
    pub fn read_from(r: impl BufRead) -> Result<Self, GpError> {
        let mut lines = r.lines();
        let mut next_line = |what: &str| -> Result<String, GpError> {
            lines
                .next()
                .ok_or_else(|| GpError::ModelFormat(format!("missing {what} line")))?
                .map_err(GpError::Io)
        };
        let header = next_line("header")?;
        if header.trim() != "mrgpr-model v1" {
            return Err(GpError::ModelFormat(format!(
                "unexpected header {header:?}"
            )));
        }
        let dim: usize = parse_field(&next_line("dim")?, "dim")?;
        let signal_std: f64 = parse_field(&next_line("signal_std")?, "signal_std")?;
        let ls_line = next_line("lengthscales")?;
        let lengthscales = parse_vector(&ls_line, "lengthscales", dim)?;
        let jitter: f64 = parse_field(&next_line("jitter")?, "jitter")?;
        let count: usize = parse_field(&next_line("pairs")?, "pairs")?;
        let mut pairs = Vec::with_capacity(count);
        for i in 0..count {
            let row = next_line("training pair")?;
            let values = parse_floats(&row)?;
            if values.len() != dim + 1 {
                return Err(GpError::ModelFormat(format!(
                    "pair {i}: expected {} values, got {}",
                    dim + 1,
                    values.len()
                )));
            }
            let target = values[dim];
            pairs.push(TrainingPair::new(values[..dim].to_vec(), target));
        }
        let hp = Hyperparameters::new(signal_std, lengthscales, jitter)?;
        Self::fit(pairs, hp)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GpError> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GpError> {
        let file = fs::File::open(path)?;
        Self::read_from(io::BufReader::new(file))
    }
}

/// Log marginal likelihood of `pairs` under `hp`:
/// `-1/2 u^T (K+jI)^-1 u - 1/2 log det(K+jI) - m/2 log 2pi`,
/// with the log-determinant taken from the Cholesky diagonal.
pub fn log_marginal_likelihood(
    pairs: &[TrainingPair],
    hp: &Hyperparameters,
) -> Result<f64, GpError> {
    let dim = check_pairs(pairs)?;
    if dim != hp.dim() {
        return Err(GpError::DimensionMismatch {
            context: "training regressors vs lengthscales",
            expected: hp.dim(),
            actual: dim,
        });
    }
    let targets = Array1::from_iter(pairs.iter().map(|p| p.target));
    let (chol, alpha) = factorize(pairs, &targets, hp)?;
    Ok(lml_from_parts(&targets, &chol, &alpha))
}

/// Drops training pairs whose regressor lies within [`DUPLICATE_DISTANCE`]
/// (Euclidean) of an earlier one, keeping the first occurrence. Returns the
/// kept pairs and the number dropped; a warning is logged when any are.
pub fn dedup_pairs(pairs: Vec<TrainingPair>) -> (Vec<TrainingPair>, usize) {
    let mut kept: Vec<TrainingPair> = Vec::with_capacity(pairs.len());
    let mut dropped = 0usize;
    for pair in pairs {
        let duplicate = kept.iter().any(|k| {
            k.regressor.len() == pair.regressor.len()
                && euclidean_distance(&k.regressor, &pair.regressor) < DUPLICATE_DISTANCE
        });
        if duplicate {
            dropped += 1;
        } else {
            kept.push(pair);
        }
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} duplicate training regressors (keeping first occurrences)");
    }
    (kept, dropped)
}

/// Seeded uniform subsample without replacement, order-preserving up to the
/// shuffle; returns all pairs when `cap` is not exceeded. Used to keep
/// hyperparameter optimization tractable on large datasets.
pub fn subsample_pairs(pairs: &[TrainingPair], cap: usize, seed: u64) -> Vec<TrainingPair> {
    use rand::Rng;
    if pairs.len() <= cap {
        return pairs.to_vec();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..pairs.len()).collect();
    // Partial Fisher-Yates: only the first `cap` slots are needed.
    for i in 0..cap {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    idx.truncate(cap);
    idx.into_iter().map(|i| pairs[i].clone()).collect()
}

use rand::SeedableRng;

/// Maximizes the log marginal likelihood over `log(signal_std)` and
/// `log(l_i)` with the jitter held fixed.
///
/// Monotone gradient ascent with a backtracking step: analytic gradients,
/// steps normalized to the gradient's max component, candidates that worsen
/// the likelihood or fail the Cholesky are rejected, log-parameters are
/// clamped to [-6, 6]. Deterministic, and the result never has a lower
/// likelihood than `init` on the given pairs. A Cholesky failure is only
/// propagated when `init` itself cannot be evaluated.
pub fn optimize_hyperparameters(
    pairs: &[TrainingPair],
    init: &Hyperparameters,
    budget: usize,
) -> Result<Hyperparameters, GpError> {
    let dim = check_pairs(pairs)?;
    if dim != init.dim() {
        return Err(GpError::DimensionMismatch {
            context: "training regressors vs lengthscales",
            expected: init.dim(),
            actual: dim,
        });
    }
    let targets = Array1::from_iter(pairs.iter().map(|p| p.target));
    let init_lml = log_marginal_likelihood(pairs, init)?;

    let clamp = |v: f64| v.clamp(LOG_PARAM_MIN, LOG_PARAM_MAX);
    let hp_of = |p: &[f64]| -> Hyperparameters {
        Hyperparameters {
            signal_std: p[0].exp(),
            lengthscales: p[1..].iter().map(|v| v.exp()).collect(),
            jitter: init.jitter,
        }
    };
    let mut params: Vec<f64> = std::iter::once(init.signal_std.ln())
        .chain(init.lengthscales.iter().map(|l| l.ln()))
        .map(clamp)
        .collect();

    // The clamped starting point can differ from `init`; fall back to `init`
    // if it is not evaluable or never improved upon.
    let (mut best_lml, mut grad) = match lml_and_grad(pairs, &targets, &hp_of(&params)) {
        Some(v) => v,
        None => return Ok(init.clone()),
    };
    let mut improved_over_init = best_lml > init_lml;

    let mut step = 0.5;
    for _ in 0..budget {
        let gmax = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if gmax < 1e-10 {
            break;
        }
        let dir: Vec<f64> = grad.iter().map(|g| g / gmax).collect();
        let mut accepted = false;
        while step >= 1e-8 {
            let cand: Vec<f64> = params
                .iter()
                .zip(dir.iter())
                .map(|(p, d)| clamp(p + step * d))
                .collect();
            if cand == params {
                break;
            }
            match log_marginal_likelihood(pairs, &hp_of(&cand)) {
                Ok(v) if v > best_lml => {
                    params = cand;
                    best_lml = v;
                    improved_over_init = improved_over_init || v > init_lml;
                    accepted = true;
                    break;
                }
                // Worsening or Cholesky-failing candidates are rejected.
                _ => step *= 0.5,
            }
        }
        if !accepted {
            break;
        }
        step = (step * 1.3).min(1.0);
        match lml_and_grad(pairs, &targets, &hp_of(&params)) {
            Some((_, g)) => grad = g,
            None => break,
        }
    }

    if improved_over_init && best_lml >= init_lml {
        Ok(hp_of(&params))
    } else {
        Ok(init.clone())
    }
}

/// Elementwise accumulation of `0.5 * sum_ij W_ij dK_ij/dtheta` for the log
/// parameters; returns `None` when the factorization fails so the optimizer
/// can reject the point.
fn lml_and_grad(
    pairs: &[TrainingPair],
    targets: &Array1<f64>,
    hp: &Hyperparameters,
) -> Option<(f64, Vec<f64>)> {
    let m = pairs.len();
    let d = hp.dim();
    let gram = build_gram(pairs, hp);
    let factorized = gram.clone().factorizec_into(UPLO::Lower).ok()?;
    let mut alpha = targets.clone();
    factorized.solvec_inplace(&mut alpha).ok()?;
    let value = lml_from_parts(targets, &factorized.factor, &alpha);

    let kinv = factorized.invc().ok()?;
    let mut grad = vec![0.0; d + 1];
    for i in 0..m {
        for j in 0..m {
            let w = alpha[i] * alpha[j] - kinv[(i, j)];
            let kij = gram[(i, j)] - if i == j { hp.jitter } else { 0.0 };
            // d/d log(signal_std): 2 K
            grad[0] += w * 2.0 * kij;
            // d/d log(l_q): K_ij (x_iq - x_jq)^2 / l_q^2
            let xi = &pairs[i].regressor;
            let xj = &pairs[j].regressor;
            for q in 0..d {
                let diff = xi[q] - xj[q];
                grad[1 + q] += w * kij * diff * diff / (hp.lengthscales[q] * hp.lengthscales[q]);
            }
        }
    }
    for g in &mut grad {
        *g *= 0.5;
    }
    Some((value, grad))
}

fn build_gram(pairs: &[TrainingPair], hp: &Hyperparameters) -> Array2<f64> {
    let m = pairs.len();
    let mut k = Array2::zeros((m, m));
    for i in 0..m {
        for j in 0..=i {
            let v = se_kernel_unchecked(&pairs[i].regressor, &pairs[j].regressor, hp);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += hp.jitter;
    }
    k
}

fn factorize(
    pairs: &[TrainingPair],
    targets: &Array1<f64>,
    hp: &Hyperparameters,
) -> Result<(Array2<f64>, Array1<f64>), GpError> {
    let gram = build_gram(pairs, hp);
    let factorized = gram
        .factorizec_into(UPLO::Lower)
        .map_err(|e| cholesky_error(e, pairs.len(), hp.jitter))?;
    let mut alpha = targets.clone();
    factorized
        .solvec_inplace(&mut alpha)
        .map_err(|e| GpError::Backend(e.to_string()))?;
    Ok((factorized.factor, alpha))
}

fn cholesky_error(err: LinalgError, size: usize, jitter: f64) -> GpError {
    match err {
        LinalgError::Lapack(lax::error::Error::LapackComputationalFailure { return_code }) => {
            GpError::NotPositiveDefinite {
                pivot: return_code as usize,
                size,
                jitter,
            }
        }
        other => GpError::Backend(other.to_string()),
    }
}

fn lml_from_parts(targets: &Array1<f64>, chol: &Array2<f64>, alpha: &Array1<f64>) -> f64 {
    let m = targets.len();
    let data_fit = -0.5 * targets.dot(alpha);
    let log_det: f64 = (0..m).map(|i| chol[(i, i)].ln()).sum();
    data_fit - log_det - 0.5 * (m as f64) * (2.0 * std::f64::consts::PI).ln()
}

fn forward_substitute(chol: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let m = b.len();
    let mut v = Array1::zeros(m);
    for i in 0..m {
        let mut acc = b[i];
        for j in 0..i {
            acc -= chol[(i, j)] * v[j];
        }
        v[i] = acc / chol[(i, i)];
    }
    v
}

fn check_pairs(pairs: &[TrainingPair]) -> Result<usize, GpError> {
    let first = pairs.first().ok_or(GpError::EmptyTrainingSet)?;
    let dim = first.regressor.len();
    for p in pairs {
        if p.regressor.len() != dim {
            return Err(GpError::DimensionMismatch {
                context: "training regressors",
                expected: dim,
                actual: p.regressor.len(),
            });
        }
    }
    Ok(dim)
}

fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn std_dev(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count();
    if n == 0 {
        return 0.0;
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt()
}

/// 17-significant-digit scientific notation; round-trips any finite f64.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_field<T: std::str::FromStr>(line: &str, key: &str) -> Result<T, GpError> {
    let rest = line
        .trim()
        .strip_prefix(key)
        .ok_or_else(|| GpError::ModelFormat(format!("expected `{key} ...`, got {line:?}")))?;
    rest.trim()
        .parse()
        .map_err(|_| GpError::ModelFormat(format!("cannot parse {key} from {line:?}")))
}

fn parse_vector(line: &str, key: &str, expected: usize) -> Result<Vec<f64>, GpError> {
    let rest = line
        .trim()
        .strip_prefix(key)
        .ok_or_else(|| GpError::ModelFormat(format!("expected `{key} ...`, got {line:?}")))?;
    let values = parse_floats(rest)?;
    if values.len() != expected {
        return Err(GpError::ModelFormat(format!(
            "{key}: expected {expected} values, got {}",
            values.len()
        )));
    }
    Ok(values)
}

fn parse_floats(line: &str) -> Result<Vec<f64>, GpError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| GpError::ModelFormat(format!("cannot parse float {tok:?}")))
        })
        .collect()
}
