//! Training state, hyperparameters and margin evaluation shared by the solvers.

use std::fmt;
use std::str::FromStr;

use crate::data::{Dataset, Pattern};
use crate::error::{Error, Result};

/// Below this the lazy scale factor is folded back into the stored values.
const RESCALE_FLOOR: f64 = 1e-150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Margin perceptron with constant shrinking factor `1 - eta*lambda`.
    Mpcs,
    /// Margin perceptron with variable shrinking factor `(t/(t+1))^n`.
    Mpvs,
    /// Classical perceptron with margin: fixed rate and threshold.
    Perceptron,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Mpcs => "mpcs",
            Algorithm::Mpvs => "mpvs",
            Algorithm::Perceptron => "perceptron",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mpcs" => Ok(Algorithm::Mpcs),
            "mpvs" => Ok(Algorithm::Mpvs),
            "perceptron" => Ok(Algorithm::Perceptron),
            _ => Err(Error::InvalidParams(format!("unknown algorithm `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// Learning rate.
    pub eta: f64,
    /// Margin threshold of the misclassification condition.
    pub b: f64,
    /// Shrinking parameter (constant shrinking only).
    pub lambda: f64,
    /// Shrinking exponent (variable shrinking only).
    pub n: u32,
    /// Cap on the multiplicity of a single multiple update.
    pub lup: u64,
    /// Slack on the threshold when selecting active sets.
    pub cbar: f64,
    pub nep1: usize,
    pub nep2: usize,
    /// Safeguard on the cumulative number of updates.
    pub max_updates: u64,
    pub rho: f64,
    pub delta: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            eta: 0.1,
            b: 1.0,
            lambda: 0.0,
            n: 3,
            lup: 1000,
            cbar: 1.01,
            nep1: 5,
            nep2: 5,
            max_updates: 100_000_000,
            rho: 1.0,
            delta: 0.0,
        }
    }
}

impl Hyperparams {
    /// Checks the parameter ranges, and for constant shrinking also
    /// `eta*lambda < 1` and `lambda*b < min_k |y_k|^2` on `dataset`.
    pub fn validate(&self, algo: Algorithm, dataset: &Dataset) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be > 0, got {}", self.eta));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return bad(format!("b must be > 0, got {}", self.b));
        }
        if self.lup < 1 {
            return bad("lup must be >= 1".into());
        }
        if !(self.cbar >= 1.0) {
            return bad(format!("cbar must be >= 1, got {}", self.cbar));
        }
        if self.nep1 < 1 || self.nep2 < 1 {
            return bad("nep1 and nep2 must be >= 1".into());
        }
        if algo == Algorithm::Mpcs {
            if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
                return bad(format!("lambda must be >= 0, got {}", self.lambda));
            }
            if self.eta * self.lambda >= 1.0 {
                return bad(format!(
                    "eta*lambda = {} must be < 1",
                    self.eta * self.lambda
                ));
            }
            if self.lambda * self.b >= dataset.min_sq_norm() {
                return bad(format!(
                    "lambda*b = {} must be below min |y_k|^2 = {}",
                    self.lambda * self.b,
                    dataset.min_sq_norm()
                ));
            }
        }
        Ok(())
    }

    /// Shrinking parameter as seen by the update rule: zero for the
    /// classical perceptron.
    pub fn effective_lambda(&self, algo: Algorithm) -> f64 {
        match algo {
            Algorithm::Mpcs => self.lambda,
            _ => 0.0,
        }
    }
}

/// `(delta, epsilon)` accuracy parameters of a configuration: `delta =
/// eta R^2 / b` throughout, `epsilon = 1 - lambda b / gamma_hat^2` for
/// constant shrinking, `1/(n+1)` for variable shrinking and `1` for the
/// classical perceptron.
pub fn derived_params(
    algo: Algorithm,
    hp: &Hyperparams,
    radius: f64,
    gamma_hat: Option<f64>,
) -> Result<(f64, f64)> {
    let delta = hp.eta * radius * radius / hp.b;
    let eps = match algo {
        Algorithm::Mpcs if hp.lambda == 0.0 => 1.0,
        Algorithm::Mpcs => {
            let g = gamma_hat.ok_or_else(|| {
                Error::Precondition("constant shrinking needs a margin estimate".into())
            })?;
            1.0 - hp.lambda * hp.b / (g * g)
        }
        Algorithm::Mpvs => 1.0 / (f64::from(hp.n) + 1.0),
        Algorithm::Perceptron => 1.0,
    };
    Ok((delta, eps))
}

/// Mutable solver state. The weight vector is stored as `scale * values` so
/// that shrinking costs O(1); for the unshrunk algorithms `scale` stays
/// exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    values: Vec<f64>,
    scale: f64,
    /// Cumulative number of updates, multiple updates counted with multiplicity.
    pub t: u64,
    /// `sum_{k=1}^t k^n`, maintained by variable shrinking.
    pub powersum: f64,
    pub updates_this_pass: u64,
    pub total_presentations: u64,
}

impl TrainState {
    pub fn new(dim: usize) -> Self {
        TrainState {
            values: vec![0.0; dim],
            scale: 1.0,
            t: 0,
            powersum: 0.0,
            updates_this_pass: 0,
            total_presentations: 0,
        }
    }

    /// State with explicit weights, e.g. to resume or to test a single step.
    pub fn from_weights(weights: Vec<f64>, t: u64, powersum: f64) -> Self {
        TrainState {
            values: weights,
            scale: 1.0,
            t,
            powersum,
            updates_this_pass: 0,
            total_presentations: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn dot(&self, p: &Pattern) -> f64 {
        self.scale * p.dot(&self.values)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.scale * self.values[i]
    }

    /// Materialized weight vector.
    pub fn weights(&self) -> Vec<f64> {
        self.values.iter().map(|v| self.scale * v).collect()
    }

    pub fn sq_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v * v).sum();
        self.scale * self.scale * s
    }

    pub fn norm(&self) -> f64 {
        self.sq_norm().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `w <- factor * w`.
    pub(crate) fn shrink(&mut self, factor: f64) {
        self.scale *= factor;
        if self.scale < RESCALE_FLOOR {
            let s = self.scale;
            self.values.iter_mut().for_each(|v| *v *= s);
            self.scale = 1.0;
        }
    }

    /// `w <- w + coef * y`.
    #[inline]
    pub(crate) fn add(&mut self, coef: f64, p: &Pattern) {
        p.add_to(&mut self.values, coef / self.scale);
    }
}

/// Margin summary of a weight vector, with the after-run certificate fields.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    /// `min_k w.y_k / |w|`.
    pub gamma_prime: f64,
    pub norm_w: f64,
    pub argmin_index: usize,
    /// After-run lower bound on the fraction of the maximum margin achieved.
    pub f_after: f64,
    /// `gamma_prime / f_after`, an upper bound on the maximum margin.
    pub gamma_d_upper: f64,
}

fn min_dot(w: &[f64], patterns: &[Pattern], offset: usize) -> (f64, usize) {
    let mut best = (f64::INFINITY, offset);
    for (k, p) in patterns.iter().enumerate() {
        let d = p.dot(w);
        if d < best.0 {
            best = (d, offset + k);
        }
    }
    best
}

fn check_weights(w: &[f64], dataset: &Dataset) -> Result<f64> {
    if w.len() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            model: w.len(),
            data: dataset.dim(),
        });
    }
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroWeight);
    }
    Ok(norm)
}

/// Achieved directional margin `min_k w.y_k / |w|` and the (0-based) index
/// attaining it; ties go to the lowest index.
pub fn evaluate_margin(w: &[f64], dataset: &Dataset) -> Result<(f64, usize)> {
    let norm = check_weights(w, dataset)?;
    let (d, k) = min_dot(w, dataset.patterns(), 0);
    Ok((d / norm, k))
}

/// [`evaluate_margin`] split over `threads` workers. The reduction keeps the
/// lowest index among equal minima, so the result is identical to the
/// sequential one.
pub fn evaluate_margin_threaded(
    w: &[f64],
    dataset: &Dataset,
    threads: usize,
) -> Result<(f64, usize)> {
    let norm = check_weights(w, dataset)?;
    let patterns = dataset.patterns();
    let threads = threads.clamp(1, patterns.len());
    if threads == 1 {
        let (d, k) = min_dot(w, patterns, 0);
        return Ok((d / norm, k));
    }
    let chunk = patterns.len().div_ceil(threads);
    let partial: Vec<(f64, usize)> = std::thread::scope(|s| {
        let handles: Vec<_> = patterns
            .chunks(chunk)
            .enumerate()
            .map(|(c, ps)| s.spawn(move || min_dot(w, ps, c * chunk)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let (d, k) = partial
        .into_iter()
        .fold((f64::INFINITY, 0), |acc, x| if x.0 < acc.0 { x } else { acc });
    Ok((d / norm, k))
}
