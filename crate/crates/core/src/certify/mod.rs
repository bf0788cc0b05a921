//! Convergence bounds and margin certificates.
//!
//! Before a run, the number of updates `t_c` and the fraction
//! `f = gamma' / gamma_d` of the maximum directional margin can be bounded
//! from the parameters alone (given `gamma_d` or an estimate of it). After a
//! run, `(t_c, |a|, gamma')` give a lower bound on `f` that needs no
//! knowledge of `gamma_d` and typically is much tighter.
//!
//! Notation: `delta = eta R^2 / b`; `epsilon = 1 - lambda b / gamma_d^2` for
//! constant shrinking and `1/(n+1)` for variable shrinking.

mod lemmas;
mod staged;

use std::fmt::Write as _;

pub use lemmas::{lemma_check, lemma_sweep, Inequality, LemmaCheck, Relation};
pub use staged::{staged_lambda, tune_mpvs_eta, StageRecord, StagedOutcome};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{evaluate_margin, Algorithm, Hyperparams, MarginReport};
use crate::scheduler::RunResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub radius: f64,
    /// Maximum directional margin, exact or estimated.
    pub gamma_d: f64,
    pub eta: f64,
    pub b: f64,
    pub lambda: f64,
    pub n: u32,
}

impl BoundInputs {
    pub fn new(radius: f64, gamma_d: f64, hp: &Hyperparams) -> Self {
        BoundInputs {
            radius,
            gamma_d,
            eta: hp.eta,
            b: hp.b,
            lambda: hp.lambda,
            n: hp.n,
        }
    }

    /// `delta = eta R^2 / b`.
    pub fn delta(&self) -> f64 {
        self.eta * self.radius * self.radius / self.b
    }

    /// `epsilon = 1 - lambda b / gamma_d^2`.
    pub fn epsilon_constant(&self) -> f64 {
        1.0 - self.lambda * self.b / (self.gamma_d * self.gamma_d)
    }

    /// `epsilon = 1/(n+1)`.
    pub fn epsilon_variable(&self) -> f64 {
        1.0 / (f64::from(self.n) + 1.0)
    }

    /// `A = lambda (b/gamma_d^2) (eta R^2/b + 2(1 - eta lambda)) / (2 - eta lambda)`;
    /// the constant-shrinking update count is finite only when `A < 1`.
    pub fn calligraphic_a(&self) -> f64 {
        let el = self.eta * self.lambda;
        self.lambda * (self.b / (self.gamma_d * self.gamma_d)) * (self.delta() + 2.0 * (1.0 - el))
            / (2.0 - el)
    }

    fn ratio(&self) -> f64 {
        (self.radius / self.gamma_d).powi(2)
    }
}

/// Upper bound on `t_c` and before-run lower bound on `f` for constant
/// shrinking:
///
/// ```text
/// t_c <= 1/(delta (1-eps)) R^2/gamma_d^2 ln((4 - (2+delta) eps + delta) / ((2+delta) eps - delta))
/// f   >  1/(2+delta) + (1-eps)/2
/// ```
///
/// Requires `delta <= 2` and `delta/(2+delta) < eps < 1`.
pub fn mpcs_bounds(inputs: &BoundInputs) -> Result<(f64, f64)> {
    let d = inputs.delta();
    let e = inputs.epsilon_constant();
    if !(d <= 2.0) {
        return Err(Error::Proviso(format!("delta = {d} exceeds 2")));
    }
    if !(e > d / (2.0 + d)) {
        return Err(Error::Proviso(format!(
            "epsilon = {e} must exceed delta/(2+delta) = {}",
            d / (2.0 + d)
        )));
    }
    if !(e < 1.0) {
        return Err(Error::Proviso(format!("epsilon = {e} must be below 1")));
    }
    let log = ((4.0 - (2.0 + d) * e + d) / ((2.0 + d) * e - d)).ln();
    let t_upper = inputs.ratio() * log / (d * (1.0 - e));
    let f_before = 1.0 / (2.0 + d) + (1.0 - e) / 2.0;
    Ok((t_upper, f_before))
}

/// The sharper intermediate bound `t_c <= ln((1+A)/(1-A)) / ln(1/(1-eta lambda))`.
pub fn mpcs_bound_via_a(inputs: &BoundInputs) -> Result<f64> {
    let a = inputs.calligraphic_a();
    if !(a < 1.0) || !(inputs.lambda > 0.0) {
        return Err(Error::Proviso(format!("A = {a} must lie in (0, 1)")));
    }
    Ok(((1.0 + a) / (1.0 - a)).ln() / -(-inputs.eta * inputs.lambda).ln_1p())
}

/// Upper bound on `t_c` under the single-parameter choice `delta = 2 zeta`,
/// `eps = zeta (1 + 2 zeta)/(1 + zeta)`, for which `f > 1 - zeta`.
pub fn mpcs_zeta_bound(zeta: f64, radius: f64, gamma_d: f64) -> Result<f64> {
    check_zeta(zeta)?;
    Ok((1.0 / zeta) * ((1.0 + zeta) / (1.0 - 2.0 * zeta * zeta))
        * (radius / gamma_d).powi(2)
        * ((1.0 - zeta * zeta).sqrt() / zeta).ln())
}

/// `(t_upper, t_lower, f_before)` for variable shrinking:
///
/// ```text
/// t_c <= (n+1)^2/(2n+1) (1 + 2b/(eta R^2)) R^2/gamma_d^2
/// t_c >  1/(eps delta) (1 - eps/2)/(1 + delta/2) R^2/gamma_d^2
/// f   >  (2n+1)/(2n+2) (1 + eta R^2/(2b))^{-1}
/// ```
pub fn mpvs_bounds(inputs: &BoundInputs) -> (f64, f64, f64) {
    let n = f64::from(inputs.n);
    let d = inputs.delta();
    let e = inputs.epsilon_variable();
    let t_upper = (n + 1.0).powi(2) / (2.0 * n + 1.0) * (1.0 + 2.0 / d) * inputs.ratio();
    let t_lower = (1.0 / (e * d)) * ((1.0 - e / 2.0) / (1.0 + d / 2.0)) * inputs.ratio();
    let f_before = (2.0 * n + 1.0) / (2.0 * n + 2.0) / (1.0 + d / 2.0);
    (t_upper, t_lower, f_before)
}

/// After-run lower bound on `f` for constant shrinking, from the norm of the
/// shrunken weight vector: `f >= (1 - (1-eta lambda)^t_c) gamma' / (lambda |a^s|)`,
/// which tends to `eta t_c gamma' / |a|` as `lambda -> 0`. Returns
/// `(f_after, gamma_d_upper)`.
pub fn mpcs_after_run(
    t_c: u64,
    norm_shrunken: f64,
    gamma_prime: f64,
    eta: f64,
    lambda: f64,
) -> Result<(f64, f64)> {
    if t_c == 0 || !(norm_shrunken > 0.0) {
        return Err(Error::ZeroWeight);
    }
    let scale = if lambda == 0.0 {
        eta * t_c as f64
    } else {
        -(t_c as f64 * (-eta * lambda).ln_1p()).exp_m1() / lambda
    };
    let gamma_upper = norm_shrunken / scale;
    Ok((gamma_prime / gamma_upper, gamma_upper))
}

/// After-run lower bound `f >= eta S_n(t_c) gamma' / |a|` for variable
/// shrinking. Returns `(f_after, gamma_d_upper)`.
pub fn mpvs_after_run(
    powersum: f64,
    norm: f64,
    gamma_prime: f64,
    eta: f64,
) -> Result<(f64, f64)> {
    if !(norm > 0.0) || !(powersum > 0.0) {
        return Err(Error::ZeroWeight);
    }
    let gamma_upper = norm / (eta * powersum);
    Ok((gamma_prime / gamma_upper, gamma_upper))
}

fn check_zeta(zeta: f64) -> Result<()> {
    if !(zeta > 0.0 && zeta < std::f64::consts::FRAC_1_SQRT_2) {
        return Err(Error::InvalidParams(format!(
            "zeta must lie in (0, 1/sqrt 2), got {zeta}"
        )));
    }
    Ok(())
}

/// `(delta, epsilon)` of the single-parameter accuracy choice for constant
/// shrinking.
pub fn zeta_to_delta_epsilon(zeta: f64) -> Result<(f64, f64)> {
    check_zeta(zeta)?;
    let d = 2.0 * zeta;
    Ok((d, d * (1.0 + d) / (2.0 + d)))
}

/// `(eta, lambda)` realizing accuracy `zeta` for constant shrinking:
/// `eta = 2 zeta b / R^2`, `lambda = (1 - eps) gamma_hat^2 / b`.
pub fn accuracy_params_mpcs(zeta: f64, radius: f64, b: f64, gamma_hat: f64) -> Result<(f64, f64)> {
    let (d, e) = zeta_to_delta_epsilon(zeta)?;
    Ok((d * b / (radius * radius), (1.0 - e) * gamma_hat * gamma_hat / b))
}

/// `(eta, n)` with `delta = epsilon`: `eta = eps b / R^2`, `n = ceil(1/eps) - 1`.
pub fn accuracy_params_mpvs(epsilon: f64, radius: f64, b: f64) -> Result<(f64, u32)> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let n = (1.0 / epsilon).ceil() - 1.0;
    Ok((epsilon * b / (radius * radius), n as u32))
}

/// `lambda = (1 - eps) gamma_hat^2 / b`: the shrinking parameter that gives
/// accuracy parameter `eps` if `gamma_hat` were the maximum margin.
pub fn lambda_for_epsilon(epsilon: f64, b: f64, gamma_hat: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    Ok((1.0 - epsilon) * gamma_hat * gamma_hat / b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub t_bound_upper: Option<f64>,
    pub t_bound_lower: Option<f64>,
    pub f_before: Option<f64>,
    pub f_after: f64,
    /// `gamma' / gamma_d` when the exact margin is known.
    pub f_vs_oracle: Option<f64>,
    pub gamma_d_upper: f64,
}

impl Certificate {
    /// `cert.<field>=<value>` lines; absent fields are omitted.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: Option<f64>| {
            if let Some(v) = v {
                let _ = writeln!(s, "cert.{k}={v:.17e}");
            }
        };
        put("t_bound_upper", self.t_bound_upper);
        put("t_bound_lower", self.t_bound_lower);
        put("f_before", self.f_before);
        put("f_after", Some(self.f_after));
        put("f_vs_oracle", self.f_vs_oracle);
        put("gamma_d_upper", Some(self.gamma_d_upper));
        s
    }
}

/// Before-run bounds for a configuration given `gamma_d` (exact or
/// estimated). `None` entries mean the bound does not apply, e.g. when the
/// constant-shrinking proviso fails.
pub fn before_run_bounds(
    algo: Algorithm,
    hp: &Hyperparams,
    radius: f64,
    gamma_d: f64,
) -> (Option<f64>, Option<f64>, Option<f64>) {
    let mut inputs = BoundInputs::new(radius, gamma_d, hp);
    match algo {
        Algorithm::Mpcs if hp.lambda > 0.0 => match mpcs_bounds(&inputs) {
            Ok((t, f)) => (Some(t), None, Some(f)),
            Err(_) => (None, None, None),
        },
        // lambda = 0 is the classical perceptron, i.e. variable shrinking with n = 0
        Algorithm::Mpcs | Algorithm::Perceptron => {
            inputs.n = 0;
            let (t, lo, f) = mpvs_bounds(&inputs);
            (Some(t), Some(lo), Some(f))
        }
        Algorithm::Mpvs => {
            let (t, lo, f) = mpvs_bounds(&inputs);
            (Some(t), Some(lo), Some(f))
        }
    }
}

/// After-run `(f_after, gamma_d_upper)` for a finished run.
pub fn after_run(run: &RunResult, gamma_prime: f64) -> Result<(f64, f64)> {
    let norm = run.state.norm();
    match run.algo {
        Algorithm::Mpvs => mpvs_after_run(run.state.powersum, norm, gamma_prime, run.hp.eta),
        algo => mpcs_after_run(
            run.t_c,
            norm,
            gamma_prime,
            run.hp.eta,
            run.hp.effective_lambda(algo),
        ),
    }
}

/// Margin report and certificate of a finished run. `gamma_d` is the exact
/// maximum margin when known (or an estimate for the before-run bounds).
pub fn certify_run(
    run: &RunResult,
    dataset: &Dataset,
    gamma_d: Option<f64>,
) -> Result<(MarginReport, Certificate)> {
    let w = run.state.weights();
    let (gamma_prime, argmin_index) = evaluate_margin(&w, dataset)?;
    let (f_after, gamma_d_upper) = after_run(run, gamma_prime)?;
    let (t_bound_upper, t_bound_lower, f_before) = match gamma_d {
        Some(g) if g > 0.0 => before_run_bounds(run.algo, &run.hp, dataset.radius(), g),
        _ => (None, None, None),
    };
    let report = MarginReport {
        gamma_prime,
        norm_w: run.state.norm(),
        argmin_index,
        f_after,
        gamma_d_upper,
    };
    let cert = Certificate {
        t_bound_upper,
        t_bound_lower,
        f_before,
        f_after,
        f_vs_oracle: gamma_d.filter(|&g| g > 0.0).map(|g| gamma_prime / g),
        gamma_d_upper,
    };
    Ok((report, cert))
}
