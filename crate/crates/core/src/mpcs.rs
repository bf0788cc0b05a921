//! Margin perceptron with constant shrinking.
//!
//! The weight vector is kept in the shrunken form `a^s`: a margin error on
//! `y` (i.e. `a^s . y <= b`) triggers `a^s <- (1 - eta*lambda) a^s + eta y`.
//! Its norm stays bounded by `(eta R^2 + 2(1 - eta*lambda) b) / (lambda (2 -
//! eta*lambda))`, whereas the equivalent unscaled vector grows like
//! `(1 - eta*lambda)^{-t}`.
//!
//! `lambda = 0` is the classical perceptron with margin and is handled as an
//! explicit branch.

use crate::data::Pattern;
use crate::error::{Error, Result};
use crate::model::{Hyperparams, TrainState};

/// One (possibly multiple) update as seen by an observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McpsStep {
    pub pattern_index: usize,
    pub mu: u64,
    /// `a^s . y` before the update.
    pub dot_before: f64,
    pub t_before: u64,
}

/// `a^s . y <= b`.
pub fn mpcs_condition(state: &TrainState, pattern: &Pattern, hp: &Hyperparams) -> bool {
    state.dot(pattern) <= hp.b
}

/// Shrink factor and learning coefficient of `mu` chained updates:
/// `a^s <- c_mu a^s + k_mu y` with `c_mu = (1-eta*lambda)^mu` and
/// `k_mu = (1 - c_mu)/lambda` (`mu*eta` when `lambda = 0`).
pub(crate) fn compound(mu: u64, eta: f64, lambda: f64) -> (f64, f64) {
    if lambda == 0.0 {
        (1.0, mu as f64 * eta)
    } else if mu == 1 {
        (1.0 - eta * lambda, eta)
    } else {
        let log_c = (-eta * lambda).ln_1p();
        let x = mu as f64 * log_c;
        (x.exp(), -x.exp_m1() / lambda)
    }
}

/// `a^s . y` after `j` updates on `y`, starting from `dot`.
fn dot_after(j: u64, dot: f64, sq_norm: f64, eta: f64, lambda: f64) -> f64 {
    if j == 0 {
        return dot;
    }
    let (c, k) = compound(j, eta, lambda);
    c * dot + k * sq_norm
}

pub(crate) fn max_multiplicity(
    dot: f64,
    sq_norm: f64,
    eta: f64,
    lambda: f64,
    b: f64,
    lup: u64,
) -> Result<u64> {
    if !(dot <= b) {
        return Err(Error::Precondition(format!(
            "pattern is not a margin error (dot {dot} > b {b})"
        )));
    }
    if !(sq_norm - lambda * b > 0.0) || eta * lambda >= 1.0 {
        return Err(Error::Precondition(format!(
            "invalid lambda {lambda}: need lambda*b < |y|^2 = {sq_norm} and eta*lambda < 1"
        )));
    }
    let estimate = if lambda == 0.0 {
        (b - dot) / (eta * sq_norm)
    } else {
        (lambda * (b - dot) / (sq_norm - lambda * b)).ln_1p() / -(-eta * lambda).ln_1p()
    };
    let lup_f = lup as f64;
    let mut mu = if estimate.is_finite() && estimate + 1.0 < lup_f {
        estimate.max(0.0).floor() as u64 + 1
    } else {
        lup
    };
    // The log/ratio above can land one off near integer boundaries; settle
    // against the scalar recurrence so that constituent mu-1 is the last legal one.
    while mu < lup && dot_after(mu, dot, sq_norm, eta, lambda) <= b {
        mu += 1;
    }
    while mu > 1 && dot_after(mu - 1, dot, sq_norm, eta, lambda) > b {
        mu -= 1;
    }
    Ok(mu)
}

/// Largest multiplicity `mu <= lup` such that all `mu` chained single updates
/// on the pattern are margin errors:
/// `min(lup, floor(ln(1 + lambda (b - dot)/(|y|^2 - lambda b)) / ln(1/(1-eta*lambda))) + 1)`,
/// or `min(lup, floor((b - dot)/(eta |y|^2)) + 1)` for `lambda = 0`.
pub fn mpcs_max_multiplicity(dot_before: f64, sq_norm: f64, hp: &Hyperparams) -> Result<u64> {
    max_multiplicity(dot_before, sq_norm, hp.eta, hp.lambda, hp.b, hp.lup)
}

pub(crate) fn apply(state: &mut TrainState, pattern: &Pattern, mu: u64, eta: f64, lambda: f64) {
    debug_assert!(mu >= 1);
    let (c, k) = compound(mu, eta, lambda);
    if lambda != 0.0 {
        state.shrink(c);
    }
    state.add(k, pattern);
    state.t += mu;
}

/// `a^s <- (1-eta*lambda)^mu a^s + ((1 - (1-eta*lambda)^mu)/lambda) y`, `t <- t + mu`.
pub fn mpcs_apply(state: &mut TrainState, pattern: &Pattern, mu: u64, hp: &Hyperparams) {
    apply(state, pattern, mu, hp.eta, hp.lambda)
}
