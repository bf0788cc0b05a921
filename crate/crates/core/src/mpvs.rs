//! Margin perceptron with variable shrinking.
//!
//! Stored in the unscaled form: a margin error `a_t . y <= b (t+1)^n`
//! triggers `a_{t+1} = a_t + eta (t+1)^n y`. Growth is polynomial in `t`.

use crate::data::Pattern;
use crate::error::{Error, Result};
use crate::model::{Hyperparams, TrainState};

#[inline]
pub(crate) fn ipow(i: u64, n: u32) -> f64 {
    (i as f64).powi(n as i32)
}

/// Current threshold `b (t+1)^n`.
pub fn mpvs_threshold(t: u64, hp: &Hyperparams) -> f64 {
    hp.b * ipow(t + 1, hp.n)
}

/// `a_t . y <= b (t+1)^n`.
pub fn mpvs_condition(state: &TrainState, pattern: &Pattern, hp: &Hyperparams) -> bool {
    state.dot(pattern) <= mpvs_threshold(state.t, hp)
}

/// Scans `j = 1, 2, ...` for the first constituent update that would not be
/// a margin error and returns `(mu, sum_{i=t+1}^{t+mu} i^n)`. Constituent
/// `j` is legal iff `dot + eta |y|^2 sum_{i=t+1}^{t+j} i^n <= b (t+j+1)^n`.
pub(crate) fn max_multiplicity(
    dot: f64,
    sq_norm: f64,
    t: u64,
    eta: f64,
    b: f64,
    n: u32,
    lup: u64,
) -> Result<(u64, f64)> {
    if !(dot <= b * ipow(t + 1, n)) {
        return Err(Error::Precondition(format!(
            "pattern is not a margin error at t = {t} (dot {dot})"
        )));
    }
    let step = eta * sq_norm;
    let mut sum = ipow(t + 1, n);
    let mut mu = 1;
    while mu < lup {
        let next = sum + ipow(t + mu + 1, n);
        // constituent `mu` starts from the state after `mu` updates
        if dot + step * sum > b * ipow(t + mu + 1, n) {
            break;
        }
        sum = next;
        mu += 1;
    }
    Ok((mu, sum))
}

/// Maximal legal multiplicity and the matching power sum.
pub fn mpvs_max_multiplicity(
    state: &TrainState,
    pattern: &Pattern,
    hp: &Hyperparams,
) -> Result<(u64, f64)> {
    max_multiplicity(
        state.dot(pattern),
        pattern.sq_norm(),
        state.t,
        hp.eta,
        hp.b,
        hp.n,
        hp.lup,
    )
}

pub(crate) fn apply(state: &mut TrainState, pattern: &Pattern, mu: u64, sum_jn: f64, eta: f64) {
    debug_assert!(mu >= 1);
    state.add(eta * sum_jn, pattern);
    state.t += mu;
    state.powersum += sum_jn;
}

/// `a <- a + eta sum_jn y`, `t <- t + mu`, `powersum <- powersum + sum_jn`.
pub fn mpvs_apply(
    state: &mut TrainState,
    pattern: &Pattern,
    mu: u64,
    sum_jn: f64,
    hp: &Hyperparams,
) {
    apply(state, pattern, mu, sum_jn, hp.eta)
}
