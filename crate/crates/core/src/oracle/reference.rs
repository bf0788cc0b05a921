//! Literal single-update trainer in the unscaled form, presenting patterns
//! in dataset order. Kept deliberately naive: no multiple updates, no active
//! sets, no lazy scaling.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{Algorithm, Hyperparams};

/// Largest dataset accepted.
pub const REFERENCE_MAX_M: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRun {
    pub converged: bool,
    pub t_c: u64,
    /// Unscaled weights: `a_t` for constant shrinking, `a_t` for variable
    /// shrinking, `w` for the classical perceptron.
    pub weights: Vec<f64>,
    /// Pattern index of every update, in order.
    pub trace: Vec<usize>,
    pub full_passes: usize,
}

/// Runs until a clean pass or `hp.max_updates` updates.
///
/// * `Mpcs`: `a . y <= b / c^(t-1)` triggers `a += (eta / c^t) y`, `c = 1 - eta lambda`.
/// * `Mpvs`: `a . y <= b (t+1)^n` triggers `a += eta (t+1)^n y`.
/// * `Perceptron`: `w . y <= b` triggers `w += eta y`.
pub fn reference_train(dataset: &Dataset, hp: &Hyperparams, algo: Algorithm) -> Result<ReferenceRun> {
    if dataset.len() > REFERENCE_MAX_M {
        return Err(Error::SizeCap {
            m: dataset.len(),
            cap: REFERENCE_MAX_M,
        });
    }
    hp.validate(algo, dataset)?;
    let c = 1.0 - hp.eta * hp.lambda;
    let mut w = vec![0.0; dataset.dim()];
    let mut t: u64 = 0;
    let mut trace = Vec::new();
    let mut full_passes = 0;
    loop {
        let mut clean = true;
        full_passes += 1;
        for (k, p) in dataset.patterns().iter().enumerate() {
            let dot = p.dot(&w);
            let (threshold, coef) = match algo {
                Algorithm::Mpcs => (
                    hp.b / c.powf(t as f64 - 1.0),
                    hp.eta / c.powf(t as f64),
                ),
                Algorithm::Mpvs => {
                    let g = ((t + 1) as f64).powi(hp.n as i32);
                    (hp.b * g, hp.eta * g)
                }
                Algorithm::Perceptron => (hp.b, hp.eta),
            };
            if dot <= threshold {
                if t >= hp.max_updates {
                    return Ok(ReferenceRun { converged: false, t_c: t, weights: w, trace, full_passes });
                }
                p.add_to(&mut w, coef);
                t += 1;
                trace.push(k);
                clean = false;
            }
        }
        if clean {
            return Ok(ReferenceRun { converged: true, t_c: t, weights: w, trace, full_passes });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_dataset, RawExample};

    fn toy() -> Dataset {
        // reflected patterns [1,1] and [1,-1] with d = 1, rho = 1
        let ex = vec![RawExample::new(1, vec![(1, 1.0)]), RawExample::new(-1, vec![(1, -1.0)])];
        build_dataset(&ex, 1.0, 0.0).unwrap()
    }

    #[test]
    fn toy_trace() {
        let ds = toy();
        let hp = Hyperparams { eta: 1.0, b: 0.5, n: 0, ..Default::default() };
        let run = reference_train(&ds, &hp, Algorithm::Mpvs).unwrap();
        assert!(run.converged);
        assert_eq!(run.t_c, 2);
        assert_eq!(run.trace, vec![0, 1]);
        assert_eq!(run.weights, vec![2.0, 0.0]);
    }

    #[test]
    fn mpcs_without_shrinking_is_classical() {
        let ds = toy();
        let hp = Hyperparams { eta: 0.3, b: 2.0, lambda: 0.0, ..Default::default() };
        let a = reference_train(&ds, &hp, Algorithm::Mpcs).unwrap();
        let b = reference_train(&ds, &hp, Algorithm::Perceptron).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget() {
        let ds = toy();
        let hp = Hyperparams { eta: 1.0, b: 100.0, max_updates: 3, ..Default::default() };
        let run = reference_train(&ds, &hp, Algorithm::Perceptron).unwrap();
        assert!(!run.converged);
        assert_eq!(run.t_c, 3);
    }
}
