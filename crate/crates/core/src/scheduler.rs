//! Epoch driver: full passes, two nested active sets, convergence detection.
//!
//! The active-set bookkeeping is our own documented variant of the nested
//! scheme:
//!
//! 1. A full pass over the data updates on every margin error and collects
//!    level 1: the patterns whose condition value `w . y_k` was within
//!    `cbar` times the current threshold when they were presented.
//! 2. Level 1 is cycled up to `nep1` times. Each cycle collects level 2 from
//!    level 1 by the same rule, then cycles level 2 up to `nep2` times. A
//!    cycle that makes no update ends its loop early.
//! 3. Back to 1. Convergence is only ever declared by a full pass that makes
//!    no update at all.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::Result;
use crate::model::{Algorithm, Hyperparams, TrainState};
use crate::{mpcs, mpvs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Dataset order on every pass.
    Sequential,
    /// Fresh permutation per full pass, from a seeded generator.
    Shuffled(u64),
}

/// Passed to [`Observer::on_update`] after every (multiple) update.
#[derive(Debug)]
pub struct UpdateEvent<'a> {
    pub pattern_index: usize,
    pub mu: u64,
    pub dot_before: f64,
    pub threshold_before: f64,
    pub t_before: u64,
    pub state: &'a TrainState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassProgress {
    pub pass: usize,
    pub t: u64,
    /// Smallest `w . y_k / |w|` seen during the pass, using the weights at
    /// presentation time and the norm at the end of the pass.
    pub min_margin: f64,
}

pub trait Observer {
    fn on_update(&mut self, _event: &UpdateEvent<'_>) {}
    fn on_pass(&mut self, _progress: &PassProgress) {}
}

impl Observer for () {}

impl<F: FnMut(&PassProgress)> Observer for F {
    fn on_pass(&mut self, progress: &PassProgress) {
        self(progress)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActiveSets {
    /// Indices into the dataset.
    pub level1: Vec<usize>,
    /// Indices into the dataset, all drawn from `level1`.
    pub level2: Vec<usize>,
    pub level1_epochs: u64,
    pub level2_epochs: u64,
    pub presentations: u64,
    pub updates: u64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub algo: Algorithm,
    pub hp: Hyperparams,
    /// A full pass found no margin error.
    pub converged: bool,
    pub state: TrainState,
    pub t_c: u64,
    pub full_passes: usize,
    /// Pattern presentations, active-set cycles included.
    pub presentations: u64,
    pub active: ActiveSets,
    pub wall_time: Duration,
}

/// Threshold of the misclassification condition at the current state.
pub fn current_threshold(algo: Algorithm, hp: &Hyperparams, state: &TrainState) -> f64 {
    match algo {
        Algorithm::Mpvs => mpvs::mpvs_threshold(state.t, hp),
        Algorithm::Mpcs | Algorithm::Perceptron => hp.b,
    }
}

/// Selects level 1 over the full dataset and level 2 over level 1 with the
/// `cbar`-slackened condition, without updating.
pub fn build_active_sets(
    dataset: &Dataset,
    state: &TrainState,
    hp: &Hyperparams,
    algo: Algorithm,
) -> ActiveSets {
    let limit = hp.cbar * current_threshold(algo, hp, state);
    let level1: Vec<usize> = (0..dataset.len())
        .filter(|&k| state.dot(dataset.pattern(k)) <= limit)
        .collect();
    let level2 = level1
        .iter()
        .copied()
        .filter(|&k| state.dot(dataset.pattern(k)) <= limit)
        .collect();
    ActiveSets {
        level1,
        level2,
        ..Default::default()
    }
}

/// Number of margin errors of `state` over the whole dataset.
pub fn count_margin_errors(
    dataset: &Dataset,
    state: &TrainState,
    hp: &Hyperparams,
    algo: Algorithm,
) -> usize {
    let thr = current_threshold(algo, hp, state);
    dataset
        .patterns()
        .iter()
        .filter(|p| state.dot(p) <= thr)
        .count()
}

struct BudgetExhausted;

struct Runner<'a> {
    ds: &'a Dataset,
    hp: &'a Hyperparams,
    algo: Algorithm,
    lambda: f64,
    state: TrainState,
    presentations: u64,
    observer: &'a mut dyn Observer,
}

impl Runner<'_> {
    fn present(
        &mut self,
        k: usize,
        select: Option<&mut Vec<usize>>,
        min_dot: &mut f64,
    ) -> std::result::Result<bool, BudgetExhausted> {
        let p = self.ds.pattern(k);
        let dot = self.state.dot(p);
        let thr = current_threshold(self.algo, self.hp, &self.state);
        self.presentations += 1;
        self.state.total_presentations += 1;
        *min_dot = min_dot.min(dot);
        if let Some(sel) = select {
            if dot <= self.hp.cbar * thr {
                sel.push(k);
            }
        }
        if !(dot <= thr) {
            return Ok(false);
        }
        let remaining = self.hp.max_updates.saturating_sub(self.state.t);
        if remaining == 0 {
            return Err(BudgetExhausted);
        }
        let lup = self.hp.lup.min(remaining);
        let t_before = self.state.t;
        let mu = match self.algo {
            Algorithm::Mpvs => {
                let (mu, sum) = mpvs::max_multiplicity(
                    dot,
                    p.sq_norm(),
                    t_before,
                    self.hp.eta,
                    self.hp.b,
                    self.hp.n,
                    lup,
                )
                .expect("condition checked above");
                mpvs::apply(&mut self.state, p, mu, sum, self.hp.eta);
                mu
            }
            Algorithm::Mpcs | Algorithm::Perceptron => {
                let mu = mpcs::max_multiplicity(
                    dot,
                    p.sq_norm(),
                    self.hp.eta,
                    self.lambda,
                    self.hp.b,
                    lup,
                )
                .expect("hyperparameters validated");
                mpcs::apply(&mut self.state, p, mu, self.hp.eta, self.lambda);
                mu
            }
        };
        self.state.updates_this_pass += 1;
        self.observer.on_update(&UpdateEvent {
            pattern_index: k,
            mu,
            dot_before: dot,
            threshold_before: thr,
            t_before,
            state: &self.state,
        });
        Ok(true)
    }

    /// One sweep over `indices`; returns the number of updates made.
    fn sweep(
        &mut self,
        indices: &[usize],
        mut select: Option<&mut Vec<usize>>,
        min_dot: &mut f64,
    ) -> std::result::Result<u64, BudgetExhausted> {
        let mut updates = 0;
        for &k in indices {
            if self.present(k, select.as_deref_mut(), min_dot)? {
                updates += 1;
            }
        }
        Ok(updates)
    }
}

pub fn train(
    dataset: &Dataset,
    hp: &Hyperparams,
    algo: Algorithm,
    order: Order,
    use_active_sets: bool,
) -> Result<RunResult> {
    train_observed(dataset, hp, algo, order, use_active_sets, &mut ())
}

/// Trains until a clean full pass or until `hp.max_updates` is reached.
pub fn train_observed(
    dataset: &Dataset,
    hp: &Hyperparams,
    algo: Algorithm,
    order: Order,
    use_active_sets: bool,
    observer: &mut dyn Observer,
) -> Result<RunResult> {
    hp.validate(algo, dataset)?;
    let start = Instant::now();
    let mut runner = Runner {
        ds: dataset,
        hp,
        algo,
        lambda: hp.effective_lambda(algo),
        state: TrainState::new(dataset.dim()),
        presentations: 0,
        observer,
    };
    let mut rng = match order {
        Order::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Order::Sequential => None,
    };
    let mut full: Vec<usize> = (0..dataset.len()).collect();
    let mut active = ActiveSets::default();
    let mut full_passes = 0;

    let converged = 'outer: loop {
        if let Some(rng) = rng.as_mut() {
            full.shuffle(rng);
        }
        runner.state.updates_this_pass = 0;
        active.level1.clear();
        let mut min_dot = f64::INFINITY;
        let sel = use_active_sets.then_some(&mut active.level1);
        let outcome = runner.sweep(&full, sel, &mut min_dot);
        full_passes += 1;
        let norm = runner.state.norm();
        let progress = PassProgress {
            pass: full_passes,
            t: runner.state.t,
            min_margin: if norm > 0.0 { min_dot / norm } else { f64::NEG_INFINITY },
        };
        runner.observer.on_pass(&progress);
        match outcome {
            Err(BudgetExhausted) => break false,
            Ok(0) => break true,
            Ok(_) => {}
        }
        if !use_active_sets {
            continue;
        }
        let mut scratch = f64::INFINITY;
        for _ in 0..hp.nep1 {
            active.level2.clear();
            active.level1_epochs += 1;
            let before = runner.presentations;
            let level1 = std::mem::take(&mut active.level1);
            let r = runner.sweep(&level1, Some(&mut active.level2), &mut scratch);
            active.level1 = level1;
            active.presentations += runner.presentations - before;
            let u1 = match r {
                Ok(u) => u,
                Err(BudgetExhausted) => break 'outer false,
            };
            active.updates += u1;
            if u1 == 0 {
                break;
            }
            let level2 = std::mem::take(&mut active.level2);
            for _ in 0..hp.nep2 {
                active.level2_epochs += 1;
                let before = runner.presentations;
                let r = runner.sweep(&level2, None, &mut scratch);
                active.presentations += runner.presentations - before;
                match r {
                    Ok(0) => break,
                    Ok(u) => active.updates += u,
                    Err(BudgetExhausted) => break 'outer false,
                }
            }
            active.level2 = level2;
        }
    };

    let state = runner.state;
    Ok(RunResult {
        algo,
        hp: hp.clone(),
        converged,
        t_c: state.t,
        presentations: runner.presentations,
        state,
        full_passes,
        active,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_dataset, RawExample};

    fn toy() -> Dataset {
        build_dataset(
            &[
                RawExample::new(1, vec![(1, 1.0)]),
                RawExample::new(-1, vec![(1, -1.0)]),
            ],
            1.0,
            0.0,
        )
        .unwrap()
    }

    fn toy_hp() -> Hyperparams {
        Hyperparams { eta: 1.0, b: 0.5, n: 0, ..Default::default() }
    }

    #[test]
    fn toy_mpvs_trace() {
        for active in [false, true] {
            let r = train(&toy(), &toy_hp(), Algorithm::Mpvs, Order::Sequential, active).unwrap();
            assert!(r.converged);
            assert_eq!(r.t_c, 2);
            assert_eq!(r.state.weights(), vec![2.0, 0.0]);
            assert_eq!(r.full_passes, 2);
        }
    }

    #[test]
    fn zero_budget_stops_immediately() {
        let hp = Hyperparams { max_updates: 0, ..toy_hp() };
        let r = train(&toy(), &hp, Algorithm::Mpvs, Order::Sequential, true).unwrap();
        assert!(!r.converged);
        assert!(r.state.is_zero());
        assert_eq!(r.t_c, 0);
    }

    #[test]
    fn converged_runs_clear_every_threshold() {
        let hp = Hyperparams { eta: 0.05, b: 1.0, lambda: 0.3, ..Default::default() };
        let ds = toy();
        for algo in [Algorithm::Mpcs, Algorithm::Mpvs, Algorithm::Perceptron] {
            let r = train(&ds, &hp, algo, Order::Shuffled(3), true).unwrap();
            assert!(r.converged);
            assert_eq!(count_margin_errors(&ds, &r.state, &hp, algo), 0);
            let thr = current_threshold(algo, &hp, &r.state);
            for p in ds.patterns() {
                assert!(r.state.dot(p) > thr);
            }
        }
    }

    #[test]
    fn active_set_examples() {
        let ds = toy();
        let hp = toy_hp();
        let zero = TrainState::new(2);
        let a = build_active_sets(&ds, &zero, &hp, Algorithm::Mpvs);
        assert_eq!(a.level1, vec![0, 1]);
        let wide = Hyperparams { cbar: 1e300, ..hp.clone() };
        let s = TrainState::from_weights(vec![2.0, 0.0], 2, 2.0);
        assert_eq!(build_active_sets(&ds, &s, &wide, Algorithm::Mpvs).level1, vec![0, 1]);
        let a = build_active_sets(&ds, &s, &hp, Algorithm::Mpvs);
        assert!(a.level1.is_empty() && a.level2.is_empty());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let hp = Hyperparams { eta: 0.5, b: 10.0, lambda: 1.0, ..Default::default() };
        assert!(train(&toy(), &hp, Algorithm::Mpcs, Order::Sequential, false).is_err());
    }

    #[test]
    fn progress_reported_per_pass() {
        let mut passes = Vec::new();
        let mut obs = |p: &PassProgress| passes.push(*p);
        let r = train_observed(&toy(), &toy_hp(), Algorithm::Mpvs, Order::Sequential, false, &mut obs)
            .unwrap();
        assert_eq!(passes.len(), r.full_passes);
        assert_eq!(passes.last().unwrap().t, 2);
        assert!((passes.last().unwrap().min_margin - 1.0).abs() < 1e-15);
    }
}
