//! Staged tuning loops that drive repeated runs until the after-run
//! certificate reaches a target fraction of the maximum margin.

use std::time::Duration;

use super::{certify_run, Certificate};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{Algorithm, Hyperparams, MarginReport};
use crate::scheduler::{train, Order, RunResult};

/// Improvement in `f_after` below which a stage counts as stagnating.
const STAGNATION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub stage: usize,
    pub eta: f64,
    pub lambda: f64,
    /// Margin lower bound that fixed `lambda` for this stage.
    pub gamma_bar: f64,
    pub t_c: u64,
    pub gamma_prime: f64,
    pub f_after: f64,
    pub gamma_d_upper: f64,
    pub full_passes: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct StagedOutcome {
    /// Run with the best certificate seen.
    pub run: RunResult,
    pub report: MarginReport,
    pub certificate: Certificate,
    pub stages: Vec<StageRecord>,
    pub reached: bool,
}

struct Best {
    run: RunResult,
    report: MarginReport,
    certificate: Certificate,
}

fn run_stage(
    dataset: &Dataset,
    hp: &Hyperparams,
    algo: Algorithm,
    order: Order,
    use_active_sets: bool,
    stage: usize,
) -> Result<(RunResult, MarginReport, Certificate)> {
    let run = train(dataset, hp, algo, order, use_active_sets)?;
    if !run.converged {
        return Err(Error::NonConvergence {
            stage,
            max_updates: hp.max_updates,
        });
    }
    let (report, cert) = certify_run(&run, dataset, None)?;
    Ok((run, report, cert))
}

fn check_target(target_f: f64, max_stages: usize) -> Result<()> {
    if !(target_f < 1.0) {
        return Err(Error::InvalidParams(format!(
            "target fraction must be below 1, got {target_f}"
        )));
    }
    if max_stages == 0 {
        return Err(Error::InvalidParams("max_stages must be at least 1".into()));
    }
    Ok(())
}

/// Constant-shrinking runs with a growing `lambda`.
///
/// Stage 0 runs with `lambda = 0`. Every later stage uses
/// `lambda = (2/(2+delta)) gamma_bar^2 / b`, where `gamma_bar` is the largest
/// margin achieved so far and `delta = eta R^2 / b`. Since `gamma_bar` is a
/// valid lower bound on the maximum margin, `lambda` stays in the admissible
/// range. When `f_after` improves by less than `1e-4` over a stage, or
/// `gamma_bar` did not grow (the next run would be a repeat), `eta` is
/// halved. Stops when `f_after >= target_f` or after `max_stages` runs.
pub fn staged_lambda(
    dataset: &Dataset,
    hp_base: &Hyperparams,
    target_f: f64,
    max_stages: usize,
    order: Order,
    use_active_sets: bool,
) -> Result<StagedOutcome> {
    check_target(target_f, max_stages)?;
    let r2 = dataset.radius() * dataset.radius();
    let mut hp = hp_base.clone();
    hp.lambda = 0.0;
    let mut gamma_bar: f64 = 0.0;
    let mut stages = Vec::new();
    let mut best: Option<Best> = None;
    let mut prev_f = f64::NEG_INFINITY;

    for stage in 0..max_stages {
        let (run, report, cert) =
            run_stage(dataset, &hp, Algorithm::Mpcs, order, use_active_sets, stage)?;
        stages.push(StageRecord {
            stage,
            eta: hp.eta,
            lambda: hp.lambda,
            gamma_bar,
            t_c: run.t_c,
            gamma_prime: report.gamma_prime,
            f_after: report.f_after,
            gamma_d_upper: report.gamma_d_upper,
            full_passes: run.full_passes,
            wall_time: run.wall_time,
        });
        let f = report.f_after;
        let prev_bar = gamma_bar;
        gamma_bar = gamma_bar.max(report.gamma_prime);
        if best.as_ref().is_none_or(|b| f > b.report.f_after) {
            best = Some(Best { run, report, certificate: cert });
        }
        if f >= target_f {
            break;
        }
        // an unchanged gamma_bar would repeat the same run verbatim
        if stage > 0 && (f - prev_f < STAGNATION || gamma_bar <= prev_bar) {
            hp.eta /= 2.0;
        }
        prev_f = prev_f.max(f);
        let delta = hp.eta * r2 / hp.b;
        hp.lambda = 2.0 / (2.0 + delta) * gamma_bar * gamma_bar / hp.b;
    }
    Ok(finish(best, stages, target_f))
}

/// Variable-shrinking runs with `eta` halved after every stage that misses
/// `target_f`; `n` stays fixed.
pub fn tune_mpvs_eta(
    dataset: &Dataset,
    hp_base: &Hyperparams,
    target_f: f64,
    max_stages: usize,
    order: Order,
    use_active_sets: bool,
) -> Result<StagedOutcome> {
    check_target(target_f, max_stages)?;
    let mut hp = hp_base.clone();
    let mut stages = Vec::new();
    let mut best: Option<Best> = None;
    for stage in 0..max_stages {
        let (run, report, cert) =
            run_stage(dataset, &hp, Algorithm::Mpvs, order, use_active_sets, stage)?;
        stages.push(StageRecord {
            stage,
            eta: hp.eta,
            lambda: 0.0,
            gamma_bar: 0.0,
            t_c: run.t_c,
            gamma_prime: report.gamma_prime,
            f_after: report.f_after,
            gamma_d_upper: report.gamma_d_upper,
            full_passes: run.full_passes,
            wall_time: run.wall_time,
        });
        let f = report.f_after;
        if best.as_ref().is_none_or(|b| f > b.report.f_after) {
            best = Some(Best { run, report, certificate: cert });
        }
        if f >= target_f {
            break;
        }
        hp.eta /= 2.0;
    }
    Ok(finish(best, stages, target_f))
}

fn finish(best: Option<Best>, stages: Vec<StageRecord>, target_f: f64) -> StagedOutcome {
    let best = best.expect("at least one stage runs");
    StagedOutcome {
        reached: best.report.f_after >= target_f,
        run: best.run,
        report: best.report,
        certificate: best.certificate,
        stages,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_dataset, RawExample};

    fn toy() -> Dataset {
        let ex = vec![
            RawExample::new(1, vec![(1, 1.0)]),
            RawExample::new(-1, vec![(1, -1.0), (2, 0.5)]),
            RawExample::new(1, vec![(1, 0.8), (2, -0.3)]),
        ];
        build_dataset(&ex, 1.0, 0.0).unwrap()
    }

    fn base(ds: &Dataset) -> Hyperparams {
        let r2 = ds.radius() * ds.radius();
        Hyperparams { eta: 0.1, b: r2, max_updates: 10_000_000, ..Default::default() }
    }

    #[test]
    fn single_stage_is_classical() {
        let ds = toy();
        let out = staged_lambda(&ds, &base(&ds), 0.999, 1, Order::Sequential, true).unwrap();
        assert_eq!(out.stages.len(), 1);
        assert_eq!(out.stages[0].lambda, 0.0);
        let plain = train(&ds, &base(&ds), Algorithm::Mpcs, Order::Sequential, true).unwrap();
        assert_eq!(out.run.state.weights(), plain.state.weights());
    }

    #[test]
    fn early_exit() {
        let ds = toy();
        let out = staged_lambda(&ds, &base(&ds), 0.01, 5, Order::Sequential, true).unwrap();
        assert_eq!(out.stages.len(), 1);
        assert!(out.reached);
    }

    #[test]
    fn gamma_bar_non_decreasing_and_target_reached() {
        let ds = toy();
        let out = staged_lambda(&ds, &base(&ds), 0.99, 30, Order::Sequential, true).unwrap();
        assert!(out.reached, "{:?}", out.stages);
        for w in out.stages.windows(2) {
            assert!(w[1].gamma_bar >= w[0].gamma_bar);
        }
        assert!(out.stages.iter().skip(1).all(|s| s.lambda > 0.0));
    }

    #[test]
    fn mpvs_tuning() {
        let ds = toy();
        let hp = Hyperparams { n: 3, ..base(&ds) };
        let out = tune_mpvs_eta(&ds, &hp, 0.99, 12, Order::Sequential, true).unwrap();
        assert!(out.reached, "{:?}", out.stages);
    }

    #[test]
    fn rejects_bad_target() {
        let ds = toy();
        assert!(staged_lambda(&ds, &base(&ds), 1.0, 3, Order::Sequential, true).is_err());
        assert!(tune_mpvs_eta(&ds, &base(&ds), 0.5, 0, Order::Sequential, true).is_err());
    }
}
