//! Ground truth for small datasets.
//!
//! The maximum directional margin `max_{|u|=1} min_k u . y_k` equals the
//! distance from the origin to the convex hull of the patterns whenever the
//! origin lies outside it, with the optimal direction pointing at the
//! minimum-norm hull point. That point is found here with an algorithm
//! sharing no code with the training solvers.

mod exhaustive;
mod mnp;
mod reference;

pub use reference::{reference_train, ReferenceRun, REFERENCE_MAX_M};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Relative duality gap (in units of `R`) at which the iteration stops.
pub const GAP_TOL: f64 = 1e-10;
/// Largest dataset handled by [`exact_gamma_d_exhaustive`].
pub const EXHAUSTIVE_MAX_M: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Norm of the minimum-norm hull point; 0 when the data are not
    /// separable through the origin.
    pub gamma_d: f64,
    /// Unit vector along the minimum-norm point (zero vector if inseparable).
    pub witness: Vec<f64>,
    /// `min_k witness . y_k`, a lower bound on the maximum margin.
    pub gamma_lower: f64,
    pub gap: f64,
    pub iterations: usize,
    pub separable: bool,
    /// Patterns carrying weight in the minimum-norm point, and their
    /// convex weights.
    pub support: Vec<usize>,
    pub support_weights: Vec<f64>,
}

fn min_dot(ds: &Dataset, u: &[f64]) -> f64 {
    ds.patterns()
        .iter()
        .map(|p| p.dot(u))
        .fold(f64::INFINITY, f64::min)
}

fn result_from_point(ds: &Dataset, point: Vec<f64>) -> (f64, Vec<f64>, f64) {
    let norm = point.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u: Vec<f64> = point.iter().map(|v| v / norm).collect();
    let lower = min_dot(ds, &u);
    (norm, u, lower)
}

/// Maximum directional margin and its optimal direction, to a duality gap of
/// `1e-10 R`.
pub fn exact_gamma_d(dataset: &Dataset) -> Result<OracleResult> {
    let r = dataset.radius();
    let max_iter = 100 * dataset.len() + 10_000;
    let out = mnp::min_norm_point(dataset, GAP_TOL * r, max_iter);
    if out.origin_reached {
        return Ok(OracleResult {
            gamma_d: 0.0,
            witness: vec![0.0; dataset.dim()],
            gamma_lower: 0.0,
            gap: out.gap,
            iterations: out.iterations,
            separable: false,
            support: out.support,
            support_weights: out.weights,
        });
    }
    // a stall from rounding is acceptable when the gap is already tiny
    if !out.converged && out.gap > 100.0 * GAP_TOL * r {
        return Err(Error::OracleStalled {
            iterations: out.iterations,
            gap: out.gap,
        });
    }
    let (norm, witness, lower) = result_from_point(dataset, out.point);
    Ok(OracleResult {
        gamma_d: norm,
        separable: lower > 0.0,
        witness,
        gamma_lower: lower,
        gap: out.gap,
        iterations: out.iterations,
        support: out.support,
        support_weights: out.weights,
    })
}

/// Same quantity by enumerating all support subsets; only for
/// `m <= EXHAUSTIVE_MAX_M`.
pub fn exact_gamma_d_exhaustive(dataset: &Dataset) -> Result<OracleResult> {
    let (norm, point) = exhaustive::exhaustive_min_norm(dataset, EXHAUSTIVE_MAX_M).ok_or(
        Error::SizeCap {
            m: dataset.len(),
            cap: EXHAUSTIVE_MAX_M,
        },
    )?;
    if norm <= 1e-12 * dataset.radius() {
        return Ok(OracleResult {
            gamma_d: 0.0,
            witness: vec![0.0; dataset.dim()],
            gamma_lower: 0.0,
            gap: norm,
            iterations: 0,
            separable: false,
            support: Vec::new(),
            support_weights: Vec::new(),
        });
    }
    let (norm, witness, lower) = result_from_point(dataset, point);
    Ok(OracleResult {
        gamma_d: norm,
        separable: lower > 0.0,
        gap: norm - lower,
        witness,
        gamma_lower: lower,
        iterations: 0,
        support: Vec::new(),
        support_weights: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::dataset_from_patterns;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn symmetric_pair() {
        let ds = dataset_from_patterns(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let o = exact_gamma_d(&ds).unwrap();
        assert!(close(o.gamma_d, 1.0));
        assert!(close(o.witness[0], 1.0) && close(o.witness[1], 0.0));
        assert!(o.separable);
    }

    #[test]
    fn single_pattern() {
        let ds = dataset_from_patterns(&[vec![3.0, 4.0]]).unwrap();
        let o = exact_gamma_d(&ds).unwrap();
        assert!(close(o.gamma_d, 5.0));
        assert!(close(o.witness[0], 0.6) && close(o.witness[1], 0.8));
    }

    #[test]
    fn segment_midpoint() {
        let ds = dataset_from_patterns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let o = exact_gamma_d(&ds).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(o.gamma_d, h));
        assert!(close(o.witness[0], h) && close(o.witness[1], h));
        let e = exact_gamma_d_exhaustive(&ds).unwrap();
        assert!(close(e.gamma_d, o.gamma_d));
    }

    #[test]
    fn inseparable() {
        let ds = dataset_from_patterns(&[vec![1.0, 1.0], vec![-1.0, -1.0], vec![0.0, 1.0]]).unwrap();
        let o = exact_gamma_d(&ds).unwrap();
        assert!(!o.separable);
        assert_eq!(o.gamma_d, 0.0);
        assert!(!exact_gamma_d_exhaustive(&ds).unwrap().separable);
    }

    #[test]
    fn exhaustive_size_cap() {
        let rows: Vec<Vec<f64>> = (0..13).map(|i| vec![i as f64, 1.0]).collect();
        assert!(matches!(
            exact_gamma_d_exhaustive(&dataset_from_patterns(&rows).unwrap()),
            Err(Error::SizeCap { .. })
        ));
    }
}
