//! Minimum-norm point of the convex hull of the patterns (Wolfe's method).
//!
//! The corral `S` is kept together with an upper-triangular `R` satisfying
//! `R^T R = G_S + s 11^T`, where `G_S` is the Gram matrix of the corral and
//! `s > 0` a scale constant. The affine minimizer over `S` is `alpha ∝ M^{-1} 1`.

use crate::data::Dataset;

/// Upper-triangular factor, row-major, `r[i][j]` meaningful for `i <= j`.
#[derive(Debug, Default)]
struct Factor {
    r: Vec<Vec<f64>>,
}

impl Factor {
    fn len(&self) -> usize {
        self.r.len()
    }

    /// Appends a column given `M` entries against the current corral
    /// (`cross`) and the diagonal entry. Returns false when the new point is
    /// affinely dependent on the corral.
    fn push(&mut self, cross: &[f64], diag: f64) -> bool {
        let s = self.len();
        let mut col = vec![0.0; s];
        for i in 0..s {
            let mut v = cross[i];
            for k in 0..i {
                v -= self.r[k][i] * col[k];
            }
            col[i] = v / self.r[i][i];
        }
        let rest = diag - col.iter().map(|v| v * v).sum::<f64>();
        if !(rest > 1e-14 * diag) {
            return false;
        }
        for (i, row) in self.r.iter_mut().enumerate() {
            row.push(col[i]);
        }
        let mut last = vec![0.0; s + 1];
        last[s] = rest.sqrt();
        self.r.push(last);
        true
    }

    /// Deletes column `k` and restores triangular form with Givens rotations.
    fn remove(&mut self, k: usize) {
        for row in &mut self.r {
            row.remove(k);
        }
        let s = self.len();
        for j in k..s - 1 {
            let (a, b) = (self.r[j][j], self.r[j + 1][j]);
            let h = a.hypot(b);
            let (c, sn) = (a / h, b / h);
            for col in j..s - 1 {
                let (x, y) = (self.r[j][col], self.r[j + 1][col]);
                self.r[j][col] = c * x + sn * y;
                self.r[j + 1][col] = -sn * x + c * y;
            }
        }
        self.r.pop();
    }

    /// Solves `R^T R v = 1`.
    fn solve_ones(&self) -> Vec<f64> {
        let s = self.len();
        let mut u = vec![0.0; s];
        for i in 0..s {
            let mut v = 1.0;
            for k in 0..i {
                v -= self.r[k][i] * u[k];
            }
            u[i] = v / self.r[i][i];
        }
        for i in (0..s).rev() {
            let mut v = u[i];
            for k in i + 1..s {
                v -= self.r[i][k] * u[k];
            }
            u[i] = v / self.r[i][i];
        }
        u
    }
}

pub(crate) struct MnpOutcome {
    pub point: Vec<f64>,
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    pub iterations: usize,
    /// `(|x|^2 - min_k x.y_k) / |x|`, or `|x|` once the origin is reached.
    pub gap: f64,
    pub converged: bool,
    pub origin_reached: bool,
}

fn combine(ds: &Dataset, support: &[usize], weights: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; ds.dim()];
    for (&k, &w) in support.iter().zip(weights) {
        ds.pattern(k).add_to(&mut x, w);
    }
    x
}

fn argmin_dot(ds: &Dataset, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, p) in ds.patterns().iter().enumerate() {
        let v = p.dot(x);
        if v < best.1 {
            best = (k, v);
        }
    }
    best
}

pub(crate) fn min_norm_point(ds: &Dataset, tol: f64, max_iter: usize) -> MnpOutcome {
    let r = ds.radius();
    let scale = r * r;
    let mut start = 0;
    for (k, p) in ds.patterns().iter().enumerate() {
        if p.sq_norm() < ds.pattern(start).sq_norm() {
            start = k;
        }
    }
    let mut support = vec![start];
    let mut weights = vec![1.0];
    let mut factor = Factor::default();
    let p0 = ds.pattern(start);
    factor.push(&[], p0.sq_norm() + scale);
    let mut x = combine(ds, &support, &weights);
    let mut iterations = 0;

    let finish = |x: Vec<f64>, support, weights, iterations, gap, converged, origin| MnpOutcome {
        point: x,
        support,
        weights,
        iterations,
        gap,
        converged,
        origin_reached: origin,
    };

    loop {
        let sq = x.iter().map(|v| v * v).sum::<f64>();
        let norm = sq.sqrt();
        if norm <= 1e-12 * r {
            return finish(x, support, weights, iterations, norm, true, true);
        }
        let (j, dmin) = argmin_dot(ds, &x);
        let gap = (sq - dmin) / norm;
        if gap <= tol {
            return finish(x, support, weights, iterations, gap, true, false);
        }
        if iterations >= max_iter || support.contains(&j) {
            return finish(x, support, weights, iterations, gap, false, false);
        }
        iterations += 1;

        let pj = ds.pattern(j);
        let cross: Vec<f64> = support
            .iter()
            .map(|&k| ds.pattern(k).dot_pattern(pj) + scale)
            .collect();
        if !factor.push(&cross, pj.sq_norm() + scale) {
            return finish(x, support, weights, iterations, gap, false, false);
        }
        support.push(j);
        weights.push(0.0);

        // minor cycle
        loop {
            let v = factor.solve_ones();
            let total: f64 = v.iter().sum();
            let alpha: Vec<f64> = v.iter().map(|a| a / total).collect();
            if alpha.iter().all(|&a| a > 1e-15) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= 1e-15 {
                    let d = w - a;
                    if d > 0.0 {
                        theta = theta.min(w / d);
                    }
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = (1.0 - theta) * *w + theta * a;
            }
            // drop every vanishing weight, at least the smallest one
            let mut drop = weights
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            loop {
                factor.remove(drop);
                support.remove(drop);
                weights.remove(drop);
                match weights.iter().position(|&w| w <= 1e-15) {
                    Some(i) => drop = i,
                    None => break,
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            if support.len() == 1 {
                weights[0] = 1.0;
                break;
            }
        }
        x = combine(ds, &support, &weights);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_add_remove_matches_fresh() {
        // M = G + 11^T for points e1, e2, e3, (1,1,1)
        let pts = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]];
        let m = |i: usize, j: usize| -> f64 {
            pts[i].iter().zip(&pts[j]).map(|(a, b)| a * b).sum::<f64>() + 1.0
        };
        let mut f = Factor::default();
        for j in 0..4 {
            let cross: Vec<f64> = (0..j).map(|i| m(i, j)).collect();
            assert!(f.push(&cross, m(j, j)));
        }
        f.remove(1);
        let keep = [0usize, 2, 3];
        let mut g = Factor::default();
        for (jj, &j) in keep.iter().enumerate() {
            let cross: Vec<f64> = keep[..jj].iter().map(|&i| m(i, j)).collect();
            g.push(&cross, m(j, j));
        }
        // R is unique up to row signs
        for i in 0..3 {
            for j in i..3 {
                assert!((f.r[i][j].abs() - g.r[i][j].abs()).abs() < 1e-12);
            }
        }
        let (a, b) = (f.solve_ones(), g.solve_ones());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_column_rejected() {
        let mut f = Factor::default();
        f.push(&[], 2.0);
        assert!(!f.push(&[2.0], 2.0));
    }
}
