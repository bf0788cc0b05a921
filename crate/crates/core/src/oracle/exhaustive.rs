//! Brute-force minimum-norm point for tiny datasets: the affine minimizer of
//! every support subset, keeping those inside the simplex.

use crate::data::Dataset;

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (rhs[i] - s) / a[i][i];
    }
    Some(x)
}

/// `(norm, point)` of the minimum-norm hull point, or `None` when the
/// dataset has more than `max_m` patterns.
pub(crate) fn exhaustive_min_norm(ds: &Dataset, max_m: usize) -> Option<(f64, Vec<f64>)> {
    let m = ds.len();
    if m > max_m {
        return None;
    }
    let gram: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| ds.pattern(i).dot_pattern(ds.pattern(j))).collect())
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let s = idx.len();
        // [G 1; 1^T 0] [alpha; -mu] = [0; 1]
        let mut a = vec![vec![0.0; s + 1]; s + 1];
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[r][c] = gram[i][j];
            }
            a[r][s] = 1.0;
            a[s][r] = 1.0;
        }
        let mut rhs = vec![0.0; s + 1];
        rhs[s] = 1.0;
        let Some(sol) = solve(a, rhs) else { continue };
        if sol[..s].iter().any(|&w| w < -1e-12) {
            continue;
        }
        let mut x = vec![0.0; ds.dim()];
        for (&k, &w) in idx.iter().zip(&sol) {
            ds.pattern(k).add_to(&mut x, w);
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|b| norm < b.0) {
            best = Some((norm, x));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let x = solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 1.0]).is_none());
    }
}
