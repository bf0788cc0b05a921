//! Seeded synthetic datasets for tests, benchmarks and the self-test.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::RawExample;

/// Features uniform in `[-1, 1]^d`, labelled by a random hyperplane with
/// bias; points within `gap` of the plane (in units of the plane normal's
/// norm in augmented space, `rho = 1`) are rejected and redrawn, so the
/// result is separable with margin at least `gap`.
pub fn separable(m: usize, d: usize, gap: f64, seed: u64) -> Vec<RawExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // keep the bias moderate so both classes appear
    u[d] *= 0.3;
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    u.iter_mut().for_each(|v| *v /= norm);
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = x.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() + u[d];
        if s.abs() < gap {
            continue;
        }
        out.push(example(if s > 0.0 { 1 } else { -1 }, &x));
    }
    out
}

/// Like [`separable`] with `gap = 0`, then each label is flipped with
/// probability `flip`, which typically makes the set inseparable.
pub fn noisy(m: usize, d: usize, flip: f64, seed: u64) -> Vec<RawExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    separable(m, d, 0.0, seed)
        .into_iter()
        .map(|mut ex| {
            if rng.gen_bool(flip) {
                ex.label = -ex.label;
            }
            ex
        })
        .collect()
}

fn example(label: i8, x: &[f64]) -> RawExample {
    let feats = x
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i + 1, *v))
        .collect();
    RawExample::new(label, feats)
}
