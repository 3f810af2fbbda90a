//! Seeded random instances that are feasible by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{dot, DenseQp};

fn instance(seed: u64, n: usize, strictly_convex: bool) -> DenseQp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m_eq = rng.gen_range(0..=n / 3);
    let m_in = rng.gen_range(0..=n);
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut x0 = Vec::with_capacity(n);
    for _ in 0..n {
        let l: f64 = rng.gen_range(-5.0..1.0);
        let u = l + rng.gen_range(0.5..6.0);
        x0.push(rng.gen_range(l..u));
        lower.push(l);
        upper.push(u);
    }
    let row = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n)
            .map(|_| {
                if rng.gen_bool(0.4) {
                    rng.gen_range(-3.0..3.0)
                } else {
                    0.0
                }
            })
            .collect()
    };
    let a_eq: Vec<Vec<f64>> = (0..m_eq).map(|_| row(&mut rng)).collect();
    let b_eq = a_eq.iter().map(|r| dot(r, &x0)).collect();
    let g: Vec<Vec<f64>> = (0..m_in).map(|_| row(&mut rng)).collect();
    let h = g
        .iter()
        .map(|r| dot(r, &x0) + rng.gen_range(0.0..2.0))
        .collect();
    let q = (0..n)
        .map(|_| {
            if strictly_convex {
                rng.gen_range(0.1..5.0)
            } else {
                0.0
            }
        })
        .collect();
    let c = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
    DenseQp {
        q,
        c,
        a_eq,
        b_eq,
        g,
        h,
        lower,
        upper,
    }
}

/// A bounded, feasible LP with `n` variables.
pub fn random_lp(seed: u64, n: usize) -> DenseQp {
    instance(seed, n, false)
}

/// A bounded, feasible, strictly convex QP with `n` variables.
pub fn random_qp(seed: u64, n: usize) -> DenseQp {
    instance(seed, n, true)
}
