//! Deterministic instance and function generators.
//!
//! Everything here derives its randomness from a `(seed, stream)` pair fed
//! into ChaCha8, so results are bitwise reproducible across platforms and
//! thread schedules: independent trials or restarts each get their own
//! stream index instead of sharing a generator.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::ReversibleChain;
use crate::decomposition::FuzzyPartition;
use crate::linalg::Matrix;
use crate::math;

/// A reproducible generator for the given seed and stream index.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&stream.to_le_bytes());
    bytes[16..24].copy_from_slice(&0x9e37_79b9_7f4a_7c15u64.to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

/// Standard normal by Box–Muller.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(math::TAU * u2)
}

/// i.i.d. standard normal entries.
pub fn normal_function(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| standard_normal(rng)).collect()
}

/// `exp(scale · Z)` with `Z` standard normal: positive, spanning several
/// orders of magnitude without overflow for moderate `scale`.
pub fn log_normal_function(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| math::exp(scale * standard_normal(rng)))
        .collect()
}

/// Log-uniform values in `[e^lo, e^hi]`.
pub fn log_uniform_function(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| math::exp(rng.gen_range(lo..=hi))).collect()
}

/// A random irreducible reversible chain on `n` states.
///
/// Built from a symmetric nonnegative edge-weight matrix `w` and a random
/// positive `π`: `Q(x,y) = w(x,y)/π(x)` is then in detailed balance by
/// construction. With `dense`, every off-diagonal weight is strictly
/// positive; otherwise roughly half the pairs carry an edge, with a random
/// spanning path keeping the chain irreducible.
pub fn random_reversible_chain(n: usize, dense: bool, rng: &mut ChaCha8Rng) -> ReversibleChain {
    assert!(n >= 1);
    let mut pi: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = pi.iter().sum();
    for p in &mut pi {
        *p /= total;
    }

    let mut weights = Matrix::zeros(n, n);
    for x in 0..n {
        for y in (x + 1)..n {
            let keep = dense || rng.gen::<f64>() < 0.5;
            if keep {
                let w = rng.gen_range(0.05..1.0);
                weights[(x, y)] = w;
                weights[(y, x)] = w;
            }
        }
    }
    // Spanning path through a random permutation keeps the support connected.
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    for pair in order.windows(2) {
        let (x, y) = (pair[0], pair[1]);
        if weights[(x, y)] == 0.0 {
            let w = rng.gen_range(0.05..1.0);
            weights[(x, y)] = w;
            weights[(y, x)] = w;
        }
    }

    let mut q = Matrix::zeros(n, n);
    for x in 0..n {
        let mut row_sum = 0.0;
        for y in 0..n {
            if y != x {
                let rate = weights[(x, y)] / pi[x];
                q[(x, y)] = rate;
                row_sum += rate;
            }
        }
        q[(x, x)] = -row_sum;
    }
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    ReversibleChain::new(states, pi, q).expect("construction is shape-correct")
}

/// A random fuzzy partition of `n_states` states into `n_classes` classes.
///
/// Each state spreads its unit membership over a random nonempty subset of
/// classes; empty classes are repaired by reassigning a random state.
pub fn random_fuzzy_partition(
    n_states: usize,
    n_classes: usize,
    rng: &mut ChaCha8Rng,
) -> FuzzyPartition {
    assert!(n_states >= 1 && n_classes >= 1);
    let mut membership = Matrix::zeros(n_states, n_classes);
    for x in 0..n_states {
        let spread = rng.gen_range(1..=n_classes.min(3));
        let mut picked = Vec::with_capacity(spread);
        while picked.len() < spread {
            let c = rng.gen_range(0..n_classes);
            if !picked.contains(&c) {
                picked.push(c);
            }
        }
        let mut raw: Vec<f64> = (0..spread).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        for r in &mut raw {
            *r /= total;
        }
        for (c, w) in picked.into_iter().zip(raw) {
            membership[(x, c)] = w;
        }
    }
    // Repair empty classes: move a random state halfway into the class.
    for c in 0..n_classes {
        if (0..n_states).all(|x| membership[(x, c)] == 0.0) {
            let x = rng.gen_range(0..n_states);
            for cc in 0..n_classes {
                membership[(x, cc)] *= 0.5;
            }
            membership[(x, c)] += 0.5;
        }
    }
    let ids: Vec<String> = (0..n_classes).map(|i| format!("c{i}")).collect();
    FuzzyPartition::new(ids, membership).expect("construction is shape-correct")
}
