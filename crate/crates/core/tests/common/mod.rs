#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_lab::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Uniform points in the unit square, or on a coarse lattice to provoke ties.
pub fn points(r: &mut ChaCha8Rng, n: usize, lattice: bool) -> Vec<C64> {
    (0..n)
        .map(|_| {
            if lattice {
                C64::new(r.random_range(0..4) as f64 * 0.25, r.random_range(0..3) as f64 * 0.25)
            } else {
                C64::new(r.random::<f64>(), r.random::<f64>())
            }
        })
        .collect()
}

fn diffs(v: &[C64], w: &[C64], sigma: &[usize]) -> Vec<f64> {
    let mut d: Vec<f64> = v.iter().zip(sigma).map(|(a, &j)| (a - w[j]).norm()).collect();
    d.sort_by(|a, b| b.total_cmp(a));
    d
}

pub fn brute_bottleneck(v: &[C64], w: &[C64]) -> f64 {
    permutations(v.len())
        .iter()
        .map(|s| diffs(v, w, s)[0])
        .fold(f64::INFINITY, f64::min)
}

/// `min_sigma min_{i=1..n+1} (i-1)/n + |v - w_sigma|_i`, `|.|_{n+1} = 0`.
pub fn brute_d_prime(v: &[C64], w: &[C64]) -> f64 {
    let n = v.len();
    permutations(n)
        .iter()
        .map(|s| {
            let d = diffs(v, w, s);
            (0..=n)
                .map(|k| k as f64 / n as f64 + d.get(k).copied().unwrap_or(0.0))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn brute_transport(v: &[C64], w: &[C64], p: f64) -> f64 {
    permutations(v.len())
        .iter()
        .map(|s| v.iter().zip(s).map(|(a, &j)| (a - w[j]).norm().powf(p)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
        .powf(1.0 / p)
}

/// `p` straight from its definition on a list of singular values.
pub fn direct_p(mut s: Vec<f64>) -> f64 {
    let n = s.len();
    s.sort_by(|a, b| b.total_cmp(a));
    s.push(0.0);
    (0..=n).map(|k| k as f64 / n as f64 + s[k]).fold(f64::INFINITY, f64::min)
}
