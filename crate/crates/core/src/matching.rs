//! Distances between matrices and between spectra.
//!
//! Matrix side: the approximating-class functional `p`, its splitting into a low-rank
//! and a small-norm part, and the finite-size integrands of `d_acs`, `d_N`, `d_R` and
//! `d_H`. Spectrum side: the optimal matching (bottleneck) distance, the generalized
//! matching distance `d'`, diagonal alignment and the `l^p` transport cost.

use crate::error::{ensure_same_dim, Error, Result};
use crate::spectral::{self, hermitian_parts, numerical_rank, singular_values, ComplexMatrix, C64, ZERO};

/// `min_{i=1..n+1} (i-1)/n + sigma_i` with `sigma_{n+1} = 0`, given non-increasing
/// singular values. Returns the value and the smallest minimizing `i`.
pub fn p_from_singular_values(s: &[f64]) -> (f64, usize) {
    let n = s.len();
    let mut best = (1.0, n + 1);
    for (k, &sigma) in s.iter().enumerate() {
        let v = k as f64 / n as f64 + sigma;
        if v < best.0 || (v == best.0 && k + 1 < best.1) {
            best = (v, k + 1);
        }
    }
    best
}

/// The functional `p(M)` and its smallest argmin.
pub fn p_func(m: &ComplexMatrix) -> Result<(f64, usize)> {
    Ok(p_from_singular_values(&singular_values(m)?))
}

/// `M = R + N` with `R` the best rank-`(index-1)` approximation.
#[derive(Debug, Clone)]
pub struct AcsSplit {
    pub r: ComplexMatrix,
    pub n: ComplexMatrix,
    pub index: usize,
    /// `sigma_index(M)`, equal to `||N||`.
    pub sigma: f64,
}

/// Truncated-SVD splitting at `index`; `None` picks the argmin of [`p_func`].
pub fn acs_split(m: &ComplexMatrix, index: Option<usize>) -> Result<AcsSplit> {
    let size = m.n();
    let dec = spectral::svd(m)?;
    let i = match index {
        Some(i) => i,
        None => p_from_singular_values(&dec.s).1,
    };
    if i == 0 || i > size + 1 {
        return Err(Error::InvalidInput(format!("split index {i} outside 1..={}", size + 1)));
    }
    let k = i - 1;
    if k == size {
        return Ok(AcsSplit {
            r: m.clone(),
            n: ComplexMatrix::zeros(size),
            index: i,
            sigma: 0.0,
        });
    }
    let r = ComplexMatrix::from_fn(size, |a, b| {
        let mut acc = ZERO;
        for l in 0..k {
            acc += dec.u[(a, l)] * dec.s[l] * dec.v[(b, l)].conj();
        }
        acc
    })?;
    let n = m.try_sub(&r)?;
    Ok(AcsSplit {
        r,
        n,
        index: i,
        sigma: dec.s[k],
    })
}

/// `p(A - B)`.
pub fn d_acs_finite(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    Ok(p_func(&a.try_sub(b)?)?.0)
}

/// Maximum over the larger half of the sample sizes.
pub fn limsup_estimate(values: &[(usize, f64)]) -> Result<f64> {
    if values.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "limsup estimate needs at least 4 sizes, got {}",
            values.len()
        )));
    }
    if values.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::InvalidInput("sample sizes must be strictly increasing".into()));
    }
    let tail = values.len().div_ceil(2);
    Ok(values[values.len() - tail..]
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `(1/n) ||A - B||_1`.
pub fn d_n_finite(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    Ok(spectral::trace_norm(&a.try_sub(b)?)? / a.n() as f64)
}

/// `rank(A - B) / n` at the numerical-rank tolerance.
pub fn d_r_finite(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    Ok(numerical_rank(&singular_values(&a.try_sub(b)?)?) as f64 / a.n() as f64)
}

/// `p(Re A - Re B) + (1/n)||Im A||_1 + (1/n)||Im B||_1`.
pub fn d_h_finite(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    ensure_same_dim(a.n(), b.n())?;
    let n = a.n() as f64;
    let (ra, ia) = hermitian_parts(a);
    let (rb, ib) = hermitian_parts(b);
    Ok(p_func(&ra.try_sub(&rb)?)?.0 + spectral::trace_norm(&ia)? / n + spectral::trace_norm(&ib)? / n)
}

/// Result of a matching problem between two index sets of size `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub value: f64,
    /// Pairs `(i, j)` matching `v_i` with `w_j`, sorted by `i`.
    pub matching: Vec<(usize, usize)>,
    /// Optimal `i` in `(i-1)/n + |v - w_sigma|_i`; `1` for perfect matchings.
    pub cut_index: usize,
    /// Largest distance used by the matching.
    pub threshold: f64,
}

impl MatchOutcome {
    /// Completes the matching to a permutation `sigma` (`v_i` paired with `w_sigma[i]`),
    /// pairing unmatched indices in increasing order.
    pub fn permutation(&self, n: usize) -> Vec<usize> {
        let mut sigma = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for &(i, j) in &self.matching {
            sigma[i] = j;
            used[j] = true;
        }
        let mut free = (0..n).filter(|&j| !used[j]);
        for s in sigma.iter_mut() {
            if *s == usize::MAX {
                *s = free.next().expect("counts agree");
            }
        }
        sigma
    }
}

fn check_lengths(v: &[C64], w: &[C64]) -> Result<()> {
    ensure_same_dim(v.len(), w.len())?;
    if v.is_empty() {
        return Err(Error::InvalidInput("empty vectors".into()));
    }
    if v.iter().chain(w).any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("matching input".into()));
    }
    Ok(())
}

/// Maximum bipartite matching by Hopcroft-Karp; `mate_l[i]` is the partner of `i`.
fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> (usize, Vec<usize>) {
    const NONE: usize = usize::MAX;
    let n_left = adj.len();
    let mut mate_l = vec![NONE; n_left];
    let mut mate_r = vec![NONE; n_right];
    let mut dist = vec![0usize; n_left];
    let mut size = 0;
    loop {
        // layered BFS from free left vertices
        let mut queue = Vec::with_capacity(n_left);
        for u in 0..n_left {
            if mate_l[u] == NONE {
                dist[u] = 0;
                queue.push(u);
            } else {
                dist[u] = NONE;
            }
        }
        let mut found = false;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &v in &adj[u] {
                let m = mate_r[v];
                if m == NONE {
                    found = true;
                } else if dist[m] == NONE {
                    dist[m] = dist[u] + 1;
                    queue.push(m);
                }
            }
        }
        if !found {
            break;
        }
        // iterative DFS along the layers
        let mut it = vec![0usize; n_left];
        for root in 0..n_left {
            if mate_l[root] != NONE {
                continue;
            }
            let mut stack = vec![root];
            while let Some(&u) = stack.last() {
                if it[u] == adj[u].len() {
                    dist[u] = NONE;
                    stack.pop();
                    continue;
                }
                let v = adj[u][it[u]];
                it[u] += 1;
                let m = mate_r[v];
                if m == NONE {
                    // augment along the stack
                    let mut right = v;
                    for &left in stack.iter().rev() {
                        let prev = mate_l[left];
                        mate_l[left] = right;
                        mate_r[right] = left;
                        right = prev;
                    }
                    size += 1;
                    break;
                } else if dist[m] == dist[u] + 1 {
                    stack.push(m);
                }
            }
        }
    }
    (size, mate_l)
}

fn distance_table(v: &[C64], w: &[C64]) -> Vec<f64> {
    let n = v.len();
    let mut d = Vec::with_capacity(n * n);
    for a in v {
        for b in w {
            d.push((a - b).norm());
        }
    }
    d
}

/// Optimal matching distance `min_sigma max_i |v_i - w_sigma(i)|`.
pub fn bottleneck_distance(v: &[C64], w: &[C64]) -> Result<MatchOutcome> {
    check_lengths(v, w)?;
    let n = v.len();
    let dist = distance_table(v, w);
    let mut levels = dist.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let feasible = |t: f64| {
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| dist[i * n + j] <= t).collect())
            .collect();
        let (size, mate) = hopcroft_karp(&adj, n);
        (size == n).then_some(mate)
    };
    let (mut lo, mut hi) = (0, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(levels[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let t = levels[lo];
    let mate = feasible(t).expect("largest distance is always feasible");
    Ok(MatchOutcome {
        value: t,
        matching: mate.iter().enumerate().map(|(i, &j)| (i, j)).collect(),
        cut_index: 1,
        threshold: t,
    })
}

/// Incrementally grown maximum matching that keeps the set of vertices reachable by
/// alternating paths from free left vertices, so each added edge costs amortised
/// constant work unless it completes an augmenting path.
struct IncrementalMatching {
    adj: Vec<Vec<usize>>,
    mate_l: Vec<usize>,
    mate_r: Vec<usize>,
    reach_l: Vec<bool>,
    reach_r: Vec<bool>,
    parent_r: Vec<usize>,
    size: usize,
}

const FREE: usize = usize::MAX;

impl IncrementalMatching {
    fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            mate_l: vec![FREE; n],
            mate_r: vec![FREE; n],
            reach_l: vec![true; n],
            reach_r: vec![false; n],
            parent_r: vec![FREE; n],
            size: 0,
        }
    }

    /// Extends the reachable set from `start`; returns a reached free right vertex.
    fn explore(&mut self, start: usize) -> Option<usize> {
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for k in 0..self.adj[u].len() {
                let v = self.adj[u][k];
                if self.reach_r[v] {
                    continue;
                }
                self.reach_r[v] = true;
                self.parent_r[v] = u;
                let m = self.mate_r[v];
                if m == FREE {
                    return Some(v);
                }
                if !self.reach_l[m] {
                    self.reach_l[m] = true;
                    stack.push(m);
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: usize) {
        loop {
            let u = self.parent_r[v];
            let prev = self.mate_l[u];
            self.mate_l[u] = v;
            self.mate_r[v] = u;
            if prev == FREE {
                break;
            }
            v = prev;
        }
        self.size += 1;
    }

    fn rebuild(&mut self) {
        let n = self.adj.len();
        loop {
            self.reach_r.iter_mut().for_each(|r| *r = false);
            for u in 0..n {
                self.reach_l[u] = self.mate_l[u] == FREE;
            }
            let mut found = None;
            for u in 0..n {
                if self.mate_l[u] == FREE {
                    found = self.explore(u);
                    if found.is_some() {
                        break;
                    }
                }
            }
            match found {
                Some(v) => self.augment(v),
                None => return,
            }
        }
    }

    fn add_edge(&mut self, u: usize, v: usize) {
        self.adj[u].push(v);
        if !self.reach_l[u] || self.reach_r[v] {
            return;
        }
        self.reach_r[v] = true;
        self.parent_r[v] = u;
        let m = self.mate_r[v];
        let free = if m == FREE {
            Some(v)
        } else if !self.reach_l[m] {
            self.reach_l[m] = true;
            self.explore(m)
        } else {
            None
        };
        if let Some(v) = free {
            self.augment(v);
            self.rebuild();
        }
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        self.mate_l
            .iter()
            .enumerate()
            .filter(|(_, &j)| j != FREE)
            .map(|(i, &j)| (i, j))
            .collect()
    }
}

/// Generalized optimal matching distance
/// `min_sigma min_{i=1..n+1} (i-1)/n + |v - w_sigma|_i` (decreasing rearrangement,
/// `|.|_{n+1} = 0`).
///
/// Scans the thresholds `t` in increasing order with a maximum matching `M(t)` of the
/// edges `|v_i - w_j| <= t`; the optimum is the smallest `(n - M(t))/n + t`.
pub fn d_prime(v: &[C64], w: &[C64]) -> Result<MatchOutcome> {
    check_lengths(v, w)?;
    let n = v.len();
    let dist = distance_table(v, w);
    // thresholds above 1 never beat the empty matching
    let mut edges: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (dist[i * n + j], i, j))
        .filter(|e| e.0 <= 1.0)
        .collect();
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut best = MatchOutcome {
        value: 1.0,
        matching: Vec::new(),
        cut_index: n + 1,
        threshold: 0.0,
    };
    let mut state = IncrementalMatching::new(n);
    let mut k = 0;
    while k < edges.len() {
        let t = edges[k].0;
        if t > best.value || state.size == n {
            break;
        }
        while k < edges.len() && edges[k].0 == t {
            state.add_edge(edges[k].1, edges[k].2);
            k += 1;
        }
        let unmatched = n - state.size;
        let value = unmatched as f64 / n as f64 + t;
        let matched = n + 1 - best.cut_index;
        if value < best.value || (value == best.value && state.size > matched) {
            best = MatchOutcome {
                value,
                matching: state.pairs(),
                cut_index: unmatched + 1,
                threshold: t,
            };
        }
    }
    Ok(best)
}

/// Permutation `sigma` such that `diag(d_source[sigma])` is `d'`-optimally aligned with
/// `d_target`, so `p(D' - P D P^T) = d'(d_target, d_source)`.
pub fn align_diagonals(d_target: &[C64], d_source: &[C64]) -> Result<Vec<usize>> {
    let outcome = d_prime(d_target, d_source)?;
    Ok(outcome.permutation(d_target.len()))
}

/// Minimum-cost perfect matching on a square cost table (Hungarian method with
/// potentials). Returns the total cost and `assignment[row] = column`.
pub fn min_cost_assignment(cost: &[f64], n: usize) -> (f64, Vec<usize>) {
    // 1-based formulation with a virtual column 0
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| cost[i * n + assignment[i]]).sum();
    (total, assignment)
}

/// `min_sigma (sum_i |v_i - w_sigma(i)|^p)^{1/p}` and an optimal `sigma`.
pub fn transport_matching(v: &[C64], w: &[C64], p: f64) -> Result<(f64, Vec<usize>)> {
    check_lengths(v, w)?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("transport exponent must be finite and >= 1, got {p}")));
    }
    let n = v.len();
    let cost: Vec<f64> = distance_table(v, w).into_iter().map(|d| d.powf(p)).collect();
    let (total, sigma) = min_cost_assignment(&cost, n);
    Ok((total.max(0.0).powf(1.0 / p), sigma))
}

pub fn transport_cost(v: &[C64], w: &[C64], p: f64) -> Result<f64> {
    Ok(transport_matching(v, w, p)?.0)
}
