//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's numerical code paths.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::{PI, TAU};

use fhcorr::estimator::ComplexCorrelationMatrix;
use fhcorr::ingest::{Session, TickSeries, TimeAxis};
use fhcorr::ComplexMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

// ------------------------------------------------------------ estimator

/// `a_k`, `b_k` (k = 1..=K) from the level-summation form
/// `a_k = (p_N - p_1)/π - (1/π) Σ p_m (cos k t_{m+1} - cos k t_m)`,
/// `b_k = -(1/π) Σ p_m (sin k t_{m+1} - sin k t_m)`,
/// with the step function closed at `t = 2π` and evaluated with direct
/// trigonometric calls. Levels are taken relative to `p_1`, which the
/// closed form is invariant to.
pub fn summation_coefficients(times: &[f64], prices: &[f64], k_max: usize) -> (Vec<f64>, Vec<f64>) {
    let mut t = times.to_vec();
    let mut p: Vec<f64> = prices.iter().map(|x| x - prices[0]).collect();
    assert_eq!(t[0], 0.0);
    if *t.last().unwrap() < TAU {
        t.push(TAU);
        p.push(*p.last().unwrap());
    }
    let n = t.len();
    let mut a = vec![0.0; k_max];
    let mut b = vec![0.0; k_max];
    for k in 1..=k_max {
        let kf = k as f64;
        let (mut sa, mut sb) = (0.0, 0.0);
        for m in 0..n - 1 {
            sa += p[m] * ((kf * t[m + 1]).cos() - (kf * t[m]).cos());
            sb += p[m] * ((kf * t[m + 1]).sin() - (kf * t[m]).sin());
        }
        a[k - 1] = (p[n - 1] - p[0]) / PI - sa / PI;
        b[k - 1] = -sb / PI;
    }
    (a, b)
}

/// Real Fourier correlation `Σ_k (a_i a_j + b_i b_j)` normalised to unit
/// diagonal. The common `πτ/T` factor cancels.
pub fn real_correlation(coeffs: &[(Vec<f64>, Vec<f64>)]) -> Vec<Vec<f64>> {
    let n = coeffs.len();
    let cov = |i: usize, j: usize| -> f64 {
        let (ai, bi) = &coeffs[i];
        let (aj, bj) = &coeffs[j];
        ai.iter().zip(aj).map(|(x, y)| x * y).sum::<f64>() + bi.iter().zip(bj).map(|(x, y)| x * y).sum::<f64>()
    };
    let var: Vec<f64> = (0..n).map(|i| cov(i, i)).collect();
    (0..n).map(|i| (0..n).map(|j| cov(i, j) / (var[i] * var[j]).sqrt()).collect()).collect()
}

/// Seconds-axis series over one session `[0, t_span)` with `events` uniform
/// random times and a Gaussian random-walk log price of step `vol`.
pub fn random_series<R: Rng>(id: &str, events: usize, t_span: f64, vol: f64, rng: &mut R) -> TickSeries {
    let mut times: Vec<f64> = (0..events).map(|_| rng.random::<f64>() * t_span).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut p = 100f64.ln();
    let prices: Vec<f64> = times
        .iter()
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            p += vol * z;
            p
        })
        .collect();
    TickSeries::from_parts(id, times, prices, t_span, vec![Session::new(0.0, t_span)], TimeAxis::Seconds).unwrap()
}

/// Series sampled from `f` at `events` uniform random times in `[0, t_span)`.
pub fn sampled_series<R: Rng>(id: &str, events: usize, t_span: f64, rng: &mut R, f: impl Fn(f64) -> f64) -> TickSeries {
    let mut times: Vec<f64> = (0..events).map(|_| rng.random::<f64>() * t_span).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let prices = times.iter().map(|&t| f(t)).collect();
    TickSeries::from_parts(id, times, prices, t_span, vec![Session::new(0.0, t_span)], TimeAxis::Seconds).unwrap()
}

// ------------------------------------------------------------- matrices

pub fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `GᴴG / rows` for a `rows × n` complex Gaussian `G`: Hermitian PSD.
pub fn random_psd<R: Rng>(n: usize, rows: usize, rng: &mut R) -> ComplexMatrix {
    let g: Vec<Vec<Complex64>> = (0..rows).map(|_| (0..n).map(|_| complex_normal(rng)).collect()).collect();
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v: Complex64 = g.iter().map(|r| r[i].conj() * r[j]).sum::<Complex64>() / rows as f64;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
    }
    m
}

pub fn tickers(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("X{i:03}")).collect()
}

/// Random unit-diagonal Hermitian PSD matrix.
pub fn random_correlation<R: Rng>(n: usize, rows: usize, rng: &mut R) -> ComplexCorrelationMatrix {
    let m = random_psd(n, rows, rng);
    let d: Vec<f64> = (0..n).map(|i| m[(i, i)].re.sqrt()).collect();
    let mut rho = ComplexMatrix::zeros(n);
    for i in 0..n {
        rho[(i, i)] = Complex64::new(1.0, 0.0);
        for j in i + 1..n {
            let v = m[(i, j)] / (d[i] * d[j]);
            rho[(i, j)] = v;
            rho[(j, i)] = v.conj();
        }
    }
    ComplexCorrelationMatrix::new(tickers(n), rho).unwrap()
}

/// Eigenvalues of a Hermitian matrix via the real symmetric embedding
/// `[[X, -Y], [Y, X]]`, whose spectrum is each eigenvalue twice. Sorted
/// descending, one copy of each pair.
pub fn embedded_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.n();
    let big = DMatrix::<f64>::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut ev: Vec<f64> = big.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.into_iter().step_by(2).collect()
}

// --------------------------------------------------------------- graphs

/// Magnitude matrix `s_ij = |ρ_ij|`.
pub fn magnitudes(rho: &ComplexCorrelationMatrix) -> Vec<Vec<f64>> {
    let n = rho.n();
    (0..n).map(|i| (0..n).map(|j| rho.get(i, j).norm()).collect()).collect()
}

/// Prim's algorithm for the minimum spanning tree of `-w`, i.e. the maximum
/// spanning tree of `w`. Returns sorted `(min, max)` edges.
pub fn prim_max_spanning(w: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = w.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![usize::MAX; n];
    best[0] = f64::NEG_INFINITY;
    let mut edges = Vec::new();
    for _ in 0..n {
        let u = (0..n).filter(|&v| !in_tree[v]).min_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap();
        in_tree[u] = true;
        if from[u] != usize::MAX {
            edges.push((from[u].min(u), from[u].max(u)));
        }
        for v in 0..n {
            if !in_tree[v] && -w[u][v] < best[v] {
                best[v] = -w[u][v];
                from[v] = u;
            }
        }
    }
    edges.sort_unstable();
    edges
}

fn prufer_decode(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Largest spanning-tree weight by enumerating all `n^(n-2)` labelled trees.
pub fn exhaustive_max_spanning_weight(w: &[Vec<f64>]) -> f64 {
    let n = w.len();
    if n == 1 {
        return 0.0;
    }
    if n == 2 {
        return w[0][1];
    }
    let mut seq = vec![0usize; n - 2];
    let mut best = f64::NEG_INFINITY;
    loop {
        let total: f64 = prufer_decode(&seq, n).iter().map(|&(a, b)| w[a][b]).sum();
        best = best.max(total);
        let mut i = 0;
        loop {
            if i == seq.len() {
                return best;
            }
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

/// Optimality certificate: every non-tree edge weighs no more than the
/// lightest edge on the tree path between its ends.
pub fn satisfies_cycle_property(w: &[Vec<f64>], tree: &[(usize, usize)]) -> bool {
    let n = w.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in tree {
        adj[a].push(b);
        adj[b].push(a);
    }
    let in_tree: BTreeSet<(usize, usize)> = tree.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    for src in 0..n {
        // Lightest edge on the path from src to every vertex.
        let mut path_min = vec![f64::NAN; n];
        path_min[src] = f64::INFINITY;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if path_min[v].is_nan() {
                    path_min[v] = path_min[u].min(w[u][v]);
                    queue.push_back(v);
                }
            }
        }
        for dst in src + 1..n {
            if !in_tree.contains(&(src, dst)) && w[src][dst] > path_min[dst] {
                return false;
            }
        }
    }
    true
}

/// Connected and acyclic on `n` vertices.
pub fn is_spanning_tree(n: usize, edges: &[(usize, usize)]) -> bool {
    if edges.len() + 1 != n {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
    }
    true
}

fn biconnected_blocks(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    struct Dfs<'a> {
        adj: Vec<Vec<(usize, usize)>>,
        edges: &'a [(usize, usize)],
        disc: Vec<usize>,
        low: Vec<usize>,
        clock: usize,
        stack: Vec<usize>,
        blocks: Vec<Vec<(usize, usize)>>,
    }
    impl Dfs<'_> {
        fn visit(&mut self, u: usize, parent_edge: usize) {
            self.disc[u] = self.clock;
            self.low[u] = self.clock;
            self.clock += 1;
            for idx in 0..self.adj[u].len() {
                let (v, e) = self.adj[u][idx];
                if e == parent_edge {
                    continue;
                }
                if self.disc[v] == usize::MAX {
                    self.stack.push(e);
                    self.visit(v, e);
                    self.low[u] = self.low[u].min(self.low[v]);
                    if self.low[v] >= self.disc[u] {
                        let mut block = Vec::new();
                        while let Some(f) = self.stack.pop() {
                            block.push(self.edges[f]);
                            if f == e {
                                break;
                            }
                        }
                        self.blocks.push(block);
                    }
                } else if self.disc[v] < self.disc[u] {
                    self.stack.push(e);
                    self.low[u] = self.low[u].min(self.disc[v]);
                }
            }
        }
    }
    let mut adj = vec![Vec::new(); n];
    for (id, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, id));
        adj[b].push((a, id));
    }
    let mut d =
        Dfs { adj, edges, disc: vec![usize::MAX; n], low: vec![0; n], clock: 0, stack: Vec::new(), blocks: Vec::new() };
    for v in 0..n {
        if d.disc[v] == usize::MAX {
            d.visit(v, usize::MAX);
        }
    }
    d.blocks
}

/// Demoucron–Malgrange–Pertuiset embedding of one biconnected block.
fn dmp_block(edges: &[(usize, usize)]) -> bool {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let key = |a: usize, b: usize| (a.min(b), a.max(b));

    // Initial cycle: first edge plus a shortest path around it.
    let (s, t) = edges[0];
    let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([s]);
    prev.insert(s, s);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[&u] {
            if (u, v) == (s, t) || (u, v) == (t, s) || prev.contains_key(&v) {
                continue;
            }
            prev.insert(v, u);
            queue.push_back(v);
        }
    }
    let mut cycle = vec![t];
    while *cycle.last().unwrap() != s {
        cycle.push(prev[cycle.last().unwrap()]);
    }
    let mut placed_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for w in cycle.windows(2) {
        placed_edges.insert(key(w[0], w[1]));
    }
    placed_edges.insert(key(s, t));
    let mut placed: BTreeSet<usize> = cycle.iter().copied().collect();
    let mut faces: Vec<Vec<usize>> = vec![cycle.clone(), cycle];
    let total: BTreeSet<(usize, usize)> = edges.iter().map(|&(a, b)| key(a, b)).collect();

    while placed_edges.len() < total.len() {
        // Fragments: (contacts, path between two contacts).
        let mut fragments: Vec<(BTreeSet<usize>, Vec<usize>)> = Vec::new();
        for &(a, b) in &total {
            if !placed_edges.contains(&(a, b)) && placed.contains(&a) && placed.contains(&b) {
                fragments.push(([a, b].into(), vec![a, b]));
            }
        }
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        for &start in adj.keys() {
            if placed.contains(&start) || seen.contains(&start) {
                continue;
            }
            let mut comp = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            let mut contacts = BTreeSet::new();
            while let Some(u) = queue.pop_front() {
                for &v in &adj[&u] {
                    if placed.contains(&v) {
                        contacts.insert(v);
                    } else if comp.insert(v) {
                        queue.push_back(v);
                    }
                }
            }
            seen.extend(comp.iter().copied());
            let a = *contacts.iter().next().unwrap();
            // BFS from a through the component to another contact.
            let mut from: BTreeMap<usize, usize> = BTreeMap::new();
            let mut queue: VecDeque<usize> = VecDeque::new();
            for &v in &adj[&a] {
                if comp.contains(&v) && !from.contains_key(&v) {
                    from.insert(v, a);
                    queue.push_back(v);
                }
            }
            let mut path = None;
            'bfs: while let Some(u) = queue.pop_front() {
                for &v in &adj[&u] {
                    if placed.contains(&v) && v != a {
                        let mut p = vec![v, u];
                        let mut x = u;
                        while from[&x] != a {
                            x = from[&x];
                            p.push(x);
                        }
                        p.push(a);
                        p.reverse();
                        path = Some(p);
                        break 'bfs;
                    }
                    if comp.contains(&v) && !from.contains_key(&v) {
                        from.insert(v, u);
                        queue.push_back(v);
                    }
                }
            }
            fragments.push((contacts, path.expect("a block fragment touches two placed vertices")));
        }

        let admissible: Vec<Vec<usize>> = fragments
            .iter()
            .map(|(contacts, _)| (0..faces.len()).filter(|&f| contacts.iter().all(|c| faces[f].contains(c))).collect())
            .collect();
        if admissible.iter().any(Vec::is_empty) {
            return false;
        }
        let pick = admissible.iter().position(|a| a.len() == 1).unwrap_or(0);
        let f = admissible[pick][0];
        let path = &fragments[pick].1;

        let face = faces[f].clone();
        let len = face.len();
        let (a, b) = (path[0], *path.last().unwrap());
        let i = face.iter().position(|&v| v == a).unwrap();
        let j = face.iter().position(|&v| v == b).unwrap();
        let inner = &path[1..path.len() - 1];
        let mut f1 = Vec::new();
        let mut k = i;
        loop {
            f1.push(face[k]);
            if k == j {
                break;
            }
            k = (k + 1) % len;
        }
        f1.extend(inner.iter().rev());
        let mut f2 = Vec::new();
        let mut k = j;
        loop {
            f2.push(face[k]);
            if k == i {
                break;
            }
            k = (k + 1) % len;
        }
        f2.extend(inner.iter());
        faces[f] = f1;
        faces.push(f2);
        for w in path.windows(2) {
            placed_edges.insert(key(w[0], w[1]));
        }
        placed.extend(path.iter().copied());
    }
    true
}

/// Planarity by the Demoucron–Malgrange–Pertuiset path-embedding
/// algorithm, applied to each biconnected block.
pub fn dmp_is_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    let uniq: BTreeSet<(usize, usize)> =
        edges.iter().filter(|(a, b)| a != b).map(|&(a, b)| (a.min(b), a.max(b))).collect();
    if n >= 3 && uniq.len() > 3 * n - 6 {
        return false;
    }
    let uniq: Vec<(usize, usize)> = uniq.into_iter().collect();
    biconnected_blocks(n, &uniq).iter().all(|b| b.len() < 3 || dmp_block(b))
}

// ---------------------------------------------------------------- stats

/// Complementary error function (Chebyshev fit, relative error < 1.2e-7).
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398 + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

/// `P(Z > z)` for a standard normal `Z`.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Jonckheere–Terpstra test for an increasing trend across ordered groups.
/// Returns `(J, z, one-sided p)` under the normal approximation with the
/// tie correction omitted (continuous data).
pub fn jonckheere_terpstra(groups: &[Vec<f64>]) -> (f64, f64, f64) {
    let mut j = 0.0;
    for a in 0..groups.len() {
        for b in a + 1..groups.len() {
            for &x in &groups[a] {
                for &y in &groups[b] {
                    j += if x < y {
                        1.0
                    } else if x == y {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
    }
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let sq: f64 = groups.iter().map(|g| (g.len() as f64).powi(2)).sum();
    let mean = (n * n - sq) / 4.0;
    let cube: f64 = groups.iter().map(|g| (g.len() as f64).powi(2) * (2.0 * g.len() as f64 + 3.0)).sum();
    let var = (n * n * (2.0 * n + 3.0) - cube) / 72.0;
    let z = (j - mean) / var.sqrt();
    (j, z, normal_upper_tail(z))
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// `θ` from `ρ = s·e^{-iθ}`.
pub fn theta_of(z: Complex64) -> f64 {
    -z.im.atan2(z.re)
}
