//! Permutations of `{0, .., n-1}`.
//!
//! Action convention, used everywhere in the crate: applying `p` to a vector
//! `v` yields `v'` with `v'[i] = v[p.map()[i]]`. The matrix `Π` of `p` has
//! `Π[i][p(i)] = 1`, so the matrix product `Π v` equals [`Permutation::apply`].

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(map: Vec<usize>) -> Result<Self> {
        Permutation::new(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.map
    }
}

impl Permutation {
    /// Validates that `map` is a bijection on `{0, .., map.len()-1}`.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(Error::invalid(format!("{map:?} is not a permutation of 0..{n}")));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    pub(crate) fn from_map_unchecked(map: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(map.clone()).is_ok());
        Permutation { map }
    }

    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    /// The transposition exchanging `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n {
            return Err(Error::invalid(format!("transposition ({i} {j}) out of range for n={n}")));
        }
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(i, j);
        Ok(Permutation { map })
    }

    /// Builds `p` from disjoint cycles; `(a b c)` means `p(a) = b, p(b) = c, p(c) = a`.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (k, &v) in cycle.iter().enumerate() {
                if v >= n || touched[v] {
                    return Err(Error::invalid(format!("cycles {cycles:?} are not disjoint in 0..{n}")));
                }
                touched[v] = true;
                map[v] = cycle[(k + 1) % cycle.len()];
            }
        }
        Ok(Permutation { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn get(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn is_derangement(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i != v)
    }

    /// Points with `p(i) != i`, in increasing order.
    pub fn moved_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.map[i] != i).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }

    /// `v'[i] = v[p(i)]`.
    pub fn apply<T: Clone>(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.len(), "vector length does not match permutation size");
        self.map.iter().map(|&j| v[j].clone()).collect()
    }

    /// Inverse action: `v'[p(i)] = v[i]`, i.e. `Πᵀ v`.
    pub fn apply_inverse<T: Clone>(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.len(), "vector length does not match permutation size");
        let mut out = v.to_vec();
        for (i, &j) in self.map.iter().enumerate() {
            out[j] = v[i].clone();
        }
        out
    }

    /// Row permutation `Π M` of a matrix with `n` rows.
    pub fn permute_rows(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(m.nrows(), self.len(), "matrix rows do not match permutation size");
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(self.map[i], j)])
    }

    /// Dense 0/1 permutation matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| if self.map[i] == j { 1.0 } else { 0.0 })
    }

    /// Lexicographic successor, or `None` for the last permutation.
    pub fn next_lexicographic(&self) -> Option<Self> {
        let mut map = self.map.clone();
        next_permutation(&mut map).then_some(Permutation { map })
    }
}

/// Advances `v` to its lexicographic successor in place; returns false (and
/// leaves `v` untouched) when `v` is already the last arrangement.
pub fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Number of positions where `p` and `q` disagree.
pub fn hamming_distance(p: &Permutation, q: &Permutation) -> Result<usize> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!(
            "hamming distance between permutations of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(p.map.iter().zip(&q.map).filter(|(a, b)| a != b).count())
}

/// Cycle structure of a permutation, optionally with a three-way split of the
/// incidence graph into independent sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclePartition {
    /// Each cycle lists `v, p(v), p(p(v)), ..` starting from its smallest vertex.
    pub cycles: Vec<Vec<usize>>,
    pub fixed_points: Vec<usize>,
    pub parts: Option<[Vec<usize>; 3]>,
}

impl CyclePartition {
    pub fn cycle_lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }
}

pub fn cycle_decomposition(p: &Permutation) -> CyclePartition {
    let n = p.len();
    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    let mut fixed_points = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        if p.map[start] == start {
            visited[start] = true;
            fixed_points.push(start);
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = start;
        while !visited[v] {
            visited[v] = true;
            cycle.push(v);
            v = p.map[v];
        }
        cycles.push(cycle);
    }
    CyclePartition {
        cycles,
        fixed_points,
        parts: None,
    }
}

/// Edges `{i, p(i)}` of the incidence graph `G_p`, excluding self-loops.
pub fn incidence_edges(p: &Permutation) -> Vec<(usize, usize)> {
    p.map
        .iter()
        .enumerate()
        .filter(|(i, &j)| *i != j)
        .map(|(i, &j)| (i.min(j), i.max(j)))
        .collect()
}

/// True if no edge of `G_p` has both endpoints in `set`.
pub fn is_independent(p: &Permutation, set: &[usize]) -> bool {
    let mut member = vec![false; p.len()];
    for &v in set {
        member[v] = true;
    }
    incidence_edges(p).iter().all(|&(a, b)| !(member[a] && member[b]))
}

/// Splits the vertices of `G_p` into three independent sets whose sizes
/// differ by at most one (so each has at least `floor(k/3)` vertices).
///
/// `p` must be a derangement on `k >= 3` points; restrict a general
/// permutation to its moved points before calling.
pub fn independent_partition(p: &Permutation) -> Result<CyclePartition> {
    let k = p.len();
    if k < 3 {
        return Err(Error::UnsupportedSize(format!(
            "independent partition needs at least 3 moved points, got {k}"
        )));
    }
    if !p.is_derangement() {
        return Err(Error::invalid("independent partition requires a derangement"));
    }
    let mut decomposition = cycle_decomposition(p);
    let mut parts: [Vec<usize>; 3] = Default::default();

    for cycle in &decomposition.cycles {
        let mut buckets: [Vec<usize>; 3] = Default::default();
        let len = cycle.len();
        for (pos, &v) in cycle.iter().enumerate() {
            // With len = 1 (mod 3) the last vertex would land next to the
            // first one in bucket 0; its other neighbour sits in bucket 2.
            let bucket = if pos == len - 1 && len % 3 == 1 { 1 } else { pos % 3 };
            buckets[bucket].push(v);
        }
        // Largest bucket of this cycle goes to the currently smallest part.
        let mut bucket_order = [0usize, 1, 2];
        bucket_order.sort_by_key(|&b| std::cmp::Reverse(buckets[b].len()));
        let mut part_order = [0usize, 1, 2];
        part_order.sort_by_key(|&q| parts[q].len());
        for (&b, &q) in bucket_order.iter().zip(&part_order) {
            let moved = std::mem::take(&mut buckets[b]);
            parts[q].extend(moved);
        }
    }
    for part in &mut parts {
        part.sort_unstable();
    }
    decomposition.parts = Some(parts);
    Ok(decomposition)
}

/// Uniform draw from all `n!` permutations (Fisher–Yates).
pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::invalid("cannot sample a permutation of size 0"));
    }
    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(rng);
    Ok(Permutation { map })
}

/// Two-step generative process for permutations near the identity: choose
/// `hbar` positions uniformly without replacement, then permute those
/// positions uniformly among themselves. Every output is within Hamming
/// distance `hbar` of the identity.
pub fn sample_hamming_ball_generative<R: Rng + ?Sized>(
    n: usize,
    hbar: usize,
    rng: &mut R,
) -> Result<Permutation> {
    if hbar < 2 || hbar > n {
        return Err(Error::invalid(format!("hamming radius {hbar} outside 2..={n}")));
    }
    let mut chosen = rand::seq::index::sample(rng, n, hbar).into_vec();
    chosen.sort_unstable();
    let mut targets = chosen.clone();
    targets.shuffle(rng);
    let mut map: Vec<usize> = (0..n).collect();
    for (&src, &dst) in chosen.iter().zip(&targets) {
        map[src] = dst;
    }
    Ok(Permutation { map })
}

/// Probability that a fixed position is left in place by
/// [`sample_hamming_ball_generative`]: unchosen with probability
/// `(n - hbar)/n`, or chosen and then fixed by the uniform shuffle of the
/// `hbar` chosen positions with probability `(hbar/n)(1/hbar)`.
pub fn generative_fixed_point_probability(n: usize, hbar: usize) -> f64 {
    let (n, h) = (n as f64, hbar as f64);
    (n - h) / n + 1.0 / n
}

/// Closed form `(n - hbar)/n + hbar/n²` used in the covariance computation
/// for the Hamming-ball side-information bound.
pub fn stated_fixed_point_probability(n: usize, hbar: usize) -> f64 {
    let (n, h) = (n as f64, hbar as f64);
    (n - h) / n + h / (n * n)
}

/// Size of the Hamming ball of radius `hbar` around the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallCardinality {
    /// `sum_{k <= hbar} C(n, k) D_k`, with `D_k` the derangement numbers.
    pub exact: u128,
    /// `C(n, hbar) * hbar!`, which counts ordered choices and over-counts.
    pub ordered_choices: u128,
}

/// Derangement numbers `D_0..=D_k` via `D_k = (k-1)(D_{k-1} + D_{k-2})`.
pub fn derangement_numbers(k: usize) -> Result<Vec<u128>> {
    let mut d = vec![1u128, 0];
    for m in 2..=k {
        let next = (d[m - 1] + d[m - 2])
            .checked_mul((m - 1) as u128)
            .ok_or_else(|| Error::UnsupportedSize(format!("D_{m} overflows u128")))?;
        d.push(next);
    }
    d.truncate(k + 1);
    Ok(d)
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

pub fn hamming_ball_cardinality(n: usize, hbar: usize) -> Result<BallCardinality> {
    if hbar > n {
        return Err(Error::invalid(format!("hamming radius {hbar} exceeds n={n}")));
    }
    let overflow = || Error::UnsupportedSize(format!("ball cardinality for n={n} overflows u128"));
    let derangements = derangement_numbers(hbar)?;
    let mut exact: u128 = 0;
    for (k, dk) in derangements.iter().enumerate() {
        let term = binomial(n, k).and_then(|c| c.checked_mul(*dk)).ok_or_else(overflow)?;
        exact = exact.checked_add(term).ok_or_else(overflow)?;
    }
    let ordered_choices = ((n - hbar + 1)..=n)
        .try_fold(1u128, |acc, m| acc.checked_mul(m as u128))
        .ok_or_else(overflow)?;
    Ok(BallCardinality {
        exact,
        ordered_choices,
    })
}
