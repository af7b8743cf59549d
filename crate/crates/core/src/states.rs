//! Named example states and seeded generators of k-separable / k-producible mixtures.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{Operator, QuantumState, C64};

fn zero_ket(dim: usize) -> DVector<C64> {
    DVector::from_element(dim, C64::new(0.0, 0.0))
}

fn binomial(n: usize, m: usize) -> usize {
    (0..m).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Equal superposition of all `n`-qubit kets with `m` ones.
pub fn dicke_vector(n: usize, m: usize) -> Result<DVector<C64>> {
    if n == 0 || m > n {
        return Err(Error::InvalidArgument(format!("dicke(N={n}, m={m}) needs 0 <= m <= N, N >= 1")));
    }
    let amp = 1.0 / (binomial(n, m) as f64).sqrt();
    let mut psi = zero_ket(1 << n);
    for idx in 0..psi.len() {
        if (idx as u64).count_ones() as usize == m {
            psi[idx] = C64::new(amp, 0.0);
        }
    }
    Ok(psi)
}

pub fn dicke(n: usize, m: usize) -> Result<QuantumState> {
    QuantumState::pure(vec![2; n], &dicke_vector(n, m)?)
}

fn ghz_with_phase(n: usize, phase: C64) -> Result<DVector<C64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("GHZ state needs N >= 2, got {n}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = zero_ket(1 << n);
    psi[0] = C64::new(h, 0.0);
    psi[(1 << n) - 1] = phase * h;
    Ok(psi)
}

/// `(|0...0> + |1...1>) / sqrt(2)`
pub fn ghz_vector(n: usize) -> Result<DVector<C64>> {
    ghz_with_phase(n, C64::new(1.0, 0.0))
}

/// `(|0...0> - i|1...1>) / sqrt(2)`
pub fn ghz_phase_vector(n: usize) -> Result<DVector<C64>> {
    ghz_with_phase(n, C64::new(0.0, -1.0))
}

pub fn ghz(n: usize) -> Result<QuantumState> {
    QuantumState::pure(vec![2; n], &ghz_vector(n)?)
}

pub fn ghz_phase(n: usize) -> Result<QuantumState> {
    QuantumState::pure(vec![2; n], &ghz_phase_vector(n)?)
}

pub fn white(dims: Vec<usize>) -> Result<QuantumState> {
    QuantumState::maximally_mixed(dims)
}

/// Single-qubit ket from a label: `0`, `1`, `+`, `-`, `r` (|+i>), `l` (|-i>).
pub fn qubit_ket(label: char) -> Result<DVector<C64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = match label {
        '0' => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        '1' => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        '+' => (C64::new(h, 0.0), C64::new(h, 0.0)),
        '-' => (C64::new(h, 0.0), C64::new(-h, 0.0)),
        'r' => (C64::new(h, 0.0), C64::new(0.0, h)),
        'l' => (C64::new(h, 0.0), C64::new(0.0, -h)),
        other => return Err(Error::InvalidArgument(format!("unknown qubit label '{other}'"))),
    };
    Ok(DVector::from_vec(vec![a, b]))
}

/// Product of single-qubit kets, one label per site.
pub fn product(labels: &str) -> Result<QuantumState> {
    let kets = labels.chars().map(qubit_ket).collect::<Result<Vec<_>>>()?;
    if kets.is_empty() {
        return Err(Error::InvalidArgument("product state needs at least one site".into()));
    }
    let psi = kets.iter().skip(1).fold(kets[0].clone(), |acc, k| acc.kronecker(k));
    QuantumState::pure(vec![2; kets.len()], &psi)
}

/// Haar-random pure ket: normalized standard complex Gaussian amplitudes.
pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Full-rank random mixed state `G G^dag / Tr(G G^dag)` with Gaussian `G`.
pub fn random_mixed<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<QuantumState> {
    let total: usize = dims.iter().product();
    let g = Operator::from_fn(total, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let gg = g.matmul(&g.adjoint())?;
    let tr = gg.trace().re;
    QuantumState::new(dims, gg.scale(1.0 / tr))
}

pub fn random_pure<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<QuantumState> {
    let total: usize = dims.iter().product();
    QuantumState::pure(dims, &random_ket(total, rng))
}

/// Places independent kets on the given blocks of sites.
pub fn block_product_ket(dims: &[usize], blocks: &[Vec<usize>], kets: &[DVector<C64>]) -> DVector<C64> {
    let n = dims.len();
    let total: usize = dims.iter().product();
    let mut digits = vec![0usize; n];
    DVector::from_fn(total, |flat, _| {
        let mut rem = flat;
        for s in (0..n).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        blocks.iter().zip(kets).fold(C64::new(1.0, 0.0), |acc, (block, ket)| {
            let idx = block.iter().fold(0, |a, &s| a * dims[s] + digits[s]);
            acc * ket[idx]
        })
    })
}

/// Random partition of `0..n` into blocks whose sizes are given in order.
fn partition_with_sizes<R: Rng + ?Sized>(n: usize, sizes: &[usize], rng: &mut R) -> Vec<Vec<usize>> {
    let mut sites: Vec<usize> = (0..n).collect();
    sites.shuffle(rng);
    let mut out = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &size in sizes {
        let mut block = sites[start..start + size].to_vec();
        block.sort_unstable();
        out.push(block);
        start += size;
    }
    out
}

/// Sizes of exactly `k` nonempty blocks summing to `n`.
fn sizes_exactly_k<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts = cuts[..k - 1].to_vec();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(n)) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

/// Greedy block sizes each at most `k`, summing to `n`.
fn sizes_at_most_k<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = rng.random_range(1..=k.min(left));
        sizes.push(s);
        left -= s;
    }
    sizes
}

fn random_block_mixture(
    dims: &[usize],
    terms: usize,
    seed: u64,
    mut sizes: impl FnMut(&mut ChaCha8Rng) -> Vec<usize>,
) -> Result<QuantumState> {
    if terms == 0 {
        return Err(Error::InvalidArgument("need at least one mixture term".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: usize = dims.iter().product();
    let raw: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let norm: f64 = raw.iter().sum();
    let mut rho = Operator::zeros(total);
    for w in raw {
        let block_sizes = sizes(&mut rng);
        let blocks = partition_with_sizes(dims.len(), &block_sizes, &mut rng);
        let kets: Vec<DVector<C64>> = blocks
            .iter()
            .map(|b| random_ket(b.iter().map(|&s| dims[s]).product(), &mut rng))
            .collect();
        let psi = block_product_ket(dims, &blocks, &kets);
        rho.add_scaled(w / norm, &Operator::projector(&psi))?;
    }
    QuantumState::new(dims.to_vec(), rho)
}

fn check_register(n: usize, dims: &[usize]) -> Result<()> {
    if dims.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: dims.len() });
    }
    if dims.iter().any(|&d| d < 2) {
        return Err(Error::InvalidArgument("site dimensions must be >= 2".into()));
    }
    Ok(())
}

/// Mixture of `terms` pure states, each a product over a random partition into exactly `k` blocks.
pub fn random_k_separable(n: usize, dims: &[usize], k: usize, terms: usize, seed: u64) -> Result<QuantumState> {
    check_register(n, dims)?;
    if !(2..=n).contains(&k) {
        return Err(Error::InvalidArgument(format!("k-separable needs 2 <= k <= N, got k={k}, N={n}")));
    }
    random_block_mixture(dims, terms, seed, |rng| sizes_exactly_k(n, k, rng))
}

/// Mixture of `terms` pure products whose blocks each hold at most `k` sites.
pub fn random_k_producible(n: usize, dims: &[usize], k: usize, terms: usize, seed: u64) -> Result<QuantumState> {
    check_register(n, dims)?;
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("k-producible needs 1 <= k <= N-1, got k={k}, N={n}")));
    }
    random_block_mixture(dims, terms, seed, |rng| sizes_at_most_k(n, k, rng))
}
