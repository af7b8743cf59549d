//! Seeded randomized checks of the invariants the criteria rest on. Used by
//! the `selftest` subcommand and the acceptance suite.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::criteria::{bound_gamma, prop1_evaluate, prop2_evaluate, Mode, VIOLATION_MARGIN};
use crate::error::Result;
use crate::matrix::{extreme_eigenvalues, kron, partial_trace, Operator, QuantumState, C64};
use crate::observables::{
    slot_aligned_basis, collective_from_bases, collective_set, collective_set_h, gellmann_basis, padded_basis,
    sum_of_embedded, LocalBasis, SiteTerms, WeightedObservableSpec,
};
use crate::skew::{skew_information, variance, OrderParam, SkewKernel};
use crate::states::{random_k_producible, random_k_separable, random_mixed, random_pure};

/// Orders used by every s-dependent check. The first three lie in `[-1, 0]`.
pub const ORDER_GRID: [OrderParam; 6] = [
    OrderParam::Finite(0.0),
    OrderParam::Finite(-0.5),
    OrderParam::Finite(-1.0),
    OrderParam::Finite(-2.0),
    OrderParam::Finite(-8.0),
    OrderParam::NegInfinity,
];

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub instances: usize,
    /// Largest observed excess over the allowed value (non-positive when passing).
    pub worst_excess: f64,
    pub tolerance: f64,
}

impl CheckResult {
    fn from_excess(name: &str, instances: usize, worst_excess: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: worst_excess <= tolerance,
            instances,
            worst_excess,
            tolerance,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {} (instances={}, worst excess={:.3e}, tol={:.0e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.worst_excess,
            self.tolerance
        )
    }
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = Operator::from_fn(dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    g.add(&g.adjoint()).expect("same dims").scale(0.5)
}

/// Haar-ish real orthogonal matrix from the QR factors of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `G'_u = sum_v O_uv G_v`
pub fn rotate_basis(native: &[Operator], o: &DMatrix<f64>) -> Vec<Operator> {
    (0..native.len())
        .map(|u| {
            let mut acc = Operator::zeros(native[0].dim());
            for (v, g) in native.iter().enumerate() {
                acc.add_scaled(o[(u, v)], g).expect("same dims");
            }
            acc
        })
        .collect()
}

fn random_dims<R: Rng + ?Sized>(rng: &mut R, sites: usize, max_total: usize) -> Vec<usize> {
    loop {
        let dims: Vec<usize> = (0..sites).map(|_| rng.random_range(2..=3)).collect();
        if dims.iter().product::<usize>() <= max_total {
            return dims;
        }
    }
}

fn pick_order<R: Rng + ?Sized>(rng: &mut R) -> OrderParam {
    ORDER_GRID[rng.random_range(0..ORDER_GRID.len())]
}

/// `-1 <= s <= 0`.
pub fn in_upper_band(s: OrderParam) -> bool {
    s.as_f64() >= -1.0
}

fn pick_in_band<R: Rng + ?Sized>(rng: &mut R, upper: bool) -> OrderParam {
    let band: Vec<OrderParam> = ORDER_GRID.iter().copied().filter(|&s| in_upper_band(s) == upper).collect();
    band[rng.random_range(0..band.len())]
}

/// Monotonicity in s, variance ceiling, pure-state equality, convexity,
/// additivity and non-negativity of `I^s`, each over `instances` random draws.
pub fn skew_information_checks(instances: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mono = f64::NEG_INFINITY;
    let mut pure_eq = f64::NEG_INFINITY;
    let mut convex = [f64::NEG_INFINITY; 2];
    let mut additive = f64::NEG_INFINITY;
    let mut nonneg = f64::NEG_INFINITY;

    for _ in 0..instances {
        let sites = rng.random_range(1..=3);
        let dims = random_dims(&mut rng, sites, 18);
        let dim: usize = dims.iter().product();
        let x = random_hermitian(dim, &mut rng);

        // monotone in s, capped by the variance
        let rho = random_mixed(dims.clone(), &mut rng)?;
        let values = ORDER_GRID
            .iter()
            .map(|&s| skew_information(&rho, &x, s))
            .collect::<Result<Vec<_>>>()?;
        for w in values.windows(2) {
            mono = mono.max(w[0] - w[1]);
        }
        mono = mono.max(values[values.len() - 1] - variance(&rho, &x)?);
        for &v in &values {
            nonneg = nonneg.max(-v);
        }

        // equality with the variance on pure states
        let psi = random_pure(dims.clone(), &mut rng)?;
        let var = variance(&psi, &x)?;
        for &s in &ORDER_GRID {
            pure_eq = pure_eq.max((skew_information(&psi, &x, s)? - var).abs());
        }

        // convexity
        let rho2 = if rng.random::<bool>() { random_pure(dims.clone(), &mut rng)? } else { random_mixed(dims.clone(), &mut rng)? };
        let p: f64 = rng.random_range(0.01..0.99);
        let mix = QuantumState::mixture(&[(p, &rho), (1.0 - p, &rho2)])?;
        for &s in &ORDER_GRID {
            let lhs = skew_information(&mix, &x, s)?;
            let rhs = p * skew_information(&rho, &x, s)? + (1.0 - p) * skew_information(&rho2, &x, s)?;
            let band = usize::from(!in_upper_band(s));
            convex[band] = convex[band].max(lhs - rhs);
            nonneg = nonneg.max(-lhs);
        }

        // additivity on product states
        let parts: Vec<QuantumState> = dims
            .iter()
            .map(|&d| random_mixed(vec![d], &mut rng))
            .collect::<Result<_>>()?;
        let locals: Vec<Operator> = dims.iter().map(|&d| random_hermitian(d, &mut rng)).collect();
        let mut product_rho = parts[0].rho().clone();
        for part in &parts[1..] {
            product_rho = kron(&product_rho, part.rho());
        }
        let product = QuantumState::new(dims.clone(), product_rho)?;
        let refs: Vec<&Operator> = locals.iter().collect();
        let total_x = sum_of_embedded(&refs, &dims)?;
        let s = pick_order(&mut rng);
        let joint = skew_information(&product, &total_x, s)?;
        let separate: f64 = parts
            .iter()
            .zip(&locals)
            .map(|(st, op)| skew_information(st, op, s))
            .sum::<Result<f64>>()?;
        additive = additive.max((joint - separate).abs());
    }

    Ok(vec![
        CheckResult::from_excess("skew: monotone non-increasing in s, below variance", instances, mono, 1e-10),
        CheckResult::from_excess("skew: equals variance on pure states", instances, pure_eq, 1e-9),
        CheckResult::from_excess("skew: convex in the state, -1 <= s <= 0", instances, convex[0], 1e-9),
        CheckResult::from_excess("skew: convex in the state, s < -1", instances, convex[1], 1e-9),
        CheckResult::from_excess("skew: additive on product states", instances, additive, 1e-9),
        CheckResult::from_excess("skew: non-negative", instances, nonneg, 1e-12),
    ])
}

fn summed_skew(state: &QuantumState, ops: &[Operator], s: OrderParam) -> Result<f64> {
    let kernel = SkewKernel::new(state, s);
    ops.iter().map(|op| kernel.evaluate(op)).sum()
}

/// Basis independence of the summed collective skew information, the
/// subsystem bound, and the slot-aligned basis identities.
pub fn collective_basis_checks(rotations: usize, bound_states: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // One rotation shared by all sites of a uniform register; any rotation on a single site.
    let mut drift = f64::NEG_INFINITY;
    for r in 0..rotations {
        let (dims, gamma): (Vec<usize>, Vec<usize>) = match r % 3 {
            0 => (vec![2, 2, 2], vec![0, 1, 2]),
            1 => (vec![3, 3], vec![0, 1]),
            _ => (random_dims(&mut rng, 3, 18), vec![rng.random_range(0..3)]),
        };
        let rho = if rng.random::<bool>() { random_mixed(dims.clone(), &mut rng)? } else { random_pure(dims.clone(), &mut rng)? };
        let reduced = if gamma.len() == dims.len() { rho } else { partial_trace(&rho, &gamma)? };
        let d = *dims.iter().max().expect("dims");
        let site_dim = reduced.dims()[0];
        let o = random_orthogonal(site_dim * site_dim, &mut rng);
        let rotated = rotate_basis(&gellmann_basis(site_dim)?, &o);
        let bases = reduced
            .dims()
            .iter()
            .map(|&di| LocalBasis::from_native(di, d, rotated.clone()))
            .collect::<Result<Vec<_>>>()?;
        let turned: Vec<Operator> = collective_from_bases(&gamma, &bases)?.into_iter().map(|c| c.op).collect();
        let plain: Vec<Operator> = collective_set(&dims, &gamma)?.into_iter().map(|c| c.op).collect();
        let s = pick_order(&mut rng);
        drift = drift.max((summed_skew(&reduced, &turned, s)? - summed_skew(&reduced, &plain, s)?).abs());
    }

    // Subsystem bound on random 4-site registers, every nonempty subset.
    let mut excess = f64::NEG_INFINITY;
    let mut bound_instances = 0;
    for _ in 0..bound_states {
        let dims = random_dims(&mut rng, 4, 36);
        let d = *dims.iter().max().expect("dims");
        let rho = if rng.random::<bool>() { random_pure(dims.clone(), &mut rng)? } else { random_mixed(dims.clone(), &mut rng)? };
        let s = pick_order(&mut rng);
        for mask in 1u32..16 {
            let gamma: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
            let reduced = if gamma.len() == 4 { rho.clone() } else { partial_trace(&rho, &gamma)? };
            let bound = bound_gamma(gamma.len(), d)?;
            for set in [collective_set(&dims, &gamma)?, collective_set_h(&dims, &gamma)?] {
                let ops: Vec<Operator> = set.into_iter().map(|c| c.op).collect();
                excess = excess.max(summed_skew(&reduced, &ops, s)? - bound);
            }
            bound_instances += 1;
        }
    }

    // Padded and slot-aligned orderings agree on registers of one site dimension.
    let mut reorder = f64::NEG_INFINITY;
    for r in 0..rotations {
        let dims = [vec![2, 2, 2], vec![3, 3], vec![2, 2, 2, 2], vec![3, 3, 3]][r % 4].clone();
        let all: Vec<usize> = (0..dims.len()).collect();
        let rho = if rng.random::<bool>() { random_mixed(dims.clone(), &mut rng)? } else { random_pure(dims.clone(), &mut rng)? };
        let s = pick_order(&mut rng);
        let padded: Vec<Operator> = collective_set(&dims, &all)?.into_iter().map(|c| c.op).collect();
        let slot: Vec<Operator> = collective_set_h(&dims, &all)?.into_iter().map(|c| c.op).collect();
        reorder = reorder.max((summed_skew(&rho, &padded, s)? - summed_skew(&rho, &slot, s)?).abs());
    }

    // Slot-aligned basis identities.
    let mut square_sum = f64::NEG_INFINITY;
    let mut cross = f64::NEG_INFINITY;
    let mut identity_cases = 0;
    for d in 2..=4usize {
        for di in 2..=3usize.min(d) {
            let hi = slot_aligned_basis(di, d)?;
            let mut acc = Operator::zeros(di);
            for op in &hi.operators {
                acc.add_scaled(1.0, &op.matmul(op)?)?;
            }
            square_sum = square_sum.max(acc.max_abs_diff(&Operator::identity(di).scale(di as f64)));
            for dj in 2..=3usize.min(d) {
                let hj = slot_aligned_basis(dj, d)?;
                let mut sum = Operator::zeros(di * dj);
                for (a, b) in hi.operators.iter().zip(&hj.operators) {
                    sum.add_scaled(1.0, &kron(a, b))?;
                }
                cross = cross.max(extreme_eigenvalues(&sum)?.1 - 1.0);
                identity_cases += 1;
            }
        }
    }

    Ok(vec![
        CheckResult::from_excess("collective: summed skew information independent of local basis", rotations, drift, 1e-9),
        CheckResult::from_excess("collective: subsystem sum below bound_gamma", bound_instances, excess, 1e-9),
        CheckResult::from_excess("basis: padded and slot-aligned sums agree on uniform registers", rotations, reorder, 1e-9),
        CheckResult::from_excess("basis: sum of squared slot-aligned members equals d_i I", identity_cases, square_sum, 1e-12),
        CheckResult::from_excess("basis: lambda_max of sum H_i (x) H_j at most 1", identity_cases, cross, 1e-12),
    ])
}

/// Random weighted observable: a few random Hermitian terms per site.
pub fn random_weighted_spec<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<WeightedObservableSpec> {
    let sites = dims
        .iter()
        .map(|&d| {
            let m = rng.random_range(1..=3);
            let ops: Vec<Operator> = (0..m).map(|_| random_hermitian(d, rng)).collect();
            let weights: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            SiteTerms::new(weights, ops)
        })
        .collect::<Result<Vec<_>>>()?;
    WeightedObservableSpec::new(sites)
}

fn fuzz_register<R: Rng + ?Sized>(rng: &mut R) -> Vec<usize> {
    let n = rng.random_range(2..=6);
    if n <= 4 {
        random_dims(rng, n, 81)
    } else {
        vec![2; n]
    }
}

/// Soundness: states that are k-separable (k-producible) by construction
/// never violate the matching criterion. Every state is tested at one order
/// from each band, `-1 <= s <= 0` and `s < -1`, reported separately.
pub fn soundness_checks(count: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::new();
    for producible in [false, true] {
        // [criterion][band]
        let mut worst = [[f64::NEG_INFINITY; 2]; 2];
        for _ in 0..count {
            let dims = fuzz_register(&mut rng);
            let n = dims.len();
            let terms = rng.random_range(1..=3);
            let state_seed: u64 = rng.random();
            let (mode, state) = if producible {
                let k = rng.random_range(1..n);
                (Mode::Producible(k), random_k_producible(n, &dims, k, terms, state_seed)?)
            } else {
                let k = rng.random_range(2..=n);
                (Mode::Separable(k), random_k_separable(n, &dims, k, terms, state_seed)?)
            };
            let spec = random_weighted_spec(&dims, &mut rng)?;
            for band in 0..2 {
                let s = pick_in_band(&mut rng, band == 0);
                worst[0][band] = worst[0][band].max(prop1_evaluate(&state, s, mode)?.margin);
                worst[1][band] = worst[1][band].max(prop2_evaluate(&state, &spec, s, mode)?.margin);
            }
        }
        let label = if producible { "k-producible" } else { "k-separable" };
        for (c, row) in worst.iter().enumerate() {
            for (band, &w) in row.iter().enumerate() {
                let range = if band == 0 { "-1 <= s <= 0" } else { "s < -1" };
                results.push(CheckResult::from_excess(
                    &format!("soundness: criterion {} on {label} states, {range}", c + 1),
                    count,
                    w,
                    VIOLATION_MARGIN,
                ));
            }
        }
    }
    Ok(results)
}

/// Everything the `selftest` subcommand runs.
pub fn run_all(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = skew_information_checks(200, seed)?;
    out.extend(collective_basis_checks(60, 40, seed.wrapping_add(1))?);
    out.extend(soundness_checks(1000, seed.wrapping_add(2))?);
    out.extend(padded_layout_checks()?);
    Ok(out)
}

/// Structural checks on every padded basis used with registers up to `d = 4`.
pub fn padded_layout_checks() -> Result<Vec<CheckResult>> {
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    for d in 2..=4usize {
        for di in 2..=d {
            let b = padded_basis(di, d)?;
            let native = &b.operators[..di * di];
            for (u, a) in native.iter().enumerate() {
                for (v, c) in native.iter().enumerate() {
                    let target = if u == v { 1.0 } else { 0.0 };
                    worst = worst.max((a.hs_inner(c) - C64::new(target, 0.0)).norm());
                }
            }
            let zeros_ok = b.zero_count() == d * d - di * di;
            if !zeros_ok {
                worst = f64::INFINITY;
            }
            cases += 1;
        }
    }
    Ok(vec![CheckResult::from_excess("basis: native members orthonormal, padding all zero", cases, worst, 1e-12)])
}
