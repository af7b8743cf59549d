//! Reference values checked against quantities computed here from scratch
//! (explicit kets and Pauli matrices), not through the library's bases.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use skewent::scan::{threshold_scan, CriterionConfig, NoiseFamily, ScanSettings};
use skewent::states::{dicke, ghz, ghz_phase};
use skewent::*;

fn pauli(which: char) -> DMatrix<C> {
    let (o, i, z) = (C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(0.0, 0.0));
    match which {
        'x' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => DMatrix::identity(2, 2),
    }
}

/// `sum_i sigma_a^(i)` on n qubits, site 0 most significant.
fn collective(which: char, n: usize) -> DMatrix<C> {
    let mut total = DMatrix::zeros(1 << n, 1 << n);
    for site in 0..n {
        let mut op = DMatrix::identity(1, 1);
        for j in 0..n {
            let f = if j == site { pauli(which) } else { pauli('i') };
            op = op.kronecker(&f);
        }
        total += op;
    }
    total
}

fn dicke_ket(n: usize, m: usize) -> DVector<C> {
    let idx: Vec<usize> = (0..1usize << n).filter(|b| b.count_ones() as usize == m).collect();
    let amp = 1.0 / (idx.len() as f64).sqrt();
    let mut v = DVector::zeros(1 << n);
    for b in idx {
        v[b] = C::new(amp, 0.0);
    }
    v
}

fn ghz_ket(n: usize) -> DVector<C> {
    let mut v = DVector::zeros(1 << n);
    v[0] = C::new(0.5f64.sqrt(), 0.0);
    v[(1 << n) - 1] = C::new(0.5f64.sqrt(), 0.0);
    v
}

fn ket_variance(psi: &DVector<C>, x: &DMatrix<C>) -> f64 {
    let xpsi = x * psi;
    let mean = psi.dotc(&xpsi).re;
    let second = xpsi.dotc(&xpsi).re;
    second - mean * mean
}

#[test]
fn dicke_summed_variance_is_24() {
    // sum over {sigma_x, sigma_y, sigma_z, I}/sqrt(2) of the collective variance
    let psi = dicke_ket(6, 3);
    let direct: f64 = ['x', 'y', 'z'].iter().map(|&a| ket_variance(&psi, &collective(a, 6)) / 2.0).sum();
    assert!((direct - 24.0).abs() < 1e-10);
    for s in [OrderParam::ZERO, OrderParam::Finite(-1.0), OrderParam::NegInfinity] {
        let lhs = prop1_lhs(&dicke(6, 3).unwrap(), s).unwrap();
        assert!((lhs - direct).abs() < 1e-9, "s={s}: {lhs} vs {direct}");
    }
}

#[test]
fn dicke_noise_lhs_is_linear_at_neg_infinity() {
    // only the Dicke eigenvalue exceeds the flat floor, so I^{-inf} = p * V
    let family = NoiseFamily::new("dicke", dicke(6, 3).unwrap());
    for p in [0.0, 0.1, 0.37, 0.5, 0.77, 1.0] {
        let lhs = prop1_lhs(&family.state_at(p).unwrap(), OrderParam::NegInfinity).unwrap();
        assert!((lhs - 24.0 * p).abs() < 1e-9, "p={p}: {lhs}");
    }
}

#[test]
fn ghz6_collective_z_variance_is_36() {
    let direct = ket_variance(&ghz_ket(6), &collective('z', 6));
    assert!((direct - 36.0).abs() < 1e-10);
    let spec = WeightedObservableSpec::pauli(6, [0.0, 0.0, 1.0]).unwrap();
    for s in [OrderParam::ZERO, OrderParam::Finite(-0.5), OrderParam::Finite(-3.0), OrderParam::NegInfinity] {
        assert!((prop2_lhs(&ghz(6).unwrap(), &spec, s).unwrap() - direct).abs() < 1e-9);
        assert!((prop2_lhs(&ghz_phase(6).unwrap(), &spec, s).unwrap() - direct).abs() < 1e-9);
    }
}

#[test]
fn ghz6_criterion2_bounds_and_verdicts() {
    let spec = WeightedObservableSpec::pauli(6, [0.0, 0.0, 1.0]).unwrap();
    let state = ghz(6).unwrap();
    // coefficients [(N-k+1)^2 + k - 1]/4 and (q k^2 + t^2)/4, spread (1 - (-1))^2 = 4
    for (mode, bound) in [(Mode::Separable(2), 26.0), (Mode::Producible(3), 18.0), (Mode::Producible(5), 26.0)] {
        let r = prop2_evaluate(&state, &spec, OrderParam::NegInfinity, mode).unwrap();
        assert!((r.bound - bound).abs() < 1e-12);
        assert!((r.lhs - 36.0).abs() < 1e-9);
        assert!(r.violated);
    }
}

fn sep_bound(n: usize, k: usize) -> f64 {
    if k == n {
        n as f64
    } else {
        ((n - k + 1) * (n - k + 1)) as f64 * 0.5 + n as f64
    }
}

#[test]
fn dicke_thresholds_equal_bound_over_24() {
    let family = NoiseFamily::new("dicke", dicke(6, 3).unwrap());
    let settings = ScanSettings::default();
    for k in [2, 6] {
        let cfg = CriterionConfig::prop1(Mode::Separable(k), OrderParam::NegInfinity);
        let r = threshold_scan(&family, &cfg, &settings).unwrap();
        let r = r.threshold().expect("single crossing");
        assert!((r.p_star - sep_bound(6, k) / 24.0).abs() < 1e-6);
        assert!(r.bracket_holds(1e-9));
    }
    let cfg = CriterionConfig::prop1(Mode::Producible(1), OrderParam::NegInfinity);
    let r = threshold_scan(&family, &cfg, &settings).unwrap();
    assert!((r.threshold().unwrap().p_star - 0.25).abs() < 1e-6);
}

#[test]
fn separable_counterexample_below_minus_one() {
    // an equal mixture of two product kets, separable by construction
    let spec: StateSpec = "mix(0.5: product(state=r1), 0.5: product(state=0l))".parse().unwrap();
    let state = spec.build().unwrap();
    let r = prop1_evaluate(&state, OrderParam::NegInfinity, Mode::Separable(2)).unwrap();
    assert_eq!(r.bound, 2.0);
    assert!((r.lhs - 7.0 / 3.0).abs() < 1e-9, "{}", r.lhs);
    assert!(r.violated);
    for s in [0.0, -0.5, -1.0] {
        let r = prop1_evaluate(&state, OrderParam::finite(s).unwrap(), Mode::Separable(2)).unwrap();
        assert!(!r.violated, "s={s}: {}", r.lhs);
    }
}

#[test]
fn orderings_differ_on_mixed_dimensions() {
    // padded and slot-aligned orderings pair different local members when site dims differ
    let dims = [2usize, 3];
    let mut amps = DVector::from_fn(6, |i, _| C::new(1.0 + i as f64, 0.5 * i as f64));
    amps /= C::new(amps.norm(), 0.0);
    let state = QuantumState::pure(dims.to_vec(), &amps).unwrap();
    let kernel = SkewKernel::new(&state, OrderParam::ZERO);
    let padded: f64 = collective_set(&dims, &[0, 1]).unwrap().iter().map(|c| kernel.evaluate(&c.op).unwrap()).sum();
    let slot: f64 = collective_set_h(&dims, &[0, 1]).unwrap().iter().map(|c| kernel.evaluate(&c.op).unwrap()).sum();
    assert!((padded - slot).abs() > 1e-3);
    assert!(padded <= bound_gamma(2, 3).unwrap() + 1e-9);
    assert!(slot <= bound_gamma(2, 3).unwrap() + 1e-9);
}
