//! Local orthonormal observable bases, their zero-padded variants, and the
//! collective operators built from them.
//!
//! The native basis of a `d`-level site has `d^2` Hermitian members,
//! orthonormal under `Tr(A B)`, in this order:
//!
//! 1. `d - 1` traceless diagonal operators
//!    `(sum_{z<=l} |z><z| - (l+1)|l+1><l+1|) / sqrt((l+1)(l+2))`,
//! 2. `I / sqrt(d)`,
//! 3. symmetric `(|m><n| + |n><m|) / sqrt(2)` for `m < n`, ordered by `n` then `m`,
//! 4. antisymmetric `-i(|m><n| - |n><m|) / sqrt(2)` in the same pair order.

use crate::error::{Error, Result};
use crate::matrix::{embed, extreme_eigenvalues, pauli, Operator, C64};

/// Pairs `(m, n)` with `m < n < d`, ordered by `n` then `m`.
fn offdiagonal_pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..d).flat_map(|n| (0..n).map(move |m| (m, n)))
}

fn diagonal_member(d: usize, l: usize) -> Operator {
    let norm = (((l + 1) * (l + 2)) as f64).sqrt();
    let values: Vec<f64> = (0..d)
        .map(|z| match z.cmp(&(l + 1)) {
            std::cmp::Ordering::Less => 1.0 / norm,
            std::cmp::Ordering::Equal => -((l + 1) as f64) / norm,
            std::cmp::Ordering::Greater => 0.0,
        })
        .collect();
    Operator::diagonal(&values)
}

fn symmetric_member(d: usize, m: usize, n: usize) -> Operator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Operator::from_fn(d, |r, c| {
        if (r, c) == (m, n) || (r, c) == (n, m) {
            C64::new(h, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn antisymmetric_member(d: usize, m: usize, n: usize) -> Operator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Operator::from_fn(d, |r, c| {
        if (r, c) == (m, n) {
            C64::new(0.0, -h)
        } else if (r, c) == (n, m) {
            C64::new(0.0, h)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// The `d^2` orthonormal Hermitian operators of a `d`-level site, in canonical order.
pub fn gellmann_basis(d: usize) -> Result<Vec<Operator>> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("basis dimension must be >= 2, got {d}")));
    }
    let mut out = Vec::with_capacity(d * d);
    out.extend((0..d - 1).map(|l| diagonal_member(d, l)));
    out.push(Operator::identity(d).scale(1.0 / (d as f64).sqrt()));
    out.extend(offdiagonal_pairs(d).map(|(m, n)| symmetric_member(d, m, n)));
    out.extend(offdiagonal_pairs(d).map(|(m, n)| antisymmetric_member(d, m, n)));
    Ok(out)
}

/// A site's observable family padded with zero operators to a common count `d^2`.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    pub site_dim: usize,
    pub padded_count: usize,
    pub operators: Vec<Operator>,
}

impl LocalBasis {
    /// Wraps a native orthonormal family of `site_dim^2` operators, appending zeros up to `d^2`.
    pub fn from_native(site_dim: usize, d: usize, native: Vec<Operator>) -> Result<Self> {
        if site_dim > d {
            return Err(Error::InvalidArgument(format!(
                "site dimension {site_dim} exceeds maximum dimension {d}"
            )));
        }
        if native.len() != site_dim * site_dim {
            return Err(Error::DimensionMismatch { expected: site_dim * site_dim, found: native.len() });
        }
        if let Some(op) = native.iter().find(|op| op.dim() != site_dim) {
            return Err(Error::DimensionMismatch { expected: site_dim, found: op.dim() });
        }
        let mut operators = native;
        operators.resize(d * d, Operator::zeros(site_dim));
        Ok(Self { site_dim, padded_count: d * d, operators })
    }

    pub fn zero_count(&self) -> usize {
        self.operators.iter().filter(|op| op.is_zero()).count()
    }
}

fn check_dims(d_i: usize, d: usize) -> Result<()> {
    if d_i < 2 {
        return Err(Error::InvalidArgument(format!("site dimension must be >= 2, got {d_i}")));
    }
    if d_i > d {
        return Err(Error::InvalidArgument(format!(
            "site dimension {d_i} exceeds maximum dimension {d}"
        )));
    }
    Ok(())
}

/// Canonical basis of a `d_i`-level site followed by `d^2 - d_i^2` zero operators.
pub fn padded_basis(d_i: usize, d: usize) -> Result<LocalBasis> {
    check_dims(d_i, d)?;
    LocalBasis::from_native(d_i, d, gellmann_basis(d_i)?)
}

/// The same members as [`padded_basis`], interleaved with zeros so that every
/// family occupies the slots it would have on a `d`-level site:
///
/// - slots `0 .. d_i-1`: diagonal members, then zeros up to slot `d-2`,
/// - slot `d-1`: `I / sqrt(d_i)`,
/// - the next `d(d-1)/2` slots: symmetric members (pairs within `d_i`) then zeros,
/// - the last `d(d-1)/2` slots: antisymmetric members then zeros.
///
/// With this layout slot `u` holds the same kind of operator on every site,
/// whatever its dimension.
pub fn slot_aligned_basis(d_i: usize, d: usize) -> Result<LocalBasis> {
    check_dims(d_i, d)?;
    let zero = Operator::zeros(d_i);
    let pairs_full = d * (d - 1) / 2;
    let pairs_site = d_i * (d_i - 1) / 2;
    let mut operators = Vec::with_capacity(d * d);
    for l in 0..d - 1 {
        operators.push(if l + 1 < d_i { diagonal_member(d_i, l) } else { zero.clone() });
    }
    operators.push(Operator::identity(d_i).scale(1.0 / (d_i as f64).sqrt()));
    let sym: Vec<Operator> = offdiagonal_pairs(d_i).map(|(m, n)| symmetric_member(d_i, m, n)).collect();
    let anti: Vec<Operator> =
        offdiagonal_pairs(d_i).map(|(m, n)| antisymmetric_member(d_i, m, n)).collect();
    for family in [sym, anti] {
        operators.extend(family);
        operators.extend(std::iter::repeat_n(zero.clone(), pairs_full - pairs_site));
    }
    debug_assert_eq!(operators.len(), d * d);
    Ok(LocalBasis { site_dim: d_i, padded_count: d * d, operators })
}

/// A Hermitian operator on the sites of `support`, formed as a sum of
/// single-site terms embedded with identities.
#[derive(Clone, Debug)]
pub struct CollectiveObservable {
    pub support: Vec<usize>,
    pub op: Operator,
    pub label: String,
}

/// `sum_{i} embed(local[i], i)` over a register with the given dims.
pub fn sum_of_embedded(local: &[&Operator], dims: &[usize]) -> Result<Operator> {
    if local.len() != dims.len() {
        return Err(Error::DimensionMismatch { expected: dims.len(), found: local.len() });
    }
    let total: usize = dims.iter().product();
    let mut acc = Operator::zeros(total);
    for (site, op) in local.iter().enumerate() {
        if op.dim() != dims[site] {
            return Err(Error::DimensionMismatch { expected: dims[site], found: op.dim() });
        }
        if op.is_zero() {
            continue;
        }
        acc.add_scaled(1.0, &embed(op, site, dims)?)?;
    }
    Ok(acc)
}

/// Collective operators `sum_{i in support} B_i^(u)` for every slot `u`, one
/// local basis per site of the subsystem (in support order).
pub fn collective_from_bases(support: &[usize], bases: &[LocalBasis]) -> Result<Vec<CollectiveObservable>> {
    if support.is_empty() {
        return Err(Error::InvalidArgument("collective operators need a nonempty support".into()));
    }
    if support.len() != bases.len() {
        return Err(Error::DimensionMismatch { expected: support.len(), found: bases.len() });
    }
    let count = bases[0].padded_count;
    if let Some(b) = bases.iter().find(|b| b.padded_count != count) {
        return Err(Error::DimensionMismatch { expected: count, found: b.padded_count });
    }
    let sub_dims: Vec<usize> = bases.iter().map(|b| b.site_dim).collect();
    (0..count)
        .map(|u| {
            let local: Vec<&Operator> = bases.iter().map(|b| &b.operators[u]).collect();
            Ok(CollectiveObservable {
                support: support.to_vec(),
                op: sum_of_embedded(&local, &sub_dims)?,
                label: format!("u={}", u + 1),
            })
        })
        .collect()
}

fn normalized_support(dims: &[usize], gamma: &[usize]) -> Result<Vec<usize>> {
    if gamma.is_empty() {
        return Err(Error::InvalidArgument("subset gamma must be nonempty".into()));
    }
    let mut support = gamma.to_vec();
    support.sort_unstable();
    support.dedup();
    if support.len() != gamma.len() || support.iter().any(|&s| s >= dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "subset {gamma:?} invalid for {} sites",
            dims.len()
        )));
    }
    Ok(support)
}

/// The `d^2` collective operators on the subsystem `gamma` built from
/// [`padded_basis`], with `d` the largest dimension of the whole register.
/// Operators act on the sites of `gamma` in ascending order.
pub fn collective_set(dims: &[usize], gamma: &[usize]) -> Result<Vec<CollectiveObservable>> {
    let support = normalized_support(dims, gamma)?;
    let d = dims.iter().copied().max().expect("nonempty dims");
    let bases = support
        .iter()
        .map(|&i| padded_basis(dims[i], d))
        .collect::<Result<Vec<_>>>()?;
    collective_from_bases(&support, &bases)
}

/// As [`collective_set`] but with the slot-aligned [`slot_aligned_basis`] layout.
pub fn collective_set_h(dims: &[usize], gamma: &[usize]) -> Result<Vec<CollectiveObservable>> {
    let support = normalized_support(dims, gamma)?;
    let d = dims.iter().copied().max().expect("nonempty dims");
    let bases = support
        .iter()
        .map(|&i| slot_aligned_basis(dims[i], d))
        .collect::<Result<Vec<_>>>()?;
    collective_from_bases(&support, &bases)
}

/// Weights and observables for one site: `c_i . X_i = sum_t c_i^(t) X_i^(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTerms {
    pub weights: Vec<f64>,
    pub observables: Vec<Operator>,
}

impl SiteTerms {
    pub fn new(weights: Vec<f64>, observables: Vec<Operator>) -> Result<Self> {
        if weights.len() != observables.len() {
            return Err(Error::DimensionMismatch { expected: observables.len(), found: weights.len() });
        }
        if observables.is_empty() {
            return Err(Error::InvalidArgument("site needs at least one observable".into()));
        }
        let dim = observables[0].dim();
        for op in &observables {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
            }
            op.ensure_hermitian()?;
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite".into()));
        }
        Ok(Self { weights, observables })
    }

    pub fn site_dim(&self) -> usize {
        self.observables[0].dim()
    }

    pub fn combined(&self) -> Operator {
        let mut acc = Operator::zeros(self.site_dim());
        for (w, op) in self.weights.iter().zip(&self.observables) {
            acc.add_scaled(*w, op).expect("dimensions checked at construction");
        }
        acc
    }
}

/// Per-site weighted observables defining `X(c) = sum_i embed(c_i . X_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedObservableSpec {
    pub sites: Vec<SiteTerms>,
}

impl WeightedObservableSpec {
    pub fn new(sites: Vec<SiteTerms>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("weighted observable needs at least one site".into()));
        }
        Ok(Self { sites })
    }

    /// Every qubit gets `c . (sigma_x, sigma_y, sigma_z)`.
    pub fn pauli(n: usize, c: [f64; 3]) -> Result<Self> {
        let terms = SiteTerms::new(c.to_vec(), vec![pauli::x(), pauli::y(), pauli::z()])?;
        Self::new(vec![terms; n])
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sites.iter().map(SiteTerms::site_dim).collect()
    }
}

/// `X(c)` on the full register.
pub fn build_weighted(spec: &WeightedObservableSpec) -> Result<CollectiveObservable> {
    let locals: Vec<Operator> = spec.sites.iter().map(SiteTerms::combined).collect();
    let refs: Vec<&Operator> = locals.iter().collect();
    Ok(CollectiveObservable {
        support: (0..spec.sites.len()).collect(),
        op: sum_of_embedded(&refs, &spec.dims())?,
        label: "X(c)".into(),
    })
}

/// `(min_i lambda_min(c_i . X_i), max_i lambda_max(c_i . X_i))`.
pub fn site_operator_range(spec: &WeightedObservableSpec) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for site in &spec.sites {
        let (a, b) = extreme_eigenvalues(&site.combined())?;
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram_error(ops: &[Operator]) -> f64 {
        let mut worst = 0.0f64;
        for (u, a) in ops.iter().enumerate() {
            for (v, b) in ops.iter().enumerate() {
                let target = if u == v { 1.0 } else { 0.0 };
                worst = worst.max((a.hs_inner(b) - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    #[test]
    fn qubit_basis_is_scaled_paulis() {
        let b = gellmann_basis(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [pauli::z().scale(s), Operator::identity(2).scale(s), pauli::x().scale(s), pauli::y().scale(s)];
        for (got, want) in b.iter().zip(expect.iter()) {
            assert!(got.max_abs_diff(want) < 1e-15);
        }
    }

    #[test]
    fn bases_are_orthonormal_and_hermitian() {
        for d in 2..=5 {
            let b = gellmann_basis(d).unwrap();
            assert_eq!(b.len(), d * d);
            assert!(gram_error(&b) < 1e-12, "d={d}");
            for op in &b {
                assert!(op.hermitian_deviation() == 0.0);
            }
        }
    }

    #[test]
    fn exactly_one_member_is_proportional_to_identity() {
        for d in 2..=5 {
            let b = gellmann_basis(d).unwrap();
            let id = Operator::identity(d).scale(1.0 / (d as f64).sqrt());
            let hits: Vec<usize> = (0..b.len()).filter(|&u| b[u].max_abs_diff(&id) < 1e-15).collect();
            assert_eq!(hits, vec![d - 1]);
            // all others traceless
            for (u, op) in b.iter().enumerate() {
                if u != d - 1 {
                    assert!(op.trace().norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn rejects_trivial_dimension() {
        assert!(gellmann_basis(1).is_err());
        assert!(padded_basis(3, 2).is_err());
        assert!(slot_aligned_basis(3, 2).is_err());
    }

    #[test]
    fn padded_basis_zero_counts() {
        let b = padded_basis(2, 3).unwrap();
        assert_eq!(b.operators.len(), 9);
        assert_eq!(b.zero_count(), 5);
        let same = padded_basis(3, 3).unwrap();
        let g = gellmann_basis(3).unwrap();
        assert!(same.operators.iter().zip(&g).all(|(a, b)| a == b));
        assert_eq!(padded_basis(2, 2).unwrap().zero_count(), 0);
    }

    #[test]
    fn h_basis_is_a_permutation_of_padded_basis() {
        for (d_i, d) in [(2, 2), (2, 3), (3, 3), (2, 4), (3, 4)] {
            let h = slot_aligned_basis(d_i, d).unwrap();
            let m = padded_basis(d_i, d).unwrap();
            assert_eq!(h.operators.len(), m.operators.len());
            let mut used = vec![false; m.operators.len()];
            for op in &h.operators {
                let hit = (0..m.operators.len()).find(|&v| !used[v] && m.operators[v] == *op);
                used[hit.expect("member of H missing from padded basis")] = true;
            }
        }
    }

    #[test]
    fn h_basis_slot_layout() {
        let h = slot_aligned_basis(3, 3).unwrap();
        assert!(h.operators[2].max_abs_diff(&Operator::identity(3).scale(1.0 / 3f64.sqrt())) < 1e-15);
        let h23 = slot_aligned_basis(2, 3).unwrap();
        assert!(h23.operators[1].is_zero());
        assert!(h23.operators[2].max_abs_diff(&Operator::identity(2).scale(std::f64::consts::FRAC_1_SQRT_2)) < 1e-15);
        // symmetric |0><1| family member aligned with the 3-level layout
        assert_eq!(h23.operators[3], symmetric_member(2, 0, 1));
        assert!(h23.operators[4].is_zero() && h23.operators[5].is_zero());
        assert_eq!(h23.operators[6], antisymmetric_member(2, 0, 1));
    }

    #[test]
    fn h_basis_square_sum_is_scaled_identity() {
        for (d_i, d) in [(2, 2), (2, 3), (3, 3), (2, 4), (3, 4)] {
            let h = slot_aligned_basis(d_i, d).unwrap();
            let mut acc = Operator::zeros(d_i);
            for op in &h.operators {
                acc.add_scaled(1.0, &op.matmul(op).unwrap()).unwrap();
            }
            assert!(acc.max_abs_diff(&Operator::identity(d_i).scale(d_i as f64)) < 1e-12);
        }
    }

    #[test]
    fn two_qubit_collective_z_member() {
        let set = collective_set(&[2, 2], &[0, 1]).unwrap();
        assert_eq!(set.len(), 4);
        let expect = embed(&pauli::z(), 0, &[2, 2])
            .unwrap()
            .add(&embed(&pauli::z(), 1, &[2, 2]).unwrap())
            .unwrap()
            .scale(std::f64::consts::FRAC_1_SQRT_2);
        assert!(set[0].op.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn identity_member_is_scalar() {
        let n = 3;
        let set = collective_set(&vec![2; n], &[0, 1, 2]).unwrap();
        let expect = Operator::identity(8).scale(n as f64 / 2f64.sqrt());
        assert!(set[1].op.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn single_site_collective_set_equals_local_basis() {
        let set = collective_set(&[2, 3], &[0]).unwrap();
        let b = padded_basis(2, 3).unwrap();
        assert_eq!(set.len(), 9);
        for (c, op) in set.iter().zip(&b.operators) {
            assert_eq!(&c.op, op);
            assert_eq!(c.support, vec![0]);
        }
    }

    #[test]
    fn collective_set_rejects_empty_gamma() {
        assert!(collective_set(&[2, 2], &[]).is_err());
        assert!(collective_set(&[2, 2], &[2]).is_err());
    }

    #[test]
    fn weighted_observable_examples() {
        let spec = WeightedObservableSpec::pauli(6, [0.0, 0.0, 1.0]).unwrap();
        let x = build_weighted(&spec).unwrap();
        let dims = vec![2; 6];
        let mut expect = Operator::zeros(64);
        for i in 0..6 {
            expect.add_scaled(1.0, &embed(&pauli::z(), i, &dims).unwrap()).unwrap();
        }
        assert!(x.op.max_abs_diff(&expect) < 1e-15);

        let one = WeightedObservableSpec::pauli(1, [0.5, 0.0, 2.0]).unwrap();
        let expect1 = pauli::x().scale(0.5).add(&pauli::z().scale(2.0)).unwrap();
        assert!(build_weighted(&one).unwrap().op.max_abs_diff(&expect1) < 1e-15);

        let zero = WeightedObservableSpec::pauli(3, [0.0; 3]).unwrap();
        assert!(build_weighted(&zero).unwrap().op.is_zero());
    }

    #[test]
    fn weighted_spec_rejects_length_mismatch() {
        assert!(SiteTerms::new(vec![1.0, 2.0], vec![pauli::z()]).is_err());
        let bad = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(SiteTerms::new(vec![1.0], vec![bad]).is_err());
    }

    #[test]
    fn site_operator_range_examples() {
        let spec = WeightedObservableSpec::pauli(4, [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(site_operator_range(&spec).unwrap(), (-1.0, 1.0));

        let sites: Vec<SiteTerms> = (0..4)
            .map(|i| SiteTerms::new(vec![if i % 2 == 0 { 1.0 } else { 2.0 }], vec![pauli::z()]).unwrap())
            .collect();
        let alt = WeightedObservableSpec::new(sites).unwrap();
        assert_eq!(site_operator_range(&alt).unwrap(), (-2.0, 2.0));

        let xy = WeightedObservableSpec::pauli(2, [1.0, 1.0, 0.0]).unwrap();
        let (lo, hi) = site_operator_range(&xy).unwrap();
        let r2 = std::f64::consts::SQRT_2;
        assert!((lo + r2).abs() < 1e-14 && (hi - r2).abs() < 1e-14);
    }
}
