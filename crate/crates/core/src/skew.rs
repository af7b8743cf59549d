//! Power means and the generalized Wigner-Yanase skew information.
//!
//! For a state with spectral decomposition `rho = sum_l lambda_l |psi_l><psi_l|`
//!
//! ```text
//! I^s(rho, X) = sum_{l != l'} [lambda_l - f_s(lambda_l, lambda_l')] |<psi_l|X|psi_l'>|^2
//! ```
//!
//! where `f_s` is the order-`s` power mean. `I^s` is non-increasing in `s`,
//! bounded above by the variance, and equal to it on pure states.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{Operator, QuantumState, C64};

/// Matrix elements with squared modulus below this are skipped.
const ELEMENT_FLOOR: f64 = 1e-24;

/// Order `s` of the power mean: a finite `s <= 0` or the `-inf` limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OrderParam {
    Finite(f64),
    NegInfinity,
}

impl OrderParam {
    pub const ZERO: OrderParam = OrderParam::Finite(0.0);

    pub fn finite(s: f64) -> Result<Self> {
        if s.is_nan() || s > 0.0 || s.is_infinite() {
            return Err(Error::InvalidArgument(format!(
                "order s must be a finite value <= 0 or -inf, got {s}"
            )));
        }
        Ok(OrderParam::Finite(s))
    }

    /// Maps `f64::NEG_INFINITY` to [`OrderParam::NegInfinity`].
    pub fn from_f64(s: f64) -> Result<Self> {
        if s == f64::NEG_INFINITY {
            Ok(OrderParam::NegInfinity)
        } else {
            Self::finite(s)
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            OrderParam::Finite(s) => s,
            OrderParam::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

impl Default for OrderParam {
    fn default() -> Self {
        OrderParam::NegInfinity
    }
}

impl fmt::Display for OrderParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderParam::Finite(s) => write!(f, "{s}"),
            OrderParam::NegInfinity => f.write_str("-inf"),
        }
    }
}

impl FromStr for OrderParam {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        match t.to_ascii_lowercase().as_str() {
            "-inf" | "-infinity" | "neg_infinity" => Ok(OrderParam::NegInfinity),
            other => {
                let s: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse order s from '{t}'")))?;
                Self::from_f64(s)
            }
        }
    }
}

impl Serialize for OrderParam {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OrderParam::Finite(s) => serializer.serialize_f64(*s),
            OrderParam::NegInfinity => serializer.serialize_str("-inf"),
        }
    }
}

/// `f_s(a, b)`; zero whenever either argument is zero.
pub fn power_mean(s: OrderParam, a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "power mean arguments must be non-negative, got ({a}, {b})"
        )));
    }
    Ok(power_mean_unchecked(s, a, b))
}

#[inline]
fn power_mean_unchecked(s: OrderParam, a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    match s {
        OrderParam::NegInfinity => lo,
        OrderParam::Finite(s) if s == 0.0 => (a * b).sqrt(),
        OrderParam::Finite(s) => {
            // lo * ((1 + (hi/lo)^s) / 2)^(1/s); (hi/lo)^s <= 1 so nothing overflows
            let ratio_pow = ((hi / lo).ln() * s).exp();
            lo * (((1.0 + ratio_pow) * 0.5).ln() / s).exp()
        }
    }
}

/// Pairwise weights `lambda_l + lambda_l' - 2 f_s(lambda_l, lambda_l')` for `l < l'`,
/// so that `I^s(rho, X) = sum_{l<l'} w_{ll'} |<psi_l|X|psi_l'>|^2`.
///
/// Build once per (state, s) and reuse across observables.
#[derive(Clone, Debug)]
pub struct SkewKernel<'a> {
    state: &'a QuantumState,
    weights: DMatrix<f64>,
}

impl<'a> SkewKernel<'a> {
    pub fn new(state: &'a QuantumState, s: OrderParam) -> Self {
        let lam = state.eigenvalues();
        let n = lam.len();
        let weights = DMatrix::from_fn(n, n, |l, m| {
            if l < m {
                lam[l] + lam[m] - 2.0 * power_mean_unchecked(s, lam[l], lam[m])
            } else {
                0.0
            }
        });
        Self { state, weights }
    }

    pub fn evaluate(&self, x: &Operator) -> Result<f64> {
        if x.dim() != self.state.dim() {
            return Err(Error::DimensionMismatch { expected: self.state.dim(), found: x.dim() });
        }
        x.ensure_hermitian()?;
        let v = self.state.eigenvectors();
        let rotated: DMatrix<C64> = v.adjoint() * x.matrix() * v;
        let n = rotated.nrows();
        let mut total = 0.0;
        for l in 0..n {
            for m in (l + 1)..n {
                let w = self.weights[(l, m)];
                if w == 0.0 {
                    continue;
                }
                let e = rotated[(l, m)].norm_sqr();
                if e < ELEMENT_FLOOR && rotated[(m, l)].norm_sqr() < ELEMENT_FLOOR {
                    continue;
                }
                total += w * e;
            }
        }
        Ok(total)
    }
}

/// `sum_x |<psi_l|X|psi_m>|^2` for `l < m` in the eigenbasis of `state`, with
/// the same element floor as [`SkewKernel::evaluate`].
pub fn squared_elements(state: &QuantumState, ops: &[&Operator]) -> Result<DMatrix<f64>> {
    let v = state.eigenvectors();
    let n = state.dim();
    let mut acc = DMatrix::zeros(n, n);
    for x in ops {
        if x.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.dim() });
        }
        x.ensure_hermitian()?;
        let rotated: DMatrix<C64> = v.adjoint() * x.matrix() * v;
        for l in 0..n {
            for m in (l + 1)..n {
                let e = rotated[(l, m)].norm_sqr();
                if e < ELEMENT_FLOOR && rotated[(m, l)].norm_sqr() < ELEMENT_FLOOR {
                    continue;
                }
                acc[(l, m)] += e;
            }
        }
    }
    Ok(acc)
}

/// `sum_{l<m} (lam_l + lam_m - 2 f_s(lam_l, lam_m)) elements[(l, m)]` for a
/// spectrum sharing the eigenvectors used to build `elements`.
pub fn spectral_sum(lam: &[f64], s: OrderParam, elements: &DMatrix<f64>) -> f64 {
    let n = lam.len();
    let mut total = 0.0;
    for l in 0..n {
        for m in (l + 1)..n {
            let e = elements[(l, m)];
            if e == 0.0 {
                continue;
            }
            total += (lam[l] + lam[m] - 2.0 * power_mean_unchecked(s, lam[l], lam[m])) * e;
        }
    }
    total
}

/// Generalized Wigner-Yanase skew information `I^s(rho, X)`.
pub fn skew_information(state: &QuantumState, x: &Operator, s: OrderParam) -> Result<f64> {
    SkewKernel::new(state, s).evaluate(x)
}

/// `Tr(rho X^2) - Tr(rho X)^2`
pub fn variance(state: &QuantumState, x: &Operator) -> Result<f64> {
    if x.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: x.dim() });
    }
    x.ensure_hermitian()?;
    let mean = state.expectation(x)?.re;
    let second = state.expectation(&x.matmul(x)?)?.re;
    Ok(second - mean * mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::pauli;
    use nalgebra::DVector;

    const GRID: [OrderParam; 6] = [
        OrderParam::Finite(0.0),
        OrderParam::Finite(-0.5),
        OrderParam::Finite(-1.0),
        OrderParam::Finite(-2.0),
        OrderParam::Finite(-8.0),
        OrderParam::NegInfinity,
    ];

    fn plus_state() -> QuantumState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        QuantumState::pure(vec![2], &DVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)]))
            .unwrap()
    }

    #[test]
    fn power_mean_examples() {
        assert!((power_mean(OrderParam::ZERO, 0.5, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(power_mean(OrderParam::NegInfinity, 0.2, 0.7).unwrap(), 0.2);
        for s in GRID {
            assert_eq!(power_mean(s, 0.0, 0.9).unwrap(), 0.0);
            assert_eq!(power_mean(s, 0.9, 0.0).unwrap(), 0.0);
        }
        let harmonic = power_mean(OrderParam::Finite(-1.0), 0.2, 0.6).unwrap();
        assert!((harmonic - 0.3).abs() < 1e-15);
    }

    #[test]
    fn power_mean_equal_arguments_is_identity() {
        for s in GRID {
            let v = power_mean(s, 0.37, 0.37).unwrap();
            assert!((v - 0.37).abs() < 1e-15, "s={s}: {v}");
        }
    }

    #[test]
    fn power_mean_very_negative_order_does_not_overflow() {
        let v = power_mean(OrderParam::Finite(-8.0), 1e-60, 0.5).unwrap();
        assert!(v.is_finite() && v > 1e-60 && v < 2e-60);
        let w = power_mean(OrderParam::Finite(-500.0), 1e-3, 0.9).unwrap();
        assert!((w - 1e-3 * 2f64.powf(1.0 / 500.0)).abs() < 1e-15);
    }

    #[test]
    fn power_mean_rejects_negative_input() {
        assert!(power_mean(OrderParam::ZERO, -0.1, 0.5).is_err());
        assert!(power_mean(OrderParam::ZERO, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn order_param_parsing() {
        assert_eq!("-inf".parse::<OrderParam>().unwrap(), OrderParam::NegInfinity);
        assert_eq!("-0.5".parse::<OrderParam>().unwrap(), OrderParam::Finite(-0.5));
        assert!("0.5".parse::<OrderParam>().is_err());
        assert!("abc".parse::<OrderParam>().is_err());
    }

    #[test]
    fn pure_plus_state_under_sigma_z() {
        let st = plus_state();
        for s in GRID {
            assert!((skew_information(&st, &pauli::z(), s).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((variance(&st, &pauli::z()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_qubit_has_zero_skew_information() {
        let st = QuantumState::maximally_mixed(vec![2]).unwrap();
        for s in GRID {
            assert!(skew_information(&st, &pauli::z(), s).unwrap().abs() < 1e-15);
        }
        assert!((variance(&st, &pauli::z()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_state_under_sigma_x_at_order_zero() {
        let st = QuantumState::new(vec![2], Operator::diagonal(&[0.9, 0.1])).unwrap();
        let v = skew_information(&st, &pauli::x(), OrderParam::ZERO).unwrap();
        // (0.9 - 0.3) + (0.1 - 0.3) = 1 - 2 sqrt(0.09)
        assert!((v - 0.4).abs() < 1e-12, "{v}");
    }

    #[test]
    fn eigenstate_has_zero_variance() {
        let st = QuantumState::new(vec![2], Operator::diagonal(&[1.0, 0.0])).unwrap();
        assert!(variance(&st, &pauli::z()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rejects_mismatched_or_non_hermitian_observable() {
        let st = plus_state();
        assert!(matches!(
            skew_information(&st, &Operator::identity(4), OrderParam::ZERO),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            skew_information(&st, &bad, OrderParam::ZERO),
            Err(Error::NotHermitian { .. })
        ));
        assert!(variance(&st, &bad).is_err());
    }
}
