//! Closed-form bounds and the two families of k-separability / k-producibility criteria.
//!
//! Criterion 1 compares `sum_u I^s(rho, M^(u))` over the collective basis
//! operators with `S_{N,k}` (k-separable states) or `P_{N,k}` (k-producible
//! states). Criterion 2 compares `I^s(rho, X(c))` for a weighted collective
//! observable with a multiple of the squared local eigenvalue spread.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::QuantumState;
use crate::observables::{build_weighted, collective_set, site_operator_range, WeightedObservableSpec};
use crate::output::serialize_sig;
use crate::skew::{OrderParam, SkewKernel};

/// Reports need `lhs - bound` above this to count as a violation.
pub const VIOLATION_MARGIN: f64 = 1e-9;

/// Which family of inequalities is tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Summed skew information of the collective basis operators.
    Prop1,
    /// Skew information of a weighted collective observable.
    Prop2,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Prop1 => "prop1",
            Criterion::Prop2 => "prop2",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "prop1" => Ok(Criterion::Prop1),
            "prop2" => Ok(Criterion::Prop2),
            other => Err(Error::InvalidArgument(format!("unknown criterion '{other}'"))),
        }
    }
}

impl Serialize for Criterion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Separable,
    Producible,
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeKind::Separable => "separable",
            ModeKind::Producible => "producible",
        })
    }
}

impl FromStr for ModeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "separable" | "sep" => Ok(ModeKind::Separable),
            "producible" | "prod" => Ok(ModeKind::Producible),
            other => Err(Error::InvalidArgument(format!("unknown mode '{other}'"))),
        }
    }
}

impl Serialize for ModeKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The hypothesis under test: k-separable (`2 <= k <= N`) or k-producible (`1 <= k <= N-1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Separable(usize),
    Producible(usize),
}

impl Mode {
    pub fn new(kind: ModeKind, k: usize) -> Self {
        match kind {
            ModeKind::Separable => Mode::Separable(k),
            ModeKind::Producible => Mode::Producible(k),
        }
    }

    pub fn k(self) -> usize {
        match self {
            Mode::Separable(k) | Mode::Producible(k) => k,
        }
    }

    pub fn kind(self) -> ModeKind {
        match self {
            Mode::Separable(_) => ModeKind::Separable,
            Mode::Producible(_) => ModeKind::Producible,
        }
    }

    pub fn validate(self, n: usize) -> Result<()> {
        let ok = match self {
            Mode::Separable(k) => (2..=n).contains(&k),
            Mode::Producible(k) => k >= 1 && k < n,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{} k={} out of range for N={n}",
                self.kind(),
                self.k()
            )))
        }
    }

    /// What a violation certifies.
    pub fn interpretation(self, n: usize) -> String {
        match self {
            Mode::Separable(k) if k == 2 => {
                format!("{k}-nonseparable; genuinely multipartite entangled")
            }
            Mode::Separable(k) => format!("{k}-nonseparable"),
            Mode::Producible(k) if k + 1 == n => format!(
                "contains {}-partite entanglement; genuinely multipartite entangled",
                k + 1
            ),
            Mode::Producible(k) => format!("contains {}-partite entanglement", k + 1),
        }
    }
}

/// Upper bound on `sum_u I^s(rho_gamma, M_gamma^(u))` for a subsystem of `n_gamma` sites.
pub fn bound_gamma(n_gamma: usize, d: usize) -> Result<f64> {
    if n_gamma == 0 || d < 2 {
        return Err(Error::InvalidArgument(format!(
            "bound_gamma needs n_gamma >= 1 and d >= 2, got ({n_gamma}, {d})"
        )));
    }
    let df = d as f64;
    if n_gamma == 1 {
        return Ok(df - 1.0);
    }
    let n = n_gamma as f64;
    Ok(n * n * (1.0 - 1.0 / df) + n * (df - 1.0))
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("maximum site dimension must be >= 2, got {d}")));
    }
    Ok(())
}

/// `S_{N,k}`: bound for k-separable states.
pub fn bound_s(n: usize, k: usize, d: usize) -> Result<f64> {
    check_d(d)?;
    Mode::Separable(k).validate(n)?;
    let df = d as f64;
    let linear = n as f64 * (df - 1.0);
    if k == n {
        return Ok(linear);
    }
    let big = (n - k + 1) as f64;
    Ok(big * big * (1.0 - 1.0 / df) + linear)
}

/// `P_{N,k}`: bound for k-producible states. With `N = qk + t`, blocks of
/// size `k` contribute `k^2` each and a remainder block `t >= 2` adds `t^2`.
pub fn bound_p(n: usize, k: usize, d: usize) -> Result<f64> {
    check_d(d)?;
    Mode::Producible(k).validate(n)?;
    let df = d as f64;
    let linear = n as f64 * (df - 1.0);
    if k == 1 {
        return Ok(linear);
    }
    let q = n / k;
    let t = n - q * k;
    let quad = match t {
        0 => (n * k) as f64,
        1 => (q * k * k) as f64,
        _ => (q * k * k + t * t) as f64,
    };
    Ok(quad * (1.0 - 1.0 / df) + linear)
}

/// Outcome of one criterion query.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub k: usize,
    pub mode: ModeKind,
    pub s: OrderParam,
    #[serde(serialize_with = "serialize_sig")]
    pub lhs: f64,
    #[serde(serialize_with = "serialize_sig")]
    pub bound: f64,
    #[serde(serialize_with = "serialize_sig")]
    pub margin: f64,
    pub violated: bool,
    pub interpretation: String,
    pub state_spec: Option<String>,
}

impl CriterionReport {
    pub fn new(criterion: Criterion, mode: Mode, s: OrderParam, n: usize, lhs: f64, bound: f64) -> Self {
        let margin = lhs - bound;
        let violated = margin > VIOLATION_MARGIN;
        let interpretation = if violated {
            mode.interpretation(n)
        } else {
            "not detected".to_string()
        };
        Self {
            criterion,
            k: mode.k(),
            mode: mode.kind(),
            s,
            lhs,
            bound,
            margin,
            violated,
            interpretation,
            state_spec: None,
        }
    }

    pub fn with_state_spec(mut self, spec: impl Into<String>) -> Self {
        self.state_spec = Some(spec.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// `sum_u I^s(rho, M^(u))` over the full register.
pub fn prop1_lhs(state: &QuantumState, s: OrderParam) -> Result<f64> {
    let all: Vec<usize> = (0..state.num_sites()).collect();
    let set = collective_set(state.dims(), &all)?;
    let kernel = SkewKernel::new(state, s);
    set.iter().map(|c| kernel.evaluate(&c.op)).sum()
}

/// Bound on the criterion-1 sum for the given hypothesis.
pub fn prop1_bound(n: usize, d: usize, mode: Mode) -> Result<f64> {
    match mode {
        Mode::Separable(k) => bound_s(n, k, d),
        Mode::Producible(k) => bound_p(n, k, d),
    }
}

pub fn prop1_evaluate(state: &QuantumState, s: OrderParam, mode: Mode) -> Result<CriterionReport> {
    let n = state.num_sites();
    mode.validate(n)?;
    let bound = prop1_bound(n, state.max_site_dim(), mode)?;
    let lhs = prop1_lhs(state, s)?;
    Ok(CriterionReport::new(Criterion::Prop1, mode, s, n, lhs, bound))
}

fn check_spec_dims(state: &QuantumState, spec: &WeightedObservableSpec) -> Result<()> {
    let spec_dims = spec.dims();
    if spec_dims != state.dims() {
        return Err(Error::InvalidArgument(format!(
            "observable dims {spec_dims:?} do not match state dims {:?}",
            state.dims()
        )));
    }
    Ok(())
}

/// `I^s(rho, X(c))`.
pub fn prop2_lhs(state: &QuantumState, spec: &WeightedObservableSpec, s: OrderParam) -> Result<f64> {
    check_spec_dims(state, spec)?;
    let x = build_weighted(spec)?;
    SkewKernel::new(state, s).evaluate(&x.op)
}

/// Coefficient of `(hi - lo)^2` in the criterion-2 bound.
pub fn prop2_coefficient(n: usize, mode: Mode) -> Result<f64> {
    mode.validate(n)?;
    let c = match mode {
        Mode::Separable(k) => {
            let big = n - k + 1;
            (big * big + k - 1) as f64
        }
        Mode::Producible(k) => {
            let q = n / k;
            let t = n - q * k;
            (q * k * k + t * t) as f64
        }
    };
    Ok(c / 4.0)
}

pub fn prop2_bound(n: usize, mode: Mode, spec: &WeightedObservableSpec) -> Result<f64> {
    if spec.sites.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: spec.sites.len() });
    }
    let coeff = prop2_coefficient(n, mode)?;
    let (lo, hi) = site_operator_range(spec)?;
    Ok(coeff * (hi - lo) * (hi - lo))
}

pub fn prop2_evaluate(
    state: &QuantumState,
    spec: &WeightedObservableSpec,
    s: OrderParam,
    mode: Mode,
) -> Result<CriterionReport> {
    let n = state.num_sites();
    mode.validate(n)?;
    check_spec_dims(state, spec)?;
    let bound = prop2_bound(n, mode, spec)?;
    let lhs = prop2_lhs(state, spec, s)?;
    Ok(CriterionReport::new(Criterion::Prop2, mode, s, n, lhs, bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_gamma_values() {
        assert_eq!(bound_gamma(1, 2).unwrap(), 1.0);
        assert_eq!(bound_gamma(1, 3).unwrap(), 2.0);
        assert_eq!(bound_gamma(2, 2).unwrap(), 4.0);
        assert_eq!(bound_gamma(6, 2).unwrap(), 24.0);
        assert!(bound_gamma(0, 2).is_err());
        assert!(bound_gamma(2, 1).is_err());
    }

    #[test]
    fn bound_s_values() {
        assert_eq!(bound_s(6, 2, 2).unwrap(), 18.5);
        assert_eq!(bound_s(6, 6, 2).unwrap(), 6.0);
        assert_eq!(bound_s(6, 4, 2).unwrap(), 10.5);
        assert!(bound_s(6, 1, 2).is_err());
        assert!(bound_s(6, 7, 2).is_err());
    }

    #[test]
    fn bound_p_values() {
        assert_eq!(bound_p(6, 3, 2).unwrap(), 15.0);
        assert_eq!(bound_p(6, 5, 2).unwrap(), 18.5);
        assert_eq!(bound_p(6, 1, 2).unwrap(), 6.0);
        assert_eq!(bound_p(6, 4, 2).unwrap(), 16.0);
        assert_eq!(bound_p(6, 2, 2).unwrap(), 12.0);
        assert!(bound_p(6, 6, 2).is_err());
        assert!(bound_p(6, 0, 2).is_err());
    }

    #[test]
    fn fully_separable_bounds_coincide() {
        for n in 2..=8 {
            for d in 2..=4 {
                assert_eq!(bound_s(n, n, d).unwrap(), bound_p(n, 1, d).unwrap());
                assert_eq!(bound_s(n, n, d).unwrap(), (n * (d - 1)) as f64);
            }
        }
    }

    #[test]
    fn prop2_coefficients() {
        let range_sq = 4.0;
        assert_eq!(prop2_coefficient(6, Mode::Separable(2)).unwrap() * range_sq, 26.0);
        assert_eq!(prop2_coefficient(6, Mode::Producible(3)).unwrap() * range_sq, 18.0);
        assert_eq!(prop2_coefficient(6, Mode::Producible(1)).unwrap() * range_sq, 6.0);
        assert_eq!(prop2_coefficient(6, Mode::Producible(5)).unwrap() * range_sq, 26.0);
    }

    #[test]
    fn prop2_bound_with_pauli_z() {
        let spec = WeightedObservableSpec::pauli(6, [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(prop2_bound(6, Mode::Separable(2), &spec).unwrap(), 26.0);
        assert_eq!(prop2_bound(6, Mode::Producible(3), &spec).unwrap(), 18.0);
        assert!(prop2_bound(5, Mode::Separable(2), &spec).is_err());
    }

    #[test]
    fn mode_ranges() {
        assert!(Mode::Separable(2).validate(2).is_ok());
        assert!(Mode::Separable(1).validate(4).is_err());
        assert!(Mode::Producible(3).validate(4).is_ok());
        assert!(Mode::Producible(4).validate(4).is_err());
    }

    #[test]
    fn interpretations() {
        assert_eq!(Mode::Separable(3).interpretation(6), "3-nonseparable");
        assert!(Mode::Separable(2).interpretation(6).contains("genuinely"));
        assert_eq!(Mode::Producible(2).interpretation(6), "contains 3-partite entanglement");
        assert!(Mode::Producible(5).interpretation(6).contains("genuinely"));
    }

    #[test]
    fn verdict_requires_margin_above_round_off() {
        let r = CriterionReport::new(Criterion::Prop1, Mode::Separable(2), OrderParam::NegInfinity, 6, 18.5 + 1e-12, 18.5);
        assert!(!r.violated);
        assert_eq!(r.interpretation, "not detected");
        let r = CriterionReport::new(Criterion::Prop1, Mode::Separable(2), OrderParam::NegInfinity, 6, 24.0, 18.5);
        assert!(r.violated);
        assert_eq!(r.margin, 5.5);
    }

    #[test]
    fn report_json_layout() {
        let r = CriterionReport::new(Criterion::Prop2, Mode::Producible(3), OrderParam::NegInfinity, 6, 2.0 / 3.0, 18.0)
            .with_state_spec("ghz(N=6)");
        let json = r.to_json();
        assert_eq!(
            json,
            r#"{"criterion":"prop2","k":3,"mode":"producible","s":"-inf","lhs":0.666666666667,"bound":18.0,"margin":-17.3333333333,"violated":false,"interpretation":"not detected","state_spec":"ghz(N=6)"}"#
        );
    }
}
