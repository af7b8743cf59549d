//! Noise-threshold scans over one-parameter families and verdict maps over
//! two-parameter families.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use nalgebra::DMatrix;

use crate::criteria::{prop1_bound, prop1_lhs, prop2_bound, prop2_lhs, Criterion, Mode, VIOLATION_MARGIN};
use crate::error::{Error, Result};
use crate::matrix::{eigendecompose, Operator, QuantumState, C64, NEGATIVE_EIGEN_TOL, ZERO_EIGEN_FLOOR};
use crate::observables::{build_weighted, collective_set, WeightedObservableSpec};
use crate::output::{fmt_sig, serialize_sig, serialize_sig_pair};
use crate::skew::{spectral_sum, squared_elements, OrderParam};

/// One (criterion, hypothesis, order) query, with the observable for criterion 2.
#[derive(Clone, Debug)]
pub struct CriterionConfig {
    pub criterion: Criterion,
    pub mode: Mode,
    pub s: OrderParam,
    pub weights: Option<WeightedObservableSpec>,
}

impl CriterionConfig {
    pub fn prop1(mode: Mode, s: OrderParam) -> Self {
        Self { criterion: Criterion::Prop1, mode, s, weights: None }
    }

    pub fn prop2(mode: Mode, s: OrderParam, weights: WeightedObservableSpec) -> Self {
        Self { criterion: Criterion::Prop2, mode, s, weights: Some(weights) }
    }

    /// Column name used in region output, e.g. `prop2_separable_k3`.
    pub fn id(&self) -> String {
        format!("{}_{}_k{}", self.criterion, self.mode.kind(), self.mode.k())
    }

    pub fn bound(&self, dims: &[usize]) -> Result<f64> {
        let n = dims.len();
        self.mode.validate(n)?;
        match self.criterion {
            Criterion::Prop1 => {
                let d = dims.iter().copied().max().unwrap_or(0);
                prop1_bound(n, d, self.mode)
            }
            Criterion::Prop2 => prop2_bound(n, self.mode, self.weights()?),
        }
    }

    pub fn lhs(&self, state: &QuantumState) -> Result<f64> {
        match self.criterion {
            Criterion::Prop1 => prop1_lhs(state, self.s),
            Criterion::Prop2 => prop2_lhs(state, self.weights()?, self.s),
        }
    }

    /// Observables whose skew informations are summed into the left-hand side.
    pub fn observables(&self, dims: &[usize]) -> Result<Vec<Operator>> {
        match self.criterion {
            Criterion::Prop1 => {
                let all: Vec<usize> = (0..dims.len()).collect();
                Ok(collective_set(dims, &all)?.into_iter().map(|c| c.op).collect())
            }
            Criterion::Prop2 => {
                let spec = self.weights()?;
                if spec.dims() != dims {
                    return Err(Error::InvalidArgument(format!(
                        "observable dims {:?} do not match state dims {dims:?}",
                        spec.dims()
                    )));
                }
                Ok(vec![build_weighted(spec)?.op])
            }
        }
    }

    fn weights(&self) -> Result<&WeightedObservableSpec> {
        self.weights
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("criterion 2 needs a weighted observable".into()))
    }

    /// Configs with equal keys share the same left-hand side.
    fn same_lhs(&self, other: &CriterionConfig) -> bool {
        self.criterion == other.criterion
            && self.s == other.s
            && (self.criterion == Criterion::Prop1 || self.weights == other.weights)
    }
}

/// `rho(p) = p * target + (1 - p) * I / D`.
#[derive(Clone, Debug)]
pub struct NoiseFamily {
    pub description: String,
    target: QuantumState,
}

impl NoiseFamily {
    pub fn new(description: impl Into<String>, target: QuantumState) -> Self {
        Self { description: description.into(), target }
    }

    pub fn dims(&self) -> &[usize] {
        self.target.dims()
    }

    pub fn state_at(&self, p: f64) -> Result<QuantumState> {
        if !(-1e-12..=1.0 + 1e-12).contains(&p) {
            return Err(Error::InvalidArgument(format!("mixing parameter p={p} outside [0, 1]")));
        }
        let p = p.clamp(0.0, 1.0);
        let dim = self.target.dim();
        let mut rho = Operator::identity(dim).scale((1.0 - p) / dim as f64);
        rho.add_scaled(p, self.target.rho())?;
        QuantumState::new(self.target.dims().to_vec(), rho)
    }

    /// Spectrum of `rho(p)` in the target's eigenbasis, snapped like [`QuantumState::new`].
    fn spectrum_at(&self, p: f64) -> Vec<f64> {
        let flat = (1.0 - p) / self.target.dim() as f64;
        self.target
            .eigenvalues()
            .iter()
            .map(|&mu| {
                let lam = p * mu + flat;
                if lam.abs() < ZERO_EIGEN_FLOOR {
                    0.0
                } else {
                    lam
                }
            })
            .collect()
    }

    /// Left-hand side of `config` along the family. `rho(p)` keeps the
    /// target's eigenvectors for every `p`, so the matrix elements are computed once.
    pub fn lhs_curve(&self, config: &CriterionConfig) -> Result<LhsCurve<'_>> {
        let ops = config.observables(self.target.dims())?;
        let refs: Vec<&Operator> = ops.iter().collect();
        Ok(LhsCurve { family: self, s: config.s, elements: squared_elements(&self.target, &refs)? })
    }
}

pub struct LhsCurve<'a> {
    family: &'a NoiseFamily,
    s: OrderParam,
    elements: DMatrix<f64>,
}

impl LhsCurve<'_> {
    pub fn at(&self, p: f64) -> Result<f64> {
        if !(-1e-12..=1.0 + 1e-12).contains(&p) {
            return Err(Error::InvalidArgument(format!("mixing parameter p={p} outside [0, 1]")));
        }
        Ok(spectral_sum(&self.family.spectrum_at(p.clamp(0.0, 1.0)), self.s, &self.elements))
    }
}

/// `rho(p, q) = p * A + q * B + (1 - p - q) * I / D` on the simplex `p, q >= 0, p + q <= 1`.
#[derive(Clone, Debug)]
pub struct TwoStateFamily {
    pub description: String,
    a: QuantumState,
    b: QuantumState,
}

impl TwoStateFamily {
    pub fn new(description: impl Into<String>, a: QuantumState, b: QuantumState) -> Result<Self> {
        if a.dims() != b.dims() {
            return Err(Error::InvalidArgument("family components must share dims".into()));
        }
        Ok(Self { description: description.into(), a, b })
    }

    /// The GHZ / phased-GHZ family on `n` qubits.
    pub fn ghz(n: usize) -> Result<Self> {
        Self::new(
            format!("p*ghz(N={n}) + q*ghzphase(N={n}) + (1-p-q)*white(N={n},d=2)"),
            crate::states::ghz(n)?,
            crate::states::ghz_phase(n)?,
        )
    }

    pub fn dims(&self) -> &[usize] {
        self.a.dims()
    }

    fn check_point(p: f64, q: f64) -> Result<f64> {
        let rest = 1.0 - p - q;
        if p < 0.0 || q < 0.0 || rest < -1e-9 {
            return Err(Error::InvalidArgument(format!("(p, q) = ({p}, {q}) outside the simplex")));
        }
        Ok(rest)
    }

    pub fn state_at(&self, p: f64, q: f64) -> Result<QuantumState> {
        let rest = Self::check_point(p, q)?;
        let dim = self.a.dim();
        let mut rho = Operator::identity(dim).scale(rest.max(0.0) / dim as f64);
        rho.add_scaled(p, self.a.rho())?;
        rho.add_scaled(q, self.b.rho())?;
        QuantumState::new(self.a.dims().to_vec(), rho)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ScanSettings {
    pub p_min: f64,
    pub p_max: f64,
    pub coarse_step: f64,
    pub tol: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self { p_min: 0.0, p_max: 1.0, coarse_step: 1e-3, tol: 1e-6 }
    }
}

impl ScanSettings {
    fn validate(&self) -> Result<()> {
        if !(self.p_min < self.p_max) || !(self.coarse_step > 0.0) || !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("invalid scan settings {self:?}")));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let n = ((self.p_max - self.p_min) / self.coarse_step - 1e-9).ceil() as usize;
        (0..=n)
            .map(|i| (self.p_min + i as f64 * self.coarse_step).min(self.p_max))
            .collect()
    }
}

/// Left-hand sides over a [`TwoStateFamily`]. With `W` an orthonormal basis
/// whose first `r` columns span the supports of both components, `rho(p, q)`
/// is block diagonal in `W`: an `r x r` block plus a flat multiple of the
/// identity. Only the small block is diagonalized per point.
pub struct LhsSurface<'a> {
    family: &'a TwoStateFamily,
    s: OrderParam,
    rank: usize,
    /// Components restricted to the support, in the `W` basis.
    a_block: DMatrix<C64>,
    b_block: DMatrix<C64>,
    /// First `r` rows of `W^dag X W` for each observable.
    rows: Vec<DMatrix<C64>>,
}

impl TwoStateFamily {
    pub fn lhs_surface(&self, config: &CriterionConfig) -> Result<LhsSurface<'_>> {
        let sum = Operator::from_matrix(self.a.rho().matrix() + self.b.rho().matrix())?;
        let basis = eigendecompose(&sum)?;
        let rank = basis.values.iter().filter(|&&v| v > ZERO_EIGEN_FLOOR).count();
        let w = &basis.vectors;
        let w_top = w.columns(0, rank).into_owned();
        let a_block = w_top.adjoint() * self.a.rho().matrix() * &w_top;
        let b_block = w_top.adjoint() * self.b.rho().matrix() * &w_top;
        let rows = config
            .observables(self.dims())?
            .iter()
            .map(|x| {
                x.ensure_hermitian()?;
                Ok(w_top.adjoint() * x.matrix() * w)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LhsSurface { family: self, s: config.s, rank, a_block, b_block, rows })
    }
}

impl LhsSurface<'_> {
    pub fn at(&self, p: f64, q: f64) -> Result<f64> {
        let rest = TwoStateFamily::check_point(p, q)?;
        let dim = self.family.a.dim();
        let r = self.rank;
        let flat = rest.max(0.0) / dim as f64;
        let mut block = self.a_block.map(|z| z * p) + self.b_block.map(|z| z * q);
        for i in 0..r {
            block[(i, i)] += C64::new(flat, 0.0);
        }
        let local = eigendecompose(&Operator::from_matrix(block)?)?;
        let snap = |lam: f64| -> Result<f64> {
            if lam < -NEGATIVE_EIGEN_TOL {
                return Err(Error::InvalidState(format!("eigenvalue {lam:.3e} below zero")));
            }
            Ok(if lam < 0.0 || lam.abs() < ZERO_EIGEN_FLOOR { 0.0 } else { lam })
        };
        let mut lam = Vec::with_capacity(dim);
        for &v in &local.values {
            lam.push(snap(v)?);
        }
        lam.resize(dim, snap(flat)?);

        // Pairs inside the flat block carry zero weight, so only the first r rows matter.
        let u = &local.vectors;
        let mut elements = DMatrix::zeros(dim, dim);
        for rows in &self.rows {
            let t = u.adjoint() * rows;
            let corner = t.columns(0, r) * u;
            for l in 0..r {
                for m in (l + 1)..dim {
                    let z = if m < r { corner[(l, m)] } else { t[(l, m)] };
                    let e = z.norm_sqr();
                    if e < 1e-24 {
                        continue;
                    }
                    elements[(l, m)] += e;
                }
            }
        }
        Ok(spectral_sum(&lam, self.s, &elements))
    }
}

/// A refined crossing of `lhs(p) = bound`.
#[derive(Clone, Debug, Serialize)]
pub struct ThresholdResult {
    pub criterion: Criterion,
    pub k: usize,
    pub mode: crate::criteria::ModeKind,
    pub s: OrderParam,
    pub family: String,
    #[serde(serialize_with = "serialize_sig")]
    pub p_star: f64,
    /// `(p_lo, p_hi)` with `p_hi - p_lo <= tol`.
    #[serde(serialize_with = "serialize_sig_pair")]
    pub bracket: (f64, f64),
    /// `lhs` at the two bracket ends.
    #[serde(serialize_with = "serialize_sig_pair")]
    pub bracket_lhs: (f64, f64),
    #[serde(serialize_with = "serialize_sig")]
    pub bound: f64,
    #[serde(serialize_with = "serialize_sig")]
    pub residual: f64,
    /// True when the criterion starts being violated as `p` increases through `p_star`.
    pub rising: bool,
    pub coarse_step: f64,
    pub tol: f64,
}

impl ThresholdResult {
    /// The bound lies between the left-hand sides at the bracket ends.
    pub fn bracket_holds(&self, slack: f64) -> bool {
        let (lo, hi) = self.bracket_lhs;
        if self.rising {
            lo <= self.bound + slack && self.bound <= hi + slack
        } else {
            hi <= self.bound + slack && self.bound <= lo + slack
        }
    }
}

#[derive(Clone, Debug)]
pub enum ThresholdOutcome {
    Crossing(ThresholdResult),
    NoCrossing,
    /// More than one sign change on the coarse grid; every crossing is refined and reported.
    MultipleCrossings(Vec<ThresholdResult>),
}

impl ThresholdOutcome {
    pub fn threshold(&self) -> Option<&ThresholdResult> {
        match self {
            ThresholdOutcome::Crossing(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_json(&self, config: &CriterionConfig, family: &str) -> serde_json::Value {
        match self {
            ThresholdOutcome::Crossing(r) => json!({ "status": "threshold", "result": r }),
            ThresholdOutcome::NoCrossing => json!({
                "status": "no threshold in range",
                "criterion": config.criterion,
                "k": config.mode.k(),
                "mode": config.mode.kind(),
                "s": config.s,
                "family": family,
            }),
            ThresholdOutcome::MultipleCrossings(rs) => {
                json!({ "status": "multiple crossings", "brackets": rs })
            }
        }
    }
}

/// Locates the crossing(s) of `lhs(p) - bound` for one config.
pub fn threshold_scan(family: &NoiseFamily, config: &CriterionConfig, settings: &ScanSettings) -> Result<ThresholdOutcome> {
    Ok(threshold_scan_many(family, std::slice::from_ref(config), settings)?.remove(0))
}

/// Like [`threshold_scan`] for several configs; configs with the same
/// left-hand side share one coarse-grid evaluation.
pub fn threshold_scan_many(
    family: &NoiseFamily,
    configs: &[CriterionConfig],
    settings: &ScanSettings,
) -> Result<Vec<ThresholdOutcome>> {
    settings.validate()?;
    let grid = settings.grid();
    let mut curves: Vec<(usize, LhsCurve<'_>, Vec<f64>)> = Vec::new();
    let mut outcomes = Vec::with_capacity(configs.len());
    for (ci, config) in configs.iter().enumerate() {
        let bound = config.bound(family.dims())?;
        let slot = match curves.iter().position(|(j, _, _)| configs[*j].same_lhs(config)) {
            Some(slot) => slot,
            None => {
                let curve = family.lhs_curve(config)?;
                let values = grid.par_iter().map(|&p| curve.at(p)).collect::<Result<Vec<f64>>>()?;
                curves.push((ci, curve, values));
                curves.len() - 1
            }
        };
        let (_, curve, lhs_grid) = &curves[slot];
        let above: Vec<bool> = lhs_grid.iter().map(|&v| v - bound > 0.0).collect();
        let changes: Vec<usize> = (0..grid.len() - 1).filter(|&i| above[i] != above[i + 1]).collect();
        let refined = changes
            .iter()
            .map(|&i| {
                refine(family, curve, config, bound, (grid[i], lhs_grid[i]), (grid[i + 1], lhs_grid[i + 1]), settings)
            })
            .collect::<Result<Vec<_>>>()?;
        outcomes.push(match refined.len() {
            0 => ThresholdOutcome::NoCrossing,
            1 => ThresholdOutcome::Crossing(refined.into_iter().next().expect("one crossing")),
            _ => ThresholdOutcome::MultipleCrossings(refined),
        });
    }
    Ok(outcomes)
}

fn refine(
    family: &NoiseFamily,
    curve: &LhsCurve<'_>,
    config: &CriterionConfig,
    bound: f64,
    lo: (f64, f64),
    hi: (f64, f64),
    settings: &ScanSettings,
) -> Result<ThresholdResult> {
    let left_above = lo.1 - bound > 0.0;
    let (mut lo, mut hi) = (lo, hi);
    while hi.0 - lo.0 > settings.tol {
        let mid = 0.5 * (lo.0 + hi.0);
        let v = curve.at(mid)?;
        if (v - bound > 0.0) == left_above {
            lo = (mid, v);
        } else {
            hi = (mid, v);
        }
    }
    let p_star = 0.5 * (lo.0 + hi.0);
    let at_star = curve.at(p_star)?;
    Ok(ThresholdResult {
        criterion: config.criterion,
        k: config.mode.k(),
        mode: config.mode.kind(),
        s: config.s,
        family: family.description.clone(),
        p_star,
        bracket: (lo.0, hi.0),
        bracket_lhs: (lo.1, hi.1),
        bound,
        residual: (at_star - bound).abs(),
        rising: !left_above,
        coarse_step: settings.coarse_step,
        tol: settings.tol,
    })
}

/// Verdicts for one feasible grid cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionCell {
    pub i: usize,
    pub j: usize,
    pub p: f64,
    pub q: f64,
    pub verdicts: Vec<bool>,
}

/// Verdict map on the simplex `p, q >= 0, p + q <= 1`. Cells outside the
/// simplex are not evaluated and do not appear in `cells`.
#[derive(Clone, Debug, Serialize)]
pub struct RegionGrid {
    pub family: String,
    pub step: f64,
    pub criteria: Vec<String>,
    pub cells: Vec<RegionCell>,
}

impl RegionGrid {
    pub fn column(&self, id: &str) -> Option<usize> {
        self.criteria.iter().position(|c| c == id)
    }

    pub fn cell(&self, i: usize, j: usize) -> Option<&RegionCell> {
        self.cells.iter().find(|c| c.i == i && c.j == j)
    }

    /// Header `p,q,<ids>`, one row per feasible cell, verdicts as 0/1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,q");
        for id in &self.criteria {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for cell in &self.cells {
            out.push_str(&fmt_sig(cell.p));
            out.push(',');
            out.push_str(&fmt_sig(cell.q));
            for &v in &cell.verdicts {
                out.push_str(if v { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let cells: Vec<serde_json::Value> = self
            .cells
            .iter()
            .map(|c| {
                json!({
                    "p": crate::output::round_sig(c.p),
                    "q": crate::output::round_sig(c.q),
                    "verdicts": c.verdicts.iter().map(|&v| u8::from(v)).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::to_string(&json!({
            "family": self.family,
            "step": self.step,
            "criteria": self.criteria,
            "cells": cells,
        }))
        .expect("region serializes")
    }
}

/// Evaluates every feasible cell of a `step`-spaced grid over the simplex.
pub fn region_scan(family: &TwoStateFamily, configs: &[CriterionConfig], step: f64) -> Result<RegionGrid> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!("grid step must be in (0, 1], got {step}")));
    }
    let dims = family.dims();
    let bounds = configs.iter().map(|c| c.bound(dims)).collect::<Result<Vec<_>>>()?;
    // lhs_slot[c]: index of the first config with the same left-hand side
    let lhs_slot: Vec<usize> = configs
        .iter()
        .map(|c| configs.iter().position(|o| o.same_lhs(c)).expect("self matches"))
        .collect();

    let surfaces = (0..configs.len())
        .map(|c| if lhs_slot[c] == c { family.lhs_surface(&configs[c]).map(Some) } else { Ok(None) })
        .collect::<Result<Vec<_>>>()?;

    let n = (1.0 / step + 1e-9).floor() as usize;
    let coords: Vec<(usize, usize)> = (0..=n)
        .flat_map(|i| (0..=n).map(move |j| (i, j)))
        .filter(|&(i, j)| (i + j) as f64 * step <= 1.0 + 1e-9)
        .collect();

    let cells = coords
        .par_iter()
        .map(|&(i, j)| {
            let (p, q) = (i as f64 * step, j as f64 * step);
            let mut lhs = vec![f64::NAN; configs.len()];
            for c in 0..configs.len() {
                let slot = lhs_slot[c];
                if lhs[slot].is_nan() {
                    lhs[slot] = surfaces[slot].as_ref().expect("surface per slot").at(p, q)?;
                }
            }
            let verdicts = (0..configs.len())
                .map(|c| lhs[lhs_slot[c]] - bounds[c] > VIOLATION_MARGIN)
                .collect();
            Ok(RegionCell { i, j, p, q, verdicts })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RegionGrid {
        family: family.description.clone(),
        step,
        criteria: configs.iter().map(CriterionConfig::id).collect(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::dicke;

    fn dicke_family() -> NoiseFamily {
        NoiseFamily::new("dicke", dicke(6, 3).unwrap())
    }

    #[test]
    fn coarse_grid_covers_range() {
        let g = ScanSettings::default().grid();
        assert_eq!(g.len(), 1001);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn biseparability_threshold_of_dicke_mixture() {
        let cfg = CriterionConfig::prop1(Mode::Separable(2), OrderParam::NegInfinity);
        let out = threshold_scan(&dicke_family(), &cfg, &ScanSettings::default()).unwrap();
        let r = out.threshold().expect("single crossing");
        assert!((r.p_star - 18.5 / 24.0).abs() < 1e-6);
        assert!(r.rising);
        assert!(r.bracket_holds(1e-9));
        assert!(r.bracket.1 - r.bracket.0 <= 1e-6);
    }

    #[test]
    fn curve_matches_direct_evaluation() {
        let fam = dicke_family();
        let w = WeightedObservableSpec::pauli(6, [0.3, -0.2, 1.0]).unwrap();
        let cfgs = [
            CriterionConfig::prop1(Mode::Separable(3), OrderParam::ZERO),
            CriterionConfig::prop1(Mode::Separable(3), OrderParam::Finite(-2.5)),
            CriterionConfig::prop2(Mode::Producible(2), OrderParam::Finite(-1.0), w),
        ];
        for cfg in &cfgs {
            let curve = fam.lhs_curve(cfg).unwrap();
            for p in [0.0, 0.2, 0.5, 0.93, 1.0] {
                let direct = cfg.lhs(&fam.state_at(p).unwrap()).unwrap();
                assert!((curve.at(p).unwrap() - direct).abs() < 1e-10, "{} p={p}", cfg.id());
            }
        }
    }

    #[test]
    fn surface_matches_direct_evaluation() {
        let fam = TwoStateFamily::ghz(4).unwrap();
        let w = WeightedObservableSpec::pauli(4, [0.5, 0.0, 1.0]).unwrap();
        let cfgs = [
            CriterionConfig::prop2(Mode::Separable(2), OrderParam::NegInfinity, w),
            CriterionConfig::prop1(Mode::Separable(2), OrderParam::Finite(-0.5)),
        ];
        for cfg in &cfgs {
            let surface = fam.lhs_surface(cfg).unwrap();
            for (p, q) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.3, 0.3), (0.5, 0.49), (0.12, 0.7)] {
                let direct = cfg.lhs(&fam.state_at(p, q).unwrap()).unwrap();
                assert!((surface.at(p, q).unwrap() - direct).abs() < 1e-10, "{} ({p}, {q})", cfg.id());
            }
        }
    }

    #[test]
    fn no_crossing_is_reported() {
        let cfg = CriterionConfig::prop1(Mode::Separable(2), OrderParam::NegInfinity);
        let settings = ScanSettings { p_min: 0.0, p_max: 0.5, coarse_step: 0.01, tol: 1e-6 };
        let out = threshold_scan(&dicke_family(), &cfg, &settings).unwrap();
        assert!(matches!(out, ThresholdOutcome::NoCrossing));
    }

    #[test]
    fn rejects_bad_settings() {
        let cfg = CriterionConfig::prop1(Mode::Separable(2), OrderParam::NegInfinity);
        let settings = ScanSettings { coarse_step: 0.0, ..Default::default() };
        assert!(threshold_scan(&dicke_family(), &cfg, &settings).is_err());
    }

    #[test]
    fn coarse_region_corners() {
        let fam = TwoStateFamily::ghz(4).unwrap();
        let w = WeightedObservableSpec::pauli(4, [0.0, 0.0, 1.0]).unwrap();
        let cfgs = vec![
            CriterionConfig::prop2(Mode::Separable(2), OrderParam::NegInfinity, w.clone()),
            CriterionConfig::prop2(Mode::Producible(1), OrderParam::NegInfinity, w),
        ];
        let grid = region_scan(&fam, &cfgs, 0.25).unwrap();
        assert_eq!(grid.cells.len(), 15);
        assert_eq!(grid.cell(0, 0).unwrap().verdicts, vec![false, false]);
        // GHZ_4: variance of sum sigma_z is 16; bounds (9+1)/4*4 = 10 and 4
        assert_eq!(grid.cell(4, 0).unwrap().verdicts, vec![true, true]);
        assert_eq!(grid.cell(0, 4).unwrap().verdicts, vec![true, true]);
        assert!(grid.cell(3, 3).is_none());
        let csv = grid.to_csv();
        assert!(csv.starts_with("p,q,prop2_separable_k2,prop2_producible_k1\n0,0,0,0\n"));
    }
}
