//! Norms, variation estimators and invariant checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::Trajectory;
use crate::initdata::{weighted_derivative_sup, SmoothProfile, NORM_OVERFLOW};
use crate::lattice::HeightFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("invalid norm parameters: {0}")]
    BadParams(&'static str),
    #[error("grid level {have} is coarser than the requested level {want}")]
    ResolutionMismatch { have: u32, want: u32 },
    #[error("grid of {0} points exceeds the exact p-variation limit")]
    GridTooLarge(usize),
    #[error("ensemble of {n} is below the minimum of {min}")]
    EnsembleTooSmall { n: usize, min: usize },
    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),
    #[error("quadrature produced a non-finite value")]
    QuadratureFailure,
    #[error("ensemble members have different grids")]
    GridMismatch,
}

/// `α`, `δ` and the moment exponent `p` with `p > max(1/α, 1/(1-δ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub alpha: f64,
    pub delta: f64,
    pub p: f64,
    /// Finest dyadic level used by the Hölder term.
    pub r_max: u32,
    /// Values above this are reported as infinite.
    pub overflow: f64,
}

impl NormParams {
    pub fn new(alpha: f64, delta: f64, p: f64, r_max: u32) -> Result<Self, DiagnosticsError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(DiagnosticsError::BadParams("alpha must lie in (0, 1)"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(DiagnosticsError::BadParams("delta must lie in (0, 1)"));
        }
        if !(p > (1.0 / alpha).max(1.0 / (1.0 - delta))) {
            return Err(DiagnosticsError::BadParams(
                "p must exceed max(1/alpha, 1/(1-delta))",
            ));
        }
        Ok(NormParams {
            alpha,
            delta,
            p,
            r_max,
            overflow: 1e4,
        })
    }

    pub fn with_overflow(mut self, overflow: f64) -> Self {
        self.overflow = overflow;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormValue {
    Finite(f64),
    Infinite,
}

impl NormValue {
    fn capped(v: f64, overflow: f64) -> Self {
        if v.is_finite() && v <= overflow {
            NormValue::Finite(v)
        } else {
            NormValue::Infinite
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            NormValue::Finite(v) => Some(v),
            NormValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == NormValue::Infinite
    }
}

/// Samples `values[k] = f(start + k · 2^-level)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub start: f64,
    pub level: u32,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn sample(start: f64, end: f64, level: u32, f: impl Fn(f64) -> f64) -> Self {
        let h = (-(level as f64)).exp2();
        let n = ((end - start) / h).round() as usize;
        GridFunction {
            start,
            level,
            values: (0..=n).map(|k| f(start + k as f64 * h)).collect(),
        }
    }

    pub fn spacing(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn end(&self) -> f64 {
        self.start + (self.values.len() - 1) as f64 * self.spacing()
    }

    pub fn point(&self, k: usize) -> f64 {
        self.start + k as f64 * self.spacing()
    }

    fn index_of(&self, x: f64) -> Option<usize> {
        let u = (x - self.start) / self.spacing();
        let k = u.round();
        ((u - k).abs() < 1e-9 && k >= 0.0 && (k as usize) < self.values.len()).then_some(k as usize)
    }
}

/// Dyadic seminorm at anchor `n`: `sup_{r, k} 2^{αr} |f(n + k2^-r) - f(n + (k-1)2^-r)|`.
fn anchor_holder(f: &dyn Fn(f64) -> f64, n: f64, alpha: f64, r_max: u32) -> f64 {
    let mut best: f64 = 0.0;
    for r in 0..=r_max {
        let h = (-(r as f64)).exp2();
        let weight = (alpha * r as f64).exp2();
        let mut prev = f(n);
        for k in 1..=(1u64 << r) {
            let cur = f(n + k as f64 * h);
            best = best.max(weight * (cur - prev).abs());
            prev = cur;
        }
    }
    best
}

/// Weighted Hölder norm on the grid:
/// `sup_n (1+|n|)^-δ (|f(n)| + sup_{r ≤ r_max, k} 2^{αr} |f(n + k2^-r) - f(n + (k-1)2^-r)|)`
/// over the integer anchors `n` with `[n, n+1]` inside the grid.
pub fn weighted_holder_norm(
    f: &GridFunction,
    params: &NormParams,
) -> Result<NormValue, DiagnosticsError> {
    if params.r_max > f.level {
        return Err(DiagnosticsError::ResolutionMismatch {
            have: f.level,
            want: params.r_max,
        });
    }
    let lookup = |x: f64| f.index_of(x).map_or(f64::NAN, |k| f.values[k]);
    let first = f.start.ceil() as i64;
    let last = (f.end() - 1.0).floor() as i64;
    let mut sup: f64 = 0.0;
    for n in first..=last {
        let x = n as f64;
        let v = (1.0 + x.abs()).powf(-params.delta)
            * (lookup(x).abs() + anchor_holder(&lookup, x, params.alpha, params.r_max));
        if !v.is_finite() {
            return Ok(NormValue::Infinite);
        }
        sup = sup.max(v);
    }
    Ok(NormValue::capped(sup, params.overflow))
}

/// Integer anchors for closures: every integer in `[-64, 64]`, then `±⌊1.25^k⌋`
/// up to `2^60`.
pub fn closure_anchors() -> Vec<f64> {
    let mut xs: Vec<f64> = (-64..=64).map(|n| n as f64).collect();
    let mut x = 64.0f64;
    while x < 2f64.powi(60) {
        x = (x * 1.25).floor();
        xs.push(x);
        xs.push(-x);
    }
    xs
}

/// Weighted Hölder norm of a function given as a closure, on
/// [`closure_anchors`].
pub fn weighted_holder_norm_fn(f: impl Fn(f64) -> f64, params: &NormParams) -> NormValue {
    let mut sup: f64 = 0.0;
    for n in closure_anchors() {
        let v = (1.0 + n.abs()).powf(-params.delta)
            * (f(n).abs() + anchor_holder(&f, n, params.alpha, params.r_max));
        if !v.is_finite() {
            return NormValue::Infinite;
        }
        sup = sup.max(v);
    }
    NormValue::capped(sup, params.overflow)
}

/// `|f(0)| + sup_x (1+|x|)^-δ (|f'(x)| + |∫_0^x |f'(u)| du|)` by quadrature on
/// the profile's grid. Values above the initdata overflow bound are
/// reported as infinite.
pub fn c1_delta_norm(f: &SmoothProfile) -> Result<NormValue, DiagnosticsError> {
    c1_delta_norm_of(|x| f.eval(x), |x| f.derivative(x), f.delta())
}

/// As [`c1_delta_norm`] for raw closures, without requiring membership.
pub fn c1_delta_norm_of(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    delta: f64,
) -> Result<NormValue, DiagnosticsError> {
    let f0 = f(0.0);
    if !f0.is_finite() {
        return Err(DiagnosticsError::QuadratureFailure);
    }
    let sup = weighted_derivative_sup(&df, delta, &Default::default());
    if sup.is_nan() {
        return Err(DiagnosticsError::QuadratureFailure);
    }
    Ok(NormValue::capped(f0.abs() + sup, NORM_OVERFLOW))
}

/// `Q_N = Σ_k (Y((k+1)2^-N) - Y(k2^-N))²` over the increments inside the
/// grid's extent.
pub fn dyadic_qvar(y: &GridFunction, n: u32) -> Result<f64, DiagnosticsError> {
    if n > y.level {
        return Err(DiagnosticsError::ResolutionMismatch {
            have: y.level,
            want: n,
        });
    }
    let step = 1usize << (y.level - n);
    Ok(y.values
        .iter()
        .step_by(step)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| (w[1] - w[0]).powi(2))
        .sum())
}

/// Samples `scale · d(⌊x/ε⌋)` at `a + k2^-level` for `k = 0..=2^level (b - a)`,
/// taking the lattice site at or left of each point.
pub fn sample_lattice_dyadic(
    d: impl Fn(i64) -> f64,
    epsilon: f64,
    scale: f64,
    a: f64,
    b: f64,
    level: u32,
) -> GridFunction {
    GridFunction::sample(a, b, level, |x| {
        scale * d((x / epsilon + 1e-9).floor() as i64)
    })
}

/// Rescaled difference `√ε (h2 - h1)` of two heights on dyadic points.
pub fn height_difference_grid(
    h1: &HeightFunction,
    h2: &HeightFunction,
    epsilon: f64,
    a: f64,
    b: f64,
    level: u32,
) -> GridFunction {
    sample_lattice_dyadic(
        |n| (h2.at(n) - h1.at(n)) as f64,
        epsilon,
        epsilon.sqrt(),
        a,
        b,
        level,
    )
}

/// Largest grid accepted by the exact p-variation.
pub const EXACT_PVAR_MAX_POINTS: usize = (1 << 12) + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PVarMode {
    /// Dynamic programming over ordered partitions; errors on large grids.
    Exact,
    /// Exact when small enough, dyadic-level bound otherwise.
    Auto,
    /// `max_r Σ |Δ_r Y|^p` over dyadic levels (a lower bound).
    Dyadic,
}

/// p-variation of grid values: the supremum over sub-partitions of the grid
/// of `Σ |Y(t_{i+1}) - Y(t_i)|^p`.
pub fn p_variation(values: &[f64], p: f64, mode: PVarMode) -> Result<f64, DiagnosticsError> {
    if !(p >= 1.0) {
        return Err(DiagnosticsError::BadParams("p must be at least 1"));
    }
    let n = values.len();
    let exact_ok = n <= EXACT_PVAR_MAX_POINTS;
    match mode {
        PVarMode::Exact if !exact_ok => Err(DiagnosticsError::GridTooLarge(n)),
        PVarMode::Exact => Ok(exact_pvar(values, p)),
        PVarMode::Auto if exact_ok => Ok(exact_pvar(values, p)),
        PVarMode::Auto | PVarMode::Dyadic => Ok(dyadic_pvar(values, p)),
    }
}

fn exact_pvar(values: &[f64], p: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut best = vec![0.0f64; n];
    for j in 1..n {
        let mut b: f64 = 0.0;
        for i in 0..j {
            b = b.max(best[i] + (values[j] - values[i]).abs().powf(p));
        }
        best[j] = b;
    }
    best[n - 1]
}

fn dyadic_pvar(values: &[f64], p: f64) -> f64 {
    let n = values.len();
    let mut best: f64 = 0.0;
    let mut step = 1usize;
    while step < n {
        let s: f64 = (0..n)
            .step_by(step)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| (values[w[1]] - values[w[0]]).abs().powf(p))
            .sum();
        best = best.max(s);
        step *= 2;
    }
    best
}

/// One verdict line: `{"check", "pass", "estimate", "stderr", "threshold"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    pub estimate: f64,
    pub stderr: f64,
    pub threshold: f64,
}

/// Named group of verdicts with run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub name: String,
    pub verdicts: Vec<Verdict>,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl EstimatorReport {
    pub fn new(name: impl Into<String>) -> Self {
        EstimatorReport {
            name: name.into(),
            verdicts: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push(
        &mut self,
        check: impl Into<String>,
        pass: bool,
        estimate: f64,
        stderr: f64,
        threshold: f64,
    ) {
        self.verdicts.push(Verdict {
            check: check.into(),
            pass,
            estimate,
            stderr,
            threshold,
        });
    }

    pub fn meta(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Smallest ensemble accepted by [`moment_bound_check`].
pub const MIN_MOMENT_ENSEMBLE: usize = 100;

/// Empirical `L^p` envelopes of an ensemble of fields on a common grid:
/// `‖h(x)‖_p ≤ C(1+|x|)^δ` at the integer points and
/// `‖h(x) - h(y)‖_p ≤ C(1+|x|)^δ |x-y|^α` for dyadic pairs `y = x + k2^-r`
/// with `k ≤ 2^r` and `r ≤ r_max`, plus the mirrored pairs to the left.
/// Reports the worst ratio to the envelope; passes when it is at most `C`.
pub fn moment_bound_check(
    ensemble: &[GridFunction],
    params: &NormParams,
    c: f64,
) -> Result<EstimatorReport, DiagnosticsError> {
    if ensemble.len() < MIN_MOMENT_ENSEMBLE {
        return Err(DiagnosticsError::EnsembleTooSmall {
            n: ensemble.len(),
            min: MIN_MOMENT_ENSEMBLE,
        });
    }
    let g = &ensemble[0];
    if ensemble
        .iter()
        .any(|e| e.start != g.start || e.level != g.level || e.values.len() != g.values.len())
    {
        return Err(DiagnosticsError::GridMismatch);
    }
    if params.r_max > g.level {
        return Err(DiagnosticsError::ResolutionMismatch {
            have: g.level,
            want: params.r_max,
        });
    }
    let m = ensemble.len() as f64;
    let lp = |ix: usize, iy: Option<usize>| -> f64 {
        let s: f64 = ensemble
            .iter()
            .map(|e| {
                let v = match iy {
                    Some(j) => e.values[ix] - e.values[j],
                    None => e.values[ix],
                };
                v.abs().powf(params.p)
            })
            .sum();
        (s / m).powf(1.0 / params.p)
    };
    let mut worst_point: f64 = 0.0;
    let mut worst_pair: f64 = 0.0;
    let per_unit = 1usize << g.level;
    for n in (g.start.ceil() as i64)..=(g.end().floor() as i64) {
        let x = n as f64;
        let Some(ix) = g.index_of(x) else { continue };
        let weight = (1.0 + x.abs()).powf(params.delta);
        worst_point = worst_point.max(lp(ix, None) / weight);
        for r in 0..=params.r_max {
            let stride = per_unit >> r;
            for k in 1..=(1usize << r) {
                let off = k * stride;
                let dist = off as f64 / per_unit as f64;
                let env = weight * dist.powf(params.alpha);
                for iy in [ix.checked_add(off), ix.checked_sub(off)]
                    .into_iter()
                    .flatten()
                {
                    if iy < g.values.len() {
                        worst_pair = worst_pair.max(lp(ix, Some(iy)) / env);
                    }
                }
            }
        }
    }
    let mut report = EstimatorReport::new("moment_bound_check")
        .meta("alpha", params.alpha)
        .meta("delta", params.delta)
        .meta("p", params.p)
        .meta("ensemble", ensemble.len());
    report.push("pointwise_moment", worst_point <= c, worst_point, 0.0, c);
    report.push("increment_moment", worst_pair <= c, worst_pair, 0.0, c);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingKind {
    /// `h¹ ≤ h²` pointwise.
    M,
    /// `η¹ ≤ η²` pointwise, i.e. `h² - h¹` nondecreasing across each site.
    A,
    /// `h² - h¹` nondecreasing.
    MonotoneDifference,
}

/// First site where `kind` fails for the ordered pair `(lo, hi)`.
pub fn ordering_violation(
    lo: &HeightFunction,
    hi: &HeightFunction,
    kind: OrderingKind,
) -> Option<i64> {
    let (a, b) = (lo.values(), hi.values());
    let first = lo.window().lo;
    match kind {
        OrderingKind::M => a
            .iter()
            .zip(b)
            .position(|(x, y)| x > y)
            .map(|i| first + i as i64),
        OrderingKind::A | OrderingKind::MonotoneDifference => (1..a.len())
            .find(|&i| b[i] - a[i] < b[i - 1] - a[i - 1])
            .map(|i| first + i as i64),
    }
}

/// Checks `kind` between consecutive replicas `(0, 1), (1, 2), ...` at every
/// snapshot. The ordering must hold at the first snapshot.
pub fn ordering_check(
    traj: &Trajectory,
    kind: OrderingKind,
) -> Result<EstimatorReport, DiagnosticsError> {
    let first = traj
        .snapshots
        .first()
        .ok_or_else(|| DiagnosticsError::PreconditionNotMet("empty trajectory".into()))?;
    if first.heights.len() < 2 {
        return Err(DiagnosticsError::PreconditionNotMet(
            "need at least two replicas".into(),
        ));
    }
    for (i, w) in first.heights.windows(2).enumerate() {
        if let Some(site) = ordering_violation(&w[0], &w[1], kind) {
            return Err(DiagnosticsError::PreconditionNotMet(format!(
                "initial ordering fails between replicas {i} and {} at site {site}",
                i + 1
            )));
        }
    }
    let mut violations = 0u64;
    let mut first_violation: Option<(f64, usize, i64)> = None;
    for s in &traj.snapshots {
        for (i, w) in s.heights.windows(2).enumerate() {
            if let Some(site) = ordering_violation(&w[0], &w[1], kind) {
                violations += 1;
                first_violation.get_or_insert((s.time, i, site));
            }
        }
    }
    let name = match kind {
        OrderingKind::M => "ordering_M",
        OrderingKind::A => "ordering_A",
        OrderingKind::MonotoneDifference => "ordering_monotone_difference",
    };
    let mut report = EstimatorReport::new(name)
        .meta("seed", traj.seed)
        .meta("snapshots", traj.snapshots.len());
    if let Some((t, i, site)) = first_violation {
        report = report
            .meta("first_violation_time", t)
            .meta("first_violation_pair", i)
            .meta("first_violation_site", site);
    }
    report.push(name, violations == 0, violations as f64, 0.0, 0.0);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(alpha: f64, delta: f64) -> NormParams {
        NormParams::new(
            alpha,
            delta,
            1.0 + (1.0 / alpha).max(1.0 / (1.0 - delta)),
            6,
        )
        .unwrap()
    }

    #[test]
    fn param_constraint() {
        assert!(NormParams::new(0.5, 0.5, 2.0, 4).is_err());
        assert!(NormParams::new(0.5, 0.5, 3.0, 4).is_ok());
        assert!(NormParams::new(0.5, 0.1, 2.5, 4).is_ok());
        assert!(NormParams::new(1.5, 0.1, 2.5, 4).is_err());
    }

    #[test]
    fn constant_norm() {
        let g = GridFunction::sample(-8.0, 8.0, 6, |_| 3.0);
        assert_eq!(
            weighted_holder_norm(&g, &params(0.5, 0.5)).unwrap(),
            NormValue::Finite(3.0)
        );
        assert_eq!(
            weighted_holder_norm_fn(|_| 3.0, &params(0.5, 0.5)),
            NormValue::Finite(3.0)
        );
    }

    #[test]
    fn linear_growth_is_infinite() {
        for delta in [0.25, 0.5, 0.75] {
            assert!(weighted_holder_norm_fn(|x| x, &params(0.5, delta)).is_infinite());
        }
    }

    #[test]
    fn resolution_checked() {
        let g = GridFunction::sample(0.0, 4.0, 3, |x| x);
        assert!(matches!(
            weighted_holder_norm(&g, &params(0.5, 0.5)),
            Err(DiagnosticsError::ResolutionMismatch { .. })
        ));
        assert!(dyadic_qvar(&g, 4).is_err());
    }

    #[test]
    fn c1_examples() {
        assert_eq!(
            c1_delta_norm_of(|_| 2.5, |_| 0.0, 0.5).unwrap(),
            NormValue::Finite(2.5)
        );
        assert!(c1_delta_norm_of(|x| x * x, |x| 2.0 * x, 0.9)
            .unwrap()
            .is_infinite());
        // tanh, δ = ½: oracle by midpoint quadrature on [0, 40].
        let n = 400_000;
        let h = 40.0 / n as f64;
        let mut acc = 0.0;
        let mut sup: f64 = 1.0;
        for k in 0..n {
            let x = (k as f64 + 0.5) * h;
            acc += h / x.cosh().powi(2);
            let xe = (k + 1) as f64 * h;
            sup = sup.max((1.0 + xe).powf(-0.5) * (1.0 / xe.cosh().powi(2) + acc));
        }
        let f = SmoothProfile::tanh(1.0, 0.5).unwrap();
        assert_relative_eq!(
            c1_delta_norm(&f).unwrap().finite().unwrap(),
            sup,
            epsilon = 1e-4
        );
    }

    #[test]
    fn qvar_examples() {
        let c = GridFunction::sample(0.0, 1.0, 5, |_| 1.0);
        assert_eq!(dyadic_qvar(&c, 3).unwrap(), 0.0);
        let id = GridFunction::sample(0.0, 1.0, 5, |x| x);
        assert_relative_eq!(dyadic_qvar(&id, 3).unwrap(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn pvar_examples() {
        let mono = [0.0, 0.5, 0.5, 2.0, 3.5];
        assert_relative_eq!(p_variation(&mono, 1.0, PVarMode::Exact).unwrap(), 3.5);
        assert_eq!(p_variation(&[1.0; 9], 1.5, PVarMode::Exact).unwrap(), 0.0);
        // A single up-down spike: coarse partitions miss it.
        let zig = [0.0, 1.0, 0.0];
        assert_relative_eq!(p_variation(&zig, 2.0, PVarMode::Exact).unwrap(), 2.0);
        let big = vec![0.0; EXACT_PVAR_MAX_POINTS + 1];
        assert!(matches!(
            p_variation(&big, 2.0, PVarMode::Exact),
            Err(DiagnosticsError::GridTooLarge(_))
        ));
        assert!(p_variation(&big, 2.0, PVarMode::Auto).is_ok());
    }

    #[test]
    fn moment_check_deterministic() {
        let g = GridFunction::sample(-4.0, 4.0, 3, |x| 0.5 * (1.0 + x.abs()).sqrt());
        let ens = vec![g; 100];
        let r = moment_bound_check(&ens, &NormParams::new(0.5, 0.5, 3.0, 3).unwrap(), 1.0).unwrap();
        assert!(r.pass());
        assert_relative_eq!(r.verdicts[0].estimate, 0.5, epsilon = 1e-12);
        assert!(
            moment_bound_check(&ens[..10], &NormParams::new(0.5, 0.5, 3.0, 3).unwrap(), 1.0)
                .is_err()
        );
    }

    #[test]
    fn ordering_violation_sites() {
        use crate::lattice::Window;
        let w = Window::new(0, 3).unwrap();
        let lo = HeightFunction::new(w, 1, vec![0, 1, 0, 1]).unwrap();
        let hi = HeightFunction::new(w, 1, vec![0, 1, 2, 1]).unwrap();
        assert_eq!(ordering_violation(&lo, &hi, OrderingKind::M), None);
        assert_eq!(ordering_violation(&lo, &hi, OrderingKind::A), Some(3));
        assert_eq!(ordering_violation(&hi, &lo, OrderingKind::M), Some(2));
    }
}
