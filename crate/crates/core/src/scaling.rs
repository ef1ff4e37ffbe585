//! Weak-asymmetry rescaling, the Hopf-Cole transform and the discrete SHE
//! martingale residual.
//!
//! The rescaled field is `a_ε h(ε⁻² t, ε⁻¹ x) ± b_ε t` with `a_ε = √ε` and
//! `b_ε = ½ε⁻¹ + 1/24`.
//!
//! The Hopf-Cole field uses the exact constants of the `½ ± ½√ε` rates:
//! with `λ = ½ ln(p/q)`, `D = 2√(pq)` and `ν = 2√(pq) - 1`, the process
//! `Z_t(x) = exp(λ h_t(x) - ν t)` (microscopic time) solves
//! `dZ = D ΔZ dt + dM` with `ΔZ(x) = ½(Z(x+1) + Z(x-1) - 2Z(x))` and `M` a
//! martingale. Since `λ = √ε + O(ε^{3/2})`, `D = 1 - ε/2 + O(ε²)` and
//! `ν = -ε/2 + O(ε²)`, these agree with `ε^{1/2}`, `(1 + 2ε^{1/2})^{1/2}`
//! and `½ε⁻¹ - 1/24` only to leading order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{asep_rates, Trajectory};
use crate::lattice::HeightFunction;
use crate::stats::{Estimate, Moments};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("no snapshot at microscopic time {micro_time} (macroscopic {macro_time})")]
    GridUncovered { macro_time: f64, micro_time: f64 },
    #[error("position {x} maps outside the height window")]
    OutsideWindow { x: f64 },
    #[error("snapshot spacing {spacing} exceeds dt_max = {dt_max}")]
    QuadratureTooCoarse { spacing: f64, dt_max: f64 },
    #[error("ensemble of {n} trajectories is below the minimum of {min}")]
    EnsembleTooSmall { n: usize, min: usize },
    #[error("epsilon = {0} outside (0, 1)")]
    BadEpsilon(f64),
    #[error("replica {0} not in trajectory")]
    NoReplica(usize),
    #[error("residuals have different shapes")]
    ShapeMismatch,
    #[error("site {0} not covered by the residual")]
    SiteOutside(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DriftSign {
    /// Add `b_ε t`. Matches heights that fall under right drift.
    #[default]
    Plus,
    Minus,
    /// No renormalization (symmetric dynamics).
    None,
}

impl DriftSign {
    fn factor(self) -> f64 {
        match self {
            DriftSign::Plus => 1.0,
            DriftSign::Minus => -1.0,
            DriftSign::None => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub epsilon: f64,
    #[serde(default)]
    pub drift_sign: DriftSign,
}

impl ScalingParams {
    pub fn new(epsilon: f64, drift_sign: DriftSign) -> Result<Self, ScalingError> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(ScalingError::BadEpsilon(epsilon));
        }
        Ok(ScalingParams {
            epsilon,
            drift_sign,
        })
    }

    /// `a_ε = ε^{1/2}`.
    pub fn a(&self) -> f64 {
        self.epsilon.sqrt()
    }

    /// `b_ε = ½ε⁻¹ + 1/24`.
    pub fn b(&self) -> f64 {
        0.5 / self.epsilon + 1.0 / 24.0
    }

    /// `c_ε = ½ε⁻¹ - 1/24`.
    pub fn c(&self) -> f64 {
        0.5 / self.epsilon - 1.0 / 24.0
    }

    pub fn micro_time(&self, macro_time: f64) -> f64 {
        macro_time / (self.epsilon * self.epsilon)
    }

    pub fn micro_site(&self, macro_x: f64) -> f64 {
        macro_x / self.epsilon
    }

    /// Rescaled value of microscopic height `h` at macroscopic time `t`.
    pub fn rescale(&self, h: f64, t: f64) -> f64 {
        self.a() * h + self.drift_sign.factor() * self.b() * t
    }

    /// Inverse of [`rescale`](Self::rescale).
    pub fn unscale(&self, value: f64, t: f64) -> f64 {
        (value - self.drift_sign.factor() * self.b() * t) / self.a()
    }
}

/// Exact Hopf-Cole constants of ASEP with rates `p` (favoured direction) and
/// `q = 1 - p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfColeConstants {
    pub lambda: f64,
    pub diffusivity: f64,
    pub nu: f64,
}

impl HopfColeConstants {
    /// Constants for `p = ½ + ½√ε`, `q = ½ - ½√ε`.
    pub fn exact(epsilon: f64) -> Result<Self, ScalingError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(ScalingError::BadEpsilon(epsilon));
        }
        let (p, q) = asep_rates(epsilon);
        let root = 2.0 * (p * q).sqrt();
        Ok(HopfColeConstants {
            lambda: 0.5 * (p / q).ln(),
            diffusivity: root,
            nu: root - 1.0,
        })
    }

    /// The leading-order constants `λ = ε^{1/2}`, `D = (1 + 2ε^{1/2})^{1/2}`,
    /// `ν = -ε²(½ε⁻¹ - 1/24)`. Kept for comparison only; `M` built from
    /// them is not a martingale at fixed ε.
    pub fn leading_order(epsilon: f64) -> Self {
        HopfColeConstants {
            lambda: epsilon.sqrt(),
            diffusivity: (1.0 + 2.0 * epsilon.sqrt()).sqrt(),
            nu: -epsilon * epsilon * (0.5 / epsilon - 1.0 / 24.0),
        }
    }

    /// `λ h - ν t` for microscopic height and time.
    pub fn exponent(&self, h: f64, micro_time: f64) -> f64 {
        self.lambda * h - self.nu * micro_time
    }
}

/// Rescaled height on a macroscopic `(t, x)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledField {
    pub params: ScalingParams,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    /// `values[i][j]` at `(times[i], positions[j])`.
    pub values: Vec<Vec<f64>>,
    pub seed: u64,
    pub replica: usize,
}

fn find_snapshot(traj: &Trajectory, micro: f64) -> Option<usize> {
    let tol = 1e-9 * micro.abs().max(1.0);
    traj.snapshots
        .iter()
        .position(|s| (s.time - micro).abs() <= tol)
}

/// Linear interpolation of `h` at real site `u`.
pub fn interpolate(h: &HeightFunction, u: f64) -> Option<f64> {
    let w = h.window();
    if u < w.lo as f64 || u > w.hi as f64 {
        return None;
    }
    let i = u.floor() as i64;
    let frac = u - i as f64;
    let a = h.at(i) as f64;
    if frac == 0.0 {
        return Some(a);
    }
    Some(a + frac * (h.at(i + 1) as f64 - a))
}

/// `a_ε h(ε⁻² t, ε⁻¹ x) ± b_ε t` at the requested macroscopic grid.
pub fn rescale_field(
    traj: &Trajectory,
    replica: usize,
    params: &ScalingParams,
    times: &[f64],
    positions: &[f64],
) -> Result<RescaledField, ScalingError> {
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let micro = params.micro_time(t);
        let k = find_snapshot(traj, micro).ok_or(ScalingError::GridUncovered {
            macro_time: t,
            micro_time: micro,
        })?;
        let h = traj.snapshots[k]
            .heights
            .get(replica)
            .ok_or(ScalingError::NoReplica(replica))?;
        let row = positions
            .iter()
            .map(|&x| {
                interpolate(h, params.micro_site(x))
                    .map(|v| params.rescale(v, t))
                    .ok_or(ScalingError::OutsideWindow { x })
            })
            .collect::<Result<Vec<_>, _>>()?;
        values.push(row);
    }
    Ok(RescaledField {
        params: *params,
        times: times.to_vec(),
        positions: positions.to_vec(),
        values,
        seed: traj.seed,
        replica,
    })
}

/// `Z = exp(λ h - ν t)` on a grid of microscopic sites and times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfColeField {
    pub constants: HopfColeConstants,
    /// Microscopic snapshot times.
    pub times: Vec<f64>,
    /// First site; sites are consecutive.
    pub first_site: i64,
    pub values: Vec<Vec<f64>>,
}

impl HopfColeField {
    pub fn site_count(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn at(&self, time_index: usize, site: i64) -> f64 {
        self.values[time_index][(site - self.first_site) as usize]
    }
}

/// Hopf-Cole transform of a rescaled field. Positions must be lattice
/// points; the microscopic height is recovered by undoing the rescaling.
pub fn hopf_cole(field: &RescaledField, constants: &HopfColeConstants) -> HopfColeField {
    let p = &field.params;
    let values = field
        .times
        .iter()
        .zip(&field.values)
        .map(|(&t, row)| {
            row.iter()
                .map(|&v| constants.exponent(p.unscale(v, t), p.micro_time(t)).exp())
                .collect()
        })
        .collect();
    let first_site = field
        .positions
        .first()
        .map_or(0, |&x| p.micro_site(x).round() as i64);
    HopfColeField {
        constants: *constants,
        times: field.times.iter().map(|&t| p.micro_time(t)).collect(),
        first_site,
        values,
    }
}

/// Hopf-Cole field of one replica straight from microscopic snapshots, on
/// every site of the height window.
pub fn hopf_cole_from_trajectory(
    traj: &Trajectory,
    replica: usize,
    constants: &HopfColeConstants,
) -> Result<HopfColeField, ScalingError> {
    let first = traj.snapshots.first().ok_or(ScalingError::ShapeMismatch)?;
    let w = first
        .heights
        .get(replica)
        .ok_or(ScalingError::NoReplica(replica))?
        .window();
    let values = traj
        .snapshots
        .iter()
        .map(|s| {
            s.heights[replica]
                .values()
                .iter()
                .map(|&h| constants.exponent(h as f64, s.time).exp())
                .collect()
        })
        .collect();
    Ok(HopfColeField {
        constants: *constants,
        times: traj.snapshots.iter().map(|s| s.time).collect(),
        first_site: w.lo,
        values,
    })
}

/// `Δf(x) = ½(f(x+1) + f(x-1) - 2f(x))` on the interior sites; the output is
/// two shorter than the input.
pub fn discrete_laplacian(values: &[f64]) -> Vec<f64> {
    values
        .windows(3)
        .map(|w| 0.5 * (w[0] + w[2] - 2.0 * w[1]))
        .collect()
}

/// Per-site residual `M(x, t_j)` on the interior sites of a Hopf-Cole field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleResidual {
    pub times: Vec<f64>,
    pub first_site: i64,
    /// `values[j][i]` is `M(first_site + i, times[j])`; `values[0]` is zero.
    pub values: Vec<Vec<f64>>,
}

impl MartingaleResidual {
    pub fn site_count(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    fn column(&self, site: i64) -> Result<usize, ScalingError> {
        let i = site - self.first_site;
        if i < 0 || i as usize >= self.site_count() {
            return Err(ScalingError::SiteOutside(site));
        }
        Ok(i as usize)
    }

    pub fn at(&self, time_index: usize, site: i64) -> Result<f64, ScalingError> {
        Ok(self.values[time_index][self.column(site)?])
    }

    /// `M(x, t_{j+1}) - M(x, t_j)` for every interval.
    pub fn increments(&self, site: i64) -> Result<Vec<f64>, ScalingError> {
        let c = self.column(site)?;
        Ok(self.values.windows(2).map(|w| w[1][c] - w[0][c]).collect())
    }

    pub fn duration(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// `M_t(x) = Z_t(x) - Z_0(x) - ∫_0^t D ΔZ_s(x) ds`, the integral by the
/// trapezoid rule over snapshots. Fails if snapshots are more than `dt_max`
/// apart (microscopic time).
pub fn martingale_residual(
    z: &HopfColeField,
    dt_max: f64,
) -> Result<MartingaleResidual, ScalingError> {
    if let Some(spacing) = z
        .times
        .windows(2)
        .map(|w| w[1] - w[0])
        .find(|&d| d > dt_max * (1.0 + 1e-9))
    {
        return Err(ScalingError::QuadratureTooCoarse { spacing, dt_max });
    }
    let d = z.constants.diffusivity;
    let lap: Vec<Vec<f64>> = z.values.iter().map(|row| discrete_laplacian(row)).collect();
    let n = lap.first().map_or(0, Vec::len);
    let mut values = Vec::with_capacity(z.times.len());
    let mut integral = vec![0.0; n];
    values.push(vec![0.0; n]);
    for j in 1..z.times.len() {
        let dt = z.times[j] - z.times[j - 1];
        for i in 0..n {
            integral[i] += 0.5 * dt * d * (lap[j][i] + lap[j - 1][i]);
        }
        values.push(
            (0..n)
                .map(|i| z.values[j][i + 1] - z.values[0][i + 1] - integral[i])
                .collect(),
        );
    }
    Ok(MartingaleResidual {
        times: z.times.clone(),
        first_site: z.first_site + 1,
        values,
    })
}

/// `Σ_j ΔM1(x) ΔM2(y) / T` for one trajectory.
pub fn bracket_sample(
    m1: &MartingaleResidual,
    m2: &MartingaleResidual,
    x: i64,
    y: i64,
) -> Result<f64, ScalingError> {
    if m1.times != m2.times {
        return Err(ScalingError::ShapeMismatch);
    }
    let (da, db) = (m1.increments(x)?, m2.increments(y)?);
    let s: f64 = da.iter().zip(&db).map(|(u, v)| u * v).sum();
    Ok(s / m1.duration())
}

/// Smallest ensemble accepted by [`bracket_cross_estimator`].
pub const MIN_ENSEMBLE: usize = 30;

/// Ensemble mean of `Σ_j ΔM1(x) ΔM2(y) / T` with its standard error, where
/// `m1[k]` and `m2[k]` come from trajectory `k`.
pub fn bracket_cross_estimator(
    m1: &[MartingaleResidual],
    m2: &[MartingaleResidual],
    x: i64,
    y: i64,
) -> Result<Estimate, ScalingError> {
    if m1.len() != m2.len() {
        return Err(ScalingError::ShapeMismatch);
    }
    if m1.len() < MIN_ENSEMBLE {
        return Err(ScalingError::EnsembleTooSmall {
            n: m1.len(),
            min: MIN_ENSEMBLE,
        });
    }
    let mut acc = Moments::new();
    for (a, b) in m1.iter().zip(m2) {
        acc.push(bracket_sample(a, b, x, y)?);
    }
    Ok(Estimate::from_moments(&acc))
}

/// Edwards-Wilkinson one-point variance `∫_0^t Σ_m p_{2s}(mℓ) ds` for
/// `∂_t u = ½ ∂²_x u + ξ` on a ring of length `ℓ` (`None` for the line),
/// with `p_{2s}(y) = exp(-y²/4s) / √(4πs)`. On the line this is `√(t/π)`.
pub fn ew_variance(t: f64, period: Option<f64>) -> f64 {
    // s = u² removes the 1/√s singularity.
    let integrand = |u: f64| -> f64 {
        let images = match period {
            None => 1.0,
            Some(l) => {
                let mut acc = 1.0;
                for m in 1..200 {
                    let term = 2.0 * (-(m as f64 * l).powi(2) / (4.0 * u * u)).exp();
                    acc += term;
                    if term < 1e-18 {
                        break;
                    }
                }
                acc
            }
        };
        images / std::f64::consts::PI.sqrt()
    };
    let n = 20_000;
    let b = t.sqrt();
    let h = b / n as f64;
    let mut sum = integrand(1e-300) + integrand(b);
    for k in 1..n {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * integrand(k as f64 * h);
    }
    sum * h / 3.0
}
