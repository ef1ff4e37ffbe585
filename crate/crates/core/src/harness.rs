//! Experiment configuration, the scenario catalog, reproducible ensemble
//! runs and replay.
//!
//! Trajectory `i` of an ensemble runs on the event-stream seed
//! `derive_seed(master, i)`; random initial data of replica `r` use
//! `derive_aux_seed(seed_i, r)` and uncoupled replicas use
//! `derive_aux_seed(seed_i, 1000 + r)`. Results are reduced in trajectory
//! order, so thread count never changes an output byte.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::diagnostics::{
    dyadic_qvar, height_difference_grid, moment_bound_check, ordering_violation, GridFunction,
    NormParams, OrderingKind, Verdict,
};
use crate::dynamics::{
    asep_model_with_drift, asep_qj_model_normalized, evolve_coupled, evolve_uncoupled, ssep_model,
    ClockScheme, Direction, EvolveOptions, RateModel, Trajectory,
};
use crate::initdata::{
    approx_viable_group, bernoulli_height, dominating_profile, envelope_pair,
    ordered_bernoulli_pair, ramp_pair, threshold_config, ProfileSpec, SmoothProfile,
};
use crate::lattice::{
    height_from_config, viable_max, viable_min, BoundaryMode, Configuration, HeightFunction,
    HeightSnapshot, Window,
};
use crate::scaling::{
    bracket_sample, hopf_cole_from_trajectory, martingale_residual, DriftSign, HopfColeConstants,
    ScalingParams,
};
use crate::seeds::{derive_aux_seed, derive_seed};
use crate::stats::{Estimate, Moments};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config at `{path}`: {reason}")]
    ConfigInvalid { path: String, reason: String },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
}

fn invalid(path: &str, reason: impl Into<String>) -> HarnessError {
    HarnessError::ConfigInvalid {
        path: path.to_string(),
        reason: reason.into(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn sim_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Simulation(e.to_string())
}

fn right() -> Direction {
    Direction::Right
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Asep {
        epsilon: f64,
        #[serde(default = "right")]
        drift: Direction,
    },
    /// Symmetric exclusion; `epsilon` only sets the rescaling.
    Ssep { epsilon: f64 },
    /// ASEP(q, J) with rates divided by the largest one; `epsilon` only sets
    /// the rescaling.
    AsepQj {
        q: f64,
        #[serde(rename = "J")]
        spin_max: u32,
        epsilon: f64,
    },
}

impl ModelSpec {
    pub fn epsilon(&self) -> f64 {
        match *self {
            ModelSpec::Asep { epsilon, .. }
            | ModelSpec::Ssep { epsilon }
            | ModelSpec::AsepQj { epsilon, .. } => epsilon,
        }
    }

    pub fn spin_max(&self) -> u32 {
        match *self {
            ModelSpec::AsepQj { spin_max, .. } => spin_max,
            _ => 1,
        }
    }

    pub fn build(&self) -> Result<RateModel, HarnessError> {
        match *self {
            ModelSpec::Asep { epsilon, drift } => {
                asep_model_with_drift(epsilon, drift).map_err(|e| invalid("model", e.to_string()))
            }
            ModelSpec::Ssep { .. } => Ok(ssep_model()),
            ModelSpec::AsepQj { q, spin_max, .. } => asep_qj_model_normalized(q, spin_max)
                .map(|(m, _)| m)
                .map_err(|e| invalid("model", e.to_string())),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            ModelSpec::Asep { .. } => "asep",
            ModelSpec::Ssep { .. } => "ssep",
            ModelSpec::AsepQj { .. } => "asep-qj",
        }
    }
}

fn half() -> f64 {
    0.5
}

/// Initial datum of one replica. Lattice windows come from the lattice
/// section; profiles are macroscopic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `𝒜^ε` of a profile. All `approx`, `dominating` and `envelope-*`
    /// replicas share one cutoff and interval grid.
    Approx {
        profile: ProfileSpec,
        #[serde(default = "half")]
        delta: f64,
    },
    /// `𝒜^ε` of `∫_0^x max(f', g')`.
    Dominating {
        f: ProfileSpec,
        g: ProfileSpec,
        #[serde(default = "half")]
        delta: f64,
    },
    EnvelopeUpper {
        target: ProfileSpec,
        n: u32,
        #[serde(default = "half")]
        delta: f64,
    },
    EnvelopeLower {
        target: ProfileSpec,
        n: u32,
        #[serde(default = "half")]
        delta: f64,
    },
    /// i.i.d. Bernoulli(ρ), seeded per trajectory and replica.
    Bernoulli { rho: f64 },
    /// `min(η, η')` of two Bernoulli fields shared by every `ordered-*`
    /// replica of the trajectory.
    OrderedLower { rho: f64 },
    /// `max(η, η')` of the same two fields.
    OrderedUpper { rho: f64 },
    /// Alternating `1, 0, 1, 0, ...` with `η(x) = 1` at even `x`.
    Flat,
    /// `η ≡ occupancy`.
    Constant { occupancy: u8 },
    /// Lower datum of [`ramp_pair`].
    RampLower { increase: f64, a: f64, b: f64 },
    /// Upper datum of [`ramp_pair`].
    RampUpper { increase: f64, a: f64, b: f64 },
    /// Deterministic occupancies with density `½(1 + √ε f'(εx))`, anchored
    /// at `h(0) ≈ f(0)/√ε`; converges to the same limit as `𝒜^ε f`.
    Threshold {
        profile: ProfileSpec,
        #[serde(default = "half")]
        delta: f64,
    },
    /// Pointwise maximum of two earlier replicas.
    Max { of: [usize; 2] },
    /// Pointwise minimum of two earlier replicas.
    Min { of: [usize; 2] },
}

impl InitialSpec {
    fn is_random(&self) -> bool {
        matches!(
            self,
            InitialSpec::Bernoulli { .. }
                | InitialSpec::OrderedLower { .. }
                | InitialSpec::OrderedUpper { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    /// Configurations live on `[-L, L]`.
    pub half_width: i64,
    #[serde(default)]
    pub boundary: BoundaryMode,
    /// Half-width of the region read by diagnostics (sites).
    pub observation_half_width: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    /// Microscopic horizon.
    pub horizon: f64,
    /// Regular snapshot spacing (microscopic); `0` for none.
    #[serde(default)]
    pub snapshot_every: f64,
    /// Extra microscopic snapshot times.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// One event stream for all replicas.
    #[default]
    Coupled,
    /// One event stream per replica (negative control).
    Independent,
}

fn three() -> f64 {
    3.0
}

fn five() -> f64 {
    5.0
}

fn one_tenth() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiagnosticSpec {
    /// Ordering at every snapshot between the listed `[lower, upper]` pairs.
    Ordering {
        ordering: OrderingKind,
        pairs: Vec<[usize; 2]>,
    },
    /// Ensemble mean of `Q_N` of `√ε (h_upper - h_lower)` on `[a, b]` at
    /// macroscopic time `t`; passes when `mean Q_last / mean Q_first` is at
    /// most `max_ratio` (or at least `min_ratio`).
    Qvar {
        pair: [usize; 2],
        t: f64,
        a: f64,
        b: f64,
        levels: Vec<u32>,
        #[serde(default)]
        max_ratio: Option<f64>,
        #[serde(default)]
        min_ratio: Option<f64>,
    },
    /// Hopf-Cole residual means, cross brackets and same-site quadratic
    /// variation at the probe sites of the first two replicas.
    Martingale {
        probes: Vec<i64>,
        #[serde(default = "one_tenth")]
        dt_max: f64,
        #[serde(default = "three")]
        band: f64,
        #[serde(default = "five")]
        qv_sigma: f64,
    },
    /// Moment envelopes of the rescaled initial data of `replica` on
    /// `[-extent, extent]` (macroscopic).
    Moment {
        replica: usize,
        alpha: f64,
        delta: f64,
        p: f64,
        c: f64,
        extent: f64,
        #[serde(default = "six")]
        r_max: u32,
    },
    /// Site occupation means and nearest-neighbour covariances of replica 0
    /// at microscopic time `t` against density `rho`.
    Occupation {
        t: f64,
        rho: f64,
        #[serde(default = "three")]
        band: f64,
        /// Largest allowed fraction of sites outside their own band.
        #[serde(default = "two_percent")]
        max_outside: f64,
    },
    /// Mean, variance and skewness of the rescaled height of replica 0 at
    /// macroscopic `(t, x)`.
    HeightStats {
        t: f64,
        x: f64,
        #[serde(default)]
        variance_target: Option<f64>,
        #[serde(default)]
        variance_rel_tol: Option<f64>,
        #[serde(default = "three")]
        band: f64,
    },
}

fn six() -> u32 {
    6
}

fn two_percent() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema")]
    pub schema_version: u32,
    pub name: String,
    pub seed: u64,
    pub ensemble: usize,
    /// Trajectories written to `trajectories.jsonl`.
    #[serde(default = "record_default")]
    pub record: usize,
    #[serde(default)]
    pub coupling: Coupling,
    #[serde(default)]
    pub clocks: ClockScheme,
    pub model: ModelSpec,
    pub lattice: LatticeSpec,
    pub time: TimeSpec,
    pub initial: Vec<InitialSpec>,
    #[serde(default)]
    pub drift_sign: DriftSign,
    #[serde(default)]
    pub diagnostics: Vec<DiagnosticSpec>,
}

fn schema() -> u32 {
    SCHEMA_VERSION
}

fn record_default() -> usize {
    2
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml(&fs::read_to_string(path).map_err(io_err(path))?)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn window(&self) -> Window {
        Window::symmetric(self.lattice.half_width)
    }

    pub fn height_window(&self) -> Window {
        let w = self.window();
        Window {
            lo: w.lo - 1,
            hi: w.hi,
        }
    }

    pub fn scaling(&self) -> Result<ScalingParams, HarnessError> {
        ScalingParams::new(self.model.epsilon(), self.drift_sign)
            .map_err(|e| invalid("model.epsilon", e.to_string()))
    }

    /// Snapshot schedule: `0`, the regular grid, the extra times, the times
    /// diagnostics need and the horizon, sorted without duplicates.
    pub fn schedule(&self) -> Vec<f64> {
        let h = self.time.horizon;
        let mut ts = vec![0.0, h];
        if self.time.snapshot_every > 0.0 {
            let n = (h / self.time.snapshot_every + 1e-9).floor() as usize;
            ts.extend((0..=n).map(|k| k as f64 * self.time.snapshot_every));
        }
        ts.extend(self.time.snapshot_times.iter().copied());
        let eps = self.model.epsilon();
        for d in &self.diagnostics {
            match d {
                DiagnosticSpec::Qvar { t, .. } | DiagnosticSpec::HeightStats { t, .. } => {
                    ts.push(t / (eps * eps))
                }
                DiagnosticSpec::Occupation { t, .. } => ts.push(*t),
                _ => {}
            }
        }
        ts.retain(|t| *t <= h * (1.0 + 1e-12));
        ts.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
        ts
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}"),
            ));
        }
        if self.ensemble == 0 {
            return Err(invalid("ensemble", "must be positive"));
        }
        if self.initial.is_empty() {
            return Err(invalid("initial", "need at least one replica"));
        }
        self.model.build()?;
        self.scaling()?;
        let l = &self.lattice;
        if l.half_width < 1
            || l.observation_half_width < 0
            || l.observation_half_width > l.half_width
        {
            return Err(invalid(
                "lattice",
                "need 0 <= observation_half_width <= half_width, half_width >= 1",
            ));
        }
        let t = &self.time;
        if !(t.horizon.is_finite() && t.horizon >= 0.0) || !(t.snapshot_every >= 0.0) {
            return Err(invalid(
                "time",
                "horizon and snapshot_every must be finite and nonnegative",
            ));
        }
        if t.snapshot_times.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("time.snapshot_times", "must be sorted"));
        }
        if t.snapshot_times
            .iter()
            .any(|&s| !(s >= 0.0 && s <= t.horizon))
        {
            return Err(invalid("time.snapshot_times", "must lie in [0, horizon]"));
        }
        if l.boundary == BoundaryMode::Frozen {
            let need = l.observation_half_width + (4.0 * t.horizon).ceil() as i64 + 8;
            if l.half_width < need {
                return Err(invalid(
                    "lattice.half_width",
                    format!(
                        "light-cone rule needs L >= {need} for horizon {}",
                        t.horizon
                    ),
                ));
            }
        }
        let k = self.initial.len();
        for (i, s) in self.initial.iter().enumerate() {
            if let InitialSpec::Max { of } | InitialSpec::Min { of } = s {
                if of.iter().any(|&j| j >= i) {
                    return Err(invalid(
                        &format!("initial[{i}].of"),
                        "must reference earlier replicas",
                    ));
                }
            }
            if self.model.spin_max() != 1
                && !matches!(
                    s,
                    InitialSpec::Constant { .. }
                        | InitialSpec::Max { .. }
                        | InitialSpec::Min { .. }
                )
            {
                return Err(invalid(
                    &format!("initial[{i}]"),
                    "only constant data are available for J > 1",
                ));
            }
            if let InitialSpec::Constant { occupancy } = s {
                if *occupancy as u32 > self.model.spin_max() {
                    return Err(invalid(&format!("initial[{i}].occupancy"), "exceeds J"));
                }
            }
        }
        let eps = self.model.epsilon();
        for (i, d) in self.diagnostics.iter().enumerate() {
            let path = format!("diagnostics[{i}]");
            let check_replica = |r: usize| {
                if r >= k {
                    Err(invalid(&path, format!("replica {r} does not exist")))
                } else {
                    Ok(())
                }
            };
            match d {
                DiagnosticSpec::Ordering { pairs, .. } => {
                    for p in pairs {
                        check_replica(p[0])?;
                        check_replica(p[1])?;
                    }
                }
                DiagnosticSpec::Qvar {
                    pair,
                    t,
                    a,
                    b,
                    levels,
                    ..
                } => {
                    check_replica(pair[0])?;
                    check_replica(pair[1])?;
                    if levels.len() < 2 || !(b > a) {
                        return Err(invalid(&path, "need two levels and a < b"));
                    }
                    if t / (eps * eps) > self.time.horizon * (1.0 + 1e-12) {
                        return Err(invalid(&path, "t beyond horizon"));
                    }
                    let obs = l.observation_half_width as f64 * eps;
                    if a.abs() > obs || b.abs() > obs {
                        return Err(invalid(&path, "[a, b] outside the observation window"));
                    }
                }
                DiagnosticSpec::Martingale { probes, .. } => {
                    check_replica(1.min(k - 1))?;
                    if probes.iter().any(|p| p.abs() > l.observation_half_width) {
                        return Err(invalid(&path, "probe outside the observation window"));
                    }
                    if self.model.spin_max() != 1 || matches!(self.model, ModelSpec::Ssep { .. }) {
                        return Err(invalid(&path, "needs the ASEP model"));
                    }
                }
                DiagnosticSpec::Moment {
                    replica,
                    alpha,
                    delta,
                    p,
                    extent,
                    ..
                } => {
                    check_replica(*replica)?;
                    NormParams::new(*alpha, *delta, *p, 0)
                        .map_err(|e| invalid(&path, e.to_string()))?;
                    if *extent > l.half_width as f64 * eps {
                        return Err(invalid(&path, "extent beyond the window"));
                    }
                }
                DiagnosticSpec::Occupation { t, .. } => {
                    if *t > self.time.horizon {
                        return Err(invalid(&path, "t beyond horizon"));
                    }
                }
                DiagnosticSpec::HeightStats { t, x, .. } => {
                    if t / (eps * eps) > self.time.horizon * (1.0 + 1e-12) {
                        return Err(invalid(&path, "t beyond horizon"));
                    }
                    if (x / eps).abs() > l.observation_half_width as f64 {
                        return Err(invalid(&path, "x outside the observation window"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Deterministic initial data, computed once per run.
struct InitialCache {
    fixed: Vec<Option<HeightFunction>>,
}

fn alternating(window: Window, boundary: BoundaryMode) -> Result<Configuration, HarnessError> {
    let occ = window
        .sites()
        .map(|x| u8::from(x.rem_euclid(2) == 0))
        .collect();
    Configuration::new(window, 1, occ, boundary).map_err(sim_err)
}

fn build_fixed(cfg: &ExperimentConfig) -> Result<InitialCache, HarnessError> {
    let eps = cfg.model.epsilon();
    let window = cfg.window();
    let hwin = cfg.height_window();
    let boundary = cfg.lattice.boundary;
    let mut fixed: Vec<Option<HeightFunction>> = vec![None; cfg.initial.len()];
    // Group the 𝒜^ε replicas on one parameter set.
    let mut group: Vec<(usize, SmoothProfile)> = Vec::new();
    for (i, s) in cfg.initial.iter().enumerate() {
        let path = format!("initial[{i}]");
        let err = |e: crate::initdata::InitError| invalid(&path, e.to_string());
        match s {
            InitialSpec::Approx { profile, delta } => {
                group.push((i, profile.build(*delta).map_err(err)?))
            }
            InitialSpec::Dominating { f, g, delta } => {
                let r = dominating_profile(
                    &f.build(*delta).map_err(err)?,
                    &g.build(*delta).map_err(err)?,
                )
                .map_err(err)?;
                group.push((i, r));
            }
            InitialSpec::EnvelopeUpper { target, n, delta }
            | InitialSpec::EnvelopeLower { target, n, delta } => {
                let (up, lo) =
                    envelope_pair(&target.build(*delta).map_err(err)?, *n).map_err(err)?;
                group.push((
                    i,
                    if matches!(s, InitialSpec::EnvelopeUpper { .. }) {
                        up
                    } else {
                        lo
                    },
                ));
            }
            InitialSpec::Flat => {
                fixed[i] = Some(height_from_config(&alternating(window, boundary)?, 0))
            }
            InitialSpec::Constant { occupancy } => {
                let c = Configuration::new(
                    window,
                    cfg.model.spin_max(),
                    vec![*occupancy; window.len()],
                    boundary,
                )
                .map_err(sim_err)?;
                fixed[i] = Some(height_from_config(&c, 0));
            }
            InitialSpec::RampLower { increase, a, b }
            | InitialSpec::RampUpper { increase, a, b } => {
                let (lo, hi) = ramp_pair(eps, *increase, (*a, *b), window).map_err(err)?;
                fixed[i] = Some(if matches!(s, InitialSpec::RampLower { .. }) {
                    lo
                } else {
                    hi
                });
            }
            InitialSpec::Threshold { profile, delta } => {
                let f = profile.build(*delta).map_err(err)?;
                let root = eps.sqrt();
                let c = threshold_config(
                    |n| (0.5 * (1.0 + root * f.derivative(n as f64 * eps))).clamp(0.0, 1.0),
                    window,
                    boundary,
                )
                .map_err(err)?;
                let anchor = 2 * (f.eval(0.0) / (2.0 * root)).round() as i64;
                fixed[i] = Some(height_from_config(&c, anchor));
            }
            _ => {}
        }
    }
    if !group.is_empty() {
        let profiles: Vec<&SmoothProfile> = group.iter().map(|(_, p)| p).collect();
        let built = approx_viable_group(&profiles, eps, hwin)
            .map_err(|e| invalid("initial", e.to_string()))?;
        for ((i, _), a) in group.iter().zip(built) {
            fixed[*i] = Some(a.height);
        }
    }
    Ok(InitialCache { fixed })
}

fn initial_heights(
    cfg: &ExperimentConfig,
    cache: &InitialCache,
    traj_seed: u64,
) -> Result<Vec<HeightFunction>, HarnessError> {
    let window = cfg.window();
    let mut out: Vec<HeightFunction> = Vec::with_capacity(cfg.initial.len());
    let mut ordered: Option<(HeightFunction, HeightFunction)> = None;
    for (r, s) in cfg.initial.iter().enumerate() {
        let h = match s {
            InitialSpec::Bernoulli { rho } => {
                bernoulli_height(*rho, window, derive_aux_seed(traj_seed, r as u64))
                    .map_err(sim_err)?
            }
            InitialSpec::OrderedLower { rho } | InitialSpec::OrderedUpper { rho } => {
                if ordered.is_none() {
                    let (a, b) = ordered_bernoulli_pair(
                        *rho,
                        window,
                        cfg.lattice.boundary,
                        derive_aux_seed(traj_seed, 500),
                    )
                    .map_err(sim_err)?;
                    ordered = Some((height_from_config(&a, 0), height_from_config(&b, 0)));
                }
                let (lo, hi) = ordered.as_ref().expect("just built");
                if matches!(s, InitialSpec::OrderedLower { .. }) {
                    lo.clone()
                } else {
                    hi.clone()
                }
            }
            InitialSpec::Max { of } => viable_max(&out[of[0]], &out[of[1]]).map_err(sim_err)?,
            InitialSpec::Min { of } => viable_min(&out[of[0]], &out[of[1]]).map_err(sim_err)?,
            _ => cache.fixed[r]
                .clone()
                .ok_or_else(|| sim_err("missing fixed initial datum"))?,
        };
        out.push(h);
    }
    debug_assert!(cfg.initial.iter().filter(|s| s.is_random()).count() <= out.len());
    Ok(out)
}

/// One row of `report.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub quantity: String,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub t: Option<f64>,
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
}

#[derive(Debug, Clone)]
struct Sample {
    quantity: String,
    x: Option<f64>,
    y: Option<f64>,
    t: Option<f64>,
    value: f64,
}

fn sample(
    quantity: impl Into<String>,
    x: Option<f64>,
    y: Option<f64>,
    t: Option<f64>,
    value: f64,
) -> Sample {
    Sample {
        quantity: quantity.into(),
        x,
        y,
        t,
        value,
    }
}

/// Per-trajectory output of one diagnostic.
#[derive(Debug, Clone)]
enum Contribution {
    Scalars(Vec<Sample>),
    Grid(GridFunction),
}

fn snapshot_index(traj: &Trajectory, micro: f64) -> Result<usize, HarnessError> {
    traj.snapshots
        .iter()
        .position(|s| (s.time - micro).abs() <= 1e-9 * micro.abs().max(1.0))
        .ok_or_else(|| sim_err(format!("no snapshot at t = {micro}")))
}

fn contribute(
    cfg: &ExperimentConfig,
    d: &DiagnosticSpec,
    traj: &Trajectory,
) -> Result<Contribution, HarnessError> {
    let eps = cfg.model.epsilon();
    let scaling = cfg.scaling()?;
    match d {
        DiagnosticSpec::Ordering { ordering, pairs } => {
            let samples = pairs
                .iter()
                .map(|p| {
                    let count = traj
                        .snapshots
                        .iter()
                        .filter(|s| {
                            ordering_violation(&s.heights[p[0]], &s.heights[p[1]], *ordering)
                                .is_some()
                        })
                        .count();
                    sample(
                        format!("violations_{}_{}", p[0], p[1]),
                        Some(p[0] as f64),
                        Some(p[1] as f64),
                        None,
                        count as f64,
                    )
                })
                .collect();
            Ok(Contribution::Scalars(samples))
        }
        DiagnosticSpec::Qvar {
            pair,
            t,
            a,
            b,
            levels,
            ..
        } => {
            let s = &traj.snapshots[snapshot_index(traj, t / (eps * eps))?];
            let top = *levels.iter().max().expect("validated");
            let grid =
                height_difference_grid(&s.heights[pair[0]], &s.heights[pair[1]], eps, *a, *b, top);
            let samples = levels
                .iter()
                .map(|&n| {
                    let q = dyadic_qvar(&grid, n).map_err(sim_err)?;
                    Ok(sample("qvar", Some(n as f64), None, Some(*t), q))
                })
                .collect::<Result<Vec<_>, HarnessError>>()?;
            Ok(Contribution::Scalars(samples))
        }
        DiagnosticSpec::Martingale { probes, dt_max, .. } => {
            let c = HopfColeConstants::exact(eps).map_err(sim_err)?;
            let k = traj.replica_count().min(2);
            let mut res = Vec::with_capacity(k);
            let mut z0 = Vec::with_capacity(k);
            for r in 0..k {
                let z = hopf_cole_from_trajectory(traj, r, &c).map_err(sim_err)?;
                z0.push(z.clone());
                res.push(martingale_residual(&z, *dt_max).map_err(sim_err)?);
            }
            let last = traj.snapshots.len() - 1;
            let horizon = traj.snapshots[last].time;
            let mut samples = Vec::new();
            for r in 0..k {
                for &x in probes {
                    // Normalized by Z_0(x) so sites are comparable.
                    let m = res[r].at(last, x).map_err(sim_err)? / z0[r].at(0, x);
                    samples.push(sample(
                        format!("residual_r{r}"),
                        Some(x as f64),
                        None,
                        Some(horizon),
                        m,
                    ));
                }
            }
            let norm = |r: usize, x: i64| z0[r].at(0, x);
            for (r, field) in res.iter().enumerate().take(k) {
                for &x in probes {
                    let qv = bracket_sample(field, field, x, x).map_err(sim_err)?
                        / (norm(r, x) * norm(r, x));
                    samples.push(sample(
                        format!("qv_r{r}"),
                        Some(x as f64),
                        Some(x as f64),
                        Some(horizon),
                        qv,
                    ));
                }
            }
            for (i, &x) in probes.iter().enumerate() {
                for &y in &probes[i + 1..] {
                    for (r1, r2) in [(0, 0), (0, k - 1)] {
                        if r1 == r2 && r2 != 0 {
                            continue;
                        }
                        let v = bracket_sample(&res[r1], &res[r2], x, y).map_err(sim_err)?
                            / (norm(r1, x) * norm(r2, y));
                        samples.push(sample(
                            format!("cross_r{r1}{r2}"),
                            Some(x as f64),
                            Some(y as f64),
                            Some(horizon),
                            v,
                        ));
                        if r1 != r2 {
                            let v = bracket_sample(&res[r1], &res[r2], y, x).map_err(sim_err)?
                                / (norm(r1, y) * norm(r2, x));
                            samples.push(sample(
                                format!("cross_r{r1}{r2}"),
                                Some(y as f64),
                                Some(x as f64),
                                Some(horizon),
                                v,
                            ));
                        }
                    }
                }
            }
            Ok(Contribution::Scalars(samples))
        }
        DiagnosticSpec::Moment {
            replica,
            extent,
            r_max,
            ..
        } => {
            let h = &traj.snapshots[0].heights[*replica];
            let grid = GridFunction::sample(-extent, *extent, *r_max, |x| {
                crate::scaling::interpolate(h, x / eps).map_or(f64::NAN, |v| scaling.a() * v)
            });
            Ok(Contribution::Grid(grid))
        }
        DiagnosticSpec::Occupation { t, .. } => {
            let s = &traj.snapshots[snapshot_index(traj, *t)?];
            let h = &s.heights[0];
            let obs = cfg.lattice.observation_half_width;
            let j = h.spin_max() as i64;
            let eta = |x: i64| ((h.at(x) - h.at(x - 1) + j) / 2) as f64;
            let mut samples = Vec::new();
            for x in -obs..=obs {
                samples.push(sample("occupation", Some(x as f64), None, Some(*t), eta(x)));
            }
            for x in -obs..obs {
                samples.push(sample(
                    "nn_product",
                    Some(x as f64),
                    Some((x + 1) as f64),
                    Some(*t),
                    eta(x) * eta(x + 1),
                ));
            }
            let sites = (2 * obs + 1) as f64;
            let avg = (-obs..=obs).map(eta).sum::<f64>() / sites;
            samples.push(sample("occupation_avg", None, None, Some(*t), avg));
            let nn = (-obs..obs).map(|x| eta(x) * eta(x + 1)).sum::<f64>() / (sites - 1.0).max(1.0);
            samples.push(sample("nn_product_avg", None, None, Some(*t), nn));
            Ok(Contribution::Scalars(samples))
        }
        DiagnosticSpec::HeightStats { t, x, .. } => {
            let s = &traj.snapshots[snapshot_index(traj, t / (eps * eps))?];
            let v = crate::scaling::interpolate(&s.heights[0], x / eps)
                .ok_or_else(|| sim_err("x outside window"))?;
            Ok(Contribution::Scalars(vec![sample(
                "height",
                Some(*x),
                None,
                Some(*t),
                scaling.rescale(v, *t),
            )]))
        }
    }
}

fn reduce(per_traj: &[Vec<Sample>]) -> Vec<(Sample, Moments)> {
    let Some(first) = per_traj.first() else {
        return Vec::new();
    };
    let mut acc: Vec<(Sample, Moments)> =
        first.iter().map(|s| (s.clone(), Moments::new())).collect();
    for samples in per_traj {
        for (slot, s) in acc.iter_mut().zip(samples) {
            slot.1.push(s.value);
        }
    }
    acc
}

fn row(s: &Sample, quantity: &str, e: Estimate) -> ReportRow {
    ReportRow {
        quantity: quantity.to_string(),
        x: s.x,
        y: s.y,
        t: s.t,
        estimate: e.estimate,
        stderr: e.stderr,
        n: e.n,
    }
}

fn verdict(
    check: impl Into<String>,
    pass: bool,
    estimate: f64,
    stderr: f64,
    threshold: f64,
) -> Verdict {
    Verdict {
        check: check.into(),
        pass,
        estimate,
        stderr,
        threshold,
    }
}

/// Turns reduced diagnostics into report rows and verdicts.
fn assess(
    index: usize,
    d: &DiagnosticSpec,
    contributions: &[Contribution],
) -> Result<(Vec<ReportRow>, Vec<Verdict>), HarnessError> {
    let scalars: Vec<Vec<Sample>> = contributions
        .iter()
        .filter_map(|c| match c {
            Contribution::Scalars(s) => Some(s.clone()),
            Contribution::Grid(_) => None,
        })
        .collect();
    let reduced = reduce(&scalars);
    let mut rows: Vec<ReportRow> = reduced
        .iter()
        .map(|(s, m)| row(s, &s.quantity, Estimate::from_moments(m)))
        .collect();
    let mut verdicts = Vec::new();
    let tag = |name: &str| format!("d{index}.{name}");
    match d {
        DiagnosticSpec::Ordering { ordering, .. } => {
            for (s, m) in &reduced {
                let total = m.mean() * m.n as f64;
                verdicts.push(verdict(
                    tag(&format!("{ordering:?}_{}", s.quantity)),
                    total == 0.0,
                    total,
                    0.0,
                    0.0,
                ));
            }
        }
        DiagnosticSpec::Qvar {
            max_ratio,
            min_ratio,
            ..
        } => {
            let means: Vec<Estimate> = reduced
                .iter()
                .map(|(_, m)| Estimate::from_moments(m))
                .collect();
            let (first, last) = (means[0], means[means.len() - 1]);
            let ratio = last.estimate / first.estimate;
            let ratio_se = ratio
                * ((last.stderr / last.estimate).powi(2) + (first.stderr / first.estimate).powi(2))
                    .sqrt();
            let decreasing = means.windows(2).all(|w| w[1].estimate <= w[0].estimate);
            if let Some(r) = max_ratio {
                verdicts.push(verdict(
                    tag("qvar_ratio_max"),
                    ratio <= *r,
                    ratio,
                    ratio_se,
                    *r,
                ));
                verdicts.push(verdict(
                    tag("qvar_decreasing"),
                    decreasing,
                    ratio,
                    ratio_se,
                    1.0,
                ));
            }
            if let Some(r) = min_ratio {
                verdicts.push(verdict(
                    tag("qvar_ratio_min"),
                    ratio >= *r,
                    ratio,
                    ratio_se,
                    *r,
                ));
            }
            rows.push(ReportRow {
                quantity: "qvar_ratio".into(),
                x: None,
                y: None,
                t: None,
                estimate: ratio,
                stderr: ratio_se,
                n: first.n,
            });
        }
        DiagnosticSpec::Martingale { band, qv_sigma, .. } => {
            for (s, m) in &reduced {
                let e = Estimate::from_moments(m);
                let (x, y) = (s.x.unwrap_or(0.0), s.y.unwrap_or(0.0));
                if s.quantity.starts_with("residual") {
                    verdicts.push(verdict(
                        tag(&format!("{}@{x}", s.quantity)),
                        e.within(0.0, *band),
                        e.estimate,
                        e.stderr,
                        *band,
                    ));
                } else if s.quantity.starts_with("cross") {
                    verdicts.push(verdict(
                        tag(&format!("{}@{x},{y}", s.quantity)),
                        e.within(0.0, *band),
                        e.estimate,
                        e.stderr,
                        *band,
                    ));
                } else if s.quantity.starts_with("qv") {
                    verdicts.push(verdict(
                        tag(&format!("{}@{x}", s.quantity)),
                        e.estimate > qv_sigma * e.stderr,
                        e.estimate,
                        e.stderr,
                        *qv_sigma,
                    ));
                }
            }
        }
        DiagnosticSpec::Moment {
            alpha,
            delta,
            p,
            c,
            r_max,
            ..
        } => {
            let grids: Vec<GridFunction> = contributions
                .iter()
                .filter_map(|c| match c {
                    Contribution::Grid(g) => Some(g.clone()),
                    Contribution::Scalars(_) => None,
                })
                .collect();
            let params = NormParams::new(*alpha, *delta, *p, *r_max).map_err(sim_err)?;
            let report = moment_bound_check(&grids, &params, *c).map_err(sim_err)?;
            for v in report.verdicts {
                rows.push(ReportRow {
                    quantity: v.check.clone(),
                    x: None,
                    y: None,
                    t: Some(0.0),
                    estimate: v.estimate,
                    stderr: 0.0,
                    n: grids.len() as u64,
                });
                verdicts.push(Verdict {
                    check: tag(&v.check),
                    ..v
                });
            }
        }
        DiagnosticSpec::Occupation {
            rho,
            band,
            max_outside,
            ..
        } => {
            for (quantity, target) in [("occupation", *rho), ("nn_product", rho * rho)] {
                let sel: Vec<&(Sample, Moments)> = reduced
                    .iter()
                    .filter(|(s, _)| s.quantity == quantity)
                    .collect();
                let outside = sel
                    .iter()
                    .filter(|(_, m)| !Estimate::from_moments(m).within(target, *band))
                    .count();
                let avg = format!("{quantity}_avg");
                let (_, pooled) = reduced
                    .iter()
                    .find(|(s, _)| s.quantity == avg)
                    .expect("average sampled");
                let e = Estimate::from_moments(pooled);
                verdicts.push(verdict(
                    tag(&format!("{quantity}_pooled")),
                    e.within(target, *band),
                    e.estimate,
                    e.stderr,
                    *band,
                ));
                let frac = outside as f64 / sel.len().max(1) as f64;
                verdicts.push(verdict(
                    tag(&format!("{quantity}_sites_outside")),
                    frac <= *max_outside,
                    frac,
                    0.0,
                    *max_outside,
                ));
            }
        }
        DiagnosticSpec::HeightStats {
            variance_target,
            variance_rel_tol,
            band,
            ..
        } => {
            let (s, m) = &reduced[0];
            let var = m.variance();
            rows.push(ReportRow {
                quantity: "height_variance".into(),
                x: s.x,
                y: None,
                t: s.t,
                estimate: var,
                stderr: m.variance_stderr(),
                n: m.n,
            });
            rows.push(ReportRow {
                quantity: "height_skewness".into(),
                x: s.x,
                y: None,
                t: s.t,
                estimate: m.skewness(),
                stderr: m.skewness_stderr(),
                n: m.n,
            });
            verdicts.push(verdict(
                tag("skewness"),
                m.skewness().abs() <= band * m.skewness_stderr(),
                m.skewness(),
                m.skewness_stderr(),
                *band,
            ));
            if let (Some(target), Some(tol)) = (variance_target, variance_rel_tol) {
                let rel = (var - target).abs() / target;
                verdicts.push(verdict(
                    tag("variance"),
                    rel <= *tol,
                    var,
                    m.variance_stderr(),
                    *target,
                ));
            }
        }
    }
    Ok((rows, verdicts))
}

/// Outcome of one ensemble member.
struct TrajOutcome {
    record: Option<Trajectory>,
    contributions: Vec<Contribution>,
    events: u64,
}

fn run_one(
    cfg: &ExperimentConfig,
    model: &RateModel,
    cache: &InitialCache,
    schedule: &[f64],
    index: usize,
) -> Result<TrajOutcome, HarnessError> {
    let seed = derive_seed(cfg.seed, index as u64);
    let initials = initial_heights(cfg, cache, seed)?;
    let options = EvolveOptions {
        boundary: cfg.lattice.boundary,
        clocks: cfg.clocks,
    };
    let traj = match cfg.coupling {
        Coupling::Coupled => {
            evolve_coupled(&initials, model, cfg.time.horizon, schedule, seed, options)
        }
        Coupling::Independent => {
            let seeds: Vec<u64> = (0..initials.len())
                .map(|r| derive_aux_seed(seed, 1000 + r as u64))
                .collect();
            evolve_uncoupled(
                &initials,
                model,
                cfg.time.horizon,
                schedule,
                &seeds,
                options,
            )
        }
    }
    .map_err(sim_err)?;
    let contributions = cfg
        .diagnostics
        .iter()
        .map(|d| contribute(cfg, d, &traj))
        .collect::<Result<Vec<_>, _>>()?;
    let events = traj.snapshots.last().map_or(0, |s| s.event_count);
    Ok(TrajOutcome {
        record: (index < cfg.record).then_some(traj),
        contributions,
        events,
    })
}

/// Everything a run produces, before it is written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trajectory_seeds: Vec<u64>,
    pub trajectories: Vec<Trajectory>,
    pub rows: Vec<ReportRow>,
    pub verdicts: Vec<Verdict>,
    pub total_events: u64,
}

impl RunOutput {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Simulates and assesses the ensemble in memory. `threads = 0` uses the
/// global rayon pool.
pub fn execute(cfg: &ExperimentConfig, threads: usize) -> Result<RunOutput, HarnessError> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let cache = build_fixed(cfg)?;
    let schedule = cfg.schedule();
    let work = || -> Result<Vec<TrajOutcome>, HarnessError> {
        (0..cfg.ensemble)
            .into_par_iter()
            .map(|i| run_one(cfg, &model, &cache, &schedule, i))
            .collect()
    };
    let outcomes = if threads == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(sim_err)?
            .install(work)?
    };
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for (di, d) in cfg.diagnostics.iter().enumerate() {
        let contributions: Vec<Contribution> = outcomes
            .iter()
            .map(|o| o.contributions[di].clone())
            .collect();
        let (r, v) = assess(di, d, &contributions)?;
        rows.extend(r);
        verdicts.extend(v);
    }
    Ok(RunOutput {
        trajectory_seeds: (0..cfg.ensemble as u64)
            .map(|i| derive_seed(cfg.seed, i))
            .collect(),
        total_events: outcomes.iter().map(|o| o.events).sum(),
        trajectories: outcomes.into_iter().filter_map(|o| o.record).collect(),
        rows,
        verdicts,
    })
}

#[derive(Serialize)]
struct TrajectoryHeader<'a> {
    seed: u64,
    model: &'a str,
    epsilon: f64,
    #[serde(rename = "J")]
    spin_max: u32,
    boundary: BoundaryMode,
    replicas: usize,
}

#[derive(Serialize)]
struct ReplicaLine<'a> {
    replica: usize,
    #[serde(flatten)]
    snapshot: &'a HeightSnapshot,
}

/// JSONL: a header record per trajectory followed by one line per snapshot
/// and replica.
pub fn trajectories_jsonl(cfg: &ExperimentConfig, trajs: &[Trajectory]) -> String {
    let mut out = String::new();
    for t in trajs {
        let header = TrajectoryHeader {
            seed: t.seed,
            model: cfg.model.name(),
            epsilon: cfg.model.epsilon(),
            spin_max: t.model.spin_max,
            boundary: t.model.boundary,
            replicas: t.replica_count(),
        };
        out.push_str(&serde_json::to_string(&header).expect("header serializes"));
        out.push('\n');
        for s in &t.snapshots {
            for (r, h) in s.heights.iter().enumerate() {
                let snap = HeightSnapshot::from_height(s.time, h);
                let line = ReplicaLine {
                    replica: r,
                    snapshot: &snap,
                };
                out.push_str(&serde_json::to_string(&line).expect("snapshot serializes"));
                out.push('\n');
            }
        }
    }
    out
}

/// CSV with columns `quantity,x,y,t,estimate,stderr,n`.
pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

/// Reproducibility record of a run. Wall-clock timing lives in
/// `timing.json`, outside the byte-identical set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub name: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub seed_scheme: String,
    pub trajectory_seeds: Vec<u64>,
    pub software_version: String,
    /// SHA-256 of each output file.
    pub outputs: BTreeMap<String, String>,
    pub pass: bool,
}

pub const TRAJECTORY_FILE: &str = "trajectories.jsonl";
pub const REPORT_FILE: &str = "report.csv";
pub const VERDICT_FILE: &str = "verdict.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMING_FILE: &str = "timing.json";

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<String, HarnessError> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(io_err(&path))?;
    f.write_all(bytes).map_err(io_err(&path))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// Runs `cfg` and writes trajectories, report, verdicts, manifest and timing
/// into `out_dir`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    threads: usize,
) -> Result<RunManifest, HarnessError> {
    let started = Instant::now();
    let output = execute(cfg, threads)?;
    let elapsed = started.elapsed().as_secs_f64();
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut outputs = BTreeMap::new();
    outputs.insert(
        TRAJECTORY_FILE.to_string(),
        write_file(
            out_dir,
            TRAJECTORY_FILE,
            trajectories_jsonl(cfg, &output.trajectories).as_bytes(),
        )?,
    );
    outputs.insert(
        REPORT_FILE.to_string(),
        write_file(out_dir, REPORT_FILE, report_csv(&output.rows).as_bytes())?,
    );
    let verdict_json = serde_json::to_string_pretty(&output.verdicts).expect("verdicts serialize");
    outputs.insert(
        VERDICT_FILE.to_string(),
        write_file(out_dir, VERDICT_FILE, verdict_json.as_bytes())?,
    );
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        master_seed: cfg.seed,
        seed_scheme: "splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15)".into(),
        trajectory_seeds: output.trajectory_seeds.clone(),
        software_version: env!("CARGO_PKG_VERSION").into(),
        outputs,
        pass: output.pass(),
    };
    write_file(
        out_dir,
        MANIFEST_FILE,
        serde_json::to_string_pretty(&manifest)
            .expect("manifest serializes")
            .as_bytes(),
    )?;
    let timing = serde_json::json!({
        "wall_seconds": elapsed,
        "trajectories": cfg.ensemble,
        "events": output.total_events,
        "events_per_second": output.total_events as f64 / elapsed.max(1e-9),
    });
    write_file(
        out_dir,
        TIMING_FILE,
        serde_json::to_string_pretty(&timing)
            .expect("timing serializes")
            .as_bytes(),
    )?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<RunManifest, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub identical: bool,
    /// Output files whose digest differs from the manifest.
    pub mismatched: Vec<String>,
}

/// Re-runs the manifest's config into `out_dir` and compares output digests.
pub fn replay(
    manifest_path: &Path,
    out_dir: &Path,
    threads: usize,
) -> Result<ReplayReport, HarnessError> {
    let old = load_manifest(manifest_path)?;
    if old.config.hash() != old.config_hash {
        return Err(invalid(
            "manifest.config",
            "config does not match its recorded hash",
        ));
    }
    let new = run_experiment(&old.config, out_dir, threads)?;
    let mismatched: Vec<String> = old
        .outputs
        .iter()
        .filter(|(k, v)| new.outputs.get(*k) != Some(*v))
        .map(|(k, _)| k.clone())
        .collect();
    Ok(ReplayReport {
        identical: mismatched.is_empty(),
        mismatched,
    })
}

fn base(name: &str, model: ModelSpec, half_width: i64, obs: i64, horizon: f64) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: name.into(),
        seed: 20_240_601,
        ensemble: 40,
        record: 2,
        coupling: Coupling::Coupled,
        clocks: ClockScheme::PerBondQueue,
        model,
        lattice: LatticeSpec {
            half_width,
            boundary: BoundaryMode::Frozen,
            observation_half_width: obs,
        },
        time: TimeSpec {
            horizon,
            snapshot_every: 0.0,
            snapshot_times: Vec::new(),
        },
        initial: Vec::new(),
        drift_sign: DriftSign::Plus,
        diagnostics: Vec::new(),
    }
}

fn asep(epsilon: f64) -> ModelSpec {
    ModelSpec::Asep {
        epsilon,
        drift: Direction::Right,
    }
}

/// Named scenarios, one per coupled-data construction.
pub fn scenario_catalog() -> Vec<ExperimentConfig> {
    let tanh = ProfileSpec::Tanh { amplitude: 1.0 };
    let sine = ProfileSpec::SinDamped;
    let mut out = Vec::new();

    // Two deterministic data converging in the weighted Hölder space.
    let mut c = base("theorem-mr", asep(0.04), 64, 16, 10.0);
    c.time.snapshot_every = 0.1;
    c.initial = vec![
        InitialSpec::Approx {
            profile: tanh.clone(),
            delta: 0.5,
        },
        InitialSpec::Approx {
            profile: sine.clone(),
            delta: 0.5,
        },
    ];
    c.diagnostics = vec![DiagnosticSpec::Martingale {
        probes: vec![-8, 0, 8],
        dt_max: 0.1,
        band: 3.0,
        qv_sigma: 5.0,
    }];
    out.push(c);

    // Same-limit pair with its max/min envelopes.
    let mut c = base("lemma-lem1", asep(0.04), 96, 32, 12.0);
    c.time.snapshot_every = 1.0;
    c.initial = vec![
        InitialSpec::Approx {
            profile: tanh.clone(),
            delta: 0.5,
        },
        InitialSpec::Threshold {
            profile: tanh.clone(),
            delta: 0.5,
        },
        InitialSpec::Max { of: [0, 1] },
        InitialSpec::Min { of: [0, 1] },
    ];
    c.diagnostics = vec![DiagnosticSpec::Ordering {
        ordering: OrderingKind::M,
        pairs: vec![[3, 0], [3, 1], [0, 2], [1, 2], [3, 2]],
    }];
    out.push(c);

    // Nondecreasing difference on a ring: Q_N decay and brackets.
    let mut c = base("lemma-lem2", asep(0.04), 200, 60, 0.5 / (0.04 * 0.04));
    c.lattice.boundary = BoundaryMode::Periodic;
    c.clocks = ClockScheme::Superposed;
    c.initial = vec![
        InitialSpec::RampLower {
            increase: 29.7,
            a: -1.0,
            b: 2.0,
        },
        InitialSpec::RampUpper {
            increase: 29.7,
            a: -1.0,
            b: 2.0,
        },
    ];
    c.diagnostics = vec![
        DiagnosticSpec::Ordering {
            ordering: OrderingKind::MonotoneDifference,
            pairs: vec![[0, 1]],
        },
        DiagnosticSpec::Qvar {
            pair: [0, 1],
            t: 0.5,
            a: 0.0,
            b: 1.0,
            levels: vec![3, 4, 5, 6, 7],
            max_ratio: Some(0.5),
            min_ratio: None,
        },
    ];
    out.push(c);

    // Dominating profile H³ above two data.
    let mut c = base("prop-prop", asep(0.04), 64, 16, 10.0);
    c.time.snapshot_every = 1.0;
    c.initial = vec![
        InitialSpec::Approx {
            profile: tanh.clone(),
            delta: 0.5,
        },
        InitialSpec::Approx {
            profile: sine.clone(),
            delta: 0.5,
        },
        InitialSpec::Dominating {
            f: tanh.clone(),
            g: sine.clone(),
            delta: 0.5,
        },
    ];
    c.diagnostics = vec![DiagnosticSpec::Ordering {
        ordering: OrderingKind::MonotoneDifference,
        pairs: vec![[0, 2], [1, 2]],
    }];
    out.push(c);

    // Bernoulli random data and the moment envelopes.
    let mut c = base("theorem-mr2", asep(0.01), 1200, 1100, 1.0);
    c.ensemble = 120;
    c.initial = vec![
        InitialSpec::Bernoulli { rho: 0.5 },
        InitialSpec::OrderedLower { rho: 0.5 },
        InitialSpec::OrderedUpper { rho: 0.5 },
    ];
    c.diagnostics = vec![
        DiagnosticSpec::Moment {
            replica: 0,
            alpha: 0.5,
            delta: 0.5,
            p: 3.0,
            c: 2.0,
            extent: 10.0,
            r_max: 6,
        },
        DiagnosticSpec::Ordering {
            ordering: OrderingKind::A,
            pairs: vec![[1, 2]],
        },
    ];
    out.push(c);

    // Periodic Bernoulli(½): occupation law stays product.
    let mut c = base("stationarity", asep(0.04), 64, 64, 100.0);
    c.lattice.boundary = BoundaryMode::Periodic;
    c.clocks = ClockScheme::Superposed;
    c.ensemble = 60;
    c.initial = vec![InitialSpec::Bernoulli { rho: 0.5 }];
    c.diagnostics = vec![DiagnosticSpec::Occupation {
        t: 100.0,
        rho: 0.5,
        band: 3.0,
        max_outside: 0.05,
    }];
    out.push(c);

    // ASEP(q, J = 2) with ordered constant data.
    let mut c = base(
        "asep-qj",
        ModelSpec::AsepQj {
            q: 0.95,
            spin_max: 2,
            epsilon: 0.04,
        },
        48,
        16,
        5.0,
    );
    c.time.snapshot_every = 0.5;
    c.initial = vec![
        InitialSpec::Constant { occupancy: 0 },
        InitialSpec::Constant { occupancy: 1 },
        InitialSpec::Constant { occupancy: 2 },
    ];
    c.diagnostics = vec![DiagnosticSpec::Ordering {
        ordering: OrderingKind::A,
        pairs: vec![[0, 1], [1, 2]],
    }];
    out.push(c);

    // Symmetric case from flat data on a ring.
    let eps = 0.04;
    let mut c = base(
        "ssep-ew",
        ModelSpec::Ssep { epsilon: eps },
        50,
        50,
        0.25 / (eps * eps),
    );
    c.lattice.boundary = BoundaryMode::Periodic;
    c.clocks = ClockScheme::Superposed;
    c.drift_sign = DriftSign::None;
    c.ensemble = 100;
    c.initial = vec![InitialSpec::Flat];
    c.diagnostics = vec![DiagnosticSpec::HeightStats {
        t: 0.25,
        x: 0.0,
        variance_target: None,
        variance_rel_tol: None,
        band: 3.0,
    }];
    out.push(c);

    out
}

pub fn scenario(name: &str) -> Result<ExperimentConfig, HarnessError> {
    scenario_catalog()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| HarnessError::UnknownScenario(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_validates() {
        let cat = scenario_catalog();
        assert!(cat.len() >= 8);
        for c in &cat {
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", c.name));
            let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
            assert_eq!(&back, c);
        }
        assert!(scenario("nope").is_err());
    }

    #[test]
    fn light_cone_rule_enforced() {
        let mut c = scenario("theorem-mr").unwrap();
        c.lattice.half_width = 40;
        assert!(matches!(
            c.validate(),
            Err(HarnessError::ConfigInvalid { .. })
        ));
        c.lattice.boundary = BoundaryMode::Periodic;
        c.validate().unwrap();
    }

    #[test]
    fn horizon_zero_run() {
        let mut c = base("zero", asep(0.04), 16, 4, 0.0);
        c.ensemble = 1;
        c.initial = vec![InitialSpec::Flat];
        let out = execute(&c, 1).unwrap();
        assert_eq!(out.total_events, 0);
        assert_eq!(out.trajectories[0].snapshots.len(), 1);
    }

    #[test]
    fn schedule_merges_times() {
        let mut c = base("s", asep(0.04), 64, 16, 10.0);
        c.time.snapshot_every = 2.5;
        c.time.snapshot_times = vec![1.0, 2.5];
        assert_eq!(c.schedule(), vec![0.0, 1.0, 2.5, 5.0, 7.5, 10.0]);
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let a = scenario("lemma-lem2").unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }
}
