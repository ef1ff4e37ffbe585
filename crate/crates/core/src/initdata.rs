//! Initial height data: smooth profiles, the viable approximation `𝒜^ε`,
//! Bernoulli and threshold-coupled random data, dominating profiles and
//! order envelopes.
//!
//! Macroscopic position `x` corresponds to lattice site `x / ε` and a
//! microscopic height `h` to the macroscopic value `√ε · h`. Everything here
//! is built for `J = 1`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{
    height_from_config, viable_max, viable_min, BoundaryMode, Configuration, HeightFunction,
    LatticeError, Window,
};
use crate::seeds::{derive_aux_seed, rng_from_seed};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InitError {
    #[error("profile {name} is not in C¹_δ (δ = {delta}): numerical norm {norm}")]
    NotInC1Delta { name: String, delta: f64, norm: f64 },
    #[error("parameter {name} = {value} out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("tabulated profile needs at least two strictly increasing abscissae")]
    BadTable,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Values above this count as an infinite norm.
pub const NORM_OVERFLOW: f64 = 1e6;

/// Largest |x| probed by the numerical norm and cutoff scans.
pub const GRID_REACH: f64 = 1_048_576.0;

/// Grid used to certify `C¹_δ` membership: uniform with step 1/64 on
/// [-64, 64], then geometric with ratio 1 + 1/64 out to [`GRID_REACH`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormGrid {
    pub core: f64,
    pub core_step: f64,
    pub tail_ratio: f64,
    pub reach: f64,
}

impl Default for NormGrid {
    fn default() -> Self {
        NormGrid {
            core: 64.0,
            core_step: 1.0 / 64.0,
            tail_ratio: 1.0 + 1.0 / 64.0,
            reach: GRID_REACH,
        }
    }
}

impl NormGrid {
    /// Nonnegative knots `0 = x_0 < x_1 < ... ≤ reach`.
    pub fn half_line(&self) -> Vec<f64> {
        let n = (self.core / self.core_step).round() as usize;
        let mut xs: Vec<f64> = (0..=n).map(|i| i as f64 * self.core_step).collect();
        let mut x = self.core;
        while x < self.reach {
            x = (x * self.tail_ratio).min(self.reach);
            xs.push(x);
        }
        xs
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A `C¹` profile with its derivative and growth exponent `δ`.
#[derive(Clone)]
pub struct SmoothProfile {
    name: String,
    f: RealFn,
    df: RealFn,
    delta: f64,
    norm_bound: f64,
    grid: NormGrid,
}

impl fmt::Debug for SmoothProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothProfile")
            .field("name", &self.name)
            .field("delta", &self.delta)
            .field("norm_bound", &self.norm_bound)
            .finish()
    }
}

fn simpson(df: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (df(a) + 4.0 * df(0.5 * (a + b)) + df(b))
}

/// `sup_x (1+|x|)^(-δ) (|f'(x)| + |∫_0^x |f'(u)| du|)` on the grid.
pub(crate) fn weighted_derivative_sup(df: &dyn Fn(f64) -> f64, delta: f64, grid: &NormGrid) -> f64 {
    let knots = grid.half_line();
    let abs_df = |u: f64| df(u).abs();
    let mut sup = df(0.0).abs();
    for sign in [1.0, -1.0] {
        let mut acc = 0.0;
        for w in knots.windows(2) {
            let (a, b) = (sign * w[0], sign * w[1]);
            acc += simpson(&abs_df, a.min(b), a.max(b));
            let v = (1.0 + w[1]).powf(-delta) * (df(b).abs() + acc);
            if !v.is_finite() {
                return f64::INFINITY;
            }
            sup = sup.max(v);
        }
    }
    sup
}

impl SmoothProfile {
    /// Wraps `f` and its derivative and certifies `C¹_δ` membership on the
    /// default [`NormGrid`]. The recorded bound is twice the grid value.
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        delta: f64,
    ) -> Result<Self, InitError> {
        Self::from_arcs(name.into(), Arc::new(f), Arc::new(df), delta)
    }

    fn from_arcs(name: String, f: RealFn, df: RealFn, delta: f64) -> Result<Self, InitError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(InitError::OutOfRange {
                name: "delta",
                value: delta,
                expected: "0 < delta < 1",
            });
        }
        let grid = NormGrid::default();
        let norm = f(0.0).abs() + weighted_derivative_sup(df.as_ref(), delta, &grid);
        if !norm.is_finite() || norm > NORM_OVERFLOW {
            return Err(InitError::NotInC1Delta { name, delta, norm });
        }
        Ok(SmoothProfile {
            name,
            f,
            df,
            delta,
            norm_bound: 2.0 * norm,
            grid,
        })
    }

    pub fn zero(delta: f64) -> Result<Self, InitError> {
        Self::new("zero", |_| 0.0, |_| 0.0, delta)
    }

    /// `amplitude · tanh(x)`.
    pub fn tanh(amplitude: f64, delta: f64) -> Result<Self, InitError> {
        Self::new(
            "tanh",
            move |x| amplitude * x.tanh(),
            move |x| amplitude / x.cosh().powi(2),
            delta,
        )
    }

    /// `sin(πx) · exp(-x²/4)`.
    pub fn sin_damped(delta: f64) -> Result<Self, InitError> {
        use std::f64::consts::PI;
        Self::new(
            "sin-damped",
            |x| (PI * x).sin() * (-x * x / 4.0).exp(),
            |x| (PI * (PI * x).cos() - 0.5 * x * (PI * x).sin()) * (-x * x / 4.0).exp(),
            delta,
        )
    }

    /// `Σ a_i tanh((x - c_i) / w_i)`.
    pub fn tanh_sum(terms: &[TanhTerm], delta: f64) -> Result<Self, InitError> {
        if terms.iter().any(|t| !(t.width > 0.0)) {
            return Err(InitError::OutOfRange {
                name: "width",
                value: 0.0,
                expected: "width > 0",
            });
        }
        let a = terms.to_vec();
        let b = terms.to_vec();
        Self::new(
            "tanh-sum",
            move |x| {
                a.iter()
                    .map(|t| t.amplitude * ((x - t.center) / t.width).tanh())
                    .sum()
            },
            move |x| {
                b.iter()
                    .map(|t| t.amplitude / t.width / ((x - t.center) / t.width).cosh().powi(2))
                    .sum()
            },
            delta,
        )
    }

    /// Linear interpolation of samples, constant beyond the end points.
    pub fn tabulated(xs: Vec<f64>, ys: Vec<f64>, delta: f64) -> Result<Self, InitError> {
        if xs.len() < 2 || xs.len() != ys.len() || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(InitError::BadTable);
        }
        let table = Arc::new((xs, ys));
        let t1 = Arc::clone(&table);
        let locate = |xs: &[f64], x: f64| -> Option<usize> {
            if x < xs[0] || x >= xs[xs.len() - 1] {
                None
            } else {
                Some(xs.partition_point(|&v| v <= x) - 1)
            }
        };
        Self::new(
            "tabulated",
            move |x| {
                let (xs, ys) = (&t1.0, &t1.1);
                match locate(xs, x) {
                    Some(i) => ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i]),
                    None if x < xs[0] => ys[0],
                    None => ys[ys.len() - 1],
                }
            },
            move |x| {
                let (xs, ys) = (&table.0, &table.1);
                match locate(xs, x) {
                    Some(i) => (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]),
                    None => 0.0,
                }
            },
            delta,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Twice the grid value of `|f(0)| + sup (1+|x|)^(-δ)(|f'| + ∫|f'|)`.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn grid(&self) -> NormGrid {
        self.grid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TanhTerm {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

/// Named profile presets for configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileSpec {
    Zero,
    Tanh {
        #[serde(default = "one")]
        amplitude: f64,
    },
    SinDamped,
    TanhSum {
        terms: Vec<TanhTerm>,
    },
    Tabulated {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl ProfileSpec {
    pub fn build(&self, delta: f64) -> Result<SmoothProfile, InitError> {
        match self {
            ProfileSpec::Zero => SmoothProfile::zero(delta),
            ProfileSpec::Tanh { amplitude } => SmoothProfile::tanh(*amplitude, delta),
            ProfileSpec::SinDamped => SmoothProfile::sin_damped(delta),
            ProfileSpec::TanhSum { terms } => SmoothProfile::tanh_sum(terms, delta),
            ProfileSpec::Tabulated { xs, ys } => {
                SmoothProfile::tabulated(xs.clone(), ys.clone(), delta)
            }
        }
    }
}

/// Parameters of `𝒜^ε`: the cutoff `M`, the interval length in lattice
/// sites and the resulting interval count on `[-M, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxParams {
    pub epsilon: f64,
    pub delta_prime: f64,
    /// Macroscopic cutoff `M`, a positive integer.
    pub cutoff: f64,
    /// Lattice sites per interval (even).
    pub interval_sites: i64,
    pub interval_count: i64,
}

fn check_epsilon(epsilon: f64) -> Result<(), InitError> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(InitError::OutOfRange {
            name: "epsilon",
            value: epsilon,
            expected: "0 < epsilon <= 1",
        })
    }
}

impl ApproxParams {
    /// `M` is the smallest integer `≥ 1` with
    /// `(1+|x|)^(-δ') (|f(x)| + |f'(x)|) < 2√ε` for all `|x| > M` on the grid,
    /// with `δ' = (1 + δ) / 2`.
    pub fn for_profile(f: &SmoothProfile, epsilon: f64) -> Result<Self, InitError> {
        Self::with_delta_prime(f, epsilon, 0.5 * (1.0 + f.delta()))
    }

    pub fn with_delta_prime(
        f: &SmoothProfile,
        epsilon: f64,
        delta_prime: f64,
    ) -> Result<Self, InitError> {
        check_epsilon(epsilon)?;
        if !(delta_prime > f.delta() && delta_prime < 1.0) {
            return Err(InitError::OutOfRange {
                name: "delta_prime",
                value: delta_prime,
                expected: "delta < delta_prime < 1",
            });
        }
        let bound = 2.0 * epsilon.sqrt();
        let mut last_bad = 0.0f64;
        for x in f.grid().half_line() {
            for s in [x, -x] {
                let v = (1.0 + x).powf(-delta_prime) * (f.eval(s).abs() + f.derivative(s).abs());
                if !(v < bound) {
                    last_bad = x;
                }
            }
        }
        if last_bad >= f.grid().reach {
            return Err(InitError::NotInC1Delta {
                name: f.name().to_string(),
                delta: delta_prime,
                norm: f64::INFINITY,
            });
        }
        Ok(Self::from_cutoff(
            epsilon,
            delta_prime,
            last_bad.ceil().max(1.0),
        ))
    }

    fn from_cutoff(epsilon: f64, delta_prime: f64, cutoff: f64) -> Self {
        let interval_sites = (2.0 * (0.5 * epsilon.powf(-0.75)).round()).max(2.0) as i64;
        let half = cutoff_sites(epsilon, cutoff);
        let interval_count = (2 * half + interval_sites - 1) / interval_sites;
        ApproxParams {
            epsilon,
            delta_prime,
            cutoff,
            interval_sites,
            interval_count,
        }
    }

    /// Common parameters for a pair: the larger cutoff.
    pub fn common(a: &ApproxParams, b: &ApproxParams) -> ApproxParams {
        Self::from_cutoff(
            a.epsilon,
            a.delta_prime.max(b.delta_prime),
            a.cutoff.max(b.cutoff),
        )
    }

    /// `M / ε` rounded up to an even site.
    pub fn cutoff_sites(&self) -> i64 {
        cutoff_sites(self.epsilon, self.cutoff)
    }
}

fn cutoff_sites(epsilon: f64, cutoff: f64) -> i64 {
    let s = (cutoff / epsilon).ceil() as i64;
    s + s.rem_euclid(2)
}

/// A microscopic `J = 1` height profile together with its scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxHeight {
    pub epsilon: f64,
    pub height: HeightFunction,
}

impl ApproxHeight {
    /// `√ε · h(x / ε)`, linearly interpolated between sites. Outside the
    /// window the end value is held.
    pub fn eval(&self, x: f64) -> f64 {
        let w = self.height.window();
        let u = (x / self.epsilon).clamp(w.lo as f64, w.hi as f64);
        let i = u.floor() as i64;
        let frac = u - i as f64;
        let a = self.height.at(i) as f64;
        let b = if i < w.hi {
            self.height.at(i + 1) as f64
        } else {
            a
        };
        self.epsilon.sqrt() * (a + frac * (b - a))
    }
}

/// Increment `h(n) - h(n - 1)` of `𝒜^ε f`.
fn approx_increment(n: i64, plan: &[(i64, i64)], start: i64, len: i64) -> i64 {
    let parity = if n.rem_euclid(2) == 0 { 1 } else { -1 };
    if n <= start || plan.is_empty() {
        return parity;
    }
    let k = ((n - start - 1) / len) as usize;
    if k >= plan.len() {
        return parity;
    }
    let first = start + k as i64 * len;
    let (steps, sign) = plan[k];
    // Sites first+1 ..= first+steps follow the slope.
    if n - first <= steps {
        sign
    } else {
        parity
    }
}

/// `(step count, sign)` per interval of `[-M, M]`.
fn follow_plan(f: &SmoothProfile, p: &ApproxParams) -> Vec<(i64, i64)> {
    let start = -p.cutoff_sites();
    let sqrt_eps = p.epsilon.sqrt();
    (0..p.interval_count)
        .map(|k| {
            let first = start + k * p.interval_sites;
            let len = (p.cutoff_sites() - first).min(p.interval_sites);
            let slope = f.derivative(first as f64 * p.epsilon);
            let steps = 2 * (0.5 * slope.abs() * len as f64 * sqrt_eps).round() as i64;
            (steps.min(len), if slope >= 0.0 { 1 } else { -1 })
        })
        .collect()
}

fn build_approx(
    f: &SmoothProfile,
    p: &ApproxParams,
    window: Window,
) -> Result<ApproxHeight, InitError> {
    let start = -p.cutoff_sites();
    let plan = follow_plan(f, p);
    let sqrt_eps = p.epsilon.sqrt();
    // Even anchor at the even site -M/ε keeps h(n) ≡ n (mod 2).
    let anchor = 2 * (f.eval(start as f64 * p.epsilon) / (2.0 * sqrt_eps)).round() as i64;
    let inc = |n: i64| approx_increment(n, &plan, start, p.interval_sites);
    let mut h_lo = anchor;
    if window.lo > start {
        h_lo += ((start + 1)..=window.lo).map(inc).sum::<i64>();
    } else {
        h_lo -= ((window.lo + 1)..=start).map(inc).sum::<i64>();
    }
    let mut values = Vec::with_capacity(window.len());
    values.push(h_lo);
    for n in (window.lo + 1)..=window.hi {
        let last = *values.last().expect("nonempty");
        values.push(last + inc(n));
    }
    let height = HeightFunction::new(window, 1, values)?;
    Ok(ApproxHeight {
        epsilon: p.epsilon,
        height,
    })
}

/// `𝒜^ε f` on the height window `window` (lattice sites).
///
/// Inside `[-M, M]`, each interval of `ℓ ≈ ε^(-3/4)` sites starts with
/// `2·round(|f'(x_I)| ℓ √ε / 2)` steps in the direction of `f'(x_I)`; every
/// other increment is `(-1)^n`. The profile is anchored at
/// `h(-M/ε) ≈ f(-M)/√ε`.
pub fn approx_viable(
    f: &SmoothProfile,
    epsilon: f64,
    window: Window,
) -> Result<ApproxHeight, InitError> {
    let p = ApproxParams::for_profile(f, epsilon)?;
    build_approx(f, &p, window)
}

/// `𝒜^ε` with explicit parameters.
pub fn approx_viable_with(
    f: &SmoothProfile,
    params: &ApproxParams,
    window: Window,
) -> Result<ApproxHeight, InitError> {
    check_epsilon(params.epsilon)?;
    build_approx(f, params, window)
}

/// `(𝒜^ε f, 𝒜^ε g)` on a common cutoff and interval grid. If `g' ≥ f'`
/// then the difference of the outputs is nondecreasing.
pub fn approx_viable_pair(
    f: &SmoothProfile,
    g: &SmoothProfile,
    epsilon: f64,
    window: Window,
) -> Result<(ApproxHeight, ApproxHeight), InitError> {
    let p = ApproxParams::common(
        &ApproxParams::for_profile(f, epsilon)?,
        &ApproxParams::for_profile(g, epsilon)?,
    );
    Ok((build_approx(f, &p, window)?, build_approx(g, &p, window)?))
}

/// `𝒜^ε` of several profiles on one cutoff and interval grid (the largest
/// cutoff of the group), so ordered derivatives give ordered increments.
pub fn approx_viable_group(
    profiles: &[&SmoothProfile],
    epsilon: f64,
    window: Window,
) -> Result<Vec<ApproxHeight>, InitError> {
    let mut common: Option<ApproxParams> = None;
    for f in profiles {
        let p = ApproxParams::for_profile(f, epsilon)?;
        common = Some(match common {
            Some(c) => ApproxParams::common(&c, &p),
            None => p,
        });
    }
    let Some(p) = common else {
        return Ok(Vec::new());
    };
    profiles
        .iter()
        .map(|f| build_approx(f, &p, window))
        .collect()
}

fn check_density(rho: f64) -> Result<(), InitError> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(InitError::OutOfRange {
            name: "rho",
            value: rho,
            expected: "0 <= rho <= 1",
        })
    }
}

/// i.i.d. Bernoulli(ρ) occupancies on `window`.
pub fn bernoulli_config(
    rho: f64,
    window: Window,
    boundary: BoundaryMode,
    seed: u64,
) -> Result<Configuration, InitError> {
    check_density(rho)?;
    let mut rng = rng_from_seed(seed);
    let occ = (0..window.len())
        .map(|_| u8::from(rng.random::<f64>() < rho))
        .collect();
    Ok(Configuration::new(window, 1, occ, boundary)?)
}

/// Height of i.i.d. Bernoulli(ρ) occupancies on `window`, with `h(0) = 0`.
pub fn bernoulli_height(rho: f64, window: Window, seed: u64) -> Result<HeightFunction, InitError> {
    Ok(height_from_config(
        &bernoulli_config(rho, window, BoundaryMode::Frozen, seed)?,
        0,
    ))
}

/// `η¹ = min(η, η')` and `η² = max(η, η')` for independent Bernoulli(ρ)
/// fields, so `η¹ ≤ η²` pointwise.
pub fn ordered_bernoulli_pair(
    rho: f64,
    window: Window,
    boundary: BoundaryMode,
    seed: u64,
) -> Result<(Configuration, Configuration), InitError> {
    check_density(rho)?;
    let mut rng = rng_from_seed(seed);
    let mut lo = Vec::with_capacity(window.len());
    let mut hi = Vec::with_capacity(window.len());
    for _ in 0..window.len() {
        let a = u8::from(rng.random::<f64>() < rho);
        let b = u8::from(rng.random::<f64>() < rho);
        lo.push(a.min(b));
        hi.push(a.max(b));
    }
    Ok((
        Configuration::new(window, 1, lo, boundary)?,
        Configuration::new(window, 1, hi, boundary)?,
    ))
}

/// Pointwise ordered heights: min and max of two Bernoulli(ρ) height
/// profiles anchored at `h(0) = 0`.
pub fn ordered_height_pair(
    rho: f64,
    window: Window,
    seed: u64,
) -> Result<(HeightFunction, HeightFunction), InitError> {
    let a = bernoulli_config(rho, window, BoundaryMode::Frozen, seed)?;
    let b = bernoulli_config(rho, window, BoundaryMode::Frozen, derive_aux_seed(seed, 1))?;
    let h1 = height_from_config(&a, 0);
    let h2 = height_from_config(&b, 0);
    Ok((viable_min(&h1, &h2)?, viable_max(&h1, &h2)?))
}

/// Deterministic low-discrepancy occupancies `η(n) = 1{frac(n φ) < ρ(n)}`
/// with `φ` the golden ratio. Densities ordered pointwise give occupancies
/// ordered pointwise.
pub fn threshold_config(
    rho: impl Fn(i64) -> f64,
    window: Window,
    boundary: BoundaryMode,
) -> Result<Configuration, InitError> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let occ = window
        .sites()
        .map(|n| {
            let u = (n as f64 * PHI).rem_euclid(1.0);
            u8::from(u < rho(n))
        })
        .collect();
    Ok(Configuration::new(window, 1, occ, boundary)?)
}

/// Pair with nondecreasing height difference: densities `½ ∓ d/2` on the
/// macroscopic region `[a, b]` and `½` elsewhere, with `d` chosen so the
/// rescaled difference rises by `increase` across the region.
pub fn ramp_pair(
    epsilon: f64,
    increase: f64,
    region: (f64, f64),
    window: Window,
) -> Result<(HeightFunction, HeightFunction), InitError> {
    check_epsilon(epsilon)?;
    let (a, b) = region;
    if !(b > a) {
        return Err(InitError::OutOfRange {
            name: "region",
            value: b - a,
            expected: "b > a",
        });
    }
    // Micro rise 2d(b-a)/ε scaled by √ε equals `increase`.
    let d = increase * epsilon.sqrt() / (2.0 * (b - a));
    if !(0.0..=1.0).contains(&d) {
        return Err(InitError::OutOfRange {
            name: "increase",
            value: increase,
            expected: "density gap <= 1",
        });
    }
    let inside = move |n: i64| {
        let x = n as f64 * epsilon;
        x > a && x <= b
    };
    let lower = threshold_config(
        |n| if inside(n) { 0.5 - d / 2.0 } else { 0.5 },
        window,
        BoundaryMode::Frozen,
    )?;
    let upper = threshold_config(
        |n| if inside(n) { 0.5 + d / 2.0 } else { 0.5 },
        window,
        BoundaryMode::Frozen,
    )?;
    Ok((height_from_config(&lower, 0), height_from_config(&upper, 0)))
}

/// Cumulative integral of a derivative tabulated on a [`NormGrid`].
struct Cumulative {
    pos: Vec<f64>,
    pos_acc: Vec<f64>,
    neg_acc: Vec<f64>,
    df: RealFn,
}

impl Cumulative {
    fn new(df: RealFn, grid: &NormGrid) -> Self {
        let pos = grid.half_line();
        let mut pos_acc = vec![0.0];
        let mut neg_acc = vec![0.0];
        for w in pos.windows(2) {
            pos_acc.push(pos_acc.last().unwrap() + simpson(df.as_ref(), w[0], w[1]));
            neg_acc.push(neg_acc.last().unwrap() + simpson(df.as_ref(), -w[1], -w[0]));
        }
        Cumulative {
            pos,
            pos_acc,
            neg_acc,
            df,
        }
    }

    /// `∫_0^x df`.
    fn eval(&self, x: f64) -> f64 {
        let ax = x.abs();
        let i = self.pos.partition_point(|&v| v <= ax).saturating_sub(1);
        let knot = self.pos[i];
        if x >= 0.0 {
            self.pos_acc[i] + self.refine(knot, x)
        } else {
            -(self.neg_acc[i] + self.refine(x, -knot))
        }
    }

    fn refine(&self, a: f64, b: f64) -> f64 {
        let pieces = (((b - a) * 1024.0).ceil() as usize).clamp(1, 1 << 16);
        let h = (b - a) / pieces as f64;
        (0..pieces)
            .map(|k| simpson(self.df.as_ref(), a + k as f64 * h, a + (k + 1) as f64 * h))
            .sum()
    }
}

/// `r(x) = ∫_0^x max(f'(u), g'(u)) du`.
pub fn dominating_profile(
    f: &SmoothProfile,
    g: &SmoothProfile,
) -> Result<SmoothProfile, InitError> {
    let (df, dg) = (Arc::clone(&f.df), Arc::clone(&g.df));
    let dr: RealFn = Arc::new(move |u| df(u).max(dg(u)));
    let delta = f.delta().max(g.delta());
    let grid = NormGrid {
        core_step: 1.0 / 1024.0,
        ..NormGrid::default()
    };
    let table = Arc::new(Cumulative::new(Arc::clone(&dr), &grid));
    SmoothProfile::from_arcs(
        format!("max({}, {})", f.name(), g.name()),
        Arc::new(move |x| table.eval(x)),
        dr,
        delta,
    )
}

/// `(upper, lower) = target ± φ_N` with
/// `φ_N(x) = 1/(2N) + (1 + s²)^(γ/2) - 1`, `s = (|x| - N)₊` and
/// `γ = (δ + δ') / 2`. The envelopes carry the growth exponent `δ'`.
pub fn envelope_pair(
    target: &SmoothProfile,
    n: u32,
) -> Result<(SmoothProfile, SmoothProfile), InitError> {
    if n == 0 {
        return Err(InitError::OutOfRange {
            name: "N",
            value: 0.0,
            expected: "N >= 1",
        });
    }
    let big_n = n as f64;
    let delta_prime = 0.5 * (1.0 + target.delta());
    let gamma = 0.5 * (target.delta() + delta_prime);
    let phi = move |x: f64| {
        let s = (x.abs() - big_n).max(0.0);
        0.5 / big_n + (1.0 + s * s).powf(0.5 * gamma) - 1.0
    };
    let dphi = move |x: f64| {
        let s = (x.abs() - big_n).max(0.0);
        x.signum() * gamma * s * (1.0 + s * s).powf(0.5 * gamma - 1.0)
    };
    let build = |sign: f64, label: &str| {
        let (f, df) = (Arc::clone(&target.f), Arc::clone(&target.df));
        SmoothProfile::from_arcs(
            format!("{label}({})", target.name()),
            Arc::new(move |x| f(x) + sign * phi(x)),
            Arc::new(move |x| df(x) + sign * dphi(x)),
            delta_prime,
        )
    };
    Ok((build(1.0, "upper")?, build(-1.0, "lower")?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_profile_oscillates_within_one_step() {
        let f = SmoothProfile::zero(0.5).unwrap();
        for eps in [0.25, 0.04, 1.0 / 1024.0] {
            let a = approx_viable(&f, eps, Window::new(-300, 300).unwrap()).unwrap();
            let sup = a.height.values().iter().map(|v| v.abs()).max().unwrap();
            assert!(sup <= 1);
            assert!(eps.sqrt() * sup as f64 <= eps.sqrt() + 1e-15);
            assert!(a.height.check().is_viable);
        }
    }

    #[test]
    fn cutoff_matches_definition() {
        let f = SmoothProfile::tanh(1.0, 0.5).unwrap();
        let p = ApproxParams::for_profile(&f, 1.0 / 256.0).unwrap();
        // (1+x)^(-3/4) tanh(x) < 1/8 needs x > 8^(4/3) - 1 = 15.
        assert_eq!(p.cutoff, 15.0);
        assert_eq!(p.interval_sites, 64);
        assert_eq!(p.cutoff_sites(), 15 * 256);
    }

    #[test]
    fn tanh_error_is_small() {
        let f = SmoothProfile::tanh(1.0, 0.5).unwrap();
        let eps = 1.0 / 4096.0;
        let w = Window::new((-2.5 / eps) as i64, (2.5 / eps) as i64).unwrap();
        let a = approx_viable(&f, eps, w).unwrap();
        let err = (-200..=200)
            .map(|i| i as f64 / 100.0)
            .map(|x| (a.eval(x) - f.eval(x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.3, "sup error {err}");
    }

    #[test]
    fn pair_keeps_difference_monotone() {
        let f = SmoothProfile::sin_damped(0.5).unwrap();
        let g = dominating_profile(&f, &SmoothProfile::tanh(2.0, 0.5).unwrap()).unwrap();
        let w = Window::new(-2000, 2000).unwrap();
        let (a, b) = approx_viable_pair(&f, &g, 1.0 / 64.0, w).unwrap();
        assert_eq!(a.height.difference_nondecreasing(&b.height), Some(true));
    }

    #[test]
    fn bernoulli_degenerate_densities() {
        let w = Window::new(1, 6).unwrap();
        let h = bernoulli_height(1.0, w, 3).unwrap();
        assert_eq!(h.values(), &[0, 1, 2, 3, 4, 5, 6]);
        let h = bernoulli_height(0.0, w, 3).unwrap();
        assert_eq!(h.values(), &[0, -1, -2, -3, -4, -5, -6]);
        assert!(bernoulli_height(1.5, w, 3).is_err());
    }

    #[test]
    fn bernoulli_half_is_a_random_walk() {
        // E[h(n)²] = n.
        let w = Window::new(1, 400).unwrap();
        let n = 2000;
        let mean_sq = (0..n)
            .map(|s| bernoulli_height(0.5, w, s).unwrap().at(400).pow(2) as f64)
            .sum::<f64>()
            / n as f64;
        // SE of h² is about √2·400/√2000 ≈ 12.6.
        assert!((mean_sq - 400.0).abs() < 40.0, "{mean_sq}");
    }

    #[test]
    fn ordered_pairs_are_ordered() {
        let w = Window::new(-50, 50).unwrap();
        for seed in 0..20 {
            let (a, b) = ordered_bernoulli_pair(0.5, w, BoundaryMode::Frozen, seed).unwrap();
            assert_eq!(a.dominated_by(&b), Some(true));
            let (h1, h2) = ordered_height_pair(0.5, w, seed).unwrap();
            assert_eq!(h1.dominated_by(&h2), Some(true));
        }
    }

    #[test]
    fn ramp_pair_rises_by_increase() {
        let eps = 0.01;
        let w = Window::new(-100, 200).unwrap();
        let (lo, hi) = ramp_pair(eps, 4.0, (0.0, 1.0), w).unwrap();
        assert_eq!(lo.difference_nondecreasing(&hi), Some(true));
        let rise = eps.sqrt() * ((hi.at(100) - lo.at(100)) - (hi.at(0) - lo.at(0))) as f64;
        assert!((rise - 4.0).abs() < 0.5, "{rise}");
    }

    #[test]
    fn dominating_profile_examples() {
        let s = SmoothProfile::new("square", |x| x * x, |x| 2.0 * x, 0.9);
        assert!(matches!(s, Err(InitError::NotInC1Delta { .. })));
        let f = SmoothProfile::tanh(1.0, 0.5).unwrap();
        let r = dominating_profile(&f, &f).unwrap();
        for x in [-3.0, -0.5, 0.0, 1.0, 4.0] {
            assert_relative_eq!(r.eval(x), f.eval(x), epsilon = 1e-8);
        }
        let g = SmoothProfile::tanh(2.0, 0.5).unwrap();
        let r = dominating_profile(&f, &g).unwrap();
        for x in [-3.0, -0.5, 0.0, 1.0, 4.0] {
            assert_relative_eq!(r.eval(x), g.eval(x), epsilon = 1e-8);
        }
    }

    #[test]
    fn dominating_profile_against_quadrature() {
        // f = sin(πx)e^{-x²/4}, g = -f: r' = |f'|.
        let f = SmoothProfile::sin_damped(0.5).unwrap();
        let f2 = f.clone();
        let g = SmoothProfile::new(
            "neg",
            move |x| -f2.eval(x),
            {
                let f3 = f.clone();
                move |x| -f3.derivative(x)
            },
            0.5,
        )
        .unwrap();
        let r = dominating_profile(&f, &g).unwrap();
        let x = 1.7;
        let n = 200_000;
        let h = x / n as f64;
        let oracle: f64 = (0..n)
            .map(|k| f.derivative((k as f64 + 0.5) * h).abs() * h)
            .sum();
        assert_relative_eq!(r.eval(x), oracle, epsilon = 1e-5);
        for u in [-2.0, -0.3, 0.4, 2.5] {
            assert_relative_eq!(r.derivative(u), f.derivative(u).abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn envelopes_bracket_target() {
        let t = SmoothProfile::zero(0.5).unwrap();
        let (up, lo) = envelope_pair(&t, 10).unwrap();
        for i in -1000..=1000 {
            let x = i as f64 / 100.0;
            assert!(up.eval(x) >= 0.0 && lo.eval(x) <= 0.0);
            assert!(up.eval(x) - lo.eval(x) <= 0.1 + 1e-12);
        }
        assert!(up.eval(1e5) > 100.0);
        let gamma = 0.5 * (0.5 + 0.75);
        assert_relative_eq!(up.eval(1e6) / 1e6f64.powf(gamma), 1.0, epsilon = 0.01);
        let f = SmoothProfile::sin_damped(0.5).unwrap();
        let (up, lo) = envelope_pair(&f, 3).unwrap();
        for i in -500..=500 {
            let x = i as f64 / 50.0;
            assert!(lo.eval(x) <= f.eval(x) && f.eval(x) <= up.eval(x));
        }
    }

    #[test]
    fn tabulated_profile_interpolates() {
        let p = SmoothProfile::tabulated(vec![-1.0, 0.0, 2.0], vec![1.0, 0.0, 1.0], 0.5).unwrap();
        assert_relative_eq!(p.eval(-0.5), 0.5);
        assert_relative_eq!(p.eval(1.0), 0.5);
        assert_relative_eq!(p.eval(5.0), 1.0);
        assert_relative_eq!(p.derivative(1.0), 0.5);
        assert!(SmoothProfile::tabulated(vec![0.0, 0.0], vec![1.0, 2.0], 0.5).is_err());
    }
}
