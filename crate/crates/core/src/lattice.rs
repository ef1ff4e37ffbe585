//! Lattice states: occupancy configurations, height functions and viability.
//!
//! A configuration lives on the closed site interval `[lo, hi]`. Its height
//! function lives on `[lo - 1, hi]`, with increments
//! `h(x) - h(x - 1) = 2 η(x) - J` for every `x` in `[lo, hi]`, so a height
//! profile with `n + 1` values encodes exactly `n` occupancies.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("height profile is not viable: bad increment between sites {site} and {}", site + 1)]
    NonViable { site: i64 },
    #[error("window mismatch: [{0}, {1}] vs [{2}, {3}]")]
    WindowMismatch(i64, i64, i64, i64),
    #[error("spin mismatch: J = {0} vs J = {1}")]
    SpinMismatch(u32, u32),
    #[error("profiles sit on different parity sublattices at site {site}")]
    ParityMismatch { site: i64 },
    #[error("occupancy {value} at site {site} outside 0..={spin_max}")]
    OccupancyOutOfRange {
        site: i64,
        value: u32,
        spin_max: u32,
    },
    #[error("invalid window [{lo}, {hi}]: {reason}")]
    InvalidWindow {
        lo: i64,
        hi: i64,
        reason: &'static str,
    },
    #[error("spin bound J must be positive")]
    ZeroSpin,
}

/// Closed integer interval of lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self, LatticeError> {
        if lo > hi {
            return Err(LatticeError::InvalidWindow {
                lo,
                hi,
                reason: "lo > hi",
            });
        }
        Ok(Window { lo, hi })
    }

    /// The symmetric window `[-half_width, half_width]`.
    pub fn symmetric(half_width: i64) -> Self {
        let half_width = half_width.abs();
        Window {
            lo: -half_width,
            hi: half_width,
        }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: i64) -> bool {
        site >= self.lo && site <= self.hi
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.lo..=self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Bond `(hi, lo)` closes the window into a ring.
    Periodic,
    /// No bond leaves the window; occupancies beyond it never matter.
    #[default]
    Frozen,
}

/// Occupancy field `η` on a finite window, values in `{0, ..., J}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    window: Window,
    spin_max: u32,
    occupancy: Vec<u8>,
    boundary: BoundaryMode,
}

impl Configuration {
    pub fn new(
        window: Window,
        spin_max: u32,
        occupancy: Vec<u8>,
        boundary: BoundaryMode,
    ) -> Result<Self, LatticeError> {
        if spin_max == 0 {
            return Err(LatticeError::ZeroSpin);
        }
        if spin_max > u8::MAX as u32 {
            return Err(LatticeError::OccupancyOutOfRange {
                site: window.lo,
                value: spin_max,
                spin_max: u8::MAX as u32,
            });
        }
        if occupancy.len() != window.len() {
            return Err(LatticeError::InvalidWindow {
                lo: window.lo,
                hi: window.hi,
                reason: "occupancy length differs from window length",
            });
        }
        // The height window [lo - 1, hi] must contain the origin.
        if window.lo > 1 || window.hi < 0 {
            return Err(LatticeError::InvalidWindow {
                lo: window.lo,
                hi: window.hi,
                reason: "height window [lo-1, hi] must contain site 0",
            });
        }
        if let Some((i, &v)) = occupancy
            .iter()
            .enumerate()
            .find(|(_, &v)| v as u32 > spin_max)
        {
            return Err(LatticeError::OccupancyOutOfRange {
                site: window.lo + i as i64,
                value: v as u32,
                spin_max,
            });
        }
        Ok(Configuration {
            window,
            spin_max,
            occupancy,
            boundary,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn spin_max(&self) -> u32 {
        self.spin_max
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occupancy
    }

    pub(crate) fn occupancy_mut(&mut self) -> &mut [u8] {
        &mut self.occupancy
    }

    pub fn at(&self, site: i64) -> u8 {
        self.occupancy[(site - self.window.lo) as usize]
    }

    pub fn particle_count(&self) -> u64 {
        self.occupancy.iter().map(|&v| v as u64).sum()
    }

    pub fn with_boundary(mut self, boundary: BoundaryMode) -> Self {
        self.boundary = boundary;
        self
    }

    /// Pointwise `self ≤ other`; `None` when the windows differ.
    pub fn dominated_by(&self, other: &Configuration) -> Option<bool> {
        if self.window != other.window {
            return None;
        }
        Some(
            self.occupancy
                .iter()
                .zip(&other.occupancy)
                .all(|(a, b)| a <= b),
        )
    }
}

/// Integer height profile on `[lo, hi]` with spin bound `J` and the tracked
/// current through bond `(0, 1)` (twice the signed particle flux).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightFunction {
    window: Window,
    spin_max: u32,
    values: Vec<i64>,
    origin_current: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ViabilityReport {
    pub is_viable: bool,
    /// Index of the left end of the first failing bond.
    pub first_violation: Option<usize>,
}

/// Scans `values` left to right and reports the first bond whose increment is
/// not in `{-J, -J + 2, ..., J}`.
pub fn check_viable(values: &[i64], spin_max: u32) -> ViabilityReport {
    let j = spin_max as i64;
    let first_violation = values
        .windows(2)
        .position(|w| !increment_allowed(w[1] - w[0], j));
    ViabilityReport {
        is_viable: first_violation.is_none(),
        first_violation,
    }
}

#[inline]
fn increment_allowed(d: i64, j: i64) -> bool {
    d.abs() <= j && (d - j).rem_euclid(2) == 0
}

impl HeightFunction {
    /// Builds a height profile after checking viability.
    pub fn new(window: Window, spin_max: u32, values: Vec<i64>) -> Result<Self, LatticeError> {
        let h = Self::from_raw(window, spin_max, values)?;
        h.viability()?;
        Ok(h)
    }

    /// Builds a height profile without the viability check; only the length
    /// is validated.
    pub fn from_raw(window: Window, spin_max: u32, values: Vec<i64>) -> Result<Self, LatticeError> {
        if spin_max == 0 {
            return Err(LatticeError::ZeroSpin);
        }
        if values.len() != window.len() {
            return Err(LatticeError::InvalidWindow {
                lo: window.lo,
                hi: window.hi,
                reason: "value count differs from window length",
            });
        }
        Ok(HeightFunction {
            window,
            spin_max,
            values,
            origin_current: 0,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn spin_max(&self) -> u32 {
        self.spin_max
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [i64] {
        &mut self.values
    }

    pub fn at(&self, site: i64) -> i64 {
        self.values[(site - self.window.lo) as usize]
    }

    pub fn get(&self, site: i64) -> Option<i64> {
        self.window.contains(site).then(|| self.at(site))
    }

    pub fn origin_current(&self) -> i64 {
        self.origin_current
    }

    pub(crate) fn set_origin_current(&mut self, current: i64) {
        self.origin_current = current;
    }

    pub fn with_origin_current(mut self, current: i64) -> Self {
        self.origin_current = current;
        self
    }

    pub fn check(&self) -> ViabilityReport {
        check_viable(&self.values, self.spin_max)
    }

    pub fn viability(&self) -> Result<(), LatticeError> {
        match self.check().first_violation {
            None => Ok(()),
            Some(i) => Err(LatticeError::NonViable {
                site: self.window.lo + i as i64,
            }),
        }
    }

    /// Adds a constant to every value. Only even shifts keep the parity
    /// sublattice, but any shift keeps viability.
    pub fn shifted(mut self, by: i64) -> Self {
        self.values.iter_mut().for_each(|v| *v += by);
        self
    }

    /// Pointwise `self ≤ other` on a common window.
    pub fn dominated_by(&self, other: &HeightFunction) -> Option<bool> {
        if self.window != other.window {
            return None;
        }
        Some(self.values.iter().zip(&other.values).all(|(a, b)| a <= b))
    }

    /// Whether `other - self` is nondecreasing in x.
    pub fn difference_nondecreasing(&self, other: &HeightFunction) -> Option<bool> {
        if self.window != other.window {
            return None;
        }
        Some(
            self.values
                .windows(2)
                .zip(other.values.windows(2))
                .all(|(a, b)| b[1] - a[1] >= b[0] - a[0]),
        )
    }
}

/// Heights on `[lo - 1, hi]` from a configuration on `[lo, hi]`, anchored so
/// that `h(0) = origin_value`.
pub fn height_from_config(cfg: &Configuration, origin_value: i64) -> HeightFunction {
    let j = cfg.spin_max as i64;
    let window = Window {
        lo: cfg.window.lo - 1,
        hi: cfg.window.hi,
    };
    let mut values = Vec::with_capacity(window.len());
    let mut acc = 0i64;
    values.push(acc);
    for &eta in &cfg.occupancy {
        acc += 2 * eta as i64 - j;
        values.push(acc);
    }
    let shift = origin_value - values[(0 - window.lo) as usize];
    values.iter_mut().for_each(|v| *v += shift);
    HeightFunction {
        window,
        spin_max: cfg.spin_max,
        values,
        origin_current: 0,
    }
}

/// Occupancies encoded by a viable height profile. The configuration lives on
/// `[lo + 1, hi]` of the height window.
pub fn config_from_height(
    h: &HeightFunction,
    boundary: BoundaryMode,
) -> Result<Configuration, LatticeError> {
    h.viability()?;
    let j = h.spin_max as i64;
    let occupancy = h
        .values
        .windows(2)
        .map(|w| ((w[1] - w[0] + j) / 2) as u8)
        .collect();
    let window = Window {
        lo: h.window.lo + 1,
        hi: h.window.hi,
    };
    Configuration::new(window, h.spin_max, occupancy, boundary)
}

fn same_shape(h1: &HeightFunction, h2: &HeightFunction) -> Result<(), LatticeError> {
    if h1.window != h2.window {
        return Err(LatticeError::WindowMismatch(
            h1.window.lo,
            h1.window.hi,
            h2.window.lo,
            h2.window.hi,
        ));
    }
    if h1.spin_max != h2.spin_max {
        return Err(LatticeError::SpinMismatch(h1.spin_max, h2.spin_max));
    }
    if let Some(i) = h1
        .values
        .iter()
        .zip(&h2.values)
        .position(|(a, b)| (a - b).rem_euclid(2) != 0)
    {
        return Err(LatticeError::ParityMismatch {
            site: h1.window.lo + i as i64,
        });
    }
    Ok(())
}

fn pointwise(
    h1: &HeightFunction,
    h2: &HeightFunction,
    op: fn(i64, i64) -> i64,
) -> Result<HeightFunction, LatticeError> {
    same_shape(h1, h2)?;
    let values = h1
        .values
        .iter()
        .zip(&h2.values)
        .map(|(&a, &b)| op(a, b))
        .collect();
    let out = HeightFunction {
        window: h1.window,
        spin_max: h1.spin_max,
        values,
        origin_current: 0,
    };
    debug_assert!(out.check().is_viable);
    Ok(out)
}

/// Pointwise maximum of two viable profiles on a common window.
pub fn viable_max(
    h1: &HeightFunction,
    h2: &HeightFunction,
) -> Result<HeightFunction, LatticeError> {
    pointwise(h1, h2, i64::max)
}

/// Pointwise minimum of two viable profiles on a common window.
pub fn viable_min(
    h1: &HeightFunction,
    h2: &HeightFunction,
) -> Result<HeightFunction, LatticeError> {
    pointwise(h1, h2, i64::min)
}

/// One line of the snapshot JSONL schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightSnapshot {
    pub t: f64,
    #[serde(rename = "J")]
    pub spin_max: u32,
    pub origin: i64,
    pub window: [i64; 2],
    pub heights: Vec<i64>,
}

impl HeightSnapshot {
    pub fn from_height(t: f64, h: &HeightFunction) -> Self {
        HeightSnapshot {
            t,
            spin_max: h.spin_max,
            origin: h.origin_current,
            window: [h.window.lo, h.window.hi],
            heights: h.values.clone(),
        }
    }

    pub fn to_height(&self) -> Result<HeightFunction, LatticeError> {
        let window = Window::new(self.window[0], self.window[1])?;
        Ok(
            HeightFunction::new(window, self.spin_max, self.heights.clone())?
                .with_origin_current(self.origin),
        )
    }
}
