//! Rate models and the shared-randomness event engine.
//!
//! Every directed nearest-neighbour bond carries a rate-1 Poisson clock. When
//! the clock of bond `x → y` rings with mark `U`, each replica independently
//! moves one particle from `x` to `y` iff `U < b(y - x, η(x), η(y))`. All
//! replicas read the same clocks and marks, which is the basic coupling.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{
    config_from_height, BoundaryMode, Configuration, HeightFunction, LatticeError, Window,
};
use crate::seeds::rng_from_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("parameter {name} = {value} out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("rate b({direction}, {occ_source}, {occ_target}) = {value} exceeds 1")]
    RateOverflow {
        direction: Direction,
        occ_source: u32,
        occ_target: u32,
        value: f64,
    },
    #[error("rate b({direction}, {occ_source}, {occ_target}) = {value} is not a probability")]
    RateNotProbability {
        direction: Direction,
        occ_source: u32,
        occ_target: u32,
        value: f64,
    },
    #[error(
        "rate b({direction}, {occ_source}, {occ_target}) must vanish (empty source or full target)"
    )]
    SuppressionViolated {
        direction: Direction,
        occ_source: u32,
        occ_target: u32,
    },
    #[error("rates are not misanthrope-monotone at b({direction}, {occ_source}, {occ_target})")]
    NotMisanthrope {
        direction: Direction,
        occ_source: u32,
        occ_target: u32,
    },
    #[error("event at t = {event} precedes state time {state}")]
    StaleEvent { event: f64, state: f64 },
    #[error("bond index {0} outside the bond table")]
    UnknownBond(usize),
    #[error("coupled evolution needs at least one replica")]
    NoReplicas,
    #[error("replica {index} does not share window/J with replica 0")]
    ReplicaMismatch { index: usize },
    #[error("model has J = {model} but initial data has J = {data}")]
    SpinMismatch { model: u32, data: u32 },
    #[error("snapshot times must be sorted, finite, nonnegative and ≤ horizon")]
    BadSchedule,
    #[error("window too small for the requested boundary mode")]
    WindowTooSmall,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn step(self) -> i64 {
        match self {
            Direction::Left => -1,
            Direction::Right => 1,
        }
    }

    fn index(self) -> usize {
        match self {
            Direction::Left => 0,
            Direction::Right => 1,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Left => "-1",
            Direction::Right => "+1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ModelLabel {
    /// `p = ½ + ½√ε` in the `drift` direction, `q = ½ - ½√ε` against it.
    Asep {
        epsilon: f64,
        drift: Direction,
    },
    Ssep,
    AsepQJ {
        q: f64,
        spin_max: u32,
    },
    Custom,
}

impl ModelLabel {
    pub fn epsilon(&self) -> Option<f64> {
        match self {
            ModelLabel::Asep { epsilon, .. } => Some(*epsilon),
            ModelLabel::Ssep => Some(0.0),
            _ => None,
        }
    }
}

/// Jump probabilities `b(direction, source occupancy, target occupancy)`
/// tabulated on `{-1, +1} × {0..J}²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateModel {
    spin_max: u32,
    table: Vec<f64>,
    label: ModelLabel,
}

impl RateModel {
    /// Tabulates `rate` and validates it: probabilities in `[0, 1]`,
    /// suppression of empty sources and full targets, and the misanthrope
    /// monotonicity (nondecreasing in the source, nonincreasing in the
    /// target occupancy).
    pub fn from_fn(
        spin_max: u32,
        label: ModelLabel,
        rate: impl Fn(Direction, u32, u32) -> f64,
    ) -> Result<Self, DynamicsError> {
        if spin_max == 0 || spin_max > u8::MAX as u32 {
            return Err(DynamicsError::OutOfRange {
                name: "J",
                value: spin_max as f64,
                expected: "1..=255",
            });
        }
        let side = (spin_max + 1) as usize;
        let mut table = vec![0.0; 2 * side * side];
        for dir in [Direction::Left, Direction::Right] {
            for a in 0..=spin_max {
                for b in 0..=spin_max {
                    let v = rate(dir, a, b);
                    if !v.is_finite() || v < 0.0 {
                        return Err(DynamicsError::RateNotProbability {
                            direction: dir,
                            occ_source: a,
                            occ_target: b,
                            value: v,
                        });
                    }
                    if v > 1.0 {
                        return Err(DynamicsError::RateOverflow {
                            direction: dir,
                            occ_source: a,
                            occ_target: b,
                            value: v,
                        });
                    }
                    if (a == 0 || b == spin_max) && v != 0.0 {
                        return Err(DynamicsError::SuppressionViolated {
                            direction: dir,
                            occ_source: a,
                            occ_target: b,
                        });
                    }
                    table[dir.index() * side * side + a as usize * side + b as usize] = v;
                }
            }
        }
        let model = RateModel {
            spin_max,
            table,
            label,
        };
        model.check_misanthrope()?;
        Ok(model)
    }

    fn check_misanthrope(&self) -> Result<(), DynamicsError> {
        let j = self.spin_max;
        for dir in [Direction::Left, Direction::Right] {
            for a in 0..=j {
                for b in 0..=j {
                    let v = self.rate(dir, a, b);
                    let up_source = a < j && self.rate(dir, a + 1, b) < v;
                    let up_target = b < j && self.rate(dir, a, b + 1) > v;
                    if up_source || up_target {
                        return Err(DynamicsError::NotMisanthrope {
                            direction: dir,
                            occ_source: a,
                            occ_target: b,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn rate(&self, dir: Direction, source: u32, target: u32) -> f64 {
        let side = (self.spin_max + 1) as usize;
        self.table[dir.index() * side * side + source as usize * side + target as usize]
    }

    pub fn spin_max(&self) -> u32 {
        self.spin_max
    }

    pub fn label(&self) -> &ModelLabel {
        &self.label
    }

    /// Largest jump probability over all arguments.
    pub fn max_rate(&self) -> f64 {
        self.table.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest total jump rate out of one bond pair, used for light-cone
    /// sizing.
    pub fn max_bond_rate(&self) -> f64 {
        let j = self.spin_max;
        let mut best: f64 = 0.0;
        for a in 0..=j {
            for b in 0..=j {
                best =
                    best.max(self.rate(Direction::Right, a, b) + self.rate(Direction::Left, b, a));
            }
        }
        best
    }
}

/// ASEP with `p = ½ + ½√ε` to the right and `q = ½ - ½√ε` to the left.
pub fn asep_model(epsilon: f64) -> Result<RateModel, DynamicsError> {
    asep_model_with_drift(epsilon, Direction::Right)
}

/// ASEP with the larger rate `½ + ½√ε` in the `drift` direction.
pub fn asep_model_with_drift(epsilon: f64, drift: Direction) -> Result<RateModel, DynamicsError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(DynamicsError::OutOfRange {
            name: "epsilon",
            value: epsilon,
            expected: "0 < epsilon <= 1",
        });
    }
    let (p, q) = asep_rates(epsilon);
    RateModel::from_fn(1, ModelLabel::Asep { epsilon, drift }, move |dir, a, b| {
        if a == 1 && b == 0 {
            if dir == drift {
                p
            } else {
                q
            }
        } else {
            0.0
        }
    })
}

/// `(p, q) = (½ + ½√ε, ½ - ½√ε)`.
pub fn asep_rates(epsilon: f64) -> (f64, f64) {
    let s = epsilon.sqrt();
    (0.5 + 0.5 * s, 0.5 - 0.5 * s)
}

pub fn ssep_model() -> RateModel {
    RateModel::from_fn(1, ModelLabel::Ssep, |_, a, b| {
        if a == 1 && b == 0 {
            0.5
        } else {
            0.0
        }
    })
    .expect("symmetric rates are valid")
}

/// The q-number `[a]_q = (q^a - q^-a) / (q - q^-1)`.
pub fn q_bracket(a: u32, q: f64) -> Result<f64, DynamicsError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(DynamicsError::OutOfRange {
            name: "q",
            value: q,
            expected: "0 < q < 1",
        });
    }
    let a = a as f64;
    Ok((q.powf(a) - q.powf(-a)) / (q - 1.0 / q))
}

/// ASEP(q, J) jump rate. With `s` the source and `t` the target occupancy, a
/// right jump from `x` to `x + 1` has rate
/// `q^(s - t - (J+1)) [s]_q [J - t]_q / (2 [J]_q)` and a left jump from
/// `x + 1` to `x` has rate `q^(t - s - (J+1)) [J - t]_q [s]_q / (2 [J]_q)`
/// (the mirrored formula is written in the `(η(x), η(x+1))` order).
pub fn asep_qj_rate(
    q: f64,
    spin_max: u32,
    dir: Direction,
    s: u32,
    t: u32,
) -> Result<f64, DynamicsError> {
    if spin_max == 0 {
        return Err(DynamicsError::OutOfRange {
            name: "J",
            value: 0.0,
            expected: "J >= 1",
        });
    }
    if s > spin_max || t > spin_max {
        return Err(DynamicsError::OutOfRange {
            name: "occupancy",
            value: s.max(t) as f64,
            expected: "0..=J",
        });
    }
    if s == 0 || t == spin_max {
        return Ok(0.0);
    }
    let (j, si, ti) = (spin_max as i32, s as i32, t as i32);
    let exponent = match dir {
        Direction::Right => si - ti - (j + 1),
        Direction::Left => ti - si - (j + 1),
    };
    Ok(
        q.powi(exponent) * q_bracket(s, q)? * q_bracket(spin_max - t, q)?
            / (2.0 * q_bracket(spin_max, q)?),
    )
}

/// ASEP(q, J) as thinning probabilities. Fails with `RateOverflow` when some
/// rate exceeds one, which happens for every `J ≥ 2` (the rate
/// `b(+1, J, 0) = [J]_q / (2q)` is at least `J / 2`).
pub fn asep_qj_model(q: f64, spin_max: u32) -> Result<RateModel, DynamicsError> {
    asep_qj_scaled(q, spin_max, 1.0)
}

/// ASEP(q, J) with every rate divided by the largest one, i.e. the same
/// process run at time speed `1 / speed`. Returns the model and `speed`;
/// microscopic time `t` of the scaled model is time `t / speed` of the
/// original one.
pub fn asep_qj_model_normalized(q: f64, spin_max: u32) -> Result<(RateModel, f64), DynamicsError> {
    let mut speed: f64 = 0.0;
    for dir in [Direction::Left, Direction::Right] {
        for s in 0..=spin_max {
            for t in 0..=spin_max {
                speed = speed.max(asep_qj_rate(q, spin_max, dir, s, t)?);
            }
        }
    }
    let speed = speed.max(1.0);
    Ok((asep_qj_scaled(q, spin_max, speed)?, speed))
}

fn asep_qj_scaled(q: f64, spin_max: u32, speed: f64) -> Result<RateModel, DynamicsError> {
    q_bracket(1, q)?;
    if spin_max == 0 {
        return Err(DynamicsError::OutOfRange {
            name: "J",
            value: 0.0,
            expected: "J >= 1",
        });
    }
    RateModel::from_fn(
        spin_max,
        ModelLabel::AsepQJ { q, spin_max },
        move |dir, s, t| asep_qj_rate(q, spin_max, dir, s, t).unwrap_or(f64::NAN) / speed,
    )
}

/// A directed bond `site → site + direction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirectedBond {
    pub site: i64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy)]
struct BondInfo {
    bond: DirectedBond,
    src: usize,
    dst: usize,
    /// Index into the height array of the site whose height moves.
    height_idx: usize,
    /// Periodic wrap bond: the seam copy `h(lo - 1)` moves too.
    seam: bool,
    /// `+2` for a right crossing of `(0, 1)`, `-2` for a left one.
    origin_delta: i64,
}

/// All directed bonds of a window under a boundary mode.
#[derive(Debug, Clone)]
pub struct BondTable {
    window: Window,
    boundary: BoundaryMode,
    bonds: Vec<BondInfo>,
}

impl BondTable {
    pub fn new(window: Window, boundary: BoundaryMode) -> Result<Self, DynamicsError> {
        let n = window.len();
        if n < 2 {
            return Err(DynamicsError::WindowTooSmall);
        }
        let mut bonds = Vec::with_capacity(2 * n);
        for (i, site) in window.sites().enumerate() {
            for dir in [Direction::Right, Direction::Left] {
                let (dst, wrap) = match (dir, i) {
                    (Direction::Right, i) if i + 1 < n => (i + 1, false),
                    (Direction::Left, i) if i > 0 => (i - 1, false),
                    (Direction::Right, _) => (0, true),
                    (Direction::Left, _) => (n - 1, true),
                };
                if wrap && boundary == BoundaryMode::Frozen {
                    continue;
                }
                // Height index is the left end of the undirected bond, shifted
                // by one because heights start at lo - 1.
                let left_end = match (dir, wrap) {
                    (_, true) => n - 1,
                    (Direction::Right, false) => i,
                    (Direction::Left, false) => i - 1,
                };
                let origin_delta = match (dir, site, wrap) {
                    (Direction::Right, 0, false) => 2,
                    (Direction::Left, 1, false) => -2,
                    _ => 0,
                };
                bonds.push(BondInfo {
                    bond: DirectedBond {
                        site,
                        direction: dir,
                    },
                    src: i,
                    dst,
                    height_idx: left_end + 1,
                    seam: wrap,
                    origin_delta,
                });
            }
        }
        Ok(BondTable {
            window,
            boundary,
            bonds,
        })
    }

    pub fn len(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bonds.is_empty()
    }

    pub fn bond(&self, index: usize) -> Option<DirectedBond> {
        self.bonds.get(index).map(|b| b.bond)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }
}

/// One ring of a bond clock with its uniform mark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockEvent {
    pub time: f64,
    pub bond: DirectedBond,
    /// Position of the bond in the [`BondTable`].
    pub index: usize,
    pub mark: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ClockScheme {
    /// One exponential clock per directed bond in a binary heap keyed by the
    /// next ring time; the residual of the ringing bond is redrawn.
    #[default]
    PerBondQueue,
    /// A single rate-`B` Poisson clock whose rings pick a bond uniformly.
    /// Equal in law to the per-bond clocks and O(1) per event.
    Superposed,
}

#[derive(Debug, Clone)]
enum Clocks {
    Queue(BinaryHeap<Reverse<(u64, u32)>>),
    Superposed { now: f64 },
}

/// Reproducible stream of clock events over a bond table.
#[derive(Debug, Clone)]
pub struct EventStream {
    bonds: Vec<DirectedBond>,
    rng: ChaCha8Rng,
    clocks: Clocks,
    pending: Option<ClockEvent>,
}

impl EventStream {
    pub fn new(table: &BondTable, scheme: ClockScheme, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let bonds: Vec<DirectedBond> = table.bonds.iter().map(|b| b.bond).collect();
        let clocks = match scheme {
            ClockScheme::PerBondQueue => {
                let heap = (0..bonds.len())
                    .map(|i| {
                        let t: f64 = rng.sample(Exp1);
                        Reverse((t.to_bits(), i as u32))
                    })
                    .collect();
                Clocks::Queue(heap)
            }
            ClockScheme::Superposed => Clocks::Superposed { now: 0.0 },
        };
        EventStream {
            bonds,
            rng,
            clocks,
            pending: None,
        }
    }

    fn draw(&mut self) -> ClockEvent {
        let (time, index) = match &mut self.clocks {
            Clocks::Queue(heap) => {
                let mut top = heap.peek_mut().expect("bond table is never empty");
                let Reverse((bits, idx)) = *top;
                let t = f64::from_bits(bits);
                let next: f64 = t + self.rng.sample::<f64, _>(Exp1);
                *top = Reverse((next.to_bits(), idx));
                (t, idx as usize)
            }
            Clocks::Superposed { now } => {
                let total = self.bonds.len() as f64;
                *now += self.rng.sample::<f64, _>(Exp1) / total;
                let idx = self.rng.random_range(0..self.bonds.len());
                (*now, idx)
            }
        };
        let mark: f64 = self.rng.random();
        ClockEvent {
            time,
            bond: self.bonds[index],
            index,
            mark,
        }
    }

    /// The next event without consuming it.
    pub fn peek(&mut self) -> ClockEvent {
        match self.pending {
            Some(ev) => ev,
            None => {
                let ev = self.draw();
                self.pending = Some(ev);
                ev
            }
        }
    }

    /// Returns the globally soonest ring and advances the stream.
    pub fn next_event(&mut self) -> ClockEvent {
        match self.pending.take() {
            Some(ev) => ev,
            None => self.draw(),
        }
    }
}

/// One replica: configuration and height kept in lockstep.
#[derive(Debug, Clone, PartialEq)]
pub struct Replica {
    pub config: Configuration,
    pub height: HeightFunction,
}

/// `k` replicas driven by a single event stream.
#[derive(Debug, Clone)]
pub struct CoupledState {
    replicas: Vec<Replica>,
    table: BondTable,
    time: f64,
    event_count: u64,
}

impl CoupledState {
    pub fn new(initials: &[HeightFunction], boundary: BoundaryMode) -> Result<Self, DynamicsError> {
        let first = initials.first().ok_or(DynamicsError::NoReplicas)?;
        let mut replicas = Vec::with_capacity(initials.len());
        for (index, h) in initials.iter().enumerate() {
            if h.window() != first.window() || h.spin_max() != first.spin_max() {
                return Err(DynamicsError::ReplicaMismatch { index });
            }
            let config = config_from_height(h, boundary)?;
            replicas.push(Replica {
                config,
                height: h.clone(),
            });
        }
        let table = BondTable::new(replicas[0].config.window(), boundary)?;
        Ok(CoupledState {
            replicas,
            table,
            time: 0.0,
            event_count: 0,
        })
    }

    pub fn replicas(&self) -> &[Replica] {
        &self.replicas
    }

    pub fn heights(&self) -> Vec<HeightFunction> {
        self.replicas.iter().map(|r| r.height.clone()).collect()
    }

    pub fn bond_table(&self) -> &BondTable {
        &self.table
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    pub fn spin_max(&self) -> u32 {
        self.replicas[0].config.spin_max()
    }

    /// Applies one clock ring to every replica with the shared mark. Returns
    /// how many replicas moved a particle.
    pub fn apply_event(
        &mut self,
        ev: &ClockEvent,
        model: &RateModel,
    ) -> Result<usize, DynamicsError> {
        if ev.time < self.time {
            return Err(DynamicsError::StaleEvent {
                event: ev.time,
                state: self.time,
            });
        }
        let info = *self
            .table
            .bonds
            .get(ev.index)
            .ok_or(DynamicsError::UnknownBond(ev.index))?;
        let dir = info.bond.direction;
        let dh = -2 * dir.step();
        let j = model.spin_max();
        let mut fired = 0;
        for r in &mut self.replicas {
            let occ = r.config.occupancy_mut();
            let (a, b) = (occ[info.src], occ[info.dst]);
            if ev.mark < model.rate(dir, a as u32, b as u32) {
                occ[info.src] = a - 1;
                occ[info.dst] = b + 1;
                let values = r.height.values_mut();
                values[info.height_idx] += dh;
                if info.seam {
                    values[0] += dh;
                }
                if info.origin_delta != 0 {
                    let c = r.height.origin_current() + info.origin_delta;
                    r.height.set_origin_current(c);
                }
                fired += 1;
                debug_assert!(local_consistent(r, info.height_idx, j));
            }
        }
        self.time = ev.time;
        self.event_count += 1;
        Ok(fired)
    }

    /// Applies every event with time ≤ `t`, then sets the clock to `t`.
    pub fn advance_to(
        &mut self,
        stream: &mut EventStream,
        model: &RateModel,
        t: f64,
    ) -> Result<(), DynamicsError> {
        self.advance_to_with(stream, model, t, |_, _| {})
    }

    /// As [`advance_to`](Self::advance_to), calling `observe` after each
    /// event.
    pub fn advance_to_with(
        &mut self,
        stream: &mut EventStream,
        model: &RateModel,
        t: f64,
        mut observe: impl FnMut(&CoupledState, &ClockEvent),
    ) -> Result<(), DynamicsError> {
        while stream.peek().time <= t {
            let ev = stream.next_event();
            self.apply_event(&ev, model)?;
            observe(self, &ev);
        }
        if t > self.time {
            self.time = t;
        }
        Ok(())
    }

    /// Full check that every height equals the height map of its
    /// configuration, anchored at the tracked height of the left end.
    pub fn verify_consistency(&self) -> bool {
        self.replicas.iter().all(|r| {
            let j = r.config.spin_max() as i64;
            let h = r.height.values();
            r.config
                .occupancy()
                .iter()
                .enumerate()
                .all(|(i, &eta)| h[i + 1] - h[i] == 2 * eta as i64 - j)
        })
    }
}

fn local_consistent(r: &Replica, height_idx: usize, j: u32) -> bool {
    let h = r.height.values();
    let occ = r.config.occupancy();
    let j = j as i64;
    let ok = |i: usize| i == 0 || i >= h.len() || h[i] - h[i - 1] == 2 * occ[i - 1] as i64 - j;
    ok(height_idx) && ok(height_idx + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub label: ModelLabel,
    #[serde(rename = "J")]
    pub spin_max: u32,
    pub boundary: BoundaryMode,
    pub clocks: ClockScheme,
}

/// Heights of all replicas at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub event_count: u64,
    pub heights: Vec<HeightFunction>,
}

/// Recorded coupled evolution, replayable from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    /// Per-replica stream seeds when the replicas were run uncoupled.
    pub replica_seeds: Option<Vec<u64>>,
    pub model: ModelDescriptor,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn replica_count(&self) -> usize {
        self.snapshots.first().map_or(0, |s| s.heights.len())
    }

    pub fn snapshot_at(&self, time: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.time - time).abs() <= 1e-9 * time.abs().max(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvolveOptions {
    pub boundary: BoundaryMode,
    pub clocks: ClockScheme,
}

fn validate_schedule(horizon: f64, times: &[f64]) -> Result<(), DynamicsError> {
    let sorted = times.windows(2).all(|w| w[0] <= w[1]);
    let in_range = times
        .iter()
        .all(|&t| t.is_finite() && t >= 0.0 && t <= horizon);
    if !horizon.is_finite() || horizon < 0.0 || !sorted || !in_range {
        return Err(DynamicsError::BadSchedule);
    }
    Ok(())
}

/// Runs the `k`-replica basic coupling from `initials` up to `horizon`,
/// recording every replica at each of `snapshot_times`.
pub fn evolve_coupled(
    initials: &[HeightFunction],
    model: &RateModel,
    horizon: f64,
    snapshot_times: &[f64],
    seed: u64,
    options: EvolveOptions,
) -> Result<Trajectory, DynamicsError> {
    validate_schedule(horizon, snapshot_times)?;
    let mut state = CoupledState::new(initials, options.boundary)?;
    if state.spin_max() != model.spin_max() {
        return Err(DynamicsError::SpinMismatch {
            model: model.spin_max(),
            data: state.spin_max(),
        });
    }
    let mut stream = EventStream::new(&state.table, options.clocks, seed);
    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    for &t in snapshot_times {
        state.advance_to(&mut stream, model, t)?;
        snapshots.push(Snapshot {
            time: t,
            event_count: state.event_count,
            heights: state.heights(),
        });
    }
    Ok(Trajectory {
        seed,
        replica_seeds: None,
        model: ModelDescriptor {
            label: model.label().clone(),
            spin_max: model.spin_max(),
            boundary: options.boundary,
            clocks: options.clocks,
        },
        snapshots,
    })
}

/// Runs each replica on its own event stream (no coupling). Used as a
/// negative control for the coupling diagnostics.
pub fn evolve_uncoupled(
    initials: &[HeightFunction],
    model: &RateModel,
    horizon: f64,
    snapshot_times: &[f64],
    seeds: &[u64],
    options: EvolveOptions,
) -> Result<Trajectory, DynamicsError> {
    if initials.is_empty() {
        return Err(DynamicsError::NoReplicas);
    }
    if seeds.len() != initials.len() {
        return Err(DynamicsError::ReplicaMismatch {
            index: seeds.len().min(initials.len()),
        });
    }
    let runs = initials
        .iter()
        .zip(seeds)
        .map(|(h, &s)| {
            evolve_coupled(
                std::slice::from_ref(h),
                model,
                horizon,
                snapshot_times,
                s,
                options,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let snapshots = snapshot_times
        .iter()
        .enumerate()
        .map(|(i, &time)| Snapshot {
            time,
            event_count: runs.iter().map(|r| r.snapshots[i].event_count).sum(),
            heights: runs
                .iter()
                .map(|r| r.snapshots[i].heights[0].clone())
                .collect(),
        })
        .collect();
    Ok(Trajectory {
        seed: seeds[0],
        replica_seeds: Some(seeds.to_vec()),
        model: runs[0].model.clone(),
        snapshots,
    })
}

/// Twice the net number of particles that crossed bond `(0, 1)` to the right,
/// at every snapshot of `replica`.
pub fn current_at_origin(traj: &Trajectory, replica: usize) -> Vec<(f64, i64)> {
    traj.snapshots
        .iter()
        .filter_map(|s| s.heights.get(replica).map(|h| (s.time, h.origin_current())))
        .collect()
}
