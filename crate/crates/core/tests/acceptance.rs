//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Positional arguments filter criteria by
//! substring (`cargo test --test acceptance -- criterion_5`).
//!
//! Statistical criteria run a second, independently seeded batch when the
//! first fails and fail only when both batches fail.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use asep_coupling::diagnostics::{
    moment_bound_check, ordering_violation, GridFunction, NormParams, OrderingKind,
};
use asep_coupling::dynamics::{
    asep_model, asep_model_with_drift, asep_qj_model_normalized, evolve_coupled, ssep_model,
    ClockScheme, CoupledState, Direction, EventStream, EvolveOptions, RateModel,
};
use asep_coupling::harness::{
    self, Coupling, DiagnosticSpec, ExperimentConfig, InitialSpec, LatticeSpec, ModelSpec,
    RunOutput, TimeSpec,
};
use asep_coupling::initdata::{
    approx_viable, approx_viable_pair, bernoulli_height, ordered_bernoulli_pair, SmoothProfile,
    TanhTerm,
};
use asep_coupling::lattice::{height_from_config, viable_max, viable_min};
use asep_coupling::scaling::ew_variance;
use asep_coupling::seeds::{derive_seed, rng_from_seed};
use asep_coupling::stats::{linear_fit, Moments};
use asep_coupling::{
    BoundaryMode, Configuration, DriftSign, HeightFunction, ScalingParams, Window,
};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

/// Runs `batch(seed_a)`; on failure runs `batch(seed_b)`.
fn two_batch(seed_a: u64, seed_b: u64, batch: impl Fn(u64) -> Outcome) -> Outcome {
    let first = batch(seed_a);
    if first.pass {
        return first;
    }
    let second = batch(seed_b);
    Outcome::new(
        second.pass,
        format!(
            "batch 1 failed [{}]; batch 2 [{}]",
            first.detail, second.detail
        ),
    )
}

fn base_config(
    name: &str,
    model: ModelSpec,
    half_width: i64,
    obs: i64,
    horizon: f64,
) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: harness::SCHEMA_VERSION,
        name: name.into(),
        seed: 1,
        ensemble: 1,
        record: 0,
        coupling: Coupling::Coupled,
        clocks: ClockScheme::Superposed,
        model,
        lattice: LatticeSpec {
            half_width,
            boundary: BoundaryMode::Periodic,
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

fn asep_spec(epsilon: f64) -> ModelSpec {
    ModelSpec::Asep {
        epsilon,
        drift: Direction::Right,
    }
}

fn failed_checks(out: &RunOutput) -> Vec<String> {
    out.verdicts
        .iter()
        .filter(|v| !v.pass)
        .map(|v| format!("{}={:.4}", v.check, v.estimate))
        .collect()
}

// ---------------------------------------------------------------------------
// 1. Exact invariants.

const INVARIANT_TRIALS: u64 = 1000;

fn random_j2_height(window: Window, rng: &mut impl Rng) -> HeightFunction {
    let occ = (0..window.len())
        .map(|_| rng.random_range(0..=2u8))
        .collect();
    height_from_config(
        &Configuration::new(window, 2, occ, BoundaryMode::Frozen).unwrap(),
        0,
    )
}

/// Returns a description of the first violation, if any.
#[allow(clippy::type_complexity)]
fn invariant_trial(trial: u64) -> Option<String> {
    let seed = derive_seed(0xC1, trial);
    let mut rng = rng_from_seed(seed ^ 0x5EED);
    let window = Window::new(-127, 128).unwrap();
    let horizon = 5.0;
    let kind = trial % 3;
    let (model, boundary, initials, m_pairs, a_pairs): (
        RateModel,
        _,
        Vec<HeightFunction>,
        Vec<[usize; 2]>,
        Vec<[usize; 2]>,
    ) = match kind {
        0 | 1 => {
            let drift = if rng.random::<bool>() {
                Direction::Right
            } else {
                Direction::Left
            };
            let model = asep_model_with_drift(0.04, drift).unwrap();
            let (r1, r2, r3) = (
                rng.random_range(0.1..0.9),
                rng.random_range(0.1..0.9),
                rng.random_range(0.1..0.9),
            );
            let boundary = if kind == 0 {
                BoundaryMode::Frozen
            } else {
                BoundaryMode::Periodic
            };
            let (lo, hi) = ordered_bernoulli_pair(r3, window, boundary, rng.random()).unwrap();
            let mut hs = vec![height_from_config(&lo, 0), height_from_config(&hi, 0)];
            let mut m_pairs = Vec::new();
            if kind == 0 {
                // Max/min envelopes of two unrelated data; (M) is a
                // line property, so the ring only carries (A) pairs.
                let a = bernoulli_height(r1, window, rng.random()).unwrap();
                let b = bernoulli_height(r2, window, rng.random())
                    .unwrap()
                    .shifted(2 * rng.random_range(-3..=3));
                let (mx, mn) = (viable_max(&a, &b).unwrap(), viable_min(&a, &b).unwrap());
                hs.extend([a, b, mx, mn]);
                m_pairs = vec![[5, 2], [5, 3], [2, 4], [3, 4], [5, 4]];
            }
            (model, boundary, hs, m_pairs, vec![[0, 1]])
        }
        _ => {
            let (model, _) = asep_qj_model_normalized(rng.random_range(0.8..1.0), 2).unwrap();
            let c: Vec<u8> = (0..window.len())
                .map(|_| rng.random_range(0..=2u8))
                .collect();
            let d: Vec<u8> = c
                .iter()
                .map(|&x| x + rng.random_range(0..=(2 - x)))
                .collect();
            let lo = height_from_config(
                &Configuration::new(window, 2, c, BoundaryMode::Frozen).unwrap(),
                0,
            );
            let hi = height_from_config(
                &Configuration::new(window, 2, d, BoundaryMode::Frozen).unwrap(),
                0,
            );
            let a = random_j2_height(window, &mut rng);
            let b = random_j2_height(window, &mut rng);
            let (mx, mn) = (viable_max(&a, &b).unwrap(), viable_min(&a, &b).unwrap());
            (
                model,
                BoundaryMode::Frozen,
                vec![lo, hi, a, b, mx, mn],
                vec![[5, 2], [5, 3], [2, 4], [3, 4]],
                vec![[0, 1]],
            )
        }
    };
    let mut state = CoupledState::new(&initials, boundary).unwrap();
    let mut stream = EventStream::new(state.bond_table(), ClockScheme::PerBondQueue, seed);
    let mut violation: Option<String> = None;
    let check = |st: &CoupledState| -> Option<String> {
        let r = st.replicas();
        for p in &m_pairs {
            if let Some(x) = ordering_violation(&r[p[0]].height, &r[p[1]].height, OrderingKind::M) {
                return Some(format!("(M) pair {p:?} at site {x}, t={}", st.time()));
            }
        }
        for p in &a_pairs {
            for kind in [OrderingKind::A, OrderingKind::MonotoneDifference] {
                if let Some(x) = ordering_violation(&r[p[0]].height, &r[p[1]].height, kind) {
                    return Some(format!("{kind:?} pair {p:?} at site {x}, t={}", st.time()));
                }
            }
            if r[p[0]].config.dominated_by(&r[p[1]].config) != Some(true) {
                return Some(format!("occupations of {p:?} not ordered, t={}", st.time()));
            }
        }
        None
    };
    if let Some(v) = check(&state) {
        return Some(format!("trial {trial}: initial data {v}"));
    }
    state
        .advance_to_with(&mut stream, &model, horizon, |st, _| {
            if violation.is_none() {
                violation = check(st);
            }
        })
        .unwrap();
    if violation.is_none() && !state.verify_consistency() {
        violation = Some("height/configuration mismatch".into());
    }
    violation.map(|v| format!("trial {trial}: {v}"))
}

fn criterion_1() -> Outcome {
    let mut events = 0u64;
    for trial in 0..INVARIANT_TRIALS {
        if let Some(v) = invariant_trial(trial) {
            return Outcome::new(false, v);
        }
        events += 1;
    }
    Outcome::new(
        true,
        format!("{events} trials, (M)/(A)/monotone difference checked after every event"),
    )
}

// ---------------------------------------------------------------------------
// 2. Oracle equivalence on a 4-site ring.

const RING_RUNS: usize = 100_000;

/// Single-jump outcomes of ASEP with right rate `p` and left rate `q` on a
/// ring, by brute-force enumeration.
fn generator_oracle(eta: &[u8], p: f64, q: f64) -> BTreeMap<Vec<u8>, f64> {
    let n = eta.len();
    let mut out = BTreeMap::new();
    for x in 0..n {
        for (step, rate) in [(1, p), (n - 1, q)] {
            let y = (x + step) % n;
            if eta[x] == 1 && eta[y] == 0 {
                let mut next = eta.to_vec();
                next[x] = 0;
                next[y] = 1;
                *out.entry(next).or_insert(0.0) += rate;
            }
        }
    }
    out
}

fn ring_batch(master: u64) -> Outcome {
    let eps: f64 = 0.04;
    // Weakly asymmetric rates ½(1 ± √ε).
    let (p, q) = (0.5 * (1.0 + eps.sqrt()), 0.5 * (1.0 - eps.sqrt()));
    let model = asep_model(eps).unwrap();
    let window = Window::new(0, 3).unwrap();
    let starts: [[u8; 4]; 4] = [[1, 0, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0], [1, 1, 1, 0]];
    let per_start = RING_RUNS / starts.len();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for scheme in [ClockScheme::PerBondQueue, ClockScheme::Superposed] {
        for (si, eta) in starts.iter().enumerate() {
            let oracle = generator_oracle(eta, p, q);
            let total: f64 = oracle.values().sum();
            let cfg = Configuration::new(window, 1, eta.to_vec(), BoundaryMode::Periodic).unwrap();
            let h0 = height_from_config(&cfg, 0);
            let mut counts: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
            let mut hold = Moments::new();
            for k in 0..per_start {
                let seed = derive_seed(master, (si * per_start + k) as u64);
                let mut state =
                    CoupledState::new(std::slice::from_ref(&h0), BoundaryMode::Periodic).unwrap();
                let mut stream = EventStream::new(state.bond_table(), scheme, seed);
                loop {
                    let ev = stream.next_event();
                    if state.apply_event(&ev, &model).unwrap() > 0 {
                        *counts
                            .entry(state.replicas()[0].config.occupancy().to_vec())
                            .or_insert(0) += 1;
                        hold.push(ev.time);
                        break;
                    }
                }
            }
            let n = per_start as f64;
            for next in counts.keys().filter(|k| !oracle.contains_key(*k)) {
                failures.push(format!("{scheme:?} {eta:?}: impossible outcome {next:?}"));
            }
            for (next, rate) in &oracle {
                let pi = rate / total;
                let freq = *counts.get(next).unwrap_or(&0) as f64 / n;
                let z = (freq - pi) / (pi * (1.0 - pi) / n).sqrt();
                worst = worst.max(z.abs());
                if z.abs() > 3.0 {
                    failures.push(format!("{scheme:?} {eta:?}->{next:?}: z={z:.2}"));
                }
            }
            let z = (hold.mean() - 1.0 / total) / (1.0 / total / n.sqrt());
            worst = worst.max(z.abs());
            if z.abs() > 3.0 {
                failures.push(format!("{scheme:?} {eta:?}: holding time z={z:.2}"));
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} runs per clock scheme, max |z| = {worst:.2}",
                per_start * starts.len()
            )
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_2() -> Outcome {
    two_batch(0xC2A, 0xC2B, ring_batch)
}

// ---------------------------------------------------------------------------
// 3. Stationarity.

fn stationarity_batch(seed: u64) -> Outcome {
    let eps = 0.04;
    let horizon = 1.0 / (eps * eps);
    let mut cfg = base_config("stationarity", asep_spec(eps), 128, 128, horizon);
    cfg.seed = seed;
    cfg.ensemble = 200;
    cfg.initial = vec![InitialSpec::Bernoulli { rho: 0.5 }];
    cfg.diagnostics = vec![DiagnosticSpec::Occupation {
        t: horizon,
        rho: 0.5,
        band: 3.0,
        max_outside: 0.02,
    }];
    let out = harness::execute(&cfg, 0).unwrap();
    let summary: Vec<String> = out
        .verdicts
        .iter()
        .map(|v| format!("{}={:.4}", v.check, v.estimate))
        .collect();
    Outcome::new(out.pass(), summary.join(", "))
}

fn criterion_3() -> Outcome {
    two_batch(0xC3A, 0xC3B, stationarity_batch)
}

// ---------------------------------------------------------------------------
// 4. Martingale structure.

fn martingale_batch(seed: u64) -> Outcome {
    let eps = 0.04;
    let horizon = 100.0;
    let probes = vec![-40, -20, 0, 20, 40];
    let half_width = 40 + (4.0 * horizon) as i64 + 8;
    let mut cfg = base_config("martingale", asep_spec(eps), half_width, 40, horizon);
    cfg.lattice.boundary = BoundaryMode::Frozen;
    cfg.clocks = ClockScheme::PerBondQueue;
    cfg.seed = seed;
    cfg.ensemble = 500;
    cfg.time.snapshot_every = 0.1;
    cfg.initial = vec![
        InitialSpec::Approx {
            profile: asep_coupling::ProfileSpec::Tanh { amplitude: 1.0 },
            delta: 0.5,
        },
        InitialSpec::Approx {
            profile: asep_coupling::ProfileSpec::SinDamped,
            delta: 0.5,
        },
    ];
    cfg.diagnostics = vec![DiagnosticSpec::Martingale {
        probes,
        dt_max: 0.1,
        band: 3.0,
        qv_sigma: 5.0,
    }];
    let out = harness::execute(&cfg, 0).unwrap();
    let count = |prefix: &str| {
        out.verdicts
            .iter()
            .filter(|v| v.check.contains(prefix))
            .count()
    };
    let worst_z = out
        .verdicts
        .iter()
        .filter(|v| !v.check.contains("qv_"))
        .map(|v| (v.estimate / v.stderr).abs())
        .fold(0.0, f64::max);
    let min_qv = out
        .verdicts
        .iter()
        .filter(|v| v.check.contains("qv_"))
        .map(|v| v.estimate / v.stderr)
        .fold(f64::INFINITY, f64::min);
    let detail = format!(
        "{} residual, {} same-replica cross, {} cross-replica, {} qv checks; max |z| = {worst_z:.2}, min qv/SE = {min_qv:.1}{}",
        count("residual"),
        count("cross_r00"),
        count("cross_r01"),
        count("qv_"),
        if out.pass() { String::new() } else { format!("; failed: {}", failed_checks(&out).join(", ")) }
    );
    Outcome::new(out.pass(), detail)
}

fn criterion_4() -> Outcome {
    two_batch(0xC4A, 0xC4B, martingale_batch)
}

// ---------------------------------------------------------------------------
// 5. Q_N decay with a negative control.

fn qvar_config(eps: f64, seed: u64, coupled: bool) -> ExperimentConfig {
    let horizon = 0.5 / (eps * eps);
    let half_width = (8.0 / eps).round() as i64;
    let obs = (2.0 / eps).round() as i64;
    let mut cfg = base_config("qvar", asep_spec(eps), half_width, obs, horizon);
    cfg.seed = seed;
    cfg.ensemble = 300;
    let ramp_lower = InitialSpec::RampLower {
        increase: 29.7,
        a: -1.0,
        b: 2.0,
    };
    let ramp_upper = InitialSpec::RampUpper {
        increase: 29.7,
        a: -1.0,
        b: 2.0,
    };
    let (levels, min_ratio, max_ratio) = (
        vec![3, 4, 5, 6, 7],
        (!coupled).then_some(0.9),
        coupled.then_some(0.5),
    );
    if coupled {
        cfg.initial = vec![ramp_lower, ramp_upper];
    } else {
        // Identical data on independent clocks.
        cfg.coupling = Coupling::Independent;
        cfg.initial = vec![ramp_lower.clone(), ramp_lower];
    }
    cfg.diagnostics = vec![DiagnosticSpec::Qvar {
        pair: [0, 1],
        t: 0.5,
        a: 0.0,
        b: 1.0,
        levels,
        max_ratio,
        min_ratio,
    }];
    cfg
}

fn qvar_means(out: &RunOutput) -> (Vec<f64>, f64) {
    let means = out
        .rows
        .iter()
        .filter(|r| r.quantity == "qvar")
        .map(|r| r.estimate)
        .collect();
    let ratio = out
        .rows
        .iter()
        .find(|r| r.quantity == "qvar_ratio")
        .unwrap()
        .estimate;
    (means, ratio)
}

fn qvar_batch(seed: u64) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut ratios = Vec::new();
    for (i, eps) in [0.04, 0.01].into_iter().enumerate() {
        let coupled =
            harness::execute(&qvar_config(eps, derive_seed(seed, 2 * i as u64), true), 0).unwrap();
        let control = harness::execute(
            &qvar_config(eps, derive_seed(seed, 2 * i as u64 + 1), false),
            0,
        )
        .unwrap();
        let (means, ratio) = qvar_means(&coupled);
        let (_, control_ratio) = qvar_means(&control);
        pass &= coupled.pass() && control.pass();
        ratios.push(ratio);
        let q: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
        parts.push(format!(
            "eps={eps}: Q_3..7=[{}] ratio={ratio:.3} control={control_ratio:.3}",
            q.join(",")
        ));
        for f in failed_checks(&coupled)
            .into_iter()
            .chain(failed_checks(&control))
        {
            parts.push(format!("failed {f}"));
        }
    }
    let stronger = ratios[1] < ratios[0];
    if !stronger {
        parts.push("decay does not strengthen as eps shrinks".into());
    }
    Outcome::new(pass && stronger, parts.join("; "))
}

fn criterion_5() -> Outcome {
    two_batch(0xC5A, 0xC5B, qvar_batch)
}

// ---------------------------------------------------------------------------
// 6. Lattice approximation of smooth profiles.

fn sup_error(f: &SmoothProfile, eps: f64) -> f64 {
    let n = (2.0 / eps).round() as i64;
    let a = approx_viable(f, eps, Window::new(-n - 1, n).unwrap()).unwrap();
    (-n..=n)
        .map(|k| {
            let x = k as f64 * eps;
            (a.eval(x) - f.eval(x)).abs()
        })
        .fold(0.0, f64::max)
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let profiles = [
        SmoothProfile::tanh(1.0, 0.5).unwrap(),
        SmoothProfile::sin_damped(0.5).unwrap(),
    ];
    for f in &profiles {
        let (mut lx, mut ly) = (Vec::new(), Vec::new());
        for k in 4..=12 {
            let eps = 2f64.powi(-k);
            lx.push(eps.ln());
            ly.push(sup_error(f, eps).ln());
        }
        let (slope, _) = linear_fit(&lx, &ly);
        pass &= slope >= 0.2;
        parts.push(format!(
            "{}: exponent {slope:.3} (error {:.3} -> {:.4})",
            f.name(),
            ly[0].exp(),
            ly[ly.len() - 1].exp()
        ));
    }
    let mut rng = rng_from_seed(0xC6);
    let mut violations = 0;
    for _ in 0..100 {
        let mut terms: Vec<TanhTerm> = (0..rng.random_range(1..=3))
            .map(|_| TanhTerm {
                amplitude: rng.random_range(-2.0..2.0),
                center: rng.random_range(-3.0..3.0),
                width: rng.random_range(0.3..2.0),
            })
            .collect();
        let f = SmoothProfile::tanh_sum(&terms, 0.5).unwrap();
        // Adding increasing terms gives g' ≥ f'.
        terms.extend((0..rng.random_range(1..=2)).map(|_| TanhTerm {
            amplitude: rng.random_range(0.0..2.0),
            center: rng.random_range(-3.0..3.0),
            width: rng.random_range(0.3..2.0),
        }));
        let g = SmoothProfile::tanh_sum(&terms, 0.5).unwrap();
        let eps = 2f64.powi(-rng.random_range(4..=8));
        let n = (40.0 / eps) as i64;
        let (af, ag) = approx_viable_pair(&f, &g, eps, Window::new(-n, n).unwrap()).unwrap();
        if ordering_violation(&af.height, &ag.height, OrderingKind::MonotoneDifference).is_some() {
            violations += 1;
        }
    }
    pass &= violations == 0;
    parts.push(format!("{violations}/100 monotone-difference violations"));
    Outcome::new(pass, parts.join("; "))
}

// ---------------------------------------------------------------------------
// 7. Moment bounds for Bernoulli(½) heights.

/// `(E|S_n|^3)^(1/3)` for a simple random walk, summed over the binomial law.
fn walk_l3(n: u64) -> f64 {
    let mut log_c = -(n as f64) * std::f64::consts::LN_2;
    let mut acc = 0.0;
    for k in 0..=n {
        if k > 0 {
            log_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        let s = (2 * k as i64 - n as i64).abs() as f64;
        acc += (log_c).exp() * s.powi(3);
    }
    acc.cbrt()
}

fn moment_batch(seed: u64) -> Outcome {
    let level = 6;
    let eps = 2f64.powi(-level);
    let extent = 64.0;
    let sites = (extent / eps) as i64;
    let window = Window::symmetric(sites + 2);
    let scale = eps.sqrt();
    let ensemble: Vec<GridFunction> = (0..500)
        .map(|i| {
            let h = bernoulli_height(0.5, window, derive_seed(seed, i)).unwrap();
            GridFunction::sample(-extent, extent, level as u32, |x| {
                scale * h.at((x / eps).round() as i64) as f64
            })
        })
        .collect();
    let good = moment_bound_check(
        &ensemble,
        &NormParams::new(0.5, 0.5, 3.0, level as u32).unwrap(),
        2.0,
    )
    .unwrap();
    let bad = moment_bound_check(
        &ensemble,
        &NormParams::new(0.5, 0.1, 3.0, level as u32).unwrap(),
        2.0,
    )
    .unwrap();
    // Walk oracle at |x| = extent: ‖√ε S_{x/ε}‖_3 / (1+x)^δ.
    let l3 = scale * walk_l3(sites as u64);
    let oracle_good = l3 / (1.0 + extent).powf(0.5);
    let oracle_bad = l3 / (1.0 + extent).powf(0.1);
    let est = |r: &asep_coupling::diagnostics::EstimatorReport| {
        r.verdicts
            .iter()
            .map(|v| format!("{}={:.3}", v.check, v.estimate))
            .collect::<Vec<_>>()
            .join(",")
    };
    let pass = good.pass() && !bad.pass() && oracle_good <= 2.0 && oracle_bad > 2.0;
    Outcome::new(
        pass,
        format!(
            "delta=0.5 {} [{}]; delta=0.1 {} [{}]; walk oracle at x=64: {oracle_good:.3} / {oracle_bad:.3}",
            if good.pass() { "passes" } else { "fails" },
            est(&good),
            if bad.pass() { "passes" } else { "fails" },
            est(&bad)
        ),
    )
}

fn criterion_7() -> Outcome {
    two_batch(0xC7A, 0xC7B, moment_batch)
}

// ---------------------------------------------------------------------------
// 8. Symmetric baseline against Edwards-Wilkinson.

/// EW variance on a ring of length `l` from the Fourier modes of `½∂²`:
/// `t/l + Σ_{n≠0} (1 - e^{-k_n² t}) / (l k_n²)` with `k_n = 2πn/l`.
fn ew_fourier(t: f64, l: f64) -> f64 {
    // Σ_{n≥1} 2/(ℓ k_n²) = ℓ/12 in closed form; only the decaying part is summed.
    let mut v = t / l + l / 12.0;
    for n in 1..10_000 {
        let k = 2.0 * std::f64::consts::PI * n as f64 / l;
        let term = 2.0 * (-k * k * t).exp() / (l * k * k);
        v -= term;
        if term < 1e-300 {
            break;
        }
    }
    v
}

fn ssep_batch(seed: u64) -> Outcome {
    let eps: f64 = 0.01;
    let t_macro = 1.0;
    let horizon = t_macro / (eps * eps);
    let window = Window::new(-199, 200).unwrap();
    let ring = window.len() as f64 * eps;
    let flat: Vec<u8> = window
        .sites()
        .map(|x| u8::from(x.rem_euclid(2) == 0))
        .collect();
    let h0 = height_from_config(
        &Configuration::new(window, 1, flat, BoundaryMode::Periodic).unwrap(),
        0,
    );
    let model = ssep_model();
    let scaling = ScalingParams::new(eps, DriftSign::None).unwrap();
    let options = EvolveOptions {
        boundary: BoundaryMode::Periodic,
        clocks: ClockScheme::Superposed,
    };
    let mut m = Moments::new();
    for i in 0..1000 {
        let traj = evolve_coupled(
            std::slice::from_ref(&h0),
            &model,
            horizon,
            &[horizon],
            derive_seed(seed, i),
            options,
        )
        .unwrap();
        m.push(scaling.rescale(traj.snapshots[0].heights[0].at(0) as f64, t_macro));
    }
    let oracle = ew_fourier(t_macro, ring);
    let library = ew_variance(t_macro, Some(ring));
    let var = m.variance();
    let rel = (var - oracle).abs() / oracle;
    let skew_ok = m.skewness().abs() <= 3.0 * m.skewness_stderr();
    let oracle_ok = (library - oracle).abs() <= 1e-6 * oracle;
    Outcome::new(
        rel <= 0.15 && skew_ok && oracle_ok,
        format!(
            "variance {var:.4} ± {:.4} vs EW {oracle:.4} (quadrature {library:.4}), rel. error {:.1}%; skewness {:.3} ± {:.3}",
            m.variance_stderr(),
            100.0 * rel,
            m.skewness(),
            m.skewness_stderr()
        ),
    )
}

fn criterion_8() -> Outcome {
    two_batch(0xC8A, 0xC8B, ssep_batch)
}

// ---------------------------------------------------------------------------
// 9. Reproducibility.

fn same_files(a: &Path, b: &Path, names: &[&str]) -> Vec<String> {
    names
        .iter()
        .filter(|n| fs::read(a.join(n)).ok() != fs::read(b.join(n)).ok())
        .map(|n| n.to_string())
        .collect()
}

fn criterion_9() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let files = [
        harness::TRAJECTORY_FILE,
        harness::REPORT_FILE,
        harness::VERDICT_FILE,
        harness::MANIFEST_FILE,
    ];
    let mut problems = Vec::new();
    let mut checked = Vec::new();
    for name in [
        "theorem-mr",
        "lemma-lem1",
        "lemma-lem2",
        "stationarity",
        "asep-qj",
    ] {
        let mut cfg = harness::scenario(name).unwrap();
        cfg.ensemble = 6;
        cfg.record = 3;
        let serial = root.path().join(format!("{name}-serial"));
        let parallel = root.path().join(format!("{name}-parallel"));
        let replayed = root.path().join(format!("{name}-replay"));
        harness::run_experiment(&cfg, &serial, 1).unwrap();
        harness::run_experiment(&cfg, &parallel, 4).unwrap();
        let report = harness::replay(&serial.join(harness::MANIFEST_FILE), &replayed, 2).unwrap();
        if !report.identical {
            problems.push(format!(
                "{name}: replay digests differ in {:?}",
                report.mismatched
            ));
        }
        for (label, dir) in [("parallel", &parallel), ("replay", &replayed)] {
            let diff = same_files(&serial, dir, &files);
            if !diff.is_empty() {
                problems.push(format!("{name}: {label} differs in {diff:?}"));
            }
        }
        checked.push(name);
    }
    // The negative-control coupling uses per-replica streams.
    let mut cfg = qvar_config(0.04, 9, false);
    cfg.ensemble = 4;
    cfg.record = 2;
    let (a, b) = (root.path().join("nc-1"), root.path().join("nc-3"));
    harness::run_experiment(&cfg, &a, 1).unwrap();
    harness::run_experiment(&cfg, &b, 3).unwrap();
    let diff = same_files(&a, &b, &files);
    if !diff.is_empty() {
        problems.push(format!(
            "independent coupling: serial/parallel differ in {diff:?}"
        ));
    }
    checked.push("independent control");
    if problems.is_empty() {
        Outcome::new(
            true,
            format!(
                "byte-identical serial, 4-thread and replayed outputs for {}",
                checked.join(", ")
            ),
        )
    } else {
        Outcome::new(false, problems.join("; "))
    }
}

// ---------------------------------------------------------------------------

type Criterion = (&'static str, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "criterion_1",
            "exact invariants",
            Duration::from_secs(300),
            criterion_1,
        ),
        (
            "criterion_2",
            "generator oracle on a 4-site ring",
            Duration::from_secs(60),
            criterion_2,
        ),
        (
            "criterion_3",
            "stationarity",
            Duration::from_secs(300),
            criterion_3,
        ),
        (
            "criterion_4",
            "martingale structure",
            Duration::from_secs(900),
            criterion_4,
        ),
        (
            "criterion_5",
            "Q_N decay",
            Duration::from_secs(1200),
            criterion_5,
        ),
        (
            "criterion_6",
            "lattice approximation",
            Duration::from_secs(120),
            criterion_6,
        ),
        (
            "criterion_7",
            "moment bounds",
            Duration::from_secs(120),
            criterion_7,
        ),
        (
            "criterion_8",
            "symmetric baseline",
            Duration::from_secs(1800),
            criterion_8,
        ),
        (
            "criterion_9",
            "reproducibility",
            Duration::from_secs(600),
            criterion_9,
        ),
    ];
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    let mut ran = 0;
    for (id, title, budget, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| id.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= budget;
        let pass = outcome.pass && in_budget;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {id} ({title}): {} [{:.1}s of {}s{}]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_budget { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
