//! Fixtures shared by the benchmarks.

use asep_coupling::initdata::{approx_viable_pair, bernoulli_height, SmoothProfile};
use asep_coupling::{HeightFunction, Window};

/// `𝒜^ε` of tanh and the damped sine on `[-half_width - 1, half_width]`.
pub fn approx_pair(epsilon: f64, half_width: i64) -> [HeightFunction; 2] {
    let f = SmoothProfile::tanh(1.0, 0.5).expect("tanh profile");
    let g = SmoothProfile::sin_damped(0.5).expect("sine profile");
    let window = Window::new(-half_width - 1, half_width).expect("window");
    let (a, b) = approx_viable_pair(&f, &g, epsilon, window).expect("approximation");
    [a.height, b.height]
}

/// Bernoulli(½) height on `[-half_width, half_width]`.
pub fn bernoulli(half_width: i64, seed: u64) -> HeightFunction {
    bernoulli_height(0.5, Window::symmetric(half_width), seed).expect("bernoulli height")
}
