//! Exact sampling of quadrature outcomes for weak-limit pointer states.
//!
//! For `|φ⟩ ∝ |0⟩ + c|1⟩` the outcome density of a dimensionless quadrature
//! `u` is `N(u)·|1 + c' u|²/(1 + |c'|²)` with `N` the standard normal and
//! `c'` depending on the quadrature: `c' = c` for `X = a + a†` and
//! `c' = −ic` for `P = i(a† − a)`, because `⟨x|1⟩ = x⟨x|0⟩` and
//! `⟨p|1⟩ = −i p⟨p|0⟩`.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Mixes a base seed with an index into an independent 64-bit seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Draws `u` from `N(u)·|1 + c u|²/(1 + |c|²)`.
///
/// Rejection sampling against `g(u) = N(u)(1 + |c|²u²)/(1 + |c|²)`, itself a
/// two-component mixture of `N(u)` and `u²N(u)`. With `a = Re c`, `b = |c|²`
/// the ratio `(1 + 2au + bu²)/(1 + bu²)` never exceeds `1 + |a|/√b ≤ 2`, so
/// at least half of the proposals are accepted.
pub fn sample_quadrature<R: Rng + ?Sized>(c: C64, rng: &mut R) -> f64 {
    let a = c.re;
    let b = c.norm_sqr();
    if b == 0.0 {
        return rng.sample(StandardNormal);
    }
    let envelope = 1.0 + a.abs() / b.sqrt();
    loop {
        let u = if rng.random::<f64>() * (1.0 + b) < 1.0 {
            rng.sample::<f64, _>(StandardNormal)
        } else {
            let r2: f64 = (0..3).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum();
            if rng.random::<bool>() {
                r2.sqrt()
            } else {
                -r2.sqrt()
            }
        };
        let ratio = (1.0 + 2.0 * a * u + b * u * u) / (1.0 + b * u * u);
        if rng.random::<f64>() * envelope <= ratio {
            return u;
        }
    }
}

/// Position outcome `z = σX` for the state `κ[|0⟩ + i g₀ S_w |1⟩]`.
pub fn sample_position<R: Rng + ?Sized>(s_w: C64, g0: f64, sigma: f64, rng: &mut R) -> f64 {
    sigma * sample_quadrature(C64::new(0.0, g0) * s_w, rng)
}

/// Momentum outcome `p = P/(2σ)` for the state `κ[|0⟩ + i g₀ S_w |1⟩]`.
pub fn sample_momentum<R: Rng + ?Sized>(s_w: C64, g0: f64, sigma: f64, rng: &mut R) -> f64 {
    sample_quadrature(s_w * g0, rng) / (2.0 * sigma)
}
