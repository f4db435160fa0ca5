//! Shared helpers for the integration batteries: independent scalar
//! oracles, deterministic random inputs, and small matrix utilities.
//!
//! The oracles here deliberately avoid the crate's own evaluation paths so
//! that agreement is evidence, not circularity.

#![allow(dead_code)]

use catflip_core::fock_core::{Ket, OperatorMatrix};
use catflip_core::C64;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

pub fn assert_rel(got: f64, want: f64, tol: f64, label: &str) {
    let r = rel_err(got, want);
    assert!(
        r <= tol,
        "{label}: got {got:.12e}, want {want:.12e}, rel err {r:.3e} > {tol:.1e}"
    );
}

pub fn assert_abs(got: f64, want: f64, tol: f64, label: &str) {
    let d = (got - want).abs();
    assert!(
        d <= tol,
        "{label}: got {got:.12e}, want {want:.12e}, abs err {d:.3e} > {tol:.1e}"
    );
}

// ---------------------------------------------------------------------------
// Independent scalar oracles (compensated direct series).

/// Kahan-compensated sum of a term iterator.
fn kahan_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for t in terms {
        let y = t - carry;
        let s = sum + y;
        carry = (s - sum) - y;
        sum = s;
    }
    sum
}

/// `∫₀ˣ sinh t / t dt` by its everywhere-positive Taylor series.  All terms
/// share one sign, so there is no cancellation at any `x` below overflow.
pub fn oracle_shi(x: f64) -> f64 {
    let mut terms = Vec::new();
    let mut term = x;
    let mut k = 0u64;
    loop {
        terms.push(term / (2 * k + 1) as f64);
        term *= x * x / ((2 * k + 2) as f64 * (2 * k + 3) as f64);
        k += 1;
        if term < 1e-300 || term / (2 * k + 1) as f64 <= f64::EPSILON * terms[0].max(term) && k > 4 {
            break;
        }
        if k > 400 {
            break;
        }
    }
    kahan_sum(terms.into_iter())
}

/// `∫₀ˣ (cosh t − 1)/t dt`, same positive-series argument.
pub fn oracle_chin(x: f64) -> f64 {
    let mut terms = Vec::new();
    let mut term = x * x / 2.0; // x^2/2!
    let mut k = 1u64;
    loop {
        terms.push(term / (2 * k) as f64);
        term *= x * x / ((2 * k + 1) as f64 * (2 * k + 2) as f64);
        k += 1;
        if term < 1e-300 || (term / (2 * k) as f64) <= f64::EPSILON * terms[0].max(term) && k > 4 {
            break;
        }
        if k > 400 {
            break;
        }
    }
    kahan_sum(terms.into_iter())
}

/// `∫₀ˣ (1−e^{−t})/t dt` via the alternating series; accurate only for
/// moderate `|x|` (≤ 16 or so), which is all the batteries ask of it.
pub fn oracle_ein(x: f64) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    let mut term = x; // x^k / k!
    let mut k = 1u64;
    loop {
        let contrib = term / k as f64;
        let y = contrib - carry;
        let s = sum + y;
        carry = (s - sum) - y;
        sum = s;
        k += 1;
        term *= -x / k as f64;
        if term.abs() / k as f64 <= 1e-25 * sum.abs().max(1.0) || k > 700 {
            break;
        }
    }
    sum
}

// ---------------------------------------------------------------------------
// Matrix helpers.

pub fn max_abs(m: &OperatorMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &OperatorMatrix) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn ket_norm(v: &Ket) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(d: usize) -> OperatorMatrix {
    Array2::eye(d)
}

pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    a.dot(b) - b.dot(a)
}

/// Dense trace computed independently of the crate's helper.
pub fn trace(m: &OperatorMatrix) -> C64 {
    (0..m.nrows()).map(|i| m[[i, i]]).sum()
}

pub fn random_complex_matrix(rng: &mut ChaCha8Rng, d: usize) -> OperatorMatrix {
    Array2::from_shape_fn((d, d), |_| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> OperatorMatrix {
    let m = random_complex_matrix(rng, d);
    let md = m.t().mapv(|c| c.conj());
    (&m + &md).mapv(|c| c * 0.5)
}

pub fn random_ket(rng: &mut ChaCha8Rng, d: usize) -> Ket {
    Array1::from_shape_fn(d, |_| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Random density matrix: normalized Gram matrix of a random rectangle.
pub fn random_density(rng: &mut ChaCha8Rng, d: usize) -> OperatorMatrix {
    let m = random_complex_matrix(rng, d);
    let md = m.t().mapv(|c| c.conj());
    let g = m.dot(&md);
    let tr = trace(&g);
    g.mapv(|c| c / tr)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}
