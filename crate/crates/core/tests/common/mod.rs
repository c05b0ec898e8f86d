#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tucker_cross::formats::{Core, TuckerLike, TuckerOrtho};
use tucker_cross::linalg::{random_matrix, random_orthonormal, Matrix};
use tucker_cross::Dense3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Random Tucker-like tensor with a Kron core `g ⊗ h`.
pub fn random_kron(dims: [usize; 3], g: [usize; 3], h: [usize; 3], rng: &mut ChaCha8Rng) -> TuckerLike {
    let core = Core::Kron {
        g: Dense3::random(g, rng),
        h: Dense3::random(h, rng),
    };
    let factors = [0, 1, 2].map(|l| random_matrix(dims[l], g[l] * h[l], rng));
    TuckerLike::new(core, factors).unwrap()
}

pub fn random_dense_tucker(dims: [usize; 3], r: [usize; 3], rng: &mut ChaCha8Rng) -> TuckerLike {
    let core = Core::Dense(Dense3::random(r, rng));
    let factors = [0, 1, 2].map(|l| random_matrix(dims[l], r[l], rng));
    TuckerLike::new(core, factors).unwrap()
}

pub fn random_ortho(dims: [usize; 3], r: [usize; 3], rng: &mut ChaCha8Rng) -> TuckerOrtho {
    let core = Dense3::random(r, rng);
    let factors = [0, 1, 2].map(|l| random_orthonormal(dims[l], r[l], rng));
    TuckerOrtho::new(core, factors).unwrap()
}

/// `B Bᵀ` for a random `n x m` Gaussian `B`.
pub fn random_spsd(n: usize, m: usize, rng: &mut ChaCha8Rng) -> (Matrix, Matrix) {
    let b = random_matrix(n, m, rng);
    let a = &b * b.transpose();
    (b, a)
}
