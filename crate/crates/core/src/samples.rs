//! Seeded random instances for verification suites and tests.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::gaussian::LocalOp;
use crate::scalar::Real;

/// Random `±1` signed permutation matrix.
pub fn signed_permutation<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<T> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut m = DMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        m[(i, j)] = if rng.random_bool(0.5) {
            T::one()
        } else {
            -T::one()
        };
    }
    m
}

/// Normalized Sylvester–Hadamard matrix of order `2^levels`.
pub fn hadamard<T: Real>(levels: u32) -> DMatrix<T> {
    let n = 1usize << levels;
    let scale = T::one() / T::lit(n as f64).sqrt();
    DMatrix::from_fn(n, n, |i, j| {
        if (i & j).count_ones() % 2 == 0 {
            scale
        } else {
            -scale
        }
    })
}

/// Orthogonal `n × n` block `P₁ (H ⊗ I) P₂` with `H` a normalized Hadamard matrix of order
/// `2^levels`, so every row has `2^levels` entries of magnitude `2^{-levels/2}`. `levels = 0`
/// gives a signed permutation. `n` must be a multiple of `2^levels`.
pub fn hadamard_design<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, levels: u32) -> DMatrix<T> {
    let h = hadamard::<T>(levels);
    let k = h.nrows();
    assert!(n % k == 0, "design order {k} does not divide {n}");
    let core = h.kronecker(&DMatrix::<T>::identity(n / k, n / k));
    signed_permutation::<T, R>(rng, n) * core * signed_permutation::<T, R>(rng, n)
}

/// Random square orthogonal `G₀` of size `n`, using the deepest Hadamard level allowed by
/// `n` (capped at `max_levels`) or a shallower one at random.
pub fn selfinverse_block<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_levels: u32,
) -> DMatrix<T> {
    let deepest = (0..=max_levels)
        .rev()
        .find(|&l| n % (1 << l) == 0)
        .unwrap_or(0);
    let levels = rng.random_range(0..=deepest);
    hadamard_design(rng, n, levels)
}

/// One random local Gaussian gate on `n` modes: a beamsplitter (either orientation), a
/// rotation, or a squeezer.
pub fn random_local_op<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> LocalOp<T> {
    let pick = if n < 2 {
        rng.random_range(1..3)
    } else {
        rng.random_range(0..3)
    };
    match pick {
        0 => {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            LocalOp::beamsplitter(a, b).expect("distinct modes")
        }
        1 => LocalOp::rotation(rng.random_range(0..n), T::lit(rng.random_range(-3.2..3.2))),
        _ => LocalOp::squeezer(rng.random_range(0..n), T::lit(rng.random_range(-0.8..0.8))),
    }
}

pub fn random_history<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    len: usize,
) -> Vec<LocalOp<T>> {
    (0..len).map(|_| random_local_op(rng, n)).collect()
}
