//! Seeded samplers for bases, states, correlation matrices and weights.
//!
//! All samplers take a caller-supplied RNG; [`seeded`] gives the portable
//! ChaCha stream used by the CLI and the test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::channels::CorrelationMatrix;
use crate::matrix::{outer, Complex64, ComplexMatrix};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian (independent N(0,1) real and imaginary parts).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-random unitary: Gram-Schmidt on a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(d, d, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v: Vec<Complex64> = (0..d).map(|i| g[(i, j)]).collect();
        // Two passes keep the columns orthonormal to machine precision.
        for _ in 0..2 {
            for u in &cols {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Uniformly random unit vector (`d x 1`).
pub fn random_pure_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let v = ginibre(d, 1, rng);
    let norm = v.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.scale_real(1.0 / norm)
}

/// Full-rank random density matrix `G G† / tr(G G†)`.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(d, d, rng);
    let w = &g * &g.dagger();
    let t = w.trace().re;
    w.scale_real(1.0 / t).hermitian_part()
}

pub fn random_pure_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let v = random_pure_vector(d, rng);
    outer(&v, &v)
}

/// Unit-diagonal PSD matrix `D^{-1/2} G†G D^{-1/2}` with `D = diag(G†G)`.
pub fn random_correlation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CorrelationMatrix {
    let g = ginibre(d, d, rng);
    let gram = &g.dagger() * &g;
    let inv_sqrt: Vec<f64> = gram.diagonal().iter().map(|z| 1.0 / z.re.sqrt()).collect();
    let mut b = ComplexMatrix::from_fn(d, d, |i, j| gram[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    for i in 0..d {
        b[(i, i)] = Complex64::new(1.0, 0.0);
    }
    CorrelationMatrix::new(b.hermitian_part()).expect("normalized Gram matrix is a valid correlation")
}

/// Dirichlet(1, …, 1) weights via normalized exponentials.
pub fn dirichlet_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub fn random_phases<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    (0..k)
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect()
}

/// Random permutation of `0..n` (Fisher-Yates).
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}
