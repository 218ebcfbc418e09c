//! Seeded samplers for every value type. All randomness in the crate flows
//! through [`SeededRng`] so that identical seeds give identical runs.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::effects::{ClassicalEffect, QuantumEffect};
use crate::matrix::{ComplexMatrix, Tolerance};
use crate::space::OutcomeSpace;
use crate::states::{DensityMatrix, ProbabilityVector};

/// Generator behind every seeded run; named in reports.
pub type SeededRng = ChaCha8Rng;

/// Identifier recorded in reports so a run can be reproduced.
pub const RNG_ALGORITHM: &str = "chacha8";

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: RngCore + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: RngCore + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn hermitian<R: RngCore + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ginibre(rng, dim, dim).hermitian_part()
}

/// `B†B` for a Ginibre `B` of the given rank.
pub fn psd<R: RngCore + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> ComplexMatrix {
    let b = ginibre(rng, rank.max(1), dim);
    (&b.adjoint() * &b).hermitian_part()
}

/// Haar-ish unitary from the Gram–Schmidt of a Ginibre matrix.
pub fn unitary<R: RngCore + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v: Vec<Complex64> = (0..dim).map(|i| g[(i, j)]).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Random quantum effect: a scaled PSD matrix with spectrum inside `[0, 1]`.
pub fn quantum_effect<R: RngCore + ?Sized>(rng: &mut R, dim: usize) -> QuantumEffect {
    let rank = rng.random_range(1..=dim);
    let g = psd(rng, dim, rank);
    let top = g
        .hermitian_eigenvalues(Tolerance::default())
        .expect("Gram matrices are Hermitian")[dim - 1];
    let u: f64 = rng.random_range(0.0..1.0);
    let op = g.scale(u / top.max(f64::MIN_POSITIVE));
    QuantumEffect::new(op, Tolerance::default()).expect("scaled Gram matrix is an effect")
}

/// Random density matrix `G / Tr G` with a random rank.
pub fn density_matrix<R: RngCore + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let rank = rng.random_range(1..=dim);
    let g = psd(rng, dim, rank);
    let tr = g.trace().expect("square").re;
    DensityMatrix::new(g.scale(1.0 / tr), Tolerance::default()).expect("normalized Gram matrix is a state")
}

pub fn classical_effect<R: RngCore + ?Sized>(rng: &mut R, space: &OutcomeSpace) -> ClassicalEffect {
    let values = (0..space.len()).map(|_| rng.random_range(0.0..=1.0)).collect();
    ClassicalEffect::new(space.clone(), values, Tolerance::default()).expect("values in [0,1]")
}

/// Random real function on the space with values in `[-scale, scale]`.
pub fn real_function<R: RngCore + ?Sized>(rng: &mut R, space: &OutcomeSpace, scale: f64) -> Vec<f64> {
    (0..space.len()).map(|_| rng.random_range(-scale..=scale)).collect()
}

/// Probability vector from normalized exponential draws (uniform on the simplex).
pub fn probability_vector<R: RngCore + ?Sized>(rng: &mut R, space: &OutcomeSpace) -> ProbabilityVector {
    let raw: Vec<f64> = (0..space.len())
        .map(|_| -rng.random_range(f64::MIN_POSITIVE..1.0f64).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    ProbabilityVector::new(space.clone(), weights, Tolerance::default()).expect("normalized weights")
}

pub fn unit_interval<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(0.0..=1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded(3);
        for d in 1..5 {
            let u = unitary(&mut rng, d);
            let uu = &u.adjoint() * &u;
            assert!(uu.max_abs_diff(&ComplexMatrix::identity(d)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn samplers_are_deterministic() {
        let a = density_matrix(&mut seeded(9), 3);
        let b = density_matrix(&mut seeded(9), 3);
        assert_eq!(a, b);
    }
}
