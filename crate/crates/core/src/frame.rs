//! Informationally complete frame of rank-one projectors used for linear
//! inversion. Every element is simultaneously a valid effect and a pure
//! state, so the same frame serves state reconstruction from a functional on
//! effects and effect reconstruction from a functional on states.
//!
//! Ordering: `|i⟩⟨i|` for each `i`, then for each `i < j` the pair
//! `½(|i⟩+|j⟩)(⟨i|+⟨j|)` and `½(|i⟩+i|j⟩)(⟨i|−i⟨j|)`.

use num_complex::Complex64;

use crate::matrix::{ComplexMatrix, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameSlot {
    Diagonal(usize),
    Real(usize, usize),
    Imaginary(usize, usize),
}

pub fn frame_slots(dim: usize) -> Vec<FrameSlot> {
    let mut slots: Vec<FrameSlot> = (0..dim).map(FrameSlot::Diagonal).collect();
    for i in 0..dim {
        for j in (i + 1)..dim {
            slots.push(FrameSlot::Real(i, j));
            slots.push(FrameSlot::Imaginary(i, j));
        }
    }
    slots
}

pub fn frame_element(dim: usize, slot: FrameSlot) -> ComplexMatrix {
    let mut v = vec![ZERO; dim];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match slot {
        FrameSlot::Diagonal(i) => v[i] = ONE,
        FrameSlot::Real(i, j) => {
            v[i] = Complex64::new(s, 0.0);
            v[j] = Complex64::new(s, 0.0);
        }
        FrameSlot::Imaginary(i, j) => {
            v[i] = Complex64::new(s, 0.0);
            v[j] = Complex64::new(0.0, s);
        }
    }
    ComplexMatrix::outer(&v)
}

/// The `dim²` frame projectors in canonical order.
pub fn tomography_frame(dim: usize) -> Vec<ComplexMatrix> {
    frame_slots(dim).into_iter().map(|s| frame_element(dim, s)).collect()
}

/// Recovers the Hermitian `M` with `Tr[P_k M] = values[k]` for every frame
/// element `P_k`.
///
/// `Tr[P_ii M] = M_ii`, `Tr[X_ij M] = ½(M_ii+M_jj) + Re M_ij` and
/// `Tr[Y_ij M] = ½(M_ii+M_jj) − Im M_ij`.
pub fn invert_frame(dim: usize, values: &[f64]) -> ComplexMatrix {
    assert_eq!(values.len(), dim * dim, "one value per frame element");
    let slots = frame_slots(dim);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (slot, &v) in slots.iter().zip(values) {
        if let FrameSlot::Diagonal(i) = *slot {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
    }
    for (slot, &v) in slots.iter().zip(values) {
        match *slot {
            FrameSlot::Diagonal(_) => {}
            FrameSlot::Real(i, j) => {
                let mean = 0.5 * (m[(i, i)].re + m[(j, j)].re);
                let re = v - mean;
                m[(i, j)].re = re;
                m[(j, i)].re = re;
            }
            FrameSlot::Imaginary(i, j) => {
                let mean = 0.5 * (m[(i, i)].re + m[(j, j)].re);
                let im = mean - v;
                m[(i, j)].im = im;
                m[(j, i)].im = -im;
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Tolerance;
    use crate::random::{hermitian, seeded};

    #[test]
    fn frame_elements_are_rank_one_projectors() {
        let tol = Tolerance::default();
        for d in 1..5 {
            let frame = tomography_frame(d);
            assert_eq!(frame.len(), d * d);
            for p in &frame {
                assert!((p.trace().unwrap().re - 1.0).abs() < 1e-15);
                assert!((p * p).max_abs_diff(p).unwrap() < 1e-15);
                assert!(p.is_psd(tol).unwrap());
            }
        }
    }

    #[test]
    fn inversion_recovers_hidden_hermitian() {
        let mut rng = seeded(11);
        for d in 1..6 {
            let hidden = hermitian(&mut rng, d);
            let values: Vec<f64> = tomography_frame(d)
                .iter()
                .map(|p| p.trace_product(&hidden).unwrap().re)
                .collect();
            let got = invert_frame(d, &values);
            assert!(got.max_abs_diff(&hidden).unwrap() < 1e-13);
        }
    }
}
