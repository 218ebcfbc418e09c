//! Recorded input/output pairs of a black-box quantization or measurement,
//! and recovery of the underlying POVM from such a record by linear least
//! squares.
//!
//! A transcript is well formed when its inputs determine the POVM (the
//! design matrix has full column rank). It is explained by a POVM when the
//! least-squares fit reproduces every recorded output within tolerance;
//! otherwise recovery fails with `NotPovm`.

use indexmap::IndexMap;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::duality::Povm;
use crate::effects::ClassicalEffect;
use crate::error::{Error, Result};
use crate::frame::tomography_frame;
use crate::matrix::{ComplexMatrix, Tolerance};
use crate::random;
use crate::space::OutcomeSpace;
use crate::states::DensityMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementRecord {
    pub state: ComplexMatrix,
    pub outcome: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizationRecord {
    pub event: IndexMap<String, f64>,
    pub effect: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Transcript {
    Measurement {
        space: OutcomeSpace,
        dim: usize,
        records: Vec<MeasurementRecord>,
    },
    Quantization {
        space: OutcomeSpace,
        dim: usize,
        records: Vec<QuantizationRecord>,
    },
}

impl Transcript {
    /// Measurement statistics of `povm` on the tomography frame states
    /// followed by `extra` random states.
    pub fn record_measurement(povm: &Povm, extra: usize, seed: u64) -> Result<Self> {
        let d = povm.dim();
        let mut rng = random::seeded(seed);
        let mut states: Vec<ComplexMatrix> = tomography_frame(d);
        states.extend((0..extra).map(|_| random::density_matrix(&mut rng, d).operator().clone()));
        let records = states
            .into_iter()
            .map(|state| {
                let p = povm.probabilities(&DensityMatrix::from_trusted(state.clone()))?;
                Ok(MeasurementRecord {
                    state,
                    outcome: povm.space().keyed(&p),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::Measurement {
            space: povm.space().clone(),
            dim: d,
            records,
        })
    }

    /// Quantized indicator functions followed by `extra` random events.
    pub fn record_quantization(povm: &Povm, extra: usize, seed: u64) -> Result<Self> {
        let space = povm.space();
        let mut rng = random::seeded(seed);
        let mut events: Vec<ClassicalEffect> = (0..space.len())
            .map(|k| ClassicalEffect::indicator(space.clone(), k))
            .collect();
        events.extend((0..extra).map(|_| random::classical_effect(&mut rng, space)));
        let records = events
            .iter()
            .map(|f| {
                Ok(QuantizationRecord {
                    event: space.keyed(f.values()),
                    effect: povm.integrate_real(f.values())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::Quantization {
            space: space.clone(),
            dim: povm.dim(),
            records,
        })
    }

    pub fn space(&self) -> &OutcomeSpace {
        match self {
            Self::Measurement { space, .. } | Self::Quantization { space, .. } => space,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Measurement { records, .. } => records.len(),
            Self::Quantization { records, .. } => records.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Result of [`recover_povm`].
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub povm: Povm,
    /// Largest absolute difference between a recorded output and the output
    /// predicted by the fitted POVM.
    pub residual: f64,
}

pub fn recover_povm(t: &Transcript, tol: Tolerance) -> Result<Recovery> {
    match t {
        Transcript::Measurement { space, dim, records } => recover_from_measurement(space, *dim, records, tol),
        Transcript::Quantization { space, dim, records } => recover_from_quantization(space, *dim, records, tol),
    }
}

/// Least-squares solve of `A·X = B` with a rank check on `A`. Returns the
/// solution and the max-entry residual.
fn least_squares(a: DMatrix<f64>, b: &DMatrix<f64>, what: &str) -> Result<(DMatrix<f64>, f64)> {
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = 1e-10 * top.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if rank < a.ncols() {
        return Err(Error::InvalidTranscript(format!(
            "{what} do not determine the POVM (rank {rank} of {} needed)",
            a.ncols()
        )));
    }
    let x = svd
        .solve(b, cutoff)
        .map_err(|e| Error::InvalidTranscript(e.to_string()))?;
    let residual = (&a * &x - b).amax();
    Ok((x, residual))
}

fn check_residual(residual: f64, tol: Tolerance) -> Result<()> {
    if residual > tol.eps() {
        return Err(Error::NotPovm(format!(
            "records are not reproduced by any POVM (residual {residual:e})"
        )));
    }
    Ok(())
}

fn recover_from_measurement(
    space: &OutcomeSpace,
    dim: usize,
    records: &[MeasurementRecord],
    tol: Tolerance,
) -> Result<Recovery> {
    let n = space.len();
    let params = dim * dim;
    let mut a = DMatrix::<f64>::zeros(records.len(), params);
    let mut b = DMatrix::<f64>::zeros(records.len(), n);
    for (r, rec) in records.iter().enumerate() {
        let rho = DensityMatrix::new(rec.state.clone(), tol)
            .map_err(|e| Error::InvalidTranscript(format!("records[{r}].state: {e}")))?;
        if rho.dim() != dim {
            return Err(Error::InvalidTranscript(format!(
                "records[{r}].state has dimension {}, expected {dim}",
                rho.dim()
            )));
        }
        let p = space
            .align(&rec.outcome, &format!("records[{r}].outcome"))
            .map_err(|e| Error::InvalidTranscript(e.to_string()))?;
        // Tr[ρE] = Σᵢ ρᵢᵢEᵢᵢ + Σ_{i<j} 2(Re ρᵢⱼ Re Eᵢⱼ + Im ρᵢⱼ Im Eᵢⱼ)
        let m = rho.operator();
        let mut col = 0;
        for i in 0..dim {
            a[(r, col)] = m[(i, i)].re;
            col += 1;
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                a[(r, col)] = 2.0 * m[(i, j)].re;
                a[(r, col + 1)] = 2.0 * m[(i, j)].im;
                col += 2;
            }
        }
        for (x, v) in p.into_iter().enumerate() {
            b[(r, x)] = v;
        }
    }
    let (theta, residual) = least_squares(a, &b, "states")?;
    check_residual(residual, tol)?;
    let ops = (0..n)
        .map(|x| {
            let mut e = ComplexMatrix::zeros(dim, dim);
            let mut col = 0;
            for i in 0..dim {
                e[(i, i)] = Complex64::new(theta[(col, x)], 0.0);
                col += 1;
            }
            for i in 0..dim {
                for j in (i + 1)..dim {
                    let z = Complex64::new(theta[(col, x)], theta[(col + 1, x)]);
                    e[(i, j)] = z;
                    e[(j, i)] = z.conj();
                    col += 2;
                }
            }
            e
        })
        .collect();
    let povm = Povm::from_operators(space.clone(), ops, tol).map_err(as_not_povm)?;
    Ok(Recovery { povm, residual })
}

fn recover_from_quantization(
    space: &OutcomeSpace,
    dim: usize,
    records: &[QuantizationRecord],
    tol: Tolerance,
) -> Result<Recovery> {
    let n = space.len();
    let mut a = DMatrix::<f64>::zeros(records.len(), n);
    let mut b = DMatrix::<f64>::zeros(records.len(), 2 * dim * dim);
    for (r, rec) in records.iter().enumerate() {
        let f = space
            .align(&rec.event, &format!("records[{r}].event"))
            .map_err(|e| Error::InvalidTranscript(e.to_string()))?;
        let f = ClassicalEffect::new(space.clone(), f, tol)
            .map_err(|e| Error::InvalidTranscript(format!("records[{r}].event: {e}")))?;
        if rec.effect.rows() != dim || rec.effect.cols() != dim {
            return Err(Error::InvalidTranscript(format!(
                "records[{r}].effect is {}x{}, expected {dim}x{dim}",
                rec.effect.rows(),
                rec.effect.cols()
            )));
        }
        for (x, &v) in f.values().iter().enumerate() {
            a[(r, x)] = v;
        }
        for (k, z) in rec.effect.data().iter().enumerate() {
            b[(r, 2 * k)] = z.re;
            b[(r, 2 * k + 1)] = z.im;
        }
    }
    let (sol, residual) = least_squares(a, &b, "events")?;
    check_residual(residual, tol)?;
    let ops = (0..n)
        .map(|x| {
            let data = (0..dim * dim)
                .map(|k| Complex64::new(sol[(x, 2 * k)], sol[(x, 2 * k + 1)]))
                .collect();
            ComplexMatrix::new(dim, dim, data).expect("dim² entries")
        })
        .collect();
    let povm = Povm::from_operators(space.clone(), ops, tol).map_err(as_not_povm)?;
    Ok(Recovery { povm, residual })
}

fn as_not_povm(e: Error) -> Error {
    match e {
        Error::NotEffect(msg) => Error::NotPovm(format!("recovered operator is not an effect: {msg}")),
        Error::NotHermitian(d) => Error::NotPovm(format!("recovered operator is not Hermitian ({d:e})")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::random_povm;
    use crate::fixtures;

    #[test]
    fn measurement_round_trip() {
        for (d, n, seed) in [(1, 2, 1), (2, 3, 2), (4, 5, 3)] {
            let povm = random_povm(d, n, seed).unwrap();
            let t = Transcript::record_measurement(&povm, 5, seed).unwrap();
            let json = serde_json::to_string(&t).unwrap();
            let t: Transcript = serde_json::from_str(&json).unwrap();
            let rec = recover_povm(&t, Tolerance::default()).unwrap();
            assert!(rec.povm.max_entry_distance(&povm).unwrap() < 1e-10);
        }
    }

    #[test]
    fn quantization_round_trip() {
        let povm = fixtures::trine();
        let t = Transcript::record_quantization(&povm, 3, 9).unwrap();
        let rec = recover_povm(&t, Tolerance::default()).unwrap();
        assert!(rec.povm.max_entry_distance(&povm).unwrap() < 1e-12);
    }

    #[test]
    fn underdetermined_transcript_is_rejected() {
        let povm = fixtures::trine();
        let Transcript::Measurement {
            space,
            dim,
            mut records,
        } = Transcript::record_measurement(&povm, 0, 0).unwrap()
        else {
            unreachable!()
        };
        records.truncate(2);
        let t = Transcript::Measurement { space, dim, records };
        assert!(matches!(
            recover_povm(&t, Tolerance::default()),
            Err(Error::InvalidTranscript(_))
        ));
    }

    #[test]
    fn inconsistent_transcript_is_rejected() {
        let povm = fixtures::trine();
        let Transcript::Quantization {
            space,
            dim,
            mut records,
        } = Transcript::record_quantization(&povm, 4, 0).unwrap()
        else {
            unreachable!()
        };
        records[4].effect = ComplexMatrix::identity(2).scale(0.5);
        let t = Transcript::Quantization { space, dim, records };
        assert!(matches!(recover_povm(&t, Tolerance::default()), Err(Error::NotPovm(_))));
    }
}
