//! Classical and quantum state spaces and the extraction of a representing
//! effect (resp. density operator) from a black-box affine functional.

use indexmap::IndexMap;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::effects::{ClassicalEffect, Effect, OperatorRepr, QuantumEffect};
use crate::error::{dim_mismatch, Error, Result};
use crate::frame::{invert_frame, tomography_frame};
use crate::matrix::{ComplexMatrix, Tolerance};
use crate::random;
use crate::space::OutcomeSpace;

/// Convex-space structure shared by both state flavors.
pub trait ConvexState: Clone + std::fmt::Debug + Sized {
    /// `c_r(s, t) = r·s + (1−r)·t`.
    fn convex_combine(r: f64, s: &Self, t: &Self) -> Result<Self>;
    /// Max-entry distance, used by tests and probes.
    fn distance(&self, other: &Self) -> Result<f64>;
    fn sample_like(&self, rng: &mut dyn RngCore) -> Self;
}

pub fn convex_combine<S: ConvexState>(r: f64, s: &S, t: &S) -> Result<S> {
    S::convex_combine(r, s, t)
}

fn check_weight(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::ScalarOutOfRange(r))
    }
}

// ---------------------------------------------------------------------------
// Probability vectors

/// A probability measure on a finite outcome space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProbabilityRepr", into = "ProbabilityRepr")]
pub struct ProbabilityVector {
    space: OutcomeSpace,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbabilityRepr {
    space: OutcomeSpace,
    weights: IndexMap<String, f64>,
}

impl TryFrom<ProbabilityRepr> for ProbabilityVector {
    type Error = Error;
    fn try_from(r: ProbabilityRepr) -> Result<Self> {
        let weights = r.space.align(&r.weights, "weights")?;
        ProbabilityVector::new(r.space, weights, Tolerance::default())
    }
}

impl From<ProbabilityVector> for ProbabilityRepr {
    fn from(p: ProbabilityVector) -> Self {
        ProbabilityRepr {
            weights: p.space.keyed(&p.weights),
            space: p.space,
        }
    }
}

impl ProbabilityVector {
    /// Weights must be `≥ −eps` (clamped to zero, and to one from above)
    /// and sum to one within `eps`.
    pub fn new(space: OutcomeSpace, weights: Vec<f64>, tol: Tolerance) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(dim_mismatch(space.len(), weights.len()));
        }
        let eps = tol.eps();
        for (k, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < -eps {
                return Err(Error::NotState(format!(
                    "weight {w} at `{}` is negative",
                    space.label(k)
                )));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > eps {
            return Err(Error::NotState(format!("weights sum to {total}, not 1")));
        }
        let weights = weights.into_iter().map(|w| clamp_probability(w, tol)).collect();
        Ok(Self { space, weights })
    }

    pub fn point_mass(space: OutcomeSpace, k: usize) -> Self {
        let weights = (0..space.len()).map(|j| if j == k { 1.0 } else { 0.0 }).collect();
        Self { space, weights }
    }

    pub fn uniform(space: OutcomeSpace) -> Self {
        let n = space.len();
        Self {
            space,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, label: &str) -> Option<f64> {
        self.space.index_of(label).map(|k| self.weights[k])
    }

    /// `∫ f dμ = Σₓ f(x) μ(x)`.
    pub fn integrate(&self, f: &ClassicalEffect) -> Result<f64> {
        self.space.require_same(f.space())?;
        Ok(self.weights.iter().zip(f.values()).map(|(w, v)| w * v).sum())
    }
}

impl ConvexState for ProbabilityVector {
    fn convex_combine(r: f64, s: &Self, t: &Self) -> Result<Self> {
        check_weight(r)?;
        s.space.require_same(&t.space)?;
        let weights = s
            .weights
            .iter()
            .zip(&t.weights)
            .map(|(a, b)| r * a + (1.0 - r) * b)
            .collect();
        Self::new(s.space.clone(), weights, Tolerance::default())
    }

    fn distance(&self, other: &Self) -> Result<f64> {
        self.space.require_same(&other.space)?;
        Ok(self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn sample_like(&self, rng: &mut dyn RngCore) -> Self {
        random::probability_vector(rng, &self.space)
    }
}

// ---------------------------------------------------------------------------
// Density matrices

/// Positive semidefinite operator of unit trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct DensityMatrix {
    operator: ComplexMatrix,
}

impl TryFrom<OperatorRepr> for DensityMatrix {
    type Error = Error;
    fn try_from(r: OperatorRepr) -> Result<Self> {
        DensityMatrix::new(r.checked()?, Tolerance::default())
    }
}

impl From<DensityMatrix> for OperatorRepr {
    fn from(d: DensityMatrix) -> Self {
        OperatorRepr {
            dim: d.dim(),
            operator: d.operator,
        }
    }
}

impl DensityMatrix {
    pub fn new(operator: ComplexMatrix, tol: Tolerance) -> Result<Self> {
        if !operator.is_square() {
            return Err(Error::NotSquare {
                rows: operator.rows(),
                cols: operator.cols(),
            });
        }
        let defect = operator.hermiticity_defect()?;
        if defect > tol.eps() {
            return Err(Error::NotState(format!(
                "operator is not Hermitian (deviation {defect:e})"
            )));
        }
        let tr = operator.trace()?.re;
        if (tr - 1.0).abs() > tol.eps() {
            return Err(Error::NotState(format!("trace is {tr}, not 1")));
        }
        let lo = operator.hermitian_eigenvalues(tol)?[0];
        if lo < -tol.eps() {
            return Err(Error::NotState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(Self {
            operator: operator.hermitian_part(),
        })
    }

    pub(crate) fn from_trusted(operator: ComplexMatrix) -> Self {
        Self { operator }
    }

    /// `|k⟩⟨k|`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        Self::from_trusted(ComplexMatrix::basis_projector(dim, k))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.operator.rows()
    }

    pub fn operator(&self) -> &ComplexMatrix {
        &self.operator
    }
}

impl ConvexState for DensityMatrix {
    fn convex_combine(r: f64, s: &Self, t: &Self) -> Result<Self> {
        check_weight(r)?;
        if s.dim() != t.dim() {
            return Err(dim_mismatch(s.dim(), t.dim()));
        }
        let op = &s.operator.scale(r) + &t.operator.scale(1.0 - r);
        Self::new(op, Tolerance::default())
    }

    fn distance(&self, other: &Self) -> Result<f64> {
        self.operator.max_abs_diff(&other.operator)
    }

    fn sample_like(&self, rng: &mut dyn RngCore) -> Self {
        random::density_matrix(rng, self.dim())
    }
}

/// Clamps a numerically computed probability: values within `eps` outside
/// `[0, 1]` snap to the boundary. Every probability the crate reports goes
/// through here.
pub fn clamp_probability(p: f64, tol: Tolerance) -> f64 {
    let eps = tol.eps();
    p.clamp(-eps, 1.0 + eps).clamp(0.0, 1.0)
}

/// `Tr[ρE]`, clamped into `[0, 1]`.
pub fn expectation(rho: &DensityMatrix, e: &QuantumEffect) -> Result<f64> {
    if rho.dim() != e.dim() {
        return Err(dim_mismatch(rho.dim(), e.dim()));
    }
    let raw = rho.operator.trace_product(e.operator())?.re;
    Ok(clamp_probability(raw, Tolerance::default()))
}

/// Effect distinguishing two states: the projector onto the top eigenvector
/// of `ρ − σ`. `None` when the states coincide within `tol`.
pub fn separating_effect(rho: &DensityMatrix, sigma: &DensityMatrix, tol: Tolerance) -> Result<Option<QuantumEffect>> {
    let diff = rho.operator.try_sub(&sigma.operator)?;
    let eig = diff.hermitian_eigen(tol)?;
    let (lo, hi) = (eig.values[0], eig.values[eig.values.len() - 1]);
    if hi.max(-lo) <= tol.eps() {
        return Ok(None);
    }
    // Tr(ρ−σ) = 0, so the top eigenvalue is positive whenever ρ ≠ σ
    let v = eig.vector(eig.values.len() - 1);
    Ok(Some(QuantumEffect::from_trusted(ComplexMatrix::outer(&v))))
}

/// Classical counterpart: the indicator of `{x : μ(x) > ν(x)}`.
pub fn separating_classical_effect(
    mu: &ProbabilityVector,
    nu: &ProbabilityVector,
    tol: Tolerance,
) -> Result<Option<ClassicalEffect>> {
    if mu.distance(nu)? <= tol.eps() {
        return Ok(None);
    }
    let values = mu
        .weights
        .iter()
        .zip(&nu.weights)
        .map(|(a, b)| if a > b { 1.0 } else { 0.0 })
        .collect();
    ClassicalEffect::new(mu.space.clone(), values, tol).map(Some)
}

// ---------------------------------------------------------------------------
// Affine functionals

/// Black-box `[0,1]`-valued functional. Evaluation must be pure.
pub trait AffineFunctional<S: ?Sized> {
    fn evaluate(&self, s: &S) -> f64;
}

impl<S: ?Sized, F: Fn(&S) -> f64> AffineFunctional<S> for F {
    fn evaluate(&self, s: &S) -> f64 {
        self(s)
    }
}

/// Parameters for probing a black-box functional for affinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinityProbe {
    pub triples: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for AffinityProbe {
    fn default() -> Self {
        Self {
            triples: 50,
            threshold: 1e-8,
            seed: 0x00af_f1e0,
        }
    }
}

impl AffinityProbe {
    /// Largest `|φ(c_r(s,t)) − rφ(s) − (1−r)φ(t)|` over random triples.
    pub fn max_violation<S>(
        &self,
        phi: &dyn Fn(&S) -> f64,
        sample: &dyn Fn(&mut dyn RngCore) -> S,
        combine: &dyn Fn(f64, &S, &S) -> Result<S>,
    ) -> Result<f64> {
        let mut rng = random::seeded(self.seed);
        let mut worst = 0.0f64;
        for _ in 0..self.triples {
            let s = sample(&mut rng);
            let t = sample(&mut rng);
            let r = random::unit_interval(&mut rng);
            let mixed = combine(r, &s, &t)?;
            let d = (phi(&mixed) - r * phi(&s) - (1.0 - r) * phi(&t)).abs();
            if !d.is_finite() {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(d);
        }
        Ok(worst)
    }

    /// Fails with `NotAffine` when the probe finds a violation above threshold.
    pub fn require_affine<S>(
        &self,
        phi: &dyn Fn(&S) -> f64,
        sample: &dyn Fn(&mut dyn RngCore) -> S,
        combine: &dyn Fn(f64, &S, &S) -> Result<S>,
    ) -> Result<f64> {
        let v = self.max_violation(phi, sample, combine)?;
        if v > self.threshold {
            Err(Error::NotAffine(v))
        } else {
            Ok(v)
        }
    }
}

/// Convex combination inside the quantum effect module.
pub(crate) fn mix_effects(r: f64, a: &QuantumEffect, b: &QuantumEffect) -> Result<QuantumEffect> {
    a.scalar(r)?.ovee(&b.scalar(1.0 - r)?, Tolerance::default())
}

/// Finite Riesz representation: recovers the unique classical effect `f` with
/// `φ(μ) = Σₓ f(x)μ(x)` by evaluating `φ` at point masses.
pub fn riesz_extract<P>(phi: &P, space: &OutcomeSpace, probe: &AffinityProbe, tol: Tolerance) -> Result<ClassicalEffect>
where
    P: AffineFunctional<ProbabilityVector> + ?Sized,
{
    let eval = |mu: &ProbabilityVector| phi.evaluate(mu);
    probe.require_affine(&eval, &|rng| random::probability_vector(rng, space), &|r, s, t| {
        ProbabilityVector::convex_combine(r, s, t)
    })?;
    let mut values = Vec::with_capacity(space.len());
    for k in 0..space.len() {
        let v = phi.evaluate(&ProbabilityVector::point_mass(space.clone(), k));
        if !v.is_finite() || v < -tol.eps() || v > 1.0 + tol.eps() {
            return Err(Error::RangeViolation {
                label: space.label(k).to_string(),
                value: v,
            });
        }
        values.push(v);
    }
    ClassicalEffect::new(space.clone(), values, tol)
}

/// Recovers the unique density operator `ρ` with `β(A) = Tr[ρA]` by
/// evaluating `β` on the tomography frame and inverting linearly.
pub fn busch_extract<B>(beta: &B, dim: usize, probe: &AffinityProbe, tol: Tolerance) -> Result<DensityMatrix>
where
    B: AffineFunctional<QuantumEffect> + ?Sized,
{
    let eval = |a: &QuantumEffect| beta.evaluate(a);
    probe.require_affine(&eval, &|rng| random::quantum_effect(rng, dim), &mix_effects)?;
    let at_unit = beta.evaluate(&QuantumEffect::unit(dim));
    let at_zero = beta.evaluate(&QuantumEffect::zero(dim));
    if (at_unit - 1.0).abs() > tol.eps() || at_zero.abs() > tol.eps() {
        return Err(Error::NotState(format!(
            "functional takes {at_zero} at 0 and {at_unit} at I"
        )));
    }
    let values: Vec<f64> = tomography_frame(dim)
        .into_iter()
        .map(|p| beta.evaluate(&QuantumEffect::from_trusted(p)))
        .collect();
    let rho = invert_frame(dim, &values);
    DensityMatrix::new(rho, tol).map_err(|e| match e {
        Error::NotState(msg) => Error::NotState(format!("reconstructed operator: {msg}")),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn validation() {
        let s = OutcomeSpace::numbered(2).unwrap();
        assert!(ProbabilityVector::new(s.clone(), vec![0.5, 0.6], tol()).is_err());
        assert!(ProbabilityVector::new(s.clone(), vec![-0.1, 1.1], tol()).is_err());
        let p = ProbabilityVector::new(s, vec![-1e-12, 1.0 + 1e-12], tol()).unwrap();
        assert_eq!(p.weights(), &[0.0, 1.0]);
        assert!(DensityMatrix::new(ComplexMatrix::diag(&[0.5, 0.6]), tol()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diag(&[1.5, -0.5]), tol()).is_err());
    }

    #[test]
    fn convex_combine_examples() {
        let mut rng = seeded(1);
        let x = random::density_matrix(&mut rng, 3);
        let y = random::density_matrix(&mut rng, 3);
        assert!(convex_combine(0.3, &x, &x).unwrap().distance(&x).unwrap() < 1e-15);
        assert_eq!(convex_combine(0.0, &x, &y).unwrap(), y);
        let mid = convex_combine(
            0.5,
            &DensityMatrix::basis_state(2, 0),
            &DensityMatrix::basis_state(2, 1),
        )
        .unwrap();
        assert_eq!(mid.operator(), &ComplexMatrix::diag(&[0.5, 0.5]));
        assert!(convex_combine(1.2, &x, &y).is_err());
        let z = random::density_matrix(&mut rng, 2);
        assert!(convex_combine(0.5, &x, &z).is_err());
    }

    #[test]
    fn expectation_examples() {
        let mut rng = seeded(2);
        let rho = random::density_matrix(&mut rng, 3);
        assert!((expectation(&rho, &QuantumEffect::unit(3)).unwrap() - 1.0).abs() < 1e-15);
        let e1 = QuantumEffect::new(ComplexMatrix::basis_projector(2, 1), tol()).unwrap();
        assert_eq!(expectation(&DensityMatrix::basis_state(2, 0), &e1).unwrap(), 0.0);
        let e = QuantumEffect::new(ComplexMatrix::diag(&[0.3, 0.9]), tol()).unwrap();
        assert!((expectation(&DensityMatrix::maximally_mixed(2), &e).unwrap() - 0.6).abs() < 1e-15);
        assert!(expectation(&rho, &e).is_err());
    }

    #[test]
    fn riesz_examples() {
        let space = OutcomeSpace::new(["x0", "x1", "x2"]).unwrap();
        let probe = AffinityProbe::default();
        let point = |mu: &ProbabilityVector| mu.weights()[0];
        let f = riesz_extract(&point, &space, &probe, tol()).unwrap();
        assert_eq!(f.values(), &[1.0, 0.0, 0.0]);
        let half = |_: &ProbabilityVector| 0.5;
        let f = riesz_extract(&half, &space, &probe, tol()).unwrap();
        assert_eq!(f.values(), &[0.5, 0.5, 0.5]);
    }

    #[test]
    fn riesz_errors() {
        let space = OutcomeSpace::numbered(3).unwrap();
        let probe = AffinityProbe::default();
        let square = |mu: &ProbabilityVector| mu.weights()[0].powi(2);
        assert!(matches!(
            riesz_extract(&square, &space, &probe, tol()),
            Err(Error::NotAffine(_))
        ));
        // affine but escapes [0, 1]
        let scaled = |mu: &ProbabilityVector| 2.0 * mu.weights()[1];
        assert!(matches!(
            riesz_extract(&scaled, &space, &probe, tol()),
            Err(Error::RangeViolation { .. })
        ));
    }

    #[test]
    fn busch_examples() {
        let probe = AffinityProbe::default();
        let ground = |a: &QuantumEffect| a.operator()[(0, 0)].re;
        let rho = busch_extract(&ground, 3, &probe, tol()).unwrap();
        assert!(
            rho.operator()
                .max_abs_diff(&ComplexMatrix::basis_projector(3, 0))
                .unwrap()
                < 1e-15
        );
        let mixed = |a: &QuantumEffect| a.operator().trace().unwrap().re / 4.0;
        let rho = busch_extract(&mixed, 4, &probe, tol()).unwrap();
        assert!(
            rho.operator()
                .max_abs_diff(&DensityMatrix::maximally_mixed(4).operator().clone())
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn busch_errors() {
        let probe = AffinityProbe::default();
        let constant = |_: &QuantumEffect| 0.5;
        assert!(matches!(
            busch_extract(&constant, 2, &probe, tol()),
            Err(Error::NotState(_))
        ));
        let squared = |a: &QuantumEffect| a.operator()[(0, 0)].re.powi(2);
        assert!(matches!(
            busch_extract(&squared, 2, &probe, tol()),
            Err(Error::NotAffine(_))
        ));
        // linear and unital, but induced by a non-positive "state" diag(1.5, -0.5)
        let w = ComplexMatrix::diag(&[1.5, -0.5]);
        let signed = move |a: &QuantumEffect| a.operator().trace_product(&w).unwrap().re;
        assert!(matches!(
            busch_extract(&signed, 2, &probe, tol()),
            Err(Error::NotState(_))
        ));
    }

    #[test]
    fn separating_effects_separate() {
        let mut rng = seeded(3);
        for _ in 0..20 {
            let rho = random::density_matrix(&mut rng, 3);
            let sigma = random::density_matrix(&mut rng, 3);
            let p = separating_effect(&rho, &sigma, tol()).unwrap().unwrap();
            let gap = expectation(&rho, &p).unwrap() - expectation(&sigma, &p).unwrap();
            assert!(gap > tol().eps() / 2.0);
        }
        let rho = random::density_matrix(&mut rng, 2);
        assert!(separating_effect(&rho, &rho, tol()).unwrap().is_none());

        let space = OutcomeSpace::numbered(4).unwrap();
        let mu = random::probability_vector(&mut rng, &space);
        let nu = random::probability_vector(&mut rng, &space);
        let f = separating_classical_effect(&mu, &nu, tol()).unwrap().unwrap();
        assert!(mu.integrate(&f).unwrap() - nu.integrate(&f).unwrap() > tol().eps() / 2.0);
    }

    #[test]
    fn json_shapes() {
        let rho = DensityMatrix::basis_state(2, 1);
        let s = serde_json::to_string(&rho).unwrap();
        assert!(s.starts_with(r#"{"dim":2,"operator":{"rows":2,"cols":2,"data":"#));
        assert_eq!(serde_json::from_str::<DensityMatrix>(&s).unwrap(), rho);
        let bad = r#"{"space":["a","b"],"weights":{"a":0.2,"b":0.2}}"#;
        assert!(serde_json::from_str::<ProbabilityVector>(bad).is_err());
    }
}
