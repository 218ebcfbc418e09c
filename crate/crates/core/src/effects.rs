//! The classical and quantum effect modules: partial sum `⊕`, orthosupplement
//! `¬`, the `[0,1]` scalar action, and the order-theoretic metric.
//!
//! Both flavors are validated at construction, so every operation below may
//! assume its arguments satisfy the effect invariants.

use indexmap::IndexMap;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::matrix::{ComplexMatrix, Tolerance};
use crate::random;
use crate::space::OutcomeSpace;

/// Common surface of the two effect modules.
pub trait Effect: Clone + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn unit_like(&self) -> Self;
    /// Partial sum; `NotOrthogonal` when the sum leaves the unit interval.
    fn ovee(&self, other: &Self, tol: Tolerance) -> Result<Self>;
    fn neg(&self) -> Self;
    fn scalar(&self, r: f64) -> Result<Self>;
    /// `max` of the two one-sided infima `inf{r : ½a ≤ ½b ⊕ (r/2)·1}`.
    fn metric(&self, other: &Self, tol: Tolerance) -> Result<f64>;
    /// Max-entry modulus of `self − Σ cᵢ·termᵢ`, computed without requiring
    /// the right-hand side to be an effect.
    fn linear_deviation(&self, terms: &[(f64, &Self)]) -> Result<f64>;
    /// A random effect of the same shape.
    fn sample_like(&self, rng: &mut dyn RngCore) -> Self;
}

pub fn ovee<E: Effect>(a: &E, b: &E, tol: Tolerance) -> Result<E> {
    a.ovee(b, tol)
}

pub fn neg<E: Effect>(a: &E) -> E {
    a.neg()
}

pub fn scalar<E: Effect>(r: f64, a: &E) -> Result<E> {
    a.scalar(r)
}

pub fn effect_metric<E: Effect>(a: &E, b: &E, tol: Tolerance) -> Result<f64> {
    a.metric(b, tol)
}

fn check_scalar(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::ScalarOutOfRange(r))
    }
}

// ---------------------------------------------------------------------------
// Classical effects

/// A `[0,1]`-valued function on a finite outcome space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassicalRepr", into = "ClassicalRepr")]
pub struct ClassicalEffect {
    space: OutcomeSpace,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalRepr {
    space: OutcomeSpace,
    values: IndexMap<String, f64>,
}

impl TryFrom<ClassicalRepr> for ClassicalEffect {
    type Error = Error;
    fn try_from(r: ClassicalRepr) -> Result<Self> {
        let values = r.space.align(&r.values, "values")?;
        ClassicalEffect::new(r.space, values, Tolerance::default())
    }
}

impl From<ClassicalEffect> for ClassicalRepr {
    fn from(f: ClassicalEffect) -> Self {
        ClassicalRepr {
            values: f.space.keyed(&f.values),
            space: f.space,
        }
    }
}

impl ClassicalEffect {
    /// Values in `[−eps, 1+eps]` are accepted and clamped into `[0,1]`.
    pub fn new(space: OutcomeSpace, values: Vec<f64>, tol: Tolerance) -> Result<Self> {
        if values.len() != space.len() {
            return Err(dim_mismatch(space.len(), values.len()));
        }
        let eps = tol.eps();
        let mut clamped = Vec::with_capacity(values.len());
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < -eps || v > 1.0 + eps {
                return Err(Error::NotEffect(format!(
                    "value {v} at `{}` outside [0, 1]",
                    space.label(k)
                )));
            }
            clamped.push(v.clamp(0.0, 1.0));
        }
        Ok(Self { space, values: clamped })
    }

    pub fn constant(space: OutcomeSpace, v: f64) -> Result<Self> {
        let n = space.len();
        Self::new(space, vec![v; n], Tolerance::default())
    }

    pub fn indicator(space: OutcomeSpace, k: usize) -> Self {
        let values = (0..space.len()).map(|j| if j == k { 1.0 } else { 0.0 }).collect();
        Self { space, values }
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, label: &str) -> Option<f64> {
        self.space.index_of(label).map(|k| self.values[k])
    }

    /// Sup-norm distance.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.space.require_same(&other.space)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl Effect for ClassicalEffect {
    fn zero_like(&self) -> Self {
        Self {
            space: self.space.clone(),
            values: vec![0.0; self.values.len()],
        }
    }

    fn unit_like(&self) -> Self {
        Self {
            space: self.space.clone(),
            values: vec![1.0; self.values.len()],
        }
    }

    fn ovee(&self, other: &Self, tol: Tolerance) -> Result<Self> {
        self.space.require_same(&other.space)?;
        let sum: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let excess = sum.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) - 1.0;
        if excess > tol.eps() {
            return Err(Error::NotOrthogonal(excess));
        }
        Self::new(self.space.clone(), sum, tol)
    }

    fn neg(&self) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(|v| 1.0 - v).collect(),
        }
    }

    fn scalar(&self, r: f64) -> Result<Self> {
        check_scalar(r)?;
        Ok(Self {
            space: self.space.clone(),
            values: self.values.iter().map(|v| r * v).collect(),
        })
    }

    fn metric(&self, other: &Self, _tol: Tolerance) -> Result<f64> {
        self.space.require_same(&other.space)?;
        let one_sided = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).fold(0.0, f64::max);
        Ok(one_sided(&self.values, &other.values).max(one_sided(&other.values, &self.values)))
    }

    fn linear_deviation(&self, terms: &[(f64, &Self)]) -> Result<f64> {
        let mut acc = self.values.clone();
        for (c, t) in terms {
            self.space.require_same(&t.space)?;
            for (a, v) in acc.iter_mut().zip(&t.values) {
                *a -= c * v;
            }
        }
        Ok(acc.iter().map(|a| a.abs()).fold(0.0, f64::max))
    }

    fn sample_like(&self, rng: &mut dyn RngCore) -> Self {
        random::classical_effect(rng, &self.space)
    }
}

// ---------------------------------------------------------------------------
// Quantum effects

/// A Hermitian operator `E` with `0 ≤ E ≤ I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct QuantumEffect {
    operator: ComplexMatrix,
}

/// JSON shape shared by effects and density matrices.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct OperatorRepr {
    pub dim: usize,
    pub operator: ComplexMatrix,
}

impl OperatorRepr {
    pub(crate) fn checked(self) -> Result<ComplexMatrix> {
        if self.operator.rows() != self.dim || self.operator.cols() != self.dim {
            return Err(dim_mismatch(
                format!("{0}x{0} operator", self.dim),
                format!("{}x{}", self.operator.rows(), self.operator.cols()),
            ));
        }
        Ok(self.operator)
    }
}

impl TryFrom<OperatorRepr> for QuantumEffect {
    type Error = Error;
    fn try_from(r: OperatorRepr) -> Result<Self> {
        QuantumEffect::new(r.checked()?, Tolerance::default())
    }
}

impl From<QuantumEffect> for OperatorRepr {
    fn from(e: QuantumEffect) -> Self {
        OperatorRepr {
            dim: e.dim(),
            operator: e.operator,
        }
    }
}

impl QuantumEffect {
    /// Validates `E = E†` and spectrum inside `[−eps, 1+eps]`; stores the
    /// Hermitian part.
    pub fn new(operator: ComplexMatrix, tol: Tolerance) -> Result<Self> {
        if !operator.is_square() {
            return Err(Error::NotSquare {
                rows: operator.rows(),
                cols: operator.cols(),
            });
        }
        let eig = operator.hermitian_eigen(tol).map_err(|e| match e {
            Error::NotHermitian(d) => Error::NotEffect(format!("operator is not Hermitian (deviation {d:e})")),
            other => other,
        })?;
        let (lo, hi) = (eig.values[0], eig.values[eig.values.len() - 1]);
        if lo < -tol.eps() {
            return Err(Error::NotEffect(format!("negative eigenvalue {lo:e}")));
        }
        if hi > 1.0 + tol.eps() {
            return Err(Error::NotEffect(format!("eigenvalue {hi} exceeds 1")));
        }
        Ok(Self {
            operator: operator.hermitian_part(),
        })
    }

    pub(crate) fn from_trusted(operator: ComplexMatrix) -> Self {
        Self { operator }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_trusted(ComplexMatrix::zeros(dim, dim))
    }

    pub fn unit(dim: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.operator.rows()
    }

    pub fn operator(&self) -> &ComplexMatrix {
        &self.operator
    }

    pub fn into_operator(self) -> ComplexMatrix {
        self.operator
    }

    fn require_dim(&self, other: &Self) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(dim_mismatch(self.dim(), other.dim()))
        }
    }
}

impl Effect for QuantumEffect {
    fn zero_like(&self) -> Self {
        Self::zero(self.dim())
    }

    fn unit_like(&self) -> Self {
        Self::unit(self.dim())
    }

    fn ovee(&self, other: &Self, tol: Tolerance) -> Result<Self> {
        self.require_dim(other)?;
        let sum = &self.operator + &other.operator;
        let eig = sum.hermitian_eigen(tol)?;
        let top = eig.values[eig.values.len() - 1];
        if top - 1.0 > tol.eps() {
            return Err(Error::NotOrthogonal(top - 1.0));
        }
        if top > 1.0 {
            // remove only the part of the spectrum above the unit
            let excess = eig.map_spectrum(|l| (l - 1.0).max(0.0));
            return Self::new(&sum - &excess, tol);
        }
        Self::new(sum, tol)
    }

    fn neg(&self) -> Self {
        Self::from_trusted(&ComplexMatrix::identity(self.dim()) - &self.operator)
    }

    fn scalar(&self, r: f64) -> Result<Self> {
        check_scalar(r)?;
        Ok(Self::from_trusted(self.operator.scale(r)))
    }

    fn metric(&self, other: &Self, tol: Tolerance) -> Result<f64> {
        self.require_dim(other)?;
        let diff = &self.operator - &other.operator;
        let values = diff.hermitian_eigenvalues(tol)?;
        let forward = values[values.len() - 1].max(0.0);
        let backward = (-values[0]).max(0.0);
        Ok(forward.max(backward))
    }

    fn linear_deviation(&self, terms: &[(f64, &Self)]) -> Result<f64> {
        let mut acc = self.operator.clone();
        for (c, t) in terms {
            self.require_dim(t)?;
            acc = acc.try_sub(&t.operator.scale(*c))?;
        }
        Ok(acc.max_abs())
    }

    fn sample_like(&self, rng: &mut dyn RngCore) -> Self {
        random::quantum_effect(rng, self.dim())
    }
}

// ---------------------------------------------------------------------------
// Homomorphism probing

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HomLaw {
    Unit,
    Scalar,
    Additivity,
}

/// First input that broke a homomorphism law.
#[derive(Debug, Clone)]
pub struct HomViolation<A> {
    pub law: HomLaw,
    pub deviation: f64,
    /// Scalar used for the scalar-action law.
    pub scalar: Option<f64>,
    /// The input element(s): one for unit/scalar, the orthogonal pair for additivity.
    pub inputs: Vec<A>,
}

#[derive(Debug, Clone)]
pub struct HomReport<A> {
    pub pass: bool,
    pub samples: usize,
    pub unit_deviation: f64,
    pub scalar_deviation: f64,
    pub additivity_deviation: f64,
    pub first_violation: Option<HomViolation<A>>,
}

impl<A> HomReport<A> {
    pub fn max_deviation(&self) -> f64 {
        self.unit_deviation
            .max(self.scalar_deviation)
            .max(self.additivity_deviation)
    }
}

/// Probes a black-box map for the three effect-module homomorphism laws:
/// unit preservation, the scalar action, and `⊕` on random orthogonal pairs.
/// `domain` fixes the shape of the inputs; its value is irrelevant.
pub fn is_effect_module_hom<A, B, H>(
    h: H,
    domain: &A,
    samples: usize,
    tol: Tolerance,
    rng: &mut dyn RngCore,
) -> Result<HomReport<A>>
where
    A: Effect,
    B: Effect,
    H: Fn(&A) -> B,
{
    let eps = tol.eps();
    let unit = domain.unit_like();
    let h_unit = h(&unit);
    let unit_deviation = h_unit.linear_deviation(&[(1.0, &h_unit.unit_like())])?;
    let mut report = HomReport {
        pass: true,
        samples,
        unit_deviation,
        scalar_deviation: 0.0,
        additivity_deviation: 0.0,
        first_violation: None,
    };
    if unit_deviation > eps {
        report.first_violation = Some(HomViolation {
            law: HomLaw::Unit,
            deviation: unit_deviation,
            scalar: None,
            inputs: vec![unit],
        });
    }

    for _ in 0..samples {
        let x = domain.sample_like(rng);
        let r = random::unit_interval(rng);
        let hx = h(&x);
        let d = h(&x.scalar(r)?).linear_deviation(&[(r, &hx)])?;
        report.scalar_deviation = report.scalar_deviation.max(d);
        if d > eps && report.first_violation.is_none() {
            report.first_violation = Some(HomViolation {
                law: HomLaw::Scalar,
                deviation: d,
                scalar: Some(r),
                inputs: vec![x.clone()],
            });
        }

        // y ≤ ¬x guarantees x ⊥ y
        let y = x.neg().scalar(random::unit_interval(rng))?;
        let sum = x.ovee(&y, tol)?;
        let d = h(&sum).linear_deviation(&[(1.0, &hx), (1.0, &h(&y))])?;
        report.additivity_deviation = report.additivity_deviation.max(d);
        if d > eps && report.first_violation.is_none() {
            report.first_violation = Some(HomViolation {
                law: HomLaw::Additivity,
                deviation: d,
                scalar: None,
                inputs: vec![x, y],
            });
        }
    }
    report.pass = report.first_violation.is_none();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn space3() -> OutcomeSpace {
        OutcomeSpace::new(["a", "b", "c"]).unwrap()
    }

    fn qe(values: &[f64]) -> QuantumEffect {
        QuantumEffect::new(ComplexMatrix::diag(values), tol()).unwrap()
    }

    #[test]
    fn construction_validates() {
        assert!(ClassicalEffect::new(space3(), vec![0.0, 1.2, 0.5], tol()).is_err());
        assert!(ClassicalEffect::new(space3(), vec![0.0, 0.5], tol()).is_err());
        let f = ClassicalEffect::new(space3(), vec![-1e-12, 1.0 + 1e-12, 0.5], tol()).unwrap();
        assert_eq!(f.values(), &[0.0, 1.0, 0.5]);
        assert!(QuantumEffect::new(ComplexMatrix::diag(&[1.5, 0.0]), tol()).is_err());
        assert!(QuantumEffect::new(ComplexMatrix::diag(&[-0.1, 0.0]), tol()).is_err());
        let nh = ComplexMatrix::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(matches!(QuantumEffect::new(nh, tol()), Err(Error::NotEffect(_))));
    }

    #[test]
    fn ovee_examples() {
        let f = random::classical_effect(&mut seeded(1), &space3());
        assert_eq!(ovee(&f, &f.zero_like(), tol()).unwrap(), f);
        assert_eq!(ovee(&f.zero_like(), &f, tol()).unwrap(), f);
        let half = qe(&[0.5, 0.5]);
        assert_eq!(ovee(&half, &half, tol()).unwrap(), QuantumEffect::unit(2));
        let big = qe(&[0.7, 0.7]);
        assert!(matches!(ovee(&big, &big, tol()), Err(Error::NotOrthogonal(_))));
        let g = ClassicalEffect::constant(space3(), 0.7).unwrap();
        assert!(matches!(ovee(&g, &g, tol()), Err(Error::NotOrthogonal(_))));
        assert!(ovee(&half, &qe(&[0.1, 0.1, 0.1]), tol()).is_err());
    }

    #[test]
    fn ovee_clamps_rounding_overshoot() {
        let a = qe(&[0.5 + 4e-10, 0.2]);
        let b = qe(&[0.5, 0.2]);
        let s = ovee(&a, &b, tol()).unwrap();
        assert!((s.operator()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn neg_examples() {
        assert_eq!(neg(&QuantumEffect::zero(2)), QuantumEffect::unit(2));
        let e = random::quantum_effect(&mut seeded(2), 3);
        assert!(neg(&neg(&e)).operator().max_abs_diff(e.operator()).unwrap() < 1e-15);
        let n = neg(&qe(&[0.3, 0.8]));
        assert!(n.operator().max_abs_diff(&ComplexMatrix::diag(&[0.7, 0.2])).unwrap() < 1e-15);
        let f = random::classical_effect(&mut seeded(3), &space3());
        assert_eq!(ovee(&f, &neg(&f), tol()).unwrap(), f.unit_like());
    }

    #[test]
    fn scalar_examples() {
        let e = random::quantum_effect(&mut seeded(4), 2);
        assert_eq!(scalar(1.0, &e).unwrap(), e);
        assert_eq!(scalar(0.0, &e).unwrap(), QuantumEffect::zero(2));
        assert_eq!(scalar(0.5, &QuantumEffect::unit(2)).unwrap(), qe(&[0.5, 0.5]));
        assert!(matches!(scalar(1.5, &e), Err(Error::ScalarOutOfRange(_))));
        assert!(scalar(-0.1, &e).is_err());
    }

    #[test]
    fn metric_examples() {
        let e = random::quantum_effect(&mut seeded(5), 3);
        assert_eq!(effect_metric(&e, &e, tol()).unwrap(), 0.0);
        let d = effect_metric(&QuantumEffect::unit(2), &QuantumEffect::zero(2), tol()).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        let f = ClassicalEffect::new(space3(), vec![0.1, 0.9, 0.4], tol()).unwrap();
        let g = ClassicalEffect::new(space3(), vec![0.3, 0.2, 0.4], tol()).unwrap();
        assert!((effect_metric(&f, &g, tol()).unwrap() - 0.7).abs() < 1e-15);
        let other = ClassicalEffect::constant(OutcomeSpace::numbered(3).unwrap(), 0.1).unwrap();
        assert!(matches!(effect_metric(&f, &other, tol()), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn hom_identity_and_embedding_pass() {
        let mut rng = seeded(6);
        let f = ClassicalEffect::constant(space3(), 0.0).unwrap();
        let r = is_effect_module_hom(|x: &ClassicalEffect| x.clone(), &f, 50, tol(), &mut rng).unwrap();
        assert!(r.pass);
        let e = QuantumEffect::zero(3);
        let r = is_effect_module_hom(|x: &QuantumEffect| x.clone(), &e, 50, tol(), &mut rng).unwrap();
        assert!(r.pass);

        let embed = |f: &ClassicalEffect| QuantumEffect::new(ComplexMatrix::diag(f.values()), tol()).unwrap();
        let r = is_effect_module_hom(embed, &f, 50, tol(), &mut rng).unwrap();
        assert!(r.pass, "{:?}", r.first_violation);
        assert!(r.max_deviation() < 1e-15);
    }

    #[test]
    fn hom_squaring_fails_with_witness() {
        let mut rng = seeded(7);
        let f = ClassicalEffect::constant(space3(), 0.0).unwrap();
        let square = |f: &ClassicalEffect| {
            ClassicalEffect::new(f.space().clone(), f.values().iter().map(|v| v * v).collect(), tol()).unwrap()
        };
        let r = is_effect_module_hom(square, &f, 50, tol(), &mut rng).unwrap();
        assert!(!r.pass);
        let v = r.first_violation.unwrap();
        assert_eq!(v.law, HomLaw::Scalar);
        assert!(!v.inputs.is_empty());
        assert!(r.additivity_deviation > 1e-3);
    }

    #[test]
    fn hom_detects_non_unital_map() {
        let mut rng = seeded(8);
        let f = ClassicalEffect::constant(space3(), 0.0).unwrap();
        let r = is_effect_module_hom(|x: &ClassicalEffect| x.scalar(0.5).unwrap(), &f, 20, tol(), &mut rng).unwrap();
        assert!(!r.pass);
        assert_eq!(r.first_violation.unwrap().law, HomLaw::Unit);
        assert!(r.scalar_deviation < 1e-15 && r.additivity_deviation < 1e-15);
    }

    #[test]
    fn json_shapes() {
        let f = ClassicalEffect::new(space3(), vec![0.1, 0.2, 0.3], tol()).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"space":["a","b","c"],"values":{"a":0.1,"b":0.2,"c":0.3}}"#);
        assert_eq!(serde_json::from_str::<ClassicalEffect>(&s).unwrap(), f);
        let bad = r#"{"dim":3,"operator":{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[0,0]]}}"#;
        assert!(serde_json::from_str::<QuantumEffect>(bad).is_err());
    }
}
