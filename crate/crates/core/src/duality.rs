//! POVMs and the two maps they induce: quantization of classical events
//! `f ↦ Σₓ f(x)Eₓ` and measurement of quantum states `ρ ↦ (Tr[ρEₓ])ₓ`.
//!
//! Either map, given only as a black box, determines the POVM: evaluating a
//! quantization at indicator functions yields `Eₓ` directly, and a
//! measurement is inverted over the tomography frame. Black boxes are
//! probed for the required structure (homomorphism laws, affinity) before
//! anything is reconstructed.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::effects::{is_effect_module_hom, ClassicalEffect, HomLaw, QuantumEffect};
use crate::error::{dim_mismatch, Error, Result};
use crate::frame::{invert_frame, tomography_frame};
use crate::matrix::{ComplexMatrix, Tolerance};
use crate::random::{self, RNG_ALGORITHM};
use crate::space::OutcomeSpace;
use crate::states::{AffinityProbe, ConvexState, DensityMatrix, ProbabilityVector};

/// A finite family of effects, one per outcome, summing to the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmRepr", into = "PovmRepr")]
pub struct Povm {
    space: OutcomeSpace,
    effects: Vec<QuantumEffect>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmRepr {
    space: OutcomeSpace,
    dim: usize,
    effects: IndexMap<String, ComplexMatrix>,
}

impl TryFrom<PovmRepr> for Povm {
    type Error = Error;
    fn try_from(r: PovmRepr) -> Result<Self> {
        let ops = r.space.align(&r.effects, "effects")?;
        if let Some(op) = ops.iter().find(|m| m.rows() != r.dim || m.cols() != r.dim) {
            return Err(dim_mismatch(
                format!("{0}x{0} effects", r.dim),
                format!("{}x{}", op.rows(), op.cols()),
            ));
        }
        Povm::from_operators(r.space, ops, Tolerance::default())
    }
}

impl From<Povm> for PovmRepr {
    fn from(p: Povm) -> Self {
        let ops: Vec<ComplexMatrix> = p.effects.iter().map(|e| e.operator().clone()).collect();
        PovmRepr {
            dim: p.dim(),
            effects: p.space.keyed(&ops),
            space: p.space,
        }
    }
}

impl Povm {
    pub fn new(space: OutcomeSpace, effects: Vec<QuantumEffect>, tol: Tolerance) -> Result<Self> {
        if effects.len() != space.len() {
            return Err(Error::NotPovm(format!(
                "{} effects for {} outcomes",
                effects.len(),
                space.len()
            )));
        }
        let dim = effects[0].dim();
        if let Some(e) = effects.iter().find(|e| e.dim() != dim) {
            return Err(dim_mismatch(dim, e.dim()));
        }
        let mut total = ComplexMatrix::zeros(dim, dim);
        for e in &effects {
            total = &total + e.operator();
        }
        let defect = total.max_abs_diff(&ComplexMatrix::identity(dim))?;
        if defect > tol.eps() {
            return Err(Error::NotPovm(format!(
                "effects do not sum to identity (max entry deviation {defect:e})"
            )));
        }
        Ok(Self { space, effects })
    }

    /// Validates each operator as an effect, then the family as a POVM.
    pub fn from_operators(space: OutcomeSpace, ops: Vec<ComplexMatrix>, tol: Tolerance) -> Result<Self> {
        let effects = ops
            .into_iter()
            .enumerate()
            .map(|(k, op)| {
                QuantumEffect::new(op, tol).map_err(|e| match e {
                    Error::NotEffect(msg) => Error::NotEffect(format!("`{}`: {msg}", space.label(k))),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, effects, tol)
    }

    /// Single-outcome POVM `{I}`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            space: OutcomeSpace::numbered(1).expect("non-empty"),
            effects: vec![QuantumEffect::unit(dim)],
        }
    }

    /// Computational-basis projectors `{|x⟩⟨x|}` with labels `0..dim`.
    pub fn computational_basis(dim: usize) -> Self {
        Self {
            space: OutcomeSpace::numbered(dim).expect("non-empty"),
            effects: (0..dim)
                .map(|k| QuantumEffect::from_trusted(ComplexMatrix::basis_projector(dim, k)))
                .collect(),
        }
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn effects(&self) -> &[QuantumEffect] {
        &self.effects
    }

    pub fn effect(&self, label: &str) -> Option<&QuantumEffect> {
        self.space.index_of(label).map(|k| &self.effects[k])
    }

    /// Largest entry-wise difference between corresponding effects.
    pub fn max_entry_distance(&self, other: &Self) -> Result<f64> {
        self.space.require_same(&other.space)?;
        let mut worst = 0.0f64;
        for (a, b) in self.effects.iter().zip(&other.effects) {
            worst = worst.max(a.operator().max_abs_diff(b.operator())?);
        }
        Ok(worst)
    }

    /// `Σₓ f(x)Eₓ` for an arbitrary real function `f`. Hermitian but not
    /// necessarily an effect when `f` leaves `[0,1]`.
    pub fn integrate_real(&self, values: &[f64]) -> Result<ComplexMatrix> {
        if values.len() != self.space.len() {
            return Err(dim_mismatch(self.space.len(), values.len()));
        }
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (e, &v) in self.effects.iter().zip(values) {
            if v != 0.0 {
                acc = &acc + &e.operator().scale(v);
            }
        }
        Ok(acc)
    }

    /// Raw outcome statistics `Tr[ρEₓ]`, unclamped.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(dim_mismatch(self.dim(), rho.dim()));
        }
        self.effects
            .iter()
            .map(|e| Ok(rho.operator().trace_product(e.operator())?.re))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Quantization and measurement maps

pub type QuantizationFn = dyn Fn(&ClassicalEffect) -> QuantumEffect + Send + Sync;
pub type MeasurementFn = dyn Fn(&DensityMatrix) -> ProbabilityVector + Send + Sync;

/// A quantization of events, either in canonical POVM form or as an opaque map.
#[derive(Clone)]
pub enum QuantizationMap {
    Canonical(Povm),
    BlackBox {
        space: OutcomeSpace,
        dim: usize,
        map: Arc<QuantizationFn>,
    },
}

/// A measurement of states, either in canonical POVM form or as an opaque map.
#[derive(Clone)]
pub enum MeasurementMap {
    Canonical(Povm),
    BlackBox {
        space: OutcomeSpace,
        dim: usize,
        map: Arc<MeasurementFn>,
    },
}

impl fmt::Debug for QuantizationMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Canonical(p) => f.debug_tuple("Canonical").field(p).finish(),
            Self::BlackBox { space, dim, .. } => f
                .debug_struct("BlackBox")
                .field("space", space)
                .field("dim", dim)
                .finish_non_exhaustive(),
        }
    }
}

impl fmt::Debug for MeasurementMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Canonical(p) => f.debug_tuple("Canonical").field(p).finish(),
            Self::BlackBox { space, dim, .. } => f
                .debug_struct("BlackBox")
                .field("space", space)
                .field("dim", dim)
                .finish_non_exhaustive(),
        }
    }
}

impl QuantizationMap {
    pub fn black_box(
        space: OutcomeSpace,
        dim: usize,
        map: impl Fn(&ClassicalEffect) -> QuantumEffect + Send + Sync + 'static,
    ) -> Self {
        Self::BlackBox {
            space,
            dim,
            map: Arc::new(map),
        }
    }

    pub fn space(&self) -> &OutcomeSpace {
        match self {
            Self::Canonical(p) => p.space(),
            Self::BlackBox { space, .. } => space,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Canonical(p) => p.dim(),
            Self::BlackBox { dim, .. } => *dim,
        }
    }
}

impl MeasurementMap {
    pub fn black_box(
        space: OutcomeSpace,
        dim: usize,
        map: impl Fn(&DensityMatrix) -> ProbabilityVector + Send + Sync + 'static,
    ) -> Self {
        Self::BlackBox {
            space,
            dim,
            map: Arc::new(map),
        }
    }

    pub fn space(&self) -> &OutcomeSpace {
        match self {
            Self::Canonical(p) => p.space(),
            Self::BlackBox { space, .. } => space,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Canonical(p) => p.dim(),
            Self::BlackBox { dim, .. } => *dim,
        }
    }
}

/// `Q(f)`; for the canonical form `Σₓ f(x)Eₓ`.
pub fn quantize(q: &QuantizationMap, f: &ClassicalEffect) -> Result<QuantumEffect> {
    q.space().require_same(f.space())?;
    match q {
        QuantizationMap::Canonical(povm) => {
            let op = povm.integrate_real(f.values())?;
            QuantumEffect::new(op, Tolerance::default())
        }
        QuantizationMap::BlackBox { map, .. } => Ok(map(f)),
    }
}

/// `M(ρ)`; for the canonical form `x ↦ Tr[ρEₓ]`.
pub fn measure(m: &MeasurementMap, rho: &DensityMatrix) -> Result<ProbabilityVector> {
    if rho.dim() != m.dim() {
        return Err(dim_mismatch(m.dim(), rho.dim()));
    }
    match m {
        MeasurementMap::Canonical(povm) => {
            ProbabilityVector::new(povm.space().clone(), povm.probabilities(rho)?, Tolerance::default())
        }
        MeasurementMap::BlackBox { map, .. } => Ok(map(rho)),
    }
}

/// Knobs for probing black boxes before reconstruction.
#[derive(Debug, Clone, Copy)]
pub struct RecoveryConfig {
    /// Random samples for the homomorphism probe and the post-recovery check.
    pub samples: usize,
    pub seed: u64,
    pub tol: Tolerance,
    pub affinity: AffinityProbe,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            samples: 50,
            seed: 0x9017,
            tol: Tolerance::default(),
            affinity: AffinityProbe::default(),
        }
    }
}

/// Recovers the POVM characterizing a quantization map: `Eₓ = Q(1_{x})`.
pub fn povm_from_quantization(q: &QuantizationMap, cfg: &RecoveryConfig) -> Result<Povm> {
    if let QuantizationMap::Canonical(p) = q {
        return Ok(p.clone());
    }
    let space = q.space().clone();
    let apply = |f: &ClassicalEffect| quantize(q, f).expect("space checked");
    let mut rng = random::seeded(cfg.seed);
    let domain = ClassicalEffect::indicator(space.clone(), 0);
    let report = is_effect_module_hom(apply, &domain, cfg.samples, cfg.tol, &mut rng)?;
    // A unit failure alone surfaces below as a non-normalized family.
    if report.scalar_deviation > cfg.tol.eps() || report.additivity_deviation > cfg.tol.eps() {
        let law = report
            .first_violation
            .as_ref()
            .map(|v| v.law)
            .filter(|l| *l != HomLaw::Unit)
            .unwrap_or(HomLaw::Additivity);
        return Err(Error::NotHomomorphism(format!(
            "{law:?} law violated (scalar deviation {:e}, additivity deviation {:e})",
            report.scalar_deviation, report.additivity_deviation
        )));
    }
    let effects: Vec<QuantumEffect> = (0..space.len())
        .map(|k| apply(&ClassicalEffect::indicator(space.clone(), k)))
        .collect();
    if let Some(e) = effects.iter().find(|e| e.dim() != q.dim()) {
        return Err(dim_mismatch(q.dim(), e.dim()));
    }
    let povm = Povm::new(space.clone(), effects, cfg.tol).map_err(|e| match e {
        Error::NotPovm(msg) => Error::NotPovm(format!("quantization is not unital: {msg}")),
        other => other,
    })?;
    for _ in 0..cfg.samples {
        let f = random::classical_effect(&mut rng, &space);
        let canonical = povm.integrate_real(f.values())?;
        let d = canonical.max_abs_diff(apply(&f).operator())?;
        if d > cfg.tol.eps() {
            return Err(Error::NotHomomorphism(format!(
                "map is not of the form Σ f(x)Eₓ (deviation {d:e})"
            )));
        }
    }
    Ok(povm)
}

/// Recovers the POVM characterizing a measurement map by inverting each
/// outcome functional `ρ ↦ M(ρ)(x)` over the tomography frame.
pub fn povm_from_measurement(m: &MeasurementMap, cfg: &RecoveryConfig) -> Result<Povm> {
    if let MeasurementMap::Canonical(p) = m {
        return Ok(p.clone());
    }
    let space = m.space().clone();
    let dim = m.dim();
    let apply = |rho: &DensityMatrix| -> Result<Vec<f64>> {
        let p = measure(m, rho)?;
        p.space().require_same(&space)?;
        Ok(p.weights().to_vec())
    };
    apply(&DensityMatrix::maximally_mixed(dim))?;
    for k in 0..space.len() {
        let component = |rho: &DensityMatrix| apply(rho).map(|w| w[k]).unwrap_or(f64::NAN);
        cfg.affinity
            .require_affine(&component, &|rng| random::density_matrix(rng, dim), &|r, s, t| {
                DensityMatrix::convex_combine(r, s, t)
            })?;
    }
    let frame_stats = tomography_frame(dim)
        .into_iter()
        .map(|p| apply(&DensityMatrix::from_trusted(p)))
        .collect::<Result<Vec<_>>>()?;
    let ops: Vec<ComplexMatrix> = (0..space.len())
        .map(|k| {
            let values: Vec<f64> = frame_stats.iter().map(|w| w[k]).collect();
            invert_frame(dim, &values)
        })
        .collect();
    Povm::from_operators(space, ops, cfg.tol).map_err(|e| match e {
        Error::NotEffect(msg) | Error::NotPovm(msg) => Error::NotPovm(msg),
        other => other,
    })
}

/// Result of checking `Tr[ρ·Q(f)] = Σₓ f(x)·M(ρ)(x)` on random pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub trials: usize,
    pub max_deviation: f64,
    pub pass: bool,
    pub seed: u64,
    pub rng: String,
}

impl DualityReport {
    /// Combines two reports over disjoint trial sets.
    pub fn merge(self, other: Self, tol: Tolerance) -> Self {
        let max_deviation = self.max_deviation.max(other.max_deviation);
        Self {
            trials: self.trials + other.trials,
            max_deviation,
            pass: max_deviation <= tol.eps(),
            seed: self.seed,
            rng: self.rng,
        }
    }
}

/// Both sides of one commuting square: quantize-then-expect and
/// measure-then-integrate.
pub fn duality_sides(povm: &Povm, rho: &DensityMatrix, f: &ClassicalEffect) -> Result<(f64, f64)> {
    let q = QuantizationMap::Canonical(povm.clone());
    let m = MeasurementMap::Canonical(povm.clone());
    let qf = quantize(&q, f)?;
    let lhs = rho.operator().trace_product(qf.operator())?.re;
    let rhs = measure(&m, rho)?.integrate(f)?;
    Ok((lhs, rhs))
}

pub fn verify_duality_square(povm: &Povm, trials: usize, tol: Tolerance, seed: u64) -> Result<DualityReport> {
    let mut rng = random::seeded(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let rho = random::density_matrix(&mut rng, povm.dim());
        let f = random::classical_effect(&mut rng, povm.space());
        let (lhs, rhs) = duality_sides(povm, &rho, &f)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(DualityReport {
        trials,
        max_deviation: worst,
        pass: worst <= tol.eps(),
        seed,
        rng: RNG_ALGORITHM.to_string(),
    })
}

/// Random POVM with labels `0..n_outcomes`: `Eₓ = S^{-1/2} Gₓ S^{-1/2}` for
/// random PSD `Gₓ` and `S = Σ Gₓ`. Deterministic in `seed`.
pub fn random_povm(dim: usize, n_outcomes: usize, seed: u64) -> Result<Povm> {
    if dim == 0 || n_outcomes == 0 {
        return Err(dim_mismatch(
            "positive dim and outcome count",
            format!("{dim}, {n_outcomes}"),
        ));
    }
    let space = OutcomeSpace::numbered(n_outcomes)?;
    if n_outcomes == 1 {
        return Ok(Povm::trivial(dim));
    }
    let tol = Tolerance::default();
    let mut rng = random::seeded(seed);
    const MAX_DRAWS: usize = 16;
    let mut last_min = 0.0;
    for _ in 0..MAX_DRAWS {
        let grams: Vec<ComplexMatrix> = (0..n_outcomes)
            .map(|k| {
                let rank = if k + 1 == n_outcomes {
                    dim
                } else {
                    rng.random_range(1..=dim)
                };
                random::psd(&mut rng, dim, rank)
            })
            .collect();
        let mut total = ComplexMatrix::zeros(dim, dim);
        for g in &grams {
            total = &total + g;
        }
        match total.inverse_sqrt(1e-10, tol) {
            Ok(w) => {
                let effects = grams
                    .iter()
                    .map(|g| QuantumEffect::new((&(&w * g) * &w).hermitian_part(), tol))
                    .collect::<Result<Vec<_>>>()?;
                return Povm::new(space, effects, tol);
            }
            Err(min) => last_min = min,
        }
    }
    Err(Error::SingularAverage(last_min))
}
