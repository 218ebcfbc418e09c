//! Measurement models `(K, ρ0, Λ, F)` and the quantization obtained by
//! running a model backwards.
//!
//! The system is always the first tensor factor: an operator on `H ⊗ K`
//! has row index `i·probe_dim + j` for system index `i` and probe index `j`.
//! Channels are stored as Kraus families so that complete positivity holds
//! by construction and the adjoint is `Λ*(B) = Σᵢ Kᵢ† B Kᵢ`.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::duality::Povm;
use crate::effects::{ClassicalEffect, QuantumEffect};
use crate::error::{dim_mismatch, Error, Result};
use crate::frame::tomography_frame;
use crate::matrix::{ComplexMatrix, Tolerance, TraceOut};
use crate::random::{self, RNG_ALGORITHM};
use crate::states::DensityMatrix;

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelRepr {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl TryFrom<ChannelRepr> for KrausChannel {
    type Error = Error;
    fn try_from(r: ChannelRepr) -> Result<Self> {
        KrausChannel::new(r.dim_in, r.dim_out, r.kraus, Tolerance::default())
    }
}

impl From<KrausChannel> for ChannelRepr {
    fn from(c: KrausChannel) -> Self {
        ChannelRepr {
            dim_in: c.dim_in,
            dim_out: c.dim_out,
            kraus: c.kraus,
        }
    }
}

impl KrausChannel {
    /// Requires every `Kᵢ` to be `dim_out × dim_in` and `Σ Kᵢ†Kᵢ = I`
    /// entry-wise within `eps`.
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>, tol: Tolerance) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("`kraus` is empty".into()));
        }
        if let Some((k, m)) = kraus
            .iter()
            .enumerate()
            .find(|(_, m)| m.rows() != dim_out || m.cols() != dim_in)
        {
            return Err(Error::InvalidChannel(format!(
                "kraus[{k}] is {}x{}, expected {dim_out}x{dim_in}",
                m.rows(),
                m.cols()
            )));
        }
        let ch = Self { dim_in, dim_out, kraus };
        let defect = ch.trace_preservation_defect();
        if defect > tol.eps() {
            return Err(Error::InvalidChannel(format!(
                "kraus operators are not trace preserving (Σ K†K deviates from I by {defect:e})"
            )));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Conjugation by a unitary.
    pub fn unitary(u: ComplexMatrix, tol: Tolerance) -> Result<Self> {
        let d = u.rows();
        Self::new(d, u.cols(), vec![u], tol)
    }

    /// `ρ ↦ Tr[ρ]·I/d`, with Kraus family `{|i⟩⟨j|/√d}`.
    pub fn completely_depolarizing(dim: usize) -> Self {
        let s = 1.0 / (dim as f64).sqrt();
        let mut kraus = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut k = ComplexMatrix::zeros(dim, dim);
                k[(i, j)] = num_complex::Complex64::new(s, 0.0);
                kraus.push(k);
            }
        }
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus,
        }
    }

    /// Random channel with `n_kraus` operators: Ginibre blocks `Aᵢ`
    /// renormalized as `Kᵢ = Aᵢ S^{-1/2}` with `S = Σ Aᵢ†Aᵢ`.
    pub fn random<R: RngCore + ?Sized>(rng: &mut R, dim: usize, n_kraus: usize) -> Self {
        let tol = Tolerance::default();
        loop {
            let blocks: Vec<ComplexMatrix> = (0..n_kraus.max(1)).map(|_| random::ginibre(rng, dim, dim)).collect();
            let mut s = ComplexMatrix::zeros(dim, dim);
            for a in &blocks {
                s = &s + &(&a.adjoint() * a);
            }
            if let Ok(w) = s.inverse_sqrt(1e-6, tol) {
                let kraus = blocks.iter().map(|a| a * &w).collect();
                return Self {
                    dim_in: dim,
                    dim_out: dim,
                    kraus,
                };
            }
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Entry-wise distance of `Σ Kᵢ†Kᵢ` from the identity.
    pub fn trace_preservation_defect(&self) -> f64 {
        let mut total = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            total = &total + &(&k.adjoint() * k);
        }
        total
            .max_abs_diff(&ComplexMatrix::identity(self.dim_in))
            .expect("shapes fixed at construction")
    }

    /// `Σᵢ Kᵢ T Kᵢ†` for an arbitrary operator `T`.
    pub fn apply(&self, t: &ComplexMatrix) -> Result<ComplexMatrix> {
        if t.rows() != self.dim_in || t.cols() != self.dim_in {
            return Err(dim_mismatch(
                format!("{0}x{0}", self.dim_in),
                format!("{}x{}", t.rows(), t.cols()),
            ));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &(&(k * t) * &k.adjoint());
        }
        Ok(out)
    }

    /// `Λ*(B) = Σᵢ Kᵢ† B Kᵢ`.
    pub fn adjoint(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if b.rows() != self.dim_out || b.cols() != self.dim_out {
            return Err(dim_mismatch(
                format!("{0}x{0}", self.dim_out),
                format!("{}x{}", b.rows(), b.cols()),
            ));
        }
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out = &out + &(&(&k.adjoint() * b) * k);
        }
        Ok(out)
    }

    /// `(Λ ⊗ id)(|Ω⟩⟨Ω|)` with `|Ω⟩ = Σᵢ|i⟩|i⟩/√d`; positive semidefinite
    /// exactly when the map is completely positive.
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim_in;
        let mut out = ComplexMatrix::zeros(self.dim_out * d, self.dim_out * d);
        for i in 0..d {
            for j in 0..d {
                let mut unit = ComplexMatrix::zeros(d, d);
                unit[(i, j)] = crate::matrix::ONE;
                let image = self.apply(&unit).expect("input shape matches").scale(1.0 / d as f64);
                out = &out + &image.tensor(&unit);
            }
        }
        out
    }
}

/// `Λ(ρ)` as a density matrix.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = ch.apply(rho.operator())?;
    Ok(DensityMatrix::from_trusted(out.hermitian_part()))
}

/// `Λ*(B)`.
pub fn channel_adjoint(ch: &KrausChannel, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    ch.adjoint(b)
}

// ---------------------------------------------------------------------------
// Measurement models

/// A probe `K` prepared in `ρ0`, coupled to the system by `Λ` on `H ⊗ K`
/// and read out by the pointer POVM `F` on `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct MeasurementModel {
    system_dim: usize,
    probe_dim: usize,
    probe_state: DensityMatrix,
    channel: KrausChannel,
    pointer: Povm,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRepr {
    system_dim: usize,
    probe_dim: usize,
    probe_state: DensityMatrix,
    channel: KrausChannel,
    pointer: Povm,
}

impl TryFrom<ModelRepr> for MeasurementModel {
    type Error = Error;
    fn try_from(r: ModelRepr) -> Result<Self> {
        MeasurementModel::new(r.system_dim, r.probe_dim, r.probe_state, r.channel, r.pointer)
    }
}

impl From<MeasurementModel> for ModelRepr {
    fn from(m: MeasurementModel) -> Self {
        ModelRepr {
            system_dim: m.system_dim,
            probe_dim: m.probe_dim,
            probe_state: m.probe_state,
            channel: m.channel,
            pointer: m.pointer,
        }
    }
}

impl MeasurementModel {
    pub fn new(
        system_dim: usize,
        probe_dim: usize,
        probe_state: DensityMatrix,
        channel: KrausChannel,
        pointer: Povm,
    ) -> Result<Self> {
        if system_dim == 0 || probe_dim == 0 {
            return Err(Error::InvalidModel("dimensions must be positive".into()));
        }
        let joint = system_dim * probe_dim;
        if channel.dim_in() != joint || channel.dim_out() != joint {
            return Err(Error::InvalidModel(format!(
                "`channel` acts on {}→{}, expected {joint}→{joint}",
                channel.dim_in(),
                channel.dim_out()
            )));
        }
        if probe_state.dim() != probe_dim {
            return Err(Error::InvalidModel(format!(
                "`probe_state` has dimension {}, expected {probe_dim}",
                probe_state.dim()
            )));
        }
        if pointer.dim() != probe_dim {
            return Err(Error::InvalidModel(format!(
                "`pointer` has dimension {}, expected {probe_dim}",
                pointer.dim()
            )));
        }
        Ok(Self {
            system_dim,
            probe_dim,
            probe_state,
            channel,
            pointer,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_dim
    }

    pub fn probe_state(&self) -> &DensityMatrix {
        &self.probe_state
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    pub fn pointer(&self) -> &Povm {
        &self.pointer
    }

    /// `Tr_K[(I⊗ρ0)·Λ*(B)]` for an operator `B` on `H ⊗ K`.
    fn pull_back(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let weight = ComplexMatrix::identity(self.system_dim).tensor(self.probe_state.operator());
        let evolved = self.channel.adjoint(b).expect("joint dimension fixed at construction");
        (&weight * &evolved)
            .partial_trace((self.system_dim, self.probe_dim), TraceOut::Second)
            .expect("joint dimension fixed at construction")
    }

    /// `Σₓ f(x)(I⊗Fₓ)`.
    fn lifted_pointer(&self, values: &[f64]) -> Result<ComplexMatrix> {
        let probe_side = self.pointer.integrate_real(values)?;
        Ok(ComplexMatrix::identity(self.system_dim).tensor(&probe_side))
    }

    /// Outcome statistics `Tr[Λ(ρ⊗ρ0)(I⊗Fₓ)]` computed by running the model
    /// forward.
    pub fn outcome_probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.system_dim {
            return Err(dim_mismatch(self.system_dim, rho.dim()));
        }
        let joint = rho.operator().tensor(self.probe_state.operator());
        let evolved = self.channel.apply(&joint)?;
        let id = ComplexMatrix::identity(self.system_dim);
        self.pointer
            .effects()
            .iter()
            .map(|f| Ok(evolved.trace_product(&id.tensor(f.operator()))?.re))
            .collect()
    }
}

/// `Eₓ = Tr_K[(I⊗ρ0)·Λ*(I⊗Fₓ)]`. A valid model always induces a POVM, so
/// `NotPovm` here means an internal inconsistency.
pub fn induced_povm(model: &MeasurementModel) -> Result<Povm> {
    let n = model.pointer.space().len();
    let ops = (0..n)
        .map(|x| {
            let mut ind = vec![0.0; n];
            ind[x] = 1.0;
            let lifted = model.lifted_pointer(&ind).expect("length matches");
            model.pull_back(&lifted).hermitian_part()
        })
        .collect();
    Povm::from_operators(model.pointer.space().clone(), ops, Tolerance::new(1e-8)?).map_err(|e| match e {
        Error::NotEffect(msg) => Error::NotPovm(msg),
        other => other,
    })
}

/// Outcome of [`check_model_for`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub pass: bool,
    pub trials: usize,
    pub states_checked: usize,
    pub max_deviation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_outcome: Option<String>,
    pub seed: u64,
    pub rng: String,
}

/// Compares `Tr[ρEₓ]` with the forward model statistics on every outcome,
/// for the tomography frame states followed by `trials` random states.
pub fn check_model_for(
    model: &MeasurementModel,
    e: &Povm,
    trials: usize,
    tol: Tolerance,
    seed: u64,
) -> Result<ModelReport> {
    if e.dim() != model.system_dim {
        return Err(dim_mismatch(model.system_dim, e.dim()));
    }
    if e.space() != model.pointer.space() {
        return Err(Error::SpaceMismatch);
    }
    let d = model.system_dim;
    let mut rng = random::seeded(seed);
    let mut states: Vec<DensityMatrix> = tomography_frame(d)
        .into_iter()
        .map(DensityMatrix::from_trusted)
        .collect();
    states.extend((0..trials).map(|_| random::density_matrix(&mut rng, d)));
    let mut worst = 0.0f64;
    let mut worst_outcome = None;
    for rho in &states {
        let lhs = e.probabilities(rho)?;
        let rhs = model.outcome_probabilities(rho)?;
        for (x, (a, b)) in lhs.iter().zip(&rhs).enumerate() {
            let dev = (a - b).abs();
            if dev > worst {
                worst = dev;
                worst_outcome = Some(e.space().label(x).to_string());
            }
        }
    }
    let pass = worst <= tol.eps();
    Ok(ModelReport {
        pass,
        trials,
        states_checked: states.len(),
        max_deviation: worst,
        worst_outcome: if pass { None } else { worst_outcome },
        seed,
        rng: RNG_ALGORITHM.to_string(),
    })
}

/// `Q(f) = Tr_K[(I⊗ρ0)·Λ*(Σₓ f(x)(I⊗Fₓ))]` for `f` on the pointer outcomes.
pub fn dual_model_quantize(model: &MeasurementModel, f: &ClassicalEffect) -> Result<QuantumEffect> {
    if f.space() != model.pointer.space() {
        return Err(Error::SpaceMismatch);
    }
    let op = dual_model_quantize_real(model, f.values())?;
    QuantumEffect::new(op, Tolerance::new(1e-8)?)
}

/// The same construction for an arbitrary real-valued `f`; the result is
/// Hermitian but is an effect only when `f` takes values in `[0,1]`.
pub fn dual_model_quantize_real(model: &MeasurementModel, values: &[f64]) -> Result<ComplexMatrix> {
    let lifted = model.lifted_pointer(values)?;
    Ok(model.pull_back(&lifted).hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::quantize;
    use crate::fixtures;
    use crate::QuantizationMap;

    #[test]
    fn identity_and_unitary_channels() {
        let mut rng = random::seeded(1);
        let rho = random::density_matrix(&mut rng, 3);
        let out = apply_channel(&KrausChannel::identity(3), &rho).unwrap();
        assert!(out.operator().max_abs_diff(rho.operator()).unwrap() < 1e-15);

        let u = random::unitary(&mut rng, 3);
        let ch = KrausChannel::unitary(u.clone(), Tolerance::default()).unwrap();
        let out = apply_channel(&ch, &rho).unwrap();
        let want = rho.operator().conjugate_by(&u).unwrap();
        assert!(out.operator().max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn depolarizing_sends_everything_to_maximally_mixed() {
        let mut rng = random::seeded(2);
        let ch = KrausChannel::completely_depolarizing(3);
        for _ in 0..5 {
            let rho = random::density_matrix(&mut rng, 3);
            let out = apply_channel(&ch, &rho).unwrap();
            assert!(
                out.operator()
                    .max_abs_diff(DensityMatrix::maximally_mixed(3).operator())
                    .unwrap()
                    < 1e-14
            );
        }
    }

    #[test]
    fn adjoint_is_unital_and_pairs_with_forward_map() {
        let mut rng = random::seeded(3);
        for d in 1..5 {
            let ch = KrausChannel::random(&mut rng, d, 3);
            assert!(ch.trace_preservation_defect() < 1e-12);
            let id = ComplexMatrix::identity(d);
            assert!(ch.adjoint(&id).unwrap().max_abs_diff(&id).unwrap() < 1e-12);
            let t = random::hermitian(&mut rng, d);
            let b = random::hermitian(&mut rng, d);
            let lhs = ch.apply(&t).unwrap().trace_product(&b).unwrap();
            let rhs = t.trace_product(&ch.adjoint(&b).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
            assert!(ch.choi().is_psd(Tolerance::default()).unwrap());
        }
    }

    #[test]
    fn channel_validation() {
        let tol = Tolerance::default();
        let half = ComplexMatrix::identity(2).scale(0.5);
        assert!(matches!(
            KrausChannel::new(2, 2, vec![half], tol),
            Err(Error::InvalidChannel(_))
        ));
        assert!(KrausChannel::new(2, 2, vec![], tol).is_err());
        assert!(KrausChannel::new(2, 3, vec![ComplexMatrix::identity(2)], tol).is_err());
        let json = serde_json::to_string(&KrausChannel::completely_depolarizing(2)).unwrap();
        let back: KrausChannel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, KrausChannel::completely_depolarizing(2));
    }

    #[test]
    fn trivial_probe_induces_unit() {
        let model = fixtures::trivial_probe_model(3);
        let e = induced_povm(&model).unwrap();
        assert_eq!(e.space().len(), 1);
        assert!(
            e.effects()[0]
                .operator()
                .max_abs_diff(&ComplexMatrix::identity(3))
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn von_neumann_induces_basis_projectors() {
        for d in 1..5 {
            let model = fixtures::von_neumann_model(d, d);
            let e = induced_povm(&model).unwrap();
            assert!(e.max_entry_distance(&Povm::computational_basis(d)).unwrap() <= 1e-12);
            let r = check_model_for(&model, &Povm::computational_basis(d), 20, Tolerance::default(), 1).unwrap();
            assert!(r.pass);
        }
    }

    #[test]
    fn von_neumann_is_not_a_model_for_the_trine() {
        let model = fixtures::von_neumann_model(2, 3);
        let r = check_model_for(&model, &fixtures::trine(), 20, Tolerance::default(), 1).unwrap();
        assert!(!r.pass);
        assert!(r.max_deviation >= 0.1, "{r:?}");
    }

    #[test]
    fn random_models_satisfy_their_own_condition() {
        let mut rng = random::seeded(4);
        for seed in 0..6 {
            let model = fixtures::random_model(&mut rng, 1 + seed % 3, 1 + (seed / 2) % 3, 3);
            let e = induced_povm(&model).unwrap();
            let r = check_model_for(&model, &e, 50, Tolerance::new(1e-10).unwrap(), seed as u64).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn dual_quantization_matches_induced_povm() {
        let mut rng = random::seeded(5);
        for _ in 0..10 {
            let model = fixtures::random_model(&mut rng, 2, 3, 4);
            let e = induced_povm(&model).unwrap();
            let f = random::classical_effect(&mut rng, e.space());
            let lhs = dual_model_quantize(&model, &f).unwrap();
            let rhs = quantize(&QuantizationMap::Canonical(e.clone()), &f).unwrap();
            assert!(lhs.operator().max_abs_diff(rhs.operator()).unwrap() < 1e-10);
        }
        let model = fixtures::von_neumann_model(3, 3);
        let one = ClassicalEffect::constant(model.pointer().space().clone(), 1.0).unwrap();
        let q = dual_model_quantize(&model, &one).unwrap();
        assert!(q.operator().max_abs_diff(&ComplexMatrix::identity(3)).unwrap() < 1e-14);
    }

    #[test]
    fn unclamped_variant_is_linear() {
        let mut rng = random::seeded(6);
        let model = fixtures::random_model(&mut rng, 2, 2, 3);
        let e = induced_povm(&model).unwrap();
        let values = random::real_function(&mut rng, e.space(), 5.0);
        let lhs = dual_model_quantize_real(&model, &values).unwrap();
        let rhs = e.integrate_real(&values).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn model_json_round_trip() {
        let model = fixtures::von_neumann_model(2, 3);
        let json = serde_json::to_string(&model).unwrap();
        let back: MeasurementModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
    }
}
