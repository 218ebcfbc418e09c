//! Reference instances: the trine POVM, cyclic, dihedral and symmetric groups with
//! their natural actions and representations, covariant and deliberately
//! broken systems of imprimitivity, and a few measurement models.

use num_complex::Complex64;
use rand::RngCore;

use crate::covariance::{build_covariant_povm, FiniteGroup, GroupAction, ImprimitivitySystem, UnitaryRepresentation};
use crate::duality::{random_povm, Povm};
use crate::matrix::{ComplexMatrix, Tolerance};
use crate::model::{KrausChannel, MeasurementModel};
use crate::random;
use crate::space::OutcomeSpace;
use crate::states::DensityMatrix;

/// `Eₖ = ⅔|ψₖ⟩⟨ψₖ|` with `ψₖ = (cos 2πk/3, sin 2πk/3)`.
pub fn trine() -> Povm {
    let ops = (0..3)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let v = [Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0)];
            ComplexMatrix::outer(&v).scale(2.0 / 3.0)
        })
        .collect();
    Povm::from_operators(OutcomeSpace::numbered(3).expect("non-empty"), ops, Tolerance::default())
        .expect("trine is a POVM")
}

// ---------------------------------------------------------------------------
// Groups and actions

/// `Cₙ` with elements `"0".."n-1"` and addition mod `n`.
pub fn cyclic_group(n: usize) -> FiniteGroup {
    let elements = (0..n).map(|k| k.to_string()).collect();
    let table = (0..n).map(|g| (0..n).map(|h| (g + h) % n).collect()).collect();
    FiniteGroup::new(elements, table, 0).expect("cyclic table is a group")
}

/// `Cₙ` acting on itself by translation.
pub fn cyclic_action(n: usize) -> GroupAction {
    let table = (0..n).map(|g| (0..n).map(|x| (g + x) % n).collect()).collect();
    GroupAction::new(cyclic_group(n), OutcomeSpace::numbered(n).expect("n > 0"), table)
        .expect("translation is an action")
}

/// Dihedral group `Dₙ` of order `2n`. Element `s·n + k` sends a vertex
/// `x` to `k + (−1)ˢx mod n`; labels are `"r{k}"` for rotations and
/// `"s{k}"` for reflections.
pub fn dihedral_group(n: usize) -> FiniteGroup {
    let (elements, table) = dihedral_table(n);
    FiniteGroup::new(elements, table, 0).expect("dihedral table is a group")
}

fn dihedral_table(n: usize) -> (Vec<String>, Vec<Vec<usize>>) {
    let elements = (0..2 * n)
        .map(|g| format!("{}{}", if g < n { 'r' } else { 's' }, g % n))
        .collect();
    let table = (0..2 * n)
        .map(|g| {
            let (s1, k1) = (g / n, g % n);
            (0..2 * n)
                .map(|h| {
                    let (s2, k2) = (h / n, h % n);
                    let k = if s1 == 0 { k1 + k2 } else { k1 + n - k2 };
                    ((s1 + s2) % 2) * n + k % n
                })
                .collect()
        })
        .collect();
    (elements, table)
}

/// `Dₙ` acting on the vertices of the regular `n`-gon.
pub fn dihedral_action(n: usize) -> GroupAction {
    let table = (0..2 * n)
        .map(|g| {
            let (s, k) = (g / n, g % n);
            (0..n)
                .map(|x| if s == 0 { (k + x) % n } else { (k + n - x) % n })
                .collect()
        })
        .collect();
    GroupAction::new(dihedral_group(n), OutcomeSpace::numbered(n).expect("n > 0"), table)
        .expect("symmetries of the n-gon")
}

fn s3_permutations() -> Vec<[usize; 3]> {
    vec![[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]]
}

/// `S₃` with each element labelled by its image string (`"120"` sends
/// `0↦1, 1↦2, 2↦0`) and product `(gh)(k) = g(h(k))`.
pub fn symmetric_group_3() -> FiniteGroup {
    let perms = s3_permutations();
    let elements = perms
        .iter()
        .map(|p| p.iter().map(|k| k.to_string()).collect())
        .collect();
    let table = perms
        .iter()
        .map(|g| {
            perms
                .iter()
                .map(|h| {
                    let gh = [g[h[0]], g[h[1]], g[h[2]]];
                    perms.iter().position(|p| *p == gh).expect("closed under composition")
                })
                .collect()
        })
        .collect();
    FiniteGroup::new(elements, table, 0).expect("S3 table is a group")
}

/// `S₃` permuting the points `"0","1","2"`.
pub fn s3_action() -> GroupAction {
    let table = s3_permutations().iter().map(|p| p.to_vec()).collect();
    GroupAction::new(
        symmetric_group_3(),
        OutcomeSpace::numbered(3).expect("non-empty"),
        table,
    )
    .expect("natural action")
}

/// Columns spanning the sum-zero plane of `C³`.
fn s3_isometry() -> ComplexMatrix {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let b = 1.0 / 6.0f64.sqrt();
    ComplexMatrix::from_real(3, 2, &[a, b, -a, b, 0.0, -2.0 * b]).expect("3x2")
}

/// The two-dimensional irreducible representation `U(g) = Vᵀ P(g) V`, with
/// `P` the permutation representation and `V` an orthonormal basis of the
/// sum-zero plane.
pub fn s3_standard_representation() -> UnitaryRepresentation {
    let v = s3_isometry();
    let perm = UnitaryRepresentation::permutation(&s3_action());
    let matrices = (0..6).map(|g| &(&v.adjoint() * perm.matrix(g)) * &v).collect();
    UnitaryRepresentation::new(symmetric_group_3(), matrices, Tolerance::default()).expect("restriction of P")
}

// ---------------------------------------------------------------------------
// Systems of imprimitivity

/// Translation on `C^n` with the computational-basis POVM.
pub fn cyclic_system(n: usize) -> ImprimitivitySystem {
    let action = cyclic_action(n);
    let rep = UnitaryRepresentation::permutation(&action);
    ImprimitivitySystem::new(rep, action, Povm::computational_basis(n)).expect("consistent data")
}

/// Swaps the effects of two outcomes.
fn swap_outcomes(povm: &Povm, a: usize, b: usize) -> Povm {
    let mut ops: Vec<ComplexMatrix> = povm.effects().iter().map(|e| e.operator().clone()).collect();
    ops.swap(a, b);
    Povm::from_operators(povm.space().clone(), ops, Tolerance::default()).expect("permuted POVM")
}

/// Vertex permutations of `Dₙ` on `C^n` with the computational-basis POVM.
pub fn dihedral_system(n: usize) -> ImprimitivitySystem {
    let action = dihedral_action(n);
    let rep = UnitaryRepresentation::permutation(&action);
    ImprimitivitySystem::new(rep, action, Povm::computational_basis(n)).expect("consistent data")
}

/// [`cyclic_system`] with `E₀` and `E₁` exchanged (requires `n ≥ 3`).
pub fn broken_cyclic_system(n: usize) -> ImprimitivitySystem {
    let sys = cyclic_system(n);
    let povm = swap_outcomes(sys.povm(), 0, 1);
    ImprimitivitySystem::new(sys.rep().clone(), sys.action().clone(), povm).expect("consistent data")
}

/// `Eₖ = Vᵀ|k⟩⟨k|V`: a trine on the sum-zero plane, covariant for the
/// standard representation of `S₃`.
pub fn s3_system() -> ImprimitivitySystem {
    let v = s3_isometry();
    let ops = (0..3)
        .map(|k| (&(&v.adjoint() * &ComplexMatrix::basis_projector(3, k)) * &v).hermitian_part())
        .collect();
    let povm = Povm::from_operators(OutcomeSpace::numbered(3).expect("non-empty"), ops, Tolerance::default())
        .expect("compressed basis is a POVM");
    ImprimitivitySystem::new(s3_standard_representation(), s3_action(), povm).expect("consistent data")
}

/// [`s3_system`] with `E₀` and `E₁` exchanged. The transposition of `1`
/// and `2` fixes the point `0` but carries the new `E₀` to `E₂`.
pub fn broken_s3_system() -> ImprimitivitySystem {
    let sys = s3_system();
    let povm = swap_outcomes(sys.povm(), 0, 1);
    ImprimitivitySystem::new(sys.rep().clone(), sys.action().clone(), povm).expect("consistent data")
}

/// Covariant POVM for the standard representation of `S₃` built from a
/// seed effect.
pub fn s3_system_from_seed(seed: &ComplexMatrix) -> crate::Result<ImprimitivitySystem> {
    let (rep, action) = (s3_standard_representation(), s3_action());
    let povm = build_covariant_povm(&rep, &action, seed, Tolerance::default())?;
    ImprimitivitySystem::new(rep, action, povm)
}

/// Any POVM is covariant under the trivial group.
pub fn trivial_group_system(povm: &Povm) -> ImprimitivitySystem {
    let group = cyclic_group(1);
    let m = povm.space().len();
    let action = GroupAction::new(group.clone(), povm.space().clone(), vec![(0..m).collect()]).expect("identity");
    let rep = UnitaryRepresentation::new(group, vec![ComplexMatrix::identity(povm.dim())], Tolerance::default())
        .expect("trivial representation");
    ImprimitivitySystem::new(rep, action, povm.clone()).expect("consistent data")
}

// ---------------------------------------------------------------------------
// Measurement models

/// `U|i⟩|j⟩ = |i⟩|j + i mod k⟩` on `C^d ⊗ C^k`.
pub fn controlled_shift(system_dim: usize, probe_dim: usize) -> ComplexMatrix {
    let n = system_dim * probe_dim;
    let mut u = ComplexMatrix::zeros(n, n);
    for i in 0..system_dim {
        for j in 0..probe_dim {
            u[(i * probe_dim + (j + i) % probe_dim, i * probe_dim + j)] = crate::matrix::ONE;
        }
    }
    u
}

/// Probe `C^probe_dim` in `|0⟩`, coupled by the controlled shift and read
/// in the computational basis. With `probe_dim ≥ system_dim` the induced
/// POVM is the computational basis of the system, padded with zero effects
/// for the extra pointer outcomes.
pub fn von_neumann_model(system_dim: usize, probe_dim: usize) -> MeasurementModel {
    let channel = KrausChannel::unitary(controlled_shift(system_dim, probe_dim), Tolerance::default())
        .expect("permutation matrix");
    MeasurementModel::new(
        system_dim,
        probe_dim,
        DensityMatrix::basis_state(probe_dim, 0),
        channel,
        Povm::computational_basis(probe_dim),
    )
    .expect("consistent dimensions")
}

/// One-dimensional probe, identity coupling, single-outcome pointer.
pub fn trivial_probe_model(system_dim: usize) -> MeasurementModel {
    MeasurementModel::new(
        system_dim,
        1,
        DensityMatrix::basis_state(1, 0),
        KrausChannel::identity(system_dim),
        Povm::trivial(1),
    )
    .expect("consistent dimensions")
}

/// Random channel with `n_kraus` operators, random probe state and a
/// random pointer POVM with `probe_dim + 1` outcomes.
pub fn random_model<R: RngCore + ?Sized>(
    rng: &mut R,
    system_dim: usize,
    probe_dim: usize,
    n_kraus: usize,
) -> MeasurementModel {
    let channel = KrausChannel::random(rng, system_dim * probe_dim, n_kraus);
    let probe_state = random::density_matrix(rng, probe_dim);
    let pointer = random_povm(probe_dim, probe_dim + 1, rng.next_u64()).expect("valid sizes");
    MeasurementModel::new(system_dim, probe_dim, probe_state, channel, pointer).expect("consistent dimensions")
}
