//! Systems of imprimitivity over finite groups and the dual notion of a
//! covariant measurement.
//!
//! Every Borel set of a finite outcome space is a disjoint union of
//! singletons and POVMs are additive, so all covariance conditions are
//! checked exhaustively on `(g, {x})` pairs.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::duality::{measure, quantize, MeasurementMap, Povm, QuantizationMap};
use crate::effects::{ClassicalEffect, QuantumEffect};
use crate::error::{dim_mismatch, Error, Result};
use crate::frame::tomography_frame;
use crate::matrix::{ComplexMatrix, Tolerance};
use crate::random::{self, RNG_ALGORITHM};
use crate::space::OutcomeSpace;
use crate::states::DensityMatrix;

// ---------------------------------------------------------------------------
// Groups

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupRepr", into = "GroupRepr")]
pub struct FiniteGroup {
    elements: Vec<String>,
    /// `table[g][h]` is the index of `g·h`.
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupRepr {
    elements: Vec<String>,
    table: Vec<Vec<String>>,
    identity: String,
}

impl TryFrom<GroupRepr> for FiniteGroup {
    type Error = Error;
    fn try_from(r: GroupRepr) -> Result<Self> {
        let index = |l: &str| {
            r.elements
                .iter()
                .position(|e| e == l)
                .ok_or_else(|| Error::InvalidGroup(format!("table entry `{l}` is not an element")))
        };
        let table = r
            .table
            .iter()
            .map(|row| row.iter().map(|l| index(l)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let identity = index(&r.identity)
            .map_err(|_| Error::InvalidGroup(format!("identity `{}` is not an element", r.identity)))?;
        FiniteGroup::new(r.elements, table, identity)
    }
}

impl From<FiniteGroup> for GroupRepr {
    fn from(g: FiniteGroup) -> Self {
        GroupRepr {
            table: g
                .table
                .iter()
                .map(|row| row.iter().map(|&k| g.elements[k].clone()).collect())
                .collect(),
            identity: g.elements[g.identity].clone(),
            elements: g.elements,
        }
    }
}

impl FiniteGroup {
    /// Validates closure, identity, inverses and (exhaustively) associativity.
    pub fn new(elements: Vec<String>, table: Vec<Vec<usize>>, identity: usize) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::InvalidGroup("no elements".into()));
        }
        OutcomeSpace::new(elements.clone()).map_err(|e| Error::InvalidGroup(e.to_string()))?;
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidGroup(format!("table must be {n}x{n}")));
        }
        if table.iter().flatten().any(|&k| k >= n) {
            return Err(Error::InvalidGroup("table entry out of range".into()));
        }
        if identity >= n {
            return Err(Error::InvalidGroup("identity out of range".into()));
        }
        for g in 0..n {
            if table[identity][g] != g || table[g][identity] != g {
                return Err(Error::InvalidGroup(format!(
                    "`{}` is not a two-sided identity (fails at `{}`)",
                    elements[identity], elements[g]
                )));
            }
        }
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("`{}` has no inverse", elements[g])))?;
            inverse.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "not associative at ({}, {}, {})",
                            elements[a], elements[b], elements[c]
                        )));
                    }
                }
            }
        }
        Ok(Self {
            elements,
            table,
            identity,
            inverse,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn label(&self, g: usize) -> &str {
        &self.elements[g]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.elements
            .iter()
            .position(|e| e == label)
            .ok_or_else(|| Error::UnknownElement(label.to_string()))
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }
}

// ---------------------------------------------------------------------------
// Actions and representations

/// A left action of a finite group on a finite outcome space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    group: FiniteGroup,
    space: OutcomeSpace,
    /// `table[g][x]` is the index of `g·x`.
    table: Vec<Vec<usize>>,
}

/// JSON shape `{"map": {g: {x: x'}}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupActionRepr {
    pub map: IndexMap<String, IndexMap<String, String>>,
}

impl GroupAction {
    pub fn new(group: FiniteGroup, space: OutcomeSpace, table: Vec<Vec<usize>>) -> Result<Self> {
        let (n, m) = (group.order(), space.len());
        if table.len() != n || table.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidAction(format!("action table must be {n}x{m}")));
        }
        for row in &table {
            let mut seen = vec![false; m];
            for &y in row {
                if y >= m || std::mem::replace(&mut seen[y], true) {
                    return Err(Error::InvalidAction("each element must act as a permutation".into()));
                }
            }
        }
        if let Some(x) = table[group.identity()].iter().enumerate().position(|(x, &y)| x != y) {
            return Err(Error::InvalidAction(format!("identity moves `{}`", space.label(x))));
        }
        for g in 0..n {
            for h in 0..n {
                for x in 0..m {
                    if table[group.mul(g, h)][x] != table[g][table[h][x]] {
                        return Err(Error::InvalidAction(format!(
                            "(gh)·x ≠ g·(h·x) at g=`{}`, h=`{}`, x=`{}`",
                            group.label(g),
                            group.label(h),
                            space.label(x)
                        )));
                    }
                }
            }
        }
        Ok(Self { group, space, table })
    }

    pub fn from_repr(group: FiniteGroup, space: OutcomeSpace, repr: &GroupActionRepr) -> Result<Self> {
        let mut table = Vec::with_capacity(group.order());
        for g in group.elements() {
            let row = repr
                .map
                .get(g)
                .ok_or_else(|| Error::InvalidAction(format!("`map` is missing element `{g}`")))?;
            let targets = space.align(row, &format!("map.{g}"))?;
            let row = targets
                .iter()
                .map(|t| {
                    space
                        .index_of(t)
                        .ok_or_else(|| Error::InvalidAction(format!("`{t}` is not a point")))
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(row);
        }
        if let Some(extra) = repr.map.keys().find(|k| group.index_of(k).is_err()) {
            return Err(Error::InvalidAction(format!("`map` has unknown element `{extra}`")));
        }
        Self::new(group, space, table)
    }

    pub fn to_repr(&self) -> GroupActionRepr {
        let map = self
            .group
            .elements()
            .iter()
            .enumerate()
            .map(|(g, label)| {
                let row = (0..self.space.len())
                    .map(|x| {
                        (
                            self.space.label(x).to_string(),
                            self.space.label(self.table[g][x]).to_string(),
                        )
                    })
                    .collect();
                (label.clone(), row)
            })
            .collect();
        GroupActionRepr { map }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    /// Index of `g·x`.
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.table[g][x]
    }

    pub fn is_transitive(&self) -> bool {
        let m = self.space.len();
        let mut reached = vec![false; m];
        for g in 0..self.group.order() {
            reached[self.table[g][0]] = true;
        }
        reached.into_iter().all(|r| r)
    }
}

/// A unitary representation `g ↦ U(g)` of a finite group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepresentationRepr", into = "RepresentationRepr")]
pub struct UnitaryRepresentation {
    group: FiniteGroup,
    matrices: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RepresentationRepr {
    group: FiniteGroup,
    dim: usize,
    matrices: IndexMap<String, ComplexMatrix>,
}

impl TryFrom<RepresentationRepr> for UnitaryRepresentation {
    type Error = Error;
    fn try_from(r: RepresentationRepr) -> Result<Self> {
        let space = OutcomeSpace::new(r.group.elements().to_vec())?;
        let matrices = space.align(&r.matrices, "matrices")?;
        if let Some(m) = matrices.iter().find(|m| m.rows() != r.dim || m.cols() != r.dim) {
            return Err(dim_mismatch(
                format!("{0}x{0}", r.dim),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        UnitaryRepresentation::new(r.group, matrices, Tolerance::default())
    }
}

impl From<UnitaryRepresentation> for RepresentationRepr {
    fn from(u: UnitaryRepresentation) -> Self {
        RepresentationRepr {
            dim: u.dim(),
            matrices: u.group.elements().iter().cloned().zip(u.matrices).collect(),
            group: u.group,
        }
    }
}

impl UnitaryRepresentation {
    pub fn new(group: FiniteGroup, matrices: Vec<ComplexMatrix>, tol: Tolerance) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::InvalidRepresentation(format!(
                "{} matrices for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        let d = matrices[0].rows();
        let id = ComplexMatrix::identity(d);
        for (g, u) in matrices.iter().enumerate() {
            if u.rows() != d || u.cols() != d {
                return Err(dim_mismatch(format!("{d}x{d}"), format!("{}x{}", u.rows(), u.cols())));
            }
            let defect = (&u.adjoint() * u).max_abs_diff(&id)?;
            if defect > tol.eps() {
                return Err(Error::InvalidRepresentation(format!(
                    "U(`{}`) is not unitary (deviation {defect:e})",
                    group.label(g)
                )));
            }
        }
        if matrices[group.identity()].max_abs_diff(&id)? > tol.eps() {
            return Err(Error::InvalidRepresentation("U(e) ≠ I".into()));
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                let d = (&matrices[g] * &matrices[h]).max_abs_diff(&matrices[group.mul(g, h)])?;
                if d > tol.eps() {
                    return Err(Error::InvalidRepresentation(format!(
                        "U(gh) ≠ U(g)U(h) at g=`{}`, h=`{}` (deviation {d:e})",
                        group.label(g),
                        group.label(h)
                    )));
                }
            }
        }
        Ok(Self { group, matrices })
    }

    /// Permutation representation `U(g)|x⟩ = |g·x⟩` on `C^|X|`.
    pub fn permutation(action: &GroupAction) -> Self {
        let m = action.space().len();
        let matrices = (0..action.group().order())
            .map(|g| {
                let mut u = ComplexMatrix::zeros(m, m);
                for x in 0..m {
                    u[(action.act(g, x), x)] = crate::matrix::ONE;
                }
                u
            })
            .collect();
        Self {
            group: action.group().clone(),
            matrices,
        }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn matrix(&self, g: usize) -> &ComplexMatrix {
        &self.matrices[g]
    }

    /// `U(g) A U(g)†`.
    pub fn conjugate(&self, g: usize, a: &ComplexMatrix) -> ComplexMatrix {
        a.conjugate_by(&self.matrices[g])
            .expect("dimension checked at construction")
    }
}

// ---------------------------------------------------------------------------
// Systems of imprimitivity

/// `(H, U, X, E)`: a representation, an action and a POVM on the same data.
/// Covariance is not assumed; it is what the checks below decide.
#[derive(Debug, Clone, PartialEq)]
pub struct ImprimitivitySystem {
    rep: UnitaryRepresentation,
    action: GroupAction,
    povm: Povm,
}

impl ImprimitivitySystem {
    pub fn new(rep: UnitaryRepresentation, action: GroupAction, povm: Povm) -> Result<Self> {
        if rep.group() != action.group() {
            return Err(Error::InvalidGroup(
                "representation and action use different groups".into(),
            ));
        }
        action.space().require_same(povm.space())?;
        if rep.dim() != povm.dim() {
            return Err(dim_mismatch(rep.dim(), povm.dim()));
        }
        Ok(Self { rep, action, povm })
    }

    pub fn rep(&self) -> &UnitaryRepresentation {
        &self.rep
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    fn group(&self) -> &FiniteGroup {
        self.rep.group()
    }

    /// `E_{g·x} − U(g)EₓU(g)†`.
    fn defect(&self, g: usize, x: usize) -> ComplexMatrix {
        let moved = self.rep.conjugate(g, self.povm.effects()[x].operator());
        self.povm.effects()[self.action.act(g, x)].operator() - &moved
    }
}

/// On-disk form of a system (or of a representation plus action when the
/// POVM is still to be constructed).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub rep: UnitaryRepresentation,
    pub space: OutcomeSpace,
    pub action: GroupActionRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povm: Option<Povm>,
}

impl SystemFile {
    pub fn from_system(sys: &ImprimitivitySystem) -> Self {
        Self {
            rep: sys.rep.clone(),
            space: sys.action.space().clone(),
            action: sys.action.to_repr(),
            povm: Some(sys.povm.clone()),
        }
    }

    pub fn action(&self) -> Result<GroupAction> {
        GroupAction::from_repr(self.rep.group().clone(), self.space.clone(), &self.action)
    }

    pub fn system(&self) -> Result<ImprimitivitySystem> {
        let povm = self
            .povm
            .clone()
            .ok_or_else(|| Error::NotPovm("system file has no `povm`".into()))?;
        ImprimitivitySystem::new(self.rep.clone(), self.action()?, povm)
    }
}

// ---------------------------------------------------------------------------
// Checks

/// A `(g, x)` pair at which a covariance condition fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub element: String,
    pub point: String,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub check: String,
    pub pass: bool,
    pub max_deviation: f64,
    /// Every `(g, x)` whose deviation exceeds the tolerance, in group-major order.
    pub witnesses: Vec<Witness>,
    pub trials: usize,
}

impl CovarianceReport {
    fn finish(
        check: &str,
        per_pair: Vec<(usize, usize, f64)>,
        extra: f64,
        trials: usize,
        sys: &ImprimitivitySystem,
        tol: Tolerance,
    ) -> Self {
        let max_deviation = per_pair.iter().map(|p| p.2).fold(extra, f64::max);
        let witnesses = per_pair
            .into_iter()
            .filter(|p| p.2 > tol.eps())
            .map(|(g, x, deviation)| Witness {
                element: sys.group().label(g).to_string(),
                point: sys.action.space().label(x).to_string(),
                deviation,
            })
            .collect();
        Self {
            check: check.to_string(),
            pass: max_deviation <= tol.eps(),
            max_deviation,
            witnesses,
            trials,
        }
    }

    pub fn witness_pairs(&self) -> Vec<(String, String)> {
        self.witnesses
            .iter()
            .map(|w| (w.element.clone(), w.point.clone()))
            .collect()
    }

    pub fn worst(&self) -> Option<&Witness> {
        self.witnesses.iter().max_by(|a, b| a.deviation.total_cmp(&b.deviation))
    }
}

fn norm(a: &ComplexMatrix) -> f64 {
    let v = a
        .hermitian_eigenvalues(Tolerance::new(1e-6).expect("valid"))
        .expect("Hermitian difference");
    v[0].abs().max(v[v.len() - 1].abs())
}

/// `‖U(g)EₓU(g)⁻¹ − E_{g·x}‖ ≤ eps` for every `g` and every singleton `{x}`.
pub fn check_imprimitivity(sys: &ImprimitivitySystem, tol: Tolerance) -> CovarianceReport {
    let mut per_pair = Vec::new();
    for g in 0..sys.group().order() {
        for x in 0..sys.povm.space().len() {
            per_pair.push((g, x, norm(&sys.defect(g, x))));
        }
    }
    CovarianceReport::finish("imprimitivity", per_pair, 0.0, 0, sys, tol)
}

/// `(L_g f)(x) = f(g⁻¹·x)`.
pub fn left_translate(g: &str, f: &ClassicalEffect, action: &GroupAction) -> Result<ClassicalEffect> {
    let g = action.group().index_of(g)?;
    left_translate_index(g, f, action)
}

fn left_translate_index(g: usize, f: &ClassicalEffect, action: &GroupAction) -> Result<ClassicalEffect> {
    action.space().require_same(f.space())?;
    let g_inv = action.group().inverse(g);
    let values = (0..action.space().len())
        .map(|x| f.values()[action.act(g_inv, x)])
        .collect();
    ClassicalEffect::new(f.space().clone(), values, Tolerance::default())
}

/// `U(g)Q(f)U(g)⁻¹ = Q(L_g f)` for every `g`, over all indicator functions
/// (which make the check exhaustive on singletons) and `trials` random `f`.
pub fn check_q_covariance(
    sys: &ImprimitivitySystem,
    trials: usize,
    tol: Tolerance,
    seed: u64,
) -> Result<CovarianceReport> {
    let q = QuantizationMap::Canonical(sys.povm.clone());
    let space = sys.povm.space().clone();
    let deviation = |g: usize, f: &ClassicalEffect| -> Result<f64> {
        let lhs = sys.rep.conjugate(g, quantize(&q, f)?.operator());
        let rhs = quantize(&q, &left_translate_index(g, f, &sys.action)?)?;
        Ok(norm(&(&lhs - rhs.operator())))
    };
    let mut per_pair = Vec::new();
    for g in 0..sys.group().order() {
        for x in 0..space.len() {
            // L_g 1_{x} = 1_{g·x}, so this is the singleton condition
            per_pair.push((g, x, deviation(g, &ClassicalEffect::indicator(space.clone(), x))?));
        }
    }
    let mut rng = random::seeded(seed);
    let mut extra = 0.0f64;
    for _ in 0..trials {
        let f = random::classical_effect(&mut rng, &space);
        for g in 0..sys.group().order() {
            extra = extra.max(deviation(g, &f)?);
        }
    }
    Ok(CovarianceReport::finish(
        "quantization",
        per_pair,
        extra,
        trials,
        sys,
        tol,
    ))
}

/// The dual condition `M(U(g)⁻¹ρU(g)) = (Mρ)_g` with `(μ_g)(Δ) = μ(gΔ)`,
/// i.e. `Tr[ρE(g·x)] = Tr[ρU(g)EₓU(g)⁻¹]`, over the tomography frame,
/// `trials` random states, and for each `(g, x)` the state that maximizes
/// the discrepancy.
pub fn check_covariant_measurement(
    sys: &ImprimitivitySystem,
    trials: usize,
    tol: Tolerance,
    seed: u64,
) -> Result<CovarianceReport> {
    let d = sys.povm.dim();
    let m = MeasurementMap::Canonical(sys.povm.clone());
    let mut rng = random::seeded(seed);
    let mut probes: Vec<DensityMatrix> = tomography_frame(d)
        .into_iter()
        .map(DensityMatrix::from_trusted)
        .collect();
    probes.extend((0..trials).map(|_| random::density_matrix(&mut rng, d)));

    let pulled_back = |g: usize, rho: &DensityMatrix| {
        let u = sys.rep.matrix(g);
        DensityMatrix::from_trusted(rho.operator().conjugate_by(&u.adjoint()).expect("dims"))
    };
    let discrepancy = |g: usize, rho: &DensityMatrix| -> Result<Vec<f64>> {
        let lhs = measure(&m, &pulled_back(g, rho))?;
        let rhs = measure(&m, rho)?;
        Ok((0..sys.povm.space().len())
            .map(|x| (lhs.weights()[x] - rhs.weights()[sys.action.act(g, x)]).abs())
            .collect())
    };

    let n_pts = sys.povm.space().len();
    let mut per_pair = Vec::new();
    for g in 0..sys.group().order() {
        let mut worst = vec![0.0f64; n_pts];
        for rho in &probes {
            for (w, d) in worst.iter_mut().zip(discrepancy(g, rho)?) {
                *w = w.max(d);
            }
        }
        for (x, w) in worst.iter_mut().enumerate() {
            let moved = QuantumEffect::from_trusted(sys.rep.conjugate(g, sys.povm.effects()[x].operator()));
            let target = &sys.povm.effects()[sys.action.act(g, x)];
            // the extreme eigenvectors of the defect realize its operator norm
            let eig = (target.operator() - moved.operator())
                .hermitian_eigen(Tolerance::new(1e-6).expect("valid"))
                .expect("difference of Hermitian operators");
            for k in [0, d - 1] {
                let rho = DensityMatrix::from_trusted(ComplexMatrix::outer(&eig.vector(k)));
                *w = w.max(discrepancy(g, &rho)?[x]);
            }
            per_pair.push((g, x, *w));
        }
    }
    Ok(CovarianceReport::finish("measurement", per_pair, 0.0, trials, sys, tol))
}

/// The three covariance verdicts side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleReport {
    pub imprimitivity: CovarianceReport,
    pub quantization: CovarianceReport,
    pub measurement: CovarianceReport,
    pub agree: bool,
    pub seed: u64,
    pub rng: String,
}

impl TriangleReport {
    pub fn pass(&self) -> bool {
        self.agree && self.imprimitivity.pass
    }
}

pub fn covariance_triangle(
    sys: &ImprimitivitySystem,
    trials: usize,
    tol: Tolerance,
    seed: u64,
) -> Result<TriangleReport> {
    let imprimitivity = check_imprimitivity(sys, tol);
    let quantization = check_q_covariance(sys, trials, tol, seed)?;
    let measurement = check_covariant_measurement(sys, trials, tol, seed.wrapping_add(1))?;
    let agree = imprimitivity.pass == quantization.pass && quantization.pass == measurement.pass;
    Ok(TriangleReport {
        imprimitivity,
        quantization,
        measurement,
        agree,
        seed,
        rng: RNG_ALGORITHM.to_string(),
    })
}

/// Covariant POVM by group averaging: with base point `x₀` (the first
/// point), `Ẽₓ = Σ_{g·x₀ = x} U(g)·seed·U(g)†`, `S = Σₓ Ẽₓ`, and
/// `Eₓ = S^{-1/2}ẼₓS^{-1/2}`. `S` commutes with the representation, so the
/// result is covariant whenever `S` is invertible.
pub fn build_covariant_povm(
    rep: &UnitaryRepresentation,
    action: &GroupAction,
    seed_effect: &ComplexMatrix,
    tol: Tolerance,
) -> Result<Povm> {
    if rep.group() != action.group() {
        return Err(Error::InvalidGroup(
            "representation and action use different groups".into(),
        ));
    }
    if seed_effect.rows() != rep.dim() || seed_effect.cols() != rep.dim() {
        return Err(dim_mismatch(
            format!("{0}x{0} seed", rep.dim()),
            format!("{}x{}", seed_effect.rows(), seed_effect.cols()),
        ));
    }
    if !action.is_transitive() {
        return Err(Error::NotTransitive);
    }
    if !seed_effect.is_psd(tol)? || seed_effect.max_abs() <= tol.eps() {
        return Err(Error::NotEffect(
            "seed must be positive semidefinite and nonzero".into(),
        ));
    }
    let seed_effect = seed_effect.hermitian_part();
    let d = rep.dim();
    let mut averaged = vec![ComplexMatrix::zeros(d, d); action.space().len()];
    for g in 0..rep.group().order() {
        let x = action.act(g, 0);
        averaged[x] = &averaged[x] + &rep.conjugate(g, &seed_effect);
    }
    let mut total = ComplexMatrix::zeros(d, d);
    for a in &averaged {
        total = &total + a;
    }
    let top = *total.hermitian_eigenvalues(tol)?.last().expect("non-empty");
    let w = total
        .inverse_sqrt(tol.eps() * top.max(1.0), tol)
        .map_err(Error::SingularAverage)?;
    let ops = averaged.iter().map(|a| (&(&w * a) * &w).hermitian_part()).collect();
    Povm::from_operators(action.space().clone(), ops, tol)
}
