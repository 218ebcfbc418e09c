//! The full property suite: every module invariant evaluated on seeded
//! random instances and on the reference fixtures, summarized as one row per
//! property with its worst observed deviation.
//!
//! Each property carries its own threshold. The run-wide tolerance is used
//! only for validation and for the covariance verdicts.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::covariance::{
    build_covariant_povm, check_imprimitivity, covariance_triangle, ImprimitivitySystem, SystemFile,
    UnitaryRepresentation,
};
use crate::duality::{
    povm_from_measurement, povm_from_quantization, random_povm, verify_duality_square, MeasurementMap, Povm,
    QuantizationMap, RecoveryConfig,
};
use crate::effects::{ClassicalEffect, Effect, QuantumEffect};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::matrix::{ComplexMatrix, Tolerance};
use crate::model::{check_model_for, dual_model_quantize, induced_povm, KrausChannel, MeasurementModel};
use crate::random::{self, RNG_ALGORITHM};
use crate::space::OutcomeSpace;
use crate::states::{busch_extract, riesz_extract, AffinityProbe, ConvexState, DensityMatrix, ProbabilityVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub tol: Tolerance,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            trials: 500,
            seed: 0,
            tol: Tolerance::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub instances: usize,
    pub max_deviation: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub pass: bool,
    pub trials: usize,
    pub seed: u64,
    pub rng: String,
    pub properties: Vec<PropertyResult>,
}

// ---------------------------------------------------------------------------
// Fixtures

/// A system of imprimitivity together with the verdict it is expected to get.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSystem {
    pub name: String,
    pub system: ImprimitivitySystem,
    pub covariant: bool,
}

/// The reference inputs the suite runs against.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSet {
    pub trine: Povm,
    pub systems: Vec<NamedSystem>,
    pub von_neumann: MeasurementModel,
    pub trivial_probe: MeasurementModel,
}

const SYSTEM_FILES: [(&str, bool); 6] = [
    ("c4", true),
    ("c4_broken", false),
    ("c6", true),
    ("c6_broken", false),
    ("s3", true),
    ("s3_broken", false),
];

impl FixtureSet {
    pub fn builtin() -> Self {
        let systems = SYSTEM_FILES
            .iter()
            .map(|&(name, covariant)| {
                let system = match name {
                    "c4" => fixtures::cyclic_system(4),
                    "c4_broken" => fixtures::broken_cyclic_system(4),
                    "c6" => fixtures::cyclic_system(6),
                    "c6_broken" => fixtures::broken_cyclic_system(6),
                    "s3" => fixtures::s3_system(),
                    _ => fixtures::broken_s3_system(),
                };
                NamedSystem {
                    name: name.to_string(),
                    system,
                    covariant,
                }
            })
            .collect();
        Self {
            trine: fixtures::trine(),
            systems,
            von_neumann: fixtures::von_neumann_model(3, 3),
            trivial_probe: fixtures::trivial_probe_model(2),
        }
    }

    /// Writes every fixture as pretty-printed JSON into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        let io = |file: &str, e: std::io::Error| Error::Fixture {
            file: file.to_string(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(dir).map_err(|e| io(".", e))?;
        let put = |file: &str, json: String| std::fs::write(dir.join(file), json + "\n").map_err(|e| io(file, e));
        put("trine.json", to_pretty(&self.trine))?;
        for s in &self.systems {
            put(
                &format!("{}.json", s.name),
                to_pretty(&SystemFile::from_system(&s.system)),
            )?;
        }
        put("von_neumann.json", to_pretty(&self.von_neumann))?;
        put("trivial_probe.json", to_pretty(&self.trivial_probe))?;
        Ok(())
    }

    /// Loads the fixture files written by [`FixtureSet::write_dir`]. Any
    /// missing or malformed file is an error naming that file.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let trine = load(dir, "trine.json")?;
        let systems = SYSTEM_FILES
            .iter()
            .map(|&(name, covariant)| {
                let file = format!("{name}.json");
                let raw: SystemFile = load(dir, &file)?;
                let system = raw.system().map_err(|e| Error::Fixture {
                    file: file.clone(),
                    message: e.to_string(),
                })?;
                Ok(NamedSystem {
                    name: name.to_string(),
                    system,
                    covariant,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            trine,
            systems,
            von_neumann: load(dir, "von_neumann.json")?,
            trivial_probe: load(dir, "trivial_probe.json")?,
        })
    }
}

fn to_pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("fixture types serialize")
}

fn load<T: for<'de> Deserialize<'de>>(dir: &Path, file: &str) -> Result<T> {
    let text = std::fs::read_to_string(dir.join(file)).map_err(|e| Error::Fixture {
        file: file.to_string(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Fixture {
        file: file.to_string(),
        message: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Properties

struct Tally {
    name: &'static str,
    threshold: f64,
    instances: usize,
    worst: f64,
    failed: Option<String>,
}

impl Tally {
    fn new(name: &'static str, threshold: f64) -> Self {
        Self {
            name,
            threshold,
            instances: 0,
            worst: 0.0,
            failed: None,
        }
    }

    fn record(&mut self, deviation: f64) {
        self.instances += 1;
        if deviation.is_nan() {
            self.worst = f64::INFINITY;
        } else {
            self.worst = self.worst.max(deviation);
        }
    }

    fn fail(&mut self, why: impl Into<String>) {
        if self.failed.is_none() {
            self.failed = Some(why.into());
        }
    }

    fn finish(self) -> PropertyResult {
        let pass = self.failed.is_none() && self.worst <= self.threshold;
        PropertyResult {
            name: self.name.to_string(),
            instances: self.instances,
            max_deviation: self.worst,
            threshold: self.threshold,
            pass,
            note: self.failed,
        }
    }
}

/// Runs every property and collects the results in a fixed order.
pub fn run_suite(cfg: &SuiteConfig, fx: &FixtureSet) -> Result<SuiteReport> {
    let n = cfg.trials.max(1);
    let heavy = (n / 10).max(1);
    let mut rng = random::seeded(cfg.seed);
    // every property draws from its own stream so that they stay independent
    let mut sub = || random::seeded(rng.next_u64());

    let properties = vec![
        duality_square(&mut sub(), n, fx)?,
        quantization_round_trip(&mut sub(), heavy)?,
        measurement_round_trip(&mut sub(), heavy)?,
        riesz_round_trip(&mut sub(), heavy)?,
        busch_round_trip(&mut sub(), heavy)?,
        non_affine_detection(),
        effect_axioms(
            &mut sub(),
            n,
            |rng| {
                let space = OutcomeSpace::numbered(rng.random_range(1..=8)).expect("non-empty");
                random::classical_effect(rng, &space)
            },
            "classical_effect_axioms",
        )?,
        effect_axioms(
            &mut sub(),
            n,
            |rng| {
                let d = rng.random_range(1..=4);
                random::quantum_effect(rng, d)
            },
            "quantum_effect_axioms",
        )?,
        convex_axioms(
            &mut sub(),
            n,
            |rng| {
                let space = OutcomeSpace::numbered(rng.random_range(1..=8)).expect("non-empty");
                let s = random::probability_vector(rng, &space);
                (s.sample_like(rng), s.sample_like(rng), s)
            },
            "classical_convex_axioms",
        )?,
        convex_axioms(
            &mut sub(),
            n,
            |rng| {
                let d = rng.random_range(1..=4);
                let s = random::density_matrix(rng, d);
                (s.sample_like(rng), s.sample_like(rng), s)
            },
            "quantum_convex_axioms",
        )?,
        metric_equals_norm(&mut sub(), n, cfg.tol)?,
        covariance_triangle_property(fx, heavy, cfg)?,
        covariant_constructor(&mut sub(), heavy, cfg.tol)?,
        adjoint_pairing(&mut sub(), n)?,
        model_condition(&mut sub(), heavy, fx)?,
        central_identity(&mut sub(), n)?,
        von_neumann_basis(fx)?,
    ];
    Ok(SuiteReport {
        pass: properties.iter().all(|p| p.pass),
        trials: n,
        seed: cfg.seed,
        rng: RNG_ALGORITHM.to_string(),
        properties,
    })
}

fn random_shape(rng: &mut impl RngCore) -> (usize, usize) {
    (rng.random_range(1..=6), rng.random_range(1..=8))
}

fn duality_square(rng: &mut impl RngCore, n: usize, fx: &FixtureSet) -> Result<PropertyResult> {
    let mut t = Tally::new("duality_square", 1e-10);
    let tol = Tolerance::new(1e-10)?;
    t.record(verify_duality_square(&fx.trine, 5, tol, rng.next_u64())?.max_deviation);
    for _ in 0..n {
        let (d, m) = random_shape(rng);
        let povm = random_povm(d, m, rng.next_u64())?;
        t.record(verify_duality_square(&povm, 1, tol, rng.next_u64())?.max_deviation);
    }
    Ok(t.finish())
}

/// Hides a POVM behind an opaque quantization map.
pub fn hidden_quantization(povm: &Povm) -> QuantizationMap {
    let p = povm.clone();
    QuantizationMap::black_box(povm.space().clone(), povm.dim(), move |f: &ClassicalEffect| {
        QuantumEffect::new(
            p.integrate_real(f.values()).expect("same space"),
            Tolerance::new(1e-8).expect("valid"),
        )
        .expect("image of an effect")
    })
}

/// Hides a POVM behind an opaque measurement map.
pub fn hidden_measurement(povm: &Povm) -> MeasurementMap {
    let p = povm.clone();
    MeasurementMap::black_box(povm.space().clone(), povm.dim(), move |rho: &DensityMatrix| {
        let w = p.probabilities(rho).expect("same dimension");
        ProbabilityVector::new(p.space().clone(), w, Tolerance::new(1e-8).expect("valid")).expect("distribution")
    })
}

fn quantization_round_trip(rng: &mut impl RngCore, n: usize) -> Result<PropertyResult> {
    let mut t = Tally::new("povm_from_quantization", 1e-10);
    for _ in 0..n {
        let (d, m) = random_shape(rng);
        let povm = random_povm(d, m, rng.next_u64())?;
        let got = povm_from_quantization(&hidden_quantization(&povm), &RecoveryConfig::default())?;
        t.record(got.max_entry_distance(&povm)?);
    }
    Ok(t.finish())
}

fn measurement_round_trip(rng: &mut impl RngCore, n: usize) -> Result<PropertyResult> {
    let mut t = Tally::new("povm_from_measurement", 1e-9);
    for _ in 0..n {
        let (d, m) = random_shape(rng);
        let povm = random_povm(d, m, rng.next_u64())?;
        let got = povm_from_measurement(&hidden_measurement(&povm), &RecoveryConfig::default())?;
        t.record(got.max_entry_distance(&povm)?);
    }
    Ok(t.finish())
}

fn riesz_round_trip(rng: &mut impl RngCore, n: usize) -> Result<PropertyResult> {
    let mut t = Tally::new("riesz_extract", 1e-9);
    let probe = AffinityProbe::default();
    for _ in 0..n {
        let space = OutcomeSpace::numbered(rng.random_range(1..=8))?;
        let hidden = random::classical_effect(rng, &space);
        let h = hidden.clone();
        let phi = move |mu: &ProbabilityVector| mu.integrate(&h).expect("same space");
        let got = riesz_extract(&phi, &space, &probe, Tolerance::default())?;
        t.record(got.sup_distance(&hidden)?);
    }
    Ok(t.finish())
}

fn busch_round_trip(rng: &mut impl RngCore, n: usize) -> Result<PropertyResult> {
    let mut t = Tally::new("busch_extract", 1e-9);
    let probe = AffinityProbe::default();
    for _ in 0..n {
        let d = rng.random_range(2..=5);
        let hidden = random::density_matrix(rng, d);
        let h = hidden.clone();
        let beta = move |e: &QuantumEffect| h.operator().trace_product(e.operator()).expect("same dim").re;
        let got = busch_extract(&beta, d, &probe, Tolerance::default())?;
        t.record(got.distance(&hidden)?);
    }
    Ok(t.finish())
}

pub type ClassicalFunctional = Arc<dyn Fn(&ProbabilityVector) -> f64 + Send + Sync>;
pub type QuantumFunctional = Arc<dyn Fn(&QuantumEffect) -> f64 + Send + Sync>;
pub type Named<T> = (&'static str, T);

/// Non-affine functionals of both kinds; each must be rejected by the
/// affinity probe.
pub fn non_affine_functionals() -> (Vec<Named<ClassicalFunctional>>, Vec<Named<QuantumFunctional>>) {
    type C = ClassicalFunctional;
    type Q = QuantumFunctional;
    let classical: Vec<(&str, C)> = vec![
        ("square_of_first_weight", Arc::new(|mu| mu.weights()[0].powi(2))),
        (
            "max_weight",
            Arc::new(|mu| mu.weights().iter().copied().fold(0.0, f64::max)),
        ),
        ("sqrt_of_first_weight", Arc::new(|mu| mu.weights()[0].sqrt())),
        (
            "collision_probability",
            Arc::new(|mu| mu.weights().iter().map(|w| w * w).sum()),
        ),
        (
            "threshold_on_first_weight",
            Arc::new(|mu| if mu.weights()[0] > 0.3 { 1.0 } else { 0.0 }),
        ),
    ];
    let quantum: Vec<(&str, Q)> = vec![
        ("squared_expectation", Arc::new(|e| (e.operator()[(0, 0)].re).powi(2))),
        (
            "largest_eigenvalue",
            Arc::new(|e| {
                *e.operator()
                    .hermitian_eigenvalues(Tolerance::default())
                    .expect("hermitian")
                    .last()
                    .expect("non-empty")
            }),
        ),
        (
            "normalized_purity",
            Arc::new(|e| {
                let d = e.dim() as f64;
                e.operator().trace_product(e.operator()).expect("square").re / d
            }),
        ),
        (
            "smallest_eigenvalue",
            Arc::new(|e| {
                e.operator()
                    .hermitian_eigenvalues(Tolerance::default())
                    .expect("hermitian")[0]
            }),
        ),
        (
            "determinant_like",
            Arc::new(|e| {
                e.operator()
                    .hermitian_eigenvalues(Tolerance::default())
                    .expect("hermitian")
                    .iter()
                    .product()
            }),
        ),
    ];
    (classical, quantum)
}

fn non_affine_detection() -> PropertyResult {
    let mut t = Tally::new("non_affine_detected", 0.0);
    let probe = AffinityProbe::default();
    let tol = Tolerance::default();
    let (classical, quantum) = non_affine_functionals();
    let space = OutcomeSpace::numbered(4).expect("non-empty");
    for (name, phi) in &classical {
        t.record(0.0);
        let f = |mu: &ProbabilityVector| phi(mu);
        if !matches!(riesz_extract(&f, &space, &probe, tol), Err(Error::NotAffine(_))) {
            t.fail(format!("`{name}` was not rejected"));
        }
    }
    for (name, beta) in &quantum {
        t.record(0.0);
        let f = |e: &QuantumEffect| beta(e);
        if !matches!(busch_extract(&f, 3, &probe, tol), Err(Error::NotAffine(_))) {
            t.fail(format!("`{name}` was not rejected"));
        }
    }
    t.finish()
}

/// Worst deviation over the effect-module laws for one random instance
/// `x`, with `y ≤ ¬x` and `z ≤ ¬(x⊕y)` so that all sums are defined.
pub fn effect_axiom_deviation<E: Effect>(x: &E, rng: &mut dyn RngCore) -> Result<f64> {
    let tol = Tolerance::default();
    let (r, s) = (random::unit_interval(rng), random::unit_interval(rng));
    let y = x.neg().scalar(r)?;
    let xy = x.ovee(&y, tol)?;
    let z = xy.neg().scalar(s)?;
    let mut worst = 0.0f64;
    let mut see = |d: f64| worst = worst.max(d);
    // commutativity and associativity of ⊕
    see(xy.linear_deviation(&[(1.0, &y.ovee(x, tol)?)])?);
    see(xy
        .ovee(&z, tol)?
        .linear_deviation(&[(1.0, &x.ovee(&y.ovee(&z, tol)?, tol)?)])?);
    // zero is neutral, ¬x is the complement of x
    see(x.ovee(&x.zero_like(), tol)?.linear_deviation(&[(1.0, x)])?);
    see(x.ovee(&x.neg(), tol)?.linear_deviation(&[(1.0, &x.unit_like())])?);
    see(x.neg().neg().linear_deviation(&[(1.0, x)])?);
    // scalar action
    let (a, b) = (random::unit_interval(rng), random::unit_interval(rng));
    see(xy
        .scalar(a)?
        .linear_deviation(&[(1.0, &x.scalar(a)?.ovee(&y.scalar(a)?, tol)?)])?);
    let (p, q) = (a * 0.5, b * 0.5);
    see(x
        .scalar(p + q)?
        .linear_deviation(&[(1.0, &x.scalar(p)?.ovee(&x.scalar(q)?, tol)?)])?);
    see(x.scalar(a)?.scalar(b)?.linear_deviation(&[(1.0, &x.scalar(a * b)?)])?);
    see(x.scalar(1.0)?.linear_deviation(&[(1.0, x)])?);
    see(x
        .unit_like()
        .scalar(a)?
        .ovee(&x.unit_like().scalar(1.0 - a)?, tol)?
        .linear_deviation(&[(1.0, &x.unit_like())])?);
    Ok(worst)
}

fn effect_axioms<E: Effect>(
    rng: &mut impl RngCore,
    n: usize,
    sample: impl Fn(&mut dyn RngCore) -> E,
    name: &'static str,
) -> Result<PropertyResult> {
    let mut t = Tally::new(name, 1e-12);
    for _ in 0..n {
        let x = sample(rng);
        t.record(effect_axiom_deviation(&x, rng)?);
    }
    Ok(t.finish())
}

/// Worst deviation over the convex-space laws for one random triple.
pub fn convex_axiom_deviation<S: ConvexState>(x: &S, y: &S, z: &S, rng: &mut dyn RngCore) -> Result<f64> {
    let (r, s) = (random::unit_interval(rng), random::unit_interval(rng));
    let mut worst = 0.0f64;
    let mut see = |d: f64| worst = worst.max(d);
    see(S::convex_combine(1.0, x, y)?.distance(x)?);
    see(S::convex_combine(r, x, x)?.distance(x)?);
    see(S::convex_combine(r, x, y)?.distance(&S::convex_combine(1.0 - r, y, x)?)?);
    // c_r(x, c_s(y, z)) = c_{r+(1−r)s}(c_{r/(r+(1−r)s)}(x, y), z)
    let lhs = S::convex_combine(r, x, &S::convex_combine(s, y, z)?)?;
    let outer = r + (1.0 - r) * s;
    let inner = if outer > 0.0 { r / outer } else { 0.0 };
    let rhs = S::convex_combine(outer, &S::convex_combine(inner, x, y)?, z)?;
    see(lhs.distance(&rhs)?);
    Ok(worst)
}

fn convex_axioms<S: ConvexState>(
    rng: &mut impl RngCore,
    n: usize,
    sample: impl Fn(&mut dyn RngCore) -> (S, S, S),
    name: &'static str,
) -> Result<PropertyResult> {
    let mut t = Tally::new(name, 1e-12);
    for _ in 0..n {
        let (x, y, z) = sample(rng);
        t.record(convex_axiom_deviation(&x, &y, &z, rng)?);
    }
    Ok(t.finish())
}

fn metric_equals_norm(rng: &mut impl RngCore, n: usize, tol: Tolerance) -> Result<PropertyResult> {
    let mut t = Tally::new("metric_equals_norm", 1e-10);
    for _ in 0..n {
        let d = rng.random_range(1..=5);
        let (a, b) = (random::quantum_effect(rng, d), random::quantum_effect(rng, d));
        let norm = a.operator().operator_norm_distance(b.operator(), tol)?;
        t.record((a.metric(&b, tol)? - norm).abs());
        let space = OutcomeSpace::numbered(rng.random_range(1..=8))?;
        let (f, g) = (
            random::classical_effect(rng, &space),
            random::classical_effect(rng, &space),
        );
        t.record((f.metric(&g, tol)? - f.sup_distance(&g)?).abs());
    }
    Ok(t.finish())
}

fn covariance_triangle_property(fx: &FixtureSet, trials: usize, cfg: &SuiteConfig) -> Result<PropertyResult> {
    let mut t = Tally::new("covariance_triangle", 1e-10);
    for s in &fx.systems {
        let tri = covariance_triangle(&s.system, trials, cfg.tol, cfg.seed)?;
        if !tri.agree {
            t.fail(format!("`{}`: the three checks disagree", s.name));
        }
        if tri.imprimitivity.pass != s.covariant {
            t.fail(format!("`{}`: unexpected verdict", s.name));
        }
        if s.covariant {
            t.record(
                tri.imprimitivity
                    .max_deviation
                    .max(tri.quantization.max_deviation)
                    .max(tri.measurement.max_deviation),
            );
        } else {
            t.instances += 1;
            if tri.imprimitivity.max_deviation < 1e-2 || tri.imprimitivity.witnesses.is_empty() {
                t.fail(format!("`{}`: violation too small or without witness", s.name));
            }
        }
    }
    Ok(t.finish())
}

fn covariant_constructor(rng: &mut impl RngCore, n: usize, tol: Tolerance) -> Result<PropertyResult> {
    let mut t = Tally::new("build_covariant_povm", 1e-10);
    let c4 = fixtures::cyclic_action(4);
    let targets = [
        (UnitaryRepresentation::permutation(&c4), c4),
        (fixtures::s3_standard_representation(), fixtures::s3_action()),
    ];
    let mut singular = 0;
    for (rep, action) in &targets {
        for _ in 0..n {
            let rank = rng.random_range(1..=rep.dim());
            let seed = random::psd(rng, rep.dim(), rank);
            match build_covariant_povm(rep, action, &seed, tol) {
                Ok(povm) => {
                    let sys = ImprimitivitySystem::new(rep.clone(), action.clone(), povm)?;
                    t.record(check_imprimitivity(&sys, tol).max_deviation);
                }
                Err(Error::SingularAverage(_)) => {
                    singular += 1;
                    t.instances += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
    let mut out = t.finish();
    if singular > 0 {
        out.note = Some(format!("{singular} seeds gave a singular average"));
    }
    Ok(out)
}

fn adjoint_pairing(rng: &mut impl RngCore, n: usize) -> Result<PropertyResult> {
    let mut t = Tally::new("channel_adjoint_pairing", 1e-10);
    for _ in 0..n {
        let d = rng.random_range(1..=6);
        let k = rng.random_range(1..=4);
        let ch = KrausChannel::random(rng, d, k);
        let (a, b) = (random::hermitian(rng, d), random::hermitian(rng, d));
        let lhs = ch.apply(&a)?.trace_product(&b)?;
        let rhs = a.trace_product(&ch.adjoint(&b)?)?;
        let id = ComplexMatrix::identity(d);
        t.record((lhs - rhs).norm().max(ch.adjoint(&id)?.max_abs_diff(&id)?));
    }
    Ok(t.finish())
}

fn model_condition(rng: &mut impl RngCore, n: usize, fx: &FixtureSet) -> Result<PropertyResult> {
    let mut t = Tally::new("model_for_induced_povm", 1e-10);
    let tol = Tolerance::new(1e-10)?;
    for model in [&fx.von_neumann, &fx.trivial_probe] {
        t.record(check_model_for(model, &induced_povm(model)?, 20, tol, rng.next_u64())?.max_deviation);
    }
    for _ in 0..n {
        let (sd, pd) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let model = fixtures::random_model(rng, sd, pd, 3);
        t.record(check_model_for(&model, &induced_povm(&model)?, 20, tol, rng.next_u64())?.max_deviation);
    }
    Ok(t.finish())
}

fn central_identity(rng: &mut impl RngCore, n: usize) -> Result<PropertyResult> {
    let mut t = Tally::new("dual_model_quantization", 1e-10);
    for _ in 0..n {
        let (sd, pd) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let model = fixtures::random_model(rng, sd, pd, 2);
        let e = induced_povm(&model)?;
        let f = random::classical_effect(rng, e.space());
        let lhs = dual_model_quantize(&model, &f)?;
        let rhs = e.integrate_real(f.values())?;
        t.record(lhs.operator().max_abs_diff(&rhs)?);
    }
    Ok(t.finish())
}

fn von_neumann_basis(fx: &FixtureSet) -> Result<PropertyResult> {
    let mut t = Tally::new("von_neumann_induces_basis", 1e-12);
    let model = &fx.von_neumann;
    let basis = Povm::computational_basis(model.system_dim());
    if model.probe_dim() != model.system_dim() {
        t.fail("von Neumann fixture must have equal system and probe dimensions");
    } else {
        t.record(induced_povm(model)?.max_entry_distance(&basis)?);
    }
    Ok(t.finish())
}
