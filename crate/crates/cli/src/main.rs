//! `effectdual` command-line front end.
//!
//! Exit codes: 0 pass, 1 property violation, 2 input error, 3 internal
//! invariant breach. Reports are JSON on stdout (or `--output`), compact by
//! default and indented with `--pretty`; diagnostics go to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use effectdual::covariance::{
    build_covariant_povm, check_covariant_measurement, covariance_triangle, ImprimitivitySystem, SystemFile,
};
use effectdual::duality::{measure, quantize, random_povm, verify_duality_square};
use effectdual::model::{check_model_for, dual_model_quantize, dual_model_quantize_real, induced_povm};
use effectdual::random::{self, RNG_ALGORITHM};
use effectdual::suite::{run_suite, FixtureSet, SuiteConfig};
use effectdual::transcript::{recover_povm, Transcript};
use effectdual::{
    ClassicalEffect, ComplexMatrix, DensityMatrix, Effect, Error, MeasurementMap, MeasurementModel, OutcomeSpace, Povm,
    QuantizationMap, QuantumEffect, Tolerance,
};

#[derive(Parser, Debug)]
#[command(
    name = "effectdual",
    version,
    about = "Quantization/measurement duality checks for finite POVMs"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Primary input file (POVM, system, model or transcript, depending on the command).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 500)]
    trials: usize,
    /// Numerical tolerance; falls back to EFFECTDUAL_TOL, then 1e-9.
    #[arg(long, global = true, env = "EFFECTDUAL_TOL")]
    tol: Option<f64>,
    /// Indent the JSON report.
    #[arg(long, global = true)]
    pretty: bool,
    /// Perturb one side of an internal cross-check so that the exit-3 path
    /// can be exercised. Testing aid only.
    #[arg(long, global = true, hide = true)]
    inject_fault: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check Tr[ρQ(f)] = Σ f(x)M(ρ)(x) on random (ρ, f).
    VerifyDuality {
        /// Use a seeded random POVM instead of --input.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        outcomes: usize,
    },
    /// Quantize a classical effect with the POVM in --input.
    Quantize {
        #[arg(long)]
        effect: PathBuf,
    },
    /// Outcome distribution of a state under the POVM in --input.
    Measure {
        #[arg(long)]
        state: PathBuf,
    },
    /// Recover the POVM behind a recorded black-box transcript.
    RecoverPovm,
    /// Run the three covariance checks on a system file.
    CheckCovariance {
        /// Construct a covariant POVM for the representation and action instead.
        #[arg(long)]
        build: bool,
        #[arg(long)]
        seed_effect: Option<PathBuf>,
    },
    /// Build a covariant POVM by group averaging a seed effect.
    BuildCovariant {
        /// Seed operator file; a random rank-one seed is drawn from --seed when absent.
        #[arg(long)]
        seed_effect: Option<PathBuf>,
    },
    /// Emit the POVM induced by the measurement model in --input.
    ModelInduce,
    /// Check that the model in --input is a measurement model for a target POVM.
    ModelCheck {
        #[arg(long)]
        target: PathBuf,
    },
    /// Quantize through the model in --input and cross-check the induced POVM.
    DualQuantize {
        #[arg(long)]
        effect: PathBuf,
        /// Accept an arbitrary real-valued function; the result need not be an effect.
        #[arg(long)]
        unclamped: bool,
    },
    /// Order-theoretic distance between two effects of the same kind.
    Metric {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Run every module property.
    Suite {
        /// Load reference fixtures from this directory instead of the built-in ones.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Write the reference fixtures as JSON files into a directory.
    WriteFixtures {
        #[arg(long)]
        dir: PathBuf,
    },
}

// ---------------------------------------------------------------------------
// Outcomes and failures

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn violation(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn breach(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

/// Library errors raised while processing already-parsed input are input
/// errors unless the caller classifies them otherwise.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::input(e.to_string())
    }
}

/// A serialized report plus the verdict it carries.
struct Outcome {
    json: serde_json::Value,
    code: u8,
}

impl Outcome {
    fn new<T: Serialize>(report: &T, pass: bool) -> Result<Self, Failure> {
        Self::with_code(report, if pass { 0 } else { 1 })
    }

    fn with_code<T: Serialize>(report: &T, code: u8) -> Result<Self, Failure> {
        let json = serde_json::to_value(report).map_err(|e| Failure::breach(format!("report serialization: {e}")))?;
        Ok(Self { json, code })
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn input_path(g: &Global) -> Result<&Path, Failure> {
    g.input
        .as_deref()
        .ok_or_else(|| Failure::input("this command needs --input"))
}

fn tolerance(g: &Global) -> Result<Tolerance, Failure> {
    match g.tol {
        Some(eps) => Tolerance::new(eps).map_err(|e| Failure::input(format!("--tol: {e}"))),
        None => Ok(Tolerance::default()),
    }
}

// ---------------------------------------------------------------------------
// Report shapes that exist only at the CLI boundary

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorFile {
    dim: usize,
    operator: ComplexMatrix,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealFunctionFile {
    space: OutcomeSpace,
    values: IndexMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecoveryReport {
    kind: String,
    records: usize,
    residual: f64,
    povm: Povm,
}

#[derive(Debug, Serialize, Deserialize)]
struct DualQuantizeReport {
    dim: usize,
    operator: ComplexMatrix,
    unclamped: bool,
    /// Entry-wise distance from `Σ f(x)·Eₓ` with `E` the induced POVM.
    central_identity_deviation: f64,
    pass: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetricReport {
    kind: String,
    metric: f64,
    norm_distance: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BuildReport {
    built: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    system: Option<SystemFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min_eigenvalue: Option<f64>,
    seed: u64,
    rng: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct FixturesWritten {
    dir: String,
    files: Vec<String>,
}

// ---------------------------------------------------------------------------
// Commands

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let g = &cli.global;
    let tol = tolerance(g)?;
    if g.trials == 0 {
        return Err(Failure::input("--trials must be positive"));
    }
    match &cli.command {
        Command::VerifyDuality { random, dim, outcomes } => {
            let povm = if *random {
                if *dim == 0 || *outcomes == 0 {
                    return Err(Failure::input("--dim and --outcomes must be positive"));
                }
                random_povm(*dim, *outcomes, g.seed)?
            } else {
                read_json::<Povm>(input_path(g)?)?
            };
            let report = verify_duality_square(&povm, g.trials, tol, g.seed)?;
            Outcome::new(&report, report.pass)
        }
        Command::Quantize { effect } => {
            let povm: Povm = read_json(input_path(g)?)?;
            let f: ClassicalEffect = read_json(effect)?;
            let q = quantize(&QuantizationMap::Canonical(povm), &f)?;
            Outcome::new(&q, true)
        }
        Command::Measure { state } => {
            let povm: Povm = read_json(input_path(g)?)?;
            let rho: DensityMatrix = read_json(state)?;
            let p = measure(&MeasurementMap::Canonical(povm), &rho)?;
            Outcome::new(&p, true)
        }
        Command::RecoverPovm => {
            let t: Transcript = read_json(input_path(g)?)?;
            let kind = match &t {
                Transcript::Measurement { .. } => "measurement",
                Transcript::Quantization { .. } => "quantization",
            };
            match recover_povm(&t, tol) {
                Ok(r) => Outcome::new(
                    &RecoveryReport {
                        kind: kind.to_string(),
                        records: t.len(),
                        residual: r.residual,
                        povm: r.povm,
                    },
                    true,
                ),
                Err(e @ Error::NotPovm(_)) => Err(Failure::violation(e.to_string())),
                Err(e) => Err(e.into()),
            }
        }
        Command::CheckCovariance {
            build: true,
            seed_effect,
        }
        | Command::BuildCovariant { seed_effect } => build(g, seed_effect.as_deref(), tol),
        Command::CheckCovariance { build: false, .. } => {
            let file: SystemFile = read_json(input_path(g)?)?;
            let sys = file.system()?;
            let mut report = covariance_triangle(&sys, g.trials, tol, g.seed)?;
            if g.inject_fault {
                report.measurement = check_covariant_measurement(&tampered(&sys)?, g.trials, tol, g.seed)?;
                report.agree = report.imprimitivity.pass == report.quantization.pass
                    && report.quantization.pass == report.measurement.pass;
            }
            let code = if !report.agree {
                3
            } else if report.imprimitivity.pass {
                0
            } else {
                1
            };
            if code == 3 {
                eprintln!("error: covariance checks disagree; this is an internal invariant breach");
            }
            Outcome::with_code(&report, code)
        }
        Command::ModelInduce => {
            let model: MeasurementModel = read_json(input_path(g)?)?;
            Outcome::new(&induce(&model)?, true)
        }
        Command::ModelCheck { target } => {
            let model: MeasurementModel = read_json(input_path(g)?)?;
            let e: Povm = read_json(target)?;
            let report = check_model_for(&model, &e, g.trials, tol, g.seed)?;
            Outcome::new(&report, report.pass)
        }
        Command::DualQuantize { effect, unclamped } => {
            let model: MeasurementModel = read_json(input_path(g)?)?;
            let (space, values) = if *unclamped {
                let f: RealFunctionFile = read_json(effect)?;
                let values = f.space.align(&f.values, "values")?;
                (f.space, values)
            } else {
                let f: ClassicalEffect = read_json(effect)?;
                (f.space().clone(), f.values().to_vec())
            };
            if &space != model.pointer().space() {
                return Err(Failure::input(
                    "`space` of the function differs from the pointer outcomes",
                ));
            }
            let operator = if *unclamped {
                dual_model_quantize_real(&model, &values)?
            } else {
                let f = ClassicalEffect::new(space, values.clone(), tol)?;
                dual_model_quantize(&model, &f)?.into_operator()
            };
            let mut expected = induce(&model)?.integrate_real(&values)?;
            if g.inject_fault {
                expected[(0, 0)].re += 1e-3;
            }
            let deviation = operator.max_abs_diff(&expected)?;
            let report = DualQuantizeReport {
                dim: operator.rows(),
                operator,
                unclamped: *unclamped,
                central_identity_deviation: deviation,
                pass: deviation <= tol.eps(),
            };
            if !report.pass {
                eprintln!("error: dual quantization disagrees with the induced POVM");
            }
            Outcome::with_code(&report, if report.pass { 0 } else { 3 })
        }
        Command::Metric { a, b } => metric(a, b, tol),
        Command::Suite { fixtures } => {
            let fx = match fixtures {
                Some(dir) => FixtureSet::load_dir(dir)?,
                None => FixtureSet::builtin(),
            };
            let cfg = SuiteConfig {
                trials: g.trials,
                seed: g.seed,
                tol,
            };
            let report = run_suite(&cfg, &fx)?;
            Outcome::new(&report, report.pass)
        }
        Command::WriteFixtures { dir } => {
            FixtureSet::builtin().write_dir(dir)?;
            let mut files: Vec<String> = fs::read_dir(dir)
                .map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
                .collect();
            files.sort();
            Outcome::new(
                &FixturesWritten {
                    dir: dir.display().to_string(),
                    files,
                },
                true,
            )
        }
    }
}

fn induce(model: &MeasurementModel) -> Result<Povm, Failure> {
    induced_povm(model).map_err(|e| match e {
        Error::NotPovm(msg) => Failure::breach(format!("model induced a non-POVM: {msg}")),
        other => other.into(),
    })
}

/// The same system with the effects of its first two outcomes exchanged.
fn tampered(sys: &ImprimitivitySystem) -> Result<ImprimitivitySystem, Failure> {
    let povm = sys.povm();
    if povm.space().len() < 2 {
        return Err(Failure::input("--inject-fault needs at least two outcomes"));
    }
    let mut ops: Vec<ComplexMatrix> = povm.effects().iter().map(|e| e.operator().clone()).collect();
    ops.swap(0, 1);
    let povm = Povm::from_operators(povm.space().clone(), ops, Tolerance::default())?;
    Ok(ImprimitivitySystem::new(sys.rep().clone(), sys.action().clone(), povm)?)
}

fn build(g: &Global, seed_effect: Option<&Path>, tol: Tolerance) -> Result<Outcome, Failure> {
    let file: SystemFile = read_json(input_path(g)?)?;
    let action = file.action()?;
    let d = file.rep.dim();
    let seed_op = match seed_effect {
        Some(path) => {
            let s: OperatorFile = read_json(path)?;
            if s.operator.rows() != s.dim || s.operator.cols() != s.dim {
                return Err(Failure::input("seed `operator` does not match `dim`"));
            }
            s.operator
        }
        None => random::psd(&mut random::seeded(g.seed), d, 1),
    };
    let mut report = BuildReport {
        built: false,
        system: None,
        error: None,
        min_eigenvalue: None,
        seed: g.seed,
        rng: RNG_ALGORITHM.to_string(),
    };
    match build_covariant_povm(&file.rep, &action, &seed_op, tol) {
        Ok(povm) => {
            report.built = true;
            report.system = Some(SystemFile {
                povm: Some(povm),
                ..file
            });
            Outcome::new(&report, true)
        }
        Err(Error::SingularAverage(min)) => {
            report.error = Some("singular_average".into());
            report.min_eigenvalue = Some(min);
            eprintln!("group average of the seed is singular (smallest eigenvalue {min:e})");
            Outcome::new(&report, false)
        }
        Err(e) => Err(e.into()),
    }
}

fn metric(a: &Path, b: &Path, tol: Tolerance) -> Result<Outcome, Failure> {
    let va: serde_json::Value = read_json(a)?;
    let quantum = va.get("operator").is_some();
    let vb: serde_json::Value = read_json(b)?;
    let report = if quantum {
        let (x, y): (QuantumEffect, QuantumEffect) = (parse(a, va)?, parse(b, vb)?);
        MetricReport {
            kind: "quantum".into(),
            metric: x.metric(&y, tol)?,
            norm_distance: x.operator().operator_norm_distance(y.operator(), tol)?,
        }
    } else {
        let (x, y): (ClassicalEffect, ClassicalEffect) = (parse(a, va)?, parse(b, vb)?);
        MetricReport {
            kind: "classical".into(),
            metric: x.metric(&y, tol)?,
            norm_distance: x.sup_distance(&y)?,
        }
    };
    Outcome::new(&report, true)
}

fn parse<T: DeserializeOwned>(path: &Path, v: serde_json::Value) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn emit(g: &Global, json: &serde_json::Value) -> Result<(), Failure> {
    let mut text = if g.pretty {
        serde_json::to_string_pretty(json)
    } else {
        serde_json::to_string(json)
    }
    .map_err(|e| Failure::breach(format!("report serialization: {e}")))?;
    text.push('\n');
    match &g.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(&cli).and_then(|outcome| {
        emit(&cli.global, &outcome.json)?;
        Ok(outcome.code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
