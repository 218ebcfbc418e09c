use effectdual::duality::{quantize, random_povm};
use effectdual::fixtures::{self, controlled_shift};
use effectdual::model::{
    apply_channel, channel_adjoint, check_model_for, dual_model_quantize, dual_model_quantize_real, induced_povm,
};
use effectdual::random::{self, seeded};
use effectdual::{
    ClassicalEffect, ComplexMatrix, DensityMatrix, Error, KrausChannel, MeasurementModel, Povm, QuantizationMap,
    QuantumEffect, Tolerance,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `ΣᵢKᵢ·T·Kᵢ†` with the products written out.
fn kraus_sum(kraus: &[ComplexMatrix], t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for k in kraus {
        for a in 0..n {
            for b in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..n {
                    for e in 0..n {
                        acc += k[(a, c)] * t[(c, e)] * k[(b, e)].conj();
                    }
                }
                out[(a, b)] += acc;
            }
        }
    }
    out
}

/// `Tr[Λ(ρ⊗ρ0)(I⊗Fₓ)]` for every pointer outcome, with the tensor product
/// and the pointer lift written as index arithmetic.
fn forward_statistics(model: &MeasurementModel, rho: &DensityMatrix) -> Vec<f64> {
    let (d, k) = (model.system_dim(), model.probe_dim());
    let rho0 = model.probe_state().operator();
    let joint = ComplexMatrix::from_fn(d * k, d * k, |r, c| {
        rho.operator()[(r / k, c / k)] * rho0[(r % k, c % k)]
    });
    let evolved = kraus_sum(model.channel().kraus(), &joint);
    model
        .pointer()
        .effects()
        .iter()
        .map(|f| {
            let mut acc = 0.0;
            for r in 0..d * k {
                for c in 0..d * k {
                    if r / k == c / k {
                        acc += (evolved[(r, c)] * f.operator()[(c % k, r % k)]).re;
                    }
                }
            }
            acc
        })
        .collect()
}

/// `Tr_K[(I⊗ρ0)·U†(I⊗Fₓ)U]` by explicit sums, for a unitary coupling.
fn unitary_model_effect(
    u: &ComplexMatrix,
    rho0: &ComplexMatrix,
    fx: &ComplexMatrix,
    d: usize,
    k: usize,
) -> ComplexMatrix {
    let n = d * k;
    let lifted = ComplexMatrix::from_fn(n, n, |r, c| {
        if r / k == c / k {
            fx[(r % k, c % k)]
        } else {
            effectdual::matrix::ZERO
        }
    });
    let mut back = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..n {
                for b in 0..n {
                    acc += u[(a, r)].conj() * lifted[(a, b)] * u[(b, c)];
                }
            }
            back[(r, c)] = acc;
        }
    }
    ComplexMatrix::from_fn(d, d, |i, ip| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..k {
            for l in 0..k {
                acc += rho0[(j, l)] * back[(i * k + l, ip * k + j)];
            }
        }
        acc
    })
}

#[test]
fn channel_examples() {
    let mut rng = seeded(1);
    let rho = random::density_matrix(&mut rng, 3);
    let same = apply_channel(&KrausChannel::identity(3), &rho).unwrap();
    assert!(same.operator().max_abs_diff(rho.operator()).unwrap() < 1e-15);

    let u = random::unitary(&mut rng, 3);
    let out = apply_channel(&KrausChannel::unitary(u.clone(), tol()).unwrap(), &rho).unwrap();
    let direct = &(&u * rho.operator()) * &u.adjoint();
    assert!(out.operator().max_abs_diff(&direct).unwrap() < 1e-13);

    let dep = KrausChannel::completely_depolarizing(3);
    for _ in 0..5 {
        let r = random::density_matrix(&mut rng, 3);
        let direct = kraus_sum(dep.kraus(), r.operator());
        assert!(
            direct
                .max_abs_diff(&ComplexMatrix::identity(3).scale(1.0 / 3.0))
                .unwrap()
                < 1e-14
        );
        assert!(
            apply_channel(&dep, &r)
                .unwrap()
                .operator()
                .max_abs_diff(&direct)
                .unwrap()
                < 1e-14
        );
    }
    assert!(apply_channel(&dep, &DensityMatrix::maximally_mixed(2)).is_err());

    let b = random::hermitian(&mut rng, 3);
    assert!(
        channel_adjoint(&KrausChannel::identity(3), &b)
            .unwrap()
            .max_abs_diff(&b)
            .unwrap()
            < 1e-15
    );
}

#[test]
fn invalid_channels_are_rejected() {
    let shrink = ComplexMatrix::identity(2).scale(0.5);
    assert!(matches!(
        KrausChannel::new(2, 2, vec![shrink], tol()),
        Err(Error::InvalidChannel(_))
    ));
    assert!(matches!(
        KrausChannel::new(2, 2, vec![], tol()),
        Err(Error::InvalidChannel(_))
    ));
    let json = r#"{"dim_in":2,"dim_out":2,"kraus":[{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[0.5,0]]}]}"#;
    assert!(serde_json::from_str::<KrausChannel>(json).is_err());
}

#[test]
fn trivial_probe_induces_the_unit() {
    let p = induced_povm(&fixtures::trivial_probe_model(3)).unwrap();
    assert_eq!(p.space().len(), 1);
    assert!(
        p.effects()[0]
            .operator()
            .max_abs_diff(&ComplexMatrix::identity(3))
            .unwrap()
            < 1e-15
    );
}

#[test]
fn von_neumann_matches_direct_computation() {
    for (d, k) in [(2, 2), (3, 3), (2, 3), (4, 4)] {
        let model = fixtures::von_neumann_model(d, k);
        let induced = induced_povm(&model).unwrap();
        let u = controlled_shift(d, k);
        for (x, fx) in model.pointer().effects().iter().enumerate() {
            let direct = unitary_model_effect(&u, model.probe_state().operator(), fx.operator(), d, k);
            assert!(induced.effects()[x].operator().max_abs_diff(&direct).unwrap() <= 1e-12);
            let basis = if x < d {
                ComplexMatrix::basis_projector(d, x)
            } else {
                ComplexMatrix::zeros(d, d)
            };
            assert!(direct.max_abs_diff(&basis).unwrap() <= 1e-12, "d={d} k={k} x={x}");
        }
        let target = if d == k {
            Povm::computational_basis(d)
        } else {
            induced.clone()
        };
        assert!(check_model_for(&model, &target, 50, tol(), 0).unwrap().pass);
    }
}

#[test]
fn von_neumann_is_not_a_model_for_the_trine() {
    let model = fixtures::von_neumann_model(2, 3);
    let report = check_model_for(&model, &fixtures::trine(), 50, tol(), 0).unwrap();
    assert!(!report.pass && report.max_deviation >= 0.1);
    assert!(report.worst_outcome.is_some());
    assert!(matches!(
        check_model_for(&fixtures::von_neumann_model(2, 2), &fixtures::trine(), 5, tol(), 0),
        Err(Error::SpaceMismatch)
    ));
    assert!(check_model_for(&model, &Povm::computational_basis(3), 5, tol(), 0).is_err());
}

#[test]
fn dual_quantization_examples() {
    let model = fixtures::random_model(&mut seeded(9), 2, 2, 3);
    let space = model.pointer().space().clone();
    let one = ClassicalEffect::constant(space.clone(), 1.0).unwrap();
    assert!(
        dual_model_quantize(&model, &one)
            .unwrap()
            .operator()
            .max_abs_diff(&ComplexMatrix::identity(2))
            .unwrap()
            < 1e-12
    );
    let induced = induced_povm(&model).unwrap();
    for x in 0..space.len() {
        let q = dual_model_quantize(&model, &ClassicalEffect::indicator(space.clone(), x)).unwrap();
        assert!(q.operator().max_abs_diff(induced.effects()[x].operator()).unwrap() < 1e-12);
    }
    // the unclamped extension is linear in f
    let values = [2.0, -1.0, 0.5];
    let op = dual_model_quantize_real(&model, &values).unwrap();
    let expect = induced.integrate_real(&values).unwrap();
    assert!(op.max_abs_diff(&expect).unwrap() < 1e-12);
    assert!(QuantumEffect::new(op, tol()).is_err());
}

#[test]
fn model_json_round_trip() {
    let model = fixtures::random_model(&mut seeded(4), 2, 3, 2);
    let json = serde_json::to_string(&model).unwrap();
    let back: MeasurementModel = serde_json::from_str(&json).unwrap();
    assert_eq!(back, model);
    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["probe_dim"] = serde_json::json!(2);
    assert!(serde_json::from_value::<MeasurementModel>(v).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjoint_pairing(seed in any::<u64>(), d in 1usize..7, n_kraus in 1usize..4) {
        let mut rng = seeded(seed);
        let ch = KrausChannel::random(&mut rng, d, n_kraus);
        let (t, b) = (random::hermitian(&mut rng, d), random::hermitian(&mut rng, d));
        let lhs = trace_of_product(&kraus_sum(ch.kraus(), &t), &b);
        let rhs = trace_of_product(&t, &channel_adjoint(&ch, &b).unwrap());
        prop_assert!((lhs - rhs).norm() <= 1e-10);
        prop_assert!((trace_of_product(&ch.apply(&t).unwrap(), &b) - rhs).norm() <= 1e-10);
    }

    #[test]
    fn unital_iff_trace_preserving(seed in any::<u64>(), d in 1usize..7, n_kraus in 1usize..4) {
        let mut rng = seeded(seed);
        let ch = KrausChannel::random(&mut rng, d, n_kraus);
        let mut gram = ComplexMatrix::zeros(d, d);
        for k in ch.kraus() {
            gram = &gram + &(&k.adjoint() * k);
        }
        prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(d)).unwrap() <= 1e-10);
        prop_assert!(channel_adjoint(&ch, &ComplexMatrix::identity(d)).unwrap().max_abs_diff(&ComplexMatrix::identity(d)).unwrap() <= 1e-10);
        let rho = random::density_matrix(&mut rng, d);
        let out = apply_channel(&ch, &rho).unwrap();
        prop_assert!((out.operator().trace().unwrap().re - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn choi_matrix_is_psd(seed in any::<u64>(), d in 1usize..5, n_kraus in 1usize..4) {
        let mut rng = seeded(seed);
        let ch = KrausChannel::random(&mut rng, d, n_kraus);
        prop_assert!(ch.choi().is_psd(Tolerance::new(1e-9).unwrap()).unwrap());
    }

    #[test]
    fn random_models_measure_their_induced_povm(seed in any::<u64>(), d in 1usize..4, k in 1usize..4, n_kraus in 1usize..3) {
        let mut rng = seeded(seed);
        let model = fixtures::random_model(&mut rng, d, k, n_kraus);
        let e = induced_povm(&model).unwrap();
        for _ in 0..5 {
            let rho = random::density_matrix(&mut rng, d);
            let direct = forward_statistics(&model, &rho);
            let probs = e.probabilities(&rho).unwrap();
            for (a, b) in probs.iter().zip(&direct) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }
        prop_assert!(check_model_for(&model, &e, 10, tol(), seed).unwrap().pass);
    }

    #[test]
    fn central_identity(seed in any::<u64>(), d in 1usize..4, k in 1usize..4) {
        let mut rng = seeded(seed);
        let model = fixtures::random_model(&mut rng, d, k, 2);
        let e = induced_povm(&model).unwrap();
        let f = random::classical_effect(&mut rng, e.space());
        let lhs = dual_model_quantize(&model, &f).unwrap();
        let rhs = quantize(&QuantizationMap::Canonical(e), &f).unwrap();
        prop_assert!(lhs.operator().max_abs_diff(rhs.operator()).unwrap() <= 1e-10);
    }

    #[test]
    fn model_check_detects_other_povms(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let model = fixtures::random_model(&mut rng, 2, 2, 2);
        let other = random_povm(2, 3, seed.wrapping_add(1)).unwrap();
        let induced = induced_povm(&model).unwrap();
        let gap = other.max_entry_distance(&induced).unwrap();
        let report = check_model_for(&model, &other, 10, tol(), seed).unwrap();
        prop_assert_eq!(report.pass, gap <= 1e-9);
    }
}
