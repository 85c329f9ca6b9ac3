use opmeans::harness::Check;
use opmeans::{
    builtin, classify, standard_catalog, verify_ando_hiai, verify_axioms, verify_dual_ando_hiai,
    Grid, Mode, RepresentingFunction, TrialConfig, TrialReport, Verdict, CLASSIFY_TOL,
};

fn cfg(trials: u64) -> TrialConfig {
    TrialConfig {
        trials,
        ..TrialConfig::default()
    }
}

fn verdict(f: &RepresentingFunction) -> Verdict {
    classify(f, &Grid::default(), CLASSIFY_TOL).unwrap().verdict
}

fn in_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(job)
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let f = builtin("log", &[]).unwrap();
    let c = cfg(60);
    let run = |threads| -> Vec<TrialReport> {
        in_pool(threads, || {
            vec![
                verify_ando_hiai(&f, &c).unwrap().without_timing(),
                verify_dual_ando_hiai(&f, &c).unwrap().without_timing(),
                verify_axioms(&f, &c).unwrap().without_timing(),
            ]
        })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(7));
}

#[test]
fn different_seeds_draw_different_inputs() {
    let f = builtin("arithmetic", &[0.5]).unwrap();
    let a = verify_ando_hiai(&f, &cfg(30)).unwrap();
    let b = verify_ando_hiai(
        &f,
        &TrialConfig {
            seed: 99,
            ..cfg(30)
        },
    )
    .unwrap();
    assert_ne!(a.worst_excess, b.worst_excess);
}

/// The checks measure the matrix inequalities themselves; they line up
/// with the scalar classes like this: `σ(A,B) ≤ I ⟹ σ(A^r,B^r) ≤ I` never
/// fails for PMD and Boundary functions, and its mirror never fails for
/// PMI and Boundary functions.
#[test]
fn observed_coherence_with_classification() {
    let c = cfg(200);
    for f in standard_catalog() {
        let v = verdict(&f);
        let upper = verify_ando_hiai(&f, &c).unwrap();
        let lower = verify_dual_ando_hiai(&f, &c).unwrap();
        assert_eq!(
            upper.passed(),
            v.in_pmd(),
            "{} ({v}) upper: {}",
            f.label(),
            upper.violations
        );
        assert_eq!(
            lower.passed(),
            v.in_pmi(),
            "{} ({v}) lower: {}",
            f.label(),
            lower.violations
        );
    }
}

#[test]
fn violations_have_a_scalar_witness() {
    // σ(a, b) = a f(b/a): with σ = 1 the r-th power gives f(x^r)/f(x)^r,
    // which exceeds 1 for PMI functions already on 1×1 inputs
    let f = builtin("arithmetic", &[0.5]).unwrap();
    let c = TrialConfig {
        dims: vec![1],
        ..cfg(50)
    };
    let r = verify_ando_hiai(&f, &c).unwrap();
    assert!(r.violations > 0);
    let first = r.first_violation.unwrap();
    assert_eq!(first.dim, 1);
}

#[test]
fn modes_follow_classification() {
    let c = cfg(5);
    let log = builtin("log", &[]).unwrap();
    let harmonic = builtin("harmonic", &[0.5]).unwrap();
    let geometric = builtin("geometric", &[0.5]).unwrap();
    assert_eq!(
        verify_ando_hiai(&log, &c).unwrap().mode,
        Mode::Certification
    );
    assert_eq!(
        verify_ando_hiai(&harmonic, &c).unwrap().mode,
        Mode::Falsification
    );
    assert_eq!(
        verify_dual_ando_hiai(&harmonic, &c).unwrap().mode,
        Mode::Certification
    );
    assert_eq!(
        verify_dual_ando_hiai(&log, &c).unwrap().mode,
        Mode::Falsification
    );
    let g = verify_ando_hiai(&geometric, &c).unwrap();
    assert_eq!((g.mode, g.check), (Mode::Certification, Check::AndoHiai));
}

#[test]
fn hypothesis_is_tight_after_rescaling() {
    let c = cfg(100);
    for f in standard_catalog() {
        for r in [
            verify_ando_hiai(&f, &c).unwrap(),
            verify_dual_ando_hiai(&f, &c).unwrap(),
        ] {
            let gap = r.max_hypothesis_gap.unwrap();
            assert!(gap <= 1e-10, "{}: {gap:e}", r.function);
        }
    }
}

#[test]
fn report_counts_are_consistent() {
    let c = cfg(40);
    for f in [
        builtin("log", &[]).unwrap(),
        builtin("harmonic", &[0.25]).unwrap(),
    ] {
        let r = verify_ando_hiai(&f, &c).unwrap();
        assert_eq!(r.total, 40 * 3);
        assert!(r.violations <= r.total);
        assert_eq!(r.violations == 0, r.first_violation.is_none());
        assert_eq!(r.violations > 0, r.worst_excess > c.loewner_tol);
        let mono = r.r_monotonicity.unwrap();
        assert_eq!((mono.r_low, mono.r_high, mono.trials), (1.5, 3.0, 40));
        assert!(mono.trials_holding <= mono.trials);

        let a = verify_axioms(&f, &c).unwrap();
        assert_eq!(a.total, 40 * 5);
        assert_eq!(a.axioms.len(), 5);
        assert_eq!(
            a.violations,
            a.axioms.iter().map(|x| x.violations).sum::<u64>()
        );
    }
}

#[test]
fn boundary_functions_are_exact_in_both_directions() {
    // the weighted geometric mean satisfies σ(A^r, B^r) = σ(A, B)^r only
    // for commuting inputs, but both inequalities hold in general
    let c = cfg(100);
    for lam in [0.25, 0.5, 0.75] {
        let g = builtin("geometric", &[lam]).unwrap();
        assert!(verify_ando_hiai(&g, &c).unwrap().passed());
        assert!(verify_dual_ando_hiai(&g, &c).unwrap().passed());
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    let f = builtin("log", &[]).unwrap();
    let bad = [
        TrialConfig {
            trials: 0,
            ..cfg(1)
        },
        TrialConfig {
            dims: vec![],
            ..cfg(1)
        },
        TrialConfig {
            dims: vec![0],
            ..cfg(1)
        },
        TrialConfig {
            r_values: vec![0.9],
            ..cfg(1)
        },
        TrialConfig {
            loewner_tol: -1.0,
            ..cfg(1)
        },
        TrialConfig {
            eig_log_range: (1.0, -1.0),
            ..cfg(1)
        },
    ];
    for c in bad {
        assert!(verify_ando_hiai(&f, &c).is_err(), "{c:?}");
        assert!(verify_axioms(&f, &c).is_err(), "{c:?}");
    }
}
