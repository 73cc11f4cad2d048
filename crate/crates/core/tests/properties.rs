use qnl_core::experiments::{max_principle_check, patch_test};
use qnl_core::linalg::{inverse_positivity_check, positive_definiteness_check, symmetry_defect, DEFAULT_SEED};
use qnl_core::{assemble, Arrangement, CouplingConfig64, Kernel64, KernelFamily, Mesh64, WeightEvaluator64};

fn cfg(n: usize, arrangement: Arrangement<f64>, family: KernelFamily, r: usize) -> CouplingConfig64 {
    CouplingConfig64::with_family(Mesh64::symmetric(n).unwrap(), arrangement, family, r).unwrap()
}

#[test]
fn weight_identities() {
    let delta = 0.3;
    for (family, omega_half) in [(KernelFamily::Constant, 11.0 / 16.0), (KernelFamily::InverseAbs, 0.75)] {
        let w = WeightEvaluator64::new(family.with_horizon(delta).unwrap());
        assert!((w.omega(delta / 2.0).unwrap() - omega_half).abs() <= 1e-13);
        assert!((w.effective_diffusion(0.0).unwrap() - 0.5).abs() <= 1e-13);
        assert!((w.effective_diffusion(delta).unwrap() - 1.0).abs() <= 1e-13);
        assert!((w.effective_diffusion(delta / 2.0).unwrap() - 9.0 / 8.0).abs() <= 1e-13);
        for k in 0..1000 {
            let a = w.effective_diffusion(delta * k as f64 / 999.0).unwrap();
            assert!((0.5..=1.5).contains(&a));
        }
    }
}

#[test]
fn normalisation() {
    for family in [KernelFamily::Constant, KernelFamily::InverseAbs] {
        for delta in [1e-3, 0.2, 5.0] {
            let k: Kernel64 = family.with_horizon(delta).unwrap();
            assert!((k.second_moment_total().unwrap() - 1.0).abs() <= 1e-12);
        }
    }
    let delta = 0.4;
    let custom = Kernel64::custom(delta, "flat", move |_| 1.5 / (delta * delta * delta)).unwrap();
    assert!((custom.second_moment_total().unwrap() - 1.0).abs() <= 1e-8);
}

#[test]
fn patch_test_grid() {
    for family in [KernelFamily::Constant, KernelFamily::InverseAbs] {
        for arrangement in [Arrangement::NonlocalLocal { interface: 0.0 }, Arrangement::LocalNonlocalLocal { left: -0.5, right: 0.5 }] {
            for r in [1, 2, 3, 5] {
                for n in [16, 64] {
                    let res = patch_test(&cfg(n, arrangement, family, r), 3.0, 7.0).unwrap();
                    assert!(res.pass, "{family:?} {arrangement:?} r={r} N={n}: {res:?}");
                }
            }
        }
    }
}

#[test]
fn definiteness_and_positivity() {
    for arrangement in [Arrangement::NonlocalLocal { interface: 0.0 }, Arrangement::LocalNonlocalLocal { left: -0.5, right: 0.5 }] {
        let a = assemble(&cfg(64, arrangement, KernelFamily::Constant, 3)).unwrap();
        let report = positive_definiteness_check(&a, 50, DEFAULT_SEED);
        assert_eq!(report.positive_trials, 50);
        let small = assemble(&cfg(16, arrangement, KernelFamily::Constant, 3)).unwrap();
        assert!(positive_definiteness_check(&small, 50, DEFAULT_SEED).passed());
    }
    let a = assemble(&cfg(32, Arrangement::NonlocalLocal { interface: 0.0 }, KernelFamily::Constant, 3)).unwrap();
    assert!(inverse_positivity_check(&a).unwrap().pass);
    let m = max_principle_check(&cfg(64, Arrangement::NonlocalLocal { interface: 0.0 }, KernelFamily::Constant, 3), 20, DEFAULT_SEED).unwrap();
    assert!(m.passed());
}

#[test]
fn symmetry_defect_regression() {
    // depends only on r: the transitional rows scale like the nonlocal ones
    for n in [16, 32, 64] {
        let a = assemble(&cfg(n, Arrangement::NonlocalLocal { interface: 0.0 }, KernelFamily::Constant, 3)).unwrap();
        assert!((symmetry_defect(&a) - 0.142110502737680).abs() < 1e-12);
    }
}
