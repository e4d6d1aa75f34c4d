use approx::assert_relative_eq;
use magnonsteer::analytic::AnalyticCm;
use magnonsteer::gaussian::{check_physicality, SymplecticForm};
use magnonsteer::measures::{log_negativity_2mode_spectral, CLASS_TOL, PAIRS};
use magnonsteer::model::thermal_occupation;
use magnonsteer::sampling::{random_physical_cm, random_symplectic};
use magnonsteer::{
    build_diffusion, build_drift, log_negativity_2mode, partial_transpose, solve_lyapunov,
    symplectic_eigenvalues, CorrelationReport, CovarianceMatrix, DiffusionMode, DriftDiffusion,
    QubitCoupling, SystemParams,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state(seed: u64, n: usize) -> CovarianceMatrix {
    random_physical_cm(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.8, 1.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn negativity_paths_agree(seed in any::<u64>()) {
        let v = state(seed, 2);
        let a = log_negativity_2mode(&v).unwrap();
        let b = log_negativity_2mode_spectral(&v).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
    }

    #[test]
    fn spectrum_is_symplectic_invariant(seed in any::<u64>()) {
        let v = state(seed, 3);
        let s = random_symplectic(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed), 3, 0.4);
        prop_assert!(SymplecticForm::new(3).preserved_by(&s, 1e-10));
        let a = symplectic_eigenvalues(&v).unwrap();
        let b = symplectic_eigenvalues(&v.congruence(&s).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * x.max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>(), mode in 0usize..3) {
        let v = state(seed, 3);
        let twice = partial_transpose(&partial_transpose(&v, &[mode]).unwrap(), &[mode]).unwrap();
        prop_assert_eq!(twice, v);
    }

    #[test]
    fn relabelling_modes_leaves_measures_unchanged(seed in any::<u64>(), perm in 0usize..6) {
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let order = orders[perm];
        // moderate squeezing: near 𝓛 ≈ 4 the spectra carry ~1e-12 rounding
        let v = random_physical_cm(&mut ChaCha8Rng::seed_from_u64(seed), 3, 0.5, 1.5);
        let w = v.permuted(&order).unwrap();
        let a = CorrelationReport::from_covariance(&v).unwrap();
        let b = CorrelationReport::from_covariance(&w).unwrap();
        // mode order[k] of v sits at position k of w
        let pos = |m: usize| order.iter().position(|&o| o == m).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                if x != y {
                    prop_assert!((a.steering(x, y) - b.steering(pos(x), pos(y))).abs() <= 1e-12);
                    prop_assert!((a.ln(x, y) - b.ln(pos(x), pos(y))).abs() <= 1e-12);
                }
            }
            prop_assert!((a.ln_one_two[x] - b.ln_one_two[pos(x)]).abs() <= 1e-12);
            prop_assert!((a.steering_one_two[x] - b.steering_one_two[pos(x)]).abs() <= 1e-12);
            prop_assert!((a.steering_two_one[x] - b.steering_two_one[pos(x)]).abs() <= 1e-12);
            prop_assert!((a.contangle_residuals[x] - b.contangle_residuals[pos(x)]).abs() <= 1e-12);
        }
    }

    #[test]
    fn steering_needs_entanglement(seed in any::<u64>()) {
        let r = CorrelationReport::from_covariance(&state(seed, 3)).unwrap();
        for (p, &(a, b)) in PAIRS.iter().enumerate() {
            if r.steering(a, b) > CLASS_TOL || r.steering(b, a) > CLASS_TOL {
                prop_assert!(r.ln_pair[p] > 0.0);
            }
            prop_assert!(r.asymmetry[p] <= std::f64::consts::LN_2 + 1e-9);
        }
        prop_assert!(r.physical);
    }

    #[test]
    fn closed_form_matches_lyapunov(
        epsilon in 0.0f64..0.95,
        temperature in 0.0f64..1.0,
        ratio in 0.5f64..3.0,
    ) {
        let params = SystemParams {
            epsilon,
            temperature,
            g_q: QubitCoupling::RelativeToEffective(ratio),
            diffusion_mode: DiffusionMode::Paper,
            ..SystemParams::default()
        };
        let dd = DriftDiffusion::from_params(&params);
        prop_assume!(magnonsteer::assert_stable(&dd.drift).is_ok());
        let numeric = solve_lyapunov(&dd.drift, &dd.diffusion).unwrap().into_inner();
        let closed = AnalyticCm::evaluate(&dd.derived, &params).unwrap().assembled();
        for (a, b) in closed.iter().zip(numeric.iter()) {
            if b.abs() > 1e-12 {
                prop_assert!((a - b).abs() <= 1e-8 * b.abs(), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn drift_ignores_temperature_and_diffusion_ignores_couplings(
        t in 0.0f64..2.0,
        ratio in 0.0f64..3.0,
        power in 0.0f64..0.05,
    ) {
        let base = SystemParams::default();
        let hot = SystemParams { temperature: t, ..base.clone() };
        prop_assert_eq!(build_drift(&base), build_drift(&hot));
        let coupled = SystemParams {
            g_q: QubitCoupling::RelativeToEffective(ratio),
            drive_power: power,
            ..base.clone()
        };
        prop_assert_eq!(build_diffusion(&base), build_diffusion(&coupled));
    }

    #[test]
    fn diffusion_grows_with_temperature(t1 in 0.0f64..2.0, dt in 1e-3f64..1.0, epsilon in 0.0f64..0.95) {
        for mode in [DiffusionMode::Paper, DiffusionMode::Consistent] {
            let cold = SystemParams { temperature: t1, epsilon, diffusion_mode: mode, ..SystemParams::default() };
            let hot = SystemParams { temperature: t1 + dt, ..cold.clone() };
            let (a, b) = (build_diffusion(&cold), build_diffusion(&hot));
            for i in 0..6 {
                prop_assert!(b[(i, i)] >= a[(i, i)]);
            }
        }
    }

    #[test]
    fn occupation_grows_with_temperature(t1 in 0.0f64..2.0, dt in 1e-4f64..1.0) {
        let w = std::f64::consts::TAU * 8e9;
        prop_assert!(thermal_occupation(w, t1 + dt) > thermal_occupation(w, t1));
    }
}

#[test]
fn default_state_is_physical() {
    let dd = DriftDiffusion::from_params(&SystemParams::default());
    let v = solve_lyapunov(&dd.drift, &dd.diffusion).unwrap();
    let phys = check_physicality(&v);
    assert!(phys.physical);
    assert_relative_eq!(v.entries()[(0, 1)], 0.0, epsilon = 1e-12);
}
