use nmqrc_core::esp::{backflow_count, dual_trajectory, window_stats, Register};
use nmqrc_core::hamiltonian::{HamiltonianRealization, ReservoirParams};
use nmqrc_core::linalg::{pseudoinverse, DEFAULT_RCOND};
use nmqrc_core::readout::{fit_linear, mse, predict, squared_correlation};
use nmqrc_core::reservoir::{run_trajectory, ObservableKind, ReservoirConfig};
use nmqrc_core::tasks::{gen_uniform_inputs, narma_series, split_rows, stm_targets, NarmaConstants, SplitSpec};
use nmqrc_core::{DensityMatrix, RealMatrix};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn least_squares_is_optimal(
        rows in 6usize..30,
        cols in 1usize..6,
        seed in any::<u64>(),
        dir_seed in any::<u64>(),
    ) {
        let data = gen_uniform_inputs(rows * cols + rows, -1.0, 1.0, seed).unwrap();
        let x = RealMatrix::from_vec(rows, cols, data[..rows * cols].to_vec()).unwrap();
        let y = &data[rows * cols..];
        let w = fit_linear(&x, y).unwrap();
        let best = mse(y, &predict(&x, &w).unwrap()).unwrap();
        let dir = gen_uniform_inputs(cols, -1.0, 1.0, dir_seed).unwrap();
        let probe: Vec<f64> = w.as_slice().iter().zip(&dir).map(|(a, d)| a + 1e-3 * d).collect();
        let other = mse(y, &x.mul_vec(&probe).unwrap()).unwrap();
        prop_assert!(best <= other + 1e-14);
    }

    #[test]
    fn correlation_is_bounded_and_affine_invariant(
        y in prop::collection::vec(-5.0f64..5.0, 3..40),
        noise_seed in any::<u64>(),
        a in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
        b in -2.0f64..2.0,
        c in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
        d in -2.0f64..2.0,
    ) {
        let yhat = gen_uniform_inputs(y.len(), -1.0, 1.0, noise_seed).unwrap();
        let base = squared_correlation(&y, &yhat).unwrap();
        prop_assert!((0.0..=1.0).contains(&base.value));
        let ty: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        let th: Vec<f64> = yhat.iter().map(|v| c * v + d).collect();
        let moved = squared_correlation(&ty, &th).unwrap();
        if !base.degenerate {
            prop_assert!((base.value - moved.value).abs() < 1e-12);
        }
    }

    #[test]
    fn penrose_identities(rows in 1usize..12, cols in 1usize..12, seed in any::<u64>()) {
        let data = gen_uniform_inputs(rows * cols, -1.0, 1.0, seed).unwrap();
        let a = RealMatrix::from_vec(rows, cols, data).unwrap();
        let p = pseudoinverse(&a, DEFAULT_RCOND).unwrap();
        let apa = a.checked_mul(&p).unwrap().checked_mul(&a).unwrap();
        let pap = p.checked_mul(&a).unwrap().checked_mul(&p).unwrap();
        let ap = a.checked_mul(&p).unwrap();
        let pa = p.checked_mul(&a).unwrap();
        prop_assert!(apa.max_abs_diff(&a) < 1e-8);
        prop_assert!(pap.max_abs_diff(&p) < 1e-8);
        prop_assert!(ap.max_abs_diff(&ap.transpose()) < 1e-8);
        prop_assert!(pa.max_abs_diff(&pa.transpose()) < 1e-8);
    }
}

#[test]
fn narma_stays_bounded_for_all_orders() {
    for seed in 0..100 {
        let u = gen_uniform_inputs(2000, 0.0, 0.5, seed).unwrap();
        for n in [1, 5, 10, 20, 30, 40, 50] {
            let y = narma_series(&u, n, NarmaConstants::default()).unwrap();
            assert!(y.iter().all(|v| v.is_finite() && v.abs() < 10.0));
        }
    }
}

#[test]
fn stm_delay_zero_is_nearly_perfect() {
    let params = ReservoirParams::new(3, 2).with_seed(1);
    let real = HamiltonianRealization::sample(&params).unwrap();
    let cfg = ReservoirConfig::new(0.5, 10, ObservableKind::ZOnly);
    let split = SplitSpec::new(50, 300, 100).unwrap();
    let s = gen_uniform_inputs(split.total(), 0.0, 1.0, 2).unwrap();
    let rho = DensityMatrix::zero_state(5).unwrap();
    let (features, _) = run_trajectory(&real, &s, &cfg, &rho).unwrap();

    let score = |tau_d: usize| {
        let y = stm_targets(&s, tau_d, split.washout).unwrap();
        let (train, val) = split_rows(&features, &y, &split).unwrap();
        let w = fit_linear(&train.x, &train.y).unwrap();
        squared_correlation(&val.y, &predict(&val.x, &w).unwrap())
            .unwrap()
            .value
    };
    let now = score(0);
    assert!(now > 0.9, "delay 0 score {now}");
    assert!(score(30) < now);
}

#[test]
fn markov_regime_forgets_faster_than_non_markov() {
    let inputs = gen_uniform_inputs(400, 0.0, 1.0, 2).unwrap();
    let cfg = ReservoirConfig::new(0.5, 5, ObservableKind::ZOnly);
    let late = |alpha: f64, beta: f64| {
        let params = ReservoirParams::new(3, 2).with_regime(alpha, beta).with_seed(2);
        let real = HamiltonianRealization::sample(&params).unwrap();
        let records = dual_trajectory(&real, &inputs, &cfg).unwrap();
        // Full-register distance can only shrink: injection is CPTP and
        // the evolution between injections is unitary.
        assert_eq!(backflow_count(&records, Register::Full, 1e-10).0, 0);
        window_stats(&records, 300, 400).unwrap().mean_sqnorm
    };
    let markov = late(10.0, 0.01);
    let non_markov = late(0.01, 10.0);
    assert!(markov < 1e-3, "markov {markov}");
    assert!(non_markov > 10.0 * markov, "non-markov {non_markov} vs markov {markov}");
}
