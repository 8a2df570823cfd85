//! Cross-module invariants, checked on random inputs.

use fracheat::harness::grid_roundtrip;
use fracheat::heat_kernel::KernelDecomposition;
use fracheat::parabolic::{Axis, GriddedField};
use fracheat::rough_model::{kernel_multiplier, levy_area, AreaVariant, RoughInput};
use fracheat::solver::{heat_step, solve_renormalized_with, solve_young, InitialCondition, SolverConfig, VectorField};
use fracheat::spectral_field::{exact_second_moment, sample_noise, SheetSpec};
use ndarray::Array2;
use proptest::prelude::*;

fn small_solver() -> SolverConfig {
    SolverConfig {
        half_width: 4.0,
        nx: 128,
        horizon: 0.25,
        nt: 64,
        initial: InitialCondition::Bump { a: 1.0, height: 1.0 },
        save_every: 16,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn second_moment_grows_with_cutoff(t in 0.05f64..1.0, x in -1.0f64..1.0, h1 in 0.4f64..0.95, h2 in 0.4f64..0.95) {
        let p = [t, x];
        let mut last = 0.0;
        for n in 1..=5 {
            let v = exact_second_moment(&SheetSpec::new(h1, h2, n).unwrap(), p, p).unwrap();
            prop_assert!(v >= last * (1.0 - 1e-12), "n = {n}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn grid_files_roundtrip(nt in 2usize..12, nx in 2usize..12, seed in any::<u64>()) {
        let mut s = seed;
        let values = Array2::from_shape_fn((nt, nx), |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            f64::from_bits((s >> 12) | 0x3ff0_0000_0000_0000) - 1.5
        });
        let f = GriddedField::new(Axis::new(0.0, 0.125, nt).unwrap(), Axis::new(-1.0, 0.25, nx).unwrap(), values).unwrap();
        let g = grid_roundtrip(&f).unwrap();
        prop_assert_eq!(&g.values, &f.values);
        prop_assert_eq!((g.t.len, g.x.len), (f.t.len, f.x.len));
        prop_assert!((g.t.step - f.t.step).abs() <= 1e-15 && (g.x.step - f.x.step).abs() <= 1e-15);
    }

    #[test]
    fn heat_steps_compose(seed in any::<u64>(), dt in 1e-4f64..0.1) {
        let state: Vec<f64> = (0..64).map(|i| ((i as f64 * 0.37 + seed as f64 * 1e-9).sin() * 3.0).tanh()).collect();
        let once = heat_step(&state, dt, 2.0);
        let twice = heat_step(&heat_step(&state, 0.5 * dt, 2.0), 0.5 * dt, 2.0);
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn renormalised_area_is_a_constant_shift(seed in any::<u64>(), c in -3.0f64..3.0) {
        let kd = KernelDecomposition::new(8).unwrap();
        let real = sample_noise(&SheetSpec::new(0.5, 0.8, 2).unwrap(), seed).unwrap();
        let input = RoughInput::new(&real, &kernel_multiplier(&real, &kd)).unwrap();
        let (t, x) = (Axis::new(0.2, 0.1, 4).unwrap(), Axis::new(-0.3, 0.2, 4).unwrap());
        let plain = levy_area(&input, [0.5, 0.0], t, x, AreaVariant::Canonical).unwrap();
        let shifted = levy_area(&input, [0.5, 0.0], t, x, AreaVariant::Renormalized(c)).unwrap();
        for (a, b) in plain.values.values.iter().zip(shifted.values.values.iter()) {
            prop_assert!((b - a + c).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn zero_constant_is_the_young_solver(seed in any::<u64>()) {
        let real = sample_noise(&SheetSpec::new(0.9, 0.9, 2).unwrap(), seed).unwrap();
        let field = VectorField::BumpSin { a: 0.5, amplitude: 1.0 };
        let young = solve_young(&real, &field, &small_solver()).unwrap();
        let renorm = solve_renormalized_with(&real, 0.0, &field, &small_solver()).unwrap();
        prop_assert!(young.field.values.iter().zip(renorm.field.values.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
