//! Property tests for the algebraic invariants that hold for arbitrary
//! inputs, complementing the value-pinned oracle tests.

use levyheat::grid::MonotoneCubic;
use levyheat::kernels::{builtin_kernel, KernelFamily};
use levyheat::solver::{mixed_norm, solve_constant, SpaceTimeField};
use levyheat::spectral::SpectralField;
use levyheat::symbol::CharExponent;
use once_cell::sync::Lazy;
use proptest::prelude::*;

static CAUCHY: Lazy<CharExponent> =
    Lazy::new(|| CharExponent::new(builtin_kernel(KernelFamily::Stable, 1.0, 1).unwrap()).unwrap());

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monotone_interpolation_stays_monotone(increments in prop::collection::vec(0.0f64..3.0, 8..40)) {
        let mut x = vec![0.0f64];
        let mut y = vec![1.0f64];
        for (i, d) in increments.iter().enumerate() {
            x.push(x[i] + 0.2 + d * 0.1);
            y.push(y[i] + d);
        }
        let f = MonotoneCubic::new(x.clone(), y.clone());
        let hi = *x.last().unwrap();
        let mut prev = f.eval(0.0);
        for i in 1..400 {
            let v = f.eval(hi * i as f64 / 399.0);
            prop_assert!(v >= prev - 1e-10);
            prev = v;
        }
    }

    #[test]
    fn bessel_potential_round_trip_and_isometry(
        amps in prop::collection::vec(-1.0f64..1.0, 3),
        gamma in 0.3f64..3.0,
    ) {
        let u = SpectralField::from_fn(1, 64, 1.0, |x| {
            amps[0] * x[0].cos() + amps[1] * (2.0 * x[0]).sin() + amps[2] * (5.0 * x[0]).cos()
        });
        let back = u.bessel_potential(&CAUCHY, gamma).bessel_potential(&CAUCHY, -gamma);
        let scale = u.linf_norm().max(1e-9);
        prop_assert!(u.sub(&back).linf_norm() < 1e-10 * scale);
    }

    #[test]
    fn solver_linearity_and_norm_homogeneity(
        a in -2.0f64..2.0,
        k1 in 1usize..6,
        k2 in 1usize..6,
    ) {
        let times = SpaceTimeField::uniform_times(0.5, 8);
        let f1 = SpaceTimeField::from_fn(1, 32, 1.0, times.clone(), move |t, x| {
            (1.0 + t) * (k1 as f64 * x[0]).cos()
        });
        let f2 = SpaceTimeField::from_fn(1, 32, 1.0, times.clone(), move |t, x| {
            (-t).exp() * (k2 as f64 * x[0]).sin()
        });
        let combo = f1.scaled(a).add(&f2);
        let u_combo = solve_constant(&combo, &CAUCHY).unwrap();
        let u_split = solve_constant(&f1, &CAUCHY)
            .unwrap()
            .scaled(a)
            .add(&solve_constant(&f2, &CAUCHY).unwrap());
        for (s1, s2) in u_combo.slices.iter().zip(&u_split.slices) {
            prop_assert!(s1.sub(s2).linf_norm() < 1e-11);
        }
        // mixed norm is absolutely homogeneous
        let n1 = mixed_norm(&u_combo, 2.0, 4.0, 0.0, &CAUCHY).value;
        let n2 = mixed_norm(&u_combo.scaled(-3.0), 2.0, 4.0, 0.0, &CAUCHY).value;
        prop_assert!((n2 - 3.0 * n1).abs() < 1e-10 * n1.max(1e-12));
    }
}
