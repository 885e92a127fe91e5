//! Independent oracles for the derived quantities: fixed high-order
//! quadrature (never the adaptive path under test), Monte-Carlo evaluation
//! of the defining symbol integral, and the spectral norm-equivalence
//! window.  Golden values are frozen from the oracles, not from the
//! implementation.

use levyheat::kernels::{builtin_kernel, KernelFamily};
use levyheat::quad::{fixed_gl, gauss_legendre};
use levyheat::scale::{ScaleTriple, ScalingProfile};
use levyheat::spectral::SpectralField;
use levyheat::symbol::{psi_direct, CharExponent};
use rand::{Rng, SeedableRng};

/// Composite fixed-order Gauss–Legendre: panels split geometrically toward
/// zero so endpoint singularities are resolved without any adaptivity.
fn oracle_integral(f: impl Fn(f64) -> f64 + Copy, lo: f64, hi: f64, panels: usize) -> f64 {
    let nodes = gauss_legendre(64);
    let mut acc = 0.0;
    let lo = if lo <= 0.0 { hi * 1e-14 } else { lo };
    let ratio = (hi / lo).powf(1.0 / panels as f64);
    let mut a = lo;
    for _ in 0..panels {
        let b = a * ratio;
        let mut g = f;
        acc += fixed_gl(&mut g, a, b, &nodes);
        a = b;
    }
    acc
}

#[test]
fn scale_function_oracle_values() {
    // K(1) for ℓ = log(1+r): oracle says exactly 1/2
    let k_oracle = oracle_integral(|s| s * (1.0f64 / s).ln_1p(), 1e-12, 1.0, 48);
    assert!((k_oracle - 0.5).abs() < 1e-12, "oracle {k_oracle}");
    let t = ScaleTriple::new(ScalingProfile::log(1.0));
    assert!((t.k(1.0).unwrap() - k_oracle).abs() < 1e-9);

    // L(1/4) for ℓ = min(√r, 1): oracle = 2 + 2 ln 2
    let l_oracle = oracle_integral(|s| (1.0 / s).sqrt().min(1.0) / s, 0.25, 1.0, 8)
        + oracle_integral(|s| s.powf(-1.5), 1.0, 1e20, 160);
    assert!(
        (l_oracle - (2.0 + 2.0 * 2f64.ln())).abs() < 1e-9,
        "oracle {l_oracle}"
    );
    let tt = ScaleTriple::new(ScalingProfile::truncated(0.5));
    assert!((tt.l(0.25).unwrap() - l_oracle).abs() < 1e-8);

    // h(1) for ℓ = log(1+r): K + L with the dilogarithm value π²/12
    let h_oracle = 0.5 + std::f64::consts::PI.powi(2) / 12.0;
    assert!((t.h(1.0).unwrap() - h_oracle).abs() < 1e-10);
}

#[test]
fn log_family_density_golden_value() {
    // p(1, 0) for the log kernel, frozen from a pre-build oracle evaluated
    // with a 10x-stretched cutoff at 25-digit working precision
    const GOLDEN: f64 = 0.134_399_426_164;
    let k = builtin_kernel(KernelFamily::Log, 1.0, 1).unwrap();
    let cert = levyheat::kernels::verify_h(&k, 4);
    let field = levyheat::heat::HeatKernelField::new(
        std::sync::Arc::new(CharExponent::new(k).unwrap()),
        cert,
    );
    let v = field.density(1.0, 0.0).unwrap();
    assert!((v / GOLDEN - 1.0).abs() < 1e-6, "p(1,0) = {v}");

    // in-test oracle route: coarse fixed-order quadrature of the inversion
    // integral with directly computed (not cached) symbol values
    let kk = builtin_kernel(KernelFamily::Log, 1.0, 1).unwrap();
    let nodes = gauss_legendre(32);
    let mut acc = 0.0;
    let mut a: f64 = 1e-6;
    while a < 2e4 {
        let b = (a * 2.0).min(2e4);
        let mut f = |rho: f64| (-psi_direct(&kk, rho, 1e-6).unwrap()).exp();
        acc += fixed_gl(&mut f, a, b, &nodes);
        a = b;
    }
    let oracle = acc / std::f64::consts::PI;
    assert!(
        (oracle / GOLDEN - 1.0).abs() < 1e-4,
        "oracle {oracle} vs golden {GOLDEN}"
    );
}

#[test]
fn monte_carlo_symbol_agreement() {
    // ψ(ρ) against direct Monte-Carlo evaluation of ∫(1-cos(ρ y)) j(|y|) dy
    // by stratified log-uniform importance sampling, within 3 standard
    // errors on 3 (kernel, ρ) pairs
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let cases = [
        (KernelFamily::Stable, 1.7),
        (KernelFamily::Truncated, 0.6),
        (KernelFamily::Log, 3.2),
    ];
    for (fam, rho) in cases {
        let k = builtin_kernel(fam, 1.0, 1).unwrap();
        let truth = psi_direct(&k, rho, 1e-9).unwrap();
        // sample s log-uniform on [1e-6/ρ, 1e6/ρ]; density 1/(s ln R)
        let (lo, hi) = (1e-6 / rho, 1e6 / rho);
        let ln_range = (hi / lo).ln();
        let n = 400_000usize;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let u: f64 = rng.gen();
            let s = lo * (ln_range * u).exp();
            // d = 1: ∫_R = 2 ∫_0^∞; importance weight s ln R
            let v = 2.0 * (1.0 - (rho * s).cos()) * k.eval(s) * s * ln_range;
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / n as f64;
        let var = (sum2 / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - truth).abs() <= 3.0 * se,
            "{fam:?}: mc {mean} vs {truth} (se {se})"
        );
        assert!(
            se < 0.05 * truth,
            "estimator too noisy: se {se} truth {truth}"
        );
    }
}

#[test]
fn norm_equivalence_window_stable_under_refinement() {
    // (‖u‖_p + ‖𝓛u‖_p) ≍ ‖(1-𝓛)u‖_p over random band-limited u; the
    // window must not move when the grid doubles
    let e = CharExponent::new(builtin_kernel(KernelFamily::Stable, 1.0, 1).unwrap()).unwrap();
    let mut window = |n: usize, seed: u64| -> (f64, f64) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for _ in 0..20 {
            let modes: Vec<(f64, f64, f64)> = (0..5)
                .map(|_| {
                    (
                        rng.gen_range(1..=8) as f64,
                        rng.gen_range(0.2..1.0),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect();
            let u = SpectralField::from_fn(1, n, 1.0, |x| {
                modes.iter().map(|(k, a, p)| a * (k * x[0] + p).cos()).sum()
            });
            let lu = u.apply_l_spectral(&e);
            let one_minus = u.sub(&lu); // (1-𝓛)u
            for &p in &[2.0, 4.0] {
                let num = u.lp_norm(p) + lu.lp_norm(p);
                let den = one_minus.lp_norm(p);
                let q = num / den;
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        (lo, hi)
    };
    let (lo1, hi1) = window(128, 5);
    let (lo2, hi2) = window(256, 5);
    assert!(lo1 > 0.3 && hi1 < 4.0, "window [{lo1}, {hi1}]");
    assert!((lo1 / lo2 - 1.0).abs() < 0.05 && (hi1 / hi2 - 1.0).abs() < 0.05);
}

#[test]
fn multiplier_cross_checked_against_direct_quadrature() {
    // annulus coefficient: -m(t,ξ)ψ(ξ)·û must match the direct singular
    // integral of 𝓛^a f for a single mode
    use levyheat::spectral::{coefficient_multiplier, Coefficient};
    let k = builtin_kernel(KernelFamily::Stable, 1.0, 1).unwrap();
    let e = CharExponent::new(k.clone()).unwrap();
    let coef = Coefficient::RadialIndicator {
        a0: 1.0,
        a1: 2.0,
        radius: 1.0,
    };
    let xi = 1.0;
    let m = coefficient_multiplier(&coef, &k, &e, 0.0, xi)
        .unwrap()
        .value;
    // direct: 𝓛^a cos(0) = -∫(1-cos y) a(y) j(y) dy = -[ψ-part + extra annulus part]
    let nodes = gauss_legendre(64);
    let mut inner = |s: f64| (1.0 - s.cos()) * k.eval(s);
    let mut direct = 2.0 * fixed_gl(&mut inner, 1e-10, 1.0, &nodes);
    let mut a = 1.0;
    while a < 1e8 {
        let b = a * 2.0;
        let mut outer = |s: f64| (1.0 - s.cos()) * 2.0 * k.eval(s);
        direct += 2.0 * fixed_gl(&mut outer, a, b, &nodes);
        a = b;
    }
    let expected_m = direct / e.psi(xi);
    assert!(
        (m - expected_m).abs() < 2e-3,
        "multiplier {m} vs direct {expected_m}"
    );
}
