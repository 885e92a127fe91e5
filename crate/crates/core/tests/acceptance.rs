//! Acceptance suite: every certified property of the toolkit, one pass/fail
//! line per criterion, all tolerances pinned in code.  Run with
//! `cargo test --release --test acceptance -- --nocapture`.

use levyheat::grid;
use levyheat::harness;
use levyheat::heat::HeatKernelField;
use levyheat::heat_bounds::{stability, BoundContext};
use levyheat::kernels::{
    builtin_kernel, cm_coefficients, fd_jump_ratio, t_via_coefficients, verify_h, KernelFamily,
};
use levyheat::scale::{Regime, ScaleTriple, ScalingProfile};
use levyheat::solver::{
    duhamel_direct, mixed_norm, residual, solve_constant, solve_time_coeff, SpaceTimeField,
};
use levyheat::spectral::{apply_l_quadrature, Coefficient, GaussianBump, Smooth1d, SpectralField};
use levyheat::symbol::{certify_psi_h, CharExponent};
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use std::sync::Arc;

struct Fixture {
    field: Arc<HeatKernelField>,
    triple: Arc<ScaleTriple>,
}

fn make_fixture(fam: KernelFamily) -> Fixture {
    let kernel = builtin_kernel(fam, 1.0, 1).unwrap();
    let cert = verify_h(&kernel, kernel.m_max.min(4));
    let profile = (*kernel.profile).clone();
    let triple = match profile.regime {
        Regime::BoundedEll => ScaleTriple::new(profile),
        _ => ScaleTriple::with_ell_star(profile).unwrap(),
    };
    let exponent = CharExponent::new(kernel).unwrap();
    Fixture {
        field: Arc::new(HeatKernelField::new(Arc::new(exponent), cert)),
        triple: Arc::new(triple),
    }
}

static STABLE: Lazy<Fixture> = Lazy::new(|| make_fixture(KernelFamily::Stable));
static TRUNCATED: Lazy<Fixture> = Lazy::new(|| make_fixture(KernelFamily::Truncated));
static LOG: Lazy<Fixture> = Lazy::new(|| make_fixture(KernelFamily::Log));
static PERTURBED: Lazy<Fixture> = Lazy::new(|| make_fixture(KernelFamily::Perturbed { n: 5 }));

fn three_families() -> [(&'static str, &'static Fixture); 3] {
    [
        ("stable", &STABLE),
        ("truncated", &TRUNCATED),
        ("log", &LOG),
    ]
}

fn poisson(t: f64, x: f64) -> f64 {
    let a = std::f64::consts::PI * t;
    a / (std::f64::consts::PI * (a * a + x * x))
}

// ---------------------------------------------------------------- criterion 1

fn criterion_1() -> (bool, String) {
    let f = &STABLE;
    let mut worst_psi = 0.0f64;
    for &rho in &grid::logspace(0.1, 100.0, 25) {
        let err = (f.field.exponent.psi(rho) / (std::f64::consts::PI * rho) - 1.0).abs();
        worst_psi = worst_psi.max(err);
    }
    let mut worst_p = 0.0f64;
    for &t in &[0.5, 1.0, 2.0] {
        for &r in &grid::logspace(0.02, 12.0, 64) {
            let v = f.field.density(t, r).unwrap();
            worst_p = worst_p.max((v / poisson(t, r) - 1.0).abs());
        }
    }
    let pass = worst_psi < 1e-6 && worst_p < 1e-6;
    (
        pass,
        format!("psi rel err {worst_psi:.2e}, density rel err {worst_p:.2e} (tol 1e-6)"),
    )
}

// ---------------------------------------------------------------- criterion 2

fn criterion_2() -> (bool, String) {
    let xs: Vec<f64> = vec![0.0, 0.4, -0.4, 0.9, -0.9, 1.7, -1.7, 3.0, -3.0, 6.0, -6.0];
    let mut detail = String::new();
    let mut pass = true;
    for (name, f) in three_families() {
        let mass = f.field.mass(1.0).unwrap();
        let mass_err = (mass - 1.0).abs();
        let mut worst_ck = 0.0f64;
        for &(t, s) in &[(1.0, 1.0), (0.5, 1.5)] {
            let rep = f.field.ck_defect(t, s, &xs).unwrap();
            worst_ck = worst_ck.max(rep.rel_defect);
        }
        pass &= mass_err < 1e-6 && worst_ck < 1e-5;
        detail.push_str(&format!(
            "{name}: |mass-1| {mass_err:.2e}, ck {worst_ck:.2e}; "
        ));
    }
    (pass, detail + "(tol 1e-6 / 1e-5)")
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3() -> (bool, String) {
    let r_grid = grid::log_grid_per_decade(1e-3, 1e3, 8);
    let mut pass = true;
    let mut detail = String::new();
    let fams: [(&str, &Fixture); 4] = [
        ("stable", &STABLE),
        ("truncated", &TRUNCATED),
        ("log", &LOG),
        ("perturbed", &PERTURBED),
    ];
    for (name, f) in fams {
        let cert = certify_psi_h(&f.field.exponent, &f.triple, &r_grid).unwrap();
        let window_ok = cert.ratio_min > 0.0 && cert.ratio_max <= 2.0 + 1e-3;
        // K(r)/(r^d j(r)) within a two-decade spread
        let mut klo = f64::INFINITY;
        let mut khi: f64 = 0.0;
        for &r in &r_grid {
            let q = f.triple.k(r).unwrap() / (r * f.field.exponent.kernel.eval(r));
            klo = klo.min(q);
            khi = khi.max(q);
        }
        let spread_ok = khi / klo < 100.0;
        pass &= window_ok && spread_ok;
        detail.push_str(&format!(
            "{name}: psi/h in [{:.3}, {:.3}], K/(r j) spread {:.1}; ",
            cert.ratio_min,
            cert.ratio_max,
            khi / klo
        ));
    }
    if !pass {
        detail.push_str(
            "[the log family genuinely exceeds the window: psi(1/r) <= 2h(r) with h = K+L \
             fails by ~0.2% at r = 1e-3; the cited inequality normalises the truncated \
             moment with the full d-dimensional integral, = 2(K+L) in d = 1]",
        );
    }
    (pass, detail)
}

// ---------------------------------------------------------------- criterion 4

fn criterion_4() -> (bool, String) {
    let mut pass = true;
    let mut detail = String::new();
    let xs = grid::logspace(0.05, 16.0, 5);
    let mut check = |name: &str, rep: levyheat::heat_bounds::StabilityReport| {
        pass &= rep.within_budget && rep.all_finite;
        detail.push_str(&format!(
            "{name}: sup {:.3e} drift {:.1}%; ",
            rep.sup_fine,
            100.0 * rep.drift
        ));
    };

    for (name, f) in three_families() {
        let ctx = BoundContext::new(f.field.clone(), f.triple.clone()).unwrap();
        let ts = grid::logspace(0.5, 2.0, 3);
        let late = grid::logspace(8.0, 64.0, 3);
        check(
            &format!("offdiag[{name}]"),
            stability("offdiag", 0.05, |a, b| ctx.offdiag_table(a, b), &ts, &xs).unwrap(),
        );
        check(
            &format!("largetime[{name}]"),
            stability(
                "largetime",
                0.05,
                |a, b| ctx.largetime_table(a, b),
                &late,
                &xs,
            )
            .unwrap(),
        );
        check(
            &format!("lkdm_largetime[{name}]"),
            stability(
                "lkdm_largetime",
                0.05,
                |a, b| ctx.lkdm_largetime_table(1, 0, a, b),
                &late,
                &xs,
            )
            .unwrap(),
        );
        if ctx.regime() != Regime::BoundedEll {
            let a = ctx.a_d().max(1.0);
            check(
                &format!("theta_window[{name}]"),
                stability(
                    "theta",
                    0.05,
                    |u, v| ctx.theta_window_table(a, u, v),
                    &ts,
                    &xs,
                )
                .unwrap(),
            );
            check(
                &format!("lkdm_theta[{name}]"),
                stability(
                    "lkdm_theta",
                    0.05,
                    |u, v| ctx.lkdm_theta_table(1, 1, 4.0 * a, u, v),
                    &ts,
                    &xs,
                )
                .unwrap(),
            );
        } else {
            check(
                &format!("lkdm_plain[{name}]"),
                stability(
                    "lkdm_plain",
                    0.05,
                    |u, v| ctx.lkdm_plain_table(1, 1, u, v),
                    &ts,
                    &xs,
                )
                .unwrap(),
            );
        }
    }
    (pass, detail)
}

// ---------------------------------------------------------------- criterion 5

fn criterion_5() -> (bool, String) {
    // widths ≥ 0.8 keep the discrete spectrum below the 1e-10 tail budget
    let bumps = [
        (0.0, 0.8),
        (0.4, 0.85),
        (-0.7, 1.0),
        (0.2, 0.9),
        (-0.3, 1.2),
    ];
    let fams: [(&str, &Fixture); 4] = [
        ("stable", &STABLE),
        ("truncated", &TRUNCATED),
        ("log", &LOG),
        ("perturbed", &PERTURBED),
    ];
    let (n, p) = (2048usize, 60.0);
    let mut pass = true;
    let mut detail = String::new();
    for (name, f) in fams {
        let kernel = f.field.exponent.kernel.clone();
        let mut worst = 0.0f64;
        for &(c, w) in &bumps {
            let bump = GaussianBump {
                center: c,
                width: w,
                amplitude: 1.0,
            };
            let field = SpectralField::from_fn(1, n, p, |x| bump.eval(x[0]));
            assert!(field.tail_mass() < 1e-10, "tail {:.2e}", field.tail_mass());
            let lf = field.apply_l_spectral(&f.field.exponent);
            let axis = field.axis();
            let step = axis[1] - axis[0];
            for k in 0..9 {
                let target = c - 4.0 + k as f64;
                let idx = ((target - axis[0]) / step).round() as usize;
                let x = axis[idx];
                let direct = apply_l_quadrature(&bump, x, &kernel, 1.0, 1e-9).unwrap();
                worst = worst.max((direct - lf.values()[idx]).abs());
            }
        }
        // compensator-cutoff invariance on one bump per family
        let bump = GaussianBump {
            center: 0.3,
            width: 0.9,
            amplitude: 1.0,
        };
        let vals: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&r0| apply_l_quadrature(&bump, 0.55, &kernel, r0, 1e-9).unwrap())
            .collect();
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-6);
        let r0_spread = (vals[0] - vals[1]).abs().max((vals[1] - vals[2]).abs()) / scale;
        pass &= worst < 1e-4 && r0_spread < 1e-6;
        detail.push_str(&format!(
            "{name}: sup diff {worst:.2e}, r0 spread {r0_spread:.2e}; "
        ));
    }
    (pass, detail + "(tol 1e-4 / 1e-6)")
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6() -> (bool, String) {
    // single-mode closed form to 1e-8
    let e = &STABLE.field.exponent;
    let times = SpaceTimeField::uniform_times(1.0, 4000);
    let f = SpaceTimeField::from_fn(1, 16, 1.0, times, |t, x| (-t).exp() * x[0].cos());
    let u = solve_constant(&f, e).unwrap();
    let want = ((-1.0f64).exp() - (-std::f64::consts::PI).exp()) / (std::f64::consts::PI - 1.0);
    let got = u.slices.last().unwrap().values()[8];
    let x8 = u.slices.last().unwrap().axis()[8];
    let mode_err = (got - want * x8.cos()).abs() / want;

    // residual order under Δt halving
    let kernel = builtin_kernel(KernelFamily::Stable, 1.0, 1).unwrap();
    let coef = Coefficient::Constant(1.0);
    let mut norms = Vec::new();
    for &steps in &[64usize, 128, 256] {
        let times = SpaceTimeField::uniform_times(1.0, steps);
        let ff = SpaceTimeField::from_fn(1, 32, 1.0, times, |t, x| {
            (1.0 + 0.5 * (2.0 * t).sin()) * x[0].cos() + 0.4 * (2.0 * x[0]).cos() * (-t).exp()
        });
        let uu = solve_constant(&ff, e).unwrap();
        norms.push(residual(&uu, &ff, &coef, &kernel, e).unwrap().l2_norm);
    }
    let order = (norms[0] / norms[1])
        .log2()
        .min((norms[1] / norms[2]).log2());

    // Duhamel oracle at three probe points per family.  The forcing has a
    // zero spatial mean: with a heavy-tailed kernel the torus surrogate's
    // leading periodisation ghost couples through p(τ, 2πP)·∫f dy, and the
    // zero mean removes it instead of demanding an enormous box.
    let mut worst_duhamel = 0.0f64;
    let lobes = |s: f64, y: f64| {
        let b1 = 1.0 - ((y - 0.4) / 0.9) * ((y - 0.4) / 0.9);
        let b2 = 1.0 - ((y + 0.3) / 1.1) * ((y + 0.3) / 1.1);
        let w = if b1 > 0.0 { b1 * b1 * b1 } else { 0.0 }
            - (0.9 / 1.1) * if b2 > 0.0 { b2 * b2 * b2 } else { 0.0 };
        let tw = if s < 0.5 {
            (std::f64::consts::PI * s / 0.5).sin()
        } else {
            0.0
        };
        w * tw
    };
    for (_name, fx) in three_families() {
        let t_eval = 2.5; // keeps t - s over every family's t_min
        let times = SpaceTimeField::uniform_times(t_eval, 640);
        let ff = SpaceTimeField::from_fn(1, 2048, 32.0, times, |t, x| lobes(t, x[0]));
        let uu = solve_constant(&ff, &fx.field.exponent).unwrap();
        let axis = uu.slices.last().unwrap().axis();
        for &probe in &[0.4f64, 1.0, 2.2] {
            let idx = axis
                .iter()
                .position(|&x| (x - probe).abs() < 0.5 * (axis[1] - axis[0]) + 1e-12)
                .unwrap();
            let direct = duhamel_direct(
                &lobes,
                (0.0, 0.5),
                (-1.5, 1.5),
                &fx.field,
                t_eval,
                axis[idx],
            )
            .unwrap();
            let solver = uu.slices.last().unwrap().values()[idx];
            worst_duhamel = worst_duhamel.max((direct / solver - 1.0).abs());
        }
    }
    let pass = mode_err < 1e-8 && order >= 1.9 && worst_duhamel < 1e-3;
    (
        pass,
        format!(
            "single-mode err {mode_err:.2e} (tol 1e-8), residual order {order:.2} (≥1.9), duhamel rel {worst_duhamel:.2e} (tol 1e-3)"
        ),
    )
}

// ---------------------------------------------------------------- criterion 7

struct ForcingSpec {
    modes: Vec<(f64, f64, f64, [f64; 3])>,
}

fn draw_forcing(rng: &mut impl Rng, max_k: usize) -> ForcingSpec {
    let mut modes = Vec::new();
    for _ in 0..6 {
        modes.push((
            rng.gen_range(1..=max_k) as f64,
            rng.gen_range(0.2..1.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ],
        ));
    }
    ForcingSpec { modes }
}

fn forcing_field(spec: &ForcingSpec, n: usize, steps: usize, t_final: f64) -> SpaceTimeField {
    let times = SpaceTimeField::uniform_times(t_final, steps);
    let modes = spec.modes.clone();
    SpaceTimeField::from_fn(1, n, 1.0, times, move |t, x| {
        let tau = std::f64::consts::PI * t / t_final;
        modes
            .iter()
            .map(|(k, amp, phase, tw)| {
                let env = tw[0] + tw[1] * tau.cos() + tw[2] * (2.0 * tau).sin();
                amp * env * (k * x[0] + phase).cos()
            })
            .sum()
    })
}

fn max_ratio(
    specs: &[ForcingSpec],
    e: &CharExponent,
    kernel: &levyheat::kernels::JumpKernel,
    coef: &Coefficient,
    p: f64,
    q: f64,
    n: usize,
    steps: usize,
) -> f64 {
    let mut max = 0.0f64;
    for spec in specs {
        let f = forcing_field(spec, n, steps, 1.0);
        let u = match coef {
            Coefficient::Constant(c) if (*c - 1.0).abs() < 1e-15 => solve_constant(&f, e).unwrap(),
            _ => solve_time_coeff(&f, coef, kernel, e).unwrap(),
        };
        let lu = SpaceTimeField {
            times: u.times.clone(),
            slices: u.slices.iter().map(|s| s.apply_l_spectral(e)).collect(),
            kernel_id: String::new(),
            coefficient_id: String::new(),
        };
        let num = mixed_norm(&lu, p, q, 0.0, e).value;
        let den = mixed_norm(&f, p, q, 0.0, e).value;
        max = max.max(num / den);
    }
    max
}

fn criterion_7() -> (bool, String) {
    let e = &STABLE.field.exponent;
    let kernel = builtin_kernel(KernelFamily::Stable, 1.0, 1).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let specs50: Vec<ForcingSpec> = (0..50).map(|_| draw_forcing(&mut rng, 8)).collect();
    let unit = Coefficient::Constant(1.0);
    let p22 = max_ratio(&specs50, e, &kernel, &unit, 2.0, 2.0, 64, 64);

    let specs12: Vec<ForcingSpec> = (0..12).map(|_| draw_forcing(&mut rng, 8)).collect();
    let mut detail = format!("p=q=2 max {p22:.9} (≤ 1+1e-6); ");
    let mut pass = p22 <= 1.0 + 1e-6;
    for &(p, q) in &[(4.0, 2.0), (2.0, 4.0), (4.0, 4.0)] {
        let coarse = max_ratio(&specs12, e, &kernel, &unit, p, q, 64, 64);
        let fine = max_ratio(&specs12, e, &kernel, &unit, p, q, 128, 128);
        let drift = (fine - coarse).abs() / coarse;
        pass &= coarse.is_finite() && drift < 0.10;
        detail.push_str(&format!(
            "({p},{q}): {coarse:.4}, drift {:.1}%; ",
            100.0 * drift
        ));
    }
    // annulus coefficient (time-measurable theorem surrogate)
    let annulus = Coefficient::RadialIndicator {
        a0: 1.0,
        a1: 2.0,
        radius: 1.0,
    };
    let coarse = max_ratio(&specs12, e, &kernel, &annulus, 2.0, 2.0, 64, 64);
    let fine = max_ratio(&specs12, e, &kernel, &annulus, 2.0, 2.0, 128, 128);
    let drift = (fine - coarse).abs() / coarse;
    pass &= coarse.is_finite() && drift < 0.10;
    detail.push_str(&format!(
        "annulus(2,2): {coarse:.4}, drift {:.1}%",
        100.0 * drift
    ));
    (pass, detail)
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8() -> (bool, String) {
    let bs: Vec<f64> = (-4..=4).map(|e| 2f64.powi(e)).collect();
    let mut pass = true;
    let mut detail = String::new();
    for (name, f) in three_families() {
        let mut q1p = Vec::new();
        let mut q0v = Vec::new();
        for &b in &bs {
            let p1 = harness::tail_integral_q1(&f.field, &f.triple, b).unwrap();
            q1p.push(b * p1.value);
            let p0 = harness::tail_integral_q0(&f.field, &f.triple, b).unwrap();
            q0v.push(p0.value);
        }
        let spread = |v: &[f64]| {
            v.iter().fold(0.0f64, |m, &x| m.max(x)) / v.iter().fold(f64::INFINITY, |m, &x| m.min(x))
        };
        let (s1, s0) = (spread(&q1p), spread(&q0v));
        pass &= s1 < 2.0 && s0 < 2.0;
        detail.push_str(&format!("{name}: b*q1 spread {s1:.2}, q0 spread {s0:.2}; "));
    }
    let mut detail = detail + "(budget 2x)";
    if !pass {
        detail.push_str(
            " [genuine for bounded intensity: b·q1 decays like 1/log(1/b) as b -> 0 \
             (K/h ~ 1/log(1/rho) there), so no fixed spread budget holds on [2^-4, 2^4]; \
             boundedness itself — the proved statement — is conspicuous in the sweep]",
        );
    }
    (pass, detail)
}

// ---------------------------------------------------------------- criterion 9

fn criterion_9() -> (bool, String) {
    // ten bounded compactly supported forcings; the principal-value layer
    // needs a representable small-time inversion, hence the stable kernel
    let f = &STABLE;
    let qt = harness::QTable::build(&f.field, (2e-6, 8.0), (1e-7, 512.0), 16, 24).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut ensemble = Vec::new();
    for _ in 0..10 {
        let c = rng.gen_range(-0.5..0.5);
        let w: f64 = rng.gen_range(0.6..1.2);
        let t0 = rng.gen_range(0.2..0.8);
        let amp = rng.gen_range(0.5..1.5);
        ensemble.push(harness::GridFunction2D::from_fn(
            (0.0, 2.0),
            (-2.0, 2.0),
            (17, 17),
            move |t, x| {
                let u = (x - c) / w;
                let s = 1.0 - u * u;
                let tw = if t > t0 && t < t0 + 1.0 {
                    (std::f64::consts::PI * (t - t0)).sin()
                } else {
                    0.0
                };
                if s > 0.0 {
                    amp * s * s * s * tw
                } else {
                    0.0
                }
            },
        ));
    }
    let scale = harness::parabolic_time_scale(&f.triple, 4.0).unwrap();
    let cfg = harness::OperatorLConfig {
        eps0: 0.25,
        tol: 1e-4,
        max_halvings: 16,
    };
    // refinement densifies the same family (fixed radius range, more radii,
    // more centers) and the evaluation grid; the coarse grid already puts
    // several samples across the smallest cube
    let coarse = harness::bmo_estimate_check(
        &ensemble,
        &qt,
        &f.triple,
        scale,
        &grid::linspace(1.0, 3.0, 17),
        &grid::linspace(-2.0, 2.0, 33),
        &[0.25, 0.5, 1.0],
        (3, 3),
        &cfg,
    )
    .unwrap();
    let fine = harness::bmo_estimate_check(
        &ensemble,
        &qt,
        &f.triple,
        scale,
        &grid::linspace(1.0, 3.0, 33),
        &grid::linspace(-2.0, 2.0, 65),
        &[0.25, 0.354, 0.5, 0.707, 1.0],
        (5, 5),
        &cfg,
    )
    .unwrap();
    let drift = (fine.max_ratio - coarse.max_ratio).abs() / coarse.max_ratio;
    let pass = coarse.max_ratio.is_finite() && fine.max_ratio.is_finite() && drift < 0.10;
    (
        pass,
        format!(
            "bmo/‖f‖ max {:.4} → {:.4}, drift {:.1}% (<10%), eps {:.1e}",
            coarse.max_ratio,
            fine.max_ratio,
            100.0 * drift,
            coarse.final_eps
        ),
    )
}

// --------------------------------------------------------------- criterion 10

fn criterion_10() -> (bool, String) {
    let mut pass = true;
    let mut detail = String::new();
    for (name, fam) in [
        ("stable", KernelFamily::Stable),
        ("truncated", KernelFamily::Truncated),
        ("log", KernelFamily::Log),
    ] {
        let k = builtin_kernel(fam, 1.0, 1).unwrap();
        let cert = verify_h(&k, 4);
        let grid_pass = cert.pass
            && cert
                .kappa
                .iter()
                .all(|row| row.sign_ok && row.kappa1 > 0.0 && row.kappa2.is_finite());
        pass &= grid_pass;
        detail.push_str(&format!(
            "{name}: H(1,4) {}; ",
            if grid_pass { "PASS" } else { "FAIL" }
        ));
    }
    let pk = builtin_kernel(KernelFamily::Perturbed { n: 5 }, 1.0, 1).unwrap();
    let cert = verify_h(&pk, 4);
    let jump = fd_jump_ratio(&pk, 5, 1.0, 1e-3);
    pass &= cert.pass && jump.jump_ratio > 10.0;
    detail.push_str(&format!(
        "perturbed(n=5): H(1,4) {}, 5th-derivative jump ratio {:.0} (>10)",
        if cert.pass { "PASS" } else { "FAIL" },
        jump.jump_ratio
    ));
    (pass, detail)
}

// --------------------------------------------------------------- criterion 11

fn criterion_11() -> (bool, String) {
    let coeffs = cm_coefficients(4);
    // frozen expected rows, cross-checked against iterated differentiation
    let expected: [&[u64]; 4] = [&[0, 1], &[0, 1, 1], &[0, 3, 3, 1], &[0, 15, 15, 6, 1]];
    let mut pass = coeffs
        .iter()
        .zip(expected.iter())
        .all(|(row, want)| row.as_slice() == *want);
    // table route vs exact nested 𝒯 on e^{-r}
    let base = ExpKernel;
    let mut worst = 0.0f64;
    for n in 1..=4 {
        for &r in &[0.4, 1.0, 2.3, 5.0] {
            let via_table = t_via_coefficients(&coeffs, n, r, &base.jet(r));
            let exact = base.t_exact(n, r);
            worst = worst.max((via_table / exact - 1.0).abs());
        }
    }
    pass &= worst < 1e-8;
    (
        pass,
        format!("C(n,k) rows match, table vs symbolic 𝒯^n e^(-r) rel err {worst:.2e} (tol 1e-8)"),
    )
}

/// e^{-r} with exact jets and the closed-form 𝒯-iterates, the criterion's
/// independent oracle.
struct ExpKernel;

impl ExpKernel {
    fn jet(&self, r: f64) -> levyheat::jet::Jet {
        (-levyheat::jet::Jet::variable(r)).exp()
    }

    /// 𝒯^n e^{-r} by explicit differentiation:
    /// 𝒯e^{-r} = e^{-r}/r, 𝒯² = e^{-r}(r^{-2}+r^{-3}), ...
    fn t_exact(&self, n: usize, r: f64) -> f64 {
        match n {
            1 => (-r).exp() / r,
            2 => (-r).exp() * (r.powi(-2) + r.powi(-3)),
            3 => (-r).exp() * (r.powi(-3) + 3.0 * r.powi(-4) + 3.0 * r.powi(-5)),
            4 => {
                (-r).exp() * (r.powi(-4) + 6.0 * r.powi(-5) + 15.0 * r.powi(-6) + 15.0 * r.powi(-7))
            }
            _ => unreachable!(),
        }
    }
}

// --------------------------------------------------------------------- driver

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> (bool, String))> = vec![
        ("1  closed-form cross-check", criterion_1),
        ("2  conservation & semigroup", criterion_2),
        ("3  comparability certificates", criterion_3),
        ("4  bound-ratio stability", criterion_4),
        ("5  operator cross-validation", criterion_5),
        ("6  solver correctness", criterion_6),
        ("7  regularity constant", criterion_7),
        ("8  tail integrals", criterion_8),
        ("9  BMO estimate", criterion_9),
        ("10 H(d,4) certificates", criterion_10),
        ("11 appendix recursion", criterion_11),
    ];
    let mut all = true;
    for (name, f) in criteria {
        let start = std::time::Instant::now();
        let (pass, detail) = f();
        let status = if pass { "PASS" } else { "FAIL" };
        println!(
            "CRITERION {name}: {status} [{:.1}s] — {detail}",
            start.elapsed().as_secs_f64()
        );
        all &= pass;
    }
    assert!(all, "at least one acceptance criterion failed");
}
