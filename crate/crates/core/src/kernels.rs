//! Jump kernel families, the dimension-shift operator 𝒯f = -f'/r, the
//! completely-monotone coefficient table, subordinate-Brownian-motion
//! kernels, and numerical certification of the two-sided derivative
//! condition 𝐇(d,m).
//!
//! Kernels are written once as closed-form expressions over [`Jet`] values,
//! so radial derivatives up to the jet order are analytic; finite
//! differences appear only as a cross-check oracle and in the kink probe.

use crate::bessel::sphere_area;
use crate::error::{Error, Result};
use crate::jet::{Jet, ORDER};
use crate::quad::{self, QuadOpts};
use crate::scale::{Regime, ScalingProfile};
use serde::Serialize;
use std::sync::Arc;

type RadialExpr = Arc<dyn Fn(Jet) -> Jet + Send + Sync>;
type ValExpr = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial jump density j_d with analytic derivatives and its intensity
/// profile ℓ.
pub struct JumpKernel {
    pub id: String,
    pub d: usize,
    expr: RadialExpr,
    /// plain-f64 mirror of `expr` for quadrature hot loops
    val: ValExpr,
    /// highest derivative order that is continuous everywhere
    pub m_max: usize,
    /// how many Taylor coefficients of `jet` are meaningful
    jet_valid: usize,
    pub profile: Arc<ScalingProfile>,
    /// empirical (κ_{1,n}, κ_{2,n}) for n ≤ min(4, m_max)
    pub kappa: Vec<(f64, f64)>,
    /// radius where smoothness degrades, if any
    pub kink: Option<f64>,
    /// stable evaluation of j - j_smooth_base for the perturbed family
    deviation: Option<RadialExpr>,
}

impl Clone for JumpKernel {
    fn clone(&self) -> Self {
        Self {
            id: self.id.clone(),
            d: self.d,
            expr: self.expr.clone(),
            val: self.val.clone(),
            m_max: self.m_max,
            jet_valid: self.jet_valid,
            profile: self.profile.clone(),
            kappa: self.kappa.clone(),
            kink: self.kink,
            deviation: self.deviation.clone(),
        }
    }
}

impl std::fmt::Debug for JumpKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JumpKernel")
            .field("id", &self.id)
            .field("d", &self.d)
            .field("m_max", &self.m_max)
            .finish()
    }
}

/// Builtin families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    /// j(r) = r^{-d-α}
    Stable,
    /// j(r) = r^{-d} (1+r^β)^{-⌈α⌉}, β = α/⌈α⌉; bounded intensity
    Truncated,
    /// j(r) = r^{-d} log(1+r^{-β}) (1+r^β)^{-(⌈α⌉-1)}
    Log,
    /// stable kernel times (1 + f_n(r)) with the C^{n-1} bump f_n
    Perturbed { n: usize },
}

impl JumpKernel {
    pub fn jet(&self, r: f64) -> Jet {
        assert!(r > 0.0);
        (self.expr)(Jet::variable(r))
    }

    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r > 0.0);
        (self.val)(r)
    }

    /// n-th radial derivative; analytic through the jet expression.
    pub fn derivative(&self, n: usize, r: f64) -> Result<f64> {
        let avail = self.m_max.min(self.jet_valid.saturating_sub(1));
        if n > avail {
            return Err(Error::InsufficientDifferentiability {
                requested: n,
                available: avail,
            });
        }
        Ok(self.jet(r).derivative(n))
    }

    /// ∫ (1 ∧ |x|²) j_d(|x|) dx by radial quadrature.
    pub fn levy_integrability(&self) -> Result<f64> {
        let d = self.d;
        let me = self.val.clone();
        let inner = quad::adaptive(
            &mut |s: f64| s.powi(d as i32 + 1) * me(s),
            0.0,
            1.0,
            QuadOpts::default(),
            "levy second moment",
        )?;
        let outer = quad::adaptive_to_inf(
            &mut |s: f64| s.powi(d as i32 - 1) * me(s),
            1.0,
            QuadOpts::default(),
            "levy tail mass",
        )?;
        Ok(sphere_area(d) * (inner + outer))
    }

    /// j - j_base for the perturbed family, computed without cancellation.
    pub fn smooth_base_deviation(&self, r: f64) -> Option<f64> {
        self.deviation.as_ref().map(|f| f(Jet::variable(r)).value())
    }
}

fn perturbation_bump(n: usize, r: Jet) -> Jet {
    // f_n(r) = (1-r)^n / n! on [0,1], zero beyond; C^{n-1} with a jump in
    // the n-th derivative at r = 1
    if r.value() >= 1.0 {
        Jet::constant(0.0)
    } else {
        let mut p = Jet::constant(1.0) - r;
        let mut out = p;
        for _ in 1..n {
            out = out * p;
        }
        p = out;
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        p * (1.0 / fact)
    }
}

fn bump_val(n: usize, r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        (1.0 - r).powi(n as i32) / fact
    }
}

fn builtin_val(family: KernelFamily, alpha: f64, d: usize) -> ValExpr {
    let df = d as f64;
    match family {
        KernelFamily::Stable => Arc::new(move |r: f64| r.powf(-df - alpha)),
        KernelFamily::Truncated => {
            let k = alpha.ceil().max(1.0);
            let beta = alpha / k;
            Arc::new(move |r: f64| r.powf(-df) * (1.0 + r.powf(beta)).powf(-k))
        }
        KernelFamily::Log => {
            let k = alpha.ceil().max(1.0);
            let beta = alpha / k;
            Arc::new(move |r: f64| {
                r.powf(-df) * r.powf(-beta).ln_1p() * (1.0 + r.powf(beta)).powf(-(k - 1.0))
            })
        }
        KernelFamily::Perturbed { n } => {
            let base = builtin_val(KernelFamily::Stable, alpha, d);
            Arc::new(move |r: f64| base(r) * (1.0 + bump_val(n, r)))
        }
    }
}

fn builtin_expr(family: KernelFamily, alpha: f64, d: usize) -> RadialExpr {
    let df = d as f64;
    match family {
        KernelFamily::Stable => Arc::new(move |r: Jet| r.powf(-df - alpha)),
        KernelFamily::Truncated => {
            let k = alpha.ceil().max(1.0);
            let beta = alpha / k;
            Arc::new(move |r: Jet| {
                let w = (r.powf(beta) + 1.0).powf(-k);
                r.powf(-df) * w
            })
        }
        KernelFamily::Log => {
            let k = alpha.ceil().max(1.0);
            let beta = alpha / k;
            Arc::new(move |r: Jet| {
                let core = r.powf(-beta).ln_1p();
                let w = (r.powf(beta) + 1.0).powf(-(k - 1.0));
                r.powf(-df) * core * w
            })
        }
        KernelFamily::Perturbed { n } => {
            let base = builtin_expr(KernelFamily::Stable, alpha, d);
            Arc::new(move |r: Jet| base(r) * (perturbation_bump(n, r) + 1.0))
        }
    }
}

/// Exact formulas of the builtin example families with analytic derivatives.
pub fn builtin_kernel(family: KernelFamily, alpha: f64, d: usize) -> Result<JumpKernel> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,2), got {alpha}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("d must be >= 1".into()));
    }
    let (profile, id, m_max, kink, deviation): (
        ScalingProfile,
        String,
        usize,
        Option<f64>,
        Option<RadialExpr>,
    ) = match family {
        KernelFamily::Stable => (
            ScalingProfile::stable(alpha),
            format!("stable(alpha={alpha},d={d})"),
            ORDER - 2,
            None,
            None,
        ),
        KernelFamily::Truncated => (
            ScalingProfile::truncated(alpha),
            format!("truncated(alpha={alpha},d={d})"),
            ORDER - 2,
            None,
            None,
        ),
        KernelFamily::Log => (
            ScalingProfile::log(alpha),
            format!("log(alpha={alpha},d={d})"),
            ORDER - 2,
            None,
            None,
        ),
        KernelFamily::Perturbed { n } => {
            if n < 1 {
                return Err(Error::InvalidParameter("perturbation order n >= 1".into()));
            }
            let base = builtin_expr(KernelFamily::Stable, alpha, d);
            let dev: RadialExpr = Arc::new(move |r: Jet| base(r) * perturbation_bump(n, r));
            (
                ScalingProfile::stable(alpha),
                format!("perturbed(n={n},alpha={alpha},d={d})"),
                n - 1,
                Some(1.0),
                Some(dev),
            )
        }
    };
    let mut k = JumpKernel {
        id,
        d,
        expr: builtin_expr(family, alpha, d),
        val: builtin_val(family, alpha, d),
        m_max,
        jet_valid: ORDER,
        profile: Arc::new(profile),
        kappa: Vec::new(),
        kink,
        deviation,
    };
    k.kappa = empirical_kappa(&k, k.m_max.min(4));
    Ok(k)
}

/// 𝒯^n of a kernel: dimension shifts to d + 2n, smoothness drops by n.
pub fn t_operator(kernel: &JumpKernel, n: usize) -> Result<JumpKernel> {
    if n > kernel.m_max {
        return Err(Error::InsufficientDifferentiability {
            requested: n,
            available: kernel.m_max,
        });
    }
    let mut expr = kernel.expr.clone();
    for _ in 0..n {
        let prev = expr.clone();
        expr = Arc::new(move |r: Jet| -(prev(r).derivative_jet()) / r);
    }
    let val_expr = expr.clone();
    Ok(JumpKernel {
        id: format!("T^{n}[{}]", kernel.id),
        d: kernel.d + 2 * n,
        expr: expr.clone(),
        val: Arc::new(move |r: f64| val_expr(Jet::variable(r)).value()),
        m_max: kernel.m_max - n,
        jet_valid: kernel.jet_valid.saturating_sub(n),
        profile: kernel.profile.clone(),
        kappa: Vec::new(),
        kink: kernel.kink,
        deviation: None,
    })
}

/// Coefficient table C_{n,k} with 𝒯^n f = Σ_k C_{n,k} (-1/r)^{2n-k} f^{(k)}.
///
/// C_{n,0} = 0, C_{n,n} = 1 and C_{n+1,k} = (2n-k) C_{n,k} + C_{n,k-1};
/// the cross-check against symbolic differentiation of 𝒯^n e^{-r} lives in
/// the acceptance suite.
pub fn cm_coefficients(n: usize) -> Vec<Vec<u64>> {
    assert!(n >= 1);
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n);
    rows.push(vec![0, 1]);
    for m in 1..n {
        let prev = &rows[m - 1];
        let mut row = vec![0u64; m + 2];
        for k in 1..=m + 1 {
            let carry = if k <= m {
                (2 * m - k) as u64 * prev[k]
            } else {
                0
            };
            let shift = prev.get(k - 1).copied().unwrap_or(0);
            row[k] = carry + shift;
        }
        rows.push(row);
    }
    rows
}

/// Evaluates 𝒯^n f via the coefficient table, given f's derivatives.
pub fn t_via_coefficients(coeffs: &[Vec<u64>], n: usize, r: f64, f: &Jet) -> f64 {
    let row = &coeffs[n - 1];
    let mut acc = 0.0;
    for (k, &c) in row.iter().enumerate().skip(1) {
        if c == 0 {
            continue;
        }
        let p = (2 * n - k) as i32;
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        acc += c as f64 * sign * r.powi(-p) * f.derivative(k);
    }
    acc
}

/// Lévy measure of a Bernstein function.
pub enum LevyMeasure {
    /// point masses (mass, location)
    Atoms(Vec<(f64, f64)>),
    /// density on [lo, hi]
    Density {
        density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lo: f64,
        hi: f64,
    },
}

/// Input data for a subordinate-Brownian-motion kernel: φ(λ) = bλ + ∫(1-e^{-λt}) μ(dt).
pub struct BernsteinKernel {
    pub mu: LevyMeasure,
    pub b: f64,
}

impl BernsteinKernel {
    pub fn atoms(atoms: Vec<(f64, f64)>) -> Self {
        Self {
            mu: LevyMeasure::Atoms(atoms),
            b: 0.0,
        }
    }

    /// μ(dt) = [index / Γ(1-index)] t^{-1-index} dt truncated to [lo, hi];
    /// the untruncated measure subordinates to the 2·index-stable process.
    pub fn stable_subordinator(index: f64, lo: f64, hi: f64) -> Self {
        assert!(index > 0.0 && index < 1.0);
        let c = index / gamma_real(1.0 - index);
        Self {
            mu: LevyMeasure::Density {
                density: Arc::new(move |t: f64| c * t.powf(-1.0 - index)),
                lo,
                hi,
            },
            b: 0.0,
        }
    }

    /// ∫ (1 ∧ t) μ(dt), finite for a genuine Bernstein measure.
    pub fn integrability(&self) -> Result<f64> {
        match &self.mu {
            LevyMeasure::Atoms(a) => Ok(a.iter().map(|&(m, t)| m * t.min(1.0)).sum()),
            LevyMeasure::Density { density, lo, hi } => {
                let de = density.clone();
                quad::adaptive(
                    &mut |t: f64| t.min(1.0) * de(t),
                    *lo,
                    *hi,
                    QuadOpts::default(),
                    "bernstein measure (1∧t)",
                )
            }
        }
    }

    /// φ(λ), used by tests and reports.
    pub fn phi(&self, lambda: f64) -> Result<f64> {
        let base = self.b * lambda;
        match &self.mu {
            LevyMeasure::Atoms(a) => Ok(base
                + a.iter()
                    .map(|&(m, t)| m * (-(-lambda * t).exp_m1()))
                    .sum::<f64>()),
            LevyMeasure::Density { density, lo, hi } => {
                let de = density.clone();
                let v = quad::adaptive(
                    &mut |t: f64| -(-lambda * t).exp_m1() * de(t),
                    *lo,
                    *hi,
                    QuadOpts::default(),
                    "bernstein phi",
                )?;
                Ok(base + v)
            }
        }
    }
}

fn gamma_real(x: f64) -> f64 {
    // Lanczos for the few real-argument calls (subordinator normalisation)
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_real(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = C[0];
        let t = x + G + 0.5;
        for (i, &c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// J_d(r) = ∫ (4πt)^{-d/2} e^{-r²/(4t)} μ(dt): the jump density of the
/// subordinate Brownian motion, derivatives taken under the integral.
pub fn subordinate_kernel(bk: &BernsteinKernel, d: usize) -> Result<JumpKernel> {
    let mass = bk.integrability()?;
    if !mass.is_finite() {
        return Err(Error::DivergentTail("bernstein measure".into()));
    }
    let df = d as f64;
    let (expr, val): (RadialExpr, ValExpr) = match &bk.mu {
        LevyMeasure::Atoms(atoms) => {
            let atoms = atoms.clone();
            let atoms_v = atoms.clone();
            let e: RadialExpr = Arc::new(move |r: Jet| {
                let mut acc = Jet::constant(0.0);
                for &(m, t) in &atoms {
                    let pref = (4.0 * std::f64::consts::PI * t).powf(-df / 2.0) * m;
                    acc = acc + (-(r * r) * (1.0 / (4.0 * t))).exp() * pref;
                }
                acc
            });
            let v: ValExpr = Arc::new(move |r: f64| {
                atoms_v
                    .iter()
                    .map(|&(m, t)| {
                        m * (4.0 * std::f64::consts::PI * t).powf(-df / 2.0)
                            * (-r * r / (4.0 * t)).exp()
                    })
                    .sum()
            });
            (e, v)
        }
        LevyMeasure::Density { density, lo, hi } => {
            let de = density.clone();
            let (lo, hi) = (*lo, *hi);
            // log-split Gauss panels; the integrand in t is smooth
            let nodes = quad::gauss_legendre(48);
            let mut panels: Vec<(f64, f64)> = Vec::new();
            let mut a = lo;
            while a < hi {
                let b = (a * 8.0).min(hi);
                panels.push((a, b));
                a = b;
            }
            let de_v = de.clone();
            let panels_v = panels.clone();
            let nodes_v = nodes.clone();
            let e: RadialExpr = Arc::new(move |r: Jet| {
                let mut acc = Jet::constant(0.0);
                for &(a, b) in &panels {
                    let c = 0.5 * (a + b);
                    let h = 0.5 * (b - a);
                    for (xi, wi) in nodes.0.iter().zip(nodes.1.iter()) {
                        let t = c + h * xi;
                        let pref =
                            (4.0 * std::f64::consts::PI * t).powf(-df / 2.0) * de(t) * wi * h;
                        acc = acc + (-(r * r) * (1.0 / (4.0 * t))).exp() * pref;
                    }
                }
                acc
            });
            let v: ValExpr = Arc::new(move |r: f64| {
                let mut acc = 0.0;
                for &(a, b) in &panels_v {
                    let c = 0.5 * (a + b);
                    let h = 0.5 * (b - a);
                    for (xi, wi) in nodes_v.0.iter().zip(nodes_v.1.iter()) {
                        let t = c + h * xi;
                        acc += (4.0 * std::f64::consts::PI * t).powf(-df / 2.0)
                            * de_v(t)
                            * wi
                            * h
                            * (-r * r / (4.0 * t)).exp();
                    }
                }
                acc
            });
            (e, v)
        }
    };
    // completely monotone in r², so every 𝒯-iterate stays nonnegative and
    // decreasing; the profile records φ(r²)
    let profile = match &bk.mu {
        LevyMeasure::Density { density, lo, hi } => {
            let (de, lo, hi) = (density.clone(), *lo, *hi);
            ScalingProfile::custom(
                "subordinate",
                move |r: f64| {
                    let lam = r * r;
                    quad::adaptive(
                        &mut |t: f64| -(-lam * t).exp_m1() * de(t),
                        lo,
                        hi,
                        QuadOpts::with_rel_tol(1e-9),
                        "phi(r^2)",
                    )
                    .unwrap_or(f64::NAN)
                },
                (0.0, 1.99, 0.01, 1.99),
                (0.5, 2.0),
                Regime::UnboundedComparableH,
            )
        }
        LevyMeasure::Atoms(_) => ScalingProfile::custom(
            "subordinate-atoms",
            |r: f64| r * r / (1.0 + r * r),
            (0.0, 0.0, 1.9, 1.99),
            (0.5, 2.0),
            Regime::BoundedEll,
        ),
    };
    Ok(JumpKernel {
        id: format!("subordinate(d={d})"),
        d,
        expr,
        val,
        m_max: ORDER - 2,
        jet_valid: ORDER,
        profile: Arc::new(profile),
        kappa: Vec::new(),
        kink: None,
        deviation: None,
    })
}

fn empirical_kappa(kernel: &JumpKernel, m: usize) -> Vec<(f64, f64)> {
    let grid = crate::grid::log_grid_per_decade(1e-4, 1e4, 16);
    let mut out = Vec::new();
    for n in 0..=m {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for &r in &grid {
            let jet = kernel.jet(r);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let v = sign * jet.derivative(n);
            let envelope = r.powi(-(kernel.d as i32) - n as i32) * kernel.profile.ell(1.0 / r);
            let q = v / envelope;
            lo = lo.min(q);
            hi = hi.max(q);
        }
        out.push((lo, hi));
    }
    out
}

/// Central finite-difference derivative of a scalar function, order ≤ 5.
pub fn fd_derivative(f: &dyn Fn(f64) -> f64, order: usize, x: f64, h: f64) -> f64 {
    match order {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        3 => {
            (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h.powi(3))
        }
        4 => {
            (f(x + 2.0 * h) - 4.0 * f(x + h) + 6.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h))
                / h.powi(4)
        }
        5 => {
            (-f(x - 3.0 * h) + 4.0 * f(x - 2.0 * h) - 5.0 * f(x - h) + 5.0 * f(x + h)
                - 4.0 * f(x + 2.0 * h)
                + f(x + 3.0 * h))
                / (2.0 * h.powi(5))
        }
        _ => panic!("fd_derivative supports orders 1..=5"),
    }
}

/// Report of the one-sided finite-difference probe at a kink.
#[derive(Debug, Clone, Serialize)]
pub struct KinkReport {
    pub order: usize,
    pub location: f64,
    pub left: f64,
    pub right: f64,
    pub jump: f64,
    pub neighbor_variation: f64,
    pub jump_ratio: f64,
}

/// Probes the discontinuity of the `order`-th derivative at `x0` with
/// one-sided finite differences of the kernel's deviation from its smooth
/// base (so the noise floor is far below the jump).  Falls back to the raw
/// kernel when no base is attached.
pub fn fd_jump_ratio(kernel: &JumpKernel, order: usize, x0: f64, h: f64) -> KinkReport {
    let f: Box<dyn Fn(f64) -> f64> = match &kernel.deviation {
        Some(dev) => {
            let dev = dev.clone();
            Box::new(move |r: f64| dev(Jet::variable(r)).value())
        }
        None => {
            let e = kernel.val.clone();
            Box::new(move |r: f64| e(r))
        }
    };
    let off = 4.0 * h;
    let left = fd_derivative(&*f, order, x0 - off, h);
    let right = fd_derivative(&*f, order, x0 + off, h);
    let left_far = fd_derivative(&*f, order, x0 - off - 5.0 * h, h);
    let right_far = fd_derivative(&*f, order, x0 + off + 5.0 * h, h);
    let variation = (left - left_far).abs().max((right - right_far).abs());
    let jump = (left - right).abs();
    KinkReport {
        order,
        location: x0,
        left,
        right,
        jump,
        neighbor_variation: variation,
        jump_ratio: jump / variation.max(1e-300),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaRow {
    pub n: usize,
    pub kappa1: f64,
    pub kappa2: f64,
    pub sign_ok: bool,
}

/// Grid certificate for 𝐇(d,m).
#[derive(Debug, Clone, Serialize)]
pub struct HCertificate {
    pub kernel: String,
    pub d: usize,
    pub m: usize,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub per_decade: usize,
    pub kappa: Vec<KappaRow>,
    /// 𝒯^n j nonincreasing on the grid, n = 0..=m
    pub t_monotone: Vec<bool>,
    pub kink: Option<KinkReport>,
    pub pass: bool,
}

/// Certifies 𝐇(d,m) on a log grid: two-sided κ bounds for each derivative
/// order, monotonicity of every 𝒯-iterate, and a kink probe where the
/// kernel declares limited smoothness.  Always returns a certificate; FAIL
/// is a value, not an error.
pub fn verify_h(kernel: &JumpKernel, m: usize) -> HCertificate {
    let per_decade = 64;
    let (lo, hi) = (1e-4, 1e4);
    let grid = crate::grid::log_grid_per_decade(lo, hi, per_decade);

    let analytic_orders = m.min(kernel.m_max).min(kernel.jet_valid - 1);
    let mut kappa = Vec::new();
    for n in 0..=analytic_orders {
        let mut klo = f64::INFINITY;
        let mut khi: f64 = 0.0;
        let mut sign_ok = true;
        for &r in &grid {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let v = sign * kernel.jet(r).derivative(n);
            if v <= 0.0 {
                sign_ok = false;
            }
            let envelope = r.powi(-(kernel.d as i32) - n as i32) * kernel.profile.ell(1.0 / r);
            let q = v / envelope;
            klo = klo.min(q);
            khi = khi.max(q);
        }
        kappa.push(KappaRow {
            n,
            kappa1: klo,
            kappa2: khi,
            sign_ok,
        });
    }

    let mut t_monotone = Vec::new();
    for n in 0..=analytic_orders {
        match t_operator(kernel, n) {
            Ok(tk) => {
                let mut prev = f64::INFINITY;
                let mut mono = true;
                for &r in &grid {
                    let v = tk.eval(r);
                    if v > prev * (1.0 + 1e-10) {
                        mono = false;
                        break;
                    }
                    prev = v;
                }
                t_monotone.push(mono);
            }
            Err(_) => t_monotone.push(false),
        }
    }

    // probe orders beyond the smooth range at the declared kink
    let mut kink_report = None;
    if let Some(x0) = kernel.kink {
        for order in (kernel.m_max + 1)..=m.min(5) {
            let rep = fd_jump_ratio(kernel, order, x0, 1e-3);
            if rep.jump_ratio > 10.0 {
                kink_report = Some(rep);
                break;
            }
        }
    }

    let bounds_ok = kappa
        .iter()
        .all(|k| k.sign_ok && k.kappa1 > 0.0 && k.kappa2.is_finite());
    let mono_ok = t_monotone.iter().all(|&b| b);
    let smooth_enough = m <= kernel.m_max;
    let pass = bounds_ok && mono_ok && smooth_enough && kink_report.is_none();
    HCertificate {
        kernel: kernel.id.clone(),
        d: kernel.d,
        m,
        grid_lo: lo,
        grid_hi: hi,
        per_decade,
        kappa,
        t_monotone,
        kink: kink_report,
        pass,
    }
}
