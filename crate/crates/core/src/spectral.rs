//! Periodic spectral substrate and the nonlocal operators on it.
//!
//! A `SpectralField` is a real grid function on the torus [-πP, πP)^d with
//! its discrete Fourier coefficients; 𝓛, 𝓛^a and (1-𝓛)^{γ/2} act by radial
//! multipliers -ψ(|κ|), -m(t,κ)ψ(|κ|) and (1+ψ(|κ|))^{γ/2}.  The direct
//! singular-integral route `apply_l_quadrature` is kept fully independent of
//! the spectral path: the two are cross-validated against each other.

use crate::error::{Error, Result};
use crate::kernels::JumpKernel;
use crate::quad::{self, QuadOpts};
use crate::symbol::{psi_weighted, CharExponent};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::sync::Arc;

/// Real periodic grid function with cached Fourier coefficients.
#[derive(Clone)]
pub struct SpectralField {
    pub d: usize,
    pub n: usize,
    /// box half-width P: the domain is [-πP, πP)^d
    pub box_half: f64,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    fn check_dims(d: usize, n: usize) {
        assert!(d == 1 || d == 2, "spectral fields support d = 1, 2");
        assert!(n.is_power_of_two() && n >= 4, "n must be a power of two");
    }

    /// Grid coordinates along one axis.
    pub fn axis(&self) -> Vec<f64> {
        let h = 2.0 * std::f64::consts::PI * self.box_half / self.n as f64;
        (0..self.n)
            .map(|j| -std::f64::consts::PI * self.box_half + j as f64 * h)
            .collect()
    }

    pub fn grid_step(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.box_half / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn from_fn(d: usize, n: usize, box_half: f64, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::check_dims(d, n);
        let h = 2.0 * std::f64::consts::PI * box_half / n as f64;
        let x0 = -std::f64::consts::PI * box_half;
        let values: Vec<f64> = match d {
            1 => (0..n).map(|j| f(&[x0 + j as f64 * h])).collect(),
            _ => {
                let mut v = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        v.push(f(&[x0 + i as f64 * h, x0 + j as f64 * h]));
                    }
                }
                v
            }
        };
        Self::from_values(d, n, box_half, values)
    }

    pub fn from_values(d: usize, n: usize, box_half: f64, values: Vec<f64>) -> Self {
        Self::check_dims(d, n);
        assert_eq!(values.len(), n.pow(d as u32));
        let coeffs = forward_fft(d, n, &values);
        Self {
            d,
            n,
            box_half,
            values,
            coeffs,
        }
    }

    pub fn zeros(d: usize, n: usize, box_half: f64) -> Self {
        Self::from_values(d, n, box_half, vec![0.0; n.pow(d as u32)])
    }

    /// Signed integer frequency of FFT index k along one axis.
    fn signed_mode(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// |κ| of the flat coefficient index.
    pub fn mode_modulus(&self, idx: usize) -> f64 {
        match self.d {
            1 => (self.signed_mode(idx) as f64 / self.box_half).abs(),
            _ => {
                let (i, j) = (idx / self.n, idx % self.n);
                let ki = self.signed_mode(i) as f64;
                let kj = self.signed_mode(j) as f64;
                (ki * ki + kj * kj).sqrt() / self.box_half
            }
        }
    }

    pub fn max_frequency(&self) -> f64 {
        match self.d {
            1 => (self.n / 2) as f64 / self.box_half,
            _ => ((self.n / 2) as f64) * 2f64.sqrt() / self.box_half,
        }
    }

    /// Relative ℓ² mass of the coefficients with |k|_∞ ≥ 3N/8: the
    /// band-limitation diagnostic behind the spectral preconditions.
    pub fn tail_mass(&self) -> f64 {
        let cut = (3 * self.n) / 8;
        let mut tail = 0.0;
        let mut total = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let hi = match self.d {
                1 => self.signed_mode(idx).unsigned_abs() as usize >= cut,
                _ => {
                    let (i, j) = (idx / self.n, idx % self.n);
                    self.signed_mode(i).unsigned_abs() as usize >= cut
                        || self.signed_mode(j).unsigned_abs() as usize >= cut
                }
            };
            let m = c.norm_sqr();
            total += m;
            if hi {
                tail += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (tail / total).sqrt()
        }
    }

    /// Applies a radial Fourier multiplier and returns the new field.
    pub fn apply_radial_multiplier(&self, m: impl Fn(f64) -> f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (idx, c) in coeffs.iter_mut().enumerate() {
            *c *= m(self.mode_modulus(idx));
        }
        let values = inverse_fft_real(self.d, self.n, &coeffs);
        Self {
            d: self.d,
            n: self.n,
            box_half: self.box_half,
            values,
            coeffs,
        }
    }

    /// 𝓛 u: coefficients scaled by -ψ(|κ|).
    pub fn apply_l_spectral(&self, exponent: &CharExponent) -> Self {
        self.apply_radial_multiplier(|kappa| -exponent.psi(kappa))
    }

    /// (1-𝓛)^{γ/2} u: coefficients scaled by (1+ψ(|κ|))^{γ/2}.
    pub fn bessel_potential(&self, exponent: &CharExponent, gamma: f64) -> Self {
        if gamma == 0.0 {
            return self.clone();
        }
        self.apply_radial_multiplier(|kappa| (1.0 + exponent.psi(kappa)).powf(gamma / 2.0))
    }

    /// 𝓛^a u at time t: coefficients scaled by -m(t,κ)ψ(|κ|).
    pub fn apply_la_spectral(
        &self,
        exponent: &CharExponent,
        kernel: &JumpKernel,
        coef: &Coefficient,
        t: f64,
    ) -> Result<Self> {
        // m depends on |κ| only; cache per distinct modulus
        let mut mods: Vec<f64> = (0..self.coeffs.len())
            .map(|i| self.mode_modulus(i))
            .collect();
        let mut uniq = mods.clone();
        uniq.sort_by(|a, b| a.partial_cmp(b).unwrap());
        uniq.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * a.abs().max(1.0));
        let mut table = Vec::with_capacity(uniq.len());
        for &kappa in &uniq {
            let m = coefficient_multiplier(coef, kernel, exponent, t, kappa)?.value;
            table.push((kappa, m));
        }
        let lookup = |kappa: f64| -> f64 {
            let i = table
                .binary_search_by(|probe| probe.0.partial_cmp(&kappa).unwrap())
                .unwrap_or_else(|e| e.min(table.len() - 1));
            table[i].1
        };
        for m in mods.iter_mut() {
            let kappa = *m;
            *m = -lookup(kappa) * exponent.psi(kappa);
        }
        let mut coeffs = self.coeffs.clone();
        for (c, factor) in coeffs.iter_mut().zip(mods.iter()) {
            *c *= *factor;
        }
        let values = inverse_fft_real(self.d, self.n, &coeffs);
        Ok(Self {
            d: self.d,
            n: self.n,
            box_half: self.box_half,
            values,
            coeffs,
        })
    }

    /// Grid L_p norm (p < ∞) with the uniform cell weight.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0);
        let w = self.grid_step().powi(self.d as i32);
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (w * s).powf(1.0 / p)
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let values: Vec<f64> = self.values.iter().map(|v| c * v).collect();
        let coeffs = self.coeffs.iter().map(|z| z * c).collect();
        Self {
            d: self.d,
            n: self.n,
            box_half: self.box_half,
            values,
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.d, self.n), (other.d, other.n));
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            d: self.d,
            n: self.n,
            box_half: self.box_half,
            values,
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn coeff(&self, idx: usize) -> Complex64 {
        self.coeffs[idx]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn from_coeffs(d: usize, n: usize, box_half: f64, coeffs: Vec<Complex64>) -> Self {
        Self::check_dims(d, n);
        assert_eq!(coeffs.len(), n.pow(d as u32));
        let values = inverse_fft_real(d, n, &coeffs);
        Self {
            d,
            n,
            box_half,
            values,
            coeffs,
        }
    }

    /// Round-trip transform error, a construction invariant.
    pub fn round_trip_error(&self) -> f64 {
        let back = inverse_fft_real(self.d, self.n, &self.coeffs);
        let num: f64 = self
            .values
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let den: f64 = self.values.iter().map(|v| v * v).sum();
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }
}

fn forward_fft(d: usize, n: usize, values: &[f64]) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let norm = 1.0 / n as f64;
    match d {
        1 => {
            let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft.process(&mut buf);
            buf.iter().map(|z| z * norm).collect()
        }
        _ => {
            let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            for row in buf.chunks_mut(n) {
                fft.process(row);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..n {
                    col[i] = buf[i * n + j];
                }
                fft.process(&mut col);
                for i in 0..n {
                    buf[i * n + j] = col[i];
                }
            }
            buf.iter().map(|z| z * norm * norm).collect()
        }
    }
}

fn inverse_fft_real(d: usize, n: usize, coeffs: &[Complex64]) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    match d {
        1 => {
            let mut buf = coeffs.to_vec();
            ifft.process(&mut buf);
            buf.iter().map(|z| z.re).collect()
        }
        _ => {
            let mut buf = coeffs.to_vec();
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..n {
                    col[i] = buf[i * n + j];
                }
                ifft.process(&mut col);
                for i in 0..n {
                    buf[i * n + j] = col[i];
                }
            }
            for row in buf.chunks_mut(n) {
                ifft.process(row);
            }
            buf.iter().map(|z| z.re).collect()
        }
    }
}

/// Time-measurable bounded coefficient a(t, y).
pub enum Coefficient {
    Constant(f64),
    /// a(t, y) = c(t), spatially trivial
    TimeOnly {
        c: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lo: f64,
        hi: f64,
    },
    /// a(y) = a0 + (a1 - a0)·1_{|y| > radius}
    RadialIndicator {
        a0: f64,
        a1: f64,
        radius: f64,
    },
    General {
        f: Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>,
        lo: f64,
        hi: f64,
    },
}

impl Coefficient {
    pub fn id(&self) -> String {
        match self {
            Coefficient::Constant(c) => format!("const({c})"),
            Coefficient::TimeOnly { .. } => "time-only".into(),
            Coefficient::RadialIndicator { a0, a1, radius } => {
                format!("annulus(a0={a0},a1={a1},r={radius})")
            }
            Coefficient::General { .. } => "general".into(),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Coefficient::Constant(c) => (*c, *c),
            Coefficient::TimeOnly { lo, hi, .. } => (*lo, *hi),
            Coefficient::RadialIndicator { a0, a1, .. } => (a0.min(*a1), a0.max(*a1)),
            Coefficient::General { lo, hi, .. } => (*lo, *hi),
        }
    }

    pub fn eval(&self, t: f64, y: &[f64]) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::TimeOnly { c, .. } => c(t),
            Coefficient::RadialIndicator { a0, a1, radius } => {
                let r2: f64 = y.iter().map(|v| v * v).sum();
                if r2.sqrt() > *radius {
                    *a1
                } else {
                    *a0
                }
            }
            Coefficient::General { f, .. } => f(t, y),
        }
    }

    pub fn time_dependent(&self) -> bool {
        matches!(
            self,
            Coefficient::TimeOnly { .. } | Coefficient::General { .. }
        )
    }

    /// Even part of a(t, ·) on the radius, for the radial reduction (d=1).
    fn even_radial(&self, t: f64, s: f64) -> f64 {
        0.5 * (self.eval(t, &[s]) + self.eval(t, &[-s]))
    }
}

/// ∫_{r<|y|<R} y a(t,y) j(|y|) dy over the given annuli: the odd-moment
/// cancellation required of admissible coefficients (d = 1).
pub fn coefficient_symmetry_defect(
    coef: &Coefficient,
    kernel: &JumpKernel,
    t: f64,
    annuli: &[(f64, f64)],
) -> Result<Vec<f64>> {
    if kernel.d != 1 {
        return Err(Error::UnsupportedDimension(kernel.d));
    }
    let mut out = Vec::new();
    for &(r, big_r) in annuli {
        let v = quad::adaptive(
            &mut |s: f64| {
                let odd = coef.eval(t, &[s]) - coef.eval(t, &[-s]);
                s * odd * kernel.eval(s)
            },
            r,
            big_r,
            QuadOpts::default(),
            "coefficient odd moment",
        )?;
        out.push(v);
    }
    Ok(out)
}

/// Value of m(t, ξ) together with the ξ = 0 convention flag.
#[derive(Debug, Clone, Copy)]
pub struct MultiplierValue {
    pub value: f64,
    /// true when the 0/0 limit convention m(t,0) := a0 was used
    pub at_zero_convention: bool,
}

/// m(t,ξ) = ∫(1-cos(y·ξ)) a(t,y) j(y) dy / ψ(|ξ|).
pub fn coefficient_multiplier(
    coef: &Coefficient,
    kernel: &JumpKernel,
    exponent: &CharExponent,
    t: f64,
    xi: f64,
) -> Result<MultiplierValue> {
    let (a0, _a1) = coef.bounds();
    if xi == 0.0 {
        return Ok(MultiplierValue {
            value: a0,
            at_zero_convention: true,
        });
    }
    match coef {
        Coefficient::Constant(c) => Ok(MultiplierValue {
            value: *c,
            at_zero_convention: false,
        }),
        Coefficient::TimeOnly { c, .. } => Ok(MultiplierValue {
            value: c(t),
            at_zero_convention: false,
        }),
        _ => {
            if kernel.d != 1 {
                return Err(Error::UnsupportedDimension(kernel.d));
            }
            let numerator = psi_weighted(kernel, xi, 1e-8, &|s| coef.even_radial(t, s))?;
            Ok(MultiplierValue {
                value: numerator / exponent.psi(xi),
                at_zero_convention: false,
            })
        }
    }
}

/// Smooth test function for the singular-integral route (d = 1).
pub trait Smooth1d: Sync {
    fn eval(&self, x: f64) -> f64;
    fn grad(&self, x: f64) -> f64;
    fn hess(&self, x: f64) -> f64;
    /// closed support, when compactly supported
    fn support(&self) -> Option<(f64, f64)> {
        None
    }
    /// dominant oscillation period, for trigonometric test functions
    fn osc_period(&self) -> Option<f64> {
        None
    }
}

/// C² bump (1-(x-c)²/w²)³ on |x-c| ≤ w.
pub struct Bump1d {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Smooth1d for Bump1d {
    fn eval(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        let s = 1.0 - u * u;
        if s <= 0.0 {
            0.0
        } else {
            self.amplitude * s * s * s
        }
    }

    fn grad(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        let s = 1.0 - u * u;
        if s <= 0.0 {
            0.0
        } else {
            self.amplitude * 3.0 * s * s * (-2.0 * u) / self.width
        }
    }

    fn hess(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        let s = 1.0 - u * u;
        if s <= 0.0 {
            0.0
        } else {
            self.amplitude * (6.0 * s * (2.0 * u) * (2.0 * u) - 6.0 * s * s)
                / (self.width * self.width)
        }
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((self.center - self.width, self.center + self.width))
    }
}

/// Gaussian bump: effectively band-limited, with a hard support hint far
/// in its tail (values there are below 1e-30).
pub struct GaussianBump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Smooth1d for GaussianBump {
    fn eval(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        self.amplitude * (-u * u).exp()
    }
    fn grad(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        -2.0 * u / self.width * self.amplitude * (-u * u).exp()
    }
    fn hess(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        (4.0 * u * u - 2.0) / (self.width * self.width) * self.amplitude * (-u * u).exp()
    }
    fn support(&self) -> Option<(f64, f64)> {
        Some((
            self.center - 12.0 * self.width,
            self.center + 12.0 * self.width,
        ))
    }
}

/// cos(ωx + φ), for the single-mode cross-checks.
pub struct CosWave {
    pub omega: f64,
    pub phase: f64,
}

impl Smooth1d for CosWave {
    fn eval(&self, x: f64) -> f64 {
        (self.omega * x + self.phase).cos()
    }
    fn grad(&self, x: f64) -> f64 {
        -self.omega * (self.omega * x + self.phase).sin()
    }
    fn hess(&self, x: f64) -> f64 {
        -self.omega * self.omega * (self.omega * x + self.phase).cos()
    }
    fn osc_period(&self) -> Option<f64> {
        Some(2.0 * std::f64::consts::PI / self.omega)
    }
}

/// 𝓛f(x) by direct singular-integral quadrature with compensator cutoff r0:
/// the inner ball is regularised by subtracting the Hessian quadratic and
/// integrating it against j analytically; the result is r0-independent.
pub fn apply_l_quadrature(
    f: &dyn Smooth1d,
    x: f64,
    kernel: &JumpKernel,
    r0: f64,
    rel_tol: f64,
) -> Result<f64> {
    if kernel.d != 1 {
        return Err(Error::UnsupportedDimension(kernel.d));
    }
    assert!(r0 > 0.0);
    let opts = QuadOpts::with_rel_tol(rel_tol);
    let fx = f.eval(x);
    let hx = f.hess(x);

    // inner ball: [f(x+y)+f(x-y)-2f(x)-f''(x)y²] j(y) + f''(x) ∫ y² j
    let inner_reg = quad::adaptive(
        &mut |y: f64| (f.eval(x + y) + f.eval(x - y) - 2.0 * fx - hx * y * y) * kernel.eval(y),
        0.0,
        r0,
        opts,
        "singular integral inner remainder",
    )?;
    let second_moment = quad::adaptive(
        &mut |y: f64| y * y * kernel.eval(y),
        0.0,
        r0,
        opts,
        "kernel second moment",
    )?;
    let inner = inner_reg + hx * second_moment;

    // outer: ∫_{|y|>r0} (f(x+y) - f(x)) j(y) dy, symmetrised
    let tail_mass =
        quad::adaptive_to_inf(&mut |y: f64| kernel.eval(y), r0, opts, "kernel tail mass")?;
    let outer = if let Some((lo, hi)) = f.support() {
        // f vanishes outside [lo, hi]; integrate the live part exactly
        let mut sum = -2.0 * fx * tail_mass;
        let seg = |a: f64, b: f64, side: f64| -> Result<f64> {
            if b <= a {
                return Ok(0.0);
            }
            quad::adaptive_scaled(
                &mut |y: f64| f.eval(x + side * y) * kernel.eval(y),
                a,
                b,
                opts,
                fx.abs().max(1.0),
                "outer support segment",
            )
        };
        let right = (lo - x).max(r0);
        let right_end = (hi - x).max(r0);
        sum += seg(right, right_end, 1.0)?;
        let left = (x - hi).max(r0);
        let left_end = (x - lo).max(r0);
        sum += seg(left, left_end, -1.0)?;
        sum
    } else if let Some(period) = f.osc_period() {
        // zero-mean oscillatory f: split off the -2f(x) mass (analytic via
        // the kernel tail) so the panel sums genuinely alternate
        let g = |y: f64| (f.eval(x + y) + f.eval(x - y)) * kernel.eval(y);
        let head_end = r0 + 2.0 * period;
        let head = quad::adaptive_scaled(
            &mut { g },
            r0,
            head_end,
            opts,
            fx.abs().max(1.0) * tail_mass,
            "outer oscillatory head",
        )?;
        let scale = head.abs().max(inner.abs()).max(1e-30);
        let tail = quad::osc_tail(
            &mut { g },
            head_end,
            period / 2.0,
            rel_tol * scale,
            1 << 14,
            "outer oscillatory tail",
        )?;
        head + tail.value - 2.0 * fx * tail_mass
    } else {
        return Err(Error::InvalidParameter(
            "unbounded support requires an oscillation period hint".into(),
        ));
    };

    Ok(inner + outer)
}
