//! Characteristic exponent ψ(ρ) = ∫ (1 - cos(ξ·y)) j_d(|y|) dy for |ξ| = ρ.
//!
//! The d-dimensional integral reduces to one radial integral through the
//! spherical cosine mean Φ_d:
//!   ψ(ρ) = σ_{d-1} ∫_0^∞ (1 - Φ_d(ρ s)) j_d(s) s^{d-1} ds.
//! The integral is split at s = 1/ρ: the inner part uses the
//! cancellation-free series of 1 - Φ_d (which behaves like u² and kills the
//! kernel singularity), the outer part is written as mass minus an
//! oscillatory remainder, summed in half-period panels with iterated
//! averaging.

use crate::bessel::{first_kernel_zero, one_minus_phi, phi, sphere_area};
use crate::error::{Error, Result};
use crate::grid::MonotoneCubic;
use crate::kernels::JumpKernel;
use crate::quad::{self, QuadOpts};
use crate::scale::ScaleTriple;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// ψ(ρ) by direct quadrature.
pub fn psi_direct(kernel: &JumpKernel, rho: f64, rel_tol: f64) -> Result<f64> {
    psi_weighted(kernel, rho, rel_tol, &|_| 1.0)
}

/// ∫ (1 - cos(ξ·y)) w(|y|) j_d(|y|) dy for |ξ| = ρ and an even bounded
/// radial weight w: the engine behind both ψ and the coefficient
/// multiplier numerator.
pub fn psi_weighted(
    kernel: &JumpKernel,
    rho: f64,
    rel_tol: f64,
    w: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    assert!(rho >= 0.0);
    if rho == 0.0 {
        return Ok(0.0);
    }
    let d = kernel.d;
    let sigma = sphere_area(d);
    let s0 = 1.0 / rho;
    let opts = QuadOpts::with_rel_tol(rel_tol);

    // inner: (1 - Φ)(ρ s) ~ (ρ s)²/(2d) cancels the kernel singularity
    let inner = quad::adaptive(
        &mut |s: f64| one_minus_phi(d, rho * s) * w(s) * kernel.eval(s) * s.powi(d as i32 - 1),
        0.0,
        s0,
        opts,
        "psi inner",
    )?;

    // outer mass: ∫_{s0}^∞ w j s^{d-1}
    let mass = quad::adaptive_to_inf(
        &mut |s: f64| w(s) * kernel.eval(s) * s.powi(d as i32 - 1),
        s0,
        opts,
        "psi outer mass",
    )?;

    // oscillatory correction: ∫_{s0}^∞ Φ_d(ρ s) w j s^{d-1}
    let z1 = first_kernel_zero(d) / rho;
    let head = if z1 > s0 {
        quad::adaptive_scaled(
            &mut |s: f64| phi(d, rho * s) * w(s) * kernel.eval(s) * s.powi(d as i32 - 1),
            s0,
            z1,
            opts,
            inner + mass,
            "psi oscillatory head",
        )?
    } else {
        0.0
    };
    let tol_abs = (rel_tol * (inner + mass).abs()).max(1e-300) * 0.25;
    let tail = quad::osc_tail(
        &mut |s: f64| phi(d, rho * s) * w(s) * kernel.eval(s) * s.powi(d as i32 - 1),
        z1.max(s0),
        std::f64::consts::PI / rho,
        tol_abs,
        4096,
        "psi oscillatory tail",
    )?;

    Ok(sigma * (inner + mass - head - tail.value))
}

/// Evaluable characteristic exponent with a monotone log-log cache.
pub struct CharExponent {
    pub kernel: Arc<JumpKernel>,
    cache: MonotoneCubic,
    cache_lo: f64,
    cache_hi: f64,
    slope_lo: f64,
    slope_hi: f64,
    /// recorded interpolation error bound from mid-cell probes
    pub cache_rel_err: f64,
}

pub const CACHE_LO: f64 = 1e-7;
pub const CACHE_HI: f64 = 1e7;
const PER_DECADE: usize = 128;

impl CharExponent {
    pub fn new(kernel: JumpKernel) -> Result<Self> {
        Self::with_range(kernel, CACHE_LO, CACHE_HI)
    }

    pub fn with_range(kernel: JumpKernel, lo: f64, hi: f64) -> Result<Self> {
        assert!(lo > 0.0 && hi > lo);
        let kernel = Arc::new(kernel);
        let decades = (hi / lo).log10();
        let n = (decades * PER_DECADE as f64).ceil() as usize + 1;
        let grid = crate::grid::logspace(lo, hi, n);
        let vals: Vec<Result<f64>> = grid
            .par_iter()
            .map(|&rho| psi_direct(&kernel, rho, 1e-8))
            .collect();
        let mut ln_r = Vec::with_capacity(n);
        let mut ln_v = Vec::with_capacity(n);
        for (r, v) in grid.iter().zip(vals) {
            let v = v?;
            if !(v > 0.0) {
                return Err(Error::QuadratureNonConvergent {
                    context: format!("psi({r}) came out non-positive: {v}"),
                    lo: *r,
                    hi: *r,
                });
            }
            ln_r.push(r.ln());
            ln_v.push(v.ln());
        }
        let slope_lo = (ln_v[1] - ln_v[0]) / (ln_r[1] - ln_r[0]);
        let m = ln_v.len();
        let slope_hi = (ln_v[m - 1] - ln_v[m - 2]) / (ln_r[m - 1] - ln_r[m - 2]);
        let cache = MonotoneCubic::new(ln_r, ln_v);

        // record the interpolation error on a handful of mid-cell probes
        let mut rel_err: f64 = 0.0;
        let probes = 24;
        for i in 0..probes {
            let x = lo * (hi / lo).powf((i as f64 + 0.41) / probes as f64);
            let direct = psi_direct(&kernel, x, 1e-10)?;
            let interp = cache.eval(x.ln()).exp();
            rel_err = rel_err.max(((interp - direct) / direct).abs());
        }
        Ok(Self {
            kernel,
            cache,
            cache_lo: lo,
            cache_hi: hi,
            slope_lo,
            slope_hi,
            cache_rel_err: rel_err,
        })
    }

    /// ψ(ρ).  Exactly zero at ρ = 0; cached inside the build range, power
    /// extrapolation with the boundary log-log slope outside (the deep
    /// high-frequency tail only ever multiplies e^{-tψ} terms below the
    /// truncation threshold, so the extrapolation error is immaterial).
    pub fn psi(&self, rho: f64) -> f64 {
        assert!(rho >= 0.0);
        if rho == 0.0 {
            return 0.0;
        }
        if rho < self.cache_lo {
            let base = self.cache.eval(self.cache_lo.ln()).exp();
            return base * (rho / self.cache_lo).powf(self.slope_lo);
        }
        if rho > self.cache_hi {
            let base = self.cache.eval(self.cache_hi.ln()).exp();
            return base * (rho / self.cache_hi).powf(self.slope_hi);
        }
        self.cache.eval(rho.ln()).exp()
    }

    pub fn cache_range(&self) -> (f64, f64) {
        (self.cache_lo, self.cache_hi)
    }

    /// Smallest ρ with t·ψ(ρ) ≥ level (the inversion truncation cutoff).
    pub fn frequency_cutoff(&self, t: f64, level: f64) -> f64 {
        assert!(t > 0.0 && level > 0.0);
        let target = level / t;
        let mut lo = self.cache_lo;
        let mut hi = self.cache_hi;
        if self.psi(lo) >= target {
            return lo;
        }
        while self.psi(hi) < target {
            hi *= 4.0;
            if hi > 1e300 {
                return hi;
            }
        }
        if hi > self.cache_hi {
            lo = (hi / 4.0).max(lo);
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if self.psi(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo < 1.0 + 1e-12 {
                break;
            }
        }
        hi
    }
}

/// One row of the ψ–h comparability table.
#[derive(Debug, Clone, Serialize)]
pub struct PsiHRow {
    pub r: f64,
    pub psi_inv_r: f64,
    pub h: f64,
    pub ratio: f64,
}

/// Certificate for C0·h(r) ≤ ψ(1/r) ≤ 2·h(r), plus the large-r
/// comparability with K and ℓ.
#[derive(Debug, Clone, Serialize)]
pub struct PsiHCertificate {
    pub kernel: String,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub upper_bound_ok: bool,
    /// empirical infimum of ψ(1/r)/h(r): the observed C0
    pub c0_observed: f64,
    /// range of ψ(1/r)/K(r) over r ≥ 1
    pub k_ratio_large_r: (f64, f64),
    /// range of ψ(1/r)/ℓ(1/r) over r ≥ 1
    pub ell_ratio_large_r: (f64, f64),
    pub rows: Vec<PsiHRow>,
}

/// Tabulates ψ(1/r)/h(r) over the grid and asserts the two-sided window.
pub fn certify_psi_h(
    exponent: &CharExponent,
    triple: &ScaleTriple,
    r_grid: &[f64],
) -> Result<PsiHCertificate> {
    let mut rows = Vec::with_capacity(r_grid.len());
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max: f64 = 0.0;
    let mut k_lo = f64::INFINITY;
    let mut k_hi: f64 = 0.0;
    let mut e_lo = f64::INFINITY;
    let mut e_hi: f64 = 0.0;
    for &r in r_grid {
        let psi = exponent.psi(1.0 / r);
        let h = triple.h(r)?;
        let ratio = psi / h;
        ratio_min = ratio_min.min(ratio);
        ratio_max = ratio_max.max(ratio);
        if r >= 1.0 {
            let qk = psi / triple.k(r)?;
            k_lo = k_lo.min(qk);
            k_hi = k_hi.max(qk);
            let qe = psi / triple.profile.ell(1.0 / r);
            e_lo = e_lo.min(qe);
            e_hi = e_hi.max(qe);
        }
        rows.push(PsiHRow {
            r,
            psi_inv_r: psi,
            h,
            ratio,
        });
    }
    Ok(PsiHCertificate {
        kernel: exponent.kernel.id.clone(),
        ratio_min,
        ratio_max,
        upper_bound_ok: ratio_max <= 2.0 + 1e-3 && ratio_min > 0.0,
        c0_observed: ratio_min,
        k_ratio_large_r: (k_lo, k_hi),
        ell_ratio_large_r: (e_lo, e_hi),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{builtin_kernel, KernelFamily};
    use approx::assert_relative_eq;
    use std::sync::OnceLock;

    fn cauchy() -> &'static CharExponent {
        static C: OnceLock<CharExponent> = OnceLock::new();
        C.get_or_init(|| {
            CharExponent::new(builtin_kernel(KernelFamily::Stable, 1.0, 1).unwrap()).unwrap()
        })
    }

    #[test]
    fn stable_symbol_is_pi_rho() {
        // j(r) = r^{-2} in d = 1 has ψ(ρ) = πρ
        let k = builtin_kernel(KernelFamily::Stable, 1.0, 1).unwrap();
        for &rho in &[0.01, 0.1, 1.0, 10.0, 1000.0] {
            let v = psi_direct(&k, rho, 1e-9).unwrap();
            assert_relative_eq!(v, std::f64::consts::PI * rho, max_relative = 1e-8);
        }
        assert_eq!(psi_direct(&k, 0.0, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn cached_symbol_matches_direct_and_scales() {
        let c = cauchy();
        assert!(c.cache_rel_err < 1e-6, "cache err {}", c.cache_rel_err);
        for &rho in &[0.037, 1.0, 53.0, 2e4] {
            assert_relative_eq!(c.psi(rho), std::f64::consts::PI * rho, max_relative = 1e-6);
            // homogeneity of the stable symbol
            assert_relative_eq!(c.psi(2.0 * rho), 2.0 * c.psi(rho), max_relative = 1e-6);
        }
        assert_eq!(c.psi(0.0), 0.0);
        // extrapolation beyond the cache stays on the power law
        assert_relative_eq!(c.psi(1e9), std::f64::consts::PI * 1e9, max_relative = 1e-3);
    }

    #[test]
    fn log_family_reference_values() {
        // independently computed with 25-digit arithmetic
        let k = builtin_kernel(KernelFamily::Log, 1.0, 1).unwrap();
        let refs = [
            (0.1, 0.295_366_391_265_125_4),
            (1.0, 2.296_470_964_134_578),
            (10.0, 10.750_921_993_719_25),
            (100.0, 29.324_424_237_733_44),
        ];
        for &(rho, want) in &refs {
            let v = psi_direct(&k, rho, 1e-9).unwrap();
            assert_relative_eq!(v, want, max_relative = 1e-7);
        }
    }

    #[test]
    fn truncated_family_reference_values() {
        let k = builtin_kernel(KernelFamily::Truncated, 1.0, 1).unwrap();
        let refs = [
            (1.0, 1.841_187_252_915_92),
            (10.0, 5.778_578_593_823_867),
            (100.0, 10.364_971_582_018_25),
        ];
        for &(rho, want) in &refs {
            let v = psi_direct(&k, rho, 1e-9).unwrap();
            assert_relative_eq!(v, want, max_relative = 1e-7);
        }
    }

    #[test]
    fn symbol_nonnegative_and_nondecreasing_on_cache() {
        for fam in [KernelFamily::Truncated, KernelFamily::Log] {
            let k = builtin_kernel(fam, 1.0, 1).unwrap();
            let c = CharExponent::with_range(k, 1e-4, 1e4).unwrap();
            let mut prev = 0.0;
            for &rho in &crate::grid::log_grid_per_decade(1e-4, 1e4, 32) {
                let v = c.psi(rho);
                assert!(v >= prev * (1.0 - 1e-12), "psi not nondecreasing at {rho}");
                assert!(v > 0.0);
                prev = v;
            }
        }
    }

    #[test]
    fn frequency_cutoff_inverts_t_psi() {
        let c = cauchy();
        // tψ(Ξ) = 46 with ψ = πρ gives Ξ = 46/(πt)
        for &t in &[0.5, 1.0, 2.0] {
            let xi = c.frequency_cutoff(t, 46.0);
            assert_relative_eq!(xi, 46.0 / (std::f64::consts::PI * t), max_relative = 1e-6);
        }
    }

    #[test]
    fn psi_h_certificate_stable() {
        let c = cauchy();
        let triple = ScaleTriple::new((*c.kernel.profile).clone());
        let grid = crate::grid::log_grid_per_decade(1e-3, 1e3, 8);
        let cert = certify_psi_h(c, &triple, &grid).unwrap();
        // ψ(1/r)/h(r) = (π/r)/(2/r) = π/2 at every grid point
        assert_relative_eq!(
            cert.ratio_min,
            std::f64::consts::FRAC_PI_2,
            max_relative = 1e-6
        );
        assert_relative_eq!(
            cert.ratio_max,
            std::f64::consts::FRAC_PI_2,
            max_relative = 1e-6
        );
        assert!(cert.upper_bound_ok);
    }

    #[test]
    fn psi_two_dimensional_stable() {
        // d=2, α=1: ψ(ρ) = c ρ with c = 2π ∫_0^∞ (1-J_0(u))/u² du = 2π
        let k = builtin_kernel(KernelFamily::Stable, 1.0, 2).unwrap();
        let v1 = psi_direct(&k, 1.0, 1e-8).unwrap();
        let v3 = psi_direct(&k, 3.0, 1e-8).unwrap();
        assert_relative_eq!(v3, 3.0 * v1, max_relative = 1e-6);
        assert_relative_eq!(v1, 2.0 * std::f64::consts::PI, max_relative = 1e-6);
    }
}
