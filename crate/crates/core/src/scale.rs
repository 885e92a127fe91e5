//! Scaling profiles ℓ and the derived scale functions.
//!
//! K(r) = r^{-2} ∫_0^r s ℓ(1/s) ds is the truncated second moment,
//! L(r) = ∫_r^∞ s^{-1} ℓ(1/s) ds the tail mass, h = K + L their sum; h is
//! strictly decreasing, so h^{-1} is well defined and sets the space-time
//! scaling everywhere else in the crate.  θ_a(r,t) = r ∨ (ℓ^{-1}(a/t))^{-1}
//! is the crossover radius used by the heat-kernel bounds for unbounded ℓ.

use crate::error::{Error, Result};
use crate::quad::{self, QuadOpts};
use crate::roots;
use serde::Serialize;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

/// Supported radius range; outside it ℓ is extrapolated by its power
/// envelopes and the profile is flagged.
pub const R_MIN: f64 = 1e-8;
pub const R_MAX: f64 = 1e8;

/// Which case of the boundedness assumption the profile satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// ℓ stays bounded at infinity.
    BoundedEll,
    /// ℓ unbounded with h(r) comparable to ℓ(1/r) near zero.
    UnboundedComparableH,
    /// ℓ unbounded, only the exponential smallness condition holds.
    UnboundedExpCondition,
}

#[derive(Debug, Clone, Copy)]
enum Family {
    Stable { alpha: f64 },
    Truncated { alpha: f64 },
    Log { alpha: f64 },
    Custom,
}

/// A slowly varying intensity profile ℓ together with its scaling exponents
/// (δ1, δ2, δ3, δ4), the two-sided scaling constants (C1, C2) and the
/// declared regime.
pub struct ScalingProfile {
    pub id: String,
    ell_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub delta: (f64, f64, f64, f64),
    pub scale_constants: (f64, f64),
    pub regime: Regime,
    family: Family,
    extrapolated: AtomicBool,
}

impl Clone for ScalingProfile {
    fn clone(&self) -> Self {
        Self {
            id: self.id.clone(),
            ell_fn: self.ell_fn.clone(),
            delta: self.delta,
            scale_constants: self.scale_constants,
            regime: self.regime,
            family: self.family,
            extrapolated: AtomicBool::new(self.extrapolated.load(Ordering::Relaxed)),
        }
    }
}

impl std::fmt::Debug for ScalingProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalingProfile")
            .field("id", &self.id)
            .field("delta", &self.delta)
            .field("regime", &self.regime)
            .finish()
    }
}

impl ScalingProfile {
    /// ℓ(r) = r^α, the stable scale.
    pub fn stable(alpha: f64) -> Self {
        Self {
            id: format!("stable(alpha={alpha})"),
            ell_fn: Arc::new(move |r: f64| r.powf(alpha)),
            delta: (alpha, alpha, alpha, alpha),
            scale_constants: (1.0, 1.0),
            regime: Regime::UnboundedComparableH,
            family: Family::Stable { alpha },
            extrapolated: AtomicBool::new(false),
        }
    }

    /// ℓ(r) = min(r^α, 1): bounded at infinity.
    pub fn truncated(alpha: f64) -> Self {
        Self {
            id: format!("truncated(alpha={alpha})"),
            ell_fn: Arc::new(move |r: f64| r.powf(alpha).min(1.0)),
            delta: (0.0, 0.0, alpha, alpha),
            scale_constants: (1.0, 1.0),
            regime: Regime::BoundedEll,
            family: Family::Truncated { alpha },
            extrapolated: AtomicBool::new(false),
        }
    }

    /// ℓ(r) = log(1 + r^α): unbounded but slowly varying at infinity.
    pub fn log(alpha: f64) -> Self {
        Self {
            id: format!("log(alpha={alpha})"),
            ell_fn: Arc::new(move |r: f64| r.powf(alpha).ln_1p()),
            delta: (0.0, 1.0, alpha, alpha),
            scale_constants: (0.5, 2.0),
            regime: Regime::UnboundedExpCondition,
            family: Family::Log { alpha },
            extrapolated: AtomicBool::new(false),
        }
    }

    /// User-supplied profile; no closed forms, all integrals by quadrature.
    pub fn custom(
        id: &str,
        ell: impl Fn(f64) -> f64 + Send + Sync + 'static,
        delta: (f64, f64, f64, f64),
        scale_constants: (f64, f64),
        regime: Regime,
    ) -> Self {
        Self {
            id: id.to_string(),
            ell_fn: Arc::new(ell),
            delta,
            scale_constants,
            regime,
            family: Family::Custom,
            extrapolated: AtomicBool::new(false),
        }
    }

    /// ℓ(r), extending beyond the supported range by the δ-power envelopes.
    pub fn ell(&self, r: f64) -> f64 {
        assert!(r > 0.0, "ell evaluated at non-positive radius");
        if r > R_MAX {
            self.extrapolated.store(true, Ordering::Relaxed);
            let e = 0.5 * (self.delta.0 + self.delta.1);
            return (self.ell_fn)(R_MAX) * (r / R_MAX).powf(e);
        }
        if r < R_MIN {
            self.extrapolated.store(true, Ordering::Relaxed);
            let e = 0.5 * (self.delta.2 + self.delta.3);
            return (self.ell_fn)(R_MIN) * (r / R_MIN).powf(e);
        }
        (self.ell_fn)(r)
    }

    /// Whether any evaluation left the supported range.
    pub fn extrapolation_used(&self) -> bool {
        self.extrapolated.load(Ordering::Relaxed)
    }
}

fn dilog_series(z: f64) -> f64 {
    // Li2(z) for |z| ≤ 1/2, plain series
    let mut sum = 0.0;
    let mut zp = 1.0;
    for k in 1..80 {
        zp *= z;
        let term = zp / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn dilog_neg(x: f64) -> f64 {
    // Li2(-x) for x ≥ 0: series for small x, Landen's identity
    // Li2(-x) = -Li2(x/(1+x)) - ln²(1+x)/2 for moderate x, and the
    // inversion Li2(-x) = -Li2(-1/x) - π²/6 - ln²(x)/2 beyond 1.
    assert!(x >= 0.0);
    if x > 1.0 {
        return -dilog_neg(1.0 / x) - std::f64::consts::PI.powi(2) / 6.0 - 0.5 * x.ln().powi(2);
    }
    if x > 1.0 / 3.0 {
        return -dilog_series(x / (1.0 + x)) - 0.5 * x.ln_1p().powi(2);
    }
    dilog_series(-x)
}

/// The derived scale functions of a profile.
pub struct ScaleTriple {
    pub profile: Arc<ScalingProfile>,
    ell_star: Option<EllStar>,
}

/// Strictly increasing envelope of ℓ, stored as a log-log polyline.
struct EllStar {
    log_r: Vec<f64>,
    log_v: Vec<f64>,
    /// observed sup of ℓ*/ℓ over the grid
    c3: f64,
}

impl ScaleTriple {
    pub fn new(profile: ScalingProfile) -> Self {
        Self {
            profile: Arc::new(profile),
            ell_star: None,
        }
    }

    /// Builds ℓ* eagerly; required before `ell_star` / `ell_inverse` / `theta`.
    pub fn with_ell_star(profile: ScalingProfile) -> Result<Self> {
        let mut t = Self::new(profile);
        t.build_ell_star()?;
        Ok(t)
    }

    fn build_ell_star(&mut self) -> Result<()> {
        if self.profile.regime == Regime::BoundedEll {
            return Err(Error::UnsupportedRegime(self.profile.id.clone()));
        }
        // running maximum on a log grid, 2^12 points per decade
        let per_decade = 1 << 12;
        let decades = (R_MAX / R_MIN).log10().round() as usize;
        let n = per_decade * decades + 1;
        let mut log_r = Vec::with_capacity(n);
        let mut log_v = Vec::with_capacity(n);
        let (la, lb) = (R_MIN.ln(), R_MAX.ln());
        let mut running = f64::NEG_INFINITY;
        let mut c3: f64 = 1.0;
        let eps_per_decade = 1e-9;
        for i in 0..n {
            let lr = la + (lb - la) * i as f64 / (n - 1) as f64;
            let r = lr.exp();
            let v = self.profile.ell(r);
            running = running.max(v);
            let decades_in = (lr - la) / std::f64::consts::LN_10;
            let star = running * (1.0 + eps_per_decade * decades_in);
            c3 = c3.max(star / v);
            log_r.push(lr);
            log_v.push(star.ln());
        }
        // strictness: perturbation only guarantees non-decreasing + tiny slope
        for i in 1..n {
            if log_v[i] <= log_v[i - 1] {
                log_v[i] = log_v[i - 1] + 1e-15;
            }
        }
        self.ell_star = Some(EllStar { log_r, log_v, c3 });
        Ok(())
    }

    /// K(r) = r^{-2} ∫_0^r s ℓ(1/s) ds.
    pub fn k(&self, r: f64) -> Result<f64> {
        assert!(r > 0.0);
        match self.profile.family {
            Family::Stable { alpha } => Ok(r.powf(-alpha) / (2.0 - alpha)),
            Family::Truncated { alpha } => {
                if r <= 1.0 {
                    Ok(0.5)
                } else {
                    Ok((0.5 + (r.powf(2.0 - alpha) - 1.0) / (2.0 - alpha)) / (r * r))
                }
            }
            Family::Log { alpha } if (alpha - 1.0).abs() < 1e-14 => {
                Ok(0.5 * (1.0 / r).ln_1p() + (r - r.ln_1p()) / (2.0 * r * r))
            }
            _ => {
                let p = self.profile.clone();
                let mut f = move |s: f64| s * p.ell(1.0 / s);
                let v =
                    quad::adaptive(&mut f, 0.0, r, QuadOpts::default(), "K integrand s*l(1/s)")?;
                Ok(v / (r * r))
            }
        }
    }

    /// L(r) = ∫_r^∞ s^{-1} ℓ(1/s) ds, truncated where the δ3-envelope
    /// bounds the remainder below 1e-10 of the partial sum.
    pub fn l(&self, r: f64) -> Result<f64> {
        assert!(r > 0.0);
        match self.profile.family {
            Family::Stable { alpha } => Ok(r.powf(-alpha) / alpha),
            Family::Truncated { alpha } => {
                if r <= 1.0 {
                    Ok((1.0 / r).ln() + 1.0 / alpha)
                } else {
                    Ok(r.powf(-alpha) / alpha)
                }
            }
            Family::Log { alpha } => Ok(-dilog_neg(r.powf(-alpha)) / alpha),
            _ => {
                let p = self.profile.clone();
                let (c1, _) = self.profile.scale_constants;
                let d3 = self.profile.delta.2;
                if d3 <= 0.0 {
                    return Err(Error::DivergentTail(format!(
                        "profile {} has no positive lower scaling exponent near zero",
                        self.profile.id
                    )));
                }
                let mut hi = r.max(1.0) * 4.0;
                let mut partial = quad::adaptive(
                    &mut |s: f64| p.ell(1.0 / s) / s,
                    r,
                    hi,
                    QuadOpts::default(),
                    "L integrand l(1/s)/s",
                )?;
                loop {
                    let remainder_bound = p.ell(1.0 / hi) / (c1 * d3);
                    if remainder_bound < 1e-10 * partial.abs() {
                        return Ok(partial);
                    }
                    if hi > 1e26 * r.max(1.0) {
                        return Err(Error::DivergentTail(format!(
                            "L({r}) tail for profile {}",
                            self.profile.id
                        )));
                    }
                    // small δ3 pushes the certified cutoff very far out;
                    // grow blocks faster once deep in the tail
                    let growth = if hi > 1e4 * r.max(1.0) { 64.0 } else { 4.0 };
                    let next = hi * growth;
                    partial += quad::adaptive_scaled(
                        &mut |s: f64| p.ell(1.0 / s) / s,
                        hi,
                        next,
                        QuadOpts::default(),
                        partial.abs(),
                        "L tail block",
                    )?;
                    hi = next;
                }
            }
        }
    }

    /// h(r) = K(r) + L(r).
    pub fn h(&self, r: f64) -> Result<f64> {
        Ok(self.k(r)? + self.l(r)?)
    }

    /// Inverse of the strictly decreasing h on the supported range.
    pub fn h_inverse(&self, u: f64) -> Result<f64> {
        let h_lo = self.h(R_MAX)?;
        let h_hi = self.h(R_MIN)?;
        if !(u > h_lo && u < h_hi) {
            return Err(Error::RangeError {
                what: format!("h for profile {}", self.profile.id),
                value: u,
                lo: h_lo,
                hi: h_hi,
            });
        }
        let mut f = |r: f64| self.h(r).unwrap_or(f64::NAN);
        roots::bisect_monotone(&mut f, R_MIN, R_MAX, u, 1e-12, "h inverse")
    }

    /// ℓ*(r): strictly increasing envelope (regime (ii) only).
    pub fn ell_star(&self, r: f64) -> Result<f64> {
        let es = self
            .ell_star
            .as_ref()
            .ok_or_else(|| Error::UnsupportedRegime(self.profile.id.clone()))?;
        Ok(es.eval(r.clamp(R_MIN, R_MAX)))
    }

    /// Inverse of ℓ*.
    pub fn ell_inverse(&self, u: f64) -> Result<f64> {
        let es = self
            .ell_star
            .as_ref()
            .ok_or_else(|| Error::UnsupportedRegime(self.profile.id.clone()))?;
        es.invert(u, &self.profile.id)
    }

    /// Observed grid constant C3 with ℓ* ≤ C3 ℓ.
    pub fn c3(&self) -> Result<f64> {
        Ok(self
            .ell_star
            .as_ref()
            .ok_or_else(|| Error::UnsupportedRegime(self.profile.id.clone()))?
            .c3)
    }

    /// θ_a(r, t) = r ∨ (ℓ^{-1}(a/t))^{-1}.
    pub fn theta(&self, a: f64, r: f64, t: f64) -> Result<f64> {
        assert!(a > 0.0 && t > 0.0 && r >= 0.0);
        let li = self.ell_inverse(a / t)?;
        Ok(r.max(1.0 / li))
    }

    /// Attainable range of ℓ* on the supported radius grid.
    pub fn ell_star_range(&self) -> Result<(f64, f64)> {
        let es = self
            .ell_star
            .as_ref()
            .ok_or_else(|| Error::UnsupportedRegime(self.profile.id.clone()))?;
        Ok((es.log_v[0].exp(), es.log_v.last().unwrap().exp()))
    }

    /// θ with the ℓ*-argument clamped into its attainable range: the
    /// instrumentation variant used by the bound tables, where a/t can
    /// leave the grid while the envelope stays well defined.
    pub fn theta_clamped(&self, a: f64, r: f64, t: f64) -> Result<f64> {
        let (lo, hi) = self.ell_star_range()?;
        let u = (a / t).clamp(lo * (1.0 + 1e-12), hi * (1.0 - 1e-12));
        let li = self.ell_inverse(u)?;
        Ok(r.max(1.0 / li))
    }
}

impl EllStar {
    fn eval(&self, r: f64) -> f64 {
        let lr = r.ln();
        let i = match self.log_r.binary_search_by(|v| v.partial_cmp(&lr).unwrap()) {
            Ok(i) => i.min(self.log_r.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.log_r.len() - 2),
        };
        let t = (lr - self.log_r[i]) / (self.log_r[i + 1] - self.log_r[i]);
        (self.log_v[i] * (1.0 - t) + self.log_v[i + 1] * t).exp()
    }

    fn invert(&self, u: f64, id: &str) -> Result<f64> {
        let lu = u.ln();
        let first = self.log_v[0];
        let last = *self.log_v.last().unwrap();
        if !(lu >= first && lu <= last) {
            return Err(Error::RangeError {
                what: format!("ell_star for profile {id}"),
                value: u,
                lo: first.exp(),
                hi: last.exp(),
            });
        }
        let i = match self.log_v.binary_search_by(|v| v.partial_cmp(&lu).unwrap()) {
            Ok(i) => i.min(self.log_v.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.log_v.len() - 2),
        };
        let t = (lu - self.log_v[i]) / (self.log_v[i + 1] - self.log_v[i]);
        Ok((self.log_r[i] * (1.0 - t) + self.log_r[i + 1] * t).exp())
    }
}

/// Outcome of the numerical regime classification.  Desk-scale evidence,
/// not a proof.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeCertificate {
    pub profile: String,
    pub regime: &'static str,
    pub declared: Regime,
    pub agrees_with_declared: bool,
    /// sup of ℓ over [1, 1e6]
    pub ell_sup_large: f64,
    /// ℓ(1e6)/ℓ(1e4), ≈ 1 for bounded profiles
    pub ell_growth_tail: f64,
    /// range of h(r)/ℓ(1/r) over r ∈ [1e-6, 1]
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// growth of that ratio from r = 1e-3 down to r = 1e-6
    pub ratio_growth: f64,
    /// (a, sup_r h e^{-a h/ℓ(1/r)}, value at the small-r endpoint)
    pub exp_sup: Vec<(f64, f64, f64)>,
    pub grid_points: usize,
    pub max_ratio: f64,
}

/// Numerically classifies which regime a profile satisfies.
pub fn classify_regime(triple: &ScaleTriple) -> RegimeCertificate {
    let p = &triple.profile;
    let grid_large = crate::grid::log_grid_per_decade(1.0, 1e6, 16);
    let mut ell_sup: f64 = 0.0;
    for &r in &grid_large {
        ell_sup = ell_sup.max(p.ell(r));
    }
    let growth_tail = p.ell(1e6) / p.ell(1e4);

    let grid_small = crate::grid::log_grid_per_decade(1e-6, 1.0, 16);
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max: f64 = 0.0;
    let ratio_at = |r: f64| -> f64 { triple.h(r).map(|h| h / p.ell(1.0 / r)).unwrap_or(f64::NAN) };
    for &r in &grid_small {
        let q = ratio_at(r);
        ratio_min = ratio_min.min(q);
        ratio_max = ratio_max.max(q);
    }
    let ratio_growth = ratio_at(1e-6) / ratio_at(1e-3);

    let mut exp_sup = Vec::new();
    for &a in &[1.0, 4.0, 16.0] {
        let mut sup: f64 = 0.0;
        let mut endpoint = 0.0;
        for &r in &grid_small {
            let h = triple.h(r).unwrap_or(f64::NAN);
            let v = h * (-a * h / p.ell(1.0 / r)).exp();
            sup = sup.max(v);
            if r == grid_small[0] {
                endpoint = v;
            }
        }
        exp_sup.push((a, sup, endpoint));
    }

    let regime = if growth_tail < 1.02 {
        "bounded"
    } else if ratio_growth < 1.25 {
        "unbounded_comparable_h"
    } else {
        // the exponential test: sup must be attained away from the
        // small-r endpoint, i.e. h e^{-a h/ℓ} decays as r ↓ 0
        let decays = exp_sup.iter().all(|&(_, sup, end)| end < 0.5 * sup);
        if decays {
            "unbounded_exp_condition"
        } else {
            "inconclusive"
        }
    };
    let declared_str = match p.regime {
        Regime::BoundedEll => "bounded",
        Regime::UnboundedComparableH => "unbounded_comparable_h",
        Regime::UnboundedExpCondition => "unbounded_exp_condition",
    };
    RegimeCertificate {
        profile: p.id.clone(),
        regime,
        declared: p.regime,
        agrees_with_declared: regime == declared_str,
        ell_sup_large: ell_sup,
        ell_growth_tail: growth_tail,
        ratio_min,
        ratio_max,
        ratio_growth,
        exp_sup,
        grid_points: grid_small.len() + grid_large.len(),
        max_ratio: ratio_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stable_closed_forms() {
        let t = ScaleTriple::new(ScalingProfile::stable(1.0));
        assert_relative_eq!(t.k(2.0).unwrap(), 0.5, epsilon = 1e-14);
        assert_relative_eq!(t.l(2.0).unwrap(), 0.5, epsilon = 1e-14);
        assert_relative_eq!(t.l(1.0).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(t.h(1.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(t.h(4.0).unwrap(), 0.5, epsilon = 1e-14);
        let t2 = ScaleTriple::new(ScalingProfile::stable(0.5));
        assert_relative_eq!(t2.k(1.0).unwrap(), 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        // run the generic quadrature path against each closed form
        for prof in [
            ScalingProfile::stable(0.7),
            ScalingProfile::truncated(0.5),
            ScalingProfile::truncated(1.3),
            ScalingProfile::log(1.0),
        ] {
            let closed = ScaleTriple::new(prof.clone());
            let (delta, consts, regime) = (prof.delta, prof.scale_constants, prof.regime);
            let generic = ScaleTriple::new(ScalingProfile::custom(
                "generic",
                move |r| prof.ell(r),
                delta,
                consts,
                regime,
            ));
            for &r in &[0.03, 0.4, 1.0, 2.5, 40.0] {
                assert_relative_eq!(
                    closed.k(r).unwrap(),
                    generic.k(r).unwrap(),
                    max_relative = 1e-7
                );
                assert_relative_eq!(
                    closed.l(r).unwrap(),
                    generic.l(r).unwrap(),
                    max_relative = 1e-7
                );
            }
        }
    }

    #[test]
    fn log_family_golden_values() {
        // K(1) = 1/2 exactly; L(1) = π²/12 (dilogarithm at -1)
        let t = ScaleTriple::new(ScalingProfile::log(1.0));
        assert_relative_eq!(t.k(1.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(
            t.l(1.0).unwrap(),
            std::f64::consts::PI.powi(2) / 12.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            t.h(1.0).unwrap(),
            0.5 + std::f64::consts::PI.powi(2) / 12.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn truncated_sqrt_tail_value() {
        // ℓ = min(√r, 1): L(1/4) = 2 + 2 ln 2
        let t = ScaleTriple::new(ScalingProfile::truncated(0.5));
        assert_relative_eq!(
            t.l(0.25).unwrap(),
            2.0 + 2.0 * 2f64.ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn h_inverse_round_trips() {
        for prof in [
            ScalingProfile::stable(1.0),
            ScalingProfile::truncated(0.5),
            ScalingProfile::log(1.0),
        ] {
            let t = ScaleTriple::new(prof);
            // ℓ(r) = r: h(r) = 2/r so h^{-1}(3) = 2/3
            for &r in &[0.05, 1.0, 5.0] {
                let u = t.h(r).unwrap();
                let back = t.h_inverse(u).unwrap();
                assert_relative_eq!(back, r, max_relative = 1e-9);
                let forward = t.h(back).unwrap();
                assert_relative_eq!(forward, u, max_relative = 1e-10);
            }
        }
        let t = ScaleTriple::new(ScalingProfile::stable(1.0));
        assert_relative_eq!(t.h_inverse(3.0).unwrap(), 2.0 / 3.0, max_relative = 1e-10);
    }

    #[test]
    fn h_inverse_out_of_range_reports_bounds() {
        let t = ScaleTriple::new(ScalingProfile::stable(1.0));
        let e = t.h_inverse(1e300).unwrap_err();
        match e {
            Error::RangeError { lo, hi, .. } => assert!(lo < hi),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ell_star_monotone_input_is_identity() {
        let t = ScaleTriple::with_ell_star(ScalingProfile::stable(1.0)).unwrap();
        for &r in &[1e-4, 0.3, 1.0, 47.0, 1e6] {
            assert_relative_eq!(t.ell_star(r).unwrap(), r, max_relative = 1e-6);
            assert_relative_eq!(t.ell_inverse(r).unwrap(), r, max_relative = 1e-6);
        }
        let tl = ScaleTriple::with_ell_star(ScalingProfile::log(1.0)).unwrap();
        for &r in &[0.01, 1.0, 100.0] {
            assert_relative_eq!(tl.ell_star(r).unwrap(), r.ln_1p(), max_relative = 1e-6);
        }
        assert!(tl.c3().unwrap() < 1.0 + 1e-6);
    }

    #[test]
    fn ell_star_round_trip_tight() {
        let t = ScaleTriple::with_ell_star(ScalingProfile::log(1.0)).unwrap();
        for &u in &[1e-5, 1e-2, 0.5, 3.0, 10.0] {
            let r = t.ell_inverse(u).unwrap();
            assert_relative_eq!(t.ell_star(r).unwrap(), u, max_relative = 1e-9);
        }
    }

    #[test]
    fn ell_star_envelope_dominates_nonmonotone_profile() {
        // ℓ(r) = √r (2 + sin log(1+r)) is not monotone; envelope must
        // dominate it on the grid and stay within a modest constant
        let prof = ScalingProfile::custom(
            "wobble",
            |r: f64| r.sqrt() * (2.0 + (r.ln_1p()).sin()),
            (0.4, 0.6, 0.4, 0.6),
            (0.2, 5.0),
            Regime::UnboundedComparableH,
        );
        let t = ScaleTriple::with_ell_star(prof).unwrap();
        let grid = crate::grid::log_grid_per_decade(1e-6, 1e6, 32);
        let mut prev = 0.0;
        for &r in &grid {
            let star = t.ell_star(r).unwrap();
            let raw = t.profile.ell(r);
            assert!(star >= raw * (1.0 - 1e-9), "envelope below profile at {r}");
            assert!(star > prev, "envelope not strictly increasing at {r}");
            prev = star;
        }
        assert!(t.c3().unwrap() < 3.5);
    }

    #[test]
    fn ell_star_rejects_bounded_regime() {
        assert!(matches!(
            ScaleTriple::with_ell_star(ScalingProfile::truncated(0.5)),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn theta_values() {
        let t = ScaleTriple::with_ell_star(ScalingProfile::stable(1.0)).unwrap();
        // ℓ(r) = r, a = 1, t = 1/2: (ℓ^{-1}(2))^{-1} = 1/2
        assert_relative_eq!(t.theta(1.0, 0.0, 0.5).unwrap(), 0.5, max_relative = 1e-6);
        // r above threshold wins the max
        assert_relative_eq!(t.theta(1.0, 7.0, 0.5).unwrap(), 7.0, max_relative = 1e-12);
        // log profile: a = 2, t = 1 gives (e² - 1)^{-1}
        let tl = ScaleTriple::with_ell_star(ScalingProfile::log(1.0)).unwrap();
        assert_relative_eq!(
            tl.theta(2.0, 0.0, 1.0).unwrap(),
            1.0 / (2f64.exp() - 1.0),
            max_relative = 1e-6
        );
    }

    #[test]
    fn sampled_scaling_ratio_bounds() {
        // Assumption-style two-sided ratio test on both log grids
        for prof in [
            ScalingProfile::stable(1.0),
            ScalingProfile::truncated(0.5),
            ScalingProfile::log(1.0),
        ] {
            let (c1, c2) = prof.scale_constants;
            let (d1, d2, d3, d4) = prof.delta;
            let big = crate::grid::log_grid_per_decade(1.0, 1e3, 8);
            for (i, &r) in big.iter().enumerate() {
                for &rr in &big[i..] {
                    let q = prof.ell(rr) / prof.ell(r);
                    let x = rr / r;
                    assert!(
                        q >= c1 * x.powf(d1) * (1.0 - 1e-9),
                        "{} lower large",
                        prof.id
                    );
                    assert!(
                        q <= c2 * x.powf(d2) * (1.0 + 1e-9),
                        "{} upper large",
                        prof.id
                    );
                }
            }
            let small = crate::grid::log_grid_per_decade(1e-3, 1.0, 8);
            for (i, &r) in small.iter().enumerate() {
                for &rr in &small[i..] {
                    let q = prof.ell(rr) / prof.ell(r);
                    let x = rr / r;
                    assert!(
                        q >= c1 * x.powf(d3) * (1.0 - 1e-9),
                        "{} lower small",
                        prof.id
                    );
                    assert!(
                        q <= c2 * x.powf(d4) * (1.0 + 1e-9),
                        "{} upper small",
                        prof.id
                    );
                }
            }
        }
    }

    #[test]
    fn h_doubling_and_k_halving_inequalities() {
        for prof in [
            ScalingProfile::stable(1.0),
            ScalingProfile::truncated(0.5),
            ScalingProfile::log(1.0),
        ] {
            let t = ScaleTriple::new(prof);
            let grid = crate::grid::log_grid_per_decade(1e-3, 1e3, 6);
            for &r in &grid {
                // K(r/2) ≤ 4 K(r)
                assert!(t.k(r / 2.0).unwrap() <= 4.0 * t.k(r).unwrap() * (1.0 + 1e-9));
                for &c in &[0.1, 0.5, 0.9] {
                    // kappa ratio is 1 for these exact-profile kernels
                    let lhs = t.h(c * r).unwrap();
                    let rhs = t.h(r).unwrap() / (c * c);
                    assert!(lhs <= rhs * (1.0 + 1e-9), "{} h-doubling", t.profile.id);
                }
            }
        }
    }

    #[test]
    fn l_between_h_and_constant_multiple_near_zero() {
        // L ≤ h ≤ c1 L on r ≤ 1 with a finite observed c1
        for prof in [
            ScalingProfile::stable(1.0),
            ScalingProfile::truncated(0.5),
            ScalingProfile::log(1.0),
        ] {
            let t = ScaleTriple::new(prof);
            let mut c1_obs: f64 = 0.0;
            for &r in &crate::grid::log_grid_per_decade(1e-6, 1.0, 8) {
                let l = t.l(r).unwrap();
                let h = t.h(r).unwrap();
                assert!(l <= h * (1.0 + 1e-12));
                c1_obs = c1_obs.max(h / l);
            }
            assert!(c1_obs.is_finite() && c1_obs < 10.0, "{}", t.profile.id);
        }
    }

    #[test]
    fn psi_h_k_ell_comparable_for_large_r() {
        for prof in [
            ScalingProfile::stable(1.0),
            ScalingProfile::truncated(0.5),
            ScalingProfile::log(1.0),
        ] {
            let t = ScaleTriple::new(prof);
            for &r in &crate::grid::log_grid_per_decade(1.0, 1e3, 4) {
                let h = t.h(r).unwrap();
                let k = t.k(r).unwrap();
                let e = t.profile.ell(1.0 / r);
                assert!(h / k > 0.9 && h / k < 20.0);
                assert!(k / e > 0.05 && k / e < 20.0);
            }
        }
    }

    #[test]
    fn regime_classification_matches_examples() {
        let st = ScaleTriple::new(ScalingProfile::stable(1.0));
        let c = classify_regime(&st);
        assert_eq!(c.regime, "unbounded_comparable_h");
        assert_relative_eq!(c.ratio_min, 2.0, max_relative = 1e-6);
        assert_relative_eq!(c.ratio_max, 2.0, max_relative = 1e-6);

        let tr = ScaleTriple::new(ScalingProfile::truncated(0.5));
        assert_eq!(classify_regime(&tr).regime, "bounded");

        let lg = ScaleTriple::new(ScalingProfile::log(0.5));
        let cl = classify_regime(&lg);
        assert_eq!(cl.regime, "unbounded_exp_condition");
        assert!(cl.agrees_with_declared);
    }

    #[test]
    fn extrapolation_flag_set_outside_range() {
        let p = ScalingProfile::stable(1.0);
        assert!(!p.extrapolation_used());
        let _ = p.ell(1e9);
        assert!(p.extrapolation_used());
    }
}
