//! Ratio tables for the two-sided heat-kernel estimates: each bound of the
//! regularity theory is instrumented as observed-value / envelope over a
//! (t,x) grid.  The theory's constants are non-explicit, so certification
//! asserts finiteness and stability of the observed constants under grid
//! refinement, never specific values.

use crate::error::Result;
use crate::heat::HeatKernelField;
use crate::scale::{Regime, ScaleTriple};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Shared constants entering the envelopes: the observed C0 from the ψ–h
/// comparison, the observed c1 from h ≤ c1 L near zero, and the recorded
/// C3 from the ℓ* construction (regime (ii) only).
pub struct BoundContext {
    pub field: Arc<HeatKernelField>,
    pub triple: Arc<ScaleTriple>,
    pub c0: f64,
    pub c1: f64,
    pub c3: f64,
}

impl BoundContext {
    pub fn new(field: Arc<HeatKernelField>, triple: Arc<ScaleTriple>) -> Result<Self> {
        let grid = crate::grid::log_grid_per_decade(1e-3, 1e3, 8);
        let mut c0 = f64::INFINITY;
        for &r in &grid {
            let ratio = field.exponent.psi(1.0 / r) / triple.h(r)?;
            c0 = c0.min(ratio);
        }
        let mut c1: f64 = 1.0;
        for &r in &crate::grid::log_grid_per_decade(1e-6, 1.0, 8) {
            c1 = c1.max(triple.h(r)? / triple.l(r)?);
        }
        let c3 = if triple.profile.regime == Regime::BoundedEll {
            1.0
        } else {
            triple.c3()?
        };
        Ok(Self {
            field,
            triple,
            c0,
            c1,
            c3,
        })
    }

    /// a_d = 2 d C3 / C0, the base of the a-parameter sweep.
    pub fn a_d(&self) -> f64 {
        2.0 * self.field.d as f64 * self.c3 / self.c0
    }

    /// exponential rate C0/(4 c1 a) used in the upper envelopes.
    pub fn b_hat(&self, a: f64) -> f64 {
        self.c0 / (4.0 * self.c1 * a)
    }

    pub fn regime(&self) -> Regime {
        self.triple.profile.regime
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub t: f64,
    pub x: f64,
    pub value: f64,
    pub envelope: f64,
    pub ratio: f64,
}

/// One instrumented bound over a (t,x) grid.
#[derive(Debug, Clone, Serialize)]
pub struct BoundTable {
    pub name: String,
    pub kernel: String,
    pub params: String,
    pub sup_ratio: f64,
    pub inf_ratio: f64,
    pub all_finite: bool,
    pub rows: Vec<BoundRow>,
}

fn assemble(
    name: &str,
    kernel: &str,
    params: String,
    pts: &[(f64, f64)],
    eval: impl Fn(f64, f64) -> Result<(f64, f64)> + Sync,
) -> Result<BoundTable> {
    let rows: Vec<BoundRow> = pts
        .par_iter()
        .map(|&(t, x)| {
            let (value, envelope) = eval(t, x)?;
            Ok(BoundRow {
                t,
                x,
                value,
                envelope,
                ratio: value / envelope,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sup = rows.iter().fold(0.0f64, |a, r| a.max(r.ratio));
    let inf = rows.iter().fold(f64::INFINITY, |a, r| a.min(r.ratio));
    let finite = rows.iter().all(|r| r.ratio.is_finite());
    Ok(BoundTable {
        name: name.into(),
        kernel: kernel.into(),
        params,
        sup_ratio: sup,
        inf_ratio: inf,
        all_finite: finite,
        rows,
    })
}

fn mesh(ts: &[f64], xs: &[f64]) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(ts.len() * xs.len());
    for &t in ts {
        for &x in xs {
            pts.push((t, x));
        }
    }
    pts
}

impl BoundContext {
    /// Off-diagonal upper bound p(t,x) ≤ C t K(|x|)/|x|^d.
    pub fn offdiag_table(&self, ts: &[f64], xs: &[f64]) -> Result<BoundTable> {
        let d = self.field.d as i32;
        assemble(
            "offdiag_upper",
            &self.field.exponent.kernel.id,
            String::new(),
            &mesh(ts, xs),
            |t, x| {
                let v = self.field.density(t, x)?;
                let env = t * self.triple.k(x)? / x.powi(d);
                Ok((v, env))
            },
        )
    }

    /// Two-sided θ-window: p(t,x) against
    /// t K(θ_a)/θ_a^d · exp(-b̂ t h(θ_a)) for one a of the sweep.
    pub fn theta_window_table(&self, a: f64, ts: &[f64], xs: &[f64]) -> Result<BoundTable> {
        let d = self.field.d as i32;
        let b = self.b_hat(a);
        assemble(
            "theta_window",
            &self.field.exponent.kernel.id,
            format!("a={a:.4e},b={b:.4e}"),
            &mesh(ts, xs),
            |t, x| {
                let v = self.field.density(t, x)?;
                let th = self.triple.theta_clamped(a, x, t)?;
                let env = t * self.triple.k(th)? / th.powi(d) * (-b * t * self.triple.h(th)?).exp();
                Ok((v, env))
            },
        )
    }

    /// Large-time bound p ≤ C [ (h^{-1}(1/t))^{-d} ∧ t K(|x|)/|x|^d ].
    pub fn largetime_table(&self, ts: &[f64], xs: &[f64]) -> Result<BoundTable> {
        let d = self.field.d as i32;
        assemble(
            "largetime_upper",
            &self.field.exponent.kernel.id,
            String::new(),
            &mesh(ts, xs),
            |t, x| {
                let v = self.field.density(t, x)?;
                let hi = self.triple.h_inverse(1.0 / t)?;
                let env = (hi.powi(-d)).min(t * self.triple.k(x)? / x.powi(d));
                Ok((v, env))
            },
        )
    }

    /// Derivative bound |D^m p| ≤ C t K(θ_a)/θ_a^{d+m} e^{-C^{-1} t h(θ_a)}.
    pub fn derivative_theta_table(
        &self,
        m: usize,
        a: f64,
        ts: &[f64],
        xs: &[f64],
    ) -> Result<BoundTable> {
        self.lkdm_theta_table(0, m, a, ts, xs)
    }

    /// |𝓛^k D^m p| ≤ C t^{1-k} K(θ_a)/θ_a^{d+m} e^{-C^{-1} t h(θ_a)}
    /// (unbounded-ℓ regimes).
    pub fn lkdm_theta_table(
        &self,
        k: usize,
        m: usize,
        a: f64,
        ts: &[f64],
        xs: &[f64],
    ) -> Result<BoundTable> {
        let d = self.field.d as i32;
        let b = self.b_hat(a);
        assemble(
            "lkdm_theta",
            &self.field.exponent.kernel.id,
            format!("k={k},m={m},a={a:.4e},b={b:.4e}"),
            &mesh(ts, xs),
            |t, x| {
                let v = self.field.applied_power_derivative(k, m, t, x)?.abs();
                let th = self.triple.theta_clamped(a, x, t)?;
                let env = t.powi(1 - k as i32) * self.triple.k(th)? / th.powi(d + m as i32)
                    * (-b * t * self.triple.h(th)?).exp();
                Ok((v, env))
            },
        )
    }

    /// |𝓛^k D^m p| ≤ C t^{1-k} K(|x|)/|x|^{d+m} (bounded-ℓ regime; the
    /// e^{-Cth} factor is dropped, which only loosens the envelope).
    pub fn lkdm_plain_table(
        &self,
        k: usize,
        m: usize,
        ts: &[f64],
        xs: &[f64],
    ) -> Result<BoundTable> {
        let d = self.field.d as i32;
        assemble(
            "lkdm_plain",
            &self.field.exponent.kernel.id,
            format!("k={k},m={m}"),
            &mesh(ts, xs),
            |t, x| {
                let v = self.field.applied_power_derivative(k, m, t, x)?.abs();
                let env = t.powi(1 - k as i32) * self.triple.k(x)? / x.powi(d + m as i32);
                Ok((v, env))
            },
        )
    }

    /// Large-time |𝓛^k D^m p| ≤ C [ t^{-k} (h^{-1}(1/t))^{-d-m} 1_{th(x)≥1}
    /// + t^{1-k} K(|x|)/|x|^{d+m} 1_{th(x)≤1} ].
    pub fn lkdm_largetime_table(
        &self,
        k: usize,
        m: usize,
        ts: &[f64],
        xs: &[f64],
    ) -> Result<BoundTable> {
        let d = self.field.d as i32;
        assemble(
            "lkdm_largetime",
            &self.field.exponent.kernel.id,
            format!("k={k},m={m}"),
            &mesh(ts, xs),
            |t, x| {
                let v = self.field.applied_power_derivative(k, m, t, x)?.abs();
                let env = if t * self.triple.h(x)? >= 1.0 {
                    t.powi(-(k as i32)) * self.triple.h_inverse(1.0 / t)?.powi(-d - m as i32)
                } else {
                    t.powi(1 - k as i32) * self.triple.k(x)? / x.powi(d + m as i32)
                };
                Ok((v, env))
            },
        )
    }
}

/// Refinement-stability of a table's observed constant: the sup ratio on
/// the doubled grid must sit within the drift budget of the coarse one.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub name: String,
    pub sup_coarse: f64,
    pub sup_fine: f64,
    pub drift: f64,
    pub all_finite: bool,
    pub within_budget: bool,
}

/// Inserts geometric midpoints, doubling the grid density.
pub fn refine_log_grid(g: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * g.len() - 1);
    for i in 0..g.len() - 1 {
        out.push(g[i]);
        out.push((g[i] * g[i + 1]).sqrt());
    }
    out.push(*g.last().unwrap());
    out
}

pub fn stability(
    name: &str,
    budget: f64,
    table: impl Fn(&[f64], &[f64]) -> Result<BoundTable>,
    ts: &[f64],
    xs: &[f64],
) -> Result<StabilityReport> {
    let coarse = table(ts, xs)?;
    let fine = table(&refine_log_grid(ts), &refine_log_grid(xs))?;
    let drift = (fine.sup_ratio - coarse.sup_ratio).abs() / coarse.sup_ratio.abs().max(1e-300);
    Ok(StabilityReport {
        name: name.into(),
        sup_coarse: coarse.sup_ratio,
        sup_fine: fine.sup_ratio,
        drift,
        all_finite: coarse.all_finite && fine.all_finite,
        within_budget: drift < budget,
    })
}
