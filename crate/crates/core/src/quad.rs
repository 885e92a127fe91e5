//! Quadrature engines: adaptive Gauss–Kronrod bisection, fixed Gauss–Legendre
//! panels, semi-infinite integrals by rational substitution, and the two tail
//! summators (oscillatory with iterated averaging, monotone with geometric
//! completion) that the Fourier-inversion code relies on.

use crate::error::{Error, Result};

/// 15-point Kronrod abscissae (positive half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// 7-point Gauss weights embedded in the Kronrod rule.
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 15(7) pass; returns (integral, error estimate).
pub fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];
    let mut result_k = fc * WGK[7];
    let mut result_g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        result_k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            result_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = result_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let mut err = ((result_k - result_g) * half).abs();
    let scale_asc = res_asc * half.abs();
    if scale_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / scale_asc).powf(1.5);
        if scale < 1.0 {
            err = scale_asc * scale;
        }
    }
    (result_k * half, err)
}

/// Tolerances for the adaptive scheme.  Defaults follow the project-wide
/// choice: relative 1e-8, absolute floor 1e-14, depth 60.
#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_depth: 60,
        }
    }
}

impl QuadOpts {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

struct AdaptState<'a, F> {
    f: &'a mut F,
    opts: QuadOpts,
    context: &'a str,
    evals: usize,
}

fn adaptive_rec<F: FnMut(f64) -> f64>(
    st: &mut AdaptState<F>,
    a: f64,
    b: f64,
    whole: f64,
    err: f64,
    depth: usize,
    scale_hint: f64,
) -> Result<f64> {
    let tol = (st.opts.rel_tol * whole.abs().max(scale_hint)).max(st.opts.abs_tol);
    if err <= tol || b - a < f64::EPSILON * a.abs().max(1.0) {
        return Ok(whole);
    }
    if depth >= st.opts.max_depth {
        return Err(Error::QuadratureNonConvergent {
            context: st.context.to_string(),
            lo: a,
            hi: b,
        });
    }
    let mid = 0.5 * (a + b);
    let (il, el) = kronrod15(st.f, a, mid);
    let (ir, er) = kronrod15(st.f, mid, b);
    st.evals += 30;
    let left = adaptive_rec(st, a, mid, il, el, depth + 1, scale_hint)?;
    let right = adaptive_rec(st, mid, b, ir, er, depth + 1, scale_hint)?;
    Ok(left + right)
}

/// Adaptive bisection with the embedded G7/K15 pair.
pub fn adaptive<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    opts: QuadOpts,
    context: &str,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (i0, e0) = kronrod15(f, a, b);
    let mut st = AdaptState {
        f,
        opts,
        context,
        evals: 15,
    };
    adaptive_rec(&mut st, a, b, i0, e0, 0, 0.0)
}

/// Adaptive integration where convergence is judged against an external
/// magnitude (useful when a sub-interval is a small piece of a larger sum).
pub fn adaptive_scaled<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    opts: QuadOpts,
    scale_hint: f64,
    context: &str,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (i0, e0) = kronrod15(f, a, b);
    let mut st = AdaptState {
        f,
        opts,
        context,
        evals: 15,
    };
    adaptive_rec(&mut st, a, b, i0, e0, 0, scale_hint)
}

/// ∫_a^∞ f, via v ↦ a + v/(1-v) onto (0,1).  The integrand must decay fast
/// enough for the transformed integrand to be integrable at v = 1.
pub fn adaptive_to_inf<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    opts: QuadOpts,
    context: &str,
) -> Result<f64> {
    let mut g = |v: f64| {
        let omv = 1.0 - v;
        let s = a + v / omv;
        f(s) / (omv * omv)
    };
    adaptive(&mut g, 0.0, 1.0, opts, context)
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed-order Gauss–Legendre on [a, b]; no error estimate.  Used by oracles
/// and by the panel summators.
pub fn fixed_gl<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    nodes: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (xi, wi) in nodes.0.iter().zip(nodes.1.iter()) {
        acc += wi * f(c + h * xi);
    }
    acc * h
}

/// Outcome of a tail summation: value plus a certified error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Tail {
    pub value: f64,
    pub error: f64,
}

/// Sums ∫_start^∞ of an oscillatory integrand by half-period panels with
/// iterated averaging (Euler transformation) of the partial sums.
///
/// `half_period` must match the integrand's asymptotic sign-change spacing;
/// panels then alternate and the averaging table converges geometrically even
/// when the raw panel magnitudes decay as slowly as k^(-ε).
pub fn osc_tail<F: FnMut(f64) -> f64>(
    f: &mut F,
    start: f64,
    half_period: f64,
    tol_abs: f64,
    max_panels: usize,
    context: &str,
) -> Result<Tail> {
    const TABLE: usize = 30;
    let gl = gauss_legendre(12);
    let mut partial = 0.0f64;
    let mut column: Vec<f64> = Vec::with_capacity(TABLE);
    let mut best = f64::NAN;
    let mut best_err = f64::INFINITY;
    for k in 0..max_panels {
        let a = start + k as f64 * half_period;
        let b = a + half_period;
        let panel = fixed_gl(f, a, b, &gl);
        partial += panel;
        // push the new partial sum through the averaging triangle
        if column.len() == TABLE {
            column.remove(0);
        }
        column.push(partial);
        if column.len() >= 3 {
            let mut row = column.clone();
            let mut prev_last = *row.last().unwrap();
            let mut err = f64::INFINITY;
            while row.len() >= 2 {
                for i in 0..row.len() - 1 {
                    row[i] = 0.5 * (row[i] + row[i + 1]);
                }
                row.pop();
                let last = *row.last().unwrap();
                let step = (last - prev_last).abs();
                if step < err {
                    err = step;
                    best = last;
                    best_err = err;
                }
                prev_last = last;
            }
            if best_err < tol_abs && k >= 6 {
                return Ok(Tail {
                    value: best,
                    error: best_err,
                });
            }
        }
    }
    if best_err.is_finite() && best_err < 16.0 * tol_abs {
        // close enough to report with an honest (larger) error bar
        return Ok(Tail {
            value: best,
            error: best_err,
        });
    }
    Err(Error::QuadratureNonConvergent {
        context: format!("oscillatory tail: {context}"),
        lo: start,
        hi: start + max_panels as f64 * half_period,
    })
}

/// Sums ∫_start^∞ of a positive, eventually power-law integrand by doubling
/// blocks with geometric completion of the remainder.
///
/// Detects divergence (block ratio not decaying) and reports it, which is how
/// "t too small" inversions surface.
pub fn power_tail<F: FnMut(f64) -> f64>(
    f: &mut F,
    start: f64,
    tol_abs: f64,
    context: &str,
) -> Result<Tail> {
    let gl = gauss_legendre(16);
    let mut lo = start;
    let mut sum = 0.0;
    let mut prev_block: Option<f64> = None;
    for _ in 0..220 {
        let hi = lo * 2.0;
        let mut block = 0.0;
        // split each doubling block in two for accuracy
        block += fixed_gl(f, lo, 0.5 * (lo + hi), &gl);
        block += fixed_gl(f, 0.5 * (lo + hi), hi, &gl);
        sum += block;
        if let Some(pb) = prev_block {
            if pb != 0.0 {
                let q = block / pb;
                if q < 0.9 {
                    let remainder = block * q / (1.0 - q);
                    if remainder.abs() < tol_abs || remainder.abs() < 1e-15 * sum.abs() {
                        return Ok(Tail {
                            value: sum + remainder,
                            error: remainder.abs() * 0.5 + tol_abs * 0.01,
                        });
                    }
                } else if q > 0.995 && block.abs() > tol_abs {
                    return Err(Error::DivergentTail(context.to_string()));
                }
            } else if block == 0.0 {
                return Ok(Tail {
                    value: sum,
                    error: 0.0,
                });
            }
        }
        prev_block = Some(block);
        lo = hi;
        if lo > 1e280 {
            break;
        }
    }
    Err(Error::QuadratureNonConvergent {
        context: format!("power tail: {context}"),
        lo: start,
        hi: lo,
    })
}
