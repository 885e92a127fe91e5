//! Radial Fourier-inversion kernels.
//!
//! Everything here revolves around g_d(u) := u^{1-d/2} J_{d/2-1}(u), the
//! kernel of the d-dimensional radial Fourier transform: for a radial f,
//!   (2π)^{-d/2} ∫ f̂(ρ) g_d(ρ r) ρ^{d-1} dρ
//! inverts the transform, and Φ_d(u) = Γ(d/2) 2^{d/2-1} g_d(u) is the
//! spherical mean of cos(u e·θ).  The recursion g_{d+2}(u) = -g_d'(u)/u is
//! the analytic face of the dimension-shift used throughout the heat-kernel
//! module.

use std::sync::OnceLock;

/// Γ(n/2) for n ≥ 1, exact by the half-integer recursion.
pub fn gamma_half(n: u32) -> f64 {
    assert!(n >= 1);
    match n {
        1 => std::f64::consts::PI.sqrt(),
        2 => 1.0,
        _ => (n as f64 / 2.0 - 1.0) * gamma_half(n - 2),
    }
}

/// Surface area of the unit sphere S^{d-1} in R^d.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half(d as u32)
}

/// g_d(0) = 1 / (2^{d/2-1} Γ(d/2)).
pub fn radial_kernel_zero(d: usize) -> f64 {
    1.0 / (2f64.powf(d as f64 / 2.0 - 1.0) * gamma_half(d as u32))
}

const SERIES_CUT: f64 = 12.0;

fn series_g(d: usize, u: f64) -> f64 {
    let x = -u * u / 4.0;
    let mut term = radial_kernel_zero(d);
    let mut sum = term;
    for k in 0..60 {
        term *= x / ((k as f64 + 1.0) * (d as f64 / 2.0 + k as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-280) {
            break;
        }
    }
    sum
}

/// Coefficient polynomials (in v = 1/u) of the odd-d closed forms
/// g_d(u) = sqrt(2/π) [A_d(v) cos u + B_d(v) sin u].
fn odd_poly(d: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut v = Vec::new();
        let mut a = vec![1.0];
        let mut b = vec![0.0];
        v.push((a.clone(), b.clone()));
        // recursion A_{d+2} = v^3 A' - v B, B_{d+2} = v^3 B' + v A
        for _ in 0..9 {
            let deriv = |p: &[f64]| -> Vec<f64> {
                let mut q = vec![0.0; p.len().saturating_sub(1)];
                for (i, c) in p.iter().enumerate().skip(1) {
                    q[i - 1] = c * i as f64;
                }
                q
            };
            let shift = |p: &[f64], by: usize| -> Vec<f64> {
                let mut q = vec![0.0; p.len() + by];
                for (i, c) in p.iter().enumerate() {
                    q[i + by] = *c;
                }
                q
            };
            let add = |p: &[f64], q: &[f64], sign: f64| -> Vec<f64> {
                let n = p.len().max(q.len());
                let mut r = vec![0.0; n];
                for i in 0..n {
                    r[i] =
                        p.get(i).copied().unwrap_or(0.0) + sign * q.get(i).copied().unwrap_or(0.0);
                }
                r
            };
            let na = add(&shift(&deriv(&a), 3), &shift(&b, 1), -1.0);
            let nb = add(&shift(&deriv(&b), 3), &shift(&a, 1), 1.0);
            a = na;
            b = nb;
            v.push((a.clone(), b.clone()));
        }
        v
    });
    &table[(d - 1) / 2]
}

fn eval_poly(p: &[f64], v: f64) -> f64 {
    let mut acc = 0.0;
    for c in p.iter().rev() {
        acc = acc * v + c;
    }
    acc
}

/// J_ν(u) for u ≥ SERIES_CUT by the Stokes asymptotic expansion.
fn bessel_j_asymptotic(nu: f64, u: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let omega = u - nu * std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..24 {
        let kf = k as f64;
        term *= (mu - (2.0 * kf - 1.0) * (2.0 * kf - 1.0)) / (kf * 8.0 * u);
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        let signed = match k % 4 {
            1 => term,
            2 => -term,
            3 => -term,
            _ => term,
        };
        if k % 2 == 1 {
            q += signed;
        } else {
            p += signed;
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    (2.0 / (std::f64::consts::PI * u)).sqrt() * (p * omega.cos() - q * omega.sin())
}

/// J_n(u) for integer n ≥ 0, u ≥ SERIES_CUT: asymptotics for n ∈ {0,1},
/// upward recurrence above (stable since u > n here).
fn bessel_j_int_large(n: usize, u: f64) -> f64 {
    let j0 = bessel_j_asymptotic(0.0, u);
    if n == 0 {
        return j0;
    }
    let j1 = bessel_j_asymptotic(1.0, u);
    if n == 1 {
        return j1;
    }
    let mut jm = j0;
    let mut jc = j1;
    for k in 1..n {
        let jn = 2.0 * k as f64 / u * jc - jm;
        jm = jc;
        jc = jn;
    }
    jc
}

/// g_d(u) = u^{1-d/2} J_{d/2-1}(u) for d ≥ 1, u ≥ 0.
pub fn radial_kernel(d: usize, u: f64) -> f64 {
    debug_assert!(u >= 0.0);
    if u <= SERIES_CUT {
        return series_g(d, u);
    }
    if d % 2 == 1 {
        let (pa, pb) = odd_poly(d);
        let v = 1.0 / u;
        (2.0 / std::f64::consts::PI).sqrt()
            * (eval_poly(pa, v) * u.cos() + eval_poly(pb, v) * u.sin())
    } else {
        let n = d / 2 - 1;
        u.powf(1.0 - d as f64 / 2.0) * bessel_j_int_large(n, u)
    }
}

/// First positive zero of J_{d/2-1}, indexed by dimension (d = 1..=10).
pub fn first_kernel_zero(d: usize) -> f64 {
    const Z: [f64; 10] = [
        std::f64::consts::FRAC_PI_2, // d=1, nu=-1/2: cos
        2.404_825_557_695_773,       // d=2, J_0
        std::f64::consts::PI,        // d=3, nu=1/2: sin(u)/u
        3.831_705_970_207_512,       // d=4, J_1
        4.493_409_457_909_064,       // d=5
        5.135_622_301_840_683,       // d=6
        5.763_459_196_894_550,       // d=7
        6.380_161_895_923_984,       // d=8
        6.987_932_000_500_519,       // d=9
        7.588_342_434_503_804,       // d=10
    ];
    if d <= 10 {
        Z[d - 1]
    } else {
        let nu = d as f64 / 2.0 - 1.0;
        nu + 1.855_757 * nu.powf(1.0 / 3.0) + 1.033_15 / nu.powf(1.0 / 3.0)
    }
}

/// Spherical mean Φ_d(u) of cos(u e·θ) over θ ∈ S^{d-1}; Φ_1 = cos.
pub fn phi(d: usize, u: f64) -> f64 {
    gamma_half(d as u32) * 2f64.powf(d as f64 / 2.0 - 1.0) * radial_kernel(d, u)
}

/// 1 - Φ_d(u), evaluated without cancellation for small u.
pub fn one_minus_phi(d: usize, u: f64) -> f64 {
    if u > 0.5 {
        return 1.0 - phi(d, u);
    }
    let x = u * u / 4.0;
    // 1 - Φ = Σ_{k≥1} (-1)^{k+1} x^k Γ(d/2) / (k! Γ(d/2+k))
    let mut term = x / (d as f64 / 2.0);
    let mut sum = term;
    for k in 1..30 {
        term *= -x / ((k as f64 + 1.0) * (d as f64 / 2.0 + k as f64));
        sum += term;
        if term.abs() < 1e-19 * sum.abs() {
            break;
        }
    }
    sum
}

/// Signed coefficients of the exact axis-derivative expansion
///   ∂_r^m g_d(ρr)·ρ^{-m} = Σ_k coeff · (ρr)^{m-2k} g_{d+2(m-k)}(ρr),
/// with coeff = (-1)^{m-k} m! / (k! (m-2k)! 2^k).  The same table combines
/// the shifted-dimension profiles in the p_{d+2} route.
pub fn axis_derivative_coeffs(m: usize) -> Vec<(usize, f64)> {
    let fact = |n: usize| -> f64 { (1..=n).map(|v| v as f64).product::<f64>().max(1.0) };
    let mut out = Vec::new();
    let mut k = 0;
    while 2 * k <= m {
        let c = fact(m) / (fact(k) * fact(m - 2 * k) * 2f64.powi(k as i32));
        let sign = if (m - k) % 2 == 0 { 1.0 } else { -1.0 };
        out.push((k, sign * c));
        k += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_half_values() {
        assert_relative_eq!(gamma_half(1), std::f64::consts::PI.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(gamma_half(4), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            gamma_half(3),
            0.5 * std::f64::consts::PI.sqrt(),
            epsilon = 1e-15
        );
        assert_relative_eq!(gamma_half(8), 6.0, epsilon = 1e-15);
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0, epsilon = 1e-14);
        assert_relative_eq!(sphere_area(2), 2.0 * std::f64::consts::PI, epsilon = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * std::f64::consts::PI, epsilon = 1e-13);
    }

    #[test]
    fn g1_is_scaled_cosine() {
        let c = (2.0 / std::f64::consts::PI).sqrt();
        for &u in &[0.0, 0.3, 2.0, 11.0, 13.0, 40.0, 1e4] {
            assert_relative_eq!(radial_kernel(1, u), c * u.cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn g3_is_scaled_sinc() {
        let c = (2.0 / std::f64::consts::PI).sqrt();
        for &u in &[0.2, 1.0, 5.0, 11.9, 12.1, 77.0] {
            assert_relative_eq!(radial_kernel(3, u), c * u.sin() / u, max_relative = 1e-11);
        }
    }

    #[test]
    fn g_dimension_shift_recursion() {
        // g_{d+2}(u) = -g_d'(u)/u, checked by central differences
        for d in 1..=8 {
            for &u in &[0.7, 4.0, 13.0] {
                let h = 1e-5;
                let gp = (radial_kernel(d, u + h) - radial_kernel(d, u - h)) / (2.0 * h);
                assert_relative_eq!(radial_kernel(d + 2, u), -gp / u, max_relative = 2e-6);
            }
        }
    }

    #[test]
    fn phi_one_matches_cos_and_small_u_series() {
        for &u in &[0.0, 0.1, 1.2, 9.0] {
            assert_relative_eq!(phi(1, u), u.cos(), epsilon = 1e-12);
        }
        for d in 1..=4 {
            // leading term u^2 / (2d)
            let u = 1e-4;
            assert_relative_eq!(
                one_minus_phi(d, u),
                u * u / (2.0 * d as f64),
                max_relative = 1e-7
            );
            assert_relative_eq!(
                one_minus_phi(d, 0.4),
                1.0 - phi(d, 0.4),
                max_relative = 1e-11
            );
        }
    }

    #[test]
    fn even_d_series_asymptotic_match_at_cut() {
        // both evaluation branches agree across u = 12 (series carries a
        // few digits of cancellation there, hence the loose-ish budget)
        for d in [2usize, 4, 6, 8, 10] {
            let lo = radial_kernel(d, SERIES_CUT - 1e-12);
            let hi = radial_kernel(d, SERIES_CUT + 1e-12);
            assert_relative_eq!(lo, hi, max_relative = 3e-8, epsilon = 1e-14);
        }
    }

    #[test]
    fn j0_j1_reference_values() {
        // series branch: J0(1), against the classical tabulated value
        assert_relative_eq!(
            radial_kernel(2, 1.0),
            0.765_197_686_557_966_6,
            epsilon = 1e-13
        );
        // asymptotic branch at u = 15
        assert_relative_eq!(
            radial_kernel(2, 15.0),
            -0.014_224_472_826_780_77,
            max_relative = 1e-10
        );
        // J1(15)/15 = g_4(15)
        assert_relative_eq!(
            radial_kernel(4, 15.0),
            0.205_104_038_613_522_8 / 15.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn axis_coeffs_match_hand_expansion() {
        assert_eq!(axis_derivative_coeffs(1), vec![(0, -1.0)]);
        assert_eq!(axis_derivative_coeffs(2), vec![(0, 1.0), (1, -1.0)]);
        assert_eq!(axis_derivative_coeffs(3), vec![(0, -1.0), (1, 3.0)]);
        assert_eq!(
            axis_derivative_coeffs(4),
            vec![(0, 1.0), (1, -6.0), (2, 3.0)]
        );
    }
}
