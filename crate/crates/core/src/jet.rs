//! Truncated Taylor-series arithmetic ("jets").
//!
//! Kernel families are written once as closed-form expressions over `Jet`
//! values; radial derivatives of any order up to `ORDER` then come out exact
//! to machine precision, which is what makes the 𝐇(d,m) certification
//! meaningful.  Finite differences stay in test code as the cross-check.

/// Number of Taylor coefficients carried: value + 7 derivatives.
pub const ORDER: usize = 8;

/// Taylor coefficients c_k = f^(k)(x0)/k! around the expansion point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; ORDER],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; ORDER];
        c[0] = v;
        Self { c }
    }

    /// The identity function expanded at `x`.
    pub fn variable(x: f64) -> Self {
        let mut c = [0.0; ORDER];
        c[0] = x;
        c[1] = 1.0;
        Self { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// n-th derivative (not the Taylor coefficient).
    pub fn derivative(&self, n: usize) -> f64 {
        assert!(n < ORDER);
        let mut fact = 1.0;
        for k in 1..=n {
            fact *= k as f64;
        }
        self.c[n] * fact
    }

    /// Jet of f' expanded at the same point; the top coefficient is lost.
    pub fn derivative_jet(&self) -> Jet {
        let mut c = [0.0; ORDER];
        for k in 0..ORDER - 1 {
            c[k] = (k as f64 + 1.0) * self.c[k + 1];
        }
        Self { c }
    }

    pub fn recip(self) -> Jet {
        Jet::constant(1.0) / self
    }

    pub fn powi(self, n: i32) -> Jet {
        self.powf(n as f64)
    }

    /// f^a via the standard Taylor recurrence g_k = Σ (j(a+1)-k)/ (k f_0) f_j g_{k-j}.
    pub fn powf(self, a: f64) -> Jet {
        let f0 = self.c[0];
        assert!(f0 > 0.0, "powf of non-positive jet value {f0}");
        let mut g = [0.0; ORDER];
        g[0] = f0.powf(a);
        for k in 1..ORDER {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (a * j as f64 - (k - j) as f64) * self.c[j] * g[k - j];
            }
            g[k] = acc / (k as f64 * f0);
        }
        Jet { c: g }
    }

    pub fn exp(self) -> Jet {
        let mut g = [0.0; ORDER];
        g[0] = self.c[0].exp();
        for k in 1..ORDER {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * g[k - j];
            }
            g[k] = acc / k as f64;
        }
        Jet { c: g }
    }

    pub fn ln(self) -> Jet {
        let f0 = self.c[0];
        assert!(f0 > 0.0, "ln of non-positive jet value {f0}");
        let mut g = [0.0; ORDER];
        g[0] = f0.ln();
        for k in 1..ORDER {
            let mut acc = k as f64 * self.c[k];
            for j in 1..k {
                acc -= j as f64 * g[j] * self.c[k - j];
            }
            g[k] = acc / (k as f64 * f0);
        }
        Jet { c: g }
    }

    pub fn ln_1p(self) -> Jet {
        (Jet::constant(1.0) + self).ln()
    }

    pub fn sqrt(self) -> Jet {
        self.powf(0.5)
    }

    pub fn sin_cos(self) -> (Jet, Jet) {
        let mut s = [0.0; ORDER];
        let mut c = [0.0; ORDER];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..ORDER {
            let mut accs = 0.0;
            let mut accc = 0.0;
            for j in 1..=k {
                accs += j as f64 * self.c[j] * c[k - j];
                accc += j as f64 * self.c[j] * s[k - j];
            }
            s[k] = accs / k as f64;
            c[k] = -accc / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut c = self.c;
        for k in 0..ORDER {
            c[k] += rhs.c[k];
        }
        Jet { c }
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let mut c = self.c;
        for k in 0..ORDER {
            c[k] -= rhs.c[k];
        }
        Jet { c }
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        let mut c = self.c;
        for v in &mut c {
            *v = -*v;
        }
        Jet { c }
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut c = [0.0; ORDER];
        for k in 0..ORDER {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.c[j] * rhs.c[k - j];
            }
            c[k] = acc;
        }
        Jet { c }
    }
}

impl std::ops::Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let d0 = rhs.c[0];
        assert!(d0 != 0.0, "division by a zero-valued jet");
        let mut q = [0.0; ORDER];
        for k in 0..ORDER {
            let mut acc = self.c[k];
            for j in 0..k {
                acc -= q[j] * rhs.c[k - j];
            }
            q[k] = acc / d0;
        }
        Jet { c: q }
    }
}

impl std::ops::Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        let mut c = self.c;
        for v in &mut c {
            *v *= rhs;
        }
        Jet { c }
    }
}

impl std::ops::Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut c = self.c;
        c[0] += rhs;
        Jet { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derivatives_of_power() {
        // f(r) = r^-2 at r = 3
        let j = Jet::variable(3.0).powf(-2.0);
        assert_relative_eq!(j.value(), 1.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(j.derivative(1), -2.0 / 27.0, epsilon = 1e-15);
        assert_relative_eq!(j.derivative(2), 6.0 / 81.0, epsilon = 1e-14);
        assert_relative_eq!(j.derivative(4), 120.0 / 3.0f64.powi(6), epsilon = 1e-13);
    }

    #[test]
    fn derivatives_of_log_kernel() {
        // j(r) = log(1+1/r)/r at r = 1; first derivative = -(log 2 + 1/2)
        let r = Jet::variable(1.0);
        let j = r.recip().ln_1p() / r;
        assert_relative_eq!(j.value(), 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(j.derivative(1), -(2f64.ln() + 0.5), epsilon = 1e-14);
    }

    #[test]
    fn exp_and_trig_consistency() {
        let x = Jet::variable(0.7);
        let e = (x * 2.0).exp();
        assert_relative_eq!(e.derivative(3), 8.0 * (1.4f64).exp(), epsilon = 1e-12);
        let (s, c) = x.sin_cos();
        assert_relative_eq!(s.derivative(2), -(0.7f64).sin(), epsilon = 1e-13);
        assert_relative_eq!(c.derivative(1), -(0.7f64).sin(), epsilon = 1e-13);
        // sin^2 + cos^2 = 1 as jets
        let one = s * s + c * c;
        assert_relative_eq!(one.value(), 1.0, epsilon = 1e-14);
        for k in 1..ORDER {
            assert!(one.c[k].abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_jet_shifts_coefficients() {
        let x = Jet::variable(2.0);
        let f = x * x * x; // r^3
        let fp = f.derivative_jet(); // 3 r^2
        assert_relative_eq!(fp.value(), 12.0, epsilon = 1e-14);
        assert_relative_eq!(fp.derivative(1), 12.0, epsilon = 1e-14);
        assert_relative_eq!(fp.derivative(2), 6.0, epsilon = 1e-14);
    }
}
