//! Run configuration: flat key = value text with [section] headers.
//!
//! Grammar (one entry per line):
//!   [section]            starts a section
//!   key = value          entry in the current section
//!   # ...                comment; blank lines ignored
//! Recognised sections and keys are listed in the README; unknown keys are
//! rejected so typos fail loudly before any output is produced.

use crate::error::{Error, Result};
use crate::kernels::{builtin_kernel, JumpKernel, KernelFamily};
use crate::spectral::Coefficient;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub family: String,
    pub alpha: f64,
    pub d: usize,
    pub perturb_n: usize,
    pub n: usize,
    pub box_half: f64,
    pub steps: usize,
    pub t_final: f64,
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub coefficient: String,
    pub coef_a0: f64,
    pub coef_a1: f64,
    pub coef_radius: f64,
    pub rho_sweep: (f64, f64, usize),
    pub t_list: Vec<f64>,
    pub r_sweep: (f64, f64, usize),
    pub b_exponents: (i32, i32),
    pub trials: usize,
    pub seed: u64,
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            family: "stable".into(),
            alpha: 1.0,
            d: 1,
            perturb_n: 5,
            n: 128,
            box_half: 1.0,
            steps: 64,
            t_final: 1.0,
            p: 2.0,
            q: 2.0,
            gamma: 0.0,
            coefficient: "constant".into(),
            coef_a0: 1.0,
            coef_a1: 1.0,
            coef_radius: 1.0,
            rho_sweep: (0.1, 100.0, 25),
            t_list: vec![0.5, 1.0, 2.0],
            r_sweep: (0.05, 16.0, 9),
            b_exponents: (-4, 4),
            trials: 10,
            seed: 7,
            out_dir: "out".into(),
        }
    }
}

fn parse_f64(v: &str, line: usize) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::InvalidParameter(format!("line {line}: expected a number, got '{v}'")))
}

fn parse_usize(v: &str, line: usize) -> Result<usize> {
    v.parse().map_err(|_| {
        Error::InvalidParameter(format!("line {line}: expected an integer, got '{v}'"))
    })
}

fn parse_sweep(v: &str, line: usize) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "line {line}: sweep must be lo:hi:count, got '{v}'"
        )));
    }
    Ok((
        parse_f64(parts[0], line)?,
        parse_f64(parts[1], line)?,
        parse_usize(parts[2], line)?,
    ))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section = String::new();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            if stripped.starts_with('[') {
                if !stripped.ends_with(']') {
                    return Err(Error::InvalidParameter(format!(
                        "line {line}: unterminated section header '{stripped}'"
                    )));
                }
                section = stripped[1..stripped.len() - 1].trim().to_string();
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "line {line}: expected key = value, got '{stripped}'"
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            let full = format!("{section}.{key}");
            if let Some(prev) = seen.insert(full.clone(), line) {
                return Err(Error::InvalidParameter(format!(
                    "line {line}: '{full}' already set on line {prev}"
                )));
            }
            match full.as_str() {
                "kernel.family" => cfg.family = value.to_string(),
                "kernel.alpha" => cfg.alpha = parse_f64(value, line)?,
                "kernel.d" => cfg.d = parse_usize(value, line)?,
                "kernel.perturb_n" => cfg.perturb_n = parse_usize(value, line)?,
                "grid.n" => cfg.n = parse_usize(value, line)?,
                "grid.box" => cfg.box_half = parse_f64(value, line)?,
                "grid.steps" => cfg.steps = parse_usize(value, line)?,
                "grid.t_final" => cfg.t_final = parse_f64(value, line)?,
                "exponents.p" => cfg.p = parse_f64(value, line)?,
                "exponents.q" => cfg.q = parse_f64(value, line)?,
                "exponents.gamma" => cfg.gamma = parse_f64(value, line)?,
                "coefficient.kind" => cfg.coefficient = value.to_string(),
                "coefficient.a0" => cfg.coef_a0 = parse_f64(value, line)?,
                "coefficient.a1" => cfg.coef_a1 = parse_f64(value, line)?,
                "coefficient.radius" => cfg.coef_radius = parse_f64(value, line)?,
                "sweep.rho" => cfg.rho_sweep = parse_sweep(value, line)?,
                "sweep.t_list" => {
                    cfg.t_list = value
                        .split(',')
                        .map(|v| parse_f64(v.trim(), line))
                        .collect::<Result<Vec<_>>>()?
                }
                "sweep.r" => cfg.r_sweep = parse_sweep(value, line)?,
                "sweep.b_exponents" => {
                    let s = parse_sweep(value, line)?;
                    cfg.b_exponents = (s.0 as i32, s.1 as i32);
                }
                "sweep.trials" => cfg.trials = parse_usize(value, line)?,
                "run.seed" => {
                    cfg.seed = value.parse().map_err(|_| {
                        Error::InvalidParameter(format!("line {line}: bad seed '{value}'"))
                    })?
                }
                "run.out_dir" => cfg.out_dir = value.to_string(),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "line {line}: unknown key '{full}'"
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.q > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p, q must lie in (1, ∞), got p={} q={}",
                self.p, self.q
            )));
        }
        if !self.n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid.n must be a power of two, got {}",
                self.n
            )));
        }
        if !matches!(
            self.family.as_str(),
            "stable" | "truncated" | "log" | "perturbed"
        ) {
            return Err(Error::InvalidParameter(format!(
                "unknown kernel family '{}'",
                self.family
            )));
        }
        if !matches!(self.coefficient.as_str(), "constant" | "annulus") {
            return Err(Error::InvalidParameter(format!(
                "unknown coefficient kind '{}'",
                self.coefficient
            )));
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<JumpKernel> {
        let family = match self.family.as_str() {
            "stable" => KernelFamily::Stable,
            "truncated" => KernelFamily::Truncated,
            "log" => KernelFamily::Log,
            "perturbed" => KernelFamily::Perturbed { n: self.perturb_n },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown kernel family '{other}'"
                )))
            }
        };
        builtin_kernel(family, self.alpha, self.d)
    }

    pub fn coefficient(&self) -> Coefficient {
        match self.coefficient.as_str() {
            "annulus" => Coefficient::RadialIndicator {
                a0: self.coef_a0,
                a1: self.coef_a1,
                radius: self.coef_radius,
            },
            _ => Coefficient::Constant(self.coef_a0),
        }
    }

    /// State shared by the heavier subcommands.
    pub fn build_field(
        &self,
    ) -> Result<(
        Arc<crate::heat::HeatKernelField>,
        Arc<crate::scale::ScaleTriple>,
    )> {
        let kernel = self.kernel()?;
        let cert = crate::kernels::verify_h(&kernel, kernel.m_max.min(4));
        let profile = (*kernel.profile).clone();
        let triple = match profile.regime {
            crate::scale::Regime::BoundedEll => crate::scale::ScaleTriple::new(profile),
            _ => crate::scale::ScaleTriple::with_ell_star(profile)?,
        };
        let exponent = crate::symbol::CharExponent::new(kernel)?;
        let field = crate::heat::HeatKernelField::new(Arc::new(exponent), cert);
        Ok((Arc::new(field), Arc::new(triple)))
    }
}
