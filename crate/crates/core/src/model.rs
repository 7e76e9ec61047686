//! Time-dependent coefficients `ω(t), α(t), β(t)` of
//! `H(t) = 2ω K0 + 2α K- + 2β K+`.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Representation;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Linear,
    #[default]
    Cubic,
}

/// A complex-valued function of time.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeProfile {
    Constant(Complex64),
    /// `offset + amp * sin(frequency * t + phase0)`
    Sinusoid {
        amp: Complex64,
        frequency: f64,
        phase0: f64,
        offset: Complex64,
    },
    Table(Table),
}

impl TimeProfile {
    pub fn constant(re: f64, im: f64) -> Self {
        TimeProfile::Constant(c(re, im))
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        match self {
            TimeProfile::Constant(z) => Ok(*z),
            TimeProfile::Sinusoid {
                amp,
                frequency,
                phase0,
                offset,
            } => Ok(offset + amp * (frequency * t + phase0).sin()),
            TimeProfile::Table(tab) => tab.eval(t),
        }
    }

    /// Time interval on which the profile can be evaluated.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            TimeProfile::Table(tab) => (tab.t[0], *tab.t.last().unwrap()),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// Tabulated samples `(t, re, im)` with strictly increasing `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    t: Vec<f64>,
    re: Vec<f64>,
    im: Vec<f64>,
    interp: Interpolation,
    // Natural-spline second derivatives; empty for linear tables.
    re_m: Vec<f64>,
    im_m: Vec<f64>,
}

impl Table {
    pub fn new(samples: Vec<(f64, f64, f64)>, interp: Interpolation) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("a table profile needs at least two samples"));
        }
        if samples
            .iter()
            .any(|s| !(s.0.is_finite() && s.1.is_finite() && s.2.is_finite()))
        {
            return Err(Error::invalid("table samples must be finite"));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("table sample times must be strictly increasing"));
        }
        let t: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let re: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let im: Vec<f64> = samples.iter().map(|s| s.2).collect();
        let (re_m, im_m) = match interp {
            Interpolation::Cubic if t.len() >= 3 => (natural_spline(&t, &re), natural_spline(&t, &im)),
            _ => (Vec::new(), Vec::new()),
        };
        Ok(Table {
            t,
            re,
            im,
            interp,
            re_m,
            im_m,
        })
    }

    /// Reads a UTF-8 CSV with header `t,re,im`.
    pub fn from_csv(path: &Path, interp: Interpolation) -> Result<Self> {
        if !path.exists() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if headers != ["t", "re", "im"] {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                column: 1,
                msg: format!("expected header `t,re,im`, found `{}`", headers.join(",")),
            });
        }
        let mut samples = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse {
                        path: path.display().to_string(),
                        line: row + 2,
                        column: k + 1,
                        msg: "expected a decimal number".into(),
                    })
            };
            samples.push((field(0)?, field(1)?, field(2)?));
        }
        Table::new(samples, interp)
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        let (lo, hi) = (self.t[0], *self.t.last().unwrap());
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain { t, lo, hi });
        }
        let k = match self.t.partition_point(|&x| x <= t) {
            0 => 0,
            p => (p - 1).min(self.t.len() - 2),
        };
        let (t0, t1) = (self.t[k], self.t[k + 1]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        let lin = |y: &[f64]| a * y[k] + b * y[k + 1];
        if self.re_m.is_empty() {
            return Ok(c(lin(&self.re), lin(&self.im)));
        }
        let cub = |y: &[f64], m: &[f64]| lin(y) + ((a * a * a - a) * m[k] + (b * b * b - b) * m[k + 1]) * h * h / 6.0;
        Ok(c(cub(&self.re, &self.re_m), cub(&self.im, &self.im_m)))
    }
}

/// Second derivatives of the natural cubic spline through `(x, y)`.
fn natural_spline(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    // Thomas algorithm on the interior equations.
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let diag = 2.0 * (h0 + h1);
        let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        let denom = diag - h0 * cp[i - 1];
        cp[i] = h1 / denom;
        dp[i] = (rhs - h0 * dp[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = dp[i] - cp[i] * m[i + 1];
    }
    m
}

/// The three coefficient profiles of the Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub omega: TimeProfile,
    pub alpha: TimeProfile,
    pub beta: TimeProfile,
}

impl CoefficientSet {
    pub fn new(omega: TimeProfile, alpha: TimeProfile, beta: TimeProfile) -> Self {
        CoefficientSet { omega, alpha, beta }
    }

    /// All three profiles constant.
    pub fn constant(omega: Complex64, alpha: Complex64, beta: Complex64) -> Self {
        CoefficientSet {
            omega: TimeProfile::Constant(omega),
            alpha: TimeProfile::Constant(alpha),
            beta: TimeProfile::Constant(beta),
        }
    }

    pub fn eval(&self, t: f64) -> Result<Coeffs> {
        let v = Coeffs {
            omega: self.omega.eval(t)?,
            alpha: self.alpha.eval(t)?,
            beta: self.beta.eval(t)?,
        };
        if !(v.omega.is_finite() && v.alpha.is_finite() && v.beta.is_finite()) {
            return Err(Error::invalid(format!("non-finite coefficient at t={t}")));
        }
        Ok(v)
    }

    /// Intersection of the profile domains.
    pub fn domain(&self) -> (f64, f64) {
        [&self.omega, &self.alpha, &self.beta]
            .iter()
            .map(|p| p.domain())
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), (a, b)| {
                (lo.max(a), hi.min(b))
            })
    }
}

/// Coefficient values at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coeffs {
    pub omega: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl Coeffs {
    pub fn polar(&self) -> PolarCoeffs {
        let (mod_omega, arg_omega) = polar(self.omega);
        let (mod_alpha, arg_alpha) = polar(self.alpha);
        let (mod_beta, arg_beta) = polar(self.beta);
        PolarCoeffs {
            mod_omega,
            arg_omega,
            mod_alpha,
            arg_alpha,
            mod_beta,
            arg_beta,
        }
    }

    pub fn is_real(&self) -> bool {
        self.omega.im == 0.0 && self.alpha.im == 0.0 && self.beta.im == 0.0
    }
}

/// Moduli and arguments (in `(-π, π]`) of `ω, α, β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarCoeffs {
    pub mod_omega: f64,
    pub arg_omega: f64,
    pub mod_alpha: f64,
    pub arg_alpha: f64,
    pub mod_beta: f64,
    pub arg_beta: f64,
}

fn polar(z: Complex64) -> (f64, f64) {
    let r = z.norm();
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let a = z.im.atan2(z.re);
    (r, if a <= -PI { PI } else { a })
}

/// Coefficient values and their polar form at `t`.
pub fn eval_coeffs(c: &CoefficientSet, t: f64) -> Result<(Coeffs, PolarCoeffs)> {
    let v = c.eval(t)?;
    Ok((v, v.polar()))
}

/// `2ω K0 + 2α K- + 2β K+` for the given instantaneous coefficients.
pub fn h_matrix_from(v: &Coeffs, rep: &Representation) -> CMat {
    rep.k0() * (v.omega * 2.0) + rep.kminus() * (v.alpha * 2.0) + rep.kplus() * (v.beta * 2.0)
}

pub fn h_matrix(c: &CoefficientSet, rep: &Representation, t: f64) -> Result<CMat> {
    Ok(h_matrix_from(&c.eval(t)?, rep))
}
