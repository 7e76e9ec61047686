//! The non-unitary group element `V = exp(2ε K0 + 2μ K- + 2μ* K+)`, its
//! ordered factorization `V = exp(ϑ+ K+) exp(ln ϑ0 K0) exp(ϑ- K-)`, and the
//! reduced parametrization `ϑ± = -φ e^{∓iϕ}`, `ϑ0 = -(D/2) φ² - χ`.
//!
//! Hyperbolic functions of `θ = sqrt(ε² + 2D|μ|²)` only ever enter through
//! `cosh θ` and `sinh θ / θ`, both entire in `θ²`, so a negative `θ²` (possible
//! for su(1,1)) needs no branch choice.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{build_su11_boson_rep, AlgebraKind, RepLabel, Representation};
use crate::error::{Error, Result};
use crate::linalg::{cr, exp_diagonal, expm, max_norm, CMat};

/// Below this modulus the factorization denominator counts as zero.
pub const SINGULAR_DENOMINATOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalParams {
    pub eps: f64,
    pub mu: Complex64,
}

impl CanonicalParams {
    pub fn new(eps: f64, mu: Complex64) -> Self {
        CanonicalParams { eps, mu }
    }
}

/// Parameters of the ordered factorization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussParams {
    pub theta_plus: Complex64,
    pub theta_zero: Complex64,
    pub theta_minus: Complex64,
    /// Principal square root of `ε² + 2D|μ|²`; `None` when the parameters did
    /// not come from a canonical `(ε, μ)` pair.
    pub theta: Option<Complex64>,
}

impl GaussParams {
    pub fn identity() -> Self {
        GaussParams {
            theta_plus: cr(0.0),
            theta_zero: cr(1.0),
            theta_minus: cr(0.0),
            theta: None,
        }
    }
}

/// `(φ, ϕ, χ, |z|)` with `z = 2μ/ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedParams {
    pub phi: f64,
    pub varphi: f64,
    pub chi: f64,
    /// `|2μ/ε|`; infinite when `ε = 0` and `μ ≠ 0`.
    pub z_mod: f64,
}

impl ReducedParams {
    /// The equivalent representative with `φ ≥ 0`, using
    /// `(φ, ϕ) ≡ (-φ, ϕ ± π)`.
    pub fn folded(self) -> Self {
        if self.phi >= 0.0 {
            return self;
        }
        let varphi = if self.varphi > 0.0 {
            self.varphi - PI
        } else {
            self.varphi + PI
        };
        ReducedParams {
            phi: -self.phi,
            varphi,
            ..self
        }
    }
}

/// `(cosh θ, sinh θ / θ)` as functions of `x = θ²`.
pub fn cosh_sinhc(x: f64) -> (f64, f64) {
    if x.abs() < 1e-4 {
        let ch = 1.0 + x / 2.0 * (1.0 + x / 12.0 * (1.0 + x / 30.0 * (1.0 + x / 56.0)));
        let sc = 1.0 + x / 6.0 * (1.0 + x / 20.0 * (1.0 + x / 42.0 * (1.0 + x / 72.0)));
        (ch, sc)
    } else if x > 0.0 {
        let s = x.sqrt();
        (s.cosh(), s.sinh() / s)
    } else {
        let s = (-x).sqrt();
        (s.cos(), s.sin() / s)
    }
}

struct Hyperbolic {
    theta_sq: f64,
    cosh: f64,
    sinhc: f64,
    /// `cosh θ - ε sinh θ / θ`
    den: f64,
}

fn hyperbolic(p: &CanonicalParams, kind: AlgebraKind) -> Result<Hyperbolic> {
    if !p.eps.is_finite() || !p.mu.is_finite() {
        return Err(Error::invalid("canonical parameters must be finite"));
    }
    let theta_sq = p.eps * p.eps + 2.0 * kind.d() * p.mu.norm_sqr();
    let (cosh, sinhc) = cosh_sinhc(theta_sq);
    let den = cosh - p.eps * sinhc;
    if den.abs() < SINGULAR_DENOMINATOR {
        return Err(Error::SingularDecomposition(format!(
            "cosh θ - ε sinh θ/θ = {den:e} for ε={}, μ={}",
            p.eps, p.mu
        )));
    }
    Ok(Hyperbolic {
        theta_sq,
        cosh,
        sinhc,
        den,
    })
}

/// Ordered-factorization parameters of `exp(2ε K0 + 2μ K- + 2μ* K+)`.
pub fn gauss_decompose(p: &CanonicalParams, kind: AlgebraKind) -> Result<GaussParams> {
    let h = hyperbolic(p, kind)?;
    let scale = 2.0 * h.sinhc / h.den;
    Ok(GaussParams {
        theta_plus: p.mu.conj() * scale,
        theta_zero: cr(1.0 / (h.den * h.den)),
        theta_minus: p.mu * scale,
        theta: Some(cr(h.theta_sq).sqrt()),
    })
}

/// Reduced parameters, computed through the factorization so that `ε = 0`
/// is regular.
pub fn reduce_params(p: &CanonicalParams, kind: AlgebraKind) -> Result<ReducedParams> {
    let h = hyperbolic(p, kind)?;
    let mu_mod = p.mu.norm();
    let varphi = if mu_mod == 0.0 {
        0.0
    } else {
        let a = p.mu.im.atan2(p.mu.re);
        if a <= -PI {
            PI
        } else {
            a
        }
    };
    let z_mod = if mu_mod == 0.0 {
        0.0
    } else if p.eps == 0.0 {
        f64::INFINITY
    } else {
        (2.0 * mu_mod / p.eps).abs()
    };
    Ok(ReducedParams {
        phi: -2.0 * mu_mod * h.sinhc / h.den,
        varphi,
        chi: -(h.cosh + p.eps * h.sinhc) / h.den,
        z_mod,
    })
}

pub fn gauss_from_reduced(r: &ReducedParams, kind: AlgebraKind) -> GaussParams {
    let e = Complex64::from_polar(1.0, r.varphi);
    GaussParams {
        theta_plus: -r.phi * e.conj(),
        theta_zero: cr(-(kind.d() / 2.0) * r.phi * r.phi - r.chi),
        theta_minus: -r.phi * e,
        theta: None,
    }
}

/// Natural logarithm on the branch whose argument lies closest to
/// `reference_arg`.
pub fn log_near(z: Complex64, reference_arg: f64) -> Complex64 {
    let principal = z.ln();
    let k = ((reference_arg - principal.im) / (2.0 * PI)).round();
    Complex64::new(principal.re, principal.im + 2.0 * PI * k)
}

/// Tracks `ln z` continuously across a sequence of samples.
#[derive(Debug, Clone, Default)]
pub struct ContinuousLog {
    last_arg: Option<f64>,
}

impl ContinuousLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next(&mut self, z: Complex64) -> Complex64 {
        let l = match self.last_arg {
            None => z.ln(),
            Some(a) => log_near(z, a),
        };
        self.last_arg = Some(l.im);
        l
    }
}

fn check_theta_zero(g: &GaussParams) -> Result<()> {
    if g.theta_zero.norm() == 0.0 || !g.theta_zero.is_finite() {
        return Err(Error::SingularDecomposition(format!(
            "ϑ0 = {} has no logarithm",
            g.theta_zero
        )));
    }
    Ok(())
}

/// `exp(ϑ+ K+) exp(ln ϑ0 K0) exp(ϑ- K-)` with the principal logarithm.
pub fn build_group_element(g: &GaussParams, rep: &Representation) -> Result<CMat> {
    check_theta_zero(g)?;
    Ok(group_element_with_log(g, g.theta_zero.ln(), rep))
}

/// As [`build_group_element`] with an explicit branch of `ln ϑ0`.
pub fn group_element_with_log(g: &GaussParams, log_theta_zero: Complex64, rep: &Representation) -> CMat {
    let up = expm(&(rep.kplus() * g.theta_plus));
    let mid = exp_diagonal(rep.k0_diagonal().iter().map(|&k| log_theta_zero * k));
    let down = expm(&(rep.kminus() * g.theta_minus));
    up * mid * down
}

/// `exp(-ϑ- K-) exp(-ln ϑ0 K0) exp(-ϑ+ K+)`.
pub fn invert_group_element(g: &GaussParams, rep: &Representation) -> Result<CMat> {
    check_theta_zero(g)?;
    Ok(inverse_with_log(g, g.theta_zero.ln(), rep))
}

pub fn inverse_with_log(g: &GaussParams, log_theta_zero: Complex64, rep: &Representation) -> CMat {
    let down = expm(&(rep.kminus() * (-g.theta_minus)));
    let mid = exp_diagonal(rep.k0_diagonal().iter().map(|&k| -log_theta_zero * k));
    let up = expm(&(rep.kplus() * (-g.theta_plus)));
    down * mid * up
}

fn generator(p: &CanonicalParams, rep: &Representation) -> CMat {
    rep.k0() * cr(2.0 * p.eps) + rep.kminus() * (p.mu * 2.0) + rep.kplus() * (p.mu.conj() * 2.0)
}

/// Dense exponential of the generator as represented, truncation included.
pub fn truncated_canonical_exponential(p: &CanonicalParams, rep: &Representation) -> CMat {
    expm(&generator(p, rep))
}

/// Relative block change below which the padded exponential is converged.
const PADDING_TOLERANCE: f64 = 1e-13;
/// Largest padded Fock dimension tried, as a multiple of the cutoff.
const MAX_PADDING_FACTOR: usize = 16;

/// Exponential of a generator that only couples Fock levels of equal parity,
/// computed blockwise on the even and odd sublattices.
fn parity_exponential(a: &CMat) -> CMat {
    let m = a.nrows();
    let mut out = CMat::zeros(m, m);
    for parity in 0..2 {
        let idx: Vec<usize> = (parity..m).step_by(2).collect();
        let sub = CMat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]);
        let e = expm(&sub);
        for (i, &r) in idx.iter().enumerate() {
            for (j, &c) in idx.iter().enumerate() {
                out[(r, c)] = e[(i, j)];
            }
        }
    }
    out
}

/// Dense exponential of `2ε K0 + 2μ K- + 2μ* K+`.
///
/// Finite spin representations are exact. For a Fock cutoff `N` the
/// exponential of the truncated generator differs from the restriction of the
/// untruncated operator, so the exponential is taken in a padded space of
/// dimension `M > N`, grown until the leading `N` columns no longer reach the
/// padding boundary or the leading block stops changing.
pub fn canonical_exponential(p: &CanonicalParams, rep: &Representation) -> CMat {
    let n = match rep.label() {
        RepLabel::Spin { .. } => return truncated_canonical_exponential(p, rep),
        RepLabel::Cutoff { n } => n,
    };
    let step = n.max(30);
    let mut m = 2 * n;
    let mut prev: Option<CMat> = None;
    loop {
        let big = build_su11_boson_rep(m).expect("padded cutoff exceeds the minimum");
        let e = parity_exponential(&generator(p, &big));
        let block = e.view((0, 0), (n, n)).into_owned();
        let scale = max_norm(&block).max(1.0);
        let edge = e
            .view((m - 4, 0), (4, n))
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()))
            / scale;
        let change = prev.as_ref().map_or(f64::INFINITY, |q| max_norm(&(&block - q)) / scale);
        if edge < PADDING_TOLERANCE * 1e-3 || change < PADDING_TOLERANCE || m >= MAX_PADDING_FACTOR * n {
            return block;
        }
        prev = Some(block);
        m += step;
    }
}
