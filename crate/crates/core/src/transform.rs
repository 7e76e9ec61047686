//! Coefficients of the transformed Hamiltonian
//! `V H V⁻¹ + i V̇ V⁻¹ = 2W K0 + 2Q K- + 2Y K+` and scans certifying that a
//! flow trajectory removes `Q`, `Y` and `Im W`.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{AlgebraKind, RepLabel, Representation};
use crate::decomposition::{build_group_element, invert_group_element, GaussParams};
use crate::error::{Error, Result};
use crate::flow::{FlowDerivative, FlowState, Trajectory};
use crate::linalg::{c, CMat, I};
use crate::model::{h_matrix_from, Coeffs, PolarCoeffs};

/// Default number of scan points.
pub const DEFAULT_SCAN_SAMPLES: usize = 512;
/// Bound on `|Q|`, `|Y|`, `|Im W|` for a certified run.
pub const CERTIFICATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformedCoeffs {
    pub w: Complex64,
    pub q: Complex64,
    pub y: Complex64,
}

/// Time derivatives of the factorization parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussRates {
    pub theta_plus: Complex64,
    pub theta_zero: Complex64,
    pub theta_minus: Complex64,
}

/// `ϑ±` rates from `(φ', ϕ')` by the chain rule on `ϑ± = -φ e^{∓iϕ}`.
pub fn gauss_rates(s: &FlowState, ds: &FlowDerivative) -> GaussRates {
    let e = Complex64::from_polar(1.0, s.varphi);
    GaussRates {
        theta_plus: -(c(ds.dphi, 0.0) - I * s.phi * ds.dvarphi) * e.conj(),
        theta_zero: c(ds.dtheta_zero, 0.0),
        theta_minus: -(c(ds.dphi, 0.0) + I * s.phi * ds.dvarphi) * e,
    }
}

/// `W, Q, Y` for general factorization parameters and their rates, with
/// `χ = -(D/2) ϑ+ ϑ- - ϑ0`.
pub fn transformed_from_gauss(
    g: &GaussParams,
    r: &GaussRates,
    v: &Coeffs,
    kind: AlgebraKind,
) -> Result<TransformedCoeffs> {
    let t0 = g.theta_zero;
    if t0.norm() == 0.0 || !t0.is_finite() {
        return Err(Error::SingularDecomposition(format!("ϑ0 = {t0}")));
    }
    let d = kind.d();
    let h = d / 2.0;
    let (tp, tm) = (g.theta_plus, g.theta_minus);
    let chi = -tp * tm * h - t0;
    let (w, a, b) = (v.omega, v.alpha, v.beta);
    let half_i = I * 0.5;

    let wc = w * (tp * tm * h - chi) + (tp * a + tm * b * chi) * d + half_i * (r.theta_zero + tp * r.theta_minus * d);
    let qc = w * tm + a - b * tm * tm * h + half_i * r.theta_minus;
    let yc = w * chi * tp - a * tp * tp * h
        + b * chi * chi
        + half_i * (t0 * r.theta_plus - tp * r.theta_zero - tp * tp * r.theta_minus * h);
    Ok(TransformedCoeffs {
        w: wc / t0,
        q: qc / t0,
        y: yc / t0,
    })
}

/// `W, Q, Y` along a flow state.
pub fn transformed_coeffs(
    s: &FlowState,
    ds: &FlowDerivative,
    v: &Coeffs,
    kind: AlgebraKind,
) -> Result<TransformedCoeffs> {
    transformed_from_gauss(&s.gauss(), &gauss_rates(s, ds), v, kind).map_err(|e| e.at_time(s.t))
}

/// `Re W` on the constraint manifold: `|ω| cos φω + Dφ|β| cos(ϕ + φβ)`.
pub fn re_w(s: &FlowState, p: &PolarCoeffs, kind: AlgebraKind) -> f64 {
    p.mod_omega * p.arg_omega.cos() + kind.d() * s.phi * p.mod_beta * (s.varphi + p.arg_beta).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub samples: usize,
    pub max_abs_q: f64,
    pub t_max_abs_q: f64,
    pub max_abs_y: f64,
    pub t_max_abs_y: f64,
    pub max_abs_im_w: f64,
    pub t_max_abs_im_w: f64,
    /// Largest `|re_w - Re W|`.
    pub max_re_w_gap: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.max_abs_q.max(self.max_abs_y).max(self.max_abs_im_w)
    }

    pub fn certified(&self, tol: f64) -> bool {
        self.max() < tol
    }
}

/// One scan point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub state: FlowState,
    pub coeffs: TransformedCoeffs,
    pub re_w: f64,
}

/// Transformed coefficients at an interpolated trajectory time.
pub fn scan_point(traj: &Trajectory, t: f64) -> Result<ScanPoint> {
    let s = traj.state_at(t)?;
    let ds = traj.derivative_at(t)?;
    let v = traj.coeffs().eval(t).map_err(|e| e.at_time(t))?;
    let tc = transformed_coeffs(&s, &ds, &v, traj.kind())?;
    Ok(ScanPoint {
        state: s,
        coeffs: tc,
        re_w: re_w(&s, &v.polar(), traj.kind()),
    })
}

/// Equispaced sample times over the trajectory span, endpoints included.
pub fn scan_times(span: (f64, f64), samples: usize) -> Vec<f64> {
    let (a, b) = span;
    if samples < 2 {
        return vec![a];
    }
    (0..samples)
        .map(|k| {
            if k + 1 == samples {
                b
            } else {
                a + (b - a) * k as f64 / (samples - 1) as f64
            }
        })
        .collect()
}

/// Maxima of `|Q|`, `|Y|`, `|Im W|` over `samples` equispaced points.
pub fn residual_scan(traj: &Trajectory, samples: usize) -> Result<ResidualReport> {
    if samples < 2 {
        return Err(Error::invalid("residual scan needs at least 2 samples"));
    }
    let mut r = ResidualReport {
        samples,
        max_abs_q: 0.0,
        t_max_abs_q: traj.span().0,
        max_abs_y: 0.0,
        t_max_abs_y: traj.span().0,
        max_abs_im_w: 0.0,
        t_max_abs_im_w: traj.span().0,
        max_re_w_gap: 0.0,
    };
    for t in scan_times(traj.span(), samples) {
        let p = scan_point(traj, t)?;
        let (q, y, iw) = (p.coeffs.q.norm(), p.coeffs.y.norm(), p.coeffs.w.im.abs());
        if q > r.max_abs_q {
            r.max_abs_q = q;
            r.t_max_abs_q = t;
        }
        if y > r.max_abs_y {
            r.max_abs_y = y;
            r.t_max_abs_y = t;
        }
        if iw > r.max_abs_im_w {
            r.max_abs_im_w = iw;
            r.t_max_abs_im_w = t;
        }
        r.max_re_w_gap = r.max_re_w_gap.max((p.re_w - p.coeffs.w.re).abs());
    }
    Ok(r)
}

/// Matrix-level audit of the transformed Hamiltonian at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorAudit {
    pub t: f64,
    /// Block size the comparison is restricted to.
    pub block: usize,
    /// Max-norm of `V H V⁻¹ + i V̇ V⁻¹ - (2W K0 + 2Q K- + 2Y K+)` on the block.
    pub residual: f64,
    /// Coefficients read off the numerical matrix by projection onto the generators.
    pub fitted: TransformedCoeffs,
    pub analytic: TransformedCoeffs,
}

impl GeneratorAudit {
    /// Per-component gaps `(|ΔW|, |ΔQ|, |ΔY|)`.
    pub fn component_gaps(&self) -> (f64, f64, f64) {
        (
            (self.fitted.w - self.analytic.w).norm(),
            (self.fitted.q - self.analytic.q).norm(),
            (self.fitted.y - self.analytic.y).norm(),
        )
    }
}

/// Central-difference step of the audit.
pub const AUDIT_STEP: f64 = 1e-6;
/// Audit tolerance.
pub const AUDIT_TOLERANCE: f64 = 1e-5;

fn audit_block(rep: &Representation) -> usize {
    match rep.label() {
        RepLabel::Spin { .. } => rep.dim(),
        RepLabel::Cutoff { n } => n / 2,
    }
}

fn project(m: &CMat, basis: &CMat, block: usize) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for j in 0..block {
        for i in 0..block {
            num += basis[(i, j)].conj() * m[(i, j)];
            den += basis[(i, j)].norm_sqr();
        }
    }
    num / den
}

/// Builds `V H V⁻¹ + i V̇ V⁻¹` with `V̇` from central differences of the
/// factorized group element and compares it with the analytic coefficients.
pub fn generator_audit(traj: &Trajectory, rep: &Representation, t: f64, h: f64) -> Result<GeneratorAudit> {
    let (lo, hi) = traj.span();
    if !(t - h >= lo && t + h <= hi) {
        return Err(Error::Domain {
            t,
            lo: lo + h,
            hi: hi - h,
        });
    }
    let element = |tt: f64| -> Result<CMat> { build_group_element(&traj.state_at(tt)?.gauss(), rep) };
    let g = traj.state_at(t)?.gauss();
    let v = build_group_element(&g, rep)?;
    let vinv = invert_group_element(&g, rep)?;
    let vdot = (element(t + h)? - element(t - h)?) / c(2.0 * h, 0.0);
    let coeffs = traj.coeffs().eval(t).map_err(|e| e.at_time(t))?;
    let ham = h_matrix_from(&coeffs, rep);
    let transformed = &v * ham * &vinv + vdot * &vinv * I;

    let p = scan_point(traj, t)?;
    let a = p.coeffs;
    let expected = rep.k0() * (a.w * 2.0) + rep.kminus() * (a.q * 2.0) + rep.kplus() * (a.y * 2.0);
    let block = audit_block(rep);
    let diff = &transformed - expected;
    let mut residual = 0.0_f64;
    for j in 0..block {
        for i in 0..block {
            residual = residual.max(diff[(i, j)].norm());
        }
    }
    let fitted = TransformedCoeffs {
        w: project(&transformed, rep.k0(), block) / 2.0,
        q: project(&transformed, rep.kminus(), block) / 2.0,
        y: project(&transformed, rep.kplus(), block) / 2.0,
    };
    Ok(GeneratorAudit {
        t,
        block,
        residual,
        fitted,
        analytic: a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_su11_boson_rep, build_su2_rep};
    use crate::flow::{integrate_flow, integrate_flow_with_law, stationary_state, IntegratorConfig, ThetaZeroLaw};
    use crate::linalg::cr;
    use crate::model::{CoefficientSet, TimeProfile};

    const SU11: AlgebraKind = AlgebraKind::Su11;
    const SU2: AlgebraKind = AlgebraKind::Su2;

    fn identity_state() -> FlowState {
        FlowState {
            t: 0.0,
            phi: 0.0,
            varphi: 0.0,
            theta_zero: 1.0,
        }
    }

    #[test]
    fn identity_transformation_is_a_fixed_point() {
        let v = Coeffs {
            omega: c(0.7, -0.2),
            alpha: c(0.1, 0.3),
            beta: c(-0.4, 0.05),
        };
        for kind in [SU11, SU2] {
            let tc = transformed_coeffs(&identity_state(), &FlowDerivative::default(), &v, kind).unwrap();
            assert_eq!((tc.w, tc.q, tc.y), (v.omega, v.alpha, v.beta));
        }
    }

    #[test]
    fn swanson_stationary_point_cancels_q() {
        let v = Coeffs {
            omega: cr(1.0),
            alpha: cr(0.2),
            beta: cr(0.2),
        };
        let phi = 0.208_712_152_522_079_8;
        let s = FlowState {
            t: 0.0,
            phi,
            varphi: 0.0,
            theta_zero: -0.7,
        };
        let tc = transformed_coeffs(&s, &FlowDerivative::default(), &v, SU11).unwrap();
        assert!(tc.q.norm() < 1e-15);
        let rw = re_w(&s, &v.polar(), SU11);
        assert!((rw - 0.91651514).abs() < 1e-8);
        assert!((rw - 0.84f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn imaginary_omega_flags_im_w() {
        let v = Coeffs {
            omega: c(0.0, 1.0),
            alpha: cr(0.0),
            beta: cr(0.0),
        };
        let tc = transformed_coeffs(&identity_state(), &FlowDerivative::default(), &v, SU11).unwrap();
        assert_eq!(tc.w, c(0.0, 1.0));
    }

    #[test]
    fn re_w_examples() {
        let s = FlowState {
            t: 0.0,
            phi: 0.3,
            varphi: std::f64::consts::PI,
            theta_zero: 1.0,
        };
        let p = Coeffs {
            omega: cr(1.0),
            alpha: cr(0.0),
            beta: cr(0.0),
        }
        .polar();
        assert_eq!(re_w(&s, &p, SU2), 1.0);
        let p = Coeffs {
            omega: cr(1.0),
            alpha: cr(0.0),
            beta: cr(0.5),
        }
        .polar();
        assert!((re_w(&s, &p, SU2) - (1.0 - 2.0 * 0.3 * 0.5)).abs() < 1e-15);
    }

    fn swanson_traj(theta_shift: f64) -> Trajectory {
        let c0 = CoefficientSet::constant(cr(1.0), cr(0.2), cr(0.2));
        let mut s0 = stationary_state(0.0, &c0.eval(0.0).unwrap(), SU11).unwrap();
        s0.theta_zero += theta_shift;
        integrate_flow(&c0, SU11, &s0, 5.0, &IntegratorConfig::default()).unwrap()
    }

    #[test]
    fn swanson_scan_is_certified() {
        let r = residual_scan(&swanson_traj(0.0), DEFAULT_SCAN_SAMPLES).unwrap();
        assert!(r.max() < 1e-8, "{r:?}");
        assert!(r.max_re_w_gap < 1e-9);
    }

    #[test]
    fn inconsistent_theta_zero_breaks_y() {
        let r = residual_scan(&swanson_traj(0.5), DEFAULT_SCAN_SAMPLES).unwrap();
        assert!(r.max_abs_y > 1e-3, "{r:?}");
        assert!(r.max_abs_q < 1e-8);
    }

    #[test]
    fn pure_omega_scan_vanishes() {
        let c0 = CoefficientSet::new(
            TimeProfile::Sinusoid {
                amp: cr(0.2),
                frequency: 2.0,
                phase0: 0.3,
                offset: cr(1.0),
            },
            TimeProfile::constant(0.0, 0.0),
            TimeProfile::constant(0.0, 0.0),
        );
        // Here Y = -(D/2) ω φ² ϑ+ / ϑ0 exactly, so a near-identity start is used.
        let s0 = FlowState {
            t: 0.0,
            phi: 1e-5,
            varphi: 0.0,
            theta_zero: 1.0,
        };
        let traj = integrate_flow(&c0, SU11, &s0, 5.0, &IntegratorConfig::default()).unwrap();
        let r = residual_scan(&traj, 200).unwrap();
        assert!(r.max() < 1e-12, "{r:?}");
    }

    #[test]
    fn generator_audit_matches_analytic_coefficients() {
        let c0 = CoefficientSet::new(
            TimeProfile::Sinusoid {
                amp: cr(0.1),
                frequency: 1.0,
                phase0: 0.0,
                offset: cr(1.0),
            },
            TimeProfile::constant(0.05, 0.0),
            TimeProfile::constant(0.05, 0.0),
        );
        let rep = build_su2_rep(1.0).unwrap();
        let s0 = stationary_state(0.0, &c0.eval(0.0).unwrap(), SU2).unwrap();
        let traj = integrate_flow(&c0, SU2, &s0, 5.0, &IntegratorConfig::default()).unwrap();
        for t in [0.5, 2.0, 4.5] {
            let a = generator_audit(&traj, &rep, t, AUDIT_STEP).unwrap();
            assert!(a.residual < AUDIT_TOLERANCE, "{a:?}");
        }

        // Off the constraint manifold all three components are nonzero.
        let c1 = CoefficientSet::constant(c(1.0, 0.1), c(0.2, -0.1), c(0.15, 0.05));
        let s1 = FlowState {
            t: 0.0,
            phi: 0.2,
            varphi: 0.4,
            theta_zero: 0.9,
        };
        let rep = build_su11_boson_rep(40).unwrap();
        let traj = integrate_flow_with_law(
            &c1,
            SU11,
            &s1,
            1.0,
            &IntegratorConfig::default(),
            ThetaZeroLaw::ImWBalance,
        )
        .unwrap();
        let a = generator_audit(&traj, &rep, 0.5, AUDIT_STEP).unwrap();
        assert!(a.residual < AUDIT_TOLERANCE, "{a:?}");
        let (dw, dq, dy) = a.component_gaps();
        assert!(dw.max(dq).max(dy) < AUDIT_TOLERANCE);
    }

    #[test]
    fn general_gauss_parameters_pass_the_audit() {
        // Arbitrary smooth ϑ(t), not a flow solution, exercises every term.
        let rep = build_su2_rep(1.5).unwrap();
        let v = Coeffs {
            omega: c(0.8, 0.3),
            alpha: c(-0.2, 0.4),
            beta: c(0.3, 0.1),
        };
        let par = |t: f64| GaussParams {
            theta_plus: c(0.3 * t.cos(), 0.2 * t),
            theta_zero: c(1.0 + 0.2 * t.sin(), 0.3 * t),
            theta_minus: c(-0.1 + 0.2 * t * t, 0.4 * t.sin()),
            theta: None,
        };
        let rate = |t: f64| GaussRates {
            theta_plus: c(-0.3 * t.sin(), 0.2),
            theta_zero: c(0.2 * t.cos(), 0.3),
            theta_minus: c(0.4 * t, 0.4 * t.cos()),
        };
        let (t, h) = (0.7, 1e-6);
        let g = par(t);
        let vm = build_group_element(&g, &rep).unwrap();
        let vi = invert_group_element(&g, &rep).unwrap();
        let vdot = (build_group_element(&par(t + h), &rep).unwrap() - build_group_element(&par(t - h), &rep).unwrap())
            / c(2.0 * h, 0.0);
        let m = &vm * h_matrix_from(&v, &rep) * &vi + vdot * &vi * I;
        let a = transformed_from_gauss(&g, &rate(t), &v, SU2).unwrap();
        let e = rep.k0() * (a.w * 2.0) + rep.kminus() * (a.q * 2.0) + rep.kplus() * (a.y * 2.0);
        let err = crate::linalg::max_norm(&(m - e));
        assert!(err < 1e-7, "{err:e}");
    }
}
