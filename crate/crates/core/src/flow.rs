//! Constraint flow for the reduced parameters `(φ, ϕ, ϑ0)`.
//!
//! The first two equations are `Q = 0` written in polar form. The third fixes
//! `ϑ0`; two laws are available, see [`ThetaZeroLaw`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraKind;
use crate::decomposition::{GaussParams, ReducedParams};
use crate::error::{Error, Result};
use crate::model::{CoefficientSet, Coeffs, PolarCoeffs};
use crate::ode::{integrate, DenseSolution, StepStats};

pub use crate::ode::{IntegratorConfig, Method};

/// `|φ|` below which the flow is singular.
pub const PHI_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub phi: f64,
    pub varphi: f64,
    pub theta_zero: f64,
}

impl FlowState {
    /// `χ = -(D/2) φ² - ϑ0`
    pub fn chi(&self, kind: AlgebraKind) -> f64 {
        -(kind.d() / 2.0) * self.phi * self.phi - self.theta_zero
    }

    pub fn reduced(&self, kind: AlgebraKind) -> ReducedParams {
        ReducedParams {
            phi: self.phi,
            varphi: self.varphi,
            chi: self.chi(kind),
            z_mod: f64::NAN,
        }
    }

    pub fn gauss(&self) -> GaussParams {
        let e = Complex64::from_polar(1.0, self.varphi);
        GaussParams {
            theta_plus: -self.phi * e.conj(),
            theta_zero: Complex64::new(self.theta_zero, 0.0),
            theta_minus: -self.phi * e,
            theta: None,
        }
    }

    fn as_vec(&self) -> [f64; 3] {
        [self.phi, self.varphi, self.theta_zero]
    }

    fn from_slice(t: f64, y: &[f64]) -> Self {
        FlowState {
            t,
            phi: y[0],
            varphi: y[1],
            theta_zero: y[2],
        }
    }
}

/// Time derivatives of the flow variables.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlowDerivative {
    pub dphi: f64,
    pub dvarphi: f64,
    pub dtheta_zero: f64,
}

/// Evolution law for `ϑ0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaZeroLaw {
    /// `ϑ0' = (2ϑ0/φ)[-2φ|ω| sin φω + |α| sin(φα - ϕ) + (χ - Dφ²)|β| sin(ϕ + φβ)]`.
    #[default]
    AsPrinted,
    /// `ϑ0' = -2ϑ0 (|ω| sin φω + Dφ|β| sin(ϕ + φβ))`, which keeps `Im W = 0`
    /// once `Q = 0`.
    ImWBalance,
}

/// Right-hand side of the constraint flow.
pub fn flow_rhs(s: &FlowState, p: &PolarCoeffs, kind: AlgebraKind) -> Result<FlowDerivative> {
    flow_rhs_with_law(s, p, kind, ThetaZeroLaw::AsPrinted)
}

pub fn flow_rhs_with_law(
    s: &FlowState,
    p: &PolarCoeffs,
    kind: AlgebraKind,
    law: ThetaZeroLaw,
) -> Result<FlowDerivative> {
    let phi = s.phi;
    if !(phi.abs() >= PHI_GUARD) {
        return Err(Error::SingularFlow {
            t: s.t,
            reason: format!("|phi| = {:e} below {PHI_GUARD:e}", phi.abs()),
        });
    }
    let d = kind.d();
    let (sw, cw) = p.arg_omega.sin_cos();
    let (sa, ca) = (p.arg_alpha - s.varphi).sin_cos();
    let (sb, cb) = (s.varphi + p.arg_beta).sin_cos();

    let dvarphi = 2.0 * p.mod_omega * cw - 2.0 * (p.mod_alpha / phi) * ca + d * phi * p.mod_beta * cb;
    let dphi = -2.0 * phi * p.mod_omega * sw + 2.0 * p.mod_alpha * sa - d * phi * phi * p.mod_beta * sb;
    let dtheta_zero = match law {
        ThetaZeroLaw::AsPrinted => {
            let chi = s.chi(kind);
            (2.0 * s.theta_zero / phi)
                * (-2.0 * phi * p.mod_omega * sw + p.mod_alpha * sa + (chi - d * phi * phi) * p.mod_beta * sb)
        }
        ThetaZeroLaw::ImWBalance => -2.0 * s.theta_zero * (p.mod_omega * sw + d * phi * p.mod_beta * sb),
    };
    Ok(FlowDerivative {
        dphi,
        dvarphi,
        dtheta_zero,
    })
}

/// Dense solution of the constraint flow together with its inputs.
#[derive(Debug, Clone)]
pub struct Trajectory {
    sol: DenseSolution,
    coeffs: CoefficientSet,
    kind: AlgebraKind,
    law: ThetaZeroLaw,
}

impl Trajectory {
    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }
    pub fn law(&self) -> ThetaZeroLaw {
        self.law
    }
    pub fn coeffs(&self) -> &CoefficientSet {
        &self.coeffs
    }
    pub fn span(&self) -> (f64, f64) {
        self.sol.span()
    }
    pub fn times(&self) -> &[f64] {
        self.sol.times()
    }
    pub fn stats(&self) -> StepStats {
        self.sol.stats
    }

    /// States at the integrator nodes.
    pub fn states(&self) -> Vec<FlowState> {
        self.sol
            .times()
            .iter()
            .zip(self.sol.states())
            .map(|(&t, y)| FlowState::from_slice(t, y))
            .collect()
    }

    /// Derivatives stored at the integrator nodes.
    pub fn node_derivatives(&self) -> Vec<FlowDerivative> {
        self.sol
            .derivatives()
            .iter()
            .map(|dy| FlowDerivative {
                dphi: dy[0],
                dvarphi: dy[1],
                dtheta_zero: dy[2],
            })
            .collect()
    }

    pub fn initial(&self) -> FlowState {
        FlowState::from_slice(self.sol.times()[0], &self.sol.states()[0])
    }

    pub fn final_state(&self) -> FlowState {
        let k = self.sol.times().len() - 1;
        FlowState::from_slice(self.sol.times()[k], &self.sol.states()[k])
    }

    /// Interpolated state.
    pub fn state_at(&self, t: f64) -> Result<FlowState> {
        Ok(FlowState::from_slice(t, &self.sol.eval(t)?))
    }

    /// Flow right-hand side at the interpolated state.
    pub fn derivative_at(&self, t: f64) -> Result<FlowDerivative> {
        let s = self.state_at(t)?;
        let p = self.coeffs.eval(t).map_err(|e| e.at_time(t))?.polar();
        flow_rhs_with_law(&s, &p, self.kind, self.law)
    }
}

/// Integrates the flow from `initial.t` to `t1` with the printed `ϑ0` law.
pub fn integrate_flow(
    c: &CoefficientSet,
    kind: AlgebraKind,
    initial: &FlowState,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_flow_with_law(c, kind, initial, t1, cfg, ThetaZeroLaw::AsPrinted)
}

pub fn integrate_flow_with_law(
    c: &CoefficientSet,
    kind: AlgebraKind,
    initial: &FlowState,
    t1: f64,
    cfg: &IntegratorConfig,
    law: ThetaZeroLaw,
) -> Result<Trajectory> {
    if !(initial.phi.abs() >= PHI_GUARD) {
        return Err(Error::SingularFlow {
            t: initial.t,
            reason: "initial phi is zero".into(),
        });
    }
    if initial.theta_zero == 0.0 || !initial.theta_zero.is_finite() {
        return Err(Error::SingularFlow {
            t: initial.t,
            reason: "initial theta_zero is zero".into(),
        });
    }
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let p = c.eval(t).map_err(|e| e.at_time(t))?.polar();
        let d = flow_rhs_with_law(&FlowState::from_slice(t, y), &p, kind, law)?;
        dy[0] = d.dphi;
        dy[1] = d.dvarphi;
        dy[2] = d.dtheta_zero;
        Ok(())
    };
    let guard = |t0: f64, y0: &[f64], t1: f64, y1: &[f64]| -> Result<()> {
        for (i, name) in [(0usize, "phi"), (2, "theta_zero")] {
            let crossed = y0[i].signum() != y1[i].signum() || y1[i].abs() < PHI_GUARD;
            if crossed {
                let frac = y0[i] / (y0[i] - y1[i]);
                let tc = if frac.is_finite() {
                    t0 + frac.clamp(0.0, 1.0) * (t1 - t0)
                } else {
                    t1
                };
                return Err(Error::SingularFlow {
                    t: tc,
                    reason: format!("{name} crossed zero"),
                });
            }
        }
        Ok(())
    };
    let sol = integrate(rhs, initial.t, &initial.as_vec(), t1, cfg, guard)?;
    Ok(Trajectory {
        sol,
        coeffs: c.clone(),
        kind,
        law,
    })
}

/// Fixed point of the flow at the given coefficients, with `ϑ0` chosen so
/// that `Y` vanishes.
///
/// For real coefficients `ϕ = 0` and `φ` is the smaller-magnitude root of
/// `Dβφ² + 2ωφ - 2α = 0`. For complex coefficients `ϑ-` is the
/// smaller-magnitude root of `(D/2)βϑ-² - ωϑ- - α = 0`; `ϑ0` is then the real
/// part of the consistent value and the `ϑ0` equation is stationary only if
/// `Im(ω - Dβϑ-) = 0`.
pub fn stationary_state(t0: f64, v: &Coeffs, kind: AlgebraKind) -> Result<FlowState> {
    let d = kind.d();
    let (w, a, b) = (v.omega, v.alpha, v.beta);
    if a.norm() == 0.0 {
        return Err(Error::NoStationaryPoint(
            "alpha = 0 puts the fixed point at phi = 0".into(),
        ));
    }
    let real = v.is_real();
    // Roots of (D/2) b x² - w x - a = 0, x = ϑ-.
    let theta_minus = if b.norm() == 0.0 {
        if w.norm() == 0.0 {
            return Err(Error::NoStationaryPoint("omega = beta = 0".into()));
        }
        -a / w
    } else {
        let qa = b * (d / 2.0);
        let disc = w * w + 4.0 * qa * a;
        if real && disc.re < 0.0 {
            return Err(Error::NoStationaryPoint(format!(
                "omega² + 2D·alpha·beta = {} < 0",
                disc.re
            )));
        }
        let sq = if real {
            Complex64::new(disc.re.sqrt(), 0.0)
        } else {
            disc.sqrt()
        };
        // Stable pair: x1 = (w + s·sq)/(2qa), x2 = -2a/(w + s·sq).
        let s = if (w.conj() * sq).re >= 0.0 { 1.0 } else { -1.0 };
        let big = w + sq * s;
        let x1 = big / (qa * 2.0);
        let x2 = -(a * 2.0) / big;
        if x1.norm() < x2.norm() {
            x1
        } else {
            x2
        }
    };
    let (phi, varphi) = if real {
        (-theta_minus.re, 0.0)
    } else {
        let m = -theta_minus;
        (m.norm(), m.im.atan2(m.re))
    };
    if !(phi.abs() >= PHI_GUARD) {
        return Err(Error::NoStationaryPoint("fixed point has phi = 0".into()));
    }

    // Y = 0 at rest: b χ² + w ϑ+ χ - (D/2) a ϑ+² = 0. One root gives ϑ0 = 0.
    let theta_plus = -phi * Complex64::from_polar(1.0, -varphi);
    let base = Complex64::new(-(d / 2.0) * phi * phi, 0.0);
    let chi = if b.norm() == 0.0 {
        if w.norm() == 0.0 {
            return Err(Error::NoStationaryPoint("omega = beta = 0".into()));
        }
        a * theta_plus * (d / 2.0) / w
    } else {
        let disc = (w * w + a * b * (2.0 * d)) * theta_plus * theta_plus;
        let sq = disc.sqrt();
        let r1 = (-w * theta_plus + sq) / (b * 2.0);
        let r2 = (-w * theta_plus - sq) / (b * 2.0);
        if (base - r1).norm() >= (base - r2).norm() {
            r1
        } else {
            r2
        }
    };
    let theta_zero = (base - chi).re;
    if !(theta_zero.abs() > PHI_GUARD) {
        return Err(Error::NoStationaryPoint("consistent theta_zero vanishes".into()));
    }
    Ok(FlowState {
        t: t0,
        phi,
        varphi,
        theta_zero,
    })
}

/// `ϑ-' = 2i[ωϑ- + α - (D/2)βϑ-²]`, the `Q = 0` condition solved for `ϑ-'`.
pub fn riccati_rhs(theta_minus: Complex64, v: &Coeffs, kind: AlgebraKind) -> Complex64 {
    let i2 = Complex64::new(0.0, 2.0);
    i2 * (v.omega * theta_minus + v.alpha - v.beta * theta_minus * theta_minus * (kind.d() / 2.0))
}

/// Dense solution of the Riccati form of the `K-` constraint.
#[derive(Debug, Clone)]
pub struct RiccatiTrajectory {
    sol: DenseSolution,
}

impl RiccatiTrajectory {
    pub fn span(&self) -> (f64, f64) {
        self.sol.span()
    }

    pub fn theta_minus_at(&self, t: f64) -> Result<Complex64> {
        let y = self.sol.eval(t)?;
        Ok(Complex64::new(y[0], y[1]))
    }

    pub fn stats(&self) -> StepStats {
        self.sol.stats
    }
}

pub fn integrate_riccati(
    c: &CoefficientSet,
    kind: AlgebraKind,
    t0: f64,
    theta_minus0: Complex64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<RiccatiTrajectory> {
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let v = c.eval(t).map_err(|e| e.at_time(t))?;
        let r = riccati_rhs(Complex64::new(y[0], y[1]), &v, kind);
        dy[0] = r.re;
        dy[1] = r.im;
        Ok(())
    };
    let sol = integrate(rhs, t0, &[theta_minus0.re, theta_minus0.im], t1, cfg, |_, _, _, _| {
        Ok(())
    })?;
    Ok(RiccatiTrajectory { sol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cr};
    use crate::model::TimeProfile;

    const SU11: AlgebraKind = AlgebraKind::Su11;
    const SU2: AlgebraKind = AlgebraKind::Su2;

    fn swanson() -> CoefficientSet {
        CoefficientSet::constant(cr(1.0), cr(0.2), cr(0.2))
    }

    /// Smaller-magnitude real root of `a x² + b x + c` by bisection.
    fn small_root(a: f64, b: f64, cc: f64) -> f64 {
        let f = |x: f64| (a * x + b) * x + cc;
        let r = (b * b - 4.0 * a * cc).sqrt();
        let guess = (-b + b.signum() * r) / (2.0 * a);
        let other = cc / (a * guess);
        let target = if other.abs() < guess.abs() { other } else { guess };
        let (mut lo, mut hi) = (target - 0.01, target + 0.01);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo).signum() == f(mid).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn pure_omega_rotates_phase() {
        let p = Coeffs {
            omega: cr(1.0),
            alpha: cr(0.0),
            beta: cr(0.0),
        }
        .polar();
        let s = FlowState {
            t: 0.0,
            phi: 0.3,
            varphi: 1.1,
            theta_zero: -0.7,
        };
        let d = flow_rhs(&s, &p, SU11).unwrap();
        assert_eq!((d.dvarphi, d.dphi, d.dtheta_zero), (2.0, 0.0, 0.0));
    }

    #[test]
    fn swanson_root_is_stationary() {
        let root = small_root(-2.0 * 0.2, 2.0, -0.4);
        assert!((root - 0.20871215).abs() < 1e-8);
        let s = FlowState {
            t: 0.0,
            phi: root,
            varphi: 0.0,
            theta_zero: 3.7,
        };
        let d = flow_rhs(&s, &swanson().eval(0.0).unwrap().polar(), SU11).unwrap();
        assert!(
            d.dvarphi.abs() < 1e-13 && d.dphi.abs() < 1e-13 && d.dtheta_zero.abs() < 1e-13,
            "{d:?}"
        );
    }

    #[test]
    fn zero_phi_is_singular() {
        let s = FlowState {
            t: 2.5,
            phi: 0.0,
            varphi: 0.0,
            theta_zero: 1.0,
        };
        let err = flow_rhs(&s, &swanson().eval(0.0).unwrap().polar(), SU11).unwrap_err();
        assert!(matches!(err, Error::SingularFlow { t, .. } if t == 2.5));
    }

    #[test]
    fn stationary_swanson_and_spin() {
        let s = stationary_state(0.0, &swanson().eval(0.0).unwrap(), SU11).unwrap();
        assert!((s.phi - 0.20871215).abs() < 1e-8);
        assert_eq!(s.varphi, 0.0);
        assert!((s.theta_zero + 0.95643924).abs() < 1e-8);

        let v = Coeffs {
            omega: cr(1.0),
            alpha: cr(0.1),
            beta: cr(0.1),
        };
        let s = stationary_state(0.0, &v, SU2).unwrap();
        assert!((s.phi - small_root(0.2, 2.0, -0.2)).abs() < 1e-12);
        assert!((s.phi - 0.09901951).abs() < 1e-8);

        let v = Coeffs {
            omega: cr(1.0),
            alpha: cr(0.0),
            beta: cr(0.0),
        };
        assert!(matches!(
            stationary_state(0.0, &v, SU11),
            Err(Error::NoStationaryPoint(_))
        ));

        let v = Coeffs {
            omega: cr(1.0),
            alpha: cr(0.5),
            beta: cr(0.6),
        };
        assert!(matches!(
            stationary_state(0.0, &v, SU11),
            Err(Error::NoStationaryPoint(_))
        ));
    }

    #[test]
    fn stationary_complex_coefficients_cancel_q() {
        let v = Coeffs {
            omega: c(1.0, 0.05),
            alpha: c(0.1, 0.07),
            beta: c(0.15, -0.02),
        };
        for kind in [SU11, SU2] {
            let s = stationary_state(0.0, &v, kind).unwrap();
            let g = s.gauss();
            assert!(riccati_rhs(g.theta_minus, &v, kind).norm() < 1e-14);
            let d = flow_rhs(&s, &v.polar(), kind).unwrap();
            assert!(d.dphi.abs() < 1e-13 && d.dvarphi.abs() < 1e-13);
        }
    }

    #[test]
    fn stationary_start_persists() {
        let c0 = swanson();
        let s0 = stationary_state(0.0, &c0.eval(0.0).unwrap(), SU11).unwrap();
        let traj = integrate_flow(&c0, SU11, &s0, 10.0, &IntegratorConfig::default()).unwrap();
        for s in traj.states() {
            assert!((s.phi - s0.phi).abs() < 1e-9);
            assert!(s.varphi.abs() < 1e-9);
            assert!((s.theta_zero - s0.theta_zero).abs() < 1e-9);
        }
    }

    #[test]
    fn pure_omega_phase_is_linear() {
        let c0 = CoefficientSet::constant(cr(1.0), cr(0.0), cr(0.0));
        let s0 = FlowState {
            t: 0.0,
            phi: 0.4,
            varphi: 0.2,
            theta_zero: 1.3,
        };
        let traj = integrate_flow(&c0, SU2, &s0, 5.0, &IntegratorConfig::default()).unwrap();
        let s = traj.state_at(5.0).unwrap();
        assert!((s.varphi - 10.2).abs() < 1e-10);
        assert!((s.phi - 0.4).abs() < 1e-12);
    }

    fn driven() -> CoefficientSet {
        CoefficientSet::new(
            TimeProfile::Sinusoid {
                amp: cr(0.3),
                frequency: 1.3,
                phase0: 0.0,
                offset: cr(1.0),
            },
            TimeProfile::constant(0.1, 0.02),
            TimeProfile::constant(0.12, -0.01),
        )
    }

    fn balanced(c0: &CoefficientSet, s0: &FlowState, t1: f64, cfg: &IntegratorConfig) -> Trajectory {
        integrate_flow_with_law(c0, SU11, s0, t1, cfg, ThetaZeroLaw::ImWBalance).unwrap()
    }

    #[test]
    fn printed_law_blows_up_for_complex_drive() {
        let s0 = FlowState {
            t: 0.0,
            phi: 0.15,
            varphi: 0.1,
            theta_zero: -1.0,
        };
        let r = integrate_flow(&driven(), SU11, &s0, 3.0, &IntegratorConfig::default());
        assert!(matches!(r, Err(Error::Stiffness { .. })), "{r:?}");
    }

    #[test]
    fn convergence_order_at_least_four() {
        let c0 = driven();
        let s0 = FlowState {
            t: 0.0,
            phi: 0.15,
            varphi: 0.1,
            theta_zero: -1.0,
        };
        let run = |h: f64| {
            let cfg = IntegratorConfig {
                method: Method::FixedRk4,
                max_step: h,
                ..IntegratorConfig::default()
            };
            balanced(&c0, &s0, 2.0, &cfg).final_state()
        };
        let reference = balanced(&c0, &s0, 2.0, &IntegratorConfig::with_tolerances(1e-13, 1e-15)).final_state();
        let err = |s: FlowState| (s.phi - reference.phi).abs() + (s.varphi - reference.varphi).abs();
        let (e1, e2) = (err(run(0.1)), err(run(0.05)));
        let order = (e1 / e2).log2();
        assert!(order >= 3.8, "observed order {order}");

        let a = balanced(&c0, &s0, 2.0, &IntegratorConfig::with_tolerances(1e-6, 1e-8)).final_state();
        let b = balanced(&c0, &s0, 2.0, &IntegratorConfig::with_tolerances(5e-7, 5e-9)).final_state();
        assert!(err(b) < err(a));
    }

    #[test]
    fn riccati_agrees_with_polar_flow() {
        let c0 = driven();
        let s0 = FlowState {
            t: 0.0,
            phi: 0.15,
            varphi: 0.1,
            theta_zero: -1.0,
        };
        let cfg = IntegratorConfig::with_tolerances(1e-12, 1e-14);
        let traj = balanced(&c0, &s0, 3.0, &cfg);
        let ric = integrate_riccati(&c0, SU11, 0.0, s0.gauss().theta_minus, 3.0, &cfg).unwrap();
        for k in 0..=30 {
            let t = k as f64 * 0.1;
            let a = traj.state_at(t).unwrap().gauss().theta_minus;
            let b = ric.theta_minus_at(t).unwrap();
            assert!((a - b).norm() < 1e-7, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn riccati_examples() {
        let v = Coeffs {
            omega: cr(1.0),
            alpha: c(0.3, 0.1),
            beta: cr(0.2),
        };
        assert_eq!(riccati_rhs(cr(0.0), &v, SU11), c(-0.2, 0.6));
        let v = Coeffs {
            omega: cr(1.0),
            alpha: cr(0.0),
            beta: cr(0.0),
        };
        let r = riccati_rhs(c(0.3, 0.4), &v, SU2);
        assert!((r - c(0.0, 2.0) * c(0.3, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn phi_crossing_reports_time() {
        // ω = 0, real α, β = 0 and ϕ = π/2 drive φ' = -2|α| straight through 0.
        let c0 = CoefficientSet::constant(cr(0.0), cr(0.5), cr(0.0));
        let s0 = FlowState {
            t: 0.0,
            phi: 0.5,
            varphi: std::f64::consts::FRAC_PI_2,
            theta_zero: 1.0,
        };
        match integrate_flow(&c0, SU11, &s0, 5.0, &IntegratorConfig::default()) {
            Err(Error::SingularFlow { t, .. }) => assert!(t > 0.0 && t < 5.0),
            other => panic!("expected singular flow, got {other:?}"),
        }
    }

    #[test]
    fn theta_zero_sign_is_conserved() {
        let spin = CoefficientSet::new(
            TimeProfile::Sinusoid {
                amp: cr(0.1),
                frequency: 1.0,
                phase0: 0.0,
                offset: cr(1.0),
            },
            TimeProfile::constant(0.05, 0.0),
            TimeProfile::constant(0.05, 0.0),
        );
        let s0 = stationary_state(0.0, &spin.eval(0.0).unwrap(), SU2).unwrap();
        let traj = integrate_flow(&spin, SU2, &s0, 5.0, &IntegratorConfig::default()).unwrap();
        assert!(traj.states().iter().all(|s| s.theta_zero < 0.0));

        for th in [-1.0, 0.8] {
            let s0 = FlowState {
                t: 0.0,
                phi: 0.15,
                varphi: 0.1,
                theta_zero: th,
            };
            let traj = balanced(&driven(), &s0, 3.0, &IntegratorConfig::default());
            assert!(traj.states().iter().all(|s| s.theta_zero.signum() == th.signum()));
        }
    }
}
