//! Closed-form states `ψ_n(t) = e^{σ i λ_n I(t)} V⁻¹(t) e_n` with
//! `I(t) = ∫ 2 Re W`, the metric inner product `<a|V†V|b>`, and the drift of
//! the naive norm when `Im W ≠ 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{RepLabel, Representation};
use crate::decomposition::{group_element_with_log, inverse_with_log, log_near, ContinuousLog};
use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::linalg::{vec_norm, CMat, CVec, I};
use crate::ode::GAUSS5;
use crate::transform::{re_w, scan_point};

/// Sign in front of the accumulated phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Sigma {
    Plus,
    #[default]
    Minus,
}

impl Sigma {
    pub fn value(self) -> f64 {
        match self {
            Sigma::Plus => 1.0,
            Sigma::Minus => -1.0,
        }
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sigma::Plus),
            -1 => Ok(Sigma::Minus),
            other => Err(Error::invalid(format!("sign convention must be +1 or -1, got {other}"))),
        }
    }
}

/// A `K0` eigenvector selected by its label (`n` or `m`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenIndex {
    pub label: f64,
    pub position: usize,
    pub lambda: f64,
}

impl EigenIndex {
    pub fn new(rep: &Representation, label: f64) -> Result<Self> {
        let position = rep.basis_position(label)?;
        Ok(EigenIndex {
            label,
            position,
            lambda: rep.k0_diagonal()[position],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub amplitudes: CVec,
}

impl StateVector {
    pub fn new(t: f64, amplitudes: CVec) -> Self {
        StateVector { t, amplitudes }
    }

    pub fn basis(dim: usize, position: usize, t: f64) -> Self {
        let mut v = CVec::zeros(dim);
        v[position] = Complex64::new(1.0, 0.0);
        StateVector { t, amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amplitudes)
    }
}

/// Cumulative `I(t) = ∫_{t0}^t 2 re_w`, stored at the trajectory nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLaw {
    pub times: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub sigma: Sigma,
}

fn g_at(traj: &Trajectory, t: f64) -> Result<f64> {
    let s = traj.state_at(t)?;
    let p = traj.coeffs().eval(t).map_err(|e| e.at_time(t))?.polar();
    Ok(2.0 * re_w(&s, &p, traj.kind()))
}

fn gl5_real(traj: &Trajectory, a: f64, b: f64) -> Result<f64> {
    let h = b - a;
    let mut acc = 0.0;
    for &(x, w) in &GAUSS5 {
        acc += w * g_at(traj, a + x * h)?;
    }
    Ok(acc * h)
}

/// Phase integral accumulated step by step on the flow nodes.
pub fn phase_integral(traj: &Trajectory, sigma: Sigma) -> Result<PhaseLaw> {
    let times = traj.times().to_vec();
    let mut cumulative = Vec::with_capacity(times.len());
    cumulative.push(0.0);
    for k in 1..times.len() {
        let prev = cumulative[k - 1];
        cumulative.push(prev + gl5_real(traj, times[k - 1], times[k])?);
    }
    Ok(PhaseLaw {
        times,
        cumulative,
        sigma,
    })
}

impl PhaseLaw {
    fn segment(&self, t: f64) -> usize {
        let p = self.times.partition_point(|&x| x <= t);
        p.saturating_sub(1).min(self.times.len().saturating_sub(2))
    }

    /// `I(t)` for any `t` in the trajectory span.
    pub fn value_at(&self, traj: &Trajectory, t: f64) -> Result<f64> {
        let (lo, hi) = (self.times[0], *self.times.last().unwrap());
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain { t, lo, hi });
        }
        if self.times.len() == 1 {
            return Ok(0.0);
        }
        let k = self.segment(t);
        if t == self.times[k] {
            return Ok(self.cumulative[k]);
        }
        Ok(self.cumulative[k] + gl5_real(traj, self.times[k], t)?)
    }
}

/// Everything needed to evaluate closed-form states along one trajectory.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    traj: Trajectory,
    rep: Representation,
    phase: PhaseLaw,
    /// Unwrapped `arg ϑ0` at the trajectory nodes.
    node_args: Vec<f64>,
}

impl ClosedForm {
    pub fn new(traj: Trajectory, rep: Representation, sigma: Sigma) -> Result<Self> {
        if traj.kind() != rep.kind() {
            return Err(Error::invalid(
                "trajectory and representation belong to different algebras",
            ));
        }
        let phase = phase_integral(&traj, sigma)?;
        let mut log = ContinuousLog::new();
        let node_args = traj
            .states()
            .iter()
            .map(|s| log.next(Complex64::new(s.theta_zero, 0.0)).im)
            .collect();
        Ok(ClosedForm {
            traj,
            rep,
            phase,
            node_args,
        })
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }
    pub fn representation(&self) -> &Representation {
        &self.rep
    }
    pub fn phase_law(&self) -> &PhaseLaw {
        &self.phase
    }
    pub fn sigma(&self) -> Sigma {
        self.phase.sigma
    }

    /// Same trajectory with the other phase sign.
    pub fn with_sigma(&self, sigma: Sigma) -> Self {
        let mut out = self.clone();
        out.phase.sigma = sigma;
        out
    }

    fn log_theta_zero(&self, t: f64, theta_zero: f64) -> Complex64 {
        let k = self.phase.segment(t);
        log_near(Complex64::new(theta_zero, 0.0), self.node_args[k])
    }

    /// `V(t)` with `ln ϑ0` continued along the trajectory.
    pub fn group_element(&self, t: f64) -> Result<CMat> {
        let s = self.traj.state_at(t)?;
        if s.theta_zero == 0.0 {
            return Err(Error::SingularDecomposition(format!("ϑ0 = 0 at t={t}")));
        }
        Ok(group_element_with_log(
            &s.gauss(),
            self.log_theta_zero(t, s.theta_zero),
            &self.rep,
        ))
    }

    pub fn inverse_element(&self, t: f64) -> Result<CMat> {
        let s = self.traj.state_at(t)?;
        if s.theta_zero == 0.0 {
            return Err(Error::SingularDecomposition(format!("ϑ0 = 0 at t={t}")));
        }
        Ok(inverse_with_log(
            &s.gauss(),
            self.log_theta_zero(t, s.theta_zero),
            &self.rep,
        ))
    }

    /// `I(t)`.
    pub fn phase_integral_at(&self, t: f64) -> Result<f64> {
        self.phase.value_at(&self.traj, t)
    }

    /// `ψ_n(t) = e^{σ i λ_n I(t)} V⁻¹(t) e_n`.
    pub fn state(&self, idx: &EigenIndex, t: f64) -> Result<StateVector> {
        let run = || -> Result<StateVector> {
            let vinv = self.inverse_element(t)?;
            let phase = (I * (self.phase.sigma.value() * idx.lambda * self.phase_integral_at(t)?)).exp();
            Ok(StateVector::new(t, vinv.column(idx.position) * phase))
        };
        run().map_err(|e| e.at_time(t))
    }

    /// `<ψ_n(t)|V†V|ψ_n(t)>`.
    pub fn metric_norm(&self, idx: &EigenIndex, t: f64) -> Result<f64> {
        let psi = self.state(idx, t)?;
        Ok(metric_overlap(&psi, &psi, &self.group_element(t)?)?.re)
    }

    /// `‖i ψ' - H ψ‖ / ‖ψ‖` with a fourth-order central difference of step `h`.
    pub fn schrodinger_residual(&self, idx: &EigenIndex, t: f64, h: f64) -> Result<f64> {
        let at = |tt: f64| self.state(idx, tt).map(|s| s.amplitudes);
        let dpsi = (at(t - 2.0 * h)? - at(t + 2.0 * h)? + (at(t + h)? - at(t - h)?) * Complex64::new(8.0, 0.0))
            / Complex64::new(12.0 * h, 0.0);
        let psi = at(t)?;
        let v = self.traj.coeffs().eval(t).map_err(|e| e.at_time(t))?;
        let ham = crate::model::h_matrix_from(&v, &self.rep);
        let r = dpsi * I - ham * &psi;
        Ok(vec_norm(&r) / vec_norm(&psi))
    }

    /// Smallest singular value of the matrix whose columns are `ψ_n(t)` for
    /// the leading `k` basis positions (`k` = dim for su(2), `N/2` for a
    /// Fock cutoff).
    pub fn basis_conditioning(&self, t: f64) -> Result<f64> {
        let k = match self.rep.label() {
            RepLabel::Spin { .. } => self.rep.dim(),
            RepLabel::Cutoff { n } => n / 2,
        };
        let vinv = self.inverse_element(t)?;
        let mut m = vinv.columns(0, k).into_owned();
        let g = self.phase_integral_at(t)? * self.phase.sigma.value();
        for (j, mut col) in m.column_iter_mut().enumerate() {
            let lambda = self.rep.k0_diagonal()[j];
            col *= (I * (lambda * g)).exp();
        }
        let sv = m.singular_values();
        Ok(sv.iter().cloned().fold(f64::INFINITY, f64::min))
    }
}

/// `<a|V†V|b>`.
pub fn metric_overlap(a: &StateVector, b: &StateVector, v: &CMat) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if v.ncols() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: v.ncols(),
        });
    }
    let va = v * &a.amplitudes;
    let vb = v * &b.amplitudes;
    Ok(va.dotc(&vb))
}

/// `|exp(σ i λ G)|²` for an accumulated complex `G = ∫ 2W`.
pub fn naive_norm_ratio(lambda: f64, sigma: Sigma, g_integral: Complex64) -> f64 {
    (I * (sigma.value() * lambda) * g_integral).exp().norm_sqr()
}

/// Norm ratio `<φ_n(t)|φ_n(t)> / <φ_n(0)|φ_n(0)>` of the transformed-frame
/// state driven by the full complex `2W` along the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NaiveNormDrift {
    pub ratio: f64,
    /// `ln ratio`, equal to `-2σλ_n Im ∫ 2W`.
    pub exponent: f64,
    /// `∫ 2W` from the start of the trajectory.
    pub g_integral: Complex64,
}

pub fn naive_norm_drift(idx: &EigenIndex, traj: &Trajectory, sigma: Sigma, t: f64) -> Result<NaiveNormDrift> {
    let (lo, hi) = traj.span();
    if !(t >= lo && t <= hi) {
        return Err(Error::Domain { t, lo, hi });
    }
    let w2 = |tt: f64| -> Result<Complex64> { Ok(scan_point(traj, tt)?.coeffs.w * 2.0) };
    let mut g = Complex64::new(0.0, 0.0);
    let times = traj.times();
    for k in 1..times.len() {
        let (a, b) = (times[k - 1], times[k].min(t));
        if b <= a {
            break;
        }
        let h = b - a;
        for &(x, wt) in &GAUSS5 {
            g += w2(a + x * h)? * (wt * h);
        }
    }
    let ratio = naive_norm_ratio(idx.lambda, sigma, g);
    Ok(NaiveNormDrift {
        ratio,
        exponent: ratio.ln(),
        g_integral: g,
    })
}

/// Result of choosing `σ` by the Schrödinger residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConventionAudit {
    pub sigma: Sigma,
    pub residual_minus: f64,
    pub residual_plus: f64,
}

/// Evaluates the Schrödinger residual with both signs at `times` for every
/// index and returns the sign with the smaller worst case.
pub fn convention_audit(cf: &ClosedForm, indices: &[EigenIndex], times: &[f64]) -> Result<ConventionAudit> {
    let h = 1e-3;
    let worst = |c: &ClosedForm| -> Result<f64> {
        let mut w = 0.0_f64;
        for idx in indices {
            for &t in times {
                w = w.max(c.schrodinger_residual(idx, t, h)?);
            }
        }
        Ok(w)
    };
    let residual_minus = worst(&cf.with_sigma(Sigma::Minus))?;
    let residual_plus = worst(&cf.with_sigma(Sigma::Plus))?;
    Ok(ConventionAudit {
        sigma: if residual_minus <= residual_plus {
            Sigma::Minus
        } else {
            Sigma::Plus
        },
        residual_minus,
        residual_plus,
    })
}

/// Interior audit times: `count` points strictly inside the span, clear of
/// the finite-difference stencil.
pub fn audit_times(span: (f64, f64), count: usize) -> Vec<f64> {
    let (a, b) = span;
    (1..=count)
        .map(|k| a + (b - a) * k as f64 / (count + 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_su11_boson_rep, build_su2_rep, AlgebraKind};
    use crate::flow::{integrate_flow, stationary_state, FlowState, IntegratorConfig};
    use crate::linalg::{c, cr, identity};
    use crate::model::CoefficientSet;

    fn swanson_closed_form(n: usize) -> ClosedForm {
        let c0 = CoefficientSet::constant(cr(1.0), cr(0.2), cr(0.2));
        let s0 = stationary_state(0.0, &c0.eval(0.0).unwrap(), AlgebraKind::Su11).unwrap();
        let traj = integrate_flow(&c0, AlgebraKind::Su11, &s0, 5.0, &IntegratorConfig::default()).unwrap();
        ClosedForm::new(traj, build_su11_boson_rep(n).unwrap(), Sigma::Minus).unwrap()
    }

    fn free_spin_closed_form() -> ClosedForm {
        // φ tiny keeps V within 1e-10 of the identity while the flow stays regular.
        let c0 = CoefficientSet::constant(cr(1.0), cr(0.0), cr(0.0));
        let s0 = FlowState {
            t: 0.0,
            phi: 1e-11,
            varphi: 0.0,
            theta_zero: 1.0,
        };
        let traj = integrate_flow(&c0, AlgebraKind::Su2, &s0, 5.0, &IntegratorConfig::default()).unwrap();
        ClosedForm::new(traj, build_su2_rep(1.0).unwrap(), Sigma::Minus).unwrap()
    }

    #[test]
    fn eigen_index_lambdas() {
        let r = build_su11_boson_rep(10).unwrap();
        assert_eq!(EigenIndex::new(&r, 3.0).unwrap().lambda, 1.75);
        let r = build_su2_rep(1.0).unwrap();
        let i = EigenIndex::new(&r, -1.0).unwrap();
        assert_eq!((i.position, i.lambda), (2, -1.0));
    }

    #[test]
    fn swanson_phase_integral_is_linear() {
        let cf = swanson_closed_form(20);
        for t in [0.0, 1.3, 5.0] {
            let got = cf.phase_integral_at(t).unwrap();
            assert!((got - 2.0 * 0.84f64.sqrt() * t).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn initial_state_is_pure_dressing() {
        let cf = swanson_closed_form(20);
        let idx = EigenIndex::new(cf.representation(), 1.0).unwrap();
        let psi = cf.state(&idx, 0.0).unwrap();
        let want = cf.inverse_element(0.0).unwrap().column(1).into_owned();
        assert!(vec_norm(&(psi.amplitudes - want)) < 1e-15);
    }

    #[test]
    fn free_spin_rotates_by_twice_the_label() {
        let cf = free_spin_closed_form();
        for m in [-1.0, 0.0, 1.0] {
            let idx = EigenIndex::new(cf.representation(), m).unwrap();
            let psi = cf.state(&idx, 5.0).unwrap();
            let want = (I * (-2.0 * m * 5.0)).exp();
            assert!((psi.amplitudes[idx.position] - want).norm() < 1e-10, "m={m}");
        }
    }

    #[test]
    fn metric_overlap_with_identity_is_inner_product() {
        let a = StateVector::new(0.0, CVec::from_vec(vec![c(1.0, 2.0), c(0.0, -1.0)]));
        let b = StateVector::new(0.0, CVec::from_vec(vec![c(0.5, 0.0), c(3.0, 1.0)]));
        let got = metric_overlap(&a, &b, &identity(2)).unwrap();
        assert_eq!(got, a.amplitudes.dotc(&b.amplitudes));
        let short = StateVector::basis(3, 0, 0.0);
        assert!(matches!(
            metric_overlap(&a, &short, &identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn swanson_metric_is_conserved() {
        let cf = swanson_closed_form(40);
        let rep = cf.representation().clone();
        let (i0, i1) = (EigenIndex::new(&rep, 0.0).unwrap(), EigenIndex::new(&rep, 2.0).unwrap());
        let n0 = cf.metric_norm(&i0, 0.0).unwrap();
        let off0 = {
            let v = cf.group_element(0.0).unwrap();
            metric_overlap(&cf.state(&i0, 0.0).unwrap(), &cf.state(&i1, 0.0).unwrap(), &v).unwrap()
        };
        for k in 0..=10 {
            let t = 0.5 * k as f64;
            assert!((cf.metric_norm(&i0, t).unwrap() - n0).abs() / n0 < 1e-8);
            let v = cf.group_element(t).unwrap();
            let off = metric_overlap(&cf.state(&i0, t).unwrap(), &cf.state(&i1, t).unwrap(), &v).unwrap();
            assert!((off - off0).norm() < 1e-8);
        }
    }

    #[test]
    fn naive_norm_examples() {
        // Constant W = ω = i with V fixed at the identity: ∫2W = 2it.
        let r = naive_norm_ratio(1.0, Sigma::Minus, c(0.0, 2.0));
        assert!((r - 4f64.exp()).abs() < 1e-12);
        assert_eq!(naive_norm_ratio(0.0, Sigma::Minus, c(0.0, 2.0)), 1.0);

        let cf = swanson_closed_form(20);
        let idx = EigenIndex::new(cf.representation(), 2.0).unwrap();
        let d = naive_norm_drift(&idx, cf.trajectory(), Sigma::Minus, 5.0).unwrap();
        assert!((d.ratio - 1.0).abs() < 1e-10, "{d:?}");
    }

    #[test]
    fn naive_norm_matches_brute_force_growth() {
        // i ψ' = 2i K0 ψ with K0 e_0 = e_0 (spin 1, m = 1).
        let rep = build_su2_rep(1.0).unwrap();
        let h = rep.k0() * c(0.0, 2.0);
        let u = crate::linalg::expm(&(h * (-I)));
        let psi = u.column(0).into_owned();
        let brute = psi.norm_squared();
        assert!((brute - naive_norm_ratio(1.0, Sigma::Minus, c(0.0, 2.0))).abs() < 1e-10);
    }

    #[test]
    fn convention_audit_prefers_minus() {
        let cf = swanson_closed_form(40);
        let rep = cf.representation().clone();
        let idx: Vec<_> = (0..3).map(|n| EigenIndex::new(&rep, n as f64).unwrap()).collect();
        let a = convention_audit(&cf, &idx, &audit_times(cf.trajectory().span(), 3)).unwrap();
        assert_eq!(a.sigma, Sigma::Minus);
        assert!(a.residual_minus < 1e-5, "{a:?}");
        assert!(a.residual_plus > 1e-2, "{a:?}");
    }

    #[test]
    fn closed_form_basis_stays_independent() {
        let cf = swanson_closed_form(40);
        for t in [0.0, 2.5, 5.0] {
            assert!(cf.basis_conditioning(t).unwrap() > 1e-8);
        }
    }
}
