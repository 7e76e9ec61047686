//! Brute-force references: direct integration of `i ψ' = H(t) ψ` and dense
//! diagonalization of constant Hamiltonians. Only [`crate::model`] is used to
//! build `H`, so nothing here depends on the flow or the factorization.

use nalgebra::Schur;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{RepLabel, Representation};
use crate::error::{Error, Result};
use crate::linalg::{vec_norm, CVec};
use crate::model::{h_matrix, h_matrix_from, CoefficientSet, Coeffs};
use crate::ode::{integrate, IntegratorConfig, StepStats};
use crate::solution::StateVector;

/// Largest squared-amplitude fraction allowed outside the leading `N/2` Fock
/// levels of an initial state, and in the top two levels during propagation.
pub const TRUNCATION_GUARD: f64 = 1e-8;

/// Default oracle tolerances.
pub fn oracle_config() -> IntegratorConfig {
    IntegratorConfig::with_tolerances(1e-11, 1e-13)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagationResult {
    #[serde(skip)]
    pub states: Vec<StateVector>,
    pub stats: StepStats,
    /// Largest top-two-level mass fraction seen (0 for spin representations).
    pub max_leakage: f64,
}

fn pack(v: &CVec) -> Vec<f64> {
    v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect()
}

fn unpack(y: &[f64]) -> CVec {
    let n = y.len() / 2;
    CVec::from_iterator(n, (0..n).map(|i| Complex64::new(y[i], y[n + i])))
}

fn mass(y: &[f64], range: std::ops::Range<usize>) -> f64 {
    let n = y.len() / 2;
    range.map(|i| y[i] * y[i] + y[n + i] * y[n + i]).sum()
}

/// Integrates `i ψ' = H(t) ψ` from `psi0.t` and samples the state at `times`.
pub fn propagate_direct(
    c: &CoefficientSet,
    rep: &Representation,
    psi0: &StateVector,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<PropagationResult> {
    let dim = rep.dim();
    if psi0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: psi0.dim(),
        });
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("sample times must be strictly increasing"));
    }
    let t0 = psi0.t;
    if times.iter().any(|&t| t < t0) {
        return Err(Error::invalid("sample times must not precede the initial time"));
    }
    let y0 = pack(&psi0.amplitudes);
    let total0 = mass(&y0, 0..dim);
    if total0 == 0.0 {
        return Err(Error::Undefined("initial state is the zero vector".into()));
    }
    let cutoff = match rep.label() {
        RepLabel::Cutoff { n } => Some(n),
        RepLabel::Spin { .. } => None,
    };
    if let Some(n) = cutoff {
        let outside = mass(&y0, n / 2..n) / total0;
        if outside > TRUNCATION_GUARD {
            return Err(Error::TruncationContaminated {
                t: t0,
                reason: format!("initial state carries {outside:e} of its weight above level {}", n / 2),
            });
        }
    }

    let t_end = times.last().copied().unwrap_or(t0);
    if t_end == t0 {
        return Ok(PropagationResult {
            states: times
                .iter()
                .map(|&t| StateVector::new(t, psi0.amplitudes.clone()))
                .collect(),
            stats: StepStats::default(),
            max_leakage: 0.0,
        });
    }

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let h = h_matrix(c, rep, t).map_err(|e| e.at_time(t))?;
        let psi = unpack(y);
        let d = h * psi;
        // ψ' = -i H ψ
        for i in 0..dim {
            dy[i] = d[i].im;
            dy[dim + i] = -d[i].re;
        }
        Ok(())
    };
    let mut max_leakage = 0.0_f64;
    let guard = |_: f64, _: &[f64], t: f64, y: &[f64]| -> Result<()> {
        if let Some(n) = cutoff {
            let frac = mass(y, n - 2..n) / mass(y, 0..n);
            max_leakage = max_leakage.max(frac);
            if frac > TRUNCATION_GUARD {
                return Err(Error::TruncationContaminated {
                    t,
                    reason: format!("top two Fock levels hold {frac:e} of the weight"),
                });
            }
        }
        Ok(())
    };
    let sol = integrate(rhs, t0, &y0, t_end, cfg, guard)?;
    let states = times
        .iter()
        .map(|&t| Ok(StateVector::new(t, unpack(&sol.eval(t)?))))
        .collect::<Result<Vec<_>>>()?;
    Ok(PropagationResult {
        states,
        stats: sol.stats,
        max_leakage,
    })
}

/// `‖a - b‖ / max(‖a‖, ‖b‖)` without any phase alignment.
pub fn state_error(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        return Err(Error::Undefined("relative error of two zero vectors".into()));
    }
    Ok(vec_norm(&(&a.amplitudes - &b.amplitudes)) / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub n: usize,
    pub value: Complex64,
    pub trusted: bool,
}

/// Eigenvalues of the constant su(1,1) Hamiltonian in a Fock cutoff `N`,
/// sorted by real part; the lowest `N/2` are flagged trusted.
pub fn swanson_spectrum(
    omega: Complex64,
    alpha: Complex64,
    beta: Complex64,
    cutoff: usize,
) -> Result<Vec<SpectrumEntry>> {
    if cutoff < 20 {
        return Err(Error::invalid(format!("spectrum cutoff must be >= 20, got {cutoff}")));
    }
    let rep = crate::algebra::build_su11_boson_rep(cutoff)?;
    let h = h_matrix_from(&Coeffs { omega, alpha, beta }, &rep);
    let schur =
        Schur::try_new(h, 1e-15, 100_000).ok_or_else(|| Error::Undefined("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut values: Vec<Complex64> = (0..cutoff).map(|i| t[(i, i)]).collect();
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(n, value)| SpectrumEntry {
            n,
            value,
            trusted: n < cutoff / 2,
        })
        .collect())
}

/// How the non-real members of a spectrum pair up under conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConjugatePairing {
    /// Values with `|Im| > tol`.
    pub non_real: usize,
    /// Non-real values without a conjugate partner within `tol`.
    pub unpaired: usize,
}

pub fn conjugate_pairing(values: &[Complex64], tol: f64) -> ConjugatePairing {
    let non_real: Vec<Complex64> = values.iter().copied().filter(|z| z.im.abs() > tol).collect();
    let mut used = vec![false; non_real.len()];
    let mut unpaired = 0;
    for i in 0..non_real.len() {
        if used[i] {
            continue;
        }
        let partner =
            (0..non_real.len()).find(|&j| j != i && !used[j] && (non_real[j] - non_real[i].conj()).norm() <= tol);
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => unpaired += 1,
        }
    }
    ConjugatePairing {
        non_real: non_real.len(),
        unpaired,
    }
}
