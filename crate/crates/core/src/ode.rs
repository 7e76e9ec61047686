//! Explicit Runge–Kutta integration with dense output.
//!
//! The adaptive method is Dormand–Prince 5(4) with its fourth-order continuous
//! extension (Hairer, Nørsett & Wanner, *Solving ODEs I*, DOPRI5). The fixed
//! method is classical RK4 with cubic Hermite interpolation between nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    AdaptiveEmbeddedRk,
    FixedRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step; for [`Method::FixedRk4`] this is the step.
    pub max_step: f64,
    pub method: Method,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 0.1,
            method: Method::AdaptiveEmbeddedRk,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        IntegratorConfig {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol >= 1e-13 && self.rtol < 1.0) {
            return Err(Error::validation(
                "rtol",
                format!("must lie in [1e-13, 1), got {}", self.rtol),
            ));
        }
        if !(self.atol >= 1e-15) {
            return Err(Error::validation(
                "atol",
                format!("must be >= 1e-15, got {}", self.atol),
            ));
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(Error::validation("max_step", "must be positive and finite"));
        }
        Ok(())
    }
}

/// Step statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Largest tolerance-weighted local error estimate over accepted steps
    /// (always 0 for the fixed-step method).
    pub max_weighted_error: f64,
}

/// Piecewise-polynomial solution on `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    t: Vec<f64>,
    y: Vec<Vec<f64>>,
    dy: Vec<Vec<f64>>,
    // Per step: [r2, r3, r4, r5] of the continuous extension (r1 is y[k]).
    cont: Vec<[Vec<f64>; 4]>,
    pub stats: StepStats,
}

impl DenseSolution {
    pub fn times(&self) -> &[f64] {
        &self.t
    }
    pub fn states(&self) -> &[Vec<f64>] {
        &self.y
    }
    pub fn derivatives(&self) -> &[Vec<f64>] {
        &self.dy
    }
    pub fn span(&self) -> (f64, f64) {
        (self.t[0], *self.t.last().unwrap())
    }
    pub fn dim(&self) -> usize {
        self.y[0].len()
    }

    /// Index of the step containing `t`.
    pub fn segment(&self, t: f64) -> usize {
        let p = self.t.partition_point(|&x| x <= t);
        p.saturating_sub(1).min(self.t.len().saturating_sub(2))
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let (lo, hi) = self.span();
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain { t, lo, hi });
        }
        if self.t.len() == 1 {
            return Ok(self.y[0].clone());
        }
        let k = self.segment(t);
        let h = self.t[k + 1] - self.t[k];
        let th = (t - self.t[k]) / h;
        let th1 = 1.0 - th;
        let [r2, r3, r4, r5] = &self.cont[k];
        Ok((0..self.dim())
            .map(|i| self.y[k][i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))))
            .collect())
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 5_000_000;

/// Integrates `y' = f(t, y)` from `t0` to `t1`.
///
/// `after_step(t_prev, y_prev, t, y)` runs after every accepted step and may
/// abort the integration with an error.
pub fn integrate<F, G>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    cfg: &IntegratorConfig,
    mut after_step: G,
) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    G: FnMut(f64, &[f64], f64, &[f64]) -> Result<()>,
{
    cfg.validate()?;
    if !(t1 > t0) {
        return Err(Error::invalid(format!("integration end {t1} must exceed start {t0}")));
    }
    match cfg.method {
        Method::AdaptiveEmbeddedRk => dopri5(&mut f, t0, y0, t1, cfg, &mut after_step),
        Method::FixedRk4 => rk4(&mut f, t0, y0, t1, cfg, &mut after_step),
    }
}

fn axpy_into(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..out.len() {
        let mut s = 0.0;
        for (a, k) in terms {
            s += a * k[i];
        }
        out[i] = y[i] + h * s;
    }
}

fn dopri5<F, G>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    cfg: &IntegratorConfig,
    after_step: &mut G,
) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    G: FnMut(f64, &[f64], f64, &[f64]) -> Result<()>,
{
    let n = y0.len();
    let mut stats = StepStats::default();
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    f(t0, &y, &mut k1)?;
    stats.rhs_evals += 1;

    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];

    let mut h = initial_step(f, t0, &y, &k1, 5, cfg, t1 - t0, &mut stats)?;
    let mut sol = DenseSolution {
        t: vec![t0],
        y: vec![y.clone()],
        dy: vec![k1.clone()],
        cont: Vec::new(),
        stats,
    };
    let mut t = t0;
    let mut fac_old: f64 = 1e-4;

    while t < t1 {
        if sol.stats.accepted + sol.stats.rejected > MAX_STEPS {
            return Err(Error::Stiffness { t, h });
        }
        let mut last = false;
        if t + h >= t1 || t + 1.01 * h >= t1 {
            h = t1 - t;
            last = true;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Stiffness { t, h });
        }

        axpy_into(&mut ytmp, &y, h, &[(A21, &k1)]);
        f(t + C2 * h, &ytmp, &mut k2)?;
        axpy_into(&mut ytmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        f(t + C3 * h, &ytmp, &mut k3)?;
        axpy_into(&mut ytmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(t + C4 * h, &ytmp, &mut k4)?;
        axpy_into(&mut ytmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(t + C5 * h, &ytmp, &mut k5)?;
        axpy_into(
            &mut ytmp,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        f(t + h, &ytmp, &mut k6)?;
        axpy_into(
            &mut ynew,
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let t_new = if last { t1 } else { t + h };
        f(t_new, &ynew, &mut k7)?;
        sol.stats.rhs_evals += 6;

        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = cfg.atol + cfg.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sk) * (e / sk);
        }
        let err = (err / n.max(1) as f64).sqrt();
        if !err.is_finite() {
            sol.stats.rejected += 1;
            h *= 0.2;
            continue;
        }

        // PI step-size control as in DOPRI5.
        let fac11 = err.powf(0.17);
        let mut fac = fac11 / fac_old.powf(0.04);
        fac = (fac / 0.9).clamp(0.1, 5.0);
        let h_new = h / fac;

        if err <= 1.0 {
            fac_old = err.max(1e-4);
            after_step(t, &y, t_new, &ynew)?;
            sol.stats.max_weighted_error = sol.stats.max_weighted_error.max(err);
            let mut r2 = vec![0.0; n];
            let mut r3 = vec![0.0; n];
            let mut r4 = vec![0.0; n];
            let mut r5 = vec![0.0; n];
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                r2[i] = ydiff;
                r3[i] = bspl;
                r4[i] = ydiff - h * k7[i] - bspl;
                r5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            sol.cont.push([r2, r3, r4, r5]);
            sol.stats.accepted += 1;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            sol.t.push(t);
            sol.y.push(y.clone());
            sol.dy.push(k1.clone());
            h = h_new.min(cfg.max_step);
        } else {
            sol.stats.rejected += 1;
            h /= (fac11 / 0.9).min(5.0);
        }
    }
    Ok(sol)
}

#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    order: i32,
    cfg: &IntegratorConfig,
    span: f64,
    stats: &mut StepStats,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let sk: Vec<f64> = y0.iter().map(|y| cfg.atol + cfg.rtol * y.abs()).collect();
    let rms = |v: &[f64]| (v.iter().zip(&sk).map(|(x, s)| (x / s) * (x / s)).sum::<f64>() / n.max(1) as f64).sqrt();
    let d0 = rms(y0);
    let d1 = rms(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(cfg.max_step).min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, d)| y + h0 * d).collect();
    let mut f1 = vec![0.0; n];
    f(t0 + h0, &y1, &mut f1)?;
    stats.rhs_evals += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / (order as f64 + 1.0))
    };
    Ok((100.0 * h0).min(h1).min(cfg.max_step).min(span))
}

fn rk4<F, G>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    cfg: &IntegratorConfig,
    after_step: &mut G,
) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    G: FnMut(f64, &[f64], f64, &[f64]) -> Result<()>,
{
    let n = y0.len();
    let steps = ((t1 - t0) / cfg.max_step).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    f(t0, &y, &mut k1)?;
    let (mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut sol = DenseSolution {
        t: vec![t0],
        y: vec![y.clone()],
        dy: vec![k1.clone()],
        cont: Vec::with_capacity(steps),
        stats: StepStats {
            rhs_evals: 1,
            ..StepStats::default()
        },
    };
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let t_new = if s + 1 == steps { t1 } else { t0 + (s + 1) as f64 * h };
        axpy_into(&mut ytmp, &y, 0.5 * h, &[(1.0, &k1)]);
        f(t + 0.5 * h, &ytmp, &mut k2)?;
        axpy_into(&mut ytmp, &y, 0.5 * h, &[(1.0, &k2)]);
        f(t + 0.5 * h, &ytmp, &mut k3)?;
        axpy_into(&mut ytmp, &y, h, &[(1.0, &k3)]);
        f(t + h, &ytmp, &mut k4)?;
        let ynew: Vec<f64> = (0..n)
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let mut f_new = vec![0.0; n];
        f(t_new, &ynew, &mut f_new)?;
        sol.stats.rhs_evals += 4;
        after_step(t, &y, t_new, &ynew)?;
        let mut r2 = vec![0.0; n];
        let mut r3 = vec![0.0; n];
        let mut r4 = vec![0.0; n];
        for i in 0..n {
            let ydiff = ynew[i] - y[i];
            r2[i] = ydiff;
            r3[i] = h * k1[i] - ydiff;
            r4[i] = ydiff - h * f_new[i] - r3[i];
        }
        sol.cont.push([r2, r3, r4, vec![0.0; n]]);
        sol.stats.accepted += 1;
        y = ynew;
        k1 = f_new;
        sol.t.push(t_new);
        sol.y.push(y.clone());
        sol.dy.push(k1.clone());
    }
    Ok(sol)
}

/// Gauss–Legendre nodes and weights on `[0, 1]` (5 points, exact to degree 9).
pub const GAUSS5: [(f64, f64); 5] = [
    (0.046_910_077_030_668_004, 0.118_463_442_528_094_54),
    (0.230_765_344_947_158_45, 0.239_314_335_249_683_23),
    (0.5, 0.284_444_444_444_444_44),
    (0.769_234_655_052_841_6, 0.239_314_335_249_683_23),
    (0.953_089_922_969_332, 0.118_463_442_528_094_54),
];

/// `∫_a^b g` by 5-point Gauss–Legendre.
pub fn gauss5<T, G>(a: f64, b: f64, mut g: G) -> Result<T>
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    G: FnMut(f64) -> Result<T>,
{
    let h = b - a;
    let mut acc = T::default();
    for &(x, w) in &GAUSS5 {
        acc = acc + g(a + x * h)? * (w * h);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noop(_: f64, _: &[f64], _: f64, _: &[f64]) -> Result<()> {
        Ok(())
    }

    #[test]
    fn exponential_decay_dense_output() {
        let cfg = IntegratorConfig::with_tolerances(1e-10, 1e-12);
        let sol = integrate(
            |_, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            5.0,
            &cfg,
            noop,
        )
        .unwrap();
        for k in 0..=50 {
            let t = k as f64 * 0.1;
            let y = sol.eval(t).unwrap()[0];
            assert!((y - (-t).exp()).abs() < 1e-9, "t={t}");
        }
        assert_eq!(*sol.times().last().unwrap(), 5.0);
        assert!(sol.eval(5.1).is_err());
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let cfg = IntegratorConfig::with_tolerances(1e-11, 1e-13);
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0, 0.0],
            10.0,
            &cfg,
            noop,
        )
        .unwrap();
        let y = sol.eval(10.0).unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let run = |h: f64| {
            let cfg = IntegratorConfig {
                max_step: h,
                method: Method::FixedRk4,
                ..IntegratorConfig::default()
            };
            let sol = integrate(
                |t, y, dy| {
                    dy[0] = y[0] * t.cos();
                    Ok(())
                },
                0.0,
                &[1.0],
                2.0,
                &cfg,
                noop,
            )
            .unwrap();
            (sol.eval(2.0).unwrap()[0] - 2f64.sin().exp()).abs()
        };
        let (e1, e2) = (run(0.1), run(0.05));
        let order = (e1 / e2).log2();
        assert!(order > 3.8 && order < 4.3, "observed order {order}");
    }

    #[test]
    fn after_step_can_abort() {
        let cfg = IntegratorConfig::default();
        let res = integrate(
            |_, _, dy| {
                dy[0] = 1.0;
                Ok(())
            },
            0.0,
            &[-0.5],
            2.0,
            &cfg,
            |_, _, t, y| {
                if y[0] > 0.0 {
                    Err(Error::SingularFlow {
                        t,
                        reason: "crossed".into(),
                    })
                } else {
                    Ok(())
                }
            },
        );
        assert!(matches!(res, Err(Error::SingularFlow { .. })));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig::with_tolerances(1e-14, 1e-12);
        let res = integrate(|_, _, _| Ok(()), 0.0, &[0.0], 1.0, &cfg, noop);
        assert!(matches!(res, Err(Error::Validation { .. })));
    }

    #[test]
    fn gauss5_integrates_polynomials_exactly() {
        let v: f64 = gauss5(0.0, 2.0, |x| Ok(x.powi(9))).unwrap();
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-12);
    }
}
