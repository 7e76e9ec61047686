//! The `decompose`, `flow`, `evolve`, `verify` and `spectrum` commands.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{AlgebraKind, RepLabel};
use crate::decomposition::{build_group_element, canonical_exponential, gauss_decompose, CanonicalParams};
use crate::error::{Error, Result};
use crate::flow::{integrate_flow_with_law, stationary_state, FlowState, Trajectory};
use crate::linalg::max_norm_block;
use crate::oracle::{oracle_config, propagate_direct, state_error, swanson_spectrum};
use crate::solution::{
    audit_times, convention_audit, metric_overlap, naive_norm_drift, ClosedForm, ConventionAudit, Sigma,
};
use crate::transform::{re_w, residual_scan, scan_point, ResidualReport, CERTIFICATION_TOLERANCE};

use super::config::{InitialMode, RunConfig};

/// Bounds that decide exit code 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub residual: f64,
    pub oracle: f64,
    pub metric: f64,
    pub decomposition: f64,
}

pub const THRESHOLDS: Thresholds = Thresholds {
    residual: CERTIFICATION_TOLERANCE,
    oracle: 1e-6,
    metric: 1e-8,
    decomposition: 1e-10,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Decompose,
    Flow,
    Evolve,
    Verify,
    Spectrum,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Flow => "flow",
            Command::Evolve => "evolve",
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "decompose" => Command::Decompose,
            "flow" => Command::Flow,
            "evolve" => Command::Evolve,
            "verify" => Command::Verify,
            "spectrum" => Command::Spectrum,
            other => return Err(Error::invalid(format!("unknown command {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignReport {
    pub sigma: i8,
    /// `"config"` or `"audit"`.
    pub source: &'static str,
    pub audit: Option<ConventionAudit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexReport {
    pub label: f64,
    pub lambda: f64,
    pub max_oracle_error: Option<f64>,
    pub t_max_oracle_error: Option<f64>,
    /// Largest relative change of `<ψ|V†V|ψ>` over the sample times.
    pub metric_drift: f64,
    /// Naive-norm ratio at the final time.
    pub naive_norm_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSummary {
    pub nodes: usize,
    pub final_integral: f64,
    pub mean_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionSummary {
    pub points: usize,
    pub singular: usize,
    pub max_identity_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub cutoff: usize,
    pub trusted: usize,
    pub max_trusted_abs_imag: f64,
    /// Largest `|E_n - 2 λ_n re_w|` over the first ten trusted levels when the
    /// stationary point exists.
    pub max_stationary_gap: Option<f64>,
}

/// Deterministic work counters (in place of wall-clock timing).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Work {
    pub flow_steps_accepted: usize,
    pub flow_steps_rejected: usize,
    pub flow_rhs_evals: usize,
    pub oracle_steps_accepted: usize,
    pub oracle_steps_rejected: usize,
    pub oracle_rhs_evals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub algebra: AlgebraKind,
    pub dim: usize,
    pub certified: bool,
    pub thresholds: Thresholds,
    pub initial: Option<FlowState>,
    pub residuals: Option<ResidualReport>,
    pub sign_convention: Option<SignReport>,
    pub indices: Vec<IndexReport>,
    pub max_oracle_error: Option<f64>,
    pub max_metric_drift: Option<f64>,
    pub max_offdiag_metric_drift: Option<f64>,
    pub phase_law: Option<PhaseSummary>,
    pub decomposition: Option<DecompositionSummary>,
    pub spectrum: Option<SpectrumSummary>,
    pub work: Work,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunReport {
    fn new(cmd: Command, cfg: &RunConfig) -> Self {
        RunReport {
            command: cmd.name().to_string(),
            algebra: cfg.kind,
            dim: cfg.rep.dim(),
            certified: true,
            thresholds: THRESHOLDS,
            initial: None,
            residuals: None,
            sign_convention: None,
            indices: Vec::new(),
            max_oracle_error: None,
            max_metric_drift: None,
            max_offdiag_metric_drift: None,
            phase_law: None,
            decomposition: None,
            spectrum: None,
            work: Work::default(),
            warnings: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(dir: &Path, name: &str, header: &[String], rows: &[Vec<String>], report: &mut RunReport) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(name))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    report.outputs.push(name.to_string());
    Ok(())
}

/// Initial flow state from the config.
pub fn initial_state(cfg: &RunConfig) -> Result<FlowState> {
    let spec = cfg.file.initial;
    let t0 = cfg.t0();
    let stationary = || stationary_state(t0, &cfg.coeffs.eval(t0)?, cfg.kind);
    match spec.mode {
        InitialMode::Stationary => stationary(),
        InitialMode::Explicit => {
            if let (Some(phi), Some(varphi), Some(theta_zero)) = (spec.phi, spec.varphi, spec.theta_zero) {
                return Ok(FlowState {
                    t: t0,
                    phi,
                    varphi,
                    theta_zero,
                });
            }
            let s = stationary()?;
            Ok(FlowState {
                t: t0,
                phi: spec.phi.unwrap_or(s.phi),
                varphi: spec.varphi.unwrap_or(s.varphi),
                theta_zero: spec.theta_zero.unwrap_or(s.theta_zero),
            })
        }
    }
}

fn run_flow(cfg: &RunConfig, report: &mut RunReport) -> Result<Trajectory> {
    let s0 = initial_state(cfg)?;
    report.initial = Some(s0);
    let traj = integrate_flow_with_law(
        &cfg.coeffs,
        cfg.kind,
        &s0,
        cfg.t1(),
        &cfg.flow_config,
        cfg.file.theta_zero_law,
    )?;
    let st = traj.stats();
    report.work.flow_steps_accepted = st.accepted;
    report.work.flow_steps_rejected = st.rejected;
    report.work.flow_rhs_evals = st.rhs_evals;
    let r = residual_scan(&traj, cfg.scan_samples)?;
    if !r.certified(THRESHOLDS.residual) {
        report.certified = false;
        report.warnings.push(format!(
            "constraint residuals not certified: max(|Q|, |Y|, |Im W|) = {:e}",
            r.max()
        ));
    }
    report.residuals = Some(r);
    Ok(traj)
}

fn closed_form(cfg: &RunConfig, traj: Trajectory, report: &mut RunReport) -> Result<ClosedForm> {
    let cf = ClosedForm::new(traj, cfg.rep.clone(), Sigma::Minus)?;
    let (cf, sign) = match cfg.sign {
        Some(s) => (
            cf.with_sigma(s),
            SignReport {
                sigma: s.value() as i8,
                source: "config",
                audit: None,
            },
        ),
        None => {
            let audit = convention_audit(&cf, &cfg.indices, &audit_times(cf.trajectory().span(), 3))?;
            (
                cf.with_sigma(audit.sigma),
                SignReport {
                    sigma: audit.sigma.value() as i8,
                    source: "audit",
                    audit: Some(audit),
                },
            )
        }
    };
    report.sign_convention = Some(sign);
    let law = cf.phase_law();
    let final_integral = *law.cumulative.last().unwrap_or(&0.0);
    report.phase_law = Some(PhaseSummary {
        nodes: law.times.len(),
        final_integral,
        mean_rate: final_integral / (cfg.t1() - cfg.t0()),
    });
    Ok(cf)
}

fn label_text(label: f64) -> String {
    format!("{label}")
}

fn decompose(cfg: &RunConfig, out: &Path, report: &mut RunReport) -> Result<()> {
    let spec = cfg.file.decompose.clone().unwrap_or(super::config::DecomposeSpec {
        points: Vec::new(),
        random: 20,
    });
    let mut points: Vec<CanonicalParams> = spec
        .points
        .iter()
        .map(|p| CanonicalParams::new(p.eps, Complex64::new(p.mu_re, p.mu_im)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.file.seed);
    for _ in 0..spec.random {
        let eps = rng.random_range(-1.0..=1.0);
        let r = 0.4 * rng.random::<f64>();
        let a = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        points.push(CanonicalParams::new(eps, Complex64::from_polar(r, a)));
    }
    let cols = match cfg.rep.label() {
        RepLabel::Spin { .. } => cfg.rep.dim(),
        RepLabel::Cutoff { n } => n / 2,
    };
    let header: Vec<String> = [
        "eps",
        "mu_re",
        "mu_im",
        "theta_plus_re",
        "theta_plus_im",
        "theta_zero_re",
        "theta_zero_im",
        "theta_minus_re",
        "theta_minus_im",
        "identity_residual",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows = Vec::new();
    let mut summary = DecompositionSummary {
        points: points.len(),
        singular: 0,
        max_identity_residual: 0.0,
    };
    for p in &points {
        let mut row = vec![num(p.eps), num(p.mu.re), num(p.mu.im)];
        match gauss_decompose(p, cfg.kind) {
            Ok(g) => {
                let prod = build_group_element(&g, &cfg.rep)?;
                let direct = canonical_exponential(p, &cfg.rep);
                let scale = max_norm_block(&direct, cfg.rep.dim(), cols);
                let res = max_norm_block(&(prod - &direct), cfg.rep.dim(), cols) / scale;
                summary.max_identity_residual = summary.max_identity_residual.max(res);
                for z in [g.theta_plus, g.theta_zero, g.theta_minus] {
                    row.push(num(z.re));
                    row.push(num(z.im));
                }
                row.push(num(res));
            }
            Err(Error::SingularDecomposition(msg)) => {
                summary.singular += 1;
                report.warnings.push(format!("singular point skipped: {msg}"));
                row.extend(std::iter::repeat_n("nan".to_string(), 7));
            }
            Err(e) => return Err(e),
        }
        rows.push(row);
    }
    if summary.max_identity_residual >= THRESHOLDS.decomposition {
        report.certified = false;
    }
    report.decomposition = Some(summary);
    write_csv(out, "decompose.csv", &header, &rows, report)
}

fn flow(cfg: &RunConfig, out: &Path, report: &mut RunReport) -> Result<()> {
    let traj = run_flow(cfg, report)?;
    let header: Vec<String> = ["t", "phi", "varphi", "theta0", "re_w", "abs_q", "abs_y", "abs_im_w"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for t in cfg.sample_times() {
        let p = scan_point(&traj, t)?;
        rows.push(vec![
            num(t),
            num(p.state.phi),
            num(p.state.varphi),
            num(p.state.theta_zero),
            num(p.re_w),
            num(p.coeffs.q.norm()),
            num(p.coeffs.y.norm()),
            num(p.coeffs.w.im.abs()),
        ]);
    }
    write_csv(out, "flow.csv", &header, &rows, report)
}

fn metric_audit(cfg: &RunConfig, cf: &ClosedForm, report: &mut RunReport) -> Result<Vec<f64>> {
    let times = cfg.sample_times();
    let mut drifts = Vec::with_capacity(cfg.indices.len());
    for idx in &cfg.indices {
        let n0 = cf.metric_norm(idx, times[0])?;
        let mut d = 0.0_f64;
        for &t in &times[1..] {
            d = d.max((cf.metric_norm(idx, t)? - n0).abs() / n0.abs());
        }
        drifts.push(d);
    }
    let mut off = 0.0_f64;
    for (i, a) in cfg.indices.iter().enumerate() {
        for b in &cfg.indices[i + 1..] {
            let overlap = |t: f64| -> Result<Complex64> {
                metric_overlap(&cf.state(a, t)?, &cf.state(b, t)?, &cf.group_element(t)?)
            };
            let o0 = overlap(times[0])?;
            for &t in &times[1..] {
                off = off.max((overlap(t)? - o0).norm());
            }
        }
    }
    let max_drift = drifts.iter().cloned().fold(0.0, f64::max);
    report.max_metric_drift = Some(max_drift);
    report.max_offdiag_metric_drift = Some(off);
    if max_drift >= THRESHOLDS.metric || off >= THRESHOLDS.metric {
        report.certified = false;
        report.warnings.push(format!(
            "metric not conserved: drift {max_drift:e}, off-diagonal {off:e}"
        ));
    }
    Ok(drifts)
}

fn evolve(cfg: &RunConfig, out: &Path, report: &mut RunReport) -> Result<()> {
    let traj = run_flow(cfg, report)?;
    let cf = closed_form(cfg, traj, report)?;
    let dim = cfg.rep.dim();
    let mut header = vec!["t".to_string(), "index".to_string()];
    header.extend((0..dim).map(|i| format!("re_{i}")));
    header.extend((0..dim).map(|i| format!("im_{i}")));
    header.push("metric_norm".into());
    for idx in &cfg.indices {
        let mut rows = Vec::new();
        for t in cfg.sample_times() {
            let psi = cf.state(idx, t)?;
            let mut row = vec![num(t), label_text(idx.label)];
            row.extend(psi.amplitudes.iter().map(|z| num(z.re)));
            row.extend(psi.amplitudes.iter().map(|z| num(z.im)));
            row.push(num(metric_overlap(&psi, &psi, &cf.group_element(t)?)?.re));
            rows.push(row);
        }
        write_csv(
            out,
            &format!("evolve_{}.csv", label_text(idx.label)),
            &header,
            &rows,
            report,
        )?;
    }
    let drifts = metric_audit(cfg, &cf, report)?;
    for (idx, d) in cfg.indices.iter().zip(drifts) {
        report.indices.push(IndexReport {
            label: idx.label,
            lambda: idx.lambda,
            max_oracle_error: None,
            t_max_oracle_error: None,
            metric_drift: d,
            naive_norm_ratio: naive_norm_drift(idx, cf.trajectory(), cf.sigma(), cfg.t1())?.ratio,
        });
    }
    Ok(())
}

fn verify(cfg: &RunConfig, report: &mut RunReport) -> Result<()> {
    let traj = run_flow(cfg, report)?;
    if !report.certified {
        report
            .warnings
            .push("oracle comparison skipped: flow not certified".into());
        return Ok(());
    }
    let cf = closed_form(cfg, traj, report)?;
    let times = cfg.sample_times();
    let drifts = metric_audit(cfg, &cf, report)?;
    let mut worst = 0.0_f64;
    for (idx, drift) in cfg.indices.iter().zip(drifts) {
        let psi0 = cf.state(idx, cfg.t0())?;
        let prop = propagate_direct(&cfg.coeffs, &cfg.rep, &psi0, &times, &oracle_config())?;
        report.work.oracle_steps_accepted += prop.stats.accepted;
        report.work.oracle_steps_rejected += prop.stats.rejected;
        report.work.oracle_rhs_evals += prop.stats.rhs_evals;
        let (mut e_max, mut t_max) = (0.0_f64, times[0]);
        for reference in &prop.states {
            let e = state_error(&cf.state(idx, reference.t)?, reference)?;
            if e > e_max {
                e_max = e;
                t_max = reference.t;
            }
        }
        worst = worst.max(e_max);
        report.indices.push(IndexReport {
            label: idx.label,
            lambda: idx.lambda,
            max_oracle_error: Some(e_max),
            t_max_oracle_error: Some(t_max),
            metric_drift: drift,
            naive_norm_ratio: naive_norm_drift(idx, cf.trajectory(), cf.sigma(), cfg.t1())?.ratio,
        });
    }
    report.max_oracle_error = Some(worst);
    if worst >= THRESHOLDS.oracle {
        report.certified = false;
        report
            .warnings
            .push(format!("closed form departs from the oracle: {worst:e}"));
    }
    Ok(())
}

fn spectrum(cfg: &RunConfig, out: &Path, report: &mut RunReport) -> Result<()> {
    let cutoff = match cfg.rep.label() {
        RepLabel::Cutoff { n } => n,
        RepLabel::Spin { .. } => {
            return Err(Error::validation(
                "algebra",
                "spectrum needs the su11 Fock representation",
            ))
        }
    };
    let v = cfg.coeffs.eval(cfg.t0())?;
    let entries = swanson_spectrum(v.omega, v.alpha, v.beta, cutoff)?;
    let header: Vec<String> = ["n", "re_eig", "im_eig", "trusted"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| vec![e.n.to_string(), num(e.value.re), num(e.value.im), e.trusted.to_string()])
        .collect();
    let trusted: Vec<_> = entries.iter().filter(|e| e.trusted).collect();
    let max_stationary_gap = match stationary_state(cfg.t0(), &v, cfg.kind) {
        Ok(s) => {
            let rw = re_w(&s, &v.polar(), cfg.kind);
            Some(
                trusted
                    .iter()
                    .take(10)
                    .map(|e| (e.value - Complex64::new(2.0 * cfg.rep.k0_diagonal()[e.n] * rw, 0.0)).norm())
                    .fold(0.0, f64::max),
            )
        }
        Err(e) => {
            report.warnings.push(format!("no stationary point: {e}"));
            None
        }
    };
    report.spectrum = Some(SpectrumSummary {
        cutoff,
        trusted: trusted.len(),
        max_trusted_abs_imag: trusted.iter().map(|e| e.value.im.abs()).fold(0.0, f64::max),
        max_stationary_gap,
    });
    write_csv(out, "spectrum.csv", &header, &rows, report)
}

/// Runs `cmd`, writing CSV outputs and `report.json` into `out`.
pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    fs::create_dir_all(out)?;
    let mut report = RunReport::new(cmd, cfg);
    match cmd {
        Command::Decompose => decompose(cfg, out, &mut report)?,
        Command::Flow => flow(cfg, out, &mut report)?,
        Command::Evolve => evolve(cfg, out, &mut report)?,
        Command::Verify => verify(cfg, &mut report)?,
        Command::Spectrum => spectrum(cfg, out, &mut report)?,
    }
    report.outputs.push("report.json".into());
    fs::write(out.join("report.json"), report.to_json())?;
    Ok(report)
}
