//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{build_su11_boson_rep, build_su2_rep, AlgebraKind, Representation};
use crate::error::{Error, Result};
use crate::flow::{IntegratorConfig, ThetaZeroLaw};
use crate::model::{CoefficientSet, Interpolation, Table, TimeProfile};
use crate::solution::{EigenIndex, Sigma};
use crate::transform::DEFAULT_SCAN_SAMPLES;

/// One coefficient profile as written in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Sinusoid {
        amp_re: f64,
        #[serde(default)]
        amp_im: f64,
        frequency: f64,
        #[serde(default)]
        phase0: f64,
        #[serde(default)]
        offset_re: f64,
        #[serde(default)]
        offset_im: f64,
    },
    /// CSV with header `t,re,im`; a relative path is resolved against the
    /// config file's directory.
    Table {
        path: PathBuf,
        #[serde(default)]
        interpolation: Interpolation,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub omega: ProfileSpec,
    pub alpha: ProfileSpec,
    pub beta: ProfileSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RepresentationSpec {
    Spin { j: f64 },
    Cutoff { cutoff: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialMode {
    #[default]
    Stationary,
    Explicit,
}

/// Initial flow values. In explicit mode, omitted fields are taken from the
/// stationary point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub mode: InitialMode,
    pub phi: Option<f64>,
    pub varphi: Option<f64>,
    pub theta_zero: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_t1")]
    pub t1: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_t1() -> f64 {
    5.0
}
fn default_samples() -> usize {
    11
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec {
            t0: 0.0,
            t1: default_t1(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

fn default_rtol() -> f64 {
    1e-10
}
fn default_atol() -> f64 {
    1e-12
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            rtol: default_rtol(),
            atol: default_atol(),
        }
    }
}

/// `"auto"`, `1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawSign", into = "RawSign")]
pub enum SignSpec {
    #[default]
    Auto,
    Fixed(i64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawSign {
    Word(String),
    Number(i64),
}

impl TryFrom<RawSign> for SignSpec {
    type Error = String;

    fn try_from(r: RawSign) -> std::result::Result<Self, String> {
        match r {
            RawSign::Word(w) if w == "auto" => Ok(SignSpec::Auto),
            RawSign::Word(w) => Err(format!("expected \"auto\", 1 or -1, got {w:?}")),
            RawSign::Number(n) => Ok(SignSpec::Fixed(n)),
        }
    }
}

impl From<SignSpec> for RawSign {
    fn from(s: SignSpec) -> Self {
        match s {
            SignSpec::Auto => RawSign::Word("auto".into()),
            SignSpec::Fixed(n) => RawSign::Number(n),
        }
    }
}

/// Parameters of the `decompose` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeSpec {
    /// Explicit `(ε, μ)` points.
    #[serde(default)]
    pub points: Vec<DecomposePoint>,
    /// Extra random points drawn with `|ε| ≤ 1`, `|μ| ≤ 0.4` from `seed`.
    #[serde(default)]
    pub random: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposePoint {
    pub eps: f64,
    pub mu_re: f64,
    #[serde(default)]
    pub mu_im: f64,
}

/// The config file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub algebra: AlgebraKind,
    pub representation: RepresentationSpec,
    pub coefficients: CoefficientSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub indices: Vec<f64>,
    #[serde(default)]
    pub sign_convention: SignSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub theta_zero_law: ThetaZeroLaw,
    pub scan_samples: Option<usize>,
    pub decompose: Option<DecomposeSpec>,
}

/// A validated configuration with tables loaded.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub file: RunConfigFile,
    pub kind: AlgebraKind,
    pub rep: Representation,
    pub coeffs: CoefficientSet,
    pub indices: Vec<EigenIndex>,
    pub sign: Option<Sigma>,
    pub flow_config: IntegratorConfig,
    pub scan_samples: usize,
}

impl RunConfig {
    pub fn t0(&self) -> f64 {
        self.file.time.t0
    }
    pub fn t1(&self) -> f64 {
        self.file.time.t1
    }

    /// Equispaced output times, endpoints included.
    pub fn sample_times(&self) -> Vec<f64> {
        crate::transform::scan_times((self.t0(), self.t1()), self.file.time.samples)
    }

    /// Overrides the flow tolerances.
    pub fn set_tolerances(&mut self, rtol: Option<f64>, atol: Option<f64>) -> Result<()> {
        if let Some(r) = rtol {
            self.flow_config.rtol = r;
            self.file.tolerances.rtol = r;
        }
        if let Some(a) = atol {
            self.flow_config.atol = a;
            self.file.tolerances.atol = a;
        }
        self.flow_config.validate()
    }
}

fn build_profile(spec: &ProfileSpec, base: &Path, field: &str) -> Result<TimeProfile> {
    Ok(match spec {
        ProfileSpec::Constant { re, im } => TimeProfile::Constant(Complex64::new(*re, *im)),
        ProfileSpec::Sinusoid {
            amp_re,
            amp_im,
            frequency,
            phase0,
            offset_re,
            offset_im,
        } => TimeProfile::Sinusoid {
            amp: Complex64::new(*amp_re, *amp_im),
            frequency: *frequency,
            phase0: *phase0,
            offset: Complex64::new(*offset_re, *offset_im),
        },
        ProfileSpec::Table { path, interpolation } => {
            let full = if path.is_absolute() {
                path.clone()
            } else {
                base.join(path)
            };
            TimeProfile::Table(Table::from_csv(&full, *interpolation).map_err(|e| match e {
                Error::Parse { .. } | Error::FileNotFound(_) => e,
                other => Error::validation(field, other.to_string()),
            })?)
        }
    })
}

/// Parses a config from text; `base` resolves relative table paths and
/// `origin` names the source in parse errors.
pub fn parse_config(text: &str, base: &Path, origin: &str) -> Result<RunConfig> {
    let file: RunConfigFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    validate(file, base)
}

/// Reads and validates a JSON run configuration.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base, &path.display().to_string())
}

fn validate(file: RunConfigFile, base: &Path) -> Result<RunConfig> {
    let kind = file.algebra;
    let rep = match (kind, file.representation) {
        (AlgebraKind::Su2, RepresentationSpec::Spin { j }) => {
            build_su2_rep(j).map_err(|e| Error::validation("representation", e.to_string()))?
        }
        (AlgebraKind::Su11, RepresentationSpec::Cutoff { cutoff }) => {
            build_su11_boson_rep(cutoff).map_err(|e| Error::validation("representation", e.to_string()))?
        }
        (AlgebraKind::Su2, _) => return Err(Error::validation("representation", "su2 needs {\"j\": ...}")),
        (AlgebraKind::Su11, _) => return Err(Error::validation("representation", "su11 needs {\"cutoff\": ...}")),
    };

    let t = file.time;
    if !(t.t0.is_finite() && t.t1.is_finite() && t.t1 > t.t0) {
        return Err(Error::validation(
            "time",
            format!("t1 = {} must exceed t0 = {}", t.t1, t.t0),
        ));
    }
    if t.samples < 2 {
        return Err(Error::validation(
            "time.samples",
            format!("must be >= 2, got {}", t.samples),
        ));
    }

    let coeffs = CoefficientSet::new(
        build_profile(&file.coefficients.omega, base, "coefficients.omega")?,
        build_profile(&file.coefficients.alpha, base, "coefficients.alpha")?,
        build_profile(&file.coefficients.beta, base, "coefficients.beta")?,
    );
    let (lo, hi) = coeffs.domain();
    if t.t0 < lo || t.t1 > hi {
        return Err(Error::validation(
            "time",
            format!("[{}, {}] leaves the coefficient domain [{lo}, {hi}]", t.t0, t.t1),
        ));
    }

    let labels = if file.indices.is_empty() {
        vec![rep.basis_label(0)]
    } else {
        file.indices.clone()
    };
    let indices = labels
        .iter()
        .map(|&l| EigenIndex::new(&rep, l))
        .collect::<Result<Vec<_>>>()?;

    let sign = match file.sign_convention {
        SignSpec::Auto => None,
        SignSpec::Fixed(v) => {
            Some(Sigma::from_value(v).map_err(|e| Error::validation("sign_convention", e.to_string()))?)
        }
    };

    let flow_config = IntegratorConfig::with_tolerances(file.tolerances.rtol, file.tolerances.atol);
    flow_config.validate()?;

    let scan_samples = file.scan_samples.unwrap_or(DEFAULT_SCAN_SAMPLES);
    if scan_samples < 2 {
        return Err(Error::validation("scan_samples", "must be >= 2"));
    }
    if file.initial.mode == InitialMode::Explicit {
        for (name, v) in [
            ("phi", file.initial.phi),
            ("varphi", file.initial.varphi),
            ("theta_zero", file.initial.theta_zero),
        ] {
            if let Some(x) = v {
                if !x.is_finite() {
                    return Err(Error::validation(format!("initial.{name}"), "must be finite"));
                }
            }
        }
    }

    Ok(RunConfig {
        kind,
        rep,
        coeffs,
        indices,
        sign,
        flow_config,
        scan_samples,
        file,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "algebra": "su2",
        "representation": {"j": 0.5},
        "coefficients": {
            "omega": {"type": "constant", "re": 1.0},
            "alpha": {"type": "constant", "re": 0.05},
            "beta": {"type": "constant", "re": 0.05}
        }
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL, Path::new("."), "mem").unwrap();
        assert_eq!(c.file.tolerances.rtol, 1e-10);
        assert_eq!(c.file.tolerances.atol, 1e-12);
        assert_eq!(c.file.sign_convention, SignSpec::Auto);
        assert_eq!(c.file.initial.mode, InitialMode::Stationary);
        assert_eq!(c.sign, None);
        assert_eq!(c.indices.len(), 1);
        assert_eq!(c.indices[0].label, 0.5);
        assert_eq!(c.scan_samples, 512);
    }

    #[test]
    fn index_out_of_range_names_the_field() {
        let text = MINIMAL.replace("\"algebra\"", "\"indices\": [7], \"algebra\"");
        match parse_config(&text, Path::new("."), "mem") {
            Err(Error::Validation { field, msg }) => {
                assert_eq!(field, "indices");
                assert!(msg.contains("out of range"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_table_names_the_path() {
        let text = MINIMAL.replace(
            r#""omega": {"type": "constant", "re": 1.0}"#,
            r#""omega": {"type": "table", "path": "nope/omega.csv"}"#,
        );
        match parse_config(&text, Path::new("/tmp/base"), "mem") {
            Err(Error::FileNotFound(p)) => assert_eq!(p, PathBuf::from("/tmp/base/nope/omega.csv")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse_config("{\n  \"algebra\": su2 }", Path::new("."), "cfg.json") {
            Err(Error::Parse { path, line, column, .. }) => {
                assert_eq!(path, "cfg.json");
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sign_convention_forms() {
        for (txt, want) in [("\"auto\"", None), ("1", Some(Sigma::Plus)), ("-1", Some(Sigma::Minus))] {
            let text = MINIMAL.replace("\"algebra\"", &format!("\"sign_convention\": {txt}, \"algebra\""));
            assert_eq!(parse_config(&text, Path::new("."), "mem").unwrap().sign, want);
        }
        let text = MINIMAL.replace("\"algebra\"", "\"sign_convention\": 3, \"algebra\"");
        assert!(matches!(
            parse_config(&text, Path::new("."), "mem"),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn mismatched_representation_and_bad_time() {
        let text = MINIMAL.replace("{\"j\": 0.5}", "{\"cutoff\": 30}");
        assert!(
            matches!(parse_config(&text, Path::new("."), "mem"), Err(Error::Validation { field, .. }) if field == "representation")
        );
        let text = MINIMAL.replace("\"algebra\"", "\"time\": {\"t0\": 1, \"t1\": 0}, \"algebra\"");
        assert!(
            matches!(parse_config(&text, Path::new("."), "mem"), Err(Error::Validation { field, .. }) if field == "time")
        );
        let text = MINIMAL.replace("\"algebra\"", "\"time\": {\"samples\": 1}, \"algebra\"");
        assert!(
            matches!(parse_config(&text, Path::new("."), "mem"), Err(Error::Validation { field, .. }) if field == "time.samples")
        );
    }
}
