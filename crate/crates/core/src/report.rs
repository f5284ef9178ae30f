//! Measure reports and their JSON encoding.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basic::{binned_ece, ece, ece_q, tv_characterization};
use crate::decision::{cdl, cfdl, DecisionTask};
use crate::distance::{dce_oracle_solution, dce_upper_oracle_solution, intce_opt, DEFAULT_ORACLE_CAP};
use crate::error::{Error, Result};
use crate::io::{read_csv, read_instance, read_jsonl, InputFormat};
use crate::joint::{EmpiricalJoint, FiniteInstance};
use crate::weighted::{emd_joints, kernel_ce, low_degree_ce, smce, Kernel};

/// Version of every JSON document written by the tool.
pub const SCHEMA_VERSION: u32 = 1;

/// Knobs that can change a measure's value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    /// Grid resolution for interval calibration error.
    pub grid: usize,
    pub oracle_cap: usize,
    /// Slack allowed when checking inequalities between measures.
    pub tolerance: f64,
    /// Kernel used by the bare `kernel` measure id.
    pub kernel: String,
    pub seed: Option<u64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            grid: 1000,
            oracle_cap: DEFAULT_ORACLE_CAP,
            tolerance: 1e-9,
            kernel: "laplace:1".into(),
            seed: None,
        }
    }
}

/// TOML configuration; absent keys keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub grid: Option<usize>,
    pub oracle_cap: Option<usize>,
    pub tolerance: Option<f64>,
    pub kernel: Option<String>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
    }

    /// Values from this file layered over `base`.
    pub fn apply(&self, base: Config) -> Config {
        Config {
            grid: self.grid.unwrap_or(base.grid),
            oracle_cap: self.oracle_cap.unwrap_or(base.oracle_cap),
            tolerance: self.tolerance.unwrap_or(base.tolerance),
            kernel: self.kernel.clone().unwrap_or(base.kernel),
            seed: self.seed.or(base.seed),
        }
    }
}

/// Parses `laplace[:scale]` or `gaussian:<bandwidth>`.
pub fn parse_kernel(spec: &str) -> Result<Kernel> {
    let positive = |s: &str| match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(Error::UnknownMeasure(format!("kernel:{spec}"))),
    };
    match spec.split(':').collect::<Vec<_>>().as_slice() {
        ["laplace"] => Ok(Kernel::Laplace { scale: 1.0 }),
        ["laplace", s] => Ok(Kernel::Laplace { scale: positive(s)? }),
        ["gaussian", b] => Ok(Kernel::Gaussian { bandwidth: positive(b)? }),
        _ => Err(Error::UnknownMeasure(format!("kernel:{spec}"))),
    }
}

/// Decision task named in a `cfdl:` measure id.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskSpec {
    Matching,
    Threshold(f64),
    Quadratic(f64),
    File(PathBuf),
}

impl TaskSpec {
    pub fn load(&self) -> Result<DecisionTask> {
        match self {
            Self::Matching => Ok(DecisionTask::matching()),
            Self::Threshold(c) => DecisionTask::threshold(*c),
            Self::Quadratic(h) => DecisionTask::quadratic(*h),
            Self::File(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
            }
        }
    }
}

/// A measure selected by id.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Ece,
    EceQ(f64),
    Tv,
    Binned(usize),
    Smce,
    LowDegree(usize),
    /// `None` uses the configured kernel.
    Kernel(Option<String>),
    Emd,
    Cdl,
    Cfdl(TaskSpec),
    Intce,
    DceUpper,
    Dce,
}

/// Ids listed by `--help`; parameterized ids take the suffix shown.
pub const MEASURE_IDS: &[&str] = &[
    "ece",
    "ece2",
    "ece_q:<q>",
    "tv",
    "binned:<buckets>",
    "smce",
    "lowdeg:<degree>",
    "kernel[:laplace[:<scale>]|:gaussian:<bandwidth>]",
    "emd",
    "cdl",
    "cfdl:<matching|threshold:<v>|quadratic[:<h>]|task.json>",
    "intce",
    "dce_upper",
    "dce",
];

impl FromStr for Measure {
    type Err = Error;

    fn from_str(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownMeasure(id.to_string());
        let (head, rest) = match id.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (id, None),
        };
        Ok(match (head, rest) {
            ("ece", None) => Self::Ece,
            ("ece2", None) => Self::EceQ(2.0),
            ("ece_q", Some(q)) => match q.parse::<f64>() {
                Ok(q) if q >= 1.0 && q.is_finite() => Self::EceQ(q),
                _ => return Err(unknown()),
            },
            ("tv", None) => Self::Tv,
            ("binned", Some(b)) => match b.parse::<usize>() {
                Ok(b) if b > 0 => Self::Binned(b),
                _ => return Err(unknown()),
            },
            ("smce", None) => Self::Smce,
            ("lowdeg", Some(d)) => Self::LowDegree(d.parse().map_err(|_| unknown())?),
            ("kernel", None) => Self::Kernel(None),
            ("kernel", Some(k)) => {
                parse_kernel(k)?;
                Self::Kernel(Some(k.to_string()))
            }
            ("emd", None) => Self::Emd,
            ("cdl", None) => Self::Cdl,
            ("cfdl", Some(task)) => Self::Cfdl(parse_task(task).ok_or_else(unknown)?),
            ("intce", None) => Self::Intce,
            ("dce_upper", None) => Self::DceUpper,
            ("dce", None) => Self::Dce,
            _ => return Err(unknown()),
        })
    }
}

fn parse_task(spec: &str) -> Option<TaskSpec> {
    match spec.split(':').collect::<Vec<_>>().as_slice() {
        ["matching"] => Some(TaskSpec::Matching),
        ["threshold", c] => c.parse().ok().map(TaskSpec::Threshold),
        ["quadratic"] => Some(TaskSpec::Quadratic(1e-3)),
        ["quadratic", h] => h.parse().ok().map(TaskSpec::Quadratic),
        _ if !spec.is_empty() => Some(TaskSpec::File(PathBuf::from(spec))),
        _ => None,
    }
}

/// Parsed input: the prediction-label joint, and the feature space when the
/// input was an instance file.
#[derive(Debug, Clone)]
pub struct Input {
    pub joint: EmpiricalJoint,
    pub instance: Option<FiniteInstance>,
    /// Hex SHA-256 of the raw input bytes.
    pub digest: String,
}

impl Input {
    pub fn from_instance(instance: FiniteInstance) -> Self {
        let digest = sha256_hex(serde_json::to_string(&instance).expect("serializable").as_bytes());
        Self {
            joint: instance.project(),
            instance: Some(instance),
            digest,
        }
    }

    pub fn from_joint(joint: EmpiricalJoint) -> Self {
        let digest = sha256_hex(serde_json::to_string(&joint).expect("serializable").as_bytes());
        Self {
            joint,
            instance: None,
            digest,
        }
    }

    /// Reads `.csv`, `.jsonl` (one `{"p", "y", "w"?}` per line) or `.json`
    /// (a feature-space instance).
    pub fn load(path: &Path) -> Result<Self> {
        let format = InputFormat::from_path(path).ok_or_else(|| {
            Error::Malformed(format!("{}: unsupported extension", path.display()))
        })?;
        let bytes = std::fs::read(path)?;
        Self::parse(&bytes, format)
    }

    pub fn parse(bytes: &[u8], format: InputFormat) -> Result<Self> {
        let digest = sha256_hex(bytes);
        let (joint, instance) = match format {
            InputFormat::Csv => (read_csv(bytes)?, None),
            InputFormat::Jsonl => (read_jsonl(bytes)?, None),
            InputFormat::Instance => {
                let instance = read_instance(bytes)?;
                (instance.project(), Some(instance))
            }
        };
        Ok(Self {
            joint,
            instance,
            digest,
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Value of one measure. Non-fatal remarks are appended to `warnings`.
pub fn evaluate(
    measure: &Measure,
    input: &Input,
    config: &Config,
    warnings: &mut Vec<String>,
) -> Result<f64> {
    let j = &input.joint;
    let value = match measure {
        Measure::Ece => ece(j),
        Measure::EceQ(q) => ece_q(j, *q)?,
        Measure::Tv => tv_characterization(j),
        Measure::Binned(b) => binned_ece(j, *b)?,
        Measure::Smce => smce(j),
        Measure::LowDegree(d) => low_degree_ce(j, *d),
        Measure::Kernel(spec) => {
            kernel_ce(j, &parse_kernel(spec.as_deref().unwrap_or(&config.kernel))?)?
        }
        Measure::Emd => emd_joints(j)?,
        Measure::Cdl => cdl(j),
        Measure::Cfdl(task) => cfdl(j, &task.load()?),
        Measure::Intce => {
            let opt = intce_opt(j, config.grid)?;
            if !opt.separated {
                warnings.push(format!(
                    "intce: grid 1/{} cannot separate some distinct predictions",
                    config.grid
                ));
            }
            opt.value
        }
        Measure::DceUpper => dce_upper_oracle_solution(j, config.oracle_cap)?.value,
        Measure::Dce => {
            let instance = input.instance.as_ref().ok_or_else(|| {
                Error::Contract("dce needs a feature-space instance (.json input)".into())
            })?;
            dce_oracle_solution(instance, config.oracle_cap)?.value
        }
    };
    if !value.is_finite() {
        return Err(Error::Contract(format!("measure produced {value}")));
    }
    Ok(value)
}

/// One inequality `lhs <= rhs + tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    pub fn le(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs + tolerance,
        }
    }
}

/// `ece^2 <= ece2^2 <= cdl <= 2 ece <= 2 ece2`
pub fn relation_checks(joint: &EmpiricalJoint, tolerance: f64) -> BTreeMap<String, Check> {
    let e = ece(joint);
    let e2 = ece_q(joint, 2.0).expect("q = 2 is valid");
    let c = cdl(joint);
    BTreeMap::from([
        ("1_ece_sq_le_ece2_sq".into(), Check::le(e * e, e2 * e2, tolerance)),
        ("2_ece2_sq_le_cdl".into(), Check::le(e2 * e2, c, tolerance)),
        ("3_cdl_le_2ece".into(), Check::le(c, 2.0 * e, tolerance)),
        ("4_2ece_le_2ece2".into(), Check::le(2.0 * e, 2.0 * e2, tolerance)),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub version: String,
    pub input_sha256: String,
    pub config: Config,
    pub warnings: Vec<String>,
}

impl Meta {
    fn new(input: &Input, config: &Config, warnings: Vec<String>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").into(),
            input_sha256: input.digest.clone(),
            config: config.clone(),
            warnings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub schema: u32,
    pub measures: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relations: Option<BTreeMap<String, Check>>,
    pub meta: Meta,
}

impl MetricReport {
    pub fn relations_hold(&self) -> bool {
        self.relations
            .as_ref()
            .is_none_or(|r| r.values().all(|c| c.holds))
    }
}

/// Evaluates every id in `ids`; the first failure aborts.
pub fn build_report(
    input: &Input,
    ids: &[String],
    config: &Config,
    verify_relations: bool,
) -> Result<MetricReport> {
    let measures: Vec<(String, Measure)> = ids
        .iter()
        .map(|id| Ok((id.clone(), id.parse::<Measure>()?)))
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    let mut values = BTreeMap::new();
    for (id, m) in &measures {
        values.insert(id.clone(), evaluate(m, input, config, &mut warnings)?);
    }
    Ok(MetricReport {
        schema: SCHEMA_VERSION,
        measures: values,
        relations: verify_relations.then(|| relation_checks(&input.joint, config.tolerance)),
        meta: Meta::new(input, config, warnings),
    })
}

/// Oracle values for a small instance and the inequalities between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub schema: u32,
    pub dce: f64,
    pub dce_upper: f64,
    pub intce: f64,
    pub smce: f64,
    pub ece: f64,
    pub sandwich_checks: BTreeMap<String, Check>,
    pub meta: Meta,
}

pub fn build_oracle_report(instance: &FiniteInstance, config: &Config) -> Result<OracleReport> {
    let input = Input::from_instance(instance.clone());
    oracle_report_for(&input, config)
}

pub fn oracle_report_for(input: &Input, config: &Config) -> Result<OracleReport> {
    let instance = input
        .instance
        .as_ref()
        .ok_or_else(|| Error::Contract("the oracle needs a feature-space instance".into()))?;
    let j = &input.joint;
    let dce = dce_oracle_solution(instance, config.oracle_cap)?.value;
    let dce_upper = dce_upper_oracle_solution(j, config.oracle_cap)?.value;
    let opt = intce_opt(j, config.grid)?;
    let mut warnings = Vec::new();
    if !opt.separated {
        warnings.push(format!(
            "intce: grid 1/{} cannot separate some distinct predictions",
            config.grid
        ));
    }
    let smce_value = smce(j);
    let ece_value = ece(j);
    let tol = config.tolerance;
    let grid_slack = 2.0 / config.grid as f64;
    let sandwich_checks = BTreeMap::from([
        ("half_smce_le_dce".into(), Check::le(smce_value / 2.0, dce, tol)),
        ("dce_le_dce_upper".into(), Check::le(dce, dce_upper, tol)),
        ("dce_upper_le_4_sqrt_dce".into(), Check::le(dce_upper, 4.0 * dce.sqrt(), tol)),
        ("dce_upper_le_intce".into(), Check::le(dce_upper, opt.value + grid_slack, tol)),
        ("dce_upper_le_ece".into(), Check::le(dce_upper, ece_value, tol)),
    ]);
    Ok(OracleReport {
        schema: SCHEMA_VERSION,
        dce,
        dce_upper,
        intce: opt.value,
        smce: smce_value,
        ece: ece_value,
        sandwich_checks,
        meta: Meta::new(input, config, warnings),
    })
}

/// Pretty JSON with every float written by [`format_float`].
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FloatFormatter::default());
    value.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

#[derive(Default)]
struct FloatFormatter<'a> {
    pretty: serde_json::ser::PrettyFormatter<'a>,
}

impl serde_json::ser::Formatter for FloatFormatter<'_> {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            w.write_all(format_float(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }
    fn write_f32<W: ?Sized + std::io::Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
    fn begin_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.begin_array(w)
    }
    fn end_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_array(w)
    }
    fn begin_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_array_value(w)
    }
    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.begin_object(w)
    }
    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_object(w)
    }
    fn begin_object_key<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

impl fmt::Debug for FloatFormatter<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FloatFormatter")
    }
}

/// `%.17g`: 17 significant digits, trailing zeros stripped.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
