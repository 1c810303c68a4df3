//! Run configuration, command dispatch and CSV/JSON serialization.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::analytic::{coefficient_bphi, EisParams};
use crate::arithmetic::degree;
use crate::error::Error;
use crate::numberfield::{BigRat, CmInstance, PrimePowerSpec, QuadElem};
use crate::verify::{alpha_box, check_main_theorem, instance_summary, sort_alphas, RowStatus, VerifyReport, VerifyRow};

pub const THREADS_ENV: &str = "ARAKELOV_EIS_THREADS";

pub const CSV_COLUMNS: [&str; 12] = [
    "alpha_x",
    "alpha_y_coeff",
    "diff_places",
    "rho",
    "ord_factor",
    "eps_q",
    "log_Nq",
    "geometric",
    "b_stripped",
    "exp_factor",
    "residual",
    "pass",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Inspect,
    Degree,
    Coefficient,
    Verify,
}

impl Command {
    fn as_str(&self) -> &'static str {
        match self {
            Command::Inspect => "inspect",
            Command::Degree => "degree",
            Command::Coefficient => "coefficient",
            Command::Verify => "verify",
        }
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "inspect" => Ok(Command::Inspect),
            "degree" => Ok(Command::Degree),
            "coefficient" => Ok(Command::Coefficient),
            "verify" => Ok(Command::Verify),
            _ => Err(format!("unknown command `{s}` (expected inspect, degree, coefficient or verify)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

impl Format {
    fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub d: i64,
    pub delta: i64,
    pub a: Vec<PrimePowerSpec>,
    pub command: Command,
    /// explicit `(x, y)` pairs for `x + y√D`; when empty the box is used
    pub alpha: Vec<(BigRat, BigRat)>,
    pub alpha_box: i64,
    pub y: (f64, f64),
    pub format: Format,
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            d: 2,
            delta: -3,
            a: Vec::new(),
            command: Command::Inspect,
            alpha: Vec::new(),
            alpha_box: 8,
            y: (1.0, 1.0),
            format: Format::Json,
            out: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "config line {l}, key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "config line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "option `{k}`: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn key_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line: None, key: Some(key.to_string()), message: message.into() }
}

pub fn parse_a(s: &str) -> Result<Vec<PrimePowerSpec>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let parts: Vec<&str> = t.split(':').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(format!("`{t}` is not p:branch:exp"));
            }
            let p = parts[0].parse::<u64>().map_err(|e| format!("prime `{}`: {e}", parts[0]))?;
            let b = parts[1].parse::<u8>().map_err(|e| format!("branch `{}`: {e}", parts[1]))?;
            let e = parts[2].parse::<i64>().map_err(|e| format!("exponent `{}`: {e}", parts[2]))?;
            Ok((p, b, e))
        })
        .collect()
}

pub fn parse_alpha(s: &str) -> Result<Vec<(BigRat, BigRat)>, String> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (x, y) = t.split_once(':').ok_or_else(|| format!("`{t}` is not x:y"))?;
            let x = BigRat::from_str(x.trim()).map_err(|e| format!("`{x}`: {e}"))?;
            let y = BigRat::from_str(y.trim()).map_err(|e| format!("`{y}`: {e}"))?;
            Ok((x, y))
        })
        .collect()
}

pub fn parse_y(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("`{s}` is not Y1,Y2"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("`{a}`: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("`{b}`: {e}"))?;
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err("both components must be positive".into());
    }
    Ok((a, b))
}

impl RunConfig {
    /// Parses the `key = value` format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError {
                line: Some(line),
                key: None,
                message: format!("expected key = value, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let err = |m: String| ConfigError { line: Some(line), key: Some(key.to_string()), message: m };
            if !seen.insert(key.to_string()) {
                return Err(err("duplicate key".into()));
            }
            cfg.set(key, value).map_err(err)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let int = |v: &str| v.parse::<i64>().map_err(|e| format!("`{v}`: {e}"));
        match key {
            "D" => self.d = int(value)?,
            "Delta" => self.delta = int(value)?,
            "a" => self.a = parse_a(value)?,
            "command" => self.command = value.parse()?,
            "alpha" => self.alpha = parse_alpha(value)?,
            "alpha_box" => {
                let b = int(value)?;
                if b < 0 {
                    return Err("box bound must be nonnegative".into());
                }
                self.alpha_box = b;
            }
            "y" => self.y = parse_y(value)?,
            "format" => self.format = value.parse()?,
            "out" => self.out = (!value.is_empty()).then(|| value.to_string()),
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Applies a command-line override, reported against the flag name.
    pub fn set_flag(&mut self, flag: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        self.set(key, value).map_err(|m| key_error(flag, m))
    }

    /// Text form accepted by [`RunConfig::parse`].
    pub fn to_text(&self) -> String {
        let a: Vec<String> = self.a.iter().map(|(p, b, e)| format!("{p}:{b}:{e}")).collect();
        let mut s = format!("D = {}\nDelta = {}\na = {}\ncommand = {}\n", self.d, self.delta, a.join(","), self.command.as_str());
        if self.alpha.is_empty() {
            s += &format!("alpha_box = {}\n", self.alpha_box);
        } else {
            let al: Vec<String> = self.alpha.iter().map(|(x, y)| format!("{x}:{y}")).collect();
            s += &format!("alpha = {}\nalpha_box = {}\n", al.join("; "), self.alpha_box);
        }
        s += &format!("y = {},{}\nformat = {}\n", self.y.0, self.y.1, self.format.as_str());
        if let Some(out) = &self.out {
            s += &format!("out = {out}\n");
        }
        s
    }

    pub fn alphas(&self) -> Vec<QuadElem> {
        if self.alpha.is_empty() {
            alpha_box(self.d, self.alpha_box)
        } else {
            self.alpha.iter().map(|(x, y)| QuadElem::new(self.d, x.clone(), y.clone())).collect()
        }
    }
}

/// Reals rounded to 15 significant digits.
pub fn fmt_real(x: f64) -> String {
    let x = x + 0.0;
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        x.to_string()
    }
}

fn json_real(x: f64) -> Value {
    if x.is_finite() {
        json!(fmt_real(x).parse::<f64>().unwrap())
    } else {
        Value::Null
    }
}

fn json_opt(x: Option<f64>) -> Value {
    x.map(json_real).unwrap_or(Value::Null)
}

/// What a command produced: the serialized artifact and whether every
/// asserted check passed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunError {
    Config(ConfigError),
    Instance(Error),
    Io(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Instance(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Instance(e)
    }
}

fn inspect(inst: &CmInstance, format: Format) -> String {
    let c = inst.identity_constant();
    let ram: Vec<String> = inst.ramified_primes().iter().map(|q| q.to_string()).collect();
    let fields: Vec<(&str, Value)> = vec![
        ("D", json!(inst.d)),
        ("Delta", json!(inst.delta)),
        ("a", json!(inst.a.to_string())),
        ("disc_F", json!(inst.disc_f)),
        ("disc_K0", json!(inst.disc_k0)),
        ("different", json!(inst.different.to_string())),
        ("d_KF", json!(inst.d_kf.to_string())),
        ("norm_d_KF", json!(inst.d_kf.norm().to_string())),
        ("ramified_primes", json!(ram.join(";"))),
        ("r", json!(inst.r)),
        ("w_K0", json!(inst.w_k0)),
        ("deg_K", json!(inst.deg_k)),
        ("c_fin", json!(inst.c_fin.to_string())),
        ("fundamental_unit", json!(inst.fundamental_unit.to_string())),
        ("constant", json!(c.to_string())),
        ("constant_value", json_real(crate::numberfield::rational::to_f64(&c))),
    ];
    match format {
        Format::Json => {
            let map: serde_json::Map<String, Value> = fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            serde_json::to_string_pretty(&Value::Object(map)).unwrap() + "\n"
        }
        Format::Csv => {
            let mut s = String::from("key,value\n");
            for (k, v) in fields {
                let v = match v {
                    Value::String(s) => s,
                    other => other.to_string(),
                };
                s += &format!("{k},{}\n", csv_field(&v));
            }
            s
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One output row; fields not produced by the command stay empty.
#[derive(Default)]
struct Row {
    x: String,
    y: String,
    alpha: String,
    diff: String,
    rho: Option<u64>,
    ord_factor: Option<i64>,
    eps_q: Option<u8>,
    log_nq: Option<f64>,
    beta1_arg: Option<f64>,
    geometric: Option<f64>,
    b_stripped: Option<f64>,
    exp_factor: Option<f64>,
    residual: Option<f64>,
    pass: Option<&'static str>,
    family: Option<&'static str>,
    measured_ratio: Option<f64>,
    mismatch: Option<String>,
}

impl Row {
    fn new(a: &QuadElem) -> Self {
        Row { x: a.x.to_string(), y: a.y.to_string(), alpha: a.to_string(), ..Default::default() }
    }

    fn csv(&self) -> String {
        let o = |x: Option<f64>| x.map(fmt_real).unwrap_or_default();
        let s = |x: Option<String>| x.unwrap_or_default();
        [
            self.x.clone(),
            self.y.clone(),
            self.diff.clone(),
            s(self.rho.map(|v| v.to_string())),
            s(self.ord_factor.map(|v| v.to_string())),
            s(self.eps_q.map(|v| v.to_string())),
            o(self.log_nq),
            o(self.geometric),
            o(self.b_stripped),
            o(self.exp_factor),
            o(self.residual),
            self.pass.unwrap_or_default().to_string(),
        ]
        .join(",")
    }

    fn json(&self) -> Value {
        json!({
            "alpha": self.alpha,
            "alpha_x": self.x,
            "alpha_y_coeff": self.y,
            "diff_places": self.diff,
            "rho": self.rho,
            "ord_factor": self.ord_factor,
            "eps_q": self.eps_q,
            "log_Nq": json_opt(self.log_nq),
            "beta1_arg": json_opt(self.beta1_arg),
            "geometric": json_opt(self.geometric),
            "b_stripped": json_opt(self.b_stripped),
            "exp_factor": json_opt(self.exp_factor),
            "residual": json_opt(self.residual),
            "pass": self.pass,
            "family": self.family,
            "measured_ratio": json_opt(self.measured_ratio),
            "mismatch": self.mismatch,
        })
    }
}

fn diff_string(d: &crate::arithmetic::DiffSet) -> String {
    d.places.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn verify_row(r: &VerifyRow) -> Row {
    Row {
        diff: diff_string(&r.diff),
        rho: r.rho,
        ord_factor: r.ord_factor,
        eps_q: r.eps_q,
        log_nq: r.log_nq,
        beta1_arg: r.beta1_arg,
        geometric: Some(r.geometric),
        b_stripped: Some(r.b_stripped),
        exp_factor: Some(r.exp_factor),
        residual: Some(r.residual),
        pass: Some(r.status.as_str()),
        family: Some(match r.family {
            crate::verify::Family::Vanishing => "vanishing",
            crate::verify::Family::Finite => "finite",
            crate::verify::Family::Archimedean => "archimedean",
        }),
        measured_ratio: r.measured_ratio,
        mismatch: r.mismatch.clone(),
        ..Row::new(&r.alpha)
    }
}

fn render_rows(rows: &[Row], format: Format, header: Option<Value>) -> String {
    match format {
        Format::Csv => {
            let mut s = CSV_COLUMNS.join(",") + "\n";
            for r in rows {
                s += &r.csv();
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = rows.iter().map(Row::json).collect();
            let v = match header {
                Some(Value::Object(mut m)) => {
                    m.insert("rows".into(), Value::Array(rows));
                    Value::Object(m)
                }
                _ => json!({ "rows": rows }),
            };
            serde_json::to_string_pretty(&v).unwrap() + "\n"
        }
    }
}

fn report_header(rep: &VerifyReport) -> Value {
    let arch = rep.arch.as_ref().map(|a| {
        json!({
            "rows": a.rows,
            "mean_ratio": json_real(a.mean_ratio),
            "spread": json_real(a.spread),
            "ratio_to_constant": json_real(a.ratio_to_constant),
            "ratio_with_positive_power": json_real(a.ratio_with_positive_power),
            "agrees_as_printed": a.agrees_as_printed,
            "agrees_with_positive_power": a.agrees_with_positive_power,
        })
    });
    json!({
        "instance": rep.instance,
        "constant": rep.constant.to_string(),
        "passed": rep.passed,
        "failed": rep.failed,
        "measured": rep.measured,
        "worst_residual": json_real(rep.worst_residual),
        "archimedean": arch,
    })
}

/// Human-readable verify summary, written to stderr by the binary.
pub fn report_summary(rep: &VerifyReport) -> String {
    let mut s = format!(
        "{}: {} passed, {} failed, {} measured, worst residual {:.3e}\n",
        rep.instance, rep.passed, rep.failed, rep.measured, rep.worst_residual
    );
    if let Some(a) = &rep.arch {
        s += &format!(
            "archimedean family: {} rows, spread {:.3e}, ratio to constant {:.12} as printed ({}), {:.12} with 2^(r-1) ({})\n",
            a.rows,
            a.spread,
            a.ratio_to_constant,
            if a.agrees_as_printed { "agree" } else { "disagree" },
            a.ratio_with_positive_power,
            if a.agrees_with_positive_power { "agree" } else { "disagree" },
        );
    }
    for r in rep.rows.iter().filter(|r| r.status == RowStatus::Fail).take(10) {
        s += &format!("FAIL alpha={} diff={} {}\n", r.alpha, r.diff, r.mismatch.as_deref().unwrap_or(""));
    }
    s
}

/// Builds the instance and produces the artifact for the configured command.
pub fn execute(cfg: &RunConfig) -> Result<(Outcome, Option<VerifyReport>), RunError> {
    let inst = CmInstance::new(cfg.d, cfg.delta, &cfg.a)?;
    let params = EisParams::derivative(cfg.y)?;
    let mut alphas = cfg.alphas();
    if alphas.iter().any(|a| a.is_zero()) {
        return Err(RunError::Config(key_error("alpha", "alpha must be nonzero")));
    }
    sort_alphas(&mut alphas);
    let header = json!({ "instance": instance_summary(&inst), "command": cfg.command.as_str() });
    let text = match cfg.command {
        Command::Inspect => inspect(&inst, cfg.format),
        Command::Degree => {
            let rows = alphas
                .iter()
                .map(|a| {
                    let d = degree(&inst, a, cfg.y)?;
                    let t = d.terms.first();
                    Ok(Row {
                        diff: diff_string(&d.diff),
                        rho: t.map(|t| t.rho),
                        ord_factor: t.map(|t| t.ord_factor),
                        eps_q: t.map(|t| t.eps_q),
                        log_nq: t.map(|t| t.log_nq),
                        beta1_arg: d.beta1_arg,
                        geometric: Some(d.total),
                        ..Row::new(a)
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            render_rows(&rows, cfg.format, Some(header))
        }
        Command::Coefficient => {
            let rows = alphas
                .iter()
                .map(|a| {
                    let c = coefficient_bphi(&inst, a, &params)?;
                    let single = c.diff.len() == 1;
                    Ok(Row {
                        diff: diff_string(&c.diff),
                        rho: single.then_some(c.rho),
                        ord_factor: c.eps.map(|_| c.ord_factor),
                        eps_q: c.eps,
                        log_nq: c.log_np,
                        beta1_arg: c.beta1_arg,
                        b_stripped: Some(c.b_stripped),
                        exp_factor: Some(c.exp_factor),
                        ..Row::new(a)
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            render_rows(&rows, cfg.format, Some(header))
        }
        Command::Verify => {
            let rep = check_main_theorem(&inst, &alphas, &params);
            let rows: Vec<Row> = rep.rows.iter().map(verify_row).collect();
            let text = render_rows(&rows, cfg.format, Some(report_header(&rep)));
            let ok = rep.all_pass();
            return Ok((Outcome { text, ok }, Some(rep)));
        }
    };
    Ok((Outcome { text, ok: true }, None))
}

fn thread_pool() -> Result<rayon::ThreadPool, RunError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| RunError::Config(key_error(THREADS_ENV, format!("`{v}` is not a positive integer"))))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| RunError::Io(e.to_string()))
}

/// Runs the command, writes the artifact and returns the exit code:
/// 0 on success, 1 on configuration or instance errors, 2 on a failed verify.
pub fn run(cfg: &RunConfig) -> i32 {
    let result = thread_pool().and_then(|pool| pool.install(|| execute(cfg)));
    let (outcome, report) = match result {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Some(rep) = &report {
        eprint!("{}", report_summary(rep));
    }
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.text).map_err(|e| format!("{path}: {e}")),
        None => {
            print!("{}", outcome.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 1;
    }
    if outcome.ok {
        0
    } else {
        2
    }
}
