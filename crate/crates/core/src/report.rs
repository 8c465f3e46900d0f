//! Residual reports: a header plus key-sorted `key = value` entries.
//!
//! ```text
//! # confhyp report
//! [header]
//! label = "random d=4 K=4 seed=1"
//! mode = exact
//! seed = 1
//! [entries]
//! identity.gauss = 0
//! value.H = 2/3
//! ```
//!
//! Values are rationals (`p/q`, or `p` for integers), floats with 17
//! significant digits (`1.2345678901234567e-3`, `NaN`, `inf`), booleans, or
//! double-quoted strings. Empty documents have no `[entries]` section.
//! `timestamp` and `elapsed_ms` header fields are the only non-deterministic
//! parts and can be left out.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::conformal::{ProbeReport, WeightLawReport};
use crate::error::{Error, Result};
use crate::residual::Residual;
use crate::scalar::{format_rational, parse_rational, CoefficientMode, Rational, Scalar};
use crate::tensor::TensorJet;

pub const GENERICITY_NOTE: &str =
    "seeded random jets stand in for generic metrics; probe upper bounds are probabilistic";

#[derive(Debug, Clone, PartialEq)]
pub enum ReportValue {
    Exact(Rational),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl ReportValue {
    pub fn from_scalar<S: Scalar>(v: &S) -> Self {
        match (S::MODE, v.to_rational()) {
            (CoefficientMode::Exact, Some(r)) => ReportValue::Exact(r),
            _ => ReportValue::Float(v.to_f64()),
        }
    }

    pub fn from_residual(r: &Residual) -> Self {
        match &r.exact {
            Some(e) => ReportValue::Exact(e.clone()),
            None => ReportValue::Float(r.magnitude),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ReportValue::Exact(r) => Some(Scalar::to_f64(r)),
            ReportValue::Float(f) => Some(*f),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            ReportValue::Exact(r) => format_rational(r),
            ReportValue::Float(f) if f.is_finite() => format!("{f:.16e}"),
            ReportValue::Float(f) => format!("{f}"),
            ReportValue::Bool(b) => b.to_string(),
            ReportValue::Text(s) => quote(s),
        }
    }

    fn parse(text: &str) -> Option<Self> {
        let t = text.trim();
        if t.starts_with('"') {
            return unquote(t).map(ReportValue::Text);
        }
        match t {
            "true" => return Some(ReportValue::Bool(true)),
            "false" => return Some(ReportValue::Bool(false)),
            _ => {}
        }
        let lower = t.to_ascii_lowercase();
        if lower.contains('e') || lower.contains("nan") || lower.contains("inf") || t.contains('.') {
            return t.parse().ok().map(ReportValue::Float);
        }
        parse_rational(t).map(ReportValue::Exact)
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn unquote(s: &str) -> Option<String> {
    let inner = s.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next()? {
                'n' => out.push('\n'),
                c @ ('"' | '\\') => out.push(c),
                _ => return None,
            },
            '"' => return None,
            c => out.push(c),
        }
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub label: String,
    pub seed: u64,
    pub mode: CoefficientMode,
    /// Seconds since the Unix epoch.
    pub timestamp: Option<u64>,
    pub elapsed_ms: Option<f64>,
    pub entries: BTreeMap<String, ReportValue>,
    /// Names of failed checks, sorted.
    pub failures: Vec<String>,
}

impl ResidualReport {
    pub fn new(label: impl Into<String>, seed: u64, mode: CoefficientMode) -> Self {
        ResidualReport {
            label: label.into(),
            seed,
            mode,
            timestamp: None,
            elapsed_ms: None,
            entries: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: ReportValue) {
        self.entries.insert(key.into(), value);
    }

    pub fn get(&self, key: &str) -> Option<&ReportValue> {
        self.entries.get(key)
    }

    /// Records a named pass/fail outcome as `check.{name}`.
    pub fn record_check(&mut self, name: &str, passed: bool) {
        self.insert(format!("check.{name}"), ReportValue::Bool(passed));
        if !passed {
            let pos = self.failures.binary_search_by(|f| f.as_str().cmp(name)).unwrap_or_else(|p| p);
            self.failures.insert(pos, name.to_string());
        }
    }

    /// `residual.{name}` plus its check.
    pub fn record_residual(&mut self, name: &str, r: &Residual, rel_tol: f64) {
        self.insert(format!("residual.{name}"), ReportValue::from_residual(r));
        self.record_check(name, r.passes(rel_tol));
    }

    pub fn record_tensor<S: Scalar>(&mut self, name: &str, t: &TensorJet<S>) {
        for idx in t.indices() {
            let key = if idx.is_empty() {
                format!("value.{name}")
            } else {
                let parts: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                format!("value.{name}[{}]", parts.join(","))
            };
            self.insert(key, ReportValue::from_scalar(t.get(&idx).value()));
        }
    }

    pub fn record_values<S: Scalar>(&mut self, name: &str, values: &[S]) {
        for (i, v) in values.iter().enumerate() {
            self.insert(format!("value.{name}[{i}]"), ReportValue::from_scalar(v));
        }
    }

    pub fn record_weight_law(&mut self, r: &WeightLawReport, rel_tol: f64) {
        let name = format!("weight_law.{}", r.name);
        self.insert(format!("{name}.weight"), ReportValue::Exact(r.weight.clone()));
        self.record_residual(&name, &r.residual, rel_tol);
    }

    /// Stores a probe and, when `expected` is given, checks its detected
    /// order against it (`Some(None)` expects no sensitivity at all).
    pub fn record_probe(&mut self, r: &ProbeReport, expected: Option<Option<usize>>) {
        let name = format!("probe.{}", r.name);
        let order = match r.detected_order {
            Some(k) => ReportValue::Exact(Rational::from_integer((k as i64).into())),
            None => ReportValue::Text("none".into()),
        };
        self.insert(format!("{name}.detected_order"), order);
        self.insert(format!("{name}.trials"), ReportValue::Exact(Rational::from_integer((r.trials as i64).into())));
        self.insert(format!("{name}.seed"), ReportValue::Text(r.seed.to_string()));
        for (k, s) in r.sensitivities.iter().enumerate() {
            self.insert(format!("{name}.sensitivity[{k}]"), ReportValue::Float(*s));
        }
        if let Some(e) = expected {
            self.record_check(&name, r.detected_order == e);
        }
    }

    /// Stores a probe and checks `detected_order ≤ bound`.
    pub fn record_probe_bound(&mut self, r: &ProbeReport, bound: usize) {
        self.record_probe(r, None);
        self.record_check(&format!("probe.{}", r.name), r.detected_order.map_or(true, |k| k <= bound));
    }

    /// Merges another report's entries and failures.
    pub fn absorb(&mut self, other: ResidualReport) {
        self.entries.extend(other.entries);
        for f in other.failures {
            if let Err(pos) = self.failures.binary_search(&f) {
                self.failures.insert(pos, f);
            }
        }
    }
}

pub fn write_report(r: &ResidualReport) -> String {
    let mut out = String::from("# confhyp report\n[header]\n");
    let mut header: BTreeMap<&str, String> = BTreeMap::new();
    header.insert("label", quote(&r.label));
    header.insert("mode", r.mode.as_str().to_string());
    header.insert("seed", r.seed.to_string());
    header.insert("note", quote(GENERICITY_NOTE));
    header.insert("status", if r.passed() { "pass" } else { "fail" }.into());
    if !r.failures.is_empty() {
        header.insert("failures", quote(&r.failures.join(",")));
    }
    if let Some(t) = r.timestamp {
        header.insert("timestamp", t.to_string());
    }
    if let Some(ms) = r.elapsed_ms {
        header.insert("elapsed_ms", format!("{ms:.3}"));
    }
    for (k, v) in header {
        let _ = writeln!(out, "{k} = {v}");
    }
    if !r.entries.is_empty() {
        out.push_str("[entries]\n");
        for (k, v) in &r.entries {
            let _ = writeln!(out, "{k} = {}", v.render());
        }
    }
    out
}

pub fn parse_report(text: &str) -> Result<ResidualReport> {
    let mut report = ResidualReport::new("", 0, CoefficientMode::Float);
    let mut section = "";
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "[header]" || line == "[entries]" {
            section = if line == "[header]" { "header" } else { "entries" };
            continue;
        }
        let syntax = |message: &str| Error::Syntax {
            line: line_no,
            message: message.into(),
        };
        let (key, value) = line.split_once(" = ").ok_or_else(|| syntax("expected `key = value`"))?;
        match section {
            "header" => match key {
                "label" => report.label = unquote(value).ok_or_else(|| syntax("bad label"))?,
                "mode" => report.mode = value.parse().map_err(|_| syntax("bad mode"))?,
                "seed" => report.seed = value.parse().map_err(|_| syntax("bad seed"))?,
                "timestamp" => report.timestamp = Some(value.parse().map_err(|_| syntax("bad timestamp"))?),
                "elapsed_ms" => report.elapsed_ms = Some(value.parse().map_err(|_| syntax("bad elapsed_ms"))?),
                "failures" => {
                    let list = unquote(value).ok_or_else(|| syntax("bad failure list"))?;
                    report.failures = list.split(',').filter(|s| !s.is_empty()).map(String::from).collect();
                }
                "note" | "status" => {}
                _ => return Err(syntax("unknown header field")),
            },
            "entries" => {
                let v = ReportValue::parse(value).ok_or_else(|| syntax("bad value"))?;
                report.entries.insert(key.to_string(), v);
            }
            _ => return Err(syntax("entry outside a section")),
        }
    }
    Ok(report)
}
