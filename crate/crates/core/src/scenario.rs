//! Scenario files: a metric, a defining function and an optional conformal
//! factor, each given as polynomial jets at the origin.
//!
//! ```text
//! # comments start with '#'
//! [meta]
//! dimension = 4
//! order = 4
//! mode = exact          # or float
//! seed = 7
//! label = free text
//!
//! [metric]
//! # i j e1 .. ed coeff   (1-based indices; (i,j) and (j,i) are the same entry)
//! 1 1 0 0 0 0 1
//!
//! [defining_function]
//! # e1 .. ed coeff
//! 0 0 0 1 1
//!
//! [conformal_factor]
//! 0 0 0 0 3/2
//! ```
//!
//! Coefficients are rationals `p/q`, integers, or decimals (read exactly).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetContext};
use crate::scalar::{format_rational, parse_rational, CoefficientMode, Rational, Scalar};
use crate::tensor::{is_positive_definite, MetricJet};

/// Polynomial given by exponent vectors and coefficients.
pub type Polynomial = BTreeMap<Vec<u8>, Rational>;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub dimension: usize,
    pub order: usize,
    pub mode: CoefficientMode,
    pub seed: u64,
    pub label: String,
    /// Keyed by `(i, j, exponents)` with zero-based `i <= j`.
    pub metric: BTreeMap<(usize, usize, Vec<u8>), Rational>,
    pub defining_function: Polynomial,
    pub conformal_factor: Option<Polynomial>,
}

/// A scenario instantiated over a coefficient field.
#[derive(Debug, Clone)]
pub struct Instance<S> {
    pub metric: MetricJet<S>,
    pub defining_function: Jet<S>,
    pub conformal_factor: Option<Jet<S>>,
}

fn field(name: &str, message: impl Into<String>) -> Error {
    Error::InvalidField {
        field: name.into(),
        message: message.into(),
    }
}

fn degree(e: &[u8]) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

impl ScenarioSpec {
    /// The flat metric with `s = x_d` and no conformal factor.
    pub fn flat(dimension: usize, order: usize) -> Self {
        let mut metric = BTreeMap::new();
        for i in 0..dimension {
            metric.insert((i, i, vec![0; dimension]), <Rational as One>::one());
        }
        let mut s = Polynomial::new();
        let mut e = vec![0; dimension];
        e[dimension - 1] = 1;
        s.insert(e, <Rational as One>::one());
        ScenarioSpec {
            dimension,
            order,
            mode: CoefficientMode::Exact,
            seed: 0,
            label: "flat".into(),
            metric,
            defining_function: s,
            conformal_factor: None,
        }
    }

    pub fn metric_value(&self, i: usize, j: usize) -> Rational {
        let key = (i.min(j), i.max(j), vec![0; self.dimension]);
        self.metric.get(&key).cloned().unwrap_or_else(<Rational as Zero>::zero)
    }

    /// Checks every documented invariant.
    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        if d < 4 {
            return Err(field("dimension", format!("must be at least 4, got {d}")));
        }
        if self.order < 2 {
            return Err(field("order", format!("must be at least 2, got {}", self.order)));
        }
        if self.order > 12 {
            return Err(field("order", format!("must be at most 12, got {}", self.order)));
        }
        for (i, j, e) in self.metric.keys() {
            if *i > *j || *j >= d || e.len() != d {
                return Err(field("metric", "entry out of range"));
            }
            if degree(e) > self.order {
                return Err(field("metric", format!("term of degree {} exceeds order", degree(e))));
            }
        }
        let base: Vec<Vec<Rational>> = (0..d)
            .map(|i| (0..d).map(|j| self.metric_value(i, j)).collect())
            .collect();
        if !is_positive_definite(&base) {
            return Err(field("metric", "metric not positive definite at base point"));
        }
        check_polynomial("defining_function", &self.defining_function, d, self.order)?;
        let zero = vec![0u8; d];
        if self.defining_function.get(&zero).is_some_and(|c| !Zero::is_zero(c)) {
            return Err(field("defining_function", "s does not vanish at the base point"));
        }
        let has_gradient = (0..d).any(|k| {
            let mut e = zero.clone();
            e[k] = 1;
            self.defining_function.get(&e).is_some_and(|c| !Zero::is_zero(c))
        });
        if !has_gradient {
            return Err(field("defining_function", "ds vanishes at the base point"));
        }
        if let Some(omega) = &self.conformal_factor {
            check_polynomial("conformal_factor", omega, d, self.order)?;
            if !omega.get(&zero).is_some_and(|c| Signed::is_positive(c)) {
                return Err(field("conformal_factor", "conformal factor not positive at base point"));
            }
        }
        Ok(())
    }

    pub fn context(&self) -> Result<JetContext> {
        JetContext::new(self.dimension, self.order)
    }

    /// Builds the jets over a coefficient field.
    pub fn instantiate<S: Scalar>(&self) -> Result<Instance<S>> {
        self.instantiate_at(self.order)
    }

    /// Builds the jets truncated at `order <= self.order`.
    pub fn instantiate_at<S: Scalar>(&self, order: usize) -> Result<Instance<S>> {
        self.validate()?;
        let ctx = JetContext::new(self.dimension, order.min(self.order))?;
        let poly = |p: &Polynomial| {
            Jet::from_terms(&ctx, p.iter().map(|(e, c)| (e.as_slice(), S::from_rational(c))))
        };
        let mut comps: BTreeMap<(usize, usize), Vec<(&[u8], S)>> = BTreeMap::new();
        for ((i, j, e), c) in &self.metric {
            comps.entry((*i, *j)).or_default().push((e.as_slice(), S::from_rational(c)));
        }
        let metric = MetricJet::from_upper(&ctx, |i, j| {
            let terms = comps.get(&(i, j)).cloned().unwrap_or_default();
            Jet::from_terms(&ctx, terms).expect("validated exponents")
        })?;
        let defining_function = poly(&self.defining_function)?;
        let conformal_factor = self.conformal_factor.as_ref().map(poly).transpose()?;
        Ok(Instance {
            metric,
            defining_function,
            conformal_factor,
        })
    }

    /// Writes the scenario in the documented text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[meta]");
        let _ = writeln!(out, "dimension = {}", self.dimension);
        let _ = writeln!(out, "order = {}", self.order);
        let _ = writeln!(out, "mode = {}", self.mode);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "label = {}", self.label);
        let _ = writeln!(out, "\n[metric]");
        for ((i, j, e), c) in &self.metric {
            let _ = writeln!(out, "{} {} {} {}", i + 1, j + 1, join(e), format_rational(c));
        }
        let _ = writeln!(out, "\n[defining_function]");
        for (e, c) in &self.defining_function {
            let _ = writeln!(out, "{} {}", join(e), format_rational(c));
        }
        if let Some(omega) = &self.conformal_factor {
            let _ = writeln!(out, "\n[conformal_factor]");
            for (e, c) in omega {
                let _ = writeln!(out, "{} {}", join(e), format_rational(c));
            }
        }
        out
    }
}

fn join(e: &[u8]) -> String {
    e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn check_polynomial(name: &str, p: &Polynomial, d: usize, order: usize) -> Result<()> {
    for e in p.keys() {
        if e.len() != d {
            return Err(field(name, "exponent vector has the wrong length"));
        }
        if degree(e) > order {
            return Err(field(name, format!("term of degree {} exceeds order", degree(e))));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Meta,
    Metric,
    Defining,
    Conformal,
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec> {
    let mut section = Section::None;
    let mut meta: BTreeMap<String, (usize, String)> = BTreeMap::new();
    // raw rows, checked once the dimension is known
    let mut metric_rows: Vec<(usize, Vec<String>)> = Vec::new();
    let mut s_rows: Vec<(usize, Vec<String>)> = Vec::new();
    let mut omega_rows: Option<Vec<(usize, Vec<String>)>> = None;
    let mut seen = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| Error::Syntax {
            line: line_no,
            message,
        };
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| syntax("unterminated section header".into()))?
                .trim();
            section = match name {
                "meta" => Section::Meta,
                "metric" => Section::Metric,
                "defining_function" => Section::Defining,
                "conformal_factor" => {
                    omega_rows.get_or_insert_with(Vec::new);
                    Section::Conformal
                }
                other => return Err(syntax(format!("unknown section `{other}`"))),
            };
            if seen.contains(&name.to_string()) {
                return Err(syntax(format!("section `{name}` appears twice")));
            }
            seen.push(name.to_string());
            continue;
        }
        let tokens = || line.split_whitespace().map(str::to_string).collect::<Vec<_>>();
        match section {
            Section::None => return Err(syntax("content before the first section".into())),
            Section::Meta => {
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| syntax("expected `key = value`".into()))?;
                let k = k.trim().to_string();
                if !matches!(k.as_str(), "dimension" | "order" | "mode" | "seed" | "label") {
                    return Err(syntax(format!("unknown meta key `{k}`")));
                }
                if meta.insert(k.clone(), (line_no, v.trim().to_string())).is_some() {
                    return Err(syntax(format!("meta key `{k}` given twice")));
                }
            }
            Section::Metric => metric_rows.push((line_no, tokens())),
            Section::Defining => s_rows.push((line_no, tokens())),
            Section::Conformal => omega_rows.as_mut().expect("opened").push((line_no, tokens())),
        }
    }

    let get_usize = |key: &str| -> Result<usize> {
        let (line, v) = meta.get(key).ok_or_else(|| field(key, "missing"))?;
        v.parse().map_err(|_| Error::Syntax {
            line: *line,
            message: format!("`{key}` must be a non-negative integer"),
        })
    };
    let dimension = get_usize("dimension")?;
    let order = get_usize("order")?;
    if dimension == 0 || dimension > 12 {
        return Err(field("dimension", format!("must be between 4 and 12, got {dimension}")));
    }
    let mode = match meta.get("mode") {
        Some((line, v)) => v.parse().map_err(|e: String| Error::Syntax {
            line: *line,
            message: e,
        })?,
        None => CoefficientMode::Float,
    };
    let seed = match meta.get("seed") {
        Some((line, v)) => v.parse().map_err(|_| Error::Syntax {
            line: *line,
            message: "`seed` must be an unsigned 64-bit integer".into(),
        })?,
        None => 0,
    };
    let label = meta.get("label").map(|(_, v)| v.clone()).unwrap_or_default();

    let parse_exps = |line: usize, toks: &[String]| -> Result<Vec<u8>> {
        toks.iter()
            .map(|t| {
                t.parse::<u8>().map_err(|_| Error::Syntax {
                    line,
                    message: format!("bad exponent `{t}`"),
                })
            })
            .collect()
    };
    let parse_coeff = |line: usize, t: &str| {
        parse_rational(t).ok_or_else(|| Error::Syntax {
            line,
            message: format!("bad coefficient `{t}`"),
        })
    };

    let mut metric = BTreeMap::new();
    for (line, toks) in &metric_rows {
        if toks.len() != dimension + 3 {
            return Err(Error::Syntax {
                line: *line,
                message: format!("metric rows need {} fields, got {}", dimension + 3, toks.len()),
            });
        }
        let idx = |t: &str| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(v) if (1..=dimension).contains(&v) => Ok(v - 1),
                _ => Err(Error::Syntax {
                    line: *line,
                    message: format!("index `{t}` out of range 1..={dimension}"),
                }),
            }
        };
        let (i, j) = (idx(&toks[0])?, idx(&toks[1])?);
        let e = parse_exps(*line, &toks[2..2 + dimension])?;
        let c = parse_coeff(*line, &toks[2 + dimension])?;
        let key = (i.min(j), i.max(j), e);
        if let Some(prev) = metric.get(&key) {
            if *prev != c {
                return Err(Error::Syntax {
                    line: *line,
                    message: "conflicting duplicate metric entry".into(),
                });
            }
        }
        metric.insert(key, c);
    }
    metric.retain(|_, c: &mut Rational| !Zero::is_zero(c));

    let parse_poly = |rows: &[(usize, Vec<String>)], name: &str| -> Result<Polynomial> {
        let mut p = Polynomial::new();
        for (line, toks) in rows {
            if toks.len() != dimension + 1 {
                return Err(Error::Syntax {
                    line: *line,
                    message: format!("{name} rows need {} fields, got {}", dimension + 1, toks.len()),
                });
            }
            let e = parse_exps(*line, &toks[..dimension])?;
            let c = parse_coeff(*line, &toks[dimension])?;
            if let Some(prev) = p.get(&e) {
                if *prev != c {
                    return Err(Error::Syntax {
                        line: *line,
                        message: format!("conflicting duplicate {name} entry"),
                    });
                }
            }
            p.insert(e, c);
        }
        p.retain(|_, c| !Zero::is_zero(c));
        Ok(p)
    };
    let defining_function = parse_poly(&s_rows, "defining_function")?;
    let conformal_factor = omega_rows
        .as_deref()
        .map(|rows| parse_poly(rows, "conformal_factor"))
        .transpose()?;

    let spec = ScenarioSpec {
        dimension,
        order,
        mode,
        seed,
        label,
        metric,
        defining_function,
        conformal_factor,
    };
    spec.validate()?;
    Ok(spec)
}

/// Options for [`generate_random`].
#[derive(Debug, Clone)]
pub struct GenerateOptions {
    /// Scales every random perturbation; `0` produces the flat scenario with
    /// `s = x_d` and `Ω = 1`.
    pub amplitude: Rational,
    /// Probability that a given monomial receives a nonzero coefficient.
    pub density: f64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            amplitude: <Rational as One>::one(),
            density: 0.5,
        }
    }
}

/// Seeded random scenario; see [`generate_random_with`].
pub fn generate_random(d: usize, order: usize, seed: u64, mode: CoefficientMode) -> Result<ScenarioSpec> {
    generate_random_with(d, order, seed, mode, &GenerateOptions::default())
}

/// Seeded random scenario.
///
/// The metric is the identity plus a random symmetric perturbation whose
/// coefficients, in degrees 1 through K, are multiples of 1/16 in
/// `[−1/4, 1/4]`. The defining function is `x_d` plus random terms of degree
/// at least 2, and the conformal factor is a positive constant from
/// `{1/2, 2/3, 1, 3/2, 2}` plus random terms, with every linear term nonzero.
/// Keeping the base point metric
/// at the identity makes `|ds|_g` rational there and keeps exact
/// coefficients dyadic through inversion and square roots.
pub fn generate_random_with(
    d: usize,
    order: usize,
    seed: u64,
    mode: CoefficientMode,
    options: &GenerateOptions,
) -> Result<ScenarioSpec> {
    if d < 4 {
        return Err(field("dimension", format!("must be at least 4, got {d}")));
    }
    if order < 2 {
        return Err(field("order", format!("must be at least 2, got {order}")));
    }
    let ctx = JetContext::new(d, order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = options.amplitude.clone();
    let flat = Zero::is_zero(&amp);
    // one draw per monomial keeps the stream aligned across amplitudes
    let draw = |rng: &mut ChaCha8Rng| -> Option<Rational> {
        let keep = rng.gen_bool(options.density);
        let c = q(rng.gen_range(-4..=4), 16) * amp.clone();
        (keep && !Zero::is_zero(&c)).then_some(c)
    };
    let zero = vec![0u8; d];

    let mut metric = BTreeMap::new();
    for i in 0..d {
        metric.insert((i, i, zero.clone()), <Rational as One>::one());
        for j in i..d {
            for e in ctx.exponents().skip(1) {
                if let Some(c) = draw(&mut rng) {
                    metric.insert((i, j, e.to_vec()), c);
                }
            }
        }
    }

    let mut s = Polynomial::new();
    let mut lin = zero.clone();
    lin[d - 1] = 1;
    s.insert(lin, <Rational as One>::one());
    for e in ctx.exponents().filter(|e| degree(e) >= 2) {
        if let Some(c) = draw(&mut rng) {
            s.insert(e.to_vec(), c);
        }
    }

    let omegas = [q(1, 2), q(2, 3), q(1, 1), q(3, 2), q(2, 1)];
    let pick = rng.gen_range(0..omegas.len());
    let w0 = if flat { <Rational as One>::one() } else { omegas[pick].clone() };
    let mut omega = Polynomial::new();
    omega.insert(zero.clone(), w0);
    for e in ctx.exponents().skip(1) {
        if degree(e) == 1 && !flat {
            // a nonzero gradient keeps Ω genuinely non-constant at the base point
            let k: i64 = rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 };
            omega.insert(e.to_vec(), q(k, 16) * amp.clone());
        } else if let Some(c) = draw(&mut rng) {
            omega.insert(e.to_vec(), c);
        }
    }

    let spec = ScenarioSpec {
        dimension: d,
        order,
        mode,
        seed,
        label: format!("random d={d} K={order} seed={seed}"),
        metric,
        defining_function: s,
        conformal_factor: Some(omega),
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = "\
# flat fixture
[meta]
dimension = 4
order = 4
mode = exact
seed = 3
label = flat fixture

[metric]
1 1 0 0 0 0 1
2 2 0 0 0 0 1
3 3 0 0 0 0 1
4 4 0 0 0 0 1

[defining_function]
0 0 0 1 1
";

    #[test]
    fn parses_flat_fixture() {
        let spec = parse_scenario(FLAT).unwrap();
        assert_eq!(spec.dimension, 4);
        assert_eq!(spec.order, 4);
        assert_eq!(spec.mode, CoefficientMode::Exact);
        assert_eq!(spec.label, "flat fixture");
        let inst = spec.instantiate::<Rational>().unwrap();
        let ctx = inst.metric.context().clone();
        assert_eq!(inst.metric, MetricJet::flat(&ctx));
    }

    #[test]
    fn rejects_degenerate_metric() {
        let text = FLAT.replace("1 1 0 0 0 0 1", "1 1 0 0 0 0 0");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("metric not positive definite"), "{err}");
        assert!(matches!(err, Error::InvalidField { ref field, .. } if field == "metric"));
    }

    #[test]
    fn reports_line_numbers() {
        let text = FLAT.replace("2 2 0 0 0 0 1", "2 2 0 0 0 x 1");
        match parse_scenario(&text) {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 11),
            other => panic!("unexpected {other:?}"),
        }
        let text = FLAT.replace("[metric]", "[metrik]");
        assert!(matches!(parse_scenario(&text), Err(Error::Syntax { line: 9, .. })));
        let text = FLAT.replace("0 0 0 1 1", "0 0 0 0 1\n0 0 0 1 1");
        assert!(matches!(parse_scenario(&text), Err(Error::InvalidField { .. })));
        let text = FLAT.replace("0 0 0 1 1", "0 0 1 1 1");
        assert!(parse_scenario(&text).unwrap_err().to_string().contains("ds vanishes"));
    }

    #[test]
    fn mirrored_entries_must_agree() {
        let ok = FLAT.replace("4 4 0 0 0 0 1", "4 4 0 0 0 0 1\n1 2 1 0 0 0 1/8\n2 1 1 0 0 0 0.125");
        assert!(parse_scenario(&ok).is_ok());
        let bad = FLAT.replace("4 4 0 0 0 0 1", "4 4 0 0 0 0 1\n1 2 1 0 0 0 1/8\n2 1 1 0 0 0 1/4");
        assert!(matches!(parse_scenario(&bad), Err(Error::Syntax { .. })));
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        for d in 4..=6 {
            let a = generate_random(d, 4, 1, CoefficientMode::Exact).unwrap();
            let b = generate_random(d, 4, 1, CoefficientMode::Exact).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, generate_random(d, 4, 2, CoefficientMode::Exact).unwrap());
            // g^{dd}(0) is a perfect square
            let inst = a.instantiate::<Rational>().unwrap();
            let gdd = inst.metric.g_inv(d - 1, d - 1).value().clone();
            assert!(Scalar::sqrt(&gdd).is_some());
        }
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let opts = GenerateOptions {
            amplitude: <Rational as Zero>::zero(),
            ..GenerateOptions::default()
        };
        let spec = generate_random_with(5, 3, 9, CoefficientMode::Exact, &opts).unwrap();
        let mut flat = ScenarioSpec::flat(5, 3);
        flat.seed = 9;
        flat.label = spec.label.clone();
        let mut one = Polynomial::new();
        one.insert(vec![0; 5], <Rational as One>::one());
        flat.conformal_factor = Some(one);
        assert_eq!(spec, flat);
    }

    #[test]
    fn text_roundtrip() {
        for seed in 0..5 {
            let spec = generate_random(4 + (seed as usize % 3), 3, seed, CoefficientMode::Float).unwrap();
            let text = spec.to_text();
            assert_eq!(parse_scenario(&text).unwrap(), spec);
        }
    }

    proptest::proptest! {
        #[test]
        fn parser_never_panics(s in "\\PC{0,200}") {
            let _ = parse_scenario(&s);
        }

        #[test]
        fn parser_survives_mangled_fixtures(cut in 0usize..200, junk in "[ 0-9/.\\[\\]=a-z\n-]{0,12}") {
            let mut text = FLAT.to_string();
            let at = cut.min(text.len());
            text.insert_str(at, &junk);
            let _ = parse_scenario(&text);
        }
    }
}
