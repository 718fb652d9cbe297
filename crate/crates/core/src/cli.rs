//! `triplekit` command-line front end.

use std::ffi::OsString;
use std::io::{Read, Write};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::configurations::{
    quadrangle_combo, standard_quadrangle, standard_trangle, trangle_combo, validate_quadrangle, validate_trangle,
    Quadrangle, Trangle,
};
use crate::error::{Result, TripleError};
use crate::exactcheck::{
    certify_annihilator_asymmetry, certify_quadrangle_lemma, certify_trangle_lemma, default_quadrangle_points,
    default_trangle_points, exact_annihilates, exact_is_truncation, wild_additive_demo, ExactElement,
};
use crate::factors::{AtomicElement, Element, FactorDescriptor, TripleVector};
use crate::operators::RealLinearOperator;
use crate::peirce::{certify_tripotent, peirce_decompose};
use crate::preservers::{
    decompose, hilbert_case_classify, random_spec, synthesize, verify_preserves_truncations, PreserverSpec,
};
use crate::sampling::trial_rng;
use crate::spectral::{is_positive_multiple_of_minimal, range_tripotent, spectral_resolve};
use crate::suites::{run_suite, SuiteConfig, SuiteReport, SUITES};
use crate::truncation::{annihilator, is_max_annihilator, truncation_report, ttp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Float,
    Exact,
}

#[derive(Debug, Parser)]
#[command(name = "triplekit", version, about = "Finite-dimensional JB*-triples and truncation preservers")]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Backend::Float)]
    pub backend: Backend,
    /// Print reports as JSON instead of a text summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a verification suite, or `all`.
    Suite { name: String },
    /// Element queries; FILE holds an element or a direct-sum element, `-` reads stdin.
    Element {
        #[arg(value_enum)]
        action: ElementAction,
        file: String,
    },
    /// Peirce decomposition of a tripotent.
    Peirce { file: String },
    /// Tripotent certificate: cube residual, minimality, rank.
    Tripotent { file: String },
    /// Quadrangles and trangles.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
    /// Spectral resolution.
    Spectral { file: String },
    /// Range tripotent.
    Range { file: String },
    /// Truncation relations between two elements.
    Trunc {
        #[command(subcommand)]
        action: TruncAction,
    },
    /// Inner quadratic annihilator; `--max` runs the maximality test with `--trials` probes.
    Annih {
        file: String,
        #[arg(long)]
        max: bool,
    },
    /// Triple transition pseudo-probability of two minimal tripotents.
    Ttp { e: String, v: String },
    /// Truncation preservers.
    Preserver {
        #[command(subcommand)]
        action: PreserverAction,
    },
    /// Exact certificates.
    Certify {
        #[arg(value_enum)]
        which: Certify,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ElementAction {
    Inspect,
    Norm,
    Cube,
    Range,
    Spectral,
}

#[derive(Debug, Subcommand)]
pub enum ConfigAction {
    /// Check the defining relations of a configuration file.
    Validate { file: String },
    /// Combination tripotent; COEFFS is a JSON array of `[re, im]` pairs.
    Combo { file: String, coeffs: String },
    /// Print the standard configuration of a factor given as JSON.
    Standard {
        #[arg(value_enum)]
        shape: Shape,
        factor: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Shape {
    Quadrangle,
    Trangle,
}

#[derive(Debug, Subcommand)]
pub enum TruncAction {
    /// Truncation and annihilator membership in both directions.
    Check { a: String, b: String },
}

#[derive(Debug, Subcommand)]
pub enum PreserverAction {
    /// Operator of a preserver spec.
    Synth { file: String },
    /// Randomized truncation-preservation check of an operator.
    Verify { file: String },
    /// Canonical form of an operator.
    Decompose { file: String },
    /// Gamma and flag of a preserver on a rank-one factor.
    Classify { file: String },
    /// Random preserver spec from `--seed`.
    Random {
        #[arg(long, default_value_t = 3)]
        max_factors: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Certify {
    LemmaQuadrangle,
    LemmaTrangle,
    WildDemo,
    AnnihilatorExample,
}

/// What a command produced; `Report` carries a pass flag for the exit code.
enum Output {
    Data(Value),
    Report { value: Value, text: String, pass: bool },
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn read_text(path: &str) -> Result<String> {
    let mut s = String::new();
    if path == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| TripleError::Parse(format!("stdin: {e}")))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| TripleError::Parse(format!("{path}: {e}")))?;
    }
    Ok(s)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    let s = read_text(path)?;
    serde_json::from_str(&s).map_err(|e| TripleError::Parse(format!("{path}: {e}")))
}

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| TripleError::Parse(format!("{what}: {e}")))
}

/// Element file: a single-factor element or a direct-sum element.
pub fn read_element(path: &str) -> Result<AtomicElement> {
    let v: Value = read_json(path)?;
    if v.get("parts").is_some() {
        serde_json::from_value(v).map_err(|e| TripleError::Parse(format!("{path}: {e}")))
    } else {
        let x: Element = serde_json::from_value(v).map_err(|e| TripleError::Parse(format!("{path}: {e}")))?;
        x.factor.validate()?;
        Element::new(x.factor, x.coords).map(AtomicElement::from)
    }
}

fn element_value(x: &AtomicElement) -> Value {
    if x.triple.len() == 1 {
        to_value(&x.parts[0])
    } else {
        to_value(x)
    }
}

fn read_operator(path: &str) -> Result<RealLinearOperator> {
    read_json(path)
}

fn summary(report: &SuiteReport) -> String {
    let mut s = format!(
        "suite {} (seed {}, trials {}): {}\n",
        report.suite,
        report.seed,
        report.trials,
        if report.pass { "PASS" } else { "FAIL" }
    );
    for c in &report.checks {
        s += &format!(
            "  {}  {}: {:.3e} {} {:.3e} over {}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.relation,
            c.threshold,
            c.count
        );
        if let Some(n) = &c.note {
            s += &format!(" ({n})");
        }
        s += "\n";
    }
    s
}

fn suite(cli: &Cli, name: &str) -> Result<Output> {
    if cli.trials == Some(0) {
        return Err(TripleError::Precondition("--trials must be at least 1".into()));
    }
    let cfg = SuiteConfig { seed: cli.seed, tol: cli.tol, trials: cli.trials };
    let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![name] };
    let reports: Vec<SuiteReport> = names.iter().map(|n| run_suite(n, &cfg)).collect::<Result<_>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let text = reports.iter().map(summary).collect::<String>();
    let value = if reports.len() == 1 { to_value(&reports[0]) } else { json!({ "suites": reports, "pass": pass }) };
    Ok(Output::Report { value, text, pass })
}

fn element(cli: &Cli, action: ElementAction, path: &str) -> Result<Output> {
    if cli.backend == Backend::Exact {
        let x: ExactElement = read_json(path)?;
        return match action {
            ElementAction::Cube => Ok(Output::Data(to_value(&crate::exactcheck::exact_triple_product(&x, &x, &x)?))),
            _ => Err(TripleError::Precondition("the exact backend supports `element cube` only".into())),
        };
    }
    let x = read_element(path)?;
    Ok(Output::Data(match action {
        ElementAction::Norm => json!({ "norm": x.norm() }),
        ElementAction::Cube => element_value(&x.cube()),
        ElementAction::Range => element_value(&range_tripotent(&x, cli.tol)?),
        ElementAction::Spectral => spectral_value(&x, cli.tol)?,
        ElementAction::Inspect => {
            let spec = spectral_resolve(&x, cli.tol)?;
            let mm = is_positive_multiple_of_minimal(&x, cli.tol)?;
            json!({
                "space": x.triple.to_string(),
                "complex_dim": x.triple.complex_dim(),
                "norm": x.norm(),
                "singular_values": spec.pairs.iter().map(|(l, _)| *l).collect::<Vec<_>>(),
                "tripotent": crate::peirce::is_tripotent(&x, cli.tol.max(1e-9)),
                "positive_multiple_of_minimal": mm.is_multiple,
            })
        }
    }))
}

fn spectral_value(x: &AtomicElement, tol: f64) -> Result<Value> {
    let s = spectral_resolve(x, tol)?;
    Ok(json!({
        "pairs": s.pairs.iter().map(|(l, e)| json!({ "lambda": l, "tripotent": element_value(e) })).collect::<Vec<_>>(),
        "residual": s.residual,
    }))
}

fn peirce(path: &str) -> Result<Output> {
    let e = read_element(path)?;
    let d = peirce_decompose(&e)?;
    let (d0, d1, d2) = d.dims();
    Ok(Output::Data(json!({
        "dims": [d0, d1, d2],
        "eigenvalues": d.eigenvalues,
        "grid_deviation": d.grid_deviation,
    })))
}

fn tripotent(cli: &Cli, path: &str) -> Result<Output> {
    let e = read_element(path)?;
    let value = match certify_tripotent(&e, cli.tol.max(1e-9)) {
        Ok(c) => json!({
            "cube_residual": c.cube_residual,
            "tripotent": true,
            "minimal": c.minimal,
            "rank": c.rank,
            "peirce_dims": [c.peirce_dims.0, c.peirce_dims.1, c.peirce_dims.2],
        }),
        Err(TripleError::NotTripotent(_)) => json!({
            "cube_residual": crate::peirce::cube_residual(&e),
            "tripotent": false,
        }),
        Err(err) => return Err(err),
    };
    Ok(Output::Data(value))
}

#[derive(serde::Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
enum ConfigFile {
    Quadrangle(Quadrangle<Element>),
    Trangle(Trangle<Element>),
}

fn config(cli: &Cli, action: &ConfigAction) -> Result<Output> {
    match action {
        ConfigAction::Validate { file } => {
            let report = match read_json::<ConfigFile>(file)? {
                ConfigFile::Quadrangle(q) => validate_quadrangle(&q, cli.tol.max(1e-9))?,
                ConfigFile::Trangle(t) => validate_trangle(&t, cli.tol.max(1e-9))?,
            };
            let text = report
                .checks
                .iter()
                .map(|c| format!("{}  {}: {:.3e}\n", if c.pass { "pass" } else { "FAIL" }, c.relation, c.residual))
                .collect();
            Ok(Output::Report { value: to_value(&report), text, pass: report.pass })
        }
        ConfigAction::Combo { file, coeffs } => {
            let c: Vec<[f64; 2]> = parse_json("coefficients", coeffs)?;
            let c: Vec<Complex64> = c.iter().map(|z| Complex64::new(z[0], z[1])).collect();
            let v = match (read_json::<ConfigFile>(file)?, c.as_slice()) {
                (ConfigFile::Quadrangle(q), &[a, b, g, d]) => quadrangle_combo(&q, a, b, g, d)?,
                (ConfigFile::Trangle(t), &[a, b, d]) => trangle_combo(&t, a, b, d)?,
                _ => return Err(TripleError::Parse("quadrangles take 4 coefficients, trangles 3".into())),
            };
            Ok(Output::Data(to_value(&v)))
        }
        ConfigAction::Standard { shape, factor } => {
            let f: FactorDescriptor = parse_json("factor", factor)?;
            f.validate()?;
            Ok(Output::Data(match shape {
                Shape::Quadrangle => {
                    let mut v = to_value(&standard_quadrangle(f)?);
                    v["shape"] = json!("quadrangle");
                    v
                }
                Shape::Trangle => {
                    let mut v = to_value(&standard_trangle(f)?);
                    v["shape"] = json!("trangle");
                    v
                }
            }))
        }
    }
}

fn trunc(cli: &Cli, a: &str, b: &str) -> Result<Output> {
    if cli.backend == Backend::Exact {
        let x: ExactElement = read_json(a)?;
        let y: ExactElement = read_json(b)?;
        return Ok(Output::Data(json!({
            "a_truncation_of_b": exact_is_truncation(&x, &y)?,
            "b_truncation_of_a": exact_is_truncation(&y, &x)?,
            "b_in_annihilator_of_a": exact_annihilates(&x, &y)?,
            "a_in_annihilator_of_b": exact_annihilates(&y, &x)?,
        })));
    }
    let x = read_element(a)?;
    let y = read_element(b)?;
    let tol = cli.tol.max(1e-12);
    let ab = truncation_report(&x, &y, tol)?;
    let ba = truncation_report(&y, &x, tol)?;
    let qx = crate::truncation::annihilator_subspace(&x);
    let qy = crate::truncation::annihilator_subspace(&y);
    Ok(Output::Data(json!({
        "a_truncation_of_b": ab.is_truncation,
        "b_truncation_of_a": ba.is_truncation,
        "b_in_annihilator_of_a": qx.contains(&y, tol),
        "a_in_annihilator_of_b": qy.contains(&x, tol),
        "residuals": [ab.product_residual, ba.product_residual],
    })))
}

fn annih(cli: &Cli, path: &str, max: bool) -> Result<Output> {
    let a = read_element(path)?;
    let ann = annihilator(&a)?;
    let mut v = json!({ "complex_dim": ann.complex_dim, "complex_codim": ann.complex_codim });
    if max {
        let r = is_max_annihilator(&a, cli.trials.unwrap_or(200), cli.seed)?;
        v["is_max"] = json!(r.is_max);
        v["witness"] = r.witness.as_ref().map(element_value).unwrap_or(Value::Null);
        v["witness_complex_dim"] = json!(r.witness_annihilator_dim);
        v["inclusion_sine"] = json!(r.inclusion_sine);
        v["probes"] = json!(r.probes);
    }
    Ok(Output::Data(v))
}

fn preserver(cli: &Cli, action: &PreserverAction) -> Result<Output> {
    let trials = cli.trials.unwrap_or(500);
    match action {
        PreserverAction::Synth { file } => {
            let spec: PreserverSpec = read_json(file)?;
            Ok(Output::Data(to_value(&synthesize(&spec)?)))
        }
        PreserverAction::Verify { file } => {
            let r = verify_preserves_truncations(&read_operator(file)?, trials, cli.seed)?;
            let text = format!(
                "bijective: {}\nforward:  {} positive, {} negative passed; {} failed\nbackward: {} positive, {} negative passed; {} failed\n{}\n",
                r.bijective,
                r.forward.positive_pass,
                r.forward.negative_pass,
                r.forward.positive_fail + r.forward.negative_fail,
                r.backward.positive_pass,
                r.backward.negative_pass,
                r.backward.positive_fail + r.backward.negative_fail,
                if r.pass { "PASS" } else if r.one_direction_only { "FAIL (one direction only)" } else { "FAIL" }
            );
            Ok(Output::Report { value: to_value(&r), text, pass: r.pass })
        }
        PreserverAction::Decompose { file } => Ok(Output::Data(to_value(&decompose(&read_operator(file)?, cli.tol.max(1e-8), cli.seed)?))),
        PreserverAction::Classify { file } => {
            let c = hilbert_case_classify(&read_operator(file)?, cli.seed)?;
            Ok(Output::Data(json!({ "gamma": c.gamma, "flag": c.flag, "isometry": c.isometry })))
        }
        PreserverAction::Random { max_factors } => {
            let mut rng = trial_rng(cli.seed, 0);
            Ok(Output::Data(to_value(&random_spec((*max_factors).max(1), &mut rng))))
        }
    }
}

fn certify(which: Certify) -> Result<Output> {
    let (value, pass, text) = match which {
        Certify::LemmaQuadrangle => {
            let c = certify_quadrangle_lemma(&default_quadrangle_points())?;
            (to_value(&c), c.certified, format!("{} points, certified: {}\n", c.points.len(), c.certified))
        }
        Certify::LemmaTrangle => {
            let c = certify_trangle_lemma(&default_trangle_points())?;
            (to_value(&c), c.certified, format!("{} points, certified: {}\n", c.points.len(), c.certified))
        }
        Certify::AnnihilatorExample => {
            let c = certify_annihilator_asymmetry()?;
            (to_value(&c), c.certified, format!("{} points, certified: {}\n", c.points.len(), c.certified))
        }
        Certify::WildDemo => {
            let r = wild_additive_demo();
            let text = format!(
                "{} exact pairs, {} truncation pairs, forward failures {}, backward failures {}, linearity violated: {}\n",
                r.pairs,
                r.truncation_pairs,
                r.forward_failures,
                r.backward_failures,
                r.linearity_violation.f_of_scaled != r.linearity_violation.scaled_f
            );
            (to_value(&r), r.pass, text)
        }
    };
    Ok(Output::Report { value, text, pass })
}

fn dispatch(cli: &Cli) -> Result<Output> {
    if !(cli.tol > 0.0) {
        return Err(TripleError::Precondition("--tol must be positive".into()));
    }
    match &cli.command {
        Command::Suite { name } => suite(cli, name),
        Command::Element { action, file } => element(cli, *action, file),
        Command::Peirce { file } => peirce(file),
        Command::Tripotent { file } => tripotent(cli, file),
        Command::Config { action } => config(cli, action),
        Command::Spectral { file } => Ok(Output::Data(spectral_value(&read_element(file)?, cli.tol)?)),
        Command::Range { file } => Ok(Output::Data(element_value(&range_tripotent(&read_element(file)?, cli.tol)?))),
        Command::Trunc { action: TruncAction::Check { a, b } } => trunc(cli, a, b),
        Command::Annih { file, max } => annih(cli, file, *max),
        Command::Ttp { e, v } => {
            let z = ttp(&read_element(e)?, &read_element(v)?)?;
            Ok(Output::Data(json!({ "ttp": [z.re, z.im] })))
        }
        Command::Preserver { action } => preserver(cli, action),
        Command::Certify { which } => certify(*which),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Suite { .. } => "suite",
        Command::Element { .. } => "element",
        Command::Peirce { .. } => "peirce",
        Command::Tripotent { .. } => "tripotent",
        Command::Config { .. } => "config",
        Command::Spectral { .. } => "spectral",
        Command::Range { .. } => "range",
        Command::Trunc { .. } => "trunc",
        Command::Annih { .. } => "annih",
        Command::Ttp { .. } => "ttp",
        Command::Preserver { .. } => "preserver",
        Command::Certify { .. } => "certify",
    }
}

/// Runs the CLI; returns the process exit code (0 pass, 1 check failure,
/// 2 usage or input error).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(Output::Data(v)) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"));
            0
        }
        Ok(Output::Report { value, text, pass }) => {
            if cli.json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"));
            } else {
                let _ = write!(out, "{text}");
            }
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "triplekit {}: {e}", command_name(&cli.command));
            2
        }
    }
}
