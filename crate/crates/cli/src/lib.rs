//! Command dispatch and machine-readable reports for `algloc`.
//!
//! The binary is a thin wrapper: [`Cli`] is parsed with clap, [`execute`]
//! runs the command and returns the [`Report`] together with the exit code,
//! and `main` prints and optionally writes the report.

use std::collections::BTreeMap;
use std::time::Instant;

use algebroid_loc::checks::{self, SuiteConfig};
use algebroid_loc::localization::verify_localization;
use algebroid_loc::{
    bott, load_example, BottReport, Example, LocalizationReport, ResidualReport, Tolerance,
    WeightedPoly, BUILTINS, CONVENTIONS,
};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "algloc",
    version,
    about = "Numerical checks of localization formulas on Lie algebroids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Coefficients of the Lie algebra element, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Option<Vec<f64>>,
    /// Relative tolerance for both-sides comparisons.
    #[arg(long, global = true, default_value_t = 1e-5)]
    pub tol_rel: f64,
    /// Absolute tolerance for both-sides comparisons.
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tol_abs: f64,
    /// Gauss–Legendre nodes per axis; defaults to each chart's own order.
    #[arg(long, global = true)]
    pub quad_order: Option<usize>,
    /// Write the JSON report to this path.
    #[arg(long, global = true)]
    pub report: Option<std::path::PathBuf>,
    /// Seed for random test data.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Anchor, Jacobi and δ² residuals plus the action consistency checks.
    CheckAxioms { example: String },
    /// Chain map, Stokes, equivariant identity, connection and fixed-point
    /// residuals.
    ComplexChecks {
        example: String,
        /// Random cochains per degree.
        #[arg(long, default_value_t = 50)]
        cochains: usize,
    },
    /// Both sides of the localization formula for an equivariant cocycle.
    Localize {
        example: String,
        /// Name of the cocycle; defaults to the example's own choice.
        #[arg(long)]
        cocycle: Option<String>,
    },
    /// Both sides of the Bott-type formula for a polynomial in the even
    /// Chern–Weil classes.
    Bott {
        example: String,
        /// Polynomial in x1, x2, … where xi stands for the class of weight 4i.
        #[arg(long)]
        phi: Option<String>,
        /// Name of the cocycle Ξ^g; defaults to the example's own choice.
        #[arg(long)]
        cocycle: Option<String>,
    },
    /// Lists the built-in examples.
    ListExamples,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleInfo {
    pub name: String,
    pub summary: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub report: ResidualReport,
}

/// Everything a command produced. Apart from `timings_ms` the content is a
/// function of the inputs, so two identical invocations serialize to the
/// same bytes once timings are dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub example: Option<String>,
    pub inputs_digest: String,
    pub tool_version: String,
    pub conventions_hash: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<Section>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localization: Option<LocalizationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bott: Option<BottReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub examples: Vec<ExampleInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    /// The report with timings cleared, for comparisons across runs.
    pub fn without_timings(&self) -> Report {
        Report {
            timings_ms: BTreeMap::new(),
            ..self.clone()
        }
    }
}

pub fn conventions_hash() -> String {
    hex::encode(Sha256::digest(CONVENTIONS.as_bytes()))
}

/// Hash of everything that determines the numbers in a report.
fn inputs_digest(
    command: &str,
    source: Option<&str>,
    extra: &[(&str, String)],
    common: &CommonArgs,
) -> String {
    #[derive(Serialize)]
    struct Inputs<'a> {
        command: &'a str,
        source: Option<&'a str>,
        extra: &'a [(&'a str, String)],
        xi: &'a Option<Vec<f64>>,
        tol_rel: f64,
        tol_abs: f64,
        quad_order: Option<usize>,
        seed: u64,
    }
    let bytes = serde_json::to_vec(&Inputs {
        command,
        source,
        extra,
        xi: &common.xi,
        tol_rel: common.tol_rel,
        tol_abs: common.tol_abs,
        quad_order: common.quad_order,
        seed: common.seed,
    })
    .expect("inputs serialize");
    hex::encode(Sha256::digest(bytes))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::CheckAxioms { .. } => "check-axioms",
        Command::ComplexChecks { .. } => "complex-checks",
        Command::Localize { .. } => "localize",
        Command::Bott { .. } => "bott",
        Command::ListExamples => "list-examples",
    }
}

struct Run {
    report: Report,
    started: Instant,
}

impl Run {
    fn time(&mut self, label: &str, t: Instant) {
        self.report
            .timings_ms
            .insert(label.to_string(), t.elapsed().as_secs_f64() * 1e3);
    }

    fn section(&mut self, name: &str, report: ResidualReport) {
        self.report.residuals.push(Section {
            name: name.to_string(),
            report,
        });
    }
}

fn xi_for(ex: &Example, common: &CommonArgs) -> Result<Vec<f64>, String> {
    let xi = common.xi.clone().unwrap_or_else(|| ex.defaults.xi.clone());
    let dim = ex.action.as_ref().map_or(0, |a| a.dim);
    if xi.len() != dim {
        return Err(format!(
            "--xi needs {dim} values for `{}`, got {}",
            ex.name,
            xi.len()
        ));
    }
    Ok(xi)
}

/// Runs a parsed command line. Returns the report and the exit code:
/// 0 when every check passes, 1 when some check fails, 2 when the input
/// could not be used.
pub fn execute(cli: &Cli) -> (Report, i32) {
    let common = &cli.common;
    let name = command_name(&cli.command);
    let example_name = match &cli.command {
        Command::CheckAxioms { example }
        | Command::ComplexChecks { example, .. }
        | Command::Localize { example, .. }
        | Command::Bott { example, .. } => Some(example.clone()),
        Command::ListExamples => None,
    };
    let mut run = Run {
        report: Report {
            command: name.to_string(),
            example: example_name.clone(),
            inputs_digest: String::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            conventions_hash: conventions_hash(),
            pass: false,
            residuals: Vec::new(),
            localization: None,
            bott: None,
            examples: Vec::new(),
            error: None,
            timings_ms: BTreeMap::new(),
        },
        started: Instant::now(),
    };

    let ex = match &example_name {
        Some(n) => {
            let t = Instant::now();
            match load_example(n) {
                Ok(ex) => {
                    run.time("load", t);
                    Some(ex)
                }
                Err(e) => {
                    run.report.inputs_digest =
                        inputs_digest(name, None, &[("example", n.clone())], common);
                    return finish(run, Err(format!("cannot load `{n}`: {e}")), EXIT_USAGE);
                }
            }
        }
        None => None,
    };

    let outcome = match (&cli.command, ex) {
        (Command::ListExamples, _) => {
            run.report.inputs_digest = inputs_digest(name, None, &[], common);
            list_examples(&mut run)
        }
        (Command::CheckAxioms { .. }, Some(ex)) => {
            run.report.inputs_digest = inputs_digest(name, Some(&ex.source), &[], common);
            check_axioms(&mut run, &ex, common)
        }
        (Command::ComplexChecks { cochains, .. }, Some(ex)) => {
            let extra = [("cochains", cochains.to_string())];
            run.report.inputs_digest = inputs_digest(name, Some(&ex.source), &extra, common);
            complex_checks(&mut run, &ex, common, *cochains)
        }
        (Command::Localize { cocycle, .. }, Some(ex)) => {
            let extra = [("cocycle", cocycle.clone().unwrap_or_default())];
            run.report.inputs_digest = inputs_digest(name, Some(&ex.source), &extra, common);
            localize(&mut run, &ex, common, cocycle.as_deref())
        }
        (Command::Bott { phi, cocycle, .. }, Some(ex)) => {
            let extra = [
                ("phi", phi.clone().unwrap_or_default()),
                ("cocycle", cocycle.clone().unwrap_or_default()),
            ];
            run.report.inputs_digest = inputs_digest(name, Some(&ex.source), &extra, common);
            bott_cmd(&mut run, &ex, common, phi.as_deref(), cocycle.as_deref())
        }
        _ => unreachable!("every example command loads its example"),
    };
    match outcome {
        Ok(pass) => finish(run, Ok(()), if pass { EXIT_PASS } else { EXIT_FAIL }),
        Err(e) => finish(run, Err(e), EXIT_USAGE),
    }
}

fn finish(mut run: Run, outcome: Result<(), String>, code: i32) -> (Report, i32) {
    run.report.pass = code == EXIT_PASS;
    if let Err(e) = outcome {
        run.report.error = Some(e);
    }
    let started = run.started;
    run.time("total", started);
    (run.report, code)
}

fn list_examples(run: &mut Run) -> Result<bool, String> {
    for (name, _) in BUILTINS {
        let ex =
            load_example(name).map_err(|e| format!("built-in `{name}` failed to load: {e}"))?;
        run.report.examples.push(ExampleInfo {
            name: ex.name.clone(),
            summary: ex.summary.clone(),
        });
    }
    Ok(true)
}

fn rng(common: &CommonArgs) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(common.seed)
}

fn check_axioms(run: &mut Run, ex: &Example, common: &CommonArgs) -> Result<bool, String> {
    let cfg = SuiteConfig::default();
    let mut rng = rng(common);
    let t = Instant::now();
    let axioms = checks::axiom_suite(ex, &cfg, &mut rng).map_err(|e| e.to_string())?;
    run.time("axioms", t);
    let t = Instant::now();
    let action = checks::action_suite(ex, &cfg, &mut rng).map_err(|e| e.to_string())?;
    run.time("action", t);
    let pass = axioms.pass() && action.pass();
    run.section("axioms", axioms);
    if !action.entries.is_empty() {
        run.section("action", action);
    }
    Ok(pass)
}

fn complex_checks(
    run: &mut Run,
    ex: &Example,
    common: &CommonArgs,
    cochains: usize,
) -> Result<bool, String> {
    let cfg = SuiteConfig {
        cochains,
        stokes_order: common.quad_order,
        ..SuiteConfig::default()
    };
    let mut rng = rng(common);
    let mut pass = true;
    type Suite =
        fn(&Example, &SuiteConfig, &mut ChaCha8Rng) -> algebroid_loc::Result<ResidualReport>;
    let suites: [(&str, Suite); 4] = [
        ("chain_map", |e, c, r| checks::chain_map_suite(e, c, r)),
        ("stokes", |e, c, r| checks::stokes_suite(e, c, r)),
        ("equivariant", |e, c, r| checks::equivariant_suite(e, c, r)),
        ("connection", |e, c, r| checks::connection_suite(e, c, r)),
    ];
    for (label, suite) in suites {
        let t = Instant::now();
        let rep = suite(ex, &cfg, &mut rng).map_err(|e| format!("{label}: {e}"))?;
        run.time(label, t);
        pass &= rep.pass();
        if !rep.entries.is_empty() {
            run.section(label, rep);
        }
    }
    let t = Instant::now();
    let fixed = checks::fixed_point_suite(ex).map_err(|e| format!("fixed points: {e}"))?;
    run.time("fixed_points", t);
    pass &= fixed.pass();
    if !fixed.entries.is_empty() {
        run.section("fixed_points", fixed);
    }
    Ok(pass)
}

fn pick_cocycle<'a>(
    ex: &'a Example,
    named: Option<&str>,
    fallback: &Option<String>,
) -> Result<(&'a algebroid_loc::EquivTwistedCochain, String), String> {
    let name = named
        .map(str::to_string)
        .or_else(|| fallback.clone())
        .ok_or_else(|| format!("`{}` has no default cocycle; pass --cocycle", ex.name))?;
    let c = ex.cocycle(&name).ok_or_else(|| {
        let known: Vec<&str> = ex.cocycles.iter().map(|c| c.name.as_str()).collect();
        format!(
            "no cocycle `{name}` in `{}` (known: {})",
            ex.name,
            known.join(", ")
        )
    })?;
    Ok((c, name))
}

fn tolerance(common: &CommonArgs) -> Tolerance {
    Tolerance {
        rel: common.tol_rel,
        abs: common.tol_abs,
    }
}

fn localize(
    run: &mut Run,
    ex: &Example,
    common: &CommonArgs,
    cocycle: Option<&str>,
) -> Result<bool, String> {
    let action = ex.require_action().map_err(|e| e.to_string())?;
    let (gamma, _) = pick_cocycle(ex, cocycle, &ex.defaults.cocycle)?;
    let xi = xi_for(ex, common)?;
    let t = Instant::now();
    let rep = verify_localization(
        &ex.algebroid,
        action,
        gamma,
        &xi,
        &ex.fixed_points,
        common.quad_order,
        tolerance(common),
    )
    .map_err(|e| e.to_string())?;
    run.time("localize", t);
    let pass = rep.pass;
    run.report.localization = Some(rep);
    Ok(pass)
}

fn bott_cmd(
    run: &mut Run,
    ex: &Example,
    common: &CommonArgs,
    phi: Option<&str>,
    cocycle: Option<&str>,
) -> Result<bool, String> {
    let action = ex.require_action().map_err(|e| e.to_string())?;
    let conn = ex.require_connection().map_err(|e| e.to_string())?;
    let (xi_g, _) = pick_cocycle(ex, cocycle, &ex.defaults.bott_cocycle)?;
    let phi_src = phi
        .map(str::to_string)
        .or_else(|| ex.defaults.phi.clone())
        .unwrap_or_else(|| "1".to_string());
    let phi =
        WeightedPoly::parse(&phi_src, ex.algebroid.rank).map_err(|e| format!("--phi: {e}"))?;
    let xi = xi_for(ex, common)?;
    let t = Instant::now();
    let rep = bott::verify_bott(
        &ex.algebroid,
        conn,
        action,
        &phi,
        xi_g,
        &xi,
        &ex.fixed_points,
        common.quad_order,
        tolerance(common),
    )
    .map_err(|e| e.to_string())?;
    run.time("bott", t);
    let pass = rep.pass
        && rep
            .fixed_point_identity
            .map_or(true, |v| v <= checks::FIXED_POINT_TOL);
    run.report.bott = Some(rep);
    Ok(pass)
}

/// Plain-text rendering of a report for the terminal.
pub fn render(report: &Report) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let verdict = |p: bool| if p { "PASS" } else { "FAIL" };
    let _ = writeln!(
        s,
        "{}{}",
        report.command,
        report
            .example
            .as_ref()
            .map(|e| format!(" {e}"))
            .unwrap_or_default()
    );
    for ex in &report.examples {
        let _ = writeln!(s, "  {:<24} {}", ex.name, ex.summary);
    }
    for sec in &report.residuals {
        let _ = writeln!(s, "  [{}]", sec.name);
        for r in &sec.report.entries {
            let _ = writeln!(
                s,
                "    {:<34} {:>11.3e}  (tol {:.0e})  {}",
                r.name,
                r.max,
                r.tol,
                verdict(r.pass())
            );
        }
    }
    if let Some(l) = &report.localization {
        let _ = writeln!(s, "  lhs        {:.12}", l.lhs);
        let _ = writeln!(s, "  rhs        {:.12}", l.rhs);
        for (i, c) in l.contributions.iter().enumerate() {
            let _ = writeln!(s, "    point {i}: {c:.12}");
        }
        let _ = writeln!(s, "  abs diff   {:.3e}", l.abs_diff);
        let _ = writeln!(s, "  rel diff   {:.3e}", l.rel_diff);
        if let Some(r) = &l.reason {
            let _ = writeln!(s, "  note       {r}");
        }
    }
    if let Some(b) = &report.bott {
        let _ = writeln!(s, "  weight           {}", b.weight);
        let _ = writeln!(s, "  Phi number       {:.12}", b.phi_number);
        let _ = writeln!(s, "  Phi equivariant  {:.12}", b.phi_equivariant);
        let _ = writeln!(s, "  fixed-point sum  {:.12}", b.rhs);
        for c in &b.contributions {
            let _ = writeln!(
                s,
                "    {} {:?}: Phi = {:.6}, p0 = {:.6}, sqrt det = {:.6}, term = {:.12}",
                c.chart, c.coords, c.phi, c.p0, c.sqrt_det, c.value
            );
        }
        let _ = writeln!(s, "  abs diff   {:.3e}", b.abs_diff);
        let _ = writeln!(s, "  rel diff   {:.3e}", b.rel_diff);
        if let Some(f) = b.fixed_point_identity {
            let _ = writeln!(s, "  fixed-point curvature identity {f:.3e}");
        }
    }
    if let Some(e) = &report.error {
        let _ = writeln!(s, "  error: {e}");
    }
    let _ = writeln!(s, "result: {}", verdict(report.pass));
    s
}
