//! The `softgf` command-line front end.
//!
//! Exit codes: 0 success, 1 mathematical or property failure, 2 input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::compose::{compose_frame, composition_sandwich_violation, tight_local_canonical_dual, LocalFrameFamily};
use crate::dual::{canonical_dual_with_tol, dual_pair_defect, ReconstructionOrder};
use crate::error::SoftError;
use crate::gframe::{FrameBoundsCertificate, SoftGFrame};
use crate::io::{
    certificate_doc, fmt_sig6, soft_real_doc, to_json_string, write_output, CertificateDoc, FrameSpec, InputError,
    LabelMap, LocalFramesSpec,
};
use crate::soft_core::{SoftReal, SoftVector};
use crate::verify::random::RandomModel;
use crate::verify::{all_passed, check_frame, run_suite, PropertyReport};

/// Reconstruction errors are accepted up to this multiple of `cond(S(λ))`.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
const SANDWICH_TOL: f64 = 1e-9;
const TIGHT_OPERATOR_TOL: f64 = 1e-10;
const TIGHT_DUAL_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "softgf", version, about = "Soft g-frames over finite parameter sets")]
pub struct Cli {
    /// Relative threshold for the frame and tightness predicates.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Random trials for property checks.
    #[arg(long, global = true, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the output document (or the report) here instead of stdout.
    #[arg(short = 'o', long = "out", global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds, tightness, exactness and every property check on one frame.
    Check { spec: PathBuf },
    /// Optimal bounds per parameter.
    Bounds { spec: PathBuf },
    /// Canonical dual, written as a frame spec with its certificate.
    Dual { spec: PathBuf },
    /// Reconstruct a vector in both orders and report the errors.
    Reconstruct { spec: PathBuf, vector: PathBuf },
    /// Compose with local frames into an ordinary soft frame.
    Compose { spec: PathBuf, locals: PathBuf },
    /// Property suite on random frames shaped like the given one.
    Report { spec: PathBuf },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{0}")]
    Math(SoftError),
    #[error("{0}")]
    Output(#[from] std::io::Error),
}

impl From<SoftError> for CliError {
    fn from(e: SoftError) -> Self {
        match e {
            SoftError::NotAFrame { .. } | SoftError::NotPositiveDefinite { .. } | SoftError::Precondition(_) => {
                CliError::Math(e)
            }
            other => CliError::Input(other.into()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Math(_) => 1,
            CliError::Input(_) | CliError::Output(_) => 2,
        }
    }
}

/// What a command produced: an optional JSON document (dual, compose), a
/// report in the requested format, and whether everything checked out.
pub struct Outcome {
    pub document: Option<String>,
    pub report: String,
    pub ok: bool,
}

pub fn main_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    ExitCode::from(run(&cli))
}

/// Runs a parsed command, writes its output and returns the exit code.
pub fn run(cli: &Cli) -> u8 {
    let result = execute(cli).and_then(|out| {
        match (&cli.out, &out.document) {
            (Some(path), Some(doc)) => {
                write_output(Some(path), doc)?;
                write_output(None, &out.report)?;
            }
            (Some(path), None) => write_output(Some(path), &out.report)?,
            (None, Some(doc)) => write_output(None, doc)?,
            (None, None) => write_output(None, &out.report)?,
        }
        Ok(out.ok)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("softgf: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Check { spec } => cmd_check(spec, cli),
        Command::Bounds { spec } => cmd_bounds(spec, cli),
        Command::Dual { spec } => cmd_dual(spec, cli),
        Command::Reconstruct { spec, vector } => cmd_reconstruct(spec, vector, cli),
        Command::Compose { spec, locals } => cmd_compose(spec, locals, cli),
        Command::Report { spec } => cmd_report(spec, cli),
    }
}

fn render<T: Serialize>(cli: &Cli, value: &T, text: impl FnOnce() -> String) -> String {
    match cli.format {
        Format::Json => to_json_string(value),
        Format::Text => text(),
    }
}

// ------------------------------------------------------------- shared pieces

#[derive(Serialize)]
struct BoundsSection {
    certificate: CertificateDoc,
    condition: LabelMap<f64>,
    failing_parameters: Vec<String>,
    /// Per block, `None` when the family is not a frame.
    exact: Option<Vec<bool>>,
}

fn bounds_section(frame: &SoftGFrame, tol: f64) -> Result<(BoundsSection, FrameBoundsCertificate), CliError> {
    let cert = frame.frame_bounds(tol);
    let exact = if cert.is_frame {
        Some(frame.is_exact(tol)?)
    } else {
        None
    };
    Ok((
        BoundsSection {
            certificate: certificate_doc(&cert),
            condition: soft_real_doc(&cert.condition()),
            failing_parameters: cert.failing_labels(tol),
            exact,
        },
        cert,
    ))
}

fn bounds_text(out: &mut String, cert: &FrameBoundsCertificate, exact: Option<&[bool]>, tol: f64) {
    let cond = cert.condition();
    let _ = writeln!(
        out,
        "{:<12} {:>12} {:>12} {:>12}",
        "parameter", "lower", "upper", "condition"
    );
    for (l, (label, lo)) in cert.lower.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:<12} {:>12} {:>12} {:>12}",
            label,
            fmt_sig6(lo),
            fmt_sig6(cert.upper.get(l)),
            fmt_sig6(cond.get(l))
        );
    }
    let _ = writeln!(out, "frame: {}  tight: {}", cert.is_frame, cert.is_tight);
    let failing = cert.failing_labels(tol);
    if !failing.is_empty() {
        let _ = writeln!(out, "not a frame at: {}", failing.join(", "));
    }
    if let Some(ex) = exact {
        let flags: Vec<String> = ex.iter().map(bool::to_string).collect();
        let _ = writeln!(out, "exact: [{}]", flags.join(", "));
    }
}

fn properties_text(out: &mut String, reports: &[PropertyReport]) {
    let _ = writeln!(
        out,
        "{:<26} {:>6} {:>12} {:>12}  witness",
        "property", "status", "worst", "tolerance"
    );
    for r in reports {
        let status = match (&r.skipped, r.passed) {
            (Some(_), _) => "skip",
            (None, true) => "pass",
            (None, false) => "FAIL",
        };
        let witness = r
            .witness
            .as_ref()
            .map(|w| format!("{} (trial {})", w.parameter, w.trial))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{:<26} {:>6} {:>12} {:>12}  {}",
            r.property_id,
            status,
            fmt_sig6(r.worst_violation),
            fmt_sig6(r.tolerance),
            witness
        );
    }
}

fn header(out: &mut String, title: &str, spec: &FrameSpec) {
    let fr = &spec.frame;
    let _ = writeln!(
        out,
        "{title}{}",
        spec.name.as_deref().map(|n| format!(": {n}")).unwrap_or_default()
    );
    let _ = writeln!(
        out,
        "parameters: {}  ambient dimension: {}  blocks: {:?}",
        fr.params().labels().join(", "),
        fr.ambient_dim(),
        fr.block_dims()
    );
}

// ------------------------------------------------------------- commands

#[derive(Serialize)]
struct CheckReport<'a> {
    command: &'static str,
    name: Option<&'a str>,
    parameters: &'a [String],
    ambient_dim: usize,
    block_dims: Vec<usize>,
    tol: f64,
    trials: usize,
    seed: u64,
    #[serde(flatten)]
    bounds: BoundsSection,
    properties: Vec<PropertyReport>,
    passed: bool,
}

pub fn cmd_check(spec_path: &Path, cli: &Cli) -> Result<Outcome, CliError> {
    let spec = FrameSpec::read(spec_path)?;
    let fr = &spec.frame;
    let (bounds, cert) = bounds_section(fr, cli.tol)?;
    let properties = check_frame(fr, cli.trials.max(1), cli.seed, cli.tol);
    let passed = cert.is_frame && all_passed(&properties);
    let report = CheckReport {
        command: "check",
        name: spec.name.as_deref(),
        parameters: fr.params().labels(),
        ambient_dim: fr.ambient_dim(),
        block_dims: fr.block_dims(),
        tol: cli.tol,
        trials: cli.trials,
        seed: cli.seed,
        bounds,
        properties,
        passed,
    };
    let text = render(cli, &report, || {
        let mut out = String::new();
        header(&mut out, "check", &spec);
        bounds_text(&mut out, &cert, report.bounds.exact.as_deref(), cli.tol);
        let _ = writeln!(out);
        properties_text(&mut out, &report.properties);
        let _ = writeln!(out, "{}", if passed { "PASS" } else { "FAIL" });
        out
    });
    Ok(Outcome {
        document: None,
        report: text,
        ok: passed,
    })
}

#[derive(Serialize)]
struct BoundsReport<'a> {
    command: &'static str,
    name: Option<&'a str>,
    tol: f64,
    #[serde(flatten)]
    bounds: BoundsSection,
}

pub fn cmd_bounds(spec_path: &Path, cli: &Cli) -> Result<Outcome, CliError> {
    let spec = FrameSpec::read(spec_path)?;
    let (bounds, cert) = bounds_section(&spec.frame, cli.tol)?;
    let report = BoundsReport {
        command: "bounds",
        name: spec.name.as_deref(),
        tol: cli.tol,
        bounds,
    };
    let text = render(cli, &report, || {
        let mut out = String::new();
        header(&mut out, "bounds", &spec);
        bounds_text(&mut out, &cert, report.bounds.exact.as_deref(), cli.tol);
        out
    });
    Ok(Outcome {
        document: None,
        report: text,
        ok: cert.is_frame,
    })
}

#[derive(Serialize)]
struct DualReport {
    command: &'static str,
    certificate: CertificateDoc,
    /// Worst relative resynthesis error of the pair over random probes.
    pair_defect: f64,
    tolerance: f64,
    passed: bool,
}

pub fn cmd_dual(spec_path: &Path, cli: &Cli) -> Result<Outcome, CliError> {
    let spec = FrameSpec::read(spec_path)?;
    let pair = canonical_dual_with_tol(&spec.frame, cli.tol)?;
    let cert = pair.dual.frame_bounds(cli.tol);
    let pair_defect = dual_pair_defect(&pair.frame, &pair.dual, cli.trials.max(1), cli.seed)?;
    let max_cond = cert.condition().values().iter().copied().fold(1.0, f64::max);
    let tolerance = RECONSTRUCTION_TOL * max_cond;
    let passed = pair_defect <= tolerance;

    let mut doc = FrameSpec::new(pair.dual).with_certificate(cert.clone());
    doc.name = Some(match &spec.name {
        Some(n) => format!("canonical dual of {n}"),
        None => "canonical dual".into(),
    });
    let report = DualReport {
        command: "dual",
        certificate: certificate_doc(&cert),
        pair_defect,
        tolerance,
        passed,
    };
    let text = render(cli, &report, || {
        let mut out = String::new();
        header(&mut out, "dual", &spec);
        bounds_text(&mut out, &cert, None, cli.tol);
        let _ = writeln!(
            out,
            "pair defect: {}  (tolerance {})",
            fmt_sig6(pair_defect),
            fmt_sig6(tolerance)
        );
        out
    });
    Ok(Outcome {
        document: Some(doc.to_json_string()),
        report: text,
        ok: passed,
    })
}

#[derive(Serialize)]
struct ReconstructReport {
    command: &'static str,
    /// `Σ_j Λ_j* Λ̃_j f`, max relative error per parameter.
    dual_inside: LabelMap<f64>,
    /// `Σ_j Λ̃_j* Λ_j f`.
    dual_outside: LabelMap<f64>,
    condition: LabelMap<f64>,
    tolerance: LabelMap<f64>,
    passed: bool,
}

fn errors_per_parameter(x: &SoftVector, f: &SoftVector) -> SoftReal {
    SoftReal::from_fn(f.params(), |l| {
        let scale = f.at(l).norm();
        let diff = (x.at(l) - f.at(l)).norm();
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    })
}

pub fn cmd_reconstruct(spec_path: &Path, vector_path: &Path, cli: &Cli) -> Result<Outcome, CliError> {
    let spec = FrameSpec::read(spec_path)?;
    let fr = &spec.frame;
    let f = crate::io::read_vector(vector_path, Some(fr.params()))?;
    if f.dim() != fr.ambient_dim() {
        return Err(InputError::Invalid {
            location: format!("{}: dim", vector_path.display()),
            message: format!("expected {}, found {}", fr.ambient_dim(), f.dim()),
        }
        .into());
    }
    let pair = canonical_dual_with_tol(fr, cli.tol)?;
    let inside = errors_per_parameter(&pair.reconstruct(&f, ReconstructionOrder::DualInside)?, &f);
    let outside = errors_per_parameter(&pair.reconstruct(&f, ReconstructionOrder::DualOutside)?, &f);
    let cond = fr.frame_bounds(cli.tol).condition();
    let tolerance = cond.map(|c| RECONSTRUCTION_TOL * c.max(1.0));
    let passed =
        (0..fr.params().len()).all(|l| inside.get(l) <= tolerance.get(l) && outside.get(l) <= tolerance.get(l));
    let report = ReconstructReport {
        command: "reconstruct",
        dual_inside: soft_real_doc(&inside),
        dual_outside: soft_real_doc(&outside),
        condition: soft_real_doc(&cond),
        tolerance: soft_real_doc(&tolerance),
        passed,
    };
    let text = render(cli, &report, || {
        let mut out = String::new();
        header(&mut out, "reconstruct", &spec);
        let _ = writeln!(
            out,
            "{:<12} {:>12} {:>12} {:>12}",
            "parameter", "dual inside", "dual outside", "tolerance"
        );
        for (l, label) in fr.params().labels().iter().enumerate() {
            let _ = writeln!(
                out,
                "{:<12} {:>12} {:>12} {:>12}",
                label,
                fmt_sig6(inside.get(l)),
                fmt_sig6(outside.get(l)),
                fmt_sig6(tolerance.get(l))
            );
        }
        let _ = writeln!(out, "{}", if passed { "PASS" } else { "FAIL" });
        out
    });
    Ok(Outcome {
        document: None,
        report: text,
        ok: passed,
    })
}

#[derive(Serialize)]
struct LocalBounds {
    lower: LabelMap<f64>,
    upper: LabelMap<f64>,
    tight: bool,
}

#[derive(Serialize)]
struct TightLocalSection {
    tight_bound: LabelMap<f64>,
    operator_defect: f64,
    dual_defect: f64,
    passed: bool,
}

#[derive(Serialize)]
struct ComposeReport {
    command: &'static str,
    locals: Vec<LocalBounds>,
    envelope_lower: LabelMap<f64>,
    envelope_upper: LabelMap<f64>,
    certificate: CertificateDoc,
    sandwich_violation: f64,
    /// Present when every local frame is tight with one common bound.
    tight_locals: Option<TightLocalSection>,
    passed: bool,
}

pub fn cmd_compose(spec_path: &Path, locals_path: &Path, cli: &Cli) -> Result<Outcome, CliError> {
    let spec = FrameSpec::read(spec_path)?;
    let fr = &spec.frame;
    let locals_spec = LocalFramesSpec::read(locals_path, fr.params())?;
    if locals_spec.families.len() != fr.len() {
        return Err(InputError::Invalid {
            location: format!("{}: families", locals_path.display()),
            message: format!(
                "expected {} families (one per block), found {}",
                fr.len(),
                locals_spec.families.len()
            ),
        }
        .into());
    }
    for (j, (fam, d)) in locals_spec.families.iter().zip(fr.block_dims()).enumerate() {
        if fam[0].dim() != d {
            return Err(InputError::Invalid {
                location: format!("{}: families[{j}]", locals_path.display()),
                message: format!("vectors must have dimension {d} to match block {j}"),
            }
            .into());
        }
    }
    let locals = LocalFrameFamily::with_tol(locals_spec.families.clone(), cli.tol)?;
    for (j, &declared) in locals_spec.declared_tight.iter().enumerate() {
        if declared && !locals.local_bounds(j).is_tight {
            return Err(InputError::Invalid {
                location: format!("{}: families[{j}].tight", locals_path.display()),
                message: "family is declared tight but its bounds differ".into(),
            }
            .into());
        }
    }

    let composed = compose_frame(fr, &locals)?;
    let composed_frame = composed.as_gframe()?;
    let cert = composed_frame.frame_bounds(cli.tol);
    let sandwich_violation = composition_sandwich_violation(fr, &locals, cli.trials.max(1), cli.seed)?;

    let tight_locals = match locals.common_tight_bound(cli.tol) {
        Some(_) if fr.frame_bounds(cli.tol).is_frame => {
            let res = tight_local_canonical_dual(fr, &locals)?;
            Some(TightLocalSection {
                tight_bound: soft_real_doc(&res.tight_bound),
                operator_defect: res.operator_defect,
                dual_defect: res.dual_defect,
                passed: res.holds(TIGHT_OPERATOR_TOL, TIGHT_DUAL_TOL),
            })
        }
        _ => None,
    };
    let passed = cert.is_frame && sandwich_violation <= SANDWICH_TOL && tight_locals.as_ref().is_none_or(|t| t.passed);

    let mut doc = FrameSpec::new(composed_frame).with_certificate(cert.clone());
    doc.name = Some(match &spec.name {
        Some(n) => format!("{n} composed with local frames"),
        None => "composed frame".into(),
    });
    doc.description = Some("vectors in (block, local index) lexicographic order; see index".into());
    doc.index = Some(composed.index.clone());

    let (env_lo, env_hi) = locals.envelope();
    let report = ComposeReport {
        command: "compose",
        locals: (0..locals.len())
            .map(|j| {
                let c = locals.local_bounds(j);
                LocalBounds {
                    lower: soft_real_doc(&c.lower),
                    upper: soft_real_doc(&c.upper),
                    tight: c.is_tight,
                }
            })
            .collect(),
        envelope_lower: soft_real_doc(env_lo),
        envelope_upper: soft_real_doc(env_hi),
        certificate: certificate_doc(&cert),
        sandwich_violation,
        tight_locals,
        passed,
    };
    let text = render(cli, &report, || {
        let mut out = String::new();
        header(&mut out, "compose", &spec);
        let _ = writeln!(out, "composed family: {} vectors", composed.vectors.len());
        bounds_text(&mut out, &cert, None, cli.tol);
        let _ = writeln!(out, "sandwich violation: {}", fmt_sig6(sandwich_violation));
        if let Some(t) = &report.tight_locals {
            let _ = writeln!(
                out,
                "tight locals: operator defect {}  dual defect {}  {}",
                fmt_sig6(t.operator_defect),
                fmt_sig6(t.dual_defect),
                if t.passed { "ok" } else { "FAIL" }
            );
        }
        let _ = writeln!(out, "{}", if passed { "PASS" } else { "FAIL" });
        out
    });
    Ok(Outcome {
        document: Some(doc.to_json_string()),
        report: text,
        ok: passed,
    })
}

#[derive(Serialize)]
struct SuiteReport<'a> {
    command: &'static str,
    ambient_dim: usize,
    block_dims: Vec<usize>,
    parameters: &'a [String],
    trials: usize,
    seed: u64,
    properties: Vec<PropertyReport>,
    passed: bool,
}

pub fn cmd_report(spec_path: &Path, cli: &Cli) -> Result<Outcome, CliError> {
    let spec = FrameSpec::read(spec_path)?;
    let fr = &spec.frame;
    let model = RandomModel::new(cli.seed, fr.ambient_dim(), fr.block_dims(), fr.params().clone())?;
    let properties = run_suite(&model, cli.trials.max(1));
    let passed = all_passed(&properties);
    let report = SuiteReport {
        command: "report",
        ambient_dim: fr.ambient_dim(),
        block_dims: fr.block_dims(),
        parameters: fr.params().labels(),
        trials: cli.trials,
        seed: cli.seed,
        properties,
        passed,
    };
    let text = render(cli, &report, || {
        let mut out = String::new();
        header(&mut out, "report on random frames shaped like", &spec);
        properties_text(&mut out, &report.properties);
        let _ = writeln!(out, "{}", if passed { "PASS" } else { "FAIL" });
        out
    });
    Ok(Outcome {
        document: None,
        report: text,
        ok: passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn defaults() {
        let cli = Cli::try_parse_from(["softgf", "check", "x.json"]).unwrap();
        assert_eq!(cli.tol, 1e-10);
        assert_eq!(cli.trials, 200);
        assert_eq!(cli.seed, 42);
        assert_eq!(cli.format, Format::Text);
        assert!(cli.out.is_none());
        let cli = Cli::try_parse_from(["softgf", "bounds", "x.json", "--format", "json", "-o", "y"]).unwrap();
        assert_eq!(cli.format, Format::Json);
        assert_eq!(cli.out.as_deref(), Some(Path::new("y")));
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(SoftError::NotAFrame { labels: vec![] }).exit_code(), 1);
        assert_eq!(
            CliError::from(SoftError::DimensionMismatch {
                what: "x",
                expected: 1,
                found: 2
            })
            .exit_code(),
            2
        );
    }
}
