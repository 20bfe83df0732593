//! Command-line front end. Exit codes: 0 on success or PASS, 2 on a FAIL
//! verdict, 1 on usage or input errors.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::constants::GrochenigConstants;
use crate::generators::{frame_operator_check, power_law_gram, translate_frame_gram, FrameSystem};
use crate::gram::{certified_min_a, diag_lower_bound, fit_envelope, GramSystem, LayoutKind, Scope};
use crate::oracle::{min_partition_with, OracleOptions, DEFAULT_EPSILON, DEFAULT_SIZE_CAP};
use crate::partition::{certify, choose_modulus, pave, ArsCertificate, Class, PaveOptions, Paving, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

/// Largest number of stored values `gen` will materialize.
const MAX_GENERATED_VALUES: usize = 1 << 28;

#[derive(Debug, Parser)]
#[command(name = "framepaver", version, about = "Certified residue-class pavings of localized cross-Gram systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enclosures of ζ(s), D_s and the separation constant C_s
    Constants {
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate test systems
    #[command(subcommand)]
    Gen(GenCommand),
    /// Fit a decay envelope on the truncation
    Fit {
        #[arg(long, default_value = "-")]
        input: String,
        /// Fixed exponent; otherwise scan s = 1.1, 1.2, …, 6.0
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose the modulus, pave by residues and certify
    Partition {
        #[arg(long, default_value = "-")]
        input: String,
        /// Margin threshold, default C/2
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        modulus: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify a given paving
    Certify {
        #[arg(long, default_value = "-")]
        input: String,
        /// Paving JSON (a certificate is accepted too)
        #[arg(long)]
        paving: String,
        /// Margin threshold, default C/2
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive minimum paving of a small truncation
    Oracle {
        #[arg(long, default_value = "-")]
        input: String,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
        cap: usize,
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plain-text summary of a certificate
    Report {
        #[arg(long, default_value = "-")]
        input: String,
        /// Oracle output to compare against
        #[arg(long)]
        oracle: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Exact power-law system A/(1+|n−m|)^s with diagonal C
    PowerLaw {
        #[arg(long = "A")]
        amplitude: f64,
        #[arg(long)]
        s: f64,
        #[arg(long = "C")]
        c: f64,
        #[arg(long)]
        size: usize,
        /// Seed of the recorded sign pattern
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = LayoutArg::Dense)]
        layout: LayoutArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gram of cyclic translates of a window
    Translates {
        #[arg(long, value_delimiter = ',', required = true)]
        window: Vec<f64>,
        #[arg(long)]
        period: usize,
        #[arg(long, value_enum, default_value_t = LayoutArg::Dense)]
        layout: LayoutArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectrum of the frame operator of a finite system
    FrameCheck {
        #[arg(long)]
        vectors: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LayoutArg {
    Dense,
    Banded,
    Toeplitz,
}

impl From<LayoutArg> for LayoutKind {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::Dense => LayoutKind::Dense,
            LayoutArg::Banded => LayoutKind::Banded,
            LayoutArg::Toeplitz => LayoutKind::Toeplitz,
        }
    }
}

/// A failure reported on stderr with exit code 1.
#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
}

impl Io<'_> {
    fn read_source(&mut self, source: &str) -> Result<String, Failure> {
        if source == "-" {
            let mut text = String::new();
            self.stdin
                .read_to_string(&mut text)
                .map_err(|e| Failure(format!("<stdin>: {e}")))?;
            Ok(text)
        } else {
            fs::read_to_string(source).map_err(|e| Failure(format!("{source}: {e}")))
        }
    }

    fn parse<T: DeserializeOwned>(&mut self, source: &str) -> Result<T, Failure> {
        let text = self.read_source(source)?;
        let label = if source == "-" { "<stdin>" } else { source };
        let mut de = serde_json::Deserializer::from_str(&text);
        let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            Failure(format!("{label}: at `{path}`: {}", e.into_inner()))
        })?;
        de.end().map_err(|e| Failure(format!("{label}: {e}")))?;
        Ok(value)
    }

    fn emit(&mut self, out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
        match out {
            Some(path) => {
                fs::write(path, format!("{text}\n")).map_err(|e| Failure(format!("{}: {e}", path.display())))
            }
            None => match writeln!(self.stdout, "{text}") {
                // a closed pipe (`| head`) is not an error of ours
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::from(e)),
                _ => Ok(()),
            },
        }
    }

    fn emit_json<T: Serialize>(&mut self, out: &Option<PathBuf>, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value)?;
        self.emit(out, &text)
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    let mut io = Io { stdin, stdout };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
    }
}

fn dispatch(command: Command, io: &mut Io<'_>) -> Result<i32, Failure> {
    match command {
        Command::Constants { s, tol, out } => {
            let k = GrochenigConstants::compute(s, tol)?;
            io.emit_json(&out, &json!({ "s": k.s, "zeta": k.zeta, "d_s": k.d_s, "c_s": k.c_s }))?;
            Ok(EXIT_OK)
        }
        Command::Gen(gen) => run_gen(gen, io),
        Command::Fit { input, s, out } => {
            let g: GramSystem = io.parse(&input)?;
            let value = match s {
                Some(s) => json!({ "A": certified_min_a(&g, s)?, "s": s, "scope": Scope::TruncationOnly }),
                None => serde_json::to_value(fit_envelope(&g)?)?,
            };
            io.emit_json(&out, &value)?;
            Ok(EXIT_OK)
        }
        Command::Partition { input, epsilon, modulus, out } => {
            let g: GramSystem = io.parse(&input)?;
            let cert = pave(&g, PaveOptions { epsilon, modulus })?;
            io.emit_json(&out, &cert)?;
            Ok(verdict_code(cert.verdict))
        }
        Command::Certify { input, paving, epsilon, out } => {
            let g: GramSystem = io.parse(&input)?;
            let paving: Paving = io.parse(&paving)?;
            let epsilon = epsilon.unwrap_or_else(|| diag_lower_bound(&g).value / 2.0);
            let cert = certify(&g, &paving, epsilon)?;
            io.emit_json(&out, &cert)?;
            Ok(verdict_code(cert.verdict))
        }
        Command::Oracle { input, epsilon, cap, parallel, out } => {
            let g: GramSystem = io.parse(&input)?;
            let result = match min_partition_with(&g, OracleOptions { epsilon, cap, parallel }) {
                Ok(r) => r,
                Err(e @ crate::Error::Infeasible { .. }) => {
                    io.emit_json(&out, &json!({ "N": null, "infeasible": e.to_string() }))?;
                    return Ok(EXIT_FAIL);
                }
                Err(e) => return Err(e.into()),
            };
            let classes: Vec<&Class> = result.paving.classes().iter().collect();
            io.emit_json(
                &out,
                &json!({
                    "N": result.classes,
                    "classes": classes,
                    "margins": result.margins,
                    "epsilon": epsilon,
                    "compared_modulus": compared_modulus(&g),
                }),
            )?;
            Ok(EXIT_OK)
        }
        Command::Report { input, oracle, out } => {
            let cert: ArsCertificate = io.parse(&input)?;
            let oracle: Option<serde_json::Value> = match oracle {
                Some(path) => Some(io.parse(&path)?),
                None => None,
            };
            io.emit(&out, &render_report(&cert, oracle.as_ref()))?;
            Ok(verdict_code(cert.verdict))
        }
    }
}

/// The modulus rule's `M` when the system carries an envelope and a positive `C`.
fn compared_modulus(g: &GramSystem) -> Option<usize> {
    let e = g.envelope()?;
    let c = diag_lower_bound(g).value;
    (c > 0.0).then(|| choose_modulus(e.amplitude(), e.exponent(), c).ok()).flatten()
}

fn check_generated_size(values: usize) -> Result<(), Failure> {
    if values > MAX_GENERATED_VALUES {
        return Err(Failure(format!(
            "refusing to materialize {values} values (limit {MAX_GENERATED_VALUES}); try --layout toeplitz"
        )));
    }
    Ok(())
}

fn stored_values(size: usize, layout: LayoutArg) -> usize {
    match layout {
        LayoutArg::Toeplitz => size,
        _ => size.saturating_mul(size),
    }
}

fn run_gen(gen: GenCommand, io: &mut Io<'_>) -> Result<i32, Failure> {
    match gen {
        GenCommand::PowerLaw { amplitude, s, c, size, seed, layout, out } => {
            check_generated_size(stored_values(size, layout))?;
            let g = power_law_gram(amplitude, s, c, size, seed)?.to_layout(layout.into())?;
            io.emit(&out, &g.to_json_string())?;
            Ok(EXIT_OK)
        }
        GenCommand::Translates { window, period, layout, out } => {
            check_generated_size(stored_values(period, layout))?;
            let g = translate_frame_gram(&window, period)?.to_layout(layout.into())?;
            io.emit(&out, &g.to_json_string())?;
            Ok(EXIT_OK)
        }
        GenCommand::FrameCheck { vectors, out } => {
            let fs: FrameSystem = io.parse(&vectors)?;
            let report = frame_operator_check(&fs);
            io.emit_json(&out, &report)?;
            Ok(if report.invertible { EXIT_OK } else { EXIT_FAIL })
        }
    }
}

fn render_report(cert: &ArsCertificate, oracle: Option<&serde_json::Value>) -> String {
    let mut lines = Vec::new();
    let paving = &cert.paving;
    lines.push(format!("ARS certificate: verdict {} (scope {})", cert.verdict, cert.scope));
    lines.push(format!(
        "range {}, {} classes, modulus {}, epsilon {}",
        paving.range(),
        paving.len(),
        paving.modulus().map_or("-".to_string(), |m| m.to_string()),
        cert.epsilon
    ));
    if let Some(t) = &cert.theory {
        lines.push(format!(
            "envelope A = {} s = {} ({}), C = {}, C_s = {:.10}",
            t.amplitude, t.s, t.envelope_scope, t.c, t.c_s
        ));
        lines.push(format!("guaranteed margin C - A*C_s/M^s = {:.10}", t.guaranteed_margin));
    }
    lines.push(String::new());
    let width = paving.classes().iter().map(|c| c.to_string().chars().count()).max().unwrap_or(5).max(5);
    lines.push(format!("{:<width$}  {:>20}  ok", "class", "margin"));
    for (class, mu) in paving.classes().iter().zip(&cert.margins) {
        let ok = if *mu >= cert.epsilon && *mu > 0.0 { "yes" } else { "NO" };
        lines.push(format!("{:<width$}  {:>20.12}  {ok}", class.to_string(), mu));
    }
    lines.push(format!("minimum margin {:.12}", cert.min_margin()));
    if let Some(o) = oracle {
        lines.push(String::new());
        match (o.get("N").and_then(|v| v.as_u64()), paving.modulus()) {
            (Some(n), Some(m)) => lines.push(format!(
                "oracle minimum N = {n}, residue paving uses M = {m} classes (gap {})",
                m as i64 - n as i64
            )),
            (Some(n), None) => lines.push(format!("oracle minimum N = {n}")),
            (None, _) => lines.push("oracle found no admissible paving".into()),
        }
    }
    lines.join("\n")
}
