//! `vspecc`: compile `.vspec` specifications into solver queries.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use vspecc_core::backend::{self, Format, Options};
use vspecc_core::driver::{compile_checked, signatures, CompiledProperty, PropertyError};
use vspecc_core::frontend::{load, FrontendError, Span, TypedProgram};
use vspecc_core::oracle::{check::check_compiled, parse_networks, AffineNetwork, Limits, NetworkManifest};

/// `println!` that exits quietly once stdout is closed.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        if writeln!(std::io::stdout(), $($t)*).is_err() {
            std::process::exit(0);
        }
    }};
}

#[derive(Parser)]
#[command(name = "vspecc", version, about = "Compiles neural network specifications into solver queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Tree,
    Dnf,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Tree => Format::Tree,
            FormatArg::Dnf => Format::Dnf,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write one query file per solver call plus `manifest.json`.
    Compile {
        spec: PathBuf,
        /// Network manifest; shapes must match the `@network` declarations.
        #[arg(long)]
        networks: Option<PathBuf>,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "dnf")]
        format: FormatArg,
        /// Rewrite strict inequalities as non-strict ones.
        #[arg(long)]
        weaken_strict: bool,
    },
    /// Compile, then check every property against affine networks.
    Check {
        spec: PathBuf,
        /// Network manifest with weights for every declared network.
        #[arg(long)]
        networks: PathBuf,
        /// Also write the queries to this directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = Limits::default().max_vars)]
        max_vars: usize,
    },
    /// Print the compiled queries of every property.
    Explain {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "tree")]
        format: FormatArg,
    },
}

const SPEC_ERROR: u8 = 1;
const IO_ERROR: u8 = 2;

struct Failure {
    code: u8,
    lines: Vec<String>,
}

impl Failure {
    fn io(path: &Path, e: impl Display) -> Failure {
        Failure { code: IO_ERROR, lines: vec![format!("{}: {}: {e}", path.display(), paint("error", "31"))] }
    }

    fn spec(path: &Path, span: Option<Span>, class: &str, message: impl Display) -> Failure {
        let at = span.map_or_else(|| path.display().to_string(), |s| format!("{}:{s}", path.display()));
        let head = paint(&format!("error[{class}]"), "31");
        Failure { code: SPEC_ERROR, lines: vec![format!("{at}: {head}: {message}")] }
    }
}

fn color_enabled() -> bool {
    std::env::var("VSPECC_COLOR").is_ok_and(|v| !v.is_empty() && v != "0")
}

fn paint(text: &str, code: &str) -> String {
    if color_enabled() {
        format!("\x1b[1;{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn strip_span(message: String, span: Span) -> String {
    message.strip_prefix(&format!("{span}: ")).map(str::to_string).unwrap_or(message)
}

fn frontend_failure(path: &Path, e: FrontendError) -> Failure {
    let span = e.span();
    let (class, message) = match e {
        FrontendError::Parse(p) => ("ParseError", strip_span(p.to_string(), span)),
        FrontendError::Type(t) => (t.class(), strip_span(t.to_string(), span)),
    };
    Failure::spec(path, Some(span), class, message)
}

fn load_spec(path: &Path) -> Result<TypedProgram, Failure> {
    let source = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    load(&source).map_err(|e| frontend_failure(path, e))
}

fn load_networks(path: &Path, prog: &TypedProgram) -> Result<NetworkManifest, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let manifest = parse_networks(&text).map_err(|e| Failure::spec(path, None, "NetworkManifest", e))?;
    for n in &prog.networks {
        let Some(d) = manifest.networks.iter().find(|d| d.name == n.name) else {
            return Err(Failure::spec(path, None, "NetworkManifest", format!("network `{}` is not listed", n.name)));
        };
        if (d.inputs, d.outputs) != (n.inputs, n.outputs) {
            return Err(Failure::spec(
                path,
                None,
                "NetworkManifest",
                format!(
                    "network `{}` is declared {} -> {} but the manifest says {} -> {}",
                    n.name, n.inputs, n.outputs, d.inputs, d.outputs
                ),
            ));
        }
    }
    Ok(manifest)
}

fn compile_all(path: &Path, prog: &TypedProgram, options: Options) -> Result<Vec<CompiledProperty>, Failure> {
    let sigs = signatures(prog);
    let results: Vec<Result<CompiledProperty, PropertyError>> =
        prog.properties.par_iter().map(|p| compile_checked(&sigs, p, options)).collect();
    let mut out = Vec::with_capacity(results.len());
    let mut lines = Vec::new();
    for r in results {
        match r {
            Ok(c) => out.push(c),
            Err(e) => lines.extend(
                Failure::spec(path, Some(e.span), e.error.class(), format!("property `{}`: {}", e.name, e.error)).lines,
            ),
        }
    }
    if lines.is_empty() {
        Ok(out)
    } else {
        Err(Failure { code: SPEC_ERROR, lines })
    }
}

fn emit(dir: &Path, compiled: &[CompiledProperty], format: Format) -> Result<backend::Manifest, Failure> {
    let items: Vec<_> = compiled.iter().map(|c| (&c.compiled.ctx, c.emitted.clone())).collect();
    backend::emit(&items, format, dir).map_err(|e| Failure::io(dir, e))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compile { spec, networks, output, format, weaken_strict } => {
            let prog = load_spec(&spec)?;
            if let Some(n) = networks {
                load_networks(&n, &prog)?;
            }
            let compiled = compile_all(&spec, &prog, Options { weaken_strict })?;
            let manifest = emit(&output, &compiled, format.into())?;
            let files: usize = manifest.properties.iter().flat_map(|p| &p.leaves).map(|l| l.queries.len()).sum();
            out!("{} properties, {files} query files written to {}", manifest.properties.len(), output.display());
            Ok(())
        }
        Command::Check { spec, networks, output, max_vars } => {
            let prog = load_spec(&spec)?;
            let manifest = load_networks(&networks, &prog)?;
            let nets: BTreeMap<String, AffineNetwork> =
                manifest.affine().map_err(|e| Failure::spec(&networks, None, "NetworkManifest", e))?;
            let compiled = compile_all(&spec, &prog, Options::default())?;
            if let Some(dir) = output {
                emit(&dir, &compiled, Format::Dnf)?;
            }
            let limits = Limits { max_vars, ..Limits::default() };
            let mut failures = Vec::new();
            for (c, p) in compiled.iter().zip(&prog.properties) {
                let report = check_compiled(&c.name, &p.expr, &c.compiled, &c.emitted, &nets, limits).map_err(|e| {
                    Failure::spec(&spec, Some(c.span), "OracleError", format!("property `{}`: {e}", c.name))
                })?;
                let verdict = if report.agrees() { paint("agree", "32") } else { paint("MISMATCH", "31") };
                out!("{}: {verdict} (semantics {}, queries {})", c.name, report.semantic, report.compiled);
                for w in &report.witnesses {
                    let values: Vec<String> = w.values.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                    if !values.is_empty() {
                        out!("  witness L{}.{}: {}", w.leaf, w.query, values.join(", "));
                    }
                }
                for f in &report.witness_failures {
                    out!("  invalid witness: {f}");
                }
                if !report.agrees() {
                    failures.extend(
                        Failure::spec(
                            &spec,
                            Some(c.span),
                            "Mismatch",
                            format!("property `{}` is not equisatisfiable", c.name),
                        )
                        .lines,
                    );
                }
            }
            if failures.is_empty() {
                Ok(())
            } else {
                Err(Failure { code: SPEC_ERROR, lines: failures })
            }
        }
        Command::Explain { spec, format } => {
            let prog = load_spec(&spec)?;
            let compiled = compile_all(&spec, &prog, Options::default())?;
            for c in &compiled {
                let (entry, files) = backend::property_files(&c.compiled.ctx, &c.emitted, format.into());
                out!("property {}", c.name);
                if let Some(status) = &entry.status {
                    out!("  {status}");
                }
                if let Some(structure) = &entry.structure {
                    out!("  structure: {structure}");
                }
                let mut files = files.into_iter();
                for (li, leaf) in entry.leaves.iter().enumerate() {
                    out!("  L{li}{}", if leaf.negated { " (negated)" } else { "" });
                    for q in &leaf.queries {
                        let (_, body) = files.next().expect("one file per query");
                        let meta: Vec<String> =
                            q.meta_network.iter().map(|m| format!("{}[{}->{}]", m.name, m.inputs, m.outputs)).collect();
                        out!("    {}  meta: {}", q.file, meta.join(" "));
                        out!("      {}", body.trim_end());
                        for (var, value) in &q.solution {
                            match value {
                                serde_json::Value::String(s) => out!("      {var} := {s}"),
                                other => out!("      {var} := {other}"),
                            }
                        }
                    }
                }
                let s = &c.compiled.ctx.stats;
                out!(
                    "  substitutions: {} vector, {} scalar; {} Fourier-Motzkin eliminations",
                    s.vector_substitutions,
                    s.scalar_substitutions,
                    s.fourier_motzkin_eliminations
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for l in f.lines {
                eprintln!("{l}");
            }
            ExitCode::from(f.code)
        }
    }
}
