//! `gramkit` command line: `check`, `schema` and `parse`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::diag::Diagnostic;
use crate::engine::ParseOptions;
use crate::metamodel::{export_schema, SchemaFormat};
use crate::pipeline::{process_all, Language};

#[derive(Debug, Parser)]
#[command(name = "gramkit", version, about = "Grammar-driven language workbench")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a grammar and print its diagnostics.
    Check { grammar: PathBuf },
    /// Derive the abstract syntax of a grammar.
    Schema {
        grammar: PathBuf,
        #[arg(long, value_enum, default_value_t = SchemaFormat::Json)]
        format: SchemaFormat,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse, resolve and export models. Several models give a JSON array.
    Parse {
        grammar: PathBuf,
        #[arg(required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Start rule (default: the first production).
        #[arg(long)]
        start: Option<String>,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

struct Failure(i32);

type Step<T> = Result<T, Failure>;

fn read(path: &Path, stderr: &mut dyn Write) -> Step<String> {
    std::fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(stderr, "gramkit: cannot read {}: {e}", path.display());
        Failure(EXIT_USAGE)
    })
}

fn report(file: &Path, diags: &[Diagnostic], stderr: &mut dyn Write) -> bool {
    let name = file.display().to_string();
    for d in diags {
        let _ = writeln!(stderr, "{}", d.render(&name));
    }
    crate::diag::has_errors(diags)
}

fn compile(path: &Path, stderr: &mut dyn Write) -> Step<Language> {
    let text = read(path, stderr)?;
    match Language::compile(&text) {
        Ok(lang) => {
            report(path, &lang.warnings, stderr);
            Ok(lang)
        }
        Err(diags) => {
            report(path, &diags.0, stderr);
            Err(Failure(EXIT_DIAGNOSTICS))
        }
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Step<()> {
    let written = match out {
        Some(p) => std::fs::write(p, text).map_err(|e| (p.display().to_string(), e)),
        None => stdout.write_all(text.as_bytes()).map_err(|e| ("standard output".into(), e)),
    };
    written.map_err(|(target, e)| {
        let _ = writeln!(stderr, "gramkit: cannot write {target}: {e}");
        Failure(EXIT_USAGE)
    })
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 if any error diagnostic was reported, 2 for usage or I/O problems.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{rendered}");
                EXIT_OK
            };
        }
    };
    match execute(&config.command, stdout, stderr) {
        Ok(code) | Err(Failure(code)) => code,
    }
}

fn execute(cmd: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Step<i32> {
    match cmd {
        Command::Check { grammar } => {
            compile(grammar, stderr)?;
            Ok(EXIT_OK)
        }
        Command::Schema { grammar, format, out } => {
            let lang = compile(grammar, stderr)?;
            emit(out.as_deref(), &export_schema(&lang.schema, *format), stdout, stderr)?;
            Ok(EXIT_OK)
        }
        Command::Parse { grammar, models, out, start } => {
            let lang = compile(grammar, stderr)?;
            let texts = models.iter().map(|m| read(m, stderr)).collect::<Step<Vec<_>>>()?;
            let opts = ParseOptions { start: start.clone(), ..ParseOptions::default() };
            let results = process_all(&lang, &texts, &opts);
            let mut failed = false;
            let mut docs = Vec::new();
            for (path, r) in models.iter().zip(&results) {
                failed |= report(path, &r.diagnostics, stderr);
                docs.push(r.document());
            }
            let json = if docs.len() == 1 {
                match &docs[0] {
                    Some(d) => d.to_json(),
                    None => String::new(),
                }
            } else {
                let mut s = serde_json::to_string_pretty(&docs).expect("documents serialize");
                s.push('\n');
                s
            };
            if !json.is_empty() {
                emit(out.as_deref(), &json, stdout, stderr)?;
            }
            Ok(if failed { EXIT_DIAGNOSTICS } else { EXIT_OK })
        }
    }
}
