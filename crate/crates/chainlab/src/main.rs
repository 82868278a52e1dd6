use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chainlab::report::{render_report, strip_timing};
use chainlab::runner::run_spec;
use chainlab::spec::parse_spec;

/// Deterministic probe runner for budgeted subalgebra experiments.
#[derive(Parser)]
#[command(name = "chainlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every probe of a spec file and write the report.
    Run {
        specfile: PathBuf,
        /// Overrides the spec's global seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Report path (defaults to the spec's `out` line, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for probe execution.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Omit the timing section.
        #[arg(long)]
        no_timing: bool,
    },
    /// Parse a spec file and report diagnostics only.
    Check { specfile: PathBuf },
    /// Regenerate `<name>.golden` next to every `.spec` in a directory.
    Goldens { dir: PathBuf },
}

const EXIT_FAILURE: u8 = 1;
const EXIT_SPEC_ERROR: u8 = 2;
const EXIT_UNSATURATED: u8 = 3;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            specfile,
            seed,
            out,
            jobs,
            no_timing,
        } => run(&specfile, seed, out, jobs, no_timing),
        Command::Check { specfile } => check(&specfile),
        Command::Goldens { dir } => goldens(&dir),
    }
}

fn spec_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load(path: &Path) -> Result<chainlab::ExperimentSpec, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("chainlab: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_SPEC_ERROR)
    })?;
    parse_spec(&text).map_err(|e| {
        eprintln!("chainlab: {}: {e}", path.display());
        ExitCode::from(EXIT_SPEC_ERROR)
    })
}

fn run(
    specfile: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
    jobs: usize,
    no_timing: bool,
) -> ExitCode {
    let mut spec = match load(specfile) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let report = match run_spec(&spec, &spec_name(specfile), jobs, !no_timing) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("chainlab: {}: {e}", specfile.display());
            return ExitCode::from(EXIT_SPEC_ERROR);
        }
    };
    let rendered = render_report(&report);
    let out_path = out.or_else(|| spec.out.as_ref().map(PathBuf::from));
    match out_path {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    let _ = std::fs::create_dir_all(parent);
                }
            }
            if let Err(e) = std::fs::write(&path, &rendered) {
                eprintln!("chainlab: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_SPEC_ERROR);
            }
        }
        None => print!("{rendered}"),
    }
    if report.failed() > 0 {
        ExitCode::from(EXIT_FAILURE)
    } else if report.any_require_failed() {
        ExitCode::from(EXIT_UNSATURATED)
    } else {
        ExitCode::SUCCESS
    }
}

fn check(specfile: &Path) -> ExitCode {
    match load(specfile) {
        Ok(spec) => {
            println!(
                "{}: ok ({} algebras, {} probes)",
                spec_name(specfile),
                spec.algebras.len(),
                spec.probes.len()
            );
            ExitCode::SUCCESS
        }
        Err(code) => code,
    }
}

fn goldens(dir: &Path) -> ExitCode {
    let mut spec_paths: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|ext| ext == "spec"))
            .collect(),
        Err(e) => {
            eprintln!("chainlab: cannot read {}: {e}", dir.display());
            return ExitCode::from(EXIT_SPEC_ERROR);
        }
    };
    spec_paths.sort();
    if spec_paths.is_empty() {
        eprintln!("chainlab: no .spec files in {}", dir.display());
        return ExitCode::from(EXIT_SPEC_ERROR);
    }
    for path in spec_paths {
        let spec = match load(&path) {
            Ok(s) => s,
            Err(code) => return code,
        };
        let report = match run_spec(&spec, &spec_name(&path), 1, false) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("chainlab: {}: {e}", path.display());
                return ExitCode::from(EXIT_SPEC_ERROR);
            }
        };
        let rendered = render_report(&report);
        let golden = path.with_extension("golden");
        if let Err(e) = std::fs::write(&golden, strip_timing(&rendered)) {
            eprintln!("chainlab: cannot write {}: {e}", golden.display());
            return ExitCode::from(EXIT_SPEC_ERROR);
        }
        println!("wrote {}", golden.display());
    }
    ExitCode::SUCCESS
}
