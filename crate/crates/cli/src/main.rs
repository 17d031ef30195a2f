//! `lsalloc`: experiment driver for local search allocation.
//!
//! Exit status: 0 on success, 1 when an invariant fails, 2 for a bad
//! configuration, 3 for an IO error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lsalloc::harness::{self, emit, sweep, verify, ExperimentSpec, Format};
use lsalloc::par::{with_threads, Execution};
use lsalloc::Error;

#[derive(Parser)]
#[command(name = "lsalloc", version, about = "Local search balls-into-bins experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the edge list of the spec's graph.
    GenerateGraph {
        #[command(flatten)]
        common: Common,
        /// Which of the spec's n values to build (default: the first).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run a single (n, seed) cell.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run every cell of the spec and write the reports.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Run the spec's invariant suites.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Re-render the plot from a sweep CSV.
    Plot {
        /// CSV written by `sweep`.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    spec: PathBuf,
    /// Overrides the spec's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the spec's.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
    /// Output format; repeat for several. Overrides the spec's.
    #[arg(long, value_name = "csv|json|svg")]
    format: Vec<Format>,
}

impl Common {
    fn load(&self) -> Result<ExperimentSpec, Error> {
        let mut spec = harness::load_spec(&self.spec)?;
        if let Some(seed) = self.seed {
            spec.seeds.base = seed;
        }
        if let Some(dir) = &self.out {
            spec.output.dir = dir.clone();
        }
        if !self.format.is_empty() {
            spec.output.formats = self.format.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::GenerationFailed { .. } => 1,
        _ => 2,
    }
}

/// Narrows a spec to one n value and one seed.
fn single_cell(mut spec: ExperimentSpec, n: Option<usize>) -> Result<ExperimentSpec, Error> {
    let n = match n {
        Some(n) => n,
        None => spec.n_values[0],
    };
    spec.n_values = vec![n];
    spec.seeds.count = 1;
    spec.validate()?;
    Ok(spec)
}

fn write_stdout(text: &str) -> Result<(), Error> {
    std::io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn report_paths(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::GenerateGraph { common, n } => {
            let spec = single_cell(common.load()?, n)?;
            let cg = sweep::cell_graph(&spec, 0)?;
            let text = cg.graph.to_edge_list();
            match &common.out {
                Some(dir) => {
                    let path = dir.join(format!("{}.edges", spec.output.name));
                    write_file(&path, &text)?;
                    report_paths(&[path]);
                }
                None => write_stdout(&text)?,
            }
            Ok(0)
        }
        Command::Run { common, n } => {
            let spec = single_cell(common.load()?, n)?;
            let result = harness::SweepResult { rows: vec![harness::run_cell(&spec, 0)] };
            if let Some(e) = result.rows.iter().find(|r| !r.error.is_empty()) {
                eprintln!("cell failed: {}", e.error);
            }
            match &common.out {
                Some(dir) => report_paths(&emit::emit(&result, &spec.output.formats, dir, &spec.output.name)?),
                None => {
                    let text = match spec.output.formats.first() {
                        Some(Format::Json) => emit::json_string(&result),
                        Some(Format::Svg) => emit::render_svg(&result.rows),
                        _ => emit::csv_string(&result.rows),
                    };
                    write_stdout(&text)?;
                }
            }
            Ok(u8::from(result.error_count() > 0))
        }
        Command::Sweep { common } => {
            let spec = common.load()?;
            let result = with_threads(common.threads, || harness::run_sweep(&spec, Execution::Parallel));
            let errors = result.error_count();
            if errors > 0 {
                eprintln!("{errors} of {} cells failed; see the error column", result.rows.len());
            }
            report_paths(&emit::emit(&result, &spec.output.formats, &spec.output.dir, &spec.output.name)?);
            Ok(0)
        }
        Command::Verify { common } => {
            let spec = common.load()?;
            let report = with_threads(common.threads, || verify::verify(&spec, Execution::Parallel))?;
            write_stdout(&report.summary())?;
            if let Some(dir) = &common.out {
                let path = dir.join(format!("{}-verify.json", spec.output.name));
                write_file(&path, &verify::report_json(&report))?;
                report_paths(&[path]);
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Plot { input, out } => {
            let stem = input.file_stem().map_or("sweep".into(), |s| s.to_string_lossy().into_owned());
            let dir = out.unwrap_or_else(|| input.parent().map_or_else(PathBuf::new, Path::to_path_buf));
            let path = dir.join(format!("{stem}.svg"));
            emit::plot_from_csv(&input, &path)?;
            report_paths(&[path]);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
