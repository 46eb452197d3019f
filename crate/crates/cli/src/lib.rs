//! Command-line front end: runs the verification suite and writes the JSON report,
//! orbit CSV and SVG figures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anosov_forge::report::{orbit_csv, run_suite};
use anosov_forge::svg::{foliation_svg, reeb_svg, FoliationPlot};
use anosov_forge::{Config, Error, PlanePoint, SampleBox};
use clap::{Parser, Subcommand, ValueEnum};

/// Environment variable naming a config file when `--config` is absent.
pub const CONFIG_ENV: &str = "ANOSOV_FORGE_CONFIG";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "anosov-forge", version, about = "Verify the planar Anosov construction and draw its figures")]
struct Cli {
    /// TOML config file; falls back to $ANOSOV_FORGE_CONFIG, then built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the check suite and emit a JSON report.
    Verify {
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include per-check wall-clock seconds (the report is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Print an orbit segment as CSV.
    Orbit {
        /// Starting point `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: PlanePoint,
        /// Number of iterates; negative values iterate the inverse.
        #[arg(long, allow_hyphen_values = true)]
        steps: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a figure as SVG.
    Plot {
        #[arg(value_enum)]
        figure: Figure,
        #[arg(long)]
        out: PathBuf,
        /// Window `x_min,x_max,y_min,y_max` of the foliation figure.
        #[arg(long, value_parser = parse_view, allow_hyphen_values = true)]
        view: Option<SampleBox>,
        /// Draw the axes only.
        #[arg(long)]
        bare: bool,
    },
    /// Search for the non-Hausdorff witness orbit and print it as JSON.
    Witness {
        /// Required distance to the target leaf; defaults to the config value.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the minimal displacement estimate.
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    Foliation,
    Reeb,
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(format!("expected {n} finite comma-separated numbers, got {s:?}"));
    }
    Ok(v)
}

fn parse_point(s: &str) -> Result<PlanePoint, String> {
    let v = parse_floats(s, 2)?;
    Ok(PlanePoint::new(v[0], v[1]))
}

fn parse_view(s: &str) -> Result<SampleBox, String> {
    let v = parse_floats(s, 4)?;
    SampleBox::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

fn load_config(flag: Option<PathBuf>, env: Option<PathBuf>) -> anosov_forge::Result<Config> {
    match flag.or(env) {
        Some(path) => Config::load(&path),
        None => Ok(Config::default()),
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> anosov_forge::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn execute(cli: Cli, env: Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anosov_forge::Result<i32> {
    let cfg = load_config(cli.config, env)?;
    match cli.command {
        Command::Verify { out, timing } => {
            let doc = run_suite(&cfg, timing)?;
            emit(out.as_deref(), &doc.to_json(), stdout)?;
            for c in &doc.checks {
                let _ = writeln!(
                    stderr,
                    "{} {} worst_margin={:e} threshold={:e}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.worst_margin,
                    c.threshold
                );
            }
            Ok(if doc.pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
        Command::Orbit { point, steps, out } => {
            let v = cfg.build()?;
            emit(out.as_deref(), &orbit_csv(v.dynamics(), point, steps)?, stdout)?;
            Ok(EXIT_PASS)
        }
        Command::Plot { figure, out, view, bare } => {
            let v = cfg.build()?;
            let svg = match figure {
                Figure::Foliation => {
                    let view = view.unwrap_or(FoliationPlot::default().view);
                    let plot = if bare { FoliationPlot::empty(view) } else { FoliationPlot::over(view) };
                    foliation_svg(v.dynamics(), &plot)?
                }
                Figure::Reeb => reeb_svg(v.dynamics().local_map())?,
            };
            emit(Some(&out), &svg, stdout)?;
            Ok(EXIT_PASS)
        }
        Command::Witness { tol } => {
            let v = cfg.build()?;
            let w = v.find_non_hausdorff_witness(tol.unwrap_or(cfg.witness_tol), cfg.witness_steps, cfg.witness_eta)?;
            let mut text = serde_json::to_string_pretty(&w).expect("witness serializes");
            text.push('\n');
            emit(None, &text, stdout)?;
            Ok(if w.report.pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
        Command::Alpha => {
            let v = cfg.build()?;
            let a = v.estimate_alpha()?;
            let _ = writeln!(stdout, "{a}");
            Ok(if a > 0.0 { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand. `env_config` is
/// the value of [`CONFIG_ENV`], if set. Returns the process exit code.
pub fn run<I, T>(args: I, env_config: Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, env_config, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}
