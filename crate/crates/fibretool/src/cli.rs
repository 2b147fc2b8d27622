//! Command-line front end: subcommands for the gluing algebra, singularity
//! scans, fiber traces, piece-complex construction, and diagram emission.
//!
//! Every successful invocation prints one canonical-JSON envelope to
//! stdout: tool version, an echo of the resolved parameters, the result
//! payload, and (for constructions) a validation report. Envelopes are
//! byte-deterministic unless `--timing` is given. Exit codes: 0 success,
//! 1 usage or computation error (message on stderr), 2 validation failure
//! (the envelope, including the failing report, is still printed).

use crate::blf::{build_blf, emit_json, emit_svg, validate_blf, BlfError, EllipticSurfaceSpec, LayoutOptions};
use crate::fiber::{fiber_stats, trace_fiber_with, TraceError, TraceOptions};
use crate::grid::{DomainKind, GridError, GridSpec};
use crate::json::to_canonical_string;
use crate::maps::{scan_singularities, MapId, ModelError, ScanOptions, Sign};
use crate::pieces::{
    build_exceptional_p1, build_multiple_fiber, validate_complex, PieceError, ValidationReport,
};
use crate::surgery::{
    direction_normalizer, gluing_matrix, surgery_class, SurgeryData, SurgeryError,
};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config {path}: {detail}")]
    Config { path: String, detail: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Surgery(#[from] SurgeryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Piece(#[from] PieceError),
    #[error(transparent)]
    Blf(#[from] BlfError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Built-in defaults, overridable by a `--config` JSON file, overridable
/// in turn by command-line flags.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub scan_grid_torus_times_disk: Vec<u32>,
    pub scan_grid_solid_torus: Vec<u32>,
    pub scan_grid_box: Vec<u32>,
    pub fiber_grid_torus_times_disk: Vec<u32>,
    pub fiber_grid_solid_torus: Vec<u32>,
    pub fiber_grid_box: Vec<u32>,
    pub tolerance: f64,
    pub delta: Option<f64>,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            scan_grid_torus_times_disk: vec![16, 16, 16, 16],
            scan_grid_solid_torus: vec![16, 16, 16],
            scan_grid_box: vec![32, 32, 32],
            fiber_grid_torus_times_disk: vec![32, 32, 24, 24],
            fiber_grid_solid_torus: vec![64, 64, 64],
            fiber_grid_box: vec![32, 32, 32],
            tolerance: 1e-8,
            delta: None,
        }
    }
}

impl ToolConfig {
    fn scan_grid(&self, domain: DomainKind) -> &[u32] {
        match domain {
            DomainKind::TorusTimesDisk => &self.scan_grid_torus_times_disk,
            DomainKind::SolidTorus => &self.scan_grid_solid_torus,
            DomainKind::Box { .. } => &self.scan_grid_box,
        }
    }

    fn fiber_grid(&self, domain: DomainKind) -> &[u32] {
        match domain {
            DomainKind::TorusTimesDisk => &self.fiber_grid_torus_times_disk,
            DomainKind::SolidTorus => &self.fiber_grid_solid_torus,
            DomainKind::Box { .. } => &self.fiber_grid_box,
        }
    }
}

/// Fit a configured resolution list to `dim` axes: exact length wins,
/// otherwise the first entry is replicated.
fn fit_resolutions(configured: &[u32], dim: usize) -> Vec<u32> {
    if configured.len() == dim {
        configured.to_vec()
    } else {
        vec![configured.first().copied().unwrap_or(16); dim]
    }
}

pub fn load_config(path: &Path) -> Result<ToolConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.display().to_string(),
        // serde_json errors carry line and column positions.
        detail: e.to_string(),
    })
}

#[derive(Parser, Debug)]
#[command(
    name = "fibretool",
    version,
    about = "Torus-surgery gluing algebra, model fibration maps, fiber tracing, and fold-circle diagrams"
)]
struct Cli {
    /// JSON config file with default grid resolutions and tolerances.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Add wall-clock time to the envelope (makes output non-deterministic).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: CommandKind,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MapChoice {
    /// e^{ik xi_2} z^p on T^2 x D^2.
    MultipleFiber,
    /// e^{-iqu} z^p on S^1 x D^2.
    Seifert,
    /// (t, sum of signed squares).
    FoldChart,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ConstructKind {
    /// Solid-torus exceptional-fiber replacement.
    Exceptional,
    /// Four-dimensional multiple-fiber replacement.
    MultipleFiber,
}

#[derive(Subcommand, Debug)]
enum CommandKind {
    /// Integer gluing data for an integral torus surgery.
    Surgery {
        /// Surgery multiplicity.
        #[arg(long)]
        p: i64,
        /// Meridian coefficient (+1 or -1 for integral surgeries).
        #[arg(long)]
        q: i64,
        /// Surgery direction on the torus, as two coprime integers.
        #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0,1")]
        alpha: Vec<i64>,
    },
    /// Classify the singular set of a model map on a node grid.
    Scan {
        #[arg(long, value_enum)]
        map: MapChoice,
        #[arg(long, default_value_t = 2)]
        p: i64,
        /// Twisting exponent for multiple-fiber maps.
        #[arg(long)]
        k: Option<i64>,
        /// Circle-action exponent for Seifert maps.
        #[arg(long)]
        q: Option<i64>,
        /// Quadratic signs for fold charts, e.g. "+-" or "++-".
        #[arg(long)]
        signs: Option<String>,
        /// Nodes per axis, comma separated.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<u32>>,
        /// Rank tolerance on singular values.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Trace an approximate fiber and report its component structure.
    Fiber {
        #[arg(long, value_enum)]
        map: MapChoice,
        #[arg(long, default_value_t = 2)]
        p: i64,
        #[arg(long)]
        k: Option<i64>,
        #[arg(long)]
        q: Option<i64>,
        #[arg(long)]
        signs: Option<String>,
        /// Real part of the target value.
        #[arg(long, default_value_t = 0.25)]
        target_re: f64,
        /// Imaginary part of the target value.
        #[arg(long, default_value_t = 0.0)]
        target_im: f64,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<u32>>,
        /// Uniform marking thickness; omit for the adaptive per-cell bound.
        #[arg(long)]
        delta: Option<f64>,
        /// Keep marked cells whose corners are rank-deficient.
        #[arg(long)]
        allow_singular: bool,
        /// Include the marked-cell and component arrays in the envelope.
        #[arg(long)]
        cells: bool,
        /// Write marked cell centers as CSV to this file.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Build a fibered piece complex and validate it.
    Construct {
        #[arg(long, value_enum)]
        kind: ConstructKind,
        /// Fiber multiplicity.
        #[arg(long)]
        p: i64,
    },
    /// Assemble the critical-image diagram of an elliptic surface.
    Blf {
        #[arg(long, default_value_t = 1)]
        n: i64,
        #[arg(long, default_value_t = 2)]
        p: i64,
        #[arg(long, default_value_t = 3)]
        q: i64,
        /// Number of Lefschetz points; defaults to 12 n.
        #[arg(long)]
        lefschetz: Option<i64>,
        /// Also write the diagram as SVG to this file.
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
        /// Also write the diagram as canonical JSON to this file.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct CommandEcho {
    name: String,
    params: serde_json::Value,
}

#[derive(Serialize)]
struct Envelope {
    version: String,
    command: CommandEcho,
    result: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<f64>,
}

/// Write through a temporary file in the destination directory so readers
/// never observe a half-written file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

fn parse_signs(text: &str) -> Result<Vec<Sign>, CliError> {
    if text.is_empty() {
        return Err(CliError::Usage("signs must not be empty".into()));
    }
    text.chars()
        .map(|c| match c {
            '+' => Ok(Sign::Plus),
            '-' => Ok(Sign::Minus),
            other => Err(CliError::Usage(format!(
                "signs may contain only '+' and '-', found {other:?}"
            ))),
        })
        .collect()
}

fn build_map(
    choice: MapChoice,
    p: i64,
    k: Option<i64>,
    q: Option<i64>,
    signs: Option<&str>,
) -> Result<MapId, CliError> {
    match choice {
        MapChoice::MultipleFiber => Ok(MapId::MultipleFiber {
            p,
            k: k.unwrap_or(1),
        }),
        MapChoice::Seifert => Ok(MapId::Seifert {
            p,
            q: q.unwrap_or(1),
        }),
        MapChoice::FoldChart => Ok(MapId::FoldChart {
            signs: parse_signs(signs.unwrap_or("+-"))?,
        }),
    }
}

/// Parse arguments, run one command, print the envelope. Returns the
/// process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    0
                }
                _ => {
                    eprint!("{err}");
                    1
                }
            };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let config = match &cli.config {
        Some(path) => load_config(path)?,
        None => ToolConfig::default(),
    };

    let started = Instant::now();
    let outcome = match std::env::var("FIBRETOOL_THREADS") {
        Ok(raw) => {
            let threads: usize = raw.parse().map_err(|_| {
                CliError::Usage(format!("FIBRETOOL_THREADS must be an integer, got {raw:?}"))
            })?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            pool.install(|| dispatch(&cli.command, &config))?
        }
        Err(_) => dispatch(&cli.command, &config)?,
    };
    let (name, params, result, validation) = outcome;

    let failed = validation.as_ref().is_some_and(|v| !v.pass);
    let envelope = Envelope {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: CommandEcho { name, params },
        result,
        validation,
        wall_time_ms: cli
            .timing
            .then(|| started.elapsed().as_secs_f64() * 1e3),
    };
    println!("{}", to_canonical_string(&envelope)?);
    Ok(if failed { 2 } else { 0 })
}

type Outcome = (String, serde_json::Value, serde_json::Value, Option<ValidationReport>);

fn dispatch(command: &CommandKind, config: &ToolConfig) -> Result<Outcome, CliError> {
    match command {
        CommandKind::Surgery { p, q, alpha } => {
            if alpha.len() != 2 {
                return Err(CliError::Usage(format!(
                    "--alpha needs exactly two integers, got {}",
                    alpha.len()
                )));
            }
            let data = SurgeryData::new(*p, *q, (alpha[0], alpha[1]))?;
            let matrix = gluing_matrix(&data);
            let params = json!({ "p": p, "q": q, "alpha": [alpha[0], alpha[1]] });
            let result = json!({
                "k": data.k(),
                "gluing_matrix": matrix.0,
                "determinant": matrix.det(),
                "gamma": surgery_class(&data).0,
                "is_integral": data.is_integral(),
                "direction_normalizer": direction_normalizer((alpha[0], alpha[1]))?,
            });
            Ok(("surgery".into(), params, result, None))
        }
        CommandKind::Scan {
            map,
            p,
            k,
            q,
            signs,
            grid,
            tolerance,
        } => {
            let map = build_map(*map, *p, *k, *q, signs.as_deref())?;
            let domain = map
                .domain()
                .ok_or_else(|| CliError::Usage(format!("{} has no grid domain", map.label())))?;
            let resolutions = match grid {
                Some(g) => g.clone(),
                None => fit_resolutions(config.scan_grid(domain), domain.dim()),
            };
            let spec = GridSpec::new(domain, resolutions.clone())?;
            let opts = ScanOptions {
                tolerance: tolerance.unwrap_or(config.tolerance),
                ..ScanOptions::default()
            };
            let report = scan_singularities(&map, &spec, &opts)?;
            let params = json!({
                "map": map.label(),
                "grid": resolutions,
                "tolerance": opts.tolerance,
            });
            Ok(("scan".into(), params, serde_json::to_value(report)?, None))
        }
        CommandKind::Fiber {
            map,
            p,
            k,
            q,
            signs,
            target_re,
            target_im,
            grid,
            delta,
            allow_singular,
            cells,
            csv,
        } => {
            let map = build_map(*map, *p, *k, *q, signs.as_deref())?;
            let domain = map
                .domain()
                .ok_or_else(|| CliError::Usage(format!("{} has no grid domain", map.label())))?;
            let resolutions = match grid {
                Some(g) => g.clone(),
                None => fit_resolutions(config.fiber_grid(domain), domain.dim()),
            };
            let delta = delta.or(config.delta);
            let mut spec = GridSpec::new(domain, resolutions.clone())?;
            if let Some(d) = delta {
                spec = spec.with_delta(Some(d));
            }
            let target = Complex64::new(*target_re, *target_im);
            let opts = TraceOptions {
                allow_singular: *allow_singular,
                ..TraceOptions::default()
            };
            let fiber = trace_fiber_with(&map, target, &spec, &opts)?;
            let stats = fiber_stats(&fiber)?;
            if let Some(path) = csv {
                write_atomic(path, fiber.cells_csv().as_bytes())?;
            }
            let params = json!({
                "map": map.label(),
                "target": [target_re, target_im],
                "grid": resolutions,
                "delta": delta,
                "allow_singular": allow_singular,
            });
            let mut result = json!({
                "stats": stats,
                "policy": fiber.policy,
                "effective_delta": fiber.effective_delta,
                "marked_cell_count": fiber.cells.len(),
                "component_count": fiber.component_count,
            });
            if *cells {
                result["cells"] = serde_json::to_value(&fiber.cells)?;
                result["components"] = serde_json::to_value(&fiber.components)?;
            }
            Ok(("fiber".into(), params, result, None))
        }
        CommandKind::Construct { kind, p } => {
            let complex = match kind {
                ConstructKind::Exceptional => build_exceptional_p1(*p)?,
                ConstructKind::MultipleFiber => build_multiple_fiber(*p)?,
            };
            let report = validate_complex(&complex);
            let kind_name = match kind {
                ConstructKind::Exceptional => "exceptional",
                ConstructKind::MultipleFiber => "multiple-fiber",
            };
            let params = json!({ "kind": kind_name, "p": p });
            Ok((
                "construct".into(),
                params,
                serde_json::to_value(&complex)?,
                Some(report),
            ))
        }
        CommandKind::Blf {
            n,
            p,
            q,
            lefschetz,
            svg,
            json: json_path,
        } => {
            let mut spec = EllipticSurfaceSpec::new(*n, *p, *q);
            if let Some(l) = lefschetz {
                spec = spec.with_lefschetz_count(*l);
            }
            let diagram = build_blf(spec)?;
            let report = validate_blf(&diagram);
            if let Some(path) = svg {
                write_atomic(path, emit_svg(&diagram, &LayoutOptions::default()).as_bytes())?;
            }
            if let Some(path) = json_path {
                write_atomic(path, emit_json(&diagram)?.as_bytes())?;
            }
            let params = json!({
                "n": n,
                "p": p,
                "q": q,
                "lefschetz": diagram.spec.resolved_lefschetz_count(),
            });
            Ok((
                "blf".into(),
                params,
                serde_json::to_value(&diagram)?,
                Some(report),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_json() {
        let text = serde_json::to_string(&ToolConfig::default()).unwrap();
        let back: ToolConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ToolConfig::default());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let err = serde_json::from_str::<ToolConfig>("{\"tolerancy\": 1e-8}").unwrap_err();
        assert!(err.to_string().contains("tolerancy"));
    }

    #[test]
    fn partial_config_keeps_other_defaults() {
        let cfg: ToolConfig = serde_json::from_str("{\"delta\": 1e-3}").unwrap();
        assert_eq!(cfg.delta, Some(1e-3));
        assert_eq!(cfg.tolerance, 1e-8);
        assert_eq!(cfg.fiber_grid_solid_torus, vec![64, 64, 64]);
    }

    #[test]
    fn sign_strings_parse() {
        assert_eq!(parse_signs("+-").unwrap(), vec![Sign::Plus, Sign::Minus]);
        assert!(parse_signs("+x").is_err());
        assert!(parse_signs("").is_err());
    }

    #[test]
    fn resolution_fitting_replicates_on_mismatch() {
        assert_eq!(fit_resolutions(&[16, 16, 16], 3), vec![16, 16, 16]);
        assert_eq!(fit_resolutions(&[32, 32, 32], 4), vec![32, 32, 32, 32]);
    }
}
