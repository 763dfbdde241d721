//! Convergence-study driver behind the `mhd-hho` binary.
//!
//! A study runs the manufactured problem on a sequence of meshes and emits
//! a CSV table `MeshSize,TotalEnergyComponentNormError,Rate`. Parameters
//! come from command-line flags, optionally on top of a TOML file given
//! with `--config`; flags take precedence over the file.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Deserialize;

use crate::mesh::{generate_structured_mesh, load_mesh, Mesh};
use crate::mms::{compute_eoc, solve_manufactured, ErrorReport};
use crate::solver::{LinearSolver, SolverConfig};
use crate::Error;

/// Header of the CSV table.
pub const CSV_HEADER: &str = "MeshSize,TotalEnergyComponentNormError,Rate";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Help or version text requested; not a failure.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Usage(String),
    #[error("mesh {mesh}: {source}")]
    Solver {
        mesh: String,
        #[source]
        source: Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Usage(_) => 1,
            CliError::Solver { .. } | CliError::Io(_) => 2,
        }
    }
}

/// Meshes of a study.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeshSequence {
    /// `generate_structured_mesh(n)` for each `n`.
    Structured(Vec<usize>),
    Files(Vec<PathBuf>),
}

impl MeshSequence {
    pub fn len(&self) -> usize {
        match self {
            MeshSequence::Structured(ns) => ns.len(),
            MeshSequence::Files(paths) => paths.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn label(&self, i: usize) -> String {
        match self {
            MeshSequence::Structured(ns) => format!("n={}", ns[i]),
            MeshSequence::Files(paths) => paths[i].display().to_string(),
        }
    }

    fn build(&self, i: usize) -> crate::Result<Mesh> {
        match self {
            MeshSequence::Structured(ns) => Ok(generate_structured_mesh(ns[i])),
            MeshSequence::Files(paths) => load_mesh(&std::fs::read_to_string(&paths[i])?),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub k: usize,
    pub nu: f64,
    pub mu: f64,
    pub c_stab: f64,
    pub meshes: MeshSequence,
    pub final_time: f64,
    /// CSV destination; standard output when absent.
    pub output: Option<PathBuf>,
    pub condense: bool,
    pub upwind: bool,
}

impl StudyConfig {
    pub fn new(k: usize, nu: f64, mu: f64, meshes: MeshSequence) -> Self {
        Self {
            k,
            nu,
            mu,
            c_stab: 1.0,
            meshes,
            final_time: 1.0,
            output: None,
            condense: true,
            upwind: true,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.nu) {
            return Err(CliError::Usage(format!("--nu must be positive, got {}", self.nu)));
        }
        if !positive(self.mu) {
            return Err(CliError::Usage(format!("--mu must be positive, got {}", self.mu)));
        }
        if !(self.c_stab >= 0.0 && self.c_stab.is_finite()) {
            return Err(CliError::Usage(format!("--cstab must be nonnegative, got {}", self.c_stab)));
        }
        if !positive(self.final_time) {
            return Err(CliError::Usage(format!("--tf must be positive, got {}", self.final_time)));
        }
        if self.meshes.is_empty() {
            return Err(CliError::Usage("--meshes or --mesh-files must name at least one mesh".into()));
        }
        if let MeshSequence::Structured(ns) = &self.meshes {
            if ns.contains(&0) {
                return Err(CliError::Usage("--meshes entries must be positive".into()));
            }
        }
        Ok(())
    }

    /// Solver settings for one mesh of the study.
    pub fn solver_config(&self) -> SolverConfig {
        let mut config = SolverConfig::new(self.k, self.nu, self.mu);
        config.final_time = self.final_time;
        config.c_stab = if self.upwind { self.c_stab } else { 0.0 };
        config.linear_solver = if self.condense { LinearSolver::Condensed } else { LinearSolver::Direct };
        config
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Parser)]
#[command(name = "mhd-hho", version, about = "Convergence studies for the HHO discretization of unsteady MHD")]
struct Args {
    /// Polynomial degree.
    #[arg(long, allow_negative_numbers = true)]
    k: Option<i64>,
    /// Kinematic viscosity.
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    /// Magnetic diffusivity.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Upwind stabilization constant.
    #[arg(long, allow_negative_numbers = true)]
    cstab: Option<f64>,
    /// Structured mesh resolutions, e.g. 4,8,16.
    #[arg(long, value_delimiter = ',', conflicts_with = "mesh_files")]
    meshes: Option<Vec<usize>>,
    /// Mesh files, comma separated.
    #[arg(long, value_delimiter = ',')]
    mesh_files: Option<Vec<PathBuf>>,
    /// Final time.
    #[arg(long, allow_negative_numbers = true)]
    tf: Option<f64>,
    /// CSV output file (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Static condensation of element unknowns.
    #[arg(long, value_enum)]
    condense: Option<Switch>,
    /// Disables upwinding (C_stab = 0).
    #[arg(long)]
    no_upwind: bool,
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    k: Option<i64>,
    nu: Option<f64>,
    mu: Option<f64>,
    cstab: Option<f64>,
    meshes: Option<Vec<usize>>,
    mesh_files: Option<Vec<PathBuf>>,
    tf: Option<f64>,
    out: Option<PathBuf>,
    condense: Option<bool>,
    no_upwind: Option<bool>,
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))
}

/// Parses command-line arguments (including the program name).
pub fn parse_config<I, T>(argv: I) -> Result<StudyConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    let file = match &args.config {
        Some(path) => read_file_config(path)?,
        None => FileConfig::default(),
    };

    let k = args.k.or(file.k).ok_or_else(|| CliError::Usage("missing --k".into()))?;
    let k = usize::try_from(k).map_err(|_| CliError::Usage(format!("--k must be a nonnegative integer, got {k}")))?;
    let nu = args.nu.or(file.nu).ok_or_else(|| CliError::Usage("missing --nu".into()))?;
    let mu = args.mu.or(file.mu).ok_or_else(|| CliError::Usage("missing --mu".into()))?;
    let meshes = match (args.meshes, args.mesh_files, file.meshes, file.mesh_files) {
        (Some(ns), _, _, _) => MeshSequence::Structured(ns),
        (None, Some(paths), _, _) => MeshSequence::Files(paths),
        (None, None, Some(_), Some(_)) => {
            return Err(CliError::Usage("config file sets both meshes and mesh-files".into()))
        }
        (None, None, Some(ns), None) => MeshSequence::Structured(ns),
        (None, None, None, Some(paths)) => MeshSequence::Files(paths),
        (None, None, None, None) => return Err(CliError::Usage("missing --meshes or --mesh-files".into())),
    };

    let mut config = StudyConfig::new(k, nu, mu, meshes);
    if let Some(c) = args.cstab.or(file.cstab) {
        config.c_stab = c;
    }
    if let Some(tf) = args.tf.or(file.tf) {
        config.final_time = tf;
    }
    config.output = args.out.or(file.out);
    config.condense = match args.condense {
        Some(s) => s == Switch::On,
        None => file.condense.unwrap_or(true),
    };
    config.upwind = !(args.no_upwind || file.no_upwind.unwrap_or(false));
    config.validate()?;
    Ok(config)
}

/// One mesh of a completed study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub mesh: String,
    pub report: ErrorReport,
    /// Rate between the previous mesh and this one.
    pub rate: Option<f64>,
}

impl StudyRow {
    pub fn csv_line(&self) -> String {
        let rate = self.rate.map(|r| format!("{r:.11e}")).unwrap_or_default();
        format!("{:.11e},{:.11e},{rate}", self.report.h, self.report.energy)
    }
}

/// Runs the manufactured problem on every mesh in order and writes the CSV
/// table to `sink` row by row, flushing after each row so that a failure
/// leaves the completed rows in place.
pub fn run_convergence_study(config: &StudyConfig, sink: &mut dyn Write) -> Result<Vec<StudyRow>, CliError> {
    config.validate()?;
    let solver = config.solver_config();
    writeln!(sink, "{CSV_HEADER}")?;
    sink.flush()?;
    let mut rows: Vec<StudyRow> = Vec::with_capacity(config.meshes.len());
    for i in 0..config.meshes.len() {
        let label = config.meshes.label(i);
        let fail = |source| CliError::Solver { mesh: label.clone(), source };
        let mesh = config.meshes.build(i).map_err(fail)?;
        let (_, report) = solve_manufactured(&mesh, &solver).map_err(fail)?;
        let rate = match rows.last() {
            Some(prev) => Some(
                compute_eoc(&[prev.report.energy, report.energy], &[prev.report.h, report.h]).map_err(fail)?[0],
            ),
            None => None,
        };
        let row = StudyRow { mesh: label, report, rate };
        writeln!(sink, "{}", row.csv_line())?;
        sink.flush()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = parse_config(argv).and_then(|config| {
        let rows = match &config.output {
            Some(path) => {
                let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
                run_convergence_study(&config, &mut file)?
            }
            None => run_convergence_study(&config, &mut std::io::stdout().lock())?,
        };
        for row in &rows {
            eprintln!(
                "{}: h = {:.4e}, error = {:.4e}, {} unknowns, {:.1} s",
                row.mesh, row.report.h, row.report.energy, row.report.dofs, row.report.wall_time
            );
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(CliError::Help(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
