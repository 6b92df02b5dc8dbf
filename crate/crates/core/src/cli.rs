//! Command-line front end.
//!
//! Parameters come from an optional flat `key = value` file (`--config`) and
//! from `--key value` flags; flags win. Every value is range-checked and
//! reported as a [`UsageError`] naming the key.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::{ContextKind, ErrorKind};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::assembly::{AssemblyOptions, Discretization};
use crate::benchmarks::{
    bandgap_scan, case_cdp_on, case_cylinder, case_periodic_inclusions, case_sphere_on, extract_bandgaps,
    linspace, BandgapSet, CaseResult, CylinderCase, PhononicConfig, PhononicStrip, Spectrum, TransmissionFormula,
    BANDGAP_THRESHOLD_DB,
};
use crate::geometry::{sample_implicit, sample_sphere, ConstantDistanceProduct, ImplicitSampling, SurfaceCloud};
use crate::io;
use crate::stencil::DEFAULT_STENCIL_SIZE;
use crate::GfdmError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MANIFOLD_GFDM_THREADS";

pub const COMMANDS: [&str; 5] = ["run-case", "sweep-frequency", "bandgap-scan", "curvature-sweep", "dump-cloud"];
pub const CASES: [&str; 5] = ["sphere", "cdp", "cylinder", "cylinder-holes", "periodic-inclusions"];

const KEYS: [&str; 19] = [
    "case",
    "n",
    "dh",
    "m",
    "omega",
    "f-norm",
    "ff",
    "ka",
    "f-min",
    "f-max",
    "steps",
    "ff-min",
    "ff-max",
    "ff-steps",
    "c",
    "out",
    "literal-transmission-formula",
    "row-equilibration",
    "stencil-dump",
];

const N_RANGE: (usize, usize) = (100, 200_000);
const M_RANGE: (usize, usize) = (10, 100);
const DH_RANGE: (f64, f64) = (0.005, 0.5);
const OMEGA_RANGE: (f64, f64) = (1.0, 1e6);
const F_NORM_RANGE: (f64, f64) = (0.01, 5.0);
const FF_RANGE: (f64, f64) = (0.0, 0.75);
const KA_RANGE: (f64, f64) = (0.0, 0.39);
const STEPS_RANGE: (usize, usize) = (1, 10_000);
const FF_STEPS_RANGE: (usize, usize) = (1, 200);
const C_RANGE: (f64, f64) = (1e-12, 1e3);

/// A rejected argument or configuration value.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{key}: {message}")]
pub struct UsageError {
    pub key: String,
    pub message: String,
    /// Set when the "error" is a requested help or version text.
    pub informational: bool,
}

impl UsageError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
            informational: false,
        }
    }

    fn range<T: std::fmt::Display>(key: &str, value: &str, lo: T, hi: T) -> Self {
        Self::new(key, format!("value `{value}` is outside the accepted range [{lo}, {hi}]"))
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(#[from] UsageError),
    #[error(transparent)]
    Run(#[from] GfdmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    RunCase,
    SweepFrequency,
    BandgapScan,
    CurvatureSweep,
    DumpCloud,
}

impl Command {
    pub fn name(self) -> &'static str {
        COMMANDS[self as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    Sphere,
    Cdp,
    Cylinder,
    CylinderHoles,
    PeriodicInclusions,
}

impl CaseId {
    pub fn name(self) -> &'static str {
        CASES[self as usize]
    }

    fn parse(s: &str) -> Result<Self, UsageError> {
        const ALL: [CaseId; 5] = [
            CaseId::Sphere,
            CaseId::Cdp,
            CaseId::Cylinder,
            CaseId::CylinderHoles,
            CaseId::PeriodicInclusions,
        ];
        ALL.into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| UsageError::new("case", format!("unknown case `{s}`; accepted cases: {}", CASES.join(", "))))
    }
}

/// A fully resolved and range-checked invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub case: CaseId,
    /// Node count for the closed-surface cases.
    pub n: usize,
    /// Node spacing for the patch and strip cases.
    pub dh: f64,
    pub m: usize,
    pub omega: f64,
    pub f_norm: f64,
    pub filling_fraction: f64,
    pub curvatures: Vec<f64>,
    pub f_range: (f64, f64),
    pub steps: usize,
    pub ff_range: (f64, f64),
    pub ff_steps: usize,
    pub dirichlet_value: f64,
    pub out_dir: PathBuf,
    pub literal_transmission: bool,
    pub row_equilibration: bool,
    pub stencil_dump: bool,
}

impl RunConfig {
    /// The resolved configuration in config-file syntax.
    pub fn to_config_text(&self) -> String {
        let ka: Vec<String> = self.curvatures.iter().map(|k| io::fmt_f64(*k)).collect();
        let mut out = String::new();
        let _ = writeln!(out, "# command: {}", self.command.name());
        let pairs: [(&str, String); 19] = [
            ("case", self.case.name().to_string()),
            ("n", self.n.to_string()),
            ("dh", io::fmt_f64(self.dh)),
            ("m", self.m.to_string()),
            ("omega", io::fmt_f64(self.omega)),
            ("f-norm", io::fmt_f64(self.f_norm)),
            ("ff", io::fmt_f64(self.filling_fraction)),
            ("ka", ka.join(",")),
            ("f-min", io::fmt_f64(self.f_range.0)),
            ("f-max", io::fmt_f64(self.f_range.1)),
            ("steps", self.steps.to_string()),
            ("ff-min", io::fmt_f64(self.ff_range.0)),
            ("ff-max", io::fmt_f64(self.ff_range.1)),
            ("ff-steps", self.ff_steps.to_string()),
            ("c", io::fmt_f64(self.dirichlet_value)),
            ("out", self.out_dir.display().to_string()),
            ("literal-transmission-formula", self.literal_transmission.to_string()),
            ("row-equilibration", self.row_equilibration.to_string()),
            ("stencil-dump", self.stencil_dump.to_string()),
        ];
        for (k, v) in pairs {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    fn phononic(&self, curvature: f64) -> PhononicConfig {
        PhononicConfig {
            filling_fraction: self.filling_fraction,
            curvature,
            spacing: self.dh,
            m: self.m,
            dirichlet_value: self.dirichlet_value,
            formula: if self.literal_transmission {
                TransmissionFormula::Literal
            } else {
                TransmissionFormula::Ratio
            },
            row_equilibration: self.row_equilibration,
            ..PhononicConfig::default()
        }
    }

    fn assembly_options(&self) -> AssemblyOptions {
        AssemblyOptions {
            row_equilibration: self.row_equilibration,
            ..Default::default()
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "manifold-gfdm", version, about = "Meshless solver for the surface Helmholtz equation")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Solve one case and write its field
    RunCase(CaseArgs),
    /// Transmission spectrum of the periodic strip
    SweepFrequency(CaseArgs),
    /// Bandgaps over a range of filling fractions
    BandgapScan(CaseArgs),
    /// Spectra for a list of curvatures
    CurvatureSweep(CaseArgs),
    /// Write the node cloud of a case
    DumpCloud(CaseArgs),
}

#[derive(Debug, Args)]
struct CaseArgs {
    /// One of: sphere, cdp, cylinder, cylinder-holes, periodic-inclusions
    case: Option<String>,
    /// Flat `key = value` file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Node count (sphere, cdp)
    #[arg(long)]
    n: Option<String>,
    /// Node spacing (cylinder, cylinder-holes, periodic-inclusions)
    #[arg(long)]
    dh: Option<String>,
    /// Stencil size
    #[arg(long)]
    m: Option<String>,
    /// Angular frequency in rad/s
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<String>,
    /// Normalized frequency for a single strip solve
    #[arg(long = "f-norm", allow_negative_numbers = true)]
    f_norm: Option<String>,
    /// Inclusion filling fraction
    #[arg(long, allow_negative_numbers = true)]
    ff: Option<String>,
    /// Strip curvature; a comma-separated list for curvature-sweep
    #[arg(long, allow_negative_numbers = true)]
    ka: Option<String>,
    #[arg(long = "f-min", allow_negative_numbers = true)]
    f_min: Option<String>,
    #[arg(long = "f-max", allow_negative_numbers = true)]
    f_max: Option<String>,
    /// Frequency points per sweep
    #[arg(long)]
    steps: Option<String>,
    #[arg(long = "ff-min", allow_negative_numbers = true)]
    ff_min: Option<String>,
    #[arg(long = "ff-max", allow_negative_numbers = true)]
    ff_max: Option<String>,
    #[arg(long = "ff-steps")]
    ff_steps: Option<String>,
    /// Value imposed on the excited edge
    #[arg(long, allow_negative_numbers = true)]
    c: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<String>,
    #[arg(long = "literal-transmission-formula")]
    literal_transmission_formula: bool,
    #[arg(long = "row-equilibration")]
    row_equilibration: bool,
    /// Also write stencil weights and the assembled system
    #[arg(long = "stencil-dump")]
    stencil_dump: bool,
}

impl CaseArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let values = [
            ("case", &self.case),
            ("n", &self.n),
            ("dh", &self.dh),
            ("m", &self.m),
            ("omega", &self.omega),
            ("f-norm", &self.f_norm),
            ("ff", &self.ff),
            ("ka", &self.ka),
            ("f-min", &self.f_min),
            ("f-max", &self.f_max),
            ("steps", &self.steps),
            ("ff-min", &self.ff_min),
            ("ff-max", &self.ff_max),
            ("ff-steps", &self.ff_steps),
            ("c", &self.c),
            ("out", &self.out),
        ];
        let mut out: Vec<(&'static str, String)> =
            values.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect();
        for (key, set) in [
            ("literal-transmission-formula", self.literal_transmission_formula),
            ("row-equilibration", self.row_equilibration),
            ("stencil-dump", self.stencil_dump),
        ] {
            if set {
                out.push((key, "true".into()));
            }
        }
        out
    }
}

/// Parses a flat `key = value` file. `#` starts a comment; `_` and `-` are interchangeable in keys.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| UsageError::new(format!("config line {}", ln + 1), "expected `key = value`"))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(UsageError::new(
                key,
                format!("unknown key; accepted keys: {}", KEYS.join(", ")),
            ));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn clap_error(e: clap::Error) -> UsageError {
    let informational = matches!(
        e.kind(),
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
    );
    let key = e
        .get(ContextKind::InvalidArg)
        .or_else(|| e.get(ContextKind::InvalidSubcommand))
        .map(|v| v.to_string())
        .unwrap_or_else(|| "command".into());
    let mut message = e.render().to_string();
    if matches!(e.kind(), ErrorKind::InvalidSubcommand | ErrorKind::MissingSubcommand) {
        message = format!("{}accepted commands: {}", message, COMMANDS.join(", "));
    }
    UsageError {
        key,
        message,
        informational,
    }
}

/// Builds a [`RunConfig`] from command-line arguments (without the program name).
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if args.is_empty() {
        return Err(UsageError::new(
            "command",
            format!("no command given; accepted commands: {}", COMMANDS.join(", ")),
        ));
    }
    let cli = Cli::try_parse_from(std::iter::once(OsString::from("manifold-gfdm")).chain(args)).map_err(clap_error)?;
    let (command, case_args) = match cli.command {
        CommandArgs::RunCase(a) => (Command::RunCase, a),
        CommandArgs::SweepFrequency(a) => (Command::SweepFrequency, a),
        CommandArgs::BandgapScan(a) => (Command::BandgapScan, a),
        CommandArgs::CurvatureSweep(a) => (Command::CurvatureSweep, a),
        CommandArgs::DumpCloud(a) => (Command::DumpCloud, a),
    };
    let mut values = match &case_args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| UsageError::new("config", format!("cannot read {}: {e}", path.display())))?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    for (k, v) in case_args.overrides() {
        values.insert(k.to_string(), v);
    }
    resolve(command, &values)
}

struct Values<'a>(&'a BTreeMap<String, String>);

impl Values<'_> {
    fn f64_in(&self, key: &str, default: f64, (lo, hi): (f64, f64)) -> Result<f64, UsageError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(s) => {
                let v: f64 = s
                    .parse()
                    .map_err(|_| UsageError::new(key, format!("`{s}` is not a number; accepted range [{lo}, {hi}]")))?;
                if v >= lo && v <= hi {
                    Ok(v)
                } else {
                    Err(UsageError::range(key, s, lo, hi))
                }
            }
        }
    }

    fn usize_in(&self, key: &str, default: usize, (lo, hi): (usize, usize)) -> Result<usize, UsageError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(s) => {
                let v: usize = s.parse().map_err(|_| {
                    UsageError::new(key, format!("`{s}` is not a whole number; accepted range [{lo}, {hi}]"))
                })?;
                if v >= lo && v <= hi {
                    Ok(v)
                } else {
                    Err(UsageError::range(key, s, lo, hi))
                }
            }
        }
    }

    fn flag(&self, key: &str) -> Result<bool, UsageError> {
        match self.0.get(key).map(String::as_str) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(s) => Err(UsageError::new(key, format!("`{s}` is not a boolean; accepted values: true, false"))),
        }
    }

    fn f64_list_in(&self, key: &str, default: &[f64], range: (f64, f64)) -> Result<Vec<f64>, UsageError> {
        match self.0.get(key) {
            None => Ok(default.to_vec()),
            Some(s) => s
                .split(',')
                .map(|item| {
                    let single = BTreeMap::from([(key.to_string(), item.trim().to_string())]);
                    Values(&single).f64_in(key, 0.0, range)
                })
                .collect(),
        }
    }
}

fn default_curvatures() -> Vec<f64> {
    (0..5).map(|i| i as f64 * PI / 64.0).collect()
}

fn resolve(command: Command, map: &BTreeMap<String, String>) -> Result<RunConfig, UsageError> {
    let v = Values(map);
    let case = match map.get("case") {
        Some(s) => CaseId::parse(s)?,
        None if command == Command::RunCase || command == Command::DumpCloud => {
            return Err(UsageError::new(
                "case",
                format!("{} needs a case; accepted cases: {}", command.name(), CASES.join(", ")),
            ))
        }
        None => CaseId::PeriodicInclusions,
    };
    let is_sweep = matches!(
        command,
        Command::SweepFrequency | Command::BandgapScan | Command::CurvatureSweep
    );
    if is_sweep && case != CaseId::PeriodicInclusions {
        return Err(UsageError::new(
            "case",
            format!("{} runs only the periodic-inclusions case", command.name()),
        ));
    }
    let default_n = if case == CaseId::Cdp { 4000 } else { 2500 };
    let default_dh = if case == CaseId::PeriodicInclusions { 0.05 } else { 0.061 };
    let default_omega = if case == CaseId::Sphere { 1000.0 } else { 10000.0 };
    let curvatures = if command == Command::CurvatureSweep {
        v.f64_list_in("ka", &default_curvatures(), KA_RANGE)?
    } else {
        vec![v.f64_in("ka", PI / 16.0, KA_RANGE)?]
    };
    let f_range = (v.f64_in("f-min", 0.05, F_NORM_RANGE)?, v.f64_in("f-max", 2.0, F_NORM_RANGE)?);
    let steps = v.usize_in("steps", 80, STEPS_RANGE)?;
    if f_range.0 > f_range.1 || (steps > 1 && f_range.0 == f_range.1) {
        return Err(UsageError::new(
            "f-max",
            format!("must exceed f-min = {} when steps > 1", f_range.0),
        ));
    }
    let ff_range = (v.f64_in("ff-min", 0.2, FF_RANGE)?, v.f64_in("ff-max", 0.75, FF_RANGE)?);
    let ff_steps = v.usize_in("ff-steps", 12, FF_STEPS_RANGE)?;
    if ff_range.0 > ff_range.1 || (ff_steps > 1 && ff_range.0 == ff_range.1) {
        return Err(UsageError::new(
            "ff-max",
            format!("must exceed ff-min = {} when ff-steps > 1", ff_range.0),
        ));
    }
    let stencil_dump = v.flag("stencil-dump")?;
    if stencil_dump && is_sweep {
        return Err(UsageError::new("stencil-dump", "applies only to run-case and dump-cloud"));
    }
    Ok(RunConfig {
        command,
        case,
        n: v.usize_in("n", default_n, N_RANGE)?,
        dh: v.f64_in("dh", default_dh, DH_RANGE)?,
        m: v.usize_in("m", DEFAULT_STENCIL_SIZE, M_RANGE)?,
        omega: v.f64_in("omega", default_omega, OMEGA_RANGE)?,
        f_norm: v.f64_in("f-norm", 0.5, F_NORM_RANGE)?,
        filling_fraction: v.f64_in("ff", 0.4, FF_RANGE)?,
        curvatures,
        f_range,
        steps,
        ff_range,
        ff_steps,
        dirichlet_value: v.f64_in("c", 1e-5, C_RANGE)?,
        out_dir: PathBuf::from(map.get("out").map(String::as_str).unwrap_or("out")),
        literal_transmission: v.flag("literal-transmission-formula")?,
        row_equilibration: v.flag("row-equilibration")?,
        stencil_dump,
    })
}

/// Reads the worker-thread cap from the environment.
pub fn thread_cap() -> Result<Option<usize>, UsageError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if (1..=1024).contains(&n) => Ok(Some(n)),
            _ => Err(UsageError::range(THREADS_ENV, &s, 1, 1024)),
        },
    }
}

/// Files produced by a run, each as (file name, contents).
struct Artifacts(Vec<(String, String)>);

impl Artifacts {
    fn add(&mut self, name: impl Into<String>, contents: String) {
        self.0.push((name.into(), contents));
    }

    fn write(self, dir: &Path) -> Result<(), GfdmError> {
        fs::create_dir_all(dir)?;
        for (name, contents) in self.0 {
            io::atomic_write(&dir.join(name), contents.as_bytes())?;
        }
        Ok(())
    }
}

fn node_generation(config: &RunConfig) -> String {
    match config.case {
        CaseId::Sphere => "# nodes: relaxed Fibonacci lattice (no random seed)\n".into(),
        CaseId::Cdp => format!(
            "# nodes: seeded level-set sampling, seed = {:#x}\n",
            ImplicitSampling::new(config.n).seed
        ),
        _ => "# nodes: structured grid (no random seed)\n".into(),
    }
}

fn build_cloud(config: &RunConfig) -> Result<SurfaceCloud, GfdmError> {
    match config.case {
        CaseId::Sphere => sample_sphere(config.n),
        CaseId::Cdp => sample_implicit(&ConstantDistanceProduct::default(), &ImplicitSampling::new(config.n)),
        CaseId::Cylinder | CaseId::CylinderHoles => cylinder_case(config).build_cloud(),
        CaseId::PeriodicInclusions => Ok(PhononicStrip::build(config.phononic(config.curvatures[0]))?.cloud),
    }
}

fn cylinder_case(config: &RunConfig) -> CylinderCase {
    CylinderCase {
        omega: config.omega,
        m: config.m,
        dirichlet_value: config.dirichlet_value,
        row_equilibration: config.row_equilibration,
        ..CylinderCase::new(config.dh, config.case == CaseId::CylinderHoles)
    }
}

fn run_case(config: &RunConfig) -> Result<CaseResult, GfdmError> {
    match config.case {
        CaseId::Sphere => case_sphere_on(sample_sphere(config.n)?, config.m, config.omega, config.assembly_options()),
        CaseId::Cdp => case_cdp_on(build_cloud(config)?, config.m, config.omega, config.assembly_options()),
        CaseId::Cylinder | CaseId::CylinderHoles => case_cylinder(&cylinder_case(config)),
        CaseId::PeriodicInclusions => case_periodic_inclusions(config.phononic(config.curvatures[0]), config.f_norm),
    }
}

fn g(v: f64) -> String {
    format!("{v:.6e}")
}

fn spectrum_label(i: usize) -> String {
    format!("spectrum_ka{i}.csv")
}

/// Executes a configuration, writes its artifacts and returns the one-line summary.
pub fn run(config: &RunConfig) -> Result<String, GfdmError> {
    let start = std::time::Instant::now();
    let mut files = Artifacts(Vec::new());
    files.add("run.cfg", format!("{}{}", config.to_config_text(), node_generation(config)));
    let head = format!("command={} case={}", config.command.name(), config.case.name());
    let summary = match config.command {
        Command::RunCase => {
            let r = run_case(config)?;
            files.add("field.csv", io::field_to_csv(&r.cloud, &r.field));
            files.add("field.vtk", io::field_to_vtk(&r.cloud, &r.field));
            if !r.probes.is_empty() {
                files.add("probes.csv", io::probes_to_csv(&r.probes));
            }
            if config.stencil_dump {
                let disc = Discretization::new(&r.cloud, r.m)?;
                files.add("stencils.csv", io::stencils_to_csv(&disc.stencils));
                files.add("system.mtx", io::matrix_market(&r.system)?);
                files.add("rhs.mtx", io::rhs_matrix_market(&r.system));
            }
            let mut s = format!("{head} N={} m={} omega={}", r.n, r.m, g(r.omega));
            if let Some(e) = r.global_error {
                let _ = write!(s, " global_error={}", g(e));
            }
            if let Some(t) = r.transmission_db {
                let _ = write!(s, " f_norm={} T_db={}", g(config.f_norm), g(t));
            }
            let _ = write!(s, " backward_error={}", g(r.report.backward_error));
            s
        }
        Command::DumpCloud => {
            let cloud = build_cloud(config)?;
            files.add("cloud.csv", io::cloud_to_csv(&cloud));
            if config.stencil_dump {
                let disc = Discretization::new(&cloud, config.m)?;
                files.add("stencils.csv", io::stencils_to_csv(&disc.stencils));
            }
            format!("{head} N={} m={}", cloud.len(), config.m)
        }
        Command::SweepFrequency => {
            let strip = PhononicStrip::build(config.phononic(config.curvatures[0]))?;
            let spectrum = strip.sweep(&linspace(config.f_range.0, config.f_range.1, config.steps))?;
            let gaps = extract_bandgaps(&spectrum, BANDGAP_THRESHOLD_DB);
            files.add("spectrum.csv", io::spectrum_to_csv(&spectrum));
            files.add("bandgaps.csv", io::bandgaps_to_csv(std::slice::from_ref(&gaps)));
            format!(
                "{head} N={} m={} points={} {} gaps={}",
                strip.cloud.len(),
                config.m,
                spectrum.points.len(),
                omega_span(config),
                gaps.intervals.len()
            )
        }
        Command::BandgapScan => {
            let sets: Vec<BandgapSet> = bandgap_scan(
                config.phononic(config.curvatures[0]),
                config.ff_range,
                config.ff_steps,
                config.f_range,
                config.steps,
            )?;
            files.add("bandgaps.csv", io::bandgaps_to_csv(&sets));
            let total: usize = sets.iter().map(|s| s.intervals.len()).sum();
            format!(
                "{head} m={} filling_fractions={} {} gaps={total}",
                config.m,
                sets.len(),
                omega_span(config)
            )
        }
        Command::CurvatureSweep => {
            let mut spectra: Vec<Spectrum> = Vec::new();
            for &ka in &config.curvatures {
                let strip = PhononicStrip::build(config.phononic(ka))?;
                spectra.push(strip.sweep(&linspace(config.f_range.0, config.f_range.1, config.steps))?);
            }
            let mut gaps = Vec::new();
            for (i, s) in spectra.iter().enumerate() {
                files.add(spectrum_label(i), io::spectrum_to_csv(s));
                gaps.push(extract_bandgaps(s, BANDGAP_THRESHOLD_DB));
            }
            let mut index = String::from("index,ka,gap_count\n");
            for (i, (s, gs)) in spectra.iter().zip(&gaps).enumerate() {
                let _ = writeln!(index, "{i},{},{}", io::fmt_f64(s.curvature), gs.intervals.len());
            }
            files.add("curvatures.csv", index);
            format!(
                "{head} m={} curvatures={} {}",
                config.m,
                spectra.len(),
                omega_span(config)
            )
        }
    };
    files.write(&config.out_dir)?;
    Ok(format!("{summary} runtime_s={:.3}", start.elapsed().as_secs_f64()))
}

fn omega_span(config: &RunConfig) -> String {
    let w = |f: f64| g(crate::benchmarks::omega_from_f_norm(f));
    format!("omega={}..{}", w(config.f_range.0), w(config.f_range.1))
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_config(args) {
        Ok(c) => c,
        Err(e) if e.informational => {
            print!("{}", e.message);
            return 0;
        }
        Err(e) => {
            eprintln!("{}", CliError::from(e));
            return 2;
        }
    };
    match thread_cap() {
        Ok(Some(n)) => configure_threads(n),
        Ok(None) => {}
        Err(e) => {
            eprintln!("{}", CliError::from(e));
            return 2;
        }
    }
    match run(&config) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(n: usize) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_: usize) {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = parse_config(["run-case", "sphere", "--n", "2500", "--omega", "1000"]).unwrap();
        assert_eq!(c.command, Command::RunCase);
        assert_eq!(c.case, CaseId::Sphere);
        assert_eq!((c.n, c.m, c.omega, c.dirichlet_value), (2500, 40, 1000.0, 1e-5));
    }

    #[test]
    fn empty_argv_lists_commands() {
        let e = parse_config(Vec::<String>::new()).unwrap_err();
        for c in COMMANDS {
            assert!(e.message.contains(c), "{}", e.message);
        }
    }

    #[test]
    fn stencil_size_range_is_enforced() {
        let e = parse_config(["run-case", "sphere", "--m", "5"]).unwrap_err();
        assert_eq!(e.key, "m");
        assert!(e.message.contains("[10, 100]"), "{}", e.message);
        assert!(parse_config(["run-case", "sphere", "--m", "100"]).is_ok());
    }

    #[test]
    fn file_values_are_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# case file\ncase = cdp\nm = 30\nomega=5000\nrow_equilibration = true\n").unwrap();
        let p = path.to_str().unwrap();
        let c = parse_config(["run-case", "--config", p, "--m", "50"]).unwrap();
        assert_eq!((c.case, c.m, c.omega, c.row_equilibration), (CaseId::Cdp, 50, 5000.0, true));
    }

    #[test]
    fn unknown_file_key_rejected() {
        let e = parse_config_text("stencil = 3\n").unwrap_err();
        assert_eq!(e.key, "stencil");
        assert!(parse_config_text("just words\n").is_err());
    }

    #[test]
    fn resolved_config_reparses_identically() {
        let c = parse_config(["curvature-sweep", "--ka", "0,0.1", "--steps", "7"]).unwrap();
        let map = parse_config_text(&c.to_config_text()).unwrap();
        assert_eq!(resolve(Command::CurvatureSweep, &map).unwrap(), c);
    }

    #[test]
    fn sweeps_need_the_strip_case() {
        assert_eq!(parse_config(["sweep-frequency", "sphere"]).unwrap_err().key, "case");
        assert_eq!(parse_config(["run-case"]).unwrap_err().key, "case");
        assert_eq!(parse_config(["run-case", "torus"]).unwrap_err().key, "case");
    }

    #[test]
    fn bad_numbers_name_their_key() {
        let e = parse_config(["run-case", "cylinder", "--dh", "abc"]).unwrap_err();
        assert_eq!(e.key, "dh");
        let e = parse_config(["sweep-frequency", "--f-min", "1.5", "--f-max", "1.0"]).unwrap_err();
        assert_eq!(e.key, "f-max");
        let e = parse_config(["run-case", "periodic-inclusions", "--ka", "-0.1"]).unwrap_err();
        assert_eq!(e.key, "ka");
    }

    #[test]
    fn help_is_informational() {
        assert!(parse_config(["--help"]).unwrap_err().informational);
        assert!(!parse_config(["frobnicate"]).unwrap_err().informational);
    }
}
