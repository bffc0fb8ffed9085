//! Command-line flags, the TOML config file, and how the two combine.
//!
//! Every subcommand option is optional at the flag level so that a value can
//! come from the flag, the matching `[subcommand]` table of `--config`, or a
//! built-in default, in that order.

use crate::error::CliError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use orbit_entangle::amplitudes::{Axis, Spacing};
use orbit_entangle::oracle::Regulator;
use orbit_entangle::params::{OrbitPoint, PhysicalParams};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Parser)]
#[command(
    name = "orbit-entangle",
    version,
    about = "Entanglement amplitudes and decoherence of orbiting detector pairs"
)]
pub struct Cli {
    /// TOML file with a `[subcommand]` table per command; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Artifacts to write.
    #[arg(long, global = true, value_delimiter = ',')]
    pub emit: Option<Vec<Emit>>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pole table for the A or X contour integrals.
    Poles(PolesArgs),
    /// A, X and the entanglement margin at one configuration.
    Amplitudes(AmplitudesArgs),
    /// Scan |X| > A over an (r, y, alpha) grid.
    Region(RegionArgs),
    /// Density-matrix and concurrence traces for a Bell pair.
    Dynamics(DynamicsArgs),
    /// Concurrence over (a/Omega, rescaled time).
    ConcurrenceSurface(SurfaceArgs),
    /// Sudden-death time in units of T2 against a/Omega.
    EsdCurve(EsdArgs),
    /// Check closed forms and oracle against a reference corpus.
    Verify(VerifyArgs),
    /// Recompute the reference corpus with the quadrature oracle.
    CorpusRebuild(RebuildArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Poles(_) => "poles",
            Command::Amplitudes(_) => "amplitudes",
            Command::Region(_) => "region",
            Command::Dynamics(_) => "dynamics",
            Command::ConcurrenceSurface(_) => "concurrence-surface",
            Command::EsdCurve(_) => "esd-curve",
            Command::Verify(_) => "verify",
            Command::CorpusRebuild(_) => "corpus-rebuild",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum PoleKindArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "X", alias = "x")]
    X,
}

/// `lo:hi:n` or `lo:hi:n:log`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AxisSpec(pub Axis);

impl FromStr for AxisSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("axis {s:?} is not lo:hi:n[:log]");
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        match parts.get(3).map(|p| p.trim()) {
            None | Some("lin") => Ok(AxisSpec(Axis::linear(lo, hi, n))),
            Some("log") => Ok(AxisSpec(Axis::log(lo, hi, n))),
            Some(_) => Err(bad()),
        }
    }
}

impl TryFrom<String> for AxisSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<AxisSpec> for String {
    fn from(a: AxisSpec) -> String {
        a.to_string()
    }
}

impl fmt::Display for AxisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0;
        write!(f, "{}:{}:{}", a.lo, a.hi, a.n)?;
        if a.spacing == Spacing::Log {
            f.write_str(":log")?;
        }
        Ok(())
    }
}

/// Fill every `None` in `self` from `file`.
pub trait Overlay {
    fn overlay(self, file: Self) -> Self;
}

macro_rules! overlay {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl Overlay for $ty {
            fn overlay(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field)),* }
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PolesArgs {
    /// Orbital speed, in (0, 1).
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub kind: Option<PoleKindArg>,
    /// Roots per branch.
    #[arg(long)]
    pub kmax: Option<usize>,
}
overlay!(PolesArgs { beta, kind, kmax });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct AmplitudesArgs {
    /// R / xi
    #[arg(long)]
    pub r: Option<f64>,
    /// Omega xi
    #[arg(long)]
    pub y: Option<f64>,
    /// a xi
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Energy gap Omega (with --eta0 --xi --radius --accel instead of r, y, alpha).
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub eta0: Option<f64>,
    /// Switching width xi.
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Proper acceleration a.
    #[arg(long)]
    pub accel: Option<f64>,
    #[arg(long)]
    pub kmax: Option<usize>,
}
overlay!(AmplitudesArgs {
    r,
    y,
    alpha,
    omega,
    eta0,
    xi,
    radius,
    accel,
    kmax
});

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RegionArgs {
    /// r axis as lo:hi:n[:log]
    #[arg(long)]
    pub r: Option<AxisSpec>,
    #[arg(long)]
    pub y: Option<AxisSpec>,
    /// alpha axis; a linear axis may start at 0
    #[arg(long)]
    pub alpha: Option<AxisSpec>,
    #[arg(long)]
    pub kmax: Option<usize>,
}
overlay!(RegionArgs { r, y, alpha, kmax });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DynamicsArgs {
    /// Orbit point (with --y --alpha); sets Omega = y, a = alpha in units of 1/xi.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub accel: Option<f64>,
    /// Lorentz factor; give this or --radius.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Coupling, default 0.1.
    #[arg(long)]
    pub eta0: Option<f64>,
    /// End of the trace in rescaled time t' = eta0^2 Omega t / gamma; default 3 T2.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of intervals, default 400.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Also integrate the master equation and report the largest deviation.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub lindblad: Option<bool>,
}
overlay!(DynamicsArgs {
    r,
    y,
    alpha,
    omega,
    accel,
    gamma,
    radius,
    eta0,
    t_max,
    steps,
    lindblad
});

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SurfaceArgs {
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub eta0: Option<f64>,
    /// Orbit radius; gamma^2 = 1 + radius a.
    #[arg(long)]
    pub radius: Option<f64>,
    /// a/Omega axis.
    #[arg(long)]
    pub ratio: Option<AxisSpec>,
    /// Rescaled-time axis.
    #[arg(long)]
    pub t: Option<AxisSpec>,
}
overlay!(SurfaceArgs {
    omega,
    eta0,
    radius,
    ratio,
    t
});

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EsdArgs {
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub eta0: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub ratio: Option<AxisSpec>,
}
overlay!(EsdArgs {
    omega,
    eta0,
    radius,
    ratio
});

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RegulatorArgs {
    /// Comma-separated, strictly decreasing regulator values.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<f64>>,
    /// Gaussian window cut-off in units of the window width.
    #[arg(long)]
    pub truncation: Option<f64>,
    #[arg(long)]
    pub node_budget: Option<usize>,
}
overlay!(RegulatorArgs {
    ladder,
    truncation,
    node_budget
});

impl RegulatorArgs {
    pub fn regulator(&self) -> Result<Regulator, CliError> {
        let d = Regulator::default();
        Ok(Regulator::new(
            self.ladder.clone().unwrap_or(d.epsilon_ladder),
            self.truncation.unwrap_or(d.truncation),
            self.node_budget.unwrap_or(d.node_budget),
        )?)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// Corpus file; the built-in corpus when omitted.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Pole-sum truncation for the closed forms, default 200.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[command(flatten)]
    #[serde(default)]
    pub regulator: RegulatorArgs,
}

impl Overlay for VerifyArgs {
    fn overlay(self, file: Self) -> Self {
        VerifyArgs {
            corpus: self.corpus.or(file.corpus),
            kmax: self.kmax.or(file.kmax),
            regulator: self.regulator.overlay(file.regulator),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RebuildArgs {
    /// Destination, default <out>/oracle_corpus.txt.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(default)]
    pub regulator: RegulatorArgs,
}

impl Overlay for RebuildArgs {
    fn overlay(self, file: Self) -> Self {
        RebuildArgs {
            output: self.output.or(file.output),
            regulator: self.regulator.overlay(file.regulator),
        }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub emit: Option<Vec<Emit>>,
    pub poles: Option<PolesArgs>,
    pub amplitudes: Option<AmplitudesArgs>,
    pub region: Option<RegionArgs>,
    pub dynamics: Option<DynamicsArgs>,
    pub concurrence_surface: Option<SurfaceArgs>,
    pub esd_curve: Option<EsdArgs>,
    pub verify: Option<VerifyArgs>,
    pub corpus_rebuild: Option<RebuildArgs>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Where and what to write.
#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub emit: Vec<Emit>,
}

impl OutputSpec {
    pub fn wants(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }
}

/// Fully merged configuration for one run.
#[derive(Debug)]
pub struct RunConfig {
    pub output: OutputSpec,
    pub command: Command,
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let command = match cli.command {
            Command::Poles(a) => Command::Poles(a.overlay(file.poles.unwrap_or_default())),
            Command::Amplitudes(a) => Command::Amplitudes(a.overlay(file.amplitudes.unwrap_or_default())),
            Command::Region(a) => Command::Region(a.overlay(file.region.unwrap_or_default())),
            Command::Dynamics(a) => Command::Dynamics(a.overlay(file.dynamics.unwrap_or_default())),
            Command::ConcurrenceSurface(a) => {
                Command::ConcurrenceSurface(a.overlay(file.concurrence_surface.unwrap_or_default()))
            }
            Command::EsdCurve(a) => Command::EsdCurve(a.overlay(file.esd_curve.unwrap_or_default())),
            Command::Verify(a) => Command::Verify(a.overlay(file.verify.unwrap_or_default())),
            Command::CorpusRebuild(a) => Command::CorpusRebuild(a.overlay(file.corpus_rebuild.unwrap_or_default())),
        };
        let mut emit = cli
            .emit
            .or(file.emit)
            .unwrap_or_else(|| vec![Emit::Csv, Emit::Json, Emit::Svg]);
        emit.sort_by_key(|e| *e as u8);
        emit.dedup();
        Ok(RunConfig {
            output: OutputSpec {
                dir: cli.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
                emit,
            },
            command,
        })
    }
}

/// Which parameter block was supplied.
#[derive(Debug, Clone, Copy)]
pub enum ParamBlock {
    Orbit(OrbitPoint),
    Physical(PhysicalParams),
}

fn require(name: &str, v: Option<f64>) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{name}")))
}

fn exclusive(block_a: &[(&str, bool)], block_b: &[(&str, bool)]) -> Result<bool, CliError> {
    let a = block_a.iter().any(|(_, s)| *s);
    let b = block_b.iter().any(|(_, s)| *s);
    let names = |blk: &[(&str, bool)]| blk.iter().map(|(n, _)| format!("--{n}")).collect::<Vec<_>>().join(" ");
    match (a, b) {
        (true, true) | (false, false) => Err(CliError::Usage(format!(
            "give exactly one parameter block: {{{}}} or {{{}}}",
            names(block_a),
            names(block_b)
        ))),
        (a, _) => Ok(a),
    }
}

impl AmplitudesArgs {
    pub fn params(&self) -> Result<ParamBlock, CliError> {
        let orbit = exclusive(
            &[
                ("r", self.r.is_some()),
                ("y", self.y.is_some()),
                ("alpha", self.alpha.is_some()),
            ],
            &[
                ("omega", self.omega.is_some()),
                ("eta0", self.eta0.is_some()),
                ("xi", self.xi.is_some()),
                ("radius", self.radius.is_some()),
                ("accel", self.accel.is_some()),
            ],
        )?;
        if orbit {
            Ok(ParamBlock::Orbit(OrbitPoint::new(
                require("r", self.r)?,
                require("y", self.y)?,
                require("alpha", self.alpha)?,
            )?))
        } else {
            Ok(ParamBlock::Physical(PhysicalParams::new(
                require("omega", self.omega)?,
                require("eta0", self.eta0)?,
                require("xi", self.xi)?,
                require("radius", self.radius)?,
                require("accel", self.accel)?,
            )?))
        }
    }
}

/// Physical inputs of a relaxation profile.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DynamicsInputs {
    pub omega: f64,
    pub accel: f64,
    pub eta0: f64,
    pub gamma: f64,
}

impl DynamicsArgs {
    pub fn inputs(&self) -> Result<DynamicsInputs, CliError> {
        let eta0 = self.eta0.unwrap_or(0.1);
        let orbit = exclusive(
            &[
                ("r", self.r.is_some()),
                ("y", self.y.is_some()),
                ("alpha", self.alpha.is_some()),
            ],
            &[
                ("omega", self.omega.is_some()),
                ("accel", self.accel.is_some()),
                ("gamma", self.gamma.is_some()),
                ("radius", self.radius.is_some()),
            ],
        )?;
        if orbit {
            let pt = OrbitPoint::new(
                require("r", self.r)?,
                require("y", self.y)?,
                require("alpha", self.alpha)?,
            )?;
            return Ok(DynamicsInputs {
                omega: pt.y(),
                accel: pt.alpha(),
                eta0,
                gamma: pt.gamma(),
            });
        }
        let omega = require("omega", self.omega)?;
        let accel = require("accel", self.accel)?;
        let gamma = match (self.gamma, self.radius) {
            (Some(g), None) => g,
            (None, Some(radius)) => {
                if !(radius.is_finite() && radius >= 0.0) {
                    return Err(CliError::Usage("--radius must be finite and >= 0".into()));
                }
                (1.0 + radius * accel).sqrt()
            }
            _ => return Err(CliError::Usage("give exactly one of --gamma or --radius".into())),
        };
        Ok(DynamicsInputs {
            omega,
            accel,
            eta0,
            gamma,
        })
    }
}
