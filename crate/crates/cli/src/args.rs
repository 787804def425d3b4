//! Command-line grammar and the value types shared with the config file.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use kitaev_core::model::LineKind;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "kitaev",
    version,
    about = "Fidelity susceptibility and bond correlations of the Kitaev honeycomb model"
)]
pub struct Cli {
    /// Output directory (default: $KITAEV_OUTPUT_DIR, then the config file, then ./kitaev-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for momentum sums. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// TOML file whose keys are long flag names; flags win over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// χ_F and gap along a line for one or more sizes.
    Sweep(SweepArgs),
    /// Bond-bond correlation profile and decay fit.
    Correlate(CorrelateArgs),
    /// Finite-size scaling: μ from peak heights, ν from the data collapse.
    Scale(ScaleArgs),
    /// Phase and gap over a barycentric grid of the coupling triangle.
    PhaseDiagram(PhaseDiagramArgs),
    /// Ground-state fidelity between two coupling points.
    Fidelity(FidelityArgs),
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    /// jx-eq-jy or jz-third.
    #[arg(long)]
    pub line: Option<LineKind>,
    /// λ window and number of samples, `lo:hi:steps`.
    #[arg(long)]
    pub lz: Option<RangeSpec>,
    /// Odd linear sizes, comma separated.
    #[arg(long)]
    pub sizes: Option<SizeList>,
}

#[derive(Args, Debug, Default)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub line: Option<LineKind>,
    /// Jz on the jx-eq-jy line.
    #[arg(long)]
    pub jz: Option<f64>,
    /// Line parameter λ.
    #[arg(long, conflicts_with = "jz")]
    pub lambda: Option<f64>,
    /// Explicit `jx,jy,jz` instead of a line point.
    #[arg(long, conflicts_with_all = ["jz", "lambda", "line"])]
    pub couplings: Option<Triple>,
    /// Linear size (odd).
    #[arg(short = 'L', long = "size")]
    pub size: Option<usize>,
    #[arg(long)]
    pub fit: Option<FitKind>,
    /// Fit window in cells, `r_min:r_max`.
    #[arg(long)]
    pub window: Option<Interval>,
    /// Also write C(dx, dy) for every displacement.
    #[arg(long)]
    pub full: bool,
}

#[derive(Args, Debug, Default)]
pub struct ScaleArgs {
    #[arg(long)]
    pub line: Option<LineKind>,
    #[arg(long)]
    pub lz: Option<RangeSpec>,
    #[arg(long)]
    pub sizes: Option<SizeList>,
    /// ν search range, `lo:hi`.
    #[arg(long)]
    pub nu_range: Option<Interval>,
    /// Collapse window half-width in the scaling variable.
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub scan_points: Option<usize>,
    /// Sweep CSVs to analyse instead of computing sweeps, comma separated.
    #[arg(long)]
    pub inputs: Option<PathList>,
}

#[derive(Args, Debug, Default)]
pub struct PhaseDiagramArgs {
    /// Subdivisions of each edge of the triangle.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Linear size used for the gap column.
    #[arg(short = 'L', long = "size")]
    pub size: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct FidelityArgs {
    /// First point, `jx,jy,jz`.
    #[arg(long)]
    pub a: Option<Triple>,
    /// Second point, `jx,jy,jz`.
    #[arg(long)]
    pub b: Option<Triple>,
    #[arg(short = 'L', long = "size")]
    pub size: Option<usize>,
}

/// `lo:hi:steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RangeSpec {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl FromStr for RangeSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts[..] else {
            bail!("expected lo:hi:steps, got `{s}`");
        };
        let r = RangeSpec {
            lo: lo
                .trim()
                .parse()
                .with_context(|| format!("bad lower bound `{lo}`"))?,
            hi: hi
                .trim()
                .parse()
                .with_context(|| format!("bad upper bound `{hi}`"))?,
            steps: steps
                .trim()
                .parse()
                .with_context(|| format!("bad step count `{steps}`"))?,
        };
        if r.lo.is_nan() || r.hi.is_nan() || r.lo >= r.hi {
            bail!("need lo < hi, got {}:{}", r.lo, r.hi);
        }
        if r.steps < 2 {
            bail!("need at least 2 steps, got {}", r.steps);
        }
        Ok(r)
    }
}

/// `lo:hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Interval {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| anyhow!("expected lo:hi, got `{s}`"))?;
        let r = Interval {
            lo: lo
                .trim()
                .parse()
                .with_context(|| format!("bad lower bound `{lo}`"))?,
            hi: hi
                .trim()
                .parse()
                .with_context(|| format!("bad upper bound `{hi}`"))?,
        };
        if r.lo.is_nan() || r.hi.is_nan() || r.lo >= r.hi {
            bail!("need lo < hi, got {}:{}", r.lo, r.hi);
        }
        Ok(r)
    }
}

/// Comma-separated odd sizes.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SizeList(pub Vec<usize>);

impl FromStr for SizeList {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let sizes = s
            .split(',')
            .map(|t| {
                let l: usize = t
                    .trim()
                    .parse()
                    .with_context(|| format!("bad size `{t}`"))?;
                check_size(l)?;
                Ok(l)
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        if sizes.is_empty() {
            bail!("no sizes given");
        }
        Ok(SizeList(sizes))
    }
}

pub fn check_size(l: usize) -> anyhow::Result<()> {
    if l == 0 || l.is_multiple_of(2) {
        bail!("L must be odd and positive, got {l}");
    }
    Ok(())
}

/// `jx,jy,jz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Triple(pub [f64; 3]);

impl FromStr for Triple {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let v = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad coupling `{t}`"))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let [a, b, c] = v[..] else {
            bail!("expected jx,jy,jz, got `{s}`");
        };
        Ok(Triple([a, b, c]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PathList(pub Vec<PathBuf>);

impl FromStr for PathList {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let v: Vec<PathBuf> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(PathBuf::from)
            .collect();
        if v.is_empty() {
            bail!("no input files given");
        }
        Ok(PathList(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    Exp,
    Power,
    None,
}

impl FromStr for FitKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "exp" => Ok(FitKind::Exp),
            "power" => Ok(FitKind::Power),
            "none" => Ok(FitKind::None),
            _ => bail!("expected exp, power or none, got `{s}`"),
        }
    }
}

impl fmt::Display for FitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitKind::Exp => "exp",
            FitKind::Power => "power",
            FitKind::None => "none",
        })
    }
}
