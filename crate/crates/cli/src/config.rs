//! Command-line flags and the validated run configuration built from them.

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lpfilter_core::spectral::DEFAULT_GRID_POINTS;
use lpfilter_core::{DeltaGrid, Family, KernelKind};

use crate::error::CliError;
use crate::io::NumberFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Weights,
    Gain,
    Table1,
    Smooth,
    Cv,
    FitDelta,
    Report,
}

/// End-of-sample filter family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyChoice {
    /// Direct asymmetric filter (local polynomial refit).
    Daf,
    Lc,
    Ql,
    Cq,
    /// Musgrave's closed form (the LC member), parameterized by `--r` or `--delta`.
    Musgrave,
}

impl FamilyChoice {
    pub fn mmsre_family(self) -> Option<Family> {
        match self {
            FamilyChoice::Lc | FamilyChoice::Musgrave => Some(Family::Lc),
            FamilyChoice::Ql => Some(Family::Ql),
            FamilyChoice::Cq => Some(Family::Cq),
            FamilyChoice::Daf => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaChoice {
    Value(f64),
    Fit,
}

impl FromStr for DeltaChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("fit") {
            return Ok(DeltaChoice::Fit);
        }
        match s.parse::<f64>() {
            Ok(v) if v >= 0.0 => Ok(DeltaChoice::Value(v)),
            _ => Err(format!(
                "expected a nonnegative number, inf or fit, got {s:?}"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bandwidth {
    Fixed(usize),
    Range(RangeInclusive<usize>),
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let bad = || format!("expected LO..HI or a single half-width, got {s:?}");
    match s.split_once("..") {
        Some((lo, hi)) => {
            let lo = lo.trim().parse().map_err(|_| bad())?;
            let hi = hi
                .trim_start_matches('=')
                .trim()
                .parse()
                .map_err(|_| bad())?;
            Ok(lo..=hi)
        }
        None => {
            let h = s.trim().parse().map_err(|_| bad())?;
            Ok(h..=h)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Henderson,
    Uniform,
    Epanechnikov,
}

impl From<KernelArg> for KernelKind {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Henderson => KernelKind::Henderson,
            KernelArg::Uniform => KernelKind::Uniform,
            KernelArg::Epanechnikov => KernelKind::Epanechnikov,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lpfilter",
    version,
    about = "Local polynomial trend filters, end-of-sample adaptation and revision analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Filter weights as offset,weight rows.
    Weights(FilterArgs),
    /// Gain and phase on an equally spaced grid over [0, pi].
    Gain {
        #[command(flatten)]
        filter: FilterArgs,
        /// Number of frequencies.
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
    },
    /// Leverage of the direct filters for q = 0..h and d = 0..d-max.
    Table1 {
        #[arg(long, value_enum, default_value_t = KernelArg::Henderson)]
        kernel: KernelArg,
        #[arg(long, default_value_t = 6)]
        h: usize,
        #[arg(long, default_value_t = 6)]
        d_max: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Trend estimates with both ends adapted.
    Smooth {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        boundary: BoundaryArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-validation score over a range of half-widths.
    Cv {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = KernelArg::Henderson)]
        kernel: KernelArg,
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Half-widths to score, LO..HI (inclusive).
        #[arg(long, value_parser = parse_range)]
        h_range: RangeInclusive<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Revision error over a grid of delta ratios and its minimizer.
    FitDelta {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, value_enum)]
        family: FamilyChoice,
        #[command(flatten)]
        grid: DeltaGridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Final, vintage and real-time estimates with revisions.
    Report {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        boundary: BoundaryArgs,
        /// Refit the delta ratio separately for every vintage.
        #[arg(long)]
        per_vintage_refit: bool,
        #[command(flatten)]
        grid: DeltaGridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = KernelArg::Henderson)]
    pub kernel: KernelArg,
    /// Half-width of the symmetric filter.
    #[arg(long)]
    pub h: usize,
    /// Degree of the local polynomial.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[arg(long, value_enum, default_value_t = FamilyChoice::Daf)]
    pub family: FamilyChoice,
    /// delta^2/sigma^2 ratio: a number, inf, or fit (requires --input).
    #[arg(long)]
    pub delta: Option<DeltaChoice>,
    /// Musgrave's I/C ratio, an alternative to --delta.
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub boundary: BoundaryArgs,
    /// Number of future observations available (q = h is the symmetric filter).
    #[arg(long, default_value_t = 0)]
    pub q: usize,
    /// Series used when --delta fit is requested.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub grid: DeltaGridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV (one value column, or label,value); - reads standard input.
    #[arg(long, short)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct DeltaGridArgs {
    /// Log-spaced delta ratios scanned when fitting.
    #[arg(long, default_value_t = DeltaGrid::default().points)]
    pub delta_points: usize,
    #[arg(long, default_value_t = DeltaGrid::default().min)]
    pub delta_min: f64,
    #[arg(long, default_value_t = DeltaGrid::default().max)]
    pub delta_max: f64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output CSV path; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Print 17 significant digits.
    #[arg(long, conflicts_with = "decimals")]
    pub full_precision: bool,
    /// Decimals in fixed-point output.
    #[arg(long)]
    pub decimals: Option<usize>,
    /// Recorded in the run summary; no command draws random numbers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Everything a command needs, after validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub kernel: KernelKind,
    pub degree: usize,
    pub bandwidth: Bandwidth,
    pub q: usize,
    pub family: FamilyChoice,
    pub delta: Option<DeltaChoice>,
    pub musgrave_r: Option<f64>,
    pub grid_points: usize,
    pub delta_grid: DeltaGrid,
    pub d_max: usize,
    pub output: Option<PathBuf>,
    pub per_vintage_refit: bool,
    pub seed: u64,
    pub format: NumberFormat,
}

impl RunConfig {
    fn base(command: Command, output: OutputArgs) -> Self {
        let format = if output.full_precision {
            NumberFormat::Full
        } else {
            NumberFormat::Decimals(output.decimals.unwrap_or(6))
        };
        Self {
            command,
            input: None,
            kernel: KernelKind::Henderson,
            degree: 3,
            bandwidth: Bandwidth::Fixed(0),
            q: 0,
            family: FamilyChoice::Daf,
            delta: None,
            musgrave_r: None,
            grid_points: DEFAULT_GRID_POINTS,
            delta_grid: DeltaGrid::default(),
            d_max: 6,
            output: output.output,
            per_vintage_refit: false,
            seed: output.seed,
            format,
        }
    }

    fn with_kernel(mut self, k: KernelArgs) -> Self {
        self.kernel = k.kernel.into();
        self.bandwidth = Bandwidth::Fixed(k.h);
        self.degree = k.d;
        self
    }

    fn with_boundary(mut self, b: BoundaryArgs) -> Self {
        self.family = b.family;
        self.delta = b.delta;
        self.musgrave_r = b.r;
        self
    }

    fn with_grid(mut self, g: DeltaGridArgs) -> Self {
        self.delta_grid = DeltaGrid {
            points: g.delta_points,
            min: g.delta_min,
            max: g.delta_max,
            ..DeltaGrid::default()
        };
        self
    }

    fn from_filter(command: Command, f: FilterArgs) -> Self {
        let FilterArgs {
            kernel,
            boundary,
            q,
            input,
            grid,
            output,
        } = f;
        let mut cfg = Self::base(command, output)
            .with_kernel(kernel)
            .with_boundary(boundary)
            .with_grid(grid);
        cfg.q = q;
        cfg.input = input;
        cfg
    }

    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let cfg = match cli.command {
            CommandArgs::Weights(f) => Self::from_filter(Command::Weights, f),
            CommandArgs::Gain { filter, grid } => {
                let mut cfg = Self::from_filter(Command::Gain, filter);
                cfg.grid_points = grid;
                cfg
            }
            CommandArgs::Table1 {
                kernel,
                h,
                d_max,
                output,
            } => {
                let mut cfg = Self::base(Command::Table1, output);
                cfg.kernel = kernel.into();
                cfg.bandwidth = Bandwidth::Fixed(h);
                cfg.d_max = d_max;
                cfg
            }
            CommandArgs::Smooth {
                input,
                kernel,
                boundary,
                output,
            } => {
                let mut cfg = Self::base(Command::Smooth, output)
                    .with_kernel(kernel)
                    .with_boundary(boundary);
                cfg.input = Some(input.input);
                cfg
            }
            CommandArgs::Cv {
                input,
                kernel,
                d,
                h_range,
                output,
            } => {
                let mut cfg = Self::base(Command::Cv, output);
                cfg.input = Some(input.input);
                cfg.kernel = kernel.into();
                cfg.degree = d;
                cfg.bandwidth = Bandwidth::Range(h_range);
                cfg
            }
            CommandArgs::FitDelta {
                input,
                kernel,
                family,
                grid,
                output,
            } => {
                let mut cfg = Self::base(Command::FitDelta, output)
                    .with_kernel(kernel)
                    .with_grid(grid);
                cfg.input = Some(input.input);
                cfg.family = family;
                cfg.delta = Some(DeltaChoice::Fit);
                cfg
            }
            CommandArgs::Report {
                input,
                kernel,
                boundary,
                per_vintage_refit,
                grid,
                output,
            } => {
                let mut cfg = Self::base(Command::Report, output)
                    .with_kernel(kernel)
                    .with_boundary(boundary)
                    .with_grid(grid);
                cfg.input = Some(input.input);
                cfg.per_vintage_refit = per_vintage_refit;
                cfg
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-field checks that the flag parser cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.to_string()));
        let filter_family = matches!(
            self.command,
            Command::Weights | Command::Gain | Command::Smooth | Command::Report
        );
        if let Bandwidth::Range(r) = &self.bandwidth {
            if r.is_empty() {
                return usage("empty --h-range");
            }
        }
        if filter_family {
            match self.family {
                FamilyChoice::Daf => {
                    if self.delta.is_some() || self.musgrave_r.is_some() {
                        return usage("--delta and --r do not apply to the daf family");
                    }
                }
                FamilyChoice::Musgrave => match (self.delta, self.musgrave_r) {
                    (Some(DeltaChoice::Fit), _) => {
                        return usage("--delta fit is not available for musgrave; use --family lc")
                    }
                    (Some(_), Some(_)) => return usage("give either --delta or --r, not both"),
                    (None, None) => return usage("musgrave requires --delta or --r"),
                    _ => {}
                },
                _ => {
                    if self.musgrave_r.is_some() {
                        return usage("--r applies only to the musgrave family");
                    }
                    if self.delta.is_none() {
                        return usage("this family requires --delta (a ratio, inf, or fit)");
                    }
                }
            }
        }
        let fittable = matches!(
            self.family,
            FamilyChoice::Lc | FamilyChoice::Ql | FamilyChoice::Cq
        );
        if self.command == Command::FitDelta && !fittable {
            return usage("fit-delta requires --family lc, ql or cq");
        }
        if self.delta == Some(DeltaChoice::Fit) && self.input.is_none() {
            return usage("--delta fit requires --input");
        }
        if self.per_vintage_refit && !fittable {
            return usage("--per-vintage-refit requires an lc, ql or cq family");
        }
        if let Some(r) = self.musgrave_r {
            if !(r.is_finite() && r > 0.0) {
                return usage("--r must be positive and finite");
            }
        }
        Ok(())
    }
}
