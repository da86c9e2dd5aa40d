//! Command logic behind the `fibsnake` binary.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use fibsnake::events::Event;
use fibsnake::lattice::{Params, Step, TorusShape};
use fibsnake::ring::{RateParams, SpaceTimeEvent};
use fibsnake::Error;

use output::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_BREACH: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "fibsnake",
    version,
    about = "Snake configurations on tori and their limits"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub output: Format,
    /// Flat TOML file of flag values; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition function as a sum of four determinants.
    Partition(PartitionArgs),
    /// Event probabilities on the torus.
    Correlate(CorrelateArgs),
    /// Cylinder and plane kernels, and the arc geometry.
    Limit {
        #[command(subcommand)]
        command: LimitCommand,
    },
    /// Walkers on a ring: kernels, stationary law, rates, correlations.
    Ring {
        #[command(subcommand)]
        command: RingCommand,
    },
    /// Simulate walker dynamics.
    Sim {
        #[command(subcommand)]
        command: SimCommand,
    },
    /// Run the acceptance battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Clone, Copy)]
pub struct ShapeArgs {
    #[arg(long)]
    pub m1: usize,
    #[arg(long)]
    pub m2: usize,
}

impl ShapeArgs {
    pub fn shape(&self) -> fibsnake::Result<TorusShape> {
        TorusShape::new(self.m1, self.m2)
    }
}

#[derive(Debug, Args, Clone, Copy)]
pub struct WeightArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
}

impl WeightArgs {
    pub fn params(&self) -> Params {
        Params::new(self.alpha, self.beta, self.gamma, self.delta)
    }
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Compare with exhaustive enumeration.
    #[arg(long)]
    pub check: bool,
    /// Relative residual allowed under --check.
    #[arg(long, default_value_t = 1e-9, value_parser = positive)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Event `x1,x2,STEP` with STEP one of fixed, right, up, down.
    #[arg(long = "event", required = true, value_parser = parse_event)]
    pub events: Vec<Event>,
    /// Condition on the occupation parity class selected by this θ2.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1), conflicts_with = "check")]
    pub theta2: Option<u8>,
    /// Compare with exhaustive enumeration.
    #[arg(long)]
    pub check: bool,
    #[arg(long, default_value_t = 1e-9, value_parser = positive)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum LimitCommand {
    /// Correlations of the semi-infinite cylinder measure.
    Cylinder {
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long = "event", required = true, value_parser = parse_event)]
        events: Vec<Event>,
    },
    /// Correlations of the plane measure (numerical contour integrals).
    Plane {
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long = "event", required = true, value_parser = parse_event)]
        events: Vec<Event>,
        /// Quadrature tolerance.
        #[arg(long, value_parser = positive)]
        tol: Option<f64>,
    },
    /// Where |1 + γw + δ/w| exceeds β on the unit circle.
    Arc {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Also count Right steps per column on a period-n cylinder.
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Debug, Args, Clone, Copy)]
pub struct RateArgs {
    /// Up-jump rate T.
    #[arg(long = "rate-up", default_value_t = 1.0)]
    pub t: f64,
    /// Down-jump rate T'.
    #[arg(long = "rate-down", default_value_t = 0.0)]
    pub tp: f64,
}

impl RateArgs {
    pub fn rates(&self) -> fibsnake::Result<RateParams> {
        RateParams::new(self.t, self.tp)
    }
}

#[derive(Debug, Subcommand)]
pub enum RingCommand {
    /// Twisted single-walker kernel p_t(x, y).
    Kernel {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long, allow_negative_numbers = true)]
        x: i64,
        #[arg(long, allow_negative_numbers = true)]
        y: i64,
        #[arg(long)]
        time: f64,
        #[command(flatten)]
        rates: RateArgs,
    },
    /// Non-collision probability and conditioned transition x → y.
    Transition {
        #[arg(long)]
        n: usize,
        /// Occupied sites, comma separated.
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        time: f64,
        #[command(flatten)]
        rates: RateArgs,
    },
    /// Stationary law Δ(h)²/n^ℓ.
    Stationary {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: usize,
    },
    /// Jump rates of the conditioned walkers from one state.
    Rates {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        state: String,
        #[command(flatten)]
        rates: RateArgs,
    },
    /// Space-time correlations in the stationary regime.
    Correlate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: usize,
        /// Event `t,h,STEP`.
        #[arg(long = "event", required = true, value_parser = parse_spacetime_event)]
        events: Vec<SpaceTimeEvent>,
        #[command(flatten)]
        rates: RateArgs,
    },
    /// The generator identity on every state.
    CheckGenerator {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: usize,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long, default_value_t = 1e-10, value_parser = positive)]
        tol: f64,
    },
    /// Markov property of the space-time process at three times.
    Markov {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: usize,
        /// Three increasing times, comma separated.
        #[arg(long, default_value = "0,0.5,1.2")]
        times: String,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long, default_value_t = 1e-8, value_parser = positive)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
#[group(id = "start_law", required = true, multiple = false, args = ["start", "stationary", "uniform"])]
pub struct SimArgs {
    #[arg(long)]
    pub n: usize,
    /// Fixed start: occupied sites, comma separated.
    #[arg(long)]
    pub start: Option<String>,
    /// Start from the stationary law with this many walkers.
    #[arg(long, value_name = "ELL")]
    pub stationary: Option<usize>,
    /// Start uniformly with this many walkers.
    #[arg(long, value_name = "ELL")]
    pub uniform: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[command(flatten)]
    pub rates: RateArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of independent paths; with more than one, the final-state
    /// law is estimated instead of printing the path.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub paths: u64,
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// Independent walkers.
    Free(SimArgs),
    /// Walkers conditioned never to collide.
    Conditioned(SimArgs),
    /// Simple exclusion.
    Asep(SimArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of partition, correlation, sign, cylinder, renewal, sine, ring,
    /// montecarlo, fibonacci, geometry, all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Paths per Monte Carlo estimate.
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(2..))]
    pub mc_paths: u64,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be strictly positive, got {v}"))
    }
}

fn parse_step(s: &str) -> Result<Step, String> {
    let mut chars = s.chars();
    let symbol = match (chars.next(), chars.next()) {
        (Some(c), None) => Step::from_symbol(c),
        _ => None,
    };
    symbol
        .or_else(|| Step::parse(s))
        .ok_or_else(|| format!("unknown step '{s}'"))
}

pub fn parse_event(s: &str) -> Result<Event, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, step] = parts[..] else {
        return Err(format!("expected x1,x2,STEP, got '{s}'"));
    };
    let x1 = a.parse().map_err(|_| format!("bad coordinate '{a}'"))?;
    let x2 = b.parse().map_err(|_| format!("bad coordinate '{b}'"))?;
    Ok(Event::new(x1, x2, parse_step(step)?))
}

pub fn parse_spacetime_event(s: &str) -> Result<SpaceTimeEvent, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, step] = parts[..] else {
        return Err(format!("expected t,h,STEP, got '{s}'"));
    };
    let t = a.parse().map_err(|_| format!("bad time '{a}'"))?;
    let h = b.parse().map_err(|_| format!("bad site '{b}'"))?;
    Ok(SpaceTimeEvent::new(t, h, parse_step(step)?))
}

/// Exit code for a library error: bad input is a usage error, a result that
/// cannot be computed to accuracy is a breach.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SingularSector { .. }
        | Error::NonReal { .. }
        | Error::VanishingDenominator { .. }
        | Error::QuadratureFailed { .. }
        | Error::NegativeProbability(_) => EXIT_BREACH,
        _ => EXIT_USAGE,
    }
}

/// Parse, run and render; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = match config::expand(args.into_iter().map(Into::into).collect()) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(outcome) => {
            if let Err(e) = output::render(&outcome, cli.output, out) {
                let _ = writeln!(err, "error: {e}");
                return EXIT_BREACH;
            }
            if outcome.breach {
                EXIT_BREACH
            } else {
                EXIT_OK
            }
        }
        Err(commands::CommandError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(commands::CommandError::Library(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
