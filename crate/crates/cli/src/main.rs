mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use boson_moments::config::{EVOLVED_TOL, EXACT_TOL};
use boson_moments::{Error, Limits};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "boson-moments", version, about = "Moment dynamics of quadratic bosonic Hamiltonians")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Tolerance for structural checks (symmetry, signs, PSD).
    #[arg(long, global = true, default_value_t = EXACT_TOL)]
    pub tol: f64,
    /// Largest sector evolved through the dense eigenbasis; overrides BOSON_MOMENTS_CAP.
    #[arg(long = "cap-dense", global = true)]
    pub cap_dense: Option<usize>,
    /// Write `<table>.csv` files and `summary.json` here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

impl GlobalArgs {
    pub fn limits(&self) -> Limits {
        let mut limits = Limits::from_env();
        if let Some(cap) = self.cap_dense {
            limits.dense_sector = cap;
        }
        limits
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symmetry, sign-convention, sparsity and PSD checks plus the class.
    Validate { instance: PathBuf },
    /// Incidence factors B (of A) and D (of C).
    Factor { instance: PathBuf },
    /// Evolve the encoded moment vector; emit populations and moments.
    Evolve {
        instance: PathBuf,
        /// Evolution times; replaces the instance's list.
        #[arg(long = "t", value_delimiter = ',', allow_negative_numbers = true)]
        times: Vec<f64>,
        /// Error budget of the sector evolution.
        #[arg(long, default_value_t = EVOLVED_TOL)]
        eps: f64,
    },
    /// Reconstruct cartesian first and second moments after evolution.
    Readout {
        instance: PathBuf,
        #[arg(long = "t", value_delimiter = ',', allow_negative_numbers = true)]
        times: Vec<f64>,
        #[arg(long, default_value_t = EVOLVED_TOL)]
        eps: f64,
    },
    /// Embed a quantum walk and compare with its oscillator dynamics.
    Walk {
        /// Edge list: `j k [weight]` per line, optional `vertices M`.
        graph: PathBuf,
        /// Energy shift c, or `auto` for the largest weighted degree.
        #[arg(long, default_value = "auto")]
        shift: String,
        /// Reject shifts below the largest weighted degree.
        #[arg(long)]
        strict: bool,
        #[arg(long = "t", value_delimiter = ',', default_value = "0,1,10")]
        times: Vec<f64>,
        /// Start from a seeded random unit vector instead of vertex 1.
        #[arg(long)]
        random: bool,
    },
    /// Feynman-Kitaev postselection gadget.
    Postbqp {
        #[command(subcommand)]
        action: PostbqpCommand,
    },
    /// Query and gate counts with unit constants.
    Estimate {
        /// Take d, ‖H0‖_max and M from this instance.
        instance: Option<PathBuf>,
        #[arg(long = "t")]
        time: f64,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        /// The free multiplicative parameter K of the query bound.
        #[arg(long = "K", default_value_t = 1.0)]
        k: f64,
        #[arg(long)]
        d: Option<f64>,
        #[arg(long)]
        h0max: Option<f64>,
        #[arg(long)]
        modes: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PostbqpCommand {
    /// Build the gadget matrices and check the clock transform and the
    /// alternative-family identities.
    Build {
        circuit: PathBuf,
        #[arg(long, default_value_t = 3.0)]
        beta: f64,
        /// Allow beta <= 2.
        #[arg(long)]
        allow_weak_beta: bool,
    },
    /// Decide acceptance through the amplified readout.
    Run {
        circuit: PathBuf,
        #[arg(long, default_value_t = 3.0)]
        beta: f64,
        #[arg(long)]
        allow_weak_beta: bool,
        /// Final time; automatic when omitted.
        #[arg(long)]
        tf: Option<f64>,
    },
    /// Clock-chain spectra and bound states over grids of beta and L.
    Spectrum {
        #[arg(long, value_delimiter = ',', default_value = "3")]
        beta: Vec<f64>,
        /// Gate counts: a list `0,2,5` or a range `0..20`.
        #[arg(long = "L", default_value = "0")]
        gates: String,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 1,
        Error::Numerical(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = commands::run(&cli.command, &cli.global).and_then(|report| {
        match output::emit(&report, cli.global.out.as_deref()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(Error::Numerical(format!("writing output: {e}")))
            }
            _ => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
