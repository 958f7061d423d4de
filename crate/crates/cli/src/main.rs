#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod model;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rst_core::Exec;

use config::Config;
use error::CliError;
use run::{Command, XebAction};

/// Random-state estimators for spectra, thermodynamics and dynamics.
///
/// Settings come from an optional `key = value` file, then `--set key=value`
/// overrides, then the dedicated flags below.
#[derive(Parser)]
#[command(name = "rst", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Density of states of a lattice or spin model.
    Dos(Keys),
    /// Local density of states at one basis state (`site`).
    Ldos(Keys),
    /// Thermal expectation of `observable` over a β grid.
    Thermal(Keys),
    /// Energy, specific heat and partition ratio over a β grid.
    SpecificHeat(Keys),
    /// Current autocorrelation C(t).
    CurrentCorr(Keys),
    /// Infinite-temperature spin density spreading from `source`.
    DensityProfile(Keys),
    /// ESR line shape of a spin model in a field `h`.
    Esr(Keys),
    /// Cross-entropy benchmarking against a seeded reference state.
    Xeb {
        #[arg(value_enum)]
        action: XebArg,
        #[command(flatten)]
        keys: Keys,
    },
    /// Average fidelity of a Kraus channel.
    Fidelity(Keys),
    /// Stochastic trace of `observable`.
    Trace(Keys),
    /// Fast checks against closed-form results.
    Selftest(Keys),
}

#[derive(Clone, Copy, ValueEnum)]
enum XebArg {
    SelfTest,
    Score,
    Sample,
}

macro_rules! keys {
    ($($field:ident => $key:literal : $help:literal),* $(,)?) => {
        #[derive(Args)]
        struct Keys {
            /// Key-value configuration file or provenance sidecar.
            #[arg(long, short = 'c')]
            config: Option<PathBuf>,
            /// Override one key, `key=value`; repeatable.
            #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
            set: Vec<String>,
            /// Output path, `-` for stdout.
            #[arg(long, short = 'o', value_name = "PATH")]
            output: Option<String>,
            $(
                #[doc = $help]
                #[arg(long = $key, value_name = "VALUE")]
                $field: Option<String>,
            )*
        }

        impl Keys {
            fn config(&self) -> Result<Config, CliError> {
                let mut cfg = match &self.config {
                    Some(p) => Config::load(p)?,
                    None => Config::default(),
                };
                for pair in &self.set {
                    cfg.set_pair(pair)?;
                }
                if let Some(v) = &self.output {
                    cfg.set("output", v);
                }
                $(
                    if let Some(v) = &self.$field {
                        cfg.set($key, v);
                    }
                )*
                Ok(cfg)
            }
        }
    };
}

keys! {
    threads => "threads": "Worker threads (defaults to RST_THREADS, then all cores)",
    model => "model": "`lattice` or `spin`",
    geometry => "geometry": "chain, square, triangular, graphene or kagome",
    sites => "sites": "Number of sites",
    lx => "lx": "Unit cells along the first lattice direction",
    ly => "ly": "Unit cells along the second lattice direction",
    boundary => "boundary": "`periodic` or `open`",
    onsite => "onsite": "`zero`, `anderson` or `sinusoidal`",
    w => "w": "Anderson disorder strength",
    j => "j": "Exchange coupling",
    delta => "delta": "Exchange anisotropy",
    field => "h": "External field",
    samples => "samples": "Time samples per spectrum",
    realizations => "realizations": "Random-state realizations",
    kind => "kind": "Random-state kind A, B or C",
    mode => "mode": "Averaging mode M1 or M2",
    seed => "seed": "Master seed",
    tau => "tau": "Spectral time step, or `auto`",
    propagation => "propagation": "`trotter2` or `chebyshev`",
    betas => "betas": "Comma-separated inverse temperatures",
    temperatures => "temperatures": "Comma-separated temperatures",
    beta => "beta": "Inverse temperature",
    dt => "dt": "Time step of the time grid",
    steps => "steps": "Number of time steps",
    observable => "observable": "energy, mx, current or density",
    qubits => "qubits": "Number of qubits",
    shots => "shots": "Number of bitstrings",
    bitstrings => "bitstrings": "Bitstring file to score",
    channel => "channel": "Kraus channel file, `identity:<d>` or `depolarizing:<p>`",
}

/// Configures the global pool and picks the execution mode.
fn setup_threads(cfg: &Config) -> Result<(Exec, usize), CliError> {
    let default = std::env::var("RST_THREADS").unwrap_or_else(|_| "0".into());
    let n: usize = cfg
        .raw("threads", &default)
        .parse()
        .map_err(|_| CliError::Config("threads must be a non-negative integer".into()))?;
    #[cfg(feature = "parallel")]
    {
        if n != 1 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Resource(e.to_string()))?;
            return Ok((Exec::Parallel, rayon::current_num_threads()));
        }
    }
    let _ = n;
    Ok((Exec::Sequential, 1))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, keys) = match &cli.command {
        Sub::Dos(k) => (Command::Dos, k),
        Sub::Ldos(k) => (Command::Ldos, k),
        Sub::Thermal(k) => (Command::Thermal, k),
        Sub::SpecificHeat(k) => (Command::SpecificHeat, k),
        Sub::CurrentCorr(k) => (Command::CurrentCorr, k),
        Sub::DensityProfile(k) => (Command::DensityProfile, k),
        Sub::Esr(k) => (Command::Esr, k),
        Sub::Xeb { action, keys } => {
            let a = match action {
                XebArg::SelfTest => XebAction::SelfTest,
                XebArg::Score => XebAction::Score,
                XebArg::Sample => XebAction::Sample,
            };
            (Command::Xeb(a), keys)
        }
        Sub::Fidelity(k) => (Command::Fidelity, k),
        Sub::Trace(k) => (Command::Trace, k),
        Sub::Selftest(k) => (Command::Selftest, k),
    };
    let result = keys.config().and_then(|cfg| {
        let (exec, threads) = setup_threads(&cfg)?;
        run::execute(cmd, &cfg, exec, threads)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("numerical error: check failed");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
