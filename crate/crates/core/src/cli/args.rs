use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand as ClapSub};

use super::config::*;
use super::{execute, CliError};
use crate::currents::Sign;
use crate::dynamics::{Direction, Mode};

#[derive(Parser, Debug)]
#[command(name = "k3dyn", version, about = "Dynamics of Wehler K3 surfaces")]
struct Cli {
    /// JSON run configuration; flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where to write the CSV or JSON artifact.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    surface_file: Option<PathBuf>,
    #[arg(long, global = true)]
    surface_seed: Option<u64>,
    #[arg(long, global = true)]
    bound: Option<i64>,
    #[arg(long, global = true)]
    screen_samples: Option<usize>,
    /// Write the normalized configuration of this run and continue.
    #[arg(long, global = true)]
    save_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args, Debug, Default)]
struct SeedArg {
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(ClapSub, Debug)]
enum Cmd {
    /// Isometries, the automorphism action and its spectral data.
    Cohomology {
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        inverse: bool,
    },
    /// Generate and screen a surface; `--seed` is the surface seed.
    Surface {
        #[arg(long)]
        seed: Option<u64>,
    },
    Orbit {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = ["float", "exact"])]
        mode: Option<String>,
        #[arg(long)]
        backward: bool,
        #[arg(long)]
        point_index: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
    },
    Lyapunov {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seeds: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
    },
    Saddles {
        #[arg(long)]
        period: Option<usize>,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        lyapunov_n: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
    },
    Green {
        #[arg(long = "N")]
        n_terms: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// `a:b:n`
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        minus: bool,
    },
    Holder {
        /// Comma-separated decreasing radii.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        saddle_period: Option<usize>,
        #[arg(long)]
        minus: bool,
        #[arg(long = "N")]
        n_terms: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
    },
    Invariance {
        #[arg(long)]
        u: Option<String>,
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long)]
        uncentered: bool,
        #[command(flatten)]
        seed: SeedArg,
    },
    Contract {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        rmax: Option<u32>,
    },
}

impl Cmd {
    fn subcommand(&self) -> Subcommand {
        match self {
            Cmd::Cohomology { .. } => Subcommand::Cohomology,
            Cmd::Surface { .. } => Subcommand::Surface,
            Cmd::Orbit { .. } => Subcommand::Orbit,
            Cmd::Lyapunov { .. } => Subcommand::Lyapunov,
            Cmd::Saddles { .. } => Subcommand::Saddles,
            Cmd::Green { .. } => Subcommand::Green,
            Cmd::Holder { .. } => Subcommand::Holder,
            Cmd::Invariance { .. } => Subcommand::Invariance,
            Cmd::Contract { .. } => Subcommand::Contract,
        }
    }
}

fn default_command(sub: Subcommand) -> Command {
    match sub {
        Subcommand::Cohomology => Command::Cohomology(Default::default()),
        Subcommand::Surface => Command::Surface(Default::default()),
        Subcommand::Orbit => Command::Orbit(Default::default()),
        Subcommand::Lyapunov => Command::Lyapunov(Default::default()),
        Subcommand::Saddles => Command::Saddles(Default::default()),
        Subcommand::Green => Command::Green(Default::default()),
        Subcommand::Holder => Command::Holder(Default::default()),
        Subcommand::Invariance => Command::Invariance(Default::default()),
        Subcommand::Contract => Command::Contract(Default::default()),
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Builds the run configuration from command-line arguments (program name first).
pub fn parse_args<I, T>(args: I) -> Result<(RunConfig, Option<PathBuf>), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => {
            let sub = cli
                .command
                .as_ref()
                .ok_or_else(|| CliError::Config("no subcommand given and no --config".into()))?
                .subcommand();
            RunConfig::new(default_command(sub))
        }
    };
    if let Some(cmd) = &cli.command {
        if cmd.subcommand() != cfg.command.subcommand() {
            cfg.command = default_command(cmd.subcommand());
        }
    }
    set(&mut cfg.output, cli.output.map(Some));
    set(&mut cfg.surface.file, cli.surface_file.map(Some));
    set(&mut cfg.surface.seed, cli.surface_seed);
    set(&mut cfg.surface.bound, cli.bound);
    set(&mut cfg.surface.screen_samples, cli.screen_samples);

    let sign = |minus: bool, cur: Sign| if minus { Sign::Minus } else { cur };
    match (cli.command, &mut cfg.command) {
        (Some(Cmd::Cohomology { order, inverse }), Command::Cohomology(p)) => {
            set(&mut p.order, order);
            p.inverse |= inverse;
        }
        (Some(Cmd::Surface { seed }), Command::Surface(_)) => set(&mut cfg.surface.seed, seed),
        (Some(Cmd::Orbit { n, mode, backward, point_index, seed }), Command::Orbit(p)) => {
            set(&mut p.n, n);
            set(&mut p.mode, mode.map(|m| if m == "exact" { Mode::Exact } else { Mode::Float }));
            if backward {
                p.direction = Direction::Backward;
            }
            set(&mut p.point_index, point_index);
            set(&mut cfg.seed, seed.seed);
        }
        (Some(Cmd::Lyapunov { n, seeds, seed }), Command::Lyapunov(p)) => {
            set(&mut p.n, n);
            set(&mut p.seeds, seeds);
            set(&mut cfg.seed, seed.seed);
        }
        (Some(Cmd::Saddles { period, seeds, tol, lyapunov_n, seed }), Command::Saddles(p)) => {
            set(&mut p.period, period);
            set(&mut p.seeds, seeds);
            set(&mut p.tol, tol);
            set(&mut p.lyapunov_n, lyapunov_n);
            set(&mut cfg.seed, seed.seed);
        }
        (Some(Cmd::Green { n_terms, tol, grid, minus }), Command::Green(p)) => {
            set(&mut p.n_terms, n_terms);
            set(&mut p.tol, tol);
            set(&mut p.grid, grid);
            p.sign = sign(minus, p.sign);
        }
        (Some(Cmd::Holder { scales, points, saddle_period, minus, n_terms, seed }), Command::Holder(p)) => {
            set(&mut p.scales, scales);
            set(&mut p.points, points);
            if saddle_period.is_some() {
                p.saddle_period = saddle_period;
            }
            p.sign = sign(minus, p.sign);
            set(&mut p.n_terms, n_terms);
            set(&mut cfg.seed, seed.seed);
        }
        (Some(Cmd::Invariance { u, mc, uncentered, seed }), Command::Invariance(p)) => {
            set(&mut p.u, u);
            set(&mut p.mc, mc);
            if uncentered {
                p.centered = false;
            }
            set(&mut cfg.seed, seed.seed);
        }
        (Some(Cmd::Contract { input, rmax }), Command::Contract(p)) => {
            set(&mut p.input, input);
            set(&mut p.rmax, rmax);
        }
        _ => {}
    }
    cfg.validate()?;
    Ok((cfg, cli.save_config))
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(&args) {
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            let _ = write!(stdout, "{e}");
            return 0;
        }
    }
    let res = parse_args(args).and_then(|(cfg, save)| {
        if let Some(path) = save {
            std::fs::write(&path, cfg.to_json() + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        execute(&cfg, stdout)
    });
    match res {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
