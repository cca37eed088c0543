use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use halfplane_rbm::commands::{resolve_quad, resolve_simulation, SimFlags};
use halfplane_rbm::{configure_threads, exit_code, replay, run, GridSpec, Invocation, Resolver};

#[derive(Parser)]
#[command(name = "halfplane-rbm", version, about = "Stationary law of a reflected Brownian motion in the upper half-plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory
    #[arg(long, default_value = "halfplane-rbm-out")]
    out: PathBuf,
    /// JSON file with default settings (overridden by flags)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct Quad {
    /// Grid intervals of the boundary-function table
    #[arg(long)]
    quad_points: Option<usize>,
    /// Truncation of the sampled part of the real line
    #[arg(long)]
    truncation: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a model and report its angles, critical slopes and whitening map
    Check {
        model: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate G, G~ and log G~ along the real line
    Curves {
        model: PathBuf,
        /// t grid, min:max:count
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        #[command(flatten)]
        quad: Quad,
        #[command(flatten)]
        common: Common,
    },
    /// Boundary transforms on the imaginary axis and real half-lines, and the bivariate transform
    Transform {
        model: PathBuf,
        /// t grid on the imaginary axis x = it
        #[arg(long, alias = "axis-grid", allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        /// Real x grid (each transform is reported on its own half-line)
        #[arg(long, allow_hyphen_values = true)]
        real_grid: Option<GridSpec>,
        /// CSV with columns t,y_re,y_im for phi(it, y)
        #[arg(long)]
        points: Option<PathBuf>,
        #[command(flatten)]
        quad: Quad,
        #[command(flatten)]
        common: Common,
    },
    /// Density on a u,v grid (two axes) plus the vertical marginal
    Density {
        model: PathBuf,
        /// u and v axes, umin:umax:nu,vmin:vmax:nv
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        #[command(flatten)]
        quad: Quad,
        #[command(flatten)]
        common: Common,
    },
    /// Tail regimes of both boundary densities and the angular profile at the origin
    Tails {
        model: PathBuf,
        /// Angles of the profile table
        #[arg(long)]
        theta_grid: Option<GridSpec>,
        /// Fit the tails of the inverted boundary densities over this |u| range
        #[arg(long)]
        fit: Option<GridSpec>,
        /// Also evaluate the density on the circle of this radius
        #[arg(long)]
        profile_radius: Option<f64>,
        #[command(flatten)]
        quad: Quad,
        #[command(flatten)]
        common: Common,
    },
    /// Euler simulation of the reflected process
    Simulate {
        model: PathBuf,
        /// Simulation settings (JSON)
        sim: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Independent chains, seeded seed, seed+1, ...
        #[arg(long)]
        chains: Option<usize>,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        step_size: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare a simulation result with the computed densities
    Compare {
        /// result.json written by `simulate`
        result: PathBuf,
        model: PathBuf,
        #[command(flatten)]
        quad: Quad,
        #[command(flatten)]
        common: Common,
    },
    /// Re-run the command recorded in a manifest
    Replay {
        manifest: PathBuf,
        /// Write here instead of the recorded directory and compare the outputs
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn grid(r: &mut Resolver, key: &str, flag: Option<GridSpec>, default: &str) -> anyhow::Result<GridSpec> {
    r.pick(key, flag, default.parse()?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(summary) => {
            // A closed pipe is not a failure of the run.
            let _ = writeln!(std::io::stdout(), "{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<String> {
    configure_threads()?;
    let (inv, out, r) = match command {
        Command::Replay { manifest, out } => {
            let (m, summary) = replay(&manifest, out)?;
            return Ok(format!("{summary}\nwrote {}", m.out_dir.display()));
        }
        Command::Check { model, common } => {
            (Invocation::Check { model }, common.out, Resolver::new(common.config.as_deref())?)
        }
        Command::Curves { model, grid: g, quad, common } => {
            let mut r = Resolver::new(common.config.as_deref())?;
            let grid = grid(&mut r, "grid", g, "-50:50:201")?;
            let quad = resolve_quad(&mut r, quad.quad_points, quad.truncation)?;
            (Invocation::Curves { model, grid, quad }, common.out, r)
        }
        Command::Transform { model, grid: g, real_grid, points, quad, common } => {
            let mut r = Resolver::new(common.config.as_deref())?;
            let grid = grid(&mut r, "grid", g, "-20:20:81")?;
            let real_grid = r.pick_optional("real_grid", real_grid)?;
            let quad = resolve_quad(&mut r, quad.quad_points, quad.truncation)?;
            (Invocation::Transform { model, grid, real_grid, points, quad }, common.out, r)
        }
        Command::Density { model, grid: g, quad, common } => {
            let mut r = Resolver::new(common.config.as_deref())?;
            let grid = grid(&mut r, "grid", g, "-4:4:41,0.05:4:41")?;
            let quad = resolve_quad(&mut r, quad.quad_points, quad.truncation)?;
            (Invocation::Density { model, grid, quad }, common.out, r)
        }
        Command::Tails { model, theta_grid, fit, profile_radius, quad, common } => {
            let mut r = Resolver::new(common.config.as_deref())?;
            let theta_grid = grid(&mut r, "theta_grid", theta_grid, "0.1:3:30")?;
            let fit = r.pick_optional("fit", fit)?;
            let profile_radius = r.pick_optional("profile_radius", profile_radius)?;
            let quad = resolve_quad(&mut r, quad.quad_points, quad.truncation)?;
            (Invocation::Tails { model, theta_grid, fit, profile_radius, quad }, common.out, r)
        }
        Command::Simulate { model, sim, seed, chains, steps, step_size, common } => {
            let r = Resolver::new(common.config.as_deref())?;
            let flags = SimFlags { seed, chains, steps, step_size };
            let (config, chains, r) = resolve_simulation(r, &sim, flags)?;
            (Invocation::Simulate { model, sim, config, chains }, common.out, r)
        }
        Command::Compare { result, model, quad, common } => {
            let mut r = Resolver::new(common.config.as_deref())?;
            let quad = resolve_quad(&mut r, quad.quad_points, quad.truncation)?;
            (Invocation::Compare { result, model, quad }, common.out, r)
        }
    };
    let (m, summary) = run(&inv, &out, r.into_log())?;
    Ok(format!("{summary}\nwrote {} files to {}", m.outputs.len() + 1, m.out_dir.display()))
}
