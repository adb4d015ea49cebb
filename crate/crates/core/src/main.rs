//! Command-line driver for the EG Stokes experiments.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use eg_stokes::assembly::{DiscretizationParams, Theta};
use eg_stokes::error::Error;
use eg_stokes::harness::{
    self, channel::ChannelConfig, convergence, solvers, ExampleId, MuSpec,
};
use eg_stokes::linsolve::KrylovConfig;
use eg_stokes::mesh::{generate_unit_square, import_mesh, BoundarySpec};
use eg_stokes::precond::PrecondKind;
use eg_stokes::space::DofMap;

#[derive(Parser)]
#[command(
    name = "eg-stokes",
    about = "Enriched Galerkin discretization of the 2D Stokes equations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DiscretizationArgs {
    /// Symmetrization parameter: -1, 0 or 1.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    theta: i32,
    /// Penalty parameter.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

impl DiscretizationArgs {
    fn params(&self) -> Result<DiscretizationParams, Error> {
        DiscretizationParams::new(Theta::from_int(self.theta)?, self.alpha)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Manufactured-solution convergence study (examples ex1, ex2).
    Convergence {
        #[arg(long, default_value = "ex1")]
        example: String,
        /// Inclusive refinement-level range, e.g. 2..6.
        #[arg(long, default_value = "2..6", value_parser = parse_levels)]
        levels: (u32, u32),
        #[command(flatten)]
        disc: DiscretizationArgs,
        /// Output directory for CSV files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Preconditioner iteration-count study.
    Solvers {
        #[arg(long, default_value = "ex1")]
        example: String,
        /// Level range for ex1/ex2 (structured meshes).
        #[arg(long, default_value = "3..6", value_parser = parse_levels)]
        levels: (u32, u32),
        /// Comma-separated preconditioners.
        #[arg(long, default_value = "bd,bl,bu,md,ml,mu")]
        precond: String,
        /// Mesh file (required for ex3/ex4).
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Comma-separated viscosities for ex3.
        #[arg(long, default_value = "1,0.1,0.01,0.001")]
        mu_list: String,
        /// Relative residual tolerance of the outer solver.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        disc: DiscretizationArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Channel flow around the obstacle on an imported mesh.
    Channel {
        #[arg(long)]
        mesh: PathBuf,
        /// Constant viscosity.
        #[arg(long)]
        mu: Option<f64>,
        /// Discontinuous viscosity `top,bottom,y_split`.
        #[arg(long, value_parser = parse_mu_split)]
        mu_split: Option<MuSplitArg>,
        #[arg(long, default_value = "bl")]
        precond: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        disc: DiscretizationArgs,
        /// Output directory for the VTK file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discrete inf-sup constant over structured mesh levels.
    Infsup {
        #[arg(long, default_value = "2..4", value_parser = parse_levels)]
        levels: (u32, u32),
        #[arg(long, default_value_t = 10.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
    },
}

#[derive(Clone, Copy, Debug)]
struct MuSplitArg {
    top: f64,
    bottom: f64,
    y_split: f64,
}

fn parse_levels(s: &str) -> Result<(u32, u32), String> {
    let parse_one = |t: &str| t.parse::<u32>().map_err(|e| e.to_string());
    match s.split_once("..") {
        Some((a, b)) => {
            let lo = parse_one(a)?;
            let hi = parse_one(b)?;
            if lo < 1 || hi < lo {
                return Err(format!("invalid level range {s}"));
            }
            Ok((lo, hi))
        }
        None => {
            let l = parse_one(s)?;
            Ok((l, l))
        }
    }
}

fn parse_mu_split(s: &str) -> Result<MuSplitArg, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected top,bottom,y_split".into());
    }
    let v: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
    let v = v.map_err(|e| e.to_string())?;
    Ok(MuSplitArg {
        top: v[0],
        bottom: v[1],
        y_split: v[2],
    })
}

fn parse_preconds(s: &str) -> Result<Vec<PrecondKind>, Error> {
    s.split(',')
        .map(|p| PrecondKind::from_str(p.trim()))
        .collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Convergence {
            example,
            levels,
            disc,
            out,
        } => {
            let example: ExampleId = example.parse()?;
            if matches!(example, ExampleId::Ex3 | ExampleId::Ex4) {
                return Err(Error::InvalidConfig(
                    "convergence studies need an exact solution; use ex1 or ex2".into(),
                ));
            }
            let (problem, bc) = harness::builtin_problem(example);
            let mut config = convergence::ConvergenceConfig::new(levels, disc.params()?);
            if let Some(dir) = &out {
                config.out_csv = Some(dir.join(format!("convergence_{example:?}.csv").to_lowercase()));
            }
            let rows = convergence::run_convergence(&problem, &bc, &config)?;
            print!("{}", convergence::format_table(&rows));
            Ok(())
        }
        Command::Solvers {
            example,
            levels,
            precond,
            mesh,
            mu_list,
            tol,
            disc,
            out,
        } => {
            let example: ExampleId = example.parse()?;
            let preconds = parse_preconds(&precond)?;
            let params = disc.params()?;
            let krylov = KrylovConfig::with_tol(tol);
            let rows = match example {
                ExampleId::Ex1 | ExampleId::Ex2 => {
                    let (problem, bc) = harness::builtin_problem(example);
                    solvers::study_over_levels(&problem, &bc, levels, params, &preconds, &krylov)?
                }
                ExampleId::Ex3 => {
                    let path = mesh.ok_or_else(|| {
                        Error::InvalidConfig("ex3 needs --mesh".into())
                    })?;
                    let mesh = import_mesh(path, &harness::channel::channel_boundary())?;
                    let mus: Result<Vec<f64>, _> =
                        mu_list.split(',').map(|m| m.trim().parse::<f64>()).collect();
                    let mus = mus.map_err(|e| Error::InvalidConfig(e.to_string()))?;
                    solvers::study_over_viscosities(
                        &mesh,
                        &mus,
                        |mu| harness::channel_problem(MuSpec::Constant(mu)),
                        params,
                        &preconds,
                        &krylov,
                    )?
                }
                ExampleId::Ex4 => {
                    let path = mesh.ok_or_else(|| {
                        Error::InvalidConfig("ex4 needs --mesh".into())
                    })?;
                    let mesh = import_mesh(path, &harness::channel::channel_boundary())?;
                    let dofmap = DofMap::new(&mesh);
                    let (problem, _) = harness::builtin_problem(ExampleId::Ex4);
                    let blocks = eg_stokes::assembly::BlockSystem::assemble(
                        &mesh, &dofmap, params, &problem,
                    )?;
                    vec![solvers::study_row("split", &blocks, &mesh, &dofmap, &preconds, &krylov)]
                }
            };
            print!("{}", solvers::format_table(&rows));
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                solvers::write_study_csv(
                    &dir.join(format!("solvers_{example:?}.csv").to_lowercase()),
                    &rows,
                )?;
            }
            Ok(())
        }
        Command::Channel {
            mesh,
            mu,
            mu_split,
            precond,
            tol,
            disc,
            out,
        } => {
            let mu_spec = match (mu, mu_split) {
                (Some(mu), None) => MuSpec::Constant(mu),
                (None, Some(split)) => MuSpec::SplitY {
                    top: split.top,
                    bottom: split.bottom,
                    y_split: split.y_split,
                },
                (None, None) => MuSpec::Constant(1.0),
                (Some(_), Some(_)) => {
                    return Err(Error::InvalidConfig(
                        "pass either --mu or --mu-split, not both".into(),
                    ))
                }
            };
            let mesh = import_mesh(mesh, &harness::channel::channel_boundary())?;
            println!(
                "mesh: {} vertices, {} cells, velocity DoFs {}, pressure DoFs {}",
                mesh.n_vertices(),
                mesh.n_cells(),
                2 * mesh.n_vertices() + mesh.n_cells(),
                mesh.n_cells()
            );
            let config = ChannelConfig {
                params: disc.params()?,
                precond: precond.parse()?,
                krylov: KrylovConfig::with_tol(tol),
            };
            let report = harness::run_channel(&mesh, mu_spec, &config, out.as_deref())?;
            println!(
                "solver {}: {} iterations (status {:?}, final residual {:.3e})",
                report.solver.label,
                report.solver.iterations,
                report.solver.status,
                report.solver.final_residual
            );
            println!(
                "inflow flux {:.6e}, outflow flux {:.6e}, data imbalance {:.3e}",
                report.inflow_flux, report.outflow_flux, report.data_flux_imbalance
            );
            println!("constraint residual {:.3e}", report.constraint_residual);
            if !report.solver.converged() {
                return Err(Error::SolverFailure(format!(
                    "channel solve: {:?}",
                    report.solver.status
                )));
            }
            Ok(())
        }
        Command::Infsup { levels, alpha, mu } => {
            println!("level  pressure DoFs      beta_h   iterations");
            for level in levels.0..=levels.1 {
                let mesh = generate_unit_square(level, &BoundarySpec::all_dirichlet())?;
                let dofmap = DofMap::new(&mesh);
                let estimate = harness::estimate_infsup(&mesh, &dofmap, alpha, mu)?;
                println!(
                    "{level:>5}  {:>13}  {:>10.6}   {:>10}",
                    dofmap.n_pressure(),
                    estimate.beta,
                    estimate.iterations
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
