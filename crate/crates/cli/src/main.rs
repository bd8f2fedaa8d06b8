//! `regge`: batch driver for the connection-form benchmark.
//!
//! Exit status is 0 when every checked invariant holds, 1 on an invariant
//! breach, and 2 on an error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use regge_core::fem::COMPATIBILITY_TOL;
use regge_core::mesh::{load_mesh, write_mesh, Mesh};
use regge_core::pipeline::{self, RunConfig};

#[derive(Parser)]
#[command(name = "regge", version, about = "Connection forms from distributional curvature of Regge metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target edge lengths, comma separated, descending.
    #[arg(long, value_name = "H,...")]
    h: Option<String>,
    /// Regge orders, comma separated.
    #[arg(long, value_name = "R,...")]
    order: Option<String>,
    /// Interior vertex displacement as a fraction of h.
    #[arg(long)]
    perturb: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Extra quadrature degree on top of the defaults.
    #[arg(long)]
    quad_boost: Option<usize>,
    /// direct or cg.
    #[arg(long)]
    solver: Option<String>,
    /// cap or flat.
    #[arg(long)]
    metric: Option<String>,
    /// Chart rectangle as x0,x1,y0,y1.
    #[arg(long)]
    rect: Option<String>,
    /// Directory for CSV output.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One solve at the first h and first order.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Read the mesh instead of generating it.
        #[arg(long)]
        mesh_in: Option<PathBuf>,
        #[arg(long)]
        mesh_out: Option<PathBuf>,
        /// Write the Regge dofs of g_h.
        #[arg(long)]
        dump_regge: Option<PathBuf>,
        /// Write the per-source breakdown of F.
        #[arg(long)]
        dump_rhs: Option<PathBuf>,
        /// Write the nodal values of u_h.
        #[arg(long)]
        dump_solution: Option<PathBuf>,
    },
    /// Error table and fitted rates over the h ladder and all orders.
    Convergence {
        #[command(flatten)]
        common: Common,
    },
    /// F(1) for every (h, r); fails above the compatibility tolerance.
    GaussBonnet {
        #[command(flatten)]
        common: Common,
        /// Negate the interior-edge curvature terms (mutation check).
        #[arg(long, hide = true)]
        flip_edge_jumps: bool,
    },
    /// Shape regularity, quasi-isometry constants and J_h over the sweep.
    Quality {
        #[command(flatten)]
        common: Common,
        /// Per-triangle report for the first (h, r).
        #[arg(long)]
        per_triangle: Option<PathBuf>,
    },
    /// Finite-difference check of dF/dt = -b_h/2 at the first (h, r).
    ShapeCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        /// Step sizes, comma separated, descending.
        #[arg(long, default_value = "1e-1,1e-2,1e-3")]
        dt: String,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Minimum residual reduction per step.
        #[arg(long, default_value_t = 50.0)]
        min_drop: f64,
    },
    /// Generate the perturbed grid for the first h.
    Mesh {
        #[command(flatten)]
        common: Common,
        /// Output file; stdout when absent.
        #[arg(long)]
        mesh_out: Option<PathBuf>,
    },
}

fn load_config(c: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &c.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_text(&text).with_context(|| format!("in {}", path.display()))?;
    }
    let mut set = |k: &str, v: Option<String>| -> anyhow::Result<()> {
        if let Some(v) = v {
            cfg.set(k, &v).with_context(|| format!("--{}", k.replace('_', "-")))?;
        }
        Ok(())
    };
    set("rect", c.rect.clone())?;
    set("h", c.h.clone())?;
    set("orders", c.order.clone())?;
    set("perturb", c.perturb.map(|v| v.to_string()))?;
    set("seed", c.seed.map(|v| v.to_string()))?;
    set("quad_boost", c.quad_boost.map(|v| v.to_string()))?;
    set("solver", c.solver.clone())?;
    set("metric", c.metric.clone())?;
    if let Some(d) = &c.out_dir {
        cfg.out_dir = d.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn first_case(cfg: &RunConfig) -> (f64, usize) {
    (cfg.hs[0], cfg.orders[0])
}

fn breach(ok: bool, what: &str) -> bool {
    if !ok {
        eprintln!("invariant breach: {what}");
    }
    ok
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Solve {
            common,
            mesh_in,
            mesh_out,
            dump_regge,
            dump_rhs,
            dump_solution,
        } => {
            let cfg = load_config(&common)?;
            let (h, r) = first_case(&cfg);
            let mesh: Mesh = match &mesh_in {
                Some(p) => load_mesh(p).with_context(|| format!("loading {}", p.display()))?,
                None => cfg.mesh(h)?,
            };
            if let Some(p) = &mesh_out {
                write(p, &write_mesh(&mesh))?;
            }
            let out = pipeline::solve_on_mesh(&cfg, &mesh, h, r).context("solve")?;
            let hash = cfg.hash();
            write(&cfg.out_dir.join("solve.csv"), &pipeline::convergence_csv(std::slice::from_ref(&out.row), &hash))?;
            if let Some(p) = &dump_regge {
                write(p, &out.regge_csv)?;
            }
            if let Some(p) = &dump_rhs {
                write(p, &pipeline::rhs_breakdown_csv(&out.rhs, &hash))?;
            }
            if let Some(p) = &dump_solution {
                write(p, &out.solution_csv)?;
            }
            let row = &out.row;
            println!(
                "h={:.3e} r={} p={} ndof={} ({}+{}) E={:.6e} compat={:.3e} residual={:.3e} time={:.2}s config={hash}",
                row.h,
                row.r,
                row.p,
                row.ndof(),
                row.lagrange_ndof,
                row.regge_ndof,
                row.error,
                row.compatibility,
                row.residual,
                row.wall_seconds
            );
            Ok(true)
        }
        Command::Convergence { common } => {
            let cfg = load_config(&common)?;
            let rows = pipeline::run_convergence(&cfg)?;
            let hash = cfg.hash();
            let csv = pipeline::convergence_csv(&rows, &hash);
            write(&cfg.out_dir.join("convergence.csv"), &csv)?;
            print!("{csv}");
            for &r in &cfg.orders {
                let total: f64 = rows.iter().filter(|x| x.r == r).map(|x| x.wall_seconds).sum();
                match pipeline::rate_for_order(&rows, r, 3) {
                    Some(rate) => println!("r={r}: fitted rate (last 3) {rate:.3}, wall {total:.2}s"),
                    None => println!("r={r}: too few points for a rate, wall {total:.2}s"),
                }
            }
            Ok(true)
        }
        Command::GaussBonnet { common, flip_edge_jumps } => {
            let cfg = load_config(&common)?;
            let mut rows = Vec::new();
            for &r in &cfg.orders {
                for &h in &cfg.hs {
                    rows.push(pipeline::gauss_bonnet_on_mesh(&cfg, &cfg.mesh(h)?, h, r, flip_edge_jumps)?);
                }
            }
            let csv = pipeline::gauss_bonnet_csv(&rows, &cfg.hash());
            write(&cfg.out_dir.join("gauss_bonnet.csv"), &csv)?;
            print!("{csv}");
            let worst = rows.iter().map(|x| x.ratio).fold(0.0, f64::max);
            println!("max |F(1)|/|F|_1 = {worst:.3e} (tolerance {COMPATIBILITY_TOL:e})");
            Ok(breach(rows.iter().all(|x| x.compatible()), "discrete Gauss-Bonnet"))
        }
        Command::Quality { common, per_triangle } => {
            let cfg = load_config(&common)?;
            let rows = pipeline::run_quality(&cfg)?;
            let csv = pipeline::quality_csv(&rows, &cfg.hash());
            write(&cfg.out_dir.join("quality.csv"), &csv)?;
            print!("{csv}");
            if let Some(p) = &per_triangle {
                let (h, r) = first_case(&cfg);
                let (_, tri) = pipeline::quality_on_mesh(&cfg, &cfg.mesh(h)?, h, r)?;
                write(p, &tri)?;
            }
            let mut ok = true;
            ok &= breach(rows.iter().all(|q| q.euler == 1), "Euler characteristic");
            ok &= breach(rows.iter().all(|q| q.rho_bounded), "rho_T <= h_T");
            ok &= breach(rows.iter().all(|q| q.metric_error < 1.0), "|g - g_h| < 1");
            Ok(ok)
        }
        Command::ShapeCheck {
            common,
            t,
            dt,
            samples,
            min_drop,
        } => {
            let cfg = load_config(&common)?;
            let dts: Vec<f64> = dt
                .split(',')
                .map(|s| s.trim().parse::<f64>().with_context(|| format!("--dt: {s:?}")))
                .collect::<anyhow::Result<_>>()?;
            if dts.len() < 2 || dts.windows(2).any(|w| w[1] >= w[0]) {
                bail!("--dt needs at least two descending step sizes");
            }
            let (h, r) = first_case(&cfg);
            let rows = pipeline::shape_check(&cfg, &cfg.mesh(h)?, r, t, &dts, samples)?;
            let csv = pipeline::shape_check_csv(&rows, &cfg.hash());
            write(&cfg.out_dir.join("shape_check.csv"), &csv)?;
            print!("{csv}");
            let mut ok = true;
            for pair in rows.windows(2).filter(|w| w[0].0 == w[1].0) {
                let drop = pair[0].1.residual / pair[1].1.residual;
                if drop < min_drop {
                    ok = breach(
                        false,
                        &format!("sample {}: residual drop {drop:.1} < {min_drop} at dt={:e}", pair[0].0, pair[1].1.dt),
                    );
                }
            }
            Ok(ok)
        }
        Command::Mesh { common, mesh_out } => {
            let cfg = load_config(&common)?;
            let mesh = cfg.mesh(cfg.hs[0])?;
            let text = write_mesh(&mesh);
            match &mesh_out {
                Some(p) => write(p, &text)?,
                None => print!("{text}"),
            }
            let ok = breach(mesh.euler_characteristic() == 1, "Euler characteristic");
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
