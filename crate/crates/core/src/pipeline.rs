//! Benchmark driver: configuration, single solves, sweeps, audits, and CSV tables.
//!
//! CSV output is deterministic for a fixed configuration: rows are sorted by
//! `(r, h)`, floats use a fixed format, and every row ends with the config hash.
//! Wall time is kept on the row structs but never written to CSV.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::curvature::{boundary_frame_angle, rhs_functional, CurvatureFunctional, CurvatureOptions};
use crate::diagnostics::{
    inverse_ratio_report, jh_report, quality_report, shape_derivative_check, trace_ratio_report, ShapeCheck,
};
use crate::fem::{
    assemble_stiffness, assemble_volume_functional, compatibility_ratio, l2_error_grad, solve_constrained,
    LagrangeSpace, SolverKind, COMPATIBILITY_ABS_FLOOR, COMPATIBILITY_TOL,
};
use crate::mesh::{generate_perturbed_grid, Mesh, Rect};
use crate::quadrature::TriangleRule;
use crate::regge::ReggeSpace;
use crate::tensor::{AnalyticMetric, Covector, FlatMetric, SphericalCap};
use crate::{Error, Result};

/// The h ladder of the benchmark tables.
pub const DEFAULT_HS: [f64; 5] = [2.5e-1, 1.3e-1, 6.3e-2, 3.1e-2, 1.6e-2];

static CAP: SphericalCap = SphericalCap;
static FLAT: FlatMetric = FlatMetric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricChoice {
    #[default]
    Cap,
    Flat,
}

impl MetricChoice {
    pub fn analytic(self) -> &'static dyn AnalyticMetric {
        match self {
            MetricChoice::Cap => &CAP,
            MetricChoice::Flat => &FLAT,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricChoice::Cap => "cap",
            MetricChoice::Flat => "flat",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cap" => Ok(MetricChoice::Cap),
            "flat" => Ok(MetricChoice::Flat),
            _ => Err(Error::Config(format!("unknown metric {s:?} (expected cap or flat)"))),
        }
    }
}

fn solver_name(s: SolverKind) -> &'static str {
    match s {
        SolverKind::Direct => "direct",
        SolverKind::Cg => "cg",
    }
}

pub fn parse_solver(s: &str) -> Result<SolverKind> {
    match s {
        "direct" => Ok(SolverKind::Direct),
        "cg" => Ok(SolverKind::Cg),
        _ => Err(Error::Config(format!("unknown solver {s:?} (expected direct or cg)"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rect: Rect,
    /// Target edge lengths, strictly descending.
    pub hs: Vec<f64>,
    pub orders: Vec<usize>,
    pub perturb: f64,
    pub seed: u64,
    pub quad_boost: usize,
    pub solver: SolverKind,
    pub metric: MetricChoice,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rect: Rect::square(0.25),
            hs: DEFAULT_HS.to_vec(),
            orders: vec![0, 1, 2, 3],
            perturb: 0.25,
            seed: 1,
            quad_boost: 0,
            solver: SolverKind::Direct,
            metric: MetricChoice::Cap,
            out_dir: PathBuf::from("."),
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {s:?}"))))
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    /// Sets one `key=value` pair. Keys: `rect` (x0,x1,y0,y1), `h`, `orders`,
    /// `perturb`, `seed`, `quad_boost`, `solver`, `metric`, `out_dir`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "rect" => {
                let v: Vec<f64> = parse_list(key, value)?;
                let [x0, x1, y0, y1] = v[..] else {
                    return Err(Error::Config("rect needs four values x0,x1,y0,y1".into()));
                };
                self.rect = Rect { x0, x1, y0, y1 };
            }
            "h" => self.hs = parse_list(key, value)?,
            "orders" => self.orders = parse_list(key, value)?,
            "perturb" => self.perturb = parse_one(key, value)?,
            "seed" => self.seed = parse_one(key, value)?,
            "quad_boost" => self.quad_boost = parse_one(key, value)?,
            "solver" => self.solver = parse_solver(value)?,
            "metric" => self.metric = MetricChoice::parse(value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file on top of `self`; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
            self.set(k, v).map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.hs.is_empty() {
            return Err(Error::Config("empty h list".into()));
        }
        if self.hs.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::Config("h values must be positive".into()));
        }
        if self.hs.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("h values must be strictly descending".into()));
        }
        if self.orders.is_empty() {
            return Err(Error::Config("empty order list".into()));
        }
        if !(0.0..0.5).contains(&self.perturb) {
            return Err(Error::Config(format!("perturb {} outside [0, 0.5)", self.perturb)));
        }
        let r = &self.rect;
        if !(r.x1 > r.x0 && r.y1 > r.y0) {
            return Err(Error::Config("degenerate rectangle".into()));
        }
        Ok(())
    }

    /// Canonical text of every field that affects results.
    pub fn canonical(&self) -> String {
        let r = &self.rect;
        let hs: Vec<String> = self.hs.iter().map(|h| format!("{h:?}")).collect();
        let orders: Vec<String> = self.orders.iter().map(|o| o.to_string()).collect();
        format!(
            "rect={:?},{:?},{:?},{:?}\nh={}\norders={}\nperturb={:?}\nseed={}\nquad_boost={}\nsolver={}\nmetric={}\n",
            r.x0,
            r.x1,
            r.y0,
            r.y1,
            hs.join(","),
            orders.join(","),
            self.perturb,
            self.seed,
            self.quad_boost,
            solver_name(self.solver),
            self.metric.name()
        )
    }

    /// First 12 hex digits of the SHA-256 of [`RunConfig::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(digest)[..12].to_string()
    }

    pub fn mesh(&self, h: f64) -> Result<Mesh> {
        Ok(generate_perturbed_grid(self.rect, h, self.perturb, self.seed)?)
    }
}

/// Lagrange degree paired with Regge degree `r`.
pub fn lagrange_degree(r: usize) -> usize {
    r.max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// Target h of the sweep entry.
    pub h: f64,
    /// Largest Euclidean triangle diameter of the generated mesh.
    pub h_mesh: f64,
    pub r: usize,
    pub p: usize,
    pub lagrange_ndof: usize,
    pub regge_ndof: usize,
    /// Relative error, or the absolute one when `‖α‖ = 0`.
    pub error: f64,
    pub absolute_error: f64,
    pub compatibility: f64,
    pub residual: f64,
    pub wall_seconds: f64,
}

impl ConvergenceRow {
    pub fn ndof(&self) -> usize {
        self.lagrange_ndof + self.regge_ndof
    }
}

/// Artifacts of one solve beyond its table row.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub row: ConvergenceRow,
    pub rhs: CurvatureFunctional,
    pub solution: Vec<f64>,
    pub regge_csv: String,
    pub solution_csv: String,
}

/// mesh → interpolate → assemble → right-hand side → solve → error.
pub fn solve_on_mesh(cfg: &RunConfig, mesh: &Mesh, h: f64, r: usize) -> Result<SolveOutput> {
    let start = Instant::now();
    let g = cfg.metric.analytic();
    let p = lagrange_degree(r);
    let tag = cfg.hash();
    let regge = ReggeSpace::new(mesh, r)?;
    let gh = regge.interpolate_metric(&g, cfg.quad_boost)?;
    let space = LagrangeSpace::new(mesh, p)?;
    let opts = CurvatureOptions::for_degrees(p, r, cfg.quad_boost);
    let fa = boundary_frame_angle(mesh, g, opts.edge_points)?;
    let rhs = rhs_functional(&space, &gh, &fa, &opts)?;
    let f = rhs.total();
    let compatibility = compatibility_ratio(&f);
    let rule = TriangleRule::with_degree(opts.triangle_degree);
    let a = assemble_stiffness(&space, &gh, &rule)?;
    let m = assemble_volume_functional(&space, &gh, &rule)?;
    let sol = solve_constrained(&a, &m, &f, cfg.solver)?;
    let u = space.field(sol.u)?;
    let exact = |x: [f64; 2]| g.connection_form(x).unwrap_or(Covector([0.0, 0.0]));
    let err = l2_error_grad(&u, &exact, &g, &rule)?;
    let solution_csv = u.to_csv(&tag);
    let solution = u.into_coefficients();
    Ok(SolveOutput {
        row: ConvergenceRow {
            h,
            h_mesh: mesh.max_diameter(),
            r,
            p,
            lagrange_ndof: space.ndof(),
            regge_ndof: regge.ndof(),
            error: err.relative.unwrap_or(err.absolute),
            absolute_error: err.absolute,
            compatibility,
            residual: sol.residual,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
        rhs,
        solution,
        regge_csv: gh.to_csv(&tag),
        solution_csv,
    })
}

pub fn solve(cfg: &RunConfig, h: f64, r: usize) -> Result<SolveOutput> {
    let mesh = cfg.mesh(h)?;
    solve_on_mesh(cfg, &mesh, h, r)
}

/// Every `(r, h)` of the configuration, sorted by `(r, h)` with h descending.
pub fn run_convergence(cfg: &RunConfig) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &r in &cfg.orders {
        for &h in &cfg.hs {
            rows.push(solve(cfg, h, r)?.row);
        }
    }
    rows.sort_by(|a, b| a.r.cmp(&b.r).then(b.h.total_cmp(&a.h)));
    Ok(rows)
}

/// Least-squares slope of `log e` against `log h`.
pub fn fit_rate(hs: &[f64], es: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = hs
        .iter()
        .zip(es)
        .filter(|(h, e)| **h > 0.0 && **e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope over the last `k` rows of order `r`, fitted against the target h.
pub fn rate_for_order(rows: &[ConvergenceRow], r: usize, k: usize) -> Option<f64> {
    let sel: Vec<&ConvergenceRow> = rows.iter().filter(|row| row.r == r).collect();
    let tail = &sel[sel.len().saturating_sub(k)..];
    let hs: Vec<f64> = tail.iter().map(|row| row.h).collect();
    let es: Vec<f64> = tail.iter().map(|row| row.error).collect();
    fit_rate(&hs, &es)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), |v| format!("{v:.4}"))
}

/// Rows with the observed rate between consecutive h, and the fitted rate on the last row of each order.
pub fn convergence_csv(rows: &[ConvergenceRow], hash: &str) -> String {
    let mut s = String::from("# h,r,E,ndof,rate,fit_rate_last3,lagrange_ndof,regge_ndof,compatibility,residual,config\n");
    for (i, row) in rows.iter().enumerate() {
        let prev = (i > 0 && rows[i - 1].r == row.r).then(|| &rows[i - 1]);
        let rate = prev.and_then(|q| fit_rate(&[q.h, row.h], &[q.error, row.error]));
        let last = rows.get(i + 1).is_none_or(|n| n.r != row.r);
        let fit = if last { rate_for_order(rows, row.r, 3) } else { None };
        let _ = writeln!(
            s,
            "{:.3e},{},{:.6e},{},{},{},{},{},{:.3e},{:.3e},{hash}",
            row.h,
            row.r,
            row.error,
            row.ndof(),
            fmt_opt(rate),
            fmt_opt(fit),
            row.lagrange_ndof,
            row.regge_ndof,
            row.compatibility,
            row.residual
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussBonnetRow {
    pub h: f64,
    pub r: usize,
    /// `F(1)`.
    pub f_one: f64,
    /// `‖F‖₁`.
    pub l1: f64,
    pub ratio: f64,
    pub total_turning: f64,
    /// `KdA_dist(1)`.
    pub total_curvature: f64,
}

impl GaussBonnetRow {
    pub fn compatible(&self) -> bool {
        self.ratio <= COMPATIBILITY_TOL || self.f_one.abs() <= COMPATIBILITY_ABS_FLOOR
    }
}

/// `F(1)` only, without a solve.
pub fn gauss_bonnet_on_mesh(cfg: &RunConfig, mesh: &Mesh, h: f64, r: usize, flip_edge_jumps: bool) -> Result<GaussBonnetRow> {
    let g = cfg.metric.analytic();
    let p = lagrange_degree(r);
    let regge = ReggeSpace::new(mesh, r)?;
    let gh = regge.interpolate_metric(&g, cfg.quad_boost)?;
    let space = LagrangeSpace::new(mesh, p)?;
    let mut opts = CurvatureOptions::for_degrees(p, r, cfg.quad_boost);
    opts.flip_edge_jumps = flip_edge_jumps;
    let fa = boundary_frame_angle(mesh, g, opts.edge_points)?;
    let rhs = rhs_functional(&space, &gh, &fa, &opts)?;
    let f = rhs.total();
    Ok(GaussBonnetRow {
        h,
        r,
        f_one: f.iter().sum(),
        l1: f.iter().map(|v| v.abs()).sum(),
        ratio: compatibility_ratio(&f),
        total_turning: fa.total_turning(),
        total_curvature: rhs.kda().iter().sum(),
    })
}

pub fn run_gauss_bonnet(cfg: &RunConfig) -> Result<Vec<GaussBonnetRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &r in &cfg.orders {
        for &h in &cfg.hs {
            rows.push(gauss_bonnet_on_mesh(cfg, &cfg.mesh(h)?, h, r, false)?);
        }
    }
    Ok(rows)
}

pub fn gauss_bonnet_csv(rows: &[GaussBonnetRow], hash: &str) -> String {
    let mut s = String::from("# h,r,F_one,F_l1,ratio,total_turning,total_curvature,config\n");
    for row in rows {
        let _ = writeln!(
            s,
            "{:.3e},{},{:.6e},{:.6e},{:.3e},{:.15},{:.12},{hash}",
            row.h, row.r, row.f_one, row.l1, row.ratio, row.total_turning, row.total_curvature
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityRow {
    pub h: f64,
    pub r: usize,
    pub euler: i64,
    pub h_max: f64,
    pub k: f64,
    pub k_prime: f64,
    pub k_v: f64,
    pub c_g_gh: f64,
    pub c_gh_g: f64,
    pub metric_error: f64,
    pub rho_bounded: bool,
    pub jh_deviation: f64,
    pub jh_adjointness: f64,
    pub trace_ratio: f64,
    pub inverse_ratio: f64,
}

pub fn quality_on_mesh(cfg: &RunConfig, mesh: &Mesh, h: f64, r: usize) -> Result<(QualityRow, String)> {
    let g = cfg.metric.analytic();
    let regge = ReggeSpace::new(mesh, r)?;
    let gh = regge.interpolate_metric(&g, cfg.quad_boost)?;
    let q = quality_report(mesh, &g, &gh)?;
    let j = jh_report(mesh, &g, &gh, 3, cfg.seed)?;
    let space = LagrangeSpace::new(mesh, lagrange_degree(r))?;
    let tr = trace_ratio_report(&space, &gh, &q)?;
    let inv = inverse_ratio_report(&space, &gh, &q)?;
    let row = QualityRow {
        h,
        r,
        euler: mesh.euler_characteristic(),
        h_max: q.h,
        k: q.k,
        k_prime: q.k_prime,
        k_v: q.k_v,
        c_g_gh: q.c_g_gh,
        c_gh_g: q.c_gh_g,
        metric_error: q.metric_error,
        rho_bounded: q.rho_bounded_by_h(),
        jh_deviation: j.sup_deviation,
        jh_adjointness: j.adjointness_residual,
        trace_ratio: tr.max,
        inverse_ratio: inv.max,
    };
    Ok((row, q.to_csv(&cfg.hash())))
}

pub fn run_quality(cfg: &RunConfig) -> Result<Vec<QualityRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &r in &cfg.orders {
        for &h in &cfg.hs {
            rows.push(quality_on_mesh(cfg, &cfg.mesh(h)?, h, r)?.0);
        }
    }
    Ok(rows)
}

pub fn quality_csv(rows: &[QualityRow], hash: &str) -> String {
    let mut s = String::from(
        "# h,r,euler,h_max,K,K_prime,K_V,C_g_gh,C_gh_g,metric_error_linf,rho_le_h,jh_deviation,jh_adjointness,trace_ratio,inverse_ratio,config\n",
    );
    for q in rows {
        let _ = writeln!(
            s,
            "{:.3e},{},{},{:.6e},{:.6},{:.6},{:.6},{:.8},{:.8},{:.6e},{},{:.6e},{:.3e},{:.6},{:.6},{hash}",
            q.h,
            q.r,
            q.euler,
            q.h_max,
            q.k,
            q.k_prime,
            q.k_v,
            q.c_g_gh,
            q.c_gh_g,
            q.metric_error,
            q.rho_bounded,
            q.jh_deviation,
            q.jh_adjointness,
            q.trace_ratio,
            q.inverse_ratio
        );
    }
    s
}

/// Largest max/min ratio of a quantity over the rows of one order.
pub fn variation(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// Finite-difference check of `dF/dt = −½ b_h` for `samples` random test functions of degree 2.
pub fn shape_check(
    cfg: &RunConfig,
    mesh: &Mesh,
    r: usize,
    t: f64,
    dts: &[f64],
    samples: usize,
) -> Result<Vec<(usize, ShapeCheck)>> {
    let g = cfg.metric.analytic();
    let regge = ReggeSpace::new(mesh, r)?;
    let gh = regge.interpolate_metric(&g, cfg.quad_boost)?;
    let space = LagrangeSpace::new(mesh, 2)?;
    let opts = CurvatureOptions::for_degrees(2, r, cfg.quad_boost.max(10));
    let fa = boundary_frame_angle(mesh, g, opts.edge_points)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for k in 0..samples {
        let c: Vec<f64> = (0..space.ndof()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = space.field(c)?;
        for &dt in dts {
            out.push((k, shape_derivative_check(&g, &gh, &v, &fa, &opts, t, dt)?));
        }
    }
    Ok(out)
}

pub fn shape_check_csv(rows: &[(usize, ShapeCheck)], hash: &str) -> String {
    let mut s = String::from("# sample,t,dt,fd_derivative,minus_half_bh,residual,config\n");
    for (k, c) in rows {
        let _ = writeln!(
            s,
            "{k},{},{:.1e},{:.12e},{:.12e},{:.3e},{hash}",
            c.t,
            c.dt,
            c.fd_derivative,
            -0.5 * c.bh,
            c.residual
        );
    }
    s
}

/// Per-dof breakdown of `F` by source.
pub fn rhs_breakdown_csv(rhs: &CurvatureFunctional, hash: &str) -> String {
    rhs.to_csv(hash)
}
