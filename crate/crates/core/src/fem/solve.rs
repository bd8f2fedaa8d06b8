//! Mean-zero constrained solve of `A u + λ m = F`, `m·u = 0`.
//!
//! `A` is the stiffness matrix, singular with kernel spanned by constants, and
//! `m` the volume functional. Solvability requires `F·1 = 0`.

use crate::{Error, Result};

use super::sparse::{permute_symmetric, reverse_cuthill_mckee, CsrMatrix, SkylineLdl};

/// Relative tolerance on `|F·1| / ‖F‖₁`.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

/// `F` is built from angles and curvature integrals of order one, so `|F·1|`
/// below this is roundoff even when `‖F‖₁` is itself at roundoff level.
pub const COMPATIBILITY_ABS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Envelope `LDLᵀ` of the bordered system after reverse Cuthill–McKee ordering.
    #[default]
    Direct,
    /// Jacobi-preconditioned conjugate gradients on the consistent singular system.
    Cg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedSolution {
    pub u: Vec<f64>,
    pub multiplier: f64,
    /// `‖A u + λ m − F‖∞ / max(‖F‖∞, max|A|)`.
    pub residual: f64,
    pub iterations: Option<usize>,
}

/// `|F·1| / ‖F‖₁`, zero for the zero functional.
pub fn compatibility_ratio(f: &[f64]) -> f64 {
    let l1: f64 = f.iter().map(|v| v.abs()).sum();
    if l1 == 0.0 {
        return 0.0;
    }
    f.iter().sum::<f64>().abs() / l1
}

pub fn is_compatible(f: &[f64]) -> bool {
    compatibility_ratio(f) <= COMPATIBILITY_TOL || f.iter().sum::<f64>().abs() <= COMPATIBILITY_ABS_FLOOR
}

pub fn check_compatibility(f: &[f64]) -> Result<()> {
    if !is_compatible(f) {
        return Err(Error::Compatibility {
            residual: f.iter().sum::<f64>().abs(),
            scale: f.iter().map(|v| v.abs()).sum(),
        });
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(a: &CsrMatrix, m: &[f64], f: &[f64], u: &[f64], lambda: f64) -> f64 {
    let au = a.mul_vec(u);
    let worst = au
        .iter()
        .zip(m)
        .zip(f)
        .map(|((x, mi), fi)| (x + lambda * mi - fi).abs())
        .fold(0.0, f64::max);
    let scale = f.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(a.max_abs());
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

pub fn solve_constrained(a: &CsrMatrix, m: &[f64], f: &[f64], kind: SolverKind) -> Result<ConstrainedSolution> {
    let n = a.dim();
    if m.len() != n || f.len() != n {
        return Err(Error::Solve(format!(
            "dimension mismatch: A is {n}×{n}, m has {}, F has {}",
            m.len(),
            f.len()
        )));
    }
    check_compatibility(f)?;
    let (u, multiplier, iterations) = match kind {
        SolverKind::Direct => {
            let (u, l) = solve_direct(a, m, f)?;
            (u, l, None)
        }
        SolverKind::Cg => {
            let (u, l, it) = solve_cg(a, m, f)?;
            (u, l, Some(it))
        }
    };
    let res = residual(a, m, f, &u, multiplier);
    Ok(ConstrainedSolution {
        u,
        multiplier,
        residual: res,
        iterations,
    })
}

fn solve_direct(a: &CsrMatrix, m: &[f64], f: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = a.dim();
    if n == 1 {
        // the only mean-zero function is zero
        return Ok((vec![0.0], f[0] / m[0]));
    }
    let perm = reverse_cuthill_mckee(a);
    let pa = permute_symmetric(a, &perm);
    let pm: Vec<f64> = perm.iter().map(|&i| m[i]).collect();
    let pf: Vec<f64> = perm.iter().map(|&i| f[i]).collect();
    let k = n - 1;
    // the leading block (constants removed by dropping one dof) is positive definite
    let ldl = SkylineLdl::factor(&pa, k)
        .map_err(|e| Error::Solve(format!("pivot {:e} at row {} of the reduced stiffness", e.pivot, e.row)))?;
    let mut b = vec![0.0; k];
    for (j, v) in pa.row(k) {
        if j < k {
            b[j] = v;
        }
    }
    let akk = pa.get(k, k);
    let zf = ldl.solve(&pf[..k]);
    let zb = ldl.solve(&b);
    let zm = ldl.solve(&pm[..k]);
    let mk = pm[k];
    let s11 = akk - dot(&b, &zb);
    let s12 = mk - dot(&b, &zm);
    let s21 = mk - dot(&pm[..k], &zb);
    let s22 = -dot(&pm[..k], &zm);
    let r1 = pf[k] - dot(&b, &zf);
    let r2 = -dot(&pm[..k], &zf);
    let det = s11 * s22 - s12 * s21;
    if !(det.abs() > 0.0) || !det.is_finite() {
        return Err(Error::Solve("bordered Schur complement is singular".into()));
    }
    let uk = (r1 * s22 - s12 * r2) / det;
    let lambda = (s11 * r2 - s21 * r1) / det;
    let mut pu = vec![0.0; n];
    for i in 0..k {
        pu[i] = zf[i] - zb[i] * uk - zm[i] * lambda;
    }
    pu[k] = uk;
    let mut u = vec![0.0; n];
    for (new, &old) in perm.iter().enumerate() {
        u[old] = pu[new];
    }
    Ok((u, lambda))
}

fn solve_cg(a: &CsrMatrix, m: &[f64], f: &[f64]) -> Result<(Vec<f64>, f64, usize)> {
    let n = a.dim();
    let total: f64 = m.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Solve("volume functional has non-positive total".into()));
    }
    // 1ᵀ(A u + λ m) = 1ᵀF fixes λ because 1ᵀA = 0
    let lambda = f.iter().sum::<f64>() / total;
    let rhs: Vec<f64> = f.iter().zip(m).map(|(fi, mi)| fi - lambda * mi).collect();
    let diag = a.diagonal();
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Solve("non-positive diagonal entry in stiffness".into()));
    }
    let mut u = vec![0.0; n];
    let mut r = rhs.clone();
    let norm0 = dot(&rhs, &rhs).sqrt();
    let mut iterations = 0;
    if norm0 > 0.0 {
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(x, d)| x / d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let max_iter = 20 * n + 100;
        loop {
            if dot(&r, &r).sqrt() <= 1e-14 * norm0 {
                break;
            }
            if iterations >= max_iter {
                return Err(Error::Solve(format!("conjugate gradients did not converge in {max_iter} iterations")));
            }
            let ap = a.mul_vec(&p);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let step = rz / pap;
            for i in 0..n {
                u[i] += step * p[i];
                r[i] -= step * ap[i];
            }
            z = r.iter().zip(&diag).map(|(x, d)| x / d).collect();
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            iterations += 1;
        }
    }
    let shift = dot(m, &u) / total;
    u.iter_mut().for_each(|v| *v -= shift);
    Ok((u, lambda, iterations))
}
