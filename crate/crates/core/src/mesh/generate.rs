//! Structured grids of right triangles with seeded interior perturbation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_topology, Mesh, MeshError};

const MAX_RETRIES: usize = 100;

/// Axis-aligned chart rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn square(half: f64) -> Self {
        Rect {
            x0: -half,
            x1: half,
            y0: -half,
            y1: half,
        }
    }
}

/// Uniform grid with `max(1, round(side / h))` cells per side, each cell split
/// along its rising diagonal; interior vertices are then moved by up to
/// `perturb · h` per coordinate.
///
/// A vertex whose move inverts a triangle is redrawn with half the amplitude.
pub fn generate_perturbed_grid(rect: Rect, h: f64, perturb: f64, seed: u64) -> Result<Mesh, MeshError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(MeshError::InvalidParameter(format!("mesh size must be positive, got {h}")));
    }
    if !(0.0..0.5).contains(&perturb) {
        return Err(MeshError::InvalidParameter(format!(
            "perturbation fraction must lie in [0, 0.5), got {perturb}"
        )));
    }
    let (wx, wy) = (rect.x1 - rect.x0, rect.y1 - rect.y0);
    if !(wx > 0.0 && wy > 0.0) {
        return Err(MeshError::InvalidParameter("empty rectangle".into()));
    }
    let nx = ((wx / h).round() as usize).max(1);
    let ny = ((wy / h).round() as usize).max(1);
    let (hx, hy) = (wx / nx as f64, wy / ny as f64);

    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut base = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { rect.x1 } else { rect.x0 + i as f64 * hx };
            let y = if j == ny { rect.y1 } else { rect.y0 + j as f64 * hy };
            base.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            // right-angle vertex first
            triangles.push([v10, v11, v00]);
            triangles.push([v01, v00, v11]);
        }
    }

    let interior: Vec<bool> = (0..=ny)
        .flat_map(|j| (0..=nx).map(move |i| i > 0 && i < nx && j > 0 && j < ny))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amplitude = vec![perturb; base.len()];
    let mut verts = base.clone();
    let draw = |verts: &mut Vec<[f64; 2]>, v: usize, amp: f64, rng: &mut ChaCha8Rng| {
        let dx = if amp > 0.0 { rng.gen_range(-amp..amp) } else { 0.0 };
        let dy = if amp > 0.0 { rng.gen_range(-amp..amp) } else { 0.0 };
        verts[v] = [base[v][0] + dx * h, base[v][1] + dy * h];
    };
    for v in 0..verts.len() {
        if interior[v] {
            draw(&mut verts, v, perturb, &mut rng);
        }
    }

    let min_area = 1e-3 * hx * hy;
    for _ in 0..=MAX_RETRIES {
        let bad: Vec<usize> = triangles
            .iter()
            .filter(|t| {
                let [a, b, c] = t.map(|v| verts[v]);
                (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]) <= min_area
            })
            .flat_map(|t| t.iter().copied().filter(|&v| interior[v]).collect::<Vec<_>>())
            .collect();
        if bad.is_empty() {
            return build_topology(verts, triangles);
        }
        let mut redrawn = vec![false; verts.len()];
        for v in bad {
            if !redrawn[v] {
                redrawn[v] = true;
                amplitude[v] *= 0.5;
                draw(&mut verts, v, amplitude[v], &mut rng);
            }
        }
    }
    Err(MeshError::InvertedAfterRetries { retries: MAX_RETRIES })
}
