//! Plain-text mesh files.
//!
//! ```text
//! regge-mesh v1
//! V E T
//! x y        (V lines)
//! i j k      (T lines, 0-based)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{build_topology, Mesh, MeshError};

const HEADER: &str = "regge-mesh v1";

/// Serializes with round-trip precision.
pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "{} {} {}", mesh.num_vertices(), mesh.num_edges(), mesh.num_triangles());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, write_mesh(mesh)).map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))
}

pub fn load_mesh(path: &Path) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path).map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))?;
    parse_mesh(&text)
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if header != HEADER {
        return Err(parse_err(ln, format!("expected header `{HEADER}`, found `{header}`")));
    }
    let (ln, counts) = lines.next().ok_or_else(|| parse_err(ln + 1, "missing count line"))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad count `{t}`"))))
        .collect::<Result<_, _>>()?;
    let [nv, ne, nt] = counts[..] else {
        return Err(parse_err(ln, "expected three counts `V E T`"));
    };

    let mut last = ln;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(last + 1, "unexpected end of file in vertex block"))?;
        last = ln;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad coordinate `{t}`"))))
            .collect::<Result<_, _>>()?;
        let [x, y] = xs[..] else {
            return Err(parse_err(ln, "expected two coordinates"));
        };
        if !x.is_finite() || !y.is_finite() {
            return Err(parse_err(ln, "non-finite coordinate"));
        }
        vertices.push([x, y]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(last + 1, "unexpected end of file in triangle block"))?;
        last = ln;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad vertex index `{t}`"))))
            .collect::<Result<_, _>>()?;
        let [a, b, c] = ids[..] else {
            return Err(parse_err(ln, "expected three vertex indices"));
        };
        triangles.push([a, b, c]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after triangle block"));
    }
    let mesh = build_topology(vertices, triangles)?;
    if mesh.num_edges() != ne {
        return Err(parse_err(
            2,
            format!("declared {ne} edges but the triangles define {}", mesh.num_edges()),
        ));
    }
    Ok(mesh)
}
