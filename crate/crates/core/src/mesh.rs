//! Triangle meshes of immersions sampled on parameter grids, with OBJ, PLY and CSV writers.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::Write;
use std::path::Path;

use crate::curvature::curvature_of;
use crate::domain::{PathSpec, SurfacePoint};
use crate::error::{Error, Result};
use crate::gauss::{beltrami_magnitude_of, distortion_of, normal_of};
use crate::linalg::{re, Vec3};
use crate::quadrature::{gk_adaptive, QuadConfig};
use crate::weierstrass::{evaluate_immersion, normalized_margin, Immersion};

/// Names of the per-vertex fields, in file order.
pub const FIELD_NAMES: [&str; 4] = ["K", "distortion", "mu_abs", "margin"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshGrid {
    /// z = center + exp(rho + i theta), theta_j = 2 pi (j + theta_offset) / n_theta.
    LogPolar {
        #[serde(default)]
        center: Complex64,
        rho: (f64, f64),
        n_rho: usize,
        n_theta: usize,
        #[serde(default = "half")]
        theta_offset: f64,
    },
    Rect { re: (f64, f64), im: (f64, f64), nx: usize, ny: usize },
}

fn half() -> f64 {
    0.5
}

impl MeshGrid {
    pub fn log_polar(rho: (f64, f64), n_rho: usize, n_theta: usize) -> Self {
        MeshGrid::LogPolar { center: Complex64::new(0.0, 0.0), rho, n_rho, n_theta, theta_offset: 0.5 }
    }

    fn dims(&self) -> (usize, usize) {
        match self {
            MeshGrid::LogPolar { n_rho, n_theta, .. } => (*n_rho, *n_theta),
            MeshGrid::Rect { nx, ny, .. } => (*nx, *ny),
        }
    }

    fn periodic(&self) -> bool {
        matches!(self, MeshGrid::LogPolar { .. })
    }

    fn z(&self, i: usize, j: usize) -> Complex64 {
        let lerp = |r: (f64, f64), k: usize, n: usize| r.0 + (r.1 - r.0) * k as f64 / (n - 1) as f64;
        match self {
            MeshGrid::LogPolar { center, rho, n_rho, n_theta, theta_offset } => {
                let th = TAU * (j as f64 + theta_offset) / *n_theta as f64;
                center + Complex64::from_polar(lerp(*rho, i, *n_rho).exp(), th)
            }
            MeshGrid::Rect { re, im, nx, ny } => Complex64::new(lerp(*re, i, *nx), lerp(*im, j, *ny)),
        }
    }

    fn validate(&self) -> Result<()> {
        let (n1, n2) = self.dims();
        let ok = match self {
            MeshGrid::LogPolar { rho, n_theta, .. } => rho.0 < rho.1 && *n_theta >= 3,
            MeshGrid::Rect { re, im, ny, .. } => re.0 < re.1 && im.0 < im.1 && *ny >= 2,
        };
        if ok && n1 >= 2 && n2 >= 2 {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("degenerate mesh grid {self:?}")))
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    pub fields: Vec<(String, Vec<f64>)>,
    /// Parameter point of each vertex (empty for hand-built meshes).
    #[serde(default)]
    pub params: Vec<SurfacePoint>,
}

impl SurfaceMesh {
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        let bad = |why: &str| Err(Error::InvalidParameters(format!("invalid mesh: {why}")));
        if self.normals.len() != n {
            return bad("normal count");
        }
        if self.vertices.iter().any(|v| !v.iter().all(|x| x.is_finite())) {
            return bad("non-finite vertex");
        }
        if self.normals.iter().any(|v| (v.norm() - 1.0).abs() > 1e-6) {
            return bad("normal not unit");
        }
        if self.faces.iter().any(|f| f.iter().any(|&i| i as usize >= n)) {
            return bad("face index out of range");
        }
        if self.fields.iter().any(|(_, v)| v.len() != n) {
            return bad("field length");
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i as usize]);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

struct Layout {
    n1: usize,
    n2: usize,
    sheets: Vec<i8>,
    points: Vec<SurfacePoint>,
}

impl Layout {
    fn index(&self, s: usize, i: usize, j: usize) -> usize {
        (s * self.n1 + i) * self.n2 + j
    }

    fn unpack(&self, v: usize) -> (usize, usize, usize) {
        (v / (self.n1 * self.n2), (v / self.n2) % self.n1, v % self.n2)
    }
}

/// Neighbour of vertex `v` one step along the first (`dir = 0`) or second grid axis, on the
/// sheet reached by continuation.
fn neighbour(lay: &Layout, imm: &Immersion, grid: &MeshGrid, v: usize, dir: usize) -> Option<usize> {
    let (_, i, j) = lay.unpack(v);
    let (i2, j2) = if dir == 0 {
        (i + 1, j)
    } else if j + 1 < lay.n2 {
        (i, j + 1)
    } else if grid.periodic() {
        (i, 0)
    } else {
        return None;
    };
    if i2 >= lay.n1 {
        return None;
    }
    if lay.sheets.len() == 1 {
        return Some(lay.index(0, i2, j2));
    }
    let from = lay.points[v];
    let to = imm.data.domain.continue_to(&from, lay.points[lay.index(0, i2, j2)].z);
    let w = to.w?;
    (0..lay.sheets.len())
        .map(|s2| lay.index(s2, i2, j2))
        .min_by(|a, b| {
            let da = (lay.points[*a].w.unwrap() - w).norm();
            let db = (lay.points[*b].w.unwrap() - w).norm();
            da.total_cmp(&db)
        })
}

fn edge_integral(imm: &Immersion, from: &SurfacePoint, to: Complex64) -> Result<Vec3> {
    let d = to - from.z;
    let domain = &imm.data.domain;
    let r = gk_adaptive(
        |s: f64| {
            let p = domain.continue_to(from, from.z + d * s);
            let v = re(&imm.data.phi(&p).map(|c| c * d));
            [v[0], v[1], v[2]]
        },
        0.0,
        1.0,
        1e-12,
        1e-10,
        1 << 10,
    )?;
    Ok(Vec3::from(r.value))
}

/// Positions by integrating Phi along a breadth-first spanning tree of grid edges, rooted at
/// the vertex closest to the basepoint.
fn tree_positions(lay: &Layout, imm: &Immersion, nbrs: &[Vec<usize>], cfg: &QuadConfig) -> Result<Vec<Vec3>> {
    let n = lay.points.len();
    let root = (0..n)
        .filter(|&v| lay.unpack(v).0 == 0)
        .min_by(|a, b| {
            let da = (lay.points[*a].z - imm.basepoint.z).norm();
            let db = (lay.points[*b].z - imm.basepoint.z).norm();
            da.total_cmp(&db)
        })
        .unwrap();
    // the straight path from the basepoint may cross a slit: take the vertex on the sheet
    // that continuation actually reaches
    let target = lay.points[root].z;
    let mut end = imm.basepoint;
    for k in 1..=256 {
        let z = imm.basepoint.z + (target - imm.basepoint.z) * (k as f64 / 256.0);
        end = imm.data.domain.continue_to(&end, z);
    }
    let (_, i, j) = lay.unpack(root);
    let root = (0..lay.sheets.len())
        .map(|s| lay.index(s, i, j))
        .find(|&v| match (lay.points[v].w, end.w) {
            (Some(a), Some(b)) => (a - b).norm() <= 1e-8 * (1.0 + a.norm()),
            _ => true,
        })
        .ok_or(Error::BranchTrackingFailed { z: target })?;
    let path = PathSpec::new(vec![imm.basepoint, lay.points[root]], false);
    let mut pos = vec![Vec3::from_element(f64::NAN); n];
    pos[root] = if (imm.basepoint.z - lay.points[root].z).norm() == 0.0 {
        imm.base_value
    } else {
        evaluate_immersion(imm, &path, cfg)?
    };
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut frontier = vec![root];
    while !frontier.is_empty() {
        let mut claims: Vec<(usize, usize)> = Vec::new();
        let mut claimed = vec![false; n];
        for &u in &frontier {
            for &v in &nbrs[u] {
                if !seen[v] && !claimed[v] {
                    claimed[v] = true;
                    claims.push((u, v));
                }
            }
        }
        let done: Vec<(usize, Vec3)> = claims
            .par_iter()
            .filter_map(|&(u, v)| {
                let dx = edge_integral(imm, &lay.points[u], lay.points[v].z).ok()?;
                Some((v, pos[u] + dx))
            })
            .collect();
        frontier = Vec::with_capacity(done.len());
        for (v, x) in done {
            seen[v] = true;
            pos[v] = x;
            frontier.push(v);
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::NonConvergent(format!("mesh vertex z={} unreachable by grid integration", lay.points[v].z)));
    }
    Ok(pos)
}

/// Samples `imm` on `grid`, on every sheet of the surface. Vertices come from the closed form
/// when there is one and from spanning-tree integration otherwise; on the elliptic curve the
/// two sheets are glued across the slits by continuing w along grid edges.
pub fn sample_mesh(imm: &Immersion, grid: &MeshGrid, cfg: &QuadConfig) -> Result<SurfaceMesh> {
    grid.validate()?;
    let domain = &imm.data.domain;
    let (n1, n2) = grid.dims();
    let sheets = domain.sheets().to_vec();
    let mut points = Vec::with_capacity(sheets.len() * n1 * n2);
    for &s in &sheets {
        for i in 0..n1 {
            for j in 0..n2 {
                points.push(domain.lift(grid.z(i, j), s)?);
            }
        }
    }
    let lay = Layout { n1, n2, sheets, points };
    let n = lay.points.len();
    let samples: Vec<(Vec3, [f64; 4])> = lay
        .points
        .par_iter()
        .map(|p| {
            let phi = imm.data.phi(p);
            let margin = normalized_margin(&phi);
            let normal = normal_of(&phi).ok_or(Error::NotImmersion { witness: *p, margin })?;
            let k = curvature_of(&phi, &imm.data.dphi(p)).map_or(f64::NAN, |c| c.k);
            Ok((normal, [k, distortion_of(&phi), beltrami_magnitude_of(&phi), margin]))
        })
        .collect::<Result<_>>()?;
    let step: Vec<[Option<usize>; 2]> =
        (0..n).into_par_iter().map(|v| [neighbour(&lay, imm, grid, v, 0), neighbour(&lay, imm, grid, v, 1)]).collect();
    let mut faces = Vec::with_capacity(2 * n);
    for v in 0..n {
        let (Some(v10), Some(v01)) = (step[v][0], step[v][1]) else { continue };
        let Some(v11) = step[v10][1] else { continue };
        let f = |i: usize| i as u32;
        faces.push([f(v), f(v10), f(v11)]);
        faces.push([f(v), f(v11), f(v01)]);
    }
    let vertices = match &imm.closed_form {
        Some(x) => lay.points.par_iter().map(|p| x(p)).collect(),
        None => {
            let mut nbrs = vec![Vec::new(); n];
            for v in 0..n {
                for u in step[v].iter().flatten() {
                    nbrs[v].push(*u);
                    nbrs[*u].push(v);
                }
            }
            tree_positions(&lay, imm, &nbrs, cfg)?
        }
    };
    let fields = FIELD_NAMES
        .iter()
        .enumerate()
        .map(|(k, name)| (name.to_string(), samples.iter().map(|s| s.1[k]).collect()))
        .collect();
    let mesh = SurfaceMesh {
        vertices,
        normals: samples.iter().map(|s| s.0).collect(),
        faces,
        fields,
        params: lay.points,
    };
    mesh.validate()?;
    Ok(mesh)
}

/// printf-style %.{digits}g.
pub fn format_g(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let strip = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip(mant), sign, exp.abs())
    } else {
        strip(&format!("{:.*}", (p as i32 - 1 - exp) as usize, x))
    }
}

pub fn write_obj<W: Write>(mesh: &SurfaceMesh, out: &mut W) -> Result<()> {
    let g = |x: f64| format_g(x, 9);
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", g(v[0]), g(v[1]), g(v[2]))?;
    }
    for n in &mesh.normals {
        writeln!(out, "vn {} {} {}", g(n[0]), g(n[1]), g(n[2]))?;
    }
    for f in &mesh.faces {
        let [a, b, c] = f.map(|i| i + 1);
        writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}")?;
    }
    Ok(())
}

pub fn write_ply<W: Write>(mesh: &SurfaceMesh, out: &mut W) -> Result<()> {
    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    header += &format!("element vertex {}\n", mesh.vertices.len());
    for p in ["x", "y", "z", "nx", "ny", "nz"] {
        header += &format!("property float {p}\n");
    }
    for (name, _) in &mesh.fields {
        header += &format!("property float {name}\n");
    }
    header += &format!("element face {}\nproperty list uchar int vertex_indices\nend_header\n", mesh.faces.len());
    out.write_all(header.as_bytes())?;
    let mut buf = Vec::with_capacity(4 * (6 + mesh.fields.len()) * mesh.vertices.len() + 13 * mesh.faces.len());
    for (k, (v, n)) in mesh.vertices.iter().zip(&mesh.normals).enumerate() {
        for x in v.iter().chain(n.iter()) {
            buf.extend_from_slice(&(*x as f32).to_le_bytes());
        }
        for (_, f) in &mesh.fields {
            buf.extend_from_slice(&(f[k] as f32).to_le_bytes());
        }
    }
    for f in &mesh.faces {
        buf.push(3u8);
        for i in f {
            buf.extend_from_slice(&(*i as i32).to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn write_csv<W: Write>(mesh: &SurfaceMesh, out: &mut W) -> Result<()> {
    let mut cols = vec!["x", "y", "z", "nx", "ny", "nz"];
    cols.extend(mesh.fields.iter().map(|(n, _)| n.as_str()));
    writeln!(out, "{}", cols.join(","))?;
    for (k, (v, n)) in mesh.vertices.iter().zip(&mesh.normals).enumerate() {
        let mut row: Vec<String> = v.iter().chain(n.iter()).map(|x| x.to_string()).collect();
        row.extend(mesh.fields.iter().map(|(_, f)| f[k].to_string()));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Ply,
    Csv,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::Ply),
            "csv" => Some(MeshFormat::Csv),
            _ => None,
        }
    }
}

pub fn export(mesh: &SurfaceMesh, path: &Path, format: MeshFormat) -> Result<()> {
    mesh.validate()?;
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    match format {
        MeshFormat::Obj => write_obj(mesh, &mut out)?,
        MeshFormat::Ply => write_ply(mesh, &mut out)?,
        MeshFormat::Csv => write_csv(mesh, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

/// Vertices of an OBJ file.
pub fn read_obj_vertices(text: &str) -> Result<Vec<Vec3>> {
    text.lines()
        .filter_map(|l| l.strip_prefix("v "))
        .map(|l| {
            let xs: Vec<f64> = l.split_whitespace().map(str::parse).collect::<std::result::Result<_, _>>().map_err(
                |e| Error::InvalidParameters(format!("bad OBJ vertex '{l}': {e}")),
            )?;
            if xs.len() != 3 {
                return Err(Error::InvalidParameters(format!("bad OBJ vertex '{l}'")));
            }
            Ok(Vec3::new(xs[0], xs[1], xs[2]))
        })
        .collect()
}
