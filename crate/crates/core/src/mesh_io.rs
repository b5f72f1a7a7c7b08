//! Field ingestion and mesh export.
//!
//! Binary field layout, little-endian throughout:
//!
//! | offset | size | content |
//! |---|---|---|
//! | 0 | 4 | magic `ISOG` |
//! | 4 | 4 | `u32` version, currently 1 |
//! | 8 | 24 | `u64` nx, ny, nz |
//! | 32 | 8 * nx * ny * nz | `f64` cell values, row-major, `k` fastest |
//!
//! A binary field carries no geometry and loads on unit cells at the origin.
//! The text form starts with `nx ny nz dx dy dz ox oy oz` on the first line
//! followed by `nx * ny * nz` whitespace-separated values in the same order.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::Vector3;
use thiserror::Error;

use crate::scalar_grid::{CuboidPartition, GridError, VolumeFractionField};
use crate::surface_components::SurfaceTopology;
use crate::surface_geometry::{oriented_triangles, point_curvatures, AreaWeighting};
use crate::isopath_extract::IsoSurface;

pub const MAGIC: [u8; 4] = *b"ISOG";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported field format version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} values, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("{0} bytes of trailing data after the payload")]
    TrailingData(usize),
    #[error("invalid number {token:?} at value {index}")]
    Parse { index: usize, token: String },
    #[error("value {value} in cell {cell:?} is outside [0, 1]")]
    OutOfRange { cell: [usize; 3], value: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("mesh triangle {triangle} references vertex {vertex} of {count}")]
    IndexOutOfRange { triangle: usize, vertex: usize, count: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldEncoding {
    Binary,
    Text,
}

fn check_values(dims: [usize; 3], values: &[f64]) -> Result<(), MeshIoError> {
    let part = CuboidPartition::unit(dims)?;
    match values.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(i) => Err(MeshIoError::OutOfRange {
            cell: part.cell_coords(i),
            value: values[i],
        }),
        None => Ok(()),
    }
}

pub fn encode_binary(field: &VolumeFractionField) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.values.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for d in field.dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in &field.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<(VolumeFractionField, CuboidPartition), MeshIoError> {
    if bytes.len() < HEADER_LEN {
        return Err(MeshIoError::MalformedHeader(format!("{} header bytes, need {HEADER_LEN}", bytes.len())));
    }
    if bytes[..4] != MAGIC {
        return Err(MeshIoError::MalformedHeader("missing ISOG magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(MeshIoError::UnsupportedVersion(version));
    }
    let mut dims = [0usize; 3];
    for (a, d) in dims.iter_mut().enumerate() {
        let raw = u64::from_le_bytes(bytes[8 + 8 * a..16 + 8 * a].try_into().expect("8 bytes"));
        *d = usize::try_from(raw).map_err(|_| MeshIoError::MalformedHeader(format!("dimension {raw} too large")))?;
    }
    if dims.contains(&0) {
        return Err(MeshIoError::MalformedHeader(format!("zero dimension in {dims:?}")));
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| MeshIoError::MalformedHeader(format!("dimensions {dims:?} overflow")))?;
    let payload = &bytes[HEADER_LEN..];
    let available = payload.len() / 8;
    if available < count {
        return Err(MeshIoError::Truncated {
            expected: count,
            actual: available,
        });
    }
    if payload.len() > 8 * count {
        return Err(MeshIoError::TrailingData(payload.len() - 8 * count));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    check_values(dims, &values)?;
    let part = CuboidPartition::unit(dims)?;
    Ok((VolumeFractionField::new(dims, values)?, part))
}

/// Text encoding; values use the shortest round-trip representation.
pub fn encode_text(field: &VolumeFractionField, part: &CuboidPartition) -> String {
    let [nx, ny, nz] = field.dims;
    let (h, o) = (part.spacing, part.origin);
    let mut s = format!("{nx} {ny} {nz} {} {} {} {} {} {}\n", h.x, h.y, h.z, o.x, o.y, o.z);
    for row in field.values.chunks(field.dims[2]) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn decode_text(text: &str) -> Result<(VolumeFractionField, CuboidPartition), MeshIoError> {
    let mut lines = text.splitn(2, '\n');
    let header = lines.next().unwrap_or("");
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 9 {
        return Err(MeshIoError::MalformedHeader(format!(
            "expected `nx ny nz dx dy dz ox oy oz`, got {} fields",
            fields.len()
        )));
    }
    let mut dims = [0usize; 3];
    for a in 0..3 {
        dims[a] = fields[a]
            .parse()
            .map_err(|_| MeshIoError::MalformedHeader(format!("bad dimension {:?}", fields[a])))?;
    }
    let mut geo = [0f64; 6];
    for a in 0..6 {
        geo[a] = fields[3 + a]
            .parse()
            .map_err(|_| MeshIoError::MalformedHeader(format!("bad geometry value {:?}", fields[3 + a])))?;
    }
    let part = CuboidPartition::new(dims, Vector3::new(geo[3], geo[4], geo[5]), Vector3::new(geo[0], geo[1], geo[2]))?;
    let count = part.cell_count();
    let body = lines.next().unwrap_or("");
    let mut values = Vec::with_capacity(count);
    for (index, token) in body.split_whitespace().enumerate() {
        if index >= count {
            return Err(MeshIoError::TrailingData(body.split_whitespace().count() - count));
        }
        let v: f64 = token.parse().map_err(|_| MeshIoError::Parse {
            index,
            token: token.to_string(),
        })?;
        values.push(v);
    }
    if values.len() < count {
        return Err(MeshIoError::Truncated {
            expected: count,
            actual: values.len(),
        });
    }
    check_values(dims, &values)?;
    Ok((VolumeFractionField::new(dims, values)?, part))
}

/// Loads either encoding, chosen by the leading magic bytes.
pub fn read_field(path: impl AsRef<Path>) -> Result<(VolumeFractionField, CuboidPartition), MeshIoError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.starts_with(&MAGIC) {
        decode_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| MeshIoError::MalformedHeader("not ISOG and not UTF-8 text".into()))?;
        decode_text(&text)
    }
}

pub fn write_field(
    path: impl AsRef<Path>,
    field: &VolumeFractionField,
    part: &CuboidPartition,
    encoding: FieldEncoding,
) -> Result<(), MeshIoError> {
    let bytes = match encoding {
        FieldEncoding::Binary => encode_binary(field),
        FieldEncoding::Text => encode_text(field, part).into_bytes(),
    };
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Triangulated, oriented iso-surface ready for export.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub triangles: Vec<[usize; 3]>,
    /// Component of each triangle, numbered from 0 in component order.
    pub components: Vec<u32>,
    /// Area-weighted unit vertex normals.
    pub normals: Vec<Vector3<f64>>,
    pub curvature: Option<Vec<f64>>,
}

impl SurfaceMesh {
    /// Fans every element of an oriented surface. Triangles are grouped by component.
    pub fn from_surface(surface: &IsoSurface, topo: &SurfaceTopology) -> SurfaceMesh {
        let (vertices, tris, owner) = oriented_triangles(surface);
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let comp_of = |t: usize| topo.component_of[owner[t]] as u32;
        order.sort_by_key(|&t| comp_of(t));
        let triangles: Vec<[usize; 3]> = order.iter().map(|&t| tris[t].vertices).collect();
        let components = order.iter().map(|&t| comp_of(t)).collect();
        let mut mesh = SurfaceMesh {
            normals: vertex_normals(&vertices, &triangles),
            vertices,
            triangles,
            components,
            curvature: None,
        };
        mesh.compact();
        mesh
    }

    /// Attaches mean curvature at iso-points; fan centers and points without
    /// a single closed ring get NaN.
    pub fn attach_curvature(&mut self, surface: &IsoSurface, topo: &SurfaceTopology, weighting: AreaWeighting) {
        let hs = point_curvatures(surface, &topo.pairing, weighting);
        let mut channel = vec![f64::NAN; self.vertices.len()];
        for (slot, h) in channel.iter_mut().zip(&hs) {
            if let Some(e) = h {
                *slot = e.h;
            }
        }
        self.curvature = Some(channel);
    }

    /// Drops unreferenced vertices and renumbers triangles.
    pub fn compact(&mut self) {
        let mut used = vec![false; self.vertices.len()];
        for t in &self.triangles {
            for &v in t {
                used[v] = true;
            }
        }
        if used.iter().all(|&u| u) {
            return;
        }
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut next = 0;
        for (i, &u) in used.iter().enumerate() {
            if u {
                map[i] = next;
                next += 1;
            }
        }
        let keep = |v: &Vec<Vector3<f64>>| -> Vec<Vector3<f64>> {
            v.iter().zip(&used).filter(|(_, &u)| u).map(|(x, _)| *x).collect()
        };
        self.vertices = keep(&self.vertices);
        self.normals = keep(&self.normals);
        if let Some(c) = &self.curvature {
            self.curvature = Some(c.iter().zip(&used).filter(|(_, &u)| u).map(|(x, _)| *x).collect());
        }
        for t in &mut self.triangles {
            *t = t.map(|v| map[v]);
        }
    }

    pub fn validate(&self) -> Result<(), MeshIoError> {
        let count = self.vertices.len();
        for (triangle, t) in self.triangles.iter().enumerate() {
            if let Some(&vertex) = t.iter().find(|&&v| v >= count) {
                return Err(MeshIoError::IndexOutOfRange { triangle, vertex, count });
            }
        }
        Ok(())
    }

    pub fn component_count(&self) -> usize {
        self.components.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// `V - E + F` over the whole mesh.
    pub fn euler_characteristic(&self) -> i64 {
        euler_characteristic(self.vertices.len(), &self.triangles)
    }
}

pub fn euler_characteristic(vertex_count: usize, triangles: &[[usize; 3]]) -> i64 {
    let mut edges = std::collections::HashSet::new();
    for t in triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    vertex_count as i64 - edges.len() as i64 + triangles.len() as i64
}

pub fn vertex_normals(vertices: &[Vector3<f64>], triangles: &[[usize; 3]]) -> Vec<Vector3<f64>> {
    let mut n = vec![Vector3::zeros(); vertices.len()];
    for t in triangles {
        let w = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
        for &v in t {
            n[v] += w;
        }
    }
    n.into_iter().map(|x| if x.norm() > 0.0 { x.normalize() } else { x }).collect()
}

/// Provenance written into every mesh header.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshHeader {
    pub tool_version: String,
    pub iso: f64,
    pub eps: Option<f64>,
}

impl MeshHeader {
    pub fn new(iso: f64, eps: Option<f64>) -> Self {
        MeshHeader {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            iso,
            eps,
        }
    }

    fn line(&self) -> String {
        let eps = self.eps.map_or("none".to_string(), |e| format!("{e:e}"));
        format!("isograph {} iso={:?} eps={eps}", self.tool_version, self.iso)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_extension(path: &Path) -> Option<MeshFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::Ply),
            _ => None,
        }
    }
}

pub fn write_obj(mesh: &SurfaceMesh, header: &MeshHeader, out: &mut impl Write) -> Result<(), MeshIoError> {
    mesh.validate()?;
    writeln!(out, "# {}", header.line())?;
    for v in &mesh.vertices {
        writeln!(out, "v {:?} {:?} {:?}", v.x, v.y, v.z)?;
    }
    for n in &mesh.normals {
        writeln!(out, "vn {:?} {:?} {:?}", n.x, n.y, n.z)?;
    }
    let mut current = None;
    for (t, c) in mesh.triangles.iter().zip(&mesh.components) {
        if current != Some(*c) {
            writeln!(out, "g component_{c}")?;
            current = Some(*c);
        }
        let [a, b, d] = t.map(|v| v + 1);
        writeln!(out, "f {a}//{a} {b}//{b} {d}//{d}")?;
    }
    Ok(())
}

pub fn write_ply(mesh: &SurfaceMesh, header: &MeshHeader, out: &mut impl Write) -> Result<(), MeshIoError> {
    mesh.validate()?;
    writeln!(out, "ply")?;
    writeln!(out, "format binary_little_endian 1.0")?;
    writeln!(out, "comment {}", header.line())?;
    writeln!(out, "element vertex {}", mesh.vertices.len())?;
    for p in ["x", "y", "z", "nx", "ny", "nz"] {
        writeln!(out, "property float {p}")?;
    }
    if mesh.curvature.is_some() {
        writeln!(out, "property float curvature")?;
    }
    writeln!(out, "element face {}", mesh.triangles.len())?;
    writeln!(out, "property list uchar int vertex_indices")?;
    writeln!(out, "property int component_id")?;
    writeln!(out, "end_header")?;
    for (i, (v, n)) in mesh.vertices.iter().zip(&mesh.normals).enumerate() {
        for x in [v.x, v.y, v.z, n.x, n.y, n.z] {
            out.write_all(&(x as f32).to_le_bytes())?;
        }
        if let Some(c) = &mesh.curvature {
            out.write_all(&(c[i] as f32).to_le_bytes())?;
        }
    }
    for (t, c) in mesh.triangles.iter().zip(&mesh.components) {
        out.write_all(&[3u8])?;
        for v in t {
            out.write_all(&(*v as i32).to_le_bytes())?;
        }
        out.write_all(&(*c as i32).to_le_bytes())?;
    }
    Ok(())
}

pub fn write_mesh(mesh: &SurfaceMesh, header: &MeshHeader, format: MeshFormat, path: impl AsRef<Path>) -> Result<(), MeshIoError> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        MeshFormat::Obj => write_obj(mesh, header, &mut w)?,
        MeshFormat::Ply => write_ply(mesh, header, &mut w)?,
    }
    w.flush()?;
    Ok(())
}
