//! File formats: invariant grids and reports as JSON, meshes as Wavefront OBJ.
//!
//! Floating-point numbers are always written with 17 significant digits so
//! files round-trip exactly and identical runs produce identical bytes.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::bonnet::SurfaceMesh;
use crate::canonical::{InvariantGrid, InvariantMode};
use crate::catalog::Vec3;
use crate::error::{Error, Result};
use crate::numerics::{BaseIndex, Grid2, GridSpec, ScalarGrid};

pub const INVARIANT_FORMAT: &str = "invariant-grid/1";

/// Compact JSON with every float in `{:.16e}` form.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serialize with 17 significant digits, followed by a newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct InvariantFile {
    format: String,
    mode: InvariantMode,
    nu: [usize; 2],
    origin: [f64; 2],
    spacing: [f64; 2],
    base_index: [usize; 2],
    a: f64,
    b: f64,
    field1: Vec<f64>,
    field2: Vec<f64>,
}

pub fn invariant_grid_to_json(inv: &InvariantGrid) -> Result<String> {
    let spec = inv.spec();
    let base = inv.base();
    to_json(&InvariantFile {
        format: INVARIANT_FORMAT.into(),
        mode: inv.mode(),
        nu: [spec.nu, spec.nv],
        origin: [spec.u0, spec.v0],
        spacing: [spec.du, spec.dv],
        base_index: [base.i, base.j],
        a: inv.a(),
        b: inv.b(),
        field1: inv.field1().values.clone(),
        field2: inv.field2().values.clone(),
    })
}

pub fn invariant_grid_from_json(text: &str) -> Result<InvariantGrid> {
    let file: InvariantFile = serde_json::from_str(text)?;
    if file.format != INVARIANT_FORMAT {
        return Err(Error::Invalid(format!("unsupported format `{}`, expected `{INVARIANT_FORMAT}`", file.format)));
    }
    let spec = GridSpec::new(file.nu[0], file.nu[1], file.origin[0], file.origin[1], file.spacing[0], file.spacing[1])?;
    let base = BaseIndex::new(file.base_index[0], file.base_index[1], &spec)?;
    let field1 = ScalarGrid::new(spec, file.field1)?;
    let field2 = ScalarGrid::new(spec, file.field2)?;
    InvariantGrid::new(file.mode, field1, field2, file.a, file.b, base)
}

pub fn write_invariant_grid(path: &Path, inv: &InvariantGrid) -> Result<()> {
    std::fs::write(path, invariant_grid_to_json(inv)?)?;
    Ok(())
}

pub fn read_invariant_grid(path: &Path) -> Result<InvariantGrid> {
    invariant_grid_from_json(&std::fs::read_to_string(path)?)
}

/// Wavefront OBJ: one `v` line per node in row-major order (`u` fastest),
/// optional `vn` lines in the same order, and two triangles per grid cell.
/// A leading comment records the parameter grid.
pub fn mesh_to_obj(mesh: &SurfaceMesh, with_normals: bool) -> String {
    let spec = mesh.spec();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# grid {} {} {:.16e} {:.16e} {:.16e} {:.16e}",
        spec.nu, spec.nv, spec.u0, spec.v0, spec.du, spec.dv
    );
    for p in &mesh.positions.values {
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
    }
    let normals = mesh.normals.as_ref().filter(|_| with_normals);
    if let Some(ns) = normals {
        for n in &ns.values {
            let _ = writeln!(out, "vn {:.16e} {:.16e} {:.16e}", n.x, n.y, n.z);
        }
    }
    let idx = |i: usize, j: usize| 1 + i + spec.nu * j;
    for j in 0..spec.nv - 1 {
        for i in 0..spec.nu - 1 {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            for [p, q, r] in [[a, b, c], [a, c, d]] {
                if normals.is_some() {
                    let _ = writeln!(out, "f {p}//{p} {q}//{q} {r}//{r}");
                } else {
                    let _ = writeln!(out, "f {p} {q} {r}");
                }
            }
        }
    }
    out
}

pub fn write_obj(path: &Path, mesh: &SurfaceMesh, with_normals: bool) -> Result<()> {
    std::fs::write(path, mesh_to_obj(mesh, with_normals))?;
    Ok(())
}

/// Contents of an OBJ file; faces are zero-based vertex indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObjData {
    pub grid: Option<GridSpec>,
    pub vertices: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl ObjData {
    /// The mesh on its recorded grid.
    pub fn to_mesh(&self) -> Result<SurfaceMesh> {
        let spec = self.grid.ok_or_else(|| Error::Invalid("OBJ file has no grid comment".into()))?;
        let positions = Grid2::new(spec, self.vertices.clone())?;
        let normals = if self.normals.is_empty() { None } else { Some(Grid2::new(spec, self.normals.clone())?) };
        Ok(SurfaceMesh { positions, normals })
    }
}

fn parse_floats<const N: usize>(parts: &[&str], line: usize) -> Result<[f64; N]> {
    let bad = || Error::Invalid(format!("OBJ line {line}: expected {N} numbers"));
    if parts.len() < N {
        return Err(bad());
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| bad())?;
    }
    Ok(out)
}

pub fn parse_obj(text: &str) -> Result<ObjData> {
    let mut data = ObjData::default();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let parts: Vec<&str> = raw.split_whitespace().collect();
        match parts.as_slice() {
            ["#", "grid", rest @ ..] if rest.len() == 6 => {
                let bad = || Error::Invalid(format!("OBJ line {line}: malformed grid comment"));
                let nu: usize = rest[0].parse().map_err(|_| bad())?;
                let nv: usize = rest[1].parse().map_err(|_| bad())?;
                let [u0, v0, du, dv] = parse_floats::<4>(&rest[2..], line)?;
                data.grid = Some(GridSpec::new(nu, nv, u0, v0, du, dv)?);
            }
            ["v", rest @ ..] => {
                let [x, y, z] = parse_floats::<3>(rest, line)?;
                data.vertices.push(Vec3::new(x, y, z));
            }
            ["vn", rest @ ..] => {
                let [x, y, z] = parse_floats::<3>(rest, line)?;
                data.normals.push(Vec3::new(x, y, z));
            }
            ["f", a, b, c] => {
                let mut face = [0usize; 3];
                for (f, p) in face.iter_mut().zip([a, b, c]) {
                    let v = p.split('/').next().unwrap_or("");
                    let idx: usize =
                        v.parse().map_err(|_| Error::Invalid(format!("OBJ line {line}: bad face index `{p}`")))?;
                    if idx == 0 || idx > data.vertices.len() {
                        return Err(Error::Invalid(format!("OBJ line {line}: face index {idx} out of range")));
                    }
                    *f = idx - 1;
                }
                data.faces.push(face);
            }
            _ => {}
        }
    }
    Ok(data)
}

pub fn read_obj(path: &Path) -> Result<ObjData> {
    parse_obj(&std::fs::read_to_string(path)?)
}
