//! Triangle meshes and file output.
//!
//! Graph grids mesh with two triangles per cell, skipping cells flagged
//! singular so no triangle spans the nexus; ray fans mesh as ribbon strips
//! between consecutive rays sharing a parent. `.obj` files carry 1-based
//! indices and shortest round-trip float formatting, so identical inputs
//! produce byte-identical files.

use crate::error::{Error, Result};
use crate::grid::GraphGrid;
use crate::heis::Point;
use crate::zoo::rayfan::{Ray, RayFan, RayKind};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl Mesh {
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        for t in &self.triangles {
            if t[0] >= n || t[1] >= n || t[2] >= n {
                return Err(Error::InvalidSurface("triangle index out of range".into()));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidSurface("degenerate triangle".into()));
            }
        }
        Ok(())
    }
}

/// Mesh of a graph grid: vertices `Ψ_f(node)`, two triangles per cell,
/// masked cells skipped so the mesh seams along the singular curve.
pub fn mesh_from_grid(g: &GraphGrid) -> Mesh {
    let h = g.header;
    let mut vertices = Vec::with_capacity(h.n_nodes());
    for ix in 0..h.nx {
        for iz in 0..h.nz {
            let x = h.x(ix);
            let z = h.z(iz);
            let f = g.at(ix, iz);
            vertices.push([x, f, z + 0.5 * x * f]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * h.n_cells());
    for cx in 0..h.nx - 1 {
        for cz in 0..h.nz - 1 {
            if g.cell_masked(cx, cz) {
                continue;
            }
            let v00 = h.idx(cx, cz) as u32;
            let v01 = h.idx(cx, cz + 1) as u32;
            let v10 = h.idx(cx + 1, cz) as u32;
            let v11 = h.idx(cx + 1, cz + 1) as u32;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Mesh { vertices, triangles }
}

/// Mesh of a ray fan: ribbon strips between consecutive branch rays sharing
/// a parent, sector strips between consecutive fan rays, every vertex
/// exactly on its ray.
pub fn mesh_from_rayfan(
    fan: &RayFan,
    extent: f64,
    samples_per_ray: usize,
) -> Result<Mesh> {
    if fan.rays.is_empty() {
        return Err(Error::InvalidSurface("empty fan".into()));
    }
    assert!(samples_per_ray >= 1 && extent > 0.0);
    let mut mesh = Mesh { vertices: Vec::new(), triangles: Vec::new() };

    // group branch rays by (parent, side of the parent slope), ordered along
    // the parent; group fan rays by slope
    let mut groups: Vec<Vec<usize>> = Vec::new();
    {
        use std::collections::BTreeMap;
        let mut branch: BTreeMap<(usize, i8), Vec<usize>> = BTreeMap::new();
        for (i, r) in fan.rays.iter().enumerate() {
            if r.kind == RayKind::Branch {
                if let Some(p) = r.parent {
                    let ps = fan.rays[p].slope().unwrap_or(0.0) * fan.rays[p].a.signum();
                    let side = if r.slope().unwrap_or(f64::INFINITY) >= ps { 1i8 } else { -1 };
                    branch.entry((p, side)).or_default().push(i);
                }
            }
        }
        for ((p, _), mut members) in branch {
            // order by distance of the origin along the parent ray
            let parent = fan.rays[p];
            let along = |r: &Ray| -> f64 {
                if parent.a != 0.0 {
                    (r.origin.x - parent.origin.x) / parent.a
                } else {
                    (r.origin.y - parent.origin.y) / parent.b
                }
            };
            members.sort_by(|&i, &j| {
                along(&fan.rays[i]).partial_cmp(&along(&fan.rays[j])).unwrap()
            });
            groups.push(members);
        }
        let mut fans: Vec<usize> = fan
            .rays
            .iter()
            .enumerate()
            .filter(|(_, r)| r.kind == RayKind::Fan)
            .map(|(i, _)| i)
            .collect();
        fans.sort_by(|&i, &j| {
            let si = fan.rays[i].b.atan2(fan.rays[i].a);
            let sj = fan.rays[j].b.atan2(fan.rays[j].a);
            si.partial_cmp(&sj).unwrap()
        });
        if fans.len() >= 2 {
            groups.push(fans);
        }
    }

    for group in groups {
        if group.len() < 2 {
            continue;
        }
        let mut prev_row: Option<Vec<u32>> = None;
        for &ri in &group {
            let ray = fan.rays[ri];
            let mut row = Vec::with_capacity(samples_per_ray + 1);
            for k in 0..=samples_per_ray {
                let u = extent * k as f64 / samples_per_ray as f64;
                let p = ray.point(u);
                row.push(push_vertex(&mut mesh, p));
            }
            if let Some(prev) = prev_row {
                for k in 0..samples_per_ray {
                    let (a, b, c, d) = (prev[k], prev[k + 1], row[k + 1], row[k]);
                    if a != d {
                        mesh.triangles.push([a, b, d]);
                    }
                    if b != c {
                        mesh.triangles.push([b, c, d]);
                    }
                }
            }
            prev_row = Some(row);
        }
    }
    mesh.validate()?;
    Ok(mesh)
}

fn push_vertex(mesh: &mut Mesh, p: Point) -> u32 {
    // dedupe consecutive equal origins (strip seams share ray endpoints)
    for (i, v) in mesh.vertices.iter().enumerate().rev().take(4) {
        if v[0] == p.x && v[1] == p.y && v[2] == p.z {
            return i as u32;
        }
    }
    mesh.vertices.push([p.x, p.y, p.z]);
    (mesh.vertices.len() - 1) as u32
}

/// Write a mesh as Wavefront `.obj`: `v x y z` lines with shortest
/// round-trip float formatting, then `f i j k` with 1-based indices.
/// Deterministic byte output; writes through a temp file and renames.
pub fn write_obj(mesh: &Mesh, path: &Path) -> Result<()> {
    mesh.validate()?;
    let mut buf = String::new();
    for v in &mesh.vertices {
        buf.push_str(&format!("v {} {} {}\n", v[0], v[1], v[2]));
    }
    for t in &mesh.triangles {
        buf.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    write_atomic(path, buf.as_bytes())
}

/// Parse the `v` lines of an `.obj` written by [`write_obj`].
pub fn read_obj_vertices(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut out = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("v ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::InvalidSurface("malformed vertex line".into()));
            }
            let mut v = [0.0; 3];
            for (i, p) in parts.iter().enumerate() {
                v[i] = p
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidSurface("bad float in vertex".into()))?;
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// Cross-section plane for CSV output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SectionPlane {
    XEquals(f64),
    ZEquals(f64),
}

/// Section of a graph grid in a vertical plane, as CSV `s,y,z` rows: `s` is
/// the remaining `V0` coordinate, `(y, z)` the ambient section coordinates.
pub fn cross_section_grid(g: &GraphGrid, plane: SectionPlane, samples: usize) -> Result<Vec<[f64; 3]>> {
    assert!(samples >= 2);
    let h = g.header;
    let mut rows = Vec::with_capacity(samples);
    match plane {
        SectionPlane::XEquals(x) => {
            if x < h.x0 || x > h.x1 {
                return Err(Error::OutOfDomain(x, h.z0));
            }
            for k in 0..samples {
                let z = h.z0 + (h.z1 - h.z0) * k as f64 / (samples - 1) as f64;
                let f = g.interp(x, z)?;
                rows.push([z, f, z + 0.5 * x * f]);
            }
        }
        SectionPlane::ZEquals(zv) => {
            if zv < h.z0 || zv > h.z1 {
                return Err(Error::OutOfDomain(h.x0, zv));
            }
            for k in 0..samples {
                let x = h.x0 + (h.x1 - h.x0) * k as f64 / (samples - 1) as f64;
                let f = g.interp(x, zv)?;
                rows.push([x, f, zv + 0.5 * x * f]);
            }
        }
    }
    Ok(rows)
}

/// Section of a ray fan in the plane `{x = c}`: one point per ray crossing,
/// sorted by y.
pub fn cross_section_fan(fan: &RayFan, x: f64) -> Result<Vec<[f64; 3]>> {
    let mut rows = Vec::new();
    for r in &fan.rays {
        if r.a == 0.0 {
            continue;
        }
        let u = (x - r.origin.x) / r.a;
        if !(u >= 0.0) || !u.is_finite() {
            continue;
        }
        let p = r.point(u);
        rows.push([p.y, p.y, p.z]);
    }
    if rows.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    rows.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
    Ok(rows)
}

/// Write `s,y,z` rows as CSV with a fixed header.
pub fn write_csv(rows: &[[f64; 3]], path: &Path) -> Result<()> {
    let mut buf = String::from("s,y,z\n");
    for r in rows {
        buf.push_str(&format!("{},{},{}\n", r[0], r[1], r[2]));
    }
    write_atomic(path, buf.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridHeader;
    use crate::zoo::cantor::{make_cantor, IntervalComplement};
    use crate::zoo::make_herringbone;
    use crate::zoo::rayfan::{make_lambda_k, FanSampling};
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_mesh_counts() {
        let h = GridHeader::new(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let g = crate::zoo::make_plane(0.0, 0.0, h);
        let m = mesh_from_grid(&g);
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.triangles.len(), 2);

        let h = GridHeader::new(0.0, 1.0, 0.0, 1.0, 9, 7).unwrap();
        let g = crate::zoo::make_parabola(h);
        let m = mesh_from_grid(&g);
        assert_eq!(m.triangles.len(), 2 * 8 * 6);

        // one masked cell row drops 2(nx−1) triangles
        let h = GridHeader::new(0.0, 1.0, -1.0, 1.0, 9, 9).unwrap();
        let (hb, _) = make_herringbone(1.0, h).unwrap();
        let m = mesh_from_grid(&hb);
        assert_eq!(m.triangles.len(), 2 * 8 * 8 - 2 * 8);
        m.validate().unwrap();
    }

    #[test]
    fn grid_mesh_vertices_satisfy_the_graph_equation() {
        let h = GridHeader::new(-1.0, 1.0, -1.0, 1.0, 17, 17).unwrap();
        let g = crate::zoo::make_parabola(h);
        let m = mesh_from_grid(&g);
        for v in &m.vertices {
            let p = Point::new(v[0], v[1], v[2]);
            let proj = crate::heis::proj_cap_pi(p);
            let f = g.interp(proj.x, proj.z).unwrap();
            assert_abs_diff_eq!(v[1], f, epsilon = 1e-10);
        }
    }

    #[test]
    fn fan_mesh_vertices_lie_on_rays() {
        let k = make_cantor(1, 1.0).unwrap();
        let fan = make_lambda_k(&k, &FanSampling { extent: 1.0, branch_spacing: 0.25, fan_step: 0.2 });
        let m = mesh_from_rayfan(&fan, 1.5, 6).unwrap();
        assert!(!m.triangles.is_empty());
        for v in &m.vertices {
            let p = Point::new(v[0], v[1], v[2]);
            assert!(fan.rays.iter().any(|r| r.contains(p, 1e-9)), "vertex off rays");
        }
    }

    #[test]
    fn herringbone_fan_strips_share_the_nexus() {
        let k = IntervalComplement::new(0.5, vec![(-0.5, 0.5)]).unwrap();
        let fan = make_lambda_k(&k, &FanSampling { extent: 1.0, branch_spacing: 0.25, fan_step: 0.5 });
        let m = mesh_from_rayfan(&fan, 1.0, 4).unwrap();
        // each branch origin on R0 appears as a vertex of both side strips
        let mut r0_origins = 0;
        for r in &fan.rays {
            if r.parent == Some(0) && r.slope() == Some(0.5) {
                let o = r.origin;
                let hits = m
                    .vertices
                    .iter()
                    .filter(|v| v[0] == o.x && v[1] == o.y && v[2] == o.z)
                    .count();
                assert!(hits >= 1);
                r0_origins += 1;
            }
        }
        assert!(r0_origins > 0);
    }

    #[test]
    fn obj_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.obj");
        let mesh = Mesh {
            vertices: vec![
                [0.1 + 0.2, -1.0 / 3.0, 1e-17],
                [2.0f64.sqrt(), 1.0, 0.0],
                [0.0, 0.0, 5.0e300],
            ],
            triangles: vec![[0, 1, 2]],
        };
        write_obj(&mesh, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        let parsed = read_obj_vertices(&text).unwrap();
        for (a, b) in mesh.vertices.iter().zip(&parsed) {
            assert_eq!(a, b, "vertex round trip must be bit exact");
        }
        // determinism
        let path2 = dir.path().join("m2.obj");
        write_obj(&mesh, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
        // empty mesh: empty file, success
        let empty = Mesh { vertices: vec![], triangles: vec![] };
        let path3 = dir.path().join("empty.obj");
        write_obj(&empty, &path3).unwrap();
        assert_eq!(std::fs::read(&path3).unwrap().len(), 0);
    }

    #[test]
    fn cross_sections() {
        let dir = tempfile::tempdir().unwrap();
        // flat graph sectioned at x = 1: y ≡ 0
        let h = GridHeader::new(0.0, 2.0, -1.0, 1.0, 17, 17).unwrap();
        let g = crate::zoo::make_plane(0.0, 0.0, h);
        let rows = cross_section_grid(&g, SectionPlane::XEquals(1.0), 21).unwrap();
        for r in &rows {
            assert_eq!(r[1], 0.0);
        }
        // monotone parameter column
        for w in rows.windows(2) {
            assert!(w[1][0] > w[0][0]);
        }
        let path = dir.path().join("s.csv");
        write_csv(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("s,y,z\n"));
        assert_eq!(text.lines().count(), 22);

        // fan section: flat sectors of the cantor cone sit exactly on z = 0
        let k = make_cantor(2, 1.0).unwrap();
        let fan = make_lambda_k(&k, &FanSampling { extent: 2.0, branch_spacing: 0.5, fan_step: 0.05 });
        let rows = cross_section_fan(&fan, 1.0).unwrap();
        let mut flat = 0;
        for r in &rows {
            // fan rays through the origin keep z = 0 along the whole section
            if r[2] == 0.0 {
                flat += 1;
            }
        }
        assert!(flat > 10, "flat section points {flat}");
        for w in rows.windows(2) {
            assert!(w[1][0] >= w[0][0]);
        }
        assert!(cross_section_fan(&fan, f64::INFINITY).is_err());
    }
}
