//! Sampled scalar functions on rectangles of the vertical plane `V0`.
//!
//! A [`GraphGrid`] holds node samples of a graph function `f(x, z)` together
//! with an optional per-cell singular mask marking cells that straddle a known
//! singular curve. Finite differences never reach across masked cells: nodes
//! next to the singular set fall back to one-sided stencils on their own side,
//! which keeps derivative fields clean up to the curve even when `∂_z f`
//! blows up there.

use crate::error::{Error, Result};
use crate::heis::Point;
use serde::{Deserialize, Serialize};

/// Domain rectangle and sample counts shared by grids and derived fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub x0: f64,
    pub x1: f64,
    pub z0: f64,
    pub z1: f64,
    pub nx: usize,
    pub nz: usize,
}

impl GridHeader {
    pub fn new(x0: f64, x1: f64, z0: f64, z1: f64, nx: usize, nz: usize) -> Result<Self> {
        if !(x1 > x0 && z1 > z0) {
            return Err(Error::InvalidGrid("domain rectangle is degenerate".into()));
        }
        if nx < 2 || nz < 2 {
            return Err(Error::InvalidGrid("need at least 2 nodes per axis".into()));
        }
        if ![x0, x1, z0, z1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite domain bounds".into()));
        }
        Ok(GridHeader { x0, x1, z0, z1, nx, nz })
    }

    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn hz(&self) -> f64 {
        (self.z1 - self.z0) / (self.nz - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x0 + ix as f64 * self.hx()
    }

    pub fn z(&self, iz: usize) -> f64 {
        self.z0 + iz as f64 * self.hz()
    }

    pub fn idx(&self, ix: usize, iz: usize) -> usize {
        ix * self.nz + iz
    }

    pub fn n_nodes(&self) -> usize {
        self.nx * self.nz
    }

    pub fn n_cells(&self) -> usize {
        (self.nx - 1) * (self.nz - 1)
    }

    pub fn cell_idx(&self, cx: usize, cz: usize) -> usize {
        cx * (self.nz - 1) + cz
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hz()
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.z1 - self.z0)
    }

    pub fn contains(&self, x: f64, z: f64) -> bool {
        x >= self.x0 - 1e-12 && x <= self.x1 + 1e-12 && z >= self.z0 - 1e-12 && z <= self.z1 + 1e-12
    }
}

/// Node samples of a graph function on `V0`, row-major with the x index as
/// the row: `values[ix * nz + iz]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphGrid {
    pub header: GridHeader,
    pub values: Vec<f64>,
    /// Per-cell singular flags, `mask[cx * (nz-1) + cz]`.
    pub mask: Option<Vec<bool>>,
}

/// A scalar field sampled on the same node lattice as some grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub header: GridHeader,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(header: GridHeader, c: f64) -> Self {
        ScalarField { header, values: vec![c; header.n_nodes()] }
    }

    pub fn from_fn(header: GridHeader, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(header.n_nodes());
        for ix in 0..header.nx {
            for iz in 0..header.nz {
                values.push(f(header.x(ix), header.z(iz)));
            }
        }
        ScalarField { header, values }
    }

    pub fn at(&self, ix: usize, iz: usize) -> f64 {
        self.values[self.header.idx(ix, iz)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation at an interior point.
    pub fn interp(&self, x: f64, z: f64) -> Result<f64> {
        interp_values(&self.header, &self.values, x, z)
    }
}

fn interp_values(h: &GridHeader, values: &[f64], x: f64, z: f64) -> Result<f64> {
    if !h.contains(x, z) {
        return Err(Error::OutOfDomain(x, z));
    }
    let fx = ((x - h.x0) / h.hx()).clamp(0.0, (h.nx - 1) as f64);
    let fz = ((z - h.z0) / h.hz()).clamp(0.0, (h.nz - 1) as f64);
    let ix = (fx.floor() as usize).min(h.nx - 2);
    let iz = (fz.floor() as usize).min(h.nz - 2);
    let tx = fx - ix as f64;
    let tz = fz - iz as f64;
    let v00 = values[h.idx(ix, iz)];
    let v01 = values[h.idx(ix, iz + 1)];
    let v10 = values[h.idx(ix + 1, iz)];
    let v11 = values[h.idx(ix + 1, iz + 1)];
    Ok(v00 * (1.0 - tx) * (1.0 - tz) + v01 * (1.0 - tx) * tz + v10 * tx * (1.0 - tz) + v11 * tx * tz)
}

/// JSON form of a grid; field names are fixed for cross-language use.
#[derive(Serialize, Deserialize)]
struct GridJson {
    x0: f64,
    x1: f64,
    z0: f64,
    z1: f64,
    nx: usize,
    nz: usize,
    values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    singular_mask: Option<Vec<bool>>,
}

impl GraphGrid {
    pub fn new(header: GridHeader, values: Vec<f64>, mask: Option<Vec<bool>>) -> Result<Self> {
        if values.len() != header.n_nodes() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                header.n_nodes(),
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite sample".into()));
        }
        if let Some(m) = &mask {
            if m.len() != header.n_cells() {
                return Err(Error::InvalidGrid(format!(
                    "expected {} mask cells, got {}",
                    header.n_cells(),
                    m.len()
                )));
            }
        }
        Ok(GraphGrid { header, values, mask })
    }

    pub fn from_fn(header: GridHeader, f: impl Fn(f64, f64) -> f64) -> Self {
        let field = ScalarField::from_fn(header, f);
        GraphGrid { header, values: field.values, mask: None }
    }

    pub fn at(&self, ix: usize, iz: usize) -> f64 {
        self.values[self.header.idx(ix, iz)]
    }

    pub fn as_field(&self) -> ScalarField {
        ScalarField { header: self.header, values: self.values.clone() }
    }

    pub fn cell_masked(&self, cx: usize, cz: usize) -> bool {
        match &self.mask {
            Some(m) => m[self.header.cell_idx(cx, cz)],
            None => false,
        }
    }

    pub fn has_mask(&self) -> bool {
        self.mask.as_ref().map_or(false, |m| m.iter().any(|&b| b))
    }

    /// True when any cell touching the node is masked. Derivative values at
    /// such nodes sit next to the singular set and are excluded from
    /// smooth-order accuracy claims.
    pub fn node_touches_mask(&self, ix: usize, iz: usize) -> bool {
        if self.mask.is_none() {
            return false;
        }
        let h = &self.header;
        for cx in ix.saturating_sub(1)..=ix.min(h.nx - 2) {
            for cz in iz.saturating_sub(1)..=iz.min(h.nz - 2) {
                if self.cell_masked(cx, cz) {
                    return true;
                }
            }
        }
        false
    }

    /// Bilinear interpolation of the graph function.
    pub fn interp(&self, x: f64, z: f64) -> Result<f64> {
        interp_values(&self.header, &self.values, x, z)
    }

    /// Mask the cells whose closed z-extent straddles the curve `z = γ(x)`
    /// over the cell's x-span, with ties resolved downward so a curve lying
    /// exactly on a node row masks a single cell row.
    pub fn mask_curve(&mut self, gamma: impl Fn(f64) -> f64) {
        let h = self.header;
        let mut mask = vec![false; h.n_cells()];
        for cx in 0..h.nx - 1 {
            let xs = [h.x(cx), 0.5 * (h.x(cx) + h.x(cx + 1)), h.x(cx + 1)];
            let mut gmin = f64::INFINITY;
            let mut gmax = f64::NEG_INFINITY;
            for &x in &xs {
                let g = gamma(x);
                gmin = gmin.min(g);
                gmax = gmax.max(g);
            }
            for cz in 0..h.nz - 1 {
                let zlo = h.z(cz);
                let zhi = h.z(cz + 1);
                if gmax > zlo && gmin <= zhi {
                    mask[h.cell_idx(cx, cz)] = true;
                }
            }
        }
        self.mask = Some(mask);
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(GridJson {
            x0: self.header.x0,
            x1: self.header.x1,
            z0: self.header.z0,
            z1: self.header.z1,
            nx: self.header.nx,
            nz: self.header.nz,
            values: self.values.clone(),
            singular_mask: self.mask.clone(),
        })
        .expect("grid serialization cannot fail")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let g: GridJson = serde_json::from_value(v.clone())?;
        let header = GridHeader::new(g.x0, g.x1, g.z0, g.z1, g.nx, g.nz)?;
        GraphGrid::new(header, g.values, g.singular_mask)
    }

    /// Graph map `Ψ_f(v) = v·Y^{f(v)} = (x, f, z + x f/2)` at a `V0` point,
    /// with `f` bilinearly interpolated.
    pub fn psi(&self, v: Point) -> Result<Point> {
        let f = self.interp(v.x, v.z)?;
        Ok(Point::new(v.x, f, v.z + 0.5 * v.x * f))
    }
}

/// Integration region inside a grid domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Full,
    Rect { x0: f64, x1: f64, z0: f64, z1: f64 },
    /// Per-cell weights in `[0,1]`, same layout as the singular mask.
    Cells(Vec<f64>),
}

impl Region {
    /// Overlap area of one grid cell with the region.
    pub fn cell_weight(&self, h: &GridHeader, cx: usize, cz: usize) -> f64 {
        match self {
            Region::Full => h.cell_area(),
            Region::Rect { x0, x1, z0, z1 } => {
                let ax = (h.x(cx + 1).min(*x1) - h.x(cx).max(*x0)).max(0.0);
                let az = (h.z(cz + 1).min(*z1) - h.z(cz).max(*z0)).max(0.0);
                ax * az
            }
            Region::Cells(w) => w[h.cell_idx(cx, cz)] * h.cell_area(),
        }
    }

    pub fn area(&self, h: &GridHeader) -> f64 {
        let mut a = 0.0;
        for cx in 0..h.nx - 1 {
            for cz in 0..h.nz - 1 {
                a += self.cell_weight(h, cx, cz);
            }
        }
        a
    }
}

/// Direction of a one-dimensional stencil axis.
#[derive(Clone, Copy, PartialEq)]
enum Axis {
    X,
    Z,
}

/// Finite differences with the masked-stencil policy: centered in the
/// interior, second-order one-sided at domain boundaries, first-order
/// one-sided next to masked cells. No stencil ever spans a masked cell: a
/// stencil over nodes `i..j` crosses the singular set when any masked cell
/// lies in that span next to the node's transverse coordinate, and longer
/// one-sided stencils shrink to first order before they would cross.
fn diff(grid_mask: &GraphGrid, src: &ScalarField, axis: Axis) -> ScalarField {
    let h = src.header;
    let (n_along, n_across) = match axis {
        Axis::X => (h.nx, h.nz),
        Axis::Z => (h.nz, h.nx),
    };
    let step = match axis {
        Axis::X => h.hx(),
        Axis::Z => h.hz(),
    };
    let at = |ia: usize, ic: usize| -> f64 {
        match axis {
            Axis::X => src.at(ia, ic),
            Axis::Z => src.at(ic, ia),
        }
    };
    // Is the unit move from node `ia` to `ia+1` (along the axis, at
    // transverse node index `ic`) free of masked cells?
    let move_clean = |ia: usize, ic: usize| -> bool {
        if grid_mask.mask.is_none() {
            return true;
        }
        let lo = ic.saturating_sub(1);
        let hi = ic.min(n_across - 2);
        for c in lo..=hi {
            let masked = match axis {
                Axis::X => grid_mask.cell_masked(ia, c),
                Axis::Z => grid_mask.cell_masked(c, ia),
            };
            if masked {
                return false;
            }
        }
        true
    };

    let mut out = vec![0.0; h.n_nodes()];
    for ic in 0..n_across {
        for ia in 0..n_along {
            let fwd_ok = ia + 1 < n_along && move_clean(ia, ic);
            let bwd_ok = ia > 0 && move_clean(ia - 1, ic);
            let fwd2_ok = fwd_ok && ia + 2 < n_along && move_clean(ia + 1, ic);
            let bwd2_ok = bwd_ok && ia >= 2 && move_clean(ia - 2, ic);
            let d = if fwd_ok && bwd_ok {
                (at(ia + 1, ic) - at(ia - 1, ic)) / (2.0 * step)
            } else if fwd2_ok {
                (-3.0 * at(ia, ic) + 4.0 * at(ia + 1, ic) - at(ia + 2, ic)) / (2.0 * step)
            } else if bwd2_ok {
                (3.0 * at(ia, ic) - 4.0 * at(ia - 1, ic) + at(ia - 2, ic)) / (2.0 * step)
            } else if fwd_ok {
                (at(ia + 1, ic) - at(ia, ic)) / step
            } else if bwd_ok {
                (at(ia, ic) - at(ia - 1, ic)) / step
            } else {
                0.0
            };
            let idx = match axis {
                Axis::X => h.idx(ia, ic),
                Axis::Z => h.idx(ic, ia),
            };
            out[idx] = d;
        }
    }
    ScalarField { header: h, values: out }
}

/// `∂_x w` with the grid's stencil policy.
pub fn diff_x(grid: &GraphGrid, w: &ScalarField) -> Result<ScalarField> {
    if w.header != grid.header {
        return Err(Error::GridMismatch);
    }
    Ok(diff(grid, w, Axis::X))
}

/// `∂_z w` with the grid's stencil policy.
pub fn diff_z(grid: &GraphGrid, w: &ScalarField) -> Result<ScalarField> {
    if w.header != grid.header {
        return Err(Error::GridMismatch);
    }
    Ok(diff(grid, w, Axis::Z))
}

/// Pointwise combination helpers.
pub fn zip(a: &ScalarField, b: &ScalarField, op: impl Fn(f64, f64) -> f64) -> ScalarField {
    assert_eq!(a.header, b.header);
    ScalarField {
        header: a.header,
        values: a.values.iter().zip(&b.values).map(|(&x, &y)| op(x, y)).collect(),
    }
}

pub fn map(a: &ScalarField, op: impl Fn(f64) -> f64) -> ScalarField {
    ScalarField { header: a.header, values: a.values.iter().map(|&x| op(x)).collect() }
}

/// Midpoint-rule quadrature: the integrand is evaluated on cell-averaged
/// field values, and each cell contributes its overlap area with the region.
pub fn integrate_cells(
    h: &GridHeader,
    region: &Region,
    cell_value: impl Fn(usize, usize) -> f64,
) -> Result<f64> {
    let mut total = 0.0;
    let mut covered = 0.0;
    for cx in 0..h.nx - 1 {
        for cz in 0..h.nz - 1 {
            let w = region.cell_weight(h, cx, cz);
            if w > 0.0 {
                covered += w;
                total += w * cell_value(cx, cz);
            }
        }
    }
    if covered <= 0.0 {
        return Err(Error::EmptyRegion);
    }
    Ok(total)
}

/// Average of the four corner values of a cell.
pub fn cell_avg(field: &ScalarField, cx: usize, cz: usize) -> f64 {
    0.25 * (field.at(cx, cz) + field.at(cx + 1, cz) + field.at(cx, cz + 1) + field.at(cx + 1, cz + 1))
}
