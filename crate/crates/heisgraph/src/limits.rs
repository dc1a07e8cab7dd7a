//! Stretch-limit expansions and indicator convergence.
//!
//! Stretching a graph by `s_{r,r⁻¹}` multiplies its area by `r` at leading
//! order; the `r⁻³` coefficient of the remainder is the intrinsic Dirichlet
//! energy, with an `O(r⁻⁷)` tail. [`stretch_energy_fit`] measures the area of
//! the stretched grids directly and recovers the energy from the largest
//! stretch, leaving the tail order for the smaller ones.
//!
//! [`indicator_l1_distance`] compares the Y-epigraphs of two graphs over a
//! box by voxel counting: a point belongs to an epigraph iff its y-coordinate
//! is at least the graph value over its Π-projection.

use crate::calculus::area_excess;
use crate::error::{Error, Result};
use crate::grid::{GraphGrid, GridHeader, Region};
use crate::heis::{proj_cap_pi, Box3, Point};
use crate::variation::power_fit;
use crate::zoo::model::WedgeModel;
use serde::Serialize;

/// Result of the stretched-area fit.
#[derive(Debug, Clone, Serialize)]
pub struct StretchFit {
    pub mu_d: f64,
    /// Coefficient of `r⁻³`; recovers the energy.
    pub e_fit: f64,
    /// Log-log slope of the remainder over the smaller stretches.
    pub remainder_order: f64,
    /// `(r, S³(s_{r,r⁻¹}(graph)))` samples.
    pub samples: Vec<(f64, f64)>,
}

/// The image grid of `s_{r,r⁻¹}`: x-range scaled by `r`, values by `r⁻¹`,
/// the mask carried along cell-for-cell.
pub fn stretch_graph(g: &GraphGrid, r: f64) -> GraphGrid {
    let h = g.header;
    let header = GridHeader::new(r * h.x0, r * h.x1, h.z0, h.z1, h.nx, h.nz)
        .expect("scaling keeps the rectangle valid");
    GraphGrid {
        header,
        values: g.values.iter().map(|v| v / r).collect(),
        mask: g.mask.clone(),
    }
}

/// Fit `S³(s_{r,r⁻¹}(Γ)) = r·μ(D) + β·r⁻³ + O(r⁻⁷)` over the whole grid
/// domain. `β` comes from the largest stretch, where the tail is smallest;
/// the remainder order is fitted over the rest.
pub fn stretch_energy_fit(g: &GraphGrid, r_list: &[f64]) -> Result<StretchFit> {
    if r_list.len() < 2 {
        return Err(Error::InvalidSurface("need at least two stretch factors".into()));
    }
    let mut rs: Vec<f64> = r_list.to_vec();
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mu = g.header.area();
    let mut samples = Vec::with_capacity(rs.len());
    let mut excesses = Vec::with_capacity(rs.len());
    for &r in &rs {
        if !(r >= 2.0) {
            return Err(Error::InvalidSurface("stretch factors must be at least 2".into()));
        }
        let stretched = stretch_graph(g, r);
        // the stretched grid integrates over its own domain of measure r·μ(D),
        // so e(r) = S³ − r·μ(D) is its area excess, kept cancellation-free
        let e = area_excess(&stretched, &Region::Full)?;
        excesses.push((r, e));
        samples.push((r, r * mu + e));
    }
    let (r_max, e_max) = *excesses.last().unwrap();
    let beta = e_max * r_max.powi(3);
    let residuals: Vec<(f64, f64)> = excesses
        .iter()
        .take(excesses.len() - 1)
        .map(|&(r, e)| (r, e - beta / (r * r * r)))
        .collect();
    let (order, _) = power_fit(&residuals);
    Ok(StretchFit { mu_d: mu, e_fit: beta, remainder_order: order, samples })
}

/// A surface usable as an indicator over `V0`.
pub enum SurfaceIndicator {
    /// Exact fan-surface model.
    Model(WedgeModel),
    /// Sampled graph, bilinearly interpolated; the grid must cover the
    /// Π-projection of the queried box.
    Grid(GraphGrid),
    /// Vertical plane `f = m·x + c`.
    Plane { m: f64, c: f64 },
}

impl SurfaceIndicator {
    fn value(&self, x: f64, zeta: f64) -> Result<f64> {
        match self {
            SurfaceIndicator::Model(m) => Ok(m.eval(x, zeta)),
            SurfaceIndicator::Grid(g) => g.interp(x, zeta),
            SurfaceIndicator::Plane { m, c } => Ok(m * x + c),
        }
    }

    pub fn epigraph_contains(&self, p: Point) -> Result<bool> {
        let v = proj_cap_pi(p);
        Ok(p.y >= self.value(v.x, v.z)?)
    }
}

/// The `V0` rectangle covering the Π-projection of a box, for sizing grids.
pub fn v0_cover(bounds: &Box3, margin: f64) -> (f64, f64, f64, f64) {
    let xm = bounds.x0.abs().max(bounds.x1.abs());
    let ym = bounds.y0.abs().max(bounds.y1.abs());
    let spread = 0.5 * xm * ym + margin;
    (bounds.x0 - margin, bounds.x1 + margin, bounds.z0 - spread, bounds.z1 + spread)
}

/// Volume of the symmetric difference of two Y-epigraphs inside a box,
/// measured on an `n³` voxel grid: the fraction of differing voxel centers
/// times the box volume.
pub fn indicator_l1_distance(
    a: &SurfaceIndicator,
    b: &SurfaceIndicator,
    bounds: &Box3,
    n: usize,
) -> Result<f64> {
    assert!(n >= 2);
    let dx = (bounds.x1 - bounds.x0) / n as f64;
    let dy = (bounds.y1 - bounds.y0) / n as f64;
    let dz = (bounds.z1 - bounds.z0) / n as f64;
    let mut differ = 0usize;
    for i in 0..n {
        let x = bounds.x0 + (i as f64 + 0.5) * dx;
        for j in 0..n {
            let y = bounds.y0 + (j as f64 + 0.5) * dy;
            // Π is affine in z along a voxel column with x, y fixed
            let zeta_off = -0.5 * x * y;
            for k in 0..n {
                let z = bounds.z0 + (k as f64 + 0.5) * dz;
                let zeta = z + zeta_off;
                let fa = a.value(x, zeta)?;
                let fb = b.value(x, zeta)?;
                if (y >= fa) != (y >= fb) {
                    differ += 1;
                }
            }
        }
    }
    Ok(differ as f64 / (n * n * n) as f64 * bounds.volume())
}
