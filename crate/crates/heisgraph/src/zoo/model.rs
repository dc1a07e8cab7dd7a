//! Exact graph-function evaluation for ray-fan cones.
//!
//! A fan surface over an interval complement is a piecewise-quadratic
//! Z-graph, so along every `V0` column the graph function inverts in closed
//! form. With the ray data `(origin on a central ray, slope)` the Π-image of
//! a branch-ray point at offset `u` from a nexus of slope `s_m` with branch
//! slope `s` is
//!
//! ```text
//! ζ = −s_m·x²/2 − (s − s_m)·u²/2,   y = s_m·x + (s − s_m)·u,
//! ```
//!
//! while fan rays through the origin give the flat pieces `ζ = −k·x²/2`, and
//! the two branch families off the negative x-axis give the outer
//! herringbone pieces `ζ = ∓y²/(2t)`. Inverting those per piece beats any
//! sampled reconstruction: every returned value is realized by an actual ray
//! of the (continuum) fan.

use crate::error::Result;
use crate::grid::{GraphGrid, GridHeader};
use crate::heis::{proj_cap_pi, Point};
use crate::zoo::cantor::IntervalComplement;

/// One removed interval in slope terms: lower and upper branch slopes and
/// the nexus slope between them (not necessarily their average for
/// circle-direction fans).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgePiece {
    pub s_a: f64,
    pub s_m: f64,
    pub s_b: f64,
}

/// Closed-form graph model of a fan cone, with an optional stretch applied.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeModel {
    /// Slope of the upper branch family off the negative x-axis.
    t_up: f64,
    /// Magnitude of the lower branch family's slope.
    t_dn: f64,
    /// Sorted wedge pieces covering the removed slope intervals.
    pieces: Vec<WedgePiece>,
    scale_x: f64,
    scale_z: f64,
    scale_y: f64,
}

impl WedgeModel {
    /// Model of the slope-interval cone `Λ_K`.
    pub fn from_slopes(k: &IntervalComplement) -> Self {
        let pieces = k
            .gaps()
            .iter()
            .map(|g| WedgePiece { s_a: g.a, s_m: g.mid, s_b: g.b })
            .collect();
        WedgeModel {
            t_up: k.alpha,
            t_dn: k.alpha,
            pieces,
            scale_x: 1.0,
            scale_z: 1.0,
            scale_y: 1.0,
        }
    }

    /// Model of the circle-direction cone `Σ_K` for a symmetric angle
    /// complement inside `(−π/2, π/2)`: the far bisector then points along
    /// the negative x-axis and every ray family has a slope presentation.
    pub fn from_angles(k: &IntervalComplement) -> Result<Self> {
        if k.alpha >= std::f64::consts::FRAC_PI_2 {
            return Err(crate::error::Error::InvalidSurface(
                "angle complement must stay strictly inside (-pi/2, pi/2)".into(),
            ));
        }
        let pieces = k
            .gaps()
            .iter()
            .map(|g| WedgePiece { s_a: g.a.tan(), s_m: g.mid.tan(), s_b: g.b.tan() })
            .collect();
        Ok(WedgeModel {
            t_up: k.alpha.tan(),
            t_dn: k.alpha.tan(),
            pieces,
            scale_x: 1.0,
            scale_z: 1.0,
            scale_y: 1.0,
        })
    }

    /// The model of the image surface under the stretch `s_{a,b}`.
    pub fn stretched(&self, a: f64, b: f64) -> Self {
        assert!(a > 0.0 && b > 0.0, "stretch factors must be positive here");
        let mut out = self.clone();
        out.scale_x *= a;
        out.scale_z *= a * b;
        out.scale_y *= b;
        out
    }

    fn eval_base(&self, x: f64, zeta: f64) -> f64 {
        let zeta_top = -0.5 * self.t_up * x * x;
        let zeta_bot = 0.5 * self.t_dn * x * x;
        if x <= 0.0 || zeta < zeta_top || zeta > zeta_bot {
            // outer herringbone pieces off the negative x-axis
            return if zeta < 0.0 {
                (-2.0 * self.t_up * zeta).sqrt()
            } else if zeta > 0.0 {
                -(2.0 * self.t_dn * zeta).sqrt()
            } else {
                0.0
            };
        }
        let k_star = -2.0 * zeta / (x * x);
        for p in &self.pieces {
            if k_star > p.s_a && k_star < p.s_b {
                let zeta_m = -0.5 * p.s_m * x * x;
                return if zeta <= zeta_m {
                    p.s_m * x + (2.0 * (p.s_b - p.s_m) * (zeta_m - zeta)).sqrt()
                } else {
                    p.s_m * x - (2.0 * (p.s_m - p.s_a) * (zeta - zeta_m)).sqrt()
                };
            }
        }
        // retained slopes: flat pieces of the horizontal plane through 0
        -2.0 * zeta / x
    }

    /// Graph value over the `V0` point `(x, 0, zeta)`.
    pub fn eval(&self, x: f64, zeta: f64) -> f64 {
        self.scale_y * self.eval_base(x / self.scale_x, zeta / self.scale_z)
    }

    /// Epigraph membership of an ambient point: `y(p) ≥ f(Π(p))`.
    pub fn epigraph_contains(&self, p: Point) -> bool {
        let v = proj_cap_pi(p);
        p.y >= self.eval(v.x, v.z)
    }

    /// Exact sampling onto a grid; when `mask` is set, cells straddling any
    /// slope-discontinuity curve of the model are flagged.
    pub fn to_grid(&self, header: GridHeader, mask: bool) -> Result<GraphGrid> {
        let mut values = Vec::with_capacity(header.n_nodes());
        for ix in 0..header.nx {
            for iz in 0..header.nz {
                values.push(self.eval(header.x(ix), header.z(iz)));
            }
        }
        let mut grid = GraphGrid::new(header, values, None)?;
        if mask {
            let curves = self.kink_curves();
            let sx = self.scale_x;
            let sz = self.scale_z;
            let mut merged: Option<Vec<bool>> = None;
            for k in curves {
                let mut g = grid.clone();
                g.mask_curve(|x| {
                    let xb = x / sx;
                    sz * match k {
                        KinkCurve::NegAxis => {
                            if xb <= 0.0 {
                                0.0
                            } else {
                                f64::INFINITY
                            }
                        }
                        KinkCurve::Parabola(s) => {
                            if xb >= 0.0 {
                                -0.5 * s * xb * xb
                            } else {
                                f64::INFINITY
                            }
                        }
                    }
                });
                let m = g.mask.unwrap();
                merged = Some(match merged {
                    None => m,
                    Some(prev) => prev.iter().zip(&m).map(|(&a, &b)| a || b).collect(),
                });
            }
            grid.mask = merged;
        }
        Ok(grid)
    }

    fn kink_curves(&self) -> Vec<KinkCurve> {
        let mut out = vec![
            KinkCurve::NegAxis,
            KinkCurve::Parabola(self.t_up),
            KinkCurve::Parabola(-self.t_dn),
        ];
        for p in &self.pieces {
            out.push(KinkCurve::Parabola(p.s_a));
            out.push(KinkCurve::Parabola(p.s_m));
            out.push(KinkCurve::Parabola(p.s_b));
        }
        out
    }
}

#[derive(Clone, Copy)]
enum KinkCurve {
    /// The negative x-axis image, `ζ = 0` for `x ≤ 0`.
    NegAxis,
    /// Image of a central ray of the given slope, `ζ = −s·x²/2` for `x ≥ 0`.
    Parabola(f64),
}
