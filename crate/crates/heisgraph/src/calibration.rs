//! Candidate calibrations and their diagnostics.
//!
//! A slope field `τ` on ℝ³ (constant in z) induces the horizontal field
//! `M̄ = −τ·X + (1 − τ²/2)·Y`. Three numerical checks probe whether `M̄` is
//! conservative: the interior divergence residual `−X[τ] − τ·Y[τ]`, the
//! interface jump `(τ⁺−τ⁻)(σ − (τ⁺+τ⁻)/2)` along discontinuity rays of
//! tangent slope `σ`, and the total flux through boxes. Because the frame
//! fields `X`, `Y` are Euclidean-divergence-free, the horizontal flux of
//! `v₁X + v₂Y` through a box boundary equals the Euclidean surface integral
//! of the corresponding ℝ³ field, which is what [`flux_box`] computes.
//!
//! [`tau_k`] builds the candidate field of the cone over an interval
//! complement: `mᵢ ± δᵢ` on the wedge halves over each removed interval,
//! `±α` on the outer wedge, and `y/x` on the cone over the retained slopes.

use crate::error::{Error, Result};
use crate::grid::{cell_avg, integrate_cells, GraphGrid, Region};
use crate::heis::{mul, Box3, HorizontalVector, Point};
use crate::zoo::cantor::IntervalComplement;
use serde::Serialize;

/// Wedge over one removed slope interval `(lo, hi)` with central slope `m`;
/// the slope field takes `tau_up` above the central ray and `tau_dn` below.
/// Unperturbed constructions store `tau_up == hi` and `tau_dn == lo`
/// bit-for-bit, so seam values coincide exactly and the central midpoint
/// `(tau_dn + tau_up)/2` reproduces the stored `m` to the last bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Wedge {
    pub lo: f64,
    pub m: f64,
    pub hi: f64,
    pub tau_up: f64,
    pub tau_dn: f64,
}

impl Wedge {
    pub fn tau_plus(&self) -> f64 {
        self.tau_up
    }

    pub fn tau_minus(&self) -> f64 {
        self.tau_dn
    }
}

/// Region label for interior checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionId {
    OuterUpper,
    OuterLower,
    WedgeUpper(usize),
    WedgeLower(usize),
    Cone,
}

/// Piecewise slope field on ℝ³, constant in z.
#[derive(Debug, Clone, PartialEq)]
pub struct TauField {
    pub alpha: f64,
    pub wedges: Vec<Wedge>,
}

impl TauField {
    /// Ties on interfaces go to the region with the larger `τ`, so sampling
    /// is deterministic; this only affects measure-zero sets.
    pub fn classify(&self, x: f64, y: f64) -> (RegionId, f64) {
        if x <= 0.0 {
            return if y >= 0.0 {
                (RegionId::OuterUpper, self.alpha)
            } else {
                (RegionId::OuterLower, -self.alpha)
            };
        }
        let r = y / x;
        if r >= self.alpha {
            return (RegionId::OuterUpper, self.alpha);
        }
        if r <= -self.alpha {
            return (RegionId::OuterLower, -self.alpha);
        }
        for (i, w) in self.wedges.iter().enumerate() {
            if r > w.lo && r < w.hi {
                return if r >= w.m {
                    (RegionId::WedgeUpper(i), w.tau_plus())
                } else {
                    (RegionId::WedgeLower(i), w.tau_minus())
                };
            }
        }
        (RegionId::Cone, r)
    }

    pub fn tau(&self, p: Point) -> f64 {
        self.classify(p.x, p.y).1
    }

    /// Adds `d` to the upper branch slope of one wedge; the negative control
    /// for the conservativity diagnostics.
    pub fn perturb_wedge_up(&mut self, idx: usize, d: f64) {
        self.wedges[idx].tau_up += d;
    }

    /// Discontinuity rays of the field with their one-sided values. The
    /// carried midpoint is formed from the stored half-widths, so the
    /// unperturbed construction reports exact zeros.
    pub fn interfaces(&self) -> Vec<Interface> {
        let mut out = Vec::new();
        // the negative x-axis separating the two outer halves
        out.push(Interface {
            name: "outer-axis".into(),
            dir_x: -1.0,
            dir_y: 0.0,
            sigma: 0.0,
            tau_plus: self.alpha,
            tau_minus: -self.alpha,
            tau_mid: 0.0,
        });
        for (i, w) in self.wedges.iter().enumerate() {
            out.push(Interface {
                name: format!("wedge-{i}-central"),
                dir_x: 1.0,
                dir_y: w.m,
                sigma: w.m,
                tau_plus: w.tau_plus(),
                tau_minus: w.tau_minus(),
                tau_mid: 0.5 * (w.tau_minus() + w.tau_plus()),
            });
            // continuity seams against the cone; the jump vanishes there
            out.push(Interface {
                name: format!("wedge-{i}-low"),
                dir_x: 1.0,
                dir_y: w.lo,
                sigma: w.lo,
                tau_plus: w.tau_minus(),
                tau_minus: w.lo,
                tau_mid: 0.5 * (w.tau_minus() + w.lo),
            });
            out.push(Interface {
                name: format!("wedge-{i}-high"),
                dir_x: 1.0,
                dir_y: w.hi,
                sigma: w.hi,
                tau_plus: w.hi,
                tau_minus: w.tau_plus(),
                tau_mid: 0.5 * (w.tau_plus() + w.hi),
            });
        }
        out
    }

    /// JSON mirror: the region list with predicates and slope values.
    pub fn to_json(&self) -> serde_json::Value {
        let mut regions = vec![
            serde_json::json!({"kind": "outer", "half": "upper", "tau": {"const": self.alpha}}),
            serde_json::json!({"kind": "outer", "half": "lower", "tau": {"const": -self.alpha}}),
        ];
        for w in &self.wedges {
            regions.push(serde_json::json!({
                "kind": "wedge", "half": "upper", "lo": w.lo, "mid": w.m, "hi": w.hi,
                "tau": {"const": w.tau_plus()},
            }));
            regions.push(serde_json::json!({
                "kind": "wedge", "half": "lower", "lo": w.lo, "mid": w.m, "hi": w.hi,
                "tau": {"const": w.tau_minus()},
            }));
        }
        regions.push(serde_json::json!({"kind": "cone", "tau": "ratio"}));
        serde_json::json!({"alpha": self.alpha, "regions": regions})
    }
}

/// A discontinuity ray `t ↦ (t·dir_x, t·dir_y)`, `t > 0`, with the one-sided
/// slope values above (`tau_plus`) and below (`tau_minus`) it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interface {
    pub name: String,
    pub dir_x: f64,
    pub dir_y: f64,
    /// Slope of the interface tangent in the xy-plane.
    pub sigma: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    /// `(τ⁺+τ⁻)/2`, carried in a form that is exact for the construction.
    pub tau_mid: f64,
}

impl Interface {
    pub fn point(&self, t: f64, z: f64) -> Point {
        Point::new(t * self.dir_x, t * self.dir_y, z)
    }
}

/// Candidate calibration slope field of the cone over an interval
/// complement.
pub fn tau_k(k: &IntervalComplement) -> TauField {
    let wedges = k
        .gaps()
        .iter()
        .map(|g| Wedge { lo: g.a, m: 0.5 * (g.a + g.b), hi: g.b, tau_up: g.b, tau_dn: g.a })
        .collect();
    TauField { alpha: k.alpha, wedges }
}

/// `M̄(p) = −τ(p)·X_p + (1 − τ(p)²/2)·Y_p`.
pub fn bar_m(tau: &TauField, p: Point) -> HorizontalVector {
    let t = tau.tau(p);
    HorizontalVector::new(-t, 1.0 - 0.5 * t * t, p)
}

/// Divergence residual `−X[τ] − τ·Y[τ]` by central differences along the
/// frame directions, for a caller-supplied slope sampler.
pub fn div_residual_fn(tau: impl Fn(f64, f64) -> f64, p: Point, h: f64) -> f64 {
    let along = |dir: (f64, f64), t: f64| {
        let q = mul(p, Point::new(dir.0 * t, dir.1 * t, 0.0));
        tau(q.x, q.y)
    };
    let dx = (along((1.0, 0.0), h) - along((1.0, 0.0), -h)) / (2.0 * h);
    let dy = (along((0.0, 1.0), h) - along((0.0, 1.0), -h)) / (2.0 * h);
    -dx - tau(p.x, p.y) * dy
}

/// Divergence residual of a [`TauField`] at an interior point; errors when
/// any stencil point falls in a different region.
pub fn div_residual(tau: &TauField, p: Point, h: f64) -> Result<f64> {
    let (home, _) = tau.classify(p.x, p.y);
    for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
        let q = mul(p, Point::new(dx, dy, 0.0));
        if tau.classify(q.x, q.y).0 != home {
            return Err(Error::InterfaceTooClose);
        }
    }
    Ok(div_residual_fn(|x, y| tau.classify(x, y).1, p, h))
}

/// Interface jump residual `(τ⁺ − τ⁻)·(σ − (τ⁺+τ⁻)/2)` at parameter `s`.
/// Zero exactly when the equal-slope condition holds; the construction's
/// unperturbed interfaces carry midpoints that make this bit-exact.
pub fn jump_residual(iface: &Interface, _s: f64) -> f64 {
    (iface.tau_plus - iface.tau_minus) * (iface.sigma - iface.tau_mid)
}

/// The raw jump formula for ad-hoc one-sided values.
pub fn jump_residual_values(tau_plus: f64, tau_minus: f64, sigma: f64) -> f64 {
    (tau_plus - tau_minus) * (sigma - 0.5 * (tau_plus + tau_minus))
}

/// Euclidean outward flux of the ℝ³ field `v₁X + v₂Y` through the boundary
/// of a box, by midpoint quadrature on an `n×n` base grid per face with
/// recursive refinement where the integrand is rough (the field may jump
/// across interface traces). Equals the horizontal flux because the frame
/// fields are Euclidean-divergence-free.
pub fn flux_box(v: &dyn Fn(Point) -> (f64, f64), bounds: &Box3, n: usize) -> f64 {
    assert!(n >= 1);
    let field = |p: Point, comp: usize| -> f64 {
        let (v1, v2) = v(p);
        match comp {
            0 => v1,
            1 => v2,
            _ => 0.5 * (-p.y * v1 + p.x * v2),
        }
    };
    let faces: [(usize, f64, f64); 6] = [
        (0, bounds.x1, 1.0),
        (0, bounds.x0, -1.0),
        (1, bounds.y1, 1.0),
        (1, bounds.y0, -1.0),
        (2, bounds.z1, 1.0),
        (2, bounds.z0, -1.0),
    ];
    let ranges = [
        (bounds.x0, bounds.x1),
        (bounds.y0, bounds.y1),
        (bounds.z0, bounds.z1),
    ];
    let mut total = 0.0;
    for (axis, value, sign) in faces {
        let (u_axis, w_axis) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let make_point = |u: f64, w: f64| -> Point {
            let mut coords = [0.0; 3];
            coords[axis] = value;
            coords[u_axis] = u;
            coords[w_axis] = w;
            Point::new(coords[0], coords[1], coords[2])
        };
        let integrand = |u: f64, w: f64| field(make_point(u, w), axis);
        let (u0, u1) = ranges[u_axis];
        let (w0, w1) = ranges[w_axis];
        let du = (u1 - u0) / n as f64;
        let dw = (w1 - w0) / n as f64;
        for iu in 0..n {
            for iw in 0..n {
                let cell = (u0 + iu as f64 * du, w0 + iw as f64 * dw);
                total += sign * adaptive_cell(&integrand, cell.0, cell.1, du, dw, 0);
            }
        }
    }
    total
}

fn adaptive_cell(
    integrand: &dyn Fn(f64, f64) -> f64,
    u: f64,
    w: f64,
    du: f64,
    dw: f64,
    depth: usize,
) -> f64 {
    let mid = integrand(u + 0.5 * du, w + 0.5 * dw);
    if depth >= 5 {
        return mid * du * dw;
    }
    let corners = [
        integrand(u, w),
        integrand(u + du, w),
        integrand(u, w + dw),
        integrand(u + du, w + dw),
    ];
    let mut lo = mid;
    let mut hi = mid;
    for c in corners {
        lo = lo.min(c);
        hi = hi.max(c);
    }
    if hi - lo <= 1e-6 + 1e-3 * hi.abs().max(lo.abs()) {
        return mid * du * dw;
    }
    let (hu, hw) = (0.5 * du, 0.5 * dw);
    adaptive_cell(integrand, u, w, hu, hw, depth + 1)
        + adaptive_cell(integrand, u + hu, w, hu, hw, depth + 1)
        + adaptive_cell(integrand, u, w + hw, hu, hw, depth + 1)
        + adaptive_cell(integrand, u + hu, w + hw, hu, hw, depth + 1)
}

/// Flux of a horizontal field through a graph:
/// `∫ ⟨V(Ψ_f(v)), −∇_f f·X + Y⟩ dμ` over a region of the graph's domain.
/// With `V = M_Γ` this equals `μ(D) + E` up to quadrature.
pub fn flux_graph(
    g: &GraphGrid,
    v: &dyn Fn(Point) -> (f64, f64),
    region: &Region,
) -> Result<f64> {
    let sigma = crate::calculus::intrinsic_gradient(g);
    let h = &g.header;
    integrate_cells(h, region, |cx, cz| {
        let x = 0.5 * (h.x(cx) + h.x(cx + 1));
        let z = 0.5 * (h.z(cz) + h.z(cz + 1));
        let s = cell_avg(&sigma, cx, cz);
        let p = g.psi(Point::v0(x, z)).expect("cell centers lie inside the domain");
        let (v1, v2) = v(p);
        -s * v1 + v2
    })
}

/// One diagnostic record, as emitted in reports.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub residual_type: String,
    pub location: [f64; 3],
    pub value: f64,
    pub h: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{energy, m_gamma};
    use crate::grid::GridHeader;
    use crate::zoo::cantor::make_cantor;
    use approx::assert_abs_diff_eq;

    fn cantor_tau(depth: u32) -> TauField {
        tau_k(&make_cantor(depth, 1.0).unwrap())
    }

    #[test]
    fn tau_case_table() {
        let k = make_cantor(1, 1.0).unwrap(); // one gap (−1/3, 1/3), m = 0
        let t = tau_k(&k);
        let w = t.wedges[0];
        // inside the upper wedge half
        let y = w.m * 1.0 + 0.9 * (w.tau_up - w.m);
        assert_abs_diff_eq!(t.tau(Point::new(1.0, y, 0.3)), w.tau_plus(), epsilon = 0.0);
        // on the cone over retained slopes
        assert_abs_diff_eq!(t.tau(Point::new(1.0, 0.5, -2.0)), 0.5, epsilon = 0.0);
        assert_abs_diff_eq!(t.tau(Point::new(2.0, 1.2, 0.0)), 0.6, epsilon = 1e-15);
        // outer halves
        assert_abs_diff_eq!(t.tau(Point::new(-1.0, 0.5, 0.0)), 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(t.tau(Point::new(-1.0, -0.5, 0.0)), -1.0, epsilon = 0.0);
        assert_abs_diff_eq!(t.tau(Point::new(0.4, 3.0, 0.0)), 1.0, epsilon = 0.0);
    }

    #[test]
    fn bar_m_values_and_norm() {
        let k = make_cantor(0, 1.0).unwrap();
        let t = tau_k(&k);
        let m = bar_m(&t, Point::new(2.0, 0.0, 0.0));
        assert_abs_diff_eq!(m.a, 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(m.b, 1.0, epsilon = 0.0);
        // τ = 1 on the upper outer half
        let m = bar_m(&t, Point::new(-1.0, 1.0, 0.0));
        assert_abs_diff_eq!(m.a, -1.0, epsilon = 0.0);
        assert_abs_diff_eq!(m.b, 0.5, epsilon = 0.0);
        // |M̄|² = 1 + τ⁴/4
        for &tau in &[0.0f64, 0.3, 0.9, -0.7] {
            let n2 = tau * tau + (1.0 - 0.5 * tau * tau).powi(2);
            assert_abs_diff_eq!(n2, 1.0 + 0.25 * tau.powi(4), epsilon = 1e-15);
        }
    }

    #[test]
    fn interior_divergence_residuals() {
        let t = cantor_tau(2);
        let h = 1e-3;
        // constant wedge region
        let w = t.wedges[1];
        let p = Point::new(1.0, w.m + 0.6 * (w.tau_up - w.m), 0.2);
        assert!(div_residual(&t, p, h).unwrap().abs() < 1e-10);
        // cone region, τ = y/x: −X[τ] − τ·Y[τ] = y/x² − (y/x)(1/x) = 0
        let p = Point::new(1.0, 0.95, -0.4);
        let r = div_residual(&t, p, h).unwrap();
        assert!(r.abs() < 1e-6, "cone residual {r}");
        // shrinking h cuts the residual
        let r2 = div_residual(&t, p, h / 4.0).unwrap();
        assert!(r2.abs() <= r.abs() / 4.0 + 1e-12);
        // interface proximity is an error
        let w = t.wedges[0];
        let near = Point::new(1.0, w.m + 1e-5, 0.0);
        assert!(matches!(div_residual(&t, near, 1e-3), Err(Error::InterfaceTooClose)));
    }

    #[test]
    fn sheared_field_is_a_divergence_negative_control() {
        // τ(x, y) = σ(x) with σ' ≠ 0: residual −σ'(x)
        let tau = |x: f64, _y: f64| 0.3 * x * x;
        let p = Point::new(0.8, 0.1, 0.0);
        let r = div_residual_fn(tau, p, 1e-4);
        assert_abs_diff_eq!(r, -0.6 * 0.8, epsilon = 1e-7);
    }

    #[test]
    fn jump_residuals_are_exact_zero_for_the_construction() {
        for depth in 0..=3 {
            let t = cantor_tau(depth);
            for iface in t.interfaces() {
                assert_eq!(jump_residual(&iface, 1.0), 0.0, "{}", iface.name);
            }
        }
        // ad-hoc values: slope 0 between 0.3 and −0.1
        assert_abs_diff_eq!(jump_residual_values(0.3, -0.1, 0.0), -0.04, epsilon = 1e-15);
        // τ⁺ = τ⁻ is conservative regardless of σ
        assert_eq!(jump_residual_values(0.5, 0.5, 0.77), 0.0);
    }

    #[test]
    fn perturbed_wedge_fails_the_jump_condition() {
        let mut t = cantor_tau(2);
        t.perturb_wedge_up(0, 0.05);
        let ifaces = t.interfaces();
        let central = ifaces.iter().find(|i| i.name == "wedge-0-central").unwrap();
        let r = jump_residual(central, 1.0);
        assert!(r.abs() >= 0.001, "perturbed residual {r}");
    }

    #[test]
    fn constant_y_field_has_no_box_flux() {
        let v = |_p: Point| (0.0, 1.0);
        let b = Box3::new(-0.3, 0.8, -0.5, 0.5, -0.4, 0.4);
        assert_abs_diff_eq!(flux_box(&v, &b, 8), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn calibration_flux_through_boxes() {
        let t = cantor_tau(2);
        let v = move |p: Point| {
            let m = bar_m(&t, p);
            (m.a, m.b)
        };
        // away from interfaces: smooth divergence-free pieces
        let inside = Box3::new(0.9, 1.1, -0.05, 0.05, -0.2, 0.2);
        assert!(flux_box(&v, &inside, 8).abs() < 1e-4);
        // straddling a central ray: conservative, flux small and shrinking
        let t2 = cantor_tau(2);
        let w = t2.wedges[1];
        let straddle = Box3::new(0.8, 1.2, 0.8 * w.m - 0.2, 1.2 * w.m + 0.2, -0.2, 0.2);
        let f1 = flux_box(&v, &straddle, 4).abs();
        let f2 = flux_box(&v, &straddle, 16).abs();
        assert!(f2 < 5e-4, "straddling flux {f2}");
        assert!(f2 <= f1 + 1e-6);
    }

    #[test]
    fn perturbed_flux_is_bounded_away_from_zero() {
        let mut t = cantor_tau(2);
        t.perturb_wedge_up(1, 0.05);
        let w = t.wedges[1];
        let v = move |p: Point| {
            let m = bar_m(&t, p);
            (m.a, m.b)
        };
        let straddle = Box3::new(0.8, 1.2, w.m - 0.1, w.m + 0.1, -0.2, 0.2);
        let f1 = flux_box(&v, &straddle, 8).abs();
        let f2 = flux_box(&v, &straddle, 16).abs();
        assert!(f1 > 5e-4 && f2 > 5e-4, "fluxes {f1}, {f2}");
        assert!(f2 > 0.5 * f1);
    }

    #[test]
    fn flux_energy_identity_on_graphs() {
        use crate::grid::Region;
        let h = GridHeader::new(-1.0, 1.0, -1.0, 1.0, 65, 65).unwrap();
        let g = crate::zoo::make_parabola(h);
        let gm = g.clone();
        let v = move |p: Point| {
            let v0 = crate::heis::proj_cap_pi(p);
            let m = m_gamma(&gm, v0).expect("interior point");
            (m.a, m.b)
        };
        let flux = flux_graph(&g, &v, &Region::Full).unwrap();
        let e = energy(&g, &Region::Full).unwrap();
        let mu = 4.0;
        assert!((flux - (mu + e)).abs() < 0.01 * (mu + e), "flux {flux} vs {}", mu + e);

        // V = Y: flux is the region area
        let vy = |_p: Point| (0.0, 1.0);
        assert_abs_diff_eq!(flux_graph(&g, &vy, &Region::Full).unwrap(), mu, epsilon = 1e-9);
        // V = X on the flat graph: the normal is Y
        let flat = crate::zoo::make_plane(0.0, 0.0, h);
        let vx = |_p: Point| (1.0, 0.0);
        assert_abs_diff_eq!(flux_graph(&flat, &vx, &Region::Full).unwrap(), 0.0, epsilon = 1e-12);
    }
}
