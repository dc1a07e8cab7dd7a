//! Discrete intrinsic calculus on sampled graph functions.
//!
//! The intrinsic gradient of a graph function `f` is `∇_f f = (∂_x − f∂_z)f`.
//! We discretize it in divergence form, `∂_x f − ½∂_z[f²]`, which matches the
//! distributional definition and is exact on the herringbone surfaces where
//! `f²` is piecewise linear while `∂_z f` blows up. Energy and area are
//! midpoint-rule sums of `½(∇_f f)²` and `√(1+(∇_f f)²)` over cells.
//!
//! The finite-difference gradient coincides with the distributional one only
//! for piecewise-C¹ representatives away from masked cells; no constructive
//! recovery is attempted for rougher functions.

use crate::error::{Error, Result};
use crate::grid::{cell_avg, diff_x, diff_z, integrate_cells, map, zip, GraphGrid, Region, ScalarField};
use crate::heis::{inverse, mul, HorizontalVector, LipschitzCone, Point};

/// Intrinsic gradient field `∇_f f = ∂_x f − ½ ∂_z[f²]`.
pub fn intrinsic_gradient(g: &GraphGrid) -> ScalarField {
    let f = g.as_field();
    let fx = diff_x(g, &f).expect("field shares the grid header");
    let f2 = map(&f, |v| v * v);
    let f2z = diff_z(g, &f2).expect("field shares the grid header");
    zip(&fx, &f2z, |a, b| a - 0.5 * b)
}

/// Intrinsic derivative `∇_f w = ∂_x w − f ∂_z w` of an arbitrary field.
pub fn nabla_f(g: &GraphGrid, w: &ScalarField) -> Result<ScalarField> {
    let wx = diff_x(g, w)?;
    let wz = diff_z(g, w)?;
    let f = g.as_field();
    Ok(zip(&wx, &zip(&f, &wz, |a, b| a * b), |a, b| a - b))
}

/// Second-order operator
/// `Δ_f w = ∇_f[∂_x w] − f·∇_f[∂_z w] − ∇_f f·∂_z w`,
/// which avoids differentiating `f` in `z` and so stays bounded on
/// piecewise-smooth graphs. Equals `∇_f²w` when `f` is smooth.
pub fn delta_f(g: &GraphGrid, w: &ScalarField) -> Result<ScalarField> {
    let wx = diff_x(g, w)?;
    let wz = diff_z(g, w)?;
    let nx = nabla_f(g, &wx)?;
    let nz = nabla_f(g, &wz)?;
    let f = g.as_field();
    let sigma = intrinsic_gradient(g);
    let mut out = nx;
    for i in 0..out.values.len() {
        out.values[i] -= f.values[i] * nz.values[i] + sigma.values[i] * wz.values[i];
    }
    Ok(out)
}

/// Intrinsic Dirichlet energy `½∫(∇_f f)² dμ` over a region.
pub fn energy(g: &GraphGrid, region: &Region) -> Result<f64> {
    let sigma = intrinsic_gradient(g);
    integrate_cells(&g.header, region, |cx, cz| {
        let s = cell_avg(&sigma, cx, cz);
        0.5 * s * s
    })
}

/// Graph area `∫√(1+(∇_f f)²) dμ` over a region.
pub fn area(g: &GraphGrid, region: &Region) -> Result<f64> {
    let sigma = intrinsic_gradient(g);
    integrate_cells(&g.header, region, |cx, cz| {
        let s = cell_avg(&sigma, cx, cz);
        (1.0 + s * s).sqrt()
    })
}

/// `∫(√(1+(∇_f f)²) − 1) dμ`, formed in a cancellation-free way so that the
/// small-slope regime keeps full precision.
pub fn area_excess(g: &GraphGrid, region: &Region) -> Result<f64> {
    let sigma = intrinsic_gradient(g);
    integrate_cells(&g.header, region, |cx, cz| {
        let s = cell_avg(&sigma, cx, cz);
        let s2 = s * s;
        s2 / ((1.0 + s2).sqrt() + 1.0)
    })
}

/// Generic quadrature of a node field over a region.
pub fn integrate_field(g: &GraphGrid, w: &ScalarField, region: &Region) -> Result<f64> {
    if w.header != g.header {
        return Err(Error::GridMismatch);
    }
    integrate_cells(&g.header, region, |cx, cz| cell_avg(w, cx, cz))
}

/// Unit horizontal normal `ν_Γ = (−∇_f f·X + Y)/√(1+(∇_f f)²)` at a `V0`
/// point, anchored at the graph point above it.
pub fn unit_normal(g: &GraphGrid, v: Point) -> Result<HorizontalVector> {
    let sigma = intrinsic_gradient(g);
    let s = sigma.interp(v.x, v.z)?;
    let base = g.psi(v)?;
    let n = (1.0 + s * s).sqrt();
    Ok(HorizontalVector::new(-s / n, 1.0 / n, base))
}

/// Near-unit field `M_Γ = −∇_f f·X + (1 − (∇_f f)²/2)·Y`; differs from the
/// unit normal by O(|∇_f f|³).
pub fn m_gamma(g: &GraphGrid, v: Point) -> Result<HorizontalVector> {
    let sigma = intrinsic_gradient(g);
    let s = sigma.interp(v.x, v.z)?;
    let base = g.psi(v)?;
    Ok(HorizontalVector::new(-s, 1.0 - 0.5 * s * s, base))
}

/// Integral curve of `∇_f = ∂_x − f∂_z` in `V0`, i.e. `dz/dx = −f(x,z)`,
/// advanced with classical RK4 from `start` over `x_span`. The curve is
/// truncated where it leaves the domain; leaving immediately is an error.
pub fn characteristic_curve(
    g: &GraphGrid,
    start: Point,
    x_span: f64,
    steps: usize,
) -> Result<Vec<Point>> {
    let h = &g.header;
    if !h.contains(start.x, start.z) {
        return Err(Error::ImmediateExit);
    }
    let dt = x_span / steps as f64;
    let mut pts = Vec::with_capacity(steps + 1);
    let mut x = start.x;
    let mut z = start.z;
    pts.push(Point::v0(x, z));
    for _ in 0..steps {
        let eval = |x: f64, z: f64| -> Result<f64> { Ok(-g.interp(x, z)?) };
        let k1 = match eval(x, z) {
            Ok(v) => v,
            Err(_) => break,
        };
        let try_step = (|| -> Result<(f64, f64)> {
            let k2 = eval(x + 0.5 * dt, z + 0.5 * dt * k1)?;
            let k3 = eval(x + 0.5 * dt, z + 0.5 * dt * k2)?;
            let k4 = eval(x + dt, z + dt * k3)?;
            Ok((x + dt, z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)))
        })();
        match try_step {
            Ok((nx, nz)) if h.contains(nx, nz) => {
                x = nx;
                z = nz;
                pts.push(Point::v0(x, z));
            }
            _ => break,
        }
    }
    if pts.len() < 2 {
        return Err(Error::ImmediateExit);
    }
    Ok(pts)
}

/// Lift a `V0` curve through `Ψ_f`. The lifted curve of a characteristic is
/// horizontal and its y-coordinate equals the running slope of the graph.
pub fn lift_characteristic(g: &GraphGrid, curve: &[Point]) -> Result<Vec<Point>> {
    curve.iter().map(|&v| g.psi(v)).collect()
}

/// Horizontality defect of a polyline in ℝ³: worst deviation of `Δz` from
/// `(x̄·Δy − ȳ·Δx)/2` between consecutive samples.
pub fn horizontality_residual(curve: &[Point]) -> f64 {
    let mut worst: f64 = 0.0;
    for w in curve.windows(2) {
        let (p, q) = (w[0], w[1]);
        let mx = 0.5 * (p.x + q.x);
        let my = 0.5 * (p.y + q.y);
        let dz = q.z - p.z;
        let want = 0.5 * (mx * (q.y - p.y) - my * (q.x - p.x));
        worst = worst.max((dz - want).abs());
    }
    worst
}

/// Direction argument for [`excess`].
pub enum ExcessDirection {
    Fixed(HorizontalVector),
    /// Minimize over unit directions; the optimum is the normalized mean of
    /// the normal field against the surface measure.
    Optimize,
}

/// Scale-normalized deviation of the horizontal normal from a fixed
/// direction over a ball-box ball around `p`:
/// `r⁻³ ∫_{B(p,r)} |ν_Γ − ν|² √(1+(∇_f f)²) dμ`.
pub fn excess(g: &GraphGrid, p: Point, r: f64, nu: ExcessDirection) -> Result<f64> {
    assert!(r > 0.0, "ball radius must be positive");
    let h = &g.header;
    let sigma = intrinsic_gradient(g);
    // collect cells whose center lifts into the ball
    let mut cells = Vec::new();
    for cx in 0..h.nx - 1 {
        for cz in 0..h.nz - 1 {
            let x = 0.5 * (h.x(cx) + h.x(cx + 1));
            let z = 0.5 * (h.z(cz) + h.z(cz + 1));
            let lifted = g.psi(Point::v0(x, z))?;
            if crate::heis::ballbox_dist(p, lifted) < r {
                let s = cell_avg(&sigma, cx, cz);
                let n = (1.0 + s * s).sqrt();
                cells.push((s, n));
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let w = h.cell_area();
    let (na, nb) = match nu {
        ExcessDirection::Fixed(v) => {
            let n = v.norm();
            (v.a / n, v.b / n)
        }
        ExcessDirection::Optimize => {
            // normal times surface weight: (−s, 1)/n · n·dμ = (−s, 1)·dμ,
            // so the measure factor drops out of the accumulated direction.
            let mut ma = 0.0;
            let mut mb = 0.0;
            for &(s, _) in &cells {
                ma += -s * w;
                mb += w;
            }
            let norm = ma.hypot(mb);
            (ma / norm, mb / norm)
        }
    };
    let mut total = 0.0;
    for &(s, n) in &cells {
        let da = -s / n - na;
        let db = 1.0 / n - nb;
        total += (da * da + db * db) * n * w;
    }
    Ok(total / (r * r * r))
}

/// Residual of the integration-by-parts identity
/// `∫_U ∇_f w dμ = ∮_{∂U}(f w, w)·dα + ∫_U w·∂_z f dμ`
/// on the full grid rectangle, boundary integral by the trapezoid rule.
pub fn ibp_residual(g: &GraphGrid, w: &ScalarField) -> Result<f64> {
    if g.has_mask() {
        return Err(Error::InvalidGrid("integration by parts needs a smooth grid".into()));
    }
    if w.header != g.header {
        return Err(Error::GridMismatch);
    }
    let h = g.header;
    let lhs = integrate_field(g, &nabla_f(g, w)?, &Region::Full)?;

    let f = g.as_field();
    let fz = diff_z(g, &f)?;
    let bulk = integrate_field(g, &zip(w, &fz, |a, b| a * b), &Region::Full)?;

    // ∮ (f w) dx + w dz, positively oriented rectangle boundary
    let mut boundary = 0.0;
    let trapz = |vals: &[f64], step: f64| -> f64 {
        let mut s = 0.0;
        for k in 0..vals.len() - 1 {
            s += 0.5 * (vals[k] + vals[k + 1]) * step;
        }
        s
    };
    let fw = |ix: usize, iz: usize| f.at(ix, iz) * w.at(ix, iz);
    // bottom: z = z0, x increasing
    let vals: Vec<f64> = (0..h.nx).map(|ix| fw(ix, 0)).collect();
    boundary += trapz(&vals, h.hx());
    // top: z = z1, x decreasing
    let vals: Vec<f64> = (0..h.nx).map(|ix| fw(ix, h.nz - 1)).collect();
    boundary -= trapz(&vals, h.hx());
    // right: x = x1, z increasing
    let vals: Vec<f64> = (0..h.nz).map(|iz| w.at(h.nx - 1, iz)).collect();
    boundary += trapz(&vals, h.hz());
    // left: x = x0, z decreasing
    let vals: Vec<f64> = (0..h.nz).map(|iz| w.at(0, iz)).collect();
    boundary -= trapz(&vals, h.hz());

    Ok((lhs - boundary - bulk).abs())
}

/// Worst cone violation over all point pairs. `Ok` means no difference
/// `p⁻¹q` lies in the cone, so the sample set is consistent with an
/// intrinsic Lipschitz graph of that cone parameter.
pub struct LipschitzReport {
    pub passed: bool,
    pub worst_pair: Option<(Point, Point)>,
    /// `|y| − max(4c|x|, √(32c|z|))` of the worst difference; positive means
    /// the pair violates the cone condition.
    pub worst_margin: f64,
}

pub fn lipschitz_check(points: &[Point], c: f64) -> LipschitzReport {
    assert!(points.len() >= 2, "need at least two points");
    let cone = LipschitzCone::new(c);
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_pair = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = mul(inverse(points[i]), points[j]);
            let bound = (4.0 * cone.c * d.x.abs()).max((32.0 * cone.c * d.z.abs()).sqrt());
            let margin = d.y.abs() - bound;
            if margin > worst_margin {
                worst_margin = margin;
                worst_pair = Some((points[i], points[j]));
            }
        }
    }
    LipschitzReport { passed: worst_margin <= 0.0, worst_pair, worst_margin }
}
