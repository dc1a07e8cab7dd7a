//! Contact potentials, contact flows, and first-variation diagnostics.
//!
//! A potential with `YYψ = 0` is determined by two fields on `V0`: the value
//! `u0` and the Y-derivative `u1`, through `ψ(h) = u0(Π(h)) + y(h)·u1(Π(h))`.
//! Its contact field `V_ψ = (Yψ)X − (Xψ)Y + ψZ` generates flows that carry
//! intrinsic graphs to intrinsic graphs; on `V0` the induced motion is
//! `W = (u1, 0, u0)`, and with `w₁ = u1`, `w₂ = u1·f + u0` the energy of the
//! flowed graph satisfies `E(t) = E(0) + t(A₁ + A₂) + O(t²)` with
//!
//! ```text
//! A₁ = ∫ w₁·∇_f f·∇_f²f + ½(∇_f f)²(∂_x w₁ − ∂_z[f w₁]) dμ
//! A₂ = ∫ −∇_f²w₂·∇_f f + ½(∇_f f)²·∂_z w₂ dμ
//! ```
//!
//! (The first `A₁` term carries the `∇_f f` factor: `½∇_f[(∇_f f)²]·w₁`;
//! only then does `A₁` vanish for compactly supported `w₁`.)
//!
//! The B-forms replace `∇_f²` by the bounded operator `Δ_f` and remain
//! meaningful on piecewise-smooth graphs; for graphs singular along a curve,
//! [`herringbone_a2`] splits `A₂` into a nexus boundary term weighted by
//! `δ(s) = (σ⁺−σ⁰)² − (σ⁰−σ⁻)²` and a bulk term.

use crate::calculus::{delta_f, energy, integrate_field, intrinsic_gradient, nabla_f};
use crate::error::{Error, Result};
use crate::grid::{diff_x, diff_z, zip, GraphGrid, GridHeader, Region, ScalarField};
use crate::heis::{mul, proj_cap_pi, Point};
use crate::zoo::{PiecewiseGraph, Sampler2};
use serde::Serialize;
use std::sync::Arc;

/// One scalar component of a potential: value and analytic partials on `V0`.
#[derive(Clone)]
pub struct PotentialComponent {
    pub f: Sampler2,
    pub fx: Sampler2,
    pub fz: Sampler2,
}

impl PotentialComponent {
    pub fn zero() -> Self {
        PotentialComponent {
            f: Arc::new(|_, _| 0.0),
            fx: Arc::new(|_, _| 0.0),
            fz: Arc::new(|_, _| 0.0),
        }
    }

    pub fn constant(c: f64) -> Self {
        PotentialComponent {
            f: Arc::new(move |_, _| c),
            fx: Arc::new(|_, _| 0.0),
            fz: Arc::new(|_, _| 0.0),
        }
    }

    pub fn from_expr(e: &std::sync::Arc<crate::expr::Expr>) -> Self {
        let dx = e.diff(0);
        let dz = e.diff(1);
        let e = e.clone();
        PotentialComponent {
            f: Arc::new(move |x, z| e.eval(&[x, z])),
            fx: Arc::new(move |x, z| dx.eval(&[x, z])),
            fz: Arc::new(move |x, z| dz.eval(&[x, z])),
        }
    }

    /// Smooth compactly supported bump on a rectangle, with analytic
    /// partials: `amp·B((2x−x0−x1)/(x1−x0))·B(...)` for
    /// `B(t) = exp(1 − 1/(1−t²))` inside `|t| < 1`.
    pub fn bump(amp: f64, x0: f64, x1: f64, z0: f64, z1: f64) -> Self {
        let b = |t: f64| -> f64 {
            if t.abs() < 1.0 {
                (1.0 - 1.0 / (1.0 - t * t)).exp()
            } else {
                0.0
            }
        };
        let db = move |t: f64| -> f64 {
            if t.abs() < 1.0 {
                let d = 1.0 - t * t;
                b(t) * (-2.0 * t / (d * d))
            } else {
                0.0
            }
        };
        let cx = 0.5 * (x0 + x1);
        let rx = 0.5 * (x1 - x0);
        let cz = 0.5 * (z0 + z1);
        let rz = 0.5 * (z1 - z0);
        PotentialComponent {
            f: Arc::new(move |x, z| amp * b((x - cx) / rx) * b((z - cz) / rz)),
            fx: Arc::new(move |x, z| amp * db((x - cx) / rx) / rx * b((z - cz) / rz)),
            fz: Arc::new(move |x, z| amp * b((x - cx) / rx) * db((z - cz) / rz) / rz),
        }
    }

    pub fn field(&self, header: GridHeader) -> ScalarField {
        ScalarField::from_fn(header, |x, z| (self.f)(x, z))
    }
}

/// Contact potential with `YYψ = 0`, encoded by `u0 = ψ|V0` and `u1 = Yψ`,
/// plus the support rectangle of the induced `V0` motion.
#[derive(Clone)]
pub struct ContactPotential {
    pub u0: PotentialComponent,
    pub u1: PotentialComponent,
    /// Rectangle containing the support of `(u0, u1)`.
    pub support: Option<(f64, f64, f64, f64)>,
}

impl ContactPotential {
    pub fn vertical(u0: PotentialComponent, support: Option<(f64, f64, f64, f64)>) -> Self {
        ContactPotential { u0, u1: PotentialComponent::zero(), support }
    }

    /// `ψ(h) = u0(Π(h)) + y(h)·u1(Π(h))`.
    pub fn psi(&self, p: Point) -> f64 {
        let v = proj_cap_pi(p);
        (self.u0.f)(v.x, v.z) + p.y * (self.u1.f)(v.x, v.z)
    }

    pub fn y_psi(&self, p: Point) -> f64 {
        let v = proj_cap_pi(p);
        (self.u1.f)(v.x, v.z)
    }

    /// `Xψ(h) = (∂_x − y∂_z)[u0](Π(h)) + y·(∂_x − y∂_z)[u1](Π(h))`.
    pub fn x_psi(&self, p: Point) -> f64 {
        let v = proj_cap_pi(p);
        let du0 = (self.u0.fx)(v.x, v.z) - p.y * (self.u0.fz)(v.x, v.z);
        let du1 = (self.u1.fx)(v.x, v.z) - p.y * (self.u1.fz)(v.x, v.z);
        du0 + p.y * du1
    }

    /// `V_ψ = (Yψ)X − (Xψ)Y + ψZ` as an ℝ³ vector at `p`.
    pub fn contact_field(&self, p: Point) -> [f64; 3] {
        let ypsi = self.y_psi(p);
        let xpsi = self.x_psi(p);
        let psi = self.psi(p);
        [ypsi, -xpsi, -0.5 * p.y * ypsi - 0.5 * p.x * xpsi + psi]
    }

    /// `w₁ = x∘W = u1` on grid nodes.
    pub fn w1_field(&self, header: GridHeader) -> ScalarField {
        self.u1.field(header)
    }

    /// `w₂ = w₁·f + z∘W = u1·f + u0` on grid nodes.
    pub fn w2_field(&self, g: &GraphGrid) -> ScalarField {
        let h = g.header;
        let mut vals = Vec::with_capacity(h.n_nodes());
        for ix in 0..h.nx {
            for iz in 0..h.nz {
                let (x, z) = (h.x(ix), h.z(iz));
                vals.push((self.u1.f)(x, z) * g.at(ix, iz) + (self.u0.f)(x, z));
            }
        }
        ScalarField { header: h, values: vals }
    }

    /// The support rectangle must sit strictly inside the domain.
    pub fn check_support(&self, header: &GridHeader) -> Result<()> {
        match self.support {
            None => Ok(()),
            Some((x0, x1, z0, z1)) => {
                if x0 > header.x0 && x1 < header.x1 && z0 > header.z0 && z1 < header.z1 {
                    Ok(())
                } else {
                    Err(Error::SupportNotCompact)
                }
            }
        }
    }
}

/// RK4 integration of the contact flow `φ_t`.
pub fn flow(pot: &ContactPotential, p: Point, t: f64, steps: usize) -> Point {
    assert!(steps >= 1);
    let dt = t / steps as f64;
    let mut q = p;
    let f = |p: Point| pot.contact_field(p);
    for _ in 0..steps {
        let k1 = f(q);
        let k2 = f(shift(q, &k1, 0.5 * dt));
        let k3 = f(shift(q, &k2, 0.5 * dt));
        let k4 = f(shift(q, &k3, dt));
        q = Point::new(
            q.x + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            q.y + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            q.z + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        );
    }
    q
}

fn shift(p: Point, v: &[f64; 3], dt: f64) -> Point {
    Point::new(p.x + dt * v[0], p.y + dt * v[1], p.z + dt * v[2])
}

/// Numerical controls for the flowed-energy evaluation.
#[derive(Debug, Clone, Copy)]
pub struct FlowParams {
    pub steps: usize,
    /// Offset of the horizontal tangent companion used for the flowed slope.
    pub companion_eps: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams { steps: 8, companion_eps: 1e-5 }
    }
}

/// Energy of the flowed graph by the change of variables
/// `E(t) = ½∫ N_u(t)² J_{φ̄_t}(u) dμ(u)`: each node's slope is transported by
/// flowing the graph point together with a horizontal tangent companion, and
/// the area element by differencing the flowed `V0` lattice. Nodes whose
/// neighborhood lies outside the potential support are fixed points of the
/// flow and are not integrated.
pub fn flow_energy(
    g: &GraphGrid,
    pot: &ContactPotential,
    t: f64,
    region: &Region,
    params: &FlowParams,
) -> Result<f64> {
    pot.check_support(&g.header)?;
    let h = g.header;
    let sigma = intrinsic_gradient(g);
    let eps = params.companion_eps;
    let margin = 2.0 * h.hx().max(h.hz()) + eps;
    let inert = |x: f64, z: f64| -> bool {
        match pot.support {
            Some((x0, x1, z0, z1)) => {
                x < x0 - margin || x > x1 + margin || z < z0 - margin || z > z1 + margin
            }
            None => false,
        }
    };

    // flowed V0 lattice, for the Jacobian of the induced map
    let n = h.n_nodes();
    let mut v0x = vec![0.0; n];
    let mut v0z = vec![0.0; n];
    let mut n_field = vec![0.0; n];
    for ix in 0..h.nx {
        for iz in 0..h.nz {
            let idx = h.idx(ix, iz);
            let (x, z) = (h.x(ix), h.z(iz));
            let s = sigma.at(ix, iz);
            if inert(x, z) {
                v0x[idx] = x;
                v0z[idx] = z;
                n_field[idx] = s;
                continue;
            }
            let moved = proj_cap_pi(flow(pot, Point::v0(x, z), t, params.steps));
            v0x[idx] = moved.x;
            v0z[idx] = moved.z;
            let fval = g.at(ix, iz);
            let p = Point::new(x, fval, z + 0.5 * x * fval);
            let q = mul(p, Point::new(eps, s * eps, 0.0));
            let fp = flow(pot, p, t, params.steps);
            let fq = flow(pot, q, t, params.steps);
            n_field[idx] = (fq.y - fp.y) / (fq.x - fp.x);
        }
    }

    let mut integrand = vec![0.0; n];
    let diff = |vals: &[f64], ix: usize, iz: usize, axis_x: bool| -> f64 {
        let (i, count, step) =
            if axis_x { (ix, h.nx, h.hx()) } else { (iz, h.nz, h.hz()) };
        let at = |j: usize| {
            if axis_x {
                vals[h.idx(j, iz)]
            } else {
                vals[h.idx(ix, j)]
            }
        };
        if i > 0 && i + 1 < count {
            (at(i + 1) - at(i - 1)) / (2.0 * step)
        } else if i + 1 < count {
            (at(i + 1) - at(i)) / step
        } else {
            (at(i) - at(i - 1)) / step
        }
    };
    for ix in 0..h.nx {
        for iz in 0..h.nz {
            let dxx = diff(&v0x, ix, iz, true);
            let dxz = diff(&v0z, ix, iz, true);
            let dzx = diff(&v0x, ix, iz, false);
            let dzz = diff(&v0z, ix, iz, false);
            let jac = dxx * dzz - dzx * dxz;
            let nv = n_field[h.idx(ix, iz)];
            integrand[h.idx(ix, iz)] = nv * nv * jac;
        }
    }
    let field = ScalarField { header: h, values: integrand };
    Ok(0.5 * integrate_field(g, &field, region)?)
}

/// First-variation functional of the `w₁` motion,
/// `∫ ½∇_f[(∇_f f)²]·w₁ + ½(∇_f f)²(∂_x w₁ − ∂_z[f w₁]) dμ`; vanishes for
/// compactly supported `w₁` because flows along `∇_f` preserve the graph.
pub fn a1(g: &GraphGrid, w1: &ScalarField, region: &Region) -> Result<f64> {
    if g.has_mask() {
        return Err(Error::InvalidGrid("A1 needs a smooth grid".into()));
    }
    let sigma = intrinsic_gradient(g);
    let sigma2 = nabla_f(g, &sigma)?;
    let w1x = diff_x(g, w1)?;
    let fw1 = zip(&g.as_field(), w1, |a, b| a * b);
    let fw1z = diff_z(g, &fw1)?;
    let mut vals = Vec::with_capacity(g.header.n_nodes());
    for i in 0..w1.values.len() {
        let s = sigma.values[i];
        vals.push(
            w1.values[i] * s * sigma2.values[i]
                + 0.5 * s * s * (w1x.values[i] - fw1z.values[i]),
        );
    }
    integrate_field(g, &ScalarField { header: g.header, values: vals }, region)
}

/// First-variation functional of the `w₂` motion.
pub fn a2(g: &GraphGrid, w2: &ScalarField, region: &Region) -> Result<f64> {
    if g.has_mask() {
        return Err(Error::InvalidGrid("A2 needs a smooth grid".into()));
    }
    let sigma = intrinsic_gradient(g);
    let w2_1 = nabla_f(g, w2)?;
    let w2_2 = nabla_f(g, &w2_1)?;
    let w2z = diff_z(g, w2)?;
    let mut vals = Vec::with_capacity(g.header.n_nodes());
    for i in 0..w2.values.len() {
        let s = sigma.values[i];
        vals.push(-w2_2.values[i] * s + 0.5 * s * s * w2z.values[i]);
    }
    integrate_field(g, &ScalarField { header: g.header, values: vals }, region)
}

/// Compactly supported form `A₂ = ∫ (w₂·∂_z f + ∇_f w₂)·∇_f²f dμ`.
pub fn a2_compact(g: &GraphGrid, w2: &ScalarField, region: &Region) -> Result<f64> {
    let sigma = intrinsic_gradient(g);
    let sigma2 = nabla_f(g, &sigma)?;
    let fz = diff_z(g, &g.as_field())?;
    let w2_1 = nabla_f(g, w2)?;
    let mut vals = Vec::with_capacity(g.header.n_nodes());
    for i in 0..w2.values.len() {
        vals.push((w2.values[i] * fz.values[i] + w2_1.values[i]) * sigma2.values[i]);
    }
    integrate_field(g, &ScalarField { header: g.header, values: vals }, region)
}

/// `B₂(f,w) = −Δ_f w·∇_f f + ½(∇_f f)²·∂_z w`, integrated.
pub fn b2(g: &GraphGrid, w: &ScalarField, region: &Region) -> Result<f64> {
    let sigma = intrinsic_gradient(g);
    let dw = delta_f(g, w)?;
    let wz = diff_z(g, w)?;
    let mut vals = Vec::with_capacity(g.header.n_nodes());
    for i in 0..w.values.len() {
        let s = sigma.values[i];
        vals.push(-dw.values[i] * s + 0.5 * s * s * wz.values[i]);
    }
    integrate_field(g, &ScalarField { header: g.header, values: vals }, region)
}

/// `B₁(f,w) = f·B₂(f,w) − (3/2)(∇_f f)²·∇_f w`, integrated.
pub fn b1(g: &GraphGrid, w: &ScalarField, region: &Region) -> Result<f64> {
    let sigma = intrinsic_gradient(g);
    let dw = delta_f(g, w)?;
    let wz = diff_z(g, w)?;
    let wf = nabla_f(g, w)?;
    let f = g.as_field();
    let mut vals = Vec::with_capacity(g.header.n_nodes());
    for i in 0..w.values.len() {
        let s = sigma.values[i];
        let b2v = -dw.values[i] * s + 0.5 * s * s * wz.values[i];
        vals.push(f.values[i] * b2v - 1.5 * s * s * wf.values[i]);
    }
    integrate_field(g, &ScalarField { header: g.header, values: vals }, region)
}

/// Pointwise contact-harmonicity residual `2∂_z f·∇_f²f − ∇_f³f`.
pub fn harmonic_residual(g: &GraphGrid) -> Result<ScalarField> {
    let sigma = intrinsic_gradient(g);
    let s2 = nabla_f(g, &sigma)?;
    let s3 = nabla_f(g, &s2)?;
    let fz = diff_z(g, &g.as_field())?;
    Ok(zip(&zip(&fz, &s2, |a, b| 2.0 * a * b), &s3, |a, b| a - b))
}

/// Report of one variation experiment.
#[derive(Debug, Clone, Serialize)]
pub struct VariationReport {
    #[serde(rename = "t")]
    pub t_values: Vec<f64>,
    #[serde(rename = "E_t")]
    pub energies: Vec<f64>,
    pub analytic_slope: f64,
    pub fd_slope: f64,
    /// Fitted constant of the quadratic remainder |E(t) − E(0) − t·slope| ≤ C·t².
    #[serde(rename = "C_fit")]
    pub second_order_bound: f64,
}

/// Direct perturbation `f_t = f + t·h`: the energy slope is
/// `−∫ ∇_f²f·h dμ`, compared against symmetric finite differences.
pub fn fvf_perturbation(
    g: &GraphGrid,
    h_field: &ScalarField,
    t_list: &[f64],
    region: &Region,
) -> Result<VariationReport> {
    if h_field.header != g.header {
        return Err(Error::GridMismatch);
    }
    let sigma = intrinsic_gradient(g);
    let sigma2 = nabla_f(g, &sigma)?;
    let analytic = -integrate_field(g, &zip(&sigma2, h_field, |a, b| a * b), region)?;
    let e0 = energy(g, region)?;
    let energy_at = |t: f64| -> Result<f64> {
        let mut vals = g.values.clone();
        for i in 0..vals.len() {
            vals[i] += t * h_field.values[i];
        }
        let gt = GraphGrid { header: g.header, values: vals, mask: g.mask.clone() };
        energy(&gt, region)
    };
    let mut ts = Vec::new();
    let mut es = Vec::new();
    let mut fd = 0.0;
    let mut c_fit: f64 = 0.0;
    for &t in t_list {
        let ep = energy_at(t)?;
        let em = energy_at(-t)?;
        ts.push(t);
        es.push(ep);
        fd = (ep - em) / (2.0 * t);
        c_fit = c_fit.max((ep - e0 - t * analytic).abs() / (t * t));
    }
    Ok(VariationReport {
        t_values: ts,
        energies: es,
        analytic_slope: analytic,
        fd_slope: fd,
        second_order_bound: c_fit,
    })
}

/// Contact-flow variation report: energies from [`flow_energy`] on the
/// symmetric schedule `±t, ±t/2`, the analytic slope from `A₁ + A₂`, and a
/// Richardson finite-difference slope.
pub fn fvf_contact(
    g: &GraphGrid,
    pot: &ContactPotential,
    t: f64,
    region: &Region,
    params: &FlowParams,
) -> Result<VariationReport> {
    let w1 = pot.w1_field(g.header);
    let w2 = pot.w2_field(g);
    let analytic = a1(g, &w1, region)? + a2(g, &w2, region)?;
    let e0 = flow_energy(g, pot, 0.0, region, params)?;
    let schedule = [t, -t, 0.5 * t, -0.5 * t];
    let mut energies = Vec::with_capacity(schedule.len());
    for &tv in &schedule {
        energies.push(flow_energy(g, pot, tv, region, params)?);
    }
    let s_t = (energies[0] - energies[1]) / (2.0 * t);
    let s_half = (energies[2] - energies[3]) / t;
    let fd = (4.0 * s_half - s_t) / 3.0;
    let mut c_fit: f64 = 0.0;
    for (&tv, &ev) in schedule.iter().zip(&energies) {
        c_fit = c_fit.max((ev - e0 - tv * analytic).abs() / (tv * tv));
    }
    Ok(VariationReport {
        t_values: schedule.to_vec(),
        energies,
        analytic_slope: analytic,
        fd_slope: fd,
        second_order_bound: c_fit,
    })
}

/// Decomposition of `A₂` for a graph singular along a curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HerringboneA2 {
    pub total: f64,
    pub boundary_term: f64,
    pub bulk_term: f64,
}

/// `A₂ = ½∫ w₂(γ(s))·δ(s) ds + ∫ (w₂∂_z f + ∇_f w₂)·∇_f²f dμ` for a graph
/// with a herringbone singularity; the boundary integral runs along the
/// projected nexus at the grid's x-resolution.
pub fn herringbone_a2(
    pg: &PiecewiseGraph,
    w2_fn: &Sampler2,
    region: &Region,
) -> Result<HerringboneA2> {
    let g = &pg.grid;
    let h = g.header;
    // trapezoid along the nexus between the grid's x-limits
    let n = h.nx - 1;
    let mut boundary = 0.0;
    let ds = (h.x1 - h.x0) / n as f64;
    for k in 0..=n {
        let s = h.x0 + k as f64 * ds;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        let z = (pg.curve_z)(s);
        boundary += w * (w2_fn)(s, z) * pg.delta(s) * ds;
    }
    boundary *= 0.5;

    let w2 = ScalarField::from_fn(h, |x, z| (w2_fn)(x, z));
    let bulk = a2_compact(g, &w2, region)?;
    Ok(HerringboneA2 { total: boundary + bulk, boundary_term: boundary, bulk_term: bulk })
}

/// Least-squares power-law fit through `(v, |values|)` pairs in log-log
/// coordinates; returns `(exponent, coefficient)`.
pub fn power_fit(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(v, val) in pairs {
        let lx = v.ln();
        let ly = val.abs().max(1e-300).ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept.exp())
}

/// Fit of the near-nexus asymptotics `|f(γ(s)Z^ν) − f(γ(s))| ≈ c·ν^e`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NearSingFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub dz_exponent: f64,
}

pub fn near_sing_fit(pg: &PiecewiseGraph, s: f64, nu_list: &[f64]) -> Result<NearSingFit> {
    if nu_list.is_empty() {
        return Err(Error::InvalidSurface("need at least one offset".into()));
    }
    let z0 = (pg.curve_z)(s);
    let f0 = (pg.f)(s, z0);
    let mut jumps = Vec::with_capacity(nu_list.len());
    let mut slopes = Vec::with_capacity(nu_list.len());
    for &nu in nu_list {
        if !(nu > 0.0) {
            return Err(Error::InvalidSurface("offsets must be positive".into()));
        }
        let fv = (pg.f)(s, z0 + nu);
        if !fv.is_finite() {
            return Err(Error::OutOfDomain(s, z0 + nu));
        }
        jumps.push((nu, (fv - f0).abs()));
        let e = 0.05 * nu;
        let dz = ((pg.f)(s, z0 + nu + e) - (pg.f)(s, z0 + nu - e)) / (2.0 * e);
        slopes.push((nu, dz.abs()));
    }
    let (exponent, coefficient) = power_fit(&jumps);
    let (dz_exponent, _) = power_fit(&slopes);
    Ok(NearSingFit { exponent, coefficient, dz_exponent })
}
