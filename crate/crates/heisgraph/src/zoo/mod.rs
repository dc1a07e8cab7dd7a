//! Constructors for the surfaces under study: vertical planes, the parabola
//! graph, herringbone surfaces and their skew variants, ruled flex surfaces,
//! and the ray-fan cones built from interval complements and circle subsets.

pub mod cantor;
pub mod model;
pub mod rayfan;
pub mod registry;

use crate::error::{Error, Result};
use crate::grid::{GraphGrid, GridHeader};
use std::sync::Arc;

pub use cantor::{make_cantor, Gap, IntervalComplement};

/// Scalar sampler of one real parameter.
pub type Sampler1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Graph-function sampler on `V0`.
pub type Sampler2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A graph with a single singular curve: smooth on either side of the
/// characteristic nexus, continuous across it. Carries the projected nexus
/// `s ↦ (s, 0, curve_z(s))`, the slope of the nexus projection to the
/// xy-plane (`sigma0`) and the one-sided foliation slopes along it
/// (`sigma_plus` above, `sigma_minus` below, with σ⁺ < σ⁰ < σ⁻), and an
/// exact pointwise evaluator of the graph function.
pub struct PiecewiseGraph {
    pub s0: f64,
    pub s1: f64,
    pub curve_z: Sampler1,
    pub sigma0: Sampler1,
    pub sigma_plus: Sampler1,
    pub sigma_minus: Sampler1,
    pub f: Sampler2,
    /// Combined sampled graph with the singular mask along the nexus.
    pub grid: GraphGrid,
}

impl PiecewiseGraph {
    /// `δ(s) = (σ⁺(s)−σ⁰(s))² − (σ⁰(s)−σ⁻(s))²`; zero exactly when the nexus
    /// slope is the average of the one-sided foliation slopes.
    pub fn delta(&self, s: f64) -> f64 {
        let s0 = (self.sigma0)(s);
        let sp = (self.sigma_plus)(s);
        let sm = (self.sigma_minus)(s);
        (sp - s0) * (sp - s0) - (s0 - sm) * (s0 - sm)
    }

    pub fn check_slope_order(&self, samples: usize) -> Result<()> {
        for k in 0..=samples {
            let s = self.s0 + (self.s1 - self.s0) * k as f64 / samples as f64;
            let (p, o, m) = ((self.sigma_plus)(s), (self.sigma0)(s), (self.sigma_minus)(s));
            if !(p < o && o < m) {
                return Err(Error::InvalidSurface(format!(
                    "foliation slopes out of order at s = {s}: {p}, {o}, {m}"
                )));
            }
        }
        Ok(())
    }
}

/// Vertical plane of slope `m` and offset `c`: `f(x,z) = m·x + c`.
pub fn make_plane(m: f64, c: f64, header: GridHeader) -> GraphGrid {
    GraphGrid::from_fn(header, |x, _| m * x + c)
}

/// The graph `y = x²` over `V0`: `f(x,z) = x²`.
pub fn make_parabola(header: GridHeader) -> GraphGrid {
    GraphGrid::from_fn(header, |x, _| x * x)
}

/// Herringbone surface `f_a(x,z) = −a√|z|·sign z`, singular along the
/// x-axis, swept by horizontal rays of slope `±a²/2`.
pub fn make_herringbone(a: f64, header: GridHeader) -> Result<(GraphGrid, PiecewiseGraph)> {
    if a == 0.0 {
        return Err(Error::InvalidSurface("herringbone parameter must be nonzero".into()));
    }
    if !(header.z0 < 0.0 && header.z1 > 0.0) {
        return Err(Error::InvalidSurface("domain must straddle z = 0".into()));
    }
    if a > 0.0 {
        return make_herringbone_pair(-0.5 * a * a, 0.5 * a * a, header);
    }
    // negative a flips the sign of f; the leaf slopes are unchanged
    let f = move |_x: f64, z: f64| -a * z.abs().sqrt() * z.signum();
    let mut grid = GraphGrid::from_fn(header, f);
    grid.mask_curve(|_| 0.0);
    let q = 0.5 * a * a;
    let pg = PiecewiseGraph {
        s0: header.x0,
        s1: header.x1,
        curve_z: Arc::new(|_| 0.0),
        sigma0: Arc::new(|_| 0.0),
        sigma_plus: Arc::new(move |_| -q),
        sigma_minus: Arc::new(move |_| q),
        f: Arc::new(f),
        grid: grid.clone(),
    };
    Ok((grid, pg))
}

/// Skew herringbone: leaf slope `sigma_up < 0` above the x-axis and
/// `sigma_down > 0` below it, nexus along the x-axis with `σ⁰ = 0`. The
/// classical herringbone is the symmetric case `∓a²/2`.
pub fn make_herringbone_pair(
    sigma_up: f64,
    sigma_down: f64,
    header: GridHeader,
) -> Result<(GraphGrid, PiecewiseGraph)> {
    if !(sigma_up < 0.0 && sigma_down > 0.0) {
        return Err(Error::InvalidSurface(
            "need sigma_up < 0 < sigma_down for a nexus along the x-axis".into(),
        ));
    }
    if !(header.z0 < 0.0 && header.z1 > 0.0) {
        return Err(Error::InvalidSurface("domain must straddle z = 0".into()));
    }
    let qu = -sigma_up;
    let qd = sigma_down;
    let f = move |_x: f64, z: f64| {
        if z >= 0.0 {
            -(2.0 * qu * z).sqrt()
        } else {
            (2.0 * qd * (-z)).sqrt()
        }
    };
    let mut grid = GraphGrid::from_fn(header, f);
    grid.mask_curve(|_| 0.0);
    let pg = PiecewiseGraph {
        s0: header.x0,
        s1: header.x1,
        curve_z: Arc::new(|_| 0.0),
        sigma0: Arc::new(|_| 0.0),
        sigma_plus: Arc::new(move |_| sigma_up),
        sigma_minus: Arc::new(move |_| sigma_down),
        f: Arc::new(f),
        grid: grid.clone(),
    };
    pg.check_slope_order(8)?;
    Ok((grid, pg))
}

/// A ruled surface swept by horizontal rays from a horizontal directrix:
/// `ρ(s,t) = γ(s)·(X + (σ(s)±δ(s))Y)^{|t|}`, with `γ` of unit x-speed,
/// `σ = γ_y'` its slope, and `δ > 0` the slope offset of the two leaf
/// families.
pub struct FlexSurface {
    pub s0: f64,
    pub s1: f64,
    /// Leaves are swept for `|t| < eps`.
    pub eps: f64,
    pub gamma_y: Sampler1,
    pub sigma: Sampler1,
    pub delta: Sampler1,
    /// Ambient z of the directrix on a uniform table, from horizontality.
    gamma_z: Arc<Vec<f64>>,
    gamma_step: f64,
}

impl FlexSurface {
    /// Build from samplers; `γ_z` follows from horizontality,
    /// `γ_z'(s) = (s·σ(s) − γ_y(s))/2`, accumulated with Simpson steps.
    pub fn new(
        s0: f64,
        s1: f64,
        eps: f64,
        gamma_y: Sampler1,
        sigma: Sampler1,
        delta: Sampler1,
    ) -> Result<Self> {
        if !(s1 > s0) || !(eps > 0.0) {
            return Err(Error::InvalidSurface("flex parameter ranges are degenerate".into()));
        }
        let n = 4096usize;
        let step = (s1 - s0) / n as f64;
        let mut gz = Vec::with_capacity(n + 1);
        gz.push(0.0);
        let deriv = |s: f64| 0.5 * (s * sigma(s) - gamma_y(s));
        let mut acc = 0.0;
        for k in 0..n {
            let a = s0 + k as f64 * step;
            acc += step / 6.0 * (deriv(a) + 4.0 * deriv(a + 0.5 * step) + deriv(a + step));
            gz.push(acc);
        }
        let fs = FlexSurface {
            s0,
            s1,
            eps,
            gamma_y,
            sigma,
            delta,
            gamma_z: Arc::new(gz),
            gamma_step: step,
        };
        for k in 0..=64 {
            let s = s0 + (s1 - s0) * k as f64 / 64.0;
            if (fs.delta)(s) <= 0.0 {
                return Err(Error::InvalidSurface("delta must be positive".into()));
            }
        }
        Ok(fs)
    }

    fn clone_tables(&self) -> FlexSurface {
        FlexSurface {
            s0: self.s0,
            s1: self.s1,
            eps: self.eps,
            gamma_y: self.gamma_y.clone(),
            sigma: self.sigma.clone(),
            delta: self.delta.clone(),
            gamma_z: self.gamma_z.clone(),
            gamma_step: self.gamma_step,
        }
    }

    pub fn gamma_z(&self, s: f64) -> f64 {
        let t = ((s - self.s0) / self.gamma_step).clamp(0.0, (self.gamma_z.len() - 1) as f64);
        let i = (t.floor() as usize).min(self.gamma_z.len() - 2);
        let frac = t - i as f64;
        self.gamma_z[i] * (1.0 - frac) + self.gamma_z[i + 1] * frac
    }

    /// Ambient point `ρ(s, t)`.
    pub fn rho(&self, s: f64, t: f64) -> crate::heis::Point {
        let u = t.abs();
        let m = if t >= 0.0 {
            (self.sigma)(s) + (self.delta)(s)
        } else {
            (self.sigma)(s) - (self.delta)(s)
        };
        let gy = (self.gamma_y)(s);
        let gz = self.gamma_z(s);
        crate::heis::Point::new(s + u, gy + m * u, gz + 0.5 * (s * m * u - gy * u))
    }

    /// Projected nexus in `V0`: z-coordinate of `Π(γ(s))`.
    pub fn curve_z(&self, s: f64) -> f64 {
        self.gamma_z(s) - 0.5 * s * (self.gamma_y)(s)
    }

    /// `Π`-z of the leaf through `γ(s)` with slope `m`, at offset `u ≥ 0`.
    fn leaf_zeta(&self, s: f64, u: f64, m: f64) -> f64 {
        let gy = (self.gamma_y)(s);
        self.gamma_z(s) - 0.5 * (s * gy + 2.0 * u * gy + m * u * u)
    }

    /// Solve for the leaf through the `V0` point `(x, zeta)` and return the
    /// graph value there. Looks only at leaves with offset `u < eps`.
    pub fn graph_value(&self, x: f64, zeta: f64) -> Result<f64> {
        if x < self.s0 || x > self.s1 {
            return Err(Error::OutOfDomain(x, zeta));
        }
        let on_curve = self.curve_z(x);
        if (zeta - on_curve).abs() < 1e-15 {
            return Ok((self.gamma_y)(x));
        }
        // the upper region is swept by the σ−δ family, the lower by σ+δ
        let upper = zeta > on_curve;
        let pick = move |fs: &FlexSurface, s: f64| {
            if upper {
                (fs.sigma)(s) - (fs.delta)(s)
            } else {
                (fs.sigma)(s) + (fs.delta)(s)
            }
        };
        let smin = (x - self.eps).max(self.s0);
        let g = |s: f64| self.leaf_zeta(s, x - s, pick(self, s)) - zeta;
        // bracket scan outward from the curve (s = x), then bisect
        let n = 64;
        let mut hi = x;
        let mut ghi = g(hi);
        let mut bracket = None;
        for k in 1..=n {
            let lo = x - (x - smin) * k as f64 / n as f64;
            let glo = g(lo);
            if glo == 0.0 {
                bracket = Some((lo, lo));
                break;
            }
            if glo.signum() != ghi.signum() {
                bracket = Some((lo, hi));
                break;
            }
            hi = lo;
            ghi = glo;
        }
        let (mut lo, mut hi) = bracket.ok_or(Error::OutOfDomain(x, zeta))?;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if g(lo).signum() == g(mid).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        let u = x - s;
        Ok((self.gamma_y)(s) + pick(self, s) * u)
    }

    /// Scan for crossings of projected same-family leaves; `Err` when two
    /// leaves of one family cross inside the t-extent, which would make the
    /// sweep non-injective. Leaves are segments of length `eps`, so only the
    /// common x-range of consecutive leaves is compared, and a crossing shows
    /// up as a sign change of their y-gap there.
    pub fn check_injective(&self, leaves: usize) -> Result<()> {
        let ds = (self.s1 - self.s0) / leaves as f64;
        for sign in [-1.0, 1.0] {
            for k in 0..leaves {
                let sa = self.s0 + k as f64 * ds;
                let sb = sa + ds;
                let ma = (self.sigma)(sa) + sign * (self.delta)(sa);
                let mb = (self.sigma)(sb) + sign * (self.delta)(sb);
                let x_lo = sb;
                let x_hi = sa + self.eps;
                if x_hi <= x_lo {
                    continue;
                }
                let mut seen_pos = false;
                let mut seen_neg = false;
                for j in 0..=8 {
                    let x = x_lo + (x_hi - x_lo) * j as f64 / 8.0;
                    let ya = (self.gamma_y)(sa) + ma * (x - sa);
                    let yb = (self.gamma_y)(sb) + mb * (x - sb);
                    let d = yb - ya;
                    if d > 1e-12 {
                        seen_pos = true;
                    }
                    if d < -1e-12 {
                        seen_neg = true;
                    }
                }
                if seen_pos && seen_neg {
                    return Err(Error::NonInjective(format!(
                        "leaves from s = {sa} and s = {sb} cross inside the sweep"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Sample a flex surface onto a grid, masking cells along the projected
/// nexus. Also returns the ambient point cloud of the swept leaves.
pub fn make_flex(
    fs: &FlexSurface,
    header: GridHeader,
    cloud_leaves: usize,
    cloud_samples: usize,
) -> Result<(Vec<crate::heis::Point>, GraphGrid, PiecewiseGraph)> {
    fs.check_injective(64)?;
    let mut values = Vec::with_capacity(header.n_nodes());
    for ix in 0..header.nx {
        for iz in 0..header.nz {
            values.push(fs.graph_value(header.x(ix), header.z(iz))?);
        }
    }
    let mut grid = GraphGrid::new(header, values, None)?;
    let curve: Sampler1 = {
        let fsc = fs.clone_tables();
        Arc::new(move |s: f64| fsc.curve_z(s))
    };
    grid.mask_curve(|x| curve(x));

    let mut cloud = Vec::with_capacity(cloud_leaves * cloud_samples * 2);
    for k in 0..cloud_leaves {
        let s = fs.s0 + (fs.s1 - fs.s0) * k as f64 / (cloud_leaves.max(2) - 1) as f64;
        for j in 0..cloud_samples {
            let t = fs.eps * (j as f64 + 0.5) / cloud_samples as f64;
            cloud.push(fs.rho(s, t));
            cloud.push(fs.rho(s, -t));
        }
    }

    let sigma_p: Sampler1 = {
        let (s, d) = (fs.sigma.clone(), fs.delta.clone());
        Arc::new(move |t: f64| s(t) - d(t))
    };
    let sigma_m: Sampler1 = {
        let (s, d) = (fs.sigma.clone(), fs.delta.clone());
        Arc::new(move |t: f64| s(t) + d(t))
    };
    let f_eval: Sampler2 = {
        let fsc = fs.clone_tables();
        Arc::new(move |x, z| fsc.graph_value(x, z).unwrap_or(f64::NAN))
    };
    let pg = PiecewiseGraph {
        s0: fs.s0,
        s1: fs.s1,
        curve_z: curve,
        sigma0: fs.sigma.clone(),
        sigma_plus: sigma_p,
        sigma_minus: sigma_m,
        f: f_eval,
        grid: grid.clone(),
    };
    pg.check_slope_order(16)?;
    Ok((cloud, grid, pg))
}
