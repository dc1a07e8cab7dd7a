//! Surfaces built from horizontal rays.
//!
//! A [`RayFan`] is a finite combinatorial presentation of such a surface:
//! nexus rays carrying branch rays that emanate from sampled points along
//! them, plus fan rays through the origin. [`make_lambda_k`] realizes the
//! energy-minimizing cone over an interval complement `K ⊂ [−α, α]` of
//! slopes; [`make_sigma_k`] realizes the area-minimizing cone over a finite
//! direction set `K ⊂ S¹`.

use crate::error::{Error, Result};
use crate::grid::{GraphGrid, GridHeader};
use crate::heis::{mul, Box3, Point};
use crate::zoo::cantor::IntervalComplement;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayKind {
    Nexus,
    Branch,
    Fan,
}

/// A horizontal ray `u ↦ origin·(a·u, b·u, 0)`, `u ≥ 0`. Directions are
/// normalized to unit x-speed (`a = ±1`) except for vertical rays (`a = 0`,
/// `b = ±1`), which only occur in circle-direction fans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Point,
    pub a: f64,
    pub b: f64,
    pub kind: RayKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parent: Option<usize>,
}

impl Ray {
    pub fn from_slope(origin: Point, slope: f64, kind: RayKind, parent: Option<usize>) -> Self {
        Ray { origin, a: 1.0, b: slope, kind, parent }
    }

    pub fn from_angle(origin: Point, theta: f64, kind: RayKind, parent: Option<usize>) -> Self {
        let (s, c) = theta.sin_cos();
        if c.abs() < 1e-12 {
            Ray { origin, a: 0.0, b: s.signum(), kind, parent }
        } else {
            Ray { origin, a: c.signum(), b: s / c.abs(), kind, parent }
        }
    }

    pub fn point(&self, u: f64) -> Point {
        mul(self.origin, Point::new(self.a * u, self.b * u, 0.0))
    }

    /// Slope of the projected line, when the ray is not vertical.
    pub fn slope(&self) -> Option<f64> {
        if self.a == 0.0 {
            None
        } else {
            Some(self.b / self.a)
        }
    }

    /// Whether `p` lies on the ray (with `u ≥ −tol`).
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let u = if self.a != 0.0 {
            (p.x - self.origin.x) / self.a
        } else if self.b != 0.0 {
            (p.y - self.origin.y) / self.b
        } else {
            return false;
        };
        if u < -tol {
            return false;
        }
        let q = self.point(u);
        (q.x - p.x).abs() <= tol && (q.y - p.y).abs() <= tol && (q.z - p.z).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayFan {
    pub rays: Vec<Ray>,
}

impl RayFan {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rays": self.rays.iter().map(|r| {
                let mut obj = serde_json::Map::new();
                obj.insert("origin".into(), serde_json::json!([r.origin.x, r.origin.y, r.origin.z]));
                obj.insert("a".into(), serde_json::json!(r.a));
                obj.insert("slope".into(), serde_json::json!(r.b));
                obj.insert("kind".into(), serde_json::json!(match r.kind {
                    RayKind::Nexus => "nexus",
                    RayKind::Branch => "branch",
                    RayKind::Fan => "fan",
                }));
                if let Some(p) = r.parent {
                    obj.insert("parent".into(), serde_json::json!(p));
                }
                serde_json::Value::Object(obj)
            }).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let rays = v
            .get("rays")
            .and_then(|r| r.as_array())
            .ok_or_else(|| Error::InvalidSurface("fan json lacks a rays array".into()))?;
        let mut out = Vec::with_capacity(rays.len());
        for r in rays {
            let origin = r
                .get("origin")
                .and_then(|o| o.as_array())
                .filter(|o| o.len() == 3)
                .ok_or_else(|| Error::InvalidSurface("ray origin must be [x,y,z]".into()))?;
            let get = |k: &str| r.get(k).and_then(|x| x.as_f64());
            let kind = match r.get("kind").and_then(|k| k.as_str()) {
                Some("nexus") => RayKind::Nexus,
                Some("branch") => RayKind::Branch,
                Some("fan") => RayKind::Fan,
                other => {
                    return Err(Error::InvalidSurface(format!("bad ray kind {other:?}")));
                }
            };
            let o = Point::new(
                origin[0].as_f64().unwrap_or(f64::NAN),
                origin[1].as_f64().unwrap_or(f64::NAN),
                origin[2].as_f64().unwrap_or(f64::NAN),
            );
            if !o.is_finite() {
                return Err(Error::InvalidSurface("non-finite ray origin".into()));
            }
            out.push(Ray {
                origin: o,
                a: get("a").unwrap_or(1.0),
                b: get("slope")
                    .ok_or_else(|| Error::InvalidSurface("ray lacks a slope".into()))?,
                kind,
                parent: r.get("parent").and_then(|p| p.as_u64()).map(|p| p as usize),
            });
        }
        let fan = RayFan { rays: out };
        fan.check_parents(1e-9)?;
        Ok(fan)
    }

    /// Every branch ray must emanate from a point of its parent ray.
    pub fn check_parents(&self, tol: f64) -> Result<()> {
        for (i, r) in self.rays.iter().enumerate() {
            if let Some(p) = r.parent {
                let parent = self
                    .rays
                    .get(p)
                    .ok_or_else(|| Error::InvalidSurface(format!("ray {i} has no parent {p}")))?;
                if !parent.contains(r.origin, tol) {
                    return Err(Error::InvalidSurface(format!(
                        "branch ray {i} origin is off its parent ray {p}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn max_slope(&self) -> f64 {
        self.rays.iter().filter_map(|r| r.slope()).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_slope(&self) -> f64 {
        self.rays.iter().filter_map(|r| r.slope()).fold(f64::INFINITY, f64::min)
    }

    /// Distance from `p` to the closest point of the fan, by exact per-ray
    /// projection in coordinates.
    pub fn distance_to(&self, p: Point) -> f64 {
        let mut best = f64::INFINITY;
        for r in &self.rays {
            // minimize |p − r(u)|² over u ≥ 0; r(u) is affine in u
            let r0 = r.point(0.0);
            let d = [r0.x - p.x, r0.y - p.y, r0.z - p.z];
            let v = {
                let r1 = r.point(1.0);
                [r1.x - r0.x, r1.y - r0.y, r1.z - r0.z]
            };
            let vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            let u = if vv > 0.0 {
                (-(d[0] * v[0] + d[1] * v[1] + d[2] * v[2]) / vv).max(0.0)
            } else {
                0.0
            };
            let q = r.point(u);
            let dist =
                ((q.x - p.x).powi(2) + (q.y - p.y).powi(2) + (q.z - p.z).powi(2)).sqrt();
            best = best.min(dist);
        }
        best
    }
}

/// Sampling density for fan construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanSampling {
    /// How far branch-ray origins march along each nexus ray.
    pub extent: f64,
    /// Spacing of branch-ray origins along nexus rays.
    pub branch_spacing: f64,
    /// Slope (or angle) step used to sample the retained set `K` when it has
    /// interior.
    pub fan_step: f64,
}

impl Default for FanSampling {
    fn default() -> Self {
        FanSampling { extent: 4.0, branch_spacing: 0.05, fan_step: 0.02 }
    }
}

/// The cone `Λ_K` over an interval complement `K = [−α,α] ∖ ⋃(aᵢ,bᵢ)` of
/// slopes: the negative x-axis `R₀` with branch pairs of slope `±α`, a
/// positive fan ray from the origin for each retained slope, and for each
/// removed interval a nexus ray of slope `mᵢ = (aᵢ+bᵢ)/2` carrying branch
/// pairs of slopes `aᵢ` and `bᵢ`.
pub fn make_lambda_k(k: &IntervalComplement, sampling: &FanSampling) -> RayFan {
    let mut rays = Vec::new();
    let alpha = k.alpha;
    // R0, the negative x-axis
    rays.push(Ray { origin: Point::ORIGIN, a: -1.0, b: 0.0, kind: RayKind::Nexus, parent: None });
    let r0 = 0usize;

    // fan rays through the origin for each retained slope interval
    for (lo, hi) in k.retained() {
        if hi - lo < 1e-14 {
            rays.push(Ray::from_slope(Point::ORIGIN, lo, RayKind::Fan, None));
            continue;
        }
        let n = ((hi - lo) / sampling.fan_step).ceil().max(1.0) as usize;
        for j in 0..=n {
            let slope = lo + (hi - lo) * j as f64 / n as f64;
            rays.push(Ray::from_slope(Point::ORIGIN, slope, RayKind::Fan, None));
        }
    }

    // nexus rays with their branch pairs
    let mut branch_jobs: Vec<(usize, f64, f64)> = Vec::new();
    for gap in k.gaps() {
        let idx = rays.len();
        rays.push(Ray::from_slope(Point::ORIGIN, gap.mid, RayKind::Nexus, None));
        branch_jobs.push((idx, gap.a, gap.b));
    }

    // branch pairs along R0 with slopes ±α
    let steps = (sampling.extent / sampling.branch_spacing).floor() as usize;
    for s in 1..=steps {
        let u = s as f64 * sampling.branch_spacing;
        let origin = rays[r0].point(u);
        rays.push(Ray::from_slope(origin, alpha, RayKind::Branch, Some(r0)));
        rays.push(Ray::from_slope(origin, -alpha, RayKind::Branch, Some(r0)));
    }
    for (idx, a, b) in branch_jobs {
        for s in 1..=steps {
            let u = s as f64 * sampling.branch_spacing;
            let origin = rays[idx].point(u);
            rays.push(Ray::from_slope(origin, a, RayKind::Branch, Some(idx)));
            rays.push(Ray::from_slope(origin, b, RayKind::Branch, Some(idx)));
        }
    }
    RayFan { rays }
}

/// The cone `Σ_K` over a finite set of directions in `S¹`, identified with
/// angles in `(−π, π]`: a fan ray from the origin per direction, and for
/// each gap between consecutive directions a nexus ray toward the angular
/// midpoint carrying branch pairs toward the gap endpoints.
pub fn make_sigma_k(angles: &[f64], sampling: &FanSampling) -> Result<RayFan> {
    if angles.len() < 2 {
        return Err(Error::InvalidSurface(
            "need at least two directions so every gap is shorter than the full circle".into(),
        ));
    }
    let mut sorted: Vec<f64> = angles.to_vec();
    sorted.sort_by(|p, q| p.partial_cmp(q).unwrap());
    for w in sorted.windows(2) {
        if (w[1] - w[0]).abs() < 1e-12 {
            return Err(Error::InvalidSurface("duplicate directions".into()));
        }
    }
    if sorted[0] <= -std::f64::consts::PI || *sorted.last().unwrap() > std::f64::consts::PI {
        return Err(Error::InvalidSurface("angles must lie in (-pi, pi]".into()));
    }

    let wrap = |theta: f64| {
        let mut t = theta;
        while t > std::f64::consts::PI {
            t -= 2.0 * std::f64::consts::PI;
        }
        while t <= -std::f64::consts::PI {
            t += 2.0 * std::f64::consts::PI;
        }
        t
    };

    let mut rays = Vec::new();
    for &theta in &sorted {
        rays.push(Ray::from_angle(Point::ORIGIN, theta, RayKind::Fan, None));
    }
    let n = sorted.len();
    let steps = (sampling.extent / sampling.branch_spacing).floor() as usize;
    for j in 0..n {
        let a = sorted[j];
        let b = if j + 1 < n { sorted[j + 1] } else { sorted[0] + 2.0 * std::f64::consts::PI };
        let mid = wrap(0.5 * (a + b));
        let idx = rays.len();
        rays.push(Ray::from_angle(Point::ORIGIN, mid, RayKind::Nexus, None));
        for s in 1..=steps {
            let u = s as f64 * sampling.branch_spacing;
            let origin = rays[idx].point(u);
            rays.push(Ray::from_angle(origin, wrap(a), RayKind::Branch, Some(idx)));
            rays.push(Ray::from_angle(origin, wrap(b), RayKind::Branch, Some(idx)));
        }
    }
    Ok(RayFan { rays })
}

/// The cone `Σ_K` for a direction set given as an interval complement of
/// angles inside `(−π/2, π/2)`: fan rays across the retained angle pieces, a
/// nexus with branch pairs per removed interval, and the far nexus along the
/// negative x-axis carrying branch pairs toward `±α`. This is the angle
/// analogue of [`make_lambda_k`] and the input family for stretched limits.
pub fn make_sigma_from_angle_complement(
    k: &IntervalComplement,
    sampling: &FanSampling,
) -> Result<RayFan> {
    if k.alpha >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::InvalidSurface(
            "angle complement must stay strictly inside (-pi/2, pi/2)".into(),
        ));
    }
    let mut rays = Vec::new();
    rays.push(Ray { origin: Point::ORIGIN, a: -1.0, b: 0.0, kind: RayKind::Nexus, parent: None });
    let far = 0usize;
    for (lo, hi) in k.retained() {
        if hi - lo < 1e-14 {
            rays.push(Ray::from_angle(Point::ORIGIN, lo, RayKind::Fan, None));
            continue;
        }
        let n = ((hi - lo) / sampling.fan_step).ceil().max(1.0) as usize;
        for j in 0..=n {
            rays.push(Ray::from_angle(
                Point::ORIGIN,
                lo + (hi - lo) * j as f64 / n as f64,
                RayKind::Fan,
                None,
            ));
        }
    }
    let mut branch_jobs: Vec<(usize, f64, f64)> = Vec::new();
    for gap in k.gaps() {
        let idx = rays.len();
        rays.push(Ray::from_angle(Point::ORIGIN, gap.mid, RayKind::Nexus, None));
        branch_jobs.push((idx, gap.a, gap.b));
    }
    let steps = (sampling.extent / sampling.branch_spacing).floor() as usize;
    for s in 1..=steps {
        let u = s as f64 * sampling.branch_spacing;
        let origin = rays[far].point(u);
        rays.push(Ray::from_angle(origin, k.alpha, RayKind::Branch, Some(far)));
        rays.push(Ray::from_angle(origin, -k.alpha, RayKind::Branch, Some(far)));
    }
    for (idx, a, b) in branch_jobs {
        for s in 1..=steps {
            let u = s as f64 * sampling.branch_spacing;
            let origin = rays[idx].point(u);
            rays.push(Ray::from_angle(origin, a, RayKind::Branch, Some(idx)));
            rays.push(Ray::from_angle(origin, b, RayKind::Branch, Some(idx)));
        }
    }
    Ok(RayFan { rays })
}

/// Image of a fan under the stretch `s_{a,b}`; rays map to rays.
pub fn stretch_fan(fan: &RayFan, a: f64, b: f64) -> RayFan {
    assert!(a != 0.0 && b != 0.0);
    let rays = fan
        .rays
        .iter()
        .map(|r| {
            let origin = Point::new(a * r.origin.x, b * r.origin.y, a * b * r.origin.z);
            let (mut da, mut db) = (a * r.a, b * r.b);
            if da != 0.0 {
                let scale = da.abs();
                da /= scale;
                db /= scale;
            } else {
                db = db.signum();
            }
            Ray { origin, a: da, b: db, kind: r.kind, parent: r.parent }
        })
        .collect();
    RayFan { rays }
}

/// Points on the fan inside a box, stepped along each ray at spacing
/// `1/density`.
pub fn rayfan_sample(fan: &RayFan, bounds: &Box3, density: f64) -> Result<Vec<Point>> {
    assert!(density > 0.0);
    let step = 1.0 / density;
    let mut out = Vec::new();
    // conservative parameter cap from the box diameter
    let reach = (bounds.x1 - bounds.x0).abs()
        + (bounds.y1 - bounds.y0).abs()
        + bounds.x0.abs()
        + bounds.x1.abs()
        + bounds.y0.abs()
        + bounds.y1.abs();
    for r in &fan.rays {
        let mut u = 0.0;
        while u <= reach {
            let p = r.point(u);
            if bounds.contains(p) {
                out.push(p);
            }
            u += step;
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(out)
}

/// Reconstruct the graph function of a fan over a `V0` rectangle: for every
/// node column the rays are intersected with `{x = const}`, each contributing
/// its exact `Π`-projection; a node takes the y-value of the ray whose
/// projection lands nearest in z.
pub fn rayfan_to_graph(fan: &RayFan, header: GridHeader) -> Result<GraphGrid> {
    let mut values = vec![0.0; header.n_nodes()];
    let mut candidates: Vec<(f64, f64)> = Vec::with_capacity(fan.rays.len());
    for ix in 0..header.nx {
        let x = header.x(ix);
        candidates.clear();
        for r in &fan.rays {
            if r.a == 0.0 {
                continue;
            }
            let u = (x - r.origin.x) / r.a;
            if u < 0.0 {
                continue;
            }
            let p = r.point(u);
            let zeta = p.z - 0.5 * p.x * p.y;
            candidates.push((zeta, p.y));
        }
        if candidates.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        candidates.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        for iz in 0..header.nz {
            let z = header.z(iz);
            let pos = candidates.partition_point(|c| c.0 < z);
            let mut best = f64::INFINITY;
            let mut val = 0.0;
            for cand in candidates.iter().take((pos + 1).min(candidates.len())).skip(pos.saturating_sub(1)) {
                let d = (cand.0 - z).abs();
                if d < best {
                    best = d;
                    val = cand.1;
                }
            }
            values[header.idx(ix, iz)] = val;
        }
    }
    GraphGrid::new(header, values, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{intrinsic_gradient, lipschitz_check};
    use crate::heis::{apply_auto, GraphAutomorphism};
    use crate::zoo::cantor::make_cantor;
    use approx::assert_abs_diff_eq;

    fn herringbone_k(alpha: f64) -> IntervalComplement {
        IntervalComplement::new(alpha, vec![(-alpha, alpha)]).unwrap()
    }

    #[test]
    fn lambda_structure_for_single_gap() {
        // K = {±α}: R0, two degenerate fan rays, one nexus of slope 0, and
        // branch pairs — the herringbone of a² = 2α
        let k = herringbone_k(0.5);
        let fan = make_lambda_k(&k, &FanSampling { extent: 1.0, branch_spacing: 0.25, fan_step: 0.1 });
        fan.check_parents(1e-12).unwrap();
        let nexus: Vec<&Ray> = fan.rays.iter().filter(|r| r.kind == RayKind::Nexus).collect();
        assert_eq!(nexus.len(), 2); // R0 and the gap bisector
        assert_abs_diff_eq!(nexus[1].b, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fan.max_slope(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(fan.min_slope(), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn lambda_full_k_is_a_fan_of_all_slopes() {
        let k = IntervalComplement::new(1.0, vec![]).unwrap();
        let fan = make_lambda_k(&k, &FanSampling { extent: 1.0, branch_spacing: 0.5, fan_step: 0.25 });
        let fans = fan.rays.iter().filter(|r| r.kind == RayKind::Fan).count();
        assert_eq!(fans, 9); // slopes −1..1 step 0.25
        // all fan rays pass through the origin with z = 0
        for r in fan.rays.iter().filter(|r| r.kind == RayKind::Fan) {
            assert_eq!(r.origin, Point::ORIGIN);
        }
    }

    #[test]
    fn lambda_cantor_depth_three_counts_and_invariants() {
        let k = make_cantor(3, 1.0).unwrap();
        let sampling = FanSampling { extent: 2.0, branch_spacing: 0.5, fan_step: 0.05 };
        let fan = make_lambda_k(&k, &sampling);
        fan.check_parents(1e-12).unwrap();
        let nexus = fan.rays.iter().filter(|r| r.kind == RayKind::Nexus).count();
        assert_eq!(nexus, 1 + 7); // R0 plus one per removed interval
        let branches = fan.rays.iter().filter(|r| r.kind == RayKind::Branch).count();
        assert_eq!(branches, 8 * 4 * 2); // 8 nexus rays × 4 origins × a pair
        // sup/inf of K are recovered from the fan
        assert_abs_diff_eq!(fan.max_slope(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fan.min_slope(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn lambda_samples_are_an_intrinsic_lipschitz_z_graph() {
        let k = make_cantor(2, 0.8).unwrap();
        let fan = make_lambda_k(&k, &FanSampling { extent: 2.0, branch_spacing: 0.4, fan_step: 0.1 });
        let bounds = Box3::new(-1.5, 1.5, -1.5, 1.5, -1.5, 1.5);
        let pts = rayfan_sample(&fan, &bounds, 6.0).unwrap();
        // thin to keep the pair scan cheap
        let sample: Vec<Point> = pts.iter().step_by(3).copied().collect();
        let rep = lipschitz_check(&sample, 0.8);
        assert!(rep.passed, "worst margin {}", rep.worst_margin);
        // Z-graph: equal (x,y) forces equal z
        for i in 0..sample.len() {
            for j in i + 1..sample.len() {
                let (p, q) = (sample[i], sample[j]);
                if (p.x - q.x).abs() < 1e-9 && (p.y - q.y).abs() < 1e-9 {
                    assert!((p.z - q.z).abs() < 1e-7, "two z values over one (x,y)");
                }
            }
        }
    }

    #[test]
    fn lambda_is_scale_invariant_as_a_point_set() {
        // scaling by s_{t,t} keeps every sampled point on the surface, which
        // the closed-form graph model evaluates exactly; the finite fan only
        // quantizes branch origins, so nearby rays exist as well
        let k = make_cantor(1, 1.0).unwrap();
        let fan = make_lambda_k(&k, &FanSampling { extent: 3.0, branch_spacing: 0.1, fan_step: 0.05 });
        let model = crate::zoo::model::WedgeModel::from_slopes(&k);
        let bounds = Box3::new(-1.0, 1.0, -1.0, 1.0, -1.0, 1.0);
        let pts = rayfan_sample(&fan, &bounds, 4.0).unwrap();
        for &t in &[0.4, 1.7] {
            let s = GraphAutomorphism::stretch(t, t);
            for p in pts.iter().step_by(5) {
                let sp = apply_auto(&s, *p);
                let v = crate::heis::proj_cap_pi(sp);
                assert_abs_diff_eq!(model.eval(v.x, v.z), sp.y, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn sigma_structure() {
        let eps = 0.1;
        let fan = make_sigma_k(&[-eps, 0.0, eps], &FanSampling { extent: 1.0, branch_spacing: 0.5, fan_step: 0.1 })
            .unwrap();
        fan.check_parents(1e-12).unwrap();
        let fans = fan.rays.iter().filter(|r| r.kind == RayKind::Fan).count();
        let nexus = fan.rays.iter().filter(|r| r.kind == RayKind::Nexus).count();
        assert_eq!(fans, 3);
        assert_eq!(nexus, 3); // two small-gap bisectors and the far bisector at π
        // the far nexus points along the negative x-axis
        let far = fan
            .rays
            .iter()
            .find(|r| r.kind == RayKind::Nexus && r.a == -1.0)
            .expect("far nexus");
        assert_abs_diff_eq!(far.b, 0.0, epsilon = 1e-12);

        // K = {0, π} produces vertical bisector rays; structure check only
        let half = make_sigma_k(&[0.0, std::f64::consts::PI], &FanSampling::default()).unwrap();
        half.check_parents(1e-9).unwrap();
        assert!(half.rays.iter().any(|r| r.a == 0.0));
        assert!(make_sigma_k(&[0.3], &FanSampling::default()).is_err());
    }

    #[test]
    fn reconstructed_herringbone_matches_closed_form() {
        // fan of K = {±1/2} reconstructs f_1 = −√|z|·sign z; the error is
        // bounded by the branch-origin spacing and shrinks with it
        let k = herringbone_k(0.5);
        let header = GridHeader::new(-0.9, 0.9, -0.4, 0.4, 25, 25).unwrap();
        let mut prev = f64::INFINITY;
        for spacing in [0.08, 0.04, 0.02] {
            let fan = make_lambda_k(
                &k,
                &FanSampling { extent: 6.0, branch_spacing: spacing, fan_step: 0.5 },
            );
            let grid = rayfan_to_graph(&fan, header).unwrap();
            let mut worst: f64 = 0.0;
            for ix in 0..header.nx {
                for iz in 0..header.nz {
                    let z = header.z(iz);
                    let expect = -z.abs().sqrt() * z.signum();
                    worst = worst.max((grid.at(ix, iz) - expect).abs());
                }
            }
            assert!(worst < prev.max(1e-4), "worst {worst} at spacing {spacing}");
            assert!(worst < 3.0 * spacing, "worst {worst} at spacing {spacing}");
            prev = worst;
        }
    }

    #[test]
    fn reconstruction_slopes_stay_bounded_by_alpha() {
        // full K: the reconstruction is a staircase over fan rays, so the
        // slope bound holds up to a fan-density term; the window stays inside
        // the flat sector so no kink curve crosses a stencil
        let k = IntervalComplement::new(0.6, vec![]).unwrap();
        let fan = make_lambda_k(&k, &FanSampling { extent: 4.0, branch_spacing: 0.05, fan_step: 2e-4 });
        let header = GridHeader::new(0.6, 1.0, -0.1, 0.1, 33, 33).unwrap();
        let grid = rayfan_to_graph(&fan, header).unwrap();
        let sigma = intrinsic_gradient(&grid);
        for ix in 1..header.nx - 1 {
            for iz in 1..header.nz - 1 {
                assert!(sigma.at(ix, iz).abs() <= 0.6 + 0.1, "slope {}", sigma.at(ix, iz));
            }
        }
    }

    #[test]
    fn sample_counts_scale_linearly_with_density() {
        let k = herringbone_k(1.0);
        let fan = make_lambda_k(&k, &FanSampling::default());
        let bounds = Box3::new(-1.0, 1.0, -1.0, 1.0, -1.0, 1.0);
        let n1 = rayfan_sample(&fan, &bounds, 4.0).unwrap().len();
        let n2 = rayfan_sample(&fan, &bounds, 8.0).unwrap().len();
        let ratio = n2 as f64 / n1 as f64;
        assert!((1.7..2.3).contains(&ratio), "ratio {ratio}");
        // every sample lies on some ray
        for p in rayfan_sample(&fan, &bounds, 3.0).unwrap() {
            assert!(fan.rays.iter().any(|r| r.contains(p, 1e-9)));
        }
        let far = Box3::new(0.0, 1.0, 50.0, 51.0, 0.0, 1.0);
        assert!(matches!(rayfan_sample(&fan, &far, 4.0), Err(Error::EmptyIntersection)));
    }

    #[test]
    fn stretch_maps_rays_to_rays() {
        let k = make_cantor(1, 1.0).unwrap();
        let fan = make_lambda_k(&k, &FanSampling { extent: 1.0, branch_spacing: 0.25, fan_step: 0.2 });
        let stretched = stretch_fan(&fan, 0.5, 2.0);
        stretched.check_parents(1e-12).unwrap();
        // slopes multiply by b/a = 4
        assert_abs_diff_eq!(stretched.max_slope(), 4.0, epsilon = 1e-12);
        // points transform with the automorphism
        let s = GraphAutomorphism::stretch(0.5, 2.0);
        for (r, rs) in fan.rays.iter().zip(&stretched.rays) {
            let p = apply_auto(&s, r.point(0.7));
            assert!(rs.contains(p, 1e-9));
        }
    }
}
