//! Runtime surface selection: every constructor of the zoo sits behind the
//! [`SurfaceBuilder`] trait, registered by id, so configs and the CLI pick
//! surfaces by name with JSON parameters.

use crate::error::{Error, Result};
use crate::expr;
use crate::grid::{GraphGrid, GridHeader};
use crate::zoo::cantor::{make_cantor, IntervalComplement};
use crate::zoo::model::WedgeModel;
use crate::zoo::rayfan::{
    make_lambda_k, make_sigma_from_angle_complement, make_sigma_k, FanSampling, RayFan,
};
use crate::zoo::{
    make_flex, make_herringbone, make_herringbone_pair, make_parabola, make_plane, FlexSurface,
    PiecewiseGraph,
};
use serde::Deserialize;
use std::sync::Arc;

/// Everything a construction can hand back; commands take what they need.
pub struct Surface {
    pub id: String,
    pub grid: Option<GraphGrid>,
    pub piecewise: Option<PiecewiseGraph>,
    pub fan: Option<RayFan>,
    pub model: Option<WedgeModel>,
    pub interval_complement: Option<IntervalComplement>,
    pub cloud: Option<Vec<crate::heis::Point>>,
}

impl Surface {
    fn graph_only(id: &str, grid: GraphGrid) -> Self {
        Surface {
            id: id.to_string(),
            grid: Some(grid),
            piecewise: None,
            fan: None,
            model: None,
            interval_complement: None,
            cloud: None,
        }
    }

    pub fn require_grid(&self) -> Result<&GraphGrid> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::InvalidSurface(format!("surface {} has no grid form", self.id)))
    }

    pub fn require_fan(&self) -> Result<&RayFan> {
        self.fan
            .as_ref()
            .ok_or_else(|| Error::InvalidSurface(format!("surface {} has no ray fan", self.id)))
    }
}

/// One selectable construction strategy.
pub trait SurfaceBuilder: Send + Sync {
    fn id(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn build(&self, params: &serde_json::Value, header: GridHeader) -> Result<Surface>;
}

/// Name-indexed collection of builders.
pub struct SurfaceRegistry {
    builders: Vec<Box<dyn SurfaceBuilder>>,
}

impl SurfaceRegistry {
    pub fn builtin() -> Self {
        SurfaceRegistry {
            builders: vec![
                Box::new(PlaneBuilder),
                Box::new(ParabolaBuilder),
                Box::new(HerringboneBuilder),
                Box::new(HerringbonePairBuilder),
                Box::new(FlexBuilder),
                Box::new(LambdaBuilder),
                Box::new(SigmaBuilder),
            ],
        }
    }

    pub fn get(&self, id: &str) -> Result<&dyn SurfaceBuilder> {
        self.builders
            .iter()
            .map(|b| b.as_ref())
            .find(|b| b.id() == id)
            .ok_or_else(|| Error::UnknownSurface(id.to_string()))
    }

    pub fn build(&self, id: &str, params: &serde_json::Value, header: GridHeader) -> Result<Surface> {
        self.get(id)?.build(params, header)
    }

    pub fn ids(&self) -> Vec<&'static str> {
        self.builders.iter().map(|b| b.id()).collect()
    }
}

fn from_params<T: serde::de::DeserializeOwned>(params: &serde_json::Value) -> Result<T> {
    serde_json::from_value(params.clone())
        .map_err(|e| Error::InvalidSurface(format!("bad parameters: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaneParams {
    m: f64,
    #[serde(default)]
    c: f64,
}

struct PlaneBuilder;

impl SurfaceBuilder for PlaneBuilder {
    fn id(&self) -> &'static str {
        "plane"
    }
    fn describe(&self) -> &'static str {
        "vertical plane f = m·x + c"
    }
    fn build(&self, params: &serde_json::Value, header: GridHeader) -> Result<Surface> {
        let p: PlaneParams = from_params(params)?;
        Ok(Surface::graph_only(self.id(), make_plane(p.m, p.c, header)))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyParams {}

struct ParabolaBuilder;

impl SurfaceBuilder for ParabolaBuilder {
    fn id(&self) -> &'static str {
        "parabola"
    }
    fn describe(&self) -> &'static str {
        "contact harmonic graph y = x²"
    }
    fn build(&self, params: &serde_json::Value, header: GridHeader) -> Result<Surface> {
        let _: EmptyParams = from_params(params)?;
        Ok(Surface::graph_only(self.id(), make_parabola(header)))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HerringboneParams {
    a: f64,
}

struct HerringboneBuilder;

impl SurfaceBuilder for HerringboneBuilder {
    fn id(&self) -> &'static str {
        "herringbone"
    }
    fn describe(&self) -> &'static str {
        "herringbone surface f = −a·√|z|·sign z"
    }
    fn build(&self, params: &serde_json::Value, header: GridHeader) -> Result<Surface> {
        let p: HerringboneParams = from_params(params)?;
        let (grid, pg) = make_herringbone(p.a, header)?;
        Ok(Surface {
            id: self.id().to_string(),
            grid: Some(grid),
            piecewise: Some(pg),
            fan: None,
            model: None,
            interval_complement: None,
            cloud: None,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HerringbonePairParams {
    sigma_up: f64,
    sigma_down: f64,
}

struct HerringbonePairBuilder;

impl SurfaceBuilder for HerringbonePairBuilder {
    fn id(&self) -> &'static str {
        "herringbone_pair"
    }
    fn describe(&self) -> &'static str {
        "skew herringbone with leaf slopes sigma_up above and sigma_down below the x-axis"
    }
    fn build(&self, params: &serde_json::Value, header: GridHeader) -> Result<Surface> {
        let p: HerringbonePairParams = from_params(params)?;
        let (grid, pg) = make_herringbone_pair(p.sigma_up, p.sigma_down, header)?;
        Ok(Surface {
            id: self.id().to_string(),
            grid: Some(grid),
            piecewise: Some(pg),
            fan: None,
            model: None,
            interval_complement: None,
            cloud: None,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlexParams {
    gamma_y: String,
    delta: String,
    s0: f64,
    s1: f64,
    eps: f64,
    #[serde(default = "default_cloud")]
    cloud_leaves: usize,
    #[serde(default = "default_cloud")]
    cloud_samples: usize,
}

fn default_cloud() -> usize {
    32
}

struct FlexBuilder;

impl SurfaceBuilder for FlexBuilder {
    fn id(&self) -> &'static str {
        "flex"
    }
    fn describe(&self) -> &'static str {
        "ruled surface swept from a horizontal directrix, gamma_y and delta as expressions in s"
    }
    fn build(&self, params: &serde_json::Value, header: GridHeader) -> Result<Surface> {
        let p: FlexParams = from_params(params)?;
        let gamma_y = expr::parse(&p.gamma_y, &["s"])?;
        let delta = expr::parse(&p.delta, &["s"])?;
        let sigma = gamma_y.diff(0);
        let fs = FlexSurface::new(
            p.s0,
            p.s1,
            p.eps,
            Arc::new(move |s| gamma_y.eval(&[s])),
            Arc::new(move |s| sigma.eval(&[s])),
            Arc::new(move |s| delta.eval(&[s])),
        )?;
        let (cloud, grid, pg) = make_flex(&fs, header, p.cloud_leaves, p.cloud_samples)?;
        Ok(Surface {
            id: self.id().to_string(),
            grid: Some(grid),
            piecewise: Some(pg),
            fan: None,
            model: None,
            interval_complement: None,
            cloud: Some(cloud),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplingParams {
    extent: f64,
    branch_spacing: f64,
    fan_step: f64,
}

impl From<SamplingParams> for FanSampling {
    fn from(p: SamplingParams) -> Self {
        FanSampling { extent: p.extent, branch_spacing: p.branch_spacing, fan_step: p.fan_step }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CantorParams {
    depth: u32,
    alpha: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LambdaParams {
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    intervals: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    cantor: Option<CantorParams>,
    #[serde(default)]
    sampling: Option<SamplingParams>,
}

struct LambdaBuilder;

impl SurfaceBuilder for LambdaBuilder {
    fn id(&self) -> &'static str {
        "lambda_k"
    }
    fn describe(&self) -> &'static str {
        "energy-minimizing cone over an interval complement of slopes"
    }
    fn build(&self, params: &serde_json::Value, header: GridHeader) -> Result<Surface> {
        let p: LambdaParams = from_params(params)?;
        let k = match (p.cantor, p.alpha, p.intervals) {
            (Some(c), None, None) => make_cantor(c.depth, c.alpha)?,
            (None, Some(alpha), intervals) => {
                IntervalComplement::new(alpha, intervals.unwrap_or_default())?
            }
            _ => {
                return Err(Error::InvalidSurface(
                    "give either cantor {depth, alpha} or alpha with optional intervals".into(),
                ))
            }
        };
        let sampling = p.sampling.map(FanSampling::from).unwrap_or_default();
        let fan = make_lambda_k(&k, &sampling);
        let model = WedgeModel::from_slopes(&k);
        let grid = model.to_grid(header, true)?;
        Ok(Surface {
            id: self.id().to_string(),
            grid: Some(grid),
            piecewise: None,
            fan: Some(fan),
            model: Some(model),
            interval_complement: Some(k),
            cloud: None,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SigmaParams {
    #[serde(default)]
    angles: Option<Vec<f64>>,
    #[serde(default)]
    angle_complement: Option<AngleComplementParams>,
    #[serde(default)]
    sampling: Option<SamplingParams>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AngleComplementParams {
    alpha: f64,
    #[serde(default)]
    intervals: Vec<(f64, f64)>,
}

struct SigmaBuilder;

impl SurfaceBuilder for SigmaBuilder {
    fn id(&self) -> &'static str {
        "sigma_k"
    }
    fn describe(&self) -> &'static str {
        "area-minimizing cone over a direction set in the circle"
    }
    fn build(&self, params: &serde_json::Value, header: GridHeader) -> Result<Surface> {
        let p: SigmaParams = from_params(params)?;
        let sampling = p.sampling.map(FanSampling::from).unwrap_or_default();
        match (p.angles, p.angle_complement) {
            (Some(angles), None) => {
                let fan = make_sigma_k(&angles, &sampling)?;
                Ok(Surface {
                    id: self.id().to_string(),
                    grid: None,
                    piecewise: None,
                    fan: Some(fan),
                    model: None,
                    interval_complement: None,
                    cloud: None,
                })
            }
            (None, Some(ac)) => {
                let k = IntervalComplement::new(ac.alpha, ac.intervals)?;
                let fan = make_sigma_from_angle_complement(&k, &sampling)?;
                let model = WedgeModel::from_angles(&k)?;
                let grid = model.to_grid(header, true)?;
                Ok(Surface {
                    id: self.id().to_string(),
                    grid: Some(grid),
                    piecewise: None,
                    fan: Some(fan),
                    model: Some(model),
                    interval_complement: Some(k),
                    cloud: None,
                })
            }
            _ => Err(Error::InvalidSurface(
                "give either angles or angle_complement {alpha, intervals}".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn header() -> GridHeader {
        GridHeader::new(-1.0, 1.0, -1.0, 1.0, 17, 17).unwrap()
    }

    #[test]
    fn builtin_ids_and_selection() {
        let reg = SurfaceRegistry::builtin();
        let ids = reg.ids();
        for want in ["plane", "parabola", "herringbone", "herringbone_pair", "flex", "lambda_k", "sigma_k"] {
            assert!(ids.contains(&want), "missing {want}");
        }
        assert!(matches!(reg.get("nope"), Err(Error::UnknownSurface(_))));
    }

    #[test]
    fn builds_each_kind() {
        let reg = SurfaceRegistry::builtin();
        let s = reg.build("plane", &json!({"m": 1.0, "c": 0.5}), header()).unwrap();
        assert!(s.grid.is_some());
        let s = reg.build("parabola", &json!({}), header()).unwrap();
        assert!(s.grid.is_some());
        let s = reg.build("herringbone", &json!({"a": 1.0}), header()).unwrap();
        assert!(s.piecewise.is_some());
        let s = reg
            .build("herringbone_pair", &json!({"sigma_up": -0.1, "sigma_down": 0.3}), header())
            .unwrap();
        assert!(s.piecewise.is_some());
        // the flex ribbon is shallow in z, so its grid domain must sit inside
        let flex_header = GridHeader::new(-0.5, 0.5, -0.1, 0.1, 17, 17).unwrap();
        let s = reg
            .build(
                "flex",
                &json!({"gamma_y": "0.1*sin(s)", "delta": "0.3", "s0": -3.0, "s1": 3.0, "eps": 1.5}),
                flex_header,
            )
            .unwrap();
        assert!(s.grid.is_some() && s.cloud.is_some());
        let s = reg
            .build("lambda_k", &json!({"cantor": {"depth": 2, "alpha": 1.0}}), header())
            .unwrap();
        assert!(s.fan.is_some() && s.model.is_some() && s.grid.is_some());
        let s = reg
            .build(
                "sigma_k",
                &json!({"angle_complement": {"alpha": 0.1, "intervals": [[-0.1, 0.0], [0.0, 0.1]]}}),
                header(),
            )
            .unwrap();
        assert!(s.fan.is_some() && s.model.is_some());
    }

    #[test]
    fn rejects_unknown_parameter_keys() {
        let reg = SurfaceRegistry::builtin();
        assert!(reg.build("plane", &json!({"m": 1.0, "tilt": 2.0}), header()).is_err());
        assert!(reg.build("lambda_k", &json!({}), header()).is_err());
        assert!(reg
            .build("lambda_k", &json!({"alpha": 1.0, "cantor": {"depth": 1, "alpha": 1.0}}), header())
            .is_err());
    }
}
