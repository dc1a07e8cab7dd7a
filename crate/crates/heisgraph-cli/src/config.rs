//! Run configuration schema. Unknown keys are rejected everywhere so typos
//! fail loudly; reports embed the config hash, the seed, and the tolerances
//! actually applied.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default)]
    pub surface: Option<SurfaceSpec>,
    #[serde(default)]
    pub domain: Option<Domain>,
    #[serde(default)]
    pub resolution: Option<Resolution>,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    /// Base parameter of the variation t-schedule.
    #[serde(default)]
    pub t: Option<f64>,
    /// Interval complement driving calibration diagnostics.
    #[serde(default)]
    pub k: Option<KSpec>,
    #[serde(default)]
    pub calibrate: Option<CalibrateSpec>,
    #[serde(default)]
    pub stretch: Option<StretchSpec>,
    #[serde(default)]
    pub indicator: Option<IndicatorSpec>,
    #[serde(default)]
    pub section: Option<SectionSpec>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    #[serde(default)]
    pub zoo: Option<String>,
    #[serde(default)]
    pub params: Option<serde_json::Value>,
    #[serde(default)]
    pub grid_file: Option<String>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub x0: f64,
    pub x1: f64,
    pub z0: f64,
    pub z1: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain { x0: -1.0, x1: 1.0, z0: -1.0, z1: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub nx: usize,
    pub nz: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { nx: 129, nz: 129 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    /// Potential value on `V0`: an expression in x, z or a sampled grid.
    pub u0: PotentialInput,
    /// Y-derivative of the potential, same forms; defaults to zero.
    #[serde(default)]
    pub u1: Option<PotentialInput>,
    #[serde(default)]
    pub support: Option<Domain>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PotentialInput {
    Expression(String),
    Grid { grid_file: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KSpec {
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub intervals: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub cantor: Option<CantorSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorSpec {
    pub depth: u32,
    pub alpha: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSpec {
    /// Random straddling boxes per interface family.
    #[serde(default = "default_boxes")]
    pub boxes: usize,
    /// Face quadrature spacing for box fluxes.
    #[serde(default = "default_box_h")]
    pub box_h: f64,
    /// Spacing of the divergence stencils.
    #[serde(default = "default_div_h")]
    pub div_h: f64,
    /// Negative control: add `amount` to the upper branch slope of `wedge`.
    #[serde(default)]
    pub perturb: Option<PerturbSpec>,
}

impl Default for CalibrateSpec {
    fn default() -> Self {
        CalibrateSpec {
            boxes: default_boxes(),
            box_h: default_box_h(),
            div_h: default_div_h(),
            perturb: None,
        }
    }
}

fn default_boxes() -> usize {
    50
}

fn default_box_h() -> f64 {
    0.01
}

fn default_div_h() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbSpec {
    pub wedge: usize,
    pub amount: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StretchSpec {
    pub r_list: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorSpec {
    /// Σ over {−ε, 0, ε} against the xz-plane on the unit box.
    #[serde(default)]
    pub eps_list: Option<Vec<f64>>,
    /// Stretched circle-direction cones against the slope cone of the same
    /// interval complement, over `n ∈ n_list`.
    #[serde(default)]
    pub n_list: Option<Vec<f64>>,
    #[serde(default = "default_voxels")]
    pub resolution: usize,
    #[serde(default)]
    pub bounds: Option<[f64; 6]>,
}

fn default_voxels() -> usize {
    128
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    #[serde(default)]
    pub x: Option<f64>,
    #[serde(default)]
    pub z: Option<f64>,
    #[serde(default = "default_section_samples")]
    pub samples: usize,
}

fn default_section_samples() -> usize {
    257
}

/// Pass/fail thresholds; every report echoes the values in force.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Interior divergence residual bound.
    pub div: f64,
    /// Interface jump residual bound.
    pub jump: f64,
    /// Box flux bound as a multiple of (surface area)·h.
    pub flux_factor: f64,
    /// Relative bound for the flux–energy identity.
    pub flux_energy: f64,
    /// Bound for |fd_slope − analytic_slope| relative to max(1, |analytic|).
    pub slope: f64,
    /// Pointwise harmonicity residual bound, when checked.
    pub harmonic: Option<f64>,
    /// Cone parameter of the intrinsic Lipschitz check, when checked.
    pub lipschitz_c: Option<f64>,
    /// Relative bound for the stretch-fit energy recovery.
    pub stretch_fit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            div: 1e-6,
            jump: 1e-9,
            flux_factor: 0.05,
            flux_energy: 0.01,
            slope: 0.01,
            harmonic: None,
            lipschitz_c: None,
            stretch_fit: 0.02,
        }
    }
}
