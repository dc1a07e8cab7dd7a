//! Command implementations. Every command is deterministic given the config
//! and seed; reports embed the config hash and the tolerances in force.

use crate::config::{Domain, PotentialInput, PotentialSpec, RunConfig, SurfaceSpec};
use heisgraph::calculus::{
    area, energy, intrinsic_gradient, lipschitz_check,
};
use heisgraph::calibration::{
    bar_m, div_residual, flux_box, flux_graph, jump_residual, tau_k, Diagnostic,
};
use heisgraph::error::Error;
use heisgraph::grid::{GraphGrid, GridHeader, Region, ScalarField};
use heisgraph::heis::{Box3, Point};
use heisgraph::limits::{indicator_l1_distance, stretch_energy_fit, SurfaceIndicator};
use heisgraph::mesh::{
    cross_section_fan, cross_section_grid, mesh_from_grid, mesh_from_rayfan, write_csv, write_obj,
    SectionPlane,
};
use heisgraph::variation::{
    b1, b2, flow_energy, fvf_contact, herringbone_a2, ContactPotential, FlowParams,
    PotentialComponent,
};
use heisgraph::zoo::cantor::IntervalComplement;
use heisgraph::zoo::model::WedgeModel;
use heisgraph::zoo::registry::{Surface, SurfaceRegistry};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::{Path, PathBuf};

pub struct Outcome {
    pub passed: bool,
}

pub type CmdResult = Result<Outcome, Error>;

fn header_from(config: &RunConfig) -> Result<GridHeader, Error> {
    let d = config.domain.unwrap_or_default();
    let r = config.resolution.unwrap_or_default();
    GridHeader::new(d.x0, d.x1, d.z0, d.z1, r.nx, r.nz)
}

fn build_surface(config: &RunConfig) -> Result<Surface, Error> {
    let spec: &SurfaceSpec = config
        .surface
        .as_ref()
        .ok_or_else(|| Error::InvalidSurface("config lacks a surface".into()))?;
    let header = header_from(config)?;
    match (&spec.zoo, &spec.grid_file) {
        (Some(zoo), None) => {
            let params = spec.params.clone().unwrap_or_else(|| json!({}));
            SurfaceRegistry::builtin().build(zoo, &params, header)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let grid = GraphGrid::from_json(&value)?;
            Ok(Surface {
                id: format!("grid_file:{path}"),
                grid: Some(grid),
                piecewise: None,
                fan: None,
                model: None,
                interval_complement: None,
                cloud: None,
            })
        }
        _ => Err(Error::InvalidSurface("give exactly one of zoo or grid_file".into())),
    }
}

fn build_k(config: &RunConfig) -> Result<IntervalComplement, Error> {
    let k = config
        .k
        .as_ref()
        .ok_or_else(|| Error::InvalidSurface("config lacks a k specification".into()))?;
    match (&k.cantor, k.alpha, &k.intervals) {
        (Some(c), None, None) => heisgraph::zoo::make_cantor(c.depth, c.alpha),
        (None, Some(alpha), intervals) => {
            IntervalComplement::new(alpha, intervals.clone().unwrap_or_default())
        }
        _ => Err(Error::InvalidSurface(
            "give either cantor {depth, alpha} or alpha with optional intervals".into(),
        )),
    }
}

fn potential_component(input: &PotentialInput) -> Result<PotentialComponent, Error> {
    match input {
        PotentialInput::Expression(text) => {
            Ok(PotentialComponent::from_expr(&heisgraph::expr::parse_xz(text)?))
        }
        PotentialInput::Grid { grid_file } => {
            let text = std::fs::read_to_string(grid_file)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let grid = GraphGrid::from_json(&value)?;
            let fx = heisgraph::grid::diff_x(&grid, &grid.as_field())?;
            let fz = heisgraph::grid::diff_z(&grid, &grid.as_field())?;
            let g = grid.clone();
            let f = std::sync::Arc::new(move |x: f64, z: f64| g.interp(x, z).unwrap_or(0.0));
            let fxc = std::sync::Arc::new(move |x: f64, z: f64| fx.interp(x, z).unwrap_or(0.0));
            let fzc = std::sync::Arc::new(move |x: f64, z: f64| fz.interp(x, z).unwrap_or(0.0));
            Ok(PotentialComponent { f, fx: fxc, fz: fzc })
        }
    }
}

fn build_potential(spec: &PotentialSpec, header: &GridHeader) -> Result<ContactPotential, Error> {
    let u0 = potential_component(&spec.u0)?;
    let u1 = match &spec.u1 {
        Some(input) => potential_component(input)?,
        None => PotentialComponent::zero(),
    };
    let support = spec.support.map(|d: Domain| (d.x0, d.x1, d.z0, d.z1));
    let pot = ContactPotential { u0, u1, support };
    if let Some((x0, x1, z0, z1)) = support {
        // the grammar has no cutoffs, so the declared support is a promise:
        // outside it the potential must stay negligible relative to its
        // interior scale (decaying expressions like Gaussians qualify, while
        // expressions that explode off their window are rejected)
        let n = 24;
        let sample = |x: f64, z: f64| (pot.u0.f)(x, z).abs() + (pot.u1.f)(x, z).abs();
        let mut inside_max: f64 = 0.0;
        let mut outside: Vec<(f64, f64, f64)> = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                let x = header.x0 + (header.x1 - header.x0) * i as f64 / n as f64;
                let z = header.z0 + (header.z1 - header.z0) * j as f64 / n as f64;
                let m = sample(x, z);
                if x >= x0 && x <= x1 && z >= z0 && z <= z1 {
                    inside_max = inside_max.max(m);
                } else {
                    outside.push((x, z, m));
                }
            }
        }
        let bound = (0.01 * inside_max).max(1e-6);
        for (x, z, m) in outside {
            if !(m <= bound) {
                return Err(Error::InvalidSurface(format!(
                    "potential is {m:.2e} at ({x}, {z}), outside its declared support"
                )));
            }
        }
    }
    Ok(pot)
}

fn out_dir(config: &RunConfig) -> PathBuf {
    PathBuf::from(config.out.clone().unwrap_or_else(|| ".".into()))
}

fn write_report(dir: &Path, report: &serde_json::Value) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(report)? + "\n";
    let tmp = dir.join("report.json.tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(tmp, dir.join("report.json"))?;
    Ok(())
}

fn meta(config: &RunConfig, config_sha256: &str) -> serde_json::Value {
    json!({
        "command": config.command,
        "config_sha256": config_sha256,
        "seed": config.seed.unwrap_or(0),
        "tolerances": config.tolerances,
    })
}

pub fn cmd_construct(config: &RunConfig, config_sha256: &str) -> CmdResult {
    let dir = out_dir(config);
    std::fs::create_dir_all(&dir)?;
    let surface = build_surface(config)?;
    let mut files = Vec::new();

    if let Some(grid) = &surface.grid {
        let text = serde_json::to_string_pretty(&grid.to_json())? + "\n";
        std::fs::write(dir.join("grid.json"), text)?;
        files.push("grid.json");
        let mesh = mesh_from_grid(grid);
        write_obj(&mesh, &dir.join("surface.obj"))?;
        files.push("surface.obj");
    }
    if let Some(fan) = &surface.fan {
        let text = serde_json::to_string_pretty(&fan.to_json())? + "\n";
        std::fs::write(dir.join("fan.json"), text)?;
        files.push("fan.json");
        // the ray-built ribbon mesh is the characteristic rendering of a cone
        let mesh = mesh_from_rayfan(fan, 2.0, 16)?;
        write_obj(&mesh, &dir.join("fan.obj"))?;
        files.push("fan.obj");
        if surface.grid.is_none() {
            write_obj(&mesh, &dir.join("surface.obj"))?;
            files.push("surface.obj");
        }
    }
    if let Some(section) = &config.section {
        let rows = match (section.x, section.z, &surface.fan, &surface.grid) {
            (Some(x), None, Some(fan), _) => cross_section_fan(fan, x)?,
            (Some(x), None, None, Some(grid)) => {
                cross_section_grid(grid, SectionPlane::XEquals(x), section.samples)?
            }
            (None, Some(z), _, Some(grid)) => {
                cross_section_grid(grid, SectionPlane::ZEquals(z), section.samples)?
            }
            _ => return Err(Error::InvalidSurface("section needs x or z and a surface form".into())),
        };
        write_csv(&rows, &dir.join("section.csv"))?;
        files.push("section.csv");
    }

    let report = json!({
        "meta": meta(config, config_sha256),
        "surface": surface.id,
        "files": files,
    });
    write_report(&dir, &report)?;
    Ok(Outcome { passed: true })
}

pub fn cmd_analyze(config: &RunConfig, config_sha256: &str) -> CmdResult {
    let surface = build_surface(config)?;
    let grid = surface.require_grid()?;
    let tol = &config.tolerances;
    let e = energy(grid, &Region::Full)?;
    let a = area(grid, &Region::Full)?;

    // harmonicity residual away from singular cells
    let residual = heisgraph::variation::harmonic_residual(grid)?;
    let mut res_max: f64 = 0.0;
    for ix in 0..grid.header.nx {
        for iz in 0..grid.header.nz {
            if !grid.node_touches_mask(ix, iz) {
                res_max = res_max.max(residual.at(ix, iz).abs());
            }
        }
    }

    // cone check on lifted node samples
    let sigma = intrinsic_gradient(grid);
    let c = tol.lipschitz_c.unwrap_or_else(|| (2.0 * sigma.max_abs()).max(1.0));
    let mut pts = Vec::new();
    let stride = (grid.header.nx / 12).max(1);
    for ix in (0..grid.header.nx).step_by(stride) {
        for iz in (0..grid.header.nz).step_by(stride) {
            let x = grid.header.x(ix);
            let z = grid.header.z(iz);
            let f = grid.at(ix, iz);
            pts.push(Point::new(x, f, z + 0.5 * x * f));
        }
    }
    let lip = lipschitz_check(&pts, c);

    let mut passed = lip.passed;
    if let Some(hb) = tol.harmonic {
        passed &= res_max <= hb;
    }
    let report = json!({
        "meta": meta(config, config_sha256),
        "surface": surface.id,
        "energy": e,
        "area": a,
        "harmonic_residual_max": res_max,
        "lipschitz_check": {
            "c": c,
            "passed": lip.passed,
            "worst_margin": lip.worst_margin,
        },
    });
    write_report(&out_dir(config), &report)?;
    Ok(Outcome { passed })
}

pub fn cmd_calibrate(config: &RunConfig, config_sha256: &str) -> CmdResult {
    let k = build_k(config)?;
    let spec = config.calibrate.clone().unwrap_or_default();
    let tol = &config.tolerances;
    let mut tau = tau_k(&k);
    if let Some(p) = spec.perturb {
        if p.wedge >= tau.wedges.len() {
            return Err(Error::InvalidSurface(format!("no wedge {}", p.wedge)));
        }
        tau.perturb_wedge_up(p.wedge, p.amount);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.unwrap_or(0));
    let mut passed = true;

    // interior divergence residuals: several points per region kind
    let mut div_diags: Vec<Diagnostic> = Vec::new();
    let mut interior_points = vec![
        Point::new(-1.0, 0.5, 0.1),
        Point::new(-1.0, -0.5, -0.2),
    ];
    for w in &tau.wedges {
        let quarter = 0.25 * (w.hi - w.lo);
        interior_points.push(Point::new(1.0, w.m + quarter, 0.0));
        interior_points.push(Point::new(1.0, w.m - quarter, 0.0));
    }
    for (lo, hi) in k.retained() {
        if hi - lo > 1e-9 {
            // a bit out along the cone keeps the y/x stencil error well
            // inside the bound
            let mid = 0.5 * (lo + hi);
            interior_points.push(Point::new(1.3, 1.3 * mid, 0.3));
        }
    }
    for p in interior_points {
        match div_residual(&tau, p, spec.div_h) {
            Ok(r) => {
                passed &= r.abs() <= tol.div;
                div_diags.push(Diagnostic {
                    residual_type: "divergence".into(),
                    location: [p.x, p.y, p.z],
                    value: r,
                    h: spec.div_h,
                });
            }
            Err(Error::InterfaceTooClose) => {}
            Err(e) => return Err(e),
        }
    }

    // interface jump residuals
    let mut jump_diags: Vec<Diagnostic> = Vec::new();
    for iface in tau.interfaces() {
        for s in [0.5, 1.0, 2.0] {
            let r = jump_residual(&iface, s);
            passed &= r.abs() <= tol.jump;
            let p = iface.point(s, 0.0);
            jump_diags.push(Diagnostic {
                residual_type: format!("jump:{}", iface.name),
                location: [p.x, p.y, p.z],
                value: r,
                h: 0.0,
            });
        }
    }

    // seeded random boxes straddling discontinuity rays
    let field = {
        let tau = tau.clone();
        move |p: Point| {
            let m = bar_m(&tau, p);
            (m.a, m.b)
        }
    };
    let mut flux_diags: Vec<Diagnostic> = Vec::new();
    let ifaces: Vec<_> = tau
        .interfaces()
        .into_iter()
        .filter(|i| (i.tau_plus - i.tau_minus).abs() > 1e-12)
        .collect();
    let n_base = ((1.0 / spec.box_h).round() as usize).clamp(4, 256);
    for _ in 0..spec.boxes {
        let iface = &ifaces[rng.gen_range(0..ifaces.len())];
        let t = rng.gen_range(0.4..1.4);
        let zc = rng.gen_range(-0.5..0.5);
        let c = iface.point(t, zc);
        let hx = rng.gen_range(0.1..0.3);
        let hy = rng.gen_range(0.1..0.3);
        let hz = rng.gen_range(0.1..0.3);
        let b = Box3::new(c.x - hx, c.x + hx, c.y - hy, c.y + hy, c.z - hz, c.z + hz);
        let n = ((2.0 * hx.max(hy).max(hz)) / spec.box_h).ceil() as usize;
        let flux = flux_box(&field, &b, n.clamp(4, n_base));
        let bound = tol.flux_factor * b.surface_area() * spec.box_h;
        passed &= flux.abs() <= bound;
        flux_diags.push(Diagnostic {
            residual_type: "box_flux".into(),
            location: [c.x, c.y, c.z],
            value: flux,
            h: spec.box_h,
        });
    }

    // flux–energy identity on the cone's own graph, over the mask-free cell
    // region where the integrand is smooth (the identity holds regionwise)
    let header = header_from(config)?;
    let model = WedgeModel::from_slopes(&k);
    let grid = model.to_grid(header, true)?;
    let mut weights = vec![1.0; header.n_cells()];
    for cx in 0..header.nx - 1 {
        for cz in 0..header.nz - 1 {
            let lo_x = cx.saturating_sub(1);
            let hi_x = (cx + 1).min(header.nx - 2);
            let lo_z = cz.saturating_sub(1);
            let hi_z = (cz + 1).min(header.nz - 2);
            'scan: for nx in lo_x..=hi_x {
                for nz in lo_z..=hi_z {
                    if grid.cell_masked(nx, nz) {
                        weights[header.cell_idx(cx, cz)] = 0.0;
                        break 'scan;
                    }
                }
            }
        }
    }
    let region = Region::Cells(weights);
    let flux = flux_graph(&grid, &field, &region)?;
    let e = energy(&grid, &region)?;
    let mu = region.area(&header);
    let identity_rel = (flux - (mu + e)).abs() / (mu + e);
    passed &= identity_rel <= tol.flux_energy;

    let report = json!({
        "meta": meta(config, config_sha256),
        "alpha": k.alpha,
        "wedges": tau.wedges.len(),
        "div_residuals": div_diags,
        "jump_residuals": jump_diags,
        "box_fluxes": flux_diags,
        "flux_energy_identity": {
            "flux": flux,
            "mu_plus_energy": mu + e,
            "relative_error": identity_rel,
        },
        "passed": passed,
    });
    write_report(&out_dir(config), &report)?;
    Ok(Outcome { passed })
}

pub fn cmd_vary(config: &RunConfig, config_sha256: &str) -> CmdResult {
    let surface = build_surface(config)?;
    let grid = surface.require_grid()?;
    let pot_spec = config
        .potential
        .as_ref()
        .ok_or_else(|| Error::InvalidSurface("vary needs a potential".into()))?;
    let pot = build_potential(pot_spec, &grid.header)?;
    pot.check_support(&grid.header)?;
    let tol = &config.tolerances;
    let t = config.t.unwrap_or(1e-3);
    let params = FlowParams::default();

    let mut report_body;
    let passed;
    if grid.has_mask() {
        // piecewise-smooth graph: the Lipschitz B-forms give the slope, and
        // singular graphs additionally decompose A₂ along the nexus
        let w1 = pot.w1_field(grid.header);
        let u0f = ScalarField::from_fn(grid.header, |x, z| (pot.u0.f)(x, z));
        let analytic = b1(grid, &w1, &Region::Full)? + b2(grid, &u0f, &Region::Full)?;
        let e0 = flow_energy(grid, &pot, 0.0, &Region::Full, &params)?;
        let schedule = [t, -t, 0.5 * t, -0.5 * t];
        let mut energies = Vec::new();
        for &tv in &schedule {
            energies.push(flow_energy(grid, &pot, tv, &Region::Full, &params)?);
        }
        let s_t = (energies[0] - energies[1]) / (2.0 * t);
        let s_half = (energies[2] - energies[3]) / t;
        let fd = (4.0 * s_half - s_t) / 3.0;
        let mut c_fit: f64 = 0.0;
        for (&tv, &ev) in schedule.iter().zip(&energies) {
            c_fit = c_fit.max((ev - e0 - tv * analytic).abs() / (tv * tv));
        }
        passed = (fd - analytic).abs() <= tol.slope * analytic.abs().max(1.0);
        report_body = json!({
            "t": schedule.to_vec(),
            "E_t": energies,
            "analytic_slope": analytic,
            "fd_slope": fd,
            "C_fit": c_fit,
        });
        if let Some(pg) = &surface.piecewise {
            let w2_fn = {
                let u0 = pot.u0.f.clone();
                let u1 = pot.u1.f.clone();
                let f = pg.f.clone();
                std::sync::Arc::new(move |x: f64, z: f64| u1(x, z) * f(x, z) + u0(x, z))
                    as heisgraph::zoo::Sampler2
            };
            let hb = herringbone_a2(pg, &w2_fn, &Region::Full)?;
            report_body["herringbone_a2"] = serde_json::to_value(hb)?;
        }
    } else {
        let rep = fvf_contact(grid, &pot, t, &Region::Full, &params)?;
        passed = (rep.fd_slope - rep.analytic_slope).abs()
            <= tol.slope * rep.analytic_slope.abs().max(1.0);
        report_body = serde_json::to_value(&rep)?;
    }

    let report = json!({
        "meta": meta(config, config_sha256),
        "surface": surface.id,
        "variation": report_body,
        "passed": passed,
    });
    write_report(&out_dir(config), &report)?;
    Ok(Outcome { passed })
}

pub fn cmd_limits(config: &RunConfig, config_sha256: &str) -> CmdResult {
    let tol = &config.tolerances;
    let mut passed = true;
    let mut body = serde_json::Map::new();

    if let Some(stretch) = &config.stretch {
        let surface = build_surface(config)?;
        let grid = surface.require_grid()?;
        let fit = stretch_energy_fit(grid, &stretch.r_list)?;
        let e = energy(grid, &Region::Full)?;
        let rel = (fit.e_fit - e).abs() / e.abs().max(1e-12);
        passed &= rel <= tol.stretch_fit;
        passed &= fit.remainder_order > -8.0 && fit.remainder_order < -6.0;
        body.insert(
            "stretch_energy_fit".into(),
            json!({
                "mu_d": fit.mu_d,
                "e_fit": fit.e_fit,
                "energy": e,
                "relative_error": rel,
                "remainder_order": fit.remainder_order,
                "samples": fit.samples,
            }),
        );
    }

    if let Some(ind) = &config.indicator {
        let b = ind.bounds.unwrap_or([0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let bounds = Box3::new(b[0], b[1], b[2], b[3], b[4], b[5]);
        let mut distances = Vec::new();
        if let Some(eps_list) = &ind.eps_list {
            let plane = SurfaceIndicator::Plane { m: 0.0, c: 0.0 };
            let mut prev = f64::INFINITY;
            for &eps in eps_list {
                let kc = IntervalComplement::new(eps, vec![(-eps, 0.0), (0.0, eps)])?;
                let model = WedgeModel::from_angles(&kc)?;
                let d = indicator_l1_distance(
                    &SurfaceIndicator::Model(model),
                    &plane,
                    &bounds,
                    ind.resolution,
                )?;
                passed &= d < prev;
                prev = d;
                distances.push(json!({"eps": eps, "distance": d}));
            }
        }
        if let Some(n_list) = &ind.n_list {
            let k = build_k(config)?;
            let lambda = SurfaceIndicator::Model(WedgeModel::from_slopes(&k));
            let mut prev = f64::INFINITY;
            for &n in n_list {
                let intervals: Vec<(f64, f64)> =
                    k.intervals.iter().map(|&(a, b)| (a / (n * n), b / (n * n))).collect();
                let kn = IntervalComplement::new(k.alpha / (n * n), intervals)?;
                let sn = WedgeModel::from_angles(&kn)?.stretched(1.0 / n, n);
                let d = indicator_l1_distance(
                    &SurfaceIndicator::Model(sn),
                    &lambda,
                    &bounds,
                    ind.resolution,
                )?;
                passed &= d < prev;
                prev = d;
                distances.push(json!({"n": n, "distance": d}));
            }
        }
        body.insert("indicator_distances".into(), json!(distances));
    }

    if body.is_empty() {
        return Err(Error::InvalidSurface("limits needs a stretch or indicator block".into()));
    }
    let report = json!({
        "meta": meta(config, config_sha256),
        "limits": body,
        "passed": passed,
    });
    write_report(&out_dir(config), &report)?;
    Ok(Outcome { passed })
}
