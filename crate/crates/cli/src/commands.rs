use std::path::{Path, PathBuf};

use green_imcf::capacity::cap_radial;
use green_imcf::constants::{
    constants_report, log_spaced_p_grid, nogo_certificate, nogo_grid, nogo_threshold, random_schedule_search,
};
use green_imcf::green::{core_limit, extrapolate_core, green_radial};
use green_imcf::imcf::{
    find_c, gradient_bound_check, imcf_core_derivative, imcf_core_model, lower_barrier_derivative, subsolution_margin,
    upper_barrier_derivative, MarginReport, BARRIER_RHO0,
};
use green_imcf::mesh::{BoundaryTag, Mesh, MeshError};
use green_imcf::model::{log_grid, ModelManifold, ModelSpec};
use green_imcf::solver::{continue_to_one, solve_condenser, Continuation, ContinuationSchedule, SolverConfig, SolverError};
use green_imcf::suite;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::report::{num, opt, Report};
use crate::Failure;

fn out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn require<T>(value: Option<T>, key: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Input(format!("missing '{key}' (set it in the config or pass --{})", key.replace('_', "-"))))
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::Input(what()))
    }
}

fn run_err(context: &str) -> impl Fn(&dyn std::fmt::Display) -> Failure + '_ {
    move |e| Failure::Run(format!("{context}: {e}"))
}

fn load_model(path: &Path) -> Result<ModelManifold, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let spec: ModelSpec =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}:{}: {e}", path.display(), e.line())))?;
    ModelManifold::from_spec(&spec).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_mesh(path: &Path) -> Result<Mesh, Failure> {
    Mesh::read(path).map_err(|e| match e {
        MeshError::Parse { line, message } => Failure::Input(format!("{}:{line}: {message}", path.display())),
        other => Failure::Input(format!("{}: {other}", path.display())),
    })
}

fn finish(failed: Vec<String>) -> Result<(), Failure> {
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failed))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenParams {
    pub model: Option<PathBuf>,
    pub p: f64,
    /// `None` (JSON null) is the whole manifold.
    pub r0: Option<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for GreenParams {
    fn default() -> Self {
        Self {
            model: None,
            p: 2.0,
            r0: None,
            r_min: 1e-3,
            r_max: 1e3,
            points: 61,
            out: out_dir(),
            seed: 0,
        }
    }
}

pub fn green(params: GreenParams) -> Result<(), Failure> {
    let model = load_model(&require(params.model.clone(), "model")?)?;
    check(params.p > 1.0, || format!("p = {} must exceed 1", params.p))?;
    check(params.r_min > 0.0 && params.r_max > params.r_min && params.points >= 2, || {
        "need 0 < r_min < r_max and points >= 2".into()
    })?;
    let r0 = params.r0.unwrap_or(f64::INFINITY);
    let kernel = green_radial(&model, params.p, r0).map_err(|e| Failure::Input(e.to_string()))?;
    let top = r0.min(model.r_max());
    let mut radii: Vec<f64> = log_grid(params.r_min, params.r_max, params.points).into_iter().filter(|&r| r < top).collect();
    if params.r_min <= 1.0 && 1.0 <= params.r_max && 1.0 < top {
        radii.push(1.0);
        radii.sort_by(f64::total_cmp);
        radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        if let Some(r) = radii.iter_mut().find(|r| (**r - 1.0).abs() <= 1e-12) {
            *r = 1.0;
        }
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &r in &radii {
        let err = run_err("green");
        let g = kernel.value(r).map_err(|e| err(&e))?;
        let dg = kernel.derivative(r).map_err(|e| err(&e))?;
        let lg = kernel.log_value(r).map_err(|e| err(&e))?;
        rows.push(vec![num(r), num(g), num(dg), num(lg)]);
    }
    let report = Report::new(&params.out, &params, params.seed)?;
    let path = report.csv("kernel.csv", &["r", "g", "dg", "log_g"], rows)?;
    println!("{} p = {} parabolic = {}", model.label(), params.p, kernel.is_parabolic());
    if radii.contains(&1.0) {
        println!("G(1) = {:e}", kernel.value(1.0).map_err(|e| run_err("green")(&e))?);
    }
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityParams {
    pub model: Option<PathBuf>,
    pub p: f64,
    pub s: f64,
    /// Outer radius; `None` (JSON null) is infinity.
    pub r: Option<f64>,
    pub h: f64,
    pub tol: f64,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for CapacityParams {
    fn default() -> Self {
        Self {
            model: None,
            p: 2.0,
            s: 0.5,
            r: Some(1.0),
            h: 0.05,
            tol: 2e-2,
            out: out_dir(),
            seed: 0,
        }
    }
}

pub fn capacity(params: CapacityParams) -> Result<(), Failure> {
    let model = load_model(&require(params.model.clone(), "model")?)?;
    let r = params.r.unwrap_or(f64::INFINITY);
    check(params.p > 1.0 && params.s > 0.0 && r > params.s, || {
        format!("need p > 1 and 0 < s < R (got p = {}, s = {}, R = {r})", params.p, params.s)
    })?;
    check(params.h > 0.0 && params.tol > 0.0, || "h and tol must be positive".into())?;
    let exact = cap_radial(&model, params.p, params.s, r).map_err(|e| Failure::Input(e.to_string()))?;
    // The planar euclidean condenser is the round annulus, which the mesh solver can resolve.
    let planar = model.spec().kind == "euclidean" && model.n() == 2 && r.is_finite();
    let variational = if planar {
        let mesh = Mesh::annulus(params.s, r, params.h).map_err(|e| Failure::Input(e.to_string()))?;
        let sol = solve_condenser(&mesh, params.p, BoundaryTag::Inner, BoundaryTag::Outer, &SolverConfig::default())
            .map_err(|e| run_err("capacity")(&e))?;
        Some(sol.energy)
    } else {
        None
    };
    let rel_err = variational.map(|v| (v - exact.value).abs() / exact.value);
    let report = Report::new(&params.out, &params, params.seed)?;
    let row = vec![
        model.label(),
        num(params.p),
        num(params.s),
        num(r),
        num(exact.value),
        opt(variational),
        opt(rel_err),
    ];
    let path = report.csv(
        "capacity.csv",
        &["model", "p", "s", "R", "cap_exact", "cap_variational", "rel_err"],
        [row],
    )?;
    if exact.divergent {
        println!("flux integral diverges: the model is p-parabolic and the capacity is 0");
    }
    println!("cap_exact = {:e}", exact.value);
    if let (Some(v), Some(e)) = (variational, rel_err) {
        println!("cap_variational = {v:e} (rel err {e:.3e}, tol {:e})", params.tol);
    }
    println!("wrote {}", path.display());
    match rel_err {
        Some(e) if !(e <= params.tol) => finish(vec![format!("capacity: variational rel err {e:.3e} exceeds {:e}", params.tol)]),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacitorParams {
    pub mesh: Option<PathBuf>,
    /// `[r0, r1, h]` of a generated annulus.
    pub annulus: Option<Vec<f64>>,
    pub p_schedule: Vec<f64>,
    pub eps_schedule: Vec<f64>,
    pub eps_tail: Vec<f64>,
    pub newton_tol: f64,
    pub max_iters: usize,
    pub warm_start: bool,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for CapacitorParams {
    fn default() -> Self {
        let solver = SolverConfig::default();
        let schedule = ContinuationSchedule::default();
        Self {
            mesh: None,
            annulus: None,
            p_schedule: schedule.p_sequence,
            eps_schedule: solver.eps_schedule,
            eps_tail: schedule.eps_tail,
            newton_tol: solver.newton_tol,
            max_iters: solver.max_iters,
            warm_start: schedule.warm_start,
            out: out_dir(),
            seed: 0,
        }
    }
}

fn p_label(p: f64) -> String {
    format!("{p}")
}

fn write_continuation(report: &Report, mesh: &Mesh, cont: &Continuation) -> Result<(), Failure> {
    let xy = mesh.vertices();
    for (k, &p) in cont.ps.iter().enumerate() {
        let v = &cont.potentials[k].field.values;
        let u = &cont.fields[k].values;
        let rows = (0..xy.len()).map(|i| vec![i.to_string(), num(xy[i][0]), num(xy[i][1]), num(v[i]), num(u[i])]);
        report.csv(&format!("field_p{}.csv", p_label(p)), &["index", "x", "y", "v_p", "u_p"], rows)?;
    }
    let stages = cont.ps.iter().zip(&cont.potentials).map(|(&p, sol)| {
        let last = sol.stages.last();
        vec![
            num(p),
            opt(last.map(|s| s.eps)),
            sol.stages.iter().map(|s| s.iterations).sum::<usize>().to_string(),
            num(sol.final_residual()),
            num(sol.energy),
        ]
    });
    report.csv("capacitor.csv", &["p", "eps_final", "newton_iterations", "residual", "energy"], stages)?;
    if let Some(ext) = &cont.extrapolated {
        let rows = (0..xy.len()).map(|i| vec![i.to_string(), num(xy[i][0]), num(xy[i][1]), num(ext.values[i])]);
        report.csv("field_extrapolated.csv", &["index", "x", "y", "u"], rows)?;
    }
    Ok(())
}

pub fn capacitor(params: CapacitorParams) -> Result<(), Failure> {
    let mesh = match (&params.mesh, &params.annulus) {
        (Some(path), None) => load_mesh(path)?,
        (None, Some(a)) => {
            check(a.len() == 3, || "annulus needs [r0, r1, h]".into())?;
            Mesh::annulus(a[0], a[1], a[2]).map_err(|e| Failure::Input(e.to_string()))?
        }
        (Some(_), Some(_)) => return Err(Failure::Input("give either 'mesh' or 'annulus', not both".into())),
        (None, None) => return Err(Failure::Input("missing 'mesh' (or 'annulus')".into())),
    };
    let config = SolverConfig {
        eps_schedule: params.eps_schedule.clone(),
        newton_tol: params.newton_tol,
        max_iters: params.max_iters,
        ..SolverConfig::default()
    };
    let schedule = ContinuationSchedule {
        p_sequence: params.p_schedule.clone(),
        warm_start: params.warm_start,
        eps_tail: params.eps_tail.clone(),
    };
    config.validate().map_err(|e| Failure::Input(e.to_string()))?;
    schedule.validate().map_err(|e| Failure::Input(e.to_string()))?;
    let report = Report::new(&params.out, &params, params.seed)?;
    match continue_to_one(&mesh, &schedule, &config) {
        Ok(cont) => {
            write_continuation(&report, &mesh, &cont)?;
            for (p, sol) in cont.ps.iter().zip(&cont.potentials) {
                println!("p = {p}: energy {:e}, residual {:.2e}", sol.energy, sol.final_residual());
            }
            println!("wrote {} field files to {}", cont.ps.len() + 1, params.out.display());
            Ok(())
        }
        Err(SolverError::Aborted { p, completed, cause }) => {
            write_continuation(&report, &mesh, &completed)?;
            finish(vec![format!("capacitor: solve at p = {p}: {cause}")])
        }
        Err(e) => Err(run_err("capacitor")(&e)),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImcfParams {
    pub model: Option<PathBuf>,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub p_sequence: Vec<f64>,
    pub probes: Vec<f64>,
    pub identity_tol: f64,
    pub extrapolation_tol: f64,
    pub barrier_p: f64,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for ImcfParams {
    fn default() -> Self {
        Self {
            model: None,
            r_min: 1e-2,
            r_max: 10.0,
            points: 41,
            p_sequence: vec![1.2, 1.1, 1.05, 1.02],
            probes: vec![0.5, 1.0, 2.0],
            identity_tol: 1e-10,
            extrapolation_tol: 1e-2,
            barrier_p: 1.05,
            out: out_dir(),
            seed: 0,
        }
    }
}

fn margin_rows(profile: &str, rep: &MarginReport) -> Vec<Vec<String>> {
    rep.rows
        .iter()
        .map(|m| vec![profile.to_string(), num(m.r), num(m.lhs), num(m.rhs), num(m.margin)])
        .collect()
}

pub fn imcf_limit(params: ImcfParams) -> Result<(), Failure> {
    let model = load_model(&require(params.model.clone(), "model")?)?;
    check(params.r_min > 0.0 && params.r_max > params.r_min && params.points >= 2, || {
        "need 0 < r_min < r_max and points >= 2".into()
    })?;
    let radii: Vec<f64> = log_grid(params.r_min, params.r_max, params.points)
        .into_iter()
        .filter(|&r| r < model.r_max())
        .collect();
    check(!radii.is_empty(), || "radius grid lies outside the model".into())?;
    let log_omega = model.omega().ln();
    let err = run_err("imcf-limit");
    let gradient = gradient_bound_check(&model, &radii).map_err(|e| err(&e))?;
    let mut failed = Vec::new();
    let mut identity: f64 = 0.0;
    let mut skipped = 0;
    let mut rows = Vec::with_capacity(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        let g = &gradient.rows[i];
        let (u, du, resid) = match (imcf_core_model(&model, r), core_limit(&model, r)) {
            (Ok(u), Ok(w)) => {
                let d = w - u - log_omega;
                identity = identity.max(d.abs());
                (Some(u), imcf_core_derivative(&model, r).ok(), Some(d))
            }
            _ => {
                skipped += 1;
                (None, None, None)
            }
        };
        rows.push(vec![num(r), opt(u), opt(du), opt(resid), num(g.lhs), num(g.rhs), num(g.margin)]);
    }
    let report = Report::new(&params.out, &params, params.seed)?;
    report.csv(
        "imcf_core.csv",
        &["r", "u", "du", "identity_residual", "gradient_lhs", "gradient_rhs", "gradient_margin"],
        rows,
    )?;
    if !(identity < params.identity_tol) {
        failed.push(format!("core identity residual {identity:.2e} exceeds {:e}", params.identity_tol));
    }
    if skipped > 0 {
        println!("{skipped} radii skipped: the warping function decreases there");
    }
    let grad_min = gradient.min_margin();
    println!(
        "gradient estimate: min margin {grad_min:.3e} ({})",
        if grad_min >= 0.0 { "holds" } else { "violated on this model" }
    );

    let mut ext_rows = Vec::new();
    for &r in params.probes.iter().filter(|&&r| r < model.r_max()) {
        match extrapolate_core(&model, r, f64::INFINITY, &params.p_sequence) {
            Ok(ex) => {
                let mut row = vec![num(r)];
                row.extend(ex.values.iter().map(|&v| num(v)));
                row.extend([num(ex.extrapolated), num(ex.limit), num(ex.error())]);
                if !(ex.error() <= params.extrapolation_tol) {
                    failed.push(format!("extrapolated core at r = {r}: error {:.2e}", ex.error()));
                }
                ext_rows.push(row);
            }
            Err(e) => println!("extrapolation at r = {r} skipped: {e}"),
        }
    }
    let mut cols: Vec<String> = vec!["r".into()];
    cols.extend(params.p_sequence.iter().map(|p| format!("w_p{p}")));
    cols.extend(["extrapolated".into(), "limit".into(), "error".into()]);
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    report.csv("imcf_extrapolation.csv", &cols, ext_rows)?;

    if model.spec().kind == "euclidean" {
        let n = model.n();
        let near = log_grid(1e-7, 0.5 * BARRIER_RHO0, 40);
        let lower = subsolution_margin(&model, lower_barrier_derivative(n), &near).map_err(|e| err(&e))?;
        let upper = subsolution_margin(&model, upper_barrier_derivative(n, BARRIER_RHO0), &near).map_err(|e| err(&e))?;
        if !(lower.min_margin() > 0.0) {
            failed.push(format!("lower barrier margin {:.2e} not positive", lower.min_margin()));
        }
        if !(upper.max_margin() < 0.0) {
            failed.push(format!("upper barrier margin {:.2e} not negative", upper.max_margin()));
        }
        let mut rows = margin_rows("lower", &lower);
        rows.extend(margin_rows("upper", &upper));
        if params.barrier_p > 1.0 && params.barrier_p <= n as f64 {
            match find_c(&model, params.barrier_p, 1e-6, 1.0, 80) {
                Ok(cert) => {
                    println!("p-supersolution certified with C = {}", cert.c);
                    rows.extend(margin_rows(&format!("supersolution_C{}", cert.c), &cert.report));
                }
                Err(e) => failed.push(format!("p-supersolution certificate: {e}")),
            }
        }
        report.csv("imcf_barriers.csv", &["profile", "r", "lhs", "rhs", "margin"], rows)?;
    }
    println!("core identity residual {identity:.2e}; wrote margins to {}", params.out.display());
    finish(failed)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsParams {
    pub nu: f64,
    pub sobolev: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for ConstantsParams {
    fn default() -> Self {
        Self {
            nu: 3.0,
            sobolev: 1.0,
            eps_min: 1e-3,
            eps_max: 0.5,
            points: 8,
            out: out_dir(),
            seed: 0,
        }
    }
}

pub fn constants(params: ConstantsParams) -> Result<(), Failure> {
    check(params.nu > 1.0 && params.sobolev > 0.0, || "need nu > 1 and a positive Sobolev constant".into())?;
    check(
        params.eps_min > 0.0 && params.eps_max > params.eps_min && params.eps_max <= 0.5 && params.points >= 6,
        || "need 0 < eps_min < eps_max <= 0.5 and points >= 6".into(),
    )?;
    let grid = log_spaced_p_grid(params.eps_min, params.eps_max, params.points);
    let rep = constants_report(params.nu, params.sobolev, &grid);
    let class = |b: &Option<green_imcf::constants::Blowup>| b.as_ref().map_or("indeterminate", |b| b.class.as_str());
    let mut rows = Vec::new();
    for (id, values, blowup) in &rep.rows {
        for (p, v) in grid.iter().zip(values) {
            rows.push(vec![num(*p), id.clone(), num(*v), class(blowup).to_string()]);
        }
    }
    let report = Report::new(&params.out, &params, params.seed)?;
    report.csv("constants.csv", &["p", "constant_id", "value", "classification"], rows)?;
    let summary = rep.rows.iter().map(|(id, _, b)| {
        vec![
            id.clone(),
            class(b).to_string(),
            opt(b.as_ref().map(|b| b.poly_slope)),
            opt(b.as_ref().map(|b| b.exp_slope)),
        ]
    });
    report.csv("constants_summary.csv", &["constant_id", "classification", "poly_slope", "exp_slope"], summary)?;
    for (id, _, b) in &rep.rows {
        println!("{id:<12} {}", class(b));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NogoParams {
    pub a: f64,
    pub b: f64,
    pub t0: f64,
    pub points: usize,
    pub trials: usize,
    pub k: usize,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for NogoParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            t0: 1.0,
            points: 6,
            trials: 1000,
            k: 64,
            out: out_dir(),
            seed: 0,
        }
    }
}

pub fn nogo(params: NogoParams) -> Result<(), Failure> {
    check(params.points >= 1, || "points must be positive".into())?;
    let (p0, t0_adj, first, second) = nogo_threshold(params.a, params.b, params.t0).map_err(|e| Failure::Input(e.to_string()))?;
    let grid = nogo_grid(p0, params.points);
    let rep = nogo_certificate(params.a, params.b, params.t0, &grid).map_err(|e| run_err("nogo")(&e))?;
    let per_point = params.trials / params.points;
    let extra = params.trials % params.points;
    let searches: Vec<_> = grid
        .par_iter()
        .enumerate()
        .map(|(j, &p)| {
            let trials = per_point + usize::from(j < extra);
            random_schedule_search(params.t0, p, params.k, trials, params.seed.wrapping_add(j as u64))
        })
        .collect();
    let mut failed = Vec::new();
    let mut rows = Vec::new();
    for (row, search) in rep.rows.iter().zip(searches) {
        let search = search.map_err(|e| Failure::Input(e.to_string()))?;
        if !(row.margin > 0.0) {
            failed.push(format!("nogo margin at p = {} is {:e}", row.p, row.margin));
        }
        if search.trials > 0 && !(search.margin > 0.0) {
            failed.push(format!("random schedule reached the optimum at p = {}", row.p));
        }
        rows.push(vec![
            num(row.p),
            num(row.log_optimum),
            num(row.log_target),
            num(row.margin),
            num(row.proof_margin),
            search.trials.to_string(),
            num(search.margin),
        ]);
    }
    let report = Report::new(&params.out, &params, params.seed)?;
    report.csv(
        "nogo.csv",
        &["p", "log_optimum", "log_target", "margin", "proof_margin", "trials", "random_margin"],
        rows,
    )?;
    println!("p0 = {p0} (t0 adjusted to {t0_adj}; thresholds {} and {})", show(first), show(second));
    println!("min log-margin {:e} over {} points", rep.min_margin(), rep.rows.len());
    finish(failed)
}

fn show(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), |v| v.to_string())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    pub only: Option<Vec<usize>>,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            only: None,
            out: out_dir(),
            seed: 20241018,
        }
    }
}

pub fn verify_all(params: VerifyParams) -> Result<(), Failure> {
    let ids: Vec<usize> = params.only.clone().unwrap_or_else(|| (1..=suite::count()).collect());
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > suite::count()) {
        return Err(Failure::Input(format!("no criterion {bad} (valid: 1..={})", suite::count())));
    }
    let results: Vec<_> = ids.par_iter().map(|&id| suite::run(id, params.seed)).collect();
    for r in &results {
        println!("{}", r.line());
    }
    // Timings stay on stdout so the summary file is reproducible.
    let rows = results.iter().map(|r| {
        vec![
            r.id.to_string(),
            r.name.to_string(),
            if r.passed { "PASS" } else { "FAIL" }.to_string(),
            r.budget.as_secs().to_string(),
            r.detail.clone(),
        ]
    });
    let report = Report::new(&params.out, &params, params.seed)?;
    report.csv("verify_summary.csv", &["id", "criterion", "status", "budget_s", "detail"], rows)?;
    finish(
        results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| format!("criterion {} ({}): {}", r.id, r.name, r.detail))
            .collect(),
    )
}
