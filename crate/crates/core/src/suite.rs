//! The pinned acceptance checks, shared by the `acceptance` test target and `verify-all`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::capacity::verify_cap_level_with;
use crate::constants::{
    c_harnack, cbar, chat, classify_blowup, geometric_closed_form, iterate, log_spaced_p_grid, nogo_certificate, nogo_grid,
    nogo_threshold, optimal_schedule, random_schedule_search, BlowupClass, ConstantId,
};
use crate::green::{check_pole_asymptotics, core_limit, decay_exponent, extrapolate_core, green_radial, mu};
use crate::imcf::{
    find_c, gradient_bound_check, imcf_core_model, lower_barrier_derivative, subsolution_margin, upper_barrier_derivative,
    BARRIER_RHO0,
};
use crate::mesh::{BoundaryTag, Mesh};
use crate::model::{log_grid, ModelManifold};
use crate::solver::{annulus_potential, continue_to_one, energy, solve_capacitor, ContinuationSchedule, SolverConfig};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantities and their thresholds.
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {:<28} {:>8.2}s / {:>4}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

type Check = Result<(bool, String), String>;

struct Criterion {
    name: &'static str,
    budget_secs: u64,
    run: fn(u64) -> Check,
}

const CRITERIA: [Criterion; 11] = [
    Criterion { name: "kernel identities", budget_secs: 5, run: kernel_identities },
    Criterion { name: "capacity of level sets", budget_secs: 10, run: capacity_identity },
    Criterion { name: "pole asymptotics", budget_secs: 5, run: pole_asymptotics },
    Criterion { name: "decay exponent", budget_secs: 10, run: decay_exponents },
    Criterion { name: "annulus solver oracle", budget_secs: 60, run: solver_oracle },
    Criterion { name: "obstacle IMCF limit", budget_secs: 120, run: obstacle_limit },
    Criterion { name: "gradient estimate", budget_secs: 1, run: gradient_estimate },
    Criterion { name: "barrier certificates", budget_secs: 5, run: barrier_certificates },
    Criterion { name: "constants ledger", budget_secs: 5, run: constants_ledger },
    Criterion { name: "no-go certificate", budget_secs: 10, run: nogo },
    Criterion { name: "cross-module consistency", budget_secs: 10, run: cross_module },
];

pub fn count() -> usize {
    CRITERIA.len()
}

/// Runs criterion `id` (1-based); `seed` feeds the randomized checks.
pub fn run(id: usize, seed: u64) -> CriterionResult {
    let c = &CRITERIA[id - 1];
    let start = Instant::now();
    let outcome = (c.run)(seed);
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(c.budget_secs);
    let (passed, detail) = match outcome {
        Ok((ok, detail)) => {
            let in_time = elapsed <= budget;
            let detail = if in_time { detail } else { format!("{detail}; over the runtime budget") };
            (ok && in_time, detail)
        }
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name: c.name,
        passed,
        detail,
        elapsed,
        budget,
    }
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    (1..=count()).map(|id| run(id, seed)).collect()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn kernel_identities(_seed: u64) -> Check {
    let e3 = ModelManifold::euclidean(3);
    let k = green_radial(&e3, 2.0, f64::INFINITY).map_err(err)?;
    let mut mu_err: f64 = 0.0;
    for r in log_grid(1e-3, 1e2, 41) {
        let exact = mu(3, 2.0, r).map_err(err)?;
        mu_err = mu_err.max((k.value(r).map_err(err)? / exact - 1.0).abs());
    }
    let cases = [
        (ModelManifold::euclidean(3), 2.0, 7),
        (ModelManifold::hyperbolic(3, 1.0).map_err(err)?, 1.5, 7),
        (ModelManifold::power_tail(2, 0.5, 1.0).map_err(err)?, 1.25, 6),
    ];
    let mut energy_err: f64 = 0.0;
    let mut pairs = 0;
    for (m, p, count) in cases {
        let k = green_radial(&m, p, f64::INFINITY).map_err(err)?;
        // Levels of the kernel between radii 50 and 0.01.
        let (lo, hi) = (k.value(50.0).map_err(err)?, k.value(0.01).map_err(err)?);
        let levels: Vec<f64> = log_grid(lo, hi, count + 1);
        for w in levels.windows(2) {
            let e = k.level_energy(w[0], w[1]).map_err(err)?;
            energy_err = energy_err.max((e / (w[1] - w[0]) - 1.0).abs());
            pairs += 1;
        }
    }
    Ok((
        mu_err < 1e-6 && energy_err < 1e-5 && pairs == 20,
        format!("G vs mu rel err {mu_err:.2e} (< 1e-6); level energy rel err {energy_err:.2e} over {pairs} pairs (< 1e-5)"),
    ))
}

fn capacity_identity(_seed: u64) -> Check {
    let models = [
        (ModelManifold::euclidean(3), f64::INFINITY),
        (ModelManifold::hyperbolic(3, 1.0).map_err(err)?, f64::INFINITY),
        (ModelManifold::power_tail(2, 0.5, 1.0).map_err(err)?, 50.0),
    ];
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for (m, r0) in &models {
        for p in [1.3, 1.5, 2.0] {
            let k = green_radial(m, p, *r0).map_err(err)?;
            let (lo, hi) = (k.value(20.0).map_err(err)?, k.value(0.01).map_err(err)?);
            for level in log_grid(lo, hi, 5) {
                let c = verify_cap_level_with(&k, level).map_err(err)?;
                worst = worst.max(c.rel_err);
                checks += 1;
            }
        }
    }
    Ok((worst < 1e-3, format!("max rel err {worst:.2e} over {checks} checks (< 1e-3)")))
}

fn pole_asymptotics(_seed: u64) -> Check {
    let h = ModelManifold::hyperbolic(3, 1.0).map_err(err)?.with_quadrature_tol(1e-12).map_err(err)?;
    let k = green_radial(&h, 2.0, f64::INFINITY).map_err(err)?;
    let coarse = check_pole_asymptotics(&k, &log_grid(1e-3, 0.099, 10)).map_err(err)?;
    let fine = check_pole_asymptotics(&k, &log_grid(1e-4, 0.0099, 10)).map_err(err)?;
    let ratios = [
        coarse.value / fine.value,
        coarse.gradient / fine.gradient,
        coarse.hessian.unwrap_or(f64::NAN) / fine.hessian.unwrap_or(f64::NAN),
    ];
    let e = green_radial(&ModelManifold::euclidean(3), 2.0, f64::INFINITY).map_err(err)?;
    let flat = check_pole_asymptotics(&e, &log_grid(1e-3, 0.099, 10)).map_err(err)?.max();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        min_ratio >= 3.0 && flat < 1e-10,
        format!("hyperbolic residual ratios {:.1}/{:.1}/{:.1} (>= 3); euclidean residual {flat:.1e} (< 1e-10)", ratios[0], ratios[1], ratios[2]),
    ))
}

fn decay_exponents(_seed: u64) -> Check {
    let pt = ModelManifold::power_tail(2, 0.5, 1.0).map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for p in [1.1, 1.25] {
        let fit = decay_exponent(&pt, p, (10.0, 1000.0)).map_err(err)?;
        worst = worst.max(fit.relative_error());
        parts.push(format!("p={p}: slope {:.5} vs {:.5}", fit.slope, fit.expected));
    }
    Ok((worst < 0.03, format!("{}; max rel err {worst:.1e} (< 3e-2)", parts.join(", "))))
}

fn annulus_error(mesh: &Mesh, p: f64, v: &[f64]) -> f64 {
    mesh.vertices()
        .iter()
        .zip(v)
        .map(|(x, v)| (v - annulus_potential(p, 0.5, 1.0, x[0].hypot(x[1]))).abs())
        .fold(0.0, f64::max)
}

fn solver_oracle(seed: u64) -> Check {
    let config = SolverConfig::default();
    let coarse = Mesh::annulus(0.5, 1.0, 0.02).map_err(err)?;
    let fine = Mesh::annulus(0.5, 1.0, 0.01).map_err(err)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1.5, 2.0] {
        let ec = annulus_error(&coarse, p, &solve_capacitor(&coarse, p, &config).map_err(err)?.field.values);
        let ef = annulus_error(&fine, p, &solve_capacitor(&fine, p, &config).map_err(err)?.field.values);
        let rate = (ec / ef).log2();
        ok &= ec < 1e-2 && rate >= 0.8;
        parts.push(format!("p={p}: err {ec:.2e} -> {ef:.2e}, rate {rate:.2}"));
    }
    let mesh = Mesh::annulus(0.5, 1.0, 0.1).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field: Vec<f64> = mesh.vertices().iter().map(|_| rng.random_range(0.0..1.0)).collect();
    let mut fd_err: f64 = 0.0;
    for p in [1.3, 2.0, 2.5] {
        for eps in [1e-2, 1e-4] {
            let (_, g) = energy(&mesh, p, eps, &field).map_err(err)?;
            for _ in 0..20 {
                let k = rng.random_range(0..mesh.num_vertices());
                let step = 1e-6;
                let (mut a, mut b) = (field.clone(), field.clone());
                a[k] += step;
                b[k] -= step;
                let fd = (energy(&mesh, p, eps, &a).map_err(err)?.0 - energy(&mesh, p, eps, &b).map_err(err)?.0) / (2.0 * step);
                fd_err = fd_err.max((fd - g[k]).abs() / g[k].abs().max(1e-8));
            }
        }
    }
    ok &= fd_err < 1e-6;
    Ok((ok, format!("{}; gradient fd rel err {fd_err:.1e} (< 1e-6)", parts.join(", "))))
}

fn obstacle_limit(_seed: u64) -> Check {
    let mesh = Mesh::annulus(0.5, 1.0, 0.02).map_err(err)?;
    let schedule = ContinuationSchedule::default();
    let cont = continue_to_one(&mesh, &schedule, &SolverConfig::default()).map_err(err)?;
    let ext = cont.extrapolated.as_ref().ok_or("no extrapolated field")?;
    let mut worst: f64 = 0.0;
    for r in [0.6, 0.75, 0.9] {
        for k in 0..8 {
            let th = std::f64::consts::TAU * k as f64 / 8.0 + 0.1;
            let u = mesh.interpolate(&ext.values, [r * th.cos(), r * th.sin()]).ok_or("probe outside mesh")?;
            worst = worst.max((u - (r / 0.5f64).ln()).abs());
        }
    }
    let outer = mesh.tagged_vertices(BoundaryTag::Outer);
    let sup = ext
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| outer.binary_search(i).is_err())
        .map(|(_, &u)| u)
        .fold(f64::NEG_INFINITY, f64::max);
    let cap = 2f64.ln() + 5e-2;
    Ok((
        worst < 2e-2 && sup <= cap,
        format!("max probe err {worst:.2e} (< 2e-2); interior sup {sup:.4} (<= {cap:.4})"),
    ))
}

fn gradient_estimate(_seed: u64) -> Check {
    let grid = log_grid(1e-2, 100.0, 60);
    let flat = gradient_bound_check(&ModelManifold::euclidean(3), &grid).map_err(err)?.min_margin();
    let tail = gradient_bound_check(&ModelManifold::power_tail(2, 0.5, 1.0).map_err(err)?, &grid).map_err(err)?.min_margin();
    let hyp = gradient_bound_check(&ModelManifold::hyperbolic(3, 1.0).map_err(err)?, &grid).map_err(err)?.min_margin();
    Ok((
        flat >= 0.0 && tail >= 0.0 && hyp < 0.0,
        format!("min margins: euclidean {flat:.1e}, power-tail {tail:.1e} (>= 0); hyperbolic {hyp:.2e} (< 0)"),
    ))
}

fn barrier_certificates(_seed: u64) -> Check {
    let grid = log_grid(1e-7, 0.5 * BARRIER_RHO0, 80);
    let mut lower_min = f64::INFINITY;
    let mut upper_max = f64::NEG_INFINITY;
    for n in [2, 3] {
        let m = ModelManifold::euclidean(n);
        lower_min = lower_min.min(subsolution_margin(&m, lower_barrier_derivative(n), &grid).map_err(err)?.min_margin());
        upper_max = upper_max.max(subsolution_margin(&m, upper_barrier_derivative(n, BARRIER_RHO0), &grid).map_err(err)?.max_margin());
    }
    let cert = find_c(&ModelManifold::euclidean(3), 1.05, 1e-6, 1.0, 80).map_err(err)?;
    let sup = cert.report.max_margin();
    Ok((
        lower_min > 0.0 && upper_max < 0.0 && sup <= 0.0,
        format!("lower barrier min {lower_min:.2e} (> 0); upper barrier max {upper_max:.2e} (< 0); C = {} with max margin {sup:.2e} (<= 0)", cert.c),
    ))
}

fn constants_ledger(_seed: u64) -> Check {
    let exact = cbar(2.0, 3.0) == 72.0 && c_harnack(2.0, 4.0) == 2304.0 && chat(2.0, 4.0, 1.0) == 256.0;
    let mut worst: f64 = 0.0;
    for p in [1.1f64, 1.5, 2.0] {
        let nu = 3.0;
        let k = (40.0 / p.log10()).ceil() as usize;
        let s = optimal_schedule(1.0, p, k).map_err(err)?;
        let c = chat(p, nu, 1.0);
        let it = iterate(&s, c, p, nu, 1.0).map_err(err)?;
        let cf = geometric_closed_form(c, p, nu, 1.0);
        worst = worst.max((it - cf).abs() / cf.abs().max(1.0));
    }
    let grid = log_spaced_p_grid(1e-3, 0.5, 8);
    let bounded = classify_blowup(ConstantId::Chat { nu: 3.0, s: 2.0 }, &grid).map_err(err)?;
    let poly = classify_blowup(ConstantId::CUnstable { nu: 3.0, s: 1.0 }, &grid).map_err(err)?;
    let degree_target = 3.0 - grid[0];
    let degree_err = (poly.poly_slope - degree_target).abs();
    Ok((
        exact && worst < 1e-10 && bounded.class == BlowupClass::Bounded && poly.class == BlowupClass::Polynomial && degree_err <= 0.05,
        format!(
            "exact values {}; iterate vs closed form {worst:.1e} (< 1e-10); chat {}; c_unstable {} of degree {:.3} vs {:.3}",
            if exact { "ok" } else { "wrong" },
            bounded.class.as_str(),
            poly.class.as_str(),
            poly.poly_slope,
            degree_target
        ),
    ))
}

fn nogo(seed: u64) -> Check {
    let (p0, ..) = nogo_threshold(1.0, 1.0, 1.0).map_err(err)?;
    let rep = nogo_certificate(1.0, 1.0, 1.0, &nogo_grid(p0, 6)).map_err(err)?;
    let mut worst_mc = f64::INFINITY;
    for (j, &p) in rep.rows.iter().map(|r| &r.p).enumerate() {
        let trials = if j == 0 { 1000 - 5 * 165 } else { 165 };
        let res = random_schedule_search(1.0, p, 64, trials, seed.wrapping_add(j as u64)).map_err(err)?;
        worst_mc = worst_mc.min(res.margin);
    }
    let min_margin = rep.min_margin();
    Ok((
        rep.rows.len() == 6 && rep.all_positive() && worst_mc > 0.0,
        format!("p0 = {p0:.6}; min log-margin {min_margin:.3} over 6 points; 1000 random schedules, min margin {worst_mc:.2e} (> 0)"),
    ))
}

fn cross_module(_seed: u64) -> Check {
    let models = [
        ModelManifold::euclidean(2),
        ModelManifold::euclidean(3),
        ModelManifold::hyperbolic(2, 1.0).map_err(err)?,
        ModelManifold::hyperbolic(3, 0.5).map_err(err)?,
        ModelManifold::spherical(3, 1.0, 1.5).map_err(err)?,
    ];
    let mut identity: f64 = 0.0;
    for m in &models {
        for r in log_grid(1e-3, 1.4, 25) {
            let d = core_limit(m, r).map_err(err)? - imcf_core_model(m, r).map_err(err)? - m.omega().ln();
            identity = identity.max(d.abs());
        }
    }
    let ex = extrapolate_core(&ModelManifold::euclidean(3), 1.0, f64::INFINITY, &[1.2, 1.1, 1.05, 1.02]).map_err(err)?;
    let rich = ex.error();
    Ok((
        identity < 1e-10 && rich < 1e-2,
        format!("core identity {identity:.1e} (< 1e-10); extrapolated core error {rich:.2e} (< 1e-2)"),
    ))
}
