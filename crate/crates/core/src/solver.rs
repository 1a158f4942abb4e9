//! Regularized p-Dirichlet energy minimization on P1 triangle meshes,
//! the Moser transform `u_p = (1 - p) log v_p` and continuation toward `p = 1`.

use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{BoundaryTag, Mesh, MeshError};
use crate::quadrature::neumaier_sum;
use crate::sparse::{pcg, CsrMatrix};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("exponent p = {0} must exceed 1")]
    InvalidExponent(f64),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("field has {found} values, mesh has {expected} vertices")]
    FieldLength { expected: usize, found: usize },
    #[error("Newton did not converge for p = {p}, eps = {eps:e} after {iterations} iterations (gradient norm {residual:e})")]
    NoConvergence { p: f64, eps: f64, iterations: usize, residual: f64 },
    #[error("continuation aborted at p = {p} after {} completed stages: {cause}", completed.ps.len())]
    Aborted {
        p: f64,
        completed: Box<Continuation>,
        cause: Box<SolverError>,
    },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Decreasing regularization parameters; each stage starts from the previous minimizer.
    pub eps_schedule: Vec<f64>,
    /// Stop when the free-gradient norm falls below this.
    pub newton_tol: f64,
    /// Also stop when a full Newton step moves every free value by less than this relative amount.
    pub step_tol: f64,
    pub max_iters: usize,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_schedule: vec![1e-1, 1e-2, 1e-4, 1e-6, 1e-8],
            newton_tol: 1e-10,
            step_tol: 1e-10,
            max_iters: 100,
            armijo_c: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
            cg_tol: 1e-11,
            cg_max_iter: 20_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.to_string()));
        if self.eps_schedule.is_empty() || self.eps_schedule.iter().any(|&e| !(e > 0.0)) {
            return bad("eps_schedule must be non-empty with positive entries");
        }
        if self.eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return bad("eps_schedule must be strictly decreasing");
        }
        if !(self.newton_tol > 0.0 && self.step_tol > 0.0 && self.cg_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 0.5 && self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("line search needs 0 < c < 1/2 and 0 < backtrack < 1");
        }
        if self.max_iters == 0 || self.cg_max_iter == 0 {
            return bad("iteration limits must be positive");
        }
        Ok(())
    }

    pub fn final_eps(&self) -> f64 {
        *self.eps_schedule.last().expect("validated schedule")
    }
}

/// Values of `p` visited on the way to `p = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationSchedule {
    pub p_sequence: Vec<f64>,
    pub warm_start: bool,
    /// Regularization levels appended after the solver schedule; the potential
    /// becomes exponentially small near the outer boundary as `p -> 1`.
    pub eps_tail: Vec<f64>,
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        Self {
            p_sequence: vec![1.5, 1.3, 1.2, 1.1, 1.05, 1.02],
            warm_start: true,
            eps_tail: vec![1e-12, 1e-16, 1e-20, 1e-24],
        }
    }
}

impl ContinuationSchedule {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.p_sequence.len() < 2 || self.p_sequence.iter().any(|&p| !(p > 1.0)) {
            return Err(SolverError::InvalidConfig("p_sequence needs at least two entries above 1".into()));
        }
        if self.p_sequence.windows(2).any(|w| w[1] >= w[0]) {
            return Err(SolverError::InvalidConfig("p_sequence must be strictly decreasing".into()));
        }
        if self.eps_tail.iter().any(|&e| !(e > 0.0)) || self.eps_tail.windows(2).any(|w| w[1] >= w[0]) {
            return Err(SolverError::InvalidConfig("eps_tail must be positive and strictly decreasing".into()));
        }
        Ok(())
    }
}

/// Nodal values on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
    /// Clamp applied by the Moser transform, if any.
    pub floor: Option<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, floor: None }
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.values.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Per-triangle geometry and the CSR positions of its 3x3 block.
struct Assembler {
    areas: Vec<f64>,
    grads: Vec<[[f64; 2]; 3]>,
    tris: Vec<[usize; 3]>,
    slots: Vec<[usize; 9]>,
    pattern: CsrMatrix,
    nv: usize,
}

impl Assembler {
    fn new(mesh: &Mesh) -> Self {
        let nt = mesh.triangles().len();
        let tris = mesh.triangles().to_vec();
        let pattern = CsrMatrix::from_elements(mesh.num_vertices(), &tris);
        let slots = tris
            .iter()
            .map(|t| {
                let mut s = [0; 9];
                for a in 0..3 {
                    for b in 0..3 {
                        s[3 * a + b] = pattern.position(t[a], t[b]).expect("element pattern");
                    }
                }
                s
            })
            .collect();
        Self {
            areas: (0..nt).map(|t| mesh.area(t)).collect(),
            grads: (0..nt).map(|t| mesh.basis_gradients(t)).collect(),
            tris,
            slots,
            pattern,
            nv: mesh.num_vertices(),
        }
    }

    fn gradient_on(&self, t: usize, v: &[f64]) -> [f64; 2] {
        let (g, tri) = (&self.grads[t], &self.tris[t]);
        let mut out = [0.0; 2];
        for k in 0..3 {
            out[0] += v[tri[k]] * g[k][0];
            out[1] += v[tri[k]] * g[k][1];
        }
        out
    }

    fn energy(&self, p: f64, eps: f64, v: &[f64]) -> f64 {
        let parts: Vec<f64> = (0..self.tris.len())
            .into_par_iter()
            .map(|t| {
                let g = self.gradient_on(t, v);
                self.areas[t] * (eps * eps + g[0] * g[0] + g[1] * g[1]).powf(0.5 * p)
            })
            .collect();
        neumaier_sum(parts)
    }

    fn gradient(&self, p: f64, eps: f64, v: &[f64]) -> Vec<f64> {
        let local: Vec<[f64; 3]> = (0..self.tris.len())
            .into_par_iter()
            .map(|t| {
                let g = self.gradient_on(t, v);
                let s = eps * eps + g[0] * g[0] + g[1] * g[1];
                if s == 0.0 {
                    return [0.0; 3];
                }
                let w = self.areas[t] * p * s.powf(0.5 * p - 1.0);
                let b = &self.grads[t];
                [0, 1, 2].map(|k| w * (g[0] * b[k][0] + g[1] * b[k][1]))
            })
            .collect();
        let mut out = vec![0.0; self.nv];
        for (t, loc) in local.iter().enumerate() {
            for k in 0..3 {
                out[self.tris[t][k]] += loc[k];
            }
        }
        out
    }

    fn hessian(&mut self, p: f64, eps: f64, v: &[f64]) -> &CsrMatrix {
        let local: Vec<[f64; 9]> = (0..self.tris.len())
            .into_par_iter()
            .map(|t| {
                let g = self.gradient_on(t, v);
                let s = (eps * eps + g[0] * g[0] + g[1] * g[1]).max(f64::MIN_POSITIVE);
                let w = self.areas[t] * p * s.powf(0.5 * p - 1.0);
                let b = &self.grads[t];
                let gb = [0, 1, 2].map(|k| g[0] * b[k][0] + g[1] * b[k][1]);
                let mut m = [0.0; 9];
                for i in 0..3 {
                    for j in 0..3 {
                        let bb = b[i][0] * b[j][0] + b[i][1] * b[j][1];
                        m[3 * i + j] = w * (bb + (p - 2.0) * gb[i] * gb[j] / s);
                    }
                }
                m
            })
            .collect();
        self.pattern.clear();
        let values = self.pattern.values_mut();
        for (t, m) in local.iter().enumerate() {
            for (k, &slot) in self.slots[t].iter().enumerate() {
                values[slot] += m[k];
            }
        }
        &self.pattern
    }

    /// `E(v + alpha d) - E(v)` evaluated per triangle, so small changes survive cancellation.
    fn energy_change(&self, p: f64, eps: f64, v: &[f64], d: &[f64], alpha: f64) -> f64 {
        let parts: Vec<f64> = (0..self.tris.len())
            .into_par_iter()
            .map(|t| {
                let g = self.gradient_on(t, v);
                let dg = self.gradient_on(t, d);
                let step = [alpha * dg[0], alpha * dg[1]];
                let s0 = eps * eps + g[0] * g[0] + g[1] * g[1];
                let ds = step[0] * (2.0 * g[0] + step[0]) + step[1] * (2.0 * g[1] + step[1]);
                if s0 == 0.0 {
                    return self.areas[t] * ds.max(0.0).powf(0.5 * p);
                }
                self.areas[t] * s0.powf(0.5 * p) * (0.5 * p * (ds / s0).ln_1p()).exp_m1()
            })
            .collect();
        neumaier_sum(parts)
    }
}

fn check_inputs(mesh: &Mesh, p: f64, field: &[f64]) -> Result<(), SolverError> {
    if !(p > 1.0) {
        return Err(SolverError::InvalidExponent(p));
    }
    if field.len() != mesh.num_vertices() {
        return Err(SolverError::FieldLength {
            expected: mesh.num_vertices(),
            found: field.len(),
        });
    }
    Ok(())
}

/// `sum_T |T| (eps^2 + |grad v|^2)^{p/2}` and its gradient with respect to the nodal values.
pub fn energy(mesh: &Mesh, p: f64, eps: f64, field: &[f64]) -> Result<(f64, Vec<f64>), SolverError> {
    check_inputs(mesh, p, field)?;
    let asm = Assembler::new(mesh);
    Ok((asm.energy(p, eps, field), asm.gradient(p, eps, field)))
}

/// Euclidean norm of the energy gradient restricted to unconstrained vertices.
pub fn residual_pharmonic(mesh: &Mesh, p: f64, eps: f64, field: &[f64]) -> Result<f64, SolverError> {
    let fixed = mesh.capacitor_constraints()?;
    let (_, g) = energy(mesh, p, eps, field)?;
    Ok(free_norm(&g, &fixed))
}

fn free_norm(g: &[f64], fixed: &[Option<f64>]) -> f64 {
    neumaier_sum(g.iter().zip(fixed).filter(|(_, f)| f.is_none()).map(|(x, _)| x * x)).sqrt()
}

/// Convergence record of one regularization stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub eps: f64,
    pub iterations: usize,
    pub residual: f64,
    pub energy: f64,
    /// Energies after each accepted Newton step.
    pub energy_trace: Vec<f64>,
}

/// Capacitor potential with its convergence history.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitorSolution {
    pub p: f64,
    pub field: ScalarField,
    pub stages: Vec<StageReport>,
    /// Unregularized energy `sum_T |T| |grad v|^p` of the returned field.
    pub energy: f64,
}

impl CapacitorSolution {
    pub fn final_residual(&self) -> f64 {
        self.stages.last().map_or(0.0, |s| s.residual)
    }
}

fn newton_stage(
    asm: &mut Assembler,
    p: f64,
    eps: f64,
    fixed: &[Option<f64>],
    free: &[bool],
    v: &mut [f64],
    config: &SolverConfig,
) -> Result<StageReport, SolverError> {
    let n = v.len();
    let mut dir = vec![0.0; n];
    let mut trace = vec![asm.energy(p, eps, v)];
    let mut residual = f64::INFINITY;
    for it in 0..config.max_iters {
        let mut g = asm.gradient(p, eps, v);
        for (gi, f) in g.iter_mut().zip(fixed) {
            if f.is_some() {
                *gi = 0.0;
            }
        }
        residual = free_norm(&g, fixed);
        if residual <= config.newton_tol {
            return Ok(StageReport {
                eps,
                iterations: it,
                residual,
                energy: *trace.last().unwrap(),
                energy_trace: trace,
            });
        }
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let h = asm.hessian(p, eps, v);
        let report = pcg(h, &rhs, free, &mut dir, config.cg_tol, config.cg_max_iter);
        let mut slope = neumaier_sum(g.iter().zip(&dir).map(|(a, b)| a * b));
        if report.indefinite || !(slope < 0.0) {
            // Diagonally scaled steepest descent.
            let diag = h.diagonal();
            for i in 0..n {
                dir[i] = if free[i] { -g[i] / diag[i].max(f64::MIN_POSITIVE) } else { 0.0 };
            }
            slope = neumaier_sum(g.iter().zip(&dir).map(|(a, b)| a * b));
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=config.max_backtracks {
            let change = asm.energy_change(p, eps, v, &dir, alpha);
            if change <= config.armijo_c * alpha * slope {
                accepted = true;
                break;
            }
            alpha *= config.backtrack;
        }
        let rel_step = (0..n)
            .filter(|&i| free[i])
            .map(|i| (alpha * dir[i]).abs() / v[i].abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if !accepted {
            // No representable decrease left along a descent direction: at the floating-point minimum.
            if rel_step <= 1e3 * config.step_tol || residual <= 1e3 * config.newton_tol {
                break;
            }
            return Err(SolverError::NoConvergence {
                p,
                eps,
                iterations: it,
                residual,
            });
        }
        for i in 0..n {
            v[i] += alpha * dir[i];
        }
        trace.push(asm.energy(p, eps, v));
        if alpha == 1.0 && rel_step <= config.step_tol {
            let mut g = asm.gradient(p, eps, v);
            for (gi, f) in g.iter_mut().zip(fixed) {
                if f.is_some() {
                    *gi = 0.0;
                }
            }
            residual = free_norm(&g, fixed);
            return Ok(StageReport {
                eps,
                iterations: it + 1,
                residual,
                energy: *trace.last().unwrap(),
                energy_trace: trace,
            });
        }
        if it + 1 == config.max_iters {
            return Err(SolverError::NoConvergence {
                p,
                eps,
                iterations: config.max_iters,
                residual,
            });
        }
    }
    Ok(StageReport {
        eps,
        iterations: config.max_iters,
        residual,
        energy: *trace.last().unwrap(),
        energy_trace: trace,
    })
}

fn minimize(
    asm: &mut Assembler,
    p: f64,
    fixed: &[Option<f64>],
    mut v: Vec<f64>,
    eps_list: &[f64],
    config: &SolverConfig,
) -> Result<CapacitorSolution, SolverError> {
    let free: Vec<bool> = fixed.iter().map(|f| f.is_none()).collect();
    for (vi, f) in v.iter_mut().zip(fixed) {
        if let Some(val) = f {
            *vi = *val;
        }
    }
    let mut stages = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        stages.push(newton_stage(asm, p, eps, fixed, &free, &mut v, config)?);
    }
    let energy = asm.energy(p, 0.0, &v);
    Ok(CapacitorSolution {
        p,
        field: ScalarField::new(v),
        stages,
        energy,
    })
}

// Discrete harmonic function with the capacitor boundary data.
fn harmonic_start(asm: &mut Assembler, fixed: &[Option<f64>], config: &SolverConfig) -> Result<Vec<f64>, SolverError> {
    let v = vec![0.0; fixed.len()];
    Ok(minimize(asm, 2.0, fixed, v, &[0.0], config)?.field.values)
}

/// Minimizes the regularized energy with `v = 1` on inner and `v = 0` on outer boundary vertices,
/// ramping the regularization down `config.eps_schedule`.
pub fn solve_capacitor(mesh: &Mesh, p: f64, config: &SolverConfig) -> Result<CapacitorSolution, SolverError> {
    solve_condenser(mesh, p, BoundaryTag::Inner, BoundaryTag::Outer, config)
}

/// [`solve_capacitor`] with `v = 1` on edges tagged `inner` and `v = 0` on edges tagged `outer`.
pub fn solve_condenser(
    mesh: &Mesh,
    p: f64,
    inner: BoundaryTag,
    outer: BoundaryTag,
    config: &SolverConfig,
) -> Result<CapacitorSolution, SolverError> {
    if !(p > 1.0) {
        return Err(SolverError::InvalidExponent(p));
    }
    config.validate()?;
    let fixed = mesh.condenser_constraints(inner, outer)?;
    let mut asm = Assembler::new(mesh);
    let start = harmonic_start(&mut asm, &fixed, config)?;
    minimize(&mut asm, p, &fixed, start, &config.eps_schedule, config)
}

/// Same as [`solve_capacitor`] from a caller-supplied initial field.
pub fn solve_capacitor_from(
    mesh: &Mesh,
    p: f64,
    initial: &[f64],
    eps_list: &[f64],
    config: &SolverConfig,
) -> Result<CapacitorSolution, SolverError> {
    check_inputs(mesh, p, initial)?;
    config.validate()?;
    let fixed = mesh.capacitor_constraints()?;
    let mut asm = Assembler::new(mesh);
    minimize(&mut asm, p, &fixed, initial.to_vec(), eps_list, config)
}

/// Default clamp of the Moser transform.
pub const MOSER_FLOOR: f64 = 1e-30;

/// `u = (1 - p) log max(v, floor)`.
pub fn moser_transform(field: &ScalarField, p: f64, floor: f64) -> ScalarField {
    ScalarField {
        values: field.values.iter().map(|&v| (1.0 - p) * v.max(floor).ln()).collect(),
        floor: Some(floor),
    }
}

/// Fields produced along a continuation in `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Continuation {
    pub ps: Vec<f64>,
    pub potentials: Vec<CapacitorSolution>,
    /// Moser transforms `u_p` of the potentials.
    pub fields: Vec<ScalarField>,
    /// Linear extrapolation of the last two `u_p` to `p = 1`.
    pub extrapolated: Option<ScalarField>,
}

/// Linear extrapolation in `p - 1` of two fields to `p = 1`.
pub fn extrapolate_to_one(p_prev: f64, u_prev: &[f64], p_last: f64, u_last: &[f64]) -> Vec<f64> {
    let (e0, e1) = (p_prev - 1.0, p_last - 1.0);
    let w = -e1 / (e1 - e0);
    u_last.iter().zip(u_prev).map(|(a, b)| a + (a - b) * w).collect()
}

/// Solves the capacitor problem for each `p` of the schedule and Moser-transforms the results.
pub fn continue_to_one(mesh: &Mesh, schedule: &ContinuationSchedule, config: &SolverConfig) -> Result<Continuation, SolverError> {
    schedule.validate()?;
    config.validate()?;
    let fixed = mesh.capacitor_constraints()?;
    let mut asm = Assembler::new(mesh);
    let mut out = Continuation {
        ps: Vec::new(),
        potentials: Vec::new(),
        fields: Vec::new(),
        extrapolated: None,
    };
    let cold: Vec<f64> = config.eps_schedule.iter().chain(&schedule.eps_tail).copied().collect();
    let warm: Vec<f64> = std::iter::once(config.final_eps()).chain(schedule.eps_tail.iter().copied()).collect();
    for &p in &schedule.p_sequence {
        let k = out.ps.len();
        let (initial, eps_list) = if schedule.warm_start && k > 0 {
            let guess_u = if k >= 2 {
                let (pa, pb) = (out.ps[k - 2], out.ps[k - 1]);
                let w = ((p - 1.0) - (pb - 1.0)) / ((pb - 1.0) - (pa - 1.0));
                let (ua, ub) = (&out.fields[k - 2].values, &out.fields[k - 1].values);
                ub.iter().zip(ua).map(|(b, a)| b + (b - a) * w).collect()
            } else {
                out.fields[0].values.clone()
            };
            let v: Vec<f64> = guess_u.iter().map(|u: &f64| (-u / (p - 1.0)).exp()).collect();
            (v, &warm)
        } else {
            match harmonic_start(&mut asm, &fixed, config) {
                Ok(v) => (v, &cold),
                Err(e) => return Err(abort(p, out, e)),
            }
        };
        match minimize(&mut asm, p, &fixed, initial, eps_list, config) {
            Ok(sol) => {
                out.fields.push(moser_transform(&sol.field, p, MOSER_FLOOR));
                out.potentials.push(sol);
                out.ps.push(p);
            }
            Err(e) => return Err(abort(p, out, e)),
        }
    }
    let k = out.ps.len();
    out.extrapolated = Some(ScalarField {
        values: extrapolate_to_one(out.ps[k - 2], &out.fields[k - 2].values, out.ps[k - 1], &out.fields[k - 1].values),
        floor: Some(MOSER_FLOOR),
    });
    Ok(out)
}

fn abort(p: f64, completed: Continuation, cause: SolverError) -> SolverError {
    SolverError::Aborted {
        p,
        completed: Box::new(completed),
        cause: Box::new(cause),
    }
}

/// Radial p-harmonic function on the planar annulus `r0 < r < r1` equal to 1 at `r0` and 0 at `r1`.
pub fn annulus_potential(p: f64, r0: f64, r1: f64, r: f64) -> f64 {
    if (p - 2.0).abs() < 1e-12 {
        return (r1 / r).ln() / (r1 / r0).ln();
    }
    let a = (p - 2.0) / (p - 1.0);
    // Written with ratios so the large negative exponents near p = 1 stay finite.
    let num = (r / r0).powf(a) - (r1 / r0).powf(a);
    let den = 1.0 - (r1 / r0).powf(a);
    num / den
}

/// Moser transform of [`annulus_potential`].
pub fn annulus_moser(p: f64, r0: f64, r1: f64, r: f64) -> f64 {
    if (p - 2.0).abs() < 1e-12 {
        return -annulus_potential(p, r0, r1, r).ln();
    }
    let a = (p - 2.0) / (p - 1.0);
    let t = (r1 / r).powf(a);
    let den = 1.0 - (r1 / r0).powf(a);
    // v = (r/r0)^a (1 - (r1/r)^a) / den
    (1.0 - p) * (a * (r / r0).ln() + (-t).ln_1p() - den.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryEdge;

    fn square(n: usize) -> Mesh {
        let mut v = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                v.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut t = Vec::new();
        for j in 0..n {
            for i in 0..n {
                t.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                t.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mut b = Vec::new();
        for j in 0..n {
            b.push(BoundaryEdge { a: id(0, j), b: id(0, j + 1), tag: BoundaryTag::Inner });
            b.push(BoundaryEdge { a: id(n, j), b: id(n, j + 1), tag: BoundaryTag::Outer });
        }
        Mesh::new(v, t, b).unwrap()
    }

    #[test]
    fn energy_examples() {
        let m = square(4);
        let c = vec![0.3; m.num_vertices()];
        let (e, g) = energy(&m, 1.7, 0.1, &c).unwrap();
        assert!((e - 0.1f64.powf(1.7)).abs() < 1e-14);
        assert!(g.iter().all(|x| x.abs() < 1e-14));
        let x: Vec<f64> = m.vertices().iter().map(|v| v[0]).collect();
        let (e3, _) = energy(&m, 3.0, 0.0, &x).unwrap();
        assert!((e3 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = Mesh::annulus(0.5, 1.0, 0.1).unwrap();
        let f: Vec<f64> = m.vertices().iter().map(|v| (3.0 * v[0]).sin() + v[1] * v[1]).collect();
        for &p in &[1.3, 2.0, 2.5] {
            for &eps in &[1e-2, 1e-4] {
                let (_, g) = energy(&m, p, eps, &f).unwrap();
                for k in (0..m.num_vertices()).step_by(7).take(20) {
                    let h = 1e-6;
                    let mut a = f.clone();
                    let mut b = f.clone();
                    a[k] += h;
                    b[k] -= h;
                    let fd = (energy(&m, p, eps, &a).unwrap().0 - energy(&m, p, eps, &b).unwrap().0) / (2.0 * h);
                    assert!((fd - g[k]).abs() <= 1e-6 * g[k].abs().max(1e-3), "p={p} eps={eps} k={k}");
                }
            }
        }
    }

    #[test]
    fn linear_solution_on_square() {
        let m = square(6);
        for &p in &[1.5, 2.0, 3.0] {
            let sol = solve_capacitor(&m, p, &SolverConfig::default()).unwrap();
            for (v, x) in sol.field.values.iter().zip(m.vertices()) {
                assert!((v - (1.0 - x[0])).abs() < 1e-8, "p={p}");
            }
            assert!((sol.energy - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn energy_decreases_along_newton() {
        let m = Mesh::annulus(0.5, 1.0, 0.08).unwrap();
        let sol = solve_capacitor(&m, 1.5, &SolverConfig::default()).unwrap();
        for s in &sol.stages {
            for w in s.energy_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-14 * w[0].abs());
            }
        }
    }

    #[test]
    fn moser_examples() {
        let f = ScalarField::new(vec![1.0, (-2.0f64).exp(), 0.0]);
        let u = moser_transform(&f, 1.5, MOSER_FLOOR);
        assert_eq!(u.values[0], 0.0);
        assert!((u.values[1] - 1.0).abs() < 1e-15);
        assert!((u.values[2] - 0.5 * 1e30f64.ln()).abs() < 1e-12);
        assert_eq!(u.floor, Some(MOSER_FLOOR));
        let exact = annulus_moser(1.5, 0.5, 1.0, 0.75);
        assert!((exact - (-0.5 * (1.0f64 / 3.0).ln())).abs() < 1e-12);
        assert!((exact - 0.549).abs() < 1e-3);
    }

    #[test]
    fn annulus_closed_forms() {
        assert!((annulus_potential(1.5, 0.5, 1.0, 0.75) - (1.0 / 0.75 - 1.0)).abs() < 1e-14);
        assert!((annulus_potential(2.0, 0.5, 1.0, 0.75) - 0.75f64.ln() / 0.5f64.ln()).abs() < 1e-14);
        let v = annulus_potential(1.3, 0.5, 1.0, 0.8);
        assert!(((1.0 - 1.3) * v.ln() - annulus_moser(1.3, 0.5, 1.0, 0.8)).abs() < 1e-12);
        let near_one = annulus_moser(1.02, 0.5, 1.0, 0.75);
        assert!((near_one - 0.98 * 1.5f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            eps_schedule: vec![1e-2, 1e-1],
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let sched = ContinuationSchedule {
            p_sequence: vec![1.2, 1.3],
            ..ContinuationSchedule::default()
        };
        assert!(sched.validate().is_err());
        assert!(matches!(
            solve_capacitor(&square(2), 1.0, &SolverConfig::default()),
            Err(SolverError::InvalidExponent(_))
        ));
    }
}
