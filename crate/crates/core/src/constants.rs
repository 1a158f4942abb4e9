//! Explicit constants of the Moser-iteration estimates and their behaviour as `p -> 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use thiserror::Error;

use crate::model::{ModelError, ModelManifold};
use crate::quadrature::neumaier_sum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("schedule exhausts t0 = {t0} after {steps} decrements (partial sum {sum})")]
    ScheduleExhausted { t0: f64, steps: usize, sum: f64 },
    #[error("schedule truncation K = {0} is below 16")]
    TruncationTooShort(usize),
    #[error("p = {p} exceeds p0 = {p0}: condition '{condition}' fails")]
    AboveThreshold { p: f64, p0: f64, condition: String },
    #[error("constant '{id}' is not finite at p = {p}")]
    NonFinite { id: String, p: f64 },
    #[error("p grid needs at least 6 points in (1, 1.5], got {0}")]
    GridTooSmall(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `C̄ = 2^nu (1 + p)^p`.
pub fn cbar(p: f64, nu: f64) -> f64 {
    2f64.powf(nu) * (1.0 + p).powf(p)
}

/// `C = 2^nu max{(1 + p)^p, 3^p nu^nu / (p^p (nu - p)^{nu - p})}`.
pub fn c_harnack(p: f64, nu: f64) -> f64 {
    let a = (1.0 + p).powf(p);
    let b = 3f64.powf(p) * nu.powf(nu) / (p.powf(p) * (nu - p).powf(nu - p));
    2f64.powf(nu) * a.max(b)
}

/// `Ĉ = S^{nu/p} 2^{(nu + 2p)(nu - p)/p}`.
pub fn chat(p: f64, nu: f64, s: f64) -> f64 {
    s.powf(nu / p) * 2f64.powf((nu + 2.0 * p) * (nu - p) / p)
}

/// Constant of the unstable Green-kernel bound, `S^{nu/p} C̄^{(nu-p)/p} (ep)^{nu-p} / (p-1)^{nu-p}`.
pub fn c_unstable(p: f64, nu: f64, s: f64) -> f64 {
    let e = nu - p;
    s.powf(nu / p) * cbar(p, nu).powf(e / p) * (std::f64::consts::E * p).powf(e) / (p - 1.0).powf(e)
}

/// The constants `c_n`, `C_n` of the local Sobolev/Poincaré estimates, which
/// depend only on `n` but have no known value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSobolevConfig {
    pub c_n: f64,
    pub big_c_n: f64,
}

impl Default for LocalSobolevConfig {
    fn default() -> Self {
        Self { c_n: 1.0, big_c_n: 1.0 }
    }
}

/// Local Poincaré and Sobolev constants on a ball of radius `R` with `Ric >= -(n-1) kappa^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSobolev {
    pub p_pp: f64,
    pub s_1n: f64,
    pub s_pn: f64,
}

/// `P_pp = exp{c_n (1 + kappa R)/p}`, the `S_{1,n}(R)` bound and `S_{p,n} = [S_{1,n} p (n-1)/(n-p)]^p`.
pub fn sobolev_local(
    n: usize,
    p: f64,
    kappa: f64,
    radius: f64,
    vol_ball: f64,
    config: LocalSobolevConfig,
) -> Result<LocalSobolev, ConstantsError> {
    let nf = n as f64;
    if n < 2 || !(p > 0.0 && p < nf) || !(kappa >= 0.0) || !(radius > 0.0) || !(vol_ball > 0.0) {
        return Err(ConstantsError::InvalidParameter(format!(
            "sobolev_local needs n >= 2, 0 < p < n, kappa >= 0, R > 0, |B_R| > 0 (got n={n}, p={p}, kappa={kappa}, R={radius}, vol={vol_ball})"
        )));
    }
    let space = if kappa == 0.0 {
        ModelManifold::euclidean(n)
    } else {
        ModelManifold::hyperbolic(n, kappa)?
    };
    let v2 = space.ball_volume(2.0 * radius)?;
    let v3 = space.ball_volume(3.0 * radius)?;
    let area = space.sphere_area(radius)?;
    let p_pp = (config.c_n * (1.0 + kappa * radius) / p).exp();
    let p_11 = (config.c_n * (1.0 + kappa * radius)).exp();
    let s_1n = config.big_c_n * v2 / vol_ball * (p_11 + v3 / (radius * area));
    let s_pn = (s_1n * p * (nf - 1.0) / (nf - p)).powf(p);
    Ok(LocalSobolev { p_pp, s_1n, s_pn })
}

/// Inputs of the local Harnack constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnackInputs {
    pub p: f64,
    pub nu: f64,
    pub sobolev: f64,
    pub poincare_1p: f64,
    /// The constant `c_2(nu, p0)`, which is not explicit.
    pub c2: f64,
    pub radius: f64,
    pub vol_2r: f64,
    pub vol_6r: f64,
}

/// `log H = c_2 P_{1,p} (|B_6R|/|B_2R|)^{1/p} Q^{-2} p` with
/// `Q = inf_{tau in [1, nu/(nu-p)]} (S C)^{-nu tau/p} R^{nu tau} |B_2R|^{-tau}`.
pub fn harnack_log_constant(h: &HarnackInputs) -> f64 {
    let c = c_harnack(h.p, h.nu);
    let log_base = -(h.nu / h.p) * (h.sobolev * c).ln() + h.nu * h.radius.ln() - h.vol_2r.ln();
    let tau_max = h.nu / (h.nu - h.p);
    // a^tau is monotone in tau, so the infimum sits at an endpoint.
    let log_q = log_base.min(log_base * tau_max);
    h.c2 * h.poincare_1p * (h.vol_6r / h.vol_2r).powf(1.0 / h.p) * (-2.0 * log_q).exp() * h.p
}

/// Exponent of the chained Harnack constant,
/// `C ς^{nu (1 + 2nu/(nu - p0))} P_{1,p} max{1, S}^{2 nu^2/(nu - p0)}`,
/// with the RCA bound `ς` and the non-explicit `C` supplied by the caller.
pub fn harnack_chain_log_constant(p0: f64, nu: f64, sobolev: f64, poincare_1p: f64, c: f64, varsigma: f64) -> f64 {
    let gap = nu - p0;
    c * varsigma.powf(nu * (1.0 + 2.0 * nu / gap)) * poincare_1p * sobolev.max(1.0).powf(2.0 * nu * nu / gap)
}

/// Decrements `x_k = t_k - t_{k+1}` of a Moser iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationSchedule {
    pub t0: f64,
    pub x: Vec<f64>,
}

impl IterationSchedule {
    pub fn new(t0: f64, x: Vec<f64>) -> Result<Self, ConstantsError> {
        let s = Self { t0, x };
        s.validate()?;
        Ok(s)
    }

    /// Truncation index `K` (the schedule holds `K + 1` decrements).
    pub fn truncation(&self) -> usize {
        self.x.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<(), ConstantsError> {
        if !(self.t0 > 0.0) || self.x.is_empty() {
            return Err(ConstantsError::InvalidParameter("schedule needs t0 > 0 and at least one decrement".into()));
        }
        let mut acc = Vec::with_capacity(self.x.len());
        for (k, &x) in self.x.iter().enumerate() {
            if !(x > 0.0) {
                return Err(ConstantsError::InvalidParameter(format!("decrement x_{k} = {x} is not positive")));
            }
            acc.push(x);
            let sum = neumaier_sum(acc.iter().copied());
            if sum > self.t0 {
                return Err(ConstantsError::ScheduleExhausted {
                    t0: self.t0,
                    steps: k + 1,
                    sum,
                });
            }
        }
        Ok(())
    }

    /// Validation plus the `K >= 16` requirement for certificate schedules.
    pub fn validate_certified(&self) -> Result<(), ConstantsError> {
        self.validate()?;
        if self.truncation() < 16 {
            return Err(ConstantsError::TruncationTooShort(self.truncation()));
        }
        Ok(())
    }

    /// Radii `t_0 > t_1 > ... > t_{K+1}`.
    pub fn radii(&self) -> Vec<f64> {
        let mut t = vec![self.t0];
        let mut acc = Vec::new();
        for &x in &self.x {
            acc.push(x);
            t.push(self.t0 - neumaier_sum(acc.iter().copied()));
        }
        t
    }

    /// `log prod_k x_k^{1/p^k}`.
    pub fn log_product(&self, p: f64) -> f64 {
        neumaier_sum(self.x.iter().enumerate().map(|(k, x)| p.powi(-(k as i32)) * x.ln()))
    }
}

/// Log of the iterated bound
/// `Ĉ^{1 + 1/p + ... + 1/p^K} [prod x_k^{1/p^k}]^{-(nu-p)/p} tail^{1/p^{K+1}}`.
pub fn iterate(schedule: &IterationSchedule, chat: f64, p: f64, nu: f64, tail_value: f64) -> Result<f64, ConstantsError> {
    schedule.validate()?;
    if !(chat > 0.0) || !(p > 1.0) || !(tail_value > 0.0) {
        return Err(ConstantsError::InvalidParameter(format!(
            "iterate needs Ĉ > 0, p > 1 and a positive tail value (got {chat}, {p}, {tail_value})"
        )));
    }
    let k = schedule.truncation();
    let weights = neumaier_sum((0..=k).map(|j| p.powi(-(j as i32))));
    let terms = [
        weights * chat.ln(),
        -((nu - p) / p) * schedule.log_product(p),
        p.powi(-(k as i32 + 1)) * tail_value.ln(),
    ];
    Ok(neumaier_sum(terms))
}

/// `K -> inf` limit of [`iterate`] on the geometric schedule `t_k = t/p^k` (tail omitted):
/// `Ĉ^{p/(p-1)} ((p-1)t/p)^{-(nu-p)/(p-1)} p^{(nu-p)/(p-1)^2}`, in log form.
pub fn geometric_closed_form(chat: f64, p: f64, nu: f64, t: f64) -> f64 {
    let e = p - 1.0;
    neumaier_sum([
        (p / e) * chat.ln(),
        -((nu - p) / e) * (e * t / p).ln(),
        ((nu - p) / (e * e)) * p.ln(),
    ])
}

/// Stationary point of `sum p^{-k} log x_k` under `sum x_k <= t0`: `x_k = t0 (p-1)/p p^{-k}`.
pub fn optimal_schedule(t0: f64, p: f64, k: usize) -> Result<IterationSchedule, ConstantsError> {
    if !(t0 > 0.0) || !(p > 1.0) {
        return Err(ConstantsError::InvalidParameter(format!("need t0 > 0 and p > 1 (got {t0}, {p})")));
    }
    let build = |shrink: f64| {
        let lead = t0 * shrink * (p - 1.0) / p;
        IterationSchedule::new(t0, (0..=k).map(|j| lead * p.powi(-(j as i32))).collect())
    };
    // Partial sums approach t0 from below; when rounding crosses it, shrink by a few ulps.
    build(1.0).or_else(|_| build(1.0 - 4.0 * f64::EPSILON))
}

/// `log prod_{k>=0} x_k^{1/p^k}` for the optimal infinite schedule:
/// `(p/(p-1)) log((p-1) t0/p) - (p/(p-1)^2) log p`.
pub fn optimal_log_product(t0: f64, p: f64) -> f64 {
    let e = p - 1.0;
    (p / e) * (e * t0 / p).ln() - (p / (e * e)) * p.ln()
}

/// Optimum among schedules with exactly `K + 1` decrements summing to `t0`:
/// `x_k = t0 p^{-k} / sum_{j<=K} p^{-j}`.
pub fn truncated_optimal_schedule(t0: f64, p: f64, k: usize) -> Result<IterationSchedule, ConstantsError> {
    if !(t0 > 0.0) || !(p > 1.0) {
        return Err(ConstantsError::InvalidParameter(format!("need t0 > 0 and p > 1 (got {t0}, {p})")));
    }
    let w: Vec<f64> = (0..=k).map(|j| p.powi(-(j as i32))).collect();
    let total = neumaier_sum(w.iter().copied());
    // Shrink by one ulp-scale factor so rounding never pushes the sum past t0.
    let scale = t0 * (1.0 - 4.0 * f64::EPSILON) / total;
    IterationSchedule::new(t0, w.into_iter().map(|v| v * scale).collect())
}

/// Outcome of the random-schedule search against the optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSearch {
    pub trials: usize,
    pub optimum: f64,
    pub best_trial: f64,
    /// `optimum - best_trial` in log space; positive when no trial wins.
    pub margin: f64,
}

/// Draws Dirichlet-distributed decrement vectors (half uniform, half concentrated
/// around the optimum) and compares their log-products with the optimum.
pub fn random_schedule_search(t0: f64, p: f64, k: usize, trials: usize, seed: u64) -> Result<ScheduleSearch, ConstantsError> {
    let opt = truncated_optimal_schedule(t0, p, k)?;
    let optimum = opt.log_product(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let weights: Vec<f64> = opt.x.iter().map(|x| x / t0).collect();
    for trial in 0..trials {
        let concentration = if trial % 2 == 0 { None } else { Some(10f64.powf(rng.random_range(1.0..4.0))) };
        let mut draws = Vec::with_capacity(k + 1);
        for w in &weights {
            let shape = match concentration {
                None => 1.0,
                Some(c) => (c * w).max(1e-3),
            };
            let g = Gamma::new(shape, 1.0).map_err(|e| ConstantsError::InvalidParameter(e.to_string()))?;
            draws.push(g.sample(&mut rng).max(f64::MIN_POSITIVE));
        }
        let total = neumaier_sum(draws.iter().copied());
        let scale = t0 * (1.0 - 4.0 * f64::EPSILON) / total;
        let sched = IterationSchedule {
            t0,
            x: draws.into_iter().map(|d| d * scale).collect(),
        };
        best = best.max(sched.log_product(p));
    }
    Ok(ScheduleSearch {
        trials,
        optimum,
        best_trial: best,
        margin: optimum - best,
    })
}

/// One row of the no-go certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct NogoRow {
    pub p: f64,
    /// `log` of the supremum of `prod x_k^{1/p^k}` over all schedules.
    pub log_optimum: f64,
    /// `log(A e^{-B/(p-1)})`.
    pub log_target: f64,
    /// `log_target - log_optimum`.
    pub margin: f64,
    /// `log_target` minus the upper bound used in the proof.
    pub proof_margin: f64,
}

/// Certificate that no schedule reaches `A e^{-B/(p-1)}` for `p <= p0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NogoReport {
    pub a: f64,
    pub b: f64,
    pub t0: f64,
    /// `t0` raised so that `e^{B+2} t0` is an integer.
    pub t0_adjusted: f64,
    /// Threshold from `(B+1) p^{-N} > B`, or `None` if it holds for every p tested.
    pub p0_first: Option<f64>,
    /// Threshold from `p^{-N}/(p-1) > (N+1) log max(1,t0) - log A`.
    pub p0_second: Option<f64>,
    pub p0: f64,
    pub rows: Vec<NogoRow>,
}

impl NogoReport {
    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn all_positive(&self) -> bool {
        self.rows.iter().all(|r| r.margin > 0.0)
    }
}

/// Largest p on the search range reached by the no-go certificate when neither
/// displayed condition binds.
pub const NOGO_P_CAP: f64 = 2.0;

struct NogoConditions {
    a: f64,
    b: f64,
    n: f64,
    log_max_t0: f64,
}

impl NogoConditions {
    fn first(&self, p: f64) -> bool {
        (self.b + 1.0) * p.powf(-self.n) > self.b
    }

    fn second(&self, p: f64) -> bool {
        p.powf(-self.n) / (p - 1.0) > (self.n + 1.0) * self.log_max_t0 - self.a.ln()
    }
}

// Sup of p in (1, cap] where the decreasing-in-p condition holds, or None if it holds at cap.
fn threshold(cond: impl Fn(f64) -> bool) -> Option<f64> {
    if cond(NOGO_P_CAP) {
        return None;
    }
    let mut lo = 1.0 + 1e-15;
    let mut hi = NOGO_P_CAP;
    if !cond(lo) {
        return Some(1.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cond(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON {
            break;
        }
    }
    Some(lo)
}

/// `p0(A, B, t0)` and the conditions that define it.
pub fn nogo_threshold(a: f64, b: f64, t0: f64) -> Result<(f64, f64, Option<f64>, Option<f64>), ConstantsError> {
    if !(a > 0.0) || !(b >= 0.0) || !(t0 > 0.0) {
        return Err(ConstantsError::InvalidParameter(format!("need A > 0, B >= 0, t0 > 0 (got {a}, {b}, {t0})")));
    }
    let scale = (b + 2.0).exp();
    let n = (scale * t0).ceil();
    let t0_adj = n / scale;
    let cond = NogoConditions {
        a,
        b,
        n,
        log_max_t0: t0_adj.max(1.0).ln(),
    };
    let first = threshold(|p| cond.first(p));
    let second = threshold(|p| cond.second(p));
    let p0 = first.unwrap_or(NOGO_P_CAP).min(second.unwrap_or(NOGO_P_CAP));
    Ok((p0, t0_adj, first, second))
}

/// `count` points `p = 1 + (p0 - 1) j / count`, `j = 1..=count`.
pub fn nogo_grid(p0: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|j| 1.0 + (p0 - 1.0) * j as f64 / count as f64).collect()
}

/// Verifies `sup prod x_k^{1/p^k} < A e^{-B/(p-1)}` on `p_grid`.
pub fn nogo_certificate(a: f64, b: f64, t0: f64, p_grid: &[f64]) -> Result<NogoReport, ConstantsError> {
    let (p0, t0_adj, first, second) = nogo_threshold(a, b, t0)?;
    let n = ((b + 2.0).exp() * t0_adj).round();
    let log_max = t0_adj.max(1.0).ln();
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        if !(p > 1.0) {
            return Err(ConstantsError::InvalidParameter(format!("grid point p = {p} must exceed 1")));
        }
        if p > p0 {
            let condition = match (first, second) {
                (Some(f), _) if p > f => "(B+1) p^{-e^{B+2} t0} > B",
                _ => "p^{-e^{B+2} t0}/(p-1) > (e^{B+2} t0 + 1) log max(1, t0) - log A",
            };
            return Err(ConstantsError::AboveThreshold {
                p,
                p0,
                condition: condition.to_string(),
            });
        }
        let log_optimum = optimal_log_product(t0, p);
        let log_target = a.ln() - b / (p - 1.0);
        let proof_bound = (n + 1.0) * log_max - (b + 2.0) * p.powf(-n) / (p - 1.0);
        rows.push(NogoRow {
            p,
            log_optimum,
            log_target,
            margin: log_target - log_optimum,
            proof_margin: log_target - proof_bound,
        });
    }
    Ok(NogoReport {
        a,
        b,
        t0,
        t0_adjusted: t0_adj,
        p0_first: first,
        p0_second: second,
        p0,
        rows,
    })
}

/// Constant whose behaviour as `p -> 1` is classified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantId {
    Cbar { nu: f64 },
    CHarnack { nu: f64 },
    Chat { nu: f64, s: f64 },
    CUnstable { nu: f64, s: f64 },
    /// `A e^{-B/(p-1)}`, the target of the no-go statement.
    NogoTarget { a: f64, b: f64 },
    /// `prod x_k^{1/p^k}` of the optimal schedule started at `t0`.
    OptimalProduct { t0: f64 },
}

impl ConstantId {
    pub fn name(&self) -> &'static str {
        match self {
            ConstantId::Cbar { .. } => "cbar",
            ConstantId::CHarnack { .. } => "c_harnack",
            ConstantId::Chat { .. } => "chat",
            ConstantId::CUnstable { .. } => "c_unstable",
            ConstantId::NogoTarget { .. } => "nogo_target",
            ConstantId::OptimalProduct { .. } => "optimal_product",
        }
    }

    /// `log` of the constant at `p`.
    pub fn log_value(&self, p: f64) -> f64 {
        match *self {
            ConstantId::Cbar { nu } => cbar(p, nu).ln(),
            ConstantId::CHarnack { nu } => c_harnack(p, nu).ln(),
            ConstantId::Chat { nu, s } => chat(p, nu, s).ln(),
            ConstantId::CUnstable { nu, s } => c_unstable(p, nu, s).ln(),
            ConstantId::NogoTarget { a, b } => a.ln() - b / (p - 1.0),
            ConstantId::OptimalProduct { t0 } => optimal_log_product(t0, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupClass {
    Bounded,
    Polynomial,
    Exponential,
    Indeterminate,
}

impl BlowupClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlowupClass::Bounded => "bounded",
            BlowupClass::Polynomial => "polynomial",
            BlowupClass::Exponential => "exponential",
            BlowupClass::Indeterminate => "indeterminate",
        }
    }
}

/// Result of [`classify_blowup`].
#[derive(Debug, Clone, PartialEq)]
pub struct Blowup {
    pub class: BlowupClass,
    /// Local slope of `log C` against `log 1/(p-1)` at the smallest `p - 1`.
    pub poly_slope: f64,
    /// Local slope of `log C` against `1/(p-1)` at the smallest `p - 1`.
    pub exp_slope: f64,
}

/// `count` values of `p` with `p - 1` log-spaced on `[eps_min, eps_max]`.
pub fn log_spaced_p_grid(eps_min: f64, eps_max: f64, count: usize) -> Vec<f64> {
    crate::model::log_grid(eps_min, eps_max, count).into_iter().map(|e| 1.0 + e).collect()
}

/// Classifies `C(p)` as `p -> 1` from finite-difference log-slopes.
pub fn classify_blowup(id: ConstantId, p_grid: &[f64]) -> Result<Blowup, ConstantsError> {
    if p_grid.len() < 6 || p_grid.iter().any(|&p| !(p > 1.0 && p <= 1.5)) {
        return Err(ConstantsError::GridTooSmall(p_grid.len()));
    }
    let mut eps: Vec<f64> = p_grid.iter().map(|p| p - 1.0).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 6 {
        return Err(ConstantsError::GridTooSmall(eps.len()));
    }
    let mut ys = Vec::with_capacity(eps.len());
    for &e in &eps {
        let y = id.log_value(1.0 + e);
        if !y.is_finite() {
            return Err(ConstantsError::NonFinite {
                id: id.name().to_string(),
                p: 1.0 + e,
            });
        }
        ys.push(y);
    }
    let poly = |i: usize| (ys[i + 1] - ys[i]) / ((1.0 / eps[i + 1]).ln() - (1.0 / eps[i]).ln());
    let expo = |i: usize| (ys[i + 1] - ys[i]) / (1.0 / eps[i + 1] - 1.0 / eps[i]);
    // Segments 0 and 1 are the two closest to p = 1.
    let (p0, p1) = (poly(0), poly(1));
    let (e0, e1) = (expo(0), expo(1));
    let stable = |a: f64, b: f64| (a - b).abs() <= 0.1 * a.abs().max(b.abs());
    let class = if p0.abs() < 0.05 {
        BlowupClass::Bounded
    } else if stable(p0, p1) {
        BlowupClass::Polynomial
    } else if stable(e0, e1) && p0.abs() > p1.abs() {
        BlowupClass::Exponential
    } else {
        BlowupClass::Indeterminate
    };
    Ok(Blowup {
        class,
        poly_slope: p0,
        exp_slope: e0,
    })
}

/// Constants evaluated along a p-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    pub nu: f64,
    pub sobolev: f64,
    pub p_grid: Vec<f64>,
    /// `(constant id, value per p, classification)`.
    pub rows: Vec<(String, Vec<f64>, Option<Blowup>)>,
}

/// Evaluates the explicit constants on `p_grid` and classifies each one.
pub fn constants_report(nu: f64, sobolev: f64, p_grid: &[f64]) -> ConstantsReport {
    let ids = [
        ConstantId::Cbar { nu },
        ConstantId::CHarnack { nu },
        ConstantId::Chat { nu, s: sobolev },
        ConstantId::CUnstable { nu, s: sobolev },
    ];
    let rows = ids
        .iter()
        .map(|id| {
            let values = p_grid.iter().map(|&p| id.log_value(p).exp()).collect();
            (id.name().to_string(), values, classify_blowup(*id, p_grid).ok())
        })
        .collect();
    ConstantsReport {
        nu,
        sobolev,
        p_grid: p_grid.to_vec(),
        rows,
    }
}

/// Uniform random draw helper used by property tests of schedules.
pub fn random_schedule<R: Rng>(rng: &mut R, t0: f64, k: usize) -> IterationSchedule {
    let draws: Vec<f64> = (0..=k).map(|_| rng.random_range(1e-6..1.0)).collect();
    let total: f64 = draws.iter().sum();
    let scale = t0 * (1.0 - 1e-9) / total;
    IterationSchedule {
        t0,
        x: draws.into_iter().map(|d| d * scale).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn explicit_values_are_exact() {
        assert_eq!(cbar(2.0, 3.0), 72.0);
        assert_eq!(cbar(2.0, 4.0), 144.0);
        assert_eq!(cbar(1.0, 3.0), 16.0);
        assert_eq!(c_harnack(2.0, 4.0), 2304.0);
        assert!((c_harnack(1.0, 2.0) - 48.0).abs() < 1e-12);
        assert_eq!(chat(2.0, 4.0, 1.0), 256.0);
        assert_eq!(chat(2.0, 4.0, 0.0), 0.0);
        assert!((chat(2.0, 3.0, 1.0) - 2f64.powf(3.5)).abs() < 1e-12);
    }

    #[test]
    fn chat_limit_is_finite() {
        let lim = 2f64.powf(3.0) * 2f64.powf(5.0 * 2.0);
        assert!((chat(1.0, 3.0, 2.0) / lim - 1.0).abs() < 1e-12);
        assert!(chat(1.05, 3.0, 2.0).is_finite());
    }

    #[test]
    fn c_unstable_values() {
        let v = c_unstable(2.0, 3.0, 1.0);
        assert!((v - 72f64.sqrt() * 2.0 * std::f64::consts::E).abs() < 1e-12);
        assert!((v - 46.13).abs() < 0.01);
        assert!((c_unstable(2.0, 2.0, 3.0) - 3.0).abs() < 1e-12);
        for &p in &[1.01f64, 1.001] {
            let scaled = c_unstable(p, 3.0, 1.0) * (p - 1.0).powf(3.0 - p);
            let limit = 256.0 * std::f64::consts::E.powi(2);
            assert!((scaled / limit - 1.0).abs() < 0.1, "p={p}: {scaled}");
        }
    }

    #[test]
    fn sobolev_local_examples() {
        let cfg = LocalSobolevConfig::default();
        let flat = sobolev_local(3, 2.0, 0.0, 2.0, 4.0, cfg).unwrap();
        assert!((flat.p_pp - 0.5f64.exp()).abs() < 1e-14);
        assert!((flat.s_pn - (4.0 * flat.s_1n).powi(2)).abs() < 1e-9 * flat.s_pn);
        let near_one = sobolev_local(3, 1.0 + 1e-9, 0.5, 1.0, 3.0, cfg).unwrap();
        assert!((near_one.s_pn / near_one.s_1n - 1.0).abs() < 1e-6);
        assert!(sobolev_local(3, 3.0, 0.0, 1.0, 1.0, cfg).is_err());
    }

    #[test]
    fn single_step_iteration() {
        let s = IterationSchedule::new(1.0, vec![0.25]).unwrap();
        let v = iterate(&s, 3.0, 2.0, 3.0, 5.0).unwrap();
        let expected = 3f64.ln() - 0.5 * 0.25f64.ln() + 0.5 * 5f64.ln();
        assert!((v - expected).abs() < 1e-14);
        let unit = iterate(&s, 3.0, 2.0, 3.0, 1.0).unwrap();
        assert!((unit - (3f64.ln() - 0.5 * 0.25f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn geometric_iteration_converges_to_closed_form() {
        for &p in &[1.1f64, 1.5, 2.0] {
            for &nu in &[2.5, 3.0, 4.0] {
                let k = (40.0 / p.log10()).ceil() as usize;
                let s = optimal_schedule(1.0, p, k).unwrap();
                let c = chat(p, nu, 1.0);
                let it = iterate(&s, c, p, nu, 1.0).unwrap();
                let cf = geometric_closed_form(c, p, nu, 1.0);
                assert!((it - cf).abs() <= 1e-10 * cf.abs().max(1.0), "p={p} nu={nu}");
            }
        }
    }

    #[test]
    fn optimal_schedule_examples() {
        let s = optimal_schedule(1.0, 2.0, 64).unwrap();
        assert_eq!(&s.x[..3], &[0.5, 0.25, 0.125]);
        assert!((s.log_product(2.0).exp() - 0.0625).abs() < 1e-15);
        assert!((optimal_log_product(1.0, 2.0).exp() - 0.0625).abs() < 1e-15);
        let t = s.radii();
        for (k, tk) in t.iter().take(10).enumerate() {
            assert!((tk - 2f64.powi(-(k as i32))).abs() < 1e-15);
        }
    }

    #[test]
    fn perturbing_the_optimum_lowers_the_product() {
        let p = 1.3;
        let s = truncated_optimal_schedule(2.0, p, 40).unwrap();
        let mut x = s.x.clone();
        x[0] *= 1.1;
        let total: f64 = x.iter().sum();
        let x: Vec<f64> = x.iter().map(|v| v * 2.0 * (1.0 - 1e-12) / total).collect();
        let perturbed = IterationSchedule::new(2.0, x).unwrap();
        assert!(perturbed.log_product(p) < s.log_product(p));
    }

    #[test]
    fn truncation_rules() {
        assert!(matches!(
            IterationSchedule::new(1.0, vec![0.6, 0.6]),
            Err(ConstantsError::ScheduleExhausted { steps: 2, .. })
        ));
        let short = optimal_schedule(1.0, 2.0, 5).unwrap();
        assert!(matches!(short.validate_certified(), Err(ConstantsError::TruncationTooShort(5))));
        assert!(optimal_schedule(1.0, 2.0, 16).unwrap().validate_certified().is_ok());
    }

    #[test]
    fn nogo_unit_parameters() {
        let (p0, t0_adj, first, second) = nogo_threshold(1.0, 1.0, 1.0).unwrap();
        assert!((t0_adj * 1f64.exp().powi(3) - 21.0).abs() < 1e-9);
        assert!((first.unwrap() - 2f64.powf(1.0 / 21.0)).abs() < 1e-12);
        assert!(second.unwrap() > first.unwrap());
        assert_eq!(p0, first.unwrap());
        let grid = nogo_grid(p0, 6);
        let rep = nogo_certificate(1.0, 1.0, 1.0, &grid).unwrap();
        assert!(rep.all_positive());
        assert!(rep.rows.iter().all(|r| r.proof_margin > 0.0));
        let mid = nogo_certificate(1.0, 1.0, 1.0, &[1.0 + 0.5 * (p0 - 1.0)]).unwrap();
        assert!(mid.min_margin() > 0.0);
        assert!(matches!(
            nogo_certificate(1.0, 1.0, 1.0, &[p0 + 1e-3]),
            Err(ConstantsError::AboveThreshold { .. })
        ));
    }

    #[test]
    fn nogo_zero_b_edge() {
        let (p0, ..) = nogo_threshold(1.0, 0.0, 1.0).unwrap();
        let rep = nogo_certificate(1.0, 0.0, 1.0, &nogo_grid(p0, 6)).unwrap();
        assert!(rep.all_positive());
    }

    #[test]
    fn nogo_margins_on_parameter_cube() {
        for &a in &[1.0, 2.0] {
            for &b in &[1.0, 2.0] {
                for &t0 in &[1.0, 2.0] {
                    let (p0, ..) = nogo_threshold(a, b, t0).unwrap();
                    let rep = nogo_certificate(a, b, t0, &nogo_grid(p0, 6)).unwrap();
                    assert!(rep.all_positive(), "A={a} B={b} t0={t0}");
                }
            }
        }
    }

    #[test]
    fn random_search_never_beats_optimum() {
        for &p in &[1.02, 1.3, 2.0] {
            let res = random_schedule_search(1.0, p, 64, 1000, 7).unwrap();
            assert!(res.margin > 0.0, "p={p}: {res:?}");
        }
    }

    #[test]
    fn blowup_classes() {
        let grid = log_spaced_p_grid(1e-3, 0.5, 8);
        let c = classify_blowup(ConstantId::Chat { nu: 3.0, s: 2.0 }, &grid).unwrap();
        assert_eq!(c.class, BlowupClass::Bounded);
        let u = classify_blowup(ConstantId::CUnstable { nu: 3.0, s: 1.0 }, &grid).unwrap();
        assert_eq!(u.class, BlowupClass::Polynomial);
        assert!((u.poly_slope - (3.0 - grid[0])).abs() < 0.05);
        let t = classify_blowup(ConstantId::NogoTarget { a: 1.0, b: 1.0 }, &grid).unwrap();
        assert_eq!(t.class, BlowupClass::Exponential);
        assert!(classify_blowup(ConstantId::Cbar { nu: 3.0 }, &grid[..4]).is_err());
    }

    #[test]
    fn harnack_constants_are_finite_and_monotone() {
        let base = HarnackInputs {
            p: 1.5,
            nu: 3.0,
            sobolev: 0.5,
            poincare_1p: 1.0,
            c2: 1.0,
            radius: 1.0,
            vol_2r: 33.5,
            vol_6r: 904.8,
        };
        let h1 = harnack_log_constant(&base);
        let h2 = harnack_log_constant(&HarnackInputs { sobolev: 1.0, ..base });
        assert!(h1.is_finite() && h2 > h1);
        let c1 = harnack_chain_log_constant(2.0, 3.0, 0.5, 1.0, 1.0, 1.0);
        let c2 = harnack_chain_log_constant(2.0, 3.0, 0.5, 1.0, 1.0, 1.5);
        assert_eq!(c1, 1.0);
        assert!(c2 > c1);
    }

    proptest! {
        #[test]
        fn constants_increase_with_sobolev(p in 1.01f64..2.0, extra in 0.1f64..3.0, s in 0.01f64..10.0, ds in 0.01f64..5.0) {
            let nu = p + extra;
            prop_assert!(chat(p, nu, s + ds) > chat(p, nu, s));
            prop_assert!(c_unstable(p, nu, s + ds) > c_unstable(p, nu, s));
        }

        #[test]
        fn optimum_dominates_random_schedules(seed in 0u64..1000, p in 1.05f64..3.0, t0 in 0.1f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_schedule(&mut rng, t0, 20);
            let opt = truncated_optimal_schedule(t0, p, 20).unwrap();
            prop_assert!(opt.log_product(p) > s.log_product(p));
        }
    }
}
