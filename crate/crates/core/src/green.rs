//! Radial p-Green kernels `G_p(r) = int_r^{R0} v_h^{-1/(p-1)}` on model manifolds.
//!
//! Kernels are stored as `log G` so that exponents like `1/(p-1) = 50` neither
//! overflow near the pole nor underflow in the tail. Every interval integral is
//! done in the variable `x = log s`, which turns the power-law integrands near the
//! pole into smooth exponentials.

use thiserror::Error;

use crate::interp::Hermite;
use crate::model::{least_squares_slope, log_grid, unit_sphere_area, ModelError, ModelManifold, TailGrowth};
use crate::quadrature::{log_add_exp, neumaier_sum, Integrator, QuadratureError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error("exponent p = {p} outside (1, {n}]")]
    InvalidExponent { p: f64, n: usize },
    #[error("the model is p-parabolic for p = {p}: no Green kernel with R0 = inf")]
    Parabolic { p: f64 },
    #[error("radius {r} outside the kernel domain (0, {r0})")]
    OutOfRange { r: f64, r0: f64 },
    #[error("level {level} outside the kernel range ({lo:e}, {hi:e})")]
    LevelOutOfRange { level: f64, lo: f64, hi: f64 },
    #[error("warping decreases at r = {r}; the supremum of 1/v_h is not attained at the inner radius")]
    DecreasingWarping { r: f64 },
    #[error("invalid radius grid: {0}")]
    InvalidGrid(String),
    #[error("model has no polynomial volume-growth regime")]
    NotPowerTail,
    #[error("p = {p} is not below the reverse-doubling exponent b = {b}")]
    BorderlineExponent { p: f64, b: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// The model kernel `mu(r)` of Euclidean space, including the `p = n` branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelMu {
    pub n: usize,
    pub p: f64,
    pub omega: f64,
}

impl ModelMu {
    pub fn new(n: usize, p: f64) -> Result<Self, GreenError> {
        if !(p > 1.0) || p > n as f64 {
            return Err(GreenError::InvalidExponent { p, n });
        }
        Ok(Self {
            n,
            p,
            omega: unit_sphere_area(n),
        })
    }

    fn k(&self) -> f64 {
        (self.n as f64 - self.p) / (self.p - 1.0)
    }

    fn scale(&self) -> f64 {
        self.omega.powf(-1.0 / (self.p - 1.0))
    }

    fn is_critical(&self) -> bool {
        self.p == self.n as f64
    }

    pub fn value(&self, r: f64) -> f64 {
        if self.is_critical() {
            -self.scale() * r.ln()
        } else {
            let k = self.k();
            self.scale() * r.powf(-k) / k
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        -self.scale() * r.powf(-self.k() - 1.0)
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        let k = self.k();
        (k + 1.0) * self.scale() * r.powf(-k - 2.0)
    }
}

/// `mu(n, p, r)`.
pub fn mu(n: usize, p: f64, r: f64) -> Result<f64, GreenError> {
    if !(r > 0.0) {
        return Err(GreenError::OutOfRange { r, r0: f64::INFINITY });
    }
    Ok(ModelMu::new(n, p)?.value(r))
}

/// Sampling grid of a radial kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGrid {
    pub r_min: f64,
    /// Upper sample radius when `R0 = inf`; ignored for finite `R0`.
    pub r_top: f64,
    pub points_per_decade: usize,
}

impl Default for KernelGrid {
    fn default() -> Self {
        Self {
            r_min: 1e-4,
            r_top: 1e3,
            points_per_decade: 64,
        }
    }
}

/// One row of a sampled kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub r: f64,
    pub g: f64,
    pub dg: f64,
    pub log_g: f64,
}

/// Sampled radial Green kernel.
#[derive(Debug, Clone)]
pub struct RadialKernel {
    model: ModelManifold,
    p: f64,
    r0: f64,
    parabolic: bool,
    radii: Vec<f64>,
    log_g: Vec<f64>,
    // Monotone interpolant of log r against -log G, for level inversion.
    inverse: Option<Hermite>,
    integrator: Integrator,
}

/// Builds `G_p` on `model` with Dirichlet radius `r0` (`inf` for the minimal kernel).
pub fn green_radial(model: &ModelManifold, p: f64, r0: f64) -> Result<RadialKernel, GreenError> {
    green_radial_with(model, p, r0, KernelGrid::default())
}

pub fn green_radial_with(model: &ModelManifold, p: f64, r0: f64, grid: KernelGrid) -> Result<RadialKernel, GreenError> {
    let n = model.n();
    if !(p > 1.0) || p > n as f64 {
        return Err(GreenError::InvalidExponent { p, n });
    }
    if !(r0 > 0.0) || r0 > model.r_max() {
        return Err(GreenError::OutOfRange { r: r0, r0: model.r_max() });
    }
    let mut kernel = RadialKernel {
        model: model.clone(),
        p,
        r0,
        parabolic: false,
        radii: Vec::new(),
        log_g: Vec::new(),
        inverse: None,
        integrator: model.integrator(),
    };
    if r0.is_infinite() {
        kernel.parabolic = is_parabolic_at_infinity(model, p);
        if kernel.parabolic {
            return Ok(kernel);
        }
    }

    let top = if r0.is_finite() { r0 } else { grid.r_top };
    let r_min = if r0.is_finite() { grid.r_min * r0.min(1.0) } else { grid.r_min };
    if !(r_min > 0.0 && r_min < top) || grid.points_per_decade < 2 {
        return Err(GreenError::InvalidGrid(format!("r_min = {r_min}, top = {top}")));
    }
    let decades = (top / r_min).log10();
    let count = ((decades * grid.points_per_decade as f64).ceil() as usize + 1).max(8);
    let radii = log_grid(r_min, top, count);

    let m = radii.len();
    let mut log_g = vec![f64::NEG_INFINITY; m];
    if r0.is_infinite() {
        log_g[m - 1] = kernel.log_tail(radii[m - 1])?;
    }
    for i in (0..m - 1).rev() {
        let piece = kernel.log_integral(radii[i], radii[i + 1])?;
        log_g[i] = log_add_exp(piece, log_g[i + 1]);
    }
    let finite: Vec<usize> = (0..m).filter(|&i| log_g[i].is_finite()).collect();
    if finite.len() >= 2 {
        let xs: Vec<f64> = finite.iter().map(|&i| -log_g[i]).collect();
        let ys: Vec<f64> = finite.iter().map(|&i| radii[i].ln()).collect();
        if xs.windows(2).all(|w| w[1] > w[0]) {
            kernel.inverse = Some(Hermite::monotone(xs, ys));
        }
    }
    kernel.radii = radii;
    kernel.log_g = log_g;
    Ok(kernel)
}

fn log_flux(model: &ModelManifold, p: f64, s: f64) -> f64 {
    -model.log_area(s) / (p - 1.0)
}

/// `log int_a^b v_h^{-1/(p-1)}` with `0 < a < b`, integrated in `log s`.
pub(crate) fn log_flux_integral(
    model: &ModelManifold,
    p: f64,
    integrator: &Integrator,
    a: f64,
    b: f64,
) -> Result<f64, QuadratureError> {
    let (la, lb) = (a.ln(), b.ln());
    let shift = (log_flux(model, p, a) + la).max(log_flux(model, p, b) + lb);
    let g = |x: f64| (log_flux(model, p, x.exp()) + x - shift).exp();
    let mut cuts = vec![la];
    cuts.extend(model.breakpoints().into_iter().filter(|&x| x > a && x < b).map(f64::ln));
    cuts.push(lb);
    let mut parts = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        parts.push(integrator.integrate(g, w[0], w[1])?.value);
    }
    Ok(shift + neumaier_sum(parts).ln())
}

/// `log int_a^inf v_h^{-1/(p-1)}` through `s = a / u`.
pub(crate) fn log_flux_tail(model: &ModelManifold, p: f64, integrator: &Integrator, a: f64) -> Result<f64, QuadratureError> {
    if let Some((start, beta)) = model.power_end() {
        let gamma = beta / (p - 1.0);
        if gamma > 1.0 {
            // Exact algebraic tail: int_x^inf v_h^{-1/(p-1)} = x v_h(x)^{-1/(p-1)} / (gamma - 1).
            let closed = |x: f64| log_flux(model, p, x) + x.ln() - (gamma - 1.0).ln();
            if a >= start {
                return Ok(closed(a));
            }
            return Ok(log_add_exp(log_flux_integral(model, p, integrator, a, start)?, closed(start)));
        }
    }
    let shift = log_flux(model, p, a) + a.ln();
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        (log_flux(model, p, a / u) + a.ln() - 2.0 * u.ln() - shift).exp()
    };
    let est = integrator.integrate(g, 0.0, 1.0)?;
    Ok(shift + est.value.ln())
}

/// Whether `int^inf v_h^{-1/(p-1)}` diverges, decided from the tail growth of `v_h`.
pub(crate) fn is_parabolic_at_infinity(model: &ModelManifold, p: f64) -> bool {
    match model.tail_growth() {
        TailGrowth::Power(beta) => beta / (p - 1.0) <= 1.0,
        TailGrowth::Exponential => false,
        TailGrowth::Bounded => true,
    }
}

impl RadialKernel {
    pub fn model(&self) -> &ModelManifold {
        &self.model
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn outer_radius(&self) -> f64 {
        self.r0
    }

    pub fn is_parabolic(&self) -> bool {
        self.parabolic
    }

    fn log_f(&self, s: f64) -> f64 {
        log_flux(&self.model, self.p, s)
    }

    fn log_integral(&self, a: f64, b: f64) -> Result<f64, QuadratureError> {
        log_flux_integral(&self.model, self.p, &self.integrator, a, b)
    }

    fn log_tail(&self, a: f64) -> Result<f64, QuadratureError> {
        log_flux_tail(&self.model, self.p, &self.integrator, a)
    }

    fn ensure_kernel(&self) -> Result<(), GreenError> {
        if self.parabolic {
            Err(GreenError::Parabolic { p: self.p })
        } else {
            Ok(())
        }
    }

    fn check_radius(&self, r: f64) -> Result<(), GreenError> {
        if r > 0.0 && r.is_finite() && r <= self.r0 {
            Ok(())
        } else {
            Err(GreenError::OutOfRange { r, r0: self.r0 })
        }
    }

    /// `log G_p(r)`; `-inf` at `r = R0`.
    pub fn log_value(&self, r: f64) -> Result<f64, GreenError> {
        self.ensure_kernel()?;
        self.check_radius(r)?;
        let radii = &self.radii;
        let last = radii.len() - 1;
        if r < radii[0] {
            let piece = self.log_integral(r, radii[0])?;
            return Ok(log_add_exp(piece, self.log_g[0]));
        }
        if r > radii[last] {
            return Ok(self.log_tail(r)?);
        }
        let i = crate::interp::locate(radii, r);
        if r == radii[i] {
            return Ok(self.log_g[i]);
        }
        if r == radii[i + 1] {
            return Ok(self.log_g[i + 1]);
        }
        let piece = self.log_integral(r, radii[i + 1])?;
        Ok(log_add_exp(piece, self.log_g[i + 1]))
    }

    pub fn value(&self, r: f64) -> Result<f64, GreenError> {
        Ok(self.log_value(r)?.exp())
    }

    /// `G_p'(r) = -v_h(r)^{-1/(p-1)}`.
    pub fn derivative(&self, r: f64) -> Result<f64, GreenError> {
        self.ensure_kernel()?;
        self.check_radius(r)?;
        Ok(-self.log_f(r).exp())
    }

    /// `G_p''(r) = (v_h'/v_h) v_h^{-1/(p-1)} / (p-1)`.
    pub fn second_derivative(&self, r: f64) -> Result<f64, GreenError> {
        self.ensure_kernel()?;
        self.check_radius(r)?;
        let h = self.model.mean_curvature_unchecked(r);
        Ok(h * self.log_f(r).exp() / (self.p - 1.0))
    }

    /// Moser transform `w_p = (1 - p) log G_p(r)`.
    pub fn moser_core(&self, r: f64) -> Result<f64, GreenError> {
        if r >= self.r0 {
            return Err(GreenError::OutOfRange { r, r0: self.r0 });
        }
        Ok((1.0 - self.p) * self.log_value(r)?)
    }

    pub fn samples(&self) -> Vec<KernelSample> {
        self.radii
            .iter()
            .zip(&self.log_g)
            .map(|(&r, &lg)| KernelSample {
                r,
                g: lg.exp(),
                dg: -self.log_f(r).exp(),
                log_g: lg,
            })
            .collect()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Largest level represented on the sample grid.
    pub fn max_level(&self) -> f64 {
        self.log_g.first().map(|v| v.exp()).unwrap_or(0.0)
    }

    /// Smallest positive level represented on the sample grid.
    pub fn min_level(&self) -> f64 {
        self.log_g.iter().rev().find(|v| v.is_finite()).map(|v| v.exp()).unwrap_or(0.0)
    }

    /// Radius `r` with `G_p(r) = level`.
    pub fn radius_at_level(&self, level: f64) -> Result<f64, GreenError> {
        self.ensure_kernel()?;
        let (lo, hi) = (if self.r0.is_finite() { 0.0 } else { self.min_level() }, self.max_level());
        if !(level > lo && level <= hi) {
            return Err(GreenError::LevelOutOfRange { level, lo, hi });
        }
        let target = level.ln();
        // Bracket on the sample grid.
        let idx = self.log_g.partition_point(|&lg| lg >= target);
        let i = idx.saturating_sub(1).min(self.radii.len() - 2);
        let (mut a, mut b) = (self.radii[i], self.radii[i + 1]);
        if self.log_g[i] == target {
            return Ok(a);
        }
        let mut r = match &self.inverse {
            Some(inv) if self.log_g[i + 1].is_finite() => inv.eval(-target).exp().clamp(a, b),
            _ => 0.5 * (a + b),
        };
        for _ in 0..100 {
            let lg = self.log_value(r)?;
            let phi = lg - target;
            if phi > 0.0 {
                a = r;
            } else {
                b = r;
            }
            if phi == 0.0 {
                return Ok(r);
            }
            // d log G / dr = -f / G.
            let slope = -(self.log_f(r) - lg).exp();
            let mut next = r - phi / slope;
            if !(next > a && next < b) || !next.is_finite() {
                next = 0.5 * (a + b);
            }
            if (next - r).abs() <= 4.0 * f64::EPSILON * r || (b - a) <= 4.0 * f64::EPSILON * b {
                return Ok(next);
            }
            r = next;
        }
        Ok(r)
    }

    /// `int_{G in [s,t]} |grad G|^p`, computed as `int_{r_t}^{r_s} |G'|^p v_h dr`.
    pub fn level_energy(&self, s: f64, t: f64) -> Result<f64, GreenError> {
        self.ensure_kernel()?;
        if s == t {
            self.radius_at_level(s)?;
            return Ok(0.0);
        }
        if !(s < t) {
            return Err(GreenError::LevelOutOfRange {
                level: s,
                lo: 0.0,
                hi: t,
            });
        }
        let r_s = self.radius_at_level(s)?;
        let r_t = self.radius_at_level(t)?;
        let p = self.p;
        // log(|G'|^p v_h) = p log f + log v_h.
        let log_density = |r: f64| p * self.log_f(r) + self.model.log_area(r);
        let (la, lb) = (r_t.ln(), r_s.ln());
        let shift = (log_density(r_t) + la).max(log_density(r_s) + lb);
        let g = |x: f64| (log_density(x.exp()) + x - shift).exp();
        let mut cuts = vec![la];
        cuts.extend(self.model.breakpoints().into_iter().filter(|&x| x > r_t && x < r_s).map(f64::ln));
        cuts.push(lb);
        let mut parts = Vec::new();
        for w in cuts.windows(2) {
            parts.push(self.integrator.integrate(g, w[0], w[1])?.value);
        }
        Ok(shift.exp() * neumaier_sum(parts))
    }
}

/// `w_p(r)` of the kernel with Dirichlet radius `r0`.
pub fn moser_core(model: &ModelManifold, p: f64, r0: f64, r: f64) -> Result<f64, GreenError> {
    green_radial(model, p, r0)?.moser_core(r)
}

/// Limit of `w_p(r)` as `p -> 1`: `log v_h(r)`, valid when `h` does not decrease past `r`.
pub fn core_limit(model: &ModelManifold, r: f64) -> Result<f64, GreenError> {
    model.sphere_area(r)?;
    if let Some(bad) = model.first_decrease(r, model.r_max()) {
        return Err(GreenError::DecreasingWarping { r: bad });
    }
    Ok(model.log_area(r))
}

/// Values of `w_p(r)` along a p-sequence and their extrapolation to `p = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreExtrapolation {
    pub ps: Vec<f64>,
    pub values: Vec<f64>,
    pub extrapolated: f64,
    pub limit: f64,
}

impl CoreExtrapolation {
    pub fn error(&self) -> f64 {
        (self.extrapolated - self.limit).abs()
    }

    /// `|w_p(r) - log v_h(r)|` per stage.
    pub fn gaps(&self) -> Vec<f64> {
        self.values.iter().map(|w| (w - self.limit).abs()).collect()
    }
}

/// Extrapolates `w_p(r)` to `p = 1` and compares with [`core_limit`].
///
/// Laplace's method gives `w_p = L - e log e + e log L' + O(e^2)` with
/// `L = log v_h(r)` and `e = p - 1`, so the fit
/// uses the basis `{1, e log e, e, e^2, ...}`; pure powers of `e` stall at the
/// `e log e` term.
pub fn extrapolate_core(model: &ModelManifold, r: f64, r0: f64, ps: &[f64]) -> Result<CoreExtrapolation, GreenError> {
    let limit = core_limit(model, r)?;
    let mut values = Vec::with_capacity(ps.len());
    for &p in ps {
        values.push(moser_core(model, p, r0, r)?);
    }
    let eps: Vec<f64> = ps.iter().map(|p| p - 1.0).collect();
    let extrapolated = extrapolate_log_corrected(&eps, &values);
    Ok(CoreExtrapolation {
        ps: ps.to_vec(),
        values,
        extrapolated,
        limit,
    })
}

/// Value at `e = 0` of the interpolant in the basis `{1, e log e, e, e^2, ...}`.
pub fn extrapolate_log_corrected(eps: &[f64], values: &[f64]) -> f64 {
    let m = eps.len();
    assert!(m >= 1 && values.len() == m);
    let basis = |e: f64, j: usize| -> f64 {
        match j {
            0 => 1.0,
            1 => e * e.ln(),
            _ => e.powi(j as i32 - 1),
        }
    };
    let mut a: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| basis(eps[i], j)).collect()).collect();
    let mut rhs = values.to_vec();
    solve_dense(&mut a, &mut rhs);
    rhs[0]
}

// Gaussian elimination with partial pivoting; the solution overwrites `b`.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col][k] * b[k];
        }
        b[col] = s / a[col][col];
    }
}

/// Worst relative deviations from `mu` on a radius grid near the pole.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleResiduals {
    pub value: f64,
    pub gradient: f64,
    /// Only for `p < n`.
    pub hessian: Option<f64>,
}

impl PoleResiduals {
    pub fn max(&self) -> f64 {
        self.value.max(self.gradient).max(self.hessian.unwrap_or(0.0))
    }
}

/// `max |G/mu - 1|`, `max |G'/mu' - 1|` and, for `p < n`, `max |G''/mu'' - 1|`.
pub fn check_pole_asymptotics(kernel: &RadialKernel, grid: &[f64]) -> Result<PoleResiduals, GreenError> {
    kernel.ensure_kernel()?;
    let limit = 0.1f64.min(kernel.outer_radius() / 10.0);
    if grid.is_empty() || grid.iter().any(|&r| !(r > 0.0 && r < limit)) {
        return Err(GreenError::InvalidGrid(format!("radii must lie in (0, {limit})")));
    }
    let n = kernel.model().n();
    let mu = ModelMu::new(n, kernel.p())?;
    let subcritical = kernel.p() < n as f64;
    let mut res = PoleResiduals {
        value: 0.0,
        gradient: 0.0,
        hessian: if subcritical { Some(0.0) } else { None },
    };
    for &r in grid {
        res.value = res.value.max((kernel.value(r)? / mu.value(r) - 1.0).abs());
        res.gradient = res.gradient.max((kernel.derivative(r)? / mu.derivative(r) - 1.0).abs());
        if let Some(h) = res.hessian.as_mut() {
            *h = h.max((kernel.second_derivative(r)? / mu.second_derivative(r) - 1.0).abs());
        }
    }
    Ok(res)
}

/// Fitted decay slope of `log G_p` against `log r` on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub expected: f64,
    pub b: f64,
}

impl DecayFit {
    pub fn relative_error(&self) -> f64 {
        (self.slope / self.expected - 1.0).abs()
    }
}

/// Least-squares slope of `log G_p(r)` on `[lo, hi]`, against `-(b - p)/(p - 1)`.
pub fn decay_exponent(model: &ModelManifold, p: f64, window: (f64, f64)) -> Result<DecayFit, GreenError> {
    let b = model.power_tail_exponent().ok_or(GreenError::NotPowerTail)?;
    if !(p < b) {
        return Err(GreenError::BorderlineExponent { p, b });
    }
    let (lo, hi) = window;
    let start = model.power_tail_start().unwrap_or(0.0);
    if !(lo >= start && hi > lo && hi.is_finite()) {
        return Err(GreenError::InvalidGrid(format!(
            "window ({lo}, {hi}) must lie in the power-law regime r >= {start}"
        )));
    }
    let kernel = green_radial(model, p, f64::INFINITY)?;
    let count = ((hi / lo).log10() * 16.0).ceil().max(8.0) as usize;
    let radii = log_grid(lo, hi, count);
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = radii.iter().map(|&r| kernel.log_value(r)).collect::<Result<_, _>>()?;
    Ok(DecayFit {
        slope: least_squares_slope(&xs, &ys),
        expected: -(b - p) / (p - 1.0),
        b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn euclid3() -> ModelManifold {
        ModelManifold::euclidean(3).with_quadrature_tol(1e-12).unwrap()
    }

    #[test]
    fn mu_examples() {
        assert!((mu(3, 2.0, 1.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((mu(2, 2.0, 0.5).unwrap() - 2f64.ln() / (2.0 * PI)).abs() < 1e-15);
        for &r in &[0.1, 1.0, 7.0] {
            let ratio = mu(3, 2.0, 2.0 * r).unwrap() / mu(3, 2.0, r).unwrap();
            assert!((ratio - 0.5).abs() < 1e-15);
        }
        assert!(mu(3, 3.5, 1.0).is_err());
        assert!(mu(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn mu_derivatives_match_finite_differences() {
        for &(n, p) in &[(3usize, 2.0), (2, 2.0), (4, 1.5)] {
            let m = ModelMu::new(n, p).unwrap();
            let r = 0.3;
            let h = 1e-5;
            let fd = (m.value(r + h) - m.value(r - h)) / (2.0 * h);
            assert!((fd / m.derivative(r) - 1.0).abs() < 1e-8);
            let fd2 = (m.derivative(r + h) - m.derivative(r - h)) / (2.0 * h);
            assert!((fd2 / m.second_derivative(r) - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn newtonian_kernel_equals_mu() {
        let k = green_radial(&euclid3(), 2.0, f64::INFINITY).unwrap();
        for &r in &[1e-3, 0.05, 1.0, 3.3, 500.0, 5e3] {
            let g = k.value(r).unwrap();
            assert!((g * 4.0 * PI * r - 1.0).abs() < 1e-11, "r = {r}");
        }
    }

    #[test]
    fn hyperbolic_plane_kernel_closed_form() {
        let m = ModelManifold::hyperbolic(2, 1.0).unwrap().with_quadrature_tol(1e-12).unwrap();
        let k = green_radial(&m, 2.0, f64::INFINITY).unwrap();
        for &r in &[0.01f64, 0.5, 2.0, 10.0] {
            let exact = (1.0 / (0.5f64 * r).tanh()).ln() / (2.0 * PI);
            assert!((k.value(r).unwrap() / exact - 1.0).abs() < 1e-10, "r = {r}");
        }
    }

    #[test]
    fn planar_kernel_is_parabolic() {
        let k = green_radial(&ModelManifold::euclidean(2), 2.0, f64::INFINITY).unwrap();
        assert!(k.is_parabolic());
        assert!(matches!(k.value(1.0), Err(GreenError::Parabolic { .. })));
        let pt = ModelManifold::power_tail(2, 0.5, 1.0).unwrap();
        assert!(green_radial(&pt, 1.5, f64::INFINITY).unwrap().is_parabolic());
        assert!(!green_radial(&pt, 1.25, f64::INFINITY).unwrap().is_parabolic());
    }

    #[test]
    fn finite_radius_kernel_vanishes_at_boundary() {
        let m = euclid3();
        let k = green_radial(&m, 2.0, 2.0).unwrap();
        assert_eq!(k.value(2.0).unwrap(), 0.0);
        let exact = (1.0 / 1.0 - 1.0 / 2.0) / (4.0 * PI);
        assert!((k.value(1.0).unwrap() / exact - 1.0).abs() < 1e-11);
        assert!(k.moser_core(2.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let m = ModelManifold::hyperbolic(3, 1.0).unwrap();
        let k = green_radial(&m, 1.7, f64::INFINITY).unwrap();
        for &r in &[0.01, 0.3, 2.0] {
            let h = 1e-4 * r;
            let fd = (k.value(r + h).unwrap() - k.value(r - h).unwrap()) / (2.0 * h);
            assert!((fd / k.derivative(r).unwrap() - 1.0).abs() < 1e-4);
            let fd2 = (k.derivative(r + h).unwrap() - k.derivative(r - h).unwrap()) / (2.0 * h);
            assert!((fd2 / k.second_derivative(r).unwrap() - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn moser_core_examples() {
        let m = euclid3();
        let w = moser_core(&m, 2.0, f64::INFINITY, 1.0).unwrap();
        assert!((w - (4.0 * PI).ln()).abs() < 1e-10);
        // Radius where the Newtonian kernel equals one.
        let r1 = 1.0 / (4.0 * PI);
        assert!(moser_core(&m, 2.0, f64::INFINITY, r1).unwrap().abs() < 1e-10);
        let pt = ModelManifold::power_tail(2, 0.5, 1.0).unwrap();
        assert!(moser_core(&pt, 1.25, f64::INFINITY, 2.0).unwrap().is_finite());
        assert!(moser_core(&pt, 1.5, f64::INFINITY, 2.0).is_err());
        assert!(moser_core(&ModelManifold::euclidean(2), 2.0, f64::INFINITY, 1.0).is_err());
        assert!(moser_core(&ModelManifold::euclidean(2), 1.5, f64::INFINITY, 1.0).unwrap().is_finite());
    }

    #[test]
    fn core_limit_examples() {
        assert!((core_limit(&ModelManifold::euclidean(2), 1.0).unwrap() - (2.0 * PI).ln()).abs() < 1e-15);
        assert!((core_limit(&ModelManifold::euclidean(3), 1.0).unwrap() - (4.0 * PI).ln()).abs() < 1e-15);
        let s = ModelManifold::spherical(2, 1.0, 3.0).unwrap();
        assert!(matches!(core_limit(&s, 1.0), Err(GreenError::DecreasingWarping { .. })));
    }

    #[test]
    fn extrapolation_recovers_core_limit() {
        let m = euclid3();
        let ex = extrapolate_core(&m, 1.0, f64::INFINITY, &[1.2, 1.1, 1.05, 1.02]).unwrap();
        assert!(ex.error() < 1e-2, "{ex:?}");
        let gaps = ex.gaps();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn log_corrected_extrapolation_is_exact_on_its_basis() {
        let f = |e: f64| 2.0 - e * e.ln() + 0.3 * e - 0.7 * e * e;
        let eps = [0.2, 0.1, 0.05, 0.02];
        let vals: Vec<f64> = eps.iter().map(|&e| f(e)).collect();
        assert!((extrapolate_log_corrected(&eps, &vals) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn level_energy_identity() {
        let k = green_radial(&euclid3(), 2.0, f64::INFINITY).unwrap();
        let e = k.level_energy(0.01, 0.02).unwrap();
        assert!((e / 0.01 - 1.0).abs() < 1e-9);
        assert_eq!(k.level_energy(0.05, 0.05).unwrap(), 0.0);
        let h = ModelManifold::hyperbolic(2, 1.0).unwrap();
        let k = green_radial(&h, 1.5, f64::INFINITY).unwrap();
        let e = k.level_energy(0.1, 0.3).unwrap();
        assert!((e / 0.2 - 1.0).abs() < 1e-8);
        assert!(k.level_energy(0.1, 1e9).is_err());
    }

    #[test]
    fn level_inversion_round_trips() {
        let m = ModelManifold::power_tail(3, 0.8, 1.0).unwrap();
        let k = green_radial(&m, 1.6, 5.0).unwrap();
        for &r in &[1e-3, 0.4, 0.75, 1.0, 3.0, 4.999] {
            let level = k.value(r).unwrap();
            let back = k.radius_at_level(level).unwrap();
            assert!((back / r - 1.0).abs() < 1e-10, "r = {r}, back = {back}");
        }
    }

    #[test]
    fn pole_asymptotics_euclidean_and_hyperbolic() {
        let k = green_radial(&euclid3(), 2.0, f64::INFINITY).unwrap();
        let grid = log_grid(1e-3, 0.09, 10);
        let res = check_pole_asymptotics(&k, &grid).unwrap();
        assert!(res.max() < 1e-10, "{res:?}");

        let h = ModelManifold::hyperbolic(3, 1.0).unwrap().with_quadrature_tol(1e-12).unwrap();
        let k = green_radial(&h, 2.0, f64::INFINITY).unwrap();
        let coarse = check_pole_asymptotics(&k, &log_grid(1e-3, 0.09, 10)).unwrap();
        let fine = check_pole_asymptotics(&k, &log_grid(1e-4, 0.009, 10)).unwrap();
        assert!(coarse.value / fine.value > 3.0);
        assert!(coarse.gradient / fine.gradient > 3.0);
        assert!(coarse.hessian.unwrap() / fine.hessian.unwrap() > 3.0);
        assert!(check_pole_asymptotics(&k, &[0.0, 0.01]).is_err());
    }

    #[test]
    fn decay_exponent_examples() {
        let pt = ModelManifold::power_tail(2, 0.5, 1.0).unwrap();
        let fit = decay_exponent(&pt, 1.25, (10.0, 1000.0)).unwrap();
        assert!(fit.relative_error() < 1e-6, "{fit:?}");
        let fit = decay_exponent(&pt, 1.1, (10.0, 1000.0)).unwrap();
        assert!((fit.slope + 4.0).abs() < 1e-5);
        let e = decay_exponent(&ModelManifold::euclidean(3), 2.0, (0.1, 10.0)).unwrap();
        assert!((e.slope + 1.0).abs() < 1e-8);
        assert!(decay_exponent(&pt, 1.5, (10.0, 100.0)).is_err());
    }
}
