//! Rotationally symmetric model manifolds `dr^2 + h(r)^2 g_{S^{n-1}}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::{centered_slopes, limit_monotone, Hermite};
use crate::quadrature::{neumaier_sum, Integrator, QuadratureError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("radius {r} outside the model domain (0, {r_max}]")]
    OutOfDomain { r: f64, r_max: f64 },
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("warping table is not differentiable near r = {r}")]
    NonDifferentiable { r: f64 },
    #[error("radius grid needs at least 8 points, got {0}")]
    GridTooSmall(usize),
    #[error("radius grid must be positive and strictly increasing")]
    GridNotIncreasing,
    #[error("no grid radius r with 2r inside the domain")]
    NoDoublingPairs,
    #[error("volume quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),
}

/// Area of the unit sphere `S^{n-1}`, `2 pi^{n/2} / Gamma(n/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * PI.powf(half) / libm::tgamma(half)
}

/// Large-r growth of the sphere area, used for exact parabolicity tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailGrowth {
    /// `v_h(r) ~ r^beta` as `r -> inf`.
    Power(f64),
    /// `v_h` grows exponentially.
    Exponential,
    /// The model has a finite radius.
    Bounded,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PowerTail {
    alpha: f64,
    r0: f64,
    // Blend slope at r0 and the tail coefficient `h = c r^alpha` for r >= r0.
    m: f64,
    c: f64,
}

impl PowerTail {
    fn new(alpha: f64, r0: f64) -> Self {
        let m = 5.0 * alpha / (6.0 - alpha);
        let half = 0.5 * r0;
        let h_r0 = half * (2.0 + (m - 1.0) / 3.0);
        let c = h_r0 / r0.powf(alpha);
        Self { alpha, r0, m, c }
    }

    fn eval(&self, r: f64) -> (f64, f64, f64) {
        let a = 0.5 * self.r0;
        if r <= a {
            (r, 1.0, 0.0)
        } else if r < self.r0 {
            // h' = 1 + (m - 1) t^2 on the blend; monotone between 1 and m.
            let t = (r - a) / a;
            let k = self.m - 1.0;
            (a + a * (t + k * t * t * t / 3.0), 1.0 + k * t * t, 2.0 * k * t / a)
        } else {
            let hv = self.c * r.powf(self.alpha);
            (hv, self.alpha * hv / r, self.alpha * (self.alpha - 1.0) * hv / (r * r))
        }
    }

    pub(crate) fn tail_coefficient(&self) -> f64 {
        self.c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct WarpTable {
    spline: Hermite,
    // Nodes where the one-sided slopes jump.
    kinks: Vec<usize>,
}

impl WarpTable {
    fn new(samples: &[[f64; 2]]) -> Result<Self, ModelError> {
        let mut xs = Vec::with_capacity(samples.len() + 1);
        let mut ys = Vec::with_capacity(samples.len() + 1);
        if samples.first().map(|s| s[0] > 0.0).unwrap_or(false) {
            xs.push(0.0);
            ys.push(0.0);
        }
        for s in samples {
            xs.push(s[0]);
            ys.push(s[1]);
        }
        if xs.len() < 3 {
            return Err(ModelError::InvalidParameter("warping table needs at least two samples".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidParameter("warping table radii must be finite and strictly increasing".into()));
        }
        if xs[0] != 0.0 || ys[0] != 0.0 {
            return Err(ModelError::InvalidParameter("warping table must start at r > 0 or at (0, 0)".into()));
        }
        if ys[1..].iter().any(|&v| v <= 0.0) {
            return Err(ModelError::InvalidParameter("warping table values must be positive for r > 0".into()));
        }
        let mut ds = centered_slopes(&xs, &ys);
        ds[0] = 1.0;
        if ys.windows(2).all(|w| w[1] >= w[0]) {
            // Keeps a non-decreasing table non-decreasing between its samples.
            limit_monotone(&xs, &ys, &mut ds, 1);
        }
        let kinks = find_kinks(&xs, &ys);
        Ok(Self {
            spline: Hermite::new(xs, ys, ds),
            kinks,
        })
    }

    fn eval(&self, r: f64) -> (f64, f64, f64) {
        let (v, d) = self.spline.eval_with_derivative(r);
        (v, d, self.spline.second_derivative(r))
    }

    fn check_smooth(&self, r: f64) -> Result<(), ModelError> {
        let xs = self.spline.xs();
        for &k in &self.kinks {
            if r >= xs[k - 1] && r <= xs[k + 1] {
                return Err(ModelError::NonDifferentiable { r: xs[k] });
            }
        }
        Ok(())
    }

    fn nodes(&self) -> &[f64] {
        self.spline.xs()
    }
}

// A node is a kink when its second divided difference dwarfs both neighbours'.
fn find_kinks(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let n = xs.len();
    let slopes: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
    let scale = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs())).max(f64::MIN_POSITIVE);
    let span = xs[n - 1] - xs[0];
    let d2: Vec<f64> = (1..n - 1)
        .map(|i| 2.0 * (slopes[i] - slopes[i - 1]) / (xs[i + 1] - xs[i - 1]))
        .collect();
    let floor = 1e-6 * scale / span;
    let mut kinks = Vec::new();
    for j in 0..d2.len() {
        let left = if j > 0 { d2[j - 1].abs() } else { 0.0 };
        let right = if j + 1 < d2.len() { d2[j + 1].abs() } else { 0.0 };
        let jump = (slopes[j + 1] - slopes[j]).abs();
        if d2[j].abs() > floor && d2[j].abs() > 20.0 * left.max(right) && jump > 1e-3 * scale {
            kinks.push(j + 1);
        }
    }
    kinks
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Warping {
    Euclidean,
    Hyperbolic { kappa: f64 },
    Spherical { kappa: f64 },
    PowerTail(PowerTail),
    Table(WarpTable),
}

/// Warped-product model manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelManifold {
    n: usize,
    warping: Warping,
    r_max: f64,
    quadrature_tol: f64,
    omega: f64,
    spec: ModelSpec,
}

/// Serializable model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
    #[serde(default = "infinite", with = "radius_serde")]
    pub r_max: f64,
    #[serde(default = "default_tol")]
    pub quadrature_tol: f64,
}

fn infinite() -> f64 {
    f64::INFINITY
}

fn default_tol() -> f64 {
    1e-10
}

mod radius_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Radius {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(r: &f64, s: S) -> Result<S::Ok, S::Error> {
        if r.is_finite() {
            s.serialize_f64(*r)
        } else {
            s.serialize_str("inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Option::<Radius>::deserialize(d)? {
            None => Ok(f64::INFINITY),
            Some(Radius::Number(v)) => Ok(v),
            Some(Radius::Text(t)) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                other => other
                    .parse::<f64>()
                    .map_err(|_| serde::de::Error::custom(format!("invalid radius '{t}'"))),
            },
        }
    }
}

impl ModelManifold {
    pub fn euclidean(n: usize) -> Self {
        Self::from_spec(&ModelSpec::new("euclidean", n)).expect("euclidean model is always valid")
    }

    pub fn hyperbolic(n: usize, kappa: f64) -> Result<Self, ModelError> {
        Self::from_spec(&ModelSpec {
            kappa: Some(kappa),
            ..ModelSpec::new("hyperbolic", n)
        })
    }

    /// Round sphere of curvature `kappa^2`, truncated at `r_max < pi / kappa`.
    pub fn spherical(n: usize, kappa: f64, r_max: f64) -> Result<Self, ModelError> {
        Self::from_spec(&ModelSpec {
            kappa: Some(kappa),
            r_max,
            ..ModelSpec::new("spherical", n)
        })
    }

    pub fn power_tail(n: usize, alpha: f64, r0: f64) -> Result<Self, ModelError> {
        Self::from_spec(&ModelSpec {
            alpha: Some(alpha),
            r0: Some(r0),
            ..ModelSpec::new("power_tail", n)
        })
    }

    /// Model from `(r, h)` samples; the domain ends at the last sample.
    pub fn table(n: usize, samples: Vec<[f64; 2]>) -> Result<Self, ModelError> {
        let r_max = samples.last().map(|s| s[0]).unwrap_or(0.0);
        Self::from_spec(&ModelSpec {
            samples: Some(samples),
            r_max,
            ..ModelSpec::new("table", n)
        })
    }

    pub fn with_quadrature_tol(mut self, tol: f64) -> Result<Self, ModelError> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(ModelError::InvalidParameter(format!("quadrature_tol must lie in (0, 1), got {tol}")));
        }
        self.quadrature_tol = tol;
        self.spec.quadrature_tol = tol;
        Ok(self)
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self, ModelError> {
        let n = spec.n;
        if n < 2 {
            return Err(ModelError::InvalidParameter(format!("dimension must be at least 2, got {n}")));
        }
        if !(spec.quadrature_tol > 0.0 && spec.quadrature_tol < 1.0) {
            return Err(ModelError::InvalidParameter(format!(
                "quadrature_tol must lie in (0, 1), got {}",
                spec.quadrature_tol
            )));
        }
        if !(spec.r_max > 0.0) {
            return Err(ModelError::InvalidParameter(format!("r_max must be positive, got {}", spec.r_max)));
        }
        let positive = |name: &str, v: Option<f64>| -> Result<f64, ModelError> {
            match v {
                Some(x) if x > 0.0 && x.is_finite() => Ok(x),
                Some(x) => Err(ModelError::InvalidParameter(format!("{name} must be positive and finite, got {x}"))),
                None => Err(ModelError::InvalidParameter(format!("{} model requires '{name}'", spec.kind))),
            }
        };
        let mut r_max = spec.r_max;
        let warping = match spec.kind.as_str() {
            "euclidean" => Warping::Euclidean,
            "hyperbolic" => Warping::Hyperbolic {
                kappa: positive("kappa", spec.kappa)?,
            },
            "spherical" => {
                let kappa = positive("kappa", spec.kappa)?;
                if !(r_max < PI / kappa) {
                    return Err(ModelError::InvalidParameter(format!(
                        "spherical model needs r_max < pi/kappa = {}, got {r_max}",
                        PI / kappa
                    )));
                }
                Warping::Spherical { kappa }
            }
            "power_tail" => {
                let alpha = positive("alpha", spec.alpha)?;
                let r0 = positive("r0", spec.r0)?;
                if alpha >= 6.0 {
                    return Err(ModelError::InvalidParameter(format!("power-tail exponent must be below 6, got {alpha}")));
                }
                Warping::PowerTail(PowerTail::new(alpha, r0))
            }
            "table" => {
                let samples = spec
                    .samples
                    .as_ref()
                    .ok_or_else(|| ModelError::InvalidParameter("table model requires 'samples'".into()))?;
                let table = WarpTable::new(samples)?;
                let last = *table.nodes().last().unwrap();
                if r_max > last {
                    r_max = last;
                }
                Warping::Table(table)
            }
            other => return Err(ModelError::InvalidParameter(format!("unknown model kind '{other}'"))),
        };
        let mut spec = spec.clone();
        spec.r_max = r_max;
        Ok(Self {
            n,
            warping,
            r_max,
            quadrature_tol: spec.quadrature_tol,
            omega: unit_sphere_area(n),
            spec,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn quadrature_tol(&self) -> f64 {
        self.quadrature_tol
    }

    /// `omega_{n-1}`, area of the unit sphere.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub(crate) fn integrator(&self) -> Integrator {
        Integrator::new(self.quadrature_tol)
    }

    /// Short human-readable identifier, e.g. `hyperbolic(kappa=1)`.
    pub fn label(&self) -> String {
        match &self.warping {
            Warping::Euclidean => "euclidean".into(),
            Warping::Hyperbolic { kappa } => format!("hyperbolic(kappa={kappa})"),
            Warping::Spherical { kappa } => format!("spherical(kappa={kappa})"),
            Warping::PowerTail(pt) => format!("power_tail(alpha={},r0={})", pt.alpha, pt.r0),
            Warping::Table(t) => format!("table({} nodes)", t.nodes().len()),
        }
    }

    /// Tail coefficient `c` of a power-tail model (`h = c r^alpha` for `r >= r0`).
    pub fn power_tail_coefficient(&self) -> Option<f64> {
        match &self.warping {
            Warping::PowerTail(pt) => Some(pt.tail_coefficient()),
            _ => None,
        }
    }

    /// Radius beyond which a power-tail model is exactly `c r^alpha`.
    pub fn power_tail_start(&self) -> Option<f64> {
        match &self.warping {
            Warping::PowerTail(pt) => Some(pt.r0),
            _ => None,
        }
    }

    /// Reverse-doubling exponent `1 + alpha (n - 1)` of a power-tail model.
    pub fn power_tail_exponent(&self) -> Option<f64> {
        match &self.warping {
            Warping::PowerTail(pt) => Some(1.0 + pt.alpha * (self.n as f64 - 1.0)),
            Warping::Euclidean => Some(self.n as f64),
            _ => None,
        }
    }

    pub fn tail_growth(&self) -> TailGrowth {
        if self.r_max.is_finite() {
            return TailGrowth::Bounded;
        }
        let k = self.n as f64 - 1.0;
        match &self.warping {
            Warping::Euclidean => TailGrowth::Power(k),
            Warping::PowerTail(pt) => TailGrowth::Power(pt.alpha * k),
            Warping::Hyperbolic { .. } => TailGrowth::Exponential,
            Warping::Spherical { .. } | Warping::Table(_) => TailGrowth::Bounded,
        }
    }

    /// `(r1, beta)` when `v_h(r) = v_h(r1) (r / r1)^beta` holds exactly for all `r >= r1`.
    pub(crate) fn power_end(&self) -> Option<(f64, f64)> {
        if self.r_max.is_finite() {
            return None;
        }
        let k = self.n as f64 - 1.0;
        match &self.warping {
            Warping::Euclidean => Some((0.0, k)),
            Warping::PowerTail(pt) => Some((pt.r0, pt.alpha * k)),
            _ => None,
        }
    }

    /// Points where the warping is only piecewise smooth; quadratures split there.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        match &self.warping {
            Warping::PowerTail(pt) => vec![0.5 * pt.r0, pt.r0],
            Warping::Table(t) => t.nodes()[1..].to_vec(),
            _ => Vec::new(),
        }
    }

    fn check_radius(&self, r: f64) -> Result<(), ModelError> {
        if r > 0.0 && r.is_finite() && r <= self.r_max {
            Ok(())
        } else {
            Err(ModelError::OutOfDomain { r, r_max: self.r_max })
        }
    }

    /// `(h, h', h'')` without domain checks.
    pub(crate) fn warp(&self, r: f64) -> (f64, f64, f64) {
        match &self.warping {
            Warping::Euclidean => (r, 1.0, 0.0),
            Warping::Hyperbolic { kappa } => {
                let s = (kappa * r).sinh() / kappa;
                (s, (kappa * r).cosh(), kappa * kappa * s)
            }
            Warping::Spherical { kappa } => {
                let s = (kappa * r).sin() / kappa;
                (s, (kappa * r).cos(), -kappa * kappa * s)
            }
            Warping::PowerTail(pt) => pt.eval(r),
            Warping::Table(t) => t.eval(r),
        }
    }

    /// `log h(r)`, stable for large hyperbolic radii.
    pub(crate) fn log_h(&self, r: f64) -> f64 {
        match &self.warping {
            Warping::Euclidean => r.ln(),
            Warping::Hyperbolic { kappa } => {
                let x = kappa * r;
                x + (-(-2.0 * x).exp_m1()).ln() - 2f64.ln() - kappa.ln()
            }
            Warping::PowerTail(pt) if r >= pt.r0 => pt.c.ln() + pt.alpha * r.ln(),
            _ => self.warp(r).0.ln(),
        }
    }

    /// `log v_h(r)`.
    pub(crate) fn log_area(&self, r: f64) -> f64 {
        self.omega.ln() + (self.n as f64 - 1.0) * self.log_h(r)
    }

    /// `v_h(r)` without domain checks.
    pub(crate) fn area(&self, r: f64) -> f64 {
        let h = self.warp(r).0;
        self.omega * h.powi(self.n as i32 - 1)
    }

    /// `(n-1) h'/h` without domain checks.
    pub(crate) fn mean_curvature_unchecked(&self, r: f64) -> f64 {
        let k = self.n as f64 - 1.0;
        match &self.warping {
            Warping::Euclidean => k / r,
            Warping::Hyperbolic { kappa } => k * kappa / (kappa * r).tanh(),
            Warping::Spherical { kappa } => k * kappa / (kappa * r).tan(),
            _ => {
                let (h, dh, _) = self.warp(r);
                k * dh / h
            }
        }
    }

    pub fn warping_function(&self, r: f64) -> Result<f64, ModelError> {
        self.check_radius(r)?;
        Ok(self.warp(r).0)
    }

    /// `h'(r)`; fails near kinks of a sample table.
    pub fn warping_derivative(&self, r: f64) -> Result<f64, ModelError> {
        self.check_radius(r)?;
        if let Warping::Table(t) = &self.warping {
            t.check_smooth(r)?;
        }
        Ok(self.warp(r).1)
    }

    /// `h''(r)`; one-sided at the blend endpoints of a power-tail model.
    pub fn warping_second_derivative(&self, r: f64) -> Result<f64, ModelError> {
        self.check_radius(r)?;
        if let Warping::Table(t) = &self.warping {
            t.check_smooth(r)?;
        }
        Ok(self.warp(r).2)
    }

    /// Geodesic sphere area `v_h(r) = omega_{n-1} h(r)^{n-1}`.
    pub fn sphere_area(&self, r: f64) -> Result<f64, ModelError> {
        self.check_radius(r)?;
        Ok(self.area(r))
    }

    /// Mean curvature `(n-1) h'(r)/h(r)` of the geodesic sphere.
    pub fn mean_curvature_sphere(&self, r: f64) -> Result<f64, ModelError> {
        self.check_radius(r)?;
        if let Warping::Table(t) = &self.warping {
            t.check_smooth(r)?;
        }
        Ok(self.mean_curvature_unchecked(r))
    }

    /// Integral of `f` over `[a, b]`, split at the warping breakpoints.
    pub(crate) fn integrate_split<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64, QuadratureError> {
        let q = self.integrator();
        let mut cuts = vec![a];
        cuts.extend(self.breakpoints().into_iter().filter(|&x| x > a && x < b));
        cuts.push(b);
        let parts: Result<Vec<f64>, QuadratureError> =
            cuts.windows(2).map(|w| q.integrate(&f, w[0], w[1]).map(|e| e.value)).collect();
        Ok(neumaier_sum(parts?))
    }

    /// `|B_r| = int_0^r v_h`.
    pub fn ball_volume(&self, r: f64) -> Result<f64, ModelError> {
        self.check_radius(r)?;
        if let Warping::Euclidean = self.warping {
            return Ok(self.omega * r.powi(self.n as i32) / self.n as f64);
        }
        Ok(self.integrate_split(|s| self.area(s), 0.0, r)?)
    }

    /// Ball volumes at every radius of an increasing grid, accumulated interval by interval.
    pub fn ball_volumes(&self, radii: &[f64]) -> Result<Vec<f64>, ModelError> {
        let mut out = Vec::with_capacity(radii.len());
        let mut prev = 0.0;
        let mut acc = Vec::new();
        for &r in radii {
            self.check_radius(r)?;
            if r < prev {
                return Err(ModelError::GridNotIncreasing);
            }
            if let Warping::Euclidean = self.warping {
                out.push(self.omega * r.powi(self.n as i32) / self.n as f64);
                continue;
            }
            acc.push(self.integrate_split(|s| self.area(s), prev, r)?);
            out.push(neumaier_sum(acc.iter().copied()));
            prev = r;
        }
        Ok(out)
    }

    /// First radius in `[a, b]` where `h` decreases, if any.
    pub fn first_decrease(&self, a: f64, b: f64) -> Option<f64> {
        match &self.warping {
            Warping::Euclidean | Warping::Hyperbolic { .. } | Warping::PowerTail(_) => None,
            Warping::Spherical { kappa } => {
                let crest = 0.5 * PI / kappa;
                if b > crest {
                    Some(crest.max(a))
                } else {
                    None
                }
            }
            Warping::Table(t) => {
                let mut probes: Vec<f64> = t.nodes().iter().copied().filter(|&x| x >= a && x <= b).collect();
                let m = 512;
                probes.extend((0..=m).map(|k| a + (b - a) * k as f64 / m as f64));
                probes.sort_by(f64::total_cmp);
                probes.into_iter().find(|&x| self.warp(x).1 < 0.0)
            }
        }
    }

    /// Doubling, reverse-doubling and isoperimetric constants on a radius grid.
    pub fn diagnostics(&self, grid: &[f64]) -> Result<GeometryDiagnostics, ModelError> {
        if grid.len() < 8 {
            return Err(ModelError::GridTooSmall(grid.len()));
        }
        if grid[0] <= 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ModelError::GridNotIncreasing);
        }
        let vols = self.ball_volumes(grid)?;

        let mut doubling: f64 = 0.0;
        let mut pairs = 0;
        for (&r, &v) in grid.iter().zip(&vols) {
            let r2 = 2.0 * r;
            if r2 > self.r_max {
                continue;
            }
            let v2 = v + self.integrate_split(|s| self.area(s), r, r2)?;
            doubling = doubling.max(v2 / v);
            pairs += 1;
        }
        if pairs == 0 {
            return Err(ModelError::NoDoublingPairs);
        }

        let xs: Vec<f64> = grid.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = vols.iter().map(|v| v.ln()).collect();
        let b = least_squares_slope(&xs, &ys);

        let mut c_r: f64 = 1.0;
        for j in 0..grid.len() {
            for i in 0..j {
                let lhs = (ys[j] - ys[i]) - b * (xs[j] - xs[i]);
                c_r = c_r.min(lhs.exp());
            }
        }

        let k = self.n as f64 - 1.0;
        let iso = grid
            .iter()
            .zip(&vols)
            .map(|(&r, &v)| self.area(r) / v.powf(k / self.n as f64))
            .fold(f64::INFINITY, f64::min);

        Ok(GeometryDiagnostics {
            doubling_constant: doubling,
            doubling_dimension: doubling.log2(),
            reverse_doubling_exponent: b,
            reverse_doubling_constant: c_r,
            isoperimetric: iso,
            grid: grid.to_vec(),
            volumes: vols,
        })
    }
}

impl ModelSpec {
    pub fn new(kind: &str, n: usize) -> Self {
        Self {
            kind: kind.to_string(),
            n,
            kappa: None,
            alpha: None,
            r0: None,
            samples: None,
            r_max: f64::INFINITY,
            quadrature_tol: default_tol(),
        }
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Volume-growth constants measured on a radius grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryDiagnostics {
    /// `C_D = sup |B_{2r}| / |B_r|`.
    pub doubling_constant: f64,
    /// `nu = log2 C_D`.
    pub doubling_dimension: f64,
    /// Fitted `b` in `|B_t|/|B_s| >= C_R (t/s)^b`.
    pub reverse_doubling_exponent: f64,
    /// Worst-pair `C_R` for the fitted `b`.
    pub reverse_doubling_constant: f64,
    /// `c_I = inf P / |E|^{(n-1)/n}` over the balls of the grid.
    pub isoperimetric: f64,
    pub grid: Vec<f64>,
    pub volumes: Vec<f64>,
}

impl GeometryDiagnostics {
    /// Whether `(b, C_R)` satisfy the reverse-doubling inequality on every grid pair.
    pub fn reverse_doubling_holds(&self) -> bool {
        let (b, c) = (self.reverse_doubling_exponent, self.reverse_doubling_constant);
        for j in 0..self.grid.len() {
            for i in 0..=j {
                let ratio = self.volumes[j] / self.volumes[i];
                let bound = c * (self.grid[j] / self.grid[i]).powf(b);
                if ratio < bound * (1.0 - 1e-12) {
                    return false;
                }
            }
        }
        true
    }
}

/// `count` log-spaced points from `a` to `b` inclusive.
pub fn log_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && a > 0.0 && b > a);
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|i| {
            if i == count - 1 {
                b
            } else {
                (la + (lb - la) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}
