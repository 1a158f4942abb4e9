//! Radial p-capacities, the capacity of Green-kernel superlevel sets, and the
//! Sobolev-driven capacity and decay bounds.

use thiserror::Error;

use crate::constants::chat;
use crate::green::{green_radial, is_parabolic_at_infinity, log_flux_integral, log_flux_tail, GreenError, RadialKernel};
use crate::mesh::{BoundaryTag, Mesh, MeshError};
use crate::model::{log_grid, ModelError, ModelManifold};
use crate::quadrature::QuadratureError;
use crate::solver::{solve_condenser, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum CapacityError {
    #[error("invalid capacity spec: {0}")]
    InvalidSpec(String),
    #[error("need 0 < s < R <= r_max and p > 1 (got s = {s}, R = {r}, p = {p})")]
    InvalidCondenser { s: f64, r: f64, p: f64 },
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Capacity of `B_s` in `B_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCapacity {
    pub value: f64,
    /// The flux integral diverges (`R = inf` on a p-parabolic model); `value` is then 0.
    pub divergent: bool,
}

/// `cap_p(B_s, B_R) = (int_s^R v_h^{-1/(p-1)})^{1-p}`.
pub fn cap_radial(model: &ModelManifold, p: f64, s: f64, r: f64) -> Result<RadialCapacity, CapacityError> {
    if !(p > 1.0) || !(s > 0.0) || !(r > s) || r > model.r_max() {
        return Err(CapacityError::InvalidCondenser { s, r, p });
    }
    let integrator = model.integrator();
    let log_int = if r.is_infinite() {
        if is_parabolic_at_infinity(model, p) {
            return Ok(RadialCapacity {
                value: 0.0,
                divergent: true,
            });
        }
        log_flux_tail(model, p, &integrator, s)?
    } else {
        log_flux_integral(model, p, &integrator, s, r)?
    };
    Ok(RadialCapacity {
        value: ((1.0 - p) * log_int).exp(),
        divergent: false,
    })
}

/// Both sides of `cap_p({G >= l}, B_R0) = l^{1-p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapLevelCheck {
    pub level: f64,
    pub radius: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

pub fn verify_cap_level(model: &ModelManifold, p: f64, r0: f64, level: f64) -> Result<CapLevelCheck, CapacityError> {
    let kernel = green_radial(model, p, r0)?;
    verify_cap_level_with(&kernel, level)
}

/// [`verify_cap_level`] against an already built kernel.
pub fn verify_cap_level_with(kernel: &RadialKernel, level: f64) -> Result<CapLevelCheck, CapacityError> {
    let radius = kernel.radius_at_level(level)?;
    let lhs = cap_radial(kernel.model(), kernel.p(), radius, kernel.outer_radius())?.value;
    let rhs = level.powf(1.0 - kernel.p());
    Ok(CapLevelCheck {
        level,
        radius,
        lhs,
        rhs,
        rel_err: (lhs - rhs).abs() / rhs,
    })
}

/// Non-decreasing positive weight `eta` of the weighted Sobolev inequality.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Constant(f64),
    /// `(r, eta(r))` pairs, interpolated linearly and held constant outside the sampled range.
    Samples(Vec<[f64; 2]>),
}

impl Weight {
    /// `eta(r) = sup_{s <= r} s^nu / |B_s|`, sampled on `count` log-spaced radii up to `r_top`.
    pub fn from_model(model: &ModelManifold, nu: f64, r_top: f64, count: usize) -> Result<Self, CapacityError> {
        let n = model.n() as f64;
        if nu < n {
            return Err(CapacityError::InvalidSpec(format!("s^nu/|B_s| is unbounded near 0 for nu = {nu} < n = {n}")));
        }
        if !(r_top > 0.0) || r_top > model.r_max() || count < 2 {
            return Err(CapacityError::InvalidSpec(format!("cannot sample eta up to r = {r_top}")));
        }
        let radii = log_grid(r_top * 1e-6, r_top, count);
        let vols = model.ball_volumes(&radii)?;
        let mut best = f64::NEG_INFINITY;
        let samples = radii
            .iter()
            .zip(&vols)
            .map(|(&r, &v)| {
                best = best.max((nu * r.ln() - v.ln()).exp());
                [r, best]
            })
            .collect();
        Ok(Weight::Samples(samples))
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Weight::Constant(c) => *c,
            Weight::Samples(s) => {
                if r <= s[0][0] {
                    return s[0][1];
                }
                if r >= s[s.len() - 1][0] {
                    return s[s.len() - 1][1];
                }
                let xs: Vec<f64> = s.iter().map(|p| p[0]).collect();
                let i = crate::interp::locate(&xs, r);
                let t = (r - s[i][0]) / (s[i + 1][0] - s[i][0]);
                s[i][1] + t * (s[i + 1][1] - s[i][1])
            }
        }
    }

    pub fn validate(&self) -> Result<(), CapacityError> {
        match self {
            Weight::Constant(c) if *c > 0.0 && c.is_finite() => Ok(()),
            Weight::Constant(c) => Err(CapacityError::InvalidSpec(format!("weight {c} must be positive"))),
            Weight::Samples(s) => {
                if s.is_empty() {
                    return Err(CapacityError::InvalidSpec("weight has no samples".into()));
                }
                if s.iter().any(|p| !(p[0] >= 0.0 && p[1] > 0.0 && p[1].is_finite())) {
                    return Err(CapacityError::InvalidSpec("weight samples need r >= 0 and eta > 0".into()));
                }
                if let Some(w) = s.windows(2).find(|w| !(w[1][0] > w[0][0])) {
                    return Err(CapacityError::InvalidSpec(format!("sample radii not increasing at r = {}", w[1][0])));
                }
                if let Some(w) = s.windows(2).find(|w| w[1][1] < w[0][1]) {
                    return Err(CapacityError::InvalidSpec(format!("eta decreases at r = {}", w[1][0])));
                }
                Ok(())
            }
        }
    }
}

/// Condenser of a capacity problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Condenser {
    Radial { s: f64, r: f64 },
    Mesh { inner: BoundaryTag, outer: BoundaryTag },
}

/// Data of the weighted Sobolev inequality
/// `(int eta^{-p/(nu-p)} |psi|^{nu p/(nu-p)})^{(nu-p)/nu} <= S int |grad psi|^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitySpec {
    pub p: f64,
    pub condenser: Condenser,
    pub weight: Weight,
    pub nu: f64,
    pub sobolev: f64,
}

impl CapacitySpec {
    pub fn new(p: f64, nu: f64, sobolev: f64, weight: Weight) -> Result<Self, CapacityError> {
        let spec = Self {
            p,
            condenser: Condenser::Mesh {
                inner: BoundaryTag::Inner,
                outer: BoundaryTag::Outer,
            },
            weight,
            nu,
            sobolev,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_condenser(mut self, condenser: Condenser) -> Self {
        self.condenser = condenser;
        self
    }

    pub fn validate(&self) -> Result<(), CapacityError> {
        if !(self.p > 1.0 && self.p < self.nu) {
            return Err(CapacityError::InvalidSpec(format!("need 1 < p < nu (got p = {}, nu = {})", self.p, self.nu)));
        }
        if !(self.sobolev > 0.0 && self.sobolev.is_finite()) {
            return Err(CapacityError::InvalidSpec(format!("Sobolev constant {} must be positive", self.sobolev)));
        }
        self.weight.validate()
    }
}

/// `cap_p(B_t) >= S^{-1} eta(t)^{-p/nu} |B_t|^{(nu-p)/nu}`.
pub fn cap_lower_bound_sobolev(spec: &CapacitySpec, t: f64, ball_volume_at_t: f64) -> Result<f64, CapacityError> {
    spec.validate()?;
    if !(ball_volume_at_t > 0.0) {
        return Err(CapacityError::InvalidSpec(format!("ball volume {ball_volume_at_t} must be positive")));
    }
    let (p, nu) = (spec.p, spec.nu);
    let log = -spec.sobolev.ln() - (p / nu) * spec.weight.eval(t).ln() + ((nu - p) / nu) * ball_volume_at_t.ln();
    Ok(log.exp())
}

/// `inf_{dB_t} G <= Ĉ^{1/(p-1)} eta(2t)^{1/(p-1)} t^{-(nu-p)/(p-1)}`.
pub fn inf_decay_bound(spec: &CapacitySpec, t: f64) -> Result<f64, CapacityError> {
    spec.validate()?;
    if !(t > 0.0) {
        return Err(CapacityError::InvalidSpec(format!("radius t = {t} must be positive")));
    }
    let (p, nu) = (spec.p, spec.nu);
    let log = (chat(p, nu, spec.sobolev).ln() + spec.weight.eval(2.0 * t).ln() - (nu - p) * t.ln()) / (p - 1.0);
    Ok(log.exp())
}

/// Smallest `C` with `G(t) <= C^{1/(p-1)} eta(2t)^{1/(p-1)} t^{-(nu-p)/(p-1)}` on `radii`.
pub fn empirical_decay_constant(kernel: &RadialKernel, spec: &CapacitySpec, radii: &[f64]) -> Result<f64, CapacityError> {
    spec.validate()?;
    let (p, nu) = (spec.p, spec.nu);
    let mut worst = f64::NEG_INFINITY;
    for &t in radii {
        let lg = kernel.log_value(t)?;
        worst = worst.max((p - 1.0) * lg - spec.weight.eval(2.0 * t).ln() + (nu - p) * t.ln());
    }
    Ok(worst.exp())
}

/// Optimal constant `K` of `||u||_{np/(n-p)} <= K ||grad u||_p` on `R^n`, raised to the power `p`.
pub fn sharp_sobolev_constant(n: usize, p: f64) -> Result<f64, CapacityError> {
    let nf = n as f64;
    if !(p > 1.0 && p < nf) {
        return Err(CapacityError::InvalidSpec(format!("sharp constant needs 1 < p < n (got p = {p}, n = {n})")));
    }
    let g = libm::lgamma;
    let log_ratio = g(1.0 + nf / 2.0) + g(nf) - g(nf / p) - g(1.0 + nf - nf / p);
    let log_k = -0.5 * std::f64::consts::PI.ln() - nf.ln() / p + (1.0 - 1.0 / p) * ((p - 1.0) / (nf - p)).ln() + log_ratio / nf;
    Ok((p * log_k).exp())
}

/// Discrete capacity: unregularized p-energy of the minimizer with `psi = 1` on the inner
/// and `psi = 0` on the outer tag.
pub fn cap_variational(mesh: &Mesh, p: f64, spec: &CapacitySpec, config: &SolverConfig) -> Result<f64, CapacityError> {
    let (inner, outer) = match spec.condenser {
        Condenser::Mesh { inner, outer } => (inner, outer),
        Condenser::Radial { .. } => {
            return Err(CapacityError::InvalidSpec("variational capacity needs a mesh condenser".into()));
        }
    };
    Ok(solve_condenser(mesh, p, inner, outer, config)?.energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn flat_spec(p: f64, nu: f64, s: f64) -> CapacitySpec {
        CapacitySpec::new(p, nu, s, Weight::Constant(1.0)).unwrap()
    }

    #[test]
    fn euclidean_newtonian_capacities() {
        let m = ModelManifold::euclidean(3);
        let c = cap_radial(&m, 2.0, 1.0, 2.0).unwrap();
        assert!((c.value - 8.0 * PI).abs() < 1e-9 * 8.0 * PI);
        let inf = cap_radial(&m, 2.0, 1.0, f64::INFINITY).unwrap();
        assert!((inf.value - 4.0 * PI).abs() < 1e-9 * 4.0 * PI);
        assert!(!inf.divergent);
    }

    #[test]
    fn parabolic_capacity_is_flagged() {
        let m = ModelManifold::euclidean(2);
        let c = cap_radial(&m, 2.0, 1.0, f64::INFINITY).unwrap();
        assert!(c.divergent);
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn shrinking_condenser_blows_up() {
        let m = ModelManifold::hyperbolic(3, 1.0).unwrap();
        let mut prev = 0.0;
        for gap in [1e-1, 1e-2, 1e-3, 1e-4] {
            let c = cap_radial(&m, 1.5, 1.0, 1.0 + gap).unwrap().value;
            assert!(c > prev);
            prev = c;
        }
        assert!(cap_radial(&m, 1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn level_identity_newtonian() {
        let m = ModelManifold::euclidean(3);
        let a = verify_cap_level(&m, 2.0, f64::INFINITY, 1.0 / (4.0 * PI)).unwrap();
        assert!((a.lhs - 4.0 * PI).abs() < 1e-6 && (a.rhs - 4.0 * PI).abs() < 1e-12);
        let b = verify_cap_level(&m, 2.0, f64::INFINITY, 2.0).unwrap();
        assert!((b.rhs - 0.5).abs() < 1e-15);
        assert!(b.rel_err < 1e-8);
    }

    #[test]
    fn level_identity_hyperbolic() {
        let m = ModelManifold::hyperbolic(2, 1.0).unwrap();
        let k = green_radial(&m, 1.5, 1.0).unwrap();
        let (lo, hi) = (k.min_level(), k.max_level());
        for frac in [0.01, 0.3, 0.7] {
            let level = lo + frac * (hi - lo).min(10.0);
            let c = verify_cap_level_with(&k, level).unwrap();
            assert!(c.rel_err < 1e-3, "{c:?}");
        }
        assert!(verify_cap_level_with(&k, hi * 2.0 + 1e9).is_err());
    }

    #[test]
    fn sobolev_lower_bound_examples() {
        let spec = flat_spec(2.0, 3.0, 1.0);
        let t: f64 = 1.7;
        let b = cap_lower_bound_sobolev(&spec, t, 4.0 * PI * t.powi(3) / 3.0).unwrap();
        assert!((b - (4.0 * PI / 3.0).cbrt() * t).abs() < 1e-12);
        let s = flat_spec(1.5, 4.0, 2.5);
        assert!((cap_lower_bound_sobolev(&s, 3.0, 1.0).unwrap() - 0.4).abs() < 1e-15);
        let sharp = flat_spec(2.0, 3.0, sharp_sobolev_constant(3, 2.0).unwrap());
        let m = ModelManifold::euclidean(3);
        for t in [0.5, 1.0, 4.0] {
            let bound = cap_lower_bound_sobolev(&sharp, t, m.ball_volume(t).unwrap()).unwrap();
            let exact = cap_radial(&m, 2.0, t, f64::INFINITY).unwrap().value;
            assert!(bound <= exact);
        }
    }

    #[test]
    fn decay_bound_examples() {
        let spec = flat_spec(2.0, 3.0, 1.0);
        assert!((inf_decay_bound(&spec, 1.0).unwrap() - 2f64.powf(3.5)).abs() < 1e-12);
        let sharp = flat_spec(2.0, 3.0, sharp_sobolev_constant(3, 2.0).unwrap());
        let m = ModelManifold::euclidean(3);
        let k = green_radial(&m, 2.0, f64::INFINITY).unwrap();
        for t in log_grid(1e-2, 1e2, 25) {
            assert!(inf_decay_bound(&sharp, t).unwrap() >= k.value(t).unwrap());
        }
        let c = empirical_decay_constant(&k, &sharp, &log_grid(1e-2, 1e2, 25)).unwrap();
        assert!((c - 1.0 / (4.0 * PI)).abs() < 1e-8);
    }

    #[test]
    fn talenti_constant() {
        let s = sharp_sobolev_constant(3, 2.0).unwrap();
        // K(3, 2) = (3 pi)^{-1/2} (4 / sqrt(pi))^{1/3}.
        let k = 1.0 / (3.0 * PI).sqrt() * (4.0 / PI.sqrt()).cbrt();
        assert!((s - k * k).abs() < 1e-12);
        assert!((s - 0.1826).abs() < 1e-4);
    }

    #[test]
    fn model_weight_is_monotone() {
        let m = ModelManifold::hyperbolic(3, 1.0).unwrap();
        let w = Weight::from_model(&m, 3.0, 5.0, 80).unwrap();
        assert!(w.validate().is_ok());
        let flat = Weight::from_model(&ModelManifold::euclidean(3), 3.0, 5.0, 20).unwrap();
        assert!((flat.eval(2.0) - 3.0 / (4.0 * PI)).abs() < 1e-9);
        assert!(Weight::from_model(&m, 2.0, 5.0, 20).is_err());
        assert!(Weight::Samples(vec![[0.0, 2.0], [1.0, 1.0]]).validate().is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(CapacitySpec::new(3.0, 3.0, 1.0, Weight::Constant(1.0)).is_err());
        assert!(CapacitySpec::new(2.0, 3.0, 0.0, Weight::Constant(1.0)).is_err());
    }

    #[test]
    fn planar_annulus_capacity() {
        let mesh = Mesh::annulus(1.0, 2.0, 0.05).unwrap();
        let spec = flat_spec(2.0, 3.0, 1.0);
        let cap = cap_variational(&mesh, 2.0, &spec, &SolverConfig::default()).unwrap();
        let exact = 2.0 * PI / 2f64.ln();
        assert!((cap - exact).abs() < 0.02 * exact);
        let same = spec.clone().with_condenser(Condenser::Mesh {
            inner: BoundaryTag::Inner,
            outer: BoundaryTag::Inner,
        });
        assert!(cap_variational(&mesh, 2.0, &same, &SolverConfig::default()).is_err());
    }
}
