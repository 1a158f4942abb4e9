//! Radial IMCF cores `u = (n-1) log h` on model manifolds, their gradient and growth
//! estimates, and the radial sub/supersolution margins.

use thiserror::Error;

use crate::model::{log_grid, unit_sphere_area, ModelError, ModelManifold};

#[derive(Debug, Error)]
pub enum ImcfError {
    #[error("radius {r} outside (0, {r_max})")]
    OutOfDomain { r: f64, r_max: f64 },
    #[error("warping function stops increasing at r = {0}")]
    NotIncreasing(f64),
    #[error("profile derivative is not positive at r = {0}")]
    NonPositiveDerivative(f64),
    #[error("level t = {t} outside the range of the core (sup {sup})")]
    LevelOutOfRange { t: f64, sup: f64 },
    #[error("hypothesis not certified: {0}")]
    NotCertified(String),
    #[error("no admissible C up to {0}")]
    NoAdmissibleC(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn check_grid(model: &ModelManifold, radii: &[f64]) -> Result<(), ImcfError> {
    if radii.is_empty() {
        return Err(ImcfError::InvalidParameter("empty radius grid".into()));
    }
    for &r in radii {
        if !(r > 0.0 && r < model.r_max()) {
            return Err(ImcfError::OutOfDomain { r, r_max: model.r_max() });
        }
    }
    Ok(())
}

/// `u(r) = log(v_h(r) / omega_{n-1}) = (n-1) log h(r)`.
pub fn imcf_core_model(model: &ModelManifold, r: f64) -> Result<f64, ImcfError> {
    check_grid(model, &[r])?;
    if let Some(x) = model.first_decrease(0.0, r) {
        return Err(ImcfError::NotIncreasing(x));
    }
    Ok((model.n() as f64 - 1.0) * model.log_h(r))
}

/// `u'(r) = (n-1) h'/h`, the mean curvature of the geodesic sphere.
pub fn imcf_core_derivative(model: &ModelManifold, r: f64) -> Result<f64, ImcfError> {
    check_grid(model, &[r])?;
    Ok(model.mean_curvature_unchecked(r))
}

/// Samples `(r, u, u')` of a radial flow.
#[derive(Debug, Clone)]
pub struct RadialFlow {
    pub model: ModelManifold,
    pub samples: Vec<[f64; 3]>,
    /// `u - (n-1) log r` shrinks toward 0 at the smallest radii.
    pub pole_normalized: bool,
}

impl RadialFlow {
    /// The exact core sampled on `radii` (increasing).
    pub fn core(model: &ModelManifold, radii: &[f64]) -> Result<Self, ImcfError> {
        check_grid(model, radii)?;
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ImcfError::InvalidParameter("radii must increase".into()));
        }
        let mut samples = Vec::with_capacity(radii.len());
        for &r in radii {
            let du = imcf_core_derivative(model, r)?;
            if !(du > 0.0) {
                return Err(ImcfError::NonPositiveDerivative(r));
            }
            samples.push([r, imcf_core_model(model, r)?, du]);
        }
        let k = model.n() as f64 - 1.0;
        let dev: Vec<f64> = samples.iter().take(3).map(|s| (s[1] - k * s[0].ln()).abs()).collect();
        let pole_normalized = dev.windows(2).all(|w| w[0] <= w[1]) && dev[0] < 1e-3;
        Ok(Self {
            model: model.clone(),
            samples,
            pole_normalized,
        })
    }
}

/// One row of a margin report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginRow {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub rows: Vec<MarginRow>,
    /// Radii where `|H - (n-1)/r| > 1`.
    pub curvature_violations: Vec<f64>,
}

impl MarginReport {
    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn max_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn curvature_violations(model: &ModelManifold, radii: &[f64]) -> Vec<f64> {
    let k = model.n() as f64 - 1.0;
    radii
        .iter()
        .copied()
        .filter(|&r| (model.mean_curvature_unchecked(r) - k / r).abs() > 1.0)
        .collect()
}

/// `|grad u| = (n-1) h'/h` against `(n-1) e^{-u/(n-1)} = (n-1)/h`; margin is `rhs - lhs`.
pub fn gradient_bound_check(model: &ModelManifold, radii: &[f64]) -> Result<MarginReport, ImcfError> {
    check_grid(model, radii)?;
    let k = model.n() as f64 - 1.0;
    let rows = radii
        .iter()
        .map(|&r| {
            let (h, dh, _) = model.warp(r);
            let lhs = k * dh / h;
            let rhs = k / h;
            MarginRow { r, lhs, rhs, margin: rhs - lhs }
        })
        .collect();
    Ok(MarginReport {
        rows,
        curvature_violations: Vec::new(),
    })
}

/// `H(r) - u'(r)` for a radial profile with derivative `du`; positive means strict subsolution.
pub fn subsolution_margin(model: &ModelManifold, du: impl Fn(f64) -> f64, radii: &[f64]) -> Result<MarginReport, ImcfError> {
    check_grid(model, radii)?;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let d = du(r);
        if !(d > 0.0) {
            return Err(ImcfError::NonPositiveDerivative(r));
        }
        let h = model.mean_curvature_unchecked(r);
        rows.push(MarginRow {
            r,
            lhs: h,
            rhs: d,
            margin: h - d,
        });
    }
    Ok(MarginReport {
        rows,
        curvature_violations: curvature_violations(model, radii),
    })
}

/// Default inner scale of the barrier profiles.
pub const BARRIER_RHO0: f64 = 1e-2;

/// Derivative of the lower barrier `(n-1) log r - r`.
pub fn lower_barrier_derivative(n: usize) -> impl Fn(f64) -> f64 {
    move |r| (n as f64 - 1.0) / r - 1.0
}

/// Derivative of the upper barrier `(n-1) log r + r + 1/(1 - r/rho0) - 1`, valid for `r < rho0`.
pub fn upper_barrier_derivative(n: usize, rho0: f64) -> impl Fn(f64) -> f64 {
    move |r| {
        let q = 1.0 - r / rho0;
        (n as f64 - 1.0) / r + 1.0 + 1.0 / (rho0 * q * q)
    }
}

/// `Delta_p w - |grad w|^p = |w'|^{p-2} [(p-1) w'' + H w' - w'^2]` for
/// `w = (n-p) log r + 1/(1 - C r)`; `lhs` holds the first two terms, `rhs` the last.
pub fn p_supersolution_margin(model: &ModelManifold, p: f64, c: f64, radii: &[f64]) -> Result<MarginReport, ImcfError> {
    check_grid(model, radii)?;
    let n = model.n() as f64;
    if !(p > 1.0 && p <= n) || !(c >= 0.0) {
        return Err(ImcfError::InvalidParameter(format!("need 1 < p <= n and C >= 0 (got p = {p}, C = {c})")));
    }
    let sup = radii.iter().copied().fold(0.0, f64::max);
    if c * sup >= 1.0 {
        return Err(ImcfError::InvalidParameter(format!("C sup r = {} must stay below 1", c * sup)));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let q = 1.0 - c * r;
        let dw = (n - p) / r + c / (q * q);
        let ddw = -(n - p) / (r * r) + 2.0 * c * c / (q * q * q);
        if !(dw > 0.0) {
            return Err(ImcfError::NonPositiveDerivative(r));
        }
        let scale = dw.powf(p - 2.0);
        let h = model.mean_curvature_unchecked(r);
        let lhs = scale * ((p - 1.0) * ddw + h * dw);
        let rhs = scale * dw * dw;
        rows.push(MarginRow {
            r,
            lhs,
            rhs,
            margin: lhs - rhs,
        });
    }
    Ok(MarginReport {
        rows,
        curvature_violations: curvature_violations(model, radii),
    })
}

/// Certified `C` with its margin report.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedC {
    pub c: u64,
    pub report: MarginReport,
}

/// Upper end of the search for `C`.
pub const MAX_C: u64 = 1 << 20;

/// Smallest integer `C <= 2^20` making [`p_supersolution_margin`] nonpositive on
/// `count` log-spaced radii of `(r_lo, min(r_hi, 1/(2C)))`.
pub fn find_c(model: &ModelManifold, p: f64, r_lo: f64, r_hi: f64, count: usize) -> Result<CertifiedC, ImcfError> {
    if !(r_lo > 0.0 && r_hi > r_lo) || count < 2 {
        return Err(ImcfError::InvalidParameter(format!("bad range ({r_lo}, {r_hi})")));
    }
    let attempt = |c: u64| -> Result<Option<MarginReport>, ImcfError> {
        let top = r_hi.min(0.5 / c as f64);
        if top <= r_lo {
            return Ok(None);
        }
        let rep = p_supersolution_margin(model, p, c as f64, &log_grid(r_lo, top, count))?;
        Ok((rep.max_margin() <= 0.0).then_some(rep))
    };
    let mut hi = 1;
    let mut found = None;
    while hi <= MAX_C {
        if let Some(rep) = attempt(hi)? {
            found = Some(rep);
            break;
        }
        hi *= 2;
    }
    let mut report = found.ok_or(ImcfError::NoAdmissibleC(MAX_C))?;
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match attempt(mid)? {
            Some(rep) => {
                hi = mid;
                report = rep;
            }
            None => lo = mid,
        }
    }
    Ok(CertifiedC { c: hi, report })
}

/// Which growth estimate to test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthFlavor {
    /// `u >= (n-1) log r - C(n, c_I)`.
    Isoperimetric,
    /// `u >= (b-1) log r - C` on `r >= 1`, under `Ric >= 0` and reverse doubling of order `b`.
    ReverseDoubling { b: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthGap {
    /// `sup_grid (k log r - u(r))`.
    pub constant: f64,
    /// Same supremum on the grid extended tenfold.
    pub extended: f64,
    /// The certified hypothesis constant (`c_I` or `C_R`) on the grid and on the extension.
    pub certificate: (f64, f64),
}

fn certified_stable(a: f64, b: f64) -> bool {
    a > 0.0 && b >= 0.99 * a
}

/// Empirical constant of the growth estimate, after checking the flavor's hypothesis on the grid.
pub fn growth_gap(model: &ModelManifold, flavor: GrowthFlavor, radii: &[f64]) -> Result<GrowthGap, ImcfError> {
    check_grid(model, radii)?;
    let top = radii[radii.len() - 1];
    if 10.0 * top >= model.r_max() {
        return Err(ImcfError::NotCertified(format!("model ends before 10 x {top}")));
    }
    let extended: Vec<f64> = radii.iter().copied().chain(log_grid(top, 10.0 * top, radii.len().max(8)).into_iter().skip(1)).collect();
    let n = model.n() as f64;
    let (k, certificate, lower) = match flavor {
        GrowthFlavor::Isoperimetric => {
            let a = model.diagnostics(radii)?.isoperimetric;
            let b = model.diagnostics(&extended)?.isoperimetric;
            if !certified_stable(a, b) {
                return Err(ImcfError::NotCertified(format!("ball isoperimetric ratio drifts from {a} to {b}")));
            }
            (n - 1.0, (a, b), 0.0)
        }
        GrowthFlavor::ReverseDoubling { b } => {
            if !(b > 1.0) {
                return Err(ImcfError::NotCertified(format!("reverse doubling order b = {b} must exceed 1")));
            }
            let tol = 1e-9;
            for &r in &extended {
                let (_, dh, ddh) = model.warp(r);
                if ddh > tol || dh.abs() > 1.0 + tol {
                    return Err(ImcfError::NotCertified(format!("Ric >= 0 fails at r = {r}")));
                }
            }
            let cr = |grid: &[f64]| -> Result<f64, ImcfError> {
                let vols = model.ball_volumes(grid)?;
                let mut c: f64 = 1.0;
                for j in 0..grid.len() {
                    for i in 0..j {
                        c = c.min(vols[j] / vols[i] / (grid[j] / grid[i]).powf(b));
                    }
                }
                Ok(c)
            };
            let (a, e) = (cr(radii)?, cr(&extended)?);
            if !certified_stable(a, e) {
                return Err(ImcfError::NotCertified(format!("reverse doubling constant drifts from {a} to {e}")));
            }
            (b - 1.0, (a, e), 1.0)
        }
    };
    let gap = |grid: &[f64]| -> Result<f64, ImcfError> {
        let mut sup = f64::NEG_INFINITY;
        for &r in grid.iter().filter(|&&r| r >= lower) {
            sup = sup.max(k * r.ln() - imcf_core_model(model, r)?);
        }
        Ok(sup)
    };
    let constant = gap(radii)?;
    if !constant.is_finite() {
        return Err(ImcfError::InvalidParameter("no grid radius in the estimate's range".into()));
    }
    Ok(GrowthGap {
        constant,
        extended: gap(&extended)?,
        certificate,
    })
}

/// `c_I` of `R^n`, the ratio `P(B)/|B|^{(n-1)/n}` of any ball.
pub fn euclidean_isoperimetric_constant(n: usize) -> f64 {
    let nf = n as f64;
    unit_sphere_area(n).powf(1.0 / nf) * nf.powf((nf - 1.0) / nf)
}

/// `C_1 = 1 + c_I^{-n/(n-1)} n (2 omega_{n-1})^{1/(n-1)} (1 + e^{n-1}) / (1 - e^{-1})`.
pub fn c1_constant(n: usize, c_i: f64) -> Result<f64, ImcfError> {
    if n < 2 || !(c_i > 0.0) {
        return Err(ImcfError::InvalidParameter(format!("need n >= 2 and c_I > 0 (got {n}, {c_i})")));
    }
    let nf = n as f64;
    let k = nf - 1.0;
    let e = std::f64::consts::E;
    Ok(1.0 + c_i.powf(-nf / k) * nf * (2.0 * unit_sphere_area(n)).powf(1.0 / k) * (1.0 + e.powf(k)) / (1.0 - 1.0 / e))
}

/// `D(t) = e^{-t/(n-1)} r_t` with `u(r_t) = t`.
pub fn diameter_ratio(model: &ModelManifold, t: f64) -> Result<f64, ImcfError> {
    let k = model.n() as f64 - 1.0;
    let u = |r: f64| k * model.log_h(r);
    let r_max = model.r_max();
    let mut hi = 1.0f64.min(0.5 * r_max);
    while u(hi) < t {
        let next = if r_max.is_finite() { 0.5 * (hi + r_max) } else { 2.0 * hi };
        if next == hi || hi > 1e150 || (r_max.is_finite() && r_max - next < 1e-12 * r_max) {
            return Err(ImcfError::LevelOutOfRange { t, sup: u(hi) });
        }
        hi = next;
    }
    let mut lo = hi;
    while u(lo) > t {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(ImcfError::LevelOutOfRange { t, sup: u(hi) });
        }
    }
    if let Some(x) = model.first_decrease(lo, hi) {
        return Err(ImcfError::NotIncreasing(x));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if u(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let r_t = 0.5 * (lo + hi);
    Ok((r_t.ln() - t / k).exp())
}

/// Smallest slack of `V(s1)^{1/n} <= V(s0)^{1/n} - c_I (s1 - s0) / (n (1 + e^{n-1}))`
/// over all sample pairs `s0 < s1`, which follows from `V' <= -c_I V^{(n-1)/n} / (1 + e^{n-1})`.
pub fn excess_decay_margin(n: usize, c_i: f64, s: &[f64], v: &[f64]) -> f64 {
    let nf = n as f64;
    let rate = c_i / (nf * (1.0 + (nf - 1.0).exp()));
    let mut worst = f64::INFINITY;
    for j in 0..s.len() {
        for i in 0..j {
            let slack = v[i].powf(1.0 / nf) - rate * (s[j] - s[i]) - v[j].powf(1.0 / nf);
            worst = worst.min(slack);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn core_examples() {
        let e2 = ModelManifold::euclidean(2);
        assert_eq!(imcf_core_model(&e2, 1.0).unwrap(), 0.0);
        let e3 = ModelManifold::euclidean(3);
        assert!((imcf_core_model(&e3, E).unwrap() - 2.0).abs() < 1e-15);
        let pt = ModelManifold::power_tail(2, 0.5, 1.0).unwrap();
        let c = pt.power_tail_coefficient().unwrap();
        assert!((imcf_core_model(&pt, 100.0).unwrap() - (c * 10.0).ln()).abs() < 1e-12);
        assert!((imcf_core_derivative(&pt, 100.0).unwrap() * 100.0 - 0.5).abs() < 1e-12);
        let sph = ModelManifold::spherical(3, 1.0, 3.0).unwrap();
        assert!(matches!(imcf_core_model(&sph, 2.0), Err(ImcfError::NotIncreasing(_))));
    }

    #[test]
    fn core_solves_smooth_imcf() {
        let grid = log_grid(1e-3, 5.0, 40);
        for m in [
            ModelManifold::euclidean(3),
            ModelManifold::hyperbolic(3, 0.7).unwrap(),
            ModelManifold::power_tail(2, 0.5, 1.0).unwrap(),
        ] {
            let du = |r: f64| imcf_core_derivative(&m, r).unwrap();
            let rep = subsolution_margin(&m, du, &grid).unwrap();
            assert!(rep.rows.iter().all(|row| row.margin.abs() < 1e-10));
            let flow = RadialFlow::core(&m, &grid).unwrap();
            assert!(flow.pole_normalized);
        }
    }

    #[test]
    fn gradient_margins() {
        let grid = log_grid(1e-2, 50.0, 30);
        let flat = gradient_bound_check(&ModelManifold::euclidean(4), &grid).unwrap();
        assert!(flat.rows.iter().all(|r| r.margin == 0.0));
        let pt = gradient_bound_check(&ModelManifold::power_tail(2, 0.5, 1.0).unwrap(), &grid).unwrap();
        assert!(pt.min_margin() >= 0.0);
        assert!(pt.rows.last().unwrap().margin > 0.0);
        let hyp = gradient_bound_check(&ModelManifold::hyperbolic(2, 1.0).unwrap(), &grid).unwrap();
        assert!(hyp.rows.iter().all(|r| r.margin < 0.0));
    }

    #[test]
    fn barrier_margins() {
        let grid = log_grid(1e-6, 0.5 * BARRIER_RHO0, 50);
        for m in [
            ModelManifold::euclidean(2),
            ModelManifold::euclidean(3),
            ModelManifold::hyperbolic(3, 1.0).unwrap(),
        ] {
            let n = m.n();
            let lower = subsolution_margin(&m, lower_barrier_derivative(n), &grid).unwrap();
            assert!(lower.min_margin() > 0.0);
            let upper = subsolution_margin(&m, upper_barrier_derivative(n, BARRIER_RHO0), &grid).unwrap();
            assert!(upper.max_margin() < 0.0);
        }
        let e3 = ModelManifold::euclidean(3);
        let lower = subsolution_margin(&e3, lower_barrier_derivative(3), &log_grid(0.01, 0.99, 10)).unwrap();
        assert!(lower.rows.iter().all(|r| (r.margin - 1.0).abs() < 1e-12));
        assert!(subsolution_margin(&e3, lower_barrier_derivative(3), &[3.0]).is_err());
    }

    #[test]
    fn p_supersolution_examples() {
        let e3 = ModelManifold::euclidean(3);
        let grid = log_grid(1e-3, 2.0, 20);
        let harmonic = p_supersolution_margin(&e3, 2.0, 0.0, &grid).unwrap();
        assert!(harmonic.rows.iter().all(|r| r.margin.abs() < 1e-9 * r.rhs.max(1.0)));
        let cert = find_c(&e3, 1.05, 1e-6, 1.0, 60).unwrap();
        assert!(cert.report.max_margin() <= 0.0);
        let sph = ModelManifold::spherical(3, 1.0, 3.1).unwrap();
        let near = p_supersolution_margin(&sph, 1.05, 0.1, &[3.0]).unwrap();
        assert_eq!(near.curvature_violations, vec![3.0]);
    }

    #[test]
    fn growth_gap_examples() {
        let grid = log_grid(1e-2, 10.0, 30);
        let flat = growth_gap(&ModelManifold::euclidean(2), GrowthFlavor::Isoperimetric, &grid).unwrap();
        assert!(flat.constant.abs() < 1e-12 && flat.extended.abs() < 1e-12);
        let pt = ModelManifold::power_tail(2, 0.5, 1.0).unwrap();
        let tail = growth_gap(&pt, GrowthFlavor::ReverseDoubling { b: 1.5 }, &log_grid(1.0, 100.0, 40)).unwrap();
        assert!(tail.constant.is_finite());
        assert!((tail.extended - tail.constant).abs() < 1e-9);
        assert!(growth_gap(&pt, GrowthFlavor::Isoperimetric, &log_grid(1.0, 100.0, 40)).is_err());
        let hyp = ModelManifold::hyperbolic(2, 1.0).unwrap();
        assert!(matches!(
            growth_gap(&hyp, GrowthFlavor::ReverseDoubling { b: 2.0 }, &grid),
            Err(ImcfError::NotCertified(_))
        ));
    }

    #[test]
    fn c1_values() {
        let c = c1_constant(2, 2.0 * PI.sqrt()).unwrap();
        let expected = 1.0 + 2.0 * (1.0 + E) / (1.0 - 1.0 / E);
        assert!((c - expected).abs() < 1e-12);
        assert!((c - 12.77).abs() < 0.01);
        assert!((c1_constant(3, 1e12).unwrap() - 1.0).abs() < 1e-10);
        let ci3 = euclidean_isoperimetric_constant(3);
        assert!((ci3 - 4.0 * PI / (4.0 * PI / 3.0).powf(2.0 / 3.0)).abs() < 1e-12);
        assert!((euclidean_isoperimetric_constant(2) - 2.0 * PI.sqrt()).abs() < 1e-12);
        let c3 = c1_constant(3, ci3).unwrap();
        assert!(c3.is_finite() && c3 > 1.0);
    }

    #[test]
    fn diameter_ratio_examples() {
        let e3 = ModelManifold::euclidean(3);
        for t in [-3.0, 0.0, 2.5, 10.0] {
            assert!((diameter_ratio(&e3, t).unwrap() - 1.0).abs() < 1e-12);
        }
        let c1 = c1_constant(3, euclidean_isoperimetric_constant(3)).unwrap();
        assert!(diameter_ratio(&e3, 1.0).unwrap() <= c1);
        let pt = ModelManifold::power_tail(2, 0.5, 1.0).unwrap();
        let (d1, d2) = (diameter_ratio(&pt, 5.0).unwrap(), diameter_ratio(&pt, 9.0).unwrap());
        // In the tail r_t = (e^t / c)^2, so D = e^{t} / c^2 grows like r_t^{1/2}.
        assert!((d2 / d1 - (4.0f64).exp()).abs() < 1e-6 * d2 / d1);
        let sph = ModelManifold::spherical(2, 1.0, 3.0).unwrap();
        assert!(matches!(diameter_ratio(&sph, 5.0), Err(ImcfError::LevelOutOfRange { .. })));
    }

    #[test]
    fn excess_ode_comparison() {
        let (n, ci) = (3usize, 2.0);
        let c = ci / (1.0 + E.powi(2));
        // Exact solution of V' = -c V^{2/3}: V^{1/3} = V0^{1/3} - c s / 3.
        let s: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
        let exact: Vec<f64> = s.iter().map(|&t| (2.0 - c * t / 3.0).powi(3)).collect();
        assert!(excess_decay_margin(n, ci, &s, &exact).abs() < 1e-12);
        let faster: Vec<f64> = s.iter().map(|&t| (2.0 - c * t / 2.0).powi(3)).collect();
        assert!(excess_decay_margin(n, ci, &s, &faster) >= 0.0);
        let slower: Vec<f64> = s.iter().map(|&t| (2.0 - c * t / 6.0).powi(3)).collect();
        assert!(excess_decay_margin(n, ci, &s, &slower) < 0.0);
    }
}
