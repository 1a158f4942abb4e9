//! Adaptive Gauss-Kronrod quadrature on finite and semi-infinite intervals.
//!
//! The finite rule is a globally adaptive G7/K15 scheme: the interval with the
//! largest error estimate is bisected until the summed estimate drops below the
//! requested tolerance. Semi-infinite integrals are mapped onto `(0, 1]` with
//! `s = a / u`, which turns algebraic tails `s^{-beta}` into `u^{beta - 2}`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {value:e}, error {error:e})")]
    NoConvergence {
        value: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand returned a non-finite value at x = {0:e}")]
    NonFinite(f64),
    #[error("invalid interval [{0:e}, {1:e}]")]
    InvalidInterval(f64, f64),
}

/// Result of a quadrature call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFinite(centre));
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (centre - dx, centre + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadratureError::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(QuadratureError::NonFinite(x2));
        }
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let raw_err = ((kronrod - gauss) * half).abs();
    // QUADPACK-style rescaling of the raw difference.
    let scale = (200.0 * raw_err / (abs_sum * half.abs()).max(f64::MIN_POSITIVE)).powf(1.5);
    let mut err = raw_err.min(abs_sum * half.abs() * scale.min(1.0));
    let floor = 50.0 * f64::EPSILON * abs_sum * half.abs();
    if err < floor {
        err = floor;
    }
    Ok((value, err))
}

/// Adaptive integrator with relative and absolute tolerances.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_subdivisions: 2000,
        }
    }
}

impl Integrator {
    pub fn new(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over `[a, b]`. Reversed bounds flip the sign.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate, QuadratureError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(QuadratureError::InvalidInterval(a, b));
        }
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }
        if b < a {
            let est = self.integrate(f, b, a)?;
            return Ok(Estimate {
                value: -est.value,
                ..est
            });
        }

        let (value, error) = kronrod15(&f, a, b)?;
        let mut evaluations = 15;
        let mut heap = BinaryHeap::new();
        heap.push(Segment { a, b, value, error });
        let mut total = value;
        let mut total_err = error;
        let mut subdivisions = 0;

        loop {
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= tol {
                break;
            }
            if subdivisions >= self.max_subdivisions {
                // Accept when remaining error is at roundoff level.
                if total_err <= 1e3 * f64::EPSILON * total.abs() {
                    break;
                }
                return Err(QuadratureError::NoConvergence {
                    value: total,
                    error: total_err,
                    subdivisions,
                });
            }
            let seg = heap.pop().expect("heap never empties");
            let mid = 0.5 * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b {
                // Interval below floating-point resolution; keep its estimate.
                heap.push(Segment { error: 0.0, ..seg });
                total_err -= seg.error;
                continue;
            }
            let (v1, e1) = kronrod15(&f, seg.a, mid)?;
            let (v2, e2) = kronrod15(&f, mid, seg.b)?;
            evaluations += 30;
            subdivisions += 1;
            total += v1 + v2 - seg.value;
            total_err += e1 + e2 - seg.error;
            heap.push(Segment {
                a: seg.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                a: mid,
                b: seg.b,
                value: v2,
                error: e2,
            });
        }

        // Re-sum from the leaves to shed the drift of incremental updates.
        let mut leaves: Vec<Segment> = heap.into_vec();
        leaves.sort_by(|x, y| x.a.total_cmp(&y.a));
        let value = neumaier_sum(leaves.iter().map(|s| s.value));
        let error = leaves.iter().map(|s| s.error).sum();
        Ok(Estimate {
            value,
            error,
            evaluations,
        })
    }

    /// Integrates `f` over `[a, +inf)` with `a > 0` via `s = a / u`.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(&self, f: F, a: f64) -> Result<Estimate, QuadratureError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(QuadratureError::InvalidInterval(a, f64::INFINITY));
        }
        let g = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let s = a / u;
            let v = f(s);
            if v == 0.0 {
                0.0
            } else {
                v * a / (u * u)
            }
        };
        self.integrate(g, 0.0, 1.0)
    }
}

/// Compensated summation (Neumaier's variant of Kahan).
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
