//! Piecewise cubic Hermite interpolation on strictly increasing abscissae.

/// Locates `x` in the sorted slice: returns `i` with `xs[i] <= x <= xs[i + 1]`,
/// clamped to the first/last interval.
pub fn locate(xs: &[f64], x: f64) -> usize {
    debug_assert!(xs.len() >= 2);
    let last = xs.len() - 2;
    match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => i.min(last),
        Err(0) => 0,
        Err(i) => (i - 1).min(last),
    }
}

/// Cubic Hermite value and derivative on one interval.
fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let deriv = dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1;
    (value, deriv)
}

/// Cubic Hermite interpolant with prescribed nodal slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Hermite {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, ds: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len() && xs.len() == ds.len());
        Self { xs, ys, ds }
    }

    /// Slopes from the Fritsch-Carlson rule, which keeps monotone data monotone.
    pub fn monotone(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let ds = pchip_slopes(&xs, &ys);
        Self::new(xs, ys, ds)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.ds
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }

    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let i = locate(&self.xs, x);
        hermite(
            self.xs[i],
            self.xs[i + 1],
            self.ys[i],
            self.ys[i + 1],
            self.ds[i],
            self.ds[i + 1],
            x,
        )
    }

    /// Second derivative of the cubic on the interval containing `x`.
    pub fn second_derivative(&self, x: f64) -> f64 {
        let i = locate(&self.xs, x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1, d0, d1) = (self.ys[i], self.ys[i + 1], self.ds[i], self.ds[i + 1]);
        let a = (12.0 * t - 6.0) / (h * h);
        let b = (6.0 * t - 4.0) / h;
        let c = (6.0 - 12.0 * t) / (h * h);
        let d = (6.0 * t - 2.0) / h;
        a * y0 + b * d0 + c * y1 + d * d1
    }
}

/// Fritsch-Carlson slopes (the scheme used by PCHIP).
pub fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= 0.0 {
        0.0
    } else if del0 * del1 <= 0.0 && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Second-order finite-difference slopes on a nonuniform grid, one-sided at the ends.
pub fn centered_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert!(n >= 3);
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (hm, hp) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
        d[i] = (hm * hm * (ys[i + 1] - ys[i]) + hp * hp * (ys[i] - ys[i - 1])) / (hm * hp * (hm + hp));
    }
    d[0] = one_sided(xs[0], xs[1], xs[2], ys[0], ys[1], ys[2]);
    d[n - 1] = one_sided(xs[n - 1], xs[n - 2], xs[n - 3], ys[n - 1], ys[n - 2], ys[n - 3]);
    d
}

/// Clamps slopes `ds[from..]` so the Hermite interpolant is monotone on every interval
/// where the data are (Fritsch-Carlson limiter).
pub fn limit_monotone(xs: &[f64], ys: &[f64], ds: &mut [f64], from: usize) {
    for i in 0..xs.len() - 1 {
        let delta = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        let free = |j: usize| j >= from;
        if delta == 0.0 {
            for j in [i, i + 1] {
                if free(j) {
                    ds[j] = 0.0;
                }
            }
            continue;
        }
        for j in [i, i + 1] {
            if free(j) && ds[j] * delta < 0.0 {
                ds[j] = 0.0;
            }
        }
        let (a, b) = (ds[i] / delta, ds[i + 1] / delta);
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            for j in [i, i + 1] {
                if free(j) {
                    ds[j] *= tau;
                }
            }
        }
    }
}

// Derivative at x0 of the parabola through three points.
fn one_sided(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    let (h1, h2) = (x1 - x0, x2 - x0);
    let l0 = -(h1 + h2) / (h1 * h2);
    let l1 = h2 / (h1 * (h2 - h1));
    let l2 = -h1 / (h2 * (h2 - h1));
    l0 * y0 + l1 * y1 + l2 * y2
}
