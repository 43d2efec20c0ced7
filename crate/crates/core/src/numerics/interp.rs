//! Interpolation: monotone piecewise-cubic maps and their inverses, local
//! cubic interpolation of uniformly sampled fields, and natural cubic splines.

use super::grid::ScalarGrid;
use crate::error::{Error, Result};

/// Relative tolerance of [`MonotoneMap::invert`].
pub const INVERSION_RTOL: f64 = 1e-12;

/// Strictly increasing sampled map `x -> y` with a shape-preserving
/// piecewise-cubic Hermite interpolant (PCHIP derivative estimates).
#[derive(Debug, Clone)]
pub struct MonotoneMap {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneMap {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n != ys.len() || n < 2 {
            return Err(Error::Dimension(format!(
                "monotone map needs matching samples (>= 2), got {} and {}",
                n,
                ys.len()
            )));
        }
        for k in 1..n {
            if !(xs[k] > xs[k - 1]) {
                return Err(Error::Monotonicity(format!("abscissae not increasing at sample {k}")));
            }
            if !(ys[k] > ys[k - 1]) {
                return Err(Error::Monotonicity(format!(
                    "map values not strictly increasing at sample {k}: {} -> {}",
                    ys[k - 1],
                    ys[k]
                )));
            }
        }
        let ds = pchip_slopes(&xs, &ys);
        Ok(Self { xs, ys, ds })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.ys[0], *self.ys.last().unwrap())
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn interval(&self, x: f64) -> usize {
        match self.xs.partition_point(|&s| s <= x) {
            0 => 0,
            k => (k - 1).min(self.xs.len() - 2),
        }
    }

    /// Evaluate the interpolant; `x` is clamped to the sampled domain.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        let k = self.interval(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        hermite(t, self.ys[k], self.ys[k + 1], h * self.ds[k], h * self.ds[k + 1])
    }

    /// Solve `map(x) = y` by bisection on the monotone interpolant.
    pub fn invert(&self, y: f64) -> Result<f64> {
        let (y_lo, y_hi) = self.range();
        let slack = INVERSION_RTOL * y_lo.abs().max(y_hi.abs()).max(1.0);
        if !(y >= y_lo - slack && y <= y_hi + slack) {
            return Err(Error::Range(format!("{y} outside sampled range [{y_lo}, {y_hi}]")));
        }
        let y = y.clamp(y_lo, y_hi);
        let k = match self.ys.partition_point(|&s| s <= y) {
            0 => 0,
            k => (k - 1).min(self.ys.len() - 2),
        };
        if y == self.ys[k] {
            return Ok(self.xs[k]);
        }
        let (mut a, mut b) = (self.xs[k], self.xs[k + 1]);
        let tol = INVERSION_RTOL * a.abs().max(b.abs()).max(b - a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.eval(m) < y {
                a = m;
            } else {
                b = m;
            }
            if b - a <= tol {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// Invert a strictly increasing sampled map at `y`.
pub fn invert_monotone_map(xs: &[f64], ys: &[f64], y: f64) -> Result<f64> {
    MonotoneMap::new(xs.to_vec(), ys.to_vec())?.invert(y)
}

fn hermite(t: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
}

/// Fritsch-Butland weighted harmonic-mean slopes with the three-point end rule.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] <= 0.0 {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            s = 0.0;
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            s = 3.0 * d0;
        }
        s
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// Weights of the four-point Lagrange cubic through nodes `k0..k0+4` evaluated
/// at local coordinate `s` measured from node `k0` in units of the spacing.
fn lagrange4(s: f64) -> [f64; 4] {
    let (a, b, c, d) = (s, s - 1.0, s - 2.0, s - 3.0);
    [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0]
}

/// Stencil start and weights for local cubic interpolation at fractional
/// index `x` on `n >= 4` uniform samples.
fn cubic_stencil(x: f64, n: usize) -> (usize, [f64; 4]) {
    let k = x.floor().clamp(0.0, (n - 2) as f64) as usize;
    let k0 = k.saturating_sub(1).min(n - 4);
    (k0, lagrange4(x - k0 as f64))
}

/// Local four-point cubic interpolation of uniform samples starting at `x0`
/// with spacing `h`. Extrapolates with the end stencils outside the range.
pub fn cubic_uniform(samples: &[f64], x0: f64, h: f64, x: f64) -> f64 {
    let n = samples.len();
    let s = (x - x0) / h;
    if n < 4 {
        let k = s.floor().clamp(0.0, (n - 2) as f64) as usize;
        let t = s - k as f64;
        return samples[k] * (1.0 - t) + samples[k + 1] * t;
    }
    let (k0, w) = cubic_stencil(s, n);
    w.iter().zip(&samples[k0..k0 + 4]).map(|(w, y)| w * y).sum()
}

/// Value at the midpoint between samples `k` and `k + 1` by cubic interpolation.
pub fn cubic_midpoint(samples: &[f64], k: usize) -> f64 {
    let n = samples.len();
    if n < 4 {
        return 0.5 * (samples[k] + samples[k + 1]);
    }
    if k >= 1 && k + 2 < n {
        (-samples[k - 1] + 9.0 * (samples[k] + samples[k + 1]) - samples[k + 2]) / 16.0
    } else if k == 0 {
        (5.0 * samples[0] + 15.0 * samples[1] - 5.0 * samples[2] + samples[3]) / 16.0
    } else {
        (5.0 * samples[n - 1] + 15.0 * samples[n - 2] - 5.0 * samples[n - 3] + samples[n - 4]) / 16.0
    }
}

/// Tensor-product local cubic interpolation of a scalar grid at `(u, v)`.
pub fn bicubic(g: &ScalarGrid, u: f64, v: f64) -> f64 {
    let spec = g.spec;
    let su = (u - spec.u0) / spec.du;
    let sv = (v - spec.v0) / spec.dv;
    let (i0, wu) = cubic_stencil(su, spec.nu.max(4));
    let (j0, wv) = cubic_stencil(sv, spec.nv.max(4));
    if spec.nu < 4 || spec.nv < 4 {
        // tiny grids: interpolate rows then the column of results
        let rows: Vec<f64> = (0..spec.nv).map(|j| cubic_uniform(g.row(j), spec.u0, spec.du, u)).collect();
        return cubic_uniform(&rows, spec.v0, spec.dv, v);
    }
    let mut acc = 0.0;
    for (b, wb) in wv.iter().enumerate() {
        let row = g.row(j0 + b);
        let mut r = 0.0;
        for (a, wa) in wu.iter().enumerate() {
            r += wa * row[i0 + a];
        }
        acc += wb * r;
    }
    acc
}

/// Natural cubic spline through `(xs, ys)` with exact first and second
/// derivatives of the interpolant.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n != ys.len() || n < 3 {
            return Err(Error::Dimension(format!(
                "spline needs at least 3 matching samples, got {} and {}",
                n,
                ys.len()
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Monotonicity("spline knots must increase".into()));
        }
        // tridiagonal system for the second derivatives, m[0] = m[n-1] = 0
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        for k in 1..n - 1 {
            let h0 = xs[k] - xs[k - 1];
            let h1 = xs[k + 1] - xs[k];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let cc = h1 / 6.0;
            let rhs = (ys[k + 1] - ys[k]) / h1 - (ys[k] - ys[k - 1]) / h0;
            let denom = b - a * c[k - 1];
            c[k] = cc / denom;
            r[k] = (rhs - a * r[k - 1]) / denom;
        }
        for k in (1..n - 1).rev() {
            m[k] = r[k] - c[k] * m[k + 1];
        }
        Ok(Self { xs, ys, m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let n = self.xs.len();
        let k = match self.xs.partition_point(|&s| s <= x) {
            0 => 0,
            k => (k - 1).min(n - 2),
        };
        let h = self.xs[k + 1] - self.xs[k];
        let a = (self.xs[k + 1] - x) / h;
        let b = (x - self.xs[k]) / h;
        let (m0, m1) = (self.m[k], self.m[k + 1]);
        let (y0, y1) = (self.ys[k], self.ys[k + 1]);
        let y = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dy = (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let ddy = a * m0 + b * m1;
        (y, dy, ddy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map_inverts_exactly() {
        let xs: Vec<f64> = (0..11).map(|k| k as f64 / 10.0).collect();
        let x = invert_monotone_map(&xs, &xs, 0.37).unwrap();
        assert!((x - 0.37).abs() < 1e-12);
    }

    #[test]
    fn affine_map_inverts_exactly() {
        let xs: Vec<f64> = (0..11).map(|k| k as f64 / 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let x = invert_monotone_map(&xs, &ys, 2.0).unwrap();
        assert!((x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sinh_map_inverts_to_arcsinh() {
        let xs: Vec<f64> = (0..201).map(|k| 2.0 * k as f64 / 200.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sinh()).collect();
        let x = invert_monotone_map(&xs, &ys, 1.0).unwrap();
        assert!((x - 1.0f64.asinh()).abs() < 1e-8, "{x}");
        assert!((x - 0.881374).abs() < 1e-6);
    }

    #[test]
    fn inversion_errors() {
        let xs = [0.0, 1.0, 2.0];
        assert!(matches!(invert_monotone_map(&xs, &[0.0, 1.0, 2.0], 3.0), Err(Error::Range(_))));
        assert!(matches!(invert_monotone_map(&xs, &[0.0, 2.0, 1.0], 0.5), Err(Error::Monotonicity(_))));
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let samples: Vec<f64> = (0..9).map(|k| f(0.5 * k as f64)).collect();
        for &x in &[0.1, 0.77, 2.3, 3.9] {
            assert!((cubic_uniform(&samples, 0.0, 0.5, x) - f(x)).abs() < 1e-12);
        }
        for k in 0..8 {
            let mid = 0.5 * (k as f64 + 0.5);
            assert!((cubic_midpoint(&samples, k) - f(mid)).abs() < 1e-12);
        }
    }

    #[test]
    fn spline_tracks_sine_and_its_slope() {
        let xs: Vec<f64> = (0..41).map(|k| k as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let s = CubicSpline::natural(xs, ys).unwrap();
        let (y, dy, _) = s.eval(1.0);
        assert!((y - 1f64.sin()).abs() < 1e-6);
        assert!((dy - 1f64.cos()).abs() < 1e-4);
    }
}
