//! Finite-difference stencils on uniform samples and on [`ScalarGrid`]s.
//!
//! The default stencils are second order everywhere: central differences in
//! the interior and one-sided three-point formulas at the two ends. The
//! `*4` variants are fourth order and are used where a quantity is integrated
//! over long paths and the error would otherwise accumulate.

use super::grid::ScalarGrid;
use crate::error::{Error, Result};

fn need(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Dimension(format!("stencil needs at least {min} samples, got {n}")));
    }
    Ok(())
}

/// First derivative of uniformly spaced samples, second order.
pub fn derivative(f: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = f.len();
    need(n, 3)?;
    let mut d = vec![0.0; n];
    let inv = 1.0 / (2.0 * h);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv;
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) * inv;
    }
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv;
    Ok(d)
}

/// First derivative, fourth order. Falls back to [`derivative`] below five samples.
pub fn derivative4(f: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = f.len();
    if n < 5 {
        return derivative(f, h);
    }
    let inv = 1.0 / (12.0 * h);
    let mut d = vec![0.0; n];
    let edge0 = |g: &dyn Fn(usize) -> f64| -25.0 * g(0) + 48.0 * g(1) - 36.0 * g(2) + 16.0 * g(3) - 3.0 * g(4);
    let edge1 = |g: &dyn Fn(usize) -> f64| -3.0 * g(0) - 10.0 * g(1) + 18.0 * g(2) - 6.0 * g(3) + g(4);
    let fwd = |k: usize| f[k];
    let bwd = |k: usize| f[n - 1 - k];
    d[0] = edge0(&fwd) * inv;
    d[1] = edge1(&fwd) * inv;
    d[n - 1] = -edge0(&bwd) * inv;
    d[n - 2] = -edge1(&bwd) * inv;
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * inv;
    }
    Ok(d)
}

/// Second derivative, compact three-point stencil in the interior and
/// second-order four-point one-sided stencils at the ends.
pub fn second_derivative(f: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = f.len();
    need(n, 3)?;
    let inv = 1.0 / (h * h);
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv;
    }
    if n >= 4 {
        d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
        d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv;
    } else {
        d[0] = d[1];
        d[n - 1] = d[1];
    }
    Ok(d)
}

fn along_u(g: &ScalarGrid, op: impl Fn(&[f64], f64) -> Result<Vec<f64>>) -> Result<ScalarGrid> {
    let spec = g.spec;
    let mut values = Vec::with_capacity(spec.len());
    for j in 0..spec.nv {
        values.extend(op(g.row(j), spec.du)?);
    }
    ScalarGrid::new(spec, values)
}

fn along_v(g: &ScalarGrid, op: impl Fn(&[f64], f64) -> Result<Vec<f64>>) -> Result<ScalarGrid> {
    let spec = g.spec;
    let mut out = ScalarGrid::constant(spec, 0.0);
    for i in 0..spec.nu {
        let col = op(&g.column(i), spec.dv)?;
        for (j, x) in col.into_iter().enumerate() {
            *out.at_mut(i, j) = x;
        }
    }
    Ok(out)
}

pub fn partial_u(g: &ScalarGrid) -> Result<ScalarGrid> {
    along_u(g, derivative)
}

pub fn partial_v(g: &ScalarGrid) -> Result<ScalarGrid> {
    along_v(g, derivative)
}

pub fn partial_u4(g: &ScalarGrid) -> Result<ScalarGrid> {
    along_u(g, derivative4)
}

pub fn partial_v4(g: &ScalarGrid) -> Result<ScalarGrid> {
    along_v(g, derivative4)
}

pub fn second_u(g: &ScalarGrid) -> Result<ScalarGrid> {
    along_u(g, second_derivative)
}

pub fn second_v(g: &ScalarGrid) -> Result<ScalarGrid> {
    along_v(g, second_derivative)
}

/// Flat Laplacian `f_uu + f_vv` on the grid's own spacings.
pub fn laplacian(g: &ScalarGrid) -> Result<ScalarGrid> {
    second_u(g)?.zip_map(&second_v(g)?, |a, b| a + b)
}
