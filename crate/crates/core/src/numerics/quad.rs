//! Signed cumulative quadrature from a base sample.

use super::diff::derivative4;
use super::grid::{BaseIndex, ScalarGrid};
use crate::error::{Error, Result};

/// Composite trapezoidal integral of `f` from sample `base` to every sample.
///
/// The value at `base` is exactly zero and samples before `base` carry the
/// negative of the reversed integral.
pub fn cumulative_trapezoid(f: &[f64], h: f64, base: usize) -> Result<Vec<f64>> {
    let n = f.len();
    if base >= n {
        return Err(Error::Range(format!("base sample {base} outside 0..{n}")));
    }
    let mut out = vec![0.0; n];
    let half = 0.5 * h;
    for i in base + 1..n {
        out[i] = out[i - 1] + half * (f[i - 1] + f[i]);
    }
    for i in (0..base).rev() {
        out[i] = out[i + 1] - half * (f[i] + f[i + 1]);
    }
    Ok(out)
}

/// Trapezoid with the Euler-Maclaurin end correction `-h^2/12 (f'(x) - f'(x_base))`,
/// which makes the cumulative integral fourth order.
pub fn cumulative_integral4(f: &[f64], h: f64, base: usize) -> Result<Vec<f64>> {
    let mut out = cumulative_trapezoid(f, h, base)?;
    if f.len() < 5 {
        return Ok(out);
    }
    let d = derivative4(f, h)?;
    let c = h * h / 12.0;
    for (o, di) in out.iter_mut().zip(&d) {
        *o -= c * (di - d[base]);
    }
    out[base] = 0.0;
    Ok(out)
}

/// Cumulative integral along every row (in `u`) starting at column `base.i`.
pub fn cumulative_integral_u(g: &ScalarGrid, base: BaseIndex) -> Result<ScalarGrid> {
    base.check(&g.spec)?;
    let spec = g.spec;
    let mut values = Vec::with_capacity(spec.len());
    for j in 0..spec.nv {
        values.extend(cumulative_trapezoid(g.row(j), spec.du, base.i)?);
    }
    ScalarGrid::new(spec, values)
}

/// Cumulative integral along every column (in `v`) starting at row `base.j`.
pub fn cumulative_integral_v(g: &ScalarGrid, base: BaseIndex) -> Result<ScalarGrid> {
    base.check(&g.spec)?;
    let spec = g.spec;
    let mut out = ScalarGrid::constant(spec, 0.0);
    for i in 0..spec.nu {
        let col = cumulative_trapezoid(&g.column(i), spec.dv, base.j)?;
        for (j, x) in col.into_iter().enumerate() {
            *out.at_mut(i, j) = x;
        }
    }
    Ok(out)
}
