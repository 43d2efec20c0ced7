use crate::compatibility::{canonical_factors, ResidualReport, INTERIOR_MARGIN};
use crate::error::{Error, Result};
use crate::numerics::grid::check_same_shape;
use crate::numerics::interp::{bicubic, cubic_uniform};
use crate::numerics::quad::cumulative_integral4;
use crate::numerics::{partial_u4, partial_v4, BaseIndex, GridSpec, MonotoneMap, ScalarGrid};
use crate::shape::{detect_umbilics, UMBILIC_TOL};

use super::InvariantGrid;

/// Knobs of the canonicalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalConfig {
    /// Image of the base point.
    pub ubar0: f64,
    pub vbar0: f64,
    /// Largest admissible relative `v`-variation of the `ubar` integrand
    /// (and `u`-variation of the `vbar` integrand).
    pub codazzi_tol: f64,
    pub umbilic_tol: f64,
}

impl Default for CanonicalConfig {
    fn default() -> Self {
        Self { ubar0: 0.0, vbar0: 0.0, codazzi_tol: 1e-3, umbilic_tol: UMBILIC_TOL }
    }
}

/// The sampled maps `u -> ubar` and `v -> vbar` of a principal chart.
#[derive(Debug, Clone)]
pub struct CanonicalMaps {
    pub ubar: MonotoneMap,
    pub vbar: MonotoneMap,
    /// `d ubar / du` at the source `u` nodes (on the base row).
    pub ubar_rate: Vec<f64>,
    /// `d vbar / dv` at the source `v` nodes (on the base column).
    pub vbar_rate: Vec<f64>,
    /// `E` and `G` at the base node.
    pub a: f64,
    pub b: f64,
    pub base: BaseIndex,
    pub ubar0: f64,
    pub vbar0: f64,
    /// Largest relative spread over `v` of the `ubar` integrand.
    pub u_variation: f64,
    /// Largest relative spread over `u` of the `vbar` integrand.
    pub v_variation: f64,
    pub source: GridSpec,
}

impl CanonicalMaps {
    pub fn map_point(&self, u: f64, v: f64) -> (f64, f64) {
        (self.ubar.eval(u), self.vbar.eval(v))
    }

    pub fn inverse(&self, ubar: f64, vbar: f64) -> Result<(f64, f64)> {
        Ok((self.ubar.invert(ubar)?, self.vbar.invert(vbar)?))
    }

    /// `d ubar / du` at `u` and `d vbar / dv` at `v`.
    pub fn rates(&self, u: f64, v: f64) -> (f64, f64) {
        let s = self.source;
        (cubic_uniform(&self.ubar_rate, s.u0, s.du, u), cubic_uniform(&self.vbar_rate, s.v0, s.dv, v))
    }

    /// Uniform grid on the image rectangle with the same node counts, placed
    /// so that the base node maps onto `(ubar0, vbar0)` exactly.
    pub fn canonical_spec(&self) -> Result<GridSpec> {
        let s = self.source;
        let axis = |map: &MonotoneMap, n: usize, k: usize, x0: f64| -> Result<(f64, f64)> {
            let (lo, hi) = map.range();
            let mut h = f64::INFINITY;
            if k > 0 {
                h = h.min((x0 - lo) / k as f64);
            }
            if k + 1 < n {
                h = h.min((hi - x0) / (n - 1 - k) as f64);
            }
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Range(format!("empty canonical image [{lo}, {hi}]")));
            }
            Ok((x0 - k as f64 * h, h))
        };
        let (u0, du) = axis(&self.ubar, s.nu, self.base.i, self.ubar0)?;
        let (v0, dv) = axis(&self.vbar, s.nv, self.base.j, self.vbar0)?;
        GridSpec::new(s.nu, s.nv, u0, v0, du, dv)
    }

    /// Source parameters of every canonical node, `(u of column i, v of row j)`.
    pub fn source_parameters(&self, spec: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
        let us = spec.us().into_iter().map(|x| self.ubar.invert(x)).collect::<Result<Vec<_>>>()?;
        let vs = spec.vs().into_iter().map(|x| self.vbar.invert(x)).collect::<Result<Vec<_>>>()?;
        Ok((us, vs))
    }
}

fn rows4(g: &ScalarGrid, base_i: usize) -> Result<ScalarGrid> {
    let spec = g.spec;
    let mut values = Vec::with_capacity(spec.len());
    for j in 0..spec.nv {
        values.extend(cumulative_integral4(g.row(j), spec.du, base_i)?);
    }
    ScalarGrid::new(spec, values)
}

fn cols4(g: &ScalarGrid, base_j: usize) -> Result<ScalarGrid> {
    rows4(&g.transposed(), base_j).map(|t| t.transposed())
}

struct Integrands {
    u: ScalarGrid,
    v: ScalarGrid,
}

/// `sqrt(E/E0) exp(int (nu1)_v/(nu1-nu2) dv + int (nu1)_u/(nu1-nu2)(u, v0) du)` and
/// `sqrt(G/G0) exp(-int (nu2)_u/(nu1-nu2) du - int (nu2)_v/(nu1-nu2)(u0, v) dv)`
/// on the full grid, with fourth-order stencils.
fn integrands(
    e: &ScalarGrid,
    g: &ScalarGrid,
    nu1: &ScalarGrid,
    nu2: &ScalarGrid,
    base: BaseIndex,
) -> Result<Integrands> {
    let spec = e.spec;
    let diff = nu1.zip_map(nu2, |a, b| a - b)?;
    let quot = |d: ScalarGrid| d.zip_map(&diff, |x, y| x / y);
    let q1u = quot(partial_u4(nu1)?)?;
    let q1v = quot(partial_v4(nu1)?)?;
    let q2u = quot(partial_u4(nu2)?)?;
    let q2v = quot(partial_v4(nu2)?)?;
    let in_v = cols4(&q1v, base.j)?;
    let row = cumulative_integral4(q1u.row(base.j), spec.du, base.i)?;
    let in_u = rows4(&q2u, base.i)?;
    let col = cumulative_integral4(&q2v.column(base.i), spec.dv, base.j)?;
    let (e0, g0) = (*e.at(base.i, base.j), *g.at(base.i, base.j));
    let iu = ScalarGrid::from_fn(spec, |i, j| (e.at(i, j) / e0).sqrt() * (in_v.at(i, j) + row[i]).exp());
    let iv = ScalarGrid::from_fn(spec, |i, j| (g.at(i, j) / g0).sqrt() * (-in_u.at(i, j) - col[j]).exp());
    Ok(Integrands { u: iu, v: iv })
}

fn check_positive(name: &str, g: &ScalarGrid) -> Result<()> {
    if let Some(k) = g.values.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
        let nu = g.spec.nu;
        return Err(Error::Monotonicity(format!(
            "{name} integrand is {} at node ({}, {})",
            g.values[k],
            k % nu,
            k / nu
        )));
    }
    Ok(())
}

/// Largest over the first index of `(max - min) / mean` along the second.
fn spread(g: &ScalarGrid, along_v: bool) -> f64 {
    let spec = g.spec;
    let (outer, inner) = if along_v { (spec.nu, spec.nv) } else { (spec.nv, spec.nu) };
    let mut worst = 0.0f64;
    for o in 0..outer {
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for k in 0..inner {
            let x = if along_v { *g.at(o, k) } else { *g.at(k, o) };
            lo = lo.min(x);
            hi = hi.max(x);
            sum += x;
        }
        worst = worst.max((hi - lo) / (sum / inner as f64));
    }
    worst
}

fn variations(
    e: &ScalarGrid,
    g: &ScalarGrid,
    nu1: &ScalarGrid,
    nu2: &ScalarGrid,
    base: BaseIndex,
) -> Result<(f64, f64)> {
    let (io, jo) = (base.i % 2, base.j % 2);
    let sub = |x: &ScalarGrid| x.subsample(2, io, jo);
    let coarse = integrands(&sub(e)?, &sub(g)?, &sub(nu1)?, &sub(nu2)?, BaseIndex { i: base.i / 2, j: base.j / 2 })?;
    Ok((spread(&coarse.u, true), spread(&coarse.v, false)))
}

/// Build the maps to canonical principal parameters from a principal chart.
///
/// The `ubar` map integrates its integrand along the base row and the `vbar`
/// map along the base column. The integrands are also evaluated on the whole
/// grid; their spread across the other parameter is reported and must stay
/// below `config.codazzi_tol` on this grid or on its every-other-node subgrid.
pub fn build_canonical_maps(
    e: &ScalarGrid,
    g: &ScalarGrid,
    nu1: &ScalarGrid,
    nu2: &ScalarGrid,
    base: BaseIndex,
    config: &CanonicalConfig,
) -> Result<CanonicalMaps> {
    for other in [g, nu1, nu2] {
        check_same_shape(&e.spec, &other.spec)?;
    }
    let spec = e.spec;
    base.check(&spec)?;
    if let Some(err) = detect_umbilics(nu1, nu2, config.umbilic_tol)?.to_error() {
        return Err(err);
    }
    let ints = integrands(e, g, nu1, nu2, base)?;
    check_positive("ubar", &ints.u)?;
    check_positive("vbar", &ints.v)?;
    let mut u_variation = spread(&ints.u, true);
    let mut v_variation = spread(&ints.v, false);
    if u_variation.max(v_variation) > config.codazzi_tol {
        if spec.nu >= 9 && spec.nv >= 9 {
            let (cu, cv) = variations(e, g, nu1, nu2, base)?;
            u_variation = u_variation.min(cu);
            v_variation = v_variation.min(cv);
        }
        let worst = u_variation.max(v_variation);
        if worst > config.codazzi_tol {
            return Err(Error::CodazziViolation { variation: worst, tolerance: config.codazzi_tol });
        }
    }
    let ubar_rate = ints.u.row(base.j).to_vec();
    let vbar_rate = ints.v.column(base.i);
    let ubar_samples: Vec<f64> =
        cumulative_integral4(&ubar_rate, spec.du, base.i)?.into_iter().map(|x| x + config.ubar0).collect();
    let vbar_samples: Vec<f64> =
        cumulative_integral4(&vbar_rate, spec.dv, base.j)?.into_iter().map(|x| x + config.vbar0).collect();
    Ok(CanonicalMaps {
        ubar: MonotoneMap::new(spec.us(), ubar_samples)?,
        vbar: MonotoneMap::new(spec.vs(), vbar_samples)?,
        ubar_rate,
        vbar_rate,
        a: *e.at(base.i, base.j),
        b: *g.at(base.i, base.j),
        base,
        ubar0: config.ubar0,
        vbar0: config.vbar0,
        u_variation,
        v_variation,
        source: spec,
    })
}

/// Resample a source-chart field onto the canonical grid.
pub fn resample_field(maps: &CanonicalMaps, field: &ScalarGrid) -> Result<ScalarGrid> {
    if field.spec != maps.source {
        return Err(Error::ShapeMismatch("field is not on the source grid of the maps".into()));
    }
    let spec = maps.canonical_spec()?;
    let (us, vs) = maps.source_parameters(&spec)?;
    let b = maps.base;
    Ok(ScalarGrid::from_fn(spec, |i, j| {
        if i == b.i && j == b.j {
            // the base node maps onto itself exactly
            *field.at(i, j)
        } else {
            bicubic(field, us[i], vs[j])
        }
    }))
}

/// Principal curvatures on the canonical grid as an [`InvariantGrid`].
pub fn resample_to_canonical(maps: &CanonicalMaps, nu1: &ScalarGrid, nu2: &ScalarGrid) -> Result<InvariantGrid> {
    let n1 = resample_field(maps, nu1)?;
    let n2 = resample_field(maps, nu2)?;
    InvariantGrid::from_nu(n1, n2, maps.a, maps.b, maps.base)
}

/// First fundamental form on the canonical grid:
/// `Ebar = E / (d ubar/du)^2`, `Gbar = G / (d vbar/dv)^2`.
pub fn resample_metric(maps: &CanonicalMaps, e: &ScalarGrid, g: &ScalarGrid) -> Result<(ScalarGrid, ScalarGrid)> {
    let spec = maps.canonical_spec()?;
    let (us, vs) = maps.source_parameters(&spec)?;
    let e_bar = resample_field(maps, e)?;
    let g_bar = resample_field(maps, g)?;
    let e_bar = ScalarGrid::from_fn(spec, |i, j| {
        let (ru, _) = maps.rates(us[i], vs[j]);
        e_bar.at(i, j) / (ru * ru)
    });
    let g_bar = ScalarGrid::from_fn(spec, |i, j| {
        let (_, rv) = maps.rates(us[i], vs[j]);
        g_bar.at(i, j) / (rv * rv)
    });
    Ok((e_bar, g_bar))
}

/// Residuals `identity - 1` of the two conditions defining canonical
/// principal parameters, normalized by `E` and `G` at the base node.
pub fn verify_canonical(
    inv: &InvariantGrid,
    e: &ScalarGrid,
    g: &ScalarGrid,
) -> Result<(ResidualReport, ResidualReport)> {
    let spec = inv.spec();
    check_same_shape(&spec, &e.spec)?;
    check_same_shape(&spec, &g.spec)?;
    let f = canonical_factors(inv)?;
    let b = inv.base();
    let (e0, g0) = (*e.at(b.i, b.j), *g.at(b.i, b.j));
    let r1 = ScalarGrid::from_fn(spec, |i, j| (e.at(i, j) / e0).sqrt() / f.psi1.at(i, j) - 1.0);
    let r2 = ScalarGrid::from_fn(spec, |i, j| (g.at(i, j) / g0).sqrt() / f.psi2.at(i, j) - 1.0);
    let mut rep1 = ResidualReport::new("canonical_u", r1, INTERIOR_MARGIN);
    let mut rep2 = ResidualReport::new("canonical_v", r2, INTERIOR_MARGIN);
    let inv_nu = inv.to_nu_mode()?;
    if (inv_nu.a() - e0).abs() > 1e-8 * e0 {
        rep1 = rep1.with_note(format!("a = {} differs from E at the base node {e0}", inv_nu.a()));
    }
    if (inv_nu.b() - g0).abs() > 1e-8 * g0 {
        rep2 = rep2.with_note(format!("b = {} differs from G at the base node {g0}", inv_nu.b()));
    }
    Ok((rep1, rep2))
}
