//! Residuals of the Gauss and Codazzi equations in general, principal and
//! canonical-principal parameters.

use serde::Serialize;

use crate::canonical::{InvariantGrid, InvariantMode};
use crate::error::{Error, Result};
use crate::numerics::grid::check_same_shape;
use crate::numerics::{cumulative_integral_u, cumulative_integral_v, partial_u, partial_v, BaseIndex, ScalarGrid};
use crate::shape::{detect_umbilics, FormFields, UMBILIC_TOL};

/// Boundary layers excluded from the residual statistics.
pub const INTERIOR_MARGIN: usize = 2;
/// Refinement ratio below which a residual is considered stalled.
pub const FLOOR_RATIO: f64 = 1.5;
/// Residuals below this are roundoff whatever their refinement behaviour.
pub const FLOOR_NOISE: f64 = 1e-8;

/// A named residual field with interior statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub name: String,
    pub residual: ScalarGrid,
    pub max_abs: f64,
    pub rms: f64,
    pub margin: usize,
    pub notes: Vec<String>,
}

impl ResidualReport {
    pub fn new(name: impl Into<String>, residual: ScalarGrid, margin: usize) -> Self {
        let spec = residual.spec;
        let (mut lo_i, mut hi_i, mut lo_j, mut hi_j) = (margin, spec.nu - margin, margin, spec.nv - margin);
        if 2 * margin >= spec.nu {
            (lo_i, hi_i) = (0, spec.nu);
        }
        if 2 * margin >= spec.nv {
            (lo_j, hi_j) = (0, spec.nv);
        }
        let mut max_abs = 0.0f64;
        let mut sum = 0.0;
        let mut count = 0usize;
        for j in lo_j..hi_j {
            for &r in &residual.row(j)[lo_i..hi_i] {
                max_abs = if r.is_nan() { f64::NAN } else { max_abs.max(r.abs()) };
                sum += r * r;
                count += 1;
            }
        }
        Self { name: name.into(), residual, max_abs, rms: (sum / count as f64).sqrt(), margin, notes: Vec::new() }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            name: self.name.clone(),
            max_abs: self.max_abs,
            rms: self.rms,
            margin: self.margin,
            shape: [self.residual.spec.nu, self.residual.spec.nv],
            notes: self.notes.clone(),
        }
    }
}

/// Serializable view of a [`ResidualReport`] without the residual field.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ReportSummary {
    pub name: String,
    pub max_abs: f64,
    pub rms: f64,
    pub margin: usize,
    pub shape: [usize; 2],
    pub notes: Vec<String>,
}

fn ew(a: &ScalarGrid, b: &ScalarGrid, f: impl Fn(f64, f64) -> f64) -> ScalarGrid {
    a.zip_map(b, |x, y| f(*x, *y)).expect("fields share one grid")
}

struct Partials {
    u: [ScalarGrid; 6],
    v: [ScalarGrid; 6],
}

fn partials(forms: &FormFields) -> Result<Partials> {
    let all = [&forms.e, &forms.f, &forms.g, &forms.l, &forms.m, &forms.n];
    let mut u = Vec::with_capacity(6);
    let mut v = Vec::with_capacity(6);
    for g in all {
        check_same_shape(&forms.e.spec, &g.spec)?;
        u.push(partial_u(g)?);
        v.push(partial_v(g)?);
    }
    Ok(Partials { u: u.try_into().unwrap(), v: v.try_into().unwrap() })
}

fn det3(r0: [f64; 3], r1: [f64; 3], r2: [f64; 3]) -> f64 {
    r0[0] * (r1[1] * r2[2] - r1[2] * r2[1]) - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0])
        + r0[2] * (r1[0] * r2[1] - r1[1] * r2[0])
}

fn metric_root(forms: &FormFields) -> Result<ScalarGrid> {
    let w = ScalarGrid::from_fn(forms.spec(), |i, j| {
        let (e, f, g) = (*forms.e.at(i, j), *forms.f.at(i, j), *forms.g.at(i, j));
        (e * g - f * f).max(0.0).sqrt()
    });
    if let Some(k) = w.values.iter().position(|x| !(*x >= 1e-14)) {
        let spec = w.spec;
        return Err(Error::Regularity(format!(
            "W = sqrt(EG - F^2) vanishes at node ({}, {})",
            k % spec.nu,
            k / spec.nu
        )));
    }
    Ok(w)
}

/// `K - RHS` of the Gauss equation written in general parameters (Brioschi form).
pub fn gauss_residual_general(forms: &FormFields) -> Result<ResidualReport> {
    let w = metric_root(forms)?;
    let d = partials(forms)?;
    let [eu, fu, gu, ..] = &d.u;
    let [ev, fv, gv, ..] = &d.v;
    let a = ScalarGrid::from_fn(w.spec, |i, j| (ev.at(i, j) - fu.at(i, j)) / w.at(i, j));
    let b = ScalarGrid::from_fn(w.spec, |i, j| (gu.at(i, j) - fv.at(i, j)) / w.at(i, j));
    let av = partial_v(&a)?;
    let bu = partial_u(&b)?;
    let res = ScalarGrid::from_fn(w.spec, |i, j| {
        let (e, f, g) = (*forms.e.at(i, j), *forms.f.at(i, j), *forms.g.at(i, j));
        let (l, m, n) = (*forms.l.at(i, j), *forms.m.at(i, j), *forms.n.at(i, j));
        let wij = *w.at(i, j);
        let w2 = wij * wij;
        let k = (l * n - m * m) / w2;
        let det =
            det3([e, f, g], [*eu.at(i, j), *fu.at(i, j), *gu.at(i, j)], [*ev.at(i, j), *fv.at(i, j), *gv.at(i, j)]);
        let rhs = -(av.at(i, j) + bu.at(i, j)) / (2.0 * wij) - det / (4.0 * w2 * w2);
        k - rhs
    });
    Ok(ResidualReport::new("gauss_general", res, INTERIOR_MARGIN))
}

/// Residuals of the two Codazzi equations in general parameters.
pub fn codazzi_residual_general(forms: &FormFields) -> Result<(ResidualReport, ResidualReport)> {
    let w = metric_root(forms)?;
    let d = partials(forms)?;
    let [eu, fu, gu, _, mu, nu] = &d.u;
    let [ev, fv, gv, lv, mv, _] = &d.v;
    let spec = w.spec;
    let mut r1 = ScalarGrid::constant(spec, 0.0);
    let mut r2 = ScalarGrid::constant(spec, 0.0);
    for j in 0..spec.nv {
        for i in 0..spec.nu {
            let (e, f, g) = (*forms.e.at(i, j), *forms.f.at(i, j), *forms.g.at(i, j));
            let (l, m, n) = (*forms.l.at(i, j), *forms.m.at(i, j), *forms.n.at(i, j));
            let w2 = w.at(i, j).powi(2);
            let trace = e * n - 2.0 * f * m + g * l;
            let first = [e, f, g];
            let second = [l, m, n];
            let du = [*eu.at(i, j), *fu.at(i, j), *gu.at(i, j)];
            let dv = [*ev.at(i, j), *fv.at(i, j), *gv.at(i, j)];
            *r1.at_mut(i, j) =
                2.0 * w2 * (lv.at(i, j) - mu.at(i, j)) - (trace * (dv[0] - du[1]) + det3(first, second, du));
            *r2.at_mut(i, j) =
                2.0 * w2 * (mv.at(i, j) - nu.at(i, j)) - (trace * (dv[1] - du[2]) + det3(first, second, dv));
        }
    }
    Ok((
        ResidualReport::new("codazzi_general_1", r1, INTERIOR_MARGIN),
        ResidualReport::new("codazzi_general_2", r2, INTERIOR_MARGIN),
    ))
}

fn require_umbilic_free(nu1: &ScalarGrid, nu2: &ScalarGrid) -> Result<()> {
    match detect_umbilics(nu1, nu2, UMBILIC_TOL)?.to_error() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Residuals of `E_v/2E + (nu1)_v/(nu1 - nu2)` and `G_u/2G - (nu2)_u/(nu1 - nu2)`.
pub fn codazzi_residual_principal(
    nu1: &ScalarGrid,
    nu2: &ScalarGrid,
    e: &ScalarGrid,
    g: &ScalarGrid,
) -> Result<(ResidualReport, ResidualReport)> {
    for other in [nu2, e, g] {
        check_same_shape(&nu1.spec, &other.spec)?;
    }
    require_umbilic_free(nu1, nu2)?;
    let ev = partial_v(e)?;
    let gu = partial_u(g)?;
    let n1v = partial_v(nu1)?;
    let n2u = partial_u(nu2)?;
    let spec = nu1.spec;
    let r1 = ScalarGrid::from_fn(spec, |i, j| {
        ev.at(i, j) / (2.0 * e.at(i, j)) + n1v.at(i, j) / (nu1.at(i, j) - nu2.at(i, j))
    });
    let r2 = ScalarGrid::from_fn(spec, |i, j| {
        gu.at(i, j) / (2.0 * g.at(i, j)) - n2u.at(i, j) / (nu1.at(i, j) - nu2.at(i, j))
    });
    Ok((
        ResidualReport::new("codazzi_principal_1", r1, INTERIOR_MARGIN),
        ResidualReport::new("codazzi_principal_2", r2, INTERIOR_MARGIN),
    ))
}

/// Gauss equation in principal parameters, with `nu1 = L/E` and `nu2 = N/G`.
pub fn gauss_residual_principal(forms: &FormFields) -> Result<ResidualReport> {
    forms.check_principal()?;
    let spec = forms.spec();
    let root = ew(&forms.e, &forms.g, |e, g| (e * g).sqrt());
    let ev_over = ew(&partial_v(&forms.e)?, &root, |x, r| x / r);
    let gu_over = ew(&partial_u(&forms.g)?, &root, |x, r| x / r);
    let s1 = partial_v(&ev_over)?;
    let s2 = partial_u(&gu_over)?;
    let res = ScalarGrid::from_fn(spec, |i, j| {
        let nu1 = forms.l.at(i, j) / forms.e.at(i, j);
        let nu2 = forms.n.at(i, j) / forms.g.at(i, j);
        nu1 * nu2 + (s1.at(i, j) + s2.at(i, j)) / (2.0 * root.at(i, j))
    });
    Ok(ResidualReport::new("gauss_principal", res, INTERIOR_MARGIN))
}

/// The factors `Psi1, Psi2` (principal-curvature route) and `Phi1, Phi2`
/// (Gauss/mean-curvature route), all equal to 1 at the base node.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalFactors {
    pub psi1: ScalarGrid,
    pub psi2: ScalarGrid,
    pub phi1: ScalarGrid,
    pub phi2: ScalarGrid,
    pub base: BaseIndex,
}

/// `exp(sign * (cumint_v(fv) + cumint_u(fu on the base row)))` when `along_u_first`
/// is false, and `exp(sign * (cumint_u(fu) + cumint_v(fv on the base column)))` otherwise.
fn path_exponential(
    fu: &ScalarGrid,
    fv: &ScalarGrid,
    base: BaseIndex,
    full_in_u: bool,
    sign: f64,
) -> Result<ScalarGrid> {
    let spec = fu.spec;
    if full_in_u {
        let full = cumulative_integral_u(fu, base)?;
        let col = crate::numerics::quad::cumulative_trapezoid(&fv.column(base.i), spec.dv, base.j)?;
        Ok(ScalarGrid::from_fn(spec, |i, j| (sign * (full.at(i, j) + col[j])).exp()))
    } else {
        let full = cumulative_integral_v(fv, base)?;
        let row = crate::numerics::quad::cumulative_trapezoid(fu.row(base.j), spec.du, base.i)?;
        Ok(ScalarGrid::from_fn(spec, |i, j| (sign * (full.at(i, j) + row[i])).exp()))
    }
}

/// Quotients `(nu)_x / (nu1 - nu2)` used throughout the canonical equations.
pub(crate) struct NuQuotients {
    pub q1u: ScalarGrid,
    pub q1v: ScalarGrid,
    pub q2u: ScalarGrid,
    pub q2v: ScalarGrid,
}

pub(crate) fn nu_quotients(nu1: &ScalarGrid, nu2: &ScalarGrid) -> Result<NuQuotients> {
    let diff = ew(nu1, nu2, |a, b| a - b);
    let q = |d: ScalarGrid| ew(&d, &diff, |x, y| x / y);
    Ok(NuQuotients {
        q1u: q(partial_u(nu1)?),
        q1v: q(partial_v(nu1)?),
        q2u: q(partial_u(nu2)?),
        q2v: q(partial_v(nu2)?),
    })
}

pub(crate) fn psi_factors(q: &NuQuotients, base: BaseIndex) -> Result<(ScalarGrid, ScalarGrid)> {
    let psi1 = path_exponential(&q.q1u, &q.q1v, base, false, -1.0)?;
    let psi2 = path_exponential(&q.q2u, &q.q2v, base, true, 1.0)?;
    Ok((psi1, psi2))
}

/// `H` and `sqrt(H^2 - K)` from `K, H`, failing on a non-positive discriminant.
pub(crate) fn mean_and_root(k: &ScalarGrid, h: &ScalarGrid) -> Result<ScalarGrid> {
    let spec = k.spec;
    let mut d = ScalarGrid::constant(spec, 0.0);
    for j in 0..spec.nv {
        for i in 0..spec.nu {
            let disc = h.at(i, j).powi(2) - k.at(i, j);
            if !(disc > 0.0) {
                return Err(Error::Discriminant { i, j, value: disc });
            }
            *d.at_mut(i, j) = disc.sqrt();
        }
    }
    Ok(d)
}

fn phi_factors(h: &ScalarGrid, d: &ScalarGrid, base: BaseIndex) -> Result<(ScalarGrid, ScalarGrid)> {
    let hu = ew(&partial_u(h)?, d, |x, y| x / (2.0 * y));
    let hv = ew(&partial_v(h)?, d, |x, y| x / (2.0 * y));
    let phi1 = path_exponential(&hu, &hv, base, false, -1.0)?;
    let phi2 = path_exponential(&hu, &hv, base, true, 1.0)?;
    Ok((phi1, phi2))
}

pub fn canonical_factors(inv: &InvariantGrid) -> Result<CanonicalFactors> {
    let (nu1, nu2) = inv.nu_fields()?;
    require_umbilic_free(&nu1, &nu2)?;
    let (k, h) = inv.kh_fields()?;
    let d = mean_and_root(&k, &h)?;
    let base = inv.base();
    let (psi1, psi2) = psi_factors(&nu_quotients(&nu1, &nu2)?, base)?;
    let (phi1, phi2) = phi_factors(&h, &d, base)?;
    Ok(CanonicalFactors { psi1, psi2, phi1, phi2, base })
}

/// Residual of the Gauss equation in canonical principal parameters written
/// with the factors `Psi1, Psi2`. KH-mode input is converted first.
pub fn gauss_residual_canonical(inv: &InvariantGrid) -> Result<ResidualReport> {
    let inv_nu = inv.to_nu_mode()?;
    let (nu1, nu2) = (inv_nu.field1(), inv_nu.field2());
    require_umbilic_free(nu1, nu2)?;
    let q = nu_quotients(nu1, nu2)?;
    let (psi1, psi2) = psi_factors(&q, inv_nu.base())?;
    let spec = nu1.spec;
    let t1 = ScalarGrid::from_fn(spec, |i, j| q.q1v.at(i, j) * psi1.at(i, j) / psi2.at(i, j));
    let t2 = ScalarGrid::from_fn(spec, |i, j| q.q2u.at(i, j) * psi2.at(i, j) / psi1.at(i, j));
    let t1v = partial_v(&t1)?;
    let t2u = partial_u(&t2)?;
    let (a, b) = (inv_nu.a(), inv_nu.b());
    let res = ScalarGrid::from_fn(spec, |i, j| {
        let lhs = nu1.at(i, j) * nu2.at(i, j) * psi1.at(i, j) * psi2.at(i, j);
        lhs - (t1v.at(i, j) / b - t2u.at(i, j) / a)
    });
    let mut report = ResidualReport::new("gauss_canonical_nu", res, INTERIOR_MARGIN);
    if inv.mode() == InvariantMode::Kh {
        report = report.with_note("converted from K, H with nu1 = H + sqrt(H^2 - K)");
    }
    Ok(report)
}

/// Residual of the Gauss equation in canonical principal parameters written
/// with `K, H` and the factors `Phi1, Phi2`.
///
/// A principal-curvature grid whose `nu1 < nu2` is first reflected in `u` so
/// that `nu1 = H + sqrt(H^2 - K)`; the residual is then reported on the
/// reflected grid.
pub fn gauss_residual_canonical_kh(inv: &InvariantGrid) -> Result<ResidualReport> {
    let reflected = inv.mode() == InvariantMode::Nu && inv.kh_reflects();
    let kh = inv.to_kh_mode()?;
    let (k, h) = (kh.field1(), kh.field2());
    let d = mean_and_root(k, h)?;
    let base = kh.base();
    let (phi1, phi2) = phi_factors(h, &d, base)?;
    let spec = k.spec;
    let hpd = ew(h, &d, |x, y| x + y);
    let hmd = ew(h, &d, |x, y| x - y);
    let hpd_v = partial_v(&hpd)?;
    let hmd_u = partial_u(&hmd)?;
    let t1 = ScalarGrid::from_fn(spec, |i, j| phi1.at(i, j) / phi2.at(i, j) * hpd_v.at(i, j) / d.at(i, j));
    let t2 = ScalarGrid::from_fn(spec, |i, j| phi2.at(i, j) / phi1.at(i, j) * hmd_u.at(i, j) / d.at(i, j));
    let t1v = partial_v(&t1)?;
    let t2u = partial_u(&t2)?;
    let (a, b) = (kh.a(), kh.b());
    let res = ScalarGrid::from_fn(spec, |i, j| {
        let lhs = 2.0 * k.at(i, j) / d.at(i, j) * phi1.at(i, j) * phi2.at(i, j);
        lhs - (t1v.at(i, j) / b - t2u.at(i, j) / a)
    });
    let mut report = ResidualReport::new("gauss_canonical_kh", res, INTERIOR_MARGIN);
    if reflected {
        report = report.with_note("evaluated in the chart reflected in u (nu1 < nu2 on input)");
    }
    Ok(report)
}

/// Refinement test of the canonical Gauss residual between the grid and its
/// every-other-node subgrid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FloorTest {
    pub fine: f64,
    pub coarse: f64,
    /// `coarse / fine`; about 4 for compatible data.
    pub ratio: f64,
    pub incompatible: bool,
}

pub fn compatibility_floor(inv: &InvariantGrid) -> Result<FloorTest> {
    let fine = gauss_residual_canonical(inv)?.max_abs;
    let coarse = gauss_residual_canonical(&inv.coarsened()?)?.max_abs;
    let ratio = if fine > 0.0 { coarse / fine } else { f64::INFINITY };
    Ok(FloorTest { fine, coarse, ratio, incompatible: fine > FLOOR_NOISE && ratio < FLOOR_RATIO })
}
