//! Residuals for special classes: strongly regular Weingarten surfaces,
//! constant mean curvature, minimal and flat surfaces.

use serde::Serialize;

use crate::compatibility::{ResidualReport, INTERIOR_MARGIN};
use crate::error::{Error, Result};
use crate::numerics::diff::{derivative4, second_derivative};
use crate::numerics::interp::cubic_uniform;
use crate::numerics::quad::cumulative_integral4;
use crate::numerics::{partial_u, partial_v, second_u, second_v, ScalarGrid};

/// Smallest `H^2 - K` accepted by [`cmc_residual`].
pub const CMC_DISCRIMINANT_TOL: f64 = 1e-12;

/// `nu1 = f(nu)`, `nu2 = g(nu)` with `f, g` sampled on `t0 + k dt`.
///
/// `coef_a` and `coef_b` are the constants multiplying the `v` and `u`
/// brackets; for a canonical grid with constants `a, b` they are `1/b` and
/// `1/a`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeingartenData {
    pub t0: f64,
    pub dt: f64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub nu: ScalarGrid,
    pub coef_a: f64,
    pub coef_b: f64,
    pub nu0: f64,
}

impl WeingartenData {
    /// Sample `f` and `g` at `count` points of `[t_min, t_max]`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_functions(
        f: impl Fn(f64) -> f64,
        g: impl Fn(f64) -> f64,
        interval: (f64, f64, usize),
        nu: ScalarGrid,
        coef_a: f64,
        coef_b: f64,
        nu0: f64,
    ) -> Result<Self> {
        let (lo, hi, count) = interval;
        if count < 5 || !(hi > lo) {
            return Err(Error::Dimension(format!(
                "need at least 5 samples on an interval, got {count} on [{lo}, {hi}]"
            )));
        }
        let dt = (hi - lo) / (count - 1) as f64;
        let ts: Vec<f64> = (0..count).map(|k| lo + k as f64 * dt).collect();
        Ok(Self {
            t0: lo,
            dt,
            f: ts.iter().map(|&t| f(t)).collect(),
            g: ts.iter().map(|&t| g(t)).collect(),
            nu,
            coef_a,
            coef_b,
            nu0,
        })
    }

    fn t_max(&self) -> f64 {
        self.t0 + (self.f.len() - 1) as f64 * self.dt
    }

    fn validate(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.f.len() != self.g.len() || self.f.len() < 5 {
            return Err(Error::Dimension("f and g need the same number (at least 5) of samples".into()));
        }
        if !(self.coef_a > 0.0 && self.coef_b > 0.0) {
            return Err(Error::Positivity(format!("A = {}, B = {}", self.coef_a, self.coef_b)));
        }
        if let Some(k) = self.f.iter().zip(&self.g).position(|(f, g)| !(f - g > 0.0)) {
            return Err(Error::Range(format!("f - g must be positive, fails at t = {}", self.t0 + k as f64 * self.dt)));
        }
        let fp = derivative4(&self.f, self.dt)?;
        let gp = derivative4(&self.g, self.dt)?;
        if let Some(k) = fp.iter().zip(&gp).position(|(a, b)| a * b == 0.0) {
            return Err(Error::Range(format!("f' g' vanishes at t = {}", self.t0 + k as f64 * self.dt)));
        }
        let (lo, hi) = (self.t0, self.t_max());
        let slack = 1e-12 * (hi - lo);
        for &x in self.nu.values.iter().chain(std::iter::once(&self.nu0)) {
            if !(x >= lo - slack && x <= hi + slack) {
                return Err(Error::Range(format!("nu = {x} outside the sampled interval [{lo}, {hi}]")));
            }
        }
        Ok((fp, gp))
    }
}

/// Residual of the Weingarten form of the Gauss equation:
///
/// `A {f' nu_vv + (f'' - 2f'^2/(f-g)) nu_v^2} exp(2 int g'/(g-f))
///  - B {g' nu_uu + (g'' + 2g'^2/(f-g)) nu_u^2} exp(2 int f'/(f-g)) - fg(f-g)`
///
/// with both integrals taken from `nu0` to `nu`. Nodes where `nu_u nu_v`
/// vanishes are counted in a note rather than rejected.
pub fn weingarten_residual(data: &WeingartenData) -> Result<ResidualReport> {
    let (fp, gp) = data.validate()?;
    let fpp = second_derivative(&data.f, data.dt)?;
    let gpp = second_derivative(&data.g, data.dt)?;
    let n = data.f.len();
    let ig: Vec<f64> = (0..n).map(|k| gp[k] / (data.g[k] - data.f[k])).collect();
    let i_f: Vec<f64> = (0..n).map(|k| fp[k] / (data.f[k] - data.g[k])).collect();
    let ig = cumulative_integral4(&ig, data.dt, 0)?;
    let i_f = cumulative_integral4(&i_f, data.dt, 0)?;
    let at = |s: &[f64], t: f64| cubic_uniform(s, data.t0, data.dt, t);
    let (ig0, if0) = (at(&ig, data.nu0), at(&i_f, data.nu0));

    let nu = &data.nu;
    let (nu_u, nu_v) = (partial_u(nu)?, partial_v(nu)?);
    let (nu_uu, nu_vv) = (second_u(nu)?, second_v(nu)?);
    let spec = nu.spec;
    let mut flat = 0usize;
    let scale = nu.max_abs().max(1.0);
    let res = ScalarGrid::from_fn(spec, |i, j| {
        let t = *nu.at(i, j);
        let (f, g) = (at(&data.f, t), at(&data.g, t));
        let (f1, g1) = (at(&fp, t), at(&gp, t));
        let (f2, g2) = (at(&fpp, t), at(&gpp, t));
        let (nu_u, nu_v) = (*nu_u.at(i, j), *nu_v.at(i, j));
        if (nu_u * nu_v).abs() <= 1e-12 * scale * scale {
            flat += 1;
        }
        let v_part = f1 * nu_vv.at(i, j) + (f2 - 2.0 * f1 * f1 / (f - g)) * nu_v * nu_v;
        let u_part = g1 * nu_uu.at(i, j) + (g2 + 2.0 * g1 * g1 / (f - g)) * nu_u * nu_u;
        let lhs = data.coef_a * v_part * (2.0 * (at(&ig, t) - ig0)).exp()
            - data.coef_b * u_part * (2.0 * (at(&i_f, t) - if0)).exp();
        lhs - f * g * (f - g)
    });
    let mut report = ResidualReport::new("weingarten", res, INTERIOR_MARGIN);
    if flat > 0 {
        report = report.with_note(format!(
            "nu_u nu_v vanishes at {flat} of {} nodes; the data are not strongly regular there",
            spec.len()
        ));
    }
    Ok(report)
}

fn weighted_laplacian(g: &ScalarGrid, a: f64, b: f64) -> Result<ScalarGrid> {
    second_u(g)?.zip_map(&second_v(g)?, |x, y| x / a + y / b)
}

fn check_constants(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Positivity(format!("a = {a}, b = {b}")));
    }
    Ok(())
}

fn note_scaling(report: ResidualReport, a: f64, b: f64) -> ResidualReport {
    if (a - 1.0).abs() <= 1e-12 && (b - 1.0).abs() <= 1e-12 {
        report
    } else {
        report.with_note(format!(
            "Laplacian taken as (1/a) d_uu + (1/b) d_vv with a = {a}, b = {b}, i.e. after rescaling u, v so that a = b = 1"
        ))
    }
}

/// Residual of `(1/a) d_uu + (1/b) d_vv log(H^2 - K) = 4K / sqrt(H^2 - K)` for
/// constant `H`, where `a, b` are the constants of the `K, H` description.
pub fn cmc_residual(k: &ScalarGrid, h: f64, a: f64, b: f64) -> Result<ResidualReport> {
    check_constants(a, b)?;
    let spec = k.spec;
    for j in 0..spec.nv {
        for i in 0..spec.nu {
            let disc = h * h - k.at(i, j);
            if !(disc > CMC_DISCRIMINANT_TOL) {
                return Err(Error::Discriminant { i, j, value: disc });
            }
        }
    }
    let log_disc = k.map(|k| (h * h - k).ln());
    let lap = weighted_laplacian(&log_disc, a, b)?;
    let res = ScalarGrid::from_fn(spec, |i, j| {
        let k = *k.at(i, j);
        lap.at(i, j) - 4.0 * k / (h * h - k).sqrt()
    });
    Ok(note_scaling(ResidualReport::new("cmc", res, INTERIOR_MARGIN), a, b))
}

/// Residual of the natural equation of minimal surfaces
/// `(1/a) (log nu)_uu + (1/b) (log nu)_vv + 2 nu = 0`, `nu > 0` the positive
/// principal curvature.
pub fn minimal_natural_residual(nu: &ScalarGrid, a: f64, b: f64) -> Result<ResidualReport> {
    check_constants(a, b)?;
    if let Some(k) = nu.values.iter().position(|x| !(*x > 0.0)) {
        return Err(Error::Positivity(format!(
            "nu = {} at node ({}, {})",
            nu.values[k],
            k % nu.spec.nu,
            k / nu.spec.nu
        )));
    }
    let lap = weighted_laplacian(&nu.map(|x| x.ln()), a, b)?;
    let res = lap.zip_map(nu, |l, n| l + 2.0 * n)?;
    Ok(note_scaling(ResidualReport::new("minimal_natural", res, INTERIOR_MARGIN), a, b))
}

/// Result of [`flat_characterization`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlatFit {
    /// `(1/H)_vv`.
    pub report: ResidualReport,
    /// Slope of `1/H` against `v` for every `u`.
    pub f: Vec<f64>,
    /// Intercept of `1/H` at `v = 0` for every `u`.
    pub g: Vec<f64>,
    /// RMS of the line-fit residuals over the whole grid.
    pub fit_rms: f64,
}

/// Summary of a [`FlatFit`] for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatSummary {
    pub fit_rms: f64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl FlatFit {
    pub fn summary(&self) -> FlatSummary {
        FlatSummary { fit_rms: self.fit_rms, f: self.f.clone(), g: self.g.clone() }
    }
}

/// Test `1/H = f(u) v + g(u)`: the residual `(1/H)_vv` and an ordinary
/// least-squares line in `v` for every `u`.
pub fn flat_characterization(h: &ScalarGrid) -> Result<FlatFit> {
    let spec = h.spec;
    if let Some(k) = h.values.iter().position(|x| !(x.abs() > f64::MIN_POSITIVE) || !x.is_finite()) {
        return Err(Error::ZeroMeanCurvature { i: k % spec.nu, j: k / spec.nu });
    }
    let inv = h.map(|x| 1.0 / x);
    let report = ResidualReport::new("flat", second_v(&inv)?, INTERIOR_MARGIN);
    let vs = spec.vs();
    let v_mean = vs.iter().sum::<f64>() / vs.len() as f64;
    let sxx: f64 = vs.iter().map(|v| (v - v_mean).powi(2)).sum();
    let (mut f, mut g) = (Vec::with_capacity(spec.nu), Vec::with_capacity(spec.nu));
    let mut sq = 0.0;
    for i in 0..spec.nu {
        let col = inv.column(i);
        let y_mean = col.iter().sum::<f64>() / col.len() as f64;
        let sxy: f64 = vs.iter().zip(&col).map(|(v, y)| (v - v_mean) * (y - y_mean)).sum();
        let slope = sxy / sxx;
        let intercept = y_mean - slope * v_mean;
        sq += vs.iter().zip(&col).map(|(v, y)| (y - slope * v - intercept).powi(2)).sum::<f64>();
        f.push(slope);
        g.push(intercept);
    }
    Ok(FlatFit { report, f, g, fit_rms: (sq / spec.len() as f64).sqrt() })
}
