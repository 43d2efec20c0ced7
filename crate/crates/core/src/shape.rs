//! Pointwise surface invariants: fundamental forms, Gauss and mean curvature,
//! principal curvatures, normal curvature and umbilic detection.

use crate::catalog::{Jet2, Vec3};
use crate::error::{Error, Result};
use crate::numerics::{partial_u, partial_v, Grid2, ScalarGrid};

/// Relative tolerance on `|F|` and `|M|` against `sqrt(EG)` for a chart to count as principal.
pub const PRINCIPAL_TOL: f64 = 1e-10;
/// Default relative tolerance for umbilic detection.
pub const UMBILIC_TOL: f64 = 1e-8;
/// Length scale used to floor the umbilic threshold on nearly flat surfaces.
pub const UMBILIC_LENGTH_SCALE: f64 = 1.0;
/// Negative `H^2 - K` above `-DISCRIMINANT_CLAMP * scale^2` is treated as roundoff.
pub const DISCRIMINANT_CLAMP: f64 = 1e-14;

/// Coefficients of the first and second fundamental forms at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormCoefficients {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    /// `sqrt(EG - F^2)`
    pub w: f64,
}

impl FormCoefficients {
    pub fn new(e: f64, f: f64, g: f64, l: f64, m: f64, n: f64) -> Result<Self> {
        let det = e * g - f * f;
        if !(e > 0.0 && g > 0.0 && det > 0.0) {
            return Err(Error::Regularity(format!(
                "first fundamental form not positive definite (E = {e}, F = {f}, G = {g})"
            )));
        }
        Ok(Self { e, f, g, l, m, n, w: det.sqrt() })
    }

    pub fn is_principal(&self) -> bool {
        let scale = PRINCIPAL_TOL * (self.e * self.g).sqrt();
        self.f.abs() <= scale && self.m.abs() <= scale
    }
}

/// Unit normal `xu x xv / |xu x xv|`.
pub fn unit_normal(jet: &Jet2) -> Result<Vec3> {
    let c = jet.xu.cross(&jet.xv);
    let norm = c.norm();
    if !(norm > 1e-14 * jet.xu.norm() * jet.xv.norm()) || !norm.is_finite() {
        return Err(Error::Regularity("xu x xv vanishes".into()));
    }
    Ok(c / norm)
}

pub fn fundamental_forms(jet: &Jet2) -> Result<FormCoefficients> {
    let n = unit_normal(jet)?;
    FormCoefficients::new(
        jet.xu.dot(&jet.xu),
        jet.xu.dot(&jet.xv),
        jet.xv.dot(&jet.xv),
        jet.xuu.dot(&n),
        jet.xuv.dot(&n),
        jet.xvv.dot(&n),
    )
}

/// Gauss curvature, mean curvature and the two principal curvatures at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvaturePoint {
    pub k: f64,
    pub h: f64,
    pub nu1: f64,
    pub nu2: f64,
}

/// Curvatures from the form coefficients.
///
/// With `principal_chart` the labels follow the chart (`nu1 = L/E` along `u`,
/// `nu2 = N/G` along `v`); otherwise `nu1 = H + sqrt(H^2 - K)` is the larger one.
pub fn curvatures(forms: &FormCoefficients, principal_chart: bool) -> Result<CurvaturePoint> {
    let FormCoefficients { e, f, g, l, m, n, .. } = *forms;
    let det = e * g - f * f;
    let k = (l * n - m * m) / det;
    let h = (e * n - 2.0 * f * m + g * l) / (2.0 * det);
    if principal_chart {
        if !forms.is_principal() {
            return Err(Error::NotPrincipal { i: 0, j: 0, f: f.abs(), m: m.abs() });
        }
        return Ok(CurvaturePoint { k, h, nu1: l / e, nu2: n / g });
    }
    let d = discriminant_root(h, k).ok_or(Error::Discriminant { i: 0, j: 0, value: h * h - k })?;
    Ok(CurvaturePoint { k, h, nu1: h + d, nu2: h - d })
}

/// `sqrt(H^2 - K)` with roundoff-level negatives clamped to zero.
pub fn discriminant_root(h: f64, k: f64) -> Option<f64> {
    let disc = h * h - k;
    if disc >= 0.0 {
        Some(disc.sqrt())
    } else if disc >= -DISCRIMINANT_CLAMP * (h * h).max(k.abs()) {
        Some(0.0)
    } else {
        None
    }
}

/// Normal curvature of the tangent direction `(du, dv)`.
pub fn normal_curvature(forms: &FormCoefficients, direction: (f64, f64)) -> Result<f64> {
    let (a, b) = direction;
    if a == 0.0 && b == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    // scale out the magnitude so tiny or huge directions cannot underflow
    let s = a.abs().max(b.abs());
    let (a, b) = (a / s, b / s);
    let FormCoefficients { e, f, g, l, m, n, .. } = *forms;
    Ok((l * a * a + 2.0 * m * a * b + n * b * b) / (e * a * a + 2.0 * f * a * b + g * b * b))
}

/// Forms sampled on a grid, one scalar field per coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct FormFields {
    pub e: ScalarGrid,
    pub f: ScalarGrid,
    pub g: ScalarGrid,
    pub l: ScalarGrid,
    pub m: ScalarGrid,
    pub n: ScalarGrid,
}

impl FormFields {
    pub fn from_grid(forms: &Grid2<FormCoefficients>) -> Self {
        Self {
            e: forms.map(|c| c.e),
            f: forms.map(|c| c.f),
            g: forms.map(|c| c.g),
            l: forms.map(|c| c.l),
            m: forms.map(|c| c.m),
            n: forms.map(|c| c.n),
        }
    }

    /// Principal-chart fields with `F = M = 0`.
    pub fn principal(e: ScalarGrid, g: ScalarGrid, l: ScalarGrid, n: ScalarGrid) -> Result<Self> {
        for other in [&g, &l, &n] {
            crate::numerics::grid::check_same_shape(&e.spec, &other.spec)?;
        }
        let zero = ScalarGrid::constant(e.spec, 0.0);
        Ok(Self { f: zero.clone(), m: zero, e, g, l, n })
    }

    pub fn spec(&self) -> crate::numerics::GridSpec {
        self.e.spec
    }

    pub fn at(&self, i: usize, j: usize) -> Result<FormCoefficients> {
        FormCoefficients::new(
            *self.e.at(i, j),
            *self.f.at(i, j),
            *self.g.at(i, j),
            *self.l.at(i, j),
            *self.m.at(i, j),
            *self.n.at(i, j),
        )
    }

    /// First node violating the principality tolerance, if any.
    pub fn check_principal(&self) -> Result<()> {
        let spec = self.spec();
        for j in 0..spec.nv {
            for i in 0..spec.nu {
                let (e, g) = (*self.e.at(i, j), *self.g.at(i, j));
                let (f, m) = (self.f.at(i, j).abs(), self.m.at(i, j).abs());
                let scale = PRINCIPAL_TOL * (e * g).sqrt();
                if f > scale || m > scale {
                    return Err(Error::NotPrincipal { i, j, f, m });
                }
            }
        }
        Ok(())
    }

    pub fn is_principal(&self) -> bool {
        self.check_principal().is_ok()
    }
}

pub fn forms_grid(jets: &Grid2<Jet2>) -> Result<Grid2<FormCoefficients>> {
    Grid2::try_from_fn(jets.spec, |i, j| {
        fundamental_forms(jets.at(i, j)).map_err(|e| match e {
            Error::Regularity(msg) => Error::Regularity(format!("node ({i}, {j}): {msg}")),
            other => other,
        })
    })
}

pub fn curvature_grid(forms: &Grid2<FormCoefficients>, principal_chart: bool) -> Result<Grid2<CurvaturePoint>> {
    Grid2::try_from_fn(forms.spec, |i, j| {
        curvatures(forms.at(i, j), principal_chart).map_err(|e| match e {
            Error::NotPrincipal { f, m, .. } => Error::NotPrincipal { i, j, f, m },
            Error::Discriminant { value, .. } => Error::Discriminant { i, j, value },
            other => other,
        })
    })
}

/// Geodesic curvatures `(gamma1, gamma2)` of the `u`- and `v`-parametric lines
/// of a principal chart.
pub fn geodesic_curvatures_of_parametric_lines(forms: &FormFields) -> Result<(ScalarGrid, ScalarGrid)> {
    forms.check_principal()?;
    let ev = partial_v(&forms.e)?;
    let gu = partial_u(&forms.g)?;
    let spec = forms.spec();
    let gamma1 = ScalarGrid::from_fn(spec, |i, j| {
        let (e, g) = (*forms.e.at(i, j), *forms.g.at(i, j));
        -ev.at(i, j) / (2.0 * e * g.sqrt())
    });
    let gamma2 = ScalarGrid::from_fn(spec, |i, j| {
        let (e, g) = (*forms.e.at(i, j), *forms.g.at(i, j));
        gu.at(i, j) / (2.0 * g * e.sqrt())
    });
    Ok((gamma1, gamma2))
}

/// Result of scanning a grid for umbilical nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct UmbilicReport {
    pub mask: Grid2<bool>,
    pub count: usize,
    /// Node with the smallest relative gap `|nu1 - nu2| / threshold-scale`.
    pub worst: (usize, usize),
    /// `|nu1 - nu2|` at the worst node.
    pub worst_gap: f64,
}

impl UmbilicReport {
    pub fn is_clear(&self) -> bool {
        self.count == 0
    }

    pub fn to_error(&self) -> Option<Error> {
        (self.count > 0).then_some(Error::Umbilic {
            count: self.count,
            i: self.worst.0,
            j: self.worst.1,
            gap: self.worst_gap,
        })
    }
}

/// Flag nodes where `|nu1 - nu2| < tol * max(1/l, |nu1|, |nu2|)`.
pub fn detect_umbilics(nu1: &ScalarGrid, nu2: &ScalarGrid, tol: f64) -> Result<UmbilicReport> {
    let spec = nu1.spec;
    crate::numerics::grid::check_same_shape(&spec, &nu2.spec)?;
    let mut count = 0;
    let mut worst = (0, 0);
    let mut worst_rel = f64::INFINITY;
    let mut worst_gap = f64::INFINITY;
    let mask = Grid2::from_fn(spec, |i, j| {
        let (a, b) = (*nu1.at(i, j), *nu2.at(i, j));
        let scale = (1.0 / UMBILIC_LENGTH_SCALE).max(a.abs()).max(b.abs());
        let gap = (a - b).abs();
        let rel = gap / scale;
        if rel < worst_rel || rel.is_nan() {
            worst_rel = rel;
            worst = (i, j);
            worst_gap = gap;
        }
        let flagged = !(gap >= tol * scale);
        count += flagged as usize;
        flagged
    });
    Ok(UmbilicReport { mask, count, worst, worst_gap })
}

/// Second-order finite-difference jets of sampled positions.
pub fn jets_from_positions(positions: &Grid2<Vec3>) -> Result<Grid2<Jet2>> {
    let spec = positions.spec;
    let mut comps: Vec<[ScalarGrid; 6]> = Vec::with_capacity(3);
    for c in 0..3 {
        let x = positions.map(|p| p[c]);
        let xu = partial_u(&x)?;
        let xv = partial_v(&x)?;
        let xuu = crate::numerics::second_u(&x)?;
        let xvv = crate::numerics::second_v(&x)?;
        let xuv = partial_v(&xu)?;
        comps.push([x, xu, xv, xuu, xuv, xvv]);
    }
    let pick =
        |k: usize, i: usize, j: usize| Vec3::new(*comps[0][k].at(i, j), *comps[1][k].at(i, j), *comps[2][k].at(i, j));
    Ok(Grid2::from_fn(spec, |i, j| Jet2 {
        x: pick(0, i, j),
        xu: pick(1, i, j),
        xv: pick(2, i, j),
        xuu: pick(3, i, j),
        xuv: pick(4, i, j),
        xvv: pick(5, i, j),
    }))
}

/// Forms and curvatures of a sampled chart.
#[derive(Debug, Clone)]
pub struct SurfaceAnalysis {
    pub forms: Grid2<FormCoefficients>,
    pub curvatures: Grid2<CurvaturePoint>,
    /// Whether the chart passed the principality test at every node.
    pub principal: bool,
}

impl SurfaceAnalysis {
    /// Analyse jets; the chart is treated as principal when every node passes
    /// the principality tolerance.
    pub fn from_jets(jets: &Grid2<Jet2>) -> Result<Self> {
        let forms = forms_grid(jets)?;
        let principal = forms.values.iter().all(FormCoefficients::is_principal);
        let curvatures = curvature_grid(&forms, principal)?;
        Ok(Self { forms, curvatures, principal })
    }

    pub fn fields(&self) -> FormFields {
        FormFields::from_grid(&self.forms)
    }

    pub fn nu1(&self) -> ScalarGrid {
        self.curvatures.map(|c| c.nu1)
    }

    pub fn nu2(&self) -> ScalarGrid {
        self.curvatures.map(|c| c.nu2)
    }

    pub fn gauss(&self) -> ScalarGrid {
        self.curvatures.map(|c| c.k)
    }

    pub fn mean(&self) -> ScalarGrid {
        self.curvatures.map(|c| c.h)
    }

    pub fn umbilics(&self, tol: f64) -> Result<UmbilicReport> {
        detect_umbilics(&self.nu1(), &self.nu2(), tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CatalogEntry;
    use crate::numerics::GridSpec;
    use approx::assert_abs_diff_eq;

    fn forms_at(entry: &CatalogEntry, u: f64, v: f64) -> FormCoefficients {
        fundamental_forms(&entry.evaluate_jet(u, v).unwrap()).unwrap()
    }

    #[test]
    fn plane_forms() {
        let c = forms_at(&CatalogEntry::plane(), 0.3, -0.7);
        assert_eq!((c.e, c.f, c.g, c.l, c.m, c.n), (1.0, 0.0, 1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn torus_forms_and_curvatures_at_origin() {
        let c = forms_at(&CatalogEntry::torus(2.0, 1.0).unwrap(), 0.0, 0.0);
        let got = [c.e, c.f, c.g, c.l, c.m, c.n];
        for (g, w) in got.iter().zip([1.0, 0.0, 9.0, 1.0, 0.0, 3.0]) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-12);
        }
        let k = curvatures(&c, true).unwrap();
        assert_abs_diff_eq!(k.nu1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.nu2, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.k, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.h, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn catenoid_forms_and_curvatures() {
        let cat = CatalogEntry::catenoid(1.0).unwrap();
        for &(u, v) in &[(0.0, 0.0), (0.7, 1.3), (-0.9, 2.8)] {
            let c = forms_at(&cat, u, v);
            let ch2 = u.cosh().powi(2);
            assert_abs_diff_eq!(c.e, ch2, epsilon = 1e-12);
            assert_abs_diff_eq!(c.g, ch2, epsilon = 1e-12);
            assert_abs_diff_eq!(c.f, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.l, -1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.m, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.n, 1.0, epsilon = 1e-12);
            let k = curvatures(&c, true).unwrap();
            assert_abs_diff_eq!(k.h, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(k.k, -1.0 / ch2 / ch2, epsilon = 1e-12);
            assert_abs_diff_eq!(k.nu1, -1.0 / ch2, epsilon = 1e-12);
            assert_abs_diff_eq!(k.nu2, 1.0 / ch2, epsilon = 1e-12);
        }
    }

    #[test]
    fn cylinder_curvatures_follow_the_fixed_orientation() {
        // n = xu x xv points outward for (cos u, sin u, v), so the circle curves away from it
        let c = forms_at(&CatalogEntry::cylinder(1.0).unwrap(), 0.4, 0.0);
        let k = curvatures(&c, true).unwrap();
        assert_abs_diff_eq!(k.k, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.nu1.abs(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.nu2, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.h.abs(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(normal_curvature(&c, (1.0, 0.0)).unwrap(), k.nu1, epsilon = 1e-15);
        assert_abs_diff_eq!(normal_curvature(&c, (0.0, 1.0)).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn normal_curvature_examples() {
        let c = forms_at(&CatalogEntry::torus(2.0, 1.0).unwrap(), 0.0, 0.0);
        assert_abs_diff_eq!(normal_curvature(&c, (1.0, 1.0)).unwrap(), 0.4, epsilon = 1e-12);
        let a = normal_curvature(&c, (0.3, -1.1)).unwrap();
        let b = normal_curvature(&c, (7.0 * 0.3, -7.0 * 1.1)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(normal_curvature(&c, (0.0, 0.0)), Err(Error::DegenerateDirection)));
    }

    #[test]
    fn non_principal_chart_is_rejected_when_flagged_principal() {
        let monge = CatalogEntry::monge(1.0, -0.5, 0.3, 0.0).unwrap();
        let c = forms_at(&monge, 0.2, 0.1);
        assert!(matches!(curvatures(&c, true), Err(Error::NotPrincipal { .. })));
        let k = curvatures(&c, false).unwrap();
        assert!(k.nu1 >= k.nu2);
        assert_abs_diff_eq!(k.nu1 * k.nu2, k.k, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_jet_is_a_regularity_error() {
        let mut jet = CatalogEntry::plane().evaluate_jet(0.0, 0.0).unwrap();
        jet.xv = jet.xu;
        assert!(matches!(fundamental_forms(&jet), Err(Error::Regularity(_))));
    }

    fn analysis(entry: &CatalogEntry, spec: GridSpec) -> SurfaceAnalysis {
        SurfaceAnalysis::from_jets(&entry.sample_surface(&spec).unwrap()).unwrap()
    }

    #[test]
    fn geodesic_curvatures_of_torus_and_catenoid() {
        let spec = GridSpec::from_ranges((-1.0, 1.0, 201), (0.0, 1.0, 11)).unwrap();
        let torus = analysis(&CatalogEntry::torus(2.0, 1.0).unwrap(), spec);
        let (g1, g2) = geodesic_curvatures_of_parametric_lines(&torus.fields()).unwrap();
        assert!(g1.max_abs() < 1e-12);
        let exact = ScalarGrid::sample(spec, |u, _| -u.sin() / (2.0 + u.cos()));
        assert!(g2.max_abs_diff(&exact) < 1e-3);

        let cat = analysis(&CatalogEntry::catenoid(1.0).unwrap(), spec);
        let (g1, g2) = geodesic_curvatures_of_parametric_lines(&cat.fields()).unwrap();
        assert!(g1.max_abs() < 1e-12);
        let exact = ScalarGrid::sample(spec, |u, _| u.sinh() / u.cosh().powi(2));
        assert!(g2.max_abs_diff(&exact) < 1e-3);

        let cyl = analysis(&CatalogEntry::cylinder(1.0).unwrap(), spec);
        let (g1, g2) = geodesic_curvatures_of_parametric_lines(&cyl.fields()).unwrap();
        assert!(g1.max_abs() + g2.max_abs() < 1e-12);
    }

    #[test]
    fn umbilic_detection() {
        let spec = GridSpec::from_ranges((-1.0, 1.0, 9), (0.0, 6.0, 9)).unwrap();
        let sphere = analysis(&CatalogEntry::sphere(1.0).unwrap(), spec);
        assert_eq!(sphere.umbilics(UMBILIC_TOL).unwrap().count, 81);
        let plane = analysis(&CatalogEntry::plane(), spec);
        let report = plane.umbilics(UMBILIC_TOL).unwrap();
        assert_eq!(report.count, 81);
        assert!(report.to_error().is_some());
        let spec = GridSpec::from_ranges((0.0, std::f64::consts::TAU, 33), (0.0, std::f64::consts::TAU, 33)).unwrap();
        let torus = analysis(&CatalogEntry::torus(2.0, 1.0).unwrap(), spec);
        let report = torus.umbilics(UMBILIC_TOL).unwrap();
        assert!(report.is_clear());
        assert!(report.worst_gap >= 2.0 / 3.0 - 1e-12);
    }

    #[test]
    fn finite_difference_jets_reproduce_analytic_forms() {
        let spec = GridSpec::from_ranges((-1.0, 1.0, 129), (0.0, 3.0, 129)).unwrap();
        let cat = CatalogEntry::catenoid(1.0).unwrap();
        let jets = cat.sample_surface(&spec).unwrap();
        let positions = jets.map(|j| j.x);
        let fd = jets_from_positions(&positions).unwrap();
        let err = fd
            .values
            .iter()
            .zip(&jets.values)
            .fold(0.0f64, |m, (a, b)| m.max((a.xu - b.xu).amax()).max((a.xv - b.xv).amax()));
        assert!(err < 1e-3, "{err}");
    }
}
