//! Reconstruction of a surface from its invariants in canonical principal
//! parameters, and rigid alignment of the results.

mod align;
mod frame;

pub use align::{align_points, align_rigid, RigidAlignment};
pub use frame::{integrate_frame, path_consistency_diagnostic, FrameState, PathOrder, SurfaceMesh, FRAME_DRIFT_TOL};

use crate::canonical::InvariantGrid;
use crate::compatibility::{compatibility_floor, nu_quotients, psi_factors, FloorTest, INTERIOR_MARGIN};
use crate::error::{Error, Result};
use crate::numerics::ScalarGrid;
use crate::shape::{detect_umbilics, forms_grid, jets_from_positions, FormFields, UMBILIC_TOL};

/// `E = a Psi1^2`, `G = b Psi2^2`, `L = nu1 E`, `N = nu2 G` with `F = M = 0`.
/// `K, H` input is converted to principal curvatures first.
pub fn coefficients_from_invariants(inv: &InvariantGrid) -> Result<FormFields> {
    let inv = inv.to_nu_mode()?;
    let (nu1, nu2) = (inv.field1(), inv.field2());
    if let Some(e) = detect_umbilics(nu1, nu2, UMBILIC_TOL)?.to_error() {
        return Err(e);
    }
    let (psi1, psi2) = psi_factors(&nu_quotients(nu1, nu2)?, inv.base())?;
    let e = psi1.map(|p| inv.a() * p * p);
    let g = psi2.map(|p| inv.b() * p * p);
    let l = nu1.zip_map(&e, |a, b| a * b)?;
    let n = nu2.zip_map(&g, |a, b| a * b)?;
    FormFields::principal(e, g, l, n)
}

/// Options for [`reconstruct`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReconstructOptions {
    /// Refuse input whose Gauss residual does not decrease under refinement.
    pub strict: bool,
    pub init: FrameState,
    pub order: PathOrder,
}

/// How well the reconstructed mesh reproduces the coefficients it was built
/// from. Errors are interior maxima, the mesh being differenced with
/// second-order stencils.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Verification {
    pub e: f64,
    pub g: f64,
    pub l: f64,
    pub n: f64,
    /// `|E(base) - a|` and `|G(base) - b|` for the differenced mesh, in the
    /// principal-curvature normalisation.
    pub base_e: f64,
    pub base_g: f64,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub mesh: SurfaceMesh,
    pub forms: FormFields,
    /// `None` when the grid is too small to coarsen.
    pub floor: Option<FloorTest>,
    pub verification: Verification,
    pub warnings: Vec<String>,
}

fn interior_max_diff(a: &ScalarGrid, b: &ScalarGrid) -> f64 {
    let spec = a.spec;
    let m = INTERIOR_MARGIN.min((spec.nu - 1) / 2).min((spec.nv - 1) / 2);
    let mut worst: f64 = 0.0;
    for j in m..spec.nv - m {
        for i in m..spec.nu - m {
            worst = worst.max((a.at(i, j) - b.at(i, j)).abs());
        }
    }
    worst
}

/// Forms of the mesh by differencing, compared with the coefficients used to
/// build it.
pub fn verify_reconstruction(mesh: &SurfaceMesh, forms: &FormFields, inv: &InvariantGrid) -> Result<Verification> {
    let measured = FormFields::from_grid(&forms_grid(&jets_from_positions(&mesh.positions)?)?);
    let inv = inv.to_nu_mode()?;
    let base = inv.base();
    Ok(Verification {
        e: interior_max_diff(&measured.e, &forms.e),
        g: interior_max_diff(&measured.g, &forms.g),
        l: interior_max_diff(&measured.l, &forms.l),
        n: interior_max_diff(&measured.n, &forms.n),
        base_e: (measured.e.at(base.i, base.j) - inv.a()).abs(),
        base_g: (measured.g.at(base.i, base.j) - inv.b()).abs(),
    })
}

/// Build the surface whose invariants in canonical principal parameters are
/// the given grid.
///
/// The Gauss residual is first tested under refinement. Incompatible input is
/// an error with `strict` and a warning otherwise.
pub fn reconstruct(inv: &InvariantGrid, options: &ReconstructOptions) -> Result<Reconstruction> {
    let mut warnings = Vec::new();
    let floor = match inv.coarsened() {
        Ok(c) if c.spec().nu >= 3 && c.spec().nv >= 3 => Some(compatibility_floor(inv)?),
        _ => {
            warnings.push("grid too small for the refinement test".to_string());
            None
        }
    };
    if let Some(f) = floor.filter(|f| f.incompatible) {
        if options.strict {
            return Err(Error::IncompatibleInvariants { ratio: f.ratio });
        }
        warnings.push(format!(
            "Gauss residual {:.3e} decreased by only {:.3} under refinement; the invariants look incompatible",
            f.fine, f.ratio
        ));
    }
    let forms = coefficients_from_invariants(inv)?;
    let mesh = integrate_frame(&forms, &options.init, inv.base(), options.order)?;
    let verification = verify_reconstruction(&mesh, &forms, inv)?;
    Ok(Reconstruction { mesh, forms, floor, verification, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{BaseIndex, GridSpec};

    fn catenoid(n: usize) -> InvariantGrid {
        let spec = GridSpec::from_ranges((-1.0, 1.0, n), (0.0, std::f64::consts::PI, n)).unwrap();
        let nu1 = ScalarGrid::sample(spec, |u, _| -1.0 / u.cosh().powi(2));
        let nu2 = nu1.map(|x| -x);
        InvariantGrid::from_nu(nu1, nu2, 1.0, 1.0, spec.center()).unwrap()
    }

    #[test]
    fn constant_invariants_give_constant_coefficients() {
        let spec = GridSpec::from_ranges((0.0, 1.0, 5), (0.0, 1.0, 5)).unwrap();
        let inv = InvariantGrid::from_nu(
            ScalarGrid::constant(spec, 1.0),
            ScalarGrid::constant(spec, 0.0),
            1.0,
            1.0,
            BaseIndex { i: 0, j: 0 },
        )
        .unwrap();
        let f = coefficients_from_invariants(&inv).unwrap();
        assert_eq!(f.e.max_abs_diff(&ScalarGrid::constant(spec, 1.0)), 0.0);
        assert_eq!(f.l.max_abs_diff(&ScalarGrid::constant(spec, 1.0)), 0.0);
        assert_eq!(f.n.max_abs(), 0.0);
    }

    #[test]
    fn catenoid_coefficients_converge() {
        let err = |n| {
            let inv = catenoid(n);
            let f = coefficients_from_invariants(&inv).unwrap();
            let e = ScalarGrid::sample(inv.spec(), |u, _| u.cosh().powi(2));
            let l = f.l.max_abs_diff(&ScalarGrid::constant(inv.spec(), -1.0));
            (f.e.max_abs_diff(&e), l)
        };
        let (e33, l33) = err(33);
        let (e65, _) = err(65);
        assert!((3.0..5.0).contains(&(e33 / e65)), "{e33} {e65}");
        assert!(l33 < 1e-2);
    }

    #[test]
    fn catenoid_reconstruction_is_minimal() {
        let inv = catenoid(65);
        let rec = reconstruct(&inv, &ReconstructOptions::default()).unwrap();
        assert!(rec.warnings.is_empty(), "{:?}", rec.warnings);
        assert!(rec.verification.e < 1e-2 && rec.verification.base_e < 1e-3, "{:?}", rec.verification);
        let ratio = {
            let f = path_consistency_diagnostic(&rec.forms, &FrameState::default(), inv.base()).unwrap();
            let coarse = catenoid(33);
            let fc = coefficients_from_invariants(&coarse).unwrap();
            path_consistency_diagnostic(&fc, &FrameState::default(), coarse.base()).unwrap() / f
        };
        assert!(ratio > 3.0, "{ratio}");
    }

    #[test]
    fn strict_mode_rejects_incompatible_input() {
        let inv = catenoid(65);
        let spec = inv.spec();
        let nu1 = ScalarGrid::from_fn(spec, |i, j| {
            inv.field1().at(i, j) + 0.1 * (3.0 * spec.u(i)).sin() * (3.0 * spec.v(j)).sin()
        });
        let bad = inv.with_fields(nu1, inv.field2().clone()).unwrap();
        let strict = ReconstructOptions { strict: true, ..Default::default() };
        assert!(matches!(reconstruct(&bad, &strict), Err(Error::IncompatibleInvariants { .. })));
        let lenient = reconstruct(&bad, &ReconstructOptions::default()).unwrap();
        assert_eq!(lenient.warnings.len(), 1);
    }
}
