//! Residuals of the minimal, constant-mean-curvature, flat and Weingarten
//! specializations.
//!
//! cargo run --example special_cases

use std::f64::consts::PI;

use surface_invariants::canonical::CanonicalConfig;
use surface_invariants::catalog::CatalogEntry;
use surface_invariants::numerics::{GridSpec, ScalarGrid};
use surface_invariants::pipeline::{analyze_surface, canonicalize};
use surface_invariants::special::{
    cmc_residual, flat_characterization, minimal_natural_residual, weingarten_residual, WeingartenData,
};

fn main() -> surface_invariants::error::Result<()> {
    for n in [33, 65, 129] {
        let spec = GridSpec::from_ranges((-1.0, 1.0, n), (0.0, PI, n))?;
        let nu = ScalarGrid::sample(spec, |u, _| 1.0 / u.cosh().powi(2));
        let m = minimal_natural_residual(&nu, 1.0, 1.0)?;
        let c = cmc_residual(&nu.map(|x| -x * x), 0.0, 1.0, 1.0)?;
        let base = spec.center();
        let nu0 = *nu.at(base.i, base.j);
        let w =
            weingarten_residual(&WeingartenData::from_functions(|t| t, |t| -t, (0.3, 1.0, 201), nu, 1.0, 1.0, nu0)?)?;
        println!("catenoid n={n:>3}: minimal {:.3e}  cmc {:.3e}  weingarten {:.3e}", m.max_abs, c.max_abs, w.max_abs);
        for note in &w.notes {
            println!("    {note}");
        }
    }

    let cone = CatalogEntry::cone(0.4)?;
    let c = canonicalize(
        &cone,
        &GridSpec::from_ranges((0.0, 3.0, 65), (0.5, 2.0, 65))?,
        None,
        &CanonicalConfig::default(),
    )?;
    let (_, h) = c.invariants.kh_fields()?;
    let fit = flat_characterization(&h)?;
    // canonical v is measured from the base node, so the apex sits at v = -g/f
    println!(
        "cone: (1/H)_vv {:.2e}, 1/H = f v + g with f = {:.6} (-2 tan 0.4 = {:.6}), apex at v = {:.6}",
        fit.report.max_abs,
        fit.f[0],
        -2.0 * 0.4f64.tan(),
        -fit.g[0] / fit.f[0]
    );

    let torus = CatalogEntry::torus(2.0, 1.0)?;
    let a = analyze_surface(&torus, &GridSpec::from_ranges((0.5, 2.5, 65), (0.0, 2.0, 65))?)?;
    let fit = flat_characterization(&a.mean().transposed())?;
    println!("torus: (1/H)_vv {:.3e}, line-fit rms {:.3e} (not flat)", fit.report.max_abs, fit.fit_rms);
    Ok(())
}
