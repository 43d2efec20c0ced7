//! Forms and curvatures of catalog surfaces, and umbilic detection.
//!
//! cargo run --example analyze_surface

use std::f64::consts::TAU;

use surface_invariants::catalog::CatalogEntry;
use surface_invariants::numerics::GridSpec;
use surface_invariants::pipeline::analyze_surface;
use surface_invariants::shape::{fundamental_forms, normal_curvature, UMBILIC_TOL};

fn main() -> surface_invariants::error::Result<()> {
    let torus = CatalogEntry::torus(2.0, 1.0)?;
    let f = fundamental_forms(&torus.evaluate_jet(0.0, 0.0)?)?;
    println!("torus at (0, 0): E={} F={} G={} L={} M={} N={}", f.e, f.f, f.g, f.l, f.m, f.n);
    for deg in [0.0, 30.0, 60.0, 90.0] {
        let t = f64::to_radians(deg);
        println!("  normal curvature at {deg:>4} deg: {:.6}", normal_curvature(&f, (t.cos(), t.sin()))?);
    }

    let spec = GridSpec::from_ranges((0.0, TAU, 129), (0.0, TAU, 129))?;
    let a = analyze_surface(&torus, &spec)?;
    let worst = a
        .curvatures
        .values
        .iter()
        .map(|c| (c.k - c.nu1 * c.nu2).abs().max((2.0 * c.h - c.nu1 - c.nu2).abs()))
        .fold(0.0, f64::max);
    println!("torus 129x129: principal chart {}, max identity error {worst:.2e}", a.principal);

    let sphere = CatalogEntry::sphere(1.0)?;
    let s = analyze_surface(&sphere, &GridSpec::from_ranges((-1.0, 1.0, 33), (0.0, 3.0, 33))?)?;
    let report = s.umbilics(UMBILIC_TOL)?;
    println!("sphere: {} of {} nodes umbilical", report.count, 33 * 33);
    if let Some(err) = report.to_error() {
        println!("  {err}");
    }
    Ok(())
}
