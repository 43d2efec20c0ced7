//! Gauss and Codazzi residuals under refinement, and detection of invariants
//! that belong to no surface.
//!
//! cargo run --example compatibility_check

use std::f64::consts::TAU;

use surface_invariants::canonical::InvariantGrid;
use surface_invariants::catalog::CatalogEntry;
use surface_invariants::compatibility::{
    codazzi_residual_principal, compatibility_floor, gauss_residual_canonical, gauss_residual_canonical_kh,
    gauss_residual_general,
};
use surface_invariants::numerics::{GridSpec, ScalarGrid};
use surface_invariants::pipeline::{analyze_surface, observed_orders};

fn catenoid(n: usize) -> InvariantGrid {
    let spec = GridSpec::from_ranges((-1.0, 1.0, n), (0.0, std::f64::consts::PI, n)).unwrap();
    let nu1 = ScalarGrid::sample(spec, |u, _| -1.0 / u.cosh().powi(2));
    InvariantGrid::from_nu(nu1.clone(), nu1.map(|x| -x), 1.0, 1.0, spec.center()).unwrap()
}

fn main() -> surface_invariants::error::Result<()> {
    let monge = CatalogEntry::monge(1.0, -0.5, 0.3, 0.2)?;
    let torus = CatalogEntry::torus(2.0, 1.0)?;
    println!("{:>5} {:>14} {:>14} {:>14} {:>14}", "n", "gauss(graph)", "codazzi(torus)", "gauss(nu)", "gauss(kh)");
    let mut rows = Vec::new();
    for n in [33, 65, 129] {
        let g = analyze_surface(&monge, &GridSpec::from_ranges((-0.5, 0.5, n), (-0.5, 0.5, n))?)?;
        let gauss = gauss_residual_general(&g.fields())?.max_abs;
        let t = analyze_surface(&torus, &GridSpec::from_ranges((0.0, TAU, n), (0.0, TAU, n))?)?;
        let tf = t.fields();
        let (c1, c2) = codazzi_residual_principal(&t.nu1(), &t.nu2(), &tf.e, &tf.g)?;
        let inv = catenoid(n);
        let nu = gauss_residual_canonical(&inv)?.max_abs;
        let kh = gauss_residual_canonical_kh(&inv.to_kh_mode()?)?.max_abs;
        println!("{n:>5} {gauss:>14.4e} {:>14.4e} {nu:>14.4e} {kh:>14.4e}", c1.max_abs.max(c2.max_abs));
        rows.push([gauss, c1.max_abs.max(c2.max_abs), nu, kh]);
    }
    for k in 0..4 {
        let col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        print!("{:?} ", observed_orders(&col).iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>());
    }
    println!("<- observed orders");

    let inv = catenoid(129);
    let spec = inv.spec();
    let nu1 = ScalarGrid::from_fn(spec, |i, j| inv.field1().at(i, j) + 0.05 * (2.0 * spec.u(i) + spec.v(j)).sin());
    let bad = inv.with_fields(nu1, inv.field2().clone())?;
    for (name, grid) in [("catenoid", &inv), ("perturbed", &bad)] {
        let f = compatibility_floor(grid)?;
        println!(
            "{name:>10}: residual {:.3e} -> {:.3e} under refinement (ratio {:.2}), incompatible {}",
            f.coarse, f.fine, f.ratio, f.incompatible
        );
    }
    Ok(())
}
