//! Constant principal curvatures 1 and 0 give the unit cylinder.
//!
//! cargo run --example cylinder_from_constants

use std::f64::consts::PI;

use surface_invariants::bonnet::{reconstruct, ReconstructOptions};
use surface_invariants::canonical::InvariantGrid;
use surface_invariants::numerics::{GridSpec, ScalarGrid};

fn main() -> surface_invariants::error::Result<()> {
    let spec = GridSpec::from_ranges((0.0, PI, 129), (0.0, 2.0, 129))?;
    let inv = InvariantGrid::from_nu(
        ScalarGrid::constant(spec, 1.0),
        ScalarGrid::constant(spec, 0.0),
        1.0,
        1.0,
        spec.center(),
    )?;
    let mesh = reconstruct(&inv, &ReconstructOptions::default())?.mesh;
    let p = &mesh.positions;
    // the v lines are the rulings; the axis passes through the centre of the
    // half circle traced by the base row
    let base = inv.base();
    let axis = (p.at(base.i, spec.nv - 1) - p.at(base.i, 0)).normalize();
    let centre = (p.at(0, base.j) + p.at(spec.nu - 1, base.j)) / 2.0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for x in &p.values {
        let d = x - centre;
        let r = (d - axis * d.dot(&axis)).norm();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    println!("distance to the axis in [{lo:.12}, {hi:.12}]");
    Ok(())
}
