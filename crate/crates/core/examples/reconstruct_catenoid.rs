//! A surface from its two principal curvatures in canonical parameters,
//! exported as OBJ.
//!
//! cargo run --example reconstruct_catenoid -- [mesh.obj]

use surface_invariants::bonnet::{path_consistency_diagnostic, reconstruct, FrameState, ReconstructOptions};
use surface_invariants::canonical::InvariantGrid;
use surface_invariants::io::{read_obj, write_obj};
use surface_invariants::numerics::{GridSpec, ScalarGrid};
use surface_invariants::shape::{jets_from_positions, SurfaceAnalysis};

fn main() -> surface_invariants::error::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("catenoid.obj"));

    let spec = GridSpec::from_ranges((-1.0, 1.0, 129), (0.0, std::f64::consts::PI, 129))?;
    let nu1 = ScalarGrid::sample(spec, |u, _| -1.0 / u.cosh().powi(2));
    let inv = InvariantGrid::from_nu(nu1.clone(), nu1.map(|x| -x), 1.0, 1.0, spec.center())?;

    let rec = reconstruct(&inv, &ReconstructOptions::default())?;
    let v = rec.verification;
    println!("coefficient errors: E {:.2e} G {:.2e} L {:.2e} N {:.2e}", v.e, v.g, v.l, v.n);
    println!("E, G at the base node vs a, b: {:.2e} {:.2e}", v.base_e, v.base_g);
    if let Some(f) = rec.floor {
        println!("refinement ratio of the Gauss residual: {:.2}", f.ratio);
    }

    let a = SurfaceAnalysis::from_jets(&jets_from_positions(&rec.mesh.positions)?)?;
    let h = a.mean();
    let mut worst: f64 = 0.0;
    for j in 2..spec.nv - 2 {
        for i in 2..spec.nu - 2 {
            worst = worst.max(h.at(i, j).abs());
        }
    }
    println!("interior max |H| of the mesh: {worst:.2e}");
    println!("path dependence: {:.2e}", path_consistency_diagnostic(&rec.forms, &FrameState::default(), inv.base())?);

    write_obj(&out, &rec.mesh, true)?;
    let obj = read_obj(&out)?;
    println!("wrote {}: {} vertices, {} triangles", out.display(), obj.vertices.len(), obj.faces.len());
    Ok(())
}
