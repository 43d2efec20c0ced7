//! Catalog surface -> canonical invariants -> mesh -> comparison with the
//! original, on refined grids.
//!
//! cargo run --release --example roundtrip_convergence -- [catenoid|torus]

use surface_invariants::bonnet::ReconstructOptions;
use surface_invariants::canonical::CanonicalConfig;
use surface_invariants::catalog::CatalogEntry;
use surface_invariants::numerics::GridSpec;
use surface_invariants::pipeline::{observed_orders, round_trip};

fn main() -> surface_invariants::error::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "catenoid".into());
    let (entry, u, v) = match name.as_str() {
        "torus" => (CatalogEntry::torus(2.0, 1.0)?, (0.5, 2.5), (0.0, 2.0)),
        _ => (CatalogEntry::catenoid(1.0)?, (-1.0, 1.0), (0.0, std::f64::consts::PI)),
    };
    let mut errors = Vec::new();
    println!("{:>9} {:>14} {:>14} {:>14}", "nodes", "gauss", "alignment rms", "curvature");
    for n in [33, 65, 129, 257] {
        let spec = GridSpec::from_ranges((u.0, u.1, n), (v.0, v.1, n))?;
        let run = round_trip(&entry, &spec, None, &CanonicalConfig::default(), &ReconstructOptions::default())?;
        let e = run.errors;
        println!("{:>9} {:>14.4e} {:>14.4e} {:>14.4e}", format!("{n}x{n}"), e.gauss, e.alignment_rms, e.curvature);
        errors.push(e);
    }
    let orders = |f: fn(&surface_invariants::pipeline::RoundTripErrors) -> f64| {
        observed_orders(&errors.iter().map(f).collect::<Vec<_>>())
    };
    println!("orders: gauss {:.3?}", orders(|e| e.gauss));
    println!("        rms   {:.3?}", orders(|e| e.alignment_rms));
    println!("        nu    {:.3?}", orders(|e| e.curvature));
    Ok(())
}
