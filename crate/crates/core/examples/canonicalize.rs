//! Canonical principal parameters of a catalog chart, written as an
//! invariant-grid file.
//!
//! cargo run --example canonicalize -- [output.json]

use surface_invariants::canonical::{verify_canonical, CanonicalConfig};
use surface_invariants::catalog::CatalogEntry;
use surface_invariants::io::{read_invariant_grid, write_invariant_grid};
use surface_invariants::numerics::GridSpec;
use surface_invariants::pipeline::canonicalize;

fn main() -> surface_invariants::error::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("torus_canonical.json"));

    // the standard chart is canonical already; the maps move the base node to the origin
    let entry = CatalogEntry::torus(2.0, 1.0)?;
    let spec = GridSpec::from_ranges((0.5, 2.5, 65), (0.0, 2.0, 65))?;
    let c = canonicalize(&entry, &spec, None, &CanonicalConfig::default())?;
    let (ub_lo, ub_hi) = c.maps.ubar.range();
    let (vb_lo, vb_hi) = c.maps.vbar.range();
    println!("ubar in [{ub_lo:.6}, {ub_hi:.6}], vbar in [{vb_lo:.6}, {vb_hi:.6}]");
    println!("a = E(base) = {:.6}, b = G(base) = {:.6}", c.maps.a, c.maps.b);
    println!("integrand spread: u {:.2e}, v {:.2e}", c.maps.u_variation, c.maps.v_variation);

    let (r1, r2) = verify_canonical(&c.invariants, &c.e, &c.g)?;
    println!("canonical residuals: {:.2e} {:.2e}", r1.max_abs, r2.max_abs);

    write_invariant_grid(&out, &c.invariants)?;
    let back = read_invariant_grid(&out)?;
    println!("wrote {} ({} x {} nodes, mode {:?})", out.display(), back.spec().nu, back.spec().nv, back.mode());

    let kh = c.invariants.to_kh_mode()?;
    println!("K/H form reflects u: {}", c.invariants.kh_reflects());
    let (k, h) = kh.kh_fields()?;
    println!(
        "K in [{:.4}, {:.4}], H at base {:.4}",
        k.values.iter().cloned().fold(f64::INFINITY, f64::min),
        k.max_abs(),
        h.at(kh.base().i, kh.base().j)
    );
    Ok(())
}
