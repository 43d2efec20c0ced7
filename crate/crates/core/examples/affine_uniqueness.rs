//! Canonical parameters are unique up to an affine change: two canonicalizations
//! of the catenoid from different base points differ by a translation.
//!
//! cargo run --release --example affine_uniqueness

use surface_invariants::canonical::{check_affine_equivalence, CanonicalConfig};
use surface_invariants::catalog::CatalogEntry;
use surface_invariants::numerics::GridSpec;
use surface_invariants::pipeline::canonicalize;

fn main() -> surface_invariants::error::Result<()> {
    let entry = CatalogEntry::catenoid(1.0)?;
    for n in [41, 81, 161] {
        let spec = GridSpec::from_ranges((-1.0, 1.0, n), (0.0, 2.0, n))?;
        let config = CanonicalConfig::default();
        let a = canonicalize(&entry, &spec, Some(spec.nearest(0.0, 0.0)), &config)?;
        let b = canonicalize(&entry, &spec, Some(spec.nearest(0.3, 1.0)), &config)?;
        let fit = check_affine_equivalence(&a.invariants, &b.invariants)?;
        println!(
            "n={n:>3}: lambda {:.6} mu {:.6} shift ({:.6}, {:.6}) swap {} misfit {:.2e} normalization {:.2e}",
            fit.lambda, fit.mu, fit.c1, fit.c2, fit.swap, fit.misfit, fit.normalization
        );
    }
    Ok(())
}
