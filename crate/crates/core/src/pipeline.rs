//! End-to-end helpers: catalog chart to canonical invariants, and back to a
//! mesh compared with the original surface.

use crate::bonnet::{align_rigid, reconstruct, ReconstructOptions, Reconstruction, RigidAlignment};
use crate::canonical::{
    build_canonical_maps, resample_metric, resample_to_canonical, CanonicalConfig, CanonicalMaps, InvariantGrid,
};
use crate::catalog::{CatalogEntry, Vec3};
use crate::error::{Error, Result};
use crate::numerics::{BaseIndex, Grid2, GridSpec, ScalarGrid};
use crate::shape::{jets_from_positions, SurfaceAnalysis};

pub fn analyze_surface(entry: &CatalogEntry, spec: &GridSpec) -> Result<SurfaceAnalysis> {
    SurfaceAnalysis::from_jets(&entry.sample_surface(spec)?)
}

/// A principal chart carried over to canonical principal parameters.
#[derive(Debug, Clone)]
pub struct Canonicalization {
    pub analysis: SurfaceAnalysis,
    pub maps: CanonicalMaps,
    pub invariants: InvariantGrid,
    /// `E, G` on the canonical grid.
    pub e: ScalarGrid,
    pub g: ScalarGrid,
}

/// Sample `entry` on `spec`, build the canonical maps from `base` (the centre
/// node by default) and resample the principal curvatures.
pub fn canonicalize(
    entry: &CatalogEntry,
    spec: &GridSpec,
    base: Option<BaseIndex>,
    config: &CanonicalConfig,
) -> Result<Canonicalization> {
    let analysis = analyze_surface(entry, spec)?;
    let forms = analysis.fields();
    forms.check_principal()?;
    let base = base.unwrap_or_else(|| spec.center());
    let (nu1, nu2) = (analysis.nu1(), analysis.nu2());
    let maps = build_canonical_maps(&forms.e, &forms.g, &nu1, &nu2, base, config)?;
    let invariants = resample_to_canonical(&maps, &nu1, &nu2)?;
    let (e, g) = resample_metric(&maps, &forms.e, &forms.g)?;
    Ok(Canonicalization { analysis, maps, invariants, e, g })
}

/// Points of the catalog surface at the nodes of the canonical grid.
pub fn canonical_positions(entry: &CatalogEntry, maps: &CanonicalMaps) -> Result<Grid2<Vec3>> {
    let spec = maps.canonical_spec()?;
    let (us, vs) = maps.source_parameters(&spec)?;
    let domain = entry.domain();
    Grid2::try_from_fn(spec, |i, j| {
        // inversion can overshoot the sampled end by roundoff
        let u = us[i].clamp(maps.source.u0, maps.source.u_max());
        let v = vs[j].clamp(maps.source.v0, maps.source.v_max());
        if !domain.contains(u, v) {
            return Err(Error::Domain { surface: entry.name().to_string(), u, v });
        }
        entry.evaluate_jet(u, v).map(|jet| jet.x)
    })
}

/// Errors of one catalog round trip.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RoundTripErrors {
    pub nodes: [usize; 2],
    /// Canonical Gauss residual of the resampled invariants.
    pub gauss: f64,
    /// RMS distance to the catalog surface after rigid alignment.
    pub alignment_rms: f64,
    /// Interior max error of the principal curvatures of the mesh.
    pub curvature: f64,
}

#[derive(Debug, Clone)]
pub struct RoundTrip {
    pub canonical: Canonicalization,
    pub reconstruction: Reconstruction,
    pub alignment: RigidAlignment,
    pub errors: RoundTripErrors,
}

fn interior_max(a: &ScalarGrid, b: &ScalarGrid, margin: usize) -> f64 {
    let spec = a.spec;
    let mut worst: f64 = 0.0;
    for j in margin..spec.nv - margin {
        for i in margin..spec.nu - margin {
            worst = worst.max((a.at(i, j) - b.at(i, j)).abs());
        }
    }
    worst
}

/// Canonicalize, reconstruct, align with the catalog surface and compare the
/// curvatures of the mesh with the invariants it was built from.
pub fn round_trip(
    entry: &CatalogEntry,
    spec: &GridSpec,
    base: Option<BaseIndex>,
    config: &CanonicalConfig,
    options: &ReconstructOptions,
) -> Result<RoundTrip> {
    let canonical = canonicalize(entry, spec, base, config)?;
    let gauss = crate::compatibility::gauss_residual_canonical(&canonical.invariants)?.max_abs;
    let reconstruction = reconstruct(&canonical.invariants, options)?;
    let truth = canonical_positions(entry, &canonical.maps)?;
    let alignment = align_rigid(&reconstruction.mesh.positions, &truth)?;
    let measured = SurfaceAnalysis::from_jets(&jets_from_positions(&reconstruction.mesh.positions)?)?;
    let margin = crate::compatibility::INTERIOR_MARGIN;
    let inv = &canonical.invariants;
    // the differenced mesh is analysed without assuming principality, so
    // compare the curvatures as an unordered pair
    let (m1, m2) = (measured.nu1(), measured.nu2());
    let (hi, lo) =
        (inv.field1().zip_map(inv.field2(), |a, b| a.max(*b))?, inv.field1().zip_map(inv.field2(), |a, b| a.min(*b))?);
    let curvature = interior_max(&m1, &hi, margin).max(interior_max(&m2, &lo, margin));
    Ok(RoundTrip {
        errors: RoundTripErrors { nodes: [spec.nu, spec.nv], gauss, alignment_rms: alignment.rms, curvature },
        canonical,
        reconstruction,
        alignment,
    })
}

/// `log2(coarse / fine)` for consecutive entries.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catenoid_round_trip_converges() {
        let entry = CatalogEntry::catenoid(1.0).unwrap();
        let run = |n| {
            let spec = GridSpec::from_ranges((-1.0, 1.0, n), (0.0, std::f64::consts::PI, n)).unwrap();
            round_trip(&entry, &spec, None, &CanonicalConfig::default(), &ReconstructOptions::default()).unwrap().errors
        };
        let (a, b) = (run(33), run(65));
        let orders = observed_orders(&[a.alignment_rms, b.alignment_rms]);
        assert!(orders[0] > 1.9, "{a:?} {b:?}");
        assert!(b.curvature < 1e-2, "{b:?}");
    }

    #[test]
    fn orders() {
        let o = observed_orders(&[1.0, 0.25, 0.0625]);
        assert_eq!(o, vec![2.0, 2.0]);
    }
}
