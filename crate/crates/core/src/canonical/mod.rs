//! Canonical principal parameters: the invariant grid, the maps `u -> ubar`,
//! `v -> vbar`, resampling and the affine uniqueness check.

mod affine;
mod maps;

pub use affine::{check_affine_equivalence, AffineFit};
pub use maps::{
    build_canonical_maps, resample_field, resample_metric, resample_to_canonical, verify_canonical, CanonicalConfig,
    CanonicalMaps,
};

use serde::{Deserialize, Serialize};

use crate::compatibility::mean_and_root;
use crate::error::{Error, Result};
use crate::numerics::grid::check_same_shape;
use crate::numerics::{BaseIndex, GridSpec, ScalarGrid};
use crate::shape::{detect_umbilics, UMBILIC_TOL};

/// Which pair of invariants an [`InvariantGrid`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvariantMode {
    /// `field1 = nu1`, `field2 = nu2`
    Nu,
    /// `field1 = K`, `field2 = H`
    Kh,
}

/// Two invariant functions sampled on a grid in canonical principal
/// parameters, with the constants `a, b` and the base node.
///
/// In `Nu` mode `a, b` are `E, G` at the base node. In `Kh` mode they are
/// `E sqrt(H^2 - K)` and `G sqrt(H^2 - K)` there.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantGrid {
    mode: InvariantMode,
    field1: ScalarGrid,
    field2: ScalarGrid,
    a: f64,
    b: f64,
    base: BaseIndex,
}

impl InvariantGrid {
    pub fn new(
        mode: InvariantMode,
        field1: ScalarGrid,
        field2: ScalarGrid,
        a: f64,
        b: f64,
        base: BaseIndex,
    ) -> Result<Self> {
        check_same_shape(&field1.spec, &field2.spec)?;
        if field1.spec != field2.spec {
            return Err(Error::ShapeMismatch("fields live on different grids".into()));
        }
        base.check(&field1.spec)?;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Positivity(format!("a = {a}, b = {b}")));
        }
        if field1.values.iter().chain(&field2.values).any(|x| !x.is_finite()) {
            return Err(Error::Invalid("invariant fields must be finite".into()));
        }
        match mode {
            InvariantMode::Nu => {
                if let Some(e) = detect_umbilics(&field1, &field2, UMBILIC_TOL)?.to_error() {
                    return Err(e);
                }
            }
            InvariantMode::Kh => check_discriminant(&field1, &field2)?,
        }
        Ok(Self { mode, field1, field2, a, b, base })
    }

    pub fn from_nu(nu1: ScalarGrid, nu2: ScalarGrid, a: f64, b: f64, base: BaseIndex) -> Result<Self> {
        Self::new(InvariantMode::Nu, nu1, nu2, a, b, base)
    }

    pub fn from_kh(k: ScalarGrid, h: ScalarGrid, a: f64, b: f64, base: BaseIndex) -> Result<Self> {
        Self::new(InvariantMode::Kh, k, h, a, b, base)
    }

    /// Same metadata with new fields.
    pub fn with_fields(&self, field1: ScalarGrid, field2: ScalarGrid) -> Result<Self> {
        Self::new(self.mode, field1, field2, self.a, self.b, self.base)
    }

    pub fn mode(&self) -> InvariantMode {
        self.mode
    }

    pub fn field1(&self) -> &ScalarGrid {
        &self.field1
    }

    pub fn field2(&self) -> &ScalarGrid {
        &self.field2
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn base(&self) -> BaseIndex {
        self.base
    }

    pub fn spec(&self) -> GridSpec {
        self.field1.spec
    }

    /// `(nu1, nu2)`; from `K, H` the larger curvature comes first.
    pub fn nu_fields(&self) -> Result<(ScalarGrid, ScalarGrid)> {
        match self.mode {
            InvariantMode::Nu => Ok((self.field1.clone(), self.field2.clone())),
            InvariantMode::Kh => {
                let (k, h) = (&self.field1, &self.field2);
                let d = mean_and_root(k, h)?;
                let nu1 = h.zip_map(&d, |h, d| h + d)?;
                let nu2 = h.zip_map(&d, |h, d| h - d)?;
                Ok((nu1, nu2))
            }
        }
    }

    /// `(K, H)`.
    pub fn kh_fields(&self) -> Result<(ScalarGrid, ScalarGrid)> {
        match self.mode {
            InvariantMode::Kh => Ok((self.field1.clone(), self.field2.clone())),
            InvariantMode::Nu => Ok((
                self.field1.zip_map(&self.field2, |a, b| a * b)?,
                self.field1.zip_map(&self.field2, |a, b| 0.5 * (a + b))?,
            )),
        }
    }

    /// `sqrt(H^2 - K) = |nu1 - nu2| / 2` at the base node.
    fn base_root(&self) -> f64 {
        let (i, j) = (self.base.i, self.base.j);
        let (f1, f2) = (*self.field1.at(i, j), *self.field2.at(i, j));
        match self.mode {
            InvariantMode::Nu => 0.5 * (f1 - f2).abs(),
            InvariantMode::Kh => (f2 * f2 - f1).sqrt(),
        }
    }

    pub fn to_nu_mode(&self) -> Result<Self> {
        match self.mode {
            InvariantMode::Nu => Ok(self.clone()),
            InvariantMode::Kh => {
                let d0 = self.base_root();
                let (nu1, nu2) = self.nu_fields()?;
                Self::from_nu(nu1, nu2, self.a / d0, self.b / d0, self.base)
            }
        }
    }

    /// Whether [`to_kh_mode`](Self::to_kh_mode) has to reflect the chart in
    /// `u`, which happens when `nu1 < nu2`.
    pub fn kh_reflects(&self) -> bool {
        self.mode == InvariantMode::Nu
            && self.field1.at(self.base.i, self.base.j) < self.field2.at(self.base.i, self.base.j)
    }

    /// Gauss and mean curvature form. The `K, H` description labels
    /// `nu1 = H + sqrt(H^2 - K)`, so a grid with `nu1 < nu2` is reflected in
    /// `u` first, which also flips the normal and the sign of `H`.
    pub fn to_kh_mode(&self) -> Result<Self> {
        if self.mode == InvariantMode::Kh {
            return Ok(self.clone());
        }
        let src = if self.kh_reflects() { self.reflected_u() } else { self.clone() };
        let d0 = src.base_root();
        let (k, h) = src.kh_fields()?;
        Self::from_kh(k, h, src.a * d0, src.b * d0, src.base)
    }

    /// The chart `(u, v) -> (-u, v)`; the normal flips with it.
    pub fn reflected_u(&self) -> Self {
        let spec = self.spec();
        let new_spec = GridSpec { u0: -spec.u_max(), ..spec };
        let flip = |g: &ScalarGrid, sign: f64| ScalarGrid::from_fn(new_spec, |i, j| sign * g.at(spec.nu - 1 - i, j));
        let (s1, s2) = match self.mode {
            InvariantMode::Nu => (-1.0, -1.0),
            InvariantMode::Kh => (1.0, -1.0),
        };
        Self {
            mode: self.mode,
            field1: flip(&self.field1, s1),
            field2: flip(&self.field2, s2),
            a: self.a,
            b: self.b,
            base: BaseIndex { i: spec.nu - 1 - self.base.i, j: self.base.j },
        }
    }

    /// The chart with `u` and `v` exchanged; the normal flips with it.
    pub fn transposed(&self) -> Self {
        let neg = |g: &ScalarGrid| g.transposed().map(|x| -x);
        let (field1, field2) = match self.mode {
            InvariantMode::Nu => (neg(&self.field2), neg(&self.field1)),
            InvariantMode::Kh => (self.field1.transposed(), neg(&self.field2)),
        };
        Self {
            mode: self.mode,
            field1,
            field2,
            a: self.b,
            b: self.a,
            base: BaseIndex { i: self.base.j, j: self.base.i },
        }
    }

    /// Every other node, keeping the base node on the subgrid.
    pub fn coarsened(&self) -> Result<Self> {
        let (io, jo) = (self.base.i % 2, self.base.j % 2);
        Ok(Self {
            mode: self.mode,
            field1: self.field1.subsample(2, io, jo)?,
            field2: self.field2.subsample(2, io, jo)?,
            a: self.a,
            b: self.b,
            base: BaseIndex { i: self.base.i / 2, j: self.base.j / 2 },
        })
    }
}

fn check_discriminant(k: &ScalarGrid, h: &ScalarGrid) -> Result<()> {
    let spec = k.spec;
    for j in 0..spec.nv {
        for i in 0..spec.nu {
            let (kk, hh) = (*k.at(i, j), *h.at(i, j));
            let disc = hh * hh - kk;
            let gap = 2.0 * disc.max(0.0).sqrt();
            let scale = 1.0f64.max(hh.abs() + 0.5 * gap);
            if !(disc > 0.0) || gap < UMBILIC_TOL * scale {
                return Err(Error::Discriminant { i, j, value: disc });
            }
        }
    }
    Ok(())
}
