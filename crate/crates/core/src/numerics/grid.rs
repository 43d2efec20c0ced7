//! Rectangular parameter grids.
//!
//! Values are stored row-major with `u` fastest: node `(i, j)` lives at
//! `values[i + nu * j]` and sits at parameter `(u0 + i * du, v0 + j * dv)`.

use crate::error::{Error, Result};

/// Shape, origin and spacing of a parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nu: usize,
    pub nv: usize,
    pub u0: f64,
    pub v0: f64,
    pub du: f64,
    pub dv: f64,
}

impl GridSpec {
    pub fn new(nu: usize, nv: usize, u0: f64, v0: f64, du: f64, dv: f64) -> Result<Self> {
        if nu < 3 || nv < 3 {
            return Err(Error::Dimension(format!("grid must have at least 3 x 3 nodes, got {nu} x {nv}")));
        }
        if !(du > 0.0 && dv > 0.0) || !du.is_finite() || !dv.is_finite() {
            return Err(Error::Dimension(format!("spacings must be positive, got du = {du}, dv = {dv}")));
        }
        if !u0.is_finite() || !v0.is_finite() {
            return Err(Error::Dimension("grid origin must be finite".into()));
        }
        Ok(Self { nu, nv, u0, v0, du, dv })
    }

    /// Grid covering `[u_min, u_max] x [v_min, v_max]` with inclusive endpoints.
    pub fn from_ranges(u: (f64, f64, usize), v: (f64, f64, usize)) -> Result<Self> {
        let (u_min, u_max, nu) = u;
        let (v_min, v_max, nv) = v;
        if nu < 2 || nv < 2 {
            return Err(Error::Dimension("range needs at least two samples".into()));
        }
        let du = (u_max - u_min) / (nu - 1) as f64;
        let dv = (v_max - v_min) / (nv - 1) as f64;
        Self::new(nu, nv, u_min, v_min, du, dv)
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.nu * j
    }

    #[inline]
    pub fn u(&self, i: usize) -> f64 {
        self.u0 + i as f64 * self.du
    }

    #[inline]
    pub fn v(&self, j: usize) -> f64 {
        self.v0 + j as f64 * self.dv
    }

    pub fn u_max(&self) -> f64 {
        self.u(self.nu - 1)
    }

    pub fn v_max(&self) -> f64 {
        self.v(self.nv - 1)
    }

    pub fn us(&self) -> Vec<f64> {
        (0..self.nu).map(|i| self.u(i)).collect()
    }

    pub fn vs(&self) -> Vec<f64> {
        (0..self.nv).map(|j| self.v(j)).collect()
    }

    /// Halve both spacings, keeping the endpoints.
    pub fn refined(&self) -> Self {
        Self { nu: 2 * self.nu - 1, nv: 2 * self.nv - 1, du: self.du / 2.0, dv: self.dv / 2.0, ..*self }
    }

    /// Same grid with the roles of `u` and `v` exchanged.
    pub fn transposed(&self) -> Self {
        Self { nu: self.nv, nv: self.nu, u0: self.v0, v0: self.u0, du: self.dv, dv: self.du }
    }

    pub fn center(&self) -> BaseIndex {
        BaseIndex { i: self.nu / 2, j: self.nv / 2 }
    }

    /// Node nearest to parameter `(u, v)`, clamped to the grid.
    pub fn nearest(&self, u: f64, v: f64) -> BaseIndex {
        let clamp = |x: f64, n: usize| x.round().clamp(0.0, (n - 1) as f64) as usize;
        BaseIndex { i: clamp((u - self.u0) / self.du, self.nu), j: clamp((v - self.v0) / self.dv, self.nv) }
    }

    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self.nu == other.nu && self.nv == other.nv
    }
}

/// Grid indices of the base point `(u0, v0)` from which all path integrals start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseIndex {
    pub i: usize,
    pub j: usize,
}

impl BaseIndex {
    pub fn new(i: usize, j: usize, spec: &GridSpec) -> Result<Self> {
        let base = Self { i, j };
        base.check(spec)?;
        Ok(base)
    }

    pub fn check(&self, spec: &GridSpec) -> Result<()> {
        if self.i >= spec.nu || self.j >= spec.nv {
            return Err(Error::Range(format!(
                "base index ({}, {}) outside {} x {} grid",
                self.i, self.j, spec.nu, spec.nv
            )));
        }
        Ok(())
    }
}

/// Values sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2<T> {
    pub spec: GridSpec,
    pub values: Vec<T>,
}

pub type ScalarGrid = Grid2<f64>;

impl<T> Grid2<T> {
    pub fn new(spec: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Dimension(format!(
                "expected {} values for a {} x {} grid, got {}",
                spec.len(),
                spec.nu,
                spec.nv,
                values.len()
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut values = Vec::with_capacity(spec.len());
        for j in 0..spec.nv {
            for i in 0..spec.nu {
                values.push(f(i, j));
            }
        }
        Self { spec, values }
    }

    pub fn try_from_fn<E>(
        spec: GridSpec,
        mut f: impl FnMut(usize, usize) -> std::result::Result<T, E>,
    ) -> std::result::Result<Self, E> {
        let mut values = Vec::with_capacity(spec.len());
        for j in 0..spec.nv {
            for i in 0..spec.nu {
                values.push(f(i, j)?);
            }
        }
        Ok(Self { spec, values })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.values[self.spec.index(i, j)]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        let k = self.spec.index(i, j);
        &mut self.values[k]
    }

    pub fn nu(&self) -> usize {
        self.spec.nu
    }

    pub fn nv(&self) -> usize {
        self.spec.nv
    }

    pub fn map<S>(&self, f: impl FnMut(&T) -> S) -> Grid2<S> {
        Grid2 { spec: self.spec, values: self.values.iter().map(f).collect() }
    }

    pub fn zip_map<S, R>(&self, other: &Grid2<S>, mut f: impl FnMut(&T, &S) -> R) -> Result<Grid2<R>> {
        check_same_shape(&self.spec, &other.spec)?;
        Ok(Grid2 { spec: self.spec, values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect() })
    }

    /// Row `j` (fixed `v`) as a slice.
    pub fn row(&self, j: usize) -> &[T] {
        let nu = self.spec.nu;
        &self.values[j * nu..(j + 1) * nu]
    }

    /// Same data with `u` and `v` exchanged.
    pub fn transposed(&self) -> Self
    where
        T: Clone,
    {
        let spec = self.spec.transposed();
        Grid2::from_fn(spec, |i, j| self.at(j, i).clone())
    }

    /// Subgrid of every `stride`-th node starting at `(i_off, j_off)`.
    pub fn subsample(&self, stride: usize, i_off: usize, j_off: usize) -> Result<Self>
    where
        T: Clone,
    {
        let nu = (self.spec.nu - i_off).div_ceil(stride);
        let nv = (self.spec.nv - j_off).div_ceil(stride);
        let spec = GridSpec::new(
            nu,
            nv,
            self.spec.u(i_off),
            self.spec.v(j_off),
            self.spec.du * stride as f64,
            self.spec.dv * stride as f64,
        )?;
        Ok(Grid2::from_fn(spec, |i, j| self.at(i_off + stride * i, j_off + stride * j).clone()))
    }
}

impl Grid2<f64> {
    pub fn constant(spec: GridSpec, value: f64) -> Self {
        Self { spec, values: vec![value; spec.len()] }
    }

    /// Sample an analytic scalar function at every node.
    pub fn sample(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(spec, |i, j| f(spec.u(i), spec.v(j)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Column `i` (fixed `u`) copied out.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.spec.nv).map(|j| *self.at(i, j)).collect()
    }
}

pub(crate) fn check_same_shape(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch(format!("{} x {} vs {} x {}", a.nu, a.nv, b.nu, b.nv)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_parameters_are_exact() {
        let spec = GridSpec::new(5, 4, -1.0, 2.0, 0.25, 0.5).unwrap();
        assert_eq!(spec.u(3), -1.0 + 3.0 * 0.25);
        assert_eq!(spec.v(2), 2.0 + 2.0 * 0.5);
        assert_eq!(spec.index(3, 2), 3 + 5 * 2);
    }

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(matches!(GridSpec::new(2, 5, 0.0, 0.0, 1.0, 1.0), Err(Error::Dimension(_))));
        assert!(matches!(GridSpec::new(5, 5, 0.0, 0.0, 0.0, 1.0), Err(Error::Dimension(_))));
        let spec = GridSpec::new(3, 3, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(BaseIndex::new(3, 0, &spec).is_err());
        assert!(Grid2::new(spec, vec![0.0; 8]).is_err());
    }

    #[test]
    fn subsample_and_transpose() {
        let spec = GridSpec::from_ranges((0.0, 1.0, 9), (0.0, 2.0, 5)).unwrap();
        let g = Grid2::sample(spec, |u, v| u + 10.0 * v);
        let c = g.subsample(2, 0, 0).unwrap();
        assert_eq!((c.nu(), c.nv()), (5, 3));
        assert_eq!(*c.at(2, 1), *g.at(4, 2));
        let t = g.transposed();
        assert_eq!(*t.at(1, 3), *g.at(3, 1));
        assert_eq!(t.spec.du, spec.dv);
    }
}
