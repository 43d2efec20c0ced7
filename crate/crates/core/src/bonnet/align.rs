use nalgebra::Matrix3;

use crate::catalog::Vec3;
use crate::error::{Error, Result};
use crate::numerics::Grid2;

/// Proper rigid motion `p -> rotation p + translation` taking the first point
/// set onto the second, with the RMS of the remaining distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidAlignment {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
    pub rms: f64,
}

impl RigidAlignment {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }
}

fn centroid(points: &[Vec3]) -> Vec3 {
    points.iter().sum::<Vec3>() / points.len() as f64
}

/// Kabsch alignment of corresponding points, restricted to proper rotations.
pub fn align_points(a: &[Vec3], b: &[Vec3]) -> Result<RigidAlignment> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::ShapeMismatch(format!("cannot align {} points with {}", a.len(), b.len())));
    }
    let (ca, cb) = (centroid(a), centroid(b));
    let mut h = Matrix3::zeros();
    for (p, q) in a.iter().zip(b) {
        h += (q - cb) * (p - ca).transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (u * vt).determinant().signum();
    let rotation = u * Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * vt;
    let translation = cb - rotation * ca;
    let sq: f64 = a.iter().zip(b).map(|(p, q)| (rotation * p + translation - q).norm_squared()).sum();
    Ok(RigidAlignment { rotation, translation, rms: (sq / a.len() as f64).sqrt() })
}

/// Align the nodes of `a` onto the corresponding nodes of `b`.
pub fn align_rigid(a: &Grid2<Vec3>, b: &Grid2<Vec3>) -> Result<RigidAlignment> {
    if a.nu() != b.nu() || a.nv() != b.nv() {
        return Err(Error::ShapeMismatch(format!("{} x {} mesh against {} x {}", a.nu(), a.nv(), b.nu(), b.nv())));
    }
    align_points(&a.values, &b.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GridSpec;
    use nalgebra::{Rotation3, Unit};

    fn sample() -> Grid2<Vec3> {
        let spec = GridSpec::from_ranges((0.0, 1.0, 7), (0.0, 2.0, 5)).unwrap();
        Grid2::from_fn(spec, |i, j| {
            let (u, v) = (spec.u(i), spec.v(j));
            Vec3::new(u, v, u * u - 0.3 * v * v + u * v)
        })
    }

    #[test]
    fn recovers_a_known_motion() {
        let a = sample();
        let r0 = Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(1.0, -2.0, 0.5)), 2.1);
        let t0 = Vec3::new(3.0, -1.0, 0.25);
        let b = a.map(|p| r0 * p + t0);
        let fit = align_rigid(&a, &b).unwrap();
        assert!((fit.rotation - r0.matrix()).amax() < 1e-10);
        assert!((fit.translation - t0).amax() < 1e-10);
        assert!(fit.rms < 1e-12);
        assert!((fit.rotation.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_images_are_not_aligned_exactly() {
        let a = sample();
        let b = a.map(|p| Vec3::new(p.x, p.y, -p.z));
        let fit = align_rigid(&a, &b).unwrap();
        assert!(fit.rotation.determinant() > 0.0);
        assert!(fit.rms > 1e-3);
    }

    #[test]
    fn shape_mismatch() {
        let a = sample();
        let spec = GridSpec::from_ranges((0.0, 1.0, 5), (0.0, 2.0, 7)).unwrap();
        let b = Grid2::from_fn(spec, |_, _| Vec3::zeros());
        assert!(matches!(align_rigid(&a, &b), Err(Error::ShapeMismatch(_))));
    }
}
