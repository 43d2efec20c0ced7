use nalgebra::Matrix3;

use crate::catalog::Vec3;
use crate::error::{Error, Result};
use crate::numerics::interp::cubic_midpoint;
use crate::numerics::stepper::{rk4_step, StepPoint};
use crate::numerics::{partial_u4, partial_v4, BaseIndex, Grid2, GridSpec, ScalarGrid};
use crate::shape::FormFields;

/// Largest deviation from orthonormality tolerated before a projection.
pub const FRAME_DRIFT_TOL: f64 = 1e-6;

/// Position and orthonormal frame: unit tangents along `u` and `v` and the
/// unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameState {
    pub x: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub n: Vec3,
}

impl Default for FrameState {
    fn default() -> Self {
        Self { x: Vec3::zeros(), e1: Vec3::x(), e2: Vec3::y(), n: Vec3::z() }
    }
}

impl FrameState {
    /// Frame given by the columns of a proper rotation.
    pub fn from_rotation(x: Vec3, rotation: &Matrix3<f64>) -> Result<Self> {
        let frame = Self {
            x,
            e1: rotation.column(0).into_owned(),
            e2: rotation.column(1).into_owned(),
            n: rotation.column(2).into_owned(),
        };
        let drift = frame.drift();
        if drift > 1e-10 || rotation.determinant() < 0.0 {
            return Err(Error::Invalid(format!("initial frame is not a proper orthonormal frame (drift {drift:e})")));
        }
        Ok(frame)
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.e1, self.e2, self.n])
    }

    /// `max |F^T F - I|` over the entries.
    pub fn drift(&self) -> f64 {
        let m = self.matrix();
        (m.transpose() * m - Matrix3::identity()).amax()
    }

    /// Nearest proper orthonormal frame.
    fn project(&mut self) {
        let svd = self.matrix().svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * vt;
        if r.determinant() < 0.0 {
            let mut u = u;
            u.column_mut(2).neg_mut();
            r = u * vt;
        }
        self.e1 = r.column(0).into_owned();
        self.e2 = r.column(1).into_owned();
        self.n = r.column(2).into_owned();
    }

    fn pack(&self) -> [f64; 12] {
        let mut y = [0.0; 12];
        for (k, v) in [self.x, self.e1, self.e2, self.n].iter().enumerate() {
            y[3 * k..3 * k + 3].copy_from_slice(v.as_slice());
        }
        y
    }

    fn unpack(y: &[f64; 12]) -> Self {
        let v = |k: usize| Vec3::new(y[3 * k], y[3 * k + 1], y[3 * k + 2]);
        Self { x: v(0), e1: v(1), e2: v(2), n: v(3) }
    }
}

/// Order in which the two families of parameter lines are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathOrder {
    /// Base row in `u`, then every column in `v`.
    #[default]
    UFirst,
    /// Base column in `v`, then every row in `u`.
    VFirst,
}

/// Reconstructed positions, optionally with unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub positions: Grid2<Vec3>,
    pub normals: Option<Grid2<Vec3>>,
}

impl SurfaceMesh {
    pub fn spec(&self) -> GridSpec {
        self.positions.spec
    }

    pub fn without_normals(mut self) -> Self {
        self.normals = None;
        self
    }
}

/// Coefficients of the frame equations along one family of lines.
///
/// Along `u`: `x' = s e1`, `e1' = -p e2 + k n`, `e2' = p e1`, `n' = -k e1`
/// with `s = sqrt(E)`, `p = sqrt(E)_v / sqrt(G)`, `k = L / sqrt(E)`.
/// Along `v` the roles of `e1, e2` swap with `s = sqrt(G)`,
/// `p = sqrt(G)_u / sqrt(E)`, `k = N / sqrt(G)`.
struct LineCoefficients {
    s: ScalarGrid,
    p: ScalarGrid,
    k: ScalarGrid,
}

struct Coefficients {
    along_u: LineCoefficients,
    along_v: LineCoefficients,
}

impl Coefficients {
    fn new(forms: &FormFields) -> Result<Self> {
        let spec = forms.spec();
        for (name, g) in [("E", &forms.e), ("G", &forms.g)] {
            if let Some(bad) = g.values.iter().position(|x| !(*x > 0.0)) {
                return Err(Error::Positivity(format!("{name} at node ({}, {})", bad % spec.nu, bad / spec.nu)));
            }
        }
        let se = forms.e.map(|x| x.sqrt());
        let sg = forms.g.map(|x| x.sqrt());
        let se_v = partial_v4(&se)?;
        let sg_u = partial_u4(&sg)?;
        let along_u = LineCoefficients {
            p: ScalarGrid::from_fn(spec, |i, j| se_v.at(i, j) / sg.at(i, j)),
            k: ScalarGrid::from_fn(spec, |i, j| forms.l.at(i, j) / se.at(i, j)),
            s: se.clone(),
        };
        let along_v = LineCoefficients {
            p: ScalarGrid::from_fn(spec, |i, j| sg_u.at(i, j) / se.at(i, j)),
            k: ScalarGrid::from_fn(spec, |i, j| forms.n.at(i, j) / sg.at(i, j)),
            s: sg,
        };
        Ok(Self { along_u, along_v })
    }
}

/// Samples of `s, p, k` along one line.
struct Line {
    s: Vec<f64>,
    p: Vec<f64>,
    k: Vec<f64>,
}

impl Line {
    fn row(c: &LineCoefficients, j: usize) -> Self {
        Self { s: c.s.row(j).to_vec(), p: c.p.row(j).to_vec(), k: c.k.row(j).to_vec() }
    }

    fn column(c: &LineCoefficients, i: usize) -> Self {
        Self { s: c.s.column(i), p: c.p.column(i), k: c.k.column(i) }
    }

    fn stage(&self, from: usize, to: usize, point: StepPoint) -> (f64, f64, f64) {
        match point {
            StepPoint::Start => (self.s[from], self.p[from], self.k[from]),
            StepPoint::End => (self.s[to], self.p[to], self.k[to]),
            StepPoint::Mid => {
                let lo = from.min(to);
                (cubic_midpoint(&self.s, lo), cubic_midpoint(&self.p, lo), cubic_midpoint(&self.k, lo))
            }
        }
    }
}

/// Right-hand side in the local basis `(t, b, n)` where `t` is the tangent
/// along the line and `b` the other tangent:
/// `x' = s t`, `t' = -p b + k n`, `b' = p t`, `n' = -k t`.
fn rhs(y: &[f64; 12], s: f64, p: f64, k: f64, along_u: bool) -> [f64; 12] {
    let f = FrameState::unpack(y);
    let (t, b) = if along_u { (f.e1, f.e2) } else { (f.e2, f.e1) };
    let dx = t * s;
    let dt = -b * p + f.n * k;
    let db = t * p;
    let dn = -t * k;
    let out =
        if along_u { FrameState { x: dx, e1: dt, e2: db, n: dn } } else { FrameState { x: dx, e1: db, e2: dt, n: dn } };
    out.pack()
}

/// Integrate along one line from node `start` to every other node, returning
/// the frame at each node.
fn integrate_line(line: &Line, h: f64, start: usize, init: FrameState, along_u: bool) -> Result<Vec<FrameState>> {
    let n = line.s.len();
    let mut out = vec![init; n];
    let mut walk = |range: &mut dyn Iterator<Item = (usize, usize)>, h: f64| -> Result<()> {
        let mut state = init;
        for (from, to) in range {
            let y = rk4_step(&state.pack(), h, |point, y| {
                let (s, p, k) = line.stage(from, to, point);
                rhs(y, s, p, k, along_u)
            });
            state = FrameState::unpack(&y);
            let drift = state.drift();
            if !(drift <= FRAME_DRIFT_TOL) {
                return Err(Error::Integration(format!(
                    "frame drift {drift:e} between nodes {from} and {to} exceeds {FRAME_DRIFT_TOL:e}; refine the grid"
                )));
            }
            state.project();
            out[to] = state;
        }
        Ok(())
    };
    walk(&mut (start..n - 1).map(|k| (k, k + 1)), h)?;
    walk(&mut (1..=start).rev().map(|k| (k, k - 1)), -h)?;
    Ok(out)
}

fn integrate_frames(
    forms: &FormFields,
    init: &FrameState,
    base: BaseIndex,
    order: PathOrder,
) -> Result<Grid2<FrameState>> {
    let spec = forms.spec();
    base.check(&spec)?;
    let c = Coefficients::new(forms)?;
    let mut frames = Grid2::from_fn(spec, |_, _| *init);
    match order {
        PathOrder::UFirst => {
            let row = integrate_line(&Line::row(&c.along_u, base.j), spec.du, base.i, *init, true)?;
            for (i, start) in row.into_iter().enumerate() {
                let col = integrate_line(&Line::column(&c.along_v, i), spec.dv, base.j, start, false)?;
                for (j, f) in col.into_iter().enumerate() {
                    *frames.at_mut(i, j) = f;
                }
            }
        }
        PathOrder::VFirst => {
            let col = integrate_line(&Line::column(&c.along_v, base.i), spec.dv, base.j, *init, false)?;
            for (j, start) in col.into_iter().enumerate() {
                let row = integrate_line(&Line::row(&c.along_u, j), spec.du, base.i, start, true)?;
                for (i, f) in row.into_iter().enumerate() {
                    *frames.at_mut(i, j) = f;
                }
            }
        }
    }
    Ok(frames)
}

/// Integrate the frame equations of a principal chart from `init` at the
/// base node.
pub fn integrate_frame(
    forms: &FormFields,
    init: &FrameState,
    base: BaseIndex,
    order: PathOrder,
) -> Result<SurfaceMesh> {
    let frames = integrate_frames(forms, init, base, order)?;
    Ok(SurfaceMesh { positions: frames.map(|f| f.x), normals: Some(frames.map(|f| f.n)) })
}

/// Largest node-wise distance between the `u`-first and `v`-first
/// integrations. Tends to zero under refinement exactly when the data satisfy
/// the Gauss and Codazzi equations.
pub fn path_consistency_diagnostic(forms: &FormFields, init: &FrameState, base: BaseIndex) -> Result<f64> {
    let a = integrate_frame(forms, init, base, PathOrder::UFirst)?;
    let b = integrate_frame(forms, init, base, PathOrder::VFirst)?;
    Ok(a.positions.values.iter().zip(&b.positions.values).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_forms(spec: GridSpec, e: f64, g: f64, l: f64, n: f64) -> FormFields {
        let c = |x| ScalarGrid::constant(spec, x);
        FormFields::principal(c(e), c(g), c(l), c(n)).unwrap()
    }

    #[test]
    fn plane_data_gives_the_lattice() {
        let spec = GridSpec::from_ranges((-1.0, 1.0, 9), (0.0, 2.0, 7)).unwrap();
        let forms = constant_forms(spec, 1.0, 1.0, 0.0, 0.0);
        let base = spec.center();
        let mesh = integrate_frame(&forms, &FrameState::default(), base, PathOrder::UFirst).unwrap();
        for j in 0..spec.nv {
            for i in 0..spec.nu {
                let expect = Vec3::new(spec.u(i) - spec.u(base.i), spec.v(j) - spec.v(base.j), 0.0);
                assert!((mesh.positions.at(i, j) - expect).norm() < 1e-14);
            }
        }
        assert!(path_consistency_diagnostic(&forms, &FrameState::default(), base).unwrap() < 1e-12);
    }

    #[test]
    fn cylinder_data_lies_on_a_unit_cylinder() {
        let spec = GridSpec::from_ranges((0.0, std::f64::consts::PI, 65), (0.0, 2.0, 17)).unwrap();
        let forms = constant_forms(spec, 1.0, 1.0, 1.0, 0.0);
        let mesh =
            integrate_frame(&forms, &FrameState::default(), BaseIndex { i: 0, j: 0 }, PathOrder::UFirst).unwrap();
        // starting at the origin with normal +z the axis is the y axis through (0, 0, 1)
        for p in &mesh.positions.values {
            let r = (p.x * p.x + (p.z - 1.0).powi(2)).sqrt();
            assert!((r - 1.0).abs() < 1e-8, "{r}");
        }
    }

    #[test]
    fn normals_stay_unit_and_orthogonal_to_steps() {
        let spec = GridSpec::from_ranges((0.0, 1.0, 17), (0.0, 1.0, 17)).unwrap();
        let forms = constant_forms(spec, 1.0, 4.0, 0.3, -0.2);
        let mesh = integrate_frame(&forms, &FrameState::default(), spec.center(), PathOrder::VFirst).unwrap();
        let normals = mesh.normals.unwrap();
        for n in &normals.values {
            assert!((n.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_steps_through_strong_curvature_fail() {
        let spec = GridSpec::from_ranges((0.0, 10.0, 4), (0.0, 1.0, 4)).unwrap();
        let forms = constant_forms(spec, 1.0, 1.0, 5.0, 0.0);
        assert!(matches!(
            integrate_frame(&forms, &FrameState::default(), BaseIndex { i: 0, j: 0 }, PathOrder::UFirst),
            Err(Error::Integration(_))
        ));
    }

    #[test]
    fn rejects_improper_initial_frame() {
        let flip = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(FrameState::from_rotation(Vec3::zeros(), &flip).is_err());
    }
}
