//! Analytic parametric charts with exact second-order jets.
//!
//! Every chart here is hand-differentiated; nothing is finite-differenced, so
//! downstream discretization error is the only error in the pipeline.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::numerics::interp::CubicSpline;
use crate::numerics::{Grid2, GridSpec};

pub type Vec3 = Vector3<f64>;

/// Position and first/second partial derivatives of a chart at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub x: Vec3,
    pub xu: Vec3,
    pub xv: Vec3,
    pub xuu: Vec3,
    pub xuv: Vec3,
    pub xvv: Vec3,
}

impl Jet2 {
    /// Apply the rigid motion `p -> rotation * p + translation`.
    pub fn transformed(&self, rotation: &nalgebra::Matrix3<f64>, translation: &Vec3) -> Self {
        Self {
            x: rotation * self.x + translation,
            xu: rotation * self.xu,
            xv: rotation * self.xv,
            xuu: rotation * self.xuu,
            xuv: rotation * self.xuv,
            xvv: rotation * self.xvv,
        }
    }
}

/// Sampled meridian `(r(s), z(s))` of a surface of revolution.
#[derive(Debug, Clone)]
pub struct Profile {
    r: CubicSpline,
    z: CubicSpline,
}

impl Profile {
    pub fn new(s: Vec<f64>, r: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if r.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Regularity("profile radius must stay positive".into()));
        }
        Ok(Self { r: CubicSpline::natural(s.clone(), r)?, z: CubicSpline::natural(s, z)? })
    }

    /// Read a CSV file with header `s,r,z`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let (mut s, mut r, mut z) = (Vec::new(), Vec::new(), Vec::new());
        for record in reader.deserialize() {
            let (si, ri, zi): (f64, f64, f64) = record?;
            s.push(si);
            r.push(ri);
            z.push(zi);
        }
        Self::new(s, r, z)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.r.domain()
    }
}

#[derive(Debug, Clone)]
pub enum Surface {
    Plane,
    Sphere {
        radius: f64,
    },
    Cylinder {
        radius: f64,
    },
    Cone {
        half_angle: f64,
    },
    Torus {
        major: f64,
        minor: f64,
    },
    Catenoid {
        scale: f64,
    },
    /// Graph `z = (a u^2 + b v^2)/2 + c u v + d u^3/6`; not principal when `c != 0`.
    Monge {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    },
    Revolution(Profile),
}

/// Closed parameter rectangle; open sides are marked by infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDomain {
    pub u: (f64, f64),
    pub v: (f64, f64),
    /// Whether the `u` bounds are excluded.
    pub u_open: bool,
    /// Whether the `v` bounds are excluded.
    pub v_open: bool,
}

impl ParamDomain {
    fn all() -> Self {
        Self {
            u: (f64::NEG_INFINITY, f64::INFINITY),
            v: (f64::NEG_INFINITY, f64::INFINITY),
            u_open: true,
            v_open: true,
        }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        let inside = |x: f64, (lo, hi): (f64, f64), open: bool| {
            if open {
                x > lo && x < hi
            } else {
                x >= lo && x <= hi
            }
        };
        u.is_finite() && v.is_finite() && inside(u, self.u, self.u_open) && inside(v, self.v, self.v_open)
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    name: String,
    params: BTreeMap<String, f64>,
    surface: Surface,
    domain: ParamDomain,
}

pub const SURFACE_NAMES: &[&str] = &["plane", "sphere", "cylinder", "cone", "torus", "catenoid", "monge", "revolution"];

impl CatalogEntry {
    pub fn plane() -> Self {
        Self::build(Surface::Plane, BTreeMap::new()).unwrap()
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        Self::build(Surface::Sphere { radius }, params(&[("R", radius)]))
    }

    pub fn cylinder(radius: f64) -> Result<Self> {
        Self::build(Surface::Cylinder { radius }, params(&[("r", radius)]))
    }

    pub fn cone(half_angle: f64) -> Result<Self> {
        Self::build(Surface::Cone { half_angle }, params(&[("alpha", half_angle)]))
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        Self::build(Surface::Torus { major, minor }, params(&[("R", major), ("r", minor)]))
    }

    pub fn catenoid(scale: f64) -> Result<Self> {
        Self::build(Surface::Catenoid { scale }, params(&[("c", scale)]))
    }

    pub fn monge(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::build(Surface::Monge { a, b, c, d }, params(&[("a", a), ("b", b), ("c", c), ("d", d)]))
    }

    pub fn revolution(profile: Profile) -> Result<Self> {
        Self::build(Surface::Revolution(profile), BTreeMap::new())
    }

    /// Look an entry up by name with `key=value` overrides of its defaults.
    pub fn from_name(name: &str, overrides: &[(String, f64)], profile: Option<Profile>) -> Result<Self> {
        let known: &[(&str, f64)] = match name {
            "plane" => &[],
            "sphere" => &[("R", 1.0)],
            "cylinder" => &[("r", 1.0)],
            "cone" => &[("alpha", std::f64::consts::FRAC_PI_6)],
            "torus" => &[("R", 2.0), ("r", 1.0)],
            "catenoid" => &[("c", 1.0)],
            "monge" => &[("a", 1.0), ("b", -0.5), ("c", 0.3), ("d", 0.2)],
            "revolution" => &[],
            other => return Err(Error::UnknownSurface(other.to_string())),
        };
        let mut p = params(known);
        for (key, value) in overrides {
            match p.get_mut(key) {
                Some(slot) => *slot = *value,
                None => return Err(Error::Invalid(format!("surface `{name}` has no parameter `{key}`"))),
            }
        }
        match name {
            "plane" => Ok(Self::plane()),
            "sphere" => Self::sphere(p["R"]),
            "cylinder" => Self::cylinder(p["r"]),
            "cone" => Self::cone(p["alpha"]),
            "torus" => Self::torus(p["R"], p["r"]),
            "catenoid" => Self::catenoid(p["c"]),
            "monge" => Self::monge(p["a"], p["b"], p["c"], p["d"]),
            _ => {
                let profile = profile
                    .ok_or_else(|| Error::Invalid("surface `revolution` needs a profile (s,r,z samples)".into()))?;
                Self::revolution(profile)
            }
        }
    }

    fn build(surface: Surface, params: BTreeMap<String, f64>) -> Result<Self> {
        if params.values().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("surface parameters must be finite".into()));
        }
        let positive = |x: f64, what: &str| {
            if x > 0.0 {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{what} must be positive, got {x}")))
            }
        };
        let mut domain = ParamDomain::all();
        let name = match &surface {
            Surface::Plane => "plane",
            Surface::Sphere { radius } => {
                positive(*radius, "sphere radius")?;
                domain.u = (-FRAC_PI_2, FRAC_PI_2);
                "sphere"
            }
            Surface::Cylinder { radius } => {
                positive(*radius, "cylinder radius")?;
                "cylinder"
            }
            Surface::Cone { half_angle } => {
                if !(*half_angle > 0.0 && *half_angle < FRAC_PI_2) {
                    return Err(Error::Invalid(format!("cone half-angle must lie in (0, pi/2), got {half_angle}")));
                }
                domain.v = (0.0, f64::INFINITY);
                "cone"
            }
            Surface::Torus { major, minor } => {
                positive(*minor, "torus tube radius r")?;
                if !(major > minor) {
                    return Err(Error::Invalid(format!("torus needs R > r, got R = {major}, r = {minor}")));
                }
                "torus"
            }
            Surface::Catenoid { scale } => {
                positive(*scale, "catenoid scale")?;
                "catenoid"
            }
            Surface::Monge { .. } => "monge",
            Surface::Revolution(profile) => {
                domain.u = profile.domain();
                domain.u_open = false;
                "revolution"
            }
        };
        Ok(Self { name: name.to_string(), params, surface, domain })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn domain(&self) -> ParamDomain {
        self.domain
    }

    /// Whether the chart is known to satisfy `F = M = 0` identically.
    pub fn is_principal(&self) -> bool {
        match self.surface {
            Surface::Monge { c, .. } => c == 0.0,
            Surface::Revolution(_) => false,
            _ => true,
        }
    }

    pub fn evaluate_jet(&self, u: f64, v: f64) -> Result<Jet2> {
        if !self.domain.contains(u, v) {
            return Err(Error::Domain { surface: self.name.clone(), u, v });
        }
        Ok(jet(&self.surface, u, v))
    }

    /// Jets at every node of `spec`.
    pub fn sample_surface(&self, spec: &GridSpec) -> Result<Grid2<Jet2>> {
        Grid2::try_from_fn(*spec, |i, j| self.evaluate_jet(spec.u(i), spec.v(j)))
    }
}

fn params(list: &[(&str, f64)]) -> BTreeMap<String, f64> {
    list.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn v3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

fn jet(surface: &Surface, u: f64, v: f64) -> Jet2 {
    use Surface::*;
    let (su, cu) = u.sin_cos();
    let (sv, cv) = v.sin_cos();
    let zero = Vec3::zeros();
    match *surface {
        Plane => {
            Jet2 { x: v3(u, v, 0.0), xu: v3(1.0, 0.0, 0.0), xv: v3(0.0, 1.0, 0.0), xuu: zero, xuv: zero, xvv: zero }
        }
        Sphere { radius: r } => Jet2 {
            x: r * v3(cu * cv, cu * sv, su),
            xu: r * v3(-su * cv, -su * sv, cu),
            xv: r * v3(-cu * sv, cu * cv, 0.0),
            xuu: r * v3(-cu * cv, -cu * sv, -su),
            xuv: r * v3(su * sv, -su * cv, 0.0),
            xvv: r * v3(-cu * cv, -cu * sv, 0.0),
        },
        Cylinder { radius: r } => Jet2 {
            x: v3(r * cu, r * su, v),
            xu: v3(-r * su, r * cu, 0.0),
            xv: v3(0.0, 0.0, 1.0),
            xuu: v3(-r * cu, -r * su, 0.0),
            xuv: zero,
            xvv: zero,
        },
        Cone { half_angle } => {
            let (sa, ca) = half_angle.sin_cos();
            Jet2 {
                x: v * v3(sa * cu, sa * su, ca),
                xu: v * sa * v3(-su, cu, 0.0),
                xv: v3(sa * cu, sa * su, ca),
                xuu: -v * sa * v3(cu, su, 0.0),
                xuv: sa * v3(-su, cu, 0.0),
                xvv: zero,
            }
        }
        Torus { major, minor: r } => {
            let rho = major + r * cu;
            Jet2 {
                x: v3(rho * cv, rho * sv, r * su),
                xu: v3(-r * su * cv, -r * su * sv, r * cu),
                xv: v3(-rho * sv, rho * cv, 0.0),
                xuu: v3(-r * cu * cv, -r * cu * sv, -r * su),
                xuv: v3(r * su * sv, -r * su * cv, 0.0),
                xvv: v3(-rho * cv, -rho * sv, 0.0),
            }
        }
        Catenoid { scale: c } => {
            let (ch, sh) = (u.cosh(), u.sinh());
            Jet2 {
                x: c * v3(ch * cv, ch * sv, u),
                xu: c * v3(sh * cv, sh * sv, 1.0),
                xv: c * v3(-ch * sv, ch * cv, 0.0),
                xuu: c * v3(ch * cv, ch * sv, 0.0),
                xuv: c * v3(-sh * sv, sh * cv, 0.0),
                xvv: c * v3(-ch * cv, -ch * sv, 0.0),
            }
        }
        Monge { a, b, c, d } => Jet2 {
            x: v3(u, v, 0.5 * (a * u * u + b * v * v) + c * u * v + d * u * u * u / 6.0),
            xu: v3(1.0, 0.0, a * u + c * v + 0.5 * d * u * u),
            xv: v3(0.0, 1.0, b * v + c * u),
            xuu: v3(0.0, 0.0, a + d * u),
            xuv: v3(0.0, 0.0, c),
            xvv: v3(0.0, 0.0, b),
        },
        Revolution(ref profile) => {
            let (r, dr, ddr) = profile.r.eval(u);
            let (z, dz, ddz) = profile.z.eval(u);
            Jet2 {
                x: v3(r * cv, r * sv, z),
                xu: v3(dr * cv, dr * sv, dz),
                xv: v3(-r * sv, r * cv, 0.0),
                xuu: v3(ddr * cv, ddr * sv, ddz),
                xuv: v3(-dr * sv, dr * cv, 0.0),
                xvv: v3(-r * cv, -r * sv, 0.0),
            }
        }
    }
}
