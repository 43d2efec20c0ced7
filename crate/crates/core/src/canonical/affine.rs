use nalgebra::{Matrix4, Vector4};

use crate::bonnet::coefficients_from_invariants;
use crate::error::Result;
use crate::numerics::interp::bicubic;
use crate::numerics::{GridSpec, ScalarGrid};

use super::InvariantGrid;

/// Affine relation between two canonical charts of one surface.
///
/// Without `swap`, node `(u, v)` of the first chart is the point
/// `(lambda u + c1, mu v + c2)` of the second. With `swap` it is
/// `(mu v + c2, lambda u + c1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFit {
    pub lambda: f64,
    pub mu: f64,
    pub c1: f64,
    pub c2: f64,
    pub swap: bool,
    /// RMS of the principal-curvature discrepancy over the overlap.
    pub misfit: f64,
    /// `+1` when the two charts induce the same normal, `-1` otherwise.
    pub orientation: f64,
    /// `| |lambda| sqrt(Ebar0) - sqrt(E(p)) |` where `p` is the first-chart
    /// point mapped onto the base node of the second chart and `Ebar0` is the
    /// matching metric coefficient there.
    pub normalization: f64,
    /// Fraction of sampled nodes of the first chart that land on the second.
    pub overlap: f64,
}

struct Fields {
    spec: GridSpec,
    nu1: ScalarGrid,
    nu2: ScalarGrid,
    log_e: ScalarGrid,
    log_g: ScalarGrid,
}

fn fields(inv: &InvariantGrid) -> Result<Fields> {
    let inv = inv.to_nu_mode()?;
    let forms = coefficients_from_invariants(&inv)?;
    Ok(Fields {
        spec: inv.spec(),
        nu1: inv.field1().clone(),
        nu2: inv.field2().clone(),
        log_e: forms.e.map(|x| x.ln()),
        log_g: forms.g.map(|x| x.ln()),
    })
}

struct Problem<'a> {
    a: &'a Fields,
    b: &'a Fields,
    samples: Vec<(usize, usize)>,
    swap: bool,
    nu_scale: f64,
}

impl Problem<'_> {
    fn image(&self, p: &Vector4<f64>, u: f64, v: f64) -> (f64, f64) {
        let (lambda, c1, mu, c2) = (p[0], p[1], p[2], p[3]);
        if self.swap {
            (mu * v + c2, lambda * u + c1)
        } else {
            (lambda * u + c1, mu * v + c2)
        }
    }

    fn orientation(&self, p: &Vector4<f64>) -> f64 {
        let s = (p[0] * p[2]).signum();
        if self.swap {
            -s
        } else {
            s
        }
    }

    /// Residual components for one sample node plus whether it lands inside.
    fn node(&self, p: &Vector4<f64>, i: usize, j: usize) -> ([f64; 5], bool) {
        let (sa, sb) = (self.a.spec, self.b.spec);
        let (u, v) = (sa.u(i), sa.v(j));
        let (ub, vb) = self.image(p, u, v);
        let (cu, cv) = (ub.clamp(sb.u0, sb.u_max()), vb.clamp(sb.v0, sb.v_max()));
        let outside = ((ub - cu) / (sb.u_max() - sb.u0)).hypot((vb - cv) / (sb.v_max() - sb.v0));
        let sigma = self.orientation(p);
        let f = |g: &ScalarGrid| bicubic(g, cu, cv);
        let (n1, n2, le, lg) = if self.swap {
            (f(&self.b.nu2), f(&self.b.nu1), f(&self.b.log_g), f(&self.b.log_e))
        } else {
            (f(&self.b.nu1), f(&self.b.nu2), f(&self.b.log_e), f(&self.b.log_g))
        };
        let w = self.nu_scale;
        let (la, lm) = ((p[0] * p[0]).ln(), (p[2] * p[2]).ln());
        (
            [
                self.a.nu1.at(i, j) - sigma * n1,
                self.a.nu2.at(i, j) - sigma * n2,
                w * (self.a.log_e.at(i, j) - la - le),
                w * (self.a.log_g.at(i, j) - lm - lg),
                10.0 * w * outside,
            ],
            outside == 0.0,
        )
    }

    fn residuals(&self, p: &Vector4<f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(5 * self.samples.len());
        for &(i, j) in &self.samples {
            out.extend(self.node(p, i, j).0);
        }
        out
    }

    fn cost(&self, p: &Vector4<f64>) -> f64 {
        if !(p[0].abs() > 1e-12 && p[2].abs() > 1e-12) {
            return f64::INFINITY;
        }
        let c: f64 = self.residuals(p).iter().map(|r| r * r).sum();
        if c.is_nan() {
            f64::INFINITY
        } else {
            c
        }
    }

    fn levenberg_marquardt(&self, start: Vector4<f64>) -> (Vector4<f64>, f64) {
        let mut p = start;
        let mut cost = self.cost(&p);
        let mut damping = 1e-3;
        for _ in 0..200 {
            if cost == 0.0 || !cost.is_finite() {
                break;
            }
            let r = self.residuals(&p);
            let mut jac = vec![[0.0; 4]; r.len()];
            for k in 0..4 {
                let h = 1e-7 * p[k].abs().max(1.0);
                let (mut lo, mut hi) = (p, p);
                lo[k] -= h;
                hi[k] += h;
                let (rl, rh) = (self.residuals(&lo), self.residuals(&hi));
                for (row, (a, b)) in jac.iter_mut().zip(rl.iter().zip(&rh)) {
                    row[k] = (b - a) / (2.0 * h);
                }
            }
            let mut jtj = Matrix4::<f64>::zeros();
            let mut jtr = Vector4::<f64>::zeros();
            for (row, ri) in jac.iter().zip(&r) {
                for a in 0..4 {
                    jtr[a] += row[a] * ri;
                    for b in 0..4 {
                        jtj[(a, b)] += row[a] * row[b];
                    }
                }
            }
            let mut improved = false;
            for _ in 0..20 {
                let mut m = jtj;
                for d in 0..4 {
                    m[(d, d)] += damping * jtj[(d, d)].max(1e-12);
                }
                let Some(step) = m.lu().solve(&(-jtr)) else {
                    damping *= 10.0;
                    continue;
                };
                let trial = p + step;
                let c = self.cost(&trial);
                if c < cost {
                    let done = (cost - c) <= 1e-15 * cost || step.amax() <= 1e-14 * p.amax().max(1.0);
                    p = trial;
                    cost = c;
                    damping = (damping / 10.0).max(1e-12);
                    improved = !done;
                    break;
                }
                damping *= 10.0;
            }
            if !improved {
                break;
            }
        }
        (p, cost)
    }
}

fn mean_abs(g: &ScalarGrid) -> f64 {
    g.values.iter().map(|x| x.abs()).sum::<f64>() / g.values.len() as f64
}

fn mean(g: &ScalarGrid) -> f64 {
    g.values.iter().sum::<f64>() / g.values.len() as f64
}

/// Fit the affine change of parameters relating two canonical grids of the
/// same surface, trying both assignments of the parameter directions.
pub fn check_affine_equivalence(inv_a: &InvariantGrid, inv_b: &InvariantGrid) -> Result<AffineFit> {
    let a = fields(inv_a)?;
    let b = fields(inv_b)?;
    let sa = a.spec;
    let stride_u = (sa.nu / 40).max(1);
    let stride_v = (sa.nv / 40).max(1);
    let margin = 2.min(sa.nu / 4).min(sa.nv / 4);
    let samples: Vec<(usize, usize)> = (margin..sa.nv - margin)
        .step_by(stride_v)
        .flat_map(|j| (margin..sa.nu - margin).step_by(stride_u).map(move |i| (i, j)))
        .collect();
    let nu_scale = 0.5 * (mean_abs(&a.nu1) + mean_abs(&a.nu2)).max(1e-12);
    let centre_a = (0.5 * (sa.u0 + sa.u_max()), 0.5 * (sa.v0 + sa.v_max()));
    let sb = b.spec;

    let mut best: Option<(f64, Vector4<f64>, bool)> = None;
    for swap in [false, true] {
        let problem = Problem { a: &a, b: &b, samples: samples.clone(), swap, nu_scale };
        let (eb, gb) = if swap { (&b.log_g, &b.log_e) } else { (&b.log_e, &b.log_g) };
        let lambda_m = (0.5 * (mean(&a.log_e) - mean(eb))).exp();
        let mu_m = (0.5 * (mean(&a.log_g) - mean(gb))).exp();
        let mut starts: Vec<(f64, Vector4<f64>)> = Vec::new();
        for (sl, sm) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            for (lm, mm) in [(1.0, 1.0), (lambda_m, mu_m)] {
                let (lambda, mu) = (sl * lm, sm * mm);
                for p in 0..7 {
                    for q in 0..7 {
                        let tu = sb.u0 + (sb.u_max() - sb.u0) * p as f64 / 6.0;
                        let tv = sb.v0 + (sb.v_max() - sb.v0) * q as f64 / 6.0;
                        let (c1, c2) = if swap {
                            (tv - lambda * centre_a.0, tu - mu * centre_a.1)
                        } else {
                            (tu - lambda * centre_a.0, tv - mu * centre_a.1)
                        };
                        let start = Vector4::new(lambda, c1, mu, c2);
                        starts.push((problem.cost(&start), start));
                    }
                }
            }
        }
        starts.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (_, start) in starts.iter().take(6) {
            let (p, cost) = problem.levenberg_marquardt(*start);
            if best.as_ref().is_none_or(|(c, _, _)| cost < *c) {
                best = Some((cost, p, swap));
            }
        }
    }
    let (_, p, swap) = best.expect("at least one start");
    let problem = Problem { a: &a, b: &b, samples: samples.clone(), swap, nu_scale };
    let (mut sum, mut inside) = (0.0, 0usize);
    for &(i, j) in &samples {
        let (r, ok) = problem.node(&p, i, j);
        if ok {
            sum += r[0] * r[0] + r[1] * r[1];
            inside += 1;
        }
    }
    let misfit = if inside > 0 { (sum / (2 * inside) as f64).sqrt() } else { f64::INFINITY };

    // the first-chart point that lands on the base node of the second chart
    let base_b = inv_b.base();
    let (ub0, vb0) = (sb.u(base_b.i), sb.v(base_b.j));
    let (lambda, c1, mu, c2) = (p[0], p[1], p[2], p[3]);
    let (pu, pv) = if swap { ((vb0 - c1) / lambda, (ub0 - c2) / mu) } else { ((ub0 - c1) / lambda, (vb0 - c2) / mu) };
    let e_bar0 = if swap { bicubic(&b.log_g, ub0, vb0).exp() } else { bicubic(&b.log_e, ub0, vb0).exp() };
    let e_a = bicubic(&a.log_e, pu, pv).exp();
    let normalization = (lambda.abs() * e_bar0.sqrt() - e_a.sqrt()).abs();

    Ok(AffineFit {
        lambda,
        mu,
        c1,
        c2,
        swap,
        misfit,
        orientation: problem.orientation(&p),
        normalization,
        overlap: inside as f64 / samples.len() as f64,
    })
}
