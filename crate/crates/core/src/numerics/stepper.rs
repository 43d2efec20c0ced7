//! Classical fourth-order Runge-Kutta step for systems whose coefficients are
//! only known at the step start, midpoint and end.

/// Where in the current step the right-hand side is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPoint {
    Start,
    Mid,
    End,
}

/// Advance `y` by one step of length `h`.
///
/// `rhs(point, y)` must return the derivative with respect to the step
/// variable using coefficients sampled at `point`.
pub fn rk4_step<const N: usize>(
    y: &[f64; N],
    h: f64,
    mut rhs: impl FnMut(StepPoint, &[f64; N]) -> [f64; N],
) -> [f64; N] {
    let axpy = |a: f64, k: &[f64; N]| {
        let mut out = *y;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += a * ki;
        }
        out
    };
    let k1 = rhs(StepPoint::Start, y);
    let k2 = rhs(StepPoint::Mid, &axpy(0.5 * h, &k1));
    let k3 = rhs(StepPoint::Mid, &axpy(0.5 * h, &k2));
    let k4 = rhs(StepPoint::End, &axpy(h, &k3));
    let mut out = *y;
    for n in 0..N {
        out[n] += h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
    }
    out
}
