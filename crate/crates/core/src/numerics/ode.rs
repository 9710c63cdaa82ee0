//! Explicit Runge–Kutta integrators over complex state vectors.
//!
//! [`integrate_adaptive`] is a Dormand–Prince 5(4) pair with step-size control
//! that lands exactly on every requested output time. [`rk4_fixed`] is the
//! classical fixed-step scheme used where a deterministic step count matters.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("output times must be non-decreasing and not precede t0")]
    BadTimes,
    #[error("non-finite state at t = {0:e}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
    /// Optional cap on the step size.
    pub max_step: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: 1e-9,
            abs: 1e-12,
            max_steps: 5_000_000,
            max_step: None,
        }
    }
}

// Dormand–Prince coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (error weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy_into(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for i in 0..y.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrates dy/dt = f(t, y) from `t0` and records the state at each time in
/// `times` (which must be sorted and ≥ `t0`).
pub fn integrate_adaptive<F>(
    mut f: F,
    t0: f64,
    y0: &[Complex64],
    times: &[f64],
    tol: Tolerances,
) -> Result<Vec<Vec<Complex64>>, OdeError>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(OdeError::BadTimes);
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut out = Vec::with_capacity(times.len());
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut ynew = vec![Complex64::new(0.0, 0.0); n];
    let mut steps = 0usize;

    f(t, &y, &mut k[0]);
    let mut h = initial_step(&y, &k[0], tol);

    for &target in times {
        while t < target {
            if steps >= tol.max_steps {
                return Err(OdeError::TooManySteps(tol.max_steps));
            }
            let remaining = target - t;
            let mut last = false;
            let mut step = h;
            if let Some(m) = tol.max_step {
                step = step.min(m);
            }
            if step >= remaining {
                step = remaining;
                last = true;
            }
            if step <= 1e-15 * t.abs().max(target.abs()) && !last {
                return Err(OdeError::StepSizeUnderflow { t, h: step });
            }

            {
                let (k0, rest) = k.split_at_mut(1);
                let k0 = &k0[0];
                axpy_into(&mut tmp, &y, step, &[(A21, k0)]);
                f(t + C2 * step, &tmp, &mut rest[0]);
                axpy_into(&mut tmp, &y, step, &[(A31, k0), (A32, &rest[0])]);
                f(t + C3 * step, &tmp, &mut rest[1]);
                axpy_into(&mut tmp, &y, step, &[(A41, k0), (A42, &rest[0]), (A43, &rest[1])]);
                f(t + C4 * step, &tmp, &mut rest[2]);
                axpy_into(
                    &mut tmp,
                    &y,
                    step,
                    &[(A51, k0), (A52, &rest[0]), (A53, &rest[1]), (A54, &rest[2])],
                );
                f(t + C5 * step, &tmp, &mut rest[3]);
                axpy_into(
                    &mut tmp,
                    &y,
                    step,
                    &[
                        (A61, k0),
                        (A62, &rest[0]),
                        (A63, &rest[1]),
                        (A64, &rest[2]),
                        (A65, &rest[3]),
                    ],
                );
                f(t + step, &tmp, &mut rest[4]);
                axpy_into(
                    &mut ynew,
                    &y,
                    step,
                    &[(B1, k0), (B3, &rest[1]), (B4, &rest[2]), (B5, &rest[3]), (B6, &rest[4])],
                );
                f(t + step, &ynew, &mut rest[5]);
            }

            let mut err: f64 = 0.0;
            for i in 0..n {
                let e =
                    (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * step;
                let scale = tol.abs + tol.rel * y[i].norm().max(ynew[i].norm());
                err = err.max(e.norm() / scale);
            }
            if !err.is_finite() {
                return Err(OdeError::NonFinite(t));
            }
            steps += 1;
            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut ynew);
                // FSAL: the last stage is the derivative at the new point.
                k.swap(0, 6);
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last {
                    h = step * factor;
                } else {
                    h = h.max(step * factor);
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn initial_step(y: &[Complex64], dy: &[Complex64], tol: Tolerances) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for (a, b) in y.iter().zip(dy) {
        let scale = tol.abs + tol.rel * a.norm();
        d0 = d0.max(a.norm() / scale);
        d1 = d1.max(b.norm() / scale);
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    tol.max_step.map_or(h, |m| h.min(m))
}

/// Classical fixed-step RK4 from `t0` to `t1` in `steps` equal steps.
pub fn rk4_fixed<F>(mut f: F, t0: f64, t1: f64, y0: &[Complex64], steps: usize) -> Vec<Complex64>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y0.len();
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        f(t, &y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * h;
        }
        f(t + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn exponential_decay_hits_requested_times() {
        let times = [0.0, 0.5, 1.0, 3.0];
        let out = integrate_adaptive(
            |_, y, dy| dy[0] = -y[0] * 2.0,
            0.0,
            &[c(1.0)],
            &times,
            Tolerances::default(),
        )
        .unwrap();
        for (t, y) in times.iter().zip(&out) {
            assert!((y[0].re - (-2.0 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_preserves_norm() {
        let w = 7.0;
        let out = integrate_adaptive(
            |_, y, dy| {
                dy[0] = Complex64::new(0.0, -w) * y[0];
            },
            0.0,
            &[c(1.0)],
            &[10.0],
            Tolerances::default(),
        )
        .unwrap();
        let expected = Complex64::new(0.0, -w * 10.0).exp();
        assert!((out[0][0] - expected).norm() < 1e-7);
    }

    #[test]
    fn rejects_unsorted_times() {
        let r = integrate_adaptive(|_, _, _| {}, 0.0, &[c(1.0)], &[1.0, 0.5], Tolerances::default());
        assert_eq!(r.unwrap_err(), OdeError::BadTimes);
    }

    #[test]
    fn rk4_fourth_order() {
        let exact = (-1.0f64).exp();
        let e1 = (rk4_fixed(|_, y, dy| dy[0] = -y[0], 0.0, 1.0, &[c(1.0)], 10)[0].re - exact).abs();
        let e2 = (rk4_fixed(|_, y, dy| dy[0] = -y[0], 0.0, 1.0, &[c(1.0)], 20)[0].re - exact).abs();
        let ratio = e1 / e2;
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }
}
