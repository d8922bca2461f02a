//! Fixed-step classical Runge-Kutta integration.

/// Integrates the autonomous system `y' = f(y)` over a unit time span with
/// `steps` classical fourth-order steps. `f(y, out)` writes the field into `out`.
pub fn rk4_unit<F>(f: F, y0: &[f64], steps: usize) -> Vec<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    rk4(|_, y, out| f(y, out), y0, 0.0, 1.0, steps)
}

/// [`rk4_unit`] with step doubling from `steps` until two successive
/// results agree to `rel_tol * max(1, |y|_inf)` or `max_steps` is reached.
/// Returns the finer result and the step count used.
pub fn rk4_unit_adaptive<F>(f: F, y0: &[f64], steps: usize, rel_tol: f64, max_steps: usize) -> (Vec<f64>, usize)
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut n = steps.max(1);
    let mut prev = rk4_unit(&f, y0, n);
    while n < max_steps {
        n *= 2;
        let cur = rk4_unit(&f, y0, n);
        let scale = cur.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let diff = cur.iter().zip(&prev).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        prev = cur;
        if !(diff > rel_tol * scale) {
            break;
        }
    }
    (prev, n)
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` with `steps` classical
/// fourth-order steps.
pub fn rk4<F>(f: F, y0: &[f64], t0: f64, t1: f64, steps: usize) -> Vec<f64>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let d = y0.len();
    let steps = steps.max(1);
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        f(t, &y, &mut k1);
        for i in 0..d {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        f(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..d {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        f(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..d {
            tmp[i] = y[i] + h * k3[i];
        }
        f(t + h, &tmp, &mut k4);
        for i in 0..d {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}
