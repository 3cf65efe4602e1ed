//! Monotone quasi-Newton ascent for small smooth problems.

/// Stopping rules.
#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    /// Stop once `|Δf| ≤ rel_tol · max(1, |f|)` on consecutive steps.
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AscentResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn identity(n: usize, scale: f64) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = scale;
    }
    h
}

/// Maximize `f` using BFGS directions and a backtracking Armijo search.
/// Steps are accepted only when `f` increases, so `trace` is nondecreasing.
pub fn maximize(
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    x0: Vec<f64>,
    opts: AscentOptions,
) -> AscentResult {
    let n = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    let mut g = grad(&x);
    let mut trace = vec![fx];
    // inverse Hessian approximation of -f
    let mut h = identity(n, 1.0 / dot(&g, &g).sqrt().max(1.0));
    let mut fresh = true;
    let mut small_steps = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let mut dir: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &dir);
        if !(slope > 0.0) {
            h = identity(n, 1.0 / dot(&g, &g).sqrt().max(1.0));
            fresh = true;
            dir = g.clone();
            slope = dot(&g, &dir);
            if !(slope > 0.0) {
                converged = true;
                break;
            }
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-20 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
            let fnew = f(&xn);
            if fnew.is_finite() && fnew > fx && fnew >= fx + 1e-4 * alpha * slope {
                accepted = Some((xn, fnew));
                break;
            }
            alpha *= 0.5;
        }

        let Some((xn, fnew)) = accepted else {
            if fresh {
                // No ascent even along the gradient: stationary to working precision.
                converged = true;
                break;
            }
            h = identity(n, 1.0 / dot(&g, &g).sqrt().max(1.0));
            fresh = true;
            continue;
        };

        let gn = grad(&xn);
        // s = step, y = change in gradient of -f
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&gn).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if fresh {
                h = identity(n, sy / dot(&y, &y));
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            fresh = false;
        }

        let change = fnew - fx;
        x = xn;
        fx = fnew;
        g = gn;
        trace.push(fx);

        if change <= opts.rel_tol * fx.abs().max(1.0) {
            small_steps += 1;
            if small_steps >= 2 {
                converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }

    AscentResult {
        x,
        value: fx,
        iterations,
        converged,
        trace,
    }
}

/// Central-difference gradient.
pub fn numeric_gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let down = f(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}
