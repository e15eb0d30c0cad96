//! Quadrature rules used by the rate integrals and the stationarity checks:
//! Gauss-Laguerre nodes/weights for integrals against an exponential weight,
//! plus adaptive Simpson for everything on a finite interval.

/// Nodes and weights for an n-point Gauss-Laguerre rule, i.e.
/// `sum(w_i * f(x_i)) ~= integral_0^inf f(x) exp(-x) dx`.
///
/// Newton iteration on the Laguerre recurrence, with the usual staggered
/// initial guesses. Accurate to near machine precision for n <= 192.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "need at least two nodes");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    let mut x = 0.0_f64;
    for i in 0..n {
        // initial guess, from the previous root for i >= 2
        if i == 0 {
            x = 3.0 / (1.0 + 2.4 * nf);
        } else if i == 1 {
            x += 15.0 / (1.0 + 2.5 * nf);
        } else {
            let ai = (i - 1) as f64;
            x += ((1.0 + 2.55 * ai) / (1.9 * ai)) * (x - nodes[i - 2]);
        }
        let mut p1 = 0.0;
        let mut p2;
        for _ in 0..120 {
            // evaluate L_n(x) and L_{n-1}(x) by upward recurrence
            p1 = 1.0;
            p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j as f64 - 1.0 - x) * p2 - (j as f64 - 1.0) * p3) / j as f64;
            }
            let pp = nf * (p1 - p2) / x;
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs() {
                break;
            }
            let _ = p1;
        }
        nodes[i] = x;
        // w_i = x_i / ((n+1) L_{n+1}(x_i))^2
        let mut q1 = 1.0;
        let mut q2 = 0.0;
        for j in 1..=(n + 1) {
            let q3 = q2;
            q2 = q1;
            q1 = ((2.0 * j as f64 - 1.0 - x) * q2 - (j as f64 - 1.0) * q3) / j as f64;
        }
        let d = (nf + 1.0) * q1;
        weights[i] = x / (d * d);
        let _ = p1;
    }
    (nodes, weights)
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`. Recursion depth is capped; the cap is generous enough that the
/// returned value is at worst a composite-Simpson estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // keep the requested tolerance above evaluation noise, or the recursion
    // chases roundoff and the work explodes
    let tol = tol.max(1e-14 * whole.abs());
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 32)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Composite Simpson rule with `n` panels (n is rounded up to even).
pub fn composite_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
