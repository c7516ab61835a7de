//! Reference computations that share no code with the library: fixed-order
//! Gauss–Legendre on many panels, plain bisection, direct sums.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// ∫_a^b f on `panels` equal panels with a 20-point rule each.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for &(x, w) in &rule {
            total += w * 0.5 * h * f(mid + 0.5 * h * x);
        }
    }
    total
}

/// ∫_r^{top} g(s) ds/s computed in t = ln s.
pub fn integrate_log(g: impl Fn(f64) -> f64, r: f64, top: f64, panels: usize) -> f64 {
    integrate(|t| g(t.exp()), r.ln(), top.ln(), panels)
}

/// L(r) = ∫_r^{R₀} ℓ(s)/s ds.
pub fn scale_l(ell: impl Fn(f64) -> f64, r: f64, r0: f64) -> f64 {
    integrate_log(ell, r, r0, 400)
}

/// Root of a decreasing function on [lo, hi] by bisection in ln r.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m.exp()) > target {
            a = m;
        } else {
            b = m;
        }
    }
    (0.5 * (a + b)).exp()
}

/// ψ(ξ) = 2 ∫_0^{R₀} (1 − cos ξs) ℓ(s)/s ds in one dimension.
pub fn symbol_1d(ell: impl Fn(f64) -> f64, xi: f64, r0: f64) -> f64 {
    let one_minus_cos = |s: f64| 2.0 * (0.5 * xi * s).sin().powi(2);
    let s1 = r0.min(1.0 / xi);
    let near = integrate_log(|s| one_minus_cos(s) * ell(s), 1e-16 / xi, s1, 400);
    let far = if s1 < r0 {
        let panels = ((xi * r0) as usize) * 8 + 200;
        integrate(|s| one_minus_cos(s) * ell(s) / s, s1, r0, panels)
    } else {
        0.0
    };
    2.0 * (near + far)
}

/// A u(x) = ∫_0^{R₀} (u(x+s) + u(x−s) − 2u(x)) ℓ(s)/s ds in one dimension;
/// below s = 1e-3 the difference is replaced by u''(x)s² (plus an s⁴ term
/// of relative size 1e-7) to avoid cancellation.
pub fn operator_1d(ell: impl Fn(f64) -> f64, u: impl Fn(f64) -> f64, u2: impl Fn(f64) -> f64, x: f64, r0: f64) -> f64 {
    let cut = 1e-3;
    let taylor = u2(x) * integrate_log(|s| s * s * ell(s), 1e-30, cut, 400);
    let d = |s: f64| u(x + s) + u(x - s) - 2.0 * u(x);
    taylor + integrate_log(|s| d(s) * ell(s), cut, r0, 400)
}

/// Two-dimensional analogue: ∫_0^{R₀} ℓ(s)/s · ½∫_0^{2π} δ(sθ) dθ ds with
/// the periodic trapezoid rule in the angle.
pub fn operator_2d(ell: impl Fn(f64) -> f64, u: impl Fn(f64, f64) -> f64, x: (f64, f64), r0: f64) -> f64 {
    let m = 256;
    let ring = |s: f64| {
        let mut acc = 0.0;
        for k in 0..m {
            let th = 2.0 * PI * k as f64 / m as f64;
            let (c, si) = (th.cos(), th.sin());
            acc += u(x.0 + s * c, x.1 + s * si) - u(x.0, x.1);
        }
        acc * 2.0 * PI / m as f64
    };
    integrate_log(|s| ring(s) * ell(s), 1e-9, r0, 300)
}
