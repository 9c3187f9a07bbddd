//! Independent reference computations. None of these call into the code paths
//! they are used to check: evaluation is a direct triple sum, integrals are
//! adaptive quadrature of pointwise samples, spike times come from dense
//! time stepping.
#![allow(dead_code)]

use std::f64::consts::TAU;

use vtem::{CoefficientTensor, Complex64, FrameCube};

/// Adaptive Simpson quadrature.
pub fn quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    // split up front so the initial Simpson estimate cannot be accidentally exact
    let pieces = 16;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (flo, fhi) = (f(lo), f(hi));
            let (m, fm, whole) = simpson(f, lo, flo, hi, fhi);
            recurse(f, lo, flo, hi, fhi, m, fm, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// Complex quadrature, componentwise.
pub fn quad_complex(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    Complex64::new(quad(&|t| f(t).re, a, b, tol), quad(&|t| f(t).im, a, b, tol))
}

/// Direct triple Fourier sum, returning the full complex value.
pub fn direct_eval(tensor: &CoefficientTensor, d1: f64, d2: f64, t: f64) -> Complex64 {
    let p = tensor.params();
    let (k0, k1, k2) = (p.k0 as i64, p.k1 as i64, p.k2 as i64);
    let mut sum = Complex64::new(0.0, 0.0);
    for a in -k0..=k0 {
        for b in -k1..=k1 {
            for c in -k2..=k2 {
                let phase = t * a as f64 / p.period_t
                    + d1 * b as f64 / p.period_d1
                    + d2 * c as f64 / p.period_d2;
                sum += tensor.get(a, b, c).unwrap() * Complex64::cis(TAU * phase);
            }
        }
    }
    sum
}

/// Direct evaluation of `sum_k c_k exp(j 2 pi k t / T)`.
pub fn direct_eval_1d(coeffs: &[Complex64], period: f64, t: f64) -> Complex64 {
    let k0 = (coeffs.len() / 2) as i64;
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * Complex64::cis(TAU * (i as i64 - k0) as f64 * t / period))
        .sum()
}

/// Centered 3D DFT by direct summation, scaled by `1/N`, laid out like the
/// coefficient tensor (`k0` slowest).
pub fn direct_dft(frames: &FrameCube) -> Vec<Complex64> {
    let [n1, n2, nt] = frames.dims();
    let (h1, h2, h0) = ((n1 / 2) as i64, (n2 / 2) as i64, (nt / 2) as i64);
    let scale = 1.0 / (n1 * n2 * nt) as f64;
    let mut out = Vec::new();
    for k0 in -h0..=h0 {
        for k1 in -h1..=h1 {
            for k2 in -h2..=h2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for p in 0..n1 {
                    for q in 0..n2 {
                        for r in 0..nt {
                            let phase = (p as i64 * k1) as f64 / n1 as f64
                                + (q as i64 * k2) as f64 / n2 as f64
                                + (r as i64 * k0) as f64 / nt as f64;
                            acc += frames.get(p, q, r) * Complex64::cis(-TAU * phase);
                        }
                    }
                }
                out.push(acc * scale);
            }
        }
    }
    out
}

/// Spike times of an integrate-and-fire machine by explicit time stepping:
/// trapezoidal accumulation of `(y + beta)` and linear interpolation of each
/// threshold crossing.
pub fn dense_step_spikes(
    y: &dyn Fn(f64) -> f64,
    kappa: f64,
    delta: f64,
    beta: f64,
    window: (f64, f64),
    step: f64,
) -> Vec<f64> {
    let quantum = 2.0 * kappa * delta;
    let mut acc = 0.0;
    let mut t = window.0;
    let mut prev = y(t) + beta;
    let mut spikes = Vec::new();
    while t < window.1 {
        let h = step.min(window.1 - t);
        let next = y(t + h) + beta;
        let inc = 0.5 * h * (prev + next);
        if acc + inc >= quantum {
            let frac = (quantum - acc) / inc;
            spikes.push(t + frac * h);
            acc = acc + inc - quantum;
        } else {
            acc += inc;
        }
        t += h;
        prev = next;
    }
    spikes
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
