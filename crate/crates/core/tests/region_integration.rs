//! Region probabilities checked against direct numerical integration of the
//! joint exponential density, and against sampled frequencies.

#![allow(clippy::needless_range_loop)]

use relaysim::channel::SystemParams;
use relaysim::regions::{analytic_probabilities, empirical_probabilities, RegionProbabilities};
use relaysim::rng::stream;

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, eps, 48)
}

/// Region probabilities by iterated quadrature over the SNR plane.
fn integrated(p: &SystemParams) -> [f64; 5] {
    let thr = p.thresholds();
    let (t, s) = (thr.gamma_thr, thr.gamma_thr_sum);
    let (m1, m2) = (p.gamma * p.omega1, p.gamma * p.omega2);
    let dens = |x: f64, y: f64| (-x / m1).exp() / m1 * (-y / m2).exp() / m2;
    // Far tails beyond this many means carry less than exp(-60) of mass.
    let (x_end, y_end) = (t.max(s) + 60.0 * m1, t.max(s) + 60.0 * m2);
    let eps = 1e-13;
    let area = |x0: f64, x1: f64, y0: &dyn Fn(f64) -> f64, y1: &dyn Fn(f64) -> f64| {
        integrate(|x| integrate(|y| dens(x, y), y0(x), y1(x), eps / m1), x0, x1, eps)
    };
    let corner = s - t;
    let r1 = area(t, corner, &|x| s - x, &|_| y_end) + area(corner, x_end, &|_| t, &|_| y_end);
    let r2 = area(t, corner, &|_| t, &|x| s - x);
    let r3 = area(t, x_end, &|_| 0.0, &|_| t);
    let r4 = area(0.0, t, &|_| t, &|_| y_end);
    let r5 = area(0.0, t, &|_| 0.0, &|_| t);
    [r1, r2, r3, r4, r5]
}

fn cases() -> Vec<SystemParams> {
    let mut out = Vec::new();
    for db in [0.0, 5.0, 10.0, 20.0] {
        let g = 10f64.powf(db / 10.0);
        out.push(SystemParams::symmetric(g, 1.0).unwrap());
        out.push(SystemParams::new(2.0, 1.0, g, 1.0).unwrap());
    }
    out.push(SystemParams::new(1.0, 3.0, 4.0, 0.5).unwrap());
    out.push(SystemParams::new(0.7, 1.3, 8.0, 2.0).unwrap());
    out
}

#[test]
fn closed_form_matches_quadrature() {
    for p in cases() {
        let a = analytic_probabilities(&p).unwrap();
        let q = integrated(&p);
        for k in 0..5 {
            assert!((a.0[k] - q[k]).abs() < 1e-8, "{p:?} region {k}: {} vs {}", a.0[k], q[k]);
        }
    }
}

/// Binomial standard deviation of a frequency.
fn sigma(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

#[test]
fn closed_form_matches_sampling() {
    let n = 1_000_000;
    for (i, p) in [
        SystemParams::symmetric(10.0, 1.0).unwrap(),
        SystemParams::new(2.0, 1.0, 10.0, 1.0).unwrap(),
    ]
    .into_iter()
    .enumerate()
    {
        let a = analytic_probabilities(&p).unwrap();
        let e: RegionProbabilities = empirical_probabilities(&p, n, &mut stream(11, i as u64)).unwrap();
        for k in 0..5 {
            let sd = sigma(a.0[k], n as f64);
            assert!(
                (a.0[k] - e.0[k]).abs() < 3.0 * sd + 1e-12,
                "{p:?} region {k}: {} vs {}",
                a.0[k],
                e.0[k]
            );
        }
    }
}

#[test]
fn reference_values_at_ten() {
    let a = analytic_probabilities(&SystemParams::symmetric(10.0, 1.0).unwrap()).unwrap();
    let want = [0.8149000427, 0.0038307103, 0.0861066650, 0.0861066650, 0.0090559170];
    for k in 0..5 {
        assert!((a.0[k] - want[k]).abs() < 5e-10, "region {k}: {}", a.0[k]);
    }
}
