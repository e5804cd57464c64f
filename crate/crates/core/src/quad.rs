//! Quadrature rules: adaptive Gauss–Kronrod for analytic integrands,
//! fixed Gauss–Legendre panels, and composite Simpson on sampled data.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod evaluation on `[a, b]`; returns `(integral, error estimate)`.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Singular(format!("non-finite integral on [{a}, {b}]")));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::Solver(format!(
                "quadrature on [{a}, {b}] did not converge (error estimate {err:e})"
            )));
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
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
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// The 16-point Gauss–Legendre rule, computed once.
pub fn gl16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Composite 16-point Gauss–Legendre quadrature with `panels` equal panels.
pub fn gl16_panels<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let c = lo + 0.5 * width;
        let mut part = 0.0;
        for &(x, w) in gl16() {
            part += w * f(c + 0.5 * width * x);
        }
        sum += 0.5 * width * part;
    }
    sum
}

/// Composite Simpson rule for samples `f` at strictly increasing abscissae `x`.
///
/// Non-uniform spacing is handled pairwise; an odd trailing interval is
/// integrated with the quadratic through the last three samples.
pub fn simpson(x: &[f64], f: &[f64]) -> f64 {
    let n = x.len();
    assert_eq!(n, f.len(), "simpson: length mismatch");
    match n {
        0 | 1 => return 0.0,
        2 => return 0.5 * (x[1] - x[0]) * (f[0] + f[1]),
        _ => {}
    }
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut sum = 0.0;
    let mut i = 0;
    while i < paired {
        sum += simpson_pair(x[i], x[i + 1], x[i + 2], f[i], f[i + 1], f[i + 2]);
        i += 2;
    }
    if paired < intervals {
        let (x0, x1, x2) = (x[n - 3], x[n - 2], x[n - 1]);
        let (f0, f1, f2) = (f[n - 3], f[n - 2], f[n - 1]);
        sum += last_interval(x0, x1, x2, f0, f1, f2);
    }
    sum
}

fn simpson_pair(x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    let h0 = x1 - x0;
    let h1 = x2 - x1;
    let hs = h0 + h1;
    hs / 6.0
        * ((2.0 - h1 / h0) * f0 + hs * hs / (h0 * h1) * f1 + (2.0 - h0 / h1) * f2)
}

/// Integral over `[x1, x2]` of the quadratic interpolating three samples.
fn last_interval(x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    let h0 = x1 - x0;
    let h1 = x2 - x1;
    let w0 = -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    let w1 = h1 * (3.0 * h0 + h1) / (6.0 * h0);
    let w2 = h1 * (3.0 * h0 + 2.0 * h1) / (6.0 * (h0 + h1));
    w0 * f0 + w1 * f1 + w2 * f2
}

/// Periodic trapezoid rule for samples at equally spaced points of one period.
pub fn periodic_trapezoid(h: f64, f: &[f64]) -> f64 {
    h * f.iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_polynomials_and_exponential() {
        let v = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
        let v = integrate(f64::exp, -1.0, 1.0, 1e-14, 1e-14).unwrap();
        assert!((v - (1f64.exp() - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn kronrod_peaked_integrand() {
        // ∫ dx / (x² + ε²) over [-1, 1] = (2/ε) atan(1/ε)
        let eps = 1e-4;
        let v = integrate(|x| 1.0 / (x * x + eps * eps), -1.0, 1.0, 1e-10, 1e-13).unwrap();
        let exact = 2.0 / eps * (1.0 / eps).atan();
        assert!(((v - exact) / exact).abs() < 1e-11);
    }

    #[test]
    fn legendre_rule_is_exact_to_degree_31() {
        let v = gl16_panels(|x| x.powi(30), -1.0, 1.0, 1);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
        let w: f64 = gl16().iter().map(|p| p.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_even_and_odd_counts() {
        for n in [5usize, 6, 101, 102] {
            let x: Vec<f64> = (0..n).map(|i| (i as f64 / (n - 1) as f64).powi(2)).collect();
            let f: Vec<f64> = x.iter().map(|t| t * t - t).collect();
            assert!((simpson(&x, &f) + 1.0 / 6.0).abs() < 1e-12, "n = {n}");
        }
    }
}
