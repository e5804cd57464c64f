//! Legendre elliptic integrals and Jacobi elliptic functions.
//!
//! All functions use the *modulus* convention: the integrands carry
//! `1 - p² sin²θ`, not a parameter `m = p²`.
//!
//! ```text
//! F(φ, p)     = ∫₀^φ dθ / √(1 − p² sin²θ)
//! E(φ, p)     = ∫₀^φ √(1 − p² sin²θ) dθ
//! Π(φ, α², p) = ∫₀^φ dθ / ((1 − α² sin²θ) √(1 − p² sin²θ))
//! ```
//!
//! Complete integrals come from the arithmetic–geometric mean; incomplete
//! ones from Carlson's symmetric forms after reduction of `φ` to
//! `[−π/2, π/2]` by quasi-periodicity. The amplitude `am` is the inverse of
//! `F(·, p)` and `sn = sin am`, `cn = cos am`, `dn = √(1 − p² sn²)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Elliptic modulus `p` with `0 <= p < 1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Modulus(f64);

impl Modulus {
    /// Validates `0 <= p < 1`.
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && (0.0..1.0).contains(&p) {
            Ok(Modulus(p))
        } else {
            Err(Error::Domain(format!("elliptic modulus must lie in [0, 1), got {p}")))
        }
    }

    /// The modulus `p`.
    pub fn p(self) -> f64 {
        self.0
    }

    /// The complementary modulus `√(1 − p²)`, computed without cancellation.
    pub fn complement(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

// Carlson symmetric integrals (duplication algorithm).

fn carlson_rc(x: f64, y: f64) -> f64 {
    let (mut xt, mut yt) = (x, y);
    let mut ave;
    let mut s;
    loop {
        let lam = 2.0 * xt.sqrt() * yt.sqrt() + yt;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        ave = (xt + yt + yt) / 3.0;
        s = (yt - ave) / ave;
        if s.abs() < 5e-4 {
            break;
        }
    }
    (1.0 + s * s * (0.3 + s * (1.0 / 7.0 + s * (0.375 + s * 9.0 / 22.0)))) / ave.sqrt()
}

/// `R_F(x, y, z)`; at most one argument may vanish.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let (mut ave, mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = (xt + yt + zt) / 3.0;
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-3 {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 + (e2 / 24.0 - 0.1 - 3.0 / 44.0 * e3) * e2 + e3 / 14.0) / ave.sqrt()
}

/// `R_D(x, y, z)`; `z > 0`, at most one of `x, y` may vanish.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let (mut sum, mut fac) = (0.0, 1.0);
    let (mut ave, mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (zt + lam));
        fac *= 0.25;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = 0.2 * (xt + yt + 3.0 * zt);
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 5e-4 {
            break;
        }
    }
    let ea = dx * dy;
    let eb = dz * dz;
    let ec = ea - eb;
    let ed = ea - 6.0 * eb;
    let ee = ed + ec + ec;
    3.0 * sum
        + fac
            * (1.0 + ed * (-C1 + 0.25 * C3 * ed - 1.5 * C4 * dz * ee)
                + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea)))
            / (ave * ave.sqrt())
}

/// `R_J(x, y, z, q)` for `q > 0`.
pub fn carlson_rj(x: f64, y: f64, z: f64, q: f64) -> f64 {
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 3.0;
    const C3: f64 = 3.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    let (mut xt, mut yt, mut zt, mut pt) = (x, y, z, q);
    let (mut sum, mut fac) = (0.0, 1.0);
    let (mut ave, mut dx, mut dy, mut dz, mut dp);
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        let alpha = (pt * (sx + sy + sz) + sx * sy * sz).powi(2);
        let beta = pt * (pt + lam).powi(2);
        sum += fac * carlson_rc(alpha, beta);
        fac *= 0.25;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        pt = 0.25 * (pt + lam);
        ave = 0.2 * (xt + yt + zt + pt + pt);
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        dp = (ave - pt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()).max(dp.abs()) < 5e-4 {
            break;
        }
    }
    let ea = dx * (dy + dz) + dy * dz;
    let eb = dx * dy * dz;
    let ec = dp * dp;
    let ed = ea - 3.0 * ec;
    let ee = eb + 2.0 * dp * (ea - ec);
    3.0 * sum
        + fac
            * (1.0 + ed * (-C1 + 0.75 * C3 * ed - 1.5 * C4 * ee)
                + eb * (0.5 * C2 + dp * (-2.0 * C3 + dp * C4))
                + dp * ea * (C2 - dp * C3)
                - C2 * dp * ec)
            / (ave * ave.sqrt())
}

/// AGM iteration returning `(K, E)` for modulus `p`.
fn agm_k_e(p: Modulus) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = p.complement();
    let mut c = p.p();
    let mut sum = 0.5 * c * c;
    let mut pow = 1.0;
    for _ in 0..64 {
        if c.abs() <= 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        c = 0.25 * c * c / an;
        b = (a * b).sqrt();
        a = an;
        sum += pow * c * c;
        pow *= 2.0;
    }
    let k = FRAC_PI_2 / a;
    (k, k * (1.0 - sum))
}

/// Complete integral of the first kind `K(p) = F(π/2, p)`.
pub fn complete_k(p: Modulus) -> f64 {
    agm_k_e(p).0
}

/// Complete integral of the second kind `E(p) = E(π/2, p)`.
pub fn complete_e(p: Modulus) -> f64 {
    agm_k_e(p).1
}

/// `√(1 − p²)·K(p)`, which tends to 0 as `p → 1` and equals π/2 at `p = 0`.
pub fn complete_k_asymptotics(p: Modulus) -> f64 {
    p.complement() * complete_k(p)
}

/// Threshold on `1 − α²` below which the complete third-kind integral is
/// evaluated through the complementary-characteristic identity.
const PI_ROUTE_GAP: f64 = 0.05;

/// Complete integral of the third kind `Π(α², p) = Π(π/2, α², p)`.
///
/// Requires `α² < 1`. Close to the pole (`1 − α² < 0.05` with `α² > p²`) the
/// value is obtained from
///
/// ```text
/// Π(α², p) = K(p) + (π/2)·√(α² / ((1 − α²)(α² − p²))) − Π(p²/α², p)
/// ```
pub fn complete_pi(alpha2: f64, p: Modulus) -> Result<f64> {
    if !alpha2.is_finite() || alpha2 >= 1.0 {
        return Err(Error::Singular(format!(
            "complete third-kind integral needs α² < 1, got {alpha2}"
        )));
    }
    let p2 = p.p() * p.p();
    if 1.0 - alpha2 < PI_ROUTE_GAP && alpha2 > p2 {
        let k = complete_k(p);
        let corr = FRAC_PI_2 * (alpha2 / ((1.0 - alpha2) * (alpha2 - p2))).sqrt();
        return Ok(k + corr - complete_pi_carlson(p2 / alpha2, p));
    }
    Ok(complete_pi_carlson(alpha2, p))
}

fn complete_pi_carlson(alpha2: f64, p: Modulus) -> f64 {
    let kp2 = p.complement().powi(2);
    carlson_rf(0.0, kp2, 1.0) + alpha2 / 3.0 * carlson_rj(0.0, kp2, 1.0, 1.0 - alpha2)
}

/// Splits `φ = jπ + ψ` with `ψ ∈ [−π/2, π/2]`.
fn reduce_amplitude(phi: f64) -> (f64, f64) {
    let j = (phi / PI).round();
    (j, phi - j * PI)
}

/// Incomplete integral of the first kind, valid for all real `φ`.
pub fn ellint_f(phi: f64, p: Modulus) -> f64 {
    let (j, psi) = reduce_amplitude(phi);
    let (s, c) = psi.sin_cos();
    let d2 = 1.0 - p.p() * p.p() * s * s;
    let base = s * carlson_rf(c * c, d2, 1.0);
    if j == 0.0 {
        base
    } else {
        2.0 * j * complete_k(p) + base
    }
}

/// Incomplete integral of the second kind, valid for all real `φ`.
pub fn ellint_e(phi: f64, p: Modulus) -> f64 {
    let (j, psi) = reduce_amplitude(phi);
    let (s, c) = psi.sin_cos();
    let p2 = p.p() * p.p();
    let d2 = 1.0 - p2 * s * s;
    let base = s * carlson_rf(c * c, d2, 1.0) - p2 / 3.0 * s.powi(3) * carlson_rd(c * c, d2, 1.0);
    if j == 0.0 {
        base
    } else {
        2.0 * j * complete_e(p) + base
    }
}

/// Incomplete integral of the third kind.
///
/// For `α² < 1` every real `φ` is admissible. For `α² >= 1` the integrand has
/// a pole at `sin²θ = 1/α²`, and only amplitudes `|φ| < arcsin(1/α)` are
/// accepted.
pub fn ellint_pi(phi: f64, alpha2: f64, p: Modulus) -> Result<f64> {
    if !alpha2.is_finite() || !phi.is_finite() {
        return Err(Error::Domain("non-finite argument to Π".into()));
    }
    let (j, psi) = reduce_amplitude(phi);
    let (s, c) = psi.sin_cos();
    let q = 1.0 - alpha2 * s * s;
    if alpha2 >= 1.0 && (j != 0.0 || q <= 0.0) {
        return Err(Error::Singular(format!(
            "pole of the third-kind integrand on [0, {phi}] for α² = {alpha2}"
        )));
    }
    let d2 = 1.0 - p.p() * p.p() * s * s;
    let base = s * carlson_rf(c * c, d2, 1.0)
        + alpha2 / 3.0 * s.powi(3) * carlson_rj(c * c, d2, 1.0, q);
    if j == 0.0 {
        Ok(base)
    } else {
        Ok(2.0 * j * complete_pi(alpha2, p)? + base)
    }
}

/// Jacobi amplitude: the unique `φ` with `F(φ, p) = x`.
///
/// `x` is first reduced modulo `2K(p)` (using `am(x + 2K) = am(x) + π`), then
/// Newton's method on `F(φ) − x` is seeded with `φ ≈ πx/(2K)` and safeguarded
/// by bisection on `[−π/2, π/2]`.
pub fn jacobi_am(x: f64, p: Modulus) -> f64 {
    if p.p() == 0.0 {
        return x;
    }
    let k = complete_k(p);
    let j = (x / (2.0 * k)).round();
    let xr = x - 2.0 * j * k;
    if xr == 0.0 {
        return j * PI;
    }
    let p2 = p.p() * p.p();
    let (mut lo, mut hi) = (-FRAC_PI_2, FRAC_PI_2);
    let mut phi = (FRAC_PI_2 * xr / k).clamp(lo, hi);
    for _ in 0..100 {
        let r = ellint_f(phi, p) - xr;
        if r > 0.0 {
            hi = phi;
        } else {
            lo = phi;
        }
        let s = phi.sin();
        let mut next = phi - r * (1.0 - p2 * s * s).sqrt();
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - phi).abs();
        phi = next;
        if step < 1e-16 * (1.0 + phi.abs()) || hi - lo < 1e-16 {
            break;
        }
    }
    j * PI + phi
}

/// Jacobi elliptic functions `(sn, cn, dn)` at `x`.
pub fn jacobi_sn_cn_dn(x: f64, p: Modulus) -> (f64, f64, f64) {
    let (sn, cn) = jacobi_am(x, p).sin_cos();
    let p2 = p.p() * p.p();
    // both forms are algebraically equal; pick the one free of cancellation
    let dn = if sn * sn < 0.5 {
        (1.0 - p2 * sn * sn).sqrt()
    } else {
        (p.complement().powi(2) + p2 * cn * cn).sqrt()
    };
    (sn, cn, dn)
}
