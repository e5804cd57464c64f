//! Hyperbolic elastica: classification by the curvature maximum, curvature
//! profiles, the closed-form parametrization through `θ = κ² − λ + 2iκ′`,
//! closing conditions and energies of orbit-like segments, and the
//! λ-figure-eight machinery.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ellip::{self, Modulus};
use crate::error::{Error, Result};
use crate::hyp2::{CurveGeometry, DiscreteCurve, FdOrder, HPoint, HVector};
use crate::quad;
use crate::scenarios::HypCircle;

/// The four kinds of elastica with curvature maximum `κ₀² ≥ λ + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Circular,
    OrbitLike,
    AsymptoticallyGeodesic,
    WaveLike,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Circular => "circular",
            Family::OrbitLike => "orbit-like",
            Family::AsymptoticallyGeodesic => "asymptotically-geodesic",
            Family::WaveLike => "wave-like",
        })
    }
}

/// Output of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub family: Family,
    /// Elliptic modulus (0 for circular, 1 for asymptotically geodesic).
    pub p: f64,
    /// Frequency of the curvature profile.
    pub r: f64,
    /// First-integral constant.
    pub c: f64,
}

const REL_TOL: f64 = 1e-12;

/// First-integral constant `C = κ₀⁴/4 − (λ+2)κ₀²/2`.
pub fn first_integral_constant(kappa0_sq: f64, lambda: f64) -> f64 {
    0.25 * kappa0_sq * kappa0_sq - 0.5 * (lambda + 2.0) * kappa0_sq
}

/// Classifies the elastica whose squared curvature has maximum `κ₀²`.
pub fn classify(kappa0_sq: f64, lambda: f64) -> Result<Classification> {
    if !kappa0_sq.is_finite() || !lambda.is_finite() {
        return Err(Error::Parameter("non-finite elastica data".into()));
    }
    let lo = lambda + 2.0;
    let hi = 2.0 * lambda + 4.0;
    let tol = REL_TOL * (1.0 + kappa0_sq.abs());
    if kappa0_sq < lo - tol || lo <= 0.0 {
        return Err(Error::Parameter(format!(
            "no elastica exists: kappa0^2 = {kappa0_sq} is below lambda + 2 = {lo}"
        )));
    }
    let c = first_integral_constant(kappa0_sq, lambda);
    let k0 = kappa0_sq.sqrt();
    let out = if (kappa0_sq - lo).abs() <= tol {
        Classification { family: Family::Circular, p: 0.0, r: 0.0, c }
    } else if (kappa0_sq - hi).abs() <= tol {
        Classification { family: Family::AsymptoticallyGeodesic, p: 1.0, r: 0.5 * hi.sqrt(), c: 0.0 }
    } else if kappa0_sq < hi {
        let p2 = 2.0 - hi / kappa0_sq;
        Classification { family: Family::OrbitLike, p: p2.sqrt(), r: 0.5 * k0, c }
    } else {
        let p2 = kappa0_sq / (2.0 * kappa0_sq - hi);
        let p = p2.sqrt();
        Classification { family: Family::WaveLike, p, r: 0.5 * k0 / p, c }
    };
    Ok(out)
}

/// Which branch of the Möbius-type primitive `f` parametrizes the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `a, c > 0`: `√(c/a) tan(√(ac) z)`.
    Tan,
    /// `a, c < 0`: `√(c/a) cot(√(ac) z)`.
    Cot,
    /// `ac < 0`: `sgn(c)·√(−c/a) tanh(√(−ac) z)`.
    Tanh,
    /// `c = 0`: `−1/(az)`.
    Reciprocal,
    /// `a = 0`: `cz`.
    Linear,
    /// Constant curvature: emitted as a hyperbolic circle.
    Circle,
}

/// Complete analytic description of one canonically placed elastica:
/// `γ(s*) = iy`, `γ′(s*) = y`, `κ(s*) = κ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticaParams {
    pub family: Family,
    pub lambda: f64,
    /// Signed curvature at `s*` (its square is the curvature maximum).
    pub kappa0: f64,
    pub kappa0_sq: f64,
    pub p: f64,
    pub r: f64,
    /// First-integral constant `C`.
    #[serde(rename = "C")]
    pub c_int: f64,
    pub a: f64,
    pub c: f64,
    /// Imaginary part of the purely imaginary offset `z₁`.
    pub z1_im: f64,
    pub s_star: f64,
    /// Height of `γ(s*)`.
    pub y: f64,
    pub branch: Branch,
}

impl ElasticaParams {
    /// Canonical elastica with signed curvature maximum `kappa0`, constraint
    /// `lambda` and base height `y`.
    pub fn new(kappa0: f64, lambda: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::Parameter(format!("canonical height must be positive, got {y}")));
        }
        if kappa0 == 0.0 {
            return Err(Error::Parameter("kappa0 = 0 describes a geodesic, not an elastica".into()));
        }
        let k2 = kappa0 * kappa0;
        let cls = classify(k2, lambda)?;
        let mut out = ElasticaParams {
            family: cls.family,
            lambda,
            kappa0,
            kappa0_sq: k2,
            p: cls.p,
            r: cls.r,
            c_int: cls.c,
            a: 0.0,
            c: 0.0,
            z1_im: 0.0,
            s_star: 0.0,
            y,
            branch: Branch::Circle,
        };
        if cls.family == Family::Circular {
            if lambda + 2.0 <= 1.0 {
                return Err(Error::Parameter(format!(
                    "constant curvature {} <= 1 is not a closed hyperbolic circle",
                    kappa0.abs()
                )));
            }
            return Ok(out);
        }
        let (a, c) = canonical_coefficients(&out, y)?;
        out.a = a;
        out.c = c;
        let (branch, z1) = select_branch(a, c, y)?;
        out.branch = branch;
        out.z1_im = z1;
        // f′(z₁)/θ(s*) must reproduce the canonical tangent y + 0i
        let z1c = Complex64::new(0.0, z1);
        let g = out.f(z1c);
        let t = (a * g * g + c) / out.theta(0.0);
        // and f must solve f′ = af² + c (checked by a central difference)
        let eps = 1e-5 * (1.0 + z1.abs());
        let df = (out.f(z1c + eps) - out.f(z1c - eps)) / (2.0 * eps);
        let ode = (df - (a * g * g + c)).norm() / (1.0 + (a * g * g + c).norm());
        let tol = 1e-9 * (1.0 + y);
        if (t - Complex64::new(y, 0.0)).norm() > tol
            || (g - Complex64::new(0.0, y)).norm() > tol
            || ode > 1e-6
        {
            return Err(Error::Parameter(format!(
                "branch {branch:?} does not reproduce the canonical frame (tangent {t})"
            )));
        }
        Ok(out)
    }

    /// Canonical elastica with base point `i`.
    pub fn canonical(kappa0: f64, lambda: f64) -> Result<Self> {
        Self::new(kappa0, lambda, 1.0)
    }

    /// Orbit-like elastica with modulus `p`; `sign` selects the sign of `κ₀`.
    pub fn orbit_like(p: f64, lambda: f64, sign: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Parameter(format!("orbit-like modulus must lie in (0,1), got {p}")));
        }
        let k2 = (2.0 * lambda + 4.0) / (2.0 - p * p);
        Self::canonical(sign.signum() * k2.sqrt(), lambda)
    }

    /// Wave-like elastica with modulus `p ∈ (1/√2, 1)`.
    pub fn wave_like(p: f64, lambda: f64, sign: f64) -> Result<Self> {
        if !(p > FRAC_1_SQRT_2 && p < 1.0) {
            return Err(Error::Parameter(format!("wave-like modulus must lie in (1/√2,1), got {p}")));
        }
        Self::canonical(sign.signum() * wave_kappa0_sq(p, lambda).sqrt(), lambda)
    }

    /// Asymptotically geodesic elastica, `κ₀² = 2λ + 4`.
    pub fn asymptotically_geodesic(lambda: f64, sign: f64) -> Result<Self> {
        Self::canonical(sign.signum() * (2.0 * lambda + 4.0).sqrt(), lambda)
    }

    /// Circular elastica, `κ₀² = λ + 2`.
    pub fn circular(lambda: f64, sign: f64) -> Result<Self> {
        Self::canonical(sign.signum() * (lambda + 2.0).sqrt(), lambda)
    }

    pub fn modulus(&self) -> Result<Modulus> {
        Modulus::new(self.p)
    }

    /// `K(p)/r`: distance from the curvature maximum to the next zero of `cn`
    /// (wave-like) or minimum of `dn` (orbit-like).
    pub fn half_period(&self) -> f64 {
        match self.family {
            Family::OrbitLike | Family::WaveLike => {
                Modulus::new(self.p).map(ellip::complete_k).unwrap_or(f64::INFINITY) / self.r
            }
            _ => f64::INFINITY,
        }
    }

    /// Checks the family relations and the coefficient identities.
    pub fn check_invariants(&self) -> Result<()> {
        let k2 = self.kappa0_sq;
        let l = self.lambda;
        let tol = 1e-9 * (1.0 + k2 * k2);
        let bad = |what: &str| Err(Error::Parameter(format!("invariant violated: {what}")));
        if (self.c_int - first_integral_constant(k2, l)).abs() > tol {
            return bad("C = κ₀⁴/4 − (λ+2)κ₀²/2");
        }
        match self.family {
            Family::Circular => {
                if (k2 - (l + 2.0)).abs() > tol || !(self.c_int < 0.0) {
                    return bad("circular: κ₀² = λ+2, C < 0");
                }
                return Ok(());
            }
            Family::OrbitLike => {
                let p2 = self.p * self.p;
                if (k2 - (2.0 * l + 4.0) / (2.0 - p2)).abs() > tol
                    || !(k2 > l + 2.0 && k2 < 2.0 * l + 4.0 && self.c_int < 0.0)
                {
                    return bad("orbit-like: κ₀² = (2λ+4)/(2−p²) ∈ (λ+2, 2λ+4), C < 0");
                }
            }
            Family::AsymptoticallyGeodesic => {
                if (k2 - (2.0 * l + 4.0)).abs() > tol || self.c_int.abs() > tol {
                    return bad("asymptotically geodesic: κ₀² = 2λ+4, C = 0");
                }
            }
            Family::WaveLike => {
                if (k2 - wave_kappa0_sq(self.p, l)).abs() > tol
                    || !(k2 > 2.0 * l + 4.0 && self.c_int > 0.0 && self.p > FRAC_1_SQRT_2 && self.p < 1.0)
                {
                    return bad("wave-like: κ₀² = (2λ+4)p²/(2p²−1) > 2λ+4, C > 0");
                }
            }
        }
        if (self.a * self.c + 0.25 * (l * l + 4.0 * self.c_int)).abs() > tol {
            return bad("ac = −(λ²+4C)/4");
        }
        if (-self.a * self.y * self.y + self.c - (k2 - l) * self.y).abs() > tol * (1.0 + self.y) {
            return bad("−ay² + c = (κ₀²−λ)y");
        }
        Ok(())
    }

    /// Signed curvature and its arc-length derivative at `s`.
    pub fn curvature_and_derivative(&self, s: f64) -> (f64, f64) {
        let t = self.r * (s - self.s_star);
        match self.family {
            Family::Circular => (self.kappa0, 0.0),
            Family::AsymptoticallyGeodesic => {
                let sech = 1.0 / t.cosh();
                (self.kappa0 * sech, -self.kappa0 * self.r * sech * t.tanh())
            }
            Family::OrbitLike => {
                let m = Modulus::new(self.p).expect("orbit-like modulus validated on construction");
                let (sn, cn, dn) = ellip::jacobi_sn_cn_dn(t, m);
                (self.kappa0 * dn, -self.kappa0 * self.r * self.p * self.p * sn * cn)
            }
            Family::WaveLike => {
                let m = Modulus::new(self.p).expect("wave-like modulus validated on construction");
                let (sn, cn, dn) = ellip::jacobi_sn_cn_dn(t, m);
                (self.kappa0 * cn, -self.kappa0 * self.r * sn * dn)
            }
        }
    }

    /// `θ(s) = κ² − λ + 2iκ′`.
    pub fn theta(&self, s: f64) -> Complex64 {
        let (k, dk) = self.curvature_and_derivative(s);
        Complex64::new(k * k - self.lambda, 2.0 * dk)
    }

    /// The primitive `f` with `f′ = af² + c`; for `c < 0` the closed forms
    /// carry an extra sign so that this identity holds.
    fn f(&self, z: Complex64) -> Complex64 {
        let (a, c) = (self.a, self.c);
        match self.branch {
            Branch::Tan => {
                let w = (a * c).sqrt();
                (c / a).sqrt() * (z * w).tan()
            }
            Branch::Cot => {
                let w = (a * c).sqrt();
                (c / a).sqrt() / (z * w).tan()
            }
            Branch::Tanh => {
                let w = (-a * c).sqrt();
                c.signum() * (-c / a).sqrt() * (z * w).tanh()
            }
            Branch::Reciprocal => -1.0 / (a * z),
            Branch::Linear => c * z,
            Branch::Circle => Complex64::new(0.0, self.y),
        }
    }

    fn circle(&self) -> HypCircle {
        let big_a = (self.lambda + 2.0).sqrt();
        if self.kappa0 > 0.0 {
            let rho = self.y / (big_a - 1.0);
            HypCircle { cx: 0.0, cy: self.y + rho, radius: rho }
        } else {
            let rho = self.y / (big_a + 1.0);
            HypCircle { cx: 0.0, cy: self.y - rho, radius: rho }
        }
    }
}

/// Wave-like curvature maximum `κ₀² = (2λ+4)p²/(2p²−1)`.
pub fn wave_kappa0_sq(p: f64, lambda: f64) -> f64 {
    (2.0 * lambda + 4.0) * p * p / (2.0 * p * p - 1.0)
}

/// Signed curvature `κ(s)` of the elastica.
pub fn curvature_profile(params: &ElasticaParams, s: f64) -> f64 {
    params.curvature_and_derivative(s).0
}

/// The coefficients `(a, c)` with `ac = −(λ² + 4C)/4` and `−ay² + c = (κ₀² − λ)y`.
///
/// The quadratic system has the two roots `a = (±2κ₀ − κ₀² + λ)/(2y)`; the
/// one with the sign of `κ₀` is the one whose curvature at `s*` is `κ₀`
/// (the other describes the reflected curve).
pub fn canonical_coefficients(params: &ElasticaParams, y: f64) -> Result<(f64, f64)> {
    if !(y > 0.0) {
        return Err(Error::Parameter(format!("canonical height must be positive, got {y}")));
    }
    let (k0, l) = (params.kappa0, params.lambda);
    let k2 = k0 * k0;
    let a = (2.0 * k0 - k2 + l) / (2.0 * y);
    let c = y * (k2 + 2.0 * k0 - l) / 2.0;
    let scale = 1.0 + k2 * k2 + l * l;
    let tiny = 1e-13 * scale;
    let a = if a.abs() * y <= tiny { 0.0 } else { a };
    let c = if c.abs() / y <= tiny { 0.0 } else { c };
    let prod = a * c + 0.25 * (l * l + 4.0 * params.c_int);
    let lin = -a * y * y + c - (k2 - l) * y;
    if prod.abs() > 1e-9 * scale || lin.abs() > 1e-9 * scale * (1.0 + y) || a.abs() + c.abs() == 0.0 {
        return Err(Error::Parameter(format!(
            "coefficient system inconsistent (residuals {prod:e}, {lin:e})"
        )));
    }
    Ok((a, c))
}

/// Branch of `f` and `Im z₁` with `f(z₁) = iy`.
fn select_branch(a: f64, c: f64, y: f64) -> Result<(Branch, f64)> {
    if a == 0.0 {
        return Ok((Branch::Linear, y / c));
    }
    if c == 0.0 {
        return Ok((Branch::Reciprocal, 1.0 / (a * y)));
    }
    if a * c < 0.0 {
        // tanh(iτ) = i tan τ
        let tau = (c.signum() * y * (-a / c).sqrt()).atan();
        return Ok((Branch::Tanh, tau / (-a * c).sqrt()));
    }
    let q = y * (a / c).sqrt();
    if a > 0.0 {
        // tan(iτ) = i tanh τ
        if q >= 1.0 {
            return Err(Error::Parameter(format!("tan branch needs y√(a/c) < 1, got {q}")));
        }
        Ok((Branch::Tan, q.atanh() / (a * c).sqrt()))
    } else {
        // cot(iτ) = −i coth τ
        if q <= 1.0 {
            return Err(Error::Parameter(format!("cot branch needs y√(a/c) > 1, got {q}")));
        }
        Ok((Branch::Cot, -(1.0 / q).atanh() / (a * c).sqrt()))
    }
}

/// `∫ 1/θ ds` over `[s0, s1]` by 16-point Gauss–Legendre panels, doubling
/// the panel count until two successive estimates agree.
fn theta_integral(params: &ElasticaParams, s0: f64, s1: f64) -> Result<Complex64> {
    if s0 == s1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let rule = quad::gl16();
    let eval = |panels: usize| {
        let width = (s1 - s0) / panels as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..panels {
            let mid = s0 + (k as f64 + 0.5) * width;
            for &(x, w) in rule {
                sum += w / params.theta(mid + 0.5 * width * x);
            }
        }
        sum * (0.5 * width)
    };
    let mut panels = ((2.0 * params.r * (s1 - s0).abs()).ceil() as usize).max(1);
    let mut prev = eval(panels);
    for _ in 0..14 {
        panels *= 2;
        let next = eval(panels);
        if (next - prev).norm() <= 1e-15 * (1.0 + next.norm()) + 1e-15 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Solver(format!("θ-integral on [{s0}, {s1}] did not converge")))
}

/// Complex values `z(s) = ∫_{s*}^s 1/θ + z₁` at the requested arc lengths.
fn primitive_values(params: &ElasticaParams, s: &[f64]) -> Result<Vec<Complex64>> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let z1 = Complex64::new(0.0, params.z1_im);
    let mut out = vec![z1; s.len()];
    let split = order.partition_point(|&i| s[i] < params.s_star);
    let (mut acc, mut last) = (z1, params.s_star);
    for &i in &order[split..] {
        acc += theta_integral(params, last, s[i])?;
        last = s[i];
        out[i] = acc;
    }
    let (mut acc, mut last) = (z1, params.s_star);
    for &i in order[..split].iter().rev() {
        acc += theta_integral(params, last, s[i])?;
        last = s[i];
        out[i] = acc;
    }
    Ok(out)
}

/// Evaluates `γ(s)` at arbitrary arc lengths, returning `(x, y)` pairs.
pub fn evaluate(params: &ElasticaParams, s: &[f64]) -> Result<Vec<(f64, f64)>> {
    if params.family == Family::Circular {
        let circ = params.circle();
        let (start, dir) = if params.kappa0 > 0.0 { (-0.5 * PI, 1.0) } else { (0.5 * PI, -1.0) };
        let s0 = circ.arclength_primitive(start);
        return Ok(s
            .iter()
            .map(|&t| {
                let p = circ.point(circ.angle_at_primitive(s0 + dir * (t - params.s_star)));
                (p.x, p.y)
            })
            .collect());
    }
    let z = primitive_values(params, s)?;
    let mut out = Vec::with_capacity(s.len());
    for (zi, si) in z.iter().zip(s) {
        let g = params.f(*zi);
        if !(g.im > 0.0) || !g.re.is_finite() {
            return Err(Error::Parameter(format!("parametrization left H² at s = {si} ({g})")));
        }
        out.push((g.re, g.im));
    }
    Ok(out)
}

/// Complex tangent `γ′(s)` from `γ′ = (aγ² + c)/θ` given the point `γ(s)`.
pub fn tangent_at(params: &ElasticaParams, s: f64, point: (f64, f64)) -> Complex64 {
    if params.family == Family::Circular {
        let circ = params.circle();
        let phi = circ.angle_of(HPoint { x: point.0, y: point.1 });
        let t = circ.tangent(phi);
        let sgn = params.kappa0.signum();
        return Complex64::new(sgn * t[0], sgn * t[1]) * point.1;
    }
    let g = Complex64::new(point.0, point.1);
    (params.a * g * g + params.c) / params.theta(s)
}

/// Largest deviation of `|γ′|_g` from 1 at the given arc lengths.
pub fn speed_defect(params: &ElasticaParams, s: &[f64]) -> Result<f64> {
    let pts = evaluate(params, s)?;
    Ok(s
        .iter()
        .zip(&pts)
        .map(|(&t, &p)| (tangent_at(params, t, p).norm() / p.1 - 1.0).abs())
        .fold(0.0, f64::max))
}

/// The elastica sampled at `n` equally spaced arc lengths in `[s_lo, s_hi]`,
/// with exact boundary tangents.
pub fn parametrize(params: &ElasticaParams, s_lo: f64, s_hi: f64, n: usize) -> Result<DiscreteCurve> {
    if !(s_hi > s_lo) || n < 5 {
        return Err(Error::Parameter(format!(
            "parametrize needs s_lo < s_hi and n >= 5 (got [{s_lo}, {s_hi}], n = {n})"
        )));
    }
    let s: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { s_hi } else { s_lo + (s_hi - s_lo) * i as f64 / (n - 1) as f64 })
        .collect();
    let pts = evaluate(params, &s)?;
    let nodes = pts.iter().map(|&(x, y)| HPoint::new(x, y)).collect::<Result<Vec<_>>>()?;
    let t0 = tangent_at(params, s_lo, pts[0]);
    let t1 = tangent_at(params, s_hi, pts[n - 1]);
    DiscreteCurve::with_tangents(s, nodes, [t0.re, t0.im], [t1.re, t1.im])
}

/// Spread (max − min) of `κ′² + κ⁴/4 − (λ+2)κ²/2` over the interior nodes,
/// derivatives taken with respect to hyperbolic arc length.
pub fn first_integral_residual(curve: &DiscreteCurve, lambda: f64) -> Result<f64> {
    let (vals, _) = first_integral_values(curve, lambda)?;
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(hi - lo)
}

/// Nodal values of the first integral on interior nodes and their mean.
pub fn first_integral_values(curve: &DiscreteCurve, lambda: f64) -> Result<(Vec<f64>, f64)> {
    let st = curve.stencils(FdOrder::default())?;
    let g = CurveGeometry::with_stencils(curve, &st)?;
    let dk = st.d1(&g.kappa);
    let n = curve.len();
    let range = if curve.is_closed() { 0..n } else { 2..n.saturating_sub(2) };
    let vals: Vec<f64> = range
        .map(|i| {
            let k = g.kappa[i];
            let ks = dk[i] / g.speed[i];
            ks * ks + 0.25 * k.powi(4) - 0.5 * (lambda + 2.0) * k * k
        })
        .collect();
    if vals.is_empty() {
        return Err(Error::Stencil("too few interior nodes".into()));
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    Ok((vals, mean))
}

/// Root function of the figure-eight condition,
/// `∫₀^{π/2} (sin²θ − λ/κ₀²) / ((1 − q cos²θ)√(1 − p² cos²θ)) dθ`
/// with `q = 4κ₀²/(κ₀² − λ)²`, evaluated in closed form as
/// `K(p)/q + (1 − λ/κ₀² − 1/q) Π(q, p)`.
pub fn figure_eight_condition(p: f64, lambda: f64) -> Result<f64> {
    let m = Modulus::new(p)?;
    let k2 = wave_kappa0_sq(p, lambda);
    let q = 4.0 * k2 / ((k2 - lambda) * (k2 - lambda));
    if !(q < p * p) {
        return Err(Error::Parameter(format!("figure-eight characteristic {q} not below p² = {}", p * p)));
    }
    let mu = lambda / k2;
    Ok(ellip::complete_k(m) / q + (1.0 - mu - 1.0 / q) * ellip::complete_pi(q, m)?)
}

/// Admissible range `(0, 64/π² − 2)` for the figure-eight constraint.
pub fn figure_eight_lambda_max() -> f64 {
    64.0 / (PI * PI) - 2.0
}

/// Solves the figure-eight condition for `p` by bracketed bisection refined
/// with secant steps, and returns the canonical wave-like parameters with
/// `κ₀ > 0` and base point `i`.
pub fn figure_eight_solve(lambda: f64) -> Result<ElasticaParams> {
    if !(lambda > 0.0 && lambda < figure_eight_lambda_max()) {
        return Err(Error::Parameter(format!(
            "figure-eight needs 0 < λ < 64/π² − 2, got {lambda}"
        )));
    }
    let g = |p: f64| figure_eight_condition(p, lambda);
    let (mut lo, mut hi) = (FRAC_1_SQRT_2 + 1e-6, 1.0 - 1e-12);
    let (mut glo, ghi) = (g(lo)?, g(hi)?);
    if glo * ghi > 0.0 {
        // a sign change may hide in the interior; scan before giving up
        let mut found = false;
        let steps = 400;
        let mut prev = (lo, glo);
        for k in 1..=steps {
            let t = k as f64 / steps as f64;
            let p = lo + (hi - lo) * (1.0 - (1.0 - t).powi(6));
            let v = g(p)?;
            if v * prev.1 <= 0.0 {
                lo = prev.0;
                glo = prev.1;
                hi = p;
                found = true;
                break;
            }
            prev = (p, v);
        }
        if !found {
            return Err(Error::Solver(format!("no figure-eight root in the modulus bracket for λ = {lambda}")));
        }
    }
    let mut ghi = g(hi)?;
    for _ in 0..200 {
        if hi - lo < 4.0 * f64::EPSILON {
            break;
        }
        // secant proposal, accepted only inside the middle of the bracket
        let sec = hi - ghi * (hi - lo) / (ghi - glo);
        let width = hi - lo;
        let cand = if sec.is_finite() && sec > lo + 0.05 * width && sec < hi - 0.05 * width {
            sec
        } else {
            0.5 * (lo + hi)
        };
        let gc = g(cand)?;
        if gc == 0.0 {
            lo = cand;
            hi = cand;
            break;
        }
        if gc * glo < 0.0 {
            hi = cand;
            ghi = gc;
        } else {
            lo = cand;
            glo = gc;
        }
        let _ = ghi;
    }
    let p = if glo.abs() < ghi.abs() { lo } else { hi };
    let params = ElasticaParams::wave_like(p, lambda, 1.0)?;
    params.check_invariants()?;
    Ok(params)
}

/// The figure-eight segment on `[−K(p)/r, K(p)/r]` with `n` nodes; its end
/// points must coincide on the imaginary axis.
pub fn figure_eight_segment(params: &ElasticaParams, n: usize) -> Result<DiscreteCurve> {
    if params.family != Family::WaveLike {
        return Err(Error::Parameter("figure-eight segment needs wave-like params".into()));
    }
    let h = params.half_period();
    let curve = parametrize(params, -h, h, n)?;
    let nodes = curve.nodes();
    let gap = nodes[0].x.hypot(nodes[0].y - nodes[n - 1].y).max((nodes[0].x - nodes[n - 1].x).abs());
    let gap = gap.max((nodes[0].x - nodes[n - 1].x).hypot(nodes[0].y - nodes[n - 1].y));
    if gap > 1e-6 {
        return Err(Error::Closure(format!("figure-eight end points differ by {gap:e}")));
    }
    Ok(curve)
}

/// Elastic energy of the figure-eight segment,
/// `(2κ₀²/r)·(E(p) − (1−p²)K(p))/p²`.
pub fn figure_eight_segment_energy(params: &ElasticaParams) -> f64 {
    let p = params.p;
    let m = match Modulus::new(p) {
        Ok(m) => m,
        Err(_) => return f64::NAN,
    };
    let (k, e) = (ellip::complete_k(m), ellip::complete_e(m));
    2.0 * params.kappa0_sq / params.r * (e - (1.0 - p * p) * k) / (p * p)
}

/// Tangent data of a figure-eight at its self-intersection `γ(K(p)/r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndTangent {
    /// Euclidean unit tangent at `γ(K(p)/r)`.
    pub tangent: HVector,
    /// `sgn(κ₀)·Im γ′ / Re γ′`.
    pub ratio: f64,
    /// The closed form `−2r|κ₀|√(1−p²)/λ` of the same ratio.
    pub predicted_ratio: f64,
    /// Angle between the unit tangent and `sgn(κ₀)·i`.
    pub angle_to_vertical: f64,
}

/// Tangent of the figure-eight at `K(p)/r` from `γ′ = (aγ² + c)/θ`.
pub fn figure_eight_tangent(params: &ElasticaParams) -> Result<EndTangent> {
    if params.family != Family::WaveLike {
        return Err(Error::Parameter("figure-eight tangent needs wave-like params".into()));
    }
    let h = params.half_period();
    let pt = evaluate(params, &[h])?[0];
    let t = tangent_at(params, h, pt);
    let nrm = t.norm();
    let sgn = params.kappa0.signum();
    let base = HPoint::new(pt.0, pt.1)?;
    let unit = t / nrm;
    Ok(EndTangent {
        tangent: HVector::new(base, unit.re, unit.im),
        ratio: sgn * t.im / t.re,
        predicted_ratio: -2.0 * params.r * params.kappa0.abs() * (1.0 - params.p * params.p).sqrt()
            / params.lambda,
        angle_to_vertical: (unit.re).atan2(sgn * unit.im).abs(),
    })
}

fn require_orbit(params: &ElasticaParams) -> Result<Modulus> {
    if params.family != Family::OrbitLike {
        return Err(Error::Parameter(format!("expected orbit-like params, got {}", params.family)));
    }
    Modulus::new(params.p)
}

/// `mπ`-normalized closing integral over `[α, β]`: returns
/// `(√(−C)/π) ∫_α^β κ²/(4C + 4κ²) ds`.
///
/// For `λ = 0` this is evaluated in closed form through
/// `√(1−p²)/(2π√(2−p²)) [ΔF + (1−p²) ΔΠ(p²(2−p²))]` over the amplitude window;
/// otherwise by adaptive quadrature in `s`.
pub fn closing_multiplicity(params: &ElasticaParams, alpha: f64, beta: f64) -> Result<f64> {
    let m = require_orbit(params)?;
    let p = params.p;
    let p2 = p * p;
    let n = p2 * (2.0 - p2);
    assert!(n < 1.0, "closing integrand has no pole for p in (0,1)");
    if params.lambda == 0.0 {
        let (t0, t1) = (
            ellip::jacobi_am(params.r * (alpha - params.s_star), m),
            ellip::jacobi_am(params.r * (beta - params.s_star), m),
        );
        let df = ellip::ellint_f(t1, m) - ellip::ellint_f(t0, m);
        let dpi = ellip::ellint_pi(t1, n, m)? - ellip::ellint_pi(t0, n, m)?;
        return Ok((1.0 - p2).sqrt() / (2.0 * PI * (2.0 - p2).sqrt()) * (df + (1.0 - p2) * dpi));
    }
    let c = params.c_int;
    let v = quad::integrate(
        |s| {
            let k = curvature_profile(params, s);
            k * k / (4.0 * c + 4.0 * k * k)
        },
        alpha,
        beta,
        1e-14,
        1e-13,
    )?;
    Ok((-c).sqrt() * v / PI)
}

/// The closing integral in amplitude form over an explicit window
/// `[t0, t1]` (free elastica, `λ = 0`), divided by `π`.
pub fn closing_multiplicity_window(p: f64, t0: f64, t1: f64) -> Result<f64> {
    let m = Modulus::new(p)?;
    let p2 = p * p;
    let n = p2 * (2.0 - p2);
    let df = ellip::ellint_f(t1, m) - ellip::ellint_f(t0, m);
    let dpi = ellip::ellint_pi(t1, n, m)? - ellip::ellint_pi(t0, n, m)?;
    Ok((1.0 - p2).sqrt() / (2.0 * PI * (2.0 - p2).sqrt()) * (df + (1.0 - p2) * dpi))
}

/// `η_p = 2√(1−p²)K(p)/(π√(2−p²))`, the `p`-dependent constant bounding one
/// half-period of the closing integral by `(1 + η)/2` (in units of `π`).
pub fn closing_eta(p: f64) -> Result<f64> {
    let m = Modulus::new(p)?;
    Ok(2.0 * (1.0 - p * p).sqrt() * ellip::complete_k(m) / (PI * (2.0 - p * p).sqrt()))
}

/// Elastic energy of an orbit-like segment on `[α, β]`:
/// `(κ₀²/r)[E(am(rβ)) − E(am(rα))]`.
pub fn orbitlike_segment_energy(params: &ElasticaParams, alpha: f64, beta: f64) -> Result<f64> {
    let m = require_orbit(params)?;
    if alpha == beta {
        return Ok(0.0);
    }
    let t0 = ellip::jacobi_am(params.r * (alpha - params.s_star), m);
    let t1 = ellip::jacobi_am(params.r * (beta - params.s_star), m);
    Ok(params.kappa0_sq / params.r * (ellip::ellint_e(t1, m) - ellip::ellint_e(t0, m)))
}

/// Energy of a free orbit-like segment whose amplitude window is `[t0, t1]`:
/// `(4/√(2−p²)) ∫ √(1 − p² sin²θ) dθ`.
pub fn orbitlike_window_energy(p: f64, t0: f64, t1: f64) -> Result<f64> {
    let m = Modulus::new(p)?;
    Ok(4.0 / (2.0 - p * p).sqrt() * (ellip::ellint_e(t1, m) - ellip::ellint_e(t0, m)))
}

/// Energy gap `(8/√2) sin δ` above 8 guaranteed by a symmetric window
/// extending `δ` beyond `[0, π]`.
pub fn heart_gap_for_delta(delta: f64) -> f64 {
    8.0 / 2f64.sqrt() * delta.sin()
}

/// Largest `δ ∈ (0, π/4]` for which the closing integral over the window
/// `[−δ, π + δ]` stays strictly below `π`, found by bisection (the
/// integral is increasing in `δ`).
pub fn heart_delta(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Parameter(format!("heart bound needs p in (0,1), got {p}")));
    }
    let mult = |d: f64| closing_multiplicity_window(p, -d, PI + d);
    let cap = 0.25 * PI;
    if mult(cap)? < 1.0 {
        return Ok(cap);
    }
    if mult(0.0)? >= 1.0 {
        return Err(Error::Solver(format!("closing integral over [0, π] already reaches π at p = {p}")));
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mult(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(lo)
}

/// Gap above 8 in the energy bound for heart-shaped symmetric closed
/// orbit-like segments with modulus `p`.
pub fn heart_energy_gap(p: f64) -> Result<f64> {
    Ok(heart_gap_for_delta(heart_delta(p)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        let c = classify(2.0, 0.0).unwrap();
        assert_eq!(c.family, Family::Circular);
        assert!((c.c + 1.0).abs() < 1e-15);
        let c = classify(4.0, 0.0).unwrap();
        assert_eq!(c.family, Family::AsymptoticallyGeodesic);
        assert_eq!(c.c, 0.0);
        let c = classify(3.0, 0.0).unwrap();
        assert_eq!(c.family, Family::OrbitLike);
        assert!((c.p * c.p - 2.0 / 3.0).abs() < 1e-14);
        let c = classify(5.0, 0.0).unwrap();
        assert_eq!(c.family, Family::WaveLike);
        assert!(classify(1.5, 0.0).is_err());
    }

    #[test]
    fn coefficients_in_closed_cases() {
        let e = ElasticaParams::asymptotically_geodesic(0.0, 1.0).unwrap();
        assert_eq!((e.a, e.c), (0.0, 4.0));
        assert_eq!(e.branch, Branch::Linear);
        let e = ElasticaParams::asymptotically_geodesic(0.0, -1.0).unwrap();
        assert_eq!((e.a, e.c), (-4.0, 0.0));
        assert_eq!(e.branch, Branch::Reciprocal);
        let w = ElasticaParams::wave_like(0.9, 0.1, 1.0).unwrap();
        assert!(w.a < 0.0 && w.c > 0.0);
        w.check_invariants().unwrap();
    }

    #[test]
    fn closed_form_condition_matches_quadrature() {
        let (p, lambda) = (0.95f64, 0.3);
        let k2 = wave_kappa0_sq(p, lambda);
        let q = 4.0 * k2 / ((k2 - lambda) * (k2 - lambda));
        let direct = quad::integrate(
            |t: f64| {
                let (s, c) = t.sin_cos();
                (s * s - lambda / k2) / ((1.0 - q * c * c) * (1.0 - p * p * c * c).sqrt())
            },
            0.0,
            0.5 * PI,
            1e-14,
            1e-14,
        )
        .unwrap();
        assert!((figure_eight_condition(p, lambda).unwrap() - direct).abs() < 1e-11);
    }

    #[test]
    fn heart_gap_in_closed_form() {
        assert!((heart_gap_for_delta(0.1) - 8.0 / 2f64.sqrt() * 0.1f64.sin()).abs() < 1e-15);
        assert_eq!(heart_gap_for_delta(0.0), 0.0);
        for p in [0.1, 0.5, 0.9, 0.99] {
            assert!(heart_energy_gap(p).unwrap() > 0.0);
        }
    }
}
