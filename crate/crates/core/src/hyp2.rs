//! Geometry of the hyperbolic half-plane `H² = {(x, y) : y > 0}` with metric
//! `g = ⟨·,·⟩ / y²`, discrete curves in it, their curvature and energies, and
//! the surface of revolution generated by revolving a profile curve about the
//! `x`-axis.
//!
//! Derivatives of nodal data are finite differences on the parameter grid
//! (see [`FdOrder`]); integrals over open curves use composite Simpson and
//! over closed curves the periodic trapezoid rule.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// A point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    /// Checks `y > 0` and finiteness.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() && y > 0.0 {
            Ok(HPoint { x, y })
        } else {
            Err(Error::Domain(format!("({x}, {y}) is not a point of the upper half-plane")))
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        HPoint::new(z.re, z.im)
    }

    /// Euclidean distance to another point.
    pub fn dist(self, other: HPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Hyperbolic distance between two points of `H²`.
pub fn hyperbolic_distance(p: HPoint, q: HPoint) -> f64 {
    let d2 = (p.x - q.x).powi(2) + (p.y - q.y).powi(2);
    (1.0 + d2 / (2.0 * p.y * q.y)).acosh()
}

/// A tangent vector `(vx, vy)` attached at `base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HVector {
    pub base: HPoint,
    pub vx: f64,
    pub vy: f64,
}

impl HVector {
    pub fn new(base: HPoint, vx: f64, vy: f64) -> Self {
        HVector { base, vx, vy }
    }

    /// Hyperbolic inner product with a vector at the same base point.
    pub fn inner(&self, other: &HVector) -> f64 {
        (self.vx * other.vx + self.vy * other.vy) / (self.base.y * self.base.y)
    }

    /// Rescaled to unit hyperbolic length; `None` for the zero vector.
    pub fn normalized(&self) -> Option<HVector> {
        let n = metric_norm(self);
        (n > 0.0 && n.is_finite()).then(|| HVector::new(self.base, self.vx / n, self.vy / n))
    }

    /// Unit Euclidean direction `(vx, vy)/|(vx, vy)|`.
    pub fn direction(&self) -> [f64; 2] {
        let n = self.vx.hypot(self.vy);
        [self.vx / n, self.vy / n]
    }
}

/// Hyperbolic norm `|v|_g = |v| / y`.
pub fn metric_norm(v: &HVector) -> f64 {
    v.vx.hypot(v.vy) / v.base.y
}

/// Finite-difference accuracy used for derivatives of nodal data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FdOrder {
    /// Three-point centered stencils, four-point one-sided at the ends.
    Second,
    /// Five-point centered stencils, six-point one-sided near the ends.
    #[default]
    Fourth,
}

/// Finite-difference weights for derivatives `0..=m` at `z` on the nodes `x`
/// (Fornberg's recursion). Entry `[k][j]` weights node `j` for derivative `k`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// First- and second-derivative stencils for every node of a parameter grid.
#[derive(Debug, Clone)]
pub struct Stencils {
    pub idx: Vec<Vec<usize>>,
    pub w1: Vec<Vec<f64>>,
    pub w2: Vec<Vec<f64>>,
}

impl Stencils {
    /// Builds stencils for the grid `params`; closed grids wrap periodically
    /// with period `n·h` (uniform spacing is then required).
    pub fn build(params: &[f64], closed: bool, order: FdOrder) -> Result<Stencils> {
        let n = params.len();
        if n < 3 {
            return Err(Error::Stencil(format!("need at least 3 nodes, got {n}")));
        }
        let order = if n < 6 { FdOrder::Second } else { order };
        let half = match order {
            FdOrder::Second => 1usize,
            FdOrder::Fourth => 2,
        };
        let mut idx = Vec::with_capacity(n);
        let mut w1 = Vec::with_capacity(n);
        let mut w2 = Vec::with_capacity(n);
        if closed {
            let h = (params[n - 1] - params[0]) / (n - 1) as f64;
            for i in 0..n {
                let mut ids = Vec::with_capacity(2 * half + 1);
                let mut xs = Vec::with_capacity(2 * half + 1);
                for k in -(half as isize)..=(half as isize) {
                    ids.push((i as isize + k).rem_euclid(n as isize) as usize);
                    xs.push(k as f64 * h);
                }
                let w = fornberg_weights(0.0, &xs, 2);
                idx.push(ids);
                w1.push(w[1].clone());
                w2.push(w[2].clone());
            }
        } else {
            let one_sided = 2 * half + 2;
            for i in 0..n {
                let ids: Vec<usize> = if i < half {
                    (0..one_sided).collect()
                } else if i + half >= n {
                    (n - one_sided..n).collect()
                } else {
                    (i - half..=i + half).collect()
                };
                let xs: Vec<f64> = ids.iter().map(|&j| params[j]).collect();
                let w = fornberg_weights(params[i], &xs, 2);
                idx.push(ids);
                w1.push(w[1].clone());
                w2.push(w[2].clone());
            }
        }
        Ok(Stencils { idx, w1, w2 })
    }

    /// First derivative of the nodal values `f`.
    pub fn d1(&self, f: &[f64]) -> Vec<f64> {
        self.apply(&self.w1, f)
    }

    /// Second derivative of the nodal values `f`.
    pub fn d2(&self, f: &[f64]) -> Vec<f64> {
        self.apply(&self.w2, f)
    }

    /// First derivative at a single node.
    pub fn d1_at(&self, f: &[f64], i: usize) -> f64 {
        self.idx[i].iter().zip(&self.w1[i]).map(|(&j, w)| w * (f[j] - f[i])).sum()
    }

    // Differences against the center value: the weights annihilate
    // constants, and this keeps them from amplifying the rounding of large
    // offsets.
    fn apply(&self, w: &[Vec<f64>], f: &[f64]) -> Vec<f64> {
        self.idx
            .iter()
            .zip(w)
            .enumerate()
            .map(|(i, (ids, ws))| ids.iter().zip(ws).map(|(&j, c)| c * (f[j] - f[i])).sum())
            .collect()
    }
}

/// A discrete immersed curve in `H²` with clamped boundary data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCurve {
    params: Vec<f64>,
    nodes: Vec<HPoint>,
    boundary_tangents: (HVector, HVector),
    closed: bool,
}

impl DiscreteCurve {
    /// Open curve; boundary tangents are the unit tangents given by the
    /// one-sided difference stencils at the two ends.
    pub fn new(params: Vec<f64>, nodes: Vec<HPoint>) -> Result<Self> {
        Self::validate(&params, &nodes, false)?;
        let st = Stencils::build(&params, false, FdOrder::default())?;
        let n = nodes.len();
        let tangent = |i: usize| -> Result<HVector> {
            let xs: Vec<f64> = st.idx[i].iter().map(|&j| nodes[j].x).collect();
            let ys: Vec<f64> = st.idx[i].iter().map(|&j| nodes[j].y).collect();
            let vx: f64 = xs.iter().zip(&st.w1[i]).map(|(a, w)| a * w).sum();
            let vy: f64 = ys.iter().zip(&st.w1[i]).map(|(a, w)| a * w).sum();
            HVector::new(nodes[i], vx, vy)
                .normalized()
                .ok_or_else(|| Error::Degenerate(format!("zero tangent at node {i}")))
        };
        let ta = tangent(0)?;
        let tb = tangent(n - 1)?;
        Ok(DiscreteCurve { params, nodes, boundary_tangents: (ta, tb), closed: false })
    }

    /// Open curve with explicitly supplied boundary tangents (normalized to
    /// unit hyperbolic length and re-based at the end nodes).
    pub fn with_tangents(
        params: Vec<f64>,
        nodes: Vec<HPoint>,
        start: [f64; 2],
        end: [f64; 2],
    ) -> Result<Self> {
        Self::validate(&params, &nodes, false)?;
        let n = nodes.len();
        let ta = HVector::new(nodes[0], start[0], start[1])
            .normalized()
            .ok_or_else(|| Error::Degenerate("zero start tangent".into()))?;
        let tb = HVector::new(nodes[n - 1], end[0], end[1])
            .normalized()
            .ok_or_else(|| Error::Degenerate("zero end tangent".into()))?;
        Ok(DiscreteCurve { params, nodes, boundary_tangents: (ta, tb), closed: false })
    }

    /// Closed curve sampled at uniformly spaced parameters over one period
    /// (the first node is not repeated at the end).
    pub fn closed(params: Vec<f64>, nodes: Vec<HPoint>) -> Result<Self> {
        Self::validate(&params, &nodes, true)?;
        let n = nodes.len();
        let h = (params[n - 1] - params[0]) / (n - 1) as f64;
        for w in params.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0) {
                return Err(Error::Parameter("closed curves need a uniform parameter grid".into()));
            }
        }
        if nodes[0].dist(nodes[n - 1]) == 0.0 {
            return Err(Error::Degenerate("closed curve repeats its first node".into()));
        }
        let dummy = HVector::new(nodes[0], 0.0, 0.0);
        Ok(DiscreteCurve { params, nodes, boundary_tangents: (dummy, dummy), closed: true })
    }

    fn validate(params: &[f64], nodes: &[HPoint], _closed: bool) -> Result<()> {
        if params.len() != nodes.len() {
            return Err(Error::Parameter(format!(
                "{} parameters for {} nodes",
                params.len(),
                nodes.len()
            )));
        }
        if nodes.len() < 5 {
            return Err(Error::Degenerate(format!("need at least 5 nodes, got {}", nodes.len())));
        }
        for (i, p) in nodes.iter().enumerate() {
            if !(p.y > 0.0 && p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::Degenerate(format!("node {i} = ({}, {}) not in H²", p.x, p.y)));
            }
        }
        for (i, w) in params.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::Parameter(format!("parameters not increasing at index {i}")));
            }
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if w[0].dist(w[1]) == 0.0 {
                return Err(Error::Degenerate(format!("nodes {i} and {} coincide", i + 1)));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn nodes(&self) -> &[HPoint] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Clamped tangent data `(τ_a, τ_b)`, unit in the hyperbolic metric.
    pub fn boundary_tangents(&self) -> (HVector, HVector) {
        self.boundary_tangents
    }

    pub fn xs(&self) -> Vec<f64> {
        self.nodes.iter().map(|p| p.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.nodes.iter().map(|p| p.y).collect()
    }

    /// Smallest height over the nodes.
    pub fn min_height(&self) -> f64 {
        self.nodes.iter().map(|p| p.y).fold(f64::INFINITY, f64::min)
    }

    /// Largest Euclidean norm over the nodes.
    pub fn max_norm(&self) -> f64 {
        self.nodes.iter().map(|p| p.x.hypot(p.y)).fold(0.0, f64::max)
    }

    /// Derivative stencils for this curve's grid.
    pub fn stencils(&self, order: FdOrder) -> Result<Stencils> {
        Stencils::build(&self.params, self.closed, order)
    }

    /// Same nodes with new parameter values (e.g. after an affine change).
    pub fn with_params(&self, params: Vec<f64>) -> Result<Self> {
        Self::validate(&params, &self.nodes, self.closed)?;
        let mut out = self.clone();
        out.params = params;
        Ok(out)
    }

    /// Replaces the nodes, keeping parameters and boundary tangent data.
    pub fn with_nodes(&self, nodes: Vec<HPoint>) -> Result<Self> {
        Self::validate(&self.params, &nodes, self.closed)?;
        let n = nodes.len();
        let mut out = self.clone();
        out.boundary_tangents.0.base = nodes[0];
        out.boundary_tangents.1.base = nodes[n - 1];
        out.nodes = nodes;
        Ok(out)
    }

    /// The same curve traversed backwards; parameters become `t₀ + t₁ − t`.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        let (t0, t1) = (self.params[0], self.params[n - 1]);
        let params = self.params.iter().rev().map(|t| t0 + t1 - t).collect();
        let nodes = self.nodes.iter().rev().copied().collect();
        let (a, b) = self.boundary_tangents;
        DiscreteCurve {
            params,
            nodes,
            boundary_tangents: (
                HVector::new(b.base, -b.vx, -b.vy),
                HVector::new(a.base, -a.vx, -a.vy),
            ),
            closed: self.closed,
        }
    }

    /// Uniform grid spacing, if the parameters are equally spaced.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let n = self.len();
        let h = (self.params[n - 1] - self.params[0]) / (n - 1) as f64;
        self.params
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
            .then_some(h)
    }
}

/// Per-node derivative data of a curve.
#[derive(Debug, Clone)]
pub struct CurveGeometry {
    /// `∂ₓu` at each node.
    pub d1: Vec<[f64; 2]>,
    /// `∂ₓ²u` at each node.
    pub d2: Vec<[f64; 2]>,
    /// Hyperbolic speed `|∂ₓu|_g`.
    pub speed: Vec<f64>,
    /// Signed scalar curvature `⟨κ⃗, N⟩_g`.
    pub kappa: Vec<f64>,
    /// Curvature vector `κ⃗` (Euclidean components).
    pub kvec: Vec<[f64; 2]>,
}

/// Christoffel part of the covariant derivative: `∇_{∂x}X = ∂ₓX + Γ(∂ₓu, X)`.
fn christoffel(y: f64, v: [f64; 2], x: [f64; 2]) -> [f64; 2] {
    [-(x[0] * v[1] + x[1] * v[0]) / y, (x[0] * v[0] - x[1] * v[1]) / y]
}

impl CurveGeometry {
    /// Computes derivatives, speed and curvature at every node.
    pub fn compute(curve: &DiscreteCurve, order: FdOrder) -> Result<Self> {
        let st = curve.stencils(order)?;
        Self::with_stencils(curve, &st)
    }

    pub fn with_stencils(curve: &DiscreteCurve, st: &Stencils) -> Result<Self> {
        let xs = curve.xs();
        let ys = curve.ys();
        let (dx, dy) = (st.d1(&xs), st.d1(&ys));
        let (ddx, ddy) = (st.d2(&xs), st.d2(&ys));
        let n = curve.len();
        let mut out = CurveGeometry {
            d1: Vec::with_capacity(n),
            d2: Vec::with_capacity(n),
            speed: Vec::with_capacity(n),
            kappa: Vec::with_capacity(n),
            kvec: Vec::with_capacity(n),
        };
        for i in 0..n {
            let y = ys[i];
            let v = [dx[i], dy[i]];
            let a = [ddx[i], ddy[i]];
            let e = v[0].hypot(v[1]);
            if !(e > 0.0) || !e.is_finite() {
                return Err(Error::Degenerate(format!("vanishing derivative at node {i}")));
            }
            let sigma = e / y;
            // σ' = (u'·u'')/(|u'| y) − |u'| y'/y²
            let dsigma = (v[0] * a[0] + v[1] * a[1]) / (e * y) - e * v[1] / (y * y);
            let g = christoffel(y, v, v);
            let cov = [a[0] + g[0], a[1] + g[1]];
            let s2 = sigma * sigma;
            let s3 = s2 * sigma;
            let kv = [cov[0] / s2 - dsigma / s3 * v[0], cov[1] / s2 - dsigma / s3 * v[1]];
            // N = i·∂ₛu has Euclidean components (−v_y, v_x)/σ
            let nrm = [-v[1] / sigma, v[0] / sigma];
            let k = (kv[0] * nrm[0] + kv[1] * nrm[1]) / (y * y);
            out.d1.push(v);
            out.d2.push(a);
            out.speed.push(sigma);
            out.kappa.push(k);
            out.kvec.push(kv);
        }
        Ok(out)
    }
}

/// Integral of nodal samples `f` over the parameter domain of `curve`.
pub fn integrate_nodal(curve: &DiscreteCurve, f: &[f64]) -> f64 {
    if curve.is_closed() {
        let n = curve.len();
        let h = (curve.params()[n - 1] - curve.params()[0]) / (n - 1) as f64;
        quad::periodic_trapezoid(h, f)
    } else {
        quad::simpson(curve.params(), f)
    }
}

fn geometry(curve: &DiscreteCurve) -> Result<CurveGeometry> {
    CurveGeometry::compute(curve, FdOrder::default())
}

fn check_index(curve: &DiscreteCurve, i: usize) -> Result<()> {
    if i < curve.len() {
        Ok(())
    } else {
        Err(Error::Stencil(format!("node index {i} out of range for {} nodes", curve.len())))
    }
}

/// Discrete covariant derivative `∇_{∂x}X` of a vector field along the curve
/// at node `i`:
///
/// ```text
/// ∇X = ( ∂ₓX¹ − (X¹∂ₓu² + X²∂ₓu¹)/u² ,  ∂ₓX² + (X¹∂ₓu¹ − X²∂ₓu²)/u² )
/// ```
pub fn cov_derivative(curve: &DiscreteCurve, field: &[HVector], i: usize) -> Result<HVector> {
    if field.len() != curve.len() {
        return Err(Error::Stencil(format!(
            "field has {} entries for {} nodes",
            field.len(),
            curve.len()
        )));
    }
    check_index(curve, i)?;
    let st = curve.stencils(FdOrder::default())?;
    let fx: Vec<f64> = field.iter().map(|v| v.vx).collect();
    let fy: Vec<f64> = field.iter().map(|v| v.vy).collect();
    let (xs, ys) = (curve.xs(), curve.ys());
    let du = [st.d1_at(&xs, i), st.d1_at(&ys, i)];
    let dx = [st.d1_at(&fx, i), st.d1_at(&fy, i)];
    let g = christoffel(ys[i], du, [fx[i], fy[i]]);
    Ok(HVector::new(curve.nodes()[i], dx[0] + g[0], dx[1] + g[1]))
}

/// Curvature vector `κ⃗ = ∇_{∂s}∂ₛu` at node `i`.
pub fn curvature_vector(curve: &DiscreteCurve, i: usize) -> Result<HVector> {
    check_index(curve, i)?;
    let g = geometry(curve)?;
    Ok(HVector::new(curve.nodes()[i], g.kvec[i][0], g.kvec[i][1]))
}

/// Signed curvature `κ = ⟨κ⃗, N⟩_g`, `N` the unit tangent rotated by +90°.
pub fn scalar_curvature(curve: &DiscreteCurve, i: usize) -> Result<f64> {
    check_index(curve, i)?;
    Ok(geometry(curve)?.kappa[i])
}

/// Hyperbolic length `∫ |∂ₓu| / u² dx`.
pub fn hyperbolic_length(curve: &DiscreteCurve) -> Result<f64> {
    Ok(integrate_nodal(curve, &geometry(curve)?.speed))
}

/// Elastic energy `∫ |κ⃗|_g² ds`.
pub fn elastic_energy(curve: &DiscreteCurve) -> Result<f64> {
    let g = geometry(curve)?;
    Ok(elastic_energy_from(curve, &g))
}

pub(crate) fn elastic_energy_from(curve: &DiscreteCurve, g: &CurveGeometry) -> f64 {
    let f: Vec<f64> = g.kappa.iter().zip(&g.speed).map(|(k, s)| k * k * s).collect();
    integrate_nodal(curve, &f)
}

/// Total absolute curvature `∫ |κ| ds`.
pub fn total_abs_curvature(curve: &DiscreteCurve) -> Result<f64> {
    let g = geometry(curve)?;
    let f: Vec<f64> = g.kappa.iter().zip(&g.speed).map(|(k, s)| k.abs() * s).collect();
    Ok(integrate_nodal(curve, &f))
}

/// Elastic energy of the graph `x ↦ (x, g(x))` from samples of `g, g′, g″`:
///
/// ```text
/// E = ∫ [ g″² g / (1+g′²)^{5/2} + 1 / (g √(1+g′²)) ] dx + 2 [ g′/√(1+g′²) ]_a^b
/// ```
pub fn elastic_energy_graph(x: &[f64], g: &[f64], gp: &[f64], gpp: &[f64]) -> Result<f64> {
    let n = x.len();
    if g.len() != n || gp.len() != n || gpp.len() != n || n < 3 {
        return Err(Error::Parameter("graph samples must have equal length >= 3".into()));
    }
    if let Some(i) = g.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!("graph value {} at sample {i} is not positive", g[i])));
    }
    let f: Vec<f64> = (0..n)
        .map(|i| {
            let w = 1.0 + gp[i] * gp[i];
            gpp[i] * gpp[i] * g[i] / w.powf(2.5) + 1.0 / (g[i] * w.sqrt())
        })
        .collect();
    let slope = |i: usize| gp[i] / (1.0 + gp[i] * gp[i]).sqrt();
    Ok(quad::simpson(x, &f) + 2.0 * (slope(n - 1) - slope(0)))
}

/// Boundary term `[∂ₓu² / |∂ₓu|]` at the ends (zero for closed curves).
pub fn willmore_boundary_term(curve: &DiscreteCurve) -> Result<f64> {
    let g = geometry(curve)?;
    Ok(boundary_term_from(curve, &g))
}

pub(crate) fn boundary_term_from(curve: &DiscreteCurve, g: &CurveGeometry) -> f64 {
    if curve.is_closed() {
        return 0.0;
    }
    let n = curve.len();
    let ty = |v: [f64; 2]| v[1] / v[0].hypot(v[1]);
    ty(g.d1[n - 1]) - ty(g.d1[0])
}

/// Willmore energy of the surface of revolution through the elastic energy:
/// `W = (π/2)(E − 4[∂ₓu²/|∂ₓu|]_{∂I})`.
pub fn willmore_energy(curve: &DiscreteCurve) -> Result<f64> {
    let g = geometry(curve)?;
    Ok(0.5 * PI * (elastic_energy_from(curve, &g) - 4.0 * boundary_term_from(curve, &g)))
}

/// Willmore energy `∫ H² dμ` of the surface of revolution, computed from the
/// principal curvatures of the revolved profile:
///
/// ```text
/// k_meridian = (x″y′ − x′y″)/|u′|³,   k_parallel = x′/(y|u′|),
/// dμ = 2π y |u′| dx,   H = (k_meridian + k_parallel)/2
/// ```
pub fn willmore_energy_direct(curve: &DiscreteCurve) -> Result<f64> {
    let g = geometry(curve)?;
    let ys = curve.ys();
    let f: Vec<f64> = (0..curve.len())
        .map(|i| {
            let [x1, y1] = g.d1[i];
            let [x2, y2] = g.d2[i];
            let e = x1.hypot(y1);
            let k_mer = (x2 * y1 - x1 * y2) / (e * e * e);
            let k_par = x1 / (ys[i] * e);
            let h = 0.5 * (k_mer + k_par);
            2.0 * PI * h * h * ys[i] * e
        })
        .collect();
    Ok(integrate_nodal(curve, &f))
}

/// Area `2π ∫ u² |∂ₓu| dx` of the surface of revolution.
pub fn surface_area(curve: &DiscreteCurve) -> Result<f64> {
    let g = geometry(curve)?;
    let ys = curve.ys();
    let f: Vec<f64> =
        (0..curve.len()).map(|i| 2.0 * PI * ys[i] * g.d1[i][0].hypot(g.d1[i][1])).collect();
    Ok(integrate_nodal(curve, &f))
}

/// Orientation-preserving isometry `z ↦ (az + b)/(cz + d)`, `ad − bc > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MoebiusMap {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if det > 0.0 && det.is_finite() {
            Ok(MoebiusMap { a, b, c, d })
        } else {
            Err(Error::Parameter(format!("Möbius determinant {det} is not positive")))
        }
    }

    pub fn identity() -> Self {
        MoebiusMap { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        MoebiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    fn denominator(&self, p: HPoint) -> Result<Complex64> {
        let den = self.c * p.to_complex() + self.d;
        if den.norm() == 0.0 {
            return Err(Error::Domain(format!("Möbius map undefined at ({}, {})", p.x, p.y)));
        }
        Ok(den)
    }

    /// Image of a point.
    pub fn apply(&self, p: HPoint) -> Result<HPoint> {
        let den = self.denominator(p)?;
        HPoint::from_complex((self.a * p.to_complex() + self.b) / den)
    }

    /// Pushforward of a tangent vector by the complex derivative
    /// `(ad − bc)/(cz + d)²`.
    pub fn push(&self, v: &HVector) -> Result<HVector> {
        let den = self.denominator(v.base)?;
        let w = (self.a * self.d - self.b * self.c) / (den * den) * Complex64::new(v.vx, v.vy);
        Ok(HVector::new(self.apply(v.base)?, w.re, w.im))
    }

    /// Image of a whole curve; boundary tangents are pushed forward.
    pub fn apply_curve(&self, curve: &DiscreteCurve) -> Result<DiscreteCurve> {
        let nodes = curve.nodes().iter().map(|p| self.apply(*p)).collect::<Result<Vec<_>>>()?;
        if curve.is_closed() {
            return DiscreteCurve::closed(curve.params().to_vec(), nodes);
        }
        let (ta, tb) = curve.boundary_tangents();
        let (ta, tb) = (self.push(&ta)?, self.push(&tb)?);
        DiscreteCurve::with_tangents(
            curve.params().to_vec(),
            nodes,
            [ta.vx, ta.vy],
            [tb.vx, tb.vy],
        )
    }
}

/// Möbius map `Φ` with `Φ(p) = (0, y)` and `dΦ_p(v) = (y, 0)` for a unit vector `v`.
///
/// Built as translation and scaling to `i`, a rotation about `i`, and a final
/// scaling by `y`; orientation-preserving maps suffice because the rotation
/// about `i` reaches every unit direction.
pub fn isometry_to_standard(v: &HVector, y: f64) -> Result<MoebiusMap> {
    let p = v.base;
    if (metric_norm(v) - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!("vector has hyperbolic norm {}", metric_norm(v))));
    }
    if !(y > 0.0) {
        return Err(Error::Parameter(format!("target height {y} must be positive")));
    }
    let to_i = MoebiusMap::new(1.0, -p.x, 0.0, p.y)?;
    // at i the image of v is the unit complex number w = v / p.y; rotating by
    // z ↦ (cz + s)/(−sz + c) multiplies tangents at i by e^{2iθ}
    let theta = -0.5 * Complex64::new(v.vx, v.vy).arg();
    let (s, c) = theta.sin_cos();
    let rot = MoebiusMap::new(c, s, -s, c)?;
    let scale = MoebiusMap::new(y, 0.0, 0.0, 1.0)?;
    Ok(scale.compose(&rot.compose(&to_i)))
}

/// Reflection `z ↦ −z̄` across the imaginary axis.
pub fn reflect(p: HPoint) -> HPoint {
    HPoint { x: -p.x, y: p.y }
}

/// Reflects every node of a curve; with `reverse` the orientation is also
/// reversed so that `ũ(x) = P(u(α − x))` with `α = t₀ + t₁`.
pub fn reflect_curve(curve: &DiscreteCurve, reverse: bool) -> Result<DiscreteCurve> {
    let nodes: Vec<HPoint> = curve.nodes().iter().map(|p| reflect(*p)).collect();
    let out = if curve.is_closed() {
        DiscreteCurve::closed(curve.params().to_vec(), nodes)?
    } else {
        let (ta, tb) = curve.boundary_tangents();
        DiscreteCurve::with_tangents(
            curve.params().to_vec(),
            nodes,
            [-ta.vx, ta.vy],
            [-tb.vx, tb.vy],
        )?
    };
    Ok(if reverse { out.reversed() } else { out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64, msg: &str) {
        assert!((a - b).abs() <= tol, "{msg}: {a} vs {b} (diff {:e})", (a - b).abs());
    }

    fn curve_from(f: impl Fn(f64) -> (f64, f64), t0: f64, t1: f64, n: usize) -> DiscreteCurve {
        let params: Vec<f64> = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect();
        let nodes = params.iter().map(|&t| {
            let (x, y) = f(t);
            HPoint::new(x, y).unwrap()
        });
        DiscreteCurve::new(params.clone(), nodes.collect()).unwrap()
    }

    fn vertical(n: usize) -> DiscreteCurve {
        curve_from(|t| (0.0, t.exp()), 0.0, 1.0, n)
    }

    #[test]
    fn metric_norm_examples() {
        let at = |x, y| HPoint::new(x, y).unwrap();
        assert_eq!(metric_norm(&HVector::new(at(0.0, 1.0), 0.0, 1.0)), 1.0);
        assert_eq!(metric_norm(&HVector::new(at(0.0, 5.0), 3.0, 4.0)), 1.0);
        assert_eq!(metric_norm(&HVector::new(at(0.0, 2.0), 1.0, 0.0)), 0.5);
        assert!(HPoint::new(0.0, 0.0).is_err());
    }

    #[test]
    fn curve_invariants_enforced() {
        let p = |x, y| HPoint::new(x, y).unwrap();
        let nodes = vec![p(0.0, 1.0), p(0.0, 1.0), p(0.0, 2.0), p(0.0, 3.0), p(0.0, 4.0)];
        assert!(DiscreteCurve::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], nodes).is_err());
        let nodes = vec![p(0.0, 1.0), p(0.0, 2.0), p(0.0, 3.0), p(0.0, 4.0), p(0.0, 5.0)];
        assert!(DiscreteCurve::new(vec![0.0, 1.0, 1.0, 3.0, 4.0], nodes.clone()).is_err());
        assert!(DiscreteCurve::new(vec![0.0, 1.0, 2.0, 3.0], nodes[..4].to_vec()).is_err());
    }

    #[test]
    fn fornberg_reproduces_classic_stencils() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
        let w = fornberg_weights(0.0, &[0.0, 1.0, 2.0], 1);
        assert_close(w[1][0], -1.5, 1e-15, "one-sided");
    }

    #[test]
    fn covariant_derivative_basics() {
        let c = vertical(100);
        let zero: Vec<HVector> = c.nodes().iter().map(|p| HVector::new(*p, 0.0, 0.0)).collect();
        let v = cov_derivative(&c, &zero, 50).unwrap();
        assert_eq!((v.vx, v.vy), (0.0, 0.0));
        // ∂ₓu along u(t) = (0, eᵗ) is (0, eᵗ); ∇_{∂x}∂ₓu = 0 for this geodesic
        let du: Vec<HVector> = c.nodes().iter().map(|p| HVector::new(*p, 0.0, p.y)).collect();
        let v = cov_derivative(&c, &du, 30).unwrap();
        assert!(metric_norm(&v) < 1e-8);
        assert!(cov_derivative(&c, &du[..10], 3).is_err());
    }

    #[test]
    fn geodesics_have_no_curvature() {
        let c = vertical(400);
        let s = curve_from(|t| (t.cos(), t.sin()), 0.3, 2.8, 400);
        for i in [0, 1, 57, 200, 398, 399] {
            assert!(metric_norm(&curvature_vector(&c, i).unwrap()) < 1e-6);
            assert!(metric_norm(&curvature_vector(&s, i).unwrap()) < 1e-6);
        }
        assert_close(elastic_energy(&s).unwrap(), 0.0, 1e-6, "semicircle energy");
    }

    #[test]
    fn scalar_curvature_matches_euclidean_formula() {
        // κ = y·k_e + t_x for the curvature of a general curve
        let c = curve_from(|t| (t + 0.3 * t.sin(), 2.0 + 0.5 * (2.0 * t).cos()), 0.0, 3.0, 600);
        let g = CurveGeometry::compute(&c, FdOrder::Fourth).unwrap();
        for i in (5..595).step_by(37) {
            let t = c.params()[i];
            let (x1, y1) = (1.0 + 0.3 * t.cos(), -(2.0 * t).sin());
            let (x2, y2) = (-0.3 * t.sin(), -2.0 * (2.0 * t).cos());
            let e = x1.hypot(y1);
            let ke = (x1 * y2 - y1 * x2) / e.powi(3);
            let exact = c.nodes()[i].y * ke + x1 / e;
            assert_close(g.kappa[i], exact, 1e-8, "scalar curvature");
            let kv = g.kvec[i];
            let kn = kv[0].hypot(kv[1]) / c.nodes()[i].y;
            assert_close(kn, exact.abs(), 1e-8, "|κ⃗| = |κ|");
        }
    }

    #[test]
    fn length_examples() {
        let c = curve_from(|t| (0.0, t), 1.0, std::f64::consts::E, 200);
        assert_close(hyperbolic_length(&c).unwrap(), 1.0, 1e-8, "vertical");
        let c = curve_from(|t| (t, 1.0), 0.0, 1.0, 50);
        assert_close(hyperbolic_length(&c).unwrap(), 1.0, 1e-12, "horizontal");
    }

    #[test]
    fn graph_energy_examples() {
        let x: Vec<f64> = (0..201).map(|i| i as f64 / 200.0).collect();
        let one = vec![1.0; 201];
        let zero = vec![0.0; 201];
        assert_close(elastic_energy_graph(&x, &one, &zero, &zero).unwrap(), 1.0, 1e-12, "g ≡ 1");
        let bad = vec![-1.0; 201];
        assert!(elastic_energy_graph(&x, &bad, &zero, &zero).is_err());
    }

    #[test]
    fn area_examples() {
        let c = curve_from(|t| (t, 1.0), 0.0, 1.0, 41);
        assert_close(surface_area(&c).unwrap(), 2.0 * PI, 1e-12, "cylinder");
        let c = curve_from(|t| (0.0, t), 1.0, 2.0, 41);
        assert_close(surface_area(&c).unwrap(), 3.0 * PI, 1e-12, "disc annulus");
    }

    #[test]
    fn willmore_of_vertical_segment_vanishes() {
        let c = curve_from(|t| (0.0, t), 1.0, 2.0, 41);
        assert_close(willmore_energy(&c).unwrap(), 0.0, 1e-12, "W");
        assert_close(willmore_energy_direct(&c).unwrap(), 0.0, 1e-12, "W direct");
    }

    #[test]
    fn moebius_examples() {
        let p = HPoint::new(1.0, 1.0).unwrap();
        assert_eq!(MoebiusMap::identity().apply(p).unwrap(), p);
        let inv = MoebiusMap::new(0.0, -1.0, 1.0, 0.0).unwrap();
        let q = inv.apply(HPoint::new(0.0, 1.0).unwrap()).unwrap();
        assert_close(q.x, 0.0, 1e-15, "x");
        assert_close(q.y, 1.0, 1e-15, "y");
        assert!(MoebiusMap::new(1.0, 2.0, 1.0, 1.0).is_err());
        let v = HVector::new(HPoint::new(0.3, 0.7).unwrap(), 0.2, -0.5);
        let m = MoebiusMap::new(2.0, 1.0, 1.0, 1.0).unwrap();
        assert_close(metric_norm(&m.push(&v).unwrap()), metric_norm(&v), 1e-14, "isometry");
    }

    #[test]
    fn isometry_to_standard_examples() {
        let at = |x, y| HPoint::new(x, y).unwrap();
        let cases = [
            (HVector::new(at(0.0, 1.0), 1.0, 0.0), 1.0),
            (HVector::new(at(0.0, 2.0), 2.0, 0.0), 1.0),
            (HVector::new(at(1.0, 1.0), 0.0, 1.0), 1.0),
            (HVector::new(at(-2.0, 0.5), -0.3, -0.4), 3.0),
        ];
        for (v, y) in cases {
            let m = isometry_to_standard(&v, y).unwrap();
            let w = m.push(&v).unwrap();
            assert_close(w.base.x, 0.0, 1e-9, "Φ(p).x");
            assert_close(w.base.y, y, 1e-9, "Φ(p).y");
            assert_close(w.vx, y, 1e-9, "dΦ(v).x");
            assert_close(w.vy, 0.0, 1e-9, "dΦ(v).y");
        }
        let m = isometry_to_standard(&cases[1].0, 1.0).unwrap();
        let z = m.apply(at(3.0, 4.0)).unwrap();
        assert_close(z.x, 1.5, 1e-14, "scaling");
        assert_close(z.y, 2.0, 1e-14, "scaling");
        assert!(isometry_to_standard(&HVector::new(at(0.0, 1.0), 2.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn reflection_examples() {
        let p = reflect(HPoint::new(0.0, 1.0).unwrap());
        assert_eq!((p.x, p.y), (0.0, 1.0));
        let p = reflect(HPoint::new(2.0, 3.0).unwrap());
        assert_eq!((p.x, p.y), (-2.0, 3.0));
        let c = curve_from(|t| (t + 0.2 * t * t, 1.0 + 0.4 * t.sin()), -1.0, 1.5, 300);
        let r = reflect_curve(&c, true).unwrap();
        let (gc, gr) = (CurveGeometry::compute(&c, FdOrder::Fourth).unwrap(),
            CurveGeometry::compute(&r, FdOrder::Fourth).unwrap());
        for i in 0..300 {
            assert_close(gr.kappa[i], gc.kappa[299 - i], 1e-6, "κ reflected-reversed");
        }
    }
}
