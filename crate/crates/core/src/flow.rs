//! Time integration of the weighted elastic flow
//! `∂ₜu = a(u)((∇⊥)²κ⃗ + ½|κ⃗|²κ⃗ − κ⃗)` with clamped ends.
//!
//! Two one-step schemes are provided (see [`Scheme`]). Both keep the end
//! nodes fixed and replace the equations of the two nodes next to them by
//! the condition that the one-sided difference tangent at the end does not
//! change, so the clamped tangents hold to rounding error. Node spacing is
//! restored periodically by a constant-speed resampling.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp2::{self, CurveGeometry, DiscreteCurve, FdOrder, HPoint, HVector, Stencils};
use crate::linalg::{BandMatrix, CubicSpline};
use crate::quad;

/// The negative weight `a(x, y)` in front of the gradient.
#[derive(Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightFunction {
    /// `a = −1/(2y⁴)`: the Willmore flow of the surface of revolution.
    #[default]
    Willmore,
    /// `a ≡ −1`: the elastic flow in `H²`.
    Elastic,
    /// `a = −coef·y^(−power)` with `coef > 0`.
    PowerLaw { coef: f64, power: f64 },
    /// Any smooth negative field.
    #[serde(skip)]
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightFunction::Willmore => f.write_str("Willmore"),
            WeightFunction::Elastic => f.write_str("Elastic"),
            WeightFunction::PowerLaw { coef, power } => write!(f, "PowerLaw({coef}, {power})"),
            WeightFunction::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl WeightFunction {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            WeightFunction::Willmore => -0.5 / (y * y * y * y),
            WeightFunction::Elastic => -1.0,
            WeightFunction::PowerLaw { coef, power } => -coef * y.powf(-power),
            WeightFunction::Custom(f) => f(x, y),
        }
    }
}

/// How the step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum TimeStep {
    /// `factor·h_g⁴·min|1/a|`, recomputed every step (`h_g` the smallest
    /// hyperbolic node spacing). The default factor is 0.1.
    Stability { factor: f64 },
    /// A fixed step.
    Fixed { dt: f64 },
    /// `factor·min|1/a|`: the stiffness of the lower-order terms scales with
    /// the weight, so this keeps `dt·|a|` bounded as the curve approaches
    /// the axis.
    Weighted { factor: f64 },
}

impl Default for TimeStep {
    fn default() -> Self {
        TimeStep::Stability { factor: 0.1 }
    }
}

/// Time discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Only the leading fourth-order part `(|a|/σ⁴)∂ₓ⁴`, with coefficients
    /// frozen at the current curve, is implicit. Cheap and accurate, but the
    /// explicit remainder limits the step to roughly `10·min|1/a|`.
    #[default]
    SemiImplicit,
    /// Linearly implicit Euler with the banded Jacobian of the normal
    /// velocity; interior nodes move along their normals. Stable for steps of
    /// several hundred `min|1/a|`, with a larger error constant.
    LinearlyImplicit,
}

/// Run parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    /// Number of nodes; the initial datum is resampled at constant speed
    /// when it differs (0 keeps the datum's own resolution).
    pub resolution: usize,
    pub time_step: TimeStep,
    pub scheme: Scheme,
    /// Energy-stable step control: halve the step when the energy would rise
    /// by more than `energy_tol`, grow it by 25% after ten accepted steps.
    pub adaptive: bool,
    /// Upper bound for adaptive steps.
    pub dt_max: f64,
    pub energy_tol: f64,
    pub t_max: f64,
    pub max_steps: usize,
    pub grad_tol: f64,
    /// Length at which the run is declared singular (default 10× initial).
    pub length_cap: Option<f64>,
    pub height_floor: f64,
    /// Constant-speed reparametrization cadence in steps (0 disables).
    pub reparam_every: usize,
    /// Trajectory sampling stride in steps.
    pub record_every: usize,
    pub weight: WeightFunction,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            resolution: 0,
            time_step: TimeStep::default(),
            scheme: Scheme::default(),
            adaptive: false,
            dt_max: f64::INFINITY,
            energy_tol: 1e-10,
            t_max: f64::INFINITY,
            max_steps: 10_000,
            grad_tol: 1e-6,
            length_cap: None,
            height_floor: 1e-3,
            reparam_every: 25,
            record_every: 1,
            weight: WeightFunction::Willmore,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution != 0 && self.resolution < 16 {
            return Err(Error::Parameter(format!("resolution must be >= 16, got {}", self.resolution)));
        }
        match self.time_step {
            TimeStep::Stability { factor } if !(factor > 0.0) => {
                return Err(Error::Parameter("stability factor must be positive".into()))
            }
            TimeStep::Weighted { factor } if !(factor > 0.0) => {
                return Err(Error::Parameter("weighted step factor must be positive".into()))
            }
            TimeStep::Fixed { dt } if !(dt > 0.0) => {
                return Err(Error::Parameter("time step must be positive".into()))
            }
            _ => {}
        }
        if !(self.grad_tol > 0.0) || !(self.height_floor >= 0.0) || !(self.dt_max > 0.0) {
            return Err(Error::Parameter("grad_tol, dt_max must be positive and height_floor non-negative".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Parameter("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Monitored quantities of one curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub elastic: f64,
    pub willmore: f64,
    pub boundary_term: f64,
    pub hyp_length: f64,
    pub min_height: f64,
    pub total_abs_curvature: f64,
    /// `h(t) = ∫ |a|·|∇E|² ds`.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub curve: DiscreteCurve,
    pub report: EnergyReport,
    pub step_count: usize,
}

impl FlowState {
    /// The state at `t = 0` for an already prepared curve.
    pub fn initial(curve: DiscreteCurve, weight: &WeightFunction) -> Result<Self> {
        let report = report_for(&curve, weight)?;
        Ok(FlowState { t: 0.0, curve, report, step_count: 0 })
    }
}

/// Nodal flow quantities.
#[derive(Debug, Clone)]
pub struct FlowTerms {
    pub geometry: CurveGeometry,
    /// `∂ₛ²κ + ½κ³ − κ` (zero on the clamped nodes).
    pub bracket: Vec<f64>,
    pub weight: Vec<f64>,
    /// Euclidean velocity components (zero on the clamped nodes).
    pub velocity: Vec<[f64; 2]>,
}

/// Number of nodes at each end whose motion is fixed by the clamping.
pub const CLAMPED: usize = 2;

fn is_clamped(i: usize, n: usize) -> bool {
    i < CLAMPED || i + CLAMPED >= n
}

/// `κ_s` and `κ_ss` at every node.
fn curvature_derivatives(g: &CurveGeometry, st: &Stencils, ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let dk = st.d1(&g.kappa);
    let ddk = st.d2(&g.kappa);
    let n = g.kappa.len();
    let mut ks = Vec::with_capacity(n);
    let mut kss = Vec::with_capacity(n);
    for i in 0..n {
        let v = g.d1[i];
        let a = g.d2[i];
        let y = ys[i];
        let e = v[0].hypot(v[1]);
        let s = g.speed[i];
        let ds = (v[0] * a[0] + v[1] * a[1]) / (e * y) - e * v[1] / (y * y);
        ks.push(dk[i] / s);
        kss.push((ddk[i] - ds / s * dk[i]) / (s * s));
    }
    (ks, kss)
}

pub fn flow_terms(curve: &DiscreteCurve, st: &Stencils, weight: &WeightFunction) -> Result<FlowTerms> {
    let g = CurveGeometry::with_stencils(curve, st)?;
    let ys = curve.ys();
    let (_, kss) = curvature_derivatives(&g, st, &ys);
    let n = curve.len();
    let mut bracket = vec![0.0; n];
    let mut wts = vec![0.0; n];
    let mut vel = vec![[0.0; 2]; n];
    for i in 0..n {
        let p = curve.nodes()[i];
        let a = weight.eval(p.x, p.y);
        if !(a < 0.0) || !a.is_finite() {
            return Err(Error::Parameter(format!("weight a({}, {}) = {a} is not negative", p.x, p.y)));
        }
        wts[i] = a;
        if is_clamped(i, n) && !curve.is_closed() {
            continue;
        }
        let k = g.kappa[i];
        let b = kss[i] + 0.5 * k * k * k - k;
        bracket[i] = b;
        let v = g.d1[i];
        let s = g.speed[i];
        vel[i] = [a * b * (-v[1] / s), a * b * (v[0] / s)];
    }
    Ok(FlowTerms { geometry: g, bracket, weight: wts, velocity: vel })
}

/// Nodal flow velocities `V = a(∂ₛ²κ + ½κ³ − κ)N`; zero at the two clamped
/// nodes at each end.
pub fn velocity(curve: &DiscreteCurve, weight: &WeightFunction) -> Result<Vec<HVector>> {
    if curve.len() < 16 {
        return Err(Error::Stencil(format!("flow needs at least 16 nodes, got {}", curve.len())));
    }
    let st = curve.stencils(FdOrder::default())?;
    let t = flow_terms(curve, &st, weight)?;
    Ok(curve.nodes().iter().zip(&t.velocity).map(|(p, v)| HVector::new(*p, v[0], v[1])).collect())
}

/// `h = ∫ |a| B² ds` from precomputed terms.
fn grad_norm_from(curve: &DiscreteCurve, t: &FlowTerms) -> f64 {
    let f: Vec<f64> = (0..curve.len())
        .map(|i| t.weight[i].abs() * t.bracket[i] * t.bracket[i] * t.geometry.speed[i])
        .collect();
    hyp2::integrate_nodal(curve, &f)
}

/// Computes every report field for a curve.
pub fn report_for(curve: &DiscreteCurve, weight: &WeightFunction) -> Result<EnergyReport> {
    let st = curve.stencils(FdOrder::default())?;
    let t = flow_terms(curve, &st, weight)?;
    let g = &t.geometry;
    let elastic = hyp2::integrate_nodal(
        curve,
        &g.kappa.iter().zip(&g.speed).map(|(k, s)| k * k * s).collect::<Vec<_>>(),
    );
    let boundary_term = if curve.is_closed() { 0.0 } else { hyp2::boundary_term_from(curve, g) };
    Ok(EnergyReport {
        elastic,
        willmore: 0.5 * PI * (elastic - 4.0 * boundary_term),
        boundary_term,
        hyp_length: hyp2::integrate_nodal(curve, &g.speed),
        min_height: curve.min_height(),
        total_abs_curvature: hyp2::integrate_nodal(
            curve,
            &g.kappa.iter().zip(&g.speed).map(|(k, s)| k.abs() * s).collect::<Vec<_>>(),
        ),
        grad_norm: grad_norm_from(curve, &t),
    })
}

pub fn monitor(state: &FlowState, weight: &WeightFunction) -> Result<EnergyReport> {
    report_for(&state.curve, weight)
}

/// Elastic energy only (cheaper than a full report).
pub fn energy(curve: &DiscreteCurve) -> Result<f64> {
    hyp2::elastic_energy(curve)
}

/// Stability step `factor·h_g⁴·min|1/a|`.
pub fn stability_dt(curve: &DiscreteCurve, weight: &WeightFunction, factor: f64) -> Result<f64> {
    let nodes = curve.nodes();
    let mut hg = f64::INFINITY;
    for w in nodes.windows(2) {
        let (p, q) = (w[0], w[1]);
        hg = hg.min(hyp2::hyperbolic_distance(p, q));
    }
    let inv_a = nodes.iter().map(|p| 1.0 / weight.eval(p.x, p.y).abs()).fold(f64::INFINITY, f64::min);
    let dt = factor * hg.powi(4) * inv_a;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Step(format!("degenerate stability step {dt}")));
    }
    Ok(dt)
}

/// Row `i` of the product `D₂D₂` as `(column, weight)` pairs.
fn d2d2_row(st: &Stencils, i: usize) -> Vec<(usize, f64)> {
    let mut acc: Vec<(usize, f64)> = Vec::new();
    for (&k, &wk) in st.idx[i].iter().zip(&st.w2[i]) {
        for (&j, &wj) in st.idx[k].iter().zip(&st.w2[k]) {
            match acc.iter_mut().find(|e| e.0 == j) {
                Some(e) => e.1 += wk * wj,
                None => acc.push((j, wk * wj)),
            }
        }
    }
    acc
}

/// Implicit operator `I + dt·diag(|a|/σ⁴)·D₂D₂` with clamping rows.
fn implicit_matrix(curve: &DiscreteCurve, st: &Stencils, terms: &FlowTerms, dt: f64) -> Result<BandMatrix> {
    let n = curve.len();
    let closed = curve.is_closed();
    let row4 = |i: usize| d2d2_row(st, i);
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        if closed || !is_clamped(i, n) {
            let s = terms.geometry.speed[i];
            let c = terms.weight[i].abs() / (s * s * s * s);
            let mut r: Vec<(usize, f64)> = row4(i).into_iter().map(|(j, w)| (j, dt * c * w)).collect();
            match r.iter_mut().find(|e| e.0 == i) {
                Some(e) => e.1 += 1.0,
                None => r.push((i, 1.0)),
            }
            rows.push(r);
        } else if i == 0 || i == n - 1 {
            rows.push(vec![(i, 1.0)]);
        } else {
            // the derivative stencil of the neighbouring end node annihilates δ
            let e = if i == 1 { 0 } else { n - 1 };
            rows.push(st.idx[e].iter().copied().zip(st.w1[e].iter().copied()).collect());
        }
    }
    if closed {
        return Err(Error::Parameter("the clamped flow needs an open curve".into()));
    }
    let bw = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().map(move |&(j, _)| (j as isize - i as isize).unsigned_abs()))
        .max()
        .unwrap_or(0);
    let mut m = BandMatrix::zeros(n, bw, bw);
    for (i, r) in rows.iter().enumerate() {
        for &(j, w) in r {
            m.add(i, j, w)?;
        }
    }
    Ok(m)
}

/// Largest index distance over which a node influences the velocity of another.
fn velocity_reach(st: &Stencils) -> usize {
    let mut r = 0;
    for (i, ids) in st.idx.iter().enumerate() {
        for &k in ids {
            for &j in &st.idx[k] {
                r = r.max(i.abs_diff(j));
            }
        }
    }
    r
}

/// Unknowns of the linearly implicit step: node 1 and node `n−2` move
/// freely (two unknowns each, pinned by the tangent constraints); every other
/// interior node moves along its normal. Tangential motion is left to the
/// reparametrization.
struct NormalLayout {
    n: usize,
    normals: Vec<[f64; 2]>,
}

impl NormalLayout {
    fn new(terms: &FlowTerms) -> Self {
        let normals = terms
            .geometry
            .d1
            .iter()
            .map(|d| {
                let e = d[0].hypot(d[1]);
                [-d[1] / e, d[0] / e]
            })
            .collect::<Vec<_>>();
        NormalLayout { n: normals.len(), normals }
    }

    /// Unknown indices of node `j` with the Euclidean direction each one moves it in.
    fn unknowns(&self, j: usize) -> Vec<(usize, [f64; 2])> {
        let n = self.n;
        if j == 0 || j == n - 1 {
            Vec::new()
        } else if j == 1 {
            vec![(0, [1.0, 0.0]), (1, [0.0, 1.0])]
        } else if j == n - 2 {
            vec![(n - 2, [1.0, 0.0]), (n - 1, [0.0, 1.0])]
        } else {
            vec![(j, self.normals[j])]
        }
    }
}

/// Jacobian of the normal velocity `n̂ᵢ·Vᵢ` with respect to the unknowns of
/// [`NormalLayout`], by coloured central differences. `rows[i]` holds the
/// sparse row of node `i`.
fn normal_jacobian(
    curve: &DiscreteCurve,
    st: &Stencils,
    layout: &NormalLayout,
    weight: &WeightFunction,
) -> Result<Vec<Vec<(usize, f64)>>> {
    let n = curve.len();
    let reach = velocity_reach(st);
    let colours = 2 * reach + 1;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let base = curve.nodes();
    // passes: each moves a set of (node, direction) pairs at least `colours` apart
    let mut passes: Vec<Vec<(usize, usize, [f64; 2])>> = Vec::new();
    for colour in 0..colours.min(n) {
        passes.push(
            (colour..n)
                .step_by(colours)
                .filter(|&j| j >= 2 && j + 2 < n)
                .map(|j| (j, j, layout.normals[j]))
                .collect(),
        );
    }
    for c in 0..2 {
        passes.push(vec![(1, layout.unknowns(1)[c].0, layout.unknowns(1)[c].1)]);
        passes.push(vec![(n - 2, layout.unknowns(n - 2)[c].0, layout.unknowns(n - 2)[c].1)]);
    }
    for pass in passes.iter().filter(|p| !p.is_empty()) {
        let shifted = |sign: f64| -> Result<FlowTerms> {
            let mut nodes = base.to_vec();
            for &(j, _, d) in pass {
                let e = 6e-6 * base[j].y;
                nodes[j].x += sign * e * d[0];
                nodes[j].y += sign * e * d[1];
            }
            flow_terms(&curve.with_nodes(nodes)?, st, weight)
        };
        let (plus, minus) = (shifted(1.0)?, shifted(-1.0)?);
        for &(j, col, _) in pass {
            let e = 6e-6 * base[j].y;
            for (i, row) in rows.iter_mut().enumerate().take((j + reach + 1).min(n)).skip(j.saturating_sub(reach)) {
                let nv = layout.normals[i];
                let dv = [plus.velocity[i][0] - minus.velocity[i][0], plus.velocity[i][1] - minus.velocity[i][1]];
                let d = (nv[0] * dv[0] + nv[1] * dv[1]) / (2.0 * e);
                if d != 0.0 {
                    row.push((col, d));
                }
            }
        }
    }
    Ok(rows)
}

fn checked_nodes(curve: &DiscreteCurve, dx: &[f64], dy: &[f64]) -> Result<DiscreteCurve> {
    let mut nodes = Vec::with_capacity(curve.len());
    for (i, p) in curve.nodes().iter().enumerate() {
        let q = HPoint { x: p.x + dx[i], y: p.y + dy[i] };
        if !(q.y > 0.0) || !q.x.is_finite() || !q.y.is_finite() {
            return Err(Error::BlowUp(format!("node {i} left H² ({}, {})", q.x, q.y)));
        }
        nodes.push(q);
    }
    curve.with_nodes(nodes)
}

/// One step of size `dt` with the given scheme, returning the new curve.
pub fn step_curve(curve: &DiscreteCurve, dt: f64, weight: &WeightFunction, scheme: Scheme) -> Result<DiscreteCurve> {
    let n = curve.len();
    if n < 16 {
        return Err(Error::Stencil(format!("flow needs at least 16 nodes, got {n}")));
    }
    if curve.is_closed() {
        return Err(Error::Parameter("the clamped flow needs an open curve".into()));
    }
    let st = curve.stencils(FdOrder::default())?;
    let terms = flow_terms(curve, &st, weight)?;
    let (mut dx, mut dy);
    match scheme {
        Scheme::SemiImplicit => {
            let lu = implicit_matrix(curve, &st, &terms, dt)?.factor().map_err(|e| Error::Step(e.to_string()))?;
            dx = terms.velocity.iter().map(|v| dt * v[0]).collect::<Vec<_>>();
            dy = terms.velocity.iter().map(|v| dt * v[1]).collect::<Vec<_>>();
            lu.solve(&mut dx);
            lu.solve(&mut dy);
        }
        Scheme::LinearlyImplicit => {
            let layout = NormalLayout::new(&terms);
            let jac = normal_jacobian(curve, &st, &layout, weight)?;
            let bw = velocity_reach(&st) + 2;
            let mut m = BandMatrix::zeros(n, bw, bw);
            let mut rhs = vec![0.0; n];
            for (r, e) in [(0usize, 0usize), (n - 2, n - 1)] {
                // the end difference tangent keeps its value
                for c in 0..2 {
                    for (&j, &w) in st.idx[e].iter().zip(&st.w1[e]) {
                        for (col, d) in layout.unknowns(j) {
                            if d[c] != 0.0 {
                                m.add(r + c, col, w * d[c])?;
                            }
                        }
                    }
                }
            }
            for i in 2..n - 2 {
                m.add(i, i, 1.0)?;
                for &(col, v) in &jac[i] {
                    m.add(i, col, -dt * v)?;
                }
                let nv = layout.normals[i];
                rhs[i] = dt * (nv[0] * terms.velocity[i][0] + nv[1] * terms.velocity[i][1]);
            }
            m.factor().map_err(|e| Error::Step(e.to_string()))?.solve(&mut rhs);
            dx = vec![0.0; n];
            dy = vec![0.0; n];
            for j in 1..n - 1 {
                for (col, d) in layout.unknowns(j) {
                    dx[j] += rhs[col] * d[0];
                    dy[j] += rhs[col] * d[1];
                }
            }
        }
    }
    dx[0] = 0.0;
    dy[0] = 0.0;
    dx[n - 1] = 0.0;
    dy[n - 1] = 0.0;
    checked_nodes(curve, &dx, &dy)
}

/// Step prescribed by the configured rule, capped at `dt_max`.
pub fn rule_dt(curve: &DiscreteCurve, config: &FlowConfig) -> Result<f64> {
    let dt = match config.time_step {
        TimeStep::Stability { factor } => stability_dt(curve, &config.weight, factor)?,
        TimeStep::Fixed { dt } => dt,
        TimeStep::Weighted { factor } => {
            let inv_a = curve
                .nodes()
                .iter()
                .map(|p| 1.0 / config.weight.eval(p.x, p.y).abs())
                .fold(f64::INFINITY, f64::min);
            factor * inv_a
        }
    };
    Ok(dt.min(config.dt_max))
}

/// Advances a state by one step with the configured step rule (no adaptivity).
pub fn step(state: &FlowState, config: &FlowConfig) -> Result<FlowState> {
    let dt = rule_dt(&state.curve, config)?;
    let curve = step_curve(&state.curve, dt, &config.weight, config.scheme)?;
    let report = report_for(&curve, &config.weight)?;
    Ok(FlowState { t: state.t + dt, curve, report, step_count: state.step_count + 1 })
}

/// Moves node 1 and node `n−2` so that the one-sided difference tangent at
/// each end points exactly along the clamped direction.
pub fn snap_boundary_tangents(curve: &DiscreteCurve) -> Result<DiscreteCurve> {
    let n = curve.len();
    let st = curve.stencils(FdOrder::default())?;
    let (ta, tb) = curve.boundary_tangents();
    let mut nodes = curve.nodes().to_vec();
    for (end, next, tau) in [(0usize, 1usize, ta), (n - 1, n - 2, tb)] {
        let xs: Vec<f64> = nodes.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = nodes.iter().map(|p| p.y).collect();
        let d = [st.d1_at(&xs, end), st.d1_at(&ys, end)];
        let dir = tau.direction();
        let along = d[0] * dir[0] + d[1] * dir[1];
        if !(along > 0.0) {
            return Err(Error::Degenerate(format!("end tangent at node {end} opposes the clamped direction")));
        }
        let pos = st.idx[end].iter().position(|&j| j == next).expect("end stencil contains its neighbour");
        let w = st.w1[end][pos];
        nodes[next].x += (along * dir[0] - d[0]) / w;
        nodes[next].y += (along * dir[1] - d[1]) / w;
    }
    curve.with_nodes(nodes)
}

/// Angle between the difference tangent at each end and the clamped direction.
pub fn boundary_tangent_defect(curve: &DiscreteCurve) -> Result<f64> {
    let n = curve.len();
    let st = curve.stencils(FdOrder::default())?;
    let (xs, ys) = (curve.xs(), curve.ys());
    let (ta, tb) = curve.boundary_tangents();
    let mut worst: f64 = 0.0;
    for (end, tau) in [(0usize, ta), (n - 1, tb)] {
        let d = [st.d1_at(&xs, end), st.d1_at(&ys, end)];
        let dir = tau.direction();
        let cross = d[0] * dir[1] - d[1] * dir[0];
        let dot = d[0] * dir[0] + d[1] * dir[1];
        worst = worst.max(cross.atan2(dot).abs());
    }
    Ok(worst)
}

/// Resamples the curve at `n` nodes equally spaced in hyperbolic arc length
/// over the same parameter interval. End points are kept; the curve between
/// nodes is the clamped cubic spline through the nodes.
pub fn reparametrize_to(curve: &DiscreteCurve, n: usize) -> Result<DiscreteCurve> {
    if curve.is_closed() {
        return Err(Error::Parameter("constant-speed resampling is implemented for open curves".into()));
    }
    if n < 6 {
        return Err(Error::Parameter(format!("resampling needs at least 6 nodes, got {n}")));
    }
    let m = curve.len();
    let t = curve.params();
    let (xs, ys) = (curve.xs(), curve.ys());
    let st = curve.stencils(FdOrder::default())?;
    let sx = CubicSpline::clamped(t, &xs, st.d1_at(&xs, 0), st.d1_at(&xs, m - 1))?;
    let sy = CubicSpline::clamped(t, &ys, st.d1_at(&ys, 0), st.d1_at(&ys, m - 1))?;
    let speed = |k: usize, u: f64| {
        let (_, dx) = sx.eval_in(k, u);
        let (y, dy) = sy.eval_in(k, u);
        dx.hypot(dy) / y
    };
    let seg_len = |k: usize, a: f64, b: f64| {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        h * quad::gl16().iter().map(|&(x, w)| w * speed(k, c + h * x)).sum::<f64>()
    };
    let mut cum = vec![0.0; m];
    for k in 0..m - 1 {
        cum[k + 1] = cum[k] + seg_len(k, t[k], t[k + 1]);
    }
    let total = cum[m - 1];
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Degenerate(format!("curve length {total} cannot be resampled")));
    }
    let (t0, t1) = (t[0], t[m - 1]);
    let params: Vec<f64> =
        (0..n).map(|j| if j + 1 == n { t1 } else { t0 + (t1 - t0) * j as f64 / (n - 1) as f64 }).collect();
    let mut nodes = Vec::with_capacity(n);
    nodes.push(curve.nodes()[0]);
    for j in 1..n - 1 {
        let target = total * j as f64 / (n - 1) as f64;
        let k = cum.partition_point(|&c| c <= target).saturating_sub(1).min(m - 2);
        let rem = target - cum[k];
        let (mut lo, mut hi) = (t[k], t[k + 1]);
        let mut u = lo + (hi - lo) * (rem / (cum[k + 1] - cum[k])).clamp(0.0, 1.0);
        for _ in 0..60 {
            let f = seg_len(k, t[k], u) - rem;
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let next = u - f / speed(k, u);
            let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if (next - u).abs() <= 1e-15 * (1.0 + u.abs()) {
                u = next;
                break;
            }
            u = next;
        }
        nodes.push(HPoint::new(sx.eval_in(k, u).0, sy.eval_in(k, u).0)?);
    }
    nodes.push(curve.nodes()[m - 1]);
    let (ta, tb) = curve.boundary_tangents();
    let out = DiscreteCurve::with_tangents(params, nodes, [ta.vx, ta.vy], [tb.vx, tb.vy])?;
    snap_boundary_tangents(&out)
}

/// Constant-speed resampling at the same number of nodes.
pub fn reparametrize_constant_speed(curve: &DiscreteCurve) -> Result<DiscreteCurve> {
    reparametrize_to(curve, curve.len())
}

/// Largest relative deviation of the nodal hyperbolic speed from its mean.
pub fn speed_spread(curve: &DiscreteCurve) -> Result<f64> {
    let g = CurveGeometry::compute(curve, FdOrder::default())?;
    let mean = g.speed.iter().sum::<f64>() / g.speed.len() as f64;
    Ok(g.speed.iter().map(|s| (s / mean - 1.0).abs()).fold(0.0, f64::max))
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    SingularLength,
    SingularHeight,
    BudgetExhausted,
    /// A step failed; the message says why.
    StepFailure { message: String },
}

/// Result of [`run`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutcome {
    pub verdict: Verdict,
    pub trajectory: Vec<FlowState>,
    pub final_state: FlowState,
    pub initial_length: f64,
    pub max_length: f64,
    pub min_length: f64,
    /// Largest energy increase over a single flow step (reparametrization
    /// events are excluded).
    pub max_energy_increase: f64,
    /// Number of rejected adaptive steps.
    pub rejected_steps: usize,
}

/// Prepares an initial datum: resampling to the configured resolution and
/// aligning the discrete end tangents with the clamped data.
pub fn prepare_initial(u0: &DiscreteCurve, config: &FlowConfig) -> Result<DiscreteCurve> {
    if u0.is_closed() {
        return Err(Error::Parameter("the clamped flow needs an open curve".into()));
    }
    let c = if config.resolution != 0 && config.resolution != u0.len() {
        reparametrize_to(u0, config.resolution)?
    } else {
        u0.clone()
    };
    if c.len() < 16 {
        return Err(Error::Stencil(format!("flow needs at least 16 nodes, got {}", c.len())));
    }
    snap_boundary_tangents(&c)
}

/// Runs the flow until convergence, a singularity flag, or the budget ends.
pub fn run(u0: &DiscreteCurve, config: &FlowConfig) -> Result<RunOutcome> {
    run_with(u0, config, |_| {})
}

/// Like [`run`], calling `observe` on every state (including the initial one).
pub fn run_with(
    u0: &DiscreteCurve,
    config: &FlowConfig,
    mut observe: impl FnMut(&FlowState),
) -> Result<RunOutcome> {
    config.validate()?;
    let curve = prepare_initial(u0, config)?;
    let report = report_for(&curve, &config.weight)?;
    let mut state = FlowState { t: 0.0, curve, report, step_count: 0 };
    observe(&state);
    let initial_length = report.hyp_length;
    let cap = config.length_cap.unwrap_or(10.0 * initial_length);
    if !(cap > initial_length) {
        return Err(Error::Parameter(format!("length cap {cap} does not exceed the initial length {initial_length}")));
    }
    let mut out = RunOutcome {
        verdict: Verdict::BudgetExhausted,
        trajectory: vec![state.clone()],
        final_state: state.clone(),
        initial_length,
        max_length: initial_length,
        min_length: initial_length,
        max_energy_increase: f64::NEG_INFINITY,
        rejected_steps: 0,
    };
    let mut dt_adapt: Option<f64> = None;
    let mut streak = 0usize;
    let verdict = loop {
        if state.step_count >= config.max_steps || state.t >= config.t_max {
            break Verdict::BudgetExhausted;
        }
        let base_dt = match rule_dt(&state.curve, config) {
            Ok(dt) => dt,
            Err(e) => break Verdict::StepFailure { message: e.to_string() },
        };
        let mut dt = if config.adaptive { dt_adapt.unwrap_or(base_dt) } else { base_dt };
        dt = dt.min(config.dt_max);
        if config.t_max.is_finite() {
            dt = dt.min(config.t_max - state.t).max(f64::MIN_POSITIVE);
        }
        let mut attempt = 0;
        let next = loop {
            let trial = step_curve(&state.curve, dt, &config.weight, config.scheme)
                .and_then(|c| report_for(&c, &config.weight).map(|r| (c, r)));
            match trial {
                Ok((c, r)) => {
                    let rise = r.elastic - state.report.elastic;
                    if config.adaptive && rise > config.energy_tol && attempt < 40 {
                        out.rejected_steps += 1;
                        dt *= 0.5;
                        attempt += 1;
                        streak = 0;
                        continue;
                    }
                    break Ok((c, r, dt));
                }
                Err(e) if config.adaptive && attempt < 40 => {
                    let _ = e;
                    out.rejected_steps += 1;
                    dt *= 0.5;
                    attempt += 1;
                    streak = 0;
                }
                Err(e) => break Err(e),
            }
        };
        let (curve, report, dt_used) = match next {
            Ok(v) => v,
            Err(e) => break Verdict::StepFailure { message: e.to_string() },
        };
        out.max_energy_increase = out.max_energy_increase.max(report.elastic - state.report.elastic);
        if config.adaptive {
            streak += 1;
            let mut nd = dt_used;
            if streak >= 10 {
                nd *= 1.25;
                streak = 0;
            }
            dt_adapt = Some(nd);
        }
        state = FlowState { t: state.t + dt_used, curve, report, step_count: state.step_count + 1 };
        if config.reparam_every > 0 && state.step_count % config.reparam_every == 0 {
            match reparametrize_constant_speed(&state.curve)
                .and_then(|c| report_for(&c, &config.weight).map(|r| (c, r)))
            {
                Ok((c, r)) => {
                    state.curve = c;
                    state.report = r;
                }
                Err(e) => break Verdict::StepFailure { message: format!("reparametrization: {e}") },
            }
        }
        observe(&state);
        let l = state.report.hyp_length;
        out.max_length = out.max_length.max(l);
        out.min_length = out.min_length.min(l);
        if state.step_count % config.record_every == 0 {
            out.trajectory.push(state.clone());
        }
        if state.report.grad_norm < config.grad_tol {
            break Verdict::Converged;
        }
        if l > cap {
            break Verdict::SingularLength;
        }
        if state.report.min_height < config.height_floor {
            break Verdict::SingularHeight;
        }
    };
    if out.trajectory.last().map(|s| s.step_count) != Some(state.step_count) {
        out.trajectory.push(state.clone());
    }
    out.final_state = state;
    out.verdict = verdict;
    Ok(out)
}

/// Writes the trajectory CSV
/// `t,elastic,willmore,length,min_height,grad_norm,total_abs_curvature`.
pub fn write_trajectory_csv<W: Write>(states: &[FlowState], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "elastic", "willmore", "length", "min_height", "grad_norm", "total_abs_curvature"])?;
    for s in states {
        let r = &s.report;
        w.write_record(
            [s.t, r.elastic, r.willmore, r.hyp_length, r.min_height, r.grad_norm, r.total_abs_curvature]
                .map(|v| v.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// JSON summary of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: FlowConfig,
    pub verdict: Verdict,
    pub steps: usize,
    pub t: f64,
    pub initial_length: f64,
    pub max_length: f64,
    pub max_energy_increase: f64,
    pub rejected_steps: usize,
    pub initial_report: EnergyReport,
    pub final_report: EnergyReport,
}

impl RunManifest {
    pub fn new(config: &FlowConfig, outcome: &RunOutcome) -> Self {
        RunManifest {
            config: config.clone(),
            verdict: outcome.verdict.clone(),
            steps: outcome.final_state.step_count,
            t: outcome.final_state.t,
            initial_length: outcome.initial_length,
            max_length: outcome.max_length,
            max_energy_increase: outcome.max_energy_increase,
            rejected_steps: outcome.rejected_steps,
            initial_report: outcome.trajectory[0].report,
            final_report: outcome.final_state.report,
        }
    }
}

/// `max |2κ_ss + κ³ − (λ+2)κ|` over the nodes whose nested stencils stay
/// centered: κ itself is one-sided on the first two nodes, and the second
/// difference of κ reaches two nodes further.
pub fn elastica_residual(curve: &DiscreteCurve, lambda: f64) -> Result<f64> {
    let st = curve.stencils(FdOrder::default())?;
    let g = CurveGeometry::with_stencils(curve, &st)?;
    let (_, kss) = curvature_derivatives(&g, &st, &curve.ys());
    let n = curve.len();
    let range = if curve.is_closed() { 0..n } else { 2 * CLAMPED..n - 2 * CLAMPED };
    Ok(range
        .map(|i| {
            let k = g.kappa[i];
            (2.0 * kss[i] + k * k * k - (lambda + 2.0) * k).abs()
        })
        .fold(0.0, f64::max))
}

/// Evaluation of the energy threshold `W(f_{u₀}) ≤ 4π − 2π[∂ₓu⁽²⁾/|∂ₓu|]`,
/// equivalently `E(u₀) ≤ 8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCheck {
    pub satisfied: bool,
    /// `8 − E(u₀)`.
    pub margin: f64,
    pub willmore: f64,
    /// Right-hand side `4π − 2π[∂ₓu⁽²⁾/|∂ₓu|]`.
    pub bound: f64,
}

pub fn willmore_threshold_check(u0: &DiscreteCurve) -> Result<ThresholdCheck> {
    let e = hyp2::elastic_energy(u0)?;
    let bt = hyp2::willmore_boundary_term(u0)?;
    let w = 0.5 * PI * (e - 4.0 * bt);
    Ok(ThresholdCheck { satisfied: e <= 8.0, margin: 8.0 - e, willmore: w, bound: 4.0 * PI - 2.0 * PI * bt })
}
