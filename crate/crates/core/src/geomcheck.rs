//! Embedding checks and a-priori bound monitors.
//!
//! Self-intersections are found on the polygon through the nodes with a
//! bounding-box sweep, then polished by Newton's method on the piecewise
//! cubic Hermite interpolant (node derivatives from the difference stencils).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hyp2::{self, DiscreteCurve, FdOrder};

/// Default near-touch tolerance (Euclidean distance).
pub const DEFAULT_TOL: f64 = 1e-7;

/// Segment pairs whose index distance is at most this are never compared.
pub const NEIGHBOUR_CELLS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossingKind {
    Transversal,
    NearTouch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Curve parameters of the two branches, `s < t`.
    pub s: f64,
    pub t: f64,
    pub point: [f64; 2],
    /// Euclidean distance `|u(s) − u(t)|` after polishing.
    pub gap: f64,
    pub kind: CrossingKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub pairs: Vec<(f64, f64)>,
    pub crossings: Vec<Crossing>,
    pub embedded: bool,
    pub min_height: f64,
    pub max_norm: f64,
}

/// Piecewise cubic Hermite interpolant of the nodes.
struct Hermite {
    t: Vec<f64>,
    p: Vec<[f64; 2]>,
    d: Vec<[f64; 2]>,
    period: Option<f64>,
}

impl Hermite {
    fn new(curve: &DiscreteCurve) -> Result<Self> {
        let st = curve.stencils(FdOrder::default())?;
        let (xs, ys) = (curve.xs(), curve.ys());
        let (dx, dy) = (st.d1(&xs), st.d1(&ys));
        let mut t = curve.params().to_vec();
        let mut p: Vec<[f64; 2]> = xs.iter().zip(&ys).map(|(&x, &y)| [x, y]).collect();
        let mut d: Vec<[f64; 2]> = dx.iter().zip(&dy).map(|(&x, &y)| [x, y]).collect();
        let period = if curve.is_closed() {
            let n = t.len();
            let h = (t[n - 1] - t[0]) / (n - 1) as f64;
            t.push(t[n - 1] + h);
            p.push(p[0]);
            d.push(d[0]);
            Some(t[n] - t[0])
        } else {
            None
        };
        Ok(Hermite { t, p, d, period })
    }

    fn segments(&self) -> usize {
        self.t.len() - 1
    }

    /// Position and derivative on segment `k` at local coordinate `a ∈ [0,1]`.
    fn eval(&self, k: usize, a: f64) -> ([f64; 2], [f64; 2]) {
        let h = self.t[k + 1] - self.t[k];
        let (h00, h10, h01, h11) =
            (2.0 * a.powi(3) - 3.0 * a * a + 1.0, a.powi(3) - 2.0 * a * a + a, -2.0 * a.powi(3) + 3.0 * a * a, a.powi(3) - a * a);
        let (g00, g10, g01, g11) = (6.0 * a * a - 6.0 * a, 3.0 * a * a - 4.0 * a + 1.0, -6.0 * a * a + 6.0 * a, 3.0 * a * a - 2.0 * a);
        let mut v = [0.0; 2];
        let mut dv = [0.0; 2];
        for c in 0..2 {
            let (p0, p1, m0, m1) = (self.p[k][c], self.p[k + 1][c], self.d[k][c] * h, self.d[k + 1][c] * h);
            v[c] = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1;
            dv[c] = (g00 * p0 + g10 * m0 + g01 * p1 + g11 * m1) / h;
        }
        (v, dv)
    }

    fn param(&self, k: usize, a: f64) -> f64 {
        let s = self.t[k] + a * (self.t[k + 1] - self.t[k]);
        match self.period {
            Some(per) if s >= self.t[0] + per => s - per,
            _ => s,
        }
    }
}

fn seg_point(p: [f64; 2], q: [f64; 2], a: f64) -> [f64; 2] {
    [p[0] + a * (q[0] - p[0]), p[1] + a * (q[1] - p[1])]
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// Closest parameter on segment `pq` to `x`.
fn project(p: [f64; 2], q: [f64; 2], x: [f64; 2]) -> f64 {
    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
    let l2 = dx * dx + dy * dy;
    if l2 == 0.0 {
        return 0.0;
    }
    (((x[0] - p[0]) * dx + (x[1] - p[1]) * dy) / l2).clamp(0.0, 1.0)
}

/// Segment–segment test: `Some((a, b, distance, transversal))` when the
/// segments cross or come within `tol`.
fn segment_pair(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2], tol: f64) -> Option<(f64, f64, f64, bool)> {
    let d1 = [q[0] - p[0], q[1] - p[1]];
    let d2 = [s[0] - r[0], s[1] - r[1]];
    let den = d1[0] * d2[1] - d1[1] * d2[0];
    let w = [r[0] - p[0], r[1] - p[1]];
    if den != 0.0 {
        let a = (w[0] * d2[1] - w[1] * d2[0]) / den;
        let b = (w[0] * d1[1] - w[1] * d1[0]) / den;
        if (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) {
            return Some((a, b, 0.0, true));
        }
    }
    // closest approach is attained at an end point of one of the segments
    let cands = [
        (0.0, project(r, s, p)),
        (1.0, project(r, s, q)),
        (project(p, q, r), 0.0),
        (project(p, q, s), 1.0),
    ];
    let (a, b) = cands
        .into_iter()
        .min_by(|x, y| {
            let dx = dist(seg_point(p, q, x.0), seg_point(r, s, x.1));
            let dy = dist(seg_point(p, q, y.0), seg_point(r, s, y.1));
            dx.total_cmp(&dy)
        })
        .expect("four candidates");
    let d = dist(seg_point(p, q, a), seg_point(r, s, b));
    (d <= tol).then_some((a, b, d, false))
}

/// Newton polishing of a crossing on the Hermite interpolant. Works on the
/// concatenated local coordinates so the iterate may move into a neighbouring
/// segment.
fn polish(h: &Hermite, mut k1: usize, mut a: f64, mut k2: usize, mut b: f64) -> (usize, f64, usize, f64, f64) {
    let m = h.segments();
    let step_into = |k: &mut usize, x: &mut f64| {
        while *x < 0.0 && *k > 0 {
            *k -= 1;
            *x += 1.0;
        }
        while *x > 1.0 && *k + 1 < m {
            *k += 1;
            *x -= 1.0;
        }
        *x = x.clamp(0.0, 1.0);
    };
    let gap_at = |k1: usize, a: f64, k2: usize, b: f64| dist(h.eval(k1, a).0, h.eval(k2, b).0);
    let mut gap = gap_at(k1, a, k2, b);
    for _ in 0..30 {
        let (p1, v1) = h.eval(k1, a);
        let (p2, v2) = h.eval(k2, b);
        let l1 = h.t[k1 + 1] - h.t[k1];
        let l2 = h.t[k2 + 1] - h.t[k2];
        // F(a, b) = γ(a) − γ(b); columns scaled to local coordinates
        let j = [[v1[0] * l1, -v2[0] * l2], [v1[1] * l1, -v2[1] * l2]];
        let f = [p1[0] - p2[0], p1[1] - p2[1]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let da = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let db = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let (mut na, mut nb, mut nk1, mut nk2) = (a - da, b - db, k1, k2);
        step_into(&mut nk1, &mut na);
        step_into(&mut nk2, &mut nb);
        let ng = gap_at(nk1, na, nk2, nb);
        if !(ng < gap) {
            break;
        }
        (k1, a, k2, b, gap) = (nk1, na, nk2, nb, ng);
        if gap < 1e-15 {
            break;
        }
    }
    (k1, a, k2, b, gap)
}

/// Finds transversal crossings and near-touches (within `tol`) between
/// non-neighbouring pieces of the curve.
pub fn self_intersections(curve: &DiscreteCurve, tol: f64) -> Result<IntersectionReport> {
    let herm = Hermite::new(curve)?;
    let m = herm.segments();
    let closed = herm.period.is_some();
    let pts = &herm.p;
    let boxes: Vec<[f64; 4]> = (0..m)
        .map(|k| {
            let (p, q) = (pts[k], pts[k + 1]);
            [p[0].min(q[0]) - tol, p[0].max(q[0]) + tol, p[1].min(q[1]) - tol, p[1].max(q[1]) + tol]
        })
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| boxes[i][0].total_cmp(&boxes[j][0]).then(i.cmp(&j)));
    let far = |i: usize, j: usize| {
        let d = i.abs_diff(j);
        let d = if closed { d.min(m - d) } else { d };
        d > NEIGHBOUR_CELLS
    };
    let mut raw: Vec<(usize, f64, usize, f64, f64, bool)> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let xmin = boxes[i][0];
        active.retain(|&j| boxes[j][1] >= xmin);
        for &j in &active {
            let (bi, bj) = (&boxes[i], &boxes[j]);
            if bi[2] > bj[3] || bj[2] > bi[3] || !far(i, j) {
                continue;
            }
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            if let Some((a, b, d, tr)) = segment_pair(pts[lo], pts[lo + 1], pts[hi], pts[hi + 1], tol) {
                raw.push((lo, a, hi, b, d, tr));
            }
        }
        active.push(i);
    }
    raw.sort_by(|x, y| (x.0, x.2).cmp(&(y.0, y.2)).then(x.1.total_cmp(&y.1)));
    let mut crossings: Vec<Crossing> = Vec::new();
    let mut seen: Vec<(f64, f64)> = Vec::new();
    let span = herm.t[m] - herm.t[0];
    let cell = span / m as f64;
    for (k1, a, k2, b, d, transversal) in raw {
        let (k1, a, k2, b, gap) = polish(&herm, k1, a, k2, b);
        let (s, t) = (herm.param(k1, a), herm.param(k2, b));
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        // a crossing at a shared node is found from several segment pairs
        if seen.iter().any(|&(s0, t0)| (s - s0).abs() < 1.5 * cell && (t - t0).abs() < 1.5 * cell) {
            continue;
        }
        if closed {
            let sep = (t - s).min(span - (t - s));
            if sep <= NEIGHBOUR_CELLS as f64 * cell {
                continue;
            }
        } else if t - s <= NEIGHBOUR_CELLS as f64 * cell {
            continue;
        }
        seen.push((s, t));
        let p = herm.eval(k1, a).0;
        let kind = if transversal || gap < d.min(tol) * 0.5 { CrossingKind::Transversal } else { CrossingKind::NearTouch };
        crossings.push(Crossing { s, t, point: p, gap: gap.min(d), kind });
    }
    crossings.sort_by(|x, y| x.s.total_cmp(&y.s).then(x.t.total_cmp(&y.t)));
    Ok(IntersectionReport {
        pairs: crossings.iter().map(|c| (c.s, c.t)).collect(),
        embedded: crossings.is_empty(),
        crossings,
        min_height: curve.min_height(),
        max_norm: curve.max_norm(),
    })
}

/// Outcome of the energy criterion "E ≤ 8 ⇒ embedded".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiYauStatus {
    /// `E < 8 − band` and embedded.
    Holds,
    /// `E > 8 + band`: the criterion says nothing.
    HypothesisFails,
    /// `|E − 8| ≤ band`: discrete energy error can cross the boundary.
    Threshold,
    /// `E < 8 − band` yet not embedded.
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiYauVerdict {
    pub energy: f64,
    pub embedded: bool,
    pub crossings: usize,
    pub status: LiYauStatus,
}

/// Width of the band around 8 reported as [`LiYauStatus::Threshold`].
pub const THRESHOLD_BAND: f64 = 1e-3;

pub fn liyau_check(curve: &DiscreteCurve) -> Result<LiYauVerdict> {
    let energy = hyp2::elastic_energy(curve)?;
    let rep = self_intersections(curve, DEFAULT_TOL)?;
    let status = if (energy - 8.0).abs() <= THRESHOLD_BAND {
        LiYauStatus::Threshold
    } else if energy > 8.0 {
        LiYauStatus::HypothesisFails
    } else if rep.embedded {
        LiYauStatus::Holds
    } else {
        LiYauStatus::Counterexample
    };
    Ok(LiYauVerdict { energy, embedded: rep.embedded, crossings: rep.crossings.len(), status })
}

/// A family member that does not satisfy a monitor's hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisNote {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Infimum of heights (height monitor) or supremum of norms (norm monitor).
    pub value: f64,
    /// Curves violating the hypotheses; they are still included in `value`.
    pub violations: Vec<HypothesisNote>,
}

/// Infimum of the minimal heights over a family with end heights `≥ alpha`
/// and energy below 8.
pub fn height_bound_monitor(curves: &[DiscreteCurve], alpha: f64) -> Result<BoundReport> {
    let mut value = f64::INFINITY;
    let mut violations = Vec::new();
    for (index, c) in curves.iter().enumerate() {
        value = value.min(c.min_height());
        let nodes = c.nodes();
        let ends = nodes[0].y.min(nodes[nodes.len() - 1].y);
        if ends < alpha {
            violations.push(HypothesisNote { index, reason: format!("end height {ends} below {alpha}") });
        }
        let e = hyp2::elastic_energy(c)?;
        if !(e < 8.0) {
            violations.push(HypothesisNote { index, reason: format!("energy {e} not below 8") });
        }
    }
    Ok(BoundReport { value, violations })
}

/// Supremum of Euclidean norms over a family with common end points and
/// energy below 8.
pub fn norm_bound_monitor(curves: &[DiscreteCurve]) -> Result<BoundReport> {
    let mut value: f64 = 0.0;
    let mut violations = Vec::new();
    let ends = |c: &DiscreteCurve| (c.nodes()[0], c.nodes()[c.len() - 1]);
    let first = curves.first().map(ends);
    for (index, c) in curves.iter().enumerate() {
        value = value.max(c.max_norm());
        if let Some((a, b)) = first {
            let (p, q) = ends(c);
            if p.dist(a) > 1e-12 || q.dist(b) > 1e-12 {
                violations.push(HypothesisNote { index, reason: "end points differ from the first curve".into() });
            }
        }
        let e = hyp2::elastic_energy(c)?;
        if !(e < 8.0) {
            violations.push(HypothesisNote { index, reason: format!("energy {e} not below 8") });
        }
    }
    Ok(BoundReport { value, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyp2::HPoint;

    #[test]
    fn segment_pair_cases() {
        let r = segment_pair([0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0], 1e-9).unwrap();
        assert!((r.0 - 0.5).abs() < 1e-15 && (r.1 - 0.5).abs() < 1e-15 && r.3);
        assert!(segment_pair([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], 1e-9).is_none());
        let near = segment_pair([0.0, 0.0], [1.0, 0.0], [0.5, 1e-8], [0.5, 1.0], 1e-7).unwrap();
        assert!(!near.3 && (near.2 - 1e-8).abs() < 1e-20);
    }

    #[test]
    fn loop_curve_has_one_crossing() {
        // limaçon-like loop: (sin 2t, 2 + cos t)·scale crosses itself once
        let n = 401;
        let t: Vec<f64> = (0..n).map(|i| -2.5 + 5.0 * i as f64 / (n - 1) as f64).collect();
        let nodes: Vec<HPoint> = t.iter().map(|&s| HPoint::new((2.0 * s).sin() * 0.5, 2.0 + s.cos()).unwrap()).collect();
        let c = DiscreteCurve::new(t, nodes).unwrap();
        let rep = self_intersections(&c, DEFAULT_TOL).unwrap();
        assert_eq!(rep.crossings.len(), 1, "{rep:?}");
        let x = rep.crossings[0];
        // sin 2s = sin 2t with cos s = cos t ⇒ t = −s, sin 2s = 0 ⇒ s = −π/2
        assert!((x.s + std::f64::consts::FRAC_PI_2).abs() < 1e-6 && (x.t - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
        assert!(x.gap < 1e-10);
    }
}
