//! Weighted incidence labelings and the certificates they carry.
//!
//! A labeling assigns `B(v,e) > 0` to every incidence of a vertex in an arc,
//! optionally a weight `w(e) > 0` per arc, and a target `α`. Depending on
//! how row sums and per-arc products compare with `1` and `α`, the labeling
//! is normal, subnormal or supernormal, which pins `λ_{p,q}(G)` against
//! `c = 1/(r^{r/p} s^{s/q} α)`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{anadiplosis_components, DegreeSummary, DirectedHypergraph};
use crate::polyform::{monomial, Eigenpair, Phase, SpectralParams};

/// `B(v,e)` per incidence plus optional arc weights.
///
/// `tail[e][k]` is the label of `arcs()[e].tail()[k]` in arc `e`, and
/// likewise for `head`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedIncidenceLabeling {
    pub mode: Phase,
    pub alpha: f64,
    pub tail: Vec<Vec<f64>>,
    pub head: Vec<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
}

/// Which side of an arc a vertex sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Tail,
    Head,
}

impl WeightedIncidenceLabeling {
    /// Builds a labeling by evaluating `f(vertex, arc, side)` on every incidence.
    pub fn from_fn(
        g: &DirectedHypergraph,
        mode: Phase,
        alpha: f64,
        weights: Option<Vec<f64>>,
        mut f: impl FnMut(usize, usize, Side) -> f64,
    ) -> Self {
        let tail = (0..g.arc_count())
            .map(|e| g.arc(e).tail().iter().map(|&v| f(v, e, Side::Tail)).collect())
            .collect();
        let head = (0..g.arc_count())
            .map(|e| g.arc(e).head().iter().map(|&v| f(v, e, Side::Head)).collect())
            .collect();
        Self {
            mode,
            alpha,
            tail,
            head,
            weights,
        }
    }

    /// `B(v,e)`, or 0 when `v` is not in `e`.
    pub fn value(&self, g: &DirectedHypergraph, v: usize, e: usize) -> f64 {
        let arc = g.arc(e);
        if let Some(k) = arc.tail().iter().position(|&u| u == v) {
            return self.tail[e][k];
        }
        if let Some(k) = arc.head().iter().position(|&u| u == v) {
            return self.head[e][k];
        }
        0.0
    }

    pub fn validate(&self, g: &DirectedHypergraph) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidLabeling(msg));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.tail.len() != g.arc_count() || self.head.len() != g.arc_count() {
            return bad(format!(
                "expected columns for {} arcs, got {}",
                g.arc_count(),
                self.tail.len().min(self.head.len())
            ));
        }
        for e in 0..g.arc_count() {
            if self.tail[e].len() != g.r() || self.head[e].len() != g.s() {
                return bad(format!("arc {e}: wrong number of incidence values"));
            }
            let all = self.tail[e].iter().chain(&self.head[e]);
            if let Some(v) = all.into_iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return bad(format!("arc {e}: incidence value {v} is not positive"));
            }
        }
        if let Some(w) = &self.weights {
            if w.len() != g.arc_count() {
                return bad(format!("expected {} weights, got {}", g.arc_count(), w.len()));
            }
            if let Some(v) = w.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return bad(format!("weight {v} is not positive"));
            }
        }
        Ok(())
    }

    /// `Π_{T(e)} B^{1/p} Π_{H(e)} B^{1/q}`, without the weight factor.
    fn arc_product(&self, e: usize, params: &SpectralParams) -> f64 {
        let t: f64 = self.tail[e].iter().map(|b| b.powf(1.0 / params.p)).product();
        let h: f64 = self.head[e].iter().map(|b| b.powf(1.0 / params.q)).product();
        t * h
    }

    /// Row sums over `T(G)` and `H(G)`, indexed by coordinate.
    fn row_sums(&self, g: &DirectedHypergraph) -> (Vec<f64>, Vec<f64>) {
        let mut rt = vec![0.0; g.tail_dim()];
        let mut rh = vec![0.0; g.head_dim()];
        for e in 0..g.arc_count() {
            for (k, &i) in g.tail_coords(e).iter().enumerate() {
                rt[i] += self.tail[e][k];
            }
            for (k, &j) in g.head_coords(e).iter().enumerate() {
                rh[j] += self.head[e][k];
            }
        }
        (rt, rh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Normal,
    Subnormal,
    Supernormal,
    None,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Normal => "normal",
            Verdict::Subnormal => "subnormal",
            Verdict::Supernormal => "supernormal",
            Verdict::None => "none",
        })
    }
}

/// What a labeling says about `λ_{p,q}(G)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum ImpliedBound {
    Upper(f64),
    Lower(f64),
    #[serde(rename = "equality")]
    Exact(f64),
    None,
}

impl std::fmt::Display for ImpliedBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ImpliedBound::Upper(c) => write!(f, "upper {c:.8}"),
            ImpliedBound::Lower(c) => write!(f, "lower {c:.8}"),
            ImpliedBound::Exact(c) => write!(f, "equality {c:.8}"),
            ImpliedBound::None => f.write_str("none"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub verdict: Verdict,
    pub strict: bool,
    pub consistent: bool,
    pub alpha: f64,
    pub implied_bound: ImpliedBound,
    /// Largest `|row sum − 1|`.
    pub max_row_violation: f64,
    /// Largest `|product − α| / α` over arcs.
    pub max_arc_violation: f64,
    /// `|Σ w − 1|` when weights are in play.
    pub weight_violation: Option<f64>,
}

struct Deviations {
    rows: Vec<f64>,
    weight: Option<f64>,
    arcs: Vec<f64>,
}

impl Deviations {
    fn classify(&self, tol: f64) -> (Verdict, bool) {
        let rows = self.rows.iter().copied();
        let w = self.weight.into_iter();
        // sub: rows ≤ 1, Σw ≤ 1, products ≥ α
        let sub_gaps: Vec<f64> = rows
            .clone()
            .chain(w.clone())
            .chain(self.arcs.iter().map(|d| -d))
            .collect();
        let worst_abs = sub_gaps.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
        if worst_abs <= tol {
            return (Verdict::Normal, false);
        }
        let strict = worst_abs > tol;
        if sub_gaps.iter().all(|&d| d <= tol) {
            (Verdict::Subnormal, strict)
        } else if sub_gaps.iter().all(|&d| d >= -tol) {
            (Verdict::Supernormal, strict)
        } else {
            (Verdict::None, false)
        }
    }
}

fn deviations(
    g: &DirectedHypergraph,
    l: &WeightedIncidenceLabeling,
    params: &SpectralParams,
    use_weights: bool,
) -> Deviations {
    let (rt, rh) = l.row_sums(g);
    let rows = rt.iter().chain(&rh).map(|s| s - 1.0).collect();
    let weights = l.weights.as_ref().filter(|_| use_weights);
    let arcs = (0..g.arc_count())
        .map(|e| {
            let mut prod = l.arc_product(e, params);
            if let Some(w) = weights {
                prod *= w[e].powf(params.gamma);
            }
            (prod - l.alpha) / l.alpha
        })
        .collect();
    Deviations {
        rows,
        weight: weights.map(|w| w.iter().sum::<f64>() - 1.0),
        arcs,
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, d| a.max(d.abs()))
}

fn check_mode(l: &WeightedIncidenceLabeling, params: &SpectralParams) -> Result<()> {
    if l.mode != params.phase {
        return Err(Error::ModeMismatch {
            label: l.mode,
            params: params.phase,
        });
    }
    if l.mode == Phase::Elliptic && l.weights.is_none() {
        return Err(Error::MissingWeights(l.mode));
    }
    Ok(())
}

/// Classifies `l` against `(p, q)` and derives the implied bound.
///
/// In the hyperbolic mode normal and supernormal are read with the weighted
/// (elliptic) conditions, while subnormal uses the unweighted (parabolic)
/// ones; without weights only the subnormal test is available.
pub fn certify(
    g: &DirectedHypergraph,
    l: &WeightedIncidenceLabeling,
    params: &SpectralParams,
    tol: f64,
) -> Result<CertificateReport> {
    check_mode(l, params)?;
    l.validate(g)?;
    let c = 1.0 / (params.arity_factor() * l.alpha);

    let (verdict, strict, dev) = match l.mode {
        Phase::Parabolic => {
            let dev = deviations(g, l, params, false);
            let (v, s) = dev.classify(tol);
            (v, s, dev)
        }
        Phase::Elliptic => {
            let dev = deviations(g, l, params, true);
            let (v, s) = dev.classify(tol);
            (v, s, dev)
        }
        Phase::Hyperbolic => {
            let plain = deviations(g, l, params, false);
            let (pv, ps) = plain.classify(tol);
            let weighted = l.weights.is_some().then(|| {
                let dev = deviations(g, l, params, true);
                let cls = dev.classify(tol);
                (dev, cls)
            });
            match weighted {
                Some((dev, (Verdict::Normal, _))) => (Verdict::Normal, false, dev),
                _ if pv == Verdict::Normal => (Verdict::Subnormal, false, plain),
                _ if pv == Verdict::Subnormal => (Verdict::Subnormal, ps, plain),
                Some((dev, (Verdict::Supernormal, s))) => (Verdict::Supernormal, s, dev),
                Some((dev, _)) => (Verdict::None, false, dev),
                None => (Verdict::None, false, plain),
            }
        }
    };

    let consistent = match (l.mode, &l.weights) {
        (Phase::Hyperbolic, None) => false,
        _ => check_consistency(g, l, tol)?,
    };

    let implied_bound = match (l.mode, verdict, consistent) {
        (Phase::Hyperbolic, Verdict::Normal, true) => ImpliedBound::Lower(c),
        (Phase::Hyperbolic, Verdict::Normal, false) => ImpliedBound::None,
        (_, Verdict::Normal, true) => ImpliedBound::Exact(c),
        (_, Verdict::Normal, false) => ImpliedBound::Upper(c),
        (_, Verdict::Subnormal, _) => ImpliedBound::Upper(c),
        (_, Verdict::Supernormal, true) => ImpliedBound::Lower(c),
        _ => ImpliedBound::None,
    };

    Ok(CertificateReport {
        verdict,
        strict,
        consistent,
        alpha: l.alpha,
        implied_bound,
        max_row_violation: max_abs(&dev.rows),
        max_arc_violation: max_abs(&dev.arcs),
        weight_violation: dev.weight.map(f64::abs),
    })
}

/// Parabolic: every anadiplosis cycle has unit product, tested on the
/// fundamental cycles of a spanning forest of the incidence graph between
/// split vertices and arcs. Elliptic and hyperbolic: `w(e)/B(v,e)` is the
/// same for all arcs at each split vertex.
pub fn check_consistency(
    g: &DirectedHypergraph,
    l: &WeightedIncidenceLabeling,
    tol: f64,
) -> Result<bool> {
    l.validate(g)?;
    match l.mode {
        Phase::Parabolic => Ok(potentials(g, l, None).1 <= tol),
        Phase::Elliptic | Phase::Hyperbolic => {
            let w = l.weights.as_ref().ok_or(Error::MissingWeights(l.mode))?;
            let mut first_t: Vec<Option<f64>> = vec![None; g.tail_dim()];
            let mut first_h: Vec<Option<f64>> = vec![None; g.head_dim()];
            let mut worst = 0.0_f64;
            let mut visit = |slot: &mut Option<f64>, ratio: f64| match *slot {
                None => *slot = Some(ratio),
                Some(r0) => worst = worst.max((ratio - r0).abs() / r0),
            };
            for e in 0..g.arc_count() {
                for (k, &i) in g.tail_coords(e).iter().enumerate() {
                    visit(&mut first_t[i], w[e] / l.tail[e][k]);
                }
                for (k, &j) in g.head_coords(e).iter().enumerate() {
                    visit(&mut first_h[j], w[e] / l.head[e][k]);
                }
            }
            Ok(worst <= tol)
        }
    }
}

/// Log-potentials `φ` on split vertices with `log B(v,e) + φ(v)` constant
/// along each arc, grown by BFS from `root` (a split vertex, `i < m` tail
/// coordinate, `m + j` head coordinate) or from every unvisited vertex in
/// turn. Returns the potentials and the largest mismatch on non-tree
/// incidences.
fn potentials(
    g: &DirectedHypergraph,
    l: &WeightedIncidenceLabeling,
    root: Option<usize>,
) -> (Vec<Option<f64>>, f64) {
    let m = g.tail_dim();
    let nv = m + g.head_dim();
    // incidence lists: split vertex -> (arc, log B)
    let mut inc: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
    let mut arc_inc: Vec<Vec<(usize, f64)>> = vec![Vec::new(); g.arc_count()];
    for e in 0..g.arc_count() {
        for (k, &i) in g.tail_coords(e).iter().enumerate() {
            let lb = l.tail[e][k].ln();
            inc[i].push((e, lb));
            arc_inc[e].push((i, lb));
        }
        for (k, &j) in g.head_coords(e).iter().enumerate() {
            let lb = l.head[e][k].ln();
            inc[m + j].push((e, lb));
            arc_inc[e].push((m + j, lb));
        }
    }
    let mut phi: Vec<Option<f64>> = vec![None; nv];
    let mut zeta: Vec<Option<f64>> = vec![None; g.arc_count()];
    let roots: Vec<usize> = match root {
        Some(r0) => vec![r0],
        None => (0..nv).collect(),
    };
    for r0 in roots {
        if phi[r0].is_some() {
            continue;
        }
        phi[r0] = Some(0.0);
        let mut queue = VecDeque::from([r0]);
        while let Some(v) = queue.pop_front() {
            let pv = phi[v].unwrap();
            for &(e, lb) in &inc[v] {
                if zeta[e].is_some() {
                    continue;
                }
                let z = lb + pv;
                zeta[e] = Some(z);
                for &(w, lw) in &arc_inc[e] {
                    if phi[w].is_none() {
                        phi[w] = Some(z - lw);
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    let mut worst = 0.0_f64;
    for e in 0..g.arc_count() {
        let Some(z) = zeta[e] else { continue };
        for &(v, lb) in &arc_inc[e] {
            if let Some(pv) = phi[v] {
                worst = worst.max((lb + pv - z).abs());
            }
        }
    }
    (phi, worst)
}

/// The labeling an eigenpair induces: `B(v,e) = Z(e)/(rλx_v^p)` on tails,
/// `Z(e)/(sλy_v^q)` on heads, `w(e) = Z(e)/λ` outside the parabolic phase,
/// and `α = 1/(r^{r/p}s^{s/q}λ)`.
pub fn from_eigenpair(
    g: &DirectedHypergraph,
    pair: &Eigenpair,
    params: &SpectralParams,
) -> Result<WeightedIncidenceLabeling> {
    if let Some(i) = pair.x.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::ZeroCoordinate { side: "x", index: i });
    }
    if let Some(j) = pair.y.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::ZeroCoordinate { side: "y", index: j });
    }
    let lam = pair.lambda;
    let (r, s) = (params.r as f64, params.s as f64);
    let z: Vec<f64> = (0..g.arc_count())
        .map(|e| monomial(g, e, &pair.x, &pair.y))
        .collect();
    let tail = (0..g.arc_count())
        .map(|e| {
            g.tail_coords(e)
                .iter()
                .map(|&i| z[e] / (r * lam * pair.x[i].powf(params.p)))
                .collect()
        })
        .collect();
    let head = (0..g.arc_count())
        .map(|e| {
            g.head_coords(e)
                .iter()
                .map(|&j| z[e] / (s * lam * pair.y[j].powf(params.q)))
                .collect()
        })
        .collect();
    let weights =
        (params.phase != Phase::Parabolic).then(|| z.iter().map(|ze| ze / lam).collect());
    Ok(WeightedIncidenceLabeling {
        mode: params.phase,
        alpha: 1.0 / (params.arity_factor() * lam),
        tail,
        head,
        weights,
    })
}

/// Recovers the eigenpair a consistent normal labeling certifies.
pub fn to_eigenpair(
    g: &DirectedHypergraph,
    l: &WeightedIncidenceLabeling,
    params: &SpectralParams,
    tol: f64,
) -> Result<Eigenpair> {
    to_eigenpair_rooted(g, l, params, tol, 0)
}

/// As [`to_eigenpair`], propagating parabolic potentials from tail
/// coordinate `root` instead of the first one.
pub fn to_eigenpair_rooted(
    g: &DirectedHypergraph,
    l: &WeightedIncidenceLabeling,
    params: &SpectralParams,
    tol: f64,
    root: usize,
) -> Result<Eigenpair> {
    if l.mode == Phase::Hyperbolic && l.weights.is_none() {
        return Err(Error::MissingWeights(l.mode));
    }
    let report = certify(g, l, params, tol)?;
    if !report.consistent {
        return Err(Error::NotConsistent);
    }
    if report.verdict != Verdict::Normal {
        return Err(Error::NotNormal);
    }
    let (r, s) = (params.r as f64, params.s as f64);
    let (x, y) = match l.mode {
        Phase::Parabolic => {
            if !anadiplosis_components(g).connected {
                return Err(Error::Disconnected);
            }
            if root >= g.tail_dim() {
                return Err(Error::IndexMismatch {
                    expected: g.tail_dim(),
                    got: root,
                });
            }
            let m = g.tail_dim();
            // W(v) = exp(φ(v)) satisfies B(v,e) W(v) = const along each arc
            let (phi, _) = potentials(g, l, Some(root));
            let w: Vec<f64> = phi.iter().map(|p| p.expect("connected").exp()).collect();
            let x = (0..m).map(|i| (w[i] / r).powf(1.0 / params.p)).collect();
            let y = (0..g.head_dim())
                .map(|j| (w[m + j] / s).powf(1.0 / params.q))
                .collect();
            (x, y)
        }
        Phase::Elliptic | Phase::Hyperbolic => {
            let w = l.weights.as_ref().expect("checked");
            let mut x = vec![0.0; g.tail_dim()];
            let mut y = vec![0.0; g.head_dim()];
            for e in (0..g.arc_count()).rev() {
                for (k, &i) in g.tail_coords(e).iter().enumerate() {
                    x[i] = (w[e] / (r * l.tail[e][k])).powf(1.0 / params.p);
                }
                for (k, &j) in g.head_coords(e).iter().enumerate() {
                    y[j] = (w[e] / (s * l.head[e][k])).powf(1.0 / params.q);
                }
            }
            (x, y)
        }
    };
    Eigenpair::from_vectors(g, params, x, y)
}

/// Range every weight of an elliptic consistent normal labeling must lie in:
/// `[α (δ⁺)^{r/p} (δ⁻)^{s/q}]^{1/γ} ≤ w(e) ≤ [α (Δ⁺)^{r/p} (Δ⁻)^{s/q}]^{1/γ}`.
pub fn weight_interval(
    degrees: &DegreeSummary,
    alpha: f64,
    params: &SpectralParams,
) -> Result<(f64, f64)> {
    if params.phase != Phase::Elliptic {
        return Err(Error::Phase {
            expected: "elliptic",
            got: params.phase,
        });
    }
    let (a, b) = (params.r as f64 / params.p, params.s as f64 / params.q);
    let f = |dp: usize, dm: usize| {
        (alpha * (dp as f64).powf(a) * (dm as f64).powf(b)).powf(1.0 / params.gamma)
    };
    Ok((
        f(degrees.min_out, degrees.min_in),
        f(degrees.max_out, degrees.max_in),
    ))
}
