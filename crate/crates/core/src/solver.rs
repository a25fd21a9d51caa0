//! Computing `λ_{p,q}(G)` together with a maximizing pair.
//!
//! For `e ≤ 1` every anadiplosis component is solved by a Gauss–Seidel
//! fixed-point iteration on the strong eigenequations and the component
//! values are aggregated. For `e > 1` each component is handled by
//! enumerating induced sub-dirhypergraphs of the bipartite split and running
//! multi-start projected gradient ascent on each.

use std::collections::HashSet;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::bounds_report;
use crate::error::{Error, Result};
use crate::hypergraph::{anadiplosis_components, DirectedHypergraph};
use crate::polyform::{
    evaluate, lp_norm, normalize, partial_sums, uniform, Eigenpair, Phase, SpectralParams,
};

const STREAK: usize = 5;
const OSCILLATION_LIMIT: usize = 100;
const DAMPING: f64 = 0.5;
/// Subset runs in [`hyperbolic_exact`] drifting below this coordinate are
/// abandoned: their face is another induced arc set.
const BOUNDARY_FLOOR: f64 = 1e-7;
const STALL_LIMIT: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Restarts for gradient search; start 0 is always the uniform pair.
    pub starts: usize,
    pub seed: u64,
    /// Maximum number of split vertices for exhaustive subset enumeration.
    pub hyperbolic_cap: usize,
    /// Above 1, component solves and restarts run on the current rayon pool.
    pub threads: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 100_000,
            starts: 32,
            seed: 0,
            hyperbolic_cap: 16,
            threads: 1,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidOption(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidOption("max_iters must be at least 1".into()));
        }
        if self.starts == 0 {
            return Err(Error::InvalidOption("starts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FixedPoint,
    GradientAscent,
    SubsetEnumeration,
    ComponentAggregation,
    ClosedForm,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::FixedPoint => "fixed_point",
            Method::GradientAscent => "gradient_ascent",
            Method::SubsetEnumeration => "subset_enumeration",
            Method::ComponentAggregation => "component_aggregation",
            Method::ClosedForm => "closed_form",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub pair: Eigenpair,
    pub params: SpectralParams,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    /// Set when a hyperbolic solve fell back to plain gradient search; the
    /// value is then only a lower bound.
    pub heuristic: bool,
    pub component_values: Option<Vec<f64>>,
}

impl SolveResult {
    pub fn lambda(&self) -> f64 {
        self.pair.lambda
    }
}

/// `λ_{p,q}(G)` with an eigenpair.
pub fn solve(g: &DirectedHypergraph, p: f64, q: f64, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate()?;
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let params = SpectralParams::for_graph(g, p, q)?;
    let comps = anadiplosis_components(g);
    if comps.connected {
        return solve_component(g, &params, opts);
    }

    let subs: Vec<_> = comps.groups.iter().map(|arcs| g.restrict(arcs)).collect();
    let results: Vec<Result<SolveResult>> = if opts.threads > 1 {
        subs.par_iter()
            .map(|s| solve_component(&s.graph, &params, opts))
            .collect()
    } else {
        subs.iter()
            .map(|s| solve_component(&s.graph, &params, opts))
            .collect()
    };
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = results.iter().map(|r| r.pair.lambda).collect();

    let mut x = vec![0.0; g.tail_dim()];
    let mut y = vec![0.0; g.head_dim()];
    if params.phase == Phase::Elliptic {
        let gamma = params.gamma;
        let powered: Vec<f64> = values.iter().map(|v| v.powf(1.0 / gamma)).collect();
        let total: f64 = powered.iter().sum();
        for ((sub, res), w) in subs.iter().zip(&results).zip(&powered) {
            let a = w / total;
            let (cx, cy) = (a.powf(1.0 / params.p), a.powf(1.0 / params.q));
            for (k, &i) in sub.tail_map.iter().enumerate() {
                x[i] = cx * res.pair.x[k];
            }
            for (k, &j) in sub.head_map.iter().enumerate() {
                y[j] = cy * res.pair.y[k];
            }
        }
    } else {
        let best = argmax_first(&values);
        let (sub, res) = (&subs[best], &results[best]);
        for (k, &i) in sub.tail_map.iter().enumerate() {
            x[i] = res.pair.x[k];
        }
        for (k, &j) in sub.head_map.iter().enumerate() {
            y[j] = res.pair.y[k];
        }
    }
    let pair = Eigenpair::from_vectors(g, &params, x, y)?;
    debug!(
        "aggregated {} components: rule value {:.12}, pair value {:.12}",
        values.len(),
        aggregate_components(&values, &params)?,
        pair.lambda
    );
    Ok(SolveResult {
        pair,
        params,
        method: Method::ComponentAggregation,
        iterations: results.iter().map(|r| r.iterations).sum(),
        converged: results.iter().all(|r| r.converged),
        heuristic: results.iter().any(|r| r.heuristic),
        component_values: Some(values),
    })
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Combines per-component values: `max` for `e ≥ 1`, `(Σ λ_i^{1/γ})^γ` for `e < 1`.
pub fn aggregate_components(values: &[f64], params: &SpectralParams) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyList);
    }
    if params.phase == Phase::Elliptic {
        let g = params.gamma;
        Ok(values.iter().map(|v| v.powf(1.0 / g)).sum::<f64>().powf(g))
    } else {
        Ok(values.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Solves a graph without splitting it into components.
fn solve_component(
    g: &DirectedHypergraph,
    params: &SpectralParams,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    if let Some(res) = identical_arcs(g, params)? {
        return Ok(res);
    }
    match params.phase {
        Phase::Hyperbolic => hyperbolic_exact(g, params, opts),
        _ => solve_fixed_point(g, params, opts),
    }
}

/// `k` copies of one arc: `λ = k r^{-r/p} s^{-s/q}` at the uniform pair.
fn identical_arcs(g: &DirectedHypergraph, params: &SpectralParams) -> Result<Option<SolveResult>> {
    if g.tail_dim() != g.r() || g.head_dim() != g.s() {
        return Ok(None);
    }
    let pair = Eigenpair::from_vectors(
        g,
        params,
        uniform(g.r(), params.p),
        uniform(g.s(), params.q),
    )?;
    Ok(Some(SolveResult {
        pair,
        params: *params,
        method: Method::ClosedForm,
        iterations: 0,
        converged: true,
        heuristic: false,
        component_values: None,
    }))
}

/// One Gauss–Seidel sweep: `x' ∝ (∂P/∂x)^{1/(p−1)}` in ℓp, then
/// `y' ∝ (∂P/∂y (x', y))^{1/(q−1)}` in ℓq.
pub fn fixed_point_step(
    g: &DirectedHypergraph,
    x: &[f64],
    y: &[f64],
    params: &SpectralParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if params.p <= 1.0 || params.q <= 1.0 {
        return Err(Error::DegenerateExponent {
            p: params.p,
            q: params.q,
        });
    }
    let (gx, _) = partial_sums(g, x, y)?;
    let x_new = root_normalized(&gx, params.p);
    let (_, gy) = partial_sums(g, &x_new, y)?;
    let y_new = root_normalized(&gy, params.q);
    Ok((x_new, y_new))
}

fn root_normalized(grad: &[f64], p: f64) -> Vec<f64> {
    let m = grad.iter().fold(0.0_f64, |a, &b| a.max(b));
    if m <= 0.0 {
        return grad.to_vec();
    }
    let exp = 1.0 / (p - 1.0);
    let mut v: Vec<f64> = grad.iter().map(|&t| (t / m).max(0.0).powf(exp)).collect();
    normalize(&mut v, p);
    v
}

/// Fixed-point iteration on the whole graph from the uniform start, with no
/// component decomposition.
pub fn solve_fixed_point(
    g: &DirectedHypergraph,
    params: &SpectralParams,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    fixed_point_from(
        g,
        params,
        opts,
        uniform(g.tail_dim(), params.p),
        uniform(g.head_dim(), params.q),
    )
}

/// Fixed-point iteration from a caller-supplied positive start.
pub fn fixed_point_from(
    g: &DirectedHypergraph,
    params: &SpectralParams,
    opts: &SolveOptions,
    mut x: Vec<f64>,
    mut y: Vec<f64>,
) -> Result<SolveResult> {
    opts.validate()?;
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    normalize(&mut x, params.p);
    normalize(&mut y, params.q);
    let mut lambda = evaluate(g, &x, &y)?;
    let mut theta = 0.0;
    let mut streak = 0;
    let mut oscillations = 0;
    let mut last_delta = 0.0_f64;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iters {
        iterations += 1;
        let (mut xn, mut yn) = fixed_point_step(g, &x, &y, params)?;
        if theta > 0.0 {
            xn = blend(&x, &xn, theta, params.p);
            yn = blend(&y, &yn, theta, params.q);
        }
        let lam_new = evaluate(g, &xn, &yn)?;
        let delta = lam_new - lambda;
        let scale = opts.tol * lambda.max(1.0);
        if iterations > 1 && delta < -scale {
            debug!("fixed point: value decreased by {:.3e} at iteration {iterations}", -delta);
        }
        if delta.abs() > scale && last_delta.abs() > scale && delta.signum() != last_delta.signum()
        {
            oscillations += 1;
            if oscillations >= OSCILLATION_LIMIT && theta == 0.0 {
                debug!("fixed point: switching to damping {DAMPING} after {iterations} iterations");
                theta = DAMPING;
            }
        }
        x = xn;
        y = yn;
        lambda = lam_new;
        last_delta = delta;

        let pair = Eigenpair {
            x: x.clone(),
            y: y.clone(),
            lambda,
            residual: 0.0,
        };
        let res = crate::polyform::residual(g, &pair, params);
        if res <= opts.tol && delta.abs() <= scale && relative_residual(g, &pair, params) <= opts.tol
        {
            streak += 1;
            if streak >= STREAK {
                converged = true;
                break;
            }
        } else {
            streak = 0;
        }
    }

    let pair = Eigenpair::from_vectors(g, params, x, y)?;
    if !converged {
        debug!(
            "fixed point: no convergence after {iterations} iterations, residual {:.3e}",
            pair.residual
        );
    }
    Ok(SolveResult {
        pair,
        params: *params,
        method: Method::FixedPoint,
        iterations,
        converged,
        heuristic: false,
        component_values: None,
    })
}

/// `max |v_i ∂_i P / (kλ v_i^p) − 1|` over positive coordinates.
fn relative_residual(g: &DirectedHypergraph, pair: &Eigenpair, params: &SpectralParams) -> f64 {
    let Ok((gx, gy)) = partial_sums(g, &pair.x, &pair.y) else {
        return f64::INFINITY;
    };
    let side = |v: &[f64], grad: &[f64], k: f64, exp: f64| {
        v.iter()
            .zip(grad)
            .filter(|(&vi, _)| vi > 0.0)
            .map(|(&vi, &gi)| (gi / (k * pair.lambda * vi.powf(exp - 1.0)) - 1.0).abs())
            .fold(0.0, f64::max)
    };
    side(&pair.x, &gx, params.r as f64, params.p).max(side(&pair.y, &gy, params.s as f64, params.q))
}

fn blend(old: &[f64], new: &[f64], theta: f64, p: f64) -> Vec<f64> {
    let mut v: Vec<f64> = old
        .iter()
        .zip(new)
        .map(|(&a, &b)| a.powf(theta) * b.powf(1.0 - theta))
        .collect();
    normalize(&mut v, p);
    v
}

/// Best pair over `opts.starts` projected-gradient ascents on the product of
/// unit spheres. The value is a lower bound on `λ_{p,q}(G)` in every phase.
pub fn gradient_search(
    g: &DirectedHypergraph,
    params: &SpectralParams,
    opts: &SolveOptions,
) -> Result<Eigenpair> {
    gradient_search_counted(g, params, opts, 0.0).map(|(pair, _)| pair)
}

/// Runs stop early once a coordinate falls below `floor`.
fn gradient_search_counted(
    g: &DirectedHypergraph,
    params: &SpectralParams,
    opts: &SolveOptions,
    floor: f64,
) -> Result<(Eigenpair, usize)> {
    opts.validate()?;
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let run = |k: usize| -> Result<(Eigenpair, usize)> {
        let (x0, y0) = if k == 0 {
            (uniform(g.tail_dim(), params.p), uniform(g.head_dim(), params.q))
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            (
                dirichlet_start(&mut rng, g.tail_dim(), params.p),
                dirichlet_start(&mut rng, g.head_dim(), params.q),
            )
        };
        let (x, y, iters) = ascend(g, params, x0, y0, opts, floor)?;
        Ok((Eigenpair::from_vectors(g, params, x, y)?, iters))
    };
    let runs: Vec<Result<(Eigenpair, usize)>> = if opts.threads > 1 {
        (0..opts.starts).into_par_iter().map(run).collect()
    } else {
        (0..opts.starts).map(run).collect()
    };
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = runs.iter().map(|(p, _)| p.lambda).collect();
    let best = argmax_first(&values);
    let total = runs.iter().map(|(_, i)| i).sum();
    Ok((runs[best].0.clone(), total))
}

/// Uniform sample from the ℓp unit sphere's positive part: a flat Dirichlet
/// draw `d` mapped to `x_i = d_i^{1/p}`.
fn dirichlet_start(rng: &mut ChaCha8Rng, len: usize, p: f64) -> Vec<f64> {
    let e: Vec<f64> = (0..len).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    e.iter().map(|t| (t / total).powf(1.0 / p)).collect()
}

fn ascend(
    g: &DirectedHypergraph,
    params: &SpectralParams,
    mut x: Vec<f64>,
    mut y: Vec<f64>,
    opts: &SolveOptions,
    floor: f64,
) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let tol = opts.tol;
    let (r, s) = (params.r as f64, params.s as f64);
    let mut value = evaluate(g, &x, &y)?;
    let mut eta = 1.0;
    let mut stalls = 0;
    let mut it = 0;
    while it < opts.max_iters {
        it += 1;
        let (gx, gy) = partial_sums(g, &x, &y)?;
        if kkt(&x, &gx, r * value, params.p).max(kkt(&y, &gy, s * value, params.q)) <= tol {
            break;
        }
        let dx = direction(&x, &gx, params.p);
        let dy = direction(&y, &gy, params.q);
        let mut accepted = None;
        while eta > 1e-18 {
            let xn = retract(&x, &dx, eta, params.p);
            let yn = retract(&y, &dy, eta, params.q);
            let vn = evaluate(g, &xn, &yn)?;
            if vn > value {
                accepted = Some((xn, yn, vn));
                break;
            }
            eta *= 0.5;
        }
        let Some((xn, yn, vn)) = accepted else { break };
        if vn - value <= 1e-15 * value.max(1.0) {
            stalls += 1;
        } else {
            stalls = 0;
        }
        x = xn;
        y = yn;
        value = vn;
        eta = (eta * 2.0).min(1e6);
        if stalls >= STALL_LIMIT || x.iter().chain(&y).any(|&t| t < floor) {
            break;
        }
    }
    Ok((x, y, it))
}

/// First-order optimality gap on one sphere at multiplier `k = r P`.
fn kkt(v: &[f64], grad: &[f64], k: f64, p: f64) -> f64 {
    v.iter()
        .zip(grad)
        .map(|(&vi, &gi)| {
            let target = if p == 1.0 { k } else { k * vi.powf(p - 1.0) };
            if vi > 0.0 {
                (gi - target).abs()
            } else {
                (gi - target).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

fn direction(v: &[f64], grad: &[f64], p: f64) -> Vec<f64> {
    if p == 1.0 {
        return grad.to_vec();
    }
    // project out the normal of the ℓp sphere, v^{p−1}
    let normal: Vec<f64> = v.iter().map(|&t| t.powf(p - 1.0)).collect();
    let nn: f64 = normal.iter().map(|t| t * t).sum();
    if nn == 0.0 {
        return grad.to_vec();
    }
    let c = normal.iter().zip(grad).map(|(a, b)| a * b).sum::<f64>() / nn;
    grad.iter().zip(&normal).map(|(&gi, &ni)| gi - c * ni).collect()
}

fn retract(v: &[f64], d: &[f64], eta: f64, p: f64) -> Vec<f64> {
    let moved: Vec<f64> = v.iter().zip(d).map(|(&a, &b)| a + eta * b).collect();
    if p == 1.0 {
        return project_simplex(&moved);
    }
    let mut out: Vec<f64> = moved.into_iter().map(|t| t.max(0.0)).collect();
    if lp_norm(&out, p) == 0.0 {
        return v.to_vec();
    }
    normalize(&mut out, p);
    out
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&t| (t - tau).max(0.0)).collect()
}

/// Maximum over induced sub-dirhypergraphs of the bipartite split, each
/// solved by [`gradient_search`]. Arc sets whose degree upper bound falls
/// below the whole-graph value are skipped. Beyond `opts.hyperbolic_cap` split
/// vertices this degrades to a single whole-graph gradient search and marks
/// the result heuristic.
pub fn hyperbolic_exact(
    g: &DirectedHypergraph,
    params: &SpectralParams,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    if params.phase != Phase::Hyperbolic {
        return Err(Error::Phase {
            expected: "hyperbolic",
            got: params.phase,
        });
    }
    opts.validate()?;
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let (m, n) = (g.tail_dim(), g.head_dim());
    if m + n > opts.hyperbolic_cap {
        debug!("hyperbolic: {} split vertices exceed cap, using gradient search", m + n);
        let (pair, iterations) = gradient_search_counted(g, params, opts, 0.0)?;
        return Ok(SolveResult {
            pair,
            params: *params,
            method: Method::GradientAscent,
            iterations,
            converged: true,
            heuristic: true,
            component_values: None,
        });
    }

    let arc_sets = induced_arc_sets(g);
    let solve_set = |arcs: &Vec<usize>| -> Result<(Vec<f64>, Vec<f64>, f64, usize)> {
        let sub = g.restrict(arcs);
        let (pair, iters) = match identical_arcs(&sub.graph, params)? {
            Some(res) => (res.pair, 0),
            None => gradient_search_counted(&sub.graph, params, opts, BOUNDARY_FLOOR)?,
        };
        let mut x = vec![0.0; m];
        let mut y = vec![0.0; n];
        for (k, &i) in sub.tail_map.iter().enumerate() {
            x[i] = pair.x[k];
        }
        for (k, &j) in sub.head_map.iter().enumerate() {
            y[j] = pair.y[k];
        }
        let v = evaluate(g, &x, &y)?;
        Ok((x, y, v, iters))
    };
    // the full arc set seeds a value no pruned set can reach
    let full = arc_sets.len() - 1;
    let seed = solve_set(&arc_sets[full])?;
    let mut keep = Vec::with_capacity(arc_sets.len());
    for arcs in &arc_sets[..full] {
        let sub = g.restrict(arcs);
        keep.push(bounds_report(&sub.graph, params.p, params.q)?.upper() >= seed.2);
    }
    let pending: Vec<&Vec<usize>> = arc_sets[..full]
        .iter()
        .zip(&keep)
        .filter_map(|(a, &k)| k.then_some(a))
        .collect();
    debug!("hyperbolic: solving {} of {} arc sets", pending.len() + 1, arc_sets.len());
    let solved: Vec<Result<_>> = if opts.threads > 1 {
        pending.into_par_iter().map(solve_set).collect()
    } else {
        pending.into_iter().map(solve_set).collect()
    };
    let mut solved = solved.into_iter().collect::<Result<Vec<_>>>()?;
    solved.push(seed);
    let values: Vec<f64> = solved.iter().map(|t| t.2).collect();
    let best = argmax_first(&values);
    let iterations = solved.iter().map(|t| t.3).sum();
    let (x, y, _, _) = solved.into_iter().nth(best).expect("at least one arc set");
    let pair = Eigenpair::from_vectors(g, params, x, y)?;
    Ok(SolveResult {
        pair,
        params: *params,
        method: Method::SubsetEnumeration,
        iterations,
        converged: true,
        heuristic: false,
        component_values: None,
    })
}

/// Distinct nonempty arc sets induced by subsets of split vertices, in
/// order of first appearance over increasing bitmasks.
fn induced_arc_sets(g: &DirectedHypergraph) -> Vec<Vec<usize>> {
    let m = g.tail_dim();
    let total = m + g.head_dim();
    let masks: Vec<(u64, u64)> = (0..g.arc_count())
        .map(|e| {
            let t = g.tail_coords(e).iter().fold(0u64, |a, &i| a | 1 << i);
            let h = g.head_coords(e).iter().fold(0u64, |a, &j| a | 1 << (m + j));
            (t, h)
        })
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << total) {
        let arcs: Vec<usize> = masks
            .iter()
            .enumerate()
            .filter(|(_, &(t, h))| (t | h) & !mask == 0)
            .map(|(e, _)| e)
            .collect();
        if !arcs.is_empty() && seen.insert(arcs.clone()) {
            out.push(arcs);
        }
    }
    out
}
