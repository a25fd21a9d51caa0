//! Degree bounds, closed forms, the power construction and `(p, q)` scans.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{degree_summary, DirectedHypergraph};
use crate::labeling::{Side, WeightedIncidenceLabeling};
use crate::polyform::{Phase, SpectralParams, PHASE_TOL};
use crate::solver::{solve, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Out,
    In,
}

/// `λ_{p,q}` of a hyperstar with `k` arcs sharing one tail (`Out`) or head
/// (`In`) vertex. Defined for `e ≤ 1`.
pub fn hyperstar_lambda(
    k: usize,
    r: usize,
    s: usize,
    p: f64,
    q: f64,
    direction: Direction,
) -> Result<f64> {
    let params = SpectralParams::new(p, q, r, s)?;
    if params.phase == Phase::Hyperbolic {
        return Err(Error::Phase {
            expected: "elliptic or parabolic",
            got: params.phase,
        });
    }
    if k == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(hyperstar_value(k, &params, direction))
}

fn hyperstar_value(k: usize, params: &SpectralParams, direction: Direction) -> f64 {
    let (r, s) = (params.r as f64, params.s as f64);
    let exponent = match direction {
        Direction::Out => 1.0 - ((r - 1.0) / params.p + s / params.q),
        Direction::In => 1.0 - (r / params.p + (s - 1.0) / params.q),
    };
    (k as f64).powf(exponent) / params.arity_factor()
}

/// Hyperstar with center `c`; leaves are `t{i}_{j}` on tails and `h{i}_{j}`
/// on heads of arc `i`.
pub fn hyperstar(k: usize, r: usize, s: usize, direction: Direction) -> Result<DirectedHypergraph> {
    let arcs = (0..k).map(|i| {
        let (tc, hc) = match direction {
            Direction::Out => (1, 0),
            Direction::In => (0, 1),
        };
        let mut tail: Vec<String> = (tc..r).map(|j| format!("t{i}_{j}")).collect();
        let mut head: Vec<String> = (hc..s).map(|j| format!("h{i}_{j}")).collect();
        match direction {
            Direction::Out => tail.insert(0, "c".into()),
            Direction::In => head.insert(0, "c".into()),
        }
        (tail, head)
    });
    DirectedHypergraph::build(r, s, arcs)
}

/// The elliptic labeling of a hyperstar: `B = 1/k` at the center, `1`
/// elsewhere, `w ≡ 1/k`, with `α` chosen to make it normal.
pub fn hyperstar_labeling(
    g: &DirectedHypergraph,
    params: &SpectralParams,
    direction: Direction,
) -> WeightedIncidenceLabeling {
    let k = g.arc_count();
    let center = g.vertex_id("c");
    let lambda = hyperstar_value(k, params, direction);
    let kf = k as f64;
    WeightedIncidenceLabeling::from_fn(
        g,
        params.phase,
        1.0 / (params.arity_factor() * lambda),
        (params.phase != Phase::Parabolic).then(|| vec![1.0 / kf; k]),
        |v, _, _| if Some(v) == center { 1.0 / kf } else { 1.0 },
    )
}

/// The `(2,1)` anadiplosis cycle with `len` arcs (`len` even, at least 4):
/// arcs `2k` and `2k+1` share the head `w{k}`, arcs `2k+1` and `2k+2` share
/// the tail vertex `b{k+1}`, and each arc has a private tail vertex `o{j}`.
pub fn hypercycle_21(len: usize) -> Result<DirectedHypergraph> {
    if len < 4 || len % 2 != 0 {
        return Err(Error::InvalidOption(format!(
            "cycle length must be even and at least 4, got {len}"
        )));
    }
    let half = len / 2;
    let arcs = (0..len).map(|a| {
        let k = a / 2;
        let b = if a % 2 == 0 { k } else { (k + 1) % half };
        (vec![format!("o{a}"), format!("b{b}")], vec![format!("w{k}")])
    });
    DirectedHypergraph::build(2, 1, arcs)
}

/// The `(2,1)` path with `len` arcs on bottom vertices `b0..b{len}`: even
/// bottom vertices are tails, odd ones heads, and arc `j` joins `b{j}` and
/// `b{j+1}` plus a private tail vertex `t{j}`.
pub fn hyperpath_21(len: usize) -> Result<DirectedHypergraph> {
    if len < 1 {
        return Err(Error::EmptyGraph);
    }
    let arcs = (0..len).map(|j| {
        let (even, odd) = if j % 2 == 0 { (j, j + 1) } else { (j + 1, j) };
        (vec![format!("t{j}"), format!("b{even}")], vec![format!("b{odd}")])
    });
    DirectedHypergraph::build(2, 1, arcs)
}

/// `B(v,e) = 1/d_v` on the side of `v` in `e`.
pub fn degree_labeling(
    g: &DirectedHypergraph,
    mode: Phase,
    alpha: f64,
    weights: Option<Vec<f64>>,
) -> Result<WeightedIncidenceLabeling> {
    let d = degree_summary(g)?;
    Ok(WeightedIncidenceLabeling::from_fn(g, mode, alpha, weights, |v, _, side| {
        let deg = match side {
            Side::Tail => d.out_degree[g.tail_coord_of(v).expect("tail vertex")],
            Side::Head => d.in_degree[g.head_coord_of(v).expect("head vertex")],
        };
        1.0 / deg as f64
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    pub formula: &'static str,
}

/// The two lower and two upper degree bounds at `(p, q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub phase: Phase,
    /// `|G|^{1−e} (δ⁺/r)^{r/p} (δ⁻/s)^{s/q}`
    pub lower_min_degree: BoundValue,
    /// Hyperstar value at the largest out- or in-degree.
    pub lower_max_degree: BoundValue,
    /// `(Δ⁺/r)^{r/p} (Δ⁻/s)^{s/q}`, times `|G|^γ` when `e < 1`.
    pub upper_degree_product_max: BoundValue,
    /// `max_e Π (d⁺)^{1/p} Π (d⁻)^{1/q} / (r^{r/p} s^{s/q})`, times `|G|^γ` when `e < 1`.
    pub upper_per_arc_degree_product: BoundValue,
}

impl BoundsReport {
    pub fn lower(&self) -> f64 {
        self.lower_min_degree.value.max(self.lower_max_degree.value)
    }

    pub fn upper(&self) -> f64 {
        self.upper_degree_product_max
            .value
            .min(self.upper_per_arc_degree_product.value)
    }
}

pub fn bounds_report(g: &DirectedHypergraph, p: f64, q: f64) -> Result<BoundsReport> {
    let d = degree_summary(g)?;
    let params = SpectralParams::for_graph(g, p, q)?;
    let (r, s) = (params.r as f64, params.s as f64);
    let (a, b) = (r / p, s / q);
    let size = g.arc_count() as f64;
    let elliptic = params.phase == Phase::Elliptic;
    let factor = if elliptic { size.powf(params.gamma) } else { 1.0 };

    let lower_min = size.powf(params.gamma)
        * (d.min_out as f64 / r).powf(a)
        * (d.min_in as f64 / s).powf(b);
    let lower_max = hyperstar_value(d.max_out, &params, Direction::Out)
        .max(hyperstar_value(d.max_in, &params, Direction::In));
    let upper_deg = factor * (d.max_out as f64 / r).powf(a) * (d.max_in as f64 / s).powf(b);
    let per_arc = (0..g.arc_count())
        .map(|e| {
            let t: f64 = g
                .tail_coords(e)
                .iter()
                .map(|&i| (d.out_degree[i] as f64).powf(1.0 / p))
                .product();
            let h: f64 = g
                .head_coords(e)
                .iter()
                .map(|&j| (d.in_degree[j] as f64).powf(1.0 / q))
                .product();
            t * h
        })
        .fold(0.0, f64::max);
    let upper_arc = factor * per_arc / params.arity_factor();

    Ok(BoundsReport {
        phase: params.phase,
        lower_min_degree: BoundValue {
            value: lower_min,
            formula: "|G|^(1-e) (dmin+/r)^(r/p) (dmin-/s)^(s/q)",
        },
        lower_max_degree: BoundValue {
            value: lower_max,
            formula: "max(D+^(1-((r-1)/p+s/q)), D-^(1-(r/p+(s-1)/q))) / (r^(r/p) s^(s/q))",
        },
        upper_degree_product_max: BoundValue {
            value: upper_deg,
            formula: if elliptic {
                "|G|^(1-e) (D+/r)^(r/p) (D-/s)^(s/q)"
            } else {
                "(D+/r)^(r/p) (D-/s)^(s/q)"
            },
        },
        upper_per_arc_degree_product: BoundValue {
            value: upper_arc,
            formula: if elliptic {
                "|G|^(1-e) max_e prod d+^(1/p) prod d-^(1/q) / (r^(r/p) s^(s/q))"
            } else {
                "max_e prod d+^(1/p) prod d-^(1/q) / (r^(r/p) s^(s/q))"
            },
        },
    })
}

#[derive(Debug, Clone)]
pub struct PowerResult {
    pub graph: DirectedHypergraph,
    /// Predicted `ρ = λ_{2(kr+a), 2(ks+b)}` of the power, present when `as = br`.
    pub predicted_rho: Option<f64>,
}

/// `G(k; a, b)`: every vertex `u` becomes `k` copies `{u}::Vu::{i}`, and the
/// tail and head of arc `j` gain `a` and `b` fresh vertices `e{j}::Te::{i}`
/// and `e{j}::He::{i}`.
pub fn power(
    g: &DirectedHypergraph,
    k: usize,
    a: usize,
    b: usize,
    opts: &SolveOptions,
) -> Result<PowerResult> {
    if k == 0 {
        return Err(Error::InvalidOption("power needs k >= 1".into()));
    }
    let (r, s) = (g.r(), g.s());
    let blow = |v: usize| (0..k).map(move |i| (v, i));
    let arcs: Vec<(Vec<String>, Vec<String>)> = (0..g.arc_count())
        .map(|j| {
            let arc = g.arc(j);
            let mut tail: Vec<String> = arc
                .tail()
                .iter()
                .flat_map(|&v| blow(v))
                .map(|(v, i)| format!("{}::Vu::{i}", g.label(v)))
                .collect();
            tail.extend((0..a).map(|i| format!("e{j}::Te::{i}")));
            let mut head: Vec<String> = arc
                .head()
                .iter()
                .flat_map(|&v| blow(v))
                .map(|(v, i)| format!("{}::Vu::{i}", g.label(v)))
                .collect();
            head.extend((0..b).map(|i| format!("e{j}::He::{i}")));
            (tail, head)
        })
        .collect();
    let graph = DirectedHypergraph::build(k * r + a, k * s + b, arcs)?;
    let predicted_rho = if a * s == b * r {
        let rho = solve(g, 2.0 * r as f64, 2.0 * s as f64, opts)?.lambda();
        let (kr, ks) = ((k * r + a) as f64, (k * s + b) as f64);
        let rs = (r * s) as f64;
        Some((rs.sqrt() * rho).powf(k as f64 * r as f64 / kr) / (kr * ks).sqrt())
    } else {
        None
    };
    Ok(PowerResult {
        graph,
        predicted_rho,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnderlyingVerdict {
    pub holds: bool,
    /// Whether the relation is an equality (`p = q = r + s`).
    pub equality: bool,
    pub bound: f64,
}

/// Compares a parabolic `λ_{p,q}(G)` with `ρ` of the underlying uniform
/// hypergraph of the bipartite split, supplied by the caller.
pub fn underlying_relation(
    lambda: f64,
    rho_underlying: f64,
    params: &SpectralParams,
    tol: f64,
) -> Result<UnderlyingVerdict> {
    if params.phase != Phase::Parabolic {
        return Err(Error::Phase {
            expected: "parabolic",
            got: params.phase,
        });
    }
    let (r, s) = (params.r as f64, params.s as f64);
    let n = r + s;
    let equality = (params.p - n).abs() <= PHASE_TOL * n && (params.q - n).abs() <= PHASE_TOL * n;
    if equality {
        let bound = rho_underlying / (r.powf(r) * s.powf(s)).powf(1.0 / n);
        return Ok(UnderlyingVerdict {
            holds: (lambda - bound).abs() <= tol * bound.max(1.0),
            equality,
            bound,
        });
    }
    let exponent = n / params.p.min(params.q);
    let bound = rho_underlying.powf(exponent) / params.arity_factor();
    Ok(UnderlyingVerdict {
        holds: lambda <= bound + tol * bound.max(1.0),
        equality,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub p: f64,
    pub q: f64,
    pub e: f64,
    pub phase: Phase,
    pub lambda: f64,
    /// `(r|G|)^{r/p} (s|G|)^{s/q} λ`
    pub scaled: f64,
    pub pq_log_lambda: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub r: usize,
    pub s: usize,
    pub arcs: usize,
    pub max_out: usize,
    pub max_in: usize,
    pub min_out: usize,
    pub min_in: usize,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,q,e,lambda,scaled,pqloglambda,converged\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:.8},{:.8},{:.8},{:.8},{:.8},{:.8},{}",
                row.p, row.q, row.e, row.lambda, row.scaled, row.pq_log_lambda, row.converged
            );
        }
        out
    }
}

/// Geometric default grid `{2,3,4,6,8,12}²`, keeping points of `phase` only
/// when one is given.
pub fn default_grid(r: usize, s: usize, phase: Option<Phase>) -> Vec<(f64, f64)> {
    const VALUES: [f64; 6] = [2.0, 3.0, 4.0, 6.0, 8.0, 12.0];
    let mut grid = Vec::new();
    for &p in &VALUES {
        for &q in &VALUES {
            let keep = match (phase, SpectralParams::new(p, q, r, s)) {
                (None, Ok(_)) => true,
                (Some(ph), Ok(params)) => params.phase == ph,
                (_, Err(_)) => false,
            };
            if keep {
                grid.push((p, q));
            }
        }
    }
    grid
}

/// Solves `G` at every grid point, in grid order.
pub fn pq_scan(
    g: &DirectedHypergraph,
    grid: &[(f64, f64)],
    opts: &SolveOptions,
) -> Result<ScanTable> {
    let d = degree_summary(g)?;
    let size = g.arc_count() as f64;
    let (r, s) = (g.r() as f64, g.s() as f64);
    let row = |&(p, q): &(f64, f64)| -> Result<ScanRow> {
        let res = solve(g, p, q, opts)?;
        let lambda = res.lambda();
        Ok(ScanRow {
            p,
            q,
            e: res.params.eccentricity,
            phase: res.params.phase,
            lambda,
            scaled: (r * size).powf(r / p) * (s * size).powf(s / q) * lambda,
            pq_log_lambda: p * q * lambda.ln(),
            converged: res.converged,
        })
    };
    let rows: Vec<Result<ScanRow>> = if opts.threads > 1 {
        grid.par_iter().map(row).collect()
    } else {
        grid.iter().map(row).collect()
    };
    Ok(ScanTable {
        r: g.r(),
        s: g.s(),
        arcs: g.arc_count(),
        max_out: d.max_out,
        max_in: d.max_in,
        min_out: d.min_out,
        min_in: d.min_in,
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanViolation {
    pub property: &'static str,
    pub points: Vec<(f64, f64)>,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCheck {
    /// Number of discrete inequalities evaluated per property.
    pub checked: BTreeMap<&'static str, usize>,
    pub violations: Vec<ScanViolation>,
}

impl ScanCheck {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const SCALED_MONOTONE: &str = "scaled_monotone";
pub const F_NONDECREASING: &str = "f_nondecreasing";
pub const G_NONINCREASING: &str = "g_nonincreasing";
pub const PQ_CONVEX_P: &str = "pqloglambda_convex_p";
pub const PQ_CONVEX_Q: &str = "pqloglambda_convex_q";
pub const H_CONVEX: &str = "h_convex";
pub const X_CONVEX: &str = "xloglambda_convex";
pub const LIPSCHITZ: &str = "lipschitz";

struct Recorder {
    tol: f64,
    check: ScanCheck,
}

impl Recorder {
    /// Records `lhs ≤ rhs + tol`.
    fn le(&mut self, property: &'static str, lhs: f64, rhs: f64, points: Vec<(f64, f64)>) {
        *self.check.checked.entry(property).or_insert(0) += 1;
        let excess = lhs - rhs;
        if excess > self.tol || excess.is_nan() {
            self.check.violations.push(ScanViolation {
                property,
                points,
                excess,
            });
        }
    }
}

/// Evaluates the monotonicity, convexity and Lipschitz statements on the
/// elliptic, converged rows of `table` as discrete inequalities.
pub fn scan_check(table: &ScanTable, tol: f64) -> ScanCheck {
    let rows: Vec<&ScanRow> = table
        .rows
        .iter()
        .filter(|r| r.phase == Phase::Elliptic && r.converged)
        .collect();
    let mut rec = Recorder {
        tol,
        check: ScanCheck {
            checked: BTreeMap::new(),
            violations: Vec::new(),
        },
    };
    let (r, s) = (table.r as f64, table.s as f64);
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);

    for a in &rows {
        for b in &rows {
            let lower_p = same(a.q, b.q) && a.p < b.p;
            let lower_q = same(a.p, b.p) && a.q < b.q;
            if lower_p || lower_q {
                rec.le(SCALED_MONOTONE, b.scaled, a.scaled, vec![(a.p, a.q), (b.p, b.q)]);
            }
        }
    }

    // rays through the origin, ordered by distance
    let deg_term = |row: &ScanRow, dout: usize, din: usize| {
        let gamma = 1.0 - (r / row.p + s / row.q);
        ((r / dout as f64).powf(r / row.p) * (s / din as f64).powf(s / row.q) * row.lambda)
            .powf(1.0 / gamma)
    };
    for a in &rows {
        for b in &rows {
            if !(same(a.p * b.q, a.q * b.p) && a.p < b.p) {
                continue;
            }
            let pts = vec![(a.p, a.q), (b.p, b.q)];
            let fa = deg_term(a, table.max_out, table.max_in);
            let fb = deg_term(b, table.max_out, table.max_in);
            rec.le(F_NONDECREASING, fa, fb + tol * fb.abs().max(1.0) - tol, pts.clone());
            let ga = deg_term(a, table.min_out, table.min_in);
            let gb = deg_term(b, table.min_out, table.min_in);
            rec.le(G_NONINCREASING, gb, ga + tol * ga.abs().max(1.0) - tol, pts);
        }
    }

    for (i, a) in rows.iter().enumerate() {
        for (j, m) in rows.iter().enumerate() {
            for (k, b) in rows.iter().enumerate() {
                if i == j || j == k || i == k {
                    continue;
                }
                let pts = || vec![(a.p, a.q), (m.p, m.q), (b.p, b.q)];
                if same(a.q, m.q) && same(m.q, b.q) && a.p < m.p && m.p < b.p {
                    let mu = (b.p - m.p) / (b.p - a.p);
                    let interp = mu * a.pq_log_lambda + (1.0 - mu) * b.pq_log_lambda;
                    rec.le(PQ_CONVEX_P, m.pq_log_lambda, interp, pts());
                }
                if same(a.p, m.p) && same(m.p, b.p) && a.q < m.q && m.q < b.q {
                    let mu = (b.q - m.q) / (b.q - a.q);
                    let interp = mu * a.pq_log_lambda + (1.0 - mu) * b.pq_log_lambda;
                    rec.le(PQ_CONVEX_Q, m.pq_log_lambda, interp, pts());
                }
                // collinear in (1/p, 1/q) with m strictly between a and b
                let (ax, ay) = (1.0 / a.p, 1.0 / a.q);
                let (mx, my) = (1.0 / m.p, 1.0 / m.q);
                let (bx, by) = (1.0 / b.p, 1.0 / b.q);
                let cross = (mx - ax) * (by - ay) - (my - ay) * (bx - ax);
                let span = (bx - ax).hypot(by - ay);
                if i < k && cross.abs() <= 1e-12 && span > 0.0 {
                    let t = ((mx - ax) * (bx - ax) + (my - ay) * (by - ay)) / (span * span);
                    if t > 1e-12 && t < 1.0 - 1e-12 {
                        let interp = (1.0 - t) * a.lambda.ln() + t * b.lambda.ln();
                        rec.le(H_CONVEX, m.lambda.ln(), interp, pts());
                    }
                }
                // along a ray, x log λ_{px,qx} as a function of p
                if same(a.p * m.q, a.q * m.p) && same(m.p * b.q, m.q * b.p) && a.p < m.p && m.p < b.p
                {
                    let mu = (b.p - m.p) / (b.p - a.p);
                    let val = |row: &ScanRow| row.p * row.lambda.ln();
                    let interp = mu * val(a) + (1.0 - mu) * val(b);
                    rec.le(X_CONVEX, val(m), interp, pts());
                }
            }
        }
    }

    let size = table.arcs as f64;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            let dist = (a.p - b.p).hypot(a.q - b.q);
            rec.le(
                LIPSCHITZ,
                (a.lambda - b.lambda).abs(),
                2f64.sqrt() * size * dist,
                vec![(a.p, a.q), (b.p, b.q)],
            );
        }
    }
    rec.check
}
