//! The polynomial form `P_G(x, y)`, its partial sums and eigenequation
//! residuals, plus phase classification of `(p, q)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::DirectedHypergraph;

/// Tolerance on the eccentricity used to call a point parabolic.
pub const PHASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// `r/p + s/q < 1`
    Elliptic,
    /// `r/p + s/q = 1`
    Parabolic,
    /// `r/p + s/q > 1`
    Hyperbolic,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Elliptic => "elliptic",
            Phase::Parabolic => "parabolic",
            Phase::Hyperbolic => "hyperbolic",
        })
    }
}

impl std::str::FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "elliptic" => Ok(Phase::Elliptic),
            "parabolic" => Ok(Phase::Parabolic),
            "hyperbolic" => Ok(Phase::Hyperbolic),
            other => Err(Error::InvalidLabeling(format!("unknown mode {other:?}"))),
        }
    }
}

/// `(p, q, r, s)` with eccentricity `e = r/p + s/q` and `γ = 1 − e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralParams {
    pub p: f64,
    pub q: f64,
    pub r: usize,
    pub s: usize,
    pub eccentricity: f64,
    pub gamma: f64,
    pub phase: Phase,
}

impl SpectralParams {
    pub fn new(p: f64, q: f64, r: usize, s: usize) -> Result<Self> {
        phase_classify(p, q, r, s)
    }

    pub fn for_graph(g: &DirectedHypergraph, p: f64, q: f64) -> Result<Self> {
        phase_classify(p, q, g.r(), g.s())
    }

    /// `r^{r/p} s^{s/q}`, the normalising constant in every closed form.
    pub fn arity_factor(&self) -> f64 {
        let (r, s) = (self.r as f64, self.s as f64);
        r.powf(r / self.p) * s.powf(s / self.q)
    }

    /// Same exponents, different arities (the sub-dirhypergraph case never
    /// needs this, but power constructions do).
    pub fn with_arity(&self, r: usize, s: usize) -> Result<Self> {
        phase_classify(self.p, self.q, r, s)
    }
}

pub fn phase_classify(p: f64, q: f64, r: usize, s: usize) -> Result<SpectralParams> {
    if !(p >= 1.0 && q >= 1.0) || !p.is_finite() || !q.is_finite() {
        return Err(Error::Domain { p, q });
    }
    if r == 0 || s == 0 {
        return Err(Error::InvalidArity { r, s });
    }
    let e = r as f64 / p + s as f64 / q;
    let phase = if (e - 1.0).abs() <= PHASE_TOL {
        Phase::Parabolic
    } else if e < 1.0 {
        Phase::Elliptic
    } else {
        Phase::Hyperbolic
    };
    Ok(SpectralParams {
        p,
        q,
        r,
        s,
        eccentricity: e,
        gamma: 1.0 - e,
        phase,
    })
}

/// A feasible pair together with its value and eigenequation residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
    pub residual: f64,
}

impl Eigenpair {
    /// Normalises `x`, `y` and fills in `lambda` and `residual`.
    pub fn from_vectors(
        g: &DirectedHypergraph,
        params: &SpectralParams,
        mut x: Vec<f64>,
        mut y: Vec<f64>,
    ) -> Result<Self> {
        check_len(g.tail_dim(), x.len())?;
        check_len(g.head_dim(), y.len())?;
        normalize(&mut x, params.p);
        normalize(&mut y, params.q);
        let lambda = evaluate(g, &x, &y)?;
        let mut pair = Eigenpair {
            x,
            y,
            lambda,
            residual: 0.0,
        };
        pair.residual = residual(g, &pair, params);
        Ok(pair)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::IndexMismatch { expected, got });
    }
    Ok(())
}

/// `Σ_e Π_{T(e)} x · Π_{H(e)} y`.
pub fn evaluate(g: &DirectedHypergraph, x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(g.tail_dim(), x.len())?;
    check_len(g.head_dim(), y.len())?;
    Ok((0..g.arc_count()).map(|e| monomial(g, e, x, y)).sum())
}

/// Value of the single monomial of arc `e`.
pub fn monomial(g: &DirectedHypergraph, e: usize, x: &[f64], y: &[f64]) -> f64 {
    let t: f64 = g.tail_coords(e).iter().map(|&i| x[i]).product();
    let h: f64 = g.head_coords(e).iter().map(|&j| y[j]).product();
    t * h
}

/// Gradients `(∂P/∂x, ∂P/∂y)`.
pub fn partial_sums(g: &DirectedHypergraph, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(g.tail_dim(), x.len())?;
    check_len(g.head_dim(), y.len())?;
    let mut gx = vec![0.0; x.len()];
    let mut gy = vec![0.0; y.len()];
    for e in 0..g.arc_count() {
        let tc = g.tail_coords(e);
        let hc = g.head_coords(e);
        let hprod: f64 = hc.iter().map(|&j| y[j]).product();
        let tprod: f64 = tc.iter().map(|&i| x[i]).product();
        // leave-one-out products, no division so zeros are handled exactly
        for (k, &i) in tc.iter().enumerate() {
            let others: f64 = tc
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != k)
                .map(|(_, &u)| x[u])
                .product();
            gx[i] += others * hprod;
        }
        for (k, &j) in hc.iter().enumerate() {
            let others: f64 = hc
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != k)
                .map(|(_, &v)| y[v])
                .product();
            gy[j] += tprod * others;
        }
    }
    Ok((gx, gy))
}

/// Max deviation from the strong eigenequations at `pair.lambda`; zero
/// coordinates are scored in weak form and therefore contribute nothing.
pub fn residual(g: &DirectedHypergraph, pair: &Eigenpair, params: &SpectralParams) -> f64 {
    let (gx, gy) = match partial_sums(g, &pair.x, &pair.y) {
        Ok(v) => v,
        Err(_) => return f64::INFINITY,
    };
    let r = params.r as f64;
    let s = params.s as f64;
    let lam = pair.lambda;
    let side = |v: &[f64], grad: &[f64], k: f64, exp: f64| {
        v.iter()
            .zip(grad)
            .map(|(&vi, &gi)| {
                if vi > 0.0 {
                    (gi - k * lam * vi.powf(exp - 1.0)).abs()
                } else {
                    (vi * gi - k * lam * vi.powf(exp)).abs()
                }
            })
            .fold(0.0, f64::max)
    };
    side(&pair.x, &gx, r, params.p).max(side(&pair.y, &gy, s, params.q))
}

/// `‖v‖_p` computed on `v / ‖v‖_∞` to keep powers in range.
pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    let m = v.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let sum: f64 = v.iter().map(|&t| (t.abs() / m).powf(p)).sum();
    m * sum.powf(1.0 / p)
}

/// Scales `v` to unit ℓp norm in place; returns the old norm. A zero vector
/// is left untouched.
pub fn normalize(v: &mut [f64], p: f64) -> f64 {
    let n = lp_norm(v, p);
    if n > 0.0 {
        v.iter_mut().for_each(|t| *t /= n);
    }
    n
}

/// The unit vector with all coordinates equal.
pub fn uniform(len: usize, p: f64) -> Vec<f64> {
    vec![(len as f64).powf(-1.0 / p); len]
}
