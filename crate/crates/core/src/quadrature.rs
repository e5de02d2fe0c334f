//! Integrals over `(0, inf)` of radial integrands with power-law endpoints.
//!
//! [`QuadMode::TransformedGauss`] maps `r = u / (1 - u)`, splits at `u = 1/2` and
//! integrates each half in a variable that vanishes at its singular end (`u`
//! near the origin, `v = 1 - u` near infinity). Each half starts from panels
//! graded geometrically towards the endpoint, is refined by global adaptive
//! bisection, and the piece below `1e-15` is added in closed form from the
//! endpoint power law.
//!
//! [`QuadMode::UniformRiemann`] is a plain Riemann sum on a truncated grid.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::sphere_area;

/// Innermost geometric panel edge, in the mapped variable.
const T_MIN: f64 = 1e-15;
/// Ratio between consecutive geometric panel edges.
const GRADING: f64 = 8.0;
/// Bisection depth limit relative to the initial panels.
const MAX_DEPTH: u32 = 40;
/// Panel budget for one adaptive integration.
const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuadMode {
    TransformedGauss,
    UniformRiemann,
}

impl std::str::FromStr for QuadMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss" | "transformed-gauss" => Ok(QuadMode::TransformedGauss),
            "riemann" | "uniform-riemann" => Ok(QuadMode::UniformRiemann),
            _ => Err(Error::InvalidParameter(format!("unknown quadrature mode '{s}'"))),
        }
    }
}

/// Integration scheme for `int_0^inf f(r) dr`.
///
/// `npoints` is the Gauss-Legendre order per panel for `TransformedGauss`, and
/// the number of grid points on `(0, r_max]` for `UniformRiemann`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub mode: QuadMode,
    pub npoints: usize,
    pub r_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::transformed_gauss()
    }
}

impl QuadratureRule {
    pub fn transformed_gauss() -> Self {
        Self { mode: QuadMode::TransformedGauss, npoints: 64, r_max: 20.0, rel_tol: 1e-10, abs_tol: 1e-14 }
    }

    pub fn uniform_riemann(npoints: usize, r_max: f64) -> Self {
        Self { mode: QuadMode::UniformRiemann, npoints, r_max, ..Self::transformed_gauss() }
    }

    /// 1000 regularly spaced points on `[0, 20]`.
    pub fn reference_riemann() -> Self {
        Self::uniform_riemann(1000, 20.0)
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.npoints < 16 {
            return Err(Error::InvalidParameter(format!("npoints must be >= 16, got {}", self.npoints)));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter("quadrature tolerances must be > 0".into()));
        }
        if self.mode == QuadMode::UniformRiemann && !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("r_max must be > 0, got {}", self.r_max)));
        }
        Ok(())
    }

    /// Spacing of the Riemann grid.
    pub fn riemann_step(&self) -> f64 {
        self.r_max / self.npoints as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub err_estimate: f64,
    pub evaluations: usize,
}

/// Power laws of an integrand at both ends: `f(r) ~ r^(origin - 1)` as `r -> 0`
/// and `f(r) ~ r^(-infinity)` as `r -> inf`.
///
/// Integrability needs `origin > 0` and `infinity > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointHints {
    pub origin: f64,
    pub infinity: f64,
}

impl Default for EndpointHints {
    /// Bounded at the origin, `r^-2` at infinity.
    fn default() -> Self {
        Self { origin: 1.0, infinity: 2.0 }
    }
}

impl EndpointHints {
    pub fn new(origin: f64, infinity: f64) -> Self {
        Self { origin, infinity }
    }

    /// Hints for `r^(k + N - 1) rho(r)` when `rho ~ r^-p0` at 0 and `r^-pinf` at infinity.
    pub fn for_moment(dim: usize, k: f64, p0: f64, pinf: f64) -> Self {
        let n = dim as f64;
        Self { origin: k + n - p0, infinity: pinf - k - n + 1.0 }
    }

    /// Hints for `r^(k + N - 1) rho(r)^p` given the power laws of `rho`.
    pub fn for_profile(dim: usize, k: f64, p: f64, decay: ProfileDecay) -> Self {
        let n = dim as f64;
        Self { origin: k + n - p * decay.origin, infinity: p * decay.infinity - k - n + 1.0 }
    }

    fn check(&self) -> Result<()> {
        if !(self.origin > 0.0) {
            return Err(Error::Divergent(format!(
                "integrand ~ r^{} at the origin is not integrable",
                self.origin - 1.0
            )));
        }
        if !(self.infinity > 1.0) {
            return Err(Error::Divergent(format!(
                "integrand ~ r^-{} at infinity is not integrable",
                self.infinity
            )));
        }
        Ok(())
    }
}

/// Power laws of a radial density: `rho(r) ~ r^-origin` as `r -> 0` and
/// `rho(r) ~ r^-infinity` as `r -> inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileDecay {
    pub origin: f64,
    pub infinity: f64,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }
}

/// Cached `n`-point Gauss-Legendre rule.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(n).or_insert_with(|| Arc::new(GaussLegendre::compute(n))).clone()
}

/// Half of the mapped domain. `Origin` uses `u` with `r = u / (1 - u)`,
/// `Infinity` uses `v = 1 - u` with `r = (1 - v) / v`. `Plain` is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Plain,
    Origin,
    Infinity,
}

impl Side {
    /// `(r, dr/dt)` for the mapped variable `t`.
    fn map(self, t: f64) -> (f64, f64) {
        match self {
            Side::Plain => (t, 1.0),
            Side::Origin => {
                let om = 1.0 - t;
                (t / om, 1.0 / (om * om))
            }
            Side::Infinity => ((1.0 - t) / t, 1.0 / (t * t)),
        }
    }
}

struct Panel {
    side: Side,
    a: f64,
    b: f64,
    depth: u32,
    value: Vec<f64>,
    err: Vec<f64>,
}

/// Shared adaptive engine for vector-valued integrands.
struct Engine<'a, F: Fn(f64, &mut [f64])> {
    f: &'a F,
    dim: usize,
    hi: Arc<GaussLegendre>,
    lo: Arc<GaussLegendre>,
    evaluations: usize,
    buf: Vec<f64>,
}

impl<'a, F: Fn(f64, &mut [f64])> Engine<'a, F> {
    fn new(f: &'a F, dim: usize, order: usize) -> Self {
        Self {
            f,
            dim,
            hi: gauss_legendre(order),
            lo: gauss_legendre(order / 2),
            evaluations: 0,
            buf: vec![0.0; dim],
        }
    }

    /// Integrand in the mapped variable, written into `self.buf`.
    fn eval(&mut self, side: Side, t: f64) -> Result<()> {
        let (r, jac) = side.map(t);
        (self.f)(r, &mut self.buf);
        self.evaluations += 1;
        for v in self.buf.iter_mut() {
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { at: r });
            }
            *v *= jac;
        }
        Ok(())
    }

    fn panel(&mut self, side: Side, a: f64, b: f64, depth: u32) -> Result<Panel> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut hi_sum = vec![0.0; self.dim];
        let mut lo_sum = vec![0.0; self.dim];
        let hi = self.hi.clone();
        let lo = self.lo.clone();
        for (x, w) in hi.nodes.iter().zip(&hi.weights) {
            self.eval(side, mid + half * x)?;
            for (s, v) in hi_sum.iter_mut().zip(&self.buf) {
                *s += w * v;
            }
        }
        for (x, w) in lo.nodes.iter().zip(&lo.weights) {
            self.eval(side, mid + half * x)?;
            for (s, v) in lo_sum.iter_mut().zip(&self.buf) {
                *s += w * v;
            }
        }
        let value: Vec<f64> = hi_sum.iter().map(|s| s * half).collect();
        let err = hi_sum.iter().zip(&lo_sum).map(|(h, l)| ((h - l) * half).abs()).collect();
        Ok(Panel { side, a, b, depth, value, err })
    }

    /// Refines `panels` until every component meets its tolerance. `fixed` holds
    /// contributions (value, error) that bisection cannot improve.
    fn refine(
        &mut self,
        mut panels: Vec<Panel>,
        fixed: &[(f64, f64)],
        rel_tol: f64,
        abs_tol: f64,
    ) -> Result<Vec<IntegralResult>> {
        loop {
            let mut totals: Vec<(f64, f64)> = fixed.to_vec();
            for p in &panels {
                for (k, t) in totals.iter_mut().enumerate() {
                    t.0 += p.value[k];
                    t.1 += p.err[k];
                }
            }
            let tols: Vec<f64> = totals.iter().map(|t| (rel_tol * t.0.abs()).max(abs_tol)).collect();
            let done = totals.iter().zip(&tols).all(|(t, tol)| t.1 <= *tol);
            let worst = panels
                .iter()
                .enumerate()
                .filter(|(_, p)| p.depth < MAX_DEPTH)
                .map(|(i, p)| {
                    let score = p.err.iter().zip(&tols).map(|(e, t)| e / t).fold(0.0, f64::max);
                    (i, score)
                })
                .max_by(|x, y| x.1.total_cmp(&y.1));
            let stalled = match worst {
                None => true,
                Some((_, score)) => score == 0.0,
            };
            if done || stalled || panels.len() >= MAX_PANELS {
                let results: Vec<IntegralResult> = totals
                    .iter()
                    .map(|t| IntegralResult { value: t.0, err_estimate: t.1, evaluations: self.evaluations })
                    .collect();
                if done {
                    return Ok(results);
                }
                let (estimate, error) = totals
                    .iter()
                    .zip(&tols)
                    .max_by(|x, y| (x.0 .1 / x.1).total_cmp(&(y.0 .1 / y.1)))
                    .map(|(t, _)| *t)
                    .unwrap_or((0.0, 0.0));
                return Err(Error::QuadratureNonConvergence { estimate, error });
            }
            let (i, _) = worst.unwrap();
            let p = panels.swap_remove(i);
            let m = 0.5 * (p.a + p.b);
            let left = self.panel(p.side, p.a, m, p.depth + 1)?;
            let right = self.panel(p.side, m, p.b, p.depth + 1)?;
            panels.push(left);
            panels.push(right);
        }
    }

    /// Geometric panels on `[T_MIN, 1/2]` of one half plus the closed-form piece
    /// on `(0, T_MIN)` for each component, given its endpoint exponent `c`
    /// (integrand `~ t^(c - 1)`).
    fn half_domain(&mut self, side: Side, exponents: &[f64]) -> Result<(Vec<Panel>, Vec<(f64, f64)>)> {
        let mut edges = vec![T_MIN];
        while *edges.last().unwrap() * GRADING < 0.5 {
            let next = edges.last().unwrap() * GRADING;
            edges.push(next);
        }
        edges.push(0.5);
        let mut panels = Vec::with_capacity(edges.len());
        for w in edges.windows(2) {
            panels.push(self.panel(side, w[0], w[1], 0)?);
        }
        // Power-law tail on (0, T_MIN), checked for consistency on [T_MIN, 8 T_MIN].
        self.eval(side, T_MIN)?;
        let g0 = self.buf.clone();
        let t1 = edges[1];
        self.eval(side, t1)?;
        let g1 = self.buf.clone();
        let tails = (0..self.dim)
            .map(|k| {
                let c = exponents[k];
                let tail0 = g0[k] * T_MIN / c;
                let tail1 = g1[k] * t1 / c;
                let err = (panels[0].value[k] + tail0 - tail1).abs();
                (tail0, err)
            })
            .collect();
        Ok((panels, tails))
    }
}

/// Adaptive Gauss-Legendre integration of `f` over the finite interval `[a, b]`.
pub fn integrate_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<IntegralResult> {
    let g = |x: f64, out: &mut [f64]| out[0] = f(x);
    let mut engine = Engine::new(&g, 1, 32);
    let n0 = 4;
    let h = (b - a) / n0 as f64;
    let mut panels = Vec::with_capacity(n0);
    for i in 0..n0 {
        let lo = a + h * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + h };
        panels.push(engine.panel(Side::Plain, lo, hi, 0)?);
    }
    let abs_tol = abs_tol.max(f64::MIN_POSITIVE);
    Ok(engine.refine(panels, &[(0.0, 0.0)], rel_tol, abs_tol)?[0])
}

/// `int_0^inf f(r) dr` assuming a bounded integrand at 0 and `r^-2` decay.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, rule: &QuadratureRule) -> Result<IntegralResult> {
    integrate_semi_infinite_hinted(f, EndpointHints::default(), rule)
}

pub fn integrate_semi_infinite_hinted<F: Fn(f64) -> f64>(
    f: F,
    hints: EndpointHints,
    rule: &QuadratureRule,
) -> Result<IntegralResult> {
    let g = |r: f64, out: &mut [f64]| out[0] = f(r);
    Ok(integrate_semi_infinite_vec(g, &[hints], rule)?[0])
}

/// Integrates several integrands at once on shared panels; `f(r, out)` writes
/// one value per component and `hints[k]` describes component `k`.
pub fn integrate_semi_infinite_vec<F: Fn(f64, &mut [f64])>(
    f: F,
    hints: &[EndpointHints],
    rule: &QuadratureRule,
) -> Result<Vec<IntegralResult>> {
    rule.validate()?;
    for h in hints {
        h.check()?;
    }
    let dim = hints.len();
    match rule.mode {
        QuadMode::UniformRiemann => {
            let h = rule.riemann_step();
            let mut sums = vec![0.0; dim];
            let mut buf = vec![0.0; dim];
            for k in 1..=rule.npoints {
                let r = h * k as f64;
                f(r, &mut buf);
                for (s, v) in sums.iter_mut().zip(&buf) {
                    if !v.is_finite() {
                        return Err(Error::NonFiniteIntegrand { at: r });
                    }
                    *s += v;
                }
            }
            Ok(sums
                .into_iter()
                .map(|s| IntegralResult { value: s * h, err_estimate: f64::INFINITY, evaluations: rule.npoints })
                .collect())
        }
        QuadMode::TransformedGauss => {
            let order = rule.npoints.max(16) & !1;
            let mut engine = Engine::new(&f, dim, order);
            let origin: Vec<f64> = hints.iter().map(|h| h.origin).collect();
            let infinity: Vec<f64> = hints.iter().map(|h| h.infinity - 1.0).collect();
            let (mut panels, tails_o) = engine.half_domain(Side::Origin, &origin)?;
            let (panels_i, tails_i) = engine.half_domain(Side::Infinity, &infinity)?;
            panels.extend(panels_i);
            let fixed: Vec<(f64, f64)> =
                tails_o.iter().zip(&tails_i).map(|(a, b)| (a.0 + b.0, a.1 + b.1)).collect();
            engine.refine(panels, &fixed, rule.rel_tol, rule.abs_tol)
        }
    }
}

/// `|S^{N-1}| int_0^inf r^{k+N-1} profile(r) dr`, the `k`-th moment of a radial
/// density in `R^N`. Assumes the integrand is bounded at 0 and decays like `r^-2`.
pub fn weighted_moment<F: Fn(f64) -> f64>(profile: F, k: u32, dim: usize, rule: &QuadratureRule) -> Result<f64> {
    weighted_moment_hinted(profile, k, dim, EndpointHints::default(), rule)
}

/// [`weighted_moment`] with explicit endpoint behavior of the full integrand.
pub fn weighted_moment_hinted<F: Fn(f64) -> f64>(
    profile: F,
    k: u32,
    dim: usize,
    hints: EndpointHints,
    rule: &QuadratureRule,
) -> Result<f64> {
    let power = (k as usize + dim - 1) as i32;
    let res = integrate_semi_infinite_hinted(|r| r.powi(power) * profile(r), hints, rule)?;
    Ok(sphere_area(dim) * res.value)
}

/// Fixed nodes and weights approximating `int_0^inf f(r) dr`, for discretizing
/// integral operators. Follows the same layout as the adaptive rule without the
/// refinement; the first and last nodes carry the closed-form endpoint pieces.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    tails: bool,
}

impl Discretization {
    pub fn new(rule: &QuadratureRule) -> Result<Self> {
        rule.validate()?;
        match rule.mode {
            QuadMode::UniformRiemann => {
                let h = rule.riemann_step();
                let nodes = (1..=rule.npoints).map(|k| h * k as f64).collect();
                Ok(Self { nodes, weights: vec![h; rule.npoints], tails: false })
            }
            QuadMode::TransformedGauss => Ok(Self::graded(rule.npoints.min(32))),
        }
    }

    /// Geometric panels in `u` and `v = 1 - u` with `order` Gauss points each.
    fn graded(order: usize) -> Self {
        let gl = gauss_legendre(order);
        let mut edges = vec![T_MIN];
        while *edges.last().unwrap() * GRADING < 0.5 {
            let next = edges.last().unwrap() * GRADING;
            edges.push(next);
        }
        edges.push(0.5);
        let mut origin = Vec::new();
        for w in edges.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                let (r, jac) = Side::Origin.map(mid + half * x);
                origin.push((r, wt * half * jac));
            }
        }
        let mut infinity = Vec::new();
        for w in edges.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                let (r, jac) = Side::Infinity.map(mid + half * x);
                infinity.push((r, wt * half * jac));
            }
        }
        infinity.reverse();
        let mut nodes = vec![Side::Origin.map(T_MIN).0];
        let mut weights = vec![0.0];
        for (r, w) in origin.into_iter().chain(infinity) {
            nodes.push(r);
            weights.push(w);
        }
        nodes.push(Side::Infinity.map(T_MIN).0);
        weights.push(0.0);
        Self { nodes, weights, tails: true }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weights including the closed-form endpoint pieces for an integrand with
    /// the given endpoint behavior.
    pub fn weights_for(&self, hints: EndpointHints) -> Vec<f64> {
        let mut w = self.weights.clone();
        if self.tails {
            let n = w.len();
            let r0 = self.nodes[0];
            let r1 = self.nodes[n - 1];
            w[0] = r0 / hints.origin;
            w[n - 1] = r1 / (hints.infinity - 1.0);
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{beta, log_gamma};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [8usize, 16, 32, 64, 128] {
            let gl = gauss_legendre(n);
            let total: f64 = gl.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-14, "n = {n}");
            for p in 0..(2 * n) {
                let got: f64 = gl.nodes.iter().zip(&gl.weights).map(|(x, w)| w * x.powi(p as i32)).sum();
                let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "n = {n}, p = {p}");
            }
        }
    }

    #[test]
    fn semi_infinite_examples() {
        let rule = QuadratureRule::default();
        let a = integrate_semi_infinite(|r| (1.0 + r).powi(-2), &rule).unwrap();
        assert!(rel(a.value, 1.0) < 1e-12);
        assert!(a.err_estimate <= rule.rel_tol * a.value.abs() + rule.abs_tol);
        let b = integrate_semi_infinite_hinted(|r| r * (1.0 + r * r).powi(-2), EndpointHints::new(2.0, 3.0), &rule)
            .unwrap();
        assert!(rel(b.value, 0.5) < 1e-12);
        let (p, sigma) = (2.3, 6.1);
        let c = integrate_semi_infinite_hinted(
            |t| t.powf(p - 1.0) * (1.0 + t).powf(-sigma),
            EndpointHints::new(p, sigma - p + 1.0),
            &rule,
        )
        .unwrap();
        let want = (log_gamma(p).unwrap() + log_gamma(sigma - p).unwrap() - log_gamma(sigma).unwrap()).exp();
        assert!(rel(c.value, want) < 1e-11);
    }

    #[test]
    fn beta_family_grid() {
        let rule = QuadratureRule::default();
        for i in 0..8 {
            for j in 0..8 {
                let p = 0.2 + 4.8 * i as f64 / 7.0;
                let gap = 0.5 + 7.5 * j as f64 / 7.0;
                let sigma = p + gap;
                let want = beta(p, gap).unwrap();
                let got = integrate_semi_infinite_hinted(
                    |t| t.powf(p - 1.0) * (1.0 + t).powf(-sigma),
                    EndpointHints::new(p, gap + 1.0),
                    &rule,
                )
                .unwrap();
                assert!(rel(got.value, want) < 1e-10, "p = {p}, sigma = {sigma}: {}", got.value);
                // t = r^2 form: 2 int r^{2p-1} (1+r^2)^-sigma dr
                let got2 = integrate_semi_infinite_hinted(
                    |r| 2.0 * r.powf(2.0 * p - 1.0) * (1.0 + r * r).powf(-sigma),
                    EndpointHints::new(2.0 * p, 2.0 * gap + 1.0),
                    &rule,
                )
                .unwrap();
                assert!(rel(got2.value, want) < 1e-10, "p = {p}, sigma = {sigma}");
            }
        }
    }

    #[test]
    fn strongly_singular_endpoints() {
        let rule = QuadratureRule::default();
        // r^{-0.97} (1+r)^{-1.05}: both ends barely integrable
        let (p, gap) = (0.03, 0.02);
        let got = integrate_semi_infinite_hinted(
            |t| t.powf(p - 1.0) * (1.0 + t).powf(-(p + gap)),
            EndpointHints::new(p, gap + 1.0),
            &rule,
        )
        .unwrap();
        assert!(rel(got.value, beta(p, gap).unwrap()) < 1e-9, "{}", got.value);
    }

    #[test]
    fn vector_integration_shares_panels() {
        let rule = QuadratureRule::default();
        let hints = [EndpointHints::new(1.0, 2.0), EndpointHints::new(2.0, 3.0)];
        let res = integrate_semi_infinite_vec(
            |r, out| {
                out[0] = (1.0 + r).powi(-2);
                out[1] = r * (1.0 + r * r).powi(-2);
            },
            &hints,
            &rule,
        )
        .unwrap();
        assert!(rel(res[0].value, 1.0) < 1e-12);
        assert!(rel(res[1].value, 0.5) < 1e-12);
    }

    #[test]
    fn divergent_hints_rejected() {
        let rule = QuadratureRule::default();
        let e = integrate_semi_infinite_hinted(|r| 1.0 / r, EndpointHints::new(0.0, 2.0), &rule);
        assert!(matches!(e, Err(Error::Divergent(_))));
        let e = integrate_semi_infinite_hinted(|r| 1.0 / r, EndpointHints::new(1.0, 1.0), &rule);
        assert!(matches!(e, Err(Error::Divergent(_))));
    }

    #[test]
    fn non_finite_integrand_reported() {
        let rule = QuadratureRule::default();
        let e = integrate_semi_infinite(|r| if r > 3.0 { f64::NAN } else { 1.0 }, &rule);
        assert!(matches!(e, Err(Error::NonFiniteIntegrand { .. })));
    }

    #[test]
    fn ball_volume() {
        let rule = QuadratureRule::default();
        let v = weighted_moment(|r| if r <= 1.0 { 1.0 } else { 0.0 }, 0, 3, &rule).unwrap();
        assert!(rel(v, 4.0 * std::f64::consts::PI / 3.0) < 1e-12);
    }

    #[test]
    fn moments_match_beta_forms() {
        // (r^4 + r^2)^{-e}: with t = r^2 the k-th moment becomes a beta integral
        let rule = QuadratureRule::default();
        for (dim, q) in [(6usize, 0.6), (7, 0.62), (10, 0.75)] {
            let e = 1.0 / (1.0 - q);
            let n = dim as f64;
            for k in [0u32, 2] {
                let kf = k as f64;
                let hints = EndpointHints::for_moment(dim, kf, 2.0 * e, 4.0 * e);
                let got = weighted_moment_hinted(|r| (r.powi(4) + r * r).powf(-e), k, dim, hints, &rule).unwrap();
                let a = (n + kf) / 2.0 - e;
                let want = 0.5 * sphere_area(dim) * beta(a, e - a).unwrap();
                assert!(rel(got, want) < 1e-10, "N={dim} q={q} k={k}");
            }
        }
    }

    #[test]
    fn riemann_sum_convention() {
        let rule = QuadratureRule::uniform_riemann(1000, 20.0);
        let res = integrate_semi_infinite(|r| r, &rule).unwrap();
        // left-excluded grid 0.02, ..., 20
        let h: f64 = 0.02;
        let want: f64 = (1..=1000).map(|k| h * (h * k as f64)).sum();
        assert!(rel(res.value, want) < 1e-14);
        assert!(res.err_estimate.is_infinite());
        assert_eq!(res.evaluations, 1000);
    }

    #[test]
    fn riemann_refinement_is_stable() {
        let f = |r: f64| r.powf(3.0) * (1.0 + r * r).powf(-4.5);
        let coarse = integrate_semi_infinite(f, &QuadratureRule::uniform_riemann(1000, 20.0)).unwrap();
        let fine = integrate_semi_infinite(f, &QuadratureRule::uniform_riemann(2000, 20.0)).unwrap();
        assert!(rel(coarse.value, fine.value) < 1e-4);
    }

    #[test]
    fn rule_validation() {
        assert!(QuadratureRule { npoints: 8, ..QuadratureRule::default() }.validate().is_err());
        assert!(QuadratureRule { rel_tol: 0.0, ..QuadratureRule::default() }.validate().is_err());
        assert!(QuadratureRule::uniform_riemann(100, -1.0).validate().is_err());
        assert_eq!("riemann".parse::<QuadMode>().unwrap(), QuadMode::UniformRiemann);
        assert!("simpson".parse::<QuadMode>().is_err());
    }

    #[test]
    fn interval_integration() {
        let r = integrate_interval(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-14, 0.0).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
        let r = integrate_interval(|x| x.powf(0.3), 0.0, 1.0, 1e-13, 0.0).unwrap();
        assert!(rel(r.value, 1.0 / 1.3) < 1e-12);
    }

    #[test]
    fn discretization_integrates_beta_family() {
        let disc = Discretization::new(&QuadratureRule::default()).unwrap();
        for (p, gap) in [(0.4, 1.2), (2.0, 3.0), (0.05, 0.7)] {
            let sigma = p + gap;
            let w = disc.weights_for(EndpointHints::new(p, gap + 1.0));
            let sum: f64 =
                disc.nodes.iter().zip(&w).map(|(t, w)| w * t.powf(p - 1.0) * (1.0 + t).powf(-sigma)).sum();
            assert!(rel(sum, beta(p, gap).unwrap()) < 1e-9, "p = {p}: {sum}");
        }
    }

    proptest! {
        #[test]
        fn beta_identity_holds(p in 0.2f64..5.0, gap in 0.5f64..8.0) {
            let rule = QuadratureRule::default();
            let sigma = p + gap;
            let got = integrate_semi_infinite_hinted(
                |t| t.powf(p - 1.0) * (1.0 + t).powf(-sigma),
                EndpointHints::new(p, gap + 1.0),
                &rule,
            ).unwrap();
            prop_assert!(rel(got.value, beta(p, gap).unwrap()) < 1e-10);
        }
    }
}
