//! Even kernels `lambda = 2n`.
//!
//! Stationary profiles are `rho = A (r^lambda + sum_i beta_i r^{2i} + L)^-e` with
//! `e = 1/(1-q)`. Expanding `rho * |x|^lambda` with [`even_coefficients`] turns the
//! Euler-Lagrange equation into the `n - 1` equations
//! `beta_i = F_i(beta) = c_i int |y|^{2n-2i} rho`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{find_root_bracketed_fallible, minimize_quasi_newton_with_grad, QuasiNewtonConfig, RootConfig};
use crate::params::{alpha_of, q_from_alpha, Extended};
use crate::quadrature::{integrate_semi_infinite_vec, EndpointHints, QuadratureRule};
use crate::specfun::{beta as beta_fn, even_coefficients, sphere_area};

/// Accept a solve when `I` is below this.
pub const RESIDUAL_TOL: f64 = 1e-14;
/// ... and `max |beta_i - F_i| < FIXED_POINT_TOL * max(1, beta_i)`.
pub const FIXED_POINT_TOL: f64 = 1e-7;
/// Margin kept from both ends of the critical-exponent search window.
pub const WINDOW_MARGIN: f64 = 1e-4;
const PRESCAN_POINTS: usize = 8;
const START_FACTORS: [f64; 3] = [1.0, 0.1, 10.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaState {
    pub dim: usize,
    pub n: usize,
    pub q: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// `beta_1, ..., beta_{n-1}`.
    pub beta: Vec<f64>,
    /// `I(beta) = sum_i (beta_i - F_i(beta))^2`.
    pub residual: f64,
    pub converged: bool,
}

impl BetaState {
    pub fn lambda(&self) -> f64 {
        2.0 * self.n as f64
    }

    pub fn density(&self, r: f64) -> Extended {
        density_even(self, r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassCurvePoint {
    pub alpha: f64,
    pub q: f64,
    /// `m(0)`; NaN when the solve failed, infinite when the mass diverges.
    pub m0: f64,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalExponent {
    pub q: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    #[serde(rename = "L")]
    pub l: f64,
    /// NaN when the solve failed.
    pub mass: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub points: Vec<ScanPoint>,
    /// Every point converged and the masses strictly decrease.
    pub monotone: bool,
}

/// `(q/(1-q))^(1/(1-q)) (r^lambda + sum_i beta_i r^{2i} + L)^(-1/(1-q))`.
pub fn density_even(state: &BetaState, r: f64) -> Extended {
    if r == 0.0 && state.l == 0.0 {
        return Extended::Divergent;
    }
    let e = 1.0 / (1.0 - state.q);
    let amp = (state.q / (1.0 - state.q)).powf(e);
    Extended::Finite(amp * (-e * log_poly(state.n, &state.beta, state.l, r)).exp())
}

/// `ln(r^{2n} + sum_i beta_i r^{2i} + L)` without overflow for large `r`.
fn log_poly(n: usize, beta: &[f64], l: f64, r: f64) -> f64 {
    let r2 = r * r;
    if r <= 1.0 {
        let mut p = r2.powi(n as i32) + l;
        let mut rp = r2;
        for b in beta {
            p += b * rp;
            rp *= r2;
        }
        p.ln()
    } else {
        // factor out r^{2n}
        let inv = 1.0 / r / r;
        let mut p = 1.0;
        let mut ip = inv;
        for b in beta.iter().rev() {
            p += b * ip;
            ip *= inv;
        }
        p += l * ip;
        2.0 * n as f64 * r.ln() + p.ln()
    }
}

/// Range of `q` where every moment used by the fixed-point map is finite:
/// `max(0, (N-2)/(N+lambda-2)) < q < N/(N+2)`.
///
/// This contains the admissible range `q > N/(N+lambda)` and, for `lambda = 4`,
/// matches the quartic module.
pub fn integrability_window(dim: usize, n: usize) -> (f64, f64) {
    let nf = dim as f64;
    let lambda = 2.0 * n as f64;
    (((nf - 2.0) / (nf + lambda - 2.0)).max(0.0), nf / (nf + 2.0))
}

/// Everything that does not change while `beta` is iterated.
struct Problem {
    dim: usize,
    n: usize,
    q: f64,
    l: f64,
    e: f64,
    /// `A |S^{N-1}|`.
    scale: f64,
    coeffs: Vec<f64>,
}

/// Values of `F` and optionally its Jacobian.
struct Evaluation {
    f: Vec<f64>,
    jac: Option<DMatrix<f64>>,
}

impl Problem {
    fn new(dim: usize, n: usize, q: f64, l: f64) -> Result<Self> {
        if dim < 1 || n < 1 {
            return Err(Error::InvalidParameter(format!("need N >= 1 and n >= 1, got N = {dim}, n = {n}")));
        }
        let lambda = 2.0 * n as f64;
        let (lo, hi) = integrability_window(dim, n);
        if !(q > lo && q < hi) {
            return Err(Error::Regime(format!(
                "even solver needs {lo} < q < {hi} for N = {dim}, lambda = {lambda}, got q = {q}"
            )));
        }
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::InvalidParameter(format!("L must be finite and >= 0, got {l}")));
        }
        let e = 1.0 / (1.0 - q);
        Ok(Self {
            dim,
            n,
            q,
            l,
            e,
            scale: (q / (1.0 - q)).powf(e) * sphere_area(dim),
            coeffs: even_coefficients(dim, n),
        })
    }

    fn lambda(&self) -> f64 {
        2.0 * self.n as f64
    }

    fn hints(&self, beta: &[f64], k: f64, p: f64) -> EndpointHints {
        let nf = self.dim as f64;
        let origin = if self.l > 0.0 {
            nf + k
        } else if !beta.is_empty() {
            nf + k - 2.0 * p
        } else {
            nf + k - self.lambda() * p
        };
        EndpointHints::new(origin, self.lambda() * p - nf - k + 1.0)
    }

    /// `int r^(N-1+k) P^-(e+extra) dr` for each `(k, extra)`.
    fn raw_moments(&self, beta: &[f64], specs: &[(usize, f64)], rule: &QuadratureRule) -> Result<Vec<f64>> {
        let hints: Vec<EndpointHints> = specs.iter().map(|&(k, x)| self.hints(beta, k as f64, self.e + x)).collect();
        let nm1 = self.dim as f64 - 1.0;
        let res = integrate_semi_infinite_vec(
            |r, out| {
                let lr = r.ln();
                let lp = log_poly(self.n, beta, self.l, r);
                for (o, &(k, x)) in out.iter_mut().zip(specs) {
                    *o = ((nm1 + k as f64) * lr - (self.e + x) * lp).exp();
                }
            },
            &hints,
            rule,
        )?;
        Ok(res.into_iter().map(|v| v.value).collect())
    }

    fn evaluate(&self, beta: &[f64], with_jac: bool, rule: &QuadratureRule) -> Result<Evaluation> {
        let m = self.n - 1;
        let mut specs: Vec<(usize, f64)> = (1..=m).map(|i| (2 * self.n - 2 * i, 0.0)).collect();
        if with_jac {
            // moment orders 2n - 2i + 2j run over 4, 6, ..., 4n - 4
            specs.extend((2..=2 * self.n - 2).map(|h| (2 * h, 1.0)));
        }
        let raw = self.raw_moments(beta, &specs, rule)?;
        let f: Vec<f64> = (0..m).map(|i| self.coeffs[i] * self.scale * raw[i]).collect();
        let jac = with_jac.then(|| {
            DMatrix::from_fn(m, m, |i, j| {
                // 0-based i, j; moment order 2n - 2(i+1) + 2(j+1)
                let h = self.n - i + j;
                -self.coeffs[i] * self.scale / (1.0 - self.q) * raw[m + h - 2]
            })
        });
        Ok(Evaluation { f, jac })
    }

    fn mass(&self, beta: &[f64], rule: &QuadratureRule) -> Result<Extended> {
        let nf = self.dim as f64;
        if self.l == 0.0 && self.q >= (nf - 2.0) / nf {
            return Ok(Extended::Divergent);
        }
        Ok(Extended::Finite(self.scale * self.raw_moments(beta, &[(0, 0.0)], rule)?[0]))
    }

    /// `beta_i = C(n, i) s^{2n-2i}`, i.e. the `r^{2i}` coefficients of
    /// `(r^2 + s^2)^n`, with `s` fixed by the first equation.
    fn cold_start(&self) -> Vec<f64> {
        let (nf, n) = (self.dim as f64, self.n);
        let a = (nf + 2.0 * n as f64 - 2.0) / 2.0;
        let ne = n as f64 * self.e;
        let moment = 0.5 * beta_fn(a, ne - a).unwrap_or(1.0);
        let rhs = self.coeffs.first().copied().unwrap_or(1.0) * self.scale * moment / n as f64;
        let s2 = rhs.powf(2.0 / (self.lambda() * self.e - nf));
        let s2 = if s2.is_finite() && s2 > 0.0 { s2 } else { 1.0 };
        let mut binom = 1.0;
        (1..n)
            .map(|i| {
                binom = binom * (n - i + 1) as f64 / i as f64;
                binom * s2.powi((n - i) as i32)
            })
            .collect()
    }
}

fn absolute_residual(beta: &[f64], f: &[f64]) -> f64 {
    beta.iter().zip(f).map(|(b, v)| (b - v).powi(2)).sum()
}

fn fixed_point_ok(beta: &[f64], f: &[f64]) -> bool {
    beta.iter().zip(f).all(|(b, v)| (b - v).abs() < FIXED_POINT_TOL * b.abs().max(1.0))
}

/// Solver for the even-kernel fixed point with configurable numerics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvenLambda {
    pub rule: QuadratureRule,
    pub bfgs: QuasiNewtonConfig,
    pub root: RootConfig,
}

impl Default for EvenLambda {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::default().with_tolerances(1e-12, 1e-300),
            bfgs: QuasiNewtonConfig { grad_tol: 1e-13, ..QuasiNewtonConfig::default() },
            root: RootConfig::default(),
        }
    }
}

impl EvenLambda {
    pub fn new(rule: QuadratureRule) -> Self {
        Self { rule, ..Self::default() }
    }

    /// `F_i(beta) = c_i int |y|^{2n-2i} rho_beta`, `i = 1..n-1`.
    pub fn fixed_point_map(&self, dim: usize, n: usize, q: f64, l: f64, beta: &[f64]) -> Result<Vec<f64>> {
        let p = Problem::new(dim, n, q, l)?;
        check_beta(&p, beta)?;
        Ok(p.evaluate(beta, false, &self.rule)?.f)
    }

    /// `dF_i/dbeta_j = -(c_i/q) int |y|^{2n-2i+2j} rho^{2-q}`.
    pub fn jacobian_fixed_point(&self, dim: usize, n: usize, q: f64, l: f64, beta: &[f64]) -> Result<DMatrix<f64>> {
        let p = Problem::new(dim, n, q, l)?;
        check_beta(&p, beta)?;
        Ok(p.evaluate(beta, true, &self.rule)?.jac.unwrap())
    }

    /// `I(beta) = sum_i (beta_i - F_i(beta))^2`.
    pub fn residual_i(&self, dim: usize, n: usize, q: f64, l: f64, beta: &[f64]) -> Result<f64> {
        let f = self.fixed_point_map(dim, n, q, l, beta)?;
        Ok(absolute_residual(beta, &f))
    }

    /// Solves `beta = F(beta)`.
    ///
    /// BFGS on the relative residual `sum_i (1 - F_i/beta_i)^2` in `u = ln beta`,
    /// followed by Newton steps on `u - ln F(e^u) = 0`. Tries `init` first and then
    /// cold starts scaled by 1, 0.1 and 10. Returns an unconverged state with the
    /// best attempt when none passes.
    pub fn solve_betas(&self, dim: usize, n: usize, q: f64, l: f64, init: Option<&[f64]>) -> Result<BetaState> {
        let p = Problem::new(dim, n, q, l)?;
        if n == 1 {
            return Ok(BetaState { dim, n, q, l, beta: vec![], residual: 0.0, converged: true });
        }
        let cold = p.cold_start();
        let mut starts: Vec<Vec<f64>> = Vec::new();
        if let Some(b) = init {
            check_beta(&p, b)?;
            starts.push(b.to_vec());
        }
        starts.extend(START_FACTORS.iter().map(|f| cold.iter().map(|b| b * f).collect()));

        let mut best: Option<BetaState> = None;
        let mut last_err = None;
        for start in starts {
            match self.solve_from(&p, &start) {
                Ok(state) if state.converged => return Ok(state),
                Ok(state) => {
                    if best.as_ref().is_none_or(|b| state.residual < b.residual) {
                        best = Some(state);
                    }
                }
                Err(err) => last_err = Some(err),
            }
        }
        match (best, last_err) {
            (Some(state), _) => Ok(state),
            (None, Some(err)) => Err(err),
            (None, None) => unreachable!("at least one start is always tried"),
        }
    }

    fn solve_from(&self, p: &Problem, start: &[f64]) -> Result<BetaState> {
        let rule = &self.rule;
        let relative = |u: &[f64]| -> Result<f64> {
            let beta: Vec<f64> = u.iter().map(|v| v.exp()).collect();
            let ev = p.evaluate(&beta, false, rule)?;
            Ok(beta.iter().zip(&ev.f).map(|(b, f)| (1.0 - f / b).powi(2)).sum())
        };
        let gradient = |u: &[f64]| -> Result<Vec<f64>> {
            let beta: Vec<f64> = u.iter().map(|v| v.exp()).collect();
            let ev = p.evaluate(&beta, true, rule)?;
            let jac = ev.jac.unwrap();
            let m = beta.len();
            let mut g = vec![0.0; m];
            for i in 0..m {
                let res = 1.0 - ev.f[i] / beta[i];
                for (j, gj) in g.iter_mut().enumerate() {
                    let mut d = -jac[(i, j)] * beta[j] / beta[i];
                    if i == j {
                        d += ev.f[i] / beta[i];
                    }
                    *gj += 2.0 * res * d;
                }
            }
            Ok(g)
        };
        let u0: Vec<f64> = start.iter().map(|b| b.ln()).collect();
        let min = minimize_quasi_newton_with_grad(relative, gradient, &u0, &self.bfgs)?;
        let u = self.newton_polish(p, min.x)?;
        let beta: Vec<f64> = u.iter().map(|v| v.exp()).collect();
        let f = p.evaluate(&beta, false, rule)?.f;
        let residual = absolute_residual(&beta, &f);
        let converged = residual < RESIDUAL_TOL && fixed_point_ok(&beta, &f);
        Ok(BetaState { dim: p.dim, n: p.n, q: p.q, l: p.l, beta, residual, converged })
    }

    /// Damped Newton on `H(u) = u - ln F(e^u)`; `dH/du = I - diag(1/F) J diag(beta)`.
    fn newton_polish(&self, p: &Problem, mut u: Vec<f64>) -> Result<Vec<f64>> {
        let m = u.len();
        let h_of = |u: &[f64], f: &[f64]| -> Vec<f64> { u.iter().zip(f).map(|(ui, fi)| ui - fi.ln()).collect() };
        let norm = |h: &[f64]| h.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        for _ in 0..50 {
            let beta: Vec<f64> = u.iter().map(|v| v.exp()).collect();
            let ev = p.evaluate(&beta, true, &self.rule)?;
            let h = h_of(&u, &ev.f);
            let h_norm = norm(&h);
            if h_norm < 1e-15 {
                break;
            }
            let jac = ev.jac.unwrap();
            let dh = DMatrix::from_fn(m, m, |i, j| {
                let d = if i == j { 1.0 } else { 0.0 };
                d - jac[(i, j)] * beta[j] / ev.f[i]
            });
            let Some(step) = dh.lu().solve(&DVector::from_column_slice(&h)) else {
                break;
            };
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
                let tb: Vec<f64> = trial.iter().map(|v| v.exp()).collect();
                if let Ok(tev) = p.evaluate(&tb, false, &self.rule) {
                    if norm(&h_of(&trial, &tev.f)) < h_norm {
                        u = trial;
                        improved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Ok(u)
    }

    /// `int rho_beta`; divergent for `L = 0`, `q >= (N-2)/N`.
    pub fn mass(&self, state: &BetaState) -> Result<Extended> {
        let p = Problem::new(state.dim, state.n, state.q, state.l)?;
        check_beta(&p, &state.beta)?;
        p.mass(&state.beta, &self.rule)
    }

    fn solve_mass_at_zero(&self, dim: usize, n: usize, q: f64, init: Option<&[f64]>) -> Result<(BetaState, Extended)> {
        let state = self.solve_betas(dim, n, q, 0.0, init)?;
        if !state.converged {
            return Err(Error::Solver(format!(
                "fixed point did not converge at N = {dim}, lambda = {}, q = {q} (I = {:e})",
                2 * n,
                state.residual
            )));
        }
        let m = self.mass(&state)?;
        Ok((state, m))
    }

    /// `m(0)` along a grid of `alpha`, warm-starting each point from the previous
    /// converged one. Failed points are reported and skipped.
    pub fn mass_curve(&self, dim: usize, n: usize, alpha_grid: &[f64]) -> Vec<MassCurvePoint> {
        let lambda = 2.0 * n as f64;
        let mut warm: Option<Vec<f64>> = None;
        alpha_grid
            .iter()
            .map(|&alpha| {
                let failed = |q: f64| MassCurvePoint { alpha, q, m0: f64::NAN, residual: f64::NAN, converged: false };
                let Ok(q) = q_from_alpha(dim, lambda, alpha) else {
                    return failed(f64::NAN);
                };
                match self.solve_betas(dim, n, q, 0.0, warm.as_deref()) {
                    Ok(state) => {
                        let m0 = match self.mass(&state) {
                            Ok(Extended::Finite(m)) => m,
                            Ok(Extended::Divergent) => f64::INFINITY,
                            Err(_) => f64::NAN,
                        };
                        if state.converged {
                            warm = Some(state.beta.clone());
                        }
                        MassCurvePoint { alpha, q, m0, residual: state.residual, converged: state.converged }
                    }
                    Err(_) => failed(q),
                }
            })
            .collect()
    }

    /// Search window `(N/(N+lambda), min(N/(N+2), (N-2)/N, 2N/(2N+lambda)))` shrunk
    /// by [`WINDOW_MARGIN`]; `None` when empty. The last bound is `alpha = 0`.
    pub fn critical_window(dim: usize, n: usize) -> Option<(f64, f64)> {
        let nf = dim as f64;
        let lambda = 2.0 * n as f64;
        let lo = nf / (nf + lambda) + WINDOW_MARGIN;
        // alpha = 0: beyond it the fixed point leaves beta_1 > 0
        let alpha_zero = 2.0 * nf / (2.0 * nf + lambda);
        let hi = (nf / (nf + 2.0)).min((nf - 2.0) / nf).min(alpha_zero) - WINDOW_MARGIN;
        (lo < hi).then_some((lo, hi))
    }

    /// The exponent where `m(0) = 1`, below which mass concentrates at the origin.
    ///
    /// An 8-point pre-scan over the window locates the sign change of `m(0) - 1`;
    /// Brent's method refines it to `tol` in `q`. Returns `None` when `m(0) > 1`
    /// on the whole scan. A scan that drops below 1 without being increasing in
    /// `q` is rejected as [`Error::NonMonotone`].
    pub fn critical_q(&self, dim: usize, n: usize, tol: f64) -> Result<Option<CriticalExponent>> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        let Some((lo, hi)) = Self::critical_window(dim, n) else {
            return Ok(None);
        };
        let qs: Vec<f64> = (0..PRESCAN_POINTS)
            .map(|k| lo + (hi - lo) * k as f64 / (PRESCAN_POINTS - 1) as f64)
            .collect();
        let mut states = Vec::with_capacity(qs.len());
        let mut masses = Vec::with_capacity(qs.len());
        let mut warm: Option<Vec<f64>> = None;
        for &q in &qs {
            match self.solve_mass_at_zero(dim, n, q, warm.as_deref()) {
                Ok((state, m)) => {
                    warm = Some(state.beta.clone());
                    states.push(state);
                    masses.push(m.as_f64());
                }
                // keep the converged prefix when the top of the window fails
                Err(_) if states.len() >= 2 => break,
                Err(err) => return Err(err),
            }
        }
        if masses.iter().all(|&m| m > 1.0) {
            return Ok(None);
        }
        if masses.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotone(format!(
                "m(0) is not increasing in q on the pre-scan for N = {dim}, lambda = {}: {masses:?}",
                2 * n
            )));
        }
        let Some(k) = masses.windows(2).position(|w| w[0] <= 1.0 && w[1] > 1.0) else {
            return Err(Error::Solver(format!(
                "m(0) < 1 on the whole window for N = {dim}, lambda = {}; the crossing lies above q = {hi}",
                2 * n
            )));
        };
        let (qa, qb) = (qs[k], qs[k + 1]);
        let seed = states[k].beta.clone();
        let g = |q: f64| -> Result<f64> {
            let (_, m) = self.solve_mass_at_zero(dim, n, q, Some(&seed))?;
            Ok(m.as_f64() - 1.0)
        };
        let q = find_root_bracketed_fallible(g, qa, qb, &RootConfig { abs_tol: tol, ..self.root })?;
        Ok(Some(CriticalExponent { q, alpha: alpha_of(dim, 2.0 * n as f64, q) }))
    }

    /// Masses along an increasing grid of `L` with continuation.
    pub fn monotonicity_scan(&self, dim: usize, n: usize, q: f64, l_grid: &[f64]) -> Result<MonotonicityReport> {
        if l_grid.iter().any(|&l| !(l >= 0.0)) || l_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("L grid must be increasing and non-negative".into()));
        }
        let mut warm: Option<Vec<f64>> = None;
        let mut points = Vec::with_capacity(l_grid.len());
        for &l in l_grid {
            let point = match self.solve_betas(dim, n, q, l, warm.as_deref()) {
                Ok(state) if state.converged => {
                    warm = Some(state.beta.clone());
                    let mass = self.mass(&state)?.as_f64();
                    ScanPoint { l, mass, converged: true }
                }
                Ok(_) | Err(_) => ScanPoint { l, mass: f64::NAN, converged: false },
            };
            points.push(point);
        }
        let monotone =
            points.iter().all(|p| p.converged) && points.windows(2).all(|w| w[1].mass < w[0].mass);
        Ok(MonotonicityReport { points, monotone })
    }
}

fn check_beta(p: &Problem, beta: &[f64]) -> Result<()> {
    if beta.len() != p.n - 1 {
        return Err(Error::InvalidParameter(format!("expected {} coefficients, got {}", p.n - 1, beta.len())));
    }
    if beta.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(Error::InvalidParameter(format!("coefficients must be positive, got {beta:?}")));
    }
    Ok(())
}

pub fn fixed_point_map(dim: usize, n: usize, q: f64, l: f64, beta: &[f64]) -> Result<Vec<f64>> {
    EvenLambda::default().fixed_point_map(dim, n, q, l, beta)
}

pub fn jacobian_fixed_point(dim: usize, n: usize, q: f64, l: f64, beta: &[f64]) -> Result<DMatrix<f64>> {
    EvenLambda::default().jacobian_fixed_point(dim, n, q, l, beta)
}

pub fn residual_i(dim: usize, n: usize, q: f64, l: f64, beta: &[f64]) -> Result<f64> {
    EvenLambda::default().residual_i(dim, n, q, l, beta)
}

pub fn solve_betas(dim: usize, n: usize, q: f64, l: f64, init: Option<&[f64]>) -> Result<BetaState> {
    EvenLambda::default().solve_betas(dim, n, q, l, init)
}

pub fn mass_even(state: &BetaState) -> Result<Extended> {
    EvenLambda::default().mass(state)
}

pub fn mass_curve(dim: usize, n: usize, alpha_grid: &[f64]) -> Vec<MassCurvePoint> {
    EvenLambda::default().mass_curve(dim, n, alpha_grid)
}

pub fn critical_q_even(dim: usize, n: usize, tol: f64) -> Result<Option<CriticalExponent>> {
    EvenLambda::default().critical_q(dim, n, tol)
}

pub fn monotonicity_scan(dim: usize, n: usize, q: f64, l_grid: &[f64]) -> Result<MonotonicityReport> {
    EvenLambda::default().monotonicity_scan(dim, n, q, l_grid)
}
