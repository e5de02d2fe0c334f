//! General `lambda` at `L = 0`.
//!
//! The profile is written as `rho_f(r)^(q-1) = r^2 (1+r)^(lambda-2) f(r)` with
//! `f(r) = |P(r/(1+r))|^2` for a complex polynomial `P`. The Euler-Lagrange
//! equation becomes `f = Phi(f)` with
//!
//! ```text
//! Phi(f)(r) = a { S int C(r,s) f(s)^-e ds + (1 - S int w(s) f(s)^-e ds) t(r) },
//! ```
//!
//! `a = (1-q)/q`, `e = 1/(1-q)`, `S = |S^{N-1}|`, `w(s) = s^(N-1-2e) (1+s)^(-(lambda-2)e)`,
//! `t(r) = (r/(1+r))^(lambda-2)` and `C(r,s) = G(r,s) w(s)` with
//! `G(r,s) = (K(r,s) - s^lambda) / (r^2 (1+r)^(lambda-2))`.
//! The coefficients of `P` minimize the weighted squared distance between
//! `f^-e` and `Phi(f)^-e`.
//!
//! Since `Phi(f)(r) -> a` as `r -> inf` for every `f`, the gauge is fixed by
//! `P(1) = sqrt(a)`: the optimizer varies `Q` in `P(u) = sqrt(a) + (u - 1) Q(u)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::even_lambda::EvenLambda;
use crate::numerics::{find_root_bracketed_fallible, minimize_quasi_newton_with_grad, QuasiNewtonConfig, RootConfig, Termination};
use crate::params::{alpha_of, ProblemParams};
use crate::poly::{divide_by_u_minus_one, eval_complex, factor_positive};
use crate::quadrature::{Discretization, EndpointHints, ProfileDecay, QuadMode, QuadratureRule};
use crate::specfun::{kernel_k, kernel_minus_power, sphere_area, KernelEvalMethod};

/// Default polynomial degree.
pub const DEFAULT_DEGREE: usize = 10;
/// A solve counts as converged when `||rho_f - rho_Phi(f)||_1` is below this.
pub const DEFAULT_L1_THRESHOLD: f64 = 1e-4;
const PRESCAN_POINTS: usize = 8;
const WINDOW_MARGIN: f64 = 1e-4;

/// `P(u) = sum_m coeffs[m] u^m`; the profile uses `f = |P|^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyAnsatz {
    #[serde(serialize_with = "serialize_complex")]
    pub coeffs: Vec<Complex64>,
}

fn serialize_complex<S: serde::Serializer>(c: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(c.len()))?;
    for z in c {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl PolyAnsatz {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::InvalidParameter("P must not vanish identically".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `f` as a function of `u = r/(1+r)`.
    pub fn f_of_u(&self, u: f64) -> f64 {
        eval_complex(&self.coeffs, u).norm_sqr()
    }

    /// `f(r) = |P(r/(1+r))|^2`.
    pub fn f(&self, r: f64) -> f64 {
        self.f_of_u(r / (1.0 + r))
    }

    /// `P(u) = sqrt(a) + (u - 1) Q(u)` with `Q` given by interleaved real and
    /// imaginary parts.
    fn from_gauge(a: f64, x: &[f64]) -> Self {
        let d = x.len() / 2;
        let q: Vec<Complex64> = (0..d).map(|m| Complex64::new(x[2 * m], x[2 * m + 1])).collect();
        let mut c = vec![Complex64::new(0.0, 0.0); d + 1];
        c[0] = Complex64::new(a.sqrt(), 0.0);
        for (m, qm) in q.iter().enumerate() {
            c[m + 1] += qm;
            c[m] -= qm;
        }
        Self { coeffs: c }
    }

    /// Inverse of [`Self::from_gauge`] after rotating `P(1)` onto the positive
    /// real axis and rescaling so that `|P(1)| = sqrt(a)`; padded to `degree`.
    fn to_gauge(&self, a: f64, degree: usize) -> Vec<f64> {
        let p1 = eval_complex(&self.coeffs, 1.0);
        let scale = if p1.norm() > 0.0 { a.sqrt() / p1 } else { Complex64::new(1.0, 0.0) };
        let p: Vec<Complex64> = self.coeffs.iter().map(|c| c * scale).collect();
        let q = divide_by_u_minus_one(&p);
        let mut x = vec![0.0; 2 * degree];
        for (m, c) in q.iter().enumerate().take(degree) {
            x[2 * m] = c.re;
            x[2 * m + 1] = c.im;
        }
        x
    }

    /// The exact even-kernel profile `f(u) = a sum_i beta_i u^{2i-2} (1-u)^{2n-2i}`,
    /// `beta_n = 1`, factored as `|P|^2`.
    pub fn from_even(q: f64, beta: &[f64]) -> Result<Self> {
        let a = (1.0 - q) / q;
        let n = beta.len() + 1;
        let mut full = beta.to_vec();
        full.push(1.0);
        let deg = 2 * n - 2;
        let mut coeffs = vec![0.0; deg + 1];
        for (idx, b) in full.iter().enumerate() {
            let i = idx + 1;
            // u^{2i-2} (1-u)^{2n-2i}
            let k = 2 * n - 2 * i;
            let mut binom = 1.0;
            for j in 0..=k {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                coeffs[2 * i - 2 + j] += a * b * sign * binom;
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        Self::new(factor_positive(&coeffs)?)
    }
}

/// Converged or best-effort minimizer of the squared residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralSolution {
    pub params: ProblemParams,
    pub ansatz: PolyAnsatz,
    pub grid: QuadratureRule,
    pub l2_residual: f64,
    pub l1_error: f64,
    /// `int rho_f`, the part of the unit mass not at the origin.
    pub mass: f64,
    pub converged: bool,
    pub termination: Termination,
    pub iterations: usize,
    /// Residual at every accepted BFGS iterate.
    pub history: Vec<f64>,
}

impl GeneralSolution {
    pub fn density(&self, r: f64) -> Result<f64> {
        density_from_f(&self.params, &self.ansatz, r)
    }

    /// `rho ~ r^-2e` at 0 and `r^-lambda e` at infinity.
    pub fn decay(&self) -> ProfileDecay {
        let e = self.params.exponent();
        ProfileDecay { origin: 2.0 * e, infinity: self.params.lambda * e }
    }
}

/// `(r^2 (1+r)^(lambda-2) f(r))^(1/(q-1))`.
pub fn density_from_f(p: &ProblemParams, ansatz: &PolyAnsatz, r: f64) -> Result<f64> {
    let f = ansatz.f(r);
    if !(f > 0.0) || !(r > 0.0) {
        return Err(Error::Domain { function: "density_from_f", value: r });
    }
    let e = p.exponent();
    let log = 2.0 * r.ln() + (p.lambda - 2.0) * r.ln_1p() + f.ln();
    Ok((-e * log).exp())
}

fn weight(p: &ProblemParams, s: f64) -> f64 {
    let e = p.exponent();
    ((p.n() - 1.0 - 2.0 * e) * s.ln() - (p.lambda - 2.0) * e * s.ln_1p()).exp()
}

fn g_kernel(dim: usize, lambda: f64, r: f64, s: f64) -> Result<f64> {
    let num = kernel_minus_power(dim, lambda, r, s)?;
    Ok(num / (r * r * (lambda - 2.0).mul_add(r.ln_1p(), 0.0).exp()))
}

/// `C(r,s) = (K(r,s) - s^lambda) / (r^2 (1+r)^(lambda-2)) * w(s)`.
pub fn c_kernel(p: &ProblemParams, r: f64, s: f64) -> Result<f64> {
    if !(r > 0.0 && s > 0.0) {
        return Err(Error::Domain { function: "c_kernel", value: r.min(s) });
    }
    Ok(g_kernel(p.dim, p.lambda, r, s)? * weight(p, s))
}

/// Quadrature weights that depend on `q`.
struct Weights {
    e: f64,
    a: f64,
    /// For `int w f^-e` and the residuals.
    wm: Vec<f64>,
    /// For `int C f^-e`.
    wc: Vec<f64>,
}

/// Residuals and derived quantities for one ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnsatzDiagnostics {
    pub l2_residual: f64,
    pub l1_error: f64,
    pub mass: f64,
}

struct Forward {
    obj: f64,
    l1: f64,
    mass: f64,
    f: Vec<f64>,
    g: Vec<f64>,
    phi: Vec<f64>,
    pvals: Vec<Complex64>,
}

/// The discretized `Phi` map for fixed `(N, lambda)` and grid.
///
/// Holds the `q`-independent matrix `G(r_k, s_j)` on the nodes of the rule, so
/// scans over `q` reuse it.
pub struct GeneralLambda {
    pub dim: usize,
    pub lambda: f64,
    pub rule: QuadratureRule,
    pub bfgs: QuasiNewtonConfig,
    pub root: RootConfig,
    pub l1_threshold: f64,
    disc: Discretization,
    u: Vec<f64>,
    t: Vec<f64>,
    kernel: Vec<f64>,
}

impl GeneralLambda {
    pub fn new(dim: usize, lambda: f64, rule: QuadratureRule) -> Result<Self> {
        ProblemParams::new(dim, lambda, 0.5)?;
        let disc = Discretization::new(&rule)?;
        let nodes = &disc.nodes;
        let n = nodes.len();
        let mut kernel = vec![0.0; n * n];
        kernel
            .par_chunks_mut(n)
            .zip(nodes.par_iter())
            .try_for_each(|(row, &r)| -> Result<()> {
                for (out, &s) in row.iter_mut().zip(nodes) {
                    *out = g_kernel(dim, lambda, r, s)?;
                }
                Ok(())
            })?;
        let u = nodes.iter().map(|r| r / (1.0 + r)).collect();
        let t = nodes.iter().map(|r| (r / (1.0 + r)).powf(lambda - 2.0)).collect();
        Ok(Self {
            dim,
            lambda,
            rule,
            bfgs: QuasiNewtonConfig { grad_tol: 1e-16, step_tol: 1e-16, max_iter: 4000, fd_step: 1e-6 },
            root: RootConfig::default(),
            l1_threshold: DEFAULT_L1_THRESHOLD,
            disc,
            u,
            t,
            kernel,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.disc.nodes
    }

    fn params(&self, q: f64) -> Result<ProblemParams> {
        ProblemParams::new(self.dim, self.lambda, q)
    }

    fn weights(&self, q: f64) -> Result<Weights> {
        let p = self.params(q)?;
        let e = p.exponent();
        let nf = p.n();
        let (base_m, base_c) = if self.rule.mode == QuadMode::TransformedGauss {
            let origin = nf - 2.0 * e;
            let inf_m = self.lambda * e - nf + 1.0;
            let inf_c = self.lambda * e - nf - self.lambda + 3.0;
            if !(origin > 0.0 && inf_c > 1.0 && inf_m > 1.0) {
                return Err(Error::Divergent(format!(
                    "the integrals of Phi diverge for N = {}, lambda = {}, q = {q}",
                    self.dim, self.lambda
                )));
            }
            (
                self.disc.weights_for(EndpointHints::new(origin, inf_m)),
                self.disc.weights_for(EndpointHints::new(origin, inf_c)),
            )
        } else {
            (self.disc.weights.clone(), self.disc.weights.clone())
        };
        let w: Vec<f64> = self.disc.nodes.iter().map(|&s| weight(&p, s)).collect();
        Ok(Weights {
            e,
            a: (1.0 - q) / q,
            wm: base_m.iter().zip(&w).map(|(b, w)| b * w).collect(),
            wc: base_c.iter().zip(&w).map(|(b, w)| b * w).collect(),
        })
    }

    fn forward_from_pvals(&self, w: &Weights, pvals: Vec<Complex64>) -> Result<Forward> {
        let n = self.u.len();
        let s_area = sphere_area(self.dim);
        let f: Vec<f64> = pvals.iter().map(|p| p.norm_sqr()).collect();
        if f.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::NonFiniteObjective("P vanishes on the grid".into()));
        }
        let g: Vec<f64> = f.iter().map(|v| v.powf(-w.e)).collect();
        let mass = s_area * w.wm.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        let wg: Vec<f64> = w.wc.iter().zip(&g).map(|(a, b)| a * b).collect();
        let phi: Vec<f64> = (0..n)
            .map(|k| {
                let row = &self.kernel[k * n..(k + 1) * n];
                let conv: f64 = row.iter().zip(&wg).map(|(a, b)| a * b).sum();
                w.a * (s_area * conv + (1.0 - mass) * self.t[k])
            })
            .collect();
        if phi.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::NonFiniteObjective("Phi(f) is not positive on the grid".into()));
        }
        let mut obj = 0.0;
        let mut l1 = 0.0;
        for k in 0..n {
            let d = g[k] - phi[k].powf(-w.e);
            obj += w.wm[k] * d * d;
            l1 += w.wm[k] * d.abs();
        }
        Ok(Forward { obj, l1: s_area * l1, mass, f, g, phi, pvals })
    }

    fn forward(&self, w: &Weights, ansatz: &PolyAnsatz) -> Result<Forward> {
        let pvals = self.u.iter().map(|&u| eval_complex(&ansatz.coeffs, u)).collect();
        self.forward_from_pvals(w, pvals)
    }

    /// Gradient of the squared residual with respect to the gauge variables.
    fn gradient(&self, w: &Weights, fw: &Forward, degree: usize) -> Vec<f64> {
        let n = self.u.len();
        let s_area = sphere_area(self.dim);
        let e = w.e;
        // d obj / d g_j = 2 wm_j D_j + sum_k v_k dPhi_k/dg_j,  v_k = 2 wm_k D_k e Phi_k^(-e-1)
        let d: Vec<f64> = (0..n).map(|k| fw.g[k] - fw.phi[k].powf(-e)).collect();
        let v: Vec<f64> = (0..n).map(|k| 2.0 * w.wm[k] * d[k] * e * fw.phi[k].powf(-e - 1.0)).collect();
        let tv: f64 = self.t.iter().zip(&v).map(|(a, b)| a * b).sum();
        let mut gt_v = vec![0.0; n];
        for (row, &vk) in self.kernel.chunks_exact(n).zip(&v) {
            for (acc, gkj) in gt_v.iter_mut().zip(row) {
                *acc += vk * gkj;
            }
        }
        let mut grad = vec![0.0; 2 * degree];
        for j in 0..n {
            let dg = 2.0 * w.wm[j] * d[j] + w.a * s_area * (w.wc[j] * gt_v[j] - w.wm[j] * tv);
            // g = f^-e
            let df = -e * fw.g[j] / fw.f[j] * dg;
            let u = self.u[j];
            let p = fw.pvals[j];
            let mut basis = 2.0 * (u - 1.0) * df;
            for m in 0..degree {
                grad[2 * m] += basis * p.re;
                grad[2 * m + 1] += basis * p.im;
                basis *= u;
            }
        }
        grad
    }

    /// Residuals and mass of a given ansatz at `q`.
    pub fn diagnostics(&self, q: f64, ansatz: &PolyAnsatz) -> Result<AnsatzDiagnostics> {
        let w = self.weights(q)?;
        let fw = self.forward(&w, ansatz)?;
        Ok(AnsatzDiagnostics { l2_residual: fw.obj, l1_error: fw.l1, mass: fw.mass })
    }

    /// `Phi(f)` at arbitrary radii, integrating over the rule's nodes.
    pub fn phi_at(&self, q: f64, ansatz: &PolyAnsatz, radii: &[f64]) -> Result<Vec<f64>> {
        let w = self.weights(q)?;
        let fw = self.forward(&w, ansatz)?;
        let s_area = sphere_area(self.dim);
        radii
            .iter()
            .map(|&r| {
                let mut conv = 0.0;
                for (j, &s) in self.disc.nodes.iter().enumerate() {
                    conv += g_kernel(self.dim, self.lambda, r, s)? * w.wc[j] * fw.g[j];
                }
                let t = (r / (1.0 + r)).powf(self.lambda - 2.0);
                Ok(w.a * (s_area * conv + (1.0 - fw.mass) * t))
            })
            .collect()
    }

    /// Gauge variables of the gradient, exposed for finite-difference checks.
    pub fn objective_and_gradient(&self, q: f64, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let w = self.weights(q)?;
        let ansatz = PolyAnsatz::from_gauge(w.a, x);
        let fw = self.forward(&w, &ansatz)?;
        let grad = self.gradient(&w, &fw, x.len() / 2);
        Ok((fw.obj, grad))
    }

    /// Seed for a cold start: the exact even-kernel profile for the nearest even
    /// `lambda` at the same `q` when that solve converges, else
    /// `f(u) = a (u^2 + (1-u)^2)`.
    pub fn seed(&self, q: f64) -> PolyAnsatz {
        let n = ((self.lambda / 2.0).round() as usize).max(1);
        let even = EvenLambda::default();
        if let Ok(state) = even.solve_betas(self.dim, n, q, 0.0, None) {
            if state.converged {
                if let Ok(p) = PolyAnsatz::from_even(q, &state.beta) {
                    return p;
                }
            }
        }
        let s = ((1.0 - q) / q).sqrt();
        PolyAnsatz { coeffs: vec![Complex64::new(0.0, s), Complex64::new(s, -s)] }
    }

    /// Minimizes the squared residual over polynomials of the given degree.
    pub fn solve(&self, q: f64, degree: usize, init: Option<&PolyAnsatz>) -> Result<GeneralSolution> {
        let params = self.params(q)?;
        let w = self.weights(q)?;
        let start = match init {
            Some(p) => p.clone(),
            None => self.seed(q),
        };
        let x0 = start.to_gauge(w.a, degree);
        let obj = |x: &[f64]| -> Result<f64> {
            let ansatz = PolyAnsatz::from_gauge(w.a, x);
            match self.forward(&w, &ansatz) {
                Ok(fw) => Ok(fw.obj),
                // zeros of P and non-positive Phi are walls for the line search
                Err(Error::NonFiniteObjective(_)) => Ok(f64::INFINITY),
                Err(err) => Err(err),
            }
        };
        let grad = |x: &[f64]| -> Result<Vec<f64>> {
            let ansatz = PolyAnsatz::from_gauge(w.a, x);
            let fw = self.forward(&w, &ansatz)?;
            Ok(self.gradient(&w, &fw, degree))
        };
        let (x, termination, iterations, history) = if degree == 0 {
            (Vec::new(), Termination::GradientTolerance, 0, vec![obj(&[])?])
        } else {
            if !obj(&x0)?.is_finite() {
                return Err(Error::Solver("the initial polynomial vanishes on the grid".into()));
            }
            let min = minimize_quasi_newton_with_grad(obj, grad, &x0, &self.bfgs)?;
            (min.x, min.termination, min.iterations, min.history)
        };
        let ansatz = PolyAnsatz::from_gauge(w.a, &x);
        let fw = self.forward(&w, &ansatz)?;
        Ok(GeneralSolution {
            params,
            ansatz,
            grid: self.rule,
            l2_residual: fw.obj,
            l1_error: fw.l1,
            mass: fw.mass,
            converged: fw.l1 <= self.l1_threshold,
            termination,
            iterations,
            history,
        })
    }

    /// Window `(N/(N+lambda), min((N-2)/N, 2N/(2N+lambda)))` shrunk by `1e-4`.
    pub fn critical_window(&self) -> Option<(f64, f64)> {
        let nf = self.dim as f64;
        let lo = nf / (nf + self.lambda) + WINDOW_MARGIN;
        let hi = ((nf - 2.0) / nf).min(2.0 * nf / (2.0 * nf + self.lambda)).min(nf / (nf + 2.0)) - WINDOW_MARGIN;
        (lo < hi).then_some((lo, hi))
    }

    /// The `q` where the mass of the solution crosses 1.
    ///
    /// Pre-scans 8 points of the window with continuation in `q`, then refines
    /// the sign change with Brent's method. `init` warm-starts the first point.
    pub fn critical_q(&self, degree: usize, tol: f64, init: Option<&PolyAnsatz>) -> Result<CriticalScan> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        let Some((lo, hi)) = self.critical_window() else {
            return Ok(CriticalScan { crossing: None, l1_error: 0.0, converged: true, first: None });
        };
        let qs: Vec<f64> =
            (0..PRESCAN_POINTS).map(|k| lo + (hi - lo) * k as f64 / (PRESCAN_POINTS - 1) as f64).collect();
        let mut sols: Vec<GeneralSolution> = Vec::new();
        let mut warm = init.cloned();
        for &q in &qs {
            let sol = self.solve(q, degree, warm.as_ref());
            match sol {
                Ok(s) if s.converged => {
                    warm = Some(s.ansatz.clone());
                    sols.push(s);
                }
                // keep the converged prefix when the top of the window fails
                _ if sols.len() >= 2 => break,
                Ok(s) => {
                    return Err(Error::Solver(format!(
                        "general solve did not converge at q = {q}: l1 error {:e}",
                        s.l1_error
                    )))
                }
                Err(err) => return Err(err),
            }
        }
        let masses: Vec<f64> = sols.iter().map(|s| s.mass).collect();
        let mut worst = sols.iter().map(|s| s.l1_error).fold(0.0, f64::max);
        let first = sols.first().map(|s| s.ansatz.clone());
        if masses.iter().all(|&m| m > 1.0) {
            return Ok(CriticalScan { crossing: None, l1_error: worst, converged: true, first });
        }
        if masses.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotone(format!(
                "mass is not increasing in q on the pre-scan for N = {}, lambda = {}: {masses:?}",
                self.dim, self.lambda
            )));
        }
        let Some(k) = masses.windows(2).position(|w| w[0] <= 1.0 && w[1] > 1.0) else {
            return Err(Error::Solver(format!(
                "mass < 1 on the whole window for N = {}, lambda = {}",
                self.dim, self.lambda
            )));
        };
        let seed = sols[k].ansatz.clone();
        let mut all_converged = true;
        let mut last_l1 = 0.0;
        let g = |q: f64| -> Result<f64> {
            let s = self.solve(q, degree, Some(&seed))?;
            all_converged &= s.converged;
            last_l1 = s.l1_error;
            worst = worst.max(s.l1_error);
            Ok(s.mass - 1.0)
        };
        let q = find_root_bracketed_fallible(g, qs[k], qs[k + 1], &RootConfig { abs_tol: tol, ..self.root })?;
        let _ = last_l1;
        Ok(CriticalScan {
            crossing: Some(CriticalPoint { q, alpha: alpha_of(self.dim, self.lambda, q) }),
            l1_error: worst,
            converged: all_converged,
            first,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub q: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalScan {
    /// `None` when the mass stays above 1 on the window.
    pub crossing: Option<CriticalPoint>,
    /// Largest l1 error over all solves used.
    pub l1_error: f64,
    /// Every solve used met the l1 threshold.
    pub converged: bool,
    /// Solution at the lowest scanned `q`, for continuation in `lambda`.
    #[serde(skip)]
    pub first: Option<PolyAnsatz>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalCurvePoint {
    pub lambda: f64,
    pub crossing: Option<CriticalPoint>,
    pub l1_error: f64,
    pub converged: bool,
}

/// `q_N(lambda)` along a grid of `lambda`, warm-starting each from the previous one.
pub fn critical_curve(dim: usize, lambdas: &[f64], degree: usize, rule: QuadratureRule, tol: f64) -> Result<Vec<CriticalCurvePoint>> {
    let mut warm: Option<PolyAnsatz> = None;
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let op = GeneralLambda::new(dim, lambda, rule)?;
        let scan = op.critical_q(degree, tol, warm.as_ref()).or_else(|_| op.critical_q(degree, tol, None))?;
        if scan.first.is_some() {
            warm = scan.first.clone();
        }
        out.push(CriticalCurvePoint { lambda, crossing: scan.crossing, l1_error: scan.l1_error, converged: scan.converged });
    }
    Ok(out)
}

/// `Phi(f)` at the given radii, with the integrals taken on `quad`.
pub fn phi_map(p: &ProblemParams, ansatz: &PolyAnsatz, radii: &[f64], quad: &QuadratureRule) -> Result<Vec<f64>> {
    GeneralLambda::new(p.dim, p.lambda, *quad)?.phi_at(p.q, ansatz, radii)
}

/// `int w (f^-e - Phi(f)^-e)^2` on the nodes of `quad`.
pub fn residual_l2(p: &ProblemParams, ansatz: &PolyAnsatz, quad: &QuadratureRule) -> Result<f64> {
    Ok(GeneralLambda::new(p.dim, p.lambda, *quad)?.diagnostics(p.q, ansatz)?.l2_residual)
}

/// `||rho_f - rho_Phi(f)||_1 = S int w |f^-e - Phi(f)^-e|` on the nodes of `quad`.
pub fn l1_error(p: &ProblemParams, ansatz: &PolyAnsatz, quad: &QuadratureRule) -> Result<f64> {
    Ok(GeneralLambda::new(p.dim, p.lambda, *quad)?.diagnostics(p.q, ansatz)?.l1_error)
}

/// Solves at `L = 0` with a polynomial of the given degree on `grid`
/// (1000 points on [0, 20] is `QuadratureRule::reference_riemann()`).
pub fn solve_general(p: &ProblemParams, degree: usize, grid: QuadratureRule) -> Result<GeneralSolution> {
    GeneralLambda::new(p.dim, p.lambda, grid)?.solve(p.q, degree, None)
}

pub fn mass_general(sol: &GeneralSolution) -> f64 {
    sol.mass
}

pub fn critical_q_general(dim: usize, lambda: f64, tol: f64) -> Result<Option<CriticalPoint>> {
    let op = GeneralLambda::new(dim, lambda, QuadratureRule::reference_riemann())?;
    Ok(op.critical_q(DEFAULT_DEGREE, tol, None)?.crossing)
}

/// `-(1/(1-q)) int rho^q + M int |x|^lambda rho + (1/2) int int rho(x) |x-y|^lambda rho(y)`
/// for a radial density, the double integral reduced with `K_{N,lambda}`.
pub fn free_energy_radial<F: Fn(f64) -> f64 + Sync>(
    p: &ProblemParams,
    density: F,
    decay: ProfileDecay,
    atom: f64,
    quad: &QuadratureRule,
) -> Result<f64> {
    let disc = Discretization::new(quad)?;
    let (dim, lambda, q) = (p.dim, p.lambda, p.q);
    let s_area = sphere_area(dim);
    let nm1 = dim as i32 - 1;
    let rho: Vec<f64> = disc.nodes.iter().map(|&r| density(r)).collect();
    if rho.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::NonFiniteIntegrand { at: f64::NAN });
    }
    let check = |h: EndpointHints| -> Result<Vec<f64>> {
        if quad.mode == QuadMode::TransformedGauss && !(h.origin > 0.0 && h.infinity > 1.0) {
            return Err(Error::Divergent(format!("free energy integrand with endpoint powers {h:?}")));
        }
        Ok(disc.weights_for(h))
    };
    let w_q = check(EndpointHints::for_profile(dim, 0.0, q, decay))?;
    let w_l = check(EndpointHints::for_profile(dim, lambda, 1.0, decay))?;
    // inner and outer integrands of the interaction both behave like r^(N-1) rho
    // at 0 and r^(N-1+lambda) rho at infinity
    let h0 = EndpointHints::for_profile(dim, 0.0, 1.0, decay);
    let hl = EndpointHints::for_profile(dim, lambda, 1.0, decay);
    let w_k = check(EndpointHints::new(h0.origin, hl.infinity))?;

    let entropy: f64 = disc
        .nodes
        .iter()
        .zip(&rho)
        .zip(&w_q)
        .map(|((r, v), w)| if *v > 0.0 { w * r.powi(nm1) * v.powf(q) } else { 0.0 })
        .sum();
    let moment: f64 = disc.nodes.iter().zip(&rho).zip(&w_l).map(|((r, v), w)| w * r.powf(lambda + nm1 as f64) * v).sum();
    let mass_w: Vec<f64> = disc.nodes.iter().zip(&rho).zip(&w_k).map(|((r, v), w)| w * r.powi(nm1) * v).collect();
    let method = KernelEvalMethod::preferred(dim, lambda);
    let pair: f64 = disc
        .nodes
        .par_iter()
        .zip(mass_w.par_iter())
        .map(|(&r, &wr)| -> Result<f64> {
            if wr == 0.0 {
                return Ok(0.0);
            }
            let mut acc = 0.0;
            for (&s, &ws) in disc.nodes.iter().zip(&mass_w) {
                if ws != 0.0 {
                    acc += ws * kernel_k(dim, lambda, r, s, method)?;
                }
            }
            Ok(wr * acc)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a + b))?;
    Ok(-s_area * entropy / (1.0 - q) + atom * s_area * moment + 0.5 * s_area * s_area * pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{even_lambda, quartic};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn quartic_ansatz(q: f64, b: f64) -> PolyAnsatz {
        PolyAnsatz::from_even(q, &[b]).unwrap()
    }

    #[test]
    fn even_factorization_matches_closed_form() {
        let (q, b) = (0.6, 1.7);
        let a = (1.0 - q) / q;
        let p = quartic_ansatz(q, b);
        assert_eq!(p.degree(), 1);
        for r in [0.01, 0.5, 2.0, 50.0] {
            let want = a * (r * r + b) / (1.0 + r).powi(2);
            assert!(rel(p.f(r), want) < 1e-13);
        }
    }

    #[test]
    fn density_asymptotics() {
        let (dim, q) = (6usize, 0.6);
        let b = quartic::solve_b(dim, q, 0.0).unwrap();
        let p = ProblemParams::new(dim, 4.0, q).unwrap();
        let ansatz = quartic_ansatz(q, b);
        let e = p.exponent();
        let slope = |r1: f64, r2: f64| {
            let d1 = density_from_f(&p, &ansatz, r1).unwrap();
            let d2 = density_from_f(&p, &ansatz, r2).unwrap();
            (d2.ln() - d1.ln()) / (r2.ln() - r1.ln())
        };
        assert!(rel(slope(1e-5, 1e-4), -2.0 * e) < 1e-3);
        assert!(rel(slope(1e5, 1e6), -4.0 * e) < 1e-3);
        let sol = quartic::solve_minimizer_quartic(dim, q, true).unwrap();
        for r in [1e-3, 0.7, 10.0, 1e4] {
            let d = density_from_f(&p, &ansatz, r).unwrap();
            assert!(rel(d, sol.density(r).as_f64()) < 1e-12);
        }
        let r = 1e4;
        let amp = density_from_f(&p, &ansatz, r).unwrap() * r.powf(4.0 * e);
        assert!(rel(amp, p.amplitude()) < 1e-3);

        let p2 = ProblemParams::new(3, 2.0, 0.4).unwrap();
        let c = PolyAnsatz::new(vec![Complex64::new(0.0, 1.5)]).unwrap();
        let d = density_from_f(&p2, &c, 2.0).unwrap();
        assert!(rel(d, (4.0 * 2.25_f64).powf(1.0 / (0.4 - 1.0))) < 1e-14);
        let zero = PolyAnsatz::new(vec![Complex64::new(-0.5, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert!(density_from_f(&p2, &zero, 1.0).is_err());
    }

    #[test]
    fn c_kernel_examples() {
        let p = ProblemParams::new(5, 2.0, 0.5).unwrap();
        for (r, s) in [(0.1, 3.0), (2.0, 0.5), (7.0, 7.0)] {
            assert!(rel(c_kernel(&p, r, s).unwrap(), weight(&p, s)) < 1e-12);
        }
        let p = ProblemParams::new(5, 5.3, 0.5).unwrap();
        let a = c_kernel(&p, 1e-7, 0.8).unwrap();
        let b = c_kernel(&p, 1e-6, 0.8).unwrap();
        assert!(rel(a, b) < 1e-5);
        for r in [0.1, 1.0, 4.0] {
            for s in [0.2, 1.0, 9.0] {
                assert!(c_kernel(&p, r, s).unwrap() > 0.0);
            }
        }
    }

    fn gauss() -> QuadratureRule {
        QuadratureRule::default()
    }

    #[test]
    fn exact_quartic_fixed_point() {
        let (dim, q) = (6usize, 0.6);
        let b = quartic::solve_b(dim, q, 0.0).unwrap();
        let ansatz = quartic_ansatz(q, b);
        let p = ProblemParams::new(dim, 4.0, q).unwrap();
        let radii = [0.01, 0.3, 1.0, 3.0, 30.0];
        let phi = phi_map(&p, &ansatz, &radii, &gauss()).unwrap();
        for (r, v) in radii.iter().zip(&phi) {
            assert!((v - ansatz.f(*r)).abs() < 1e-6, "r = {r}");
        }
        let op = GeneralLambda::new(dim, 4.0, gauss()).unwrap();
        let d = op.diagnostics(q, &ansatz).unwrap();
        assert!(d.l2_residual < 1e-10);
        assert!(d.l1_error < 1e-8);
        assert!(rel(d.mass, 0.75) < 1e-8);
    }

    #[test]
    fn atom_prefactor_at_concentrated_solution() {
        let (dim, q) = (6usize, 0.55);
        let b = quartic::solve_b(dim, q, 0.0).unwrap();
        let op = GeneralLambda::new(dim, 4.0, gauss()).unwrap();
        let d = op.diagnostics(q, &quartic_ansatz(q, b)).unwrap();
        assert!((1.0 - d.mass - 0.785_714_285_714_285_7).abs() < 1e-8);
    }

    #[test]
    fn gauge_invariance() {
        let (dim, lambda, q) = (5usize, 5.5, 0.52);
        let op = GeneralLambda::new(dim, lambda, QuadratureRule::uniform_riemann(200, 20.0)).unwrap();
        let base = PolyAnsatz::new(vec![Complex64::new(0.7, 0.2), Complex64::new(-0.1, 0.3), Complex64::new(0.4, 0.0)]).unwrap();
        let rot = Complex64::from_polar(1.0, 0.83);
        let rotated = PolyAnsatz::new(base.coeffs.iter().map(|c| c * rot).collect()).unwrap();
        let a = op.diagnostics(q, &base).unwrap();
        let b = op.diagnostics(q, &rotated).unwrap();
        assert!(rel(a.l2_residual, b.l2_residual) < 1e-12);
        assert!(rel(a.mass, b.mass) < 1e-12);
        assert!(rel(a.l1_error, b.l1_error) < 1e-12);
    }

    #[test]
    fn jensen_bound() {
        let (dim, lambda, q) = (5usize, 6.5, 0.5);
        let op = GeneralLambda::new(dim, lambda, QuadratureRule::uniform_riemann(300, 20.0)).unwrap();
        let w = op.weights(q).unwrap();
        let wsum: f64 = w.wm.iter().sum();
        let s_area = sphere_area(dim);
        for coeffs in [
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.2, 0.5)],
            vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4), Complex64::new(0.9, 0.0)],
        ] {
            let d = op.diagnostics(q, &PolyAnsatz::new(coeffs).unwrap()).unwrap();
            assert!(d.l1_error <= s_area * (d.l2_residual * wsum).sqrt() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let op = GeneralLambda::new(5, 5.5, QuadratureRule::uniform_riemann(200, 20.0)).unwrap();
        let q = 0.52;
        let x = [0.3, -0.2, 0.1, 0.05, -0.02, 0.03];
        let (_, g) = op.objective_and_gradient(q, &x).unwrap();
        let obj = |x: &[f64]| op.objective_and_gradient(q, x).map(|v| v.0);
        let fd = crate::numerics::fd_gradient(&obj, &x, 1e-6).unwrap();
        let scale = g.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn lambda_two_constant_is_exact() {
        let p = ProblemParams::new(4, 2.0, 0.45).unwrap();
        let sol = solve_general(&p, 0, QuadratureRule::reference_riemann()).unwrap();
        assert!(sol.l2_residual < 1e-10);
        assert!(sol.l1_error < 1e-8);
    }

    #[test]
    fn recovers_quartic_mass() {
        let p = ProblemParams::new(6, 4.0, 0.6).unwrap();
        let sol = solve_general(&p, 1, gauss()).unwrap();
        assert!(sol.converged);
        assert!(sol.l1_error < 1e-8, "{}", sol.l1_error);
        assert!((sol.mass - 0.75).abs() < 1e-4, "{}", sol.mass);
    }

    #[test]
    fn history_is_monotone() {
        let p = ProblemParams::new(5, 5.0, 0.5).unwrap();
        let sol = solve_general(&p, 4, QuadratureRule::uniform_riemann(300, 20.0)).unwrap();
        assert!(sol.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn even_seed_reaches_exact_solution() {
        let (dim, n) = (4usize, 3usize);
        let q = 0.45;
        let state = even_lambda::solve_betas(dim, n, q, 0.0, None).unwrap();
        let ansatz = PolyAnsatz::from_even(q, &state.beta).unwrap();
        let op = GeneralLambda::new(dim, 6.0, gauss()).unwrap();
        let d = op.diagnostics(q, &ansatz).unwrap();
        assert!(d.l1_error < 1e-8, "{}", d.l1_error);
        let m = even_lambda::mass_even(&state).unwrap().as_f64();
        assert!(rel(d.mass, m) < 1e-8);
    }

    #[test]
    fn free_energy_matches_quartic() {
        let (dim, q) = (10usize, 0.73);
        let p = ProblemParams::new(dim, 4.0, q).unwrap();
        let sol = quartic::solve_minimizer_quartic(dim, q, false).unwrap();
        let decay = quartic::quartic_decay(q, 0.0);
        let dens = |r: f64| sol.density(r).as_f64();
        let fq = quartic::free_energy_quartic(dens, decay, dim, q).unwrap();
        let fr = free_energy_radial(&p, dens, decay, sol.atom, &gauss()).unwrap();
        assert!(rel(fr, fq) < 1e-8, "{fr} vs {fq}");
        let zero = free_energy_radial(&p, |_| 0.0, decay, 1.0, &gauss()).unwrap();
        assert_eq!(zero, 0.0);
    }
}
