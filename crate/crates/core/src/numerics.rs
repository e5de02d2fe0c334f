//! Bracketed root finding (Brent) and BFGS minimization with an Armijo
//! backtracking line search.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootConfig {
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, max_iter: 200 }
    }
}

impl RootConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.max_iter < 10 {
            return Err(Error::InvalidParameter(format!("invalid root-finder configuration {self:?}")));
        }
        Ok(())
    }
}

/// Root of `f` in `[a, b]` by Brent's method; `f(a)` and `f(b)` must differ in sign.
pub fn find_root_bracketed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &RootConfig) -> Result<f64> {
    find_root_bracketed_fallible(|x| Ok(f(x)), a, b, cfg)
}

/// [`find_root_bracketed`] for functions whose evaluation can fail.
pub fn find_root_bracketed_fallible<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &RootConfig,
) -> Result<f64> {
    cfg.validate()?;
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::InvalidBracket { a, b, fa, fb });
    }
    // b is the best estimate, c the opposite end of the bracket, a the previous b.
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..cfg.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 0.5 * cfg.abs_tol.max(4.0 * f64::EPSILON * b.abs());
        let m = 0.5 * (c - b);
        if fb == 0.0 || (c - b).abs() <= 2.0 * tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                (s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0)), (qa - 1.0) * (r - 1.0) * (s - 1.0))
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
        if !fb.is_finite() {
            return Err(Error::NonFiniteObjective(format!("root function at {b}")));
        }
    }
    let (lo, hi) = if b < c { (b, c) } else { (c, b) };
    Err(Error::RootNonConvergence { iterations: cfg.max_iter, lo, hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiNewtonConfig {
    pub grad_tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
    /// Relative step for central finite differences.
    pub fd_step: f64,
}

impl Default for QuasiNewtonConfig {
    fn default() -> Self {
        Self { grad_tol: 1e-10, step_tol: 1e-14, max_iter: 500, fd_step: 1e-7 }
    }
}

impl QuasiNewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.grad_tol > 0.0 && self.step_tol > 0.0 && self.fd_step > 0.0;
        if !positive || self.max_iter < 50 {
            return Err(Error::InvalidParameter(format!("invalid BFGS configuration {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    LineSearchFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub termination: Termination,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Objective value at every accepted iterate, starting with `x0`.
    pub history: Vec<f64>,
}

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

/// Central finite-difference gradient with step `h * max(1, |x_i|)`.
pub fn fd_gradient<F: Fn(&[f64]) -> Result<f64>>(obj: &F, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut xp = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let step = h * x[i].abs().max(1.0);
        xp[i] = x[i] + step;
        let fp = obj(&xp)?;
        xp[i] = x[i] - step;
        let fm = obj(&xp)?;
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    Ok(g)
}

/// Largest relative deviation between an analytic gradient and central
/// finite differences at `x`.
pub fn gradient_check<F, G>(obj: &F, grad: &G, x: &[f64], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let g = grad(x)?;
    let fd = fd_gradient(obj, x, h)?;
    let scale = g.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    Ok(g.iter().zip(&fd).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max))
}

/// BFGS with finite-difference gradients.
pub fn minimize_quasi_newton<F: Fn(&[f64]) -> Result<f64>>(obj: F, x0: &[f64], cfg: &QuasiNewtonConfig) -> Result<Minimum> {
    let h = cfg.fd_step;
    minimize_quasi_newton_with_grad(&obj, |x: &[f64]| fd_gradient(&obj, x, h), x0, cfg)
}

/// BFGS with a caller-supplied gradient.
///
/// The objective may return `+inf` to reject a trial point (the line search
/// backtracks); `NaN` aborts with an error.
pub fn minimize_quasi_newton_with_grad<F, G>(obj: F, grad: G, x0: &[f64], cfg: &QuasiNewtonConfig) -> Result<Minimum>
where
    F: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = obj(&x)?;
    if !fx.is_finite() {
        return Err(Error::NonFiniteObjective(format!("initial point {x:?}")));
    }
    let mut g = grad(&x)?;
    check_finite(&g, "gradient")?;
    let mut hinv = identity(n);
    let mut fresh = true;
    let mut history = vec![fx];
    let norm_inf = |v: &[f64]| v.iter().map(|a| a.abs()).fold(0.0, f64::max);

    let finish = |x: Vec<f64>, fx: f64, g: &[f64], term: Termination, it: usize, history: Vec<f64>| Minimum {
        x,
        value: fx,
        converged: matches!(term, Termination::GradientTolerance | Termination::StepTolerance),
        termination: term,
        iterations: it,
        grad_norm: norm_inf(g),
        history,
    };

    for it in 0..cfg.max_iter {
        if norm_inf(&g) < cfg.grad_tol {
            return Ok(finish(x, fx, &g, Termination::GradientTolerance, it, history));
        }
        let mut p = mat_vec(&hinv, &g);
        p.iter_mut().for_each(|v| *v = -*v);
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            hinv = identity(n);
            fresh = true;
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
        }
        let accepted = line_search(&obj, &x, fx, &p, slope)?;
        let (t, f_new) = match accepted {
            Some(v) => v,
            None if !fresh => {
                // retry along steepest descent before giving up
                hinv = identity(n);
                fresh = true;
                continue;
            }
            None => return Ok(finish(x, fx, &g, Termination::LineSearchFailure, it, history)),
        };
        let s: Vec<f64> = p.iter().map(|v| t * v).collect();
        let x_new: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
        let g_new = grad(&x_new)?;
        check_finite(&g_new, "gradient")?;
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        x = x_new;
        fx = f_new;
        g = g_new;
        history.push(fx);
        let step_norm = dot(&s, &s).sqrt();
        if step_norm < cfg.step_tol {
            let term = if norm_inf(&g) < cfg.grad_tol {
                Termination::GradientTolerance
            } else {
                Termination::StepTolerance
            };
            return Ok(finish(x, fx, &g, term, it + 1, history));
        }
        let ys = dot(&y, &s);
        let yy = dot(&y, &y);
        if ys <= 1e-12 * yy.sqrt() * step_norm || !(ys.is_finite() && yy > 0.0) {
            hinv = identity(n);
            fresh = true;
            continue;
        }
        if fresh {
            let scale = ys / yy;
            hinv.iter_mut().flatten().for_each(|v| *v *= scale);
            fresh = false;
        }
        bfgs_update(&mut hinv, &s, &y, ys);
    }
    Ok(finish(x, fx, &g, Termination::MaxIterations, cfg.max_iter, history))
}

/// Armijo backtracking from a unit step; `None` when no acceptable step exists.
fn line_search<F: Fn(&[f64]) -> Result<f64>>(
    obj: &F,
    x: &[f64],
    fx: f64,
    p: &[f64],
    slope: f64,
) -> Result<Option<(f64, f64)>> {
    let mut t = 1.0;
    let mut trial = vec![0.0; x.len()];
    for _ in 0..MAX_BACKTRACKS {
        for i in 0..x.len() {
            trial[i] = x[i] + t * p[i];
        }
        let f = obj(&trial)?;
        if f.is_nan() {
            return Err(Error::NonFiniteObjective(format!("{trial:?}")));
        }
        if f.is_finite() && f <= fx + ARMIJO_C1 * t * slope {
            return Ok(Some((t, f)));
        }
        t *= BACKTRACK;
    }
    Ok(None)
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`, `rho = 1 / (y^T s)`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], ys: f64) {
    let n = s.len();
    let rho = 1.0 / ys;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteObjective(format!("{what} {v:?}")))
    }
}
