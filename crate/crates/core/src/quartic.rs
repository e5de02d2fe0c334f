//! The quartic kernel `lambda = 4`, solved exactly.
//!
//! For `lambda = 4` the convolution with a radial density only involves its mass,
//! second and fourth moments, so every stationary profile has the form
//! `rho(r) = A (r^4 + B r^2 + L)^(-1/(1-q))` with `A = (q/(1-q))^(1/(1-q))`.
//! The quadratic coefficient solves `B = kappa F_L(B)`, `kappa = 2 + 4/N`, where
//! `F_L(B)` is the second moment of the profile. The mass `m(L)` decreases from
//! `m(0)` to 0; the minimizer either has `m(L*) = 1` or, when `m(0) < 1`, keeps
//! `L = 0` and puts `1 - m(0)` at the origin.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{find_root_bracketed_fallible, RootConfig};
use crate::params::{classify_regime, Extended, ProblemParams, Regime};
use crate::quadrature::{
    integrate_semi_infinite_vec, weighted_moment_hinted, EndpointHints, ProfileDecay, QuadratureRule,
};
use crate::specfun::{beta, sphere_area};

/// Distance to `q_N(4)` below which the solution is reported on the boundary branch.
const BOUNDARY_TOL: f64 = 1e-12;

/// `kappa = 2 + 4/N`.
pub fn kappa(dim: usize) -> f64 {
    2.0 + 4.0 / dim as f64
}

/// `q_N(4) = ((N-2)/(N+2)) (1 + 4/(3N))`.
pub fn critical_q4(dim: usize) -> f64 {
    let n = dim as f64;
    (n - 2.0) / (n + 2.0) * (1.0 + 4.0 / (3.0 * n))
}

/// `m(0) = (1/2) (q - (N-2)/(N+2)) / ((N-2)/N - q)`, infinite for `q >= (N-2)/N`.
pub fn mass_at_zero_closed_form(dim: usize, q: f64) -> Extended {
    let n = dim as f64;
    let upper = (n - 2.0) / n;
    if q >= upper {
        return Extended::Divergent;
    }
    Extended::Finite(0.5 * (q - (n - 2.0) / (n + 2.0)) / (upper - q))
}

/// Concentrated mass `(3/2) (q_N(4) - q) / ((N-2)/N - q)` for `q < q_N(4)`.
pub fn atom_closed_form(dim: usize, q: f64) -> f64 {
    let n = dim as f64;
    (1.5 * (critical_q4(dim) - q) / ((n - 2.0) / n - q)).max(0.0)
}

/// `c_{N,q} = (|S^{N-1}|/2) B(N/2 + 1 - e, 2e - N/2 - 1)`: the second moment of
/// `(r^4 + r^2)^-e`.
pub fn c_nq(dim: usize, q: f64) -> Result<f64> {
    let (n, e) = (dim as f64, 1.0 / (1.0 - q));
    Ok(0.5 * sphere_area(dim) * beta(n / 2.0 + 1.0 - e, 2.0 * e - n / 2.0 - 1.0)?)
}

/// `c'_{N,q} = (|S^{N-1}|/2) B(N/2 - e, 2e - N/2)`: the mass of `(r^4 + r^2)^-e`.
pub fn c_prime_nq(dim: usize, q: f64) -> Result<f64> {
    let (n, e) = (dim as f64, 1.0 / (1.0 - q));
    Ok(0.5 * sphere_area(dim) * beta(n / 2.0 - e, 2.0 * e - n / 2.0)?)
}

/// `B(0)` from `B(0)^(2e - N/2) = kappa c_{N,q} A`.
pub fn b_zero_closed_form(dim: usize, q: f64) -> Result<f64> {
    check_q_range(dim, q)?;
    let (n, e) = (dim as f64, 1.0 / (1.0 - q));
    let rhs = kappa(dim) * c_nq(dim, q)? * amplitude(q);
    Ok(rhs.powf(1.0 / (2.0 * e - n / 2.0)))
}

fn amplitude(q: f64) -> f64 {
    (q / (1.0 - q)).powf(1.0 / (1.0 - q))
}

/// `max(0, (N-2)/(N+2)) < q < N/(N+2)`: the second moment is finite for every
/// `B > 0, L >= 0`.
fn check_q_range(dim: usize, q: f64) -> Result<()> {
    let n = dim as f64;
    let lo = ((n - 2.0) / (n + 2.0)).max(0.0);
    let hi = n / (n + 2.0);
    if dim < 1 || !(q > lo && q < hi) {
        return Err(Error::Regime(format!(
            "quartic profiles need {lo} < q < {hi} for N = {dim}, got q = {q}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `L > 0`, no atom.
    Interior,
    /// `L = 0` with a positive atom.
    Concentrated,
    /// `L = 0` with `m(0) = 1`, i.e. `q = q_N(4)`.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarticSolution {
    pub dim: usize,
    pub q: f64,
    /// Lagrange multiplier `L`.
    pub multiplier: f64,
    /// Quadratic coefficient `B(L)`.
    pub b: f64,
    pub mass: f64,
    pub atom: f64,
    pub branch: Branch,
    pub regime: Regime,
}

impl QuarticSolution {
    /// `A (r^4 + B r^2 + L)^(-1/(1-q))`; divergent at `r = 0` when `L = 0`.
    pub fn density(&self, r: f64) -> Extended {
        density_eval_quartic(self, r)
    }

    /// True for the formal minimizers whose free energy is `-inf`.
    pub fn is_formal(&self) -> bool {
        self.regime == Regime::QuarticFormal
    }
}

pub fn density_eval_quartic(sol: &QuarticSolution, r: f64) -> Extended {
    if r == 0.0 && sol.multiplier == 0.0 {
        return Extended::Divergent;
    }
    let r2 = r * r;
    let poly = r2 * (r2 + sol.b) + sol.multiplier;
    Extended::Finite(amplitude(sol.q) * poly.powf(-1.0 / (1.0 - sol.q)))
}

/// Pieces of `m'(L)`: `phi_k = int r^k phi(r) dr` and `B'(L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassDerivative {
    pub value: f64,
    pub b_prime: f64,
    pub phi0: f64,
    pub phi2: f64,
    pub phi4: f64,
}

/// Quartic solver with configurable quadrature and root finding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct Quartic {
    pub rule: QuadratureRule,
    pub root: RootConfig,
}

impl Quartic {
    pub fn new(rule: QuadratureRule) -> Self {
        Self { rule, root: RootConfig::default() }
    }

    /// `int_0^inf r^(N-1+k) (r^4 + B r^2 + L)^-(e + extra) dr` for each `(k, extra)`.
    fn radial_integrals(&self, dim: usize, q: f64, l: f64, b: f64, specs: &[(f64, f64)]) -> Result<Vec<f64>> {
        let e = 1.0 / (1.0 - q);
        let n = dim as f64;
        let hints: Vec<EndpointHints> = specs
            .iter()
            .map(|&(k, extra)| {
                let p = e + extra;
                let origin = if l > 0.0 {
                    n + k
                } else if b > 0.0 {
                    n + k - 2.0 * p
                } else {
                    n + k - 4.0 * p
                };
                EndpointHints::new(origin, 4.0 * p - n - k + 1.0)
            })
            .collect();
        let res = integrate_semi_infinite_vec(
            |r, out| {
                let r2 = r * r;
                let poly = r2 * (r2 + b) + l;
                let base = r.powi(dim as i32 - 1);
                let lp = poly.ln();
                for (o, &(k, extra)) in out.iter_mut().zip(specs) {
                    *o = base * r.powf(k) * (-(e + extra) * lp).exp();
                }
            },
            &hints,
            &self.rule,
        )?;
        Ok(res.into_iter().map(|r| r.value).collect())
    }

    /// `F_L(B) = A |S^{N-1}| int r^(N+1) (r^4 + B r^2 + L)^-e dr`.
    pub fn second_moment_f(&self, dim: usize, q: f64, l: f64, b: f64) -> Result<f64> {
        check_q_range(dim, q)?;
        if !(l >= 0.0 && b >= 0.0) || (b == 0.0 && l == 0.0) {
            return Err(Error::InvalidParameter(format!("need B > 0 or L > 0, got B = {b}, L = {l}")));
        }
        let v = self.radial_integrals(dim, q, l, b, &[(2.0, 0.0)])?;
        Ok(amplitude(q) * sphere_area(dim) * v[0])
    }

    /// The unique `B > 0` with `B = kappa F_L(B)`.
    pub fn solve_b(&self, dim: usize, q: f64, l: f64) -> Result<f64> {
        check_q_range(dim, q)?;
        if !(l >= 0.0) {
            return Err(Error::InvalidParameter(format!("L must be >= 0, got {l}")));
        }
        let b0 = b_zero_closed_form(dim, q)?;
        let k = kappa(dim);
        // g(t) = B - kappa F_L(B), B = e^t, increasing in t
        let g = |t: f64| -> Result<f64> {
            let b = t.exp();
            Ok(1.0 - k * self.second_moment_f(dim, q, l, b)? / b)
        };
        let (lo, hi) = if l == 0.0 {
            ((b0 * 1e-3).ln(), (b0 * 1e3).ln())
        } else {
            // B(L) < B(0); step down until the sign changes.
            let hi = b0.ln();
            let mut lo = hi;
            let mut found = false;
            for _ in 0..200 {
                lo -= 2.0_f64.ln() * 4.0;
                if g(lo)? < 0.0 {
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::Solver(format!("could not bracket B(L) for L = {l}")));
            }
            (lo, hi)
        };
        let cfg = RootConfig { abs_tol: 1e-14, ..self.root };
        let t = find_root_bracketed_fallible(g, lo, hi, &cfg)?;
        Ok(t.exp())
    }

    /// `m(L)`; divergent when `L = 0` and `q >= (N-2)/N`.
    pub fn mass_at(&self, dim: usize, q: f64, l: f64) -> Result<Extended> {
        check_q_range(dim, q)?;
        let n = dim as f64;
        if l == 0.0 && q >= (n - 2.0) / n {
            return Ok(Extended::Divergent);
        }
        let b = self.solve_b(dim, q, l)?;
        Ok(Extended::Finite(self.mass_with_b(dim, q, l, b)?))
    }

    fn mass_with_b(&self, dim: usize, q: f64, l: f64, b: f64) -> Result<f64> {
        let v = self.radial_integrals(dim, q, l, b, &[(0.0, 0.0)])?;
        Ok(amplitude(q) * sphere_area(dim) * v[0])
    }

    /// `m'(L) = -int (1 + B'(L) r^2) phi(r) dr`.
    pub fn mass_derivative(&self, dim: usize, q: f64, l: f64) -> Result<MassDerivative> {
        check_q_range(dim, q)?;
        if !(l > 0.0) {
            return Err(Error::InvalidParameter(format!("m'(L) needs L > 0, got {l}")));
        }
        let b = self.solve_b(dim, q, l)?;
        let v = self.radial_integrals(dim, q, l, b, &[(0.0, 1.0), (2.0, 1.0), (4.0, 1.0)])?;
        let scale = amplitude(q) * sphere_area(dim) / (1.0 - q);
        let (phi0, phi2, phi4) = (scale * v[0], scale * v[1], scale * v[2]);
        let k = kappa(dim);
        let b_prime = -k * phi2 / (1.0 + k * phi4);
        Ok(MassDerivative { value: -(phi0 + b_prime * phi2), b_prime, phi0, phi2, phi4 })
    }

    /// The minimizer of the free energy for `lambda = 4`.
    ///
    /// Formal minimizers (`N >= 3`, `(N-2)/(N+2) < q <= N/(N+4)`) are only
    /// returned when `allow_formal` is set.
    pub fn solve_minimizer(&self, dim: usize, q: f64, allow_formal: bool) -> Result<QuarticSolution> {
        let params = ProblemParams::new(dim, 4.0, q)?;
        let regime = classify_regime(&params);
        match regime {
            Regime::UnboundedBelow => {
                return Err(Error::Regime(format!(
                    "free energy is unbounded below for N = {dim}, q = {q} <= {}",
                    params.q_low()
                )))
            }
            Regime::QuarticFormal if !allow_formal => {
                return Err(Error::Regime(format!(
                    "N = {dim}, q = {q} only has a formal minimizer with infinite free energy; \
                     enable formal solutions to compute it"
                )))
            }
            _ => {}
        }
        check_q_range(dim, q)?;
        let qc = critical_q4(dim);
        if (q - qc).abs() <= BOUNDARY_TOL {
            let b = self.solve_b(dim, q, 0.0)?;
            return Ok(QuarticSolution {
                dim,
                q,
                multiplier: 0.0,
                b,
                mass: 1.0,
                atom: 0.0,
                branch: Branch::Boundary,
                regime,
            });
        }
        if q < qc {
            let b = self.solve_b(dim, q, 0.0)?;
            let atom = atom_closed_form(dim, q);
            return Ok(QuarticSolution {
                dim,
                q,
                multiplier: 0.0,
                b,
                mass: 1.0 - atom,
                atom,
                branch: Branch::Concentrated,
                regime,
            });
        }
        let excess = |l: f64| -> Result<f64> { Ok(self.mass_at(dim, q, l)?.as_f64() - 1.0) };
        let (mut lo, mut hi) = (1.0, 1.0);
        if excess(1.0)? > 0.0 {
            while excess(hi)? > 0.0 {
                hi *= 2.0;
                if hi > 1e300 {
                    return Err(Error::Solver("m(L) stays above 1".into()));
                }
            }
            lo = hi / 2.0;
        } else {
            while excess(lo)? <= 0.0 {
                lo /= 2.0;
                if lo < 1e-300 {
                    return Err(Error::Solver("m(L) stays below 1 as L -> 0".into()));
                }
            }
        }
        let cfg = RootConfig { abs_tol: 1e-14, ..self.root };
        let t = find_root_bracketed_fallible(|t: f64| excess(t.exp()), lo.ln(), hi.ln(), &cfg)?;
        let l = t.exp();
        let b = self.solve_b(dim, q, l)?;
        let mass = self.mass_with_b(dim, q, l, b)?;
        Ok(QuarticSolution { dim, q, multiplier: l, b, mass, atom: 0.0, branch: Branch::Interior, regime })
    }

    /// `int |x|^4 rho + (1 + 2/N) (int |x|^2 rho)^2 - (1/(1-q)) int rho^q`, the
    /// free energy of `(rho, 1 - int rho)` for `lambda = 4`.
    pub fn free_energy<F: Fn(f64) -> f64>(&self, density: F, decay: ProfileDecay, dim: usize, q: f64) -> Result<f64> {
        let m4 = weighted_moment_hinted(&density, 4, dim, EndpointHints::for_profile(dim, 4.0, 1.0, decay), &self.rule)?;
        let m2 = weighted_moment_hinted(&density, 2, dim, EndpointHints::for_profile(dim, 2.0, 1.0, decay), &self.rule)?;
        let lq = weighted_moment_hinted(
            |r| {
                let v = density(r);
                if v > 0.0 {
                    v.powf(q)
                } else {
                    0.0
                }
            },
            0,
            dim,
            EndpointHints::for_profile(dim, 0.0, q, decay),
            &self.rule,
        )?;
        Ok(m4 + (1.0 + 2.0 / dim as f64) * m2 * m2 - lq / (1.0 - q))
    }
}

/// Power laws of `A (r^4 + B r^2 + L)^-e`.
pub fn quartic_decay(q: f64, l: f64) -> ProfileDecay {
    let e = 1.0 / (1.0 - q);
    ProfileDecay { origin: if l > 0.0 { 0.0 } else { 2.0 * e }, infinity: 4.0 * e }
}

pub fn second_moment_f(dim: usize, q: f64, l: f64, b: f64) -> Result<f64> {
    Quartic::default().second_moment_f(dim, q, l, b)
}

pub fn solve_b(dim: usize, q: f64, l: f64) -> Result<f64> {
    Quartic::default().solve_b(dim, q, l)
}

pub fn mass_at(dim: usize, q: f64, l: f64) -> Result<Extended> {
    Quartic::default().mass_at(dim, q, l)
}

pub fn mass_derivative(dim: usize, q: f64, l: f64) -> Result<MassDerivative> {
    Quartic::default().mass_derivative(dim, q, l)
}

pub fn solve_minimizer_quartic(dim: usize, q: f64, allow_formal: bool) -> Result<QuarticSolution> {
    Quartic::default().solve_minimizer(dim, q, allow_formal)
}

pub fn free_energy_quartic<F: Fn(f64) -> f64>(density: F, decay: ProfileDecay, dim: usize, q: f64) -> Result<f64> {
    Quartic::default().free_energy(density, decay, dim, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn critical_exponent_examples() {
        assert!((critical_q4(6) - 11.0 / 18.0).abs() < 1e-15);
        assert!((critical_q4(5) - 19.0 / 35.0).abs() < 1e-15);
        assert!(critical_q4(5) < 5.0 / 9.0);
        for n in 3..12 {
            assert!(critical_q4(n + 1) > critical_q4(n));
        }
        for n in 3..15usize {
            let m = mass_at_zero_closed_form(n, critical_q4(n)).finite().unwrap();
            assert!((m - 1.0).abs() < 1e-14, "N = {n}");
        }
    }

    #[test]
    fn closed_form_mass_examples() {
        let nf = 6.0;
        assert_eq!(mass_at_zero_closed_form(6, (nf - 2.0) / (nf + 2.0)).finite(), Some(0.0));
        let m = mass_at_zero_closed_form(6, 0.55).finite().unwrap();
        assert!((m - 3.0 / 14.0).abs() < 1e-15);
        assert!(mass_at_zero_closed_form(4, 0.55).is_divergent());
        assert!((mass_at_zero_closed_form(6, 0.6).finite().unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn second_moment_scaling_at_zero() {
        for (dim, q) in [(6usize, 0.6), (8, 0.68), (3, 0.3)] {
            let e = 1.0 / (1.0 - q);
            let n = dim as f64;
            for b in [0.3, 1.0, 7.5] {
                let got = second_moment_f(dim, q, 0.0, b).unwrap();
                let want = b.powf((n + 2.0) / 2.0 - 2.0 * e) * amplitude(q) * c_nq(dim, q).unwrap();
                assert!(rel(got, want) < 1e-10, "N={dim} q={q} B={b}");
            }
        }
    }

    #[test]
    fn second_moment_decreasing() {
        let f: Vec<f64> = [0.1, 0.5, 1.0, 3.0].iter().map(|&b| second_moment_f(6, 0.6, 0.5, b).unwrap()).collect();
        assert!(f.windows(2).all(|w| w[1] < w[0]));
        let f0 = second_moment_f(6, 0.6, 0.5, 0.0).unwrap();
        assert!(f0.is_finite() && f0 > f[0]);
        assert!(second_moment_f(6, 0.8, 0.5, 1.0).is_err());
    }

    #[test]
    fn solve_b_examples() {
        let b0 = solve_b(6, 0.6, 0.0).unwrap();
        assert!(rel(b0, b_zero_closed_form(6, 0.6).unwrap()) < 1e-10);
        let bs: Vec<f64> = [0.0, 0.1, 1.0, 10.0].iter().map(|&l| solve_b(6, 0.6, l).unwrap()).collect();
        assert!(bs.windows(2).all(|w| w[1] < w[0]), "{bs:?}");
        for (l, b) in [0.0, 0.1, 1.0, 10.0].iter().zip(&bs) {
            let res = b - kappa(6) * second_moment_f(6, 0.6, *l, *b).unwrap();
            assert!(res.abs() < 1e-10 * b);
        }
        // B(L) -> 0 with the bound obtained by dropping B r^2
        let (dim, q, l) = (6usize, 0.6, 1e6);
        let e = 1.0 / (1.0 - q);
        let n = dim as f64;
        let b = solve_b(dim, q, l).unwrap();
        let base = Quartic::default().radial_integrals(dim, q, 1.0, 0.0, &[(2.0, 0.0)]).unwrap()[0];
        let bound = kappa(dim) * amplitude(q) * sphere_area(dim) * l.powf((n + 2.0) / 4.0 - e) * base;
        assert!(b < 10.0 * bound, "{b} vs {bound}");
    }

    #[test]
    fn mass_examples() {
        let m = mass_at(6, 0.6, 0.0).unwrap().finite().unwrap();
        assert!(rel(m, 0.75) < 1e-8);
        assert!(mass_at(4, 0.55, 0.0).unwrap().is_divergent());
        assert!(mass_at(6, 0.6, 1e6).unwrap().finite().unwrap() < 1e-3);
        let ms: Vec<f64> = [0.0, 0.01, 0.1, 1.0, 10.0]
            .iter()
            .map(|&l| mass_at(6, 0.6, l).unwrap().finite().unwrap())
            .collect();
        assert!(ms.windows(2).all(|w| w[1] < w[0]), "{ms:?}");
    }

    #[test]
    fn mass_derivative_examples() {
        for l in [0.1, 1.0, 10.0] {
            let d = mass_derivative(6, 0.6, l).unwrap();
            assert!(d.value < 0.0);
            let h = 1e-4 * l;
            let fd = (mass_at(6, 0.6, l + h).unwrap().as_f64() - mass_at(6, 0.6, l - h).unwrap().as_f64()) / (2.0 * h);
            assert!(rel(d.value, fd) < 1e-4, "L = {l}: {} vs {fd}", d.value);
            assert!(d.phi2 * d.phi2 <= d.phi0 * d.phi4);
        }
        assert!(mass_derivative(6, 0.6, 0.0).is_err());
    }

    #[test]
    fn minimizer_branches() {
        let s = solve_minimizer_quartic(6, 0.55, true).unwrap();
        assert_eq!(s.branch, Branch::Concentrated);
        assert!((s.atom - 0.785_714_285_714_285_7).abs() < 1e-12);
        let quad = 1.0 - mass_at(6, 0.55, 0.0).unwrap().finite().unwrap();
        assert!((s.atom - quad).abs() < 1e-8);
        assert!(s.is_formal());
        assert!(solve_minimizer_quartic(6, 0.55, false).is_err());

        let s = solve_minimizer_quartic(3, 0.5, false).unwrap();
        assert_eq!(s.branch, Branch::Interior);
        assert_eq!(s.atom, 0.0);
        assert!(s.multiplier > 0.0 && (s.mass - 1.0).abs() < 1e-8);

        let s = solve_minimizer_quartic(6, 0.63, false).unwrap();
        assert_eq!(s.branch, Branch::Interior);
        assert!(s.multiplier > 0.0 && (s.mass - 1.0).abs() < 1e-8);

        let s = solve_minimizer_quartic(6, 11.0 / 18.0, false).unwrap();
        assert_eq!(s.branch, Branch::Boundary);
        assert!((mass_at(6, 11.0 / 18.0, 0.0).unwrap().as_f64() - 1.0).abs() < 1e-8);

        assert!(matches!(solve_minimizer_quartic(2, 0.3, true), Err(Error::Regime(_))));
        assert!(matches!(solve_minimizer_quartic(6, 0.75, false), Err(Error::Regime(_))));
    }

    #[test]
    fn atom_iff_below_critical() {
        for dim in 3..11usize {
            let n = dim as f64;
            let lo = ((n - 2.0) / (n + 2.0)).max(n / (n + 4.0));
            let hi = n / (n + 2.0);
            for k in 1..8 {
                let q = lo + (hi - lo) * k as f64 / 8.0;
                if (q - critical_q4(dim)).abs() < 1e-9 {
                    continue;
                }
                let s = solve_minimizer_quartic(dim, q, true).unwrap();
                assert_eq!(s.atom > 0.0, q < critical_q4(dim), "N={dim} q={q}");
                assert!((s.mass + s.atom - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn density_asymptotics() {
        let s = solve_minimizer_quartic(10, 0.73, false).unwrap();
        let e = 1.0 / (1.0 - s.q);
        let slope = |r1: f64, r2: f64| {
            (s.density(r2).as_f64().ln() - s.density(r1).as_f64().ln()) / (r2.ln() - r1.ln())
        };
        assert!(rel(slope(1e3, 1e4), -4.0 * e) < 0.01);
        assert!(rel(slope(1e-4, 1e-3), -2.0 * e) < 0.01);
        assert!(s.density(0.0).is_divergent());
        let mass = weighted_moment_hinted(
            |r| s.density(r).as_f64(),
            0,
            10,
            EndpointHints::for_profile(10, 0.0, 1.0, quartic_decay(s.q, 0.0)),
            &QuadratureRule::default(),
        )
        .unwrap();
        assert!(rel(mass, s.mass) < 1e-8);
    }

    #[test]
    fn free_energy_of_empty_density() {
        let decay = ProfileDecay { origin: 0.0, infinity: 100.0 };
        assert_eq!(free_energy_quartic(|_| 0.0, decay, 6, 0.65).unwrap(), 0.0);
    }

    #[test]
    fn minimizer_beats_amplitude_perturbations() {
        // admissible and concentrated: N/(N+4) = 0.714 < 0.73 < q_10(4) = 0.744
        let (dim, q) = (10usize, 0.73);
        let s = solve_minimizer_quartic(dim, q, false).unwrap();
        assert_eq!(s.branch, Branch::Concentrated);
        let decay = quartic_decay(q, 0.0);
        let f_star = free_energy_quartic(|r| s.density(r).as_f64(), decay, dim, q).unwrap();
        for gamma in [0.9, 1.1] {
            let f = free_energy_quartic(|r| gamma * s.density(r).as_f64(), decay, dim, q).unwrap();
            assert!(f > f_star, "gamma = {gamma}: {f} <= {f_star}");
        }
        // dilations with the same mass
        for t in [0.9f64, 1.1] {
            let n = dim as f64;
            let f = free_energy_quartic(|r| t.powf(n) * s.density(t * r).as_f64(), decay, dim, q).unwrap();
            assert!(f > f_star);
        }
    }

    #[test]
    fn free_energy_midpoint_convexity() {
        let (dim, q) = (10usize, 0.73);
        let qd = Quartic::default();
        let e = 1.0 / (1.0 - q);
        let profile = move |b: f64, l: f64| move |r: f64| amplitude(q) * (r.powi(4) + b * r * r + l).powf(-e);
        let decay = quartic_decay(q, 0.0);
        let pairs = [((1.0, 0.0), (2.0, 0.0)), ((0.7, 0.0), (1.5, 0.3)), ((3.0, 0.1), (3.0, 1.0))];
        for ((b0, l0), (b1, l1)) in pairs {
            let r0 = profile(b0, l0);
            let r1 = profile(b1, l1);
            let f0 = qd.free_energy(r0, decay, dim, q).unwrap();
            let f1 = qd.free_energy(r1, decay, dim, q).unwrap();
            let fm = qd.free_energy(|r| 0.5 * (r0(r) + r1(r)), decay, dim, q).unwrap();
            assert!(fm < 0.5 * (f0 + f1), "{fm} vs {f0}, {f1}");
        }
    }
}
