//! Problem parameters, regime classification and the `alpha <-> q` change of variables.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance used to decide that `lambda` is an even integer.
pub const EVEN_LAMBDA_TOL: f64 = 1e-12;

/// Dimension `N`, kernel homogeneity `lambda` and diffusion exponent `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams {
    pub dim: usize,
    pub lambda: f64,
    pub q: f64,
}

impl ProblemParams {
    pub fn new(dim: usize, lambda: f64, q: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter(format!("dimension must be >= 1, got {dim}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")));
        }
        Ok(Self { dim, lambda, q })
    }

    pub fn n(&self) -> f64 {
        self.dim as f64
    }

    /// Exponent `1 / (1 - q)` of the density profile.
    pub fn exponent(&self) -> f64 {
        1.0 / (1.0 - self.q)
    }

    /// `(q / (1 - q))^(1 / (1 - q))`, the amplitude of every stationary profile.
    pub fn amplitude(&self) -> f64 {
        (self.q / (1.0 - self.q)).powf(self.exponent())
    }

    /// Lower boundedness threshold `N / (N + lambda)`.
    pub fn q_low(&self) -> f64 {
        q_low(self.dim, self.lambda)
    }

    /// Upper end `N / (N + 2)` of the range where concentration is possible.
    pub fn q_high(&self) -> f64 {
        let n = self.n();
        n / (n + 2.0)
    }

    /// `(N - 2) / N`, above which the `L = 0` profile has infinite mass.
    pub fn q_mass_divergence(&self) -> f64 {
        let n = self.n();
        (n - 2.0) / n
    }

    /// `Some(n)` when `lambda = 2n` for an integer `n >= 1`.
    pub fn even_half(&self) -> Option<usize> {
        even_half(self.lambda)
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self)
    }

    pub fn alpha(&self) -> f64 {
        alpha_from_q(self)
    }
}

pub fn q_low(dim: usize, lambda: f64) -> f64 {
    let n = dim as f64;
    n / (n + lambda)
}

/// `Some(n)` when `lambda` is within [`EVEN_LAMBDA_TOL`] of `2n`, `n >= 1`.
pub fn even_half(lambda: f64) -> Option<usize> {
    let half = lambda / 2.0;
    let rounded = half.round();
    if rounded >= 1.0 && (half - rounded).abs() < EVEN_LAMBDA_TOL {
        Some(rounded as usize)
    } else {
        None
    }
}

pub fn is_quartic(lambda: f64) -> bool {
    even_half(lambda) == Some(2)
}

/// Where the free energy sits for a parameter triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `q <= N / (N + lambda)`: the free energy is not bounded from below.
    UnboundedBelow,
    /// `N / (N + lambda) < q < 1`.
    Admissible,
    /// `lambda = 4`, `N >= 3` and `(N - 2)/(N + 2) < q <= N/(N + 4)`: a formal
    /// minimizer with infinite free energy still exists.
    QuarticFormal,
}

pub fn classify_regime(p: &ProblemParams) -> Regime {
    if p.q > p.q_low() {
        return Regime::Admissible;
    }
    if is_quartic(p.lambda) && p.dim >= 3 {
        let n = p.n();
        if p.q > (n - 2.0) / (n + 2.0) {
            return Regime::QuarticFormal;
        }
    }
    Regime::UnboundedBelow
}

/// `alpha = (2N - q (2N + lambda)) / (N (1 - q))`; equals 1 at `q = N/(N + lambda)`.
pub fn alpha_from_q(p: &ProblemParams) -> f64 {
    alpha_of(p.dim, p.lambda, p.q)
}

pub fn alpha_of(dim: usize, lambda: f64, q: f64) -> f64 {
    let n = dim as f64;
    (2.0 * n - q * (2.0 * n + lambda)) / (n * (1.0 - q))
}

/// Inverse of [`alpha_from_q`]: `q = N (2 - alpha) / (2N + lambda - alpha N)`.
pub fn q_from_alpha(dim: usize, lambda: f64, alpha: f64) -> Result<f64> {
    let n = dim as f64;
    let denom = 2.0 * n + lambda - alpha * n;
    if denom.abs() < 1e-300 || !denom.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} gives a degenerate denominator for N = {dim}, lambda = {lambda}"
        )));
    }
    Ok(n * (2.0 - alpha) / denom)
}

/// Scaling `(gamma1, gamma2)` that maps the unit-mass minimizer to mass `m`:
/// `mu_m(x) = gamma1 mu(gamma2 x)` with `gamma1 gamma2^-N = m` and
/// `gamma1^(3-q) gamma2^(-lambda-2N) = m`.
pub fn rescale_mass(p: &ProblemParams, m: f64) -> Result<(f64, f64)> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("mass must be > 0, got {m}")));
    }
    let denom = p.n() * (1.0 - p.q) - p.lambda;
    if denom.abs() < 1e-14 {
        return Err(Error::InvalidParameter(
            "N (1 - q) = lambda: the mass scaling is degenerate".into(),
        ));
    }
    let gamma2 = m.powf((p.q - 2.0) / denom);
    let gamma1 = m * gamma2.powi(p.dim as i32);
    Ok((gamma1, gamma2))
}

/// A value that may be `+infinity` for structural reasons (a divergent
/// integral), kept distinct from floating-point overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Extended {
    Finite(f64),
    Divergent,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, Extended::Divergent)
    }

    /// Unwraps a finite value or reports the divergence as an error.
    pub fn require(self, what: &str) -> Result<f64> {
        self.finite().ok_or_else(|| Error::Divergent(what.to_string()))
    }

    /// `+inf` for the divergent case; convenient for comparisons.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}
